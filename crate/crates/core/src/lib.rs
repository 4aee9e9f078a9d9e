//! Lax-Phillips evolution on a discretized direct-integral space.
//!
//! States live on a periodic time grid with a finite-dimensional auxiliary
//! space attached to every node. On top of that sit the Lee-Friedrichs
//! resonance model, the compressed semigroup and its generator, finite-time
//! scattering operators with rational continuation of the S-matrix, and
//! purity diagnostics for fibered states.

pub mod decoherence;
pub mod direct_integral;
pub mod error;
pub mod evolution;
pub mod friedrichs;
pub mod numeric;
pub mod scattering;

pub use error::{LabError, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;
