#![allow(dead_code)]

use lplab_core::direct_integral::{AuxSpace, TimeGrid};
use lplab_core::evolution::{GeneratorK, KappaFamily, SubspaceLayout};
use lplab_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Grid of the semigroup audit: 256 nodes on [-16, 16), rho = 8.
pub fn audit_grid() -> TimeGrid {
    TimeGrid::new(-16.0, 16.0, 256).unwrap()
}

pub fn audit_layout() -> SubspaceLayout {
    SubspaceLayout::new(8.0).unwrap()
}

pub fn rank_one_aux() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)])
}

pub fn mixed_aux() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.4, 0.0)])
}

pub fn separable_family(lambda: f64, aux_op: DMatrix<C64>) -> KappaFamily {
    KappaFamily::Separable {
        lambda,
        center: 4.0,
        width: 0.45,
        aux_op,
    }
}

pub fn banded_family() -> KappaFamily {
    KappaFamily::Banded {
        lambda: 0.8,
        width: 0.5,
        plateau: (3.0, 5.0),
        edge: 0.5,
        aux_op: mixed_aux(),
    }
}

/// The three audit generators: free, separable, banded (d = 2).
pub fn audit_generators() -> Vec<(&'static str, GeneratorK)> {
    let grid = audit_grid();
    let aux = AuxSpace::new(2).unwrap();
    let layout = audit_layout();
    vec![
        ("free", KappaFamily::Zero.build(grid, aux, &layout).unwrap()),
        ("separable", separable_family(1.0, rank_one_aux()).build(grid, aux, &layout).unwrap()),
        ("banded", banded_family().build(grid, aux, &layout).unwrap()),
    ]
}
