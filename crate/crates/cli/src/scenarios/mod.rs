//! Built-in scenarios and the helpers that read their shared keys.

mod decoherence;
mod liouville;
mod semigroup;
mod smatrix;
mod superselection;
mod survival;

use lplab_core::direct_integral::{AuxSpace, TimeGrid};
use lplab_core::evolution::{KappaFamily, SubspaceLayout};
use lplab_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub struct Context {
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Context {
    /// Documented tolerance scaled by `--tolerance-scale`.
    pub fn tol(&self, base: f64) -> f64 {
        base * self.tolerance_scale
    }
}

pub struct Outcome {
    pub tables: Vec<Table>,
    pub report: Report,
}

type Runner = fn(&Config, &Context, &mut ChaCha8Rng) -> Result<Outcome, CliError>;

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub run: Runner,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "survival-flat",
        description: "Friedrichs model with flat coupling against the exponential closed form",
        run: survival::run_flat,
    },
    Scenario {
        name: "survival-threshold",
        description: "Friedrichs model with a sqrt threshold: short-time and power-law regimes",
        run: survival::run_threshold,
    },
    Scenario {
        name: "semigroup-audit",
        description: "Semigroup law, dissipativity and contraction of the reduced evolution",
        run: semigroup::run,
    },
    Scenario {
        name: "smatrix-poles",
        description: "Certified S-matrix, stationarity and pole/eigenvalue correspondence",
        run: smatrix::run,
    },
    Scenario {
        name: "superselection",
        description: "Split of auxiliary expectations over incoming, interaction and outgoing parts",
        run: superselection::run,
    },
    Scenario {
        name: "decoherence-switch",
        description: "Purity under stationary and switched fibre Hamiltonians",
        run: decoherence::run,
    },
    Scenario {
        name: "liouville-kernel",
        description: "Liouville kernel self-adjointness and off-diagonal interaction mass",
        run: liouville::run,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

pub(crate) fn grid(cfg: &Config) -> Result<TimeGrid, CliError> {
    let t_min: f64 = cfg.get("grid.t_min")?;
    let t_max: f64 = cfg.get("grid.t_max")?;
    let n: usize = cfg.get("grid.n_points")?;
    TimeGrid::new(t_min, t_max, n).map_err(|e| cfg.invalid("grid.n_points", e.to_string()))
}

pub(crate) fn aux(cfg: &Config) -> Result<AuxSpace, CliError> {
    let d: usize = cfg.get("aux.dim")?;
    AuxSpace::new(d).map_err(|e| cfg.invalid("aux.dim", e.to_string()))
}

pub(crate) fn layout(cfg: &Config) -> Result<SubspaceLayout, CliError> {
    let rho: f64 = cfg.get("layout.rho")?;
    SubspaceLayout::new(rho).map_err(|e| cfg.invalid("layout.rho", e.to_string()))
}

/// Names from the `families` key; each non-zero family reads its own section.
pub(crate) fn families(cfg: &Config) -> Result<Vec<(String, KappaFamily)>, CliError> {
    let names = cfg.string("families")?;
    names
        .split(',')
        .map(|n| {
            let n = n.trim();
            family(cfg, n).map(|f| (n.to_string(), f))
        })
        .collect()
}

fn family(cfg: &Config, name: &str) -> Result<KappaFamily, CliError> {
    let key = |k: &str| format!("{name}.{k}");
    Ok(match name {
        "zero" => KappaFamily::Zero,
        "separable" => KappaFamily::Separable {
            lambda: cfg.get(&key("lambda"))?,
            center: cfg.get(&key("center"))?,
            width: cfg.get(&key("width"))?,
            aux_op: cfg.matrix(&key("aux_op"))?,
        },
        "banded" => {
            let plateau = cfg.list(&key("plateau"))?;
            if plateau.len() != 2 {
                return Err(cfg.invalid(&key("plateau"), "expected two values"));
            }
            KappaFamily::Banded {
                lambda: cfg.get(&key("lambda"))?,
                width: cfg.get(&key("width"))?,
                plateau: (plateau[0], plateau[1]),
                edge: cfg.get(&key("edge"))?,
                aux_op: cfg.matrix(&key("aux_op"))?,
            }
        }
        "diagonal" => KappaFamily::Diagonal {
            lambda: cfg.get(&key("lambda"))?,
            center: cfg.get(&key("center"))?,
            width: cfg.get(&key("width"))?,
            aux_op: cfg.matrix(&key("aux_op"))?,
        },
        other => {
            return Err(cfg.invalid(
                "families",
                format!("unknown family `{other}` (expected zero, separable, banded or diagonal)"),
            ))
        }
    })
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}
