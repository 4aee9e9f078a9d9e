use lplab_core::decoherence::liouville_kernel;
use lplab_core::numeric::linalg;
use rand_chacha::ChaCha8Rng;

use super::{grid, Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &Config, ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let h0 = cfg.matrix("model.h0")?;
    let v = cfg.matrix("model.v")?;
    cfg.finish()?;

    let k = liouville_kernel(&h0, &v, grid)?;
    let commutator = linalg::max_abs(&(&h0 * &v - &v * &h0));
    let mass = k.offdiagonal_mass();
    let mut spectrum = Table::new("spectrum", &["index", "omega"]);
    for (i, w) in k.free_spectrum().into_iter().enumerate() {
        spectrum.row(vec![i.into(), w.into()]);
    }
    let mut summary = Table::new("kernel", &["hs_dim", "n_points", "self_adjoint_defect", "offdiagonal_mass", "commutator"]);
    let defect = k.self_adjoint_defect();
    summary.row(vec![k.hs_dim().into(), grid.len().into(), defect.into(), mass.into(), commutator.into()]);

    let mut report = Report::default();
    report.at_most("self_adjoint_defect", defect, ctx.tol(1e-12));
    report.holds(
        "offdiagonal_mass_vanishes_iff_commuting",
        (mass <= 1e-12) == (commutator <= 1e-12),
    );
    Ok(Outcome {
        tables: vec![spectrum, summary],
        report,
    })
}
