use lplab_core::direct_integral::LpVector;
use lplab_core::scattering::{superselection_check, AuxObservable};
use rand_chacha::ChaCha8Rng;

use super::{aux, grid, layout, random_hermitian, random_vector, Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &Config, ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let aux = aux(cfg)?;
    let layout = layout(cfg)?;
    let trials: usize = cfg.get("probes.count")?;
    if trials == 0 {
        return Err(cfg.invalid("probes.count", "need at least one trial"));
    }
    cfg.finish()?;
    layout.validate(&grid)?;

    let mut table = Table::new(
        "superselection",
        &["trial", "global_re", "global_im", "incoming_re", "interaction_re", "outgoing_re", "cross", "split_defect"],
    );
    let (mut cross, mut split) = (0.0f64, 0.0f64);
    for trial in 0..trials {
        let x = random_vector(rng, grid.len() * aux.dim());
        let psi = LpVector::from_flat(grid, aux, &x)?;
        let a = random_hermitian(rng, aux.dim());
        let rep = superselection_check(&layout, &psi, &AuxObservable::PerFiber(a))?;
        cross = cross.max(rep.cross_terms);
        split = split.max(rep.split_defect / rep.global.norm().max(1.0));
        table.row(vec![
            trial.into(),
            rep.global.re.into(),
            rep.global.im.into(),
            rep.incoming.re.into(),
            rep.interaction.re.into(),
            rep.outgoing.re.into(),
            rep.cross_terms.into(),
            rep.split_defect.into(),
        ]);
    }
    let mut report = Report::default();
    report.at_most("cross_terms_max", cross, ctx.tol(1e-12));
    report.at_most("split_defect_rel", split, ctx.tol(1e-12));
    Ok(Outcome {
        tables: vec![table],
        report,
    })
}
