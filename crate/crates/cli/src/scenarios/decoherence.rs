use lplab_core::decoherence::{
    effectively_pure_check, nonstationary_evolve, purity, reduce, TimeDependentHamiltonian,
};
use lplab_core::direct_integral::LpVector;
use lplab_core::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{aux, grid, random_vector, Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &Config, ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let aux = aux(cfg)?;
    let before = cfg.matrix("model.before")?;
    let after = cfg.matrix("model.after")?;
    let switch: f64 = cfg.get("model.switch_time")?;
    let center: f64 = cfg.get("state.center")?;
    let width: f64 = cfg.get("state.width")?;
    let phi = cfg.matrix("state.phi")?;
    let taus = cfg.list("schedule.tau")?;
    let probes: usize = cfg.get("probes.count")?;
    if taus.is_empty() {
        return Err(cfg.invalid("schedule.tau", "schedule is empty"));
    }
    if phi.nrows() != 1 || phi.ncols() != aux.dim() {
        return Err(cfg.invalid("state.phi", format!("expected one row of {} entries", aux.dim())));
    }
    if width <= 0.0 {
        return Err(cfg.invalid("state.width", "must be positive"));
    }
    cfg.finish()?;

    let switched = TimeDependentHamiltonian::from_fn(grid, aux, |t| if t < switch { before.clone() } else { after.clone() })?;
    let stationary = TimeDependentHamiltonian::constant(grid, aux, before.clone())?;
    let psi = LpVector::from_fn(grid, aux, |t, a| {
        C64::new((-(t - center).powi(2) / (2.0 * width * width)).exp(), 0.0) * phi[(0, a)]
    });

    let mut table = Table::new("purity", &["tau", "purity_switched", "purity_stationary", "norm", "pure"]);
    let mut report = Report::default();
    let (mut stationary_loss, mut norm_drift) = (0.0f64, 0.0f64);
    let mut last = 1.0;
    for &tau in &taus {
        let out = nonstationary_evolve(&psi, &switched, tau)?;
        let reference = nonstationary_evolve(&psi, &stationary, tau)?;
        let p = purity(&reduce(&out)?);
        let p0 = purity(&reduce(&reference)?);
        stationary_loss = stationary_loss.max((p0 - 1.0).abs());
        norm_drift = norm_drift.max((out.norm() - psi.norm()).abs() / psi.norm());
        last = p;
        table.row(vec![
            tau.into(),
            p.into(),
            p0.into(),
            out.norm().into(),
            effectively_pure_check(&out)?.pure.into(),
        ]);
    }
    report.at_most("stationary_purity_loss", stationary_loss, ctx.tol(1e-10));
    report.at_most("norm_drift", norm_drift, ctx.tol(1e-12));
    report.at_most("final_switched_purity", last, 0.99);

    let h = grid.spacing();
    let steps = (taus.iter().copied().fold(0.0, f64::max) / h).round() as usize;
    report.at_most("chain_defect", switched.chain_defect(steps / 2 + 1, steps / 3 + 1), ctx.tol(1e-12));

    let mut disagreements = 0usize;
    for case in 0..probes {
        let d = aux.dim();
        let state = if case % 2 == 0 {
            let f = random_vector(rng, grid.len());
            let v = random_vector(rng, d);
            LpVector::from_fn(grid, aux, |t, a| f[grid.nearest_node(t)] * v[a])
        } else {
            let x = random_vector(rng, grid.len() * d);
            LpVector::from_flat(grid, aux, &x)?
        };
        let scale: f64 = rng.gen_range(0.5..2.0);
        let state = state.scale(C64::new(scale, 0.0));
        let p = purity(&reduce(&state)?);
        if effectively_pure_check(&state)?.pure != ((p - 1.0).abs() <= 1e-10) {
            disagreements += 1;
        }
    }
    report.at_most("pure_check_disagreements", disagreements as f64, 0.0);
    Ok(Outcome {
        tables: vec![table],
        report,
    })
}
