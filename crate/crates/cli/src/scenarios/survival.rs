use lplab_core::friedrichs::{Coupling, FriedrichsModel, SurvivalMethod, SurvivalSolver};
use lplab_core::C64;
use rand_chacha::ChaCha8Rng;

use super::{Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

fn schedule(cfg: &Config) -> Result<Vec<f64>, CliError> {
    let taus = cfg.list("schedule.tau")?;
    if taus.is_empty() {
        return Err(cfg.invalid("schedule.tau", "schedule is empty"));
    }
    if taus.iter().any(|&t| t < 0.0) {
        return Err(cfg.invalid("schedule.tau", "times must be nonnegative"));
    }
    Ok(taus)
}

pub fn run_flat(cfg: &Config, ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let e0: f64 = cfg.get("model.e0")?;
    let gamma: f64 = cfg.get("model.gamma")?;
    let taus = schedule(cfg)?;
    cfg.finish()?;

    let model = FriedrichsModel::new(e0, Coupling::Flat { gamma })?;
    let t_max = taus.iter().copied().fold(0.0, f64::max);
    let solver = SurvivalSolver::new(model, t_max)?;
    let expected_pole = C64::new(e0, -0.5 * gamma);
    let mut table = Table::new(
        "survival",
        &["t", "re_A", "im_A", "p", "A_pole_re", "A_pole_im", "method_gap", "exact_gap"],
    );
    let (mut method_gap, mut exact_gap) = (0.0f64, 0.0f64);
    for &t in &taus {
        let a = solver.amplitude(t, SurvivalMethod::SpectralQuadrature)?;
        let b = solver.amplitude(t, SurvivalMethod::PolePlusBackground)?;
        let exact = C64::from_polar((-0.5 * gamma * t).exp(), -e0 * t);
        let gap = (a - b).norm();
        let err = (a - exact).norm();
        method_gap = method_gap.max(gap);
        exact_gap = exact_gap.max(err);
        table.row(vec![
            t.into(),
            a.re.into(),
            a.im.into(),
            a.norm_sqr().into(),
            b.re.into(),
            b.im.into(),
            gap.into(),
            err.into(),
        ]);
    }
    let mut report = Report::default();
    report.at_most("pole_error", (solver.pole().position - expected_pole).norm(), ctx.tol(1e-8));
    report.at_most("closed_form_gap", exact_gap, ctx.tol(1e-6));
    report.at_most("method_gap", method_gap, ctx.tol(1e-6));
    Ok(Outcome {
        tables: vec![table],
        report,
    })
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn log_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| (lo.ln() + (hi / lo).ln() * k as f64 / (count - 1) as f64).exp())
        .collect()
}

fn window(cfg: &Config, key: &str) -> Result<(f64, f64), CliError> {
    let w = cfg.list(key)?;
    if w.len() != 2 || !(w[0] > 0.0 && w[1] > w[0]) {
        return Err(cfg.invalid(key, "expected `lo, hi` with 0 < lo < hi"));
    }
    Ok((w[0], w[1]))
}

pub fn run_threshold(cfg: &Config, ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let e0: f64 = cfg.get("model.e0")?;
    let lambda: f64 = cfg.get("model.lambda")?;
    let omega_c: f64 = cfg.get("model.omega_c")?;
    let taus = schedule(cfg)?;
    let short = window(cfg, "check.short_window")?;
    let tail = window(cfg, "check.tail_window")?;
    cfg.finish()?;

    let model = FriedrichsModel::new(e0, Coupling::HalfLineSqrt { lambda, omega_c })?;
    let t_max = taus.iter().copied().fold(tail.1, f64::max);
    let solver = SurvivalSolver::new(model, t_max)?;
    let mut table = Table::new(
        "survival",
        &["t", "re_A", "im_A", "p", "deficit", "A_pole_re", "A_pole_im", "method_gap"],
    );
    let mut method_gap = 0.0f64;
    let mut max_p = 0.0f64;
    for &t in &taus {
        let a = solver.amplitude(t, SurvivalMethod::SpectralQuadrature)?;
        let b = solver.amplitude(t, SurvivalMethod::PolePlusBackground)?;
        let gap = (a - b).norm();
        method_gap = method_gap.max(gap);
        max_p = max_p.max(a.norm_sqr());
        table.row(vec![
            t.into(),
            a.re.into(),
            a.im.into(),
            a.norm_sqr().into(),
            solver.deficit(t)?.into(),
            b.re.into(),
            b.im.into(),
            gap.into(),
        ]);
    }
    let ts = log_points(short.0, short.1, 9);
    let deficits = ts.iter().map(|&t| solver.deficit(t)).collect::<Result<Vec<_>, _>>()?;
    let tt = log_points(tail.0, tail.1, 9);
    let amps = tt
        .iter()
        .map(|&t| solver.amplitude(t, SurvivalMethod::PolePlusBackground).map(|a| a.norm()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::default();
    report.at_most("method_gap", method_gap, ctx.tol(1e-6));
    report.at_most("survival_probability_max", max_p, 1.0 + ctx.tol(1e-12));
    report.at_most("pole_im", solver.pole().position.im, 0.0);
    report.at_most("short_time_slope_error", (log_slope(&ts, &deficits) - 2.0).abs(), ctx.tol(0.05));
    report.at_most("tail_slope_error", (log_slope(&tt, &amps) + 1.5).abs(), ctx.tol(0.2));
    Ok(Outcome {
        tables: vec![table],
        report,
    })
}
