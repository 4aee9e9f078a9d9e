use lplab_core::evolution::{semigroup_generator, Semigroup};
use lplab_core::scattering::{continue_and_locate_singularities, ContinuationOptions, ScatteringSystem, WaveSign};
use rand_chacha::ChaCha8Rng;

use super::{aux, families, grid, layout, Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &Config, ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let aux = aux(cfg)?;
    let layout = layout(cfg)?;
    let fams = families(cfg)?;
    let tau: f64 = cfg.get("scattering.tau")?;
    let probes: usize = cfg.get("probes.count")?;
    if probes == 0 {
        return Err(cfg.invalid("probes.count", "need at least one probe"));
    }
    cfg.finish()?;

    let mut smatrix = Table::new("smatrix", &["family", "sigma", "det_re", "det_im"]);
    let mut poles = Table::new("poles", &["family", "kind", "re", "im", "radius_or_distance"]);
    let mut report = Report::default();

    for (name, fam) in &fams {
        let k = fam.build(grid, aux, &layout)?;
        let sys = ScatteringSystem::new(k, layout.clone())?;
        let s = sys.s_matrix(tau)?;
        let states = sys.random_probes(tau, probes, rng)?;
        for sign in [WaveSign::Plus, WaveSign::Minus] {
            sys.wave_operator(sign, tau, &states)?;
        }
        for (sigma, det) in s.sigma.iter().zip(s.indicator()) {
            smatrix.row(vec![name.as_str().into(), (*sigma).into(), det.re.into(), det.im.into()]);
        }
        report.at_most(&format!("{name}.limit_gap"), s.gap, ctx.tol(1e-6));
        report.at_most(&format!("{name}.unitarity"), s.unitarity_defect(), ctx.tol(1e-6));
        report.at_most(&format!("{name}.stationarity"), sys.stationarity_defect(tau, &states), ctx.tol(1e-6));
        report.at_most(
            &format!("{name}.intertwining"),
            sys.intertwining_defect(tau, 1.0, &states),
            ctx.tol(1e-6),
        );

        let sg = Semigroup::from_propagator(sys.propagator().clone(), layout.clone());
        let exponents = semigroup_generator(&sg)?.exponent_spectrum()?;
        let opts = ContinuationOptions::new(&grid, &layout);
        let rep = continue_and_locate_singularities(&s, &exponents, &opts, rng);
        for p in &rep.poles {
            poles.row(vec![
                name.as_str().into(),
                "pole".into(),
                p.position.re.into(),
                p.position.im.into(),
                p.radius.into(),
            ]);
        }
        for m in &rep.matches {
            poles.row(vec![
                name.as_str().into(),
                "eigenvalue".into(),
                m.eigenvalue.re.into(),
                m.eigenvalue.im.into(),
                m.distance.into(),
            ]);
        }
        for (z, _) in &rep.flagged {
            poles.row(vec![name.as_str().into(), "flagged".into(), z.re.into(), z.im.into(), f64::NAN.into()]);
        }
        let worst = rep
            .matches
            .iter()
            .map(|m| m.distance / m.eigenvalue.im.abs())
            .fold(0.0, f64::max);
        report.at_most(&format!("{name}.match_distance_rel"), worst, ctx.tol(1e-2));
        report.holds(
            &format!("{name}.every_pole_and_eigenvalue_matched"),
            rep.unmatched_poles.is_empty() && rep.unmatched_eigenvalues.is_empty(),
        );
        if sys.propagator().is_free() {
            report.holds(&format!("{name}.no_singularities"), rep.poles.is_empty() && rep.flagged.is_empty());
        }
    }
    Ok(Outcome {
        tables: vec![smatrix, poles],
        report,
    })
}
