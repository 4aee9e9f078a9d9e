use lplab_core::evolution::{contraction_profile, semigroup_generator, semigroup_residual, Semigroup};
use lplab_core::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{aux, families, grid, layout, random_vector, Context, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::output::{Report, Table};

pub fn run(cfg: &Config, ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let aux = aux(cfg)?;
    let layout = layout(cfg)?;
    let fams = families(cfg)?;
    let probes: usize = cfg.get("probes.count")?;
    let pairs: usize = cfg.get("probes.pairs")?;
    let taus = cfg.list("schedule.tau")?;
    if taus.is_empty() {
        return Err(cfg.invalid("schedule.tau", "schedule is empty"));
    }
    if probes == 0 || pairs == 0 {
        return Err(cfg.invalid("probes.count", "probe and pair counts must be positive"));
    }
    cfg.finish()?;

    let h = grid.spacing();
    let max_steps = ((layout.rho() / h).round() as usize).max(1);
    let mut semigroup = Table::new("semigroup", &["family", "a", "b", "residual"]);
    let mut contraction = Table::new("contraction", &["family", "probe", "tau", "norm"]);
    let mut dissipativity = Table::new("dissipativity", &["family", "max_defect"]);
    let mut report = Report::default();

    for (name, fam) in &fams {
        let k = fam.build(grid, aux, &layout)?;
        let sg = Semigroup::new(&k, layout.clone())?;
        let gen = semigroup_generator(&sg)?;

        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let a = rng.gen_range(0..=max_steps / 2) as f64 * h;
            let b = rng.gen_range(0..=max_steps / 2) as f64 * h;
            let r = semigroup_residual(&sg, &[(a, b)])?;
            worst = worst.max(r);
            semigroup.row(vec![name.as_str().into(), a.into(), b.into(), r.into()]);
        }
        report.at_most(&format!("{name}.semigroup_residual"), worst, ctx.tol(1e-6));

        let mut defect = f64::NEG_INFINITY;
        for _ in 0..probes {
            let mut phi = random_vector(rng, sg.dim());
            phi /= C64::new(sg.norm(&phi), 0.0);
            defect = defect.max(gen.dissipativity_defect(&phi)?);
        }
        dissipativity.row(vec![name.as_str().into(), defect.into()]);
        report.at_most(&format!("{name}.dissipativity_max"), defect, ctx.tol(1e-12));

        let mut rise = 0.0f64;
        for p in 0..probes.min(20) {
            let psi = random_vector(rng, sg.dim());
            let prof = contraction_profile(&sg, &psi, &taus)?;
            for (tau, norm) in taus.iter().zip(&prof) {
                contraction.row(vec![name.as_str().into(), p.into(), (*tau).into(), (*norm).into()]);
            }
            rise = prof.windows(2).map(|w| w[1] - w[0]).fold(rise, f64::max);
        }
        report.at_most(&format!("{name}.contraction_rise"), rise, ctx.tol(1e-10));

        if sg.propagator().is_free() {
            // support on the open interval (0, rho): the end nodes are cleared
            let mut psi = random_vector(rng, sg.dim());
            let d = aux.dim();
            let n = sg.dim();
            for a in 0..d {
                psi[a] = C64::new(0.0, 0.0);
                psi[n - d + a] = C64::new(0.0, 0.0);
            }
            let at_rho = sg.norm(&sg.apply(max_steps as f64 * h, &psi)?);
            report.at_most(&format!("{name}.norm_at_rho"), at_rho, 0.0);
        }
    }
    Ok(Outcome {
        tables: vec![semigroup, contraction, dissipativity],
        report,
    })
}
