//! Finite-time wave operators, the S-matrix in the free translation
//! representation, rational continuation of S(sigma), time operators, age
//! and the superselection split.
//!
//! On the periodic grid of period L a trajectory [x - T, x + T] must avoid
//! the periodic images of [0, rho]; probes and kernel columns are checked
//! against that before any limit is certified.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::direct_integral::{spectral_multiply, to_spectral, AuxSpace, LpVector, TimeGrid};
use crate::evolution::{free_evolve, GeneratorK, Propagator, Region, SubspaceLayout};
use crate::numeric::aaa::{Aaa, Barycentric};
use crate::numeric::linalg;
use crate::{C64, LabError, Result};

/// |sigma| <= pi / 2h. Above it a local interaction couples to modes near
/// the Nyquist edge that have no continuum counterpart, so limits and
/// unitarity are only asserted on this band.
pub fn resolved_band(grid: &TimeGrid) -> f64 {
    PI / (2.0 * grid.spacing())
}

/// Gap allowed between the T and T/2 approximants.
pub const LIMIT_TOL: f64 = 1e-6;
/// Cook integral bound on probe states.
pub const COOK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    /// W+ = lim U(-T) U0(T)
    Plus,
    /// W- = lim U(T) U0(-T)
    Minus,
}

/// Generator, its propagator and the layout, shared by all scattering
/// quantities.
#[derive(Debug, Clone)]
pub struct ScatteringSystem {
    generator: GeneratorK,
    propagator: Propagator,
    layout: SubspaceLayout,
}

/// Certified finite-time wave operator.
#[derive(Debug, Clone, Copy)]
pub struct WaveOperator {
    pub sign: WaveSign,
    pub tau: f64,
    /// Largest ||W(T) psi - W(T/2) psi|| / ||psi|| over the probes.
    pub gap: f64,
    /// Largest Cook integral over [T/2, T] on the probes.
    pub cook_tail: f64,
}

impl ScatteringSystem {
    pub fn new(generator: GeneratorK, layout: SubspaceLayout) -> Result<Self> {
        layout.validate(generator.grid())?;
        crate::evolution::check_kernel_constraint(&generator, &layout)?;
        let propagator = Propagator::new(&generator)?;
        Ok(ScatteringSystem {
            generator,
            propagator,
            layout,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.generator.grid()
    }

    pub fn aux(&self) -> AuxSpace {
        self.generator.aux()
    }

    pub fn layout(&self) -> &SubspaceLayout {
        &self.layout
    }

    pub fn generator(&self) -> &GeneratorK {
        &self.generator
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    fn free(&self, tau: f64, x: &DVector<C64>) -> DVector<C64> {
        free_evolve(self.grid(), self.aux(), tau, x)
    }

    fn check_time(&self, tau: f64) -> Result<()> {
        let steps = self.grid().lattice_steps(tau);
        match steps {
            Some(n) if n > 0 && n % 2 == 0 => {}
            _ => {
                return Err(LabError::Domain(format!(
                    "scattering time {tau} must be a positive even multiple of the spacing {}",
                    self.grid().spacing()
                )))
            }
        }
        if tau + 0.5 * self.layout.rho() >= self.grid().period() {
            return Err(LabError::Domain(format!(
                "scattering time {tau} lets trajectories wrap onto a periodic image of the interaction region"
            )));
        }
        Ok(())
    }

    /// Probe centres x for which the trajectory [x - T, x + T] avoids the
    /// periodic images and both Cook tails vanish, shrunk by `margin`.
    pub fn probe_window(&self, tau: f64, margin: f64) -> Option<(f64, f64)> {
        let l = self.grid().period();
        let rho = self.layout.rho();
        let lo = (rho - l + tau).max(rho - 0.5 * tau) + margin;
        let hi = (l - tau).min(0.5 * tau) - margin;
        (lo < hi).then_some((lo, hi))
    }

    /// Gaussian packet exp(-(t-x)^2 / 2w^2) exp(i sigma0 t) u, flattened.
    pub fn packet(&self, center: f64, width: f64, carrier: f64, u: &DVector<C64>) -> DVector<C64> {
        let aux = self.aux();
        LpVector::from_fn(*self.grid(), aux, |t, a| {
            let env = (-(t - center).powi(2) / (2.0 * width * width)).exp();
            C64::from_polar(env, carrier * t) * u[a]
        })
        .to_flat()
    }

    /// Random packets inside the probe window of `tau`. Carriers stay in the
    /// lower quarter of the band.
    pub fn random_probes(&self, tau: f64, count: usize, rng: &mut impl Rng) -> Result<Vec<DVector<C64>>> {
        let width = 1.0;
        let (lo, hi) = self.probe_window(tau, 6.0 * width).ok_or_else(|| {
            LabError::Domain(format!("no admissible probe positions for scattering time {tau}"))
        })?;
        let band = PI / (4.0 * self.grid().spacing());
        let d = self.aux().dim();
        Ok((0..count)
            .map(|_| {
                let x = rng.gen_range(lo..hi);
                let sigma0 = rng.gen_range(-band.min(4.0)..band.min(4.0));
                let mut u = DVector::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                u /= C64::new(u.norm(), 0.0);
                self.packet(x, width, sigma0, &u)
            })
            .collect())
    }

    /// W(T) x for the finite time T.
    pub fn wave_apply(&self, sign: WaveSign, tau: f64, x: &DVector<C64>) -> DVector<C64> {
        match sign {
            WaveSign::Plus => self.propagator.apply(-tau, &self.free(tau, x)),
            WaveSign::Minus => self.propagator.apply(tau, &self.free(-tau, x)),
        }
    }

    /// Dense W(T).
    pub fn wave_matrix(&self, sign: WaveSign, tau: f64) -> DMatrix<C64> {
        let n = self.propagator.dim();
        let mut w = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            w.set_column(j, &self.wave_apply(sign, tau, &e));
        }
        w
    }

    fn weighted_norm(&self, x: &DVector<C64>) -> f64 {
        (x.norm_squared() * self.grid().spacing()).sqrt()
    }

    /// Trapezoid rule for int_{T/2}^{T} ||kappa U0(+-tau) psi|| d tau on
    /// lattice times.
    pub fn cook_tail(&self, sign: WaveSign, tau: f64, psi: &DVector<C64>) -> f64 {
        let h = self.grid().spacing();
        let steps = (0.5 * tau / h).round() as i64;
        let dir = match sign {
            WaveSign::Plus => 1.0,
            WaveSign::Minus => -1.0,
        };
        let mut acc = 0.0;
        for k in steps..=2 * steps {
            let w = if k == steps || k == 2 * steps { 0.5 } else { 1.0 };
            let moved = self.free(dir * k as f64 * h, psi);
            acc += w * self.weighted_norm(&self.generator.apply_kappa(&moved));
        }
        acc * h
    }

    /// Certify W(T) on probe states: Cook tails below [`COOK_TOL`] and the
    /// T versus T/2 gap below [`LIMIT_TOL`].
    pub fn wave_operator(&self, sign: WaveSign, tau_max: f64, probes: &[DVector<C64>]) -> Result<WaveOperator> {
        self.check_time(tau_max)?;
        let mut gap = 0.0f64;
        let mut cook = 0.0f64;
        for psi in probes {
            let nrm = self.weighted_norm(psi);
            cook = cook.max(self.cook_tail(sign, tau_max, psi) / nrm);
            let full = self.wave_apply(sign, tau_max, psi);
            let half = self.wave_apply(sign, 0.5 * tau_max, psi);
            gap = gap.max(self.weighted_norm(&(full - half)) / nrm);
        }
        if cook > COOK_TOL {
            return Err(LabError::Domain(format!(
                "Cook integral {cook:e} exceeds {COOK_TOL:e}: probes still feel the interaction at T = {tau_max}"
            )));
        }
        if gap > LIMIT_TOL {
            return Err(LabError::LimitNotReached { tau: tau_max, gap });
        }
        Ok(WaveOperator {
            sign,
            tau: tau_max,
            gap,
            cook_tail: cook,
        })
    }

    /// S(T) x = U0(-T) U(2T) U0(-T) x, i.e. W+(T)^dagger W-(T) x.
    pub fn scattering_apply(&self, tau: f64, x: &DVector<C64>) -> DVector<C64> {
        let incoming = self.free(-tau, x);
        let evolved = self.propagator.apply(2.0 * tau, &incoming);
        self.free(-tau, &evolved)
    }

    /// S-matrix kernel from point sources at the centre of the interaction
    /// region, certified against the T/2 approximant.
    pub fn s_matrix(&self, tau_max: f64) -> Result<SMatrix> {
        self.check_time(tau_max)?;
        let full = self.kernel_at(tau_max);
        let half = self.kernel_at(0.5 * tau_max);
        let band = resolved_band(self.grid());
        let gap = full
            .sigma
            .iter()
            .zip(full.spectral.iter().zip(&half.spectral))
            .filter(|(s, _)| s.abs() <= band)
            .map(|(_, (a, b))| linalg::max_abs(&(a - b)))
            .fold(0.0f64, f64::max);
        if gap > LIMIT_TOL {
            return Err(LabError::LimitNotReached { tau: tau_max, gap });
        }
        Ok(SMatrix { gap, ..full })
    }

    fn kernel_at(&self, tau: f64) -> SMatrix {
        let grid = *self.grid();
        let aux = self.aux();
        let d = aux.dim();
        let n = grid.len();
        let h = grid.spacing();
        let source = grid.nearest_node(0.5 * self.layout.rho());
        let mut columns = Vec::with_capacity(d);
        for a in 0..d {
            let mut delta = DVector::zeros(n * d);
            delta[source * d + a] = C64::new(1.0 / h, 0.0);
            columns.push(self.scattering_apply(tau, &delta));
        }
        // kernel[m][(b, a)] = (S delta_a)(t_{source + m})_b
        let kernel: Vec<DMatrix<C64>> = (0..n)
            .map(|m| {
                let k = (source + m) % n;
                DMatrix::from_fn(d, d, |b, a| columns[a][k * d + b])
            })
            .collect();
        // S_hat(sigma) = sum_u exp(-i sigma u) S(u) h with u = t - t_source
        let offsets = TimeGrid::new(0.0, grid.period(), n).expect("valid grid");
        let mut spectral = vec![DMatrix::zeros(d, d); n];
        for a in 0..d {
            let col = LpVector::from_values(offsets, aux, DMatrix::from_fn(n, d, |m, b| kernel[m][(b, a)]))
                .expect("finite kernel");
            let s = to_spectral(&col);
            for (row, block) in spectral.iter_mut().enumerate() {
                for b in 0..d {
                    block[(b, a)] = s.values()[(row, b)];
                }
            }
        }
        SMatrix {
            grid,
            aux,
            tau,
            gap: f64::NAN,
            kernel,
            sigma: grid.sigma_grid(),
            spectral,
        }
    }

    /// max over probes of ||[S(T), K0] psi|| / (||S|| ||K0 psi||), with ||S||
    /// estimated on the same probes.
    pub fn stationarity_defect(&self, tau: f64, probes: &[DVector<C64>]) -> f64 {
        let mut worst = 0.0f64;
        let mut s_norm = 0.0f64;
        let mut parts = Vec::with_capacity(probes.len());
        for psi in probes {
            let s_psi = self.scattering_apply(tau, psi);
            s_norm = s_norm.max(self.weighted_norm(&s_psi) / self.weighted_norm(psi));
            let k_psi = self.apply_free_generator(psi);
            let s_k = self.scattering_apply(tau, &k_psi);
            let k_s = self.apply_free_generator(&s_psi);
            parts.push((self.weighted_norm(&(s_k - k_s)), self.weighted_norm(&k_psi)));
        }
        for (num, den) in parts {
            if den > 0.0 && s_norm > 0.0 {
                worst = worst.max(num / (s_norm * den));
            }
        }
        worst
    }

    /// max over probes of ||S U0(a) psi - U0(a) S psi|| / ||psi||.
    pub fn intertwining_defect(&self, tau: f64, shift: f64, probes: &[DVector<C64>]) -> f64 {
        probes
            .iter()
            .map(|psi| {
                let lhs = self.scattering_apply(tau, &self.free(shift, psi));
                let rhs = self.free(shift, &self.scattering_apply(tau, psi));
                self.weighted_norm(&(lhs - rhs)) / self.weighted_norm(psi)
            })
            .fold(0.0, f64::max)
    }

    fn apply_free_generator(&self, x: &DVector<C64>) -> DVector<C64> {
        let v = LpVector::from_flat(*self.grid(), self.aux(), x).expect("flat vector matches the grid");
        spectral_multiply(&v, |s| C64::new(s, 0.0)).to_flat()
    }
}

/// Stationary S-matrix: kernel S(u) on grid offsets and its transform.
#[derive(Debug, Clone)]
pub struct SMatrix {
    pub grid: TimeGrid,
    pub aux: AuxSpace,
    pub tau: f64,
    /// Largest entrywise gap between the T and T/2 spectral blocks on the
    /// resolved band.
    pub gap: f64,
    /// kernel[m] is the d x d block of S(u) at u = m h (periodic).
    pub kernel: Vec<DMatrix<C64>>,
    /// Ascending frequency grid.
    pub sigma: Vec<f64>,
    /// spectral[i] is S_hat(sigma[i]).
    pub spectral: Vec<DMatrix<C64>>,
}

impl SMatrix {
    /// Identity S-matrix (no scattering).
    pub fn identity(grid: TimeGrid, aux: AuxSpace) -> Self {
        let d = aux.dim();
        let n = grid.len();
        let mut kernel = vec![DMatrix::zeros(d, d); n];
        kernel[0] = DMatrix::identity(d, d) * C64::new(1.0 / grid.spacing(), 0.0);
        SMatrix {
            grid,
            aux,
            tau: 0.0,
            gap: 0.0,
            kernel,
            sigma: grid.sigma_grid(),
            spectral: vec![DMatrix::identity(d, d); n],
        }
    }

    /// max of |S_hat^dagger S_hat - I| over the resolved band.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.aux.dim();
        let band = resolved_band(&self.grid);
        self.sigma
            .iter()
            .zip(&self.spectral)
            .filter(|(sg, _)| sg.abs() <= band)
            .map(|(_, s)| linalg::max_abs(&(s.adjoint() * s - DMatrix::identity(d, d))))
            .fold(0.0, f64::max)
    }

    /// Scalar resonance indicator: det S_hat(sigma).
    pub fn indicator(&self) -> Vec<C64> {
        self.spectral.iter().map(linalg::det).collect()
    }

    /// Largest deviation of S_hat from its value at sigma = 0 over
    /// |sigma| <= band.
    pub fn sigma_variation(&self, band: f64) -> f64 {
        let zero = self.sigma.iter().position(|&s| s == 0.0).expect("grid contains sigma = 0");
        let reference = &self.spectral[zero];
        self.sigma
            .iter()
            .zip(&self.spectral)
            .filter(|(s, _)| s.abs() <= band)
            .map(|(_, block)| linalg::max_abs(&(block - reference)))
            .fold(0.0, f64::max)
    }

    /// The stationary operator as a dense circulant on the flat space.
    pub fn operator(&self) -> DMatrix<C64> {
        let d = self.aux.dim();
        let n = self.grid.len();
        let h = self.grid.spacing();
        DMatrix::from_fn(n * d, n * d, |i, j| {
            let (jn, b) = (i / d, i % d);
            let (kn, a) = (j / d, j % d);
            self.kernel[(jn + n - kn) % n][(b, a)] * h
        })
    }
}

/// Options for the rational continuation of S_hat.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    /// Samples with |sigma| <= band are fitted.
    pub band: f64,
    /// Poles and eigenvalues with Im below -depth are outside the window.
    pub depth: f64,
    /// Held-out residual that selects the degree.
    pub holdout_tol: f64,
    pub max_terms: usize,
    /// Size of the sample perturbation used for confidence radii.
    pub perturbation: f64,
    pub trials: usize,
    /// Poles moving by more than this fraction of |Im| are discarded.
    pub stability: f64,
    /// Residues below this (relative to max |S_hat|) mark pole-zero pairs.
    pub cancellation_tol: f64,
    /// Matching cap as a fraction of |Im mu|.
    pub match_cap: f64,
}

impl ContinuationOptions {
    /// Defaults for a grid and layout. A mode with |Im mu| = delta decays by
    /// exp(-delta rho) while crossing the interaction region, so the window
    /// stops where that factor drops below the held-out tolerance.
    pub fn new(grid: &TimeGrid, layout: &SubspaceLayout) -> Self {
        let band = resolved_band(grid);
        let holdout_tol: f64 = 1e-10;
        ContinuationOptions {
            band,
            depth: (1.0 / holdout_tol).ln() / layout.rho(),
            holdout_tol,
            max_terms: 40,
            perturbation: 1e-8,
            trials: 4,
            stability: 1e-2,
            cancellation_tol: 1e-10,
            match_cap: 1e-2,
        }
    }

    /// Resolution floor 2 pi / period for |Im|.
    pub fn floor(grid: &TimeGrid) -> f64 {
        2.0 * PI / grid.period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub position: C64,
    pub residue: C64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pole: C64,
    pub eigenvalue: C64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlagReason {
    PoleZeroCancellation,
    Unstable { radius: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct SingularityReport {
    pub poles: Vec<Singularity>,
    pub flagged: Vec<(C64, FlagReason)>,
    /// Eigenvalues of B inside the continuation window.
    pub eigenvalues: Vec<C64>,
    pub matches: Vec<Match>,
    pub unmatched_poles: Vec<C64>,
    pub unmatched_eigenvalues: Vec<C64>,
    pub degree: usize,
    pub holdout_residual: f64,
}

fn fit_by_holdout(z: &[C64], f: &[C64], opts: &ContinuationOptions) -> (Barycentric, f64) {
    let train_z: Vec<C64> = z.iter().step_by(2).copied().collect();
    let train_f: Vec<C64> = f.iter().step_by(2).copied().collect();
    let test: Vec<(C64, C64)> = z.iter().copied().zip(f.iter().copied()).skip(1).step_by(2).collect();
    let scale = f.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(f64::MIN_POSITIVE);
    let holdout = |r: &Barycentric| {
        test.iter()
            .map(|(zz, ff)| (r.eval(*zz) - ff).norm())
            .fold(0.0f64, f64::max)
            / scale
    };
    let mut it = Aaa::new(&train_z, &train_f);
    let mut best = (it.approximant().clone(), holdout(it.approximant()));
    while best.1 > opts.holdout_tol && it.approximant().support.len() < opts.max_terms {
        if !it.step() {
            break;
        }
        let h = holdout(it.approximant());
        if h < best.1 {
            best = (it.approximant().clone(), h);
        }
    }
    best
}

fn fit_with_terms(z: &[C64], f: &[C64], terms: usize) -> Barycentric {
    let train_z: Vec<C64> = z.iter().step_by(2).copied().collect();
    let train_f: Vec<C64> = f.iter().step_by(2).copied().collect();
    let mut it = Aaa::new(&train_z, &train_f);
    while it.approximant().support.len() < terms {
        if !it.step() {
            break;
        }
    }
    it.approximant().clone()
}

/// Continue the indicator det S_hat(sigma) by a rational fit and pair its
/// lower half-plane poles with eigenvalues of B inside the window.
pub fn continue_and_locate_singularities(
    s: &SMatrix,
    b_eigenvalues: &[C64],
    opts: &ContinuationOptions,
    rng: &mut impl Rng,
) -> SingularityReport {
    let indicator = s.indicator();
    let (z, f): (Vec<C64>, Vec<C64>) = s
        .sigma
        .iter()
        .zip(&indicator)
        .filter(|(sg, _)| sg.abs() <= opts.band)
        .map(|(sg, v)| (C64::new(*sg, 0.0), *v))
        .unzip();
    let floor = ContinuationOptions::floor(&s.grid);
    let lo = z.first().map_or(0.0, |v| v.re);
    let hi = z.last().map_or(0.0, |v| v.re);
    let in_window = |p: &C64| p.re >= lo && p.re <= hi && p.im <= -floor && p.im >= -opts.depth;

    let (fit, holdout_residual) = fit_by_holdout(&z, &f, opts);
    let terms = fit.support.len();
    let scale = f.iter().fold(0.0f64, |a, v| a.max(v.norm()));

    let perturbed: Vec<Vec<C64>> = (0..opts.trials)
        .map(|_| {
            let noisy: Vec<C64> = f
                .iter()
                .map(|v| v + C64::from_polar(opts.perturbation * scale, rng.gen_range(0.0..2.0 * PI)))
                .collect();
            fit_with_terms(&z, &noisy, terms).poles()
        })
        .collect();

    let mut report = SingularityReport {
        degree: fit.degree(),
        holdout_residual,
        ..Default::default()
    };
    for p in fit.poles().into_iter().filter(in_window) {
        let residue = fit.residue(p);
        if residue.norm() < opts.cancellation_tol * scale.max(1.0) {
            report.flagged.push((p, FlagReason::PoleZeroCancellation));
            continue;
        }
        let radius = perturbed
            .iter()
            .map(|poles| poles.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max);
        if radius > opts.stability * p.im.abs() {
            report.flagged.push((p, FlagReason::Unstable { radius }));
            continue;
        }
        report.poles.push(Singularity {
            position: p,
            residue,
            radius,
        });
    }
    report.eigenvalues = b_eigenvalues.iter().copied().filter(in_window).collect();

    // greedy nearest-neighbour pairing under the distance cap
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in report.poles.iter().enumerate() {
        for (j, mu) in report.eigenvalues.iter().enumerate() {
            let dist = (p.position - mu).norm();
            if dist <= opts.match_cap * mu.im.abs() {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pole_used = vec![false; report.poles.len()];
    let mut eig_used = vec![false; report.eigenvalues.len()];
    for (dist, i, j) in pairs {
        if pole_used[i] || eig_used[j] {
            continue;
        }
        pole_used[i] = true;
        eig_used[j] = true;
        report.matches.push(Match {
            pole: report.poles[i].position,
            eigenvalue: report.eigenvalues[j],
            distance: dist,
        });
    }
    report.unmatched_poles = report
        .poles
        .iter()
        .zip(&pole_used)
        .filter(|(_, u)| !**u)
        .map(|(p, _)| p.position)
        .collect();
    report.unmatched_eigenvalues = report
        .eigenvalues
        .iter()
        .zip(&eig_used)
        .filter(|(_, u)| !**u)
        .map(|(e, _)| *e)
        .collect();
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Incoming,
    Outgoing,
    Free,
}

/// Time operator as a Hermitian matrix on the flat space.
#[derive(Debug, Clone)]
pub struct AgeObservable {
    pub representation: Representation,
    pub operator: DMatrix<C64>,
}

impl AgeObservable {
    /// Multiplication by t in the free translation representation.
    pub fn multiplication(grid: &TimeGrid, aux: AuxSpace, representation: Representation) -> Self {
        let d = aux.dim();
        let n = grid.len() * d;
        let operator = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(grid.point(i / d), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        AgeObservable {
            representation,
            operator,
        }
    }

    /// Ascending spectrum.
    pub fn spectrum(&self) -> Vec<f64> {
        let (values, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&self.operator));
        let mut v: Vec<f64> = values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// T_out = S T_in S^dagger.
pub fn outgoing_time_operator(s: &DMatrix<C64>, t_in: &AgeObservable) -> Result<AgeObservable> {
    let n = t_in.operator.nrows();
    if s.nrows() != n || s.ncols() != n {
        return Err(LabError::Dimension("S and the time operator act on different spaces".into()));
    }
    let defect = linalg::max_abs(&(s.adjoint() * s - DMatrix::identity(n, n)));
    if defect > 1e-8 {
        return Err(LabError::Validation(format!("S is not unitary (defect {defect:e})")));
    }
    Ok(AgeObservable {
        representation: Representation::Outgoing,
        operator: s * &t_in.operator * s.adjoint(),
    })
}

/// <T_in> on the incoming component: sum t_k |(P- psi)_k|^2 h / ||P- psi||^2.
pub fn age_expectation(layout: &SubspaceLayout, psi: &LpVector) -> Result<f64> {
    let grid = psi.grid();
    let mut weight = 0.0;
    let mut moment = 0.0;
    for k in 0..grid.len() {
        if layout.region(grid, k) != Region::Incoming {
            continue;
        }
        let m = psi.values().row(k).norm_squared();
        weight += m;
        moment += grid.point(k) * m;
    }
    if weight == 0.0 {
        return Err(LabError::UndefinedAge);
    }
    Ok(moment / weight)
}

/// Observable for the superselection check.
#[derive(Debug, Clone)]
pub enum AuxObservable {
    /// d x d operator applied at every node.
    PerFiber(DMatrix<C64>),
    /// Operator on the flat space; must be block diagonal with equal blocks.
    Lifted(DMatrix<C64>),
}

#[derive(Debug, Clone, Copy)]
pub struct SuperselectionReport {
    pub global: C64,
    pub incoming: C64,
    pub interaction: C64,
    pub outgoing: C64,
    /// Largest |(psi_X, A psi_Y)| over distinct regions X, Y.
    pub cross_terms: f64,
    /// |global - (incoming + interaction + outgoing)|.
    pub split_defect: f64,
}

fn fiber_operator(aux: AuxSpace, grid: &TimeGrid, a: &AuxObservable) -> Result<DMatrix<C64>> {
    let d = aux.dim();
    match a {
        AuxObservable::PerFiber(m) => {
            if m.nrows() != d || m.ncols() != d {
                return Err(LabError::Dimension("auxiliary operator does not match the fibres".into()));
            }
            Ok(m.clone())
        }
        AuxObservable::Lifted(m) => {
            let n = grid.len() * d;
            if m.nrows() != n || m.ncols() != n {
                return Err(LabError::Dimension("lifted operator does not match the flat space".into()));
            }
            let block = m.view((0, 0), (d, d)).into_owned();
            for i in 0..n {
                for j in 0..n {
                    let expected = if i / d == j / d { block[(i % d, j % d)] } else { C64::new(0.0, 0.0) };
                    if (m[(i, j)] - expected).norm() > 1e-12 * linalg::max_abs(m).max(1.0) {
                        return Err(LabError::NotDecomposable(format!(
                            "entry ({i}, {j}) couples distinct nodes or varies along the grid"
                        )));
                    }
                }
            }
            Ok(block)
        }
    }
}

/// Split <A>_psi over the incoming, interaction and outgoing supports.
pub fn superselection_check(layout: &SubspaceLayout, psi: &LpVector, a: &AuxObservable) -> Result<SuperselectionReport> {
    let grid = *psi.grid();
    let block = fiber_operator(psi.aux(), &grid, a)?;
    let h = grid.spacing();
    let apply = |v: &LpVector| -> LpVector {
        let values = v.values() * block.transpose();
        LpVector::from_values(grid, v.aux(), values).expect("shape preserved")
    };
    let part = |r: Region| psi.masked(|k| layout.region(&grid, k) == r);
    let parts = [part(Region::Incoming), part(Region::Interaction), part(Region::Outgoing)];
    let expectation = |x: &LpVector, y: &LpVector| -> C64 {
        x.values()
            .iter()
            .zip(apply(y).values().iter())
            .map(|(p, q)| p.conj() * q)
            .sum::<C64>()
            * h
    };
    let global = expectation(psi, psi);
    let mut diag = [C64::new(0.0, 0.0); 3];
    let mut cross = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let v = expectation(&parts[i], &parts[j]);
            if i == j {
                diag[i] = v;
            } else {
                cross = cross.max(v.norm());
            }
        }
    }
    let sum = diag[0] + diag[1] + diag[2];
    Ok(SuperselectionReport {
        global,
        incoming: diag[0],
        interaction: diag[1],
        outgoing: diag[2],
        cross_terms: cross,
        split_defect: (global - sum).norm(),
    })
}
