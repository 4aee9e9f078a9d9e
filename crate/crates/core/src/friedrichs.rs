//! Lee-Friedrichs model: a level E0 coupled to a continuum through g(omega).
//!
//! Two couplings with closed-form self-energies:
//!
//! * flat: |g|^2 = gamma / 2 pi on the whole real line,
//! * half-line: |g|^2 = lambda^2 sqrt(omega) exp(-omega / omega_c), omega >= 0.
//!
//! For the half-line coupling, with s = sqrt(-z) on the principal branch,
//!
//!   Sigma_I(z) = -lambda^2 [ sqrt(pi omega_c) - pi s erfcx(s / sqrt(omega_c)) ]
//!
//! and the continuation through the positive axis is
//! Sigma_II(z) = Sigma_I(z) - 2 pi i |g(z)|^2.

use std::f64::consts::PI;

use crate::numeric::faddeeva::erfcx;
use crate::numeric::quadrature::{gauss_legendre, CompositeRule};
use crate::{C64, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Flat { gamma: f64 },
    HalfLineSqrt { lambda: f64, omega_c: f64 },
}

/// Support of |g|^2 on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumSupport {
    pub lower: f64,
    pub upper: f64,
}

impl ContinuumSupport {
    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lower && omega <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedrichsModel {
    e0: f64,
    coupling: Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergyEval {
    pub z: C64,
    pub sigma: C64,
    pub sheet: Sheet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    pub position: C64,
    pub residue: C64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalMethod {
    SpectralQuadrature,
    PolePlusBackground,
}

impl FriedrichsModel {
    pub fn new(e0: f64, coupling: Coupling) -> Result<Self> {
        if !e0.is_finite() {
            return Err(LabError::Validation("e0 must be finite".into()));
        }
        match coupling {
            Coupling::Flat { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(LabError::Validation(format!("gamma must be > 0, got {gamma}")));
                }
            }
            Coupling::HalfLineSqrt { lambda, omega_c } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(LabError::Validation(format!("lambda must be > 0, got {lambda}")));
                }
                if !(omega_c > 0.0 && omega_c.is_finite()) {
                    return Err(LabError::Validation(format!("omega_c must be > 0, got {omega_c}")));
                }
                if e0 <= 0.0 {
                    return Err(LabError::Validation(format!(
                        "e0 must lie inside the continuum (> 0), got {e0}"
                    )));
                }
            }
        }
        Ok(FriedrichsModel { e0, coupling })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn continuum_support(&self) -> ContinuumSupport {
        match self.coupling {
            Coupling::Flat { .. } => ContinuumSupport {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
            Coupling::HalfLineSqrt { .. } => ContinuumSupport {
                lower: 0.0,
                upper: f64::INFINITY,
            },
        }
    }

    /// |g(omega)|^2 on the real axis.
    pub fn coupling_squared(&self, omega: f64) -> f64 {
        match self.coupling {
            Coupling::Flat { gamma } => gamma / (2.0 * PI),
            Coupling::HalfLineSqrt { lambda, omega_c } => {
                if omega < 0.0 {
                    0.0
                } else {
                    lambda * lambda * omega.sqrt() * (-omega / omega_c).exp()
                }
            }
        }
    }

    /// Analytic extension of |g|^2 (principal square root).
    pub fn coupling_squared_continued(&self, z: C64) -> C64 {
        match self.coupling {
            Coupling::Flat { gamma } => C64::new(gamma / (2.0 * PI), 0.0),
            Coupling::HalfLineSqrt { lambda, omega_c } => lambda * lambda * sqrt_below(z) * (-z / omega_c).exp(),
        }
    }

    /// Golden-rule decay rate 2 pi |g(E0)|^2.
    pub fn golden_rule_rate(&self) -> f64 {
        2.0 * PI * self.coupling_squared(self.e0)
    }

    fn first_sheet(&self, z: C64) -> Result<C64> {
        match self.coupling {
            Coupling::Flat { gamma } => {
                if z.im == 0.0 {
                    return Err(LabError::BranchCut(z));
                }
                Ok(C64::new(0.0, -0.5 * gamma * z.im.signum()))
            }
            Coupling::HalfLineSqrt { lambda, omega_c } => {
                if z.im == 0.0 && z.re >= 0.0 {
                    return Err(LabError::BranchCut(z));
                }
                let s = (-z).sqrt();
                Ok(-lambda * lambda * ((PI * omega_c).sqrt() - PI * s * erfcx(s / omega_c.sqrt())))
            }
        }
    }

    /// Boundary value Sigma_I(omega - i0) on the support.
    fn first_sheet_below(&self, omega: f64) -> C64 {
        match self.coupling {
            Coupling::Flat { gamma } => C64::new(0.0, 0.5 * gamma),
            Coupling::HalfLineSqrt { lambda, omega_c } => {
                // sqrt(-(omega - i0)) = i sqrt(omega)
                let s = C64::new(0.0, omega.max(0.0).sqrt());
                -lambda * lambda * ((PI * omega_c).sqrt() - PI * s * erfcx(s / omega_c.sqrt()))
            }
        }
    }

    /// d Sigma / dz on the requested sheet.
    pub fn self_energy_derivative(&self, z: C64, sheet: Sheet) -> Result<C64> {
        match self.coupling {
            Coupling::Flat { .. } => {
                self.self_energy(z, sheet)?;
                Ok(C64::new(0.0, 0.0))
            }
            Coupling::HalfLineSqrt { lambda, omega_c } => {
                self.self_energy(z, sheet)?;
                let l2 = lambda * lambda;
                let s = (-z).sqrt();
                let u = s / omega_c.sqrt();
                let d_ds = l2 * PI * (erfcx(u) * (1.0 + 2.0 * u * u) - 2.0 * u / PI.sqrt());
                let first = -d_ds / (2.0 * s);
                match sheet {
                    Sheet::First => Ok(first),
                    Sheet::Second => {
                        let r = sqrt_below(z);
                        let extra = -2.0 * PI * C64::i() * l2 * (-z / omega_c).exp() * (0.5 / r - r / omega_c);
                        Ok(first + extra)
                    }
                }
            }
        }
    }

    /// Sigma(z). The second sheet is the continuation from the upper
    /// half-plane through the continuum and is evaluated for Im z <= 0.
    pub fn self_energy(&self, z: C64, sheet: Sheet) -> Result<SelfEnergyEval> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::Domain(format!("non-finite z = {z}")));
        }
        let sigma = match sheet {
            Sheet::First => self.first_sheet(z)?,
            Sheet::Second => {
                if z.im > 0.0 {
                    return Err(LabError::UnsupportedContinuation(format!(
                        "second sheet is continued into Im z <= 0 only, got {z}"
                    )));
                }
                let base = if z.im == 0.0 && self.continuum_support().contains(z.re) {
                    self.first_sheet_below(z.re)
                } else {
                    self.first_sheet(z)?
                };
                base - 2.0 * PI * C64::i() * self.coupling_squared_continued(z)
            }
        };
        Ok(SelfEnergyEval { z, sigma, sheet })
    }

    /// Spectral weight of the initial state on the real axis,
    /// (1/pi) Im 1/(omega - i0 - E0 - Sigma(omega - i0)).
    pub fn spectral_weight(&self, omega: f64) -> f64 {
        if !self.continuum_support().contains(omega) {
            return 0.0;
        }
        let sigma = self.first_sheet_below(omega);
        (1.0 / (omega - self.e0 - sigma)).im / PI
    }
}

/// Principal square root, with the negative real axis approached from below.
fn sqrt_below(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        C64::new(0.0, -(-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

/// Sigma(z) on the given sheet.
pub fn self_energy(m: &FriedrichsModel, z: C64, sheet: Sheet) -> Result<SelfEnergyEval> {
    m.self_energy(z, sheet)
}

/// Newton iteration on z - E0 - Sigma_II(z) = 0 starting from the
/// golden-rule estimate.
pub fn find_resonance_pole(m: &FriedrichsModel) -> Result<ResonancePole> {
    const MAX_ITER: usize = 100;
    let mut z = C64::new(m.e0, -0.5 * m.golden_rule_rate());
    let mut trace = vec![z];
    let residual = |z: C64| -> Result<C64> { Ok(z - m.e0 - m.self_energy(z, Sheet::Second)?.sigma) };
    let mut converged_at = None;
    for it in 1..=MAX_ITER {
        let f = residual(z)?;
        let df = 1.0 - m.self_energy_derivative(z, Sheet::Second)?;
        let mut next = z - f / df;
        // keep iterates on the continued sheet
        if next.im > 0.0 {
            next.im = 0.5 * z.im;
        }
        z = next;
        trace.push(z);
        let r = residual(z)?.norm();
        if r < 1e-10 {
            // one more step costs nothing and squares the error
            let f = residual(z)?;
            let df = 1.0 - m.self_energy_derivative(z, Sheet::Second)?;
            let polished = z - f / df;
            if polished.im <= 0.0 && residual(polished)?.norm() <= r {
                z = polished;
            }
            converged_at = Some(it);
            break;
        }
    }
    let Some(iterations) = converged_at else {
        return Err(LabError::Convergence {
            iterations: MAX_ITER,
            detail: "resonance pole".into(),
            trace,
        });
    };
    let residue = 1.0 / (1.0 - m.self_energy_derivative(z, Sheet::Second)?);
    Ok(ResonancePole {
        position: z,
        residue,
        iterations,
    })
}

/// Survival amplitude evaluator. Quadrature rules are built once for a
/// time horizon and reused.
#[derive(Debug, Clone)]
pub struct SurvivalSolver {
    model: FriedrichsModel,
    pole: ResonancePole,
    t_max: f64,
    real_rule: CompositeRule,
    real_weights: Vec<f64>,
    flat_tails: Option<FlatTails>,
    background: RayRule,
}

#[derive(Debug, Clone)]
struct FlatTails {
    lower: f64,
    upper: f64,
    ray: RayRule,
}

#[derive(Debug, Clone)]
struct RayRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RayRule {
    /// Gauss-Legendre rule for int_0^inf f(s) ds after s = c x^2,
    /// x = v / (1 - v).
    fn mapped(n: usize, c: f64) -> RayRule {
        let (x, w) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(&w) {
            let v = 0.5 * (xi + 1.0);
            let wv = 0.5 * wi;
            let xx = v / (1.0 - v);
            nodes.push(c * xx * xx);
            weights.push(2.0 * c * xx / ((1.0 - v) * (1.0 - v)) * wv);
        }
        RayRule { nodes, weights }
    }
}

const PANEL_NODES: usize = 32;
const RAY_NODES: usize = 200;

impl SurvivalSolver {
    /// Build rules accurate on 0 <= t <= t_max.
    pub fn new(model: FriedrichsModel, t_max: f64) -> Result<Self> {
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(LabError::Domain(format!("time horizon must be finite and >= 0, got {t_max}")));
        }
        let pole = find_resonance_pole(&model)?;
        let base = gauss_legendre(PANEL_NODES);
        let center = pole.position.re;
        let half_width = pole.position.im.abs();
        let fine = 10.0 * half_width;
        // keep the oscillation per panel bounded at the horizon
        let coarse = 0.25f64.min(8.0 / t_max.max(1.0));
        let fine_step = (half_width / 4.0).min(coarse);
        let mut rule = CompositeRule::default();
        let mut flat_tails = None;
        match model.coupling {
            Coupling::Flat { gamma } => {
                let core = 20.0 * gamma;
                let (a, b) = (model.e0 - core, model.e0 + core);
                rule.add_interval(a, center - fine, coarse, &base);
                rule.add_interval(center - fine, center + fine, fine_step, &base);
                rule.add_interval(center + fine, b, coarse, &base);
                flat_tails = Some(FlatTails {
                    lower: a,
                    upper: b,
                    ray: RayRule::mapped(RAY_NODES, 1.0 / t_max.max(1.0 / core)),
                });
            }
            Coupling::HalfLineSqrt { omega_c, .. } => {
                // threshold: omega = u^2 on [0, 1] removes the sqrt singularity
                let mut threshold = CompositeRule::default();
                threshold.add_interval(0.0, 1.0, coarse, &base);
                for (u, w) in threshold.nodes.iter().zip(&threshold.weights) {
                    rule.nodes.push(u * u);
                    rule.weights.push(w * 2.0 * u);
                }
                let lo = (center - fine).max(1.0);
                let hi = center + fine;
                rule.add_interval(1.0, lo, coarse, &base);
                rule.add_interval(lo.max(1.0), hi, fine_step, &base);
                let mid = 40.0f64.max(4.0 * omega_c).max(hi);
                rule.add_interval(hi, mid, coarse, &base);
                let top = 70.0 * omega_c;
                rule.add_interval(mid, top, (4.0 * coarse).min(1.0), &base);
            }
        }
        let real_weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&om, &w)| model.spectral_weight(om) * w)
            .collect();
        Ok(SurvivalSolver {
            model,
            pole,
            t_max,
            real_rule: rule,
            real_weights,
            flat_tails,
            background: RayRule::mapped(RAY_NODES, 1.0),
        })
    }

    pub fn model(&self) -> &FriedrichsModel {
        &self.model
    }

    pub fn pole(&self) -> &ResonancePole {
        &self.pole
    }

    pub fn horizon(&self) -> f64 {
        self.t_max
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(LabError::Domain(format!("survival time must be finite and >= 0, got {t}")));
        }
        Ok(())
    }

    pub fn amplitude(&self, t: f64, method: SurvivalMethod) -> Result<C64> {
        self.check_t(t)?;
        match method {
            SurvivalMethod::SpectralQuadrature => Ok(self.spectral_amplitude(t)),
            SurvivalMethod::PolePlusBackground => Ok(self.pole_amplitude(t)),
        }
    }

    fn spectral_amplitude(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&om, &w) in self.real_rule.nodes.iter().zip(&self.real_weights) {
            acc += w * C64::from_polar(1.0, -om * t);
        }
        if let (Some(tails), Coupling::Flat { gamma }) = (&self.flat_tails, self.model.coupling) {
            acc += flat_tail_correction(self.model.e0, gamma, tails, t);
        }
        acc
    }

    /// 1 - p(t) from the quadrature, free of the cancellation in 1 - |A|^2.
    pub fn deficit(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let mut one_minus_re = 0.0;
        let mut total = 0.0;
        for (&om, &w) in self.real_rule.nodes.iter().zip(&self.real_weights) {
            let s = (0.5 * om * t).sin();
            one_minus_re += 2.0 * w * s * s;
            total += w;
        }
        let a = self.spectral_amplitude(t);
        // the quadrature weights may miss unit mass by rounding
        let one_minus_re = if self.flat_tails.is_some() { 1.0 - a.re } else { one_minus_re + (1.0 - total) };
        Ok(one_minus_re * (1.0 + a.re) - a.im * a.im)
    }

    fn pole_amplitude(&self, t: f64) -> C64 {
        let pole_term = self.pole.residue * (-C64::i() * self.pole.position * t).exp();
        match self.model.coupling {
            Coupling::Flat { .. } => pole_term,
            Coupling::HalfLineSqrt { .. } => pole_term + self.background(t),
        }
    }

    /// Branch-cut contribution
    /// -(i/2 pi) int_ray [R_I(z) - R_II(z)] exp(-izt) dz.
    ///
    /// For t >= 1 the ray is the negative imaginary axis, where exp(-st)
    /// damps the integrand. Below that the form factor |g(-is)|^2 only
    /// oscillates, so the ray is tilted to arg z = -pi/4 where it decays.
    pub fn background(&self, t: f64) -> C64 {
        let (theta, scale) = if t >= 1.0 { (0.5 * PI, 1.0 / t) } else { (0.25 * PI, 1.0) };
        let dir = C64::from_polar(1.0, -theta);
        let m = &self.model;
        let mut acc = C64::new(0.0, 0.0);
        for (&x, &w) in self.background.nodes.iter().zip(&self.background.weights) {
            let s = x * scale;
            let z = dir * s;
            let (Ok(s1), Ok(s2)) = (m.self_energy(z, Sheet::First), m.self_energy(z, Sheet::Second)) else {
                continue;
            };
            let r1 = 1.0 / (z - m.e0 - s1.sigma);
            let r2 = 1.0 / (z - m.e0 - s2.sigma);
            let jump = r1 * r2 * (2.0 * PI * C64::i() * m.coupling_squared_continued(z));
            acc += jump * (-C64::i() * z * t).exp() * (w * scale);
        }
        -C64::i() * dir * acc / (2.0 * PI)
    }
}

/// Contribution of (-inf, a] and [b, inf) for the Lorentzian weight,
/// with each tail rotated onto a downward vertical ray.
fn flat_tail_correction(e0: f64, gamma: f64, tails: &FlatTails, t: f64) -> C64 {
    let (a, b) = (tails.lower, tails.upper);
    let weight = |w: C64| (gamma / (2.0 * PI)) / ((w - e0) * (w - e0) + 0.25 * gamma * gamma);
    let i = C64::i();
    let mut right = C64::new(0.0, 0.0);
    let mut left = C64::new(0.0, 0.0);
    for (&s, &w) in tails.ray.nodes.iter().zip(&tails.ray.weights) {
        let decay = (-s * t).exp() * w;
        right += weight(C64::new(b, -s)) * decay;
        left += weight(C64::new(a, -s)) * decay;
    }
    -i * C64::from_polar(1.0, -b * t) * right + i * C64::from_polar(1.0, -a * t) * left
}

/// A(t) by the requested method, with rules built for this t.
pub fn survival_amplitude(m: &FriedrichsModel, t: f64, method: SurvivalMethod) -> Result<C64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(LabError::Domain(format!("survival time must be finite and >= 0, got {t}")));
    }
    SurvivalSolver::new(*m, t)?.amplitude(t, method)
}

/// p(t) = |A(t)|^2.
pub fn decay_probability(m: &FriedrichsModel, t: f64) -> Result<f64> {
    Ok(survival_amplitude(m, t, SurvivalMethod::SpectralQuadrature)?.norm_sqr())
}
