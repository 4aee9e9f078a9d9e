//! Adaptive Antoulas-Anderson rational approximation in barycentric form.
//!
//! r(z) = sum_j w_j f_j / (z - z_j)  /  sum_j w_j / (z - z_j)
//!
//! Support points are added greedily where the current residual is worst;
//! weights come from the smallest right singular vector of the Loewner
//! matrix on the remaining samples.

use nalgebra::{DMatrix, DVector};

use crate::numeric::linalg;
use crate::C64;

#[derive(Debug, Clone)]
pub struct Barycentric {
    pub support: Vec<C64>,
    pub values: Vec<C64>,
    pub weights: Vec<C64>,
    /// Constant used when there are no support points.
    pub constant: C64,
}

impl Barycentric {
    pub fn degree(&self) -> usize {
        self.support.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        if self.support.is_empty() {
            return self.constant;
        }
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for ((zj, fj), wj) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let diff = z - zj;
            if diff == C64::new(0.0, 0.0) {
                return *fj;
            }
            let c = wj / diff;
            num += c * fj;
            den += c;
        }
        num / den
    }

    fn denominator(&self, z: C64) -> (C64, C64) {
        let mut d = C64::new(0.0, 0.0);
        let mut dd = C64::new(0.0, 0.0);
        for (zj, wj) in self.support.iter().zip(&self.weights) {
            let c = 1.0 / (z - zj);
            d += wj * c;
            dd -= wj * c * c;
        }
        (d, dd)
    }

    fn numerator(&self, z: C64) -> C64 {
        self.support
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((zj, fj), wj)| wj * fj / (z - zj))
            .sum()
    }

    /// Finite poles: zeros of the barycentric denominator.
    ///
    /// The arrowhead pencil [[0, w^T], [1, diag(z)]] - lambda diag(0, 1, ..)
    /// is shift-inverted at `shift`, turning the generalized problem into an
    /// ordinary one whose zero eigenvalues are the infinite ones. Each root
    /// is then polished by Newton steps on the denominator.
    pub fn poles(&self) -> Vec<C64> {
        let m = self.support.len();
        if m < 2 {
            return Vec::new();
        }
        let centre: C64 = self.support.iter().sum::<C64>() / m as f64;
        let spread = self
            .support
            .iter()
            .fold(0.0f64, |a, z| a.max((z - centre).norm()))
            .max(1.0);
        let shift = centre + C64::new(0.123 * spread, 0.731 * spread);
        let mut e = DMatrix::<C64>::zeros(m + 1, m + 1);
        let mut b = DMatrix::<C64>::zeros(m + 1, m + 1);
        for j in 0..m {
            e[(0, j + 1)] = self.weights[j];
            e[(j + 1, 0)] = C64::new(1.0, 0.0);
            e[(j + 1, j + 1)] = self.support[j];
            b[(j + 1, j + 1)] = C64::new(1.0, 0.0);
        }
        let shifted = &e - &b * shift;
        let Some(inv) = shifted.try_inverse() else {
            return Vec::new();
        };
        let op = inv * b;
        let Ok(mus) = linalg::eigenvalues(&op) else {
            return Vec::new();
        };
        let scale = mus.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let mut poles = Vec::new();
        for mu in mus {
            if mu.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                continue;
            }
            let mut p = shift + 1.0 / mu;
            for _ in 0..4 {
                let (d, dd) = self.denominator(p);
                if dd.norm() == 0.0 {
                    break;
                }
                let step = d / dd;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                p -= step;
                if step.norm() < 1e-15 * p.norm().max(1.0) {
                    break;
                }
            }
            poles.push(p);
        }
        poles
    }

    /// Residue of r at a simple pole.
    pub fn residue(&self, pole: C64) -> C64 {
        let (_, dd) = self.denominator(pole);
        self.numerator(pole) / dd
    }
}

/// Greedy AAA iteration. Each call to [`Aaa::step`] adds one support point.
pub struct Aaa {
    z: Vec<C64>,
    f: Vec<C64>,
    in_support: Vec<bool>,
    current: Barycentric,
    residual: Vec<C64>,
}

impl Aaa {
    pub fn new(z: &[C64], f: &[C64]) -> Self {
        assert_eq!(z.len(), f.len(), "sample and value counts differ");
        let mean = if f.is_empty() {
            C64::new(0.0, 0.0)
        } else {
            f.iter().sum::<C64>() / f.len() as f64
        };
        let residual = f.iter().map(|v| v - mean).collect();
        Aaa {
            z: z.to_vec(),
            f: f.to_vec(),
            in_support: vec![false; z.len()],
            current: Barycentric {
                support: Vec::new(),
                values: Vec::new(),
                weights: Vec::new(),
                constant: mean,
            },
            residual,
        }
    }

    pub fn approximant(&self) -> &Barycentric {
        &self.current
    }

    /// Largest residual on the training samples.
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |a, r| a.max(r.norm()))
    }

    /// Add one support point. Returns false once every sample is used.
    pub fn step(&mut self) -> bool {
        let free: Vec<usize> = (0..self.z.len()).filter(|&i| !self.in_support[i]).collect();
        if free.len() <= 1 {
            return false;
        }
        let pick = *free
            .iter()
            .max_by(|&&a, &&b| self.residual[a].norm().total_cmp(&self.residual[b].norm()))
            .expect("nonempty");
        self.in_support[pick] = true;
        self.current.support.push(self.z[pick]);
        self.current.values.push(self.f[pick]);
        let free: Vec<usize> = free.into_iter().filter(|&i| i != pick).collect();

        let m = self.current.support.len();
        let cauchy = DMatrix::from_fn(free.len(), m, |i, j| 1.0 / (self.z[free[i]] - self.current.support[j]));
        let loewner = DMatrix::from_fn(free.len(), m, |i, j| {
            (self.f[free[i]] - self.current.values[j]) * cauchy[(i, j)]
        });
        let weights = smallest_right_singular_vector(&loewner);
        self.current.weights = weights.iter().copied().collect();

        let fw = DVector::from_fn(m, |j, _| weights[j] * self.current.values[j]);
        let num = &cauchy * fw;
        let den = &cauchy * &weights;
        self.residual.iter_mut().for_each(|r| *r = C64::new(0.0, 0.0));
        for (row, &i) in free.iter().enumerate() {
            self.residual[i] = self.f[i] - num[row] / den[row];
        }
        true
    }
}

fn smallest_right_singular_vector(a: &DMatrix<C64>) -> DVector<C64> {
    let m = a.ncols();
    if a.nrows() < m {
        // pad so the SVD exposes a full right basis
        let mut padded = DMatrix::<C64>::zeros(m, m);
        padded.view_mut((0, 0), (a.nrows(), m)).copy_from(a);
        return smallest_right_singular_vector(&padded);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right vectors");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    DVector::from_fn(m, |j, _| v_t[(idx, j)].conj())
}

/// Run AAA until the training residual drops below `tol` (relative to the
/// largest sample) or `max_terms` support points are used.
pub fn aaa(z: &[C64], f: &[C64], tol: f64, max_terms: usize) -> Barycentric {
    let mut it = Aaa::new(z, f);
    let scale = f.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    while it.max_residual() > tol * scale && it.approximant().support.len() < max_terms {
        if !it.step() {
            break;
        }
    }
    it.current
}
