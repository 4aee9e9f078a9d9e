//! Discretized direct-integral space: a periodic time grid carrying one
//! auxiliary vector per node.
//!
//! Flattened vectors and operators use node-major ordering, index k*d + a.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::{C64, LabError, Result};

/// Uniform periodic grid t_k = t_min + k*h, k = 0..n_points-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_max <= t_min {
            return Err(LabError::Validation(format!(
                "grid needs t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(LabError::Validation(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        Ok(TimeGrid { t_min, t_max, n_points })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Period length t_max - t_min.
    pub fn period(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n_points as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.t_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Dual frequencies in ascending order: sigma_m = 2 pi m / (N h),
    /// m = -N/2 .. N/2 - 1.
    pub fn sigma_grid(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        (-n / 2..n / 2).map(|m| self.sigma(m)).collect()
    }

    pub fn sigma(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.period()
    }

    /// Number of grid steps in tau if tau is a lattice multiple.
    pub fn lattice_steps(&self, tau: f64) -> Option<i64> {
        let r = tau / self.spacing();
        let n = r.round();
        ((r - n).abs() <= 1e-9 * r.abs().max(1.0)).then_some(n as i64)
    }

    /// Node sitting exactly at t, if any.
    pub fn node_at(&self, t: f64) -> Option<usize> {
        let r = (t - self.t_min) / self.spacing();
        let k = r.round();
        ((r - k).abs() <= 1e-9 && k >= 0.0 && (k as usize) < self.n_points).then_some(k as usize)
    }

    /// Node nearest to t (clamped to the grid).
    pub fn nearest_node(&self, t: f64) -> usize {
        let r = ((t - self.t_min) / self.spacing()).round();
        r.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// Auxiliary space C^d attached to each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxSpace {
    dim: usize,
}

impl AuxSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::Validation("auxiliary dimension must be >= 1".into()));
        }
        Ok(AuxSpace { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// State on the grid: row k holds the auxiliary vector at t_k.
#[derive(Debug, Clone, PartialEq)]
pub struct LpVector {
    grid: TimeGrid,
    aux: AuxSpace,
    values: DMatrix<C64>,
}

impl LpVector {
    pub fn zeros(grid: TimeGrid, aux: AuxSpace) -> Self {
        LpVector {
            grid,
            aux,
            values: DMatrix::zeros(grid.len(), aux.dim()),
        }
    }

    pub fn from_fn(grid: TimeGrid, aux: AuxSpace, mut f: impl FnMut(f64, usize) -> C64) -> Self {
        let values = DMatrix::from_fn(grid.len(), aux.dim(), |k, a| f(grid.point(k), a));
        LpVector { grid, aux, values }
    }

    pub fn from_values(grid: TimeGrid, aux: AuxSpace, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != aux.dim() {
            return Err(LabError::Dimension(format!(
                "values are {}x{}, grid needs {}x{}",
                values.nrows(),
                values.ncols(),
                grid.len(),
                aux.dim()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::Validation("non-finite entries in state".into()));
        }
        Ok(LpVector { grid, aux, values })
    }

    /// Build from a node-major flat vector.
    pub fn from_flat(grid: TimeGrid, aux: AuxSpace, flat: &DVector<C64>) -> Result<Self> {
        let d = aux.dim();
        if flat.len() != grid.len() * d {
            return Err(LabError::Dimension(format!(
                "flat vector has length {}, expected {}",
                flat.len(),
                grid.len() * d
            )));
        }
        let values = DMatrix::from_fn(grid.len(), d, |k, a| flat[k * d + a]);
        Self::from_values(grid, aux, values)
    }

    pub fn to_flat(&self) -> DVector<C64> {
        let d = self.aux.dim();
        DVector::from_fn(self.grid.len() * d, |i, _| self.values[(i / d, i % d)])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn aux(&self) -> AuxSpace {
        self.aux
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    /// Auxiliary vector at node k.
    pub fn fiber(&self, k: usize) -> DVector<C64> {
        self.values.row(k).transpose()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.norm_squared() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, c: C64) -> LpVector {
        LpVector {
            values: &self.values * c,
            ..self.clone()
        }
    }

    /// Keep only the nodes for which `keep` holds.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> LpVector {
        let mut out = self.clone();
        for k in 0..self.grid.len() {
            if !keep(k) {
                out.values.row_mut(k).fill(C64::new(0.0, 0.0));
            }
        }
        out
    }

    /// Smallest distance, in nodes, between significant support and the
    /// periodic seam. Entries below `rel_floor` times the peak are ignored.
    pub fn seam_margin(&self, rel_floor: f64) -> usize {
        let n = self.grid.len();
        let peak = self.values.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if peak == 0.0 {
            return n / 2;
        }
        let mut margin = n / 2;
        for k in 0..n {
            if self.values.row(k).iter().any(|z| z.norm() > rel_floor * peak) {
                margin = margin.min(k.min(n - 1 - k));
            }
        }
        margin
    }

    /// Warn when the support comes within `nodes` of the periodic seam.
    pub fn check_seam_margin(&self, nodes: usize) -> bool {
        let margin = self.seam_margin(1e-12);
        let ok = margin >= nodes;
        if !ok {
            warn!("state support is {margin} nodes from the periodic seam (need {nodes})");
        }
        ok
    }

    fn check_compatible(&self, other: &LpVector) -> Result<()> {
        if self.grid != other.grid || self.aux != other.aux {
            return Err(LabError::Dimension("states live on different grids or auxiliary spaces".into()));
        }
        Ok(())
    }
}

/// Spectral representation: row m holds the auxiliary vector at sigma_m
/// (ascending order, see [`TimeGrid::sigma_grid`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    grid: TimeGrid,
    aux: AuxSpace,
    values: DMatrix<C64>,
}

impl SpectralVector {
    pub fn from_values(grid: TimeGrid, aux: AuxSpace, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != aux.dim() {
            return Err(LabError::Dimension("spectral values do not match the grid".into()));
        }
        Ok(SpectralVector { grid, aux, values })
    }

    pub fn sigma_grid(&self) -> Vec<f64> {
        self.grid.sigma_grid()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.values
    }

    /// Norm with the dual measure d sigma / 2 pi.
    pub fn norm(&self) -> f64 {
        (self.values.norm_squared() / self.grid.period()).sqrt()
    }
}

/// (f, g) = sum_k <f_k, g_k> h, antilinear in f.
pub fn inner_product(f: &LpVector, g: &LpVector) -> Result<C64> {
    f.check_compatible(g)?;
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in f.values.iter().zip(g.values.iter()) {
        acc += x.conj() * y;
    }
    Ok(acc * f.grid.spacing())
}

/// psi_hat(sigma) = sum_k exp(-i sigma t_k) psi(t_k) h.
pub fn to_spectral(f: &LpVector) -> SpectralVector {
    let grid = f.grid;
    let n = grid.len();
    let h = grid.spacing();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut values = DMatrix::zeros(n, f.aux.dim());
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for a in 0..f.aux.dim() {
        for k in 0..n {
            buf[k] = f.values[(k, a)];
        }
        fft.process(&mut buf);
        for (row, m) in (-(n as i64) / 2..n as i64 / 2).enumerate() {
            let sigma = grid.sigma(m);
            let phase = C64::from_polar(h, -sigma * grid.t_min());
            values[(row, a)] = phase * buf[m.rem_euclid(n as i64) as usize];
        }
    }
    SpectralVector { grid, aux: f.aux, values }
}

/// Inverse of [`to_spectral`].
pub fn from_spectral(g: &SpectralVector) -> LpVector {
    let grid = g.grid;
    let n = grid.len();
    let h = grid.spacing();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut values = DMatrix::zeros(n, g.aux.dim());
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let norm = 1.0 / (n as f64 * h);
    for a in 0..g.aux.dim() {
        for (row, m) in (-(n as i64) / 2..n as i64 / 2).enumerate() {
            let sigma = grid.sigma(m);
            buf[m.rem_euclid(n as i64) as usize] = C64::from_polar(norm, sigma * grid.t_min()) * g.values[(row, a)];
        }
        ifft.process(&mut buf);
        for k in 0..n {
            values[(k, a)] = buf[k];
        }
    }
    LpVector { grid, aux: g.aux, values }
}

/// Multiply the spectral representation by m(sigma).
pub fn spectral_multiply(f: &LpVector, m: impl Fn(f64) -> C64) -> LpVector {
    let mut s = to_spectral(f);
    let sig = s.sigma_grid();
    for (row, &sg) in sig.iter().enumerate() {
        let factor = m(sg);
        s.values.row_mut(row).iter_mut().for_each(|v| *v *= factor);
    }
    from_spectral(&s)
}

/// Free evolution (U0(tau) f)(t) = f(t - tau) on the periodic grid.
///
/// Lattice multiples of the spacing are exact index shifts; other values
/// go through the spectral phase exp(-i sigma tau).
pub fn translate(f: &LpVector, tau: f64) -> LpVector {
    match f.grid.lattice_steps(tau) {
        Some(steps) => shift_nodes(f, steps),
        None => spectral_multiply(f, |s| C64::from_polar(1.0, -s * tau)),
    }
}

fn shift_nodes(f: &LpVector, steps: i64) -> LpVector {
    let n = f.grid.len() as i64;
    let mut values = DMatrix::zeros(f.grid.len(), f.aux.dim());
    for k in 0..n {
        let dst = (k + steps).rem_euclid(n) as usize;
        values.row_mut(dst).copy_from(&f.values.row(k as usize));
    }
    LpVector { values, ..f.clone() }
}

/// Free generator -i d/dt on the grid as a dense N x N circulant
/// (spectral multiplication by sigma).
pub fn free_generator(grid: &TimeGrid) -> DMatrix<C64> {
    let n = grid.len();
    let sig = grid.sigma_grid();
    // first column of the circulant: c_j = (1/N) sum_m sigma_m exp(2 pi i m j / N)
    let col: Vec<C64> = (0..n)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (row, m) in (-(n as i64) / 2..n as i64 / 2).enumerate() {
                let arg = 2.0 * PI * (m * j as i64).rem_euclid(n as i64) as f64 / n as f64;
                acc += sig[row] * C64::from_polar(1.0, arg);
            }
            acc / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |j, k| col[(j + n - k) % n])
}
