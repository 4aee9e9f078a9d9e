//! Full unitary evolution, the incoming/outgoing split of the grid, the
//! compressed semigroup Z(tau) and its dissipative generator.
//!
//! The band-limited free generator moves lattice deltas exactly only at
//! lattice times, so Z(tau) is defined for tau in h*N. Off-lattice values
//! would smear support across the region boundaries.

use nalgebra::{DMatrix, DVector};

use crate::direct_integral::{free_generator, translate, AuxSpace, LpVector, TimeGrid};
use crate::numeric::faddeeva::erf;
use crate::numeric::linalg;
use crate::{C64, LabError, Result};

/// Tolerance for Hermiticity of kappa, relative to its largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest admissible kernel entry outside the interaction block.
pub const CONSTRAINT_TOL: f64 = 1e-14;

/// Generator K = K0 (x) I_d + kappa on the flattened space.
#[derive(Debug, Clone)]
pub struct GeneratorK {
    grid: TimeGrid,
    aux: AuxSpace,
    kappa: DMatrix<C64>,
}

impl GeneratorK {
    pub fn free(grid: TimeGrid, aux: AuxSpace) -> Self {
        let n = grid.len() * aux.dim();
        GeneratorK {
            grid,
            aux,
            kappa: DMatrix::zeros(n, n),
        }
    }

    /// Wrap a kernel matrix, rejecting non-Hermitian input.
    pub fn new(grid: TimeGrid, aux: AuxSpace, kappa: DMatrix<C64>) -> Result<Self> {
        let n = grid.len() * aux.dim();
        if kappa.nrows() != n || kappa.ncols() != n {
            return Err(LabError::Dimension(format!(
                "kappa is {}x{}, expected {n}x{n}",
                kappa.nrows(),
                kappa.ncols()
            )));
        }
        let defect = linalg::hermitian_defect(&kappa);
        if defect > HERMITIAN_TOL * linalg::max_abs(&kappa).max(1.0) {
            return Err(LabError::Validation(format!("kappa is not Hermitian (defect {defect:e})")));
        }
        Ok(GeneratorK { grid, aux, kappa })
    }

    /// Integral kernel kappa(t, t') (x) A discretized with weight h.
    pub fn from_kernel(
        grid: TimeGrid,
        aux: AuxSpace,
        kernel: impl Fn(f64, f64) -> f64,
        aux_op: &DMatrix<C64>,
    ) -> Result<Self> {
        check_aux_operator(aux, aux_op)?;
        let h = grid.spacing();
        let t = grid.points();
        let scalar = DMatrix::from_fn(grid.len(), grid.len(), |j, k| C64::new(kernel(t[j], t[k]) * h, 0.0));
        Self::new(grid, aux, linalg::kron(&scalar, aux_op))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn aux(&self) -> AuxSpace {
        self.aux
    }

    pub fn kappa(&self) -> &DMatrix<C64> {
        &self.kappa
    }

    pub fn dim(&self) -> usize {
        self.grid.len() * self.aux.dim()
    }

    pub fn free_part(&self) -> DMatrix<C64> {
        let id = DMatrix::<C64>::identity(self.aux.dim(), self.aux.dim());
        linalg::kron(&free_generator(&self.grid), &id)
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        self.free_part() + &self.kappa
    }

    /// Apply kappa to a flat vector.
    pub fn apply_kappa(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.kappa * x
    }
}

fn check_aux_operator(aux: AuxSpace, a: &DMatrix<C64>) -> Result<()> {
    if a.nrows() != aux.dim() || a.ncols() != aux.dim() {
        return Err(LabError::Dimension(format!(
            "auxiliary operator is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            aux.dim(),
            aux.dim()
        )));
    }
    if linalg::hermitian_defect(a) > HERMITIAN_TOL * linalg::max_abs(a).max(1.0) {
        return Err(LabError::Validation("auxiliary operator is not Hermitian".into()));
    }
    Ok(())
}

/// Region of a node relative to the interaction interval [0, rho].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Incoming,
    Interaction,
    Outgoing,
}

/// Incoming subspace on t < 0, outgoing on t > rho. Nodes exactly on a
/// boundary belong to the interaction block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceLayout {
    rho: f64,
}

impl SubspaceLayout {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(LabError::Validation(format!("rho must be >= 0, got {rho}")));
        }
        Ok(SubspaceLayout { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Checks that the grid has room on both sides of [0, rho].
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        let h = grid.spacing();
        if grid.t_min() > -h || grid.point(grid.len() - 1) < self.rho + h {
            return Err(LabError::Validation(format!(
                "grid [{}, {}) leaves no incoming or outgoing nodes around [0, {}]",
                grid.t_min(),
                grid.t_max(),
                self.rho
            )));
        }
        Ok(())
    }

    pub fn region(&self, grid: &TimeGrid, k: usize) -> Region {
        let t = grid.point(k);
        let eps = 1e-9 * grid.spacing();
        if t < -eps {
            Region::Incoming
        } else if t > self.rho + eps {
            Region::Outgoing
        } else {
            Region::Interaction
        }
    }

    pub fn nodes(&self, grid: &TimeGrid, region: Region) -> Vec<usize> {
        (0..grid.len()).filter(|&k| self.region(grid, k) == region).collect()
    }

    /// Flat indices k*d + a of the interaction block.
    pub fn interaction_indices(&self, grid: &TimeGrid, aux: AuxSpace) -> Vec<usize> {
        let d = aux.dim();
        self.nodes(grid, Region::Interaction)
            .into_iter()
            .flat_map(|k| (0..d).map(move |a| k * d + a))
            .collect()
    }
}

/// Largest kappa entry with at least one index outside the interaction
/// block; errors when it exceeds [`CONSTRAINT_TOL`].
pub fn check_kernel_constraint(k: &GeneratorK, layout: &SubspaceLayout) -> Result<f64> {
    let grid = k.grid;
    let d = k.aux.dim();
    let inside: Vec<bool> = (0..grid.len())
        .map(|n| layout.region(&grid, n) == Region::Interaction)
        .collect();
    let mut worst = 0.0f64;
    for i in 0..k.dim() {
        for j in 0..k.dim() {
            if !(inside[i / d] && inside[j / d]) {
                worst = worst.max(k.kappa[(i, j)].norm());
            }
        }
    }
    if worst > CONSTRAINT_TOL {
        return Err(LabError::KernelConstraint(format!(
            "kappa couples the incoming or outgoing subspace (largest entry {worst:e})"
        )));
    }
    Ok(worst)
}

/// Parametrized interaction kernels supported by the constraint check by
/// construction.
#[derive(Debug, Clone)]
pub enum KappaFamily {
    Zero,
    /// lambda v(t) v(t') (x) A with a Gaussian bump v cut to (0, rho).
    Separable {
        lambda: f64,
        center: f64,
        width: f64,
        aux_op: DMatrix<C64>,
    },
    /// lambda m(t) m(t') exp(-(t-t')^2 / 2w^2) (x) A with a smooth plateau
    /// m rising at `plateau.0`, falling at `plateau.1`, edge width `edge`.
    Banded {
        lambda: f64,
        width: f64,
        plateau: (f64, f64),
        edge: f64,
        aux_op: DMatrix<C64>,
    },
    /// Local kernel lambda k(t) delta(t - t') (x) A with a Gaussian k.
    Diagonal {
        lambda: f64,
        center: f64,
        width: f64,
        aux_op: DMatrix<C64>,
    },
}

impl KappaFamily {
    pub fn build(&self, grid: TimeGrid, aux: AuxSpace, layout: &SubspaceLayout) -> Result<GeneratorK> {
        layout.validate(&grid)?;
        let rho = layout.rho();
        let inside = move |t: f64| t > 0.0 && t < rho;
        let k = match self {
            KappaFamily::Zero => GeneratorK::free(grid, aux),
            KappaFamily::Separable {
                lambda,
                center,
                width,
                aux_op,
            } => {
                let v = |t: f64| if inside(t) { (-(t - center).powi(2) / (2.0 * width * width)).exp() } else { 0.0 };
                GeneratorK::from_kernel(grid, aux, |t, s| lambda * v(t) * v(s), aux_op)?
            }
            KappaFamily::Banded {
                lambda,
                width,
                plateau,
                edge,
                aux_op,
            } => {
                let m = |t: f64| {
                    if inside(t) {
                        0.5 * (erf((t - plateau.0) / edge) - erf((t - plateau.1) / edge))
                    } else {
                        0.0
                    }
                };
                GeneratorK::from_kernel(
                    grid,
                    aux,
                    |t, s| lambda * m(t) * m(s) * (-(t - s).powi(2) / (2.0 * width * width)).exp(),
                    aux_op,
                )?
            }
            KappaFamily::Diagonal {
                lambda,
                center,
                width,
                aux_op,
            } => {
                check_aux_operator(aux, aux_op)?;
                let diag = DMatrix::from_fn(grid.len(), grid.len(), |j, l| {
                    let t = grid.point(j);
                    if j == l && inside(t) {
                        C64::new(lambda * (-(t - center).powi(2) / (2.0 * width * width)).exp(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                GeneratorK::new(grid, aux, linalg::kron(&diag, aux_op))?
            }
        };
        check_kernel_constraint(&k, layout)?;
        Ok(k)
    }
}

/// Spectral data of K for repeated exponentiation.
///
/// With kappa identically zero the evolution is the free translation, which
/// is applied exactly (index shifts at lattice times, spectral phases
/// otherwise) instead of through an eigendecomposition.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: TimeGrid,
    aux: AuxSpace,
    spectral: Option<(DVector<f64>, DMatrix<C64>)>,
}

impl Propagator {
    pub fn new(k: &GeneratorK) -> Result<Self> {
        if k.kappa.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Ok(Propagator {
                grid: k.grid,
                aux: k.aux,
                spectral: None,
            });
        }
        let m = k.matrix();
        let defect = linalg::hermitian_defect(&m);
        if defect > HERMITIAN_TOL * linalg::max_abs(&m).max(1.0) {
            return Err(LabError::Validation(format!("K is not Hermitian (defect {defect:e})")));
        }
        let spectral = linalg::hermitian_eigen(&linalg::hermitian_part(&m));
        Ok(Propagator {
            grid: k.grid,
            aux: k.aux,
            spectral: Some(spectral),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn aux(&self) -> AuxSpace {
        self.aux
    }

    pub fn dim(&self) -> usize {
        self.grid.len() * self.aux.dim()
    }

    /// True when the interaction vanishes identically.
    pub fn is_free(&self) -> bool {
        self.spectral.is_none()
    }

    /// Eigenvalues and eigenvectors of K (None for the free case).
    pub fn spectral_data(&self) -> Option<(&DVector<f64>, &DMatrix<C64>)> {
        self.spectral.as_ref().map(|(l, v)| (l, v))
    }

    fn phases(eigenvalues: &DVector<f64>, tau: f64) -> DVector<C64> {
        eigenvalues.map(|l| C64::from_polar(1.0, -l * tau))
    }

    /// Dense U(tau) = exp(-i K tau).
    pub fn unitary(&self, tau: f64) -> DMatrix<C64> {
        match &self.spectral {
            Some((values, vectors)) => {
                let mut scaled = vectors.clone();
                let ph = Self::phases(values, tau);
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= ph[j];
                }
                scaled * vectors.adjoint()
            }
            None => {
                let n = self.dim();
                let mut u = DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = DVector::zeros(n);
                    e[j] = C64::new(1.0, 0.0);
                    u.set_column(j, &self.apply(tau, &e));
                }
                u
            }
        }
    }

    /// U(tau) x without forming the matrix.
    pub fn apply(&self, tau: f64, x: &DVector<C64>) -> DVector<C64> {
        match &self.spectral {
            Some((values, vectors)) => {
                let mut c = vectors.ad_mul(x);
                c.component_mul_assign(&Self::phases(values, tau));
                vectors * c
            }
            None => free_evolve(&self.grid, self.aux, tau, x),
        }
    }
}

/// U0(tau) on a flat vector.
pub fn free_evolve(grid: &TimeGrid, aux: AuxSpace, tau: f64, x: &DVector<C64>) -> DVector<C64> {
    let d = aux.dim();
    if let Some(steps) = grid.lattice_steps(tau) {
        let n = grid.len() as i64;
        let mut out = DVector::zeros(x.len());
        for k in 0..n {
            let dst = (k + steps).rem_euclid(n) as usize;
            for a in 0..d {
                out[dst * d + a] = x[k as usize * d + a];
            }
        }
        return out;
    }
    let v = LpVector::from_flat(*grid, aux, x).expect("flat vector matches the grid");
    translate(&v, tau).to_flat()
}

/// Dense exp(-i K tau).
pub fn build_unitary(k: &GeneratorK, tau: f64) -> Result<DMatrix<C64>> {
    Ok(Propagator::new(k)?.unitary(tau))
}

/// Z(tau) = P U(tau) P on the interaction block.
#[derive(Debug, Clone)]
pub struct Semigroup {
    layout: SubspaceLayout,
    propagator: Propagator,
    block: Vec<usize>,
    block_vectors: Option<DMatrix<C64>>,
}

impl Semigroup {
    pub fn new(k: &GeneratorK, layout: SubspaceLayout) -> Result<Self> {
        layout.validate(k.grid())?;
        check_kernel_constraint(k, &layout)?;
        Ok(Self::from_propagator(Propagator::new(k)?, layout))
    }

    /// Caller is responsible for the kernel constraint.
    pub fn from_propagator(propagator: Propagator, layout: SubspaceLayout) -> Self {
        let block = layout.interaction_indices(&propagator.grid, propagator.aux);
        let block_vectors = propagator
            .spectral
            .as_ref()
            .map(|(_, v)| linalg::select_rows(v, &block));
        Semigroup {
            layout,
            propagator,
            block,
            block_vectors,
        }
    }

    pub fn layout(&self) -> &SubspaceLayout {
        &self.layout
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.propagator.grid
    }

    pub fn aux(&self) -> AuxSpace {
        self.propagator.aux
    }

    pub fn spacing(&self) -> f64 {
        self.propagator.grid.spacing()
    }

    /// Flat indices of the interaction block inside the full space.
    pub fn block_indices(&self) -> &[usize] {
        &self.block
    }

    pub fn dim(&self) -> usize {
        self.block.len()
    }

    fn check_tau(&self, tau: f64) -> Result<i64> {
        if !(tau >= 0.0) {
            return Err(LabError::Domain(format!("semigroup time must be >= 0, got {tau}")));
        }
        self.grid().lattice_steps(tau).ok_or_else(|| {
            LabError::Domain(format!(
                "semigroup time {tau} is not a multiple of the spacing {}",
                self.spacing()
            ))
        })
    }

    pub fn z(&self, tau: f64) -> Result<DMatrix<C64>> {
        let steps = self.check_tau(tau)?;
        match &self.block_vectors {
            Some(vk) => {
                let (values, _) = self.propagator.spectral.as_ref().expect("interacting propagator");
                let ph = Propagator::phases(values, tau);
                let mut scaled = vk.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= ph[j];
                }
                Ok(scaled * vk.adjoint())
            }
            None => Ok(truncated_shift(self.dim(), self.aux().dim(), steps as usize)),
        }
    }

    pub fn apply(&self, tau: f64, phi: &DVector<C64>) -> Result<DVector<C64>> {
        let steps = self.check_tau(tau)?;
        if phi.len() != self.dim() {
            return Err(LabError::Dimension(format!(
                "block vector has length {}, expected {}",
                phi.len(),
                self.dim()
            )));
        }
        match &self.block_vectors {
            Some(vk) => {
                let (values, _) = self.propagator.spectral.as_ref().expect("interacting propagator");
                let mut c = vk.ad_mul(phi);
                c.component_mul_assign(&Propagator::phases(values, tau));
                Ok(vk * c)
            }
            None => {
                let d = self.aux().dim();
                let shift = steps as usize * d;
                let mut out = DVector::zeros(phi.len());
                for i in shift..phi.len() {
                    out[i] = phi[i - shift];
                }
                Ok(out)
            }
        }
    }

    /// Norm with the grid weight h.
    pub fn norm(&self, phi: &DVector<C64>) -> f64 {
        (phi.norm_squared() * self.spacing()).sqrt()
    }

    /// Place a block vector into the full flat space.
    pub fn embed(&self, phi: &DVector<C64>) -> DVector<C64> {
        let mut full = DVector::zeros(self.propagator.dim());
        for (i, &idx) in self.block.iter().enumerate() {
            full[idx] = phi[i];
        }
        full
    }

    /// |(psi, U(tau) psi) - (psi, Z(tau) psi)| for psi in the block.
    pub fn reduction_gap(&self, tau: f64, phi: &DVector<C64>) -> Result<f64> {
        let z_phi = self.apply(tau, phi)?;
        let full = self.embed(phi);
        let u_phi = self.propagator.apply(tau, &full);
        let h = self.spacing();
        Ok((full.dotc(&u_phi) * h - phi.dotc(&z_phi) * h).norm())
    }
}

/// Down-shift by `steps` nodes on a block of n/d nodes, truncated.
fn truncated_shift(n: usize, d: usize, steps: usize) -> DMatrix<C64> {
    let mut s = DMatrix::zeros(n, n);
    let shift = steps * d;
    for i in shift..n {
        s[(i, i - shift)] = C64::new(1.0, 0.0);
    }
    s
}

/// The generator of the one-step semigroup and its free/interaction split.
///
/// B is the Cayley generator (2i/h)(Z(h) - I)(Z(h) + I)^-1. The free part
/// B0 is the same transform of the truncated down-shift; the interaction
/// part is the Hermitian part of B - B0. The anti-Hermitian remainder is
/// reported in `structure_residual`.
#[derive(Debug, Clone)]
pub struct SemigroupGenerator {
    pub b: DMatrix<C64>,
    pub free: DMatrix<C64>,
    pub interaction: DMatrix<C64>,
    /// max |antiHerm(B_cayley - B0)| relative to max |B_cayley|.
    pub structure_residual: f64,
    pub spacing: f64,
}

/// Cayley generator of Z(h) and its decomposition.
pub fn semigroup_generator(sg: &Semigroup) -> Result<SemigroupGenerator> {
    let h = sg.spacing();
    let z = sg.z(h)?;
    let cayley = cayley(&z, h)?;
    let free = free_block_generator(sg.grid(), sg.aux(), sg.layout())?;
    let diff = &cayley - &free;
    let interaction = linalg::hermitian_part(&diff);
    let structure_residual = linalg::max_abs(&(&diff - &interaction)) / linalg::max_abs(&cayley).max(1.0);
    let b = &free + &interaction;
    Ok(SemigroupGenerator {
        b,
        free,
        interaction,
        structure_residual,
        spacing: h,
    })
}

fn cayley(z: &DMatrix<C64>, h: f64) -> Result<DMatrix<C64>> {
    let n = z.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let inv = (z + &id)
        .try_inverse()
        .ok_or_else(|| LabError::Domain("Z(h) has eigenvalue -1; Cayley transform undefined".into()))?;
    Ok((z - &id) * inv * C64::new(0.0, 2.0 / h))
}

/// Cayley generator of the free one-step semigroup: the down-shift by one
/// node truncated to the interaction block.
pub fn free_block_generator(grid: &TimeGrid, aux: AuxSpace, layout: &SubspaceLayout) -> Result<DMatrix<C64>> {
    let n = layout.nodes(grid, Region::Interaction).len() * aux.dim();
    cayley(&truncated_shift(n, aux.dim(), 1), grid.spacing())
}

/// P K P on the interaction block. Hermitian for Hermitian K, hence not a
/// dissipative generator on its own.
pub fn compressed_generator(k: &GeneratorK, layout: &SubspaceLayout) -> DMatrix<C64> {
    let idx = layout.interaction_indices(k.grid(), k.aux());
    linalg::principal_submatrix(&k.matrix(), &idx)
}

impl SemigroupGenerator {
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// -i[(phi, B phi) - (B phi, phi)] = 2 Im (phi, B phi) with weight h.
    pub fn dissipativity_defect(&self, phi: &DVector<C64>) -> Result<f64> {
        dissipativity_defect(&self.b, phi, self.spacing)
    }

    /// Eigenvalues of B.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        linalg::eigenvalues(&self.b)
    }

    /// Eigenvalues of B carried back through the Cayley map to decay
    /// exponents: Z(h) has eigenvalue z = (1 - i beta h/2) / (1 + i beta h/2)
    /// and mu = i ln(z) / h, so Z(n h) acts as exp(-i mu n h). Removes the
    /// O(h^2) distortion of the Cayley form for |Re mu| h < pi.
    pub fn exponent_spectrum(&self) -> Result<Vec<C64>> {
        let half = C64::new(0.0, 0.5 * self.spacing);
        let i = C64::new(0.0, 1.0);
        Ok(self
            .spectrum()?
            .into_iter()
            .map(|beta| {
                let z = (C64::new(1.0, 0.0) - half * beta) / (C64::new(1.0, 0.0) + half * beta);
                i * z.ln() / self.spacing
            })
            .collect())
    }

    /// max |(I + iBh/2) Z(h) - (I - iBh/2)| relative to max |Z(h)|.
    pub fn cayley_residual(&self, sg: &Semigroup) -> Result<f64> {
        let z = sg.z(self.spacing)?;
        let n = z.nrows();
        let id = DMatrix::<C64>::identity(n, n);
        let half = &self.b * C64::new(0.0, self.spacing / 2.0);
        let lhs = (&id + &half) * &z;
        let rhs = &id - &half;
        Ok(linalg::max_abs(&(lhs - rhs)) / linalg::max_abs(&z).max(1.0))
    }
}

/// 2 Im (phi, B phi) with the grid weight h. Nonpositive for dissipative B.
pub fn dissipativity_defect(b: &DMatrix<C64>, phi: &DVector<C64>, spacing: f64) -> Result<f64> {
    if phi.len() != b.ncols() {
        return Err(LabError::Dimension("vector does not match the generator".into()));
    }
    if phi.iter().all(|z| z.norm() == 0.0) {
        return Err(LabError::Domain("dissipativity defect of the zero vector".into()));
    }
    let bphi = b * phi;
    Ok(2.0 * phi.dotc(&bphi).im * spacing)
}

/// ||Z(tau) psi|| for ascending nonnegative lattice times.
pub fn contraction_profile(sg: &Semigroup, psi: &DVector<C64>, taus: &[f64]) -> Result<Vec<f64>> {
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(LabError::Domain("tau list must be ascending".into()));
    }
    taus.iter().map(|&tau| Ok(sg.norm(&sg.apply(tau, psi)?))).collect()
}

/// Largest relative semigroup residual ||Z(a)Z(b) - Z(a+b)|| / ||Z(a+b)||
/// in the spectral norm, over the given pairs.
pub fn semigroup_residual(sg: &Semigroup, pairs: &[(f64, f64)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(a, b) in pairs {
        let lhs = sg.z(a)? * sg.z(b)?;
        let rhs = sg.z(a + b)?;
        let denom = linalg::spectral_norm(&rhs);
        let num = linalg::spectral_norm(&(lhs - &rhs));
        let r = if denom > 0.0 { num / denom } else { num };
        worst = worst.max(r);
    }
    Ok(worst)
}
