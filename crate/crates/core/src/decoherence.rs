//! Reduced densities, effective purity, nonstationary fibre evolution and
//! the Liouville-space kernel in the time representation.

use nalgebra::{DMatrix, DVector};

use crate::direct_integral::{AuxSpace, LpVector, TimeGrid};
use crate::numeric::linalg;
use crate::{C64, LabError, Result};

/// Relative threshold on the second singular value for effective purity.
pub const RANK_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-12;

/// Normalized density on the auxiliary space.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    aux: AuxSpace,
    matrix: DMatrix<C64>,
}

impl ReducedDensity {
    /// Validates Hermiticity, unit trace and positivity (to 1e-12).
    pub fn new(aux: AuxSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let d = aux.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(LabError::Dimension(format!("density must be {d} x {d}")));
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > DENSITY_TOL {
            return Err(LabError::Validation(format!("density is not Hermitian (defect {defect:e})")));
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(LabError::Validation(format!("density has trace {trace}")));
        }
        let (values, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&matrix));
        if values.min() < -DENSITY_TOL {
            return Err(LabError::Validation(format!(
                "density has negative eigenvalue {}",
                values.min()
            )));
        }
        Ok(ReducedDensity { aux, matrix })
    }

    pub fn aux(&self) -> AuxSpace {
        self.aux
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Tr(rho A).
    pub fn expectation(&self, a: &DMatrix<C64>) -> C64 {
        (&self.matrix * a).trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let (values, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&self.matrix));
        let mut v: Vec<f64> = values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// rho = sum_k psi_k psi_k^dagger h / ||psi||^2.
pub fn reduce(psi: &LpVector) -> Result<ReducedDensity> {
    let norm_sq = psi.norm_squared();
    if norm_sq == 0.0 {
        return Err(LabError::Domain("cannot reduce the zero vector".into()));
    }
    let v = psi.values();
    // v is n x d, so v^T conj(v) sums psi_k psi_k^dagger over nodes
    let mut rho = v.transpose() * v.map(|z| z.conj()) * C64::new(psi.grid().spacing() / norm_sq, 0.0);
    rho = linalg::hermitian_part(&rho);
    ReducedDensity::new(psi.aux(), rho)
}

/// Tr rho^2.
pub fn purity(rho: &ReducedDensity) -> f64 {
    let m = rho.matrix();
    (m * m).trace().re
}

/// Leading singular pair of the value matrix: psi_t ~ f(t) phi0.
#[derive(Debug, Clone)]
pub struct PurityWitness {
    pub profile: Vec<C64>,
    pub phi0: DVector<C64>,
}

#[derive(Debug, Clone)]
pub struct PureCheck {
    pub pure: bool,
    /// s2 / s1 (0 for d = 1).
    pub ratio: f64,
    pub witness: PurityWitness,
}

/// Numerical rank-one test of the n x d value matrix.
pub fn effectively_pure_check(psi: &LpVector) -> Result<PureCheck> {
    if psi.norm_squared() == 0.0 {
        return Err(LabError::Domain("zero vector has no purity verdict".into()));
    }
    let svd = psi.values().clone().svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s1 = svd.singular_values[order[0]];
    let s2 = order.get(1).map_or(0.0, |&i| svd.singular_values[i]);
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let lead = order[0];
    // psi = s1 u v^T with v^T the row of V^dagger conjugated
    let phi0 = v_t.row(lead).transpose().into_owned();
    let profile = u.column(lead).iter().map(|z| z * s1).collect();
    let ratio = s2 / s1;
    Ok(PureCheck {
        pure: ratio <= RANK_TOL,
        ratio,
        witness: PurityWitness { profile, phi0 },
    })
}

/// Piecewise-constant H(t) with one Hermitian matrix per grid cell.
#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    grid: TimeGrid,
    aux: AuxSpace,
    values: Vec<DMatrix<C64>>,
    cells: Vec<DMatrix<C64>>,
}

impl TimeDependentHamiltonian {
    pub fn new(grid: TimeGrid, aux: AuxSpace, values: Vec<DMatrix<C64>>) -> Result<Self> {
        let d = aux.dim();
        if values.len() != grid.len() {
            return Err(LabError::Dimension(format!(
                "{} Hamiltonians for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let h = grid.spacing();
        let mut cells = Vec::with_capacity(values.len());
        for (k, m) in values.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(LabError::Dimension(format!("H at node {k} is not {d} x {d}")));
            }
            let defect = linalg::hermitian_defect(m);
            if defect > 1e-12 {
                return Err(LabError::Validation(format!("H at node {k} is not Hermitian (defect {defect:e})")));
            }
            let (w, u) = linalg::hermitian_eigen(&linalg::hermitian_part(m));
            let phases = DMatrix::from_diagonal(&w.map(|x| C64::from_polar(1.0, -x * h)));
            cells.push(&u * phases * u.adjoint());
        }
        Ok(TimeDependentHamiltonian {
            grid,
            aux,
            values,
            cells,
        })
    }

    pub fn from_fn(grid: TimeGrid, aux: AuxSpace, f: impl Fn(f64) -> DMatrix<C64>) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, aux, values)
    }

    pub fn constant(grid: TimeGrid, aux: AuxSpace, h0: DMatrix<C64>) -> Result<Self> {
        Self::from_fn(grid, aux, |_| h0.clone())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn at(&self, k: usize) -> &DMatrix<C64> {
        &self.values[k]
    }

    /// W_{t_k}(n h): ordered product of cell propagators over nodes
    /// k, k+1, ..., k+n-1 (periodic), later cells to the left.
    pub fn transport(&self, k: usize, steps: usize) -> DMatrix<C64> {
        let n = self.grid.len();
        let d = self.aux.dim();
        let mut w = DMatrix::identity(d, d);
        for j in 0..steps {
            w = &self.cells[(k + j) % n] * w;
        }
        w
    }

    /// max |W_{t+a}(b) W_t(a) - W_t(a+b)| over all nodes t.
    pub fn chain_defect(&self, a: usize, b: usize) -> f64 {
        let n = self.grid.len();
        (0..n)
            .map(|k| {
                let lhs = self.transport((k + a) % n, b) * self.transport(k, a);
                linalg::max_abs(&(lhs - self.transport(k, a + b)))
            })
            .fold(0.0, f64::max)
    }
}

/// (psi^tau)_{t + tau} = W_t(tau) psi_t for a nonnegative lattice tau.
pub fn nonstationary_evolve(psi: &LpVector, h: &TimeDependentHamiltonian, tau: f64) -> Result<LpVector> {
    let grid = *psi.grid();
    if grid != h.grid || psi.aux() != h.aux {
        return Err(LabError::Dimension("state and Hamiltonian live on different spaces".into()));
    }
    let steps = match grid.lattice_steps(tau) {
        Some(s) if s >= 0 => s as usize,
        _ => {
            return Err(LabError::Domain(format!(
                "evolution time {tau} is not a nonnegative multiple of the spacing"
            )))
        }
    };
    let n = grid.len();
    let d = psi.aux().dim();
    let mut out = DMatrix::zeros(n, d);
    for k in 0..n {
        let fiber = psi.values().row(k).transpose();
        let moved = h.transport(k, steps) * fiber;
        out.set_row((k + steps) % n, &moved.transpose());
    }
    LpVector::from_values(grid, psi.aux(), out)
}

/// Row-major vectorization superoperator of X -> [H, X]: H (x) I - I (x) H^T.
pub fn commutator_superoperator(h: &DMatrix<C64>) -> DMatrix<C64> {
    let d = h.nrows();
    let id = DMatrix::identity(d, d);
    linalg::kron(h, &id) - linalg::kron(&id, &h.transpose())
}

/// Liouville generator L = -i d/dt (x) I + I (x) L_I on the time grid, with
/// L_0 = [H0, .] kept for its spectral basis.
#[derive(Debug, Clone)]
pub struct LiouvilleKernel {
    grid: TimeGrid,
    hs_dim: usize,
    free_part: DMatrix<C64>,
    l0: DMatrix<C64>,
    interaction: DMatrix<C64>,
    h0: DMatrix<C64>,
}

pub fn liouville_kernel(h0: &DMatrix<C64>, v: &DMatrix<C64>, grid: TimeGrid) -> Result<LiouvilleKernel> {
    if h0.nrows() != h0.ncols() || v.shape() != h0.shape() {
        return Err(LabError::Dimension("H0 and V must be square of equal size".into()));
    }
    for (name, m) in [("H0", h0), ("V", v)] {
        let defect = linalg::hermitian_defect(m);
        if defect > 1e-12 {
            return Err(LabError::Validation(format!("{name} is not Hermitian (defect {defect:e})")));
        }
    }
    let n = grid.len();
    let h = grid.spacing();
    // -i (f_{k+1} - f_{k-1}) / 2h with periodic wrap
    let free_part = DMatrix::from_fn(n, n, |j, l| {
        if l == (j + 1) % n {
            C64::new(0.0, -0.5 / h)
        } else if l == (j + n - 1) % n {
            C64::new(0.0, 0.5 / h)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let d = h0.nrows();
    Ok(LiouvilleKernel {
        grid,
        hs_dim: d * d,
        free_part,
        l0: commutator_superoperator(h0),
        interaction: commutator_superoperator(v),
        h0: h0.clone(),
    })
}

impl LiouvilleKernel {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hs_dim(&self) -> usize {
        self.hs_dim
    }

    /// The -i d/dt stencil on the grid.
    pub fn free_part(&self) -> &DMatrix<C64> {
        &self.free_part
    }

    /// L_0 = [H0, .] on the Hilbert-Schmidt space.
    pub fn l0(&self) -> &DMatrix<C64> {
        &self.l0
    }

    /// L_I = [V, .]; the t-diagonal block of the kernel.
    pub fn interaction(&self) -> &DMatrix<C64> {
        &self.interaction
    }

    /// Full kernel on grid (x) Hilbert-Schmidt space.
    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.grid.len();
        linalg::kron(&self.free_part, &DMatrix::identity(self.hs_dim, self.hs_dim))
            + linalg::kron(&DMatrix::identity(n, n), &self.interaction)
    }

    /// Largest |L - L^dagger| entry; the row-major vectorization is unitary
    /// for the Hilbert-Schmidt product, so this is self-adjointness there.
    pub fn self_adjoint_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.matrix())
    }

    /// Eigenvalues of L_0 (differences of H0 eigenvalues), ascending.
    pub fn free_spectrum(&self) -> Vec<f64> {
        let (w, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&self.h0));
        let mut out: Vec<f64> = w.iter().flat_map(|a| w.iter().map(move |b| a - b)).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Frobenius weight of L_I between distinct L_0 eigenvalues, relative to
    /// ||L_I||_F. Zero when V = 0.
    pub fn offdiagonal_mass(&self) -> f64 {
        let (w, u) = linalg::hermitian_eigen(&linalg::hermitian_part(&self.h0));
        let basis = linalg::kron(&u, &u.map(|z| z.conj()));
        let li = basis.adjoint() * &self.interaction * &basis;
        let d = w.len();
        let omega: Vec<f64> = (0..d * d).map(|p| w[p / d] - w[p % d]).collect();
        let scale = w.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let total = self.interaction.norm();
        if total == 0.0 {
            return 0.0;
        }
        let mut off = 0.0;
        for p in 0..d * d {
            for q in 0..d * d {
                if (omega[p] - omega[q]).abs() > 1e-12 * scale {
                    off += li[(p, q)].norm_sqr();
                }
            }
        }
        off.sqrt() / total
    }
}
