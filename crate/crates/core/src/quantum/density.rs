use super::layout::Layout;
use super::state::check_dims;
use super::StateVector;
use crate::{CMatrix, LtsError, Result, C64};

/// Tolerance on Hermiticity and unit trace of a density matrix.
pub const DENSITY_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated as rounding noise.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Trace-one, Hermitian, positive operator on a multipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(LtsError::InvalidDensity("matrix not square".into()));
        }
        check_dims(matrix.nrows(), &dims)?;
        let rho = Self { matrix, dims };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(matrix: CMatrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            matrix: a * a.adjoint(),
            dims: psi.dims().to_vec(),
        }
    }

    /// Maximally mixed state 1/d.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: CMatrix::identity(d, d) / C64::new(d as f64, 0.0),
            dims,
        }
    }

    /// Checks Hermiticity, trace and positivity.
    pub fn validate(&self) -> Result<()> {
        if let Err(dev) = super::is_hermitian(&self.matrix, DENSITY_TOL) {
            return Err(LtsError::InvalidDensity(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(LtsError::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(LtsError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hermitian_part()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// tr(A ρ).
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.dim() {
            return Err(LtsError::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok((op * &self.matrix).trace())
    }

    /// U ρ U†.
    pub fn conjugate(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() {
            return Err(LtsError::DimensionMismatch {
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        Ok(Self {
            matrix: unitary * &self.matrix * unitary.adjoint(),
            dims: self.dims.clone(),
        })
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_deviation(&self, other: &CMatrix) -> f64 {
        (&self.matrix - other)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn hermitian_part(&self) -> CMatrix {
        (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)
    }
}

fn check_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let n = dims.len();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(LtsError::InvalidSubsystems("keep set is empty".into()));
    }
    if keep.len() >= n {
        return Err(LtsError::InvalidSubsystems(
            "keep set is the full system".into(),
        ));
    }
    if keep.iter().any(|&k| k >= n) {
        return Err(LtsError::InvalidSubsystems(format!(
            "keep {keep:?} out of range for {n} subsystems"
        )));
    }
    Ok(keep)
}

/// Reduced density matrix on the subsystems in `keep` (a nonempty proper
/// subset), ordered as in the full system.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = check_keep(rho.dims(), keep)?;
    let split = Layout::new(rho.dims()).split(&keep)?;
    let m = rho.matrix();
    let out = CMatrix::from_fn(split.target_dim, split.target_dim, |a, b| {
        (0..split.rest_dim)
            .map(|r| m[(split.full(r, a), split.full(r, b))])
            .sum()
    });
    Ok(DensityMatrix::from_raw(
        out,
        keep.iter().map(|&k| rho.dims()[k]).collect(),
    ))
}

/// Reduced state of a pure state without forming |ψ⟩⟨ψ|.
pub fn reduced_state(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = check_keep(psi.dims(), keep)?;
    let split = Layout::new(psi.dims()).split(&keep)?;
    let a = psi.amplitudes();
    let out = CMatrix::from_fn(split.target_dim, split.target_dim, |i, j| {
        (0..split.rest_dim)
            .map(|r| a[split.full(r, i)] * a[split.full(r, j)].conj())
            .sum()
    });
    Ok(DensityMatrix::from_raw(
        out,
        keep.iter().map(|&k| psi.dims()[k]).collect(),
    ))
}
