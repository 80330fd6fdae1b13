use super::{is_hermitian, StateVector, HERMITIAN_TOL};
use crate::{CMatrix, CVector, LtsError, Result, C64};

/// Absolute gap below which eigenvalues are merged into one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Spectral form H = Σ_p E_p P_p with distinct, ascending levels.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    degeneracies: Vec<usize>,
    projectors: Vec<CMatrix>,
    /// Orthonormal eigenvectors as columns, grouped by level.
    eigenvectors: CMatrix,
    /// Level index of each eigenvector column.
    level_of: Vec<usize>,
}

pub fn spectral_decompose(h: &CMatrix) -> Result<SpectralDecomposition> {
    spectral_decompose_with(h, DEGENERACY_TOL)
}

pub fn spectral_decompose_with(h: &CMatrix, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    if let Err(deviation) = is_hermitian(h, HERMITIAN_TOL) {
        return Err(LtsError::NotHermitian { deviation });
    }
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let d = h.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::new();
    let mut degeneracies: Vec<usize> = Vec::new();
    let mut level_of = Vec::with_capacity(d);
    let mut sum = 0.0;
    let mut last = f64::NEG_INFINITY;
    for &k in &order {
        let e = eig.eigenvalues[k];
        if degeneracies.is_empty() || e - last > degeneracy_tol {
            if let Some(&g) = degeneracies.last() {
                eigenvalues.push(sum / g as f64);
            }
            degeneracies.push(0);
            sum = 0.0;
        }
        *degeneracies.last_mut().unwrap() += 1;
        sum += e;
        last = e;
        level_of.push(degeneracies.len() - 1);
    }
    if let Some(&g) = degeneracies.last() {
        eigenvalues.push(sum / g as f64);
    }

    let eigenvectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    let mut projectors = vec![CMatrix::zeros(d, d); eigenvalues.len()];
    for (col, &level) in level_of.iter().enumerate() {
        let v = eigenvectors.column(col);
        projectors[level] += v * v.adjoint();
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        degeneracies,
        projectors,
        eigenvectors,
        level_of,
    })
}

impl SpectralDecomposition {
    /// Builds a diagonal spectral form directly from energies listed per basis
    /// state (the computational basis is the eigenbasis).
    pub fn from_diagonal(energies: &[f64]) -> Result<Self> {
        let d = energies.len();
        let h = CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            energies.iter().map(|&e| C64::new(e, 0.0)),
        ));
        spectral_decompose(&h)
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracies
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Level index of each eigenvector column.
    pub fn level_of(&self) -> &[usize] {
        &self.level_of
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Level energy of each eigenvector column.
    pub fn column_energies(&self) -> Vec<f64> {
        self.level_of.iter().map(|&l| self.eigenvalues[l]).collect()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Σ_p E_p P_p.
    pub fn operator(&self) -> CMatrix {
        self.function(|e| C64::new(e, 0.0))
    }

    /// Σ_p f(E_p) P_p.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let phases: Vec<C64> = self.column_energies().into_iter().map(f).collect();
        let v = &self.eigenvectors;
        let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * phases[j]);
        scaled * v.adjoint()
    }

    /// e^{−iHt}.
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.function(|e| C64::from_polar(1.0, -e * t))
    }

    /// Level populations ⟨ψ|P_p|ψ⟩.
    pub fn populations(&self, amps: &CVector) -> Result<Vec<f64>> {
        self.check(amps.len())?;
        let coeffs = self.eigenvectors.adjoint() * amps;
        let mut pops = vec![0.0; self.eigenvalues.len()];
        for (c, &l) in coeffs.iter().zip(&self.level_of) {
            pops[l] += c.norm_sqr();
        }
        Ok(pops)
    }

    pub fn mean(&self, psi: &StateVector) -> Result<f64> {
        let pops = self.populations(psi.amplitudes())?;
        Ok(pops.iter().zip(&self.eigenvalues).map(|(p, e)| p * e).sum())
    }

    /// Energy variance (ΔH)².
    pub fn variance(&self, psi: &StateVector) -> Result<f64> {
        let pops = self.populations(psi.amplitudes())?;
        let mean: f64 = pops.iter().zip(&self.eigenvalues).map(|(p, e)| p * e).sum();
        Ok(pops
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, e)| p * (e - mean).powi(2))
            .sum())
    }

    /// Σ_p e^{−iE_p t} P_p |ψ⟩.
    pub fn evolve_amplitudes(&self, amps: &CVector, t: f64) -> Result<CVector> {
        self.check(amps.len())?;
        let mut coeffs = self.eigenvectors.adjoint() * amps;
        for (c, &l) in coeffs.iter_mut().zip(&self.level_of) {
            *c *= C64::from_polar(1.0, -self.eigenvalues[l] * t);
        }
        Ok(&self.eigenvectors * coeffs)
    }

    /// Unitary evolution of a pure state for time `t`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let amps = self.evolve_amplitudes(psi.amplitudes(), t)?;
        Ok(StateVector::from_raw(amps, psi.dims().to_vec()))
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(LtsError::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`SpectralDecomposition::evolve`].
pub fn evolve(psi: &StateVector, h: &SpectralDecomposition, t: f64) -> Result<StateVector> {
    h.evolve(psi, t)
}
