use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::NORM_TOL;
use crate::{CVector, LtsError, Result, C64};

/// Normalized pure state of a multipartite system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    dims: Vec<usize>,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(LtsError::NotNormalized { norm });
        }
        Ok(Self { amps, dims })
    }

    /// Normalizes the amplitudes before wrapping them.
    pub fn normalized(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LtsError::NotNormalized { norm });
        }
        Ok(Self {
            amps: amps / C64::new(norm, 0.0),
            dims,
        })
    }

    pub fn from_slice(amps: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::normalized(DVector::from_column_slice(amps), dims)
    }

    /// Computational basis vector `index`.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(LtsError::DimensionMismatch {
                expected: d,
                found: index,
            });
        }
        let mut amps = CVector::zeros(d);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, dims })
    }

    /// Uniformly distributed (Haar) random state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let amps = CVector::from_fn(d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(amps, dims).expect("gaussian vector is nonzero")
    }

    pub(crate) fn from_raw(amps: CVector, dims: Vec<usize>) -> Self {
        debug_assert_eq!(amps.len(), dims.iter().product::<usize>());
        Self { amps, dims }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(LtsError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// |⟨self|other⟩|.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Same amplitudes viewed with a different subsystem grouping.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims)?;
        Ok(Self {
            amps: self.amps.clone(),
            dims,
        })
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &StateVector) -> f64 {
        (&self.amps - &other.amps).norm()
    }
}

pub(crate) fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(LtsError::InvalidSubsystems(format!(
            "bad dimension list {dims:?}"
        )));
    }
    let d: usize = dims.iter().product();
    if d != len {
        return Err(LtsError::DimensionMismatch {
            expected: d,
            found: len,
        });
    }
    Ok(())
}
