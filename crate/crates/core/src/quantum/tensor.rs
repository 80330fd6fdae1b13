use super::{DensityMatrix, StateVector};
use crate::{CMatrix, CVector, LtsError, Result};

/// Largest total Hilbert-space dimension accepted by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let n = b.len();
    CVector::from_fn(a.len() * n, |i, _| a[i / n] * b[i % n])
}

/// Values with a tensor-product structure.
pub trait Tensor: Sized {
    fn total_dim(&self) -> usize;
    fn tensor_unchecked(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn total_dim(&self) -> usize {
        self.dim()
    }

    fn tensor_unchecked(&self, other: &Self) -> Self {
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(other.dims());
        StateVector::from_raw(kron_vec(self.amplitudes(), other.amplitudes()), dims)
    }
}

impl Tensor for DensityMatrix {
    fn total_dim(&self) -> usize {
        self.dim()
    }

    fn tensor_unchecked(&self, other: &Self) -> Self {
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(other.dims());
        DensityMatrix::from_raw(kron(self.matrix(), other.matrix()), dims)
    }
}

impl Tensor for CMatrix {
    fn total_dim(&self) -> usize {
        self.nrows()
    }

    fn tensor_unchecked(&self, other: &Self) -> Self {
        kron(self, other)
    }
}

/// `a ⊗ b` with the default dimension cap.
pub fn tensor_product<T: Tensor>(a: &T, b: &T) -> Result<T> {
    tensor_product_with_limit(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_product_with_limit<T: Tensor>(a: &T, b: &T, max_dim: usize) -> Result<T> {
    let dim = a
        .total_dim()
        .checked_mul(b.total_dim())
        .ok_or(LtsError::DimensionOverflow {
            dim: usize::MAX,
            max: max_dim,
        })?;
    if dim > max_dim {
        return Err(LtsError::DimensionOverflow { dim, max: max_dim });
    }
    Ok(a.tensor_unchecked(b))
}
