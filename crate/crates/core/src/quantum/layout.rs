use crate::{CMatrix, CVector, LtsError, Result, C64};

/// Row-major index bookkeeping for a tensor product of subsystems. Subsystem
/// 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

/// Full-space indices regrouped as `(rest, target)` pairs.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub target_dim: usize,
    pub rest_dim: usize,
    /// `table[rest * target_dim + target]` is the full index.
    pub table: Vec<usize>,
}

impl Split {
    pub fn full(&self, rest: usize, target: usize) -> usize {
        self.table[rest * self.target_dim + target]
    }
}

impl Layout {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = index / s;
            index %= s;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Splits the space into the ordered `targets` and the remaining
    /// subsystems (in their natural order).
    pub(crate) fn split(&self, targets: &[usize]) -> Result<Split> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for &t in targets {
            if t >= n || seen[t] {
                return Err(LtsError::InvalidSubsystems(format!(
                    "targets {targets:?} invalid for {n} subsystems"
                )));
            }
            seen[t] = true;
        }
        let rest: Vec<usize> = (0..n).filter(|k| !seen[*k]).collect();
        let target_dim: usize = targets.iter().map(|&t| self.dims[t]).product();
        let rest_dim: usize = rest.iter().map(|&r| self.dims[r]).product();
        let mut table = vec![0; self.total()];
        for full in 0..self.total() {
            let digits = self.digits(full);
            let t = targets
                .iter()
                .fold(0, |acc, &k| acc * self.dims[k] + digits[k]);
            let r = rest
                .iter()
                .fold(0, |acc, &k| acc * self.dims[k] + digits[k]);
            table[r * target_dim + t] = full;
        }
        Ok(Split {
            target_dim,
            rest_dim,
            table,
        })
    }
}

/// Applies `op`, acting on the ordered subsystems `targets`, to a state of the
/// full space. The operator need not be unitary.
pub fn apply_local(
    amps: &CVector,
    dims: &[usize],
    op: &CMatrix,
    targets: &[usize],
) -> Result<CVector> {
    let layout = Layout::new(dims);
    if layout.total() != amps.len() {
        return Err(LtsError::DimensionMismatch {
            expected: layout.total(),
            found: amps.len(),
        });
    }
    let split = layout.split(targets)?;
    if op.nrows() != split.target_dim || op.ncols() != split.target_dim {
        return Err(LtsError::DimensionMismatch {
            expected: split.target_dim,
            found: op.nrows(),
        });
    }
    let mut out = CVector::zeros(amps.len());
    let mut local = CVector::zeros(split.target_dim);
    for r in 0..split.rest_dim {
        for t in 0..split.target_dim {
            local[t] = amps[split.full(r, t)];
        }
        let mapped = op * &local;
        for t in 0..split.target_dim {
            out[split.full(r, t)] = mapped[t];
        }
    }
    Ok(out)
}

/// Embeds `op` (acting on `targets`) into the full space as `op ⊗ 1`.
pub fn embed_operator(op: &CMatrix, targets: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let layout = Layout::new(dims);
    let split = layout.split(targets)?;
    if op.nrows() != split.target_dim || op.ncols() != split.target_dim {
        return Err(LtsError::DimensionMismatch {
            expected: split.target_dim,
            found: op.nrows(),
        });
    }
    let d = layout.total();
    let mut full = CMatrix::zeros(d, d);
    for r in 0..split.rest_dim {
        for a in 0..split.target_dim {
            for b in 0..split.target_dim {
                full[(split.full(r, a), split.full(r, b))] = op[(a, b)];
            }
        }
    }
    Ok(full)
}

/// ⟨ψ|op ⊗ 1|ψ⟩.
pub fn expectation(amps: &CVector, dims: &[usize], op: &CMatrix, targets: &[usize]) -> Result<C64> {
    let applied = apply_local(amps, dims, op, targets)?;
    Ok(amps.dotc(&applied))
}

/// `Err(deviation)` when the largest entry of |m − m†| exceeds `tol`.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> std::result::Result<(), f64> {
    if m.nrows() != m.ncols() {
        return Err(f64::INFINITY);
    }
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if dev <= tol {
        Ok(())
    } else {
        Err(dev)
    }
}
