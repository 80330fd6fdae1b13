use super::layout::Layout;
use super::StateVector;
use crate::{CMatrix, CVector, LtsError, Result, C64};

/// Singular values below this are treated as numerically zero.
const SCHMIDT_CUTOFF: f64 = 1e-13;

/// A cut of the subsystems into exactly two nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    /// Accepts a block list; anything other than two disjoint covering blocks
    /// is rejected.
    pub fn new(blocks: &[Vec<usize>], n_subsystems: usize) -> Result<Self> {
        if blocks.len() != 2 {
            return Err(LtsError::InvalidPartition(format!(
                "a Schmidt cut needs exactly two blocks, got {}",
                blocks.len()
            )));
        }
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if blocks.iter().any(|b| b.is_empty()) || all != (0..n_subsystems).collect::<Vec<_>>() {
            return Err(LtsError::InvalidPartition(format!(
                "blocks {blocks:?} do not cover 0..{n_subsystems} disjointly"
            )));
        }
        let mut left = blocks[0].clone();
        let mut right = blocks[1].clone();
        left.sort_unstable();
        right.sort_unstable();
        Ok(Self { left, right })
    }

    /// First `k` subsystems against the rest.
    pub fn split_at(k: usize, n_subsystems: usize) -> Result<Self> {
        Self::new(
            &[(0..k).collect(), (k..n_subsystems).collect()],
            n_subsystems,
        )
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }
}

/// One term s·|u⟩⊗|v⟩ of a Schmidt decomposition.
#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    pub coefficient: f64,
    pub left: CVector,
    pub right: CVector,
}

fn amplitude_matrix(
    psi: &StateVector,
    cut: &Bipartition,
) -> Result<(CMatrix, super::layout::Split)> {
    let n = psi.dims().len();
    if cut.left.len() + cut.right.len() != n || cut.left.iter().chain(&cut.right).any(|&k| k >= n) {
        return Err(LtsError::InvalidPartition(format!(
            "cut does not match {n} subsystems"
        )));
    }
    // target = left block, rest = right block
    let split = Layout::new(psi.dims()).split(&cut.left)?;
    let a = psi.amplitudes();
    let m = CMatrix::from_fn(split.target_dim, split.rest_dim, |l, r| a[split.full(r, l)]);
    Ok((m, split))
}

/// Schmidt decomposition across `cut`, coefficients descending.
pub fn schmidt_decompose(psi: &StateVector, cut: &Bipartition) -> Result<Vec<SchmidtTerm>> {
    let (m, _) = amplitude_matrix(psi, cut)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    Ok(order
        .into_iter()
        .filter(|&k| svd.singular_values[k] > SCHMIDT_CUTOFF)
        .map(|k| SchmidtTerm {
            coefficient: svd.singular_values[k],
            left: u.column(k).into_owned(),
            // rows of V^† are the conjugated right vectors
            right: v_t.row(k).transpose(),
        })
        .collect())
}

/// Σ_k s_k |u_k⟩⊗|v_k⟩ placed back on the full index layout.
pub fn schmidt_reconstruct(
    terms: &[SchmidtTerm],
    cut: &Bipartition,
    dims: &[usize],
) -> Result<StateVector> {
    let split = Layout::new(dims).split(&cut.left)?;
    let mut amps = CVector::zeros(dims.iter().product());
    for term in terms {
        if term.left.len() != split.target_dim || term.right.len() != split.rest_dim {
            return Err(LtsError::DimensionMismatch {
                expected: split.target_dim,
                found: term.left.len(),
            });
        }
        for l in 0..split.target_dim {
            for r in 0..split.rest_dim {
                amps[split.full(r, l)] +=
                    C64::new(term.coefficient, 0.0) * term.left[l] * term.right[r];
            }
        }
    }
    Ok(StateVector::from_raw(amps, dims.to_vec()))
}
