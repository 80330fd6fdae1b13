//! Reduced states of a four-body system through two restructurings: first
//! the pairs (1,2) and (3,4) merge, then subsystems 2 and 3 merge while 1
//! and 4 evolve alone.
//!
//! Subsystems are numbered 0..4 in code. Each merged pair is described by
//! its instantaneous Schmidt basis.

use rand::Rng;

use crate::quantum::{
    apply_local, kron, reduced_state, schmidt_decompose, Bipartition, DensityMatrix,
    SpectralDecomposition, StateVector,
};
use crate::{CMatrix, CVector, LtsError, Result, C64};

/// Tolerance on Σ|d_pq|² = 1 and on basis orthonormality.
pub const SCHMIDT_TOL: f64 = 1e-10;

/// Amplitudes c_ijkl of a four-body pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct FourBodyAmplitudes {
    state: StateVector,
}

impl FourBodyAmplitudes {
    pub fn new(state: StateVector) -> Result<Self> {
        if state.dims().len() != 4 {
            return Err(LtsError::InvalidSubsystems(format!(
                "four subsystems required, got {}",
                state.dims().len()
            )));
        }
        Ok(FourBodyAmplitudes { state })
    }

    /// Ψ = φ_12 ⊗ χ_34.
    pub fn product(pair12: &StateVector, pair34: &StateVector) -> Result<Self> {
        if pair12.dims().len() != 2 || pair34.dims().len() != 2 {
            return Err(LtsError::InvalidSubsystems(
                "pair states must have two subsystems".into(),
            ));
        }
        let amps = pair12.amplitudes().kronecker(pair34.amplitudes());
        let dims = pair12.dims().iter().chain(pair34.dims()).copied().collect();
        Self::new(StateVector::new(amps, dims)?)
    }

    /// Haar-random (generally entangled) amplitudes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: [usize; 4]) -> Self {
        FourBodyAmplitudes {
            state: StateVector::random(rng, dims.to_vec()),
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn dims(&self) -> [usize; 4] {
        let d = self.state.dims();
        [d[0], d[1], d[2], d[3]]
    }

    /// c_ijkl.
    pub fn amplitude(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let [_, d2, d3, d4] = self.dims();
        self.state.amplitudes()[((i * d2 + j) * d3 + k) * d4 + l]
    }
}

/// A reduced density matrix together with the weights of its diagonal form.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub rho: DensityMatrix,
    pub weights: Vec<f64>,
}

fn check_subsystem(which: usize) -> Result<()> {
    if which >= 4 {
        return Err(LtsError::InvalidSubsystems(format!(
            "subsystem {which} out of range 0..4"
        )));
    }
    Ok(())
}

/// Reduced state of one subsystem; `weights` are its diagonal entries in the
/// given product basis (p_i, q_j, …).
pub fn initial_reduced(c: &FourBodyAmplitudes, which: usize) -> Result<ReducedState> {
    check_subsystem(which)?;
    let rho = reduced_state(&c.state, &[which])?;
    let weights = (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect();
    Ok(ReducedState { rho, weights })
}

/// Amplitudes rewritten in the eigenbasis of each single-subsystem reduced
/// state, together with those bases (columns). In this basis every
/// single-subsystem reduced state is diagonal.
pub fn to_local_eigenbases(c: &FourBodyAmplitudes) -> Result<(FourBodyAmplitudes, Vec<CMatrix>)> {
    let dims = c.state.dims().to_vec();
    let mut amps = c.state.amplitudes().clone();
    let mut bases = Vec::with_capacity(4);
    for s in 0..4 {
        let rho = reduced_state(&c.state, &[s])?;
        let v = rho.matrix().clone().symmetric_eigen().eigenvectors;
        amps = apply_local(&amps, &dims, &v.adjoint(), &[s])?;
        bases.push(v);
    }
    Ok((
        FourBodyAmplitudes {
            state: StateVector::normalized(amps, dims)?,
        },
        bases,
    ))
}

/// Instantaneous Schmidt basis {|p⟩|p⟩} of a merging pair and the
/// coefficients c^{ij}_p = ⟨p p|U|i j⟩ of its pair unitary.
#[derive(Debug, Clone)]
pub struct PairSchmidt {
    dims: (usize, usize),
    left: Vec<CVector>,
    right: Vec<CVector>,
    /// Row p, column i·d_b + j.
    coefficients: CMatrix,
}

impl PairSchmidt {
    /// Basis taken from the Schmidt decomposition of U|pair_state⟩.
    pub fn instantaneous(pair_state: &StateVector, unitary: &CMatrix) -> Result<Self> {
        if pair_state.dims().len() != 2 {
            return Err(LtsError::InvalidSubsystems(
                "pair state must have two subsystems".into(),
            ));
        }
        if unitary.nrows() != pair_state.dim() || unitary.ncols() != pair_state.dim() {
            return Err(LtsError::DimensionMismatch {
                expected: pair_state.dim(),
                found: unitary.nrows(),
            });
        }
        let evolved = StateVector::normalized(
            unitary * pair_state.amplitudes(),
            pair_state.dims().to_vec(),
        )?;
        let terms = schmidt_decompose(&evolved, &Bipartition::split_at(1, 2)?)?;
        let (left, right) = terms.into_iter().map(|t| (t.left, t.right)).unzip();
        Self::new(
            (pair_state.dims()[0], pair_state.dims()[1]),
            left,
            right,
            unitary,
        )
    }

    /// Basis supplied by the caller; both families must be orthonormal.
    pub fn new(
        dims: (usize, usize),
        left: Vec<CVector>,
        right: Vec<CVector>,
        unitary: &CMatrix,
    ) -> Result<Self> {
        let (da, db) = dims;
        if left.len() != right.len() || left.is_empty() {
            return Err(LtsError::InvalidSchmidt(
                "left and right families must have equal nonzero size".into(),
            ));
        }
        check_orthonormal(&left, da)?;
        check_orthonormal(&right, db)?;
        if unitary.nrows() != da * db || unitary.ncols() != da * db {
            return Err(LtsError::DimensionMismatch {
                expected: da * db,
                found: unitary.nrows(),
            });
        }
        let rank = left.len();
        let mut coefficients = CMatrix::zeros(rank, da * db);
        for p in 0..rank {
            let pp = left[p].kronecker(&right[p]);
            let row = pp.adjoint() * unitary;
            coefficients.row_mut(p).copy_from(&row);
        }
        Ok(PairSchmidt {
            dims,
            left,
            right,
            coefficients,
        })
    }

    pub fn rank(&self) -> usize {
        self.left.len()
    }

    /// |p⟩ of the first member.
    pub fn left(&self) -> &[CVector] {
        &self.left
    }

    /// |p⟩ of the second member.
    pub fn right(&self) -> &[CVector] {
        &self.right
    }

    /// c^{ij}_p.
    pub fn coefficient(&self, p: usize, i: usize, j: usize) -> C64 {
        self.coefficients[(p, i * self.dims.1 + j)]
    }

    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }
}

fn check_orthonormal(vectors: &[CVector], dim: usize) -> Result<()> {
    for (a, u) in vectors.iter().enumerate() {
        if u.len() != dim {
            return Err(LtsError::InvalidSchmidt(format!(
                "vector {a} has length {}, expected {dim}",
                u.len()
            )));
        }
        for (b, v) in vectors.iter().enumerate().skip(a) {
            let expected = if a == b { 1.0 } else { 0.0 };
            let dev = (u.dotc(v) - C64::new(expected, 0.0)).norm();
            if dev > SCHMIDT_TOL {
                return Err(LtsError::InvalidSchmidt(format!(
                    "vectors {a} and {b} are not orthonormal (deviation {dev:e})"
                )));
            }
        }
    }
    Ok(())
}

/// d_pq = Σ c_ijkl c^{ij}_p c^{kl}_q after the first restructuring.
#[derive(Debug, Clone)]
pub struct MergedAmplitudes {
    d: CMatrix,
}

impl MergedAmplitudes {
    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// Σ_pq |d_pq|².
    pub fn weight(&self) -> f64 {
        self.d.iter().map(|z| z.norm_sqr()).sum()
    }

    /// r_p = Σ_q |d_pq|².
    pub fn row_weights(&self) -> Vec<f64> {
        self.d
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Σ_p |d_pq|².
    pub fn column_weights(&self) -> Vec<f64> {
        self.d
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

/// Computes d_pq and checks that the merged state has the Schmidt form
/// Σ d_pq |p p q q⟩, i.e. Σ|d_pq|² = 1.
pub fn merge(
    c: &FourBodyAmplitudes,
    s12: &PairSchmidt,
    s34: &PairSchmidt,
) -> Result<MergedAmplitudes> {
    let [d1, d2, d3, d4] = c.dims();
    if s12.dims != (d1, d2) || s34.dims != (d3, d4) {
        return Err(LtsError::InvalidSchmidt(
            "pair dimensions do not match the amplitudes".into(),
        ));
    }
    let cm =
        CMatrix::from_column_slice(d3 * d4, d1 * d2, c.state.amplitudes().as_slice()).transpose();
    let d = &s12.coefficients * cm * s34.coefficients.transpose();
    let merged = MergedAmplitudes { d };
    let weight = merged.weight();
    if (weight - 1.0).abs() > SCHMIDT_TOL {
        return Err(LtsError::SchmidtFormViolated { weight });
    }
    Ok(merged)
}

fn diagonal_state(vectors: &[CVector], weights: &[f64], dim: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for (v, &w) in vectors.iter().zip(weights) {
        m += v * v.adjoint() * C64::new(w, 0.0);
    }
    DensityMatrix::from_raw(m, vec![dim])
}

/// Σ_p r_p |p⟩⟨p| for subsystem 0 or 1 (and the analogue with Σ_p |d_pq|²
/// for subsystems 2 and 3).
pub fn merged_reduced(
    merged: &MergedAmplitudes,
    s12: &PairSchmidt,
    s34: &PairSchmidt,
    which: usize,
) -> Result<ReducedState> {
    check_subsystem(which)?;
    let (vectors, weights, dim) = match which {
        0 => (&s12.left, merged.row_weights(), s12.dims.0),
        1 => (&s12.right, merged.row_weights(), s12.dims.1),
        2 => (&s34.left, merged.column_weights(), s34.dims.0),
        _ => (&s34.right, merged.column_weights(), s34.dims.1),
    };
    Ok(ReducedState {
        rho: diagonal_state(vectors, &weights, dim),
        weights,
    })
}

/// Σ_pq d_pq |p⟩|p⟩|q⟩|q⟩ as an explicit state.
pub fn merged_state(
    merged: &MergedAmplitudes,
    s12: &PairSchmidt,
    s34: &PairSchmidt,
) -> Result<StateVector> {
    let dims = vec![s12.dims.0, s12.dims.1, s34.dims.0, s34.dims.1];
    let mut amps = CVector::zeros(dims.iter().product());
    for p in 0..s12.rank() {
        let pp = s12.left[p].kronecker(&s12.right[p]);
        for q in 0..s34.rank() {
            let qq = s34.left[q].kronecker(&s34.right[q]);
            amps += pp.kronecker(&qq) * merged.d[(p, q)];
        }
    }
    StateVector::normalized(amps, dims)
}

/// Unitaries of the second restructuring: U_1(t_1), U_23(t_23), U_4(t_4).
#[derive(Debug, Clone)]
pub struct RestructureUnitaries {
    pub u1: CMatrix,
    pub u23: CMatrix,
    pub u4: CMatrix,
}

impl RestructureUnitaries {
    pub fn from_spectra(
        h1: &SpectralDecomposition,
        h23: &SpectralDecomposition,
        h4: &SpectralDecomposition,
        times: [f64; 3],
    ) -> Self {
        RestructureUnitaries {
            u1: h1.unitary(times[0]),
            u23: h23.unitary(times[1]),
            u4: h4.unitary(times[2]),
        }
    }
}

fn check_unitaries(s12: &PairSchmidt, s34: &PairSchmidt, u: &RestructureUnitaries) -> Result<()> {
    let (d1, d2, d3, d4) = (s12.dims.0, s12.dims.1, s34.dims.0, s34.dims.1);
    for (m, d) in [(&u.u1, d1), (&u.u23, d2 * d3), (&u.u4, d4)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(LtsError::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
    }
    Ok(())
}

/// Reduced states after the (2,3) merge.
///
/// Subsystem 0 gets U_1 ρ_{0,I} U_1†; subsystem 3 likewise with U_4.
/// Subsystems 1 and 2 get Σ_pq |d_pq|² Σ_k |c^{pq}_k|² |k^{pq}⟩⟨k^{pq}|,
/// where U_23|p⟩|q⟩ = Σ_k c^{pq}_k |k^{pq}⟩|k^{pq}⟩ is the instantaneous
/// Schmidt form of each component; `weights` are λ_k = Σ_pq |d_pq|²|c^{pq}_k|².
pub fn restructured_reduced(
    merged: &MergedAmplitudes,
    s12: &PairSchmidt,
    s34: &PairSchmidt,
    unitaries: &RestructureUnitaries,
    which: usize,
) -> Result<ReducedState> {
    check_subsystem(which)?;
    check_unitaries(s12, s34, unitaries)?;
    if which == 0 || which == 3 {
        let previous = merged_reduced(merged, s12, s34, which)?;
        let u = if which == 0 {
            &unitaries.u1
        } else {
            &unitaries.u4
        };
        let rho = previous.rho.conjugate(u)?;
        let weights = rho.eigenvalues();
        return Ok(ReducedState { rho, weights });
    }
    let (d2, d3) = (s12.dims.1, s34.dims.0);
    let dim = if which == 1 { d2 } else { d3 };
    let mut rho = CMatrix::zeros(dim, dim);
    let mut weights = vec![0.0; d2.min(d3)];
    let cut = Bipartition::split_at(1, 2)?;
    for p in 0..s12.rank() {
        for q in 0..s34.rank() {
            let w = merged.d[(p, q)].norm_sqr();
            if w == 0.0 {
                continue;
            }
            let input = s12.right[p].kronecker(&s34.left[q]);
            let component = StateVector::normalized(&unitaries.u23 * input, vec![d2, d3])?;
            for (k, term) in schmidt_decompose(&component, &cut)?.into_iter().enumerate() {
                let lam = w * term.coefficient * term.coefficient;
                weights[k] += lam;
                let v = if which == 1 { &term.left } else { &term.right };
                rho += v * v.adjoint() * C64::new(lam, 0.0);
            }
        }
    }
    Ok(ReducedState {
        rho: DensityMatrix::from_raw(rho, vec![dim]),
        weights,
    })
}

/// Σ_pq d_pq U_1|p⟩ ⊗ U_23(|p⟩|q⟩) ⊗ U_4|q⟩ as an explicit state.
pub fn restructured_state(
    merged: &MergedAmplitudes,
    s12: &PairSchmidt,
    s34: &PairSchmidt,
    unitaries: &RestructureUnitaries,
) -> Result<StateVector> {
    check_unitaries(s12, s34, unitaries)?;
    let dims = vec![s12.dims.0, s12.dims.1, s34.dims.0, s34.dims.1];
    let mut amps = CVector::zeros(dims.iter().product());
    for p in 0..s12.rank() {
        let first = &unitaries.u1 * &s12.left[p];
        for q in 0..s34.rank() {
            let middle = &unitaries.u23 * s12.right[p].kronecker(&s34.left[q]);
            let last = &unitaries.u4 * &s34.right[q];
            amps += first.kronecker(&middle).kronecker(&last) * merged.d[(p, q)];
        }
    }
    StateVector::normalized(amps, dims)
}

/// U_12 ⊗ U_34 applied to `c`, the exact state after the first merge.
pub fn evolve_pairs(c: &FourBodyAmplitudes, u12: &CMatrix, u34: &CMatrix) -> Result<StateVector> {
    let u = kron(u12, u34);
    if u.nrows() != c.state.dim() {
        return Err(LtsError::DimensionMismatch {
            expected: c.state.dim(),
            found: u.nrows(),
        });
    }
    StateVector::normalized(u * c.state.amplitudes(), c.state.dims().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        let m = CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        crate::quantum::spectral_decompose(&h).unwrap().unitary(1.7)
    }

    #[test]
    fn uniform_weights() {
        // equal amplitudes form the product |+⟩^4: weights 1/2 but a pure marginal
        let amps = CVector::from_element(16, C64::new(0.25, 0.0));
        let c = FourBodyAmplitudes::new(StateVector::new(amps, vec![2; 4]).unwrap()).unwrap();
        let r = initial_reduced(&c, 2).unwrap();
        assert_eq!(r.weights, vec![0.5, 0.5]);
        assert!((r.rho.purity() - 1.0).abs() < 1e-14);

        // equal moduli with phases (−1)^{ij + kl}: both pairs maximally entangled
        let amps = CVector::from_fn(16, |n, _| {
            let (i, j, k, l) = (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1);
            C64::new(
                if (i * j + k * l) % 2 == 0 {
                    0.25
                } else {
                    -0.25
                },
                0.0,
            )
        });
        let c = FourBodyAmplitudes::new(StateVector::new(amps, vec![2; 4]).unwrap()).unwrap();
        let r = initial_reduced(&c, 2).unwrap();
        assert!(
            r.rho
                .max_deviation(&(CMatrix::identity(2, 2) * C64::new(0.5, 0.0)))
                < 1e-15
        );
    }

    #[test]
    fn merged_state_equals_pair_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (phi, chi) = (
            StateVector::random(&mut rng, vec![2, 2]),
            StateVector::random(&mut rng, vec![2, 2]),
        );
        let c = FourBodyAmplitudes::product(&phi, &chi).unwrap();
        let (u12, u34) = (random_unitary(&mut rng, 4), random_unitary(&mut rng, 4));
        let s12 = PairSchmidt::instantaneous(&phi, &u12).unwrap();
        let s34 = PairSchmidt::instantaneous(&chi, &u34).unwrap();
        let merged = merge(&c, &s12, &s34).unwrap();
        let explicit = merged_state(&merged, &s12, &s34).unwrap();
        let exact = evolve_pairs(&c, &u12, &u34).unwrap();
        assert!(explicit.fidelity(&exact).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn entangled_input_violates_schmidt_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = FourBodyAmplitudes::random(&mut rng, [2; 4]);
        let phi = StateVector::random(&mut rng, vec![2, 2]);
        let u = random_unitary(&mut rng, 4);
        let s = PairSchmidt::instantaneous(&phi, &u).unwrap();
        assert!(matches!(
            merge(&c, &s, &s),
            Err(LtsError::SchmidtFormViolated { .. })
        ));
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let v = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let r = PairSchmidt::new(
            (2, 2),
            vec![v.clone(), v.clone()],
            vec![v.clone(), v],
            &CMatrix::identity(4, 4),
        );
        assert!(matches!(r, Err(LtsError::InvalidSchmidt(_))));
    }
}
