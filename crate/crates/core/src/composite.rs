//! Composite Hamiltonians, detection of approximately isolated blocks,
//! multi-time product evolution and restructuring trajectories.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::Rng;

use crate::lts_map::{sample_local_time, TimeWindow};
use crate::quantum::{
    apply_local, embed_operator, expectation, is_hermitian, reduced_state, spectral_decompose,
    DensityMatrix, Layout, SpectralDecomposition, StateVector, DEFAULT_MAX_DIM, HERMITIAN_TOL,
};
use crate::{CMatrix, LtsError, Result};

/// Default relative threshold for a negligible coupling.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Default number of probe times used by [`compare_factorizations`].
pub const DEFAULT_PROBES: usize = 8;
/// Fidelity gap below which two factorizations are reported as a tie.
pub const DEGENERACY_GAP: f64 = 1e-9;

const ENERGY_SCALE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            name: name.into(),
            dim,
        }
    }
}

/// H = Σ_i T_i + Σ_{i<j} H_ij over an ordered list of subsystems.
///
/// Subsystems are addressed by their position in the list. A pair term for
/// (i, j) with i < j acts on the space H_i ⊗ H_j in that order.
#[derive(Debug, Clone)]
pub struct CompositeHamiltonian {
    subsystems: Vec<Subsystem>,
    self_terms: Vec<Option<CMatrix>>,
    pair_terms: BTreeMap<(usize, usize), CMatrix>,
}

impl CompositeHamiltonian {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(LtsError::InvalidSubsystems("no subsystems".into()));
        }
        let mut total: usize = 1;
        for s in &subsystems {
            if s.dim == 0 {
                return Err(LtsError::InvalidSubsystems(format!(
                    "subsystem `{}` has dimension 0",
                    s.name
                )));
            }
            total = total.saturating_mul(s.dim);
        }
        if total > DEFAULT_MAX_DIM {
            return Err(LtsError::DimensionOverflow {
                dim: total,
                max: DEFAULT_MAX_DIM,
            });
        }
        let n = subsystems.len();
        Ok(CompositeHamiltonian {
            subsystems,
            self_terms: vec![None; n],
            pair_terms: BTreeMap::new(),
        })
    }

    /// Sets the free term of subsystem `i`.
    pub fn with_self(mut self, i: usize, op: CMatrix) -> Result<Self> {
        let d = self.subsystem(i)?.dim;
        check_term(&op, d)?;
        self.self_terms[i] = Some(op);
        Ok(self)
    }

    /// Sets the coupling between `i` and `j`; `op` acts on H_i ⊗ H_j in the
    /// order given.
    pub fn with_pair(mut self, i: usize, j: usize, op: CMatrix) -> Result<Self> {
        if i == j {
            return Err(LtsError::InvalidSubsystems(format!(
                "pair ({i}, {j}) couples a subsystem to itself"
            )));
        }
        let (di, dj) = (self.subsystem(i)?.dim, self.subsystem(j)?.dim);
        check_term(&op, di * dj)?;
        let (key, op) = if i < j {
            ((i, j), op)
        } else {
            ((j, i), swap_factors(&op, di, dj))
        };
        self.pair_terms.insert(key, op);
        Ok(self)
    }

    fn subsystem(&self, i: usize) -> Result<&Subsystem> {
        self.subsystems.get(i).ok_or_else(|| {
            LtsError::InvalidSubsystems(format!(
                "index {i} out of range for {} subsystems",
                self.subsystems.len()
            ))
        })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn self_term(&self, i: usize) -> Option<&CMatrix> {
        self.self_terms.get(i).and_then(Option::as_ref)
    }

    pub fn pair_term(&self, i: usize, j: usize) -> Option<&CMatrix> {
        self.pair_terms.get(&(i.min(j), i.max(j)))
    }

    /// Pair terms keyed by (i, j) with i < j.
    pub fn pair_terms(&self) -> impl Iterator<Item = (&(usize, usize), &CMatrix)> {
        self.pair_terms.iter()
    }

    /// The full operator on the joint space.
    pub fn matrix(&self) -> CMatrix {
        let all: Vec<usize> = (0..self.len()).collect();
        self.block_matrix(&all)
            .expect("all subsystems form a valid block")
    }

    /// Free terms of `block` plus the couplings internal to it, acting on the
    /// subsystems of `block` in ascending order.
    pub fn block_matrix(&self, block: &[usize]) -> Result<CMatrix> {
        let mut members = block.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.len() != block.len() || members.iter().any(|&i| i >= self.len()) {
            return Err(LtsError::InvalidSubsystems(format!(
                "invalid block {block:?}"
            )));
        }
        let dims: Vec<usize> = members.iter().map(|&i| self.subsystems[i].dim).collect();
        let d: usize = dims.iter().product();
        let mut h = CMatrix::zeros(d, d);
        for (local, &i) in members.iter().enumerate() {
            if let Some(t) = &self.self_terms[i] {
                h += embed_operator(t, &[local], &dims)?;
            }
        }
        for (&(i, j), op) in &self.pair_terms {
            if let (Ok(a), Ok(b)) = (members.binary_search(&i), members.binary_search(&j)) {
                h += embed_operator(op, &[a, b], &dims)?;
            }
        }
        Ok(h)
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.total_dim() {
            return Err(LtsError::DimensionMismatch {
                expected: self.total_dim(),
                found: psi.dim(),
            });
        }
        Ok(())
    }
}

fn check_term(op: &CMatrix, d: usize) -> Result<()> {
    if op.nrows() != d || op.ncols() != d {
        return Err(LtsError::DimensionMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    is_hermitian(op, HERMITIAN_TOL).map_err(|deviation| LtsError::NotHermitian { deviation })
}

/// Reorders an operator on H_a ⊗ H_b into one on H_b ⊗ H_a.
fn swap_factors(op: &CMatrix, da: usize, db: usize) -> CMatrix {
    let d = da * db;
    let perm = |k: usize| (k % da) * db + k / da;
    CMatrix::from_fn(d, d, |r, c| op[(perm(r), perm(c))])
}

/// Disjoint blocks of subsystem indices covering all subsystems.
///
/// Stored in canonical form: each block ascending, blocks ordered by their
/// smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n_subsystems: usize) -> Result<Self> {
        let mut seen = vec![false; n_subsystems];
        let mut canonical = Vec::with_capacity(blocks.len());
        for mut b in blocks {
            if b.is_empty() {
                return Err(LtsError::InvalidPartition("empty block".into()));
            }
            for &i in &b {
                if i >= n_subsystems {
                    return Err(LtsError::InvalidPartition(format!(
                        "index {i} out of range"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(LtsError::InvalidPartition(format!(
                        "subsystem {i} appears twice"
                    )));
                }
            }
            b.sort_unstable();
            canonical.push(b);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(LtsError::InvalidPartition(format!(
                "subsystem {missing} not covered"
            )));
        }
        canonical.sort_by_key(|b| b[0]);
        Ok(Partition { blocks: canonical })
    }

    /// Every subsystem on its own.
    pub fn singletons(n: usize) -> Self {
        Partition {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// One block holding everything.
    pub fn whole(n: usize) -> Self {
        Partition {
            blocks: vec![(0..n).collect()],
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n_subsystems(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Index of the block containing subsystem `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&i))
    }

    /// True when every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| other.blocks.iter().any(|o| b.iter().all(|i| o.contains(i))))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, "|")?;
            }
            let names: Vec<String> = b.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        Ok(())
    }
}

/// One local time per block, t = t0 + δt with |δt| ≤ Δt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTime {
    pub t: f64,
    pub t0: f64,
    pub half_width: f64,
}

/// Local times for the blocks of a partition, in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeAssignment {
    entries: Vec<BlockTime>,
}

impl LocalTimeAssignment {
    pub fn new(entries: Vec<BlockTime>) -> Result<Self> {
        for (k, e) in entries.iter().enumerate() {
            if !(e.t.is_finite() && e.t >= 0.0) {
                return Err(LtsError::param(
                    "t",
                    format!("block {k}: time {} must be finite and nonnegative", e.t),
                ));
            }
            if !(e.half_width >= 0.0) || (e.t - e.t0).abs() > e.half_width * (1.0 + 1e-12) + 1e-15 {
                return Err(LtsError::param(
                    "t",
                    format!(
                        "block {k}: {} lies outside {} ± {}",
                        e.t, e.t0, e.half_width
                    ),
                ));
            }
        }
        Ok(LocalTimeAssignment { entries })
    }

    /// Sharp times with zero half-width.
    pub fn exact(times: &[f64]) -> Result<Self> {
        Self::new(
            times
                .iter()
                .map(|&t| BlockTime {
                    t,
                    t0: t,
                    half_width: 0.0,
                })
                .collect(),
        )
    }

    /// Draws one time per window.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, windows: &[TimeWindow]) -> Self {
        let entries = windows
            .iter()
            .map(|w| BlockTime {
                t: sample_local_time(rng, w).max(0.0),
                t0: w.t0(),
                half_width: w.half_width(),
            })
            .collect();
        LocalTimeAssignment { entries }
    }

    pub fn entries(&self) -> &[BlockTime] {
        &self.entries
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// ⟨Ψ|H_ij|Ψ⟩ for every pair term.
pub fn interaction_means(
    psi: &StateVector,
    h: &CompositeHamiltonian,
) -> Result<BTreeMap<(usize, usize), f64>> {
    h.check_state(psi)?;
    let dims = h.dims();
    h.pair_terms
        .iter()
        .map(|(&(i, j), op)| {
            Ok((
                (i, j),
                expectation(psi.amplitudes(), &dims, op, &[i, j])?.re,
            ))
        })
        .collect()
}

/// ⟨T_i⟩ minus the lowest eigenvalue of T_i for each subsystem (zero where no free term is set).
pub fn self_excess(psi: &StateVector, h: &CompositeHamiltonian) -> Result<Vec<f64>> {
    h.check_state(psi)?;
    let dims = h.dims();
    (0..h.len())
        .map(|i| match &h.self_terms[i] {
            None => Ok(0.0),
            Some(t) => {
                let mean = expectation(psi.amplitudes(), &dims, t, &[i])?.re;
                let ground = spectral_decompose(t)?.ground_energy();
                Ok(mean - ground)
            }
        })
        .collect()
}

/// Connected components of the graph whose edges are the non-negligible
/// couplings |⟨H_ij⟩| > ε·E_scale.
pub fn detect_partition(
    psi: &StateVector,
    h: &CompositeHamiltonian,
    epsilon: f64,
) -> Result<Partition> {
    if !(epsilon > 0.0) {
        return Err(LtsError::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    let scale = self_excess(psi, h)?
        .into_iter()
        .fold(ENERGY_SCALE_FLOOR, f64::max);
    let means = interaction_means(psi, h)?;

    let n = h.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (&(i, j), &m) in &means {
        if m.abs() > epsilon * scale {
            let (a, b) = (root(&mut parent, i), root(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Partition::new(groups.into_values().collect(), n)
}

/// Spectral data of every block Hamiltonian of a partition.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    dims: Vec<usize>,
    partition: Partition,
    spectra: Vec<SpectralDecomposition>,
}

impl BlockPropagator {
    pub fn new(h: &CompositeHamiltonian, partition: &Partition) -> Result<Self> {
        if partition.n_subsystems() != h.len() {
            return Err(LtsError::InvalidPartition(format!(
                "partition covers {} subsystems, Hamiltonian has {}",
                partition.n_subsystems(),
                h.len()
            )));
        }
        let spectra = partition
            .blocks()
            .iter()
            .map(|b| spectral_decompose(&h.block_matrix(b)?))
            .collect::<Result<_>>()?;
        Ok(BlockPropagator {
            dims: h.dims(),
            partition: partition.clone(),
            spectra,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn spectra(&self) -> &[SpectralDecomposition] {
        &self.spectra
    }

    /// e^{−iH_b t_b} for each block b.
    pub fn unitaries(&self, times: &[f64]) -> Result<Vec<CMatrix>> {
        self.check_times(times)?;
        Ok(self
            .spectra
            .iter()
            .zip(times)
            .map(|(s, &t)| s.unitary(t))
            .collect())
    }

    /// ⊗_b e^{−iH_b t_b}|ψ⟩.
    pub fn evolve(&self, psi: &StateVector, times: &[f64]) -> Result<StateVector> {
        let order: Vec<usize> = (0..self.partition.len()).collect();
        self.evolve_in_order(psi, times, &order)
    }

    /// Same as [`evolve`](Self::evolve) but applying the block factors in
    /// the given order.
    pub fn evolve_in_order(
        &self,
        psi: &StateVector,
        times: &[f64],
        order: &[usize],
    ) -> Result<StateVector> {
        self.check_times(times)?;
        if psi.dims() != self.dims.as_slice() {
            return Err(LtsError::DimensionMismatch {
                expected: Layout::new(&self.dims).total(),
                found: psi.dim(),
            });
        }
        let mut amps = psi.amplitudes().clone();
        for &b in order {
            let block = self.partition.blocks().get(b).ok_or_else(|| {
                LtsError::InvalidPartition(format!("block index {b} out of range"))
            })?;
            let u = self.spectra[b].unitary(times[b]);
            amps = apply_local(&amps, &self.dims, &u, block)?;
        }
        StateVector::normalized(amps, self.dims.clone())
    }

    /// π/(2 Σ_b (⟨H_b⟩ − E_b,g)), or infinity when every block is in its
    /// ground level.
    pub fn orthogonality_time(&self, psi: &StateVector) -> Result<f64> {
        let mut excess = 0.0;
        for (block, spec) in self.partition.blocks().iter().zip(&self.spectra) {
            let rho = if block.len() == self.dims.len() {
                DensityMatrix::from_pure(psi)
            } else {
                reduced_state(psi, block)?
            };
            let mean = rho.expectation(&spec.operator())?.re;
            excess += (mean - spec.ground_energy()).max(0.0);
        }
        Ok(if excess > 0.0 {
            FRAC_PI_2 / excess
        } else {
            f64::INFINITY
        })
    }

    fn check_times(&self, times: &[f64]) -> Result<()> {
        if times.len() != self.partition.len() {
            return Err(LtsError::param(
                "times",
                format!("{} times for {} blocks", times.len(), self.partition.len()),
            ));
        }
        Ok(())
    }
}

/// ⊗_b e^{−iH_b t_b}|ψ⟩ with H_b the intra-block part of `h`.
pub fn multi_time_evolve(
    psi: &StateVector,
    h: &CompositeHamiltonian,
    partition: &Partition,
    times: &LocalTimeAssignment,
) -> Result<StateVector> {
    h.check_state(psi)?;
    BlockPropagator::new(h, partition)?.evolve(psi, &times.times())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    A,
    B,
}

/// Outcome of [`compare_factorizations`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationDecision {
    pub fidelity_a: f64,
    pub fidelity_b: f64,
    pub winner: Choice,
    pub degenerate: bool,
    pub horizon: f64,
}

/// Scores two partitions by the mean fidelity of their factored evolution
/// against exact evolution at `n_probe` equally spaced times in (0, horizon].
///
/// With `horizon = None` the larger of the two block orthogonality times is
/// used. Ties within [`DEGENERACY_GAP`] go to the partition with fewer blocks.
pub fn compare_factorizations(
    psi: &StateVector,
    h: &CompositeHamiltonian,
    a: &Partition,
    b: &Partition,
    horizon: Option<f64>,
    n_probe: usize,
) -> Result<FactorizationDecision> {
    h.check_state(psi)?;
    if n_probe < 2 {
        return Err(LtsError::param(
            "n_probe",
            format!("at least 2 required, got {n_probe}"),
        ));
    }
    let pa = BlockPropagator::new(h, a)?;
    let pb = BlockPropagator::new(h, b)?;
    let horizon = match horizon {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(LtsError::param(
                "horizon",
                format!("must be positive, got {t}"),
            ))
        }
        None => {
            let t = [pa.orthogonality_time(psi)?, pb.orthogonality_time(psi)?]
                .into_iter()
                .filter(|t| t.is_finite())
                .fold(0.0, f64::max);
            if t <= 0.0 {
                return Err(LtsError::NoFiniteBound(
                    "no candidate block carries excess energy".into(),
                ));
            }
            t
        }
    };
    let exact = spectral_decompose(&h.matrix())?;
    let (mut fa, mut fb) = (0.0, 0.0);
    for k in 1..=n_probe {
        let t = horizon * k as f64 / n_probe as f64;
        let reference = exact.evolve(psi, t)?;
        fa += reference.fidelity(&pa.evolve(psi, &vec![t; a.len()])?)?;
        fb += reference.fidelity(&pb.evolve(psi, &vec![t; b.len()])?)?;
    }
    let (fidelity_a, fidelity_b) = (fa / n_probe as f64, fb / n_probe as f64);
    let degenerate = (fidelity_a - fidelity_b).abs() < DEGENERACY_GAP;
    let winner = if degenerate {
        if b.len() < a.len() {
            Choice::B
        } else {
            Choice::A
        }
    } else if fidelity_a > fidelity_b {
        Choice::A
    } else {
        Choice::B
    };
    Ok(FactorizationDecision {
        fidelity_a,
        fidelity_b,
        winner,
        degenerate,
        horizon,
    })
}

/// One restructuring step: the partition in force, its local times and the
/// resulting state.
#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub partition: Partition,
    pub times: LocalTimeAssignment,
    pub state: StateVector,
}

/// A chain of block-local evolutions starting from a fixed initial state.
///
/// Extending a trajectory returns a new value; earlier steps and their times
/// are never modified.
#[derive(Debug, Clone)]
pub struct Trajectory {
    initial: StateVector,
    steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn new(initial: StateVector) -> Self {
        Trajectory {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn steps(&self) -> &[TrajectoryStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// State after the last step.
    pub fn current(&self) -> &StateVector {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    /// Evolves under `partition` with fresh times drawn from `windows`
    /// (one per block).
    pub fn apply_transition<R: Rng + ?Sized>(
        &self,
        h: &CompositeHamiltonian,
        partition: &Partition,
        rng: &mut R,
        windows: &[TimeWindow],
    ) -> Result<Trajectory> {
        if windows.len() != partition.len() {
            return Err(LtsError::param(
                "windows",
                format!("{} windows for {} blocks", windows.len(), partition.len()),
            ));
        }
        let times = LocalTimeAssignment::sample(rng, windows);
        self.apply_transition_with_times(h, partition, times)
    }

    pub fn apply_transition_with_times(
        &self,
        h: &CompositeHamiltonian,
        partition: &Partition,
        times: LocalTimeAssignment,
    ) -> Result<Trajectory> {
        let state = multi_time_evolve(self.current(), h, partition, &times)?;
        let mut next = self.clone();
        next.steps.push(TrajectoryStep {
            partition: partition.clone(),
            times,
            state,
        });
        Ok(next)
    }

    /// Recomputes every step from its recorded partition and times and
    /// returns the largest deviation from the stored states.
    pub fn replay(&self, h: &CompositeHamiltonian) -> Result<f64> {
        let mut state = self.initial.clone();
        let mut worst: f64 = 0.0;
        for step in &self.steps {
            state = multi_time_evolve(&state, h, &step.partition, &step.times)?;
            worst = worst.max(state.distance(&step.state));
        }
        Ok(worst)
    }
}
