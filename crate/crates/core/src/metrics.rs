//! Distinguishability overlap, individuality, orthogonal-transition time
//! bounds and moments of random coefficient vectors.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::composite::BlockPropagator;
use crate::numerics::quadrature::{simpson, trapezoid};
use crate::quantum::{apply_local, Layout, SpectralDecomposition, StateVector};
use crate::{LtsError, Result, C64};

/// Tolerance on Σ weights = 1 and on ∫p = 1.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Distinct energies and their degeneracies for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLevels {
    energies: Vec<f64>,
    degeneracies: Vec<usize>,
}

impl BlockLevels {
    pub fn new(energies: Vec<f64>, degeneracies: Vec<usize>) -> Result<Self> {
        if energies.is_empty() || energies.len() != degeneracies.len() {
            return Err(LtsError::param(
                "degeneracies",
                "one degeneracy per energy level required",
            ));
        }
        if degeneracies.contains(&0) {
            return Err(LtsError::param(
                "degeneracies",
                "degeneracies must be positive",
            ));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(LtsError::param("energies", "energies must be finite"));
        }
        Ok(BlockLevels {
            energies,
            degeneracies,
        })
    }

    /// Nondegenerate levels.
    pub fn simple(energies: Vec<f64>) -> Result<Self> {
        let g = vec![1; energies.len()];
        Self::new(energies, g)
    }

    pub fn from_spectrum(s: &SpectralDecomposition) -> Self {
        BlockLevels {
            energies: s.eigenvalues().to_vec(),
            degeneracies: s.degeneracies().to_vec(),
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracies
    }

    pub fn dim(&self) -> usize {
        self.degeneracies.iter().sum()
    }
}

/// Level structure of each block of a product system; d = Π d_b.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectra {
    blocks: Vec<BlockLevels>,
}

impl BlockSpectra {
    pub fn new(blocks: Vec<BlockLevels>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(LtsError::param("blocks", "at least one block required"));
        }
        Ok(BlockSpectra { blocks })
    }

    pub fn from_spectra(spectra: &[SpectralDecomposition]) -> Result<Self> {
        Self::new(spectra.iter().map(BlockLevels::from_spectrum).collect())
    }

    pub fn blocks(&self) -> &[BlockLevels] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(BlockLevels::dim).product()
    }

    /// Number of distinct levels per block.
    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.energies.len()).collect()
    }

    /// Σ_b E_{b,i_b} δt_b for the level multi-index encoded by `flat`.
    fn phase_sum(&self, flat: usize, layout: &Layout, offsets: &TimeOffsets) -> f64 {
        layout
            .digits(flat)
            .iter()
            .zip(&self.blocks)
            .zip(&offsets.0)
            .map(|((&i, b), &dt)| b.energies[i] * dt)
            .sum()
    }
}

/// δt_b = t′_b − t_b for every block.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeOffsets(Vec<f64>);

impl TimeOffsets {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.iter().any(|d| !d.is_finite()) {
            return Err(LtsError::param("offsets", "offsets must be finite"));
        }
        Ok(TimeOffsets(offsets))
    }

    pub fn zeros(n: usize) -> Self {
        TimeOffsets(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    fn check(&self, blocks: &BlockSpectra) -> Result<()> {
        if self.0.len() != blocks.len() {
            return Err(LtsError::DimensionMismatch {
                expected: blocks.len(),
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

/// Joint distribution of block level indices, Σ|c|² over each product of
/// eigenspaces. Indexed row-major with block 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelWeights {
    shape: Vec<usize>,
    weights: Vec<f64>,
}

impl LevelWeights {
    pub fn new(shape: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if weights.len() != n {
            return Err(LtsError::DimensionMismatch {
                expected: n,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(LtsError::param("weights", "weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(LtsError::NotNormalizedDistribution { total });
        }
        Ok(LevelWeights { shape, weights })
    }

    /// Equal weight on every level combination.
    pub fn uniform(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        LevelWeights {
            shape,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Level weights of `psi` in the product eigenbasis of the blocks of
/// `propagator`.
pub fn expand_in_eigenbasis(
    psi: &StateVector,
    propagator: &BlockPropagator,
) -> Result<LevelWeights> {
    let dims = psi.dims().to_vec();
    let blocks = propagator.partition().blocks();
    let spectra = propagator.spectra();
    let mut amps = psi.amplitudes().clone();
    for (block, spec) in blocks.iter().zip(spectra) {
        amps = apply_local(&amps, &dims, &spec.eigenvectors().adjoint(), block)?;
    }
    let shape: Vec<usize> = spectra.iter().map(|s| s.eigenvalues().len()).collect();
    let full = Layout::new(&dims);
    let levels = Layout::new(&shape);
    let mut weights = vec![0.0; levels.total()];
    for (index, a) in amps.iter().enumerate() {
        let digits = full.digits(index);
        let level_digits: Vec<usize> = blocks
            .iter()
            .zip(spectra)
            .map(|(block, spec)| {
                let column = block.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
                spec.level_of()[column]
            })
            .collect();
        weights[levels.index(&level_digits)] += a.norm_sqr();
    }
    Ok(LevelWeights { shape, weights })
}

/// S = Σ w_{ij…} e^{−i(E_{1i}δt_1 + E_{2j}δt_2 + …)}.
pub fn overlap_s(
    weights: &LevelWeights,
    blocks: &BlockSpectra,
    offsets: &TimeOffsets,
) -> Result<C64> {
    offsets.check(blocks)?;
    if weights.shape != blocks.shape() {
        return Err(LtsError::param(
            "weights",
            "level shape does not match the block spectra",
        ));
    }
    let layout = Layout::new(&weights.shape);
    Ok(weights
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(flat, &w)| C64::from_polar(w, -blocks.phase_sum(flat, &layout, offsets)))
        .sum())
}

/// [`overlap_s`] for a state and the blocks of a propagator.
pub fn overlap_s_state(
    psi: &StateVector,
    propagator: &BlockPropagator,
    offsets: &TimeOffsets,
) -> Result<C64> {
    let weights = expand_in_eigenbasis(psi, propagator)?;
    let blocks = BlockSpectra::from_spectra(propagator.spectra())?;
    overlap_s(&weights, &blocks, offsets)
}

/// √(2(1 − cos r))/r = 2|sin(r/2)|/r, the overlap for a uniform phase
/// density on [0, r].
pub fn overlap_uniform_density(r: f64) -> f64 {
    let r = r.abs();
    if r < 1e-4 {
        return 1.0 - r * r / 24.0;
    }
    2.0 * (0.5 * r).sin().abs() / r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// ∫_0^r p(x) e^{−ix} dx for `p` tabulated on a uniform grid including both
/// endpoints.
pub fn overlap_density(p: &[f64], r: f64, rule: DensityRule) -> Result<C64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LtsError::param("r", format!("must be positive, got {r}")));
    }
    if p.len() < 2 {
        return Err(LtsError::param("p", "at least two samples required"));
    }
    if p.iter().any(|v| !(*v >= 0.0)) {
        return Err(LtsError::param("p", "density must be nonnegative"));
    }
    let h = r / (p.len() - 1) as f64;
    let phased: Vec<C64> = p
        .iter()
        .enumerate()
        .map(|(k, &v)| C64::from_polar(v, -(k as f64) * h))
        .collect();
    let integrate = |s: &[f64], z: &[C64]| -> Result<(f64, C64)> {
        match rule {
            DensityRule::Trapezoid => Ok((trapezoid(s, r), trapezoid(z, r))),
            DensityRule::Simpson => simpson(s, r).zip(simpson(z, r)).ok_or_else(|| {
                LtsError::param("p", "Simpson's rule needs an odd number of samples")
            }),
        }
    };
    let (mass, value) = integrate(p, &phased)?;
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(LtsError::NotNormalizedDistribution { total: mass });
    }
    Ok(value)
}

/// Samples `f` at `n` equally spaced points of [0, r].
pub fn tabulate(f: impl Fn(f64) -> f64, r: f64, n: usize) -> Vec<f64> {
    let h = r / (n.max(2) - 1) as f64;
    (0..n.max(2)).map(|k| f(k as f64 * h)).collect()
}

/// I = (1/d) Σ_{i,j,…} g_{1i} g_{2j} ⋯ e^{−i(E_{1i}δt_1 + E_{2j}δt_2 + …)}.
pub fn individuality_i(blocks: &BlockSpectra, offsets: &TimeOffsets) -> Result<C64> {
    offsets.check(blocks)?;
    let shape = blocks.shape();
    let layout = Layout::new(&shape);
    let d = blocks.dim() as f64;
    let mut acc = C64::new(0.0, 0.0);
    for flat in 0..layout.total() {
        let g: usize = layout
            .digits(flat)
            .iter()
            .zip(&blocks.blocks)
            .map(|(&i, b)| b.degeneracies[i])
            .product();
        acc += C64::from_polar(g as f64, -blocks.phase_sum(flat, &layout, offsets));
    }
    Ok(acc / d)
}

/// h / (4 Σ_i (⟨H_i⟩ − E_ig)) with h = 2π.
pub fn orthogonal_time_bound(excess: &[f64]) -> Result<f64> {
    if excess.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(LtsError::param(
            "excess",
            "excess energies must be finite and nonnegative",
        ));
    }
    let total: f64 = excess.iter().sum();
    if total <= 0.0 {
        return Err(LtsError::NoFiniteBound("all excess energies vanish".into()));
    }
    Ok(FRAC_PI_2 / total)
}

/// max{h/(4(⟨H⟩ − E_g)), h/(4ΔH)} with h = 2π; a vanishing argument makes
/// its quotient infinite.
pub fn margolus_bound(excess: f64, std_dev: f64) -> Result<f64> {
    if !(excess >= 0.0) || !(std_dev >= 0.0) {
        return Err(LtsError::param("excess", "arguments must be nonnegative"));
    }
    if excess == 0.0 && std_dev == 0.0 {
        return Err(LtsError::NoFiniteBound(
            "both excess energy and spread vanish".into(),
        ));
    }
    let q = |x: f64| {
        if x > 0.0 {
            FRAC_PI_2 / x
        } else {
            f64::INFINITY
        }
    };
    Ok(q(excess).max(q(std_dev)))
}

/// Value with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// |value − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

/// Running power sums of x = |c_0|².
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    sums: [f64; 4],
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let mut p = 1.0;
        for s in &mut self.sums {
            p *= x;
            *s += p;
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.n += other.n;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Raw moment E[x^k] for k = 1..=4.
    fn raw(&self, k: usize) -> f64 {
        self.sums[k - 1] / self.n as f64
    }

    pub fn report(&self, dim: usize) -> MomentReport {
        let n = self.n as f64;
        let m: Vec<f64> = (1..=4).map(|k| self.raw(k)).collect();
        let var = (m[1] - m[0] * m[0]).max(0.0);
        let mean = Estimate {
            value: m[0],
            std_error: (var / n).sqrt(),
        };
        let quartic = Estimate {
            value: m[1],
            std_error: ((m[3] - m[1] * m[1]).max(0.0) / n).sqrt(),
        };
        let mu = m[0];
        let mu4 = m[3] - 4.0 * mu * m[2] + 6.0 * mu * mu * m[1] - 3.0 * mu.powi(4);
        let s = var.sqrt();
        let se_var = ((mu4 - var * var).max(0.0) / n).sqrt();
        let std_dev = Estimate {
            value: s,
            std_error: se_var / (2.0 * s),
        };
        let nd = dim as f64;
        MomentReport {
            dim,
            samples: self.n,
            mean,
            quartic,
            std_dev,
            target_mean: 1.0 / nd,
            target_quartic: 2.0 / (nd * (nd + 1.0)),
            target_std_dev: ((nd - 1.0) / (nd * nd * (nd + 1.0))).sqrt(),
        }
    }
}

/// Empirical moments of |c_0|² for uniformly distributed unit vectors in C^N
/// alongside their exact values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub dim: usize,
    pub samples: u64,
    pub mean: Estimate,
    pub quartic: Estimate,
    pub std_dev: Estimate,
    pub target_mean: f64,
    pub target_quartic: f64,
    pub target_std_dev: f64,
}

impl MomentReport {
    /// Largest deviation from the exact values, in standard errors.
    pub fn max_z_score(&self) -> f64 {
        self.mean
            .z_score(self.target_mean)
            .max(self.quartic.z_score(self.target_quartic))
            .max(self.std_dev.z_score(self.target_std_dev))
    }
}

pub const MIN_MOMENT_SAMPLES: usize = 10_000;

/// Draws `n_samples` uniformly distributed unit vectors of C^N.
pub fn haar_shell_accumulate<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_samples: usize,
) -> MomentAccumulator {
    let mut acc = MomentAccumulator::default();
    for _ in 0..n_samples {
        let psi = StateVector::random(rng, vec![dim]);
        acc.push(psi.amplitudes()[0].norm_sqr());
    }
    acc
}

pub fn haar_shell_moments<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_samples: usize,
) -> Result<MomentReport> {
    if dim < 2 {
        return Err(LtsError::param(
            "dim",
            format!("at least 2 required, got {dim}"),
        ));
    }
    if n_samples < MIN_MOMENT_SAMPLES {
        return Err(LtsError::param(
            "n_samples",
            format!("at least {MIN_MOMENT_SAMPLES} required, got {n_samples}"),
        ));
    }
    Ok(haar_shell_accumulate(rng, dim, n_samples).report(dim))
}

/// Five-qubit and two-qubit blocks with total-spin spectra scaled by ω1, ω2.
pub fn appendix_a_spectra(omega1: f64, omega2: f64) -> BlockSpectra {
    let first = BlockLevels::new(
        [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]
            .iter()
            .map(|m| m * omega1)
            .collect(),
        vec![1, 5, 10, 10, 5, 1],
    )
    .expect("valid levels");
    let second = BlockLevels::new(
        [-1.0, 0.0, 1.0].iter().map(|m| m * omega2).collect(),
        vec![1, 2, 1],
    )
    .expect("valid levels");
    BlockSpectra {
        blocks: vec![first, second],
    }
}

/// Offsets at the orthogonality bounds, π/(5ω1) and π/(2ω2).
pub fn appendix_a_offsets(omega1: f64, omega2: f64) -> TimeOffsets {
    TimeOffsets(vec![PI / (5.0 * omega1), PI / (2.0 * omega2)])
}

/// |S|² for equal weights on all 18 level pairs.
pub fn appendix_a_scenario_with(omega1: f64, omega2: f64) -> f64 {
    let blocks = appendix_a_spectra(omega1, omega2);
    let weights = LevelWeights::uniform(blocks.shape());
    overlap_s(&weights, &blocks, &appendix_a_offsets(omega1, omega2))
        .expect("shapes agree")
        .norm_sqr()
}

pub fn appendix_a_scenario() -> f64 {
    appendix_a_scenario_with(1.0, 1.0)
}
