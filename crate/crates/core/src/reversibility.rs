//! Transition tables, relative entropy, detailed balance, the product model
//! of local-time redistribution and the plain-irreversibility experiment.

use rand::Rng;

use crate::composite::{BlockPropagator, CompositeHamiltonian, LocalTimeAssignment, Partition};
use crate::lts_map::TimeWindow;
use crate::numerics::quadrature::GaussLegendre;
use crate::quantum::StateVector;
use crate::{LtsError, Result};

/// Tolerance on the total probability of tables and distributions.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Default number of coarse-graining bins per block window.
pub const DEFAULT_BINS: usize = 16;

/// Joint probabilities P(x → x′) over a finite label set.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    labels: Vec<String>,
    /// Row-major: entry (i, j) is P(labels[i] → labels[j]).
    probs: Vec<f64>,
}

impl TransitionTable {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(LtsError::InvalidTable("empty label set".into()));
        }
        if probs.len() != n * n {
            return Err(LtsError::InvalidTable(format!(
                "{} entries for {n} labels",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(LtsError::InvalidTable(format!(
                "entry {bad} is not a probability"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(LtsError::InvalidTable(format!("entries sum to {total}")));
        }
        Ok(TransitionTable { labels, probs })
    }

    /// Table from nonnegative weights, rescaled to unit total.
    pub fn from_weights(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(LtsError::InvalidTable(format!("weights sum to {total}")));
        }
        Self::new(labels, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// P(labels[i] → labels[j]).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.labels.len() + j]
    }
}

/// Result of [`relative_entropy`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEntropy {
    /// Σ P(x→x′) ln(P(x→x′)/P(x′→x)) in nats; +∞ when `divergent` is
    /// nonempty.
    pub value: f64,
    /// Pairs (i, j) with P(i→j) > 0 but P(j→i) = 0.
    pub divergent: Vec<(usize, usize)>,
}

impl RelativeEntropy {
    pub fn is_finite(&self) -> bool {
        self.divergent.is_empty()
    }
}

pub fn relative_entropy(table: &TransitionTable) -> RelativeEntropy {
    let n = table.len();
    let mut value = 0.0;
    let mut divergent = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (fwd, rev) = (table.get(i, j), table.get(j, i));
            if fwd == 0.0 {
                continue;
            }
            if rev == 0.0 {
                divergent.push((i, j));
            } else {
                value += fwd * (fwd / rev).ln();
            }
        }
    }
    if !divergent.is_empty() {
        value = f64::INFINITY;
    }
    RelativeEntropy { value, divergent }
}

/// True iff |P(x→x′) − P(x′→x)| ≤ tol for every pair.
pub fn detailed_balance(table: &TransitionTable, tol: f64) -> bool {
    let n = table.len();
    (0..n).all(|i| (i + 1..n).all(|j| (table.get(i, j) - table.get(j, i)).abs() <= tol))
}

/// Normalised probabilities over a finite label set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || labels.len() != probs.len() {
            return Err(LtsError::param(
                "probs",
                "one probability per label required",
            ));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(LtsError::param(
                "probs",
                "probabilities must be finite and nonnegative",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(LtsError::NotNormalizedDistribution { total });
        }
        Ok(DiscreteDistribution { labels, probs })
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Joint table of the product model on the union of both time-tuple sets.
///
/// Labels are prefixed `before:` and `after:`. The forward transition
/// x → x′ and its inverse x′ → x each carry ½·p_before(x)·p_after(x′); all
/// other entries vanish.
pub fn redistribution_table(
    before: &DiscreteDistribution,
    after: &DiscreteDistribution,
) -> Result<TransitionTable> {
    let (nb, na) = (before.len(), after.len());
    let n = nb + na;
    let labels: Vec<String> = before
        .labels
        .iter()
        .map(|l| format!("before:{l}"))
        .chain(after.labels.iter().map(|l| format!("after:{l}")))
        .collect();
    let mut probs = vec![0.0; n * n];
    for (i, pb) in before.probs.iter().enumerate() {
        for (j, pa) in after.probs.iter().enumerate() {
            let w = 0.5 * pb * pa;
            probs[i * n + nb + j] = w;
            probs[(nb + j) * n + i] = w;
        }
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    TransitionTable::new(labels, probs)
}

/// Probability mass of each of `bins` equal sub-intervals of the window.
pub fn window_bin_masses(window: &TimeWindow, bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(LtsError::param("bins", "at least one bin required"));
    }
    let rule = GaussLegendre::new(16);
    let width = 2.0 * window.half_width() / bins as f64;
    let masses: Vec<f64> = (0..bins)
        .map(|k| {
            let lo = window.lower() + k as f64 * width;
            rule.integrate(lo, lo + width, |t| window.density(t))
        })
        .collect();
    let total: f64 = masses.iter().sum();
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Product distribution over binned time tuples, one window per block.
/// Labels list the bin index of each block, e.g. `3,7`.
pub fn coarse_grained_distribution(
    windows: &[TimeWindow],
    bins: usize,
) -> Result<DiscreteDistribution> {
    if windows.is_empty() {
        return Err(LtsError::param("windows", "at least one window required"));
    }
    let per_block: Vec<Vec<f64>> = windows
        .iter()
        .map(|w| window_bin_masses(w, bins))
        .collect::<Result<_>>()?;
    let mut labels = vec![String::new()];
    let mut probs = vec![1.0];
    for masses in &per_block {
        let mut next_labels = Vec::with_capacity(labels.len() * masses.len());
        let mut next_probs = Vec::with_capacity(labels.len() * masses.len());
        for (l, p) in labels.iter().zip(&probs) {
            for (k, m) in masses.iter().enumerate() {
                next_labels.push(if l.is_empty() {
                    k.to_string()
                } else {
                    format!("{l},{k}")
                });
                next_probs.push(p * m);
            }
        }
        labels = next_labels;
        probs = next_probs;
    }
    let total: f64 = probs.iter().sum();
    DiscreteDistribution::new(labels, probs.into_iter().map(|p| p / total).collect())
}

/// One stage of a restructuring sequence: a partition and a window per block.
#[derive(Debug, Clone)]
pub struct Stage {
    pub partition: Partition,
    pub windows: Vec<TimeWindow>,
}

/// Return fidelities of the plain-irreversibility experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct IrreversibilityReport {
    /// |⟨Ψ(0)|Ψ_returned⟩| with freshly drawn inverse times, per trial.
    pub fresh: Vec<f64>,
    /// The same with the inverse reusing the forward times.
    pub control: Vec<f64>,
}

impl IrreversibilityReport {
    pub fn mean_fresh(&self) -> f64 {
        self.fresh.iter().sum::<f64>() / self.fresh.len() as f64
    }

    pub fn max_fresh(&self) -> f64 {
        self.fresh.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_control(&self) -> f64 {
        self.control.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs `stages` forward with sampled local times, then undoes them in
/// reverse order with e^{+iH_b t′_b} for fresh times t′ (and, as a control,
/// for the forward times).
pub fn plain_irreversibility_demo<R: Rng + ?Sized>(
    psi0: &StateVector,
    h: &CompositeHamiltonian,
    stages: &[Stage],
    rng: &mut R,
    n_trials: usize,
) -> Result<IrreversibilityReport> {
    if stages.is_empty() {
        return Err(LtsError::param("stages", "at least one stage required"));
    }
    if n_trials == 0 {
        return Err(LtsError::param("n_trials", "at least one trial required"));
    }
    let propagators: Vec<BlockPropagator> = stages
        .iter()
        .map(|s| BlockPropagator::new(h, &s.partition))
        .collect::<Result<_>>()?;
    for s in stages {
        if s.windows.len() != s.partition.len() {
            return Err(LtsError::param(
                "windows",
                format!(
                    "{} windows for {} blocks",
                    s.windows.len(),
                    s.partition.len()
                ),
            ));
        }
    }
    let backwards = |times: &[f64]| -> Vec<f64> { times.iter().map(|t| -t).collect() };

    let mut fresh = Vec::with_capacity(n_trials);
    let mut control = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let mut psi = psi0.clone();
        let mut forward_times = Vec::with_capacity(stages.len());
        for (stage, prop) in stages.iter().zip(&propagators) {
            let times = LocalTimeAssignment::sample(rng, &stage.windows).times();
            psi = prop.evolve(&psi, &times)?;
            forward_times.push(times);
        }
        let mut back = psi.clone();
        let mut same = psi;
        for ((stage, prop), times) in stages.iter().zip(&propagators).zip(&forward_times).rev() {
            let redrawn = LocalTimeAssignment::sample(rng, &stage.windows).times();
            back = prop.evolve(&back, &backwards(&redrawn))?;
            same = prop.evolve(&same, &backwards(times))?;
        }
        fresh.push(psi0.fidelity(&back)?);
        control.push(psi0.fidelity(&same)?);
    }
    Ok(IrreversibilityReport { fresh, control })
}
