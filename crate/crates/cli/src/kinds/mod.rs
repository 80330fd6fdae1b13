//! One runner per scenario kind; each validates its parameters and returns
//! the rows of its CSV table.

mod decay;
mod dynamics;
mod metrics;
mod spectral;

use lts_core::composite::CompositeHamiltonian;
use lts_core::{CMatrix, Partition, StateVector, Subsystem, TimeWindow, C64};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::catalog::Kind;
use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::Row;

pub fn run(kind: Kind, p: &Params, rng: &mut ChaCha20Rng) -> CliResult<Vec<Row>> {
    if let Some(key) = p.keys().find(|k| !kind.accepts(k)) {
        return Err(CliError::Validation(format!(
            "parameter `{key}` is not used by kind `{}`",
            kind.name()
        )));
    }
    match kind {
        Kind::SigmaMap => spectral::sigma_map(p),
        Kind::Bounds => spectral::bounds(p),
        Kind::Overlap => metrics::overlap(p),
        Kind::Individuality => metrics::individuality(p),
        Kind::Moments => metrics::moments(p, rng),
        Kind::AppendixA => metrics::appendix_a(p),
        Kind::Trajectory => dynamics::trajectory(p, rng),
        Kind::Reversibility => dynamics::reversibility(p, rng),
        Kind::ReducedDynamics => dynamics::reduced(p, rng),
        Kind::Decay => decay::decay(p),
    }
}

fn invalid(key: &str, what: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("parameter `{key}`: {what}"))
}

/// (A + A†)/2 with entries uniform in the unit square, times `scale`.
pub(crate) fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5 * scale, 0.0)
}

/// Composite Hamiltonian and initial state from `dims`, `self_terms`,
/// `self_scale`, `couplings` and `state`.
pub(crate) fn composite(
    p: &Params,
    rng: &mut ChaCha20Rng,
) -> CliResult<(CompositeHamiltonian, StateVector)> {
    let dims = p.vec_usize("dims")?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(invalid(
            "dims",
            "need at least one subsystem, each of dimension >= 1",
        ));
    }
    let subsystems = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| Subsystem::new(format!("s{i}"), d))
        .collect();
    let mut h = CompositeHamiltonian::new(subsystems)?;
    let selfs = if p.has("self_terms") {
        let m = p.matrices("self_terms")?;
        if m.len() != dims.len() {
            return Err(invalid(
                "self_terms",
                format!("{} matrices for {} subsystems", m.len(), dims.len()),
            ));
        }
        m
    } else {
        let scale = p.f64_or("self_scale", 1.0)?;
        dims.iter()
            .map(|&d| random_hermitian(rng, d, scale))
            .collect()
    };
    for (i, op) in selfs.into_iter().enumerate() {
        h = h.with_self(i, op)?;
    }
    if p.has("couplings") {
        for row in p.nested_f64("couplings")? {
            let index = |x: f64| {
                (x >= 0.0 && x.fract() == 0.0 && (x as usize) < dims.len()).then_some(x as usize)
            };
            let (i, j) = match row.as_slice() {
                [a, b, _] => (index(*a), index(*b)),
                _ => (None, None),
            };
            let (Some(i), Some(j)) = (i, j) else {
                return Err(invalid(
                    "couplings",
                    "entries are [i, j, strength] with valid subsystem indices",
                ));
            };
            let op = random_hermitian(rng, dims[i] * dims[j], row[2]);
            h = h.with_pair(i, j, op)?;
        }
    }
    let psi = if p.has("state") {
        StateVector::normalized(p.vector("state")?, dims.clone())?
    } else {
        StateVector::random(rng, dims)
    };
    Ok((h, psi))
}

/// `stages` as partitions, all blocks sharing the window (t0, half_width).
pub(crate) fn stages(p: &Params, n: usize) -> CliResult<Vec<(Partition, Vec<TimeWindow>)>> {
    let window = TimeWindow::new(p.f64("t0")?, p.f64("half_width")?)?;
    let list = p.partitions("stages")?;
    if list.is_empty() {
        return Err(invalid("stages", "at least one stage required"));
    }
    list.into_iter()
        .map(|blocks| {
            let part = Partition::new(blocks, n)?;
            let windows = vec![window; part.len()];
            Ok((part, windows))
        })
        .collect()
}

pub(crate) fn partition_label(p: &Partition) -> String {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}
