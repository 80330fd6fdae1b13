use lts_core::metrics::{
    appendix_a_offsets, appendix_a_spectra, haar_shell_accumulate, individuality_i,
    overlap_density, overlap_s, overlap_uniform_density, tabulate, BlockLevels, DensityRule,
    LevelWeights, MomentAccumulator, MIN_MOMENT_SAMPLES,
};
use lts_core::{BlockSpectra, TimeOffsets, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::invalid;
use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::Row;

fn complex_rows(rows: &mut Vec<Row>, prefix: &str, z: C64) {
    rows.push(Row::scalar(format!("{prefix}_re"), z.re));
    rows.push(Row::scalar(format!("{prefix}_im"), z.im));
    rows.push(Row::scalar(format!("{prefix}_abs"), z.norm()));
}

fn block_spectra(p: &Params) -> CliResult<BlockSpectra> {
    let energies = p.nested_f64("energies")?;
    let degeneracies = if p.has("degeneracies") {
        let g = p.nested_usize("degeneracies")?;
        if g.len() != energies.len() {
            return Err(invalid(
                "degeneracies",
                format!("{} blocks but `energies` has {}", g.len(), energies.len()),
            ));
        }
        g
    } else {
        energies.iter().map(|e| vec![1; e.len()]).collect()
    };
    let blocks = energies
        .into_iter()
        .zip(degeneracies)
        .map(|(e, g)| BlockLevels::new(e, g))
        .collect::<Result<_, _>>()?;
    Ok(BlockSpectra::new(blocks)?)
}

fn offsets(p: &Params, blocks: &BlockSpectra) -> CliResult<TimeOffsets> {
    let dt = p.vec_f64("offsets")?;
    if dt.len() != blocks.len() {
        return Err(invalid(
            "offsets",
            format!("{} offsets for {} blocks", dt.len(), blocks.len()),
        ));
    }
    Ok(TimeOffsets::new(dt)?)
}

fn rule_for(n: usize) -> DensityRule {
    if n >= 3 && n % 2 == 1 {
        DensityRule::Simpson
    } else {
        DensityRule::Trapezoid
    }
}

pub fn overlap(p: &Params) -> CliResult<Vec<Row>> {
    let mut rows = Vec::new();
    match (p.has("r"), p.has("energies")) {
        (true, true) => {
            return Err(CliError::Validation(
                "give either `r` or `energies`, not both".into(),
            ))
        }
        (false, false) => {
            return Err(invalid(
                "r",
                "required unless `energies` and `offsets` are given",
            ))
        }
        (true, false) => {
            let r = p.f64("r")?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("r", "must be positive"));
            }
            if let Some(density) = p.opt_vec_f64("density")? {
                let z = overlap_density(&density, r, rule_for(density.len()))?;
                complex_rows(&mut rows, "overlap", z);
                rows.push(Row::scalar("overlap_abs_sq", z.norm_sqr()));
            } else {
                let points = p.usize_or("points", 2001)?;
                if points < 3 || points % 2 == 0 {
                    return Err(invalid("points", "must be odd and at least 3"));
                }
                let closed = overlap_uniform_density(r);
                let tab =
                    overlap_density(&tabulate(|_| 1.0 / r, r, points), r, DensityRule::Simpson)?
                        .norm();
                rows.push(Row::scalar("overlap_uniform", closed));
                rows.push(Row::scalar("overlap_tabulated", tab));
                rows.push(Row::scalar("tabulated_deviation", (tab - closed).abs()));
            }
        }
        (false, true) => {
            let blocks = block_spectra(p)?;
            let dt = offsets(p, &blocks)?;
            let weights = match p.opt_vec_f64("weights")? {
                Some(w) => LevelWeights::new(blocks.shape(), w)?,
                None => LevelWeights::uniform(blocks.shape()),
            };
            let z = overlap_s(&weights, &blocks, &dt)?;
            complex_rows(&mut rows, "overlap", z);
            rows.push(Row::scalar("overlap_abs_sq", z.norm_sqr()));
        }
    }
    Ok(rows)
}

pub fn individuality(p: &Params) -> CliResult<Vec<Row>> {
    let blocks = block_spectra(p)?;
    let dt = offsets(p, &blocks)?;
    let mut rows = Vec::new();
    complex_rows(&mut rows, "individuality", individuality_i(&blocks, &dt)?);
    Ok(rows)
}

/// Samples are split into fixed-size chunks, each on its own ChaCha stream,
/// so the totals do not depend on the thread count.
pub fn moments(p: &Params, rng: &mut ChaCha20Rng) -> CliResult<Vec<Row>> {
    let dim = p.usize("dim")?;
    let samples = p.usize("samples")?;
    let chunk = p.usize_or("chunk", 10_000)?;
    if dim < 2 {
        return Err(invalid("dim", "at least 2 required"));
    }
    if samples < MIN_MOMENT_SAMPLES {
        return Err(invalid(
            "samples",
            format!("at least {MIN_MOMENT_SAMPLES} required"),
        ));
    }
    if chunk == 0 {
        return Err(invalid("chunk", "must be positive"));
    }
    let base: u64 = rng.random();
    let n_chunks = samples.div_ceil(chunk);
    let parts: Vec<MomentAccumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut r = ChaCha20Rng::seed_from_u64(base);
            r.set_stream(k as u64);
            let size = chunk.min(samples - k * chunk);
            haar_shell_accumulate(&mut r, dim, size)
        })
        .collect();
    let mut acc = MomentAccumulator::default();
    parts.iter().for_each(|a| acc.merge(a));
    let rep = acc.report(dim);
    let mut rows = vec![Row::scalar("samples", rep.samples as f64)];
    for (name, est, target) in [
        ("mean", rep.mean, rep.target_mean),
        ("quartic", rep.quartic, rep.target_quartic),
        ("std_dev", rep.std_dev, rep.target_std_dev),
    ] {
        rows.push(Row::scalar(name, est.value));
        rows.push(Row::scalar(format!("{name}_target"), target));
        rows.push(Row::scalar(format!("{name}_std_error"), est.std_error));
        rows.push(Row::scalar(format!("{name}_z"), est.z_score(target)));
    }
    rows.push(Row::scalar("max_z", rep.max_z_score()));
    Ok(rows)
}

pub fn appendix_a(p: &Params) -> CliResult<Vec<Row>> {
    let (w1, w2) = (p.f64_or("omega1", 1.0)?, p.f64_or("omega2", 1.0)?);
    for (key, w) in [("omega1", w1), ("omega2", w2)] {
        if !(w > 0.0 && w.is_finite()) {
            return Err(invalid(key, "must be positive"));
        }
    }
    let blocks = appendix_a_spectra(w1, w2);
    let s = overlap_s(
        &LevelWeights::uniform(blocks.shape()),
        &blocks,
        &appendix_a_offsets(w1, w2),
    )?;
    let mut rows = vec![Row::scalar("abs_sq", s.norm_sqr())];
    complex_rows(&mut rows, "overlap", s);
    Ok(rows)
}
