use lts_core::composite::{
    compare_factorizations, detect_partition, Choice, DEFAULT_EPSILON, DEFAULT_PROBES,
};
use lts_core::quantum::{kron, reduced_state, spectral_decompose};
use lts_core::reduced::{
    evolve_pairs, initial_reduced, merge, merged_reduced, restructured_reduced, PairSchmidt,
    RestructureUnitaries,
};
use lts_core::reversibility::{
    coarse_grained_distribution, detailed_balance, plain_irreversibility_demo,
    redistribution_table, relative_entropy, Stage,
};
use lts_core::{FourBodyAmplitudes, Partition, StateVector, Trajectory, TransitionTable};
use rand_chacha::ChaCha20Rng;

use super::{composite, invalid, partition_label, random_hermitian, stages};
use crate::config::Params;
use crate::error::CliResult;
use crate::output::Row;

/// Largest number of coarse-grained time tuples per stage.
const MAX_TUPLES: usize = 1024;

pub fn trajectory(p: &Params, rng: &mut ChaCha20Rng) -> CliResult<Vec<Row>> {
    let (h, psi) = composite(p, rng)?;
    let stages = stages(p, h.len())?;
    let mut rows = Vec::new();

    let eps = p.f64_or("epsilon", DEFAULT_EPSILON)?;
    let detected = detect_partition(&psi, &h, eps)?;
    rows.push(Row::new(
        "detected_blocks",
        partition_label(&detected),
        detected.len() as f64,
    ));

    let mut traj = Trajectory::new(psi.clone());
    for (part, windows) in &stages {
        traj = traj.apply_transition(&h, part, rng, windows)?;
    }
    for (k, step) in traj.steps().iter().enumerate() {
        let tag = format!("{}:{}", k + 1, partition_label(&step.partition));
        for (b, t) in step.times.times().iter().enumerate() {
            rows.push(Row::new("local_time", format!("{tag}:{b}"), *t));
        }
        rows.push(Row::new(
            "fidelity_to_initial",
            &tag,
            psi.fidelity(&step.state)?,
        ));
        rows.push(Row::new(
            "norm_deviation",
            &tag,
            (step.state.norm() - 1.0).abs(),
        ));
    }
    rows.push(Row::scalar("replay_error", traj.replay(&h)?));

    if p.has("compare") {
        let parts = p.partitions("compare")?;
        let [a, b] = parts.as_slice() else {
            return Err(invalid("compare", "expected exactly two partitions"));
        };
        let (a, b) = (
            Partition::new(a.clone(), h.len())?,
            Partition::new(b.clone(), h.len())?,
        );
        let probes = p.usize_or("probes", DEFAULT_PROBES)?;
        let d = compare_factorizations(&psi, &h, &a, &b, None, probes)?;
        rows.push(Row::new(
            "compare_fidelity",
            partition_label(&a),
            d.fidelity_a,
        ));
        rows.push(Row::new(
            "compare_fidelity",
            partition_label(&b),
            d.fidelity_b,
        ));
        rows.push(Row::scalar(
            "compare_winner",
            if d.winner == Choice::A { 0.0 } else { 1.0 },
        ));
        rows.push(Row::flag("compare_degenerate", d.degenerate));
        rows.push(Row::scalar("compare_horizon", d.horizon));
    }
    Ok(rows)
}

fn table_rows(rows: &mut Vec<Row>, prefix: &str, t: &TransitionTable) {
    let h = relative_entropy(t);
    rows.push(Row::scalar(format!("{prefix}_relative_entropy"), h.value));
    rows.push(Row::flag(format!("{prefix}_finite"), h.is_finite()));
    rows.push(Row::flag(
        format!("{prefix}_detailed_balance"),
        detailed_balance(t, 1e-12),
    ));
}

pub fn reversibility(p: &Params, rng: &mut ChaCha20Rng) -> CliResult<Vec<Row>> {
    let (h, psi) = composite(p, rng)?;
    let stages: Vec<Stage> = stages(p, h.len())?
        .into_iter()
        .map(|(partition, windows)| Stage { partition, windows })
        .collect();
    let trials = p.usize_or("trials", 100)?;
    let bins = p.usize_or("bins", 4)?;
    if bins == 0 {
        return Err(invalid("bins", "must be positive"));
    }
    for s in &stages {
        let tuples = (bins as f64).powi(s.windows.len() as i32);
        if tuples > MAX_TUPLES as f64 {
            return Err(invalid(
                "bins",
                format!(
                    "{bins}^{} time tuples exceed the limit {MAX_TUPLES}",
                    s.windows.len()
                ),
            ));
        }
    }
    let report = plain_irreversibility_demo(&psi, &h, &stages, rng, trials)?;
    let mut rows = vec![
        Row::scalar("fresh_mean", report.mean_fresh()),
        Row::scalar("fresh_max", report.max_fresh()),
        Row::scalar("control_min", report.min_control()),
        Row::scalar(
            "control_max_deviation",
            report
                .control
                .iter()
                .map(|c| (c - 1.0).abs())
                .fold(0.0, f64::max),
        ),
        Row::scalar(
            "fresh_below_control",
            report.fresh.iter().filter(|&&f| f < 1.0 - 1e-9).count() as f64,
        ),
        Row::scalar("trials", trials as f64),
    ];
    let first = &stages[0];
    let last = &stages[stages.len() - 1];
    let before = coarse_grained_distribution(&first.windows, bins)?;
    let after = coarse_grained_distribution(&last.windows, bins)?;
    table_rows(&mut rows, "coarse", &redistribution_table(&before, &after)?);
    if p.has("table") {
        let t = p.nested_f64("table")?;
        let n = t.len();
        if n == 0 || t.iter().any(|r| r.len() != n) {
            return Err(invalid("table", "expected a nonempty square matrix"));
        }
        let labels = (0..n).map(|i| format!("x{i}")).collect();
        let table = TransitionTable::from_weights(labels, t.concat())?;
        table_rows(&mut rows, "table", &table);
    }
    Ok(rows)
}

fn times(p: &Params, keys: &[&str], defaults: &[f64]) -> CliResult<Vec<f64>> {
    keys.iter()
        .zip(defaults)
        .map(|(k, d)| {
            let t = p.f64_or(k, *d)?;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(k, "must be nonnegative"));
            }
            Ok(t)
        })
        .collect()
}

pub fn reduced(p: &Params, rng: &mut ChaCha20Rng) -> CliResult<Vec<Row>> {
    let [t12, t34] = times(p, &["t12", "t34"], &[1.0, 1.0])?[..] else {
        unreachable!()
    };
    let stage_ii = times(p, &["t1", "t23", "t4"], &[0.5, 1.0, 0.5])?;

    let phi = StateVector::random(rng, vec![2, 2]);
    let chi = StateVector::random(rng, vec![2, 2]);
    let mut spectrum = |d: usize| spectral_decompose(&random_hermitian(rng, d, 1.0));
    let (h12, h34, h1, h23, h4) = (
        spectrum(4)?,
        spectrum(4)?,
        spectrum(2)?,
        spectrum(4)?,
        spectrum(2)?,
    );

    let c = FourBodyAmplitudes::product(&phi, &chi)?;
    let (u12, u34) = (h12.unitary(t12), h34.unitary(t34));
    let s12 = PairSchmidt::instantaneous(&phi, &u12)?;
    let s34 = PairSchmidt::instantaneous(&chi, &u34)?;
    let merged = merge(&c, &s12, &s34)?;
    let u =
        RestructureUnitaries::from_spectra(&h1, &h23, &h4, [stage_ii[0], stage_ii[1], stage_ii[2]]);

    let exact_i = evolve_pairs(&c, &u12, &u34)?;
    let amps_ii = kron(&kron(&u.u1, &u.u23), &u.u4) * exact_i.amplitudes();
    let exact_ii = StateVector::normalized(amps_ii, vec![2; 4])?;

    let mut rows = Vec::new();
    let (mut dev_i, mut dev_ii, mut sum_dev, mut min_w) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for which in 0..4 {
        let stages = [
            ("initial_weight", initial_reduced(&c, which)?),
            ("merged_weight", merged_reduced(&merged, &s12, &s34, which)?),
            (
                "restructured_weight",
                restructured_reduced(&merged, &s12, &s34, &u, which)?,
            ),
        ];
        for (name, red) in &stages {
            for (k, w) in red.weights.iter().enumerate() {
                rows.push(Row::new(*name, format!("{}:{k}", which + 1), *w));
                min_w = min_w.min(*w);
            }
            sum_dev = sum_dev.max((red.weights.iter().sum::<f64>() - 1.0).abs());
        }
        dev_i = dev_i.max(
            stages[1]
                .1
                .rho
                .max_deviation(reduced_state(&exact_i, &[which])?.matrix()),
        );
        dev_ii = dev_ii.max(
            stages[2]
                .1
                .rho
                .max_deviation(reduced_state(&exact_ii, &[which])?.matrix()),
        );
    }
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v
    };
    let before = sorted(merged_reduced(&merged, &s12, &s34, 0)?.rho.eigenvalues());
    let after = sorted(
        restructured_reduced(&merged, &s12, &s34, &u, 0)?
            .rho
            .eigenvalues(),
    );
    let shift = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    rows.push(Row::scalar("merged_oracle_deviation", dev_i));
    rows.push(Row::scalar("restructured_oracle_deviation", dev_ii));
    rows.push(Row::scalar("weight_sum_deviation", sum_dev));
    rows.push(Row::scalar("min_weight", min_w));
    rows.push(Row::scalar("subsystem1_spectrum_shift", shift));
    rows.push(Row::scalar("merge_weight", merged.weight()));
    Ok(rows)
}
