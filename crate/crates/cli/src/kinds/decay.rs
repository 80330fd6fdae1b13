use lts_core::decay::{decay_chain_closed_form, decay_chain_ode, standard_chain};
use lts_core::numerics::ode::OdeOptions;
use lts_core::{DecaySpecies, RationalClockRate};

use super::invalid;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::Row;

fn clock(p: &Params, key: &str) -> CliResult<RationalClockRate> {
    match p.opt_vec_f64(key)? {
        None => Ok(RationalClockRate::unit()),
        Some(v) => match v.as_slice() {
            [a, b, q] => Ok(RationalClockRate::canonical(*a, *b, *q)?),
            _ => Err(invalid(key, "expected [a, b, p]")),
        },
    }
}

fn max_relative(values: &[f64], reference: &[f64], floor: f64) -> f64 {
    values
        .iter()
        .zip(reference)
        .map(|(v, r)| (v - r).abs() / r.abs().max(floor))
        .fold(0.0, f64::max)
}

pub fn decay(p: &Params) -> CliResult<Vec<Row>> {
    let (la, lb) = (p.f64("lambda_a")?, p.f64("lambda_b")?);
    let n0 = p.f64_or("n0", 1.0)?;
    let t_max = p.f64("t_max")?;
    let points = p.usize_or("points", 101)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", "must be positive"));
    }
    if points < 2 {
        return Err(invalid("points", "at least 2 required"));
    }
    let mother = DecaySpecies::stable_or_decaying(la, clock(p, "clock_a")?, n0)?;
    let daughter = DecaySpecies::stable_or_decaying(lb, clock(p, "clock_b")?, 0.0)?;
    let grid: Vec<f64> = (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect();

    let ode = decay_chain_ode(&mother, &daughter, &grid, OdeOptions::default())?;
    let closed: Vec<f64> = grid
        .iter()
        .map(|&t| decay_chain_closed_form(&mother, &daughter, t))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(4 * points + 4);
    for (k, &t) in grid.iter().enumerate() {
        rows.push(Row::new("n_a", t, ode.mother[k]));
        rows.push(Row::new("n_b", t, ode.daughter[k]));
        rows.push(Row::new("n_b_closed_form", t, closed[k]));
        rows.push(Row::new("survival_a", t, mother.survival(t)?));
    }
    let floor = 1e-12 * n0.max(f64::MIN_POSITIVE);
    rows.push(Row::scalar(
        "closed_form_max_relative",
        max_relative(&closed, &ode.daughter, floor),
    ));
    if mother.clock().is_unit() && daughter.clock().is_unit() {
        let std_b: Vec<f64> = grid
            .iter()
            .map(|&t| standard_chain(la, lb, n0, t))
            .collect();
        let std_a: Vec<f64> = grid.iter().map(|&t| n0 * (-la * t).exp()).collect();
        rows.push(Row::scalar(
            "standard_max_relative",
            max_relative(&ode.daughter, &std_b, floor),
        ));
        rows.push(Row::scalar(
            "standard_mother_max_relative",
            max_relative(&ode.mother, &std_a, floor),
        ));
    }
    if let Some(e) = mother.power_law_exponent() {
        rows.push(Row::scalar("power_law_exponent_a", e));
    }
    Ok(rows)
}
