use lts_core::lts_map::{sigma_map as average, sigma_map_mixed, tau_min, DEFAULT_NODES};
use lts_core::metrics::orthogonal_time_bound;
use lts_core::quantum::spectral_decompose;
use lts_core::{DensityMatrix, LtsError, SpectralDecomposition, StateVector, TimeWindow, C64};

use super::invalid;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::Row;

pub fn sigma_map(p: &Params) -> CliResult<Vec<Row>> {
    let h = spectral_decompose(&p.matrix("hamiltonian")?)?;
    let amps = p.vector("state")?;
    if amps.len() != h.dim() {
        return Err(invalid(
            "state",
            format!(
                "length {} but the Hamiltonian has dimension {}",
                amps.len(),
                h.dim()
            ),
        ));
    }
    let psi = StateVector::normalized(amps, vec![h.dim()])?;
    let (t0, hw) = (p.f64("t0")?, p.f64("half_width")?);
    let mut window = match p.opt_f64("sigma")? {
        Some(s) => TimeWindow::with_sigma(t0, hw, s)?,
        None => TimeWindow::new(t0, hw)?,
    };
    let nodes = p.usize_or("nodes", DEFAULT_NODES)?;
    let tau = match tau_min(&h, &psi) {
        Ok(t) => t,
        Err(LtsError::NoFiniteBound(_)) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    if p.bool_or("enforce_tau", true)? {
        window = window.checked_against(tau)?;
    }
    let rho = average(&psi, &h, &window, nodes)?;
    let pure = DensityMatrix::from_pure(&psi);

    let mut rows = vec![
        Row::scalar("tau_min", tau),
        Row::scalar("half_width", hw),
        Row::scalar("sigma", window.sigma()),
    ];
    let n = h.dim();
    for i in 0..n {
        for j in 0..n {
            let z = rho.matrix()[(i, j)];
            rows.push(Row::new("rho_re", format!("{i},{j}"), z.re));
            rows.push(Row::new("rho_im", format!("{i},{j}"), z.im));
        }
    }
    let energy = |r: &DensityMatrix| r.expectation(&h.operator()).map(|z| z.re);
    rows.push(Row::scalar("trace_deviation", (rho.trace() - 1.0).abs()));
    rows.push(Row::scalar(
        "energy_deviation",
        (energy(&rho)? - energy(&pure)?).abs(),
    ));
    let mut proj = 0.0f64;
    for pk in h.projectors() {
        proj = proj.max((rho.expectation(pk)? - pure.expectation(pk)?).norm());
    }
    rows.push(Row::scalar("projector_deviation", proj));
    rows.push(Row::scalar("purity_before", pure.purity()));
    rows.push(Row::scalar("purity_after", rho.purity()));
    if let Some(beta) = p.opt_f64("beta")? {
        let thermal = thermal_state(&h, beta)?;
        let mapped = sigma_map_mixed(&thermal, &h, &window, nodes)?;
        rows.push(Row::scalar(
            "thermal_deviation",
            mapped.max_deviation(thermal.matrix()),
        ));
    }
    Ok(rows)
}

fn thermal_state(h: &SpectralDecomposition, beta: f64) -> CliResult<DensityMatrix> {
    let e0 = h.ground_energy();
    let unnormalized = h.function(|e| C64::new((-beta * (e - e0)).exp(), 0.0));
    let z = unnormalized.trace().re;
    Ok(DensityMatrix::new(
        unnormalized / C64::new(z, 0.0),
        vec![h.dim()],
    )?)
}

pub fn bounds(p: &Params) -> CliResult<Vec<Row>> {
    let excess = p.vec_f64("excess")?;
    if excess.is_empty() {
        return Err(invalid("excess", "at least one subsystem required"));
    }
    let mut rows = Vec::new();
    let mut taus = Vec::new();
    for n in 1..=excess.len() {
        let tau = match orthogonal_time_bound(&excess[..n]) {
            Ok(t) => t,
            Err(LtsError::NoFiniteBound(_)) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        rows.push(Row::new("tau", n, tau));
        taus.push(tau);
    }
    let positive_tail = excess.iter().skip(1).all(|e| *e > 0.0);
    let decreasing = taus.windows(2).all(|w| w[1] < w[0]);
    rows.push(Row::flag("strictly_decreasing", decreasing));
    rows.push(Row::flag("appended_excess_positive", positive_tail));
    if let Some(omega) = p.opt_f64("qubit_omega")? {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("qubit_omega", "must be positive"));
        }
        let found = qubit_orthogonalization_time(omega)?;
        let bound = orthogonal_time_bound(&[omega / 2.0])?;
        rows.push(Row::scalar("qubit_orthogonal_time", found));
        rows.push(Row::scalar("qubit_bound", bound));
        rows.push(Row::scalar("qubit_gap", (found - bound).abs()));
    }
    Ok(rows)
}

/// First zero of |⟨+|e^{−iHt}|+⟩| for H = diag(0, ω), located by golden-section
/// search on the fidelity over one period.
fn qubit_orthogonalization_time(omega: f64) -> CliResult<f64> {
    let h = SpectralDecomposition::from_diagonal(&[0.0, omega])?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::from_slice(&[C64::new(s, 0.0), C64::new(s, 0.0)], vec![2])?;
    let f = |t: f64| -> CliResult<f64> { Ok(plus.fidelity(&h.evolve(&plus, t)?)?) };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.9 * std::f64::consts::PI / omega);
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-13 * b {
        if f1 < f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
