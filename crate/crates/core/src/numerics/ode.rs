//! Adaptive Dormand–Prince 5(4) integration of y' = f(t, y).

use crate::{LtsError, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-18,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `t_grid[0]` and returns the state at every grid time.
/// The grid must be nondecreasing.
pub fn integrate<F>(f: F, y0: &[f64], t_grid: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(t_grid.len());
    let Some(&t_start) = t_grid.first() else {
        return Ok(out);
    };
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(LtsError::IntegrationFailure(
            "time grid must be nondecreasing".into(),
        ));
    }
    let span = t_grid[t_grid.len() - 1] - t_start;
    let mut t = t_start;
    let mut y = y0.to_vec();
    let mut h = opts.initial_step.unwrap_or((span * 1e-4).max(1e-12));
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut steps = 0usize;
    f(t, &y, &mut k[0]);

    for &target in t_grid {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(LtsError::IntegrationFailure(format!(
                    "step limit reached at t = {t}"
                )));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * step, &tmp, &mut stage);
                k[s].copy_from_slice(&stage);
            }
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += step * B5[s] * k[s][i];
                    lo += step * B4[s] * k[s][i];
                }
                y5[i] = hi;
                let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(hi.abs());
                err = err.max(((hi - lo) / scale).abs());
            }
            if !err.is_finite() {
                return Err(LtsError::IntegrationFailure(format!(
                    "non-finite state at t = {t}"
                )));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y5);
                // FSAL: the last stage is f(t + h, y5)
                let last_stage = k[6].clone();
                k[0].copy_from_slice(&last_stage);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let proposal = step * factor;
            if err <= 1.0 && last {
                // keep the step size used before clipping to the grid point
                h = h.max(proposal);
            } else {
                h = proposal;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(LtsError::IntegrationFailure(format!(
                    "step size underflow at t = {t}"
                )));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
