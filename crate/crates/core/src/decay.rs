//! Nonexponential decay driven by a rational clock rate κ(t) = P(t)/Q(t),
//! and the mother/daughter chain built on it.

use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quadrature::adaptive;
use crate::{LtsError, Result};

/// Below this value of t·√b the canonical local time is summed from its
/// Taylor series instead of the closed-form antiderivative.
const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Unit,
    Canonical { a: f64, b: f64, p: f64 },
    General,
}

/// κ(t) = P(t)/Q(t) with nonnegative coefficients and equal leading terms,
/// so that κ > 0 for t > 0 and κ → 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalClockRate {
    /// Ascending coefficients of P.
    numerator: Vec<f64>,
    /// Ascending coefficients of Q.
    denominator: Vec<f64>,
    form: Form,
}

impl RationalClockRate {
    /// κ ≡ 1.
    pub fn unit() -> Self {
        RationalClockRate {
            numerator: vec![1.0],
            denominator: vec![1.0],
            form: Form::Unit,
        }
    }

    /// P = a t + b t², Q = 1 + p t + b t², with a, b > 0, p ≥ 0 and 4b > p².
    pub fn canonical(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LtsError::param("a", format!("must be positive, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(LtsError::param("b", format!("must be positive, got {b}")));
        }
        if !(p >= 0.0 && p.is_finite()) {
            return Err(LtsError::param(
                "p",
                format!("must be nonnegative, got {p}"),
            ));
        }
        if 4.0 * b <= p * p {
            return Err(LtsError::param(
                "p",
                format!("4b = {} must exceed p² = {}", 4.0 * b, p * p),
            ));
        }
        Ok(RationalClockRate {
            numerator: vec![0.0, a, b],
            denominator: vec![1.0, p, b],
            form: Form::Canonical { a, b, p },
        })
    }

    /// Arbitrary P/Q of equal degree with ascending coefficients.
    pub fn general(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        let trim = |mut v: Vec<f64>| {
            while v.len() > 1 && v.last() == Some(&0.0) {
                v.pop();
            }
            v
        };
        let (numerator, denominator) = (trim(numerator), trim(denominator));
        if numerator.is_empty() || denominator.is_empty() {
            return Err(LtsError::param("numerator", "coefficients required"));
        }
        if numerator
            .iter()
            .chain(&denominator)
            .any(|c| !(*c >= 0.0) || !c.is_finite())
        {
            return Err(LtsError::param(
                "numerator",
                "coefficients must be finite and nonnegative",
            ));
        }
        if numerator.len() != denominator.len() {
            return Err(LtsError::param(
                "denominator",
                "P and Q must have the same degree",
            ));
        }
        let (lp, lq) = (
            numerator[numerator.len() - 1],
            denominator[denominator.len() - 1],
        );
        if (lp - lq).abs() > 1e-14 * lq.max(1.0) || lq == 0.0 {
            return Err(LtsError::param(
                "numerator",
                format!("leading coefficients differ ({lp} vs {lq})"),
            ));
        }
        if !(denominator[0] > 0.0) {
            return Err(LtsError::param("denominator", "Q(0) must be positive"));
        }
        let form = if numerator.len() == 1 {
            Form::Unit
        } else {
            Form::General
        };
        Ok(RationalClockRate {
            numerator,
            denominator,
            form,
        })
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// (a, b, p) for the canonical form.
    pub fn canonical_parameters(&self) -> Option<(f64, f64, f64)> {
        match self.form {
            Form::Canonical { a, b, p } => Some((a, b, p)),
            _ => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.form == Form::Unit
    }

    pub fn kappa(&self, t: f64) -> f64 {
        horner(&self.numerator, t) / horner(&self.denominator, t)
    }

    /// ∫_0^t κ(s) ds.
    pub fn local_time(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(LtsError::param(
                "t",
                format!("must be finite and nonnegative, got {t}"),
            ));
        }
        match self.form {
            Form::Unit => Ok(t),
            Form::Canonical { b, .. } if t * b.sqrt() < SERIES_RADIUS => {
                Ok(self.series_local_time(t))
            }
            Form::Canonical { a, b, p } => Ok(canonical_increment(a, b, p, t)),
            Form::General => self.quadrature_local_time(t),
        }
    }

    /// Taylor coefficients of κ about 0.
    pub fn series(&self, terms: usize) -> Vec<f64> {
        let q = &self.denominator;
        let mut k = Vec::with_capacity(terms);
        for n in 0..terms {
            let mut c = self.numerator.get(n).copied().unwrap_or(0.0);
            for j in 1..q.len().min(n + 1) {
                c -= q[j] * k[n - j];
            }
            k.push(c / q[0]);
        }
        k
    }

    fn series_local_time(&self, t: f64) -> f64 {
        let k = self.series(SERIES_TERMS);
        k.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (n, c)| acc * t + c / (n + 1) as f64)
            * t
    }

    fn quadrature_local_time(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        adaptive(|s| self.kappa(s), 0.0, t, 1e-300, 1e-13)
    }

    /// (c, k) with ∫_0^t κ ≈ c t^k as t → 0.
    pub fn onset(&self) -> (f64, i32) {
        let k = self.series(self.numerator.len() + 1);
        let (m, c) = k
            .iter()
            .enumerate()
            .find(|(_, c)| **c != 0.0)
            .map(|(m, c)| (m, *c))
            .unwrap_or((0, 0.0));
        (c / (m + 1) as f64, m as i32 + 1)
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

/// Antiderivative F(t) = t + (p² − ap − 2b) arctan((p + 2bt)/√D)/(b√D)
/// + (a − p) ln(1 + pt + bt²)/(2b), D = 4b − p².
pub fn canonical_antiderivative(a: f64, b: f64, p: f64, t: f64) -> f64 {
    let sd = (4.0 * b - p * p).sqrt();
    t + (p * p - a * p - 2.0 * b) * ((p + 2.0 * b * t) / sd).atan() / (b * sd)
        + (a - p) * (1.0 + p * t + b * t * t).ln() / (2.0 * b)
}

/// F(t) − F(0) with the arctan difference and the logarithm written to
/// avoid cancellation.
fn canonical_increment(a: f64, b: f64, p: f64, t: f64) -> f64 {
    let sd = (4.0 * b - p * p).sqrt();
    let (x0, x1) = (p / sd, (p + 2.0 * b * t) / sd);
    let atan_diff = ((2.0 * b * t / sd) / (1.0 + x0 * x1)).atan();
    t + (p * p - a * p - 2.0 * b) * atan_diff / (b * sd)
        + (a - p) * (p * t + b * t * t).ln_1p() / (2.0 * b)
}

/// C = e^{λμ}, μ = (2b + ap − p²) arctan(p/√(4b − p²))/(b√(4b − p²)).
///
/// This is the prefactor obtained from the indefinite antiderivative; with
/// the definite integral used by [`DecaySpecies::survival`] the prefactor
/// is 1.
pub fn indefinite_prefactor(lambda: f64, a: f64, b: f64, p: f64) -> Result<f64> {
    let d = 4.0 * b - p * p;
    if !(d > 0.0) || b == 0.0 {
        return Err(LtsError::param(
            "p",
            format!("4b − p² = {d} must be positive"),
        ));
    }
    let mu = (2.0 * b + a * p - p * p) * (p / d.sqrt()).atan() / (b * d.sqrt());
    Ok((lambda * mu).exp())
}

/// Decay rate λ, clock κ and initial population N(0).
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySpecies {
    lambda: f64,
    clock: RationalClockRate,
    initial: f64,
}

impl DecaySpecies {
    pub fn new(lambda: f64, clock: RationalClockRate, initial: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LtsError::param(
                "lambda",
                format!("must be positive, got {lambda}"),
            ));
        }
        Self::with_rate(lambda, clock, initial)
    }

    /// Like [`new`](Self::new) but also accepting λ = 0 (a stable species).
    pub fn stable_or_decaying(lambda: f64, clock: RationalClockRate, initial: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(LtsError::param(
                "lambda",
                format!("must be nonnegative, got {lambda}"),
            ));
        }
        Self::with_rate(lambda, clock, initial)
    }

    fn with_rate(lambda: f64, clock: RationalClockRate, initial: f64) -> Result<Self> {
        if !(initial >= 0.0 && initial.is_finite()) {
            return Err(LtsError::param(
                "initial",
                format!("must be nonnegative, got {initial}"),
            ));
        }
        Ok(DecaySpecies {
            lambda,
            clock,
            initial,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn clock(&self) -> &RationalClockRate {
        &self.clock
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// p(t) = e^{−λ ∫_0^t κ}.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok((-self.lambda * self.clock.local_time(t)?).exp())
    }

    /// Exponent of the power-law factor t^{−λ(a−p)/b} at large t
    /// (canonical clocks only).
    pub fn power_law_exponent(&self) -> Option<f64> {
        self.clock
            .canonical_parameters()
            .map(|(a, b, p)| self.lambda * (a - p) / b)
    }

    /// Factors of the survival probability: e^{−λt}, (1 + pt + bt²)^{−λ(a−p)/(2b)}
    /// and the remaining bounded arctan factor (canonical clocks only).
    pub fn long_time_factors(&self, t: f64) -> Option<LongTimeFactors> {
        let (a, b, p) = self.clock.canonical_parameters()?;
        let l = self.lambda;
        let exponential = (-l * t).exp();
        let power = (-l * (a - p) / (2.0 * b) * (p * t + b * t * t).ln_1p()).exp();
        let sd = (4.0 * b - p * p).sqrt();
        let (x0, x1) = (p / sd, (p + 2.0 * b * t) / sd);
        let atan_diff = ((2.0 * b * t / sd) / (1.0 + x0 * x1)).atan();
        let bounded = (-l * (p * p - a * p - 2.0 * b) * atan_diff / (b * sd)).exp();
        Some(LongTimeFactors {
            exponential,
            power,
            bounded,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeFactors {
    pub exponential: f64,
    pub power: f64,
    pub bounded: f64,
}

impl LongTimeFactors {
    pub fn product(&self) -> f64 {
        self.exponential * self.power * self.bounded
    }
}

/// N_A and N_B on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPopulations {
    pub t: Vec<f64>,
    pub mother: Vec<f64>,
    pub daughter: Vec<f64>,
}

/// Integrates dN_A/dt = −λ_A κ_A N_A, dN_B/dt = −λ_B κ_B N_B + λ_A κ_A N_A
/// from t_grid[0] = 0.
pub fn decay_chain_ode(
    mother: &DecaySpecies,
    daughter: &DecaySpecies,
    t_grid: &[f64],
    opts: OdeOptions,
) -> Result<ChainPopulations> {
    if t_grid.first().is_some_and(|t| *t != 0.0) {
        return Err(LtsError::param("t_grid", "grid must start at 0"));
    }
    let (la, lb) = (mother.lambda, daughter.lambda);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let flow = la * mother.clock.kappa(t) * y[0];
        dy[0] = -flow;
        dy[1] = flow - lb * daughter.clock.kappa(t) * y[1];
    };
    // integrate fractions of the initial total so tolerances are unit-free
    let total = mother.initial + daughter.initial;
    let scale = if total > 0.0 { total } else { 1.0 };
    let y0 = [mother.initial / scale, daughter.initial / scale];
    let states = integrate(rhs, &y0, t_grid, opts)?;
    Ok(ChainPopulations {
        t: t_grid.to_vec(),
        mother: states.iter().map(|y| y[0] * scale).collect(),
        daughter: states.iter().map(|y| y[1] * scale).collect(),
    })
}

/// (1 − e^{−δ})/δ, continuous through δ = 0.
fn relative_expm1(delta: f64) -> f64 {
    if delta.abs() < 1e-8 {
        1.0 - 0.5 * delta
    } else {
        -(-delta).exp_m1() / delta
    }
}

/// N_B = N_A(0) x_A (e^{−x_A} − e^{−x_B})/(x_B − x_A) with x = λ ∫_0^t κ,
/// taking the limit form when x_A = x_B.
pub fn decay_chain_closed_form(
    mother: &DecaySpecies,
    daughter: &DecaySpecies,
    t: f64,
) -> Result<f64> {
    if daughter.initial != 0.0 {
        return Err(LtsError::param(
            "initial",
            "the closed form assumes N_B(0) = 0",
        ));
    }
    let xa = mother.lambda * mother.clock.local_time(t)?;
    let xb = daughter.lambda * daughter.clock.local_time(t)?;
    Ok(mother.initial * xa * (-xa).exp() * relative_expm1(xb - xa))
}

/// N_A(0) λ_A (e^{−λ_A t} − e^{−λ_B t})/(λ_B − λ_A), the unit-clock chain.
pub fn standard_chain(lambda_a: f64, lambda_b: f64, n_a0: f64, t: f64) -> f64 {
    let xa = lambda_a * t;
    n_a0 * xa * (-xa).exp() * relative_expm1((lambda_b - lambda_a) * t)
}

/// λ_A N_A(0) t, the linear onset of [`standard_chain`].
pub fn short_time_chain_standard(lambda_a: f64, n_a0: f64, t: f64) -> f64 {
    lambda_a * n_a0 * t
}

/// Leading small-t term N_A(0) λ_A c t^k of the daughter population, with
/// ∫_0^t κ_A ≈ c t^k.
pub fn short_time_chain(mother: &DecaySpecies, t: f64) -> f64 {
    let (c, k) = mother.clock.onset();
    mother.initial * mother.lambda * c * t.powi(k)
}

/// ODE and closed-form daughter populations side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDeviation {
    pub t: Vec<f64>,
    pub ode: Vec<f64>,
    pub closed_form: Vec<f64>,
}

impl ChainDeviation {
    /// max |closed − ode| / max(|ode|, floor).
    pub fn max_relative(&self, floor: f64) -> f64 {
        self.ode
            .iter()
            .zip(&self.closed_form)
            .map(|(o, c)| (c - o).abs() / o.abs().max(floor))
            .fold(0.0, f64::max)
    }
}

pub fn chain_deviation(
    mother: &DecaySpecies,
    daughter: &DecaySpecies,
    t_grid: &[f64],
    opts: OdeOptions,
) -> Result<ChainDeviation> {
    let ode = decay_chain_ode(mother, daughter, t_grid, opts)?;
    let closed_form = t_grid
        .iter()
        .map(|&t| decay_chain_closed_form(mother, daughter, t))
        .collect::<Result<_>>()?;
    Ok(ChainDeviation {
        t: ode.t,
        ode: ode.daughter,
        closed_form,
    })
}
