mod common;

use common::rng;
use lts_core::decay::{
    chain_deviation, decay_chain_closed_form, decay_chain_ode, short_time_chain, standard_chain,
};
use lts_core::numerics::ode::OdeOptions;
use lts_core::numerics::quadrature::adaptive;
use lts_core::{DecaySpecies, RationalClockRate};
use proptest::prelude::*;
use rand::Rng;

fn random_canonical<R: Rng>(r: &mut R) -> (f64, f64, f64) {
    let a = 10f64.powf(r.random_range(-2.0..1.0));
    let b = 10f64.powf(r.random_range(-2.0..1.0));
    let p = r.random_range(0.0..0.95) * 2.0 * b.sqrt();
    (a, b, p)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn quadrature_local_time(clock: &RationalClockRate, t: f64) -> f64 {
    adaptive(|s| clock.kappa(s), 0.0, t, 0.0, 1e-14).unwrap()
}

/// N_B(t) = e^{−X_B(t)} ∫_0^t λ_A κ_A(s) N_A(s) e^{X_B(s)} ds with X = λ∫κ.
fn integrating_factor(mother: &DecaySpecies, daughter: &DecaySpecies, t: f64) -> f64 {
    let xa = |s: f64| mother.lambda() * mother.clock().local_time(s).unwrap();
    let xb = |s: f64| daughter.lambda() * daughter.clock().local_time(s).unwrap();
    let integrand = |s: f64| {
        mother.lambda()
            * mother.clock().kappa(s)
            * mother.initial()
            * (-xa(s) + xb(s) - xb(t)).exp()
    };
    daughter.initial() * (-xb(t)).exp() + adaptive(integrand, 0.0, t, 0.0, 1e-13).unwrap()
}

#[test]
fn closed_form_local_time_matches_quadrature() {
    let mut r = rng(2024);
    let grid = log_grid(1e-6, 1e6, 61);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (a, b, p) = random_canonical(&mut r);
        let clock = RationalClockRate::canonical(a, b, p).unwrap();
        for &t in &grid {
            let closed = clock.local_time(t).unwrap();
            let numeric = quadrature_local_time(&clock, t);
            let rel = (closed - numeric).abs() / numeric.abs();
            worst = worst.max(rel);
            assert!(rel < 1e-9, "a {a} b {b} p {p} t {t}: {closed} vs {numeric}");
        }
    }
    assert!(worst < 1e-9);
}

#[test]
fn clock_rate_axioms() {
    let mut r = rng(5);
    let grid = log_grid(1e-3, 1e6, 80);
    for _ in 0..20 {
        let (a, b, p) = random_canonical(&mut r);
        let clock = RationalClockRate::canonical(a, b, p).unwrap();
        assert_eq!(clock.kappa(0.0), 0.0);
        let mut last_gap = f64::INFINITY;
        for (k, &t) in grid.iter().enumerate() {
            assert!(clock.kappa(t) > 0.0);
            let drift = (clock.local_time(t).unwrap() - t).abs() / t;
            if k > 60 {
                let gap = (clock.kappa(t) - 1.0).abs();
                assert!(
                    gap <= last_gap * (1.0 + 1e-9),
                    "κ saturation not monotone at {t}"
                );
                last_gap = gap;
            }
            if t >= 1e5 {
                assert!(
                    drift < 1e-2 * (1.0 + (a - p).abs() + 1.0 / b.sqrt()),
                    "drift {drift} at {t}"
                );
            }
        }
        assert!((clock.kappa(1e6) - 1.0).abs() < 1e-4 * (1.0 + (a - p).abs()));
        let late = (clock.local_time(1e6).unwrap() - 1e6).abs() / 1e6;
        let mid = (clock.local_time(1e3).unwrap() - 1e3).abs() / 1e3;
        assert!(late < mid);
    }
}

#[test]
fn general_clock_uses_quadrature() {
    let clock =
        RationalClockRate::general(vec![0.0, 0.0, 2.0, 1.0], vec![1.0, 0.5, 0.0, 1.0]).unwrap();
    for t in [0.01, 0.5, 3.0, 40.0] {
        let l = clock.local_time(t).unwrap();
        // independent fine-grid Simpson
        let n = 200_000;
        let h = t / n as f64;
        let s: f64 = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * clock.kappa(k as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((l - s).abs() < 1e-10 * s.max(1e-6), "t {t}: {l} vs {s}");
    }
    let (c, k) = clock.onset();
    assert_eq!(k, 3);
    assert!((c - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn unit_clock_reproduces_standard_chain() {
    for (la, lb) in [(1.0, 0.3), (0.2, 2.5), (0.7, 0.7), (1.0, 1.0 + 1e-9)] {
        let n0 = 1000.0;
        let mother = DecaySpecies::new(la, RationalClockRate::unit(), n0).unwrap();
        let daughter = DecaySpecies::new(lb, RationalClockRate::unit(), 0.0).unwrap();
        let grid: Vec<f64> = (0..=400).map(|k| 10.0 / la * k as f64 / 400.0).collect();
        let ode = decay_chain_ode(&mother, &daughter, &grid, OdeOptions::default()).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let exact = standard_chain(la, lb, n0, t);
            let closed = decay_chain_closed_form(&mother, &daughter, t).unwrap();
            if exact == 0.0 {
                assert_eq!(ode.daughter[k], 0.0);
                assert_eq!(closed, 0.0);
                continue;
            }
            assert!(
                (ode.daughter[k] - exact).abs() <= 1e-10 * exact,
                "({la},{lb}) t {t}"
            );
            assert!((closed - exact).abs() <= 1e-12 * exact);
            let mother_exact = n0 * (-la * t).exp();
            assert!((ode.mother[k] - mother_exact).abs() <= 1e-10 * mother_exact);
        }
    }
}

#[test]
fn ode_matches_integrating_factor_for_nonunit_clocks() {
    let mut r = rng(77);
    for _ in 0..8 {
        let ca = {
            let (a, b, p) = random_canonical(&mut r);
            RationalClockRate::canonical(a, b, p).unwrap()
        };
        let cb = {
            let (a, b, p) = random_canonical(&mut r);
            RationalClockRate::canonical(a, b, p).unwrap()
        };
        let la = r.random_range(0.2..2.0);
        let lb = r.random_range(0.2..2.0);
        let mother = DecaySpecies::new(la, ca, 1.0).unwrap();
        let daughter = DecaySpecies::new(lb, cb, 0.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|k| 8.0 / la * k as f64 / 40.0).collect();
        let ode = decay_chain_ode(&mother, &daughter, &grid, OdeOptions::default()).unwrap();
        for (k, &t) in grid.iter().enumerate().skip(1) {
            let oracle = integrating_factor(&mother, &daughter, t);
            assert!(
                (ode.daughter[k] - oracle).abs() <= 1e-9 * oracle + 1e-15,
                "t {t}: {} vs {oracle}",
                ode.daughter[k]
            );
            let na = (-la * mother.clock().local_time(t).unwrap()).exp();
            assert!(
                (ode.mother[k] - na).abs() <= 1e-10 * na + 1e-15,
                "t {t}: {} vs {na}",
                ode.mother[k]
            );
        }
    }
}

#[test]
fn stable_daughter_conserves_mass() {
    let mother = DecaySpecies::new(
        0.8,
        RationalClockRate::canonical(2.0, 0.5, 0.3).unwrap(),
        5.0,
    )
    .unwrap();
    let daughter = DecaySpecies::stable_or_decaying(0.0, RationalClockRate::unit(), 0.0).unwrap();
    let grid: Vec<f64> = (0..=100).map(|k| 0.3 * k as f64).collect();
    let ode = decay_chain_ode(&mother, &daughter, &grid, OdeOptions::default()).unwrap();
    for (a, b) in ode.mother.iter().zip(&ode.daughter) {
        assert!((a + b - 5.0).abs() < 1e-9);
    }
}

#[test]
fn short_time_onsets() {
    let mother = DecaySpecies::new(
        0.5,
        RationalClockRate::canonical(1.2, 0.8, 0.4).unwrap(),
        1.0,
    )
    .unwrap();
    let daughter = DecaySpecies::new(
        0.9,
        RationalClockRate::canonical(0.7, 1.5, 0.2).unwrap(),
        0.0,
    )
    .unwrap();
    let grid = [0.0, 1e-5, 1e-4, 1e-3];
    let ode = decay_chain_ode(&mother, &daughter, &grid, OdeOptions::default()).unwrap();
    let ratios: Vec<f64> = grid[1..]
        .iter()
        .zip(&ode.daughter[1..])
        .map(|(&t, n)| n / short_time_chain(&mother, t))
        .collect();
    assert!((ratios[0] - 1.0).abs() < 1e-4);
    assert!((ratios[0] - 1.0).abs() < (ratios[2] - 1.0).abs());
}

#[test]
fn survival_properties() {
    let mut r = rng(8);
    for _ in 0..20 {
        let (a, b, p) = random_canonical(&mut r);
        let s = DecaySpecies::new(
            r.random_range(0.1..3.0),
            RationalClockRate::canonical(a, b, p).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(s.survival(0.0).unwrap(), 1.0);
        let grid = log_grid(1e-6, 50.0, 200);
        let values: Vec<f64> = grid.iter().map(|&t| s.survival(t).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
        // d/dt ln p at 0 vanishes: −λ L(h)/h → 0
        let rate = |h: f64| s.lambda() * s.clock().local_time(h).unwrap() / h;
        assert!(rate(1e-8) < 1e-6 * (1.0 + s.lambda() * a));
        // the factor split reassembles the survival probability
        for &t in &[0.5, 5.0, 50.0] {
            let f = s.long_time_factors(t).unwrap();
            assert!(
                (f.product() - s.survival(t).unwrap()).abs()
                    <= 1e-12 * s.survival(t).unwrap().max(1e-300)
            );
        }
    }
}

#[test]
fn deviation_report_is_finite() {
    let mother = DecaySpecies::new(
        1.0,
        RationalClockRate::canonical(1.0, 0.6, 0.5).unwrap(),
        1.0,
    )
    .unwrap();
    let daughter = DecaySpecies::new(
        0.4,
        RationalClockRate::canonical(2.0, 0.3, 0.1).unwrap(),
        0.0,
    )
    .unwrap();
    let grid: Vec<f64> = (0..=50).map(|k| 0.2 * k as f64).collect();
    let report = chain_deviation(&mother, &daughter, &grid, OdeOptions::default()).unwrap();
    assert_eq!(report.t.len(), 51);
    assert!(report.max_relative(1e-12).is_finite());

    let unit = DecaySpecies::new(0.4, RationalClockRate::unit(), 0.0).unwrap();
    let m = DecaySpecies::new(1.0, RationalClockRate::unit(), 1.0).unwrap();
    assert!(
        chain_deviation(&m, &unit, &grid, OdeOptions::default())
            .unwrap()
            .max_relative(1e-12)
            < 1e-10
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antiderivative_increments_match_local_time(a in 0.01f64..10.0, b in 0.01f64..10.0, frac in 0.0f64..0.95, t in 0.5f64..100.0) {
        let p = frac * 2.0 * b.sqrt();
        let clock = RationalClockRate::canonical(a, b, p).unwrap();
        let f = |x: f64| lts_core::decay::canonical_antiderivative(a, b, p, x);
        let l = clock.local_time(t).unwrap();
        prop_assert!((f(t) - f(0.0) - l).abs() <= 1e-9 * l.max(1.0));
    }

    #[test]
    fn invalid_clocks_rejected(b in 0.01f64..5.0, over in 1.0f64..3.0) {
        let p = over * 2.0 * b.sqrt();
        prop_assert!(RationalClockRate::canonical(1.0, b, p).is_err());
    }
}
