mod common;

use common::*;
use lts_core::lts_map::{sample_local_time, sigma_map, sigma_map_mixed, tau_min, DEFAULT_NODES};
use lts_core::quantum::{spectral_decompose, SpectralDecomposition};
use lts_core::{CMatrix, DensityMatrix, LtsError, StateVector, TimeWindow, C64};
use proptest::prelude::*;

/// erf(z) from its Maclaurin series; adequate for |z| ≲ 3.
fn erf_complex(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut acc = z;
    for n in 1..200 {
        term *= -z2 / n as f64;
        let next = term / (2 * n + 1) as f64;
        acc += next;
        if next.norm() < 1e-18 {
            break;
        }
    }
    acc * (2.0 / std::f64::consts::PI.sqrt())
}

/// ∫ρ(s)cos(ωs)ds / ∫ρ(s)ds for a Gaussian of width σ truncated to [−a, a].
fn damping_closed_form(omega: f64, a: f64, sigma: f64) -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    let z = C64::new(a / (sigma * r2), -sigma * omega / r2);
    (-0.5 * sigma * sigma * omega * omega).exp() * erf_complex(z).re / libm::erf(a / (sigma * r2))
}

fn instance(seed: u64, d: usize) -> (SpectralDecomposition, StateVector) {
    let mut r = rng(seed);
    let h = spectral_decompose(&random_hermitian(&mut r, d)).unwrap();
    let psi = StateVector::random(&mut r, vec![d]);
    (h, psi)
}

#[test]
fn qubit_coherence_matches_complex_erf() {
    for (k, &(e0, e1, hw)) in [
        (0.3, -0.4, 0.9),
        (1.5, 0.2, 0.6),
        (-0.7, 2.1, 0.45),
        (0.0, 1.0, 1.2),
    ]
    .iter()
    .enumerate()
    {
        let h = SpectralDecomposition::from_diagonal(&[e0, e1]).unwrap();
        let psi = StateVector::random(&mut rng(k as u64), vec![2]);
        let t0 = 2.3;
        let window = TimeWindow::new(t0, hw).unwrap();
        let sigma_hat = sigma_map(&psi, &h, &window, DEFAULT_NODES).unwrap();

        let omega = e0 - e1;
        let g = damping_closed_form(omega, hw, window.sigma());
        let a = psi.amplitudes();
        let expected = a[0] * a[1].conj() * C64::from_polar(g, -omega * t0);
        let got = sigma_hat.matrix()[(0, 1)];
        assert!(
            (got - expected).norm() < 1e-12,
            "case {k}: {got} vs {expected}"
        );
        assert!((sigma_hat.matrix()[(0, 0)].re - a[0].norm_sqr()).abs() < 1e-14);
    }
}

#[test]
fn characteristic_function_matches_complex_erf() {
    let window = TimeWindow::with_sigma(1.0, 0.8, 0.35).unwrap();
    for omega in [0.0, 0.5, 1.3, 2.0, 2.8] {
        let g = window.characteristic(omega, DEFAULT_NODES).unwrap();
        let expected = C64::from_polar(damping_closed_form(omega, 0.8, 0.35), -omega);
        assert!((g - expected).norm() < 1e-12, "ω = {omega}");
    }
}

#[test]
fn four_level_map_matches_direct_quadrature() {
    let (h, psi) = instance(42, 4);
    let tau = tau_min(&h, &psi).unwrap();
    let window = TimeWindow::new(1.7, 0.9 * tau).unwrap();
    let got = sigma_map(&psi, &h, &window, DEFAULT_NODES).unwrap();

    // composite Simpson over the window, Gaussian weights normalized on the grid
    let n = 4000;
    let (lo, step) = (window.lower(), (window.upper() - window.lower()) / n as f64);
    let mut acc = CMatrix::zeros(4, 4);
    let mut mass = 0.0;
    for k in 0..=n {
        let t = lo + k as f64 * step;
        let s = t - window.t0();
        let simpson = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = simpson * (-0.5 * (s / window.sigma()).powi(2)).exp();
        let v = h.evolve(&psi, t).unwrap().into_amplitudes();
        acc += projector(&v) * C64::new(w, 0.0);
        mass += w;
    }
    acc /= C64::new(mass, 0.0);
    assert!(
        got.max_deviation(&acc) < 1e-10,
        "deviation {}",
        got.max_deviation(&acc)
    );
}

#[test]
fn bound_cases() {
    let h = SpectralDecomposition::from_diagonal(&[0.0, 1.0, 3.0]).unwrap();
    let ground = StateVector::basis(0, vec![3]).unwrap();
    assert!(matches!(
        tau_min(&h, &ground),
        Err(LtsError::NoFiniteBound(_))
    ));
    let excited = StateVector::basis(1, vec![3]).unwrap();
    assert_eq!(tau_min(&h, &excited).unwrap(), f64::INFINITY);
    let amps = [C64::new(0.6, 0.0), C64::new(0.8, 0.0), C64::new(0.0, 0.0)];
    let psi = StateVector::from_slice(&amps, vec![3]).unwrap();
    // ⟨H⟩ − E_g = 0.64, ΔH = 0.48
    let expected = std::f64::consts::FRAC_PI_2 / 0.48;
    assert!((tau_min(&h, &psi).unwrap() - expected).abs() < 1e-12);
    let w = TimeWindow::new(1.0, expected * 1.01).unwrap();
    assert!(w.checked_against(expected).is_err());
}

fn truncated_second_moment(hw: f64, sigma: f64) -> f64 {
    let n = 20000;
    let h = 2.0 * hw / n as f64;
    let (mut m0, mut m2) = (0.0, 0.0);
    for k in 0..=n {
        let s = -hw + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 } * (-0.5 * (s / sigma).powi(2)).exp();
        m0 += w;
        m2 += w * s * s;
    }
    m2 / m0
}

#[test]
fn sampler_moments_in_both_regimes() {
    let mut r = rng(9);
    for (hw, sigma) in [(0.6, 0.2), (0.3, 1.5)] {
        let window = TimeWindow::with_sigma(5.0, hw, sigma).unwrap();
        let n = 40000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_local_time(&mut r, &window) - 5.0)
            .collect();
        assert!(samples.iter().all(|s| s.abs() <= hw));
        let sq: Vec<f64> = samples.iter().map(|s| s * s).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let target = truncated_second_moment(hw, sigma);
        assert!(
            (mean - target).abs() < 4.0 * se,
            "hw {hw}: {mean} vs {target} ± {se}"
        );
        let first = samples.iter().sum::<f64>() / n as f64;
        assert!(first.abs() < 4.0 * (target / n as f64).sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn map_invariants(seed in any::<u64>(), d in 2usize..6, t0 in 0.5f64..20.0, frac in 0.05f64..1.0, beta in 0.1f64..3.0) {
        let (h, psi) = instance(seed, d);
        let tau = tau_min(&h, &psi).unwrap();
        let window = TimeWindow::new(t0, frac * tau.min(5.0)).unwrap();
        let out = sigma_map(&psi, &h, &window, DEFAULT_NODES).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.eigenvalues().iter().all(|&l| l > -1e-10));
        let energy = out.expectation(&h.operator()).unwrap().re;
        prop_assert!((energy - h.mean(&psi).unwrap()).abs() < 1e-10);
        let initial = DensityMatrix::from_pure(&psi);
        for p in h.projectors() {
            let before = initial.expectation(p).unwrap().re;
            let after = out.expectation(p).unwrap().re;
            prop_assert!((before - after).abs() < 1e-10);
        }
        let gibbs = h.function(|e| C64::new((-beta * e).exp(), 0.0));
        let z = gibbs.trace();
        let thermal = DensityMatrix::new(gibbs / z, vec![d]).unwrap();
        let mapped = sigma_map_mixed(&thermal, &h, &window, DEFAULT_NODES).unwrap();
        prop_assert!(mapped.max_deviation(thermal.matrix()) < 1e-10);
    }

    #[test]
    fn map_is_linear_over_mixtures(seed in any::<u64>(), p in 0.0f64..1.0) {
        let (h, psi) = instance(seed, 3);
        let phi = StateVector::random(&mut rng(seed ^ 0xabc), vec![3]);
        let window = TimeWindow::new(2.0, 0.4).unwrap();
        let mix = DensityMatrix::from_pure(&psi).matrix() * C64::new(p, 0.0)
            + DensityMatrix::from_pure(&phi).matrix() * C64::new(1.0 - p, 0.0);
        let mixed = sigma_map_mixed(&DensityMatrix::new(mix, vec![3]).unwrap(), &h, &window, DEFAULT_NODES).unwrap();
        let a = sigma_map(&psi, &h, &window, DEFAULT_NODES).unwrap();
        let b = sigma_map(&phi, &h, &window, DEFAULT_NODES).unwrap();
        let combo = a.matrix() * C64::new(p, 0.0) + b.matrix() * C64::new(1.0 - p, 0.0);
        prop_assert!(mixed.max_deviation(&combo) < 1e-12);
    }
}
