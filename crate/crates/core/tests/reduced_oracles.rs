mod common;

use common::*;
use lts_core::quantum::{kron, spectral_decompose, SpectralDecomposition};
use lts_core::reduced::{
    evolve_pairs, initial_reduced, merge, merged_reduced, merged_state, restructured_reduced,
    restructured_state, to_local_eigenbases, PairSchmidt, RestructureUnitaries,
};
use lts_core::{CMatrix, FourBodyAmplitudes, StateVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const DIMS: [usize; 4] = [2, 2, 2, 2];

struct Instance {
    c: FourBodyAmplitudes,
    phi: StateVector,
    chi: StateVector,
    h12: SpectralDecomposition,
    h34: SpectralDecomposition,
    h1: SpectralDecomposition,
    h23: SpectralDecomposition,
    h4: SpectralDecomposition,
}

fn instance(r: &mut ChaCha8Rng) -> Instance {
    let phi = StateVector::random(r, vec![2, 2]);
    let chi = StateVector::random(r, vec![2, 2]);
    let mut spec = |d| spectral_decompose(&random_hermitian(r, d)).unwrap();
    Instance {
        c: FourBodyAmplitudes::product(&phi, &chi).unwrap(),
        phi,
        chi,
        h12: spec(4),
        h34: spec(4),
        h1: spec(2),
        h23: spec(4),
        h4: spec(2),
    }
}

fn full_density(psi: &StateVector) -> CMatrix {
    projector(psi.amplitudes())
}

#[test]
fn initial_reduced_matches_partial_trace() {
    let mut r = rng(1);
    for _ in 0..50 {
        let c = FourBodyAmplitudes::random(&mut r, DIMS);
        let full = full_density(c.state());
        let mut total = 0.0;
        for which in 0..4 {
            let red = initial_reduced(&c, which).unwrap();
            let oracle = brute_partial_trace(&full, &DIMS, &[which]);
            assert!(red.rho.max_deviation(&oracle) < 1e-12);
            assert!((red.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(red.weights.iter().all(|w| *w >= 0.0));
            total += red.rho.trace();
        }
        assert!((total - 4.0).abs() < 1e-12);
        // direct weights p_i = Σ_jkl |c_ijkl|²
        let p0: f64 = (0..2)
            .flat_map(|j| (0..2).flat_map(move |k| (0..2).map(move |l| (j, k, l))))
            .map(|(j, k, l)| c.amplitude(0, j, k, l).norm_sqr())
            .sum();
        assert!((initial_reduced(&c, 0).unwrap().weights[0] - p0).abs() < 1e-14);
    }
}

#[test]
fn local_eigenbases_diagonalize_marginals() {
    let mut r = rng(2);
    for _ in 0..20 {
        let c = FourBodyAmplitudes::random(&mut r, DIMS);
        let (rotated, bases) = to_local_eigenbases(&c).unwrap();
        assert_eq!(bases.len(), 4);
        for which in 0..4 {
            let red = initial_reduced(&rotated, which).unwrap();
            let off = red.rho.matrix()[(0, 1)].norm();
            assert!(off < 1e-12);
            let before = initial_reduced(&c, which).unwrap().rho.eigenvalues();
            let after = red.rho.eigenvalues();
            assert!(before
                .iter()
                .zip(&after)
                .all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}

#[test]
fn merged_and_restructured_states_match_full_oracles() {
    let mut r = rng(3);
    for _ in 0..50 {
        let inst = instance(&mut r);
        let (phi, chi) = (&inst.phi, &inst.chi);
        let (t12, t34) = (r.random_range(0.1..5.0), r.random_range(0.1..5.0));
        let (u12, u34) = (inst.h12.unitary(t12), inst.h34.unitary(t34));
        let s12 = PairSchmidt::instantaneous(phi, &u12).unwrap();
        let s34 = PairSchmidt::instantaneous(chi, &u34).unwrap();
        let merged = merge(&inst.c, &s12, &s34).unwrap();
        assert!((merged.weight() - 1.0).abs() < 1e-10);
        assert!((merged.row_weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);

        // stage I oracle: (U12 ⊗ U34)|c⟩ built by explicit Kronecker product
        let exact_i = kron(&u12, &u34) * inst.c.state().amplitudes();
        let full_i = projector(&exact_i);
        assert!(
            (merged_state(&merged, &s12, &s34).unwrap().amplitudes() - &exact_i).norm() < 1e-10
        );
        assert!(
            (evolve_pairs(&inst.c, &u12, &u34).unwrap().amplitudes() - &exact_i).norm() < 1e-12
        );
        for which in 0..4 {
            let red = merged_reduced(&merged, &s12, &s34, which).unwrap();
            assert!(red.rho.validate().is_ok());
            let oracle = brute_partial_trace(&full_i, &DIMS, &[which]);
            assert!(red.rho.max_deviation(&oracle) < 1e-10, "merged {which}");
        }
        // subsystems 1 and 2 share the spectrum r_p
        let (a, b) = (
            merged_reduced(&merged, &s12, &s34, 0).unwrap(),
            merged_reduced(&merged, &s12, &s34, 1).unwrap(),
        );
        assert!(a
            .weights
            .iter()
            .zip(&b.weights)
            .all(|(x, y)| (x - y).abs() < 1e-14));

        // stage II oracle: (U1 ⊗ U23 ⊗ U4) applied to the stage I state
        let times = [
            r.random_range(0.0..4.0),
            r.random_range(0.1..4.0),
            r.random_range(0.0..4.0),
        ];
        let u = RestructureUnitaries::from_spectra(&inst.h1, &inst.h23, &inst.h4, times);
        let exact_ii = kron(&kron(&u.u1, &u.u23), &u.u4) * &exact_i;
        let full_ii = projector(&exact_ii);
        assert!(
            (restructured_state(&merged, &s12, &s34, &u)
                .unwrap()
                .amplitudes()
                - &exact_ii)
                .norm()
                < 1e-10
        );
        for which in 0..4 {
            let red = restructured_reduced(&merged, &s12, &s34, &u, which).unwrap();
            assert!(red.rho.validate().is_ok());
            let oracle = brute_partial_trace(&full_ii, &DIMS, &[which]);
            assert!(
                red.rho.max_deviation(&oracle) < 1e-10,
                "restructured {which}"
            );
            assert!((red.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(red.weights.iter().all(|w| *w >= -1e-14));
        }
    }
}

#[test]
fn pair_block_is_independent_of_the_other_merge_time() {
    let mut r = rng(4);
    for _ in 0..50 {
        let inst = instance(&mut r);
        let (phi, chi) = (&inst.phi, &inst.chi);
        let u12 = inst.h12.unitary(1.3);
        let s12 = PairSchmidt::instantaneous(phi, &u12).unwrap();
        let mut reference: Option<(CMatrix, CMatrix)> = None;
        for t34 in [0.2, 1.7, 4.4, 9.1] {
            let s34 = PairSchmidt::instantaneous(chi, &inst.h34.unitary(t34)).unwrap();
            let merged = merge(&inst.c, &s12, &s34).unwrap();
            let state = merged_state(&merged, &s12, &s34).unwrap();
            let pair = brute_partial_trace(&projector(state.amplitudes()), &DIMS, &[0, 1]);
            let single = merged_reduced(&merged, &s12, &s34, 0)
                .unwrap()
                .rho
                .matrix()
                .clone();
            match &reference {
                None => reference = Some((pair, single)),
                Some((p0, s0)) => {
                    assert!(max_abs(&(&pair - p0)) < 1e-12);
                    assert!(max_abs(&(&single - s0)) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn first_subsystem_spectrum_is_invariant_under_its_time() {
    let mut r = rng(5);
    for _ in 0..20 {
        let inst = instance(&mut r);
        let (phi, chi) = (&inst.phi, &inst.chi);
        let s12 = PairSchmidt::instantaneous(phi, &inst.h12.unitary(0.8)).unwrap();
        let s34 = PairSchmidt::instantaneous(chi, &inst.h34.unitary(2.1)).unwrap();
        let merged = merge(&inst.c, &s12, &s34).unwrap();
        let stage_i = merged_reduced(&merged, &s12, &s34, 0).unwrap();
        let at = |t1: f64| {
            let u =
                RestructureUnitaries::from_spectra(&inst.h1, &inst.h23, &inst.h4, [t1, 1.0, 0.5]);
            restructured_reduced(&merged, &s12, &s34, &u, 0).unwrap()
        };
        let zero = at(0.0);
        assert!(zero.rho.max_deviation(stage_i.rho.matrix()) < 1e-12);
        let mut base = stage_i.rho.eigenvalues();
        base.sort_by(f64::total_cmp);
        for t1 in [0.3, 2.0, 7.5] {
            let mut ev = at(t1).rho.eigenvalues();
            ev.sort_by(f64::total_cmp);
            assert!(ev.iter().zip(&base).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}

#[test]
fn single_schmidt_term_gives_pure_state() {
    // |00⟩ under the identity: d has one nonzero entry
    let zero = StateVector::basis(0, vec![2, 2]).unwrap();
    let c = FourBodyAmplitudes::product(&zero, &zero).unwrap();
    let id = CMatrix::identity(4, 4);
    let s = PairSchmidt::instantaneous(&zero, &id).unwrap();
    let merged = merge(&c, &s, &s).unwrap();
    for which in 0..4 {
        assert!((merged_reduced(&merged, &s, &s, which).unwrap().rho.purity() - 1.0).abs() < 1e-14);
    }
}
