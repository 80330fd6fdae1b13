mod common;

use common::*;
use lts_core::quantum::{
    apply_local, partial_trace, reduced_state, schmidt_decompose, schmidt_reconstruct,
    spectral_decompose, Bipartition,
};
use lts_core::{CMatrix, DensityMatrix, StateVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evolution_is_unitary(seed in any::<u64>(), d in 2usize..7, t in -20.0f64..20.0) {
        let mut r = rng(seed);
        let spec = spectral_decompose(&random_hermitian(&mut r, d)).unwrap();
        let psi = StateVector::random(&mut r, vec![d]);
        let out = spec.evolve(&psi, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let back = spec.evolve(&out, -t).unwrap();
        prop_assert!(back.distance(&psi) < 1e-10);
        let product = spec.unitary(t) * spec.unitary(-t);
        prop_assert!(max_abs(&(product - CMatrix::identity(d, d))) < 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut r = rng(seed);
        let dims = vec![da, db, dc];
        let m = random_density(&mut r, da * db * dc);
        let rho = DensityMatrix::new(m.clone(), dims.clone()).unwrap();
        for keep in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let red = partial_trace(&rho, &keep).unwrap();
            prop_assert!((red.trace() - 1.0).abs() < 1e-12);
            prop_assert!(red.eigenvalues().iter().all(|&l| l > -1e-12));
            let oracle = brute_partial_trace(&m, &dims, &keep);
            prop_assert!(red.max_deviation(&oracle) < 1e-12);
        }
    }

    #[test]
    fn tracing_removes_local_unitaries(seed in any::<u64>(), da in 1usize..4, db in 2usize..4) {
        let mut r = rng(seed);
        let dims = vec![da, db];
        let rho = DensityMatrix::new(random_density(&mut r, da * db), dims).unwrap();
        let v = random_unitary(&mut r, db);
        let full_v = lts_core::quantum::kron(&CMatrix::identity(da, da), &v);
        let rotated = rho.conjugate(&full_v).unwrap();
        let before = partial_trace(&rho, &[0]).unwrap();
        let after = partial_trace(&rotated, &[0]).unwrap();
        prop_assert!(after.max_deviation(before.matrix()) < 1e-12);
    }

    #[test]
    fn schmidt_round_trip(seed in any::<u64>(), da in 1usize..5, db in 1usize..5, dc in 1usize..3) {
        let mut r = rng(seed);
        let dims = vec![da, db, dc];
        let psi = StateVector::random(&mut r, dims.clone());
        let cut = Bipartition::new(&[vec![0, 2], vec![1]], 3).unwrap();
        let terms = schmidt_decompose(&psi, &cut).unwrap();
        let back = schmidt_reconstruct(&terms, &cut, &dims).unwrap();
        prop_assert!(back.distance(&psi) < 1e-10);
        let total: f64 = terms.iter().map(|t| t.coefficient * t.coefficient).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_of_pure_matches_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let dims = vec![da, db, 2];
        let psi = StateVector::random(&mut r, dims.clone());
        let full = projector(psi.amplitudes());
        for keep in [vec![0], vec![2], vec![0, 1]] {
            let red = reduced_state(&psi, &keep).unwrap();
            prop_assert!(red.max_deviation(&brute_partial_trace(&full, &dims, &keep)) < 1e-12);
        }
    }

    #[test]
    fn local_operator_matches_kron(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let dims = vec![da, db];
        let psi = StateVector::random(&mut r, dims.clone());
        let u = random_unitary(&mut r, db);
        let local = apply_local(psi.amplitudes(), &dims, &u, &[1]).unwrap();
        let full = lts_core::quantum::kron(&CMatrix::identity(da, da), &u) * psi.amplitudes();
        prop_assert!((local - full).norm() < 1e-12);
    }
}
