mod common;

use common::*;
use lts_core::composite::{multi_time_evolve, BlockPropagator};
use lts_core::metrics::{
    haar_shell_moments, individuality_i, margolus_bound, orthogonal_time_bound, overlap_density,
    overlap_s, overlap_s_state, overlap_uniform_density, tabulate, BlockLevels, DensityRule,
    LevelWeights,
};
use lts_core::quantum::kron;
use lts_core::{
    BlockSpectra, CMatrix, CVector, LocalTimeAssignment, LtsError, Partition, StateVector,
    TimeOffsets, C64,
};
use proptest::prelude::*;
use rand::Rng;

fn random_blocks<R: Rng>(r: &mut R, shape: &[usize]) -> BlockSpectra {
    let blocks = shape
        .iter()
        .map(|&n| {
            let mut e: Vec<f64> = (0..n).map(|k| k as f64 + 0.9 * r.random::<f64>()).collect();
            e.iter_mut().for_each(|x| *x *= 0.7);
            let g = (0..n).map(|_| r.random_range(1..4)).collect();
            BlockLevels::new(e, g).unwrap()
        })
        .collect();
    BlockSpectra::new(blocks).unwrap()
}

fn random_weights<R: Rng>(r: &mut R, shape: &[usize]) -> LevelWeights {
    let n: usize = shape.iter().product();
    let raw: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    LevelWeights::new(shape.to_vec(), raw.iter().map(|w| w / total).collect()).unwrap()
}

fn random_offsets<R: Rng>(r: &mut R, n: usize) -> TimeOffsets {
    TimeOffsets::new((0..n).map(|_| 6.0 * r.random::<f64>() - 3.0).collect()).unwrap()
}

fn shifted(blocks: &BlockSpectra, b: usize, delta: f64) -> BlockSpectra {
    let out = blocks
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, lv)| {
            let e = lv
                .energies()
                .iter()
                .map(|x| if k == b { x + delta } else { *x })
                .collect();
            BlockLevels::new(e, lv.degeneracies().to_vec()).unwrap()
        })
        .collect();
    BlockSpectra::new(out).unwrap()
}

/// tr(⊗_b e^{−iH_b δ_b}) / D with each H_b expanded to an explicit diagonal
/// matrix repeating every level by its degeneracy.
fn brute_individuality(blocks: &BlockSpectra, offsets: &[f64]) -> C64 {
    let mut u = CMatrix::identity(1, 1);
    for (lv, &dt) in blocks.blocks().iter().zip(offsets) {
        let diag: Vec<C64> = lv
            .energies()
            .iter()
            .zip(lv.degeneracies())
            .flat_map(|(e, &g)| std::iter::repeat_n(C64::from_polar(1.0, -e * dt), g))
            .collect();
        u = kron(&u, &CMatrix::from_diagonal(&CVector::from_vec(diag)));
    }
    u.trace() / u.nrows() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlaps_are_bounded(seed in any::<u64>(), shape in proptest::collection::vec(1usize..5, 1..4)) {
        let mut r = rng(seed);
        let blocks = random_blocks(&mut r, &shape);
        let offsets = random_offsets(&mut r, shape.len());
        let s = overlap_s(&random_weights(&mut r, &shape), &blocks, &offsets).unwrap();
        prop_assert!(s.norm() <= 1.0 + 1e-12);
        prop_assert!(individuality_i(&blocks, &offsets).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn energy_shift_only_changes_phase(seed in any::<u64>(), b in 0usize..3, delta in -4.0f64..4.0) {
        let mut r = rng(seed);
        let shape = [3, 2, 4];
        let blocks = random_blocks(&mut r, &shape);
        let weights = random_weights(&mut r, &shape);
        let offsets = random_offsets(&mut r, 3);
        let base = overlap_s(&weights, &blocks, &offsets).unwrap();
        let moved = overlap_s(&weights, &shifted(&blocks, b, delta), &offsets).unwrap();
        let phase = C64::from_polar(1.0, -delta * offsets.values()[b]);
        prop_assert!((moved - base * phase).norm() < 1e-12);
        let mut zero = offsets.values().to_vec();
        zero[b] = 0.0;
        let zero = TimeOffsets::new(zero).unwrap();
        let a = overlap_s(&weights, &blocks, &zero).unwrap();
        let c = overlap_s(&weights, &shifted(&blocks, b, delta), &zero).unwrap();
        prop_assert!((a - c).norm() < 1e-12);
    }

    #[test]
    fn individuality_factorizes_and_matches_trace(seed in any::<u64>(), shape in proptest::collection::vec(1usize..4, 1..4)) {
        let mut r = rng(seed);
        let blocks = random_blocks(&mut r, &shape);
        let offsets = random_offsets(&mut r, shape.len());
        let total = individuality_i(&blocks, &offsets).unwrap();
        let product: C64 = blocks
            .blocks()
            .iter()
            .zip(offsets.values())
            .map(|(lv, &dt)| {
                let single = BlockSpectra::new(vec![lv.clone()]).unwrap();
                individuality_i(&single, &TimeOffsets::new(vec![dt]).unwrap()).unwrap()
            })
            .product();
        prop_assert!((total - product).norm() < 1e-12);
        prop_assert!((total - brute_individuality(&blocks, offsets.values())).norm() < 1e-12);
    }

    #[test]
    fn appending_excess_shortens_bound(excess in proptest::collection::vec(1e-3f64..10.0, 2..8), extra in 1e-3f64..10.0) {
        let full = orthogonal_time_bound(&excess).unwrap();
        for skip in 0..excess.len() {
            let sub: Vec<f64> = excess.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, e)| *e).collect();
            prop_assert!(full < orthogonal_time_bound(&sub).unwrap());
        }
        let mut more = excess.clone();
        more.push(extra);
        prop_assert!(orthogonal_time_bound(&more).unwrap() < full);
    }

    #[test]
    fn overlap_matches_explicit_inner_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_composite(&mut r, &[2, 3, 2, 2], &[(0, 2), (1, 3), (0, 1)]);
        let partition = Partition::new(vec![vec![0, 2], vec![1], vec![3]], 4).unwrap();
        let psi = StateVector::random(&mut r, h.dims());
        let t: Vec<f64> = (0..3).map(|_| 5.0 * r.random::<f64>()).collect();
        let t2: Vec<f64> = (0..3).map(|_| 5.0 * r.random::<f64>()).collect();
        let a = multi_time_evolve(&psi, &h, &partition, &LocalTimeAssignment::exact(&t).unwrap()).unwrap();
        let b = multi_time_evolve(&psi, &h, &partition, &LocalTimeAssignment::exact(&t2).unwrap()).unwrap();
        let offsets = TimeOffsets::new(t2.iter().zip(&t).map(|(x, y)| x - y).collect()).unwrap();
        let prop = BlockPropagator::new(&h, &partition).unwrap();
        let s = overlap_s_state(&psi, &prop, &offsets).unwrap();
        prop_assert!((s - a.inner(&b).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn density_rules_agree_with_closed_form() {
    for r in [0.5, 2.0, 10.0, 25.0] {
        let closed = overlap_uniform_density(r);
        for (n, rule) in [
            (100_001, DensityRule::Trapezoid),
            (2001, DensityRule::Simpson),
        ] {
            let p = tabulate(|_| 1.0 / r, r, n);
            let z = overlap_density(&p, r, rule).unwrap();
            assert!((z.norm() - closed).abs() < 1e-8, "r {r}, {rule:?}");
        }
    }
    // a nonuniform density on [0, r]: p(x) = 2x/r², overlap computed by hand
    let r: f64 = 3.0;
    let p = tabulate(|x| 2.0 * x / (r * r), r, 4001);
    let z = overlap_density(&p, r, DensityRule::Simpson).unwrap();
    let i = C64::new(0.0, 1.0);
    let exact = (C64::from_polar(1.0, -r) * (1.0 + i * r) - 1.0) * 2.0 / (r * r);
    assert!((z - exact).norm() < 1e-10);
}

#[test]
fn density_validation() {
    assert!(overlap_density(&[1.0, 1.0], 1.0, DensityRule::Trapezoid).is_ok());
    assert!(matches!(
        overlap_density(&[0.2, 0.2], 1.0, DensityRule::Trapezoid),
        Err(LtsError::NotNormalizedDistribution { .. })
    ));
    assert!(overlap_density(&[1.0, -0.1, 1.0], 1.0, DensityRule::Trapezoid).is_err());
    assert!(overlap_density(&[1.0, 1.0], 1.0, DensityRule::Simpson).is_err());
}

#[test]
fn zero_offsets_are_identity() {
    let mut r = rng(3);
    let shape = [3, 4, 2];
    let blocks = random_blocks(&mut r, &shape);
    let zero = TimeOffsets::zeros(3);
    assert!(
        (overlap_s(&random_weights(&mut r, &shape), &blocks, &zero).unwrap() - 1.0).norm() < 1e-12
    );
    assert!((individuality_i(&blocks, &zero).unwrap() - 1.0).norm() < 1e-12);
}

#[test]
fn margolus_takes_the_larger_quotient() {
    let half_pi = std::f64::consts::FRAC_PI_2;
    assert!((margolus_bound(2.0, 0.5).unwrap() - half_pi / 0.5).abs() < 1e-15);
    assert_eq!(margolus_bound(0.0, 1.0).unwrap(), f64::INFINITY);
    assert!(matches!(
        margolus_bound(0.0, 0.0),
        Err(LtsError::NoFiniteBound(_))
    ));
    assert!(matches!(
        orthogonal_time_bound(&[0.0, 0.0]),
        Err(LtsError::NoFiniteBound(_))
    ));
}

#[test]
fn small_dimension_moments() {
    for (dim, seed) in [(2, 1), (4, 2), (7, 3)] {
        let report = haar_shell_moments(&mut rng(seed), dim, 40_000).unwrap();
        assert!(report.max_z_score() < 4.5, "dim {dim}: {report:?}");
    }
    assert!(haar_shell_moments(&mut rng(0), 4, 100).is_err());
}
