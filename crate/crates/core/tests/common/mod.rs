#![allow(dead_code)]

use lts_core::quantum::spectral_decompose;
use lts_core::{CMatrix, CVector, CompositeHamiltonian, Subsystem, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    (&m + m.adjoint()) * c(1.0, 0.0)
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let t = 0.5 + 2.0 * rng.random::<f64>();
    spectral_decompose(&random_hermitian(rng, d))
        .unwrap()
        .unitary(t)
}

pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

/// Composite with random self terms on every subsystem and random pair terms
/// on the listed pairs.
pub fn random_composite<R: Rng>(
    rng: &mut R,
    dims: &[usize],
    pairs: &[(usize, usize)],
) -> CompositeHamiltonian {
    let subsystems = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| Subsystem::new(format!("s{i}"), d))
        .collect();
    let mut h = CompositeHamiltonian::new(subsystems).unwrap();
    for (i, &d) in dims.iter().enumerate() {
        h = h.with_self(i, random_hermitian(rng, d)).unwrap();
    }
    for &(i, j) in pairs {
        h = h
            .with_pair(i, j, random_hermitian(rng, dims[i] * dims[j]))
            .unwrap();
    }
    h
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-major digits of `index` for the given dims.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Partial trace by explicit summation over all index pairs of the full
/// density matrix. `keep` must be ascending.
pub fn brute_partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let kept: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept.iter().product();
    let mut out = CMatrix::zeros(dk, dk);
    let n = rho.nrows();
    for a in 0..n {
        let da = digits(a, dims);
        for b in 0..n {
            let db = digits(b, dims);
            let traced_equal = (0..dims.len())
                .filter(|k| !keep.contains(k))
                .all(|k| da[k] == db[k]);
            if !traced_equal {
                continue;
            }
            let ia = keep.iter().fold(0, |acc, &k| acc * dims[k] + da[k]);
            let ib = keep.iter().fold(0, |acc, &k| acc * dims[k] + db[k]);
            out[(ia, ib)] += rho[(a, b)];
        }
    }
    out
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
