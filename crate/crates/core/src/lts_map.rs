//! The Gaussian time-averaged state map, its indeterminacy bound and the
//! truncated-Gaussian local-time sampler.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::quadrature::GaussLegendre;
use crate::quantum::{DensityMatrix, SpectralDecomposition, StateVector};
use crate::{CMatrix, LtsError, Result, C64};

/// Default number of Gauss–Legendre nodes for the time average.
pub const DEFAULT_NODES: usize = 64;
/// Largest change tolerated when the node count is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Energies closer than this are treated as "no spread" by [`tau_min`].
const SPREAD_FLOOR: f64 = 1e-14;

/// A window [t0 − Δt, t0 + Δt] carrying a Gaussian of width `sigma` centred
/// at t0 and renormalised on the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    t0: f64,
    half_width: f64,
    sigma: f64,
}

impl TimeWindow {
    /// Window with the default width σ = Δt/3.
    pub fn new(t0: f64, half_width: f64) -> Result<Self> {
        Self::with_sigma(t0, half_width, half_width / 3.0)
    }

    pub fn with_sigma(t0: f64, half_width: f64, sigma: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(LtsError::param(
                "t0",
                format!("must be positive and finite, got {t0}"),
            ));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(LtsError::param(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(LtsError::param(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        Ok(TimeWindow {
            t0,
            half_width,
            sigma,
        })
    }

    /// Rejects windows wider than the indeterminacy bound `tau`.
    pub fn checked_against(self, tau: f64) -> Result<Self> {
        if self.half_width >= tau {
            return Err(LtsError::param(
                "half_width",
                format!("{} is not below the bound {tau}", self.half_width),
            ));
        }
        Ok(self)
    }

    /// Checks that ⟨Ψ(t0+Δt)|Ψ(t0−Δt)⟩ does not vanish and returns its modulus.
    pub fn verify_overlap(&self, psi: &StateVector, h: &SpectralDecomposition) -> Result<f64> {
        let early = h.evolve(psi, self.lower())?;
        let late = h.evolve(psi, self.upper())?;
        let overlap = late.fidelity(&early)?;
        if overlap <= 1e-12 {
            return Err(LtsError::param(
                "half_width",
                format!("states at the window edges are orthogonal (|overlap| = {overlap:e})"),
            ));
        }
        Ok(overlap)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lower(&self) -> f64 {
        self.t0 - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.t0 + self.half_width
    }

    pub fn contains(&self, t: f64) -> bool {
        (t - self.t0).abs() <= self.half_width
    }

    /// Normalised density ρ(t); zero outside the window.
    pub fn density(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        let z = libm::erf(self.half_width / (self.sigma * std::f64::consts::SQRT_2));
        let s = (t - self.t0) / self.sigma;
        (-0.5 * s * s).exp() / (self.sigma * (2.0 * PI).sqrt() * z)
    }

    /// Real factor g(ω) = ∫ρ(t0+s) cos(ωs) ds for each ω, at `n` nodes.
    fn damping(&self, omegas: &[f64], n: usize) -> Vec<f64> {
        let rule = GaussLegendre::new(n);
        let mut mass = 0.0;
        let mut acc = vec![0.0; omegas.len()];
        for (s, w) in rule.on_interval(-self.half_width, self.half_width) {
            let z = s / self.sigma;
            let weight = w * (-0.5 * z * z).exp();
            mass += weight;
            for (a, &om) in acc.iter_mut().zip(omegas) {
                *a += weight * (om * s).cos();
            }
        }
        acc.iter().map(|a| a / mass).collect()
    }

    fn converged_damping(&self, omegas: &[f64], n: usize) -> Result<Vec<f64>> {
        if n < 8 {
            return Err(LtsError::param(
                "n_nodes",
                format!("at least 8 required, got {n}"),
            ));
        }
        let coarse = self.damping(omegas, n);
        let fine = self.damping(omegas, 2 * n);
        let change = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change > CONVERGENCE_TOL {
            return Err(LtsError::QuadratureNotConverged { change });
        }
        Ok(fine)
    }

    /// Characteristic function φ(ω) = ∫ρ(t) e^{−iωt} dt of the window.
    pub fn characteristic(&self, omega: f64, n_nodes: usize) -> Result<C64> {
        let g = self.converged_damping(&[omega], n_nodes)?[0];
        Ok(C64::from_polar(g, -omega * self.t0))
    }
}

/// max(π/(2ΔH), π/(2(⟨H⟩ − E_g))), with ħ = 1.
///
/// A vanishing term counts as an infinite bound; an error is returned only
/// when both vanish (the state is a ground eigenstate).
pub fn tau_min(h: &SpectralDecomposition, psi: &StateVector) -> Result<f64> {
    let mean = h.mean(psi)?;
    let spread = h.variance(psi)?.max(0.0).sqrt();
    let excess = (mean - h.ground_energy()).max(0.0);
    if spread <= SPREAD_FLOOR && excess <= SPREAD_FLOOR {
        return Err(LtsError::NoFiniteBound(
            "state is a ground eigenstate with no energy spread".into(),
        ));
    }
    let bound = |x: f64| {
        if x > SPREAD_FLOOR {
            FRAC_PI_2 / x
        } else {
            f64::INFINITY
        }
    };
    Ok(bound(spread).max(bound(excess)))
}

/// Time average ∫ρ(t)|Ψ(t)⟩⟨Ψ(t)| dt over the window, with |Ψ(t)⟩ = e^{−iHt}|ψ0⟩.
pub fn sigma_map(
    psi0: &StateVector,
    h: &SpectralDecomposition,
    window: &TimeWindow,
    n_nodes: usize,
) -> Result<DensityMatrix> {
    let rho = DensityMatrix::from_pure(psi0);
    sigma_map_mixed(&rho, h, window, n_nodes)
}

/// Linear extension of [`sigma_map`] to density matrices.
pub fn sigma_map_mixed(
    rho: &DensityMatrix,
    h: &SpectralDecomposition,
    window: &TimeWindow,
    n_nodes: usize,
) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(LtsError::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let levels = h.eigenvalues();
    let nl = levels.len();
    let mut omegas = Vec::with_capacity(nl * nl);
    for &a in levels {
        for &b in levels {
            omegas.push(a - b);
        }
    }
    let g = window.converged_damping(&omegas, n_nodes)?;

    let v = h.eigenvectors();
    let level_of = h.level_of();
    let mut in_basis = v.adjoint() * rho.matrix() * v;
    for i in 0..in_basis.nrows() {
        for j in 0..in_basis.ncols() {
            let k = level_of[i] * nl + level_of[j];
            if level_of[i] != level_of[j] {
                in_basis[(i, j)] *= C64::from_polar(g[k], -omegas[k] * window.t0());
            }
        }
    }
    let out: CMatrix = v * in_basis * v.adjoint();
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityMatrix::from_raw(out, rho.dims().to_vec()))
}

/// Draws a local time t0 + δt from the truncated Gaussian of `window`.
pub fn sample_local_time<R: Rng + ?Sized>(rng: &mut R, window: &TimeWindow) -> f64 {
    let (hw, sigma) = (window.half_width, window.sigma);
    if hw >= 0.5 * sigma {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let s = sigma * z;
            if s.abs() <= hw {
                return window.t0 + s;
            }
        }
    }
    loop {
        let s = rng.random_range(-hw..=hw);
        let z = s / sigma;
        if rng.random::<f64>() < (-0.5 * z * z).exp() {
            return window.t0 + s;
        }
    }
}
