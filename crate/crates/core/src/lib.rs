//! Numerical toolkit for quantum systems whose isolated parts carry their own
//! emergent local time.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] : dense state vectors, density matrices, spectral
//!   decompositions, partial traces and Schmidt forms.
//! * [`composite`] : composite Hamiltonians, detection of approximately
//!   isolated blocks, multi-time product evolution and restructuring
//!   trajectories.
//! * [`lts_map`] : the Gaussian time-averaged map, its indeterminacy bound and
//!   the truncated-Gaussian local-time sampler.
//! * [`metrics`] : distinguishability overlap, individuality, orthogonal
//!   transition time bounds and random-coefficient moments.
//! * [`reversibility`] : transition tables, relative entropy, detailed balance
//!   and the plain-irreversibility experiment.
//! * [`decay`] : rational clock rates, nonexponential survival and the
//!   mother/daughter chain.
//! * [`reduced`] : the four-body reduced-state cascade under merging and
//!   restructuring.
//!
//! Units: ħ = 1 throughout, energies are angular frequencies.

pub mod composite;
pub mod decay;
mod error;
pub mod lts_map;
pub mod metrics;
pub mod numerics;
pub mod quantum;
pub mod reduced;
pub mod reversibility;

pub use error::{LtsError, Result};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for operators.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector used for amplitudes.
pub type CVector = nalgebra::DVector<C64>;

pub use composite::{CompositeHamiltonian, LocalTimeAssignment, Partition, Subsystem, Trajectory};
pub use decay::{DecaySpecies, RationalClockRate};
pub use lts_map::TimeWindow;
pub use metrics::{BlockSpectra, TimeOffsets};
pub use quantum::{DensityMatrix, SpectralDecomposition, StateVector};
pub use reduced::FourBodyAmplitudes;
pub use reversibility::TransitionTable;
