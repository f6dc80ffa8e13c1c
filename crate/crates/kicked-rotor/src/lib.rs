//! Quantum and classical simulation of periodically kicked rotors, including
//! the sign-modified variant whose kick potential reverses every M kicks.
//!
//! The library covers four workflows:
//!
//! - **Time-domain quantum propagation** ([`quantum`]): split-operator FFT
//!   evolution of momentum-basis states, producing energy curves and
//!   momentum distributions P(m).
//! - **Propagator matrices** ([`floquet`]): dense one-kick and M-kick
//!   operators built from Bessel elements or spectral column propagation,
//!   truncated and diagonalized; average eigenvector Shannon entropy and
//!   matrix band width quantify localization.
//! - **Classical maps** ([`classical`]): the standard map and its
//!   sign-modulated counterpart, phase portraits, diffusion curves and
//!   transporting-island detection.
//! - **Lineshape analysis** ([`analysis`]): exponential fits of P(m),
//!   two-scale shape detection and energy-saturation checks.
//!
//! All numerics are generic over the scalar type through [`real::Real`];
//! `f64` is the production precision (deep lineshape tails sit near 1e-14)
//! and the `*64` aliases at the crate root are the types most code wants.

pub mod analysis;
pub mod bessel;
pub mod classical;
pub mod eig;
pub mod error;
pub mod floquet;
pub mod io;
pub mod params;
pub mod quantum;
pub mod real;
pub mod state;

pub use error::{Error, Result};
pub use params::{RotorParams, Sign, Variant};
pub use quantum::{evolve, Evolution, PropagationSchedule, SpectralPropagator};
pub use real::Real;
pub use state::{DistributionRecord, EnergyRecord, QuantumState};

/// Double-precision complex amplitude.
pub type C64 = num_complex::Complex<f64>;

pub type RotorParams64 = params::RotorParams<f64>;
pub type QuantumState64 = state::QuantumState<f64>;
pub type DistributionRecord64 = state::DistributionRecord<f64>;
pub type EnergyRecord64 = state::EnergyRecord<f64>;
pub type FloquetMatrix64 = floquet::FloquetMatrix<f64>;
pub type EigenstateSet64 = floquet::EigenstateSet<f64>;
pub type ClassicalEnsemble64 = classical::ClassicalEnsemble<f64>;
pub type LineshapeFit64 = analysis::LineshapeFit<f64>;
