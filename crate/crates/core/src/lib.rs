//! Free-space stimulated Compton modulation of electron beams.
//!
//! Two counter-propagating Gaussian beams with photon energies differing by
//! `ħΩ` drive the electron through their ponderomotive beat. Without recoil the
//! electron ends in a Bessel comb over the index ℓ of exchanged quanta; with
//! recoil the two-index lattice `α_{ℓ1ℓ2}` has to be integrated along z.

pub mod comb;
pub mod error;
pub mod expm;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod problem;
pub mod special;
pub mod spectrum;
pub mod units;

pub use comb::{comb_coefficients, comb_coefficients_with, phase_integral, sideband_sigma, PhaseIntegralResult};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use problem::{DimensionlessProblem, Numerics};
pub use spectrum::{Provenance, SidebandSpectrum};
pub use units::{BeamParams, Kinematics, LabConfig};
