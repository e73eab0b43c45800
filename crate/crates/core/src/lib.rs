//! Single-excitation dynamics of arrays of giant emitters coupled to a
//! one-dimensional bosonic waveguide.
//!
//! Units are natural: `v_g = 1`, so `k0 = omega0`, lengths are measured in
//! `1/k0` and times in `1/omega0` whenever `omega0 = 1`.
//!
//! Three dynamical frameworks are provided:
//!
//! * [`volterra`]: exact non-Markovian dynamics (const- and lin-coupling
//!   waveguides) from a Volterra integral equation with closed-form kernels,
//! * [`dde`]: the retardation-only multi-delay differential equation,
//! * the Markovian limit through [`model::markovian_rate`] and
//!   [`states::effective_hamiltonian`].

pub mod analysis;
pub mod dde;
pub mod eigen;
pub mod error;
pub mod field;
pub mod geometry;
pub mod model;
pub mod quad;
pub mod specfun;
pub mod states;
pub mod trajectory;
pub mod volterra;

pub use error::{Error, Result};
pub use geometry::{CouplingLayout, PhaseMatrix};
pub use model::{CouplingModel, WaveguideSetup};
pub use states::{AmplitudeVector, StateLabel};
pub use trajectory::{AmplitudeTrajectory, Framework};

pub use num_complex::Complex64 as C64;
