//! Numerical optimal-control engine for storage and retrieval of a broadband
//! single photon in a three- or four-level atomic ensemble.
//!
//! The propagation of a weak quantum field through the ensemble is described
//! by Maxwell–Bloch equations for the field envelope `E`, the optical
//! coherences `P1`, `P2`, and the ground-state spin wave `S` on a
//! dimensionless co-moving grid `(z, tau)`. Storage maps an input photon
//! envelope onto the spin wave; backward retrieval is governed by the adjoint
//! system of the storage optimization, so one backward solve yields both the
//! retrieval efficiency and the functional gradient used for gradient-ascent
//! pulse shaping.
//!
//! Crate layout mirrors the physics:
//!
//! - [`medium`]: ⁸⁷Rb level data, relative dipole moments, unit conversions.
//! - [`grid`]: computational domain, quadrature, photon waveforms, control
//!   pulses, discretized field states.
//! - [`dynamics`]: forward (storage) solver, adjoint (retrieval) solver,
//!   four-wave-mixing variant, efficiency and energy-balance reports.
//! - [`optimizer`]: functional gradient and Wolfe-line-search gradient ascent.
//! - [`noise`]: spectral-wandering averages and pure-dephasing Monte Carlo.
//! - [`sweeps`]: multi-point studies (optical-depth scans, detuning scans,
//!   configuration tables) with JSON persistence.

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod medium;
pub mod noise;
pub mod optimizer;
pub mod sweeps;

pub use dynamics::{
    compute_efficiencies, energy_balance, solve_adjoint, solve_storage, solve_storage_fwm,
    EfficiencyReport, FwmSolution,
};
pub use error::{Error, Result};
pub use grid::{ControlPulse, FieldState, PhotonWaveform, SimGrid, WaveformKind};
pub use medium::{pulse_energy, rabi_to_peak_power, LevelScheme, Rb87Catalog};
pub use optimizer::{ascend, cross_evaluate, functional_gradient, AscentConfig, OptimizationResult};

/// Version tag embedded in sweep provenance; bump when catalog data changes.
pub const CATALOG_VERSION: &str = "rb87-v1";

/// Schema version stamped on every persisted output.
pub const FORMAT_VERSION: u32 = 1;
