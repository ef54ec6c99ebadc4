//! Phonon blockade in two Coulomb-coupled Kerr resonators, with optional
//! optomechanical readout through a cavity coupled to the first resonator.
//!
//! Rates and frequencies are in units of the mechanical damping `γ`. Mode
//! order on composite spaces is `(b1, b2)` or `(b1, b2, a)`, with the first
//! mode most significant in the basis index.
//!
//! ```
//! use phonoblock::{single_drive_optimal, solve_system, Branch, MechParams, Observables, SteadyOptions, SystemSpec};
//!
//! let opt = single_drive_optimal(1.5, 1.0, Branch::Plus).unwrap();
//! let spec = SystemSpec::mech(MechParams {
//!     delta: opt.delta_opt,
//!     u: opt.u_opt,
//!     j: 1.5,
//!     omega1: 0.1,
//!     ..Default::default()
//! });
//! let obs = Observables::solve(&spec, &[5, 5], &SteadyOptions::default()).unwrap();
//! assert!(obs.g2_b.unwrap() < 0.05);
//! ```

pub mod correl;
pub mod error;
pub mod fock;
pub mod model;
pub mod optimal;
mod sparse;
pub mod steady;
pub mod sweep;
pub mod verify;

pub use correl::{g2_tau, g2_zero, occupation, CorrelationSeries, Observables, OCCUPANCY_FLOOR};
pub use error::{Error, Result};
pub use fock::{create, destroy, expectation, kron, number, HilbertSpace, OperatorMatrix, StorageKind};
pub use model::{
    build_liouvillian, build_mech_hamiltonian, build_total_hamiltonian, coulomb_coupling, thermal_occupation,
    CoulombGeometry, MechParams, OmParams, Superoperator, SystemSpec,
};
pub use optimal::{
    amplitude_g2, amplitude_steady_state, determinant_residual, quadratic_coeffs, scaled_determinant_residual,
    single_drive_optimal, two_drive_optimal, AmplitudeState, Branch, QuadraticCoeffs, SingleDriveOptimum,
    TwoDriveOptimum, X22Phase,
};
pub use steady::{
    convergence_check, evolve, solve_system, steady_state, ConvergenceReport, EvolveOptions, SteadyOptions,
    SteadySolution,
};
pub use sweep::{run_sweep, SweepConfig, SweepRecord, SweepResult};
pub use verify::{run_oracle_suite, VerificationReport};
