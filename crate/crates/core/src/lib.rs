//! Construction and numerical verification of homographic solutions of the
//! generalized Lennard-Jones `(2+N)`- and `(3+N)`-body problems.
//!
//! Bodies interact through `U = sum_{k<j} (d^-beta - d^-alpha)` with unit
//! masses. Two poles sit on the z-axis at `+-r0` (plus a body at the origin
//! for `3+N`) and `N` bodies form a regular ring of radius
//! `sqrt(lambda^2 - 1) r0` in the xy-plane, so each pole sees the ring at
//! distance `lambda r0`.
//!
//! - [`potential`]: energy, gradient and accelerations of arbitrary states.
//! - [`configurations`]: the ring configurations and their rigidly rotating
//!   solutions.
//! - [`thresholds`]: existence thresholds in `lambda` and the radii bounding
//!   the non-circular family.
//! - [`radial`]: the reduced radial system of the non-circular family.
//! - [`integrator`]: direct integration of the full system.
//! - [`verify`]: residuals, deviations and geometric classification.

pub mod configurations;
pub mod error;
pub mod integrator;
pub mod numeric;
pub mod ode;
pub mod potential;
pub mod radial;
pub mod thresholds;
pub mod verify;

pub use configurations::{
    build_configuration, circular_radius, g1, g2, omega0, rotation, theta, CircularSolution, Family,
    LambdaDomain, RingConfiguration,
};
pub use error::{Error, Result};
pub use integrator::{
    angular_momentum, integrate, total_energy, IntegrationMethod, IntegrationSettings, Trajectory,
    TrajectorySample,
};
pub use potential::{
    accelerations, gradient, pair_kernel, potential_energy, BodyState, PotentialParams, SystemState, Vec3,
};
pub use radial::{RadialOrbit, RadialProblem, RadialSample};
pub use thresholds::{
    admissibility_holds, capital_lambda, find_lambda0, find_lambda1, find_lambda2, rbar, ThresholdReport,
};
pub use verify::{
    circular_residual, classify_geometry, rhombus_check, trajectory_deviation, Geometry, Tolerances,
    VerificationReport,
};
