use thiserror::Error;

/// Errors raised by the laboratory's numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two bodies are closer than the singularity cutoff.
    #[error("singular configuration: bodies {i} and {j} are {distance:e} apart")]
    Singularity { i: usize, j: usize, distance: f64 },

    /// The squared angular speed of a candidate relative equilibrium is negative.
    #[error("no circular solution: omega0^2 = {omega0_sq:e} < 0")]
    ExistenceViolation { omega0_sq: f64 },

    /// A threshold search ran past its upper limit without the predicate settling.
    #[error("threshold search for {what} failed below lambda = {limit:e}")]
    SearchFailure { what: &'static str, limit: f64 },

    /// The ODE integrator could not continue.
    #[error("integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    /// The requested energy does not lie inside the bounded, admissible window.
    #[error("energy h = {h:e} outside the admissible window ({lower:e}, {upper:e})")]
    EnergyWindow { h: f64, lower: f64, upper: f64 },

    /// The squared angular rate went negative along a radial orbit.
    #[error("inadmissible radius r = {r}: omega_dot^2 = {value:e} < 0 at t = {time}")]
    Admissibility { time: f64, r: f64, value: f64 },

    /// Two sampled trajectories do not share a time grid.
    #[error("time grids differ: {0}")]
    GridMismatch(String),

    /// A check expected a different number of bodies.
    #[error("expected {expected} bodies, found {found}")]
    BodyCount { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
