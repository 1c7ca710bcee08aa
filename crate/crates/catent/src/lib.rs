//! Numerical toolkit for mixed microscopic-macroscopic "cat-like" quantum
//! states built from displaced thermal ensembles.
//!
//! The crate quantifies the entanglement of these states along two routes:
//! directly, through Schmidt coefficients, partial-transpose negativity and
//! covariance-matrix (Simon) criteria, and operationally, through the
//! entangling power of the state, i.e. the entanglement it transfers to two
//! initially uncorrelated qubits via local Jaynes-Cummings interactions.
//!
//! Modules:
//! - [`qmath`]: small dense complex linear algebra, partial transposition,
//!   negativity and linearized entropy.
//! - [`thermal`]: displaced thermal distributions and deterministic
//!   quadrature engines (2-D Gauss-Hermite and a 1-D radial rule with
//!   Bessel-weighted circular harmonics) for thermal averages.
//! - [`branches`]: exact state algebra for finite superpositions of
//!   coherent/Fock product branches (cats, entangled coherent states).
//! - [`analytics`]: closed-form entanglement formulas and two-mode
//!   covariance machinery including the Simon separability test.
//! - [`entpower`]: Jaynes-Cummings kernels and thermally averaged
//!   entangling-power curves for the three transfer schemes.
//! - [`fock`]: brute-force truncated-Fock reference implementation, used by
//!   the test suites to certify every closed form.
//! - [`sweep`]: CSV emission and parameter-sweep configuration for the CLI.

pub mod analytics;
pub mod branches;
pub mod entpower;
pub mod error;
pub mod fock;
pub mod qmath;
pub mod sweep;
pub mod thermal;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
