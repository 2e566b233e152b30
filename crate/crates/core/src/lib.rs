//! Square-free values of integer polynomials.
//!
//! Exact counts of `n <= N` with `f(n)` square-free or square-full, the
//! density `c_f` as a truncated Euler product with a rigorous tail bound,
//! local root counts `ρ_f(m)`, the congruence lattices `Λ_{m,n}` and the
//! counts `U_k(m, H, N)`, and averages over height-`H` polynomial families.

pub mod arith;
pub mod counting;
pub mod density;
pub mod error;
pub mod family;
pub mod lattice;
pub mod poly;
pub mod real;
pub mod serde_util;

pub use counting::{CountResult, Decomposition, Method};
pub use density::DensityResult;
pub use error::{Error, Result};
pub use family::{AverageReport, DensityModel, ExperimentOptions, FamilySpec, Mode, SquarefullAverage};
pub use lattice::{DyadicSum, LatticeData, MinimaResult, UkCount};
pub use poly::Polynomial;
pub use real::Real;

/// Crate version, recorded in machine-readable reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
