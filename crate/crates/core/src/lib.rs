//! Restricted divisor sums, Chowla–Walum sums `G_{a,alpha,j}(x)`, their
//! main-term asymptotics, exponent-pair bookkeeping and the numerical
//! experiments that estimate error-term exponents.

pub mod asymptotics;
pub mod bernoulli;
pub mod cw_sums;
pub mod divisors;
pub mod error;
pub mod experiments;
pub mod exponent_pairs;
pub mod numeric;
pub mod summatory;
pub mod verify;
pub mod wide;

pub use error::{CwError, Result};
pub use numeric::Exponent;
pub use wide::WideInt;
