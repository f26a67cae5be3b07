//! Sizes of balls of permutations under the infinity (Chebyshev) metric.
//!
//! A ball of radius `r` in `S_n` has exactly `per(A_{r,n})` elements, where
//! `A_{r,n}` is the 0/1 band matrix with ones on `|i - j| <= r`. This crate
//! computes that number exactly for moderate sizes ([`oracle`]), evaluates
//! closed-form lower and upper bounds on its logarithm for any size
//! ([`bounds`]), and tabulates their asymptotic exponents, gaps and the
//! resulting code-rate bounds ([`asym`], [`rates`]).

pub mod asym;
pub mod bounds;
pub mod error;
pub mod metric;
pub mod oracle;
pub mod qmat;
pub mod rates;
pub mod scalar;

pub use error::{Error, Result};
pub use metric::{
    band_entry, infinity_distance, nearest_admissible_n, radius_from_rho, BallSpec, BandMatrix,
    NormalizedRadius, PermutationVector,
};
pub use oracle::{
    ball_size_band_dp, ball_size_enumerate, ball_size_exact, permanent_ryser, Backend, CapacityLimits,
    ExactCount,
};
pub use scalar::Bits;
