//! Exact ball sizes.
//!
//! Three independent algorithms compute `|B_{r,n}| = per(A_{r,n})`: brute
//! force over `S_n`, Ryser's formula on the dense band matrix, and a
//! transfer DP that sweeps the band one column at a time. They are meant to
//! check each other; [`ball_size_exact`] picks the cheapest one or, in
//! verification mode, runs all that fit and insists they agree.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{BallSpec, BandMatrix, PermutationVector};
use crate::scalar::log2_biguint;

/// Default upper bound on `n` for brute-force enumeration.
pub const ENUMERATE_MAX_N: usize = 10;
/// Default upper bound on `n` for Ryser's formula.
pub const RYSER_MAX_N: usize = 30;
/// Default upper bound on the DP window width `2r + 1`.
pub const BAND_DP_MAX_WINDOW: usize = 26;
/// Hard limit on the DP window: the occupancy mask is a `u64`.
pub const BAND_DP_HARD_WINDOW: usize = 63;

/// Size limits for the exact backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityLimits {
    pub enumerate_max_n: usize,
    pub ryser_max_n: usize,
    pub dp_max_window: usize,
}

impl Default for CapacityLimits {
    fn default() -> Self {
        CapacityLimits {
            enumerate_max_n: ENUMERATE_MAX_N,
            ryser_max_n: RYSER_MAX_N,
            dp_max_window: BAND_DP_MAX_WINDOW,
        }
    }
}

impl CapacityLimits {
    /// Limits raised as far as the representations allow. Expect long runtimes.
    pub fn expert() -> Self {
        CapacityLimits { enumerate_max_n: 13, ryser_max_n: 40, dp_max_window: BAND_DP_HARD_WINDOW }
    }
}

/// `|B_{r,n}|` as an arbitrary-precision integer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCount(BigUint);

impl ExactCount {
    /// Wraps `value` after checking `1 <= value <= n!`.
    pub fn new(spec: BallSpec, value: BigUint) -> Result<Self> {
        if value.is_zero() || value > factorial(spec.n()) {
            return Err(Error::Contract(format!("count {value} outside [1, {}!]", spec.n())));
        }
        Ok(ExactCount(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn log2(&self) -> f64 {
        log2_biguint(&self.0)
    }
}

impl fmt::Display for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Which exact algorithm produced a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Enumerate,
    Ryser,
    BandDp,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Enumerate, Backend::Ryser, Backend::BandDp];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Enumerate => "enumerate",
            Backend::Ryser => "ryser",
            Backend::BandDp => "band_dp",
        }
    }

    /// Whether this backend can handle `spec` under `limits`.
    pub fn applicable(self, spec: BallSpec, limits: &CapacityLimits) -> bool {
        match self {
            Backend::Enumerate => spec.n() <= limits.enumerate_max_n,
            Backend::Ryser => spec.n() <= limits.ryser_max_n,
            Backend::BandDp => dp_window(spec) <= limits.dp_max_window.min(BAND_DP_HARD_WINDOW),
        }
    }

    /// Rough operation count, used only to rank backends.
    pub fn cost(self, spec: BallSpec) -> f64 {
        let n = spec.n() as f64;
        match self {
            Backend::Enumerate => (1..=spec.n()).map(|k| k as f64).product::<f64>() * n,
            Backend::Ryser => n.exp2() * n,
            Backend::BandDp => {
                let r = effective_radius(spec);
                let states: f64 = (1..=r).map(|k| (r + k) as f64 / k as f64).product();
                n * states * (2 * r + 1) as f64
            }
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Backend::Enumerate),
            "ryser" => Ok(Backend::Ryser),
            "band_dp" => Ok(Backend::BandDp),
            _ => Err(Error::Validation(format!("unknown backend {s:?}"))),
        }
    }
}

/// Counts `g` with `d∞(center, g) <= r` by running through all of `S_n`
/// with Heap's algorithm.
pub fn count_ball_around(center: &PermutationVector, r: usize, limits: &CapacityLimits) -> Result<BigUint> {
    let n = center.len();
    if n > limits.enumerate_max_n {
        return Err(Error::Capacity(format!(
            "enumeration limited to n <= {}, got n={n}; use the band DP",
            limits.enumerate_max_n
        )));
    }
    let c = center.as_slice();
    let mut perm: Vec<usize> = (1..=n).collect();
    let within = |p: &[usize]| p.iter().zip(c).all(|(&a, &b)| a.abs_diff(b) <= r);
    let mut count: u64 = u64::from(within(&perm));
    let mut stack = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            if within(&perm) {
                count += 1;
            }
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    Ok(BigUint::from(count))
}

/// `|B_{r,n}|` by exhaustive generation.
pub fn ball_size_enumerate(spec: BallSpec) -> Result<ExactCount> {
    ball_size_enumerate_with(spec, &CapacityLimits::default())
}

pub fn ball_size_enumerate_with(spec: BallSpec, limits: &CapacityLimits) -> Result<ExactCount> {
    let count = count_ball_around(&PermutationVector::identity(spec.n()), spec.r(), limits)?;
    ExactCount::new(spec, count)
}

/// Exact permanent by Ryser's inclusion-exclusion formula with Gray-code
/// subset order.
pub fn permanent_ryser(m: &Array2<u64>) -> Result<BigUint> {
    permanent_ryser_with(m, &CapacityLimits::default())
}

pub fn permanent_ryser_with(m: &Array2<u64>, limits: &CapacityLimits) -> Result<BigUint> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::Dimension(format!("permanent needs a square matrix, got {rows}x{cols}")));
    }
    let n = rows;
    if n > limits.ryser_max_n {
        return Err(Error::Capacity(format!(
            "Ryser limited to n <= {}, got n={n}; use the band DP for band matrices",
            limits.ryser_max_n
        )));
    }
    if n == 0 {
        return Ok(BigUint::one());
    }
    // per(M) = (-1)^n Σ_{S ⊆ cols} (-1)^{|S|} Π_i Σ_{j∈S} m_ij
    let mut row_sums = vec![0i128; n];
    let mut small: i128 = 0;
    let mut big = BigInt::zero();
    let mut subset: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        let adding = subset & bit == 0;
        subset ^= bit;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let v = m[[i, j]] as i128;
            if adding {
                *s += v;
            } else {
                *s -= v;
            }
        }
        let negative = (subset.count_ones() as usize + n) % 2 == 1;
        match row_sums.iter().try_fold(1i128, |acc, &s| acc.checked_mul(s)) {
            Some(p) => {
                let term = if negative { -p } else { p };
                match small.checked_add(term) {
                    Some(v) => small = v,
                    None => {
                        big += BigInt::from(small) + BigInt::from(term);
                        small = 0;
                    }
                }
            }
            None => {
                let p: BigInt = row_sums.iter().map(|&s| BigInt::from(s)).product();
                if negative {
                    big -= p;
                } else {
                    big += p;
                }
            }
        }
    }
    let total = big + BigInt::from(small);
    match total.sign() {
        Sign::Minus => Err(Error::Consistency("negative permanent from a non-negative matrix".into())),
        _ => Ok(total.magnitude().clone()),
    }
}

/// `|B_{r,n}|` as Ryser's permanent of the dense band matrix.
pub fn ball_size_ryser(spec: BallSpec, limits: &CapacityLimits) -> Result<ExactCount> {
    if spec.n() > limits.ryser_max_n {
        return Err(Error::Capacity(format!(
            "Ryser limited to n <= {}, got n={}; use the band DP",
            limits.ryser_max_n,
            spec.n()
        )));
    }
    let per = permanent_ryser_with(&BandMatrix::new(spec).to_dense_u64(), limits)?;
    ExactCount::new(spec, per)
}

/// Bit layout of the DP occupancy window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowEncoding {
    /// Bit `k` marks row `j - r + k`; the window advances by a right shift.
    LowBitOldest,
    /// Bit `2r - k` marks row `j - r + k`; the window advances by a left shift.
    HighBitOldest,
}

// Radii beyond n - 1 add no permutations.
fn effective_radius(spec: BallSpec) -> usize {
    spec.r().min(spec.n().saturating_sub(1))
}

fn dp_window(spec: BallSpec) -> usize {
    2 * effective_radius(spec) + 1
}

/// `|B_{r,n}|` by the column-sweep transfer DP.
pub fn ball_size_band_dp(spec: BallSpec) -> Result<ExactCount> {
    ball_size_band_dp_with(spec, WindowEncoding::LowBitOldest, &CapacityLimits::default())
}

/// Column `j` may take any free row in `j-r ..= j+r`. The state is the set of
/// already-used rows in that window. Rows below 1 start out marked as used,
/// rows above `n` are never chosen, and before sliding to the next column the
/// oldest row must be used because no later column can reach it.
pub fn ball_size_band_dp_with(
    spec: BallSpec,
    encoding: WindowEncoding,
    limits: &CapacityLimits,
) -> Result<ExactCount> {
    let n = spec.n();
    let r = effective_radius(spec);
    let w = 2 * r + 1;
    let max_w = limits.dp_max_window.min(BAND_DP_HARD_WINDOW);
    if w > max_w {
        return Err(Error::Capacity(format!(
            "band DP window 2r+1={w} exceeds {max_w}; use Ryser for n <= {}",
            limits.ryser_max_n
        )));
    }
    let full: u64 = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    let slot = |k: usize| -> u64 {
        match encoding {
            WindowEncoding::LowBitOldest => 1u64 << k,
            WindowEncoding::HighBitOldest => 1u64 << (w - 1 - k),
        }
    };
    let oldest = slot(0);
    let advance = |mask: u64| -> u64 {
        match encoding {
            WindowEncoding::LowBitOldest => mask >> 1,
            WindowEncoding::HighBitOldest => (mask << 1) & full,
        }
    };

    let initial: u64 = (0..r).map(slot).fold(0, |a, b| a | b);
    let mut states: HashMap<u64, BigUint> = HashMap::from([(initial, BigUint::one())]);
    for j in 1..=n {
        let mut next: HashMap<u64, BigUint> = HashMap::with_capacity(states.len() * 2);
        for (mask, ways) in states {
            for k in 0..w {
                // window slot k is row j - r + k
                let row = j + k;
                if row <= r || row - r > n {
                    continue;
                }
                let b = slot(k);
                if mask & b != 0 {
                    continue;
                }
                let placed = mask | b;
                if placed & oldest == 0 {
                    continue;
                }
                *next.entry(advance(placed)).or_insert_with(BigUint::zero) += &ways;
            }
        }
        states = next;
    }
    let total: BigUint = states.into_values().sum();
    ExactCount::new(spec, total)
}

/// How [`ball_size_exact`] should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExactOptions {
    pub limits: CapacityLimits,
    /// Run every applicable backend and require agreement.
    pub verify: bool,
}

/// A count together with the backends that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub count: ExactCount,
    pub backend: Backend,
    pub agreed: Vec<Backend>,
}

fn run_backend(backend: Backend, spec: BallSpec, limits: &CapacityLimits) -> Result<ExactCount> {
    match backend {
        Backend::Enumerate => ball_size_enumerate_with(spec, limits),
        Backend::Ryser => ball_size_ryser(spec, limits),
        Backend::BandDp => ball_size_band_dp_with(spec, WindowEncoding::LowBitOldest, limits),
    }
}

/// `|B_{r,n}|` from the cheapest applicable backend.
pub fn ball_size_exact(spec: BallSpec) -> Result<ExactCount> {
    Ok(ball_size_exact_with(spec, &ExactOptions::default())?.count)
}

pub fn ball_size_exact_with(spec: BallSpec, options: &ExactOptions) -> Result<ExactResult> {
    let mut usable: Vec<Backend> =
        Backend::ALL.into_iter().filter(|b| b.applicable(spec, &options.limits)).collect();
    if usable.is_empty() {
        return Err(Error::Capacity(format!(
            "no exact backend for n={}, r={}: need n <= {} (Ryser) or 2r+1 <= {} (band DP)",
            spec.n(),
            spec.r(),
            options.limits.ryser_max_n,
            options.limits.dp_max_window
        )));
    }
    usable.sort_by(|a, b| a.cost(spec).total_cmp(&b.cost(spec)));
    let primary = usable[0];
    let count = run_backend(primary, spec, &options.limits)?;
    let mut agreed = vec![primary];
    if options.verify {
        for &other in &usable[1..] {
            let c = run_backend(other, spec, &options.limits)?;
            if c != count {
                return Err(Error::Consistency(format!(
                    "backends disagree at n={}, r={}: {primary}={count}, {other}={c}",
                    spec.n(),
                    spec.r()
                )));
            }
            agreed.push(other);
        }
        if primary == Backend::BandDp || usable.contains(&Backend::BandDp) {
            let mirrored = ball_size_band_dp_with(spec, WindowEncoding::HighBitOldest, &options.limits)?;
            if mirrored != count {
                return Err(Error::Consistency(format!(
                    "band DP encodings disagree at n={}, r={}",
                    spec.n(),
                    spec.r()
                )));
            }
        }
    }
    Ok(ExactResult { count, backend: primary, agreed })
}
