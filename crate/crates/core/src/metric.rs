//! Permutations, the infinity metric and the banded 0/1 Toeplitz matrix.
//!
//! Indices are one-based at the API surface: a permutation of length `n`
//! stores `f(1), ..., f(n)` with values in `1..=n`, and matrix entries are
//! addressed as `(i, j)` with `1 <= i, j <= n`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{1, ..., n}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationVector {
    image: Vec<usize>,
}

impl PermutationVector {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::Validation("permutation must have length >= 1".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v == 0 || v > n {
                return Err(Error::Validation(format!("entry {v} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::Validation(format!("entry {v} repeated")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `f(i)` for one-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }

    /// The composition `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "cannot compose permutations of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self { image: other.image.iter().map(|&k| self.image[k - 1]).collect() })
    }
}

impl fmt::Display for PermutationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for PermutationVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let image = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Validation(format!("bad permutation entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }
}

/// `max_i |f(i) - g(i)|`.
pub fn infinity_distance(f: &PermutationVector, g: &PermutationVector) -> Result<usize> {
    if f.len() != g.len() {
        return Err(Error::Dimension(format!(
            "permutations have lengths {} and {}",
            f.len(),
            g.len()
        )));
    }
    Ok(f.image.iter().zip(&g.image).map(|(&a, &b)| a.abs_diff(b)).max().unwrap_or(0))
}

/// A ball radius `r` in `S_n`, with `0 <= r <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallSpec {
    n: usize,
    r: usize,
}

impl BallSpec {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("n must be positive".into()));
        }
        if r >= n {
            return Err(Error::Validation(format!("radius r={r} must satisfy r <= n-1 = {}", n - 1)));
        }
        Ok(Self { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `r / (n - 1)`, or 0 when `n = 1`.
    pub fn rho(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            self.r as f64 / (self.n - 1) as f64
        }
    }

    /// True when `2r <= n - 1`, the lower branch of the piecewise bounds.
    pub fn is_low_regime(&self) -> bool {
        2 * self.r < self.n
    }
}

impl fmt::Display for BallSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, r={})", self.n, self.r)
    }
}

/// Indicator of `|i - j| <= r`, for one-based indices.
pub fn band_entry(spec: BallSpec, i: usize, j: usize) -> Result<u8> {
    if i == 0 || j == 0 || i > spec.n || j > spec.n {
        return Err(Error::Dimension(format!("index ({i}, {j}) outside 1..={}", spec.n)));
    }
    Ok(u8::from(i.abs_diff(j) <= spec.r))
}

/// The 0/1 band matrix `A_{r,n}`. Entries are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandMatrix {
    spec: BallSpec,
}

impl BandMatrix {
    pub fn new(spec: BallSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> BallSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Entry at one-based `(i, j)`; panics on out-of-range indices.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        assert!(i >= 1 && j >= 1 && i <= self.spec.n && j <= self.spec.n);
        u8::from(i.abs_diff(j) <= self.spec.r)
    }

    /// One-based column range of the support of row `i`.
    pub fn row_support(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        let lo = i.saturating_sub(self.spec.r).max(1);
        let hi = (i + self.spec.r).min(self.spec.n);
        lo..=hi
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row_support(i).count()
    }

    /// Dense copy, for the generic permanent and balancing routines.
    pub fn to_dense_u64(&self) -> Array2<u64> {
        let n = self.spec.n;
        Array2::from_shape_fn((n, n), |(a, b)| u64::from(a.abs_diff(b) <= self.spec.r))
    }

    pub fn to_dense_f64(&self) -> Array2<f64> {
        self.to_dense_u64().mapv(|v| v as f64)
    }
}

/// Largest denominator accepted when parsing a normalized radius.
pub const RHO_MAX_DENOMINATOR: u64 = 1_000_000;

/// The normalized radius `ρ ∈ [0, 1]`, held as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalizedRadius {
    rho: Ratio<u64>,
}

impl NormalizedRadius {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Validation("rho denominator is zero".into()));
        }
        let rho = Ratio::new(numer, denom);
        if rho > Ratio::from_integer(1) {
            return Err(Error::Validation(format!("rho={rho} exceeds 1")));
        }
        if *rho.denom() > RHO_MAX_DENOMINATOR {
            return Err(Error::Validation(format!(
                "rho={rho} has denominator above {RHO_MAX_DENOMINATOR}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.rho
    }

    pub fn to_f64(&self) -> f64 {
        self.rho.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for NormalizedRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rho)
    }
}

impl FromStr for NormalizedRadius {
    type Err = Error;

    /// Accepts `p/q` fractions and plain decimals such as `0.25`. Decimals
    /// are read digit by digit, so `0.1` is exactly one tenth.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Validation(format!("cannot parse rho {s:?}: {why}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?;
            let q = q.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?;
            return Self::new(p, q);
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("empty"));
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad("expected digits"));
        }
        let frac_part = frac_part.trim_end_matches('0');
        if frac_part.len() > 6 {
            return Err(bad("more than 6 decimal places (denominator limit 10^6)"));
        }
        let denom = 10u64.pow(frac_part.len() as u32);
        let whole = if int_part.is_empty() { 0 } else { int_part.parse::<u64>().map_err(|e| bad(&e.to_string()))? };
        let frac = if frac_part.is_empty() { 0 } else { frac_part.parse::<u64>().map_err(|e| bad(&e.to_string()))? };
        Self::new(whole * denom + frac, denom)
    }
}

/// Converts `ρ` to the radius `ρ·(n-1)`, refusing non-integral products.
pub fn radius_from_rho(rho: NormalizedRadius, n: usize) -> Result<BallSpec> {
    if n == 0 {
        return Err(Error::Validation("n must be positive".into()));
    }
    let product = rho.rho * Ratio::from_integer((n - 1) as u64);
    if !product.is_integer() {
        let nearest = nearest_admissible_n(rho, n);
        let value = product.to_f64().unwrap_or(f64::NAN);
        return Err(Error::Validation(format!(
            "rho*(n-1)={value} not integral; nearest admissible n is {nearest}"
        )));
    }
    let r = product.to_integer() as usize;
    BallSpec::new(n, r)
}

/// Nearest `n' >= 1` (ties resolved downwards) for which `ρ·(n'-1)` is an integer.
pub fn nearest_admissible_n(rho: NormalizedRadius, n: usize) -> usize {
    let q = *rho.rho.denom() as usize;
    if rho.rho.numer().is_zero() {
        return n.max(1);
    }
    let m = n.saturating_sub(1);
    let below = m - m % q;
    let above = below + q;
    if m - below <= above - m {
        below + 1
    } else {
        above + 1
    }
}
