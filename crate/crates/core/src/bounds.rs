//! Finite-`n` bounds on `log2 |B_{r,n}|`.
//!
//! Lower bounds come from the doubly-stochastic functional
//!
//! ```text
//! log2 per(M) >= log2(n!/n^n) + Σ -q_ij·log2(q_ij / m_ij)
//! ```
//!
//! evaluated at the matrices of [`crate::qmat`], and from its Bethe
//! variant. The closed forms below are those functionals evaluated in
//! closed form for particular `Q`, plus the Brégman-type upper bound.
//!
//! Out-of-range requests do not fail: they come back as a [`BoundValue`]
//! with `valid == false` and a reason, so tables can show the gap.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{BallSpec, BandMatrix};
use crate::qmat::{sinkhorn_balance, BandEntries, SecondLow, StochasticMatrix};
use crate::scalar::{alpha_high_root, log2_factorial, log2_sqrt_two_pi, omega_r_log2, sr_sums, Bits, LOG2_E};

/// Largest `n` for which the generic families run Sinkhorn on the dense band.
pub const GENERIC_MAX_N: usize = 64;

/// Tolerance on `Q`'s row/column sums accepted by the functionals.
const FUNCTIONAL_SUM_TOL: f64 = 1e-6;

/// Bound families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Lower bound from the piecewise-constant `Q`.
    Phi1,
    /// Brégman-type upper bound.
    Phi1Upper,
    /// Lower bound from the exact `Ω_r` formula (narrow band only).
    Phi1Prime,
    /// Lower bound from the piecewise-constant `Q`, sharper constant.
    Phi2,
    /// Lower bound from the geometric `Q` families.
    Phi3,
    /// Sinkhorn fixed point plugged into the functional.
    VdwGeneric,
    /// Sinkhorn fixed point plugged into the Bethe functional.
    BetheGeneric,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Phi1,
        Family::Phi1Upper,
        Family::Phi1Prime,
        Family::Phi2,
        Family::Phi3,
        Family::VdwGeneric,
        Family::BetheGeneric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Phi1 => "phi1",
            Family::Phi1Upper => "Phi1",
            Family::Phi1Prime => "phi1_prime",
            Family::Phi2 => "phi2",
            Family::Phi3 => "phi3",
            Family::VdwGeneric => "vdw_generic",
            Family::BetheGeneric => "bethe_generic",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Family::Phi1Upper => Direction::Upper,
            _ => Direction::Lower,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown family {s:?}")))
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

/// A bound on `log2 |B_{r,n}|`, or the reason it does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub family: Family,
    pub direction: Direction,
    pub spec: BallSpec,
    pub bits: Option<Bits>,
    pub invalid_reason: Option<String>,
}

impl BoundValue {
    fn valid(family: Family, spec: BallSpec, bits: f64) -> Self {
        BoundValue { family, direction: family.direction(), spec, bits: Some(Bits(bits)), invalid_reason: None }
    }

    fn invalid(family: Family, spec: BallSpec, reason: impl Into<String>) -> Self {
        BoundValue { family, direction: family.direction(), spec, bits: None, invalid_reason: Some(reason.into()) }
    }

    pub fn is_valid(&self) -> bool {
        self.bits.is_some()
    }

    pub fn record(&self) -> BoundRecord {
        BoundRecord {
            family: self.family,
            direction: self.direction,
            n: self.spec.n(),
            r: self.spec.r(),
            bits: self.bits.map(|b| b.0),
            valid: self.is_valid(),
        }
    }
}

/// Flat row form of a [`BoundValue`]: `family,direction,n,r,bits,valid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub family: Family,
    pub direction: Direction,
    pub n: usize,
    pub r: usize,
    pub bits: Option<f64>,
    pub valid: bool,
}

/// `log2(n!/n^n)`.
pub fn log2_vdw_floor(n: usize) -> f64 {
    log2_factorial(n as u64).0 - n as f64 * (n as f64).log2()
}

fn check_pair(m: &Array2<f64>, q: &StochasticMatrix<f64>) -> Result<()> {
    if m.dim() != q.entries().dim() || m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {:?} but Q is {:?}",
            m.dim(),
            q.entries().dim()
        )));
    }
    if q.residual() > FUNCTIONAL_SUM_TOL {
        return Err(Error::Contract(format!("Q is not doubly stochastic (residual {:e})", q.residual())));
    }
    for ((i, j), &qv) in q.entries().indexed_iter() {
        if qv > 0.0 && !(m[[i, j]] > 0.0) {
            return Err(Error::Contract(format!(
                "Q has support outside M at ({}, {}): q={qv}, m={}",
                i + 1,
                j + 1,
                m[[i, j]]
            )));
        }
    }
    Ok(())
}

/// `log2(n!/n^n) + Σ -q·log2(q/m)` with `0·log 0 = 0`.
pub fn vdw_sinkhorn_bound(m: &Array2<f64>, q: &StochasticMatrix<f64>) -> Result<Bits> {
    check_pair(m, q)?;
    let entropy: f64 = q
        .entries()
        .iter()
        .zip(m.iter())
        .filter(|(&qv, _)| qv > 0.0)
        .map(|(&qv, &mv)| -qv * (qv / mv).log2())
        .sum();
    Ok(Bits(log2_vdw_floor(m.nrows()) + entropy))
}

/// `Σ [-q·log2(q/m) + (1-q)·log2(1-q)]` over the support of `Q`.
pub fn bethe_bound(m: &Array2<f64>, q: &StochasticMatrix<f64>) -> Result<Bits> {
    check_pair(m, q)?;
    let total: f64 = q
        .entries()
        .iter()
        .zip(m.iter())
        .filter(|(&qv, _)| qv > 0.0)
        .map(|(&qv, &mv)| -qv * (qv / mv).log2() + one_minus_term(qv))
        .sum();
    Ok(Bits(total))
}

// (1-q)·log2(1-q), zero at q = 1
fn one_minus_term(q: f64) -> f64 {
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - q) * (-q).ln_1p() / std::f64::consts::LN_2
    }
}

/// The functional with `M = A_{r,n}` and `Q` given cell by cell; only band
/// cells are visited.
pub fn vdw_band_bound(q: &impl BandEntries) -> Bits {
    let spec = q.spec();
    Bits(log2_vdw_floor(spec.n()) + band_sum(q, |lq, qv| -qv * lq))
}

/// The Bethe functional with `M = A_{r,n}` and `Q` given cell by cell.
pub fn bethe_band_bound(q: &impl BandEntries) -> Bits {
    Bits(band_sum(q, |lq, qv| -qv * lq + one_minus_term(qv)))
}

fn band_sum(q: &impl BandEntries, term: impl Fn(f64, f64) -> f64) -> f64 {
    let band = BandMatrix::new(q.spec());
    (1..=q.spec().n())
        .map(|i| {
            band.row_support(i)
                .map(|j| {
                    let lq = q.log2_entry(i, j);
                    term(lq, lq.exp2())
                })
                .sum::<f64>()
        })
        .sum()
}

/// The five blocks of `Σ q·log2 q` for the narrow geometric `Q`, grouped by
/// columns: left corner block, the rest of the left columns, the middle
/// columns, and the mirror images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TDecomposition {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
}

impl TDecomposition {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2 + self.t3 + self.t4 + self.t5
    }
}

/// Closed-form `Σ q·log2 q` for the narrow geometric family, in `O(1)`
/// from the sums `S_r^{(k)}`.
pub fn t_decomposition(spec: BallSpec) -> Result<TDecomposition> {
    let q = SecondLow::new(spec)?;
    let s = sr_sums(spec.r())?;
    let alpha = q.alpha();
    let c = q.c();
    let log_c = alpha.excess.log2() - (alpha.value + 1.0).log2();
    let log_a = alpha.excess.ln_1p() / std::f64::consts::LN_2;
    let t1 = c * s.s0 * s.s0 * log_c + 2.0 * c * s.s0 * s.s1 * log_a;
    let t2 = c * s.s1 * log_c + c * s.s2 * log_a;
    let middle = (spec.n() - 2 * spec.r() - 2) as f64;
    let t3 = middle * c * ((2.0 * s.s0 - 1.0) * log_c + 2.0 * s.s1 * log_a);
    Ok(TDecomposition { t1, t2, t3, t4: t2, t5: t1 })
}

/// `Σ q·log2 q` for the narrow geometric family by direct summation over the band.
pub fn t_direct(spec: BallSpec) -> Result<f64> {
    let q = SecondLow::new(spec)?;
    Ok(band_sum(&q, |lq, qv| qv * lq))
}

/// Every family at `spec`, in [`Family::ALL`] order.
pub fn finite_bounds(spec: BallSpec) -> Vec<BoundValue> {
    Family::ALL.into_iter().map(|f| finite_bound(f, spec)).collect()
}

/// One family at `spec`. Narrow-band formulas apply when `2r <= n-1`.
pub fn finite_bound(family: Family, spec: BallSpec) -> BoundValue {
    let (n, r) = (spec.n(), spec.r());
    let nf = n as f64;
    let rf = r as f64;
    let lf = |k: usize| log2_factorial(k as u64).0;
    let narrow = 2 * r < n;
    match family {
        Family::Phi1 => {
            let penalty = if narrow { 2.0 * rf } else { nf };
            BoundValue::valid(family, spec, lf(n) + nf * (2.0 * rf + 1.0).log2() - penalty - nf * nf.log2())
        }
        Family::Phi1Upper => {
            let (lead, top) = if narrow {
                ((nf - 2.0 * rf) / (2.0 * rf + 1.0) * lf(2 * r + 1), 2 * r)
            } else {
                ((2.0 * rf + 2.0 - nf) / nf * lf(n), n - 1)
            };
            let tail: f64 = (r + 1..=top).map(|i| 2.0 / i as f64 * lf(i)).sum();
            BoundValue::valid(family, spec, lead + tail)
        }
        Family::Phi1Prime => {
            if r == 0 || !narrow {
                return BoundValue::invalid(family, spec, "requires 1 <= r and 2r <= n-1 (0 < rho <= 1/2)");
            }
            let log_omega = omega_r_log2(r).0 + rf * LOG2_E - rf * (2.0 * rf + 1.0).log2();
            let bits = log2_sqrt_two_pi(nf + 2.0 * rf) - 2.0 * log_omega + nf * ((2.0 * rf + 1.0).log2() - LOG2_E);
            BoundValue::valid(family, spec, bits)
        }
        Family::Phi2 => {
            let bits = if narrow {
                lf(n) - 2.0 * rf * (rf + 1.0) / (2.0 * rf + 1.0) + nf * ((2.0 * rf + 1.0) / nf).log2()
            } else {
                lf(n) - 2.0 * (nf - rf - 1.0) * (nf - rf) / nf
            };
            BoundValue::valid(family, spec, bits)
        }
        Family::Phi3 => {
            if r >= 1 && 2 * r + 2 <= n {
                match SecondLow::new(spec) {
                    Ok(q) => BoundValue::valid(family, spec, vdw_band_bound(&q).0),
                    Err(e) => BoundValue::invalid(family, spec, e.to_string()),
                }
            } else if 2 * r > n - 1 && r + 1 < n {
                match phi3_high_closed_form(spec) {
                    Ok(b) => BoundValue::valid(family, spec, b.0),
                    Err(e) => BoundValue::invalid(family, spec, e.to_string()),
                }
            } else {
                BoundValue::invalid(family, spec, "requires 1 <= r <= (n-2)/2 or (n-1)/2 < r < n-1")
            }
        }
        Family::VdwGeneric | Family::BetheGeneric => {
            if n > GENERIC_MAX_N {
                return BoundValue::invalid(family, spec, format!("Sinkhorn evaluation limited to n <= {GENERIC_MAX_N}"));
            }
            let a = BandMatrix::new(spec).to_dense_f64();
            let q = match sinkhorn_balance(&a, 1e-12, 2_000_000) {
                Ok((q, _)) => q,
                Err(e) => return BoundValue::invalid(family, spec, e.to_string()),
            };
            let value = if family == Family::VdwGeneric { vdw_sinkhorn_bound(&a, &q) } else { bethe_bound(&a, &q) };
            match value {
                Ok(b) => BoundValue::valid(family, spec, b.0),
                Err(e) => BoundValue::invalid(family, spec, e.to_string()),
            }
        }
    }
}

/// Closed form of the functional at the wide geometric `Q`:
/// `log2(n!/n^n) - n·log2(α-1) + (n-r)(2r-n+2)·log2 α`.
pub fn phi3_high_closed_form(spec: BallSpec) -> Result<Bits> {
    let (n, r) = (spec.n(), spec.r());
    let alpha = alpha_high_root(n, r)?;
    let nf = n as f64;
    let log_a = alpha.excess.ln_1p() / std::f64::consts::LN_2;
    Ok(Bits(
        log2_vdw_floor(n) - nf * alpha.excess.log2() + ((n - r) * (2 * r + 2 - n)) as f64 * log_a,
    ))
}

/// Narrow-band geometric bound from the five-block closed form.
pub fn phi3_low_closed_form(spec: BallSpec) -> Result<Bits> {
    Ok(Bits(log2_vdw_floor(spec.n()) - t_decomposition(spec)?.total()))
}
