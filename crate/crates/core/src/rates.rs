//! Rate bounds for codes in `S_n` under the infinity metric.
//!
//! Ball-packing: a code with minimum distance `d = δ(n-1)` has at most
//! `n!/|B_{⌊(d-1)/2⌋,n}|` codewords. Covering: a code of covering radius
//! `r = ρ(n-1)` needs at least `n!/|B_{r,n}|` codewords, and a greedy
//! argument gives one with at most `n!·(1 + ln n!)/|B_{r,n}|`.
//!
//! Rates are `log2(code size)/n` in bits per symbol. Since
//! `log2 n!/n = log2 n - log2 e + o(1)` and a ball-size bound with exponent
//! `E` has `log2 |B|/n = log2 n - E + o(1)`, the `log2 n` terms cancel and
//! the asymptotic rate is `E(·) - log2 e`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asym::{crossover_xi, half_open_grid, open_grid};
use crate::bounds::{finite_bound, Family};
use crate::error::{Error, Result};
use crate::metric::{radius_from_rho, BallSpec, NormalizedRadius};
use crate::oracle::ball_size_exact;
use crate::scalar::{log2_factorial, t_hat, Bits, LOG2_E};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateKind {
    EccOld,
    EccNew,
    CoverOld,
    CoverNew,
}

impl RateKind {
    pub const ALL: [RateKind; 4] = [RateKind::EccOld, RateKind::EccNew, RateKind::CoverOld, RateKind::CoverNew];

    pub fn name(self) -> &'static str {
        match self {
            RateKind::EccOld => "ecc_old",
            RateKind::EccNew => "ecc_new",
            RateKind::CoverOld => "cover_old",
            RateKind::CoverNew => "cover_new",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            RateKind::EccOld | RateKind::CoverOld => Variant::Old,
            RateKind::EccNew | RateKind::CoverNew => Variant::New,
        }
    }

    pub fn is_ecc(self) -> bool {
        matches!(self, RateKind::EccOld | RateKind::EccNew)
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown rate kind {s:?}")))
    }
}

impl Serialize for RateKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for RateKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which ball-size estimate the bound is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// The earlier estimates (`phi1`-based packing, prior covering bound).
    Old,
    /// The sharper estimates (`phi2` / `phi3`).
    New,
}

/// Where the ball size in a finite-`n` rate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallSource {
    /// Exact count when a backend can compute it, lower bound otherwise.
    ExactOrBound,
    /// Always the variant's lower bound.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMode {
    Asymptotic,
    Finite { n: usize, source: BallSource },
}

impl RateMode {
    pub fn finite(n: usize) -> Self {
        RateMode::Finite { n, source: BallSource::ExactOrBound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub kind: RateKind,
    pub x: f64,
    pub rate_bits: Bits,
    pub mode: RateMode,
}

impl RatePoint {
    pub fn record(&self) -> RateRecord {
        let (mode, n) = match self.mode {
            RateMode::Asymptotic => ("asymptotic".to_string(), None),
            RateMode::Finite { n, .. } => ("finite".to_string(), Some(n)),
        };
        RateRecord { kind: self.kind, x: self.x, rate_bits: self.rate_bits.0, mode, n }
    }
}

/// CSV row `kind,x,rate_bits,mode,n`; `n` is empty for asymptotic rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub kind: RateKind,
    pub x: f64,
    pub rate_bits: f64,
    pub mode: String,
    pub n: Option<usize>,
}

fn xi() -> f64 {
    crossover_xi().expect("crossover constant is self-consistent")
}

/// Largest `log2 |B_{r,n}|` lower bound available to `variant`.
fn log2_ball_lower(spec: BallSpec, variant: Variant) -> Result<f64> {
    let families: &[Family] = match variant {
        Variant::Old => &[Family::Phi1],
        Variant::New => &[Family::Phi2, Family::Phi3],
    };
    families
        .iter()
        .filter_map(|&f| finite_bound(f, spec).bits)
        .map(|b| b.0)
        .reduce(f64::max)
        .ok_or_else(|| Error::Domain(format!("no {variant:?} lower bound applies at n={}, r={}", spec.n(), spec.r())))
}

fn log2_ball(spec: BallSpec, variant: Variant, source: BallSource) -> Result<f64> {
    if source == BallSource::ExactOrBound {
        match ball_size_exact(spec) {
            Ok(c) => return Ok(c.log2()),
            Err(Error::Capacity(_)) => {}
            Err(e) => return Err(e),
        }
    }
    log2_ball_lower(spec, variant)
}

/// Packing radius `⌊(δ(n-1) - 1)/2⌋`.
pub fn packing_radius(delta: f64, n: usize) -> Result<usize> {
    let arg = (delta * (n as f64 - 1.0) - 1.0) / 2.0;
    // absorb rounding in δ(n-1) for δ given in decimal
    let arg = (arg * 1e9).round() / 1e9;
    if arg < 0.0 {
        return Err(Error::Domain(format!("delta={delta} gives a negative packing radius at n={n}")));
    }
    Ok(arg.floor() as usize)
}

/// Upper bound on the rate of a code with normalized distance `delta`.
pub fn ecc_rate_upper(delta: f64, variant: Variant, mode: RateMode) -> Result<RatePoint> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let kind = if variant == Variant::Old { RateKind::EccOld } else { RateKind::EccNew };
    let lg = f64::log2;
    let rate = match mode {
        RateMode::Asymptotic => match variant {
            Variant::Old => delta + lg(1.0 / delta),
            Variant::New if delta / 2.0 <= xi() => delta / 2.0 + lg(1.0 / delta),
            Variant::New => (LOG2_E - 1.0) * (delta - 1.0) + lg(1.0 / delta) + 1.0 - lg(LOG2_E),
        },
        RateMode::Finite { n, source } => {
            let spec = BallSpec::new(n, packing_radius(delta, n)?)?;
            let log_ball = log2_ball(spec, variant, source)?;
            (log2_factorial(n as u64).0 - log_ball) / n as f64
        }
    };
    Ok(RatePoint { kind, x: delta, rate_bits: Bits(rate), mode })
}

/// Upper bound on the rate of a covering code with normalized radius `rho`.
pub fn covering_rate_upper(rho: f64, variant: Variant, mode: RateMode) -> Result<RatePoint> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let kind = if variant == Variant::Old { RateKind::CoverOld } else { RateKind::CoverNew };
    let lg = f64::log2;
    let rate = match mode {
        RateMode::Asymptotic => match variant {
            Variant::Old if rho <= 0.5 => 2.0 * rho + lg(1.0 / rho),
            Variant::Old => 2.0 * (1.0 - rho),
            Variant::New if rho <= xi() => rho - 1.0 + lg(1.0 / rho),
            Variant::New if rho <= 0.5 => (2.0 * rho - 1.0) * (LOG2_E - 1.0) + lg(1.0 / rho) - lg(LOG2_E),
            Variant::New => {
                let t = t_hat(rho)?;
                lg(t) - lg(LOG2_E) - (2.0 * rho - 1.0) * t - lg(1.0 - rho)
            }
        },
        RateMode::Finite { n, source } => {
            let radius: NormalizedRadius = format!("{rho}").parse()?;
            let spec = radius_from_rho(radius, n)?;
            let log_ball = log2_ball(spec, variant, source)?;
            let lf = log2_factorial(n as u64).0;
            let greedy = (1.0 + lf * std::f64::consts::LN_2).log2();
            (lf + greedy - log_ball) / n as f64
        }
    };
    Ok(RatePoint { kind, x: rho, rate_bits: Bits(rate), mode })
}

/// Normalized distances `2·step, 3·step, ..., 1`.
pub fn ecc_grid(step: f64) -> Result<Vec<f64>> {
    Ok(half_open_grid(step)?.into_iter().skip(1).collect())
}

/// Normalized radii `step, ..., 1 - step`.
pub fn covering_grid(step: f64) -> Result<Vec<f64>> {
    open_grid(step)
}

/// Every requested kind over `grid`; points a kind cannot evaluate are left out.
pub fn rate_table(kinds: &[RateKind], grid: &[f64], mode: RateMode) -> Vec<RatePoint> {
    let mut out = Vec::new();
    for &kind in kinds {
        for &x in grid {
            let point = if kind.is_ecc() {
                ecc_rate_upper(x, kind.variant(), mode)
            } else {
                covering_rate_upper(x, kind.variant(), mode)
            };
            if let Ok(p) = point {
                out.push(p);
            }
        }
    }
    out
}
