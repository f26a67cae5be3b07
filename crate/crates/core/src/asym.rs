//! Asymptotic exponents and gap curves.
//!
//! With `r = ρ(n-1)`, every family satisfies
//! `log2 bound = n·log2 n - n·E(ρ) + o(n)`. The gap between a lower family
//! and the Brégman-type upper bound is `E_lower(ρ) - E_upper(ρ)` bits per
//! symbol. [`gap`] evaluates the known closed form and cross-checks it
//! against that difference.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::Family;
use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, mu_star, t_hat, Bits, LOG2_E};

/// Agreement required between a closed-form gap and the exponent difference.
const DUAL_TOL: f64 = 1e-9;

/// `E(ρ)` for one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponent {
    pub family: Family,
    pub rho: f64,
    pub e_value: Bits,
}

fn check_open_unit(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")))
    }
}

/// The exponent `E(ρ)` of `family`.
pub fn exponent(family: Family, rho: f64) -> Result<Exponent> {
    check_open_unit(rho)?;
    let l = LOG2_E;
    let lg = f64::log2;
    let narrow = rho <= 0.5;
    let e = match family {
        Family::Phi1 if narrow => l - 1.0 + 2.0 * rho - lg(rho),
        Family::Phi1 => l - lg(rho),
        Family::Phi1Upper if narrow => (l - 1.0) * (2.0 * rho + 1.0) - lg(rho),
        Family::Phi1Upper => l * (3.0 - 2.0 * rho) + 2.0 * rho * lg(rho),
        Family::Phi1Prime if narrow => exponent(Family::Phi1Upper, rho)?.e_value.0 + phi1_prime_slope() * rho,
        Family::Phi1Prime => {
            return Err(Error::Domain(format!("phi1_prime exponent needs 0 < rho <= 1/2, got {rho}")))
        }
        Family::Phi2 if narrow => l - 1.0 + rho - lg(rho),
        Family::Phi2 => l + 2.0 * (1.0 - rho) * (1.0 - rho),
        Family::Phi3 if narrow => (l - 1.0) * 2.0 * rho - lg(rho) - lg(l) + 1.0,
        Family::Phi3 => {
            let t = t_hat(rho)?;
            lg(std::f64::consts::E * t / l) - t * (2.0 * rho - 1.0) - lg(1.0 - rho)
        }
        Family::VdwGeneric | Family::BetheGeneric => {
            return Err(Error::Domain(format!("no closed-form exponent for {family}")))
        }
    };
    Ok(Exponent { family, rho, e_value: Bits(e) })
}

/// `2·(h(μ*) + log2 μ*)`.
fn phi1_prime_slope() -> f64 {
    let mu = mu_star();
    2.0 * (binary_entropy(mu).expect("mu* in [0,1]").0 + mu.log2())
}

/// Lower families compared against the upper bound in the gap curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GapPair {
    Phi1,
    Phi1Prime,
    Phi2,
    Phi3,
}

impl GapPair {
    pub const ALL: [GapPair; 4] = [GapPair::Phi1, GapPair::Phi1Prime, GapPair::Phi2, GapPair::Phi3];

    pub fn lower(self) -> Family {
        match self {
            GapPair::Phi1 => Family::Phi1,
            GapPair::Phi1Prime => Family::Phi1Prime,
            GapPair::Phi2 => Family::Phi2,
            GapPair::Phi3 => Family::Phi3,
        }
    }

    pub fn name(self) -> &'static str {
        self.lower().name()
    }
}

impl fmt::Display for GapPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GapPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GapPair::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown gap pair {s:?}")))
    }
}

impl Serialize for GapPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for GapPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One point of a gap curve; also the CSV row `pair,rho,gap_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCurvePoint {
    pub pair: GapPair,
    pub rho: f64,
    pub gap_bits: f64,
}

/// The gap from its closed form, without the cross-check.
pub fn gap_closed_form(pair: GapPair, rho: f64) -> Result<f64> {
    check_open_unit(rho)?;
    let l = LOG2_E;
    let lg = f64::log2;
    let narrow = rho <= 0.5;
    Ok(match pair {
        GapPair::Phi1 if narrow => (4.0 - 2.0 * l) * rho,
        GapPair::Phi1 => 2.0 * (rho - 1.0) * l - (2.0 * rho + 1.0) * lg(rho),
        GapPair::Phi1Prime if narrow => phi1_prime_slope() * rho,
        GapPair::Phi1Prime => {
            return Err(Error::Domain(format!("phi1_prime gap needs 0 < rho <= 1/2, got {rho}")))
        }
        GapPair::Phi2 if narrow => (3.0 - 2.0 * l) * rho,
        GapPair::Phi2 => 2.0 * (1.0 - rho) * (1.0 - rho - l) - 2.0 * rho * lg(rho),
        GapPair::Phi3 if narrow => lg(4.0 / (std::f64::consts::E * l)),
        GapPair::Phi3 => {
            let t = t_hat(rho)?;
            lg(t / l) - t * (2.0 * rho - 1.0) - lg(1.0 - rho) - 2.0 * (1.0 - rho) * l - 2.0 * rho * lg(rho)
        }
    })
}

/// The gap at `rho`, checked against `E_lower(ρ) - E_upper(ρ)`.
pub fn gap(pair: GapPair, rho: f64) -> Result<GapCurvePoint> {
    let closed = gap_closed_form(pair, rho)?;
    let diff = exponent(pair.lower(), rho)?.e_value.0 - exponent(Family::Phi1Upper, rho)?.e_value.0;
    if (closed - diff).abs() > DUAL_TOL {
        return Err(Error::Consistency(format!(
            "gap {pair} at rho={rho}: closed form {closed} but exponent difference {diff}"
        )));
    }
    Ok(GapCurvePoint { pair, rho, gap_bits: closed })
}

/// `ξ = (2 - log2 e - log2 log2 e) / (3 - 2·log2 e)`, where the `phi2` and
/// `phi3` gap curves cross.
pub fn crossover_xi() -> Result<f64> {
    let l = LOG2_E;
    let xi = (2.0 - l - l.log2()) / (3.0 - 2.0 * l);
    let d = gap(GapPair::Phi2, xi)?.gap_bits - gap(GapPair::Phi3, xi)?.gap_bits;
    if d.abs() > DUAL_TOL {
        return Err(Error::Consistency(format!("gap curves differ by {d} at xi={xi}")));
    }
    Ok(xi)
}

/// Points of an open grid `step, 2·step, ...` strictly inside `(0, 1)`.
pub fn open_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::Validation(format!("grid step must lie in (0, 1), got {step}")));
    }
    let count = ((1.0 / step) - 1e-9).ceil() as usize;
    Ok((1..count).map(|k| round_grid(k as f64 * step)).collect())
}

/// Grid `step, 2·step, ..., 1` (right end included).
pub fn half_open_grid(step: f64) -> Result<Vec<f64>> {
    let mut g = open_grid(step)?;
    g.push(1.0);
    Ok(g)
}

fn round_grid(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

/// Gap curves sampled on a grid, with the points that fell outside a
/// pair's range listed separately.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapTable {
    pub points: Vec<GapCurvePoint>,
    pub skipped: Vec<(GapPair, f64, String)>,
}

/// Tabulates every requested pair over `rho_grid`, pair by pair.
pub fn gap_curve_table(pairs: &[GapPair], rho_grid: &[f64]) -> Result<GapTable> {
    let mut table = GapTable::default();
    for &pair in pairs {
        for &rho in rho_grid {
            match gap(pair, rho) {
                Ok(p) => table.points.push(p),
                Err(Error::Domain(msg)) => table.skipped.push((pair, rho, msg)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponent_examples() {
        let l = LOG2_E;
        assert_relative_eq!(exponent(Family::Phi1, 0.5).unwrap().e_value.0, l + 1.0, epsilon = 1e-15);
        assert!((l + 1.0 - 2.4427).abs() < 1e-4);
        assert_relative_eq!(exponent(Family::Phi1Upper, 0.5).unwrap().e_value.0, 2.0 * l - 1.0, epsilon = 1e-15);
        let t = t_hat(0.75).unwrap();
        let expected = (std::f64::consts::E * t / l).log2() - t * 0.5 - 0.25f64.log2();
        assert_relative_eq!(exponent(Family::Phi3, 0.75).unwrap().e_value.0, expected, epsilon = 1e-14);
        assert!(exponent(Family::Phi1Prime, 0.6).is_err());
        assert!(exponent(Family::Phi1, 0.0).is_err());
        assert!(exponent(Family::VdwGeneric, 0.3).is_err());
    }

    #[test]
    fn exponents_continuous_at_half() {
        for f in [Family::Phi1, Family::Phi1Upper, Family::Phi2, Family::Phi3] {
            let a = exponent(f, 0.5 - 1e-9).unwrap().e_value.0;
            let b = exponent(f, 0.5 + 1e-9).unwrap().e_value.0;
            assert!((a - b).abs() < 1e-6, "{f}: {a} vs {b}");
        }
    }

    #[test]
    fn gap_examples() {
        let l = LOG2_E;
        assert_relative_eq!(gap(GapPair::Phi1, 0.5).unwrap().gap_bits, 2.0 - l, epsilon = 1e-12);
        let g3 = gap(GapPair::Phi3, 0.3).unwrap().gap_bits;
        assert!((g3 - 0.02854).abs() < 1e-4);
        assert_relative_eq!(gap(GapPair::Phi2, 0.5).unwrap().gap_bits, (3.0 - 2.0 * l) / 2.0, epsilon = 1e-12);
        assert!((gap(GapPair::Phi1Prime, 0.5).unwrap().gap_bits - 0.4017).abs() < 1e-4);
        assert!(gap(GapPair::Phi1Prime, 0.7).is_err());
    }

    #[test]
    fn crossover() {
        let xi = crossover_xi().unwrap();
        assert!((xi - 0.249).abs() < 1e-3);
        let d = |rho: f64| gap(GapPair::Phi2, rho).unwrap().gap_bits - gap(GapPair::Phi3, rho).unwrap().gap_bits;
        let (mut lo, mut hi) = (0.1, 0.4);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if d(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((xi - lo).abs() < 1e-9);
    }

    #[test]
    fn curves_on_grid() {
        let grid = open_grid(0.01).unwrap();
        assert_eq!(grid.len(), 99);
        let table = gap_curve_table(&GapPair::ALL, &grid).unwrap();
        assert_eq!(table.skipped.len(), 49);
        assert!(table.points.iter().all(|p| p.gap_bits >= 0.0));
        let max3 = table.points.iter().filter(|p| p.pair == GapPair::Phi3).map(|p| p.gap_bits).fold(0.0, f64::max);
        assert!(max3 <= 0.029);
        for &rho in &grid {
            let g1 = gap(GapPair::Phi1, rho).unwrap().gap_bits;
            assert!(gap(GapPair::Phi2, rho).unwrap().gap_bits <= g1 + 1e-12);
            if rho < 0.5 {
                assert!(gap(GapPair::Phi1Prime, rho).unwrap().gap_bits <= g1);
                let slope = gap(GapPair::Phi1, rho).unwrap().gap_bits / rho;
                assert_relative_eq!(slope, 4.0 - 2.0 * LOG2_E, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn grids() {
        let g = half_open_grid(0.01).unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(g[49], 0.5);
        assert!(open_grid(0.0).is_err());
        assert_eq!(open_grid(0.25).unwrap(), vec![0.25, 0.5, 0.75]);
    }
}
