//! Data behind the gap and rate plots, as rows ready for CSV.

use std::str::FromStr;

use permball::asym::{gap, gap_curve_table, open_grid, GapPair};
use permball::rates::{
    covering_grid, covering_rate_upper, ecc_grid, ecc_rate_upper, rate_table, RateKind, RateMode, RateRecord, Variant,
};

use crate::error::{CliError, CliResult};
use crate::schema::{Fig1Row, Fig2Row, Fig3Row, GapCurvePoint, UNAVAILABLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Gap curves of the four lower families.
    Fig1,
    /// Rate bounds for error-correcting codes.
    Fig2,
    /// Rate bounds for covering codes.
    Fig3,
}

impl FromStr for Figure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            _ => Err(format!("unknown figure {s:?} (expected fig1, fig2 or fig3)")),
        }
    }
}

fn mode_for(n: Option<usize>) -> RateMode {
    n.map_or(RateMode::Asymptotic, RateMode::finite)
}

pub fn fig1_rows(step: f64) -> CliResult<Vec<Fig1Row>> {
    let g = |pair, rho| gap(pair, rho).map(|p| p.gap_bits);
    open_grid(step)?
        .into_iter()
        .map(|rho| {
            Ok(Fig1Row {
                rho,
                phi1: g(GapPair::Phi1, rho)?,
                phi1_prime: if rho <= 0.5 { Some(g(GapPair::Phi1Prime, rho)?) } else { None },
                phi2: g(GapPair::Phi2, rho)?,
                phi3: g(GapPair::Phi3, rho)?,
            })
        })
        .collect()
}

/// With `n` set, rates come from finite-`n` ball sizes; otherwise from the
/// asymptotic exponents. Points a variant cannot evaluate are left empty.
pub fn fig2_rows(step: f64, n: Option<usize>) -> CliResult<Vec<Fig2Row>> {
    let mode = mode_for(n);
    Ok(ecc_grid(step)?
        .into_iter()
        .map(|delta| Fig2Row {
            delta,
            code_anticode: UNAVAILABLE.to_string(),
            ecc_old: ecc_rate_upper(delta, Variant::Old, mode).ok().map(|p| p.rate_bits.0),
            ecc_new: ecc_rate_upper(delta, Variant::New, mode).ok().map(|p| p.rate_bits.0),
        })
        .collect())
}

pub fn fig3_rows(step: f64, n: Option<usize>) -> CliResult<Vec<Fig3Row>> {
    let mode = mode_for(n);
    Ok(covering_grid(step)?
        .into_iter()
        .map(|rho| {
            let old = covering_rate_upper(rho, Variant::Old, mode).ok().map(|p| p.rate_bits.0);
            let new = covering_rate_upper(rho, Variant::New, mode).ok().map(|p| p.rate_bits.0);
            Fig3Row {
                rho,
                construction: UNAVAILABLE.to_string(),
                cover_old: old,
                cover_new: new,
                improvement: old.zip(new).map(|(o, n)| o - n),
            }
        })
        .collect())
}

/// Long-format gap table, one row per `(pair, ρ)`.
pub fn gap_rows(pairs: &[GapPair], step: f64) -> CliResult<Vec<GapCurvePoint>> {
    Ok(gap_curve_table(pairs, &open_grid(step)?)?.points)
}

/// Long-format rate table; each kind runs over its own grid.
pub fn rate_rows(kinds: &[RateKind], step: f64, n: Option<usize>) -> CliResult<Vec<RateRecord>> {
    let mode = mode_for(n);
    let (ecc, cover) = (ecc_grid(step)?, covering_grid(step)?);
    let mut rows = Vec::new();
    for &kind in kinds {
        let grid = if kind.is_ecc() { &ecc } else { &cover };
        rows.extend(rate_table(&[kind], grid, mode).iter().map(|p| p.record()));
    }
    Ok(rows)
}

pub fn check_step(step: f64) -> CliResult<f64> {
    if step > 0.0 && step <= 0.25 {
        Ok(step)
    } else {
        Err(CliError::Usage(format!("--grid-step must lie in (0, 0.25], got {step}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_shape() {
        let rows = fig1_rows(0.01).unwrap();
        assert_eq!(rows.len(), 99);
        for r in rows.iter().filter(|r| r.rho <= 0.5) {
            assert!((r.phi3 - 0.02854).abs() < 1e-4);
            assert!(r.phi1_prime.is_some());
        }
        assert!(rows.iter().filter(|r| r.rho > 0.5).all(|r| r.phi1_prime.is_none()));
    }

    #[test]
    fn fig3_peak_at_half() {
        let rows = fig3_rows(0.01, None).unwrap();
        let best = rows.iter().max_by(|a, b| a.improvement.partial_cmp(&b.improvement).unwrap()).unwrap();
        assert_eq!(best.rho, 0.5);
    }

    #[test]
    fn fig2_finite_mode() {
        let rows = fig2_rows(0.05, Some(21)).unwrap();
        assert!(rows.iter().all(|r| r.code_anticode == UNAVAILABLE));
        assert!(rows.iter().filter_map(|r| r.ecc_old.zip(r.ecc_new)).all(|(o, n)| n <= o + 1e-12));
    }

    #[test]
    fn long_tables() {
        assert_eq!(rate_rows(&RateKind::ALL, 0.25, None).unwrap().len(), 3 + 3 + 3 + 3);
        assert_eq!(gap_rows(&[GapPair::Phi3], 0.25).unwrap().len(), 3);
        assert!(check_step(0.0).is_err());
    }
}
