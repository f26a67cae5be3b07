//! Row types for every CSV the tool writes, and a reader for them.
//!
//! | output            | header                                                          |
//! |-------------------|-----------------------------------------------------------------|
//! | `sweep`           | `n,r,family,direction,bits,valid,exact_count,log2_exact,backend,note` |
//! | `figures fig1`    | `rho,phi1,phi1_prime,phi2,phi3`                                 |
//! | `figures fig2`    | `delta,code_anticode,ecc_old,ecc_new`                           |
//! | `figures fig3`    | `rho,construction,cover_old,cover_new,improvement`              |
//! | `gaps`            | `pair,rho,gap_bits`                                             |
//! | `rates`           | `kind,x,rate_bits,mode,n`                                       |
//!
//! Empty cells are missing values. Counts are unquoted decimal strings.

use std::io::Read;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use permball::asym::GapCurvePoint;
pub use permball::rates::RateRecord;

/// Placeholder written in columns whose curve is not computed.
pub const UNAVAILABLE: &str = "unavailable";

/// One `(n, r, family)` row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub r: usize,
    pub family: String,
    pub direction: String,
    pub bits: Option<f64>,
    pub valid: bool,
    pub exact_count: Option<String>,
    pub log2_exact: Option<f64>,
    pub backend: Option<String>,
    pub note: Option<String>,
}

/// Gap curves against the upper bound; `phi1_prime` is empty for `ρ > 1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub rho: f64,
    pub phi1: f64,
    pub phi1_prime: Option<f64>,
    pub phi2: f64,
    pub phi3: f64,
}

/// Rate upper bounds for codes with normalized minimum distance `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub delta: f64,
    pub code_anticode: String,
    pub ecc_old: Option<f64>,
    pub ecc_new: Option<f64>,
}

/// Rate bounds for covering codes of normalized radius `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub rho: f64,
    pub construction: String,
    pub cover_old: Option<f64>,
    pub cover_new: Option<f64>,
    pub improvement: Option<f64>,
}

/// Reads every row of a CSV with a header line.
pub fn read_csv<T: DeserializeOwned, R: Read>(reader: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
