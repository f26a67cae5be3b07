//! Bound and exact-count sweeps over many `(n, r)` cells.

use std::collections::BTreeSet;
use std::path::PathBuf;

use permball::bounds::{finite_bound, Family};
use permball::oracle::{ball_size_exact_with, Backend, CapacityLimits, ExactOptions};
use permball::{radius_from_rho, BallSpec, NormalizedRadius};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::Cache;
use crate::error::{CliError, CliResult};
use crate::output::Format;
use crate::schema::SweepRow;
use crate::TOOL_VERSION;

/// How radii are chosen for each `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum RSelector {
    /// Every `0 <= r <= n-1`.
    All,
    /// Listed radii; those above `n-1` are skipped.
    Radii(Vec<usize>),
    /// `r = ρ(n-1)` for each listed `ρ`; non-integral products are skipped.
    Rho(Vec<NormalizedRadius>),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub r_selector: RSelector,
    pub families: Vec<Family>,
    pub backends: Vec<Backend>,
    pub limits: CapacityLimits,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Run metadata; kept out of the data section.
#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta {
    pub tool_version: String,
    pub timestamp: String,
    pub cells: usize,
    pub rows: usize,
    pub cache_hits: usize,
    pub skipped: Vec<String>,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

impl SweepConfig {
    /// The sorted, deduplicated cells, plus a note for each skipped request.
    pub fn specs(&self) -> CliResult<(Vec<BallSpec>, Vec<String>)> {
        let mut cells = BTreeSet::new();
        let mut skipped = Vec::new();
        for &n in &self.n_list {
            if n == 0 {
                return Err(CliError::Usage("n must be at least 1".into()));
            }
            match &self.r_selector {
                RSelector::All => {
                    for r in 0..n {
                        cells.insert(BallSpec::new(n, r)?);
                    }
                }
                RSelector::Radii(rs) => {
                    for &r in rs {
                        match BallSpec::new(n, r) {
                            Ok(s) => {
                                cells.insert(s);
                            }
                            Err(e) => skipped.push(format!("n={n} r={r}: {e}")),
                        }
                    }
                }
                RSelector::Rho(rhos) => {
                    for &rho in rhos {
                        match radius_from_rho(rho, n) {
                            Ok(s) => {
                                cells.insert(s);
                            }
                            Err(e) => skipped.push(format!("n={n} rho={rho}: {e}")),
                        }
                    }
                }
            }
        }
        let specs: Vec<BallSpec> = cells.into_iter().collect();
        if specs.is_empty() {
            return Err(CliError::Usage(format!("no valid (n, r) cells selected; skipped: {}", skipped.join("; "))));
        }
        Ok((specs, skipped))
    }

    fn exact_options(&self) -> ExactOptions {
        let mut limits = self.limits;
        if !self.backends.contains(&Backend::Enumerate) {
            limits.enumerate_max_n = 0;
        }
        if !self.backends.contains(&Backend::Ryser) {
            limits.ryser_max_n = 0;
        }
        if !self.backends.contains(&Backend::BandDp) {
            limits.dp_max_window = 0;
        }
        ExactOptions { limits, verify: false }
    }
}

struct Exact {
    count: String,
    log2: f64,
    backend: Backend,
}

struct Cell {
    rows: Vec<SweepRow>,
    cache_hit: bool,
}

fn exact_for(spec: BallSpec, options: &ExactOptions, cache: Option<&Cache>) -> CliResult<Option<(Exact, bool)>> {
    let applicable = Backend::ALL.iter().any(|b| b.applicable(spec, &options.limits));
    if !applicable {
        return Ok(None);
    }
    let (count, backend, hit) = match cache {
        Some(c) => c.exact(spec, options)?,
        None => {
            let r = ball_size_exact_with(spec, options)?;
            (r.count, r.backend, false)
        }
    };
    Ok(Some((Exact { count: count.to_string(), log2: count.log2(), backend }, hit)))
}

fn sweep_cell(spec: BallSpec, families: &[Family], options: &ExactOptions, cache: Option<&Cache>) -> Cell {
    let (exact, note, cache_hit) = match exact_for(spec, options, cache) {
        Ok(Some((e, hit))) => (Some(e), None, hit),
        Ok(None) => (None, Some("no exact backend within capacity".to_string()), false),
        Err(e) => (None, Some(format!("exact count failed: {e}")), false),
    };
    let rows = families
        .iter()
        .map(|&family| {
            let b = finite_bound(family, spec);
            SweepRow {
                n: spec.n(),
                r: spec.r(),
                family: family.name().to_string(),
                direction: format!("{:?}", b.direction).to_lowercase(),
                bits: b.bits.map(|x| x.0),
                valid: b.is_valid(),
                exact_count: exact.as_ref().map(|e| e.count.clone()),
                log2_exact: exact.as_ref().map(|e| e.log2),
                backend: exact.as_ref().map(|e| e.backend.name().to_string()),
                note: b.invalid_reason.clone().or_else(|| note.clone()),
            }
        })
        .collect();
    Cell { rows, cache_hit }
}

/// Runs the sweep on a worker pool. Row order is `(n, r, family name)`
/// regardless of scheduling.
pub fn run_sweep(config: &SweepConfig) -> CliResult<SweepOutput> {
    let (specs, skipped) = config.specs()?;
    let cache = config.cache_dir.as_ref().map(Cache::open).transpose()?;
    let options = config.exact_options();
    let mut families: Vec<Family> = config.families.clone();
    families.sort_by_key(|f| f.name());
    families.dedup();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = config.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let cells: Vec<Cell> =
        pool.install(|| specs.par_iter().map(|&s| sweep_cell(s, &families, &options, cache.as_ref())).collect());

    let cache_hits = cells.iter().filter(|c| c.cache_hit).count();
    let rows: Vec<SweepRow> = cells.into_iter().flat_map(|c| c.rows).collect();
    let meta = SweepMeta {
        tool_version: TOOL_VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        cells: specs.len(),
        rows: rows.len(),
        cache_hits,
        skipped,
    };
    Ok(SweepOutput { rows, meta })
}

/// A row succeeded if it carries a bound value or an exact count.
pub fn any_succeeded(rows: &[SweepRow]) -> bool {
    rows.iter().any(|r| r.valid || r.exact_count.is_some())
}
