use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use permball::asym::GapPair;
use permball::bounds::Family;
use permball::oracle::{Backend, CapacityLimits, ExactOptions};
use permball::qmat::{q_first_class, q_second_high, q_second_low, sinkhorn_balance, StochasticMatrix};
use permball::rates::RateKind;
use permball::{radius_from_rho, BallSpec, BandMatrix, NormalizedRadius};
use permball_cli::cache::Cache;
use permball_cli::error::{CliError, CliResult, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use permball_cli::figures::{check_step, fig1_rows, fig2_rows, fig3_rows, gap_rows, rate_rows, Figure};
use permball_cli::lists::{parse_named_list, parse_usize_list};
use permball_cli::output::{sink, write_rows, Format};
use permball_cli::sweep::{any_succeeded, run_sweep, RSelector, SweepConfig};
use permball_cli::verify::{self, Level};
use permball_cli::TOOL_VERSION;
use serde::Serialize;

/// Exact sizes and bounds for balls of permutations under the infinity metric.
#[derive(Parser)]
#[command(name = "permball", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact ball size |B(n, r)|.
    Exact(ExactArgs),
    /// Bounds and exact counts over many (n, r) cells.
    Sweep(SweepArgs),
    /// Data behind the gap (fig1), code-rate (fig2) and covering-rate (fig3) plots.
    Figures(FiguresArgs),
    /// Gap curves in long format: pair,rho,gap_bits.
    Gaps(GapsArgs),
    /// Rate bounds in long format: kind,x,rate_bits,mode,n.
    Rates(RatesArgs),
    /// A doubly-stochastic matrix supported on the band, as a grid or triplets.
    Qmatrix(QmatrixArgs),
    /// Run the self-verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RadiusArgs {
    #[arg(long)]
    n: usize,
    /// Radius r, 0 <= r <= n-1.
    #[arg(long, conflicts_with = "rho", required_unless_present = "rho")]
    r: Option<usize>,
    /// Normalized radius; rho*(n-1) must be an integer. Decimal (at most 6
    /// places) or p/q.
    #[arg(long)]
    rho: Option<String>,
}

impl RadiusArgs {
    fn spec(&self) -> CliResult<BallSpec> {
        match (&self.r, &self.rho) {
            (Some(r), _) => Ok(BallSpec::new(self.n, *r)?),
            (None, Some(rho)) => Ok(radius_from_rho(rho.parse::<NormalizedRadius>()?, self.n)?),
            (None, None) => Err(CliError::Usage("one of --r or --rho is required".into())),
        }
    }
}

#[derive(Args)]
struct CacheArgs {
    /// Directory of cached exact counts.
    #[arg(long, env = "PERMBALL_CACHE")]
    cache_dir: Option<PathBuf>,
}

impl CacheArgs {
    fn open(&self) -> CliResult<Option<Cache>> {
        self.cache_dir.as_ref().map(Cache::open).transpose()
    }
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    radius: RadiusArgs,
    /// Run every applicable backend and require agreement.
    #[arg(long)]
    verify: bool,
    /// Raise backend capacity limits.
    #[arg(long)]
    expert: bool,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Values of n: comma list with inclusive ranges, e.g. 4-8,10.
    #[arg(long)]
    n: String,
    /// Radii (same list syntax) or `all`.
    #[arg(long, conflicts_with = "rho")]
    r: Option<String>,
    /// Normalized radii, comma separated; cells with non-integral rho*(n-1) are skipped.
    #[arg(long)]
    rho: Option<String>,
    /// Bound families, comma separated, or `all`.
    #[arg(long, default_value = "all")]
    families: String,
    /// Exact backends allowed: enumerate, ryser, band_dp, or `all`.
    #[arg(long, default_value = "all")]
    backends: String,
    #[arg(long)]
    expert: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    cache: CacheArgs,
    /// Worker threads (default: number of processors).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct FiguresArgs {
    /// fig1, fig2 or fig3.
    which: Figure,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Finite-n rates instead of asymptotic ones (fig2, fig3).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GapsArgs {
    /// Lower families to compare: phi1, phi1_prime, phi2, phi3, or `all`.
    #[arg(long, default_value = "all")]
    families: String,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RatesArgs {
    /// ecc_old, ecc_new, cover_old, cover_new, or `all`.
    #[arg(long, default_value = "all")]
    families: String,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum QFamily {
    /// Piecewise-constant matrix, exact rationals.
    First,
    /// Geometric matrix for the band's regime.
    Second,
    /// Sinkhorn balancing of the band matrix.
    Sinkhorn,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum QFormat {
    Grid,
    Triplets,
}

#[derive(Args)]
struct QmatrixArgs {
    #[command(flatten)]
    radius: RadiusArgs,
    #[arg(long, value_enum, default_value = "first")]
    family: QFamily,
    #[arg(long, value_enum, default_value = "grid")]
    format: QFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick or full.
    #[arg(long, default_value = "quick")]
    level: Level,
    #[command(flatten)]
    cache: CacheArgs,
}

fn limits(expert: bool) -> CapacityLimits {
    if expert {
        CapacityLimits::expert()
    } else {
        CapacityLimits::default()
    }
}

fn cmd_exact(args: &ExactArgs) -> CliResult<i32> {
    let spec = args.radius.spec()?;
    let options = ExactOptions { limits: limits(args.expert), verify: args.verify };
    let (count, backend, note) = match args.cache.open()? {
        Some(cache) if !args.verify => {
            let (c, b, hit) = cache.exact(spec, &options)?;
            (c, b.name().to_string(), if hit { " (cached)" } else { "" })
        }
        _ => {
            let res = permball::oracle::ball_size_exact_with(spec, &options)?;
            let names = if args.verify && res.agreed.len() > 1 {
                res.agreed.iter().map(|b| b.name()).collect::<Vec<_>>().join("=")
            } else {
                res.backend.name().to_string()
            };
            (res.count, names, "")
        }
    };
    println!("{count}");
    eprintln!("backend: {backend}{note}");
    Ok(EXIT_OK)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<i32> {
    let r_selector = match (&args.r, &args.rho) {
        (_, Some(rho)) => RSelector::Rho(
            rho.split(',').map(|s| s.parse::<NormalizedRadius>()).collect::<permball::Result<Vec<_>>>()?,
        ),
        (Some(r), None) if r.trim() != "all" => RSelector::Radii(parse_usize_list(r)?),
        _ => RSelector::All,
    };
    let config = SweepConfig {
        n_list: parse_usize_list(&args.n)?,
        r_selector,
        families: parse_named_list(&args.families, &Family::ALL)?,
        backends: parse_named_list(&args.backends, &Backend::ALL)?,
        limits: limits(args.expert),
        out: args.out.clone(),
        format: args.format,
        cache_dir: args.cache.cache_dir.clone(),
        jobs: args.jobs,
    };
    let result = run_sweep(&config)?;
    for note in &result.meta.skipped {
        eprintln!("skipped {note}");
    }
    write_rows(config.out.as_deref(), config.format, &result.meta, &result.rows)?;
    if let (Some(out), Format::Csv) = (&config.out, config.format) {
        let meta_path = meta_path(out);
        let text = serde_json::to_string_pretty(&result.meta)? + "\n";
        std::fs::write(&meta_path, text).map_err(|e| CliError::io(&meta_path, e))?;
    }
    if !any_succeeded(&result.rows) {
        return Err(CliError::SweepFailed(result.rows.len()));
    }
    Ok(EXIT_OK)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

#[derive(Serialize)]
struct TableMeta<'a> {
    tool_version: &'a str,
    table: &'a str,
    grid_step: f64,
    n: Option<usize>,
}

fn cmd_figures(args: &FiguresArgs) -> CliResult<i32> {
    let step = check_step(args.grid_step)?;
    let out = args.out.as_deref();
    let meta = |table| TableMeta { tool_version: TOOL_VERSION, table, grid_step: step, n: args.n };
    match args.which {
        Figure::Fig1 => write_rows(out, args.format, &meta("fig1"), &fig1_rows(step)?)?,
        Figure::Fig2 => write_rows(out, args.format, &meta("fig2"), &fig2_rows(step, args.n)?)?,
        Figure::Fig3 => write_rows(out, args.format, &meta("fig3"), &fig3_rows(step, args.n)?)?,
    }
    Ok(EXIT_OK)
}

fn cmd_gaps(args: &GapsArgs) -> CliResult<i32> {
    let step = check_step(args.grid_step)?;
    let pairs = parse_named_list(&args.families, &GapPair::ALL)?;
    let meta = TableMeta { tool_version: TOOL_VERSION, table: "gaps", grid_step: step, n: None };
    write_rows(args.out.as_deref(), args.format, &meta, &gap_rows(&pairs, step)?)?;
    Ok(EXIT_OK)
}

fn cmd_rates(args: &RatesArgs) -> CliResult<i32> {
    let step = check_step(args.grid_step)?;
    let kinds = parse_named_list(&args.families, &RateKind::ALL)?;
    let meta = TableMeta { tool_version: TOOL_VERSION, table: "rates", grid_step: step, n: args.n };
    write_rows(args.out.as_deref(), args.format, &meta, &rate_rows(&kinds, step, args.n)?)?;
    Ok(EXIT_OK)
}

fn write_matrix<T: permball::qmat::Entry>(m: &StochasticMatrix<T>, format: QFormat, out: Option<&Path>) -> CliResult<()> {
    let path = out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let mut w = sink(out)?;
    let res = match format {
        QFormat::Grid => m.write_grid(&mut w),
        QFormat::Triplets => m.write_triplets(&mut w),
    };
    res.and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn cmd_qmatrix(args: &QmatrixArgs) -> CliResult<i32> {
    let spec = args.radius.spec()?;
    let (n, r) = (spec.n(), spec.r());
    let out = args.out.as_deref();
    match args.family {
        QFamily::First => write_matrix(&q_first_class(spec)?, args.format, out)?,
        QFamily::Second => {
            let q = if r >= 1 && 2 * r + 2 <= n {
                q_second_low(spec)?
            } else if 2 * r > n - 1 && r + 1 < n {
                q_second_high(spec)?
            } else {
                return Err(CliError::Usage(format!(
                    "the geometric family needs 1 <= r <= (n-2)/2 or (n-1)/2 < r < n-1, got n={n}, r={r}"
                )));
            };
            write_matrix(&q, args.format, out)?
        }
        QFamily::Sinkhorn => {
            let (q, _) = sinkhorn_balance(&BandMatrix::new(spec).to_dense_f64(), 1e-12, 5_000_000)?;
            write_matrix(&q, args.format, out)?
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<i32> {
    let cache = args.cache.open()?;
    let outcomes = verify::run(args.level, cache.as_ref())?;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:<28} {:>10.2?}  {}", o.name, o.elapsed, o.detail);
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    println!("{} of {} checks passed", outcomes.len() - failed.len(), outcomes.len());
    match failed.first() {
        None => Ok(EXIT_OK),
        Some(first) => {
            eprintln!("verification failed: {}: {}", first.name, first.detail);
            Ok(EXIT_VERIFY)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Exact(a) => cmd_exact(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figures(a) => cmd_figures(a),
        Command::Gaps(a) => cmd_gaps(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Qmatrix(a) => cmd_qmatrix(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("{hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
