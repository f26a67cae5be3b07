//! Self-verification suite behind `permball verify`.
//!
//! `quick` covers small-`n` backend agreement, stochasticity of the
//! constructed matrices and spot values of the gap curves. `full` adds the
//! larger checks: bound sandwich, stochasticity up to `n = 200`, Sinkhorn
//! fixed points, finite-to-asymptotic convergence, closed forms, root
//! residuals, rate ordering and the Bethe comparison.

use std::f64::consts::LN_2;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use permball::asym::{crossover_xi, exponent, gap, open_grid, GapPair};
use permball::bounds::{
    bethe_band_bound, finite_bound, finite_bounds, phi3_high_closed_form, t_decomposition, t_direct, vdw_band_bound,
    vdw_sinkhorn_bound, Direction, Family,
};
use permball::oracle::{
    ball_size_band_dp, ball_size_enumerate, count_ball_around, permanent_ryser, CapacityLimits, ExactOptions,
};
use permball::qmat::{q_first_class, q_second_high, q_second_low, sinkhorn_balance, SecondHigh};
use permball::rates::{covering_grid, covering_rate_upper, ecc_grid, ecc_rate_upper, RateMode, Variant};
use permball::scalar::{alpha_high_root, alpha_low_root, mu_star, t_hat, LOG2_E};
use permball::{BallSpec, BandMatrix, PermutationVector};

use crate::cache::Cache;
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level {s:?} (expected quick or full)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Summary on success, first counterexample on failure.
    pub detail: String,
    pub elapsed: Duration,
}

type Check = Result<String, String>;

fn spec(n: usize, r: usize) -> Result<BallSpec, String> {
    BallSpec::new(n, r).map_err(|e| e.to_string())
}

fn e2s(e: impl ToString) -> String {
    e.to_string()
}

fn timed(name: &'static str, f: impl FnOnce() -> Check) -> CheckOutcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match result {
        Ok(detail) => CheckOutcome { name, passed: true, detail, elapsed },
        Err(detail) => CheckOutcome { name, passed: false, detail, elapsed },
    }
}

fn oracle_agreement(max_n: usize) -> Check {
    let mut cells = 0;
    for n in 1..=max_n {
        for r in 0..n {
            let s = spec(n, r)?;
            let e = ball_size_enumerate(s).map_err(e2s)?;
            let p = permanent_ryser(&BandMatrix::new(s).to_dense_u64()).map_err(e2s)?;
            let d = ball_size_band_dp(s).map_err(e2s)?;
            if e.value() != &p || e != d {
                return Err(format!("n={n} r={r}: enumerate={e} ryser={p} band_dp={d}"));
            }
            cells += 1;
        }
    }
    Ok(format!("{cells} cells, n <= {max_n}"))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { return false };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn center_independence(max_n: usize) -> Check {
    let limits = CapacityLimits::default();
    for n in 1..=max_n {
        for r in 0..n {
            let expected = ball_size_band_dp(spec(n, r)?).map_err(e2s)?;
            let mut image: Vec<usize> = (1..=n).collect();
            loop {
                let center = PermutationVector::new(image.clone()).map_err(e2s)?;
                let count = count_ball_around(&center, r, &limits).map_err(e2s)?;
                if &count != expected.value() {
                    return Err(format!("n={n} r={r} center {image:?}: {count} != {expected}"));
                }
                if !next_permutation(&mut image) {
                    break;
                }
            }
        }
    }
    Ok(format!("every center, n <= {max_n}"))
}

fn max_sum_deviation(a: &ndarray::Array2<f64>) -> f64 {
    let rows = a.rows().into_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = a.columns().into_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

fn support_matches(s: BallSpec, positive: impl Fn(usize, usize) -> bool) -> bool {
    let band = BandMatrix::new(s);
    (1..=s.n()).all(|i| (1..=s.n()).all(|j| positive(i, j) == (band.entry(i, j) == 1)))
}

fn stochasticity(max_n: usize) -> Check {
    let one = Rational64::from_integer(1);
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        for r in 0..n {
            let s = spec(n, r)?;
            let q = q_first_class(s).map_err(e2s)?;
            let e = q.entries();
            for k in 0..n {
                let row: Rational64 = e.row(k).iter().sum();
                let col: Rational64 = e.column(k).iter().sum();
                if row != one || col != one {
                    return Err(format!("first class n={n} r={r} index {}: row {row}, col {col}", k + 1));
                }
            }
            if !support_matches(s, |i, j| *q.get(i, j) > Rational64::from_integer(0)) {
                return Err(format!("first class support n={n} r={r}"));
            }
            let second = if r >= 1 && 2 * r + 2 <= n {
                Some(q_second_low(s))
            } else if 2 * r > n - 1 && r + 1 < n {
                Some(q_second_high(s))
            } else {
                None
            };
            if let Some(q) = second {
                let q = q.map_err(|e| format!("n={n} r={r}: {e}"))?;
                let dev = max_sum_deviation(q.entries());
                worst = worst.max(dev);
                if dev > 1e-9 {
                    return Err(format!("second class n={n} r={r}: deviation {dev:e}"));
                }
                if !support_matches(s, |i, j| *q.get(i, j) > 0.0) {
                    return Err(format!("second class support n={n} r={r}"));
                }
            }
        }
    }
    Ok(format!("n <= {max_n}, worst second-class deviation {worst:.1e}"))
}

fn close(name: &str, v: f64, target: f64, tol: f64) -> Result<(), String> {
    if (v - target).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name} = {v}, expected {target} ± {tol}"))
    }
}

fn gap_bits(pair: GapPair, rho: f64) -> Result<f64, String> {
    gap(pair, rho).map(|p| p.gap_bits).map_err(e2s)
}

fn spot_values() -> Check {
    let c3 = (4.0 / (std::f64::consts::E * LOG2_E)).log2();
    close("mu*", mu_star(), 0.782, 1e-3)?;
    close("xi", crossover_xi().map_err(e2s)?, 0.249, 1e-3)?;
    close("gap(phi3, 0.3)", gap_bits(GapPair::Phi3, 0.3)?, 0.02854, 1e-4)?;
    close("gap(phi3, 0.5)", gap_bits(GapPair::Phi3, 0.5)?, c3, 1e-12)?;
    close("gap(phi1, 1/2)", gap_bits(GapPair::Phi1, 0.5)?, 2.0 - LOG2_E, 1e-9)?;
    close("gap(phi2, 1/2)", gap_bits(GapPair::Phi2, 0.5)?, (3.0 - 2.0 * LOG2_E) / 2.0, 1e-9)?;
    close("gap(phi1_prime, 1/2)", gap_bits(GapPair::Phi1Prime, 0.5)?, 0.4017, 1e-4)?;
    Ok("mu*, xi and gap curve values".into())
}

fn sandwich(max_n: usize) -> Check {
    let mut checked = 0;
    for n in 1..=max_n {
        for r in 0..n {
            let s = spec(n, r)?;
            let exact = ball_size_band_dp(s).map_err(e2s)?.log2();
            for b in finite_bounds(s) {
                let Some(bits) = b.bits else { continue };
                let ok = match (b.direction, b.family) {
                    (Direction::Lower, Family::Phi1Prime) => bits.0 < exact,
                    (Direction::Lower, _) => bits.0 <= exact + 1e-9,
                    (Direction::Upper, _) => exact <= bits.0 + 1e-9,
                };
                if !ok {
                    return Err(format!("{} n={n} r={r}: bound {} vs exact {exact}", b.family, bits.0));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} bound values, n <= {max_n}"))
}

fn sinkhorn_gap(s: BallSpec, q: &ndarray::Array2<f64>) -> Result<f64, String> {
    let a = BandMatrix::new(s).to_dense_f64();
    let (b, _) = sinkhorn_balance(&a, 1e-12, 5_000_000).map_err(e2s)?;
    Ok((b.entries() - q).iter().fold(0.0f64, |m, d| m.max(d.abs())))
}

fn sinkhorn_wide() -> Check {
    let mut worst: f64 = 0.0;
    for (n, r) in [(4, 2), (6, 4), (8, 5), (10, 7)] {
        let q = q_second_high(spec(n, r)?).map_err(e2s)?;
        let d = sinkhorn_gap(spec(n, r)?, q.entries())?;
        worst = worst.max(d);
        if d > 1e-6 {
            return Err(format!("n={n} r={r}: max entry difference {d:.3e}"));
        }
    }
    Ok(format!("max entry difference {worst:.1e}"))
}

fn sinkhorn_narrow() -> Check {
    for (n, r) in [(6, 2), (8, 3), (10, 4)] {
        let q = q_second_low(spec(n, r)?).map_err(e2s)?;
        let d = sinkhorn_gap(spec(n, r)?, q.entries())?;
        if d > 1e-6 {
            return Err(format!("n={n} r={r}: max entry difference {d:.3e}"));
        }
    }
    Ok("entries agree to 1e-6".into())
}

fn convergence() -> Check {
    let mut worst: f64 = 0.0;
    for family in [Family::Phi1, Family::Phi1Upper, Family::Phi2, Family::Phi3] {
        for rho in [0.25, 0.5, 0.75] {
            let mut devs = Vec::new();
            for n in [101usize, 1001, 10001] {
                let r = (rho * (n - 1) as f64) as usize;
                let Some(bits) = finite_bound(family, spec(n, r)?).bits else { continue };
                let e = exponent(family, rho).map_err(e2s)?.e_value.0;
                let nf = n as f64;
                devs.push(((nf * nf.log2() - bits.0) / nf - e).abs());
            }
            if devs.is_empty() {
                continue;
            }
            if devs.len() != 3 || !(devs[0] >= devs[1] && devs[1] >= devs[2]) || devs[2] > 0.02 {
                return Err(format!("{family} rho={rho}: deviations {devs:?}"));
            }
            worst = worst.max(devs[2]);
        }
    }
    Ok(format!("worst deviation at n=10001: {worst:.4}"))
}

fn closed_forms() -> Check {
    let mut worst: f64 = 0.0;
    for (n, r) in [(4, 2), (6, 4), (8, 5), (10, 7)] {
        let s = spec(n, r)?;
        let closed = phi3_high_closed_form(s).map_err(e2s)?.0;
        let q = q_second_high(s).map_err(e2s)?;
        let generic = vdw_sinkhorn_bound(&BandMatrix::new(s).to_dense_f64(), &q).map_err(e2s)?.0;
        worst = worst.max((closed - generic).abs());
    }
    for (n, r) in [(8, 2), (12, 3), (20, 6)] {
        let s = spec(n, r)?;
        let t = t_decomposition(s).map_err(e2s)?;
        if t.t1 != t.t5 || t.t2 != t.t4 {
            return Err(format!("block symmetry fails at n={n} r={r}"));
        }
        worst = worst.max((t.total() - t_direct(s).map_err(e2s)?).abs());
    }
    if worst <= 1e-9 {
        Ok(format!("max difference {worst:.1e}"))
    } else {
        Err(format!("max difference {worst:e}"))
    }
}

fn root_quality() -> Check {
    for r in (1..=2000).chain([5000, 10_000, 100_000]) {
        let a = alpha_low_root(r).map_err(e2s)?;
        if !a.residual_ok() {
            return Err(format!("alpha_r residual {} at r={r}", a.residual));
        }
    }
    for n in 3..=300usize {
        for r in (n / 2)..n.saturating_sub(1) {
            if 2 * r > n - 1 {
                let a = alpha_high_root(n, r).map_err(e2s)?;
                if !a.residual_ok() {
                    return Err(format!("alpha_(r,n) residual {} at n={n} r={r}", a.residual));
                }
            }
        }
    }
    let dev = (1000.0 * alpha_low_root(1000).map_err(e2s)?.excess - LN_2).abs();
    if dev > 0.01 {
        return Err(format!("|r(alpha_r - 1) - ln2| = {dev} at r=1000"));
    }
    for rho in [0.6, 0.75, 0.9] {
        let t = t_hat(rho).map_err(e2s)?;
        let res = (t.exp2() + t * (2.0 * rho - 1.0) * LN_2 / (1.0 - rho) - 2.0).abs();
        if res > 1e-9 {
            return Err(format!("t_hat residual {res:e} at rho={rho}"));
        }
    }
    Ok(format!("r(alpha_r-1)-ln2 at r=1000: {dev:.2e}"))
}

fn rate_ordering() -> Check {
    let rate = |f: &dyn Fn(Variant) -> permball::Result<f64>| -> Result<f64, String> {
        Ok(f(Variant::Old).map_err(e2s)? - f(Variant::New).map_err(e2s)?)
    };
    let mut best_ecc = (0.0, f64::MIN);
    for d in ecc_grid(0.01).map_err(e2s)? {
        let gain = rate(&|v| ecc_rate_upper(d, v, RateMode::Asymptotic).map(|p| p.rate_bits.0))?;
        if gain < 0.0 {
            return Err(format!("ecc_new > ecc_old at delta={d}"));
        }
        if gain > best_ecc.1 {
            best_ecc = (d, gain);
        }
    }
    let mut best_cov = (0.0, f64::MIN);
    for x in covering_grid(0.01).map_err(e2s)? {
        let gain = rate(&|v| covering_rate_upper(x, v, RateMode::Asymptotic).map(|p| p.rate_bits.0))?;
        if gain < 0.0 {
            return Err(format!("cover_new > cover_old at rho={x}"));
        }
        if gain > best_cov.1 {
            best_cov = (x, gain);
        }
    }
    if best_ecc.0 != 1.0 || best_cov.0 != 0.5 {
        return Err(format!("largest improvements at delta={} and rho={}", best_ecc.0, best_cov.0));
    }
    Ok("new <= old; largest gains at delta=1 and rho=0.5".into())
}

fn bethe_agreement() -> Check {
    let mut per_n = Vec::new();
    for n in [21usize, 41, 81] {
        let q = SecondHigh::new(spec(n, 3 * (n - 1) / 4)?).map_err(e2s)?;
        per_n.push((bethe_band_bound(&q).0 - vdw_band_bound(&q).0).abs() / n as f64);
    }
    if per_n[0] > per_n[1] && per_n[1] > per_n[2] {
        Ok(format!("|bethe - vdw|/n = {:.4}, {:.4}, {:.4}", per_n[0], per_n[1], per_n[2]))
    } else {
        Err(format!("not decreasing: {per_n:?}"))
    }
}

fn gap_grid() -> Check {
    let c3 = (4.0 / (std::f64::consts::E * LOG2_E)).log2();
    let mut max3: f64 = 0.0;
    for rho in open_grid(0.01).map_err(e2s)? {
        let v = gap_bits(GapPair::Phi3, rho)?;
        if rho <= 0.5 {
            close("gap(phi3)", v, c3, 1e-4)?;
        }
        max3 = max3.max(v);
    }
    if max3 > 0.029 {
        return Err(format!("max gap(phi3) = {max3}"));
    }
    Ok(format!("max gap(phi3) = {max3:.5}"))
}

fn cache_recheck(cache: &Cache) -> Check {
    let options = ExactOptions { limits: CapacityLimits::expert(), verify: false };
    let (count, failures) = cache.recheck(&options).map_err(e2s)?;
    match failures.first() {
        None => Ok(format!("{count} records in {}", cache.dir().display())),
        Some(f) => Err(format!("{}: {}", f.path.display(), f.reason)),
    }
}

/// Runs the suite at `level`; with a cache, every record is recomputed too.
pub fn run(level: Level, cache: Option<&Cache>) -> CliResult<Vec<CheckOutcome>> {
    let mut out = vec![
        timed("oracle agreement", || oracle_agreement(if level == Level::Full { 8 } else { 6 })),
        timed("center independence", || center_independence(5)),
        timed("Q stochasticity", || stochasticity(if level == Level::Full { 200 } else { 30 })),
        timed("gap spot values", spot_values),
    ];
    if level == Level::Full {
        out.extend([
            timed("sandwich", || sandwich(10)),
            timed("Sinkhorn limit, wide band", sinkhorn_wide),
            timed("Sinkhorn limit, narrow band", sinkhorn_narrow),
            timed("gap curve grid", gap_grid),
            timed("finite -> asymptotic", convergence),
            timed("closed forms", closed_forms),
            timed("root quality", root_quality),
            timed("rate ordering", rate_ordering),
            timed("Bethe vs functional", bethe_agreement),
        ]);
    }
    if let Some(c) = cache {
        out.push(timed("cache recheck", || cache_recheck(c)));
    }
    Ok(out)
}
