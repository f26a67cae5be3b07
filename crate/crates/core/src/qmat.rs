//! Doubly-stochastic matrices supported on the band `|i - j| <= r`.
//!
//! Three explicit families plug into the permanent lower bound of
//! [`crate::bounds`]: a piecewise-constant one with exact rational entries,
//! and two geometric ones built from the roots in [`crate::scalar`]. For
//! anything else there is plain Sinkhorn balancing.
//!
//! The geometric families are also available as [`BandEntries`]
//! generators, so bound evaluation at large `n` never materializes an `n×n`
//! matrix.

use std::fmt;
use std::io::{self, Write};

use ndarray::Array2;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::metric::{BallSpec, BandMatrix};
use crate::scalar::{alpha_high_root, alpha_low_root, AlphaRoot};

/// Tolerance on row and column sums for floating-point families.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Entry type usable in a [`StochasticMatrix`].
pub trait Entry: Clone + PartialEq + fmt::Display + std::iter::Sum<Self> {
    fn zero() -> Self;
    fn is_positive(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn sum_of<'a>(items: impl Iterator<Item = &'a Self>) -> Self
    where
        Self: 'a,
    {
        items.cloned().sum()
    }
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Entry for Rational64 {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Zero::zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    // Adds numerators while the denominators agree, which avoids a gcd per term.
    fn sum_of<'a>(items: impl Iterator<Item = &'a Self>) -> Self {
        let mut total = <Rational64 as Zero>::zero();
        let (mut num, mut den) = (0i64, 1i64);
        for x in items {
            if x.numer() == &0 {
                continue;
            }
            if *x.denom() == den {
                if let Some(v) = num.checked_add(*x.numer()) {
                    num = v;
                    continue;
                }
            }
            total += Rational64::new(num, den);
            num = *x.numer();
            den = *x.denom();
        }
        total + Rational64::new(num, den)
    }
}

/// A square non-negative matrix with unit row and column sums.
///
/// `spec` records the band the support is meant to match; it is `None` for
/// balanced matrices whose support is not a band.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix<T: Entry = f64> {
    entries: Array2<T>,
    spec: Option<BallSpec>,
    residual: f64,
}

impl<T: Entry> StochasticMatrix<T> {
    fn from_parts(entries: Array2<T>, spec: Option<BallSpec>) -> Self {
        let mut m = StochasticMatrix { entries, spec, residual: 0.0 };
        m.residual = m.sum_deviation();
        m
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn support_spec(&self) -> Option<BallSpec> {
        self.spec
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    /// Entry `(i, j)`, one-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[[i - 1, j - 1]]
    }

    /// Largest deviation of any row or column sum from 1, in floating point.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    // Sums are formed in T, so rational matrices are checked exactly.
    fn sum_deviation(&self) -> f64 {
        let rows = self.entries.rows().into_iter().map(|row| T::sum_of(row.iter()));
        let cols = self.entries.columns().into_iter().map(|col| T::sum_of(col.iter()));
        rows.chain(cols).map(|s| (s.to_f64() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> StochasticMatrix<f64> {
        StochasticMatrix {
            entries: self.entries.mapv(|x| x.to_f64()),
            spec: self.spec,
            residual: self.residual,
        }
    }

    /// Checks that the positive entries are exactly the band cells.
    pub fn check_support(&self) -> Result<()> {
        let Some(spec) = self.spec else {
            return Ok(());
        };
        let band = BandMatrix::new(spec);
        for ((i, j), x) in self.entries.indexed_iter() {
            if x.is_positive() != (band.entry(i + 1, j + 1) == 1) {
                return Err(Error::Contract(format!(
                    "support of Q differs from the band at ({}, {}): entry {x}",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.indexed_iter().all(|((i, j), x)| *x == self.entries[[j, i]])
    }

    /// Dense grid, one row per line.
    pub fn write_grid<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.entries.rows() {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Sparse `i,j,value` triplets (one-based) for the nonzero entries.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,j,value")?;
        for ((i, j), x) in self.entries.indexed_iter() {
            if x.is_positive() {
                writeln!(w, "{},{},{x}", i + 1, j + 1)?;
            }
        }
        Ok(())
    }
}

impl StochasticMatrix<Rational64> {
    /// Exact check: every row and column sums to exactly 1.
    pub fn is_exactly_stochastic(&self) -> bool {
        let one = Rational64::from_integer(1);
        self.entries.rows().into_iter().all(|r| r.iter().cloned().sum::<Rational64>() == one)
            && self.entries.columns().into_iter().all(|c| c.iter().cloned().sum::<Rational64>() == one)
    }
}

impl StochasticMatrix<f64> {
    /// Wraps a float matrix, rejecting it if any sum is off by more than `tol`.
    pub fn from_f64(entries: Array2<f64>, spec: Option<BallSpec>, tol: f64) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::Dimension(format!("stochastic matrix must be square, got {r}x{c}")));
        }
        if entries.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Contract("stochastic matrix has a negative or NaN entry".into()));
        }
        let m = Self::from_parts(entries, spec);
        if m.residual > tol {
            return Err(Error::Contract(format!("row/column sums deviate from 1 by {:e}", m.residual)));
        }
        Ok(m)
    }
}

/// A band-supported matrix given entry by entry.
pub trait BandEntries: Sync {
    fn spec(&self) -> BallSpec;

    /// `q_{ij}` for a cell inside the band (one-based).
    fn entry(&self, i: usize, j: usize) -> f64;

    /// `log2 q_{ij}` for a cell inside the band.
    fn log2_entry(&self, i: usize, j: usize) -> f64 {
        self.entry(i, j).log2()
    }

    fn to_dense(&self) -> Array2<f64> {
        let spec = self.spec();
        let band = BandMatrix::new(spec);
        let n = spec.n();
        let mut a = Array2::zeros((n, n));
        for i in 1..=n {
            for j in band.row_support(i) {
                a[[i - 1, j - 1]] = self.entry(i, j);
            }
        }
        a
    }
}

/// Piecewise-constant doubly-stochastic matrix on the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstClass {
    spec: BallSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FirstClassBranch {
    Narrow,
    Wide,
}

impl FirstClass {
    pub fn new(spec: BallSpec) -> Self {
        FirstClass { spec }
    }

    fn exact_on(&self, branch: FirstClassBranch, i: usize, j: usize) -> Rational64 {
        let [zero, single, double] = self.values(branch);
        match self.kind_on(branch, i, j) {
            0 => zero,
            1 => single,
            _ => double,
        }
    }

    /// The three entry values of a branch: off-band, single, double.
    fn values(&self, branch: FirstClassBranch) -> [Rational64; 3] {
        let (n, r) = (self.spec.n() as i64, self.spec.r() as i64);
        let d = match branch {
            FirstClassBranch::Narrow => 2 * r + 1,
            FirstClassBranch::Wide => n,
        };
        [<Rational64 as Zero>::zero(), Rational64::new(1, d), Rational64::new(2, d)]
    }

    /// 0 off the band, 1 for a single-weight entry, 2 for a double one.
    fn kind_on(&self, branch: FirstClassBranch, i: usize, j: usize) -> u8 {
        let (n, r) = (self.spec.n(), self.spec.r());
        if i.abs_diff(j) > r {
            return 0;
        }
        let s = i + j;
        let double = match branch {
            FirstClassBranch::Narrow => s <= r + 1 || s + r > 2 * n,
            FirstClassBranch::Wide => s + r <= n || s >= n + r + 2,
        };
        if double {
            2
        } else {
            1
        }
    }

    fn branch(&self) -> FirstClassBranch {
        if 2 * self.spec.r() < self.spec.n() {
            FirstClassBranch::Narrow
        } else {
            FirstClassBranch::Wide
        }
    }

    pub fn exact_entry(&self, i: usize, j: usize) -> Rational64 {
        self.exact_on(self.branch(), i, j)
    }
}

impl BandEntries for FirstClass {
    fn spec(&self) -> BallSpec {
        self.spec
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        Entry::to_f64(&self.exact_entry(i, j))
    }
}

/// The first family, in exact rational arithmetic.
///
/// For `n` odd and `r = (n-1)/2` both branch formulas apply; both are built
/// and must coincide.
pub fn q_first_class(spec: BallSpec) -> Result<StochasticMatrix<Rational64>> {
    let n = spec.n();
    let gen = FirstClass::new(spec);
    let branch = gen.branch();
    if n % 2 == 1 && 2 * spec.r() == n - 1 {
        let (a, b) = (FirstClassBranch::Narrow, FirstClassBranch::Wide);
        let agree = gen.values(a) == gen.values(b)
            && (1..=n).all(|i| (1..=n).all(|j| gen.kind_on(a, i, j) == gen.kind_on(b, i, j)));
        if !agree {
            return Err(Error::Consistency(format!(
                "first-class branch formulas disagree at the boundary n={n}, r={}",
                spec.r()
            )));
        }
    }
    let values = gen.values(branch);
    let entries = Array2::from_shape_fn((n, n), |(i, j)| values[gen.kind_on(branch, i + 1, j + 1) as usize]);
    Ok(StochasticMatrix::from_parts(entries, Some(spec)))
}

/// Geometric family for `1 <= r <= (n-2)/2`:
/// `q_ij = C·α^e` with `C = (α-1)/(α+1)` and `e` measured from the corner
/// blocks or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondLow {
    spec: BallSpec,
    alpha: AlphaRoot,
    log2_c: f64,
    log2_alpha: f64,
}

impl SecondLow {
    pub fn new(spec: BallSpec) -> Result<Self> {
        let (n, r) = (spec.n(), spec.r());
        if r < 1 || 2 * r + 2 > n {
            return Err(Error::Domain(format!("second-class low range needs 1 <= r <= (n-2)/2, got n={n}, r={r}")));
        }
        let alpha = alpha_low_root(r)?;
        // (α-1)·α^{-(r+1)} = (α-1)/(α+1)
        let log2_c = alpha.excess.log2() - (alpha.value + 1.0).log2();
        Ok(SecondLow { spec, alpha, log2_c, log2_alpha: alpha.excess.ln_1p() / std::f64::consts::LN_2 })
    }

    pub fn alpha(&self) -> AlphaRoot {
        self.alpha
    }

    /// `C = (α-1)/(α+1)`.
    pub fn c(&self) -> f64 {
        self.log2_c.exp2()
    }

    /// Power of `α` at a band cell.
    pub fn exponent(&self, i: usize, j: usize) -> usize {
        let (n, r) = (self.spec.n(), self.spec.r());
        if i <= r + 1 && j <= r + 1 {
            (r + 1 - i) + (r + 1 - j)
        } else if i >= n - r && j >= n - r {
            (i - (n - r)) + (j - (n - r))
        } else {
            i.abs_diff(j)
        }
    }
}

impl BandEntries for SecondLow {
    fn spec(&self) -> BallSpec {
        self.spec
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.log2_entry(i, j).exp2()
    }
    fn log2_entry(&self, i: usize, j: usize) -> f64 {
        self.log2_c + self.exponent(i, j) as f64 * self.log2_alpha
    }
}

/// Geometric family for `(n-1)/2 < r < n-1`:
/// `q_ij = C·2^{λ_i}·2^{λ_j}` with `C = (α-1)·α^{-(n-r)}` and `λ_i` growing
/// linearly (in units of `log2 α`) towards both ends from a flat middle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondHigh {
    spec: BallSpec,
    alpha: AlphaRoot,
    log2_c: f64,
    log2_alpha: f64,
}

impl SecondHigh {
    pub fn new(spec: BallSpec) -> Result<Self> {
        let (n, r) = (spec.n(), spec.r());
        let alpha = alpha_high_root(n, r)?;
        let log2_alpha = alpha.excess.ln_1p() / std::f64::consts::LN_2;
        let log2_c = alpha.excess.log2() - (n - r) as f64 * log2_alpha;
        Ok(SecondHigh { spec, alpha, log2_c, log2_alpha })
    }

    pub fn alpha(&self) -> AlphaRoot {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.log2_c.exp2()
    }

    /// `λ_i / log2 α`.
    pub fn lambda_steps(&self, i: usize) -> usize {
        let (n, r) = (self.spec.n(), self.spec.r());
        if i <= n - r {
            n - r - i
        } else if i > r {
            i - r - 1
        } else {
            0
        }
    }

    /// `λ_i` in bits.
    pub fn lambda(&self, i: usize) -> f64 {
        self.lambda_steps(i) as f64 * self.log2_alpha
    }
}

impl BandEntries for SecondHigh {
    fn spec(&self) -> BallSpec {
        self.spec
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.log2_entry(i, j).exp2()
    }
    fn log2_entry(&self, i: usize, j: usize) -> f64 {
        self.log2_c + (self.lambda_steps(i) + self.lambda_steps(j)) as f64 * self.log2_alpha
    }
}

fn dense_checked(gen: &impl BandEntries) -> Result<StochasticMatrix<f64>> {
    StochasticMatrix::from_f64(gen.to_dense(), Some(gen.spec()), STOCHASTIC_TOL)
}

/// The geometric family for the narrow band, as a dense matrix.
pub fn q_second_low(spec: BallSpec) -> Result<StochasticMatrix<f64>> {
    dense_checked(&SecondLow::new(spec)?)
}

/// The geometric family for the wide band, as a dense matrix.
pub fn q_second_high(spec: BallSpec) -> Result<StochasticMatrix<f64>> {
    dense_checked(&SecondHigh::new(spec)?)
}

/// Diagonal scalings found by Sinkhorn balancing: the balanced matrix is
/// `diag(row_scale)·M·diag(col_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVectors {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Which sums to normalize first in each pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinkhornOrder {
    #[default]
    RowsFirst,
    ColumnsFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub order: SinkhornOrder,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        SinkhornOptions { tol: 1e-12, max_iter: 1_000_000, order: SinkhornOrder::RowsFirst }
    }
}

/// Sinkhorn balancing with rows normalized first.
pub fn sinkhorn_balance(m: &Array2<f64>, tol: f64, max_iter: usize) -> Result<(StochasticMatrix<f64>, ScalingVectors)> {
    sinkhorn_balance_with(m, &SinkhornOptions { tol, max_iter, order: SinkhornOrder::RowsFirst })
}

/// Alternately rescales rows and columns to sum to 1. One iteration is one
/// row pass plus one column pass; the residual is checked after each.
pub fn sinkhorn_balance_with(
    m: &Array2<f64>,
    opts: &SinkhornOptions,
) -> Result<(StochasticMatrix<f64>, ScalingVectors)> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::Dimension(format!("Sinkhorn needs a square matrix, got {rows}x{cols}")));
    }
    if m.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Contract("Sinkhorn input must be finite and non-negative".into()));
    }
    let n = rows;
    let mut x = vec![1.0; n];
    let mut y = vec![1.0; n];

    let row_sums = |x: &[f64], y: &[f64]| -> Vec<f64> {
        (0..n).map(|i| x[i] * (0..n).map(|j| m[[i, j]] * y[j]).sum::<f64>()).collect()
    };
    let col_sums = |x: &[f64], y: &[f64]| -> Vec<f64> {
        (0..n).map(|j| y[j] * (0..n).map(|i| m[[i, j]] * x[i]).sum::<f64>()).collect()
    };
    let deviation = |x: &[f64], y: &[f64]| -> f64 {
        row_sums(x, y).into_iter().chain(col_sums(x, y)).map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    };
    let normalize_rows = |x: &mut [f64], y: &[f64]| -> Result<()> {
        for i in 0..n {
            let s: f64 = (0..n).map(|j| m[[i, j]] * y[j]).sum();
            if s <= 0.0 {
                return Err(Error::Contract(format!("row {} has no support", i + 1)));
            }
            x[i] = 1.0 / s;
        }
        Ok(())
    };
    let normalize_cols = |x: &[f64], y: &mut [f64]| -> Result<()> {
        for j in 0..n {
            let s: f64 = (0..n).map(|i| m[[i, j]] * x[i]).sum();
            if s <= 0.0 {
                return Err(Error::Contract(format!("column {} has no support", j + 1)));
            }
            y[j] = 1.0 / s;
        }
        Ok(())
    };

    let mut residual = deviation(&x, &y);
    let mut iterations = 0;
    while residual > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::Convergence { iterations, residual });
        }
        match opts.order {
            SinkhornOrder::RowsFirst => {
                normalize_rows(&mut x, &y)?;
                normalize_cols(&x, &mut y)?;
            }
            SinkhornOrder::ColumnsFirst => {
                normalize_cols(&x, &mut y)?;
                normalize_rows(&mut x, &y)?;
            }
        }
        iterations += 1;
        residual = deviation(&x, &y);
    }

    let entries = Array2::from_shape_fn((n, n), |(i, j)| x[i] * m[[i, j]] * y[j]);
    let spec = band_spec_of(&entries);
    let balanced = StochasticMatrix::from_parts(entries, spec);
    Ok((balanced, ScalingVectors { row_scale: x, col_scale: y, iterations, residual }))
}

/// The band whose support matches the positive entries of `a`, if any.
fn band_spec_of(a: &Array2<f64>) -> Option<BallSpec> {
    let n = a.nrows();
    let r = (0..n).map(|i| (0..n).filter(|&j| a[[i, j]] > 0.0).map(|j| i.abs_diff(j)).max().unwrap_or(0)).max()?;
    let spec = BallSpec::new(n, r).ok()?;
    let band = BandMatrix::new(spec);
    a.indexed_iter()
        .all(|((i, j), &v)| (v > 0.0) == (band.entry(i + 1, j + 1) == 1))
        .then_some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(n: usize, r: usize) -> BallSpec {
        BallSpec::new(n, r).unwrap()
    }

    fn rat(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn first_class_examples() {
        let q = q_first_class(spec(5, 1)).unwrap();
        assert_eq!(*q.get(1, 1), rat(2, 3));
        assert_eq!(*q.get(2, 1), rat(1, 3));
        let col1: Rational64 = (1..=5).map(|i| *q.get(i, 1)).sum();
        assert_eq!(col1, rat(1, 1));

        let q = q_first_class(spec(4, 2)).unwrap();
        assert_eq!(*q.get(1, 1), rat(2, 4));
        assert_eq!(*q.get(2, 2), rat(1, 4));
        assert_eq!(*q.get(1, 4), rat(0, 1));

        let q = q_first_class(spec(6, 2)).unwrap();
        assert!(q.is_exactly_stochastic());
    }

    #[test]
    fn first_class_boundary_branches_agree() {
        for n in (3..40).step_by(2) {
            assert!(q_first_class(spec(n, (n - 1) / 2)).is_ok());
        }
    }

    #[test]
    fn second_low_examples() {
        let gen = SecondLow::new(spec(6, 2)).unwrap();
        let a = gen.alpha().value;
        assert_relative_eq!(gen.c(), (a - 1.0) / (a + 1.0), epsilon = 1e-15);
        let q = q_second_low(spec(6, 2)).unwrap();
        assert!((q.get(4, 4) - 0.13966).abs() < 1e-4);
        assert_relative_eq!(*q.get(4, 4), gen.c(), epsilon = 1e-15);
        // α⁴ = α² + α on the cubic
        assert_relative_eq!(*q.get(1, 1), gen.c() * (a * a + a), epsilon = 1e-13);
        assert!((q.get(1, 1) - 0.4301).abs() < 1e-4);
        let col1 = gen.c() * (a.powi(4) + a.powi(3) + a.powi(2));
        assert!((col1 - 1.0).abs() < 1e-9);
        assert!(matches!(q_second_low(spec(6, 3)), Err(Error::Domain(_))));
        assert!(matches!(q_second_low(spec(6, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn second_high_examples() {
        let q = q_second_high(spec(4, 2)).unwrap();
        let s2 = 2f64.sqrt();
        let c = (s2 - 1.0) / 2.0;
        assert_relative_eq!(*q.get(2, 2), c, epsilon = 1e-15);
        assert_relative_eq!(*q.get(1, 1), c * 2.0, epsilon = 1e-15);
        assert_relative_eq!(c * s2 * (s2 + 2.0), 1.0, epsilon = 1e-15);
        assert!(q_second_high(spec(5, 3)).unwrap().residual() <= 1e-9);
        let q = q_second_high(spec(20, 14)).unwrap();
        q.check_support().unwrap();
        // flat central block: rows/cols n-r..=r+1
        let mid = *q.get(6, 6);
        for i in 6..=15 {
            for j in 6..=15 {
                assert_eq!(*q.get(i, j), mid);
            }
        }
        assert!(matches!(q_second_high(spec(6, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn all_families_stochastic_up_to_200() {
        for n in 1..=200usize {
            let radii: Vec<usize> = if n <= 40 { (0..n).collect() } else { vec![0, 1, n / 4, (n - 1) / 2, n / 2, 3 * n / 4, n - 2, n - 1] };
            for r in radii {
                let s = spec(n, r);
                let q = q_first_class(s).unwrap();
                assert!(q.is_exactly_stochastic(), "first class n={n} r={r}");
                q.check_support().unwrap();
                if r >= 1 && 2 * r + 2 <= n {
                    let q = q_second_low(s).unwrap();
                    q.check_support().unwrap();
                    assert!(q.is_symmetric());
                }
                if 2 * r > n - 1 && r + 1 < n {
                    let q = q_second_high(s).unwrap();
                    q.check_support().unwrap();
                    assert!(q.is_symmetric());
                    for i in 1..=n {
                        for j in 1..=n {
                            assert_eq!(q.get(i, j), q.get(n + 1 - i, n + 1 - j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sinkhorn_uniform() {
        let (q, sv) = sinkhorn_balance(&Array2::ones((3, 3)), 1e-12, 100).unwrap();
        assert_eq!(sv.iterations, 1);
        for x in q.entries() {
            assert_relative_eq!(*x, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_eq!(q.support_spec(), Some(spec(3, 2)));
        assert!(sv.row_scale.iter().chain(&sv.col_scale).all(|&s| s > 0.0));
    }

    #[test]
    fn sinkhorn_reports_non_convergence() {
        let a = BandMatrix::new(spec(8, 2)).to_dense_f64();
        match sinkhorn_balance(&a, 1e-15, 2) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-15);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn sinkhorn_matches_second_high_family() {
        for (n, r) in [(4, 2), (6, 4), (8, 5), (10, 7)] {
            let a = BandMatrix::new(spec(n, r)).to_dense_f64();
            let (b, _) = sinkhorn_balance(&a, 1e-12, 1_000_000).unwrap();
            let q = q_second_high(spec(n, r)).unwrap();
            let diff = (b.entries() - q.entries()).iter().fold(0.0f64, |m, d| m.max(d.abs()));
            assert!(diff <= 1e-6, "n={n} r={r} diff={diff}");
        }
    }

    #[test]
    fn sinkhorn_order_invariance() {
        for (n, r) in [(6, 2), (7, 1), (9, 6)] {
            let a = BandMatrix::new(spec(n, r)).to_dense_f64();
            let (x, _) = sinkhorn_balance(&a, 1e-12, 1_000_000).unwrap();
            let opts = SinkhornOptions { order: SinkhornOrder::ColumnsFirst, ..Default::default() };
            let (y, _) = sinkhorn_balance_with(&a, &opts).unwrap();
            let diff = (x.entries() - y.entries()).iter().fold(0.0f64, |m, d| m.max(d.abs()));
            assert!(diff <= 1e-9, "n={n} r={r} diff={diff}");
        }
    }

    #[test]
    fn exports() {
        let q = q_first_class(spec(3, 1)).unwrap();
        let mut grid = Vec::new();
        q.write_grid(&mut grid).unwrap();
        assert_eq!(String::from_utf8(grid).unwrap(), "2/3,1/3,0\n1/3,1/3,1/3\n0,1/3,2/3\n");
        let mut trip = Vec::new();
        q.write_triplets(&mut trip).unwrap();
        let text = String::from_utf8(trip).unwrap();
        assert_eq!(text.lines().count(), 1 + 7);
        assert!(text.starts_with("i,j,value\n1,1,2/3\n"));
    }
}
