//! Spark, full-spark decisions and dependent-subset search.
//!
//! Subsets of frame columns are enumerated in colexicographic order by a
//! depth-first search that picks the largest element first. Each level
//! orthogonalizes the new column against the ones already chosen, so the
//! Hadamard-normalized volume `|det| / Π‖cⱼ‖` is the running product of
//! residual ratios. A prefix whose volume drops below the threshold makes its
//! whole subtree dependent, and at the last level of an `N`-subset the residual
//! is a single inner product with the unit normal of the first `N − 1` columns.
//!
//! Work is split into tasks keyed by the two largest elements; tasks are
//! contiguous colex ranges and the reported witness is the colex-first
//! dependent subset, independent of the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{determinant, CyclotomicField, Cyclotomic};
use crate::error::{invalid, Error, Result};
use crate::gabor::{gabor_matrix, FrameMatrix, ShiftTables, TimeFrequencyPoint, Window};
use crate::linalg::{numerical_rank, CMatrix, RANK_RATIO};
use crate::numtheory::{binomial, lcm};
use crate::rng;

/// Hadamard-normalized determinant threshold.
pub const DET_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparkConfig {
    pub det_tol: f64,
    pub rank_ratio: f64,
    pub budget: u128,
    pub workers: usize,
}

impl Default for SparkConfig {
    fn default() -> Self {
        Self { det_tol: DET_TOL, rank_ratio: RANK_RATIO, budget: DEFAULT_BUDGET, workers: 1 }
    }
}

impl SparkConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self { workers: workers.max(1), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparkReport {
    pub group: Vec<u64>,
    /// Exact spark, when the search was able to determine it.
    pub spark: Option<usize>,
    pub lower_bound: usize,
    pub upper_bound: usize,
    pub full_spark: Option<bool>,
    /// Column indices (shift-major point indices) of a smallest dependent
    /// subset found.
    pub witness: Option<Vec<usize>>,
    pub witness_points: Option<Vec<TimeFrequencyPoint>>,
    pub subsets_checked: u128,
    pub exact: bool,
    pub elapsed_ms: f64,
}

/// Outcome of a subset search over the columns of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub witness: Option<Vec<usize>>,
    /// Subsets up to and including the witness in colex order, or all of
    /// them when none was found.
    pub subsets_checked: u128,
}

/// Colex rank of a sorted subset: `Σ C(cᵢ, i + 1)`.
pub fn colex_rank(subset: &[usize]) -> u128 {
    subset.iter().enumerate().map(|(i, &c)| binomial(c as u64, i as u64 + 1)).sum()
}

fn tasks(m: usize, k: usize) -> Vec<(usize, Option<usize>)> {
    let mut out = Vec::new();
    if k == 0 || k > m {
        return out;
    }
    if k == 1 {
        return (0..m).map(|t| (t, None)).collect();
    }
    for t1 in k - 1..m {
        for t2 in k - 2..t1 {
            out.push((t1, Some(t2)));
        }
    }
    out
}

fn run_tasks<F>(m: usize, k: usize, workers: usize, task: F) -> Option<Vec<usize>>
where
    F: Fn((usize, Option<usize>)) -> Option<Vec<usize>> + Sync,
{
    let list = tasks(m, k);
    let best = AtomicUsize::new(usize::MAX);
    let work = || {
        list.par_iter()
            .enumerate()
            .map(|(i, &t)| {
                if i > best.load(Ordering::Relaxed) {
                    return None;
                }
                let found = task(t);
                if found.is_some() {
                    best.fetch_min(i, Ordering::Relaxed);
                }
                found.map(|w| (i, w))
            })
            .filter_map(|x| x)
            .min_by_key(|(i, _)| *i)
            .map(|(_, w)| w)
    };
    if workers <= 1 {
        // sequential, in task order, stopping at the first hit
        return list.iter().find_map(|&t| task(t));
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}

struct Dfs<'a> {
    cols: &'a [Vec<Complex64>],
    norms: &'a [f64],
    n: usize,
    k: usize,
    tol: f64,
    basis: Vec<Vec<Complex64>>,
    chosen: Vec<usize>,
    normal: Vec<Complex64>,
}

impl Dfs<'_> {
    /// Orthogonalizes column `c` against `basis[..level]` into `basis[level]`,
    /// returning the residual ratio.
    fn push(&mut self, level: usize, c: usize) -> f64 {
        let norm = self.norms[c];
        if norm == 0.0 {
            return 0.0;
        }
        let (done, rest) = self.basis.split_at_mut(level);
        let r = &mut rest[0];
        r.copy_from_slice(&self.cols[c]);
        for _ in 0..2 {
            for q in done.iter() {
                let coef: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= coef * qi;
                }
            }
        }
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if rn > 0.0 {
            let inv = 1.0 / rn;
            for v in r.iter_mut() {
                *v *= inv;
            }
        }
        rn / norm
    }

    /// Unit normal to `basis[..n-1]` in `C^n`.
    fn compute_normal(&mut self) {
        let n = self.n;
        let basis = &self.basis[..n - 1];
        let pick = (0..n)
            .min_by(|&a, &b| {
                let wa: f64 = basis.iter().map(|q| q[a].norm_sqr()).sum();
                let wb: f64 = basis.iter().map(|q| q[b].norm_sqr()).sum();
                wa.total_cmp(&wb)
            })
            .unwrap();
        let r = &mut self.normal;
        r.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        r[pick] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in basis {
                let coef: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= coef * qi;
                }
            }
        }
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in r.iter_mut() {
            *v /= rn;
        }
    }

    fn witness_with_smallest_rest(&self, depth: usize) -> Vec<usize> {
        let rest = self.k - depth;
        let mut w: Vec<usize> = (0..rest).collect();
        w.extend(self.chosen[..depth].iter().rev());
        w
    }

    /// Explores positions `depth..k`; `prev` bounds the next element from above.
    fn descend(&mut self, depth: usize, prev: usize, vol: f64) -> Option<Vec<usize>> {
        let k = self.k;
        let lo = k - 1 - depth;
        if depth == k - 1 && k == self.n && depth > 0 {
            self.compute_normal();
            for c in lo..prev {
                let norm = self.norms[c];
                let ratio = if norm == 0.0 {
                    0.0
                } else {
                    let dot: Complex64 = self.normal.iter().zip(&self.cols[c]).map(|(a, b)| a.conj() * b).sum();
                    dot.norm() / norm
                };
                if vol * ratio < self.tol {
                    self.chosen[depth] = c;
                    return Some(self.witness_with_smallest_rest(depth + 1));
                }
            }
            return None;
        }
        for c in lo..prev {
            let ratio = self.push(depth, c);
            self.chosen[depth] = c;
            let v = vol * ratio;
            if v < self.tol {
                return Some(self.witness_with_smallest_rest(depth + 1));
            }
            if depth + 1 < k {
                if let Some(w) = self.descend(depth + 1, c, v) {
                    return Some(w);
                }
            }
        }
        None
    }
}

fn columns_of(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

/// Colex-first `k`-subset of the columns whose normalized volume is below
/// `tol`.
pub fn first_dependent_subset(columns: &CMatrix, k: usize, tol: f64, workers: usize) -> SearchOutcome {
    let m = columns.ncols();
    let total = binomial(m as u64, k as u64);
    if k == 0 || k > m {
        return SearchOutcome { witness: None, subsets_checked: 0 };
    }
    if k > columns.nrows() {
        // more vectors than dimensions: the colex-first subset already fails
        let w: Vec<usize> = (0..k).collect();
        return SearchOutcome { witness: Some(w), subsets_checked: 1 };
    }
    let cols = columns_of(columns);
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect();
    let n = columns.nrows();
    let witness = run_tasks(m, k, workers, |(t1, t2)| {
        let mut dfs = Dfs {
            cols: &cols,
            norms: &norms,
            n,
            k,
            tol,
            basis: vec![vec![Complex64::new(0.0, 0.0); n]; k],
            chosen: vec![0; k],
            normal: vec![Complex64::new(0.0, 0.0); n],
        };
        dfs.chosen[0] = t1;
        let r1 = dfs.push(0, t1);
        if r1 < tol {
            return Some(dfs.witness_with_smallest_rest(1));
        }
        let Some(t2) = t2 else { return None };
        if k == 2 && n == 2 {
            return dfs.descend(1, t2 + 1, r1).filter(|w| w.contains(&t2));
        }
        let r2 = dfs.push(1, t2);
        dfs.chosen[1] = t2;
        let v = r1 * r2;
        if v < tol {
            return Some(dfs.witness_with_smallest_rest(2));
        }
        if k == 2 {
            return None;
        }
        dfs.descend(2, t2, v)
    });
    let subsets_checked = witness.as_ref().map_or(total, |w| colex_rank(w) + 1);
    SearchOutcome { witness, subsets_checked }
}

/// Generic colex enumeration of `k`-subsets of `0..m`, returning the first
/// subset satisfying `pred`.
pub fn first_in_colex<F>(m: usize, k: usize, workers: usize, pred: F) -> Option<Vec<usize>>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    fn rec<F: Fn(&[usize]) -> bool>(desc: &mut Vec<usize>, k: usize, prev: usize, pred: &F) -> Option<Vec<usize>> {
        let depth = desc.len();
        if depth == k {
            let mut s = desc.clone();
            s.reverse();
            return pred(&s).then_some(s);
        }
        for c in (k - 1 - depth)..prev {
            desc.push(c);
            let r = rec(desc, k, c, pred);
            desc.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }
    run_tasks(m, k, workers, |(t1, t2)| {
        let mut desc = vec![t1];
        if let Some(t2) = t2 {
            desc.push(t2);
        }
        let prev = *desc.last().unwrap();
        if desc.len() == k {
            let mut s = desc.clone();
            s.reverse();
            return pred(&s).then_some(s);
        }
        rec(&mut desc, k, prev, &pred)
    })
}

/// Hadamard-normalized volume `|det| / Π‖cⱼ‖` of a column selection, via
/// the same Gram–Schmidt ratios the enumeration uses.
pub fn normalized_volume(columns: &CMatrix) -> f64 {
    let cols = columns_of(columns);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut vol = 1.0;
    for c in cols {
        let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let mut r = c.clone();
        for _ in 0..2 {
            for q in &basis {
                let coef: Complex64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= coef * qi;
                }
            }
        }
        let rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        vol *= rn / norm;
        if rn == 0.0 {
            return 0.0;
        }
        basis.push(r.into_iter().map(|v| v / rn).collect());
    }
    vol
}

/// `P_Λ = det(D_Λ)` for `|Λ| = N` distinct points.
pub fn p_lambda(f: &Window, points: &[TimeFrequencyPoint]) -> Result<Complex64> {
    let n = f.group().order();
    if points.len() != n {
        return Err(invalid(format!("P_Λ needs exactly {n} points, got {}", points.len())));
    }
    Ok(gabor_matrix(f, points)?.matrix.determinant())
}

/// Whether `|det(D_Λ)|` is below `det_tol` times the product of column norms.
pub fn is_singular(f: &Window, points: &[TimeFrequencyPoint], det_tol: f64) -> Result<bool> {
    let fm = gabor_matrix(f, points)?;
    if points.len() != f.group().order() {
        return Err(invalid("singularity is decided for square systems"));
    }
    let det = fm.matrix.determinant().norm();
    let hadamard: f64 = (0..fm.ncols()).map(|j| fm.matrix.column(j).norm()).product();
    Ok(det <= det_tol * hadamard)
}

fn require_nonzero(f: &Window) -> Result<()> {
    if f.is_zero() {
        return Err(invalid("the window must be nonzero"));
    }
    Ok(())
}

fn full_columns(f: &Window) -> CMatrix {
    let g = f.group();
    let n = g.order();
    let tables = ShiftTables::new(g);
    let mut m = CMatrix::zeros(n, n * n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..n * n {
        tables.shift_into(f.values(), p, &mut col);
        m.column_mut(p).copy_from_slice(&col);
    }
    m
}

fn witness_points(f: &Window, w: &[usize]) -> Vec<TimeFrequencyPoint> {
    w.iter().map(|&i| TimeFrequencyPoint::from_index(f.group(), i)).collect()
}

/// Full-spark decision over all `C(N², N)` subsets of `G × Ĝ`.
pub fn is_full_spark(f: &Window, cfg: &SparkConfig) -> Result<SparkReport> {
    require_nonzero(f)?;
    let start = Instant::now();
    let n = f.group().order();
    let needed = binomial((n * n) as u64, n as u64);
    if needed > cfg.budget {
        return Err(Error::SizeLimit { needed, budget: cfg.budget });
    }
    let out = first_dependent_subset(&full_columns(f), n, cfg.det_tol, cfg.workers);
    let full = out.witness.is_none();
    Ok(SparkReport {
        group: f.group().moduli().to_vec(),
        spark: full.then_some(n + 1),
        lower_bound: if full { n + 1 } else { 2 },
        upper_bound: if full { n + 1 } else { n },
        full_spark: Some(full),
        witness_points: out.witness.as_ref().map(|w| witness_points(f, w)),
        witness: out.witness,
        subsets_checked: out.subsets_checked,
        exact: false,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Smallest `k` admitting a dependent `k`-subset of `(f, G × Ĝ)`, or `N + 1`.
/// All `N`-subsets are tested first: when they are independent so is every
/// smaller subset, and otherwise `k < N` is searched upward. Stops with a
/// partial report (bounds only) once the budget would be exceeded.
pub fn spark(f: &Window, cfg: &SparkConfig) -> Result<SparkReport> {
    require_nonzero(f)?;
    let start = Instant::now();
    let n = f.group().order();
    let cols = full_columns(f);
    let mut report = SparkReport {
        group: f.group().moduli().to_vec(),
        spark: None,
        lower_bound: 2,
        upper_bound: n + 1,
        full_spark: None,
        witness: None,
        witness_points: None,
        subsets_checked: 0,
        exact: false,
        elapsed_ms: 0.0,
    };
    let mut checked: u128 = 0;
    let mut best: Option<Vec<usize>> = None;
    let top = binomial((n * n) as u64, n as u64);
    let ks: Vec<usize> = if top <= cfg.budget {
        let out = first_dependent_subset(&cols, n, cfg.det_tol, cfg.workers);
        checked += out.subsets_checked;
        match out.witness {
            None => {
                report.spark = Some(n + 1);
                report.lower_bound = n + 1;
                report.full_spark = Some(true);
                report.subsets_checked = checked;
                report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                return Ok(report);
            }
            Some(w) => {
                report.full_spark = Some(false);
                report.upper_bound = n;
                best = Some(w);
                (2..n).collect()
            }
        }
    } else {
        (2..=n).collect()
    };
    for k in ks {
        let needed = binomial((n * n) as u64, k as u64);
        if checked.saturating_add(needed) > cfg.budget {
            report.lower_bound = k;
            report.witness_points = best.as_ref().map(|w| witness_points(f, w));
            report.witness = best;
            report.subsets_checked = checked;
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
        let out = first_dependent_subset(&cols, k, cfg.det_tol, cfg.workers);
        checked += out.subsets_checked;
        if out.witness.is_some() {
            best = out.witness;
            report.upper_bound = k;
            report.full_spark = Some(false);
            break;
        }
        report.lower_bound = k + 1;
    }
    if report.upper_bound <= n {
        report.spark = Some(report.upper_bound);
        report.lower_bound = report.upper_bound;
    } else {
        report.spark = Some(n + 1);
        report.full_spark = Some(true);
    }
    report.witness_points = best.as_ref().map(|w| witness_points(f, w));
    report.witness = best;
    report.subsets_checked = checked;
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Exact columns `π(λ)f` in `Q(ζ_m)` for a Gaussian-integer window, with
/// `m = lcm(2·exponent, 4)`.
pub fn exact_columns(f: &Window) -> Result<Vec<Vec<Cyclotomic>>> {
    let g = f.group();
    let l = g.exponent();
    let m = lcm(2 * l, 4);
    let field = CyclotomicField::new(m);
    let vals = gaussian_integer_values(f.values())?;
    let exact: Vec<Cyclotomic> = vals.iter().map(|&(re, im)| field.gaussian(re, im)).collect();
    let n = g.order();
    let elems: Vec<_> = g.elements().collect();
    let phases = g.phase_table();
    let mut cols = Vec::with_capacity(n * n);
    for x in &elems {
        for phase_row in &phases {
            let col = elems
                .iter()
                .enumerate()
                .map(|(gi, e)| {
                    let src = g.index_of(&g.sub(e, x));
                    &field.zeta_pow(phase_row[gi] * (m / l)) * &exact[src]
                })
                .collect();
            cols.push(col);
        }
    }
    Ok(cols)
}

/// Reads complex values as Gaussian integers, failing on any fractional part.
pub fn gaussian_integer_values(values: &[Complex64]) -> Result<Vec<(i128, i128)>> {
    values
        .iter()
        .map(|v| {
            let (re, im) = (v.re.round(), v.im.round());
            if re != v.re || im != v.im || re.abs() > 1e15 || im.abs() > 1e15 {
                Err(invalid(format!("{v} is not a Gaussian integer")))
            } else {
                Ok((re as i128, im as i128))
            }
        })
        .collect()
}

/// Exact full-spark decision: every `N`-subset determinant is tested for
/// exact vanishing in the cyclotomic field.
pub fn is_full_spark_exact(f: &Window, cfg: &SparkConfig) -> Result<SparkReport> {
    require_nonzero(f)?;
    let start = Instant::now();
    let n = f.group().order();
    let needed = binomial((n * n) as u64, n as u64);
    if needed > cfg.budget {
        return Err(Error::SizeLimit { needed, budget: cfg.budget });
    }
    let cols = exact_columns(f)?;
    let witness = first_in_colex(n * n, n, cfg.workers, |subset| {
        let rows: Vec<Vec<Cyclotomic>> =
            (0..n).map(|r| subset.iter().map(|&c| cols[c][r].clone()).collect()).collect();
        determinant(&rows).is_zero()
    });
    let full = witness.is_none();
    Ok(SparkReport {
        group: f.group().moduli().to_vec(),
        spark: full.then_some(n + 1),
        lower_bound: if full { n + 1 } else { 2 },
        upper_bound: if full { n + 1 } else { n },
        full_spark: Some(full),
        subsets_checked: witness.as_ref().map_or(needed, |w| colex_rank(w) + 1),
        witness_points: witness.as_ref().map(|w| witness_points(f, w)),
        witness,
        exact: true,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchStrategy {
    Exhaustive,
    /// Candidate subsets are unions of the given column groups whose sizes
    /// add up to `k`, tried in lexicographic order of group indices.
    OrbitGuided { orbits: Vec<Vec<usize>> },
    Randomized { trials: usize, seed: u64 },
}

/// A `k`-subset of the columns with numerical rank below `k`, if one is found.
/// `None` from a non-exhaustive strategy proves nothing.
pub fn rank_deficient_subset_search(
    frame: &FrameMatrix,
    k: usize,
    strategy: &SearchStrategy,
    workers: usize,
) -> Result<Option<Vec<usize>>> {
    let m = &frame.matrix;
    if k > m.nrows() {
        return Err(invalid(format!("k = {k} exceeds the dimension {}", m.nrows())));
    }
    let deficient = |idx: &[usize]| numerical_rank(&m.select_columns(idx), RANK_RATIO) < idx.len();
    match strategy {
        SearchStrategy::Exhaustive => {
            let out = first_dependent_subset(m, k, DET_TOL, workers);
            Ok(out.witness.filter(|w| deficient(w)))
        }
        SearchStrategy::OrbitGuided { orbits } => {
            let mut found = None;
            let mut chosen = Vec::new();
            orbit_unions(orbits, k, 0, &mut chosen, &mut |union| {
                let mut idx = union.to_vec();
                idx.sort_unstable();
                idx.dedup();
                if idx.len() == k && deficient(&idx) {
                    found = Some(idx);
                    return true;
                }
                false
            });
            Ok(found)
        }
        SearchStrategy::Randomized { trials, seed } => {
            let mut rng = rng::seeded(*seed);
            for _ in 0..*trials {
                let mut idx = sample(&mut rng, m.ncols(), k).into_vec();
                idx.sort_unstable();
                if deficient(&idx) {
                    return Ok(Some(idx));
                }
            }
            Ok(None)
        }
    }
}

fn orbit_unions(
    orbits: &[Vec<usize>],
    remaining: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if remaining == 0 {
        return visit(chosen);
    }
    for i in from..orbits.len() {
        let len = orbits[i].len();
        if len == 0 || len > remaining {
            continue;
        }
        let before = chosen.len();
        chosen.extend_from_slice(&orbits[i]);
        if orbit_unions(orbits, remaining - len, i + 1, chosen, visit) {
            return true;
        }
        chosen.truncate(before);
    }
    false
}
