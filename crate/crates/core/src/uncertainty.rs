//! Support sizes of `f`, `f̂` and `V_φ f`; the set `F` of attainable pairs
//! `(‖f‖₀, ‖f̂‖₀)`, the set `F_φ` of pairs `(‖f‖₀, ‖V_φ f‖₀ − N² + N)`, and
//! the inclusion `F ⊆ F_φ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gabor::{fourier, stft, support_count_scaled, translate, Window, ZERO_TOL};
use crate::group::FiniteAbelianGroup;
use crate::linalg::{jacobi_svd, CMatrix};
use crate::rng;

/// Largest order handled by the exhaustive enumeration of `F`.
pub const EXHAUSTIVE_MAX: usize = 8;
/// Largest order whose support patterns are enumerated by the samplers.
pub const PATTERN_MAX: usize = 16;
/// Draws per support pattern in the sampled strategies.
pub const DRAWS_PER_PATTERN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportPair {
    pub k: usize,
    pub l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StftPair {
    pub k: usize,
    /// `‖V_φ f‖₀ − N² + N`.
    pub s: i64,
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `(‖f‖₀, ‖f̂‖₀)`, each relative to its own largest entry.
pub fn support_pair(f: &Window) -> Result<SupportPair> {
    support_pair_tol(f, ZERO_TOL)
}

pub fn support_pair_tol(f: &Window, tol: f64) -> Result<SupportPair> {
    if f.max_abs() == 0.0 {
        return Err(invalid("support pair of the zero window"));
    }
    let fh = fourier(f);
    let k = support_count_scaled(f.values(), tol, f.max_abs()).count;
    let l = support_count_scaled(fh.values(), tol, fh.max_abs()).count;
    Ok(SupportPair { k, l })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportIdentityReport {
    /// `‖V_φ f‖₀`.
    pub lhs: usize,
    /// `Σ_x ‖(T_x φ · f)^‖₀`.
    pub rhs: usize,
    pub terms: Vec<usize>,
    pub verdict: Verdict,
    /// The group is not cyclic; translations run over all of `G`.
    pub extension: bool,
}

/// Compares `‖V_φ f‖₀` with `Σ_x ‖(T_x φ · f)^‖₀`. Both sides are counted
/// against the same absolute threshold, `tol` times the largest STFT entry.
pub fn verify_support_identity(phi: &Window, f: &Window, tol: f64) -> Result<SupportIdentityReport> {
    if phi.max_abs() == 0.0 || f.max_abs() == 0.0 {
        return Err(invalid("support identity needs nonzero windows"));
    }
    let g = phi.group().clone();
    let v = stft(phi, f)?;
    let scale = max_abs(&v);
    let left = support_count_scaled(&v, tol, scale);
    let mut terms = Vec::with_capacity(g.order());
    let mut borderline = left.borderline;
    for x in g.elements() {
        let prod = translate(phi, &x)?.mul(f);
        let c = support_count_scaled(fourier(&prod).values(), tol, scale);
        borderline |= c.borderline;
        terms.push(c.count);
    }
    let rhs = terms.iter().sum();
    let verdict = if borderline {
        Verdict::Indeterminate
    } else if left.count == rhs {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(SupportIdentityReport { lhs: left.count, rhs, terms, verdict, extension: !g.is_cyclic() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationStrategy {
    /// Every support `S ∋ 0` against every prescribed zero set `Z ⊆ Ĝ`.
    ExhaustiveSupportPatterns,
    /// Random coefficients on every support pattern.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservedPair {
    pub k: usize,
    pub l: usize,
    pub witness: Vec<Complex64>,
}

/// Pairs found in `F`. A listed pair is attained by its witness; a missing
/// pair was not observed, which proves nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservedF {
    pub group: FiniteAbelianGroup,
    pub strategy: EnumerationStrategy,
    pub seed: u64,
    pub draws: usize,
    pub pairs: Vec<ObservedPair>,
}

impl ObservedF {
    pub fn contains(&self, k: usize, l: usize) -> bool {
        self.pairs.iter().any(|p| p.k == k && p.l == l)
    }

    pub fn pair_set(&self) -> Vec<SupportPair> {
        self.pairs.iter().map(|p| SupportPair { k: p.k, l: p.l }).collect()
    }
}

fn bits(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Orthonormal basis of `{c : A c = 0}`.
fn null_space(a: &CMatrix) -> Vec<Vec<Complex64>> {
    let cols = a.ncols();
    let mut sq = CMatrix::zeros(a.nrows().max(cols), cols);
    sq.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = jacobi_svd(&sq);
    let thresh = 1e-9 * svd.sigma[0].max(1.0);
    (0..cols)
        .filter(|&i| svd.sigma[i] <= thresh)
        .map(|i| svd.v.column(i).iter().copied().collect())
        .collect()
}

/// Random element of `{f : supp f ⊆ S, f̂|_Z = 0}`, or `None` if that space is `{0}`.
fn draw_constrained(
    table: &[Vec<Complex64>],
    support: &[usize],
    zeros: &[usize],
    rng: &mut rng::SeededRng,
) -> Option<Vec<Complex64>> {
    let n = table.len();
    let a = CMatrix::from_fn(zeros.len(), support.len(), |i, j| table[zeros[i]][support[j]]);
    let basis = if zeros.is_empty() {
        (0..support.len())
            .map(|j| (0..support.len()).map(|i| Complex64::new((i == j) as u8 as f64, 0.0)).collect())
            .collect()
    } else {
        null_space(&a)
    };
    if basis.is_empty() {
        return None;
    }
    let coef = rng::complex_gaussian_vec(rng, basis.len());
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    for (c, b) in coef.iter().zip(&basis) {
        for (j, &s) in support.iter().enumerate() {
            f[s] += c * b[j];
        }
    }
    Some(f)
}

fn character_table(g: &FiniteAbelianGroup) -> Vec<Vec<Complex64>> {
    let l = g.exponent();
    g.phase_table().iter().map(|row| row.iter().map(|&k| crate::group::root_of_unity(k, l)).collect()).collect()
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

fn record(found: &mut BTreeMap<(usize, usize), Vec<Complex64>>, g: &FiniteAbelianGroup, f: Vec<Complex64>) {
    let w = Window::new(g.clone(), f).expect("sized to the group");
    if w.max_abs() == 0.0 {
        return;
    }
    let fh = fourier(&w);
    let a = support_count_scaled(w.values(), ZERO_TOL, w.max_abs());
    let b = support_count_scaled(fh.values(), ZERO_TOL, fh.max_abs());
    if a.borderline || b.borderline {
        return;
    }
    found.entry((a.count, b.count)).or_insert_with(|| w.into_values());
}

/// Observed `F` for a group of order `N`.
///
/// The exhaustive strategy takes, for every support `S` containing `0` (every
/// support has such a translate) and every `Z ⊆ Ĝ`, a random element of
/// `{f : supp f ⊆ S, f̂|_Z = 0}`; a random element of that space attains
/// `(|S|, N − |Z|)` whenever any element does, so every pair of `F` is found
/// with probability one. The sampled strategy draws `DRAWS_PER_PATTERN`
/// random `f` on every support pattern.
pub fn enumerate_f(
    g: &FiniteAbelianGroup,
    strategy: EnumerationStrategy,
    seed: u64,
    workers: usize,
) -> Result<ObservedF> {
    let n = g.order();
    let table = character_table(g);
    let masks: Vec<u64> = match strategy {
        EnumerationStrategy::ExhaustiveSupportPatterns => {
            if n > EXHAUSTIVE_MAX {
                return Err(Error::Unsupported(format!("exhaustive enumeration of F needs N <= {EXHAUSTIVE_MAX}")));
            }
            (1..1u64 << n).filter(|m| m & 1 == 1).collect()
        }
        EnumerationStrategy::Sampled => {
            if n > PATTERN_MAX {
                return Err(Error::Unsupported(format!("support patterns are enumerated only for N <= {PATTERN_MAX}")));
            }
            (1..1u64 << n).collect()
        }
    };
    let job = || {
        masks
            .par_iter()
            .map(|&mask| {
                let mut rng = rng::substream(seed, mask);
                let support = bits(mask, n);
                let mut found = BTreeMap::new();
                match strategy {
                    EnumerationStrategy::ExhaustiveSupportPatterns => {
                        for zmask in 0..1u64 << n {
                            let zeros = bits(zmask, n);
                            if let Some(f) = draw_constrained(&table, &support, &zeros, &mut rng) {
                                record(&mut found, g, f);
                            }
                        }
                    }
                    EnumerationStrategy::Sampled => {
                        for _ in 0..DRAWS_PER_PATTERN {
                            let f = draw_constrained(&table, &support, &[], &mut rng).expect("nonempty support");
                            record(&mut found, g, f);
                        }
                    }
                }
                found
            })
            .collect::<Vec<_>>()
    };
    let parts = in_pool(workers, job);
    // first witness in pattern order, independent of scheduling
    let mut all: BTreeMap<(usize, usize), Vec<Complex64>> = BTreeMap::new();
    for part in parts {
        for (key, w) in part {
            all.entry(key).or_insert(w);
        }
    }
    let draws = match strategy {
        EnumerationStrategy::ExhaustiveSupportPatterns => 1,
        EnumerationStrategy::Sampled => DRAWS_PER_PATTERN,
    };
    Ok(ObservedF {
        group: g.clone(),
        strategy,
        seed,
        draws,
        pairs: all.into_iter().map(|((k, l), witness)| ObservedPair { k, l, witness }).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionEntry {
    pub k: usize,
    pub l: usize,
    /// `‖f/φ‖₀`.
    pub support: usize,
    /// `‖V_φ(f/φ)‖₀`.
    pub stft_support: usize,
    /// `N² − N + l`.
    pub expected: usize,
    pub indeterminate: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub n: usize,
    pub entries: Vec<InclusionEntry>,
    pub failures: usize,
    pub indeterminate: usize,
}

/// For every observed `(k, l)` with witness `f`, checks that `g = f/φ` has
/// `‖g‖₀ = k` and `‖V_φ g‖₀ = N² − N + l`.
pub fn verify_inclusion_f_in_fphi(phi: &Window, observed: &ObservedF) -> Result<InclusionReport> {
    let g = phi.group();
    if g != &observed.group {
        return Err(invalid(format!("window lives on {g}, pairs on {}", observed.group)));
    }
    let scale = phi.max_abs();
    if scale == 0.0 || phi.values().iter().any(|v| v.norm() <= ZERO_TOL * scale) {
        return Err(invalid("φ has a zero coordinate"));
    }
    let n = g.order();
    let mut entries = Vec::with_capacity(observed.pairs.len());
    for p in &observed.pairs {
        let quotient: Vec<Complex64> = p.witness.iter().zip(phi.values()).map(|(f, q)| f / q).collect();
        let gw = Window::new(g.clone(), quotient)?;
        let s = support_count_scaled(gw.values(), ZERO_TOL, gw.max_abs());
        let v = stft(phi, &gw)?;
        let t = support_count_scaled(&v, ZERO_TOL, max_abs(&v));
        let expected = n * n - n + p.l;
        let indeterminate = s.borderline || t.borderline;
        entries.push(InclusionEntry {
            k: p.k,
            l: p.l,
            support: s.count,
            stft_support: t.count,
            expected,
            indeterminate,
            ok: !indeterminate && s.count == p.k && t.count == expected,
        });
    }
    let indeterminate = entries.iter().filter(|e| e.indeterminate).count();
    let failures = entries.iter().filter(|e| !e.ok && !e.indeterminate).count();
    Ok(InclusionReport { n, entries, failures, indeterminate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FphiSample {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub pairs: Vec<StftPair>,
    /// Smallest `‖V_φ f‖₀` seen.
    pub min_stft_support: usize,
    pub skipped_borderline: usize,
}

/// Observed `F_φ` from `trials` random `f` on every support pattern.
pub fn sample_f_phi(phi: &Window, trials: usize, seed: u64, workers: usize) -> Result<FphiSample> {
    let g = phi.group().clone();
    let n = g.order();
    if phi.max_abs() == 0.0 {
        return Err(invalid("φ is zero"));
    }
    if n > PATTERN_MAX {
        return Err(Error::Unsupported(format!("support patterns are enumerated only for N <= {PATTERN_MAX}")));
    }
    let masks: Vec<u64> = (1..1u64 << n).collect();
    let job = || {
        masks
            .par_iter()
            .map(|&mask| {
                let mut rng = rng::substream(seed, mask);
                let support = bits(mask, n);
                let mut out = Vec::with_capacity(trials);
                for _ in 0..trials {
                    let mut f = vec![Complex64::new(0.0, 0.0); n];
                    for &s in &support {
                        f[s] = rng::complex_gaussian(&mut rng);
                    }
                    let w = Window::new(g.clone(), f).expect("sized to the group");
                    let v = stft(phi, &w).expect("same group");
                    let a = support_count_scaled(w.values(), ZERO_TOL, w.max_abs());
                    let t = support_count_scaled(&v, ZERO_TOL, max_abs(&v));
                    out.push((a.borderline || t.borderline, a.count, t.count));
                }
                out
            })
            .collect::<Vec<_>>()
    };
    let rows = in_pool(workers, job);
    let mut pairs = std::collections::BTreeSet::new();
    let mut min_stft_support = usize::MAX;
    let mut skipped_borderline = 0;
    for (borderline, k, t) in rows.into_iter().flatten() {
        if borderline {
            skipped_borderline += 1;
            continue;
        }
        min_stft_support = min_stft_support.min(t);
        pairs.insert(StftPair { k, s: t as i64 - (n * n) as i64 + n as i64 });
    }
    Ok(FphiSample { n, seed, trials, pairs: pairs.into_iter().collect(), min_stft_support, skipped_borderline })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::modulate;
    use proptest::prelude::*;

    fn cyc(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    #[test]
    fn support_pairs() {
        let g = cyc(5);
        assert_eq!(support_pair(&Window::delta(&g, &g.zero())).unwrap(), SupportPair { k: 1, l: 5 });
        assert_eq!(support_pair(&Window::ones(&g)).unwrap(), SupportPair { k: 5, l: 1 });
        let g4 = cyc(4);
        let ind = Window::from_real(g4.clone(), &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(support_pair(&ind).unwrap(), SupportPair { k: 2, l: 2 });
        assert!(support_pair(&Window::zeros(&g)).is_err());
    }

    #[test]
    fn identity_small_cases() {
        for n in 2..=6 {
            let g = cyc(n);
            let d = Window::delta(&g, &g.zero());
            let r = verify_support_identity(&d, &d, ZERO_TOL).unwrap();
            assert_eq!((r.lhs, r.rhs, r.verdict), (n as usize, n as usize, Verdict::Holds));
        }
        let g = cyc(2);
        let o = Window::ones(&g);
        let r = verify_support_identity(&o, &o, ZERO_TOL).unwrap();
        assert_eq!((r.lhs, r.rhs, r.terms.clone()), (2, 2, vec![1, 1]));
        let g = cyc(5);
        for s in 0..100 {
            let mut rng = rng::seeded(s);
            let phi = Window::random(&g, &mut rng);
            let f = Window::random(&g, &mut rng);
            let r = verify_support_identity(&phi, &f, ZERO_TOL).unwrap();
            assert_eq!((r.lhs, r.rhs, r.verdict), (25, 25, Verdict::Holds));
        }
        let k = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        assert!(verify_support_identity(&Window::seeded(&k, 1), &Window::seeded(&k, 2), ZERO_TOL).unwrap().extension);
    }

    #[test]
    fn tiny_tolerance_is_indeterminate() {
        let g = cyc(5);
        let o = Window::ones(&g);
        // sums of fifth roots of unity vanish only to about 1e-16
        assert_eq!(verify_support_identity(&o, &o, ZERO_TOL).unwrap().verdict, Verdict::Holds);
        let r = verify_support_identity(&o, &o, 1e-20).unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn prime_five_is_the_tao_set() {
        let f = enumerate_f(&cyc(5), EnumerationStrategy::ExhaustiveSupportPatterns, 1, 1).unwrap();
        let mut expected = Vec::new();
        for k in 1..=5 {
            for l in 1..=5 {
                if k + l >= 6 {
                    expected.push(SupportPair { k, l });
                }
            }
        }
        assert_eq!(f.pair_set(), expected);
        for p in &f.pairs {
            let w = Window::new(cyc(5), p.witness.clone()).unwrap();
            assert_eq!(support_pair(&w).unwrap(), SupportPair { k: p.k, l: p.l });
        }
    }

    #[test]
    fn composite_sets() {
        let f4 = enumerate_f(&cyc(4), EnumerationStrategy::ExhaustiveSupportPatterns, 1, 1).unwrap();
        assert!(f4.contains(2, 2) && f4.contains(1, 4) && f4.contains(4, 1));
        // k·l ≥ N for every f ≠ 0
        for n in [4u64, 6] {
            let f = enumerate_f(&cyc(n), EnumerationStrategy::ExhaustiveSupportPatterns, 2, 1).unwrap();
            assert!(f.pairs.iter().all(|p| p.k * p.l >= n as usize));
            assert!(f.contains(1, n as usize));
        }
        let sampled = enumerate_f(&cyc(5), EnumerationStrategy::Sampled, 1, 1).unwrap();
        assert!(sampled.pairs.iter().all(|p| p.k + p.l >= 6));
        assert!(sampled.contains(1, 5) && sampled.contains(5, 5));
    }

    #[test]
    fn prime_lower_bound() {
        for n in [3u64, 7] {
            let f = enumerate_f(&cyc(n), EnumerationStrategy::ExhaustiveSupportPatterns, 3, 1).unwrap();
            assert!(f.pairs.iter().all(|p| p.k + p.l > n as usize));
        }
    }

    #[test]
    fn enumeration_is_worker_independent() {
        let a = enumerate_f(&cyc(6), EnumerationStrategy::ExhaustiveSupportPatterns, 9, 1).unwrap();
        let b = enumerate_f(&cyc(6), EnumerationStrategy::ExhaustiveSupportPatterns, 9, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inclusion() {
        let g = cyc(5);
        let phi = Window::seeded(&g, 11);
        let mut observed = ObservedF {
            group: g.clone(),
            strategy: EnumerationStrategy::Sampled,
            seed: 0,
            draws: 1,
            pairs: vec![
                ObservedPair { k: 1, l: 5, witness: Window::delta(&g, &g.zero()).into_values() },
                ObservedPair { k: 5, l: 1, witness: Window::ones(&g).into_values() },
            ],
        };
        let r = verify_inclusion_f_in_fphi(&phi, &observed).unwrap();
        assert_eq!(r.entries[0].stft_support, 25);
        assert_eq!(r.entries[1].stft_support, 21);
        assert_eq!(r.failures, 0);
        observed.pairs[1].l = 2;
        assert_eq!(verify_inclusion_f_in_fphi(&phi, &observed).unwrap().failures, 1);
        let mut bad = phi.clone().into_values();
        bad[2] = Complex64::new(0.0, 0.0);
        let bad = Window::new(g.clone(), bad).unwrap();
        assert!(matches!(verify_inclusion_f_in_fphi(&bad, &observed), Err(Error::InvalidArgument(_))));
        for n in [4u64, 6] {
            let g = cyc(n);
            let f = enumerate_f(&g, EnumerationStrategy::ExhaustiveSupportPatterns, 1, 1).unwrap();
            let r = verify_inclusion_f_in_fphi(&Window::seeded(&g, 5), &f).unwrap();
            assert_eq!((r.failures, r.indeterminate), (0, 0));
        }
    }

    #[test]
    fn f_phi_sample() {
        let g = cyc(4);
        let phi = Window::seeded(&g, 2);
        let s = sample_f_phi(&phi, 3, 1, 1).unwrap();
        assert!(s.pairs.contains(&StftPair { k: 4, s: 4 }));
        // V_φ δ₀ consists of N translates of φ against characters: support N·‖φ‖₀
        let d = stft(&phi, &Window::delta(&g, &g.zero())).unwrap();
        assert_eq!(support_count_scaled(&d, ZERO_TOL, max_abs(&d)).count, 16);
        assert!(s.pairs.contains(&StftPair { k: 1, s: 4 }));
        assert!(s.min_stft_support > 16 - 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn pair_invariant_under_shifts(n in 2u64..=8, seed: u64, mask in 1u64..256, x in 0u64..8, xi in 0u64..8) {
            let g = cyc(n);
            let mut rng = rng::seeded(seed);
            let vals: Vec<Complex64> = (0..n as usize)
                .map(|i| if mask >> i & 1 == 1 { rng::complex_gaussian(&mut rng) } else { Complex64::new(0.0, 0.0) })
                .collect();
            let f = Window::new(g.clone(), vals).unwrap();
            prop_assume!(f.max_abs() > 0.0);
            let p = support_pair(&f).unwrap();
            let sh = translate(&f, &g.element(&[(x % n) as i64]).unwrap()).unwrap();
            let md = modulate(&f, &g.character_at((xi % n) as usize)).unwrap();
            prop_assert_eq!(support_pair(&sh).unwrap(), p);
            prop_assert_eq!(support_pair(&md).unwrap(), p);
        }

        #[test]
        fn identity_holds(n in 2u64..=8, seed: u64) {
            let g = cyc(n);
            let mut rng = rng::seeded(seed);
            let phi = Window::random(&g, &mut rng);
            let f = Window::random(&g, &mut rng);
            let r = verify_support_identity(&phi, &f, ZERO_TOL).unwrap();
            prop_assert!(r.verdict != Verdict::Fails);
        }
    }
}
