//! Reduced-size runs of the acceptance criteria, one row per criterion.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    certify_noncyclic, hereditary_lift, klein_certificate, prime_square_certificate, stft_support_probe, test_windows,
    universal_subset, verify_certificate,
};
use crate::clifford::{
    clifford_unitary, count_f_full, covariance_residual, crt_components, eigen_deficiency_check, max_covariance_residual,
    trace_abs_scan, EigenStrategy, Outcome, SL2ModN,
};
use crate::error::Result;
use crate::gabor::{Window, ZERO_TOL};
use crate::group::FiniteAbelianGroup;
use crate::numtheory::euler_phi;
use crate::rng;
use crate::spark::{is_full_spark, spark, SparkConfig};
use crate::uncertainty::{enumerate_f, verify_inclusion_f_in_fphi, verify_support_identity, EnumerationStrategy, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    /// Adds the `N = 7` full-spark run.
    pub full: bool,
    /// Zero threshold for the support-identity row.
    pub support_tol: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { full: false, support_tol: ZERO_TOL, workers: 1, seed: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub id: u32,
    pub statement: String,
    pub status: Status,
    pub detail: String,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub config: SelftestConfig,
    pub rows: Vec<CriterionRow>,
    pub passed: usize,
    pub failed: usize,
    pub indeterminate: usize,
}

fn grp(m: &[u64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(m).expect("valid moduli")
}

type Check = Result<(Status, String)>;

fn pass_if(ok: bool, detail: String) -> Check {
    Ok((if ok { Status::Pass } else { Status::Fail }, detail))
}

fn klein(cfg: &SelftestConfig) -> Check {
    let g = grp(&[2, 2]);
    let windows = test_windows(&g, 20, cfg.seed);
    let cert = klein_certificate(&g, &windows[0])?;
    let rep = verify_certificate(&cert, &windows)?;
    let probe = stft_support_probe(&g, &windows)?;
    pass_if(
        cert.points.len() == 6 && rep.max_rank <= 3 && probe.within_bound,
        format!("|Λ| = {}, max rank {}, max ‖V_f f̄‖₀ = {} ≤ {}", cert.points.len(), rep.max_rank, probe.max_support, probe.bound),
    )
}

fn prime_square(cfg: &SelftestConfig) -> Check {
    let h = grp(&[3, 3]);
    let mut r = rng::seeded(cfg.seed);
    let z = Window::gaussian_integer(&h, &mut r, 3);
    let cert = prime_square_certificate(3, &z)?;
    let rep = verify_certificate(&cert, &test_windows(&h, 10, cfg.seed))?;
    pass_if(
        rep.exact && rep.relations_checked == 16 && rep.max_rank <= 8,
        format!("{} exact relations, max rank {}", rep.relations_checked, rep.max_rank),
    )
}

fn hereditary(cfg: &SelftestConfig) -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for m in [[4u64, 2], [9, 3]] {
        let g = grp(&m);
        let (p, emb) = g.find_p_square_subgroup().expect("non-cyclic");
        let h = emb.sub.clone();
        let base = if p == 2 {
            klein_certificate(&h, &Window::seeded(&h, cfg.seed))?
        } else {
            let mut r = rng::seeded(cfg.seed);
            prime_square_certificate(p, &Window::gaussian_integer(&h, &mut r, 3))?
        };
        let lifted = hereditary_lift(&universal_subset(&base)?, &emb, &Window::seeded(&g, cfg.seed))?;
        let rep = verify_certificate(&lifted, &test_windows(&g, 5, cfg.seed))?;
        ok &= lifted.points.len() == g.order() && rep.max_rank < g.order();
        detail.push(format!("{h} → {g}: {} points, max rank {}", lifted.points.len(), rep.max_rank));
    }
    pass_if(ok, detail.join("; "))
}

fn noncyclic(cfg: &SelftestConfig) -> Check {
    for m in [&[2u64, 2][..], &[4, 2], &[2, 6], &[3, 3], &[9, 3], &[6, 3]] {
        certify_noncyclic(&grp(m), 3, cfg.seed)?;
    }
    let g = grp(&[2, 2]);
    let sc = SparkConfig::with_workers(cfg.workers);
    let mut worst = 0;
    for w in test_windows(&g, 3, cfg.seed) {
        worst = worst.max(spark(&w, &sc)?.spark.unwrap_or(usize::MAX));
    }
    pass_if(worst <= 4, format!("6 groups certified; spark ≤ {worst} on [2,2]"))
}

fn cyclic(cfg: &SelftestConfig) -> Check {
    let sc = SparkConfig::with_workers(cfg.workers);
    let mut sizes: Vec<(u64, usize)> = vec![(2, 3), (3, 3), (4, 3), (5, 3)];
    if cfg.full {
        sizes.push((7, 1));
    }
    let mut checked = 0u128;
    for (n, count) in sizes {
        let g = grp(&[n]);
        for w in test_windows(&g, count, cfg.seed) {
            let rep = is_full_spark(&w, &sc)?;
            if rep.full_spark != Some(true) {
                return pass_if(false, format!("window on Z/{n} not full spark, witness {:?}", rep.witness));
            }
            checked += rep.subsets_checked;
        }
    }
    pass_if(true, format!("all full spark, {checked} subsets"))
}

fn traces(cfg: &SelftestConfig) -> Check {
    let mut min = f64::INFINITY;
    let mut err = 0.0f64;
    for n in [3u64, 5, 7, 9] {
        let rep = trace_abs_scan(n, usize::MAX, cfg.workers)?;
        min = min.min(rep.min_abs_trace);
        err = err.max(rep.max_prediction_error);
    }
    pass_if(min >= 1.0 - 1e-6 && err < 1e-9, format!("min |Tr U_F| = {min:.12}, predictor error {err:.2e}"))
}

fn f_full(_: &SelftestConfig) -> Check {
    let mut slack = i64::MAX;
    for n in [3u64, 5, 7, 9] {
        let bound = (n * euler_phi(n)) as i64;
        for f in SL2ModN::all(n)? {
            slack = slack.min(count_f_full(&f) as i64 - bound);
        }
    }
    pass_if(slack >= 0, format!("min (count − N·φ(N)) = {slack}"))
}

fn covariance(cfg: &SelftestConfig) -> Check {
    let mut r = rng::seeded(cfg.seed);
    let mut worst = 0.0f64;
    for n in [3u64, 5, 9] {
        for _ in 0..5 {
            let u = clifford_unitary(&SL2ModN::random(n, &mut r)?)?;
            worst = worst.max(max_covariance_residual(&u)? / (n as f64).sqrt());
        }
    }
    for _ in 0..10 {
        let u = clifford_unitary(&SL2ModN::random(15, &mut r)?)?;
        let l = (r.random_range(0..15), r.random_range(0..15));
        worst = worst.max(covariance_residual(&u, l)? / 15f64.sqrt());
    }
    pass_if(worst < 1e-9, format!("max residual/√N = {worst:.2e}"))
}

fn eigen(cfg: &SelftestConfig) -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for f in [SL2ModN::zauner(3)?, SL2ModN::new(5, 1, 1, 0, 1)?] {
        let rep = eigen_deficiency_check(&f, EigenStrategy::Exhaustive, cfg.workers, cfg.seed)?;
        ok &= rep.results.iter().all(|r| r.outcome == Outcome::Dependent);
        detail.push(format!("{f}: {} eigenvectors dependent", rep.results.len()));
    }
    pass_if(ok, detail.join("; "))
}

fn support_identity(cfg: &SelftestConfig) -> Check {
    let mut r = rng::seeded(cfg.seed);
    let (mut holds, mut fails, mut indeterminate) = (0, 0, 0);
    for n in 2..=8u64 {
        let g = grp(&[n]);
        let mut pairs = vec![(Window::ones(&g), Window::ones(&g)), (Window::delta(&g, &g.zero()), Window::ones(&g))];
        for _ in 0..15 {
            pairs.push((Window::random(&g, &mut r), Window::random(&g, &mut r)));
        }
        for (phi, f) in pairs {
            match verify_support_identity(&phi, &f, cfg.support_tol)?.verdict {
                Verdict::Holds => holds += 1,
                Verdict::Fails => fails += 1,
                Verdict::Indeterminate => indeterminate += 1,
            }
        }
    }
    let detail = format!("{holds} hold, {fails} fail, {indeterminate} indeterminate");
    if fails > 0 {
        Ok((Status::Fail, detail))
    } else if indeterminate > 0 {
        Ok((Status::Indeterminate, detail))
    } else {
        Ok((Status::Pass, detail))
    }
}

fn inclusion(cfg: &SelftestConfig) -> Check {
    let mut checked = 0;
    let mut failures = 0;
    for n in [4u64, 5] {
        let g = grp(&[n]);
        let f = enumerate_f(&g, EnumerationStrategy::ExhaustiveSupportPatterns, cfg.seed, cfg.workers)?;
        let rep = verify_inclusion_f_in_fphi(&Window::seeded(&g, cfg.seed), &f)?;
        checked += rep.entries.len();
        failures += rep.failures + rep.indeterminate;
    }
    pass_if(failures == 0, format!("{checked} pairs, {failures} failures"))
}

fn multiplicativity(cfg: &SelftestConfig) -> Check {
    let mut r = rng::seeded(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f = SL2ModN::random(15, &mut r)?;
        let whole = clifford_unitary(&f)?.trace().norm();
        let mut prod = 1.0;
        for c in crt_components(&f)? {
            prod *= clifford_unitary(&c)?.trace().norm();
        }
        worst = worst.max((whole - prod).abs());
    }
    pass_if(worst < 1e-9, format!("max ||Tr U_F| − Π|Tr U_Fi|| = {worst:.2e}"))
}

const CRITERIA: [(&str, fn(&SelftestConfig) -> Check); 12] = [
    ("Klein group: 6 translates span at most 3 dimensions", klein),
    ("Z/p × Z/p: 2p² − 2 exact orthogonality relations", prime_square),
    ("certificates lift to groups containing the subgroup", hereditary),
    ("every non-cyclic group admits a certificate", noncyclic),
    ("random windows on cyclic groups are full spark", cyclic),
    ("|Tr U_F| ≥ 1 and equals the radical predictor", traces),
    ("F-full points number at least N·φ(N)", f_full),
    ("U_F D_λ U_F* equals D_Fλ up to phase", covariance),
    ("eigenvectors of U_F generate dependent N-subsets", eigen),
    ("‖V_φ f‖₀ equals Σ_j ‖(T^j φ · f)^‖₀", support_identity),
    ("F ⊆ F_φ on observed pairs", inclusion),
    ("|Tr U_F| factors over the CRT components", multiplicativity),
];

pub fn run(cfg: &SelftestConfig) -> SelftestReport {
    let mut rows = Vec::with_capacity(CRITERIA.len());
    for (i, (statement, check)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match check(cfg) {
            Ok(v) => v,
            Err(e) => (Status::Fail, e.to_string()),
        };
        rows.push(CriterionRow {
            id: i as u32 + 1,
            statement: statement.to_string(),
            status,
            detail,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let count = |s| rows.iter().filter(|r| r.status == s).count();
    SelftestReport {
        config: cfg.clone(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        indeterminate: count(Status::Indeterminate),
        rows,
    }
}
