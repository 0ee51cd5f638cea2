use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use gaborlab::certificates::{certify_noncyclic, test_windows, verify_certificate, SparkCertificate};
use gaborlab::clifford::{
    count_f_full, eigen_deficiency_check, trace_abs_scan, EigenStrategy, Outcome, SL2ModN,
};
use gaborlab::gabor::{Window, ZERO_TOL};
use gaborlab::group::FiniteAbelianGroup;
use gaborlab::numtheory::euler_phi;
use gaborlab::selftest::{self, SelftestConfig, Status};
use gaborlab::spark::{is_full_spark_exact, spark, SparkConfig, DEFAULT_BUDGET};
use gaborlab::uncertainty::{
    enumerate_f, sample_f_phi, verify_inclusion_f_in_fphi, verify_support_identity, EnumerationStrategy, Verdict,
    EXHAUSTIVE_MAX,
};
use gaborlab::{rng, Complex64, Error};

const SCHEMA_VERSION: u32 = 1;

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "gaborlab", version, about = "Spark, certificates and Clifford unitaries for finite Gabor systems")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel searches.
    #[arg(long, global = true, env = "GABORLAB_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a group given as "n1xn2x...".
    Group(GroupArgs),
    /// Spark of a seeded (or supplied) window.
    Spark(SparkArgs),
    /// Build and check a spark-deficiency certificate for a non-cyclic group.
    Certify(CertifyArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
    /// Clifford unitaries over SL(2, Z/NZ) and their eigenvector frames
    #[command(subcommand)]
    Clifford(CliffordCommand),
    /// STFT support identities and the observed sets F and F_φ on Z/NZ
    #[command(subcommand)]
    Uncertainty(UncertaintyCommand),
    /// Reduced-size run of every acceptance criterion.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long)]
    group: FiniteAbelianGroup,
}

#[derive(Args)]
struct SparkArgs {
    #[arg(long)]
    group: FiniteAbelianGroup,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exact cyclotomic arithmetic on a Gaussian-integer window.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// JSON array of [re, im] pairs, used instead of the seeded window.
    #[arg(long)]
    window: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    group: FiniteAbelianGroup,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random windows the certificate is checked against before it is written.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args)]
struct VerifyArgs {
    certificate: PathBuf,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum CliffordCommand {
    /// |Tr U_F| over SL(2, Z/NZ) against the radical predictor.
    TraceScan {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// F-full point counts, for one F or for the whole group.
    Ffull {
        #[arg(long)]
        n: u64,
        /// "a,b,c,d", "zauner" or "identity"; omit to scan every F.
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
    },
    /// Dependent N-subsets among displacements of eigenvectors of U_F.
    EigenDeficiency {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Orbit)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Orbit,
    Randomized,
}

#[derive(Subcommand)]
enum UncertaintyCommand {
    /// ‖V_φ f‖₀ against Σ_j ‖(T^j φ · f)^‖₀ on random pairs.
    Identity {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = ZERO_TOL)]
        tol: f64,
    },
    /// F ⊆ F_φ on the observed pairs of F.
    Inclusion {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of seeded windows φ.
        #[arg(long, default_value_t = 5)]
        phis: usize,
    },
    /// Observed pairs (‖f‖₀, ‖f̂‖₀).
    EnumerateF {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        strategy: Option<EnumArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Observed pairs (‖f‖₀, ‖V_φ f‖₀ − N² + N) for a seeded φ.
    SampleFphi {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct SelftestArgs {
    /// Include the N = 7 full-spark run.
    #[arg(long)]
    full: bool,
    /// Zero threshold for support counting.
    #[arg(long, default_value_t = ZERO_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// A table for `--format csv`.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Output {
    json: Value,
    table: Option<Table>,
    code: u8,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Unsupported(_) | Error::SizeLimit { .. } | Error::WrongConstructor(_) => USAGE,
            _ => FAILED,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: USAGE, message: message.into() }
}

fn envelope(command: &str, config: Value, report: impl Serialize) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "report": report,
    })
}

fn cyclic(n: u64) -> Result<FiniteAbelianGroup, Failure> {
    Ok(FiniteAbelianGroup::cyclic(n)?)
}

fn parse_f(n: u64, s: &str) -> Result<SL2ModN, Failure> {
    match s {
        "zauner" => Ok(SL2ModN::zauner(n)?),
        "identity" => Ok(SL2ModN::identity(n)?),
        _ => {
            let parts: Vec<i64> = s
                .split(',')
                .map(|p| p.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| usage(format!("cannot parse matrix {s:?}; expected a,b,c,d")))?;
            if parts.len() != 4 {
                return Err(usage(format!("matrix {s:?} needs four entries")));
            }
            Ok(SL2ModN::new(n, parts[0], parts[1], parts[2], parts[3])?)
        }
    }
}

fn read_window(group: &FiniteAbelianGroup, path: &PathBuf) -> Result<Window, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let values: Vec<Complex64> =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Window::new(group.clone(), values)?)
}

fn cmd_group(a: GroupArgs) -> Result<Output, Failure> {
    let g = a.group;
    let sub = g.find_p_square_subgroup();
    let report = json!({
        "moduli": g.moduli(),
        "order": g.order(),
        "exponent": g.exponent(),
        "cyclic": g.is_cyclic(),
        "p_square_subgroup": sub.as_ref().map(|(p, emb)| json!({ "p": p, "embedding": emb })),
    });
    let table = Table {
        header: vec!["group", "order", "exponent", "cyclic", "p"],
        rows: vec![vec![
            g.to_string(),
            g.order().to_string(),
            g.exponent().to_string(),
            g.is_cyclic().to_string(),
            sub.map(|(p, _)| p.to_string()).unwrap_or_default(),
        ]],
    };
    Ok(Output { json: envelope("group", json!({ "group": g.to_string() }), report), table: Some(table), code: OK })
}

fn cmd_spark(a: SparkArgs, workers: usize) -> Result<Output, Failure> {
    let g = a.group;
    let cfg = SparkConfig { budget: a.budget, ..SparkConfig::with_workers(workers) };
    let window = match &a.window {
        Some(p) => read_window(&g, p)?,
        None if a.exact => Window::gaussian_integer(&g, &mut rng::seeded(a.seed), 3),
        None => Window::seeded(&g, a.seed),
    };
    let report = if a.exact { is_full_spark_exact(&window, &cfg)? } else { spark(&window, &cfg)? };
    let code = if report.spark.is_some() { OK } else { INCONCLUSIVE };
    let table = Table {
        header: vec!["group", "spark", "lower_bound", "upper_bound", "full_spark", "subsets_checked", "exact"],
        rows: vec![vec![
            g.to_string(),
            report.spark.map(|s| s.to_string()).unwrap_or_default(),
            report.lower_bound.to_string(),
            report.upper_bound.to_string(),
            report.full_spark.map(|s| s.to_string()).unwrap_or_default(),
            report.subsets_checked.to_string(),
            report.exact.to_string(),
        ]],
    };
    let config = json!({
        "group": g.to_string(),
        "seed": a.seed,
        "exact": a.exact,
        "budget": a.budget.to_string(),
        "window": window.values(),
    });
    Ok(Output { json: envelope("spark", config, report), table: Some(table), code })
}

fn point_table(cert: &SparkCertificate) -> Table {
    let fmt = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    Table {
        header: vec!["index", "shift", "freq"],
        rows: cert.points.iter().enumerate().map(|(i, p)| vec![i.to_string(), fmt(&p.shift.0), fmt(&p.freq.0)]).collect(),
    }
}

fn cmd_certify(a: CertifyArgs) -> Result<Output, Failure> {
    let cert = certify_noncyclic(&a.group, a.trials, a.seed)?;
    let table = point_table(&cert);
    let json = serde_json::to_value(&cert).map_err(|e| Failure { code: FAILED, message: e.to_string() })?;
    Ok(Output { json, table: Some(table), code: OK })
}

fn cmd_verify(a: VerifyArgs) -> Result<Output, Failure> {
    let text = fs::read_to_string(&a.certificate).map_err(|e| usage(format!("{}: {e}", a.certificate.display())))?;
    let config = json!({ "certificate": a.certificate.display().to_string(), "trials": a.trials, "seed": a.seed });
    let cert: SparkCertificate = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            let out = json!({ "verified": false, "error": format!("malformed certificate: {e}") });
            return Ok(Output { json: envelope("verify", config, out), table: None, code: FAILED });
        }
    };
    let (verified, report, error) = match verify_certificate(&cert, &test_windows(&cert.group, a.trials, a.seed)) {
        Ok(r) => (true, Some(r), None),
        Err(Error::FailedVerification(m)) => (false, None, Some(m)),
        Err(e) => return Err(e.into()),
    };
    let table = Table {
        header: vec!["verified", "lambda_size", "max_rank", "rank_bound", "windows_tested", "exact", "error"],
        rows: vec![vec![
            verified.to_string(),
            cert.points.len().to_string(),
            report.as_ref().map(|r| r.max_rank.to_string()).unwrap_or_default(),
            cert.claims.rank_bound.to_string(),
            report.as_ref().map(|r| r.windows_tested.to_string()).unwrap_or_default(),
            report.as_ref().map(|r| r.exact.to_string()).unwrap_or_default(),
            error.clone().unwrap_or_default(),
        ]],
    };
    let out = json!({ "verified": verified, "verification": report, "error": error });
    Ok(Output { json: envelope("verify", config, out), table: Some(table), code: if verified { OK } else { FAILED } })
}

fn cmd_clifford(c: CliffordCommand, workers: usize) -> Result<Output, Failure> {
    match c {
        CliffordCommand::TraceScan { n, budget } => {
            let r = trace_abs_scan(n, budget.unwrap_or(usize::MAX), workers)?;
            let ok = r.min_abs_trace >= 1.0 - 1e-6 && r.max_prediction_error < 1e-9;
            let table = Table {
                header: vec!["n", "group_size", "scanned", "min_abs_trace", "max_prediction_error", "zero_predictions"],
                rows: vec![vec![
                    n.to_string(),
                    r.group_size.to_string(),
                    r.scanned.to_string(),
                    format!("{:.15}", r.min_abs_trace),
                    format!("{:.3e}", r.max_prediction_error),
                    r.zero_predictions.to_string(),
                ]],
            };
            let config = json!({ "n": n, "budget": budget });
            Ok(Output { json: envelope("clifford trace-scan", config, r), table: Some(table), code: if ok { OK } else { FAILED } })
        }
        CliffordCommand::Ffull { n, f } => {
            let bound = n * euler_phi(n);
            let fs: Vec<SL2ModN> = match &f {
                Some(s) => vec![parse_f(n, s)?],
                None => SL2ModN::all(n)?,
            };
            let rows: Vec<(SL2ModN, u64, u64)> = fs.iter().map(|f| (*f, f.order(), count_f_full(f))).collect();
            let ok = rows.iter().all(|r| r.2 >= bound);
            let table = Table {
                header: vec!["a", "b", "c", "d", "order", "f_full", "bound"],
                rows: rows
                    .iter()
                    .map(|(f, o, c)| {
                        vec![f.a, f.b, f.c, f.d, *o, *c, bound].into_iter().map(|x| x.to_string()).collect()
                    })
                    .collect(),
            };
            let report = match &f {
                Some(_) => json!({ "f": rows[0].0, "order": rows[0].1, "f_full": rows[0].2, "bound": bound, "meets_bound": ok }),
                None => {
                    let min = rows.iter().min_by_key(|r| r.2).expect("nonempty group");
                    json!({
                        "n": n,
                        "matrices": rows.len(),
                        "bound": bound,
                        "min_f_full": min.2,
                        "argmin": min.0,
                        "all_meet_bound": ok,
                    })
                }
            };
            let config = json!({ "n": n, "f": f });
            Ok(Output { json: envelope("clifford ffull", config, report), table: Some(table), code: if ok { OK } else { FAILED } })
        }
        CliffordCommand::EigenDeficiency { n, f, strategy, seed } => {
            let fm = parse_f(n, &f)?;
            let strat = match strategy {
                StrategyArg::Exhaustive => EigenStrategy::Exhaustive,
                StrategyArg::Orbit => EigenStrategy::Orbit,
                StrategyArg::Randomized => EigenStrategy::Randomized,
            };
            let r = eigen_deficiency_check(&fm, strat, workers, seed)?;
            let code = if r.results.iter().any(|x| x.outcome == Outcome::FullSpark) {
                FAILED
            } else if r.inconclusive > 0 {
                INCONCLUSIVE
            } else {
                OK
            };
            let table = Table {
                header: vec!["eigenvalue_re", "eigenvalue_im", "eigenspace_dim", "basis_index", "outcome", "method", "witness"],
                rows: r
                    .results
                    .iter()
                    .map(|x| {
                        vec![
                            format!("{:.12}", x.eigenvalue.re),
                            format!("{:.12}", x.eigenvalue.im),
                            x.eigenspace_dim.to_string(),
                            x.basis_index.map(|i| i.to_string()).unwrap_or_else(|| "random".into()),
                            serde_json::to_value(x.outcome).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                            x.method.clone(),
                            x.witness
                                .as_ref()
                                .map(|w| w.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(" "))
                                .unwrap_or_default(),
                        ]
                    })
                    .collect(),
            };
            let config = json!({ "n": n, "f": fm, "seed": seed });
            Ok(Output { json: envelope("clifford eigen-deficiency", config, r), table: Some(table), code })
        }
    }
}

fn cmd_uncertainty(c: UncertaintyCommand, workers: usize) -> Result<Output, Failure> {
    match c {
        UncertaintyCommand::Identity { n, trials, seed, tol } => {
            let g = cyclic(n)?;
            let mut r = rng::seeded(seed);
            let mut rows = Vec::with_capacity(trials);
            let (mut holds, mut fails, mut indeterminate) = (0, 0, 0);
            for i in 0..trials {
                let phi = Window::random(&g, &mut r);
                let f = Window::random(&g, &mut r);
                let rep = verify_support_identity(&phi, &f, tol)?;
                match rep.verdict {
                    Verdict::Holds => holds += 1,
                    Verdict::Fails => fails += 1,
                    Verdict::Indeterminate => indeterminate += 1,
                }
                rows.push(vec![
                    i.to_string(),
                    rep.lhs.to_string(),
                    rep.rhs.to_string(),
                    serde_json::to_value(rep.verdict).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                ]);
            }
            let code = if fails > 0 {
                FAILED
            } else if indeterminate > 0 {
                INCONCLUSIVE
            } else {
                OK
            };
            let report = json!({ "n": n, "trials": trials, "holds": holds, "fails": fails, "indeterminate": indeterminate });
            let config = json!({ "n": n, "trials": trials, "seed": seed, "tol": tol });
            let table = Table { header: vec!["trial", "lhs", "rhs", "verdict"], rows };
            Ok(Output { json: envelope("uncertainty identity", config, report), table: Some(table), code })
        }
        UncertaintyCommand::Inclusion { n, seed, phis } => {
            let g = cyclic(n)?;
            let strategy = if g.order() <= EXHAUSTIVE_MAX {
                EnumerationStrategy::ExhaustiveSupportPatterns
            } else {
                EnumerationStrategy::Sampled
            };
            let observed = enumerate_f(&g, strategy, seed, workers)?;
            let mut reports = Vec::with_capacity(phis);
            let mut rows = Vec::new();
            for i in 0..phis {
                let phi = Window::random(&g, &mut rng::substream(seed, 100 + i as u64));
                let rep = verify_inclusion_f_in_fphi(&phi, &observed)?;
                for e in &rep.entries {
                    rows.push(vec![
                        i.to_string(),
                        e.k.to_string(),
                        e.l.to_string(),
                        e.stft_support.to_string(),
                        e.expected.to_string(),
                        e.ok.to_string(),
                    ]);
                }
                reports.push(rep);
            }
            let failures: usize = reports.iter().map(|r| r.failures).sum();
            let indeterminate: usize = reports.iter().map(|r| r.indeterminate).sum();
            let code = if failures > 0 {
                FAILED
            } else if indeterminate > 0 {
                INCONCLUSIVE
            } else {
                OK
            };
            let report = json!({
                "n": n,
                "strategy": strategy,
                "pairs": observed.pair_set(),
                "failures": failures,
                "indeterminate": indeterminate,
                "per_phi": reports,
            });
            let config = json!({ "n": n, "seed": seed, "phis": phis });
            let table = Table { header: vec!["phi", "k", "l", "stft_support", "expected", "ok"], rows };
            Ok(Output { json: envelope("uncertainty inclusion", config, report), table: Some(table), code })
        }
        UncertaintyCommand::EnumerateF { n, strategy, seed } => {
            let g = cyclic(n)?;
            let strategy = match strategy {
                Some(EnumArg::Exhaustive) => EnumerationStrategy::ExhaustiveSupportPatterns,
                Some(EnumArg::Sampled) => EnumerationStrategy::Sampled,
                None if g.order() <= EXHAUSTIVE_MAX => EnumerationStrategy::ExhaustiveSupportPatterns,
                None => EnumerationStrategy::Sampled,
            };
            let observed = enumerate_f(&g, strategy, seed, workers)?;
            let table = Table {
                header: vec!["k", "l"],
                rows: observed.pairs.iter().map(|p| vec![p.k.to_string(), p.l.to_string()]).collect(),
            };
            let config = json!({ "n": n, "strategy": strategy, "seed": seed });
            Ok(Output { json: envelope("uncertainty enumerate-f", config, observed), table: Some(table), code: OK })
        }
        UncertaintyCommand::SampleFphi { n, trials, seed } => {
            let g = cyclic(n)?;
            let phi = Window::seeded(&g, seed);
            let s = sample_f_phi(&phi, trials, seed, workers)?;
            let table = Table {
                header: vec!["k", "s"],
                rows: s.pairs.iter().map(|p| vec![p.k.to_string(), p.s.to_string()]).collect(),
            };
            let config = json!({ "n": n, "trials": trials, "seed": seed });
            Ok(Output { json: envelope("uncertainty sample-fphi", config, s), table: Some(table), code: OK })
        }
    }
}

fn cmd_selftest(a: SelftestArgs, workers: usize) -> Result<Output, Failure> {
    let cfg = SelftestConfig { full: a.full, support_tol: a.tol, workers, seed: a.seed };
    let report = selftest::run(&cfg);
    for row in &report.rows {
        let tag = match row.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Indeterminate => "INDETERMINATE",
        };
        eprintln!("[{tag:>13}] {:>2}. {} ({}; {:.0} ms)", row.id, row.statement, row.detail, row.elapsed_ms);
    }
    let code = if report.failed > 0 {
        FAILED
    } else if report.indeterminate > 0 {
        INCONCLUSIVE
    } else {
        OK
    };
    let table = Table {
        header: vec!["id", "statement", "status", "detail", "elapsed_ms"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.to_string(),
                    r.statement.clone(),
                    serde_json::to_value(r.status).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                    r.detail.clone(),
                    format!("{:.1}", r.elapsed_ms),
                ]
            })
            .collect(),
    };
    Ok(Output { json: envelope("selftest", json!({ "full": a.full, "tol": a.tol, "seed": a.seed }), report), table: Some(table), code })
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&out.json).map_err(|e| Failure { code: FAILED, message: e.to_string() })?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let table = out.table.as_ref().ok_or_else(|| usage("this command has no CSV form"))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Failure { code: FAILED, message: e.to_string() };
            w.write_record(&table.header).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(io_err)?;
            }
            w.into_inner().map_err(|e| Failure { code: FAILED, message: e.to_string() })
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let workers = cli.workers.max(1);
    let out = match cli.command {
        Command::Group(a) => cmd_group(a)?,
        Command::Spark(a) => cmd_spark(a, workers)?,
        Command::Certify(a) => cmd_certify(a)?,
        Command::Verify(a) => cmd_verify(a)?,
        Command::Clifford(c) => cmd_clifford(c, workers)?,
        Command::Uncertainty(c) => cmd_uncertainty(c, workers)?,
        Command::Selftest(a) => cmd_selftest(a, workers)?,
    };
    let bytes = render(&out, cli.format)?;
    match &cli.out {
        Some(path) => fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => io::stdout().write_all(&bytes).map_err(|e| Failure { code: FAILED, message: e.to_string() })?,
    }
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
