//! Batch front-end: exact distance queries, recovery-strategy runs with
//! bound checking, the per-strategy summary table, and the verification
//! suites.
//!
//! Exit codes: 0 on success, 1 when a verification or bound check fails,
//! 2 on usage, parse, or alphabet errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use seqrecover::lab::{self, VerificationReport};
use seqrecover::oracle::{DistanceKind, RecoveryLevel, RecoveryReport};
use seqrecover::recovery::{dtw, edit, frechet, run_strategy_with, strategy_info, StrategyInfo};
use seqrecover::{all_binary_up_to, ExactRational, Sequence, Symbol, STRATEGIES};

#[derive(Parser)]
#[command(
    name = "seqrecover",
    version,
    about = "Sequence recovery from distance-oracle queries"
)]
struct Cli {
    /// key=value config file (max_n, query_cap, brute_query_len)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the exact distance between two sequences
    Oracle {
        /// edit | dtw | frechet
        distance: String,
        x: String,
        y: String,
        /// p-norm exponent for dtw
        #[arg(long, default_value_t = 1)]
        p: u32,
    },
    /// Run one recovery strategy and emit JSON-lines reports
    Recover {
        /// strategy id, e.g. edit.nonadaptive.wildcard (see `table`)
        strategy: String,
        #[arg(long)]
        n: usize,
        /// a single hidden input
        #[arg(long)]
        hidden: Option<String>,
        /// seeded random hidden inputs: SEED COUNT
        #[arg(long, num_args = 2, value_names = ["SEED", "COUNT"])]
        random: Option<Vec<u64>>,
        /// every binary input of length <= n
        #[arg(long)]
        exhaustive: bool,
        /// human-readable lines instead of JSON
        #[arg(long)]
        pretty: bool,
    },
    /// Measured max query count vs declared bound for every strategy
    Table {
        #[arg(long)]
        n: usize,
        /// sample size when exhaustive enumeration is too large (n > 10)
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pretty: bool,
    },
    /// Run a verification suite: witness | mss | runs-window |
    /// equiv-partition | frechet-classes | lipschitz | all
    Verify {
        suite: String,
        #[arg(long)]
        pretty: bool,
    },
}

#[derive(Clone, Debug)]
struct Config {
    max_n: usize,
    query_cap: Option<usize>,
    brute_query_len: Option<usize>,
}

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Config, String> {
        let mut cfg = Config {
            max_n: std::env::var("SEQRECOVER_MAX_N")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(16),
            query_cap: None,
            brute_query_len: None,
        };
        let Some(path) = path else { return Ok(cfg) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {} is not key=value", lineno + 1))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| format!("config line {}: invalid value", lineno + 1))?;
            match key.trim() {
                "max_n" => cfg.max_n = value,
                "query_cap" => cfg.query_cap = Some(value),
                "brute_query_len" => cfg.brute_query_len = Some(value),
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
        Ok(cfg)
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "max_n": self.max_n,
            "query_cap": self.query_cap,
            "brute_query_len": self.brute_query_len,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Config::load(cli.config.as_ref()) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    match cli.cmd {
        Cmd::Oracle { distance, x, y, p } => cmd_oracle(&distance, &x, &y, p),
        Cmd::Recover {
            strategy,
            n,
            hidden,
            random,
            exhaustive,
            pretty,
        } => cmd_recover(&cfg, &strategy, n, hidden, random, exhaustive, pretty),
        Cmd::Table {
            n,
            samples,
            seed,
            pretty,
        } => cmd_table(&cfg, n, samples, seed, pretty),
        Cmd::Verify { suite, pretty } => cmd_verify(&cfg, &suite, pretty),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn parse_seq(text: &str) -> Result<Sequence, String> {
    text.parse::<Sequence>().map_err(|e| e.to_string())
}

fn cmd_oracle(distance: &str, x: &str, y: &str, p: u32) -> ExitCode {
    let run = || -> Result<ExactRational, String> {
        let x = parse_seq(x)?;
        let y = parse_seq(y)?;
        let kind = match distance {
            "edit" => DistanceKind::Edit,
            "dtw" => DistanceKind::Dtw { p },
            "frechet" => DistanceKind::Frechet,
            other => return Err(format!("unknown distance `{other}`")),
        };
        lab::oracle_distance(kind, &x, &y).map_err(|e| e.to_string())
    };
    match run() {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(&e),
    }
}

/// Whether a report meets its strategy's recovery guarantee against the
/// true hidden input.
fn recovery_correct(
    info: &StrategyInfo,
    report: &RecoveryReport,
    hidden: &Sequence,
    n: usize,
) -> Result<bool, String> {
    let ok = match report.level {
        RecoveryLevel::Exact => report.recovered == *hidden,
        RecoveryLevel::EquivalenceClass => match info.kind {
            DistanceKind::Frechet => {
                report.recovered.condensed().map_err(|e| e.to_string())?
                    == hidden.condensed().map_err(|e| e.to_string())?
            }
            _ => {
                dtw::equivalence_class_of(n, hidden)
                    .map_err(|e| e.to_string())?
                    .canonical
                    == report.recovered
            }
        },
        RecoveryLevel::ZeroDistance => lab::oracle_distance(info.kind, hidden, &report.recovered)
            .map_err(|e| e.to_string())?
            .is_zero(),
    };
    Ok(ok)
}

fn hidden_inputs(
    info: &StrategyInfo,
    n: usize,
    hidden: Option<String>,
    random: Option<Vec<u64>>,
    exhaustive: bool,
) -> Result<Vec<Sequence>, String> {
    let min_len = usize::from(!info.supports_empty);
    if let Some(h) = hidden {
        let s = parse_seq(&h)?;
        if s.len() > n {
            return Err(format!("hidden input is longer than n={n}"));
        }
        return Ok(vec![s]);
    }
    if let Some(args) = random {
        let (seed, count) = (args[0], args[1] as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..count)
            .map(|_| {
                let len = rng.gen_range(min_len..=n);
                Sequence::from_bits(&(0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>())
            })
            .collect());
    }
    if exhaustive {
        return Ok(all_binary_up_to(min_len, n));
    }
    Err("one of --hidden, --random, --exhaustive is required".to_string())
}

fn cmd_recover(
    cfg: &Config,
    strategy: &str,
    n: usize,
    hidden: Option<String>,
    random: Option<Vec<u64>>,
    exhaustive: bool,
    pretty: bool,
) -> ExitCode {
    let Some(info) = strategy_info(strategy) else {
        return usage_error(&format!(
            "unknown strategy `{strategy}`; known: {}",
            STRATEGIES
                .iter()
                .map(|s| s.id)
                .collect::<Vec<_>>()
                .join(", ")
        ));
    };
    if n == 0 || n > cfg.max_n {
        return usage_error(&format!("n must be in 1..={}", cfg.max_n));
    }
    let seed = random.as_ref().map(|r| r[0]);
    let inputs = match hidden_inputs(info, n, hidden, random, exhaustive) {
        Ok(v) => v,
        Err(e) => return usage_error(&e),
    };
    let header = json!({
        "type": "config",
        "command": "recover",
        "strategy": strategy,
        "n": n,
        "seed": seed,
        "inputs": inputs.len(),
        "config": cfg.json(),
    });
    if pretty {
        println!("# {header}");
    } else {
        println!("{header}");
    }
    let mut all_ok = true;
    for (index, h) in inputs.iter().enumerate() {
        match run_strategy_with(strategy, h, n, cfg.query_cap) {
            Ok(report) => {
                let correct = match recovery_correct(info, &report, h, n) {
                    Ok(c) => c,
                    Err(e) => return usage_error(&e),
                };
                all_ok &= correct && report.bound_ok;
                if pretty {
                    println!(
                        "[{index}] hidden={h} recovered={} queries={}/{} level={:?} {}",
                        report.recovered,
                        report.queries_used,
                        report.declared_bound,
                        report.level,
                        if correct && report.bound_ok {
                            "ok"
                        } else {
                            "FAIL"
                        }
                    );
                } else {
                    let mut v = serde_json::to_value(&report).expect("report serializes");
                    v["type"] = json!("report");
                    v["index"] = json!(index);
                    v["hidden"] = json!(h.to_string());
                    v["correct"] = json!(correct);
                    println!("{v}");
                }
            }
            Err(e) => return usage_error(&format!("strategy failed on `{h}`: {e}")),
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_table(cfg: &Config, n: usize, samples: usize, seed: u64, pretty: bool) -> ExitCode {
    if n == 0 || n > cfg.max_n {
        return usage_error(&format!("n must be in 1..={}", cfg.max_n));
    }
    let header = json!({
        "type": "config", "command": "table", "n": n, "samples": samples, "seed": seed,
        "config": cfg.json(),
    });
    if pretty {
        println!("# {header}");
        println!(
            "{:<28} {:>6} {:>9} {:>9}  {:<16} {:>4}  bound",
            "strategy", "extra", "measured", "declared", "level", "ok"
        );
    } else {
        println!("{header}");
    }
    let mut all_ok = true;
    for info in STRATEGIES {
        let min_len = usize::from(!info.supports_empty);
        let inputs: Vec<Sequence> = if n <= 10 {
            all_binary_up_to(min_len, n)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let len = rng.gen_range(min_len..=n);
                    Sequence::from_bits(
                        &(0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>(),
                    )
                })
                .collect()
        };
        let mut max_queries = 0usize;
        let mut declared_max = 0usize;
        let mut ok = true;
        for h in &inputs {
            match run_strategy_with(info.id, h, n, cfg.query_cap) {
                Ok(report) => {
                    max_queries = max_queries.max(report.queries_used);
                    declared_max = declared_max.max(report.declared_bound);
                    let correct = recovery_correct(info, &report, h, n).unwrap_or(false);
                    ok &= report.bound_ok && correct;
                }
                Err(e) => {
                    eprintln!("error: {} on `{h}`: {e}", info.id);
                    ok = false;
                }
            }
        }
        all_ok &= ok;
        if pretty {
            println!(
                "{:<28} {:>6} {:>9} {:>9}  {:<16} {:>4}  {}",
                info.id,
                info.extra_chars,
                max_queries,
                declared_max,
                format!("{:?}", info.level),
                if ok { "yes" } else { "NO" },
                info.bound
            );
        } else {
            let row = json!({
                "type": "row",
                "strategy": info.id,
                "extra_chars": info.extra_chars,
                "level": info.level,
                "bound": info.bound,
                "declared_bound": declared_max,
                "measured_max_queries": max_queries,
                "inputs": inputs.len(),
                "ok": ok,
            });
            println!("{row}");
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn emit(report: &VerificationReport, pretty: bool) {
    if pretty {
        println!(
            "{:<32} {:<52} {}",
            report.claim_id,
            report.bound,
            if report.result { "pass" } else { "FAIL" }
        );
        if let Some(cx) = &report.counterexample {
            println!("    counterexample: {cx}");
        }
    } else {
        println!(
            "{}",
            serde_json::to_string(report).expect("report serializes")
        );
    }
}

fn suite_witness(cfg: &Config) -> Vec<VerificationReport> {
    let max_len = cfg.brute_query_len.unwrap_or(14);
    let s: Sequence = "010110".parse().unwrap();
    let s2: Sequence = "011010".parse().unwrap();
    let found = lab::brute_distinguish(
        &s,
        &s2,
        DistanceKind::Dtw { p: 1 },
        max_len,
        &[Symbol::Zero, Symbol::One],
    )
    .expect("binary queries");
    vec![VerificationReport {
        claim_id: "dtw.witness.agreement".into(),
        params: json!({ "pair": [s.to_string(), s2.to_string()], "max_query_len": max_len }),
        bound: format!("agree on all binary queries up to length {max_len}"),
        result: found.is_none(),
        counterexample: found.map(|q| q.to_string()),
    }]
}

fn suite_mss(_cfg: &Config) -> Vec<VerificationReport> {
    let mut reports = Vec::new();
    let seqs = all_binary_up_to(1, 6);
    let mut bad = None;
    'outer: for x in &seqs {
        for y in &seqs {
            let via = seqrecover::dtw_via_mss(x, y).unwrap();
            let dp = seqrecover::dtw_distance(x, y, seqrecover::PNorm::Finite(1))
                .unwrap()
                .cost;
            if ExactRational::from_integer(via) != dp {
                bad = Some(format!("x={x} y={y} via={via} dp={dp}"));
                break 'outer;
            }
        }
    }
    reports.push(VerificationReport {
        claim_id: "dtw.mss.equivalence.exhaustive".into(),
        params: json!({ "max_len": 6 }),
        bound: "run-level solver equals grid DP on all pairs".into(),
        result: bad.is_none(),
        counterexample: bad,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = None;
    for _ in 0..10_000 {
        let xl = rng.gen_range(1..=12);
        let yl = rng.gen_range(1..=12);
        let x = Sequence::from_bits(&(0..xl).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>());
        let y = Sequence::from_bits(&(0..yl).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>());
        let via = seqrecover::dtw_via_mss(&x, &y).unwrap();
        let dp = seqrecover::dtw_distance(&x, &y, seqrecover::PNorm::Finite(1))
            .unwrap()
            .cost;
        if ExactRational::from_integer(via) != dp {
            bad = Some(format!("x={x} y={y} via={via} dp={dp}"));
            break;
        }
    }
    reports.push(VerificationReport {
        claim_id: "dtw.mss.equivalence.random".into(),
        params: json!({ "pairs": 10_000, "max_len": 12, "seed": 2024 }),
        bound: "run-level solver equals grid DP on random pairs".into(),
        result: bad.is_none(),
        counterexample: bad,
    });
    reports
}

fn suite_runs_window(cfg: &Config) -> Vec<VerificationReport> {
    let max_len = cfg.brute_query_len.unwrap_or(12);
    let mut reports = Vec::new();
    for c in [1usize, 2] {
        let ok = lab::verify_runs_window(c, max_len).expect("pair construction");
        reports.push(VerificationReport {
            claim_id: format!("dtw.lowerbound.window.c{c}"),
            params: json!({ "c": c, "max_query_len": max_len }),
            bound: format!(
                "distinguishing queries have {} to {} runs",
                2 * c,
                2 * c + 6
            ),
            result: ok,
            counterexample: None,
        });
        let (s, s2) = lab::lowerbound_pair(c, usize::MAX).unwrap();
        let q = lab::window_witness_query(c);
        let d1 = lab::oracle_distance(DistanceKind::Dtw { p: 1 }, &s, &q).unwrap();
        let d2 = lab::oracle_distance(DistanceKind::Dtw { p: 1 }, &s2, &q).unwrap();
        let ok = d1 == ExactRational::from_integer(1) && d2 == ExactRational::from_integer(2);
        reports.push(VerificationReport {
            claim_id: format!("dtw.lowerbound.witnessquery.c{c}"),
            params: json!({ "c": c, "query": q.to_string() }),
            bound: "canonical query separates the pair at distances 1 and 2".into(),
            result: ok,
            counterexample: (!ok).then(|| format!("d1={d1} d2={d2}")),
        });
    }
    reports
}

fn suite_equiv_partition(cfg: &Config) -> Vec<VerificationReport> {
    let n = 5;
    let max_len = cfg.brute_query_len.unwrap_or(2 * n + 4);
    let brute = lab::class_partition(n, DistanceKind::Dtw { p: 1 }, max_len);
    let plan = dtw::equivalence_partition(n);
    let ok = brute == plan;
    vec![VerificationReport {
        claim_id: "dtw.equivalence.partition".into(),
        params: json!({ "n": n, "max_query_len": max_len }),
        bound: "2n-query signature partition equals the all-query partition".into(),
        result: ok,
        counterexample: (!ok).then(|| {
            format!(
                "signature classes: {}, brute classes: {}",
                plan.len(),
                brute.len()
            )
        }),
    }]
}

fn suite_frechet_classes(cfg: &Config) -> Vec<VerificationReport> {
    let mut reports = Vec::new();
    for n in [4usize, 5, 6] {
        let max_len = cfg.brute_query_len.unwrap_or(2 * n + 2);
        let partition = lab::class_partition(n, DistanceKind::Frechet, max_len);
        let mut ok = partition.len() == 2 * n;
        if ok {
            for class in &partition {
                let rep = frechet::class_of(&class[0]).unwrap();
                ok &= class.iter().all(|m| frechet::class_of(m).unwrap() == rep);
            }
        }
        reports.push(VerificationReport {
            claim_id: format!("frechet.classes.n{n}"),
            params: json!({ "n": n, "max_query_len": max_len }),
            bound: "exactly 2n brute-force classes, grouped by condensed expression".into(),
            result: ok,
            counterexample: (!ok).then(|| format!("{} classes", partition.len())),
        });
    }
    reports
}

fn suite_lipschitz(_cfg: &Config) -> Vec<VerificationReport> {
    // squared form of the embedding bound:
    // ||phi(s)-phi(s')||_2^2 <= m * d(s,s')^2
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 8;
    let wildcard = edit::wildcard_plan(n).queries;
    let frechet_plan = frechet::plan(n);
    let mut bad = None;
    for _ in 0..300 {
        let mut draw = |min_len: usize| {
            let len = rng.gen_range(min_len..=n);
            Sequence::from_bits(&(0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<_>>())
        };
        for (kind, plan, min_len) in [
            (DistanceKind::Edit, &wildcard, 0usize),
            (DistanceKind::Frechet, &frechet_plan, 1usize),
        ] {
            let s = draw(min_len);
            let s2 = draw(min_len.max(1));
            let phi1 = lab::embed(&s, kind, plan).unwrap();
            let phi2 = lab::embed(&s2, kind, plan).unwrap();
            let dist = lab::oracle_distance(kind, &s, &s2).unwrap();
            let sq_norm: ExactRational = phi1
                .iter()
                .zip(&phi2)
                .map(|(a, b)| {
                    let d = a - b;
                    &d * &d
                })
                .fold(ExactRational::zero(), |acc, v| &acc + &v);
            let bound = &ExactRational::from_integer(plan.len() as u64) * &(&dist * &dist);
            if sq_norm > bound {
                bad = Some(format!("kind={kind:?} s={s} s'={s2}"));
            }
        }
    }
    vec![VerificationReport {
        claim_id: "embedding.lipschitz".into(),
        params: json!({ "n": n, "trials": 300 }),
        bound: "||phi(s)-phi(s')||_2 <= sqrt(m) * d(s, s') for metric oracles".into(),
        result: bad.is_none(),
        counterexample: bad,
    }]
}

type SuiteFn = fn(&Config) -> Vec<VerificationReport>;

fn cmd_verify(cfg: &Config, suite: &str, pretty: bool) -> ExitCode {
    let suites: Vec<(&str, SuiteFn)> = vec![
        ("witness", suite_witness),
        ("mss", suite_mss),
        ("runs-window", suite_runs_window),
        ("equiv-partition", suite_equiv_partition),
        ("frechet-classes", suite_frechet_classes),
        ("lipschitz", suite_lipschitz),
    ];
    let selected: Vec<_> = if suite == "all" {
        suites
    } else {
        let found: Vec<_> = suites.into_iter().filter(|(id, _)| *id == suite).collect();
        if found.is_empty() {
            return usage_error(&format!(
                "unknown suite `{suite}`; known: witness, mss, runs-window, equiv-partition, frechet-classes, lipschitz, all"
            ));
        }
        found
    };
    let header = json!({
        "type": "config", "command": "verify", "suite": suite, "config": cfg.json(),
    });
    if pretty {
        println!("# {header}");
    } else {
        println!("{header}");
    }
    let mut all_ok = true;
    for (_, run) in selected {
        for report in run(cfg) {
            all_ok &= report.result;
            emit(&report, pretty);
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
