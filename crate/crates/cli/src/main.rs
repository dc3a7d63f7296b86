//! `msk`: run knapsack submodular-maximization algorithms on instance files,
//! verify bounding-function dominance, reproduce the worst-case instance,
//! and sweep approximation ratios against brute force.
//!
//! Exit codes: 0 ok, 2 input error, 3 invariant violation, 4 construction
//! infeasible. `MSK_THREADS` caps the worker count (default: all cores).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use msk_core::{
    brute_force_opt, build_partition_auto, check_monotone_submodular, gen_adversarial, greedy,
    greedy_lazy, ratio_sweep, value_function, verify_adversarial, verify_dominance,
    AdversarialInstance, AdversarialParams, Algorithm, AlgorithmResult, ElementId, ElementSet,
    Error, Family, GreedyTrace, Instance, SetFunctionOracle, SweepConfig, ValueOracle,
};

#[derive(Parser)]
#[command(name = "msk", version, about = "Monotone submodular maximization under a knapsack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm on an instance file and write the result JSON.
    Run {
        #[arg(long)]
        instance: PathBuf,
        /// greedy, enum0..enum3, or gps
        #[arg(long)]
        alg: String,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the worst-case Greedy+Singleton instance.
    GenAdversarial {
        #[arg(long)]
        epsilon: f64,
        /// Skip the weight inequality that forces X/Y rejection; allows
        /// coarse epsilon for fast order-and-density checks.
        #[arg(long)]
        structure_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run greedy on a generated adversarial instance and check it
    /// against the predicted schedule.
    VerifyAdversarial {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that the greedy value function dominates the bounding function
    /// built from a candidate set (default: the brute-force optimum).
    VerifyBound {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated element ids for the candidate set
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure approximation ratios against brute force over seeded random
    /// instances and write them as CSV.
    Sweep {
        /// coverage or modular
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u32,
        #[arg(long)]
        seed: u64,
        /// Comma-separated algorithm names
        #[arg(long)]
        algs: String,
        #[arg(long)]
        csv: PathBuf,
    },
    /// The three-element instance on which single-seed enumeration is stuck
    /// below 1 - 1/e while pair seeds are exact.
    BadExample {
        #[arg(long = "N")]
        n: u64,
    },
    /// Exhaustively check monotonicity and submodularity of an instance's
    /// oracle (n <= 16).
    CheckOracle {
        #[arg(long)]
        instance: PathBuf,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let code = err
                .downcast_ref::<Error>()
                .map_or(2, exit_code_for);
            ExitCode::from(code)
        }
    }
}

fn init_thread_pool() {
    if let Ok(val) = std::env::var("MSK_THREADS") {
        if let Ok(threads) = val.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ConstructionInfeasible { .. } => 4,
        Error::MalformedInstance(_) | Error::InvalidPartition(_) => 3,
        _ => 2,
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run { instance, alg, out } => cmd_run(&instance, &alg, out.as_deref()),
        Command::GenAdversarial {
            epsilon,
            structure_only,
            out,
        } => cmd_gen_adversarial(epsilon, structure_only, &out),
        Command::VerifyAdversarial { instance, out } => {
            cmd_verify_adversarial(&instance, out.as_deref())
        }
        Command::VerifyBound {
            instance,
            x,
            grid,
            out,
        } => cmd_verify_bound(&instance, x.as_deref(), grid, out.as_deref()),
        Command::Sweep {
            family,
            n,
            trials,
            seed,
            algs,
            csv,
        } => cmd_sweep(&family, n, trials, seed, &algs, &csv),
        Command::BadExample { n } => cmd_bad_example(n),
        Command::CheckOracle { instance } => cmd_check_oracle(&instance),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<(Instance, Option<serde_json::Value>)> {
    let loaded = Instance::read_file(path)?;
    Ok(loaded)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceOut<'a> {
    considered: &'a [msk_core::ConsideredEntry],
    selected: &'a [msk_core::SelectionEntry],
    breakpoints: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct RunOut<'a> {
    algorithm: String,
    n: usize,
    #[serde(flatten)]
    result: &'a AlgorithmResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceOut<'a>>,
}

fn cmd_run(path: &Path, alg: &str, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let (inst, _) = load_instance(path)?;
    let algorithm: Algorithm = alg.parse()?;
    let p = inst.problem();
    let trace_store: GreedyTrace;
    let (result, trace) = if algorithm == Algorithm::Greedy {
        let calls_before = p.oracle.calls();
        trace_store = if inst.n() >= Algorithm::LAZY_THRESHOLD {
            greedy_lazy(&p)?
        } else {
            greedy(&p)?
        };
        let value = p.oracle.evaluate(&trace_store.final_set)?;
        let result = AlgorithmResult {
            solution: trace_store.final_set.clone(),
            value,
            oracle_calls: p.oracle.calls() - calls_before,
            best_seed: msk_core::BestSeed::Greedy,
        };
        let trace = TraceOut {
            considered: &trace_store.considered,
            selected: &trace_store.selected,
            breakpoints: value_function(&trace_store, trace_store.empty_value)
                .breakpoints()
                .to_vec(),
        };
        (result, Some(trace))
    } else {
        (algorithm.run(&p)?, None)
    };
    emit(
        &RunOut {
            algorithm: algorithm.to_string(),
            n: inst.n(),
            result: &result,
            trace,
        },
        out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_adversarial(
    epsilon: f64,
    structure_only: bool,
    out: &Path,
) -> anyhow::Result<ExitCode> {
    let adv = gen_adversarial(epsilon, structure_only)?;
    adv.instance.write_file(out, Some(adv.meta_json()))?;
    eprintln!(
        "wrote {} (n = {}, k1 = {}, k2 = {}, epsilon = {:e}, structure_only = {})",
        out.display(),
        adv.instance.n(),
        adv.params.k1,
        adv.params.k2,
        adv.params.epsilon,
        structure_only
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_adversarial(path: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let (inst, meta) = load_instance(path)?;
    let meta = meta.ok_or_else(|| {
        Error::MalformedInstance("file carries no adversarial metadata".into())
    })?;
    let params: AdversarialParams = serde_json::from_value(meta)?;
    let adv = AdversarialInstance::from_parts(inst, params)?;
    let report = verify_adversarial(&adv)?;
    emit(&report, out)?;
    if report.trace_match {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "trace mismatch: {}",
            report.first_divergence.as_deref().unwrap_or("unknown")
        );
        Ok(ExitCode::from(3))
    }
}

fn parse_id_list(list: &str) -> anyhow::Result<ElementSet> {
    let mut ids = Vec::new();
    for part in list.split(',').filter(|s| !s.is_empty()) {
        let id: u32 = part
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad element id {part:?}")))?;
        ids.push(ElementId(id));
    }
    if ids.is_empty() {
        return Err(Error::InvalidArgument("empty candidate set".into()).into());
    }
    Ok(ElementSet::from_ids(ids))
}

fn cmd_verify_bound(
    path: &Path,
    x: Option<&str>,
    grid: usize,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let (inst, _) = load_instance(path)?;
    let p = inst.problem();
    let candidate = match x {
        Some(list) => parse_id_list(list)?,
        None => brute_force_opt(&p)?.1,
    };
    if candidate.is_empty() {
        return Err(Error::InvalidArgument(
            "candidate set is empty (nothing fits the capacity); pass --x".into(),
        )
        .into());
    }
    let trace = if inst.n() >= Algorithm::LAZY_THRESHOLD {
        greedy_lazy(&p)?
    } else {
        greedy(&p)?
    };
    let partition = build_partition_auto(&p, &candidate)?;
    let report = verify_dominance(&p, &trace, &partition, grid)?;
    emit(&report, out)?;
    if report.ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "dominance violated: min slack {} at u = {}",
            report.min_slack, report.argmin_u
        );
        Ok(ExitCode::from(3))
    }
}

fn cmd_sweep(
    family: &str,
    n: usize,
    trials: u32,
    seed: u64,
    algs: &str,
    csv_path: &Path,
) -> anyhow::Result<ExitCode> {
    let family = match family {
        "coverage" => Family::Coverage { n },
        "modular" => Family::Modular { n },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown family {other:?} (expected coverage or modular)"
            ))
            .into())
        }
    };
    let mut algorithms = Vec::new();
    for name in algs.split(',').filter(|s| !s.is_empty()) {
        algorithms.push(name.trim().parse::<Algorithm>()?);
    }
    if algorithms.is_empty() {
        return Err(Error::InvalidArgument("no algorithms given".into()).into());
    }
    let records = ratio_sweep(&SweepConfig {
        family,
        algorithms,
        trials,
        seed,
    })?;
    let mut writer = csv::Writer::from_path(csv_path)?;
    for record in &records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    let min_ratio = records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    eprintln!(
        "wrote {} records to {} (min ratio {min_ratio:.6})",
        records.len(),
        csv_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bad_example(n: u64) -> anyhow::Result<ExitCode> {
    if n < 2 {
        return Err(Error::InvalidArgument("N must be at least 2".into()).into());
    }
    let nf = n as f64;
    let inst = Instance::new(
        vec![nf, nf, 1.0],
        2.0 * nf,
        SetFunctionOracle::modular(vec![nf, nf, 2.0])?,
    )?;
    let p = inst.problem();
    let (opt, opt_set) = brute_force_opt(&p)?;
    println!(
        "instance: values ({n}, {n}, 2), weights ({n}, {n}, 1), capacity {}",
        2 * n
    );
    let ids: Vec<u32> = opt_set.iter().map(|e| e.0).collect();
    println!("optimum: value {opt} set {ids:?}");
    let threshold = 1.0 - (-1.0f64).exp();
    for kappa in [1usize, 2] {
        let result = msk_core::enum_greedy(&p, kappa)?;
        let ratio = result.value / opt;
        println!(
            "enum{kappa}: value {} ratio {ratio} ({} 1 - 1/e = {threshold:.6})",
            result.value,
            if ratio < threshold { "<" } else { ">=" }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_oracle(path: &Path) -> anyhow::Result<ExitCode> {
    let (inst, _) = load_instance(path)?;
    let report = check_monotone_submodular(inst.oracle(), inst.n())?;
    #[derive(Serialize)]
    struct CheckOut {
        monotone: bool,
        submodular: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        monotone_witness: Option<(ElementSet, ElementSet)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        submodular_witness: Option<(ElementSet, ElementSet, ElementId)>,
    }
    let ok = report.monotone && report.submodular;
    emit(
        &CheckOut {
            monotone: report.monotone,
            submodular: report.submodular,
            monotone_witness: report.monotone_witness,
            submodular_witness: report.submodular_witness,
        },
        None,
    )?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
