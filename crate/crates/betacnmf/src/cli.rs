//! Command-line front end: `gen`, `fit`, `bench`, and `stats`.
//!
//! Exit codes: 0 ok, 1 usage, 2 I/O, 3 parse/consistency, 4 numerical
//! failure. Flag values override config-file values; anything not given
//! falls back to the desk-scale defaults. `BETACNMF_SEED` supplies the
//! master seed when neither a flag nor the config file does.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use betacnmf_core::rng::Rng;
use betacnmf_core::stats::welch_t_test;
use betacnmf_core::{Beta, Method};

use crate::bench::{
    self, ensemble_stats, relative_runtime, run_ensemble, run_single, welch_per_iteration,
    ExperimentConfig,
};
use crate::config::{
    apply_file, parse_beta_list, parse_config_file, parse_method_list, seed_from_env, AppError,
    BenchConfig, Result,
};
use crate::io;

#[derive(Parser, Debug)]
#[command(name = "betacnmf", version, about = "Convolutional NMF under the beta-divergence: fitting and convergence benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirroring the config-file keys; set ones override the file.
#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// Flat `key = value` config file (a previous run's manifest works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated beta values, e.g. `0,1,2`
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated method tags
    #[arg(long)]
    methods: Option<String>,
    /// Number of visible variables K
    #[arg(long = "K")]
    k: Option<usize>,
    /// Factorization rank I
    #[arg(long = "I")]
    rank: Option<usize>,
    /// Number of time samples N
    #[arg(long = "N")]
    n: Option<usize>,
    /// Number of lags M
    #[arg(long = "M")]
    lags: Option<usize>,
    /// Iteration budget per fit
    #[arg(long)]
    iters: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_matrices: Option<usize>,
    #[arg(long)]
    n_inits: Option<usize>,
    /// Numerical clamp floor
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic V matrices with their ground-truth factors
    Gen {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one V matrix with one method and write the learned factors
    Fit {
        /// Input V matrix in NMAT v1 format
        #[arg(long)]
        v: PathBuf,
        /// Method tag
        #[arg(long)]
        method: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the ensemble benchmark and write trace/stats/welch CSVs
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the ensemble runs
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Measure run times (forces serial execution) and write the
        /// relative-runtime table
        #[arg(long)]
        timing: bool,
    },
    /// Welch's t-test between two trace files at one iteration
    Stats {
        /// First trace CSV
        #[arg(long)]
        a: PathBuf,
        /// Second trace CSV
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        iteration: u32,
        /// Restrict the first file to one method tag
        #[arg(long)]
        method_a: Option<String>,
        /// Restrict the second file to one method tag
        #[arg(long)]
        method_b: Option<String>,
    },
}

/// Parse argv and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("betacnmf: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { cfg, out } => cmd_gen(&resolve_config(&cfg)?, &out),
        Command::Fit {
            v,
            method,
            cfg,
            out,
        } => cmd_fit(&resolve_config(&cfg)?, &v, &method, &out),
        Command::Bench {
            cfg,
            out,
            jobs,
            timing,
        } => cmd_bench(&resolve_config(&cfg)?, &out, jobs, timing),
        Command::Stats {
            a,
            b,
            iteration,
            method_a,
            method_b,
        } => cmd_stats(&a, &b, iteration, method_a.as_deref(), method_b.as_deref()),
    }
}

/// defaults <- BETACNMF_SEED <- config file <- flags
fn resolve_config(args: &ConfigArgs) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    if let Some(seed) = seed_from_env()? {
        cfg.master_seed = seed;
    }
    if let Some(path) = &args.config {
        apply_file(&mut cfg, &parse_config_file(path)?)?;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.rank {
        cfg.rank = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.lags {
        cfg.lags = v;
    }
    if let Some(v) = &args.beta {
        cfg.betas = parse_beta_list(v)?;
    }
    if let Some(v) = &args.methods {
        cfg.methods = parse_method_list(v)?;
    }
    if let Some(v) = args.iters {
        cfg.max_iters = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.n_matrices {
        cfg.n_matrices = v;
    }
    if let Some(v) = args.n_inits {
        cfg.n_inits = v;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(cfg: &BenchConfig, out_dir: &Path, extra: &str) -> Result<()> {
    let path = out_dir.join("manifest");
    let mut text = cfg.to_manifest();
    if !extra.is_empty() {
        text.push_str(extra);
    }
    std::fs::write(&path, text).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

pub fn cmd_gen(cfg: &BenchConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Io(format!("{}: {e}", out_dir.display())))?;
    let experiment = ExperimentConfig::from_bench(cfg, cfg.betas[0]);
    let mut seed_notes = String::from("# data streams: derive(master_seed, \"data\", index)\n");
    for index in 0..cfg.n_matrices {
        let (v, w, h) = bench::gen_v(&experiment, index);
        io::write_nmat(&out_dir.join(format!("V_{index:03}.nmat")), &v)?;
        io::write_dictionary(&out_dir.join(format!("W_{index:03}.dict")), &w)?;
        io::write_nmat(&out_dir.join(format!("H_{index:03}.nmat")), &h)?;
        seed_notes.push_str(&format!("# V_{index:03}: data stream index {index}\n"));
    }
    write_manifest(cfg, out_dir, &seed_notes)?;
    println!("wrote {} matrices to {}", cfg.n_matrices, out_dir.display());
    Ok(())
}

pub fn cmd_fit(cfg: &BenchConfig, v_path: &Path, method: &str, out_dir: &Path) -> Result<()> {
    let method: Method = method
        .parse()
        .map_err(|e: betacnmf_core::baselines::UnknownMethod| AppError::Usage(e.to_string()))?;
    let beta = cfg.betas[0];
    let v = io::read_nmat(v_path)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Io(format!("{}: {e}", out_dir.display())))?;

    let mut rng = Rng::derive(cfg.master_seed, "init", 0);
    let init = betacnmf_core::cnmf::random_init(v.rows(), cfg.rank, v.cols(), cfg.lags, &mut rng);
    let trace = run_single(&v, init.clone(), method, beta, cfg.eps, cfg.max_iters, 0);
    if let Some(t) = trace.failed_at {
        return Err(AppError::Numerical(format!(
            "loss became non-finite at iteration {t}"
        )));
    }

    // replay to recover the final factors (run_single only keeps the trace)
    let mut state = betacnmf_core::cnmf::FactorizationState::new(
        init.0,
        init.1,
        Beta::new(beta),
        cfg.eps,
    )
    .map_err(|e| AppError::Parse(e.to_string()))?;
    for _ in 0..cfg.max_iters {
        betacnmf_core::baselines::step(method, &mut state, &v)
            .map_err(|e| AppError::Numerical(e.to_string()))?;
    }

    io::write_dictionary(&out_dir.join("W.dict"), &state.w)?;
    io::write_nmat(&out_dir.join("H.nmat"), &state.h)?;
    std::fs::write(out_dir.join("trace.csv"), io::trace_csv(std::slice::from_ref(&trace)))
        .map_err(|e| AppError::Io(e.to_string()))?;
    write_manifest(cfg, out_dir, "")?;
    println!(
        "method={} beta={} final_loss={} iterations={}",
        method,
        beta,
        trace.final_loss().unwrap_or(f64::NAN),
        trace.records.len() - 1
    );
    Ok(())
}

pub fn cmd_bench(cfg: &BenchConfig, out_dir: &Path, jobs: usize, timing: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Io(format!("{}: {e}", out_dir.display())))?;
    write_manifest(cfg, out_dir, "")?;
    // timing runs are serial to avoid contention skew
    let jobs = if timing { 1 } else { jobs };
    let mut runtime_rows = Vec::new();
    for &beta in &cfg.betas {
        let experiment = ExperimentConfig::from_bench(cfg, beta);
        let traces = run_ensemble(&experiment, jobs);
        let label = io::beta_label(beta);

        let path = out_dir.join(format!("trace_beta{label}.csv"));
        std::fs::write(&path, io::trace_csv(&traces))
            .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;

        for &method in &cfg.methods {
            let method_traces: Vec<_> = traces
                .iter()
                .filter(|t| t.method == method)
                .cloned()
                .collect();
            let rows = ensemble_stats(&method_traces);
            let path = out_dir.join(format!("stats_beta{label}_{method}.csv"));
            std::fs::write(&path, io::stats_csv(&rows))
                .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        }

        if cfg.methods.contains(&Method::Proposed) && cfg.methods.len() > 1 {
            let mut rows = Vec::new();
            for &other in cfg.methods.iter().filter(|&&m| m != Method::Proposed) {
                rows.extend(welch_per_iteration(
                    &traces,
                    Method::Proposed,
                    other,
                    cfg.max_iters,
                ));
            }
            let path = out_dir.join(format!("welch_beta{label}.csv"));
            std::fs::write(&path, io::welch_csv(&rows))
                .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        }

        if timing {
            runtime_rows.extend(relative_runtime(&traces));
        }
        let failures = traces.iter().filter(|t| t.failed_at.is_some()).count();
        println!(
            "beta={beta}: {} runs x {} methods done ({failures} numerical failures)",
            ExperimentConfig::from_bench(cfg, beta).total_runs(),
            cfg.methods.len()
        );
    }
    if timing {
        let path = out_dir.join("runtime.csv");
        std::fs::write(&path, io::runtime_csv(&runtime_rows))
            .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn cmd_stats(
    trace_a: &Path,
    trace_b: &Path,
    iteration: u32,
    method_a: Option<&str>,
    method_b: Option<&str>,
) -> Result<()> {
    let filter = |tag: Option<&str>| -> Result<Option<Method>> {
        tag.map(|t| {
            t.parse::<Method>()
                .map_err(|e| AppError::Usage(e.to_string()))
        })
        .transpose()
    };
    let ma = filter(method_a)?;
    let mb = filter(method_b)?;
    let collect = |path: &Path, mfilter: Option<Method>| -> Result<Vec<f64>> {
        let losses: Vec<f64> = io::read_trace_losses(path)?
            .into_iter()
            .filter(|&(_, m, it, _)| it == iteration && mfilter.map_or(true, |f| f == m))
            .map(|(_, _, _, loss)| loss)
            .collect();
        if losses.len() < 2 {
            return Err(AppError::Parse(format!(
                "{}: fewer than 2 losses at iteration {iteration}",
                path.display()
            )));
        }
        Ok(losses)
    };
    let a = collect(trace_a, ma)?;
    let b = collect(trace_b, mb)?;
    let r = welch_t_test(&a, &b);
    println!(
        "iteration={} t={} df={} p={}",
        iteration, r.t_statistic, r.degrees_of_freedom, r.p_value
    );
    Ok(())
}
