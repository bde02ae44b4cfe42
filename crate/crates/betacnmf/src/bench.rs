//! Ensemble benchmark runner: synthetic data, paired runs, loss traces
//! with wall time, ensemble statistics, Welch comparisons, and relative
//! run times.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use betacnmf_core::baselines;
use betacnmf_core::cnmf::{self, ConvDictionary, FactorizationState};
use betacnmf_core::nnmat::NonnegMatrix;
use betacnmf_core::rng::Rng;
use betacnmf_core::stats::{welch_t_test, RunningStats, WelchResult};
use betacnmf_core::synth;
use betacnmf_core::{Beta, Method};

use crate::config::BenchConfig;

/// One ensemble's worth of settings at a single β.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub k: usize,
    pub rank: usize,
    pub n: usize,
    pub lags: usize,
    pub beta: f64,
    pub n_matrices: usize,
    pub n_inits: usize,
    pub max_iters: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub eps: f64,
}

impl ExperimentConfig {
    pub fn from_bench(cfg: &BenchConfig, beta: f64) -> Self {
        ExperimentConfig {
            k: cfg.k,
            rank: cfg.rank,
            n: cfg.n,
            lags: cfg.lags,
            beta,
            n_matrices: cfg.n_matrices,
            n_inits: cfg.n_inits,
            max_iters: cfg.max_iters,
            methods: cfg.methods.clone(),
            master_seed: cfg.master_seed,
            eps: cfg.eps,
        }
    }

    pub fn total_runs(&self) -> usize {
        self.n_matrices * self.n_inits
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: u32,
    pub loss: f64,
    pub elapsed_ns: u64,
}

/// Per-iteration loss/time record for one run of one method. If the loss
/// went non-finite the trace stops at `failed_at` and the run is reported
/// rather than aborting the ensemble.
#[derive(Debug, Clone)]
pub struct LossTrace {
    pub method: Method,
    pub beta: f64,
    pub run_id: usize,
    pub records: Vec<TraceRecord>,
    pub failed_at: Option<usize>,
}

impl LossTrace {
    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.loss)
    }

    pub fn total_elapsed_ns(&self) -> u64 {
        self.records.last().map(|r| r.elapsed_ns).unwrap_or(0)
    }

    pub fn loss_at(&self, iteration: usize) -> Option<f64> {
        self.records
            .get(iteration)
            .filter(|r| r.iteration as usize == iteration)
            .map(|r| r.loss)
    }
}

/// Synthetic V for `matrix_index`: exactly factorizable by construction,
/// from a χ²₂ dictionary and uniform activations drawn from the stream
/// `(master_seed, "data", matrix_index)`.
pub fn gen_v(
    cfg: &ExperimentConfig,
    matrix_index: usize,
) -> (NonnegMatrix, ConvDictionary, NonnegMatrix) {
    let mut rng = Rng::derive(cfg.master_seed, "data", matrix_index as u64);
    let w = synth::gen_dictionary(cfg.k, cfg.rank, cfg.lags, &mut rng);
    let h = synth::gen_activations(cfg.rank, cfg.n, &mut rng);
    let v = cnmf::reconstruct(&w, &h).expect("shapes consistent by construction");
    (v, w, h)
}

/// Strictly positive init for `run_id`, drawn from the stream
/// `(master_seed, "init", run_id)`. The same factors are handed to every
/// method so traces are paired.
pub fn gen_init(cfg: &ExperimentConfig, run_id: usize) -> (ConvDictionary, NonnegMatrix) {
    let mut rng = Rng::derive(cfg.master_seed, "init", run_id as u64);
    cnmf::random_init(cfg.k, cfg.rank, cfg.n, cfg.lags, &mut rng)
}

/// One timed fit. The clock starts after data generation; each record
/// carries the cumulative wall time at that iteration.
pub fn run_single(
    v: &NonnegMatrix,
    init: (ConvDictionary, NonnegMatrix),
    method: Method,
    beta: f64,
    eps: f64,
    max_iters: usize,
    run_id: usize,
) -> LossTrace {
    let start = Instant::now();
    let mut records = Vec::with_capacity(max_iters + 1);
    let mut failed_at = None;
    match FactorizationState::new(init.0, init.1, Beta::new(beta), eps) {
        Ok(mut state) => {
            let loss0 = state.loss(v).unwrap_or(f64::NAN);
            records.push(TraceRecord {
                iteration: 0,
                loss: loss0,
                elapsed_ns: start.elapsed().as_nanos() as u64,
            });
            for t in 1..=max_iters {
                match baselines::step(method, &mut state, v) {
                    Ok(loss) if loss.is_finite() => {
                        records.push(TraceRecord {
                            iteration: t as u32,
                            loss,
                            elapsed_ns: start.elapsed().as_nanos() as u64,
                        });
                    }
                    _ => {
                        failed_at = Some(t);
                        break;
                    }
                }
            }
        }
        Err(_) => failed_at = Some(0),
    }
    LossTrace {
        method,
        beta,
        run_id,
        records,
        failed_at,
    }
}

/// Run the full ensemble: every V-matrix, every init, every method, with
/// each method starting from bit-identical factors per run. Runs are
/// dispatched over `jobs` worker threads; results are keyed by run_id so
/// the output is independent of scheduling.
pub fn run_ensemble(cfg: &ExperimentConfig, jobs: usize) -> Vec<LossTrace> {
    let total = cfg.total_runs();
    let jobs = jobs.max(1).min(total);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Vec<LossTrace>>> = Mutex::new((0..total).map(|_| Vec::new()).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| {
                let mut cached: Option<(usize, NonnegMatrix)> = None;
                loop {
                    let run_id = next.fetch_add(1, Ordering::Relaxed);
                    if run_id >= total {
                        break;
                    }
                    let matrix_index = run_id / cfg.n_inits;
                    let v = match &cached {
                        Some((idx, v)) if *idx == matrix_index => v.clone(),
                        _ => {
                            let (v, _, _) = gen_v(cfg, matrix_index);
                            cached = Some((matrix_index, v.clone()));
                            v
                        }
                    };
                    let init = gen_init(cfg, run_id);
                    let traces: Vec<LossTrace> = cfg
                        .methods
                        .iter()
                        .map(|&method| {
                            run_single(
                                &v,
                                init.clone(),
                                method,
                                cfg.beta,
                                cfg.eps,
                                cfg.max_iters,
                                run_id,
                            )
                        })
                        .collect();
                    results.lock().unwrap()[run_id] = traces;
                }
            });
        }
    });

    let per_run = results.into_inner().unwrap();
    // stable order: by method (config order), then run_id
    let mut out = Vec::with_capacity(total * cfg.methods.len());
    for (mi, _) in cfg.methods.iter().enumerate() {
        for run in &per_run {
            out.push(run[mi].clone());
        }
    }
    out
}

/// Mean/std of the loss per (method, iteration), streaming accumulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub method: Method,
    pub beta: f64,
    pub iteration: u32,
    pub mean_loss: f64,
    pub std_loss: f64,
    pub n: u64,
}

pub fn ensemble_stats(traces: &[LossTrace]) -> Vec<StatsRow> {
    let mut acc: BTreeMap<(&'static str, u32), RunningStats> = BTreeMap::new();
    let mut beta_of: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut method_of: BTreeMap<&'static str, Method> = BTreeMap::new();
    for trace in traces {
        beta_of.insert(trace.method.tag(), trace.beta);
        method_of.insert(trace.method.tag(), trace.method);
        for rec in &trace.records {
            acc.entry((trace.method.tag(), rec.iteration))
                .or_insert_with(RunningStats::new)
                .push(rec.loss);
        }
    }
    acc.into_iter()
        .map(|((tag, iteration), stats)| StatsRow {
            method: method_of[tag],
            beta: beta_of[tag],
            iteration,
            mean_loss: stats.mean(),
            std_loss: stats.std_dev(),
            n: stats.count(),
        })
        .collect()
}

/// Losses of one method across runs at a fixed iteration.
pub fn losses_at(traces: &[LossTrace], method: Method, iteration: usize) -> Vec<f64> {
    traces
        .iter()
        .filter(|t| t.method == method)
        .filter_map(|t| t.loss_at(iteration))
        .collect()
}

#[derive(Debug, Clone)]
pub struct WelchRow {
    pub iteration: u32,
    pub method_a: Method,
    pub method_b: Method,
    pub result: WelchResult,
}

/// Welch's t-test between two methods at every iteration both have at
/// least two surviving runs.
pub fn welch_per_iteration(
    traces: &[LossTrace],
    method_a: Method,
    method_b: Method,
    max_iters: usize,
) -> Vec<WelchRow> {
    let mut rows = Vec::new();
    for iteration in 0..=max_iters {
        let a = losses_at(traces, method_a, iteration);
        let b = losses_at(traces, method_b, iteration);
        if a.len() < 2 || b.len() < 2 {
            continue;
        }
        rows.push(WelchRow {
            iteration: iteration as u32,
            method_a,
            method_b,
            result: welch_t_test(&a, &b),
        });
    }
    rows
}

/// Mean per-run wall time of each method, divided by the mean wall time
/// of the proposed updates.
#[derive(Debug, Clone)]
pub struct RuntimeRow {
    pub method: Method,
    pub beta: f64,
    pub mean_ns: f64,
    pub ratio_to_proposed: f64,
}

pub fn relative_runtime(traces: &[LossTrace]) -> Vec<RuntimeRow> {
    let mut acc: BTreeMap<&'static str, (Method, f64, RunningStats)> = BTreeMap::new();
    for trace in traces {
        acc.entry(trace.method.tag())
            .or_insert_with(|| (trace.method, trace.beta, RunningStats::new()))
            .2
            .push(trace.total_elapsed_ns() as f64);
    }
    let proposed_mean = acc
        .get(Method::Proposed.tag())
        .map(|(_, _, s)| s.mean())
        .unwrap_or(f64::NAN);
    let mut rows: Vec<RuntimeRow> = acc
        .into_values()
        .map(|(method, beta, stats)| RuntimeRow {
            method,
            beta,
            mean_ns: stats.mean(),
            ratio_to_proposed: stats.mean() / proposed_mean,
        })
        .collect();
    rows.sort_by_key(|r| {
        Method::ALL
            .iter()
            .position(|m| *m == r.method)
            .unwrap_or(usize::MAX)
    });
    rows
}
