//! Runs every (row, scheme, seed) cell of an experiment and writes one trace
//! CSV per cell.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use svilab_core::extragradient::run_extragradient;
use svilab_core::ppawss::run_ppawss;
use svilab_core::problems::{make_affine_strongly_monotone, make_bimatrix};
use svilab_core::vs_ave::run_vs_ave;
use svilab_core::{BimatrixSpec, BudgetCounter, ProblemInstance, RunTrace, TraceOptions};

use crate::config::{ExperimentConfig, ProblemKind, RowSettings, Scheme};
use crate::error::CliError;
use crate::summary::{summarize, write_summary, Summary, HEADER};

/// Environment variable capping the number of cells run in parallel.
pub const THREADS_ENV: &str = "SVILAB_THREADS";

fn build_problem(config: &ExperimentConfig, lipschitz: f64) -> Result<ProblemInstance, CliError> {
    let p = &config.problem;
    let built = match p.kind {
        ProblemKind::Bimatrix => make_bimatrix(&BimatrixSpec {
            n: p.n,
            m: p.m,
            target_lipschitz: lipschitz,
            noise_scale: p.noise_scale,
            seed: p.instance_seed,
        }),
        ProblemKind::Affine => make_affine_strongly_monotone(p.n, p.mu, lipschitz, p.noise_scale, p.instance_seed),
    };
    built.map_err(|e| CliError::runtime(format!("building problem at L = {lipschitz}: {e}")))
}

fn trace_options(config: &ExperimentConfig) -> TraceOptions {
    TraceOptions {
        every: config.trace_every,
        gap: config.problem.kind == ProblemKind::Affine,
        yosida_lambda: config.yosida_lambda,
        ..TraceOptions::default()
    }
}

/// One run with a fresh budget and the seed's own sampling streams.
pub fn run_cell(
    problem: &ProblemInstance,
    row: &RowSettings,
    scheme: Scheme,
    seed: u64,
    budget: u64,
    options: &TraceOptions,
) -> svilab_core::Result<RunTrace> {
    let problem = problem.with_seed(seed);
    let start = problem.feasible_set.default_point();
    let budget = BudgetCounter::new(budget);
    Ok(match scheme {
        Scheme::Ppawss => run_ppawss(&problem, &start, &row.ppawss, budget, options)?.trace,
        Scheme::Extragradient => run_extragradient(&problem, &start, &row.extragradient, budget, options)?.trace,
        Scheme::VsAve => {
            let cfg = row
                .vs_ave
                .as_ref()
                .ok_or_else(|| svilab_core::Error::invalid("vs_ave needs a strongly monotone problem"))?;
            run_vs_ave(&problem, &start, cfg, budget, options)?.trace
        }
    })
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// The trace as CSV text with the fixed header.
pub fn trace_csv(scheme: Scheme, seed: u64, trace: &RunTrace) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::runtime(format!("csv: {e}"));
    w.write_record(HEADER).map_err(io)?;
    for row in &trace.rows {
        let m = &row.metrics;
        w.write_record([
            scheme.name().to_string(),
            seed.to_string(),
            row.outer_k.to_string(),
            row.inner_k.to_string(),
            row.calls.to_string(),
            format!("{:e}", m.natural_residual),
            field(m.gap),
            field(m.yosida_sq),
            field(m.saddle_gap),
            field(m.dist_to_ref_sq),
            trace.truncated.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::runtime(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::runtime(e.to_string()))
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("{THREADS_ENV} must be a positive integer; got `{v}`"))),
        },
    }
}

/// Runs the full matrix and writes `<out>/<row>/<scheme>-seed<seed>.csv`
/// plus `summary.csv` and `summary.txt`. Returns the summary of exactly the
/// files written by this run.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Summary, CliError> {
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;

    let rows: Vec<RowSettings> = (0..config.rows()).map(|r| config.row_settings(r)).collect();
    let options = trace_options(config);
    pool.install(|| {
        let problems: Vec<ProblemInstance> = rows
            .par_iter()
            .map(|row| build_problem(config, row.lipschitz))
            .collect::<Result<_, _>>()?;

        let mut cells = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for &scheme in &config.schemes {
                for &seed in &config.seeds {
                    cells.push((r, row, scheme, seed));
                }
            }
        }
        let paths: Vec<PathBuf> = cells
            .par_iter()
            .map(|&(r, row, scheme, seed)| {
                let trace = run_cell(&problems[r], row, scheme, seed, config.budget, &options).map_err(|e| {
                    CliError::runtime(format!("{} {scheme} seed {seed}: {e}", row.label))
                })?;
                let dir = out.join(&row.label);
                fs::create_dir_all(&dir)
                    .map_err(|e| CliError::runtime(format!("creating {}: {e}", dir.display())))?;
                let path = dir.join(format!("{scheme}-seed{seed}.csv"));
                fs::write(&path, trace_csv(scheme, seed, &trace)?)
                    .map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))?;
                Ok(path)
            })
            .collect::<Result<_, CliError>>()?;

        let summary = summarize(&paths)?;
        write_summary(out, &summary)?;
        Ok(summary)
    })
}
