//! Single runs and sweeps.

use std::time::Duration;

use nalgebra::DVector;
use quanco::biogas::{generate_problem, initial_point, normalized_cost, true_minimum, BiomassProblem, Variant};
use quanco::{
    quanco_minimize, trn_minimize, BoundSpec, IterationRecord, OptimizationTrace, QuancoConfig, SolverSpec,
    TransformedCost, TrnConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::spec::{AlgoSpec, Algorithm, ExperimentSpec, RadiusRule};

/// One trace row; times in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub rho: f64,
    pub accepted: bool,
    pub r_norm: f64,
    pub t_deriv_us: u64,
    pub t_build_us: u64,
    pub t_solve_us: u64,
    #[serde(skip)]
    pub t_total_us: u64,
}

fn micros(d: Duration) -> u64 {
    d.as_micros() as u64
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iter: r.iter,
            f: r.f,
            rho: r.rho,
            accepted: r.accepted,
            r_norm: r.radius_norm,
            t_deriv_us: micros(r.time_derivatives),
            t_build_us: micros(r.time_qubo_build),
            t_solve_us: micros(r.time_solver),
            t_total_us: micros(r.time_total),
        }
    }
}

/// Summed wall-clock split of a run, in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TimingSplit {
    pub derivatives: u64,
    pub qubo_build: u64,
    pub solve: u64,
    pub other: u64,
    pub total: u64,
}

impl TimingSplit {
    pub fn from_rows(rows: &[TraceRow]) -> Self {
        let mut t = Self::default();
        for r in rows {
            t.derivatives += r.t_deriv_us;
            t.qubo_build += r.t_build_us;
            t.solve += r.t_solve_us;
            t.total += r.t_total_us;
        }
        t.other = t.total.saturating_sub(t.derivatives + t.qubo_build + t.solve);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub variant: Variant,
    pub k: usize,
    pub algo: String,
    pub solver: String,
    pub bits: usize,
    pub seed: u64,
    pub iterations: usize,
    pub f_min: f64,
    pub f_initial: f64,
    pub f_final: f64,
    pub normalized_cost: f64,
    pub suboptimality: f64,
    pub converged: bool,
    pub reason: String,
    /// True when no accepted step raised the cost.
    pub monotone: bool,
    pub timing: TimingSplit,
    /// `ok`, or `failed: <message>`.
    pub status: String,
    #[serde(skip)]
    pub rows: Vec<TraceRow>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Normalised cost after `iter + 1` iterations, held after termination.
    pub fn normcost_after(&self, iter: usize) -> f64 {
        let f = if self.rows.is_empty() { self.f_initial } else { self.rows[iter.min(self.rows.len() - 1)].f };
        normalized_cost(self.f_initial, f, self.f_min).normalized_cost
    }
}

/// Box half-widths `factor * |y0|` and caps `growth` times larger.
pub fn initial_radii(y0: &DVector<f64>, rule: &RadiusRule) -> (DVector<f64>, DVector<f64>) {
    let r0 = y0.map(|v| rule.factor * v.abs());
    let r_max = &r0 * rule.growth;
    (r0, r_max)
}

/// Runs `algo` on `problem` from the standard starting point, in log-feed
/// coordinates so feed rates stay positive.
pub fn run_on_problem(
    problem: &BiomassProblem,
    variant: Variant,
    algo: &AlgoSpec,
    iterations: usize,
    seed: u64,
    rule: &RadiusRule,
) -> Result<RunRecord> {
    let k = problem.len();
    let f_min = true_minimum(problem)?.f_min;
    let cost = TransformedCost::new(problem, BoundSpec::lower_only(k, 0.0))?;
    let y0 = cost.to_transformed(&initial_point(k)?)?;
    let (r0, r_max) = initial_radii(&y0, rule);
    let trace = match algo.algo {
        Algorithm::Trn => {
            let cfg = TrnConfig { r0: r0.norm(), r_max: r_max.norm(), max_iter: iterations, ..Default::default() };
            trn_minimize(&cost, &y0, &cfg)?
        }
        Algorithm::Quanco => {
            let cfg = QuancoConfig {
                bits_per_dim: algo.bits,
                max_iter: iterations,
                solver: SolverSpec { name: algo.solver.clone(), params: algo.params.clone() },
                seed,
                r_max,
                ..QuancoConfig::new(r0)
            };
            quanco_minimize(&cost, &y0, &cfg)?
        }
    };
    Ok(record_from_trace(&trace, variant, k, algo, seed, iterations, f_min))
}

fn record_from_trace(
    trace: &OptimizationTrace,
    variant: Variant,
    k: usize,
    algo: &AlgoSpec,
    seed: u64,
    iterations: usize,
    f_min: f64,
) -> RunRecord {
    let rows: Vec<TraceRow> = trace.records.iter().map(TraceRow::from).collect();
    let metrics = normalized_cost(trace.f_initial, trace.final_value(), f_min);
    RunRecord {
        variant,
        k,
        algo: algo.label(),
        solver: algo.solver_name().into(),
        bits: algo.bits_column(),
        seed,
        iterations,
        f_min,
        f_initial: trace.f_initial,
        f_final: trace.final_value(),
        normalized_cost: metrics.normalized_cost,
        suboptimality: metrics.suboptimality,
        converged: trace.converged,
        reason: trace.reason.as_str().into(),
        monotone: trace.is_monotone(),
        timing: TimingSplit::from_rows(&rows),
        status: "ok".into(),
        rows,
    }
}

fn failed_record(variant: Variant, k: usize, algo: &AlgoSpec, seed: u64, iterations: usize, err: &BenchError) -> RunRecord {
    RunRecord {
        variant,
        k,
        algo: algo.label(),
        solver: algo.solver_name().into(),
        bits: algo.bits_column(),
        seed,
        iterations,
        f_min: f64::NAN,
        f_initial: f64::NAN,
        f_final: f64::NAN,
        normalized_cost: f64::NAN,
        suboptimality: f64::NAN,
        converged: false,
        reason: String::new(),
        monotone: false,
        timing: TimingSplit::default(),
        status: format!("failed: {err}"),
        rows: Vec::new(),
    }
}

#[derive(Debug, Clone)]
struct Job<'a> {
    variant: Variant,
    k: usize,
    seed: u64,
    algo: &'a AlgoSpec,
}

fn run_job(spec: &ExperimentSpec, job: &Job<'_>) -> RunRecord {
    let attempt = || -> Result<RunRecord> {
        let problem = generate_problem(&spec.generator(job.variant, job.seed), job.k)?;
        run_on_problem(&problem, job.variant, job.algo, spec.iterations, job.seed, &spec.radius)
    };
    attempt().unwrap_or_else(|e| {
        log::warn!("{} K={} seed={} failed: {e}", job.algo, job.k, job.seed);
        failed_record(job.variant, job.k, job.algo, job.seed, spec.iterations, &e)
    })
}

/// Runs every (variant, K, algorithm, seed) combination. Failed runs are
/// kept with a `failed` status. Output order follows the spec's lists and
/// does not depend on `parallel`.
pub fn run_sweep(spec: &ExperimentSpec, parallel: bool) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &variant in &spec.variants {
        for &k in &spec.ks {
            for algo in &spec.algorithms {
                for &seed in &spec.seeds {
                    jobs.push(Job { variant, k, seed, algo });
                }
            }
        }
    }
    if !parallel {
        return Ok(jobs.iter().map(|j| run_job(spec, j)).collect());
    }
    let go = || jobs.par_iter().map(|j| run_job(spec, j)).collect::<Vec<_>>();
    match spec.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| BenchError::Usage(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(go))
        }
        None => Ok(go()),
    }
}
