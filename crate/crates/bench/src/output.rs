//! CSV and JSON artefacts. Every file is written to a temporary sibling and
//! renamed into place.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use quanco::biogas::Variant;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::runner::{RunRecord, TraceRow};
use crate::spec::ExperimentSpec;

pub const LONG_CSV: &str = "long.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const CURVES_CSV: &str = "curves.csv";
pub const TIMING_CSV: &str = "timing.csv";
pub const SPEC_JSON: &str = "spec.json";

/// Iterations averaged for the time-per-iteration figures.
pub const TIMED_ITERATIONS: usize = 10;

pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, |out| {
        let mut w = csv_writer(out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| BenchError::io(path, e))?;
        Ok(())
    })
}

/// Writes a single run's trace; the header is written even for empty traces.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_atomic(path, |out| {
        let mut w = csv_writer(out);
        if rows.is_empty() {
            w.write_record(["iter", "f", "rho", "accepted", "r_norm", "t_deriv_us", "t_build_us", "t_solve_us"])?;
        }
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| BenchError::io(path, e))?;
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n").map_err(|e| BenchError::io(path, e))?;
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: usize,
    pub algo: String,
    pub solver: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub iter: Option<usize>,
    pub f: Option<f64>,
    pub normcost: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: usize,
    pub algo: String,
    pub solver: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub runs: usize,
    pub failed: usize,
    pub mean_normcost: f64,
    pub median_normcost: f64,
    pub min_normcost: f64,
    pub max_normcost: f64,
    pub mean_suboptimality: f64,
    pub monotone_runs: usize,
    pub converged_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: usize,
    pub algo: String,
    pub solver: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub iter: usize,
    pub runs: usize,
    pub mean_normcost: f64,
    pub median_normcost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: usize,
    pub algo: String,
    pub solver: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub runs: usize,
    pub iters_timed: usize,
    /// Mean wall time per iteration over the first iterations.
    pub time_per_iter_us: f64,
    /// Same, leaving out the derivative evaluation at the starting point.
    pub time_per_iter_excl_first_deriv_us: f64,
    pub deriv_us: f64,
    pub build_us: f64,
    pub solve_us: f64,
    pub other_us: f64,
    /// `(build + solve) / total` over the timed iterations.
    pub subproblem_fraction: f64,
    pub host: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

type CellKey = (Variant, usize, String, String, usize);

fn cell_key(r: &RunRecord) -> CellKey {
    (r.variant, r.k, r.algo.clone(), r.solver.clone(), r.bits)
}

/// Groups runs by (variant, K, algo), keeping first-seen order.
fn cells(runs: &[RunRecord]) -> Vec<(CellKey, Vec<&RunRecord>)> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut groups: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        let key = cell_key(r);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order.into_iter().map(|k| { let v = groups.remove(&k).unwrap_or_default(); (k, v) }).collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn long_rows(runs: &[RunRecord]) -> Vec<LongRow> {
    let mut out = Vec::new();
    for r in runs {
        let base = |iter, f, normcost| LongRow {
            variant: r.variant,
            k: r.k,
            algo: r.algo.clone(),
            solver: r.solver.clone(),
            m: r.bits,
            seed: r.seed,
            iter,
            f,
            normcost,
            status: r.status.clone(),
        };
        if !r.is_ok() || r.rows.is_empty() {
            out.push(base(None, None, None));
            continue;
        }
        for (i, row) in r.rows.iter().enumerate() {
            out.push(base(Some(row.iter), Some(row.f), Some(r.normcost_after(i))));
        }
    }
    out
}

pub fn summary_rows(runs: &[RunRecord]) -> Vec<SummaryRow> {
    cells(runs)
        .into_iter()
        .map(|((variant, k, algo, solver, m), group)| {
            let ok: Vec<&&RunRecord> = group.iter().filter(|r| r.is_ok()).collect();
            let nc: Vec<f64> = ok.iter().map(|r| r.normalized_cost).collect();
            let sub: Vec<f64> = ok.iter().map(|r| r.suboptimality).collect();
            SummaryRow {
                variant,
                k,
                algo,
                solver,
                m,
                runs: ok.len(),
                failed: group.len() - ok.len(),
                mean_normcost: mean(&nc),
                median_normcost: median(&nc),
                min_normcost: nc.iter().copied().fold(f64::NAN, f64::min),
                max_normcost: nc.iter().copied().fold(f64::NAN, f64::max),
                mean_suboptimality: mean(&sub),
                monotone_runs: ok.iter().filter(|r| r.monotone).count(),
                converged_runs: ok.iter().filter(|r| r.converged).count(),
            }
        })
        .collect()
}

pub fn curve_rows(runs: &[RunRecord]) -> Vec<CurveRow> {
    let mut out = Vec::new();
    for ((variant, k, algo, solver, m), group) in cells(runs) {
        let ok: Vec<&RunRecord> = group.into_iter().filter(|r| r.is_ok()).collect();
        let Some(iterations) = ok.iter().map(|r| r.iterations).max() else { continue };
        for iter in 0..iterations {
            let vals: Vec<f64> = ok.iter().map(|r| r.normcost_after(iter)).collect();
            out.push(CurveRow {
                variant,
                k,
                algo: algo.clone(),
                solver: solver.clone(),
                m,
                iter,
                runs: vals.len(),
                mean_normcost: mean(&vals),
                median_normcost: median(&vals),
            });
        }
    }
    out
}

/// Machine description attached to timing rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HostInfo {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl HostInfo {
    pub fn current() -> Self {
        let host = std::fs::read_to_string("/proc/sys/kernel/hostname")
            .or_else(|_| std::fs::read_to_string("/etc/hostname"))
            .map(|s| s.trim().to_string())
            .ok()
            .or_else(|| std::env::var("HOSTNAME").ok())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "unknown".into());
        Self {
            host,
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
        }
    }
}

pub fn timing_rows(runs: &[RunRecord], host: &HostInfo) -> Vec<TimingRow> {
    let mut out = Vec::new();
    for ((variant, k, algo, solver, m), group) in cells(runs) {
        let ok: Vec<&RunRecord> = group.into_iter().filter(|r| r.is_ok() && !r.rows.is_empty()).collect();
        if ok.is_empty() {
            continue;
        }
        let (mut per_iter, mut per_iter_excl) = (Vec::new(), Vec::new());
        let (mut deriv, mut build, mut solve, mut total) = (0.0, 0.0, 0.0, 0.0);
        let mut timed = 0;
        for r in &ok {
            let rows = &r.rows[..r.rows.len().min(TIMED_ITERATIONS)];
            let n = rows.len() as f64;
            let sum = |f: fn(&TraceRow) -> u64| rows.iter().map(|x| f(x) as f64).sum::<f64>();
            let tot = sum(|x| x.t_total_us);
            per_iter.push(tot / n);
            per_iter_excl.push((tot - rows[0].t_deriv_us as f64) / n);
            deriv += sum(|x| x.t_deriv_us) / n;
            build += sum(|x| x.t_build_us) / n;
            solve += sum(|x| x.t_solve_us) / n;
            total += tot / n;
            timed = timed.max(rows.len());
        }
        let runs_n = ok.len() as f64;
        let (deriv, build, solve, total) = (deriv / runs_n, build / runs_n, solve / runs_n, total / runs_n);
        out.push(TimingRow {
            variant,
            k,
            algo,
            solver,
            m,
            runs: ok.len(),
            iters_timed: timed,
            time_per_iter_us: mean(&per_iter),
            time_per_iter_excl_first_deriv_us: mean(&per_iter_excl),
            deriv_us: deriv,
            build_us: build,
            solve_us: solve,
            other_us: (total - deriv - build - solve).max(0.0),
            subproblem_fraction: if total > 0.0 { (build + solve) / total } else { 0.0 },
            host: host.host.clone(),
            os: host.os.clone(),
            arch: host.arch.clone(),
            threads: host.threads,
        });
    }
    out
}

/// Writes the four sweep tables and an echo of the spec into `dir`.
pub fn write_sweep(dir: &Path, spec: &ExperimentSpec, runs: &[RunRecord]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    write_json(&dir.join(SPEC_JSON), spec)?;
    write_rows(&dir.join(LONG_CSV), &long_rows(runs))?;
    write_rows(&dir.join(SUMMARY_CSV), &summary_rows(runs))?;
    write_rows(&dir.join(CURVES_CSV), &curve_rows(runs))?;
    write_rows(&dir.join(TIMING_CSV), &timing_rows(runs, &HostInfo::current()))?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| BenchError::Corrupt { file: path.display().to_string(), detail: e.to_string() })
        })
        .collect()
}
