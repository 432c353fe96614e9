use std::collections::BTreeMap;

use quanco_bench::output::{
    curve_rows, long_rows, read_rows, summary_rows, write_sweep, CurveRow, LongRow, SummaryRow, TimingRow, CURVES_CSV,
    LONG_CSV, SUMMARY_CSV, TIMING_CSV,
};
use quanco_bench::{run_sweep, ExperimentSpec, RunRecord};

fn spec() -> ExperimentSpec {
    serde_json::from_str(
        r#"{"variants":["cone","exponential"],"ks":[3,6],
            "algorithms":[{"algo":"trn"},{"algo":"quanco","solver":"sa","bits":2},{"algo":"quanco","solver":"exact","bits":5}],
            "iterations":15,"seeds":[4,5,6]}"#,
    )
    .unwrap()
}

fn header(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn csv_headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec();
    write_sweep(dir.path(), &spec, &run_sweep(&spec, true).unwrap()).unwrap();
    assert_eq!(header(&dir.path().join(LONG_CSV)), "variant,K,algo,solver,M,seed,iter,f,normcost,status");
    assert_eq!(
        header(&dir.path().join(SUMMARY_CSV)),
        "variant,K,algo,solver,M,runs,failed,mean_normcost,median_normcost,min_normcost,max_normcost,\
         mean_suboptimality,monotone_runs,converged_runs"
    );
    assert_eq!(header(&dir.path().join(CURVES_CSV)), "variant,K,algo,solver,M,iter,runs,mean_normcost,median_normcost");
    assert_eq!(
        header(&dir.path().join(TIMING_CSV)),
        "variant,K,algo,solver,M,runs,iters_timed,time_per_iter_us,time_per_iter_excl_first_deriv_us,deriv_us,\
         build_us,solve_us,other_us,subproblem_fraction,host,os,arch,threads"
    );
    let long = std::fs::read(dir.path().join(LONG_CSV)).unwrap();
    assert!(!long.contains(&b'\r'));
    assert!(long.ends_with(b"\n"));

    // every row has the header's width and the tables read back unchanged
    let runs = run_sweep(&spec, false).unwrap();
    assert_eq!(read_rows::<LongRow>(&dir.path().join(LONG_CSV)).unwrap(), long_rows(&runs));
    assert_eq!(read_rows::<CurveRow>(&dir.path().join(CURVES_CSV)).unwrap(), curve_rows(&runs));
    assert_eq!(read_rows::<TimingRow>(&dir.path().join(TIMING_CSV)).unwrap().len(), 10);
}

#[test]
fn failed_runs_keep_one_blank_row() {
    let runs = run_sweep(&spec(), true).unwrap();
    // 6-biomass problems with 5 bits per dimension exceed the exact solver cap
    let failed: Vec<&RunRecord> = runs.iter().filter(|r| !r.is_ok()).collect();
    assert_eq!(failed.len(), 2 * 3);
    let rows = long_rows(&runs);
    let blank: Vec<&LongRow> = rows.iter().filter(|r| r.status != "ok").collect();
    assert_eq!(blank.len(), failed.len());
    assert!(blank.iter().all(|r| r.k == 6 && r.m == 5 && r.iter.is_none() && r.f.is_none() && r.normcost.is_none()));
    let summary = summary_rows(&runs);
    let cell = summary.iter().find(|r| r.k == 6 && r.m == 5).unwrap();
    assert_eq!((cell.runs, cell.failed), (0, 3));
}

#[test]
fn aggregates_match_an_independent_pass() {
    let runs = run_sweep(&spec(), true).unwrap();
    let long = long_rows(&runs);

    // final normalised cost per (cell, seed) straight from the long table
    let mut finals: BTreeMap<(String, usize, String), BTreeMap<u64, f64>> = BTreeMap::new();
    let mut per_iter: BTreeMap<(String, usize, String, usize), Vec<f64>> = BTreeMap::new();
    for r in long.iter().filter(|r| r.status == "ok") {
        let cell = (r.variant.to_string(), r.k, r.algo.clone());
        finals.entry(cell).or_default().insert(r.seed, r.normcost.unwrap());
        per_iter.entry((r.variant.to_string(), r.k, r.algo.clone(), r.iter.unwrap())).or_default().push(r.normcost.unwrap());
    }
    let summary: Vec<SummaryRow> = summary_rows(&runs);
    for row in summary.iter().filter(|r| r.runs > 0) {
        let vals: Vec<f64> = finals[&(row.variant.to_string(), row.k, row.algo.clone())].values().copied().collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert_eq!(vals.len(), row.runs);
        assert!((mean - row.mean_normcost).abs() <= 1e-12, "{} {}", mean, row.mean_normcost);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[sorted.len() / 2] - row.median_normcost).abs() <= 1e-12);
        assert_eq!(sorted[0], row.min_normcost);
    }

    // curves hold finished runs at their final value; the long table stops
    // at termination, so compare only iterations every run reached
    for c in curve_rows(&runs) {
        let key = (c.variant.to_string(), c.k, c.algo.clone(), c.iter);
        if let Some(v) = per_iter.get(&key).filter(|v| v.len() == c.runs) {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!((mean - c.mean_normcost).abs() <= 1e-12);
        }
    }
}
