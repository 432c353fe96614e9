use std::path::Path;
use std::process::Command;

fn quanco(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_quanco")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_reports_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = quanco(&["generate", "--variant", "cone", "--k", "20", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8(o.stdout).unwrap();
        assert!(stdout.contains("f_min = "), "{stdout}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.contains("\"quanco-problem/1\""));
}

#[test]
fn zero_biomasses_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = quanco(&["generate", "--k", "0", "--out", s(&dir.path().join("p.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--k"));
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    assert!(quanco(&["generate", "--k", "20", "--seed", "3", "--out", s(&problem)]).status.success());

    let trn_dir = dir.path().join("trn");
    let o = quanco(&["run", "--algo", "trn", "--iters", "100", "--out", s(&trn_dir), s(&problem)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(trn_dir.join("trace.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["iter", "f", "rho", "accepted", "r_norm", "t_deriv_us", "t_build_us", "t_solve_us"]
    );
    let mut prev = f64::INFINITY;
    for row in rdr.records() {
        let f: f64 = row.unwrap()[1].parse().unwrap();
        assert!(f <= prev);
        prev = f;
    }

    let q_dir = dir.path().join("quanco");
    let o = quanco(&["run", "--algo", "quanco", "--solver", "exact", "--m", "1", "--iters", "100", "--out", s(&q_dir), s(&problem)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(q_dir.join("summary.json")).unwrap()).unwrap();
    let nc = summary["normalized_cost"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&nc));
    for key in ["suboptimality", "converged", "reason", "f_min", "timing"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn annealing_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    assert!(quanco(&["generate", "--variant", "cauchy", "--k", "8", "--seed", "4", "--out", s(&problem)]).status.success());
    let mut summaries = Vec::new();
    for name in ["one", "two"] {
        let out = dir.path().join(name);
        let o = quanco(&["run", "--solver", "sa", "--samples", "10", "--m", "1", "--seed", "9", "--iters", "30", "--out", s(&out), s(&problem)]);
        assert!(o.status.success());
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        summaries.push(v);
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn exact_cap_error_gives_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    assert!(quanco(&["generate", "--k", "10", "--out", s(&problem)]).status.success());
    let o = quanco(&["run", "--solver", "exact", "--m", "3", "--out", s(dir.path()), s(&problem)]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("10*3 = 30") && err.contains("sa"), "{err}");
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"schema":"quanco-experiment/1","variants":["cone"],"ks":[20],
            "algorithms":[{"algo":"trn"},{"algo":"quanco","solver":"exact","bits":1}],
            "iterations":20,"seeds":[0,1]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = quanco(&["sweep", "--config", s(&spec), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["long.csv", "summary.csv", "curves.csv", "timing.csv", "spec.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = quanco(&["report", s(&out)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("| A7 | mean normalised cost"));
    assert!(text.lines().filter(|l| l.starts_with("| A")).count() >= 9);

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = quanco(&["report", s(&empty)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no runs found"));
}

#[test]
fn empty_seed_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"variants":["cone"],"ks":[5],"algorithms":[{"algo":"trn"}],"iterations":5,"seeds":[]}"#).unwrap();
    let o = quanco(&["sweep", "--config", s(&spec), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeds"));
}
