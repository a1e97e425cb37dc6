use std::path::{Path, PathBuf};
use std::process::Command;

use sizeclust_cli::config::{EtaChoice, RunConfig};
use sizeclust_cli::{run_benchmark, run_fit, run_simulate, run_sort, CliError, Overrides, RunStatus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sizeclust"))
}

/// Short sampler and search settings so each run takes well under a second.
const QUICK: &str = r#"
[sampler]
chains = 2
burn_in = 150
kept = 150
[optimizer]
population_size = 60
max_generations = 40
wait_generations = 5
"#;

fn simulate_into(dir: &Path, sizes: &str) -> PathBuf {
    let cfg = dir.join("sim.toml");
    std::fs::write(&cfg, format!("output = \"sim\"\n[simulate]\ngroup_sizes = [{sizes}]\nquestions = 8\n")).unwrap();
    let status = bin().args(["simulate", "--seed", "5", "--config"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    dir.join("sim/survey.csv")
}

fn quick_config(dir: &Path, k: usize, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("data = \"sim/survey.csv\"\nclusters = {k}\noutput = \"out\"\n{extra}\n{QUICK}"))
        .unwrap();
    path
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(str::to_owned).collect()).collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.headers().unwrap().iter().map(str::to_owned).collect()
}

#[test]
fn simulate_writes_survey_and_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let survey = simulate_into(tmp.path(), "4, 3");
    let text = std::fs::read_to_string(&survey).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "respondent,q1,q2,q3,q4,q5,q6,q7,q8");
    assert_eq!(lines.next().unwrap(), "levels,3,3,3,3,3,3,3,3");
    assert_eq!(lines.count(), 7);
    let truth = read_rows(&tmp.path().join("sim/truth.csv"));
    let labels: Vec<&str> = truth.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels, ["1", "1", "1", "1", "2", "2", "2"]);
    assert!(tmp.path().join("sim/phi_true.csv").is_file());
    assert_eq!(header(&tmp.path().join("sim/beta_prior.csv")), ["cluster", "question", "option", "concentration"]);
}

#[test]
fn sort_binary_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "4, 4, 3");
    let cfg = quick_config(tmp.path(), 3, "");
    let out = bin().args(["sort", "--seed", "3", "--config"]).arg(&cfg).output().unwrap();
    let code = out.status.code().unwrap();
    assert!(code == 0 || code == 3, "exit {code}: {}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    for name in [
        "assignments.csv",
        "posterior_summary.csv",
        "diagnostics.csv",
        "decision.csv",
        "identification.csv",
        "report.txt",
        "theta_draws.csv",
        "results.json",
    ] {
        assert!(dir.join(name).is_file(), "{name} missing");
    }
    assert_eq!(
        header(&dir.join("assignments.csv")),
        ["respondent", "label", "raw_label", "vi_only_label", "theta_mean_1", "theta_mean_2", "theta_mean_3"]
    );
    let rows = read_rows(&dir.join("assignments.csv"));
    let ids: Vec<String> = (1..=11).map(|n| format!("r{n}")).collect();
    assert_eq!(rows.iter().map(|r| r[0].clone()).collect::<Vec<_>>(), ids);
    for r in &rows {
        let label: usize = r[1].parse().unwrap();
        assert!((1..=3).contains(&label));
        let total: f64 = r[4..].iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-4);
    }
    assert_eq!(read_rows(&dir.join("posterior_summary.csv")).len(), 11 * 3 + 3 * 8 * 3);
    assert_eq!(read_rows(&dir.join("theta_draws.csv")).len(), 300 * 11);
    let decision = read_rows(&dir.join("decision.csv"));
    assert_eq!(decision[0][0], "chosen");
    assert_eq!(decision[1][0], "vi_only");
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("max split R-hat"));
    assert!(report.contains("threshold 1.01"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["chosen"]["labels"].as_array().unwrap().len(), 11);
    assert!(json["diagnostics"]["max_rhat"].is_number());
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "4, 4");
    let cfg = quick_config(tmp.path(), 2, "");
    let out = bin()
        .args(["sort", "--lambda", "0", "--delta", "0.5", "--mode", "invariant", "--eta", "1,3", "--output"])
        .arg(tmp.path().join("flagged"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(tmp.path().join("flagged/report.txt")).unwrap();
    assert!(report.contains("loss: invariant, eta = (1, 3), lambda = 0, delta = 0.5"), "{report}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = bin().args(["sort", "-k", "3", "--data"]).arg(tmp.path().join("nope.csv")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("does not exist"));

    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "respondent,q1,q2\nr1,1,2\nr2,2,x\n").unwrap();
    let out = bin().args(["fit", "-k", "2", "--data"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3, column 3 (q2)"), "{err}");

    let usage = bin().args(["sort", "--lambda", "heavy"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));

    let cfg = tmp.path().join("k1.toml");
    std::fs::write(&cfg, "clusters = 1\ndata = \"bad.csv\"\n").unwrap();
    assert_eq!(bin().args(["fit", "--config"]).arg(&cfg).output().unwrap().status.code(), Some(1));

    std::fs::write(&cfg, "clusters = 2\n[loss]\nlamda = 1\n").unwrap();
    assert_eq!(bin().args(["fit", "--config"]).arg(&cfg).output().unwrap().status.code(), Some(1));
}

#[test]
fn convergence_failure_still_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "4, 4");
    let cfg = quick_config(tmp.path(), 2, "");
    let out = bin().args(["fit", "--config"]).arg(&cfg).output().unwrap();
    if out.status.code() == Some(3) {
        assert!(String::from_utf8_lossy(&out.stderr).contains("R-hat"));
        let report = std::fs::read_to_string(tmp.path().join("out/report.txt")).unwrap();
        assert!(report.contains("FAIL"));
    } else {
        assert_eq!(out.status.code(), Some(0));
    }
    assert!(tmp.path().join("out/posterior_summary.csv").is_file());

    let mut cfg = RunConfig::load(&cfg).unwrap();
    cfg.sampler.rhat_threshold = 1.0;
    cfg.output = tmp.path().join("strict");
    assert_eq!(run_fit(&cfg).unwrap(), RunStatus::ConvergenceWarning);
    assert!(tmp.path().join("strict/diagnostics.csv").is_file());
}

#[test]
fn invariant_mode_records_identification() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "5, 3, 3");
    let mut cfg =
        RunConfig::load(&quick_config(tmp.path(), 3, "[loss]\nmode = \"invariant\"\neta = [5, 3, 3]")).unwrap();
    cfg.apply(&Overrides { seed: Some(4), ..Default::default() });
    let out = run_sort(&cfg).unwrap();
    let sigma = out.chosen.sigma.clone().expect("invariant loss is identified");
    let mut sorted = sigma.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![1, 2, 3]);
    for (label, raw) in out.chosen.labels.iter().zip(&out.chosen.raw_labels) {
        assert_eq!(*label, sigma[raw - 1]);
    }
    let rows = read_rows(&cfg.output.join("identification.csv"));
    assert!(rows.iter().any(|r| r[0] == "chosen"));
}

#[test]
fn sensitive_non_uniform_target_keeps_search_labels() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "5, 3, 3");
    let cfg = RunConfig::load(&quick_config(tmp.path(), 3, "[loss]\neta = [5, 3, 3]")).unwrap();
    let out = run_sort(&cfg).unwrap();
    assert!(out.chosen.sigma.is_none());
    assert_eq!(out.chosen.labels, out.chosen.raw_labels);
    assert!(out.vi_only.sigma.is_some());
}

#[test]
fn shorter_target_merges_clusters() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "4, 4, 4");
    let cfg = RunConfig::load(&quick_config(tmp.path(), 3, "[loss]\neta = [1, 1]\ndelta = 0.01")).unwrap();
    let out = run_sort(&cfg).unwrap();
    assert!(out.chosen.labels.iter().all(|&l| (1..=2).contains(&l)));
    assert_eq!(out.chosen.group_sizes.len(), 2);
    assert!(out.chosen.sigma.is_none());
}

#[test]
fn beta_file_and_alpha_matrix_are_used() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "3, 3");
    let alpha: Vec<String> = (0..6).map(|_| "[0.4, 0.6]".to_owned()).collect();
    let extra = format!("[prior]\nalpha = [{}]\nbeta_file = \"sim/beta_prior.csv\"", alpha.join(", "));
    let cfg = RunConfig::load(&quick_config(tmp.path(), 2, &extra)).unwrap();
    assert!(run_fit(&cfg).is_ok());

    let bad = RunConfig::load(&quick_config(tmp.path(), 2, "[prior]\nalpha = [0.5, 0.5, 0.5]")).unwrap();
    assert!(matches!(run_fit(&bad), Err(CliError::Config(_))));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_into(tmp.path(), "4, 4");
    let cfg = quick_config(tmp.path(), 2, "");
    for out in ["a", "b"] {
        let run = bin()
            .args(["sort", "--seed", "11", "--output", out, "--config"])
            .arg(&cfg)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(matches!(run.status.code(), Some(0 | 3)));
    }
    for entry in std::fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn benchmark_variants_coincide_without_size_term() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg: RunConfig = toml::from_str(QUICK).unwrap();
    cfg.output = tmp.path().join("bench");
    cfg.benchmark.replicates = 1;
    cfg.benchmark.eta = EtaChoice::Named("truth".into());
    cfg.simulate.group_sizes = vec![8, 7, 5];
    cfg.loss.lambda = 0.0;
    let out = run_benchmark(&cfg).unwrap();
    assert_eq!(out.rows.len(), 3);
    let first = &out.rows[0];
    for row in &out.rows[1..] {
        assert_eq!(row.accuracy, first.accuracy);
        assert_eq!(row.vi_from_truth, first.vi_from_truth);
        assert_eq!(row.group_sizes, first.group_sizes);
    }
    assert_eq!(header(&tmp.path().join("bench/benchmark.csv"))[2], "variant");
    assert_eq!(read_rows(&tmp.path().join("bench/benchmark_summary.csv")).len(), 3);
}

#[test]
fn different_seeds_give_different_surveys() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = RunConfig { output: tmp.path().join("a"), ..RunConfig::default() };
    a.apply(&Overrides { seed: Some(1), ..Default::default() });
    let mut b = a.clone();
    b.output = tmp.path().join("b");
    b.apply(&Overrides { seed: Some(2), ..Default::default() });
    run_simulate(&a).unwrap();
    run_simulate(&b).unwrap();
    let sa = std::fs::read(tmp.path().join("a/survey.csv")).unwrap();
    let sb = std::fs::read(tmp.path().join("b/survey.csv")).unwrap();
    assert_ne!(sa, sb);
}
