use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sizeclust_core::loss::{expected_loss, size_term};
use sizeclust_core::optimize::optimize_with;
use sizeclust_core::{
    accuracy, fit_posterior, identify_labels, simulate_dataset, vi_from_truth, Assignment, Composition, Diagnostics,
    ExpectedLoss, LossMode, LossSpec, OptimizerConfig, PosteriorSamples, PriorSpec, SamplerConfig, SimTruth,
};

use crate::config::{derive_seed, RunConfig, RunMode};
use crate::error::{CliError, CliResult};
use crate::io::{fmt6, read_beta_file, read_survey, write_csv, write_survey, write_text, Survey};

/// How a completed run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    /// Artifacts were written but some split R-hat reached the threshold.
    ConvergenceWarning,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::ConvergenceWarning => 3,
        }
    }

    fn from_converged(ok: bool) -> Self {
        if ok {
            RunStatus::Success
        } else {
            RunStatus::ConvergenceWarning
        }
    }
}

/// A fitted posterior together with the survey it came from.
#[derive(Debug, Clone)]
pub struct Fit {
    pub survey: Survey,
    pub prior: PriorSpec,
    pub samples: PosteriorSamples,
    pub diagnostics: Diagnostics,
}

/// One candidate action and how it scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSummary {
    pub name: String,
    /// Weight of the size term in the loss this action minimized.
    pub lambda: f64,
    /// Reported labels, one-based.
    pub labels: Vec<usize>,
    /// Labels as returned by the search, before identification.
    pub raw_labels: Vec<usize>,
    /// One-based identification map from search labels to posterior
    /// labels, when identification was applied.
    pub sigma: Option<Vec<usize>>,
    pub group_sizes: Vec<usize>,
    /// Expected loss under the loss this action minimized.
    pub objective: f64,
    /// Expected loss under the configured loss.
    pub expected_loss: f64,
    pub expected_vi: f64,
    /// Size distance under the configured loss.
    pub size_term: f64,
    pub generations: usize,
}

/// Result of [`run_sort`].
#[derive(Debug, Clone)]
pub struct SortOutcome {
    pub status: RunStatus,
    pub fit: Fit,
    pub spec: LossSpec,
    pub chosen: ActionSummary,
    pub vi_only: ActionSummary,
}

/// One variant of one benchmark replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub replicate: usize,
    pub seed: u64,
    pub variant: String,
    pub accuracy: f64,
    pub vi_from_truth: f64,
    pub expected_loss: f64,
    pub group_sizes: Vec<usize>,
    pub max_rhat: Option<f64>,
}

/// Per-variant means over replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: String,
    pub mean_accuracy: f64,
    pub mean_vi_from_truth: f64,
    /// Replicates whose action used a single cluster.
    pub collapsed: usize,
}

/// Result of [`run_benchmark`].
#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub status: RunStatus,
    pub rows: Vec<BenchmarkRow>,
    pub summary: Vec<VariantSummary>,
}

impl BenchmarkOutcome {
    pub fn variant(&self, name: &str) -> Option<&VariantSummary> {
        self.summary.iter().find(|s| s.variant == name)
    }
}

pub const VARIANTS: [&str; 3] = ["LSS", "LSI", "VI"];

/// Fits the posterior for the configured survey and writes posterior
/// summaries, diagnostics and per-draw `theta`.
pub fn run_fit(cfg: &RunConfig) -> CliResult<RunStatus> {
    cfg.validate(RunMode::Fit)?;
    let fit = fit_survey(cfg)?;
    create_dir(&cfg.output)?;
    write_posterior(&cfg.output, &fit)?;
    let mut report = String::new();
    report_header(&mut report, "fit", &fit, &cfg.sampler);
    write_text(&cfg.output.join("report.txt"), &report)?;
    let json = serde_json::json!({
        "respondents": fit.survey.respondents,
        "clusters": fit.samples.k,
        "sampler": cfg.sampler,
        "diagnostics": diagnostics_json(&fit.diagnostics),
        "posterior": summary_json(&fit.samples),
    });
    write_json(&cfg.output.join("results.json"), &json)?;
    Ok(RunStatus::from_converged(fit.diagnostics.converged()))
}

/// The full pipeline: fit, search for the Bayes action under the configured
/// loss and under VI alone, identify labels and write every artifact.
pub fn run_sort(cfg: &RunConfig) -> CliResult<SortOutcome> {
    cfg.validate(RunMode::Sort)?;
    let k = cfg.k()?;
    let spec = cfg.loss.to_spec(k)?;
    let fit = fit_survey(cfg)?;
    let zs = fit.samples.z_assignments();

    let chosen = decide("chosen", &zs, &spec, &spec, &fit.samples, &cfg.optimizer)?;
    let vi_spec = spec.with_lambda(0.0);
    let vi_only = decide("vi_only", &zs, &vi_spec, &spec, &fit.samples, &cfg.optimizer)?;

    create_dir(&cfg.output)?;
    write_posterior(&cfg.output, &fit)?;
    write_assignments(&cfg.output, &fit, &chosen, &vi_only)?;
    write_decision(&cfg.output, &[&chosen, &vi_only])?;

    let mut report = String::new();
    report_header(&mut report, "sort", &fit, &cfg.sampler);
    report_decision(&mut report, &spec, &chosen, &vi_only);
    write_text(&cfg.output.join("report.txt"), &report)?;

    let json = serde_json::json!({
        "respondents": fit.survey.respondents,
        "clusters": k,
        "loss": spec,
        "sampler": cfg.sampler,
        "optimizer": cfg.optimizer,
        "diagnostics": diagnostics_json(&fit.diagnostics),
        "posterior": summary_json(&fit.samples),
        "chosen": chosen,
        "vi_only": vi_only,
    });
    write_json(&cfg.output.join("results.json"), &json)?;

    let status = RunStatus::from_converged(fit.diagnostics.converged());
    Ok(SortOutcome { status, fit, spec, chosen, vi_only })
}

/// Simulates one dataset and writes it with its planted truth.
pub fn run_simulate(cfg: &RunConfig) -> CliResult<RunStatus> {
    cfg.validate(RunMode::Simulate)?;
    let (data, truth) = simulate_dataset(&cfg.simulate)?;
    let survey = Survey {
        respondents: (1..=data.respondents()).map(|n| format!("r{n}")).collect(),
        questions: (1..=data.questions()).map(|q| format!("q{q}")).collect(),
        data,
    };
    create_dir(&cfg.output)?;
    write_survey(&cfg.output.join("survey.csv"), &survey)?;
    write_truth(&cfg.output, &survey, &truth)?;
    Ok(RunStatus::Success)
}

/// Replicated simulation study comparing the size-constrained losses with
/// VI alone.
///
/// Each replicate simulates a dataset, fits it with a prior built from the
/// generating hyper-parameters, and searches for three actions: `LSS`
/// (label-sensitive, configured `eta`), `LSI` (label-invariant, `eta` in a
/// random order) and `VI` (`lambda = 0`).
pub fn run_benchmark(cfg: &RunConfig) -> CliResult<BenchmarkOutcome> {
    cfg.validate(RunMode::Benchmark)?;
    let bench = &cfg.benchmark;
    let sim = &cfg.simulate;
    let k = sim.clusters();
    let eta = bench.eta_for(&sim.group_sizes)?;
    let mut rows = Vec::with_capacity(bench.replicates * VARIANTS.len());
    let mut all_converged = true;

    for r in 0..bench.replicates {
        let tag = r as u64;
        let mut sim_cfg = sim.clone();
        sim_cfg.seed = derive_seed(sim.seed, tag);
        let sampler = SamplerConfig { seed: derive_seed(cfg.sampler.seed, tag), ..cfg.sampler.clone() };
        let optimizer = OptimizerConfig { seed: derive_seed(cfg.optimizer.seed, tag), ..cfg.optimizer.clone() };

        let (data, truth) = simulate_dataset(&sim_cfg)?;
        let prior = truth.informed_prior(bench.alpha, bench.prior_noise, derive_seed(sim_cfg.seed, 1))?;
        let (samples, diagnostics) = fit_posterior(&data, &prior, &sampler)?;
        all_converged &= diagnostics.converged();
        let zs = samples.z_assignments();

        let mut shuffled = eta.parts().to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(sim_cfg.seed, 2)));
        let specs = [
            LossSpec::new(LossMode::Sensitive, eta.clone(), cfg.loss.lambda, cfg.loss.delta, k)?,
            LossSpec::new(LossMode::Invariant, Composition::new(shuffled)?, cfg.loss.lambda, cfg.loss.delta, k)?,
            LossSpec::new(LossMode::Sensitive, eta.clone(), 0.0, cfg.loss.delta, k)?,
        ];
        for (variant, spec) in VARIANTS.iter().zip(&specs) {
            let action = decide(variant, &zs, spec, spec, &samples, &optimizer)?;
            let a = Assignment::from_one_based(&action.labels, k)?;
            rows.push(BenchmarkRow {
                replicate: r + 1,
                seed: sim_cfg.seed,
                variant: (*variant).to_owned(),
                accuracy: accuracy(&a, &truth.z_true)?,
                vi_from_truth: vi_from_truth(&a, &truth.z_true)?,
                expected_loss: action.objective,
                group_sizes: action.group_sizes,
                max_rhat: diagnostics.max_rhat,
            });
        }
    }

    let summary: Vec<VariantSummary> = VARIANTS
        .iter()
        .map(|&v| {
            let sel: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.variant == v).collect();
            let mean = |f: fn(&BenchmarkRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / sel.len() as f64;
            VariantSummary {
                variant: v.to_owned(),
                mean_accuracy: mean(|r| r.accuracy),
                mean_vi_from_truth: mean(|r| r.vi_from_truth),
                collapsed: sel.iter().filter(|r| r.group_sizes.iter().filter(|&&g| g > 0).count() == 1).count(),
            }
        })
        .collect();

    create_dir(&cfg.output)?;
    write_benchmark(&cfg.output, &rows, &summary)?;
    let mut report = String::new();
    let _ = writeln!(report, "benchmark: {} replicates, group sizes {:?}", bench.replicates, sim.group_sizes);
    let _ = writeln!(report, "eta = ({})", join(eta.parts().iter().map(|&x| fmt6(x))));
    let _ = writeln!(report, "lambda = {}, delta = {}", fmt6(cfg.loss.lambda), fmt6(cfg.loss.delta));
    let _ = writeln!(
        report,
        "all fits converged (max split R-hat < {}): {}",
        fmt6(cfg.sampler.rhat_threshold),
        if all_converged { "yes" } else { "no" }
    );
    let _ = writeln!(report);
    let _ =
        writeln!(report, "{:<8} {:>14} {:>20} {:>10}", "variant", "mean_accuracy", "mean_vi_from_truth", "collapsed");
    for s in &summary {
        let _ = writeln!(
            report,
            "{:<8} {:>14} {:>20} {:>10}",
            s.variant,
            fmt6(s.mean_accuracy),
            fmt6(s.mean_vi_from_truth),
            s.collapsed
        );
    }
    write_text(&cfg.output.join("report.txt"), &report)?;
    let json = serde_json::json!({
        "simulate": sim,
        "benchmark": bench,
        "loss": { "lambda": cfg.loss.lambda, "delta": cfg.loss.delta },
        "rows": rows,
        "summary": summary,
    });
    write_json(&cfg.output.join("results.json"), &json)?;

    Ok(BenchmarkOutcome { status: RunStatus::from_converged(all_converged), rows, summary })
}

fn fit_survey(cfg: &RunConfig) -> CliResult<Fit> {
    let path = cfg.data.as_ref().ok_or_else(|| CliError::Config("`data` is not set".into()))?;
    let survey = read_survey(path)?;
    let k = cfg.k()?;
    let n = survey.data.respondents();
    let layout = survey.data.layout().clone();
    let alpha = cfg.prior.alpha.expand(n, k)?;
    let beta = match &cfg.prior.beta_file {
        Some(file) => read_beta_file(file, &layout, k, cfg.prior.beta)?,
        None => vec![cfg.prior.beta; k * layout.width()],
    };
    let prior = PriorSpec::new(n, k, layout, alpha, beta).map_err(|e| CliError::Config(format!("prior: {e}")))?;
    let (samples, diagnostics) = fit_posterior(&survey.data, &prior, &cfg.sampler)?;
    Ok(Fit { survey, prior, samples, diagnostics })
}

/// Minimizes `search` and scores the result under `reference`.
fn decide(
    name: &str,
    zs: &[Assignment],
    search: &LossSpec,
    reference: &LossSpec,
    samples: &PosteriorSamples,
    optimizer: &OptimizerConfig,
) -> CliResult<ActionSummary> {
    let objective = ExpectedLoss::new(zs, search)?;
    let report = optimize_with(&objective, optimizer)?;
    let raw = report.assignment;
    let k = samples.k;
    let (labels, sigma) = if search.is_label_invariant() && search.k_target() == k {
        let (a, sigma) = identify_labels(&raw, &samples.theta, k)?;
        (a, Some(sigma.to_one_based()))
    } else {
        (raw.clone(), None)
    };
    let expected_vi = expected_loss(&labels, zs, &reference.with_lambda(0.0))?;
    let size = size_term(&labels, reference).unwrap_or(f64::INFINITY);
    let total = if reference.lambda == 0.0 { expected_vi } else { expected_vi + reference.lambda * size };
    Ok(ActionSummary {
        name: name.to_owned(),
        lambda: search.lambda,
        group_sizes: labels.counts(),
        labels: labels.to_one_based(),
        raw_labels: raw.to_one_based(),
        sigma,
        objective: report.value,
        expected_loss: total,
        expected_vi,
        size_term: size,
        generations: report.generations,
    })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    write_text(path, &text)
}

fn join<I: IntoIterator<Item = String>>(parts: I) -> String {
    parts.into_iter().collect::<Vec<_>>().join(", ")
}

/// Type 7 sample quantile of sorted values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

struct SummaryRow {
    parameter: String,
    mean: f64,
    q025: f64,
    q975: f64,
}

fn posterior_summary(samples: &PosteriorSamples) -> Vec<SummaryRow> {
    let t = samples.num_draws();
    let (n, k, layout) = (samples.n, samples.k, &samples.layout);
    let summarize = |parameter: String, values: &[f64], width: usize, coord: usize| {
        let mut col: Vec<f64> = (0..t).map(|d| values[d * width + coord]).collect();
        let mean = col.iter().sum::<f64>() / t as f64;
        col.sort_by(f64::total_cmp);
        SummaryRow { parameter, mean, q025: quantile(&col, 0.025), q975: quantile(&col, 0.975) }
    };
    let mut rows = Vec::new();
    for i in 0..n {
        for c in 0..k {
            rows.push(summarize(format!("theta[{},{}]", i + 1, c + 1), &samples.theta, n * k, i * k + c));
        }
    }
    let w = layout.width();
    for c in 0..k {
        for q in 0..layout.questions() {
            for v in 0..layout.alphabet()[q] {
                let coord = c * w + layout.offset(q) + v;
                rows.push(summarize(format!("phi[{},{},{}]", c + 1, q + 1, v + 1), &samples.phi, k * w, coord));
            }
        }
    }
    rows
}

fn summary_json(samples: &PosteriorSamples) -> serde_json::Value {
    posterior_summary(samples)
        .into_iter()
        .map(|r| serde_json::json!({ "parameter": r.parameter, "mean": r.mean, "q025": r.q025, "q975": r.q975 }))
        .collect()
}

fn diagnostics_json(d: &Diagnostics) -> serde_json::Value {
    serde_json::json!({
        "max_rhat": d.max_rhat,
        "rhat_threshold": d.rhat_threshold,
        "converged": d.converged(),
        "label_switching": d.label_switching,
        "note": d.ess_note,
        "rhat": d.rhat.iter().map(|(p, r)| serde_json::json!({ "parameter": p, "rhat": r })).collect::<Vec<_>>(),
    })
}

fn write_posterior(dir: &Path, fit: &Fit) -> CliResult<()> {
    let rows: Vec<Vec<String>> = posterior_summary(&fit.samples)
        .into_iter()
        .map(|r| vec![r.parameter, fmt6(r.mean), fmt6(r.q025), fmt6(r.q975)])
        .collect();
    write_csv(&dir.join("posterior_summary.csv"), &["parameter", "mean", "q025", "q975"], &rows)?;

    let rows: Vec<Vec<String>> = fit.diagnostics.rhat.iter().map(|(p, r)| vec![p.clone(), fmt6(*r)]).collect();
    write_csv(&dir.join("diagnostics.csv"), &["parameter", "rhat"], &rows)?;

    let s = &fit.samples;
    let mut header = vec!["draw".to_owned(), "chain".into(), "respondent".into()];
    header.extend((1..=s.k).map(|c| format!("theta_{c}")));
    let mut rows = Vec::with_capacity(s.num_draws() * s.n);
    for t in 0..s.num_draws() {
        for i in 0..s.n {
            let mut row = vec![(t + 1).to_string(), (s.chain_id[t] + 1).to_string(), fit.survey.respondents[i].clone()];
            row.extend(s.theta_row(t, i).iter().map(|&x| fmt6(x)));
            rows.push(row);
        }
    }
    write_csv(&dir.join("theta_draws.csv"), &header, &rows)
}

fn write_assignments(dir: &Path, fit: &Fit, chosen: &ActionSummary, vi_only: &ActionSummary) -> CliResult<()> {
    let k = fit.samples.k;
    let mut header = vec!["respondent".to_owned(), "label".into(), "raw_label".into(), "vi_only_label".into()];
    header.extend((1..=k).map(|c| format!("theta_mean_{c}")));
    let mean = fit.samples.theta_mean();
    let rows: Vec<Vec<String>> = (0..fit.samples.n)
        .map(|i| {
            let mut row = vec![
                fit.survey.respondents[i].clone(),
                chosen.labels[i].to_string(),
                chosen.raw_labels[i].to_string(),
                vi_only.labels[i].to_string(),
            ];
            row.extend(mean[i * k..(i + 1) * k].iter().map(|&x| fmt6(x)));
            row
        })
        .collect();
    write_csv(&dir.join("assignments.csv"), &header, &rows)?;

    let mut rows = Vec::new();
    for action in [chosen, vi_only] {
        if let Some(sigma) = &action.sigma {
            for (i, &j) in sigma.iter().enumerate() {
                rows.push(vec![action.name.clone(), (i + 1).to_string(), j.to_string()]);
            }
        }
    }
    write_csv(&dir.join("identification.csv"), &["action", "search_label", "posterior_label"], &rows)
}

fn write_decision(dir: &Path, actions: &[&ActionSummary]) -> CliResult<()> {
    let header =
        ["action", "lambda", "objective", "expected_loss", "expected_vi", "size_term", "group_sizes", "generations"];
    let rows: Vec<Vec<String>> = actions
        .iter()
        .map(|a| {
            vec![
                a.name.clone(),
                fmt6(a.lambda),
                fmt6(a.objective),
                fmt6(a.expected_loss),
                fmt6(a.expected_vi),
                fmt6(a.size_term),
                a.group_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                a.generations.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("decision.csv"), &header, &rows)
}

fn report_header(out: &mut String, command: &str, fit: &Fit, sampler: &SamplerConfig) {
    let s = &fit.samples;
    let d = &fit.diagnostics;
    let _ = writeln!(out, "sizeclust {command}");
    let _ = writeln!(out, "respondents: {}", s.n);
    let _ = writeln!(out, "questions: {}", s.layout.questions());
    let _ = writeln!(out, "clusters: {}", s.k);
    let _ = writeln!(
        out,
        "draws: {} ({} chains x {} kept after {} burn-in)",
        s.num_draws(),
        sampler.chains,
        sampler.kept,
        sampler.burn_in
    );
    match d.max_rhat {
        Some(r) => {
            let verdict = if d.converged() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "max split R-hat: {} (threshold {}): {verdict}", fmt6(r), fmt6(d.rhat_threshold));
        }
        None => {
            let _ = writeln!(out, "max split R-hat: not computed");
        }
    }
    if let Some(note) = &d.ess_note {
        let _ = writeln!(out, "note: {note}");
    }
    match &d.label_switching {
        Some(w) => {
            let _ = writeln!(out, "WARNING: {w}");
        }
        None => {
            let _ = writeln!(out, "label switching across chains: not detected");
        }
    }
}

fn report_decision(out: &mut String, spec: &LossSpec, chosen: &ActionSummary, vi_only: &ActionSummary) {
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "loss: {}, eta = ({}), lambda = {}, delta = {}",
        spec.mode,
        join(spec.eta.parts().iter().map(|&x| fmt6(x))),
        fmt6(spec.lambda),
        fmt6(spec.delta)
    );
    for a in [chosen, vi_only] {
        match &a.sigma {
            Some(sigma) => {
                let _ = writeln!(
                    out,
                    "{} labels identified with sigma = ({})",
                    a.name,
                    join(sigma.iter().map(usize::to_string))
                );
            }
            None => {
                let _ = writeln!(out, "{} labels reported as searched (no identification)", a.name);
            }
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:>8} {:>14} {:>12} {:>12} {:>14}",
        "action", "lambda", "expected_loss", "expected_vi", "size_term", "group_sizes"
    );
    for a in [chosen, vi_only] {
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>14} {:>12} {:>12} {:>14}",
            a.name,
            fmt6(a.lambda),
            fmt6(a.expected_loss),
            fmt6(a.expected_vi),
            fmt6(a.size_term),
            a.group_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
        );
    }
}

fn write_truth(dir: &Path, survey: &Survey, truth: &SimTruth) -> CliResult<()> {
    let k = truth.z_true.k();
    let mut header = vec!["respondent".to_owned(), "true_cluster".into()];
    header.extend((1..=k).map(|c| format!("theta_{c}")));
    let z = truth.z_true.to_one_based();
    let rows: Vec<Vec<String>> = (0..z.len())
        .map(|i| {
            let mut row = vec![survey.respondents[i].clone(), z[i].to_string()];
            row.extend(truth.theta_true[i * k..(i + 1) * k].iter().map(|&x| fmt6(x)));
            row
        })
        .collect();
    write_csv(&dir.join("truth.csv"), &header, &rows)?;

    let layout = &truth.layout;
    let mut phi_rows = Vec::new();
    let mut beta_rows = Vec::new();
    for c in 0..k {
        for q in 0..layout.questions() {
            for v in 0..layout.alphabet()[q] {
                let at = layout.slice(c, q).start + v;
                let idx = vec![(c + 1).to_string(), (q + 1).to_string(), (v + 1).to_string()];
                let mut phi = idx.clone();
                phi.push(fmt6(truth.phi_true[at]));
                phi_rows.push(phi);
                let mut beta = idx;
                beta.push(fmt6(truth.phi_hyper[at]));
                beta_rows.push(beta);
            }
        }
    }
    write_csv(&dir.join("phi_true.csv"), &["cluster", "question", "option", "phi"], &phi_rows)?;
    write_csv(&dir.join("beta_prior.csv"), &["cluster", "question", "option", "concentration"], &beta_rows)
}

fn write_benchmark(dir: &Path, rows: &[BenchmarkRow], summary: &[VariantSummary]) -> CliResult<()> {
    let header =
        ["replicate", "seed", "variant", "accuracy", "vi_from_truth", "expected_loss", "group_sizes", "max_rhat"];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                r.seed.to_string(),
                r.variant.clone(),
                fmt6(r.accuracy),
                fmt6(r.vi_from_truth),
                fmt6(r.expected_loss),
                r.group_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                r.max_rhat.map_or_else(String::new, fmt6),
            ]
        })
        .collect();
    write_csv(&dir.join("benchmark.csv"), &header, &table)?;
    let table: Vec<Vec<String>> = summary
        .iter()
        .map(|s| vec![s.variant.clone(), fmt6(s.mean_accuracy), fmt6(s.mean_vi_from_truth), s.collapsed.to_string()])
        .collect();
    write_csv(
        &dir.join("benchmark_summary.csv"),
        &["variant", "mean_accuracy", "mean_vi_from_truth", "collapsed"],
        &table,
    )
}
