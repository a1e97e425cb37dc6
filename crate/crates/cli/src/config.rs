use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sizeclust_core::loss::{DEFAULT_DELTA, DEFAULT_LAMBDA};
use sizeclust_core::model::{DEFAULT_ALPHA, DEFAULT_BETA};
use sizeclust_core::{Composition, LossMode, LossSpec, OptimizerConfig, SamplerConfig, SimConfig};

use crate::error::{CliError, CliResult};

/// Which pipeline a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Fit,
    Sort,
    Simulate,
    Benchmark,
}

/// Everything one invocation needs, read from a TOML file and then
/// adjusted by command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Survey CSV; required by `fit` and `sort`.
    pub data: Option<PathBuf>,
    /// Number of mixture clusters `K`.
    pub clusters: Option<usize>,
    pub output: PathBuf,
    /// Master seed; when set it replaces every module seed.
    pub seed: Option<u64>,
    pub prior: PriorConfig,
    pub loss: LossConfig,
    pub sampler: SamplerConfig,
    pub optimizer: OptimizerConfig,
    pub simulate: SimConfig,
    pub benchmark: BenchmarkConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            clusters: None,
            output: PathBuf::from("sizeclust-out"),
            seed: None,
            prior: PriorConfig::default(),
            loss: LossConfig::default(),
            sampler: SamplerConfig::default(),
            optimizer: OptimizerConfig::default(),
            simulate: SimConfig::default(),
            benchmark: BenchmarkConfig::default(),
        }
    }
}

/// Dirichlet hyper-parameters for the mixture model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub alpha: AlphaSource,
    /// Value for every `beta` entry not listed in `beta_file`.
    pub beta: f64,
    /// Long-format CSV with columns `cluster,question,option,concentration`.
    pub beta_file: Option<PathBuf>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { alpha: AlphaSource::Scalar(DEFAULT_ALPHA), beta: DEFAULT_BETA, beta_file: None }
    }
}

/// A single value, one value per cluster, or a full `N x K` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSource {
    Scalar(f64),
    PerCluster(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl AlphaSource {
    /// Expands to the `N x K` row-major layout the sampler uses.
    pub fn expand(&self, n: usize, k: usize) -> CliResult<Vec<f64>> {
        match self {
            AlphaSource::Scalar(a) => Ok(vec![*a; n * k]),
            AlphaSource::PerCluster(row) => {
                if row.len() != k {
                    return Err(CliError::Config(format!(
                        "prior.alpha has {} entries but there are {k} clusters",
                        row.len()
                    )));
                }
                Ok(row.iter().copied().cycle().take(n * k).collect())
            }
            AlphaSource::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != k) {
                    return Err(CliError::Config(format!("prior.alpha matrix must be {n} rows of {k} values")));
                }
                Ok(rows.concat())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub mode: LossMode,
    /// Target composition; a uniform target over `K` when omitted.
    pub eta: Option<Vec<f64>>,
    pub lambda: f64,
    pub delta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { mode: LossMode::Sensitive, eta: None, lambda: DEFAULT_LAMBDA, delta: DEFAULT_DELTA }
    }
}

impl LossConfig {
    pub fn to_spec(&self, k: usize) -> CliResult<LossSpec> {
        let eta = match &self.eta {
            Some(parts) => Composition::new(parts.clone()),
            None => Composition::uniform(k),
        }
        .map_err(|e| CliError::Config(format!("loss.eta: {e}")))?;
        LossSpec::new(self.mode, eta, self.lambda, self.delta, k).map_err(|e| CliError::Config(format!("loss: {e}")))
    }
}

/// Target sizes used by every benchmark replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaChoice {
    /// `"uniform"` or `"truth"` (the planted group sizes).
    Named(String),
    Explicit(Vec<f64>),
}

/// Replicated simulation study settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub replicates: usize,
    /// Symmetric `alpha` of the fitted model.
    pub alpha: f64,
    /// Upper bound of the uniform noise added to the generating `beta`.
    pub prior_noise: f64,
    pub eta: EtaChoice,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self { replicates: 20, alpha: DEFAULT_ALPHA, prior_noise: 0.0, eta: EtaChoice::Named("truth".into()) }
    }
}

impl BenchmarkConfig {
    pub fn eta_for(&self, group_sizes: &[usize]) -> CliResult<Composition> {
        let parts = match &self.eta {
            EtaChoice::Named(name) if name == "truth" => group_sizes.iter().map(|&g| g as f64).collect(),
            EtaChoice::Named(name) if name == "uniform" => vec![1.0; group_sizes.len()],
            EtaChoice::Named(other) => {
                return Err(CliError::Config(format!(
                    "benchmark.eta must be \"truth\", \"uniform\" or a list, got \"{other}\""
                )))
            }
            EtaChoice::Explicit(parts) => parts.clone(),
        };
        if parts.len() != group_sizes.len() {
            return Err(CliError::Config(format!(
                "benchmark.eta has {} parts for {} simulated clusters",
                parts.len(),
                group_sizes.len()
            )));
        }
        Composition::new(parts).map_err(|e| CliError::Config(format!("benchmark.eta: {e}")))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub eta: Option<Vec<f64>>,
    pub mode: Option<LossMode>,
    pub output: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub clusters: Option<usize>,
}

/// Mixes a master seed with a stream tag so sibling seeds are unrelated.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut x = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RunConfig {
    /// Reads a TOML file; relative paths inside it resolve against the
    /// file's own directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.data.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.prior.beta_file.as_mut() {
            rebase(p);
        }
        rebase(&mut cfg.output);
        Ok(cfg)
    }

    /// Applies overrides, then spreads the master seed over every module.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(l) = o.lambda {
            self.loss.lambda = l;
        }
        if let Some(d) = o.delta {
            self.loss.delta = d;
        }
        if let Some(eta) = &o.eta {
            self.loss.eta = Some(eta.clone());
        }
        if let Some(m) = o.mode {
            self.loss.mode = m;
        }
        if let Some(out) = &o.output {
            self.output = out.clone();
        }
        if let Some(d) = &o.data {
            self.data = Some(d.clone());
        }
        if let Some(k) = o.clusters {
            self.clusters = Some(k);
        }
        if let Some(s) = self.seed {
            self.sampler.seed = derive_seed(s, 0);
            self.optimizer.seed = derive_seed(s, 1);
            self.simulate.seed = derive_seed(s, 2);
        }
    }

    /// Checks the fields `mode` depends on.
    pub fn validate(&self, mode: RunMode) -> CliResult<()> {
        let cfg_err = |e: sizeclust_core::Error| CliError::Config(e.to_string());
        self.sampler.validate().map_err(cfg_err)?;
        self.optimizer.validate().map_err(cfg_err)?;
        match mode {
            RunMode::Fit | RunMode::Sort => {
                let data =
                    self.data.as_ref().ok_or_else(|| CliError::Config("`data` must name a survey CSV".into()))?;
                if !data.is_file() {
                    return Err(CliError::Config(format!("data file {} does not exist", data.display())));
                }
                if let Some(beta) = &self.prior.beta_file {
                    if !beta.is_file() {
                        return Err(CliError::Config(format!("beta file {} does not exist", beta.display())));
                    }
                }
                let k = self.k()?;
                if mode == RunMode::Sort {
                    self.loss.to_spec(k)?;
                }
            }
            RunMode::Simulate | RunMode::Benchmark => {
                self.simulate.validate().map_err(cfg_err)?;
                if mode == RunMode::Benchmark {
                    if self.benchmark.replicates == 0 {
                        return Err(CliError::Config("benchmark.replicates must be at least 1".into()));
                    }
                    self.benchmark.eta_for(&self.simulate.group_sizes)?;
                }
            }
        }
        Ok(())
    }

    /// `K`, which must be at least 2.
    pub fn k(&self) -> CliResult<usize> {
        match self.clusters {
            Some(k) if k >= 2 => Ok(k),
            Some(k) => Err(CliError::Config(format!("clusters must be at least 2, got {k}"))),
            None => Err(CliError::Config("`clusters` (K) must be set".into())),
        }
    }
}
