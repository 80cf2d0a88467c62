//! Monte Carlo study of the spillover coefficient.
//!
//! Samples are drawn column by column in the model's dependency order. In
//! binary-threshold mode exposures carry no disturbance of their own:
//! `T1 = 1{τT2 + χU > 0.5}` and `T2 = 1{φT1 + ωY1 + γU > 0.2}` (strict
//! comparisons). Outcomes are always linear in their parents plus a
//! disturbance. In linear-Gaussian mode exposures are linear too, with their
//! own unit-variance disturbance.
//!
//! Every variable of every replicate draws from its own counter-based stream
//! keyed by `(master_seed, replicate, variable)`, so replicates can be
//! generated in any order or in parallel with identical results.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::{self, CovarianceType, PairDataset, PairRow, INTERCEPT};
use crate::graph::{PathModel, VariableKind};
use crate::presets::{Param, Preset, StructuralParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureMode {
    #[default]
    BinaryThreshold,
    LinearGaussian,
}

impl ExposureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExposureMode::BinaryThreshold => "binary-threshold",
            ExposureMode::LinearGaussian => "linear-gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    /// One of the nine topologies, parameterized by [`SimulationConfig::params`].
    Preset(Preset),
    /// A user-supplied model; its own coefficients are used.
    Custom { name: String, model: PathModel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub model: ModelSource,
    pub params: StructuralParams,
    pub n_obs: usize,
    pub n_reps: usize,
    pub master_seed: u64,
    pub exposure_mode: ExposureMode,
    /// Cutoffs for sibling 1's and sibling 2's exposure in binary-threshold mode.
    pub thresholds: (f64, f64),
    pub confidence_level: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            model: ModelSource::Preset(Preset::Fig1A),
            params: StructuralParams::default(),
            n_obs: 5000,
            n_reps: 1000,
            master_seed: 0,
            exposure_mode: ExposureMode::BinaryThreshold,
            thresholds: (0.5, 0.2),
            confidence_level: 0.95,
        }
    }
}

impl SimulationConfig {
    /// `preset` with its simulation-study parameterization and default sizes.
    pub fn for_preset(preset: Preset) -> Self {
        Self {
            model: ModelSource::Preset(preset),
            params: StructuralParams::figure4(preset),
            ..Self::default()
        }
    }

    pub fn with_sizes(mut self, n_obs: usize, n_reps: usize) -> Self {
        self.n_obs = n_obs;
        self.n_reps = n_reps;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_mode(mut self, mode: ExposureMode) -> Self {
        self.exposure_mode = mode;
        self
    }

    pub fn model_name(&self) -> String {
        match &self.model {
            ModelSource::Preset(p) => p.name().to_string(),
            ModelSource::Custom { name, .. } => name.clone(),
        }
    }
}

/// Plain column storage for one simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleColumns {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl SampleColumns {
    pub fn len(&self) -> usize {
        self.t1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t1.is_empty()
    }

    /// Family ids are the 1-based row numbers.
    pub fn into_dataset(self) -> Result<PairDataset> {
        let rows = (0..self.len())
            .map(|i| {
                PairRow::new(
                    alloc::format!("{}", i + 1),
                    self.t1[i],
                    self.t2[i],
                    self.y1[i],
                    self.y2[i],
                )
            })
            .collect();
        PairDataset::new(Vec::new(), rows)
    }
}

/// Estimates from one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub sc: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub model: String,
    pub exposure_mode: ExposureMode,
    pub n_obs: usize,
    pub n_reps: usize,
    pub master_seed: u64,
    /// The spillover effect θ the intervals are scored against.
    pub theta: f64,
    pub mean_sc: f64,
    pub empirical_sd: f64,
    /// `empirical_sd / sqrt(n_reps)`.
    pub mc_se: f64,
    /// 2.5th and 97.5th percentiles of the replicate estimates.
    pub percentile_interval: (f64, f64),
    /// Average of the per-replicate confidence bounds.
    pub mean_ci: (f64, f64),
    /// Share of replicate intervals containing θ.
    pub coverage: f64,
    pub mean_reported_se: f64,
    pub mean_b1: f64,
    pub sd_b1: f64,
    pub mean_b2: f64,
    pub sd_b2: f64,
}

struct Node {
    var: usize,
    parents: Vec<(usize, f64)>,
    noise_sd: f64,
    tag: u64,
    threshold: Option<f64>,
}

/// A validated configuration ready to generate replicates.
pub struct Simulation {
    config: SimulationConfig,
    model: PathModel,
    nodes: Vec<Node>,
    slots: [usize; 4],
    theta: f64,
}

impl Simulation {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        if config.n_reps < 2 {
            return Err(Error::Config("at least two replicates are required".into()));
        }
        if config.n_obs < 4 {
            return Err(Error::Config("at least four observations are required".into()));
        }
        if !(config.confidence_level > 0.0 && config.confidence_level < 1.0) {
            return Err(Error::Config("confidence level must lie in (0, 1)".into()));
        }
        let model = match &config.model {
            ModelSource::Preset(preset) => {
                config
                    .params
                    .check_simultaneity()
                    .map_err(|e| Error::Config(e.to_string()))?;
                if !Param::ALL.iter().all(|&q| config.params.get(q).is_finite()) {
                    return Err(Error::Config("structural parameters must be finite".into()));
                }
                preset.model(&config.params)
            }
            ModelSource::Custom { model, .. } => model.clone(),
        };
        let vars = model.variables();
        let mut slots = [0usize; 4];
        for (slot, name) in slots.iter_mut().zip(["T1", "T2", "Y1", "Y2"]) {
            *slot = model
                .index_of(name)
                .map_err(|_| Error::Config(alloc::format!("model has no variable {name}")))?;
            if vars[*slot].kind == VariableKind::Derived {
                return Err(Error::Config(alloc::format!("{name} must be structural")));
            }
        }
        let nodes = model
            .topo_indices()
            .iter()
            .map(|&var| {
                let v = &vars[var];
                let parents = model
                    .links()
                    .iter()
                    .filter(|l| !l.derived && l.to == var)
                    .map(|l| (l.from, l.coefficient))
                    .collect();
                let binary = config.exposure_mode == ExposureMode::BinaryThreshold
                    && v.kind == VariableKind::Exposure;
                let threshold = binary.then(|| match v.name.as_str() {
                    "T1" => config.thresholds.0,
                    "T2" => config.thresholds.1,
                    _ => 0.0,
                });
                Node {
                    var,
                    parents,
                    noise_sd: if binary { 0.0 } else { libm::sqrt(v.noise_variance) },
                    tag: rng::tag_for(&v.name),
                    threshold,
                }
            })
            .collect();
        let theta = model.coefficient("T1", "Y2");
        Ok(Self {
            config: config.clone(),
            model,
            nodes,
            slots,
            theta,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn model(&self) -> &PathModel {
        &self.model
    }

    /// The spillover effect θ on `T1 -> Y2`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sample_columns(&self, replicate: u64) -> SampleColumns {
        let n = self.config.n_obs;
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); self.model.variables().len()];
        for node in &self.nodes {
            let mut values = vec![0.0; n];
            for &(parent, coefficient) in &node.parents {
                for (v, p) in values.iter_mut().zip(&columns[parent]) {
                    *v += coefficient * p;
                }
            }
            if node.noise_sd > 0.0 {
                let mut stream = rng::stream(self.config.master_seed, replicate, node.tag);
                for v in &mut values {
                    *v += node.noise_sd * rng::standard_normal(&mut stream);
                }
            }
            if let Some(cut) = node.threshold {
                for v in &mut values {
                    *v = if *v > cut { 1.0 } else { 0.0 };
                }
            }
            columns[node.var] = values;
        }
        let [t1, t2, y1, y2] = self.slots;
        SampleColumns {
            t1: core::mem::take(&mut columns[t1]),
            t2: core::mem::take(&mut columns[t2]),
            y1: core::mem::take(&mut columns[y1]),
            y2: core::mem::take(&mut columns[y2]),
        }
    }

    pub fn sample(&self, replicate: u64) -> Result<PairDataset> {
        self.sample_columns(replicate).into_dataset()
    }

    /// Simulates replicate `replicate` and estimates the spillover coefficient on it.
    pub fn replicate(&self, replicate: u64) -> Result<ReplicateOutcome> {
        let s = self.sample_columns(replicate);
        let n = s.len();
        let design = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => s.t1[i],
            _ => s.t2[i],
        });
        let d = DVector::from_fn(n, |i, _| s.y2[i] - s.y1[i]);
        let names = vec![INTERCEPT.to_string(), "T1".to_string(), "T2".to_string()];
        let report = estimator::ols(design, &d, names, CovarianceType::Classical)
            .and_then(|fit| estimator::spillover_from_fit(fit, false, self.config.confidence_level))
            .map_err(|e| Error::Replicate {
                replicate,
                master_seed: self.config.master_seed,
                source: alloc::boxed::Box::new(e),
            })?;
        Ok(ReplicateOutcome {
            replicate,
            sc: report.sc(),
            se: report.se(),
            ci_low: report.spillover.ci_low,
            ci_high: report.spillover.ci_high,
            b1: report.b1.estimate,
            b2: report.b2.estimate,
        })
    }

    /// Aggregates outcomes, which must be in replicate order for bitwise reproducibility.
    pub fn summarize(&self, outcomes: &[ReplicateOutcome]) -> SimulationSummary {
        summarize(&self.config, self.theta, outcomes)
    }
}

fn mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn sample_sd(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = mean(xs.clone());
    let (ss, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + (x - m) * (x - m), n + 1));
    libm::sqrt(ss / (n as f64 - 1.0))
}

/// Linear-interpolation percentile of sorted data (`q` in `[0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(config: &SimulationConfig, theta: f64, outcomes: &[ReplicateOutcome]) -> SimulationSummary {
    let sc = || outcomes.iter().map(|o| o.sc);
    let mut sorted: Vec<f64> = sc().collect();
    sorted.sort_by(f64::total_cmp);
    let empirical_sd = sample_sd(sc());
    let covered = outcomes
        .iter()
        .filter(|o| o.ci_low <= theta && theta <= o.ci_high)
        .count();
    SimulationSummary {
        model: config.model_name(),
        exposure_mode: config.exposure_mode,
        n_obs: config.n_obs,
        n_reps: outcomes.len(),
        master_seed: config.master_seed,
        theta,
        mean_sc: mean(sc()),
        empirical_sd,
        mc_se: empirical_sd / libm::sqrt(outcomes.len() as f64),
        percentile_interval: (percentile(&sorted, 0.025), percentile(&sorted, 0.975)),
        mean_ci: (
            mean(outcomes.iter().map(|o| o.ci_low)),
            mean(outcomes.iter().map(|o| o.ci_high)),
        ),
        coverage: covered as f64 / outcomes.len() as f64,
        mean_reported_se: mean(outcomes.iter().map(|o| o.se)),
        mean_b1: mean(outcomes.iter().map(|o| o.b1)),
        sd_b1: sample_sd(outcomes.iter().map(|o| o.b1)),
        mean_b2: mean(outcomes.iter().map(|o| o.b2)),
        sd_b2: sample_sd(outcomes.iter().map(|o| o.b2)),
    }
}

/// Draws replicate `replicate_index` of `config` as a dataset.
pub fn simulate_sample(config: &SimulationConfig, replicate_index: u64) -> Result<PairDataset> {
    Simulation::new(config)?.sample(replicate_index)
}

/// Runs every replicate sequentially and summarizes them.
pub fn monte_carlo(config: &SimulationConfig) -> Result<SimulationSummary> {
    let sim = Simulation::new(config)?;
    let outcomes = (0..config.n_reps as u64)
        .map(|r| sim.replicate(r))
        .collect::<Result<Vec<_>>>()?;
    Ok(sim.summarize(&outcomes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure4Row {
    pub preset: Preset,
    pub summary: SimulationSummary,
}

/// Configurations for the nine-model study, in display order.
pub fn figure4_configs(n_obs: usize, n_reps: usize, master_seed: u64) -> Vec<SimulationConfig> {
    Preset::ALL
        .iter()
        .map(|&p| {
            SimulationConfig::for_preset(p)
                .with_sizes(n_obs, n_reps)
                .with_seed(master_seed)
        })
        .collect()
}

/// Sequential nine-model study.
pub fn figure4_table(n_obs: usize, n_reps: usize, master_seed: u64) -> Result<Vec<Figure4Row>> {
    figure4_configs(n_obs, n_reps, master_seed)
        .iter()
        .zip(Preset::ALL)
        .map(|(config, preset)| {
            Ok(Figure4Row {
                preset,
                summary: monte_carlo(config)?,
            })
        })
        .collect()
}
