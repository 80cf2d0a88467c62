//! Flat, serializable records for every report the CLI emits.

use serde::{Deserialize, Serialize};
use spillover_core::analyzer::{BoundStatement, IdentificationVerdict, MediationNote};
use spillover_core::estimator::{linear_contrast, Contrast, CovarianceType, SpilloverReport};
use spillover_core::graph::Path;
use spillover_core::simulator::SimulationSummary;

use crate::error::Result;

pub fn to_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        writer.serialize(record)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| crate::error::LabError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

/// One Monte Carlo summary as a flat row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub model: String,
    pub exposure_mode: String,
    pub n_obs: usize,
    pub n_reps: usize,
    pub master_seed: u64,
    pub theta: f64,
    pub mean_sc: f64,
    pub empirical_sd: f64,
    pub mc_se: f64,
    pub percentile_low: f64,
    pub percentile_high: f64,
    pub mean_ci_low: f64,
    pub mean_ci_high: f64,
    pub coverage: f64,
    pub mean_reported_se: f64,
    pub mean_b1: f64,
    pub sd_b1: f64,
    pub mean_b2: f64,
    pub sd_b2: f64,
}

impl From<&SimulationSummary> for SummaryRecord {
    fn from(s: &SimulationSummary) -> Self {
        Self {
            model: s.model.clone(),
            exposure_mode: s.exposure_mode.as_str().to_string(),
            n_obs: s.n_obs,
            n_reps: s.n_reps,
            master_seed: s.master_seed,
            theta: s.theta,
            mean_sc: s.mean_sc,
            empirical_sd: s.empirical_sd,
            mc_se: s.mc_se,
            percentile_low: s.percentile_interval.0,
            percentile_high: s.percentile_interval.1,
            mean_ci_low: s.mean_ci.0,
            mean_ci_high: s.mean_ci.1,
            coverage: s.coverage,
            mean_reported_se: s.mean_reported_se,
            mean_b1: s.mean_b1,
            sd_b1: s.sd_b1,
            mean_b2: s.mean_b2,
            sd_b2: s.sd_b2,
        }
    }
}

pub fn summary_records(summaries: &[SimulationSummary]) -> Vec<SummaryRecord> {
    summaries.iter().map(SummaryRecord::from).collect()
}

/// One line of the estimate table: `estimate (ci_low, ci_high)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    /// `T2`, `T1`, `SC` or a covariate column name.
    pub term: String,
    pub label: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-decimal rendering in the usual table style.
    pub formatted: String,
}

impl EstimateRow {
    fn new(term: &str, label: &str, c: &Contrast) -> Self {
        Self {
            term: term.to_string(),
            label: label.to_string(),
            estimate: c.estimate,
            se: c.se,
            ci_low: c.ci_low,
            ci_high: c.ci_high,
            formatted: format!("{:.2} ({:.2}, {:.2})", c.estimate, c.ci_low, c.ci_high),
        }
    }
}

/// The gain-score regression laid out like a published results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub dropped_rows: usize,
    pub adjusted: bool,
    pub covariance: String,
    pub confidence_level: f64,
    pub df_residual: usize,
    /// Older sibling (`b2`), younger sibling (`b1`), spillover coefficient.
    pub rows: Vec<EstimateRow>,
    /// Covariate coefficients of an adjusted fit.
    pub covariates: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn new(report: &SpilloverReport, dropped_rows: usize) -> Result<Self> {
        let fit = &report.fit;
        let level = report.confidence_level();
        let covariates = fit
            .coefficient_names
            .iter()
            .filter(|name| name.starts_with("cov_"))
            .map(|name| {
                let c = linear_contrast(fit, &fit.selector(&[name.as_str()])?, level)?;
                Ok(EstimateRow::new(name, name, &c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: report.n,
            dropped_rows,
            adjusted: report.adjusted,
            covariance: match fit.covariance_type {
                CovarianceType::Classical => "classical",
                CovarianceType::Robust => "robust-hc1",
            }
            .to_string(),
            confidence_level: level,
            df_residual: fit.df_residual,
            rows: vec![
                EstimateRow::new("T2", "Older sibling", &report.b2),
                EstimateRow::new("T1", "Younger sibling", &report.b1),
                EstimateRow::new("SC", "Spillover coefficient", &report.spillover),
            ],
            covariates,
        })
    }

    pub fn row(&self, term: &str) -> Option<&EstimateRow> {
        self.rows.iter().chain(&self.covariates).find(|r| r.term == term)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::LabError::Json(e.to_string()))
    }

    /// Table rows followed by covariate rows, each tagged with the fit metadata.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            term: &'a str,
            label: &'a str,
            estimate: f64,
            se: f64,
            ci_low: f64,
            ci_high: f64,
            formatted: &'a str,
            n: usize,
            adjusted: bool,
            confidence_level: f64,
        }
        let lines: Vec<Line> = self
            .rows
            .iter()
            .chain(&self.covariates)
            .map(|row| Line {
                term: &row.term,
                label: &row.label,
                estimate: row.estimate,
                se: row.se,
                ci_low: row.ci_low,
                ci_high: row.ci_high,
                formatted: &row.formatted,
                n: self.n,
                adjusted: self.adjusted,
                confidence_level: self.confidence_level,
            })
            .collect();
        to_csv(&lines)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path: String,
    pub status: String,
    pub causal: bool,
    pub colliders: String,
    pub symbolic_product: String,
    pub coefficient_product: f64,
}

impl From<&Path> for PathRecord {
    fn from(p: &Path) -> Self {
        Self {
            path: p.to_string(),
            status: p.status.as_str().to_string(),
            causal: p.causal,
            colliders: p.colliders.join(";"),
            symbolic_product: p.symbolic_product(),
            coefficient_product: p.coefficient_product,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatedRecord {
    pub path: String,
    pub symbolic_product: String,
    pub product: f64,
}

/// Everything `identify` reports about one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub model: String,
    pub class: String,
    pub population_sc: f64,
    pub theta: f64,
    pub draws: usize,
    pub seed: u64,
    pub max_abs_sc_minus_theta: f64,
    pub max_abs_sc_minus_theta_minus_kappa: Option<f64>,
    pub biased_share: f64,
    pub kappa_sign: String,
    pub bound_sc: f64,
    pub conclusions: Vec<String>,
    pub bound: String,
    pub mediated_paths: Vec<MediatedRecord>,
    pub note: Option<String>,
}

impl IdentifyReport {
    pub fn new(
        model: &str,
        verdict: &IdentificationVerdict,
        bound: &BoundStatement,
        note: Option<&MediationNote>,
    ) -> Self {
        Self {
            model: model.to_string(),
            class: verdict.class.as_str().to_string(),
            population_sc: verdict.population_sc,
            theta: verdict.theta_true,
            draws: verdict.evidence.draws,
            seed: verdict.evidence.seed,
            max_abs_sc_minus_theta: verdict.evidence.max_abs_sc_minus_theta,
            max_abs_sc_minus_theta_minus_kappa: verdict.evidence.max_abs_sc_minus_theta_minus_kappa,
            biased_share: verdict.evidence.biased_share,
            kappa_sign: bound.assumption.as_str().to_string(),
            bound_sc: bound.sc_value,
            conclusions: bound.conclusions.iter().map(|c| c.as_str().to_string()).collect(),
            bound: bound.describe(),
            mediated_paths: note
                .map(|n| {
                    n.paths
                        .iter()
                        .map(|p| MediatedRecord {
                            path: p.to_string(),
                            symbolic_product: p.symbolic_product(),
                            product: p.product,
                        })
                        .collect()
                })
                .unwrap_or_default(),
            note: note.map(MediationNote::message),
        }
    }

    /// Single CSV row; list-valued fields are joined with `;`.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Flat<'a> {
            model: &'a str,
            class: &'a str,
            population_sc: f64,
            theta: f64,
            draws: usize,
            seed: u64,
            max_abs_sc_minus_theta: f64,
            max_abs_sc_minus_theta_minus_kappa: Option<f64>,
            biased_share: f64,
            kappa_sign: &'a str,
            bound_sc: f64,
            conclusions: String,
            bound: &'a str,
            mediated_paths: String,
        }
        to_csv(&[Flat {
            model: &self.model,
            class: &self.class,
            population_sc: self.population_sc,
            theta: self.theta,
            draws: self.draws,
            seed: self.seed,
            max_abs_sc_minus_theta: self.max_abs_sc_minus_theta,
            max_abs_sc_minus_theta_minus_kappa: self.max_abs_sc_minus_theta_minus_kappa,
            biased_share: self.biased_share,
            kappa_sign: &self.kappa_sign,
            bound_sc: self.bound_sc,
            conclusions: self.conclusions.join(";"),
            bound: &self.bound,
            mediated_paths: self
                .mediated_paths
                .iter()
                .map(|m| format!("{} ({})", m.path, m.symbolic_product))
                .collect::<Vec<_>>()
                .join(";"),
        }])
    }
}
