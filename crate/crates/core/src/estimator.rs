//! Gain-score regression on sibling-pair data.
//!
//! Each row of a [`PairDataset`] is one sibling pair. The gain score
//! `D = y2 - y1` is regressed by OLS on an intercept, both exposures and,
//! optionally, the pair's covariates. The spillover coefficient is the
//! linear contrast `b1 + b2` with a t-based confidence interval.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::student_t_quantile;

/// Relative size below which an R diagonal entry signals rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub const INTERCEPT: &str = "_cons";

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub family_id: String,
    /// Exposure of sibling 1.
    pub t1: f64,
    /// Exposure of sibling 2.
    pub t2: f64,
    pub y1: f64,
    pub y2: f64,
    /// Pair-level covariates (attached to sibling 2's record).
    pub covariates: Vec<f64>,
}

impl PairRow {
    pub fn new(family_id: impl Into<String>, t1: f64, t2: f64, y1: f64, y2: f64) -> Self {
        Self {
            family_id: family_id.into(),
            t1,
            t2,
            y1,
            y2,
            covariates: Vec::new(),
        }
    }

    pub fn with_covariates(mut self, covariates: Vec<f64>) -> Self {
        self.covariates = covariates;
        self
    }
}

/// Immutable collection of sibling pairs, one row per family.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    covariate_names: Vec<String>,
    rows: Vec<PairRow>,
}

impl PairDataset {
    pub fn new(covariate_names: Vec<String>, rows: Vec<PairRow>) -> Result<Self> {
        let mut ids: Vec<&str> = rows.iter().map(|r| r.family_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidData(alloc::format!(
                "family_id {:?} appears more than once",
                w[0]
            )));
        }
        for row in &rows {
            if row.covariates.len() != covariate_names.len() {
                return Err(Error::InvalidData(alloc::format!(
                    "family {} has {} covariates, expected {}",
                    row.family_id,
                    row.covariates.len(),
                    covariate_names.len()
                )));
            }
            let finite = [row.t1, row.t2, row.y1, row.y2]
                .iter()
                .chain(&row.covariates)
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidData(alloc::format!(
                    "family {} has a non-finite value",
                    row.family_id
                )));
            }
        }
        Ok(Self {
            covariate_names,
            rows,
        })
    }

    pub fn rows(&self) -> &[PairRow] {
        &self.rows
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// `y2 - y1` for every pair.
pub fn gain_scores(data: &PairDataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(data.rows.iter().map(|r| r.y2 - r.y1).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceType {
    /// `s² (XᵀX)⁻¹`.
    #[default]
    Classical,
    /// HC1 sandwich with the `n / (n - p)` small-sample factor.
    Robust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub coefficient_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub coef_covariance: DMatrix<f64>,
    pub residual_variance: f64,
    pub df_residual: usize,
    pub n: usize,
    pub covariance_type: CovarianceType,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.position(name)
            .map(|i| libm::sqrt(self.coef_covariance[(i, i)].max(0.0)))
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.coefficient_names.iter().position(|n| n == name)
    }

    /// Weight vector selecting the named coefficients with unit weight.
    pub fn selector(&self, names: &[&str]) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.coefficients.len()];
        for name in names {
            let i = self
                .position(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            w[i] = 1.0;
        }
        Ok(w)
    }
}

/// Ordinary least squares through a Householder QR of the design matrix.
pub fn ols(
    design: DMatrix<f64>,
    response: &DVector<f64>,
    names: Vec<String>,
    covariance_type: CovarianceType,
) -> Result<RegressionFit> {
    let (n, p) = design.shape();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: names.len(),
        });
    }
    if n <= p {
        return Err(Error::InsufficientData { n, required: p });
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|i| libm::fabs(r[(i, i)])).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    if let Some(i) = diag
        .iter()
        .position(|&d| !(d > RANK_TOLERANCE * largest) || !d.is_finite())
    {
        return Err(Error::RankDeficiency {
            column: names[i].clone(),
        });
    }

    let mut qty = response.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, p).into_owned())
        .ok_or_else(|| Error::RankDeficiency {
            column: names[p - 1].clone(),
        })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficiency {
            column: names[p - 1].clone(),
        })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let residuals = response - &design * &beta;
    let df = n - p;
    let rss = residuals.dot(&residuals);
    let residual_variance = rss / df as f64;

    let mut cov = match covariance_type {
        CovarianceType::Classical => xtx_inv * residual_variance,
        CovarianceType::Robust => {
            let mut meat = DMatrix::<f64>::zeros(p, p);
            for (i, e) in residuals.iter().enumerate() {
                let x = design.row(i);
                meat += x.transpose() * x * (e * e);
            }
            &xtx_inv * meat * &xtx_inv * (n as f64 / df as f64)
        }
    };
    for i in 0..p {
        for j in 0..i {
            let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = avg;
            cov[(j, i)] = avg;
        }
    }

    Ok(RegressionFit {
        coefficient_names: names,
        coefficients: beta.iter().copied().collect(),
        coef_covariance: cov,
        residual_variance,
        df_residual: df,
        n,
        covariance_type,
    })
}

/// Regresses `D = y2 - y1` on `(1, t1, t2[, covariates])`.
pub fn fit_gain_score(data: &PairDataset, adjust_covariates: bool) -> Result<RegressionFit> {
    fit_gain_score_with(data, adjust_covariates, CovarianceType::Classical)
}

pub fn fit_gain_score_with(
    data: &PairDataset,
    adjust_covariates: bool,
    covariance_type: CovarianceType,
) -> Result<RegressionFit> {
    let d = gain_scores(data)?;
    let extra = if adjust_covariates {
        data.covariate_names.len()
    } else {
        0
    };
    let p = 3 + extra;
    let design = DMatrix::from_fn(data.len(), p, |i, j| {
        let row = &data.rows[i];
        match j {
            0 => 1.0,
            1 => row.t1,
            2 => row.t2,
            k => row.covariates[k - 3],
        }
    });
    let mut names = vec![INTERCEPT.to_string(), "T1".to_string(), "T2".to_string()];
    names.extend(data.covariate_names.iter().take(extra).cloned());
    ols(design, &DVector::from_vec(d), names, covariance_type)
}

/// `wᵀβ` with its standard error and t-based confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contrast {
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
    pub df: usize,
}

pub fn linear_contrast(fit: &RegressionFit, weights: &[f64], confidence_level: f64) -> Result<Contrast> {
    let p = fit.coefficients.len();
    if weights.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: weights.len(),
        });
    }
    if !(confidence_level > 0.0 && confidence_level < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "confidence level {confidence_level} outside (0, 1)"
        )));
    }
    let estimate: f64 = weights
        .iter()
        .zip(&fit.coefficients)
        .map(|(w, b)| w * b)
        .sum();
    let w = DVector::from_column_slice(weights);
    let variance = (w.transpose() * &fit.coef_covariance * &w)[(0, 0)];
    let se = libm::sqrt(variance.max(0.0));
    let critical = student_t_quantile(0.5 * (1.0 + confidence_level), fit.df_residual as f64)?;
    Ok(Contrast {
        estimate,
        se,
        ci_low: estimate - critical * se,
        ci_high: estimate + critical * se,
        confidence_level,
        df: fit.df_residual,
    })
}

/// Spillover coefficient together with its two components.
#[derive(Debug, Clone, PartialEq)]
pub struct SpilloverReport {
    /// `b1 + b2`.
    pub spillover: Contrast,
    /// Coefficient on sibling 1's exposure.
    pub b1: Contrast,
    /// Coefficient on sibling 2's exposure.
    pub b2: Contrast,
    pub adjusted: bool,
    pub n: usize,
    pub fit: RegressionFit,
}

impl SpilloverReport {
    pub fn sc(&self) -> f64 {
        self.spillover.estimate
    }

    pub fn se(&self) -> f64 {
        self.spillover.se
    }

    pub fn confidence_level(&self) -> f64 {
        self.spillover.confidence_level
    }
}

pub fn spillover_estimate(
    data: &PairDataset,
    adjust_covariates: bool,
    confidence_level: f64,
) -> Result<SpilloverReport> {
    let fit = fit_gain_score(data, adjust_covariates)?;
    spillover_from_fit(fit, adjust_covariates, confidence_level)
}

/// Builds the report from an existing fit whose coefficients include `T1` and `T2`.
pub fn spillover_from_fit(
    fit: RegressionFit,
    adjusted: bool,
    confidence_level: f64,
) -> Result<SpilloverReport> {
    let spillover = linear_contrast(&fit, &fit.selector(&["T1", "T2"])?, confidence_level)?;
    let b1 = linear_contrast(&fit, &fit.selector(&["T1"])?, confidence_level)?;
    let b2 = linear_contrast(&fit, &fit.selector(&["T2"])?, confidence_level)?;
    Ok(SpilloverReport {
        spillover,
        b1,
        b2,
        adjusted,
        n: fit.n,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn dataset(rows: &[(f64, f64, f64, f64)]) -> PairDataset {
        PairDataset::new(
            Vec::new(),
            rows.iter()
                .enumerate()
                .map(|(i, &(t1, t2, y1, y2))| PairRow::new(format!("{i}"), t1, t2, y1, y2))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gain_score_is_y2_minus_y1() {
        let d = dataset(&[(0.0, 0.0, 3.0, 5.0), (1.0, 0.0, 2.0, 2.0)]);
        assert_eq!(gain_scores(&d).unwrap(), [2.0, 0.0]);
        let empty = PairDataset::new(Vec::new(), Vec::new()).unwrap();
        assert_eq!(gain_scores(&empty), Err(Error::EmptyData));
    }

    #[test]
    fn four_point_exact_fit() {
        // D values 0, -0.5, 1, 0.5 at (t1, t2) = (0,0), (1,0), (0,1), (1,1).
        let d = dataset(&[
            (0.0, 0.0, 0.0, 0.0),
            (1.0, 0.0, 0.5, 0.0),
            (0.0, 1.0, 0.0, 1.0),
            (1.0, 1.0, 0.0, 0.5),
        ]);
        let fit = fit_gain_score(&d, false).unwrap();
        assert!((fit.coefficient("T1").unwrap() + 0.5).abs() < 1e-12);
        assert!((fit.coefficient("T2").unwrap() - 1.0).abs() < 1e-12);
        assert!(fit.coefficient(INTERCEPT).unwrap().abs() < 1e-12);
        assert!(fit.residual_variance < 1e-24);
        assert_eq!(fit.df_residual, 1);
    }

    #[test]
    fn concordant_exposures_are_rank_deficient() {
        let d = dataset(&[
            (0.0, 0.0, 1.0, 2.0),
            (1.0, 1.0, 0.0, 1.5),
            (1.0, 1.0, 2.0, 1.0),
            (0.0, 0.0, 0.3, 0.1),
            (1.0, 1.0, 0.7, 0.9),
        ]);
        assert_eq!(
            fit_gain_score(&d, false),
            Err(Error::RankDeficiency { column: "T2".into() })
        );
    }

    #[test]
    fn all_zero_exposures_are_rank_deficient() {
        let d = dataset(&[
            (0.0, 0.0, 1.0, 2.0),
            (0.0, 0.0, 0.0, 1.5),
            (0.0, 0.0, 2.0, 1.0),
            (0.0, 0.0, 0.3, 0.1),
        ]);
        assert!(matches!(
            spillover_estimate(&d, false, 0.95),
            Err(Error::RankDeficiency { .. })
        ));
    }

    #[test]
    fn too_few_rows() {
        let d = dataset(&[(0.0, 0.0, 1.0, 2.0), (1.0, 0.0, 0.0, 1.5), (0.0, 1.0, 2.0, 1.0)]);
        assert_eq!(
            fit_gain_score(&d, false),
            Err(Error::InsufficientData { n: 3, required: 3 })
        );
    }

    fn toy_fit() -> RegressionFit {
        RegressionFit {
            coefficient_names: vec!["_cons".into(), "T1".into(), "T2".into()],
            coefficients: vec![0.1, -0.4, 0.9],
            coef_covariance: DMatrix::from_row_slice(
                3,
                3,
                &[0.5, 0.0, 0.0, 0.0, 0.04, 0.01, 0.0, 0.01, 0.09],
            ),
            residual_variance: 1.0,
            df_residual: 100,
            n: 103,
            covariance_type: CovarianceType::Classical,
        }
    }

    #[test]
    fn contrast_variance_formula() {
        let fit = toy_fit();
        let c = linear_contrast(&fit, &[0.0, 1.0, 1.0], 0.95).unwrap();
        assert!((c.se - libm::sqrt(0.15)).abs() < 1e-15);
        assert!((c.se - 0.38730).abs() < 1e-5);
        assert!((c.estimate - 0.5).abs() < 1e-15);
        let zero = linear_contrast(&fit, &[0.0; 3], 0.95).unwrap();
        assert_eq!((zero.estimate, zero.se), (0.0, 0.0));
    }

    #[test]
    fn contrast_argument_errors() {
        let fit = toy_fit();
        assert_eq!(
            linear_contrast(&fit, &[1.0, 1.0], 0.95),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(matches!(
            linear_contrast(&fit, &[0.0, 1.0, 1.0], 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn duplicate_family_rejected() {
        let rows = vec![
            PairRow::new("a", 0.0, 1.0, 1.0, 1.0),
            PairRow::new("a", 1.0, 1.0, 1.0, 1.0),
        ];
        assert!(matches!(
            PairDataset::new(Vec::new(), rows),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn covariates_enter_only_when_adjusting() {
        let rows: Vec<PairRow> = (0..12)
            .map(|i| {
                let x = i as f64;
                PairRow::new(format!("{i}"), (i % 2) as f64, ((i / 2) % 2) as f64, x * 0.1, x * 0.37 - (i % 3) as f64)
                    .with_covariates(vec![libm::sin(x)])
            })
            .collect();
        let d = PairDataset::new(vec!["cov_a".into()], rows).unwrap();
        assert_eq!(fit_gain_score(&d, false).unwrap().coefficients.len(), 3);
        let adjusted = fit_gain_score(&d, true).unwrap();
        assert_eq!(adjusted.coefficient_names, ["_cons", "T1", "T2", "cov_a"]);
        let report = spillover_estimate(&d, true, 0.9).unwrap();
        assert_eq!(report.sc(), report.b1.estimate + report.b2.estimate);
        assert!(report.spillover.ci_low <= report.sc() && report.sc() <= report.spillover.ci_high);
    }

    #[test]
    fn robust_covariance_is_symmetric_psd_diagonal() {
        let rows: Vec<PairRow> = (0..40)
            .map(|i| {
                let x = i as f64;
                PairRow::new(format!("{i}"), (i % 2) as f64, ((i / 3) % 2) as f64, libm::cos(x), x * 0.05 + libm::sin(3.0 * x))
            })
            .collect();
        let d = PairDataset::new(Vec::new(), rows).unwrap();
        let fit = fit_gain_score_with(&d, false, CovarianceType::Robust).unwrap();
        let classical = fit_gain_score(&d, false).unwrap();
        assert_eq!(fit.coefficients, classical.coefficients);
        for i in 0..3 {
            assert!(fit.coef_covariance[(i, i)] > 0.0);
            for j in 0..3 {
                assert_eq!(fit.coef_covariance[(i, j)], fit.coef_covariance[(j, i)]);
            }
        }
    }
}
