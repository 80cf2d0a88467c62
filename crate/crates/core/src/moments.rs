//! Population moments implied by a [`PathModel`].
//!
//! Two independent routes compute the same covariance matrix:
//!
//! * [`implied_covariance_matrix`] uses the reduced form
//!   `Σ = (I - B)⁻¹ Ω (I - B)⁻ᵀ`, then appends derived variables through
//!   their linear definitions.
//! * [`implied_covariance_treks`] enumerates treks: pairs of directed paths
//!   leaving a common top node. Each trek contributes the product of its
//!   coefficients times the top node's disturbance variance. Derived
//!   variables are reached through their weighted links, exactly as when
//!   tracing `... -> Y2 -> D` by hand.
//!
//! On top of the moments, [`population_partial_regression`] evaluates the
//! two-regressor partial regression of the gain score `D` on `T1` and `T2`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{ModelSpec, PathModel, VariableKind};
use crate::presets::{Family, Preset, StructuralParams};
use crate::rng;

/// Correlations at or above `1 - COLLINEARITY_TOLERANCE` in magnitude are collinear.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-12;

/// Agreement required of the symbolic identities.
pub const SYMBOLIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Matrix,
    Trek,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpliedMoments {
    variable_order: Vec<String>,
    covariance: DMatrix<f64>,
    method: MomentMethod,
}

impl ImpliedMoments {
    pub fn variable_order(&self) -> &[String] {
        &self.variable_order
    }

    pub fn covariance_matrix(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn method(&self) -> MomentMethod {
        self.method
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.variable_order
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn covariance(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.covariance[(self.position(a)?, self.position(b)?)])
    }

    pub fn variance(&self, a: &str) -> Result<f64> {
        self.covariance(a, a)
    }

    /// Correlation of `a` and `b`; zero when either has no variance.
    pub fn correlation(&self, a: &str, b: &str) -> Result<f64> {
        let (va, vb) = (self.variance(a)?, self.variance(b)?);
        if va <= 0.0 || vb <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.covariance(a, b)? / libm::sqrt(va * vb))
    }

    /// Largest entrywise absolute difference to `other` (same variable order assumed).
    pub fn max_abs_difference(&self, other: &ImpliedMoments) -> f64 {
        self.covariance
            .iter()
            .zip(other.covariance.iter())
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }
}

/// Reduced-form covariance of every variable in `model`.
pub fn implied_covariance_matrix(model: &PathModel) -> Result<ImpliedMoments> {
    let vars = model.variables();
    let n = vars.len();
    let structural: Vec<usize> = (0..n)
        .filter(|&i| vars[i].kind != VariableKind::Derived)
        .collect();
    let k = structural.len();
    let slot = |i: usize| structural.iter().position(|&s| s == i);

    let mut i_minus_b = DMatrix::<f64>::identity(k, k);
    for link in model.links().iter().filter(|l| !l.derived) {
        let (to, from) = (slot(link.to).unwrap(), slot(link.from).unwrap());
        i_minus_b[(to, from)] -= link.coefficient;
    }
    let total = i_minus_b.try_inverse().ok_or(Error::Singularity)?;
    if total.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singularity);
    }
    let omega = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        structural.iter().map(|&i| vars[i].noise_variance),
    ));
    let sigma_structural = &total * omega * total.transpose();

    // Each variable as a weight vector over the structural block.
    let mut weights = DMatrix::<f64>::zeros(n, k);
    for (s, &i) in structural.iter().enumerate() {
        weights[(i, s)] = 1.0;
    }
    for def in model.derived_definitions() {
        let row = model.index_of(&def.name)?;
        for (term, w) in &def.terms {
            let s = slot(model.index_of(term)?).ok_or(Error::Singularity)?;
            weights[(row, s)] += w;
        }
    }
    let covariance = &weights * sigma_structural * weights.transpose();
    Ok(ImpliedMoments {
        variable_order: vars.iter().map(|v| v.name.clone()).collect(),
        covariance,
        method: MomentMethod::Matrix,
    })
}

/// One trek between two variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Trek {
    pub top: String,
    /// Directed path from the top to the first variable.
    pub left: Vec<String>,
    /// Directed path from the top to the second variable.
    pub right: Vec<String>,
    /// Product of all coefficients on both sides.
    pub product: f64,
    /// Disturbance variance of the top node.
    pub top_variance: f64,
}

impl Trek {
    pub fn contribution(&self) -> f64 {
        self.product * self.top_variance
    }
}

struct DirectedPath {
    nodes: Vec<usize>,
    product: f64,
}

/// Every directed path leaving `root`, the trivial one included.
fn directed_paths_from(model: &PathModel, root: usize) -> Vec<DirectedPath> {
    fn extend(model: &PathModel, path: &mut Vec<usize>, product: f64, out: &mut Vec<DirectedPath>) {
        out.push(DirectedPath {
            nodes: path.clone(),
            product,
        });
        let here = *path.last().unwrap();
        for link in model.links().iter().filter(|l| l.from == here) {
            path.push(link.to);
            extend(model, path, product * link.coefficient, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    extend(model, &mut vec![root], 1.0, &mut out);
    out
}

/// Lists the treks between `a` and `b`, tops in canonical order.
pub fn treks_between(model: &PathModel, a: &str, b: &str) -> Result<Vec<Trek>> {
    let (ai, bi) = (model.index_of(a)?, model.index_of(b)?);
    let vars = model.variables();
    let mut out = Vec::new();
    for (top, var) in vars.iter().enumerate() {
        let paths = directed_paths_from(model, top);
        let names = |p: &DirectedPath| -> Vec<String> {
            p.nodes.iter().map(|&i| vars[i].name.clone()).collect()
        };
        for left in paths.iter().filter(|p| *p.nodes.last().unwrap() == ai) {
            for right in paths.iter().filter(|p| *p.nodes.last().unwrap() == bi) {
                out.push(Trek {
                    top: var.name.clone(),
                    left: names(left),
                    right: names(right),
                    product: left.product * right.product,
                    top_variance: var.noise_variance,
                });
            }
        }
    }
    Ok(out)
}

/// Covariance of every variable in `model` by summing trek contributions.
pub fn implied_covariance_treks(model: &PathModel) -> Result<ImpliedMoments> {
    let vars = model.variables();
    let n = vars.len();
    let mut covariance = DMatrix::<f64>::zeros(n, n);
    for (top, var) in vars.iter().enumerate() {
        if var.noise_variance == 0.0 {
            continue;
        }
        let paths = directed_paths_from(model, top);
        for left in &paths {
            for right in &paths {
                let (i, j) = (*left.nodes.last().unwrap(), *right.nodes.last().unwrap());
                covariance[(i, j)] += var.noise_variance * left.product * right.product;
            }
        }
    }
    Ok(ImpliedMoments {
        variable_order: vars.iter().map(|v| v.name.clone()).collect(),
        covariance,
        method: MomentMethod::Trek,
    })
}

/// Large-sample limit of the gain-score regression coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationRegression {
    /// Partial coefficient of `D` on `T1` given `T2`.
    pub b1: f64,
    /// Partial coefficient of `D` on `T2` given `T1`.
    pub b2: f64,
    /// `b1 + b2`.
    pub sc: f64,
}

impl PopulationRegression {
    /// Evaluates the correlation form of the two-regressor partial regression
    /// of `D` on `T1` and `T2`.
    pub fn from_moments(m: &ImpliedMoments) -> Result<Self> {
        let var_t1 = m.variance("T1")?;
        let var_t2 = m.variance("T2")?;
        for (name, v) in [("T1", var_t1), ("T2", var_t2)] {
            if !(v > 0.0) {
                return Err(Error::DegenerateExposure(name.into()));
            }
        }
        let var_d = m.variance("D")?;
        let rho_12 = m.correlation("T1", "T2")?;
        if libm::fabs(rho_12) >= 1.0 - COLLINEARITY_TOLERANCE {
            return Err(Error::Collinearity { rho: rho_12 });
        }
        if var_d <= 0.0 {
            return Ok(Self {
                b1: 0.0,
                b2: 0.0,
                sc: 0.0,
            });
        }
        let (sd_1, sd_2, sd_d) = (libm::sqrt(var_t1), libm::sqrt(var_t2), libm::sqrt(var_d));
        let rho_d1 = m.correlation("D", "T1")?;
        let rho_d2 = m.correlation("D", "T2")?;
        let denom = 1.0 - rho_12 * rho_12;
        let b1 = (rho_d1 - rho_d2 * rho_12) / denom * (sd_d / sd_1);
        let b2 = (rho_d2 - rho_d1 * rho_12) / denom * (sd_d / sd_2);
        Ok(Self { b1, b2, sc: b1 + b2 })
    }
}

pub fn population_partial_regression(model: &PathModel) -> Result<PopulationRegression> {
    PopulationRegression::from_moments(&implied_covariance_matrix(model)?)
}

/// A random parameterization of `preset`: every free coefficient uniform on
/// `[-2, -0.1] ∪ [0.1, 2]`, disturbance variances uniform on `[0.5, 2)`.
///
/// Returns the parameters alongside the model built from them.
pub fn random_draw(preset: Preset, seed: u64, index: u64) -> (StructuralParams, PathModel) {
    let mut draw = rng::stream(seed, index, rng::PARAMETER_TAG);
    let mut params = StructuralParams {
        theta: 0.0,
        delta: 0.0,
        psi: 0.0,
        chi: 0.0,
        gamma: 0.0,
        ..StructuralParams::default()
    };
    for param in preset.free_parameters() {
        params.set(param, rng::signed_magnitude(&mut draw, 0.1, 2.0));
    }
    let mut scales = rng::stream(seed, index, rng::NOISE_SCALE_TAG);
    let model = preset
        .model(&params)
        .map_noise_variances(|_| rng::uniform_in(&mut scales, 0.5, 2.0));
    (params, model)
}

/// A random small DAG on nodes `V0..V{k-1}` (`2 ≤ k ≤ max_nodes`).
///
/// Each forward pair `Vi -> Vj` (`i < j`) gets an edge with probability 1/2 and
/// a coefficient uniform on `[-1.5, -0.1] ∪ [0.1, 1.5]`; disturbance variances
/// are uniform on `[0.5, 2)`. Models with at least three nodes also carry the
/// derived contrast `S = V{k-1} - V{k-2}`.
pub fn random_dag(seed: u64, index: u64, max_nodes: usize) -> PathModel {
    let mut draw = rng::stream(seed, index, rng::PARAMETER_TAG);
    let max_nodes = max_nodes.clamp(2, 10);
    let k = 2 + (rng::uniform(&mut draw) * (max_nodes - 1) as f64) as usize;
    let k = k.min(max_nodes);
    let names: Vec<String> = (0..k).map(|i| alloc::format!("V{i}")).collect();
    let mut spec = ModelSpec::new();
    for (i, name) in names.iter().enumerate() {
        let kind = if i == 0 {
            VariableKind::ExogenousLatent
        } else {
            VariableKind::Outcome
        };
        spec = spec.variable(name, kind, rng::uniform_in(&mut draw, 0.5, 2.0));
    }
    for i in 0..k {
        for j in i + 1..k {
            if rng::uniform(&mut draw) < 0.5 {
                let c = rng::signed_magnitude(&mut draw, 0.1, 1.5);
                spec = spec.edge(&names[i], &names[j], c, None);
            }
        }
    }
    if k >= 3 {
        spec = spec.derived("S", &[(&names[k - 1], 1.0), (&names[k - 2], -1.0)]);
    }
    PathModel::build(spec).expect("forward edges are acyclic")
}

/// Outcome of checking one coefficient identity across draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientCheck {
    /// `b1`, `b2` or `sc`.
    pub coefficient: &'static str,
    /// The identity being checked, e.g. `θ-δ`, or `≠ θ` for the biased presets.
    pub expected: &'static str,
    /// Largest |population value - expected| across draws (for `≠` checks, the smallest |sc - θ|).
    pub worst_deviation: f64,
    /// Share of draws satisfying the identity.
    pub pass_rate: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicCheck {
    pub preset: Preset,
    pub draws: usize,
    pub checks: Vec<CoefficientCheck>,
}

impl SymbolicCheck {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Verifies the closed-form gain-score coefficients of `preset` numerically.
///
/// One-sided presets must give `b1 = θ-δ`, `b2 = δ`; two-sided presets
/// `b1 = θ-δ`, `b2 = δ-κ`, each within [`SYMBOLIC_TOLERANCE`] on every draw.
/// Outcome-spillover presets must give `sc ≠ θ` on at least 95% of draws.
pub fn symbolic_check(preset: Preset, draws: usize, seed: u64) -> Result<SymbolicCheck> {
    let mut results = Vec::with_capacity(draws);
    for index in 0..draws as u64 {
        let (p, model) = random_draw(preset, seed, index);
        results.push((p, population_partial_regression(&model)?));
    }

    let equality = |coefficient, expected, f: &dyn Fn(&StructuralParams, &PopulationRegression) -> f64| {
        let deviations: Vec<f64> = results.iter().map(|(p, r)| libm::fabs(f(p, r))).collect();
        let hits = deviations.iter().filter(|&&d| d < SYMBOLIC_TOLERANCE).count();
        CoefficientCheck {
            coefficient,
            expected,
            worst_deviation: deviations.iter().copied().fold(0.0, f64::max),
            pass_rate: hits as f64 / draws.max(1) as f64,
            passed: hits == draws,
        }
    };

    let checks = match preset.family() {
        Family::OneSided => vec![
            equality("b1", "θ-δ", &|p, r| r.b1 - (p.theta - p.delta)),
            equality("b2", "δ", &|p, r| r.b2 - p.delta),
            equality("sc", "θ", &|p, r| r.sc - p.theta),
        ],
        Family::TwoSided => vec![
            equality("b1", "θ-δ", &|p, r| r.b1 - (p.theta - p.delta)),
            equality("b2", "δ-κ", &|p, r| r.b2 - (p.delta - p.kappa)),
            equality("sc", "θ-κ", &|p, r| r.sc - (p.theta - p.kappa)),
        ],
        Family::FromOutcome => {
            let deviations: Vec<f64> = results
                .iter()
                .map(|(p, r)| libm::fabs(r.sc - p.theta))
                .collect();
            let hits = deviations.iter().filter(|&&d| d > 1e-6).count();
            let pass_rate = hits as f64 / draws.max(1) as f64;
            vec![CoefficientCheck {
                coefficient: "sc",
                expected: "≠ θ",
                worst_deviation: deviations.iter().copied().fold(f64::INFINITY, f64::min),
                pass_rate,
                passed: draws > 0 && pass_rate >= 0.95,
            }]
        }
    };
    Ok(SymbolicCheck {
        preset,
        draws,
        checks,
    })
}
