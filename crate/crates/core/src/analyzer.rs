//! What the spillover coefficient identifies in a given model, and what a
//! sign assumption on the reverse spillover κ lets one conclude about θ.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::graph::{Edge, PathModel};
use crate::moments::{population_partial_regression, SYMBOLIC_TOLERANCE};
use crate::rng;

/// Default number of random parameterizations examined per model.
pub const DEFAULT_DRAWS: usize = 200;

/// |sc − θ| above this counts as a biased draw.
pub const BIAS_THRESHOLD: f64 = 1e-6;

/// Share of draws that must be biased before the model is called biased.
pub const BIAS_SHARE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentificationClass {
    PointIdentifiesTheta,
    IdentifiesThetaMinusKappa,
    Biased,
    /// Neither identity holds and the bias is not generic, e.g. it vanishes
    /// on a sizeable share of draws.
    Inconclusive,
}

impl IdentificationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            IdentificationClass::PointIdentifiesTheta => "point-identifies-theta",
            IdentificationClass::IdentifiesThetaMinusKappa => "identifies-theta-minus-kappa",
            IdentificationClass::Biased => "biased",
            IdentificationClass::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for IdentificationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Residuals of the candidate identities across the random draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawEvidence {
    pub draws: usize,
    pub seed: u64,
    /// Largest |sc − θ|.
    pub max_abs_sc_minus_theta: f64,
    /// Largest |sc − (θ − κ)|; `None` when the model has no `T2 -> Y1` edge.
    pub max_abs_sc_minus_theta_minus_kappa: Option<f64>,
    /// Share of draws with |sc − θ| above [`BIAS_THRESHOLD`].
    pub biased_share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationVerdict {
    pub class: IdentificationClass,
    /// Population spillover coefficient at the model's own coefficients.
    pub population_sc: f64,
    /// The model's own `T1 -> Y2` coefficient.
    pub theta_true: f64,
    pub evidence: DrawEvidence,
}

/// Groups edges that share a label so they receive one common draw.
fn parameter_key(edge: &Edge) -> String {
    match &edge.label {
        Some(label) => label.clone(),
        None => format!("{}->{}", edge.from, edge.to),
    }
}

/// Classifies what the population spillover coefficient identifies in `model`.
///
/// Every edge coefficient is redrawn uniformly from `[-2, -0.1] ∪ [0.1, 2]`
/// (edges sharing a label share the draw) while disturbance variances are
/// kept. The model must contain `T1`, `T2` and the gain score `D`.
pub fn classify_identification(
    model: &PathModel,
    draws: usize,
    seed: u64,
) -> Result<IdentificationVerdict> {
    let at_model = population_partial_regression(model)?;
    let has_kappa = model.edge("T2", "Y1").is_some();

    let mut worst_theta: f64 = 0.0;
    let mut worst_difference: f64 = 0.0;
    let mut biased = 0usize;
    for index in 0..draws as u64 {
        let mut stream = rng::stream(seed, index, rng::PARAMETER_TAG);
        let mut values: BTreeMap<String, f64> = BTreeMap::new();
        for edge in model.edges() {
            values
                .entry(parameter_key(edge))
                .or_insert_with(|| rng::signed_magnitude(&mut stream, 0.1, 2.0));
        }
        let drawn = model.map_coefficients(|e| values[&parameter_key(e)]);
        let sc = population_partial_regression(&drawn)?.sc;
        let theta = drawn.coefficient("T1", "Y2");
        let kappa = drawn.coefficient("T2", "Y1");
        let deviation = libm::fabs(sc - theta);
        worst_theta = worst_theta.max(deviation);
        worst_difference = worst_difference.max(libm::fabs(sc - (theta - kappa)));
        if deviation > BIAS_THRESHOLD {
            biased += 1;
        }
    }

    let biased_share = if draws == 0 { 0.0 } else { biased as f64 / draws as f64 };
    let class = if draws == 0 {
        IdentificationClass::Inconclusive
    } else if worst_theta < SYMBOLIC_TOLERANCE {
        IdentificationClass::PointIdentifiesTheta
    } else if has_kappa && worst_difference < SYMBOLIC_TOLERANCE {
        IdentificationClass::IdentifiesThetaMinusKappa
    } else if biased_share >= BIAS_SHARE {
        IdentificationClass::Biased
    } else {
        IdentificationClass::Inconclusive
    };

    Ok(IdentificationVerdict {
        class,
        population_sc: at_model.sc,
        theta_true: model.coefficient("T1", "Y2"),
        evidence: DrawEvidence {
            draws,
            seed,
            max_abs_sc_minus_theta: worst_theta,
            max_abs_sc_minus_theta_minus_kappa: has_kappa.then_some(worst_difference),
            biased_share,
        },
    })
}

/// Assumed sign of the reverse spillover κ (`T2 -> Y1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KappaSign {
    Positive,
    Negative,
    Zero,
    Unknown,
}

impl KappaSign {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaSign::Positive => "positive",
            KappaSign::Negative => "negative",
            KappaSign::Zero => "zero",
            KappaSign::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "positive" | "+" | ">0" => Some(KappaSign::Positive),
            "negative" | "-" | "<0" => Some(KappaSign::Negative),
            "zero" | "0" => Some(KappaSign::Zero),
            "unknown" | "?" => Some(KappaSign::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conclusion {
    ScLowerBoundsTheta,
    ScUpperBoundsTheta,
    ScEqualsTheta,
    ThetaPositive,
    ThetaNegative,
    Uninformative,
}

impl Conclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Conclusion::ScLowerBoundsTheta => "sc-lower-bounds-theta",
            Conclusion::ScUpperBoundsTheta => "sc-upper-bounds-theta",
            Conclusion::ScEqualsTheta => "sc-equals-theta",
            Conclusion::ThetaPositive => "theta-positive",
            Conclusion::ThetaNegative => "theta-negative",
            Conclusion::Uninformative => "uninformative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStatement {
    pub assumption: KappaSign,
    pub sc_value: f64,
    pub conclusions: Vec<Conclusion>,
}

impl BoundStatement {
    pub fn concludes(&self, c: Conclusion) -> bool {
        self.conclusions.contains(&c)
    }

    /// Human-readable summary, e.g. `θ > 0.2, θ > 0`.
    pub fn describe(&self) -> String {
        let sc = self.sc_value;
        let parts: Vec<String> = self
            .conclusions
            .iter()
            .map(|c| match c {
                Conclusion::ScLowerBoundsTheta => format!("θ > {sc}"),
                Conclusion::ScUpperBoundsTheta => format!("θ < {sc}"),
                Conclusion::ScEqualsTheta => format!("θ = {sc}"),
                Conclusion::ThetaPositive => "θ > 0".to_string(),
                Conclusion::ThetaNegative => "θ < 0".to_string(),
                Conclusion::Uninformative => "nothing follows about θ".to_string(),
            })
            .collect();
        parts.join(", ")
    }
}

/// What a sign assumption on κ lets one conclude from `sc = θ − κ`.
///
/// A zero SC under a signed κ is uninformative: it fits both θ = κ and
/// θ = κ = 0.
pub fn bound_inference(sc_value: f64, kappa_sign: KappaSign) -> BoundStatement {
    use Conclusion::*;
    let conclusions = match kappa_sign {
        KappaSign::Zero => alloc::vec![ScEqualsTheta],
        KappaSign::Unknown => alloc::vec![Uninformative],
        _ if sc_value == 0.0 || sc_value.is_nan() => alloc::vec![Uninformative],
        KappaSign::Positive if sc_value > 0.0 => alloc::vec![ScLowerBoundsTheta, ThetaPositive],
        KappaSign::Positive => alloc::vec![ScLowerBoundsTheta],
        KappaSign::Negative if sc_value < 0.0 => alloc::vec![ScUpperBoundsTheta, ThetaNegative],
        KappaSign::Negative => alloc::vec![ScUpperBoundsTheta],
    };
    BoundStatement {
        assumption: kappa_sign,
        sc_value,
        conclusions,
    }
}

/// A causal path whose effect the spillover coefficient leaves out.
#[derive(Debug, Clone, PartialEq)]
pub struct MediatedPath {
    pub nodes: Vec<String>,
    /// Edge labels along the path; unlabeled edges show as `from->to`.
    pub labels: Vec<String>,
    pub product: f64,
}

impl MediatedPath {
    fn through(model: &PathModel, nodes: [&str; 3]) -> Option<Self> {
        let first = model.edge(nodes[0], nodes[1])?;
        let second = model.edge(nodes[1], nodes[2])?;
        if first.coefficient == 0.0 || second.coefficient == 0.0 {
            return None;
        }
        Some(Self {
            nodes: nodes.iter().map(|n| n.to_string()).collect(),
            labels: [first, second].iter().map(|e| parameter_key(e)).collect(),
            product: first.coefficient * second.coefficient,
        })
    }

    /// e.g. `φ·δ`.
    pub fn symbolic_product(&self) -> String {
        self.labels.join("·")
    }
}

impl fmt::Display for MediatedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nodes.join(" -> "))
    }
}

/// Annotation listing the mediated spillover the SC does not capture.
#[derive(Debug, Clone, PartialEq)]
pub struct MediationNote {
    pub paths: Vec<MediatedPath>,
}

impl MediationNote {
    pub fn message(&self) -> String {
        let listed: Vec<String> = self
            .paths
            .iter()
            .map(|p| format!("{p} ({} = {})", p.symbolic_product(), p.product))
            .collect();
        format!(
            "SC captures only the direct spillover; it excludes the mediated path(s) {}",
            listed.join("; ")
        )
    }
}

/// Flags exposure-to-exposure effects whose mediated spillover the SC misses:
/// `T1 -> T2 -> Y2` whenever `T1 -> T2` is nonzero, and `T2 -> T1 -> Y1` when
/// the model is two-sided (nonzero `T2 -> Y1`).
pub fn mediated_component_note(model: &PathModel) -> Option<MediationNote> {
    let mut paths = Vec::new();
    paths.extend(MediatedPath::through(model, ["T1", "T2", "Y2"]));
    if model.coefficient("T2", "Y1") != 0.0 {
        paths.extend(MediatedPath::through(model, ["T2", "T1", "Y1"]));
    }
    (!paths.is_empty()).then_some(MediationNote { paths })
}
