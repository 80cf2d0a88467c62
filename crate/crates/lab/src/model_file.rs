//! JSON model files and the `--model` argument.
//!
//! ```json
//! {
//!   "variables": [{"name": "U", "kind": "exogenous-latent", "noise_variance": 1}, ...],
//!   "edges": [{"from": "U", "to": "T1", "coefficient": 2, "label": "χ"}, ...],
//!   "derived": {"D": {"Y2": 1, "Y1": -1}}
//! }
//! ```
//!
//! `noise_variance` defaults to 1 for structural variables and 0 for derived
//! ones. Derived variables need not be listed under `variables`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spillover_core::graph::{DerivedDefinition, Edge, Variable};
use spillover_core::{ModelSpec, PathModel, Preset, StructuralParams, VariableKind};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableRecord {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub coefficient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: Vec<VariableRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub derived: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ModelFile {
    pub fn from_model(model: &PathModel) -> Self {
        Self {
            variables: model
                .variables()
                .iter()
                .map(|v| VariableRecord {
                    name: v.name.clone(),
                    kind: v.kind.as_str().to_string(),
                    noise_variance: Some(v.noise_variance),
                })
                .collect(),
            edges: model
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    coefficient: e.coefficient,
                    label: e.label.clone(),
                })
                .collect(),
            derived: model
                .derived_definitions()
                .iter()
                .map(|d| (d.name.clone(), d.terms.iter().cloned().collect()))
                .collect(),
        }
    }

    pub fn into_spec(self) -> Result<ModelSpec> {
        let mut variables = Vec::with_capacity(self.variables.len());
        for v in self.variables {
            let kind = VariableKind::parse(&v.kind).ok_or_else(|| {
                LabError::ModelFile(format!("variable {} has unknown kind {:?}", v.name, v.kind))
            })?;
            let default = if kind == VariableKind::Derived { 0.0 } else { 1.0 };
            variables.push(Variable::new(v.name, kind, v.noise_variance.unwrap_or(default)));
        }
        Ok(ModelSpec {
            variables,
            edges: self
                .edges
                .into_iter()
                .map(|e| Edge {
                    from: e.from,
                    to: e.to,
                    coefficient: e.coefficient,
                    label: e.label,
                })
                .collect(),
            derived: self
                .derived
                .into_iter()
                .map(|(name, terms)| DerivedDefinition {
                    name,
                    terms: terms.into_iter().collect(),
                })
                .collect(),
        })
    }
}

pub fn parse_model_json(text: &str) -> Result<PathModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| LabError::ModelFile(e.to_string()))?;
    Ok(PathModel::build(file.into_spec()?)?)
}

pub fn model_to_json(model: &PathModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model file serializes")
}

/// A model named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub name: String,
    pub model: PathModel,
    /// Set when the argument named a built-in topology.
    pub preset: Option<Preset>,
}

/// Resolves a preset name (with its simulation-study parameters) or a JSON file path.
pub fn load_model(arg: &str) -> Result<LoadedModel> {
    if let Ok(preset) = arg.parse::<Preset>() {
        return Ok(LoadedModel {
            name: preset.name().to_string(),
            model: preset.model(&StructuralParams::figure4(preset)),
            preset: Some(preset),
        });
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(LabError::Usage(format!(
            "--model {arg:?} is neither a preset (fig1a … fig3c) nor an existing file"
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| arg.to_string());
    Ok(LoadedModel {
        name,
        model: parse_model_json(&text)?,
        preset: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_json() {
        for preset in Preset::ALL {
            let model = preset.model(&StructuralParams::figure4(preset));
            let back = parse_model_json(&model_to_json(&model)).unwrap();
            assert_eq!(back, model, "{preset}");
        }
    }

    #[test]
    fn defaults_and_implicit_derived() {
        let model = parse_model_json(
            r#"{"variables": [{"name": "Y1", "kind": "outcome"}, {"name": "Y2", "kind": "outcome"}],
                "edges": [{"from": "Y1", "to": "Y2", "coefficient": 0.4}],
                "derived": {"D": {"Y2": 1, "Y1": -1}}}"#,
        )
        .unwrap();
        assert_eq!(model.variable("Y1").unwrap().noise_variance, 1.0);
        assert_eq!(model.variable("D").unwrap().kind, VariableKind::Derived);
        assert_eq!(model.coefficient("Y1", "Y2"), 0.4);
    }

    #[test]
    fn bad_files() {
        let err = parse_model_json(r#"{"variables": [{"name": "A", "kind": "weird"}]}"#).unwrap_err();
        assert!(matches!(err, LabError::ModelFile(_)));
        let err = parse_model_json("{").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let cyclic = r#"{"variables": [{"name": "A", "kind": "outcome"}, {"name": "B", "kind": "outcome"}],
            "edges": [{"from": "A", "to": "B", "coefficient": 1}, {"from": "B", "to": "A", "coefficient": 1}]}"#;
        assert_eq!(parse_model_json(cyclic).unwrap_err().kind(), "cycle");
    }

    #[test]
    fn unknown_model_argument_is_a_usage_error() {
        let err = load_model("no-such-model").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert_eq!(load_model("fig2a").unwrap().model.coefficient("T2", "Y1"), 0.3);
    }
}
