//! The nine sibling-spillover topologies and their structural parameters.
//!
//! Every preset shares the baseline edges `U -> T1 (χ)`, `U -> T2 (γ)`,
//! `U -> Y1 (ψ)`, `U -> Y2 (ψ)`, `T1 -> Y1 (δ)`, `T2 -> Y2 (δ)` and the
//! spillover of interest `T1 -> Y2 (θ)`. The variants add:
//!
//! | preset | extra edges |
//! |--------|-------------|
//! | fig1a  | none |
//! | fig1b  | `T2 -> T1 (τ)` |
//! | fig1c  | `T1 -> T2 (φ)` |
//! | fig2a  | `T2 -> Y1 (κ)` |
//! | fig2b  | `T2 -> Y1 (κ)`, `T2 -> T1 (τ)` |
//! | fig2c  | `T2 -> Y1 (κ)`, `T1 -> T2 (φ)` |
//! | fig3a  | `Y1 -> T2 (ω)` |
//! | fig3b  | `Y1 -> Y2 (η)` |
//! | fig3c  | `Y2 -> Y1 (λ)` |
//!
//! The models built here are linear-Gaussian: every structural variable,
//! exposures included, carries a unit-variance disturbance.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::graph::{ModelSpec, PathModel, VariableKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    Fig1A,
    Fig1B,
    Fig1C,
    Fig2A,
    Fig2B,
    Fig2C,
    Fig3A,
    Fig3B,
    Fig3C,
}

/// Which family a preset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// One-sided exposure-to-outcome spillover.
    OneSided,
    /// Two-sided exposure-to-outcome spillover.
    TwoSided,
    /// Spillover originating from an outcome.
    FromOutcome,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig1A,
        Preset::Fig1B,
        Preset::Fig1C,
        Preset::Fig2A,
        Preset::Fig2B,
        Preset::Fig2C,
        Preset::Fig3A,
        Preset::Fig3B,
        Preset::Fig3C,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1A => "fig1a",
            Preset::Fig1B => "fig1b",
            Preset::Fig1C => "fig1c",
            Preset::Fig2A => "fig2a",
            Preset::Fig2B => "fig2b",
            Preset::Fig2C => "fig2c",
            Preset::Fig3A => "fig3a",
            Preset::Fig3B => "fig3b",
            Preset::Fig3C => "fig3c",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Preset::Fig1A | Preset::Fig1B | Preset::Fig1C => Family::OneSided,
            Preset::Fig2A | Preset::Fig2B | Preset::Fig2C => Family::TwoSided,
            Preset::Fig3A | Preset::Fig3B | Preset::Fig3C => Family::FromOutcome,
        }
    }

    /// Parameters this topology puts on an edge.
    pub fn free_parameters(self) -> Vec<Param> {
        use Param::*;
        let mut params = alloc::vec![Theta, Delta, Psi, Chi, Gamma];
        params.extend_from_slice(match self {
            Preset::Fig1A => &[][..],
            Preset::Fig1B => &[Tau],
            Preset::Fig1C => &[Phi],
            Preset::Fig2A => &[Kappa],
            Preset::Fig2B => &[Kappa, Tau],
            Preset::Fig2C => &[Kappa, Phi],
            Preset::Fig3A => &[Omega],
            Preset::Fig3B => &[Eta],
            Preset::Fig3C => &[Lambda],
        });
        params
    }

    /// Unvalidated specification of this topology with unit disturbance variances.
    pub fn spec(self, p: &StructuralParams) -> ModelSpec {
        let mut spec = ModelSpec::new()
            .variable("U", VariableKind::ExogenousLatent, 1.0)
            .variable("T1", VariableKind::Exposure, 1.0)
            .variable("T2", VariableKind::Exposure, 1.0)
            .variable("Y1", VariableKind::Outcome, 1.0)
            .variable("Y2", VariableKind::Outcome, 1.0)
            .gain_score();
        for param in self.free_parameters() {
            let (from, to) = param.endpoints();
            for (from, to) in core::iter::once((from, to)).chain(param.twin()) {
                spec = spec.edge(from, to, p.get(param), Some(param.symbol()));
            }
        }
        spec
    }

    /// The validated linear-Gaussian model for `params`.
    ///
    /// # Panics
    ///
    /// If `params` is non-finite; every finite parameterization of a preset is valid.
    pub fn model(self, params: &StructuralParams) -> PathModel {
        PathModel::build(self.spec(params)).expect("preset topologies are acyclic")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown preset {s:?}")))
    }
}

/// One named structural coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Theta,
    Delta,
    Psi,
    Chi,
    Gamma,
    Kappa,
    Tau,
    Phi,
    Omega,
    Eta,
    Lambda,
}

impl Param {
    pub const ALL: [Param; 11] = [
        Param::Theta,
        Param::Delta,
        Param::Psi,
        Param::Chi,
        Param::Gamma,
        Param::Kappa,
        Param::Tau,
        Param::Phi,
        Param::Omega,
        Param::Eta,
        Param::Lambda,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Param::Theta => "θ",
            Param::Delta => "δ",
            Param::Psi => "ψ",
            Param::Chi => "χ",
            Param::Gamma => "γ",
            Param::Kappa => "κ",
            Param::Tau => "τ",
            Param::Phi => "φ",
            Param::Omega => "ω",
            Param::Eta => "η",
            Param::Lambda => "λ",
        }
    }

    pub fn ascii_name(self) -> &'static str {
        match self {
            Param::Theta => "theta",
            Param::Delta => "delta",
            Param::Psi => "psi",
            Param::Chi => "chi",
            Param::Gamma => "gamma",
            Param::Kappa => "kappa",
            Param::Tau => "tau",
            Param::Phi => "phi",
            Param::Omega => "omega",
            Param::Eta => "eta",
            Param::Lambda => "lambda",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Param> {
        Param::ALL
            .into_iter()
            .find(|p| p.symbol() == s || p.ascii_name() == s)
    }

    /// The edge this parameter sits on.
    pub fn endpoints(self) -> (&'static str, &'static str) {
        match self {
            Param::Theta => ("T1", "Y2"),
            Param::Delta => ("T1", "Y1"),
            Param::Psi => ("U", "Y1"),
            Param::Chi => ("U", "T1"),
            Param::Gamma => ("U", "T2"),
            Param::Kappa => ("T2", "Y1"),
            Param::Tau => ("T2", "T1"),
            Param::Phi => ("T1", "T2"),
            Param::Omega => ("Y1", "T2"),
            Param::Eta => ("Y1", "Y2"),
            Param::Lambda => ("Y2", "Y1"),
        }
    }

    /// Second edge sharing the parameter (the symmetric targeted and confounding effects).
    fn twin(self) -> Option<(&'static str, &'static str)> {
        match self {
            Param::Delta => Some(("T2", "Y2")),
            Param::Psi => Some(("U", "Y2")),
            _ => None,
        }
    }
}

/// Values of the eleven structural coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralParams {
    pub theta: f64,
    pub delta: f64,
    pub psi: f64,
    pub chi: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub tau: f64,
    pub phi: f64,
    pub omega: f64,
    pub eta: f64,
    pub lambda: f64,
}

impl Default for StructuralParams {
    /// θ = 0.5, δ = 1, ψ = 1, χ = 2, γ = 3, every other spillover zero.
    fn default() -> Self {
        Self {
            theta: 0.5,
            delta: 1.0,
            psi: 1.0,
            chi: 2.0,
            gamma: 3.0,
            kappa: 0.0,
            tau: 0.0,
            phi: 0.0,
            omega: 0.0,
            eta: 0.0,
            lambda: 0.0,
        }
    }
}

impl StructuralParams {
    /// The parameterization used for `preset` in the nine-model simulation study.
    pub fn figure4(preset: Preset) -> Self {
        let mut p = Self::default();
        match preset {
            Preset::Fig1A => {}
            Preset::Fig1B => p.tau = 0.3,
            Preset::Fig1C => p.phi = 0.3,
            Preset::Fig2A => p.kappa = 0.3,
            Preset::Fig2B => {
                p.kappa = 0.3;
                p.tau = 0.3;
            }
            Preset::Fig2C => {
                p.kappa = 0.3;
                p.phi = 0.3;
            }
            Preset::Fig3A => p.omega = 0.3,
            Preset::Fig3B => p.eta = 0.3,
            Preset::Fig3C => p.lambda = 0.3,
        }
        p
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::Theta => self.theta,
            Param::Delta => self.delta,
            Param::Psi => self.psi,
            Param::Chi => self.chi,
            Param::Gamma => self.gamma,
            Param::Kappa => self.kappa,
            Param::Tau => self.tau,
            Param::Phi => self.phi,
            Param::Omega => self.omega,
            Param::Eta => self.eta,
            Param::Lambda => self.lambda,
        }
    }

    pub fn set(&mut self, param: Param, value: f64) {
        let slot = match param {
            Param::Theta => &mut self.theta,
            Param::Delta => &mut self.delta,
            Param::Psi => &mut self.psi,
            Param::Chi => &mut self.chi,
            Param::Gamma => &mut self.gamma,
            Param::Kappa => &mut self.kappa,
            Param::Tau => &mut self.tau,
            Param::Phi => &mut self.phi,
            Param::Omega => &mut self.omega,
            Param::Eta => &mut self.eta,
            Param::Lambda => &mut self.lambda,
        };
        *slot = value;
    }

    /// Checks the mutually exclusive pairs (τ, φ), (η, λ), (κ, ω).
    pub fn check_simultaneity(&self) -> Result<(), Error> {
        for (a, b) in [
            (Param::Tau, Param::Phi),
            (Param::Eta, Param::Lambda),
            (Param::Kappa, Param::Omega),
        ] {
            if self.get(a) != 0.0 && self.get(b) != 0.0 {
                return Err(Error::Simultaneity {
                    first: a.symbol().into(),
                    second: b.symbol().into(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig4a".parse::<Preset>().is_err());
    }

    #[test]
    fn figure4_parameterization() {
        assert_eq!(StructuralParams::figure4(Preset::Fig1A), StructuralParams::default());
        let p = StructuralParams::figure4(Preset::Fig2C);
        assert_eq!((p.kappa, p.phi, p.tau), (0.3, 0.3, 0.0));
        for preset in Preset::ALL {
            StructuralParams::figure4(preset).check_simultaneity().unwrap();
        }
    }

    #[test]
    fn figure_edges() {
        let p = StructuralParams::figure4(Preset::Fig2B);
        let m = Preset::Fig2B.model(&p);
        assert_eq!(m.edges().len(), 9);
        assert_eq!(m.coefficient("T2", "T1"), 0.3);
        assert_eq!(m.coefficient("T2", "Y1"), 0.3);
        assert_eq!(m.coefficient("U", "Y2"), 1.0);
        assert_eq!(m.edge("T2", "Y2").unwrap().label.as_deref(), Some("δ"));
    }

    #[test]
    fn simultaneous_params_rejected() {
        let p = StructuralParams {
            eta: 0.1,
            lambda: 0.2,
            ..Default::default()
        };
        assert!(matches!(p.check_simultaneity(), Err(Error::Simultaneity { .. })));
    }
}
