//! Two-sibling linear causal models as coefficient-labeled DAGs.
//!
//! A [`PathModel`] holds the structural variables (`U`, `T1`, `T2`, `Y1`,
//! `Y2`, or user-defined ones), the coefficient-weighted edges between them,
//! each variable's disturbance variance, and any derived variables such as the
//! gain score `D = Y2 - Y1`. Derived variables take part in path queries
//! through weighted links from their defining terms, so a query like
//! `T1 ~ D | {T2}` sees the same paths one would trace by hand.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of nodes accepted by exhaustive path enumeration.
pub const DEFAULT_MAX_NODES: usize = 32;

/// Edge pairs that may not both carry a nonzero coefficient.
const SIMULTANEITY_PAIRS: [((&str, &str), (&str, &str)); 3] = [
    (("T1", "T2"), ("T2", "T1")),
    (("Y1", "Y2"), ("Y2", "Y1")),
    (("T2", "Y1"), ("Y1", "T2")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableKind {
    ExogenousLatent,
    Exposure,
    Outcome,
    /// A linear combination of other variables, e.g. the gain score.
    Derived,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::ExogenousLatent => "exogenous-latent",
            VariableKind::Exposure => "exposure",
            VariableKind::Outcome => "outcome",
            VariableKind::Derived => "derived",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exogenous-latent" | "latent" | "exogenous" => Some(VariableKind::ExogenousLatent),
            "exposure" => Some(VariableKind::Exposure),
            "outcome" => Some(VariableKind::Outcome),
            "derived" => Some(VariableKind::Derived),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VariableKind,
    /// Variance of the variable's own independent disturbance.
    pub noise_variance: f64,
}

impl Variable {
    pub fn new(name: impl Into<String>, kind: VariableKind, noise_variance: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            noise_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub coefficient: f64,
    /// Symbol the coefficient goes by, e.g. `θ`.
    pub label: Option<String>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, coefficient: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            coefficient,
            label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn describe(&self) -> String {
        match &self.label {
            Some(label) => format!("{label} ({}->{})", self.from, self.to),
            None => format!("{}->{}", self.from, self.to),
        }
    }
}

/// `name = Σ weight · term`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedDefinition {
    pub name: String,
    pub terms: Vec<(String, f64)>,
}

/// Unvalidated model description; turn it into a [`PathModel`] with [`build_model`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelSpec {
    pub variables: Vec<Variable>,
    pub edges: Vec<Edge>,
    pub derived: Vec<DerivedDefinition>,
}

impl ModelSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variable(mut self, name: &str, kind: VariableKind, noise_variance: f64) -> Self {
        self.variables.push(Variable::new(name, kind, noise_variance));
        self
    }

    pub fn edge(mut self, from: &str, to: &str, coefficient: f64, label: Option<&str>) -> Self {
        self.edges.push(Edge {
            from: from.into(),
            to: to.into(),
            coefficient,
            label: label.map(Into::into),
        });
        self
    }

    pub fn derived(mut self, name: &str, terms: &[(&str, f64)]) -> Self {
        self.derived.push(DerivedDefinition {
            name: name.into(),
            terms: terms.iter().map(|(t, w)| ((*t).into(), *w)).collect(),
        });
        self
    }

    /// Adds the canonical gain score `D = Y2 - Y1`.
    pub fn gain_score(self) -> Self {
        self.derived("D", &[("Y2", 1.0), ("Y1", -1.0)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Link {
    pub from: usize,
    pub to: usize,
    pub coefficient: f64,
    pub label: Option<String>,
    pub derived: bool,
}

/// A validated, immutable linear path model.
#[derive(Debug, Clone, PartialEq)]
pub struct PathModel {
    /// Canonical (lexicographic) order, structural and derived together.
    variables: Vec<Variable>,
    index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    derived: Vec<DerivedDefinition>,
    /// Structural variables in dependency order, ties broken lexicographically.
    topo: Vec<usize>,
    links: Vec<Link>,
}

/// Validates `spec` and returns the corresponding [`PathModel`].
pub fn build_model(spec: ModelSpec) -> Result<PathModel> {
    PathModel::build(spec)
}

impl PathModel {
    pub fn build(spec: ModelSpec) -> Result<Self> {
        let ModelSpec {
            mut variables,
            edges,
            derived,
        } = spec;

        for def in &derived {
            match variables.iter().find(|v| v.name == def.name) {
                Some(v) if v.kind != VariableKind::Derived => {
                    return Err(Error::InvalidModel(format!(
                        "{} has a derived definition but is declared {}",
                        def.name,
                        v.kind.as_str()
                    )))
                }
                Some(_) => {}
                None => variables.push(Variable::new(def.name.clone(), VariableKind::Derived, 0.0)),
            }
        }

        variables.sort_by(|a, b| a.name.cmp(&b.name));
        let mut index = BTreeMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::InvalidModel("empty variable name".into()));
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
            if !v.noise_variance.is_finite() || v.noise_variance < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "noise variance of {} must be finite and non-negative",
                    v.name
                )));
            }
            if v.kind == VariableKind::Derived && v.noise_variance != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "derived variable {} must have zero noise variance",
                    v.name
                )));
            }
            if v.kind == VariableKind::Derived && !derived.iter().any(|d| d.name == v.name) {
                return Err(Error::InvalidModel(format!(
                    "derived variable {} has no definition",
                    v.name
                )));
            }
        }
        let lookup = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };

        for e in &edges {
            let (from, to) = (lookup(&e.from)?, lookup(&e.to)?);
            if from == to {
                return Err(Error::InvalidModel(format!("self-loop on {}", e.from)));
            }
            if variables[from].kind == VariableKind::Derived
                || variables[to].kind == VariableKind::Derived
            {
                return Err(Error::InvalidModel(format!(
                    "structural edge {}->{} touches a derived variable",
                    e.from, e.to
                )));
            }
            if !e.coefficient.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coefficient on {}->{} is not finite",
                    e.from, e.to
                )));
            }
        }
        for (i, a) in edges.iter().enumerate() {
            if edges[i + 1..].iter().any(|b| a.from == b.from && a.to == b.to) {
                return Err(Error::InvalidModel(format!(
                    "edge {}->{} listed twice",
                    a.from, a.to
                )));
            }
        }

        // Mutually exclusive spillover pairs: both nonzero is an error, a zero
        // member is dropped so the remaining edge does not form a 2-cycle.
        let mut dropped = vec![false; edges.len()];
        for ((a_from, a_to), (b_from, b_to)) in SIMULTANEITY_PAIRS {
            let a = edges.iter().position(|e| e.from == a_from && e.to == a_to);
            let b = edges.iter().position(|e| e.from == b_from && e.to == b_to);
            if let (Some(a), Some(b)) = (a, b) {
                match (edges[a].coefficient != 0.0, edges[b].coefficient != 0.0) {
                    (true, true) => {
                        return Err(Error::Simultaneity {
                            first: edges[a].describe(),
                            second: edges[b].describe(),
                        })
                    }
                    (false, _) => dropped[a] = true,
                    (true, false) => dropped[b] = true,
                }
            }
        }
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .zip(dropped)
            .filter_map(|(e, drop)| (!drop).then_some(e))
            .collect();
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));

        let mut derived = derived;
        for def in &mut derived {
            if def.terms.is_empty() {
                return Err(Error::InvalidModel(format!("{} has no terms", def.name)));
            }
            for (term, weight) in &def.terms {
                let t = lookup(term)?;
                if variables[t].kind == VariableKind::Derived {
                    return Err(Error::InvalidModel(format!(
                        "{} is defined in terms of derived variable {term}",
                        def.name
                    )));
                }
                if !weight.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "weight on {term} in {} is not finite",
                        def.name
                    )));
                }
            }
            def.terms.sort_by(|a, b| a.0.cmp(&b.0));
            if def.terms.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidModel(format!(
                    "{} repeats a term",
                    def.name
                )));
            }
            if def.name == "D" {
                let canonical = def.terms.len() == 2
                    && def.terms[0] == ("Y1".to_string(), -1.0)
                    && def.terms[1] == ("Y2".to_string(), 1.0);
                if !canonical {
                    return Err(Error::InvalidModel(
                        "the gain score D must be defined as +1*Y2 - 1*Y1".into(),
                    ));
                }
            }
        }
        derived.sort_by(|a, b| a.name.cmp(&b.name));

        let mut links = Vec::with_capacity(edges.len() + 2 * derived.len());
        for e in &edges {
            links.push(Link {
                from: index[&e.from],
                to: index[&e.to],
                coefficient: e.coefficient,
                label: e.label.clone(),
                derived: false,
            });
        }
        for def in &derived {
            for (term, weight) in &def.terms {
                links.push(Link {
                    from: index[term],
                    to: index[&def.name],
                    coefficient: *weight,
                    label: None,
                    derived: true,
                });
            }
        }

        let topo = structural_order(&variables, &links)?;
        Ok(Self {
            variables,
            index,
            edges,
            derived,
            topo,
            links,
        })
    }

    /// All variables, structural and derived, in canonical order.
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.index.get(name).map(|&i| &self.variables[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn derived_definitions(&self) -> &[DerivedDefinition] {
        &self.derived
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    /// Coefficient on `from -> to`, or zero when there is no such edge.
    pub fn coefficient(&self, from: &str, to: &str) -> f64 {
        self.edge(from, to).map_or(0.0, |e| e.coefficient)
    }

    /// Number of non-derived variables.
    pub fn structural_count(&self) -> usize {
        self.topo.len()
    }

    /// Structural variable names in generation (topological) order.
    pub fn structural_order(&self) -> Vec<&str> {
        self.topo
            .iter()
            .map(|&i| self.variables[i].name.as_str())
            .collect()
    }

    /// Returns a copy with every structural coefficient replaced by `f(edge)`.
    pub fn map_coefficients(&self, mut f: impl FnMut(&Edge) -> f64) -> PathModel {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.coefficient = f(e);
        }
        for link in out.links.iter_mut().filter(|l| !l.derived) {
            let from = &out.variables[link.from].name;
            let to = &out.variables[link.to].name;
            link.coefficient = out
                .edges
                .iter()
                .find(|e| &e.from == from && &e.to == to)
                .map_or(link.coefficient, |e| e.coefficient);
        }
        out
    }

    /// Returns a copy with every structural noise variance replaced by `f(variable)`.
    pub fn map_noise_variances(&self, mut f: impl FnMut(&Variable) -> f64) -> PathModel {
        let mut out = self.clone();
        for v in out
            .variables
            .iter_mut()
            .filter(|v| v.kind != VariableKind::Derived)
        {
            v.noise_variance = f(v);
        }
        out
    }

    pub(crate) fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn links(&self) -> &[Link] {
        &self.links
    }

    pub(crate) fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    fn descendants_or_self(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.variables.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            for l in self.links.iter().filter(|l| l.from == node) {
                if !seen[l.to] {
                    seen[l.to] = true;
                    stack.push(l.to);
                }
            }
        }
        seen
    }
}

fn structural_order(variables: &[Variable], links: &[Link]) -> Result<Vec<usize>> {
    let structural: Vec<usize> = (0..variables.len())
        .filter(|&i| variables[i].kind != VariableKind::Derived)
        .collect();
    let mut indegree = vec![0usize; variables.len()];
    for l in links.iter().filter(|l| !l.derived) {
        indegree[l.to] += 1;
    }
    let mut placed = vec![false; variables.len()];
    let mut order = Vec::with_capacity(structural.len());
    while order.len() < structural.len() {
        // Lowest canonical index first keeps the order deterministic.
        let next = structural
            .iter()
            .copied()
            .find(|&i| !placed[i] && indegree[i] == 0);
        let Some(next) = next else {
            let node = structural
                .iter()
                .copied()
                .find(|&i| !placed[i])
                .map(|i| variables[i].name.clone())
                .unwrap_or_default();
            return Err(Error::Cycle { node });
        };
        placed[next] = true;
        order.push(next);
        for l in links.iter().filter(|l| !l.derived && l.from == next) {
            indegree[l.to] -= 1;
        }
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The edge points from the earlier node to the later one.
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStatus {
    Open,
    /// A non-collider on the path is in the conditioning set.
    ClosedByConditioning,
    /// A collider on the path has neither itself nor a descendant conditioned on.
    ClosedByCollider,
}

impl PathStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PathStatus::Open => "open",
            PathStatus::ClosedByConditioning => "closed-by-conditioning",
            PathStatus::ClosedByCollider => "closed-by-collider",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<String>,
    /// One entry per step, `directions[i]` relates `nodes[i]` and `nodes[i + 1]`.
    pub directions: Vec<Direction>,
    pub status: PathStatus,
    /// Every step points forward.
    pub causal: bool,
    /// Product of the coefficients (and derived weights) along the path.
    pub coefficient_product: f64,
    pub edge_labels: Vec<Option<String>>,
    /// Sign and weight each step contributes when it is a derived link.
    edge_weights: Vec<Option<f64>>,
    pub colliders: Vec<String>,
}

impl Path {
    pub fn is_open(&self) -> bool {
        self.status == PathStatus::Open
    }

    pub fn has_collider(&self) -> bool {
        !self.colliders.is_empty()
    }

    /// Product written in terms of the edge labels, e.g. `-χ·ψ`.
    ///
    /// Unlabeled structural edges contribute their numeric coefficient;
    /// derived links contribute only their weight.
    pub fn symbolic_product(&self) -> String {
        let mut negative = false;
        let mut factors: Vec<String> = Vec::new();
        for (label, weight) in self.edge_labels.iter().zip(&self.edge_weights) {
            match (label, weight) {
                (Some(label), _) => factors.push(label.clone()),
                (None, Some(w)) => {
                    if *w < 0.0 {
                        negative = !negative;
                    }
                    let magnitude = libm::fabs(*w);
                    if magnitude != 1.0 {
                        factors.push(format!("{magnitude}"));
                    }
                }
                (None, None) => {}
            }
        }
        let body = if factors.is_empty() {
            "1".to_string()
        } else {
            factors.join("·")
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nodes[0])?;
        for (dir, node) in self.directions.iter().zip(&self.nodes[1..]) {
            let arrow = match dir {
                Direction::Forward => "->",
                Direction::Backward => "<-",
            };
            write!(f, " {arrow} {node}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathOptions {
    pub max_nodes: usize,
    /// Permit derived variables (the gain score) in the conditioning set.
    pub allow_derived_conditioning: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            allow_derived_conditioning: false,
        }
    }
}

/// Lists every simple path between `x` and `y` with its d-separation status.
pub fn enumerate_paths<S: AsRef<str>>(
    model: &PathModel,
    x: &str,
    y: &str,
    conditioning: &[S],
) -> Result<Vec<Path>> {
    enumerate_paths_with(model, x, y, conditioning, &PathOptions::default())
}

pub fn enumerate_paths_with<S: AsRef<str>>(
    model: &PathModel,
    x: &str,
    y: &str,
    conditioning: &[S],
    options: &PathOptions,
) -> Result<Vec<Path>> {
    let n = model.variables.len();
    if n > options.max_nodes {
        return Err(Error::TooManyNodes {
            nodes: n,
            cap: options.max_nodes,
        });
    }
    let xi = model.index_of(x)?;
    let yi = model.index_of(y)?;
    if xi == yi {
        return Err(Error::DegenerateQuery(format!(
            "source and target are both {x}"
        )));
    }
    let mut given = vec![false; n];
    for name in conditioning {
        let name = name.as_ref();
        let i = model.index_of(name)?;
        if i == xi || i == yi {
            return Err(Error::DegenerateQuery(format!(
                "conditioning set contains endpoint {name}"
            )));
        }
        if model.variables[i].kind == VariableKind::Derived && !options.allow_derived_conditioning
        {
            return Err(Error::DegenerateQuery(format!(
                "conditioning on derived variable {name} requires an explicit opt-in"
            )));
        }
        given[i] = true;
    }

    // Undirected adjacency in canonical order: (neighbor, link index, direction).
    let mut adjacency: Vec<Vec<(usize, usize, Direction)>> = vec![Vec::new(); n];
    for (li, l) in model.links.iter().enumerate() {
        adjacency[l.from].push((l.to, li, Direction::Forward));
        adjacency[l.to].push((l.from, li, Direction::Backward));
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(node, _, _)| node);
    }
    // A collider is opened by conditioning on it or on any of its descendants.
    let opens_collider: Vec<bool> = (0..n)
        .map(|c| {
            model
                .descendants_or_self(c)
                .iter()
                .zip(&given)
                .any(|(&d, &g)| d && g)
        })
        .collect();

    let mut raw: Vec<(Vec<usize>, Vec<(usize, Direction)>)> = Vec::new();
    let mut on_path = vec![false; n];
    let mut nodes = vec![xi];
    let mut steps = Vec::new();
    on_path[xi] = true;
    walk(
        &adjacency,
        yi,
        &mut on_path,
        &mut nodes,
        &mut steps,
        &mut raw,
    );
    // Shortest first, then by the canonical node sequence.
    raw.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    Ok(raw
        .into_iter()
        .map(|(nodes, steps)| {
            let mut colliders = Vec::new();
            let mut blocked_by_conditioning = false;
            let mut blocked_by_collider = false;
            for k in 1..nodes.len() - 1 {
                let into_from_left = steps[k - 1].1 == Direction::Forward;
                let into_from_right = steps[k].1 == Direction::Backward;
                let node = nodes[k];
                if into_from_left && into_from_right {
                    colliders.push(model.variables[node].name.clone());
                    if !opens_collider[node] {
                        blocked_by_collider = true;
                    }
                } else if given[node] {
                    blocked_by_conditioning = true;
                }
            }
            let status = if blocked_by_conditioning {
                PathStatus::ClosedByConditioning
            } else if blocked_by_collider {
                PathStatus::ClosedByCollider
            } else {
                PathStatus::Open
            };
            let links: Vec<&Link> = steps.iter().map(|&(li, _)| &model.links[li]).collect();
            Path {
                nodes: nodes
                    .iter()
                    .map(|&i| model.variables[i].name.clone())
                    .collect(),
                directions: steps.iter().map(|&(_, d)| d).collect(),
                status,
                causal: steps.iter().all(|&(_, d)| d == Direction::Forward),
                coefficient_product: links.iter().map(|l| l.coefficient).product(),
                edge_labels: links.iter().map(|l| l.label.clone()).collect(),
                edge_weights: links
                    .iter()
                    .map(|l| {
                        if l.derived || l.label.is_none() {
                            Some(l.coefficient)
                        } else {
                            None
                        }
                    })
                    .collect(),
                colliders,
            }
        })
        .collect())
}

type RawPath = (Vec<usize>, Vec<(usize, Direction)>);

fn walk(
    adjacency: &[Vec<(usize, usize, Direction)>],
    target: usize,
    on_path: &mut [bool],
    nodes: &mut Vec<usize>,
    steps: &mut Vec<(usize, Direction)>,
    out: &mut Vec<RawPath>,
) {
    let here = *nodes.last().expect("path is never empty");
    for &(next, link, dir) in &adjacency[here] {
        if on_path[next] {
            continue;
        }
        nodes.push(next);
        steps.push((link, dir));
        if next == target {
            out.push((nodes.clone(), steps.clone()));
        } else {
            on_path[next] = true;
            walk(adjacency, target, on_path, nodes, steps, out);
            on_path[next] = false;
        }
        nodes.pop();
        steps.pop();
    }
}

/// True iff every path between `x` and `y` is closed given `conditioning`.
pub fn d_separated<S: AsRef<str>>(
    model: &PathModel,
    x: &str,
    y: &str,
    conditioning: &[S],
) -> Result<bool> {
    d_separated_with(model, x, y, conditioning, &PathOptions::default())
}

pub fn d_separated_with<S: AsRef<str>>(
    model: &PathModel,
    x: &str,
    y: &str,
    conditioning: &[S],
    options: &PathOptions,
) -> Result<bool> {
    Ok(enumerate_paths_with(model, x, y, conditioning, options)?
        .iter()
        .all(|p| !p.is_open()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{Preset, StructuralParams};

    fn fig1a() -> PathModel {
        Preset::Fig1A.model(&StructuralParams::default())
    }

    #[test]
    fn fig1a_has_five_structural_variables() {
        let m = fig1a();
        assert_eq!(m.structural_count(), 5);
        assert_eq!(m.variables().len(), 6);
        assert_eq!(m.edges().len(), 7);
    }

    #[test]
    fn both_members_of_a_pair_nonzero_is_simultaneity() {
        let spec = Preset::Fig3B
            .spec(&StructuralParams {
                eta: 0.3,
                ..Default::default()
            })
            .edge("Y2", "Y1", 0.2, Some("λ"));
        assert!(matches!(
            build_model(spec),
            Err(Error::Simultaneity { .. })
        ));
    }

    #[test]
    fn zero_member_of_a_pair_is_dropped() {
        let spec = Preset::Fig3B
            .spec(&StructuralParams {
                eta: 0.3,
                ..Default::default()
            })
            .edge("Y2", "Y1", 0.0, Some("λ"));
        let m = build_model(spec).unwrap();
        assert!(m.edge("Y2", "Y1").is_none());
        assert_eq!(m.coefficient("Y1", "Y2"), 0.3);
    }

    #[test]
    fn two_cycle_outside_the_pairs_is_a_cycle() {
        let spec = ModelSpec::new()
            .variable("T1", VariableKind::Exposure, 1.0)
            .variable("Y1", VariableKind::Outcome, 1.0)
            .edge("T1", "Y1", 1.0, None)
            .edge("Y1", "T1", 0.5, None);
        assert!(matches!(build_model(spec), Err(Error::Cycle { .. })));
    }

    #[test]
    fn unknown_endpoint() {
        let spec = ModelSpec::new()
            .variable("T1", VariableKind::Exposure, 1.0)
            .edge("T1", "Y9", 1.0, None);
        assert_eq!(
            build_model(spec),
            Err(Error::UnknownVariable("Y9".into()))
        );
    }

    #[test]
    fn gain_score_must_be_canonical() {
        let spec = ModelSpec::new()
            .variable("Y1", VariableKind::Outcome, 1.0)
            .variable("Y2", VariableKind::Outcome, 1.0)
            .derived("D", &[("Y1", 1.0), ("Y2", -1.0)]);
        assert!(matches!(build_model(spec), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn derived_with_noise_is_rejected() {
        let spec = ModelSpec::new()
            .variable("Y1", VariableKind::Outcome, 1.0)
            .variable("Y2", VariableKind::Outcome, 1.0)
            .variable("D", VariableKind::Derived, 0.5)
            .gain_score();
        assert!(matches!(build_model(spec), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn duplicate_variable() {
        let spec = ModelSpec::new()
            .variable("U", VariableKind::ExogenousLatent, 1.0)
            .variable("U", VariableKind::ExogenousLatent, 1.0);
        assert_eq!(
            build_model(spec),
            Err(Error::DuplicateVariable("U".into()))
        );
    }

    #[test]
    fn structural_order_respects_edges() {
        let m = Preset::Fig3C.model(&StructuralParams {
            lambda: 0.3,
            ..Default::default()
        });
        let order = m.structural_order();
        let pos = |n: &str| order.iter().position(|&v| v == n).unwrap();
        assert!(pos("Y2") < pos("Y1"));
        assert!(pos("U") < pos("T1"));
        let m = Preset::Fig3A.model(&StructuralParams {
            omega: 0.3,
            ..Default::default()
        });
        assert_eq!(m.structural_order(), ["U", "T1", "Y1", "T2", "Y2"]);
    }

    #[test]
    fn three_open_paths_from_t1_to_y2() {
        let paths = enumerate_paths::<&str>(&fig1a(), "T1", "Y2", &[]).unwrap();
        let open: Vec<String> = paths
            .iter()
            .filter(|p| p.is_open())
            .map(|p| p.to_string())
            .collect();
        assert_eq!(
            open,
            ["T1 -> Y2", "T1 <- U -> Y2", "T1 <- U -> T2 -> Y2"]
        );
        // The other four all pass through a collider at Y1 or at the gain score D.
        assert_eq!(paths.len(), 7);
        let closed: Vec<_> = paths.iter().filter(|p| !p.is_open()).collect();
        assert_eq!(closed.len(), 4);
        for p in closed {
            assert_eq!(p.status, PathStatus::ClosedByCollider);
            assert!(p.colliders == ["Y1"] || p.colliders == ["D"], "{p}");
        }
    }

    #[test]
    fn five_collider_free_paths_from_t1_to_d() {
        let p = StructuralParams::default();
        let paths = enumerate_paths(&fig1a(), "T1", "D", &["T2"]).unwrap();
        let trekish: Vec<&Path> = paths.iter().filter(|p| !p.has_collider()).collect();
        assert_eq!(trekish.len(), 5);
        let closed: Vec<_> = trekish.iter().filter(|p| !p.is_open()).collect();
        assert_eq!(closed.len(), 1);
        assert_eq!(closed[0].to_string(), "T1 <- U -> T2 -> Y2 -> D");
        assert_eq!(closed[0].status, PathStatus::ClosedByConditioning);
        let expect = p.delta * p.chi * p.gamma;
        assert!((closed[0].coefficient_product - expect).abs() < 1e-15);
        assert_eq!(trekish.iter().filter(|p| p.is_open()).count(), 4);
        assert!(paths
            .iter()
            .filter(|p| p.has_collider())
            .all(|p| !p.is_open()));
    }

    #[test]
    fn causal_flag_tracks_arrow_directions() {
        let paths = enumerate_paths::<&str>(&fig1a(), "T1", "D", &[]).unwrap();
        for p in &paths {
            assert_eq!(
                p.causal,
                p.directions.iter().all(|d| *d == Direction::Forward)
            );
        }
        let causal: Vec<String> = paths
            .iter()
            .filter(|p| p.causal)
            .map(|p| p.to_string())
            .collect();
        assert_eq!(causal, ["T1 -> Y1 -> D", "T1 -> Y2 -> D"]);
    }

    #[test]
    fn symbolic_products_carry_gain_score_signs() {
        let paths = enumerate_paths(&fig1a(), "T1", "D", &["T2"]).unwrap();
        let find = |s: &str| {
            paths
                .iter()
                .find(|p| p.to_string() == s)
                .unwrap()
                .symbolic_product()
        };
        assert_eq!(find("T1 <- U -> Y1 -> D"), "-χ·ψ");
        assert_eq!(find("T1 <- U -> Y2 -> D"), "χ·ψ");
        assert_eq!(find("T1 -> Y2 -> D"), "θ");
        assert_eq!(find("T1 -> Y1 -> D"), "-δ");
    }

    #[test]
    fn same_endpoint_is_degenerate() {
        assert!(matches!(
            enumerate_paths::<&str>(&fig1a(), "T1", "T1", &[]),
            Err(Error::DegenerateQuery(_))
        ));
        assert!(matches!(
            enumerate_paths(&fig1a(), "T1", "Y2", &["T1"]),
            Err(Error::DegenerateQuery(_))
        ));
    }

    #[test]
    fn conditioning_on_gain_score_needs_opt_in() {
        let m = fig1a();
        assert!(matches!(
            enumerate_paths(&m, "T1", "T2", &["D"]),
            Err(Error::DegenerateQuery(_))
        ));
        let opts = PathOptions {
            allow_derived_conditioning: true,
            ..Default::default()
        };
        // Conditioning on D (a descendant of colliders Y1, Y2) opens collider paths.
        let paths = enumerate_paths_with(&m, "T1", "T2", &["D", "U"], &opts).unwrap();
        assert!(paths.iter().any(|p| p.is_open() && p.has_collider()));
    }

    #[test]
    fn node_cap() {
        let opts = PathOptions {
            max_nodes: 4,
            ..Default::default()
        };
        assert!(matches!(
            enumerate_paths_with::<&str>(&fig1a(), "T1", "Y2", &[], &opts),
            Err(Error::TooManyNodes { nodes: 6, cap: 4 })
        ));
    }

    #[test]
    fn separation_examples() {
        let m = fig1a();
        assert!(!d_separated::<&str>(&m, "T1", "Y2", &[]).unwrap());
        assert!(d_separated(&m, "T1", "T2", &["U"]).unwrap());
        assert!(!d_separated::<&str>(&m, "T1", "T2", &[]).unwrap());

        let pair = build_model(
            ModelSpec::new()
                .variable("A", VariableKind::ExogenousLatent, 1.0)
                .variable("B", VariableKind::ExogenousLatent, 1.0),
        )
        .unwrap();
        assert!(d_separated::<&str>(&pair, "A", "B", &[]).unwrap());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let m = Preset::Fig2B.model(&StructuralParams::figure4(Preset::Fig2B));
        let a = enumerate_paths(&m, "T2", "D", &["T1"]).unwrap();
        let b = enumerate_paths(&m, "T2", "D", &["T1"]).unwrap();
        assert_eq!(a, b);
    }
}
