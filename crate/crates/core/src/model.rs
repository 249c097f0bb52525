//! Lattice models: masses, springs tagged with integer cell offsets, and the
//! built-in chains and lattices used throughout the test suite.
//!
//! A model enters the crate as a [`RawModel`] (what a JSON file holds) and is
//! turned into a [`LatticeModel`] by [`RawModel::into_model`], which validates
//! every invariant, canonicalizes spring orientation, and merges parallel
//! springs. Everything downstream takes a `LatticeModel` and may assume it is
//! valid.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Integer cell displacement in lattice coordinates.
pub type Offset = Vec<i32>;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["mono1d", "chain2n", "trichain3", "penta2d"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassNode {
    pub id: String,
    pub mass: f64,
}

/// A spring from node `a` in the reference cell to node `b` in the cell
/// displaced by `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub a: String,
    pub b: String,
    pub offset: Offset,
    pub k: f64,
    /// Name used by constant overrides (`K1`, `K2`, ...). Optional in files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Unvalidated model, exactly as read from a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawModel {
    pub name: String,
    pub dimension: usize,
    pub nodes: Vec<MassNode>,
    pub springs: Vec<Spring>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    EmptyModel,
    BadDimension,
    DuplicateNodeId,
    NonPositiveMass,
    UnknownNodeId,
    OffsetDimensionMismatch,
    NegativeStiffness,
    ZeroSelfSpring,
    IsolatedNode,
}

impl DiagnosticKind {
    pub fn is_error(self) -> bool {
        !matches!(self, DiagnosticKind::IsolatedNode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.kind.is_error()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = if self.is_error() { "error" } else { "warning" };
        write!(f, "{level} [{:?}]: {}", self.kind, self.message)
    }
}

fn offset_is_zero(offset: &[i32]) -> bool {
    offset.iter().all(|&c| c == 0)
}

/// True when the first nonzero component is positive. The zero offset is not
/// in the positive half-space.
fn offset_is_positive(offset: &[i32]) -> bool {
    offset.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Returns the physically identical spring in canonical orientation.
///
/// `rank` is the total order on node ids; for models it is the node position.
pub fn canonicalize<F>(spring: &Spring, rank: F) -> Result<Spring, ModelError>
where
    F: Fn(&str) -> Option<usize>,
{
    let ra = rank(&spring.a).ok_or_else(|| ModelError::UnknownNodeId(spring.a.clone()))?;
    let rb = rank(&spring.b).ok_or_else(|| ModelError::UnknownNodeId(spring.b.clone()))?;
    let flip = if offset_is_zero(&spring.offset) {
        if ra == rb {
            return Err(ModelError::ZeroSelfSpring(spring.a.clone()));
        }
        ra > rb
    } else {
        !offset_is_positive(&spring.offset)
    };
    if !flip {
        return Ok(spring.clone());
    }
    Ok(Spring {
        a: spring.b.clone(),
        b: spring.a.clone(),
        offset: spring.offset.iter().map(|c| -c).collect(),
        k: spring.k,
        label: spring.label.clone(),
    })
}

/// Checks every model invariant. Errors and warnings are both returned; the
/// model is usable iff no entry [`is_error`](Diagnostic::is_error).
pub fn validate(model: &RawModel) -> Vec<Diagnostic> {
    use DiagnosticKind::*;
    let mut diags = Vec::new();

    if !(1..=3).contains(&model.dimension) {
        diags.push(Diagnostic::new(
            BadDimension,
            format!("dimension must be 1, 2 or 3, got {}", model.dimension),
        ));
    }
    if model.nodes.is_empty() {
        diags.push(Diagnostic::new(EmptyModel, "model has no nodes"));
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in model.nodes.iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            diags.push(Diagnostic::new(
                DuplicateNodeId,
                format!("node id `{}` appears more than once", node.id),
            ));
        }
        if !(node.mass > 0.0 && node.mass.is_finite()) {
            diags.push(Diagnostic::new(
                NonPositiveMass,
                format!(
                    "node `{}` has mass {}; masses must be positive",
                    node.id, node.mass
                ),
            ));
        }
    }

    let mut incident = vec![false; model.nodes.len()];
    for (i, s) in model.springs.iter().enumerate() {
        let tag = spring_tag(i, s);
        for id in [&s.a, &s.b] {
            match index.get(id.as_str()) {
                Some(&j) => incident[j] = true,
                None => diags.push(Diagnostic::new(
                    UnknownNodeId,
                    format!("{tag} references unknown node `{id}`"),
                )),
            }
        }
        if s.offset.len() != model.dimension {
            diags.push(Diagnostic::new(
                OffsetDimensionMismatch,
                format!(
                    "{tag} has offset of length {} in a {}-dimensional model",
                    s.offset.len(),
                    model.dimension
                ),
            ));
        }
        if !(s.k >= 0.0 && s.k.is_finite()) {
            diags.push(Diagnostic::new(
                NegativeStiffness,
                format!("{tag} has stiffness {}; stiffness must be nonnegative", s.k),
            ));
        }
        if s.a == s.b && offset_is_zero(&s.offset) {
            diags.push(Diagnostic::new(
                ZeroSelfSpring,
                format!("{tag} connects `{}` to itself within one cell", s.a),
            ));
        }
    }

    for (node, touched) in model.nodes.iter().zip(&incident) {
        if !touched {
            diags.push(Diagnostic::new(
                IsolatedNode,
                format!(
                    "node `{}` has no springs; it adds a flat band at zero frequency",
                    node.id
                ),
            ));
        }
    }
    diags
}

fn spring_tag(i: usize, s: &Spring) -> String {
    match &s.label {
        Some(label) => format!("spring {label} (#{})", i + 1),
        None => format!("spring #{}", i + 1),
    }
}

/// A canonical spring with node references resolved to coordinate indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub offset: Offset,
    pub k: f64,
    pub label: Option<String>,
}

impl Bond {
    pub fn is_internal(&self) -> bool {
        offset_is_zero(&self.offset)
    }
}

/// A validated, canonical lattice model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    name: String,
    dimension: usize,
    nodes: Vec<MassNode>,
    bonds: Vec<Bond>,
}

impl RawModel {
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }

    /// Validates, canonicalizes and merges duplicate springs (summing `k`).
    pub fn into_model(self) -> Result<LatticeModel, ModelError> {
        let errors: Vec<_> = validate(&self)
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect();
        if !errors.is_empty() {
            return Err(ModelError::Invalid(errors));
        }
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let rank = |id: &str| index.get(id).copied();

        let mut bonds: Vec<Bond> = Vec::with_capacity(self.springs.len());
        let mut seen: HashMap<(usize, usize, Offset), usize> = HashMap::new();
        for spring in &self.springs {
            let c = canonicalize(spring, rank)?;
            let (a, b) = (index[c.a.as_str()], index[c.b.as_str()]);
            match seen.get(&(a, b, c.offset.clone())) {
                Some(&j) => {
                    let merged = &mut bonds[j];
                    merged.k += c.k;
                    if merged.label.is_none() {
                        merged.label = c.label;
                    }
                }
                None => {
                    seen.insert((a, b, c.offset.clone()), bonds.len());
                    bonds.push(Bond {
                        a,
                        b,
                        offset: c.offset,
                        k: c.k,
                        label: c.label,
                    });
                }
            }
        }
        Ok(LatticeModel {
            name: self.name,
            dimension: self.dimension,
            nodes: self.nodes,
            bonds,
        })
    }
}

impl LatticeModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes(&self) -> &[MassNode] {
        &self.nodes
    }

    /// Number of coordinates (and bands).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn springs(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn masses(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mass).collect()
    }

    /// Largest absolute offset component per direction.
    pub fn max_offset(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.dimension];
        for bond in &self.bonds {
            for (m, c) in out.iter_mut().zip(&bond.offset) {
                *m = (*m).max(c.unsigned_abs());
            }
        }
        out
    }

    pub fn to_raw(&self) -> RawModel {
        RawModel {
            name: self.name.clone(),
            dimension: self.dimension,
            nodes: self.nodes.clone(),
            springs: self
                .bonds
                .iter()
                .map(|b| Spring {
                    a: self.nodes[b.a].id.clone(),
                    b: self.nodes[b.b].id.clone(),
                    offset: b.offset.clone(),
                    k: b.k,
                    label: b.label.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawModel = serde_json::from_str(text)?;
        raw.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("model serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Returns a copy with stiffnesses and masses replaced.
    ///
    /// A name matches, in order of precedence: every spring carrying that
    /// label, the node with that id, or `spring:<i>` for the i-th spring
    /// (1-based, canonical order).
    pub fn with_overrides<S: AsRef<str>>(
        &self,
        assignments: &[(S, f64)],
    ) -> Result<LatticeModel, ModelError> {
        let mut out = self.clone();
        for (name, value) in assignments {
            let name = name.as_ref();
            let negative = || ModelError::NegativeValue {
                name: name.to_string(),
                value: *value,
            };
            if !value.is_finite() {
                return Err(negative());
            }
            let labelled: Vec<usize> = (0..out.bonds.len())
                .filter(|&i| out.bonds[i].label.as_deref() == Some(name))
                .collect();
            if !labelled.is_empty() {
                if *value < 0.0 {
                    return Err(negative());
                }
                for i in labelled {
                    out.bonds[i].k = *value;
                }
            } else if let Some(node) = out.nodes.iter_mut().find(|n| n.id == name) {
                if *value <= 0.0 {
                    return Err(negative());
                }
                node.mass = *value;
            } else if let Some(i) = parse_spring_index(name).filter(|&i| i < out.bonds.len()) {
                if *value < 0.0 {
                    return Err(negative());
                }
                out.bonds[i].k = *value;
            } else {
                return Err(ModelError::UnknownConstantName(name.to_string()));
            }
        }
        Ok(out)
    }
}

fn parse_spring_index(name: &str) -> Option<usize> {
    let i: usize = name.strip_prefix("spring:")?.parse().ok()?;
    i.checked_sub(1)
}

const PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Default stiffness of the spring labelled `K<index>`: the index-th prime.
pub fn default_stiffness(index: usize) -> f64 {
    PRIMES[index - 1] as f64
}

fn labelled(index: usize, a: &str, b: &str, offset: &[i32]) -> Spring {
    Spring {
        a: a.to_string(),
        b: b.to_string(),
        offset: offset.to_vec(),
        k: default_stiffness(index),
        label: Some(format!("K{index}")),
    }
}

fn unit_masses(ids: &[&str]) -> Vec<MassNode> {
    ids.iter()
        .map(|id| MassNode {
            id: id.to_string(),
            mass: 1.0,
        })
        .collect()
}

/// One of the reference models. Masses default to 1 and the spring labelled
/// `Ki` defaults to the i-th prime.
pub fn builtin(name: &str) -> Result<LatticeModel, ModelError> {
    let (dimension, nodes, springs) = match name {
        "mono1d" => (1, unit_masses(&["m"]), vec![labelled(1, "m", "m", &[1])]),
        "chain2n" => (
            1,
            unit_masses(&["m"]),
            vec![labelled(1, "m", "m", &[1]), labelled(2, "m", "m", &[2])],
        ),
        "trichain3" => (
            1,
            unit_masses(&["m1", "m2", "m3"]),
            vec![
                labelled(1, "m1", "m2", &[0]),
                labelled(2, "m2", "m3", &[0]),
                labelled(3, "m3", "m1", &[1]),
                labelled(4, "m1", "m3", &[0]),
                labelled(5, "m1", "m1", &[2]),
                labelled(6, "m2", "m2", &[2]),
                labelled(7, "m3", "m3", &[3]),
            ],
        ),
        "penta2d" => (
            2,
            unit_masses(&["m1", "m2", "m3", "m4", "m5"]),
            penta2d_springs(),
        ),
        other => return Err(ModelError::UnknownBuiltin(other.to_string())),
    };
    RawModel {
        name: name.to_string(),
        dimension,
        nodes,
        springs,
    }
    .into_model()
}

/// Connectivity of the five-mass square lattice, one entry per nonzero cell
/// of its spring-constant tables. Rows are reference-cell masses, columns are
/// masses of the displaced cell.
fn penta2d_springs() -> Vec<Spring> {
    let table: [(usize, &str, &str, [i32; 2]); 25] = [
        (1, "m1", "m2", [0, 0]),
        (2, "m2", "m3", [0, 0]),
        (3, "m3", "m4", [0, 0]),
        (4, "m1", "m4", [0, 0]),
        (5, "m1", "m5", [0, 1]),
        (6, "m2", "m5", [1, 1]),
        (7, "m3", "m5", [1, 0]),
        (8, "m4", "m5", [0, 0]),
        (9, "m5", "m5", [0, 1]),
        (10, "m5", "m5", [1, 0]),
        (11, "m1", "m1", [2, 0]),
        (12, "m1", "m4", [2, 0]),
        (13, "m4", "m4", [2, 0]),
        (14, "m4", "m5", [2, 0]),
        (15, "m5", "m5", [2, 0]),
        (16, "m1", "m1", [2, 1]),
        (17, "m1", "m4", [2, 1]),
        (18, "m4", "m4", [2, 1]),
        (19, "m5", "m5", [2, 1]),
        (20, "m1", "m1", [0, 2]),
        (21, "m4", "m4", [0, 2]),
        (22, "m5", "m5", [0, 2]),
        (23, "m1", "m1", [1, 2]),
        (24, "m1", "m4", [1, 2]),
        (25, "m4", "m5", [1, 2]),
    ];
    table
        .iter()
        .map(|(i, a, b, off)| labelled(*i, a, b, off))
        .collect()
}
