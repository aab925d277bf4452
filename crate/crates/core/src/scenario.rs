//! Scenario files.
//!
//! A scenario is TOML (or the JSON manifest written by a previous run) with
//! the layout
//!
//! ```toml
//! seed = 20240611
//! dim = 1
//!
//! [system]
//! kind = "finite_affine"
//! maps = [ { M = [[0.3]], Q = [0.0] }, { M = [[0.5]], Q = [1.0] } ]
//!
//! [system.weights]
//! kind = "clamped_affine_pair"
//! a = [-0.3]
//! b = 0.5
//! lo = 0.2
//! hi = 0.8
//!
//! [experiment]
//! steps = 40
//! replicas = 10000
//! ```
//!
//! Mixture kernels use `kind = "mixture_affine"` with
//! `components = [ { atoms = [ { M, Q, w } ] } ]`. Any field can be replaced
//! before validation with [`Scenario::load_with`] overrides such as
//! `experiment.horizon=300` or `system.maps[0].Q=[0.5]`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::diagnostics::Region;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::perpetuity::MixtureAffineKernel;
use crate::systems::{AffineMap, PlaceDependentSystem, StatePoint, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub seed: u64,
    pub dim: usize,
    pub system: SystemSpec,
    #[serde(default)]
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    FiniteAffine { maps: Vec<MapSpec>, weights: WeightSpec },
    MixtureAffine { components: Vec<ComponentSpec>, weights: WeightSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { probs: Vec<f64> },
    ClampedAffinePair { a: Vec<f64>, b: f64, lo: f64, hi: f64 },
    SoftmaxAffine { a: Vec<Vec<f64>>, b: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Run parameters. Missing points and regions default to `−5·1`, `5·1` and
/// `[−5, 5]^d` and are filled in by [`Scenario::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    /// Chain length for `simulate`, `converge` and `perpetuity`.
    pub steps: usize,
    /// Replicas for `converge` and for the stopping times of `couple`.
    pub replicas: usize,
    /// Replicas whose full paths are written by `simulate`, `couple` and `perpetuity`.
    pub paths: usize,
    pub burn_in: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    pub pairs: usize,
    /// Length of coupled runs in `couple`.
    pub horizon: usize,
    pub beta: f64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            steps: 40,
            replicas: 1000,
            paths: 20,
            burn_in: 1000,
            samples: 10_000,
            x0: None,
            y0: None,
            region: None,
            pairs: 1000,
            horizon: 200,
            beta: 0.95,
        }
    }
}

/// A validated system, finite or mixture.
#[derive(Debug, Clone)]
pub enum Model {
    Finite(PlaceDependentSystem),
    Mixture(MixtureAffineKernel),
}

impl Model {
    /// The finite system driving all simulations.
    pub fn system(&self) -> Result<PlaceDependentSystem> {
        match self {
            Model::Finite(s) => Ok(s.clone()),
            Model::Mixture(k) => k.to_system(),
        }
    }

    pub fn kernel(&self) -> Option<&MixtureAffineKernel> {
        match self {
            Model::Mixture(k) => Some(k),
            Model::Finite(_) => None,
        }
    }
}

fn invalid(key: impl Into<String>, message: impl ToString) -> Error {
    Error::InvalidScenario { key: key.into(), message: message.to_string() }
}

/// Applies `path=value` to a JSON tree. `path` is dotted with optional
/// `[i]` indices; `value` is JSON, or a bare string when it does not parse.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "override must look like key=value"))?;
    let path = path.trim();
    let value: Value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (depth, seg) in segments.iter().enumerate() {
        let last = depth + 1 == segments.len();
        let (field, indices) = split_indices(seg).ok_or_else(|| invalid(path, "malformed index"))?;
        if !field.is_empty() {
            let obj = node.as_object_mut().ok_or_else(|| invalid(path, format!("`{field}` is not inside a table")))?;
            if last && indices.is_empty() {
                obj.insert(field.to_string(), value);
                return Ok(());
            }
            node = obj.entry(field.to_string()).or_insert_with(|| Value::Object(Default::default()));
        }
        for (k, i) in indices.iter().enumerate() {
            let len = node.as_array().map(Vec::len);
            let arr = node.as_array_mut().ok_or_else(|| invalid(path, "indexing into a non-array"))?;
            let slot = arr.get_mut(*i).ok_or_else(|| invalid(path, format!("index {i} out of range (length {})", len.unwrap_or(0))))?;
            if last && k + 1 == indices.len() {
                *slot = value;
                return Ok(());
            }
            node = slot;
        }
    }
    Err(invalid(path, "empty override path"))
}

fn split_indices(seg: &str) -> Option<(&str, Vec<usize>)> {
    let field_end = seg.find('[').unwrap_or(seg.len());
    let (field, mut rest) = seg.split_at(field_end);
    let mut indices = Vec::new();
    while !rest.is_empty() {
        let close = rest.find(']')?;
        indices.push(rest.get(1..close)?.parse().ok()?);
        rest = &rest[close + 1..];
        if !rest.is_empty() && !rest.starts_with('[') {
            return None;
        }
    }
    Some((field, indices))
}

impl Scenario {
    /// Parses TOML, or JSON when the text starts with `{`. A run manifest is
    /// accepted as well: its `scenario` entry is used.
    pub fn parse_value(text: &str) -> Result<Value> {
        if text.trim_start().starts_with('{') {
            let mut v: Value = serde_json::from_str(text).map_err(|e| invalid("<json>", e))?;
            if let Some(inner) = v.get_mut("scenario").filter(|_| v_has_manifest_marker(text)) {
                return Ok(inner.take());
            }
            Ok(v)
        } else {
            let t: toml::Value = toml::from_str(text).map_err(|e| invalid("<toml>", e.message()))?;
            serde_json::to_value(t).map_err(|e| invalid("<toml>", e))
        }
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
            let key = e.path().to_string();
            invalid(if key == "." { "<root>".to_string() } else { key }, e.into_inner())
        })?;
        scenario.resolve()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_value(Self::parse_value(text)?)
    }

    /// Loads `path` and applies `overrides` in order before validation.
    pub fn load_with(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut value = Self::parse_value(&text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    /// Fills in defaulted points and region and validates everything.
    pub fn resolve(mut self) -> Result<Self> {
        let d = self.dim;
        if d == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        let e = &mut self.experiment;
        e.x0.get_or_insert_with(|| vec![-5.0; d]);
        e.y0.get_or_insert_with(|| vec![5.0; d]);
        e.region.get_or_insert_with(|| RegionSpec { lo: vec![-5.0; d], hi: vec![5.0; d] });
        self.model()?;
        self.x0()?;
        self.y0()?;
        self.region()?;
        let e = &self.experiment;
        if !(e.beta > 0.0 && e.beta < 1.0) {
            return Err(invalid("experiment.beta", format!("must lie in (0, 1), got {}", e.beta)));
        }
        for (key, v) in [("experiment.burn_in", e.burn_in), ("experiment.samples", e.samples), ("experiment.pairs", e.pairs)] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        Ok(self)
    }

    fn point(&self, key: &str, v: &Option<Vec<f64>>) -> Result<StatePoint> {
        let v = v.clone().ok_or_else(|| invalid(key, "missing"))?;
        if v.len() != self.dim {
            return Err(invalid(key, format!("has {} coordinates, dim is {}", v.len(), self.dim)));
        }
        StatePoint::new(v).map_err(|e| invalid(key, e))
    }

    pub fn x0(&self) -> Result<StatePoint> {
        self.point("experiment.x0", &self.experiment.x0)
    }

    pub fn y0(&self) -> Result<StatePoint> {
        self.point("experiment.y0", &self.experiment.y0)
    }

    pub fn region(&self) -> Result<Region> {
        let r = self.experiment.region.as_ref().ok_or_else(|| invalid("experiment.region", "missing"))?;
        if r.lo.len() != self.dim {
            return Err(invalid("experiment.region", format!("has dimension {}, dim is {}", r.lo.len(), self.dim)));
        }
        Region::new(r.lo.clone(), r.hi.clone()).map_err(|e| invalid("experiment.region", e))
    }

    pub fn model(&self) -> Result<Model> {
        let d = self.dim;
        let build_map = |key: String, m: &[Vec<f64>], q: &[f64]| -> Result<AffineMap> {
            if q.len() != d {
                return Err(invalid(format!("{key}.Q"), format!("has length {}, dim is {d}", q.len())));
            }
            AffineMap::new(m, q.to_vec()).map_err(|e| invalid(format!("{key}.M"), e))
        };
        match &self.system {
            SystemSpec::FiniteAffine { maps, weights } => {
                if maps.is_empty() {
                    return Err(invalid("system.maps", "needs at least one map"));
                }
                let maps = maps
                    .iter()
                    .enumerate()
                    .map(|(i, s)| build_map(format!("system.maps[{i}]"), &s.m, &s.q))
                    .collect::<Result<Vec<_>>>()?;
                let w = build_weights(weights, d, maps.len())?;
                PlaceDependentSystem::new(maps, w).map(Model::Finite).map_err(|e| invalid("system", e))
            }
            SystemSpec::MixtureAffine { components, weights } => {
                if components.is_empty() {
                    return Err(invalid("system.components", "needs at least one component"));
                }
                let mut built = Vec::with_capacity(components.len());
                for (k, c) in components.iter().enumerate() {
                    let key = format!("system.components[{k}]");
                    if c.atoms.is_empty() {
                        return Err(invalid(format!("{key}.atoms"), "needs at least one atom"));
                    }
                    let atoms = c
                        .atoms
                        .iter()
                        .enumerate()
                        .map(|(j, a)| Ok((build_map(format!("{key}.atoms[{j}]"), &a.m, &a.q)?, a.w)))
                        .collect::<Result<Vec<_>>>()?;
                    let nu = DiscreteMeasure::new(atoms).map_err(|e| invalid(format!("{key}.atoms"), e))?;
                    if !nu.is_probability() {
                        return Err(invalid(format!("{key}.atoms"), format!("weights sum to {}, not 1", nu.mass())));
                    }
                    built.push(nu);
                }
                let w = build_weights(weights, d, built.len())?;
                MixtureAffineKernel::new(built, w).map(Model::Mixture).map_err(|e| invalid("system", e))
            }
        }
    }

    /// Hex SHA-256 of the resolved scenario as compact JSON.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn v_has_manifest_marker(text: &str) -> bool {
    serde_json::from_str::<Value>(text).ok().is_some_and(|v| v.get("artifact_version").is_some())
}

fn build_weights(spec: &WeightSpec, dim: usize, count: usize) -> Result<WeightFunction> {
    let key = "system.weights";
    let w = match spec {
        WeightSpec::Constant { probs } => WeightFunction::constant(probs.clone()),
        WeightSpec::ClampedAffinePair { a, b, lo, hi } => {
            if a.len() != dim {
                return Err(invalid(format!("{key}.a"), format!("has length {}, dim is {dim}", a.len())));
            }
            WeightFunction::clamped_affine_pair(a.clone(), *b, *lo, *hi)
        }
        WeightSpec::SoftmaxAffine { a, b } => {
            if let Some((i, row)) = a.iter().enumerate().find(|(_, r)| r.len() != dim) {
                return Err(invalid(format!("{key}.a[{i}]"), format!("has length {}, dim is {dim}", row.len())));
            }
            WeightFunction::softmax_affine(a.clone(), b.clone())
        }
    }
    .map_err(|e| invalid(key, e))?;
    if w.count() != count {
        return Err(invalid(key, format!("defines {} probabilities for {count} maps or components", w.count())));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
seed = 7
dim = 1
[system]
kind = "finite_affine"
maps = [ { M = [[0.3]], Q = [0.0] }, { M = [[0.5]], Q = [1.0] } ]
[system.weights]
kind = "clamped_affine_pair"
a = [-0.3]
b = 0.5
lo = 0.2
hi = 0.8
"#;

    #[test]
    fn parses_and_resolves_defaults() {
        let s = Scenario::from_text(CANONICAL).unwrap();
        assert_eq!(s.experiment.x0, Some(vec![-5.0]));
        assert_eq!(s.experiment.region.as_ref().unwrap().hi, vec![5.0]);
        let sys = s.model().unwrap().system().unwrap();
        assert_eq!(sys.maps().len(), 2);
    }

    #[test]
    fn json_round_trip_keeps_fingerprint() {
        let s = Scenario::from_text(CANONICAL).unwrap();
        let json = serde_json::to_string_pretty(&s).unwrap();
        let back = Scenario::from_text(&json).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.fingerprint(), back.fingerprint());
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = CANONICAL.replace("lo = 0.2", "low = 0.2");
        match Scenario::from_text(&bad) {
            Err(Error::InvalidScenario { key, message }) => {
                assert!(key.starts_with("system"), "{key}");
                assert!(message.contains("low"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = CANONICAL.replace("Q = [1.0]", "Q = [1.0, 2.0]");
        match Scenario::from_text(&bad) {
            Err(Error::InvalidScenario { key, .. }) => assert_eq!(key, "system.maps[1].Q"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = CANONICAL.replace("seed = 7", "seed = \"seven\"");
        match Scenario::from_text(&bad) {
            Err(Error::InvalidScenario { key, .. }) => assert_eq!(key, "seed"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overrides_reach_every_field() {
        let mut v = Scenario::parse_value(CANONICAL).unwrap();
        apply_override(&mut v, "experiment.horizon=300").unwrap();
        apply_override(&mut v, "system.maps[0].Q=[0.25]").unwrap();
        apply_override(&mut v, "system.weights.lo=0.1").unwrap();
        apply_override(&mut v, "name=renamed").unwrap();
        let s = Scenario::from_value(v).unwrap();
        assert_eq!(s.experiment.horizon, 300);
        assert_eq!(s.name.as_deref(), Some("renamed"));
        match &s.system {
            SystemSpec::FiniteAffine { maps, weights } => {
                assert_eq!(maps[0].q, vec![0.25]);
                assert!(matches!(weights, WeightSpec::ClampedAffinePair { lo, .. } if *lo == 0.1));
            }
            _ => panic!(),
        }
        let mut v = Scenario::parse_value(CANONICAL).unwrap();
        assert!(apply_override(&mut v, "system.maps[5].Q=[0.0]").is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let bad = CANONICAL.replace("hi = 0.8", "hi = 0.1");
        assert!(matches!(Scenario::from_text(&bad), Err(Error::InvalidScenario { .. })));
    }
}
