use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, MASS_TOLERANCE};
use crate::systems::StatePoint;

/// State-dependent selection probabilities `x ↦ (p_1(x), …, p_N(x))`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// Place-independent probabilities.
    Constant { probs: Vec<f64> },
    /// Two maps, `p_1(x) = clamp(a·x + b, lo, hi)` and `p_2 = 1 − p_1`.
    ClampedAffinePair { slope: Vec<f64>, intercept: f64, lo: f64, hi: f64 },
    /// `p_i(x) ∝ exp(a_i·x + b_i)`.
    SoftmaxAffine { slopes: Vec<Vec<f64>>, intercepts: Vec<f64> },
    /// `p_j(x) = Σ_k base_k(x) · table[k][j]`, each row of `table` a
    /// probability vector. Produced when flattening mixture kernels.
    Mixture { base: Box<WeightFunction>, table: Vec<Vec<f64>> },
}

/// Hölder bound `‖ϑ_x − ϑ_y‖ ≤ l |x − y|^ν` in full-L1 total variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCertificate {
    pub l: f64,
    pub nu: f64,
    pub derivation: &'static str,
}

impl WeightFunction {
    pub fn constant(probs: Vec<f64>) -> Result<Self> {
        check_probability(&probs)?;
        Ok(WeightFunction::Constant { probs })
    }

    /// Clamp bounds must satisfy `0 ≤ lo < hi ≤ 1`.
    pub fn clamped_affine_pair(slope: Vec<f64>, intercept: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(Error::InvalidValue(format!("clamp bounds need 0 ≤ lo < hi ≤ 1, got [{lo}, {hi}]")));
        }
        if slope.is_empty() || slope.iter().chain([&intercept]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("clamped pair parameters must be finite".into()));
        }
        Ok(WeightFunction::ClampedAffinePair { slope, intercept, lo, hi })
    }

    pub fn softmax_affine(slopes: Vec<Vec<f64>>, intercepts: Vec<f64>) -> Result<Self> {
        if slopes.is_empty() || slopes.len() != intercepts.len() {
            return Err(Error::InvalidValue("softmax needs one slope vector per intercept".into()));
        }
        let dim = slopes[0].len();
        if dim == 0 || slopes.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidValue("softmax slope vectors must share a nonzero length".into()));
        }
        if slopes.iter().flatten().chain(&intercepts).any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("softmax parameters must be finite".into()));
        }
        Ok(WeightFunction::SoftmaxAffine { slopes, intercepts })
    }

    pub fn mixture(base: WeightFunction, table: Vec<Vec<f64>>) -> Result<Self> {
        if table.len() != base.count() {
            return Err(Error::DimensionMismatch { expected: base.count(), found: table.len() });
        }
        let width = table.first().map_or(0, Vec::len);
        for row in &table {
            if row.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: row.len() });
            }
            check_probability(row)?;
        }
        Ok(WeightFunction::Mixture { base: Box::new(base), table })
    }

    /// Number of indices the weights range over.
    pub fn count(&self) -> usize {
        match self {
            WeightFunction::Constant { probs } => probs.len(),
            WeightFunction::ClampedAffinePair { .. } => 2,
            WeightFunction::SoftmaxAffine { intercepts, .. } => intercepts.len(),
            WeightFunction::Mixture { table, .. } => table.first().map_or(0, Vec::len),
        }
    }

    /// Dimension of the state space the weights read, if constrained.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            WeightFunction::Constant { .. } => None,
            WeightFunction::ClampedAffinePair { slope, .. } => Some(slope.len()),
            WeightFunction::SoftmaxAffine { slopes, .. } => Some(slopes[0].len()),
            WeightFunction::Mixture { base, .. } => base.input_dim(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            WeightFunction::Constant { .. } => true,
            WeightFunction::ClampedAffinePair { slope, .. } => slope.iter().all(|a| *a == 0.0),
            WeightFunction::SoftmaxAffine { slopes, .. } => {
                slopes.windows(2).all(|w| w[0] == w[1])
            }
            WeightFunction::Mixture { base, .. } => base.is_constant(),
        }
    }

    pub fn eval(&self, x: &StatePoint) -> Vec<f64> {
        match self {
            WeightFunction::Constant { probs } => probs.clone(),
            WeightFunction::ClampedAffinePair { slope, intercept, lo, hi } => {
                let p = (dot(slope, x.coords()) + intercept).clamp(*lo, *hi);
                vec![p, 1.0 - p]
            }
            WeightFunction::SoftmaxAffine { slopes, intercepts } => {
                let scores: Vec<f64> = slopes.iter().zip(intercepts).map(|(a, b)| dot(a, x.coords()) + b).collect();
                let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
                let total: f64 = exps.iter().sum();
                exps.into_iter().map(|e| e / total).collect()
            }
            WeightFunction::Mixture { base, table } => mix(&base.eval(x), table),
        }
    }

    /// `ϑ_x` as a measure over map indices.
    pub fn measure_at(&self, x: &StatePoint) -> DiscreteMeasure<usize> {
        DiscreteMeasure::from_sorted_unchecked(self.eval(x).into_iter().enumerate().collect())
    }

    /// Closed-form TV-Hölder constant of `x ↦ ϑ_x`.
    pub fn holder_certificate(&self) -> HolderCertificate {
        match self {
            WeightFunction::Constant { .. } => HolderCertificate { l: 0.0, nu: 1.0, derivation: "constant weights" },
            WeightFunction::ClampedAffinePair { slope, .. } => HolderCertificate {
                l: 2.0 * dot(slope, slope).sqrt(),
                nu: 1.0,
                derivation: "‖ϑ_x − ϑ_y‖ = 2|p_1(x) − p_1(y)| ≤ 2|a||x − y| (clamp is 1-Lipschitz)",
            },
            WeightFunction::SoftmaxAffine { slopes, .. } => {
                let mut diam: f64 = 0.0;
                for a in slopes {
                    for b in slopes {
                        let d: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                        diam = diam.max(d);
                    }
                }
                HolderCertificate {
                    l: diam,
                    nu: 1.0,
                    derivation: "directional derivative Σ_i p_i |(a_i − ā)·u| ≤ max_ij |a_i − a_j|",
                }
            }
            WeightFunction::Mixture { base, .. } => {
                let inner = base.holder_certificate();
                HolderCertificate {
                    derivation: "mixing with a stochastic table does not increase total variation",
                    ..inner
                }
            }
        }
    }

    /// Extreme points of `{ϑ_x : x ∈ R^d}` when the range is a known polytope:
    /// any linear functional of the weights attains its supremum over `x` at
    /// one of these. `None` for softmax weights.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            WeightFunction::Constant { probs } => Some(vec![probs.clone()]),
            WeightFunction::ClampedAffinePair { slope, intercept, lo, hi } => {
                if slope.iter().all(|a| *a == 0.0) {
                    let p = intercept.clamp(*lo, *hi);
                    Some(vec![vec![p, 1.0 - p]])
                } else {
                    Some(vec![vec![*lo, 1.0 - lo], vec![*hi, 1.0 - hi]])
                }
            }
            WeightFunction::SoftmaxAffine { .. } => None,
            WeightFunction::Mixture { base, table } => {
                base.vertices().map(|vs| vs.iter().map(|v| mix(v, table)).collect())
            }
        }
    }
}

fn mix(base: &[f64], table: &[Vec<f64>]) -> Vec<f64> {
    let width = table.first().map_or(0, Vec::len);
    let mut out = vec![0.0; width];
    for (p, row) in base.iter().zip(table) {
        for (o, t) in out.iter_mut().zip(row) {
            *o += p * t;
        }
    }
    out
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(u, v)| u * v).sum()
}

fn check_probability(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidValue("probability vector is empty".into()));
    }
    if let Some((index, w)) = p.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeight { index, weight: *w });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidValue(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(())
}
