//! Probability metrics on finitely supported laws and rate fitting.
//!
//! `fm_distance` is the Fortet–Mourier (bounded Lipschitz) distance
//! `sup { ∫ f d(a − b) : |f| ≤ 1, Lip(f) ≤ 1 }`, equal to optimal transport
//! with cost `min(|u − v|, 2)`. `w1_distance` is Wasserstein-1.
//!
//! In dimension one both are computed exactly in `O(K log K)` without a
//! size limit. Elsewhere they go through the transportation simplex, limited
//! to [`TRANSPORT_SUPPORT_CAP`] atoms across both laws.

mod line;
mod rate;
mod transport;

pub use rate::{fit_exponential, RateFit, MIN_FIT_POINTS};
pub use transport::TransportPlan;

use crate::error::{Error, Result};
use crate::measures::{compensated_sum, MASS_TOLERANCE};
use crate::systems::{StateLaw, StatePoint};

pub const TRANSPORT_SUPPORT_CAP: usize = 1024;

/// Cost cap for the Fortet–Mourier distance.
pub const FM_TRUNCATION: f64 = 2.0;

/// A finitely supported probability law with sorted, distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    points: Vec<StatePoint>,
    weights: Vec<f64>,
}

impl EmpiricalLaw {
    /// Weights must be nonnegative and sum to one within `1e-12`. Repeated
    /// points are merged.
    pub fn new(points: Vec<StatePoint>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: weights.len() });
        }
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if let Some((index, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeight { index, weight: *w });
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidValue(format!("empirical law weights sum to {total}, not 1")));
        }
        let mut pairs: Vec<(StatePoint, f64)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut points: Vec<StatePoint> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            if points.last() == Some(&p) {
                *weights.last_mut().unwrap() += w;
            } else {
                points.push(p);
                weights.push(w);
            }
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights on the samples; a point drawn `k` times out of `n`
    /// gets weight `k / n`.
    pub fn from_samples(mut samples: Vec<StatePoint>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let dim = samples[0].dim();
        if let Some(p) = samples.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let n = samples.len() as f64;
        samples.sort();
        let mut points: Vec<StatePoint> = Vec::with_capacity(samples.len());
        let mut counts: Vec<usize> = Vec::with_capacity(samples.len());
        for p in samples {
            if points.last() == Some(&p) {
                *counts.last_mut().unwrap() += 1;
            } else {
                points.push(p);
                counts.push(1);
            }
        }
        let weights = counts.into_iter().map(|k| k as f64 / n).collect();
        Ok(Self { points, weights })
    }

    pub fn from_state_law(law: &StateLaw) -> Result<Self> {
        let (points, weights) = law.atoms().iter().cloned().unzip();
        Self::new(points, weights)
    }

    pub fn dirac(point: StatePoint) -> Self {
        Self { points: vec![point], weights: vec![1.0] }
    }

    pub fn points(&self) -> &[StatePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (p, w) in self.points.iter().zip(&self.weights) {
            for (acc, c) in m.iter_mut().zip(p.coords()) {
                *acc += w * c;
            }
        }
        m
    }

    /// As a discrete measure over its points.
    pub fn to_state_law(&self) -> StateLaw {
        StateLaw::new(self.points.iter().cloned().zip(self.weights.iter().copied())).expect("weights are valid")
    }
}

fn check_dims(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Sorted union of two one-dimensional supports with weights `a − b`.
fn signed_line(a: &EmpiricalLaw, b: &EmpiricalLaw) -> (Vec<f64>, Vec<f64>) {
    let mut z = Vec::with_capacity(a.len() + b.len());
    let mut w = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let za = a.points.get(i).map(|p| p.coords()[0]);
        let zb = b.points.get(j).map(|p| p.coords()[0]);
        match (za, zb) {
            (Some(x), Some(y)) if x == y => {
                z.push(x);
                w.push(a.weights[i] - b.weights[j]);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                z.push(x);
                w.push(a.weights[i]);
                i += 1;
            }
            (Some(x), None) => {
                z.push(x);
                w.push(a.weights[i]);
                i += 1;
            }
            (_, Some(y)) => {
                z.push(y);
                w.push(-b.weights[j]);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (z, w)
}

pub fn fm_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<f64> {
    check_dims(a, b)?;
    if a.dim() == 1 {
        let (z, w) = signed_line(a, b);
        return Ok(line::fm(&z, &w).max(0.0));
    }
    Ok(fm_transport(a, b)?.cost)
}

pub fn w1_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<f64> {
    check_dims(a, b)?;
    if a.dim() == 1 {
        let (z, w) = signed_line(a, b);
        return Ok(line::w1(&z, &w));
    }
    Ok(w1_transport(a, b)?.cost)
}

fn transport(a: &EmpiricalLaw, b: &EmpiricalLaw, cost: impl Fn(f64) -> f64) -> Result<TransportPlan> {
    check_dims(a, b)?;
    let required = a.len() + b.len();
    if required > TRANSPORT_SUPPORT_CAP {
        return Err(Error::SupportCapExceeded { required, cap: TRANSPORT_SUPPORT_CAP });
    }
    Ok(transport::solve(&a.weights, &b.weights, |i, j| cost(a.points[i].distance(&b.points[j]))))
}

/// Optimal plan for the cost `min(d, 2)` from the general solver, in any dimension.
pub fn fm_transport(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<TransportPlan> {
    transport(a, b, |d| d.min(FM_TRUNCATION))
}

/// Optimal plan for the cost `d` from the general solver, in any dimension.
pub fn w1_transport(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<TransportPlan> {
    transport(a, b, |d| d)
}
