use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A point of `R^d`. Coordinates are finite; `-0.0` is stored as `0.0` so
/// that the total order used for canonical output agrees with `==`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StatePoint(Vec<f64>);

impl StatePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidValue("state point needs at least one coordinate".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite coordinate {c}")));
        }
        Ok(Self::from_finite(coords))
    }

    pub(crate) fn from_finite(mut coords: Vec<f64>) -> Self {
        for c in &mut coords {
            *c += 0.0;
        }
        Self(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Self::new(vec![x]).expect("finite scalar")
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.0.len() == 1 {
            return (self.0[0] - other.0[0]).abs();
        }
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        if self.0.len() == 1 {
            return self.0[0].abs();
        }
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// True when every coordinate differs by at most `tol`.
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for StatePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StatePoint> for Vec<f64> {
    fn from(p: StatePoint) -> Self {
        p.0
    }
}

impl PartialEq for StatePoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for StatePoint {}

impl PartialOrd for StatePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on coordinates.
impl Ord for StatePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// `x ↦ Mx + Q` on `R^d`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    dim: usize,
    /// Row-major `d × d`.
    linear: Vec<f64>,
    offset: Vec<f64>,
    norm_bound: f64,
}

impl AffineMap {
    /// `linear` is given row by row.
    pub fn new(linear: &[Vec<f64>], offset: Vec<f64>) -> Result<Self> {
        let dim = offset.len();
        if dim == 0 {
            return Err(Error::InvalidValue("affine map needs dimension ≥ 1".into()));
        }
        if linear.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: linear.len() });
        }
        if let Some(row) = linear.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
        }
        let flat: Vec<f64> = linear.iter().flatten().copied().collect();
        if flat.iter().chain(&offset).any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("affine map entries must be finite".into()));
        }
        let norm_bound = spectral_norm_bound(dim, &flat);
        let flat = flat.into_iter().map(|v| v + 0.0).collect();
        let offset = offset.into_iter().map(|v| v + 0.0).collect();
        Ok(Self { dim, linear: flat, offset, norm_bound })
    }

    /// One-dimensional `x ↦ m x + q`.
    pub fn scalar(m: f64, q: f64) -> Self {
        Self::new(&[vec![m]], vec![q]).expect("finite scalar map")
    }

    pub fn identity(dim: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(&rows, vec![0.0; dim]).expect("identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries of `M`.
    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn linear_rows(&self) -> Vec<Vec<f64>> {
        self.linear.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Upper bound on the spectral norm `‖M‖`, exact in dimension one.
    pub fn operator_norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Euclidean norm of `Q`, i.e. `|S(0) − 0|`.
    pub fn offset_norm(&self) -> f64 {
        if self.dim == 1 {
            return self.offset[0].abs();
        }
        self.offset.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn apply(&self, x: &StatePoint) -> StatePoint {
        debug_assert_eq!(x.dim(), self.dim);
        let d = self.dim;
        let xs = x.coords();
        let out = (0..d)
            .map(|i| {
                let row = &self.linear[i * d..(i + 1) * d];
                row.iter().zip(xs).map(|(m, v)| m * v).sum::<f64>() + self.offset[i]
            })
            .collect();
        StatePoint::from_finite(out)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let d = self.dim;
        let mut linear = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                linear[i * d + j] = (0..d).map(|k| self.linear[i * d + k] * inner.linear[k * d + j]).sum();
            }
        }
        let offset = self.apply(&StatePoint::from_finite(inner.offset.clone())).0;
        let rows: Vec<Vec<f64>> = linear.chunks(d).map(|r| r.to_vec()).collect();
        AffineMap::new(&rows, offset).expect("composition of finite maps")
    }

    fn key(&self) -> impl Iterator<Item = &f64> {
        self.linear.iter().chain(&self.offset)
    }
}

fn spectral_norm_bound(dim: usize, flat: &[f64]) -> f64 {
    if dim == 1 {
        return flat[0].abs();
    }
    let m = DMatrix::from_row_slice(dim, dim, flat);
    let is_diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || m[(i, j)] == 0.0));
    if is_diagonal {
        return (0..dim).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    }
    let sigma = m.singular_values().max();
    // SVD is backward stable; inflate by a few ulps of the Frobenius scale so the
    // bound cannot fall below the exact norm
    sigma + 8.0 * f64::EPSILON * m.norm()
}

impl PartialEq for AffineMap {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AffineMap {}

impl PartialOrd for AffineMap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(dim, M row-major, Q)`.
impl Ord for AffineMap {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then_with(|| {
            for (a, b) in self.key().zip(other.key()) {
                match a.total_cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}
