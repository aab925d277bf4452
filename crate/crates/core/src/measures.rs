//! Finite discrete (sub)probability measures.
//!
//! A [`DiscreteMeasure`] is a list of weighted atoms over an ordered label type.
//! Labels are opaque: the same type serves for map-index measures `ϑ_x`,
//! for measures over affine maps and for exact state-space laws.
//!
//! Total variation uses the full L1 convention,
//! `‖μ − ν‖ = Σ_a |μ(a) − ν(a)|`, so that for probability measures
//! `‖μ − ν‖ = 2 (1 − ‖μ ∧ ν‖)`. Half-L1 conventions are common elsewhere;
//! this crate never uses them.

use rand::Rng;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Weights below this are dropped on construction.
pub const PRUNE_BELOW: f64 = 1e-15;

/// Tolerance for mass identities and domination checks.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<A> {
    /// Sorted by label, labels pairwise distinct, all weights > `PRUNE_BELOW`.
    atoms: Vec<(A, f64)>,
    mass: f64,
}

impl<A: Ord> DiscreteMeasure<A> {
    /// Builds a measure from weighted atoms. Repeated labels have their
    /// weights summed; weights below [`PRUNE_BELOW`] are dropped.
    pub fn new(atoms: impl IntoIterator<Item = (A, f64)>) -> Result<Self> {
        let mut atoms: Vec<(A, f64)> = atoms.into_iter().collect();
        for (index, (_, w)) in atoms.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeight { index, weight: *w });
            }
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self::from_sorted_unchecked(coalesce(atoms)))
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new(), mass: 0.0 }
    }

    pub fn dirac(label: A) -> Self {
        Self { atoms: vec![(label, 1.0)], mass: 1.0 }
    }

    /// Caller guarantees sorted, distinct labels and valid weights.
    pub(crate) fn from_sorted_unchecked(atoms: Vec<(A, f64)>) -> Self {
        let atoms: Vec<(A, f64)> = atoms.into_iter().filter(|(_, w)| *w >= PRUNE_BELOW).collect();
        let mass = compensated_sum(atoms.iter().map(|(_, w)| *w));
        Self { atoms, mass }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn atoms(&self) -> &[(A, f64)] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<(A, f64)> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &A> {
        self.atoms.iter().map(|(a, _)| a)
    }

    /// Weight of `label`, zero if absent.
    pub fn weight(&self, label: &A) -> f64 {
        self.atoms
            .binary_search_by(|(a, _)| a.cmp(label))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn is_probability(&self) -> bool {
        (self.mass - 1.0).abs() <= MASS_TOLERANCE
    }

    pub fn is_subprobability(&self) -> bool {
        self.mass <= 1.0 + MASS_TOLERANCE
    }

    pub fn scale(&self, factor: f64) -> Self
    where
        A: Clone,
    {
        Self::from_sorted_unchecked(self.atoms.iter().map(|(a, w)| (a.clone(), w * factor)).collect())
    }

    /// Keeps only the atoms whose label satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&A) -> bool) -> Self
    where
        A: Clone,
    {
        Self::from_sorted_unchecked(self.atoms.iter().filter(|(a, _)| keep(a)).cloned().collect())
    }

    /// Mass of the atoms whose label satisfies `keep`.
    pub fn mass_where(&self, mut keep: impl FnMut(&A) -> bool) -> f64 {
        compensated_sum(self.atoms.iter().filter(|(a, _)| keep(a)).map(|(_, w)| *w))
    }

    /// Pointwise sum of two measures.
    pub fn add(&self, other: &Self) -> Self
    where
        A: Clone,
    {
        let mut out = Vec::with_capacity(self.len() + other.len());
        merge_join(&self.atoms, &other.atoms, |a, u, v| out.push((a.clone(), u + v)));
        Self::from_sorted_unchecked(out)
    }
}

fn coalesce<A: Ord>(sorted: Vec<(A, f64)>) -> Vec<(A, f64)> {
    let mut out: Vec<(A, f64)> = Vec::with_capacity(sorted.len());
    for (a, w) in sorted {
        match out.last_mut() {
            Some((last, acc)) if *last == a => *acc += w,
            _ => out.push((a, w)),
        }
    }
    out
}

/// Walks two sorted atom lists in lockstep, calling `f(label, μ(label), ν(label))`
/// once per label in the union of supports.
fn merge_join<A: Ord>(mu: &[(A, f64)], nu: &[(A, f64)], mut f: impl FnMut(&A, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    while i < mu.len() || j < nu.len() {
        let ord = match (mu.get(i), nu.get(j)) {
            (Some((a, _)), Some((b, _))) => a.cmp(b),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                f(&mu[i].0, mu[i].1, 0.0);
                i += 1;
            }
            Ordering::Greater => {
                f(&nu[j].0, 0.0, nu[j].1);
                j += 1;
            }
            Ordering::Equal => {
                f(&mu[i].0, mu[i].1, nu[j].1);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Total variation norm of `μ − ν` in the full L1 convention.
/// Atoms missing from one side count as weight zero.
pub fn tv_norm_diff<A: Ord>(mu: &DiscreteMeasure<A>, nu: &DiscreteMeasure<A>) -> f64 {
    let mut total = 0.0;
    merge_join(&mu.atoms, &nu.atoms, |_, u, v| total += (u - v).abs());
    total
}

/// Greatest lower bound of two measures: the atomwise minimum.
pub fn meet<A: Ord + Clone>(mu: &DiscreteMeasure<A>, nu: &DiscreteMeasure<A>) -> DiscreteMeasure<A> {
    let mut out = Vec::with_capacity(mu.len().min(nu.len()));
    merge_join(&mu.atoms, &nu.atoms, |a, u, v| {
        let m = u.min(v);
        if m > 0.0 {
            out.push((a.clone(), m));
        }
    });
    DiscreteMeasure::from_sorted_unchecked(out)
}

/// Result of removing a common part from a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual<A> {
    /// `(p − q) / (1 − ‖q‖)`, a probability measure.
    Measure(DiscreteMeasure<A>),
    /// `q` carries all of `p`'s mass; there is nothing left to renormalize.
    Zero,
}

impl<A> Residual<A> {
    pub fn measure(&self) -> Option<&DiscreteMeasure<A>> {
        match self {
            Residual::Measure(m) => Some(m),
            Residual::Zero => None,
        }
    }
}

/// Neumaier summation; keeps the mass of measures with millions of atoms
/// accurate to a few ulps.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Normalized residual `(p − q) / (1 − ‖q‖)` of a probability `p` over a
/// dominated subprobability `q ≤ p`.
///
/// Returns [`Residual::Zero`] once `‖q‖ ≥ 1 − 1e-12`.
pub fn residual_normalized<A: Ord + Clone>(
    p: &DiscreteMeasure<A>,
    q: &DiscreteMeasure<A>,
) -> Result<Residual<A>> {
    let mut diff = Vec::with_capacity(p.len());
    let mut violation = None;
    let mut index = 0;
    merge_join(&p.atoms, &q.atoms, |a, base, sub| {
        if sub > base + MASS_TOLERANCE && violation.is_none() {
            violation = Some(Error::ViolatedDomination { index, sub, base });
        }
        diff.push((a.clone(), (base - sub).max(0.0)));
        index += 1;
    });
    if let Some(err) = violation {
        return Err(err);
    }
    let rest = 1.0 - q.mass();
    if rest <= MASS_TOLERANCE {
        return Ok(Residual::Zero);
    }
    let total = compensated_sum(diff.iter().map(|(_, w)| *w));
    if total <= 0.0 {
        return Ok(Residual::Zero);
    }
    // normalize by the realized difference mass; it equals 1 − ‖q‖ up to round-off
    let atoms = diff.into_iter().map(|(a, w)| (a, w / total)).collect();
    Ok(Residual::Measure(DiscreteMeasure::from_sorted_unchecked(atoms)))
}

/// Draws a label with probability `weight / mass`. Consumes exactly one
/// uniform variate from `rng`.
pub fn sample_atom<'m, A, R: Rng + ?Sized>(m: &'m DiscreteMeasure<A>, rng: &mut R) -> Result<&'m A> {
    if m.atoms.is_empty() || m.mass <= 0.0 {
        return Err(Error::EmptyMeasure);
    }
    let u: f64 = rng.random::<f64>() * m.mass;
    let mut acc = 0.0;
    for (a, w) in &m.atoms {
        acc += w;
        if u < acc {
            return Ok(a);
        }
    }
    Ok(&m.atoms[m.atoms.len() - 1].0)
}
