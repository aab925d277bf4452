//! Iterated function systems with place-dependent probabilities.
//!
//! A [`PlaceDependentSystem`] holds a finite family of affine maps
//! `S_1, …, S_N` on `R^d` and a [`WeightFunction`]. From state `x` the chain
//! picks index `i` with probability `p_i(x)` and moves to `S_i(x)`.

mod state;
mod weights;

pub use state::{AffineMap, StatePoint};
pub use weights::{HolderCertificate, WeightFunction};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{sample_atom, DiscreteMeasure};
use crate::rng;

/// Exact law on the state space.
pub type StateLaw = DiscreteMeasure<StatePoint>;

/// Default support cap for exact enumeration.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 20;

/// Atoms whose coordinates all agree to this tolerance are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PlaceDependentSystem {
    dim: usize,
    maps: Vec<AffineMap>,
    weights: WeightFunction,
}

/// A realized path of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `n + 1` states, starting with the initial point.
    pub states: Vec<StatePoint>,
    /// `indices[k]` is the map index drawn at step `k`.
    pub indices: Vec<usize>,
    /// Seed of the stream that produced the path, when known.
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &StatePoint {
        self.states.last().expect("trajectory holds the initial state")
    }
}

impl PlaceDependentSystem {
    pub fn new(maps: Vec<AffineMap>, weights: WeightFunction) -> Result<Self> {
        let dim = maps.first().ok_or_else(|| Error::InvalidValue("system needs at least one map".into()))?.dim();
        if let Some(m) = maps.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
        }
        if weights.count() != maps.len() {
            return Err(Error::DimensionMismatch { expected: maps.len(), found: weights.count() });
        }
        if let Some(d) = weights.input_dim() {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
        }
        Ok(Self { dim, maps, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }

    pub fn is_place_independent(&self) -> bool {
        self.weights.is_constant()
    }

    /// `ϑ_x` as a measure over map indices.
    pub fn index_law(&self, x: &StatePoint) -> DiscreteMeasure<usize> {
        self.weights.measure_at(x)
    }

    fn check_dim(&self, x: &StatePoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok(())
    }

    /// One transition: draws `i ~ ϑ_x` and returns `(S_i(x), i)`.
    pub fn step<R: Rng + ?Sized>(&self, x: &StatePoint, rng: &mut R) -> (StatePoint, usize) {
        let law = self.index_law(x);
        let i = *sample_atom(&law, rng).expect("index law is a probability measure");
        (self.maps[i].apply(x), i)
    }

    /// Forward chain `X_{k+1} = S_{θ_k}(X_k)` for `n` steps.
    pub fn simulate<R: Rng + ?Sized>(&self, x0: &StatePoint, n: usize, rng: &mut R) -> Result<Trajectory> {
        self.check_dim(x0)?;
        let mut states = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(n);
        states.push(x0.clone());
        for _ in 0..n {
            let (next, i) = self.step(states.last().unwrap(), rng);
            states.push(next);
            indices.push(i);
        }
        Ok(Trajectory { states, indices, seed: None })
    }

    /// `replicas` independent forward paths; replica `r` uses
    /// `rng::stream(seed, tag, r)`. Runs on the current rayon pool; the result
    /// does not depend on the number of threads.
    pub fn simulate_replicas(
        &self,
        x0: &StatePoint,
        n: usize,
        replicas: usize,
        seed: u64,
        tag: u64,
    ) -> Result<Vec<Trajectory>> {
        self.check_dim(x0)?;
        (0..replicas)
            .into_par_iter()
            .map(|r| {
                let replica_seed = rng::derive_seed(seed, tag, r as u64);
                let mut stream = rng::stream(seed, tag, r as u64);
                let mut t = self.simulate(x0, n, &mut stream)?;
                t.seed = Some(replica_seed);
                Ok(t)
            })
            .collect()
    }

    /// Backward iterations `Y_k = S_{θ_0} ∘ … ∘ S_{θ_{k−1}}(x)`.
    ///
    /// Only defined for place-independent weights: with place-dependent
    /// weights the backward and forward laws differ and `θ_k` has no
    /// state to be drawn from.
    pub fn backward_simulate<R: Rng + ?Sized>(&self, x: &StatePoint, n: usize, rng: &mut R) -> Result<Trajectory> {
        self.check_dim(x)?;
        if !self.is_place_independent() {
            return Err(Error::NotApplicable("backward iteration needs place-independent weights".into()));
        }
        let law = self.index_law(x);
        let mut composite = AffineMap::identity(self.dim);
        let mut states = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(n);
        states.push(x.clone());
        for _ in 0..n {
            let i = *sample_atom(&law, rng)?;
            composite = composite.compose(&self.maps[i]);
            states.push(composite.apply(x));
            indices.push(i);
        }
        Ok(Trajectory { states, indices, seed: None })
    }

    /// Markov operator `Pf(x) = Σ_i p_i(x) f(S_i(x))`.
    pub fn markov_apply(&self, f: impl Fn(&StatePoint) -> f64, x: &StatePoint) -> f64 {
        self.weights
            .eval(x)
            .iter()
            .zip(&self.maps)
            .map(|(p, s)| if *p > 0.0 { p * f(&s.apply(x)) } else { 0.0 })
            .sum()
    }

    /// One application of the dual operator `P*` to an exact law.
    pub fn push_law(&self, law: &StateLaw, cap: usize) -> Result<StateLaw> {
        let required = law.len().saturating_mul(self.maps.len());
        if required > cap {
            return Err(Error::SupportCapExceeded { required, cap });
        }
        let mut atoms = Vec::with_capacity(required);
        for (x, w) in law.atoms() {
            for (p, s) in self.weights.eval(x).iter().zip(&self.maps) {
                if *p > 0.0 {
                    atoms.push((s.apply(x), w * p));
                }
            }
        }
        Ok(canonical_law(atoms))
    }

    /// Exact law of `X_n` by enumerating all index words, merging atoms
    /// that coincide to within [`MERGE_TOLERANCE`].
    ///
    /// Fails with `SupportCapExceeded` as soon as a step would need more
    /// than `cap` atoms before merging.
    pub fn exact_pushforward(&self, init: &StateLaw, n: usize, cap: usize) -> Result<StateLaw> {
        if let Some((x, _)) = init.atoms().first() {
            self.check_dim(x)?;
        }
        let mut law = init.clone();
        for _ in 0..n {
            law = self.push_law(&law, cap)?;
        }
        Ok(law)
    }

    /// Exact law of the backward iterate `Y_n` started at `x`, by
    /// enumerating words `θ_0 … θ_{n−1}` with probability `Π p_{θ_k}`.
    pub fn exact_backward_law(&self, x: &StatePoint, n: usize, cap: usize) -> Result<StateLaw> {
        self.check_dim(x)?;
        if !self.is_place_independent() {
            return Err(Error::NotApplicable("backward iteration needs place-independent weights".into()));
        }
        let probs = self.weights.eval(x);
        // composites S_{θ_0} ∘ … ∘ S_{θ_{k−1}} with their word probabilities
        let mut words: Vec<(AffineMap, f64)> = vec![(AffineMap::identity(self.dim), 1.0)];
        for _ in 0..n {
            let required = words.len().saturating_mul(self.maps.len());
            if required > cap {
                return Err(Error::SupportCapExceeded { required, cap });
            }
            words = words
                .iter()
                .flat_map(|(c, w)| {
                    self.maps
                        .iter()
                        .zip(&probs)
                        .filter(|(_, p)| **p > 0.0)
                        .map(move |(s, p)| (c.compose(s), w * p))
                })
                .collect();
        }
        Ok(canonical_law(words.into_iter().map(|(c, w)| (c.apply(x), w)).collect()))
    }
}

/// Sorts atoms lexicographically and merges neighbours that agree with the
/// first point of their group to within [`MERGE_TOLERANCE`].
pub fn canonical_law(mut atoms: Vec<(StatePoint, f64)>) -> StateLaw {
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(StatePoint, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match merged.last_mut() {
            Some((rep, acc)) if rep.close_to(&x, MERGE_TOLERANCE) => *acc += w,
            _ => merged.push((x, w)),
        }
    }
    DiscreteMeasure::from_sorted_unchecked(merged)
}
