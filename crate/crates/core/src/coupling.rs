//! The coupled chain on `X² × {0, 1}`.
//!
//! From a pair `(x, y)` the coupling kernel `B = Q + R` either moves both
//! sides with one shared map index drawn from the index-level meet
//! `Σ_i min(p_i(x), p_i(y)) δ_i` (flag 1), or draws independent indices from
//! the two normalized residuals (flag 0). Each marginal is exactly one step of
//! the plain chain.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{meet, residual_normalized, sample_atom, DiscreteMeasure, Residual};
use crate::rng;
use crate::systems::{PlaceDependentSystem, StateLaw, StatePoint, MERGE_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub x: StatePoint,
    pub y: StatePoint,
    /// `true` when the last step was drawn from `Q`; the initial state carries `true`.
    pub flag: bool,
}

impl CoupledState {
    pub fn new(x: StatePoint, y: StatePoint) -> Self {
        Self { x, y, flag: true }
    }

    pub fn distance(&self) -> f64 {
        self.x.distance(&self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTrajectory {
    pub states: Vec<CoupledState>,
    pub distances: Vec<f64>,
    pub seed: Option<u64>,
}

impl CoupledTrajectory {
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn flags(&self) -> impl Iterator<Item = bool> + '_ {
        self.states.iter().map(|s| s.flag)
    }
}

/// Mass of `ϑ_x ∧ ϑ_y`.
pub fn q_mass(sys: &PlaceDependentSystem, x: &StatePoint, y: &StatePoint) -> f64 {
    let (px, py) = (sys.weights().eval(x), sys.weights().eval(y));
    px.iter().zip(&py).map(|(a, b)| a.min(*b)).sum()
}

/// One branch of the coupling kernel at a fixed pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledBranch {
    pub index_x: usize,
    pub index_y: usize,
    pub probability: f64,
    pub flag: bool,
}

/// The kernel `B_{x,y}` on index pairs: the meet on the diagonal plus the
/// product of the two normalized residuals scaled by `1 − ‖Q‖`.
pub fn coupled_branches(sys: &PlaceDependentSystem, x: &StatePoint, y: &StatePoint) -> Result<Vec<CoupledBranch>> {
    let (px, py) = (sys.index_law(x), sys.index_law(y));
    let w = meet(&px, &py);
    let mut out: Vec<CoupledBranch> = w
        .atoms()
        .iter()
        .map(|(i, p)| CoupledBranch { index_x: *i, index_y: *i, probability: *p, flag: true })
        .collect();
    let rest = 1.0 - w.mass();
    if let (Residual::Measure(rx), Residual::Measure(ry)) =
        (residual_normalized(&px, &w)?, residual_normalized(&py, &w)?)
    {
        for (i, a) in rx.atoms() {
            for (j, b) in ry.atoms() {
                out.push(CoupledBranch { index_x: *i, index_y: *j, probability: rest * a * b, flag: false });
            }
        }
    }
    Ok(out)
}

/// One step of the coupled chain. Consumes two uniforms on a `Q` step and
/// three on an `R` step.
pub fn coupled_step<R: Rng + ?Sized>(sys: &PlaceDependentSystem, s: &CoupledState, rng: &mut R) -> CoupledState {
    let (px, py) = (sys.index_law(&s.x), sys.index_law(&s.y));
    let w = meet(&px, &py);
    let u: f64 = rng.random();
    if u < w.mass() {
        let i = *sample_atom(&w, rng).expect("meet has positive mass");
        return CoupledState { x: sys.maps()[i].apply(&s.x), y: sys.maps()[i].apply(&s.y), flag: true };
    }
    let rx = residual_normalized(&px, &w).expect("meet is dominated");
    let ry = residual_normalized(&py, &w).expect("meet is dominated");
    match (rx, ry) {
        (Residual::Measure(rx), Residual::Measure(ry)) => {
            let i = *sample_atom(&rx, rng).expect("residual is a probability");
            let j = *sample_atom(&ry, rng).expect("residual is a probability");
            CoupledState { x: sys.maps()[i].apply(&s.x), y: sys.maps()[j].apply(&s.y), flag: false }
        }
        // meet mass within 1e-12 of one; `u` landed in the round-off gap
        _ => {
            let i = *sample_atom(&w, rng).expect("meet has positive mass");
            CoupledState { x: sys.maps()[i].apply(&s.x), y: sys.maps()[i].apply(&s.y), flag: true }
        }
    }
}

pub fn coupled_simulate<R: Rng + ?Sized>(
    sys: &PlaceDependentSystem,
    x0: &StatePoint,
    y0: &StatePoint,
    n: usize,
    rng: &mut R,
) -> Result<CoupledTrajectory> {
    for p in [x0, y0] {
        if p.dim() != sys.dim() {
            return Err(Error::DimensionMismatch { expected: sys.dim(), found: p.dim() });
        }
    }
    let mut states = Vec::with_capacity(n + 1);
    states.push(CoupledState::new(x0.clone(), y0.clone()));
    for _ in 0..n {
        let next = coupled_step(sys, states.last().unwrap(), rng);
        states.push(next);
    }
    let distances = states.iter().map(CoupledState::distance).collect();
    Ok(CoupledTrajectory { states, distances, seed: None })
}

/// Replica `r` uses `rng::stream(seed, tags::COUPLED, r)`.
pub fn coupled_replicas(
    sys: &PlaceDependentSystem,
    x0: &StatePoint,
    y0: &StatePoint,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<CoupledTrajectory>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, rng::tags::COUPLED, r as u64);
            let mut t = coupled_simulate(sys, x0, y0, n, &mut stream)?;
            t.seed = Some(rng::derive_seed(seed, rng::tags::COUPLED, r as u64));
            Ok(t)
        })
        .collect()
}

/// Exact law of `(x_n, y_n)` under the coupling kernel, by enumeration of
/// index pairs. Pairs agreeing to within [`MERGE_TOLERANCE`] are merged.
pub fn exact_coupled_law(
    sys: &PlaceDependentSystem,
    x: &StatePoint,
    y: &StatePoint,
    n: usize,
    cap: usize,
) -> Result<DiscreteMeasure<(StatePoint, StatePoint)>> {
    let mut law = DiscreteMeasure::dirac((x.clone(), y.clone()));
    for _ in 0..n {
        let mut atoms = Vec::new();
        for ((a, b), w) in law.atoms() {
            for br in coupled_branches(sys, a, b)? {
                if br.probability > 0.0 {
                    atoms.push((
                        (sys.maps()[br.index_x].apply(a), sys.maps()[br.index_y].apply(b)),
                        w * br.probability,
                    ));
                }
            }
            if atoms.len() > cap {
                return Err(Error::SupportCapExceeded { required: atoms.len(), cap });
            }
        }
        atoms.sort_by(|p, q| p.0.cmp(&q.0));
        let mut merged: Vec<((StatePoint, StatePoint), f64)> = Vec::with_capacity(atoms.len());
        for (pair, w) in atoms {
            match merged.last_mut() {
                Some((rep, acc))
                    if rep.0.close_to(&pair.0, MERGE_TOLERANCE) && rep.1.close_to(&pair.1, MERGE_TOLERANCE) =>
                {
                    *acc += w
                }
                _ => merged.push((pair, w)),
            }
        }
        law = DiscreteMeasure::from_sorted_unchecked(merged);
    }
    Ok(law)
}

/// `(x-marginal, y-marginal)` of a law on pairs.
pub fn marginals(law: &DiscreteMeasure<(StatePoint, StatePoint)>) -> (StateLaw, StateLaw) {
    let xs = law.atoms().iter().map(|((a, _), w)| (a.clone(), *w)).collect();
    let ys = law.atoms().iter().map(|((_, b), w)| (b.clone(), *w)).collect();
    (crate::systems::canonical_law(xs), crate::systems::canonical_law(ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppingKind {
    /// First `n ≥ 1` after which every flag is 1.
    Tau,
    /// First `n ≥ 0` with `L(x_n) + L(y_n) < R`.
    Kappa,
    /// First `n ≥ 1` with flag 0.
    Epsilon,
    /// First `k ≥ 1` with `V(x_k, y_k) < 2b/(1 − a)`.
    Rho,
}

impl StoppingKind {
    pub const ALL: [StoppingKind; 4] = [StoppingKind::Tau, StoppingKind::Kappa, StoppingKind::Epsilon, StoppingKind::Rho];

    pub fn name(self) -> &'static str {
        match self {
            StoppingKind::Tau => "tau",
            StoppingKind::Kappa => "kappa",
            StoppingKind::Epsilon => "epsilon",
            StoppingKind::Rho => "rho",
        }
    }
}

/// Thresholds for `κ` and `ρ`. `L(x) = |x|` and `V(x, y) = L(x) + L(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingParams {
    pub kappa_radius: f64,
    pub rho_threshold: f64,
}

impl StoppingParams {
    /// From a Lyapunov pair `PL ≤ λL + c`: `R = 4c/(1 − λ)`; the coupled
    /// chain satisfies `BV ≤ aV + b` with `a = λ`, `b = 2c`.
    pub fn from_lyapunov(lambda: f64, c: f64) -> Self {
        let (a, b) = (lambda, 2.0 * c);
        Self { kappa_radius: 4.0 * c / (1.0 - lambda), rho_threshold: 2.0 * b / (1.0 - a) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingTimeSample {
    pub kind: StoppingKind,
    /// `None` when censored at the horizon.
    pub value: Option<usize>,
    pub horizon: usize,
}

impl StoppingTimeSample {
    pub fn censored(&self) -> bool {
        self.value.is_none()
    }
}

pub fn stopping_time(traj: &CoupledTrajectory, kind: StoppingKind, params: &StoppingParams) -> StoppingTimeSample {
    let horizon = traj.horizon();
    let v = |k: usize| traj.states[k].x.norm() + traj.states[k].y.norm();
    let value = match kind {
        StoppingKind::Tau => {
            // flags θ_1..θ_h; τ = 1 + position after the last 0
            if horizon == 0 || !traj.states[horizon].flag {
                None
            } else {
                let last_zero = (1..=horizon).rev().find(|&k| !traj.states[k].flag);
                Some(last_zero.map_or(1, |k| k + 1))
            }
        }
        StoppingKind::Kappa => (0..=horizon).find(|&k| v(k) < params.kappa_radius),
        StoppingKind::Epsilon => (1..=horizon).find(|&k| !traj.states[k].flag),
        StoppingKind::Rho => (1..=horizon).find(|&k| v(k) < params.rho_threshold),
    };
    StoppingTimeSample { kind, value, horizon }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricMoment {
    /// Mean of `β^{−value}` over uncensored samples; `None` if all are censored.
    pub estimate: Option<f64>,
    pub censored_fraction: f64,
    /// Set when censored samples were dropped, so the estimate is biased low.
    pub lower_bound: bool,
}

pub fn geometric_moment(samples: &[StoppingTimeSample], beta: f64) -> Result<GeometricMoment> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { available: 0, required: 1 });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidValue(format!("beta must lie in (0, 1), got {beta}")));
    }
    let values: Vec<f64> = samples.iter().filter_map(|s| s.value).map(|v| beta.powi(-(v as i32))).collect();
    let censored = samples.len() - values.len();
    let censored_fraction = censored as f64 / samples.len() as f64;
    let estimate = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
    Ok(GeometricMoment { estimate, censored_fraction, lower_bound: censored > 0 })
}
