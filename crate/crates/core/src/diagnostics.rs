//! Numerical checks of the contraction hypotheses, invariant-law estimation
//! and the convergence-rate experiment.
//!
//! Constants are reported with a [`Method`]: `certified` values come from a
//! closed form over the weight polytope and hold for every `x`; `estimated`
//! values are extremes over the sampled pairs and grid.
//!
//! The Lyapunov function is `L(x) = |x|`, i.e. the reference point is the
//! origin.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{coupled_replicas, geometric_moment, stopping_time, GeometricMoment, StoppingKind, StoppingParams, StoppingTimeSample};
use crate::error::{Error, Result};
use crate::metrics::{fit_exponential, fm_distance, w1_distance, EmpiricalLaw, RateFit, FM_TRUNCATION};
use crate::rng;
use crate::systems::{PlaceDependentSystem, StatePoint};

/// Slack added to `t |x − y|` when deciding whether a map contracts a pair.
pub const CONTRACTION_SLACK: f64 = 1e-12;

/// An axis-aligned box in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DegenerateRegion(format!("bounds of lengths {} and {}", lo.len(), hi.len())));
        }
        if let Some(k) = (0..lo.len()).find(|&k| !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k])) {
            return Err(Error::DegenerateRegion(format!("axis {k} has lo = {} and hi = {}", lo[k], hi[k])));
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StatePoint {
        let coords = self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        StatePoint::new(coords).expect("finite box")
    }

    /// `k^d` grid points, `k` per axis including both ends.
    pub fn grid(&self, k: usize) -> Vec<StatePoint> {
        let d = self.dim();
        let total = k.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let coords = (0..d)
                    .map(|axis| {
                        let j = idx % k;
                        idx /= k;
                        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * j as f64 / (k - 1) as f64
                    })
                    .collect();
                StatePoint::new(coords).expect("finite box")
            })
            .collect()
    }

    /// Points per axis for the pair grid: about 101 points in total.
    pub fn grid_resolution(dim: usize) -> usize {
        ((101f64).powf(1.0 / dim as f64).floor() as usize).max(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Certified,
    Estimated,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Certified => "certified",
            Method::Estimated => "estimated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub method: Method,
    pub derivation: String,
}

impl Constant {
    fn certified(value: f64, derivation: impl Into<String>) -> Self {
        Self { value, method: Method::Certified, derivation: derivation.into() }
    }

    fn estimated(value: f64, derivation: impl Into<String>) -> Self {
        Self { value, method: Method::Estimated, derivation: derivation.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassFlags {
    /// Mean contraction `α < 1`.
    pub b1: bool,
    /// Mean jump from the reference point `c < ∞`.
    pub b2: bool,
    /// Hölder bound on the weights, `l < ∞`.
    pub b3: bool,
    /// Uniform contractive overlap `δ > 0`.
    pub b4: bool,
    /// `PL ≤ λL + c` at every checked point with `λ < 1`.
    pub lyapunov: bool,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.b1 && self.b2 && self.b3 && self.b4 && self.lyapunov
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `sup_x Σ_i p_i(x) ‖M_i‖`.
    pub alpha: Constant,
    /// The threshold `t` used for the contractive event `|S_i x − S_i y| ≤ t |x − y|`:
    /// the largest map norm below one when that exceeds `α`, else `α`.
    /// Mean contraction holds with `t` as well since `α ≤ t`.
    pub contraction_threshold: f64,
    /// Largest observed `Σ_i min(p_i(x), p_i(y)) |S_i x − S_i y| / |x − y|`.
    pub contraction_sampled_max: f64,
    /// `sup_x Σ_i p_i(x) |S_i(0)|`.
    pub c: Constant,
    pub holder_l: Constant,
    pub holder_nu: f64,
    /// Largest observed `(1 − ‖ϑ_x ∧ ϑ_y‖) / |x − y|^ν`.
    pub mass_gap_sampled_max: f64,
    /// Smallest observed meet mass on maps contracting the pair by `t`.
    pub delta: Constant,
    pub lyapunov_lambda: f64,
    pub lyapunov_c: f64,
    /// Largest observed `PL(x) − λ L(x) − c`.
    pub lyapunov_slack_max: f64,
    pub passes: PassFlags,
    pub region: Region,
    pub pairs: usize,
    pub grid_points: usize,
}

impl ConditionReport {
    /// Flat `key = value` lines.
    pub fn to_key_value_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let r = |x: f64| format!("{x:.16e}");
        for (name, k) in [("alpha", &self.alpha), ("c", &self.c), ("holder_l", &self.holder_l), ("delta", &self.delta)] {
            line(name, r(k.value));
            line(&format!("{name}.method"), k.method.name().to_string());
            line(&format!("{name}.derivation"), k.derivation.clone());
        }
        line("contraction_threshold", r(self.contraction_threshold));
        line("contraction_sampled_max", r(self.contraction_sampled_max));
        line("holder_nu", r(self.holder_nu));
        line("mass_gap_sampled_max", r(self.mass_gap_sampled_max));
        line("lyapunov_lambda", r(self.lyapunov_lambda));
        line("lyapunov_c", r(self.lyapunov_c));
        line("lyapunov_slack_max", r(self.lyapunov_slack_max));
        line("pass.b1", self.passes.b1.to_string());
        line("pass.b2", self.passes.b2.to_string());
        line("pass.b3", self.passes.b3.to_string());
        line("pass.b4", self.passes.b4.to_string());
        line("pass.lyapunov", self.passes.lyapunov.to_string());
        line("pass.all", self.passes.all().to_string());
        line("region.lo", format!("{:?}", self.region.lo));
        line("region.hi", format!("{:?}", self.region.hi));
        line("pairs", self.pairs.to_string());
        line("grid_points", self.grid_points.to_string());
        out
    }
}

/// `Σ_i min(p_i(x), p_i(y)) · 1{|S_i x − S_i y| ≤ t |x − y| + 1e-12}`.
pub fn contractive_meet_mass(sys: &PlaceDependentSystem, x: &StatePoint, y: &StatePoint, t: f64) -> f64 {
    let (px, py) = (sys.weights().eval(x), sys.weights().eval(y));
    let d = x.distance(y);
    sys.maps()
        .iter()
        .zip(px.iter().zip(&py))
        .filter(|(s, _)| s.apply(x).distance(&s.apply(y)) <= t * d + CONTRACTION_SLACK)
        .map(|(_, (a, b))| a.min(*b))
        .sum()
}

/// `Σ_i min(p_i(x), p_i(y)) |S_i x − S_i y|`.
pub fn meet_displacement(sys: &PlaceDependentSystem, x: &StatePoint, y: &StatePoint) -> f64 {
    let (px, py) = (sys.weights().eval(x), sys.weights().eval(y));
    sys.maps()
        .iter()
        .zip(px.iter().zip(&py))
        .map(|(s, (a, b))| a.min(*b) * s.apply(x).distance(&s.apply(y)))
        .sum()
}

/// Largest operator norm strictly below one, or `α` if that is larger.
pub fn contraction_threshold(alpha: f64, norms: impl IntoIterator<Item = f64>) -> f64 {
    if alpha >= 1.0 {
        return alpha;
    }
    norms.into_iter().filter(|n| *n < 1.0).fold(alpha, f64::max)
}

/// The pairs used by the diagnostics: the full grid product followed by
/// `pairs` uniform pairs from the region.
pub fn diagnostic_pairs<R: Rng + ?Sized>(region: &Region, pairs: usize, rng: &mut R) -> (Vec<StatePoint>, Vec<(StatePoint, StatePoint)>) {
    let grid = region.grid(Region::grid_resolution(region.dim()));
    let mut out = Vec::with_capacity(grid.len() * grid.len() + pairs);
    for x in &grid {
        for y in &grid {
            out.push((x.clone(), y.clone()));
        }
    }
    for _ in 0..pairs {
        let x = region.sample(rng);
        let y = region.sample(rng);
        out.push((x, y));
    }
    (grid, out)
}

/// Which maps count as contracting a pair in the `δ` diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractiveEvent {
    /// `|S_i x − S_i y| ≤ t |x − y|` for the pair at hand.
    PairDisplacement,
    /// `‖M_i‖ ≤ t`, independent of the pair.
    OperatorNorm,
}

pub fn check_conditions<R: Rng + ?Sized>(
    sys: &PlaceDependentSystem,
    region: &Region,
    pairs: usize,
    rng: &mut R,
) -> Result<ConditionReport> {
    check_conditions_with(sys, region, pairs, ContractiveEvent::PairDisplacement, rng)
}

pub fn check_conditions_with<R: Rng + ?Sized>(
    sys: &PlaceDependentSystem,
    region: &Region,
    pairs: usize,
    event: ContractiveEvent,
    rng: &mut R,
) -> Result<ConditionReport> {
    if region.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: region.dim() });
    }
    if pairs == 0 {
        return Err(Error::InvalidValue("check needs at least one sampled pair".into()));
    }
    let norms: Vec<f64> = sys.maps().iter().map(|m| m.operator_norm_bound()).collect();
    let jumps: Vec<f64> = sys.maps().iter().map(|m| m.offset_norm()).collect();
    let (grid, pair_list) = diagnostic_pairs(region, pairs, rng);
    let points: Vec<&StatePoint> = grid.iter().chain(pair_list.iter().skip(grid.len() * grid.len()).flat_map(|(x, y)| [x, y])).collect();
    let mean = |p: &[f64], v: &[f64]| -> f64 { p.iter().zip(v).map(|(a, b)| a * b).sum() };

    let contraction_sampled_max = pair_list
        .iter()
        .filter(|(x, y)| x.distance(y) > 0.0)
        .map(|(x, y)| meet_displacement(sys, x, y) / x.distance(y))
        .fold(0.0, f64::max);

    let (alpha, c) = match sys.weights().vertices() {
        Some(vertices) => {
            let a = vertices.iter().map(|v| mean(v, &norms)).fold(0.0, f64::max);
            let c = vertices.iter().map(|v| mean(v, &jumps)).fold(0.0, f64::max);
            (
                Constant::certified(a, format!("max over {} weight vertices of Σ p_i ‖M_i‖", vertices.len())),
                Constant::certified(c, format!("max over {} weight vertices of Σ p_i |Q_i|", vertices.len())),
            )
        }
        None => {
            let pointwise = points.iter().map(|x| mean(&sys.weights().eval(x), &norms)).fold(0.0, f64::max);
            let a = pointwise.max(contraction_sampled_max);
            let c = points.iter().map(|x| mean(&sys.weights().eval(x), &jumps)).fold(0.0, f64::max);
            (
                Constant::estimated(a, format!("max of Σ p_i(x) ‖M_i‖ and pair contraction ratios over {} points", points.len())),
                Constant::estimated(c, format!("max of Σ p_i(x) |Q_i| over {} points", points.len())),
            )
        }
    };

    let cert = sys.weights().holder_certificate();
    let holder_l = Constant::certified(cert.l, cert.derivation);
    let mass_gap_sampled_max = pair_list
        .iter()
        .filter(|(x, y)| x.distance(y) > 0.0)
        .map(|(x, y)| (1.0 - crate::coupling::q_mass(sys, x, y)) / x.distance(y).powf(cert.nu))
        .fold(0.0, f64::max);

    let t = contraction_threshold(alpha.value, norms.iter().copied());
    let contracting: Vec<bool> = norms.iter().map(|n| *n <= t).collect();
    let delta_value = pair_list
        .par_iter()
        .map(|(x, y)| match event {
            ContractiveEvent::PairDisplacement => contractive_meet_mass(sys, x, y, t),
            ContractiveEvent::OperatorNorm => {
                let (px, py) = (sys.weights().eval(x), sys.weights().eval(y));
                (0..px.len()).filter(|&i| contracting[i]).map(|i| px[i].min(py[i])).sum()
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    let event_text = match event {
        ContractiveEvent::PairDisplacement => format!("|S x − S y| ≤ {t} |x − y|"),
        ContractiveEvent::OperatorNorm => format!("‖M‖ ≤ {t}"),
    };
    let delta = Constant::estimated(
        delta_value,
        format!("min over {} pairs of the meet mass on maps with {event_text}", pair_list.len()),
    );

    let lambda = alpha.value;
    let lyapunov_slack_max = points
        .iter()
        .map(|x| sys.markov_apply(|y| y.norm(), x) - lambda * x.norm() - c.value)
        .fold(f64::NEG_INFINITY, f64::max);

    let passes = PassFlags {
        b1: alpha.value < 1.0,
        b2: c.value.is_finite(),
        b3: holder_l.value.is_finite() && cert.nu > 0.0 && cert.nu <= 1.0,
        b4: delta.value > 0.0,
        lyapunov: lambda < 1.0 && lyapunov_slack_max <= 1e-12,
    };
    Ok(ConditionReport {
        contraction_threshold: t,
        contraction_sampled_max,
        lyapunov_c: c.value,
        alpha,
        c,
        holder_l,
        holder_nu: cert.nu,
        mass_gap_sampled_max,
        delta,
        lyapunov_lambda: lambda,
        lyapunov_slack_max,
        passes,
        region: region.clone(),
        pairs,
        grid_points: grid.len(),
    })
}

/// Empirical law of `X_{burn_in + 1}, …, X_{burn_in + samples}` along one
/// trajectory started at the origin.
pub fn estimate_invariant<R: Rng + ?Sized>(
    sys: &PlaceDependentSystem,
    burn_in: usize,
    samples: usize,
    rng: &mut R,
) -> Result<EmpiricalLaw> {
    if burn_in == 0 || samples == 0 {
        return Err(Error::InvalidValue("burn_in and samples must be at least 1".into()));
    }
    let mut x = StatePoint::origin(sys.dim());
    for _ in 0..burn_in {
        x = sys.step(&x, rng).0;
    }
    let mut kept = Vec::with_capacity(samples);
    for _ in 0..samples {
        x = sys.step(&x, rng).0;
        kept.push(x.clone());
    }
    EmpiricalLaw::from_samples(kept)
}

/// `P*` applied exactly to a finitely supported law.
pub fn evolve_law(sys: &PlaceDependentSystem, law: &EmpiricalLaw) -> Result<EmpiricalLaw> {
    let mut points = Vec::with_capacity(law.len() * sys.maps().len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (x, w) in law.points().iter().zip(law.weights()) {
        for (p, s) in sys.weights().eval(x).iter().zip(sys.maps()) {
            if *p > 0.0 {
                points.push(s.apply(x));
                weights.push(w * p);
            }
        }
    }
    EmpiricalLaw::new(points, weights)
}

/// `FM(law, P* law)`.
pub fn stationarity_check(sys: &PlaceDependentSystem, law: &EmpiricalLaw) -> Result<f64> {
    fm_distance(law, &evolve_law(sys, law)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub fm: f64,
    pub w1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    pub replicas: usize,
    pub noise_floor: f64,
    /// Fit of the FM series; `None` when fewer than four points clear the floor.
    pub fit: Option<RateFit>,
    pub fingerprint: Option<String>,
}

impl ConvergenceResult {
    /// True when no usable fit exists or the fitted series is flat.
    pub fn degenerate(&self) -> bool {
        self.fit.as_ref().is_none_or(|f| f.degenerate)
    }
}

/// Monte Carlo noise floor `2/√replicas`.
pub fn noise_floor(replicas: usize) -> f64 {
    2.0 / (replicas as f64).sqrt()
}

pub const MIN_CONVERGENCE_REPLICAS: usize = 100;

/// FM values within this of [`FM_TRUNCATION`] count as saturated.
pub const SATURATION_TOLERANCE: f64 = 1e-12;

/// Distances between the empirical laws of `replicas` chains from `x0` and
/// `replicas` independent chains from `y0` at `n = 0, …, n_max`. The rate is
/// fitted after the leading run of rows with FM at its ceiling `2` and above
/// the noise floor.
///
/// Chain `r` from `x0` uses stream `(seed, FORWARD, r)`, from `y0`
/// `(seed, FORWARD_ALT, r)`.
pub fn convergence_experiment(
    sys: &PlaceDependentSystem,
    x0: &StatePoint,
    y0: &StatePoint,
    n_max: usize,
    replicas: usize,
    seed: u64,
) -> Result<ConvergenceResult> {
    if replicas < MIN_CONVERGENCE_REPLICAS {
        return Err(Error::InvalidValue(format!("convergence needs at least {MIN_CONVERGENCE_REPLICAS} replicas, got {replicas}")));
    }
    let xs = sys.simulate_replicas(x0, n_max, replicas, seed, rng::tags::FORWARD)?;
    let ys = sys.simulate_replicas(y0, n_max, replicas, seed, rng::tags::FORWARD_ALT)?;
    let rows = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let a = EmpiricalLaw::from_samples(xs.iter().map(|t| t.states[n].clone()).collect())?;
            let b = EmpiricalLaw::from_samples(ys.iter().map(|t| t.states[n].clone()).collect())?;
            Ok(ConvergenceRow { n, fm: fm_distance(&a, &b)?, w1: w1_distance(&a, &b)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let floor = noise_floor(replicas);
    // leading rows pinned at the truncation value say nothing about the rate
    let saturated = rows.iter().take_while(|r| r.fm >= FM_TRUNCATION - SATURATION_TOLERANCE).count();
    let series: Vec<(usize, f64)> = rows[saturated..].iter().map(|r| (r.n, r.fm)).collect();
    let fit = fit_exponential(&series, floor).ok();
    Ok(ConvergenceResult { rows, replicas, noise_floor: floor, fit, fingerprint: None })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailResult {
    pub horizon: usize,
    pub replicas: usize,
    pub params: StoppingParams,
    /// `samples[r]` holds one sample per [`StoppingKind`] for replica `r`, in `StoppingKind::ALL` order.
    pub samples: Vec<Vec<StoppingTimeSample>>,
    /// `(n, P(τ > n))` for `n = 0, …, horizon`, censored samples counted as `τ > horizon`.
    pub tau_survival: Vec<(usize, f64)>,
    /// Fit of the survival curve above the noise floor.
    pub tau_fit: Option<RateFit>,
    pub beta: f64,
    pub moments: Vec<(StoppingKind, GeometricMoment)>,
}

impl TailResult {
    pub fn censored_fraction(&self, kind: StoppingKind) -> f64 {
        self.moments.iter().find(|(k, _)| *k == kind).map_or(1.0, |(_, m)| m.censored_fraction)
    }
}

/// Coupled chains from `(x0, y0)` over `horizon` steps: stopping times per
/// replica, the tail of `τ`, and geometric moments at `beta`.
#[allow(clippy::too_many_arguments)]
pub fn coupling_tail_experiment(
    sys: &PlaceDependentSystem,
    x0: &StatePoint,
    y0: &StatePoint,
    horizon: usize,
    replicas: usize,
    seed: u64,
    beta: f64,
    params: StoppingParams,
) -> Result<TailResult> {
    if replicas == 0 {
        return Err(Error::InvalidValue("tail experiment needs at least one replica".into()));
    }
    let trajectories = coupled_replicas(sys, x0, y0, horizon, replicas, seed)?;
    let samples: Vec<Vec<StoppingTimeSample>> = trajectories
        .par_iter()
        .map(|t| StoppingKind::ALL.iter().map(|k| stopping_time(t, *k, &params)).collect())
        .collect();
    let taus: Vec<Option<usize>> = samples.iter().map(|s| s[0].value).collect();
    let tau_survival: Vec<(usize, f64)> = (0..=horizon)
        .map(|n| (n, taus.iter().filter(|v| v.is_none_or(|t| t > n)).count() as f64 / replicas as f64))
        .collect();
    let tau_fit = fit_exponential(&tau_survival, noise_floor(replicas)).ok();
    let moments = StoppingKind::ALL
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            let column: Vec<StoppingTimeSample> = samples.iter().map(|s| s[k]).collect();
            Ok((*kind, geometric_moment(&column, beta)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailResult { horizon, replicas, params, samples, tau_survival, tau_fit, beta, moments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{AffineMap, WeightFunction};

    fn canonical() -> PlaceDependentSystem {
        PlaceDependentSystem::new(
            vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
            WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8).unwrap(),
        )
        .unwrap()
    }

    fn constant(p: f64, m1: f64, m2: f64) -> PlaceDependentSystem {
        PlaceDependentSystem::new(
            vec![AffineMap::scalar(m1, 0.0), AffineMap::scalar(m2, 1.0)],
            WeightFunction::constant(vec![p, 1.0 - p]).unwrap(),
        )
        .unwrap()
    }

    fn deterministic() -> PlaceDependentSystem {
        PlaceDependentSystem::new(vec![AffineMap::scalar(0.5, 1.0)], WeightFunction::constant(vec![1.0]).unwrap()).unwrap()
    }

    fn region() -> Region {
        Region::cube(1, -5.0, 5.0).unwrap()
    }

    #[test]
    fn constant_weights_alpha() {
        let r = check_conditions(&constant(0.7, 0.3, 0.5), &region(), 100, &mut rng::stream(1, 4, 0)).unwrap();
        assert!((r.alpha.value - 0.36).abs() < 1e-15);
        assert_eq!(r.alpha.method, Method::Certified);
        assert_eq!(r.holder_l.value, 0.0);
        // with constant weights δ is the total weight of the contracting maps
        assert!((r.delta.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_report() {
        let r = check_conditions(&canonical(), &region(), 1000, &mut rng::stream(2, 4, 0)).unwrap();
        assert!((r.alpha.value - 0.46).abs() < 1e-15);
        assert!(r.alpha.value <= 0.5);
        assert_eq!(r.contraction_threshold, 0.5);
        assert!((r.c.value - 0.8).abs() < 1e-15);
        assert!((r.holder_l.value - 0.6).abs() < 1e-15);
        assert_eq!(r.holder_nu, 1.0);
        assert!(r.delta.value >= 0.4 - 1e-15);
        assert!(r.contraction_sampled_max <= r.alpha.value + 1e-12);
        assert!(r.passes.all(), "{r:?}");
        assert_eq!(r.grid_points, 101);
        assert!(r.to_key_value_text().contains("pass.all = true"));
    }

    #[test]
    fn identity_fails_b1() {
        let id = PlaceDependentSystem::new(vec![AffineMap::identity(1)], WeightFunction::constant(vec![1.0]).unwrap()).unwrap();
        let r = check_conditions(&id, &region(), 10, &mut rng::stream(0, 4, 0)).unwrap();
        assert_eq!(r.alpha.value, 1.0);
        assert!(!r.passes.b1);
    }

    #[test]
    fn degenerate_region() {
        assert!(matches!(Region::cube(1, 1.0, 1.0), Err(Error::DegenerateRegion(_))));
        assert!(matches!(Region::new(vec![0.0], vec![f64::NAN]), Err(Error::DegenerateRegion(_))));
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(Region::grid_resolution(1), 101);
        assert_eq!(Region::grid_resolution(2), 10);
        assert_eq!(Region::grid_resolution(7), 2);
        let g = Region::cube(2, 0.0, 1.0).unwrap().grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[4].coords(), &[0.5, 0.5]);
    }

    #[test]
    fn invariant_examples() {
        let law = estimate_invariant(&deterministic(), 60, 50, &mut rng::stream(0, 5, 0)).unwrap();
        assert!(law.points().iter().all(|p| (p.coords()[0] - 2.0).abs() <= 1e-6));

        let law = estimate_invariant(&canonical(), 100, 5000, &mut rng::stream(1, 5, 0)).unwrap();
        assert!(law.points().iter().all(|p| (-0.5..=2.5).contains(&p.coords()[0])));

        let law = estimate_invariant(&constant(0.7, 0.5, 0.5), 100, 20_000, &mut rng::stream(2, 5, 0)).unwrap();
        assert!((law.mean()[0] - 0.6).abs() <= 0.02);
    }

    #[test]
    fn stationarity_examples() {
        let fixed = EmpiricalLaw::dirac(StatePoint::scalar(2.0));
        assert!(stationarity_check(&deterministic(), &fixed).unwrap() <= 1e-12);

        let far = EmpiricalLaw::dirac(StatePoint::scalar(100.0));
        assert!(stationarity_check(&canonical(), &far).unwrap() >= 1.0);

        let law = estimate_invariant(&canonical(), 200, 10_000, &mut rng::stream(3, 5, 0)).unwrap();
        assert!(stationarity_check(&canonical(), &law).unwrap() <= 0.05);
    }

    #[test]
    fn convergence_first_row_and_replay() {
        let sys = canonical();
        let (x0, y0) = (StatePoint::scalar(-5.0), StatePoint::scalar(5.0));
        let a = convergence_experiment(&sys, &x0, &y0, 10, 200, 7).unwrap();
        assert_eq!(a.rows[0].fm, 2.0);
        assert_eq!(a.rows[0].w1, 10.0);
        assert_eq!(a, convergence_experiment(&sys, &x0, &y0, 10, 200, 7).unwrap());
        for r in &a.rows {
            assert!(r.fm <= 2.0 && r.fm <= r.w1 + 1e-9);
        }
        assert!(convergence_experiment(&sys, &x0, &y0, 10, 99, 7).is_err());
    }

    #[test]
    fn fit_skips_saturated_rows() {
        // |−5 − 5| and the first step's gap both exceed 2, so rows 0 and 1 sit at the ceiling
        let sys = canonical();
        let r = convergence_experiment(&sys, &StatePoint::scalar(-5.0), &StatePoint::scalar(5.0), 20, 1000, 2).unwrap();
        assert_eq!((r.rows[0].fm, r.rows[1].fm), (2.0, 2.0));
        assert!(r.rows[2].fm < 2.0);
        assert_eq!(r.fit.unwrap().window.0, 2);
    }

    #[test]
    fn identical_starts_are_degenerate() {
        let x0 = StatePoint::scalar(1.0);
        let r = convergence_experiment(&canonical(), &x0, &x0, 20, 400, 3).unwrap();
        assert!(r.degenerate());
        assert_eq!(r.rows[0].fm, 0.0);
    }
}
