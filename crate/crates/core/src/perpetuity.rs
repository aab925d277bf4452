//! Random affine recursions `Φ_n = M_n Φ_{n−1} + Q_n` with place-dependent
//! mixture laws `μ_x = Σ_k p_k(x) ν_k`, and the backward series
//! `Ψ_n = Σ_{j ≤ n} M_1 ⋯ M_{j−1} Q_j`.

use rand::Rng;

use crate::diagnostics::{check_conditions_with, ConditionReport, ContractiveEvent, Region};
use crate::error::{Error, Result};
use crate::measures::{sample_atom, DiscreteMeasure, MASS_TOLERANCE};
use crate::systems::{AffineMap, PlaceDependentSystem, StatePoint, Trajectory, WeightFunction};

#[derive(Debug, Clone)]
pub struct MixtureAffineKernel {
    dim: usize,
    components: Vec<DiscreteMeasure<AffineMap>>,
    weights: WeightFunction,
    atoms: Vec<AffineMap>,
}

impl MixtureAffineKernel {
    /// Each component must be a probability measure on maps of one common
    /// dimension; `weights` selects among the components.
    pub fn new(components: Vec<DiscreteMeasure<AffineMap>>, weights: WeightFunction) -> Result<Self> {
        let first = components
            .iter()
            .find_map(|c| c.atoms().first())
            .ok_or_else(|| Error::InvalidValue("mixture kernel needs a nonempty component".into()))?;
        let dim = first.0.dim();
        for (k, c) in components.iter().enumerate() {
            if !c.is_probability() {
                return Err(Error::InvalidValue(format!("component {k} has mass {}, not 1", c.mass())));
            }
            if let Some((m, _)) = c.atoms().iter().find(|(m, _)| m.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
        }
        if weights.count() != components.len() {
            return Err(Error::DimensionMismatch { expected: components.len(), found: weights.count() });
        }
        let mut atoms: Vec<AffineMap> = components.iter().flat_map(|c| c.labels().cloned()).collect();
        atoms.sort();
        atoms.dedup();
        Ok(Self { dim, components, weights, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[DiscreteMeasure<AffineMap>] {
        &self.components
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }

    /// Union of the component supports, sorted.
    pub fn atoms(&self) -> &[AffineMap] {
        &self.atoms
    }

    /// `μ_x = Σ_k p_k(x) ν_k`.
    pub fn law_at(&self, x: &StatePoint) -> DiscreteMeasure<AffineMap> {
        self.weights
            .eval(x)
            .iter()
            .zip(&self.components)
            .fold(DiscreteMeasure::empty(), |acc, (p, c)| acc.add(&c.scale(*p)))
    }

    /// `table[k][j] = ν_k(atoms[j])`.
    fn table(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| self.atoms.iter().map(|a| c.weight(a)).collect()).collect()
    }

    /// The finite system on [`atoms`](Self::atoms) with `p_j(x) = Σ_k p_k(x) ν_k(atom_j)`.
    pub fn to_system(&self) -> Result<PlaceDependentSystem> {
        let table = self.table();
        let identity = table.len() == self.atoms.len()
            && table.iter().enumerate().all(|(k, row)| row.iter().enumerate().all(|(j, v)| *v == if j == k { 1.0 } else { 0.0 }));
        let weights = if identity {
            self.weights.clone()
        } else if let WeightFunction::Constant { probs } = &self.weights {
            let mut mixed = vec![0.0; self.atoms.len()];
            for (p, row) in probs.iter().zip(&table) {
                for (m, t) in mixed.iter_mut().zip(row) {
                    *m += p * t;
                }
            }
            WeightFunction::constant(mixed)?
        } else {
            WeightFunction::mixture(self.weights.clone(), table)?
        };
        PlaceDependentSystem::new(self.atoms.clone(), weights)
    }

    fn draw<R: Rng + ?Sized>(&self, x: &StatePoint, rng: &mut R) -> Result<usize> {
        let component = *sample_atom(&self.weights.measure_at(x), rng)?;
        let map = sample_atom(&self.components[component], rng)?;
        Ok(self.atoms.binary_search(map).expect("atom belongs to the union"))
    }

    /// `Φ_0 = x0`, `Φ_k = M_k Φ_{k−1} + Q_k` with `(M_k, Q_k) ~ μ_{Φ_{k−1}}`.
    /// `indices` refer to [`atoms`](Self::atoms).
    ///
    /// With constant weights this is `to_system().simulate`; otherwise a
    /// component is drawn from `p(x)` and then an atom from it.
    pub fn phi_simulate<R: Rng + ?Sized>(&self, x0: &StatePoint, n: usize, rng: &mut R) -> Result<Trajectory> {
        if x0.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x0.dim() });
        }
        if self.weights.is_constant() {
            return self.to_system()?.simulate(x0, n, rng);
        }
        let mut states = vec![x0.clone()];
        let mut indices = Vec::with_capacity(n);
        for _ in 0..n {
            let x = states.last().unwrap();
            let j = self.draw(x, rng)?;
            states.push(self.atoms[j].apply(x));
            indices.push(j);
        }
        Ok(Trajectory { states, indices, seed: None })
    }

    /// `Ψ_1, …, Ψ_n` along one i.i.d. draw of `(M_j, Q_j)`. Needs constant weights.
    pub fn backward_partial_sums<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<StatePoint>> {
        if !self.weights.is_constant() {
            return Err(Error::NotApplicable("the perpetuity series needs place-independent weights".into()));
        }
        let origin = StatePoint::origin(self.dim);
        // `prefix` is x ↦ M_1 ⋯ M_{j−1} x + Ψ_{j−1}, so Ψ_j = prefix(Q_j)
        let mut prefix = AffineMap::identity(self.dim);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let j = self.draw(&origin, rng)?;
            prefix = prefix.compose(&self.atoms[j]);
            out.push(prefix.apply(&origin));
        }
        Ok(out)
    }

    /// Condition report for the flattened system. `δ` counts atoms with
    /// `‖m‖ ≤ t` regardless of the pair.
    pub fn check_corollary<R: Rng + ?Sized>(&self, region: &Region, pairs: usize, rng: &mut R) -> Result<ConditionReport> {
        check_conditions_with(&self.to_system()?, region, pairs, ContractiveEvent::OperatorNorm, rng)
    }
}

/// `(p(x), 1 − p(x))` evaluated for a two-component kernel; named to keep the
/// complement weight apart from the fitted rate `q_hat`.
pub fn weight_p_and_complement(kernel: &MixtureAffineKernel, x: &StatePoint) -> Option<(f64, f64)> {
    let w = kernel.weights().eval(x);
    (w.len() == 2 && (w[0] + w[1] - 1.0).abs() <= MASS_TOLERANCE).then(|| (w[0], w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::systems::{StateLaw, DEFAULT_SUPPORT_CAP};

    fn point(m: f64, q: f64) -> DiscreteMeasure<AffineMap> {
        DiscreteMeasure::dirac(AffineMap::scalar(m, q))
    }

    fn example() -> MixtureAffineKernel {
        MixtureAffineKernel::new(
            vec![point(0.3, 0.0), point(0.5, 1.0)],
            WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8).unwrap(),
        )
        .unwrap()
    }

    fn halving() -> MixtureAffineKernel {
        MixtureAffineKernel::new(vec![point(0.5, 1.0)], WeightFunction::constant(vec![1.0]).unwrap()).unwrap()
    }

    fn s(x: f64) -> StatePoint {
        StatePoint::scalar(x)
    }

    #[test]
    fn example_flattens_to_two_maps() {
        let sys = example().to_system().unwrap();
        assert_eq!(sys.maps().len(), 2);
        assert_eq!(sys.weights(), example().weights());
        let (p, q) = weight_p_and_complement(&example(), &s(0.0)).unwrap();
        assert_eq!((p, q), (0.5, 0.5));
    }

    #[test]
    fn single_component_stays_constant() {
        let nu = DiscreteMeasure::new([(AffineMap::scalar(0.2, 0.0), 0.25), (AffineMap::scalar(0.6, 1.0), 0.75)]).unwrap();
        let k = MixtureAffineKernel::new(vec![nu], WeightFunction::constant(vec![1.0]).unwrap()).unwrap();
        let sys = k.to_system().unwrap();
        assert!(sys.is_place_independent());
        assert_eq!(sys.weights().eval(&s(3.0)), vec![0.25, 0.75]);
    }

    #[test]
    fn closed_form_recursion() {
        let t = halving().phi_simulate(&s(0.0), 60, &mut rng::stream(0, 6, 0)).unwrap();
        for (n, x) in t.states.iter().enumerate() {
            assert!((x.coords()[0] - 2.0 * (1.0 - 0.5f64.powi(n as i32))).abs() < 1e-12);
        }
        let psi = halving().backward_partial_sums(60, &mut rng::stream(0, 7, 0)).unwrap();
        for (k, x) in psi.iter().enumerate() {
            assert!((x.coords()[0] - 2.0 * (1.0 - 0.5f64.powi(k as i32 + 1))).abs() < 1e-12);
        }
        assert_eq!(halving().phi_simulate(&s(4.0), 0, &mut rng::stream(0, 6, 0)).unwrap().states, vec![s(4.0)]);
    }

    #[test]
    fn first_partial_sum_is_first_offset() {
        let nu = DiscreteMeasure::new([(AffineMap::scalar(0.2, -1.0), 0.5), (AffineMap::scalar(0.6, 3.0), 0.5)]).unwrap();
        let k = MixtureAffineKernel::new(vec![nu], WeightFunction::constant(vec![1.0]).unwrap()).unwrap();
        for seed in 0..20 {
            let psi = k.backward_partial_sums(1, &mut rng::stream(seed, 7, 0)).unwrap();
            assert!(psi[0] == s(-1.0) || psi[0] == s(3.0));
        }
        assert!(matches!(example().backward_partial_sums(3, &mut rng::stream(0, 7, 0)), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn phi_follows_the_flattened_system() {
        let k = example();
        let sys = k.to_system().unwrap();
        let t = k.phi_simulate(&s(2.0), 50, &mut rng::stream(1, 6, 0)).unwrap();
        for i in 0..50 {
            assert_eq!(sys.maps()[t.indices[i]].apply(&t.states[i]), t.states[i + 1]);
        }
        let law = sys.exact_pushforward(&StateLaw::dirac(s(2.0)), 4, DEFAULT_SUPPORT_CAP).unwrap();
        assert!((law.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corollary_on_example() {
        let r = example().check_corollary(&Region::cube(1, -5.0, 5.0).unwrap(), 500, &mut rng::stream(0, 4, 0)).unwrap();
        assert!((r.alpha.value - 0.46).abs() < 1e-15);
        assert!((r.c.value - 0.8).abs() < 1e-15);
        assert!((r.delta.value - 0.4).abs() < 1e-12);
        assert!(r.passes.all());
    }

    #[test]
    fn expanding_atom_fails_b1() {
        let k = MixtureAffineKernel::new(
            vec![point(1.5, 0.0), point(0.5, 1.0)],
            WeightFunction::constant(vec![0.8, 0.2]).unwrap(),
        )
        .unwrap();
        let r = k.check_corollary(&Region::cube(1, -5.0, 5.0).unwrap(), 50, &mut rng::stream(0, 4, 0)).unwrap();
        assert!(r.alpha.value >= 1.0);
        assert!(!r.passes.b1);
    }
}
