//! Iterated function systems with place-dependent probabilities.
//!
//! A system is a finite family of affine maps `S_i(x) = M_i x + Q_i` on
//! `R^d` together with weights `p_i(x)`; the chain moves from `x` to
//! `S_i(x)` with probability `p_i(x)`. The crate provides
//!
//! * [`measures`]: finitely supported measures, total variation, meets and residuals;
//! * [`systems`]: forward and backward simulation and exact pushforward of laws;
//! * [`coupling`]: the meet-plus-residual coupling with its sync flag and stopping times;
//! * [`metrics`]: Fortet–Mourier and Wasserstein distances and exponential rate fits;
//! * [`diagnostics`]: contraction, overlap and Lyapunov checks, invariant laws,
//!   convergence and coupling-tail experiments;
//! * [`perpetuity`]: random affine recursions with mixture laws and their backward series;
//! * [`scenario`] and [`run`]: scenario files and the subcommands of the `place-ifs` binary.
//!
//! ```
//! use place_ifs::{rng, AffineMap, PlaceDependentSystem, StatePoint, WeightFunction};
//!
//! let sys = PlaceDependentSystem::new(
//!     vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
//!     WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8).unwrap(),
//! )
//! .unwrap();
//! let path = sys.simulate(&StatePoint::scalar(-5.0), 50, &mut rng::stream(7, rng::tags::FORWARD, 0)).unwrap();
//! assert!(path.last().coords()[0] > -0.5 && path.last().coords()[0] < 2.5);
//! ```

pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod measures;
pub mod metrics;
pub mod perpetuity;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod systems;

pub use coupling::{CoupledState, StoppingKind, StoppingParams};
pub use diagnostics::{ConditionReport, Region};
pub use error::{Error, Result};
pub use measures::DiscreteMeasure;
pub use metrics::{EmpiricalLaw, RateFit};
pub use perpetuity::MixtureAffineKernel;
pub use scenario::Scenario;
pub use systems::{AffineMap, PlaceDependentSystem, StatePoint, Trajectory, WeightFunction};
