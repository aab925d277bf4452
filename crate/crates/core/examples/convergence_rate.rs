// Rate of convergence in FM between chains started at -5 and 5, and the
// stationarity defect of a long-run empirical law.

use place_ifs::diagnostics::{convergence_experiment, estimate_invariant, stationarity_check};
use place_ifs::rng::{self, tags};
use place_ifs::{AffineMap, PlaceDependentSystem, StatePoint, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let sys = PlaceDependentSystem::new(
        vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
        WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?,
    )?;
    let result = convergence_experiment(&sys, &StatePoint::scalar(-5.0), &StatePoint::scalar(5.0), 20, 2000, 9)?;
    for row in result.rows.iter().take(12) {
        println!("n = {:2}  FM = {:.5}  W1 = {:.5}", row.n, row.fm, row.w1);
    }
    match &result.fit {
        Some(f) => println!("q_hat = {:.3}, r2 = {:.3} on n in {:?} (floor {:.3})", f.q_hat, f.r_squared, f.window, result.noise_floor),
        None => println!("too few points above the floor {:.3}", result.noise_floor),
    }

    let law = estimate_invariant(&sys, 500, 2000, &mut rng::stream(9, tags::INVARIANT, 0))?;
    println!("invariant mean {:.4}, FM(law, P* law) = {:.4}", law.mean()[0], stationarity_check(&sys, &law)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
