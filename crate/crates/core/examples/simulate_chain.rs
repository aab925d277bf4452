// Forward paths and the exact law of `X_n` on a small system.

use place_ifs::rng::{self, tags};
use place_ifs::systems::{StateLaw, DEFAULT_SUPPORT_CAP};
use place_ifs::{AffineMap, PlaceDependentSystem, StatePoint, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let sys = PlaceDependentSystem::new(
        vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
        WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?,
    )?;
    let x0 = StatePoint::scalar(-5.0);

    let paths = sys.simulate_replicas(&x0, 10, 4, 42, tags::FORWARD)?;
    for (r, t) in paths.iter().enumerate() {
        println!("replica {r}: maps {:?}, X_10 = {:.4}", t.indices, t.last().coords()[0]);
    }

    // 2^n index words, merged where they land on the same point
    let law = sys.exact_pushforward(&StateLaw::dirac(x0.clone()), 8, DEFAULT_SUPPORT_CAP)?;
    let mean: f64 = law.atoms().iter().map(|(x, w)| x.coords()[0] * w).sum();
    println!("law of X_8: {} atoms, mass {:.12}, mean {mean:.6}", law.len(), law.mass());

    let mc: f64 = (0..20_000)
        .map(|r| sys.simulate(&x0, 8, &mut rng::stream(42, tags::FORWARD_ALT, r)).map(|t| t.last().coords()[0]))
        .sum::<place_ifs::Result<f64>>()?
        / 20_000.0;
    println!("Monte Carlo mean of X_8: {mc:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
