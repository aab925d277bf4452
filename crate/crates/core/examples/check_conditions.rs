// Condition report for a contractive system and for the identity map.

use place_ifs::diagnostics::check_conditions;
use place_ifs::rng::{self, tags};
use place_ifs::{AffineMap, PlaceDependentSystem, Region, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let sys = PlaceDependentSystem::new(
        vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
        WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?,
    )?;
    let region = Region::cube(1, -5.0, 5.0)?;
    let report = check_conditions(&sys, &region, 1000, &mut rng::stream(1, tags::DIAGNOSTICS, 0))?;
    print!("{}", report.to_key_value_text());

    let stuck = PlaceDependentSystem::new(vec![AffineMap::identity(2)], WeightFunction::constant(vec![1.0])?)?;
    let report = check_conditions(&stuck, &Region::cube(2, -5.0, 5.0)?, 200, &mut rng::stream(1, tags::DIAGNOSTICS, 0))?;
    println!("identity: alpha = {}, b1 = {}", report.alpha.value, report.passes.b1);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
