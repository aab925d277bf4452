// Random affine recursions: the halving recursion with its closed form, and
// a place-dependent mixture kernel checked against the contraction conditions.

use place_ifs::perpetuity::MixtureAffineKernel;
use place_ifs::rng::{self, tags};
use place_ifs::{AffineMap, DiscreteMeasure, Region, StatePoint, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let halving = MixtureAffineKernel::new(vec![DiscreteMeasure::dirac(AffineMap::scalar(0.5, 1.0))], WeightFunction::constant(vec![1.0])?)?;
    let phi = halving.phi_simulate(&StatePoint::scalar(0.0), 60, &mut rng::stream(0, tags::PERPETUITY_PHI, 0))?;
    let psi = halving.backward_partial_sums(60, &mut rng::stream(0, tags::PERPETUITY_PSI, 0))?;
    println!("Phi_60 = {:.12}, Psi_60 = {:.12}", phi.last().coords()[0], psi[59].coords()[0]);

    let kernel = MixtureAffineKernel::new(
        vec![DiscreteMeasure::dirac(AffineMap::scalar(0.3, 0.0)), DiscreteMeasure::dirac(AffineMap::scalar(0.5, 1.0))],
        WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?,
    )?;
    let report = kernel.check_corollary(&Region::cube(1, -5.0, 5.0)?, 1000, &mut rng::stream(0, tags::DIAGNOSTICS, 0))?;
    println!("alpha = {}, c = {}, delta = {}, all pass = {}", report.alpha.value, report.c.value, report.delta.value, report.passes.all());

    let path = kernel.phi_simulate(&StatePoint::scalar(-5.0), 10, &mut rng::stream(0, tags::PERPETUITY_PHI, 1))?;
    let xs: Vec<String> = path.states.iter().map(|x| format!("{:.3}", x.coords()[0])).collect();
    println!("Phi: {}", xs.join(" "));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
