// Index measures at two states, their meet, and the normalized residual.

use place_ifs::measures::{meet, residual_normalized, tv_norm_diff, Residual};
use place_ifs::{StatePoint, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let w = WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?;
    let px = w.measure_at(&StatePoint::scalar(-5.0));
    let py = w.measure_at(&StatePoint::scalar(5.0));
    println!("p(-5) = {:?}", px.atoms());
    println!("p(5)  = {:?}", py.atoms());

    let common = meet(&px, &py);
    println!("meet  = {:?}, mass {:.3}", common.atoms(), common.mass());
    println!("||p(-5) - p(5)|| = {:.3}", tv_norm_diff(&px, &py));

    match residual_normalized(&px, &common)? {
        Residual::Measure(r) => println!("residual of p(-5) = {:?}", r.atoms()),
        Residual::Zero => println!("p(-5) is covered by the meet"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
