// FM and W1 between empirical laws, on the line and in the plane.

use place_ifs::metrics::{fm_distance, fm_transport, w1_distance};
use place_ifs::{EmpiricalLaw, StatePoint};

fn law(points: &[&[f64]], weights: &[f64]) -> place_ifs::Result<EmpiricalLaw> {
    let points = points.iter().map(|p| StatePoint::new(p.to_vec())).collect::<place_ifs::Result<Vec<_>>>()?;
    EmpiricalLaw::new(points, weights.to_vec())
}

pub fn run_example() -> place_ifs::Result<()> {
    let a = law(&[&[0.0], &[1.0]], &[0.5, 0.5])?;
    let b = law(&[&[1.0], &[2.0]], &[0.5, 0.5])?;
    println!("line: W1 = {}, FM = {}", w1_distance(&a, &b)?, fm_distance(&a, &b)?);

    // far apart: W1 grows with the gap, FM stops at 2
    let far = law(&[&[100.0]], &[1.0])?;
    println!("far:  W1 = {}, FM = {}", w1_distance(&a, &far)?, fm_distance(&a, &far)?);

    let p = law(&[&[0.0, 0.0], &[3.0, 0.0], &[0.0, 0.5]], &[0.5, 0.25, 0.25])?;
    let q = law(&[&[0.5, 0.0], &[0.0, 4.0]], &[0.75, 0.25])?;
    let plan = fm_transport(&p, &q)?;
    println!("plane: FM = {:.6}", plan.cost);
    for (i, j, m) in &plan.flows {
        println!("  move {m:.3} from {:?} to {:?}", p.points()[*i].coords(), q.points()[*j].coords());
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
