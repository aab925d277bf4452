// Coupled chains from -5 and 5: distances, sync flags and stopping times.

use place_ifs::coupling::{coupled_replicas, geometric_moment, q_mass, stopping_time, StoppingKind, StoppingParams};
use place_ifs::{AffineMap, PlaceDependentSystem, StatePoint, WeightFunction};

pub fn run_example() -> place_ifs::Result<()> {
    let sys = PlaceDependentSystem::new(
        vec![AffineMap::scalar(0.3, 0.0), AffineMap::scalar(0.5, 1.0)],
        WeightFunction::clamped_affine_pair(vec![-0.3], 0.5, 0.2, 0.8)?,
    )?;
    let (x, y) = (StatePoint::scalar(-5.0), StatePoint::scalar(5.0));
    println!("meet mass at (-5, 5): {:.3}", q_mass(&sys, &x, &y));

    let runs = coupled_replicas(&sys, &x, &y, 60, 2000, 3)?;
    let first = &runs[0];
    let flags: String = first.flags().map(|f| if f { '1' } else { '0' }).collect();
    println!("replica 0 flags {flags}");
    println!("replica 0 distance after 60 steps {:.3e}", first.distances[60]);

    let params = StoppingParams::from_lyapunov(0.46, 0.8);
    for kind in StoppingKind::ALL {
        let samples: Vec<_> = runs.iter().map(|t| stopping_time(t, kind, &params)).collect();
        let m = geometric_moment(&samples, 0.9)?;
        println!(
            "{:>7}: E 0.9^-T = {:?}, censored {:.3}{}",
            kind.name(),
            m.estimate,
            m.censored_fraction,
            if m.lower_bound { " (lower bound)" } else { "" }
        );
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
