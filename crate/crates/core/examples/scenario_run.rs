// Load the shipped canonical scenario, override a field, and run `converge`
// into a temporary directory, as the binary does.

use std::path::Path;

use place_ifs::run::{run, Command};
use place_ifs::Scenario;

pub fn run_example() -> place_ifs::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/canonical.scenario");
    let scenario = Scenario::load_with(&path, &["experiment.replicas=1000".to_string(), "experiment.steps=20".to_string()])?;
    println!("fingerprint {}", scenario.fingerprint());

    let out = std::env::temp_dir().join(format!("place-ifs-example-{}", std::process::id()));
    let outcome = run(Command::Converge, &scenario, &out)?;
    println!("wrote {:?}", outcome.outputs);
    print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
