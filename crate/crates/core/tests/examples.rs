mod measure_algebra_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/measure_algebra.rs"));
}

#[test]
fn measure_algebra_example_runs() {
    measure_algebra_example::run_example().expect("measure_algebra example should run");
}

mod simulate_chain_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulate_chain.rs"));
}

#[test]
fn simulate_chain_example_runs() {
    simulate_chain_example::run_example().expect("simulate_chain example should run");
}

mod coupling_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/coupling.rs"));
}

#[test]
fn coupling_example_runs() {
    coupling_example::run_example().expect("coupling example should run");
}

mod transport_metrics_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transport_metrics.rs"));
}

#[test]
fn transport_metrics_example_runs() {
    transport_metrics_example::run_example().expect("transport_metrics example should run");
}

mod check_conditions_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/check_conditions.rs"));
}

#[test]
fn check_conditions_example_runs() {
    check_conditions_example::run_example().expect("check_conditions example should run");
}

mod convergence_rate_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/convergence_rate.rs"));
}

#[test]
fn convergence_rate_example_runs() {
    convergence_rate_example::run_example().expect("convergence_rate example should run");
}

mod perpetuity_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/perpetuity.rs"));
}

#[test]
fn perpetuity_example_runs() {
    perpetuity_example::run_example().expect("perpetuity example should run");
}

mod scenario_run_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_run.rs"));
}

#[test]
fn scenario_run_example_runs() {
    scenario_run_example::run_example().expect("scenario_run example should run");
}
