//! Subcommands behind the `place-ifs` binary. Each writes its CSV files, a
//! `report.txt` where there is something to report, and `manifest.json`
//! holding the resolved scenario, so that `--config manifest.json` replays
//! the run bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coupling::{coupled_replicas, StoppingKind, StoppingParams};
use crate::diagnostics::{check_conditions, coupling_tail_experiment, convergence_experiment, estimate_invariant, stationarity_check};
use crate::error::{Error, Result};
use crate::rng::{self, tags};
use crate::scenario::{Model, Scenario};
use crate::systems::StatePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Couple,
    Check { corollary: bool },
    Converge,
    Invariant,
    Perpetuity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Couple => "couple",
            Command::Check { .. } => "check",
            Command::Converge => "converge",
            Command::Invariant => "invariant",
            Command::Perpetuity => "perpetuity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// File names written into the output directory, manifest last.
    pub outputs: Vec<String>,
    pub summary: Value,
    /// `false` only for a check whose pass flags are not all set.
    pub passed: bool,
}

/// Version stamped into manifests.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn coords(p: &StatePoint) -> String {
    p.coords().iter().map(|c| real(*c)).collect::<Vec<_>>().join(",")
}

fn coord_header(dim: usize) -> String {
    (0..dim).map(|k| format!("x_{k}")).collect::<Vec<_>>().join(",")
}

struct Out<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Out<'_> {
    fn file(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.file(name, |w| w.write_all(text.as_bytes()))
    }
}

fn kv(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), real)
}

/// Runs `cmd` on a resolved scenario, writing into `out_dir` (created if missing).
pub fn run(cmd: Command, scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let model = scenario.model()?;
    let sys = model.system()?;
    let e = &scenario.experiment;
    let seed = scenario.seed;
    let dim = scenario.dim;
    let mut out = Out { dir: out_dir, written: Vec::new() };
    let mut passed = true;

    let summary = match cmd {
        Command::Simulate => {
            let paths = sys.simulate_replicas(&scenario.x0()?, e.steps, e.paths, seed, tags::FORWARD)?;
            out.file("trajectory.csv", |w| {
                writeln!(w, "replica,step,{},index", coord_header(dim))?;
                for (r, t) in paths.iter().enumerate() {
                    for (n, x) in t.states.iter().enumerate() {
                        let index = if n == 0 { String::new() } else { t.indices[n - 1].to_string() };
                        writeln!(w, "{r},{n},{},{index}", coords(x))?;
                    }
                }
                Ok(())
            })?;
            json!({ "paths": e.paths, "steps": e.steps })
        }
        Command::Couple => {
            let (x0, y0) = (scenario.x0()?, scenario.y0()?);
            let report = check_conditions(&sys, &scenario.region()?, e.pairs, &mut rng::stream(seed, tags::DIAGNOSTICS, 0))?;
            let (lambda, c) = (report.lyapunov_lambda, report.lyapunov_c);
            let params = if lambda < 1.0 {
                StoppingParams::from_lyapunov(lambda, c)
            } else {
                StoppingParams { kappa_radius: f64::INFINITY, rho_threshold: f64::INFINITY }
            };
            let tail = coupling_tail_experiment(&sys, &x0, &y0, e.horizon, e.replicas, seed, e.beta, params)?;
            let traced = coupled_replicas(&sys, &x0, &y0, e.horizon, e.paths.min(e.replicas), seed)?;
            out.file("coupling.csv", |w| {
                writeln!(w, "replica,step,d_xy,flag")?;
                for (r, t) in traced.iter().enumerate() {
                    for (n, (s, d)) in t.states.iter().zip(&t.distances).enumerate() {
                        let flag = if n == 0 { String::new() } else { u8::from(s.flag).to_string() };
                        writeln!(w, "{r},{n},{},{flag}", real(*d))?;
                    }
                }
                Ok(())
            })?;
            out.file("stopping_times.csv", |w| {
                writeln!(w, "replica,kind,value,censored")?;
                for (r, row) in tail.samples.iter().enumerate() {
                    for s in row {
                        let value = s.value.map_or_else(String::new, |v| v.to_string());
                        writeln!(w, "{r},{},{value},{}", s.kind.name(), u8::from(s.censored()))?;
                    }
                }
                Ok(())
            })?;
            let mut lines = vec![
                ("horizon", tail.horizon.to_string()),
                ("replicas", tail.replicas.to_string()),
                ("beta", real(tail.beta)),
                ("lyapunov_lambda", real(lambda)),
                ("lyapunov_c", real(c)),
                ("kappa_radius", real(params.kappa_radius)),
                ("rho_threshold", real(params.rho_threshold)),
                ("tau_q_hat", opt_real(tail.tau_fit.as_ref().map(|f| f.q_hat))),
                ("tau_r_squared", opt_real(tail.tau_fit.as_ref().map(|f| f.r_squared))),
            ];
            let mut moment_lines = Vec::new();
            for (kind, m) in &tail.moments {
                moment_lines.push((format!("{}.moment", kind.name()), opt_real(m.estimate)));
                moment_lines.push((format!("{}.lower_bound", kind.name()), m.lower_bound.to_string()));
                moment_lines.push((format!("{}.censored_fraction", kind.name()), real(m.censored_fraction)));
            }
            lines.extend(moment_lines.iter().map(|(k, v)| (k.as_str(), v.clone())));
            out.text("report.txt", &kv(&lines))?;
            json!({
                "params": params,
                "tau_fit": tail.tau_fit,
                "moments": tail.moments.iter().map(|(k, m)| (k.name().to_string(), json!(m))).collect::<serde_json::Map<_, _>>(),
                "censored": StoppingKind::ALL.iter().map(|k| (k.name().to_string(), json!(tail.censored_fraction(*k)))).collect::<serde_json::Map<_, _>>(),
            })
        }
        Command::Check { corollary } => {
            let region = scenario.region()?;
            let mut stream = rng::stream(seed, tags::DIAGNOSTICS, 0);
            let report = if corollary {
                let kernel = model
                    .kernel()
                    .ok_or_else(|| Error::NotApplicable("check --corollary needs a mixture_affine system".into()))?;
                kernel.check_corollary(&region, e.pairs, &mut stream)?
            } else {
                check_conditions(&sys, &region, e.pairs, &mut stream)?
            };
            passed = report.passes.all();
            out.text("report.txt", &report.to_key_value_text())?;
            serde_json::to_value(&report)?
        }
        Command::Converge => {
            let mut result = convergence_experiment(&sys, &scenario.x0()?, &scenario.y0()?, e.steps, e.replicas, seed)?;
            result.fingerprint = Some(scenario.fingerprint());
            out.file("convergence.csv", |w| {
                writeln!(w, "n,fm,w1,replicas,noise_floor")?;
                for row in &result.rows {
                    writeln!(w, "{},{},{},{},{}", row.n, real(row.fm), real(row.w1), result.replicas, real(result.noise_floor))?;
                }
                Ok(())
            })?;
            let fit = result.fit.as_ref();
            out.text(
                "report.txt",
                &kv(&[
                    ("replicas", result.replicas.to_string()),
                    ("noise_floor", real(result.noise_floor)),
                    ("degenerate", result.degenerate().to_string()),
                    ("q_hat", opt_real(fit.map(|f| f.q_hat))),
                    ("c_hat", opt_real(fit.map(|f| f.c_hat))),
                    ("r_squared", opt_real(fit.map(|f| f.r_squared))),
                    ("window", fit.map_or_else(|| "none".into(), |f| format!("{}..={}", f.window.0, f.window.1))),
                    ("fingerprint", scenario.fingerprint()),
                ]),
            )?;
            json!({ "noise_floor": result.noise_floor, "fit": result.fit, "degenerate": result.degenerate() })
        }
        Command::Invariant => {
            let law = estimate_invariant(&sys, e.burn_in, e.samples, &mut rng::stream(seed, tags::INVARIANT, 0))?;
            let stationarity = stationarity_check(&sys, &law)?;
            out.file("invariant.csv", |w| {
                writeln!(w, "{},weight", coord_header(dim))?;
                for (p, wt) in law.points().iter().zip(law.weights()) {
                    writeln!(w, "{},{}", coords(p), real(*wt))?;
                }
                Ok(())
            })?;
            let mean = law.mean();
            out.text(
                "report.txt",
                &kv(&[
                    ("burn_in", e.burn_in.to_string()),
                    ("samples", e.samples.to_string()),
                    ("support", law.len().to_string()),
                    ("mean", format!("{mean:?}")),
                    ("stationarity_fm", real(stationarity)),
                ]),
            )?;
            json!({ "support": law.len(), "mean": mean, "stationarity_fm": stationarity })
        }
        Command::Perpetuity => {
            let x0 = scenario.x0()?;
            let kernel = match &model {
                Model::Mixture(k) => k.clone(),
                Model::Finite(_) => {
                    return Err(Error::NotApplicable("perpetuity needs a mixture_affine system".into()));
                }
            };
            let psi_ok = kernel.weights().is_constant();
            let series = (0..e.paths)
                .into_par_iter()
                .map(|r| {
                    let phi = kernel.phi_simulate(&x0, e.steps, &mut rng::stream(seed, tags::PERPETUITY_PHI, r as u64))?;
                    let psi = if psi_ok {
                        kernel.backward_partial_sums(e.steps, &mut rng::stream(seed, tags::PERPETUITY_PSI, r as u64))?
                    } else {
                        Vec::new()
                    };
                    Ok((phi.states, psi))
                })
                .collect::<Result<Vec<_>>>()?;
            out.file("perpetuity.csv", |w| {
                writeln!(w, "replica,series,step,{}", coord_header(dim))?;
                for (r, (phi, psi)) in series.iter().enumerate() {
                    for (n, x) in phi.iter().enumerate() {
                        writeln!(w, "{r},phi,{n},{}", coords(x))?;
                    }
                    for (n, x) in psi.iter().enumerate() {
                        writeln!(w, "{r},psi,{},{}", n + 1, coords(x))?;
                    }
                }
                Ok(())
            })?;
            json!({ "paths": e.paths, "steps": e.steps, "psi": psi_ok })
        }
    };

    let mut outputs = out.written.clone();
    outputs.push("manifest.json".to_string());
    let options = match cmd {
        Command::Check { corollary } => json!({ "corollary": corollary }),
        _ => json!({}),
    };
    let manifest = json!({
        "artifact_version": ARTIFACT_VERSION,
        "subcommand": cmd.name(),
        "options": options,
        "fingerprint": scenario.fingerprint(),
        "scenario": scenario,
        "outputs": outputs,
        "summary": summary,
    });
    out.text("manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(RunOutcome { outputs, summary, passed })
}
