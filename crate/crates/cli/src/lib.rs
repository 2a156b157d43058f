//! Command implementations behind the `tvp` binary.
//!
//! Each command returns an [`Outcome`] on completion; errors that prevent a
//! command from running at all (unreadable input, unwritable output) come
//! back as `anyhow::Error`.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use tvp::diagnostics::{
    affine_reproduction_error, evaluate_run, sweep_lambda, uniqueness_probe, Check,
};
use tvp::oracle0d::{compare_with_stepper, integrate_point, richardson_gap, OracleParams};
use tvp::output;
use tvp::scenario::Scenario;
use tvp::stepper::{RunOutput, Simulation};

/// Name of the marker written when a run stops early.
pub const FAILURE_MARKER: &str = "FAILED";

/// Affine map used for the manufactured elasticity check.
pub const MANUFACTURED_MAP: [[f64; 2]; 2] = [[0.3, -0.7], [1.1, 0.4]];

/// Tolerance of the manufactured elasticity check.
pub const MANUFACTURED_TOL: f64 = 1e-10;

/// Whether a completed command met all its checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: &[Check]) -> Outcome {
        Outcome {
            passed: checks.iter().all(|c| c.passed),
            lines: checks.iter().map(check_line).collect(),
        }
    }
}

pub fn check_line(c: &Check) -> String {
    format!(
        "{} {}: {}",
        if c.passed { "PASS" } else { "FAIL" },
        c.name,
        c.detail
    )
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let marker = dir.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).with_context(|| format!("removing {}", marker.display()))?;
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn write_run(dir: &Path, sim: &Simulation, out: &RunOutput) -> Result<()> {
    write(
        dir,
        "diagnostics.csv",
        &output::diagnostics_csv(&out.diagnostics.rows),
    )?;
    for state in &out.states {
        write(
            dir,
            &format!("fields_{}.csv", state.step),
            &output::fields_csv(sim, state),
        )?;
    }
    Ok(())
}

/// `tvp run`: simulate and write `diagnostics.csv` and `fields_<step>.csv`.
/// A failing step leaves the accepted prefix plus a failure marker.
pub fn cmd_run(scenario: &Path, out_dir: &Path) -> Result<Outcome> {
    let sc = load(scenario)?;
    prepare(out_dir)?;
    let sim = Simulation::new(&sc).context("assembling the simulation")?;
    match sim.run() {
        Ok(out) => {
            write_run(out_dir, &sim, &out)?;
            let steps = out.states.len() - 1;
            Ok(Outcome {
                passed: true,
                lines: vec![format!("{}: {steps} steps written", sc.name)],
            })
        }
        Err(failure) => {
            write_run(out_dir, &sim, &failure.partial)?;
            let message = failure.to_string();
            write(out_dir, FAILURE_MARKER, &format!("{message}\n"))?;
            Ok(Outcome {
                passed: false,
                lines: vec![message],
            })
        }
    }
}

/// `tvp sweep`: run once per regularization parameter and write `sweep.csv`.
pub fn cmd_sweep(scenario: &Path, lambdas: &[f64], out_dir: &Path) -> Result<Outcome> {
    let sc = load(scenario)?;
    prepare(out_dir)?;
    let table = sweep_lambda(&sc, lambdas);
    write(out_dir, "sweep.csv", &output::sweep_csv(&table))?;
    let mut lines = Vec::new();
    for row in &table.rows {
        match &row.failure {
            Some(f) => lines.push(format!("FAIL lambda {:e}: {f}", row.lambda)),
            None => {
                for c in &row.checks {
                    lines.push(format!("lambda {:e} {}", row.lambda, check_line(c)));
                }
            }
        }
    }
    lines.extend(table.checks.iter().map(check_line));
    Ok(Outcome {
        passed: table.passed(),
        lines,
    })
}

/// All checks `tvp check` applies to a scenario.
pub fn check_scenario(sc: &Scenario) -> Vec<Check> {
    let mut checks = vec![Check::new("scenario valid", true, sc.name.clone())];
    let sim = match Simulation::new(sc) {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::new("assembly", false, e.to_string()));
            return checks;
        }
    };
    match affine_reproduction_error(sim.mesh(), sim.material(), MANUFACTURED_MAP) {
        Ok(e) => checks.push(Check::at_most(
            "affine displacement reproduced",
            e,
            MANUFACTURED_TOL,
        )),
        Err(e) => checks.push(Check::new(
            "affine displacement reproduced",
            false,
            e.to_string(),
        )),
    }
    let out = match sim.run() {
        Ok(o) => o,
        Err(f) => {
            checks.push(Check::new("run completes", false, f.to_string()));
            return checks;
        }
    };
    let picard_max = sc.solver.picard_max;
    let max_iters = out
        .reports
        .iter()
        .flat_map(|r| std::iter::once(r.outer_iterations).chain(r.inner_iterations.iter().copied()))
        .max()
        .unwrap_or(0);
    checks.push(Check::new(
        "run completes",
        true,
        format!(
            "{} steps, at most {max_iters} of {picard_max} iterations",
            out.reports.len()
        ),
    ));
    checks.extend(evaluate_run(&sim, &out));
    let tol = 10.0 * sc.solver.picard_tol;
    let probes = [0, out.states.len() / 2]
        .into_iter()
        .filter(|&i| i + 1 < out.states.len());
    for i in probes {
        let name = format!("unique fixed points at step {i}");
        match uniqueness_probe(&sim, &out.states[i]) {
            Ok((inner, outer)) => checks.push(Check::new(
                name,
                inner < tol && outer < tol,
                format!("{inner:.3e}, {outer:.3e} < {tol:.1e}"),
            )),
            Err(e) => checks.push(Check::new(name, false, e.to_string())),
        }
    }
    checks
}

/// `tvp check`: validate, run and apply every invariant check.
pub fn cmd_check(scenario: &Path) -> Result<Outcome> {
    let sc = load(scenario)?;
    Ok(Outcome::from_checks(&check_scenario(&sc)))
}

/// `tvp oracle`: integrate the material point, and compare with the
/// stepper when the parameter file names a scenario.
pub fn cmd_oracle(params: &Path, out_dir: &Path) -> Result<Outcome> {
    let p = OracleParams::load(params)
        .with_context(|| format!("loading oracle parameters {}", params.display()))?;
    prepare(out_dir)?;
    let tr = integrate_point(&p.problem, p.n_steps, p.record_every)?;
    write(out_dir, "trajectory.csv", &output::trajectory_csv(&tr))?;
    let gap = richardson_gap(&p.problem, p.n_steps)?;
    let mut lines = vec![format!("self-Richardson gap {gap:.3e}")];
    if let Some(c) = &p.compare {
        let base = params.parent().map(Path::to_path_buf).unwrap_or_default();
        let sc = load(&base.join(&c.scenario))?;
        let cmp = compare_with_stepper(&sc, c.halvings, c.oracle_factor)?;
        write(out_dir, "comparison.csv", &output::comparison_csv(&cmp))?;
        write(
            out_dir,
            "comparison_errors.csv",
            &output::comparison_errors_csv(&cmp),
        )?;
        for r in &cmp.rows {
            lines.push(match r.ratio {
                Some(q) => format!("dt {:e}: error {:.3e}, ratio {q:.3}", r.dt, r.sup_error),
                None => format!("dt {:e}: error {:.3e}", r.dt, r.sup_error),
            });
        }
    }
    Ok(Outcome {
        passed: true,
        lines,
    })
}

/// `tvp lifting`: write the heat-flux lifting series.
pub fn cmd_lifting(scenario: &Path, out_dir: &Path) -> Result<Outcome> {
    let sc = load(scenario)?;
    prepare(out_dir)?;
    let sim = Simulation::new(&sc).context("assembling the simulation")?;
    write(
        out_dir,
        "lifting.csv",
        &output::lifting_csv(sim.mesh(), sim.lifting()),
    )?;
    write(
        out_dir,
        "lifting_summary.csv",
        &output::lifting_summary_csv(sim.lifting()),
    )?;
    Ok(Outcome {
        passed: true,
        lines: vec![format!(
            "{} levels, max H1 norm {:.6e}",
            sim.lifting().values.len(),
            sim.lifting().max_h1
        )],
    })
}

/// Parse a comma-separated list such as `1e-1,1e-2,1e-3`.
pub fn parse_lambdas(s: &str) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            let v: f64 = t.parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` must be positive"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("no values given".into());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_lists() {
        assert_eq!(
            parse_lambdas("1e-1, 1e-2,1e-3").unwrap(),
            [0.1, 0.01, 0.001]
        );
        assert!(parse_lambdas("0.1,x").unwrap_err().contains("`x`"));
        assert!(parse_lambdas("-1").unwrap_err().contains("positive"));
        assert!(parse_lambdas("").is_err());
    }
}
