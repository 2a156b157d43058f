//! CSV serialization. Every float is written as `{:.16e}` (17 significant
//! digits), so files round-trip exactly and are byte-stable.

use std::fmt::Write;

use crate::diagnostics::{StepRow, SweepTable};
use crate::lifting::LiftingSeries;
use crate::mesh::Mesh2D;
use crate::oracle0d::{Comparison, PointTrajectory};
use crate::stepper::{SimState, Simulation};
use crate::tensor::SymTensor3;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

const COMPONENTS: [&str; 6] = ["xx", "yy", "zz", "xy", "yz", "xz"];

fn tensor_header(prefix: &str) -> String {
    COMPONENTS
        .iter()
        .map(|c| format!("{prefix}_{c}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn tensor_cells(t: &SymTensor3) -> String {
    t.to_array()
        .iter()
        .map(|&v| num(v))
        .collect::<Vec<_>>()
        .join(",")
}

pub const DIAGNOSTICS_HEADER: &str = "t,E_total,E_thermal,E_elastic,min_dissipation,norm_T,\
norm_eps_ut_sq,picard_R_iters,picard_P_iters_total,contraction_R,contraction_P";

pub fn diagnostics_csv(rows: &[StepRow]) -> String {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.e_total),
            num(r.e_thermal),
            num(r.e_elastic),
            num(r.min_dissipation),
            num(r.norm_t),
            num(r.norm_eps_ut_sq),
            r.picard_r_iters,
            r.picard_p_iters_total,
            num(r.contraction_r),
            num(r.contraction_p),
        );
    }
    s
}

/// Node rows carry displacement and physical temperature; element rows,
/// placed at the centroid, carry plastic strain and stress. Cells that do
/// not apply to a row are empty.
pub fn fields_csv(sim: &Simulation, state: &SimState) -> String {
    let mesh = sim.mesh();
    let theta_hat = sim.theta_hat(state);
    let mut s = format!(
        "entity,id,x,y,ux,uy,theta_hat,{},{}\n",
        tensor_header("eps_p"),
        tensor_header("T")
    );
    let blanks = ",".repeat(11);
    for (n, x) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(
            s,
            "node,{n},{},{},{},{},{},{blanks}",
            num(x[0]),
            num(x[1]),
            num(state.u[2 * n]),
            num(state.u[2 * n + 1]),
            num(theta_hat[n]),
        );
    }
    for e in 0..mesh.n_elements() {
        let c = mesh.centroid(e);
        let _ = writeln!(
            s,
            "element,{e},{},{},,,,{},{}",
            num(c[0]),
            num(c[1]),
            tensor_cells(&state.eps_p[e]),
            tensor_cells(&state.stress[e]),
        );
    }
    s
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let k = table.rows.len();
    let mut s = String::from(
        "lambda,status,sup_norm_T,sum_dt_T_rate_sq,sum_dt_eps_ut_sq,lambda_sum_dt_yosida_sq",
    );
    if k > 1 {
        for j in 0..k {
            let _ = write!(s, ",sup_diff_{j}");
        }
    }
    s.push('\n');
    for (i, r) in table.rows.iter().enumerate() {
        let status = match &r.failure {
            Some(_) => "failed",
            None if r.passed() => "pass",
            None => "fail",
        };
        let _ = write!(
            s,
            "{},{status},{},{},{},{}",
            num(r.lambda),
            num(r.sup_norm_t),
            num(r.sum_dt_stress_rate_sq),
            num(r.sum_dt_eps_ut_sq),
            num(r.lambda_sum_dt_yosida_sq),
        );
        if k > 1 {
            for j in 0..k {
                let _ = write!(s, ",{}", num(table.pairwise[i][j]));
            }
        }
        s.push('\n');
    }
    s
}

pub fn lifting_csv(mesh: &Mesh2D, lifting: &LiftingSeries) -> String {
    let mut s = String::from("step,t,node,x,y,theta_lift,theta_lift_t\n");
    for (n, (v, r)) in lifting.values.iter().zip(&lifting.rates).enumerate() {
        let t = num(n as f64 * lifting.dt);
        for (i, x) in mesh.nodes().iter().enumerate() {
            let _ = writeln!(
                s,
                "{n},{t},{i},{},{},{},{}",
                num(x[0]),
                num(x[1]),
                num(v[i]),
                num(r[i])
            );
        }
    }
    s
}

pub fn lifting_summary_csv(lifting: &LiftingSeries) -> String {
    format!(
        "n_steps,dt,max_h1,sum_dt_rate_sq\n{},{},{},{}\n",
        lifting.n_steps(),
        num(lifting.dt),
        num(lifting.max_h1),
        num(lifting.sum_dt_rate_sq)
    )
}

pub fn trajectory_csv(tr: &PointTrajectory) -> String {
    let mut s = format!(
        "t,{},{},{},theta,dissipation,energy,power\n",
        tensor_header("strain"),
        tensor_header("eps_p"),
        tensor_header("T")
    );
    for p in &tr.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            num(p.t),
            tensor_cells(&p.strain),
            tensor_cells(&p.eps_p),
            tensor_cells(&p.stress),
            num(p.theta),
            num(p.dissipation),
            num(p.energy),
            num(p.power),
        );
    }
    s
}

/// Summary table with one row per stepper `dt`.
pub fn comparison_csv(c: &Comparison) -> String {
    let mut s = String::from("dt,sup_error,ratio,oracle_steps,oracle_richardson\n");
    for r in &c.rows {
        let ratio = r.ratio.map(num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{ratio},{},{}",
            num(r.dt),
            num(r.sup_error),
            c.oracle_steps,
            num(c.oracle_richardson)
        );
    }
    s
}

/// Per-level errors of every comparison run.
pub fn comparison_errors_csv(c: &Comparison) -> String {
    let mut s = String::from("dt,t,eps_p_error,theta_error\n");
    for r in &c.rows {
        for &(t, e, th) in &r.errors {
            let _ = writeln!(s, "{},{},{},{}", num(r.dt), num(t), num(e), num(th));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn field_rows_have_uniform_width() {
        let sc = Scenario::from_toml_str(
            "mesh.nx = 2\nmesh.ny = 1\ntime.t_final = 0.1\ntime.dt = 0.05\n",
        )
        .unwrap();
        let sim = Simulation::new(&sc).unwrap();
        let st = sim.initial_state().unwrap();
        let csv = fields_csv(&sim, &st);
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|&w| w == 19));
        assert_eq!(csv.lines().count(), 1 + 6 + 4);
    }

    #[test]
    fn diagnostics_header_is_exact() {
        let head = diagnostics_csv(&[]);
        assert_eq!(
            head.trim_end().split(',').collect::<Vec<_>>(),
            [
                "t",
                "E_total",
                "E_thermal",
                "E_elastic",
                "min_dissipation",
                "norm_T",
                "norm_eps_ut_sq",
                "picard_R_iters",
                "picard_P_iters_total",
                "contraction_R",
                "contraction_P"
            ]
        );
    }
}
