//! Per-step energy and dissipation bookkeeping, run-level invariant checks,
//! and the regularization sweep.

use crate::constitutive::{flow_rule, resolvent, MaterialParams};
use crate::mesh::{ElementTensor, Mesh2D, NodalScalar};
use crate::scenario::Scenario;
use crate::stepper::{RunOutput, SimState, Simulation, StepReport};
use crate::tensor::SymTensor3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub total: f64,
    pub thermal: f64,
    pub elastic: f64,
}

/// `int theta_hat` and `1/2 int C^-1 T . T` with the one-point rule.
pub fn total_energy(
    mesh: &Mesh2D,
    material: &MaterialParams,
    theta_hat: &NodalScalar,
    stress: &[SymTensor3],
) -> Energy {
    let thermal = mesh.integrate_elementwise(&mesh.element_means(theta_hat));
    let density: Vec<f64> = stress
        .iter()
        .map(|&t| 0.5 * material.elasticity.apply_inv(t).inner(t))
        .collect();
    let elastic = mesh.integrate_elementwise(&density);
    Energy {
        total: thermal + elastic,
        thermal,
        elastic,
    }
}

/// Smallest element value of `dev T . rate`.
pub fn dissipation_min(stress: &[SymTensor3], rate: &[SymTensor3]) -> f64 {
    stress
        .iter()
        .zip(rate)
        .map(|(t, r)| t.dev().inner(*r))
        .fold(f64::INFINITY, f64::min)
}

/// One diagnostics row. The first eleven fields are the `diagnostics.csv`
/// columns; the rest feed the checks and the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub t: f64,
    pub e_total: f64,
    pub e_thermal: f64,
    pub e_elastic: f64,
    pub min_dissipation: f64,
    pub norm_t: f64,
    pub norm_eps_ut_sq: f64,
    pub picard_r_iters: usize,
    pub picard_p_iters_total: usize,
    pub contraction_r: f64,
    pub contraction_p: f64,
    /// `||(T_{n+1} - T_n) / dt||^2`.
    pub stress_rate_sq: f64,
    /// `||grad M_lambda(dev T)||^2`.
    pub yosida_sq: f64,
    /// `max_e |grad M_lambda(dev T) - G(J_lambda(dev T))| / (1 + |grad M_lambda|)`.
    pub flow_residual: f64,
    /// `int T(dev T . eps_p')`, the source used while stepping.
    pub heat_source: f64,
    /// `int T(|dev T|^(p+1))`, the source of the unregularized model.
    pub heat_source_limit: f64,
    pub max_trace_eps_p: f64,
    pub stress_cache_error: f64,
}

impl StepRow {
    fn common(sim: &Simulation, state: &SimState) -> StepRow {
        let mesh = sim.mesh();
        let m = sim.material();
        let energy = total_energy(mesh, m, &sim.theta_hat(state), &state.stress);
        let mut yosida = Vec::with_capacity(mesh.n_elements());
        let mut flow_residual: f64 = 0.0;
        let mut limit = Vec::with_capacity(mesh.n_elements());
        for t in &state.stress {
            let z = t.dev();
            let (g, residual) = yosida_and_residual(m, z);
            flow_residual = flow_residual.max(residual);
            yosida.push(g.norm_sq());
            limit.push(m.truncate(z.norm().powf(m.p + 1.0)));
        }
        let (trace, cache) = sim.invariant_defects(state);
        StepRow {
            t: state.t,
            e_total: energy.total,
            e_thermal: energy.thermal,
            e_elastic: energy.elastic,
            min_dissipation: 0.0,
            norm_t: mesh.tensor_norm(&state.stress),
            norm_eps_ut_sq: mesh.tensor_norm_sq(&mesh.strain_of(&state.u_t)),
            picard_r_iters: 0,
            picard_p_iters_total: 0,
            contraction_r: 0.0,
            contraction_p: 0.0,
            stress_rate_sq: 0.0,
            yosida_sq: mesh.integrate_elementwise(&yosida),
            flow_residual,
            heat_source: 0.0,
            heat_source_limit: mesh.integrate_elementwise(&limit),
            max_trace_eps_p: trace,
            stress_cache_error: cache,
        }
    }

    /// Row of the initial state; the dissipation uses the instantaneous
    /// plastic rate.
    pub fn initial(sim: &Simulation, state: &SimState) -> StepRow {
        let m = sim.material();
        let rate: Vec<SymTensor3> = state
            .stress
            .iter()
            .map(|t| m.plastic_rate(t.dev()).unwrap_or(SymTensor3::ZERO))
            .collect();
        let mut row = StepRow::common(sim, state);
        row.min_dissipation = dissipation_min(&state.stress, &rate);
        row
    }

    /// Row of an accepted step from `prev` to `next`.
    pub fn after_step(
        sim: &Simulation,
        prev: &SimState,
        next: &SimState,
        report: &StepReport,
    ) -> StepRow {
        let mesh = sim.mesh();
        let m = sim.material();
        let dt = sim.dt();
        let rate: ElementTensor = next
            .eps_p
            .iter()
            .zip(&prev.eps_p)
            .map(|(a, b)| (*a - *b).scale(1.0 / dt))
            .collect();
        let stress_rate: ElementTensor = next
            .stress
            .iter()
            .zip(&prev.stress)
            .map(|(a, b)| (*a - *b).scale(1.0 / dt))
            .collect();
        let source: Vec<f64> = next
            .stress
            .iter()
            .zip(&rate)
            .map(|(t, r)| m.truncate(t.dev().inner(*r)))
            .collect();
        let mut row = StepRow::common(sim, next);
        row.min_dissipation = dissipation_min(&next.stress, &rate);
        row.picard_r_iters = report.outer_iterations;
        row.picard_p_iters_total = report.inner_total();
        row.contraction_r = report.contraction_outer;
        row.contraction_p = report.contraction_inner;
        row.stress_rate_sq = mesh.tensor_norm_sq(&stress_rate);
        row.heat_source = mesh.integrate_elementwise(&source);
        row
    }
}

fn yosida_and_residual(m: &MaterialParams, z: SymTensor3) -> (SymTensor3, f64) {
    let g = match m.plastic_rate(z) {
        Ok(g) => g,
        Err(_) => return (SymTensor3::ZERO, f64::INFINITY),
    };
    if m.yosida_lambda == 0.0 {
        return (g, 0.0);
    }
    match resolvent(z, m.yosida_lambda, m.p) {
        Ok(j) => (g, (g - flow_rule(j, m.p)).norm() / (1.0 + g.norm())),
        Err(_) => (g, f64::INFINITY),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub rows: Vec<StepRow>,
}

impl DiagnosticsReport {
    pub fn sup_norm_t(&self) -> f64 {
        self.rows.iter().map(|r| r.norm_t).fold(0.0, f64::max)
    }

    /// Sums over the steps, skipping the initial row.
    fn sum_dt(&self, dt: f64, f: impl Fn(&StepRow) -> f64) -> f64 {
        self.rows.iter().skip(1).map(|r| dt * f(r)).sum()
    }

    pub fn sum_dt_stress_rate_sq(&self, dt: f64) -> f64 {
        self.sum_dt(dt, |r| r.stress_rate_sq)
    }

    pub fn sum_dt_eps_ut_sq(&self, dt: f64) -> f64 {
        self.sum_dt(dt, |r| r.norm_eps_ut_sq)
    }

    pub fn sum_dt_yosida_sq(&self, dt: f64) -> f64 {
        self.sum_dt(dt, |r| r.yosida_sq)
    }

    /// Largest per-step energy increase relative to `|E_0|`.
    pub fn max_energy_increase(&self) -> f64 {
        let e0 = self.rows.first().map_or(0.0, |r| r.e_total.abs());
        let scale = if e0 > 0.0 { e0 } else { 1.0 };
        self.rows
            .windows(2)
            .map(|w| (w[1].e_total - w[0].e_total) / scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_dissipation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.min_dissipation)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check::new(name, value <= limit, format!("{value:.3e} <= {limit:.1e}"))
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check::new(name, value >= limit, format!("{value:.3e} >= {limit:.1e}"))
    }
}

pub const DISSIPATION_FLOOR: f64 = -1e-12;
pub const ENERGY_SLACK: f64 = 1e-8;
pub const INVARIANT_TOL: f64 = 1e-10;
pub const SPREAD_LIMIT: f64 = 0.2;

/// Invariant checks for a completed run.
pub fn evaluate_run(sim: &Simulation, out: &RunOutput) -> Vec<Check> {
    let rows = &out.diagnostics.rows;
    let max_of = |f: fn(&StepRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_least(
            "dissipation",
            out.diagnostics.min_dissipation(),
            DISSIPATION_FLOOR,
        ),
        Check::at_most(
            "traceless plastic strain",
            max_of(|r| r.max_trace_eps_p),
            INVARIANT_TOL,
        ),
        Check::at_most(
            "stress cache",
            max_of(|r| r.stress_cache_error),
            INVARIANT_TOL,
        ),
        Check::at_most("flow residual", max_of(|r| r.flow_residual), INVARIANT_TOL),
        Check::new(
            "finite diagnostics",
            rows.iter().all(|r| {
                [
                    r.e_total,
                    r.norm_t,
                    r.norm_eps_ut_sq,
                    r.yosida_sq,
                    r.stress_rate_sq,
                ]
                .iter()
                .all(|v| v.is_finite())
            }),
            format!("{} rows", rows.len()),
        ),
    ];
    let max_ratio = out
        .reports
        .iter()
        .map(|r| r.contraction_inner.max(r.contraction_outer))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "contraction ratios",
        max_ratio < 1.0,
        format!("{max_ratio:.3e} < 1"),
    ));
    if sim.scenario().is_closed() {
        checks.push(Check::at_most(
            "energy nonincreasing",
            out.diagnostics.max_energy_increase(),
            ENERGY_SLACK,
        ));
    }
    checks
}

/// Largest nodal deviation from `u = A x` when the elastic system with
/// boundary data `A x` and no loads is solved on `mesh`.
pub fn affine_reproduction_error(
    mesh: &Mesh2D,
    material: &MaterialParams,
    a: [[f64; 2]; 2],
) -> Result<f64, crate::error::StepError> {
    let k = mesh.assemble_elasticity(&material.elasticity)?;
    let solver = crate::mesh::apply_dirichlet(mesh, k)?;
    let mut exact = crate::mesh::NodalVector::zeros(mesh.n_dofs());
    for (n, x) in mesh.nodes().iter().enumerate() {
        for c in 0..2 {
            exact[2 * n + c] = a[c][0] * x[0] + a[c][1] * x[1];
        }
    }
    let zero = crate::mesh::NodalVector::zeros(mesh.n_dofs());
    let u = solver.solve(1.0, &zero, &exact)?;
    Ok((u - exact).amax())
}

/// Distances between the fixed points reached from the default starting
/// values and from perturbed ones, for both loops, relative as in the
/// stopping tests.
pub fn uniqueness_probe(
    sim: &Simulation,
    state: &SimState,
) -> Result<(f64, f64), crate::error::StepError> {
    let mesh = sim.mesh();
    let n1 = state.step + 1;
    let a = sim.picard_p(&state.theta, state, n1, None)?;
    let guess: ElementTensor = a
        .strain
        .iter()
        .map(|e| *e + SymTensor3::new(0.5, -0.25, 0.1, 0.3, -0.2, 0.05))
        .collect();
    let b = sim.picard_p(&state.theta, state, n1, Some(&guess))?;
    let inner = mesh.tensor_dist(&a.strain, &b.strain) / (1.0 + mesh.tensor_norm(&a.strain));
    let (ra, _) = sim.picard_r(state, None)?;
    let shifted = state.theta.add_scalar(1.0);
    let (rb, _) = sim.picard_r(state, Some(&shifted))?;
    let heat = sim.heat();
    let outer = heat.h1_norm_sq(&(&ra.theta - &rb.theta)).sqrt()
        / (1.0 + heat.h1_norm_sq(&ra.theta).sqrt());
    Ok((inner, outer))
}

/// `(max - min) / max` of positive values; zero for an empty list.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max == 0.0 {
        0.0
    } else {
        (max - min) / max.abs()
    }
}

/// Sweep result for one regularization parameter.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    /// `None` on success, the failure message otherwise.
    pub failure: Option<String>,
    pub sup_norm_t: f64,
    pub sum_dt_stress_rate_sq: f64,
    pub sum_dt_eps_ut_sq: f64,
    /// `lambda * sum dt ||grad M_lambda(dev T)||^2`.
    pub lambda_sum_dt_yosida_sq: f64,
    pub checks: Vec<Check>,
    /// Stress trajectory, for the pairwise differences.
    pub stresses: Vec<ElementTensor>,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `pairwise[i][j] = sup_n ||T^i_n - T^j_n||`; NaN when either run failed.
    pub pairwise: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
}

impl SweepTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(SweepRow::passed) && self.checks.iter().all(|c| c.passed)
    }

    /// Differences between neighbours of the ladder.
    pub fn neighbour_differences(&self) -> Vec<f64> {
        (1..self.rows.len())
            .map(|i| self.pairwise[i - 1][i])
            .collect()
    }
}

fn sweep_one(scenario: &Scenario, lambda: f64) -> SweepRow {
    let mut row = SweepRow {
        lambda,
        failure: None,
        sup_norm_t: f64::NAN,
        sum_dt_stress_rate_sq: f64::NAN,
        sum_dt_eps_ut_sq: f64::NAN,
        lambda_sum_dt_yosida_sq: f64::NAN,
        checks: Vec::new(),
        stresses: Vec::new(),
    };
    let mut sc = scenario.clone();
    match scenario.material.with_lambda(lambda) {
        Ok(m) => sc.material = m,
        Err(e) => {
            row.failure = Some(e.to_string());
            return row;
        }
    }
    let sim = match Simulation::new(&sc) {
        Ok(s) => s,
        Err(e) => {
            row.failure = Some(e.to_string());
            return row;
        }
    };
    let out = match sim.run() {
        Ok(o) => o,
        Err(f) => {
            row.failure = Some(f.to_string());
            return row;
        }
    };
    let dt = sc.time.dt;
    let d = &out.diagnostics;
    row.sup_norm_t = d.sup_norm_t();
    row.sum_dt_stress_rate_sq = d.sum_dt_stress_rate_sq(dt);
    row.sum_dt_eps_ut_sq = d.sum_dt_eps_ut_sq(dt);
    row.lambda_sum_dt_yosida_sq = lambda * d.sum_dt_yosida_sq(dt);
    row.checks = evaluate_run(&sim, &out);
    row.stresses = out.states.into_iter().map(|s| s.stress).collect();
    row
}

/// Run the scenario once per `lambda`, concurrently, and compare.
pub fn sweep_lambda(scenario: &Scenario, ladder: &[f64]) -> SweepTable {
    let rows: Vec<SweepRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = ladder
            .iter()
            .map(|&l| scope.spawn(move || sweep_one(scenario, l)))
            .collect();
        handles
            .into_iter()
            .zip(ladder)
            .map(|(h, &l)| {
                h.join().unwrap_or_else(|_| SweepRow {
                    lambda: l,
                    failure: Some("simulation thread panicked".into()),
                    sup_norm_t: f64::NAN,
                    sum_dt_stress_rate_sq: f64::NAN,
                    sum_dt_eps_ut_sq: f64::NAN,
                    lambda_sum_dt_yosida_sq: f64::NAN,
                    checks: Vec::new(),
                    stresses: Vec::new(),
                })
            })
            .collect()
    });
    let mesh = scenario.mesh().ok();
    let k = rows.len();
    let mut pairwise = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (&rows[i], &rows[j]);
            let d = match &mesh {
                Some(mesh) if a.failure.is_none() && b.failure.is_none() => a
                    .stresses
                    .iter()
                    .zip(&b.stresses)
                    .map(|(x, y)| mesh.tensor_dist(x, y))
                    .fold(0.0, f64::max),
                _ => f64::NAN,
            };
            pairwise[i][j] = d;
            pairwise[j][i] = d;
        }
    }
    let mut table = SweepTable {
        rows,
        pairwise,
        checks: Vec::new(),
    };
    table.checks = ladder_checks(&table);
    table
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn ladder_checks(table: &SweepTable) -> Vec<Check> {
    let col = |f: fn(&SweepRow) -> f64| table.rows.iter().map(f).collect::<Vec<f64>>();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let sup = col(|r| r.sup_norm_t);
    let rate = col(|r| r.sum_dt_stress_rate_sq);
    let strain = col(|r| r.sum_dt_eps_ut_sq);
    let yos = col(|r| r.lambda_sum_dt_yosida_sq);
    let cauchy = table.neighbour_differences();
    let spread = |name: &str, v: &[f64]| {
        let s = relative_spread(v);
        Check::new(
            name,
            v.iter().all(|x| x.is_finite()) && s < SPREAD_LIMIT,
            format!("spread {s:.3e} < {SPREAD_LIMIT}"),
        )
    };
    vec![
        spread("uniform sup stress", &sup),
        spread("uniform stress rate", &rate),
        spread("uniform strain rate", &strain),
        Check::new(
            "stress Cauchy differences decreasing",
            strictly_decreasing(&cauchy),
            fmt(&cauchy),
        ),
        Check::new(
            "scaled Yosida dissipation decreasing",
            strictly_decreasing(&yos),
            fmt(&yos),
        ),
    ]
}
