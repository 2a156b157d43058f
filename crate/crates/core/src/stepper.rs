//! Time marching of the Yosida-regularized system.
//!
//! Each step solves two nested fixed points. The inner loop freezes the
//! shifted temperature and iterates on the total strain: the element-local
//! plastic ODE is integrated with the strain frozen, the damped elastic
//! problem is solved with the resulting plastic strain, and the new strain is
//! fed back. The outer loop feeds the converged mechanical fields into the
//! heat equation and iterates on the temperature.

use crate::constitutive::MaterialParams;
use crate::diagnostics::{self, DiagnosticsReport, StepRow};
use crate::error::StepError;
use crate::lifting::{solve_lifting, HeatOperators, LiftingSeries};
use crate::linalg::{matvec, DirichletSolver};
use crate::mesh::{apply_dirichlet, ElementTensor, Mesh2D, NodalScalar, NodalVector};
use crate::scenario::Scenario;
use crate::tensor::SymTensor3;

/// Fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: usize,
    pub t: f64,
    pub u: NodalVector,
    pub u_t: NodalVector,
    /// Shifted temperature; the physical one adds the lifting.
    pub theta: NodalScalar,
    pub eps_p: ElementTensor,
    /// Cache of `C(eps(u) - eps_p)`.
    pub stress: ElementTensor,
}

/// Converged inner (visco-elastic) iterate.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub u: NodalVector,
    pub u_t: NodalVector,
    pub eps_p: ElementTensor,
    /// `eps(u)`, the fixed point of the strain map.
    pub strain: ElementTensor,
    pub iterations: usize,
    pub increment: f64,
    /// Largest ratio of successive increments; zero with fewer than two.
    pub contraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub outer_increment: f64,
    pub inner_increment: f64,
    pub contraction_outer: f64,
    pub contraction_inner: f64,
}

impl StepReport {
    pub fn inner_total(&self) -> usize {
        self.inner_iterations.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub states: Vec<SimState>,
    pub reports: Vec<StepReport>,
    pub diagnostics: DiagnosticsReport,
}

/// A failed run keeps every state accepted before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub partial: RunOutput,
    pub error: StepError,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "step {} failed: {}",
            self.partial.states.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {}

/// Largest stable plastic sub-step `lambda / (2 mu)`: the right-hand side of
/// the plastic ODE is `2 mu / lambda`-Lipschitz in the plastic strain.
pub fn plastic_substep_limit(material: &MaterialParams) -> f64 {
    material.yosida_lambda / (2.0 * material.elasticity.lame_mu())
}

/// Integrate `eps_p' = grad M_lambda(dev C(strain_star - eps_p))` over one
/// step of length `dt` per element, with `substeps` Heun steps.
pub fn epsilon_p_update(
    eps_p_n: &[SymTensor3],
    strain_star: &[SymTensor3],
    material: &MaterialParams,
    dt: f64,
    substeps: usize,
) -> Result<ElementTensor, StepError> {
    let h = dt / substeps as f64;
    let limit = plastic_substep_limit(material);
    if !(limit > 0.0) || h > limit * (1.0 + 1e-12) {
        return Err(StepError::StabilityGuard {
            h,
            limit,
            min_substeps: if limit > 0.0 {
                (dt / limit).ceil() as usize
            } else {
                usize::MAX
            },
        });
    }
    let c = material.elasticity;
    eps_p_n
        .iter()
        .zip(strain_star)
        .map(|(&ep0, &strain)| {
            let rate = |ep: SymTensor3| material.plastic_rate(c.apply(strain - ep).dev());
            let mut ep = ep0;
            for _ in 0..substeps {
                let k1 = rate(ep)?;
                let k2 = rate(ep + k1.scale(h))?;
                ep += (k1 + k2).scale(0.5 * h);
            }
            Ok(ep)
        })
        .collect()
}

/// Stress cache `C(eps(u) - eps_p)` per element.
pub fn stress_of(
    material: &MaterialParams,
    strain: &[SymTensor3],
    eps_p: &[SymTensor3],
) -> ElementTensor {
    strain
        .iter()
        .zip(eps_p)
        .map(|(&s, &ep)| material.elasticity.apply(s - ep))
        .collect()
}

/// Assembled operators and lifting for one scenario; immutable while
/// stepping.
pub struct Simulation {
    scenario: Scenario,
    mesh: Mesh2D,
    stiffness: DirichletSolver,
    heat: HeatOperators,
    lifting: LiftingSeries,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, StepError> {
        let mesh = scenario.mesh()?;
        let stiffness = apply_dirichlet(
            &mesh,
            mesh.assemble_elasticity(&scenario.material.elasticity)?,
        )?;
        let heat = HeatOperators::new(&mesh, scenario.time.dt)?;
        let lifting = solve_lifting(
            &heat,
            scenario.theta0_nodal(&mesh),
            scenario.time.n_steps,
            |n| scenario.heat_flux.load(&mesh, scenario.time.time(n)),
        )?;
        Ok(Simulation {
            scenario: scenario.clone(),
            mesh,
            stiffness,
            heat,
            lifting,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn material(&self) -> &MaterialParams {
        &self.scenario.material
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn heat(&self) -> &HeatOperators {
        &self.heat
    }

    pub fn lifting(&self) -> &LiftingSeries {
        &self.lifting
    }

    pub fn stiffness(&self) -> &DirichletSolver {
        &self.stiffness
    }

    pub fn dt(&self) -> f64 {
        self.scenario.time.dt
    }

    /// Physical temperature of a state.
    pub fn theta_hat(&self, state: &SimState) -> NodalScalar {
        crate::lifting::recombine(&state.theta, &self.lifting, state.step)
    }

    /// Per-element `f(T_{1/eps}(theta + lifting_n))`.
    fn thermal_pressure(&self, theta: &NodalScalar, n: usize) -> Vec<f64> {
        let m = self.material();
        self.mesh
            .element_means(&(theta + self.lifting.at(n)))
            .into_iter()
            .map(|v| m.coupling_truncated(v))
            .collect()
    }

    fn plastic_load(&self, eps_p: &[SymTensor3]) -> NodalVector {
        let c = self.material().elasticity;
        let s: Vec<SymTensor3> = eps_p.iter().map(|&e| c.apply(e)).collect();
        self.mesh.tensor_load(&s)
    }

    fn force_load(&self, t: f64) -> NodalVector {
        if self.scenario.body_force.is_zero() {
            return NodalVector::zeros(self.mesh.n_dofs());
        }
        self.mesh
            .force_load(&self.scenario.body_force_elements(&self.mesh, t))
    }

    /// Velocity at `t = 0` from the differentiated balance law: the same
    /// stiffness with the initial stress residual as load and the boundary
    /// velocity as Dirichlet data.
    pub fn initial_velocity(&self) -> Result<NodalVector, StepError> {
        let mesh = &self.mesh;
        let u0 = self.scenario.u0_nodal(mesh);
        let eps_p0 = vec![self.scenario.eps_p0; mesh.n_elements()];
        let theta0 = NodalScalar::zeros(mesh.n_nodes());
        let rhs = self.force_load(0.0) - matvec(self.stiffness.matrix(), &u0)
            + self.plastic_load(&eps_p0)
            + mesh.pressure_load(&self.thermal_pressure(&theta0, 0));
        let g = self.scenario.displacement_bc.nodal_t(mesh, 0.0);
        Ok(self.stiffness.solve(1.0, &rhs, &g)?)
    }

    pub fn initial_state(&self) -> Result<SimState, StepError> {
        self.scenario
            .check_admissible(&self.mesh)
            .map_err(StepError::InadmissibleInitialData)?;
        let mesh = &self.mesh;
        let u = self.scenario.u0_nodal(mesh);
        let eps_p = vec![self.scenario.eps_p0; mesh.n_elements()];
        let stress = stress_of(self.material(), &mesh.strain_of(&u), &eps_p);
        Ok(SimState {
            step: 0,
            t: 0.0,
            u_t: self.initial_velocity()?,
            u,
            theta: NodalScalar::zeros(mesh.n_nodes()),
            eps_p,
            stress,
        })
    }

    pub fn epsilon_p_update(
        &self,
        eps_p_n: &[SymTensor3],
        strain_star: &[SymTensor3],
    ) -> Result<ElementTensor, StepError> {
        epsilon_p_update(
            eps_p_n,
            strain_star,
            self.material(),
            self.dt(),
            self.scenario.solver.substeps,
        )
    }

    /// Damped elastic problem at level `n1` with backward-Euler velocity:
    /// `(1 + 1/dt) K u = F + C eps_p + f(..) div + K u_n / dt`, `u = g_D` on
    /// the boundary.
    pub fn elastic_solve(
        &self,
        eps_p: &[SymTensor3],
        theta_star: &NodalScalar,
        n1: usize,
        u_n: &NodalVector,
    ) -> Result<(NodalVector, NodalVector), StepError> {
        let dt = self.dt();
        let t = self.scenario.time.time(n1);
        let rhs = self.elastic_rhs(eps_p, theta_star, n1, u_n);
        let g = self.scenario.displacement_bc.nodal(&self.mesh, t);
        let u = self.stiffness.solve(1.0 + 1.0 / dt, &rhs, &g)?;
        let u_t = (&u - u_n) / dt;
        Ok((u, u_t))
    }

    pub fn elastic_rhs(
        &self,
        eps_p: &[SymTensor3],
        theta_star: &NodalScalar,
        n1: usize,
        u_n: &NodalVector,
    ) -> NodalVector {
        let dt = self.dt();
        let t = self.scenario.time.time(n1);
        self.force_load(t)
            + self.plastic_load(eps_p)
            + self
                .mesh
                .pressure_load(&self.thermal_pressure(theta_star, n1))
            + matvec(self.stiffness.matrix(), u_n) / dt
    }

    /// Implicit Euler heat step at level `n1` with the coupling coefficient
    /// frozen at `theta_star` and the dissipation `T(dev T . eps_p')` of the
    /// inner solution as source.
    pub fn heat_solve(
        &self,
        theta_n: &NodalScalar,
        eps_p_n: &[SymTensor3],
        theta_star: &NodalScalar,
        inner: &InnerSolution,
        n1: usize,
    ) -> Result<NodalScalar, StepError> {
        let m = self.material();
        let dt = self.dt();
        let stress = stress_of(m, &inner.strain, &inner.eps_p);
        let pressure = self.thermal_pressure(theta_star, n1);
        let div = self.mesh.divergence_of(&inner.u_t);
        let source: Vec<f64> = (0..self.mesh.n_elements())
            .map(|e| {
                let rate = (inner.eps_p[e] - eps_p_n[e]).scale(1.0 / dt);
                m.truncate(stress[e].dev().inner(rate)) - pressure[e] * div[e]
            })
            .collect();
        Ok(self.heat.step(theta_n, &self.mesh.source_load(&source))?)
    }

    /// Inner fixed point on the strain with the temperature frozen at
    /// `theta_star`. Starts from `eps(u_n)` unless a guess is given.
    pub fn picard_p(
        &self,
        theta_star: &NodalScalar,
        state_n: &SimState,
        n1: usize,
        guess: Option<&ElementTensor>,
    ) -> Result<InnerSolution, StepError> {
        let solver = &self.scenario.solver;
        let mut strain_star = match guess {
            Some(g) => g.clone(),
            None => self.mesh.strain_of(&state_n.u),
        };
        let mut prev_inc: Option<f64> = None;
        let mut contraction: f64 = 0.0;
        let mut increment = f64::INFINITY;
        for k in 1..=solver.picard_max {
            let eps_p = self.epsilon_p_update(&state_n.eps_p, &strain_star)?;
            let (u, u_t) = self.elastic_solve(&eps_p, theta_star, n1, &state_n.u)?;
            let strain = self.mesh.strain_of(&u);
            let diff = self.mesh.tensor_dist(&strain, &strain_star);
            if !diff.is_finite() {
                return Err(StepError::NonFinite(self.scenario.time.time(n1)));
            }
            increment = diff / (1.0 + self.mesh.tensor_norm(&strain_star));
            if let Some(p) = prev_inc {
                if p > 0.0 {
                    contraction = contraction.max(diff / p);
                }
            }
            prev_inc = Some(diff);
            strain_star = strain;
            if increment < solver.picard_tol {
                return Ok(InnerSolution {
                    u,
                    u_t,
                    eps_p,
                    strain: strain_star,
                    iterations: k,
                    increment,
                    contraction,
                });
            }
        }
        Err(StepError::InnerNotConverged {
            t: self.scenario.time.time(n1),
            iterations: solver.picard_max,
            increment,
        })
    }

    /// One time step: outer fixed point on the temperature around the inner
    /// loop. Starts from `theta_n` unless a guess is given.
    pub fn picard_r(
        &self,
        state_n: &SimState,
        theta_guess: Option<&NodalScalar>,
    ) -> Result<(SimState, StepReport), StepError> {
        let n1 = state_n.step + 1;
        let solver = &self.scenario.solver;
        let mut theta_star = theta_guess.unwrap_or(&state_n.theta).clone();
        let mut report = StepReport::default();
        let mut prev_inc: Option<f64> = None;
        for j in 1..=solver.picard_max {
            let inner = self.picard_p(&theta_star, state_n, n1, None)?;
            let theta = self.heat_solve(&state_n.theta, &state_n.eps_p, &theta_star, &inner, n1)?;
            let diff = self.heat.h1_norm_sq(&(&theta - &theta_star)).sqrt();
            if !diff.is_finite() {
                return Err(StepError::NonFinite(self.scenario.time.time(n1)));
            }
            let increment = diff / (1.0 + self.heat.h1_norm_sq(&theta_star).sqrt());
            if let Some(p) = prev_inc {
                if p > 0.0 {
                    report.contraction_outer = report.contraction_outer.max(diff / p);
                }
            }
            prev_inc = Some(diff);
            report.outer_iterations = j;
            report.outer_increment = increment;
            report.inner_iterations.push(inner.iterations);
            report.inner_increment = inner.increment;
            report.contraction_inner = report.contraction_inner.max(inner.contraction);
            theta_star = theta;
            if increment < solver.picard_tol {
                let stress = stress_of(self.material(), &inner.strain, &inner.eps_p);
                let state = SimState {
                    step: n1,
                    t: self.scenario.time.time(n1),
                    u: inner.u,
                    u_t: inner.u_t,
                    theta: theta_star,
                    eps_p: inner.eps_p,
                    stress,
                };
                return Ok((state, report));
            }
        }
        Err(StepError::OuterNotConverged {
            t: self.scenario.time.time(n1),
            iterations: solver.picard_max,
            increment: report.outer_increment,
        })
    }

    /// Largest plastic-strain trace and stress-cache mismatch of a state.
    pub fn invariant_defects(&self, state: &SimState) -> (f64, f64) {
        let trace = state
            .eps_p
            .iter()
            .map(|e| e.trace().abs())
            .fold(0.0, f64::max);
        let fresh = stress_of(
            self.material(),
            &self.mesh.strain_of(&state.u),
            &state.eps_p,
        );
        let cache = fresh
            .iter()
            .zip(&state.stress)
            .map(|(a, b)| a.max_abs_diff(*b) / (1.0 + a.norm()))
            .fold(0.0, f64::max);
        (trace, cache)
    }

    /// March over the whole time grid.
    pub fn run(&self) -> Result<RunOutput, RunFailure> {
        let empty = || RunOutput {
            states: Vec::new(),
            reports: Vec::new(),
            diagnostics: DiagnosticsReport::default(),
        };
        let initial = match self.initial_state() {
            Ok(s) => s,
            Err(error) => {
                return Err(RunFailure {
                    partial: empty(),
                    error,
                })
            }
        };
        let mut out = RunOutput {
            diagnostics: DiagnosticsReport {
                rows: vec![StepRow::initial(self, &initial)],
            },
            states: vec![initial],
            reports: Vec::new(),
        };
        for _ in 0..self.scenario.time.n_steps {
            let prev = out.states.last().expect("initial state");
            match self.picard_r(prev, None) {
                Ok((next, report)) => {
                    out.diagnostics
                        .rows
                        .push(diagnostics::StepRow::after_step(self, prev, &next, &report));
                    out.reports.push(report);
                    out.states.push(next);
                }
                Err(error) => {
                    return Err(RunFailure {
                        partial: out,
                        error,
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Build and run a scenario.
pub fn run(scenario: &Scenario) -> Result<RunOutput, RunFailure> {
    let sim = Simulation::new(scenario).map_err(|error| RunFailure {
        partial: RunOutput {
            states: Vec::new(),
            reports: Vec::new(),
            diagnostics: DiagnosticsReport::default(),
        },
        error,
    })?;
    sim.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ThermalCoupling;
    use crate::tensor::ElasticityTensor;

    const BASE: &str = "mesh.nx = 3\nmesh.ny = 3\ntime.t_final = 0.1\ntime.dt = 0.02\n";

    fn scenario(extra: &str) -> Scenario {
        Scenario::from_toml_str(&format!("{BASE}{extra}")).unwrap()
    }

    fn sim(extra: &str) -> Simulation {
        Simulation::new(&scenario(extra)).unwrap()
    }

    fn linear_field(mesh: &Mesh2D, a: [[f64; 2]; 2], b: [f64; 2]) -> NodalVector {
        let mut u = NodalVector::zeros(mesh.n_dofs());
        for (n, x) in mesh.nodes().iter().enumerate() {
            for c in 0..2 {
                u[2 * n + c] = a[c][0] * x[0] + a[c][1] * x[1] + b[c];
            }
        }
        u
    }

    #[test]
    fn initial_velocity_vanishes_for_constant_stress() {
        let s = sim("[initial.u0]\nkind = \"affine\"\nmatrix = [0.2, 0.1, -0.3, 0.4]\n");
        assert!(s.initial_velocity().unwrap().amax() < 1e-12);
    }

    #[test]
    fn initial_velocity_follows_rigid_translation() {
        let s = sim(
            "[boundary.displacement]\nkind = \"constant\"\nvalue = [0.3, -0.7]\nprofile = \"ramp\"\nrate = 2.0\n",
        );
        let v = s.initial_velocity().unwrap();
        for n in 0..s.mesh().n_nodes() {
            assert!((v[2 * n] - 0.6).abs() < 1e-12);
            assert!((v[2 * n + 1] + 1.4).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_velocity_solves_elliptic_problem() {
        let s = sim(
            "material.coupling = \"linear\"\nmaterial.coupling_alpha = 0.4\n\
             [boundary.displacement]\nkind = \"affine\"\nmatrix = [0.1, 0.2, 0.0, -0.1]\nprofile = \"sinusoid\"\n\
             [initial.theta0]\nkind = \"cosine\"\nvalue = 1.0\namplitude = 0.5\n\
             [initial.eps_p0]\nkind = \"constant\"\nvalue = [0.1, -0.05, -0.05, 0.02, 0.0, 0.0]\n\
             [body_force]\nkind = \"constant\"\nvalue = [0.3, -1.0]\n",
        );
        let v = s.initial_velocity().unwrap();
        let mesh = s.mesh();
        let u0 = s.scenario().u0_nodal(mesh);
        let theta = NodalScalar::zeros(mesh.n_nodes());
        let rhs = s.force_load(0.0) - matvec(s.stiffness().matrix(), &u0)
            + s.plastic_load(&vec![s.scenario().eps_p0; mesh.n_elements()])
            + mesh.pressure_load(&s.thermal_pressure(&theta, 0));
        assert!(rhs.amax() > 1e-3);
        assert!(s.stiffness().relative_residual(1.0, &v, &rhs) < 1e-10);
    }

    fn point_material(lambda: f64) -> MaterialParams {
        MaterialParams::new(
            3.0,
            0.01,
            lambda,
            ElasticityTensor::new(0.0, 1.0).unwrap(),
            ThermalCoupling::Zero,
        )
        .unwrap()
    }

    #[test]
    fn plastic_strain_at_rest_is_unchanged() {
        let ep = vec![SymTensor3::new(0.2, -0.1, -0.1, 0.05, 0.0, 0.3)];
        let out = epsilon_p_update(&ep, &ep, &point_material(0.1), 0.01, 4).unwrap();
        assert_eq!(out, ep);
    }

    #[test]
    fn plastic_update_self_refinement() {
        let m = point_material(0.1);
        let strain = vec![SymTensor3::diag(1.0, -0.5, -0.5)];
        let ep = vec![SymTensor3::ZERO];
        let a = epsilon_p_update(&ep, &strain, &m, 0.01, 64).unwrap()[0];
        let b = epsilon_p_update(&ep, &strain, &m, 0.01, 4096).unwrap()[0];
        let c = epsilon_p_update(&ep, &strain, &m, 0.01, 128).unwrap()[0];
        let h = 0.01 / 64.0;
        assert!(a.max_abs_diff(b) < 10.0 * h * h, "{}", a.max_abs_diff(b));
        // second order: halving the sub-step quarters the gap
        let ratio = a.max_abs_diff(b) / c.max_abs_diff(b);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        assert!(a.trace().abs() < 1e-15);
        assert!(a.xx > 0.0);
    }

    #[test]
    fn plastic_update_is_monotone_in_strain() {
        let m = point_material(0.05);
        let ep = vec![SymTensor3::ZERO];
        for k in 0..20 {
            let s = SymTensor3::new(
                0.3 + 0.1 * k as f64,
                -0.2,
                0.05 * k as f64,
                0.1,
                -0.04 * k as f64,
                0.02,
            );
            let small = epsilon_p_update(&ep, &[s], &m, 0.02, 16).unwrap()[0];
            let large = epsilon_p_update(&ep, &[s.scale(2.0)], &m, 0.02, 16).unwrap()[0];
            assert!(large.norm() >= small.norm());
        }
    }

    #[test]
    fn stability_guard_reports_required_substeps() {
        let m = point_material(0.001);
        let err =
            epsilon_p_update(&[SymTensor3::ZERO], &[SymTensor3::ZERO], &m, 0.01, 4).unwrap_err();
        match err {
            StepError::StabilityGuard { min_substeps, .. } => assert_eq!(min_substeps, 20),
            e => panic!("{e}"),
        }
        assert!(err.to_string().contains("solver.substeps"));
        assert!(epsilon_p_update(&[SymTensor3::ZERO], &[SymTensor3::ZERO], &m, 0.01, 20).is_ok());
    }

    #[test]
    fn elastic_solve_keeps_steady_linear_field() {
        let s =
            sim("[boundary.displacement]\nkind = \"affine\"\nmatrix = [0.2, -0.1, 0.3, 0.05]\n");
        let mesh = s.mesh();
        let un = linear_field(mesh, [[0.2, -0.1], [0.3, 0.05]], [0.0, 0.0]);
        let (u, ut) = s
            .elastic_solve(
                &vec![SymTensor3::ZERO; mesh.n_elements()],
                &NodalScalar::zeros(mesh.n_nodes()),
                1,
                &un,
            )
            .unwrap();
        assert!((&u - &un).amax() < 1e-12);
        assert!(ut.amax() < 1e-10);
    }

    #[test]
    fn constant_coupling_matches_hydrostatic_prestress() {
        let s = sim("material.coupling = \"linear\"\nmaterial.coupling_alpha = 0.5\n");
        let mesh = s.mesh();
        let theta = NodalScalar::from_element(mesh.n_nodes(), 3.0);
        let zero_u = NodalVector::zeros(mesh.n_dofs());
        let eps0 = vec![SymTensor3::ZERO; mesh.n_elements()];
        let (u, _) = s.elastic_solve(&eps0, &theta, 1, &zero_u).unwrap();
        let rhs = mesh.tensor_load(&vec![SymTensor3::IDENTITY.scale(1.5); mesh.n_elements()]);
        let dt = s.dt();
        let direct = s.stiffness().solve(1.0 + 1.0 / dt, &rhs, &zero_u).unwrap();
        assert!((&u - &direct).amax() < 1e-14);
        let full = s.elastic_rhs(&eps0, &theta, 1, &zero_u);
        assert!(s.stiffness().relative_residual(1.0 + 1.0 / dt, &u, &full) < 1e-10);
    }

    fn inner_at_rest(s: &Simulation) -> InnerSolution {
        let mesh = s.mesh();
        InnerSolution {
            u: NodalVector::zeros(mesh.n_dofs()),
            u_t: NodalVector::zeros(mesh.n_dofs()),
            eps_p: vec![SymTensor3::ZERO; mesh.n_elements()],
            strain: vec![SymTensor3::ZERO; mesh.n_elements()],
            iterations: 1,
            increment: 0.0,
            contraction: 0.0,
        }
    }

    #[test]
    fn heat_solve_keeps_constant_temperature() {
        let s = sim("");
        let n = s.mesh().n_nodes();
        let theta = NodalScalar::from_element(n, 5.0);
        let inner = inner_at_rest(&s);
        let out = s
            .heat_solve(&theta, &inner.eps_p.clone(), &theta, &inner, 1)
            .unwrap();
        assert!((out - theta).amax() < 1e-13);
    }

    #[test]
    fn unit_source_raises_mean_by_dt() {
        // mu = 1, lame_lambda = 0: dev C S = 2 S, and 2a * b * 2 = 1
        let s = sim("material.lame_lambda = 0.0\n");
        let mesh = s.mesh();
        let dt = s.dt();
        let d = SymTensor3::diag(1.0, -1.0, 0.0);
        let mut inner = inner_at_rest(&s);
        inner.eps_p = vec![d.scale(0.5 * dt); mesh.n_elements()];
        inner.strain = vec![d.scale(0.5 + 0.5 * dt); mesh.n_elements()];
        let prev = NodalScalar::from_element(mesh.n_nodes(), 0.25);
        let eps_p_n = vec![SymTensor3::ZERO; mesh.n_elements()];
        let out = s.heat_solve(&prev, &eps_p_n, &prev, &inner, 1).unwrap();
        let gain = s.heat().integral(&out) - s.heat().integral(&prev);
        assert!((gain / mesh.measure() - dt).abs() < 1e-14);
    }

    #[test]
    fn truncated_source_bounds_temperature_growth() {
        let s = sim("material.eps_trunc = 0.5\n");
        let mesh = s.mesh();
        let dt = s.dt();
        let cap = 1.0 / 0.5;
        for k in 0..5 {
            let mut inner = inner_at_rest(&s);
            let scale = 10.0f64.powi(k);
            inner.eps_p = (0..mesh.n_elements())
                .map(|e| SymTensor3::diag(1.0, -1.0, 0.0).scale(scale * (e as f64 - 8.0)))
                .collect();
            inner.strain = (0..mesh.n_elements())
                .map(|e| SymTensor3::new(0.1 * e as f64, -0.3, 0.2, 0.05 * k as f64, 0.0, 0.1))
                .collect();
            let prev = NodalScalar::from_iterator(
                mesh.n_nodes(),
                (0..mesh.n_nodes()).map(|n| (n as f64).sin()),
            );
            let eps_p_n = vec![SymTensor3::ZERO; mesh.n_elements()];
            let out = s.heat_solve(&prev, &eps_p_n, &prev, &inner, 1).unwrap();
            assert!(out.amax() <= prev.amax() + dt * cap + 1e-12);
        }
    }

    fn zero_scenario() -> Simulation {
        sim("")
    }

    #[test]
    fn zero_scenario_converges_at_once() {
        let s = zero_scenario();
        let state = s.initial_state().unwrap();
        let inner = s.picard_p(&state.theta, &state, 1, None).unwrap();
        assert_eq!(inner.iterations, 1);
        assert_eq!(inner.u.amax(), 0.0);
        let out = s.run().unwrap();
        for st in &out.states {
            assert_eq!(st.u.amax(), 0.0);
            assert_eq!(st.u_t.amax(), 0.0);
            assert_eq!(st.theta.amax(), 0.0);
            assert!(st.eps_p.iter().all(|e| *e == SymTensor3::ZERO));
        }
        assert_eq!(out.states.len(), 6);
    }

    const LOADED: &str = "material.yosida_lambda = 0.05\n\
        [boundary.displacement]\nkind = \"affine\"\nmatrix = [0.4, 0.1, 0.1, -0.4]\nprofile = \"ramp\"\n\
        [initial.theta0]\nkind = \"cosine\"\nvalue = 0.5\namplitude = 0.5\n";

    #[test]
    fn uncoupled_outer_loop_takes_two_passes() {
        let s = sim(LOADED);
        let out = s.run().unwrap();
        for r in &out.reports {
            assert_eq!(r.outer_iterations, 2);
        }
    }

    #[test]
    fn inner_fixed_point_is_unique() {
        let s = sim(LOADED);
        let st = s.initial_state().unwrap();
        let tol = s.scenario().solver.picard_tol;
        let a = s.picard_p(&st.theta, &st, 1, None).unwrap();
        let guess = vec![SymTensor3::new(1.0, -2.0, 0.5, 0.3, -0.2, 0.1); s.mesh().n_elements()];
        let b = s.picard_p(&st.theta, &st, 1, Some(&guess)).unwrap();
        let d =
            s.mesh().tensor_dist(&a.strain, &b.strain) / (1.0 + s.mesh().tensor_norm(&a.strain));
        assert!(d < 10.0 * tol, "{d}");
        assert!(a.contraction < 1.0);
    }

    #[test]
    fn outer_fixed_point_is_unique() {
        let s = sim(&format!(
            "material.coupling = \"linear\"\nmaterial.coupling_alpha = 0.3\n{LOADED}\
             [boundary.heat_flux]\nkind = \"constant\"\nvalue = 1.0\nsides = [\"left\"]\n"
        ));
        let st = s.initial_state().unwrap();
        let tol = s.scenario().solver.picard_tol;
        let (a, ra) = s.picard_r(&st, None).unwrap();
        let zero = NodalScalar::from_element(s.mesh().n_nodes(), -3.0);
        let (b, _) = s.picard_r(&st, Some(&zero)).unwrap();
        let d = s.heat().h1_norm_sq(&(&a.theta - &b.theta)).sqrt()
            / (1.0 + s.heat().h1_norm_sq(&a.theta).sqrt());
        assert!(d < 10.0 * tol, "{d}");
        assert!(ra.outer_iterations > 2);
        assert!(ra.contraction_outer < 1.0);
    }

    #[test]
    fn states_satisfy_invariants() {
        let s = sim(&format!(
            "material.coupling = \"saturating\"\nmaterial.coupling_alpha = 0.3\n{LOADED}"
        ));
        let out = s.run().unwrap();
        for st in &out.states {
            let (trace, cache) = s.invariant_defects(st);
            assert!(trace < 1e-10 && cache < 1e-10);
        }
    }

    #[test]
    fn deviatoric_stress_relaxes() {
        let src = "mesh.nx = 4\nmesh.ny = 4\ntime.t_final = 0.5\ntime.dt = 0.05\n\
            material.yosida_lambda = 0.1\n\
            [boundary.displacement]\nkind = \"affine\"\nmatrix = [0.5, 0.2, 0.0, -0.3]\n\
            [initial.u0]\nkind = \"match_boundary\"\n";
        let s = Simulation::new(&Scenario::from_toml_str(src).unwrap()).unwrap();
        let out = s.run().unwrap();
        for w in out.states.windows(2) {
            for (a, b) in w[0].stress.iter().zip(&w[1].stress) {
                assert!(b.dev().norm() <= a.dev().norm() * (1.0 + 1e-12));
            }
        }
        let first = out.states[0].stress[0].dev().norm();
        let last = out.states.last().unwrap().stress[0].dev().norm();
        assert!(last < 0.9 * first);
    }

    #[test]
    fn failing_step_keeps_partial_trajectory() {
        let src = format!("{BASE}solver.picard_max = 1\n[boundary.displacement]\nkind = \"affine\"\nmatrix = [0.4, 0.0, 0.0, -0.4]\nprofile = \"ramp\"\n");
        let s = Simulation::new(&Scenario::from_toml_str(&src).unwrap()).unwrap();
        let fail = s.run().unwrap_err();
        assert!(matches!(fail.error, StepError::InnerNotConverged { .. }));
        assert_eq!(fail.partial.states.len(), 1);
        assert_eq!(fail.partial.diagnostics.rows.len(), 1);
    }
}
