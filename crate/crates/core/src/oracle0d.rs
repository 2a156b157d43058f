//! Single material point reference: the spatially homogeneous reduction of
//! the model under a prescribed strain history, integrated with classical
//! RK4.
//!
//! The point carries the plastic strain and the temperature:
//!
//! ```text
//! eps_p' = G(dev C(eps(t) - eps_p))                  (exact, lambda = 0)
//!        = grad M_lambda(dev C(eps(t) - eps_p))      (regularized)
//! theta' = T(dev T . eps_p') - f(T(theta)) tr eps'(t)
//! ```

use thiserror::Error;
use toml::Table;

use crate::constitutive::MaterialParams;
use crate::error::{ConstitutiveError, ParamError, ScenarioError, StepError};
use crate::scenario::{
    parse_material, parse_profile, AffineVectorField, InitialDisplacement, InitialTemperature,
    Scenario, Section, TimeGrid, TimeProfile,
};
use crate::stepper::Simulation;
use crate::tensor::SymTensor3;

/// Upper bound on oracle steps accepted from parameter files.
pub const MAX_ORACLE_STEPS: usize = 50_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("comparison needs a single-element mesh, got {nx}x{ny}")]
    NotSingleElement { nx: usize, ny: usize },
    #[error("comparison needs spatially homogeneous data: {0}")]
    NotHomogeneous(&'static str),
    #[error("strain history is not plane strain")]
    NotPlaneStrain,
    #[error("oracle steps {oracle} must be a positive multiple of the stepper steps {stepper}")]
    Resolution { oracle: usize, stepper: usize },
    #[error("stepper failed at dt = {dt}: {source}")]
    Stepper {
        dt: f64,
        #[source]
        source: StepError,
    },
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Prescribed strain `eps(t) = profile(t) * tensor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainHistory {
    pub tensor: SymTensor3,
    pub profile: TimeProfile,
}

impl StrainHistory {
    pub const ZERO: StrainHistory = StrainHistory {
        tensor: SymTensor3::ZERO,
        profile: TimeProfile::Constant,
    };

    pub fn strain(&self, t: f64) -> SymTensor3 {
        self.tensor.scale(self.profile.value(t))
    }

    pub fn rate(&self, t: f64) -> SymTensor3 {
        self.tensor.scale(self.profile.rate(t))
    }

    pub fn is_plane_strain(&self) -> bool {
        let a = self.tensor;
        a.zz == 0.0 && a.yz == 0.0 && a.xz == 0.0
    }

    /// Symmetric gradient of an affine displacement `A(t) x + b(t)`.
    pub fn from_affine(field: &AffineVectorField) -> StrainHistory {
        let m = field.matrix;
        StrainHistory {
            tensor: SymTensor3::new(m[0][0], m[1][1], 0.0, 0.5 * (m[0][1] + m[1][0]), 0.0, 0.0),
            profile: field.profile,
        }
    }
}

/// Data of one material-point problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PointProblem {
    pub material: MaterialParams,
    pub history: StrainHistory,
    pub eps_p0: SymTensor3,
    pub theta0: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub t: f64,
    pub strain: SymTensor3,
    pub eps_p: SymTensor3,
    pub stress: SymTensor3,
    pub theta: f64,
    /// `dev T . eps_p'`.
    pub dissipation: f64,
    /// `theta + 1/2 C^-1 T . T`.
    pub energy: f64,
    /// `T . eps' - f(T(theta)) tr eps' - (d - T(d))` with `d` the
    /// dissipation; the rate of `energy`.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTrajectory {
    pub n_steps: usize,
    /// Samples at every `record_every`-th step, always including both ends.
    pub record_every: usize,
    pub samples: Vec<PointSample>,
}

impl PointTrajectory {
    pub fn last(&self) -> &PointSample {
        self.samples.last().expect("trajectory has samples")
    }
}

type Rhs = (SymTensor3, f64);

fn rhs(p: &PointProblem, t: f64, eps_p: SymTensor3, theta: f64) -> Result<Rhs, ConstitutiveError> {
    let m = &p.material;
    let stress = m.elasticity.apply(p.history.strain(t) - eps_p);
    let z = stress.dev();
    let rate = m.plastic_rate(z)?;
    let theta_rate =
        m.truncate(z.inner(rate)) - m.coupling_truncated(theta) * p.history.rate(t).trace();
    Ok((rate, theta_rate))
}

fn sample(
    p: &PointProblem,
    t: f64,
    eps_p: SymTensor3,
    theta: f64,
) -> Result<PointSample, ConstitutiveError> {
    let m = &p.material;
    let strain = p.history.strain(t);
    let stress = m.elasticity.apply(strain - eps_p);
    let z = stress.dev();
    let d = z.inner(m.plastic_rate(z)?);
    let eps_rate = p.history.rate(t);
    Ok(PointSample {
        t,
        strain,
        eps_p,
        stress,
        theta,
        dissipation: d,
        energy: theta + 0.5 * m.elasticity.apply_inv(stress).inner(stress),
        power: stress.inner(eps_rate)
            - m.coupling_truncated(theta) * eps_rate.trace()
            - (d - m.truncate(d)),
    })
}

/// Classical RK4 with `n_steps` uniform steps.
pub fn integrate_point(
    problem: &PointProblem,
    n_steps: usize,
    record_every: usize,
) -> Result<PointTrajectory, ConstitutiveError> {
    let n_steps = n_steps.max(1);
    let record_every = record_every.max(1);
    let h = problem.t_final / n_steps as f64;
    let mut ep = problem.eps_p0;
    let mut th = problem.theta0;
    let mut samples = vec![sample(problem, 0.0, ep, th)?];
    for n in 0..n_steps {
        let t = n as f64 * h;
        let (k1, l1) = rhs(problem, t, ep, th)?;
        let (k2, l2) = rhs(
            problem,
            t + 0.5 * h,
            ep + k1.scale(0.5 * h),
            th + 0.5 * h * l1,
        )?;
        let (k3, l3) = rhs(
            problem,
            t + 0.5 * h,
            ep + k2.scale(0.5 * h),
            th + 0.5 * h * l2,
        )?;
        let (k4, l4) = rhs(problem, t + h, ep + k3.scale(h), th + h * l3)?;
        ep += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        th += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        let step = n + 1;
        if step % record_every == 0 || step == n_steps {
            samples.push(sample(problem, step as f64 * h, ep, th)?);
        }
    }
    Ok(PointTrajectory {
        n_steps,
        record_every,
        samples,
    })
}

/// Largest final-state difference between `n` and `2n` steps.
pub fn richardson_gap(problem: &PointProblem, n_steps: usize) -> Result<f64, ConstitutiveError> {
    let a = integrate_point(problem, n_steps, n_steps)?;
    let b = integrate_point(problem, 2 * n_steps, 2 * n_steps)?;
    let (a, b) = (a.last(), b.last());
    Ok(a.eps_p.max_abs_diff(b.eps_p).max((a.theta - b.theta).abs()))
}

/// The material-point problem equivalent to a single-element scenario.
pub fn point_problem_of(scenario: &Scenario) -> Result<PointProblem, OracleError> {
    if scenario.nx != 1 || scenario.ny != 1 {
        return Err(OracleError::NotSingleElement {
            nx: scenario.nx,
            ny: scenario.ny,
        });
    }
    if !scenario.body_force.is_zero() {
        return Err(OracleError::NotHomogeneous("body force must vanish"));
    }
    if !scenario.heat_flux.is_zero() {
        return Err(OracleError::NotHomogeneous("heat flux must vanish"));
    }
    let theta0 = match scenario.theta0 {
        InitialTemperature::Zero => 0.0,
        InitialTemperature::Constant { value } => value,
        InitialTemperature::Cosine { .. } => {
            return Err(OracleError::NotHomogeneous(
                "initial temperature must be constant",
            ))
        }
    };
    if !matches!(scenario.u0, InitialDisplacement::MatchBoundary) {
        return Err(OracleError::NotHomogeneous(
            "initial displacement must match the boundary data",
        ));
    }
    Ok(PointProblem {
        material: scenario.material,
        history: StrainHistory::from_affine(&scenario.displacement_bc),
        eps_p0: scenario.eps_p0,
        theta0,
        t_final: scenario.time.t_final,
    })
}

/// `(t, eps_p error, theta error)` at one time level.
type ErrorSample = (f64, f64, f64);

/// Largest deviation of a stepper run from an oracle trajectory, over the
/// stepper's time levels.
fn stepper_error(
    scenario: &Scenario,
    oracle: &PointTrajectory,
) -> Result<(f64, Vec<ErrorSample>), OracleError> {
    let n = scenario.time.n_steps;
    if oracle.record_every != 1 || !oracle.n_steps.is_multiple_of(n) {
        return Err(OracleError::Resolution {
            oracle: oracle.n_steps,
            stepper: n,
        });
    }
    let stride = oracle.n_steps / n;
    let dt = scenario.time.dt;
    let sim = Simulation::new(scenario).map_err(|source| OracleError::Stepper { dt, source })?;
    let out = sim.run().map_err(|f| OracleError::Stepper {
        dt,
        source: f.error,
    })?;
    let mut sup: f64 = 0.0;
    let mut table = Vec::with_capacity(out.states.len());
    for state in &out.states {
        let o = &oracle.samples[state.step * stride];
        let eps_err = state
            .eps_p
            .iter()
            .map(|e| e.max_abs_diff(o.eps_p))
            .fold(0.0, f64::max);
        let theta_hat = sim.theta_hat(state);
        let theta_err = theta_hat
            .iter()
            .map(|v| (v - o.theta).abs())
            .fold(0.0, f64::max);
        sup = sup.max(eps_err).max(theta_err);
        table.push((state.t, eps_err, theta_err));
    }
    Ok((sup, table))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub dt: f64,
    pub sup_error: f64,
    /// Error at the previous (coarser) `dt` over this one.
    pub ratio: Option<f64>,
    /// `(t, plastic strain error, temperature error)` per stepper level.
    pub errors: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub oracle_steps: usize,
    /// Final-state gap between the oracle at `oracle_steps` and twice that.
    pub oracle_richardson: f64,
}

/// Run the stepper at `dt, dt/2, ..., dt/2^halvings` against one matched
/// oracle trajectory with `oracle_factor` RK4 steps per finest stepper step.
pub fn compare_with_stepper(
    scenario: &Scenario,
    halvings: usize,
    oracle_factor: usize,
) -> Result<Comparison, OracleError> {
    let problem = point_problem_of(scenario)?;
    if !problem.history.is_plane_strain() {
        return Err(OracleError::NotPlaneStrain);
    }
    let finest = scenario.time.n_steps << halvings;
    let oracle_steps = finest * oracle_factor.max(1);
    if oracle_steps > MAX_ORACLE_STEPS {
        return Err(OracleError::Resolution {
            oracle: oracle_steps,
            stepper: finest,
        });
    }
    let oracle = integrate_point(&problem, oracle_steps, 1)?;
    let oracle_richardson = richardson_gap(&problem, oracle_steps)?;
    let mut rows: Vec<ComparisonRow> = Vec::with_capacity(halvings + 1);
    for k in 0..=halvings {
        let mut sc = scenario.clone();
        let dt = scenario.time.dt / (1u64 << k) as f64;
        sc.time = TimeGrid::new(scenario.time.t_final, dt)?;
        let (sup_error, errors) = stepper_error(&sc, &oracle)?;
        let ratio = rows.last().map(|r| r.sup_error / sup_error);
        rows.push(ComparisonRow {
            dt,
            sup_error,
            ratio,
            errors,
        });
    }
    Ok(Comparison {
        rows,
        oracle_steps,
        oracle_richardson,
    })
}

/// Sup error of the stepper at each `lambda` against the exact-flow oracle.
pub fn regularization_gap(
    scenario: &Scenario,
    ladder: &[f64],
    oracle_factor: usize,
) -> Result<Vec<f64>, OracleError> {
    let mut problem = point_problem_of(scenario)?;
    problem.material = problem.material.with_lambda(0.0)?;
    let oracle = integrate_point(&problem, scenario.time.n_steps * oracle_factor.max(1), 1)?;
    ladder
        .iter()
        .map(|&l| {
            let mut sc = scenario.clone();
            sc.material = sc.material.with_lambda(l)?;
            Ok(stepper_error(&sc, &oracle)?.0)
        })
        .collect()
}

/// Oracle parameter file contents.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub problem: PointProblem,
    pub n_steps: usize,
    pub record_every: usize,
    /// Stepper scenario to compare against, relative to the parameter file.
    pub compare: Option<CompareParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareParams {
    pub scenario: String,
    pub halvings: usize,
    pub oracle_factor: usize,
}

fn parse_history(s: &Section) -> Result<StrainHistory, ScenarioError> {
    let kind = s.opt_str("kind")?.unwrap_or("zero");
    let profile = parse_profile(s)?;
    match kind {
        "zero" => Ok(StrainHistory::ZERO),
        "tensor" => Ok(StrainHistory {
            tensor: SymTensor3::from_array(s.array("strain", [0.0; 6])?),
            profile,
        }),
        other => Err(s.unknown_preset("kind", other)),
    }
}

impl OracleParams {
    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        let table: Table = src
            .parse()
            .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
        let root = Section::new("", &table);
        let material = root.with("material", parse_material)?;
        let params = root.with("oracle", |s| {
            let t_final = s.req_f64("t_final")?;
            if !(t_final > 0.0) {
                return Err(ParamError::new("oracle.t_final", "must be positive").into());
            }
            let n_steps = s.req_usize("n_steps")?;
            if n_steps == 0 || n_steps > MAX_ORACLE_STEPS {
                return Err(ParamError::new(
                    "oracle.n_steps",
                    format!("must lie in 1..={MAX_ORACLE_STEPS}"),
                )
                .into());
            }
            let record_every = s.opt_usize("record_every")?.unwrap_or(1).max(1);
            let theta0 = s.f64_or("theta0", 0.0)?;
            let eps_p0 = SymTensor3::from_array(s.array("eps_p0", [0.0; 6])?);
            if eps_p0.trace().abs() > 1e-10 * (1.0 + eps_p0.norm()) {
                return Err(ParamError::new("oracle.eps_p0", "must be traceless").into());
            }
            let history = s.with("history", parse_history)?;
            let compare = match s.opt_str("compare")? {
                None => None,
                Some(path) => Some(CompareParams {
                    scenario: path.to_string(),
                    halvings: s.opt_usize("halvings")?.unwrap_or(3).min(8),
                    oracle_factor: s.opt_usize("oracle_factor")?.unwrap_or(64).max(1),
                }),
            };
            Ok(OracleParams {
                problem: PointProblem {
                    material,
                    history,
                    eps_p0,
                    theta0,
                    t_final,
                },
                n_steps,
                record_every,
                compare,
            })
        })?;
        root.finish()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        OracleParams::from_toml_str(&src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::ThermalCoupling;
    use crate::tensor::ElasticityTensor;

    fn material(
        p: f64,
        lambda: f64,
        lame_lambda: f64,
        coupling: ThermalCoupling,
    ) -> MaterialParams {
        MaterialParams::new(
            p,
            0.01,
            lambda,
            ElasticityTensor::new(lame_lambda, 1.0).unwrap(),
            coupling,
        )
        .unwrap()
    }

    fn ramp_problem() -> PointProblem {
        PointProblem {
            material: material(2.0, 0.0, 0.0, ThermalCoupling::Zero),
            history: StrainHistory {
                tensor: SymTensor3::diag(1.0, -0.5, -0.5),
                profile: TimeProfile::Ramp { rate: 1.0 },
            },
            eps_p0: SymTensor3::ZERO,
            theta0: 0.0,
            t_final: 1.0,
        }
    }

    #[test]
    fn zero_history_stays_put() {
        let mut p = ramp_problem();
        p.history = StrainHistory::ZERO;
        p.theta0 = 1.25;
        let tr = integrate_point(&p, 100, 10).unwrap();
        assert_eq!(tr.samples.len(), 11);
        for s in &tr.samples {
            assert_eq!(s.eps_p, SymTensor3::ZERO);
            assert_eq!(s.theta, 1.25);
        }
    }

    #[test]
    fn ramp_regression_value() {
        let p = ramp_problem();
        let tr = integrate_point(&p, 100_000, 100_000).unwrap();
        let last = tr.last();
        assert!(richardson_gap(&p, 100_000).unwrap() < 1e-10);
        assert!(
            (last.eps_p.xx - RAMP_EPS_P_XX).abs() < 1e-10,
            "{:.16e}",
            last.eps_p.xx
        );
        assert!(last.eps_p.trace().abs() < 1e-14);
        assert!((last.eps_p.yy - last.eps_p.zz).abs() < 1e-14);
    }

    /// Plastic strain `xx` at `t = 1` of the ramp problem.
    const RAMP_EPS_P_XX: f64 = 0.558_872_654_316_042;

    #[test]
    fn dissipation_nonnegative_along_trajectories() {
        for (p, lambda) in [(1.5, 0.0), (3.0, 0.0), (3.0, 0.05), (5.0, 0.2)] {
            let prob = PointProblem {
                material: material(p, lambda, 1.0, ThermalCoupling::Linear { alpha: 0.3 }),
                history: StrainHistory {
                    tensor: SymTensor3::new(0.8, -0.3, 0.0, 0.4, 0.0, 0.0),
                    profile: TimeProfile::Sinusoid {
                        amplitude: 1.0,
                        frequency: 1.5,
                    },
                },
                eps_p0: SymTensor3::ZERO,
                theta0: 0.2,
                t_final: 1.0,
            };
            let tr = integrate_point(&prob, 4000, 1).unwrap();
            for s in &tr.samples {
                assert!(s.dissipation >= 0.0);
                assert!(s.eps_p.trace().abs() < 1e-13);
                let c = prob.material.elasticity.apply(s.strain - s.eps_p);
                assert!(c.max_abs_diff(s.stress) < 1e-14);
            }
        }
    }

    #[test]
    fn energy_ledger_along_trajectory() {
        // truncation active: the clamp sits below the peak dissipation
        let mut prob = ramp_problem();
        prob.material = MaterialParams::new(
            3.0,
            4.0,
            0.0,
            ElasticityTensor::new(0.5, 1.0).unwrap(),
            ThermalCoupling::Zero,
        )
        .unwrap();
        prob.history.profile = TimeProfile::Sinusoid {
            amplitude: 1.0,
            frequency: 1.0,
        };
        let n = 100_000;
        let tr = integrate_point(&prob, n, 1).unwrap();
        let h = prob.t_final / n as f64;
        assert!(tr.samples.iter().any(|s| s.dissipation > 0.25));
        let mut worst: f64 = 0.0;
        for w in tr.samples.windows(3) {
            let fd = (w[2].energy - w[0].energy) / (2.0 * h);
            // the rate has a corner where the clamp engages
            let cap = 1.0 / prob.material.eps_trunc;
            if (w[0].dissipation - cap).signum() != (w[2].dissipation - cap).signum() {
                continue;
            }
            worst = worst.max((fd - w[1].power).abs());
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn regularized_mode_approaches_exact_flow() {
        let mut gaps = Vec::new();
        let exact = integrate_point(&ramp_problem(), 20_000, 20_000).unwrap();
        for lambda in [1e-1, 1e-2, 1e-3] {
            let mut p = ramp_problem();
            p.material = p.material.with_lambda(lambda).unwrap();
            let r = integrate_point(&p, 20_000, 20_000).unwrap();
            gaps.push(r.last().eps_p.max_abs_diff(exact.last().eps_p));
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    const SINGLE: &str = "mesh.nx = 1\nmesh.ny = 1\ntime.t_final = 0.5\ntime.dt = 0.05\n\
        material.yosida_lambda = 0.05\nmaterial.coupling = \"linear\"\nmaterial.coupling_alpha = 0.2\n\
        [boundary.displacement]\nkind = \"affine\"\nmatrix = [0.6, 0.2, 0.2, -0.4]\nprofile = \"ramp\"\n\
        [initial.u0]\nkind = \"match_boundary\"\n[initial.theta0]\nkind = \"constant\"\nvalue = 0.5\n";

    #[test]
    fn zero_scenario_has_zero_error() {
        let src = "mesh.nx = 1\nmesh.ny = 1\ntime.t_final = 0.2\ntime.dt = 0.05\n\
            [initial.u0]\nkind = \"match_boundary\"\n";
        let c = compare_with_stepper(&Scenario::from_toml_str(src).unwrap(), 1, 4).unwrap();
        for r in &c.rows {
            assert_eq!(r.sup_error, 0.0);
        }
    }

    #[test]
    fn first_order_agreement_with_stepper() {
        let sc = Scenario::from_toml_str(SINGLE).unwrap();
        let c = compare_with_stepper(&sc, 2, 200).unwrap();
        assert!(c.oracle_richardson < 1e-10);
        for r in c.rows.iter().skip(1) {
            let ratio = r.ratio.unwrap();
            assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn non_homogeneous_scenarios_rejected() {
        let two = SINGLE.replace("mesh.nx = 1", "mesh.nx = 2");
        assert!(matches!(
            compare_with_stepper(&Scenario::from_toml_str(&two).unwrap(), 1, 1),
            Err(OracleError::NotSingleElement { nx: 2, ny: 1 })
        ));
        let cos = SINGLE.replace("kind = \"constant\"\nvalue = 0.5", "kind = \"cosine\"");
        assert!(matches!(
            compare_with_stepper(&Scenario::from_toml_str(&cos).unwrap(), 1, 1),
            Err(OracleError::NotHomogeneous(_))
        ));
    }

    #[test]
    fn regularization_gap_shrinks_with_lambda() {
        let src = SINGLE
            .replace("time.dt = 0.05", "time.dt = 0.0025")
            .replace(
                "material.yosida_lambda = 0.05",
                "material.yosida_lambda = 0.1",
            )
            .replace("mesh.ny = 1\n", "mesh.ny = 1\nsolver.substeps = 4\n");
        let sc = Scenario::from_toml_str(&src).unwrap();
        let gaps = regularization_gap(&sc, &[0.1, 0.03, 0.01], 8).unwrap();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    const PARAMS: &str = "[material]\np = 2.0\nyosida_lambda = 0.0\nlame_lambda = 0.0\n\
        [oracle]\nt_final = 1.0\nn_steps = 1000\nrecord_every = 10\n\
        [oracle.history]\nkind = \"tensor\"\nstrain = [1.0, -0.5, -0.5, 0.0, 0.0, 0.0]\nprofile = \"ramp\"\n";

    #[test]
    fn params_parse() {
        let p = OracleParams::from_toml_str(PARAMS).unwrap();
        assert_eq!(p.problem, {
            let mut r = ramp_problem();
            r.material.eps_trunc = 0.01;
            r
        });
        assert_eq!(p.n_steps, 1000);
        assert_eq!(p.record_every, 10);
        assert!(p.compare.is_none());
    }

    #[test]
    fn params_errors_name_the_field() {
        let bad = PARAMS.replace("n_steps = 1000", "n_steps = 0");
        assert!(OracleParams::from_toml_str(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("oracle.n_steps"));
        let bad = PARAMS.replace("kind = \"tensor\"", "kind = \"spiral\"");
        assert!(matches!(
            OracleParams::from_toml_str(&bad),
            Err(ScenarioError::UnknownPreset { .. })
        ));
        let bad = format!("{PARAMS}extra = 1\n");
        assert_eq!(
            OracleParams::from_toml_str(&bad).unwrap_err().to_string(),
            "oracle.history.extra is not a recognized key"
        );
    }
}
