//! Lifting of the Neumann heat-flux data.
//!
//! The auxiliary temperature solves the free heat equation with the boundary
//! flux and the initial temperature; the simulated unknown is the remainder,
//! which then has homogeneous Neumann data and zero initial value.

use nalgebra_sparse::CscMatrix;

use crate::error::LinearError;
use crate::linalg::{bilinear, combine, matvec, SpdSolver};
use crate::mesh::{Mesh2D, NodalScalar};

/// Mass and Laplacian matrices with the cached factor of `M + dt A`.
pub struct HeatOperators {
    pub mass: CscMatrix<f64>,
    pub laplacian: CscMatrix<f64>,
    pub dt: f64,
    implicit: SpdSolver,
}

impl HeatOperators {
    pub fn new(mesh: &Mesh2D, dt: f64) -> Result<Self, LinearError> {
        let (mass, laplacian) = mesh.assemble_heat()?;
        let implicit = SpdSolver::new(&combine(1.0, &mass, dt, &laplacian), "heat")?;
        Ok(HeatOperators {
            mass,
            laplacian,
            dt,
            implicit,
        })
    }

    /// One implicit Euler step `(M + dt A) x = M prev + dt load`.
    pub fn step(&self, prev: &NodalScalar, load: &NodalScalar) -> Result<NodalScalar, LinearError> {
        let rhs = matvec(&self.mass, prev) + load * self.dt;
        self.implicit.solve(&rhs)
    }

    pub fn l2_norm_sq(&self, v: &NodalScalar) -> f64 {
        bilinear(&self.mass, v, v)
    }

    pub fn h1_norm_sq(&self, v: &NodalScalar) -> f64 {
        bilinear(&self.mass, v, v) + bilinear(&self.laplacian, v, v)
    }

    /// `int v dx`.
    pub fn integral(&self, v: &NodalScalar) -> f64 {
        matvec(&self.mass, v).sum()
    }
}

/// Auxiliary temperature at every time level with its backward difference.
#[derive(Debug, Clone)]
pub struct LiftingSeries {
    pub dt: f64,
    pub values: Vec<NodalScalar>,
    /// `rates[n] = (values[n] - values[n-1]) / dt`; `rates[0]` is zero.
    pub rates: Vec<NodalScalar>,
    /// `max_n ||value_n||_{H1}`.
    pub max_h1: f64,
    /// `sum_n dt ||rate_n||_{L2}^2`.
    pub sum_dt_rate_sq: f64,
}

impl LiftingSeries {
    pub fn at(&self, n: usize) -> &NodalScalar {
        &self.values[n]
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }
}

/// Implicit Euler for the free heat equation with flux loads
/// `flux_load(n)` at level `n` and initial value `theta0`.
pub fn solve_lifting(
    heat: &HeatOperators,
    theta0: NodalScalar,
    n_steps: usize,
    mut flux_load: impl FnMut(usize) -> NodalScalar,
) -> Result<LiftingSeries, LinearError> {
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut rates = Vec::with_capacity(n_steps + 1);
    let mut max_h1 = heat.h1_norm_sq(&theta0).sqrt();
    let mut sum_dt_rate_sq = 0.0;
    rates.push(NodalScalar::zeros(theta0.len()));
    values.push(theta0);
    for n in 1..=n_steps {
        let next = heat.step(&values[n - 1], &flux_load(n))?;
        let rate = (&next - &values[n - 1]) / heat.dt;
        sum_dt_rate_sq += heat.dt * heat.l2_norm_sq(&rate);
        max_h1 = max_h1.max(heat.h1_norm_sq(&next).sqrt());
        values.push(next);
        rates.push(rate);
    }
    Ok(LiftingSeries {
        dt: heat.dt,
        values,
        rates,
        max_h1,
        sum_dt_rate_sq,
    })
}

/// Physical temperature from the shifted unknown at level `n`.
pub fn recombine(theta: &NodalScalar, lifting: &LiftingSeries, n: usize) -> NodalScalar {
    theta + lifting.at(n)
}
