//! Sparse direct solves: cached Cholesky factors, with Dirichlet elimination
//! for the displacement system.

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::LinearError;

pub fn to_csc(n: usize, triplets: &[(usize, usize, f64)]) -> CscMatrix<f64> {
    let mut coo = CooMatrix::new(n, n);
    for &(i, j, v) in triplets {
        coo.push(i, j, v);
    }
    CscMatrix::from(&coo)
}

pub fn matvec(a: &CscMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(a.nrows());
    for (i, j, v) in a.triplet_iter() {
        y[i] += v * x[j];
    }
    y
}

/// `x^T A y`.
pub fn bilinear(a: &CscMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    a.triplet_iter().map(|(i, j, v)| x[i] * v * y[j]).sum()
}

/// Linear combination `alpha A + beta B` of two matrices of equal shape.
pub fn combine(alpha: f64, a: &CscMatrix<f64>, beta: f64, b: &CscMatrix<f64>) -> CscMatrix<f64> {
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for (i, j, v) in a.triplet_iter() {
        coo.push(i, j, alpha * v);
    }
    for (i, j, v) in b.triplet_iter() {
        coo.push(i, j, beta * v);
    }
    CscMatrix::from(&coo)
}

/// Cached Cholesky factor of a symmetric positive definite matrix.
pub struct SpdSolver {
    n: usize,
    factor: Option<CscCholesky<f64>>,
}

impl SpdSolver {
    pub fn new(a: &CscMatrix<f64>, what: &'static str) -> Result<Self, LinearError> {
        let n = a.nrows();
        let factor = if n == 0 {
            None
        } else {
            Some(CscCholesky::factor(a).map_err(|_| LinearError::NotPositiveDefinite(what))?)
        };
        Ok(SpdSolver { n, factor })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>, LinearError> {
        if b.len() != self.n {
            return Err(LinearError::Dimension {
                expected: self.n,
                got: b.len(),
            });
        }
        match &self.factor {
            None => Ok(DVector::zeros(0)),
            Some(f) => {
                let x = f.solve(b);
                Ok(DVector::from_column_slice(x.as_slice()))
            }
        }
    }
}

/// Symmetric system with prescribed values on a subset of unknowns. Known
/// values are lifted into the right-hand side and the free block is factored
/// once.
pub struct DirichletSolver {
    full: CscMatrix<f64>,
    constrained: Vec<bool>,
    free: Vec<usize>,
    free_block: CscMatrix<f64>,
    solver: SpdSolver,
}

impl DirichletSolver {
    pub fn new(full: CscMatrix<f64>, constrained_dofs: &[usize]) -> Result<Self, LinearError> {
        let n = full.nrows();
        let mut constrained = vec![false; n];
        for &d in constrained_dofs {
            constrained[d] = true;
        }
        let mut index = vec![usize::MAX; n];
        let mut free = Vec::new();
        for d in 0..n {
            if !constrained[d] {
                index[d] = free.len();
                free.push(d);
            }
        }
        let mut coo = CooMatrix::new(free.len(), free.len());
        for (i, j, v) in full.triplet_iter() {
            if !constrained[i] && !constrained[j] {
                coo.push(index[i], index[j], *v);
            }
        }
        let free_block = CscMatrix::from(&coo);
        let solver = SpdSolver::new(&free_block, "constrained stiffness")?;
        Ok(DirichletSolver {
            full,
            constrained,
            free,
            free_block,
            solver,
        })
    }

    pub fn matrix(&self) -> &CscMatrix<f64> {
        &self.full
    }

    pub fn free_block(&self) -> &CscMatrix<f64> {
        &self.free_block
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    /// Solve `scale * A x = rhs` on the free unknowns with `x = prescribed`
    /// on the constrained ones. Entries of `prescribed` at free unknowns are
    /// ignored.
    pub fn solve(
        &self,
        scale: f64,
        rhs: &DVector<f64>,
        prescribed: &DVector<f64>,
    ) -> Result<DVector<f64>, LinearError> {
        let n = self.full.nrows();
        for v in [rhs, prescribed] {
            if v.len() != n {
                return Err(LinearError::Dimension {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let mut x = DVector::zeros(n);
        for d in 0..n {
            if self.constrained[d] {
                x[d] = prescribed[d];
            }
        }
        let lifted = matvec(&self.full, &x);
        let r = DVector::from_iterator(
            self.free.len(),
            self.free.iter().map(|&d| (rhs[d] / scale) - lifted[d]),
        );
        let xf = self.solver.solve(&r)?;
        for (k, &d) in self.free.iter().enumerate() {
            x[d] = xf[k];
        }
        Ok(x)
    }

    /// Relative residual of `scale * A x = rhs` over the free rows.
    pub fn relative_residual(&self, scale: f64, x: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
        let ax = matvec(&self.full, x);
        let mut num = 0.0;
        let mut den = 0.0;
        for &d in &self.free {
            num += (scale * ax[d] - rhs[d]).powi(2);
            den += rhs[d].powi(2) + (scale * ax[d]).powi(2);
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }
}
