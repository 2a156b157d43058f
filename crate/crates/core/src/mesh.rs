//! Structured plane-strain triangulation of a rectangle with P1 spaces for
//! displacement and temperature.
//!
//! Nodes are numbered row by row, `node = j * (nx + 1) + i`. Displacement
//! unknowns are interleaved, `dof = 2 * node + component`. Tensor fields
//! (strain, inelastic strain, stress) hold one value per triangle, which is
//! exact for P1 strains and is the one-point rule used by every element
//! integral here.

use nalgebra::DVector;
use nalgebra_sparse::CscMatrix;

use crate::error::{LinearError, ParamError};
use crate::linalg::to_csc;
use crate::tensor::{ElasticityTensor, SymTensor3};

/// Nodal scalar field (temperature).
pub type NodalScalar = DVector<f64>;
/// Nodal 2-vector field with interleaved components.
pub type NodalVector = DVector<f64>;
/// One symmetric tensor per triangle.
pub type ElementTensor = Vec<SymTensor3>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }

    pub fn from_name(name: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub length: f64,
    pub normal: [f64; 2],
    pub side: Side,
}

#[derive(Debug, Clone)]
pub struct Mesh2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    /// Gradients of the three barycentric shape functions per triangle.
    grads: Vec<[[f64; 2]; 3]>,
    edges: Vec<BoundaryEdge>,
    on_boundary: Vec<bool>,
}

impl Mesh2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, ParamError> {
        if nx == 0 {
            return Err(ParamError::new("mesh.nx", "must be at least 1"));
        }
        if ny == 0 {
            return Err(ParamError::new("mesh.ny", "must be at least 1"));
        }
        if !(lx.is_finite() && lx > 0.0) {
            return Err(ParamError::new("mesh.lx", "must be positive"));
        }
        if !(ly.is_finite() && ly > 0.0) {
            return Err(ParamError::new("mesh.ly", "must be positive"));
        }
        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (
                    node(i, j),
                    node(i + 1, j),
                    node(i + 1, j + 1),
                    node(i, j + 1),
                );
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut edges = Vec::with_capacity(2 * (nx + ny));
        let mut push = |a: usize, b: usize, side: Side| {
            let (pa, pb): ([f64; 2], [f64; 2]) = (nodes[a], nodes[b]);
            let length = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            let normal = match side {
                Side::Bottom => [0.0, -1.0],
                Side::Right => [1.0, 0.0],
                Side::Top => [0.0, 1.0],
                Side::Left => [-1.0, 0.0],
            };
            edges.push(BoundaryEdge {
                nodes: [a, b],
                length,
                normal,
                side,
            });
        };
        for i in 0..nx {
            push(node(i, 0), node(i + 1, 0), Side::Bottom);
        }
        for j in 0..ny {
            push(node(nx, j), node(nx, j + 1), Side::Right);
        }
        for i in (0..nx).rev() {
            push(node(i + 1, ny), node(i, ny), Side::Top);
        }
        for j in (0..ny).rev() {
            push(node(0, j + 1), node(0, j), Side::Left);
        }
        let mut on_boundary = vec![false; nodes.len()];
        for e in &edges {
            on_boundary[e.nodes[0]] = true;
            on_boundary[e.nodes[1]] = true;
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let [p0, p1, p2] = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            areas.push(0.5 * det);
            // grad phi_k = perp(opposite edge) / det
            grads.push([
                [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
                [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
                [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
            ]);
        }
        Ok(Mesh2D {
            nx,
            ny,
            lx,
            ly,
            nodes,
            triangles,
            areas,
            grads,
            edges,
            on_boundary,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.edges
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        self.on_boundary[n]
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&n| self.on_boundary[n])
            .collect()
    }

    /// Both displacement components of every boundary node.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        self.boundary_nodes()
            .into_iter()
            .flat_map(|n| [2 * n, 2 * n + 1])
            .collect()
    }

    pub fn measure(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.lx + self.ly)
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let t = self.triangles[e];
        let mut c = [0.0; 2];
        for &n in &t {
            c[0] += self.nodes[n][0] / 3.0;
            c[1] += self.nodes[n][1] / 3.0;
        }
        c
    }

    pub fn check_elements(&self) -> Result<(), LinearError> {
        match self.areas.iter().position(|&a| !(a > 0.0)) {
            Some(e) => Err(LinearError::DegenerateTriangle(e)),
            None => Ok(()),
        }
    }

    /// Strain of the P1 basis function for local vertex `k`, component `c`.
    fn basis_strain(&self, e: usize, k: usize, c: usize) -> SymTensor3 {
        let [gx, gy] = self.grads[e][k];
        if c == 0 {
            SymTensor3::new(gx, 0.0, 0.0, 0.5 * gy, 0.0, 0.0)
        } else {
            SymTensor3::new(0.0, gy, 0.0, 0.5 * gx, 0.0, 0.0)
        }
    }

    fn element_dofs(&self, e: usize) -> [usize; 6] {
        let t = self.triangles[e];
        [
            2 * t[0],
            2 * t[0] + 1,
            2 * t[1],
            2 * t[1] + 1,
            2 * t[2],
            2 * t[2] + 1,
        ]
    }

    /// Stiffness `K[u][v] = sum_e area * C eps(u) : eps(v)`.
    pub fn assemble_elasticity(&self, c: &ElasticityTensor) -> Result<CscMatrix<f64>, LinearError> {
        self.check_elements()?;
        let mut trip = Vec::with_capacity(36 * self.n_elements());
        for e in 0..self.n_elements() {
            let dofs = self.element_dofs(e);
            let strains: Vec<SymTensor3> =
                (0..6).map(|a| self.basis_strain(e, a / 2, a % 2)).collect();
            for a in 0..6 {
                let ca = c.apply(strains[a]);
                for b in 0..6 {
                    trip.push((dofs[a], dofs[b], self.areas[e] * ca.inner(strains[b])));
                }
            }
        }
        Ok(to_csc(self.n_dofs(), &trip))
    }

    /// Consistent P1 mass matrix and Laplacian stiffness.
    pub fn assemble_heat(&self) -> Result<(CscMatrix<f64>, CscMatrix<f64>), LinearError> {
        self.check_elements()?;
        let mut mass = Vec::with_capacity(9 * self.n_elements());
        let mut lap = Vec::with_capacity(9 * self.n_elements());
        for (e, t) in self.triangles.iter().enumerate() {
            let area = self.areas[e];
            let g = self.grads[e];
            for a in 0..3 {
                for b in 0..3 {
                    let m = if a == b { area / 6.0 } else { area / 12.0 };
                    mass.push((t[a], t[b], m));
                    lap.push((t[a], t[b], area * (g[a][0] * g[b][0] + g[a][1] * g[b][1])));
                }
            }
        }
        let n = self.n_nodes();
        Ok((to_csc(n, &mass), to_csc(n, &lap)))
    }

    /// Per-element strain of a nodal displacement, embedded in 3D with
    /// vanishing out-of-plane components.
    pub fn strain_of(&self, u: &NodalVector) -> ElementTensor {
        (0..self.n_elements())
            .map(|e| {
                let t = self.triangles[e];
                let g = self.grads[e];
                let (mut dxux, mut dyux, mut dxuy, mut dyuy) = (0.0, 0.0, 0.0, 0.0);
                for k in 0..3 {
                    let (ux, uy) = (u[2 * t[k]], u[2 * t[k] + 1]);
                    dxux += ux * g[k][0];
                    dyux += ux * g[k][1];
                    dxuy += uy * g[k][0];
                    dyuy += uy * g[k][1];
                }
                SymTensor3::new(dxux, dyuy, 0.0, 0.5 * (dyux + dxuy), 0.0, 0.0)
            })
            .collect()
    }

    /// Per-element divergence of a nodal displacement.
    pub fn divergence_of(&self, u: &NodalVector) -> Vec<f64> {
        self.strain_of(u).into_iter().map(|s| s.trace()).collect()
    }

    /// Load `l[v] = sum_e area * S_e : eps(v)` of a per-element tensor.
    pub fn tensor_load(&self, s: &[SymTensor3]) -> NodalVector {
        let mut l = DVector::zeros(self.n_dofs());
        for (e, se) in s.iter().enumerate() {
            let dofs = self.element_dofs(e);
            for a in 0..6 {
                l[dofs[a]] += self.areas[e] * se.inner(self.basis_strain(e, a / 2, a % 2));
            }
        }
        l
    }

    /// Load `l[v] = sum_e area * q_e * div(v)` of a per-element pressure.
    pub fn pressure_load(&self, q: &[f64]) -> NodalVector {
        let s: Vec<SymTensor3> = q.iter().map(|&v| SymTensor3::IDENTITY.scale(v)).collect();
        self.tensor_load(&s)
    }

    /// Load `l[v] = sum_e area * F_e . v(centroid)` of a per-element force.
    pub fn force_load(&self, f: &[[f64; 2]]) -> NodalVector {
        let mut l = DVector::zeros(self.n_dofs());
        for (e, t) in self.triangles.iter().enumerate() {
            for &n in t {
                l[2 * n] += self.areas[e] * f[e][0] / 3.0;
                l[2 * n + 1] += self.areas[e] * f[e][1] / 3.0;
            }
        }
        l
    }

    /// Load `l[v] = sum_e area * s_e * v(centroid)` of a per-element source.
    pub fn source_load(&self, s: &[f64]) -> NodalScalar {
        let mut l = DVector::zeros(self.n_nodes());
        for (e, t) in self.triangles.iter().enumerate() {
            for &n in t {
                l[n] += self.areas[e] * s[e] / 3.0;
            }
        }
        l
    }

    /// Boundary load `l[v] = int g v dS`, edge-wise trapezoid rule on nodal
    /// samples of `g`.
    pub fn boundary_loads(&self, g: &NodalScalar) -> NodalScalar {
        let mut l = DVector::zeros(self.n_nodes());
        for e in &self.edges {
            let [a, b] = e.nodes;
            l[a] += 0.5 * e.length * g[a];
            l[b] += 0.5 * e.length * g[b];
        }
        l
    }

    /// Centroid value of a nodal scalar on each element.
    pub fn element_means(&self, v: &NodalScalar) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|t| (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0)
            .collect()
    }

    /// `sum_e area * |S_e|^2`.
    pub fn tensor_norm_sq(&self, s: &[SymTensor3]) -> f64 {
        s.iter()
            .zip(&self.areas)
            .map(|(t, a)| a * t.norm_sq())
            .sum()
    }

    pub fn tensor_norm(&self, s: &[SymTensor3]) -> f64 {
        self.tensor_norm_sq(s).sqrt()
    }

    /// L2 norm of the difference of two element tensor fields.
    pub fn tensor_dist(&self, a: &[SymTensor3], b: &[SymTensor3]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.areas)
            .map(|((x, y), w)| w * (*x - *y).norm_sq())
            .sum::<f64>()
            .sqrt()
    }

    pub fn integrate_elementwise(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.areas).map(|(x, a)| x * a).sum()
    }
}

/// Solves for the displacement with Dirichlet data on the whole boundary.
pub fn apply_dirichlet(
    mesh: &Mesh2D,
    stiffness: CscMatrix<f64>,
) -> Result<crate::linalg::DirichletSolver, LinearError> {
    crate::linalg::DirichletSolver::new(stiffness, &mesh.boundary_dofs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matvec;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    fn affine(mesh: &Mesh2D, a: [[f64; 2]; 2], c: [f64; 2]) -> NodalVector {
        let mut u = DVector::zeros(mesh.n_dofs());
        for (n, p) in mesh.nodes().iter().enumerate() {
            u[2 * n] = a[0][0] * p[0] + a[0][1] * p[1] + c[0];
            u[2 * n + 1] = a[1][0] * p[0] + a[1][1] * p[1] + c[1];
        }
        u
    }

    #[test]
    fn geometry_invariants() {
        for (nx, ny, lx, ly) in [(1, 1, 1.0, 1.0), (3, 5, 2.0, 0.5), (8, 8, 1.0, 1.0)] {
            let m = Mesh2D::new(nx, ny, lx, ly).unwrap();
            assert_eq!(m.n_elements(), 2 * nx * ny);
            assert!(m.areas().iter().all(|&a| a > 0.0));
            let total: f64 = m.areas().iter().sum();
            assert!((total - lx * ly).abs() < 1e-13);
            let per: f64 = m.boundary_edges().iter().map(|e| e.length).sum();
            assert!((per - 2.0 * (lx + ly)).abs() < 1e-13);
            assert_eq!(m.boundary_edges().len(), 2 * (nx + ny));
            assert_eq!(m.boundary_nodes().len(), 2 * (nx + ny));
        }
        assert!(Mesh2D::new(0, 1, 1.0, 1.0).is_err());
        assert!(Mesh2D::new(1, 1, -1.0, 1.0).is_err());
    }

    #[test]
    fn rigid_translation_in_kernel() {
        let m = Mesh2D::new(4, 3, 1.5, 1.0).unwrap();
        let c = ElasticityTensor::new(1.2, 0.8).unwrap();
        let k = m.assemble_elasticity(&c).unwrap();
        let u = affine(&m, [[0.0; 2]; 2], [0.3, -1.1]);
        assert!(matvec(&k, &u).amax() < 1e-13);
    }

    #[test]
    fn linear_field_has_zero_interior_residual() {
        let m = Mesh2D::new(4, 4, 1.0, 1.0).unwrap();
        let c = ElasticityTensor::new(1.0, 1.0).unwrap();
        let k = m.assemble_elasticity(&c).unwrap();
        let u = affine(&m, [[0.2, 0.1], [0.1, -0.3]], [0.0, 0.0]);
        let r = matvec(&k, &u);
        for n in 0..m.n_nodes() {
            if !m.is_boundary_node(n) {
                assert!(r[2 * n].abs() < 1e-13 && r[2 * n + 1].abs() < 1e-13);
            }
        }
        // stress is constant: C eps on every element
        let eps = m.strain_of(&u);
        for s in &eps {
            assert!(s.max_abs_diff(SymTensor3::new(0.2, -0.3, 0.0, 0.1, 0.0, 0.0)) < 1e-13);
        }
    }

    #[test]
    fn heat_matrices() {
        let m = Mesh2D::new(3, 2, 2.0, 1.0).unwrap();
        let (mass, lap) = m.assemble_heat().unwrap();
        let ones = DVector::from_element(m.n_nodes(), 1.0);
        assert!(matvec(&lap, &ones).amax() < 1e-13);
        let row = matvec(&mass, &ones);
        assert!((row.sum() - 2.0).abs() < 1e-13);
        let lumped = m.source_load(&vec![1.0; m.n_elements()]);
        assert!((row - lumped).amax() < 1e-14);
    }

    #[test]
    fn unit_square_laplacian_by_hand() {
        // cotangent formula on the two right triangles (0,1,3) and (0,3,2)
        let m = Mesh2D::new(1, 1, 1.0, 1.0).unwrap();
        let (_, lap) = m.assemble_heat().unwrap();
        let expected = [
            [1.0, -0.5, -0.5, 0.0],
            [-0.5, 1.0, 0.0, -0.5],
            [-0.5, 0.0, 1.0, -0.5],
            [0.0, -0.5, -0.5, 1.0],
        ];
        let dense = nalgebra::DMatrix::from(&lap);
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense[(i, j)] - expected[i][j]).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn strain_examples() {
        let m = Mesh2D::new(3, 3, 1.0, 1.0).unwrap();
        let zero = DVector::zeros(m.n_dofs());
        assert!(m.strain_of(&zero).iter().all(|s| *s == SymTensor3::ZERO));
        let ux = affine(&m, [[1.0, 0.0], [0.0, 0.0]], [0.0, 0.0]);
        for s in m.strain_of(&ux) {
            assert!(s.max_abs_diff(SymTensor3::diag(1.0, 0.0, 0.0)) < 1e-13);
        }
        let shear = affine(&m, [[0.0, 0.5], [0.5, 0.0]], [0.0, 0.0]);
        for s in m.strain_of(&shear) {
            assert!(s.max_abs_diff(SymTensor3::new(0.0, 0.0, 0.0, 0.5, 0.0, 0.0)) < 1e-13);
        }
    }

    #[test]
    fn boundary_load_examples() {
        let m = Mesh2D::new(4, 2, 2.0, 1.0).unwrap();
        let zero = DVector::zeros(m.n_nodes());
        assert_eq!(m.boundary_loads(&zero).amax(), 0.0);
        let ones = DVector::from_element(m.n_nodes(), 1.0);
        assert!((m.boundary_loads(&ones).sum() - 6.0).abs() < 1e-13);
        // one side only: nodes on the left edge
        let mut left = DVector::zeros(m.n_nodes());
        for e in m.boundary_edges().iter().filter(|e| e.side == Side::Left) {
            left[e.nodes[0]] = 1.0;
            left[e.nodes[1]] = 1.0;
        }
        let ell: f64 = m
            .boundary_edges()
            .iter()
            .filter(|e| e.side == Side::Left)
            .map(|e| 0.5 * e.length * (left[e.nodes[0]] + left[e.nodes[1]]))
            .sum();
        assert!((ell - 1.0).abs() < 1e-13);
    }

    #[test]
    fn divergence_theorem_holds_discretely() {
        let m = Mesh2D::new(5, 4, 1.3, 0.7).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..20 {
            let u = DVector::from_fn(m.n_dofs(), |_, _| rng.random_range(-1.0..1.0));
            let lhs = m.integrate_elementwise(&m.divergence_of(&u));
            let rhs: f64 = m
                .boundary_edges()
                .iter()
                .map(|e| {
                    let [a, b] = e.nodes;
                    let un = |n: usize| u[2 * n] * e.normal[0] + u[2 * n + 1] * e.normal[1];
                    0.5 * e.length * (un(a) + un(b))
                })
                .sum();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_reproduces_affine_displacement() {
        for (nx, ny) in [(1, 1), (2, 3), (8, 8), (16, 16)] {
            let m = Mesh2D::new(nx, ny, 1.0, 1.0).unwrap();
            let c = ElasticityTensor::new(1.0, 1.0).unwrap();
            let solver = apply_dirichlet(&m, m.assemble_elasticity(&c).unwrap()).unwrap();
            let g = affine(&m, [[0.1, -0.2], [0.05, 0.3]], [0.01, 0.0]);
            let u = solver.solve(1.0, &DVector::zeros(m.n_dofs()), &g).unwrap();
            assert!((u - &g).amax() < 1e-12);
            let zero = solver
                .solve(
                    1.0,
                    &DVector::zeros(m.n_dofs()),
                    &DVector::zeros(m.n_dofs()),
                )
                .unwrap();
            assert_eq!(zero.amax(), 0.0);
        }
    }
}
