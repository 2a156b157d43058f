//! Scenario description: mesh, time grid, material, solver controls, and the
//! named presets for boundary data, body force and initial data.
//!
//! Scenario files use a flat `section.key = value` schema (TOML dotted keys,
//! so `[section]` tables are accepted too). Every key is optional except
//! `mesh.*` and `time.*`; unknown keys are rejected with their full path.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use toml::{Table, Value};

use crate::constitutive::{flow_rule, MaterialParams, ThermalCoupling};
use crate::error::{ParamError, ScenarioError};
use crate::mesh::{Mesh2D, NodalScalar, NodalVector, Side};
use crate::tensor::{ElasticityTensor, SymTensor3};

pub const MAX_CELLS_PER_SIDE: usize = 256;
pub const MAX_STEPS: usize = 1_000_000;
pub const MAX_SUBSTEPS: usize = 1_000_000;
pub const MAX_PICARD: usize = 10_000;

/// Scalar time modulation applied to a spatial preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `rate * t`.
    Ramp {
        rate: f64,
    },
    /// `rate * min(t, t_hold)`.
    Hold {
        rate: f64,
        t_hold: f64,
    },
    /// `amplitude * sin(2 pi frequency t)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Ramp { rate } => rate * t,
            TimeProfile::Hold { rate, t_hold } => rate * t.min(t_hold),
            TimeProfile::Sinusoid {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * t).sin(),
        }
    }

    /// Time derivative; the right derivative at the corner of `Hold`.
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Ramp { rate } => rate,
            TimeProfile::Hold { rate, t_hold } => {
                if t < t_hold {
                    rate
                } else {
                    0.0
                }
            }
            TimeProfile::Sinusoid {
                amplitude,
                frequency,
            } => amplitude * 2.0 * PI * frequency * (2.0 * PI * frequency * t).cos(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeProfile::Constant)
    }
}

/// `g(x, t) = profile(t) * (A x + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineVectorField {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
    pub profile: TimeProfile,
}

impl AffineVectorField {
    pub const ZERO: AffineVectorField = AffineVectorField {
        matrix: [[0.0; 2]; 2],
        offset: [0.0; 2],
        profile: TimeProfile::Constant,
    };

    fn spatial(&self, x: [f64; 2]) -> [f64; 2] {
        let a = self.matrix;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.offset[0],
            a[1][0] * x[0] + a[1][1] * x[1] + self.offset[1],
        ]
    }

    pub fn eval(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let s = self.spatial(x);
        let phi = self.profile.value(t);
        [phi * s[0], phi * s[1]]
    }

    pub fn eval_t(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let s = self.spatial(x);
        let phi = self.profile.rate(t);
        [phi * s[0], phi * s[1]]
    }

    pub fn is_zero(&self) -> bool {
        self.matrix == [[0.0; 2]; 2] && self.offset == [0.0; 2]
    }

    pub fn is_time_constant(&self) -> bool {
        self.is_zero() || self.profile.is_constant()
    }

    pub fn nodal(&self, mesh: &Mesh2D, t: f64) -> NodalVector {
        let mut v = NodalVector::zeros(mesh.n_dofs());
        for (n, &x) in mesh.nodes().iter().enumerate() {
            let g = self.eval(x, t);
            v[2 * n] = g[0];
            v[2 * n + 1] = g[1];
        }
        v
    }

    pub fn nodal_t(&self, mesh: &Mesh2D, t: f64) -> NodalVector {
        let mut v = NodalVector::zeros(mesh.n_dofs());
        for (n, &x) in mesh.nodes().iter().enumerate() {
            let g = self.eval_t(x, t);
            v[2 * n] = g[0];
            v[2 * n + 1] = g[1];
        }
        v
    }
}

/// Boundary heat flux `g(x, t) = profile(t) * (value + gradient . x)` on
/// the selected sides, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatFlux {
    pub value: f64,
    pub gradient: [f64; 2],
    pub sides: Vec<Side>,
    pub profile: TimeProfile,
}

impl HeatFlux {
    pub fn zero() -> Self {
        HeatFlux {
            value: 0.0,
            gradient: [0.0; 2],
            sides: Side::ALL.to_vec(),
            profile: TimeProfile::Constant,
        }
    }

    pub fn is_zero(&self) -> bool {
        (self.value == 0.0 && self.gradient == [0.0; 2]) || self.sides.is_empty()
    }

    pub fn eval(&self, x: [f64; 2], t: f64) -> f64 {
        self.profile.value(t) * (self.value + self.gradient[0] * x[0] + self.gradient[1] * x[1])
    }

    /// Boundary load `int g v dS` over the selected sides, edge-wise
    /// trapezoid rule.
    pub fn load(&self, mesh: &Mesh2D, t: f64) -> NodalScalar {
        let mut l = NodalScalar::zeros(mesh.n_nodes());
        if self.is_zero() {
            return l;
        }
        for e in mesh.boundary_edges() {
            if self.sides.contains(&e.side) {
                for &n in &e.nodes {
                    l[n] += 0.5 * e.length * self.eval(mesh.nodes()[n], t);
                }
            }
        }
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDisplacement {
    Zero,
    Affine {
        matrix: [[f64; 2]; 2],
        offset: [f64; 2],
    },
    /// `u0 = g_D(x, 0)`.
    MatchBoundary,
    /// `g_D(x, 0) + amplitude * sin(pi x / lx) sin(pi y / ly)`; agrees with
    /// the boundary data on the boundary.
    Bubble {
        amplitude: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialTemperature {
    Zero,
    Constant {
        value: f64,
    },
    /// `value + amplitude * cos(pi x / lx) cos(pi y / ly)`.
    Cosine {
        value: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64) -> Result<Self, ParamError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParamError::new("time.dt", "must be positive"));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(ParamError::new("time.t_final", "must be positive"));
        }
        let ratio = t_final / dt;
        if ratio > MAX_STEPS as f64 + 0.5 {
            return Err(ParamError::new(
                "time.dt",
                format!("yields more than {MAX_STEPS} steps"),
            ));
        }
        let n = ratio.round();
        if n < 1.0 || (n * dt - t_final).abs() > 1e-9 * t_final {
            return Err(ParamError::new("time.dt", "must divide time.t_final"));
        }
        Ok(TimeGrid {
            t_final,
            dt,
            n_steps: n as usize,
        })
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub picard_tol: f64,
    pub picard_max: usize,
    pub substeps: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            picard_tol: 1e-10,
            picard_max: 50,
            substeps: 32,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.picard_tol > 0.0 && self.picard_tol < 1.0) {
            return Err(ParamError::new("solver.picard_tol", "must lie in (0, 1)"));
        }
        if self.picard_max == 0 || self.picard_max > MAX_PICARD {
            return Err(ParamError::new(
                "solver.picard_max",
                format!("must lie in [1, {MAX_PICARD}]"),
            ));
        }
        if self.substeps == 0 || self.substeps > MAX_SUBSTEPS {
            return Err(ParamError::new(
                "solver.substeps",
                format!("must lie in [1, {MAX_SUBSTEPS}]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub time: TimeGrid,
    pub material: MaterialParams,
    pub solver: SolverParams,
    pub displacement_bc: AffineVectorField,
    pub heat_flux: HeatFlux,
    /// Spatially constant body force times a time profile.
    pub body_force: AffineVectorField,
    pub u0: InitialDisplacement,
    pub eps_p0: SymTensor3,
    pub theta0: InitialTemperature,
}

impl Scenario {
    pub fn mesh(&self) -> Result<Mesh2D, ParamError> {
        Mesh2D::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn u0_nodal(&self, mesh: &Mesh2D) -> NodalVector {
        match self.u0 {
            InitialDisplacement::Zero => NodalVector::zeros(mesh.n_dofs()),
            InitialDisplacement::Affine { matrix, offset } => AffineVectorField {
                matrix,
                offset,
                profile: TimeProfile::Constant,
            }
            .nodal(mesh, 0.0),
            InitialDisplacement::MatchBoundary => self.displacement_bc.nodal(mesh, 0.0),
            InitialDisplacement::Bubble { amplitude } => {
                let mut u = self.displacement_bc.nodal(mesh, 0.0);
                for (n, x) in mesh.nodes().iter().enumerate() {
                    let b = (PI * x[0] / self.lx).sin() * (PI * x[1] / self.ly).sin();
                    if !mesh.is_boundary_node(n) {
                        u[2 * n] += amplitude[0] * b;
                        u[2 * n + 1] += amplitude[1] * b;
                    }
                }
                u
            }
        }
    }

    pub fn theta0_nodal(&self, mesh: &Mesh2D) -> NodalScalar {
        NodalScalar::from_iterator(
            mesh.n_nodes(),
            mesh.nodes().iter().map(|x| match self.theta0 {
                InitialTemperature::Zero => 0.0,
                InitialTemperature::Constant { value } => value,
                InitialTemperature::Cosine { value, amplitude } => {
                    value + amplitude * (PI * x[0] / self.lx).cos() * (PI * x[1] / self.ly).cos()
                }
            }),
        )
    }

    /// Body force sampled at element centroids.
    pub fn body_force_elements(&self, mesh: &Mesh2D, t: f64) -> Vec<[f64; 2]> {
        (0..mesh.n_elements())
            .map(|e| self.body_force.eval(mesh.centroid(e), t))
            .collect()
    }

    /// Closed system: no body force, time-constant Dirichlet data, no heat
    /// flux, no thermal coupling. The total energy cannot grow.
    pub fn is_closed(&self) -> bool {
        self.body_force.is_zero()
            && self.displacement_bc.is_time_constant()
            && self.heat_flux.is_zero()
            && self.material.coupling.is_zero()
    }

    /// The initial stress must lie in the domain of the flow rule: the flow
    /// rule of `dev C(eps(u0) - eps_p0)` is finite on every element.
    pub fn check_admissible(&self, mesh: &Mesh2D) -> Result<(), usize> {
        let strain = mesh.strain_of(&self.u0_nodal(mesh));
        for (e, s) in strain.into_iter().enumerate() {
            let t = self.material.elasticity.apply(s - self.eps_p0).dev();
            if !flow_rule(t, self.material.p).is_finite() {
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.nx > MAX_CELLS_PER_SIDE {
            return Err(ParamError::new(
                "mesh.nx",
                format!("must not exceed {MAX_CELLS_PER_SIDE}"),
            ));
        }
        if self.ny > MAX_CELLS_PER_SIDE {
            return Err(ParamError::new(
                "mesh.ny",
                format!("must not exceed {MAX_CELLS_PER_SIDE}"),
            ));
        }
        let mesh = self.mesh()?;
        self.solver.validate()?;
        if !(self.material.yosida_lambda > 0.0) {
            return Err(ParamError::new(
                "material.yosida_lambda",
                "must be positive for field simulations",
            ));
        }
        if self.eps_p0.trace().abs() > 1e-10 * (1.0 + self.eps_p0.norm()) {
            return Err(ParamError::new("initial.eps_p0.value", "must be traceless"));
        }
        if self.check_admissible(&mesh).is_err() {
            return Err(ParamError::new(
                "initial",
                "flow rule of the initial stress is not finite",
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        let table: Table = src
            .parse()
            .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
        let root = Section::new("", &table);
        let scenario = parse_scenario(&root)?;
        root.finish()?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml_str(&src)
    }
}

/// Parse and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    Scenario::load(path)
}

/// Key-tracking view of one table; `finish` rejects keys never read.
pub(crate) struct Section<'a> {
    path: String,
    table: Option<&'a Table>,
    used: std::cell::RefCell<BTreeSet<String>>,
    children: std::cell::RefCell<Vec<Section<'a>>>,
}

impl<'a> Section<'a> {
    pub(crate) fn new(path: &str, table: &'a Table) -> Self {
        Section {
            path: path.to_string(),
            table: Some(table),
            used: Default::default(),
            children: Default::default(),
        }
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{}", self.path, key)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.and_then(|t| t.get(key))
    }

    pub(crate) fn section(&self, key: &str) -> Result<usize, ParamError> {
        let path = self.field(key);
        let table = match self.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(ParamError::new(path, "must be a table")),
        };
        let mut children = self.children.borrow_mut();
        children.push(Section {
            path,
            table,
            used: Default::default(),
            children: Default::default(),
        });
        Ok(children.len() - 1)
    }

    pub(crate) fn with<T>(
        &self,
        key: &str,
        f: impl FnOnce(&Section<'a>) -> Result<T, ScenarioError>,
    ) -> Result<T, ScenarioError> {
        let idx = self.section(key)?;
        let children = self.children.borrow();
        f(&children[idx])
    }

    pub(crate) fn opt_f64(&self, key: &str) -> Result<Option<f64>, ParamError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(ParamError::new(self.field(key), "must be a number")),
        }
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> Result<f64, ParamError> {
        let v = self.opt_f64(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(ParamError::new(self.field(key), "must be finite"));
        }
        Ok(v)
    }

    pub(crate) fn req_f64(&self, key: &str) -> Result<f64, ParamError> {
        let v = self
            .opt_f64(key)?
            .ok_or_else(|| ParamError::new(self.field(key), "is required"))?;
        if !v.is_finite() {
            return Err(ParamError::new(self.field(key), "must be finite"));
        }
        Ok(v)
    }

    pub(crate) fn opt_usize(&self, key: &str) -> Result<Option<usize>, ParamError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(_) => Err(ParamError::new(
                self.field(key),
                "must be a non-negative integer",
            )),
        }
    }

    pub(crate) fn req_usize(&self, key: &str) -> Result<usize, ParamError> {
        self.opt_usize(key)?
            .ok_or_else(|| ParamError::new(self.field(key), "is required"))
    }

    pub(crate) fn opt_str(&self, key: &str) -> Result<Option<&'a str>, ParamError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(ParamError::new(self.field(key), "must be a string")),
        }
    }

    pub(crate) fn array<const N: usize>(
        &self,
        key: &str,
        default: [f64; N],
    ) -> Result<[f64; N], ParamError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Array(items)) if items.len() == N => {
                let mut out = [0.0; N];
                for (o, v) in out.iter_mut().zip(items) {
                    *o = match v {
                        Value::Float(x) if x.is_finite() => *x,
                        Value::Integer(x) => *x as f64,
                        _ => {
                            return Err(ParamError::new(
                                self.field(key),
                                "must contain finite numbers",
                            ))
                        }
                    };
                }
                Ok(out)
            }
            Some(_) => Err(ParamError::new(
                self.field(key),
                format!("must be an array of {N} numbers"),
            )),
        }
    }

    pub(crate) fn unknown_preset(&self, key: &str, name: &str) -> ScenarioError {
        ScenarioError::UnknownPreset {
            field: self.field(key),
            name: name.to_string(),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParamError> {
        if let Some(t) = self.table {
            let used = self.used.borrow();
            if let Some(k) = t.keys().find(|k| !used.contains(*k)) {
                return Err(ParamError::new(self.field(k), "is not a recognized key"));
            }
        }
        for c in self.children.borrow().iter() {
            c.finish()?;
        }
        Ok(())
    }
}

fn matrix2(a: [f64; 4]) -> [[f64; 2]; 2] {
    [[a[0], a[1]], [a[2], a[3]]]
}

pub(crate) fn parse_profile(s: &Section) -> Result<TimeProfile, ScenarioError> {
    let name = s.opt_str("profile")?.unwrap_or("constant");
    let profile = match name {
        "constant" => TimeProfile::Constant,
        "ramp" => TimeProfile::Ramp {
            rate: s.f64_or("rate", 1.0)?,
        },
        "hold" => {
            let t_hold = s.req_f64("t_hold")?;
            if !(t_hold > 0.0) {
                return Err(ParamError::new(s.field("t_hold"), "must be positive").into());
            }
            TimeProfile::Hold {
                rate: s.f64_or("rate", 1.0)?,
                t_hold,
            }
        }
        "sinusoid" => TimeProfile::Sinusoid {
            amplitude: s.f64_or("amplitude", 1.0)?,
            frequency: s.f64_or("frequency", 1.0)?,
        },
        other => return Err(s.unknown_preset("profile", other)),
    };
    Ok(profile)
}

fn parse_vector_preset(s: &Section) -> Result<AffineVectorField, ScenarioError> {
    let kind = s.opt_str("kind")?.unwrap_or("zero");
    let profile = parse_profile(s)?;
    let field = match kind {
        "zero" => AffineVectorField::ZERO,
        "constant" => AffineVectorField {
            matrix: [[0.0; 2]; 2],
            offset: s.array("value", [0.0; 2])?,
            profile,
        },
        "affine" => AffineVectorField {
            matrix: matrix2(s.array("matrix", [0.0; 4])?),
            offset: s.array("offset", [0.0; 2])?,
            profile,
        },
        other => return Err(s.unknown_preset("kind", other)),
    };
    Ok(field)
}

fn parse_heat_flux(s: &Section) -> Result<HeatFlux, ScenarioError> {
    let kind = s.opt_str("kind")?.unwrap_or("zero");
    let profile = parse_profile(s)?;
    let sides = match s.get("sides") {
        None => Side::ALL.to_vec(),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for v in items {
                let name = v
                    .as_str()
                    .ok_or_else(|| ParamError::new(s.field("sides"), "must list side names"))?;
                let side = Side::from_name(name).ok_or_else(|| s.unknown_preset("sides", name))?;
                if !out.contains(&side) {
                    out.push(side);
                }
            }
            out
        }
        Some(_) => return Err(ParamError::new(s.field("sides"), "must be an array").into()),
    };
    let flux = match kind {
        "zero" => HeatFlux::zero(),
        "constant" => HeatFlux {
            value: s.f64_or("value", 0.0)?,
            gradient: [0.0; 2],
            sides,
            profile,
        },
        "affine" => HeatFlux {
            value: s.f64_or("value", 0.0)?,
            gradient: s.array("gradient", [0.0; 2])?,
            sides,
            profile,
        },
        other => return Err(s.unknown_preset("kind", other)),
    };
    Ok(flux)
}

pub(crate) fn parse_material(s: &Section) -> Result<MaterialParams, ScenarioError> {
    let elasticity =
        ElasticityTensor::new(s.f64_or("lame_lambda", 1.0)?, s.f64_or("lame_mu", 1.0)?)?;
    let alpha = s.f64_or("coupling_alpha", 0.0)?;
    let beta = s.f64_or("coupling_beta", 1.0)?;
    let coupling = match s.opt_str("coupling")?.unwrap_or("zero") {
        "zero" => ThermalCoupling::Zero,
        "linear" => ThermalCoupling::Linear { alpha },
        "saturating" => ThermalCoupling::Saturating { alpha, beta },
        other => return Err(s.unknown_preset("coupling", other)),
    };
    Ok(MaterialParams::new(
        s.f64_or("p", 3.0)?,
        s.f64_or("eps_trunc", 0.01)?,
        s.f64_or("yosida_lambda", 0.01)?,
        elasticity,
        coupling,
    )?)
}

fn parse_scenario(root: &Section) -> Result<Scenario, ScenarioError> {
    let name = root.opt_str("name")?.unwrap_or("unnamed").to_string();
    let (nx, ny, lx, ly) = root.with("mesh", |s| {
        Ok((
            s.req_usize("nx")?,
            s.req_usize("ny")?,
            s.f64_or("lx", 1.0)?,
            s.f64_or("ly", 1.0)?,
        ))
    })?;
    let time = root.with("time", |s| {
        Ok(TimeGrid::new(s.req_f64("t_final")?, s.req_f64("dt")?)?)
    })?;
    let material = root.with("material", parse_material)?;
    let solver = root.with("solver", |s| {
        let d = SolverParams::default();
        Ok(SolverParams {
            picard_tol: s.f64_or("picard_tol", d.picard_tol)?,
            picard_max: s.opt_usize("picard_max")?.unwrap_or(d.picard_max),
            substeps: s.opt_usize("substeps")?.unwrap_or(d.substeps),
        })
    })?;
    let (displacement_bc, heat_flux) = root.with("boundary", |b| {
        let d = b.with("displacement", parse_vector_preset)?;
        let h = b.with("heat_flux", parse_heat_flux)?;
        Ok((d, h))
    })?;
    let body_force = root.with("body_force", |s| {
        let f = parse_vector_preset(s)?;
        if f.matrix != [[0.0; 2]; 2] {
            return Err(ParamError::new("body_force.kind", "must be zero or constant").into());
        }
        Ok(f)
    })?;
    let (u0, eps_p0, theta0) = root.with("initial", |s| {
        let u0 = s.with("u0", |u| match u.opt_str("kind")?.unwrap_or("zero") {
            "zero" => Ok(InitialDisplacement::Zero),
            "affine" => Ok(InitialDisplacement::Affine {
                matrix: matrix2(u.array("matrix", [0.0; 4])?),
                offset: u.array("offset", [0.0; 2])?,
            }),
            "match_boundary" => Ok(InitialDisplacement::MatchBoundary),
            "bubble" => Ok(InitialDisplacement::Bubble {
                amplitude: u.array("amplitude", [0.0; 2])?,
            }),
            other => Err(u.unknown_preset("kind", other)),
        })?;
        let eps_p0 = s.with("eps_p0", |e| match e.opt_str("kind")?.unwrap_or("zero") {
            "zero" => Ok(SymTensor3::ZERO),
            "constant" => Ok(SymTensor3::from_array(e.array("value", [0.0; 6])?)),
            other => Err(e.unknown_preset("kind", other)),
        })?;
        let theta0 = s.with("theta0", |t| match t.opt_str("kind")?.unwrap_or("zero") {
            "zero" => Ok(InitialTemperature::Zero),
            "constant" => Ok(InitialTemperature::Constant {
                value: t.f64_or("value", 0.0)?,
            }),
            "cosine" => Ok(InitialTemperature::Cosine {
                value: t.f64_or("value", 0.0)?,
                amplitude: t.f64_or("amplitude", 1.0)?,
            }),
            other => Err(t.unknown_preset("kind", other)),
        })?;
        Ok((u0, eps_p0, theta0))
    })?;
    Ok(Scenario {
        name,
        nx,
        ny,
        lx,
        ly,
        time,
        material,
        solver,
        displacement_bc,
        heat_flux,
        body_force,
        u0,
        eps_p0,
        theta0,
    })
}
