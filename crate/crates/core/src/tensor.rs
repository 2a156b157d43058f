//! Symmetric 3x3 tensors and isotropic elasticity.
//!
//! Tensors are stored as six independent components. Every norm and inner
//! product is the full-matrix Frobenius one, so off-diagonal components carry
//! a weight of two.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::ParamError;

/// Symmetric 3x3 tensor (strain, stress, inelastic strain).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub yz: f64,
    pub xz: f64,
}

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3 {
        xx: 0.0,
        yy: 0.0,
        zz: 0.0,
        xy: 0.0,
        yz: 0.0,
        xz: 0.0,
    };

    pub const IDENTITY: SymTensor3 = SymTensor3 {
        xx: 1.0,
        yy: 1.0,
        zz: 1.0,
        xy: 0.0,
        yz: 0.0,
        xz: 0.0,
    };

    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, xz: f64) -> Self {
        SymTensor3 {
            xx,
            yy,
            zz,
            xy,
            yz,
            xz,
        }
    }

    pub fn diag(xx: f64, yy: f64, zz: f64) -> Self {
        SymTensor3::new(xx, yy, zz, 0.0, 0.0, 0.0)
    }

    /// Component order: xx, yy, zz, xy, yz, xz.
    pub fn from_array(c: [f64; 6]) -> Self {
        SymTensor3::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.yz, self.xz]
    }

    /// Full 3x3 matrix, row-major.
    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// Deviatoric part `A - tr(A)/3 * I`.
    pub fn dev(self) -> Self {
        let m = self.trace() / 3.0;
        SymTensor3 {
            xx: self.xx - m,
            yy: self.yy - m,
            zz: self.zz - m,
            ..self
        }
    }

    /// Frobenius inner product of the full matrices.
    pub fn inner(self, other: SymTensor3) -> f64 {
        self.xx * other.xx
            + self.yy * other.yy
            + self.zz * other.zz
            + 2.0 * (self.xy * other.xy + self.yz * other.yz + self.xz * other.xz)
    }

    pub fn norm_sq(self) -> f64 {
        self.inner(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        SymTensor3 {
            xx: s * self.xx,
            yy: s * self.yy,
            zz: s * self.zz,
            xy: s * self.xy,
            yz: s * self.yz,
            xz: s * self.xz,
        }
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: SymTensor3) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for SymTensor3 {
    type Output = SymTensor3;
    fn add(self, o: SymTensor3) -> SymTensor3 {
        SymTensor3 {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            yz: self.yz + o.yz,
            xz: self.xz + o.xz,
        }
    }
}

impl Sub for SymTensor3 {
    type Output = SymTensor3;
    fn sub(self, o: SymTensor3) -> SymTensor3 {
        self + (-o)
    }
}

impl Neg for SymTensor3 {
    type Output = SymTensor3;
    fn neg(self) -> SymTensor3 {
        self.scale(-1.0)
    }
}

impl Mul<SymTensor3> for f64 {
    type Output = SymTensor3;
    fn mul(self, t: SymTensor3) -> SymTensor3 {
        t.scale(self)
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, o: SymTensor3) {
        *self = *self + o;
    }
}

impl SubAssign for SymTensor3 {
    fn sub_assign(&mut self, o: SymTensor3) {
        *self = *self - o;
    }
}

/// Isotropic elasticity `C A = lambda tr(A) I + 2 mu A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityTensor {
    lame_lambda: f64,
    lame_mu: f64,
}

impl ElasticityTensor {
    /// Rejects pairs that are not positive definite on symmetric matrices
    /// (`mu > 0` and bulk modulus `lambda + 2 mu / 3 > 0`).
    pub fn new(lame_lambda: f64, lame_mu: f64) -> Result<Self, ParamError> {
        if !(lame_mu.is_finite() && lame_mu > 0.0) {
            return Err(ParamError::new("material.lame_mu", "must be positive"));
        }
        if !(lame_lambda.is_finite() && 3.0 * lame_lambda + 2.0 * lame_mu > 0.0) {
            return Err(ParamError::new(
                "material.lame_lambda",
                "3*lame_lambda + 2*lame_mu must be positive",
            ));
        }
        Ok(ElasticityTensor {
            lame_lambda,
            lame_mu,
        })
    }

    pub fn lame_lambda(&self) -> f64 {
        self.lame_lambda
    }

    pub fn lame_mu(&self) -> f64 {
        self.lame_mu
    }

    pub fn bulk_modulus(&self) -> f64 {
        self.lame_lambda + 2.0 * self.lame_mu / 3.0
    }

    pub fn apply(&self, a: SymTensor3) -> SymTensor3 {
        let vol = self.lame_lambda * a.trace();
        let mut out = a.scale(2.0 * self.lame_mu);
        out.xx += vol;
        out.yy += vol;
        out.zz += vol;
        out
    }

    pub fn apply_inv(&self, s: SymTensor3) -> SymTensor3 {
        let vol = -self.lame_lambda * s.trace() / (3.0 * self.lame_lambda + 2.0 * self.lame_mu);
        let mut out = s;
        out.xx += vol;
        out.yy += vol;
        out.zz += vol;
        out.scale(0.5 / self.lame_mu)
    }
}
