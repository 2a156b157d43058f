//! Norton-Hoff flow rule, its convex potential, truncation, and the
//! Moreau-Yosida regularization of the flow rule.
//!
//! The flow rule `G(w) = |w|^(p-1) w` is radial, so the resolvent
//! `J = (I + lambda G)^-1` keeps the direction of its argument and only the
//! magnitude solves the scalar equation `s + lambda s^p = |z|`. The root is
//! split into an elastic part `s` and a plastic part `r = |z| - s`; whichever
//! is smaller is solved for directly so neither is lost to cancellation.

use crate::error::{ConstitutiveError, ParamError};
use crate::tensor::{ElasticityTensor, SymTensor3};

/// Thermal softening function `f` and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalCoupling {
    Zero,
    /// `f(theta) = alpha * theta`.
    Linear {
        alpha: f64,
    },
    /// `f(theta) = alpha * theta / (1 + |theta / beta|)`.
    Saturating {
        alpha: f64,
        beta: f64,
    },
}

impl ThermalCoupling {
    pub fn eval(&self, theta: f64) -> f64 {
        match *self {
            ThermalCoupling::Zero => 0.0,
            ThermalCoupling::Linear { alpha } => alpha * theta,
            ThermalCoupling::Saturating { alpha, beta } => {
                alpha * theta / (1.0 + (theta / beta).abs())
            }
        }
    }

    pub fn deriv(&self, theta: f64) -> f64 {
        match *self {
            ThermalCoupling::Zero => 0.0,
            ThermalCoupling::Linear { alpha } => alpha,
            ThermalCoupling::Saturating { alpha, beta } => {
                let d = 1.0 + (theta / beta).abs();
                alpha / (d * d)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            ThermalCoupling::Zero => true,
            ThermalCoupling::Linear { alpha } => alpha == 0.0,
            ThermalCoupling::Saturating { alpha, .. } => alpha == 0.0,
        }
    }

    fn validate(&self) -> Result<(), ParamError> {
        match *self {
            ThermalCoupling::Zero => Ok(()),
            ThermalCoupling::Linear { alpha } => finite("material.coupling_alpha", alpha),
            ThermalCoupling::Saturating { alpha, beta } => {
                finite("material.coupling_alpha", alpha)?;
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(ParamError::new(
                        "material.coupling_beta",
                        "must be positive",
                    ));
                }
                Ok(())
            }
        }
    }
}

fn finite(field: &str, v: f64) -> Result<(), ParamError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ParamError::new(field, "must be finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Norton-Hoff exponent, `p > 1`.
    pub p: f64,
    /// Inverse truncation height.
    pub eps_trunc: f64,
    /// Yosida parameter; zero selects the exact flow rule.
    pub yosida_lambda: f64,
    pub elasticity: ElasticityTensor,
    pub coupling: ThermalCoupling,
}

impl MaterialParams {
    pub fn new(
        p: f64,
        eps_trunc: f64,
        yosida_lambda: f64,
        elasticity: ElasticityTensor,
        coupling: ThermalCoupling,
    ) -> Result<Self, ParamError> {
        if !(p.is_finite() && p > 1.0) {
            return Err(ParamError::new("material.p", "must exceed 1"));
        }
        if !(eps_trunc.is_finite() && eps_trunc > 0.0) {
            return Err(ParamError::new("material.eps_trunc", "must be positive"));
        }
        if !(yosida_lambda.is_finite() && yosida_lambda >= 0.0) {
            return Err(ParamError::new(
                "material.yosida_lambda",
                "must be non-negative",
            ));
        }
        coupling.validate()?;
        Ok(MaterialParams {
            p,
            eps_trunc,
            yosida_lambda,
            elasticity,
            coupling,
        })
    }

    pub fn with_lambda(&self, yosida_lambda: f64) -> Result<Self, ParamError> {
        MaterialParams::new(
            self.p,
            self.eps_trunc,
            yosida_lambda,
            self.elasticity,
            self.coupling,
        )
    }

    pub fn truncate(&self, r: f64) -> f64 {
        truncate(r, self.eps_trunc)
    }

    /// `f(T_{1/eps}(theta))`.
    pub fn coupling_truncated(&self, theta: f64) -> f64 {
        self.coupling.eval(self.truncate(theta))
    }

    /// Inelastic strain rate for the deviatoric stress `z`: the exact flow
    /// rule when `yosida_lambda == 0`, its Yosida approximation otherwise.
    pub fn plastic_rate(&self, z: SymTensor3) -> Result<SymTensor3, ConstitutiveError> {
        if self.yosida_lambda == 0.0 {
            Ok(flow_rule(z, self.p))
        } else {
            yosida_grad(z, self.yosida_lambda, self.p)
        }
    }
}

#[inline]
fn pow(x: f64, p: f64) -> f64 {
    if p == p.trunc() && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Norton-Hoff flow rule `|w|^(p-1) w`.
pub fn flow_rule(w: SymTensor3, p: f64) -> SymTensor3 {
    let n = w.norm();
    if n == 0.0 {
        return SymTensor3::ZERO;
    }
    w.scale(pow(n, p - 1.0))
}

/// Convex potential `|w|^(p+1) / (p+1)` whose gradient is the flow rule.
pub fn potential(w: SymTensor3, p: f64) -> f64 {
    pow(w.norm(), p + 1.0) / (p + 1.0)
}

/// Truncation `T_{1/eps}(r) = min(1/eps, max(r, -1/eps))`.
pub fn truncate(r: f64, eps_trunc: f64) -> f64 {
    let h = 1.0 / eps_trunc;
    r.clamp(-h, h)
}

/// Derivative of the truncation; zero on and beyond the corners.
pub fn truncate_deriv(r: f64, eps_trunc: f64) -> f64 {
    if r.abs() < 1.0 / eps_trunc {
        1.0
    } else {
        0.0
    }
}

/// Radial decomposition of `z` under the resolvent: `J(z) = elastic * dir`
/// and `z - J(z) = plastic * dir`, with `elastic + plastic = |z|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSplit {
    pub elastic: f64,
    pub plastic: f64,
    pub direction: SymTensor3,
}

const MAX_ROOT_ITERS: usize = 400;

/// Root of an increasing function on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`,
/// by Newton from `start` with bisection whenever Newton leaves the bracket.
fn increasing_root(
    f: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> Option<f64> {
    let mut x = start;
    for _ in 0..MAX_ROOT_ITERS {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= f64::MIN_POSITIVE {
            return Some(x);
        }
    }
    None
}

/// Solve `s + lambda s^p = |z|` and return the split.
pub fn resolvent_split(
    z: SymTensor3,
    lambda: f64,
    p: f64,
) -> Result<RadialSplit, ConstitutiveError> {
    let n = z.norm();
    if n == 0.0 {
        return Ok(RadialSplit {
            elastic: 0.0,
            plastic: 0.0,
            direction: SymTensor3::ZERO,
        });
    }
    let direction = z.scale(1.0 / n);
    if lambda == 0.0 {
        return Ok(RadialSplit {
            elastic: n,
            plastic: 0.0,
            direction,
        });
    }
    let fail = ConstitutiveError::RootNotConverged { norm: n, lambda, p };
    let half = 0.5 * n;
    let (elastic, plastic) = if lambda * pow(half, p) >= half {
        // root s <= |z|/2: convex in s, Newton from the right is monotone
        let s = increasing_root(
            |s| {
                (
                    s + lambda * pow(s, p) - n,
                    1.0 + lambda * p * pow(s, p - 1.0),
                )
            },
            0.0,
            half,
            half,
        )
        .ok_or(fail)?;
        (s, n - s)
    } else {
        // plastic part r < |z|/2: concave in r, Newton from the left is monotone
        let r = increasing_root(
            |r| {
                let s = n - r;
                (r - lambda * pow(s, p), 1.0 + lambda * p * pow(s, p - 1.0))
            },
            0.0,
            half,
            0.0,
        )
        .ok_or(fail)?;
        (n - r, r)
    };
    Ok(RadialSplit {
        elastic,
        plastic,
        direction,
    })
}

/// Resolvent `J_lambda(z) = (I + lambda G)^-1 z`.
pub fn resolvent(z: SymTensor3, lambda: f64, p: f64) -> Result<SymTensor3, ConstitutiveError> {
    let split = resolvent_split(z, lambda, p)?;
    Ok(split.direction.scale(split.elastic))
}

/// Yosida approximation `(z - J_lambda(z)) / lambda`, globally
/// `1/lambda`-Lipschitz.
pub fn yosida_grad(z: SymTensor3, lambda: f64, p: f64) -> Result<SymTensor3, ConstitutiveError> {
    if !(lambda > 0.0) {
        return Err(ConstitutiveError::NonPositiveLambda(lambda));
    }
    let split = resolvent_split(z, lambda, p)?;
    Ok(split.direction.scale(split.plastic / lambda))
}

/// Moreau envelope `min_w |z - w|^2 / (2 lambda) + M(w)`, evaluated at the
/// resolvent.
pub fn moreau_env(z: SymTensor3, lambda: f64, p: f64) -> Result<f64, ConstitutiveError> {
    if !(lambda > 0.0) {
        return Err(ConstitutiveError::NonPositiveLambda(lambda));
    }
    let split = resolvent_split(z, lambda, p)?;
    Ok(split.plastic * split.plastic / (2.0 * lambda) + pow(split.elastic, p + 1.0) / (p + 1.0))
}
