//! The obstacle potential family `F_delta`, its limit `F_0`, the 1-D
//! standing-wave profiles, the surface tension constant `sigma_delta` and
//! the normalized level transform `Phi`.
//!
//! All functions here are pure; branch boundaries use a half-open
//! convention where the lower branch owns its right endpoint.

use crate::quadrature::integrate;
use thiserror::Error;

/// Absolute tolerance used for every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("delta must lie in (0, 1/2), got {0}")]
    Delta(f64),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
}

/// Regularization parameter of the Yosida potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleParam {
    delta: f64,
}

impl ObstacleParam {
    pub fn new(delta: f64) -> Result<Self, ParamError> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(ParamError::Delta(delta));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The saturation level `1/(1-delta)`: the two minima of `F_delta`
    /// sit at plus/minus this value.
    pub fn saturation(&self) -> f64 {
        1.0 / (1.0 - self.delta)
    }
}

/// Interface-width parameter, with an optional Yosida regularization.
/// `delta: None` selects the limit profile `q^eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParam {
    epsilon: f64,
    delta: Option<ObstacleParam>,
}

impl ProfileParam {
    pub fn new(epsilon: f64, delta: Option<f64>) -> Result<Self, ParamError> {
        if !(epsilon > 0.0) {
            return Err(ParamError::Epsilon(epsilon));
        }
        let delta = delta.map(ObstacleParam::new).transpose()?;
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> Option<ObstacleParam> {
        self.delta
    }
}

/// The Yosida-regularized double-obstacle potential: piecewise quadratic,
/// nonnegative, vanishing exactly at `s = +-1/(1-delta)`.
pub fn f_delta(s: f64, p: ObstacleParam) -> f64 {
    let d = p.delta;
    if s <= -1.0 {
        let u = s + 1.0 / (1.0 - d);
        (1.0 - d) / (2.0 * d) * u * u
    } else if s <= 1.0 {
        -0.5 * s * s + 0.5 / (1.0 - d)
    } else {
        let u = s - 1.0 / (1.0 - d);
        (1.0 - d) / (2.0 * d) * u * u
    }
}

/// Exact derivative of `f_delta`.
pub fn f_delta_prime(s: f64, p: ObstacleParam) -> f64 {
    let d = p.delta;
    if s <= -1.0 {
        (1.0 - d) / d * (s + 1.0 / (1.0 - d))
    } else if s <= 1.0 {
        -s
    } else {
        (1.0 - d) / d * (s - 1.0 / (1.0 - d))
    }
}

/// The limit potential `F_0(s) = (1 - s^2)/2`.
pub fn f_zero(s: f64) -> f64 {
    0.5 * (1.0 - s * s)
}

/// Surface tension by the closed form
/// `sqrt(d/(1-d)) + asin(sqrt(1-d))/(1-d) + (d/(1-d))^{3/2}`.
///
/// Validated against [`sigma_delta_quadrature`]; tends to `pi/2` as
/// `delta` tends to zero.
pub fn sigma_delta(p: ObstacleParam) -> f64 {
    let d = p.delta;
    let r = d / (1.0 - d);
    r.sqrt() + (1.0 - d).sqrt().asin() / (1.0 - d) + r.powf(1.5)
}

/// Surface tension as the integral of `sqrt(2 F_delta)` over the phase
/// range, by adaptive quadrature split at the branch points.
pub fn sigma_delta_quadrature(p: ObstacleParam) -> f64 {
    let m = p.saturation();
    let g = |s: f64| (2.0 * f_delta(s, p)).sqrt();
    integrate(g, -m, -1.0, QUAD_TOL)
        + integrate(g, -1.0, 1.0, QUAD_TOL)
        + integrate(g, 1.0, m, QUAD_TOL)
}

/// The limit standing-wave profile `q^eps`: saturated outside
/// `|r| <= eps*pi/2`, sinusoidal inside.
pub fn profile_q(r: f64, epsilon: f64) -> f64 {
    let b = epsilon * std::f64::consts::FRAC_PI_2;
    if r <= -b {
        -1.0
    } else if r <= b {
        (r / epsilon).sin()
    } else {
        1.0
    }
}

/// Derivative of [`profile_q`]; bounded by `1/eps`.
pub fn profile_q_deriv(r: f64, epsilon: f64) -> f64 {
    let b = epsilon * std::f64::consts::FRAC_PI_2;
    if r.abs() <= b {
        (r / epsilon).cos() / epsilon
    } else {
        0.0
    }
}

/// Half-width of the sinusoidal branch of `q^{eps,delta}`.
fn branch_point(epsilon: f64, d: f64) -> f64 {
    epsilon * (1.0 - d).sqrt().asin()
}

/// The Yosida standing-wave profile `q^{eps,delta}`: sinusoidal core with
/// exponential tails approaching `+-1/(1-delta)`; equals `+-1` exactly at
/// `r = +-eps*asin(sqrt(1-delta))`.
pub fn profile_q_delta(r: f64, p: ProfileParam) -> f64 {
    let eps = p.epsilon;
    let d = p.delta.expect("profile_q_delta requires delta").delta;
    let rb = branch_point(eps, d);
    let k = ((1.0 - d) / d).sqrt();
    let amp = d / (1.0 - d);
    if r <= -rb {
        amp * (k * ((1.0 - d).sqrt().asin() + r / eps)).exp() - 1.0 / (1.0 - d)
    } else if r <= rb {
        (r / eps).sin() / (1.0 - d).sqrt()
    } else {
        1.0 / (1.0 - d) - amp * (k * ((1.0 - d).sqrt().asin() - r / eps)).exp()
    }
}

/// Derivative of [`profile_q_delta`]; strictly positive, bounded by `2/eps`.
pub fn profile_q_delta_deriv(r: f64, p: ProfileParam) -> f64 {
    let eps = p.epsilon;
    let d = p.delta.expect("profile_q_delta_deriv requires delta").delta;
    let rb = branch_point(eps, d);
    let k = ((1.0 - d) / d).sqrt();
    let amp = d / (1.0 - d);
    if r <= -rb {
        amp * k / eps * (k * ((1.0 - d).sqrt().asin() + r / eps)).exp()
    } else if r <= rb {
        (r / eps).cos() / (eps * (1.0 - d).sqrt())
    } else {
        amp * k / eps * (k * ((1.0 - d).sqrt().asin() - r / eps)).exp()
    }
}

/// Normalized level transform `Phi(s) = sigma^{-1} int_{-m}^{s} sqrt(2 F_delta)`,
/// mapping `[-1/(1-delta), 1/(1-delta)]` onto `[0, 1]`.
///
/// Numerator and denominator share the same subinterval decomposition, so
/// the endpoints map to exactly 0 and 1. Inputs outside the phase range
/// are clamped (saturated phase).
#[derive(Debug, Clone, Copy)]
pub struct PhiTransform {
    p: ObstacleParam,
    // integrals over [-m, -1], [-1, 1] and [1, m]
    lower: f64,
    middle: f64,
    upper: f64,
}

impl PhiTransform {
    pub fn new(p: ObstacleParam) -> Self {
        let m = p.saturation();
        let g = |s: f64| (2.0 * f_delta(s, p)).sqrt();
        Self {
            p,
            lower: integrate(g, -m, -1.0, QUAD_TOL),
            middle: integrate(g, -1.0, 1.0, QUAD_TOL),
            upper: integrate(g, 1.0, m, QUAD_TOL),
        }
    }

    pub fn total(&self) -> f64 {
        self.lower + self.middle + self.upper
    }

    pub fn eval(&self, s: f64) -> f64 {
        let p = self.p;
        let m = p.saturation();
        let s = s.clamp(-m, m);
        let g = |y: f64| (2.0 * f_delta(y, p)).sqrt();
        let num = if s <= -1.0 {
            integrate(g, -m, s, QUAD_TOL)
        } else if s <= 1.0 {
            self.lower + integrate(g, -1.0, s, QUAD_TOL)
        } else if s < m {
            self.lower + self.middle + integrate(g, 1.0, s, QUAD_TOL)
        } else {
            return 1.0;
        };
        if s == -m {
            return 0.0;
        }
        num / self.total()
    }
}

/// One-shot form of [`PhiTransform`].
pub fn phi_transform(s: f64, p: ObstacleParam) -> f64 {
    PhiTransform::new(p).eval(s)
}
