//! Well-prepared initial phase fields: signed distances to model
//! hypersurfaces, a saturating smoothing of the distance, and the
//! composition with the standing-wave profile.
//!
//! The smoothing is the identity on the whole transition band of the
//! profile and blends with a monotone quadratic-Hermite ramp to a constant
//! cap, so that `|d r_bar/dr| <= 1` and `|d^2 r_bar/dr^2| <= 1/eps`
//! everywhere by construction.

use crate::grid::{Grid, ScalarField};
use crate::potential::{profile_q, profile_q_delta, ProfileParam};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InitialError {
    #[error("shape parameter invalid: {0}")]
    Shape(String),
    #[error("interface too close to the box boundary: {0}")]
    Margin(String),
}

/// Model initial hypersurfaces with closed-form signed distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Annulus {
        center: [f64; 3],
        r_inner: f64,
        r_outer: f64,
    },
    TwoSpheres {
        c1: [f64; 3],
        r1: f64,
        c2: [f64; 3],
        r2: f64,
    },
}

impl Shape {
    pub fn validate(&self) -> Result<(), InitialError> {
        match *self {
            Shape::Sphere { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(InitialError::Shape(format!("sphere radius {radius} <= 0")));
                }
            }
            Shape::Annulus {
                r_inner, r_outer, ..
            } => {
                if !(r_inner > 0.0) {
                    return Err(InitialError::Shape(format!(
                        "annulus inner radius {r_inner} <= 0"
                    )));
                }
                if !(r_inner < r_outer) {
                    return Err(InitialError::Shape(format!(
                        "annulus radii must satisfy r_inner < r_outer, got {r_inner} >= {r_outer}"
                    )));
                }
            }
            Shape::TwoSpheres { r1, r2, .. } => {
                if !(r1 > 0.0 && r2 > 0.0) {
                    return Err(InitialError::Shape(format!(
                        "sphere radii must be positive, got {r1}, {r2}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn dist(a: [f64; 3], b: [f64; 3], dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        let d = a[i] - b[i];
        s += d * d;
    }
    s.sqrt()
}

/// Signed distance to the shape's boundary, positive inside the enclosed
/// phase. Exact for sphere and annulus; for the two-sphere union, exact
/// away from the medial axis.
pub fn signed_distance(shape: Shape, x: [f64; 3], dim: usize) -> f64 {
    match shape {
        Shape::Sphere { center, radius } => radius - dist(x, center, dim),
        Shape::Annulus {
            center,
            r_inner,
            r_outer,
        } => {
            let r = dist(x, center, dim);
            (r - r_inner).min(r_outer - r)
        }
        Shape::TwoSpheres { c1, r1, c2, r2 } => {
            (r1 - dist(x, c1, dim)).max(r2 - dist(x, c2, dim))
        }
    }
}

/// Half-width of the identity band of [`smooth_saturate`]: the whole
/// transition band of the limit profile.
pub fn identity_band(epsilon: f64) -> f64 {
    epsilon * std::f64::consts::FRAC_PI_2
}

/// Level at which [`smooth_saturate`] caps out.
pub fn saturation_cap(epsilon: f64) -> f64 {
    0.5 * (identity_band(epsilon) + 3.0 * epsilon)
}

/// Odd, monotone saturation of a signed distance: identity for
/// `|r| <= eps*pi/2`, a quadratic Hermite ramp on `[eps*pi/2, 3 eps]`,
/// constant beyond. Derivative in `[0, 1]`; second derivative bounded by
/// `1/(3 eps - eps*pi/2) < 1/eps`.
pub fn smooth_saturate(r: f64, epsilon: f64) -> f64 {
    let b = identity_band(epsilon);
    let w = 3.0 * epsilon - b;
    let a = r.abs();
    let v = if a <= b {
        a
    } else if a < 3.0 * epsilon {
        let x = a - b;
        b + x - x * x / (2.0 * w)
    } else {
        saturation_cap(epsilon)
    };
    v.copysign(r)
}

/// Smoothed signed distance sampled on the grid.
pub fn smoothed_distance_field(grid: Grid, shape: Shape, epsilon: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        smooth_saturate(signed_distance(shape, x, grid.dim()), epsilon)
    })
}

/// Builds the well-prepared initial field `q(r_bar(x))` on the grid.
///
/// Nodes with raw distance `|r| >= 3 eps` are set to the exactly saturated
/// constant, so the field is constant to the last bit outside the
/// interface band and box truncation is exact at `t = 0`.
///
/// Errors with [`InitialError::Margin`] if the interface comes within
/// `4 eps` of the box boundary (sampled at the face nodes), and with
/// [`InitialError::Shape`] for invalid radii or two spheres closer than
/// `8 eps`.
pub fn build_initial_field(
    grid: Grid,
    shape: Shape,
    profile: ProfileParam,
) -> Result<ScalarField, InitialError> {
    shape.validate()?;
    let eps = profile.epsilon();
    if let Shape::TwoSpheres { c1, r1, c2, r2 } = shape {
        let gap = dist(c1, c2, grid.dim()) - r1 - r2;
        if gap < 8.0 * eps {
            return Err(InitialError::Shape(format!(
                "two-sphere gap {gap:.4} is below the 8*eps = {:.4} separation requirement",
                8.0 * eps
            )));
        }
    }

    let half = 0.5 * grid.extent();
    let saturated = match profile.delta() {
        Some(d) => d.saturation(),
        None => 1.0,
    };
    let q = |r: f64| match profile.delta() {
        Some(_) => profile_q_delta(r, profile),
        None => profile_q(r, eps),
    };

    let mut data = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let x = grid.position(idx);
        let r = signed_distance(shape, x, grid.dim());
        // the interface must keep a 4*eps clearance from every box face,
        // sampled at the face nodes (|r| there is the distance to Gamma_0)
        let wall = (0..grid.dim())
            .map(|a| half - x[a].abs())
            .fold(f64::INFINITY, f64::min);
        if wall < 0.5 * grid.h() && r.abs() < 4.0 * eps {
            return Err(InitialError::Margin(format!(
                "boundary node at |r| = {:.4} < 4*eps = {:.4}",
                r.abs(),
                4.0 * eps
            )));
        }
        data.push(if r.abs() >= 3.0 * eps {
            saturated.copysign(r)
        } else {
            q(smooth_saturate(r, eps))
        });
    }
    Ok(ScalarField::from_vec(grid, data))
}
