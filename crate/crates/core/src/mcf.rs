//! Exact mean-curvature-flow reference solutions for spheres and zero
//! level-set extraction from phase fields, used to validate the
//! sharp-interface limit.

use crate::solver::PhaseState;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum McfError {
    #[error("sphere extinct: t = {t:.6e} >= extinction time {extinction:.6e}")]
    Extinct { t: f64, extinction: f64 },
    #[error("no sign change in the field (extinct or saturated)")]
    EmptyContour,
}

/// Radius of a sphere moving by mean curvature: `sqrt(r0^2 - 2(n-1) t)`.
/// In 1-D the front is flat and does not move.
pub fn sphere_radius_exact(r0: f64, dim: usize, t: f64) -> Result<f64, McfError> {
    let k = 2.0 * (dim as f64 - 1.0);
    if k > 0.0 {
        let extinction = r0 * r0 / k;
        if t >= extinction {
            return Err(McfError::Extinct { t, extinction });
        }
    }
    Ok((r0 * r0 - k * t).sqrt())
}

/// Vertices of the zero level set: one point per sign-changing grid edge,
/// placed by linear interpolation. Nodes with value exactly 0 count as
/// positive. In 2-D this is the marching-squares vertex set, in 3-D the
/// marching-cubes one; connectivity is not needed by any consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
}

pub fn extract_zero_level(state: &PhaseState) -> Result<Contour, McfError> {
    let grid = state.field.grid();
    let data = state.field.data();
    let n = grid.nodes();
    let positive = |v: f64| v >= 0.0;
    let mut vertices = Vec::new();
    for idx in 0..grid.len() {
        let m = grid.unravel(idx);
        let va = data[idx];
        for axis in 0..grid.dim() {
            if m[axis] + 1 >= n {
                continue;
            }
            let mut mb = m;
            mb[axis] += 1;
            let vb = data[grid.ravel(mb)];
            if positive(va) == positive(vb) {
                continue;
            }
            let t = va / (va - vb); // in [0, 1): va and vb bracket zero
            let mut x = grid.position(idx);
            x[axis] += t * grid.h();
            vertices.push(x);
        }
    }
    if vertices.is_empty() {
        return Err(McfError::EmptyContour);
    }
    Ok(Contour {
        dim: grid.dim(),
        vertices,
    })
}

/// Mean of `|vertex - center|` and the largest deviation from that mean.
pub fn radius_estimate(contour: &Contour, center: [f64; 3]) -> (f64, f64) {
    let dist = |v: &[f64; 3]| {
        let mut s = 0.0;
        for a in 0..contour.dim {
            let d = v[a] - center[a];
            s += d * d;
        }
        s.sqrt()
    };
    let n = contour.vertices.len() as f64;
    let mean = contour.vertices.iter().map(dist).sum::<f64>() / n;
    let dev = contour
        .vertices
        .iter()
        .map(|v| (dist(v) - mean).abs())
        .fold(0.0f64, f64::max);
    (mean, dev)
}

/// One-sided Hausdorff distance from the contour to a reference sphere:
/// `max over vertices of ||v - center| - r|` (exact for spheres).
pub fn hausdorff_distance(contour: &Contour, center: [f64; 3], r: f64) -> f64 {
    contour
        .vertices
        .iter()
        .map(|v| {
            let mut s = 0.0;
            for a in 0..contour.dim {
                let d = v[a] - center[a];
                s += d * d;
            }
            (s.sqrt() - r).abs()
        })
        .fold(0.0f64, f64::max)
}

/// CSV vertex list, one `x1,...,xn` row per vertex.
pub fn contour_csv(contour: &Contour) -> String {
    let mut out = String::new();
    for v in &contour.vertices {
        let cols: Vec<String> = (0..contour.dim).map(|a| format!("{:.16e}", v[a])).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, ScalarField};
    use crate::solver::Scheme;

    fn state_from(field: ScalarField) -> PhaseState {
        PhaseState {
            field,
            epsilon: 0.05,
            delta: None,
            t: 0.0,
            scheme: Scheme::Projection,
        }
    }

    #[test]
    fn sphere_radius_closed_form() {
        assert_eq!(sphere_radius_exact(0.5, 2, 0.0).unwrap(), 0.5);
        // extinction at r0^2 / (2(n-1))
        assert!(matches!(
            sphere_radius_exact(0.5, 2, 0.125),
            Err(McfError::Extinct { .. })
        ));
        assert!(sphere_radius_exact(0.5, 2, 0.1249).unwrap() > 0.0);
        // flat front in 1-D never moves
        assert_eq!(sphere_radius_exact(0.5, 1, 100.0).unwrap(), 0.5);
    }

    #[test]
    fn sphere_radius_matches_rk4_oracle() {
        // dr/dt = -(n-1)/r, n = 3, r0 = 1, integrated to t = 0.1
        let f = |r: f64| -2.0 / r;
        let mut r = 1.0;
        let h = 1e-5;
        let steps = (0.1 / h) as usize;
        for _ in 0..steps {
            let k1 = f(r);
            let k2 = f(r + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h * k2);
            let k4 = f(r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let exact = sphere_radius_exact(1.0, 3, 0.1).unwrap();
        assert!((exact - 0.6f64.sqrt()).abs() < 1e-12);
        assert!((r - exact).abs() < 1e-9, "rk4 {r} vs {exact}");
    }

    #[test]
    fn contour_of_circle_distance_field() {
        let g = Grid::new(2, 161, 2.0).unwrap();
        // phi = |x| - 0.5: zero set is the circle of radius 0.5
        let f = ScalarField::from_fn(g, |x| x[0].hypot(x[1]) - 0.5);
        let c = extract_zero_level(&state_from(f)).unwrap();
        assert!(!c.vertices.is_empty());
        // linear interpolation error bound h^2/(2 r) for this field
        let tol = g.h() * g.h() / (2.0 * 0.5) + 1e-12;
        assert!(hausdorff_distance(&c, [0.0; 3], 0.5) <= tol);
        let (mean, dev) = radius_estimate(&c, [0.0; 3]);
        assert!((mean - 0.5).abs() < tol);
        assert!(dev < 2.0 * tol);
    }

    #[test]
    fn saturated_field_has_no_contour() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |_| 1.0);
        assert_eq!(
            extract_zero_level(&state_from(f)).unwrap_err(),
            McfError::EmptyContour
        );
    }

    #[test]
    fn sign_flip_gives_same_vertex_set() {
        let g = Grid::new(2, 81, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].hypot(x[1]) - 0.37);
        let neg = ScalarField::from_fn(g, |x| -(x[0].hypot(x[1]) - 0.37));
        let a = extract_zero_level(&state_from(f)).unwrap();
        let b = extract_zero_level(&state_from(neg)).unwrap();
        assert_eq!(a.vertices.len(), b.vertices.len());
        for (va, vb) in a.vertices.iter().zip(&b.vertices) {
            for axis in 0..2 {
                assert!((va[axis] - vb[axis]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ellipse_radius_statistics() {
        let g = Grid::new(2, 161, 2.0).unwrap();
        // level set (x/a)^2 + (y/b)^2 = 1 with a = 0.6, b = 0.4
        let f = ScalarField::from_fn(g, |x| {
            (x[0] / 0.6).powi(2) + (x[1] / 0.4).powi(2) - 1.0
        });
        let c = extract_zero_level(&state_from(f)).unwrap();
        let (mean, dev) = radius_estimate(&c, [0.0; 3]);
        assert!(mean > 0.4 && mean < 0.6, "mean {mean}");
        assert!(dev >= 0.09, "deviation {dev}");
    }

    #[test]
    fn initial_profile_field_recovers_radius() {
        use crate::initial::{build_initial_field, Shape};
        use crate::potential::ProfileParam;
        let g = Grid::new(2, 161, 2.0).unwrap();
        let p = ProfileParam::new(0.05, None).unwrap();
        let f = build_initial_field(
            g,
            Shape::Sphere {
                center: [0.0; 3],
                radius: 0.5,
            },
            p,
        )
        .unwrap();
        let c = extract_zero_level(&state_from(f)).unwrap();
        let (mean, _) = radius_estimate(&c, [0.0; 3]);
        assert!((mean - 0.5).abs() < g.h(), "mean {mean}");
    }

    #[test]
    fn hausdorff_on_exact_and_offset_spheres() {
        let c = Contour {
            dim: 2,
            vertices: (0..64)
                .map(|k| {
                    let a = k as f64 * std::f64::consts::TAU / 64.0;
                    [0.3 * a.cos(), 0.3 * a.sin(), 0.0]
                })
                .collect(),
        };
        assert!(hausdorff_distance(&c, [0.0; 3], 0.3) < 1e-15);
        assert!((hausdorff_distance(&c, [0.0; 3], 0.25) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn contour_csv_shape() {
        let c = Contour {
            dim: 2,
            vertices: vec![[0.5, -0.25, 0.0]],
        };
        let csv = contour_csv(&c);
        assert_eq!(csv.lines().count(), 1);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 2);
    }
}
