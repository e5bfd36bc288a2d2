//! Weighted area of a hypersurface versus its area in the conformal metric
//! `a^σ δ`.
//!
//! With `σ = 2/(n-1)` the Riemannian area equals the weighted perimeter
//! `∫ a dH^{n-1}`. Both sides are evaluated here by separate code paths: the
//! weighted side integrates the scalar density `a^{(n-1)σ/2}` against
//! Euclidean measure, the metric side takes square roots of Gram
//! determinants of the pulled-back metric at its own quadrature points.

use std::sync::Arc;

use crate::error::SurfaceError;
use crate::weight::WeightFn;

type Chart = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;
type ChartJacobian = Arc<dyn Fn(f64, f64) -> ([f64; 3], [f64; 3]) + Send + Sync>;

/// A closed or open hypersurface in 2D or 3D.
#[derive(Clone)]
pub enum Surface {
    /// Curve in the plane through the given vertices.
    Polyline { points: Vec<[f64; 2]>, closed: bool },
    TriangleMesh {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
    },
    /// Parametrized surface over `[u0, u1] × [v0, v1]` with its partials,
    /// integrated by tensor Gauss-Legendre on `panels × panels` panels.
    Parametric {
        map: Chart,
        jacobian: ChartJacobian,
        u: (f64, f64),
        v: (f64, f64),
        panels: usize,
    },
}

impl std::fmt::Debug for Surface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Polyline { points, closed } => write!(f, "Polyline({} points, closed {closed})", points.len()),
            Self::TriangleMesh { vertices, triangles } => {
                write!(f, "TriangleMesh({} vertices, {} triangles)", vertices.len(), triangles.len())
            }
            Self::Parametric { panels, .. } => write!(f, "Parametric({panels}² panels)"),
        }
    }
}

impl Surface {
    /// Regular polygon inscribed in a circle.
    pub fn circle(center: [f64; 2], r: f64, segments: usize) -> Self {
        let points = (0..segments)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / segments as f64;
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            })
            .collect();
        Self::Polyline { points, closed: true }
    }

    /// Sphere in polar coordinates `(θ, φ) ∈ [0, π] × [0, 2π]`.
    pub fn sphere(center: [f64; 3], r: f64, panels: usize) -> Self {
        let map = move |t: f64, p: f64| {
            [
                center[0] + r * t.sin() * p.cos(),
                center[1] + r * t.sin() * p.sin(),
                center[2] + r * t.cos(),
            ]
        };
        let jac = move |t: f64, p: f64| {
            (
                [r * t.cos() * p.cos(), r * t.cos() * p.sin(), -r * t.sin()],
                [-r * t.sin() * p.sin(), r * t.sin() * p.cos(), 0.0],
            )
        };
        Self::Parametric {
            map: Arc::new(map),
            jacobian: Arc::new(jac),
            u: (0.0, std::f64::consts::PI),
            v: (0.0, std::f64::consts::TAU),
            panels,
        }
    }

    /// Icosphere: the icosahedron refined `levels` times, vertices projected
    /// onto the sphere.
    pub fn icosphere(center: [f64; 3], r: f64, levels: usize) -> Self {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<[f64; 3]> = vec![
            [-1.0, g, 0.0], [1.0, g, 0.0], [-1.0, -g, 0.0], [1.0, -g, 0.0],
            [0.0, -1.0, g], [0.0, 1.0, g], [0.0, -1.0, -g], [0.0, 1.0, -g],
            [g, 0.0, -1.0], [g, 0.0, 1.0], [-g, 0.0, -1.0], [-g, 0.0, 1.0],
        ];
        let mut tris: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        let unit = |v: [f64; 3]| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        verts.iter_mut().for_each(|v| *v = unit(*v));
        for _ in 0..levels {
            let mut mid = std::collections::HashMap::new();
            let mut next = Vec::with_capacity(tris.len() * 4);
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (verts[a], verts[b]);
                    verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    verts.len() - 1
                })
            };
            for &[a, b, c] in &tris {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            tris = next;
        }
        let vertices = verts
            .into_iter()
            .map(|v| [center[0] + r * v[0], center[1] + r * v[1], center[2] + r * v[2]])
            .collect();
        Self::TriangleMesh {
            vertices,
            triangles: tris,
        }
    }

    /// Ambient dimension `n`.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Polyline { .. } => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalMass {
    pub weighted_area: f64,
    pub riemannian_area: f64,
}

impl ConformalMass {
    pub fn relative_difference(&self) -> f64 {
        (self.weighted_area - self.riemannian_area).abs() / self.weighted_area.abs().max(f64::MIN_POSITIVE)
    }
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross_norm(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    dot(c, c).sqrt()
}

/// `√det(Jᵀ g J)` for the metric `g = λ δ` and tangent vectors `t`.
fn gram_root(lambda: f64, t: &[[f64; 3]]) -> f64 {
    match t.len() {
        1 => (lambda * dot(t[0], t[0])).sqrt(),
        _ => {
            let (g11, g12, g22) = (
                lambda * dot(t[0], t[0]),
                lambda * dot(t[0], t[1]),
                lambda * dot(t[1], t[1]),
            );
            (g11 * g22 - g12 * g12).max(0.0).sqrt()
        }
    }
}

/// Returns `(∫ a^{(n-1)σ/2} dH^{n-1}, area in the metric a^σ δ)`.
pub fn conformal_mass(surface: &Surface, a: &WeightFn, sigma: f64) -> Result<ConformalMass, SurfaceError> {
    if sigma == 0.0 {
        return Err(SurfaceError::ZeroExponent);
    }
    let n = surface.ambient_dim();
    let density = |x: [f64; 3]| a.eval(x).powf((n - 1) as f64 * sigma / 2.0);
    let metric = |x: [f64; 3]| a.eval(x).powf(sigma);
    let mut weighted = Vec::new();
    let mut riemannian = Vec::new();
    match surface {
        Surface::Polyline { points, closed } => {
            let m = if *closed { points.len() } else { points.len().saturating_sub(1) };
            for i in 0..m {
                let p = [points[i][0], points[i][1], 0.0];
                let j = (i + 1) % points.len();
                let q = [points[j][0], points[j][1], 0.0];
                let t = sub(q, p);
                let len = dot(t, t).sqrt();
                if !(len > 0.0) {
                    return Err(SurfaceError::DegenerateElement(i));
                }
                // Midpoint rule for the density; two-point Gauss for the metric.
                let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.0];
                weighted.push(len * density(mid));
                let g = 0.5 / 3f64.sqrt();
                let r: f64 = [0.5 - g, 0.5 + g]
                    .iter()
                    .map(|&s| 0.5 * gram_root(metric([p[0] + s * t[0], p[1] + s * t[1], 0.0]), &[t]))
                    .sum();
                riemannian.push(r);
            }
        }
        Surface::TriangleMesh { vertices, triangles } => {
            for (i, &[a0, a1, a2]) in triangles.iter().enumerate() {
                let (p, q, r) = (vertices[a0], vertices[a1], vertices[a2]);
                let (e1, e2) = (sub(q, p), sub(r, p));
                let area = 0.5 * cross_norm(e1, e2);
                if !(area > 0.0) {
                    return Err(SurfaceError::DegenerateElement(i));
                }
                let c = [
                    (p[0] + q[0] + r[0]) / 3.0,
                    (p[1] + q[1] + r[1]) / 3.0,
                    (p[2] + q[2] + r[2]) / 3.0,
                ];
                weighted.push(area * density(c));
                // Three-point edge-midpoint rule on the reference triangle.
                let pts = [[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
                let rm: f64 = pts
                    .iter()
                    .map(|&[s, t]| {
                        let x = [
                            p[0] + s * e1[0] + t * e2[0],
                            p[1] + s * e1[1] + t * e2[1],
                            p[2] + s * e1[2] + t * e2[2],
                        ];
                        gram_root(metric(x), &[e1, e2]) / 6.0
                    })
                    .sum();
                riemannian.push(rm);
            }
        }
        Surface::Parametric {
            map,
            jacobian,
            u,
            v,
            panels,
        } => {
            let k = (*panels).max(1);
            let (du, dv) = ((u.1 - u.0) / k as f64, (v.1 - v.0) / k as f64);
            for i in 0..k {
                for j in 0..k {
                    for &(xa, wa) in &GL4 {
                        for &(xb, wb) in &GL4 {
                            let s = u.0 + (i as f64 + 0.5 * (xa + 1.0)) * du;
                            let t = v.0 + (j as f64 + 0.5 * (xb + 1.0)) * dv;
                            let w = 0.25 * wa * wb * du * dv;
                            let x = map(s, t);
                            let (ju, jv) = jacobian(s, t);
                            weighted.push(w * density(x) * cross_norm(ju, jv));
                            riemannian.push(w * gram_root(metric(x), &[ju, jv]));
                        }
                    }
                }
            }
        }
    }
    Ok(ConformalMass {
        weighted_area: crate::geometry::compensated_sum(weighted),
        riemannian_area: crate::geometry::compensated_sum(riemannian),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_with_unit_weight() {
        let m = conformal_mass(&Surface::circle([0.0, 0.0], 0.5, 10_000), &WeightFn::Constant(1.0), 2.0).unwrap();
        assert!((m.weighted_area - PI).abs() <= 1e-6);
        assert!((m.riemannian_area - PI).abs() <= 1e-6);
    }

    #[test]
    fn zero_exponent_and_degenerate_elements() {
        let c = Surface::circle([0.0, 0.0], 1.0, 8);
        assert_eq!(
            conformal_mass(&c, &WeightFn::Constant(1.0), 0.0),
            Err(SurfaceError::ZeroExponent)
        );
        let bad = Surface::Polyline {
            points: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            closed: false,
        };
        assert_eq!(
            conformal_mass(&bad, &WeightFn::Constant(1.0), 2.0),
            Err(SurfaceError::DegenerateElement(0))
        );
    }

    #[test]
    fn icosphere_area_converges() {
        let s = Surface::icosphere([0.0; 3], 1.0, 5);
        let m = conformal_mass(&s, &WeightFn::Constant(4.0), 1.0).unwrap();
        assert!((m.weighted_area - 16.0 * PI).abs() / (16.0 * PI) <= 2e-3);
        assert!(m.relative_difference() <= 1e-12);
    }
}
