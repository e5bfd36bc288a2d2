//! Neighborhood stencils with Cauchy-Crofton edge weights.
//!
//! A curve of length `L` in the plane meets the family of lattice lines of
//! direction `e` about `L |sin φ| |e| / h` times; integrating over directions
//! recovers `L`. Discretizing the direction integral over the stencil's
//! families gives the per-family weight `h Δφ / (2 |e|)` in 2D and
//! `h² ΔΦ / (π |e|)` in 3D, with `Δφ` (resp. the solid angle `ΔΦ`) the share
//! of directions closest to `e`. The 4- and 6-neighborhoods use the face
//! measure `h^{n-1}` instead, which is exact for axis-aligned boundaries.

use crate::grid::Offset;

/// Supported neighborhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    N4,
    N8,
    N16,
    N6,
    N18,
    N26,
}

impl Neighborhood {
    pub fn from_size(dim: usize, size: usize) -> Option<Self> {
        match (dim, size) {
            (2, 4) => Some(Self::N4),
            (2, 8) => Some(Self::N8),
            (2, 16) => Some(Self::N16),
            (3, 6) => Some(Self::N6),
            (3, 18) => Some(Self::N18),
            (3, 26) => Some(Self::N26),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::N4 | Self::N8 | Self::N16 => 2,
            _ => 3,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Self::N4 => 4,
            Self::N8 => 8,
            Self::N16 => 16,
            Self::N6 => 6,
            Self::N18 => 18,
            Self::N26 => 26,
        }
    }

    /// One representative per `±e` pair, lexicographically positive.
    fn families(self) -> Vec<Offset> {
        let mut v: Vec<Offset> = match self {
            Self::N4 => vec![[1, 0, 0], [0, 1, 0]],
            Self::N8 => vec![[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, -1, 0]],
            Self::N16 => vec![
                [1, 0, 0],
                [0, 1, 0],
                [1, 1, 0],
                [1, -1, 0],
                [2, 1, 0],
                [1, 2, 0],
                [2, -1, 0],
                [1, -2, 0],
            ],
            Self::N6 | Self::N18 | Self::N26 => {
                let max_l1 = match self {
                    Self::N6 => 1,
                    Self::N18 => 2,
                    _ => 3,
                };
                let mut out = Vec::new();
                for k in -1..=1 {
                    for j in -1..=1 {
                        for i in -1..=1 {
                            let o: Offset = [i, j, k];
                            let l1 = i.abs() + j.abs() + k.abs();
                            if l1 == 0 || l1 > max_l1 {
                                continue;
                            }
                            if is_positive(o) {
                                out.push(o);
                            }
                        }
                    }
                }
                out
            }
        };
        v.sort();
        v
    }
}

fn is_positive(o: Offset) -> bool {
    for &c in &o {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

fn norm(o: Offset) -> f64 {
    ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt()
}

/// Half-stencil of offsets (one per `±e` pair) with their boundary-measure weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CutStencil {
    kind: Neighborhood,
    h: f64,
    offsets: Vec<Offset>,
    weights: Vec<f64>,
}

impl CutStencil {
    pub fn new(kind: Neighborhood, h: f64) -> Self {
        let offsets = kind.families();
        let unit = match kind {
            Neighborhood::N4 | Neighborhood::N6 => vec![1.0; offsets.len()],
            Neighborhood::N8 | Neighborhood::N16 => crofton_2d(&offsets),
            _ => crofton_3d(&offsets),
        };
        let scale = h.powi(kind.dim() as i32 - 1);
        Self {
            kind,
            h,
            offsets,
            weights: unit.iter().map(|w| w * scale).collect(),
        }
    }

    pub fn kind(&self) -> Neighborhood {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Half-stencil offsets, one per `±e` pair.
    pub fn half_offsets(&self) -> &[Offset] {
        &self.offsets
    }

    /// Weight of each half-stencil family (length or area units).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The full symmetric stencil with weights.
    pub fn offsets(&self) -> Vec<(Offset, f64)> {
        let mut v = Vec::with_capacity(2 * self.offsets.len());
        for (o, &w) in self.offsets.iter().zip(&self.weights) {
            v.push((*o, w));
            v.push(([-o[0], -o[1], -o[2]], w));
        }
        v
    }

    /// Largest coordinate reach of any offset.
    pub fn radius(&self) -> i32 {
        self.offsets
            .iter()
            .flat_map(|o| o.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(1)
    }
}

/// `Δφ / (2|e|)` with `Δφ` half the angular gap to each neighbor direction on `[0, π)`.
fn crofton_2d(offsets: &[Offset]) -> Vec<f64> {
    use std::f64::consts::PI;
    let angle = |o: &Offset| {
        let a = (o[1] as f64).atan2(o[0] as f64);
        if a < 0.0 {
            a + PI
        } else {
            a
        }
    };
    let mut order: Vec<usize> = (0..offsets.len()).collect();
    order.sort_by(|&a, &b| angle(&offsets[a]).total_cmp(&angle(&offsets[b])));
    let m = order.len();
    let mut w = vec![0.0; m];
    for (pos, &k) in order.iter().enumerate() {
        let prev = angle(&offsets[order[(pos + m - 1) % m]]);
        let next = angle(&offsets[order[(pos + 1) % m]]);
        let cur = angle(&offsets[k]);
        let gap_prev = (cur - prev).rem_euclid(PI);
        let gap_next = (next - cur).rem_euclid(PI);
        let dphi = 0.5 * (gap_prev + gap_next);
        w[k] = dphi / (2.0 * norm(offsets[k]));
    }
    w
}

/// `ΔΦ / (π|e|)` with `ΔΦ` the solid angle of directions nearest `±e` on a
/// hemisphere, measured on a Fibonacci sphere and symmetrized over the cube group.
fn crofton_3d(offsets: &[Offset]) -> Vec<f64> {
    use std::f64::consts::PI;
    const SAMPLES: usize = 400_000;
    let dirs: Vec<[f64; 3]> = offsets
        .iter()
        .map(|o| {
            let n = norm(*o);
            [o[0] as f64 / n, o[1] as f64 / n, o[2] as f64 / n]
        })
        .collect();
    let mut counts = vec![0usize; offsets.len()];
    let golden = PI * (3.0 - 5f64.sqrt());
    for s in 0..SAMPLES {
        let z = 1.0 - (2.0 * s as f64 + 1.0) / SAMPLES as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * s as f64;
        let p = [r * th.cos(), r * th.sin(), z];
        let mut best = 0;
        let mut bv = -1.0;
        for (k, d) in dirs.iter().enumerate() {
            let v = (p[0] * d[0] + p[1] * d[1] + p[2] * d[2]).abs();
            if v > bv {
                bv = v;
                best = k;
            }
        }
        counts[best] += 1;
    }
    // Offsets equivalent under coordinate permutations and sign flips share a weight.
    let class = |o: &Offset| {
        let mut a = [o[0].abs(), o[1].abs(), o[2].abs()];
        a.sort();
        a
    };
    let mut omega = vec![0.0; offsets.len()];
    for k in 0..offsets.len() {
        let members: Vec<usize> = (0..offsets.len())
            .filter(|&j| class(&offsets[j]) == class(&offsets[k]))
            .collect();
        let mean = members.iter().map(|&j| counts[j] as f64).sum::<f64>() / members.len() as f64;
        omega[k] = 2.0 * PI * mean / SAMPLES as f64;
    }
    omega
        .iter()
        .zip(offsets)
        .map(|(dw, o)| dw / (PI * norm(*o)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn four_neighborhood_is_face_measure() {
        let s = CutStencil::new(Neighborhood::N4, 0.25);
        assert_eq!(s.weights(), &[0.25, 0.25]);
        let s6 = CutStencil::new(Neighborhood::N6, 0.5);
        assert!(s6.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn symmetric_under_negation() {
        for k in [
            Neighborhood::N8,
            Neighborhood::N16,
            Neighborhood::N18,
            Neighborhood::N26,
        ] {
            let s = CutStencil::new(k, 1.0);
            let full = s.offsets();
            assert_eq!(full.len(), k.size());
            for (o, w) in &full {
                let neg = [-o[0], -o[1], -o[2]];
                assert!(full.iter().any(|(p, v)| *p == neg && v == w));
                assert!(*w > 0.0);
            }
        }
    }

    #[test]
    fn crofton_angles_cover_half_circle() {
        // Σ 2|e| w = Σ Δφ = π.
        let s = CutStencil::new(Neighborhood::N16, 1.0);
        let total: f64 = s
            .half_offsets()
            .iter()
            .zip(s.weights())
            .map(|(o, w)| 2.0 * norm(*o) * w)
            .sum();
        assert!((total - PI).abs() < 1e-12);
        let s8 = CutStencil::new(Neighborhood::N8, 1.0);
        assert!((s8.weights()[0] - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn crofton_solid_angles_cover_hemisphere() {
        for k in [Neighborhood::N18, Neighborhood::N26] {
            let s = CutStencil::new(k, 1.0);
            let total: f64 = s
                .half_offsets()
                .iter()
                .zip(s.weights())
                .map(|(o, w)| PI * norm(*o) * w)
                .sum();
            assert!((total - 2.0 * PI).abs() < 1e-9, "{k:?}: {total}");
        }
    }
}
