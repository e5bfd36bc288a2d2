//! The discrete cut metric shared by perimeter, total variation and the
//! minimal-cut solver.
//!
//! Every stencil edge `(p, p + e)` inside the box carries the capacity
//! `a(mid) · w_e`, quantized to an integer multiple of a power-of-two quantum.
//! All perimeters are exact integer sums of these capacities, so values
//! computed along different routes (max-flow, enumeration, thresholding)
//! compare bit-for-bit.

use crate::domain::DiscreteDomain;
use crate::error::{CutError, DomainError};
use crate::field::{GridKey, IndicatorSet};
use crate::grid::Grid;
use crate::stencil::CutStencil;
use crate::weight::WeightField;

/// Capacity totals are kept below this so pin capacities stay exact in f64.
const MAX_TOTAL_BITS: i32 = 52;
const MAX_QUANTUM_BITS: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub p: u32,
    pub q: u32,
    pub family: u8,
    pub cap: i64,
}

#[derive(Debug, Clone)]
pub struct CutMetric {
    grid: Grid,
    edges: Vec<Edge>,
    quantum: f64,
    total: i64,
    incident_start: Vec<u32>,
    incident: Vec<u32>,
    radius: i32,
}

impl CutMetric {
    pub fn new(dom: &DiscreteDomain, w: &WeightField, st: &CutStencil) -> Result<Self, CutError> {
        let grid = dom.grid().clone();
        if st.dim() != grid.dim() {
            return Err(DomainError::UnsupportedDimension(st.dim()).into());
        }
        if w.len() != grid.len() {
            return Err(DomainError::DomainMismatch.into());
        }
        let mut raw = Vec::new();
        let mut total_real = 0.0;
        for p in 0..grid.len() {
            let xp = grid.center(p);
            for (k, (&o, &cw)) in st.half_offsets().iter().zip(st.weights()).enumerate() {
                let Some(q) = grid.neighbor(p, o) else {
                    continue;
                };
                let xq = grid.center(q);
                let mid = [
                    0.5 * (xp[0] + xq[0]),
                    0.5 * (xp[1] + xq[1]),
                    0.5 * (xp[2] + xq[2]),
                ];
                let a = w.edge(p, q, mid);
                if !(a.is_finite() && a > 0.0) {
                    return Err(DomainError::Degenerate {
                        cell: p,
                        value: a,
                        alpha: w.alpha(),
                    }
                    .into());
                }
                let c = a * cw;
                total_real += c;
                raw.push((p as u32, q as u32, k as u8, c));
            }
        }
        if !(total_real.is_finite() && total_real > 0.0) {
            return Err(CutError::CapacityOverflow {
                edge: 0,
                value: total_real,
            });
        }
        let bits = (MAX_TOTAL_BITS - total_real.log2().ceil() as i32 - 1).min(MAX_QUANTUM_BITS);
        let scale = 2f64.powi(bits);
        let mut edges = Vec::with_capacity(raw.len());
        let mut total: i64 = 0;
        for (i, &(p, q, family, c)) in raw.iter().enumerate() {
            let cap = (c * scale).round();
            if cap < 1.0 || cap >= 2f64.powi(MAX_TOTAL_BITS) {
                return Err(CutError::CapacityOverflow { edge: i, value: c });
            }
            let cap = cap as i64;
            total = total
                .checked_add(cap)
                .ok_or(CutError::CapacityOverflow { edge: i, value: c })?;
            edges.push(Edge { p, q, family, cap });
        }
        if total >= 1i64 << MAX_TOTAL_BITS {
            return Err(CutError::CapacityOverflow {
                edge: edges.len(),
                value: total_real,
            });
        }
        let mut degree = vec![0u32; grid.len() + 1];
        for e in &edges {
            degree[e.p as usize + 1] += 1;
            degree[e.q as usize + 1] += 1;
        }
        for i in 0..grid.len() {
            degree[i + 1] += degree[i];
        }
        let mut fill = degree.clone();
        let mut incident = vec![0u32; 2 * edges.len()];
        for (i, e) in edges.iter().enumerate() {
            for c in [e.p, e.q] {
                incident[fill[c as usize] as usize] = i as u32;
                fill[c as usize] += 1;
            }
        }
        Ok(Self {
            grid,
            edges,
            quantum: 1.0 / scale,
            total,
            incident_start: degree,
            incident,
            radius: st.radius(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn key(&self) -> GridKey {
        (&self.grid).into()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Real value of one capacity unit.
    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// Sum of all finite capacities, in units.
    pub fn total_units(&self) -> i64 {
        self.total
    }

    /// Capacity of pin arcs: strictly more than any finite cut.
    pub fn pin_units(&self) -> i64 {
        self.total + 1
    }

    pub fn stencil_radius(&self) -> i32 {
        self.radius
    }

    #[inline]
    pub fn to_real(&self, units: i64) -> f64 {
        units as f64 * self.quantum
    }

    #[inline]
    pub fn capacity(&self, e: &Edge) -> f64 {
        e.cap as f64 * self.quantum
    }

    /// Edge ids touching cell `c`.
    pub fn incident(&self, c: usize) -> &[u32] {
        let (a, b) = (
            self.incident_start[c] as usize,
            self.incident_start[c + 1] as usize,
        );
        &self.incident[a..b]
    }

    /// Other endpoint of edge `e` seen from `c`.
    #[inline]
    pub fn other(&self, e: &Edge, c: usize) -> usize {
        if e.p as usize == c {
            e.q as usize
        } else {
            e.p as usize
        }
    }

    /// Edges with at least one endpoint in the region (all edges when `None`).
    pub fn region_edges<'a>(
        &'a self,
        region: Option<&'a [bool]>,
    ) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| match region {
            None => true,
            Some(r) => r[e.p as usize] || r[e.q as usize],
        })
    }

    /// Cut capacity of `set` over edges touching `region`, in units.
    pub fn cut_units(&self, set: &IndicatorSet, region: Option<&[bool]>) -> i64 {
        let s = set.as_slice();
        self.region_edges(region)
            .filter(|e| s[e.p as usize] != s[e.q as usize])
            .map(|e| e.cap)
            .sum()
    }
}
