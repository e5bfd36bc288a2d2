//! The inhomogeneous weighted minimal surface equation on graph patches.
//!
//! A patch is a uniform grid of nodes over an interval or a rectangle of
//! `ℝ^{n-1}`, carrying heights `u`. Heights are interpolated by continuous
//! piecewise-linear elements: segments in 1D and triangles split along the
//! lower-left to upper-right diagonal in 2D. The weighted area
//!
//! `I(u) = Σ_e |e| a(x_e, u_e) √(1 + |∇u|²)`
//!
//! is sampled at element centroids. The residual at a node is `∂I/∂u_i`
//! divided by the nodal measure `h^{n-1}`, which expands to the flux
//! divergence plus the source term of the equation. The weak form and the
//! Newton Jacobian are the first and second variations of the same sum, so
//! summation by parts holds exactly.

use std::sync::Arc;

use crate::error::MseError;

/// Height-dependent weight `a(x', s)` with derivatives in `s`.
pub trait GraphWeight: Send + Sync {
    fn value(&self, x: &[f64], s: f64) -> f64;

    fn ds(&self, x: &[f64], s: f64) -> f64 {
        let e = DERIVATIVE_STEP;
        (self.value(x, s + e) - self.value(x, s - e)) / (2.0 * e)
    }

    fn dss(&self, x: &[f64], s: f64) -> f64 {
        let e = DERIVATIVE_STEP;
        (self.value(x, s + e) - 2.0 * self.value(x, s) + self.value(x, s - e)) / (e * e)
    }
}

/// Step of the central differences used when no analytic derivative is given.
pub const DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
pub struct ConstantWeight(pub f64);

impl GraphWeight for ConstantWeight {
    fn value(&self, _: &[f64], _: f64) -> f64 {
        self.0
    }
    fn ds(&self, _: &[f64], _: f64) -> f64 {
        0.0
    }
    fn dss(&self, _: &[f64], _: f64) -> f64 {
        0.0
    }
}

/// `a(x', s) = scale · e^{rate·s}`.
#[derive(Debug, Clone, Copy)]
pub struct ExpHeightWeight {
    pub scale: f64,
    pub rate: f64,
}

impl GraphWeight for ExpHeightWeight {
    fn value(&self, _: &[f64], s: f64) -> f64 {
        self.scale * (self.rate * s).exp()
    }
    fn ds(&self, x: &[f64], s: f64) -> f64 {
        self.rate * self.value(x, s)
    }
    fn dss(&self, x: &[f64], s: f64) -> f64 {
        self.rate * self.rate * self.value(x, s)
    }
}

/// Weight depending on the base point only.
pub struct SpatialWeight<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> GraphWeight for SpatialWeight<F> {
    fn value(&self, x: &[f64], _: f64) -> f64 {
        (self.0)(x)
    }
    fn ds(&self, _: &[f64], _: f64) -> f64 {
        0.0
    }
    fn dss(&self, _: &[f64], _: f64) -> f64 {
        0.0
    }
}

/// General weight; derivatives by central differences.
pub struct NumericWeight<F>(pub F);

impl<F: Fn(&[f64], f64) -> f64 + Send + Sync> GraphWeight for NumericWeight<F> {
    fn value(&self, x: &[f64], s: f64) -> f64 {
        (self.0)(x, s)
    }
}

/// Node grid of a patch: `cells[a]` intervals of width `h` along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    dim: usize,
    cells: [usize; 2],
    origin: [f64; 2],
    h: f64,
}

impl PatchGeometry {
    pub fn interval(x0: f64, len: f64, cells: usize) -> Result<Self, MseError> {
        if cells < 2 || !(len > 0.0) {
            return Err(MseError::EmptyPatch);
        }
        Ok(Self {
            dim: 1,
            cells: [cells, 0],
            origin: [x0, 0.0],
            h: len / cells as f64,
        })
    }

    /// Rectangle with square elements of side `h`.
    pub fn rectangle(origin: [f64; 2], h: f64, cells: [usize; 2]) -> Result<Self, MseError> {
        if cells[0] < 2 || cells[1] < 2 || !(h > 0.0) {
            return Err(MseError::EmptyPatch);
        }
        Ok(Self {
            dim: 2,
            cells,
            origin,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    fn nx(&self) -> usize {
        self.cells[0] + 1
    }

    pub fn node_count(&self) -> usize {
        match self.dim {
            1 => self.cells[0] + 1,
            _ => (self.cells[0] + 1) * (self.cells[1] + 1),
        }
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    pub fn node_coords(&self, node: usize) -> (usize, usize) {
        (node % self.nx(), node / self.nx())
    }

    pub fn node_position(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_coords(node);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let (i, j) = self.node_coords(node);
        i == 0 || i == self.cells[0] || (self.dim == 2 && (j == 0 || j == self.cells[1]))
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&n| !self.is_boundary(n)).collect()
    }

    /// Nodal measure `h^{n-1}`.
    pub fn node_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Nodes within one grid step of `node` in every axis, `node` included.
    pub fn neighborhood(&self, node: usize) -> Vec<usize> {
        let (i, j) = self.node_coords(node);
        let jr = if self.dim == 2 { -1..=1 } else { 0..=0 };
        let mut out = Vec::new();
        for dj in jr {
            for di in -1i64..=1 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                let ymax = if self.dim == 2 { self.cells[1] as i64 } else { 0 };
                if a >= 0 && a <= self.cells[0] as i64 && b >= 0 && b <= ymax {
                    out.push(self.node_index(a as usize, b as usize));
                }
            }
        }
        out
    }

    fn elements(&self) -> Vec<Element> {
        let h = self.h;
        let mut out = Vec::new();
        match self.dim {
            1 => {
                for i in 0..self.cells[0] {
                    let x = self.origin[0] + (i as f64 + 0.5) * h;
                    out.push(Element {
                        nodes: [i, i + 1, 0],
                        nv: 2,
                        grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0; 2]],
                        centroid: [x, 0.0],
                        area: h,
                    });
                }
            }
            _ => {
                for j in 0..self.cells[1] {
                    for i in 0..self.cells[0] {
                        let n00 = self.node_index(i, j);
                        let n10 = self.node_index(i + 1, j);
                        let n01 = self.node_index(i, j + 1);
                        let n11 = self.node_index(i + 1, j + 1);
                        let x = self.origin[0] + i as f64 * h;
                        let y = self.origin[1] + j as f64 * h;
                        out.push(Element {
                            nodes: [n00, n10, n11],
                            nv: 3,
                            grads: [[-1.0 / h, 0.0], [1.0 / h, -1.0 / h], [0.0, 1.0 / h]],
                            centroid: [x + 2.0 * h / 3.0, y + h / 3.0],
                            area: 0.5 * h * h,
                        });
                        out.push(Element {
                            nodes: [n00, n11, n01],
                            nv: 3,
                            grads: [[0.0, -1.0 / h], [1.0 / h, 0.0], [-1.0 / h, 1.0 / h]],
                            centroid: [x + h / 3.0, y + 2.0 * h / 3.0],
                            area: 0.5 * h * h,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Element {
    nodes: [usize; 3],
    nv: usize,
    grads: [[f64; 2]; 3],
    centroid: [f64; 2],
    area: f64,
}

impl Element {
    fn nodes(&self) -> &[usize] {
        &self.nodes[..self.nv]
    }

    fn height(&self, u: &[f64]) -> f64 {
        self.nodes().iter().map(|&n| u[n]).sum::<f64>() / self.nv as f64
    }

    fn slope(&self, u: &[f64]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (k, &n) in self.nodes().iter().enumerate() {
            p[0] += self.grads[k][0] * u[n];
            p[1] += self.grads[k][1] * u[n];
        }
        p
    }

    fn x(&self, dim: usize) -> &[f64] {
        &self.centroid[..dim]
    }
}

/// Height field over a patch together with its weight.
#[derive(Clone)]
pub struct GraphPatch {
    geom: PatchGeometry,
    u: Vec<f64>,
    weight: Arc<dyn GraphWeight>,
}

impl std::fmt::Debug for GraphPatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphPatch")
            .field("geom", &self.geom)
            .field("u", &self.u)
            .finish_non_exhaustive()
    }
}

impl GraphPatch {
    /// Checks that heights are finite and the weight is positive at every node.
    pub fn new(geom: PatchGeometry, u: Vec<f64>, weight: Arc<dyn GraphWeight>) -> Result<Self, MseError> {
        if u.len() != geom.node_count() {
            return Err(MseError::HypothesisViolated(format!(
                "{} heights for {} nodes",
                u.len(),
                geom.node_count()
            )));
        }
        for (n, &v) in u.iter().enumerate() {
            if !v.is_finite() {
                return Err(MseError::HypothesisViolated(format!("height at node {n} is {v}")));
            }
            let a = weight.value(&geom.node_position(n)[..geom.dim], v);
            if !(a > 0.0) {
                return Err(MseError::Degenerate {
                    node: n,
                    value: a,
                    alpha: 0.0,
                });
            }
        }
        Ok(Self { geom, u, weight })
    }

    pub fn from_fn(
        geom: PatchGeometry,
        f: impl Fn([f64; 2]) -> f64,
        weight: Arc<dyn GraphWeight>,
    ) -> Result<Self, MseError> {
        let u = (0..geom.node_count()).map(|n| f(geom.node_position(n))).collect();
        Self::new(geom, u, weight)
    }

    pub fn geometry(&self) -> &PatchGeometry {
        &self.geom
    }

    pub fn heights(&self) -> &[f64] {
        &self.u
    }

    pub fn weight(&self) -> &Arc<dyn GraphWeight> {
        &self.weight
    }

    /// Same patch with different heights.
    pub fn with_heights(&self, u: Vec<f64>) -> Result<Self, MseError> {
        Self::new(self.geom, u, self.weight.clone())
    }

    /// Smallest weight sampled at nodes and element centroids.
    pub fn non_degeneracy(&self) -> f64 {
        let d = self.geom.dim;
        let nodes = (0..self.geom.node_count())
            .map(|n| self.weight.value(&self.geom.node_position(n)[..d], self.u[n]));
        let elems = self
            .geom
            .elements()
            .into_iter()
            .map(|e| self.weight.value(e.x(d), e.height(&self.u)));
        nodes.chain(elems).fold(f64::INFINITY, f64::min)
    }

    /// Largest element slope `|∇u|`.
    pub fn max_slope(&self) -> f64 {
        self.geom
            .elements()
            .iter()
            .map(|e| norm(e.slope(&self.u)))
            .fold(0.0, f64::max)
    }
}

#[inline]
fn norm(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Weighted graph area `Σ_e |e| a(x_e, u_e) √(1 + |∇u|²)`.
pub fn area_functional(p: &GraphPatch) -> f64 {
    let d = p.geom.dim;
    p.geom
        .elements()
        .iter()
        .map(|e| {
            let s = e.slope(&p.u);
            e.area * p.weight.value(e.x(d), e.height(&p.u)) * (1.0 + s[0] * s[0] + s[1] * s[1]).sqrt()
        })
        .sum()
}

/// `∂I/∂u_i` at every node, boundary nodes included.
fn first_variation(p: &GraphPatch) -> Vec<f64> {
    let d = p.geom.dim;
    let mut g = vec![0.0; p.geom.node_count()];
    for e in p.geom.elements() {
        let s = e.slope(&p.u);
        let uc = e.height(&p.u);
        let root = (1.0 + s[0] * s[0] + s[1] * s[1]).sqrt();
        let a = p.weight.value(e.x(d), uc);
        let src = p.weight.ds(e.x(d), uc) * root / e.nv as f64;
        let flux = [a * s[0] / root, a * s[1] / root];
        for (k, &n) in e.nodes().iter().enumerate() {
            g[n] += e.area * (flux[0] * e.grads[k][0] + flux[1] * e.grads[k][1] + src);
        }
    }
    g
}

/// Residual of the equation at every node; zero on boundary nodes.
pub fn mse_residual(p: &GraphPatch) -> Vec<f64> {
    let m = p.geom.node_measure();
    let mut r = first_variation(p);
    for (n, v) in r.iter_mut().enumerate() {
        *v = if p.geom.is_boundary(n) { 0.0 } else { *v / m };
    }
    r
}

/// `∫ {a ∇u·∇φ / √(1+|∇u|²) + ∂_s a √(1+|∇u|²) φ}` for a nodal test field
/// vanishing on the patch boundary. Positive values on `φ ≥ 0` indicate a
/// supersolution.
pub fn weak_form(p: &GraphPatch, phi: &[f64]) -> Result<f64, MseError> {
    if phi.len() != p.geom.node_count() {
        return Err(MseError::HypothesisViolated("test field has wrong length".into()));
    }
    if let Some(n) = (0..phi.len()).find(|&n| p.geom.is_boundary(n) && phi[n] != 0.0) {
        return Err(MseError::TestFunctionNotCompactlySupported(n));
    }
    let d = p.geom.dim;
    let mut sum = 0.0;
    for e in p.geom.elements() {
        let s = e.slope(&p.u);
        let uc = e.height(&p.u);
        let root = (1.0 + s[0] * s[0] + s[1] * s[1]).sqrt();
        let a = p.weight.value(e.x(d), uc);
        let dphi = e.slope(phi);
        let phic = e.height(phi);
        sum += e.area * (a * (s[0] * dphi[0] + s[1] * dphi[1]) / root + p.weight.ds(e.x(d), uc) * root * phic);
    }
    Ok(sum)
}

/// Eight-point Gauss-Legendre rule on `[0, 1]`.
const GAUSS8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn gauss8_unit() -> impl Iterator<Item = (f64, f64)> {
    GAUSS8.iter().flat_map(|&(x, w)| {
        [(0.5 * (1.0 - x), 0.5 * w), (0.5 * (1.0 + x), 0.5 * w)]
    })
}

/// Per-element coefficients of the linear operator
/// `Lw = ∂_i(a^{ij} ∂_j w + b^i w) + c^j ∂_j w + d w`, averaged along
/// `u^t = u0 + t(u1 - u0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCoefficients {
    geom: PatchGeometry,
    pub a: Vec<[[f64; 2]; 2]>,
    pub b: Vec<[f64; 2]>,
    pub c: Vec<[f64; 2]>,
    pub d: Vec<f64>,
    /// `sup_t |∇u^t|` over the patch.
    pub gradient_bound: f64,
}

pub fn homotopy_coefficients(u0: &GraphPatch, u1: &GraphPatch) -> Result<LinearizedCoefficients, MseError> {
    if u0.geom != u1.geom {
        return Err(MseError::HypothesisViolated("patch geometries differ".into()));
    }
    let geom = u0.geom;
    let dim = geom.dim;
    let w = &u0.weight;
    let elems = geom.elements();
    let mut out = LinearizedCoefficients {
        geom,
        a: Vec::with_capacity(elems.len()),
        b: Vec::with_capacity(elems.len()),
        c: Vec::with_capacity(elems.len()),
        d: Vec::with_capacity(elems.len()),
        gradient_bound: 0.0,
    };
    for e in &elems {
        let (h0, h1) = (e.height(&u0.u), e.height(&u1.u));
        let (p0, p1) = (e.slope(&u0.u), e.slope(&u1.u));
        // |∇u^t| is convex in t, so its maximum sits at an endpoint.
        out.gradient_bound = out.gradient_bound.max(norm(p0)).max(norm(p1));
        let mut a = [[0.0; 2]; 2];
        let mut b = [0.0; 2];
        let mut d = 0.0;
        for (t, wt) in gauss8_unit() {
            let s = h0 + t * (h1 - h0);
            let p = [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
            let q = 1.0 + p[0] * p[0] + p[1] * p[1];
            let root = q.sqrt();
            let av = w.value(e.x(dim), s);
            let a_s = w.ds(e.x(dim), s);
            let a_ss = w.dss(e.x(dim), s);
            for i in 0..dim {
                for j in 0..dim {
                    let delta = if i == j { q } else { 0.0 };
                    a[i][j] += wt * av * (delta - p[i] * p[j]) / (q * root);
                }
                b[i] += wt * a_s * p[i] / root;
            }
            d -= wt * a_ss * root;
        }
        // Symmetric by construction; enforce bitwise equality.
        a[1][0] = a[0][1];
        out.a.push(a);
        out.b.push(b);
        out.c.push([-b[0], -b[1]]);
        out.d.push(d);
    }
    Ok(out)
}

impl LinearizedCoefficients {
    /// `𝔏(w, φ) = Σ_e |e| {(a^{ij}∂_j w + b^i w)∂_i φ - (c^j ∂_j w + d w) φ}`.
    pub fn bilinear(&self, w: &[f64], phi: &[f64]) -> f64 {
        let dim = self.geom.dim;
        self.geom
            .elements()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let (gw, wc) = (e.slope(w), e.height(w));
                let (gp, pc) = (e.slope(phi), e.height(phi));
                let mut flux = 0.0;
                let mut drift = 0.0;
                for i in 0..dim {
                    let mut f = self.b[k][i] * wc;
                    for j in 0..dim {
                        f += self.a[k][i][j] * gw[j];
                    }
                    flux += f * gp[i];
                    drift += self.c[k][i] * gw[i];
                }
                e.area * (flux - (drift + self.d[k] * wc) * pc)
            })
            .sum()
    }

    /// Interior-node matrix of the bilinear form divided by the nodal measure.
    fn assemble(&self) -> BandMatrix {
        let geom = &self.geom;
        let (map, count) = unknown_map(geom);
        let bw = if geom.dim == 1 { 1 } else { geom.cells[0] };
        let mut m = BandMatrix::zeros(count, bw);
        let scale = 1.0 / geom.node_measure();
        let dim = geom.dim;
        for (k, e) in geom.elements().iter().enumerate() {
            let nv = e.nv as f64;
            for (r, &nr) in e.nodes().iter().enumerate() {
                let Some(ir) = map[nr] else { continue };
                for (c, &nc) in e.nodes().iter().enumerate() {
                    let Some(ic) = map[nc] else { continue };
                    let (gr, gc) = (e.grads[r], e.grads[c]);
                    let mut v = 0.0;
                    for i in 0..dim {
                        for j in 0..dim {
                            v += gr[i] * self.a[k][i][j] * gc[j];
                        }
                        v += self.b[k][i] * gr[i] / nv - self.c[k][i] * gc[i] / nv;
                    }
                    v -= self.d[k] / (nv * nv);
                    m.add(ir, ic, e.area * v * scale);
                }
            }
        }
        m
    }
}

fn unknown_map(geom: &PatchGeometry) -> (Vec<Option<usize>>, usize) {
    let mut map = vec![None; geom.node_count()];
    let mut k = 0;
    for (n, slot) in map.iter_mut().enumerate() {
        if !geom.is_boundary(n) {
            *slot = Some(k);
            k += 1;
        }
    }
    (map, k)
}

/// Square band matrix with half-bandwidth `bw`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (i.abs_diff(j) <= self.bw).then(|| i * (2 * self.bw + 1) + (j + self.bw - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    /// Solves `A x = rhs` by band LU without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, MseError> {
        let (n, bw) = (self.n, self.bw);
        let mut a = self.clone();
        let mut x = rhs.to_vec();
        let scale = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max);
        for k in 0..n {
            let piv = a.get(k, k);
            if !(piv.abs() > 1e-14 * scale) {
                return Err(MseError::SingularJacobian { row: k, pivot: piv });
            }
            for i in k + 1..(k + bw + 1).min(n) {
                let f = a.get(i, k) / piv;
                if f == 0.0 {
                    continue;
                }
                for j in k..(k + bw + 1).min(n) {
                    let v = a.get(k, j);
                    if v != 0.0 {
                        a.add(i, j, -f * v);
                    }
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..(k + bw + 1).min(n) {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        Ok(x)
    }
}

/// Newton Jacobian of [`mse_residual`] on interior nodes, assembled from the
/// coefficients with `u0 = u1 = u`.
pub fn newton_jacobian(p: &GraphPatch) -> Result<BandMatrix, MseError> {
    Ok(homotopy_coefficients(p, p)?.assemble())
}

/// Largest entry difference between [`newton_jacobian`] and central
/// differences of the residual, relative to the largest Jacobian entry.
pub fn jacobian_fd_error(p: &GraphPatch, eps: f64) -> Result<f64, MseError> {
    let jac = newton_jacobian(p)?;
    let (map, _) = unknown_map(&p.geom);
    let interior = p.geom.interior_nodes();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &nc in &interior {
        let ic = map[nc].expect("interior");
        let mut up = p.u.clone();
        up[nc] += eps;
        let mut dn = p.u.clone();
        dn[nc] -= eps;
        let rp = mse_residual(&p.with_heights(up)?);
        let rm = mse_residual(&p.with_heights(dn)?);
        for &nr in &interior {
            let ir = map[nr].expect("interior");
            let fd = (rp[nr] - rm[nr]) / (2.0 * eps);
            let j = jac.get(ir, ic);
            worst = worst.max((fd - j).abs());
            scale = scale.max(j.abs());
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams {
    /// Target for the residual max-norm.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    /// Residual max-norm after every accepted step.
    pub history: Vec<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Initial heights: linear in 1D, the bilinear Coons blend of the four edges
/// in 2D (exact for affine data).
fn initial_guess(geom: &PatchGeometry, bv: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
    (0..geom.node_count())
        .map(|n| {
            if geom.is_boundary(n) {
                return bv(geom.node_position(n));
            }
            let (i, j) = geom.node_coords(n);
            let (nx, ny) = (geom.cells[0], geom.cells[1]);
            let at = |a: usize, b: usize| bv(geom.node_position(geom.node_index(a, b)));
            let s = i as f64 / nx as f64;
            if geom.dim == 1 {
                return (1.0 - s) * at(0, 0) + s * at(nx, 0);
            }
            let t = j as f64 / ny as f64;
            (1.0 - s) * at(0, j) + s * at(nx, j) + (1.0 - t) * at(i, 0) + t * at(i, ny)
                - ((1.0 - s) * (1.0 - t) * at(0, 0)
                    + s * (1.0 - t) * at(nx, 0)
                    + (1.0 - s) * t * at(0, ny)
                    + s * t * at(nx, ny))
        })
        .collect()
}

/// Dirichlet problem by damped Newton: the step is halved until the residual
/// max-norm decreases.
pub fn solve_mse_dirichlet(
    geom: PatchGeometry,
    weight: Arc<dyn GraphWeight>,
    boundary: impl Fn([f64; 2]) -> f64,
    params: &NewtonParams,
) -> Result<(GraphPatch, NewtonReport), MseError> {
    let u0 = initial_guess(&geom, &boundary);
    let mut patch = GraphPatch::new(geom, u0, weight)?;
    let (map, _) = unknown_map(&geom);
    let mut r = mse_residual(&patch);
    let mut res = max_abs(&r);
    let mut history = vec![res];
    let mut it = 0;
    while res > params.tol {
        if it == params.max_iter {
            return Err(MseError::NonConvergence {
                residual: res,
                iterations: it,
            });
        }
        it += 1;
        let jac = newton_jacobian(&patch)?;
        let rhs: Vec<f64> = (0..geom.node_count())
            .filter(|&n| map[n].is_some())
            .map(|n| -r[n])
            .collect();
        let step = jac.solve(&rhs)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=params.max_halvings {
            let mut u = patch.u.clone();
            for n in 0..geom.node_count() {
                if let Some(k) = map[n] {
                    u[n] += lambda * step[k];
                }
            }
            if let Ok(trial) = patch.with_heights(u) {
                let tr = mse_residual(&trial);
                let tres = max_abs(&tr);
                if tres < res {
                    accepted = Some((trial, tr, tres));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, tr, tres)) = accepted else {
            return Err(MseError::NonConvergence {
                residual: res,
                iterations: it,
            });
        };
        patch = trial;
        r = tr;
        res = tres;
        history.push(res);
    }
    Ok((
        patch,
        NewtonReport {
            iterations: it,
            residual: res,
            history,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityVerdict {
    pub pass: bool,
    /// `min_e λ_min(a^{ij}) - α / (1 + K²)^{3/2}`.
    pub margin: f64,
    pub worst_element: usize,
    pub bound: f64,
}

/// Lower bound `a^{ij} ξ_i ξ_j >= α |ξ|² / (1 + K²)^{3/2}` at every element.
pub fn ellipticity_certificate(coeffs: &LinearizedCoefficients, alpha: f64, k: f64) -> EllipticityVerdict {
    let bound = alpha / (1.0 + k * k).powf(1.5);
    let dim = coeffs.geom.dim;
    let mut worst = (f64::INFINITY, 0);
    for (e, a) in coeffs.a.iter().enumerate() {
        let lam = if dim == 1 {
            a[0][0]
        } else {
            let m = 0.5 * (a[0][0] + a[1][1]);
            let r = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[1][0]).sqrt();
            m - r
        };
        if lam < worst.0 {
            worst = (lam, e);
        }
    }
    let margin = worst.0 - bound;
    EllipticityVerdict {
        pass: margin >= -1e-10,
        margin,
        worst_element: worst.1,
        bound,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub pass: bool,
    /// `min (u_super - u_sub)` over interior nodes of the given fields.
    pub min_gap: f64,
    pub argmin: usize,
    /// Same quantity after re-solving both Dirichlet problems.
    pub resolved_min_gap: f64,
    /// Whether the re-solved fields touch at an interior node.
    pub touching: bool,
    /// At a touching node, whether the fields agree on its 3×3 neighborhood.
    pub neighborhood_agrees: Option<bool>,
}

/// Largest hat-function weak form of the wrong sign; exact sign test for all
/// nonnegative nodal test fields.
fn sign_defect(p: &GraphPatch, super_solution: bool) -> f64 {
    let m = p.geom.node_measure();
    mse_residual(p)
        .iter()
        .enumerate()
        .filter(|&(n, _)| !p.geom.is_boundary(n))
        .map(|(_, &r)| if super_solution { -r * m } else { r * m })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Discrete comparison principle for a supersolution above a subsolution on
/// the boundary.
pub fn comparison_test(
    u_super: &GraphPatch,
    u_sub: &GraphPatch,
    params: &NewtonParams,
) -> Result<ComparisonReport, MseError> {
    if u_super.geom != u_sub.geom {
        return Err(MseError::HypothesisViolated("patch geometries differ".into()));
    }
    let geom = u_super.geom;
    let sign_tol = 1e-9 * geom.node_measure();
    if sign_defect(u_super, true) > sign_tol {
        return Err(MseError::HypothesisViolated("u_super is not a weak supersolution".into()));
    }
    if sign_defect(u_sub, false) > sign_tol {
        return Err(MseError::HypothesisViolated("u_sub is not a weak subsolution".into()));
    }
    if let Some(n) = (0..geom.node_count()).find(|&n| geom.is_boundary(n) && u_sub.u[n] > u_super.u[n]) {
        return Err(MseError::HypothesisViolated(format!("boundary order fails at node {n}")));
    }
    let interior = geom.interior_nodes();
    let gap = |a: &GraphPatch, b: &GraphPatch| {
        interior
            .iter()
            .map(|&n| (a.u[n] - b.u[n], n))
            .fold((f64::INFINITY, 0), |m, x| if x.0 < m.0 { x } else { m })
    };
    let (min_gap, argmin) = gap(u_super, u_sub);
    let resolve = |p: &GraphPatch| {
        let bv: std::collections::HashMap<usize, f64> = (0..geom.node_count())
            .filter(|&n| geom.is_boundary(n))
            .map(|n| (n, p.u[n]))
            .collect();
        let pos = move |x: [f64; 2]| {
            let i = ((x[0] - geom.origin[0]) / geom.h).round() as usize;
            let j = ((x[1] - geom.origin[1]) / geom.h).round() as usize;
            bv[&geom.node_index(i, j)]
        };
        solve_mse_dirichlet(geom, p.weight.clone(), pos, params).map(|r| r.0)
    };
    let (sup2, sub2) = (resolve(u_super)?, resolve(u_sub)?);
    let (resolved_min_gap, at) = gap(&sup2, &sub2);
    let touching = resolved_min_gap.abs() <= 1e-12;
    let neighborhood_agrees = touching.then(|| {
        geom.neighborhood(at)
            .iter()
            .all(|&n| (sup2.u[n] - sub2.u[n]).abs() <= 1e-6)
    });
    let pass = min_gap >= -1e-8 && resolved_min_gap >= -1e-8 && neighborhood_agrees != Some(false);
    Ok(ComparisonReport {
        pass,
        min_gap,
        argmin,
        resolved_min_gap,
        touching,
        neighborhood_agrees,
    })
}

/// Heights of the graph whose flux `a u'/√(1+u'²)` equals `c` on `[x0, x]`,
/// `u' = c / √(a² - c²)`, starting from `u(x0) = u0`, at each requested point.
/// Composite Gauss-Legendre with `panels` panels per unit length.
pub fn first_integral_profile(
    a: impl Fn(f64) -> f64,
    c: f64,
    x0: f64,
    u0: f64,
    points: &[f64],
    panels: usize,
) -> Result<Vec<f64>, MseError> {
    let slope = |x: f64| {
        let av = a(x);
        if av <= c.abs() {
            Err(MseError::HypothesisViolated(format!("flux {c} not below weight {av} at {x}")))
        } else {
            Ok(c / (av * av - c * c).sqrt())
        }
    };
    let integrate = |l: f64, r: f64| -> Result<f64, MseError> {
        let k = (((r - l).abs() * panels as f64).ceil() as usize).max(1);
        let w = (r - l) / k as f64;
        let mut s = 0.0;
        for i in 0..k {
            let base = l + i as f64 * w;
            for (t, wt) in gauss8_unit() {
                s += w * wt * slope(base + t * w)?;
            }
        }
        Ok(s)
    };
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        out.push(u0 + integrate(x0, x)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Arc<dyn GraphWeight> {
        Arc::new(ConstantWeight(1.0))
    }

    #[test]
    fn planes_have_zero_residual() {
        let g = PatchGeometry::rectangle([0.0, 0.0], 0.1, [6, 5]).unwrap();
        let p = GraphPatch::from_fn(g, |x| 0.3 + 2.0 * x[0] - x[1], unit()).unwrap();
        assert!(max_abs(&mse_residual(&p)) <= 1e-12);
        let phi: Vec<f64> = (0..g.node_count())
            .map(|n| if g.is_boundary(n) { 0.0 } else { (n % 5) as f64 })
            .collect();
        assert!(weak_form(&p, &phi).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn exponential_weight_at_zero_height() {
        let g = PatchGeometry::interval(0.0, 1.0, 10).unwrap();
        let w: Arc<dyn GraphWeight> = Arc::new(ExpHeightWeight { scale: 1.0, rate: 1.0 });
        let p = GraphPatch::from_fn(g, |_| 0.0, w).unwrap();
        let r = mse_residual(&p);
        for n in g.interior_nodes() {
            assert!((r[n] - 1.0).abs() <= 1e-14);
        }
        let phi: Vec<f64> = (0..11).map(|n| if n == 0 || n == 10 { 0.0 } else { 1.0 }).collect();
        // ∫φ for the hat sum: 9 interior nodes of mass h each.
        assert!((weak_form(&p, &phi).unwrap() - 0.9).abs() <= 1e-14);
        let c = homotopy_coefficients(&p, &p).unwrap();
        assert!(c.d.iter().all(|&d| (d + 1.0).abs() <= 1e-14));
        assert!(c.b.iter().all(|b| b[0] == 0.0));
    }

    #[test]
    fn unit_slope_coefficients() {
        let g = PatchGeometry::rectangle([0.0, 0.0], 0.25, [4, 4]).unwrap();
        let p = GraphPatch::from_fn(g, |x| x[0], unit()).unwrap();
        let c = homotopy_coefficients(&p, &p).unwrap();
        for a in &c.a {
            assert!((a[0][0] - 2f64.powf(-1.5)).abs() <= 1e-14);
            assert!((a[1][1] - 2f64.powf(-0.5)).abs() <= 1e-14);
            assert_eq!(a[0][1], 0.0);
        }
        let v = ellipticity_certificate(&c, 1.0, c.gradient_bound);
        assert!(v.pass && v.margin.abs() <= 1e-14);
        let mut bad = c.clone();
        bad.a[3][0][0] *= 0.5;
        assert!(!ellipticity_certificate(&bad, 1.0, 1.0).pass);
        let flat = GraphPatch::from_fn(g, |_| 2.0, unit()).unwrap();
        let c = homotopy_coefficients(&flat, &flat).unwrap();
        let v = ellipticity_certificate(&c, 1.0, 0.0);
        assert!(v.pass && v.margin == 0.0);
    }

    #[test]
    fn compact_support_enforced() {
        let g = PatchGeometry::interval(0.0, 1.0, 4).unwrap();
        let p = GraphPatch::from_fn(g, |x| x[0], unit()).unwrap();
        assert_eq!(
            weak_form(&p, &[1.0, 0.0, 0.0, 0.0, 0.0]),
            Err(MseError::TestFunctionNotCompactlySupported(0))
        );
    }

    #[test]
    fn straight_line_recovered() {
        let g = PatchGeometry::interval(0.0, 1.0, 50).unwrap();
        let (p, rep) = solve_mse_dirichlet(g, unit(), |x| x[0], &NewtonParams::default()).unwrap();
        assert!(rep.residual <= 1e-10);
        for n in 0..g.node_count() {
            assert!((p.heights()[n] - g.node_position(n)[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let g = PatchGeometry::rectangle([0.0, 0.0], 0.2, [5, 4]).unwrap();
        let w: Arc<dyn GraphWeight> = Arc::new(NumericWeight(|x: &[f64], s: f64| 1.5 + 0.3 * (s + x[0]).sin()));
        let p = GraphPatch::from_fn(g, |x| 0.4 * x[0] * x[1] + 0.2 * x[1] * x[1], w).unwrap();
        assert!(jacobian_fd_error(&p, 1e-6).unwrap() <= 1e-5);
    }

    #[test]
    fn band_solver_detects_singularity() {
        let mut m = BandMatrix::zeros(3, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, 0.0);
        m.add(2, 2, 1.0);
        assert!(matches!(m.solve(&[1.0, 1.0, 1.0]), Err(MseError::SingularJacobian { row: 1, .. })));
    }
}
