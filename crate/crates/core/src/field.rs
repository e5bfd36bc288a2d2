//! Cell-wise sets and fields over a grid box.

use crate::error::DomainError;
use crate::grid::Grid;

/// Identifies the box a field lives on, for mismatch detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridKey {
    pub dims: [usize; 3],
    pub origin: [i64; 3],
}

impl From<&Grid> for GridKey {
    fn from(g: &Grid) -> Self {
        Self {
            dims: g.dims(),
            origin: g.origin(),
        }
    }
}

/// Binary field over the box: the discrete stand-in for a set of finite perimeter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndicatorSet {
    key: GridKey,
    cells: Vec<bool>,
}

impl IndicatorSet {
    pub fn empty(grid: &Grid) -> Self {
        Self {
            key: grid.into(),
            cells: vec![false; grid.len()],
        }
    }

    pub fn full(grid: &Grid) -> Self {
        Self {
            key: grid.into(),
            cells: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> bool) -> Self {
        Self {
            key: grid.into(),
            cells: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn from_vec(grid: &Grid, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), grid.len());
        Self {
            key: grid.into(),
            cells,
        }
    }

    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.cells[c]
    }

    pub fn set(&mut self, c: usize, v: bool) {
        self.cells[c] = v;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn check_same(&self, other: &Self) -> Result<(), DomainError> {
        if self.key == other.key {
            Ok(())
        } else {
            Err(DomainError::DomainMismatch)
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.key == other.key && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    /// First cell in `self` but not in `other`.
    pub fn first_excess(&self, other: &Self) -> Option<usize> {
        (0..self.cells.len()).find(|&c| self.cells[c] && !other.cells[c])
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.key, other.key);
        Self {
            key: self.key,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Real field over the whole box (interior and collar).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    key: GridKey,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &Grid, v: f64) -> Self {
        Self {
            key: grid.into(),
            values: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> f64) -> Self {
        Self {
            key: grid.into(),
            values: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn from_vec(grid: &Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self {
            key: grid.into(),
            values,
        }
    }

    pub fn indicator(set: &IndicatorSet) -> Self {
        Self {
            key: set.key,
            values: set.cells.iter().map(|&b| f64::from(u8::from(b))).collect(),
        }
    }

    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, c: usize) -> f64 {
        self.values[c]
    }

    pub fn set(&mut self, c: usize, v: f64) {
        self.values[c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            key: self.key,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `{x : u(x) >= t}` over the whole box.
    pub fn superlevel(&self, t: f64) -> IndicatorSet {
        IndicatorSet {
            key: self.key,
            cells: self.values.iter().map(|&v| v >= t).collect(),
        }
    }

    pub fn check_same(&self, key: GridKey) -> Result<(), DomainError> {
        if self.key == key {
            Ok(())
        } else {
            Err(DomainError::DomainMismatch)
        }
    }
}

/// One vector per cell, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVectorField {
    key: GridKey,
    dim: usize,
    comps: Vec<Vec<f64>>,
}

impl DiscreteVectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            key: grid.into(),
            dim: grid.dim(),
            comps: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    pub fn key(&self) -> GridKey {
        self.key
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.comps[a]
    }

    pub fn get(&self, c: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (a, comp) in self.comps.iter().enumerate() {
            v[a] = comp[c];
        }
        v
    }

    pub fn set(&mut self, c: usize, v: [f64; 3]) {
        for a in 0..self.dim {
            self.comps[a][c] = v[a];
        }
    }

    pub fn norm_at(&self, c: usize) -> f64 {
        self.comps.iter().map(|comp| comp[c] * comp[c]).sum::<f64>().sqrt()
    }

    pub fn negated(&self) -> Self {
        Self {
            key: self.key,
            dim: self.dim,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|v| -v).collect())
                .collect(),
        }
    }
}
