use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::SiteBox;

/// Cell-centred grid on a union of lattice cells, in reference coordinates.
///
/// Axis `a` covers cells `lo[a] .. lo[a] + cells[a]`; each cell carries `n_h`
/// nodes per axis at offsets `(p + ½)/n_h − ½`, so node `i` sits at
/// `y = lo − ½ + (i + ½)h`. Nodes are numbered with axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxGrid {
    n_h: usize,
    lo: Vec<i64>,
    cells: Vec<usize>,
}

impl BoxGrid {
    pub fn new(lo: Vec<i64>, cells: Vec<usize>, n_h: usize) -> Result<Self> {
        if n_h < 2 {
            return Err(Error::Config(format!("n_h must be >= 2, got {n_h}")));
        }
        if lo.len() != cells.len() || !(1..=3).contains(&lo.len()) {
            return Err(Error::Config("grid dimension must be 1..=3".into()));
        }
        if cells.iter().any(|&c| c == 0) {
            return Err(Error::Config("grid needs at least one cell per axis".into()));
        }
        Ok(BoxGrid { n_h, lo, cells })
    }

    /// Λ_L: cells −L..=L on every axis.
    pub fn centered(dim: usize, level: usize, n_h: usize) -> Result<Self> {
        Self::new(vec![-(level as i64); dim], vec![2 * level + 1; dim], n_h)
    }

    /// The single fundamental cell D.
    pub fn unit_cell(dim: usize, n_h: usize) -> Result<Self> {
        Self::centered(dim, 0, n_h)
    }

    pub fn for_sites(sites: &SiteBox, n_h: usize) -> Result<Self> {
        let cells = sites.lo().iter().zip(sites.hi()).map(|(l, h)| (h - l + 1) as usize).collect();
        Self::new(sites.lo().to_vec(), cells, n_h)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_h as f64
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// L if this is a centred box Λ_L.
    pub fn level(&self) -> Option<usize> {
        let c = self.cells[0];
        let l = (c - 1) / 2;
        (c % 2 == 1 && self.cells.iter().all(|&x| x == c) && self.lo.iter().all(|&x| x == -(l as i64))).then_some(l)
    }

    pub fn nodes(&self, axis: usize) -> usize {
        self.cells[axis] * self.n_h
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.nodes(a)).collect()
    }

    pub fn dof(&self) -> usize {
        (0..self.dim()).map(|a| self.nodes(a)).product()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        (0..axis).map(|a| self.nodes(a)).product()
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut m = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let n = self.nodes(a);
            m.push(node % n);
            node /= n;
        }
        m
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for a in (0..self.dim()).rev() {
            f = f * self.nodes(a) + idx[a];
        }
        f
    }

    /// Reference coordinate of node index `i` on `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] as f64 - 0.5 + (i as f64 + 0.5) * self.h()
    }

    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Lattice cell containing node index `i` on `axis`.
    pub fn cell_of(&self, axis: usize, i: usize) -> i64 {
        self.lo[axis] + (i / self.n_h) as i64
    }

    /// Position of node index `i` inside its cell.
    pub fn offset_of(&self, i: usize) -> usize {
        i % self.n_h
    }

    /// Flat index of the node with the same in-cell offsets on the unit-cell grid.
    pub fn cell_offset_index(&self, node: usize) -> usize {
        let mut f = 0;
        let mut node = node;
        let mut stride = 1;
        for a in 0..self.dim() {
            let n = self.nodes(a);
            f += (node % n % self.n_h) * stride;
            stride *= self.n_h;
            node /= n;
        }
        f
    }

    /// Nodes of lattice cell `k`, in flat order; empty if `k` is outside the grid.
    pub fn cell_nodes(&self, k: &[i64]) -> Vec<usize> {
        let d = self.dim();
        let mut start = Vec::with_capacity(d);
        for a in 0..d {
            let c = k[a] - self.lo[a];
            if c < 0 || c as usize >= self.cells[a] {
                return Vec::new();
            }
            start.push(c as usize * self.n_h);
        }
        let per = self.n_h.pow(d as u32);
        let mut out = Vec::with_capacity(per);
        for j in 0..per {
            let mut rem = j;
            let mut idx = start.clone();
            for v in idx.iter_mut() {
                *v += rem % self.n_h;
                rem /= self.n_h;
            }
            out.push(self.flat(&idx));
        }
        out
    }

    /// Number of nodes on one face orthogonal to `axis`.
    pub fn face_len(&self, axis: usize) -> usize {
        self.dof() / self.nodes(axis)
    }

    /// Index of a node on the face orthogonal to `axis` (the multi-index with
    /// that axis removed, flattened with the remaining axes in order).
    pub fn face_index(&self, axis: usize, idx: &[usize]) -> usize {
        let mut f = 0;
        for a in (0..self.dim()).rev() {
            if a != axis {
                f = f * self.nodes(a) + idx[a];
            }
        }
        f
    }

    /// Split along `axis` after `at` cells into two adjacent grids.
    pub fn split(&self, axis: usize, at: usize) -> Result<(BoxGrid, BoxGrid)> {
        if axis >= self.dim() || at == 0 || at >= self.cells[axis] {
            return Err(Error::Domain(format!("cannot split axis {axis} at {at} of {} cells", self.cells[axis])));
        }
        let mut c1 = self.cells.clone();
        c1[axis] = at;
        let mut c2 = self.cells.clone();
        c2[axis] -= at;
        let mut lo2 = self.lo.clone();
        lo2[axis] += at as i64;
        Ok((
            BoxGrid::new(self.lo.clone(), c1, self.n_h)?,
            BoxGrid::new(lo2, c2, self.n_h)?,
        ))
    }

    /// Lattice sites of the cells covered by this grid.
    pub fn sites(&self) -> SiteBox {
        let hi = self.lo.iter().zip(&self.cells).map(|(l, c)| l + *c as i64 - 1).collect();
        SiteBox::new(self.lo.clone(), hi).expect("grid cells form a nonempty box")
    }

    /// Reference-coordinate volume of one node (h^d).
    pub fn node_volume(&self) -> f64 {
        self.h().powi(self.dim() as i32)
    }
}
