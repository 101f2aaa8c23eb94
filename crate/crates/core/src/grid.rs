//! Uniform axis-aligned lattice over a centered box in 1, 2 or 3
//! dimensions, plus the node-indexed scalar fields that live on it.
//!
//! Storage is row-major with axis 0 slowest. All boundary handling uses
//! homogeneous Neumann reflection (ghost node mirrors the first interior
//! neighbor), consistently across the Laplacian and gradient stencils.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("dim must be 1, 2 or 3, got {0}")]
    Dim(usize),
    #[error("nodes per axis must be >= 16, got {0}")]
    Nodes(usize),
    #[error("extent must be positive, got {0}")]
    Extent(f64),
}

/// Uniform grid on `[-extent/2, extent/2]^dim` with `nodes` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nodes: usize,
    extent: f64,
}

impl Grid {
    pub fn new(dim: usize, nodes: usize, extent: f64) -> Result<Self, GridError> {
        if !(1..=3).contains(&dim) {
            return Err(GridError::Dim(dim));
        }
        if nodes < 16 {
            return Err(GridError::Nodes(nodes));
        }
        if !(extent > 0.0) {
            return Err(GridError::Extent(extent));
        }
        Ok(Self { dim, nodes, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Spacing `h = extent / (nodes - 1)`, identical on all axes.
    pub fn h(&self) -> f64 {
        self.extent / (self.nodes - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along one axis, centered at the origin.
    /// Computed as `(i - c) * h` with `c` the center index, so mirrored
    /// indices get exactly negated coordinates (bit-exact symmetry).
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.nodes - 1) as f64) * self.h()
    }

    /// Multi-index of a flat index (axis 0 slowest).
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.nodes;
        match self.dim {
            1 => [idx, 0, 0],
            2 => [idx / n, idx % n, 0],
            _ => [idx / (n * n), (idx / n) % n, idx % n],
        }
    }

    /// Flat index of a multi-index.
    pub fn ravel(&self, m: [usize; 3]) -> usize {
        let n = self.nodes;
        match self.dim {
            1 => m[0],
            2 => m[0] * n + m[1],
            _ => (m[0] * n + m[1]) * n + m[2],
        }
    }

    /// Position of a node by flat index.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let m = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coord(m[a]);
        }
        x
    }

    /// Neighbor index along `axis` in direction `dir` (+-1), with Neumann
    /// reflection at the faces.
    pub fn neighbor(&self, m: [usize; 3], axis: usize, dir: i64) -> usize {
        let n = self.nodes as i64;
        let mut q = m;
        let j = m[axis] as i64 + dir;
        q[axis] = if j < 0 {
            1
        } else if j >= n {
            (n - 2) as usize
        } else {
            j as usize
        };
        self.ravel(q)
    }
}

/// One `f64` per grid node, row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "field length must match grid");
        Self { grid, data }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Consumes the field, returning its raw data (used for buffer reuse
    /// in the stepping loop).
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Centered gradient component along `axis` at flat index `idx`.
    pub fn grad_axis(&self, idx: usize, axis: usize) -> f64 {
        let g = self.grid;
        let m = g.unravel(idx);
        let up = self.data[g.neighbor(m, axis, 1)];
        let dn = self.data[g.neighbor(m, axis, -1)];
        (up - dn) / (2.0 * g.h())
    }

    /// Squared norm of the centered gradient at `idx`.
    pub fn grad_sq(&self, idx: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..self.grid.dim() {
            let c = self.grad_axis(idx, a);
            s += c * c;
        }
        s
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Deterministic pairwise (tree) summation; the fixed association order
/// makes reductions reproducible regardless of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        let mut s = 0.0;
        for &x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
