//! Tensor grids on box domains with zero Dirichlet boundary, nodal fields,
//! cell-wise gradients and the adjoint (summation-by-parts) divergence.
//!
//! Fields live on nodes; gradients live on cells and are constant per cell.
//! The gradient stencil and its exact adjoint make the discrete
//! integration-by-parts identity hold to rounding, which the solver's energy
//! bookkeeping relies on.

/// Box domain `(0, len[0]) x (0, len[1])`; `len[1]` is ignored when `dim == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub len: [f64; 2],
}

impl Domain {
    pub fn line(l: f64) -> Self {
        Domain { dim: 1, len: [l, 0.0] }
    }

    pub fn rect(lx: f64, ly: f64) -> Self {
        Domain { dim: 2, len: [lx, ly] }
    }

    pub fn measure(&self) -> f64 {
        if self.dim == 1 {
            self.len[0]
        } else {
            self.len[0] * self.len[1]
        }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.len[0] / 2.0, if self.dim == 2 { self.len[1] / 2.0 } else { 0.0 }]
    }

    /// Radius of the largest ball around the center contained in the box.
    pub fn inradius(&self) -> f64 {
        if self.dim == 1 {
            self.len[0] / 2.0
        } else {
            (self.len[0] / 2.0).min(self.len[1] / 2.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    pub domain: Domain,
    /// Cells per axis; `cells[1]` is ignored when `dim == 1`.
    pub cells: [usize; 2],
}

impl SpaceGrid {
    pub fn line(l: f64, nx: usize) -> Self {
        SpaceGrid { domain: Domain::line(l), cells: [nx, 1] }
    }

    pub fn rect(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        SpaceGrid { domain: Domain::rect(lx, ly), cells: [nx, ny] }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn dx(&self) -> f64 {
        self.domain.len[0] / self.cells[0] as f64
    }

    pub fn dy(&self) -> f64 {
        debug_assert_eq!(self.dim(), 2);
        self.domain.len[1] / self.cells[1] as f64
    }

    pub fn nodes_per_axis(&self) -> [usize; 2] {
        [self.cells[0] + 1, if self.dim() == 2 { self.cells[1] + 1 } else { 1 }]
    }

    pub fn num_nodes(&self) -> usize {
        let n = self.nodes_per_axis();
        n[0] * n[1]
    }

    pub fn num_cells(&self) -> usize {
        if self.dim() == 1 {
            self.cells[0]
        } else {
            self.cells[0] * self.cells[1]
        }
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim() == 1 {
            self.dx()
        } else {
            self.dx() * self.dy()
        }
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nodes_per_axis()[0] + i
    }

    pub fn node_pos(&self, idx: usize) -> [f64; 2] {
        let nx = self.nodes_per_axis()[0];
        let (i, j) = (idx % nx, idx / nx);
        [
            i as f64 * self.dx(),
            if self.dim() == 2 { j as f64 * self.dy() } else { 0.0 },
        ]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let nx = self.nodes_per_axis()[0];
        let (i, j) = (idx % nx, idx / nx);
        if self.dim() == 1 {
            i == 0 || i == self.cells[0]
        } else {
            i == 0 || i == self.cells[0] || j == 0 || j == self.cells[1]
        }
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        if self.dim() == 1 {
            [(c as f64 + 0.5) * self.dx(), 0.0]
        } else {
            let (ci, cj) = (c % self.cells[0], c / self.cells[0]);
            [(ci as f64 + 0.5) * self.dx(), (cj as f64 + 0.5) * self.dy()]
        }
    }

    /// Lumped mass weight of a node (volume of its dual cell).
    pub fn node_mass(&self, idx: usize) -> f64 {
        let nx = self.nodes_per_axis()[0];
        let (i, j) = (idx % nx, idx / nx);
        let wx = if i == 0 || i == self.cells[0] { 0.5 } else { 1.0 };
        if self.dim() == 1 {
            wx * self.dx()
        } else {
            let wy = if j == 0 || j == self.cells[1] { 0.5 } else { 1.0 };
            wx * wy * self.dx() * self.dy()
        }
    }
}

/// Nodal scalar field on a `SpaceGrid`.
#[derive(Debug, Clone)]
pub struct SpatialField {
    pub grid: SpaceGrid,
    pub values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(grid: SpaceGrid) -> Self {
        SpatialField { grid, values: vec![0.0; grid.num_nodes()] }
    }

    /// Samples `f` at the nodes and zeroes the boundary.
    pub fn from_fn(grid: SpaceGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut values: Vec<f64> = (0..grid.num_nodes()).map(|i| f(grid.node_pos(i))).collect();
        for i in 0..grid.num_nodes() {
            if grid.is_boundary(i) {
                values[i] = 0.0;
            }
        }
        SpatialField { grid, values }
    }

    /// Samples `f` without forcing the boundary to zero (data fields).
    pub fn sample(grid: SpaceGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.num_nodes()).map(|i| f(grid.node_pos(i))).collect();
        SpatialField { grid, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Mass-weighted L1 norm over the box.
    pub fn l1_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.node_mass(i) * v.abs())
            .sum()
    }

    /// Mass-weighted squared L2 norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.node_mass(i) * v * v)
            .sum()
    }

    /// Cell-wise gradient: forward difference in 1-D; in 2-D the average of
    /// the two edge differences per direction (cell-centered).
    pub fn gradient(&self) -> CellField {
        let g = &self.grid;
        let mut vals = vec![[0.0f64; 2]; g.num_cells()];
        if g.dim() == 1 {
            let dx = g.dx();
            for c in 0..g.cells[0] {
                vals[c][0] = (self.values[c + 1] - self.values[c]) / dx;
            }
        } else {
            let (dx, dy) = (g.dx(), g.dy());
            let nx = g.nodes_per_axis()[0];
            for cj in 0..g.cells[1] {
                for ci in 0..g.cells[0] {
                    let c = cj * g.cells[0] + ci;
                    let n00 = cj * nx + ci;
                    let n10 = n00 + 1;
                    let n01 = n00 + nx;
                    let n11 = n01 + 1;
                    let v = &self.values;
                    vals[c][0] = ((v[n10] - v[n00]) + (v[n11] - v[n01])) / (2.0 * dx);
                    vals[c][1] = ((v[n01] - v[n00]) + (v[n11] - v[n10])) / (2.0 * dy);
                }
            }
        }
        CellField { grid: *g, values: vals }
    }

    /// Cell midpoint values (node average per cell).
    pub fn cell_averages(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; g.num_cells()];
        if g.dim() == 1 {
            for c in 0..g.cells[0] {
                out[c] = 0.5 * (self.values[c] + self.values[c + 1]);
            }
        } else {
            let nx = g.nodes_per_axis()[0];
            for cj in 0..g.cells[1] {
                for ci in 0..g.cells[0] {
                    let c = cj * g.cells[0] + ci;
                    let n00 = cj * nx + ci;
                    out[c] = 0.25
                        * (self.values[n00]
                            + self.values[n00 + 1]
                            + self.values[n00 + nx]
                            + self.values[n00 + nx + 1]);
                }
            }
        }
        out
    }
}

/// Cell-wise vector field (e.g. a gradient or an operator evaluation).
#[derive(Debug, Clone)]
pub struct CellField {
    pub grid: SpaceGrid,
    pub values: Vec<[f64; 2]>,
}

impl CellField {
    pub fn zeros(grid: SpaceGrid) -> Self {
        CellField { grid, values: vec![[0.0; 2]; grid.num_cells()] }
    }

    /// Exact adjoint of the gradient with cell-volume weights:
    /// `out[node] = sum_cells vol_c * w_c . grad_stencil(node, c)`.
    /// Together with `gradient` this gives
    /// `sum_nodes out[i] u[i] = sum_cells vol_c w_c . (grad u)_c` exactly.
    pub fn grad_adjoint(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0f64; g.num_nodes()];
        let vol = g.cell_volume();
        if g.dim() == 1 {
            let dx = g.dx();
            for c in 0..g.cells[0] {
                let w = self.values[c][0] * vol / dx;
                out[c] -= w;
                out[c + 1] += w;
            }
        } else {
            let (dx, dy) = (g.dx(), g.dy());
            let nx = g.nodes_per_axis()[0];
            for cj in 0..g.cells[1] {
                for ci in 0..g.cells[0] {
                    let c = cj * g.cells[0] + ci;
                    let n00 = cj * nx + ci;
                    let wx = self.values[c][0] * vol / (2.0 * dx);
                    let wy = self.values[c][1] * vol / (2.0 * dy);
                    out[n00] += -wx - wy;
                    out[n00 + 1] += wx - wy;
                    out[n00 + nx] += -wx + wy;
                    out[n00 + nx + 1] += wx + wy;
                }
            }
        }
        out
    }

    pub fn dot_integral(&self, other: &CellField) -> f64 {
        let vol = self.grid.cell_volume();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| vol * (a[0] * b[0] + a[1] * b[1]))
            .sum()
    }
}

/// Uniform time grid `0..t_end` with `steps` implicit-Euler steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }
}

/// Discrete space-time field: `steps + 1` time levels of nodal values.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub levels: Vec<SpatialField>,
}

impl GridFunction {
    pub fn sup_norm(&self) -> f64 {
        self.levels.iter().fold(0.0f64, |a, l| a.max(l.sup_norm()))
    }

    /// L1 norm over the space-time cylinder (right-endpoint rule in time).
    pub fn l1_norm(&self) -> f64 {
        let dt = self.time.dt();
        self.levels[1..].iter().map(|l| dt * l.l1_norm()).sum()
    }

    pub fn l1_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.levels.len(), other.levels.len());
        let dt = self.time.dt();
        let mut acc = 0.0;
        for (a, b) in self.levels[1..].iter().zip(&other.levels[1..]) {
            for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
                acc += dt * a.grid.node_mass(i) * (x - y).abs();
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_adjoint_identity_1d() {
        let g = SpaceGrid::line(1.0, 17);
        let u = SpatialField::from_fn(g, |x| (std::f64::consts::PI * x[0]).sin());
        let w = SpatialField::from_fn(g, |x| x[0] * (1.0 - x[0])).gradient();
        let gu = u.gradient();
        let lhs: f64 = w
            .grad_adjoint()
            .iter()
            .zip(&u.values)
            .map(|(a, b)| a * b)
            .sum();
        let rhs = w.dot_integral(&gu);
        assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn gradient_adjoint_identity_2d() {
        let g = SpaceGrid::rect(1.0, 2.0, 9, 7);
        let u = SpatialField::from_fn(g, |x| x[0] * (1.0 - x[0]) * x[1] * (2.0 - x[1]));
        let w = SpatialField::from_fn(g, |x| (x[0] + 0.3 * x[1]).sin()).gradient();
        let gu = u.gradient();
        let lhs: f64 = w
            .grad_adjoint()
            .iter()
            .zip(&u.values)
            .map(|(a, b)| a * b)
            .sum();
        let rhs = w.dot_integral(&gu);
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn linear_field_has_exact_gradient() {
        let g = SpaceGrid::rect(1.0, 1.0, 8, 8);
        let u = SpatialField::sample(g, |x| 2.0 * x[0] - 3.0 * x[1]);
        let grad = u.gradient();
        for v in &grad.values {
            assert!((v[0] - 2.0).abs() < 1e-12);
            assert!((v[1] + 3.0).abs() < 1e-12);
        }
    }
}
