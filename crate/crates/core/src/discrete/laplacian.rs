use crate::problem::{unit_sphere_area, BoundarySpec};

use super::grid::{Axis, Grid, Layout};

/// Sparsity pattern of the operator, used to pick a linear solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Tridiagonal,
    /// Couplings at most `bandwidth` indices away from the diagonal.
    Banded { bandwidth: usize },
}

/// Discrete `-Δ` in the form `A = W⁻¹ K`.
///
/// `K` is a symmetric stiffness matrix stored as nonnegative face
/// conductances `c_ij` (so `K_ij = -c_ij`) plus a nonnegative boundary
/// term `b_i` on the diagonal; `W` holds the quadrature weights. `A` is
/// self-adjoint in `⟨·,·⟩_w` and an M-matrix.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    weights: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    coef: Vec<f64>,
    boundary_coef: Vec<f64>,
    robin_coef: Vec<f64>,
    boundary: BoundarySpec,
    structure: Structure,
}

impl DiscreteLaplacian {
    fn from_faces(
        weights: Vec<f64>,
        faces: &[(usize, usize, f64)],
        boundary_coef: Vec<f64>,
        robin_coef: Vec<f64>,
        boundary: BoundarySpec,
        structure: Structure,
    ) -> Self {
        let n = weights.len();
        let mut degree = vec![0usize; n];
        for &(a, b, _) in faces {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let mut fill = row_ptr.clone();
        let mut cols = vec![0usize; row_ptr[n]];
        let mut coef = vec![0.0; row_ptr[n]];
        for &(a, b, c) in faces {
            cols[fill[a]] = b;
            coef[fill[a]] = c;
            fill[a] += 1;
            cols[fill[b]] = a;
            coef[fill[b]] = c;
            fill[b] += 1;
        }
        // Ascending column order inside each row keeps sums reproducible.
        for i in 0..n {
            let range = row_ptr[i]..row_ptr[i + 1];
            let mut row: Vec<(usize, f64)> = cols[range.clone()]
                .iter()
                .copied()
                .zip(coef[range.clone()].iter().copied())
                .collect();
            row.sort_by_key(|&(j, _)| j);
            for (k, (j, c)) in range.zip(row) {
                cols[k] = j;
                coef[k] = c;
            }
        }
        DiscreteLaplacian {
            weights,
            row_ptr,
            cols,
            coef,
            boundary_coef,
            robin_coef,
            boundary,
            structure,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn bandwidth(&self) -> usize {
        match self.structure {
            Structure::Tridiagonal => 1,
            Structure::Banded { bandwidth } => bandwidth,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Off-diagonal conductances of row `i` as `(column, c_ij)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.coef[range].iter().copied())
    }

    /// Diagonal of the stiffness matrix, `K_ii = Σ_j c_ij + b_i`.
    pub fn stiffness_diag(&self, i: usize) -> f64 {
        self.row(i).map(|(_, c)| c).sum::<f64>() + self.boundary_coef[i]
    }

    /// Diagonal entry `A_ii`.
    pub fn diag(&self, i: usize) -> f64 {
        self.stiffness_diag(i) / self.weights[i]
    }

    /// Boundary diagonal term `b_i` (eliminated Dirichlet couplings and Robin terms).
    pub fn boundary_coef(&self, i: usize) -> f64 {
        self.boundary_coef[i]
    }

    /// Robin part of `b_i`: the quadrature of `β ∮ (·)` attached to node `i`.
    pub fn robin_coef(&self, i: usize) -> f64 {
        self.robin_coef[i]
    }

    /// `(K x)_i = Σ_j c_ij (x_i - x_j) + b_i x_i`, evaluated in flux form.
    #[inline]
    pub fn stiffness_row(&self, i: usize, x: &[f64]) -> f64 {
        let xi = x[i];
        let mut acc = self.boundary_coef[i] * xi;
        for (j, c) in self.row(i) {
            acc += c * (xi - x[j]);
        }
        acc
    }

    pub fn apply_stiffness_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.stiffness_row(i, x);
        }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.stiffness_row(i, x) / self.weights[i];
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }

    /// Checks positive diagonal, nonpositive off-diagonals and weak row
    /// diagonal dominance of `A`.
    pub fn is_m_matrix(&self) -> bool {
        (0..self.len()).all(|i| {
            let off: f64 = self.row(i).map(|(_, c)| c).sum();
            let min_c = self.row(i).map(|(_, c)| c).fold(f64::INFINITY, f64::min);
            self.weights[i] > 0.0
                && self.boundary_coef[i] >= 0.0
                && (min_c >= 0.0 || min_c == f64::INFINITY)
                && self.diag(i) > 0.0
                && self.stiffness_diag(i) >= off
        })
    }

    /// `max_i Σ_j |A_ij|`.
    pub fn inf_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| (2.0 * self.stiffness_diag(i) - self.boundary_coef[i]) / self.weights[i])
            .fold(0.0, f64::max)
    }

    /// Returns a copy with one off-diagonal coupling made non-symmetric.
    /// Only used to exercise the duality check against a broken operator.
    pub fn with_asymmetric_defect(&self, row: usize, factor: f64) -> Self {
        let mut out = self.clone();
        let k = out.row_ptr[row];
        out.coef[k] *= factor;
        out
    }
}

/// Assembles `-Δ` with the boundary condition carried by the grid.
///
/// Radial balls discretize `-(u″ + (N-1)/r u′)` by fluxes through the
/// spheres `r_{i+1/2}`; the center cell gives `2N(u_0 - u_1)/h²`, the
/// one-sided form consistent with `u′(0) = 0`. Dirichlet values are
/// eliminated. Robin data keep the boundary node with a half cell and add
/// `β |∂cell|` to its diagonal, which is the ghost-node closure
/// `u_{n+1} = u_{n-1} - 2hβ u_n` written in conservative form.
pub fn build_laplacian(grid: &Grid) -> DiscreteLaplacian {
    let boundary = grid.boundary();
    let n = grid.len();
    let weights = grid.weights().to_vec();
    let mut faces = Vec::new();
    let mut bcoef = vec![0.0; n];
    let mut robin = vec![0.0; n];
    match grid.layout() {
        Layout::Radial { dimension, radius } => {
            let h = grid.h();
            let cells = grid.resolution()[0];
            let sigma = unit_sphere_area(dimension);
            let area = |r: f64| sigma * r.powi(dimension as i32 - 1);
            for i in 0..n - 1 {
                let r_face = (i as f64 + 0.5) * h;
                faces.push((i, i + 1, area(r_face) / h));
            }
            match boundary {
                BoundarySpec::Dirichlet => {
                    let r_face = (cells as f64 - 0.5) * h;
                    bcoef[n - 1] = area(r_face) / h;
                }
                BoundarySpec::Robin { beta } => {
                    bcoef[n - 1] = area(radius) * beta;
                    robin[n - 1] = bcoef[n - 1];
                }
            }
            DiscreteLaplacian::from_faces(weights, &faces, bcoef, robin, boundary, Structure::Tridiagonal)
        }
        Layout::Line => {
            let h = grid.h();
            for i in 0..n - 1 {
                faces.push((i, i + 1, 1.0 / h));
            }
            let end = axis_end_coef(boundary, h);
            bcoef[0] += end;
            bcoef[n - 1] += end;
            if matches!(boundary, BoundarySpec::Robin { .. }) {
                robin[0] += end;
                robin[n - 1] += end;
            }
            DiscreteLaplacian::from_faces(weights, &faces, bcoef, robin, boundary, Structure::Tridiagonal)
        }
        Layout::Tensor { nx, ny } => {
            let geometry = grid.geometry();
            let (width, height) = match geometry {
                crate::problem::Geometry::Rectangle { width, height } => (width, height),
                _ => unreachable!("tensor layout comes from a rectangle"),
            };
            let [cx, cy] = grid.resolution();
            let ax = Axis::new(width, cx, boundary);
            let ay = Axis::new(height, cy, boundary);
            debug_assert_eq!((ax.len(), ay.len()), (nx, ny));
            let idx = |i: usize, j: usize| i + nx * j;
            let is_robin = matches!(boundary, BoundarySpec::Robin { .. });
            for j in 0..ny {
                for i in 0..nx {
                    if i + 1 < nx {
                        faces.push((idx(i, j), idx(i + 1, j), ay.cells[j] / ax.h));
                    }
                    if j + 1 < ny {
                        faces.push((idx(i, j), idx(i, j + 1), ax.cells[i] / ay.h));
                    }
                    let mut b = 0.0;
                    if i == 0 || i + 1 == nx {
                        b += axis_end_coef(boundary, ax.h) * ay.cells[j];
                    }
                    if j == 0 || j + 1 == ny {
                        b += axis_end_coef(boundary, ay.h) * ax.cells[i];
                    }
                    bcoef[idx(i, j)] = b;
                    if is_robin {
                        robin[idx(i, j)] = b;
                    }
                }
            }
            DiscreteLaplacian::from_faces(
                weights,
                &faces,
                bcoef,
                robin,
                boundary,
                Structure::Banded { bandwidth: nx },
            )
        }
    }
}

fn axis_end_coef(boundary: BoundarySpec, h: f64) -> f64 {
    match boundary {
        BoundarySpec::Dirichlet => 1.0 / h,
        BoundarySpec::Robin { beta } => beta,
    }
}
