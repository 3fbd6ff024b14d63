use crate::problem::{unit_sphere_area, BoundarySpec, DomainSpec, Geometry};

use super::DiscreteError;

/// Smallest accepted number of cells per axis.
pub const MIN_RESOLUTION: usize = 4;

/// Node layout of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Radial nodes `r_i = i h`, including the center.
    Radial { dimension: usize, radius: f64 },
    /// Interval nodes `x_i = i h`.
    Line,
    /// Row-major tensor grid, `nx` degrees of freedom per row.
    Tensor { nx: usize, ny: usize },
}

/// Vertex-centered grid over `Ω`.
///
/// Each degree of freedom owns a dual cell; its quadrature weight is the
/// measure of that cell (the radial cells are spherical shells). Dirichlet
/// boundary nodes are eliminated, Robin boundary nodes are kept with half
/// cells.
#[derive(Debug, Clone)]
pub struct Grid {
    geometry: Geometry,
    boundary: BoundarySpec,
    layout: Layout,
    resolution: [usize; 2],
    spacing: [f64; 2],
    coords: Vec<[f64; 2]>,
    weights: Vec<f64>,
    center: [f64; 2],
    on_boundary: Vec<bool>,
}

/// One axis of a vertex grid: dual cell lengths and node coordinates for the
/// kept degrees of freedom.
#[derive(Debug, Clone)]
pub(crate) struct Axis {
    pub coords: Vec<f64>,
    pub cells: Vec<f64>,
    pub h: f64,
    pub keeps_ends: bool,
}

impl Axis {
    pub(crate) fn new(length: f64, cells: usize, boundary: BoundarySpec) -> Self {
        let h = length / cells as f64;
        let keeps_ends = matches!(boundary, BoundarySpec::Robin { .. });
        let range = if keeps_ends { 0..=cells } else { 1..=cells - 1 };
        let mut coords = Vec::new();
        let mut lens = Vec::new();
        for i in range {
            coords.push(i as f64 * h);
            lens.push(if i == 0 || i == cells { 0.5 * h } else { h });
        }
        Axis {
            coords,
            cells: lens,
            h,
            keeps_ends,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.coords.len()
    }
}

impl Grid {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Cells per axis (second entry is 1 for one-dimensional layouts).
    pub fn resolution(&self) -> [usize; 2] {
        self.resolution
    }

    /// Mesh spacing per axis.
    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn h(&self) -> f64 {
        self.spacing[0]
    }

    /// Number of degrees of freedom.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True for Robin degrees of freedom that sit on `∂Ω`.
    pub fn is_boundary_node(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    /// Analytic `|Ω|`.
    pub fn volume(&self) -> f64 {
        DomainSpec {
            geometry: self.geometry,
        }
        .volume()
    }

    /// Distance from the domain center (the radius for radial grids).
    pub fn distance_from_center(&self, i: usize) -> f64 {
        let [x, y] = self.coords[i];
        match self.layout {
            Layout::Radial { .. } => x,
            _ => ((x - self.center[0]).powi(2) + (y - self.center[1]).powi(2)).sqrt(),
        }
    }

    /// Nodal values of a function of the distance from the center.
    pub fn sample_radial(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| f(self.distance_from_center(i)))
            .collect()
    }

    /// Nodal values of a function of the node coordinates.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&c| f(c)).collect()
    }

    /// `Σ w_i x_i`.
    pub fn integrate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.len());
        self.weights.iter().zip(x).map(|(w, xi)| w * xi).sum()
    }

    /// Weighted inner product `⟨x, y⟩_w = Σ w_i x_i y_i`.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.len());
        debug_assert_eq!(y.len(), self.len());
        self.weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.dot(x, x).sqrt()
    }

    pub(crate) fn from_parts(
        geometry: Geometry,
        boundary: BoundarySpec,
        layout: Layout,
        resolution: [usize; 2],
        spacing: [f64; 2],
        coords: Vec<[f64; 2]>,
        weights: Vec<f64>,
        center: [f64; 2],
        on_boundary: Vec<bool>,
    ) -> Self {
        Grid {
            geometry,
            boundary,
            layout,
            resolution,
            spacing,
            coords,
            weights,
            center,
            on_boundary,
        }
    }
}

/// Builds a grid with `resolution` cells along every axis.
///
/// Radial balls use `r_i = i·R/resolution`; the center node is kept (its
/// cell is the ball of radius `h/2`) and the node at `r = R` is kept only for
/// Robin data. For `N = 2` the interior weights reduce to `2π r_i h`.
pub fn build_grid(
    domain: &DomainSpec,
    boundary: BoundarySpec,
    resolution: usize,
) -> Result<Grid, DiscreteError> {
    build_grid_axes(domain, boundary, [resolution, resolution])
}

/// Like [`build_grid`] with independent cell counts for the two rectangle
/// axes. The second count is ignored by one-dimensional layouts.
pub fn build_grid_axes(
    domain: &DomainSpec,
    boundary: BoundarySpec,
    resolution: [usize; 2],
) -> Result<Grid, DiscreteError> {
    let [nx, ny] = resolution;
    let needed = match domain.geometry {
        Geometry::Rectangle { .. } => nx.min(ny),
        _ => nx,
    };
    if needed < MIN_RESOLUTION {
        return Err(DiscreteError::ResolutionTooSmall {
            got: needed,
            min: MIN_RESOLUTION,
        });
    }
    if let BoundarySpec::Robin { beta } = boundary {
        if !(beta > 0.0) {
            return Err(DiscreteError::Unsupported(format!(
                "Robin coefficient must be positive, got {beta}"
            )));
        }
    }

    match domain.geometry {
        Geometry::RadialBall { dimension, radius } => {
            if dimension < 2 {
                return Err(DiscreteError::Unsupported(format!(
                    "radial reduction needs N >= 2, got {dimension}"
                )));
            }
            Ok(radial_grid(domain.geometry, dimension, radius, boundary, nx))
        }
        Geometry::Interval { length } => {
            let axis = Axis::new(length, nx, boundary);
            let n = axis.len();
            let on_boundary = (0..n)
                .map(|i| axis.keeps_ends && (i == 0 || i == n - 1))
                .collect();
            Ok(Grid::from_parts(
                domain.geometry,
                boundary,
                Layout::Line,
                [nx, 1],
                [axis.h, 0.0],
                axis.coords.iter().map(|&x| [x, 0.0]).collect(),
                axis.cells.clone(),
                [0.5 * length, 0.0],
                on_boundary,
            ))
        }
        Geometry::Rectangle { width, height } => {
            let ax = Axis::new(width, nx, boundary);
            let ay = Axis::new(height, ny, boundary);
            let mut coords = Vec::with_capacity(ax.len() * ay.len());
            let mut weights = Vec::with_capacity(ax.len() * ay.len());
            let mut on_boundary = Vec::with_capacity(ax.len() * ay.len());
            for j in 0..ay.len() {
                for i in 0..ax.len() {
                    coords.push([ax.coords[i], ay.coords[j]]);
                    weights.push(ax.cells[i] * ay.cells[j]);
                    let edge = |k: usize, len: usize, keep: bool| keep && (k == 0 || k + 1 == len);
                    on_boundary.push(
                        edge(i, ax.len(), ax.keeps_ends) || edge(j, ay.len(), ay.keeps_ends),
                    );
                }
            }
            Ok(Grid::from_parts(
                domain.geometry,
                boundary,
                Layout::Tensor {
                    nx: ax.len(),
                    ny: ay.len(),
                },
                [nx, ny],
                [ax.h, ay.h],
                coords,
                weights,
                [0.5 * width, 0.5 * height],
                on_boundary,
            ))
        }
    }
}

fn radial_grid(
    geometry: Geometry,
    dimension: usize,
    radius: f64,
    boundary: BoundarySpec,
    cells: usize,
) -> Grid {
    let h = radius / cells as f64;
    let sigma = unit_sphere_area(dimension);
    let nd = dimension as i32;
    let shell = |a: f64, b: f64| sigma * (b.powi(nd) - a.powi(nd)) / dimension as f64;
    let last = match boundary {
        BoundarySpec::Dirichlet => cells - 1,
        BoundarySpec::Robin { .. } => cells,
    };
    let mut coords = Vec::with_capacity(last + 1);
    let mut weights = Vec::with_capacity(last + 1);
    let mut on_boundary = Vec::with_capacity(last + 1);
    for i in 0..=last {
        let r = i as f64 * h;
        let inner = if i == 0 { 0.0 } else { r - 0.5 * h };
        let outer = if i == cells { radius } else { r + 0.5 * h };
        coords.push([r, 0.0]);
        weights.push(shell(inner, outer));
        on_boundary.push(i == cells);
    }
    Grid::from_parts(
        geometry,
        boundary,
        Layout::Radial { dimension, radius },
        [cells, 1],
        [h, 0.0],
        coords,
        weights,
        [0.0, 0.0],
        on_boundary,
    )
}
