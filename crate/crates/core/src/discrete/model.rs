use std::sync::Arc;

use crate::problem::{validate, ProblemError, ProblemSpec, ValidationReport};

use super::{build_grid, build_laplacian, DiscreteError, DiscreteLaplacian, Grid};

/// A problem instance discretized on a grid: operator plus nodal forcing.
///
/// The grid and operator are shared behind `Arc`, so re-parameterizing the
/// forcing scale (`with_lambda`) is cheap and many solves can run
/// concurrently on one assembly.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ProblemSpec,
    grid: Arc<Grid>,
    op: Arc<DiscreteLaplacian>,
    f: Arc<Vec<f64>>,
    g: Arc<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
}

impl Model {
    /// Validates `spec` and assembles it with `resolution` cells per axis.
    pub fn new(spec: ProblemSpec, resolution: usize) -> Result<Self, ModelError> {
        validate(&spec)?;
        let grid = build_grid(&spec.domain, spec.boundary, resolution)?;
        Ok(Self::from_grid(spec, grid))
    }

    /// Like [`Model::new`] but also returns the validation warnings.
    pub fn with_report(
        spec: ProblemSpec,
        resolution: usize,
    ) -> Result<(Self, ValidationReport), ModelError> {
        let report = validate(&spec)?;
        let grid = build_grid(&spec.domain, spec.boundary, resolution)?;
        Ok((Self::from_grid(spec, grid), report))
    }

    /// Uses an existing grid; its boundary condition must match the spec.
    pub fn from_grid(spec: ProblemSpec, grid: Grid) -> Self {
        assert_eq!(grid.boundary(), spec.boundary, "grid/spec boundary mismatch");
        let op = build_laplacian(&grid);
        Self::from_parts(spec, Arc::new(grid), Arc::new(op))
    }

    pub fn from_parts(spec: ProblemSpec, grid: Arc<Grid>, op: Arc<DiscreteLaplacian>) -> Self {
        let f = grid.sample_radial(|d| spec.forcing.f.eval(d));
        let g = grid.sample_radial(|d| spec.forcing.g.eval(d));
        Model {
            spec,
            grid,
            op,
            f: Arc::new(f),
            g: Arc::new(g),
        }
    }

    /// Same assembly with a different forcing scale.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.spec.forcing.lambda = lambda;
        out
    }

    /// Same grid and forcing with a replaced operator (negative controls).
    pub fn with_operator(&self, op: DiscreteLaplacian) -> Self {
        let mut out = self.clone();
        out.op = Arc::new(op);
        out
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn op(&self) -> &DiscreteLaplacian {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.spec.exponents.p
    }

    pub fn q(&self) -> f64 {
        self.spec.exponents.q
    }

    pub fn lambda(&self) -> f64 {
        self.spec.forcing.lambda
    }

    /// Unscaled nodal profile `f`.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Unscaled nodal profile `g`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }
}
