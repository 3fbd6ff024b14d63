//! Problem instances: exponents, domain, boundary condition and forcing.
//!
//! A [`ProblemSpec`] describes one of three closely related systems on a
//! bounded domain `Ω`:
//!
//! ```text
//! u_t - Δu = v^p + λ f(x),    v_t - Δv = u^q + λ g(x)
//! ```
//!
//! with either homogeneous Dirichlet data or the Robin condition
//! `∂u/∂n + βu = 0`. Setting `λ = 0` gives the homogeneous system.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A violated constraint found by [`validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("rejected: constraint `{constraint}` violated ({detail})")]
    Rejected {
        constraint: &'static str,
        detail: String,
    },
}

impl ProblemError {
    fn rejected(constraint: &'static str, detail: impl Into<String>) -> Self {
        ProblemError::Rejected {
            constraint,
            detail: detail.into(),
        }
    }

    /// Name of the violated constraint, e.g. `"p>1"`.
    pub fn constraint(&self) -> &'static str {
        match self {
            ProblemError::Rejected { constraint, .. } => constraint,
        }
    }
}

/// The exponents `(p, q)` of the coupling nonlinearities `v^p` and `u^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    /// Checked constructor; both exponents must exceed one.
    pub fn new(p: f64, q: f64) -> Result<Self, ProblemError> {
        let pair = ExponentPair { p, q };
        pair.check()?;
        Ok(pair)
    }

    fn check(&self) -> Result<(), ProblemError> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(ProblemError::rejected("p>1", format!("p = {}", self.p)));
        }
        if !(self.q.is_finite() && self.q > 1.0) {
            return Err(ProblemError::rejected("q>1", format!("q = {}", self.q)));
        }
        Ok(())
    }

    /// `γ = (p+1)(q+1)/(p+q+2)`, the exponent of the blow-up differential
    /// inequality. Greater than one whenever `p, q > 1`.
    pub fn gamma(&self) -> f64 {
        (self.p + 1.0) * (self.q + 1.0) / (self.p + self.q + 2.0)
    }

    /// `1/(p+1) + 1/(q+1)`, the left side of the subcriticality condition.
    pub fn hyperbola_value(&self) -> f64 {
        1.0 / (self.p + 1.0) + 1.0 / (self.q + 1.0)
    }

    /// `1/(p+1) + 1/(q+1) > (N-2)/N`.
    pub fn is_subcritical(&self, dimension: usize) -> bool {
        let n = dimension as f64;
        self.hyperbola_value() > (n - 2.0) / n
    }

    pub fn is_symmetric(&self) -> bool {
        self.p == self.q
    }
}

/// Free function form of [`ExponentPair::gamma`].
pub fn gamma(exponents: ExponentPair) -> f64 {
    exponents.gamma()
}

/// Domain geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// Ball of the given radius in `R^N`, with radially symmetric data.
    RadialBall { dimension: usize, radius: f64 },
    /// Axis-aligned rectangle `(0, width) × (0, height)`.
    Rectangle { width: f64, height: f64 },
    /// One-dimensional interval `(0, length)`. Debug geometry only.
    Interval { length: f64 },
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::RadialBall { dimension, radius } => write!(f, "radial:{dimension}:{radius}"),
            Geometry::Rectangle { width, height } => write!(f, "rect:{width}x{height}"),
            Geometry::Interval { length } => write!(f, "interval:{length}"),
        }
    }
}

/// Surface area of the unit sphere `S^{N-1} ⊂ R^N`.
pub fn unit_sphere_area(dimension: usize) -> f64 {
    // σ(N) = 2π σ(N-2) / (N-2), seeded with the two parities.
    match dimension {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => unit_sphere_area(n - 2) * 2.0 * PI / (n as f64 - 2.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub geometry: Geometry,
}

impl DomainSpec {
    pub fn ball(dimension: usize, radius: f64) -> Self {
        DomainSpec {
            geometry: Geometry::RadialBall { dimension, radius },
        }
    }

    pub fn unit_disk() -> Self {
        Self::ball(2, 1.0)
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        DomainSpec {
            geometry: Geometry::Rectangle { width, height },
        }
    }

    pub fn interval(length: f64) -> Self {
        DomainSpec {
            geometry: Geometry::Interval { length },
        }
    }

    /// Spatial dimension `N` of `Ω`.
    pub fn dimension(&self) -> usize {
        match self.geometry {
            Geometry::RadialBall { dimension, .. } => dimension,
            Geometry::Rectangle { .. } => 2,
            Geometry::Interval { .. } => 1,
        }
    }

    /// Analytic measure `|Ω|`.
    pub fn volume(&self) -> f64 {
        match self.geometry {
            Geometry::RadialBall { dimension, radius } => {
                unit_sphere_area(dimension) * radius.powi(dimension as i32) / dimension as f64
            }
            Geometry::Rectangle { width, height } => width * height,
            Geometry::Interval { length } => length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundarySpec {
    Dirichlet,
    /// `∂u/∂n + β u = 0` with `β > 0`.
    Robin { beta: f64 },
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySpec::Dirichlet => write!(f, "dirichlet"),
            BoundarySpec::Robin { beta } => write!(f, "robin:{beta}"),
        }
    }
}

/// Named nonnegative forcing profiles.
///
/// Profiles are evaluated at the distance `d` from the domain center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ForcingProfile {
    Constant { value: f64 },
    /// `amplitude · exp(-(d/width)^2)`.
    RadialBump { amplitude: f64, width: f64 },
}

impl ForcingProfile {
    pub fn unit() -> Self {
        ForcingProfile::Constant { value: 1.0 }
    }

    pub fn eval(&self, distance: f64) -> f64 {
        match *self {
            ForcingProfile::Constant { value } => value,
            ForcingProfile::RadialBump { amplitude, width } => {
                amplitude * (-(distance / width).powi(2)).exp()
            }
        }
    }

    fn is_nonnegative(&self) -> bool {
        match *self {
            ForcingProfile::Constant { value } => value >= 0.0,
            ForcingProfile::RadialBump { amplitude, width } => amplitude >= 0.0 && width > 0.0,
        }
    }

    fn is_zero(&self) -> bool {
        match *self {
            ForcingProfile::Constant { value } => value == 0.0,
            ForcingProfile::RadialBump { amplitude, .. } => amplitude == 0.0,
        }
    }
}

impl fmt::Display for ForcingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingProfile::Constant { value } => write!(f, "constant:{value}"),
            ForcingProfile::RadialBump { amplitude, width } => write!(f, "bump:{amplitude}:{width}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub lambda: f64,
    pub f: ForcingProfile,
    pub g: ForcingProfile,
}

impl ForcingSpec {
    pub fn none() -> Self {
        ForcingSpec {
            lambda: 0.0,
            f: ForcingProfile::Constant { value: 0.0 },
            g: ForcingProfile::Constant { value: 0.0 },
        }
    }

    /// `f = g = 1` scaled by `lambda`.
    pub fn uniform(lambda: f64) -> Self {
        ForcingSpec {
            lambda,
            f: ForcingProfile::unit(),
            g: ForcingProfile::unit(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.lambda == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub exponents: ExponentPair,
    pub domain: DomainSpec,
    pub boundary: BoundarySpec,
    pub forcing: ForcingSpec,
}

impl ProblemSpec {
    /// Homogeneous Dirichlet problem on the given domain.
    pub fn homogeneous(exponents: ExponentPair, domain: DomainSpec) -> Self {
        ProblemSpec {
            exponents,
            domain,
            boundary: BoundarySpec::Dirichlet,
            forcing: ForcingSpec::none(),
        }
    }

    pub fn with_boundary(mut self, boundary: BoundarySpec) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_forcing(mut self, forcing: ForcingSpec) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.forcing.lambda = lambda;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.forcing.lambda
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// `1/(p+1) + 1/(q+1) <= (N-2)/N`: positive equilibria may fail to exist
    /// on star-shaped domains. The flow itself is still well defined.
    Subcriticality { hyperbola: f64, critical: f64 },
    /// The 1D interval is an internal debug geometry.
    DebugGeometry,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Subcriticality { hyperbola, critical } => write!(
                f,
                "SUBCRITICALITY: 1/(p+1)+1/(q+1) = {hyperbola} is not above (N-2)/N = {critical}; \
                 positive equilibria may not exist on star-shaped domains"
            ),
            Warning::DebugGeometry => write!(f, "DEBUG_GEOMETRY: 1D interval is not covered by the threshold result"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub accepted: bool,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn has_subcriticality_warning(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, Warning::Subcriticality { .. }))
    }
}

/// Checks every constraint of a problem instance.
///
/// Hard constraints reject; the subcriticality condition only warns.
pub fn validate(spec: &ProblemSpec) -> Result<ValidationReport, ProblemError> {
    spec.exponents.check()?;
    let mut warnings = Vec::new();

    match spec.domain.geometry {
        Geometry::RadialBall { dimension, radius } => {
            if dimension < 2 {
                return Err(ProblemError::rejected(
                    "dimension>=2",
                    format!("N = {dimension}"),
                ));
            }
            if !(radius.is_finite() && radius > 0.0) {
                return Err(ProblemError::rejected("radius>0", format!("R = {radius}")));
            }
        }
        Geometry::Rectangle { width, height } => {
            if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
                return Err(ProblemError::rejected(
                    "sides>0",
                    format!("{width} x {height}"),
                ));
            }
        }
        Geometry::Interval { length } => {
            if !(length.is_finite() && length > 0.0) {
                return Err(ProblemError::rejected("length>0", format!("L = {length}")));
            }
            warnings.push(Warning::DebugGeometry);
        }
    }

    if let BoundarySpec::Robin { beta } = spec.boundary {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ProblemError::rejected("beta>0", format!("beta = {beta}")));
        }
    }

    let forcing = &spec.forcing;
    if !(forcing.lambda.is_finite() && forcing.lambda >= 0.0) {
        return Err(ProblemError::rejected(
            "lambda>=0",
            format!("lambda = {}", forcing.lambda),
        ));
    }
    if !forcing.f.is_nonnegative() || !forcing.g.is_nonnegative() {
        return Err(ProblemError::rejected(
            "forcing>=0",
            format!("f = {}, g = {}", forcing.f, forcing.g),
        ));
    }
    if forcing.lambda > 0.0 && forcing.f.is_zero() && forcing.g.is_zero() {
        return Err(ProblemError::rejected(
            "forcing nonzero",
            "lambda > 0 requires (f, g) not identically zero",
        ));
    }

    let n = spec.domain.dimension();
    if n >= 2 && !spec.exponents.is_subcritical(n) {
        warnings.push(Warning::Subcriticality {
            hyperbola: spec.exponents.hyperbola_value(),
            critical: (n as f64 - 2.0) / n as f64,
        });
    }

    Ok(ValidationReport {
        accepted: true,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(p: f64, q: f64, n: usize) -> ProblemSpec {
        ProblemSpec::homogeneous(ExponentPair { p, q }, DomainSpec::ball(n, 1.0))
    }

    #[test]
    fn subcritical_pair_accepted_without_warning() {
        let report = validate(&spec(2.0, 2.0, 3)).unwrap();
        assert!(report.accepted);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn critical_hyperbola_warns() {
        // 1/6 + 1/6 = 1/3, not above 1/3.
        let report = validate(&spec(5.0, 5.0, 3)).unwrap();
        assert!(report.accepted);
        assert!(report.has_subcriticality_warning());
    }

    #[test]
    fn exponent_one_rejected() {
        let err = validate(&spec(1.0, 3.0, 2)).unwrap_err();
        assert_eq!(err.constraint(), "p>1");
        let err = validate(&spec(3.0, 0.5, 2)).unwrap_err();
        assert_eq!(err.constraint(), "q>1");
    }

    #[test]
    fn other_rejections() {
        assert_eq!(
            validate(&spec(2.0, 2.0, 1)).unwrap_err().constraint(),
            "dimension>=2"
        );
        let robin = spec(2.0, 2.0, 2).with_boundary(BoundarySpec::Robin { beta: 0.0 });
        assert_eq!(validate(&robin).unwrap_err().constraint(), "beta>0");
        let forced = spec(2.0, 2.0, 2).with_forcing(ForcingSpec {
            lambda: 1.0,
            ..ForcingSpec::none()
        });
        assert_eq!(validate(&forced).unwrap_err().constraint(), "forcing nonzero");
        let negative = spec(2.0, 2.0, 2).with_forcing(ForcingSpec {
            lambda: 1.0,
            f: ForcingProfile::Constant { value: -1.0 },
            g: ForcingProfile::unit(),
        });
        assert_eq!(validate(&negative).unwrap_err().constraint(), "forcing>=0");
    }

    #[test]
    fn interval_is_flagged_debug() {
        let s = ProblemSpec::homogeneous(ExponentPair { p: 2.0, q: 3.0 }, DomainSpec::interval(1.0));
        let report = validate(&s).unwrap();
        assert_eq!(report.warnings, vec![Warning::DebugGeometry]);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(ExponentPair { p: 3.0, q: 3.0 }.gamma(), 2.0);
        assert_eq!(ExponentPair { p: 2.0, q: 2.0 }.gamma(), 1.5);
        let near_one = ExponentPair { p: 1.0 + 1e-9, q: 1.0 + 1e-9 };
        assert!(near_one.gamma() > 1.0);
        assert!((near_one.gamma() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn volumes() {
        assert!((DomainSpec::unit_disk().volume() - PI).abs() < 1e-15);
        assert!((DomainSpec::ball(3, 2.0).volume() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
        assert!((DomainSpec::ball(4, 1.0).volume() - PI * PI / 2.0).abs() < 1e-14);
        assert_eq!(DomainSpec::rectangle(2.0, 3.0).volume(), 6.0);
    }

    proptest! {
        #[test]
        fn gamma_conjugate_exponents(p in 1.0001f64..50.0, q in 1.0001f64..50.0) {
            let e = ExponentPair::new(p, q).unwrap();
            let g = e.gamma();
            prop_assert!(g > 1.0);
            prop_assert!((q + 1.0) / g > 1.0);
            prop_assert!((p + 1.0) / g > 1.0);
            prop_assert!((g / (q + 1.0) + g / (p + 1.0) - 1.0).abs() < 4.0 * f64::EPSILON);
        }

        #[test]
        fn validate_is_pure(p in 0.5f64..8.0, q in 0.5f64..8.0, n in 2usize..6) {
            let s = spec(p, q, n);
            prop_assert_eq!(validate(&s), validate(&s));
        }
    }
}
