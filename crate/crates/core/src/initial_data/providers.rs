//! Curve and velocity providers: analytic closures, piecewise formulas,
//! curves defined by their tangent angle, and interpolated samples.

use std::sync::Arc;

use crate::error::{Result, SheetError};
use crate::geometry::{Domain, Vec2};
use crate::numerics::interp::CubicHermite;
use crate::numerics::quadrature::Antiderivative;
use crate::tolerance::ProviderKind;

/// An evaluable planar curve `s ↦ c(s)` with derivative access.
pub trait CurveProvider: Send + Sync {
    fn position(&self, s: f64) -> Vec2;
    fn tangent(&self, s: f64) -> Vec2;
    /// `c̈(s)` when the provider knows it exactly.
    fn second(&self, _s: f64) -> Option<Vec2> {
        None
    }
    fn domain(&self) -> Domain;
    fn kind(&self) -> ProviderKind {
        ProviderKind::Analytic
    }
    /// Parameters where `c̈` may jump (C¹ joins). Finite-difference stencils
    /// and local quadrature panels avoid straddling them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// A velocity field `s ↦ v(s)` along the curve.
pub trait VelocityProvider: Send + Sync {
    fn velocity(&self, s: f64) -> Vec2;
    fn derivative(&self, _s: f64) -> Option<Vec2> {
        None
    }
    /// Exact `∫₀ˢ v` if available.
    fn antiderivative(&self, _s: f64) -> Option<Vec2> {
        None
    }
    fn kind(&self) -> ProviderKind {
        ProviderKind::Analytic
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VecFn = Arc<dyn Fn(f64) -> Vec2 + Send + Sync>;

/// Analytic curve from closures.
#[derive(Clone)]
pub struct FnCurve {
    pub position: VecFn,
    pub tangent: VecFn,
    pub second: Option<VecFn>,
    pub domain: Domain,
    pub breakpoints: Vec<f64>,
}

impl FnCurve {
    pub fn new(
        position: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        tangent: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        domain: Domain,
    ) -> Self {
        Self {
            position: Arc::new(position),
            tangent: Arc::new(tangent),
            second: None,
            domain,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_second(mut self, second: impl Fn(f64) -> Vec2 + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(second));
        self
    }
}

impl CurveProvider for FnCurve {
    fn position(&self, s: f64) -> Vec2 {
        (self.position)(s)
    }
    fn tangent(&self, s: f64) -> Vec2 {
        (self.tangent)(s)
    }
    fn second(&self, s: f64) -> Option<Vec2> {
        self.second.as_ref().map(|f| f(s))
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// One analytic piece of a [`PiecewiseCurve`], valid on `(start, next start]`.
#[derive(Clone)]
pub struct Piece {
    pub start: f64,
    pub position: VecFn,
    pub tangent: VecFn,
    pub second: VecFn,
}

impl Piece {
    pub fn new(
        start: f64,
        position: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        tangent: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        second: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            start,
            position: Arc::new(position),
            tangent: Arc::new(tangent),
            second: Arc::new(second),
        }
    }
}

/// A curve on ℝ glued from analytic pieces. The first piece extends to −∞.
#[derive(Clone)]
pub struct PiecewiseCurve {
    pieces: Vec<Piece>,
}

impl PiecewiseCurve {
    /// Pieces must be sorted by `start`; the first `start` is ignored.
    pub fn new(pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty());
        debug_assert!(pieces.windows(2).all(|w| w[1].start > w[0].start));
        Self { pieces }
    }

    fn piece(&self, s: f64) -> &Piece {
        // Piece i covers (start_i, start_{i+1}].
        let i = self.pieces[1..].partition_point(|p| p.start < s);
        &self.pieces[i]
    }

    /// Verifies value and tangent continuity at every join to `tol`.
    pub fn check_c1(&self, name: &str, tol: f64) -> Result<()> {
        for w in self.pieces.windows(2) {
            let s = w[1].start;
            let jump_pos = ((w[0].position)(s) - (w[1].position)(s)).norm();
            let jump_tan = ((w[0].tangent)(s) - (w[1].tangent)(s)).norm();
            let jump = jump_pos.max(jump_tan);
            if !(jump <= tol) {
                return Err(SheetError::NotC1 {
                    name: name.to_string(),
                    s,
                    jump,
                });
            }
        }
        Ok(())
    }
}

impl CurveProvider for PiecewiseCurve {
    fn position(&self, s: f64) -> Vec2 {
        (self.piece(s).position)(s)
    }
    fn tangent(&self, s: f64) -> Vec2 {
        (self.piece(s).tangent)(s)
    }
    fn second(&self, s: f64) -> Option<Vec2> {
        Some((self.piece(s).second)(s))
    }
    fn domain(&self) -> Domain {
        Domain::Interval {
            min: f64::NEG_INFINITY,
            max: f64::INFINITY,
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.start).collect()
    }
}

/// A unit-speed curve given by its tangent angle: `ċ = (cos θ, sin θ)`,
/// `c(s) = c(origin) + ∫ ċ`.
///
/// Positions are tabulated on `[lo, hi]` and completed by local adaptive
/// quadrature, so they are accurate to about 1e−13.
pub struct AngleCurve {
    theta: ScalarFn,
    theta_dot: ScalarFn,
    table: Antiderivative<Vec2, Box<dyn Fn(f64) -> Vec2 + Send + Sync>>,
    base: Vec2,
    domain: Domain,
    breakpoints: Vec<f64>,
}

impl AngleCurve {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        theta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        origin: f64,
        base: Vec2,
        range: (f64, f64),
        domain: Domain,
        breakpoints: Vec<f64>,
    ) -> Self {
        let theta: ScalarFn = Arc::new(theta);
        let th = theta.clone();
        let integrand: Box<dyn Fn(f64) -> Vec2 + Send + Sync> =
            Box::new(move |s| Vec2::from_angle(th(s)));
        let table = Antiderivative::new(
            integrand,
            range.0,
            range.1,
            origin,
            0.05,
            &breakpoints,
            1e-14,
        );
        Self {
            theta,
            theta_dot: Arc::new(theta_dot),
            table,
            base,
            domain,
            breakpoints,
        }
    }

    pub fn angle(&self, s: f64) -> f64 {
        (self.theta)(s)
    }
}

impl CurveProvider for AngleCurve {
    fn position(&self, s: f64) -> Vec2 {
        self.base + self.table.eval(s)
    }
    fn tangent(&self, s: f64) -> Vec2 {
        Vec2::from_angle((self.theta)(s))
    }
    fn second(&self, s: f64) -> Option<Vec2> {
        Some(Vec2::from_angle((self.theta)(s)).perp() * (self.theta_dot)(s))
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// Curve interpolated from samples by a natural cubic spline.
#[derive(Clone)]
pub struct SampledCurve {
    spline: CubicHermite<Vec2>,
}

impl SampledCurve {
    pub fn new(s: Vec<f64>, c: Vec<Vec2>) -> Result<Self> {
        check_knots(&s)?;
        Ok(Self {
            spline: CubicHermite::natural_spline(s, c),
        })
    }
}

impl CurveProvider for SampledCurve {
    fn position(&self, s: f64) -> Vec2 {
        self.spline.eval(s)
    }
    fn tangent(&self, s: f64) -> Vec2 {
        self.spline.deriv(s)
    }
    fn second(&self, s: f64) -> Option<Vec2> {
        Some(self.spline.eval_all(s).2)
    }
    fn domain(&self) -> Domain {
        Domain::Interval {
            min: self.spline.lo(),
            max: self.spline.hi(),
        }
    }
    fn kind(&self) -> ProviderKind {
        ProviderKind::Sampled
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.spline.knots().to_vec()
    }
}

/// `v ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroVelocity;

impl VelocityProvider for ZeroVelocity {
    fn velocity(&self, _s: f64) -> Vec2 {
        Vec2::ZERO
    }
    fn derivative(&self, _s: f64) -> Option<Vec2> {
        Some(Vec2::ZERO)
    }
    fn antiderivative(&self, _s: f64) -> Option<Vec2> {
        Some(Vec2::ZERO)
    }
}

/// A constant velocity vector.
#[derive(Clone, Copy, Debug)]
pub struct ConstantVelocity(pub Vec2);

impl VelocityProvider for ConstantVelocity {
    fn velocity(&self, _s: f64) -> Vec2 {
        self.0
    }
    fn derivative(&self, _s: f64) -> Option<Vec2> {
        Some(Vec2::ZERO)
    }
    fn antiderivative(&self, s: f64) -> Option<Vec2> {
        Some(self.0 * s)
    }
}

/// Analytic velocity from closures.
#[derive(Clone)]
pub struct FnVelocity {
    pub velocity: VecFn,
    pub derivative: Option<VecFn>,
}

impl FnVelocity {
    pub fn new(velocity: impl Fn(f64) -> Vec2 + Send + Sync + 'static) -> Self {
        Self {
            velocity: Arc::new(velocity),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> Vec2 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }
}

impl VelocityProvider for FnVelocity {
    fn velocity(&self, s: f64) -> Vec2 {
        (self.velocity)(s)
    }
    fn derivative(&self, s: f64) -> Option<Vec2> {
        self.derivative.as_ref().map(|f| f(s))
    }
}

/// Velocity interpolated from samples.
#[derive(Clone)]
pub struct SampledVelocity {
    spline: CubicHermite<Vec2>,
}

impl SampledVelocity {
    pub fn new(s: Vec<f64>, v: Vec<Vec2>) -> Result<Self> {
        check_knots(&s)?;
        Ok(Self {
            spline: CubicHermite::natural_spline(s, v),
        })
    }
}

impl VelocityProvider for SampledVelocity {
    fn velocity(&self, s: f64) -> Vec2 {
        self.spline.eval(s)
    }
    fn derivative(&self, s: f64) -> Option<Vec2> {
        Some(self.spline.deriv(s))
    }
    fn kind(&self) -> ProviderKind {
        ProviderKind::Sampled
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.spline.knots().to_vec()
    }
}

fn check_knots(s: &[f64]) -> Result<()> {
    if s.len() < 2 {
        return Err(SheetError::InvalidInput(
            "at least two samples are required".into(),
        ));
    }
    if let Some(w) = s.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(SheetError::InvalidInput(format!(
            "sample parameters must be strictly increasing (found {} then {})",
            w[0], w[1]
        )));
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(SheetError::InvalidInput(
            "non-finite sample parameter".into(),
        ));
    }
    Ok(())
}
