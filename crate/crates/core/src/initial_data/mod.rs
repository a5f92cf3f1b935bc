//! Planar initial data `(c, v)` in the orthonormal gauge, with the cached
//! antiderivative `W` and the angular lifts used everywhere downstream.

pub mod csv_io;
pub mod providers;
mod reparam;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::geometry::{wrap_angle, Domain, Vec2, Window};
use crate::numerics::quadrature::Antiderivative;
use crate::tolerance::{self, ProviderKind, Tolerances};

pub use csv_io::{read_samples, read_samples_file, write_samples, CurveSamples};
pub use providers::{
    AngleCurve, ConstantVelocity, CurveProvider, FnCurve, FnVelocity, Piece, PiecewiseCurve,
    SampledCurve, SampledVelocity, VelocityProvider, ZeroVelocity,
};

type WFn = Box<dyn Fn(f64) -> Vec2 + Send + Sync>;

enum WTable {
    Exact,
    Table(Antiderivative<Vec2, WFn>),
}

/// Data for periodic reduction `s = s_red + kP`.
#[derive(Clone, Copy, Debug)]
struct PeriodInfo {
    period: f64,
    shift: Vec2,
    w_shift: Vec2,
    winding: f64,
}

/// Normalized initial data. Immutable and cheap to share behind an `Arc`.
pub struct InitialData {
    curve: Arc<dyn CurveProvider>,
    velocity: Arc<dyn VelocityProvider>,
    window: Window,
    kind: ProviderKind,
    tolerances: Tolerances,
    lift_start: f64,
    lift_step: f64,
    lift: Vec<f64>,
    w: WTable,
    period: Option<PeriodInfo>,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData")
            .field("domain", &self.domain())
            .field("window", &self.window)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Options for [`normalize_initial_data`].
#[derive(Clone, Copy, Debug)]
pub struct NormalizeOptions {
    /// Raw-parameter window. Required for unbounded non-periodic curves;
    /// periodic curves default to the whole line.
    pub window: Option<Window>,
    /// Spacing of the grid on which immersion, timelikeness and the gauge
    /// are checked.
    pub sample_step: f64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            window: None,
            sample_step: 1e-2,
        }
    }
}

impl NormalizeOptions {
    pub fn with_window(window: Window) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }
}

/// The parameter range that gets tabulated: one period, or the window.
fn base_range(domain: Domain, window: Window) -> (f64, f64) {
    match domain {
        Domain::Periodic { period, .. } => (0.0, period),
        Domain::Interval { .. } => (window.min, window.max),
    }
}

fn resolve_window(domain: Domain, window: Option<Window>) -> Result<Window> {
    let w = match (domain, window) {
        (_, Some(w)) => w,
        (Domain::Periodic { .. }, None) => Window::new(f64::NEG_INFINITY, f64::INFINITY),
        (Domain::Interval { min, max }, None) => Window::new(min, max),
    };
    if let Domain::Interval { .. } = domain {
        if !(w.min.is_finite() && w.max.is_finite()) {
            return Err(SheetError::InvalidInput(
                "an unbounded curve needs a finite window".into(),
            ));
        }
    }
    if !(w.max > w.min) {
        return Err(SheetError::InvalidInput(format!(
            "empty window [{}, {}]",
            w.min, w.max
        )));
    }
    if let Domain::Interval { min, max } = domain {
        if w.min < min || w.max > max {
            return Err(SheetError::DomainExceeded {
                s: if w.min < min { w.min } else { w.max },
                min,
                max,
            });
        }
    }
    Ok(w)
}

/// Checks immersion and timelikeness on the sample grid, and reports whether
/// the pair already satisfies the gauge to `tol`.
fn screen(c: &dyn CurveProvider, v: &dyn VelocityProvider, grid: &[f64], tol: f64) -> Result<bool> {
    let mut normalized = true;
    for &s in grid {
        let d = c.tangent(s);
        let speed = d.norm();
        if !(speed >= tolerance::IMMERSION) {
            return Err(SheetError::NotImmersed { s, speed });
        }
        let w = v.velocity(s);
        let vn = w.norm();
        if !(vn < 1.0 - tolerance::TIMELIKE) {
            return Err(SheetError::NotTimelike { s, speed: vn });
        }
        if d.dot(w).abs() > tol || (d.norm_sq() + w.norm_sq() - 1.0).abs() > tol {
            normalized = false;
        }
    }
    Ok(normalized)
}

/// Brings raw data into the gauge `⟨ċ, v⟩ = 0`, `|ċ|² + |v|² = 1`.
///
/// The tangential part of `v` is discarded and the curve is reparameterized
/// monotonically with `σ(0) = 0` (or σ = 0 at the nearest window end when 0
/// lies outside it). Data that already satisfy the gauge are returned as is,
/// which makes the operation idempotent.
pub fn normalize_initial_data(
    c_raw: Arc<dyn CurveProvider>,
    v_raw: Arc<dyn VelocityProvider>,
    opts: &NormalizeOptions,
) -> Result<InitialData> {
    let domain = c_raw.domain();
    let window = resolve_window(domain, opts.window)?;
    let range = base_range(domain, window);
    let grid = Window::new(range.0, range.1).samples(opts.sample_step);
    let kind = merge_kind(c_raw.kind(), v_raw.kind());
    let tol = Tolerances::for_kind(kind).gauge;
    if screen(c_raw.as_ref(), v_raw.as_ref(), &grid, tol)? {
        return InitialData::from_normalized(c_raw, v_raw, window);
    }
    let origin = 0f64.clamp(range.0, range.1);
    let rp = Arc::new(reparam::Reparam::new(c_raw, v_raw, range, origin));
    let new_window = match domain {
        Domain::Periodic { .. } => match opts.window {
            None => Window::new(f64::NEG_INFINITY, f64::INFINITY),
            Some(w) => Window::new(rp.s_to_sigma_periodic(w.min), rp.s_to_sigma_periodic(w.max)),
        },
        Domain::Interval { .. } => {
            let (a, b) = rp.sigma_range();
            Window::new(a, b)
        }
    };
    let curve: Arc<dyn CurveProvider> = Arc::new(reparam::NormalizedCurve(rp.clone()));
    let velocity: Arc<dyn VelocityProvider> = Arc::new(reparam::NormalizedVelocity(rp));
    InitialData::from_normalized(curve, velocity, new_window)
}

fn merge_kind(a: ProviderKind, b: ProviderKind) -> ProviderKind {
    if a == ProviderKind::Sampled || b == ProviderKind::Sampled {
        ProviderKind::Sampled
    } else {
        ProviderKind::Analytic
    }
}

impl InitialData {
    /// Wraps providers that already satisfy the gauge. Nothing is
    /// reparameterized; the lift and `W` tables are built here.
    pub fn from_normalized(
        curve: Arc<dyn CurveProvider>,
        velocity: Arc<dyn VelocityProvider>,
        window: Window,
    ) -> Result<Self> {
        let domain = curve.domain();
        let window = resolve_window(domain, Some(window))?;
        let (lo, hi) = base_range(domain, window);
        let kind = merge_kind(curve.kind(), velocity.kind());

        let count = (((hi - lo) / 1e-3).ceil() as usize).clamp(64, 2_000_000);
        let lift_step = (hi - lo) / count as f64;
        let mut lift = Vec::with_capacity(count + 1);
        let mut prev = curve.tangent(lo).angle();
        lift.push(prev);
        for i in 1..=count {
            let s = if i == count {
                hi
            } else {
                lo + lift_step * i as f64
            };
            let raw = curve.tangent(s).angle();
            let step = wrap_angle(raw - prev);
            if step.abs() > PI - tolerance::UNWRAP {
                return Err(SheetError::GridTooCoarse {
                    s0: s - lift_step,
                    s1: s,
                    jump: step,
                });
            }
            prev += step;
            lift.push(prev);
        }

        let w = if velocity.antiderivative(lo).is_some() {
            WTable::Exact
        } else {
            let vv = velocity.clone();
            let f: WFn = Box::new(move |s| vv.velocity(s));
            let mut breaks = curve.breakpoints();
            breaks.extend(velocity.breakpoints());
            let origin = 0f64.clamp(lo, hi);
            WTable::Table(Antiderivative::new(
                f,
                lo,
                hi,
                origin,
                0.05,
                &breaks,
                tolerance::QUADRATURE,
            ))
        };

        let mut data = Self {
            curve,
            velocity,
            window,
            kind,
            tolerances: Tolerances::for_kind(kind),
            lift_start: lo,
            lift_step,
            lift,
            w,
            period: None,
        };
        if let Domain::Periodic { period, closed } = domain {
            let shift = if closed {
                Vec2::ZERO
            } else {
                data.curve.position(period) - data.curve.position(0.0)
            };
            data.period = Some(PeriodInfo {
                period,
                shift,
                w_shift: data.w_base(period) - data.w_base(0.0),
                winding: *data.lift.last().unwrap() - data.lift[0],
            });
        }
        Ok(data)
    }

    pub fn curve(&self) -> &Arc<dyn CurveProvider> {
        &self.curve
    }

    pub fn velocity(&self) -> &Arc<dyn VelocityProvider> {
        &self.velocity
    }

    pub fn domain(&self) -> Domain {
        self.curve.domain()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn kind(&self) -> ProviderKind {
        self.kind
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    /// Overrides the kind-derived tolerances.
    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// The interval on which the lift and `W` are tabulated.
    pub fn base_range(&self) -> (f64, f64) {
        base_range(self.domain(), self.window)
    }

    /// Errors unless `s` lies in the truncation window.
    pub fn check(&self, s: f64) -> Result<()> {
        if self.window.contains(s) {
            Ok(())
        } else {
            Err(SheetError::DomainExceeded {
                s,
                min: self.window.min,
                max: self.window.max,
            })
        }
    }

    /// `(s_red, k)` with `s = s_red + k P`.
    #[inline]
    fn reduce(&self, s: f64) -> (f64, f64) {
        match self.period {
            Some(p) => {
                let k = (s / p.period).floor();
                if k == 0.0 {
                    (s, 0.0)
                } else {
                    (s - k * p.period, k)
                }
            }
            None => (s, 0.0),
        }
    }

    pub fn c(&self, s: f64) -> Vec2 {
        let (r, k) = self.reduce(s);
        match self.period {
            Some(p) if k != 0.0 => self.curve.position(r) + p.shift * k,
            _ => self.curve.position(r),
        }
    }

    pub fn c_dot(&self, s: f64) -> Vec2 {
        self.curve.tangent(self.reduce(s).0)
    }

    pub fn c_ddot(&self, s: f64) -> Option<Vec2> {
        self.curve.second(self.reduce(s).0)
    }

    pub fn v(&self, s: f64) -> Vec2 {
        self.velocity.velocity(self.reduce(s).0)
    }

    pub fn v_dot(&self, s: f64) -> Option<Vec2> {
        self.velocity.derivative(self.reduce(s).0)
    }

    fn w_base(&self, s: f64) -> Vec2 {
        match &self.w {
            WTable::Exact => self.velocity.antiderivative(s).unwrap_or(Vec2::ZERO),
            WTable::Table(t) => t.eval(s),
        }
    }

    /// `W(s) = ∫₀ˢ v`.
    pub fn w(&self, s: f64) -> Vec2 {
        let (r, k) = self.reduce(s);
        match self.period {
            Some(p) if k != 0.0 => self.w_base(r) + p.w_shift * k,
            _ => self.w_base(r),
        }
    }

    fn theta_base(&self, s: f64) -> f64 {
        let n = self.lift.len() - 1;
        let i = (((s - self.lift_start) / self.lift_step).round().max(0.0) as usize).min(n);
        let anchor = self.lift[i];
        anchor + wrap_angle(self.curve.tangent(s).angle() - anchor)
    }

    /// Continuous lift of the tangent angle.
    pub fn theta(&self, s: f64) -> f64 {
        let (r, k) = self.reduce(s);
        match self.period {
            Some(p) if k != 0.0 => self.theta_base(r) + p.winding * k,
            _ => self.theta_base(r),
        }
    }

    /// `μ = ⟨v, U⊥⟩`.
    pub fn mu(&self, s: f64) -> f64 {
        let r = self.reduce(s).0;
        let u = self
            .curve
            .tangent(r)
            .normalized()
            .unwrap_or(Vec2::new(1.0, 0.0));
        self.velocity.velocity(r).dot(u.perp()).clamp(-1.0, 1.0)
    }

    pub fn alpha_plus(&self, s: f64) -> f64 {
        self.theta(s) + self.mu(s).asin()
    }

    pub fn alpha_minus(&self, s: f64) -> f64 {
        self.theta(s) - self.mu(s).asin() - PI
    }

    /// `a₊ = v + ċ`.
    pub fn a_plus(&self, s: f64) -> Vec2 {
        let r = self.reduce(s).0;
        self.velocity.velocity(r) + self.curve.tangent(r)
    }

    /// `a₋ = v − ċ`.
    pub fn a_minus(&self, s: f64) -> Vec2 {
        let r = self.reduce(s).0;
        self.velocity.velocity(r) - self.curve.tangent(r)
    }

    /// `a₊'`, when second derivatives are available.
    pub fn a_plus_dot(&self, s: f64) -> Option<Vec2> {
        Some(self.v_dot(s)? + self.c_ddot(s)?)
    }

    /// `a₋'`, when second derivatives are available.
    pub fn a_minus_dot(&self, s: f64) -> Option<Vec2> {
        Some(self.v_dot(s)? - self.c_ddot(s)?)
    }

    /// `(|⟨ċ, v⟩|, ||ċ|² + |v|² − 1|)` at `s`.
    pub fn gauge_residual(&self, s: f64) -> (f64, f64) {
        let d = self.c_dot(s);
        let w = self.v(s);
        (d.dot(w).abs(), (d.norm_sq() + w.norm_sq() - 1.0).abs())
    }
}

/// Unwrapped lift of θ on a caller-supplied grid, with α±.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftTable {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub alpha_plus: Vec<f64>,
    pub alpha_minus: Vec<f64>,
}

/// Unwraps the tangent angle along `grid`, starting in `(−π, π]`.
pub fn angular_lift(data: &InitialData, grid: &[f64]) -> Result<LiftTable> {
    let mut theta = Vec::with_capacity(grid.len());
    for (i, &s) in grid.iter().enumerate() {
        data.check(s)?;
        let raw = data.c_dot(s).angle();
        if i == 0 {
            theta.push(raw);
            continue;
        }
        let prev = theta[i - 1];
        let step = wrap_angle(raw - prev);
        if step.abs() > PI - tolerance::UNWRAP {
            return Err(SheetError::GridTooCoarse {
                s0: grid[i - 1],
                s1: s,
                jump: step,
            });
        }
        theta.push(prev + step);
    }
    let (alpha_plus, alpha_minus) = grid
        .iter()
        .zip(&theta)
        .map(|(s, th)| {
            let a = data.mu(*s).asin();
            (th + a, th - a - PI)
        })
        .unzip();
    Ok(LiftTable {
        s: grid.to_vec(),
        theta,
        alpha_plus,
        alpha_minus,
    })
}

/// `(a₊(s), a₋(s)) = (v + ċ, v − ċ)`.
pub fn null_directions(data: &InitialData, s: f64) -> Result<(Vec2, Vec2)> {
    data.check(s)?;
    Ok((data.a_plus(s), data.a_minus(s)))
}
