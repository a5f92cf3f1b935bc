//! Closed-form initial data for the worked examples, each with whatever
//! exact reference data is known, and a regression runner comparing the
//! numerical pipeline against those references.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::evolution::{evolve, Sheet};
use crate::geometry::{Domain, Vec2, Window};
use crate::initial_data::{
    normalize_initial_data, AngleCurve, ConstantVelocity, CurveProvider, FnCurve, InitialData,
    NormalizeOptions, Piece, PiecewiseCurve, VelocityProvider, ZeroVelocity,
};
use crate::numerics::quadrature::integrate;
use crate::numerics::roots::bisect;
use crate::numerics::sequence::halton_rect;
use crate::singularity::{
    beta, classify_tangent_discontinuity, find_singular_set, CharacteristicDiamond,
    DiscontinuityKind, SingularSet,
};

/// Every entry name accepted by [`build`].
pub const NAMES: [&str; 10] = [
    "plane",
    "graph_sine",
    "doubly_periodic",
    "grim_reaper",
    "shrinking_circle",
    "cigar",
    "periodic_wedge",
    "cusp_reversal",
    "sheeting",
    "figure_eight",
];

/// Optional parameters. Unset fields take per-entry defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GalleryParams {
    /// Half cap length for `cigar`, half period for `periodic_wedge`.
    pub l: Option<f64>,
    /// Normal speed of `plane`.
    pub speed: Option<f64>,
    /// Parameter window for entries on the whole line.
    pub window: Option<(f64, f64)>,
}

pub type SheetFn = Arc<dyn Fn(f64, f64) -> Vec2 + Send + Sync>;
pub type ScalarSheetFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Known singular set in the `(s, t)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SingularReference {
    Empty,
    /// Full slices `t = first + k·spacing`.
    Times { first: f64, spacing: f64 },
    /// `{|t| ≥ l, |s| ≤ |t| − l}`.
    CigarRegion { l: f64 },
    /// `{(m l/2, n l/2) : m, n odd}`.
    Lattice { l: f64 },
}

impl SingularReference {
    /// Euclidean distance in `(s, t)` from a point to the reference set.
    pub fn distance(&self, s: f64, t: f64) -> f64 {
        match *self {
            SingularReference::Empty => f64::INFINITY,
            SingularReference::Times { first, spacing } => {
                let k = ((t - first) / spacing).round();
                (t - first - k * spacing).abs()
            }
            SingularReference::CigarRegion { l } => {
                let (x, y) = (s + t, s - t);
                let plus = (l - x).max(0.0).hypot((y + l).max(0.0));
                let minus = (x + l).max(0.0).hypot((l - y).max(0.0));
                plus.min(minus) / std::f64::consts::SQRT_2
            }
            SingularReference::Lattice { l } => {
                let h = 0.5 * l;
                let odd = |v: f64| {
                    let m = ((v / h - 1.0) / 2.0).round() * 2.0 + 1.0;
                    (v - m * h).abs()
                };
                odd(s).hypot(odd(t))
            }
        }
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        self.distance(s, t) == 0.0
    }
}

/// A tangent-discontinuity classification the example states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassificationReference {
    pub t0: f64,
    pub interval: (f64, f64),
    pub kind: DiscontinuityKind,
}

/// Exact facts known about an entry.
#[derive(Clone, Default)]
pub struct Reference {
    /// Closed-form `γ(s, t)`.
    pub gamma: Option<SheetFn>,
    pub singular: Option<SingularReference>,
    /// Closed-form image `γ(s, t)` of singular points.
    pub singular_image: Option<SheetFn>,
    /// Closed-form `|κ(s, t)|` of the slices.
    pub curvature: Option<ScalarSheetFn>,
    pub classification: Option<ClassificationReference>,
    /// A diamond on which the reference singular set is checked.
    pub diamond: Option<CharacteristicDiamond>,
}

impl std::fmt::Debug for Reference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reference")
            .field("gamma", &self.gamma.is_some())
            .field("singular", &self.singular)
            .field("curvature", &self.curvature.is_some())
            .field("classification", &self.classification)
            .field("diamond", &self.diamond)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: String,
    pub params: GalleryParams,
    pub data: Arc<InitialData>,
    pub reference: Reference,
}

/// Builds a gallery entry by name.
pub fn build(name: &str, params: &GalleryParams) -> Result<GalleryEntry> {
    let window = |default: (f64, f64)| {
        let (a, b) = params.window.unwrap_or(default);
        Window::new(a, b)
    };
    let mut reference = Reference::default();
    let data = match name {
        "plane" => {
            let w = params.speed.unwrap_or(0.6);
            if !(w.abs() < 1.0) {
                return Err(SheetError::InvalidInput(format!("plane speed must satisfy |w| < 1, got {w}")));
            }
            let q = (1.0 - w * w).sqrt();
            let curve = FnCurve::new(move |s| Vec2::new(q * s, 0.0), move |_| Vec2::new(q, 0.0), whole_line())
                .with_second(|_| Vec2::ZERO);
            reference.gamma = Some(Arc::new(move |s, t| Vec2::new(q * s, w * t)));
            reference.singular = Some(SingularReference::Empty);
            reference.curvature = Some(Arc::new(|_, _| 0.0));
            reference.diamond = Some(CharacteristicDiamond::new(-5.0, 5.0)?);
            InitialData::from_normalized(Arc::new(curve), Arc::new(ConstantVelocity(Vec2::new(0.0, w))), window((-12.0, 12.0)))?
        }
        "graph_sine" => {
            let w = window((-12.0, 12.0));
            let curve = AngleCurve::new(f64::sin, f64::cos, 0.0, Vec2::ZERO, (w.min, w.max), whole_line(), vec![]);
            reference.singular = Some(SingularReference::Empty);
            reference.diamond = Some(CharacteristicDiamond::new(-5.0, 5.0)?);
            at_rest(curve, w)?
        }
        "doubly_periodic" => {
            let period = 1.0 / bessel_j0(0.6);
            let k = 2.0 * PI / period;
            let curve = AngleCurve::new(
                move |s| 0.6 * (k * s).sin(),
                move |s| 0.6 * k * (k * s).cos(),
                0.0,
                Vec2::ZERO,
                (0.0, period),
                Domain::Periodic { period, closed: false },
                vec![],
            );
            reference.singular = Some(SingularReference::Empty);
            reference.diamond = Some(CharacteristicDiamond::new(-3.0, 3.0)?);
            at_rest(curve, Window::new(f64::NEG_INFINITY, f64::INFINITY))?
        }
        "grim_reaper" => {
            let w = window((-12.0, 12.0));
            let curve = AngleCurve::new(
                grim_reaper_angle,
                grim_reaper_angle_dot,
                -1.0,
                Vec2::new(0.0, 1.0),
                (w.min, w.max),
                whole_line(),
                vec![-1.0],
            );
            reference.singular = Some(SingularReference::Empty);
            reference.diamond = Some(CharacteristicDiamond::new(-5.0, 5.0)?);
            at_rest(curve, w)?
        }
        "shrinking_circle" => {
            let curve = FnCurve::new(
                |s: f64| Vec2::new(s.cos(), s.sin()),
                |s: f64| Vec2::new(-s.sin(), s.cos()),
                Domain::Periodic { period: 2.0 * PI, closed: true },
            )
            .with_second(|s: f64| Vec2::new(-s.cos(), -s.sin()));
            reference.gamma = Some(Arc::new(|s: f64, t: f64| Vec2::new(t.cos() * s.cos(), t.cos() * s.sin())));
            reference.singular = Some(SingularReference::Times { first: PI / 2.0, spacing: PI });
            reference.curvature = Some(Arc::new(|_, t: f64| 1.0 / t.cos().abs()));
            reference.diamond = Some(CharacteristicDiamond::new(-2.5, 2.5)?);
            at_rest(curve, Window::new(f64::NEG_INFINITY, f64::INFINITY))?
        }
        "cigar" => {
            let l = positive_l(params.l.unwrap_or(1.0))?;
            let b = cap_shape(1.0 / (2.0 * l))?;
            let w = window((-12.0, 12.0));
            let theta = move |s: f64| {
                if s <= -l {
                    -PI / 2.0
                } else if s >= l {
                    PI / 2.0
                } else {
                    -PI / 2.0 + PI * cap_h((s + l) / (2.0 * l), b)
                }
            };
            let theta_dot = move |s: f64| {
                if s <= -l || s >= l {
                    0.0
                } else {
                    PI * cap_h_dot((s + l) / (2.0 * l), b) / (2.0 * l)
                }
            };
            let curve =
                AngleCurve::new(theta, theta_dot, -l, Vec2::new(-0.5, 0.0), (w.min, w.max), whole_line(), vec![-l, l]);
            reference.singular = Some(SingularReference::CigarRegion { l });
            reference.singular_image = Some(Arc::new(move |_, t: f64| Vec2::new(0.0, t.abs() - l)));
            reference.diamond = Some(CharacteristicDiamond::new(-3.0, 3.0)?);
            at_rest(curve, w)?
        }
        "periodic_wedge" => {
            let l = positive_l(params.l.unwrap_or(PI))?;
            let b = cap_shape(2.0 / l)?;
            let theta = move |s: f64| {
                if s <= l {
                    PI / 2.0 - PI * cap_h(s / l, b)
                } else {
                    -PI / 2.0 + PI * cap_h((s - l) / l, b)
                }
            };
            let theta_dot = move |s: f64| {
                if s <= l {
                    -PI * cap_h_dot(s / l, b) / l
                } else {
                    PI * cap_h_dot((s - l) / l, b) / l
                }
            };
            let period = 2.0 * l;
            let periodic = move |f: &dyn Fn(f64) -> f64, s: f64| f(s - (s / period).floor() * period);
            let curve = AngleCurve::new(
                move |s| periodic(&theta, s),
                move |s| periodic(&theta_dot, s),
                0.0,
                Vec2::new(-1.0, 0.0),
                (0.0, period),
                Domain::Periodic { period, closed: false },
                vec![l],
            );
            reference.singular = Some(SingularReference::Lattice { l });
            reference.singular_image = Some(Arc::new(move |s: f64, _| Vec2::new(2.0 * s / l - 1.0, 0.0)));
            reference.diamond = Some(CharacteristicDiamond::new(-2.0 * l, 2.0 * l)?);
            at_rest(curve, Window::new(f64::NEG_INFINITY, f64::INFINITY))?
        }
        "cusp_reversal" => {
            let curve = cusp_reversal_curve();
            curve.check_c1(name, 1e-12)?;
            reference.classification = Some(ClassificationReference {
                t0: PI / 2.0,
                interval: (PI / 2.0 - 0.3, 1.5 * PI + 0.3),
                kind: DiscontinuityKind::C1CurveWithTangentExtension,
            });
            at_rest(curve, window((-6.0, 14.0)))?
        }
        "sheeting" => {
            let curve = sheeting_curve();
            curve.check_c1(name, 1e-12)?;
            reference.classification = Some(ClassificationReference {
                t0: 1.5 * PI,
                interval: (1.5 * PI, 2.5 * PI),
                kind: DiscontinuityKind::DegenerateNoExtension,
            });
            at_rest(curve, window((-4.0, 18.0)))?
        }
        "figure_eight" => {
            let curve = FnCurve::new(
                |s: f64| Vec2::new(s.sin(), s.sin() * s.cos()),
                |s: f64| Vec2::new(s.cos(), (2.0 * s).cos()),
                Domain::Periodic { period: 2.0 * PI, closed: true },
            )
            .with_second(|s: f64| Vec2::new(-s.sin(), -2.0 * (2.0 * s).sin()));
            normalize_initial_data(Arc::new(curve), Arc::new(ZeroVelocity), &NormalizeOptions::default())?
        }
        other => return Err(SheetError::UnknownName(other.to_string())),
    };
    Ok(GalleryEntry { name: name.to_string(), params: *params, data: Arc::new(data), reference })
}

/// Builds every entry with default parameters.
pub fn build_all() -> Result<Vec<GalleryEntry>> {
    NAMES.iter().map(|n| build(n, &GalleryParams::default())).collect()
}

fn whole_line() -> Domain {
    Domain::Interval { min: f64::NEG_INFINITY, max: f64::INFINITY }
}

fn at_rest(curve: impl CurveProvider + 'static, window: Window) -> Result<InitialData> {
    let v: Arc<dyn VelocityProvider> = Arc::new(ZeroVelocity);
    InitialData::from_normalized(Arc::new(curve), v, window)
}

fn positive_l(l: f64) -> Result<f64> {
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(SheetError::InvalidInput(format!("L must be positive, got {l}")))
    }
}

/// `J₀(x)` by its power series; exact to rounding for `|x| ≤ 2`.
fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..40 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

const GRIM_KAPPA: f64 = 0.031;

fn grim_reaper_angle(s: f64) -> f64 {
    if s <= -1.0 {
        return -PI / 2.0;
    }
    let u = s + 1.0;
    PI / 2.0 - 2.0 * PI / (1.0 + (2.0 * GRIM_KAPPA * u * u * u).exp())
}

fn grim_reaper_angle_dot(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    let u = s + 1.0;
    let e = (2.0 * GRIM_KAPPA * u * u * u).exp();
    if !e.is_finite() {
        return 0.0;
    }
    2.0 * PI * e * 6.0 * GRIM_KAPPA * u * u / ((1.0 + e) * (1.0 + e))
}

/// Cap profile `h(u) = u − b sin(2πu)/(2π)`, a monotone map of `[0,1]`
/// onto itself for `|b| ≤ 1` with `h(1 − u) = 1 − h(u)`.
fn cap_h(u: f64, b: f64) -> f64 {
    u - b * (2.0 * PI * u).sin() / (2.0 * PI)
}

fn cap_h_dot(u: f64, b: f64) -> f64 {
    1.0 - b * (2.0 * PI * u).cos()
}

/// The `b` for which `∫₀¹ sin(π h(u)) du` equals `chord`, i.e. the cap
/// spans the prescribed chord per unit length.
fn cap_shape(chord: f64) -> Result<f64> {
    let mean = |b: f64| integrate(|u: f64| (PI * cap_h(u, b)).sin(), 0.0, 1.0, 1e-15) - chord;
    let (lo, hi) = (mean(1.0), mean(-1.0));
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(SheetError::InvalidInput(format!(
            "no admissible cap: required mean {chord} outside [{}, {}]",
            lo + chord,
            hi + chord
        )));
    }
    if mean(0.0) == 0.0 {
        return Ok(0.0);
    }
    bisect(mean, -1.0, 1.0, 1e-15)
        .ok_or_else(|| SheetError::InvalidInput("cap shape search failed".into()))
}

fn cusp_reversal_curve() -> PiecewiseCurve {
    let v = Vec2::new;
    PiecewiseCurve::new(vec![
        Piece::new(f64::NEG_INFINITY, move |s| v(s, -1.0), move |_| v(1.0, 0.0), move |_| Vec2::ZERO),
        Piece::new(
            0.0,
            move |s: f64| v(s.sin(), -s.cos()),
            move |s: f64| v(s.cos(), s.sin()),
            move |s: f64| v(-s.sin(), s.cos()),
        ),
        Piece::new(
            2.0 * PI,
            move |s: f64| v(0.5 * (2.0 * s).sin(), -0.5 * (1.0 + (2.0 * s).cos())),
            move |s: f64| v((2.0 * s).cos(), (2.0 * s).sin()),
            move |s: f64| v(-2.0 * (2.0 * s).sin(), 2.0 * (2.0 * s).cos()),
        ),
        Piece::new(
            2.25 * PI,
            move |s| v(0.5, -0.5 + s - 2.25 * PI),
            move |_| v(0.0, 1.0),
            move |_| Vec2::ZERO,
        ),
    ])
}

fn sheeting_curve() -> PiecewiseCurve {
    let v = Vec2::new;
    PiecewiseCurve::new(vec![
        Piece::new(f64::NEG_INFINITY, move |s| v(-s, -1.0), move |_| v(-1.0, 0.0), move |_| Vec2::ZERO),
        Piece::new(
            0.0,
            move |s: f64| v(-s.sin(), -s.cos()),
            move |s: f64| v(-s.cos(), s.sin()),
            move |s: f64| v(s.sin(), s.cos()),
        ),
        Piece::new(
            0.5 * PI,
            move |s: f64| {
                let u = s - 0.5 * PI;
                v(-2.0 + u.cos(), u.sin())
            },
            move |s: f64| {
                let u = s - 0.5 * PI;
                v(-u.sin(), u.cos())
            },
            move |s: f64| {
                let u = s - 0.5 * PI;
                v(-u.cos(), -u.sin())
            },
        ),
        Piece::new(
            PI,
            move |s: f64| {
                let u = s - PI;
                v(-2.0 - u.sin(), 2.0 - u.cos())
            },
            move |s: f64| {
                let u = s - PI;
                v(-u.cos(), u.sin())
            },
            move |s: f64| {
                let u = s - PI;
                v(u.sin(), u.cos())
            },
        ),
        Piece::new(
            2.0 * PI,
            move |s: f64| {
                let u = 0.5 * (s - 2.0 * PI);
                v(-2.0 + 2.0 * u.sin(), 1.0 + 2.0 * u.cos())
            },
            move |s: f64| {
                let u = 0.5 * (s - 2.0 * PI);
                v(u.cos(), -u.sin())
            },
            move |s: f64| {
                let u = 0.5 * (s - 2.0 * PI);
                v(-0.5 * u.sin(), -0.5 * u.cos())
            },
        ),
        Piece::new(
            3.0 * PI,
            move |s: f64| {
                let u = s - 3.0 * PI;
                v(1.0 - u.cos(), 1.0 - u.sin())
            },
            move |s: f64| {
                let u = s - 3.0 * PI;
                v(u.sin(), -u.cos())
            },
            move |s: f64| {
                let u = s - 3.0 * PI;
                v(u.cos(), u.sin())
            },
        ),
        Piece::new(
            3.5 * PI,
            move |s: f64| {
                let u = s - 3.5 * PI;
                v(1.0 + u.sin(), -1.0 + u.cos())
            },
            move |s: f64| {
                let u = s - 3.5 * PI;
                v(u.cos(), -u.sin())
            },
            move |s: f64| {
                let u = s - 3.5 * PI;
                v(-u.sin(), -u.cos())
            },
        ),
        Piece::new(4.0 * PI, move |s| v(2.0, -1.0 - (s - 4.0 * PI)), move |_| v(0.0, -1.0), move |_| Vec2::ZERO),
    ])
}

/// One named comparison in a regression report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionCheck {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionReport {
    pub entry: String,
    pub checks: Vec<RegressionCheck>,
    pub max_deviation: f64,
    pub passed: bool,
}

impl RegressionReport {
    fn push(&mut self, name: &str, deviation: f64, tolerance: f64) {
        let passed = deviation <= tolerance;
        self.passed &= passed;
        if deviation.is_finite() {
            self.max_deviation = self.max_deviation.max(deviation);
        } else {
            self.max_deviation = f64::INFINITY;
        }
        self.checks.push(RegressionCheck { name: name.to_string(), max_deviation: deviation, tolerance, passed });
    }

    pub fn check(&self, name: &str) -> Option<&RegressionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sample points for regressions: a Halton set on a rectangle inside the
/// window, restricted to the data's window for every slice.
fn regression_points(data: &InitialData, n: usize) -> Vec<(f64, f64)> {
    let w = data.window();
    let (s0, s1) = if w.min.is_finite() { (w.min.max(-6.0), w.max.min(6.0)) } else { (-6.0, 6.0) };
    let half = 0.5 * (s1 - s0);
    let tmax = (0.45 * half).min(2.0);
    let mid = 0.5 * (s0 + s1);
    halton_rect(n, (mid - 0.5 * half, mid + 0.5 * half), (-tmax, tmax))
}

/// Runs the numerical pipeline on an entry and compares it with every
/// reference the entry carries. Failures are reported, never raised.
pub fn run_regression(entry: &GalleryEntry) -> RegressionReport {
    let mut report =
        RegressionReport { entry: entry.name.clone(), checks: Vec::new(), max_deviation: 0.0, passed: true };
    let data = &entry.data;
    let sheet = evolve(data.clone());
    let pts = regression_points(data, 2000);

    let mut gauge = 0.0f64;
    for &(s, t) in &pts {
        match sheet.first(s, t) {
            Ok(j) => {
                gauge = gauge.max(j.gs.dot(j.gt).abs()).max((j.gs.norm_sq() + j.gt.norm_sq() - 1.0).abs());
            }
            Err(_) => gauge = f64::INFINITY,
        }
    }
    report.push("gauge", gauge, data.tolerances().gauge);

    let r = &entry.reference;
    if let Some(g) = &r.gamma {
        let dev = pts
            .iter()
            .map(|&(s, t)| sheet.eval(s, t).map_or(f64::INFINITY, |p| p.distance(g(s, t))))
            .fold(0.0, f64::max);
        report.push("gamma_closed_form", dev, 1e-10);
    }

    if let Some(k) = &r.curvature {
        let dev = pts
            .iter()
            .filter(|(_, t)| t.abs() <= 1.4)
            .map(|&(s, t)| match crate::curvature::cross_section_curvature(&sheet, s, t) {
                Ok(c) => (c.kappa_std.abs() - k(s, t)).abs(),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        report.push("curvature_closed_form", dev, 1e-8);
    }

    if let (Some(reference), Some(diamond)) = (r.singular, r.diamond) {
        let step = 1e-2;
        match find_singular_set(data, diamond, step) {
            Ok(set) => singular_checks(&mut report, data, &set, reference, step),
            Err(_) => report.push("singular_set", f64::INFINITY, 0.0),
        }
    }

    if let Some(c) = r.classification {
        let b = beta(data.clone());
        let dev = match classify_tangent_discontinuity(&b, c.t0, c.interval) {
            Ok(found) if found.kind == c.kind => 0.0,
            _ => 1.0,
        };
        report.push("classification", dev, 0.0);
    }
    report
}

fn singular_checks(
    report: &mut RegressionReport,
    data: &Arc<InitialData>,
    set: &SingularSet,
    reference: SingularReference,
    step: f64,
) {
    match reference {
        SingularReference::Empty => {
            report.push("singular_points", set.points.len() as f64, 0.0);
        }
        SingularReference::Times { first, .. } => {
            let far = set.points.iter().map(|p| reference.distance(p.s, p.t)).fold(0.0, f64::max);
            report.push("singular_points_on_reference", far, step);
            let b = beta(data.clone());
            let t_star = bisect(|t| b.sin_half(0.0, t), first - 0.1, first + 0.1, 1e-15);
            report.push("singular_time", t_star.map_or(f64::INFINITY, |t| (t - first).abs()), 1e-9);
        }
        SingularReference::CigarRegion { .. } => {
            let far = set.points.iter().map(|p| reference.distance(p.s, p.t)).fold(0.0, f64::max);
            report.push("singular_points_on_reference", far, step);
            // Away from a one-cell band around the boundary, hit cells must
            // match the reference region exactly.
            let nodes = &set.x_nodes;
            let mut mismatches = 0usize;
            for j in 0..nodes.len() - 1 {
                for i in 0..nodes.len() - 1 {
                    let ((x0, x1), (y0, y1)) = set.cell(i, j);
                    let (x, y) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
                    let (s, t) = (0.5 * (x + y), 0.5 * (x - y));
                    let d = reference.distance(s, t);
                    let inside = d == 0.0;
                    let depth = inside_depth(reference, s, t);
                    if (inside && depth > 1.5 * step) || (!inside && d > 1.5 * step) {
                        if set.hit_at_null(x, y) != inside {
                            mismatches += 1;
                        }
                    }
                }
            }
            report.push("singular_region_cells", mismatches as f64, 0.0);
        }
        SingularReference::Lattice { .. } => {
            let far = set.points.iter().map(|p| reference.distance(p.s, p.t)).fold(0.0, f64::max);
            report.push("singular_points_on_reference", far, 1e-6);
        }
    }
}

/// Distance from a point inside the cigar region to its boundary.
fn inside_depth(reference: SingularReference, s: f64, t: f64) -> f64 {
    match reference {
        SingularReference::CigarRegion { l } => {
            let (x, y) = (s + t, s - t);
            let plus = (x - l).min(-l - y);
            let minus = (-l - x).min(y - l);
            plus.max(minus).max(0.0) / std::f64::consts::SQRT_2
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_is_normalized() {
        for e in build_all().unwrap() {
            let (lo, hi) = e.data.base_range();
            let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-3.0, 3.0) };
            for s in crate::geometry::linspace(lo, hi, 101) {
                let (a, b) = e.data.gauge_residual(s);
                assert!(a < 1e-9 && b < 1e-9, "{} at {s}: {a} {b}", e.name);
            }
        }
        assert!(matches!(build("nope", &GalleryParams::default()), Err(SheetError::UnknownName(_))));
    }

    #[test]
    fn bessel_series() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-16);
        assert!((bessel_j0(0.6) - 0.912_004_863_497_211).abs() < 1e-14);
    }

    #[test]
    fn doubly_periodic_translates_by_one() {
        let e = build("doubly_periodic", &GalleryParams::default()).unwrap();
        let period = 1.0 / bessel_j0(0.6);
        let shift = e.data.c(period + 0.3) - e.data.c(0.3);
        assert!(shift.distance(Vec2::new(1.0, 0.0)) < 1e-12, "{shift:?}");
    }

    #[test]
    fn cigar_legs_and_cap() {
        for l in [PI / 4.0, 1.0, 1.2] {
            let e = build("cigar", &GalleryParams { l: Some(l), ..Default::default() }).unwrap();
            let d = &e.data;
            assert!(d.c(-l - 2.0).distance(Vec2::new(-0.5, 2.0)) < 1e-12);
            assert!(d.c(l + 3.0).distance(Vec2::new(0.5, 3.0)) < 1e-12, "{:?}", d.c(l + 3.0));
        }
        assert!(build("cigar", &GalleryParams { l: Some(3.0), ..Default::default() }).is_err());
        assert!(build("cigar", &GalleryParams { l: Some(-1.0), ..Default::default() }).is_err());
    }

    #[test]
    fn wedge_vertices() {
        let l = PI;
        let e = build("periodic_wedge", &GalleryParams::default()).unwrap();
        for j in -3..4 {
            let p = e.data.c(j as f64 * l);
            assert!(p.distance(Vec2::new(2.0 * j as f64 - 1.0, 0.0)) < 1e-12, "{j}: {p:?}");
        }
    }

    #[test]
    fn grim_reaper_angle_range() {
        assert_eq!(grim_reaper_angle(-5.0), -PI / 2.0);
        assert!(grim_reaper_angle(5.0) < PI / 2.0);
        let h = 1e-6;
        for s in [-0.5, 0.3, 2.0] {
            let fd = (grim_reaper_angle(s + h) - grim_reaper_angle(s - h)) / (2.0 * h);
            assert!((fd - grim_reaper_angle_dot(s)).abs() < 1e-7);
        }
    }

    #[test]
    fn singular_reference_distances() {
        let c = SingularReference::CigarRegion { l: 1.0 };
        assert_eq!(c.distance(0.0, 2.0), 0.0);
        assert_eq!(c.distance(0.5, -2.0), 0.0);
        assert!((c.distance(0.0, 0.5) - 0.5).abs() < 1e-15);
        let w = SingularReference::Lattice { l: 2.0 };
        assert_eq!(w.distance(1.0, -3.0), 0.0);
        assert!((w.distance(0.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_regression() {
        let e = build("shrinking_circle", &GalleryParams::default()).unwrap();
        let r = run_regression(&e);
        assert!(r.passed, "{r:#?}");
        assert!(r.check("singular_time").unwrap().max_deviation <= 1e-9);
    }

    #[test]
    fn plane_regression_is_exact() {
        let r = run_regression(&build("plane", &GalleryParams::default()).unwrap());
        assert!(r.passed, "{r:#?}");
        assert!(r.max_deviation < 1e-14);
    }
}
