//! The cross-section unit tangent `U = sgn(sin(β/2)) e`, sign changes of
//! `sin(β/2)` along a time slice, and what they do to the curve.

use serde::Serialize;

use super::BetaField;
use crate::error::{Result, SheetError};
use crate::geometry::{linspace_max_step, Vec2};
use crate::numerics::roots::{bisect, bisect_predicate};
use crate::tolerance;

/// `U(s,t)`, or `None` within `τ_sing` of the singular set.
pub fn unit_tangent(beta: &BetaField, s: f64, t: f64) -> Result<Option<Vec2>> {
    beta.check(s, t)?;
    let sh = beta.sin_half(s, t);
    if sh.abs() <= beta.data().tolerances().sing {
        return Ok(None);
    }
    Ok(Some(beta.e(s, t) * sh.signum()))
}

/// Grid resolution for the slice scans.
#[derive(Clone, Copy, Debug)]
pub struct SignChangeOptions {
    pub t_step: f64,
    pub s_step: f64,
}

impl Default for SignChangeOptions {
    fn default() -> Self {
        Self { t_step: 1e-2, s_step: 1e-3 }
    }
}

/// The first time at which `sin(β/2)` takes both signs on a slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignChange {
    pub t_star: f64,
    /// A parameter with `sin(β/2) < 0` at (just past) `t_star`.
    pub s_negative: f64,
    /// A parameter with `sin(β/2) > 0` at (just past) `t_star`.
    pub s_positive: f64,
    /// Scan times at which a sign change first appeared after an interval without one.
    pub candidates: Vec<f64>,
}

/// The part of `[a, b]` on which the slice at time `t` stays in the window.
fn slice_range(beta: &BetaField, (a, b): (f64, f64), t: f64) -> Option<(f64, f64)> {
    let w = beta.data().window();
    let lo = a.max(w.min + t.abs());
    let hi = b.min(w.max - t.abs());
    (lo < hi).then_some((lo, hi))
}

/// Witnesses of both signs on the slice, if present.
fn both_signs(beta: &BetaField, range: (f64, f64), t: f64, step: f64) -> Option<(f64, f64)> {
    let (lo, hi) = slice_range(beta, range, t)?;
    let thr = beta.data().tolerances().sing;
    let (mut neg, mut pos) = (None, None);
    for s in linspace_max_step(lo, hi, step) {
        let v = beta.sin_half(s, t);
        if v < -thr && neg.is_none() {
            neg = Some(s);
        } else if v > thr && pos.is_none() {
            pos = Some(s);
        }
        if let (Some(n), Some(p)) = (neg, pos) {
            return Some((n, p));
        }
    }
    None
}

/// Scans `t_range` (in the given direction) for the earliest time at which
/// `sin(β(·,t)/2)` changes sign on `s_interval`, refined by bisection.
pub fn find_tangent_sign_change_time(
    beta: &BetaField,
    t_range: (f64, f64),
    s_interval: (f64, f64),
    opts: &SignChangeOptions,
) -> Result<SignChange> {
    let (t0, t1) = t_range;
    let n = (((t1 - t0).abs() / opts.t_step).ceil() as usize).max(1);
    let ts: Vec<f64> = crate::geometry::linspace(t0, t1, n + 1);
    let mut candidates = Vec::new();
    let mut first: Option<(f64, f64)> = None;
    let mut prev_had = false;
    let mut prev_t = t0;
    for &t in &ts {
        let has = both_signs(beta, s_interval, t, opts.s_step).is_some();
        if has && !prev_had {
            candidates.push(t);
            if first.is_none() {
                first = Some((prev_t, t));
            }
        }
        prev_had = has;
        prev_t = t;
    }
    let Some((before, at)) = first else {
        return Err(SheetError::NotFound { t0, t1 });
    };
    let probe = |t: f64| both_signs(beta, s_interval, t, opts.s_step).is_some();
    let t_star = if before == at || probe(before) {
        at
    } else {
        bisect_predicate(probe, before, at, 1e-12).1
    };
    let (s_negative, s_positive) = both_signs(beta, s_interval, t_star, opts.s_step).expect("predicate holds");
    Ok(SignChange { t_star, s_negative, s_positive, candidates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscontinuityKind {
    /// The slice is `C¹` and `U` extends continuously across the zero set.
    C1CurveWithTangentExtension,
    /// A transversal zero: a pair of cusps.
    CuspPair,
    /// `U` admits no continuous extension (including retraced images).
    DegenerateNoExtension,
}

impl DiscontinuityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::C1CurveWithTangentExtension => "c1_curve_with_tangent_extension",
            Self::CuspPair => "cusp_pair",
            Self::DegenerateNoExtension => "degenerate_no_extension",
        }
    }

    fn severity(self) -> u8 {
        match self {
            Self::C1CurveWithTangentExtension => 0,
            Self::CuspPair => 1,
            Self::DegenerateNoExtension => 2,
        }
    }
}

/// One zero set `[r1, r2]` of `sin(β/2)` separating opposite signs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroSet {
    pub r1: f64,
    pub r2: f64,
    /// `α₊(r1 + t0) − α₊(r2 + t0)`.
    pub delta: f64,
    /// The nearest integer to `delta / π`.
    pub m: i64,
    pub kind: DiscontinuityKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub kind: DiscontinuityKind,
    pub r1: f64,
    pub r2: f64,
    pub m: i64,
    pub zero_sets: Vec<ZeroSet>,
}

/// [`classify_tangent_discontinuity_with`] at a slice step of 1e−3.
pub fn classify_tangent_discontinuity(beta: &BetaField, t0: f64, s_interval: (f64, f64)) -> Result<Classification> {
    classify_tangent_discontinuity_with(beta, t0, s_interval, 1e-3)
}

/// Classifies every sign change of `sin(β(·,t0)/2)` on `s_interval`.
///
/// A zero interval `[r1, r2]` gives a `C¹` curve with a continuous tangent
/// when `α₊` turns by an odd multiple of π across it. A single transversal
/// zero is a cusp pair unless the two branches leaving it trace the same
/// image, in which case the tangent flips along a `C¹` image. The reported
/// kind is the most severe one found.
pub fn classify_tangent_discontinuity_with(
    beta: &BetaField,
    t0: f64,
    s_interval: (f64, f64),
    step: f64,
) -> Result<Classification> {
    let (lo, hi) = slice_range(beta, s_interval, t0).ok_or(SheetError::NoSignChange { t: t0 })?;
    let thr = beta.data().tolerances().sing;
    let f = |s: f64| beta.sin_half(s, t0);
    let sign = |v: f64| -> i8 {
        if v > thr {
            1
        } else if v < -thr {
            -1
        } else {
            0
        }
    };
    let s = linspace_max_step(lo, hi, step);
    let signs: Vec<i8> = s.iter().map(|x| sign(f(*x))).collect();

    // (index of last nonzero sample, index of first opposite-sign sample)
    let mut brackets = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &sg) in signs.iter().enumerate() {
        if sg == 0 {
            continue;
        }
        if let Some(p) = last {
            if signs[p] == -sg {
                brackets.push((p, i));
            }
        }
        last = Some(i);
    }
    if brackets.is_empty() {
        return Err(SheetError::NoSignChange { t: t0 });
    }

    let mut zero_sets = Vec::with_capacity(brackets.len());
    for (k, &(p, q)) in brackets.iter().enumerate() {
        let (r1, r2) = if q == p + 1 {
            let r = bisect(f, s[p], s[q], 1e-14).unwrap_or(0.5 * (s[p] + s[q]));
            (r, r)
        } else {
            let sp = signs[p];
            let r1 = bisect_predicate(|x| sign(f(x)) == sp, s[p], s[p + 1], 1e-13).1;
            let sq = signs[q];
            let r2 = bisect_predicate(|x| sign(f(x)) == sq, s[q - 1], s[q], 1e-13).0;
            (r1, r2.max(r1))
        };
        let d = beta.data();
        let delta = d.alpha_plus(r1 + t0) - d.alpha_plus(r2 + t0);
        let ratio = delta / std::f64::consts::PI;
        let m = ratio.round() as i64;
        let kind = if r2 - r1 > 1e-6 {
            if (ratio - m as f64).abs() <= tolerance::ANGLE && m % 2 != 0 {
                DiscontinuityKind::C1CurveWithTangentExtension
            } else {
                DiscontinuityKind::DegenerateNoExtension
            }
        } else {
            let left_limit = if k == 0 { lo } else { zero_sets.last().map_or(lo, |z: &ZeroSet| z.r2) };
            let right_limit = brackets.get(k + 1).map_or(hi, |b| s[b.0]);
            if branches_coincide(beta, t0, r1, left_limit, right_limit) {
                DiscontinuityKind::DegenerateNoExtension
            } else {
                DiscontinuityKind::CuspPair
            }
        };
        zero_sets.push(ZeroSet { r1, r2, delta, m, kind });
    }
    let worst = zero_sets.iter().copied().max_by_key(|z| z.kind.severity()).unwrap();
    Ok(Classification { kind: worst.kind, r1: worst.r1, r2: worst.r2, m: worst.m, zero_sets })
}

/// Whether the slice leaving `r` to the right retraces the slice arriving
/// from the left, to a relative tolerance of 1e−6.
fn branches_coincide(beta: &BetaField, t0: f64, r: f64, left: f64, right: f64) -> bool {
    let reach = (0.9 * (r - left).min(right - r)).min(0.5);
    if !(reach > 1e-6) {
        return false;
    }
    let d = beta.data();
    let gamma = |s: f64| (d.c(s + t0) + d.c(s - t0) + d.w(s + t0) - d.w(s - t0)) * 0.5;
    let left_pts: Vec<Vec2> = linspace_max_step(r - reach, r, reach / 2000.0).iter().map(|s| gamma(*s)).collect();
    let apex = gamma(r);
    let extent = left_pts.iter().map(|p| p.distance(apex)).fold(0.0, f64::max);
    if extent == 0.0 {
        return false;
    }
    let mut worst = 0.0f64;
    for s in linspace_max_step(r, r + 0.5 * reach, reach / 40.0).into_iter().skip(1) {
        let p = gamma(s);
        let dist = left_pts
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(dist);
    }
    worst <= 1e-6 * extent
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let l = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * l)
}
