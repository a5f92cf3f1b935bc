//! Embeddedness tools: a direction `ω` separating the null directions on a
//! diamond, the graph check that follows from it, and curve
//! self-intersection detection.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::evolution::Sheet;
use crate::geometry::{linspace, linspace_max_step, Domain, Vec2};
use crate::initial_data::{CurveProvider, InitialData};
use crate::singularity::CharacteristicDiamond;

const MARGIN_STEP: f64 = 1e-3;
const WITNESS_GRID: usize = 256;
const INTERSECT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    Separated,
    Overlapping,
}

impl Separation {
    pub fn as_str(self) -> &'static str {
        match self {
            Separation::Separated => "separated",
            Separation::Overlapping => "overlapping",
        }
    }
}

/// A pair `(ξ, η)` where `a₊(ξ)` and `a₋(η)` (nearly) coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapWitness {
    pub xi: f64,
    pub eta: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationResult {
    pub verdict: Separation,
    /// Lifted angular range covered by `α₊` and `α₋ + π` on the interval.
    pub arc: (f64, f64),
    pub omega: Option<Vec2>,
    /// `min ⟨a₊(ξ) − a₋(η), ω⟩` over the sampled product grid.
    pub margin: f64,
    pub witness: Option<OverlapWitness>,
}

impl SeparationResult {
    pub fn arc_width(&self) -> f64 {
        self.arc.1 - self.arc.0
    }
}

/// Looks for `ω` with `⟨a₊(ξ) − a₋(η), ω⟩ > 0` for all `ξ, η ∈ [s1, s2]`.
///
/// The product-grid minimum splits into `min ⟨a₊, ω⟩ − max ⟨a₋, ω⟩`, so it
/// is computed from two one-dimensional scans.
pub fn separating_direction(data: &InitialData, s1: f64, s2: f64) -> Result<SeparationResult> {
    if !(s1 < s2) {
        return Err(SheetError::InvalidInput(format!("need s1 < s2, got [{s1}, {s2}]")));
    }
    let n = (((s2 - s1) / MARGIN_STEP).ceil() as usize).max(2000) + 1;
    let nodes = linspace(s1, s2, n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in &nodes {
        let (p, m) = (data.alpha_plus(s), data.alpha_minus(s) + std::f64::consts::PI);
        lo = lo.min(p).min(m);
        hi = hi.max(p).max(m);
    }
    let mid = 0.5 * (lo + hi);
    let omega = Vec2::from_angle(mid);
    let plus = nodes.par_iter().map(|&s| data.a_plus(s).dot(omega)).reduce(|| f64::INFINITY, f64::min);
    let minus = nodes.par_iter().map(|&s| data.a_minus(s).dot(omega)).reduce(|| f64::NEG_INFINITY, f64::max);
    let margin = plus - minus;
    if margin > 0.0 && hi - lo < std::f64::consts::PI {
        return Ok(SeparationResult { verdict: Separation::Separated, arc: (lo, hi), omega: Some(omega), margin, witness: None });
    }
    let witness = overlap_witness(data, s1, s2);
    Ok(SeparationResult { verdict: Separation::Overlapping, arc: (lo, hi), omega: None, margin, witness: Some(witness) })
}

fn overlap_witness(data: &InitialData, s1: f64, s2: f64) -> OverlapWitness {
    let grid = linspace(s1, s2, WITNESS_GRID);
    let plus: Vec<Vec2> = grid.iter().map(|&s| data.a_plus(s)).collect();
    let minus: Vec<Vec2> = grid.iter().map(|&s| data.a_minus(s)).collect();
    let (i, j, _) = (0..WITNESS_GRID)
        .into_par_iter()
        .map(|i| {
            let (j, d) = minus
                .iter()
                .enumerate()
                .map(|(j, m)| (j, plus[i].distance(*m)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            (i, j, d)
        })
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .unwrap();
    // Compass search refinement inside the square.
    let f = |x: f64, y: f64| data.a_plus(x.clamp(s1, s2)).distance(data.a_minus(y.clamp(s1, s2)));
    let (mut x, mut y) = (grid[i], grid[j]);
    let mut best = f(x, y);
    let mut step = (s2 - s1) / (WITNESS_GRID - 1) as f64;
    while step > 1e-13 * (s2 - s1).max(1.0) && best > 0.0 {
        let mut moved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (nx, ny) = ((x + dx).clamp(s1, s2), (y + dy).clamp(s1, s2));
            let v = f(nx, ny);
            if v < best {
                (x, y, best, moved) = (nx, ny, v, true);
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    OverlapWitness { xi: x, eta: y, distance: best }
}

/// Outcome of checking that the sheet over a diamond is a graph over the
/// plane spanned by time and `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GraphVerdict {
    /// `min ⟨γ_s, ω⟩` over the grid.
    pub margin: f64,
    pub at: (f64, f64),
    pub slices: usize,
}

/// Checks `⟨γ_s, ω⟩ > 0` on a grid over the diamond and that
/// `s ↦ ⟨γ(s, t), ω⟩` is strictly increasing on every sampled slice.
pub fn verify_graph_on_diamond(
    sheet: &dyn Sheet,
    diamond: &CharacteristicDiamond,
    omega: Vec2,
    step: f64,
) -> Result<GraphVerdict> {
    let r = diamond.half_width();
    let center = 0.5 * (diamond.s1 + diamond.s2);
    let ts = linspace_max_step(-r, r, step);
    let rows: Vec<(f64, (f64, f64))> = ts
        .par_iter()
        .map(|&t| {
            let w = r - t.abs();
            let ss = if w > 0.0 { linspace_max_step(center - w, center + w, step) } else { vec![center] };
            let mut worst = (f64::INFINITY, (center, t));
            let mut prev: Option<f64> = None;
            for &s in &ss {
                let j = sheet.first(s, t)?;
                let m = j.gs.dot(omega);
                if m < worst.0 {
                    worst = (m, (s, t));
                }
                let h = j.g.dot(omega);
                if prev.is_some_and(|p| h <= p) {
                    return Err(SheetError::MarginViolated { s, t, margin: h - prev.unwrap() });
                }
                prev = Some(h);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let (margin, at) = rows.iter().copied().fold((f64::INFINITY, (center, 0.0)), |a, b| if b.0 < a.0 { b } else { a });
    if !(margin > 0.0) {
        return Err(SheetError::MarginViolated { s: at.0, t: at.1, margin });
    }
    Ok(GraphVerdict { margin, at, slices: ts.len() })
}

fn segment_hit(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> Option<(f64, f64)> {
    let d = p1 - p0;
    let e = q1 - q0;
    let den = d.cross(e);
    if den.abs() <= 1e-300 {
        return None;
    }
    let w = q0 - p0;
    let u = w.cross(e) / den;
    let v = w.cross(d) / den;
    // Chords miss the curve by O(h²), which can push a crossing at a node
    // just outside both segments; Newton sorts out false positives.
    let slack = 0.05;
    (u >= -slack && u <= 1.0 + slack && v >= -slack && v <= 1.0 + slack).then_some((u, v))
}

fn newton_pair(curve: &dyn CurveProvider, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let f = curve.position(a) - curve.position(b);
        if f.norm() <= INTERSECT_TOL * 1e-3 {
            break;
        }
        let (ta, tb) = (curve.tangent(a), -curve.tangent(b));
        let det = ta.cross(tb);
        if det.abs() < 1e-14 {
            return None;
        }
        // Solve [ta tb] (da, db)ᵀ = −f by Cramer's rule.
        let da = -f.cross(tb) / det;
        let db = -ta.cross(f) / det;
        a += da;
        b += db;
    }
    ((curve.position(a) - curve.position(b)).norm() <= INTERSECT_TOL).then_some((a, b))
}

/// Parameter pairs `r1 < r2` in `s_range` with `c(r1) = c(r2)`.
///
/// For periodic domains parameters are compared modulo the period, so a
/// closed curve traversed once reports nothing.
/// Unbounded ends are cut to the domain, or to one period from 0.
pub fn detect_self_intersections(curve: &dyn CurveProvider, s_range: (f64, f64)) -> Vec<(f64, f64)> {
    let (lo, hi) = match curve.domain() {
        Domain::Interval { min, max } => (s_range.0.max(min), s_range.1.min(max)),
        Domain::Periodic { period, .. } if !(s_range.0.is_finite() && s_range.1.is_finite()) => {
            let lo = if s_range.0.is_finite() { s_range.0 } else if s_range.1.is_finite() { s_range.1 - period } else { 0.0 };
            (lo, lo + period)
        }
        Domain::Periodic { .. } => s_range,
    };
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Vec::new();
    }
    let n = (((hi - lo) / 1e-2).ceil() as usize).clamp(2048, 1 << 18);
    let ss = linspace(lo, hi, n + 1);
    let pts: Vec<Vec2> = ss.iter().map(|&s| curve.position(s)).collect();
    let seg_len = pts.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max);
    let period = match curve.domain() {
        Domain::Periodic { period, .. } => Some(period),
        Domain::Interval { .. } => None,
    };
    let h = (hi - lo) / n as f64;
    let cell = (2.0 * seg_len).max(1e-12);
    let key = |p: Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = (key(pts[i]), key(pts[i + 1]));
        for x in a.0.min(b.0)..=a.0.max(b.0) {
            for y in a.1.min(b.1)..=a.1.max(b.1) {
                grid.entry((x, y)).or_default().push(i);
            }
        }
    }
    let mut keys: Vec<_> = grid.keys().copied().collect();
    keys.sort_unstable();
    let mut candidates: Vec<(usize, usize, f64, f64)> = Vec::new();
    for k in keys {
        let segs = &grid[&k];
        for (ai, &i) in segs.iter().enumerate() {
            for &j in &segs[ai + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j <= i + 1 {
                    continue;
                }
                if let Some((u, v)) = segment_hit(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    candidates.push((i, j, u, v));
                }
            }
        }
    }
    candidates.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    candidates.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let canon = |r: f64| match period {
        Some(p) => {
            let x = (r - lo).rem_euclid(p);
            if p - x < INTERSECT_TOL { lo } else { x + lo }
        }
        None => r,
    };
    let scale = 4.0 * h;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, j, u, v) in candidates {
        let guess = (ss[i] + u * h, ss[j] + v * h);
        let Some((a, b)) = newton_pair(curve, guess.0, guess.1) else { continue };
        if a < lo - scale || b > hi + scale || a > hi + scale || b < lo - scale {
            continue;
        }
        let (a, b) = (canon(a), canon(b));
        let (r1, r2) = (a.min(b), a.max(b));
        let same = (r2 - r1).abs() < scale || period.is_some_and(|p| (r2 - r1 - p).abs() < scale);
        if same || out.iter().any(|q| (q.0 - r1).abs() < scale && (q.1 - r2).abs() < scale) {
            continue;
        }
        out.push((r1, r2));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve;
    use crate::gallery::{build, GalleryParams};
    use crate::initial_data::{normalize_initial_data, FnCurve, NormalizeOptions, ZeroVelocity};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle() -> Arc<InitialData> {
        build("shrinking_circle", &GalleryParams::default()).unwrap().data
    }

    fn line() -> Arc<InitialData> {
        let curve = FnCurve::new(|s| Vec2::new(s, 0.0), |_| Vec2::new(1.0, 0.0), Domain::Interval { min: -20.0, max: 20.0 });
        Arc::new(normalize_initial_data(Arc::new(curve), Arc::new(ZeroVelocity), &NormalizeOptions::default()).unwrap())
    }

    #[test]
    fn line_is_separated_with_margin_two() {
        let data = line();
        let r = separating_direction(&data, -5.0, 5.0).unwrap();
        assert_eq!(r.verdict, Separation::Separated);
        let w = r.omega.unwrap();
        assert!((w.x - 1.0).abs() < 1e-12 && w.y.abs() < 1e-12);
        assert!((r.margin - 2.0).abs() < 1e-12);
        let d = CharacteristicDiamond::new(-5.0, 5.0).unwrap();
        let g = verify_graph_on_diamond(&evolve(data), &d, w, 0.1).unwrap();
        assert!((g.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_quarter_and_full() {
        let data = circle();
        let q = separating_direction(&data, 0.0, PI / 2.0).unwrap();
        assert_eq!(q.verdict, Separation::Separated);
        // α₊ = s + π/2 on the quarter, so ω points at angle 3π/4.
        let w = q.omega.unwrap();
        assert!(w.distance(Vec2::from_angle(0.75 * PI)) < 1e-9);
        assert!((q.margin - 2.0 * (PI / 4.0).cos()).abs() < 1e-6);
        let full = separating_direction(&data, 0.0, 2.0 * PI).unwrap();
        assert_eq!(full.verdict, Separation::Overlapping);
        let wit = full.witness.unwrap();
        assert!(wit.distance < 1e-9, "{wit:?}");
        assert!(data.a_plus(wit.xi).distance(data.a_minus(wit.eta)) < 1e-9);
    }

    #[test]
    fn figure_eight_crosses_at_origin() {
        let curve = FnCurve::new(
            |s| Vec2::new(s.sin(), s.sin() * s.cos()),
            |s| Vec2::new(s.cos(), (2.0 * s).cos()),
            Domain::Periodic { period: 2.0 * PI, closed: true },
        );
        let hits = detect_self_intersections(&curve, (0.0, 2.0 * PI));
        assert_eq!(hits.len(), 1, "{hits:?}");
        let (a, b) = hits[0];
        assert!(a.abs() < 1e-9 && (b - PI).abs() < 1e-9, "{hits:?}");
        assert!(curve.position(a).distance(curve.position(b)) <= INTERSECT_TOL);
        // The crossing sits on a sampling node; an unbounded range means one period.
        assert_eq!(detect_self_intersections(&curve, (0.0, 6.2)), hits);
        assert_eq!(detect_self_intersections(&curve, (f64::NEG_INFINITY, f64::INFINITY)).len(), 1);
    }

    #[test]
    fn simple_curves_have_no_crossings() {
        let line = FnCurve::new(|s| Vec2::new(s, 0.0), |_| Vec2::new(1.0, 0.0), Domain::Interval { min: -5.0, max: 5.0 });
        assert!(detect_self_intersections(&line, (-5.0, 5.0)).is_empty());
        let data = circle();
        assert!(detect_self_intersections(data.curve().as_ref(), (0.0, 2.0 * PI)).is_empty());
    }
}
