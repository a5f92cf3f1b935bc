//! Sufficient conditions read off the initial data: the semicircle test for
//! singularities, the oscillation test against them, and the short-time
//! existence horizon.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::geometry::{linspace_max_step, Domain};
use crate::initial_data::InitialData;
use crate::numerics::roots::{golden_max, golden_min};
use crate::tolerance;

/// Sampling step used by the criteria unless configured otherwise.
pub const CRITERION_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemicircleVerdict {
    GuaranteedSingular,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemicircleResult {
    pub verdict: SemicircleVerdict,
    /// `max θ − min θ` on the interval.
    pub oscillation: f64,
    /// Parameters of the minimum and maximum of θ, in increasing order.
    pub witness: (f64, f64),
}

struct ThetaSamples {
    s: Vec<f64>,
    theta: Vec<f64>,
    /// Largest change between neighbouring samples.
    max_step: f64,
}

fn sample_theta(data: &InitialData, s1: f64, s2: f64, step: f64) -> Result<ThetaSamples> {
    data.check(s1)?;
    data.check(s2)?;
    if !(s1 < s2) {
        return Err(SheetError::InvalidInput(format!("need s1 < s2, got [{s1}, {s2}]")));
    }
    let s = linspace_max_step(s1, s2, step);
    let theta: Vec<f64> = s.iter().map(|x| data.theta(*x)).collect();
    let max_step = theta.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    Ok(ThetaSamples { s, theta, max_step })
}

/// Extremum of sampled θ, polished by golden section between neighbours.
fn polish(data: &InitialData, smp: &ThetaSamples, i: usize, maximize: bool) -> (f64, f64) {
    let n = smp.s.len();
    let (a, b) = (smp.s[i.saturating_sub(1)], smp.s[(i + 1).min(n - 1)]);
    let f = |x: f64| data.theta(x);
    let (x, v) = if maximize { golden_max(f, a, b, 1e-13) } else { golden_min(f, a, b, 1e-13) };
    let better = if maximize { v >= smp.theta[i] } else { v <= smp.theta[i] };
    if better {
        (x, v)
    } else {
        (smp.s[i], smp.theta[i])
    }
}

/// Whether the unit tangent on `[s1, s2]` sweeps a closed semicircle.
pub fn semicircle_criterion(data: &InitialData, s1: f64, s2: f64) -> Result<SemicircleResult> {
    let smp = sample_theta(data, s1, s2, CRITERION_STEP)?;
    let argmin = (0..smp.s.len()).min_by(|a, b| smp.theta[*a].total_cmp(&smp.theta[*b])).unwrap();
    let argmax = (0..smp.s.len()).max_by(|a, b| smp.theta[*a].total_cmp(&smp.theta[*b])).unwrap();
    let (xmin, vmin) = polish(data, &smp, argmin, false);
    let (xmax, vmax) = polish(data, &smp, argmax, true);
    let oscillation = vmax - vmin;
    let verdict = if oscillation >= PI - tolerance::ANGLE {
        SemicircleVerdict::GuaranteedSingular
    } else {
        SemicircleVerdict::Inconclusive
    };
    let witness = if xmin <= xmax { (xmin, xmax) } else { (xmax, xmin) };
    Ok(SemicircleResult { verdict, oscillation, witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    GuaranteedRegular,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoSingularityResult {
    pub verdict: RegularityVerdict,
    /// `(osc θ + m)² + (sup |v| + m')²` including the sampling margins.
    pub value: f64,
    pub oscillation: f64,
    pub sup_speed: f64,
}

/// The oscillation test: `osc² θ + sup² |v| < 1` on `[s1, s2]` rules out
/// singular points in the diamond over `[s1, s2]`.
pub fn no_singularity_criterion(data: &InitialData, s1: f64, s2: f64) -> Result<NoSingularityResult> {
    let smp = sample_theta(data, s1, s2, CRITERION_STEP)?;
    let (lo, hi) = smp.theta.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let speeds: Vec<f64> = smp.s.iter().map(|x| data.v(*x).norm()).collect();
    let sup_speed = speeds.iter().copied().fold(0.0, f64::max);
    let speed_margin = speeds.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) + 1e-9;
    let osc_margin = smp.max_step + 1e-9;
    let oscillation = hi - lo;
    let value = (oscillation + osc_margin).powi(2) + (sup_speed + speed_margin).powi(2);
    let verdict = if value < 1.0 { RegularityVerdict::GuaranteedRegular } else { RegularityVerdict::Inconclusive };
    Ok(NoSingularityResult { verdict, value, oscillation, sup_speed })
}

/// Lower bound for the existence time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Horizon {
    /// `δ/4`, or infinity when no δ-window ever fails the test.
    pub t: f64,
    pub delta: f64,
    /// `1 − sup |v|²`.
    pub epsilon: f64,
    pub sup_speed: f64,
}

/// [`short_time_horizon_with`] at the default sampling step.
pub fn short_time_horizon(data: &InitialData) -> Result<Horizon> {
    short_time_horizon_with(data, CRITERION_STEP)
}

/// Finds the largest δ such that θ oscillates by less than `√ε` on every
/// interval of length δ, where `ε = 1 − sup|v|²`, and returns `T = δ/4`.
///
/// The scan covers the window (two periods for periodic data). Oscillations
/// are sampled maxima plus the largest sample-to-sample change, so the
/// returned δ is conservative.
pub fn short_time_horizon_with(data: &InitialData, step: f64) -> Result<Horizon> {
    let (lo, hi, cap) = match data.domain() {
        Domain::Periodic { period, .. } => (0.0, 2.0 * period, period),
        Domain::Interval { .. } => {
            let w = data.window();
            (w.min, w.max, w.max - w.min)
        }
    };
    let s = linspace_max_step(lo, hi, step);
    let h = s[1] - s[0];
    let theta: Vec<f64> = s.iter().map(|x| data.theta(*x)).collect();
    let sup_speed = s.iter().map(|x| data.v(*x).norm()).fold(0.0, f64::max);
    if sup_speed >= 1.0 - tolerance::TIMELIKE {
        return Err(SheetError::NotUniformlyTimelike { sup: sup_speed });
    }
    let epsilon = 1.0 - sup_speed * sup_speed;
    let margin = theta.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let total = theta.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b))
        - theta.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let infinite = Horizon { t: f64::INFINITY, delta: f64::INFINITY, epsilon, sup_speed };
    if total == 0.0 {
        return Ok(infinite);
    }
    let passes = |delta: f64| -> bool {
        let span = ((delta / h).ceil() as usize).max(1);
        let osc = sliding_oscillation(&theta, span) + margin;
        osc * osc < epsilon
    };
    if passes(cap) {
        return Ok(infinite);
    }
    let mut good = 0.0;
    let mut bad;
    let mut delta = cap.min(1.0);
    if passes(delta) {
        good = delta;
        while 2.0 * delta < cap && passes(2.0 * delta) {
            delta *= 2.0;
            good = delta;
        }
        bad = (2.0 * delta).min(cap);
    } else {
        bad = delta;
        while delta > h {
            delta *= 0.5;
            if passes(delta) {
                good = delta;
                break;
            }
            bad = delta;
        }
    }
    if good == 0.0 {
        return Err(SheetError::InvalidInput(format!(
            "horizon unresolved at sampling step {h}; refine the step"
        )));
    }
    for _ in 0..60 {
        if bad - good <= 1e-9 * good {
            break;
        }
        let mid = 0.5 * (good + bad);
        if passes(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Horizon { t: good / 4.0, delta: good, epsilon, sup_speed })
}

/// Largest `max − min` over all runs of `span + 1` consecutive samples.
fn sliding_oscillation(v: &[f64], span: usize) -> f64 {
    let w = span + 1;
    if w >= v.len() {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        return hi - lo;
    }
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        while maxq.back().is_some_and(|&j| v[j] <= v[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| v[j] >= v[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        if maxq[0] + w <= i {
            maxq.pop_front();
        }
        if minq[0] + w <= i {
            minq.pop_front();
        }
        if i + 1 >= w {
            best = best.max(v[maxq[0]] - v[minq[0]]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{self, GalleryParams};

    #[test]
    fn sliding_window_matches_brute_force() {
        let v: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.37).sin() * (i as f64).sqrt()).collect();
        for span in [1, 3, 17, 60, 199, 400] {
            let w = (span + 1).min(v.len());
            let brute = v
                .windows(w)
                .map(|x| {
                    x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            assert!((sliding_oscillation(&v, span) - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn semicircle_examples() {
        let circle = gallery::build("shrinking_circle", &GalleryParams::default()).unwrap();
        let r = semicircle_criterion(&circle.data, 0.0, PI).unwrap();
        assert_eq!(r.verdict, SemicircleVerdict::GuaranteedSingular);
        let line = gallery::build("plane", &GalleryParams { speed: Some(0.0), ..Default::default() }).unwrap();
        assert_eq!(semicircle_criterion(&line.data, -3.0, 3.0).unwrap().verdict, SemicircleVerdict::Inconclusive);
    }

    #[test]
    fn oscillation_examples() {
        let circle = gallery::build("shrinking_circle", &GalleryParams::default()).unwrap();
        let r = no_singularity_criterion(&circle.data, 0.0, 0.5).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::GuaranteedRegular);
        assert!((r.value - 0.25).abs() < 1e-2);
        let r = no_singularity_criterion(&circle.data, 0.0, 2.0 * PI).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::Inconclusive);
    }

    #[test]
    fn horizons() {
        let line = gallery::build("plane", &GalleryParams { speed: Some(0.0), ..Default::default() }).unwrap();
        assert!(short_time_horizon(&line.data).unwrap().t.is_infinite());
        let circle = gallery::build("shrinking_circle", &GalleryParams::default()).unwrap();
        let h = short_time_horizon(&circle.data).unwrap();
        assert!((h.t - 0.25).abs() < 2e-3, "T = {}", h.t);
        assert!(h.t < 0.25);
    }
}
