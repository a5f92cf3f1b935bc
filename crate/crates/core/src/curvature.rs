//! Cross-section curvature, the mean curvature scalar of the graph
//! `(t, γ(s,t))`, and the quantities that track curvature blow-up near the
//! singular set.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::evolution::{IsothermalSheet, Jet1, Sheet};
use crate::geometry::Vec2;
use crate::numerics::ode::{integrate as ode_integrate, OdeOptions};
use crate::numerics::quadrature::{integrate, integrate_relative};
use crate::tolerance;

/// Both curvature conventions at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossSectionCurvature {
    /// Signed planar curvature `(γ_s × γ_ss)/|γ_s|³`.
    pub kappa_std: f64,
    /// `⟨γ_ss, n⟩/|γ_s|²` with `n = γ_t/|γ_t|`; `None` where `γ_t` vanishes.
    pub k_paper: Option<f64>,
}

fn require_regular(jet: &Jet1, tol: f64, s: f64, t: f64) -> Result<()> {
    if jet.gs.norm() <= tol {
        return Err(SheetError::Undefined { s, t, what: "gamma_s vanishes" });
    }
    Ok(())
}

/// Curvature of the slice `γ(·, t)` at `s`.
pub fn cross_section_curvature<S: Sheet + ?Sized>(sheet: &S, s: f64, t: f64) -> Result<CrossSectionCurvature> {
    let tol = sheet.sing_tolerance();
    let j = sheet.first(s, t)?;
    require_regular(&j, tol, s, t)?;
    let gss = sheet.second(s, t)?.gss;
    let speed = j.gs.norm();
    let kappa_std = j.gs.cross(gss) / (speed * speed * speed);
    let k_paper = (j.gt.norm() > tol).then(|| gss.dot(j.gt / j.gt.norm()) / j.gs.norm_sq());
    Ok(CrossSectionCurvature { kappa_std, k_paper })
}

/// Unit normal used by the mean-curvature formulas: `γ_t/|γ_t|`, or the
/// left normal of `γ_s` where `γ_t` vanishes.
fn slice_normal(j: &Jet1, tol: f64) -> Vec2 {
    let n = j.gt.norm();
    if n > tol {
        j.gt / n
    } else {
        j.gs.perp() / j.gs.norm()
    }
}

fn timelike_gap(j: &Jet1, s: f64) -> Result<f64> {
    let gap = 1.0 - j.gt.norm_sq();
    if !(gap > tolerance::TIMELIKE) {
        return Err(SheetError::NotTimelike { s, speed: j.gt.norm() });
    }
    Ok(gap)
}

/// Mean curvature scalar `h = e/E + g/G` of the graph `(t, γ)`, assuming
/// `⟨γ_s, γ_t⟩ = 0` at the point.
pub fn mean_curvature_scalar<S: Sheet + ?Sized>(sheet: &S, s: f64, t: f64) -> Result<f64> {
    let tol = sheet.sing_tolerance();
    let j = sheet.first(s, t)?;
    let gap = timelike_gap(&j, s)?;
    require_regular(&j, tol, s, t)?;
    let d2 = sheet.second(s, t)?;
    let n = slice_normal(&j, tol);
    Ok(-d2.gss.dot(n) / (j.gs.norm_sq() * gap.sqrt()) + d2.gtt.dot(n) / (gap * gap.sqrt()))
}

/// Both sides of `(1 − |γ_t|²)^{1/2} h + k = ⟨γ_tt, n⟩/(1 − |γ_t|²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates the blow-up identity with `h` and `k` from the sheet's second
/// derivatives and the right-hand side from a centred difference of `γ_t`
/// in `t` with step `h_step`. The residual is the consistency error of the
/// two routes, `O(h_step²)` on smooth sheets.
pub fn blowup_identity_residual<S: Sheet + ?Sized>(sheet: &S, s0: f64, t: f64, h_step: f64) -> Result<IdentityResidual> {
    if !(h_step > 0.0) {
        return Err(SheetError::InvalidInput(format!("step must be positive, got {h_step}")));
    }
    let tol = sheet.sing_tolerance();
    let j = sheet.first(s0, t)?;
    let gap = timelike_gap(&j, s0)?;
    require_regular(&j, tol, s0, t)?;
    let n = slice_normal(&j, tol);
    let d2 = sheet.second(s0, t)?;
    let h = -d2.gss.dot(n) / (j.gs.norm_sq() * gap.sqrt()) + d2.gtt.dot(n) / (gap * gap.sqrt());
    let k = d2.gss.dot(n) / j.gs.norm_sq();
    let lhs = gap.sqrt() * h + k;
    let gtt_fd = (sheet.first(s0, t + h_step)?.gt - sheet.first(s0, t - h_step)?.gt) / (2.0 * h_step);
    let rhs = gtt_fd.dot(n) / gap;
    Ok(IdentityResidual { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupVerdict {
    Divergent,
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupIntegral {
    pub s0: f64,
    pub t0: f64,
    pub epsilon: f64,
    /// `(δ_j, ∫_{t0−ε}^{t0−δ_j} |κ(s0,t)| dt)`.
    pub partials: Vec<(f64, f64)>,
    /// Ratios of consecutive partial integrals.
    pub growth: Vec<f64>,
    /// Fit quality of the partial integrals against `a + b·log(1/δ)`.
    pub r_squared: f64,
    pub verdict: BlowupVerdict,
}

/// The default truncation sequence `ε·{1e−1, 1e−2, 1e−4, 1e−8}`.
pub fn default_deltas(epsilon: f64) -> Vec<f64> {
    [1e-1, 1e-2, 1e-4, 1e-8].iter().map(|d| d * epsilon).collect()
}

/// `∫_{t0−ε}^{t0−δ} |κ(s0,t)| dt` for each `δ`, integrated in
/// `u = log(t0 − t)` so the logarithmic singularity becomes a bounded
/// integrand.
///
/// Divergent when the last three partial integrals each grow by a factor
/// of at least 1.5 and the sequence fits `a + b log(1/δ)` with `R² ≥ 0.99`,
/// the growth law of `−log(1 − |γ_t|²)`.
pub fn blowup_integral<S: Sheet + ?Sized>(
    sheet: &S,
    s0: f64,
    t0: f64,
    epsilon: f64,
    deltas: &[f64],
) -> Result<BlowupIntegral> {
    let anchor = sheet.first(s0, t0)?;
    if anchor.gs.norm() > 1e-6 {
        return Err(SheetError::NotSingularAnchor { s: s0, t: t0, speed: anchor.gs.norm() });
    }
    if !(epsilon > 0.0) || deltas.len() < 3 || deltas.iter().any(|d| !(*d > 0.0 && *d < epsilon)) {
        return Err(SheetError::InvalidInput("need ε > 0 and at least three truncations 0 < δ < ε".into()));
    }
    let mut ds = deltas.to_vec();
    ds.sort_by(|a, b| b.total_cmp(a));
    let integrand = |u: f64| -> f64 {
        let e = u.exp();
        cross_section_curvature(sheet, s0, t0 - e).map_or(f64::NAN, |c| c.kappa_std.abs() * e)
    };
    let mut partials = Vec::with_capacity(ds.len());
    let mut acc = 0.0;
    let mut upper = epsilon.ln();
    for &d in &ds {
        let lower = d.ln();
        acc += integrate(integrand, lower, upper, 1e-12);
        if !acc.is_finite() {
            return Err(SheetError::Undefined { s: s0, t: t0 - d, what: "curvature along the anchor line" });
        }
        partials.push((d, acc));
        upper = lower;
    }
    let growth: Vec<f64> = partials.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let xs: Vec<f64> = partials.iter().map(|(d, _)| -d.ln()).collect();
    let ys: Vec<f64> = partials.iter().map(|(_, v)| *v).collect();
    let r_squared = linear_r_squared(&xs, &ys);
    let last3 = &growth[growth.len().saturating_sub(2)..];
    let grows = last3.iter().all(|g| *g >= 1.5);
    let verdict = if grows && r_squared >= 0.99 { BlowupVerdict::Divergent } else { BlowupVerdict::Bounded };
    Ok(BlowupIntegral { s0, t0, epsilon, partials, growth, r_squared, verdict })
}

/// Coefficient of determination of the least-squares line through the points.
fn linear_r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 || sxx == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl NormVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            NormVerdict::Finite => "finite",
            NormVerdict::Divergent => "divergent",
            NormVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub p: f64,
    pub q: f64,
    pub verdict: NormVerdict,
    /// `(δ_j, ‖k‖ truncated at t0 − δ_j)`.
    pub truncations: Vec<(f64, f64)>,
    /// Ratio of the last two per-decade increments of the outer integral.
    pub increment_ratio: f64,
}

impl NormRow {
    pub fn last_truncation_value(&self) -> f64 {
        self.truncations.last().map_or(f64::NAN, |t| t.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormTable {
    pub t_window: (f64, f64),
    pub rows: Vec<NormRow>,
}

impl NormTable {
    /// CSV with header `p,q,verdict,last_truncation_value`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "p,q,verdict,last_truncation_value")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.p, r.q, r.verdict.as_str(), r.last_truncation_value())?;
        }
        Ok(())
    }
}

const INNER_NODES: usize = 256;

/// `‖k‖_{L^q_t L^p_σ}` on truncations of `t_window = (t_a, t0)` approaching
/// the singular time `t0`, for every pair in `p_list × q_list`.
///
/// The inner integral over one period in arclength uses the periodic
/// trapezoid rule; the outer one runs in `u = log(t0 − t)` across decades
/// down to `t0 − t = 1e−8`. A pair is finite when the per-decade increment
/// shrinks, divergent when it does not, and inconclusive within 0.05 of
/// the critical line `1/p + 1/q = 1`.
pub fn mixed_norm_table(
    sheet: &IsothermalSheet,
    p_list: &[f64],
    q_list: &[f64],
    t_window: (f64, f64),
) -> Result<NormTable> {
    let data = sheet.data();
    let period = match data.domain() {
        crate::geometry::Domain::Periodic { period, closed: true } => period,
        _ => return Err(SheetError::RequiresPeriodic),
    };
    let (ta, t0) = t_window;
    if !(t0 > ta) || t0 - ta <= 1e-8 {
        return Err(SheetError::InvalidInput(format!("empty time window ({ta}, {t0})")));
    }
    for &v in p_list.iter().chain(q_list) {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(SheetError::InvalidInput(format!("exponents must lie in [1, ∞), got {v}")));
        }
    }
    let nodes: Vec<f64> = (0..INNER_NODES).map(|i| period * i as f64 / INNER_NODES as f64).collect();
    let mut cuts = Vec::new();
    let mut d = 10f64.powf((t0 - ta).log10().floor());
    if d >= t0 - ta {
        d /= 10.0;
    }
    while d >= 1e-8 * (1.0 - 1e-12) {
        cuts.push(d);
        d /= 10.0;
    }
    if cuts.len() < 3 {
        return Err(SheetError::InvalidInput("time window too short for three truncations".into()));
    }

    // |κ| and |γ_s| on the inner grid, cached per outer quadrature node.
    let slice = |t: f64| -> Result<Vec<(f64, f64)>> {
        nodes
            .iter()
            .map(|&s| {
                let j = sheet.first(s, t)?;
                let c = cross_section_curvature(sheet, s, t)?;
                Ok((c.kappa_std.abs(), j.gs.norm()))
            })
            .collect()
    };
    let inner = |vals: &[(f64, f64)], p: f64| -> f64 {
        vals.iter().map(|(k, w)| k.powf(p) * w).sum::<f64>() * period / INNER_NODES as f64
    };

    let pairs: Vec<(f64, f64)> = p_list.iter().flat_map(|&p| q_list.iter().map(move |&q| (p, q))).collect();
    let rows: Result<Vec<NormRow>> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let f = |u: f64| -> f64 {
                let e = u.exp();
                slice(t0 - e).map_or(f64::NAN, |v| inner(&v, p).powf(q / p) * e)
            };
            let mut acc = 0.0;
            let mut upper = (t0 - ta).ln();
            let mut increments = Vec::with_capacity(cuts.len());
            let mut truncations = Vec::with_capacity(cuts.len());
            for &c in &cuts {
                let lower = c.ln();
                let inc = integrate_relative(f, lower, upper, 1e-8);
                if !inc.is_finite() {
                    return Err(SheetError::Undefined { s: 0.0, t: t0 - c, what: "cross-section curvature" });
                }
                acc += inc;
                increments.push(inc);
                truncations.push((c, acc.powf(1.0 / q)));
                upper = lower;
            }
            let n = increments.len();
            let ratio = increments[n - 1] / increments[n - 2];
            let verdict = if (1.0 / p + 1.0 / q - 1.0).abs() < 0.05 {
                NormVerdict::Inconclusive
            } else if ratio < 1.0 {
                NormVerdict::Finite
            } else {
                NormVerdict::Divergent
            };
            Ok(NormRow { p, q, verdict, truncations, increment_ratio: ratio })
        })
        .collect();
    Ok(NormTable { t_window, rows: rows? })
}

/// Backward solution of `ṙ = −⟨γ_s, γ_t⟩/|γ_s|²` with `r(t0) = s0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalRay {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    /// Largest `|⟨γ_s, γ_s ṙ + γ_t⟩|` along the ray, with `ṙ` taken from the
    /// dense output at step midpoints.
    pub orthogonality_residual: f64,
}

/// Traces the ray along which the recentred parameterization
/// `(s', t) ↦ γ(r(t) + s', t)` is orthogonal at `s' = 0`.
pub fn trace_orthogonal_ray<S: Sheet + ?Sized>(sheet: &S, s0: f64, t0: f64, epsilon: f64) -> Result<OrthogonalRay> {
    if !(epsilon > 0.0) {
        return Err(SheetError::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let tol = sheet.sing_tolerance();
    let rhs = |t: f64, y: &[f64]| -> std::result::Result<Vec<f64>, String> {
        let j = sheet.first(y[0], t).map_err(|e| e.to_string())?;
        let g2 = j.gs.norm_sq();
        if g2.sqrt() <= tol {
            return Err("singular".into());
        }
        Ok(vec![-j.gs.dot(j.gt) / g2])
    };
    let opts = OdeOptions { rtol: tolerance::ODE, atol: tolerance::ODE * 1e-2, ..Default::default() };
    let sol = match ode_integrate(rhs, t0, &[s0], t0 - epsilon, &opts) {
        Ok(sol) => sol,
        Err((_, failure)) => {
            let t = match failure {
                crate::numerics::ode::OdeFailure::Rhs { t, ref reason } if reason == "singular" => t,
                crate::numerics::ode::OdeFailure::Rhs { t, reason } => {
                    return Err(SheetError::Ode(format!("at t = {t}: {reason}")));
                }
                crate::numerics::ode::OdeFailure::Stalled { t } => {
                    return Err(SheetError::Ode(format!("step size underflow at t = {t}")));
                }
            };
            return Err(SheetError::SingularOnPath { t });
        }
    };
    let mut worst = 0.0f64;
    for w in sol.ts.windows(2) {
        let tm = 0.5 * (w[0] + w[1]);
        let (y, dy) = sol.eval(tm);
        let j = sheet.first(y[0], tm)?;
        worst = worst.max(j.gs.dot(j.gs * dy[0] + j.gt).abs());
    }
    Ok(OrthogonalRay { t: sol.ts.clone(), r: sol.ys.iter().map(|y| y[0]).collect(), orthogonality_residual: worst })
}

/// One row of a curvature sample grid. Undefined values are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub s: f64,
    pub t: f64,
    pub kappa_std: Option<f64>,
    pub k_paper: Option<f64>,
    pub h: Option<f64>,
}

/// Curvature samples, blow-up integrals and an optional norm table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub samples: Vec<CurvatureSample>,
    pub blowup_integrals: Vec<BlowupIntegral>,
    pub norm_table: Option<NormTable>,
}

impl CurvatureReport {
    /// CSV with header `s,t,kappa_std,k_paper,h`; undefined values are empty.
    pub fn write_samples_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "s,t,kappa_std,k_paper,h")?;
        let f = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.samples {
            writeln!(out, "{},{},{},{},{}", r.s, r.t, f(r.kappa_std), f(r.k_paper), f(r.h))?;
        }
        Ok(())
    }
}

/// Curvature on the grid `s_grid × t_grid`, row-major with `s` fastest.
pub fn curvature_samples<S: Sheet + ?Sized>(sheet: &S, s_grid: &[f64], t_grid: &[f64]) -> Vec<CurvatureSample> {
    t_grid
        .par_iter()
        .flat_map_iter(|&t| {
            s_grid.iter().map(move |&s| {
                let c = cross_section_curvature(sheet, s, t).ok();
                CurvatureSample {
                    s,
                    t,
                    kappa_std: c.map(|c| c.kappa_std),
                    k_paper: c.and_then(|c| c.k_paper),
                    h: mean_curvature_scalar(sheet, s, t).ok(),
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve, FnSheet, Jet2};
    use crate::gallery::{build, GalleryParams};
    use std::f64::consts::PI;

    fn circle() -> IsothermalSheet {
        evolve(build("shrinking_circle", &GalleryParams::default()).unwrap().data)
    }

    #[test]
    fn circle_curvature_closed_form() {
        let sh = circle();
        for &(s, t) in &[(0.0, 0.0), (1.0, 0.7), (-2.0, -1.3), (4.0, 1.4)] {
            let c = cross_section_curvature(&sh, s, t).unwrap();
            assert!((c.kappa_std.abs() - 1.0 / f64::cos(t).abs()).abs() < 1e-10);
            if t == 0.0 {
                assert!(c.k_paper.is_none());
                assert!((c.kappa_std - 1.0).abs() < 1e-14);
            } else {
                assert!((c.k_paper.unwrap().abs() - c.kappa_std.abs()).abs() < 1e-9);
            }
            assert!(mean_curvature_scalar(&sh, s, t).unwrap().abs() < 1e-9);
        }
        assert!(matches!(cross_section_curvature(&sh, 0.0, PI / 2.0), Err(SheetError::Undefined { .. })));
    }

    #[test]
    fn non_maximal_test_sheet() {
        // γ = (s, t²): E = 1, G = 4t² − 1, n = (0, sgn t), γ_tt = (0, 2).
        let sh = FnSheet::new(|s, t| Jet1 { g: Vec2::new(s, t * t), gs: Vec2::new(1.0, 0.0), gt: Vec2::new(0.0, 2.0 * t) })
            .with_second(|_, _| Jet2 { gss: Vec2::ZERO, gst: Vec2::ZERO, gtt: Vec2::new(0.0, 2.0) });
        for t in [0.1, -0.2, 0.3] {
            let h = mean_curvature_scalar(&sh, 0.5, t).unwrap();
            let oracle = oracle_mean_curvature(Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0 * t), Vec2::ZERO, Vec2::new(0.0, 2.0));
            assert!((h - oracle).abs() < 1e-12, "{h} vs {oracle}");
            assert!((h.abs() - 2.0 / (1.0 - 4.0 * t * t).powf(1.5)).abs() < 1e-12);
        }
        assert!(matches!(mean_curvature_scalar(&sh, 0.0, 0.6), Err(SheetError::NotTimelike { .. })));
    }

    /// Mean curvature from the Minkowski fundamental forms of
    /// `φ = (t, γ)`, with the normal built by a Lorentzian cross product.
    fn oracle_mean_curvature(gs: Vec2, gt: Vec2, gss: Vec2, gtt: Vec2) -> f64 {
        let dot = |a: [f64; 3], b: [f64; 3]| -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let ps = [0.0, gs.x, gs.y];
        let pt = [1.0, gt.x, gt.y];
        let pss = [0.0, gss.x, gss.y];
        let ptt = [0.0, gtt.x, gtt.y];
        // Euclidean cross product, then flip the time component.
        let c = [ps[1] * pt[2] - ps[2] * pt[1], ps[2] * pt[0] - ps[0] * pt[2], ps[0] * pt[1] - ps[1] * pt[0]];
        let mut n = [-c[0], c[1], c[2]];
        let len = dot(n, n).sqrt();
        n.iter_mut().for_each(|v| *v /= len);
        // Orient like the formula's normal, whose spatial part follows γ_t.
        if n[1] * gt.x + n[2] * gt.y < 0.0 {
            n.iter_mut().for_each(|v| *v = -*v);
        }
        let (e_, g_) = (dot(ps, ps), dot(pt, pt));
        let (e2, g2) = (-dot(pss, n), -dot(ptt, n));
        e2 / e_ + g2 / g_
    }

    #[test]
    fn identity_residual_converges() {
        let sh = circle();
        let r = blowup_identity_residual(&sh, 0.0, 1.0, 1e-3).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        let r1 = blowup_identity_residual(&sh, 0.3, 0.8, 1e-2).unwrap().residual;
        let r2 = blowup_identity_residual(&sh, 0.3, 0.8, 5e-3).unwrap().residual;
        assert!((r1 / r2).log2() > 1.9);
        let plane = evolve(build("plane", &GalleryParams::default()).unwrap().data);
        assert!(blowup_identity_residual(&plane, 0.0, 1.0, 1e-4).unwrap().residual < 1e-14);
    }

    #[test]
    fn circle_blowup_matches_log_secant() {
        let sh = circle();
        let eps = 0.5;
        let b = blowup_integral(&sh, 0.7, PI / 2.0, eps, &default_deltas(eps)).unwrap();
        let f = |t: f64| (t / 2.0 + PI / 4.0).tan().ln();
        for &(d, v) in &b.partials {
            let exact = f(PI / 2.0 - d) - f(PI / 2.0 - eps);
            assert!((v - exact).abs() < 1e-6, "{d}: {v} vs {exact}");
        }
        assert_eq!(b.verdict, BlowupVerdict::Divergent);
        let plane = evolve(build("plane", &GalleryParams::default()).unwrap().data);
        assert!(matches!(blowup_integral(&plane, 0.0, 1.0, 0.5, &default_deltas(0.5)), Err(SheetError::NotSingularAnchor { .. })));
    }

    #[test]
    fn circle_norm_verdicts() {
        let sh = circle();
        let t = mixed_norm_table(&sh, &[1.1, 2.0, 4.0], &[1.1, 2.0, 4.0 / 3.0 - 0.1, 4.0 / 3.0 + 0.1], (0.0, PI / 2.0)).unwrap();
        for r in &t.rows {
            let d = 1.0 / r.p + 1.0 / r.q - 1.0;
            let want = if d.abs() < 0.05 {
                NormVerdict::Inconclusive
            } else if d > 0.0 {
                NormVerdict::Finite
            } else {
                NormVerdict::Divergent
            };
            assert_eq!(r.verdict, want, "{r:?}");
        }
        let line = evolve(build("plane", &GalleryParams::default()).unwrap().data);
        assert!(matches!(mixed_norm_table(&line, &[2.0], &[2.0], (0.0, 1.0)), Err(SheetError::RequiresPeriodic)));
    }

    #[test]
    fn rays() {
        let sh = circle();
        let ray = trace_orthogonal_ray(&sh, 0.4, 1.0, 0.5).unwrap();
        assert!(ray.r.iter().all(|r| (r - 0.4).abs() < 1e-15));
        // Sheared plane γ(s,t) = (s + κt, wt) has ⟨γ_s,γ_t⟩/|γ_s|² = κ.
        let (k, w) = (0.3, 0.5);
        let sheared = FnSheet::new(move |s, t| Jet1 {
            g: Vec2::new(s + k * t, w * t),
            gs: Vec2::new(1.0, 0.0),
            gt: Vec2::new(k, w),
        });
        let ray = trace_orthogonal_ray(&sheared, 0.2, 1.0, 0.8).unwrap();
        for (t, r) in ray.t.iter().zip(&ray.r) {
            assert!((r - (0.2 - k * (t - 1.0))).abs() < 1e-12);
        }
        assert!(ray.orthogonality_residual < 1e-12);
        assert!(matches!(trace_orthogonal_ray(&sh, 0.0, PI / 2.0, 0.5), Err(SheetError::SingularOnPath { .. })));
    }
}
