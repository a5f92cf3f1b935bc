//! Conversion of a time-graph parameterization with unit-speed slices into
//! isothermal gauge: transport along the characteristics
//! `ṡ = −⟨γ_s, γ_t⟩` and a reparameterization `s' = ρ(s₀)` of the seeds.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SheetError};
use crate::evolution::{Jet1, Sheet};
use crate::geometry::linspace_max_step;
use crate::numerics::ode::{integrate as ode_integrate, OdeFailure, OdeOptions, OdeSolution};
use crate::numerics::quadrature::{integrate, Antiderivative};
use crate::numerics::roots::bisect;
use crate::tolerance;

/// A sheet `(s,t) ↦ γ` restricted to the rectangle `s_range × t_range`,
/// expected to have `|γ_s| = 1` and to be timelike there.
#[derive(Clone)]
pub struct GraphParamSheet {
    pub sheet: Arc<dyn Sheet>,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
}

impl GraphParamSheet {
    pub fn new(sheet: Arc<dyn Sheet>, s_range: (f64, f64), t_range: (f64, f64)) -> Result<Self> {
        if !(s_range.0 < s_range.1 && t_range.0 <= 0.0 && 0.0 <= t_range.1 && t_range.0 < t_range.1) {
            return Err(SheetError::InvalidInput(format!(
                "window needs s_min < s_max and t_min ≤ 0 ≤ t_max, got {s_range:?} × {t_range:?}"
            )));
        }
        Ok(Self { sheet, s_range, t_range })
    }

    fn inside_s(&self, s: f64) -> bool {
        s >= self.s_range.0 && s <= self.s_range.1
    }

    /// Largest `||γ_s| − 1|` on a grid with the given steps.
    pub fn unit_speed_defect(&self, step: (f64, f64)) -> Result<f64> {
        let ss = linspace_max_step(self.s_range.0, self.s_range.1, step.0);
        let ts = linspace_max_step(self.t_range.0, self.t_range.1, step.1);
        let mut worst = 0.0f64;
        for &t in &ts {
            for &s in &ss {
                worst = worst.max((self.sheet.first(s, t)?.gs.norm() - 1.0).abs());
            }
        }
        Ok(worst)
    }
}

/// `|det g| = 1 − |γ_t|² + ⟨γ_s, γ_t⟩²` of the induced metric, for `|γ_s| = 1`.
fn abs_det(j: &Jet1) -> f64 {
    let f = j.gs.dot(j.gt);
    j.gs.norm_sq() * (1.0 - j.gt.norm_sq()) + f * f
}

fn ode_options() -> OdeOptions {
    OdeOptions { rtol: tolerance::ODE, atol: tolerance::ODE * 1e-2, max_step: 0.1, ..Default::default() }
}

/// One characteristic through `(seed, 0)`.
#[derive(Clone, Debug)]
pub struct Characteristic {
    pub seed: f64,
    backward: OdeSolution,
    forward: OdeSolution,
    /// Largest `|ds/dt|` over the accepted steps.
    pub max_speed: f64,
}

impl Characteristic {
    /// `(s(t), ṡ(t))` from the dense output.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let sol = if t < 0.0 { &self.backward } else { &self.forward };
        let (y, dy) = sol.eval(t);
        (y[0], dy[0])
    }

    /// The accepted nodes, in increasing `t`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let back = self.backward.ts.iter().zip(&self.backward.ys).rev().skip(1);
        let fwd = self.forward.ts.iter().zip(&self.forward.ys);
        back.chain(fwd).map(|(t, y)| (*t, y[0])).collect()
    }
}

fn char_rhs<'a>(g: &'a GraphParamSheet, seed: f64) -> impl Fn(f64, &[f64]) -> std::result::Result<Vec<f64>, String> + 'a {
    move |t, y| {
        if !g.inside_s(y[0]) {
            return Err(format!("exit:{seed}"));
        }
        let j = g.sheet.first(y[0], t).map_err(|e| e.to_string())?;
        Ok(vec![-j.gs.dot(j.gt)])
    }
}

fn map_failure(seed: f64, f: OdeFailure) -> SheetError {
    match f {
        OdeFailure::Rhs { t, reason } if reason.starts_with("exit:") => SheetError::WindowExit { seed, t },
        OdeFailure::Rhs { t, reason } => SheetError::Ode(format!("at t = {t}: {reason}")),
        OdeFailure::Stalled { t } => SheetError::Ode(format!("step size underflow at t = {t}")),
    }
}

fn solve_one(g: &GraphParamSheet, seed: f64, t_range: (f64, f64)) -> Result<Characteristic> {
    if !g.inside_s(seed) {
        return Err(SheetError::DomainExceeded { s: seed, min: g.s_range.0, max: g.s_range.1 });
    }
    let opts = ode_options();
    let run = |t1: f64| ode_integrate(char_rhs(g, seed), 0.0, &[seed], t1, &opts).map_err(|(_, f)| map_failure(seed, f));
    let backward = run(t_range.0)?;
    let forward = run(t_range.1)?;
    let max_speed = backward.fs.iter().chain(&forward.fs).map(|f| f[0].abs()).fold(0.0, f64::max);
    Ok(Characteristic { seed, backward, forward, max_speed })
}

/// Solves the characteristic ODE from every seed at `t = 0` across
/// `t_range`, then checks that the curves keep their order (no crossings)
/// on a common time grid and that `|ds/dt| < 1`.
pub fn solve_characteristics(g: &GraphParamSheet, seeds: &[f64], t_range: (f64, f64)) -> Result<Vec<Characteristic>> {
    if !(t_range.0 <= 0.0 && 0.0 <= t_range.1) || t_range.0 < g.t_range.0 || t_range.1 > g.t_range.1 {
        return Err(SheetError::InvalidInput(format!("t range {t_range:?} must contain 0 and fit the window")));
    }
    let curves: Vec<Characteristic> =
        seeds.par_iter().map(|&s| solve_one(g, s, t_range)).collect::<Result<Vec<_>>>()?;
    for c in &curves {
        if !(c.max_speed < 1.0) {
            return Err(SheetError::NotTimelike { s: c.seed, speed: c.max_speed });
        }
    }
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by(|a, b| curves[*a].seed.total_cmp(&curves[*b].seed));
    let ts = linspace_max_step(t_range.0, t_range.1, 1e-2);
    for w in order.windows(2) {
        let (a, b) = (&curves[w[0]], &curves[w[1]]);
        if a.seed == b.seed {
            continue;
        }
        for &t in &ts {
            if a.eval(t).0 >= b.eval(t).0 {
                return Err(SheetError::CharacteristicsCross { a: a.seed, b: b.seed, t });
            }
        }
    }
    Ok(curves)
}

type RhoFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// The sheet in the new coordinates `(s', t)` with `s' = ρ(s₀)`.
pub struct IsothermalizedSheet {
    base: GraphParamSheet,
    rho: Antiderivative<f64, RhoFn>,
    rho_range: (f64, f64),
}

impl std::fmt::Debug for IsothermalizedSheet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IsothermalizedSheet")
            .field("s_range", &self.base.s_range)
            .field("t_range", &self.base.t_range)
            .field("rho_range", &self.rho_range)
            .finish()
    }
}

/// Builds the isothermal reparameterization of `g`, with `ρ(0) = 0` (or
/// `ρ = 0` at the nearer window end when 0 is outside the window) and
/// `ρ̇ = |det g(s, 0)|^{−1/2}`.
pub fn isothermalize(g: &GraphParamSheet) -> Result<IsothermalizedSheet> {
    let ss = linspace_max_step(g.s_range.0, g.s_range.1, 0.05);
    let ts = linspace_max_step(g.t_range.0, g.t_range.1, 0.05);
    for &t in &ts {
        for &s in &ss {
            let j = g.sheet.first(s, t)?;
            if !(abs_det(&j) > tolerance::TIMELIKE) || !(j.gt.norm_sq() < 1.0) {
                return Err(SheetError::NotTimelike { s, speed: j.gt.norm() });
            }
        }
    }
    let sheet = g.sheet.clone();
    let rho_dot: RhoFn = Box::new(move |s| sheet.first(s, 0.0).map_or(f64::NAN, |j| abs_det(&j).powf(-0.5)));
    let origin = 0f64.clamp(g.s_range.0, g.s_range.1);
    let rho = Antiderivative::new(rho_dot, g.s_range.0, g.s_range.1, origin, 0.05, &[], tolerance::QUADRATURE);
    let rho_range = (rho.eval(g.s_range.0), rho.eval(g.s_range.1));
    if !(rho_range.0.is_finite() && rho_range.1.is_finite()) {
        return Err(SheetError::InvalidInput("ρ̇ is undefined on the initial slice".into()));
    }
    Ok(IsothermalizedSheet { base: g.clone(), rho, rho_range })
}

impl IsothermalizedSheet {
    pub fn rho(&self, s0: f64) -> f64 {
        self.rho.eval(s0)
    }

    pub fn rho_dot(&self, s0: f64) -> f64 {
        self.rho.integrand(s0)
    }

    /// Image of the initial window under `ρ`.
    pub fn rho_range(&self) -> (f64, f64) {
        self.rho_range
    }

    /// `ρ⁻¹` by bisection.
    pub fn rho_inverse(&self, s_new: f64) -> Result<f64> {
        let (a, b) = self.base.s_range;
        if !(s_new >= self.rho_range.0 && s_new <= self.rho_range.1) {
            return Err(SheetError::DomainExceeded { s: s_new, min: self.rho_range.0, max: self.rho_range.1 });
        }
        if s_new == self.rho_range.0 {
            return Ok(a);
        }
        if s_new == self.rho_range.1 {
            return Ok(b);
        }
        bisect(|s| self.rho(s) - s_new, a, b, tolerance::INVERSE)
            .ok_or_else(|| SheetError::InvalidInput("ρ is not monotone".into()))
    }

    /// Flows `(s, J)` along a characteristic from `(s_from, t_from)` to `t_to`,
    /// where `J = ∂s/∂s₀` obeys `J̇ = −∂_s⟨γ_s, γ_t⟩ J`.
    fn transport(&self, s_from: f64, t_from: f64, t_to: f64) -> Result<(f64, f64)> {
        let g = &self.base;
        let f = |t: f64, y: &[f64]| -> std::result::Result<Vec<f64>, String> {
            if !g.inside_s(y[0]) {
                return Err(format!("exit:{s_from}"));
            }
            let j = g.sheet.first(y[0], t).map_err(|e| e.to_string())?;
            let d = g.sheet.second(y[0], t).map_err(|e| e.to_string())?;
            let dsf = d.gss.dot(j.gt) + j.gs.dot(d.gst);
            Ok(vec![-j.gs.dot(j.gt), -dsf * y[1]])
        };
        if t_from == t_to {
            return Ok((s_from, 1.0));
        }
        let sol = ode_integrate(f, t_from, &[s_from, 1.0], t_to, &ode_options()).map_err(|(_, e)| map_failure(s_from, e))?;
        let y = sol.y_end();
        Ok((y[0], y[1]))
    }

    /// `(s, t) ↦ s'`: follow the characteristic back to `t = 0`, then apply `ρ`.
    pub fn forward_map(&self, s: f64, t: f64) -> Result<f64> {
        let (s0, _) = self.transport(s, t, 0.0)?;
        Ok(self.rho(s0))
    }

    /// `(s', t) ↦ s`.
    pub fn inverse_map(&self, s_new: f64, t: f64) -> Result<f64> {
        let s0 = self.rho_inverse(s_new)?;
        Ok(self.transport(s0, 0.0, t)?.0)
    }

    /// Largest gauge residuals over a grid in the new coordinates.
    pub fn gauge_residual(&self, s_new: &[f64], t: &[f64]) -> Result<(f64, f64)> {
        let pts: Vec<(f64, f64)> = t.iter().flat_map(|&tt| s_new.iter().map(move |&s| (s, tt))).collect();
        let res: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|&(s, tt)| {
                let j = self.first(s, tt)?;
                Ok((j.gs.dot(j.gt).abs(), (j.gs.norm_sq() + j.gt.norm_sq() - 1.0).abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(res.iter().fold((0.0f64, 0.0f64), |acc, r| (acc.0.max(r.0), acc.1.max(r.1))))
    }
}

impl Sheet for IsothermalizedSheet {
    fn first(&self, s_new: f64, t: f64) -> Result<Jet1> {
        let s0 = self.rho_inverse(s_new)?;
        let (s, jac) = self.transport(s0, 0.0, t)?;
        let j = self.base.sheet.first(s, t)?;
        let speed = -j.gs.dot(j.gt);
        Ok(Jet1 { g: j.g, gs: j.gs * (jac / self.rho_dot(s0)), gt: j.gs * speed + j.gt })
    }
}

/// An isothermal sheet with every slice reparameterized by arclength from
/// `s = 0`: `γ̃(σ, t) = γ(s(σ, t), t)` with `σ = ∫₀ˢ |γ_s(u, t)| du`.
pub struct ArclengthSlices<S: Sheet> {
    sheet: S,
}

impl<S: Sheet> ArclengthSlices<S> {
    pub fn new(sheet: S) -> Self {
        Self { sheet }
    }

    fn sigma(&self, s: f64, t: f64) -> f64 {
        integrate(|u| self.sheet.first(u, t).map_or(f64::NAN, |j| j.gs.norm()), 0.0, s, 1e-13)
    }

    /// `s(σ, t)` by Newton's method from `s = σ`, with `σ_s = |γ_s|`.
    fn param_of(&self, sigma: f64, t: f64) -> Result<f64> {
        let mut s = sigma;
        for _ in 0..50 {
            let f = self.sigma(s, t) - sigma;
            let d = self.sheet.first(s, t)?.gs.norm();
            if !(d > 0.0) || !f.is_finite() {
                return Err(SheetError::Undefined { s, t, what: "slice arclength" });
            }
            let step = f / d;
            s -= step;
            if step.abs() <= 1e-14 * s.abs().max(1.0) {
                return Ok(s);
            }
        }
        Ok(s)
    }
}

impl<S: Sheet> Sheet for ArclengthSlices<S> {
    fn first(&self, sigma: f64, t: f64) -> Result<Jet1> {
        let s = self.param_of(sigma, t)?;
        let j = self.sheet.first(s, t)?;
        let speed = j.gs.norm();
        // ∂σ/∂t at fixed s, then ∂s/∂t at fixed σ.
        let sigma_t = integrate(
            |u| match (self.sheet.first(u, t), self.sheet.second(u, t)) {
                (Ok(a), Ok(b)) => a.gs.dot(b.gst) / a.gs.norm(),
                _ => f64::NAN,
            },
            0.0,
            s,
            1e-13,
        );
        let s_t = -sigma_t / speed;
        Ok(Jet1 { g: j.g, gs: j.gs / speed, gt: j.gt + j.gs * s_t })
    }

    fn sing_tolerance(&self) -> f64 {
        self.sheet.sing_tolerance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve, FnSheet};
    use crate::gallery::{build, GalleryParams};
    use crate::geometry::{linspace, Vec2};

    fn sheared(k: f64, w: f64) -> GraphParamSheet {
        let sheet = FnSheet::new(move |s, t| Jet1 { g: Vec2::new(s + k * t, w * t), gs: Vec2::new(1.0, 0.0), gt: Vec2::new(k, w) });
        GraphParamSheet::new(Arc::new(sheet), (-4.0, 4.0), (-1.0, 1.0)).unwrap()
    }

    #[test]
    fn characteristics_closed_forms() {
        let g = sheared(0.3, 0.5);
        let cs = solve_characteristics(&g, &[-1.0, 0.0, 1.5], (-1.0, 1.0)).unwrap();
        for c in &cs {
            for t in [-0.7, 0.2, 1.0] {
                assert!((c.eval(t).0 - (c.seed - 0.3 * t)).abs() < 1e-12);
            }
            assert!((c.max_speed - 0.3).abs() < 1e-12);
        }
        let still = FnSheet::new(|s, _| Jet1 { g: Vec2::new(s, 0.0), gs: Vec2::new(1.0, 0.0), gt: Vec2::ZERO });
        let g = GraphParamSheet::new(Arc::new(still), (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let c = &solve_characteristics(&g, &[0.25], (-1.0, 1.0)).unwrap()[0];
        assert_eq!(c.eval(0.9).0, 0.25);
    }

    #[test]
    fn circle_is_already_orthogonal() {
        let sheet = evolve(build("shrinking_circle", &GalleryParams::default()).unwrap().data);
        let g = GraphParamSheet::new(Arc::new(sheet), (-3.0, 3.0), (-1.0, 1.0)).unwrap();
        let c = &solve_characteristics(&g, &[0.7], (-1.0, 1.0)).unwrap()[0];
        assert!(c.nodes().iter().all(|(_, s)| (s - 0.7).abs() < 1e-14));
    }

    #[test]
    fn window_exit_is_reported() {
        let g = sheared(0.9, 0.1);
        assert!(matches!(solve_characteristics(&g, &[-3.5], (0.0, 1.0)), Err(SheetError::WindowExit { .. })));
    }

    #[test]
    fn sheared_plane_round_trip() {
        let (k, w) = (0.3, 0.5);
        let iso = isothermalize(&sheared(k, w)).unwrap();
        let slope = 1.0 / (1.0 - w * w).sqrt();
        for &(s, t) in &[(0.0, 0.0), (1.0, 0.5), (-2.0, -0.8)] {
            let sp = iso.forward_map(s, t).unwrap();
            assert!((sp - slope * (s + k * t)).abs() < 1e-9, "{sp}");
            assert!((iso.inverse_map(sp, t).unwrap() - s).abs() < 1e-9);
        }
        let (o, n) = iso.gauge_residual(&linspace(-2.0, 2.0, 9), &linspace(-0.5, 0.5, 5)).unwrap();
        assert!(o <= 1e-6 && n <= 1e-6, "{o} {n}");
    }

    #[test]
    fn isothermal_input_maps_affinely() {
        let sheet = evolve(build("shrinking_circle", &GalleryParams::default()).unwrap().data);
        let g = GraphParamSheet::new(Arc::new(sheet), (-3.0, 3.0), (-1.0, 1.0)).unwrap();
        let iso = isothermalize(&g).unwrap();
        // The circle has |γ_s| = 1 only at t = 0, where ρ̇ = 1.
        assert!((iso.forward_map(1.0, 0.5).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn arclength_slices_round_trip() {
        let data = build("graph_sine", &GalleryParams::default()).unwrap().data;
        let sheet = ArclengthSlices::new(evolve(data));
        let g = GraphParamSheet::new(Arc::new(sheet), (-2.0, 2.0), (-0.4, 0.4)).unwrap();
        assert!(g.unit_speed_defect((0.5, 0.2)).unwrap() < 1e-12);
        let iso = isothermalize(&g).unwrap();
        let (o, n) = iso.gauge_residual(&[-0.5, 0.0, 0.7], &[-0.3, 0.25]).unwrap();
        assert!(o <= 1e-6 && n <= 1e-6, "{o} {n}");
    }
}
