//! Reparameterization of raw data onto the speed constraint
//! `|ċ|² + |v|² = 1`.
//!
//! With `μ = ⟨v_raw, U⊥⟩` (tangential velocity projected out) the new
//! parameter satisfies `dσ/ds = |ċ_raw| / √(1 − μ²)`. The normalized tangent
//! is built directly as `U √(1 − μ²)`, so the gauge conditions hold to
//! round-off even though `σ(s)` itself is only accurate to the quadrature
//! tolerance.

use std::sync::Arc;

use super::providers::{CurveProvider, VelocityProvider};
use crate::geometry::{Domain, Vec2};
use crate::numerics::interp::CubicHermite;
use crate::numerics::quadrature::Antiderivative;
use crate::tolerance::{self, ProviderKind};

type SpeedFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
type FluxFn = Box<dyn Fn(f64) -> Vec2 + Send + Sync>;

/// Raw quantities at one parameter value.
struct RawFrame {
    speed: f64,
    u: Vec2,
    mu: f64,
    q: f64,
}

fn raw_frame(c: &dyn CurveProvider, v: &dyn VelocityProvider, s: f64) -> RawFrame {
    let d = c.tangent(s);
    let speed = d.norm();
    let u = d / speed;
    let mu = v.velocity(s).dot(u.perp());
    RawFrame {
        speed,
        u,
        mu,
        q: (1.0 - mu * mu).sqrt(),
    }
}

pub(crate) struct Reparam {
    c: Arc<dyn CurveProvider>,
    v: Arc<dyn VelocityProvider>,
    sigma: Antiderivative<f64, SpeedFn>,
    flux: Antiderivative<Vec2, FluxFn>,
    guess: CubicHermite<f64>,
    periods: Option<(f64, f64)>,
    closed: bool,
    sigma_range: (f64, f64),
}

impl Reparam {
    /// `range` is the raw parameter interval to tabulate (one period for
    /// periodic data); σ is anchored at `origin`.
    pub(crate) fn new(
        c: Arc<dyn CurveProvider>,
        v: Arc<dyn VelocityProvider>,
        range: (f64, f64),
        origin: f64,
    ) -> Self {
        let (cc, vv) = (c.clone(), v.clone());
        let speed: SpeedFn = Box::new(move |s| {
            let f = raw_frame(cc.as_ref(), vv.as_ref(), s);
            f.speed / f.q
        });
        let (cc, vv) = (c.clone(), v.clone());
        // ∫ v dσ written in the raw parameter: μ U⊥ (dσ/ds) ds.
        let flux_fn: FluxFn = Box::new(move |s| {
            let f = raw_frame(cc.as_ref(), vv.as_ref(), s);
            f.u.perp() * (f.mu * f.speed / f.q)
        });
        let mut breaks = c.breakpoints();
        breaks.extend(v.breakpoints());
        let spacing = ((range.1 - range.0) / 4000.0).clamp(1e-3, 0.02);
        let sigma = Antiderivative::new(
            speed,
            range.0,
            range.1,
            origin,
            spacing,
            &breaks,
            tolerance::QUADRATURE * 0.01,
        );
        let flux = Antiderivative::new(
            flux_fn,
            range.0,
            range.1,
            origin,
            spacing,
            &breaks,
            tolerance::QUADRATURE * 0.01,
        );
        let n = (((range.1 - range.0) / spacing).ceil() as usize).max(8);
        let ss = crate::geometry::linspace(range.0, range.1, n + 1);
        let sig: Vec<f64> = ss.iter().map(|s| sigma.eval(*s)).collect();
        let slopes: Vec<f64> = ss.iter().map(|s| 1.0 / sigma.integrand(*s)).collect();
        let guess = CubicHermite::new(sig.clone(), ss, slopes);
        let (periods, closed) = match c.domain() {
            Domain::Periodic { period, closed } => (Some((period, sig[n] - sig[0])), closed),
            Domain::Interval { .. } => (None, false),
        };
        Self {
            c,
            v,
            sigma,
            flux,
            guess,
            periods,
            closed,
            sigma_range: (sig[0], sig[n]),
        }
    }

    pub(crate) fn sigma_of(&self, s: f64) -> f64 {
        self.sigma.eval(s)
    }

    /// σ of a raw parameter anywhere on the line, using periodicity.
    pub(crate) fn s_to_sigma_periodic(&self, s: f64) -> f64 {
        match self.periods {
            Some((p, ps)) => {
                let k = (s / p).floor();
                self.sigma.eval(s - k * p) + k * ps
            }
            None => self.sigma.eval(s),
        }
    }

    pub(crate) fn sigma_range(&self) -> (f64, f64) {
        self.sigma_range
    }

    /// Inverse map σ ↦ s by Newton iteration from an interpolated guess.
    pub(crate) fn s_of(&self, sigma: f64) -> f64 {
        let (base_sigma, shift) = match self.periods {
            Some((p, ps)) => {
                let k = ((sigma - self.sigma_range.0) / ps).floor();
                (sigma - k * ps, k * p)
            }
            None => (sigma, 0.0),
        };
        let mut s = self.guess.eval(base_sigma);
        for _ in 0..12 {
            let f = self.sigma.eval(s) - base_sigma;
            let step = f / self.sigma.integrand(s);
            s -= step;
            if step.abs() <= 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        s + shift
    }

    /// `∫₀^σ v dσ'` for the normalized velocity, taken within one period.
    fn flux_of(&self, sigma: f64) -> Vec2 {
        self.flux.eval(self.s_of(sigma))
    }

    fn frame(&self, sigma: f64) -> (f64, RawFrame) {
        let s = self.s_of(sigma);
        (s, raw_frame(self.c.as_ref(), self.v.as_ref(), s))
    }

    /// Derivative data in s: (θ_s, μ_s) when second derivatives are known.
    fn rates(&self, s: f64, f: &RawFrame) -> Option<(f64, f64)> {
        let cdd = self.c.second(s)?;
        let vd = self.v.derivative(s)?;
        let theta_s = cdd.dot(f.u.perp()) / f.speed;
        let v = self.v.velocity(s);
        let mu_s = vd.dot(f.u.perp()) - theta_s * v.dot(f.u);
        Some((theta_s, mu_s))
    }

    fn domain(&self) -> Domain {
        match self.periods {
            Some((_, ps)) => Domain::Periodic {
                period: ps,
                closed: self.closed,
            },
            None => Domain::Interval {
                min: self.sigma_range.0,
                max: self.sigma_range.1,
            },
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.c.breakpoints();
        b.extend(self.v.breakpoints());
        b.into_iter().map(|s| self.sigma_of(s)).collect()
    }
}

/// The curve of a [`Reparam`], as a provider in the new parameter.
pub(crate) struct NormalizedCurve(pub(crate) Arc<Reparam>);

impl CurveProvider for NormalizedCurve {
    fn position(&self, sigma: f64) -> Vec2 {
        self.0.c.position(self.0.s_of(sigma))
    }
    fn tangent(&self, sigma: f64) -> Vec2 {
        let (_, f) = self.0.frame(sigma);
        f.u * f.q
    }
    fn second(&self, sigma: f64) -> Option<Vec2> {
        let (s, f) = self.0.frame(sigma);
        let (theta_s, mu_s) = self.0.rates(s, &f)?;
        let q_s = -f.mu * mu_s / f.q;
        let d_ds = f.u.perp() * (theta_s * f.q) + f.u * q_s;
        Some(d_ds * (f.q / f.speed))
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn kind(&self) -> ProviderKind {
        self.0.c.kind()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}

/// The velocity `μ U⊥` of a [`Reparam`] in the new parameter.
pub(crate) struct NormalizedVelocity(pub(crate) Arc<Reparam>);

impl VelocityProvider for NormalizedVelocity {
    fn velocity(&self, sigma: f64) -> Vec2 {
        let (_, f) = self.0.frame(sigma);
        f.u.perp() * f.mu
    }
    fn derivative(&self, sigma: f64) -> Option<Vec2> {
        let (s, f) = self.0.frame(sigma);
        let (theta_s, mu_s) = self.0.rates(s, &f)?;
        let d_ds = f.u.perp() * mu_s - f.u * (f.mu * theta_s);
        Some(d_ds * (f.q / f.speed))
    }
    fn antiderivative(&self, sigma: f64) -> Option<Vec2> {
        // Only valid on the tabulated range; periodic extension is applied by the caller.
        Some(self.0.flux_of(sigma))
    }
    fn kind(&self) -> ProviderKind {
        self.0.v.kind()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}
