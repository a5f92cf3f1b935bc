//! Default numerical tolerances. Analytic data gets the tight values;
//! sampled (interpolated) data the looser ones.

use serde::{Deserialize, Serialize};

/// Gauge residual allowed for analytic providers.
pub const GAUGE_ANALYTIC: f64 = 1e-9;
/// Gauge residual allowed for interpolated providers.
pub const GAUGE_SAMPLED: f64 = 1e-6;
/// Margin below 1 that |v| must keep.
pub const TIMELIKE: f64 = 1e-12;
/// Smallest admissible |c'| on the sample grid.
pub const IMMERSION: f64 = 1e-8;
/// Slack below π for the raw angle step between adjacent lift samples.
pub const UNWRAP: f64 = 1e-3;
/// Singular-set tolerance on β mod 2π, analytic data.
pub const SING_ANALYTIC: f64 = 1e-10;
/// Singular-set tolerance on β mod 2π, sampled data.
pub const SING_SAMPLED: f64 = 1e-6;
/// Angular slack for the semicircle and odd-multiple tests.
pub const ANGLE: f64 = 1e-8;
/// Local error target for ODE steps.
pub const ODE: f64 = 1e-9;
/// Gauge residual accepted after isothermalization.
pub const TRANSFORM: f64 = 1e-6;
/// Curvature agreement at t = 0.
pub const CURVATURE: f64 = 1e-6;
/// Adaptive quadrature tolerance for antiderivatives.
pub const QUADRATURE: f64 = 1e-11;
/// Bisection tolerance for inverse maps.
pub const INVERSE: f64 = 1e-10;
/// Step for centred differences (with one Richardson level).
pub const FD_STEP: f64 = 1e-4;

/// How a provider represents its data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Analytic,
    Sampled,
}

/// The pair of tolerances that depend on the provider kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gauge: f64,
    pub sing: f64,
}

impl Tolerances {
    pub fn for_kind(kind: ProviderKind) -> Self {
        match kind {
            ProviderKind::Analytic => Self {
                gauge: GAUGE_ANALYTIC,
                sing: SING_ANALYTIC,
            },
            ProviderKind::Sampled => Self {
                gauge: GAUGE_SAMPLED,
                sing: SING_SAMPLED,
            },
        }
    }
}
