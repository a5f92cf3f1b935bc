//! The angle field `β(s,t) = α₊(s+t) − α₋(s−t)`, the singular set where
//! `β ∈ 2πℤ`, sufficient criteria for and against singularities, and the
//! classification of unit-tangent discontinuities.

mod criteria;
mod scan;
mod tangent;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SheetError};
use crate::geometry::Vec2;
use crate::initial_data::InitialData;

pub use criteria::{
    no_singularity_criterion, semicircle_criterion, short_time_horizon, short_time_horizon_with, Horizon,
    NoSingularityResult, RegularityVerdict, SemicircleResult, SemicircleVerdict,
};
pub use scan::{
    find_singular_set, find_singular_set_with, CellRun, ComponentClass, ScanOptions, SingularComponent,
    SingularPoint, SingularSet,
};
pub use tangent::{
    classify_tangent_discontinuity, classify_tangent_discontinuity_with, find_tangent_sign_change_time,
    unit_tangent, Classification, DiscontinuityKind, SignChange, SignChangeOptions, ZeroSet,
};

/// `β` as an algebraic combination of the stored lifts of the data.
#[derive(Clone, Debug)]
pub struct BetaField {
    data: Arc<InitialData>,
}

/// The `β` field of the data.
pub fn beta(data: Arc<InitialData>) -> BetaField {
    BetaField { data }
}

impl BetaField {
    pub fn data(&self) -> &Arc<InitialData> {
        &self.data
    }

    /// `β(s,t)` without window checks.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.data.alpha_plus(s + t) - self.data.alpha_minus(s - t)
    }

    /// `sin(β/2)`, which equals `±|γ_s|`.
    #[inline]
    pub fn sin_half(&self, s: f64, t: f64) -> f64 {
        (0.5 * self.eval(s, t)).sin()
    }

    /// `e = (−sin m, cos m)` with `m = (α₊(s+t) + α₋(s−t))/2`, so that
    /// `γ_s = sin(β/2) e`.
    pub fn e(&self, s: f64, t: f64) -> Vec2 {
        let m = 0.5 * (self.data.alpha_plus(s + t) + self.data.alpha_minus(s - t));
        Vec2::new(-m.sin(), m.cos())
    }

    /// Signed distance of `β` to the nearest multiple of 2π, in `(−π, π]`.
    pub fn residual(&self, s: f64, t: f64) -> f64 {
        crate::geometry::wrap_angle(self.eval(s, t))
    }

    pub fn check(&self, s: f64, t: f64) -> Result<()> {
        self.data.check(s + t)?;
        self.data.check(s - t)
    }
}

/// A characteristic diamond `{s1 + |t| ≤ s ≤ s2 − |t|}`, the square
/// `[s1, s2]²` in the null coordinates `x = s + t`, `y = s − t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicDiamond {
    pub s1: f64,
    pub s2: f64,
}

impl CharacteristicDiamond {
    pub fn new(s1: f64, s2: f64) -> Result<Self> {
        if !(s1 < s2) || !s1.is_finite() || !s2.is_finite() {
            return Err(SheetError::InvalidInput(format!("diamond needs s1 < s2, got [{s1}, {s2}]")));
        }
        Ok(Self { s1, s2 })
    }

    /// Diamond of half-width `r` about `center`.
    pub fn centered(center: f64, r: f64) -> Result<Self> {
        Self::new(center - r, center + r)
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        self.s1 + t.abs() <= s && s <= self.s2 - t.abs()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.s2 - self.s1)
    }
}
