//! Adaptive Gauss–Kronrod (7/15) quadrature and a cumulative antiderivative
//! built from it.

use super::Linear;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel on `[a, b]`: returns the Kronrod estimate and
/// the difference from the embedded 7-point Gauss rule.
pub fn gk15<T: Linear>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let pair = f1 + f2;
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Subintervals are bisected depth-first, so the evaluation order (and hence
/// the rounding) is fixed for a given input. `a > b` is allowed and flips sign.
pub fn integrate<T: Linear>(f: impl Fn(f64) -> T, a: f64, b: f64, tol: f64) -> T {
    if a == b {
        return T::zero();
    }
    const MAX_DEPTH: u32 = 48;
    // Splitting stops once this many panels were refined, which bounds the
    // work when noise in `f` keeps the error estimate above `tol`.
    const MAX_SPLITS: usize = 20_000;
    let mut splits = 0usize;
    let mut total = T::zero();
    let mut stack: Vec<(f64, f64, f64, u32)> = vec![(a, b, tol, 0)];
    while let Some((lo, hi, tl, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        let width_ok = (hi - lo).abs() <= f64::EPSILON * 64.0 * lo.abs().max(hi.abs()).max(1.0);
        // Below this the estimate measures rounding in f, not truncation.
        let noise = 1e3 * f64::EPSILON * val.magnitude();
        if err <= tl || err <= noise || depth >= MAX_DEPTH || width_ok || splits >= MAX_SPLITS {
            total = total + val;
        } else {
            splits += 1;
            let mid = 0.5 * (lo + hi);
            // Right half pushed first so the left half is processed first.
            stack.push((mid, hi, 0.5 * tl, depth + 1));
            stack.push((lo, mid, 0.5 * tl, depth + 1));
        }
    }
    total
}

/// [`integrate`] with a tolerance relative to a first Gauss–Kronrod estimate.
pub fn integrate_relative<T: Linear>(f: impl Fn(f64) -> T, a: f64, b: f64, rtol: f64) -> T {
    let scale = gk15(&f, a, b).0.magnitude();
    integrate(f, a, b, (rtol * scale).max(f64::MIN_POSITIVE))
}

/// A cumulative antiderivative `F(s) = ∫_{origin}^{s} f` tabulated at knots.
///
/// Evaluation adds a local adaptive integral from the nearest knot, so the
/// result is accurate to the quadrature tolerance everywhere, not only at the
/// knots.
pub struct Antiderivative<T: Linear, F: Fn(f64) -> T> {
    f: F,
    knots: Vec<f64>,
    values: Vec<T>,
    tol: f64,
}

impl<T: Linear, F: Fn(f64) -> T> Antiderivative<T, F> {
    /// Tabulates on `[lo, hi]` with knot spacing at most `spacing`.
    /// `origin` must lie in `[lo, hi]`; `breaks` are added as knots so that
    /// kinks in `f` never sit inside a local panel.
    pub fn new(
        f: F,
        lo: f64,
        hi: f64,
        origin: f64,
        spacing: f64,
        breaks: &[f64],
        tol: f64,
    ) -> Self {
        let mut knots = crate::geometry::linspace_max_step(lo, hi, spacing);
        knots.push(origin);
        knots.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let i0 = knots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - origin).abs().total_cmp(&(b.1 - origin).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        knots[i0] = origin;
        let mut values = vec![T::zero(); knots.len()];
        for i in i0 + 1..knots.len() {
            values[i] = values[i - 1] + integrate(&f, knots[i - 1], knots[i], tol);
        }
        for i in (0..i0).rev() {
            values[i] = values[i + 1] - integrate(&f, knots[i], knots[i + 1], tol);
        }
        Self {
            f,
            knots,
            values,
            tol,
        }
    }

    pub fn lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn hi(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Index of the knot nearest to `s`, staying on the same side of any
    /// knot (so local panels never straddle a tabulated break).
    fn nearest(&self, s: f64) -> usize {
        let i = self.knots.partition_point(|k| *k <= s);
        if i == 0 {
            return 0;
        }
        if i >= self.knots.len() {
            return self.knots.len() - 1;
        }
        if s - self.knots[i - 1] <= self.knots[i] - s {
            i - 1
        } else {
            i
        }
    }

    pub fn eval(&self, s: f64) -> T {
        let k = self.nearest(s);
        let base = self.knots[k];
        if base == s {
            return self.values[k];
        }
        self.values[k] + integrate(&self.f, base, s, self.tol)
    }

    pub fn integrand(&self, s: f64) -> T {
        (self.f)(s)
    }
}
