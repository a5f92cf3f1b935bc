//! Piecewise cubic Hermite interpolation (C¹ by construction).

use super::Linear;

/// Cubic Hermite interpolant through `(x_i, y_i)` with slopes `d_i`.
#[derive(Clone, Debug)]
pub struct CubicHermite<T: Linear> {
    xs: Vec<f64>,
    ys: Vec<T>,
    ds: Vec<T>,
}

impl<T: Linear> CubicHermite<T> {
    /// Builds from knots, values and slopes. Knots must be strictly increasing.
    pub fn new(xs: Vec<f64>, ys: Vec<T>, ds: Vec<T>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == ds.len());
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        Self { xs, ys, ds }
    }

    /// Interpolant whose slopes come from the natural cubic spline through
    /// the data, so the result is C² at interior knots.
    pub fn natural_spline(xs: Vec<f64>, ys: Vec<T>) -> Self {
        let ds = spline_slopes(&xs, &ys);
        Self::new(xs, ys, ds)
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|k| *k <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    /// Value, first and second derivative at `x` (cubic extrapolation
    /// outside the knot range).
    pub fn eval_all(&self, x: f64) -> (T, T, T) {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let u = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let v = y0 * ((1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u))
            + m0 * (u * (1.0 - u) * (1.0 - u))
            + y1 * (u * u * (3.0 - 2.0 * u))
            + m1 * (u * u * (u - 1.0));
        let d = (y0 * (6.0 * u * (u - 1.0))
            + m0 * ((1.0 - u) * (1.0 - 3.0 * u))
            + y1 * (6.0 * u * (1.0 - u))
            + m1 * (u * (3.0 * u - 2.0)))
            * (1.0 / h);
        let dd = (y0 * (12.0 * u - 6.0)
            + m0 * (6.0 * u - 4.0)
            + y1 * (6.0 - 12.0 * u)
            + m1 * (6.0 * u - 2.0))
            * (1.0 / (h * h));
        (v, d, dd)
    }

    pub fn eval(&self, x: f64) -> T {
        self.eval_all(x).0
    }

    pub fn deriv(&self, x: f64) -> T {
        self.eval_all(x).1
    }
}

/// Slopes of the natural cubic spline through `(xs, ys)`.
pub fn spline_slopes<T: Linear>(xs: &[f64], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    assert!(n >= 2);
    if n == 2 {
        let d = (ys[1] - ys[0]) * (1.0 / (xs[1] - xs[0]));
        return vec![d, d];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) * (1.0 / h[i]))
        .collect();
    // Tridiagonal system  sub[i] m[i-1] + diag[i] m[i] + sup[i] m[i+1] = rhs[i].
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![T::zero(); n];
    diag[0] = 2.0;
    sup[0] = 1.0;
    rhs[0] = delta[0] * 3.0;
    for i in 1..n - 1 {
        sub[i] = h[i];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i - 1];
        rhs[i] = (delta[i - 1] * h[i] + delta[i] * h[i - 1]) * 3.0;
    }
    sub[n - 1] = 1.0;
    diag[n - 1] = 2.0;
    rhs[n - 1] = delta[n - 2] * 3.0;
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] = rhs[i] - rhs[i - 1] * w;
    }
    let mut m = vec![T::zero(); n];
    m[n - 1] = rhs[n - 1] * (1.0 / diag[n - 1]);
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - m[i + 1] * sup[i]) * (1.0 / diag[i]);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let xs = vec![-1.0, 0.3, 1.0, 2.5];
        let ys = xs.iter().map(|x| f(*x)).collect();
        let ds = xs.iter().map(|x| df(*x)).collect();
        let h = CubicHermite::new(xs, ys, ds);
        for x in [-0.7, 0.0, 0.9, 2.2] {
            let (v, d, dd) = h.eval_all(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d - df(x)).abs() < 1e-12);
            assert!((dd - 6.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn spline_is_c1_and_accurate() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.0628).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicHermite::natural_spline(xs.clone(), ys);
        for i in 1..100 {
            let k = xs[i];
            let (l, r) = (s.eval_all(k - 1e-12), s.eval_all(k + 1e-12));
            assert!((l.0 - r.0).abs() < 1e-10 && (l.1 - r.1).abs() < 1e-8);
        }
        assert!((s.eval(3.0) - 3f64.sin()).abs() < 1e-5);
        assert!((s.deriv(3.0) - 3f64.cos()).abs() < 1e-4);
    }
}
