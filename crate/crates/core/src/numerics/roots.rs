//! Bracketing root finders and one-dimensional extremum search.

/// Bisection for a sign change of `f` on `[a, b]`. Returns `None` when the
/// endpoint values do not bracket a root. An exact zero at an endpoint is
/// returned immediately.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Locates the switch point of a predicate with `p(a) != p(b)`, returning a
/// point within `tol` of the transition. The returned bracket `(lo, hi)` has
/// `p(lo) == p(a)` and `p(hi) == p(b)`.
pub fn bisect_predicate(p: impl Fn(f64) -> bool, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let pa = p(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        if p(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimizer of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))`, never worse than the better endpoint.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (fa, fb) = (f(a), f(b));
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fa < best.1 {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    best
}

/// Golden-section search for the maximizer; see [`golden_min`].
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), a, b, tol);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn predicate_switch() {
        let (lo, hi) = bisect_predicate(|x| x > 0.3, 0.0, 1.0, 1e-13);
        assert!(lo <= 0.3 && hi > 0.3 && hi - lo <= 1e-13);
    }

    #[test]
    fn golden_on_kink_and_smooth() {
        let (x, v) = golden_max(|x: f64| 1.0 - (x - 0.2).abs(), -1.0, 1.0, 1e-13);
        assert!((x - 0.2).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
        let (x, _) = golden_min(|x: f64| (x - 1.1).powi(2), 0.0, 3.0, 1e-10);
        assert!((x - 1.1).abs() < 1e-9);
    }
}
