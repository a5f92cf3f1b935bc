//! Low-discrepancy point sets for sampling parameter rectangles.

/// Radical inverse of `i` in the given prime base.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// The `i`-th point of the two-dimensional Halton sequence (bases 2 and 3)
/// in the unit square. Index 0 is skipped because it maps to the origin.
pub fn halton2(i: u64) -> (f64, f64) {
    (radical_inverse(i + 1, 2), radical_inverse(i + 1, 3))
}

/// `n` Halton points mapped into the rectangle `[s0, s1] × [t0, t1]`.
pub fn halton_rect(n: usize, s: (f64, f64), t: (f64, f64)) -> Vec<(f64, f64)> {
    (0..n as u64)
        .map(|i| {
            let (u, v) = halton2(i);
            (s.0 + (s.1 - s.0) * u, t.0 + (t.1 - t.0) * v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_halton_points() {
        assert_eq!(halton2(0), (0.5, 1.0 / 3.0));
        let (u, v) = halton2(1);
        assert!((u - 0.25).abs() < 1e-15 && (v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn points_fill_rectangle() {
        let pts = halton_rect(1000, (-1.0, 1.0), (0.0, 2.0));
        assert!(pts
            .iter()
            .all(|(s, t)| (-1.0..=1.0).contains(s) && (0.0..=2.0).contains(t)));
        let left = pts.iter().filter(|(s, _)| *s < 0.0).count();
        assert!((480..=520).contains(&left));
    }
}
