//! Dormand–Prince 5(4) integration with cubic Hermite dense output.

/// Step-size control for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            max_step: f64::INFINITY,
            initial_step: 1e-3,
            max_steps: 200_000,
        }
    }
}

/// Why an integration stopped early.
#[derive(Clone, Debug, PartialEq)]
pub enum OdeFailure {
    /// The right-hand side refused to evaluate (returned `Err`) at time `t`.
    Rhs { t: f64, reason: String },
    /// The step size underflowed or the step budget ran out at time `t`.
    Stalled { t: f64 },
}

/// Accepted steps of a solution, with first derivatives at every node.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub fs: Vec<Vec<f64>>,
}

impl OdeSolution {
    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn y_end(&self) -> &[f64] {
        self.ys.last().unwrap()
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.ts.len();
        if n < 2 {
            return 0;
        }
        let forward = self.ts[n - 1] >= self.ts[0];
        let i = if forward {
            self.ts.partition_point(|x| *x <= t)
        } else {
            self.ts.partition_point(|x| *x >= t)
        };
        i.clamp(1, n - 1) - 1
    }

    /// Dense output: cubic Hermite on the step containing `t`. Returns the
    /// state and its time derivative.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        if self.ts.len() == 1 {
            return (self.ys[0].clone(), self.fs[0].clone());
        }
        let i = self.locate(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let u = (t - t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        let (d00, d10, d01, d11) = (
            6.0 * u * (u - 1.0) / h,
            (1.0 - u) * (1.0 - 3.0 * u),
            6.0 * u * (1.0 - u) / h,
            u * (3.0 * u - 2.0),
        );
        let (y0, y1, f0, f1) = (&self.ys[i], &self.ys[i + 1], &self.fs[i], &self.fs[i + 1]);
        let y = (0..y0.len())
            .map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k])
            .collect();
        let dy = (0..y0.len())
            .map(|k| d00 * y0[k] + d10 * f0[k] + d01 * y1[k] + d11 * f1[k])
            .collect();
        (y, dy)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &[f64], terms: &[(f64, &[f64])], h: f64) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `f` may return `Err` to signal that the state left its admissible region;
/// the solution computed so far is returned alongside the failure.
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution, (OdeSolution, OdeFailure)>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>, String>,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let f0 = match f(t0, y0) {
        Ok(v) => v,
        Err(reason) => {
            let sol = OdeSolution {
                ts: vec![t0],
                ys: vec![y0.to_vec()],
                fs: vec![vec![0.0; y0.len()]],
            };
            return Err((sol, OdeFailure::Rhs { t: t0, reason }));
        }
    };
    let mut sol = OdeSolution {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        fs: vec![f0.clone()],
    };
    if t0 == t1 {
        return Ok(sol);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f0;
    let mut h = opts.initial_step.min(opts.max_step).min((t1 - t0).abs());
    let mut steps = 0usize;
    // A failing stage evaluation first shrinks the step; only a tiny step
    // that still fails is reported.
    macro_rules! try_stage {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(reason) => {
                    if h > 1e-10 {
                        h *= 0.25;
                        continue;
                    }
                    return Err((sol, OdeFailure::Rhs { t, reason }));
                }
            }
        };
    }
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > opts.max_steps || h < 1e-14 * t.abs().max(1.0) {
            return Err((sol, OdeFailure::Stalled { t }));
        }
        let last = h >= (t1 - t).abs();
        if last {
            h = (t1 - t).abs();
        }
        let hs = dir * h;
        let stage = |c: f64, ynew: &[f64]| f(t + c * hs, ynew);
        let k2 = try_stage!(stage(C2, &axpy(&y, &[(A21, &k1)], hs)));
        let k3 = try_stage!(stage(C3, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs)));
        let k4 = try_stage!(stage(
            C4,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs)
        ));
        let k5 = try_stage!(stage(
            C5,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs)
        ));
        let y6 = axpy(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            hs,
        );
        let k6 = try_stage!(stage(1.0, &y6));
        let ynew = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            hs,
        );
        let tnew = if last { t1 } else { t + hs };
        let k7 = try_stage!(f(tnew, &ynew));
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 || h <= 1e-13 {
            t = tnew;
            y = ynew;
            k1 = k7;
            sol.ts.push(t);
            sol.ys.push(y.clone());
            sol.fs.push(k1.clone());
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(sol)
}
