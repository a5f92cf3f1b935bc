//! The isothermal-gauge evolution `γ(s,t) = ½(c(s+t) + c(s−t) + W(s+t) − W(s−t))`
//! and generic sheet plumbing (grids, CSV and OBJ export).

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SheetError};
use crate::geometry::Vec2;
use crate::initial_data::InitialData;
use crate::tolerance;

/// Position and first derivatives of a sheet at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Jet1 {
    pub g: Vec2,
    pub gs: Vec2,
    pub gt: Vec2,
}

/// Second derivatives of a sheet at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Jet2 {
    pub gss: Vec2,
    pub gst: Vec2,
    pub gtt: Vec2,
}

/// A map `(s,t) ↦ γ(s,t) ∈ ℝ²` whose graph `(t, γ)` is a surface in Minkowski space.
pub trait Sheet: Send + Sync {
    fn first(&self, s: f64, t: f64) -> Result<Jet1>;

    /// Second derivatives; the default differentiates [`Sheet::first`].
    fn second(&self, s: f64, t: f64) -> Result<Jet2> {
        fd_second(self, s, t, tolerance::FD_STEP)
    }

    fn eval(&self, s: f64, t: f64) -> Result<Vec2> {
        Ok(self.first(s, t)?.g)
    }

    /// Threshold on `|γ_s|` below which a point counts as singular.
    fn sing_tolerance(&self) -> f64 {
        tolerance::SING_ANALYTIC
    }
}

/// Centred differences of the first derivatives with one Richardson level.
pub fn fd_second<S: Sheet + ?Sized>(sheet: &S, s: f64, t: f64, h: f64) -> Result<Jet2> {
    let diff = |h: f64| -> Result<Jet2> {
        let (sp, sm) = (sheet.first(s + h, t)?, sheet.first(s - h, t)?);
        let (tp, tm) = (sheet.first(s, t + h)?, sheet.first(s, t - h)?);
        let k = 0.5 / h;
        Ok(Jet2 {
            gss: (sp.gs - sm.gs) * k,
            gst: (tp.gs - tm.gs) * k,
            gtt: (tp.gt - tm.gt) * k,
        })
    };
    let (coarse, fine) = (diff(h)?, diff(0.5 * h)?);
    let rich = |c: Vec2, f: Vec2| (f * 4.0 - c) / 3.0;
    Ok(Jet2 {
        gss: rich(coarse.gss, fine.gss),
        gst: rich(coarse.gst, fine.gst),
        gtt: rich(coarse.gtt, fine.gtt),
    })
}

/// The evolved sheet. Derivatives come from the closed forms
/// `γ_s = ½(a₊(s+t) − a₋(s−t))`, `γ_t = ½(a₊(s+t) + a₋(s−t))`.
#[derive(Clone, Debug)]
pub struct IsothermalSheet {
    data: Arc<InitialData>,
}

/// Builds the evolution of normalized data.
pub fn evolve(data: Arc<InitialData>) -> IsothermalSheet {
    IsothermalSheet { data }
}

impl IsothermalSheet {
    pub fn data(&self) -> &Arc<InitialData> {
        &self.data
    }

    fn null_coords(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        let (x, y) = (s + t, s - t);
        self.data.check(x)?;
        self.data.check(y)?;
        Ok((x, y))
    }

    pub fn ds(&self, s: f64, t: f64) -> Result<Vec2> {
        let (x, y) = self.null_coords(s, t)?;
        Ok((self.data.a_plus(x) - self.data.a_minus(y)) * 0.5)
    }

    pub fn dt(&self, s: f64, t: f64) -> Result<Vec2> {
        let (x, y) = self.null_coords(s, t)?;
        Ok((self.data.a_plus(x) + self.data.a_minus(y)) * 0.5)
    }
}

impl Sheet for IsothermalSheet {
    fn first(&self, s: f64, t: f64) -> Result<Jet1> {
        let (x, y) = self.null_coords(s, t)?;
        let d = &self.data;
        let (ap, am) = (d.a_plus(x), d.a_minus(y));
        let g = if t == 0.0 {
            d.c(s)
        } else {
            (d.c(x) + d.c(y) + d.w(x) - d.w(y)) * 0.5
        };
        Ok(Jet1 {
            g,
            gs: (ap - am) * 0.5,
            gt: (ap + am) * 0.5,
        })
    }

    fn second(&self, s: f64, t: f64) -> Result<Jet2> {
        let (x, y) = self.null_coords(s, t)?;
        match (self.data.a_plus_dot(x), self.data.a_minus_dot(y)) {
            (Some(p), Some(m)) => {
                let diag = (p - m) * 0.5;
                Ok(Jet2 {
                    gss: diag,
                    gst: (p + m) * 0.5,
                    gtt: diag,
                })
            }
            _ => fd_second(self, s, t, tolerance::FD_STEP),
        }
    }

    fn sing_tolerance(&self) -> f64 {
        self.data.tolerances().sing
    }
}

type FirstFn = dyn Fn(f64, f64) -> Jet1 + Send + Sync;
type SecondFn = dyn Fn(f64, f64) -> Jet2 + Send + Sync;

/// A sheet given by closures, for parameterizations that are not in
/// isothermal gauge and for test surfaces.
#[derive(Clone)]
pub struct FnSheet {
    first: Arc<FirstFn>,
    second: Option<Arc<SecondFn>>,
}

impl FnSheet {
    pub fn new(first: impl Fn(f64, f64) -> Jet1 + Send + Sync + 'static) -> Self {
        Self {
            first: Arc::new(first),
            second: None,
        }
    }

    pub fn with_second(
        mut self,
        second: impl Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        self.second = Some(Arc::new(second));
        self
    }
}

impl Sheet for FnSheet {
    fn first(&self, s: f64, t: f64) -> Result<Jet1> {
        Ok((self.first)(s, t))
    }

    fn second(&self, s: f64, t: f64) -> Result<Jet2> {
        match &self.second {
            Some(f) => Ok(f(s, t)),
            None => fd_second(self, s, t, tolerance::FD_STEP),
        }
    }
}

/// Values of a sheet on a tensor grid, row-major with `s` fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SheetGrid {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub jets: Vec<Jet1>,
}

impl SheetGrid {
    pub fn at(&self, i_s: usize, i_t: usize) -> &Jet1 {
        &self.jets[i_t * self.s.len() + i_s]
    }

    /// CSV with header `s,t,g1,g2,gs1,gs2,gt1,gt2`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "s,t,g1,g2,gs1,gs2,gt1,gt2")?;
        for (j, t) in self.t.iter().enumerate() {
            for (i, s) in self.s.iter().enumerate() {
                let p = self.at(i, j);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    s, t, p.g.x, p.g.y, p.gs.x, p.gs.y, p.gt.x, p.gt.y
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluates on every `(s, t)` pair. Rows (fixed `t`) run in parallel; the
/// result does not depend on the schedule.
pub fn evaluate_grid<S: Sheet + ?Sized>(
    sheet: &S,
    s_grid: &[f64],
    t_grid: &[f64],
) -> Result<SheetGrid> {
    let rows: Vec<Vec<Jet1>> = t_grid
        .par_iter()
        .map(|&t| {
            s_grid
                .iter()
                .map(|&s| sheet.first(s, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SheetGrid {
        s: s_grid.to_vec(),
        t: t_grid.to_vec(),
        jets: rows.into_iter().flatten().collect(),
    })
}

/// Triangulated surface `φ(s,t) = (t, γ¹, γ²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// OBJ text: `v` lines, then 1-indexed `f` lines, LF endings.
    pub fn write_obj(&self, mut out: impl Write) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for f in &self.triangles {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }

    pub fn to_obj_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_obj(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("OBJ is ASCII")
    }
}

/// Meshes the sheet over the grid, two triangles per cell.
pub fn mesh_export<S: Sheet + ?Sized>(sheet: &S, s_grid: &[f64], t_grid: &[f64]) -> Result<Mesh> {
    if s_grid.len() < 2 || t_grid.len() < 2 {
        return Err(SheetError::InvalidInput(
            "a mesh needs at least a 2x2 grid".into(),
        ));
    }
    let grid = evaluate_grid(sheet, s_grid, t_grid)?;
    let ns = s_grid.len();
    let vertices = grid
        .jets
        .iter()
        .enumerate()
        .map(|(k, j)| [t_grid[k / ns], j.g.x, j.g.y])
        .collect();
    let mut triangles = Vec::with_capacity(2 * (ns - 1) * (t_grid.len() - 1));
    for r in 0..t_grid.len() - 1 {
        for i in 0..ns - 1 {
            let a = r * ns + i;
            let (b, c, d) = (a + 1, a + ns, a + ns + 1);
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    Ok(Mesh {
        vertices,
        triangles,
    })
}
