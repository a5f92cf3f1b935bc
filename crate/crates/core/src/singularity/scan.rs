//! Grid scan for `β ∈ 2πℤ` over a characteristic diamond.
//!
//! In null coordinates the diamond is a square and `β = A(x) − B(y)` with
//! `A = α₊`, `B = α₋`, so the range of `β` over a grid cell is bounded by the
//! ranges of `A` and `B` over the cell edges. Those ranges are taken from the
//! node values, extended by a golden-section search wherever the node
//! sequence has a local extremum. A cell is hit when its `β` range reaches a
//! multiple of 2π within `τ_sing`; hit cells are refined to points by
//! bisection and grouped into components by 8-adjacency.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::CharacteristicDiamond;
use crate::error::Result;
use crate::geometry::{linspace_max_step, wrap_angle};
use crate::initial_data::InitialData;
use crate::numerics::roots::{golden_max, golden_min};

/// Options for [`find_singular_set_with`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Spacing of the null-coordinate grid.
    pub grid_step: f64,
    /// Restricts the scan to `|t| ≤ t_max`.
    pub t_max: Option<f64>,
    /// Overrides the data's singular-set tolerance.
    pub tolerance: Option<f64>,
}

impl ScanOptions {
    pub fn new(grid_step: f64) -> Self {
        Self { grid_step, t_max: None, tolerance: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    Isolated,
    Segment,
    Region,
}

impl ComponentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::Isolated => "isolated",
            ComponentClass::Segment => "segment",
            ComponentClass::Region => "region",
        }
    }
}

/// A located point with `|β − 2πk| ≤ τ_sing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularPoint {
    pub s: f64,
    pub t: f64,
    pub beta_mod_2pi: f64,
    pub component: usize,
}

/// Consecutive hit cells `start..=end` (x-cell indices) in y-cell row `row`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CellRun {
    pub row: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularComponent {
    pub id: usize,
    pub class: ComponentClass,
    pub cells: usize,
    pub runs: Vec<CellRun>,
}

/// Result of a scan. Cells are indexed on the null grid `x_nodes × y_nodes`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularSet {
    pub diamond: CharacteristicDiamond,
    pub tolerance: f64,
    #[serde(skip)]
    pub x_nodes: Vec<f64>,
    #[serde(skip)]
    pub y_nodes: Vec<f64>,
    pub points: Vec<SingularPoint>,
    pub components: Vec<SingularComponent>,
}

impl SingularSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `((x0, x1), (y0, y1))` of a cell.
    pub fn cell(&self, i: usize, j: usize) -> ((f64, f64), (f64, f64)) {
        ((self.x_nodes[i], self.x_nodes[i + 1]), (self.y_nodes[j], self.y_nodes[j + 1]))
    }

    /// Whether the cell containing null coordinates `(x, y)` was hit.
    pub fn hit_at_null(&self, x: f64, y: f64) -> bool {
        let locate = |nodes: &[f64], v: f64| -> Option<usize> {
            if v < nodes[0] || v > *nodes.last()? {
                return None;
            }
            Some(nodes.partition_point(|n| *n <= v).clamp(1, nodes.len() - 1) - 1)
        };
        let (Some(i), Some(j)) = (locate(&self.x_nodes, x), locate(&self.y_nodes, y)) else {
            return false;
        };
        self.components
            .iter()
            .flat_map(|c| &c.runs)
            .any(|r| r.row == j && r.start <= i && i <= r.end)
    }

    /// CSV with header `s,t,beta_mod_2pi,component_id,class`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "s,t,beta_mod_2pi,component_id,class")?;
        for p in &self.points {
            let class = self.components[p.component].class.as_str();
            writeln!(out, "{},{},{},{},{}", p.s, p.t, p.beta_mod_2pi, p.component, class)?;
        }
        Ok(())
    }
}

/// Value and location of an extremum.
#[derive(Clone, Copy, Debug)]
struct Ext {
    at: f64,
    val: f64,
}

/// Per-cell value ranges of a function along one null axis.
struct AxisRanges {
    lo: Vec<Ext>,
    hi: Vec<Ext>,
}

fn axis_ranges(f: &(dyn Fn(f64) -> f64 + Sync), nodes: &[f64]) -> AxisRanges {
    let vals: Vec<f64> = nodes.par_iter().map(|x| f(*x)).collect();
    let cells = nodes.len() - 1;
    let mut lo = Vec::with_capacity(cells);
    let mut hi = Vec::with_capacity(cells);
    for i in 0..cells {
        let (a, b) = (Ext { at: nodes[i], val: vals[i] }, Ext { at: nodes[i + 1], val: vals[i + 1] });
        if a.val <= b.val {
            lo.push(a);
            hi.push(b);
        } else {
            lo.push(b);
            hi.push(a);
        }
    }
    // Extrema hiding between nodes: search around every discrete extremum.
    let n = nodes.len();
    let tol = |x: f64| 1e-13 * x.abs().max(1.0);
    let refined: Vec<(usize, Option<Ext>, Option<Ext>)> = (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let left = if i > 0 { Some(vals[i - 1]) } else { None };
            let right = if i + 1 < n { Some(vals[i + 1]) } else { None };
            let v = vals[i];
            let is_max = left.map_or(true, |l| v >= l) && right.map_or(true, |r| v >= r);
            let is_min = left.map_or(true, |l| v <= l) && right.map_or(true, |r| v <= r);
            let flat = left.map_or(true, |l| l == v) && right.map_or(true, |r| r == v);
            if flat || !(is_max || is_min) {
                return None;
            }
            let a = nodes[i.saturating_sub(1)];
            let b = nodes[(i + 1).min(n - 1)];
            let mx = is_max.then(|| {
                let (at, val) = golden_max(f, a, b, tol(nodes[i]));
                Ext { at, val }
            });
            let mn = is_min.then(|| {
                let (at, val) = golden_min(f, a, b, tol(nodes[i]));
                Ext { at, val }
            });
            Some((i, mx, mn))
        })
        .collect();
    let cell_of = |x: f64| nodes.partition_point(|v| *v <= x).clamp(1, cells) - 1;
    for (_, mx, mn) in refined {
        if let Some(e) = mx {
            let c = cell_of(e.at);
            if e.val > hi[c].val {
                hi[c] = e;
            }
        }
        if let Some(e) = mn {
            let c = cell_of(e.at);
            if e.val < lo[c].val {
                lo[c] = e;
            }
        }
    }
    AxisRanges { lo, hi }
}

struct RowHits {
    runs: Vec<(usize, usize)>,
    /// `(x-cell, s, t, residual)`.
    points: Vec<(usize, f64, f64, f64)>,
}

/// Scans the diamond with the given null-grid step.
pub fn find_singular_set(
    data: &InitialData,
    diamond: CharacteristicDiamond,
    grid_step: f64,
) -> Result<SingularSet> {
    find_singular_set_with(data, diamond, &ScanOptions::new(grid_step))
}

pub fn find_singular_set_with(
    data: &InitialData,
    diamond: CharacteristicDiamond,
    opts: &ScanOptions,
) -> Result<SingularSet> {
    data.check(diamond.s1)?;
    data.check(diamond.s2)?;
    if !(opts.grid_step > 0.0) {
        return Err(crate::SheetError::InvalidInput("grid step must be positive".into()));
    }
    let tau = opts.tolerance.unwrap_or(data.tolerances().sing);
    let nodes = linspace_max_step(diamond.s1, diamond.s2, opts.grid_step);
    let a_fn = |x: f64| data.alpha_plus(x);
    let b_fn = |y: f64| data.alpha_minus(y);
    let ar = axis_ranges(&a_fn, &nodes);
    let br = axis_ranges(&b_fn, &nodes);
    let cells = nodes.len() - 1;
    let band = opts.t_max.map(|t| 2.0 * t);
    let two_pi = 2.0 * PI;

    let rows: Vec<RowHits> = (0..cells)
        .into_par_iter()
        .map(|j| {
            let (y0, y1) = (nodes[j], nodes[j + 1]);
            let (blo, bhi) = (br.lo[j], br.hi[j]);
            let b_flat = bhi.val - blo.val <= tau;
            let mut runs: Vec<(usize, usize)> = Vec::new();
            let mut points = Vec::new();
            let mut flat_run: Option<(usize, usize)> = None;
            let flush_flat = |run: Option<(usize, usize)>, points: &mut Vec<(usize, f64, f64, f64)>| {
                if let Some((i0, i1)) = run {
                    // One representative per flat run: the point of least |t|.
                    let (xa, xb) = (nodes[i0], nodes[i1 + 1]);
                    let x = (0.5 * (y0 + y1)).clamp(xa, xb);
                    let y = x.clamp(y0, y1);
                    let t = 0.5 * (x - y);
                    if band.map_or(true, |w| 2.0 * t.abs() <= w) {
                        let r = wrap_angle(a_fn(x) - b_fn(y));
                        points.push((i0, 0.5 * (x + y), t, r));
                    }
                }
            };
            for i in 0..cells {
                let (x0, x1) = (nodes[i], nodes[i + 1]);
                if let Some(w) = band {
                    if (y0 - x1).max(x0 - y1).max(0.0) > w {
                        if flat_run.is_some() {
                            flush_flat(flat_run.take(), &mut points);
                        }
                        continue;
                    }
                }
                let (alo, ahi) = (ar.lo[i], ar.hi[i]);
                let lo = alo.val - bhi.val;
                let hi = ahi.val - blo.val;
                let k = ((lo - tau) / two_pi).ceil();
                let target = two_pi * k;
                let hit = target <= hi + tau;
                if !hit {
                    if flat_run.is_some() {
                        flush_flat(flat_run.take(), &mut points);
                    }
                    continue;
                }
                match runs.last_mut() {
                    Some(r) if r.1 + 1 == i => r.1 = i,
                    _ => runs.push((i, i)),
                }
                let flat = b_flat && ahi.val - alo.val <= tau;
                if flat {
                    flat_run = match flat_run {
                        Some((a, _)) => Some((a, i)),
                        None => Some((i, i)),
                    };
                    continue;
                }
                if flat_run.is_some() {
                    flush_flat(flat_run.take(), &mut points);
                }
                if let Some(p) = refine_cell(&a_fn, &b_fn, (alo, ahi), (blo, bhi), target, tau) {
                    let t = 0.5 * (p.0 - p.1);
                    if band.map_or(true, |w| 2.0 * t.abs() <= w) {
                        points.push((i, 0.5 * (p.0 + p.1), t, p.2));
                    }
                }
            }
            flush_flat(flat_run.take(), &mut points);
            RowHits { runs, points }
        })
        .collect();

    let (components, run_component) = assemble(&rows);
    let mut points = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for &(i, s, t, r) in &row.points {
            let run = row.runs.iter().position(|(a, b)| *a <= i && i <= *b).expect("point inside a run");
            points.push(SingularPoint { s, t, beta_mod_2pi: r, component: run_component[j][run] });
        }
    }
    // Components whose every point fell outside the band carry no points;
    // they are kept, since their cells are still hits.
    Ok(SingularSet { diamond, tolerance: tau, x_nodes: nodes.clone(), y_nodes: nodes, points, components })
}

/// Finds `(x, y)` in a cell with `A(x) − B(y) = target`, bisecting along the
/// segment from the cell's minimizer of `A − B` to its maximizer.
fn refine_cell(
    a: &dyn Fn(f64) -> f64,
    b: &dyn Fn(f64) -> f64,
    (alo, ahi): (Ext, Ext),
    (blo, bhi): (Ext, Ext),
    target: f64,
    tau: f64,
) -> Option<(f64, f64, f64)> {
    let p_min = (alo.at, bhi.at);
    let p_max = (ahi.at, blo.at);
    let f_min = alo.val - bhi.val - target;
    let f_max = ahi.val - blo.val - target;
    if f_max < 0.0 {
        return (f_max >= -tau).then_some((p_max.0, p_max.1, f_max));
    }
    if f_min > 0.0 {
        return (f_min <= tau).then_some((p_min.0, p_min.1, f_min));
    }
    let at = |l: f64| (p_min.0 + l * (p_max.0 - p_min.0), p_min.1 + l * (p_max.1 - p_min.1));
    let f = |l: f64| {
        let (x, y) = at(l);
        a(x) - b(y) - target
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = if -f_min < f_max { (0.0, f_min) } else { (1.0, f_max) };
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        let fm = f(m);
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm.abs() <= 0.01 * tau || m == lo || m == hi {
            break;
        }
        if fm < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let (x, y) = at(best.0);
    (best.1.abs() <= tau).then_some((x, y, best.1))
}

/// Union-find over runs of adjacent rows (8-adjacency). Returns components
/// and, for every row, the component index of each run.
fn assemble(rows: &[RowHits]) -> (Vec<SingularComponent>, Vec<Vec<usize>>) {
    let offsets: Vec<usize> = rows
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.runs.len();
            Some(o)
        })
        .collect();
    let total: usize = rows.iter().map(|r| r.runs.len()).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for j in 1..rows.len() {
        let (prev, cur) = (&rows[j - 1].runs, &rows[j].runs);
        let (mut a, mut b) = (0, 0);
        while a < prev.len() && b < cur.len() {
            let (p0, p1) = prev[a];
            let (c0, c1) = cur[b];
            if p0 <= c1 + 1 && c0 <= p1 + 1 {
                let (ra, rb) = (find(&mut parent, offsets[j - 1] + a), find(&mut parent, offsets[j] + b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
            if p1 < c1 {
                a += 1;
            } else {
                b += 1;
            }
        }
    }
    // Number components by first appearance (deterministic).
    let mut label = vec![usize::MAX; total];
    let mut comps: Vec<SingularComponent> = Vec::new();
    let mut bbox: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut run_component = Vec::with_capacity(rows.len());
    for (j, row) in rows.iter().enumerate() {
        let mut ids = Vec::with_capacity(row.runs.len());
        for (k, &(s, e)) in row.runs.iter().enumerate() {
            let root = find(&mut parent, offsets[j] + k);
            if label[root] == usize::MAX {
                label[root] = comps.len();
                comps.push(SingularComponent { id: comps.len(), class: ComponentClass::Isolated, cells: 0, runs: Vec::new() });
                bbox.push((s, e, j, j));
            }
            let id = label[root];
            let c = &mut comps[id];
            c.cells += e - s + 1;
            c.runs.push(CellRun { row: j, start: s, end: e });
            let bb = &mut bbox[id];
            bb.0 = bb.0.min(s);
            bb.1 = bb.1.max(e);
            bb.3 = j;
            ids.push(id);
        }
        run_component.push(ids);
    }
    for (c, bb) in comps.iter_mut().zip(&bbox) {
        let (w, h) = (bb.1 - bb.0 + 1, bb.3 - bb.2 + 1);
        c.class = if w <= 3 && h <= 3 {
            ComponentClass::Isolated
        } else if c.cells > 3 * (w + h) {
            ComponentClass::Region
        } else {
            ComponentClass::Segment
        };
    }
    (comps, run_component)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::geometry::Vec2;

    #[test]
    fn circle_singular_times() {
        let e = gallery::build("shrinking_circle", &Default::default()).unwrap();
        let set = find_singular_set(&e.data, CharacteristicDiamond::new(-2.0, 2.0).unwrap(), 1e-2).unwrap();
        assert!(!set.is_empty());
        for p in &set.points {
            assert!((p.t.abs() - PI / 2.0).abs() < 1e-9, "t = {}", p.t);
        }
        assert!(set.components.iter().all(|c| c.class == ComponentClass::Segment));
        assert_eq!(set.components.len(), 2);
    }

    #[test]
    fn line_has_no_singularities() {
        let e = gallery::build("plane", &gallery::GalleryParams { speed: Some(0.0), ..Default::default() }).unwrap();
        let set = find_singular_set(&e.data, CharacteristicDiamond::new(-5.0, 5.0).unwrap(), 1e-2).unwrap();
        assert!(set.is_empty());
        assert!(set.components.is_empty());
    }

    #[test]
    fn points_have_vanishing_gs() {
        let e = gallery::build("shrinking_circle", &Default::default()).unwrap();
        let sheet = crate::evolution::evolve(e.data.clone());
        let set = find_singular_set(&e.data, CharacteristicDiamond::new(0.0, 4.0).unwrap(), 5e-2).unwrap();
        for p in &set.points {
            let gs: Vec2 = sheet.ds(p.s, p.t).unwrap();
            assert!(gs.norm() <= 10.0 * set.tolerance);
        }
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("s,t,beta_mod_2pi,component_id,class\n"));
    }

    #[test]
    fn band_restriction() {
        let e = gallery::build("shrinking_circle", &Default::default()).unwrap();
        let d = CharacteristicDiamond::new(-2.0, 2.0).unwrap();
        let opts = ScanOptions { t_max: Some(1.5), ..ScanOptions::new(1e-2) };
        assert!(find_singular_set_with(&e.data, d, &opts).unwrap().is_empty());
    }
}
