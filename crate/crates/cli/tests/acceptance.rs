//! End-to-end acceptance suite. Every criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use maxsheet_core::curvature::{
    blowup_identity_residual, blowup_integral, cross_section_curvature, default_deltas, mixed_norm_table,
    BlowupVerdict, NormVerdict,
};
use maxsheet_core::embedding::{detect_self_intersections, separating_direction, verify_graph_on_diamond, Separation};
use maxsheet_core::gallery::{build, build_all, GalleryEntry, GalleryParams, SingularReference};
use maxsheet_core::gauge_transform::{isothermalize, solve_characteristics, GraphParamSheet};
use maxsheet_core::geometry::linspace;
use maxsheet_core::initial_data::{AngleCurve, FnVelocity};
use maxsheet_core::numerics::sequence::halton_rect;
use maxsheet_core::singularity::{
    beta, classify_tangent_discontinuity, find_singular_set, find_singular_set_with, find_tangent_sign_change_time,
    no_singularity_criterion, semicircle_criterion, short_time_horizon, unit_tangent, CharacteristicDiamond,
    DiscontinuityKind, RegularityVerdict, ScanOptions, SemicircleVerdict, SignChangeOptions,
};
use maxsheet_core::{evolve, normalize_initial_data, Domain, FnSheet, InitialData, Jet1, NormalizeOptions, Sheet, Vec2, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A rectangle of sample points inside an entry's window.
fn sample_box(data: &InitialData) -> ((f64, f64), (f64, f64)) {
    let w = data.window();
    let (s0, s1) = (w.min.max(-6.0), w.max.min(6.0));
    let half = 0.5 * (s1 - s0);
    let mid = 0.5 * (s0 + s1);
    let tmax = (0.45 * half).min(2.0);
    ((mid - 0.5 * half, mid + 0.5 * half), (-tmax, tmax))
}

fn c01_gauge_invariants() -> Outcome {
    let mut worst = 0.0f64;
    let mut total = 0;
    for e in build_all().map_err(|e| e.to_string())? {
        let sheet = evolve(e.data.clone());
        let (sr, tr) = sample_box(&e.data);
        let pts = halton_rect(10_000, sr, tr);
        for &(s, t) in &pts {
            let j = sheet.first(s, t).map_err(|err| format!("{} at ({s},{t}): {err}", e.name))?;
            let dev = j.gs.dot(j.gt).abs().max((j.gs.norm_sq() + j.gt.norm_sq() - 1.0).abs());
            ensure(dev <= 1e-9, || format!("{}: gauge residual {dev:e} at ({s},{t})", e.name))?;
            worst = worst.max(dev);
        }
        total += pts.len();
    }
    Ok(format!("{total} points, max residual {worst:e}"))
}

fn c02_shrinking_circle() -> Outcome {
    let e = build("shrinking_circle", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let sheet = evolve(e.data.clone());
    let mut gamma_dev = 0.0f64;
    let mut kappa_dev = 0.0f64;
    for (s, t) in halton_rect(4000, (-PI, PI), (-1.4, 1.4)) {
        let g = sheet.first(s, t).map_err(|e| e.to_string())?.g;
        gamma_dev = gamma_dev.max(g.distance(Vec2::new(t.cos() * s.cos(), t.cos() * s.sin())));
        let k = cross_section_curvature(&sheet, s, t).map_err(|e| e.to_string())?.kappa_std;
        kappa_dev = kappa_dev.max((k.abs() - 1.0 / t.cos().abs()).abs());
    }
    ensure(gamma_dev <= 1e-10, || format!("gamma deviation {gamma_dev:e}"))?;
    ensure(kappa_dev <= 1e-8, || format!("curvature deviation {kappa_dev:e}"))?;
    // The first singular time, by bisection on |γ_s(0, t)| through zero of sin(β/2).
    let field = beta(e.data.clone());
    let (mut lo, mut hi) = (1.0, 2.0);
    let f_lo = field.sin_half(0.0, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if field.sin_half(0.0, mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_sing = 0.5 * (lo + hi);
    ensure((t_sing - PI / 2.0).abs() <= 1e-9, || format!("singular time {t_sing}"))?;
    let set = find_singular_set(&e.data, CharacteristicDiamond::centered(0.0, 2.0).unwrap(), 1e-2).map_err(|e| e.to_string())?;
    let scan_dev = set.points.iter().map(|p| (p.t.abs() - PI / 2.0).abs()).fold(0.0, f64::max);
    ensure(!set.is_empty() && scan_dev <= 1e-9, || format!("scan time deviation {scan_dev:e}"))?;
    Ok(format!("γ {gamma_dev:.1e}, κ {kappa_dev:.1e}, t_sing dev {:.1e}", (t_sing - PI / 2.0).abs()))
}

fn c03_mixed_norms() -> Outcome {
    let e = build("shrinking_circle", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let sheet = evolve(e.data.clone());
    let ps = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0];
    let qs = [1.0, 1.5, 2.0, 3.0, 6.0];
    let table = mixed_norm_table(&sheet, &ps, &qs, (PI / 2.0 - 0.5, PI / 2.0)).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for row in &table.rows {
        let margin = 1.0 / row.p + 1.0 / row.q - 1.0;
        if margin.abs() < 0.05 {
            continue;
        }
        let want = if margin > 0.0 { NormVerdict::Finite } else { NormVerdict::Divergent };
        ensure(row.verdict == want, || format!("(p,q)=({},{}) gave {:?}, expected {want:?}", row.p, row.q, row.verdict))?;
        checked += 1;
    }
    ensure(checked >= 20, || format!("only {checked} grid points away from the critical line"))?;
    Ok(format!("{checked} (p,q) pairs match"))
}

fn c04_cigar() -> Outcome {
    let mut notes = Vec::new();
    for l in [PI / 4.0, 1.0] {
        let e = build("cigar", &GalleryParams { l: Some(l), ..Default::default() }).map_err(|e| e.to_string())?;
        let step = 1e-3;
        let diamond = CharacteristicDiamond::centered(0.0, 2.5).unwrap();
        let set = find_singular_set(&e.data, diamond, step).map_err(|e| e.to_string())?;
        ensure(!set.is_empty(), || "no singular points".into())?;
        // Region boundary: every null-grid sample agrees with the reference
        // except within one cell of the lines x = ±L, y = ±L.
        let mut mismatches = 0;
        for (x, y) in halton_rect(200_000, (-2.5, 2.5), (-2.5, 2.5)) {
            let (s, t) = (0.5 * (x + y), 0.5 * (x - y));
            let inside = (x >= l && y <= -l) || (x <= -l && y >= l);
            if set.hit_at_null(x, y) != inside {
                let near = [x - l, x + l, y - l, y + l].iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
                ensure(near <= step * (1.0 + 1e-9), || format!("L={l}: mismatch at (s,t)=({s},{t}), {near:e} from boundary"))?;
                mismatches += 1;
            }
        }
        // Σ_sing lies on the null half-lines x² = ±t − L.
        let sheet = evolve(e.data.clone());
        let mut sigma_dev = 0.0f64;
        for p in &set.points {
            let g = sheet.first(p.s, p.t).map_err(|e| e.to_string())?.g;
            let want = Vec2::new(0.0, p.t.abs() - l);
            sigma_dev = sigma_dev.max(g.distance(want));
        }
        ensure(sigma_dev <= 1e-6, || format!("L={l}: image deviation {sigma_dev:e}"))?;
        // The unit tangent tends to (1, 0) on approach to the region.
        let field = beta(e.data.clone());
        let mut tan_dev = 0.0f64;
        // Approach K⁺ = {x ≥ L, y ≤ −L} across both of its null edges.
        let approach = [(l - 1e-7, -l - 0.5), (l - 1e-7, -l - 0.1), (l + 0.1, -l + 1e-7), (l + 0.5, -l + 1e-7)];
        for (x, y) in approach {
            let (s, t) = (0.5 * (x + y), 0.5 * (x - y));
            let u = unit_tangent(&field, s, t).map_err(|e| e.to_string())?.ok_or("undefined tangent")?;
            tan_dev = tan_dev.max(u.distance(Vec2::new(1.0, 0.0)));
        }
        ensure(tan_dev <= 1e-4, || format!("L={l}: tangent limit deviation {tan_dev:e}"))?;
        notes.push(format!("L={l:.4}: {} pts, {mismatches} boundary cells, Σ {sigma_dev:.1e}, U {tan_dev:.1e}", set.points.len()));
    }
    Ok(notes.join("; "))
}

fn c05_periodic_wedge() -> Outcome {
    let e = build("periodic_wedge", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let l = PI;
    let reference = SingularReference::Lattice { l };
    let diamond = e.reference.diamond.ok_or("no reference diamond")?;
    let set = find_singular_set(&e.data, diamond, 1e-2).map_err(|e| e.to_string())?;
    let worst = set.points.iter().map(|p| reference.distance(p.s, p.t)).fold(0.0, f64::max);
    ensure(!set.is_empty(), || "no singular points".into())?;
    ensure(worst <= 1e-6, || format!("max distance to lattice {worst:e}"))?;
    // Every lattice point well inside the diamond is found.
    let h = 0.5 * l;
    let r = diamond.half_width();
    let mut expected = 0;
    for m in (-9..=9).filter(|m: &i32| m % 2 != 0) {
        for n in (-9..=9).filter(|n: &i32| n % 2 != 0) {
            let (s, t) = (m as f64 * h, n as f64 * h);
            if s.abs() + t.abs() < r - 0.05 {
                expected += 1;
                let hit = set.points.iter().any(|p| (p.s - s).hypot(p.t - t) <= 1e-6);
                ensure(hit, || format!("lattice point ({s},{t}) missed"))?;
            }
        }
    }
    Ok(format!("{} points, {expected} lattice sites covered, max distance {worst:.1e}", set.points.len()))
}

/// Smooth random data: a unit-speed curve with a trigonometric angle and a
/// normal velocity of moderate speed.
fn random_data(rng: &mut ChaCha8Rng) -> Arc<InitialData> {
    let amp: Vec<(f64, f64, f64)> =
        (1..=3).map(|k| (rng.gen_range(0.0..1.4) / k as f64, rng.gen_range(0.4..1.6) * k as f64, rng.gen_range(0.0..2.0 * PI))).collect();
    let speed = (rng.gen_range(-0.4..0.4), rng.gen_range(0.0..0.3), rng.gen_range(0.3..2.0));
    let a1 = amp.clone();
    let theta = move |s: f64| a1.iter().map(|(a, w, p)| a * (w * s + p).sin()).sum::<f64>();
    let a2 = amp.clone();
    let theta_dot = move |s: f64| a2.iter().map(|(a, w, p)| a * w * (w * s + p).cos()).sum::<f64>();
    let th = theta.clone();
    let curve = AngleCurve::new(theta, theta_dot, 0.0, Vec2::ZERO, (-4.5, 4.5), Domain::Interval { min: -4.5, max: 4.5 }, Vec::new());
    let mu = move |s: f64| speed.0 + speed.1 * (speed.2 * s).sin();
    let velocity = FnVelocity::new(move |s| Vec2::from_angle(th(s)).perp() * mu(s));
    let opts = NormalizeOptions { window: Some(Window::new(-4.0, 4.0)), ..Default::default() };
    Arc::new(normalize_initial_data(Arc::new(curve), Arc::new(velocity), &opts).expect("random data are admissible"))
}

fn c06_criteria_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut data: Vec<(String, Arc<InitialData>)> =
        build_all().map_err(|e| e.to_string())?.into_iter().map(|e: GalleryEntry| (e.name, e.data)).collect();
    for i in 0..50 {
        data.push((format!("random#{i}"), random_data(&mut rng)));
    }
    let (mut singular, mut regular, mut horizons, mut diamonds) = (0, 0, 0, 0);
    for (name, d) in &data {
        let w = d.window();
        // Keep diamonds off the window edges so rounding cannot push them out.
        let (lo, hi) = (w.min.max(-6.0) + 1e-9, w.max.min(6.0) - 1e-9);
        for _ in 0..4 {
            let r = rng.gen_range(0.2..(0.5 * (hi - lo)).min(2.5));
            let c = rng.gen_range(lo + r..hi - r);
            let dm = CharacteristicDiamond::centered(c, r).unwrap();
            let set = find_singular_set(d, dm, 1e-2).map_err(|e| format!("{name}: {e}"))?;
            let semi = semicircle_criterion(d, dm.s1, dm.s2).map_err(|e| e.to_string())?;
            let reg = no_singularity_criterion(d, dm.s1, dm.s2).map_err(|e| e.to_string())?;
            if semi.verdict == SemicircleVerdict::GuaranteedSingular {
                singular += 1;
                ensure(!set.is_empty(), || format!("{name}: semicircle on [{}, {}] but no singular point", dm.s1, dm.s2))?;
            }
            if reg.verdict == RegularityVerdict::GuaranteedRegular {
                regular += 1;
                ensure(set.is_empty(), || format!("{name}: regular verdict on [{}, {}] but singular points", dm.s1, dm.s2))?;
            }
            diamonds += 1;
        }
        let h = short_time_horizon(d).map_err(|e| e.to_string())?;
        let r = (0.5 * (hi - lo)).min(6.0);
        let dm = CharacteristicDiamond::centered(0.5 * (lo + hi), r).unwrap();
        let t_max = h.t.min(r);
        if t_max > 0.0 {
            let opts = ScanOptions { grid_step: 1e-2, t_max: Some(t_max), tolerance: None };
            let set = find_singular_set_with(d, dm, &opts).map_err(|e| e.to_string())?;
            ensure(set.is_empty(), || format!("{name}: singular point below horizon {}", h.t))?;
            horizons += 1;
        }
    }
    ensure(singular > 0 && regular > 0, || format!("degenerate suite: {singular} singular, {regular} regular verdicts"))?;
    Ok(format!("{} data, {diamonds} diamonds: {singular} singular and {regular} regular verdicts, {horizons} horizons, 0 violations", data.len()))
}

fn c07_tangent_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for e in build_all().map_err(|e| e.to_string())? {
        let sheet = evolve(e.data.clone());
        let field = beta(e.data.clone());
        let (sr, tr) = sample_box(&e.data);
        for (s, t) in halton_rect(2000, sr, tr) {
            let gs = sheet.first(s, t).map_err(|e| e.to_string())?.gs;
            if gs.norm() < 1e-6 {
                continue;
            }
            let u = unit_tangent(&field, s, t).map_err(|e| e.to_string())?.ok_or("tangent undefined at a regular point")?;
            let dev = u.distance(gs / gs.norm());
            ensure(dev <= 1e-9, || format!("{}: deviation {dev:e} at ({s},{t})", e.name))?;
            worst = worst.max(dev);
            count += 1;
        }
    }
    Ok(format!("{count} points, max deviation {worst:e}"))
}

/// Residuals below this are at the rounding level of the centred difference
/// and carry no convergence information.
const RESIDUAL_FLOOR: f64 = 1e-9;

fn c08_blowup_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut min_order = f64::INFINITY;
    let mut total = 0;
    for e in build_all().map_err(|e| e.to_string())? {
        let sheet = evolve(e.data.clone());
        let (sr, tr) = sample_box(&e.data);
        let mut taken = 0;
        for (s, t) in halton_rect(2000, sr, tr) {
            if taken == 100 {
                break;
            }
            let j = sheet.first(s, t).map_err(|e| e.to_string())?;
            if j.gs.norm() < 0.05 || j.gt.norm() > 0.99 {
                continue;
            }
            let r1 = blowup_identity_residual(&sheet, s, t, 1e-4).map_err(|e| e.to_string())?.residual;
            let r2 = blowup_identity_residual(&sheet, s, t, 5e-5).map_err(|e| e.to_string())?.residual;
            ensure(r1 <= 1e-5, || format!("{}: residual {r1:e} at ({s},{t})", e.name))?;
            if r1 > RESIDUAL_FLOOR {
                let order = (r1 / r2).log2();
                ensure(order >= 1.8, || format!("{}: observed order {order:.2} at ({s},{t}), residuals {r1:e}, {r2:e}", e.name))?;
                min_order = min_order.min(order);
            }
            worst = worst.max(r1);
            taken += 1;
        }
        ensure(taken == 100, || format!("{}: only {taken} timelike sample points", e.name))?;
        total += taken;
    }
    Ok(format!("{total} points, max residual {worst:.1e}, min order {min_order:.2}"))
}

fn c09_blowup_integral() -> Outcome {
    let circle = build("shrinking_circle", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let sheet = evolve(circle.data.clone());
    let (t0, eps) = (PI / 2.0, 0.5);
    let b = blowup_integral(&sheet, 0.0, t0, eps, &default_deltas(eps)).map_err(|e| e.to_string())?;
    // ∫ sec = log(sec + tan).
    let anti = |t: f64| (1.0 / t.cos() + t.tan()).ln();
    let mut dev = 0.0f64;
    for &(delta, value) in &b.partials {
        dev = dev.max((value - (anti(t0 - delta) - anti(t0 - eps))).abs());
    }
    ensure(dev <= 1e-6, || format!("partial integrals off by {dev:e}"))?;
    ensure(b.verdict == BlowupVerdict::Divergent, || format!("circle verdict {:?}", b.verdict))?;
    let l = 1.0;
    let cigar = build("cigar", &GalleryParams { l: Some(l), ..Default::default() }).map_err(|e| e.to_string())?;
    let cs = evolve(cigar.data.clone());
    let c = blowup_integral(&cs, 0.0, l, 0.5, &default_deltas(0.5)).map_err(|e| e.to_string())?;
    ensure(c.verdict == BlowupVerdict::Divergent, || format!("cigar verdict {:?}", c.verdict))?;
    Ok(format!("log-secant deviation {dev:.1e}, circle and cigar divergent"))
}

fn c10_classification() -> Outcome {
    let cusp = build("cusp_reversal", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let reference = cusp.reference.classification.ok_or("no reference")?;
    let c = classify_tangent_discontinuity(&beta(cusp.data.clone()), PI / 2.0, reference.interval).map_err(|e| e.to_string())?;
    ensure(c.kind == DiscontinuityKind::C1CurveWithTangentExtension && c.m % 2 != 0, || format!("cusp_reversal: {:?} m={}", c.kind, c.m))?;
    let sheeting = build("sheeting", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let reference = sheeting.reference.classification.ok_or("no reference")?;
    let d = classify_tangent_discontinuity(&beta(sheeting.data.clone()), 1.5 * PI, reference.interval).map_err(|e| e.to_string())?;
    ensure(d.kind == DiscontinuityKind::DegenerateNoExtension, || format!("sheeting: {:?}", d.kind))?;
    let eight = build("figure_eight", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let w = eight.data.window();
    let hits = detect_self_intersections(eight.data.curve().as_ref(), (w.min, w.max));
    let (r1, r2) = *hits.first().ok_or("figure_eight: no self-intersection")?;
    let arc = semicircle_criterion(&eight.data, r1, r2).map_err(|e| e.to_string())?.oscillation;
    ensure(arc > PI, || format!("figure_eight: tangent arc {arc} on [{r1}, {r2}]"))?;
    let field = beta(eight.data.clone());
    let horizon = 0.5 * (r2 - r1);
    let sc = find_tangent_sign_change_time(&field, (0.0, horizon), (r1, r2), &SignChangeOptions::default()).map_err(|e| e.to_string())?;
    ensure(sc.t_star > 0.0 && sc.t_star <= horizon, || format!("figure_eight: t* = {}", sc.t_star))?;
    Ok(format!("cusp m={}, sheeting degenerate, figure_eight arc {arc:.4} with t* = {:.6}", c.m, sc.t_star))
}

fn c11_embedding_chain() -> Outcome {
    let diamond = CharacteristicDiamond::centered(0.0, 5.0).unwrap();
    let mut notes = Vec::new();
    for name in ["plane", "graph_sine"] {
        let e = build(name, &GalleryParams::default()).map_err(|e| e.to_string())?;
        let sep = separating_direction(&e.data, diamond.s1, diamond.s2).map_err(|e| e.to_string())?;
        ensure(sep.verdict == Separation::Separated, || format!("{name}: {:?}", sep.verdict))?;
        let g = verify_graph_on_diamond(&evolve(e.data.clone()), &diamond, sep.omega.unwrap(), 0.05).map_err(|e| e.to_string())?;
        ensure(g.margin > 0.0, || format!("{name}: graph margin {}", g.margin))?;
        notes.push(format!("{name} margin {:.3}", g.margin));
    }
    let grim = build("grim_reaper", &GalleryParams::default()).map_err(|e| e.to_string())?;
    let set = find_singular_set(&grim.data, diamond, 1e-2).map_err(|e| e.to_string())?;
    ensure(set.is_empty(), || format!("grim_reaper: {} singular points", set.points.len()))?;
    let sep = separating_direction(&grim.data, diamond.s1, diamond.s2).map_err(|e| e.to_string())?;
    let gap = PI - sep.arc_width();
    ensure((0.0..=1e-3).contains(&gap), || format!("grim_reaper: arc short of π by {gap:e}"))?;
    notes.push(format!("grim_reaper empty, arc gap {gap:.1e}"));
    Ok(notes.join(", "))
}

fn c12_isothermalization() -> Outcome {
    let (k, w) = (0.45, 0.6);
    let sheet = FnSheet::new(move |s, t| Jet1 { g: Vec2::new(s + k * t, w * t), gs: Vec2::new(1.0, 0.0), gt: Vec2::new(k, w) });
    let g = GraphParamSheet::new(Arc::new(sheet), (-6.0, 6.0), (-1.0, 1.0)).map_err(|e| e.to_string())?;
    let seeds = linspace(-4.0, 4.0, 33);
    let chars = solve_characteristics(&g, &seeds, (-1.0, 1.0)).map_err(|e| e.to_string())?;
    let speed = chars.iter().map(|c| c.max_speed).fold(0.0, f64::max);
    ensure(speed < 1.0, || format!("characteristic speed {speed}"))?;
    let iso = isothermalize(&g).map_err(|e| e.to_string())?;
    let (orth, norm) = iso.gauge_residual(&linspace(-3.0, 3.0, 25), &linspace(-0.9, 0.9, 13)).map_err(|e| e.to_string())?;
    ensure(orth <= 1e-6 && norm <= 1e-6, || format!("gauge residuals {orth:e}, {norm:e}"))?;
    Ok(format!("max |ds/dt| {speed}, residuals {orth:.1e} / {norm:.1e}"))
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_maxsheet"))
        .args(args)
        .current_dir(dir)
        .env("MAXSHEET_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("`{}` exited with {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c13_determinism() -> Outcome {
    let commands: [&[&str]; 8] = [
        &["evolve", "--gallery", "graph_sine", "--t", "0..1", "--step", "0.02", "--csv", "grid.csv"],
        &["singular", "--gallery", "cigar", "--L", "0.785398", "--diamond", "-3", "3"],
        &["curvature", "--gallery", "shrinking_circle", "--p", "2,4", "--q", "1,3", "--anchor", "0", "1.5707963267948966"],
        &["embed", "--gallery", "graph_sine"],
        &["classify", "--gallery", "cusp_reversal"],
        &["gallery", "all", "--check"],
        &["horizon", "--gallery", "graph_sine"],
        &["singular", "--gallery", "periodic_wedge"],
    ];
    let mut runs = Vec::new();
    for threads in ["1", "8", "1", "8"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut stdout = Vec::new();
        for args in commands {
            stdout.push(run_cli(dir.path(), threads, args)?);
        }
        runs.push((threads, stdout, snapshot(dir.path())));
    }
    let (_, out0, files0) = &runs[0];
    for (threads, out, files) in &runs[1..] {
        for (i, (a, b)) in out0.iter().zip(out).enumerate() {
            ensure(a == b, || format!("stdout of `{}` differs with {threads} threads", commands[i].join(" ")))?;
        }
        ensure(files0 == files, || format!("output files differ with {threads} threads"))?;
    }
    let bytes: usize = files0.iter().map(|f| f.1.len()).sum();
    Ok(format!("{} commands x 4 runs, {} files ({bytes} bytes) identical", commands.len(), files0.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("gauge invariants", c01_gauge_invariants),
        ("shrinking circle closed forms", c02_shrinking_circle),
        ("mixed-norm classification", c03_mixed_norms),
        ("cigar singular region", c04_cigar),
        ("periodic wedge lattice", c05_periodic_wedge),
        ("criteria soundness", c06_criteria_soundness),
        ("tangent identity", c07_tangent_identity),
        ("blow-up identity", c08_blowup_identity),
        ("blow-up integral", c09_blowup_integral),
        ("classification regression", c10_classification),
        ("embedding chain", c11_embedding_chain),
        ("isothermalization round trip", c12_isothermalization),
        ("CLI determinism", c13_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{:02}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| *x == id || name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} {name}: PASS ({detail}) [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL ({why}) [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
