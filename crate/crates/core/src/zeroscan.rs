//! Zeros of the characteristic function `G` by argument-principle subdivision.
//!
//! `G` is even with real Taylor coefficients, so its zero set is invariant
//! under `w -> -w` and `w -> conj w`. The scan covers the first quadrant
//! `[0, L] x [0, H]` (slightly extended across the axes), stores one
//! representative per symmetry orbit in the closed upper-left quarter-plane,
//! and handles the zero of order `2(m-s)` at the origin through its own
//! isolating square.

use crate::chareq::{CharacteristicFn, EquationParams};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x0 < x1 && y0 < y1, "degenerate rectangle");
        Self { x0, x1, y0, y1 }
    }

    pub fn square(center: Complex64, half: f64) -> Self {
        Self::new(center.re - half, center.re + half, center.im - half, center.im + half)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, w: Complex64, slack: f64) -> bool {
        w.re >= self.x0 - slack && w.re <= self.x1 + slack && w.im >= self.y0 - slack && w.im <= self.y1 + slack
    }

    /// Point reflection through the origin.
    pub fn negated(&self) -> Self {
        Self::new(-self.x1, -self.x0, -self.y1, -self.y0)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingConfig {
    /// Minimum admissible `|G|` on the sampled boundary.
    pub clearance: f64,
    /// Consecutive refinements must agree to this many windings.
    pub stabilize: f64,
    /// Maximum distance of the converged value from an integer.
    pub integer_gap: f64,
    /// Initial panels per unit boundary length.
    pub panels_per_unit: f64,
    pub min_panels_per_edge: usize,
    pub max_panels_per_edge: usize,
}

impl Default for WindingConfig {
    fn default() -> Self {
        Self {
            clearance: 1e-8,
            stabilize: 0.02,
            integer_gap: 0.1,
            panels_per_unit: 4.0,
            min_panels_per_edge: 8,
            max_panels_per_edge: 1 << 15,
        }
    }
}

impl WindingConfig {
    /// Same checks, every edge starting from `factor` times as many panels.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            panels_per_unit: self.panels_per_unit * factor,
            min_panels_per_edge: ((self.min_panels_per_edge as f64) * factor).ceil() as usize,
            max_panels_per_edge: ((self.max_panels_per_edge as f64) * factor).ceil() as usize,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub count: i32,
    /// Trapezoid value of `(1/2 pi i) \oint G'/G` before rounding.
    pub raw: f64,
    pub min_abs: f64,
    pub panels_per_edge: [usize; 4],
}

#[derive(Clone, Copy)]
struct Sample {
    w: Complex64,
    g: Complex64,
    dg: Complex64,
}

fn sample(g: &CharacteristicFn, w: Complex64) -> Result<Sample> {
    let e = g.eval_full(w)?;
    Ok(Sample { w, g: e.value, dg: e.deriv })
}

/// Samples of one edge, both endpoints included.
fn edge_samples(g: &CharacteristicFn, a: Complex64, b: Complex64, n: usize) -> Result<Vec<Sample>> {
    (0..=n).map(|i| sample(g, a + (b - a) * (i as f64 / n as f64))).collect()
}

/// Inserts midpoints, doubling the panel count.
fn refine_edge(g: &CharacteristicFn, old: &[Sample]) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(2 * old.len() - 1);
    for pair in old.windows(2) {
        out.push(pair[0]);
        out.push(sample(g, (pair[0].w + pair[1].w) * 0.5)?);
    }
    out.push(*old.last().expect("edge has samples"));
    Ok(out)
}

struct EdgeSums {
    trapezoid: Complex64,
    arg_total: f64,
    max_step: f64,
    min_abs: f64,
}

fn edge_sums(s: &[Sample]) -> EdgeSums {
    let mut trapezoid = Complex64::new(0.0, 0.0);
    let mut arg_total = 0.0;
    let mut max_step: f64 = 0.0;
    let mut min_abs = f64::INFINITY;
    for pair in s.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        trapezoid += (a.dg / a.g + b.dg / b.g) * (b.w - a.w) * 0.5;
        let step = (b.g / a.g).arg();
        arg_total += step;
        max_step = max_step.max(step.abs());
    }
    for v in s {
        min_abs = min_abs.min(v.g.norm());
    }
    EdgeSums { trapezoid, arg_total, max_step, min_abs }
}

/// `(1/2 pi i) \oint_{\partial rect} G'(w)/G(w) dw`, rounded to an integer.
pub fn winding_number(g: &CharacteristicFn, rect: &Rect) -> Result<i32> {
    Ok(winding_number_with(g, rect, &WindingConfig::default())?.count)
}

/// Adaptive trapezoid on each edge; panel counts double until the value has
/// stabilized, sits near an integer, and agrees with the accumulated change of
/// `arg G` over the same samples (whose steps must stay below `pi/2`).
pub fn winding_number_with(g: &CharacteristicFn, rect: &Rect, cfg: &WindingConfig) -> Result<Winding> {
    let c = rect.corners();
    let mut edges = Vec::with_capacity(4);
    for i in 0..4 {
        let (a, b) = (c[i], c[(i + 1) % 4]);
        let n = ((b - a).norm() * cfg.panels_per_unit).ceil() as usize;
        let n = n.max(cfg.min_panels_per_edge);
        edges.push(edge_samples(g, a, b, n)?);
    }
    let mut previous: Option<f64> = None;
    loop {
        let sums: Vec<EdgeSums> = edges.iter().map(|e| edge_sums(e)).collect();
        let min_abs = sums.iter().map(|s| s.min_abs).fold(f64::INFINITY, f64::min);
        if min_abs < cfg.clearance || !min_abs.is_finite() {
            return Err(Error::BoundaryTooClose { min_abs, clearance: cfg.clearance });
        }
        let total: Complex64 = sums.iter().map(|s| s.trapezoid).sum();
        let raw = (total / Complex64::new(0.0, 2.0 * PI)).re;
        let arg_winding = sums.iter().map(|s| s.arg_total).sum::<f64>() / (2.0 * PI);
        let max_step = sums.iter().map(|s| s.max_step).fold(0.0, f64::max);
        let rounded = raw.round();
        let panels = [edges[0].len() - 1, edges[1].len() - 1, edges[2].len() - 1, edges[3].len() - 1];
        let stable = previous.is_some_and(|p| (p - raw).abs() < cfg.stabilize);
        if stable
            && (raw - rounded).abs() < cfg.integer_gap
            && max_step < PI / 2.0
            && (arg_winding - rounded).abs() < 1e-6
        {
            return Ok(Winding { count: rounded as i32, raw, min_abs, panels_per_edge: panels });
        }
        if panels.iter().any(|&n| 2 * n > cfg.max_panels_per_edge) {
            return Err(Error::NonIntegerWinding(raw));
        }
        previous = Some(raw);
        for e in edges.iter_mut() {
            *e = refine_edge(g, e)?;
        }
    }
}

/// Fractions of the side at which a cell may be split, tried in order.
const SPLIT_FRACTIONS: [f64; 6] = [0.5, 0.5137, 0.4771, 0.5419, 0.4583, 0.5623];
/// Offsets applied to the outer rectangle when its boundary runs too close to a zero.
const OUTER_JITTER: [f64; 6] = [0.0, 0.00731, -0.00458, 0.00913, -0.00297, 0.00619];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lambda_max: f64,
    /// Strip height; `None` picks it from the asymptotic zero location.
    pub strip_height: Option<f64>,
    pub min_cell_diameter: f64,
    pub newton_max_iter: usize,
    pub dedup_tol: f64,
    pub winding: WindingConfig,
}

impl ScanConfig {
    pub fn new(lambda_max: f64) -> Self {
        Self {
            lambda_max,
            strip_height: None,
            min_cell_diameter: 0.05,
            newton_max_iter: 50,
            dedup_tol: 1e-8,
            winding: WindingConfig::default(),
        }
    }
}

/// Height of the search strip: at least `3 ln(1+L) + 2`, and high enough to
/// contain the zeros near `|w| = L`, where `|Im w|` grows like
/// `(2m - s - 1/2) ln|w|` (balance of the Bessel term against the leading
/// polynomial term).
pub fn default_strip_height(g: &CharacteristicFn, lambda_max: f64) -> f64 {
    let l = (1.0 + lambda_max).ln();
    let base = 3.0 * l + 2.0;
    let d = g.m() - g.s();
    let lead = g.series_coefficient(d - 1).abs();
    let slope = 2.0 * g.m() as f64 - g.s() as f64 - 0.5;
    let asymptotic = slope * l + (2.0 * (2.0 * PI).sqrt() * lead).ln() + 3.0;
    base.max(asymptotic)
}

/// Certificate attached to every catalog zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Winding of `G` around the isolating square; equals the multiplicity.
    pub winding: i32,
    pub abs_g: f64,
    pub abs_gprime: f64,
    /// Half-width of the isolating square centered at the zero.
    pub isolation_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub lambda: Complex64,
    pub multiplicity: u32,
    pub certificate: Certificate,
}

impl Zero {
    /// Distinct points of the orbit `{w, -w, conj w, -conj w}`.
    pub fn orbit(&self) -> Vec<Complex64> {
        orbit(self.lambda)
    }
}

fn orbit(w: Complex64) -> Vec<Complex64> {
    let mut pts = vec![w, -w];
    if w.im != 0.0 && w.re != 0.0 {
        pts.push(w.conj());
        pts.push(-w.conj());
    }
    pts
}

/// Certified zeros of `G` for one `(m, s)`, radius-1 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCatalog {
    pub m: u32,
    pub s: u32,
    /// Real half-width of the scanned rectangle (after any jitter).
    pub lambda_max: f64,
    /// Imaginary half-height of the scanned rectangle.
    pub strip_height: f64,
    pub origin_multiplicity: u32,
    pub origin_isolation_radius: f64,
    /// Winding of `G` around `[-L, L] x [-H, H]`.
    pub outer_winding: i32,
    /// One representative per symmetry orbit, `Re <= 0 <= Im`, sorted by modulus.
    pub zeros: Vec<Zero>,
}

impl ZeroCatalog {
    pub fn characteristic(&self) -> CharacteristicFn {
        CharacteristicFn::new(self.m, self.s).expect("catalog parameters are valid")
    }

    pub fn outer_rect(&self) -> Rect {
        Rect::new(-self.lambda_max, self.lambda_max, -self.strip_height, self.strip_height)
    }

    /// Zeros implied by symmetry, counted with multiplicity, origin included.
    pub fn total_multiplicity(&self) -> u32 {
        self.origin_multiplicity + self.zeros.iter().map(|z| z.multiplicity * z.orbit().len() as u32).sum::<u32>()
    }

    /// Every zero in the scanned rectangle (all symmetry images, origin excluded).
    pub fn all_zeros(&self) -> Vec<(Complex64, u32)> {
        self.zeros.iter().flat_map(|z| z.orbit().into_iter().map(move |w| (w, z.multiplicity))).collect()
    }
}

enum CellOutcome {
    Empty,
    Found(Complex64, u32),
    Split(Vec<(Rect, i32)>),
}

fn newton(g: &CharacteristicFn, start: Complex64, mult: u32, max_iter: usize) -> Option<Complex64> {
    let mut w = start;
    let mut converged = false;
    for _ in 0..max_iter {
        let e = g.eval_full(w).ok()?;
        if e.value == Complex64::new(0.0, 0.0) {
            return Some(w);
        }
        if e.deriv == Complex64::new(0.0, 0.0) {
            return None;
        }
        let step = e.value / e.deriv * mult as f64;
        w -= step;
        if !w.re.is_finite() || !w.im.is_finite() {
            return None;
        }
        if converged {
            return Some(w);
        }
        if step.norm() <= 1e-14 * w.norm().max(1.0) {
            // one polishing step after the step size has collapsed
            converged = true;
        }
    }
    converged.then_some(w)
}

fn split_cell(g: &CharacteristicFn, cell: &Rect, parent: i32, cfg: &WindingConfig) -> Result<Vec<(Rect, i32)>> {
    let mut last_err = None;
    for (i, &fx) in SPLIT_FRACTIONS.iter().enumerate() {
        let fy = SPLIT_FRACTIONS[(i * 2) % SPLIT_FRACTIONS.len()];
        let xm = cell.x0 + fx * cell.width();
        let ym = cell.y0 + fy * cell.height();
        let kids = [
            Rect::new(cell.x0, xm, cell.y0, ym),
            Rect::new(xm, cell.x1, cell.y0, ym),
            Rect::new(cell.x0, xm, ym, cell.y1),
            Rect::new(xm, cell.x1, ym, cell.y1),
        ];
        let mut out = Vec::with_capacity(4);
        let mut ok = true;
        for k in kids {
            match winding_number_with(g, &k, cfg) {
                Ok(wn) => out.push((k, wn.count)),
                Err(e @ (Error::BoundaryTooClose { .. } | Error::NonIntegerWinding(_))) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            let sum: i32 = out.iter().map(|(_, n)| n).sum();
            if sum == parent && out.iter().all(|(_, n)| *n >= 0) {
                return Ok(out);
            }
            last_err = Some(Error::Certification(format!(
                "children of cell {cell:?} wind {sum} times, parent {parent}"
            )));
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Certification(format!("could not split cell {cell:?}"))))
}

fn process_cell(g: &CharacteristicFn, cell: &Rect, wind: i32, cfg: &ScanConfig) -> Result<CellOutcome> {
    if wind == 0 {
        return Ok(CellOutcome::Empty);
    }
    let small = cell.diameter() < cfg.min_cell_diameter;
    if wind == 1 || small {
        let mult = wind as u32;
        if let Some(w) = newton(g, cell.center(), mult, cfg.newton_max_iter) {
            if cell.contains(w, 1e-9 * w.norm().max(1.0)) {
                return Ok(CellOutcome::Found(w, mult));
            }
        }
        if small {
            return Err(Error::Certification(format!(
                "cell {cell:?} of diameter {:.3e} winds {wind} times but Newton did not converge inside it",
                cell.diameter()
            )));
        }
    }
    Ok(CellOutcome::Split(split_cell(g, cell, wind, &cfg.winding)?))
}

/// Quadtree over the listed root cells; returns refined zeros with multiplicities.
fn subdivide(g: &CharacteristicFn, roots: Vec<(Rect, i32)>, cfg: &ScanConfig, exec: Exec) -> Result<Vec<(Complex64, u32)>> {
    let mut found = Vec::new();
    let mut level = roots;
    while !level.is_empty() {
        let outcomes = par::try_map_collect(exec, &level, |(cell, wind)| process_cell(g, cell, *wind, cfg))?;
        let mut next = Vec::new();
        for o in outcomes {
            match o {
                CellOutcome::Empty => {}
                CellOutcome::Found(w, m) => found.push((w, m)),
                CellOutcome::Split(kids) => next.extend(kids.into_iter().filter(|(_, n)| *n != 0)),
            }
        }
        level = next;
    }
    Ok(found)
}

fn upper_left(w: Complex64) -> Complex64 {
    Complex64::new(if w.re == 0.0 { 0.0 } else { -w.re }, w.im)
}

fn snap_axes(w: Complex64) -> Complex64 {
    let tol = 1e-10 * w.norm().max(1.0);
    Complex64::new(if w.re.abs() < tol { 0.0 } else { w.re }, if w.im.abs() < tol { 0.0 } else { w.im })
}

fn dedup(mut zs: Vec<(Complex64, u32)>, tol: f64) -> Vec<(Complex64, u32)> {
    zs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut out: Vec<(Complex64, u32)> = Vec::with_capacity(zs.len());
    for (w, m) in zs {
        if let Some(prev) = out.iter_mut().find(|(p, _)| (*p - w).norm() < tol) {
            prev.1 += m;
        } else {
            out.push((w, m));
        }
    }
    out
}

fn sort_by_modulus(zs: &mut [Zero]) {
    zs.sort_by(|a, b| {
        a.lambda
            .norm()
            .total_cmp(&b.lambda.norm())
            .then(a.lambda.arg().total_cmp(&b.lambda.arg()))
    });
}

fn winding_with_jitter(g: &CharacteristicFn, make: impl Fn(f64) -> Rect, cfg: &WindingConfig) -> Result<(Rect, Winding)> {
    let mut last = None;
    for &j in OUTER_JITTER.iter() {
        let rect = make(j);
        match winding_number_with(g, &rect, cfg) {
            Ok(w) => return Ok((rect, w)),
            Err(e @ (Error::BoundaryTooClose { .. } | Error::NonIntegerWinding(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Verifies the zero at the origin; returns the half-width of its isolating square.
fn origin_isolation(g: &CharacteristicFn, cfg: &WindingConfig) -> Result<f64> {
    let expected = g.origin_multiplicity() as i32;
    let mut half = 0.5;
    for _ in 0..6 {
        if let Ok(w) = winding_number_with(g, &Rect::square(Complex64::new(0.0, 0.0), half), cfg) {
            if w.count == expected {
                return Ok(half);
            }
        }
        half *= 0.5;
    }
    Err(Error::Certification(format!("no isolating square found around the origin (expected winding {expected})")))
}

/// Half-width of an isolating square for `w`: well inside the distance to any
/// other zero in the full symmetric set (origin included).
fn isolation_radius(w: Complex64, others: &[Complex64]) -> f64 {
    let nearest = others
        .iter()
        .filter(|o| (**o - w).norm() > 1e-12)
        .map(|o| (*o - w).norm())
        .fold(w.norm(), f64::min);
    (0.4 * nearest).min(0.5)
}

pub fn find_zeros(g: &CharacteristicFn, lambda_max: f64) -> Result<ZeroCatalog> {
    find_zeros_with(g, &ScanConfig::new(lambda_max), Exec::default())
}

pub fn find_zeros_with(g: &CharacteristicFn, cfg: &ScanConfig, exec: Exec) -> Result<ZeroCatalog> {
    if !(cfg.lambda_max >= 5.0) {
        return Err(Error::Precondition(format!("lambda_max must be at least 5, got {}", cfg.lambda_max)));
    }
    let wcfg = &cfg.winding;
    let origin_mult = g.origin_multiplicity();
    let origin_half = origin_isolation(g, wcfg)?;
    let delta = origin_half;
    let height0 = cfg.strip_height.unwrap_or_else(|| default_strip_height(g, cfg.lambda_max));

    // Full symmetric rectangle; its jitter fixes L and H for everything below.
    let (outer, outer_w) = winding_with_jitter(
        g,
        |j| Rect::new(-(cfg.lambda_max + j), cfg.lambda_max + j, -(height0 + j), height0 + j),
        wcfg,
    )?;
    let (lmax, height) = (outer.x1, outer.y1);

    // Quadrant region minus the origin square, as two rectangles.
    let right = Rect::new(delta, lmax, -delta, height);
    let top = Rect::new(-delta, delta, delta, height);
    let mut roots = Vec::new();
    for r in [right, top] {
        let w = winding_number_with(g, &r, wcfg)?;
        roots.push((r, w.count));
    }
    let raw = subdivide(g, roots.clone(), cfg, exec)?;
    let raw = dedup(raw.into_iter().map(|(w, m)| (snap_axes(w), m)).collect(), cfg.dedup_tol);

    let region_total: i32 = roots.iter().map(|(_, n)| n).sum();
    let found_total: i32 = raw.iter().map(|(_, m)| *m as i32).sum();
    if region_total != found_total {
        return Err(Error::Certification(format!(
            "quadrant region winds {region_total} times but {found_total} zeros were refined"
        )));
    }

    // Representatives: the closed first quadrant. Points just below the real axis
    // or left of the imaginary axis must be images of representatives.
    let reps: Vec<(Complex64, u32)> = raw.iter().copied().filter(|(w, _)| w.re >= 0.0 && w.im >= 0.0).collect();
    for (w, _) in raw.iter().filter(|(w, _)| w.re < 0.0 || w.im < 0.0) {
        let canon = Complex64::new(w.re.abs(), w.im.abs());
        if !reps.iter().any(|(r, _)| (*r - canon).norm() < 1e-7 * canon.norm().max(1.0)) {
            return Err(Error::Certification(format!("zero {w} has no first-quadrant image")));
        }
    }

    let reps: Vec<(Complex64, u32)> = reps.into_iter().map(|(w, m)| (upper_left(w), m)).collect();
    let mut everything: Vec<Complex64> = reps.iter().flat_map(|(w, _)| orbit(*w)).collect();
    everything.push(Complex64::new(0.0, 0.0));
    let certified: Vec<Zero> = par::try_map_collect(exec, &reps, |&(w, mult)| {
        let half = isolation_radius(w, &everything);
        let wn = winding_number_with(g, &Rect::square(w, half), wcfg)?;
        if wn.count != mult as i32 {
            return Err(Error::Certification(format!(
                "zero {w}: isolating winding {} differs from multiplicity {mult}",
                wn.count
            )));
        }
        let e = g.eval_full(w)?;
        Ok(Zero {
            lambda: w,
            multiplicity: mult,
            certificate: Certificate {
                winding: wn.count,
                abs_g: e.value.norm(),
                abs_gprime: e.deriv.norm(),
                isolation_radius: half,
            },
        })
    })?;
    let mut zeros = certified;
    sort_by_modulus(&mut zeros);

    let catalog = ZeroCatalog {
        m: g.m(),
        s: g.s(),
        lambda_max: lmax,
        strip_height: height,
        origin_multiplicity: origin_mult,
        origin_isolation_radius: origin_half,
        outer_winding: outer_w.count,
        zeros,
    };
    if catalog.total_multiplicity() as i32 != catalog.outer_winding {
        return Err(Error::Certification(format!(
            "outer winding {} but certified multiplicity totals {}",
            catalog.outer_winding,
            catalog.total_multiplicity()
        )));
    }
    Ok(catalog)
}

/// `Z_r`: zeros of `g_r` in the open left half-plane or on the negative
/// imaginary axis, as `w / r` for the catalog's orbits.
pub fn select_zr(catalog: &ZeroCatalog, r: f64) -> Vec<Zero> {
    let mut out: Vec<Zero> = catalog
        .zeros
        .iter()
        .flat_map(|z| {
            z.orbit().into_iter().filter(|w| w.re < 0.0 || (w.re == 0.0 && w.im < 0.0)).map(move |w| Zero {
                lambda: w / r,
                ..*z
            })
        })
        .collect();
    sort_by_modulus(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub r: f64,
    /// Smallest `c1` with `|Im l| <= c1 ln(1 + |l|)` for every zero with `|l| > 4/r`.
    pub c1: f64,
    pub zeros_in_fit: usize,
    /// Zeros with `|l|` above this (radius-r scale) must be simple.
    pub simple_threshold: f64,
    pub all_large_simple: bool,
    pub non_simple: Vec<Complex64>,
    /// `min |l| |g_r'(l)|` over zeros above the threshold.
    pub c2: f64,
}

pub fn lemma1_check(catalog: &ZeroCatalog, r: f64, simple_threshold: f64) -> Result<Lemma1Report> {
    if catalog.zeros.is_empty() {
        return Err(Error::Precondition("catalog has no zeros".into()));
    }
    let params = EquationParams::new(catalog.m, catalog.s, r)?;
    let g = params.characteristic();
    let mut c1: f64 = 0.0;
    let mut fit = 0;
    let mut c2 = f64::INFINITY;
    let mut non_simple = Vec::new();
    for z in &catalog.zeros {
        let lam = z.lambda / r;
        let a = lam.norm();
        if a > 4.0 / r {
            c1 = c1.max(lam.im.abs() / (1.0 + a).ln());
            fit += 1;
        }
        if a > simple_threshold {
            if z.multiplicity != 1 {
                non_simple.push(lam);
            }
            let gp = g.eval_deriv(z.lambda)?.norm() * r;
            c2 = c2.min(a * gp);
        }
    }
    Ok(Lemma1Report {
        r,
        c1,
        zeros_in_fit: fit,
        simple_threshold,
        all_large_simple: non_simple.is_empty(),
        non_simple,
        c2,
    })
}
