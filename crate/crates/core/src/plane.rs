//! Complex-plane numerics shared by every other module: windows, compact
//! unions of disks, polynomials, sampled functions, seminorms, contour
//! quadrature and zero localization.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Shorthand constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaneError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("declared singularity {at} lies in K")]
    SingularityInK { at: C64 },
    #[error("function vanishes in K near {at}")]
    ZeroInK { at: C64 },
    #[error("contour passes through (or too near) a zero: residual {residual:.3e}")]
    ContourThroughZero { residual: f64 },
    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last})")]
    NoConvergence { iterations: usize, last: C64 },
}

/// Axis-aligned rectangle in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl TryFrom<[f64; 4]> for Window {
    type Error = PlaneError;
    fn try_from(a: [f64; 4]) -> Result<Self, PlaneError> {
        Window::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Window> for [f64; 4] {
    fn from(w: Window) -> Self {
        [w.xmin, w.xmax, w.ymin, w.ymax]
    }
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, PlaneError> {
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin >= xmax || ymin >= ymax {
            return Err(PlaneError::InvalidWindow(format!(
                "[{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Window { xmin, xmax, ymin, ymax })
    }

    /// Square window `[-h, h]^2`.
    pub fn square(h: f64) -> Self {
        Window { xmin: -h, xmax: h, ymin: -h, ymax: h }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> C64 {
        c64(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.xmin && z.re <= self.xmax && z.im >= self.ymin && z.im <= self.ymax
    }

    /// Window shrunk by `frac` of its width/height on every side.
    pub fn inner(&self, frac: f64) -> Window {
        let dx = frac * self.width();
        let dy = frac * self.height();
        Window {
            xmin: self.xmin + dx,
            xmax: self.xmax - dx,
            ymin: self.ymin + dy,
            ymax: self.ymax - dy,
        }
    }

    pub fn translate(&self, w: C64) -> Window {
        Window {
            xmin: self.xmin + w.re,
            xmax: self.xmax + w.re,
            ymin: self.ymin + w.im,
            ymax: self.ymax + w.im,
        }
    }

    pub fn expand(&self, d: f64) -> Window {
        Window {
            xmin: self.xmin - d,
            xmax: self.xmax + d,
            ymin: self.ymin - d,
            ymax: self.ymax + d,
        }
    }

    pub fn corners(&self) -> [C64; 4] {
        [
            c64(self.xmin, self.ymin),
            c64(self.xmax, self.ymin),
            c64(self.xmax, self.ymax),
            c64(self.xmin, self.ymax),
        ]
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        Window::new(
            self.xmin.max(other.xmin),
            self.xmax.min(other.xmax),
            self.ymin.max(other.ymin),
            self.ymax.min(other.ymax),
        )
        .ok()
    }

    /// Regular `nx` by `ny` grid of points covering the window, row-major.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<C64> {
        let nx = nx.max(2);
        let ny = ny.max(2);
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = self.ymin + self.height() * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = self.xmin + self.width() * i as f64 / (nx - 1) as f64;
                out.push(c64(x, y));
            }
        }
        out
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.xmin, self.xmax, self.ymin, self.ymax)
    }
}

/// Closed disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C64, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm_sqr() <= self.radius * self.radius
    }

    /// Closed disks share at least one point.
    pub fn meets(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() <= self.radius + other.radius
    }

    pub fn contains_disk(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }

    pub fn translate(&self, w: C64) -> Disk {
        Disk { center: self.center + w, radius: self.radius }
    }

    pub fn bbox(&self) -> Window {
        Window {
            xmin: self.center.re - self.radius,
            xmax: self.center.re + self.radius,
            ymin: self.center.im - self.radius,
            ymax: self.center.im + self.radius,
        }
    }
}

/// A compact set given as a finite union of closed disks, required to be
/// connected with connected complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactRegion {
    disks: Vec<Disk>,
    bbox: Window,
}

fn bbox_of(disks: &[Disk]) -> Window {
    let mut b = disks[0].bbox();
    for d in &disks[1..] {
        let e = d.bbox();
        b.xmin = b.xmin.min(e.xmin);
        b.xmax = b.xmax.max(e.xmax);
        b.ymin = b.ymin.min(e.ymin);
        b.ymax = b.ymax.max(e.ymax);
    }
    b
}

/// Connected components of the intersection graph of a disk family.
pub fn disk_components(disks: &[Disk]) -> Vec<Vec<usize>> {
    let n = disks.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut q = VecDeque::from([s]);
        while let Some(i) = q.pop_front() {
            for j in 0..n {
                if comp[j] == usize::MAX && disks[i].meets(&disks[j]) {
                    comp[j] = id;
                    members.push(j);
                    q.push_back(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

impl CompactRegion {
    /// Validating constructor: nonempty, positive radii, connected union,
    /// connected complement (flood fill at `h = min radius / 8`).
    pub fn new(disks: Vec<Disk>) -> Result<Self, PlaneError> {
        let r = Self::unchecked(disks)?;
        if !r.is_connected() {
            return Err(PlaneError::InvalidRegion("union of disks is not connected".into()));
        }
        if !r.complement_connected(r.min_radius() / 8.0) {
            return Err(PlaneError::InvalidRegion("complement is not connected".into()));
        }
        Ok(r)
    }

    /// Constructor that only checks radii; topology left to the caller.
    pub fn unchecked(disks: Vec<Disk>) -> Result<Self, PlaneError> {
        if disks.is_empty() {
            return Err(PlaneError::InvalidRegion("no disks".into()));
        }
        if disks.iter().any(|d| !(d.radius > 0.0) || !d.center.re.is_finite() || !d.center.im.is_finite()) {
            return Err(PlaneError::InvalidRegion("nonpositive radius or nonfinite center".into()));
        }
        let bbox = bbox_of(&disks);
        Ok(CompactRegion { disks, bbox })
    }

    pub fn disk(center: C64, radius: f64) -> Self {
        let d = Disk::new(center, radius);
        CompactRegion { disks: vec![d], bbox: d.bbox() }
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn bbox(&self) -> Window {
        self.bbox
    }

    pub fn min_radius(&self) -> f64 {
        self.disks.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.bbox.contains(z) && self.disks.iter().any(|d| d.contains(z))
    }

    /// `z` lies in the union with clearance `margin` inside some disk.
    pub fn contains_with_margin(&self, z: C64, margin: f64) -> bool {
        self.disks.iter().any(|d| (z - d.center).norm() + margin <= d.radius)
    }

    /// Distance from `z` to the union (zero inside).
    pub fn distance(&self, z: C64) -> f64 {
        self.disks
            .iter()
            .map(|d| ((z - d.center).norm() - d.radius).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translate(&self, w: C64) -> Self {
        CompactRegion {
            disks: self.disks.iter().map(|d| d.translate(w)).collect(),
            bbox: self.bbox.translate(w),
        }
    }

    pub fn is_connected(&self) -> bool {
        disk_components(&self.disks).len() == 1
    }

    /// Closed unions meet (some pair of disks meets).
    pub fn meets(&self, other: &CompactRegion) -> bool {
        if self.bbox.intersect(&other.bbox).is_none() {
            return false;
        }
        self.disks.iter().any(|a| other.disks.iter().any(|b| a.meets(b)))
    }

    /// Grid flood fill of the complement at resolution `h`; true when every
    /// outside cell is reachable from the border.
    pub fn complement_connected(&self, h: f64) -> bool {
        holes(&self.disks, h).is_empty()
    }

    /// Union with another region (no topology check).
    pub fn union(&self, other: &CompactRegion) -> CompactRegion {
        let mut disks = self.disks.clone();
        disks.extend_from_slice(&other.disks);
        CompactRegion { bbox: bbox_of(&disks), disks }
    }

    /// Boundary sample points: `max(16, ceil(2 pi r density))` nodes per
    /// circle, keeping only those not strictly inside another disk.
    pub fn boundary_points(&self, density: f64) -> Vec<C64> {
        self.boundary_arcs(density).into_iter().flatten().collect()
    }

    /// Boundary samples grouped per disk, in angular order.
    pub fn boundary_arcs(&self, density: f64) -> Vec<Vec<C64>> {
        self.boundary_arcs_with(|r| circle_nodes(r, density))
    }

    /// Boundary samples with a caller-chosen node count per circle radius.
    pub fn boundary_arcs_with(&self, nodes: impl Fn(f64) -> usize) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(self.disks.len());
        for (k, d) in self.disks.iter().enumerate() {
            let n = nodes(d.radius).max(3);
            let mut arc = Vec::with_capacity(n);
            for i in 0..n {
                let z = d.center + d.radius * C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
                let covered = self.disks.iter().enumerate().any(|(j, e)| {
                    j != k && (z - e.center).norm() < e.radius * (1.0 - 1e-12)
                });
                if !covered {
                    arc.push(z);
                }
            }
            out.push(arc);
        }
        out
    }

    /// Interior samples on a hexagonal lattice of spacing `s` anchored at
    /// the bounding box corner.
    pub fn interior_points(&self, s: f64) -> Vec<C64> {
        hex_lattice(&self.bbox, s).into_iter().filter(|z| self.contains(*z)).collect()
    }

    /// Boundary plus interior samples at a common density.
    pub fn sample_points(&self, density: f64) -> Vec<C64> {
        let mut v = self.boundary_points(density);
        v.extend(self.interior_points(1.0 / density));
        v
    }

    /// Rough area by lattice counting.
    pub fn area_estimate(&self) -> f64 {
        let b = self.bbox();
        let s = (self.min_radius() / 8.0).max(b.width().max(b.height()) / 512.0);
        let cell = s * s * 3f64.sqrt() / 2.0;
        self.interior_points(s).len() as f64 * cell
    }
}

/// Number of trapezoid nodes used on a circle of radius `r`.
pub fn circle_nodes(r: f64, density: f64) -> usize {
    ((2.0 * PI * r * density).ceil() as usize).max(16)
}

/// Hexagonal lattice points covering `w` with spacing `s`.
pub fn hex_lattice(w: &Window, s: f64) -> Vec<C64> {
    let dy = s * 3f64.sqrt() / 2.0;
    let ny = (w.height() / dy).floor() as usize + 1;
    let nx = (w.width() / s).floor() as usize + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = w.ymin + j as f64 * dy;
        let off = if j % 2 == 1 { 0.5 * s } else { 0.0 };
        for i in 0..nx {
            let x = w.xmin + off + i as f64 * s;
            if x <= w.xmax {
                out.push(c64(x, y));
            }
        }
    }
    out
}

/// Centers of complement grid cells that are not reachable from the border
/// (holes of the union), at resolution `h`.
pub fn holes(disks: &[Disk], h: f64) -> Vec<C64> {
    let b = bbox_of(disks).expand(2.0 * h);
    let nx = (b.width() / h).ceil() as usize + 1;
    let ny = (b.height() / h).ceil() as usize + 1;
    let cell = |i: usize, j: usize| c64(b.xmin + (i as f64 + 0.5) * h, b.ymin + (j as f64 + 0.5) * h);
    let mut inside = vec![false; nx * ny];
    for d in disks {
        let bb = d.bbox();
        let i0 = (((bb.xmin - b.xmin) / h).floor().max(0.0)) as usize;
        let i1 = (((bb.xmax - b.xmin) / h).ceil() as usize).min(nx - 1);
        let j0 = (((bb.ymin - b.ymin) / h).floor().max(0.0)) as usize;
        let j1 = (((bb.ymax - b.ymin) / h).ceil() as usize).min(ny - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !inside[j * nx + i] && d.contains(cell(i, j)) {
                    inside[j * nx + i] = true;
                }
            }
        }
    }
    let mut seen = vec![false; nx * ny];
    let mut q = VecDeque::new();
    seen[0] = true;
    q.push_back((0usize, 0usize));
    while let Some((i, j)) = q.pop_front() {
        let mut visit = |a: usize, b: usize| {
            let k = b * nx + a;
            if !seen[k] && !inside[k] {
                seen[k] = true;
                q.push_back((a, b));
            }
        };
        if i > 0 {
            visit(i - 1, j);
        }
        if i + 1 < nx {
            visit(i + 1, j);
        }
        if j > 0 {
            visit(i, j - 1);
        }
        if j + 1 < ny {
            visit(i, j + 1);
        }
    }
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !inside[k] && !seen[k] {
                out.push(cell(i, j));
            }
        }
    }
    out
}

/// Polynomial with complex coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Self::constant(C64::new(1.0, 0.0));
        for r in roots {
            p = p.mul(&Self::new(vec![-r, C64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

type CFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Value(CFn),
    /// Evaluator returns a logarithm of the value (any branch).
    Log(CFn),
}

/// A function known through an evaluation closure, with optional analytic
/// derivative information, declared singularities and a validity window.
#[derive(Clone)]
pub struct SampledFunction {
    repr: Repr,
    /// Derivative for `Value`, logarithmic derivative for `Log`.
    deriv: Option<CFn>,
    singularities: Vec<C64>,
    window: Option<Window>,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("log_repr", &matches!(self.repr, Repr::Log(_)))
            .field("analytic_derivative", &self.deriv.is_some())
            .field("singularities", &self.singularities)
            .field("window", &self.window)
            .finish()
    }
}

impl SampledFunction {
    pub fn new(f: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        SampledFunction { repr: Repr::Value(Arc::new(f)), deriv: None, singularities: Vec::new(), window: None }
    }

    /// Function given through a logarithm; used for products whose modulus
    /// leaves the floating-point range.
    pub fn from_log(lf: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        SampledFunction { repr: Repr::Log(Arc::new(lf)), deriv: None, singularities: Vec::new(), window: None }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(move |_| c).with_derivative(|_| C64::new(0.0, 0.0))
    }

    pub fn polynomial(p: ComplexPoly) -> Self {
        let dp = p.derivative();
        Self::new(move |z| p.eval(z)).with_derivative(move |z| dp.eval(z))
    }

    /// Attach the analytic derivative (of the value, or of the log for
    /// log-represented functions).
    pub fn with_derivative(mut self, df: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(df));
        self
    }

    pub fn with_singularities(mut self, s: Vec<C64>) -> Self {
        self.singularities = s;
        self
    }

    pub fn with_window(mut self, w: Window) -> Self {
        self.window = Some(w);
        self
    }

    pub fn singularities(&self) -> &[C64] {
        &self.singularities
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn is_log_repr(&self) -> bool {
        matches!(self.repr, Repr::Log(_))
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn value(&self, z: C64) -> C64 {
        match &self.repr {
            Repr::Value(f) => f(z),
            Repr::Log(l) => l(z).exp(),
        }
    }

    /// A logarithm of f(z), principal branch for value-represented functions.
    pub fn log_value(&self, z: C64) -> C64 {
        match &self.repr {
            Repr::Value(f) => f(z).ln(),
            Repr::Log(l) => l(z),
        }
    }

    /// log|f(z)|.
    pub fn log_abs(&self, z: C64) -> f64 {
        match &self.repr {
            Repr::Value(f) => f(z).norm().ln(),
            Repr::Log(l) => l(z).re,
        }
    }

    /// f'(z); analytic when available, otherwise a Cauchy-circle estimate.
    pub fn derivative(&self, z: C64) -> C64 {
        match (&self.repr, &self.deriv) {
            (Repr::Value(_), Some(d)) => d(z),
            (Repr::Log(l), Some(d)) => d(z) * l(z).exp(),
            _ => cauchy_derivative(|w| self.value(w), z, self.derivative_radius(z)),
        }
    }

    /// f'(z)/f(z).
    pub fn log_derivative(&self, z: C64) -> C64 {
        match (&self.repr, &self.deriv) {
            (Repr::Value(f), Some(d)) => d(z) / f(z),
            (Repr::Log(_), Some(d)) => d(z),
            (Repr::Value(f), None) => cauchy_derivative(|w| f(w), z, self.derivative_radius(z)) / f(z),
            (Repr::Log(l), None) => cauchy_derivative(|w| l(w), z, self.derivative_radius(z)),
        }
    }

    fn derivative_radius(&self, z: C64) -> f64 {
        let mut rho = 1e-3 * (1.0 + z.norm()).min(10.0);
        for s in &self.singularities {
            rho = rho.min(0.25 * (z - s).norm());
        }
        rho.max(1e-8)
    }

    /// z -> f(z + w).
    pub fn shifted(&self, w: C64) -> SampledFunction {
        let repr = match &self.repr {
            Repr::Value(f) => {
                let f = f.clone();
                Repr::Value(Arc::new(move |z| f(z + w)))
            }
            Repr::Log(l) => {
                let l = l.clone();
                Repr::Log(Arc::new(move |z| l(z + w)))
            }
        };
        let deriv = self.deriv.clone().map(|d| Arc::new(move |z| d(z + w)) as CFn);
        SampledFunction {
            repr,
            deriv,
            singularities: self.singularities.iter().map(|s| s - w).collect(),
            window: self.window.map(|win| win.translate(-w)),
        }
    }
}

/// Derivative of a holomorphic `f` at `z` by the trapezoid rule on a small
/// circle of radius `rho` (16 nodes).
pub fn cauchy_derivative(f: impl Fn(C64) -> C64, z: C64, rho: f64) -> C64 {
    const N: usize = 16;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..N {
        let u = C64::from_polar(1.0, 2.0 * PI * k as f64 / N as f64);
        acc += f(z + rho * u) / u;
    }
    acc / (N as f64 * rho)
}

/// Seminorm value with the sampling slack estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub value: f64,
    /// Half the largest jump between neighbouring boundary samples: a
    /// modulus-of-continuity bound on how much the sample max can miss.
    pub slack: f64,
    pub samples: usize,
}

fn check_singularities(f: &SampledFunction, k: &CompactRegion) -> Result<(), PlaneError> {
    match f.singularities().iter().find(|s| k.contains(**s)) {
        Some(s) => Err(PlaneError::SingularityInK { at: *s }),
        None => Ok(()),
    }
}

fn sampled_max(
    k: &CompactRegion,
    density: f64,
    g: impl Fn(C64) -> f64,
) -> SeminormReport {
    let mut value = 0f64;
    let mut slack = 0f64;
    let mut samples = 0;
    for arc in k.boundary_arcs(density) {
        let vals: Vec<f64> = arc.iter().map(|z| g(*z)).collect();
        samples += vals.len();
        for (i, v) in vals.iter().enumerate() {
            value = value.max(*v);
            if i > 0 {
                slack = slack.max(0.5 * (v - vals[i - 1]).abs());
            }
        }
    }
    for z in k.interior_points(1.0 / density) {
        value = value.max(g(z));
        samples += 1;
    }
    SeminormReport { value, slack, samples }
}

/// sup |f| over boundary and interior samples of K.
pub fn sup_seminorm(f: &SampledFunction, k: &CompactRegion, density: f64) -> Result<SeminormReport, PlaneError> {
    check_singularities(f, k)?;
    Ok(sampled_max(k, density, |z| f.value(z).norm()))
}

/// sup |log|f|| over samples of K; f must be zero- and pole-free on K.
pub fn log_seminorm(f: &SampledFunction, k: &CompactRegion, density: f64) -> Result<SeminormReport, PlaneError> {
    check_singularities(f, k)?;
    for d in k.disks() {
        let n = circle_nodes(d.radius, density.max(8.0)).max(64);
        match count_zeros(f, &Contour::Circle { center: d.center, radius: d.radius }, n) {
            Ok(zc) if zc.count == 0 => {}
            _ => return Err(PlaneError::ZeroInK { at: d.center }),
        }
    }
    let rep = sampled_max(k, density, |z| f.log_abs(z).abs());
    if !rep.value.is_finite() {
        return Err(PlaneError::ZeroInK { at: k.disks()[0].center });
    }
    Ok(rep)
}

/// Closed integration contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    Circle { center: C64, radius: f64 },
    Rectangle(Window),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub count: i64,
    /// Distance of the raw quadrature value from the reported integer.
    pub residual: f64,
}

/// Zeros minus poles inside the contour by the argument principle,
/// trapezoid rule on `nodes` points.
pub fn count_zeros(f: &SampledFunction, contour: &Contour, nodes: usize) -> Result<ZeroCount, PlaneError> {
    let nodes = nodes.max(8);
    let mut acc = C64::new(0.0, 0.0);
    match *contour {
        Contour::Circle { center, radius } => {
            for k in 0..nodes {
                let u = radius * C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
                acc += f.log_derivative(center + u) * u;
            }
            acc /= nodes as f64;
        }
        Contour::Rectangle(w) => {
            let per = (nodes / 4).max(4);
            let c = w.corners();
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                let dz = (b - a) / per as f64;
                for k in 0..=per {
                    let wt = if k == 0 || k == per { 0.5 } else { 1.0 };
                    acc += f.log_derivative(a + dz * k as f64) * dz * wt;
                }
            }
            acc /= C64::new(0.0, 2.0 * PI);
        }
    }
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(PlaneError::ContourThroughZero { residual: f64::INFINITY });
    }
    let count = acc.re.round();
    let residual = (acc - count).norm();
    if residual > 0.25 {
        return Err(PlaneError::ContourThroughZero { residual });
    }
    Ok(ZeroCount { count: count as i64, residual })
}

/// Newton iteration from `guess` until |f| < 1e-12 (or the step stalls at
/// round-off level).
pub fn refine_zero(f: &SampledFunction, guess: C64) -> Result<C64, PlaneError> {
    const MAX_ITER: usize = 100;
    let mut z = guess;
    for _ in 0..MAX_ITER {
        if f.log_abs(z) < (1e-12f64).ln() {
            return Ok(z);
        }
        let ld = f.log_derivative(z);
        if !ld.re.is_finite() || !ld.im.is_finite() || ld.norm() == 0.0 {
            break;
        }
        let step = ld.inv();
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Err(PlaneError::NoConvergence { iterations: MAX_ITER, last: z })
}

/// Trapezoid value of (1/2 pi i) \oint f(z) (z - c)^{j-1} dz on the circle
/// |z - c| = r with `nodes` points.
pub fn contour_integral(f: &SampledFunction, center: C64, radius: f64, j: i32, nodes: usize) -> C64 {
    let nodes = nodes.max(8);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..nodes {
        let u = radius * C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        acc += f.value(center + u) * u.powi(j);
    }
    acc / nodes as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> CompactRegion {
        CompactRegion::disk(c64(0.0, 0.0), 1.0)
    }

    #[test]
    fn sup_examples() {
        let f = SampledFunction::new(|z| z);
        assert_relative_eq!(sup_seminorm(&f, &unit(), 32.0).unwrap().value, 1.0, epsilon = 1e-12);
        let f = SampledFunction::new(|z: C64| z.exp());
        let k = CompactRegion::disk(c64(0.0, 0.0), 2.0);
        assert_relative_eq!(sup_seminorm(&f, &k, 32.0).unwrap().value, 2f64.exp(), epsilon = 1e-12);
        let f = SampledFunction::new(|z: C64| (z - 3.0).inv()).with_singularities(vec![c64(3.0, 0.0)]);
        assert_relative_eq!(sup_seminorm(&f, &unit(), 32.0).unwrap().value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sup_rejects_singularity() {
        let f = SampledFunction::new(|z: C64| z.inv()).with_singularities(vec![c64(0.0, 0.0)]);
        assert!(matches!(sup_seminorm(&f, &unit(), 8.0), Err(PlaneError::SingularityInK { .. })));
    }

    #[test]
    fn log_examples() {
        let two = SampledFunction::constant(c64(2.0, 0.0));
        assert_relative_eq!(log_seminorm(&two, &unit(), 16.0).unwrap().value, 2f64.ln(), epsilon = 1e-14);
        let one = SampledFunction::constant(c64(1.0, 0.0));
        assert_eq!(log_seminorm(&one, &unit(), 16.0).unwrap().value, 0.0);
        let e = SampledFunction::new(|z: C64| z.exp()).with_derivative(|z: C64| z.exp());
        let k = CompactRegion::disk(c64(1.0, 0.0), 0.5);
        assert_relative_eq!(log_seminorm(&e, &k, 32.0).unwrap().value, 1.5, epsilon = 1e-12);
        let z = SampledFunction::new(|z| z);
        assert!(matches!(log_seminorm(&z, &unit(), 16.0), Err(PlaneError::ZeroInK { .. })));
    }

    #[test]
    fn zero_count_examples() {
        let circ = Contour::Circle { center: c64(0.0, 0.0), radius: 1.0 };
        let sq = SampledFunction::new(|z: C64| z * z);
        assert_eq!(count_zeros(&sq, &circ, 64).unwrap().count, 2);
        let e = SampledFunction::new(|z: C64| z.exp());
        assert_eq!(count_zeros(&e, &circ, 64).unwrap().count, 0);
        let p = SampledFunction::new(|z: C64| (z - 0.3) * (z - 0.31));
        assert_eq!(count_zeros(&p, &circ, 128).unwrap().count, 2);
        let rect = Contour::Rectangle(Window::square(1.0));
        assert_eq!(count_zeros(&p, &rect, 2048).unwrap().count, 2);
    }

    #[test]
    fn contour_through_zero_is_reported() {
        let f = SampledFunction::new(|z: C64| z - 1.0);
        let circ = Contour::Circle { center: c64(0.0, 0.0), radius: 1.0 };
        assert!(matches!(count_zeros(&f, &circ, 64), Err(PlaneError::ContourThroughZero { .. })));
    }

    #[test]
    fn newton_examples() {
        let f = SampledFunction::new(|z: C64| z - 0.5).with_derivative(|_| c64(1.0, 0.0));
        assert!((refine_zero(&f, c64(0.0, 0.0)).unwrap() - 0.5).norm() < 1e-12);
        let s = SampledFunction::new(|z: C64| (PI * z).sin()).with_derivative(|z: C64| PI * (PI * z).cos());
        assert!((refine_zero(&s, c64(0.9, 0.1)).unwrap() - 1.0).norm() < 1e-12);
        let q = SampledFunction::new(|z: C64| z * z - 2.0);
        assert!((refine_zero(&q, c64(1.0, 0.0)).unwrap() - 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn newton_reports_failure() {
        // Real Newton iterates for z^2 + 1 never leave the real axis.
        let f = SampledFunction::new(|z: C64| z * z + 1.0).with_derivative(|z: C64| 2.0 * z);
        assert!(matches!(refine_zero(&f, c64(0.5, 0.0)), Err(PlaneError::NoConvergence { .. })));
    }

    #[test]
    fn contour_integral_examples() {
        let o = c64(0.0, 0.0);
        let inv = SampledFunction::new(|z: C64| z.inv());
        assert!((contour_integral(&inv, o, 1.0, 1, 64) - 1.0).norm() < 1e-14);
        let e = SampledFunction::new(|z: C64| z.exp());
        assert!(contour_integral(&e, o, 1.0, 1, 64).norm() < 1e-14);
        let inv2 = SampledFunction::new(|z: C64| (z * z).inv());
        assert!((contour_integral(&inv2, o, 1.0, 2, 64) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn flood_fill_fixtures() {
        assert!(CompactRegion::new(vec![Disk::new(c64(0.0, 0.0), 1.0)]).is_ok());
        let two = CompactRegion::unchecked(vec![Disk::new(c64(-2.0, 0.0), 0.5), Disk::new(c64(2.0, 0.0), 0.5)]).unwrap();
        assert!(two.complement_connected(0.5 / 8.0));
        assert!(!two.is_connected());
        let ring: Vec<Disk> = (0..12)
            .map(|k| Disk::new(3.0 * C64::from_polar(1.0, 2.0 * PI * k as f64 / 12.0), 1.0))
            .collect();
        let ring = CompactRegion::unchecked(ring).unwrap();
        assert!(ring.is_connected());
        assert!(!ring.complement_connected(1.0 / 8.0));
        assert!(CompactRegion::new(ring.disks().to_vec()).is_err());
    }

    #[test]
    fn window_serde_roundtrip() {
        let w = Window::new(-1.0, 2.0, -3.0, 4.0).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, "[-1.0,2.0,-3.0,4.0]");
        assert_eq!(serde_json::from_str::<Window>(&s).unwrap(), w);
        assert!(serde_json::from_str::<Window>("[1,0,0,1]").is_err());
    }

    #[test]
    fn poly_arithmetic() {
        let p = ComplexPoly::from_roots(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
        assert_eq!(p.degree(), 2);
        assert!(p.eval(c64(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.derivative().eval(c64(3.0, 0.0)), c64(6.0, 0.0));
        assert!(p.add(&p.scale(c64(-1.0, 0.0))).is_zero());
    }
}
