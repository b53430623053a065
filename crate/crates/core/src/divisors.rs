//! Divisors on a plane window, point-configuration generators, principal
//! parts, stabilizer detection and the bottleneck transport distance.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane::{c64, contour_integral, PlaneError, SampledFunction, Window, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivisorError {
    #[error("window has no admissible area or the generator parameters are not positive")]
    EmptyWindow,
    #[error("invalid divisor: {0}")]
    Invalid(String),
    #[error("candidate period {candidate} has defect {defect:.3e}, within [tol, 10 tol]")]
    AmbiguousNearPeriod { candidate: C64, defect: f64 },
    #[error("extraction circles of radius {radius} around {a} and {b} overlap")]
    OverlappingCircles { a: C64, b: C64, radius: f64 },
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

/// One weighted point of a divisor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivPoint {
    pub re: f64,
    pub im: f64,
    pub mult: i32,
}

impl DivPoint {
    pub fn new(z: C64, mult: i32) -> Self {
        DivPoint { re: z.re, im: z.im, mult }
    }

    pub fn z(&self) -> C64 {
        c64(self.re, self.im)
    }
}

/// Finite signed divisor restricted to a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DivisorJson")]
pub struct Divisor {
    window: Window,
    points: Vec<DivPoint>,
}

#[derive(Deserialize)]
struct DivisorJson {
    window: Window,
    points: Vec<DivPoint>,
}

impl TryFrom<DivisorJson> for Divisor {
    type Error = DivisorError;
    fn try_from(j: DivisorJson) -> Result<Self, DivisorError> {
        Divisor::new(j.window, j.points)
    }
}

impl Divisor {
    /// Validates: nonzero multiplicities, finite coordinates inside the
    /// window, pairwise distinct locations.
    pub fn new(window: Window, points: Vec<DivPoint>) -> Result<Self, DivisorError> {
        for p in &points {
            if p.mult == 0 {
                return Err(DivisorError::Invalid(format!("zero multiplicity at {}", p.z())));
            }
            if !p.re.is_finite() || !p.im.is_finite() || !window.contains(p.z()) {
                return Err(DivisorError::Invalid(format!("point {} outside window {window}", p.z())));
            }
        }
        let d = Divisor { window, points };
        if d.points.len() > 1 && d.min_separation() == 0.0 {
            return Err(DivisorError::Invalid("repeated location".into()));
        }
        Ok(d)
    }

    pub fn empty(window: Window) -> Self {
        Divisor { window, points: Vec::new() }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn points(&self) -> &[DivPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<C64> {
        self.points.iter().map(DivPoint::z).collect()
    }

    pub fn degree(&self) -> i64 {
        self.points.iter().map(|p| p.mult as i64).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|p| p.mult > 0)
    }

    /// Smallest pairwise distance (infinite for fewer than two points).
    pub fn min_separation(&self) -> f64 {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].re.total_cmp(&self.points[b].re));
        let mut best = f64::INFINITY;
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                let dx = self.points[j].re - self.points[i].re;
                if dx >= best {
                    break;
                }
                best = best.min((self.points[j].z() - self.points[i].z()).norm());
            }
        }
        best
    }

    /// Divisor translated by `w` (points and window together).
    pub fn translate(&self, w: C64) -> Divisor {
        Divisor {
            window: self.window.translate(w),
            points: self.points.iter().map(|p| DivPoint::new(p.z() + w, p.mult)).collect(),
        }
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, w: &Window) -> Divisor {
        Divisor {
            window: *w,
            points: self.points.iter().filter(|p| w.contains(p.z())).copied().collect(),
        }
    }

    /// Centroid of the support weighted by |mult|.
    pub fn centroid(&self) -> Option<C64> {
        if self.points.is_empty() {
            return None;
        }
        let mut s = c64(0.0, 0.0);
        let mut m = 0.0;
        for p in &self.points {
            s += p.z() * p.mult.unsigned_abs() as f64;
            m += p.mult.unsigned_abs() as f64;
        }
        Some(s / m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("divisor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DivisorError> {
        serde_json::from_str(s).map_err(|e| DivisorError::Invalid(e.to_string()))
    }
}

/// Point-configuration generator kinds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenKind {
    Poisson { intensity: f64 },
    JitteredLattice { spacing: f64, jitter: f64 },
    AlmostPeriodic,
    PeriodicLattice { spacing: f64 },
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for lattice cell (i, j).
fn cell_rng(seed: u64, i: i64, j: i64) -> ChaCha8Rng {
    let h = splitmix(splitmix(splitmix(seed) ^ i as u64) ^ (j as u64).rotate_left(32));
    ChaCha8Rng::seed_from_u64(h)
}

/// Exponent of 2 in gcd(m, n); `None` for (0, 0).
pub fn two_adic_gcd(m: i64, n: i64) -> Option<u32> {
    if m == 0 && n == 0 {
        return None;
    }
    Some((m | n).trailing_zeros())
}

/// The almost-periodic perturbation g(m + i n) = m + i n + 1/2 - 2^{-alpha-1}.
pub fn almost_periodic_point(m: i64, n: i64) -> C64 {
    let off = match two_adic_gcd(m, n) {
        Some(a) => 0.5 - 0.5f64.powi(a as i32 + 1),
        None => 0.5,
    };
    c64(m as f64 + off, n as f64)
}

/// Deterministic configuration generator. Randomness is drawn per unit
/// lattice cell from a counter-based stream, so the output does not depend
/// on evaluation order.
pub fn generate(kind: GenKind, window: Window, seed: u64) -> Result<Divisor, DivisorError> {
    if !(window.area() > 0.0) {
        return Err(DivisorError::EmptyWindow);
    }
    let mut pts = Vec::new();
    match kind {
        GenKind::Poisson { intensity } => {
            if !(intensity > 0.0) {
                return Err(DivisorError::EmptyWindow);
            }
            let lam = Poisson::new(intensity).map_err(|_| DivisorError::EmptyWindow)?;
            for j in window.ymin.floor() as i64..=window.ymax.floor() as i64 {
                for i in window.xmin.floor() as i64..=window.xmax.floor() as i64 {
                    let mut rng = cell_rng(seed, i, j);
                    let n = lam.sample(&mut rng) as usize;
                    for _ in 0..n {
                        let z = c64(i as f64 + rng.random::<f64>(), j as f64 + rng.random::<f64>());
                        if window.contains(z) {
                            pts.push(z);
                        }
                    }
                }
            }
        }
        GenKind::JitteredLattice { spacing, jitter } => {
            if !(spacing > 0.0) || jitter < 0.0 {
                return Err(DivisorError::EmptyWindow);
            }
            for j in (window.ymin / spacing).floor() as i64..=(window.ymax / spacing).ceil() as i64 {
                for i in (window.xmin / spacing).floor() as i64..=(window.xmax / spacing).ceil() as i64 {
                    let mut rng = cell_rng(seed, i, j);
                    let dx = jitter * (rng.random::<f64>() - 0.5);
                    let dy = jitter * (rng.random::<f64>() - 0.5);
                    let z = c64(i as f64 * spacing + dx, j as f64 * spacing + dy);
                    if window.contains(z) {
                        pts.push(z);
                    }
                }
            }
        }
        GenKind::AlmostPeriodic => {
            for n in window.ymin.floor() as i64 - 1..=window.ymax.ceil() as i64 + 1 {
                for m in window.xmin.floor() as i64 - 1..=window.xmax.ceil() as i64 + 1 {
                    let z = almost_periodic_point(m, n);
                    if window.contains(z) {
                        pts.push(z);
                    }
                }
            }
        }
        GenKind::PeriodicLattice { spacing } => {
            if !(spacing > 0.0) {
                return Err(DivisorError::EmptyWindow);
            }
            // Half-open cells [min, max): a window of side k*spacing holds k^2 points.
            for j in (window.ymin / spacing).ceil() as i64..=(window.ymax / spacing).floor() as i64 {
                for i in (window.xmin / spacing).ceil() as i64..=(window.xmax / spacing).floor() as i64 {
                    let z = c64(i as f64 * spacing, j as f64 * spacing);
                    if z.re < window.xmax && z.im < window.ymax {
                        pts.push(z);
                    }
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(DivisorError::EmptyWindow);
    }
    Divisor::new(window, pts.into_iter().map(|z| DivPoint::new(z, 1)).collect())
}

/// Maximum bipartite matching (Hopcroft-Karp) on adjacency lists.
fn max_matching(adj: &[Vec<usize>], n_right: usize) -> usize {
    let n_left = adj.len();
    const NIL: usize = usize::MAX;
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    let mut result = 0;
    loop {
        // BFS layering from free left vertices.
        let mut q = std::collections::VecDeque::new();
        for u in 0..n_left {
            if match_l[u] == NIL {
                dist[u] = 0;
                q.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(u: usize, adj: &[Vec<usize>], ml: &mut [usize], mr: &mut [usize], dist: &mut [usize]) -> bool {
            for &v in &adj[u] {
                let w = mr[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && dfs(w, adj, ml, mr, dist)) {
                    ml[u] = v;
                    mr[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..n_left {
            if match_l[u] == NIL && dfs(u, adj, &mut match_l, &mut match_r, &mut dist) {
                result += 1;
            }
        }
    }
    result
}

/// Points with multiplicity expanded into unit copies, keyed by sign.
fn expand(d: &Divisor, w: &Window) -> Vec<(C64, i32)> {
    let mut out = Vec::new();
    for p in d.points() {
        if w.contains(p.z()) {
            for _ in 0..p.mult.unsigned_abs() {
                out.push((p.z(), p.mult.signum()));
            }
        }
    }
    out
}

/// Bottleneck matching distance between the window restrictions of `a`
/// and `b`; `+inf` when the (signed) counts differ.
pub fn transport_distance(a: &Divisor, b: &Divisor, window: &Window) -> f64 {
    let pa = expand(a, window);
    let pb = expand(b, window);
    let count = |v: &[(C64, i32)], s: i32| v.iter().filter(|p| p.1 == s).count();
    if count(&pa, 1) != count(&pb, 1) || count(&pa, -1) != count(&pb, -1) {
        return f64::INFINITY;
    }
    if pa.is_empty() {
        return 0.0;
    }
    let mut cands: Vec<f64> = Vec::with_capacity(pa.len() * pb.len());
    for x in &pa {
        for y in &pb {
            if x.1 == y.1 {
                cands.push((x.0 - y.0).norm());
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let feasible = |t: f64| {
        let adj: Vec<Vec<usize>> = pa
            .iter()
            .map(|x| {
                pb.iter()
                    .enumerate()
                    .filter(|(_, y)| y.1 == x.1 && (x.0 - y.0).norm() <= t)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        max_matching(&adj, pb.len()) == pa.len()
    };
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizerKind {
    Free,
    SinglyPeriodic,
    DoublyPeriodic,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub kind: StabilizerKind,
    pub generators: Vec<C64>,
    pub tolerance: f64,
    /// Smallest defect among rejected candidates (how far from periodic).
    pub nearest_defect: f64,
}

/// Bucket grid for nearest-point queries up to distance `cell`.
struct PointGrid<'a> {
    d: &'a Divisor,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> PointGrid<'a> {
    fn new(d: &'a Divisor, cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in d.points().iter().enumerate() {
            buckets.entry(Self::key(p.z(), cell)).or_default().push(i);
        }
        PointGrid { d, cell, buckets }
    }

    fn key(z: C64, cell: f64) -> (i64, i64) {
        ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64)
    }

    /// Distance to the nearest point of multiplicity `mult`, capped at `cell`.
    fn nearest(&self, q: C64, mult: i32) -> f64 {
        let (kx, ky) = Self::key(q, self.cell);
        let mut best = self.cell;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &i in v {
                        let p = self.d.points()[i];
                        if p.mult == mult {
                            best = best.min((p.z() - q).norm());
                        }
                    }
                }
            }
        }
        best
    }
}

/// Largest distance from a shifted point to the configuration (capped at
/// the grid cell), over points whose shift stays at least `margin` inside
/// the window; multiplicities must agree. Stops early once the defect
/// exceeds `cutoff`.
fn period_defect(grid: &PointGrid<'_>, v: C64, margin: f64, cutoff: f64) -> f64 {
    let d = grid.d;
    let w = d.window();
    let inner = match Window::new(w.xmin + margin, w.xmax - margin, w.ymin + margin, w.ymax - margin) {
        Ok(i) => i,
        Err(_) => return f64::INFINITY,
    };
    let mut worst = 0f64;
    let mut any = false;
    for s in [1.0, -1.0] {
        for p in d.points() {
            let q = p.z() + s * v;
            if !inner.contains(q) {
                continue;
            }
            any = true;
            worst = worst.max(grid.nearest(q, p.mult));
            if worst > cutoff {
                return worst;
            }
        }
    }
    if any {
        worst
    } else {
        f64::INFINITY
    }
}

fn canonical_dir(v: C64) -> C64 {
    // Representative of {v, -v} with argument in [0, pi).
    if v.im < 0.0 || (v.im == 0.0 && v.re < 0.0) {
        -v
    } else {
        v
    }
}

/// Classify the translation stabilizer of `d` at tolerance `tol`.
pub fn detect_stabilizer(d: &Divisor, tol: f64) -> Result<StabilizerReport, DivisorError> {
    if d.is_empty() {
        return Ok(StabilizerReport { kind: StabilizerKind::Full, generators: vec![], tolerance: tol, nearest_defect: 0.0 });
    }
    let center = d.window().center();
    let mut near: Vec<C64> = d.locations();
    near.sort_by(|a, b| {
        (a - center).norm().total_cmp(&(b - center).norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im))
    });
    near.truncate(50);
    let mut cands: Vec<C64> = Vec::new();
    for (i, a) in near.iter().enumerate() {
        for b in &near[i + 1..] {
            let v = canonical_dir(b - a);
            if v.norm() > 0.0 {
                cands.push(v);
            }
        }
    }
    cands.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    cands.dedup_by(|a, b| (*a - *b).norm() <= tol);
    let mut periods = Vec::new();
    let mut nearest = f64::INFINITY;
    let span = d.window().width().min(d.window().height());
    let spacing = (d.window().area() / d.len() as f64).sqrt();
    let grid = PointGrid::new(d, spacing.max(100.0 * tol));
    for v in cands {
        if v.norm() > 0.5 * span {
            continue;
        }
        let defect = period_defect(&grid, v, 0.05 * span, nearest.max(10.0 * tol));
        if defect < tol {
            periods.push(v);
        } else {
            if defect <= 10.0 * tol {
                return Err(DivisorError::AmbiguousNearPeriod { candidate: v, defect });
            }
            nearest = nearest.min(defect);
        }
    }
    // Shortest period, ties within tol broken by argument, so the choice
    // does not depend on round-off in the candidate norms.
    let shortest = |vs: &mut dyn Iterator<Item = C64>| -> Option<C64> {
        let vs: Vec<C64> = vs.collect();
        let m = vs.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        vs.into_iter().filter(|v| v.norm() <= m + tol).min_by(|a, b| a.arg().total_cmp(&b.arg()))
    };
    let Some(g1) = shortest(&mut periods.iter().copied()) else {
        return Ok(StabilizerReport { kind: StabilizerKind::Free, generators: vec![], tolerance: tol, nearest_defect: nearest });
    };
    let g2 = shortest(
        &mut periods.iter().copied().filter(|v| (g1.re * v.im - g1.im * v.re).abs() > tol * g1.norm().max(1.0) * 10.0),
    );
    let (kind, generators) = match g2 {
        Some(g2) => (StabilizerKind::DoublyPeriodic, vec![g1, g2]),
        None => (StabilizerKind::SinglyPeriodic, vec![g1]),
    };
    Ok(StabilizerReport { kind, generators, tolerance: tol, nearest_defect: nearest })
}

/// d = d+ - d- with disjoint supports.
pub fn split_signed(d: &Divisor) -> (Divisor, Divisor) {
    let pos = d.points().iter().filter(|p| p.mult > 0).copied().collect();
    let neg = d.points().iter().filter(|p| p.mult < 0).map(|p| DivPoint { mult: -p.mult, ..*p }).collect();
    (Divisor { window: d.window(), points: pos }, Divisor { window: d.window(), points: neg })
}

/// Principal part at one pole: c_1/(z-w) + ... + c_m/(z-w)^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleEntry {
    pub re: f64,
    pub im: f64,
    /// `[re, im]` pairs, c_1 first.
    pub coeffs: Vec<[f64; 2]>,
}

impl PoleEntry {
    pub fn new(pole: C64, coeffs: &[C64]) -> Self {
        PoleEntry { re: pole.re, im: pole.im, coeffs: coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }

    pub fn pole(&self) -> C64 {
        c64(self.re, self.im)
    }

    pub fn coefficients(&self) -> Vec<C64> {
        self.coeffs.iter().map(|c| c64(c[0], c[1])).collect()
    }

    /// Value of the principal part at z.
    pub fn eval(&self, z: C64) -> C64 {
        let u = (z - self.pole()).inv();
        let mut acc = c64(0.0, 0.0);
        for c in self.coefficients().iter().rev() {
            acc = (acc + c) * u;
        }
        acc
    }

    /// Derivative of the principal part at z.
    pub fn eval_derivative(&self, z: C64) -> C64 {
        let u = (z - self.pole()).inv();
        self.coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| -c * (k as f64 + 1.0) * u.powi(k as i32 + 2))
            .sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrincipalParts {
    pub entries: Vec<PoleEntry>,
}

impl PrincipalParts {
    pub fn new(entries: Vec<PoleEntry>) -> Result<Self, DivisorError> {
        for (i, e) in entries.iter().enumerate() {
            let cs = e.coefficients();
            if cs.is_empty() || cs.last().is_some_and(|c| c.norm() == 0.0) {
                return Err(DivisorError::Invalid(format!("pole {} has empty or zero-leading coefficients", e.pole())));
            }
            if entries[..i].iter().any(|f| f.pole() == e.pole()) {
                return Err(DivisorError::Invalid(format!("repeated pole {}", e.pole())));
            }
        }
        Ok(PrincipalParts { entries })
    }

    pub fn poles(&self) -> Vec<C64> {
        self.entries.iter().map(PoleEntry::pole).collect()
    }

    pub fn translate(&self, w: C64) -> PrincipalParts {
        PrincipalParts {
            entries: self.entries.iter().map(|e| PoleEntry::new(e.pole() + w, &e.coefficients())).collect(),
        }
    }

    /// Largest coefficient-wise difference after matching poles exactly
    /// (poles compared within `pole_tol`); infinite on structural mismatch.
    pub fn max_coeff_difference(&self, other: &PrincipalParts, pole_tol: f64) -> f64 {
        if self.entries.len() != other.entries.len() {
            return f64::INFINITY;
        }
        let mut worst = 0f64;
        for e in &self.entries {
            let Some(f) = other.entries.iter().find(|f| (f.pole() - e.pole()).norm() <= pole_tol) else {
                return f64::INFINITY;
            };
            let (a, b) = (e.coefficients(), f.coefficients());
            for k in 0..a.len().max(b.len()) {
                let x = a.get(k).copied().unwrap_or_default();
                let y = b.get(k).copied().unwrap_or_default();
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }
}

/// Laurent coefficients c_j = (1/2 pi i) \oint f (z - p)^{j-1} dz on circles
/// of the given radius, j = 1..=order_cap, trailing |c| < 1e-10 dropped.
pub fn extract_principal_parts(
    f: &SampledFunction,
    suspected: &[C64],
    radius: f64,
    order_cap: usize,
) -> Result<PrincipalParts, DivisorError> {
    for (i, a) in suspected.iter().enumerate() {
        for b in &suspected[i + 1..] {
            if (a - b).norm() <= 2.0 * radius {
                return Err(DivisorError::OverlappingCircles { a: *a, b: *b, radius });
            }
        }
    }
    const NODES: usize = 256;
    let mut by_pole: BTreeMap<usize, PoleEntry> = BTreeMap::new();
    for (i, p) in suspected.iter().enumerate() {
        let mut cs: Vec<C64> = (1..=order_cap as i32).map(|j| contour_integral(f, *p, radius, j, NODES)).collect();
        while cs.last().is_some_and(|c| c.norm() < 1e-10) {
            cs.pop();
        }
        if !cs.is_empty() {
            by_pole.insert(i, PoleEntry::new(*p, &cs));
        }
    }
    PrincipalParts::new(by_pole.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn almost_periodic_formula() {
        assert_eq!(almost_periodic_point(3, 5), c64(3.0, 5.0));
        assert_eq!(almost_periodic_point(4, 6), c64(4.25, 6.0));
        assert_eq!(almost_periodic_point(8, 0), c64(8.0 + 0.5 - 1.0 / 16.0, 0.0));
    }

    #[test]
    fn lattice_count() {
        let d = generate(GenKind::PeriodicLattice { spacing: 1.0 }, Window::new(0.0, 3.0, 0.0, 3.0).unwrap(), 0).unwrap();
        assert_eq!(d.len(), 9);
        assert!(d.points().iter().all(|p| p.mult == 1));
    }

    #[test]
    fn poisson_is_deterministic_and_dense_enough() {
        let w = Window::square(16.0);
        let a = generate(GenKind::Poisson { intensity: 0.5 }, w, 7).unwrap();
        let b = generate(GenKind::Poisson { intensity: 0.5 }, w, 7).unwrap();
        assert_eq!(a, b);
        let n = a.len() as f64;
        assert!((n - 512.0).abs() < 5.0 * 512f64.sqrt(), "{n}");
        assert_ne!(a, generate(GenKind::Poisson { intensity: 0.5 }, w, 8).unwrap());
    }

    #[test]
    fn transport_examples() {
        let w = Window::square(2.0);
        let a = Divisor::new(w, vec![DivPoint::new(c64(0.0, 0.0), 1)]).unwrap();
        let b = Divisor::new(w, vec![DivPoint::new(c64(0.5, 0.0), 1)]).unwrap();
        assert_eq!(transport_distance(&a, &a, &w), 0.0);
        assert_eq!(transport_distance(&a, &b, &w), 0.5);
        assert_eq!(transport_distance(&a, &Divisor::empty(w), &w), f64::INFINITY);
    }

    #[test]
    fn stabilizer_examples() {
        let lat = generate(GenKind::PeriodicLattice { spacing: 1.0 }, Window::square(6.0), 0).unwrap();
        let r = detect_stabilizer(&lat, 1e-9).unwrap();
        assert_eq!(r.kind, StabilizerKind::DoublyPeriodic);
        assert_eq!(r.generators, vec![c64(1.0, 0.0), c64(0.0, 1.0)]);
        let one = Divisor::new(Window::square(6.0), vec![DivPoint::new(c64(0.0, 0.0), 1)]).unwrap();
        assert_eq!(detect_stabilizer(&one, 1e-9).unwrap().kind, StabilizerKind::Free);
        let ap = generate(GenKind::AlmostPeriodic, Window::square(8.0), 0).unwrap();
        assert_eq!(detect_stabilizer(&ap, 1e-9).unwrap().kind, StabilizerKind::Free);
    }

    #[test]
    fn near_period_is_ambiguous() {
        let jl = generate(GenKind::JitteredLattice { spacing: 1.0, jitter: 2e-9 }, Window::square(5.0), 3).unwrap();
        assert!(matches!(detect_stabilizer(&jl, 1e-9), Err(DivisorError::AmbiguousNearPeriod { .. })));
    }

    #[test]
    fn split_examples() {
        let w = Window::square(2.0);
        let d = Divisor::new(w, vec![DivPoint::new(c64(0.0, 0.0), 2), DivPoint::new(c64(1.0, 0.0), -1)]).unwrap();
        let (p, n) = split_signed(&d);
        assert_eq!(p.points(), &[DivPoint::new(c64(0.0, 0.0), 2)]);
        assert_eq!(n.points(), &[DivPoint::new(c64(1.0, 0.0), 1)]);
        let (p, n) = split_signed(&p);
        assert_eq!(p.len(), 1);
        assert!(n.is_empty());
        let (p, n) = split_signed(&Divisor::empty(w));
        assert!(p.is_empty() && n.is_empty());
    }

    #[test]
    fn principal_part_examples() {
        let f = SampledFunction::new(|z: C64| z.inv());
        let pp = extract_principal_parts(&f, &[c64(0.0, 0.0)], 0.5, 4).unwrap();
        assert_eq!(pp.entries.len(), 1);
        let c = pp.entries[0].coefficients();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.0).norm() < 1e-12);
        let g = SampledFunction::new(|z: C64| 2.0 * z / (z * z - 1.0));
        let pp = extract_principal_parts(&g, &[c64(1.0, 0.0), c64(-1.0, 0.0)], 0.5, 4).unwrap();
        for e in &pp.entries {
            let c = e.coefficients();
            assert_eq!(c.len(), 1);
            assert!((c[0] - 1.0).norm() < 1e-12);
        }
        let e = SampledFunction::new(|z: C64| z.exp());
        assert!(extract_principal_parts(&e, &[c64(0.0, 0.0)], 0.5, 4).unwrap().entries.is_empty());
        assert!(matches!(
            extract_principal_parts(&g, &[c64(1.0, 0.0), c64(-1.0, 0.0)], 1.0, 4),
            Err(DivisorError::OverlappingCircles { .. })
        ));
    }

    #[test]
    fn json_shapes() {
        let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let d = Divisor::new(w, vec![DivPoint::new(c64(0.25, 0.5), -2)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(v["window"], serde_json::json!([0.0, 1.0, 0.0, 1.0]));
        assert_eq!(v["points"][0], serde_json::json!({"re": 0.25, "im": 0.5, "mult": -2}));
        assert_eq!(Divisor::from_json(&d.to_json()).unwrap(), d);
        assert!(Divisor::from_json(r#"{"window":[0,1,0,1],"points":[{"re":2,"im":0,"mult":1}]}"#).is_err());
        let pp = PrincipalParts::new(vec![PoleEntry::new(c64(1.0, 0.0), &[c64(1.0, 2.0)])]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&pp).unwrap();
        assert_eq!(v["entries"][0]["coeffs"], serde_json::json!([[1.0, 2.0]]));
    }
}
