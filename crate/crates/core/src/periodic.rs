//! Periodic objects: lattice Green's functions with a partial lattice of
//! translations, 1-periodic entire and meromorphic functions with their
//! growth profiles, and small numeric demonstrations around periodic
//! subharmonic functions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::sphere_mean;
use crate::plane::{c64, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodicError {
    #[error("point lies on the lattice")]
    OnLattice,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("truncation radius {radius} is below {needed}")]
    TruncationTooSmall { radius: f64, needed: f64 },
    #[error("function is constant")]
    ConstantInput,
    #[error("sublevel set reaches the edge of the probed range at s = {0}")]
    RangeInsufficient(f64),
    #[error("zero and pole of factor {index} are {distance} apart, below {min}")]
    PolesTooClose { index: i64, distance: f64, min: f64 },
}

/// Surface area of the unit sphere in R^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    match d {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => {
            let h = d as f64 / 2.0;
            2.0 * PI.powf(h) / gamma_half(d)
        }
    }
}

/// Gamma(d / 2) for integer d >= 1.
fn gamma_half(d: usize) -> f64 {
    if d % 2 == 0 {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Volume of the unit ball in R^p.
fn unit_ball_volume(p: usize) -> f64 {
    match p {
        0 => 1.0,
        _ => unit_sphere_area(p) / p as f64,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    /// Multipole estimate of the omitted pairs plus a lattice point count.
    Rigorous,
}

/// Green's function of -Laplace on R^d periodized over a lattice of rank
/// at most d - 2, as a truncated, pair-symmetrized lattice sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeGreen {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    /// Lattice points with |y| <= radius enter the sum.
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    pub tail_bound: f64,
    pub tail: TailKind,
    pub terms: usize,
}

impl LatticeGreen {
    pub fn new(dim: usize, generators: Vec<Vec<f64>>, radius: f64) -> Result<Self, PeriodicError> {
        if !(3..=4).contains(&dim) {
            return Err(PeriodicError::InvalidLattice(format!("dimension {dim} outside 3..=4")));
        }
        if generators.len() > dim - 2 {
            return Err(PeriodicError::InvalidLattice(format!("rank {} exceeds d - 2", generators.len())));
        }
        if generators.iter().any(|g| g.len() != dim || g.iter().any(|v| !v.is_finite())) {
            return Err(PeriodicError::InvalidLattice("generator of wrong dimension".into()));
        }
        let g = LatticeGreen { dim, generators, radius };
        let gram = g.gram();
        if !generators_independent(&gram) {
            return Err(PeriodicError::InvalidLattice("generators are dependent".into()));
        }
        let needed = 10.0 * g.covering_radius();
        if !(radius >= needed) {
            return Err(PeriodicError::TruncationTooSmall { radius, needed });
        }
        Ok(g)
    }

    /// Z e_1 in R^3.
    pub fn z_e1(radius: f64) -> Result<Self, PeriodicError> {
        LatticeGreen::new(3, vec![vec![1.0, 0.0, 0.0]], radius)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self, PeriodicError> {
        LatticeGreen::new(self.dim, self.generators.clone(), radius)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    fn gram(&self) -> DMatrix<f64> {
        let p = self.rank();
        DMatrix::from_fn(p, p, |i, j| dot(&self.generators[i], &self.generators[j]))
    }

    fn covolume(&self) -> f64 {
        if self.rank() == 0 {
            1.0
        } else {
            self.gram().determinant().sqrt()
        }
    }

    /// Half the sum of the generator lengths, an upper bound on the
    /// covering radius of the lattice within its span.
    pub fn covering_radius(&self) -> f64 {
        0.5 * self.cell_diameter()
    }

    fn cell_diameter(&self) -> f64 {
        self.generators.iter().map(|g| norm(g)).sum()
    }

    /// Lattice points y with |y| <= R, one of each pair {y, -y}, y != 0.
    pub fn half_points(&self) -> Vec<Vec<f64>> {
        let p = self.rank();
        if p == 0 {
            return vec![];
        }
        let eig = SymmetricEigen::new(self.gram());
        let smin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        let bound = (self.radius / smin).ceil() as i64;
        let mut out = Vec::new();
        let mut coeffs = vec![-bound; p];
        loop {
            // Keep the lexicographically positive representative of each pair.
            let positive = coeffs.iter().find(|c| **c != 0).is_some_and(|c| *c > 0);
            if positive {
                let y = self.combine(&coeffs);
                if norm(&y) <= self.radius {
                    out.push(y);
                }
            }
            let mut i = 0;
            loop {
                if i == p {
                    return out;
                }
                coeffs[i] += 1;
                if coeffs[i] <= bound {
                    break;
                }
                coeffs[i] = -bound;
                i += 1;
            }
        }
    }

    fn combine(&self, n: &[i64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (k, g) in n.iter().zip(&self.generators) {
            for (yi, gi) in y.iter_mut().zip(g) {
                *yi += *k as f64 * gi;
            }
        }
        y
    }

    /// Distance from x to the nearest lattice point.
    pub fn lattice_distance(&self, x: &[f64]) -> f64 {
        let p = self.rank();
        if p == 0 {
            return norm(x);
        }
        let gram = self.gram();
        let rhs = nalgebra::DVector::from_fn(p, |i, _| dot(&self.generators[i], x));
        let coef = gram.lu().solve(&rhs).expect("independent generators");
        // Search the integer neighbours of the projection.
        let base: Vec<i64> = coef.iter().map(|c| c.floor() as i64).collect();
        let mut best = f64::INFINITY;
        for mask in 0..(1usize << p) {
            let n: Vec<i64> = base.iter().enumerate().map(|(i, b)| b + ((mask >> i) & 1) as i64).collect();
            let y = self.combine(&n);
            best = best.min(norm(&sub(x, &y)));
        }
        best
    }

    fn kernel(&self, r: f64) -> f64 {
        r.powi(-(self.dim as i32 - 2))
    }

    fn normalization(&self) -> f64 {
        (self.dim as f64 - 2.0) * unit_sphere_area(self.dim)
    }

    /// |x|^{2-d} plus the truncated sum over pairs, unnormalized.
    fn series(&self, x: &[f64], pts: &[Vec<f64>]) -> f64 {
        // Shells of unit width summed in parallel, reduced in shell order.
        let mut shells: Vec<(usize, f64)> = pts
            .par_iter()
            .map(|y| {
                let ny = norm(y);
                let xm: Vec<f64> = sub(x, y);
                let xp: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                let term = (self.kernel(norm(&xm)) - self.kernel(ny)) + (self.kernel(norm(&xp)) - self.kernel(ny));
                (ny.floor() as usize, term)
            })
            .collect();
        shells.sort_by(|a, b| a.0.cmp(&b.0));
        let mut acc = self.kernel(norm(x));
        let mut i = 0;
        while i < shells.len() {
            let s = shells[i].0;
            let mut shell = 0.0;
            while i < shells.len() && shells[i].0 == s {
                shell += shells[i].1;
                i += 1;
            }
            acc += shell;
        }
        acc
    }

    /// Bound on the omitted pairs beyond the truncation radius.
    pub fn tail_bound(&self, x: &[f64]) -> f64 {
        let p = self.rank();
        if p == 0 {
            return 0.0;
        }
        let d = self.dim as f64;
        let r = self.radius;
        let nx = norm(x);
        let rho = nx / r;
        if rho >= 0.5 {
            return f64::INFINITY;
        }
        // Pair term bound A |x|^2 / |y|^d from the even Gegenbauer terms.
        let a = match self.dim {
            3 => 2.0 / (1.0 - rho * rho),
            _ => 6.0 / (1.0 - rho * rho).powi(2),
        };
        let pf = p as f64;
        let shell = d * unit_ball_volume(p) * (1.0 + self.cell_diameter() / r).powf(pf) / ((d - pf) * self.covolume());
        0.5 * a * nx * nx * shell * r.powf(pf - d) / self.normalization()
    }

    /// G(x) with its tail bound.
    pub fn eval(&self, x: &[f64]) -> Result<GreenValue, PeriodicError> {
        let pts = self.half_points();
        self.eval_with(x, &pts)
    }

    fn eval_with(&self, x: &[f64], pts: &[Vec<f64>]) -> Result<GreenValue, PeriodicError> {
        if self.lattice_distance(x) < 1e-12 {
            return Err(PeriodicError::OnLattice);
        }
        Ok(GreenValue {
            value: self.series(x, pts) / self.normalization(),
            tail_bound: self.tail_bound(x),
            tail: TailKind::Rigorous,
            terms: pts.len(),
        })
    }

    /// Values at many points sharing one lattice enumeration.
    pub fn eval_many(&self, xs: &[Vec<f64>]) -> Vec<Result<GreenValue, PeriodicError>> {
        let pts = self.half_points();
        xs.iter().map(|x| self.eval_with(x, &pts)).collect()
    }
}

fn generators_independent(gram: &DMatrix<f64>) -> bool {
    if gram.nrows() == 0 {
        return true;
    }
    let scale = gram.diagonal().iter().copied().fold(0.0, f64::max);
    gram.clone().determinant() > 1e-12 * scale.powi(gram.nrows() as i32)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub radius: f64,
    pub shift: Vec<f64>,
    pub deviation: f64,
    /// Sum of the tail bounds at x and x + a.
    pub tail_bound: f64,
}

/// |G(x + a) - G(x)| with both values at the same truncation.
pub fn green_periodicity_check(g: &LatticeGreen, x: &[f64], a: &[f64]) -> Result<PeriodicityReport, PeriodicError> {
    let xa: Vec<f64> = x.iter().zip(a).map(|(u, v)| u + v).collect();
    let pts = g.half_points();
    let v0 = g.eval_with(x, &pts)?;
    let v1 = g.eval_with(&xa, &pts)?;
    Ok(PeriodicityReport {
        radius: g.radius,
        shift: a.to_vec(),
        deviation: (v1.value - v0.value).abs(),
        tail_bound: v0.tail_bound + v1.tail_bound,
    })
}

/// Sphere-mean normalization check: for G = |x|^{2-d}/((d-2)|S^{d-1}|) + H
/// with H harmonic near 0, mean(r1) - mean(r2) equals the same difference for
/// the free kernel. Returns the relative defect.
pub fn green_normalization_defect(g: &LatticeGreen, r1: f64, r2: f64) -> f64 {
    let pts = g.half_points();
    let c = vec![0.0; g.dim];
    let f = |x: &[f64]| g.eval_with(x, &pts).map(|v| v.value).unwrap_or(f64::NAN);
    let m1 = sphere_mean(g.dim, f, &c, r1);
    let m2 = sphere_mean(g.dim, f, &c, r2);
    let free = (g.kernel(r1) - g.kernel(r2)) / g.normalization();
    ((m1 - m2) - free).abs() / free.abs()
}

/// Smooth radial bump exp(1 - 1/(1 - |y|^2/rho^2)), equal to 1 at its center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, y: &[f64]) -> f64 {
        let s = dot(y, y) / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    pub fn laplacian(&self, y: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        let s = dot(y, y) / r2;
        if s >= 1.0 {
            return 0.0;
        }
        let q = (1.0 - 1.0 / (1.0 - s)).exp();
        let w = 1.0 - s;
        let q1 = -q / (w * w);
        let q2 = q / w.powi(4) - 2.0 * q / w.powi(3);
        q2 * 4.0 * dot(y, y) / (r2 * r2) + q1 * 2.0 * y.len() as f64 / r2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationRow {
    pub h: f64,
    pub probe: Vec<f64>,
    pub exact: f64,
    pub computed: f64,
    pub residual: f64,
}

/// Midpoint quadrature of -int_{D0} G(x - y) Laplace(phi)(y) dy for the
/// periodized bump phi, compared with phi(x).
pub fn periodic_representation_check(
    g: &LatticeGreen,
    bump: Bump,
    probe: &[f64],
    h: f64,
) -> Result<RepresentationRow, PeriodicError> {
    let n = (2.0 * bump.radius / h).round() as usize;
    let pts = g.half_points();
    let d = g.dim;
    let node = |i: usize| -bump.radius + (i as f64 + 0.5) * h;
    let total = n.pow(d as u32);
    let partial: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut y = vec![0.0; d];
            let mut k = idx;
            for yi in y.iter_mut() {
                *yi = node(k % n);
                k /= n;
            }
            let lap = bump.laplacian(&y);
            if lap == 0.0 {
                return Ok(0.0);
            }
            let xy = sub(probe, &y);
            Ok(g.eval_with(&xy, &pts)?.value * lap)
        })
        .collect::<Result<Vec<_>, PeriodicError>>()?;
    let computed = -partial.iter().sum::<f64>() * h.powi(d as i32);
    let exact = bump.value(probe);
    Ok(RepresentationRow { h, probe: probe.to_vec(), exact, computed, residual: (computed - exact).abs() })
}

/// A 1-periodic entire function given as a finite Fourier series
/// sum c_n e^{2 pi i n z}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEntire {
    pub terms: Vec<(i32, C64)>,
    /// Tolerance for the period certificate.
    pub period_tol: f64,
}

impl PeriodicEntire {
    pub fn new(terms: Vec<(i32, C64)>) -> Self {
        PeriodicEntire { terms, period_tol: 1e-12 }
    }

    pub fn exp_2pi_i() -> Self {
        PeriodicEntire::new(vec![(1, c64(1.0, 0.0))])
    }

    pub fn sin_2pi() -> Self {
        PeriodicEntire::new(vec![(1, c64(0.0, -0.5)), (-1, c64(0.0, 0.5))])
    }

    pub fn constant(c: C64) -> Self {
        PeriodicEntire::new(vec![(0, c)])
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|(n, c)| c * (c64(0.0, 2.0 * PI * *n as f64) * z).exp()).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(n, c)| *n == 0 || c.norm() == 0.0)
    }

    /// max |f(z + 1) - f(z)| over sample points.
    pub fn period_defect(&self) -> f64 {
        (0..16)
            .map(|k| {
                let z = c64(0.37 * k as f64 - 2.0, 0.21 * k as f64 - 1.5);
                (self.eval(z + 1.0) - self.eval(z)).norm() / (1.0 + self.eval(z).norm())
            })
            .fold(0.0, f64::max)
    }

    /// M_f(s) = max over t in [0, 1) of |f(t + i s)|.
    pub fn max_modulus(&self, s: f64) -> f64 {
        let n = 256;
        let f = |t: f64| self.eval(c64(t, s)).norm();
        let (mut bt, mut bv) = (0.0, f64::NEG_INFINITY);
        for k in 0..n {
            let t = k as f64 / n as f64;
            let v = f(t);
            if v > bv {
                bt = t;
                bv = v;
            }
        }
        // Golden-section refinement around the best sample.
        let (mut a, mut b) = (bt - 1.0 / n as f64, bt + 1.0 / n as f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..40 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        bv.max(f(0.5 * (a + b)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Smallest,
    Largest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthProbe {
    pub s: Vec<f64>,
    pub m: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub k: u64,
    pub s0: f64,
    pub side: Side,
    /// M_f exceeds 10 M_f(s0) at one end of the probe range.
    pub grows: bool,
    pub probe: GrowthProbe,
}

/// Probe range and resolution for `canonical_anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorRange {
    pub s_min: f64,
    pub s_max: f64,
    pub samples: usize,
}

impl Default for AnchorRange {
    fn default() -> Self {
        AnchorRange { s_min: -4.0, s_max: 4.0, samples: 801 }
    }
}

/// Smallest integer k >= 1 with {s : M_f(s) <= k} nonempty, anchored at the
/// smallest element of that set, or its largest when it is unbounded below.
pub fn canonical_anchor(f: &PeriodicEntire, range: AnchorRange) -> Result<Anchor, PeriodicError> {
    if f.is_constant() {
        return Err(PeriodicError::ConstantInput);
    }
    let n = range.samples.max(3);
    let s: Vec<f64> = (0..n).map(|i| range.s_min + (range.s_max - range.s_min) * i as f64 / (n - 1) as f64).collect();
    let m: Vec<f64> = s.par_iter().map(|&si| f.max_modulus(si)).collect();
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(0.0, f64::max);
    if hi - lo <= 1e-12 * hi.max(1.0) {
        return Err(PeriodicError::ConstantInput);
    }
    let tol = 1e-12;
    let k = (lo * (1.0 - tol)).ceil().max(1.0);
    let within = |v: f64| v <= k * (1.0 + tol);
    let at_level = |v: f64| (v - k).abs() <= k * tol;
    let inside: Vec<usize> = (0..n).filter(|&i| within(m[i])).collect();
    let (first, last) = (inside[0], *inside.last().expect("nonempty"));
    let crossing = |i: usize, j: usize| {
        let (mut a, mut b) = (s[i], s[j]);
        for _ in 0..60 {
            let c = 0.5 * (a + b);
            if within(f.max_modulus(c)) == within(m[i]) {
                a = c;
            } else {
                b = c;
            }
        }
        0.5 * (a + b)
    };
    let (side, s0) = if first > 0 {
        (Side::Smallest, if at_level(m[first]) { s[first] } else { crossing(first - 1, first) })
    } else if last + 1 < n {
        (Side::Largest, if at_level(m[last]) { s[last] } else { crossing(last + 1, last) })
    } else {
        return Err(PeriodicError::RangeInsufficient(s[0]));
    };
    let m0 = f.max_modulus(s0);
    let grows = m[0] > 10.0 * m0 || m[n - 1] > 10.0 * m0;
    Ok(Anchor { k: k as u64, s0, side, grows, probe: GrowthProbe { s, m } })
}

/// S_{a,b}(z) = e^{pi i (a - b)} sin pi(z - a) / sin pi(z - b).
pub fn yosida_factor(a: f64, b: f64, z: C64) -> C64 {
    c64(0.0, PI * (a - b)).exp() * (PI * (z - a)).sin() / (PI * (z - b)).sin()
}

/// Limit of S_{a,b}(x + iy) as y -> +infinity; the limit below is 1.
pub fn yosida_upper_limit(a: f64, b: f64) -> C64 {
    c64(0.0, 2.0 * PI * (a - b)).exp()
}

/// Partial product over rows |k| <= N of S_{a_k,b_k}(z - ik). Factors on
/// rows below the origin are divided by their upper limit, so every factor
/// tends to 1 away from its row on the side that matters and the partial
/// products converge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YosidaProduct {
    /// (k, a_k, b_k).
    pub rows: Vec<(i64, f64, f64)>,
}

pub fn yosida_product(pairs: &[(i64, f64, f64)], separation: f64) -> Result<YosidaProduct, PeriodicError> {
    for &(k, a, b) in pairs {
        let dist = (a - b).abs();
        if dist < separation {
            return Err(PeriodicError::PolesTooClose { index: k, distance: dist, min: separation });
        }
    }
    let mut rows = pairs.to_vec();
    rows.sort_by_key(|r| r.0);
    Ok(YosidaProduct { rows })
}

impl YosidaProduct {
    /// Seeded pairs with a_k, b_k in [0, 1) at least `separation` apart.
    pub fn seeded(n: i64, separation: f64, seed: u64) -> Result<Self, PeriodicError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(i64, f64, f64)> = (-n..=n)
            .map(|k| {
                let a: f64 = rng.random_range(0.0..1.0);
                let d: f64 = rng.random_range(separation..(1.0 - separation));
                (k, a, (a + d).fract())
            })
            .collect();
        yosida_product(&pairs, separation)
    }

    pub fn n(&self) -> i64 {
        self.rows.iter().map(|r| r.0.abs()).max().unwrap_or(0)
    }

    pub fn truncate(&self, n: i64) -> YosidaProduct {
        YosidaProduct { rows: self.rows.iter().copied().filter(|r| r.0.abs() <= n).collect() }
    }

    pub fn factor(&self, row: (i64, f64, f64), z: C64) -> C64 {
        let (k, a, b) = row;
        let v = yosida_factor(a, b, z - c64(0.0, k as f64));
        if k < 0 {
            v / yosida_upper_limit(a, b)
        } else {
            v
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.rows.iter().map(|r| self.factor(*r, z)).product()
    }

    /// Sum of log|factor| over the rows.
    pub fn log_abs(&self, z: C64) -> f64 {
        self.rows.iter().map(|r| self.factor(*r, z).norm().ln()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityRow {
    pub row: i64,
    pub sup_abs: f64,
    pub inf_abs: f64,
}

/// Sup and inf of |F| on |Re z| <= 1, |Im z - (j + 1/2)| <= 0.3, between
/// the pole rows.
pub fn yosida_normality_table(f: &YosidaProduct, rows: std::ops::RangeInclusive<i64>) -> Vec<NormalityRow> {
    rows.map(|j| {
        let mut sup = 0.0f64;
        let mut inf = f64::INFINITY;
        for ix in 0..=40 {
            for iy in 0..=12 {
                let z = c64(-1.0 + 2.0 * ix as f64 / 40.0, j as f64 + 0.2 + 0.6 * iy as f64 / 12.0);
                let v = f.eval(z).norm();
                sup = sup.max(v);
                inf = inf.min(v);
            }
        }
        NormalityRow { row: j, sup_abs: sup, inf_abs: inf }
    })
    .collect()
}

/// sup of |log|F_{N+1}/F_N|| on |Re z| <= 1/2, |Im z| <= 1.
pub fn yosida_cauchy_defect(f: &YosidaProduct, n: i64) -> f64 {
    let a = f.truncate(n + 1);
    let b = f.truncate(n);
    let mut worst = 0.0f64;
    for ix in 0..=16 {
        for iy in 0..=16 {
            let z = c64(-0.5 + ix as f64 / 16.0, -1.0 + 2.0 * iy as f64 / 16.0);
            worst = worst.max((a.log_abs(z) - b.log_abs(z)).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub boundary_max: f64,
    pub interior_max: f64,
    /// Largest |d f / d zbar| from centred differences.
    pub dbar_max: f64,
    pub holomorphic: bool,
    pub passed: bool,
}

/// Samples f on the strip s < Im z < t over |Re z| <= half_width: the
/// maximum principle requires the interior max to stay below the boundary
/// bound. The check also requires f to be holomorphic on the grid.
pub fn strip_max_principle_check(
    f: impl Fn(C64) -> C64 + Sync,
    s: f64,
    t: f64,
    half_width: f64,
    bound: Option<f64>,
) -> StripReport {
    let nx = 801;
    let ny = 81;
    let x = |i: usize| -half_width + 2.0 * half_width * i as f64 / (nx - 1) as f64;
    let boundary_max = (0..nx).map(|i| f(c64(x(i), s)).norm().max(f(c64(x(i), t)).norm())).fold(0.0, f64::max);
    let m = bound.unwrap_or(boundary_max);
    let hstep = 1e-5;
    let (interior_max, dbar_max) = (1..ny - 1)
        .into_par_iter()
        .map(|j| {
            let y = s + (t - s) * j as f64 / (ny - 1) as f64;
            let mut im = 0.0f64;
            let mut db = 0.0f64;
            for i in 0..nx {
                let z = c64(x(i), y);
                im = im.max(f(z).norm());
                let fx = (f(z + hstep) - f(z - hstep)) / (2.0 * hstep);
                let fy = (f(z + c64(0.0, hstep)) - f(z - c64(0.0, hstep))) / (2.0 * hstep);
                db = db.max((0.5 * (fx + c64(0.0, 1.0) * fy)).norm());
            }
            (im, db)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let holomorphic = dbar_max < 1e-6 * (1.0 + interior_max);
    StripReport {
        boundary_max,
        interior_max,
        dbar_max,
        holomorphic,
        passed: holomorphic && interior_max <= m + 1e-9,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszRow {
    pub t: f64,
    pub count: u64,
    pub ratio: f64,
    /// int_{t_first}^{t} mu(B(0,s))/s^2 ds.
    pub partial_integral: f64,
}

/// Number of points of Z^2 in the closed disk of radius t.
pub fn gauss_circle_count(t: f64) -> u64 {
    let r = t.floor() as i64;
    let t2 = t * t;
    (-r..=r)
        .map(|m| {
            let rem = t2 - (m * m) as f64;
            2 * (rem.sqrt().floor() as u64) + 1
        })
        .sum()
}

/// Growth of the Riesz mass of the Z^2 x {0} invariant measure in R^3 with
/// unit atoms, against t^2, with the partial integrals of mu(B(0,s))/s^2.
/// The count is a step function jumping at square roots of integers, so the
/// integral is summed exactly piece by piece.
pub fn riesz_growth_demo(t_min: f64, t_max: f64, step: f64) -> Vec<RieszRow> {
    let n = ((t_max - t_min) / step).round() as usize;
    let mut rows = Vec::with_capacity(n + 1);
    let mut partial = 0.0;
    let mut prev_t = t_min;
    for i in 0..=n {
        let t = t_min + step * i as f64;
        if i > 0 {
            let mut a = prev_t;
            let first = (prev_t * prev_t).floor() as u64 + 1;
            let last = (t * t).floor() as u64;
            for k in first..=last {
                let b = (k as f64).sqrt();
                if b > a && b <= t {
                    partial += gauss_circle_count(a) as f64 * (1.0 / a - 1.0 / b);
                    a = b;
                }
            }
            partial += gauss_circle_count(a) as f64 * (1.0 / a - 1.0 / t);
        }
        let count = gauss_circle_count(t);
        rows.push(RieszRow { t, count, ratio: count as f64 / (t * t), partial_integral: partial });
        prev_t = t;
    }
    rows
}

/// Trigonometric polynomial on the unit torus in R^d:
/// sum a_k cos(2 pi k.x) + b_k sin(2 pi k.x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub dim: usize,
    pub terms: Vec<(Vec<i32>, f64, f64)>,
}

impl TrigPoly {
    pub fn random(dim: usize, max_freq: i32, terms: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = (0..terms)
            .map(|_| {
                let k = (0..dim).map(|_| rng.random_range(-max_freq..=max_freq)).collect();
                (k, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .collect();
        TrigPoly { dim, terms: t }
    }

    fn phase(k: &[i32], x: &[f64]) -> f64 {
        2.0 * PI * k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, b)| {
                let w = 4.0 * PI * PI * k.iter().map(|v| (v * v) as f64).sum::<f64>();
                let p = Self::phase(k, x);
                -w * (a * p.cos() + b * p.sin())
            })
            .sum()
    }

    pub fn partial(&self, x: &[f64], axis: usize) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, b)| {
                let p = Self::phase(k, x);
                2.0 * PI * k[axis] as f64 * (-a * p.sin() + b * p.cos())
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub volume_integral: f64,
    pub boundary_flux: f64,
    pub residual: f64,
}

/// Integral of the Laplacian over the unit box and the outward flux through
/// its faces, both by periodic trapezoid quadrature.
pub fn full_dim_rigidity_demo(u: &TrigPoly, nodes: usize) -> RigidityReport {
    let d = u.dim;
    let h = 1.0 / nodes as f64;
    let point = |mut idx: usize, dims: usize| {
        let mut x = vec![0.0; dims];
        for xi in x.iter_mut() {
            *xi = (idx % nodes) as f64 * h;
            idx /= nodes;
        }
        x
    };
    let total = nodes.pow(d as u32);
    let volume: f64 = (0..total).map(|i| u.laplacian(&point(i, d))).sum::<f64>() * h.powi(d as i32);
    let face_total = nodes.pow(d as u32 - 1);
    let mut flux = 0.0;
    for axis in 0..d {
        for i in 0..face_total {
            let rest = point(i, d - 1);
            let mut lo = Vec::with_capacity(d);
            lo.extend_from_slice(&rest[..axis]);
            lo.push(0.0);
            lo.extend_from_slice(&rest[axis..]);
            let mut hi = lo.clone();
            hi[axis] = 1.0;
            flux += (u.partial(&hi, axis) - u.partial(&lo, axis)) * h.powi(d as i32 - 1);
        }
    }
    RigidityReport { volume_integral: volume, boundary_flux: flux, residual: volume.abs().max(flux.abs()).max((volume - flux).abs()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
    }

    #[test]
    fn green_basics() {
        let g = LatticeGreen::z_e1(40.0).unwrap();
        assert_eq!(g.half_points().len(), 40);
        assert_eq!(g.eval(&[2.0, 0.0, 0.0]), Err(PeriodicError::OnLattice));
        let x = [0.5, 0.0, 0.0];
        let a = g.eval(&x).unwrap();
        let b = g.with_radius(80.0).unwrap().eval(&x).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound);
        for r in [1e-2, 1e-3] {
            let v = g.eval(&[r, 0.0, 0.0]).unwrap().value;
            assert!((v * 4.0 * PI * r - 1.0).abs() < 10.0 * r);
        }
        assert!(green_normalization_defect(&g, 0.1, 0.2) < 1e-6);
    }

    #[test]
    fn green_periodicity() {
        let x = [0.3, 0.4, 0.2];
        let g40 = LatticeGreen::z_e1(40.0).unwrap();
        let g80 = LatticeGreen::z_e1(80.0).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(green_periodicity_check(&g40, &x, &[0.0; 3]).unwrap().deviation, 0.0);
        let d40 = green_periodicity_check(&g40, &x, &e1).unwrap();
        let d80 = green_periodicity_check(&g80, &x, &e1).unwrap();
        assert!(d40.deviation / d80.deviation >= 1.8);
        let n80 = green_periodicity_check(&g80, &x, &e2).unwrap();
        assert!(n80.deviation > 10.0 * d80.deviation);
    }

    #[test]
    fn representation_center() {
        let g = LatticeGreen::z_e1(40.0).unwrap();
        let bump = Bump { radius: 0.375 };
        let r32 = periodic_representation_check(&g, bump, &[0.0; 3], 1.0 / 32.0).unwrap();
        let r64 = periodic_representation_check(&g, bump, &[0.0; 3], 1.0 / 64.0).unwrap();
        assert!(r32.residual < 5e-3, "{r32:?}");
        assert!(r32.residual / r64.residual > 3.0, "{r32:?} {r64:?}");
    }

    #[test]
    fn anchors() {
        let e = canonical_anchor(&PeriodicEntire::exp_2pi_i(), AnchorRange::default()).unwrap();
        assert_eq!((e.k, e.side), (1, Side::Smallest));
        assert!(e.s0.abs() < 1e-9);
        assert!(e.grows);
        let s = canonical_anchor(&PeriodicEntire::sin_2pi(), AnchorRange::default()).unwrap();
        assert_eq!(s.k, 1);
        assert!(s.s0.abs() < 1e-6);
        let c = canonical_anchor(&PeriodicEntire::constant(c64(5.0, 0.0)), AnchorRange::default());
        assert_eq!(c.unwrap_err(), PeriodicError::ConstantInput);
        let neg = PeriodicEntire::new(vec![(-1, c64(1.0, 0.0))]);
        let a = canonical_anchor(&neg, AnchorRange::default()).unwrap();
        assert_eq!(a.side, Side::Largest);
        assert!(a.s0.abs() < 1e-9);
    }

    #[test]
    fn yosida() {
        let (a, b) = (0.25, 0.75);
        for x in [0.0, 0.3, 0.77] {
            let z = c64(x, -3.0);
            assert!((yosida_factor(a, b, z) - 1.0).norm() < 10.0 * (-6.0 * PI).exp());
            let z = c64(x, 3.0);
            assert!((yosida_factor(a, b, z) - yosida_upper_limit(a, b)).norm() < 10.0 * (-6.0 * PI).exp());
            assert!((yosida_factor(a, b, z + 1.0) - yosida_factor(a, b, z)).norm() < 1e-12);
        }
        let f = YosidaProduct::seeded(6, 0.2, 3).unwrap();
        let z = c64(0.123, 0.456);
        assert!((f.eval(z + 1.0) - f.eval(z)).norm() < 1e-10 * f.eval(z).norm());
        for n in 2..5 {
            assert!(yosida_cauchy_defect(&f, n) < 10.0 * (-2.0 * PI * n as f64).exp());
        }
        assert!(yosida_product(&[(0, 0.1, 0.15)], 0.2).is_err());
    }

    #[test]
    fn strip() {
        let r = strip_max_principle_check(|z| (c64(0.0, 1.0) * z).exp(), -1.0, 1.0, 4.0, None);
        assert!(r.passed && (r.boundary_max - 1f64.exp()).abs() < 1e-12);
        let r = strip_max_principle_check(|z| 1.0 / (z - c64(0.0, 5.0)), -1.0, 1.0, 4.0, None);
        assert!(r.passed && (r.boundary_max - 0.25).abs() < 1e-12);
        let r = strip_max_principle_check(|z| c64(z.im, 0.0), -1.0, 1.0, 4.0, None);
        assert!(!r.passed);
    }

    #[test]
    fn riesz() {
        assert_eq!(gauss_circle_count(10.0), 317);
        assert_eq!(gauss_circle_count(20.0), 1257);
        let rows = riesz_growth_demo(5.0, 40.0, 0.5);
        let last = rows.last().unwrap();
        assert!(last.partial_integral >= 105.0, "{}", last.partial_integral);
        let t20 = rows.iter().find(|r| r.t == 20.0).unwrap();
        assert!((t20.ratio / PI - 1.0).abs() < 0.05);
    }

    #[test]
    fn rigidity() {
        let u = TrigPoly::random(3, 3, 8, 7);
        assert!(full_dim_rigidity_demo(&u, 16).residual < 1e-8);
    }
}
