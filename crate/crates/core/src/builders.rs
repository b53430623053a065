//! Classical right inverses: Weierstrass products, Mittag-Leffler sums,
//! the Cauchy transform and Newtonian potentials.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::{split_signed, DivPoint, Divisor, PrincipalParts};
use crate::plane::{c64, SampledFunction, Window, C64};
use crate::runge::ArnoldiPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("divisor has negative multiplicities")]
    NotNonnegative,
    #[error("evaluation point {0:?} coincides with an atom")]
    EvaluationOnAtom(Vec<f64>),
    #[error("unsupported evaluation point {0}")]
    UnsupportedZeta(C64),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Gauss-Legendre nodes and weights mapped to [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"));
    let (m, s) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs().iter().map(|(x, w)| (m + s * x, s * w)).collect()
}

/// Entire function exp(c + sum p_k(z)) * prod (z - a)^m, evaluated in log
/// space so that products over hundreds of zeros neither overflow nor
/// underflow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntireApprox {
    pub zeros: Arc<Vec<DivPoint>>,
    pub log_const: C64,
    pub corrections: Vec<ArnoldiPoly>,
    pub window: Window,
}

impl EntireApprox {
    /// sum m log(z - a) with principal branches; -inf at a zero.
    pub fn log_product(&self, z: C64) -> C64 {
        self.zeros.iter().map(|p| p.mult as f64 * (z - p.z()).ln()).sum()
    }

    /// Constant plus corrections: the zero-free part in log form.
    pub fn log_gauge(&self, z: C64) -> C64 {
        self.log_const + self.corrections.iter().map(|p| p.eval(z)).sum::<C64>()
    }

    pub fn log_value(&self, z: C64) -> C64 {
        self.log_gauge(z) + self.log_product(z)
    }

    pub fn value(&self, z: C64) -> C64 {
        self.log_value(z).exp()
    }

    /// f'/f.
    pub fn log_derivative(&self, z: C64) -> C64 {
        let zs: C64 = self.zeros.iter().map(|p| p.mult as f64 / (z - p.z())).sum();
        zs + self.corrections.iter().map(|p| p.eval_with_derivative(z).1).sum::<C64>()
    }

    /// Derivative of the zero-free part's logarithm.
    pub fn gauge_derivative(&self, z: C64) -> C64 {
        self.corrections.iter().map(|p| p.eval_with_derivative(z).1).sum()
    }

    /// log(self / other) when both carry the same zero list: the zero
    /// factors cancel exactly.
    pub fn log_ratio(&self, other: &EntireApprox, z: C64) -> C64 {
        if Arc::ptr_eq(&self.zeros, &other.zeros) || self.zeros == other.zeros {
            self.log_gauge(z) - other.log_gauge(z)
        } else {
            self.log_value(z) - other.log_value(z)
        }
    }

    /// Same zeros times exp(c + p).
    pub fn times_exp(&self, c: C64, p: Option<ArnoldiPoly>) -> EntireApprox {
        let mut e = self.clone();
        e.log_const += c;
        e.corrections.extend(p);
        e
    }

    pub fn to_sampled(&self) -> SampledFunction {
        let a = self.clone();
        let b = self.clone();
        SampledFunction::from_log(move |z| a.log_value(z)).with_derivative(move |z| b.log_derivative(z)).with_window(self.window)
    }
}

/// Genus-zero product prod (1 - z/a)^m, with z^m for a zero at the origin.
pub fn weierstrass(d: &Divisor) -> Result<EntireApprox, BuildError> {
    if !d.is_nonnegative() {
        return Err(BuildError::NotNonnegative);
    }
    // (1 - z/a) = (z - a) * (-1/a)
    let log_const = d
        .points()
        .iter()
        .filter(|p| p.z() != c64(0.0, 0.0))
        .map(|p| p.mult as f64 * (-1.0 / p.z()).ln())
        .sum();
    Ok(EntireApprox { zeros: Arc::new(d.points().to_vec()), log_const, corrections: vec![], window: d.window() })
}

/// W(d+) / W(d-) as a log-represented function with poles recorded.
pub fn meromorphic_from_signed(d: &Divisor) -> SampledFunction {
    let (pos, neg) = split_signed(d);
    let num = weierstrass(&pos).expect("nonnegative part");
    let den = weierstrass(&neg).expect("nonnegative part");
    let poles = neg.locations();
    let (n1, d1) = (num.clone(), den.clone());
    SampledFunction::from_log(move |z| n1.log_value(z) - d1.log_value(z))
        .with_derivative(move |z| num.log_derivative(z) - den.log_derivative(z))
        .with_singularities(poles)
        .with_window(d.window())
}

/// The finite sum of principal parts.
pub fn mittag_leffler(pp: &PrincipalParts) -> SampledFunction {
    let a = pp.clone();
    let b = pp.clone();
    SampledFunction::new(move |z| a.entries.iter().map(|e| e.eval(z)).sum())
        .with_derivative(move |z| b.entries.iter().map(|e| e.eval_derivative(z)).sum())
        .with_singularities(pp.poles())
}

/// Complex samples on the nodes (xmin + i h, ymin + j h), row-major in j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub window: Window,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn from_fn(window: Window, h: f64, f: impl Fn(C64) -> C64 + Sync) -> Result<Self, BuildError> {
        if !(h > 0.0) {
            return Err(BuildError::InvalidGrid("spacing must be positive".into()));
        }
        let nx = (window.width() / h).round() as usize + 1;
        let ny = (window.height() / h).round() as usize + 1;
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|k| f(c64(window.xmin + (k % nx) as f64 * h, window.ymin + (k / nx) as f64 * h)))
            .collect();
        Ok(GridFunction { window, h, nx, ny, values })
    }

    pub fn node(&self, i: usize, j: usize) -> C64 {
        c64(self.window.xmin + i as f64 * self.h, self.window.ymin + j as f64 * self.h)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[j * self.nx + i]
    }

    fn get_or_zero(&self, i: i64, j: i64) -> C64 {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            c64(0.0, 0.0)
        } else {
            self.get(i as usize, j as usize)
        }
    }

    /// Bicubic (4x4 Lagrange) interpolation; zero outside the grid.
    pub fn interpolate(&self, z: C64) -> C64 {
        let u = (z.re - self.window.xmin) / self.h;
        let v = (z.im - self.window.ymin) / self.h;
        let (i0, j0) = (u.floor() as i64, v.floor() as i64);
        let (s, t) = (u - i0 as f64, v - j0 as f64);
        let w = |x: f64| {
            [
                -x * (x - 1.0) * (x - 2.0) / 6.0,
                (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0,
                -(x + 1.0) * x * (x - 2.0) / 2.0,
                (x + 1.0) * x * (x - 1.0) / 6.0,
            ]
        };
        let (wx, wy) = (w(s), w(t));
        let mut acc = c64(0.0, 0.0);
        for (b, wyb) in wy.iter().enumerate() {
            for (a, wxa) in wx.iter().enumerate() {
                acc += wxa * wyb * self.get_or_zero(i0 - 1 + a as i64, j0 - 1 + b as i64);
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Area of the node cells where the function is nonzero.
    pub fn support_area(&self) -> f64 {
        self.values.iter().filter(|v| v.norm() > 0.0).count() as f64 * self.h * self.h
    }

    /// Bounding window of the nonzero nodes.
    pub fn support_bbox(&self) -> Option<Window> {
        let mut b: Option<Window> = None;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.get(i, j).norm() > 0.0 {
                    let z = self.node(i, j);
                    b = Some(match b {
                        None => Window { xmin: z.re, xmax: z.re, ymin: z.im, ymax: z.im },
                        Some(w) => Window {
                            xmin: w.xmin.min(z.re),
                            xmax: w.xmax.max(z.re),
                            ymin: w.ymin.min(z.im),
                            ymax: w.ymax.max(z.im),
                        },
                    });
                }
            }
        }
        b
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Smooth cutoff: 1 on [0, 1/2], 0 from 1 on, infinitely differentiable.
fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * (1.0 - t);
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// Number of angular sectors in the singular-cell polar rule.
pub const POLAR_SECTORS: usize = 16;

/// Radius of the singular cell in grid spacings.
const SINGULAR_CELLS: f64 = 12.0;

/// Integral of f(z) / (z - zeta) against area measure. A smooth cutoff
/// around zeta splits it into a regular tensor-grid part and a singular
/// part done in polar coordinates, where the kernel's singularity cancels
/// against the Jacobian.
pub fn area_kernel_integral(f: &GridFunction, zeta: C64) -> Result<C64, BuildError> {
    if !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(BuildError::UnsupportedZeta(zeta));
    }
    let h = f.h;
    let rho = SINGULAR_CELLS * h;
    let mut regular = c64(0.0, 0.0);
    for j in 0..f.ny {
        let mut row = c64(0.0, 0.0);
        for i in 0..f.nx {
            let v = f.get(i, j);
            if v == c64(0.0, 0.0) {
                continue;
            }
            let dz = f.node(i, j) - zeta;
            let r = dz.norm();
            let w = 1.0 - cutoff(r / rho);
            if w > 0.0 {
                row += v * w / dz;
            }
        }
        regular += row;
    }
    regular *= h * h;
    let radial: Vec<(f64, f64)> =
        gauss_legendre(12, 0.0, 0.5 * rho).into_iter().chain(gauss_legendre(12, 0.5 * rho, rho)).collect();
    let angular: Vec<(f64, f64)> = (0..POLAR_SECTORS)
        .flat_map(|k| {
            let a = 2.0 * PI * k as f64 / POLAR_SECTORS as f64;
            gauss_legendre(2, a, a + 2.0 * PI / POLAR_SECTORS as f64)
        })
        .collect();
    let mut singular = c64(0.0, 0.0);
    for &(th, wt) in &angular {
        let e = C64::from_polar(1.0, th);
        let mut acc = c64(0.0, 0.0);
        for &(r, wr) in &radial {
            acc += wr * cutoff(r / rho) * f.interpolate(zeta + r * e);
        }
        singular += wt * acc * e.conj();
    }
    Ok(regular + singular)
}

/// (1 / 2 pi i) * integral f(z) / (z - zeta) dz ^ dzbar, a right inverse
/// of the d-bar operator: with dz ^ dzbar = -2i dA it equals
/// -(1/pi) * integral f / (z - zeta) dA.
pub fn cauchy_transform(f: &GridFunction, zetas: &[C64]) -> Result<Vec<C64>, BuildError> {
    zetas.par_iter().map(|z| area_kernel_integral(f, *z).map(|v| -v / PI)).collect()
}

/// Upper bound area(supp f) * max|f| / (2 pi dist(zeta, supp f)) for the
/// area-measure kernel integral scaled by 1/(2 pi).
pub fn decay_bound(f: &GridFunction, zeta: C64) -> f64 {
    let Some(b) = f.support_bbox() else { return 0.0 };
    let dx = (b.xmin - zeta.re).max(zeta.re - b.xmax).max(0.0);
    let dy = (b.ymin - zeta.im).max(zeta.im - b.ymax).max(0.0);
    let dist = dx.hypot(dy);
    f.support_area() * f.max_abs() / (2.0 * PI * dist)
}

/// Radial C^2 blend: 1 on [0, n], 0 from n + 1 on.
pub fn dbar_blend(r: f64, n: f64) -> f64 {
    let t = (r - n).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// f_n(z) = z on the disk of radius n, zero outside radius n + 1,
/// |f_n| <= n + 1.
pub fn dbar_fn(n: f64) -> impl Fn(C64) -> C64 + Sync {
    move |z: C64| z * dbar_blend(z.norm(), n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarRow {
    pub n: u32,
    /// |integral f_n(z)/z dA| by grid quadrature.
    pub computed: f64,
    /// pi n^2 - 4 pi n - 2 pi.
    pub bound: f64,
    /// Contribution of the disk of radius n (polar quadrature).
    pub core: f64,
    /// |2 pi i * cauchy_transform(f_n)(0)| with dz ^ dzbar = -2i dA.
    pub normalized: f64,
}

/// Lower bound pi n^2 - 4 pi n - 2 pi.
pub fn dbar_bound(n: f64) -> f64 {
    PI * n * n - 4.0 * PI * n - 2.0 * PI
}

/// Integral of f_n(z)/z over the disk of radius n in polar coordinates.
pub fn dbar_core(n: f64) -> f64 {
    let f = dbar_fn(n);
    let mut acc = c64(0.0, 0.0);
    let m = 64;
    for k in 0..m {
        let e = C64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / m as f64);
        for (r, w) in gauss_legendre(16, 0.0, n) {
            let z = r * e;
            acc += w * r * f(z) / z;
        }
    }
    (acc * (2.0 * PI / m as f64)).norm()
}

/// Table over n of the transform at the origin against the lower bound.
pub fn dbar_counterexample(ns: &[u32], h: f64) -> Result<Vec<DbarRow>, BuildError> {
    ns.iter()
        .map(|&n| {
            let nf = n as f64;
            let half = nf + 1.5;
            let g = GridFunction::from_fn(Window::square(half), h, dbar_fn(nf))?;
            let v = area_kernel_integral(&g, c64(0.0, 0.0))?;
            Ok(DbarRow {
                n,
                computed: v.norm(),
                bound: dbar_bound(nf),
                core: dbar_core(nf),
                normalized: 2.0 * v.norm(),
            })
        })
        .collect()
}

/// Max over probes of |dbar u - f| where u is the transform of `f` sampled
/// at spacing `h` on `window` and dbar is a central difference of step `h`.
pub fn dbar_residual(
    f: impl Fn(C64) -> C64 + Sync,
    window: Window,
    h: f64,
    probes: &[C64],
) -> Result<f64, BuildError> {
    let g = GridFunction::from_fn(window, h, &f)?;
    let steps = [c64(h, 0.0), c64(-h, 0.0), c64(0.0, h), c64(0.0, -h)];
    let pts: Vec<C64> = probes.iter().flat_map(|z| steps.iter().map(move |s| z + s)).collect();
    let u = cauchy_transform(&g, &pts)?;
    Ok(probes
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let v = &u[4 * k..4 * k + 4];
            let dx = (v[0] - v[1]) / (2.0 * h);
            let dy = (v[2] - v[3]) / (2.0 * h);
            let dbar = 0.5 * (dx + c64(0.0, 1.0) * dy);
            (dbar - f(*z)).norm()
        })
        .fold(0.0, f64::max))
}

/// Point masses in the plane or in space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub pos: Vec<f64>,
    pub mass: f64,
}

impl Potential {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self, BuildError> {
        if dim != 2 && dim != 3 {
            return Err(BuildError::InvalidPotential(format!("dimension {dim} unsupported")));
        }
        if atoms.iter().any(|a| a.pos.len() != dim || !(a.mass > 0.0)) {
            return Err(BuildError::InvalidPotential("atoms need matching dimension and positive mass".into()));
        }
        Ok(Potential { dim, atoms })
    }

    /// Unit atoms at the points of a planar divisor (mass = multiplicity).
    pub fn from_divisor(d: &Divisor) -> Result<Self, BuildError> {
        Potential::new(2, d.points().iter().map(|p| Atom { pos: vec![p.re, p.im], mass: p.mult as f64 }).collect())
    }

    pub fn translate(&self, w: &[f64]) -> Potential {
        Potential {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { pos: a.pos.iter().zip(w).map(|(x, s)| x + s).collect(), mass: a.mass })
                .collect(),
        }
    }

    /// Kernel value at separation r: (1/2pi) log r or -1/(4 pi r).
    pub fn kernel(&self, r: f64) -> f64 {
        if self.dim == 2 {
            r.ln() / (2.0 * PI)
        } else {
            -1.0 / (4.0 * PI * r)
        }
    }

    /// u(x) without the atom check (infinite on atoms).
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.atoms.iter().map(|a| a.mass * self.kernel(dist(&a.pos, x))).sum()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// u(x) = sum mass * k_d(x - a).
pub fn newtonian_potential(mu: &Potential, xs: &[Vec<f64>]) -> Result<Vec<f64>, BuildError> {
    xs.iter()
        .map(|x| {
            if mu.atoms.iter().any(|a| dist(&a.pos, x) == 0.0) {
                Err(BuildError::EvaluationOnAtom(x.clone()))
            } else {
                Ok(mu.eval_unchecked(x))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValueProbe {
    pub center: Vec<f64>,
    pub radius: f64,
    pub center_value: f64,
    pub mean: f64,
    /// mean - center value; nonnegative for subharmonic functions.
    pub slack: f64,
}

/// Average of `u` over the sphere of radius `r` about `c` (circle in 2D).
pub fn sphere_mean(dim: usize, u: impl Fn(&[f64]) -> f64, c: &[f64], r: f64) -> f64 {
    if dim == 2 {
        let n = 2048;
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                u(&[c[0] + r * t.cos(), c[1] + r * t.sin()])
            })
            .sum::<f64>()
            / n as f64
    } else {
        let nphi = 128;
        let mut acc = 0.0;
        for (ct, w) in gauss_legendre(64, -1.0, 1.0) {
            let st = (1.0 - ct * ct).sqrt();
            let mut ring = 0.0;
            for k in 0..nphi {
                let p = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                ring += u(&[c[0] + r * st * p.cos(), c[1] + r * st * p.sin(), c[2] + r * ct]);
            }
            acc += w * ring / nphi as f64;
        }
        acc / 2.0
    }
}

/// Sub-mean-value probe for the potential at one center and radius.
pub fn sub_mean_value(mu: &Potential, center: &[f64], radius: f64) -> MeanValueProbe {
    let cv = mu.eval_unchecked(center);
    let mean = sphere_mean(mu.dim, |x| mu.eval_unchecked(x), center, radius);
    MeanValueProbe { center: center.to_vec(), radius, center_value: cv, mean, slack: mean - cv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisors::{extract_principal_parts, PoleEntry};
    use crate::plane::{count_zeros, refine_zero, Contour};

    fn div(pts: &[(f64, f64, i32)]) -> Divisor {
        Divisor::new(Window::square(8.0), pts.iter().map(|&(x, y, m)| DivPoint::new(c64(x, y), m)).collect()).unwrap()
    }

    #[test]
    fn weierstrass_examples() {
        let one = weierstrass(&div(&[])).unwrap();
        assert_eq!(one.value(c64(2.0, 3.0)), c64(1.0, 0.0));
        let z = weierstrass(&div(&[(0.0, 0.0, 1)])).unwrap();
        assert!((z.value(c64(0.3, -0.2)) - c64(0.3, -0.2)).norm() < 1e-15);
        let two = weierstrass(&div(&[(1.0, 0.0, 1), (-1.0, 0.0, 1)])).unwrap();
        let z0 = c64(0.4, 0.7);
        assert!((two.value(z0) - (1.0 - z0 * z0)).norm() < 1e-14);
        let f = two.to_sampled();
        for a in [1.0, -1.0] {
            let zc = count_zeros(&f, &Contour::Circle { center: c64(a, 0.0), radius: 0.3 }, 64).unwrap();
            assert_eq!(zc.count, 1);
            let r = refine_zero(&f, c64(a + 0.05, 0.02)).unwrap();
            assert!((r - c64(a, 0.0)).norm() < 1e-12);
        }
        assert!(weierstrass(&div(&[(0.0, 0.0, -1)])).is_err());
    }

    #[test]
    fn signed_examples() {
        let inv = meromorphic_from_signed(&div(&[(0.0, 0.0, -1)]));
        assert!((inv.value(c64(0.5, 0.5)) - 1.0 / c64(0.5, 0.5)).norm() < 1e-14);
        let f = meromorphic_from_signed(&div(&[(0.0, 0.0, 1), (1.0, 0.0, -2)]));
        let z = c64(0.3, 0.9);
        let expect = z / ((z - 1.0) * (z - 1.0));
        assert!((f.value(z) - expect).norm() < 1e-13);
        // z/(z-1)^2 = 1/(z-1) + 1/(z-1)^2
        let pp = extract_principal_parts(&f, &[c64(1.0, 0.0)], 0.25, 4).unwrap();
        let c = pp.entries[0].coefficients();
        assert!((c[0] - c64(1.0, 0.0)).norm() < 1e-10 && (c[1] - c64(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(meromorphic_from_signed(&div(&[])).value(c64(3.0, 1.0)), c64(1.0, 0.0));
    }

    #[test]
    fn mittag_leffler_examples() {
        let one = PrincipalParts::new(vec![PoleEntry::new(c64(0.0, 0.0), &[c64(1.0, 0.0)])]).unwrap();
        let z = c64(0.2, 0.4);
        assert!((mittag_leffler(&one).value(z) - 1.0 / z).norm() < 1e-15);
        let two = PrincipalParts::new(vec![
            PoleEntry::new(c64(1.0, 0.0), &[c64(1.0, 0.0)]),
            PoleEntry::new(c64(-1.0, 0.0), &[c64(1.0, 0.0)]),
        ])
        .unwrap();
        let f = mittag_leffler(&two);
        assert!((f.value(z) - 2.0 * z / (z * z - 1.0)).norm() < 1e-14);
        let back = extract_principal_parts(&f, &two.poles(), 0.5, 4).unwrap();
        assert!(back.max_coeff_difference(&two, 1e-12) < 1e-8);
        let empty = PrincipalParts::new(vec![]).unwrap();
        assert_eq!(mittag_leffler(&empty).value(z), c64(0.0, 0.0));
    }

    fn bump(z: C64) -> C64 {
        let r2 = z.norm_sqr();
        if r2 >= 1.0 {
            c64(0.0, 0.0)
        } else {
            c64((1.0 - r2).powi(4), 0.0)
        }
    }

    /// Exact transform of the radial bump: (1/zeta) * int_0^|zeta| 2 s f(s) ds.
    fn bump_transform(zeta: C64) -> C64 {
        let r2 = zeta.norm_sqr().min(1.0);
        let m = (1.0 - (1.0 - r2).powi(5)) / 5.0;
        c64(m, 0.0) / zeta
    }

    #[test]
    fn transform_matches_radial_formula() {
        let g = GridFunction::from_fn(Window::square(1.5), 1.0 / 64.0, bump).unwrap();
        let zs = [c64(0.3, 0.1), c64(-0.55, 0.2), c64(0.0, 0.0) + c64(1e-3, 0.0), c64(2.0, 1.0), c64(0.7, -0.6)];
        let v = cauchy_transform(&g, &zs).unwrap();
        for (z, got) in zs.iter().zip(v) {
            assert!((got - bump_transform(*z)).norm() < 1e-5, "{z} {got} {}", bump_transform(*z));
        }
        let zero = GridFunction::from_fn(Window::square(1.0), 0.1, |_| c64(0.0, 0.0)).unwrap();
        assert_eq!(cauchy_transform(&zero, &[c64(0.1, 0.0)]).unwrap()[0], c64(0.0, 0.0));
    }

    #[test]
    fn dbar_of_transform_recovers_f() {
        let probes: Vec<C64> = (0..12).map(|k| C64::from_polar(0.08 * k as f64, 2.4 * k as f64)).collect();
        let e1 = dbar_residual(bump, Window::square(1.5), 1.0 / 64.0, &probes).unwrap();
        let e2 = dbar_residual(bump, Window::square(1.5), 1.0 / 128.0, &probes).unwrap();
        eprintln!("{e1:e} {e2:e} {}", e1 / e2);
        assert!(e1 < 1e-3 && e1 / e2 >= 1.8);
    }

    #[test]
    fn dbar_table_rows() {
        let rows = dbar_counterexample(&[5, 10], 1.0 / 16.0).unwrap();
        for r in &rows {
            let n = r.n as f64;
            let exact = PI * n * n + PI * n + 2.0 * PI / 7.0;
            assert!((r.computed - exact).abs() < 1e-6 * exact, "{} {}", r.computed, exact);
            assert!(r.computed >= r.bound);
        }
        assert!((rows[0].bound - 3.0 * PI).abs() < 1e-12);
        assert!((rows[1].bound - 58.0 * PI).abs() < 1e-12);
        assert!((rows[1].core - 100.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn potential_examples() {
        let mu = Potential::new(2, vec![Atom { pos: vec![0.0, 0.0], mass: 1.0 }]).unwrap();
        assert!(newtonian_potential(&mu, &[vec![1.0, 0.0]]).unwrap()[0].abs() < 1e-15);
        assert!(newtonian_potential(&mu, &[vec![0.0, 0.0]]).is_err());
        let p = sub_mean_value(&mu, &[1.0, 0.0], 0.5);
        assert!(p.slack.abs() < 1e-12, "{p:?}");
        let empty = Potential::new(2, vec![]).unwrap();
        assert_eq!(sub_mean_value(&empty, &[1.0, 2.0], 0.3).slack, 0.0);
        let inside = sub_mean_value(&mu, &[0.2, 0.0], 0.5);
        assert!((inside.mean - 0.5f64.ln() / (2.0 * PI)).abs() < 1e-6);
        let mu3 = Potential::new(3, vec![Atom { pos: vec![0.0, 0.0, 0.0], mass: 1.0 }]).unwrap();
        let p3 = sub_mean_value(&mu3, &[0.3, 0.0, 0.0], 0.5);
        assert!((p3.mean + 1.0 / (4.0 * PI * 0.5)).abs() < 1e-3, "{p3:?}");
        assert!(p3.slack > 0.0);
    }

    #[test]
    fn discrete_laplacian_vanishes() {
        let mu = Potential::new(2, vec![Atom { pos: vec![0.0, 0.0], mass: 1.0 }, Atom { pos: vec![1.0, 1.0], mass: 2.0 }]).unwrap();
        let lap = |h: f64| {
            let x = [2.0, -0.5];
            let u = |dx: f64, dy: f64| mu.eval_unchecked(&[x[0] + dx, x[1] + dy]);
            ((u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h)).abs()
        };
        let (a, b) = (lap(0.02), lap(0.01));
        assert!(a / b > 3.5, "{a} {b}");
    }
}
