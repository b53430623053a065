//! Simultaneous polynomial approximation on disjoint compact regions:
//! additive (holomorphic targets), multiplicative (zero-free targets via
//! their logarithms) and harmonic (real targets via real parts).
//!
//! All fits use a polynomial basis orthonormalized on the sample set by
//! Arnoldi iteration, so least squares reduces to projection and degree
//! escalation reuses every previously computed column.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane::{c64, count_zeros, holes, CompactRegion, Contour, Disk, PlaneError, SampledFunction, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RungeError {
    #[error("degree cap {cap} exceeded; best achieved error {best_error:.3e} against eps {eps:.3e}")]
    DegreeCapExceeded { cap: usize, best_error: f64, eps: f64 },
    #[error("target {target} vanishes on its compact near {at}")]
    ZeroInK { target: usize, at: C64 },
    #[error("phase unwrapping on target {target} disagrees by {jump:.3} rad near {at}")]
    BranchInconsistency { target: usize, at: C64, jump: f64 },
    #[error("invalid Runge problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Additive,
    MultiplicativeLog,
    Harmonic,
}

/// A compact together with the function to approximate on it.
#[derive(Clone, Debug)]
pub struct Target {
    pub k: CompactRegion,
    pub h: SampledFunction,
}

#[derive(Clone, Debug)]
pub struct RungeProblem {
    pub targets: Vec<Target>,
    pub eps: f64,
    pub mode: Mode,
}

/// Solver knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungeConfig {
    pub degree_cap: usize,
    /// Boundary sample density (points per unit length).
    pub density: f64,
    /// Minimum number of fit samples per circle.
    pub min_nodes: usize,
    /// Fraction of eps the fit-sample error must reach before validation.
    pub fit_margin: f64,
}

impl Default for RungeConfig {
    fn default() -> Self {
        RungeConfig { degree_cap: 120, density: 12.0, min_nodes: 48, fit_margin: 0.5 }
    }
}

/// Polynomial basis q_0..q_n orthonormal on a sample set, stored through
/// its Hessenberg recurrence in the variable x = (z - center) / scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArnoldiBasis {
    pub center: C64,
    pub scale: f64,
    /// Column k holds h_{0,k} ..= h_{k+1,k}.
    pub hessenberg: Vec<Vec<C64>>,
}

impl ArnoldiBasis {
    pub fn degree(&self) -> usize {
        self.hessenberg.len()
    }

    /// q_0(z) ..= q_deg(z).
    pub fn eval_columns(&self, z: C64, deg: usize) -> Vec<C64> {
        let x = (z - self.center) / self.scale;
        let mut q = Vec::with_capacity(deg + 1);
        q.push(c64(1.0, 0.0));
        for k in 0..deg {
            let h = &self.hessenberg[k];
            let mut v = x * q[k];
            for (j, hj) in h[..=k].iter().enumerate() {
                v -= hj * q[j];
            }
            q.push(v / h[k + 1]);
        }
        q
    }

    /// Values and z-derivatives of q_0 ..= q_deg.
    pub fn eval_columns_with_derivative(&self, z: C64, deg: usize) -> (Vec<C64>, Vec<C64>) {
        let x = (z - self.center) / self.scale;
        let mut q = Vec::with_capacity(deg + 1);
        let mut dq = Vec::with_capacity(deg + 1);
        q.push(c64(1.0, 0.0));
        dq.push(c64(0.0, 0.0));
        for k in 0..deg {
            let h = &self.hessenberg[k];
            let mut v = x * q[k];
            let mut dv = q[k] / self.scale + x * dq[k];
            for j in 0..=k {
                v -= h[j] * q[j];
                dv -= h[j] * dq[j];
            }
            q.push(v / h[k + 1]);
            dq.push(dv / h[k + 1]);
        }
        (q, dq)
    }
}

/// Polynomial expanded in an Arnoldi basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArnoldiPoly {
    pub basis: Arc<ArnoldiBasis>,
    pub coeffs: Vec<C64>,
}

impl ArnoldiPoly {
    pub fn constant(c: C64) -> Self {
        ArnoldiPoly {
            basis: Arc::new(ArnoldiBasis { center: c64(0.0, 0.0), scale: 1.0, hessenberg: vec![] }),
            coeffs: vec![c],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let q = self.basis.eval_columns(z, self.degree());
        q.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let (q, dq) = self.basis.eval_columns_with_derivative(z, self.degree());
        let v = q.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum();
        let d = dq.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum();
        (v, d)
    }

    /// The same polynomial in the translated frame: p_w(z) = p(z - w).
    pub fn translate(&self, w: C64) -> ArnoldiPoly {
        let mut b = (*self.basis).clone();
        b.center += w;
        ArnoldiPoly { basis: Arc::new(b), coeffs: self.coeffs.clone() }
    }
}

/// The approximant carried by a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "poly", rename_all = "kebab-case")]
pub enum Approximant {
    /// g(z) = p(z).
    Poly(ArnoldiPoly),
    /// h(z) = exp(p(z)).
    ExpPoly(ArnoldiPoly),
    /// u(z) = Re p(z).
    Harmonic(ArnoldiPoly),
}

impl Approximant {
    pub fn poly(&self) -> &ArnoldiPoly {
        match self {
            Approximant::Poly(p) | Approximant::ExpPoly(p) | Approximant::Harmonic(p) => p,
        }
    }

    /// Value of the approximant (real part carried in `re` for harmonic).
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Approximant::Poly(p) => p.eval(z),
            Approximant::ExpPoly(p) => p.eval(z).exp(),
            Approximant::Harmonic(p) => c64(p.eval(z).re, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungeCertificate {
    pub mode: Mode,
    pub approximant: Approximant,
    /// Achieved error per target (sup, log-modulus or real-part sup by mode).
    pub errors: Vec<f64>,
    pub degree: usize,
    pub eps: f64,
}

impl RungeCertificate {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Metric {
    Modulus,
    RealPart,
}

/// Sampled data for one fit: points, values and their target index.
struct Samples {
    z: Vec<C64>,
    v: Vec<C64>,
    target: Vec<usize>,
}

impl Samples {
    fn new() -> Self {
        Samples { z: Vec::new(), v: Vec::new(), target: Vec::new() }
    }

    fn push(&mut self, z: C64, v: C64, t: usize) {
        self.z.push(z);
        self.v.push(v);
        self.target.push(t);
    }
}

fn validate_problem(p: &RungeProblem) -> Result<(), RungeError> {
    if p.targets.is_empty() {
        return Err(RungeError::InvalidProblem("no targets".into()));
    }
    if !(p.eps > 0.0) {
        return Err(RungeError::InvalidProblem("eps must be positive".into()));
    }
    for (i, a) in p.targets.iter().enumerate() {
        for b in &p.targets[i + 1..] {
            if a.k.meets(&b.k) {
                return Err(RungeError::InvalidProblem(format!("targets {i} overlap")));
            }
        }
    }
    let disks: Vec<Disk> = p.targets.iter().flat_map(|t| t.k.disks().iter().copied()).collect();
    let h = disks.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min) / 8.0;
    if !holes(&disks, h).is_empty() {
        return Err(RungeError::InvalidProblem("complement of the union is not connected".into()));
    }
    Ok(())
}

fn fit_points(k: &CompactRegion, cfg: &RungeConfig, factor: f64) -> Vec<C64> {
    let min_nodes = (cfg.min_nodes as f64 * factor).ceil() as usize;
    k.boundary_arcs_with(|r| ((2.0 * PI * r * cfg.density * factor).ceil() as usize).max(min_nodes))
        .into_iter()
        .flatten()
        .collect()
}

fn err_of(r: C64, metric: Metric) -> f64 {
    match metric {
        Metric::Modulus => r.norm(),
        Metric::RealPart => r.re.abs(),
    }
}

fn per_target_errors(poly: &ArnoldiPoly, s: &Samples, n_targets: usize, metric: Metric) -> Vec<f64> {
    let mut e = vec![0f64; n_targets];
    for i in 0..s.z.len() {
        let r = poly.eval(s.z[i]) - s.v[i];
        e[s.target[i]] = e[s.target[i]].max(err_of(r, metric));
    }
    e
}

/// Degree-escalating projection fit with held-out validation. Returns the
/// first validated polynomial, or the cap error with the best error seen.
fn fit_samples(
    fit: &Samples,
    val: &Samples,
    n_targets: usize,
    eps: f64,
    cap: usize,
    metric: Metric,
    margin: f64,
) -> Result<(ArnoldiPoly, Vec<f64>), RungeError> {
    let m = fit.z.len();
    let mf = m as f64;
    let center = fit.z.iter().sum::<C64>() / mf;
    let scale = fit.z.iter().map(|z| (z - center).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let x: Vec<C64> = fit.z.iter().map(|z| (z - center) / scale).collect();
    let mut cols: Vec<Vec<C64>> = vec![vec![c64(1.0, 0.0); m]];
    let mut hess: Vec<Vec<C64>> = Vec::new();
    let c0 = fit.v.iter().sum::<C64>() / mf;
    let mut coeffs = vec![c0];
    let mut resid: Vec<C64> = fit.v.iter().map(|v| v - c0).collect();
    let mut best = f64::INFINITY;
    let mut best_poly: Option<(ArnoldiPoly, Vec<f64>)> = None;
    let mut last_validated_fit = f64::INFINITY;
    let mut deg = 0;
    loop {
        let fit_err = resid.iter().map(|r| err_of(*r, metric)).fold(0.0, f64::max);
        // Validate when the fit looks good enough, or when it has improved
        // markedly since the last validation near the cap.
        let try_validate = fit_err < margin * eps || (deg == cap) || fit_err < 0.25 * last_validated_fit.min(best);
        if try_validate {
            let poly = ArnoldiPoly {
                basis: Arc::new(ArnoldiBasis { center, scale, hessenberg: hess.clone() }),
                coeffs: coeffs.clone(),
            };
            let errs = per_target_errors(&poly, val, n_targets, metric);
            let e = errs.iter().copied().fold(fit_err, f64::max);
            last_validated_fit = fit_err;
            if e < best {
                best = e;
                best_poly = Some((poly, errs));
            }
            if best < eps {
                return Ok(best_poly.expect("validated polynomial"));
            }
        }
        if deg == cap {
            break;
        }
        // Extend the basis by one degree (classical Gram-Schmidt, twice).
        let qk = &cols[deg];
        let mut v: Vec<C64> = (0..m).map(|i| x[i] * qk[i]).collect();
        let mut h = vec![c64(0.0, 0.0); deg + 2];
        for _ in 0..2 {
            for (j, q) in cols.iter().enumerate() {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>() / mf;
                h[j] += dot;
                for i in 0..m {
                    v[i] -= dot * q[i];
                }
            }
        }
        let nrm = (v.iter().map(|a| a.norm_sqr()).sum::<f64>() / mf).sqrt();
        if !(nrm > 1e-13) {
            break;
        }
        h[deg + 1] = c64(nrm, 0.0);
        for a in v.iter_mut() {
            *a /= nrm;
        }
        let c: C64 = v.iter().zip(&fit.v).map(|(a, b)| a.conj() * b).sum::<C64>() / mf;
        for i in 0..m {
            resid[i] -= c * v[i];
        }
        coeffs.push(c);
        hess.push(h);
        cols.push(v);
        deg += 1;
    }
    Err(RungeError::DegreeCapExceeded { cap, best_error: best, eps })
}

fn additive_samples(p: &RungeProblem, cfg: &RungeConfig) -> (Samples, Samples) {
    let mut fit = Samples::new();
    let mut val = Samples::new();
    for (t, tg) in p.targets.iter().enumerate() {
        for z in fit_points(&tg.k, cfg, 1.0) {
            fit.push(z, tg.h.value(z), t);
        }
        for z in fit_points(&tg.k, cfg, 2.0) {
            val.push(z, tg.h.value(z), t);
        }
    }
    (fit, val)
}

/// One polynomial g with sup_{K_i} |g - h_i| < eps for every target.
pub fn solve_additive(p: &RungeProblem, cfg: &RungeConfig) -> Result<RungeCertificate, RungeError> {
    validate_problem(p)?;
    for (i, t) in p.targets.iter().enumerate() {
        if let Some(s) = t.h.singularities().iter().find(|s| t.k.contains(**s)) {
            return Err(RungeError::InvalidProblem(format!("target {i} has a singularity at {s} in K")));
        }
    }
    let (fit, val) = additive_samples(p, cfg);
    let (poly, errors) = fit_samples(&fit, &val, p.targets.len(), p.eps, cfg.degree_cap, Metric::Modulus, cfg.fit_margin)?;
    Ok(RungeCertificate { mode: Mode::Additive, degree: poly.degree(), approximant: Approximant::Poly(poly), errors, eps: p.eps })
}

/// Best validated sup error among degrees 0..=d, for each requested d.
pub fn additive_error_profile(p: &RungeProblem, cfg: &RungeConfig, degrees: &[usize]) -> Result<Vec<f64>, RungeError> {
    validate_problem(p)?;
    let (fit, val) = additive_samples(p, cfg);
    let top = degrees.iter().copied().max().unwrap_or(0);
    let mut by_degree = Vec::with_capacity(top + 1);
    for d in 0..=top {
        let e = match fit_samples(&fit, &val, p.targets.len(), 0.0, d, Metric::Modulus, 0.0) {
            Err(RungeError::DegreeCapExceeded { best_error, .. }) => best_error,
            Err(e) => return Err(e),
            Ok((_, errs)) => errs.into_iter().fold(0.0, f64::max),
        };
        by_degree.push(e);
    }
    for d in 1..by_degree.len() {
        by_degree[d] = by_degree[d].min(by_degree[d - 1]);
    }
    Ok(degrees.iter().map(|&d| by_degree[d]).collect())
}

/// Continuous branch of log h over a point cloud: unwrap along a BFS tree of
/// edges shorter than `edge`, then check every remaining edge.
fn unwrap_logs(z: &[C64], logs: &[C64], edge: f64, target: usize) -> Result<Vec<C64>, RungeError> {
    let n = z.len();
    let cell = |p: C64| ((p.re / edge).floor() as i64, (p.im / edge).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in z.iter().enumerate() {
        grid.entry(cell(*p)).or_default().push(i);
    }
    let neighbours = |i: usize| {
        let (cx, cy) = cell(z[i]);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in v {
                        if j != i && (z[j] - z[i]).norm() < edge {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    };
    let wrap = |d: f64| d - 2.0 * PI * (d / (2.0 * PI)).round();
    let mut u: Vec<Option<C64>> = vec![None; n];
    for root in 0..n {
        if u[root].is_some() {
            continue;
        }
        u[root] = Some(logs[root]);
        let mut comp = vec![root];
        let mut q = VecDeque::from([root]);
        while let Some(i) = q.pop_front() {
            let ui = u[i].expect("visited");
            for j in neighbours(i) {
                if u[j].is_none() {
                    let d = logs[j] - ui;
                    u[j] = Some(c64(logs[j].re, ui.im + wrap(d.im)));
                    comp.push(j);
                    q.push_back(j);
                }
            }
        }
        // Each component may pick its own branch; centre it near zero.
        let mean = comp.iter().map(|&i| u[i].expect("visited").im).sum::<f64>() / comp.len() as f64;
        let shift = 2.0 * PI * (mean / (2.0 * PI)).round();
        for &i in &comp {
            u[i] = u[i].map(|v| c64(v.re, v.im - shift));
        }
    }
    let u: Vec<C64> = u.into_iter().map(|v| v.expect("all visited")).collect();
    for i in 0..n {
        for j in neighbours(i) {
            let jump = (u[j].im - u[i].im).abs();
            if jump >= PI {
                return Err(RungeError::BranchInconsistency { target, at: z[i], jump });
            }
        }
    }
    Ok(u)
}

/// h = exp(g) with sup_{K_i} |log|h / h_i|| < eps for every target.
pub fn solve_multiplicative(p: &RungeProblem, cfg: &RungeConfig) -> Result<RungeCertificate, RungeError> {
    validate_problem(p)?;
    let mut fit = Samples::new();
    let mut val = Samples::new();
    for (t, tg) in p.targets.iter().enumerate() {
        for d in tg.k.disks() {
            let contour = Contour::Circle { center: d.center, radius: d.radius };
            let n = (2.0 * PI * d.radius * cfg.density).ceil().max(64.0) as usize;
            match count_zeros(&tg.h, &contour, n) {
                Ok(zc) if zc.count == 0 => {}
                _ => return Err(RungeError::ZeroInK { target: t, at: d.center }),
            }
        }
        let fz = fit_points(&tg.k, cfg, 1.0);
        let vz = fit_points(&tg.k, cfg, 2.0);
        let rmin = tg.k.min_radius();
        let inner = tg.k.interior_points(rmin / 6.0);
        let mut all: Vec<C64> = Vec::with_capacity(fz.len() + vz.len() + inner.len());
        all.extend(&fz);
        all.extend(&vz);
        all.extend(&inner);
        let logs: Vec<C64> = all.iter().map(|z| tg.h.log_value(*z)).collect();
        if let Some(i) = logs.iter().position(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(RungeError::ZeroInK { target: t, at: all[i] });
        }
        let u = unwrap_logs(&all, &logs, rmin / 4.0, t)?;
        for (i, z) in fz.iter().enumerate() {
            fit.push(*z, u[i], t);
        }
        for (i, z) in vz.iter().enumerate() {
            val.push(*z, u[fz.len() + i], t);
        }
    }
    let (poly, errors) = fit_samples(&fit, &val, p.targets.len(), p.eps, cfg.degree_cap, Metric::RealPart, cfg.fit_margin)?;
    Ok(RungeCertificate {
        mode: Mode::MultiplicativeLog,
        degree: poly.degree(),
        approximant: Approximant::ExpPoly(poly),
        errors,
        eps: p.eps,
    })
}

/// Real least squares for u ~ Re sum c_k q_k with truncated SVD.
fn harmonic_fit(fit: &Samples, deg: usize) -> Option<ArnoldiPoly> {
    let m = fit.z.len();
    let center = fit.z.iter().sum::<C64>() / m as f64;
    let scale = fit.z.iter().map(|z| (z - center).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // Build the Arnoldi basis to the requested degree.
    let x: Vec<C64> = fit.z.iter().map(|z| (z - center) / scale).collect();
    let mf = m as f64;
    let mut cols: Vec<Vec<C64>> = vec![vec![c64(1.0, 0.0); m]];
    let mut hess: Vec<Vec<C64>> = Vec::new();
    for k in 0..deg {
        let mut v: Vec<C64> = (0..m).map(|i| x[i] * cols[k][i]).collect();
        let mut h = vec![c64(0.0, 0.0); k + 2];
        for _ in 0..2 {
            for (j, q) in cols.iter().enumerate() {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>() / mf;
                h[j] += dot;
                for i in 0..m {
                    v[i] -= dot * q[i];
                }
            }
        }
        let nrm = (v.iter().map(|a| a.norm_sqr()).sum::<f64>() / mf).sqrt();
        if !(nrm > 1e-13) {
            break;
        }
        h[k + 1] = c64(nrm, 0.0);
        for a in v.iter_mut() {
            *a /= nrm;
        }
        hess.push(h);
        cols.push(v);
    }
    let d = cols.len() - 1;
    // Columns: Re q_0, then (Re q_k, -Im q_k) for k >= 1.
    let ncol = 2 * d + 1;
    let mut a = DMatrix::<f64>::zeros(m, ncol);
    for i in 0..m {
        a[(i, 0)] = cols[0][i].re;
        for k in 1..=d {
            a[(i, 2 * k - 1)] = cols[k][i].re;
            a[(i, 2 * k)] = -cols[k][i].im;
        }
    }
    let b = DVector::from_iterator(m, fit.v.iter().map(|v| v.re));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let sol = svd.solve(&b, 1e-13 * smax).ok()?;
    let mut coeffs = vec![c64(sol[0], 0.0)];
    for k in 1..=d {
        coeffs.push(c64(sol[2 * k - 1], sol[2 * k]));
    }
    Some(ArnoldiPoly { basis: Arc::new(ArnoldiBasis { center, scale, hessenberg: hess }), coeffs })
}

/// Harmonic polynomial u = Re p with sup_{K_i} |u - Re h_i| < eps.
pub fn solve_harmonic(p: &RungeProblem, cfg: &RungeConfig) -> Result<RungeCertificate, RungeError> {
    validate_problem(p)?;
    let (fit, val) = additive_samples(p, cfg);
    let mut best = f64::INFINITY;
    let mut deg = 0;
    loop {
        if let Some(poly) = harmonic_fit(&fit, deg) {
            let fe = per_target_errors(&poly, &fit, p.targets.len(), Metric::RealPart);
            if fe.iter().copied().fold(0.0, f64::max) < p.eps {
                let errs = per_target_errors(&poly, &val, p.targets.len(), Metric::RealPart);
                let e = errs.iter().copied().fold(0.0, f64::max);
                best = best.min(e);
                if e < p.eps {
                    return Ok(RungeCertificate {
                        mode: Mode::Harmonic,
                        degree: poly.degree(),
                        approximant: Approximant::Harmonic(poly),
                        errors: errs,
                        eps: p.eps,
                    });
                }
            } else {
                best = best.min(fe.iter().copied().fold(0.0, f64::max));
            }
        }
        if deg >= cfg.degree_cap {
            break;
        }
        deg = (deg + 4).min(cfg.degree_cap);
    }
    Err(RungeError::DegreeCapExceeded { cap: cfg.degree_cap, best_error: best, eps: p.eps })
}

/// Dispatch on the problem mode.
pub fn solve(p: &RungeProblem, cfg: &RungeConfig) -> Result<RungeCertificate, RungeError> {
    match p.mode {
        Mode::Additive => solve_additive(p, cfg),
        Mode::MultiplicativeLog => solve_multiplicative(p, cfg),
        Mode::Harmonic => solve_harmonic(p, cfg),
    }
}

/// Independent re-check of a certificate at `factor` times the fit density:
/// per-target errors in the metric of the mode.
pub fn recheck(p: &RungeProblem, cert: &RungeCertificate, cfg: &RungeConfig, factor: f64) -> Vec<f64> {
    p.targets
        .iter()
        .map(|t| {
            let mut pts = fit_points(&t.k, cfg, factor);
            pts.extend(t.k.interior_points(t.k.min_radius() / (2.0 * factor)));
            pts.iter()
                .map(|z| {
                    let g = cert.approximant.poly().eval(*z);
                    match cert.mode {
                        Mode::Additive => (g - t.h.value(*z)).norm(),
                        Mode::MultiplicativeLog => (g.re - t.h.log_abs(*z)).abs(),
                        Mode::Harmonic => (g.re - t.h.value(*z).re).abs(),
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::ComplexPoly;

    fn disk(c: f64, r: f64) -> CompactRegion {
        CompactRegion::disk(c64(c, 0.0), r)
    }

    fn cfg() -> RungeConfig {
        RungeConfig::default()
    }

    #[test]
    fn exact_polynomial_is_recovered() {
        let p = ComplexPoly::new((0..6).map(|k| c64(1.0 / (k + 1) as f64, k as f64 * 0.1)).collect());
        let prob = RungeProblem {
            targets: vec![Target { k: disk(0.3, 1.0), h: SampledFunction::polynomial(p) }],
            eps: 1e-8,
            mode: Mode::Additive,
        };
        let c = solve_additive(&prob, &cfg()).unwrap();
        assert!(c.max_error() < 1e-10, "{}", c.max_error());
    }

    #[test]
    fn two_disks_zero_one() {
        let prob = RungeProblem {
            targets: vec![
                Target { k: disk(-4.0, 1.0), h: SampledFunction::constant(c64(0.0, 0.0)) },
                Target { k: disk(4.0, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) },
            ],
            eps: 1e-6,
            mode: Mode::Additive,
        };
        let c = solve_additive(&prob, &cfg()).unwrap();
        assert!(c.max_error() < 1e-6);
        let dense = recheck(&prob, &c, &cfg(), 4.0);
        assert!(dense.iter().all(|e| *e < 2e-6), "{dense:?}");
    }

    #[test]
    fn exp_needs_low_degree() {
        let prob = RungeProblem {
            targets: vec![Target { k: disk(0.0, 1.0), h: SampledFunction::new(|z: C64| z.exp()) }],
            eps: 1e-6,
            mode: Mode::Additive,
        };
        let c = solve_additive(&prob, &cfg()).unwrap();
        assert!(c.degree <= 12, "{}", c.degree);
    }

    #[test]
    fn cap_is_reported() {
        let prob = RungeProblem {
            targets: vec![
                Target { k: disk(-1.05, 1.0), h: SampledFunction::constant(c64(0.0, 0.0)) },
                Target { k: disk(1.05, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) },
            ],
            eps: 1e-12,
            mode: Mode::Additive,
        };
        let small = RungeConfig { degree_cap: 10, ..cfg() };
        assert!(matches!(solve_additive(&prob, &small), Err(RungeError::DegreeCapExceeded { cap: 10, .. })));
    }

    #[test]
    fn overlapping_targets_rejected() {
        let prob = RungeProblem {
            targets: vec![
                Target { k: disk(0.0, 1.0), h: SampledFunction::constant(c64(0.0, 0.0)) },
                Target { k: disk(1.5, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) },
            ],
            eps: 1e-3,
            mode: Mode::Additive,
        };
        assert!(matches!(solve_additive(&prob, &cfg()), Err(RungeError::InvalidProblem(_))));
    }

    #[test]
    fn multiplicative_examples() {
        let one = RungeProblem {
            targets: vec![Target { k: disk(0.0, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) }],
            eps: 1e-6,
            mode: Mode::MultiplicativeLog,
        };
        let c = solve_multiplicative(&one, &cfg()).unwrap();
        assert_eq!(c.max_error(), 0.0);
        assert_eq!(c.degree, 0);
        let two = RungeProblem {
            targets: vec![
                Target { k: disk(-4.0, 1.0), h: SampledFunction::constant(c64(2.0, 0.0)) },
                Target { k: disk(4.0, 1.0), h: SampledFunction::constant(c64(0.5, 0.0)) },
            ],
            eps: 1e-4,
            mode: Mode::MultiplicativeLog,
        };
        let c = solve_multiplicative(&two, &cfg()).unwrap();
        assert!(c.errors.iter().all(|e| *e < 1e-4));
        let e = RungeProblem {
            targets: vec![Target {
                k: disk(0.0, 1.0),
                h: SampledFunction::new(|z: C64| z.exp()).with_derivative(|z: C64| z.exp()),
            }],
            eps: 1e-8,
            mode: Mode::MultiplicativeLog,
        };
        let c = solve_multiplicative(&e, &cfg()).unwrap();
        assert!(c.max_error() < 1e-8);
        assert!(c.degree <= 2);
    }

    #[test]
    fn multiplicative_rejects_zero() {
        let prob = RungeProblem {
            targets: vec![Target { k: disk(0.0, 1.0), h: SampledFunction::new(|z| z) }],
            eps: 1e-3,
            mode: Mode::MultiplicativeLog,
        };
        assert!(matches!(solve_multiplicative(&prob, &cfg()), Err(RungeError::ZeroInK { .. })));
    }

    #[test]
    fn harmonic_examples() {
        let re = RungeProblem {
            targets: vec![Target { k: disk(0.0, 1.0), h: SampledFunction::new(|z: C64| c64(z.re, 0.0)) }],
            eps: 1e-10,
            mode: Mode::Harmonic,
        };
        assert!(solve_harmonic(&re, &cfg()).unwrap().max_error() < 1e-10);
        let lg = RungeProblem {
            targets: vec![Target { k: disk(0.0, 1.0), h: SampledFunction::new(|z: C64| c64((z - 5.0).norm().ln(), 0.0)) }],
            eps: 1e-5,
            mode: Mode::Harmonic,
        };
        assert!(solve_harmonic(&lg, &cfg()).unwrap().max_error() < 1e-5);
        let two = RungeProblem {
            targets: vec![
                Target { k: disk(-4.0, 1.0), h: SampledFunction::constant(c64(0.0, 0.0)) },
                Target { k: disk(4.0, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) },
            ],
            eps: 1e-4,
            mode: Mode::Harmonic,
        };
        assert!(solve_harmonic(&two, &cfg()).unwrap().max_error() < 1e-4);
    }

    #[test]
    fn profile_is_monotone() {
        let prob = RungeProblem {
            targets: vec![
                Target { k: disk(-3.0, 1.0), h: SampledFunction::new(|z: C64| z.sin()) },
                Target { k: disk(3.0, 1.0), h: SampledFunction::constant(c64(1.0, 0.0)) },
            ],
            eps: 1e-6,
            mode: Mode::Additive,
        };
        let prof = additive_error_profile(&prob, &cfg(), &[0, 5, 10, 20, 30]).unwrap();
        assert!(prof.windows(2).all(|w| w[1] <= w[0]), "{prof:?}");
    }
}
