//! Level-by-level equivariant lifting over a toast.
//!
//! Every region at level n carries a local solution: the base solution of
//! its anchor times (or plus) a correction polynomial. Corrections come from
//! the Runge solver with tolerance 2^-n on the previous-level regions the
//! region contains, so the local solutions agree with their predecessors to
//! within a summable error. Regions that merely repeat a predecessor copy
//! its solution.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{sub_mean_value, MeanValueProbe, Potential};
use crate::divisors::{extract_principal_parts, DivPoint, Divisor, DivisorError, PrincipalParts};
use crate::plane::{c64, count_zeros, CompactRegion, Contour, SampledFunction, C64};
use crate::runge::{solve, ArnoldiPoly, Mode, RungeCertificate, RungeConfig, RungeError, RungeProblem, Target};
use crate::toast::{build_toast, ToastError, ToastForest, ToastParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("Runge step failed at level {level}, anchor {anchor}: {source}")]
    RungeFailure { level: usize, anchor: C64, source: RungeError },
    #[error("level {level} solution at anchor {anchor} has {found} zeros in a region holding {expected}")]
    DivisorMismatch { level: usize, anchor: C64, expected: i64, found: i64 },
    #[error("base solution vanishes at the normalization point of anchor {0}")]
    DegenerateGauge(C64),
    #[error(transparent)]
    Toast(#[from] ToastError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftKind {
    Weierstrass,
    MittagLeffler,
    Poisson,
}

/// The data being lifted; the base solution is built from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Base {
    Weierstrass(Arc<Vec<DivPoint>>),
    MittagLeffler(PrincipalParts),
    Poisson(Potential),
}

impl Base {
    pub fn kind(&self) -> LiftKind {
        match self {
            Base::Weierstrass(_) => LiftKind::Weierstrass,
            Base::MittagLeffler(_) => LiftKind::MittagLeffler,
            Base::Poisson(_) => LiftKind::Poisson,
        }
    }

    /// Base value: log of the zero product, the principal-part sum, or the
    /// potential (as a real number in `re`).
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Base::Weierstrass(zs) => zs.iter().map(|p| p.mult as f64 * (z - p.z()).ln()).sum(),
            Base::MittagLeffler(pp) => pp.entries.iter().map(|e| e.eval(z)).sum(),
            Base::Poisson(mu) => c64(mu.eval_unchecked(&[z.re, z.im]), 0.0),
        }
    }

    fn mode(&self) -> Mode {
        match self {
            Base::Weierstrass(_) => Mode::MultiplicativeLog,
            Base::MittagLeffler(_) => Mode::Additive,
            Base::Poisson(_) => Mode::Harmonic,
        }
    }

    fn locations(&self) -> Vec<C64> {
        match self {
            Base::Weierstrass(zs) => zs.iter().map(|p| p.z()).collect(),
            Base::MittagLeffler(pp) => pp.poles(),
            Base::Poisson(mu) => mu.atoms.iter().map(|a| c64(a.pos[0], a.pos[1])).collect(),
        }
    }
}

/// Zero-free part of a local solution: constant plus correction
/// polynomials (a logarithm for products, a summand otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub constant: C64,
    pub corrections: Vec<ArnoldiPoly>,
    /// Index of the previous-level region this patch was copied from.
    pub copied_from: Option<usize>,
}

impl Patch {
    pub fn gauge(&self, z: C64) -> C64 {
        self.constant + self.corrections.iter().map(|p| p.eval(z)).sum::<C64>()
    }

    pub fn gauge_derivative(&self, z: C64) -> C64 {
        self.corrections.iter().map(|p| p.eval_with_derivative(z).1).sum()
    }

    fn as_function(&self, minus: C64) -> SampledFunction {
        let a = self.clone();
        let b = self.clone();
        SampledFunction::new(move |z| a.gauge(z) - minus).with_derivative(move |z| b.gauge_derivative(z))
    }
}

/// One Runge step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub level: usize,
    pub index: usize,
    pub anchor: C64,
    pub targets: usize,
    pub eps: f64,
    pub degree: usize,
    pub errors: Vec<f64>,
    pub retried: bool,
}

/// r_n(K) for one viewpoint and compact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub level: usize,
    pub viewpoint: C64,
    /// Compact label: "predecessor" or "ladder-<radius>".
    pub compact: String,
    pub value: Option<f64>,
    pub bound: f64,
    /// K lies inside the predecessor region of the viewpoint, the condition
    /// the Runge step guarantees.
    pub certified: bool,
}

impl RateCertificate {
    pub fn holds(&self) -> bool {
        self.value.is_some_and(|v| v < self.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftingTrace {
    pub base: Base,
    pub toast: ToastForest,
    /// patches[n][i] belongs to region i of toast level n.
    pub patches: Vec<Vec<Patch>>,
    pub records: Vec<AnchorRecord>,
    pub rates: Vec<RateCertificate>,
    pub ladder: Vec<RateCertificate>,
    /// Extrapolated bound on the remaining corrections: 2^-N.
    pub tail_bound: f64,
}

/// Knobs for the lifting and its certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftConfig {
    pub runge: RungeConfig,
    /// Certification samples are this many times denser than fitting.
    pub certify_factor: f64,
    /// Radii of the centroid ladder.
    pub ladder: Vec<f64>,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { runge: RungeConfig::default(), certify_factor: 4.0, ladder: vec![1.0, 2.0, 4.0, 8.0] }
    }
}

/// Whole-pipeline settings: toast schedule plus lifting knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub toast: ToastParams,
    pub lift: LiftConfig,
}

impl PipelineConfig {
    /// Lacunary schedule with `top + 1` levels: leaves of radius 1/2 at
    /// markers 6 apart, repeated until a covering top level of radius 24.
    pub fn lacunary(top: usize) -> Self {
        PipelineConfig { toast: ToastParams::lacunary(top + 1, 0.5, 6.0, 24.0), lift: LiftConfig::default() }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::lacunary(4)
    }
}

/// Point where the base solution of `anchor` is normalized: the anchor
/// moved by u0/2 away from the nearest other configuration point.
pub fn gauge_point(anchor: C64, points: &[C64], u0: f64) -> C64 {
    let nearest = points
        .iter()
        .filter(|p| **p != anchor)
        .min_by(|a, b| (*a - anchor).norm().total_cmp(&(*b - anchor).norm()));
    let dir = match nearest {
        Some(p) => (anchor - p) / (anchor - p).norm(),
        None => c64(1.0, 0.0),
    };
    anchor + 0.5 * u0 * dir
}

fn base_constant(base: &Base, anchor: C64, points: &[C64], u0: f64) -> Result<C64, LiftError> {
    match base {
        Base::Weierstrass(_) => {
            let v = base.eval(gauge_point(anchor, points, u0));
            if !v.re.is_finite() {
                return Err(LiftError::DegenerateGauge(anchor));
            }
            Ok(-v)
        }
        _ => Ok(c64(0.0, 0.0)),
    }
}

fn is_copy(toast: &ToastForest, n: usize, i: usize) -> Option<usize> {
    let r = &toast.levels[n].regions[i];
    if r.repeated {
        return r.children.first().copied();
    }
    match r.children.as_slice() {
        [c] if toast.levels[n - 1].regions[*c].region.disks() == r.region.disks() => Some(*c),
        _ => None,
    }
}

/// Signed zero count of a Weierstrass local solution around each child
/// disk compared with the divisor points inside.
fn membership_check(
    zeros: &[DivPoint],
    patch: &Patch,
    region: &CompactRegion,
    level: usize,
    anchor: C64,
) -> Result<(), LiftError> {
    for d in region.disks() {
        let expected: i64 = zeros.iter().filter(|p| (p.z() - d.center).norm() < d.radius).map(|p| p.mult as i64).sum();
        let p1 = patch.clone();
        let zs: Vec<DivPoint> = zeros.to_vec();
        let f = SampledFunction::from_log(|_| c64(0.0, 0.0)).with_derivative(move |z| {
            p1.gauge_derivative(z) + zs.iter().map(|p| p.mult as f64 / (z - p.z())).sum::<C64>()
        });
        let nodes = 256;
        let found = count_zeros(&f, &Contour::Circle { center: d.center, radius: d.radius }, nodes)
            .map(|zc| zc.count)
            .unwrap_or(i64::MIN);
        if found != expected {
            return Err(LiftError::DivisorMismatch { level, anchor, expected, found });
        }
    }
    Ok(())
}

fn solve_with_retry(p: &RungeProblem, cfg: &RungeConfig) -> Result<(RungeCertificate, bool), RungeError> {
    match solve(p, cfg) {
        Ok(c) => Ok((c, false)),
        Err(RungeError::DegreeCapExceeded { .. }) => {
            let wider = RungeConfig { degree_cap: 2 * cfg.degree_cap, ..*cfg };
            solve(p, &wider).map(|c| (c, true))
        }
        Err(e) => Err(e),
    }
}

fn metric(kind: LiftKind, v: C64) -> f64 {
    match kind {
        LiftKind::MittagLeffler => v.norm(),
        _ => v.re.abs(),
    }
}

/// Sup of the seminorm of (patch_a - patch_b) over samples of K.
fn patch_distance(kind: LiftKind, a: &Patch, b: &Patch, k: &CompactRegion, density: f64) -> f64 {
    k.sample_points(density).into_iter().map(|z| metric(kind, a.gauge(z) - b.gauge(z))).fold(0.0, f64::max)
}

/// Runs the recursion on an already built toast.
pub fn lift(base: Base, toast: &ToastForest, cfg: &LiftConfig) -> Result<LiftingTrace, LiftError> {
    let kind = base.kind();
    let points = base.locations();
    let u0 = toast.u0;
    let mut patches: Vec<Vec<Patch>> = Vec::with_capacity(toast.levels.len());
    let level0 = toast.levels[0]
        .regions
        .iter()
        .map(|r| Ok(Patch { constant: base_constant(&base, r.anchor, &points, u0)?, corrections: vec![], copied_from: None }))
        .collect::<Result<Vec<_>, LiftError>>()?;
    patches.push(level0);
    let mut records = Vec::new();
    for n in 1..toast.levels.len() {
        let eps = 0.5f64.powi(n as i32);
        let prev = &patches[n - 1];
        let results: Vec<Result<(Patch, Option<AnchorRecord>), LiftError>> = toast.levels[n]
            .regions
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                if let Some(c) = is_copy(toast, n, i) {
                    return Ok((Patch { copied_from: Some(c), ..prev[c].clone() }, None));
                }
                let constant = base_constant(&base, r.anchor, &points, u0)?;
                let targets = r
                    .children
                    .iter()
                    .map(|&c| Target {
                        k: toast.levels[n - 1].regions[c].region.clone(),
                        h: match kind {
                            LiftKind::Weierstrass => {
                                let (p1, p2) = (prev[c].clone(), prev[c].clone());
                                SampledFunction::from_log(move |z| p1.gauge(z) - constant)
                                    .with_derivative(move |z| p2.gauge_derivative(z))
                            }
                            _ => prev[c].as_function(constant),
                        },
                    })
                    .collect();
                let problem = RungeProblem { targets, eps, mode: base.mode() };
                let (cert, retried) = solve_with_retry(&problem, &cfg.runge)
                    .map_err(|source| LiftError::RungeFailure { level: n, anchor: r.anchor, source })?;
                let patch = Patch { constant, corrections: vec![cert.approximant.poly().clone()], copied_from: None };
                if let Base::Weierstrass(zs) = &base {
                    for &c in &r.children {
                        membership_check(zs, &patch, &toast.levels[n - 1].regions[c].region, n, r.anchor)?;
                    }
                }
                let rec = AnchorRecord {
                    level: n,
                    index: i,
                    anchor: r.anchor,
                    targets: r.children.len(),
                    eps,
                    degree: cert.degree,
                    errors: cert.errors.clone(),
                    retried,
                };
                Ok((patch, Some(rec)))
            })
            .collect();
        let mut level = Vec::with_capacity(results.len());
        for res in results {
            let (p, rec) = res?;
            level.push(p);
            records.extend(rec);
        }
        patches.push(level);
    }
    let top = toast.levels.len() - 1;
    let mut trace = LiftingTrace {
        base,
        toast: toast.clone(),
        patches,
        records,
        rates: vec![],
        ladder: vec![],
        tail_bound: 0.5f64.powi(top as i32),
    };
    trace.rates = trace.certify_predecessors(cfg);
    trace.ladder = trace.certify_ladder(cfg);
    Ok(trace)
}

impl LiftingTrace {
    pub fn kind(&self) -> LiftKind {
        self.base.kind()
    }

    pub fn top(&self) -> usize {
        self.patches.len() - 1
    }

    fn density(&self, cfg: &LiftConfig) -> f64 {
        cfg.runge.density * cfg.certify_factor
    }

    /// Viewpoints: level-0 anchors in the inner window.
    pub fn viewpoints(&self) -> Vec<(usize, C64)> {
        let inner = self.toast.inner_window();
        self.toast.levels[0]
            .regions
            .iter()
            .enumerate()
            .filter(|(_, r)| inner.contains(r.anchor))
            .map(|(i, r)| (i, r.anchor))
            .collect()
    }

    fn certify_predecessors(&self, cfg: &LiftConfig) -> Vec<RateCertificate> {
        let density = self.density(cfg);
        let kind = self.kind();
        let jobs: Vec<(usize, C64)> =
            (1..=self.top()).flat_map(|n| self.viewpoints().into_iter().map(move |(_, x)| (n, x))).collect();
        jobs.par_iter()
            .map(|&(n, x)| {
                let bound = 0.5f64.powi(n as i32);
                let (Some(a), Some(b)) = (self.toast.locate_index(x, n), self.toast.locate_index(x, n - 1)) else {
                    return RateCertificate { level: n, viewpoint: x, compact: "predecessor".into(), value: None, bound, certified: false };
                };
                let pa = &self.patches[n][a];
                let pb = &self.patches[n - 1][b];
                let value = if pa.copied_from == Some(b) {
                    0.0
                } else {
                    patch_distance(kind, pa, pb, &self.toast.levels[n - 1].regions[b].region, density)
                };
                RateCertificate { level: n, viewpoint: x, compact: "predecessor".into(), value: Some(value), bound, certified: true }
            })
            .collect()
    }

    fn certify_ladder(&self, cfg: &LiftConfig) -> Vec<RateCertificate> {
        let density = self.density(cfg);
        let kind = self.kind();
        let pts = self.base.locations();
        if pts.is_empty() {
            return vec![];
        }
        let x = pts.iter().sum::<C64>() / pts.len() as f64;
        let mut out = Vec::new();
        for n in 1..=self.top() {
            let bound = 0.5f64.powi(n as i32);
            for &rad in &cfg.ladder {
                let k = CompactRegion::disk(x, rad);
                let label = format!("ladder-{rad}");
                let (Some(a), Some(b)) = (self.toast.locate_index(x, n), self.toast.locate_index(x, n - 1)) else {
                    out.push(RateCertificate { level: n, viewpoint: x, compact: label, value: None, bound, certified: false });
                    continue;
                };
                let inside = crate::toast::region_contains(&self.toast.levels[n - 1].regions[b].region, &k);
                let clean = pts.iter().all(|p| !k.contains(*p)) || kind == LiftKind::Weierstrass;
                let value = clean.then(|| patch_distance(kind, &self.patches[n][a], &self.patches[n - 1][b], &k, density / 4.0));
                out.push(RateCertificate { level: n, viewpoint: x, compact: label, value, bound, certified: inside });
            }
        }
        out
    }

    /// True when every certified rate is below its bound.
    pub fn rates_hold(&self) -> bool {
        self.rates.iter().filter(|r| r.certified).all(|r| r.holds())
    }

    /// Patch of the level-n region containing z.
    pub fn patch_at(&self, z: C64, n: usize) -> Option<&Patch> {
        self.toast.locate_index(z, n).map(|i| &self.patches[n][i])
    }

    /// psi_n at z: the logarithm for products, the value otherwise.
    pub fn psi_n(&self, z: C64, n: usize) -> Option<C64> {
        let p = self.patch_at(z, n)?;
        let g = p.gauge(z);
        Some(match self.kind() {
            LiftKind::Poisson => c64(g.re + self.base.eval(z).re, 0.0),
            _ => g + self.base.eval(z),
        })
    }

    /// Final psi = psi_N (logarithm for products).
    pub fn psi(&self, z: C64) -> Option<C64> {
        self.psi_n(z, self.top())
    }

    /// psi as a sampled function on the top region containing `near`.
    pub fn psi_function(&self, near: C64) -> Option<SampledFunction> {
        let i = self.toast.locate_index(near, self.top())?;
        let p = self.patches[self.top()][i].clone();
        let base = self.base.clone();
        let sing = match &base {
            Base::MittagLeffler(pp) => pp.poles(),
            _ => vec![],
        };
        Some(match base {
            Base::Weierstrass(ref zs) => {
                let zs = zs.clone();
                let (p1, p2, b1) = (p.clone(), p, base.clone());
                SampledFunction::from_log(move |z| p1.gauge(z) + b1.eval(z)).with_derivative(move |z| {
                    p2.gauge_derivative(z) + zs.iter().map(|q| q.mult as f64 / (z - q.z())).sum::<C64>()
                })
            }
            Base::MittagLeffler(ref pp) => {
                let pp2 = pp.clone();
                let (p1, p2, b1) = (p.clone(), p, base.clone());
                SampledFunction::new(move |z| p1.gauge(z) + b1.eval(z))
                    .with_derivative(move |z| {
                        p2.gauge_derivative(z) + pp2.entries.iter().map(|e| e.eval_derivative(z)).sum::<C64>()
                    })
                    .with_singularities(sing)
            }
            Base::Poisson(_) => {
                let b1 = base.clone();
                SampledFunction::new(move |z| c64(p.gauge(z).re + b1.eval(z).re, 0.0))
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

pub fn lift_weierstrass(d: &Divisor, toast: &ToastForest, cfg: &LiftConfig) -> Result<LiftingTrace, LiftError> {
    if !d.is_nonnegative() {
        return Err(LiftError::Divisor(DivisorError::Invalid("divisor has negative multiplicities".into())));
    }
    lift(Base::Weierstrass(Arc::new(d.points().to_vec())), toast, cfg)
}

pub fn lift_mittag_leffler(pp: &PrincipalParts, toast: &ToastForest, cfg: &LiftConfig) -> Result<LiftingTrace, LiftError> {
    lift(Base::MittagLeffler(pp.clone()), toast, cfg)
}

pub fn lift_poisson_2d(mu: &Potential, toast: &ToastForest, cfg: &LiftConfig) -> Result<LiftingTrace, LiftError> {
    if mu.dim != 2 {
        return Err(LiftError::Divisor(DivisorError::Invalid("planar potential required".into())));
    }
    lift(Base::Poisson(mu.clone()), toast, cfg)
}

/// Marker rule, toast and Weierstrass lifting in one call.
pub fn weierstrass_pipeline(d: &Divisor, cfg: &PipelineConfig) -> Result<LiftingTrace, LiftError> {
    let toast = build_toast(d, &cfg.toast)?;
    lift_weierstrass(d, &toast, &cfg.lift)
}

/// Radius of the circle that pins each recovered zero.
pub const LOCATE_RADIUS: f64 = 1e-9;

/// Zero recovery of psi on the inner window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub points: usize,
    /// Points whose count and position were confirmed numerically on psi.
    pub numeric: usize,
    /// Points where the argument-principle sum on psi was not resolvable in
    /// double precision; their multiplicity rests on the factorization and
    /// a finite zero-free factor.
    pub unresolved: usize,
    pub multiplicity_mismatches: usize,
    pub max_position_error: f64,
    /// Largest |psi'/psi| scale met on the test circles.
    pub max_log_derivative: f64,
    pub passed: bool,
}

/// Counts zeros of psi around every divisor point in the inner window: on a
/// circle of a quarter of the separation (capped so the contour sum stays
/// resolvable) for the multiplicity, and on a circle of radius
/// `LOCATE_RADIUS` for the position.
pub fn verify_divisor_recovery(trace: &LiftingTrace) -> RecoveryReport {
    let Base::Weierstrass(zs) = &trace.base else {
        return RecoveryReport {
            points: 0,
            numeric: 0,
            unresolved: 0,
            multiplicity_mismatches: 0,
            max_position_error: 0.0,
            max_log_derivative: 0.0,
            passed: true,
        };
    };
    let inner = trace.toast.inner_window();
    let locs: Vec<C64> = zs.iter().map(|p| p.z()).collect();
    let checks: Vec<(bool, bool, f64, f64)> = zs
        .par_iter()
        .filter(|p| inner.contains(p.z()))
        .map(|p| {
            let a = p.z();
            let sep = locs.iter().filter(|q| **q != a).map(|q| (q - a).norm()).fold(f64::INFINITY, f64::min);
            let Some(f) = trace.psi_function(a) else { return (false, false, f64::INFINITY, f64::INFINITY) };
            let i = trace.toast.locate_index(a, trace.top()).expect("located");
            let patch = &trace.patches[trace.top()][i];
            let scale = patch.gauge_derivative(a).norm();
            // Rounding in the contour sum grows like eps * nodes * rho * |g'|.
            let rho = (0.25 * sep).min(1e-3).min(1e12 / scale.max(1.0));
            if rho < 64.0 * f64::EPSILON * a.norm().max(1.0) {
                // Beyond double precision: fall back to the factorization,
                // which needs a finite zero-free factor at the point.
                let g = patch.gauge(a);
                return (g.re.is_finite() && g.im.is_finite(), true, 0.0, scale);
            }
            let circle = |r: f64| count_zeros(&f, &Contour::Circle { center: a, radius: r }, 256).map(|zc| zc.count);
            let want = Ok(p.mult as i64);
            let ok = circle(rho) == want;
            let pin = LOCATE_RADIUS.min(rho);
            let located = circle(pin) == want;
            let err = if located { pin } else { f64::INFINITY };
            (ok && located, false, err, scale)
        })
        .collect();
    let points = checks.len();
    let unresolved = checks.iter().filter(|c| c.1).count();
    let numeric = checks.iter().filter(|c| !c.1).count();
    let mism = checks.iter().filter(|c| !c.0).count();
    let max_err = checks.iter().filter(|c| !c.1).map(|c| c.2).fold(0.0, f64::max);
    let max_ld = checks.iter().map(|c| c.3).fold(0.0, f64::max);
    RecoveryReport {
        points,
        numeric,
        unresolved,
        multiplicity_mismatches: mism,
        max_position_error: max_err,
        max_log_derivative: max_ld,
        passed: mism == 0 && max_err < 1e-8,
    }
}

/// Principal parts of psi recovered by contour integration around each
/// pole, using the top-level solution of the region holding it.
pub fn recovered_principal_parts(trace: &LiftingTrace, radius: f64, order_cap: usize) -> Option<PrincipalParts> {
    let Base::MittagLeffler(pp) = &trace.base else { return None };
    let poles = pp.poles();
    let mut entries = Vec::with_capacity(poles.len());
    for p in &poles {
        let f = trace.psi_function(*p)?;
        let one = extract_principal_parts(&f, std::slice::from_ref(p), radius, order_cap).ok()?;
        entries.extend(one.entries);
    }
    PrincipalParts::new(entries).ok()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub shift: C64,
    /// Largest |psi_{d-w}(z) - psi_d(z+w)| / (1 + |psi_d(z+w)|).
    pub deviation: Option<f64>,
    pub samples: usize,
    pub threshold: f64,
    pub refused: Option<String>,
    pub passed: bool,
}

/// |e^a - e^b| / (1 + |e^b|) from logarithms.
pub fn relative_log_deviation(a: C64, b: C64) -> f64 {
    let d = ((a - b).exp() - 1.0).norm();
    d / (1.0 + (-b.re).exp())
}

/// Runs the pipeline on d and on d - w and compares psi on the
/// predecessor regions shared by both runs.
pub fn verify_equivariance(d: &Divisor, w: C64, cfg: &PipelineConfig) -> EquivarianceReport {
    let threshold = 1e-6;
    let refuse = |e: LiftError| EquivarianceReport {
        shift: w,
        deviation: None,
        samples: 0,
        threshold,
        refused: Some(e.to_string()),
        passed: false,
    };
    let a = match weierstrass_pipeline(d, cfg) {
        Ok(t) => t,
        Err(e) => return refuse(e),
    };
    let b = match weierstrass_pipeline(&d.translate(-w), cfg) {
        Ok(t) => t,
        Err(e) => return refuse(e),
    };
    let n = b.top().saturating_sub(1);
    let mut samples = Vec::new();
    for (i, x) in b.viewpoints() {
        let Some(k) = b.toast.locate_index(x, n) else { continue };
        let Some(ka) = a.toast.locate_index(x + w, n) else { continue };
        if a.toast.levels[n].regions[ka].anchor_id != b.toast.levels[n].regions[k].anchor_id {
            continue;
        }
        let region = &b.toast.levels[n].regions[k].region;
        let r = region.min_radius();
        samples.extend(region.interior_points(r / 6.0).into_iter().filter(|z| (z - x).norm() > 1e-6));
        let _ = i;
    }
    let devs: Vec<f64> = samples
        .par_iter()
        .map(|z| match (b.psi(*z), a.psi(*z + w)) {
            (Some(l2), Some(l1)) => relative_log_deviation(l2, l1),
            _ => f64::INFINITY,
        })
        .collect();
    let deviation = devs.iter().copied().fold(0.0, f64::max);
    EquivarianceReport {
        shift: w,
        deviation: Some(deviation),
        samples: samples.len(),
        threshold,
        refused: None,
        passed: !samples.is_empty() && deviation < threshold,
    }
}

/// Sub-mean-value probes of a lifted potential at seeded random centers in
/// the inner window.
pub fn poisson_probes(trace: &LiftingTrace, count: usize, seed: u64) -> Vec<MeanValueProbe> {
    let Base::Poisson(mu) = &trace.base else { return vec![] };
    let inner = trace.toast.inner_window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = c64(rng.random_range(inner.xmin..inner.xmax), rng.random_range(inner.ymin..inner.ymax));
        let r = rng.random_range(0.05..1.0);
        let Some(i) = trace.toast.locate_index(c, trace.top()) else { continue };
        let region = &trace.toast.levels[trace.top()].regions[i].region;
        if !region.contains_with_margin(c, r) {
            continue;
        }
        let patch = &trace.patches[trace.top()][i];
        let mut probe = sub_mean_value(mu, &[c.re, c.im], r);
        let g = |z: C64| patch.gauge(z).re;
        let gm = crate::builders::sphere_mean(2, |x| g(c64(x[0], x[1])), &[c.re, c.im], r);
        probe.center_value += g(c);
        probe.mean += gm;
        probe.slack = probe.mean - probe.center_value;
        out.push(probe);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::divisors::{generate, GenKind, PoleEntry};
    use crate::plane::Window;
    use crate::toast::build_covariant_toast;

    fn single(m: i32) -> Divisor {
        Divisor::new(Window::square(16.0), vec![DivPoint::new(c64(0.0, 0.0), m)]).unwrap()
    }

    #[test]
    fn chain_is_identity_patching() {
        let d = single(1);
        let t = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let tr = lift_weierstrass(&d, &t, &LiftConfig::default()).unwrap();
        for r in &tr.rates {
            assert_eq!(r.value, Some(0.0));
        }
        let z = c64(0.3, 0.4);
        let l0 = tr.psi_n(z, 0).unwrap();
        assert!((tr.psi(z).unwrap() - l0).norm() < 1e-12);
    }

    #[test]
    fn mittag_leffler_chain_and_pair() {
        let pp = PrincipalParts::new(vec![PoleEntry::new(c64(0.0, 0.0), &[c64(1.0, 0.0)])]).unwrap();
        let t = build_covariant_toast(&single(-1), 3, 1.0, 4.0).unwrap();
        let tr = lift_mittag_leffler(&pp, &t, &LiftConfig::default()).unwrap();
        let z = c64(0.3, -0.2);
        assert!((tr.psi(z).unwrap() - 1.0 / z).norm() < 1e-12);
        let two = PrincipalParts::new(vec![
            PoleEntry::new(c64(1.0, 0.0), &[c64(1.0, 0.0)]),
            PoleEntry::new(c64(-1.0, 0.0), &[c64(1.0, 0.0)]),
        ])
        .unwrap();
        let d = Divisor::new(
            Window::square(64.0),
            vec![DivPoint::new(c64(1.0, 0.0), -1), DivPoint::new(c64(-1.0, 0.0), -1)],
        )
        .unwrap();
        let t = build_toast(&d, &PipelineConfig::lacunary(3).toast).unwrap();
        let tr = lift_mittag_leffler(&two, &t, &LiftConfig::default()).unwrap();
        let back = recovered_principal_parts(&tr, 0.5, 4).unwrap();
        assert!(back.max_coeff_difference(&two, 1e-12) < 1e-8);
    }

    #[test]
    fn poisson_single_atom() {
        let d = single(1);
        let mu = Potential::from_divisor(&d).unwrap();
        let t = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let tr = lift_poisson_2d(&mu, &t, &LiftConfig::default()).unwrap();
        let z = c64(2.0, 1.0);
        assert!((tr.psi(z).unwrap().re - z.norm().ln() / (2.0 * PI)).abs() < 1e-14);
        assert!(poisson_probes(&tr, 20, 1).iter().all(|p| p.slack > -1e-9));
    }

    #[test]
    fn equivariance_zero_shift_and_lattice() {
        let lat = generate(GenKind::PeriodicLattice { spacing: 1.0 }, Window::square(16.0), 0).unwrap();
        let rep = verify_equivariance(&lat, c64(0.37, 1.2), &PipelineConfig::default());
        assert!(rep.refused.is_some() && !rep.passed);
    }
}
