//! The verification suite: one group of checks per acceptance criterion,
//! each with its CSV tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use equilift::builders::{cauchy_transform, dbar_counterexample, dbar_residual, decay_bound, GridFunction, Potential};
use equilift::divisors::{generate, DivPoint, Divisor, GenKind, PoleEntry, PrincipalParts};
use equilift::lifting::{
    lift_mittag_leffler, lift_poisson_2d, poisson_probes, recovered_principal_parts, verify_divisor_recovery,
    verify_equivariance, weierstrass_pipeline, LiftError, LiftingTrace, PipelineConfig,
};
use equilift::periodic::{
    canonical_anchor, full_dim_rigidity_demo, green_normalization_defect, green_periodicity_check,
    periodic_representation_check, riesz_growth_demo, strip_max_principle_check, yosida_cauchy_defect,
    yosida_normality_table, AnchorRange, Bump, LatticeGreen, PeriodicEntire, PeriodicError, Side, TrigPoly,
    YosidaProduct,
};
use equilift::plane::{CompactRegion, Disk, Window};
use equilift::toast::{
    build_covariant_toast, build_toast, verify_axioms, AxiomStatus, ToastError, ToastForest, ToastLevel, ToastRegion,
};
use equilift::{c64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::report::{csv_bytes, Check, Report};
use crate::tolerances::*;

/// Checks and tables of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct Group {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub tables: Vec<(String, Vec<u8>)>,
    /// Wall time, kept out of every written file.
    pub seconds: f64,
}

impl Group {
    fn new(id: u8, title: &'static str) -> Self {
        Group { id, title, checks: Vec::new(), tables: Vec::new(), seconds: 0.0 }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) {
        self.tables.push((name.to_string(), csv_bytes(rows)));
    }

    /// One-line account of the group for logs.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            format!("{} checks passed", self.checks.len())
        } else {
            format!("{} of {} checks failed: {}", failed.len(), self.checks.len(), failed.join(", "))
        }
    }
}

fn timed(id: u8, title: &'static str, body: impl FnOnce(&mut Group)) -> Group {
    let t = Instant::now();
    let mut g = Group::new(id, title);
    body(&mut g);
    g.seconds = t.elapsed().as_secs_f64();
    g
}

// 1. Divergence of the transform on the counterexample family.

pub fn dbar_group() -> Group {
    timed(1, "d-bar divergence table", |g| {
        let ns: Vec<u32> = (5..=20).collect();
        match dbar_counterexample(&ns, DBAR_TABLE_H) {
            Ok(rows) => {
                for r in &rows {
                    g.checks.push(Check::at_least(format!("dbar.n{:02}.computed", r.n), r.computed, r.bound));
                    g.checks.push(Check::at_least(format!("dbar.n{:02}.normalized", r.n), r.normalized, r.bound));
                }
                if let Some(r) = rows.iter().find(|r| r.n == 10) {
                    g.checks.push(Check::relative("dbar.n10.core", r.core, 100.0 * PI, DBAR_CORE_REL));
                }
                g.table("dbar.csv", &rows);
            }
            Err(e) => g.checks.push(Check::flag("dbar.table", false, json!({ "error": e.to_string() }))),
        }
    })
}

// 2. Equivariant Weierstrass pipeline.

#[derive(Serialize)]
struct LiftRow {
    seed: u64,
    points: usize,
    max_degree: usize,
    worst_rate_ratio: f64,
    zeros_checked: usize,
    zeros_numeric: usize,
    zeros_unresolved: usize,
    position_error: f64,
    equivariance_deviation: f64,
}

#[derive(Serialize)]
pub struct RateRow {
    pub seed: u64,
    pub level: usize,
    pub viewpoint_re: f64,
    pub viewpoint_im: f64,
    pub compact: String,
    pub value: Option<f64>,
    pub bound: f64,
    pub certified: bool,
}

/// Rate certificates and the ladder of a trace as flat rows.
pub fn rate_rows(seed: u64, t: &LiftingTrace) -> Vec<RateRow> {
    t.rates
        .iter()
        .chain(&t.ladder)
        .map(|r| RateRow {
            seed,
            level: r.level,
            viewpoint_re: r.viewpoint.re,
            viewpoint_im: r.viewpoint.im,
            compact: r.compact.clone(),
            value: r.value,
            bound: r.bound,
            certified: r.certified,
        })
        .collect()
}

pub fn lift_divisor(seed: u64) -> Divisor {
    generate(GenKind::Poisson { intensity: LIFT_INTENSITY }, Window::square(LIFT_HALF_WIDTH), seed)
        .expect("valid generator parameters")
}

/// Recovery, rate and equivariance checks for one divisor.
pub fn weierstrass_checks(d: &Divisor, cfg: &PipelineConfig, shift: C64, tag: &str) -> (Vec<Check>, Option<LiftingTrace>) {
    let mut checks = Vec::new();
    let trace = match weierstrass_pipeline(d, cfg) {
        Ok(t) => t,
        Err(e) => {
            checks.push(Check::flag(format!("{tag}.pipeline"), false, json!({ "error": e.to_string() })));
            return (checks, None);
        }
    };
    let rec = verify_divisor_recovery(&trace);
    checks.push(
        Check::at_most(format!("{tag}.multiplicity-mismatches"), rec.multiplicity_mismatches as f64, 0.0)
            .with_witness(json!(rec)),
    );
    checks.push(Check::below(format!("{tag}.zero-position"), rec.max_position_error, ZERO_POSITION_TOL));
    let worst = trace
        .rates
        .iter()
        .filter(|r| r.certified)
        .map(|r| r.value.map_or(f64::INFINITY, |v| v / r.bound))
        .fold(0.0, f64::max);
    let bad: Vec<_> = trace.rates.iter().filter(|r| r.certified && !r.holds()).collect();
    checks.push(Check::below(format!("{tag}.rate-ratio"), worst, 1.0).with_witness(json!(bad)));
    let eq = verify_equivariance(d, shift, cfg);
    checks.push(
        Check::below(format!("{tag}.equivariance"), eq.deviation.unwrap_or(f64::INFINITY), EQUIVARIANCE_TOL)
            .with_witness(json!(eq)),
    );
    (checks, Some(trace))
}

pub fn weierstrass_group(seed: u64) -> Group {
    timed(2, "equivariant Weierstrass end-to-end", |g| {
        let cfg = PipelineConfig::lacunary(LIFT_TOP_LEVEL);
        let shift = c64(EQUIVARIANCE_SHIFT.0, EQUIVARIANCE_SHIFT.1);
        let mut rows = Vec::new();
        let mut rates = Vec::new();
        let runs: Vec<_> = (seed..seed + LIFT_SEEDS)
            .into_par_iter()
            .map(|s| {
                let d = lift_divisor(s);
                let (checks, trace) = weierstrass_checks(&d, &cfg, shift, &format!("lift.seed{s}"));
                (s, d, checks, trace)
            })
            .collect();
        for (s, d, checks, trace) in runs {
            let value = |name: &str| checks.iter().find(|c| c.name.ends_with(name)).and_then(|c| c.measured);
            if let Some(t) = &trace {
                let rec = verify_divisor_recovery(t);
                rows.push(LiftRow {
                    seed: s,
                    points: d.len(),
                    max_degree: t.records.iter().map(|r| r.degree).max().unwrap_or(0),
                    worst_rate_ratio: value("rate-ratio").unwrap_or(f64::NAN),
                    zeros_checked: rec.points,
                    zeros_numeric: rec.numeric,
                    zeros_unresolved: rec.unresolved,
                    position_error: rec.max_position_error,
                    equivariance_deviation: value("equivariance").unwrap_or(f64::NAN),
                });
                rates.extend(rate_rows(s, t));
            }
            g.checks.extend(checks);
        }
        g.table("lift.csv", &rows);
        g.table("rates.csv", &rates);
    })
}

// 3. Refusal of periodic inputs and canonical anchors.

/// Rows k + x_j + i y_j: invariant under the integer translations.
pub fn one_periodic_divisor(window: Window, seed: u64) -> Divisor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    let mut y = window.ymin + 0.5;
    while y < window.ymax {
        let x0: f64 = rng.random_range(0.0..1.0);
        let mut k = window.xmin.floor() as i64;
        while (k as f64) < window.xmax {
            let x = k as f64 + x0;
            if x >= window.xmin && x < window.xmax {
                pts.push(DivPoint::new(c64(x, y), 1));
            }
            k += 1;
        }
        y += rng.random_range(1.3..2.7);
    }
    Divisor::new(window, pts).expect("points inside the window")
}

fn refused(r: &Result<LiftingTrace, LiftError>) -> Option<String> {
    match r {
        Err(LiftError::Toast(ToastError::NonFreeInput(m))) => Some(m.clone()),
        _ => None,
    }
}

#[derive(Serialize)]
struct AnchorRow {
    fixture: &'static str,
    k: Option<u64>,
    s0: Option<f64>,
    side: Option<Side>,
    grows: Option<bool>,
    error: Option<String>,
}

pub fn anchor_fixtures() -> Vec<(&'static str, PeriodicEntire, Option<Side>)> {
    vec![
        ("exp(2 pi i z)", PeriodicEntire::exp_2pi_i(), Some(Side::Smallest)),
        ("exp(-2 pi i z)", PeriodicEntire::new(vec![(-1, c64(1.0, 0.0))]), Some(Side::Largest)),
        ("sin(2 pi z)", PeriodicEntire::sin_2pi(), Some(Side::Smallest)),
        ("3 exp(2 pi i z) + 1/2", PeriodicEntire::new(vec![(1, c64(3.0, 0.0)), (0, c64(0.5, 0.0))]), Some(Side::Smallest)),
        (
            "2 cos(2 pi z) + exp(4 pi i z)/3",
            PeriodicEntire::new(vec![(1, c64(1.0, 0.0)), (-1, c64(1.0, 0.0)), (2, c64(1.0 / 3.0, 0.0))]),
            Some(Side::Smallest),
        ),
        ("5", PeriodicEntire::constant(c64(5.0, 0.0)), None),
    ]
}

pub fn anchor_rows(g: &mut Group) {
    anchor_rows_in(g, AnchorRange::default())
}

pub fn anchor_rows_in(g: &mut Group, range: AnchorRange) {
    let mut rows = Vec::new();
    for (name, f, side) in anchor_fixtures() {
        let res = canonical_anchor(&f, range);
        match (&res, side) {
            (Ok(a), Some(want)) => {
                g.checks.push(Check::flag(
                    format!("anchor.{name}.side"),
                    a.side == want && a.grows,
                    json!({ "side": a.side, "grows": a.grows, "s0": a.s0 }),
                ));
            }
            (Err(PeriodicError::ConstantInput), None) => g.checks.push(Check::flag(format!("anchor.{name}.refused"), true, json!(null))),
            (r, _) => g.checks.push(Check::flag(
                format!("anchor.{name}"),
                false,
                json!({ "result": format!("{:?}", r.as_ref().map(|a| (a.k, a.s0, a.side))) }),
            )),
        }
        rows.push(match res {
            Ok(a) => AnchorRow { fixture: name, k: Some(a.k), s0: Some(a.s0), side: Some(a.side), grows: Some(a.grows), error: None },
            Err(e) => AnchorRow { fixture: name, k: None, s0: None, side: None, grows: None, error: Some(e.to_string()) },
        });
    }
    g.table("anchors.csv", &rows);
}

pub fn periodic_group() -> Group {
    timed(3, "periodic refusal and canonical anchors", |g| {
        let cfg = PipelineConfig::lacunary(LIFT_TOP_LEVEL);
        let w = Window::square(LIFT_HALF_WIDTH);
        let inputs = [
            ("square-lattice", generate(GenKind::PeriodicLattice { spacing: 1.0 }, w, 0).expect("lattice")),
            ("coarse-lattice", generate(GenKind::PeriodicLattice { spacing: 2.5 }, w, 0).expect("lattice")),
            ("one-periodic", one_periodic_divisor(w, 3)),
        ];
        for (name, d) in inputs {
            let a = refused(&weierstrass_pipeline(&d, &cfg));
            let b = refused(&weierstrass_pipeline(&d, &cfg));
            let ok = a.is_some() && a == b;
            g.checks.push(Check::flag(format!("refusal.{name}"), ok, json!({ "first": a, "second": b })));
            let eq = verify_equivariance(&d, c64(EQUIVARIANCE_SHIFT.0, EQUIVARIANCE_SHIFT.1), &cfg);
            g.checks.push(Check::flag(format!("refusal.{name}.recorded"), eq.refused.is_some(), json!(eq)));
        }
        anchor_rows(g);
    })
}

// 4. Toast axioms.

pub fn toast_corpus() -> Vec<(String, Divisor)> {
    let w = Window::square(LIFT_HALF_WIDTH);
    let mut out = Vec::new();
    for s in 0..4 {
        out.push((format!("poisson-0.5-{s}"), generate(GenKind::Poisson { intensity: 0.5 }, w, s).expect("poisson")));
    }
    out.push(("poisson-1.0-7".into(), generate(GenKind::Poisson { intensity: 1.0 }, w, 7).expect("poisson")));
    for s in 0..2 {
        out.push((
            format!("jittered-{s}"),
            generate(GenKind::JitteredLattice { spacing: 1.5, jitter: 0.3 }, w, s).expect("jittered"),
        ));
    }
    out
}

#[derive(Serialize)]
struct ToastRow {
    divisor: String,
    schedule: &'static str,
    regions: String,
    axioms: String,
    covariance: Option<f64>,
}

fn hand_level(n: usize, regions: Vec<(C64, f64)>) -> ToastLevel {
    ToastLevel {
        n,
        base_radius: 1.0,
        marker_radius: 1.0,
        regions: regions
            .into_iter()
            .enumerate()
            .map(|(i, (a, r))| ToastRegion {
                anchor: a,
                anchor_id: i,
                region: CompactRegion::unchecked(vec![Disk::new(a, r)]).expect("positive radius"),
                children: vec![],
                repeated: false,
            })
            .collect(),
    }
}

/// Two overlapping level-0 regions, and a level-1 region straddling a
/// level-0 region.
pub fn hand_built_violations() -> [(u8, ToastForest); 2] {
    let o = c64(0.0, 0.0);
    let overlap = ToastForest::from_levels(
        Window::square(4.0),
        0.5,
        vec![hand_level(0, vec![(o, 1.0), (c64(1.0, 0.0), 1.0)]), hand_level(1, vec![(o, 10.0)])],
    );
    let q = c64(3.0, 0.0);
    let straddle = ToastForest::from_levels(
        Window::square(4.0),
        0.5,
        vec![hand_level(0, vec![(o, 1.0), (q, 1.0)]), hand_level(1, vec![(o, 3.0), (c64(20.0, 0.0), 1.0)])],
    );
    [(1, overlap), (2, straddle)]
}

pub fn toast_group() -> Group {
    timed(4, "toast axioms", |g| {
        let shift = c64(EQUIVARIANCE_SHIFT.0, EQUIVARIANCE_SHIFT.1);
        let lac = PipelineConfig::lacunary(LIFT_TOP_LEVEL).toast;
        let mut rows = Vec::new();
        for (name, d) in toast_corpus() {
            type Builder<'a> = Box<dyn Fn(&Divisor) -> Result<ToastForest, ToastError> + 'a>;
            let schedules: [(&str, Builder); 2] = [
                ("lacunary", Box::new(|d: &Divisor| build_toast(d, &lac))),
                ("geometric", Box::new(|d: &Divisor| build_covariant_toast(d, 3, 1.0, 4.0))),
            ];
            for (sched, build) in schedules {
                let tag = format!("toast.{name}.{sched}");
                let t = match build(&d) {
                    Ok(t) => t,
                    Err(e) => {
                        g.checks.push(Check::flag(format!("{tag}.build"), false, json!({ "error": e.to_string() })));
                        continue;
                    }
                };
                let rep = verify_axioms(&t, &t.window);
                let axioms = [1u8, 2, 3, 5, 6];
                g.checks.push(Check::flag(format!("{tag}.axioms"), rep.passes(&axioms), json!(rep.checks)));
                let cov = build(&d.translate(-shift)).ok().and_then(|b| b.structural_distance(&t.translate(-shift)));
                g.checks.push(Check::at_most(format!("{tag}.covariance"), cov.unwrap_or(f64::INFINITY), 1e-12));
                rows.push(ToastRow {
                    divisor: name.clone(),
                    schedule: sched,
                    regions: t.levels.iter().map(|l| l.regions.len().to_string()).collect::<Vec<_>>().join("/"),
                    axioms: rep.checks.iter().map(|c| format!("{}:{:?}", c.axiom, c.status)).collect::<Vec<_>>().join(" "),
                    covariance: cov,
                });
            }
        }
        for (axiom, t) in hand_built_violations() {
            let rep = verify_axioms(&t, &t.window);
            let c = &rep.checks[axiom as usize - 1];
            let ok = c.status == AxiomStatus::Fail && c.witness.is_some();
            g.checks.push(Check::flag(format!("toast.violation.axiom{axiom}"), ok, json!(c)));
        }
        g.table("toast.csv", &rows);
    })
}

// 5. Mittag-Leffler round trip.

pub fn ml_fixtures(seed: u64) -> Vec<(&'static str, PrincipalParts)> {
    let one = c64(1.0, 0.0);
    let pp = |v: Vec<PoleEntry>| PrincipalParts::new(v).expect("distinct poles");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = Vec::new();
    while random.len() < 6 {
        let p = c64(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        if random.iter().any(|e: &PoleEntry| (e.pole() - p).norm() < 1.5) {
            continue;
        }
        let order = rng.random_range(1..=3);
        let cs: Vec<C64> = (0..order).map(|_| c64(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        random.push(PoleEntry::new(p, &cs));
    }
    vec![
        ("1/z", pp(vec![PoleEntry::new(c64(0.0, 0.0), &[one])])),
        ("2z/(z^2-1)", pp(vec![PoleEntry::new(c64(1.0, 0.0), &[one]), PoleEntry::new(c64(-1.0, 0.0), &[one])])),
        (
            "mixed orders",
            pp(vec![
                PoleEntry::new(c64(0.0, 0.5), &[c64(3.0, 0.0), one]),
                PoleEntry::new(c64(2.0, 1.0), &[c64(-1.0, 0.0)]),
            ]),
        ),
        ("seeded", pp(random)),
    ]
}

/// Pole divisor of a set of principal parts: each pole with minus its order.
pub fn pole_divisor(pp: &PrincipalParts, window: Window) -> Divisor {
    let pts = pp.entries.iter().map(|e| DivPoint::new(e.pole(), -(e.coefficients().len() as i32))).collect();
    Divisor::new(window, pts).expect("poles inside the window")
}

#[derive(Serialize)]
struct MlRow {
    fixture: &'static str,
    poles: usize,
    max_coeff_difference: f64,
}

pub fn ml_group(seed: u64) -> Group {
    timed(5, "Mittag-Leffler round trip", |g| {
        let cfg = PipelineConfig::lacunary(LIFT_TOP_LEVEL);
        let mut rows = Vec::new();
        for (name, pp) in ml_fixtures(seed) {
            let d = pole_divisor(&pp, Window::square(LIFT_HALF_WIDTH));
            let diff = build_toast(&d, &cfg.toast)
                .map_err(LiftError::from)
                .and_then(|t| lift_mittag_leffler(&pp, &t, &cfg.lift))
                .map_err(|e| e.to_string())
                .and_then(|tr| {
                    recovered_principal_parts(&tr, ML_CONTOUR_RADIUS, ML_ORDER_CAP).ok_or_else(|| "extraction failed".to_string())
                })
                .map(|back| back.max_coeff_difference(&pp, 1e-12));
            match diff {
                Ok(v) => {
                    g.checks.push(Check::at_most(format!("ml.{name}"), v, ML_COEFF_TOL));
                    rows.push(MlRow { fixture: name, poles: pp.entries.len(), max_coeff_difference: v });
                }
                Err(e) => g.checks.push(Check::flag(format!("ml.{name}"), false, json!({ "error": e }))),
            }
        }
        g.table("mittag_leffler.csv", &rows);
    })
}

// 6. Cauchy transform inverts d-bar.

pub fn cauchy_test_fn(z: C64) -> C64 {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        c64(0.0, 0.0)
    } else {
        (1.0 - r2).powi(4) * (1.0 + 0.3 * z)
    }
}

#[derive(Serialize)]
struct CauchyRow {
    kind: &'static str,
    h: f64,
    re: f64,
    im: f64,
    value: f64,
    bound: f64,
}

pub fn cauchy_group() -> Group {
    timed(6, "Cauchy transform as d-bar inverse", |g| {
        let probes: Vec<C64> = (0..12).map(|k| C64::from_polar(0.08 * k as f64, 2.4 * k as f64)).collect();
        let window = Window::square(1.5);
        let mut rows = Vec::new();
        let res: Result<Vec<f64>, _> =
            [CAUCHY_H, CAUCHY_H / 2.0].iter().map(|&h| dbar_residual(cauchy_test_fn, window, h, &probes)).collect();
        match res {
            Ok(r) => {
                g.checks.push(Check::below("cauchy.residual", r[0], CAUCHY_RESIDUAL));
                g.checks.push(Check::at_least("cauchy.halving-rate", r[0] / r[1], CAUCHY_HALVING_RATE));
                for (h, v) in [CAUCHY_H, CAUCHY_H / 2.0].iter().zip(&r) {
                    rows.push(CauchyRow { kind: "residual", h: *h, re: f64::NAN, im: f64::NAN, value: *v, bound: CAUCHY_RESIDUAL });
                }
            }
            Err(e) => g.checks.push(Check::flag("cauchy.residual", false, json!({ "error": e.to_string() }))),
        }
        let far: Vec<C64> = (0..CAUCHY_FAR_PROBES)
            .map(|k| C64::from_polar(3.0 + 0.5 * k as f64, 0.7 + 1.9 * k as f64))
            .collect();
        match GridFunction::from_fn(window, CAUCHY_H, cauchy_test_fn).and_then(|f| {
            let v = cauchy_transform(&f, &far)?;
            Ok(far.iter().zip(v).map(|(z, v)| (*z, v.norm(), decay_bound(&f, *z))).collect::<Vec<_>>())
        }) {
            Ok(vals) => {
                let worst = vals.iter().map(|(_, v, b)| v / b).fold(0.0, f64::max);
                g.checks.push(Check::at_most("cauchy.decay", worst, 1.0));
                rows.extend(vals.into_iter().map(|(z, v, b)| CauchyRow { kind: "decay", h: CAUCHY_H, re: z.re, im: z.im, value: v, bound: b }));
            }
            Err(e) => g.checks.push(Check::flag("cauchy.decay", false, json!({ "error": e.to_string() }))),
        }
        g.table("cauchy.csv", &rows);
    })
}

// 7. Lattice Green's function.

#[derive(Serialize)]
pub struct GreenRow {
    pub check: &'static str,
    pub radius: f64,
    pub h: f64,
    pub value: f64,
    pub tail_bound: f64,
}

/// Periodicity, representation and normalization checks for a lattice
/// Green's function. The non-generator check applies when e2 is not a
/// lattice vector of a rank-one lattice along e1.
pub fn green_checks(g1: &LatticeGreen) -> Result<(Vec<Check>, Vec<GreenRow>), PeriodicError> {
    let radius = g1.radius;
    let g2 = g1.with_radius(2.0 * radius)?;
    let x = [0.3, 0.4, 0.2, 0.1];
    let x = &x[..g1.dim];
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut first = None;
    for (i, a) in g1.generators.iter().enumerate() {
        let d1 = green_periodicity_check(g1, x, a)?;
        let d2 = green_periodicity_check(&g2, x, a)?;
        checks.push(Check::at_least(format!("green.doubling-rate.g{i}"), d1.deviation / d2.deviation, GREEN_DOUBLING_RATE));
        rows.push(GreenRow { check: "periodicity generator", radius, h: f64::NAN, value: d1.deviation, tail_bound: d1.tail_bound });
        rows.push(GreenRow { check: "periodicity generator", radius: 2.0 * radius, h: f64::NAN, value: d2.deviation, tail_bound: d2.tail_bound });
        first.get_or_insert(d2.deviation);
    }
    let mut e2 = vec![0.0; g1.dim];
    e2[1] = 1.0;
    let along_e1 = g1.generators.len() == 1 && g1.generators[0].iter().skip(1).all(|c| *c == 0.0);
    if let (true, Some(gen_dev)) = (along_e1, first) {
        let n2 = green_periodicity_check(&g2, x, &e2)?;
        checks.push(Check::at_least("green.non-generator", n2.deviation / gen_dev, GREEN_NON_GENERATOR_FACTOR));
        rows.push(GreenRow { check: "periodicity non-generator", radius: 2.0 * radius, h: f64::NAN, value: n2.deviation, tail_bound: n2.tail_bound });
    }
    if g1.dim == 3 {
        let bump = Bump { radius: 0.375 };
        let h = GREEN_REPRESENTATION_H;
        let r1 = periodic_representation_check(g1, bump, &[0.0; 3], h)?;
        let r2 = periodic_representation_check(g1, bump, &[0.0; 3], h / 2.0)?;
        let far = periodic_representation_check(g1, bump, &[0.0, 3.0, 0.0], h)?;
        checks.push(Check::below("green.representation", r1.residual, GREEN_REPRESENTATION_RESIDUAL));
        checks.push(Check::at_least("green.representation-rate", r1.residual / r2.residual, GREEN_QUARTER_RATE));
        checks.push(Check::below("green.far-probe", far.residual, GREEN_REPRESENTATION_RESIDUAL));
        rows.push(GreenRow { check: "representation center", radius, h, value: r1.residual, tail_bound: f64::NAN });
        rows.push(GreenRow { check: "representation center", radius, h: h / 2.0, value: r2.residual, tail_bound: f64::NAN });
        rows.push(GreenRow { check: "representation far", radius, h, value: far.residual, tail_bound: f64::NAN });
    }
    let norm = green_normalization_defect(g1, 0.1, 0.2);
    checks.push(Check::below("green.normalization", norm, 1e-6));
    rows.push(GreenRow { check: "normalization", radius, h: f64::NAN, value: norm, tail_bound: f64::NAN });
    Ok((checks, rows))
}

pub fn green_group() -> Group {
    timed(7, "lattice Green's function", |g| match LatticeGreen::z_e1(GREEN_RADIUS).and_then(|l| green_checks(&l)) {
        Ok((checks, rows)) => {
            g.checks.extend(checks);
            g.table("green.csv", &rows);
        }
        Err(e) => g.checks.push(Check::flag("green", false, json!({ "error": e.to_string() }))),
    })
}

// 8. Growth, rigidity and strip demonstrations.

#[derive(Serialize)]
struct StripRow {
    fixture: &'static str,
    boundary_max: f64,
    interior_max: f64,
    dbar_max: f64,
    passed: bool,
}

type StripFixture = (&'static str, Box<dyn Fn(C64) -> C64 + Sync>, bool);

pub fn strip_fixtures() -> Vec<StripFixture> {
    vec![
        ("exp(iz)", Box::new(|z: C64| (c64(0.0, 1.0) * z).exp()), true),
        ("constant 2+i", Box::new(|_| c64(2.0, 1.0)), true),
        ("1/(z-5i)", Box::new(|z: C64| 1.0 / (z - c64(0.0, 5.0))), true),
        ("exp(-z^2)", Box::new(|z: C64| (-z * z).exp()), true),
        ("Im z", Box::new(|z: C64| c64(z.im, 0.0)), false),
    ]
}

pub fn strip_rows(g: &mut Group) {
    let mut rows = Vec::new();
    for (name, f, expect) in strip_fixtures() {
        let r = strip_max_principle_check(f, -1.0, 1.0, 4.0, None);
        g.checks.push(Check::flag(format!("strip.{name}"), r.passed == expect, json!(r)));
        rows.push(StripRow {
            fixture: name,
            boundary_max: r.boundary_max,
            interior_max: r.interior_max,
            dbar_max: r.dbar_max,
            passed: r.passed,
        });
    }
    g.table("strip.csv", &rows);
}

pub fn riesz_checks(g: &mut Group) {
    let rows = riesz_growth_demo(5.0, 40.0, 0.5);
    let at = |t: f64| rows.iter().find(|r| r.t == t);
    if let (Some(r10), Some(r20), Some(last)) = (at(10.0), at(20.0), rows.last()) {
        g.checks.push(Check::relative("riesz.count-10", r10.count as f64, 317.0, 0.0));
        g.checks.push(Check::relative("riesz.count-20", r20.count as f64, 1257.0, 0.0));
        g.checks.push(Check::relative("riesz.ratio-20", r20.ratio, PI, RIESZ_PI_REL));
        g.checks.push(Check::at_least("riesz.partial-5-40", last.partial_integral, RIESZ_PARTIAL_MIN));
    }
    g.table("riesz.csv", &rows);
}

#[derive(Serialize)]
struct RigidityRow {
    fixture: String,
    volume_integral: f64,
    boundary_flux: f64,
    residual: f64,
}

pub fn rigidity_rows(g: &mut Group, seed: u64) {
    let fixtures = vec![
        ("cos 2 pi x1".to_string(), TrigPoly { dim: 2, terms: vec![(vec![1, 0], 1.0, 0.0)] }),
        ("cos 2 pi x1 cos 2 pi x2".to_string(), TrigPoly { dim: 2, terms: vec![(vec![1, 1], 0.5, 0.0), (vec![1, -1], 0.5, 0.0)] }),
        (format!("random d=3 seed {seed}"), TrigPoly::random(3, 3, 8, seed)),
    ];
    let mut rows = Vec::new();
    for (name, u) in fixtures {
        let r = full_dim_rigidity_demo(&u, 16);
        g.checks.push(Check::below(format!("rigidity.{name}"), r.residual, RIGIDITY_RESIDUAL));
        rows.push(RigidityRow { fixture: name, volume_integral: r.volume_integral, boundary_flux: r.boundary_flux, residual: r.residual });
    }
    g.table("rigidity.csv", &rows);
}

pub fn demos_group(seed: u64) -> Group {
    timed(8, "growth, rigidity and strip demonstrations", |g| {
        riesz_checks(g);
        rigidity_rows(g, seed);
        strip_rows(g);
    })
}

// Supplementary: products of periodic factors and the planar potential.

#[derive(Serialize)]
pub struct YosidaRow {
    pub kind: &'static str,
    pub index: i64,
    pub value: f64,
    pub bound: f64,
}

pub fn yosida_rows(n: i64, seed: u64) -> Result<(Vec<Check>, Vec<YosidaRow>), PeriodicError> {
    let f = YosidaProduct::seeded(n, 0.2, seed)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let z = c64(0.123, 0.456);
    let per = (f.eval(z + 1.0) - f.eval(z)).norm() / f.eval(z).norm();
    checks.push(Check::below("yosida.period", per, 1e-10));
    rows.push(YosidaRow { kind: "period", index: 0, value: per, bound: 1e-10 });
    for k in 2..n {
        let v = yosida_cauchy_defect(&f, k);
        let b = 10.0 * (-2.0 * PI * k as f64).exp();
        checks.push(Check::below(format!("yosida.cauchy-{k}"), v, b));
        rows.push(YosidaRow { kind: "cauchy", index: k, value: v, bound: b });
    }
    let table = yosida_normality_table(&f, -(n - 2)..=(n - 3));
    let sup = table.iter().map(|r| r.sup_abs).fold(0.0, f64::max);
    let inf = table.iter().map(|r| r.inf_abs).fold(f64::INFINITY, f64::min);
    checks.push(Check::flag("yosida.normal", sup.is_finite() && inf > 0.0, json!(table)));
    rows.extend(table.iter().flat_map(|r| {
        [
            YosidaRow { kind: "sup", index: r.row, value: r.sup_abs, bound: f64::NAN },
            YosidaRow { kind: "inf", index: r.row, value: r.inf_abs, bound: f64::NAN },
        ]
    }));
    Ok((checks, rows))
}

#[derive(Serialize)]
pub struct ProbeRow {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub center_value: f64,
    pub mean: f64,
    pub slack: f64,
}

/// Lifted planar potential with sub-mean-value probes.
pub fn poisson_checks(d: &Divisor, cfg: &PipelineConfig, seed: u64) -> Result<(Vec<Check>, Vec<ProbeRow>), String> {
    let mu = Potential::from_divisor(d).map_err(|e| e.to_string())?;
    let toast = build_toast(d, &cfg.toast).map_err(|e| e.to_string())?;
    let tr = lift_poisson_2d(&mu, &toast, &cfg.lift).map_err(|e| e.to_string())?;
    let probes = poisson_probes(&tr, 50, seed);
    let worst = probes.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::at_least("poisson.sub-mean-value", worst, SUBMEAN_SLACK),
        Check::flag("poisson.rates", tr.rates_hold(), json!(tr.rates)),
    ];
    let rows = probes
        .into_iter()
        .map(|p| ProbeRow { x: p.center[0], y: p.center[1], radius: p.radius, center_value: p.center_value, mean: p.mean, slack: p.slack })
        .collect();
    Ok((checks, rows))
}

pub fn supplementary_group(seed: u64) -> Group {
    timed(0, "periodic products and potentials", |g| {
        match yosida_rows(6, seed) {
            Ok((c, rows)) => {
                g.checks.extend(c);
                g.table("yosida.csv", &rows);
            }
            Err(e) => g.checks.push(Check::flag("yosida", false, json!({ "error": e.to_string() }))),
        }
        match poisson_checks(&lift_divisor(seed), &PipelineConfig::lacunary(LIFT_TOP_LEVEL), seed) {
            Ok((c, rows)) => {
                g.checks.extend(c);
                g.table("poisson_probes.csv", &rows);
            }
            Err(e) => g.checks.push(Check::flag("poisson", false, json!({ "error": e }))),
        }
    })
}

/// Everything the suite produces: criterion groups plus the written files.
pub struct SuiteOutput {
    pub groups: Vec<Group>,
    pub files: BTreeMap<String, Vec<u8>>,
    pub report: Report,
}

pub fn run_suite(seed: u64, command: Vec<String>) -> SuiteOutput {
    let groups = vec![
        dbar_group(),
        weierstrass_group(seed),
        periodic_group(),
        toast_group(),
        ml_group(seed),
        cauchy_group(),
        green_group(),
        demos_group(seed),
        supplementary_group(seed),
    ];
    let mut report = Report::new(command);
    let mut files = BTreeMap::new();
    for g in &groups {
        let prefix = if g.id == 0 { "s".to_string() } else { format!("c{}", g.id) };
        report.extend(g.checks.iter().cloned().map(|mut c| {
            c.name = format!("{prefix}.{}", c.name);
            c
        }));
        for (name, bytes) in &g.tables {
            files.insert(format!("{prefix}_{name}"), bytes.clone());
        }
    }
    files.insert("summary.json".to_string(), report.to_json().into_bytes());
    SuiteOutput { groups, files, report }
}
