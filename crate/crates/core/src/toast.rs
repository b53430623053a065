//! Shift-covariant hierarchical region covers over a divisor and an
//! executable checker for the seven toast axioms.
//!
//! Anchors are divisor points selected by a local marker rule that looks
//! only at relative positions, so translating the divisor translates the
//! whole forest.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::{detect_stabilizer, Divisor, DivisorError, StabilizerKind};
use crate::plane::{holes, CompactRegion, Disk, Window, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToastError {
    #[error("input is not free: {0}")]
    NonFreeInput(String),
    #[error("level scale {scale} exceeds the window {window}")]
    WindowTooSmall { scale: f64, window: Window },
    #[error("invalid toast parameters: {0}")]
    InvalidParams(String),
    #[error("empty divisor")]
    EmptyDivisor,
}

/// Number of nearest neighbours in a marker signature.
pub const SIGNATURE_LEN: usize = 8;

/// Per-level radii of a toast build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToastParams {
    /// Base disk radius per level.
    pub base_radii: Vec<f64>,
    /// Marker exclusion radius per level.
    pub marker_radii: Vec<f64>,
    /// Radius of the disk every region keeps around its anchor.
    pub u0: f64,
    /// Fraction of the window trimmed on each side to form the inner window.
    pub inner_margin: f64,
    /// Let the top level select a single anchor and grow its base disk to
    /// cover the inner window.
    pub cover_top: bool,
}

impl ToastParams {
    /// Geometric schedule: base radius gamma^n r0, marker radius 2.5 times
    /// the base radius, u0 = r0 / 2, for levels 0..levels.
    pub fn geometric(levels: usize, r0: f64, gamma: f64) -> Self {
        let base_radii: Vec<f64> = (0..levels).map(|n| r0 * gamma.powi(n as i32)).collect();
        let marker_radii = base_radii.iter().map(|b| 2.5 * b).collect();
        ToastParams { base_radii, marker_radii, u0: r0 / 2.0, inner_margin: 0.15, cover_top: true }
    }

    /// Sparse leaves repeated up to one covering top level.
    pub fn lacunary(levels: usize, leaf_radius: f64, leaf_marker: f64, top_radius: f64) -> Self {
        let mut base_radii = vec![leaf_radius; levels];
        let marker_radii = vec![leaf_marker; levels];
        if let Some(t) = base_radii.last_mut() {
            *t = top_radius;
        }
        ToastParams { base_radii, marker_radii, u0: leaf_radius, inner_margin: 0.15, cover_top: true }
    }

    pub fn levels(&self) -> usize {
        self.base_radii.len()
    }

    fn validate(&self) -> Result<(), ToastError> {
        if self.base_radii.is_empty() || self.base_radii.len() != self.marker_radii.len() {
            return Err(ToastError::InvalidParams("need matching, nonempty radius lists".into()));
        }
        let pos = |v: &f64| *v > 0.0 && v.is_finite();
        if !self.base_radii.iter().all(pos) || !self.marker_radii.iter().all(pos) || !pos(&self.u0) {
            return Err(ToastError::InvalidParams("radii must be positive and finite".into()));
        }
        if self.u0 > self.base_radii[0] {
            return Err(ToastError::InvalidParams("u0 exceeds the level-0 base radius".into()));
        }
        if !(0.0..0.5).contains(&self.inner_margin) {
            return Err(ToastError::InvalidParams("inner margin must lie in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// One region of a level, with the indices of the previous-level regions it
/// contains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToastRegion {
    pub anchor: C64,
    /// Index of the anchor in the divisor's point list.
    pub anchor_id: usize,
    pub region: CompactRegion,
    pub children: Vec<usize>,
    /// Copied unchanged from the previous level.
    pub repeated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToastLevel {
    pub n: usize,
    pub base_radius: f64,
    pub marker_radius: f64,
    pub regions: Vec<ToastRegion>,
}

impl ToastLevel {
    pub fn anchors(&self) -> Vec<C64> {
        self.regions.iter().map(|r| r.anchor).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToastForest {
    pub window: Window,
    pub u0: f64,
    pub inner_margin: f64,
    pub levels: Vec<ToastLevel>,
    /// parents[n][i]: index of the level-(n+1) region containing region i
    /// of level n.
    pub parents: Vec<Vec<Option<usize>>>,
}

/// Translation carrying `from` to `to` within one orbit.
pub fn cocycle(from: C64, to: C64) -> C64 {
    to - from
}

/// Smallest gap between two unions of disks (negative when they overlap).
pub fn region_gap(a: &CompactRegion, b: &CompactRegion) -> f64 {
    let mut g = f64::INFINITY;
    for p in a.disks() {
        for q in b.disks() {
            g = g.min((p.center - q.center).norm() - p.radius - q.radius);
        }
    }
    g
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Local signatures: multiplicity, the distances to the nearest neighbours,
/// then the neighbour offsets as (re, im) pairs. Offsets are translation
/// invariant and break ties between mirror-image neighbourhoods.
pub fn signatures(d: &Divisor) -> Vec<Vec<f64>> {
    let pts = d.points();
    (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let z = pts[i].z();
            let mut offs: Vec<(f64, C64)> = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| ((p.z() - z).norm(), p.z() - z))
                .collect();
            offs.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(Ordering::Equal)
                    .then(a.1.re.total_cmp(&b.1.re))
                    .then(a.1.im.total_cmp(&b.1.im))
            });
            offs.truncate(SIGNATURE_LEN);
            let mut s = vec![pts[i].mult as f64];
            s.extend(offs.iter().map(|o| o.0));
            s.extend(offs.iter().flat_map(|o| [o.1.re, o.1.im]));
            s
        })
        .collect()
}

/// Rank of every point by signature (0 = largest) and the sorted order.
fn signature_order(sig: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<usize>), ToastError> {
    let mut order: Vec<usize> = (0..sig.len()).collect();
    order.sort_by(|a, b| lex_cmp(&sig[*b], &sig[*a]).then(a.cmp(b)));
    let mut rank = vec![0; sig.len()];
    for (r, i) in order.iter().enumerate() {
        rank[*i] = r;
    }
    Ok((order, rank))
}

fn signatures_tie(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Points whose signature beats every other point within `radius`, in
/// signature order.
fn marker_anchors(
    z: &[C64],
    sig: &[Vec<f64>],
    order: &[usize],
    rank: &[usize],
    radius: f64,
) -> Result<Vec<usize>, ToastError> {
    let winners: Vec<Result<bool, ToastError>> = (0..z.len())
        .into_par_iter()
        .map(|i| {
            for j in 0..z.len() {
                if j == i || (z[j] - z[i]).norm() >= radius {
                    continue;
                }
                if signatures_tie(&sig[i], &sig[j]) {
                    return Err(ToastError::NonFreeInput(format!(
                        "points {} and {} have identical local signatures",
                        z[i], z[j]
                    )));
                }
                if rank[j] < rank[i] {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect();
    let mut is_anchor = vec![false; z.len()];
    for (i, w) in winners.into_iter().enumerate() {
        is_anchor[i] = w?;
    }
    Ok(order.iter().copied().filter(|i| is_anchor[*i]).collect())
}

fn dedup_disks(disks: &mut Vec<Disk>) {
    let mut out: Vec<Disk> = Vec::with_capacity(disks.len());
    for d in disks.drain(..) {
        if !out.contains(&d) {
            out.push(d);
        }
    }
    *disks = out;
}

/// Cover the holes of a disk union by small disks on the flood-fill grid.
fn fill_holes(disks: &mut Vec<Disk>) {
    let h = disks.iter().map(|d| d.radius).fold(f64::INFINITY, f64::min) / 8.0;
    for z in holes(disks, h) {
        disks.push(Disk::new(z, 0.75 * h));
    }
}

struct LevelInput<'a> {
    n: usize,
    base: f64,
    marker: f64,
    cover: Option<Window>,
    prev: &'a [ToastRegion],
}

fn build_level(
    inp: LevelInput<'_>,
    z: &[C64],
    sig: &[Vec<f64>],
    order: &[usize],
    rank: &[usize],
    u0: f64,
) -> Result<(ToastLevel, Vec<Option<usize>>), ToastError> {
    let gap = u0 / 4.0;
    let anchors = marker_anchors(z, sig, order, rank, inp.marker)?;
    let mut regions: Vec<ToastRegion> = Vec::new();
    let mut claimed: Vec<Option<usize>> = vec![None; inp.prev.len()];
    for a in anchors {
        let c = z[a];
        let mut r = inp.base;
        if let Some(w) = inp.cover {
            let reach = w.corners().iter().map(|k| (k - c).norm()).fold(0.0, f64::max) + u0;
            r = r.max(reach);
        }
        for s in &regions {
            r = r.min(s.region.distance(c) - gap);
        }
        if r < u0 {
            continue;
        }
        // Shrink away from children that cannot be absorbed without
        // touching a senior region, then absorb the rest.
        let met = loop {
            let base = CompactRegion::disk(c, r);
            let mut met = Vec::new();
            let mut limit = r;
            for (i, child) in inp.prev.iter().enumerate() {
                if claimed[i].is_some() || !child.region.meets(&base) {
                    continue;
                }
                if regions.iter().any(|s| region_gap(&s.region, &child.region) < gap) {
                    limit = limit.min(child.region.distance(c) - gap);
                } else {
                    met.push(i);
                }
            }
            if limit < r {
                r = limit;
                if r < u0 {
                    break None;
                }
                continue;
            }
            break Some(met);
        };
        let Some(mut met) = met else { continue };
        let mut disks = vec![Disk::new(c, r)];
        for &i in &met {
            disks.extend_from_slice(inp.prev[i].region.disks());
        }
        dedup_disks(&mut disks);
        let before = disks.len();
        fill_holes(&mut disks);
        if disks.len() > before {
            let filled = CompactRegion::unchecked(disks.clone()).expect("positive radii");
            for (i, child) in inp.prev.iter().enumerate() {
                if claimed[i].is_none() && !met.contains(&i) && child.region.meets(&filled) {
                    met.push(i);
                    disks.extend_from_slice(child.region.disks());
                }
            }
            dedup_disks(&mut disks);
        }
        met.sort_unstable();
        let idx = regions.len();
        for &i in &met {
            claimed[i] = Some(idx);
        }
        regions.push(ToastRegion {
            anchor: c,
            anchor_id: a,
            region: CompactRegion::unchecked(disks).expect("positive radii"),
            children: met,
            repeated: false,
        });
    }
    for (i, child) in inp.prev.iter().enumerate() {
        if claimed[i].is_none() {
            claimed[i] = Some(regions.len());
            regions.push(ToastRegion { children: vec![i], repeated: true, ..child.clone() });
        }
    }
    Ok((ToastLevel { n: inp.n, base_radius: inp.base, marker_radius: inp.marker, regions }, claimed))
}

/// Builds the forest for the divisor's own window.
pub fn build_toast(d: &Divisor, params: &ToastParams) -> Result<ToastForest, ToastError> {
    params.validate()?;
    if d.is_empty() {
        return Err(ToastError::EmptyDivisor);
    }
    if d.len() > 1 {
        match detect_stabilizer(d, 1e-9) {
            Ok(rep) if rep.kind == StabilizerKind::Free => {}
            Ok(rep) => return Err(ToastError::NonFreeInput(format!("stabilizer is {:?}", rep.kind))),
            Err(DivisorError::AmbiguousNearPeriod { candidate, defect }) => {
                return Err(ToastError::NonFreeInput(format!(
                    "near-period {candidate} with defect {defect:.3e}"
                )))
            }
            Err(e) => return Err(ToastError::NonFreeInput(e.to_string())),
        }
    }
    let window = d.window();
    let top = params.levels() - 1;
    let span = window.width().max(window.height());
    if params.base_radii[top] > span {
        return Err(ToastError::WindowTooSmall { scale: params.base_radii[top], window });
    }
    let z = d.locations();
    let sig = signatures(d);
    let (order, rank) = signature_order(&sig)?;
    let inner = window.inner(params.inner_margin);
    let mut levels: Vec<ToastLevel> = Vec::with_capacity(params.levels());
    let mut parents = Vec::new();
    for n in 0..params.levels() {
        let is_top = n == top && params.cover_top;
        let marker = if is_top { params.marker_radii[n].max(2.0 * window.diameter()) } else { params.marker_radii[n] };
        let prev: &[ToastRegion] = levels.last().map(|l| l.regions.as_slice()).unwrap_or(&[]);
        let inp = LevelInput { n, base: params.base_radii[n], marker, cover: is_top.then_some(inner), prev };
        let (level, claimed) = build_level(inp, &z, &sig, &order, &rank, params.u0)?;
        if n > 0 {
            parents.push(claimed);
        }
        levels.push(level);
    }
    Ok(ToastForest { window, u0: params.u0, inner_margin: params.inner_margin, levels, parents })
}

/// Geometric-schedule build with `levels` levels, base radius `r0` and
/// growth factor `gamma`.
pub fn build_covariant_toast(d: &Divisor, levels: usize, r0: f64, gamma: f64) -> Result<ToastForest, ToastError> {
    build_toast(d, &ToastParams::geometric(levels, r0, gamma))
}

/// Containment test for unions of disks: literal disk inclusion first, then
/// boundary sampling (sufficient when the outer region has connected
/// complement).
pub fn region_contains(outer: &CompactRegion, inner: &CompactRegion) -> bool {
    let ob = outer.bbox();
    let ib = inner.bbox();
    let tol = 1e-9 * (1.0 + ob.diameter());
    if ib.xmin < ob.xmin - tol || ib.xmax > ob.xmax + tol || ib.ymin < ob.ymin - tol || ib.ymax > ob.ymax + tol {
        return false;
    }
    if inner.disks().iter().all(|d| outer.disks().contains(d) || outer.disks().iter().any(|e| e.contains_disk(d))) {
        return true;
    }
    let density = 8.0 / inner.min_radius();
    inner
        .boundary_points(density)
        .into_iter()
        .chain(inner.disks().iter().map(|d| d.center))
        .all(|z| outer.disks().iter().any(|e| (z - e.center).norm() <= e.radius + tol))
}

fn interior_contains_point(r: &CompactRegion, z: C64, margin: f64) -> bool {
    r.disks().iter().any(|d| (z - d.center).norm() < d.radius - margin)
}

fn interior_contains_region(outer: &CompactRegion, inner: &CompactRegion) -> bool {
    let density = 8.0 / inner.min_radius();
    let margin = 1e-9 * (1.0 + outer.bbox().diameter());
    inner
        .boundary_points(density)
        .into_iter()
        .chain(inner.disks().iter().map(|d| d.center))
        .all(|z| interior_contains_point(outer, z, margin))
}

impl ToastForest {
    /// Assembles a forest from explicit levels (parents by containment).
    pub fn from_levels(window: Window, u0: f64, levels: Vec<ToastLevel>) -> Self {
        let mut parents = Vec::new();
        for n in 1..levels.len() {
            let p = levels[n - 1]
                .regions
                .iter()
                .map(|child| levels[n].regions.iter().position(|r| region_contains(&r.region, &child.region)))
                .collect();
            parents.push(p);
        }
        ToastForest { window, u0, inner_margin: 0.15, levels, parents }
    }

    pub fn top(&self) -> &ToastLevel {
        self.levels.last().expect("forest has levels")
    }

    pub fn inner_window(&self) -> Window {
        self.window.inner(self.inner_margin)
    }

    /// Index of the level-n region containing `x`.
    pub fn locate_index(&self, x: C64, n: usize) -> Option<usize> {
        self.levels.get(n)?.regions.iter().position(|r| r.region.contains(x))
    }

    /// The anchor of the level-n region containing `x`.
    pub fn locate(&self, x: C64, n: usize) -> Option<C64> {
        self.locate_index(x, n).map(|i| self.levels[n].regions[i].anchor)
    }

    pub fn parent(&self, n: usize, i: usize) -> Option<usize> {
        self.parents.get(n)?.get(i).copied().flatten()
    }

    /// The forest translated by `w`.
    pub fn translate(&self, w: C64) -> ToastForest {
        let mut t = self.clone();
        t.window = t.window.translate(w);
        for l in &mut t.levels {
            for r in &mut l.regions {
                r.anchor += w;
                r.region = r.region.translate(w);
            }
        }
        t
    }

    /// Largest coordinate discrepancy against `other` when the combinatorial
    /// structure agrees (same anchors by index, children, parents, disk
    /// counts); `None` when the structure differs.
    pub fn structural_distance(&self, other: &ToastForest) -> Option<f64> {
        if self.levels.len() != other.levels.len() || self.parents != other.parents {
            return None;
        }
        let mut dev = 0f64;
        for (a, b) in self.levels.iter().zip(&other.levels) {
            if a.regions.len() != b.regions.len() {
                return None;
            }
            for (p, q) in a.regions.iter().zip(&b.regions) {
                if p.anchor_id != q.anchor_id
                    || p.children != q.children
                    || p.repeated != q.repeated
                    || p.region.disks().len() != q.region.disks().len()
                {
                    return None;
                }
                dev = dev.max((p.anchor - q.anchor).norm());
                for (x, y) in p.region.disks().iter().zip(q.region.disks()) {
                    dev = dev.max((x.center - y.center).norm()).max((x.radius - y.radius).abs());
                }
            }
        }
        Some(dev)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomStatus {
    Pass,
    Fail,
    Undetermined,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRef {
    pub level: usize,
    pub index: usize,
    pub anchor: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub regions: Vec<RegionRef>,
    pub point: Option<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: u8,
    pub status: AxiomStatus,
    pub detail: String,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub window: Window,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn status(&self, axiom: u8) -> AxiomStatus {
        self.checks.iter().find(|c| c.axiom == axiom).map(|c| c.status).unwrap_or(AxiomStatus::Undetermined)
    }

    /// True when every listed axiom passes (trivial counts as a pass).
    pub fn passes(&self, axioms: &[u8]) -> bool {
        axioms.iter().all(|a| matches!(self.status(*a), AxiomStatus::Pass | AxiomStatus::Trivial))
    }
}

fn rref(t: &ToastForest, level: usize, index: usize) -> RegionRef {
    RegionRef { level, index, anchor: t.levels[level].regions[index].anchor }
}

fn check(axiom: u8, status: AxiomStatus, detail: impl Into<String>, witness: Option<Witness>) -> AxiomCheck {
    AxiomCheck { axiom, status, detail: detail.into(), witness }
}

fn axiom_disjoint(t: &ToastForest) -> AxiomCheck {
    for (n, l) in t.levels.iter().enumerate() {
        for i in 0..l.regions.len() {
            for j in i + 1..l.regions.len() {
                let (a, b) = (&l.regions[i].region, &l.regions[j].region);
                if a.meets(b) {
                    let point = a
                        .disks()
                        .iter()
                        .flat_map(|p| b.disks().iter().filter(move |q| p.meets(q)).map(move |q| (p, q)))
                        .map(|(p, q)| p.center + (q.center - p.center) * (p.radius / (p.radius + q.radius)))
                        .next();
                    return check(
                        1,
                        AxiomStatus::Fail,
                        format!("level {n}: regions {i} and {j} overlap"),
                        Some(Witness { regions: vec![rref(t, n, i), rref(t, n, j)], point }),
                    );
                }
            }
        }
    }
    check(1, AxiomStatus::Pass, "same-level regions pairwise disjoint", None)
}

fn axiom_coherent(t: &ToastForest) -> AxiomCheck {
    for m in 0..t.levels.len() {
        for n in m + 1..t.levels.len() {
            for (i, a) in t.levels[m].regions.iter().enumerate() {
                for (j, b) in t.levels[n].regions.iter().enumerate() {
                    if a.region.meets(&b.region) && !region_contains(&b.region, &a.region) {
                        return check(
                            2,
                            AxiomStatus::Fail,
                            format!("level {m} region {i} meets but is not inside level {n} region {j}"),
                            Some(Witness { regions: vec![rref(t, m, i), rref(t, n, j)], point: None }),
                        );
                    }
                }
            }
        }
    }
    check(2, AxiomStatus::Pass, "cross-level pairs disjoint or nested", None)
}

fn axiom_layered(t: &ToastForest) -> AxiomCheck {
    for n in 0..t.levels.len().saturating_sub(1) {
        for (i, r) in t.levels[n].regions.iter().enumerate() {
            let ok = t.levels[n + 1].regions.iter().any(|p| region_contains(&p.region, &r.region));
            if !ok {
                return check(
                    3,
                    AxiomStatus::Fail,
                    format!("level {n} region {i} has no parent"),
                    Some(Witness { regions: vec![rref(t, n, i)], point: Some(r.anchor) }),
                );
            }
        }
    }
    check(3, AxiomStatus::Pass, "every region below the top has a parent", None)
}

fn axiom_directed(t: &ToastForest, inner: &Window) -> AxiomCheck {
    let top = t.levels.len() - 1;
    let mut members: Vec<(usize, usize)> = Vec::new();
    for (n, l) in t.levels.iter().enumerate().take(top) {
        for (i, r) in l.regions.iter().enumerate() {
            if inner.contains(r.anchor) {
                members.push((n, i));
            }
        }
    }
    if members.is_empty() {
        return check(4, AxiomStatus::Undetermined, "no regions anchored in the inner window", None);
    }
    let holds = |j: usize| {
        let outer = &t.levels[top].regions[j].region;
        members.iter().all(|&(n, i)| interior_contains_region(outer, &t.levels[n].regions[i].region))
    };
    for j in 0..t.levels[top].regions.len() {
        if holds(j) {
            return check(4, AxiomStatus::Pass, format!("all inner regions lie inside top region {j}"), None);
        }
    }
    check(4, AxiomStatus::Undetermined, "insufficient levels: no single top region contains all inner regions", None)
}

fn axiom_lacunary(t: &ToastForest) -> AxiomCheck {
    let tol = 1e-9;
    for (n, l) in t.levels.iter().enumerate() {
        for (i, r) in l.regions.iter().enumerate() {
            let u = Disk::new(r.anchor, t.u0);
            let fast = r.region.disks().iter().any(|d| d.contains_disk(&u));
            let ok = fast || region_contains(&r.region, &CompactRegion::disk(r.anchor, t.u0 * (1.0 - tol)));
            if !ok {
                return check(
                    5,
                    AxiomStatus::Fail,
                    format!("level {n} region {i} misses the u0-disk at its anchor"),
                    Some(Witness { regions: vec![rref(t, n, i)], point: Some(r.anchor) }),
                );
            }
        }
    }
    check(5, AxiomStatus::Pass, format!("every region contains the disk of radius {} at its anchor", t.u0), None)
}

fn axiom_exhaustive(t: &ToastForest, inner: &Window) -> AxiomCheck {
    let top = t.levels.len() - 1;
    let margin = 1e-9 * (1.0 + inner.diameter());
    for z in inner.grid(41, 41) {
        if !t.levels[top].regions.iter().any(|r| interior_contains_point(&r.region, z, margin)) {
            return check(
                6,
                AxiomStatus::Fail,
                "inner-window point outside the interior of every top region",
                Some(Witness { regions: vec![], point: Some(z) }),
            );
        }
    }
    check(6, AxiomStatus::Pass, "top regions cover the inner window", None)
}

/// Upper bound on the area of a union of disks.
fn area_bound(r: &CompactRegion) -> f64 {
    let disks: f64 = r.disks().iter().map(|d| std::f64::consts::PI * d.radius * d.radius).sum();
    disks.min(r.bbox().area())
}

/// Checks the seven axioms on `window` (coverage and directedness on its
/// inner window).
pub fn verify_axioms(t: &ToastForest, window: &Window) -> AxiomReport {
    let inner = window.inner(t.inner_margin);
    if t.levels.is_empty() {
        return AxiomReport {
            window: *window,
            checks: (1..=7).map(|a| check(a, AxiomStatus::Undetermined, "no levels", None)).collect(),
        };
    }
    let mut checks = vec![
        axiom_disjoint(t),
        axiom_coherent(t),
        axiom_layered(t),
        axiom_directed(t, &inner),
        axiom_lacunary(t),
        axiom_exhaustive(t, &inner),
        check(7, AxiomStatus::Trivial, "finitely many shapes and anchor differences", None),
    ];
    let cap = t.levels.windows(2).enumerate().find_map(|(n, w)| {
        let bound = |r: &ToastRegion| (area_bound(&r.region) / (std::f64::consts::PI * t.u0 * t.u0)).ceil() as usize;
        w[1].regions.iter().position(|r| r.children.len() > bound(r)).map(|i| (n + 1, i))
    });
    if let Some((n, i)) = cap {
        checks[2] = check(
            3,
            AxiomStatus::Fail,
            format!("level {n} region {i} has more children than the area bound allows"),
            Some(Witness { regions: vec![rref(t, n, i)], point: None }),
        );
    }
    AxiomReport { window: *window, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisors::{generate, DivPoint, GenKind};
    use crate::plane::c64;

    fn poisson(seed: u64) -> Divisor {
        generate(GenKind::Poisson { intensity: 1.0 }, Window::square(16.0), seed).unwrap()
    }

    #[test]
    fn single_point_chain() {
        let d = Divisor::new(Window::square(16.0), vec![DivPoint::new(c64(0.0, 0.0), 1)]).unwrap();
        let t = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        assert_eq!(t.levels.len(), 3);
        for l in &t.levels {
            assert_eq!(l.regions.len(), 1);
            assert_eq!(l.regions[0].anchor, c64(0.0, 0.0));
        }
        let rep = verify_axioms(&t, &t.window);
        assert!(rep.passes(&[1, 2, 3, 4, 5, 6, 7]), "{rep:?}");
        assert_eq!(t.locate(c64(0.0, 0.0), 1), Some(c64(0.0, 0.0)));
        assert_eq!(t.locate(c64(15.9, 15.9), 0), None);
    }

    #[test]
    fn poisson_forest_passes() {
        let d = poisson(7);
        let t = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let rep = verify_axioms(&t, &t.window);
        assert!(rep.passes(&[1, 2, 3, 5, 6]), "{:?}", rep.checks);
        for n in 0..2 {
            for (i, r) in t.levels[n].regions.iter().enumerate() {
                let p = t.parent(n, i).unwrap();
                assert!(region_contains(&t.levels[n + 1].regions[p].region, &r.region));
            }
        }
    }

    #[test]
    fn shift_covariance() {
        let d = poisson(11);
        let w = c64(0.7, 0.3);
        let a = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let b = build_covariant_toast(&d.translate(-w), 3, 1.0, 4.0).unwrap();
        let dev = b.structural_distance(&a.translate(-w)).expect("same structure");
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn lattice_refused() {
        let d = generate(GenKind::PeriodicLattice { spacing: 1.0 }, Window::square(6.0), 0).unwrap();
        assert!(matches!(build_covariant_toast(&d, 3, 1.0, 4.0), Err(ToastError::NonFreeInput(_))));
    }

    #[test]
    fn window_too_small() {
        let d = poisson(1);
        assert!(matches!(build_covariant_toast(&d, 4, 1.0, 4.0), Err(ToastError::WindowTooSmall { .. })));
    }

    fn level(n: usize, regions: Vec<(C64, Vec<Disk>)>) -> ToastLevel {
        ToastLevel {
            n,
            base_radius: 1.0,
            marker_radius: 1.0,
            regions: regions
                .into_iter()
                .enumerate()
                .map(|(i, (a, d))| ToastRegion {
                    anchor: a,
                    anchor_id: i,
                    region: CompactRegion::unchecked(d).unwrap(),
                    children: vec![],
                    repeated: false,
                })
                .collect(),
        }
    }

    #[test]
    fn overlapping_pair_detected() {
        let o = c64(0.0, 0.0);
        let p = c64(1.0, 0.0);
        let l0 = level(0, vec![(o, vec![Disk::new(o, 1.0)]), (p, vec![Disk::new(p, 1.0)])]);
        let l1 = level(1, vec![(o, vec![Disk::new(o, 10.0)])]);
        let t = ToastForest::from_levels(Window::square(4.0), 0.5, vec![l0, l1]);
        let rep = verify_axioms(&t, &t.window);
        let c = &rep.checks[0];
        assert_eq!(c.status, AxiomStatus::Fail);
        let w = c.witness.as_ref().unwrap();
        assert_eq!((w.regions[0].index, w.regions[1].index), (0, 1));
    }

    #[test]
    fn straddling_region_detected() {
        let o = c64(0.0, 0.0);
        let q = c64(3.0, 0.0);
        let l0 = level(0, vec![(o, vec![Disk::new(o, 1.0)]), (q, vec![Disk::new(q, 1.0)])]);
        let l1 = level(1, vec![(o, vec![Disk::new(o, 3.0)]), (c64(20.0, 0.0), vec![Disk::new(c64(20.0, 0.0), 1.0)])]);
        let t = ToastForest::from_levels(Window::square(4.0), 0.5, vec![l0, l1]);
        let rep = verify_axioms(&t, &t.window);
        assert_eq!(rep.status(1), AxiomStatus::Pass);
        assert_eq!(rep.status(2), AxiomStatus::Fail);
        let w = rep.checks[1].witness.as_ref().unwrap();
        assert_eq!(w.regions[0].anchor, q);
    }

    #[test]
    fn json_round_trip() {
        let d = poisson(3);
        let t = build_covariant_toast(&d, 2, 1.0, 4.0).unwrap();
        let back = ToastForest::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
