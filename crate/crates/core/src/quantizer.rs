//! Quantisation of the fade-state plane.
//!
//! A fade state is either in the clustering-independent region, where every
//! exclusive-law map has the same minimum cluster distance, or it is
//! assigned to the singular fade state whose removing map has the largest
//! minimum cluster distance there.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constellation::{Constellation, ConstellationName};
use crate::netmap::{min_cluster_distance, MapCatalog, NetworkMap};
use crate::singular::{d_min_at, FadeState};
use crate::{Error, Result};

/// Relative slack when comparing distances that are equal in exact arithmetic.
const DISTANCE_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndependentKind {
    /// `d_min(z) >= d_min(S)`.
    Ext,
    /// `d_min(z) >= |z| d_min(S)`.
    Int,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionAssignment {
    ClusteringIndependentExt,
    ClusteringIndependentInt,
    /// Index into the map catalog (canonical singular-state order).
    Dependent(usize),
}

impl RegionAssignment {
    pub fn kind_str(self) -> &'static str {
        match self {
            RegionAssignment::ClusteringIndependentExt => "ext",
            RegionAssignment::ClusteringIndependentInt => "int",
            RegionAssignment::Dependent(_) => "dependent",
        }
    }

    pub fn state_index(self) -> Option<usize> {
        match self {
            RegionAssignment::Dependent(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_independent(self) -> bool {
        !matches!(self, RegionAssignment::Dependent(_))
    }
}

impl From<IndependentKind> for RegionAssignment {
    fn from(k: IndependentKind) -> Self {
        match k {
            IndependentKind::Ext => RegionAssignment::ClusteringIndependentExt,
            IndependentKind::Int => RegionAssignment::ClusteringIndependentInt,
        }
    }
}

fn independent_kind(d_at: f64, d_min: f64, gamma: f64) -> Option<IndependentKind> {
    let slack = 1.0 - 1e-12;
    if d_at >= d_min * slack {
        Some(IndependentKind::Ext)
    } else if d_at >= gamma * d_min * slack {
        Some(IndependentKind::Int)
    } else {
        None
    }
}

/// Exact clustering-independence test, `Ext` taking precedence.
pub fn is_clustering_independent(c: &Constellation, z: FadeState) -> Option<IndependentKind> {
    independent_kind(d_min_at(c, z), c.d_min(), z.gamma())
}

/// Radius-only approximation of the clustering-independent region (the C1
/// and C2 circles) for the two proposed signal sets.
pub fn approx_independent(name: ConstellationName, z: FadeState) -> Result<Option<IndependentKind>> {
    let s3 = 3f64.sqrt();
    let (outer, inner) = match name {
        ConstellationName::S4 => (s3 + 1.0, 1.0 / (s3 + 1.0)),
        ConstellationName::S8 => (s3 + 2.0, 2.0 - s3),
        other => return Err(Error::UnknownConstellation(other.to_string())),
    };
    Ok(if z.gamma() > outer {
        Some(IndependentKind::Ext)
    } else if z.gamma() < inner {
        Some(IndependentKind::Int)
    } else {
        None
    })
}

/// Among `(index, score)` candidates pick the largest score; scores within
/// 1e-9 (relative) of the best are tied and the tie goes to the state
/// closest to `z`, then to the lowest index.
fn pick_best(
    scores: impl Iterator<Item = (usize, f64)> + Clone,
    catalog: &MapCatalog,
    z: Complex64,
) -> Option<usize> {
    let best = scores.clone().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let floor = best - DISTANCE_RTOL * best.abs();
    scores
        .filter(|s| s.1 >= floor)
        .map(|(k, _)| (k, (catalog.entries()[k].state.value() - z).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
}

fn exact_hit(catalog: &MapCatalog, z: Complex64, allowed: impl Fn(usize) -> bool) -> Option<usize> {
    catalog
        .entries()
        .iter()
        .enumerate()
        .find(|(k, e)| allowed(*k) && (e.state.value() - z).norm() <= 1e-9 * e.state.gamma().max(1.0))
        .map(|(k, _)| k)
}

/// Region of `z` by direct evaluation of every catalog map's minimum
/// cluster distance.
///
/// At a singular state the state's own entry is chosen. Elsewhere the map
/// with the largest minimum cluster distance wins; maps within 1e-9
/// (relative) of the best are tied and the tie goes to the state nearest to
/// `z`, then to canonical order.
pub fn assign_region(c: &Constellation, catalog: &MapCatalog, z: FadeState) -> RegionAssignment {
    if let Some(kind) = is_clustering_independent(c, z) {
        return kind.into();
    }
    if let Some(k) = exact_hit(catalog, z.value(), |_| true) {
        return RegionAssignment::Dependent(k);
    }
    let scores: Vec<(usize, f64)> = catalog
        .entries()
        .iter()
        .enumerate()
        .map(|(k, e)| (k, min_cluster_distance(c, &e.map, z)))
        .collect();
    let k = pick_best(scores.iter().copied(), catalog, z.value()).unwrap_or(0);
    RegionAssignment::Dependent(k)
}

/// Precomputed form of [`assign_region`] for repeated queries.
///
/// For an exclusive-law map only pairs of nonzero differences `(d_A, d_B)`
/// can share a cluster, so its minimum cluster distance at `z` is
/// `min(d_min, |z| d_min, |d_A + z d_B|)` over the difference pairs that
/// some cross-cluster pair of cells realises. The selector records, per
/// map, which difference pairs are realised only within clusters.
#[derive(Clone, Debug)]
pub struct RegionSelector {
    d_min: f64,
    first: Vec<Complex64>,
    second: Vec<Complex64>,
    /// Per catalog entry, a bitset over difference pairs that never cross clusters.
    hidden: Vec<Vec<u64>>,
    allowed: Vec<bool>,
    catalog: MapCatalog,
}

impl RegionSelector {
    pub fn new(c: &Constellation, catalog: &MapCatalog) -> Self {
        Self::with_max_t(c, catalog, usize::MAX)
    }

    /// Restricts the choice to maps with at most `max_t` symbols. If no
    /// entry qualifies the restriction is ignored.
    pub fn with_max_t(c: &Constellation, catalog: &MapCatalog, max_t: usize) -> Self {
        let ds = c.difference_set();
        let n = c.len();
        let p = c.points();
        let zero = ds
            .index_of(Complex64::new(0.0, 0.0))
            .expect("difference set contains 0");
        let diff_index: Vec<usize> = (0..n * n)
            .map(|k| ds.index_of(p[k / n] - p[k % n]).expect("difference is in the set"))
            .collect();
        let nz: Vec<usize> = (0..ds.len()).filter(|&k| k != zero).collect();
        let mut slot = vec![usize::MAX; ds.len()];
        for (s, &k) in nz.iter().enumerate() {
            slot[k] = s;
        }
        let m = nz.len();
        let mut first = Vec::with_capacity(m * m);
        let mut second = Vec::with_capacity(m * m);
        for &k in &nz {
            for &l in &nz {
                first.push(ds.values()[k]);
                second.push(ds.values()[l]);
            }
        }
        let words = (m * m).div_ceil(64);
        let hidden = catalog
            .entries()
            .iter()
            .map(|e| hidden_pairs(&e.map, n, &diff_index, &slot, m, words))
            .collect();
        let mut allowed: Vec<bool> = catalog.entries().iter().map(|e| e.map.t() <= max_t).collect();
        if !allowed.iter().any(|&a| a) {
            allowed.iter_mut().for_each(|a| *a = true);
        }
        RegionSelector {
            d_min: c.d_min(),
            first,
            second,
            hidden,
            allowed,
            catalog: catalog.clone(),
        }
    }

    pub fn catalog(&self) -> &MapCatalog {
        &self.catalog
    }

    pub fn is_allowed(&self, k: usize) -> bool {
        self.allowed[k]
    }

    /// Map used for an assignment.
    pub fn map_for(&self, region: RegionAssignment) -> &NetworkMap {
        let k = match region {
            RegionAssignment::Dependent(k) => k,
            _ => self.independent_entry(),
        };
        &self.catalog.entries()[k].map
    }

    /// Entry used in the clustering-independent region: the allowed map
    /// with the fewest symbols, then the lowest index.
    pub fn independent_entry(&self) -> usize {
        self.catalog
            .entries()
            .iter()
            .enumerate()
            .filter(|(k, _)| self.allowed[*k])
            .min_by_key(|(k, e)| (e.map.t(), *k))
            .map_or(0, |(k, _)| k)
    }

    /// Same contract as [`assign_region`] (restricted to allowed maps).
    pub fn assign(&self, z: Complex64) -> RegionAssignment {
        let gamma = z.norm();
        let base = self.d_min.min(gamma * self.d_min);
        let limit = base * base;
        let mut close: Vec<(f64, usize)> = Vec::new();
        for (idx, (d1, d2)) in self.first.iter().zip(&self.second).enumerate() {
            let v = (d1 + z * d2).norm_sqr();
            if v < limit {
                close.push((v.sqrt(), idx));
            }
        }
        let nonzero_min = close.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        if let Some(kind) = independent_kind(nonzero_min.min(base), self.d_min, gamma) {
            return kind.into();
        }
        if let Some(k) = exact_hit(&self.catalog, z, |k| self.allowed[k]) {
            return RegionAssignment::Dependent(k);
        }
        close.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let scores = self
            .hidden
            .iter()
            .enumerate()
            .filter(|(k, _)| self.allowed[*k])
            .map(|(k, hidden)| {
                let score = close
                    .iter()
                    .find(|(_, idx)| hidden[idx / 64] & (1u64 << (idx % 64)) == 0)
                    .map_or(base, |c| c.0);
                (k, score)
            });
        let k = pick_best(scores, &self.catalog, z).unwrap_or(0);
        RegionAssignment::Dependent(k)
    }
}

fn hidden_pairs(
    map: &NetworkMap,
    n: usize,
    diff_index: &[usize],
    slot: &[usize],
    m: usize,
    words: usize,
) -> Vec<u64> {
    let mut realised = vec![false; m * m];
    let mut crosses = vec![false; m * m];
    for a in 0..n {
        for a2 in 0..n {
            let k = slot[diff_index[a * n + a2]];
            if k == usize::MAX {
                continue;
            }
            for b in 0..n {
                for b2 in 0..n {
                    let l = slot[diff_index[b * n + b2]];
                    if l == usize::MAX {
                        continue;
                    }
                    let idx = k * m + l;
                    realised[idx] = true;
                    if map.get(a, b) != map.get(a2, b2) {
                        crosses[idx] = true;
                    }
                }
            }
        }
    }
    let mut bits = vec![0u64; words];
    for idx in 0..m * m {
        if realised[idx] && !crosses[idx] {
            bits[idx / 64] |= 1u64 << (idx % 64);
        }
    }
    bits
}

/// Pair-wise transition boundary between the regions of two fade states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCurve {
    Circle { center: Complex64, radius: f64 },
    /// `a x + b y = c`.
    Line { a: f64, b: f64, c: f64 },
}

impl BoundaryCurve {
    /// Signed offset of `p` from the curve (zero on it).
    pub fn residual(&self, p: Complex64) -> f64 {
        match *self {
            BoundaryCurve::Circle { center, radius } => (p - center).norm() - radius,
            BoundaryCurve::Line { a, b, c } => (a * p.re + b * p.im - c) / a.hypot(b),
        }
    }

    /// `count` points spread along the curve; a line is sampled over
    /// `[-span, span]` around its foot point from the origin.
    pub fn sample(&self, count: usize, span: f64) -> Vec<Complex64> {
        match *self {
            BoundaryCurve::Circle { center, radius } => (0..count)
                .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / count as f64))
                .collect(),
            BoundaryCurve::Line { a, b, c } => {
                let norm = a.hypot(b);
                let normal = Complex64::new(a, b) / norm;
                let foot = normal * (c / norm);
                let dir = normal * Complex64::i();
                (0..count)
                    .map(|k| {
                        let s = if count > 1 {
                            -span + 2.0 * span * k as f64 / (count - 1) as f64
                        } else {
                            0.0
                        };
                        foot + dir * s
                    })
                    .collect()
            }
        }
    }
}

/// The difference `d_2` attaining `min |d_1 + z d_2|` jointly over nonzero
/// `d_1, d_2`; among (near-)minimisers the one with the smallest modulus.
pub fn limiting_difference(c: &Constellation, z: FadeState) -> Complex64 {
    let diffs: Vec<Complex64> = c.difference_set().nonzero().collect();
    let z = z.value();
    let mut best = f64::INFINITY;
    for d1 in &diffs {
        for d2 in &diffs {
            best = best.min((d1 + z * d2).norm());
        }
    }
    let floor = best + DISTANCE_RTOL * best.max(1.0);
    let mut pick: Option<Complex64> = None;
    for d1 in &diffs {
        for d2 in &diffs {
            if (d1 + z * d2).norm() <= floor
                && pick.is_none_or(|p| d2.norm() < p.norm() - DISTANCE_RTOL)
            {
                pick = Some(*d2);
            }
        }
    }
    pick.expect("difference set has nonzero values")
}

/// Weighted equidistance boundary `|p - z|² |ď|² = |p - z'|² |ď'|²`.
pub fn pairwise_boundary(c: &Constellation, z: FadeState, z2: FadeState) -> Result<BoundaryCurve> {
    if (z.value() - z2.value()).norm() <= 1e-12 {
        return Err(Error::InvalidBoundaryPair);
    }
    let w1 = limiting_difference(c, z).norm_sqr();
    let w2 = limiting_difference(c, z2).norm_sqr();
    let (zv, z2v) = (z.value(), z2.value());
    if (w1 - w2).abs() <= DISTANCE_RTOL * w1.max(w2) {
        return Ok(BoundaryCurve::Line {
            a: zv.re * w1 - z2v.re * w2,
            b: zv.im * w1 - z2v.im * w2,
            c: -0.5 * (z2v.norm_sqr() * w2 - zv.norm_sqr() * w1),
        });
    }
    let center = zv / (1.0 - w2 / w1) + z2v / (1.0 - w1 / w2);
    let discriminant = center.norm_sqr() + (z2v.norm_sqr() * w2 - zv.norm_sqr() * w1) / (w1 - w2);
    if discriminant <= 0.0 {
        return Err(Error::DegenerateBoundary { discriminant });
    }
    Ok(BoundaryCurve::Circle {
        center,
        radius: discriminant.sqrt(),
    })
}

/// Rasterised region assignment over `[-extent, extent]²`, sampled at cell
/// centres, row 0 at the top (largest imaginary part).
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub extent: f64,
    pub resolution: usize,
    pub cells: Vec<RegionAssignment>,
}

impl RegionGrid {
    pub fn point(&self, row: usize, col: usize) -> Complex64 {
        let step = 2.0 * self.extent / self.resolution as f64;
        Complex64::new(
            -self.extent + (col as f64 + 0.5) * step,
            self.extent - (row as f64 + 0.5) * step,
        )
    }

    pub fn get(&self, row: usize, col: usize) -> RegionAssignment {
        self.cells[row * self.resolution + col]
    }

    pub fn independent_fraction(&self) -> f64 {
        self.cells.iter().filter(|c| c.is_independent()).count() as f64 / self.cells.len() as f64
    }

    /// CSV with columns `re, im, kind, state_index`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,kind,state_index\n");
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                let p = self.point(row, col);
                let a = self.get(row, col);
                let idx = a.state_index().map(|k| k.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{}", p.re, p.im, a.kind_str(), idx);
            }
        }
        out
    }

    /// Self-contained SVG, one fill colour per assignment, singular states
    /// marked by unfilled circles.
    pub fn to_svg(&self, catalog: &MapCatalog) -> String {
        let n = self.resolution;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" viewBox="0 0 {n} {n}" shape-rendering="crispEdges">"#
        );
        for row in 0..n {
            let mut col = 0;
            while col < n {
                let a = self.get(row, col);
                let start = col;
                while col < n && self.get(row, col) == a {
                    col += 1;
                }
                let _ = writeln!(
                    out,
                    r#"<rect x="{start}" y="{row}" width="{}" height="1" fill="{}"/>"#,
                    col - start,
                    fill_for(a)
                );
            }
        }
        let scale = n as f64 / (2.0 * self.extent);
        for e in catalog.entries() {
            let h = e.state.value();
            if h.re.abs() <= self.extent && h.im.abs() <= self.extent {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="black" stroke-width="0.5"/>"#,
                    (h.re + self.extent) * scale,
                    (self.extent - h.im) * scale,
                    (n as f64 / 200.0).max(1.0)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Fill colour of an assignment in the SVG rendering.
pub fn fill_for(a: RegionAssignment) -> String {
    match a {
        RegionAssignment::ClusteringIndependentExt => "#ffffff".into(),
        RegionAssignment::ClusteringIndependentInt => "#d9d9d9".into(),
        RegionAssignment::Dependent(k) => {
            let hue = (k as f64 * 137.507_764) % 360.0;
            let light = 40 + (k % 3) * 12;
            format!("hsl({hue:.1},70%,{light}%)")
        }
    }
}

pub fn region_grid(
    c: &Constellation,
    catalog: &MapCatalog,
    extent: f64,
    resolution: usize,
) -> Result<RegionGrid> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Error::InvalidConfig(format!("extent must be positive, got {extent}")));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(format!("resolution must be at least 2, got {resolution}")));
    }
    let selector = RegionSelector::new(c, catalog);
    let mut grid = RegionGrid {
        extent,
        resolution,
        cells: Vec::new(),
    };
    let rows: Vec<Vec<RegionAssignment>> = (0..resolution)
        .into_par_iter()
        .map(|row| {
            (0..resolution)
                .map(|col| selector.assign(grid.point(row, col)))
                .collect()
        })
        .collect();
    grid.cells = rows.into_iter().flatten().collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::build_named;
    use crate::netmap::{named_catalog, removes};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_z(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
        let r = rng.random_range(0.0..r_max);
        Complex64::from_polar(r, rng.random_range(-PI..PI))
    }

    #[test]
    fn independence_examples() {
        let s4 = build_named(ConstellationName::S4);
        assert_eq!(
            is_clustering_independent(&s4, FadeState::from_parts(10.0, 0.0)),
            Some(IndependentKind::Ext)
        );
        assert_eq!(
            is_clustering_independent(&s4, FadeState::from_parts(1.5, 3f64.sqrt() / 2.0)),
            None
        );
        let s8 = build_named(ConstellationName::S8);
        let s3 = 3f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let theta = rng.random_range(-PI..PI);
            let far = FadeState::from_polar(s3 + 2.0 + rng.random_range(0.001..5.0), theta);
            assert_eq!(is_clustering_independent(&s8, far), Some(IndependentKind::Ext));
            let near = FadeState::from_polar((2.0 - s3) * rng.random_range(0.01..0.999), theta);
            assert_eq!(is_clustering_independent(&s8, near), Some(IndependentKind::Int));
        }
    }

    #[test]
    fn approximation_examples() {
        let at = |r: f64| FadeState::from_polar(r, 0.4);
        assert_eq!(approx_independent(ConstellationName::S4, at(3.0)).unwrap(), Some(IndependentKind::Ext));
        assert_eq!(approx_independent(ConstellationName::S4, at(1.0)).unwrap(), None);
        assert_eq!(approx_independent(ConstellationName::S8, at(0.2)).unwrap(), Some(IndependentKind::Int));
        assert!(approx_independent(ConstellationName::Psk8, at(0.2)).is_err());
    }

    #[test]
    fn approximation_is_conservative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for name in [ConstellationName::S4, ConstellationName::S8] {
            let c = build_named(name);
            let mut hits = 0;
            for _ in 0..10_000 {
                let z = FadeState::new(random_z(&mut rng, 6.0));
                if let Some(kind) = approx_independent(name, z).unwrap() {
                    hits += 1;
                    assert_eq!(is_clustering_independent(&c, z), Some(kind), "{name} at {z}");
                }
            }
            assert!(hits > 1000);
        }
    }

    #[test]
    fn inversion_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ConstellationName::ALL {
            let c = build_named(name);
            for _ in 0..300 {
                let z = random_z(&mut rng, 5.0);
                if z.norm() < 1e-6 {
                    continue;
                }
                let ext = d_min_at(&c, FadeState::new(z)) >= c.d_min() * (1.0 - 1e-9);
                let w = z.inv();
                let int = d_min_at(&c, FadeState::new(w)) >= w.norm() * c.d_min() * (1.0 - 1e-9);
                assert_eq!(ext, int, "{name} at {z}");
            }
        }
    }

    #[test]
    fn singular_states_are_their_own_regions() {
        for name in [ConstellationName::S4, ConstellationName::Psk4] {
            let (c, _, cat) = named_catalog(name).unwrap();
            let sel = RegionSelector::new(&c, &cat);
            for (k, e) in cat.entries().iter().enumerate() {
                assert_eq!(assign_region(&c, &cat, e.state), RegionAssignment::Dependent(k));
                assert_eq!(sel.assign(e.state.value()), RegionAssignment::Dependent(k));
                assert!(removes(&c, sel.map_for(RegionAssignment::Dependent(k)), e.state));
            }
        }
    }

    #[test]
    fn selector_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for name in [ConstellationName::S4, ConstellationName::Psk4, ConstellationName::S8] {
            let (c, _, cat) = named_catalog(name).unwrap();
            let sel = RegionSelector::new(&c, &cat);
            let trials = if cat.len() > 20 { 60 } else { 400 };
            for _ in 0..trials {
                let z = random_z(&mut rng, 4.0);
                assert_eq!(
                    sel.assign(z),
                    assign_region(&c, &cat, FadeState::new(z)),
                    "{name} at {z}"
                );
            }
        }
    }

    #[test]
    fn perturbed_states_keep_their_region() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut hits = 0;
        for _ in 0..100 {
            let k = rng.random_range(0..cat.len());
            let z = cat.entries()[k].state.value() + Complex64::from_polar(0.01, rng.random_range(-PI..PI));
            if assign_region(&c, &cat, FadeState::new(z)) == RegionAssignment::Dependent(k) {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn assignment_is_scale_invariant() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        let scaled = c.scaled(3.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let z = FadeState::new(random_z(&mut rng, 4.0));
            assert_eq!(assign_region(&c, &cat, z), assign_region(&scaled, &cat, z));
        }
    }

    #[test]
    fn boundary_line_for_equal_weights() {
        let c = build_named(ConstellationName::S4);
        let z = FadeState::from_parts(1.0, 0.0);
        let z2 = FadeState::from_parts(-1.0, 0.0);
        let curve = pairwise_boundary(&c, z, z2).unwrap();
        let BoundaryCurve::Line { .. } = curve else {
            panic!("expected a line, got {curve:?}");
        };
        let mid = (z.value() + z2.value()) / 2.0;
        assert!(curve.residual(mid).abs() < 1e-9);
    }

    #[test]
    fn boundary_points_are_weighted_equidistant() {
        let c = build_named(ConstellationName::S4);
        let z = FadeState::from_parts(1.0, 0.0);
        let z2 = FadeState::from_parts(0.0, 3f64.sqrt());
        let w1 = limiting_difference(&c, z).norm_sqr();
        let w2 = limiting_difference(&c, z2).norm_sqr();
        let curve = pairwise_boundary(&c, z, z2).unwrap();
        for p in curve.sample(100, 5.0) {
            let lhs = (p - z.value()).norm_sqr() * w1;
            let rhs = (p - z2.value()).norm_sqr() * w2;
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
        let swapped = pairwise_boundary(&c, z2, z).unwrap();
        for p in curve.sample(20, 5.0) {
            assert!(swapped.residual(p).abs() < 1e-9);
        }
        assert!(pairwise_boundary(&c, z, z).is_err());
    }

    #[test]
    fn grid_properties() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        let small = region_grid(&c, &cat, 3.0, 60).unwrap();
        let large = region_grid(&c, &cat, 6.0, 60).unwrap();
        assert!(large.independent_fraction() > small.independent_fraction());
        for e in cat.entries() {
            let h = e.state.value();
            if h.re.abs() < 3.0 && h.im.abs() < 3.0 {
                let col = ((h.re + 3.0) / 0.1) as usize;
                let row = ((3.0 - h.im) / 0.1) as usize;
                assert!(!small.get(row, col).is_independent(), "cell of {h}");
            }
        }
        let svg = small.to_svg(&cat);
        let fills: std::collections::HashSet<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<rect"))
            .filter_map(|l| l.split("fill=\"").nth(1))
            .filter_map(|s| s.split('"').next())
            .collect();
        assert!(fills.len() <= 18 + 2);
        assert!(small.to_csv().starts_with("re,im,kind,state_index\n"));
        assert!(region_grid(&c, &cat, 3.0, 1).is_err());
        assert!(region_grid(&c, &cat, -1.0, 10).is_err());
    }
}
