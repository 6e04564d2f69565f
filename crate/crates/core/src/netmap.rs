//! Network-coding maps as Latin squares.
//!
//! Entry `(i, j)` of a map is the 1-based index of the BC-phase symbol the
//! relay sends when its estimate of `(x_A, x_B)` is point `i` and point `j`.
//! A map satisfies the exclusive law exactly when no symbol repeats in a row
//! or a column, and it removes a singular fade state `h` when its minimum
//! cluster distance at `h` is strictly positive.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{build_named, normalize_energy, Constellation, ConstellationName};
use crate::mapsolver;
use crate::singular::{FadeState, SingularFadeCatalog};
use crate::{Error, Result, ZERO_DISTANCE_TOL};

mod published;

pub use published::{published_square, published_bases, published_squares, PublishedSquare};

/// An `M x M` grid of BC-phase symbols `1..=t`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkMap {
    size: usize,
    entries: Vec<u8>,
    t: usize,
    removed_state: Option<FadeState>,
}

impl NetworkMap {
    /// Builds a map from rows of 1-based symbols. Only the shape is checked;
    /// use [`check_exclusive_law`] for the Latin property.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let size = rows.len();
        let malformed = |reason: String| Error::MalformedMap { size, reason };
        if size == 0 {
            return Err(malformed("empty grid".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != size {
                return Err(malformed(format!("row {} has {} entries", r + 1, row.len())));
            }
            if row.contains(&0) {
                return Err(malformed(format!("row {} contains symbol 0", r + 1)));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self::from_entries(size, entries))
    }

    fn from_entries(size: usize, entries: Vec<u8>) -> Self {
        let mut seen = [false; 256];
        for &e in &entries {
            seen[e as usize] = true;
        }
        let t = seen.iter().filter(|&&s| s).count();
        NetworkMap {
            size,
            entries,
            t,
            removed_state: None,
        }
    }

    /// The bitwise-XOR square `(i ^ j) + 1` for power-of-two orders, the
    /// cyclic square `(i + j) mod M + 1` otherwise.
    pub fn xor(size: usize) -> Self {
        let entries = (0..size)
            .flat_map(|i| {
                (0..size).map(move |j| {
                    if size.is_power_of_two() {
                        ((i ^ j) + 1) as u8
                    } else {
                        ((i + j) % size + 1) as u8
                    }
                })
            })
            .collect();
        Self::from_entries(size, entries)
    }

    pub fn with_removed_state(mut self, h: FadeState) -> Self {
        self.removed_state = Some(h);
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of distinct symbols, i.e. the size of the BC signal set.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Largest symbol in the grid.
    pub fn max_symbol(&self) -> u8 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn removed_state(&self) -> Option<FadeState> {
        self.removed_state
    }

    /// Symbol at row `i` (A's point), column `j` (B's point), 0-based indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.size).map(<[u8]>::to_vec).collect()
    }

    /// Symbols relabelled in order of first occurrence (row-major), so two
    /// maps inducing the same clustering compare equal.
    pub fn canonical(&self) -> NetworkMap {
        let mut relabel = [0u8; 256];
        let mut next = 1u8;
        let entries = self
            .entries
            .iter()
            .map(|&e| {
                if relabel[e as usize] == 0 {
                    relabel[e as usize] = next;
                    next += 1;
                }
                relabel[e as usize]
            })
            .collect();
        NetworkMap {
            size: self.size,
            entries,
            t: self.t,
            removed_state: self.removed_state,
        }
    }

    pub fn same_clustering(&self, other: &NetworkMap) -> bool {
        self.size == other.size && self.canonical().entries == other.canonical().entries
    }

    pub fn transpose(&self) -> NetworkMap {
        let n = self.size;
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(j, i))
            .collect();
        NetworkMap {
            entries,
            ..self.clone()
        }
    }

    /// The map `(i, j) -> self(rows[i], cols[j])`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> NetworkMap {
        let n = self.size;
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(rows[i], cols[j]))
            .collect();
        NetworkMap {
            entries,
            ..self.clone()
        }
    }

    pub fn check_exclusive_law(&self) -> bool {
        check_exclusive_law(self)
    }
}

impl fmt::Display for NetworkMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.size) {
            let cells: Vec<String> = row.iter().map(u8::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// True iff no symbol repeats in any row or column.
pub fn check_exclusive_law(m: &NetworkMap) -> bool {
    let n = m.size;
    for k in 0..n {
        let mut row_seen = [false; 256];
        let mut col_seen = [false; 256];
        for l in 0..n {
            let r = m.get(k, l) as usize;
            let c = m.get(l, k) as usize;
            if row_seen[r] || col_seen[c] {
                return false;
            }
            row_seen[r] = true;
            col_seen[c] = true;
        }
    }
    true
}

fn ensure_fits(c: &Constellation, m: &NetworkMap) -> Result<()> {
    if c.len() != m.size {
        return Err(Error::SizeMismatch {
            map: m.size,
            constellation: c.len(),
        });
    }
    Ok(())
}

/// Minimum of `|(x_A - x'_A) + z (x_B - x'_B)|` over transmit pairs the map
/// sends to different symbols. Infinite when the map has a single cluster.
pub fn min_cluster_distance(c: &Constellation, m: &NetworkMap, z: FadeState) -> f64 {
    assert_eq!(c.len(), m.size, "map order must match the constellation");
    let p = c.points();
    let z = z.value();
    let n = c.len();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            let sym = m.get(a, b);
            let here = p[a] + z * p[b];
            for a2 in 0..n {
                for b2 in 0..n {
                    if m.get(a2, b2) != sym {
                        best = best.min((here - p[a2] - z * p[b2]).norm());
                    }
                }
            }
        }
    }
    best
}

/// Whether the map keeps every cross-cluster distance positive at `h`.
pub fn removes(c: &Constellation, m: &NetworkMap, h: FadeState) -> bool {
    min_cluster_distance(c, m, h) > ZERO_DISTANCE_TOL
}

/// Symmetries of a signal set used to carry a removing square from one
/// singular fade state to another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Identity,
    /// `h -> -h`, column relabelling by the negation permutation.
    Negate,
    /// `h -> h*`, row and column relabelling by the conjugation permutation.
    Conjugate,
    /// `h -> 1/h`, transpose.
    Invert,
    /// `h -> e^{jφ} h`, column relabelling by the rotation permutation.
    Rotate(f64),
}

impl Transform {
    pub fn apply(self, h: Complex64) -> Complex64 {
        match self {
            Transform::Identity => h,
            Transform::Negate => -h,
            Transform::Conjugate => h.conj(),
            Transform::Invert => h.inv(),
            Transform::Rotate(phi) => h * Complex64::from_polar(1.0, phi),
        }
    }

    /// Whether the transform is realisable on `c`, i.e. the point map it
    /// relies on sends `c` onto itself.
    pub fn stabilizes(self, c: &Constellation) -> bool {
        match self {
            Transform::Identity | Transform::Invert => true,
            Transform::Negate => c.induced_permutation(|p| -p).is_some(),
            Transform::Conjugate => c.induced_permutation(|p| p.conj()).is_some(),
            Transform::Rotate(phi) => {
                let w = Complex64::from_polar(1.0, phi);
                c.induced_permutation(|p| p * w).is_some()
            }
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("identity"),
            Transform::Negate => f.write_str("negate"),
            Transform::Conjugate => f.write_str("conjugate"),
            Transform::Invert => f.write_str("invert"),
            Transform::Rotate(phi) => write!(f, "rotate({phi})"),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown transform `{s}`"));
        Ok(match s {
            "identity" => Transform::Identity,
            "negate" => Transform::Negate,
            "conjugate" => Transform::Conjugate,
            "invert" => Transform::Invert,
            _ => {
                let inner = s
                    .strip_prefix("rotate(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(bad)?;
                Transform::Rotate(inner.parse().map_err(|_| bad())?)
            }
        })
    }
}

/// Carries `base`, which removes `base.removed_state()`, to the transformed
/// state. The result is re-verified with [`removes`].
pub fn derive_by_symmetry(
    c: &Constellation,
    base: &NetworkMap,
    transform: Transform,
) -> Result<NetworkMap> {
    ensure_fits(c, base)?;
    let h = base.removed_state.ok_or_else(|| {
        Error::InvalidConfig("base map does not name the state it removes".into())
    })?;
    let identity: Vec<usize> = (0..c.len()).collect();
    let not_symmetry = || Error::NotASymmetry(transform.to_string());
    let derived = match transform {
        Transform::Identity => base.clone(),
        Transform::Invert => base.transpose(),
        Transform::Negate => {
            let perm = c.induced_permutation(|p| -p).ok_or_else(not_symmetry)?;
            base.permuted(&identity, &perm)
        }
        Transform::Conjugate => {
            let perm = c.induced_permutation(|p| p.conj()).ok_or_else(not_symmetry)?;
            base.permuted(&perm, &perm)
        }
        Transform::Rotate(phi) => {
            let w = Complex64::from_polar(1.0, phi);
            let perm = c.induced_permutation(|p| p * w).ok_or_else(not_symmetry)?;
            base.permuted(&identity, &perm)
        }
    };
    let target = FadeState::new(transform.apply(h.value()));
    if !check_exclusive_law(&derived) || !removes(c, &derived, target) {
        return Err(Error::VerificationFailed {
            state: target.to_string(),
        });
    }
    Ok(derived.with_removed_state(target))
}

/// The signal set `S'(h)` the relay broadcasts from.
#[derive(Clone, Debug, PartialEq)]
pub struct BcSignalSet {
    points: Constellation,
}

impl BcSignalSet {
    pub fn new(points: Constellation) -> Self {
        BcSignalSet { points }
    }

    /// Default BC set for a map with `t` symbols over `c`:
    ///
    /// - `t == M`: the MA constellation itself, symbol `i` to point `i`;
    /// - `t == 5` over a 4-point set: 4-PSK on symbols 1..=4 plus the origin
    ///   as symbol 5, at unit energy;
    /// - otherwise a unit-energy `t`-PSK.
    pub fn for_map(c: &Constellation, t: usize) -> Self {
        if t == c.len() {
            return BcSignalSet::new(c.clone());
        }
        let mut points: Vec<Complex64> = if t == 5 && c.len() == 4 {
            (0..4)
                .map(|k| Complex64::from_polar(1.0, FRAC_PI_4 + k as f64 * FRAC_PI_2))
                .collect()
        } else {
            (0..t)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / t as f64))
                .collect()
        };
        if t == 5 && c.len() == 4 {
            points.push(Complex64::new(0.0, 0.0));
        }
        BcSignalSet::new(
            normalize_energy(format!("bc{t}"), &points).expect("PSK points are valid"),
        )
    }

    pub fn constellation(&self) -> &Constellation {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point for a 1-based symbol.
    #[inline]
    pub fn point(&self, symbol: u8) -> Complex64 {
        self.points.points()[symbol as usize - 1]
    }
}

/// How a catalog entry's map was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum MapOrigin {
    Published(String),
    Derived { from: usize, transform: Transform },
    Solver,
}

impl fmt::Display for MapOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapOrigin::Published(id) => write!(f, "published:{id}"),
            MapOrigin::Derived { from, transform } => write!(f, "derived:{from}:{transform}"),
            MapOrigin::Solver => f.write_str("solver"),
        }
    }
}

impl FromStr for MapOrigin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "solver" {
            return Ok(MapOrigin::Solver);
        }
        if let Some(id) = s.strip_prefix("published:") {
            return Ok(MapOrigin::Published(id.to_string()));
        }
        if let Some(rest) = s.strip_prefix("derived:") {
            if let Some((from, transform)) = rest.split_once(':') {
                if let Ok(from) = from.parse() {
                    return Ok(MapOrigin::Derived {
                        from,
                        transform: transform.parse()?,
                    });
                }
            }
        }
        Err(Error::InvalidConfig(format!("unknown map origin `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub state: FadeState,
    pub map: NetworkMap,
    pub origin: MapOrigin,
}

/// One verified removing map per singular fade state, in canonical state
/// order. The first entry doubles as the map for the clustering-independent
/// region.
#[derive(Clone, Debug, PartialEq)]
pub struct MapCatalog {
    entries: Vec<CatalogEntry>,
    solver_fallbacks: usize,
}

/// JSON form of one catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub state: [f64; 2],
    pub t: usize,
    pub grid: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

impl MapCatalog {
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Map used in the clustering-independent region.
    pub fn fallback(&self) -> &NetworkMap {
        &self.entries[0].map
    }

    /// Number of states whose map came from the solver rather than from the
    /// published squares and their symmetry images.
    pub fn solver_fallbacks(&self) -> usize {
        self.solver_fallbacks
    }

    pub fn max_t(&self) -> usize {
        self.entries.iter().map(|e| e.map.t()).max().unwrap_or(0)
    }

    pub fn to_records(&self) -> Vec<CatalogRecord> {
        self.entries
            .iter()
            .map(|e| CatalogRecord {
                state: [e.state.value().re, e.state.value().im],
                t: e.map.t(),
                grid: e.map.rows(),
                origin: Some(e.origin.to_string()),
            })
            .collect()
    }

    /// Rebuilds a catalog from its records, re-checking every map.
    pub fn from_records(c: &Constellation, records: &[CatalogRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidConfig("empty map catalog".into()));
        }
        let mut entries = Vec::with_capacity(records.len());
        let mut solver_fallbacks = 0;
        for rec in records {
            let state = FadeState::from_parts(rec.state[0], rec.state[1]);
            let map = NetworkMap::from_rows(&rec.grid)?.with_removed_state(state);
            ensure_fits(c, &map)?;
            if map.t() != rec.t {
                return Err(Error::MalformedMap {
                    size: map.size(),
                    reason: format!("declared t = {} but grid uses {}", rec.t, map.t()),
                });
            }
            if !check_exclusive_law(&map) || !removes(c, &map, state) {
                return Err(Error::VerificationFailed {
                    state: state.to_string(),
                });
            }
            let origin = match &rec.origin {
                Some(o) => o.parse()?,
                None => MapOrigin::Solver,
            };
            if origin == MapOrigin::Solver {
                solver_fallbacks += 1;
            }
            entries.push(CatalogEntry { state, map, origin });
        }
        Ok(MapCatalog {
            entries,
            solver_fallbacks,
        })
    }
}

/// Symmetry transforms realisable on `c`, in the order they are tried.
pub fn symmetry_transforms(c: &Constellation) -> Vec<Transform> {
    [
        Transform::Negate,
        Transform::Conjugate,
        Transform::Invert,
        Transform::Rotate(FRAC_PI_2),
        Transform::Rotate(FRAC_PI_4),
    ]
    .into_iter()
    .filter(|t| t.stabilizes(c))
    .collect()
}

/// Assigns a verified removing map to every state of `cat`.
///
/// Base squares are spread over the catalog by the symmetry transforms of
/// `c`. Any state still uncovered is solved with [`mapsolver::min_t`] and
/// its solution is spread the same way.
pub fn build_catalog(
    c: &Constellation,
    cat: &SingularFadeCatalog,
    base_squares: &[(String, NetworkMap)],
) -> Result<MapCatalog> {
    let n = cat.len();
    let mut slots: Vec<Option<(NetworkMap, MapOrigin)>> = vec![None; n];
    let mut queue = VecDeque::new();

    for (id, square) in base_squares {
        ensure_fits(c, square)?;
        let h = square.removed_state().ok_or_else(|| {
            Error::InvalidConfig(format!("base square {id} does not name its state"))
        })?;
        let Some(k) = cat.index_of(h.value(), 1e-9) else {
            return Err(Error::InvalidConfig(format!(
                "base square {id} names {h}, which is not a singular fade state"
            )));
        };
        let state = cat.states()[k];
        if !check_exclusive_law(square) || !removes(c, square, state) {
            return Err(Error::VerificationFailed {
                state: state.to_string(),
            });
        }
        if slots[k].is_none() {
            slots[k] = Some((
                square.clone().with_removed_state(state),
                MapOrigin::Published(id.clone()),
            ));
            queue.push_back(k);
        }
    }

    let transforms = symmetry_transforms(c);
    let mut solver_fallbacks = 0;
    loop {
        while let Some(k) = queue.pop_front() {
            let base = slots[k].as_ref().map(|s| s.0.clone()).expect("queued slot is filled");
            for &transform in &transforms {
                let target = transform.apply(cat.states()[k].value());
                let Some(j) = cat.index_of(target, 1e-9) else {
                    continue;
                };
                if slots[j].is_some() {
                    continue;
                }
                match derive_by_symmetry(c, &base, transform) {
                    Ok(map) => {
                        slots[j] = Some((
                            map.with_removed_state(cat.states()[j]),
                            MapOrigin::Derived { from: k, transform },
                        ));
                        queue.push_back(j);
                    }
                    Err(Error::VerificationFailed { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        let Some(k) = slots.iter().position(Option::is_none) else {
            break;
        };
        let state = cat.states()[k];
        let (_, map) = mapsolver::min_t(c, state)?;
        slots[k] = Some((map.with_removed_state(state), MapOrigin::Solver));
        solver_fallbacks += 1;
        queue.push_back(k);
    }

    let entries = slots
        .into_iter()
        .zip(cat.states())
        .map(|(slot, &state)| {
            let (map, origin) = slot.ok_or_else(|| Error::NoRemovingMap {
                state: state.to_string(),
            })?;
            Ok(CatalogEntry { state, map, origin })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MapCatalog {
        entries,
        solver_fallbacks,
    })
}

/// The catalog for one of the named sets, seeded with its published squares.
pub fn named_catalog(name: ConstellationName) -> Result<(Constellation, SingularFadeCatalog, MapCatalog)> {
    let c = build_named(name);
    let (cat, maps) = catalog_for(&c)?;
    Ok((c, cat, maps))
}

/// Singular states of `c` and their catalog, using the published squares
/// when `c` is one of the named sets.
pub fn catalog_for(c: &Constellation) -> Result<(SingularFadeCatalog, MapCatalog)> {
    let cat = crate::singular::enumerate_singular_states(c);
    let maps = build_catalog(c, &cat, &published_bases(c))?;
    Ok((cat, maps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ConstellationName;
    use crate::singular::enumerate_singular_states;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s3() -> f64 {
        3f64.sqrt()
    }

    /// Exclusive law checked pair by pair, straight from its definition.
    fn exclusive_law_pairs(m: &NetworkMap) -> bool {
        let n = m.size();
        for a in 0..n {
            for b in 0..n {
                for other in 0..n {
                    if other != a && m.get(a, b) == m.get(other, b) {
                        return false;
                    }
                    if other != b && m.get(a, b) == m.get(a, other) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn brute_cluster_distance(c: &Constellation, m: &NetworkMap, z: Complex64) -> f64 {
        let p = c.points();
        let n = p.len();
        let mut best = f64::INFINITY;
        for i in 0..n * n {
            for k in 0..n * n {
                let (a, b, a2, b2) = (i / n, i % n, k / n, k % n);
                if m.get(a, b) == m.get(a2, b2) {
                    continue;
                }
                let d = (p[a] - p[a2]) + z * (p[b] - p[b2]);
                best = best.min(d.norm());
            }
        }
        best
    }

    #[test]
    fn exclusive_law_examples() {
        let fig5b = published_square(ConstellationName::S4, "fig5b").unwrap();
        assert!(check_exclusive_law(&fig5b));
        let bad = NetworkMap::from_rows(&[
            [1u8, 1, 2, 3],
            [2, 3, 4, 1],
            [3, 4, 1, 2],
            [4, 2, 3, 1],
        ])
        .unwrap();
        assert!(!check_exclusive_law(&bad));
        let ones = NetworkMap::from_rows(&[[1u8; 4]; 4]).unwrap();
        assert!(!check_exclusive_law(&ones));
        assert_eq!(ones.t(), 1);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(NetworkMap::from_rows(&[vec![1u8, 2], vec![2]]).is_err());
        assert!(NetworkMap::from_rows(&[[0u8, 1], [1, 2]]).is_err());
        assert!(NetworkMap::from_rows::<Vec<u8>>(&[]).is_err());
    }

    #[test]
    fn cluster_distance_examples() {
        let s4 = build_named(ConstellationName::S4);
        let fig5a = published_square(ConstellationName::S4, "fig5a").unwrap();
        let fig5b = published_square(ConstellationName::S4, "fig5b").unwrap();
        let fig5c = published_square(ConstellationName::S4, "fig5c").unwrap();
        let h_a = FadeState::from_parts(0.5, s3() / 2.0);
        assert!(min_cluster_distance(&s4, &fig5b, FadeState::from_parts(1.0, 0.0)) > 0.0);
        assert!(min_cluster_distance(&s4, &fig5a, h_a) > 0.0);
        // XOR does not remove 0.5 + j√3/2
        let xor_at_a = min_cluster_distance(&s4, &fig5b, h_a);
        assert_eq!(xor_at_a, brute_cluster_distance(&s4, &fig5b, h_a.value()));
        assert!(xor_at_a < 1e-9);
        assert!(removes(&s4, &fig5c, FadeState::from_parts(1.5, s3() / 2.0)));

        let s8 = build_named(ConstellationName::S8);
        let fig10d = published_square(ConstellationName::S8, "fig10d").unwrap();
        assert!(removes(&s8, &fig10d, FadeState::from_parts(1.0, 1.0)));
    }

    #[test]
    fn any_latin_square_removes_nothing_singular_far_away() {
        let s4 = build_named(ConstellationName::S4);
        let z = FadeState::from_parts(0.3, -2.2);
        assert!(removes(&s4, &NetworkMap::xor(4), z));
    }

    #[test]
    fn published_squares_remove_their_states() {
        for name in [ConstellationName::S4, ConstellationName::S8] {
            let c = build_named(name);
            for sq in published_squares(name) {
                let map = NetworkMap::from_rows(sq.rows).unwrap();
                assert!(check_exclusive_law(&map), "{}", sq.id);
                for h in sq.states() {
                    assert!(removes(&c, &map, FadeState::new(h)), "{} at {h}", sq.id);
                }
            }
        }
    }

    #[test]
    fn published_square_lookup() {
        let a = published_square(ConstellationName::S4, "fig5a").unwrap();
        assert_eq!(a.rows()[0], vec![4, 1, 3, 2]);
        let xor8 = published_square(ConstellationName::S8, "fig11a").unwrap();
        assert_eq!(xor8.rows()[0], (1..=8).collect::<Vec<u8>>());
        assert!(xor8.same_clustering(&NetworkMap::xor(8)));
        assert!((xor8.removed_state().unwrap().value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let h = published_square(ConstellationName::S8, "fig10h").unwrap();
        assert_eq!(h.rows()[0], vec![7, 8, 6, 5, 3, 4, 1, 2]);
        assert!((h.removed_state().unwrap().value().re - (1.0 + s3())).abs() < 1e-12);
        assert!(matches!(
            published_square(ConstellationName::S4, "fig10a"),
            Err(Error::UnknownSquare { .. })
        ));
        assert!(published_square(ConstellationName::Psk4, "fig5a").is_err());
    }

    #[test]
    fn symmetry_derivations() {
        let s4 = build_named(ConstellationName::S4);
        let fig5b = published_square(ConstellationName::S4, "fig5b").unwrap();
        let neg = derive_by_symmetry(&s4, &fig5b, Transform::Negate).unwrap();
        assert!(brute_cluster_distance(&s4, &neg, Complex64::new(-1.0, 0.0)) > 1e-9);
        assert!((neg.removed_state().unwrap().value() + 1.0).norm() < 1e-12);

        let fig5a = published_square(ConstellationName::S4, "fig5a").unwrap();
        let inv = derive_by_symmetry(&s4, &fig5a, Transform::Invert).unwrap();
        assert_eq!(inv, fig5a.transpose().with_removed_state(inv.removed_state().unwrap()));
        let target = Complex64::new(0.5, s3() / 2.0).inv();
        assert!(removes(&s4, &inv, FadeState::new(target)));

        let same = derive_by_symmetry(&s4, &fig5a, Transform::Identity).unwrap();
        assert_eq!(same, fig5a);
    }

    #[test]
    fn rotation_by_quarter_turn_is_not_an_s8_symmetry_of_eighth_turn() {
        let s8 = build_named(ConstellationName::S8);
        let fig10a = published_square(ConstellationName::S8, "fig10a").unwrap();
        assert!(matches!(
            derive_by_symmetry(&s8, &fig10a, Transform::Rotate(FRAC_PI_4)),
            Err(Error::NotASymmetry(_))
        ));
        let rotated = derive_by_symmetry(&s8, &fig10a, Transform::Rotate(FRAC_PI_2)).unwrap();
        assert!((rotated.removed_state().unwrap().value()
            - Complex64::new(0.0, (1.0 + s3()) / 2.0))
        .norm()
            < 1e-12);
    }

    #[test]
    fn catalogs_cover_every_state() {
        let (_, _, s4) = named_catalog(ConstellationName::S4).unwrap();
        assert_eq!(s4.len(), 18);
        assert!(s4.entries().iter().all(|e| e.map.t() == 4));
        assert_eq!(s4.solver_fallbacks(), 0);

        let (c, _, s8) = named_catalog(ConstellationName::S8).unwrap();
        assert_eq!(s8.len(), 108);
        assert!(s8.entries().iter().all(|e| e.map.t() == 8));
        assert_eq!(s8.solver_fallbacks(), 0);
        for e in s8.entries() {
            assert!(check_exclusive_law(&e.map));
            assert!(removes(&c, &e.map, e.state));
        }
    }

    #[test]
    fn psk4_catalog_needs_five_symbols_off_the_axes() {
        let (_, _, cat) = named_catalog(ConstellationName::Psk4).unwrap();
        assert_eq!(cat.len(), 12);
        let four: Vec<Complex64> = cat
            .entries()
            .iter()
            .filter(|e| e.map.t() == 4)
            .map(|e| e.state.value())
            .collect();
        assert_eq!(four.len(), 4);
        for h in [Complex64::new(1.0, 0.0), -Complex64::new(1.0, 0.0), Complex64::i(), -Complex64::i()] {
            assert!(four.iter().any(|x| (x - h).norm() < 1e-9));
        }
        assert_eq!(cat.entries().iter().filter(|e| e.map.t() == 5).count(), 8);
        assert!(cat.solver_fallbacks() >= 1);
    }

    #[test]
    fn transpose_removes_inverse_over_catalog() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        for e in cat.entries() {
            let inv = e.state.inverse();
            assert!(removes(&c, &e.map.transpose(), inv));
        }
    }

    #[test]
    fn catalog_records_round_trip() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        let json = serde_json::to_string(&cat.to_records()).unwrap();
        let records: Vec<CatalogRecord> = serde_json::from_str(&json).unwrap();
        let back = MapCatalog::from_records(&c, &records).unwrap();
        assert_eq!(back, cat);
    }

    #[test]
    fn bc_sets() {
        let psk4 = build_named(ConstellationName::Psk4);
        let five = BcSignalSet::for_map(&psk4, 5);
        assert_eq!(five.len(), 5);
        assert!((five.constellation().energy() - 1.0).abs() < 1e-12);
        assert_eq!(five.point(5), Complex64::new(0.0, 0.0));
        let four = BcSignalSet::for_map(&psk4, 4);
        assert_eq!(four.constellation(), &psk4);
    }

    #[test]
    fn catalog_map_removes_with_scaled_constellation() {
        let (c, _, cat) = named_catalog(ConstellationName::S4).unwrap();
        for alpha in [0.01, 0.5, 7.0] {
            let scaled = c.scaled(alpha).unwrap();
            for e in cat.entries() {
                assert_eq!(removes(&c, &e.map, e.state), removes(&scaled, &e.map, e.state));
            }
        }
    }

    fn random_grid(n: usize, max_sym: u8) -> impl Strategy<Value = NetworkMap> {
        prop::collection::vec(1..=max_sym, n * n).prop_map(move |cells| {
            let rows: Vec<Vec<u8>> = cells.chunks(n).map(<[u8]>::to_vec).collect();
            NetworkMap::from_rows(&rows).unwrap()
        })
    }

    fn random_latin(n: usize) -> impl Strategy<Value = NetworkMap> {
        (
            Just(()).prop_perturb(move |_, mut rng| {
                let mut rows: Vec<usize> = (0..n).collect();
                let mut cols: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    rows.swap(i, rng.random_range(0..=i));
                    cols.swap(i, rng.random_range(0..=i));
                }
                (rows, cols)
            }),
            any::<bool>(),
        )
            .prop_map(move |((rows, cols), use_xor)| {
                let base = if use_xor {
                    NetworkMap::xor(n)
                } else {
                    let rows: Vec<Vec<u8>> = (0..n)
                        .map(|i| (0..n).map(|j| ((i + j) % n + 1) as u8).collect())
                        .collect();
                    NetworkMap::from_rows(&rows).unwrap()
                };
                base.permuted(&rows, &cols)
            })
    }

    proptest! {
        #[test]
        fn latin_check_matches_pair_scan(m in random_grid(4, 4)) {
            prop_assert_eq!(check_exclusive_law(&m), exclusive_law_pairs(&m));
        }

        #[test]
        fn latin_check_accepts_permuted_latin_squares(m in random_latin(8)) {
            prop_assert!(check_exclusive_law(&m));
            prop_assert!(exclusive_law_pairs(&m));
        }

        #[test]
        fn cluster_distance_matches_brute_force(m in random_latin(4), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for name in [ConstellationName::S4, ConstellationName::Psk4] {
                let c = build_named(name);
                for _ in 0..25 {
                    let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    let got = min_cluster_distance(&c, &m, FadeState::new(z));
                    let want = brute_cluster_distance(&c, &m, z);
                    prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
                }
            }
        }

        #[test]
        fn finest_clustering_equals_d_min_at(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let c = build_named(ConstellationName::S4);
            let rows: Vec<Vec<u8>> = (0..4).map(|i| (0..4).map(|j| (4 * i + j + 1) as u8).collect()).collect();
            let finest = NetworkMap::from_rows(&rows).unwrap();
            let z = FadeState::from_parts(re, im);
            let got = min_cluster_distance(&c, &finest, z);
            let want = crate::singular::d_min_at(&c, z);
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
        }
    }

    #[test]
    fn canonical_relabelling() {
        let a = published_square(ConstellationName::S4, "fig5a").unwrap();
        let canon = a.canonical();
        assert_eq!(canon.rows()[0], vec![1, 2, 3, 4]);
        assert!(a.same_clustering(&canon));
        let cat = enumerate_singular_states(&build_named(ConstellationName::S4));
        assert_eq!(cat.len(), 18);
    }
}
