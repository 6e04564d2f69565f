//! Signal sets used by the end nodes in the MA phase.
//!
//! Besides the conventional 4-PSK, 8-PSK and 8-cross QAM this module builds
//! the two unconventional sets `s4` and `s8`:
//!
//! - `s4` is a rhombus made of two equilateral triangles sharing the short
//!   diagonal, with the short diagonal on the real axis and the long one on
//!   the imaginary axis.
//! - `s8` is a 4-PSK on the diagonals with an apex point on each axis, each
//!   apex completing an equilateral triangle with its two QPSK neighbours.
//!
//! Both are labelled so that the published Latin squares apply verbatim:
//! point `k` of the constellation is symbol `k + 1` of the squares.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEDUP_TOL};

/// The five signal sets with built-in coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationName {
    Psk4,
    S4,
    Psk8,
    Qam8Cross,
    S8,
}

impl ConstellationName {
    pub const ALL: [ConstellationName; 5] = [
        ConstellationName::Psk4,
        ConstellationName::S4,
        ConstellationName::Psk8,
        ConstellationName::Qam8Cross,
        ConstellationName::S8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstellationName::Psk4 => "psk4",
            ConstellationName::S4 => "s4",
            ConstellationName::Psk8 => "psk8",
            ConstellationName::Qam8Cross => "qam8cross",
            ConstellationName::S8 => "s8",
        }
    }
}

impl fmt::Display for ConstellationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstellationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstellationName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownConstellation(s.to_string()))
    }
}

/// An ordered set of distinct, finite complex signal points.
///
/// Constellations produced by [`normalize_energy`], [`build_named`] and
/// [`Constellation::from_descriptor`] have unit average energy. Other
/// constructors only check the structural invariants, so scaled copies can
/// be made with [`Constellation::scaled`].
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    label: String,
    points: Vec<Complex64>,
}

impl Constellation {
    /// Wraps `points` as-is after checking they are finite, distinct and at
    /// least two.
    pub fn new(label: impl Into<String>, points: Vec<Complex64>) -> Result<Self> {
        validate_points(&points)?;
        Ok(Constellation {
            label: label.into(),
            points,
        })
    }

    /// Looks up one of the five named signal sets.
    pub fn named(name: &str) -> Result<Self> {
        Ok(build_named(name.parse()?))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average energy `(1/M) Σ |s_i|²`.
    pub fn energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Minimum distance over distinct pairs of points.
    pub fn d_min(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// All pairwise differences `x - x'`, deduplicated.
    pub fn difference_set(&self) -> DifferenceSet {
        DifferenceSet::of(self)
    }

    /// Every point multiplied by `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scale factor must be positive and finite, got {alpha}"
            )));
        }
        Constellation::new(
            self.label.clone(),
            self.points.iter().map(|p| p * alpha).collect(),
        )
    }

    /// The permutation `perm` with `points[perm[i]] == f(points[i])`, if `f`
    /// maps the constellation onto itself.
    pub fn induced_permutation(&self, f: impl Fn(Complex64) -> Complex64) -> Option<Vec<usize>> {
        let tol = DEDUP_TOL * self.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut perm = Vec::with_capacity(self.len());
        let mut used = vec![false; self.len()];
        for &p in &self.points {
            let image = f(p);
            let j = self
                .points
                .iter()
                .position(|q| (q - image).norm() <= tol)?;
            if used[j] {
                return None;
            }
            used[j] = true;
            perm.push(j);
        }
        Some(perm)
    }

    /// Index of the point closest to `y`, lowest index on ties.
    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn to_descriptor(&self) -> ConstellationDescriptor {
        ConstellationDescriptor {
            label: self.label.clone(),
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
        }
    }

    /// Builds a unit-energy constellation from a JSON descriptor.
    pub fn from_descriptor(desc: &ConstellationDescriptor) -> Result<Self> {
        let points: Vec<Complex64> = desc
            .points
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        normalize_energy(desc.label.clone(), &points)
    }
}

/// On-disk form of a constellation: `{"label": ..., "points": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationDescriptor {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

fn validate_points(points: &[Complex64]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i + 1) {
            if (a - b).norm() <= DEDUP_TOL * scale.max(1.0) {
                return Err(Error::DuplicatePoints(i, j));
            }
        }
    }
    Ok(())
}

/// Scales `points` by one positive real so the average energy is 1.
pub fn normalize_energy(label: impl Into<String>, points: &[Complex64]) -> Result<Constellation> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let scale = energy.sqrt().recip();
    Constellation::new(label, points.iter().map(|p| p * scale).collect())
}

/// Energy-normalised coordinates of a named signal set.
pub fn build_named(name: ConstellationName) -> Constellation {
    let sqrt3 = 3f64.sqrt();
    let points: Vec<Complex64> = match name {
        ConstellationName::Psk4 => (0..4)
            .map(|k| Complex64::from_polar(1.0, FRAC_PI_4 + k as f64 * FRAC_PI_2))
            .collect(),
        ConstellationName::Psk8 => (0..8)
            .map(|k| Complex64::from_polar(1.0, k as f64 * FRAC_PI_4))
            .collect(),
        ConstellationName::Qam8Cross => [
            (-1.0, 2.0),
            (1.0, 2.0),
            (-3.0, 0.0),
            (-1.0, 0.0),
            (1.0, 0.0),
            (3.0, 0.0),
            (-1.0, -2.0),
            (1.0, -2.0),
        ]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect(),
        ConstellationName::S4 => {
            // Side d; the short diagonal (length d) lies on the real axis.
            let d = 1.0;
            vec![
                Complex64::new(d / 2.0, 0.0),
                Complex64::new(0.0, d * sqrt3 / 2.0),
                Complex64::new(-d / 2.0, 0.0),
                Complex64::new(0.0, -d * sqrt3 / 2.0),
            ]
        }
        ConstellationName::S8 => {
            // Inner QPSK at radius 1 on the diagonals. The midpoint of a QPSK
            // side sits at 1/√2 on an axis and the triangle height is √2·√3/2.
            let inner = 1.0;
            let apex = inner * (1.0 + sqrt3) / SQRT_2;
            (0..8)
                .map(|k| {
                    let angle = FRAC_PI_4 * (k as f64 + 1.0);
                    let r = if k % 2 == 0 { inner } else { apex };
                    Complex64::from_polar(r, angle)
                })
                .collect()
        }
    };
    normalize_energy(name.as_str(), &points).expect("built-in coordinates are valid")
}

/// The difference constellation `ΔS = {x - x' : x, x' ∈ S}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSet {
    values: Vec<Complex64>,
    tol: f64,
}

impl DifferenceSet {
    fn of(c: &Constellation) -> Self {
        let scale = c.points().iter().map(|p| p.norm()).fold(1.0, f64::max);
        let tol = DEDUP_TOL * scale;
        let mut values: Vec<Complex64> = Vec::new();
        for a in c.points() {
            for b in c.points() {
                let d = a - b;
                if !values.iter().any(|v| (v - d).norm() <= tol) {
                    values.push(d);
                }
            }
        }
        DifferenceSet { values, tol }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The values other than 0.
    pub fn nonzero(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().copied().filter(|v| v.norm() > self.tol)
    }

    pub fn index_of(&self, value: Complex64) -> Option<usize> {
        self.values
            .iter()
            .position(|v| (v - value).norm() <= self.tol)
    }

    pub fn contains(&self, value: Complex64) -> bool {
        self.index_of(value).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn named_sets_have_unit_energy() {
        for name in ConstellationName::ALL {
            let s = build_named(name);
            assert!((s.energy() - 1.0).abs() < 1e-9, "{name}");
            assert_eq!(s.label(), name.as_str());
        }
    }

    #[test]
    fn table_d_min_values() {
        let d = |n| build_named(n).d_min();
        assert!((d(ConstellationName::Psk4) - 2f64.sqrt()).abs() < 5e-4);
        assert!((d(ConstellationName::S4) - 2f64.sqrt()).abs() < 5e-4);
        assert!((d(ConstellationName::Psk8) - 0.7653).abs() < 5e-4);
        assert!((d(ConstellationName::Qam8Cross) - 0.8944).abs() < 5e-4);
        assert!((d(ConstellationName::S8) - 0.9194).abs() < 5e-4);
    }

    #[test]
    fn antipodal_d_min_is_two() {
        let s = Constellation::new("bpsk", vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(s.d_min(), 2.0);
    }

    #[test]
    fn s4_is_two_equilateral_triangles() {
        let s = build_named(ConstellationName::S4);
        let p = s.points();
        let dist = |i: usize, j: usize| (p[i] - p[j]).norm();
        for (a, b, c) in [(0, 1, 2), (0, 2, 3)] {
            assert!((dist(a, b) - dist(b, c)).abs() < 1e-9);
            assert!((dist(a, b) - dist(a, c)).abs() < 1e-9);
        }
        // long diagonal on the imaginary axis
        assert!(p[1].re.abs() < 1e-12 && p[3].re.abs() < 1e-12);
    }

    #[test]
    fn s8_geometry() {
        let s = build_named(ConstellationName::S8);
        let p = s.points();
        let r = p[0].norm();
        for k in [0, 2, 4, 6] {
            assert!((p[k].norm() - r).abs() < 1e-9);
            let next = p[(k + 2) % 8] / p[k];
            assert!((next - c(0.0, 1.0)).norm() < 1e-9);
        }
        for k in [0, 2, 4, 6] {
            let (a, b, cc) = (p[k], p[k + 1], p[(k + 2) % 8]);
            let side = (a - cc).norm();
            assert!(((a - b).norm() - side).abs() < 1e-9);
            assert!(((b - cc).norm() - side).abs() < 1e-9);
        }
    }

    #[test]
    fn difference_set_of_antipodal_pair() {
        let s = Constellation::new("bpsk", vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let ds = s.difference_set();
        assert_eq!(ds.len(), 3);
        for v in [c(0.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0)] {
            assert!(ds.contains(v));
        }
    }

    #[test]
    fn difference_sets_are_negation_closed() {
        for name in ConstellationName::ALL {
            let ds = build_named(name).difference_set();
            assert!(ds.contains(Complex64::new(0.0, 0.0)));
            for &v in ds.values() {
                assert!(ds.contains(-v), "{name}");
            }
        }
    }

    #[test]
    fn s4_difference_set_has_nine_values() {
        let s = build_named(ConstellationName::S4);
        // brute force: all 16 differences, deduplicate by hand
        let mut seen: Vec<Complex64> = Vec::new();
        for a in s.points() {
            for b in s.points() {
                let d = a - b;
                if seen.iter().all(|x| (x - d).norm() > 1e-9) {
                    seen.push(d);
                }
            }
        }
        assert_eq!(seen.len(), 9);
        assert_eq!(s.difference_set().len(), 9);
    }

    #[test]
    fn normalize_examples() {
        let sq = [c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 1.0), c(-1.0, -1.0)];
        let n = normalize_energy("sq", &sq).unwrap();
        for (a, b) in n.points().iter().zip(&sq) {
            assert!((a - b / 2f64.sqrt()).norm() < 1e-12);
        }
        let n = normalize_energy("pm2", &[c(2.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert!((n.points()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((n.points()[1] - c(-1.0, 0.0)).norm() < 1e-12);

        let psk8 = build_named(ConstellationName::Psk8);
        let again = normalize_energy("psk8", psk8.points()).unwrap();
        for (a, b) in again.points().iter().zip(psk8.points()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_bad_input() {
        let z = c(0.0, 0.0);
        assert!(matches!(normalize_energy("z", &[z, z]), Err(Error::ZeroEnergy)));
        assert!(matches!(
            normalize_energy("dup", &[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::DuplicatePoints(0, 1))
        ));
        assert!(matches!(
            normalize_energy("one", &[c(1.0, 0.0)]),
            Err(Error::TooFewPoints(1))
        ));
        assert!(matches!(
            normalize_energy("nan", &[c(f64::NAN, 0.0), c(1.0, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            Constellation::named("16qam"),
            Err(Error::UnknownConstellation(_))
        ));
        assert_eq!(Constellation::named("S8").unwrap().len(), 8);
    }

    #[test]
    fn descriptor_round_trip() {
        let s = build_named(ConstellationName::Qam8Cross);
        let json = serde_json::to_string(&s.to_descriptor()).unwrap();
        let back: ConstellationDescriptor = serde_json::from_str(&json).unwrap();
        let s2 = Constellation::from_descriptor(&back).unwrap();
        for (a, b) in s.points().iter().zip(s2.points()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn induced_permutation_of_negation() {
        let s = build_named(ConstellationName::S4);
        assert_eq!(s.induced_permutation(|p| -p), Some(vec![2, 3, 0, 1]));
        assert_eq!(s.induced_permutation(|p| p.conj()), Some(vec![0, 3, 2, 1]));
        assert!(s.induced_permutation(|p| p * Complex64::i()).is_none());
    }

    fn point_sets() -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..9).prop_filter_map(
            "distinct points",
            |raw| {
                let pts: Vec<Complex64> = raw.into_iter().map(|(a, b)| c(a, b)).collect();
                validate_points(&pts).ok().map(|_| pts)
            },
        )
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(pts in point_sets()) {
            let once = normalize_energy("p", &pts).unwrap();
            let twice = normalize_energy("p", once.points()).unwrap();
            for (a, b) in once.points().iter().zip(twice.points()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn d_min_scales_linearly(pts in point_sets(), alpha in 0.01f64..100.0) {
            let s = Constellation::new("p", pts).unwrap();
            let scaled = s.scaled(alpha).unwrap();
            prop_assert!((scaled.d_min() - alpha * s.d_min()).abs() <= 1e-9 * alpha.max(1.0) * s.d_min().max(1.0));
        }

        #[test]
        fn difference_set_cardinality_bound(pts in point_sets()) {
            let s = Constellation::new("p", pts).unwrap();
            let m = s.len();
            prop_assert!(s.difference_set().len() <= m * m - m + 1);
        }
    }
}
