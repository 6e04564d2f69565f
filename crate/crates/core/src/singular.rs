//! Singular fade states.
//!
//! At fade state `z` the relay sees the effective constellation
//! `{x_A + z x_B}`. Its minimum distance vanishes exactly when
//! `z = -d_k / d_l` for nonzero differences `d_k, d_l` of the signal set;
//! those values are the singular fade states `H`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::DEDUP_TOL;

/// A fade state `z = γ e^{jθ}`, the ratio `h_B / h_A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadeState {
    value: Complex64,
    gamma: f64,
    theta: f64,
}

impl FadeState {
    pub fn new(value: Complex64) -> Self {
        let gamma = value.norm();
        let mut theta = value.arg();
        if theta >= PI {
            theta -= 2.0 * PI;
        }
        FadeState {
            value,
            gamma,
            theta,
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Self {
        FadeState::new(Complex64::new(re, im))
    }

    pub fn from_polar(gamma: f64, theta: f64) -> Self {
        FadeState::new(Complex64::from_polar(gamma, theta))
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Phase in `[-π, π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn inverse(&self) -> FadeState {
        FadeState::new(self.value.inv())
    }
}

impl From<Complex64> for FadeState {
    fn from(value: Complex64) -> Self {
        FadeState::new(value)
    }
}

impl std::fmt::Display for FadeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6}{:+.6}j", self.value.re, self.value.im)
    }
}

/// The deduplicated singular fade states of a constellation in canonical
/// order: ascending `|h|` (rounded to 1e-9), then ascending phase.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularFadeCatalog {
    states: Vec<FadeState>,
    source: String,
}

impl SingularFadeCatalog {
    pub fn states(&self) -> &[FadeState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Label of the constellation the catalog was enumerated from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Index of the state within `tol` of `z`.
    pub fn index_of(&self, z: Complex64, tol: f64) -> Option<usize> {
        self.states
            .iter()
            .position(|h| (h.value - z).norm() <= tol * h.gamma.max(1.0))
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.index_of(z, tol).is_some()
    }
}

fn same_state(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= DEDUP_TOL * a.norm().max(1.0)
}

fn canonical_key(h: &FadeState) -> (i64, f64) {
    ((h.gamma * 1e9).round() as i64, h.theta)
}

/// All distinct nonzero finite ratios `-d_k / d_l` over nonzero `d_k, d_l`
/// in the difference set.
pub fn enumerate_singular_states(c: &Constellation) -> SingularFadeCatalog {
    let diffs: Vec<Complex64> = c.difference_set().nonzero().collect();
    let mut found: Vec<Complex64> = Vec::new();
    for &dk in &diffs {
        for &dl in &diffs {
            let h = -dk / dl;
            if !found.iter().any(|&x| same_state(x, h)) {
                found.push(h);
            }
        }
    }
    let mut states: Vec<FadeState> = found.into_iter().map(FadeState::new).collect();
    states.sort_by(|a, b| {
        let (ra, ta) = canonical_key(a);
        let (rb, tb) = canonical_key(b);
        ra.cmp(&rb).then(ta.total_cmp(&tb))
    });
    SingularFadeCatalog {
        states,
        source: c.label().to_string(),
    }
}

/// Minimum distance of the effective constellation `{x_A + z x_B}` over
/// distinct transmit pairs.
pub fn d_min_at(c: &Constellation, z: FadeState) -> f64 {
    let z = z.value();
    let effective: Vec<Complex64> = c
        .points()
        .iter()
        .flat_map(|&a| c.points().iter().map(move |&b| a + z * b))
        .collect();
    let mut best = f64::INFINITY;
    for (i, p) in effective.iter().enumerate() {
        for q in &effective[i + 1..] {
            best = best.min((p - q).norm());
        }
    }
    best
}

/// Groups the states by `|h|` (1e-6 tolerance), ascending.
pub fn classify_by_radius(cat: &SingularFadeCatalog) -> Vec<(f64, usize)> {
    let mut radii: Vec<f64> = cat.states.iter().map(|h| h.gamma).collect();
    radii.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for r in radii {
        match groups.last_mut() {
            Some((r0, n)) if (r - *r0).abs() <= 1e-6 => *n += 1,
            _ => groups.push((r, 1)),
        }
    }
    groups
}
