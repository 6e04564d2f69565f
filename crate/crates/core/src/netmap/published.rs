//! The published removing squares for `s4` and `s8`, verbatim.
//!
//! Squares are indexed by their figure panel. The `s8` squares cover the
//! states with `|h| >= 1` and phase in `[0, π/4]`; everything else follows
//! by symmetry.

use num_complex::Complex64;

use crate::constellation::{build_named, Constellation, ConstellationName};
use crate::netmap::NetworkMap;
use crate::singular::FadeState;
use crate::{Error, Result};

/// A state written as `(a + b√3) + j(c + d√3)`.
#[derive(Clone, Copy, Debug)]
pub struct SurdState(pub f64, pub f64, pub f64, pub f64);

impl SurdState {
    pub fn value(self) -> Complex64 {
        let s3 = 3f64.sqrt();
        Complex64::new(self.0 + self.1 * s3, self.2 + self.3 * s3)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PublishedSquare {
    pub id: &'static str,
    pub rows: &'static [&'static [u8]],
    /// States the square is published for; the first one is its primary.
    pub removes: &'static [SurdState],
}

impl PublishedSquare {
    pub fn states(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.removes.iter().map(|s| s.value())
    }
}

const S4_SQUARES: &[PublishedSquare] = &[
    PublishedSquare {
        id: "fig5a",
        rows: &[&[4, 1, 3, 2], &[2, 3, 1, 4], &[1, 4, 2, 3], &[3, 2, 4, 1]],
        removes: &[SurdState(0.5, 0.0, 0.0, 0.5)],
    },
    PublishedSquare {
        id: "fig5b",
        rows: &[&[1, 2, 3, 4], &[2, 1, 4, 3], &[3, 4, 1, 2], &[4, 3, 2, 1]],
        removes: &[SurdState(1.0, 0.0, 0.0, 0.0), SurdState(0.0, 0.0, 0.0, 1.0)],
    },
    PublishedSquare {
        id: "fig5c",
        rows: &[&[4, 3, 2, 1], &[3, 4, 1, 2], &[1, 2, 4, 3], &[2, 1, 3, 4]],
        removes: &[SurdState(1.5, 0.0, 0.0, 0.5)],
    },
];

const S8_SQUARES: &[PublishedSquare] = &[
    PublishedSquare {
        id: "fig10a",
        rows: &[
            &[2, 7, 5, 6, 3, 4, 1, 8],
            &[3, 6, 8, 4, 1, 5, 2, 7],
            &[5, 4, 6, 2, 7, 3, 8, 1],
            &[1, 2, 7, 5, 6, 8, 3, 4],
            &[6, 5, 4, 3, 8, 1, 7, 2],
            &[4, 8, 3, 1, 2, 7, 6, 5],
            &[7, 3, 1, 8, 5, 2, 4, 6],
            &[8, 1, 2, 7, 4, 6, 5, 3],
        ],
        removes: &[SurdState(0.5, 0.5, 0.0, 0.0)],
    },
    PublishedSquare {
        id: "fig10b",
        rows: &[
            &[3, 8, 7, 6, 1, 5, 2, 4],
            &[7, 3, 8, 5, 2, 4, 1, 6],
            &[6, 5, 1, 4, 7, 2, 3, 8],
            &[5, 6, 2, 3, 8, 1, 4, 7],
            &[2, 4, 6, 7, 3, 8, 5, 1],
            &[1, 7, 5, 8, 4, 3, 6, 2],
            &[8, 2, 4, 1, 5, 6, 7, 3],
            &[4, 1, 3, 2, 6, 7, 8, 5],
        ],
        removes: &[SurdState(0.75, 0.25, 0.25, 0.25)],
    },
    PublishedSquare {
        id: "fig10c",
        rows: &[
            &[6, 7, 5, 1, 8, 3, 2, 4],
            &[1, 8, 7, 2, 3, 4, 5, 6],
            &[5, 2, 3, 4, 1, 6, 8, 7],
            &[3, 6, 4, 5, 2, 1, 7, 8],
            &[8, 4, 1, 6, 5, 7, 3, 2],
            &[4, 3, 6, 8, 7, 2, 1, 5],
            &[7, 5, 2, 3, 6, 8, 4, 1],
            &[2, 1, 8, 7, 4, 5, 6, 3],
        ],
        removes: &[SurdState(0.5, 0.5, -0.5, 0.5)],
    },
    PublishedSquare {
        id: "fig10d",
        rows: &[
            &[3, 7, 1, 4, 2, 6, 8, 5],
            &[8, 5, 7, 3, 6, 4, 1, 2],
            &[7, 2, 4, 8, 5, 3, 6, 1],
            &[5, 6, 2, 1, 4, 7, 3, 8],
            &[1, 4, 8, 6, 7, 5, 2, 3],
            &[2, 3, 6, 5, 8, 1, 7, 4],
            &[6, 1, 5, 2, 3, 8, 4, 7],
            &[4, 8, 3, 7, 1, 2, 5, 6],
        ],
        removes: &[SurdState(1.0, 0.0, 1.0, 0.0)],
    },
    PublishedSquare {
        id: "fig10e",
        rows: &[
            &[2, 4, 6, 3, 7, 8, 5, 1],
            &[7, 8, 5, 1, 4, 2, 3, 6],
            &[6, 3, 2, 4, 5, 1, 7, 8],
            &[5, 1, 7, 8, 3, 6, 4, 2],
            &[8, 7, 1, 5, 2, 4, 6, 3],
            &[4, 2, 3, 6, 8, 7, 1, 5],
            &[1, 5, 8, 7, 6, 3, 2, 4],
            &[3, 6, 4, 2, 1, 5, 8, 7],
        ],
        removes: &[SurdState(0.5, 0.5, 0.5, 0.5)],
    },
    PublishedSquare {
        id: "fig10f",
        rows: &[
            &[6, 4, 3, 1, 7, 5, 8, 2],
            &[7, 8, 2, 6, 5, 3, 4, 1],
            &[8, 1, 7, 3, 4, 6, 2, 5],
            &[3, 5, 6, 8, 2, 1, 7, 4],
            &[1, 2, 8, 5, 6, 4, 3, 7],
            &[2, 3, 4, 7, 1, 8, 5, 6],
            &[4, 6, 5, 2, 8, 7, 1, 3],
            &[5, 7, 1, 4, 3, 2, 6, 8],
        ],
        removes: &[SurdState(1.0, 0.5, 0.5, 0.0)],
    },
    PublishedSquare {
        id: "fig10g",
        rows: &[
            &[8, 7, 6, 5, 4, 3, 1, 2],
            &[3, 6, 1, 7, 8, 2, 4, 5],
            &[2, 5, 3, 6, 1, 4, 8, 7],
            &[7, 2, 5, 1, 3, 8, 6, 4],
            &[6, 4, 2, 8, 7, 5, 3, 1],
            &[5, 1, 8, 4, 6, 7, 2, 3],
            &[1, 3, 4, 2, 5, 6, 7, 8],
            &[4, 8, 7, 3, 2, 1, 5, 6],
        ],
        removes: &[SurdState(1.5, 0.5, 0.5, 0.5)],
    },
    PublishedSquare {
        id: "fig10h",
        rows: &[
            &[7, 8, 6, 5, 3, 4, 1, 2],
            &[4, 5, 8, 7, 1, 6, 2, 3],
            &[1, 7, 5, 3, 8, 2, 6, 4],
            &[3, 6, 7, 1, 2, 8, 4, 5],
            &[8, 3, 4, 2, 5, 1, 7, 6],
            &[2, 4, 1, 8, 6, 3, 5, 7],
            &[6, 1, 2, 4, 7, 5, 3, 8],
            &[5, 2, 3, 6, 4, 7, 8, 1],
        ],
        removes: &[SurdState(1.0, 1.0, 0.0, 0.0)],
    },
    PublishedSquare {
        id: "fig11a",
        rows: &[
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[2, 1, 4, 3, 6, 5, 8, 7],
            &[3, 4, 1, 2, 7, 8, 5, 6],
            &[4, 3, 2, 1, 8, 7, 6, 5],
            &[5, 6, 7, 8, 1, 2, 3, 4],
            &[6, 5, 8, 7, 2, 1, 4, 3],
            &[7, 8, 5, 6, 3, 4, 1, 2],
            &[8, 7, 6, 5, 4, 3, 2, 1],
        ],
        removes: &[SurdState(1.0, 0.0, 0.0, 0.0)],
    },
    PublishedSquare {
        id: "fig11b",
        rows: &[
            &[1, 8, 2, 3, 7, 4, 6, 5],
            &[8, 7, 4, 5, 2, 6, 1, 3],
            &[4, 6, 5, 2, 3, 7, 8, 1],
            &[5, 4, 7, 6, 1, 8, 3, 2],
            &[3, 5, 1, 4, 8, 2, 7, 6],
            &[7, 3, 8, 1, 6, 5, 2, 4],
            &[6, 2, 3, 8, 5, 1, 4, 7],
            &[2, 1, 6, 7, 4, 3, 5, 8],
        ],
        removes: &[SurdState(0.0, 0.5, 0.5, 0.0)],
    },
];

pub fn published_squares(name: ConstellationName) -> &'static [PublishedSquare] {
    match name {
        ConstellationName::S4 => S4_SQUARES,
        ConstellationName::S8 => S8_SQUARES,
        _ => &[],
    }
}

/// A published square with its primary state as `removed_state`.
pub fn published_square(name: ConstellationName, id: &str) -> Result<NetworkMap> {
    let sq = published_squares(name)
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownSquare {
            constellation: name.to_string(),
            id: id.to_string(),
        })?;
    Ok(NetworkMap::from_rows(sq.rows)?.with_removed_state(FadeState::new(sq.removes[0].value())))
}

/// One `(id, map)` per published (square, state) pair, if `c` is one of the
/// named sets that has published squares. Empty for anything else.
pub fn published_bases(c: &Constellation) -> Vec<(String, NetworkMap)> {
    let Ok(name) = c.label().parse::<ConstellationName>() else {
        return Vec::new();
    };
    let reference = build_named(name);
    let matches = reference.len() == c.len()
        && reference
            .points()
            .iter()
            .zip(c.points())
            .all(|(a, b)| (a - b).norm() < 1e-9);
    if !matches {
        return Vec::new();
    }
    let mut out = Vec::new();
    for sq in published_squares(name) {
        let map = NetworkMap::from_rows(sq.rows).expect("published squares are well formed");
        for h in sq.states() {
            out.push((sq.id.to_string(), map.clone().with_removed_state(FadeState::new(h))));
        }
    }
    out
}
