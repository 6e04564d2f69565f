//! Removing squares from first principles.
//!
//! A map removes `h` iff every pair of transmit pairs that collide at `h`
//! shares a cluster. The collisions, closed transitively, partition the
//! `M²` cells into blocks that must each carry one symbol; the search then
//! colours the blocks so no symbol repeats in a row or a column.
//!
//! The colouring is an exhaustive backtracking search: pick the uncoloured
//! block with the fewest admissible symbols (ties by the block's minimum row,
//! then minimum column), try symbols in ascending order, and never open more
//! than one fresh symbol at a time since unused symbols are interchangeable.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::netmap::NetworkMap;
use crate::singular::FadeState;
use crate::{Error, Result, ZERO_DISTANCE_TOL};

/// Largest symbol count the search handles (symbol sets are `u64` masks).
pub const MAX_SYMBOLS: usize = 64;

/// Cells of an `M x M` square grouped into blocks that must share a symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintPartition {
    size: usize,
    blocks: Vec<Vec<(usize, usize)>>,
}

impl ConstraintPartition {
    /// Every cell in its own block.
    pub fn singletons(size: usize) -> Self {
        let blocks = (0..size)
            .flat_map(|i| (0..size).map(move |j| vec![(i, j)]))
            .collect();
        ConstraintPartition { size, blocks }
    }

    /// Builds a partition from arbitrary blocks, checking that they cover
    /// the square exactly once and never put two cells of a row or a column
    /// together.
    pub fn from_blocks(size: usize, mut blocks: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let mut seen = vec![false; size * size];
        for block in &mut blocks {
            block.sort_unstable();
            for &(i, j) in block.iter() {
                if i >= size || j >= size || seen[i * size + j] {
                    return Err(Error::InvalidConfig(format!(
                        "cell ({i}, {j}) is out of range or repeated"
                    )));
                }
                seen[i * size + j] = true;
            }
            if has_line_conflict(block) {
                return Err(Error::ExclusiveLawConflict {
                    state: "(explicit partition)".into(),
                });
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidConfig("partition does not cover every cell".into()));
        }
        blocks.sort_by_key(|b| block_key(b));
        Ok(ConstraintPartition { size, blocks })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Blocks ordered by (minimum row, minimum column, first cell), cells
    /// row-major.
    pub fn blocks(&self) -> &[Vec<(usize, usize)>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

fn block_key(block: &[(usize, usize)]) -> (usize, usize, (usize, usize)) {
    let row = block.iter().map(|c| c.0).min().unwrap_or(0);
    let col = block.iter().map(|c| c.1).min().unwrap_or(0);
    (row, col, block.first().copied().unwrap_or_default())
}

fn has_line_conflict(block: &[(usize, usize)]) -> bool {
    block.iter().enumerate().any(|(k, &(i, j))| {
        block[k + 1..]
            .iter()
            .any(|&(i2, j2)| i == i2 || j == j2)
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Transitive closure of "collides at `h`" over the cells of the square:
/// `(i, j) ~ (i', j')` iff `|(s_i - s_i') + h (s_j - s_j')| < 1e-9`.
pub fn singularity_constraints(c: &Constellation, h: FadeState) -> Result<ConstraintPartition> {
    let n = c.len();
    let p = c.points();
    let z = h.value();
    let received: Vec<Complex64> = (0..n * n).map(|k| p[k / n] + z * p[k % n]).collect();
    let mut parent: Vec<usize> = (0..n * n).collect();
    for a in 0..n * n {
        for b in a + 1..n * n {
            if (received[a] - received[b]).norm() < ZERO_DISTANCE_TOL {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut by_root: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n];
    for k in 0..n * n {
        let r = find(&mut parent, k);
        by_root[r].push((k / n, k % n));
    }
    let mut blocks: Vec<Vec<(usize, usize)>> =
        by_root.into_iter().filter(|b| !b.is_empty()).collect();
    if blocks.iter().any(|b| has_line_conflict(b)) {
        return Err(Error::ExclusiveLawConflict {
            state: h.to_string(),
        });
    }
    blocks.sort_by_key(|b| block_key(b));
    Ok(ConstraintPartition { size: n, blocks })
}

struct Search<'a> {
    blocks: &'a [Vec<(usize, usize)>],
    row_used: Vec<u64>,
    col_used: Vec<u64>,
    symbol: Vec<Option<u8>>,
    all: u64,
}

impl Search<'_> {
    fn admissible(&self, b: usize) -> u64 {
        let mut used = 0u64;
        for &(i, j) in &self.blocks[b] {
            used |= self.row_used[i] | self.col_used[j];
        }
        self.all & !used
    }

    fn place(&mut self, b: usize, s: u8) {
        let bit = 1u64 << s;
        for &(i, j) in &self.blocks[b] {
            self.row_used[i] |= bit;
            self.col_used[j] |= bit;
        }
        self.symbol[b] = Some(s);
    }

    fn unplace(&mut self, b: usize, s: u8) {
        let bit = !(1u64 << s);
        for &(i, j) in &self.blocks[b] {
            self.row_used[i] &= bit;
            self.col_used[j] &= bit;
        }
        self.symbol[b] = None;
    }

    /// `opened` is the number of distinct symbols in use so far.
    fn run(&mut self, opened: u32) -> bool {
        let mut pick = None;
        let mut pick_count = u32::MAX;
        let mut pick_mask = 0;
        for b in 0..self.blocks.len() {
            if self.symbol[b].is_some() {
                continue;
            }
            let mask = self.admissible(b);
            let count = mask.count_ones();
            if count < pick_count {
                pick = Some(b);
                pick_count = count;
                pick_mask = mask;
                if count == 0 {
                    return false;
                }
            }
        }
        let Some(b) = pick else {
            return true;
        };
        // symbols above `opened` are interchangeable; try only the first
        let fresh_limit = if opened as usize >= 64 {
            u64::MAX
        } else {
            (1u64 << (opened + 1)) - 1
        };
        let mut mask = pick_mask & fresh_limit;
        while mask != 0 {
            let s = mask.trailing_zeros() as u8;
            mask &= mask - 1;
            self.place(b, s);
            let next_opened = opened.max(s as u32 + 1);
            if self.run(next_opened) {
                return true;
            }
            self.unplace(b, s);
        }
        false
    }
}

/// A row- and column-repeat-free symbol assignment to the blocks using at
/// most `t_target` symbols, or `None` if none exists.
pub fn complete_latin_square(p: &ConstraintPartition, t_target: usize) -> Option<NetworkMap> {
    let n = p.size;
    let t = t_target.min(MAX_SYMBOLS);
    if t < n {
        return None;
    }
    let mut search = Search {
        blocks: &p.blocks,
        row_used: vec![0; n],
        col_used: vec![0; n],
        symbol: vec![None; p.blocks.len()],
        all: if t == 64 { u64::MAX } else { (1u64 << t) - 1 },
    };
    if !search.run(0) {
        return None;
    }
    let mut grid = vec![vec![0u8; n]; n];
    for (block, s) in p.blocks.iter().zip(&search.symbol) {
        let s = s.expect("complete assignment") + 1;
        for &(i, j) in block {
            grid[i][j] = s;
        }
    }
    Some(NetworkMap::from_rows(&grid).expect("grid is square with symbols >= 1"))
}

/// Smallest symbol count `t(h)` of a removing square, with a witness.
pub fn min_t(c: &Constellation, h: FadeState) -> Result<(usize, NetworkMap)> {
    let partition = singularity_constraints(c, h)?;
    let n = c.len();
    for t in n..=(n * n).min(MAX_SYMBOLS) {
        if let Some(map) = complete_latin_square(&partition, t) {
            return Ok((map.t(), map.with_removed_state(h)));
        }
    }
    Err(Error::NoRemovingMap {
        state: h.to_string(),
    })
}
