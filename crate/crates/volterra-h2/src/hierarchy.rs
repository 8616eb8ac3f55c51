//! Dyadic interval hierarchy over a uniform grid.
//!
//! Cells are numbered from 1. On level `ℓ` (1 = finest) the interval
//! `I^{(n;ℓ)}` covers fine cells `(n−1)·2^{ℓ−1}+1 ..= n·2^{ℓ−1}`.

use crate::Error;

/// A dyadic interval `I^{(n;ℓ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelIndex {
    pub level: usize,
    pub n: usize,
}

impl LevelIndex {
    pub fn new(level: usize, n: usize) -> Self {
        debug_assert!(level >= 1 && n >= 1);
        LevelIndex { level, n }
    }

    /// Number of fine cells covered.
    pub fn width(&self) -> usize {
        1 << (self.level - 1)
    }

    /// Fine cells covered, as a half-open range of 1-based indices.
    pub fn cells(&self) -> std::ops::Range<usize> {
        let w = self.width();
        (self.n - 1) * w + 1..self.n * w + 1
    }

    /// Interval `[a, b]` for grid step `h`.
    pub fn interval(&self, h: f64) -> (f64, f64) {
        let w = self.width() as f64;
        ((self.n - 1) as f64 * w * h, self.n as f64 * w * h)
    }

    pub fn parent(&self) -> LevelIndex {
        LevelIndex::new(self.level + 1, self.n.div_ceil(2))
    }

    /// Children `(2n−1, 2n)` on the next finer level.
    pub fn children(&self) -> Option<(LevelIndex, LevelIndex)> {
        (self.level > 1).then(|| {
            (
                LevelIndex::new(self.level - 1, 2 * self.n - 1),
                LevelIndex::new(self.level - 1, 2 * self.n),
            )
        })
    }

    /// 1 for a left child, 2 for a right child.
    pub fn child_position(&self) -> usize {
        2 - self.n % 2
    }
}

/// `C(n;ℓ) = ⌈n / 2^{ℓ−1}⌉`.
pub fn ancestor_index(n: usize, level: usize) -> usize {
    assert!(n >= 1 && level >= 1);
    let w = 1usize << (level - 1);
    n.div_ceil(w)
}

/// `L(m) = ⌈log2 m⌉ − 1`, and 0 for `m ≤ 2`.
pub fn max_level(m: usize) -> usize {
    if m <= 2 {
        0
    } else {
        ceil_log2(m) - 1
    }
}

pub(crate) fn ceil_log2(m: usize) -> usize {
    assert!(m >= 1);
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

/// `B(m;ℓ)`: number of farfield blocks on level `ℓ` for row cell `m`.
///
/// Equals the child position of `I^{(C(m;ℓ);ℓ)}` within its parent.
pub fn block_count(m: usize, level: usize) -> Result<usize, Error> {
    if m < 3 || level < 1 || level > max_level(m) {
        return Err(Error::LevelOutOfRange { m, level });
    }
    Ok(((m - 1) >> (level - 1)) % 2 + 1)
}

/// The farfield `[0, t^{m−2}]` split into admissible dyadic intervals,
/// coarse to fine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarfieldPartition {
    pub m: usize,
    pub entries: Vec<LevelIndex>,
}

impl FarfieldPartition {
    /// Total number of fine cells covered.
    pub fn covered_cells(&self) -> usize {
        self.entries.iter().map(|e| e.width()).sum()
    }
}

pub fn farfield_partition(m: usize) -> FarfieldPartition {
    let mut entries = Vec::new();
    for level in (1..=max_level(m)).rev() {
        let c = ancestor_index(m, level);
        let b = ((m - 1) >> (level - 1)) % 2 + 1;
        // P(m,n;ℓ) = C(m;ℓ) − n − 1, listed left to right
        for n in (1..=b).rev() {
            entries.push(LevelIndex::new(level, c - n - 1));
        }
    }
    FarfieldPartition { m, entries }
}

/// Highest existing level whose block count (equivalently ancestor index)
/// changes between rows `m−1` and `m`.
pub fn coarsening_level(m: usize) -> usize {
    assert!(m >= 3);
    let x = (m - 1) ^ (m - 2);
    let lc = 1 + (usize::BITS - 1 - x.leading_zeros()) as usize;
    lc.min(max_level(m))
}

/// A block of the adaptive mesh: fine row cells × fine column cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshBlock {
    pub rows: std::ops::Range<usize>,
    pub cols: std::ops::Range<usize>,
    pub level: usize,
    pub near: bool,
}

/// All nearfield cells and admissible farfield blocks of the `N × N`
/// lower triangle (including the diagonal).
pub fn admissible_blocks(n: usize) -> Result<Vec<MeshBlock>, Error> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut out = Vec::new();
    for m in 1..=n {
        out.push(MeshBlock { rows: m..m + 1, cols: m..m + 1, level: 1, near: true });
        if m >= 2 {
            out.push(MeshBlock { rows: m..m + 1, cols: m - 1..m, level: 1, near: true });
        }
    }
    let top = max_level(n);
    for level in 1..=top {
        let w = 1usize << (level - 1);
        let count = n / w;
        for r in 1..=count {
            let row = LevelIndex::new(level, r);
            for c in 1..r {
                let col = LevelIndex::new(level, c);
                if admissible(row, col) {
                    out.push(MeshBlock {
                        rows: row.cells(),
                        cols: col.cells(),
                        level,
                        near: false,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Separated on their own level while the parents still touch.
fn admissible(row: LevelIndex, col: LevelIndex) -> bool {
    if row.n < col.n + 2 {
        return false;
    }
    let (pr, pc) = (row.parent(), col.parent());
    pr.n < pc.n + 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestor_examples() {
        assert_eq!(ancestor_index(14, 3), 4);
        assert_eq!(ancestor_index(7, 2), 4);
        for n in 1..50 {
            assert_eq!(ancestor_index(n, 1), n);
        }
    }

    #[test]
    fn max_level_examples() {
        assert_eq!(max_level(14), 3);
        assert_eq!(max_level(4), 1);
        assert_eq!(max_level(2), 0);
        assert_eq!(max_level(1), 0);
        assert_eq!(max_level(3), 1);
        assert_eq!(max_level(5), 2);
    }

    #[test]
    fn block_count_fig5() {
        assert_eq!(block_count(14, 3).unwrap(), 2);
        assert_eq!(block_count(14, 2).unwrap(), 1);
        assert_eq!(block_count(14, 1).unwrap(), 2);
        assert!(block_count(14, 4).is_err());
        assert!(block_count(2, 1).is_err());
    }

    #[test]
    fn partition_examples() {
        let p = farfield_partition(14);
        let got: Vec<_> = p.entries.iter().map(|e| (e.level, e.n)).collect();
        assert_eq!(got, vec![(3, 1), (3, 2), (2, 5), (1, 11), (1, 12)]);
        let got: Vec<_> = farfield_partition(3).entries.iter().map(|e| (e.level, e.n)).collect();
        assert_eq!(got, vec![(1, 1)]);
        let got: Vec<_> = farfield_partition(5).entries.iter().map(|e| (e.level, e.n)).collect();
        assert_eq!(got, vec![(2, 1), (1, 3)]);
        assert!(farfield_partition(1).entries.is_empty());
        assert!(farfield_partition(2).entries.is_empty());
    }

    fn b_table(m: usize) -> Vec<usize> {
        (1..=max_level(m)).map(|l| block_count(m, l).unwrap()).collect()
    }

    #[test]
    fn coarsening_examples() {
        assert_eq!(coarsening_level(14), 1);
        assert_eq!(b_table(14), vec![2, 1, 2]);
        assert_eq!(b_table(13), vec![1, 1, 2]);
        assert_eq!(coarsening_level(17), 4);
        assert_eq!(b_table(17), vec![1, 1, 1, 1]);
        assert_eq!(b_table(16), vec![2, 2, 2]);
        assert_eq!(coarsening_level(4), 1);
    }

    #[test]
    fn coarsening_bounds_changes() {
        for m in 3..5000 {
            let lc = coarsening_level(m);
            for level in 1..=max_level(m) {
                let changed = level > max_level(m - 1)
                    || block_count(m, level).unwrap() != block_count(m - 1, level).unwrap();
                assert_eq!(changed, level <= lc, "m={m} level={level} lc={lc}");
                let moved = ancestor_index(m, level) != ancestor_index(m - 1, level);
                assert_eq!(moved, level <= lc, "m={m} level={level}");
            }
        }
    }

    #[test]
    fn admissible_small() {
        let blocks = admissible_blocks(4).unwrap();
        let far: Vec<_> = blocks
            .iter()
            .filter(|b| !b.near)
            .map(|b| (b.rows.start, b.cols.start, b.level))
            .collect();
        assert_eq!(far, vec![(3, 1, 1), (4, 1, 1), (4, 2, 1)]);
        let blocks = admissible_blocks(2).unwrap();
        assert!(blocks.iter().all(|b| b.near));
        assert!(admissible_blocks(6).is_err());
    }

    #[test]
    fn admissible_tiles_lower_triangle() {
        for &n in &[4usize, 16, 64] {
            let blocks = admissible_blocks(n).unwrap();
            let mut hits = vec![0u32; n * n];
            for b in &blocks {
                for r in b.rows.clone() {
                    for c in b.cols.clone() {
                        hits[(r - 1) * n + c - 1] += 1;
                    }
                }
            }
            for r in 1..=n {
                for c in 1..=n {
                    assert_eq!(hits[(r - 1) * n + c - 1], u32::from(c <= r), "n={n} ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn admissible_matches_partition() {
        for &n in &[16usize, 64] {
            let blocks = admissible_blocks(n).unwrap();
            for m in 3..=n {
                let mut far: Vec<(usize, usize)> = blocks
                    .iter()
                    .filter(|b| !b.near && b.rows.contains(&m))
                    .map(|b| (b.cols.start, b.cols.end))
                    .collect();
                far.sort();
                let mut part: Vec<(usize, usize)> = farfield_partition(m)
                    .entries
                    .iter()
                    .map(|e| (e.cells().start, e.cells().end))
                    .collect();
                part.sort();
                assert_eq!(far, part, "n={n} m={m}");
            }
        }
    }
}
