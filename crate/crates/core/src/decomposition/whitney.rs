//! Whitney covers of grid-open sets by dyadic intervals.
//!
//! A dyadic interval is a run of cells `[a·2^s, (a+1)·2^s)`. An interval `I`
//! is admissible for `O` when its threefold dilate, clipped to the domain,
//! lies in `O`. The cover consists of the maximal admissible intervals plus,
//! at grid resolution, the single cells of `O` that no admissible interval
//! reaches (marked `floor`): in the continuum those cells would be tiled by
//! ever smaller Whitney intervals.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCells {
    pub start: usize,
    pub len: usize,
    /// Grid-floor cell: `3I ⊄ O` but no smaller interval exists.
    pub floor: bool,
}

impl DyadicCells {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    /// Threefold dilate clipped to `[0, n)`.
    pub fn tripled(&self, n: usize) -> (usize, usize) {
        (self.start.saturating_sub(self.len), (self.end() + self.len).min(n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub level: i32,
    pub intervals: Vec<DyadicCells>,
}

/// Prefix counts of a cell mask, for O(1) "all cells in range" queries.
struct MaskIndex {
    prefix: Vec<usize>,
}

impl MaskIndex {
    fn new(mask: &[bool]) -> Self {
        let mut prefix = Vec::with_capacity(mask.len() + 1);
        prefix.push(0);
        for &m in mask {
            prefix.push(prefix.last().unwrap() + m as usize);
        }
        Self { prefix }
    }

    fn all(&self, a: usize, b: usize) -> bool {
        self.prefix[b] - self.prefix[a] == b - a
    }
}

pub fn admissible(mask: &[bool], d: &DyadicCells) -> bool {
    let n = mask.len();
    let (a, b) = d.tripled(n);
    d.end() <= n && mask[a..b].iter().all(|&m| m)
}

/// Whitney cover of `O = {i : mask[i]}` on a domain of `mask.len()` cells.
pub fn whitney_cover(mask: &[bool], level: i32) -> WhitneyCover {
    let n = mask.len();
    let idx = MaskIndex::new(mask);
    let ok = |start: usize, len: usize| {
        let end = start + len;
        end <= n && idx.all(start.saturating_sub(len), (end + len).min(n))
    };
    let mut intervals = Vec::new();
    let mut c = 0;
    while c < n {
        if !mask[c] {
            c += 1;
            continue;
        }
        if !ok(c, 1) {
            intervals.push(DyadicCells { start: c, len: 1, floor: true });
            c += 1;
            continue;
        }
        let mut s = 0u32;
        loop {
            let len = 1usize << (s + 1);
            let start = (c >> (s + 1)) << (s + 1);
            if len > n || !ok(start, len) {
                break;
            }
            s += 1;
        }
        let len = 1usize << s;
        let start = (c >> s) << s;
        intervals.push(DyadicCells { start, len, floor: false });
        c = start + len;
    }
    WhitneyCover { level, intervals }
}
