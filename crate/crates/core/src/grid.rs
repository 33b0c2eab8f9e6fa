//! Flood fills on a rectangle in local row-major coordinates.
//!
//! Two engines: a bit-parallel one for rectangles of at most 64 sites (every
//! exhaustive check lives there) and a stack-based depth-first one for
//! everything else.

use crate::lattice::GraphKind;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    pub cols: usize,
    pub rows: usize,
}

impl Grid {
    pub fn new(cols: usize, rows: usize) -> Self {
        Grid { cols, rows }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    #[inline]
    pub fn for_each_neighbor(&self, kind: GraphKind, i: usize, mut f: impl FnMut(usize)) {
        let x = i % self.cols;
        let y = i / self.cols;
        let left = x > 0;
        let right = x + 1 < self.cols;
        let down = y > 0;
        let up = y + 1 < self.rows;
        if left {
            f(i - 1);
        }
        if right {
            f(i + 1);
        }
        if down {
            f(i - self.cols);
        }
        if up {
            f(i + self.cols);
        }
        if kind == GraphKind::GStar {
            if down && left {
                f(i - self.cols - 1);
            }
            if down && right {
                f(i - self.cols + 1);
            }
            if up && left {
                f(i + self.cols - 1);
            }
            if up && right {
                f(i + self.cols + 1);
            }
        }
    }

    /// Depth-first search from `seeds` through passable sites; stops as soon
    /// as a reached site satisfies `target`.
    pub fn reaches(
        &self,
        kind: GraphKind,
        passable: impl Fn(usize) -> bool,
        seeds: impl IntoIterator<Item = usize>,
        target: impl Fn(usize) -> bool,
    ) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = Vec::new();
        for s in seeds {
            if !seen[s] && passable(s) {
                if target(s) {
                    return true;
                }
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(i) = stack.pop() {
            let mut hit = false;
            self.for_each_neighbor(kind, i, |j| {
                if !hit && !seen[j] && passable(j) {
                    seen[j] = true;
                    if target(j) {
                        hit = true;
                    }
                    stack.push(j);
                }
            });
            if hit {
                return true;
            }
        }
        false
    }

    /// Everything reachable from `seeds` through passable sites.
    pub fn flood(
        &self,
        kind: GraphKind,
        passable: impl Fn(usize) -> bool,
        seeds: impl IntoIterator<Item = usize>,
    ) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = Vec::new();
        for s in seeds {
            if !seen[s] && passable(s) {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(i) = stack.pop() {
            self.for_each_neighbor(kind, i, |j| {
                if !seen[j] && passable(j) {
                    seen[j] = true;
                    stack.push(j);
                }
            });
        }
        seen
    }

    pub fn left_col(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).map(move |y| y * self.cols)
    }

    pub fn bottom_row(&self) -> impl Iterator<Item = usize> {
        0..self.cols
    }
}

/// Bit-parallel flood on at most 64 sites. Bit `i` is local site `i`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SmallGrid {
    cols: u32,
    full: u64,
    not_left: u64,
    not_right: u64,
    pub left: u64,
    pub right: u64,
    pub bottom: u64,
    pub top: u64,
}

impl SmallGrid {
    pub fn new(cols: usize, rows: usize) -> Self {
        let n = cols * rows;
        assert!(n <= 64 && n > 0, "small grid needs 1..=64 sites, got {n}");
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut left = 0u64;
        let mut right = 0u64;
        for y in 0..rows {
            left |= 1 << (y * cols);
            right |= 1 << (y * cols + cols - 1);
        }
        let bottom = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
        let top = bottom << ((rows - 1) * cols);
        SmallGrid {
            cols: cols as u32,
            full,
            not_left: full & !left,
            not_right: full & !right,
            left,
            right,
            bottom,
            top,
        }
    }

    #[inline]
    pub fn expand(&self, kind: GraphKind, m: u64) -> u64 {
        let h = m | ((m << 1) & self.not_left) | ((m >> 1) & self.not_right);
        let v = match kind {
            GraphKind::G => h | m.checked_shl(self.cols).unwrap_or(0) | m.checked_shr(self.cols).unwrap_or(0),
            GraphKind::GStar => h | h.checked_shl(self.cols).unwrap_or(0) | h.checked_shr(self.cols).unwrap_or(0),
        };
        v & self.full
    }

    #[cfg(test)]
    pub fn flood(&self, kind: GraphKind, passable: u64, seeds: u64) -> u64 {
        let mut reached = seeds & passable;
        loop {
            let next = self.expand(kind, reached) & passable;
            if next == reached {
                return reached;
            }
            reached = next;
        }
    }

    /// Whether `from` connects to `to` inside `passable`; exits early.
    #[inline]
    pub fn connects(&self, kind: GraphKind, passable: u64, from: u64, to: u64) -> bool {
        let mut reached = from & passable;
        loop {
            if reached & to != 0 {
                return true;
            }
            let next = self.expand(kind, reached) & passable;
            if next == reached {
                return false;
            }
            reached = next;
        }
    }
}
