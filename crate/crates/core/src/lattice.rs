//! The matching pair (Z², Z²*), rectangles and square boxes.
//!
//! Both graphs live on the vertex set Z². `G` is the square lattice with
//! 4-adjacency; `GStar` close-packs every unit face, which on sites is the
//! same as 8-adjacency. Crossing diagonals of `GStar` are never queried as
//! geometric objects, only through connectivity, so no explicit edge list is kept.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const EIGHT: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GraphKind {
    /// Z² with nearest-neighbour adjacency.
    G,
    /// Z²* with king-move adjacency.
    GStar,
}

impl GraphKind {
    pub const BOTH: [GraphKind; 2] = [GraphKind::G, GraphKind::GStar];

    /// The matching partner: occupied crossings in one graph are blocked
    /// exactly by vacant crossings in the other.
    pub fn dual(self) -> GraphKind {
        match self {
            GraphKind::G => GraphKind::GStar,
            GraphKind::GStar => GraphKind::G,
        }
    }

    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            GraphKind::G => &FOUR,
            GraphKind::GStar => &EIGHT,
        }
    }

    pub fn adjacent(self, a: Site, b: Site) -> bool {
        let dx = (a.x - b.x).abs();
        let dy = (a.y - b.y).abs();
        match self {
            GraphKind::G => dx + dy == 1,
            GraphKind::GStar => dx.max(dy) == 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::G => "G",
            GraphKind::GStar => "GStar",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "G" | "g" | "Z2" | "z2" => Ok(GraphKind::G),
            "GStar" | "gstar" | "G*" | "g*" | "Z2*" | "z2*" => Ok(GraphKind::GStar),
            other => Err(Error::Parse(format!("unknown graph {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    /// L∞ distance.
    pub fn sup_dist(self, other: Site) -> i64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn offset(self, dx: i64, dy: i64) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Inclusive integer rectangle `{x0..=x1} × {y0..=y1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return domain(format!("empty rectangle x {x0}..{x1}, y {y0}..{y1}"));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    /// `[0, w] × [0, h]`.
    pub fn with_size(w: i64, h: i64) -> Result<Self> {
        Rect::new(0, w, 0, h)
    }

    /// The box `□_n(center) = center + [-n, n]²`.
    pub fn square(center: Site, n: i64) -> Result<Self> {
        if n < 0 {
            return domain(format!("negative box half-width {n}"));
        }
        Rect::new(center.x - n, center.x + n, center.y - n, center.y + n)
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    /// Number of sites per row.
    pub fn cols(&self) -> usize {
        (self.width() + 1) as usize
    }

    pub fn rows(&self) -> usize {
        (self.height() + 1) as usize
    }

    pub fn site_count(&self) -> usize {
        self.cols() * self.rows()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.x0 <= s.x && s.x <= self.x1 && self.y0 <= s.y && s.y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    /// Row-major index, bottom row first. Caller guarantees `contains(s)`.
    #[inline]
    pub fn index(&self, s: Site) -> usize {
        debug_assert!(self.contains(s));
        (s.y - self.y0) as usize * self.cols() + (s.x - self.x0) as usize
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        let cols = self.cols();
        Site::new(self.x0 + (index % cols) as i64, self.y0 + (index / cols) as i64)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Site::new(x, y)))
    }

    pub fn transpose(&self) -> Rect {
        Rect { x0: self.y0, x1: self.y1, y0: self.x0, y1: self.x1 }
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Rect {
        Rect { x0: self.x0 + dx, x1: self.x1 + dx, y0: self.y0 + dy, y1: self.y1 + dy }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Square annulus `□_outer(center) \ int □_inner(center)`: the sites at L∞
/// distance `inner..=outer` from the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Site,
    pub inner: i64,
    pub outer: i64,
}

impl Annulus {
    pub fn new(center: Site, inner: i64, outer: i64) -> Result<Self> {
        if inner < 1 || outer <= inner {
            return domain(format!("annulus needs 1 <= inner < outer, got {inner}, {outer}"));
        }
        Ok(Annulus { center, inner, outer })
    }

    pub fn contains(&self, s: Site) -> bool {
        let d = s.sup_dist(self.center);
        self.inner <= d && d <= self.outer
    }

    /// `□_outer(center)`.
    pub fn bounding_rect(&self) -> Rect {
        Rect {
            x0: self.center.x - self.outer,
            x1: self.center.x + self.outer,
            y0: self.center.y - self.outer,
            y1: self.center.y + self.outer,
        }
    }

    pub fn sites(&self) -> Vec<Site> {
        self.bounding_rect().sites().filter(|&s| self.contains(s)).collect()
    }
}

/// Sites adjacent to `s` in `kind`, optionally restricted to `clip`.
pub fn neighbors(kind: GraphKind, s: Site, clip: Option<&Rect>) -> Vec<Site> {
    kind.offsets()
        .iter()
        .map(|&(dx, dy)| s.offset(dx, dy))
        .filter(|t| clip.is_none_or(|r| r.contains(*t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    /// ∂₋□_n: sites of the box with a neighbour outside.
    Inner,
    /// ∂₊□_n: sites outside the box with a neighbour inside.
    Outer,
}

/// Inner or outer boundary of `□_n = [-n, n]²` under `kind` adjacency.
pub fn boundary(n: i64, side: BoundarySide, kind: GraphKind) -> Result<BTreeSet<Site>> {
    if n < 1 {
        return domain(format!("box half-width must be >= 1, got {n}"));
    }
    let inside = Rect::square(Site::ORIGIN, n)?;
    let scan = Rect::square(Site::ORIGIN, n + 1)?;
    let set = scan
        .sites()
        .filter(|&s| match side {
            BoundarySide::Inner => {
                inside.contains(s) && neighbors(kind, s, None).iter().any(|t| !inside.contains(*t))
            }
            BoundarySide::Outer => {
                !inside.contains(s) && neighbors(kind, s, None).iter().any(|t| inside.contains(*t))
            }
        })
        .collect();
    Ok(set)
}

/// `|∂₊□_n|`: `8n + 4` for `G` (the ring at distance `n + 1` without its
/// corners) and `8n + 8` for `GStar` (the full ring).
pub fn outer_boundary_size(n: i64, kind: GraphKind) -> usize {
    match kind {
        GraphKind::G => (8 * n + 4) as usize,
        GraphKind::GStar => (8 * n + 8) as usize,
    }
}
