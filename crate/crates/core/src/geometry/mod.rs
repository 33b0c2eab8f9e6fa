//! Deterministic combinatorics on a fixed configuration.

mod annulus;
mod crossing;
pub mod decomposition;
mod kesten;
mod path;
#[cfg(test)]
mod testing;

pub use annulus::{annulus_circuit, annulus_four_band};
pub use crossing::{highest_crossing, highest_crossing_in, lowest_crossing, lowest_crossing_in, region_above};
pub use kesten::{event_d, events_e, proper_crossings, tails, EventsE, KestenLayout};
pub use path::{x_extremes, y_statistic, SitePath};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{Grid, SmallGrid};
use crate::lattice::{GraphKind, Rect, Site};
use crate::sampler::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Left side to right side.
    Horizontal,
    /// Bottom side to top side.
    Vertical,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Occupied,
    Vacant,
}

impl Occupancy {
    pub fn as_bool(self) -> bool {
        self == Occupancy::Occupied
    }

    pub fn flip(self) -> Occupancy {
        match self {
            Occupancy::Occupied => Occupancy::Vacant,
            Occupancy::Vacant => Occupancy::Occupied,
        }
    }
}

impl std::str::FromStr for Occupancy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "occupied" | "open" => Ok(Occupancy::Occupied),
            "vacant" | "closed" => Ok(Occupancy::Vacant),
            other => Err(Error::Parse(format!("unknown occupancy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrossingSpec {
    pub direction: Direction,
    pub occupancy: Occupancy,
    pub kind: GraphKind,
}

impl CrossingSpec {
    pub const fn new(direction: Direction, occupancy: Occupancy, kind: GraphKind) -> Self {
        CrossingSpec { direction, occupancy, kind }
    }

    pub const fn occupied(direction: Direction, kind: GraphKind) -> Self {
        CrossingSpec::new(direction, Occupancy::Occupied, kind)
    }

    /// The event that blocks this one: other direction, other occupancy, matching graph.
    pub fn dual(self) -> CrossingSpec {
        CrossingSpec::new(self.direction.flip(), self.occupancy.flip(), self.kind.dual())
    }
}

impl fmt::Display for CrossingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} crossing on {}", self.direction, self.occupancy, self.kind)
    }
}

/// Whether `sub` (default: the whole rectangle) is crossed by a path of
/// `spec.occupancy` sites, consecutive sites adjacent in `spec.kind`, from
/// its left column to its right column (horizontal) or its bottom row to its
/// top row (vertical).
pub fn has_crossing(c: &Config, spec: CrossingSpec, sub: Option<&Rect>) -> Result<bool> {
    let sub = sub.unwrap_or(c.rect());
    if !c.rect().contains_rect(sub) {
        return domain(format!("sub-rectangle {sub} not inside {}", c.rect()));
    }
    Ok(crossing_in(c, spec, sub))
}

pub(crate) fn crossing_in(c: &Config, spec: CrossingSpec, sub: &Rect) -> bool {
    let want = spec.occupancy.as_bool();
    let (cols, rows) = (sub.cols(), sub.rows());
    if cols * rows <= 64 {
        let g = SmallGrid::new(cols, rows);
        let mask = c.sub_mask(sub, want);
        return match spec.direction {
            Direction::Horizontal => g.connects(spec.kind, mask, g.left, g.right),
            Direction::Vertical => g.connects(spec.kind, mask, g.bottom, g.top),
        };
    }
    let grid = Grid::new(cols, rows);
    let passable: Vec<bool> = if sub == c.rect() {
        (0..grid.len()).map(|i| c.bit(i) == want).collect()
    } else {
        (0..grid.len()).map(|i| c.bit(c.rect().index(sub.site(i))) == want).collect()
    };
    match spec.direction {
        Direction::Horizontal => grid.reaches(spec.kind, |i| passable[i], grid.left_col(), |i| i % cols == cols - 1),
        Direction::Vertical => grid.reaches(spec.kind, |i| passable[i], grid.bottom_row(), |i| i / cols == rows - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualityOutcome {
    HorizontalOccupiedOnG,
    VerticalVacantOnGStar,
}

/// Which of the two complementary events holds on the configuration's
/// rectangle: a horizontal occupied crossing in `G` or a vertical vacant
/// crossing in `GStar`. Exactly one always does; seeing both or neither means
/// the connectivity code is broken.
pub fn duality_witness(c: &Config) -> Result<DualityOutcome> {
    let spec = CrossingSpec::occupied(Direction::Horizontal, GraphKind::G);
    let occupied = crossing_in(c, spec, c.rect());
    let vacant = crossing_in(c, spec.dual(), c.rect());
    match (occupied, vacant) {
        (true, false) => Ok(DualityOutcome::HorizontalOccupiedOnG),
        (false, true) => Ok(DualityOutcome::VerticalVacantOnGStar),
        (both, _) => Err(Error::Inconsistent(format!(
            "{} dual crossings detected on\n{}",
            if both { "both" } else { "no" },
            c.to_text()
        ))),
    }
}

/// Every (event, blocking event) pair on a rectangle: both directions, both
/// graphs as the occupied side.
pub fn dual_pairs() -> [CrossingSpec; 4] {
    [
        CrossingSpec::occupied(Direction::Horizontal, GraphKind::G),
        CrossingSpec::occupied(Direction::Vertical, GraphKind::G),
        CrossingSpec::occupied(Direction::Horizontal, GraphKind::GStar),
        CrossingSpec::occupied(Direction::Vertical, GraphKind::GStar),
    ]
}

/// The first dual pair on which `c` violates "exactly one holds".
pub fn duality_violation(c: &Config) -> Option<CrossingSpec> {
    dual_pairs()
        .into_iter()
        .find(|&spec| crossing_in(c, spec, c.rect()) == crossing_in(c, spec.dual(), c.rect()))
}

/// Whether the occupied cluster of `center` (inside the configuration's
/// rectangle) reaches a site at L∞ distance at least `radius` from it.
/// `center` must itself be occupied.
pub fn reaches_distance(c: &Config, kind: GraphKind, center: Site, radius: i64) -> Result<bool> {
    let r = c.rect();
    if !r.contains(center) {
        return domain(format!("center {center} outside {r}"));
    }
    if !c.occupied(center) {
        return Ok(false);
    }
    let start = r.index(center);
    if r.site_count() <= 64 {
        let g = SmallGrid::new(r.cols(), r.rows());
        let far = (0..r.site_count()).filter(|&i| r.site(i).sup_dist(center) >= radius).fold(0u64, |m, i| m | 1 << i);
        return Ok(g.connects(kind, c.sub_mask(r, true), 1 << start, far));
    }
    let grid = Grid::new(r.cols(), r.rows());
    Ok(grid.reaches(kind, |i| c.bit(i), [start], |i| r.site(i).sup_dist(center) >= radius))
}

/// Whether `a` and `b` are joined by an occupied path inside the rectangle.
/// Both endpoints must be occupied, so a site is connected to itself with
/// probability p.
pub fn connected(c: &Config, kind: GraphKind, a: Site, b: Site) -> Result<bool> {
    let r = c.rect();
    if !r.contains(a) || !r.contains(b) {
        return domain(format!("endpoints {a}, {b} not both inside {r}"));
    }
    let grid = Grid::new(r.cols(), r.rows());
    let target = r.index(b);
    Ok(grid.reaches(kind, |i| c.bit(i), [r.index(a)], |i| i == target))
}
