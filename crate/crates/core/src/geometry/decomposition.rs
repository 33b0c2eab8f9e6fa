//! Covering a long crossing by short crossings of smaller rectangles.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::lattice::{GraphKind, Rect, Site};
use crate::sampler::Config;

use super::{crossing_in, reaches_distance, CrossingSpec, Direction};

/// An occupied crossing of `rect` in `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RectCrossing {
    pub rect: Rect,
    pub direction: Direction,
}

impl RectCrossing {
    /// Crossing in the short direction; horizontal for squares.
    pub fn short(rect: Rect) -> Self {
        let direction = if rect.width() <= rect.height() { Direction::Horizontal } else { Direction::Vertical };
        RectCrossing { rect, direction }
    }

    pub fn long(rect: Rect) -> Self {
        let short = RectCrossing::short(rect);
        RectCrossing { rect, direction: short.direction.flip() }
    }

    /// The configuration must cover `rect`.
    pub fn holds(&self, c: &Config, kind: GraphKind) -> bool {
        crossing_in(c, CrossingSpec::occupied(self.direction, kind), &self.rect)
    }
}

fn positive(n: i64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        domain(format!("scale must be >= 1, got {n}"))
    }
}

/// `[0, n] × [0, 4n]`, crossed horizontally.
pub fn tall_strip(n: i64) -> Result<Rect> {
    positive(n)?;
    Rect::new(0, n, 0, 4 * n)
}

/// Three `n × 2n` rectangles stacked along the strip and two `2n × n`
/// rectangles over its middle. A horizontal crossing of [`tall_strip`]
/// forces a short crossing of one of them.
pub fn five_rectangles(n: i64) -> Result<[RectCrossing; 5]> {
    positive(n)?;
    Ok([
        RectCrossing::short(Rect::new(0, n, 0, 2 * n)?),
        RectCrossing::short(Rect::new(0, n, n, 3 * n)?),
        RectCrossing::short(Rect::new(0, n, 2 * n, 4 * n)?),
        RectCrossing::short(Rect::new(0, 2 * n, n, 2 * n)?),
        RectCrossing::short(Rect::new(0, 2 * n, 2 * n, 3 * n)?),
    ])
}

/// Smallest rectangle holding the tall strip and all five rectangles.
pub fn five_rectangle_universe(n: i64) -> Result<Rect> {
    positive(n)?;
    Rect::new(0, 2 * n, 0, 4 * n)
}

/// The four halves of `□_{2m}` around the origin, each `m × 2m`. The origin
/// reaching distance `2m` forces a short crossing of one of them.
pub fn four_rectangles(m: i64) -> Result<[RectCrossing; 4]> {
    positive(m)?;
    Ok([
        RectCrossing::short(Rect::new(0, m, -m, m)?),
        RectCrossing::short(Rect::new(-m, 0, -m, m)?),
        RectCrossing::short(Rect::new(-m, m, 0, m)?),
        RectCrossing::short(Rect::new(-m, m, -m, 0)?),
    ])
}

pub fn any_holds(events: &[RectCrossing], c: &Config, kind: GraphKind) -> bool {
    events.iter().any(|e| e.holds(c, kind))
}

/// The origin is occupied and joined inside the configuration's rectangle to
/// a site at L∞ distance `radius`.
pub fn origin_reaches(c: &Config, kind: GraphKind, radius: i64) -> Result<bool> {
    reaches_distance(c, kind, Site::ORIGIN, radius)
}
