//! Extension events for a crossing of `[0, l1] × [0, l2]` inside the doubled
//! rectangle `[0, 2·l1] × [0, l2]`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::lattice::{GraphKind, Rect, Site};
use crate::sampler::Config;

use super::{highest_crossing_in, lowest_crossing_in, y_statistic, SitePath};

/// Lines and rectangles derived from `(l1, l2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KestenLayout {
    pub l1: i64,
    pub l2: i64,
    /// `x = floor(l1 / 8)`.
    pub line: i64,
    /// Mirror of `line` across `x = l1`.
    pub mirror_line: i64,
    pub half: Rect,
    pub doubled: Rect,
    /// Between `line` and `mirror_line`, full height.
    pub strip: Rect,
}

impl KestenLayout {
    pub fn new(l1: i64, l2: i64) -> Result<Self> {
        if l1 < 1 || l2 < 0 {
            return domain(format!("need l1 >= 1 and l2 >= 0, got l1 = {l1}, l2 = {l2}"));
        }
        let line = l1 / 8;
        let mirror_line = 2 * l1 - line;
        Ok(KestenLayout {
            l1,
            l2,
            line,
            mirror_line,
            half: Rect::new(0, l1, 0, l2)?,
            doubled: Rect::new(0, 2 * l1, 0, l2)?,
            strip: Rect::new(line, mirror_line, 0, l2)?,
        })
    }

    /// `[line, line + width] × [0, l2]`: the rectangle whose vertical
    /// crossing forces one of the two extension events.
    pub fn shifted(&self, width: i64) -> Result<Rect> {
        Rect::new(self.line, self.line + width, 0, self.l2)
    }
}

/// The tail of `r` from its last visit to the layout's line, and the mirror
/// image of that tail across `x = l1`.
pub fn tails(r: &SitePath, layout: &KestenLayout) -> Result<(SitePath, SitePath)> {
    let tail = r.suffix_from_last_visit(layout.line)?;
    let mirror = tail.reflect_x(2 * layout.l1);
    Ok((tail, mirror))
}

/// Whether some occupied path `v1 … vz` inside `strip`, avoiding every site of
/// `r_minus` and `r_tilde_minus`, starts next to a site `v0` of `r_minus` (in
/// the adjacency of `r_minus`) and ends on the row `y = top_y`. `v0` itself
/// need not be occupied; a site of `r_minus` on that row counts as the empty
/// extension.
pub fn event_d(c: &Config, r_minus: &SitePath, r_tilde_minus: &SitePath, strip: &Rect, top_y: i64) -> Result<bool> {
    let rect = c.rect();
    if !rect.contains_rect(strip) {
        return domain(format!("strip {strip} not inside {rect}"));
    }
    if let Some(s) = r_minus.sites().iter().chain(r_tilde_minus.sites()).find(|&&s| !rect.contains(s)) {
        return domain(format!("path site {s} outside {rect}"));
    }
    if r_minus.sites().iter().any(|s| s.y == top_y) {
        return Ok(true);
    }
    let kind = r_minus.kind();
    let grid = Grid::new(rect.cols(), rect.rows());
    let mut forbidden = vec![false; grid.len()];
    for &s in r_minus.sites().iter().chain(r_tilde_minus.sites()) {
        forbidden[rect.index(s)] = true;
    }
    let seeds: Vec<usize> = r_minus
        .sites()
        .iter()
        .flat_map(|v0| kind.offsets().iter().map(move |&(dx, dy)| v0.offset(dx, dy)))
        .filter(|&s| rect.contains(s))
        .map(|s| rect.index(s))
        .collect();
    let passable = |i: usize| c.bit(i) && !forbidden[i] && strip.contains(rect.site(i));
    Ok(grid.reaches(kind, passable, seeds, |i| rect.site(i).y == top_y))
}

/// Everything about one configuration of the doubled rectangle that the
/// extension events need, independent of the cut height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventsE {
    /// Last height of the lowest crossing of the left half on the layout's line.
    pub lowest_y: Option<i64>,
    /// The lowest crossing's tail extends to the top.
    pub lowest_extends: bool,
    pub highest_y: Option<i64>,
    /// The highest crossing's tail extends to the bottom.
    pub highest_extends: bool,
}

impl EventsE {
    pub fn observe(c: &Config, kind: GraphKind, layout: &KestenLayout) -> Result<Self> {
        if c.rect() != &layout.doubled {
            return domain(format!("configuration on {} but the layout needs {}", c.rect(), layout.doubled));
        }
        let mut out = EventsE { lowest_y: None, lowest_extends: false, highest_y: None, highest_extends: false };
        if let Some(low) = lowest_crossing_in(c, kind, &layout.half)? {
            let (tail, mirror) = tails(&low, layout)?;
            out.lowest_y = Some(y_statistic(&low, layout.line)?);
            out.lowest_extends = event_d(c, &tail, &mirror, &layout.strip, layout.l2)?;
        }
        if let Some(high) = highest_crossing_in(c, kind, &layout.half)? {
            let (tail, mirror) = tails(&high, layout)?;
            out.highest_y = Some(y_statistic(&high, layout.line)?);
            out.highest_extends = event_d(c, &tail, &mirror, &layout.strip, 0)?;
        }
        Ok(out)
    }

    /// `(E⁻, E⁺)` at cut height `m`.
    pub fn at_cut(&self, m: i64) -> (bool, bool) {
        let minus = self.lowest_extends && self.lowest_y.is_some_and(|y| y <= m);
        let plus = self.highest_extends && self.highest_y.is_some_and(|y| y >= m);
        (minus, plus)
    }
}

/// `(E⁻, E⁺)` for a configuration of `[0, 2·l1] × [0, l2]`: the lowest
/// crossing of the left half has last height at most `m` on `x = floor(l1/8)`
/// and its tail extends to the top; the highest crossing has last height at
/// least `m` and its tail extends to the bottom.
pub fn events_e(c: &Config, kind: GraphKind, l1: i64, l2: i64, m: i64) -> Result<(bool, bool)> {
    let layout = KestenLayout::new(l1, l2)?;
    Ok(EventsE::observe(c, kind, &layout)?.at_cut(m))
}

/// Every self-avoiding `kind`-path of `rect` whose only site in the left
/// column is its first and whose only site in the right column is its last.
pub fn proper_crossings(rect: &Rect, kind: GraphKind) -> Vec<SitePath> {
    fn extend(rect: &Rect, kind: GraphKind, path: &mut Vec<Site>, seen: &mut [bool], out: &mut Vec<SitePath>) {
        let last = *path.last().unwrap();
        if last.x == rect.x1 {
            out.push(SitePath::new_unchecked(path.clone(), kind));
            return;
        }
        for &(dx, dy) in kind.offsets() {
            let next = last.offset(dx, dy);
            if !rect.contains(next) || next.x == rect.x0 || seen[rect.index(next)] {
                continue;
            }
            seen[rect.index(next)] = true;
            path.push(next);
            extend(rect, kind, path, seen, out);
            path.pop();
            seen[rect.index(next)] = false;
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; rect.site_count()];
    for y in rect.y0..=rect.y1 {
        let s = Site::new(rect.x0, y);
        seen[rect.index(s)] = true;
        extend(rect, kind, &mut vec![s], &mut seen, &mut out);
        seen[rect.index(s)] = false;
    }
    out
}
