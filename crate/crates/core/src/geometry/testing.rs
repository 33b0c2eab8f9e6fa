//! Slow reference implementations by explicit path enumeration.

use crate::lattice::{GraphKind, Rect, Site};
use crate::sampler::Config;

use super::{region_above, SitePath};

type Key = (usize, usize, Vec<Site>);

/// Walks every self-avoiding occupied path from the left column, keeping
/// the best one that ends in the right column.
pub fn brute_lowest(c: &Config, kind: GraphKind) -> Option<Vec<Site>> {
    fn extend(c: &Config, kind: GraphKind, path: &mut Vec<Site>, best: &mut Option<Key>) {
        let last = *path.last().unwrap();
        if last.x == c.rect().x1 {
            let sp = SitePath::new(path.clone(), kind).unwrap();
            let below = region_above(c.rect(), kind, &sp).iter().filter(|&&a| !a).count();
            let key = (below, path.len(), path.clone());
            if best.as_ref().is_none_or(|b| key < *b) {
                *best = Some(key);
            }
        }
        for &(dx, dy) in kind.offsets() {
            let next = last.offset(dx, dy);
            if c.get(next) == Some(true) && !path.contains(&next) {
                path.push(next);
                extend(c, kind, path, best);
                path.pop();
            }
        }
    }
    let r = *c.rect();
    let mut best = None;
    for y in r.y0..=r.y1 {
        let s = Site::new(r.x0, y);
        if c.occupied(s) {
            extend(c, kind, &mut vec![s], &mut best);
        }
    }
    best.map(|(_, _, path)| path)
}


/// Whether the diagonal steps `a → b` and `u → v` cross at their midpoints.
fn diagonals_cross(a: Site, b: Site, u: Site, v: Site) -> bool {
    let diag = |p: Site, q: Site| (p.x - q.x).abs() == 1 && (p.y - q.y).abs() == 1;
    diag(a, b) && diag(u, v) && a.x + b.x == u.x + v.x && a.y + b.y == u.y + v.y && a != u && a != v
}

/// Depth-first enumeration of simple paths, allowing `v0` anywhere as long
/// as the first step meets `r_minus` at a site or at a diagonal crossing.
pub fn brute_d(c: &Config, r_minus: &SitePath, r_tilde: &SitePath, strip: &Rect, top_y: i64) -> bool {
    let kind = r_minus.kind();
    let ok = |s: Site| {
        c.get(s) == Some(true) && strip.contains(s) && !r_minus.contains(s) && !r_tilde.contains(s)
    };
    fn walk(kind: GraphKind, path: &mut Vec<Site>, top_y: i64, ok: &dyn Fn(Site) -> bool) -> bool {
        let last = *path.last().unwrap();
        if last.y == top_y {
            return true;
        }
        for &(dx, dy) in kind.offsets() {
            let next = last.offset(dx, dy);
            if ok(next) && !path.contains(&next) {
                path.push(next);
                if walk(kind, path, top_y, ok) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    if r_minus.sites().iter().any(|s| s.y == top_y) {
        return true;
    }
    let steps: Vec<(Site, Site)> = r_minus.sites().windows(2).map(|w| (w[0], w[1])).collect();
    for v0 in c.rect().sites() {
        for &(dx, dy) in kind.offsets() {
            let v1 = v0.offset(dx, dy);
            if !ok(v1) {
                continue;
            }
            let meets = r_minus.contains(v0)
                || (kind == GraphKind::GStar && steps.iter().any(|&(a, b)| diagonals_cross(a, b, v0, v1)));
            if meets && walk(kind, &mut vec![v1], top_y, &ok) {
                return true;
            }
        }
    }
    false
}

