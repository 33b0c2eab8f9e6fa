//! Lowest and highest horizontal occupied crossings.
//!
//! The lowest crossing is read off the interface between the vacant cluster
//! of the bottom side (in the matching graph) and the part of the rectangle
//! that the top side can still reach. Nothing above that interface is ever
//! inspected.

use std::collections::VecDeque;

use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::lattice::{GraphKind, Rect, Site};
use crate::sampler::Config;

use super::SitePath;

/// Lowest horizontal occupied `kind`-crossing of the whole rectangle, ordered
/// left to right. Among crossings with the smallest region below them, the
/// one with fewest sites wins, then the lexicographically smallest sequence.
pub fn lowest_crossing(c: &Config, kind: GraphKind) -> Option<SitePath> {
    extreme(c, kind, c.rect(), false)
}

pub fn lowest_crossing_in(c: &Config, kind: GraphKind, sub: &Rect) -> Result<Option<SitePath>> {
    check_sub(c, sub)?;
    Ok(extreme(c, kind, sub, false))
}

/// Mirror image of [`lowest_crossing`] under y ↦ y0 + y1 − y.
pub fn highest_crossing(c: &Config, kind: GraphKind) -> Option<SitePath> {
    extreme(c, kind, c.rect(), true)
}

pub fn highest_crossing_in(c: &Config, kind: GraphKind, sub: &Rect) -> Result<Option<SitePath>> {
    check_sub(c, sub)?;
    Ok(extreme(c, kind, sub, true))
}

fn check_sub(c: &Config, sub: &Rect) -> Result<()> {
    if c.rect().contains_rect(sub) {
        Ok(())
    } else {
        domain(format!("sub-rectangle {sub} not inside {}", c.rect()))
    }
}

fn extreme(c: &Config, kind: GraphKind, sub: &Rect, flip: bool) -> Option<SitePath> {
    let grid = Grid::new(sub.cols(), sub.rows());
    let to_site = |i: usize| {
        let (x, y) = ((i % grid.cols) as i64, (i / grid.cols) as i64);
        Site::new(sub.x0 + x, if flip { sub.y1 - y } else { sub.y0 + y })
    };
    let occ: Vec<bool> = (0..grid.len()).map(|i| c.bit(c.rect().index(to_site(i)))).collect();
    let local = lowest_local(&grid, kind, &occ)?;
    Some(SitePath::new_unchecked(local.into_iter().map(to_site).collect(), kind))
}

fn top_row(grid: &Grid) -> impl Iterator<Item = usize> {
    let start = (grid.rows - 1) * grid.cols;
    start..start + grid.cols
}

/// Lowest crossing in local row-major coordinates (row 0 at the bottom).
pub(crate) fn lowest_local(grid: &Grid, kind: GraphKind, occ: &[bool]) -> Option<Vec<usize>> {
    let dual = kind.dual();
    let n = grid.len();
    let cols = grid.cols;

    // vacant dual cluster of the bottom side, and the occupied sites touching it
    let below = grid.flood(dual, |i| !occ[i], grid.bottom_row());
    let mut rim = vec![false; n];
    for i in 0..n {
        if occ[i] {
            let mut hit = i < cols;
            grid.for_each_neighbor(dual, i, |j| hit |= below[j]);
            rim[i] = hit;
        }
    }
    // what the top side reaches without entering that cluster or its rim
    let above = grid.flood(dual, |i| !below[i] && !rim[i], top_row(grid));
    let top_start = (grid.rows - 1) * cols;
    let interface: Vec<bool> = (0..n)
        .map(|i| {
            if !rim[i] {
                return false;
            }
            let mut hit = i >= top_start;
            grid.for_each_neighbor(dual, i, |j| hit |= above[j]);
            hit
        })
        .collect();

    // shortest interface path to the right column, lexicographically smallest
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for y in 0..grid.rows {
        let i = y * cols + cols - 1;
        if interface[i] {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        grid.for_each_neighbor(kind, i, |j| {
            if interface[j] && dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        });
    }
    let key = |i: usize| (i % cols, i / cols);
    let mut cur = grid
        .left_col()
        .filter(|&i| dist[i] != usize::MAX)
        .min_by_key(|&i| (dist[i], key(i)))?;
    let mut path = vec![cur];
    while dist[cur] > 0 {
        let mut next = usize::MAX;
        grid.for_each_neighbor(kind, cur, |j| {
            if dist[j] == dist[cur] - 1 && (next == usize::MAX || key(j) < key(next)) {
                next = j;
            }
        });
        cur = next;
        path.push(cur);
    }
    Some(path)
}

/// Sites of `sub` reachable from its top side in the matching graph of
/// `kind` without touching `r`: the part of the rectangle strictly above a
/// horizontal crossing `r`. Indexed like `sub`.
pub fn region_above(sub: &Rect, kind: GraphKind, r: &SitePath) -> Vec<bool> {
    let grid = Grid::new(sub.cols(), sub.rows());
    let mut on_path = vec![false; grid.len()];
    for &s in r.sites() {
        if sub.contains(s) {
            on_path[sub.index(s)] = true;
        }
    }
    grid.flood(kind.dual(), |i| !on_path[i], top_row(&grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::testing::brute_lowest;
    use crate::geometry::{crossing_in, CrossingSpec, Direction};
    use crate::sampler::{enumerate, sample};

    fn rect(x0: i64, x1: i64, y0: i64, y1: i64) -> Rect {
        Rect::new(x0, x1, y0, y1).unwrap()
    }

    fn check_against_brute_force(c: &Config) {
        for kind in GraphKind::BOTH {
            let fast = lowest_crossing(c, kind).map(|p| p.sites().to_vec());
            assert_eq!(fast, brute_lowest(c, kind), "{kind}\n{}", c.to_text());
        }
    }

    #[test]
    fn all_occupied_gives_bottom_and_top_rows() {
        let r = rect(0, 4, 0, 3);
        let c = Config::filled(r, true);
        for kind in GraphKind::BOTH {
            let low = lowest_crossing(&c, kind).unwrap();
            assert_eq!(low.sites(), (0..=4).map(|x| Site::new(x, 0)).collect::<Vec<_>>().as_slice());
            let high = highest_crossing(&c, kind).unwrap();
            assert_eq!(high.sites(), (0..=4).map(|x| Site::new(x, 3)).collect::<Vec<_>>().as_slice());
        }
        assert!(lowest_crossing(&Config::filled(r, false), GraphKind::GStar).is_none());
    }

    #[test]
    fn unique_crossing_is_returned() {
        let r = rect(0, 3, 0, 3);
        let sites = [(0, 2), (1, 2), (1, 1), (2, 1), (3, 1)].map(|(x, y)| Site::new(x, y));
        let c = Config::from_sites(r, sites);
        let low = lowest_crossing(&c, GraphKind::G).unwrap();
        assert_eq!(low.sites(), &sites);
        assert_eq!(highest_crossing(&c, GraphKind::G).unwrap().sites(), &sites);
    }

    #[test]
    fn exhaustive_against_path_enumeration() {
        for r in [rect(0, 2, 0, 2), rect(0, 3, 0, 2), rect(0, 2, 0, 3)] {
            for c in enumerate(r).unwrap() {
                check_against_brute_force(&c);
            }
        }
    }

    #[test]
    fn random_against_path_enumeration() {
        for rep in 0..1500 {
            let p = [0.45, 0.55, 0.65][rep as usize % 3];
            check_against_brute_force(&sample(rect(0, 3, 0, 3), p, 77, rep).unwrap());
        }
        for rep in 0..300 {
            check_against_brute_force(&sample(rect(-2, 2, 1, 4), 0.5, 78, rep).unwrap());
        }
    }

    #[test]
    fn existence_matches_crossing_detector() {
        for rep in 0..300 {
            let c = sample(rect(0, 20, 0, 14), 0.6, 5, rep).unwrap();
            for kind in GraphKind::BOTH {
                let spec = CrossingSpec::occupied(Direction::Horizontal, kind);
                assert_eq!(lowest_crossing(&c, kind).is_some(), crossing_in(&c, spec, c.rect()));
            }
        }
    }

    #[test]
    fn sub_rectangle_variant() {
        let c = Config::filled(rect(0, 5, 0, 5), true);
        let sub = rect(1, 3, 2, 4);
        let low = lowest_crossing_in(&c, GraphKind::G, &sub).unwrap().unwrap();
        assert_eq!(low.first(), Some(Site::new(1, 2)));
        assert_eq!(low.last(), Some(Site::new(3, 2)));
        assert!(lowest_crossing_in(&c, GraphKind::G, &rect(4, 6, 0, 1)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn highest_is_mirrored_lowest(seed in any::<u64>(), w in 1i64..9, h in 1i64..9, p in 0.4f64..0.8) {
                let c = sample(rect(0, w, 0, h), p, seed, 0).unwrap();
                for kind in GraphKind::BOTH {
                    let mirrored = lowest_crossing(&c.reflect_y(), kind).map(|r| r.reflect_y(h));
                    prop_assert_eq!(highest_crossing(&c, kind), mirrored);
                }
            }

            #[test]
            fn lowest_ignores_everything_above_it(seed in any::<u64>(), flips in any::<u64>(), p in 0.45f64..0.8) {
                let r = rect(0, 7, 0, 7);
                let c = sample(r, p, seed, 0).unwrap();
                for kind in GraphKind::BOTH {
                    let Some(low) = lowest_crossing(&c, kind) else { continue };
                    let above = region_above(&r, kind, &low);
                    let mut d = c.clone();
                    for (k, i) in (0..r.site_count()).filter(|&i| above[i]).enumerate() {
                        if flips >> (k % 64) & 1 == 1 {
                            d = d.with_site(r.site(i), !c.bit(i));
                        }
                    }
                    prop_assert_eq!(lowest_crossing(&d, kind), Some(low));
                }
            }

            #[test]
            fn lowest_is_below_highest(seed in any::<u64>(), p in 0.45f64..0.8) {
                let r = rect(0, 6, 0, 6);
                let c = sample(r, p, seed, 0).unwrap();
                for kind in GraphKind::BOTH {
                    let (Some(low), Some(high)) = (lowest_crossing(&c, kind), highest_crossing(&c, kind)) else { continue };
                    for x in r.x0..=r.x1 {
                        let (Ok(a), Ok(b)) = (crate::geometry::y_statistic(&low, x), crate::geometry::y_statistic(&high, x)) else { continue };
                        prop_assert!(a <= b);
                    }
                }
            }
        }
    }
}
