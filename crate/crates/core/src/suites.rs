//! Exhaustive checks of the deterministic steps: duality, the rectangle
//! decompositions and the crossing-extension implication.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::decomposition::{
    any_holds, five_rectangle_universe, five_rectangles, four_rectangles, origin_reaches, tall_strip, RectCrossing,
};
use crate::geometry::{
    crossing_in, duality_violation, event_d, proper_crossings, tails, CrossingSpec, Direction, KestenLayout,
};
use crate::lattice::{GraphKind, Rect, Site};
use crate::oracle::{rects_up_to, verify_duality, verify_implication, Verdict};
use crate::sampler::sample_unchecked;

/// Largest rectangle, in sites, of the exhaustive duality sweep.
pub const DUALITY_SWEEP_SITES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub rect: Rect,
    pub kind: Option<GraphKind>,
    pub verdict: Verdict,
}

/// Exhaustive duality on every rectangle shape with at most `max_sites` sites.
pub fn duality_suite(max_sites: usize) -> Result<Vec<SuiteOutcome>> {
    rects_up_to(max_sites)
        .into_iter()
        .map(|rect| {
            Ok(SuiteOutcome { name: "duality".into(), rect, kind: None, verdict: verify_duality(&rect)? })
        })
        .collect()
}

/// Sampled duality on `[0, w] × [0, h]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledDuality {
    pub rect: Rect,
    pub p: f64,
    pub checked: u64,
    /// Replicates where a dual pair had both or neither event.
    pub violations: u64,
    pub first_violation: Option<u64>,
}

pub fn sampled_duality(w: i64, h: i64, p: f64, n_samples: u64, seed: u64) -> Result<SampledDuality> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("p = {p} outside [0, 1]"));
    }
    let rect = Rect::with_size(w, h)?;
    let bad: Vec<u64> = (0..n_samples)
        .into_par_iter()
        .filter(|&r| duality_violation(&sample_unchecked(rect, p, seed, r)).is_some())
        .collect();
    Ok(SampledDuality {
        rect,
        p,
        checked: n_samples,
        violations: bad.len() as u64,
        first_violation: bad.first().copied(),
    })
}

/// A horizontal crossing of `[0, n] × [0, 4n]` forces a short crossing of one
/// of the five rectangles.
pub fn five_rectangle_suite(kind: GraphKind, n: i64) -> Result<SuiteOutcome> {
    let universe = five_rectangle_universe(n)?;
    let strip = RectCrossing { rect: tall_strip(n)?, direction: Direction::Horizontal };
    let five = five_rectangles(n)?;
    let verdict = verify_implication(&universe, |c| strip.holds(c, kind), |c| any_holds(&five, c, kind))?;
    Ok(SuiteOutcome { name: "five-rectangles".into(), rect: universe, kind: Some(kind), verdict })
}

/// The origin reaching distance `2m` inside `□_{2m}` forces a short crossing
/// of one of the four halves.
pub fn four_rectangle_suite(kind: GraphKind, m: i64) -> Result<SuiteOutcome> {
    let universe = Rect::square(Site::ORIGIN, 2 * m)?;
    let four = four_rectangles(m)?;
    let verdict = verify_implication(
        &universe,
        |c| origin_reaches(c, kind, 2 * m).expect("origin inside the box"),
        |c| any_holds(&four, c, kind),
    )?;
    Ok(SuiteOutcome { name: "four-rectangles".into(), rect: universe, kind: Some(kind), verdict })
}

/// For every proper crossing `r` of the left half, a vertical occupied
/// crossing of `[line, line + l1] × [0, l2]` forces the tail of `r` or the
/// tail's mirror image to extend to the top while avoiding the other.
pub fn extension_suite(kind: GraphKind, l1: i64, l2: i64) -> Result<SuiteOutcome> {
    let layout = KestenLayout::new(l1, l2)?;
    let shifted = layout.shifted(l1)?;
    let vertical = CrossingSpec::occupied(Direction::Vertical, kind);
    let tail_pairs = proper_crossings(&layout.half, kind)
        .iter()
        .map(|r| tails(r, &layout))
        .collect::<Result<Vec<_>>>()?;
    let verdict = verify_implication(
        &layout.doubled,
        |c| crossing_in(c, vertical, &shifted),
        |c| {
            tail_pairs.iter().all(|(tail, mirror)| {
                let d = |a, b| event_d(c, a, b, &layout.strip, l2).expect("paths inside the doubled rectangle");
                d(tail, mirror) || d(mirror, tail)
            })
        },
    )?;
    Ok(SuiteOutcome { name: "extension".into(), rect: layout.doubled, kind: Some(kind), verdict })
}

/// All exhaustive suites at their smallest nontrivial sizes, on both graphs.
pub fn exact_suites(max_sites: usize) -> Result<Vec<SuiteOutcome>> {
    let mut out = duality_suite(max_sites)?;
    for kind in GraphKind::BOTH {
        out.push(five_rectangle_suite(kind, 1)?);
        out.push(four_rectangle_suite(kind, 1)?);
        out.push(extension_suite(kind, 2, 2)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_hold() {
        for kind in GraphKind::BOTH {
            for suite in [five_rectangle_suite(kind, 1), extension_suite(kind, 2, 1), extension_suite(kind, 2, 2)] {
                let s = suite.unwrap();
                assert!(s.verdict.holds(), "{s:?}");
            }
        }
        assert!(duality_suite(9).unwrap().iter().all(|s| s.verdict.holds()));
    }

    #[test]
    fn wrong_consequent_is_caught() {
        // a lone horizontal crossing of the strip does not force the first rectangle
        let universe = five_rectangle_universe(1).unwrap();
        let strip = RectCrossing { rect: tall_strip(1).unwrap(), direction: Direction::Horizontal };
        let first = five_rectangles(1).unwrap()[0];
        let v = verify_implication(&universe, |c| strip.holds(c, GraphKind::G), |c| first.holds(c, GraphKind::G)).unwrap();
        assert!(!v.holds());
    }

    #[test]
    fn sampled_duality_is_clean() {
        let s = sampled_duality(15, 9, 0.5, 500, 4).unwrap();
        assert_eq!((s.violations, s.first_violation), (0, None));
        assert!(sampled_duality(3, 3, 1.5, 10, 1).is_err());
    }
}
