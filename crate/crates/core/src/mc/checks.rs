//! Inequality checks built from several estimates on shared samples.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::decomposition::{origin_reaches, tall_strip, RectCrossing};
use crate::geometry::{annulus_circuit, crossing_in, CrossingSpec, Direction, Occupancy};
use crate::lattice::{Annulus, GraphKind, Rect, Site};
use crate::oracle::exact_prob;
use crate::report::{Margin, Quantity, Report};
use crate::sampler::{sample_unchecked, Config, ENUMERATION_CAP};

use super::{check_density, check_samples, tally, Estimate};

/// Rectangles and events behind the decomposition inequalities at scale `n`.
struct Decomposition {
    /// `[0, n] × [0, 4n]`, crossed horizontally.
    tall: RectCrossing,
    /// `[0, n] × [0, 2n]`, crossed horizontally.
    short: RectCrossing,
    /// `[0, 2n] × [0, 4n]`, crossed horizontally.
    wide: RectCrossing,
    /// `[n + 1, 2n] × [0, 4n]`: the part of `wide` disjoint from `tall`.
    right: RectCrossing,
    /// `□_{2n}`, for the origin reaching distance `2n`.
    ball: Rect,
    n: i64,
}

impl Decomposition {
    fn new(n: i64) -> Result<Self> {
        let horizontal = |rect| RectCrossing { rect, direction: Direction::Horizontal };
        Ok(Decomposition {
            tall: horizontal(tall_strip(n)?),
            short: horizontal(Rect::new(0, n, 0, 2 * n)?),
            wide: horizontal(Rect::new(0, 2 * n, 0, 4 * n)?),
            right: horizontal(Rect::new(n + 1, 2 * n, 0, 4 * n)?),
            ball: Rect::square(Site::ORIGIN, 2 * n)?,
            n,
        })
    }

    fn rect_events(&self) -> [(&'static str, RectCrossing); 4] {
        [("tall", self.tall), ("short", self.short), ("wide", self.wide), ("right", self.right)]
    }

    fn universe(&self) -> Rect {
        Rect::new(-2 * self.n, 2 * self.n, -2 * self.n, 4 * self.n).expect("nonempty")
    }
}

/// Both sides of the four decomposition inequalities at scale `n`:
///
/// - `P[tall] <= 5 P[short]` (five rectangles),
/// - `P[wide] <= P[tall] P[right]` (two disjoint halves, independent),
/// - `25 P[wide] <= (25 P[short])²` (one doubling step),
/// - `P[origin reaches 2n] <= 4 P[short]` (four rectangles).
///
/// Exact by enumeration when every event fits the enumeration cap (n = 1),
/// estimated on shared samples otherwise.
pub fn decomposition_checks(kind: GraphKind, p: f64, n: i64, n_samples: u64, seed: u64) -> Result<Report> {
    check_density(p)?;
    let d = Decomposition::new(n)?;
    let exact = d.ball.site_count() <= ENUMERATION_CAP && d.wide.rect.site_count() <= ENUMERATION_CAP;
    let mut report = Report::new("decomposition")
        .param("graph", kind.name())
        .param("p", p)
        .param("n", n)
        .param("exact", exact);

    let mut values = Vec::new();
    if exact {
        for (name, e) in d.rect_events() {
            let poly = exact_prob(&e.rect, |c| crossing_in(c, CrossingSpec::occupied(e.direction, kind), c.rect()))?;
            values.push((name, poly.eval(p), 0.0));
        }
        let reach = exact_prob(&d.ball, |c| origin_reaches(c, kind, 2 * n).expect("origin inside the box"))?;
        values.push(("radial", reach.eval(p), 0.0));
    } else {
        check_samples(n_samples)?;
        report = report.param("n_samples", n_samples).param("seed", seed);
        let universe = d.universe();
        let events = d.rect_events();
        let counts = tally(n_samples, |r| {
            let c = sample_unchecked(universe, p, seed, r);
            let mut flags = 0u64;
            for (bit, (_, e)) in events.iter().enumerate() {
                flags |= (e.holds(&c, kind) as u64) << bit;
            }
            let ball = Config::from_fn(d.ball, |s| c.occupied(s));
            flags | (origin_reaches(&ball, kind, 2 * n).expect("origin inside the box") as u64) << 4
        });
        for (bit, name) in ["tall", "short", "wide", "right", "radial"].into_iter().enumerate() {
            let e = Estimate::from_counts(counts[bit], n_samples, seed);
            values.push((name, e.p_hat, e.sigma()));
            report.quantities.push(Quantity::from_estimate(name, &e));
        }
    }
    if exact {
        for &(name, v, _) in &values {
            report.quantities.push(Quantity::exact(name, v));
        }
    }
    let get = |name: &str| values.iter().find(|v| v.0 == name).map(|v| (v.1, v.2)).expect("known quantity");
    let (tall, s_tall) = get("tall");
    let (short, s_short) = get("short");
    let (wide, s_wide) = get("wide");
    let (right, s_right) = get("right");
    let (radial, s_radial) = get("radial");

    report.margins.push(Margin::new("tall <= 5 short", tall, 5.0 * short, s_tall.hypot(5.0 * s_short)));
    let halves_sigma = (s_wide.powi(2) + (right * s_tall).powi(2) + (tall * s_right).powi(2)).sqrt();
    report.margins.push(Margin::new("wide <= tall * right", wide, tall * right, halves_sigma));
    let doubling_sigma = (25.0 * s_wide).hypot(2.0 * 625.0 * short * s_short);
    report.margins.push(Margin::new("25 wide <= (25 short)^2", 25.0 * wide, (25.0 * short).powi(2), doubling_sigma));
    report.margins.push(Margin::new("radial <= 4 short", radial, 4.0 * short, s_radial.hypot(4.0 * s_short)));
    Ok(report)
}

/// Circuit probability in an annulus, with the fourth power of the band
/// crossing as its Harris lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusEstimate {
    pub circuit: Estimate,
    /// Long-way crossing of the `(outer − inner) × 2·outer` band above the hole.
    pub band: Estimate,
    pub band_fourth: f64,
    pub margin: Margin,
}

pub fn annulus_circuit_estimate(
    kind: GraphKind,
    occupancy: Occupancy,
    p: f64,
    a: &Annulus,
    n_samples: u64,
    seed: u64,
) -> Result<AnnulusEstimate> {
    check_density(p)?;
    check_samples(n_samples)?;
    let bounds = a.bounding_rect();
    let band = Rect::new(bounds.x0, bounds.x1, a.center.y + a.inner, bounds.y1)?;
    let spec = CrossingSpec::new(Direction::Horizontal, occupancy, kind);
    let counts = tally(n_samples, |r| {
        let c = sample_unchecked(bounds, p, seed, r);
        let circuit = annulus_circuit(&c, a, kind, occupancy).expect("annulus fits its bounding box");
        circuit as u64 | (crossing_in(&c, spec, &band) as u64) << 1
    });
    let circuit = Estimate::from_counts(counts[0], n_samples, seed);
    let band = Estimate::from_counts(counts[1], n_samples, seed);
    let b = band.p_hat;
    let band_fourth = b.powi(4);
    let sigma = circuit.sigma().hypot(4.0 * b.powi(3) * band.sigma());
    let margin = Margin::new("band^4 <= circuit", band_fourth, circuit.p_hat, sigma);
    Ok(AnnulusEstimate { circuit, band, band_fourth, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_exact_at_unit_scale() {
        for kind in GraphKind::BOTH {
            for p in [0.0, 0.3, 0.45] {
                let r = decomposition_checks(kind, p, 1, 0, 1).unwrap();
                assert!(r.all_hold(), "{}", r.to_json());
                assert_eq!(r.quantities.iter().filter(|q| q.n_samples == 0).count(), 5);
            }
        }
        // the horizontal crossing of [0,1] x [0,2] on G at p = 0.3 by direct enumeration
        let r = decomposition_checks(GraphKind::G, 0.3, 1, 0, 1).unwrap();
        assert!((r.quantity("short").unwrap().estimate - 0.246429).abs() < 1e-12);
        assert!((r.quantity("wide").unwrap().estimate - 0.15896608957282157).abs() < 1e-12);
        // the square of the short crossing is smaller than the wide crossing here
        assert!(0.246429f64.powi(2) < 0.15896608957282157);
    }

    #[test]
    fn decomposition_sampled() {
        let r = decomposition_checks(GraphKind::G, 0.0, 2, 200, 1).unwrap();
        assert!(r.quantities.iter().all(|q| q.estimate == 0.0));
        let r = decomposition_checks(GraphKind::G, 0.45, 4, 2000, 1).unwrap();
        assert!(r.all_hold(), "{}", r.to_json());
    }

    #[test]
    fn annulus_extremes() {
        let a = Annulus::new(Site::ORIGIN, 2, 5).unwrap();
        let full = annulus_circuit_estimate(GraphKind::G, Occupancy::Occupied, 1.0, &a, 100, 1).unwrap();
        assert_eq!((full.circuit.p_hat, full.band.p_hat), (1.0, 1.0));
        let none = annulus_circuit_estimate(GraphKind::G, Occupancy::Occupied, 0.0, &a, 100, 1).unwrap();
        assert_eq!(none.circuit.p_hat, 0.0);
        assert!(none.margin.holds);
        let mid = annulus_circuit_estimate(GraphKind::GStar, Occupancy::Vacant, 0.55, &a, 2000, 1).unwrap();
        assert!(mid.margin.holds, "{mid:?}");
    }
}
