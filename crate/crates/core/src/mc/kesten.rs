//! Constants and Monte Carlo check of the crossing-extension bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{crossing_in, CrossingSpec, Direction, EventsE, KestenLayout};
use crate::lattice::{GraphKind, Rect};
use crate::oracle::binomial;
use crate::report::{Margin, Quantity, Report};
use crate::sampler::sample_unchecked;

use super::{check_density, check_samples, Estimate};

/// Smallest base width the extension bound assumes; below it, relaxed mode only.
pub const MIN_L1: i64 = 48;

/// Which measured crossing probability feeds `delta3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaBasis {
    Delta1,
    Delta2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KestenConstants {
    pub delta1: f64,
    pub delta2: f64,
    pub epsilon: f64,
    pub delta3: f64,
    pub delta3_basis: DeltaBasis,
    pub n: u64,
    pub k: u64,
    pub t: f64,
}

/// `(√(1 − δ) − (1 − δ)) / δ`, so that `(1 − ε)·δ = 1 − √(1 − δ)`.
pub fn epsilon(delta1: f64) -> f64 {
    ((1.0 - delta1).sqrt() - (1.0 - delta1)) / delta1
}

/// `(1 − √(1 − δ1))² (1 − √(1 − δ2))²`.
pub fn bound_factor(delta1: f64, delta2: f64) -> f64 {
    (root_gain(delta1) * root_gain(delta2)).powi(2)
}

/// `1 − √(1 − δ)`.
fn root_gain(delta: f64) -> f64 {
    1.0 - (1.0 - delta).sqrt()
}

/// `d/dδ (1 − √(1 − δ))`, infinite at `δ = 1`.
fn root_gain_slope(delta: f64) -> f64 {
    0.5 / (1.0 - delta).sqrt()
}

/// Slope times standard error, with a zero error contributing nothing even
/// where the slope is infinite.
fn spread(slope: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        slope * sigma
    }
}

pub fn kesten_constants(delta1: f64, delta2: f64, n: u64, k: u64, t: f64) -> Result<KestenConstants> {
    kesten_constants_with(delta1, delta2, n, k, t, DeltaBasis::Delta1)
}

/// As [`kesten_constants`], taking `delta3 = 1 − (1 − δ)^(1 / C(n, 2))` from
/// the chosen basis.
pub fn kesten_constants_with(
    delta1: f64,
    delta2: f64,
    n: u64,
    k: u64,
    t: f64,
    basis: DeltaBasis,
) -> Result<KestenConstants> {
    for (name, d) in [("delta1", delta1), ("delta2", delta2)] {
        if !(d > 0.0 && d <= 1.0) {
            return domain(format!("{name} = {d} outside (0, 1]"));
        }
    }
    if n < 2 || k < 1 || t.is_nan() || t <= 0.0 {
        return domain(format!("need n >= 2, k >= 1, t > 0; got n = {n}, k = {k}, t = {t}"));
    }
    let base = match basis {
        DeltaBasis::Delta1 => delta1,
        DeltaBasis::Delta2 => delta2,
    };
    let pairs = binomial(n as usize, 2) as f64;
    Ok(KestenConstants {
        delta1,
        delta2,
        epsilon: epsilon(delta1),
        delta3: 1.0 - (1.0 - base).powf(1.0 / pairs),
        delta3_basis: basis,
        n,
        k,
        t,
    })
}

#[derive(Debug, Clone, Copy)]
struct Observation {
    horizontal: bool,
    vertical: bool,
    extended: bool,
    events: EventsE,
}

/// Smallest height whose empirical distribution function reaches `level`.
fn cut_height(mut heights: Vec<i64>, level: f64) -> Option<i64> {
    if heights.is_empty() {
        return None;
    }
    heights.sort_unstable();
    let need = ((level * heights.len() as f64).ceil() as usize).clamp(1, heights.len());
    Some(heights[need - 1])
}

/// Measures both sides of the extension bound on `[0, l1 + floor(l1/8)] ×
/// [0, l2]` together with the two extension events, all on the same samples
/// of the doubled rectangle `[0, 2·l1] × [0, l2]`.
///
/// With `l1 < 48` the call fails unless `relaxed` is set, in which case the
/// report carries a flag.
pub fn kesten_bound_check(
    kind: GraphKind,
    p: f64,
    l1: i64,
    l2: i64,
    n_samples: u64,
    seed: u64,
    relaxed: bool,
) -> Result<Report> {
    check_density(p)?;
    check_samples(n_samples)?;
    if l1 < MIN_L1 && !relaxed {
        return domain(format!("l1 = {l1} below {MIN_L1}; use relaxed mode for smaller rectangles"));
    }
    let layout = KestenLayout::new(l1, l2)?;
    let extended = Rect::new(0, l1 + layout.line, 0, l2)?;
    let h = CrossingSpec::occupied(Direction::Horizontal, kind);
    let v = CrossingSpec::occupied(Direction::Vertical, kind);

    let observations: Vec<Observation> = (0..n_samples)
        .into_par_iter()
        .map(|r| {
            let c = sample_unchecked(layout.doubled, p, seed, r);
            Observation {
                horizontal: crossing_in(&c, h, &layout.half),
                vertical: crossing_in(&c, v, &layout.half),
                extended: crossing_in(&c, h, &extended),
                events: EventsE::observe(&c, kind, &layout).expect("layout matches the sampled rectangle"),
            }
        })
        .collect();
    let estimate = |f: &dyn Fn(&Observation) -> bool| {
        Estimate::from_counts(observations.iter().filter(|o| f(o)).count() as u64, n_samples, seed)
    };
    let delta1 = estimate(&|o| o.horizontal);
    let delta2 = estimate(&|o| o.vertical);
    let lhs = estimate(&|o| o.extended);

    let mut report = Report::new("kesten-check")
        .param("graph", kind.name())
        .param("p", p)
        .param("l1", l1)
        .param("l2", l2)
        .param("l3", l1)
        .param("line_x", layout.line)
        .param("n_samples", n_samples)
        .param("seed", seed);
    if l1 < MIN_L1 {
        report.flags.push(format!("relaxed: l1 = {l1} violates the hypothesis l1 >= {MIN_L1}"));
    }
    report.quantities.push(Quantity::from_estimate("delta1", &delta1));
    report.quantities.push(Quantity::from_estimate("delta2", &delta2));
    report.quantities.push(Quantity::from_estimate("lhs", &lhs));

    let (d1, d2) = (delta1.p_hat, delta2.p_hat);
    let (s1, s2) = (delta1.sigma(), delta2.sigma());
    let (g1, g2) = (root_gain(d1), root_gain(d2));

    let factor = bound_factor(d1, d2);
    let rhs = factor * d1;
    // d(rhs)/dδ1 = factor + δ1 · 2 g1 g2² g1'; d(rhs)/dδ2 = δ1 · 2 g1² g2 g2'
    let rhs_sigma = ((factor * s1 + d1 * 2.0 * g1 * g2 * g2 * spread(root_gain_slope(d1), s1)).powi(2)
        + (d1 * 2.0 * g1 * g1 * g2 * spread(root_gain_slope(d2), s2)).powi(2))
    .sqrt();
    report.quantities.push(Quantity::derived("bound_factor", factor, 0.0, n_samples));
    report.quantities.push(Quantity::derived("rhs", rhs, rhs_sigma, n_samples));
    let sigma = (lhs.sigma().powi(2) + rhs_sigma.powi(2)).sqrt();
    report.margins.push(Margin::new("rhs <= lhs", rhs, lhs.p_hat, sigma));

    if d1 == 0.0 {
        report.flags.push("no horizontal crossing observed: cut height undefined".to_string());
        return Ok(report);
    }
    let eps = epsilon(d1);
    let heights: Vec<i64> = observations.iter().filter_map(|o| o.events.lowest_y).collect();
    let m = cut_height(heights, 1.0 - eps).expect("delta1 > 0 means some lowest crossing exists");
    report.parameters.insert("epsilon".into(), eps.into());
    report.parameters.insert("cut_height".into(), m.into());

    let e_minus = estimate(&|o| o.events.at_cut(m).0);
    let e_plus = estimate(&|o| o.events.at_cut(m).1);
    let floor = g1 * g2;
    let floor_sigma = (g2 * spread(root_gain_slope(d1), s1)).hypot(g1 * spread(root_gain_slope(d2), s2));
    report.quantities.push(Quantity::from_estimate("e_minus", &e_minus));
    report.quantities.push(Quantity::from_estimate("e_plus", &e_plus));
    report.quantities.push(Quantity::derived("extension_floor", floor, floor_sigma, n_samples));
    for (name, e) in [("extension_floor <= e_minus", &e_minus), ("extension_floor <= e_plus", &e_plus)] {
        report.margins.push(Margin::new(name, floor, e.p_hat, e.sigma().hypot(floor_sigma)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(epsilon(0.75), 1.0 / 3.0);
        for k in 1..=9 {
            let d = k as f64 / 10.0;
            assert!(((1.0 - epsilon(d)) * d - (1.0 - (1.0 - d).sqrt())).abs() < 1e-12);
        }
        assert_eq!(bound_factor(0.75, 0.75), 1.0 / 16.0);
        assert_eq!(bound_factor(1.0, 1.0), 1.0);
        let c = kesten_constants(0.75, 0.5, 2, 1, 1.0).unwrap();
        assert_eq!(c.delta3, 0.75);
        let c = kesten_constants(0.75, 0.5, 3, 1, 1.0).unwrap();
        assert!((c.delta3 - (1.0 - 0.25f64.powf(1.0 / 3.0))).abs() < 1e-12);
        assert!((c.delta3 - 0.370).abs() < 1e-3);
        let c = kesten_constants_with(0.75, 0.5, 2, 1, 1.0, DeltaBasis::Delta2).unwrap();
        assert_eq!((c.delta3, c.delta3_basis), (0.5, DeltaBasis::Delta2));
        assert!(kesten_constants(0.0, 0.5, 2, 1, 1.0).is_err());
        assert!(kesten_constants(0.5, 0.5, 1, 1, 1.0).is_err());
    }

    #[test]
    fn cut_height_quantile() {
        assert_eq!(cut_height(vec![], 0.5), None);
        assert_eq!(cut_height(vec![3, 1, 2, 4], 0.5), Some(2));
        assert_eq!(cut_height(vec![3, 1, 2, 4], 0.51), Some(3));
        assert_eq!(cut_height(vec![5], 0.0), Some(5));
    }

    #[test]
    fn full_density_is_trivial() {
        let r = kesten_bound_check(GraphKind::G, 1.0, 16, 16, 100, 1, true).unwrap();
        assert_eq!(r.quantity("lhs").unwrap().estimate, 1.0);
        assert_eq!(r.quantity("rhs").unwrap().estimate, 1.0);
        assert!(r.all_hold());
        assert_eq!(r.flags.len(), 1);
        assert!(kesten_bound_check(GraphKind::G, 1.0, 16, 16, 100, 1, false).is_err());
    }

    #[test]
    fn relaxed_run_near_criticality_holds() {
        for (kind, p) in [(GraphKind::G, 0.593), (GraphKind::GStar, 0.407)] {
            let r = kesten_bound_check(kind, p, 16, 16, 2000, 3, true).unwrap();
            assert!(r.all_hold(), "{}", r.to_json());
            assert!(r.parameters.contains_key("cut_height"));
        }
    }
}
