//! Monte Carlo estimators.
//!
//! Replicate `r` of an estimate with seed `s` always sees the configuration
//! `sample(rect, p, s, r)`, and counts are integer sums over replicates, so
//! results do not depend on how rayon splits the work.

mod checks;
mod kesten;

pub use checks::{annulus_circuit_estimate, decomposition_checks, AnnulusEstimate};
pub use kesten::{bound_factor, epsilon, kesten_bound_check, kesten_constants, kesten_constants_with, DeltaBasis, KestenConstants};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{crossing_in, CrossingSpec, Direction};
use crate::lattice::{outer_boundary_size, GraphKind, Rect, Site};
use crate::sampler::{sample_unchecked, Config, ReplicateStream, SeedScheme};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489;

pub const MIN_SAMPLES: u64 = 100;

/// Fraction of successes over replicates `0..n_samples` with a Wilson 99% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub successes: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, n_samples: u64, seed: u64) -> Self {
        assert!(n_samples > 0 && successes <= n_samples);
        let p_hat = successes as f64 / n_samples as f64;
        let (lo, hi) = wilson(successes, n_samples, Z_99);
        Estimate { p_hat, ci_lo: lo.min(p_hat), ci_hi: hi.max(p_hat), n_samples, seed, successes }
    }

    /// Normal-approximation standard error.
    pub fn sigma(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n_samples as f64).sqrt()
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub(crate) fn check_density(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        domain(format!("density p = {p} outside [0, 1]"))
    }
}

pub(crate) fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples >= MIN_SAMPLES {
        Ok(())
    } else {
        domain(format!("need at least {MIN_SAMPLES} samples, got {n_samples}"))
    }
}

/// Number of replicates in `0..n` for which `f` holds.
pub(crate) fn count(n: u64, f: impl Fn(u64) -> bool + Sync) -> u64 {
    (0..n).into_par_iter().filter(|&r| f(r)).count() as u64
}

/// Per-bit success counts of the flag words `f(r)` over replicates `0..n`.
pub(crate) fn tally(n: u64, f: impl Fn(u64) -> u64 + Sync) -> [u64; 64] {
    (0..n)
        .into_par_iter()
        .fold(
            || [0u64; 64],
            |mut acc, r| {
                let mut flags = f(r);
                while flags != 0 {
                    acc[flags.trailing_zeros() as usize] += 1;
                    flags &= flags - 1;
                }
                acc
            },
        )
        .reduce(
            || [0u64; 64],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Probability of `predicate` on Bernoulli(p) configurations of `rect`.
pub fn estimate_event<F>(rect: &Rect, p: f64, predicate: F, n_samples: u64, seed: u64) -> Result<Estimate>
where
    F: Fn(&Config) -> bool + Sync,
{
    check_density(p)?;
    check_samples(n_samples)?;
    let hits = count(n_samples, |r| predicate(&sample_unchecked(*rect, p, seed, r)));
    Ok(Estimate::from_counts(hits, n_samples, seed))
}

/// Crossing probability of `[0, w] × [0, h]`.
pub fn estimate_crossing(spec: CrossingSpec, w: i64, h: i64, p: f64, n_samples: u64, seed: u64) -> Result<Estimate> {
    let rect = Rect::with_size(w, h)?;
    estimate_event(&rect, p, |c| crossing_in(c, spec, c.rect()), n_samples, seed)
}

/// Breadth-first search of the occupied cluster of `start` inside `bounds`,
/// reading occupancies from `stream` only for sites it touches. Stops once a
/// site satisfies `target`.
pub(crate) fn explore(
    stream: &ReplicateStream,
    p: f64,
    kind: GraphKind,
    bounds: &Rect,
    start: Site,
    target: impl Fn(Site) -> bool,
) -> bool {
    if !stream.occupied(start, p) {
        return false;
    }
    if target(start) {
        return true;
    }
    let mut seen = vec![false; bounds.site_count()];
    seen[bounds.index(start)] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(dx, dy) in kind.offsets() {
            let v = u.offset(dx, dy);
            if !bounds.contains(v) || std::mem::replace(&mut seen[bounds.index(v)], true) {
                continue;
            }
            if stream.occupied(v, p) {
                if target(v) {
                    return true;
                }
                queue.push_back(v);
            }
        }
    }
    false
}

/// `P[a ↔ b inside box]`; both endpoints must be occupied.
pub fn estimate_tau(
    kind: GraphKind,
    p: f64,
    a: Site,
    b: Site,
    bounds: &Rect,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_density(p)?;
    check_samples(n_samples)?;
    if !bounds.contains(a) || !bounds.contains(b) {
        return domain(format!("endpoints {a}, {b} not both inside {bounds}"));
    }
    let scheme = SeedScheme::new(seed);
    let hits = count(n_samples, |r| explore(&scheme.stream(r), p, kind, bounds, a, |s| s == b));
    Ok(Estimate::from_counts(hits, n_samples, seed))
}

/// `|∂₊□_n|` times the probability that the origin reaches the inner
/// boundary of `□_n` inside the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NBox {
    pub connection: Estimate,
    pub boundary_size: usize,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn estimate_nbox(kind: GraphKind, p: f64, n: i64, n_samples: u64, seed: u64) -> Result<NBox> {
    check_density(p)?;
    check_samples(n_samples)?;
    if n < 1 {
        return domain(format!("box half-width must be >= 1, got {n}"));
    }
    let bounds = Rect::square(Site::ORIGIN, n)?;
    let scheme = SeedScheme::new(seed);
    let hits = count(n_samples, |r| {
        explore(&scheme.stream(r), p, kind, &bounds, Site::ORIGIN, |s| s.sup_dist(Site::ORIGIN) == n)
    });
    let connection = Estimate::from_counts(hits, n_samples, seed);
    let size = outer_boundary_size(n, kind);
    let scale = size as f64;
    Ok(NBox {
        connection,
        boundary_size: size,
        value: scale * connection.p_hat,
        ci_lo: scale * connection.ci_lo,
        ci_hi: scale * connection.ci_hi,
    })
}

/// Least-squares slope of `−ln τ` against `m`. Points with `τ <= 0` are dropped.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<f64> {
    let kept: Vec<(f64, f64)> = points.iter().filter(|&&(_, t)| t > 0.0).map(|&(m, t)| (m, -t.ln())).collect();
    if kept.len() < 3 {
        return domain(format!("need at least 3 points with positive tau, got {}", kept.len()));
    }
    let k = kept.len() as f64;
    let mx = kept.iter().map(|q| q.0).sum::<f64>() / k;
    let my = kept.iter().map(|q| q.1).sum::<f64>() / k;
    let sxx: f64 = kept.iter().map(|q| (q.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("all points share the same distance");
    }
    let sxy: f64 = kept.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Pseudo-critical point: bisection for the density at which the
/// horizontal occupied crossing of `[0, n]²` has probability 1/2. Every
/// trial density reuses replicates `0..n_samples`, so the count is monotone
/// in p and the bracket is well defined. Returns the final bracket's midpoint.
pub fn pc_bisect(kind: GraphKind, n: i64, n_samples: u64, seed: u64, tol: f64) -> Result<f64> {
    if n < 16 {
        return domain(format!("pseudo-critical point needs n >= 16, got {n}"));
    }
    if tol.is_nan() || tol < 1e-4 {
        return domain(format!("tolerance must be >= 1e-4, got {tol}"));
    }
    check_samples(n_samples)?;
    let rect = Rect::with_size(n, n)?;
    let spec = CrossingSpec::occupied(Direction::Horizontal, kind);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let hits = count(n_samples, |r| crossing_in(&sample_unchecked(rect, mid, seed, r), spec, &rect));
        if 2 * hits >= n_samples {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Joint estimate of two events on the same samples, for Harris checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointEstimate {
    pub first: Estimate,
    pub second: Estimate,
    pub both: Estimate,
}

impl JointEstimate {
    /// `P[A ∩ B] − P[A]·P[B]` and its delta-method standard error.
    pub fn correlation_margin(&self) -> (f64, f64) {
        let (a, b) = (self.first.p_hat, self.second.p_hat);
        let sigma = (self.both.sigma().powi(2) + (b * self.first.sigma()).powi(2) + (a * self.second.sigma()).powi(2)).sqrt();
        (self.both.p_hat - a * b, sigma)
    }
}

pub fn estimate_joint<A, B>(rect: &Rect, p: f64, first: A, second: B, n_samples: u64, seed: u64) -> Result<JointEstimate>
where
    A: Fn(&Config) -> bool + Sync,
    B: Fn(&Config) -> bool + Sync,
{
    check_density(p)?;
    check_samples(n_samples)?;
    let counts = tally(n_samples, |r| {
        let c = sample_unchecked(*rect, p, seed, r);
        let (a, b) = (first(&c), second(&c));
        a as u64 | (b as u64) << 1 | ((a && b) as u64) << 2
    });
    Ok(JointEstimate {
        first: Estimate::from_counts(counts[0], n_samples, seed),
        second: Estimate::from_counts(counts[1], n_samples, seed),
        both: Estimate::from_counts(counts[2], n_samples, seed),
    })
}
