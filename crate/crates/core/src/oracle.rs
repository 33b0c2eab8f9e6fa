//! Exact answers on rectangles small enough to enumerate.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{dual_pairs, CrossingSpec, Direction};
use crate::grid::SmallGrid;
use crate::lattice::Rect;
use crate::sampler::{Config, ENUMERATION_CAP};

/// `Σ_k c_k p^k (1 − p)^(n − k)` where `c_k` counts the configurations with
/// `k` occupied sites that satisfy an event on `n` sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PPolynomial {
    n: usize,
    coefficients: Vec<u64>,
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

impl PPolynomial {
    pub fn new(n: usize, coefficients: Vec<u64>) -> Result<Self> {
        if coefficients.len() != n + 1 {
            return domain(format!("{} coefficients for {n} sites", coefficients.len()));
        }
        if let Some(k) = (0..=n).find(|&k| coefficients[k] > binomial(n, k)) {
            return domain(format!("coefficient {k} = {} exceeds C({n}, {k})", coefficients[k]));
        }
        Ok(PPolynomial { n, coefficients })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// Number of satisfying configurations.
    pub fn count(&self) -> u64 {
        self.coefficients.iter().sum()
    }

    pub fn eval(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| c as f64 * p.powi(k as i32) * q.powi((self.n - k) as i32))
            .sum()
    }
}

impl fmt::Display for PPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coefficients.iter().enumerate().filter(|(_, &c)| c > 0) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}·p^{k}·q^{}", self.n - k)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub description: String,
    /// The offending configuration in the text format.
    pub config: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n{}", self.description, self.config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds { checked: u64 },
    Fails(Counterexample),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Fails(c) => Some(c),
            Verdict::Holds { .. } => None,
        }
    }
}

const CHUNK_BITS: u32 = 12;

fn check_cap(rect: &Rect) -> Result<usize> {
    let n = rect.site_count();
    if n > ENUMERATION_CAP {
        return Err(Error::TooLarge { sites: n, cap: ENUMERATION_CAP });
    }
    Ok(n)
}

/// Mask ranges covering `0..2^n`, in order.
fn chunks(n: usize) -> impl IndexedParallelIterator<Item = std::ops::Range<u64>> {
    let size = 1u64 << CHUNK_BITS.min(n as u32);
    let count = (1usize << n) / size as usize;
    (0..count).into_par_iter().map(move |k| k as u64 * size..(k as u64 + 1) * size)
}

/// Exact probability polynomial of `predicate` over all configurations of `rect`.
pub fn exact_prob<F>(rect: &Rect, predicate: F) -> Result<PPolynomial>
where
    F: Fn(&Config) -> bool + Sync,
{
    let n = check_cap(rect)?;
    let coefficients = chunks(n)
        .map(|range| {
            let mut counts = vec![0u64; n + 1];
            let mut c = Config::from_mask(*rect, 0)?;
            for mask in range {
                c.set_mask(mask);
                if predicate(&c) {
                    counts[mask.count_ones() as usize] += 1;
                }
            }
            Ok::<_, Error>(counts)
        })
        .try_reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    PPolynomial::new(n, coefficients)
}

/// Checks `claim` on every configuration of `rect`; `claim` returns a
/// description of the failure. The smallest failing mask is reported.
pub fn verify_all<F>(rect: &Rect, claim: F) -> Result<Verdict>
where
    F: Fn(&Config) -> Option<String> + Sync,
{
    let n = check_cap(rect)?;
    let failure = chunks(n).find_map_first(|range| {
        let mut c = Config::from_mask(*rect, 0).ok()?;
        for mask in range {
            c.set_mask(mask);
            if let Some(description) = claim(&c) {
                return Some(Counterexample { description, config: c.to_text() });
            }
        }
        None
    });
    Ok(match failure {
        Some(cx) => Verdict::Fails(cx),
        None => Verdict::Holds { checked: 1 << n },
    })
}

/// `antecedent ⇒ consequent` on every configuration of `rect`.
pub fn verify_implication<A, C>(rect: &Rect, antecedent: A, consequent: C) -> Result<Verdict>
where
    A: Fn(&Config) -> bool + Sync,
    C: Fn(&Config) -> bool + Sync,
{
    verify_all(rect, |c| (antecedent(c) && !consequent(c)).then(|| "antecedent holds, consequent fails".to_string()))
}

/// For every configuration of `rect` and each of the four dual pairs, exactly
/// one event of the pair holds.
pub fn verify_duality(rect: &Rect) -> Result<Verdict> {
    let n = check_cap(rect)?;
    let g = SmallGrid::new(rect.cols(), rect.rows());
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let holds = |spec: CrossingSpec, mask: u64| {
        let passable = if spec.occupancy.as_bool() { mask } else { !mask & full };
        match spec.direction {
            Direction::Horizontal => g.connects(spec.kind, passable, g.left, g.right),
            Direction::Vertical => g.connects(spec.kind, passable, g.bottom, g.top),
        }
    };
    let failure = chunks(n).find_map_first(|range| {
        for mask in range {
            for spec in dual_pairs() {
                let (a, b) = (holds(spec, mask), holds(spec.dual(), mask));
                if a == b {
                    let config = Config::from_mask(*rect, mask).ok()?.to_text();
                    let what = if a { "both" } else { "neither" };
                    let description = format!("{what} of [{spec}] and [{}] hold", spec.dual());
                    return Some(Counterexample { description, config });
                }
            }
        }
        None
    });
    Ok(match failure {
        Some(cx) => Verdict::Fails(cx),
        None => Verdict::Holds { checked: 1 << n },
    })
}

/// Every `(w, h)` with `(w + 1)(h + 1) <= max_sites`, as `[0, w] × [0, h]`.
pub fn rects_up_to(max_sites: usize) -> Vec<Rect> {
    let mut out = Vec::new();
    for cols in 1..=max_sites {
        for rows in 1..=max_sites / cols {
            out.push(Rect::new(0, cols as i64 - 1, 0, rows as i64 - 1).expect("nonempty"));
        }
    }
    out
}
