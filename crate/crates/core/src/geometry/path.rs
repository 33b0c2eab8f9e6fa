use std::fmt;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::lattice::{GraphKind, Site};

/// A self-avoiding path whose consecutive sites are adjacent in `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SitePath {
    sites: Vec<Site>,
    kind: GraphKind,
}

impl SitePath {
    /// Checks adjacency and self-avoidance. The empty path is allowed.
    pub fn new(sites: Vec<Site>, kind: GraphKind) -> Result<Self> {
        for w in sites.windows(2) {
            if !kind.adjacent(w[0], w[1]) {
                return domain(format!("{} and {} are not adjacent in {kind}", w[0], w[1]));
            }
        }
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return domain(format!("site {} repeats", w[0]));
        }
        Ok(SitePath { sites, kind })
    }

    pub(crate) fn new_unchecked(sites: Vec<Site>, kind: GraphKind) -> Self {
        debug_assert!(SitePath::new(sites.clone(), kind).is_ok());
        SitePath { sites, kind }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn first(&self) -> Option<Site> {
        self.sites.first().copied()
    }

    pub fn last(&self) -> Option<Site> {
        self.sites.last().copied()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.sites.contains(&s)
    }

    /// The sub-path starting at the last site with `x == line_x`.
    pub fn suffix_from_last_visit(&self, line_x: i64) -> Result<SitePath> {
        match self.sites.iter().rposition(|s| s.x == line_x) {
            Some(i) => Ok(SitePath { sites: self.sites[i..].to_vec(), kind: self.kind }),
            None => domain(format!("path never visits x = {line_x}")),
        }
    }

    /// Image under x ↦ axis_sum − x; order is kept.
    pub fn reflect_x(&self, axis_sum: i64) -> SitePath {
        let sites = self.sites.iter().map(|s| Site::new(axis_sum - s.x, s.y)).collect();
        SitePath { sites, kind: self.kind }
    }

    /// Image under y ↦ axis_sum − y; order is kept.
    pub fn reflect_y(&self, axis_sum: i64) -> SitePath {
        let sites = self.sites.iter().map(|s| Site::new(s.x, axis_sum - s.y)).collect();
        SitePath { sites, kind: self.kind }
    }
}

impl fmt::Display for SitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Height of the last site of `r` on the vertical line `x = line_x`.
pub fn y_statistic(r: &SitePath, line_x: i64) -> Result<i64> {
    match r.sites.iter().rev().find(|s| s.x == line_x) {
        Some(s) => Ok(s.y),
        None => domain(format!("path never visits x = {line_x}")),
    }
}

/// Minimum and maximum x over the path.
pub fn x_extremes(r: &SitePath) -> Result<(i64, i64)> {
    let lo = r.sites.iter().map(|s| s.x).min();
    let hi = r.sites.iter().map(|s| s.x).max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => domain("empty path has no extremes"),
    }
}
