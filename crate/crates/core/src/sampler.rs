//! Bernoulli site configurations.
//!
//! Randomness is counter-based: the uniform attached to a site is a pure
//! function of `(seed, replicate, site)`. A site is occupied at density `p`
//! iff its uniform is below `p`, so configurations at different densities
//! with the same `(seed, replicate)` are monotonically coupled.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::lattice::{Rect, Site};

/// Largest rectangle (in sites) that [`enumerate`] accepts.
pub const ENUMERATION_CAP: usize = 25;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const REPLICATE_MIX: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output function.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed for a named sub-experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(GOLDEN)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedScheme {
    pub seed: u64,
}

impl SeedScheme {
    pub fn new(seed: u64) -> Self {
        SeedScheme { seed }
    }

    pub fn stream(&self, replicate: u64) -> ReplicateStream {
        let key = mix64(self.seed.wrapping_add(GOLDEN));
        ReplicateStream { key: mix64(key ^ replicate.wrapping_mul(REPLICATE_MIX).wrapping_add(GOLDEN)) }
    }

    pub fn uniform(&self, replicate: u64, site: Site) -> f64 {
        self.stream(replicate).uniform(site)
    }
}

/// The uniform field of one replicate: a SplitMix64 sequence indexed by the
/// packed site coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ReplicateStream {
    key: u64,
}

impl ReplicateStream {
    #[inline]
    fn bits53(&self, site: Site) -> u64 {
        let code = ((site.x as u32 as u64) << 32) | (site.y as u32 as u64);
        mix64(self.key.wrapping_add(code.wrapping_mul(GOLDEN))) >> 11
    }

    #[inline]
    pub fn uniform(&self, site: Site) -> f64 {
        self.bits53(site) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn occupied(&self, site: Site, p: f64) -> bool {
        self.uniform(site) < p
    }
}

/// Uniform in `[0, 1)` attached to `site` in replicate `replicate` of stream `seed`.
pub fn site_uniform(seed: u64, replicate: u64, site: Site) -> f64 {
    SeedScheme::new(seed).uniform(replicate, site)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Provenance {
    pub p: f64,
    pub seed: u64,
    pub replicate: u64,
}

/// One occupancy assignment on a rectangle, bit-packed row-major (bottom row
/// first). Immutable once built; the transforming methods return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    rect: Rect,
    bits: Vec<u64>,
    provenance: Option<Provenance>,
}

impl Config {
    fn empty(rect: Rect) -> Config {
        Config { rect, bits: vec![0; rect.site_count().div_ceil(64)], provenance: None }
    }

    pub fn from_fn(rect: Rect, mut occupied: impl FnMut(Site) -> bool) -> Config {
        let mut c = Config::empty(rect);
        for (i, s) in rect.sites().enumerate() {
            if occupied(s) {
                c.bits[i / 64] |= 1 << (i % 64);
            }
        }
        c
    }

    pub fn filled(rect: Rect, occupied: bool) -> Config {
        Config::from_fn(rect, |_| occupied)
    }

    /// Occupied exactly on `sites`; sites outside `rect` are ignored.
    pub fn from_sites(rect: Rect, sites: impl IntoIterator<Item = Site>) -> Config {
        let mut c = Config::empty(rect);
        for s in sites {
            if rect.contains(s) {
                let i = rect.index(s);
                c.bits[i / 64] |= 1 << (i % 64);
            }
        }
        c
    }

    /// Bit `i` of `mask` is the occupancy of local site `i`.
    pub fn from_mask(rect: Rect, mask: u64) -> Result<Config> {
        if rect.site_count() > 64 {
            return domain(format!("mask construction needs <= 64 sites, rect {rect} has {}", rect.site_count()));
        }
        let mut c = Config::empty(rect);
        c.set_mask(mask);
        Ok(c)
    }

    /// Reuse this buffer for another small configuration. Crate-internal so
    /// that public values stay immutable.
    pub(crate) fn set_mask(&mut self, mask: u64) {
        let n = self.rect.site_count();
        self.bits[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    #[inline]
    pub fn bit(&self, index: usize) -> bool {
        self.bits[index / 64] >> (index % 64) & 1 == 1
    }

    /// Occupancy of `s`. Panics if `s` lies outside the rectangle.
    #[inline]
    pub fn occupied(&self, s: Site) -> bool {
        assert!(self.rect.contains(s), "site {s} outside {}", self.rect);
        self.bit(self.rect.index(s))
    }

    pub fn get(&self, s: Site) -> Option<bool> {
        self.rect.contains(s).then(|| self.bit(self.rect.index(s)))
    }

    pub fn count_occupied(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.rect.sites().filter(|&s| self.occupied(s))
    }

    /// Local bitmask of `sub` (at most 64 sites): bit set where the
    /// occupancy equals `want`.
    pub(crate) fn sub_mask(&self, sub: &Rect, want: bool) -> u64 {
        let cols = sub.cols();
        let mut mask = 0u64;
        let mut k = 0;
        for y in sub.y0..=sub.y1 {
            let base = self.rect.index(Site::new(sub.x0, y));
            for dx in 0..cols {
                if self.bit(base + dx) == want {
                    mask |= 1 << k;
                }
                k += 1;
            }
        }
        mask
    }

    /// Copy with the occupancy of `s` replaced.
    pub fn with_site(&self, s: Site, occupied: bool) -> Config {
        let mut c = self.clone();
        let i = self.rect.index(s);
        if occupied {
            c.bits[i / 64] |= 1 << (i % 64);
        } else {
            c.bits[i / 64] &= !(1 << (i % 64));
        }
        c
    }

    /// Occupied and vacant swapped.
    pub fn complement(&self) -> Config {
        let mut c = Config::from_fn(self.rect, |s| !self.occupied(s));
        c.provenance = self.provenance;
        c
    }

    /// Mirror image under `x ↦ x0 + x1 - x`.
    pub fn reflect_x(&self) -> Config {
        let r = self.rect;
        let mut c = Config::from_fn(r, |s| self.occupied(Site::new(r.x0 + r.x1 - s.x, s.y)));
        c.provenance = self.provenance;
        c
    }

    /// Mirror image under `y ↦ y0 + y1 - y`.
    pub fn reflect_y(&self) -> Config {
        let r = self.rect;
        let mut c = Config::from_fn(r, |s| self.occupied(Site::new(s.x, r.y0 + r.y1 - s.y)));
        c.provenance = self.provenance;
        c
    }

    /// Image under `(x, y) ↦ (y, x)`.
    pub fn transpose(&self) -> Config {
        let mut c = Config::from_fn(self.rect.transpose(), |s| self.occupied(Site::new(s.y, s.x)));
        c.provenance = self.provenance;
        c
    }

    /// Text dump: a header `rect x0 x1 y0 y1 p seed replicate` (`na` for
    /// missing provenance) then one `0`/`1` row per y, top row first.
    pub fn to_text(&self) -> String {
        let r = self.rect;
        let mut out = String::new();
        match &self.provenance {
            Some(pv) => {
                let _ = writeln!(out, "rect {} {} {} {} {} {} {}", r.x0, r.x1, r.y0, r.y1, pv.p, pv.seed, pv.replicate);
            }
            None => {
                let _ = writeln!(out, "rect {} {} {} {} na na na", r.x0, r.x1, r.y0, r.y1);
            }
        }
        for y in (r.y0..=r.y1).rev() {
            for x in r.x0..=r.x1 {
                out.push(if self.occupied(Site::new(x, y)) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Config> {
        let bad = |msg: &str| Error::Parse(format!("config text: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 8 || fields[0] != "rect" {
            return Err(bad("header must be `rect x0 x1 y0 y1 p seed replicate`"));
        }
        let int = |s: &str| s.parse::<i64>().map_err(|_| bad(&format!("bad integer {s:?}")));
        let rect = Rect::new(int(fields[1])?, int(fields[2])?, int(fields[3])?, int(fields[4])?)?;
        let provenance = if fields[5..].iter().all(|f| *f == "na") {
            None
        } else {
            Some(Provenance {
                p: fields[5].parse().map_err(|_| bad("bad p"))?,
                seed: fields[6].parse().map_err(|_| bad("bad seed"))?,
                replicate: fields[7].parse().map_err(|_| bad("bad replicate"))?,
            })
        };
        let rows: Vec<&str> = lines.map(str::trim).collect();
        if rows.len() != rect.rows() {
            return Err(bad(&format!("expected {} rows, found {}", rect.rows(), rows.len())));
        }
        let mut occupied = Vec::with_capacity(rect.site_count());
        for (k, row) in rows.iter().enumerate() {
            if row.len() != rect.cols() {
                return Err(bad(&format!("row {k} has {} columns, expected {}", row.len(), rect.cols())));
            }
            let y = rect.y1 - k as i64;
            for (dx, ch) in row.chars().enumerate() {
                match ch {
                    '1' => occupied.push(Site::new(rect.x0 + dx as i64, y)),
                    '0' => {}
                    other => return Err(bad(&format!("unexpected character {other:?}"))),
                }
            }
        }
        let mut c = Config::from_sites(rect, occupied);
        c.provenance = provenance;
        Ok(c)
    }
}

/// Bernoulli(p) configuration on `rect` for the given replicate.
pub fn sample(rect: Rect, p: f64, seed: u64, replicate: u64) -> Result<Config> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("density p = {p} outside [0, 1]"));
    }
    Ok(sample_unchecked(rect, p, seed, replicate))
}

pub(crate) fn sample_unchecked(rect: Rect, p: f64, seed: u64, replicate: u64) -> Config {
    let stream = SeedScheme::new(seed).stream(replicate);
    // compare in 53-bit integer space: u < p  <=>  bits < p * 2^53
    let threshold = p * (1u64 << 53) as f64;
    let mut c = Config::from_fn(rect, |s| (stream.bits53(s) as f64) < threshold);
    c.provenance = Some(Provenance { p, seed, replicate });
    c
}

/// Every occupancy assignment of a rectangle with at most
/// [`ENUMERATION_CAP`] sites, in mask order.
pub fn enumerate(rect: Rect) -> Result<Enumeration> {
    let n = rect.site_count();
    if n > ENUMERATION_CAP {
        return Err(Error::TooLarge { sites: n, cap: ENUMERATION_CAP });
    }
    Ok(Enumeration { rect, next: 0, end: 1u64 << n })
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    rect: Rect,
    next: u64,
    end: u64,
}

impl Iterator for Enumeration {
    type Item = Config;

    fn next(&mut self) -> Option<Config> {
        if self.next == self.end {
            return None;
        }
        let mut c = Config::empty(self.rect);
        c.set_mask(self.next);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Enumeration {}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn uniform_is_deterministic_and_in_range() {
        let s = Site::new(3, -7);
        assert_eq!(site_uniform(11, 5, s), site_uniform(11, 5, s));
        assert_ne!(site_uniform(11, 5, s), site_uniform(11, 6, s));
        for r in 0..1000 {
            let u = site_uniform(1, r, s);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn uniform_mean_over_a_million_draws() {
        let mut sum = 0.0;
        let mut n = 0u64;
        for r in 0..1000 {
            let st = SeedScheme::new(42).stream(r);
            for x in 0..1000 {
                sum += st.uniform(Site::new(x, r as i64 % 7));
                n += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn adjacent_sites_are_uncorrelated() {
        let (a, b) = (Site::new(0, 0), Site::new(1, 0));
        let n = 100_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for r in 0..n {
            let st = SeedScheme::new(9).stream(r);
            let (u, v) = (st.uniform(a), st.uniform(b));
            assert_ne!(u, v);
            sa += u;
            sb += v;
            sab += u * v;
            saa += u * u;
            sbb += v * v;
        }
        let n = n as f64;
        let cov = sab / n - sa / n * sb / n;
        let corr = cov / ((saa / n - (sa / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");
    }

    #[test]
    fn sample_extremes_and_determinism() {
        let r = Rect::new(0, 9, 0, 6).unwrap();
        assert_eq!(sample(r, 1.0, 3, 0).unwrap().count_occupied(), r.site_count());
        assert_eq!(sample(r, 0.0, 3, 0).unwrap().count_occupied(), 0);
        assert_eq!(sample(r, 0.5, 1, 7).unwrap(), sample(r, 0.5, 1, 7).unwrap());
        assert!(sample(r, 1.5, 1, 0).is_err());
    }

    #[test]
    fn sample_agrees_with_site_uniform() {
        let r = Rect::new(-3, 4, -2, 2).unwrap();
        let c = sample(r, 0.37, 5, 12).unwrap();
        for s in r.sites() {
            assert_eq!(c.occupied(s), site_uniform(5, 12, s) < 0.37);
        }
    }

    #[test]
    fn occupied_fraction_matches_p() {
        let r = Rect::new(0, 31, 0, 31).unwrap();
        let p = 0.3;
        let reps = 10_000u64;
        let total: usize = (0..reps).map(|k| sample(r, p, 77, k).unwrap().count_occupied()).sum();
        let frac = total as f64 / (reps as f64 * 1024.0);
        let tol = 3.0 * (p * (1.0 - p) / (reps as f64 * 1024.0)).sqrt();
        assert!((frac - p).abs() < tol, "fraction {frac}");
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(Rect::new(0, 1, 0, 0).unwrap()).unwrap().count(), 4);
        let all: HashSet<String> = enumerate(Rect::new(0, 2, 0, 2).unwrap()).unwrap().map(|c| c.to_text()).collect();
        assert_eq!(all.len(), 512);
        let big = Rect::new(0, 12, 0, 1).unwrap();
        assert_eq!(big.site_count(), 26);
        assert!(matches!(enumerate(big), Err(Error::TooLarge { sites: 26, cap: 25 })));
    }

    #[test]
    fn text_format_round_trip() {
        let r = Rect::new(-1, 3, 2, 4).unwrap();
        let c = sample(r, 0.5, 8, 3).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("rect -1 3 2 4 0.5 8 3\n"));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.parse::<Config>().unwrap(), c);

        let e = Config::from_sites(r, [Site::new(-1, 4)]);
        let t = e.to_text();
        assert_eq!(t, "rect -1 3 2 4 na na na\n10000\n00000\n00000\n");
        assert_eq!(t.parse::<Config>().unwrap(), e);
        assert!("rect 0 1 0 0 na na na\n12\n".parse::<Config>().is_err());
    }

    #[test]
    fn reflections_are_involutions() {
        let r = Rect::new(2, 7, -1, 3).unwrap();
        let c = sample(r, 0.5, 2, 2).unwrap();
        assert_eq!(c.reflect_x().reflect_x(), c);
        assert_eq!(c.reflect_y().reflect_y(), c);
        assert_eq!(c.transpose().transpose(), c);
        assert_eq!(c.reflect_x().occupied(Site::new(7, 0)), c.occupied(Site::new(2, 0)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn monotone_coupling(seed in any::<u64>(), rep in 0u64..1000, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
                let r = Rect::new(0, 7, 0, 5).unwrap();
                let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
                let a = sample(r, lo, seed, rep).unwrap();
                let b = sample(r, hi, seed, rep).unwrap();
                for s in r.sites() {
                    prop_assert!(!a.occupied(s) || b.occupied(s));
                }
            }

            #[test]
            fn text_round_trip(seed in any::<u64>(), w in 0i64..6, h in 0i64..6) {
                let c = sample(Rect::new(0, w, 0, h).unwrap(), 0.5, seed, 0).unwrap();
                prop_assert_eq!(c.to_text().parse::<Config>().unwrap(), c);
            }
        }
    }
}
