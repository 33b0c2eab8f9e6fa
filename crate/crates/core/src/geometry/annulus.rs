use crate::error::{domain, Result};
use crate::lattice::{Annulus, GraphKind, Rect, Site};
use crate::sampler::Config;

use super::{crossing_in, CrossingSpec, Direction, Occupancy};

fn check_inside(c: &Config, a: &Annulus) -> Result<Rect> {
    let bounds = a.bounding_rect();
    if c.rect().contains_rect(&bounds) {
        Ok(bounds)
    } else {
        domain(format!("annulus {bounds} not inside {}", c.rect()))
    }
}

/// Whether the sites of the annulus with the requested occupancy contain a
/// `kind`-cycle winding around the center.
///
/// Every component gets a potential: the signed number of times a spanning
/// tree path crosses the ray `{(x, cy + 1/2) : x > cx}`. A cycle with nonzero
/// winding exists exactly when some edge disagrees with the potential.
pub fn annulus_circuit(c: &Config, a: &Annulus, kind: GraphKind, occupancy: Occupancy) -> Result<bool> {
    let bounds = check_inside(c, a)?;
    let want = occupancy.as_bool();
    let member = |s: Site| a.contains(s) && c.occupied(s) == want;
    let center = a.center;
    // vertical component of the step u → v through the ray, signed
    let winding = |u: Site, v: Site| -> i64 {
        if u.x + v.x <= 2 * center.x {
            return 0;
        }
        match (u.y - center.y, v.y - center.y) {
            (0, 1) => 1,
            (1, 0) => -1,
            _ => 0,
        }
    };
    let mut potential: Vec<Option<i64>> = vec![None; bounds.site_count()];
    let mut stack = Vec::new();
    for start in a.sites() {
        if !member(start) || potential[bounds.index(start)].is_some() {
            continue;
        }
        potential[bounds.index(start)] = Some(0);
        stack.push(start);
        while let Some(u) = stack.pop() {
            let pu = potential[bounds.index(u)].unwrap();
            for &(dx, dy) in kind.offsets() {
                let v = u.offset(dx, dy);
                if !member(v) {
                    continue;
                }
                let expected = pu + winding(u, v);
                match potential[bounds.index(v)] {
                    None => {
                        potential[bounds.index(v)] = Some(expected);
                        stack.push(v);
                    }
                    Some(pv) if pv != expected => return Ok(true),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(false)
}

/// Four overlapping bands around the hole, each crossed the long way: the
/// bands above and below horizontally, the bands left and right vertically.
/// The four crossings join into a circuit, so this implies
/// [`annulus_circuit`]; the converse fails for circuits that leave a band.
pub fn annulus_four_band(c: &Config, a: &Annulus, kind: GraphKind, occupancy: Occupancy) -> Result<bool> {
    check_inside(c, a)?;
    let (cx, cy, i, o) = (a.center.x, a.center.y, a.inner, a.outer);
    let bands = [
        (Rect::new(cx - o, cx + o, cy + i, cy + o)?, Direction::Horizontal),
        (Rect::new(cx - o, cx + o, cy - o, cy - i)?, Direction::Horizontal),
        (Rect::new(cx - o, cx - i, cy - o, cy + o)?, Direction::Vertical),
        (Rect::new(cx + i, cx + o, cy - o, cy + o)?, Direction::Vertical),
    ];
    Ok(bands
        .iter()
        .all(|(band, direction)| crossing_in(c, CrossingSpec::new(*direction, occupancy, kind), band)))
}
