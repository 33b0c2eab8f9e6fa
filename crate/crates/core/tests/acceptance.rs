//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Every seed below is fixed in advance; nothing is retried.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use percmatch::geometry::decomposition::{any_holds, five_rectangles};
use percmatch::geometry::{
    annulus_circuit, connected, has_crossing, lowest_crossing, reaches_distance, y_statistic, CrossingSpec, Direction,
    Occupancy,
};
use percmatch::mc::{
    annulus_circuit_estimate, decomposition_checks, epsilon, estimate_crossing, estimate_event, kesten_bound_check,
    kesten_constants, pc_bisect,
};
use percmatch::oracle::{exact_prob, rects_up_to, verify_duality};
use percmatch::suites::{extension_suite, five_rectangle_suite, four_rectangle_suite, sampled_duality};
use percmatch::{Annulus, Config, GraphKind, Rect, Site};

const SAMPLES: u64 = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, minutes: u64) -> bool {
    elapsed < Duration::from_secs(60 * minutes)
}

fn duality_exactness() -> Outcome {
    let start = Instant::now();
    let rects = rects_up_to(20);
    let exhaustive_failures: Vec<String> = rects
        .iter()
        .filter_map(|r| {
            let v = verify_duality(r).expect("within the enumeration cap");
            v.counterexample().map(|cx| format!("{r}: {}", cx.description))
        })
        .collect();
    let mut violations = 0;
    for (i, p) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let s = sampled_duality(63, 63, p, 100_000, 11 + i as u64).expect("valid arguments");
        violations += s.violations;
    }
    let elapsed = start.elapsed();
    outcome(
        exhaustive_failures.is_empty() && violations == 0 && within(elapsed, 2),
        format!(
            "{} shapes exhaustive, {} failures; 3 x 1e5 sampled 64x64, {violations} violations; {:.1} s",
            rects.len(),
            exhaustive_failures.len(),
            elapsed.as_secs_f64()
        ),
    )
}

type Predicate = Box<dyn Fn(&Config) -> bool + Sync>;

fn calibration_predicates() -> Vec<(&'static str, Rect, f64, Predicate)> {
    let rect = |x0, x1, y0, y1| Rect::new(x0, x1, y0, y1).unwrap();
    let crossing = |d, o, k| move |c: &Config| has_crossing(c, CrossingSpec::new(d, o, k), None).unwrap();
    use Direction::{Horizontal as H, Vertical as V};
    use GraphKind::{GStar, G};
    use Occupancy::{Occupied as Occ, Vacant as Vac};
    let ring = Annulus::new(Site::ORIGIN, 1, 2).unwrap();
    vec![
        ("h occupied G 5x5", rect(0, 4, 0, 4), 0.6, Box::new(crossing(H, Occ, G))),
        ("v occupied G* 4x5", rect(0, 3, 0, 4), 0.4, Box::new(crossing(V, Occ, GStar))),
        ("h vacant G 5x4", rect(0, 4, 0, 3), 0.5, Box::new(crossing(H, Vac, G))),
        ("v vacant G* 3x6", rect(0, 2, 0, 5), 0.5, Box::new(crossing(V, Vac, GStar))),
        (
            "two-point G",
            rect(-1, 3, -2, 2),
            0.55,
            Box::new(|c: &Config| connected(c, G, Site::ORIGIN, Site::new(2, 0)).unwrap()),
        ),
        (
            "origin to distance 2 G*",
            rect(-2, 2, -2, 2),
            0.35,
            Box::new(|c: &Config| reaches_distance(c, GStar, Site::ORIGIN, 2).unwrap()),
        ),
        (
            "five rectangles G",
            rect(0, 2, 0, 4),
            0.45,
            Box::new(|c: &Config| any_holds(&five_rectangles(1).unwrap(), c, G)),
        ),
        (
            "occupied circuit G*",
            rect(-2, 2, -2, 2),
            0.6,
            Box::new(move |c: &Config| annulus_circuit(c, &ring, GStar, Occ).unwrap()),
        ),
        (
            "h and v occupied G 4x4",
            rect(0, 3, 0, 3),
            0.55,
            Box::new(move |c: &Config| crossing(H, Occ, G)(c) && crossing(V, Occ, G)(c)),
        ),
        (
            "low lowest crossing G* 5x3",
            rect(0, 4, 0, 2),
            0.5,
            Box::new(|c: &Config| lowest_crossing(c, GStar).is_some_and(|r| y_statistic(&r, 1).unwrap() <= 1)),
        ),
    ]
}

fn calibration() -> Outcome {
    let mut covered_total = 0;
    let mut worst = (101, "");
    let mut per = Vec::new();
    for (i, (name, rect, p, predicate)) in calibration_predicates().into_iter().enumerate() {
        let exact = exact_prob(&rect, &predicate).expect("within the enumeration cap").eval(p);
        let covered = (0..100u64)
            .filter(|rep| {
                estimate_event(&rect, p, &predicate, SAMPLES, 1000 * (i as u64 + 1) + rep).unwrap().covers(exact)
            })
            .count();
        covered_total += covered;
        if covered < worst.0 {
            worst = (covered, name);
        }
        per.push(covered.to_string());
    }
    outcome(
        covered_total >= 990,
        format!(
            "{covered_total}/1000 intervals cover the exact value; per predicate [{}], lowest {} ({})",
            per.join(" "),
            worst.0,
            worst.1
        ),
    )
}

fn sum_rule(p_g: f64, p_star: f64, elapsed: Duration) -> Outcome {
    let sum = p_g + p_star;
    outcome(
        (sum - 1.0).abs() <= 0.02 && p_g > 0.5 && within(elapsed, 10),
        format!("p*(G) = {p_g:.4}, p*(G*) = {p_star:.4}, sum = {sum:.4}; {:.1} s", elapsed.as_secs_f64()),
    )
}

fn short_crossing_floor(pc: &[(GraphKind, f64)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(kind, p) in pc {
        for n in [8, 16, 32] {
            let e = estimate_crossing(CrossingSpec::occupied(Direction::Horizontal, kind), n, 2 * n, p, SAMPLES, 41).unwrap();
            ok &= e.ci_lo > 1.0 / 25.0;
            parts.push(format!("{kind} n={n}: [{:.3}, {:.3}]", e.ci_lo, e.ci_hi));
        }
    }
    outcome(ok, parts.join("; "))
}

fn long_crossing_nondegenerate(pc: &[(GraphKind, f64)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(kind, p) in pc {
        for n in [16, 32, 64] {
            let e = estimate_crossing(CrossingSpec::occupied(Direction::Vertical, kind), n, 2 * n, p, SAMPLES, 51).unwrap();
            ok &= e.ci_lo >= 0.01 && e.ci_hi <= 0.99;
            parts.push(format!("{kind} n={n}: [{:.3}, {:.3}]", e.ci_lo, e.ci_hi));
        }
    }
    outcome(ok, parts.join("; "))
}

fn decomposition() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in GraphKind::BOTH {
        for p in [0.3, 0.45] {
            for (n, seed) in [(1, 0), (8, 61)] {
                let r = decomposition_checks(kind, p, n, SAMPLES, seed).unwrap();
                ok &= r.all_hold();
                let worst = r
                    .margins
                    .iter()
                    .map(|m| if m.sigma > 0.0 { m.margin / m.sigma } else if m.margin >= -1e-12 { f64::INFINITY } else { f64::NEG_INFINITY })
                    .fold(f64::INFINITY, f64::min);
                let fails: Vec<&str> = r.margins.iter().filter(|m| !m.holds).map(|m| m.name.as_str()).collect();
                parts.push(format!(
                    "{kind} p={p} n={n}: {} (min margin/sigma {worst:.1}){}",
                    if n == 1 { "exact" } else { "sampled" },
                    if fails.is_empty() { String::new() } else { format!(" FAILS {fails:?}") }
                ));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn deterministic_steps() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in GraphKind::BOTH {
        for s in [
            five_rectangle_suite(kind, 1).unwrap(),
            four_rectangle_suite(kind, 1).unwrap(),
            extension_suite(kind, 2, 2).unwrap(),
        ] {
            ok &= s.verdict.holds();
            parts.push(format!(
                "{} {kind} on {} sites: {}",
                s.name,
                s.rect.site_count(),
                if s.verdict.holds() { "holds" } else { "COUNTEREXAMPLE" }
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn extension_bound(pc: &[(GraphKind, f64)]) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for &(kind, p) in pc {
        let r = kesten_bound_check(kind, p, 48, 48, SAMPLES, 81, false).unwrap();
        ok &= r.all_hold() && r.margins.len() == 3 && r.flags.is_empty();
        let q = |name: &str| r.quantity(name).map_or(f64::NAN, |q| q.estimate);
        parts.push(format!(
            "{kind}: lhs {:.3} >= rhs {:.4}, E- {:.3}, E+ {:.3} >= {:.3}{}",
            q("lhs"),
            q("rhs"),
            q("e_minus"),
            q("e_plus"),
            q("extension_floor"),
            if r.all_hold() { "" } else { " FAILS" }
        ));
    }
    let elapsed = start.elapsed();
    ok &= within(elapsed, 15);
    parts.push(format!("{:.1} s", elapsed.as_secs_f64()));
    outcome(ok, parts.join("; "))
}

fn closed_forms() -> Outcome {
    let eps_exact = epsilon(0.75) == 1.0 / 3.0;
    let identity = (1..=9).map(|k| k as f64 / 10.0).all(|d| ((1.0 - epsilon(d)) * d - (1.0 - (1.0 - d).sqrt())).abs() <= 1e-12);
    let d3 = kesten_constants(0.75, 0.75, 3, 1, 1.0).unwrap().delta3;
    let d3_ok = (d3 - (1.0 - 0.25f64.powf(1.0 / 3.0))).abs() <= 1e-12;
    outcome(
        eps_exact && identity && d3_ok,
        format!("epsilon(3/4) exact: {eps_exact}; identity: {identity}; delta3(0.75, 3) = {d3:.12}"),
    )
}

fn annulus(p_g: f64) -> Outcome {
    let a = Annulus::new(Site::ORIGIN, 8, 24).unwrap();
    let e = annulus_circuit_estimate(GraphKind::GStar, Occupancy::Vacant, p_g, &a, SAMPLES, 101).unwrap();
    outcome(
        e.margin.holds,
        format!(
            "circuit {:.4} vs band {:.4}^4 = {:.4}, margin {:.4} (sigma {:.4})",
            e.circuit.p_hat, e.band.p_hat, e.band_fourth, e.margin.margin, e.margin.sigma
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    let runs: [&[&str]; 6] = [
        &["--experiment", "cross-prob", "--w", "20", "--h", "30", "--p-grid", "0.4:0.7:0.05", "--samples", "2000"],
        &["--experiment", "kesten-check", "--l1", "16", "--l2", "16", "--relaxed", "--p", "0.593", "--samples", "500"],
        &["--experiment", "decomposition", "--n", "2,4", "--p", "0.45", "--graph", "GStar", "--samples", "1000"],
        &["--experiment", "tau-decay", "--n", "2,4,6", "--p", "0.55", "--samples", "1000"],
        &["--experiment", "annulus", "--inner", "3", "--outer", "9", "--p", "0.6", "--samples", "1000"],
        &["--experiment", "pc-bisect", "--n", "16", "--samples", "300", "--tol", "0.01"],
    ];
    let mut identical = 0;
    let mut problems = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for workers in ["1", "4"] {
            let out = dir.path().join(format!("run{i}-w{workers}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_percmatch"))
                .args(*args)
                .args(["--seed", "2024", "--workers", workers, "--out"])
                .arg(&out)
                .status()
                .expect("binary runs");
            if !status.success() {
                problems.push(format!("{} exited {status}", args[1]));
            }
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        if !outputs[0].is_empty() && outputs[0] == outputs[1] {
            identical += 1;
        } else {
            problems.push(format!("{} differs", args[1]));
        }
    }
    outcome(
        identical == runs.len() && problems.is_empty(),
        format!("{identical}/{} experiments byte-identical at 1 and 4 workers {problems:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut timed = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let d = start.elapsed();
        println!("{} {id:>2} {name}: {} [{:.1} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, d.as_secs_f64());
        results.push((id, name, o, d));
    };

    timed(1, "duality exactness", &mut duality_exactness);
    timed(2, "oracle calibration", &mut calibration);

    let start = Instant::now();
    let p_g = pc_bisect(GraphKind::G, 64, SAMPLES, 31, 1e-3).unwrap();
    let p_star = pc_bisect(GraphKind::GStar, 64, SAMPLES, 32, 1e-3).unwrap();
    let bisect_time = start.elapsed();
    let pc = [(GraphKind::G, p_g), (GraphKind::GStar, p_star)];
    timed(3, "pseudo-critical sum rule", &mut || sum_rule(p_g, p_star, bisect_time));
    timed(4, "short crossing above 1/25", &mut || short_crossing_floor(&pc));
    timed(5, "long crossing nondegenerate", &mut || long_crossing_nondegenerate(&pc));
    timed(6, "decomposition inequalities", &mut decomposition);
    timed(7, "deterministic covering steps", &mut deterministic_steps);
    timed(8, "crossing extension bound", &mut || extension_bound(&pc));
    timed(9, "closed-form constants", &mut closed_forms);
    timed(10, "annulus circuit vs band", &mut || annulus(p_g));
    timed(11, "worker-count determinism", &mut determinism);

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
