//! The invariant suite behind `verify`: every construction is rebuilt by
//! tracing and compared with its closed form.

use std::ops::RangeInclusive;

use crate::chains::{first_bottom, first_top, spine, BuildError};
use crate::closed_form;
use crate::cylinder::{generation_zone_contains, leaf_closes, push_forward, Cylinder};
use crate::decomposition::{
    axis_decompositions, axis_relations_hold, decompose, orthogonal_obstruction, Decomposition,
};
use crate::exact::{Point, Rational};
use crate::flow::{section_first_return, special_slope, trace, Status, Trajectory, DEFAULT_MAX_EVENTS};
use crate::iet::{base_ladder_holds, ladder_holds, return_time, section_map, IetError};
use crate::report::Check;
use crate::surface::Tail;

/// Prime denominator for section samples; no orbit through a vertex has it.
const SAMPLE_DENOMINATOR: i64 = 999_983;

/// Deterministic sample points in the domain of the section map, avoiding the gap.
pub fn section_samples(q: u32, k: u32, count: usize) -> Result<Vec<Rational>, IetError> {
    let map = section_map(q, k)?;
    let mut out = Vec::with_capacity(count);
    let mut j: i64 = 0;
    while out.len() < count {
        j += 1;
        let x = Rational::new((j * 611_953) % SAMPLE_DENOMINATOR, SAMPLE_DENOMINATOR);
        if x.is_zero() || map.domain_gap.contains(&x) {
            continue;
        }
        out.push(x);
    }
    Ok(out)
}

/// A sample where the section map and the flow disagree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SectionMismatch {
    pub x: Rational,
    pub map: Option<Rational>,
    pub flow: Option<Rational>,
}

/// Compares the section map with the traced first return on `count` samples.
pub fn section_consistency(q: u32, k: u32, count: usize) -> Result<usize, SectionMismatch> {
    let map = section_map(q, k).map_err(|_| SectionMismatch { x: Rational::zero(), map: None, flow: None })?;
    let tail = Tail::new(q).expect("q >= 2");
    let slope = special_slope(&tail);
    let samples = section_samples(q, k, count).expect("map built");
    for x in &samples {
        let by_map = map.apply(x).ok();
        let by_flow = section_first_return(x, &slope, &tail).ok().flatten();
        if by_map.is_none() || by_map != by_flow {
            return Err(SectionMismatch { x: x.clone(), map: by_map, flow: by_flow });
        }
    }
    Ok(samples.len())
}

/// Pushes interior points of cylinder `k` outside the generation zone one
/// square to the right and checks they land in cylinder `k + 1`. Returns the
/// number of points checked, or the first failure.
pub fn pushforward_holds(current: &Cylinder, next: &Cylinder) -> Result<usize, Point> {
    let tail = Tail::new(current.q).expect("q >= 2");
    let mut checked = 0;
    for (num, den) in [(1, 4), (1, 2), (3, 4)] {
        let offset = &current.skew_width * &Rational::new(num, den);
        let lowest = current.bottom.y_hits.first().expect("non-empty");
        let start = Point::new(Rational::zero(), lowest + &offset);
        let leaf = trace(&start, &special_slope(&tail), &tail, DEFAULT_MAX_EVENTS).map_err(|_| start.clone())?;
        for seg in &leaf.segments {
            let mid = Point::new(
                (&seg.from.x + &seg.to.x) / Rational::integer(2),
                (&seg.from.y + &seg.to.y) / Rational::integer(2),
            );
            if generation_zone_contains(&tail, &mid) {
                continue;
            }
            if !next.contains_point(&push_forward(&tail, &mid)) {
                return Err(mid);
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// The special flow on the tail `r = 2/3` from `(1, 0)`.
pub fn non_unit_fraction_control() -> Result<Trajectory, BuildError> {
    let tail = Tail::with_ratio(Rational::new(2, 3))?;
    Ok(trace(&Point::new(Rational::one(), Rational::zero()), &special_slope(&tail), &tail, DEFAULT_MAX_EVENTS)?)
}

fn list(values: &[Rational]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn first_chain_checks(q: u32, out: &mut Vec<Check>) {
    match first_bottom(q) {
        Ok(b) => {
            let expected = closed_form::first_bottom_hits(q);
            let entries = b.pieces[0].first_square_entries();
            let end = Point::new(Rational::one(), Rational::one());
            let ok = b.y_hits == expected && entries == 2 * q as usize - 3 && b.end_point() == Some(&end);
            let hits: Vec<Rational> = b.y_hits.iter().cloned().collect();
            out.push(Check::new(
                format!("q={q} bottom connection 1"),
                ok,
                format!(
                    "ends at {}, wraps {entries} times, hits {{{}}}",
                    b.end_point().map_or("-".into(), |p| p.to_string()),
                    list(&hits)
                ),
            ));
        }
        Err(e) => out.push(Check::new(format!("q={q} bottom connection 1"), false, e.to_string())),
    }
    match first_top(q) {
        Ok(t) => out.push(Check::new(
            format!("q={q} top connection 1"),
            true,
            format!("ends at {}", t.end_point().map_or("-".into(), |p| p.to_string())),
        )),
        Err(e) => out.push(Check::new(format!("q={q} top connection 1"), false, e.to_string())),
    }
}

fn cylinder_checks(q: u32, d: &Decomposition, out: &mut Vec<Check>) {
    for c in &d.cylinders {
        let k = c.k;
        if k >= 2 {
            let ok = c.bottom.pieces.len() == 2 && c.bottom.y_hits == closed_form::bottom_chain_hits(q, k);
            out.push(Check::new(
                format!("q={q} k={k} bottom chain"),
                ok,
                format!("{} pieces, {} hits", c.bottom.pieces.len(), c.bottom.y_hits.len()),
            ));
        }
        let offsets: Vec<Rational> = (1..=5).map(|j| &c.skew_width * &Rational::new(j, 6)).collect();
        let leaves = offsets.iter().all(|e| leaf_closes(c, e));
        let ok = c.skew_width == closed_form::skew_width(q, k)
            && c.horizontal_displacement == closed_form::waist_displacement(q, k)
            && c.modulus == closed_form::modulus(q, k)
            && c.area == closed_form::area(q, k)
            && c.crossings == closed_form::crossing_row(q, k)
            && &c.width_squared * &closed_form::direction_norm_squared(q) == &c.skew_width * &c.skew_width
            && leaves;
        out.push(Check::new(
            format!("q={q} k={k} cylinder"),
            ok,
            format!(
                "skew {}, displacement {}, modulus {}, area {}, 5 leaves closed: {leaves}",
                c.skew_width, c.horizontal_displacement, c.modulus, c.area
            ),
        ));
    }
    let sums = d.convergence();
    let qr = Rational::integer(q as i64);
    let area_target = &qr * &qr / (&qr * &qr - Rational::one());
    let big_k = sums.cylinders;
    out.push(Check::new(
        format!("q={q} skew-width sum in square 1"),
        sums.first_square_total() == Rational::one(),
        format!(
            "partial {} + tail {} = {} (K={big_k})",
            sums.first_square_partial,
            sums.first_square_tail,
            sums.first_square_total()
        ),
    ));
    out.push(Check::new(
        format!("q={q} skew-width sum in square 2"),
        sums.second_square_total() == qr.recip(),
        format!(
            "partial {} + tail {} = {} (K={big_k})",
            sums.second_square_partial,
            sums.second_square_tail,
            sums.second_square_total()
        ),
    ));
    out.push(Check::new(
        format!("q={q} area sum"),
        sums.area_total() == area_target && area_target == Tail::new(q).expect("q >= 2").area(),
        format!("partial {} + tail {} = {} (K={big_k})", sums.area_partial, sums.area_tail, sums.area_total()),
    ));
    out.push(Check::new(format!("q={q} skew suffixes telescope"), sums.suffixes_telescope, format!("K={big_k}")));
    if d.cylinders.len() >= 3 {
        let v = d.no_parabolic();
        out.push(Check::new(format!("q={q} no parabolic"), v.holds, format!("moduli {}", list(&v.moduli))));
    }
    for w in d.cylinders.windows(2) {
        match pushforward_holds(&w[0], &w[1]) {
            Ok(n) => out.push(Check::new(format!("q={q} k={} pushforward", w[0].k), true, format!("{n} points"))),
            Err(p) => out.push(Check::new(format!("q={q} k={} pushforward", w[0].k), false, format!("{p} escapes"))),
        }
    }
}

/// All checks for one `q`, in a fixed order.
pub fn checks_for_q(q: u32, k_max: u32) -> Vec<Check> {
    let mut out = Vec::new();
    first_chain_checks(q, &mut out);
    match decompose(q, k_max) {
        Ok(d) => cylinder_checks(q, &d, &mut out),
        Err(e) => out.push(Check::new(format!("q={q} decomposition"), false, e.to_string())),
    }
    out.push(Check::new(format!("q={q} base ladder"), base_ladder_holds(q), "k=3"));
    for k in 3..=k_max {
        out.push(Check::new(
            format!("q={q} k={k} ladder"),
            ladder_holds(q, k),
            format!("return time {}", return_time(q, k)),
        ));
    }
    for k in 3..=k_max.min(5) {
        let name = format!("q={q} k={k} section map matches flow");
        match section_consistency(q, k, 200) {
            Ok(n) => out.push(Check::new(name, true, format!("{n} samples"))),
            Err(m) => out.push(Check::new(name, false, format!("x={} map={:?} flow={:?}", m.x, m.map, m.flow))),
        }
    }
    match orthogonal_obstruction(q) {
        Ok(r) => out.push(Check::new(
            format!("q={q} spine against bottom connection"),
            r.spine_length_squared == closed_form::spine_length_squared(&Rational::new(1, q as i64)),
            format!("{}: {} vs {}", r.comparison, r.spine_length_squared, r.bottom_length_squared),
        )),
        Err(e) => out.push(Check::new(format!("q={q} spine against bottom connection"), false, e.to_string())),
    }
    out
}

fn global_checks(qs: &RangeInclusive<u32>) -> Vec<Check> {
    let mut out = Vec::new();
    for q in qs.clone() {
        let tail = Tail::new(q).expect("q >= 2");
        let (h, v) = axis_decompositions(&tail, 8);
        out.push(Check::new(
            format!("q={q} axis decompositions"),
            axis_relations_hold(&h, &v) && h.no_parabolic().holds && !v.no_parabolic().holds,
            format!("vertical moduli {}", list(&v.moduli())),
        ));
    }
    for r in [Rational::new(2, 3), Rational::new(4, 5)] {
        let name = format!("r={r} spine");
        match Tail::with_ratio(r.clone()).map_err(BuildError::from).and_then(|t| spine(&t, 12)) {
            Ok(s) => out.push(Check::new(
                name,
                s.horizontal_displacement == closed_form::spine_displacement(&r),
                format!("roof ratio {}, displacement {}", s.roof_ratio, s.horizontal_displacement),
            )),
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
    match non_unit_fraction_control() {
        Ok(t) => {
            let bsc_end = Point::new(Rational::one(), Rational::one());
            let ok = matches!(&t.status, Status::SingularHit(p) if *p != bsc_end);
            out.push(Check::new(
                "r=2/3 flow from (1,0) misses (1,1)",
                ok,
                format!("{} at {}", t.status.name(), t.end_point()),
            ));
        }
        Err(e) => out.push(Check::new("r=2/3 flow from (1,0) misses (1,1)", false, e.to_string())),
    }
    out
}

/// The full suite over `qs` and cylinders `1..=k_max`. With `parallel`, each
/// `q` runs on its own thread; output order does not change.
pub fn suite(qs: RangeInclusive<u32>, k_max: u32, parallel: bool) -> Vec<Check> {
    let per_q: Vec<Vec<Check>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = qs.clone().map(|q| s.spawn(move || checks_for_q(q, k_max))).collect();
            handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
        })
    } else {
        qs.clone().map(|q| checks_for_q(q, k_max)).collect()
    };
    let mut out: Vec<Check> = per_q.into_iter().flatten().collect();
    out.extend(global_checks(&qs));
    out
}
