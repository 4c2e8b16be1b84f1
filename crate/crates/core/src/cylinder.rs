//! Cylinders of the special direction.
//!
//! Cylinder `k` is the band of closed geodesics between its bottom chain and
//! that chain lifted by the skew width. Its identity is carried by the
//! y-axis strips `(y, y + skew)` for `y` in the bottom chain's hits.

use std::collections::{BTreeMap, BTreeSet};

use crate::chains::{bottom_chain, lift, unit_tail, BuildError, ChainLabel, SaddleChain};
use crate::closed_form;
use crate::exact::{Point, Rational};
use crate::flow::{next_event, special_slope, trace, Status, Trajectory, DEFAULT_MAX_EVENTS};
use crate::iet::CircleRotation;
use crate::surface::{EventKind, Tail};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cylinder {
    pub q: u32,
    pub k: u32,
    pub bottom: SaddleChain,
    pub top: SaddleChain,
    /// Vertical gap between corresponding hits of the top and bottom chains.
    pub skew_width: Rational,
    pub width_squared: Rational,
    /// Horizontal displacement of the waist curve.
    pub horizontal_displacement: Rational,
    pub circumference_squared: Rational,
    /// Circumference over width.
    pub modulus: Rational,
    pub area: Rational,
    /// Number of times the waist crosses each square.
    pub crossings: BTreeMap<usize, u64>,
    /// Closed geodesic halfway between the boundary chains.
    pub waist: Trajectory,
}

impl Cylinder {
    /// `y` lies strictly inside one of the cylinder's y-axis strips.
    pub fn section_contains(&self, y: &Rational) -> bool {
        strip_containing(&self.bottom.y_hits, &self.skew_width, y).is_some()
    }

    /// Membership of an interior point, decided by flowing it to the y-axis.
    pub fn contains_point(&self, p: &Point) -> bool {
        let tail = Tail::new(self.q).expect("cylinder q is valid");
        section_point(&tail, p).is_some_and(|y| self.section_contains(&y))
    }

    /// The y-axis strips `(y, y + skew)`, one per bottom hit.
    pub fn strips(&self) -> Vec<(Rational, Rational)> {
        self.bottom.y_hits.iter().map(|y| (y.clone(), y + &self.skew_width)).collect()
    }
}

fn strip_containing<'a>(hits: &'a BTreeSet<Rational>, width: &Rational, y: &Rational) -> Option<&'a Rational> {
    hits.range(..y).next_back().filter(|lo| y < &(*lo + width))
}

/// First point on the y-axis reached by the flow from `p`, or `p.y` when `p`
/// is already there. `None` if the flow meets a vertex first.
pub fn section_point(tail: &Tail, p: &Point) -> Option<Rational> {
    let slope = special_slope(tail);
    let mut cur = p.clone();
    for _ in 0..DEFAULT_MAX_EVENTS {
        if cur.x.is_zero() {
            return Some(cur.y);
        }
        let e = next_event(&cur, &slope, tail).ok()?;
        cur = match e.kind {
            EventKind::SingularVertex => return None,
            EventKind::InteriorPass(_) => e.at,
            _ => tail.identify(&e).ok()?,
        };
    }
    None
}

/// `(r x + 1, r y)`: carries `□_k` onto `□_{k+1}`.
pub fn push_forward(tail: &Tail, p: &Point) -> Point {
    Point::new(tail.r() * &p.x + Rational::one(), tail.r() * &p.y)
}

/// Strict membership in the strip of `□_1` between the special line through
/// the origin and its lift by `(1-r)/(2-r)`.
pub fn generation_zone_contains(tail: &Tail, p: &Point) -> bool {
    let m = special_slope(tail);
    let low = m.value() * &p.x;
    let gap = (Rational::one() - tail.r()) / (Rational::integer(2) - tail.r());
    !p.x.is_negative() && p.x <= Rational::one() && low < p.y && p.y < low + gap
}

/// Starting heights `(S_1, S_2)` of the two partial cylinders obtained by
/// pushing the bottom chain one square to the right, read off its hits.
pub fn partial_cylinder_starts(q: u32, bottom: &SaddleChain) -> (BTreeSet<Rational>, BTreeSet<Rational>) {
    let qr = Rational::integer(q as i64);
    let d = Rational::integer(2 * q as i64 - 1);
    let upper = &qr / &d;
    let lower = (&qr - Rational::one()) / &d;
    let s1 = bottom.y_hits.iter().filter(|y| **y < upper).map(|y| y / &qr).collect();
    let s2 = bottom.y_hits.iter().filter(|y| **y >= lower).map(|y| y / &qr).collect();
    (s1, s2)
}

/// How the circle rotation carries the partial cylinders starting at `S_1`
/// onto those starting at `S_2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FillIn {
    pub k: u32,
    /// Offset above each start at which the orbit is followed.
    pub offset: Rational,
    /// `(s1, s2, steps)`: the rotation orbit of `s1 + offset` first drops
    /// below `1/q` after `steps` steps, at `s2 + offset`.
    pub matches: Vec<(Rational, Rational, usize)>,
    /// Orbit points in `(1/q, 1)` passed on the way; new y-axis hits.
    pub intermediates: Vec<Rational>,
}

impl FillIn {
    /// The y-axis hits, shifted by `offset`, that the next bottom chain must have.
    pub fn predicted_next_hits(&self) -> BTreeSet<Rational> {
        self.matches.iter().map(|(s1, _, _)| s1 + &self.offset).chain(self.intermediates.iter().cloned()).collect()
    }
}

pub fn fill_in(q: u32, bottom: &SaddleChain) -> Result<FillIn, BuildError> {
    let ChainLabel::Bottom(k) = bottom.label else {
        return Err(BuildError::BadParameters(format!("fill-in needs a bottom chain, got {}", bottom.label)));
    };
    let rotation = CircleRotation::new(q).map_err(|e| BuildError::BadParameters(e.to_string()))?;
    let (s1, s2) = partial_cylinder_starts(q, bottom);
    let qr = Rational::integer(q as i64);
    let portal_low = qr.recip();
    let offset = closed_form::skew_width(q, k) / (Rational::integer(2) * &qr);
    let mut matches = Vec::new();
    let mut intermediates = Vec::new();
    let mut reached = BTreeSet::new();
    for s in &s1 {
        let mut u = s + &offset;
        let mut steps = 0;
        loop {
            u = rotation.rotate(&u);
            steps += 1;
            if u < portal_low {
                break;
            }
            if u == portal_low || steps > 2 * q as usize {
                return Err(BuildError::FillInFailed { k, point: s.clone() });
            }
            intermediates.push(u.clone());
        }
        let landing = &u - &offset;
        if !s2.contains(&landing) || !reached.insert(landing.clone()) {
            return Err(BuildError::FillInFailed { k, point: s.clone() });
        }
        matches.push((s.clone(), landing, steps));
    }
    if reached != s2 {
        let missing = s2.difference(&reached).next().cloned().unwrap_or_else(Rational::zero);
        return Err(BuildError::FillInFailed { k, point: missing });
    }
    Ok(FillIn { k, offset, matches, intermediates })
}

/// Builds bottom chain `k` and checks the fill-in.
pub fn fill_in_holds(q: u32, k: u32) -> bool {
    bottom_chain(q, k).and_then(|b| fill_in(q, &b)).is_ok()
}

/// Vertex heights on the y-axis in the open interval `(lo, hi)`.
fn vertex_heights_between(tail: &Tail, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let mut k = 1;
    loop {
        let side = tail.side(k);
        if side <= *lo {
            return None;
        }
        if side < *hi {
            return Some(side);
        }
        k += 1;
    }
}

/// Cylinder `k` from its bottom chain.
pub fn cylinder_from_bottom(q: u32, bottom: &SaddleChain) -> Result<Cylinder, BuildError> {
    let ChainLabel::Bottom(k) = bottom.label else {
        return Err(BuildError::BadParameters(format!("{} is not a bottom chain", bottom.label)));
    };
    let tail = unit_tail(q)?;
    let top = lift(q, bottom)?;

    let skews: BTreeSet<Rational> = bottom.y_hits.iter().zip(&top.y_hits).map(|(b, t)| t - b).collect();
    let skew_width = match (skews.len(), skews.first()) {
        (1, Some(s)) if s.is_positive() => s.clone(),
        _ => return Err(BuildError::FusionFailed { k: k + 1, reason: "lift is not a uniform vertical shift".into() }),
    };
    for y in &bottom.y_hits {
        if let Some(v) = vertex_heights_between(&tail, y, &(y + &skew_width)) {
            return Err(BuildError::SingularInsideInterval { k, y: v });
        }
    }
    fill_in(q, bottom)?;

    let half = &skew_width / Rational::integer(2);
    let lowest = bottom.y_hits.first().expect("bottom chains meet the y-axis");
    let slope = special_slope(&tail);
    let waist = trace(&Point::new(Rational::zero(), lowest + &half), &slope, &tail, DEFAULT_MAX_EVENTS)?;
    let expected: BTreeSet<Rational> = bottom.y_hits.iter().map(|y| y + &half).collect();
    let visited: BTreeSet<Rational> = waist.section_hits().into_iter().collect();
    if waist.status != Status::Closed || visited != expected {
        return Err(BuildError::FoliationFailed { k });
    }

    let norm = slope.norm_squared_per_run();
    let d = waist.horizontal_displacement.clone();
    let crossings = crossing_counts(&tail, k, &waist)?;
    Ok(Cylinder {
        q,
        k,
        width_squared: &skew_width * &skew_width / &norm,
        circumference_squared: &d * &d * &norm,
        modulus: &d * &norm / &skew_width,
        area: &d * &skew_width,
        horizontal_displacement: d,
        skew_width,
        crossings,
        bottom: bottom.clone(),
        top,
        waist,
    })
}

/// Cylinder `k` on the tail `r = 1/q`.
pub fn build_cylinder(q: u32, k: u32) -> Result<Cylinder, BuildError> {
    cylinder_from_bottom(q, &bottom_chain(q, k)?)
}

/// Passes of the waist through each square: horizontal extent in `□_i` over `l_i`.
fn crossing_counts(tail: &Tail, k: u32, waist: &Trajectory) -> Result<BTreeMap<usize, u64>, BuildError> {
    let mut out = BTreeMap::new();
    for (square, dx) in waist.displacement_by_square(tail)? {
        let n = dx / tail.side(square);
        match n.to_i64().and_then(|n| u64::try_from(n).ok()) {
            Some(n) => {
                out.insert(square, n);
            }
            None => {
                return Err(BuildError::TableMismatch { k, square, expected: 0, found: n.to_string() });
            }
        }
    }
    Ok(out)
}

/// Compares measured crossings with the closed-form row.
pub fn check_crossing_table(cyl: &Cylinder) -> Result<(), BuildError> {
    let expected = closed_form::crossing_row(cyl.q, cyl.k);
    let squares: BTreeSet<usize> = expected.keys().chain(cyl.crossings.keys()).copied().collect();
    for square in squares {
        let e = expected.get(&square).copied().unwrap_or(0);
        let f = cyl.crossings.get(&square).copied().unwrap_or(0);
        if e != f {
            return Err(BuildError::TableMismatch { k: cyl.k, square, expected: e, found: f.to_string() });
        }
    }
    Ok(())
}

/// Traces the leaf at height `lowest hit + offset`; closed for every `0 < offset < skew`.
pub fn leaf_closes(cyl: &Cylinder, offset: &Rational) -> bool {
    let tail = Tail::new(cyl.q).expect("cylinder q is valid");
    let lowest = cyl.bottom.y_hits.first().expect("non-empty");
    let start = Point::new(Rational::zero(), lowest + offset);
    trace(&start, &special_slope(&tail), &tail, DEFAULT_MAX_EVENTS)
        .is_ok_and(|t| t.status == Status::Closed && t.horizontal_displacement == cyl.horizontal_displacement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn push_forward_examples() {
        let t2 = Tail::new(2).unwrap();
        assert_eq!(push_forward(&t2, &Point::origin()), Point::new(rat(1, 1), rat(0, 1)));
        assert_eq!(push_forward(&t2, &Point::new(rat(1, 1), rat(1, 1))), Point::new(rat(3, 2), rat(1, 2)));
        let t3 = Tail::new(3).unwrap();
        assert_eq!(push_forward(&t3, &Point::new(rat(1, 2), rat(1, 3))), Point::new(rat(7, 6), rat(1, 9)));
    }

    #[test]
    fn generation_zone_examples() {
        let t = Tail::new(2).unwrap();
        assert!(generation_zone_contains(&t, &Point::new(rat(0, 1), rat(1, 6))));
        assert!(!generation_zone_contains(&t, &Point::origin()));
        assert!(!generation_zone_contains(&t, &Point::new(rat(1, 1), rat(2, 3))));
    }

    #[test]
    fn first_cylinder_q2() {
        let c = build_cylinder(2, 1).unwrap();
        assert_eq!(c.skew_width, rat(1, 6));
        assert_eq!(c.horizontal_displacement, rat(3, 2));
        assert_eq!(c.area, rat(1, 4));
        assert_eq!(c.modulus, rat(13, 1));
        assert_eq!(c.crossings.clone().into_iter().collect::<Vec<_>>(), vec![(1, 1), (2, 1)]);
        check_crossing_table(&c).unwrap();
        assert!(leaf_closes(&c, &rat(1, 100)));
    }

    #[test]
    fn second_cylinder_q2() {
        let c = build_cylinder(2, 2).unwrap();
        assert_eq!(c.modulus, rat(65, 1));
        check_crossing_table(&c).unwrap();
    }

    #[test]
    fn fill_in_small() {
        assert!(fill_in_holds(2, 1));
        assert!(fill_in_holds(3, 2));
        assert!(fill_in_holds(5, 4));
        let f = fill_in(2, &bottom_chain(2, 1).unwrap()).unwrap();
        assert_eq!(f.matches.len(), 1);
        assert_eq!(f.matches[0].2, 3);
        assert_eq!(f.intermediates.len(), 2);
    }

    #[test]
    fn partial_starts_match_closed_form() {
        for q in 2..=4 {
            for k in 1..=4 {
                let b = bottom_chain(q, k).unwrap();
                assert_eq!(partial_cylinder_starts(q, &b), closed_form::partial_cylinder_starts(q, k));
            }
        }
    }

    #[test]
    fn membership() {
        let c = build_cylinder(2, 1).unwrap();
        assert!(c.section_contains(&rat(3, 8)));
        assert!(!c.section_contains(&rat(1, 3)));
        assert!(!c.section_contains(&rat(1, 2)));
        assert!(c.contains_point(&Point::new(rat(1, 12), rat(3, 8) + rat(1, 18))));
    }
}
