//! An independent tracer checks the engine. It knows nothing about squares:
//! the tail, cut off after `N` squares, is a plain list of axis-parallel
//! boundary edges with a pairing table, and each step takes the nearest edge
//! crossing of the ray.

use std::collections::BTreeSet;

use armadillo_core::chains::{bottom_chain, first_bottom, first_top, spine};
use armadillo_core::closed_form;
use armadillo_core::cylinder::build_cylinder;
use armadillo_core::decomposition::{decompose, orthogonal_obstruction};
use armadillo_core::flow::{special_slope, trace, Status, DEFAULT_MAX_EVENTS};
use armadillo_core::iet::{return_time, section_map};
use armadillo_core::verify::non_unit_fraction_control;
use armadillo_core::{rat, Point, Rational, Tail};

const SQUARES: usize = 40;

#[derive(Clone, Copy, PartialEq, Debug)]
enum Glue {
    /// Roof of a square: reappears on the floor directly below.
    ToFloor,
    /// Exposed right side: reappears on the y-axis at the same height.
    ToAxis,
    /// Floor, axis and the cut: a rightward ray with positive slope never exits here.
    None,
}

struct Edge {
    a: Point,
    b: Point,
    glue: Glue,
}

#[derive(Debug, PartialEq)]
enum End {
    Vertex(Point),
    Closed,
    Budget,
}

struct Oracle {
    edges: Vec<Edge>,
    vertices: BTreeSet<Point>,
}

impl Oracle {
    fn new(r: &Rational) -> Self {
        let mut edges = Vec::new();
        let mut left = Rational::zero();
        let mut side = Rational::one();
        for _ in 0..SQUARES {
            let right = &left + &side;
            let next = &side * r;
            let roof = Edge {
                a: Point::new(left.clone(), side.clone()),
                b: Point::new(right.clone(), side.clone()),
                glue: Glue::ToFloor,
            };
            let floor = Edge {
                a: Point::new(left.clone(), Rational::zero()),
                b: Point::new(right.clone(), Rational::zero()),
                glue: Glue::None,
            };
            let wall = Edge {
                a: Point::new(right.clone(), next.clone()),
                b: Point::new(right.clone(), side.clone()),
                glue: Glue::ToAxis,
            };
            let axis = Edge {
                a: Point::new(Rational::zero(), next.clone()),
                b: Point::new(Rational::zero(), side.clone()),
                glue: Glue::None,
            };
            edges.extend([roof, floor, wall, axis]);
            left = right;
            side = next;
        }
        edges.push(Edge { a: Point::new(left.clone(), Rational::zero()), b: Point::new(left, side), glue: Glue::None });
        let vertices = edges.iter().flat_map(|e| [e.a.clone(), e.b.clone()]).collect();
        Oracle { edges, vertices }
    }

    /// Nearest crossing with parameter `t > 0` along direction `(1, m)`.
    fn hit(&self, p: &Point, m: &Rational) -> (Point, Glue) {
        let mut best: Option<(Rational, Point, Glue)> = None;
        for e in &self.edges {
            let (t, at) = if e.a.x == e.b.x {
                let t = &e.a.x - &p.x;
                let y = &p.y + &(&t * m);
                if y < e.a.y || y > e.b.y {
                    continue;
                }
                (t, Point::new(e.a.x.clone(), y))
            } else {
                let t = (&e.a.y - &p.y) / m.clone();
                let x = &p.x + &t;
                if x < e.a.x || x > e.b.x {
                    continue;
                }
                (t, Point::new(x, e.a.y.clone()))
            };
            if t.is_positive() && best.as_ref().is_none_or(|(bt, _, _)| t < *bt) {
                best = Some((t, at, e.glue));
            }
        }
        let (_, at, glue) = best.expect("every ray meets the boundary");
        (at, glue)
    }

    /// Heights where the path leaves the y-axis, and how it ended.
    fn run(&self, start: &Point, m: &Rational, budget: usize) -> (Vec<Rational>, End) {
        let mut p = start.clone();
        let mut hits = Vec::new();
        if p.x.is_zero() {
            hits.push(p.y.clone());
        }
        for _ in 0..budget {
            let (at, glue) = self.hit(&p, m);
            if self.vertices.contains(&at) {
                return (hits, End::Vertex(at));
            }
            let passes_start = p.x < start.x && start.x < at.x && &p.y + &(&(&start.x - &p.x) * m) == start.y;
            if passes_start {
                return (hits, End::Closed);
            }
            p = match glue {
                Glue::ToFloor => Point::new(at.x, Rational::zero()),
                Glue::ToAxis => Point::new(Rational::zero(), at.y),
                Glue::None => panic!("ray left through an unglued edge at {at}"),
            };
            if p == *start {
                return (hits, End::Closed);
            }
            if p.x.is_zero() {
                hits.push(p.y.clone());
            }
        }
        (hits, End::Budget)
    }
}

fn special(r: &Rational) -> Rational {
    (Rational::integer(2) - r).recip()
}

fn engine(r: &Rational, start: &Point) -> (Vec<Rational>, End) {
    let tail = Tail::with_ratio(r.clone()).unwrap();
    let t = trace(start, &special_slope(&tail), &tail, DEFAULT_MAX_EVENTS).unwrap();
    let hits = t.section_hits();
    let end = match t.status {
        Status::SingularHit(p) => End::Vertex(p),
        Status::Closed => End::Closed,
        Status::BudgetExhausted => End::Budget,
    };
    (hits, end)
}

#[test]
fn first_bottom_connection_matches_oracle() {
    for q in 2..=6u32 {
        let r = rat(1, q as i64);
        let start = Point::new(Rational::one(), Rational::zero());
        let (hits, end) = Oracle::new(&r).run(&start, &special(&r), 1000);
        assert_eq!(end, End::Vertex(Point::new(Rational::one(), Rational::one())), "q={q}");
        assert_eq!(hits.len(), 2 * q as usize - 3);
        let set: BTreeSet<Rational> = hits.into_iter().collect();
        assert_eq!(set, closed_form::first_bottom_hits(q));
        assert_eq!(first_bottom(q).unwrap().y_hits, set);
    }
}

#[test]
fn engine_agrees_with_oracle_on_axis_starts() {
    for q in 2..=5u32 {
        let r = rat(1, q as i64);
        let oracle = Oracle::new(&r);
        for a in [1, 5, 11, 17, 23, 29] {
            let start = Point::new(Rational::zero(), rat(a, 31));
            assert_eq!(engine(&r, &start), oracle.run(&start, &special(&r), DEFAULT_MAX_EVENTS), "q={q}, y={a}/31");
        }
    }
}

#[test]
fn top_connection_and_chain_hits_match_oracle() {
    for q in 2..=4u32 {
        let r = rat(1, q as i64);
        let oracle = Oracle::new(&r);
        let top = first_top(q).unwrap();
        let launch = top.pieces[0].start.clone();
        let (hits, end) = oracle.run(&launch, &special(&r), 1000);
        assert_eq!(end, End::Vertex(Point::new(rat(q as i64 + 1, q as i64), r.clone())));
        assert_eq!(hits.into_iter().collect::<BTreeSet<_>>(), top.y_hits);
        for k in 2..=5 {
            let chain = bottom_chain(q, k).unwrap();
            let mut from_oracle = BTreeSet::new();
            for piece in &chain.pieces {
                let (hits, end) = oracle.run(&piece.start, &special(&r), 5000);
                assert_eq!(Some(&end), piece.singular_end().cloned().map(End::Vertex).as_ref());
                from_oracle.extend(hits);
            }
            assert_eq!(from_oracle, closed_form::bottom_chain_hits(q, k), "q={q}, k={k}");
        }
    }
}

#[test]
fn non_unit_ratio_misses_the_corner() {
    let r = rat(2, 3);
    let start = Point::new(Rational::one(), Rational::zero());
    let (_, end) = Oracle::new(&r).run(&start, &special(&r), 1000);
    assert_eq!(end, End::Vertex(Point::new(rat(5, 3), rat(2, 3))));
    let t = non_unit_fraction_control().unwrap();
    assert_eq!(t.status, Status::SingularHit(Point::new(rat(5, 3), rat(2, 3))));
}

#[test]
fn waist_closes_under_oracle() {
    for (q, k) in [(2, 1), (2, 3), (3, 2)] {
        let c = build_cylinder(q, k).unwrap();
        let r = rat(1, q as i64);
        let (_, end) = Oracle::new(&r).run(&c.waist.start, &special(&r), 5000);
        assert_eq!(end, End::Closed, "q={q}, k={k}");
    }
}

// Values below were computed once from the closed forms by hand and are
// frozen so that a change in either the tracer or the formulas shows up.

#[test]
fn frozen_cylinder_values_q2() {
    let d = decompose(2, 4).unwrap();
    let moduli: Vec<Rational> = d.moduli();
    assert_eq!(moduli, [rat(13, 1), rat(65, 1), rat(221, 1), rat(637, 1)]);
    let skew: Vec<Rational> = d.cylinders.iter().map(|c| c.skew_width.clone()).collect();
    assert_eq!(skew, [rat(1, 6), rat(1, 12), rat(1, 24), rat(1, 48)]);
    let area: Vec<Rational> = d.cylinders.iter().map(|c| c.area.clone()).collect();
    assert_eq!(area, [rat(1, 4), rat(5, 16), rat(17, 64), rat(49, 256)]);
    let disp: Vec<Rational> = d.cylinders.iter().map(|c| c.horizontal_displacement.clone()).collect();
    assert_eq!(disp, [rat(3, 2), rat(15, 4), rat(51, 8), rat(147, 16)]);
}

#[test]
fn frozen_cylinder_values_q3() {
    let c = build_cylinder(3, 2).unwrap();
    assert_eq!(c.skew_width, rat(2, 45));
    assert_eq!(c.horizontal_displacement, rat(70, 9));
    assert_eq!(c.modulus, rat(238, 1));
}

#[test]
fn frozen_spine_and_obstruction() {
    let s = spine(&Tail::new(2).unwrap(), 12).unwrap();
    assert_eq!(s.horizontal_displacement, rat(3, 1));
    assert_eq!(s.length_squared(), rat(13, 1));
    assert_eq!(closed_form::spine_length_squared(&rat(4, 5)), rat(61, 1));
    // The first bottom connection runs 1/2 across the second square, then 1 across the first.
    let o = orthogonal_obstruction(2).unwrap();
    assert_eq!((o.spine_length_squared, o.bottom_length_squared), (rat(13, 1), rat(13, 4)));
}

#[test]
fn frozen_section_map_values() {
    let map = section_map(2, 3).unwrap();
    assert_eq!(map.apply(&rat(7, 12)), Ok(rat(1, 4)));
    assert_eq!(map.apply(&rat(1, 3)), Ok(Rational::zero()));
    assert_eq!(map.apply(&rat(0, 1)), Ok(rat(2, 3)));
    assert_eq!(return_time(3, 5), 11);
    assert_eq!(return_time(2, 3), 1);
}
