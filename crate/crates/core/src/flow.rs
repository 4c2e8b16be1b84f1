//! Exact linear flow in a positive direction.
//!
//! A ray is stepped square by square: it leaves `□_k` through the roof, the
//! portal, the shared lower part of the right edge, or a vertex. Roof, portal
//! and seam crossings are followed by the gluing; interior passes continue in
//! place. Tracing stops at a vertex, on exact return to the start, or when the
//! event budget runs out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{length_squared, Point, Rational, Slope};
use crate::surface::{BoundaryEvent, EventKind, SurfaceError, Tail};

pub const DEFAULT_MAX_EVENTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("a ray from {0} does not enter the open polygon")]
    NotEntering(Box<Point>),
    #[error("{0} is not a vertex")]
    NotSingular(Box<Point>),
}

/// The direction `1/(2 - r)` in which the tail has its rigid spine.
pub fn special_slope(tail: &Tail) -> Slope {
    let two = Rational::integer(2);
    Slope::from_value((two - tail.r()).recip()).expect("1/(2-r) is positive for r in (0,1)")
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

impl Segment {
    pub fn dx(&self) -> Rational {
        &self.to.x - &self.from.x
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Status {
    SingularHit(Point),
    Closed,
    BudgetExhausted,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::SingularHit(_) => "SingularHit",
            Status::Closed => "Closed",
            Status::BudgetExhausted => "BudgetExhausted",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trajectory {
    pub start: Point,
    pub slope: Slope,
    pub segments: Vec<Segment>,
    pub events: Vec<BoundaryEvent>,
    pub status: Status,
    pub horizontal_displacement: Rational,
}

impl Trajectory {
    /// Heights at which the path leaves the y-axis, in flow order.
    pub fn section_hits(&self) -> Vec<Rational> {
        self.segments.iter().filter(|s| s.from.x.is_zero()).map(|s| s.from.y.clone()).collect()
    }

    pub fn end_point(&self) -> &Point {
        self.segments.last().map_or(&self.start, |s| &s.to)
    }

    pub fn singular_end(&self) -> Option<&Point> {
        match &self.status {
            Status::SingularHit(p) => Some(p),
            _ => None,
        }
    }

    pub fn vertical_displacement(&self) -> Rational {
        &self.horizontal_displacement * self.slope.value()
    }

    pub fn length_squared(&self) -> Rational {
        length_squared(&self.horizontal_displacement, &self.vertical_displacement())
    }

    /// Horizontal extent travelled inside each square.
    pub fn displacement_by_square(&self, tail: &Tail) -> Result<BTreeMap<usize, Rational>, FlowError> {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        for seg in &self.segments {
            let k = tail.square_index(&seg.from.x)?;
            *out.entry(k).or_insert_with(Rational::zero) += &seg.dx();
        }
        Ok(out)
    }

    /// Number of times the path crosses the y-axis into `□_1`.
    pub fn first_square_entries(&self) -> usize {
        self.section_hits().len()
    }

    pub fn to_record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            start: self.start.clone(),
            slope: self.slope.clone(),
            status: self.status.name().to_string(),
            singular_point: self.singular_end().cloned(),
            segments: self.segments.iter().map(|s| (s.from.clone(), s.to.clone())).collect(),
            events: self.events.clone(),
            section_hits: self.section_hits(),
            horizontal_displacement: self.horizontal_displacement.clone(),
        }
    }
}

/// Wire form of a [`Trajectory`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub start: Point,
    pub slope: Slope,
    pub status: String,
    pub singular_point: Option<Point>,
    pub segments: Vec<(Point, Point)>,
    pub events: Vec<BoundaryEvent>,
    pub section_hits: Vec<Rational>,
    pub horizontal_displacement: Rational,
}

/// First boundary contact of the ray from `p`.
///
/// `p` may be a vertex as long as the ray enters the open polygon, which
/// requires `0 ≤ p.y < l_k` for the square `k` containing `p.x`.
pub fn next_event(p: &Point, slope: &Slope, tail: &Tail) -> Result<BoundaryEvent, FlowError> {
    let k = tail.square_index(&p.x)?;
    let side = tail.side(k);
    if p.y.is_negative() || p.y >= side {
        return Err(FlowError::NotEntering(Box::new(p.clone())));
    }
    let m = slope.value();
    let right = tail.offset(k);
    let x_roof = &p.x + &(&side - &p.y) / m;
    if x_roof < right {
        return Ok(BoundaryEvent { kind: EventKind::Roof(k), at: Point::new(x_roof, side) });
    }
    if x_roof == right {
        return Ok(BoundaryEvent { kind: EventKind::SingularVertex, at: Point::new(right, side) });
    }
    let y_edge = &p.y + m * &(&right - &p.x);
    let at = Point::new(right, y_edge);
    if tail.truncation() == Some(k) {
        return Ok(BoundaryEvent { kind: EventKind::Seam(k), at });
    }
    let next_side = tail.side(k + 1);
    let kind = match at.y.cmp(&next_side) {
        std::cmp::Ordering::Greater => EventKind::Portal(k),
        std::cmp::Ordering::Equal => EventKind::SingularVertex,
        std::cmp::Ordering::Less => EventKind::InteriorPass(k),
    };
    Ok(BoundaryEvent { kind, at })
}

/// Where the flow continues after `event`.
fn continue_after(event: &BoundaryEvent, tail: &Tail) -> Result<Point, FlowError> {
    match event.kind {
        EventKind::InteriorPass(_) => Ok(event.at.clone()),
        _ => Ok(tail.identify(event)?),
    }
}

/// `target` lies strictly inside the segment from `a` to `b`.
fn strictly_inside(a: &Point, b: &Point, target: &Point, m: &Rational) -> bool {
    a.x < target.x && target.x < b.x && &target.y - &a.y == m * &(&target.x - &a.x)
}

pub fn trace(start: &Point, slope: &Slope, tail: &Tail, max_events: usize) -> Result<Trajectory, FlowError> {
    let m = slope.value();
    let mut segments: Vec<Segment> = Vec::new();
    let mut events = Vec::new();
    let mut displacement = Rational::zero();
    let mut cur = start.clone();
    let mut status = Status::BudgetExhausted;
    while events.len() < max_events {
        let event = next_event(&cur, slope, tail)?;
        if !segments.is_empty() && strictly_inside(&cur, &event.at, start, m) {
            displacement += &(&start.x - &cur.x);
            segments.push(Segment { from: cur, to: start.clone() });
            status = Status::Closed;
            break;
        }
        displacement += &(&event.at.x - &cur.x);
        segments.push(Segment { from: cur, to: event.at.clone() });
        if event.kind == EventKind::SingularVertex {
            status = Status::SingularHit(event.at.clone());
            events.push(event);
            break;
        }
        cur = continue_after(&event, tail)?;
        events.push(event);
        if &cur == start {
            status = Status::Closed;
            break;
        }
    }
    Ok(Trajectory {
        start: start.clone(),
        slope: slope.clone(),
        segments,
        events,
        status,
        horizontal_displacement: displacement,
    })
}

/// Trace launched from a vertex; ends at a vertex unless the budget runs out.
pub fn saddle_connection(
    from_vertex: &Point,
    slope: &Slope,
    tail: &Tail,
    max_events: usize,
) -> Result<Trajectory, FlowError> {
    if !tail.is_singular(from_vertex) {
        return Err(FlowError::NotSingular(Box::new(from_vertex.clone())));
    }
    trace(from_vertex, slope, tail, max_events)
}

/// Rebuilds the segment list from a start point and an event log.
pub fn replay_segments(start: &Point, events: &[BoundaryEvent], tail: &Tail) -> Result<Vec<Segment>, FlowError> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        out.push(Segment { from: cur.clone(), to: e.at.clone() });
        if i + 1 < events.len() || e.kind != EventKind::SingularVertex {
            cur = continue_after(e, tail)?;
        }
    }
    Ok(out)
}

/// First return to the y-axis of the flow from `(0, y)`; `None` when the
/// flow hits a vertex first. A closed orbit with one crossing returns to `y`.
pub fn section_first_return(y: &Rational, slope: &Slope, tail: &Tail) -> Result<Option<Rational>, FlowError> {
    let start = Point::new(Rational::zero(), y.clone());
    let mut cur = start.clone();
    for _ in 0..DEFAULT_MAX_EVENTS {
        let event = next_event(&cur, slope, tail)?;
        if event.kind == EventKind::SingularVertex {
            return Ok(None);
        }
        cur = continue_after(&event, tail)?;
        if cur.x.is_zero() {
            return Ok(Some(cur.y));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn tail(q: u32) -> Tail {
        Tail::new(q).unwrap()
    }

    fn pt(x: Rational, y: Rational) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn next_event_examples() {
        let t = tail(2);
        let m = special_slope(&t);
        assert_eq!(m.value(), &rat(2, 3));
        let e = next_event(&pt(rat(1, 1), rat(0, 1)), &m, &t).unwrap();
        assert_eq!(e.kind, EventKind::Portal(2));
        assert_eq!(e.at, pt(rat(3, 2), rat(1, 3)));
        let e = next_event(&pt(rat(0, 1), rat(2, 3)), &m, &t).unwrap();
        assert_eq!(e.kind, EventKind::Roof(1));
        assert_eq!(e.at, pt(rat(1, 2), rat(1, 1)));
        let e = next_event(&pt(rat(0, 1), rat(1, 3)), &m, &t).unwrap();
        assert_eq!(e.kind, EventKind::SingularVertex);
        assert_eq!(e.at, pt(rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn rays_that_cannot_enter_are_rejected() {
        let t = tail(2);
        let m = special_slope(&t);
        assert!(matches!(next_event(&pt(rat(1, 1), rat(1, 2)), &m, &t), Err(FlowError::NotEntering(_))));
        assert!(matches!(next_event(&pt(rat(2, 1), rat(0, 1)), &m, &t), Err(FlowError::Surface(_))));
    }

    #[test]
    fn bottom_connection_q2() {
        let t = tail(2);
        let tr = trace(&pt(rat(1, 1), rat(0, 1)), &special_slope(&t), &t, DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(tr.status, Status::SingularHit(pt(rat(1, 1), rat(1, 1))));
        assert_eq!(tr.section_hits(), vec![rat(1, 3)]);
        assert_eq!(tr.events[0].kind, EventKind::Portal(2));
        assert_eq!(tr.first_square_entries(), 1);
    }

    #[test]
    fn bottom_connection_q3_order() {
        let t = tail(3);
        let tr = trace(&pt(rat(1, 1), rat(0, 1)), &special_slope(&t), &t, DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(tr.status, Status::SingularHit(pt(rat(1, 1), rat(1, 1))));
        assert_eq!(tr.section_hits(), vec![rat(1, 5), rat(4, 5), rat(2, 5)]);
    }

    #[test]
    fn midline_of_first_cylinder_closes() {
        let t = tail(2);
        let start = pt(Rational::zero(), rat(1, 3) + rat(1, 24));
        let tr = trace(&start, &special_slope(&t), &t, DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(tr.status, Status::Closed);
        assert_eq!(tr.horizontal_displacement, rat(3, 2));
        assert_eq!(t.identify(tr.events.last().unwrap()).unwrap(), start);
    }

    #[test]
    fn closure_strictly_inside_a_segment() {
        // Starting mid-square, the orbit comes back through its own start.
        let t = tail(2);
        let m = special_slope(&t);
        let start = pt(rat(1, 12), rat(1, 3) + rat(1, 24) + rat(1, 18));
        let tr = trace(&start, &m, &t, DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(tr.status, Status::Closed);
        assert_eq!(tr.horizontal_displacement, rat(3, 2));
    }

    #[test]
    fn spine_roofs() {
        let t = tail(2);
        let tr = trace(&Point::origin(), &special_slope(&t), &t, 40).unwrap();
        assert_eq!(tr.status, Status::BudgetExhausted);
        let roofs: Vec<_> = tr.events.iter().filter(|e| matches!(e.kind, EventKind::Roof(_))).collect();
        assert_eq!(roofs[0].at, pt(rat(1, 2), rat(1, 1)));
        assert_eq!(roofs[1].at, pt(rat(5, 4), rat(1, 2)));
    }

    #[test]
    fn saddle_connection_requires_vertex() {
        let t = tail(2);
        let m = special_slope(&t);
        assert!(matches!(saddle_connection(&pt(rat(1, 2), rat(0, 1)), &m, &t, 10), Err(FlowError::NotSingular(_))));
        let tr = saddle_connection(&pt(rat(1, 1), rat(0, 1)), &m, &t, 10).unwrap();
        assert!(matches!(tr.status, Status::SingularHit(_)));
    }

    #[test]
    fn replay_reproduces_segments() {
        let t = tail(3);
        let tr = trace(&pt(rat(1, 1), rat(0, 1)), &special_slope(&t), &t, DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(replay_segments(&tr.start, &tr.events, &t).unwrap(), tr.segments);
    }

    #[test]
    fn truncated_tail_uses_the_seam() {
        let t = Tail::new(2).unwrap().truncated(1).unwrap();
        let m = Slope::from_value(rat(1, 3)).unwrap();
        let tr = trace(&pt(Rational::zero(), rat(1, 7)), &m, &t, 100).unwrap();
        assert_eq!(tr.status, Status::Closed);
        assert!(tr.events.iter().any(|e| e.kind == EventKind::Seam(1)));
    }

    #[test]
    fn trajectory_json_shape() {
        let t = tail(2);
        let tr = trace(&pt(rat(1, 1), rat(0, 1)), &special_slope(&t), &t, DEFAULT_MAX_EVENTS).unwrap();
        let v = serde_json::to_value(tr.to_record()).unwrap();
        assert_eq!(v["status"], "SingularHit");
        assert_eq!(v["singular_point"], serde_json::json!(["1/1", "1/1"]));
        assert_eq!(v["start"], serde_json::json!(["1/1", "0/1"]));
        assert_eq!(v["slope"], "2/3");
        assert_eq!(v["section_hits"], serde_json::json!(["1/3"]));
        assert_eq!(v["horizontal_displacement"], "3/2");
    }
}
