//! Saddle connections in the special direction and the rigid spine.
//!
//! The bottom chain of cylinder 1 is the connection from `(1, 0)` to `(1, 1)`.
//! The bottom chain of cylinder `k ≥ 2` has two pieces: the previous bottom
//! chain lifted by its skew width (which closes up into a single connection
//! through one vertex) and a new connection launched from `(s_k, 0)`. Every
//! lift is validated by retracing it.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form;
use crate::exact::{Point, Rational, Slope};
use crate::flow::{special_slope, trace, FlowError, Status, Trajectory, TrajectoryRecord, DEFAULT_MAX_EVENTS};
use crate::surface::{EventKind, SurfaceError, Tail};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("{label} does not end at a vertex (status {status})")]
    NotSaddle { label: ChainLabel, status: String },
    #[error("{label} ends at {found}, expected {expected}")]
    WrongEndpoint { label: ChainLabel, expected: Box<Point>, found: Box<Point> },
    #[error("lifting {label} by {shift} meets {count} vertices on the y-axis, expected exactly one")]
    ShiftHitsSingularity { label: ChainLabel, shift: Rational, count: usize },
    #[error("fusion for cylinder {k} failed: {reason}")]
    FusionFailed { k: u32, reason: String },
    #[error("fill-in for cylinder {k} failed at {point}")]
    FillInFailed { k: u32, point: Rational },
    #[error("waist of cylinder {k} is not a closed geodesic through every strip")]
    FoliationFailed { k: u32 },
    #[error("vertex height {y} lies inside a strip of cylinder {k}")]
    SingularInsideInterval { k: u32, y: Rational },
    #[error("cylinder {k} crosses square {square} {found} times, expected {expected}")]
    TableMismatch { k: u32, square: usize, expected: u64, found: String },
    #[error("spine check failed: {0}")]
    SpineBroken(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "chain", content = "k", rename_all = "snake_case")]
pub enum ChainLabel {
    /// Bottom boundary of cylinder `k`.
    Bottom(u32),
    /// The connection from `(s_k, 0)` that completes the bottom of cylinder `k`.
    NewPiece(u32),
    /// Bottom of cylinder `k` lifted by its skew width.
    Top(u32),
}

impl fmt::Display for ChainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainLabel::Bottom(k) => write!(f, "bottom chain {k}"),
            ChainLabel::NewPiece(k) => write!(f, "new piece {k}"),
            ChainLabel::Top(k) => write!(f, "top chain {k}"),
        }
    }
}

/// Concatenation of saddle connections with its y-axis intersection set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SaddleChain {
    pub label: ChainLabel,
    pub pieces: Vec<Trajectory>,
    pub y_hits: BTreeSet<Rational>,
}

impl SaddleChain {
    fn from_pieces(label: ChainLabel, pieces: Vec<Trajectory>) -> Self {
        let y_hits = pieces.iter().flat_map(|p| p.section_hits()).collect();
        SaddleChain { label, pieces, y_hits }
    }

    pub fn horizontal_displacement(&self) -> Rational {
        self.pieces.iter().map(|p| &p.horizontal_displacement).sum()
    }

    pub fn length_squared(&self, slope: &Slope) -> Rational {
        let d = self.horizontal_displacement();
        &d * &d * slope.norm_squared_per_run()
    }

    pub fn end_point(&self) -> Option<&Point> {
        self.pieces.last().and_then(|p| p.singular_end())
    }
}

/// Wire form of a [`SaddleChain`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChainRecord {
    pub q: u32,
    pub label: ChainLabel,
    pub end: Option<Point>,
    pub horizontal_displacement: Rational,
    pub length_squared: Rational,
    pub y_hits: Vec<Rational>,
    pub pieces: Vec<TrajectoryRecord>,
}

impl SaddleChain {
    pub fn to_record(&self, q: u32) -> ChainRecord {
        let slope = self.pieces.first().map(|p| p.slope.clone()).expect("chains are non-empty");
        ChainRecord {
            q,
            label: self.label,
            end: self.end_point().cloned(),
            horizontal_displacement: self.horizontal_displacement(),
            length_squared: self.length_squared(&slope),
            y_hits: self.y_hits.iter().cloned().collect(),
            pieces: self.pieces.iter().map(Trajectory::to_record).collect(),
        }
    }
}

pub(crate) fn unit_tail(q: u32) -> Result<Tail, BuildError> {
    Ok(Tail::new(q)?)
}

fn saddle(tail: &Tail, from: Point, label: ChainLabel) -> Result<Trajectory, BuildError> {
    let t = trace(&from, &special_slope(tail), tail, DEFAULT_MAX_EVENTS)?;
    match t.status {
        Status::SingularHit(_) => Ok(t),
        ref s => Err(BuildError::NotSaddle { label, status: s.name().to_string() }),
    }
}

fn expect_end(chain: &SaddleChain, expected: Point) -> Result<(), BuildError> {
    match chain.end_point() {
        Some(p) if *p == expected => Ok(()),
        found => Err(BuildError::WrongEndpoint {
            label: chain.label,
            expected: Box::new(expected),
            found: Box::new(found.cloned().unwrap_or_else(Point::origin)),
        }),
    }
}

/// The connection from `(1, 0)` to `(1, 1)`.
pub fn first_bottom(q: u32) -> Result<SaddleChain, BuildError> {
    let tail = unit_tail(q)?;
    let t = saddle(&tail, Point::new(Rational::one(), Rational::zero()), ChainLabel::Bottom(1))?;
    let chain = SaddleChain::from_pieces(ChainLabel::Bottom(1), vec![t]);
    expect_end(&chain, Point::new(Rational::one(), Rational::one()))?;
    Ok(chain)
}

/// Lifts the bottom chain of cylinder `k` by its skew width and retraces the
/// lift from the single vertex it meets on the y-axis.
pub fn lift(q: u32, bottom: &SaddleChain) -> Result<SaddleChain, BuildError> {
    let ChainLabel::Bottom(k) = bottom.label else {
        return Err(BuildError::BadParameters(format!("cannot lift {}", bottom.label)));
    };
    let tail = unit_tail(q)?;
    let shift = closed_form::skew_width(q, k);
    let lifted: BTreeSet<Rational> = bottom.y_hits.iter().map(|y| y + &shift).collect();
    let vertices: Vec<&Rational> =
        lifted.iter().filter(|y| tail.is_singular(&Point::new(Rational::zero(), (*y).clone()))).collect();
    if vertices.len() != 1 {
        return Err(BuildError::ShiftHitsSingularity { label: bottom.label, shift, count: vertices.len() });
    }
    let launch = Point::new(Rational::zero(), vertices[0].clone());
    let t = saddle(&tail, launch, ChainLabel::Top(k))?;
    let chain = SaddleChain::from_pieces(ChainLabel::Top(k), vec![t]);
    if chain.y_hits != lifted {
        return Err(BuildError::FusionFailed {
            k: k + 1,
            reason: format!("retrace meets the y-axis at {} points, the lift has {}", chain.y_hits.len(), lifted.len()),
        });
    }
    Ok(chain)
}

/// Top chain of cylinder 1; ends at the upper right vertex `(1 + 1/q, 1/q)` of `□_2`.
pub fn first_top(q: u32) -> Result<SaddleChain, BuildError> {
    let chain = lift(q, &first_bottom(q)?)?;
    let tail = unit_tail(q)?;
    expect_end(&chain, Point::new(tail.offset(2), tail.side(2)))?;
    Ok(chain)
}

/// The connection launched from `(s_k, 0)`, ending at `(s_{k-1}, l_k)`.
pub fn new_piece(q: u32, k: u32) -> Result<SaddleChain, BuildError> {
    if k < 2 {
        return Err(BuildError::BadParameters(format!("new pieces start at k = 2, got {k}")));
    }
    let tail = unit_tail(q)?;
    let label = ChainLabel::NewPiece(k);
    let t = saddle(&tail, Point::new(tail.offset(k as usize), Rational::zero()), label)?;
    let chain = SaddleChain::from_pieces(label, vec![t]);
    expect_end(&chain, Point::new(tail.offset(k as usize - 1), tail.side(k as usize)))?;
    Ok(chain)
}

/// Bottom chain of cylinder `k` from the bottom chain of cylinder `k - 1`.
pub fn next_bottom(q: u32, previous: &SaddleChain) -> Result<SaddleChain, BuildError> {
    let ChainLabel::Bottom(prev) = previous.label else {
        return Err(BuildError::BadParameters(format!("{} is not a bottom chain", previous.label)));
    };
    let k = prev + 1;
    let tail = unit_tail(q)?;
    let top = lift(q, previous)?;
    let fused_end = Point::new(tail.offset(k as usize), tail.side(k as usize));
    if top.end_point() != Some(&fused_end) {
        return Err(BuildError::FusionFailed { k, reason: format!("lift does not close at {fused_end}") });
    }
    let piece = new_piece(q, k)?;
    if !top.y_hits.is_disjoint(&piece.y_hits) {
        return Err(BuildError::FusionFailed { k, reason: "pieces share a y-axis hit".into() });
    }
    let mut pieces = top.pieces;
    pieces.extend(piece.pieces);
    Ok(SaddleChain::from_pieces(ChainLabel::Bottom(k), pieces))
}

/// Bottom chains of cylinders `1..=count`.
pub fn bottom_chains(q: u32, count: u32) -> Result<Vec<SaddleChain>, BuildError> {
    let mut out = Vec::with_capacity(count as usize);
    if count == 0 {
        return Ok(out);
    }
    out.push(first_bottom(q)?);
    for _ in 1..count {
        let next = next_bottom(q, out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Bottom chain of cylinder `k`.
pub fn bottom_chain(q: u32, k: u32) -> Result<SaddleChain, BuildError> {
    if k == 0 {
        return Err(BuildError::BadParameters("cylinders are numbered from 1".into()));
    }
    Ok(bottom_chains(q, k)?.pop().expect("k >= 1"))
}

/// The trajectory from the origin in the special direction. It passes one
/// portal and then climbs every roof, converging to the vertex at the right
/// end of the tail.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spine {
    pub tail: Tail,
    /// Traced prefix through the roofs of `□_1..□_squares`.
    pub trajectory: Trajectory,
    pub squares: usize,
    /// Offset of each roof crossing within its roof, as a fraction of the side.
    pub roof_ratio: Rational,
    /// Traced displacement plus the remaining horizontal distance to the end.
    pub horizontal_displacement: Rational,
    pub limit: Point,
}

impl Spine {
    pub fn length_squared(&self) -> Rational {
        let d = &self.horizontal_displacement;
        d * d * self.trajectory.slope.norm_squared_per_run()
    }

    pub fn section_hits(&self) -> Vec<Rational> {
        self.trajectory.section_hits()
    }
}

/// Traces the spine through the roofs of the first `squares` squares and
/// checks its self-similar shape.
pub fn spine(tail: &Tail, squares: usize) -> Result<Spine, BuildError> {
    if squares == 0 || tail.truncation().is_some() {
        return Err(BuildError::BadParameters("spine needs an untruncated tail and at least one square".into()));
    }
    let slope = special_slope(tail);
    let t = trace(&Point::origin(), &slope, tail, 2 * squares + 1)?;
    if t.status != Status::BudgetExhausted {
        return Err(BuildError::SpineBroken(format!("trace stopped early with {}", t.status.name())));
    }
    if t.events[0].kind != EventKind::Portal(1) {
        return Err(BuildError::SpineBroken(format!("first event is {}", t.events[0])));
    }
    let mut ratio: Option<Rational> = None;
    for (i, e) in t.events[1..].iter().enumerate() {
        let j = i / 2 + 1;
        let expected = if i % 2 == 0 { EventKind::Roof(j) } else { EventKind::InteriorPass(j) };
        if e.kind != expected {
            return Err(BuildError::SpineBroken(format!("expected {expected:?}, found {e}")));
        }
        if let EventKind::Roof(j) = e.kind {
            let r = (&e.at.x - tail.offset(j - 1)) / tail.side(j);
            match &ratio {
                Some(prev) if *prev != r => {
                    return Err(BuildError::SpineBroken(format!("roof {j} is divided in ratio {r}, not {prev}")));
                }
                _ => ratio = Some(r),
            }
        }
    }
    let last_x = &t.end_point().x;
    let limit = Point::new(tail.right_end(), Rational::zero());
    let horizontal_displacement = &t.horizontal_displacement + &(&limit.x - last_x);
    Ok(Spine {
        tail: tail.clone(),
        squares,
        roof_ratio: ratio.expect("at least one roof"),
        horizontal_displacement,
        limit,
        trajectory: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn first_bottom_hits() {
        assert_eq!(first_bottom(2).unwrap().y_hits, [rat(1, 3)].into_iter().collect());
        assert_eq!(first_bottom(3).unwrap().y_hits, closed_form::first_bottom_hits(3));
        assert_eq!(first_bottom(5).unwrap().y_hits.len(), 7);
    }

    #[test]
    fn first_top_examples() {
        let top = first_top(2).unwrap();
        assert!(top.y_hits.contains(&rat(1, 2)));
        assert_eq!(top.end_point(), Some(&Point::new(rat(3, 2), rat(1, 2))));
        assert_eq!(first_top(3).unwrap().y_hits, closed_form::first_top_hits(3));
    }

    #[test]
    fn new_piece_examples() {
        let p = new_piece(2, 2).unwrap();
        assert_eq!(p.pieces[0].start, Point::new(rat(3, 2), rat(0, 1)));
        assert_eq!(p.end_point(), Some(&Point::new(rat(1, 1), rat(1, 2))));
        assert_eq!(new_piece(3, 2).unwrap().end_point(), Some(&Point::new(rat(1, 1), rat(1, 3))));
        assert_eq!(new_piece(2, 3).unwrap().pieces[0].section_hits()[0], rat(1, 12));
        assert!(new_piece(2, 1).is_err());
    }

    #[test]
    fn second_bottom_chain() {
        let b = bottom_chain(2, 2).unwrap();
        assert_eq!(b.pieces.len(), 2);
        assert_eq!(b.y_hits, [rat(1, 6), rat(1, 2), rat(5, 6)].into_iter().collect());
        assert_eq!(b.pieces[0].singular_end(), Some(&Point::new(rat(3, 2), rat(1, 2))));
    }

    #[test]
    fn spine_q2() {
        let s = spine(&Tail::new(2).unwrap(), 20).unwrap();
        assert_eq!(s.roof_ratio, rat(1, 2));
        assert_eq!(s.horizontal_displacement, rat(3, 1));
        assert_eq!(s.length_squared(), rat(13, 1));
        assert_eq!(s.section_hits(), vec![rat(0, 1), rat(2, 3)]);
    }

    #[test]
    fn spine_rational_ratio() {
        let r = rat(4, 5);
        let s = spine(&Tail::with_ratio(r.clone()).unwrap(), 12).unwrap();
        assert_eq!(s.roof_ratio, rat(1, 5));
        assert_eq!(s.horizontal_displacement, closed_form::spine_displacement(&r));
    }
}
