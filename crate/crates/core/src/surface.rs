//! The geometric armadillo tail: a row of squares `□_1, □_2, …` with side
//! `l_k = r^(k-1)` whose right edges sit at `s_k = l_1 + … + l_k`.
//!
//! Gluings: the roof of `□_k` is glued to its own floor; the part of the right
//! edge of `□_k` above `l_{k+1}` (the portal) is glued to the y-axis at the
//! same height; the part below `l_{k+1}` is shared with `□_{k+1}`. In a
//! truncated tail `X_n` the whole right edge of `□_n` is glued to the y-axis.
//! Every polygon vertex is the one wild singularity.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Point, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("bad surface parameter: {0}")]
    BadParameter(String),
    #[error("x = {0} lies beyond the tail")]
    OutOfRange(Rational),
    #[error("{0} is not an identifiable boundary event")]
    NotIdentifiable(Box<BoundaryEvent>),
}

/// Where a ray first meets the boundary of its current square.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "square")]
pub enum EventKind {
    /// Crossing the roof of `□_k`; re-enters from its floor.
    Roof(usize),
    /// Crossing the portal of `□_k`; re-enters from the y-axis.
    Portal(usize),
    /// Crossing the lower part of the right edge of `□_k` into `□_{k+1}`.
    InteriorPass(usize),
    /// Crossing the right edge of the last square of a truncated tail.
    Seam(usize),
    /// Contact with a polygon vertex.
    SingularVertex,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BoundaryEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    pub at: Point,
}

impl fmt::Display for BoundaryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EventKind::Roof(k) => write!(f, "Roof({k}) at {}", self.at),
            EventKind::Portal(k) => write!(f, "Portal({k}) at {}", self.at),
            EventKind::InteriorPass(k) => write!(f, "InteriorPass({k}) at {}", self.at),
            EventKind::Seam(k) => write!(f, "Seam({k}) at {}", self.at),
            EventKind::SingularVertex => write!(f, "SingularVertex at {}", self.at),
        }
    }
}

/// Tail with ratio `r ∈ (0, 1)`; `q` is set when `r = 1/q` for an integer `q ≥ 2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tail {
    r: Rational,
    q: Option<u32>,
    truncation: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TailRecord {
    q: Option<u32>,
    r: Rational,
    truncation: Option<usize>,
}

impl Serialize for Tail {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TailRecord { q: self.q, r: self.r.clone(), truncation: self.truncation }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tail {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = TailRecord::deserialize(d)?;
        let tail = Tail::with_ratio(rec.r).map_err(serde::de::Error::custom)?;
        if rec.q.is_some() && rec.q != tail.q {
            return Err(serde::de::Error::custom("q does not match r"));
        }
        match rec.truncation {
            Some(n) => tail.truncated(n).map_err(serde::de::Error::custom),
            None => Ok(tail),
        }
    }
}

impl Tail {
    pub fn new(q: u32) -> Result<Self, SurfaceError> {
        if q < 2 {
            return Err(SurfaceError::BadParameter(format!("q must be at least 2, got {q}")));
        }
        Ok(Tail { r: Rational::new(1, q as i64), q: Some(q), truncation: None })
    }

    pub fn with_ratio(r: Rational) -> Result<Self, SurfaceError> {
        if !r.is_positive() || r >= Rational::one() {
            return Err(SurfaceError::BadParameter(format!("r must lie in (0, 1), got {r}")));
        }
        let inv = r.recip();
        let q = inv.to_i64().and_then(|q| u32::try_from(q).ok());
        Ok(Tail { r, q, truncation: None })
    }

    /// The truncated tail `X_n` keeping `□_1..□_n`.
    pub fn truncated(mut self, n: usize) -> Result<Self, SurfaceError> {
        if n == 0 {
            return Err(SurfaceError::BadParameter("truncation must be at least 1".into()));
        }
        self.truncation = Some(n);
        Ok(self)
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn q(&self) -> Option<u32> {
        self.q
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    fn has_square(&self, k: usize) -> bool {
        k >= 1 && self.truncation.is_none_or(|n| k <= n)
    }

    /// `l_k = r^(k-1)`.
    pub fn side(&self, k: usize) -> Rational {
        debug_assert!(k >= 1);
        self.r.pow(k as i32 - 1)
    }

    /// `s_k = (1 - r^k)/(1 - r)`, with `s_0 = 0`.
    pub fn offset(&self, k: usize) -> Rational {
        (Rational::one() - self.r.pow(k as i32)) / (Rational::one() - &self.r)
    }

    /// Supremum of the x-coordinates of the polygon.
    pub fn right_end(&self) -> Rational {
        match self.truncation {
            Some(n) => self.offset(n),
            None => (Rational::one() - &self.r).recip(),
        }
    }

    /// Index `k` with `s_{k-1} ≤ x < s_k`.
    pub fn square_index(&self, x: &Rational) -> Result<usize, SurfaceError> {
        if x.is_negative() || x >= &self.right_end() {
            return Err(SurfaceError::OutOfRange(x.clone()));
        }
        let mut k = 1;
        let mut side = Rational::one();
        let mut right = Rational::one();
        while &right <= x {
            k += 1;
            side = &side * &self.r;
            right += &side;
        }
        Ok(k)
    }

    /// `k ≥ 1` with `l_k = y`.
    pub fn side_level(&self, y: &Rational) -> Option<usize> {
        if !y.is_positive() {
            return None;
        }
        let mut k = 1;
        let mut side = Rational::one();
        while &side > y {
            k += 1;
            side = &side * &self.r;
        }
        (&side == y && self.has_square(k)).then_some(k)
    }

    /// `k ≥ 0` with `s_k = x`.
    pub fn offset_level(&self, x: &Rational) -> Option<usize> {
        if x.is_negative() || x >= &(Rational::one() - &self.r).recip() {
            return None;
        }
        let mut k = 0;
        let mut side = Rational::one();
        let mut right = Rational::zero();
        while &right < x {
            k += 1;
            right += &side;
            side = &side * &self.r;
        }
        (&right == x && self.truncation.is_none_or(|n| k <= n)).then_some(k)
    }

    /// Vertex predicate for points on the closure of the polygon.
    pub fn is_singular(&self, p: &Point) -> bool {
        if p.x.is_zero() {
            return p.y.is_zero() || self.side_level(&p.y).is_some();
        }
        match self.offset_level(&p.x) {
            Some(k) if k >= 1 => {
                if p.y.is_zero() || p.y == self.side(k) {
                    return true;
                }
                Some(k) != self.truncation && p.y == self.side(k + 1)
            }
            _ => false,
        }
    }

    /// Image of a roof, portal or seam crossing under the gluing.
    pub fn identify(&self, event: &BoundaryEvent) -> Result<Point, SurfaceError> {
        let bad = || SurfaceError::NotIdentifiable(Box::new(event.clone()));
        let at = &event.at;
        match event.kind {
            EventKind::Roof(k) => {
                let ok =
                    self.has_square(k) && at.y == self.side(k) && at.x > self.offset(k - 1) && at.x < self.offset(k);
                ok.then(|| Point::new(at.x.clone(), Rational::zero())).ok_or_else(bad)
            }
            EventKind::Portal(k) => {
                let ok = self.has_square(k)
                    && Some(k) != self.truncation
                    && at.x == self.offset(k)
                    && at.y > self.side(k + 1)
                    && at.y < self.side(k);
                ok.then(|| Point::new(Rational::zero(), at.y.clone())).ok_or_else(bad)
            }
            EventKind::Seam(_) => self.truncated_identify(at).map_err(|_| bad()),
            EventKind::InteriorPass(_) | EventKind::SingularVertex => Err(bad()),
        }
    }

    /// The extra gluing of `X_n`: `(s_n, y) ↦ (0, y)` for `0 < y < l_n`.
    pub fn truncated_identify(&self, at: &Point) -> Result<Point, SurfaceError> {
        let bad = || {
            SurfaceError::NotIdentifiable(Box::new(BoundaryEvent {
                kind: EventKind::Seam(self.truncation.unwrap_or(0)),
                at: at.clone(),
            }))
        };
        let n = self.truncation.ok_or_else(bad)?;
        if at.x == self.offset(n) && at.y.is_positive() && at.y < self.side(n) {
            Ok(Point::new(Rational::zero(), at.y.clone()))
        } else {
            Err(bad())
        }
    }

    /// `Σ_{k ≤ K} l_k²`.
    pub fn area_partial(&self, squares: usize) -> Rational {
        let r2 = &self.r * &self.r;
        (Rational::one() - r2.pow(squares as i32)) / (Rational::one() - r2)
    }

    /// `1/(1 - r²)`, or the partial sum for a truncated tail.
    pub fn area(&self) -> Rational {
        match self.truncation {
            Some(n) => self.area_partial(n),
            None => (Rational::one() - &self.r * &self.r).recip(),
        }
    }
}

/// Partial area `Σ_{k ≤ K} 1/k²` of the harmonic tail `l_k = 1/k`.
pub fn harmonic_area_partial(squares: usize) -> Rational {
    (1..=squares as i64).map(|k| Rational::new(1, k * k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn pt(x: Rational, y: Rational) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn square_index_half_open() {
        let t = Tail::new(2).unwrap();
        assert_eq!(t.square_index(&Rational::zero()).unwrap(), 1);
        assert_eq!(t.square_index(&rat(5, 4)).unwrap(), 2);
        assert_eq!(t.square_index(&Rational::one()).unwrap(), 2);
        assert!(t.square_index(&Rational::integer(2)).is_err());
        let t3 = Tail::new(3).unwrap();
        assert_eq!(t3.offset(3), rat(13, 9));
        assert_eq!(t3.square_index(&rat(13, 9)).unwrap(), 4);
    }

    #[test]
    fn identify_examples() {
        let t = Tail::new(2).unwrap();
        let portal = BoundaryEvent { kind: EventKind::Portal(1), at: pt(rat(1, 1), rat(2, 3)) };
        assert_eq!(t.identify(&portal).unwrap(), pt(Rational::zero(), rat(2, 3)));
        let roof = BoundaryEvent { kind: EventKind::Roof(1), at: pt(rat(1, 2), rat(1, 1)) };
        assert_eq!(t.identify(&roof).unwrap(), pt(rat(1, 2), Rational::zero()));
        let pass = BoundaryEvent { kind: EventKind::InteriorPass(1), at: pt(rat(1, 1), rat(1, 4)) };
        assert!(t.identify(&pass).is_err());
        let vertex = BoundaryEvent { kind: EventKind::SingularVertex, at: pt(rat(1, 1), rat(1, 1)) };
        assert!(t.identify(&vertex).is_err());
        let misplaced = BoundaryEvent { kind: EventKind::Portal(1), at: pt(rat(1, 1), rat(1, 3)) };
        assert!(t.identify(&misplaced).is_err());
    }

    #[test]
    fn vertex_predicate() {
        let t = Tail::new(2).unwrap();
        assert!(t.is_singular(&pt(rat(1, 1), rat(1, 1))));
        assert!(t.is_singular(&pt(rat(3, 2), rat(1, 2))));
        assert!(t.is_singular(&pt(rat(3, 2), rat(1, 4))));
        assert!(t.is_singular(&pt(Rational::zero(), rat(1, 8))));
        assert!(t.is_singular(&pt(Rational::zero(), Rational::zero())));
        assert!(!t.is_singular(&pt(rat(1, 1), rat(2, 3))));
        assert!(!t.is_singular(&pt(rat(1, 2), rat(1, 1))));
        assert!(!t.is_singular(&pt(Rational::zero(), rat(1, 3))));
    }

    #[test]
    fn truncated_gluing() {
        let x1 = Tail::new(2).unwrap().truncated(1).unwrap();
        assert_eq!(x1.truncated_identify(&pt(rat(1, 1), rat(1, 3))).unwrap(), pt(Rational::zero(), rat(1, 3)));
        let x2 = Tail::new(2).unwrap().truncated(2).unwrap();
        assert_eq!(x2.truncated_identify(&pt(rat(3, 2), rat(1, 4))).unwrap(), pt(Rational::zero(), rat(1, 4)));
        assert!(x2.truncated_identify(&pt(rat(3, 2), rat(1, 2))).is_err());
        assert!(x2.is_singular(&pt(rat(3, 2), rat(1, 2))));
        assert!(!x2.is_singular(&pt(rat(3, 2), rat(1, 4))));
        assert!(!x2.is_singular(&pt(Rational::zero(), rat(1, 4))));
        assert!(Tail::new(2).unwrap().truncated_identify(&pt(rat(1, 1), rat(1, 3))).is_err());
    }

    #[test]
    fn areas() {
        let t = Tail::new(2).unwrap();
        assert_eq!(t.area(), rat(4, 3));
        assert_eq!(t.area_partial(3), rat(1, 1) + rat(1, 4) + rat(1, 16));
        assert_eq!(harmonic_area_partial(3), rat(49, 36));
        let r = Tail::with_ratio(rat(2, 3)).unwrap();
        assert_eq!(r.q(), None);
        assert_eq!(r.area(), rat(9, 5));
        assert_eq!(Tail::with_ratio(rat(1, 4)).unwrap().q(), Some(4));
        assert!(Tail::new(1).is_err());
        assert!(Tail::with_ratio(rat(3, 2)).is_err());
    }

    #[test]
    fn tail_json() {
        let t = Tail::new(3).unwrap().truncated(4).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"q":3,"r":"1/3","truncation":4}"#);
        assert_eq!(serde_json::from_str::<Tail>(&s).unwrap(), t);
        let ev = BoundaryEvent { kind: EventKind::Portal(2), at: pt(rat(3, 2), rat(1, 3)) };
        let s = serde_json::to_string(&ev).unwrap();
        assert_eq!(s, r#"{"kind":"Portal","square":2,"at":["3/2","1/3"]}"#);
        assert_eq!(serde_json::from_str::<BoundaryEvent>(&s).unwrap(), ev);
    }
}
