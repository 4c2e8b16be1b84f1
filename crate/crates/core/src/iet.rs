//! The circle rotation by `q/(2q-1)` and the gapped piecewise translations
//! that record the first return of the special flow to the y-axis when only
//! `□_1..□_k` are visited.
//!
//! With `d = 2q - 1` the map on `[0, 1) ∖ U` is
//!
//! * `x + q/d` on `[0, (q-1)/d)`, and `(q-1)/d ↦ 0`;
//! * `x + (2 - q^e)/(q^(e-1) d)` on `((q^e - 1)/(q^(e-1) d), (q^(e+1) - 1)/(q^e d)]`
//!   for `e = 1..k-1`;
//! * `x + (1 - q^(k-j+1))/(q^(k-j) d)` on
//!   `[(q^(k-j+2) + q - 1)/(q^(k-j+1) d), (q^(k-j+1) + q - 1)/(q^(k-j) d))` for `j = 1..k`;
//!
//! with domain gap `U = ((q^k - 1)/(q^(k-1) d), (q^(k+1) + q - 1)/(q^k d))` and
//! range gap `V = (0, 1/q^k)`.

use serde::Serialize;
use thiserror::Error;

use crate::exact::{mod_one, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IetError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("{0} lies in the domain gap")]
    InGap(Rational),
    #[error("{0} lies outside [0, 1)")]
    OutOfDomain(Rational),
    #[error("{0} is not covered by any branch")]
    Uncovered(Rational),
    #[error("orbit from {from} did not reach {target} within {max_iter} steps")]
    TargetNotReached { from: Rational, target: Rational, max_iter: usize },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CircleRotation {
    angle: Rational,
}

impl CircleRotation {
    /// Rotation by `q/(2q-1)`.
    pub fn new(q: u32) -> Result<Self, IetError> {
        if q < 2 {
            return Err(IetError::BadParameters(format!("q must be at least 2, got {q}")));
        }
        let q = q as i64;
        Ok(CircleRotation { angle: Rational::new(q, 2 * q - 1) })
    }

    pub fn angle(&self) -> &Rational {
        &self.angle
    }

    pub fn rotate(&self, x: &Rational) -> Rational {
        mod_one(&(x + &self.angle))
    }

    /// Smallest `n ≥ 1` with `rotate^n(x) = x`.
    pub fn period(&self, x: &Rational) -> usize {
        let start = mod_one(x);
        let mut cur = self.rotate(&start);
        let mut n = 1;
        while cur != start {
            cur = self.rotate(&cur);
            n += 1;
        }
        n
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn shifted(&self, t: &Rational) -> Interval {
        Interval { lo: &self.lo + t, hi: &self.hi + t, ..self.clone() }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Branch {
    pub domain: Interval,
    pub translation: Rational,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PiecewiseTranslation {
    pub q: u32,
    pub k: u32,
    pub branches: Vec<Branch>,
    pub domain_gap: Interval,
    pub range_gap: Interval,
    pub special_points: Vec<(Rational, Rational)>,
}

/// `n / (q^e (2q-1))`.
fn over(n: i64, q: i64, e: u32) -> Rational {
    Rational::new(n, q.pow(e) * (2 * q - 1))
}

/// The first-return map of the special flow to the y-axis, restricted to
/// orbits that stay in `□_1..□_k`.
pub fn section_map(q: u32, k: u32) -> Result<PiecewiseTranslation, IetError> {
    if q < 2 || k < 3 {
        return Err(IetError::BadParameters(format!("need q >= 2 and k >= 3, got q={q}, k={k}")));
    }
    let qi = q as i64;
    if qi.checked_pow(k + 2).and_then(|v| v.checked_mul(2 * qi - 1)).is_none() {
        return Err(IetError::BadParameters(format!("q={q}, k={k} is too large")));
    }
    let mut branches = vec![Branch {
        domain: Interval { lo: Rational::zero(), hi: over(qi - 1, qi, 0), lo_closed: true, hi_closed: false },
        translation: over(qi, qi, 0),
    }];
    for e in 1..k {
        branches.push(Branch {
            domain: Interval {
                lo: over(qi.pow(e) - 1, qi, e - 1),
                hi: over(qi.pow(e + 1) - 1, qi, e),
                lo_closed: false,
                hi_closed: true,
            },
            translation: over(2 - qi.pow(e), qi, e - 1),
        });
    }
    let domain_gap = Interval::open(over(qi.pow(k) - 1, qi, k - 1), over(qi.pow(k + 1) + qi - 1, qi, k));
    for j in 1..=k {
        branches.push(Branch {
            domain: Interval {
                lo: over(qi.pow(k - j + 2) + qi - 1, qi, k - j + 1),
                hi: over(qi.pow(k - j + 1) + qi - 1, qi, k - j),
                lo_closed: true,
                hi_closed: false,
            },
            translation: over(1 - qi.pow(k - j + 1), qi, k - j),
        });
    }
    Ok(PiecewiseTranslation {
        q,
        k,
        branches,
        domain_gap,
        range_gap: Interval::open(Rational::zero(), Rational::new(1, qi.pow(k))),
        special_points: vec![(over(qi - 1, qi, 0), Rational::zero())],
    })
}

impl PiecewiseTranslation {
    pub fn apply(&self, x: &Rational) -> Result<Rational, IetError> {
        if x.is_negative() || x >= &Rational::one() {
            return Err(IetError::OutOfDomain(x.clone()));
        }
        if let Some((_, image)) = self.special_points.iter().find(|(p, _)| p == x) {
            return Ok(image.clone());
        }
        if let Some(b) = self.branches.iter().find(|b| b.domain.contains(x)) {
            return Ok(x + &b.translation);
        }
        if self.domain_gap.contains(x) {
            return Err(IetError::InGap(x.clone()));
        }
        Err(IetError::Uncovered(x.clone()))
    }

    /// Iterates from `x0` until `target`; the result starts with `x0` and ends with `target`.
    pub fn orbit_until(&self, x0: &Rational, target: &Rational, max_iter: usize) -> Result<Vec<Rational>, IetError> {
        let mut orbit = vec![x0.clone()];
        let mut cur = x0.clone();
        for _ in 0..max_iter {
            if &cur == target {
                return Ok(orbit);
            }
            cur = self.apply(&cur)?;
            orbit.push(cur.clone());
        }
        if &cur == target {
            return Ok(orbit);
        }
        Err(IetError::TargetNotReached { from: x0.clone(), target: target.clone(), max_iter })
    }

    pub fn iterate(&self, x: &Rational, n: usize) -> Result<Rational, IetError> {
        let mut cur = x.clone();
        for _ in 0..n {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Branches, special points and the domain gap tile `[0, 1)` with no overlap.
    pub fn tiles_unit_interval(&self) -> bool {
        let mut pieces: Vec<Interval> = self.branches.iter().map(|b| b.domain.clone()).collect();
        pieces.push(self.domain_gap.clone());
        for (p, _) in &self.special_points {
            pieces.push(Interval { lo: p.clone(), hi: p.clone(), lo_closed: true, hi_closed: true });
        }
        tiles(pieces, &Rational::zero(), &Rational::one())
    }

    /// Branch images abut end to end and fill `[1/q^k, 1)`, so with the range
    /// gap they cover `[0, 1)` up to endpoints. The printed bracket conventions
    /// send some pairs of branch endpoints to the same point, so exact tiling
    /// only holds for the interiors.
    pub fn images_fill_complement_of_range_gap(&self) -> bool {
        let mut images: Vec<Interval> = self.branches.iter().map(|b| b.domain.shifted(&b.translation)).collect();
        images.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut reach = self.range_gap.hi.clone();
        for img in &images {
            if img.lo != reach {
                return false;
            }
            reach = img.hi.clone();
        }
        reach == Rational::one()
    }

    /// Total branch length equals total image length.
    pub fn preserves_measure(&self) -> bool {
        let domain: Rational = self.branches.iter().map(|b| b.domain.length()).sum();
        let complement = Rational::one() - self.domain_gap.length();
        domain == complement && self.domain_gap.length() == self.range_gap.length()
    }
}

/// The pieces partition `[lo, hi)` exactly.
fn tiles(mut pieces: Vec<Interval>, lo: &Rational, hi: &Rational) -> bool {
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
    let mut reach = lo.clone();
    let mut reach_closed = false;
    for p in &pieces {
        if p.lo != reach || p.lo_closed == reach_closed || p.hi < p.lo {
            return false;
        }
        reach = p.hi.clone();
        reach_closed = p.hi_closed;
    }
    &reach == hi && !reach_closed
}

/// Number of steps from `(2q²-1)/(q^(k-1)(2q-1))` to `1/q^(k-1)`.
pub fn return_time(q: u32, k: u32) -> usize {
    let (q, k) = (q as usize, k as usize);
    (k - 3) * (2 * q - 2) + 2 * q - 3
}

/// The ladder identity in `□_1..□_3`: `2n-4` steps take `(2q²-1)/(q²(2q-1))` to
/// `(nq²-1)/(q²(2q-1))` for `2 ≤ n ≤ q`, and one more step reaches `1/q²`.
pub fn base_ladder_holds(q: u32) -> bool {
    let Ok(map) = section_map(q, 3) else { return false };
    let qi = q as i64;
    let start = over(2 * qi * qi - 1, qi, 2);
    let rungs = (2..=qi).all(|n| map.iterate(&start, (2 * n - 4) as usize) == Ok(over(n * qi * qi - 1, qi, 2)));
    rungs && map.apply(&over(qi.pow(3) - 1, qi, 2)) == Ok(Rational::new(1, qi * qi))
}

/// The ladder identity in `□_1..□_k` for every rung `j ≤ k` and `2 ≤ n ≤ q`,
/// together with the assembled return time.
pub fn ladder_holds(q: u32, k: u32) -> bool {
    let Ok(map) = section_map(q, k) else { return false };
    let qi = q as i64;
    for j in 1..=k {
        let start = over(2 * qi.pow(j - 1) - 1, qi, k - 1);
        for n in 2..=qi {
            if map.iterate(&start, (2 * n - 4) as usize) != Ok(over(n * qi.pow(j - 1) - 1, qi, k - 1)) {
                return false;
            }
        }
    }
    let start = over(2 * qi * qi - 1, qi, k - 1);
    let target = Rational::new(1, qi.pow(k - 1));
    map.iterate(&start, return_time(q, k)) == Ok(target)
}
