//! Closed-form predictions for the special direction on the tail `r = 1/q`.
//!
//! Nothing here traces a flow; these are the values the constructions in
//! [`crate::chains`] and [`crate::cylinder`] are checked against.

use std::collections::{BTreeMap, BTreeSet};

use crate::exact::Rational;

fn qr(q: u32) -> Rational {
    Rational::integer(q as i64)
}

/// `d = 2q - 1`.
fn den(q: u32) -> Rational {
    Rational::integer(2 * q as i64 - 1)
}

/// `n / (q^e (2q-1))`.
fn over(n: Rational, q: u32, e: u32) -> Rational {
    n / (qr(q).pow(e as i32) * den(q))
}

/// Slope `q/(2q-1)` of the special direction.
pub fn direction(q: u32) -> Rational {
    qr(q) / den(q)
}

/// `1 + slope²`.
pub fn direction_norm_squared(q: u32) -> Rational {
    let m = direction(q);
    Rational::one() + &m * &m
}

/// Vertical gap `(q-1)/(q^k(2q-1))` between the two boundary chains of cylinder `k`.
pub fn skew_width(q: u32, k: u32) -> Rational {
    over(qr(q) - Rational::one(), q, k)
}

/// `Σ_{j<k} skew_j`.
fn skew_prefix(q: u32, from: u32, to_exclusive: u32) -> Rational {
    (from..to_exclusive).map(|j| skew_width(q, j)).sum()
}

/// Heights at which the first bottom connection meets the y-axis: `i/(2q-1)`, `i ≠ q`.
pub fn first_bottom_hits(q: u32) -> BTreeSet<Rational> {
    (1..=2 * q as i64 - 2).filter(|&i| i != q as i64).map(|i| Rational::integer(i) / den(q)).collect()
}

/// Heights at which the top connection of the first cylinder meets the y-axis.
pub fn first_top_hits(q: u32) -> BTreeSet<Rational> {
    let qi = q as i64;
    (1..=2 * qi - 2).filter(|&i| i != qi).map(|i| over(Rational::integer((i + 1) * qi - 1), q, 1)).collect()
}

/// Heights at which the bottom chain of cylinder `k` meets the y-axis.
pub fn bottom_chain_hits(q: u32, k: u32) -> BTreeSet<Rational> {
    let qi = q as i64;
    let mut out: BTreeSet<Rational> = first_bottom_hits(q).into_iter().map(|y| y + skew_prefix(q, 1, k)).collect();
    for j in 2..=k {
        let shift = skew_prefix(q, j, k);
        let qj = qr(q).pow(j as i32);
        for i in 1..qi {
            let i = Rational::integer(i);
            out.insert(over(i.clone(), q, j - 1) + &shift);
            out.insert(over(i + &qj, q, j - 1) + &shift);
        }
    }
    out
}

/// `2kq - 2k - 1`: the number of y-axis hits of the bottom chain of cylinder `k`.
pub fn bottom_chain_hit_count(q: u32, k: u32) -> usize {
    (2 * k * q - 2 * k - 1) as usize
}

/// Starting heights `(S_1, S_2)` of the partial cylinders made by pushing
/// cylinder `k` one square to the right.
pub fn partial_cylinder_starts(q: u32, k: u32) -> (BTreeSet<Rational>, BTreeSet<Rational>) {
    let qi = q as i64;
    let qk = qi.pow(k);
    let at = |n: i64| over(Rational::integer(n), q, k);
    let mut s1 = BTreeSet::new();
    for i in 1..qi {
        s1.insert(at(i));
        for j in 1..k {
            s1.insert(at((i + 1) * qi.pow(k - j) - 1));
        }
    }
    let mut s2 = BTreeSet::new();
    for i in std::iter::once(-1).chain(1..=qi - 2) {
        s2.insert(at((1 + i) * qi.pow(k - 1) + qk - 1));
    }
    for j in 2..k {
        for i in 1..qi {
            s2.insert(at((1 + i) * qi.pow(k - j) + qk - 1));
        }
    }
    if k >= 2 {
        for i in 1..qi {
            s2.insert(at(i + qk));
        }
    }
    (s1, s2)
}

/// `k - (q^k - 1)/(q^k (q-1))`.
fn waist_factor(q: u32, k: u32) -> Rational {
    let qk = qr(q).pow(k as i32);
    Rational::integer(k as i64) - (&qk - Rational::one()) / (qk * (qr(q) - Rational::one()))
}

/// Horizontal displacement of a waist curve of cylinder `k`.
pub fn waist_displacement(q: u32, k: u32) -> Rational {
    den(q) * waist_factor(q, k)
}

pub fn modulus(q: u32, k: u32) -> Rational {
    let q1 = qr(q) - Rational::one();
    let n = qr(q) * qr(q) + den(q) * den(q);
    let kk = Rational::integer(k as i64);
    let poly = &kk * qr(q).pow(k as i32 + 1) - (kk + Rational::one()) * qr(q).pow(k as i32) + Rational::one();
    n / (&q1 * &q1) * poly
}

pub fn area(q: u32, k: u32) -> Rational {
    waist_factor(q, k) * (qr(q) - Rational::one()) / qr(q).pow(k as i32)
}

/// Number of times a waist curve of cylinder `k` crosses each square.
pub fn crossing_row(q: u32, k: u32) -> BTreeMap<usize, u64> {
    let (q, k) = (q as u64, k as u64);
    let mut row = BTreeMap::new();
    row.insert(1, k * (2 * q - 2) - 1);
    for i in 2..=k {
        row.insert(i as usize, (k - i + 1) * (q - 1));
    }
    row.insert(k as usize + 1, 1);
    row
}

/// Horizontal displacement of the rigid spine on the tail with ratio `r`: `(2-r)/(1-r)`.
pub fn spine_displacement(r: &Rational) -> Rational {
    (Rational::integer(2) - r) / (Rational::one() - r)
}

/// Squared spine length `((2-r)² + 1)/(1-r)²`; for `r = 1/q` this is `(q² + (2q-1)²)/(q-1)²`.
pub fn spine_length_squared(r: &Rational) -> Rational {
    let two_minus = Rational::integer(2) - r;
    let one_minus = Rational::one() - r;
    (&two_minus * &two_minus + Rational::one()) / (&one_minus * &one_minus)
}

/// Horizontal displacement `1/q + 2q - 3` of the first bottom connection.
pub fn first_bottom_displacement(q: u32) -> Rational {
    Rational::new(1, q as i64) + Rational::integer(2 * q as i64 - 3)
}

/// `Σ_{k>K} x^k`.
pub fn power_tail(x: &Rational, after: u32) -> Rational {
    x.pow(after as i32 + 1) / (Rational::one() - x)
}

/// `Σ_{k>K} k x^k`.
pub fn weighted_power_tail(x: &Rational, after: u32) -> Rational {
    let one_minus = Rational::one() - x;
    let kk = Rational::integer(after as i64);
    x.pow(after as i32 + 1) * (&kk + Rational::one() - kk * x) / (&one_minus * &one_minus)
}

/// `Σ_{k>K} (2kq - 2k - 1) skew_k`: the part of the y-axis covered by cylinders beyond `K`.
pub fn first_square_coverage_tail(q: u32, after: u32) -> Rational {
    let x = Rational::new(1, q as i64);
    let q1 = qr(q) - Rational::one();
    &q1 / den(q) * (Rational::integer(2) * &q1 * weighted_power_tail(&x, after) - power_tail(&x, after))
}

/// `Σ_{k>K} crossings_k(□_2) · skew_k`, valid for `K ≥ 1`.
pub fn second_square_coverage_tail(q: u32, after: u32) -> Rational {
    assert!(after >= 1);
    let x = Rational::new(1, q as i64);
    let q1 = qr(q) - Rational::one();
    &q1 * &q1 / den(q) * (weighted_power_tail(&x, after) - power_tail(&x, after))
}

/// `Σ_{k>K} area_k`.
pub fn area_tail(q: u32, after: u32) -> Rational {
    let x = Rational::new(1, q as i64);
    let x2 = &x * &x;
    (qr(q) - Rational::one()) * weighted_power_tail(&x, after) - power_tail(&x, after) + power_tail(&x2, after)
}

/// `Σ_{j ≥ k} skew_j = 1/(q^(k-1)(2q-1))`.
pub fn skew_suffix(q: u32, k: u32) -> Rational {
    over(Rational::one(), q, k - 1)
}
