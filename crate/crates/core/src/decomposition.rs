//! Cylinder decompositions: the special direction with its rigid spine, and
//! the horizontal and vertical decompositions of any tail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chains::{bottom_chains, first_bottom, spine, unit_tail, BuildError, Spine};
use crate::closed_form;
use crate::cylinder::{check_crossing_table, cylinder_from_bottom, fill_in, Cylinder};
use crate::exact::{Point, Rational, Slope};
use crate::flow::special_slope;
use crate::surface::Tail;

/// Traced squares of the spine prefix kept in a decomposition.
pub const SPINE_SQUARES: usize = 12;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decomposition {
    pub q: u32,
    pub direction: Slope,
    pub cylinders: Vec<Cylinder>,
    pub spine: Spine,
    pub covered_area: Rational,
}

impl Decomposition {
    pub fn moduli(&self) -> Vec<Rational> {
        self.cylinders.iter().map(|c| c.modulus.clone()).collect()
    }

    pub fn convergence(&self) -> ConvergenceSums {
        convergence_sums(self)
    }

    pub fn no_parabolic(&self) -> ParabolicVerdict {
        no_parabolic(&self.moduli(), &Rational::integer(self.q as i64))
    }
}

/// Builds cylinders `1..=count` with every consistency check of the construction.
pub fn decompose(q: u32, count: u32) -> Result<Decomposition, BuildError> {
    if count == 0 {
        return Err(BuildError::BadParameters("need at least one cylinder".into()));
    }
    let tail = unit_tail(q)?;
    let chains = bottom_chains(q, count + 1)?;
    let mut cylinders = Vec::with_capacity(count as usize);
    for (i, bottom) in chains.iter().take(count as usize).enumerate() {
        let cyl = cylinder_from_bottom(q, bottom)?;
        check_crossing_table(&cyl)?;
        let fill = fill_in(q, bottom)?;
        let next = &chains[i + 1];
        let observed: BTreeSet<Rational> = next.y_hits.iter().map(|y| y + &fill.offset).collect();
        if observed != fill.predicted_next_hits() {
            return Err(BuildError::FusionFailed {
                k: cyl.k + 1,
                reason: "fill-in orbits disagree with the traced next bottom chain".into(),
            });
        }
        cylinders.push(cyl);
    }
    check_disjoint(&cylinders)?;
    let spine = spine(&tail, SPINE_SQUARES)?;
    for y in spine.section_hits() {
        if let Some(c) = cylinders.iter().find(|c| c.section_contains(&y)) {
            return Err(BuildError::SpineBroken(format!("spine height {y} lies inside cylinder {}", c.k)));
        }
    }
    let covered_area = cylinders.iter().map(|c| &c.area).sum();
    Ok(Decomposition { q, direction: special_slope(&tail), cylinders, spine, covered_area })
}

/// Strips of different cylinders never overlap.
fn check_disjoint(cylinders: &[Cylinder]) -> Result<(), BuildError> {
    let mut strips: Vec<(Rational, Rational, u32)> =
        cylinders.iter().flat_map(|c| c.strips().into_iter().map(move |(a, b)| (a, b, c.k))).collect();
    strips.sort();
    for w in strips.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(BuildError::SingularInsideInterval { k: w[1].2, y: w[1].0.clone() });
        }
    }
    if let Some(last) = strips.last() {
        if last.1 > Rational::one() {
            return Err(BuildError::SingularInsideInterval { k: last.2, y: last.1.clone() });
        }
    }
    Ok(())
}

/// Partial sums over the built cylinders together with their exact tails.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ConvergenceSums {
    pub cylinders: u32,
    /// `Σ crossings(□_1) · skew` over built cylinders; with its tail this is `l_1 = 1`.
    pub first_square_partial: Rational,
    pub first_square_tail: Rational,
    /// `Σ crossings(□_2) · skew`; with its tail this is `l_2 = 1/q`.
    pub second_square_partial: Rational,
    pub second_square_tail: Rational,
    pub area_partial: Rational,
    pub area_tail: Rational,
    /// For each built `k`: `Σ_{j=k..K} skew_j` plus tail equals `1/(q^(k-1)(2q-1))`.
    pub suffixes_telescope: bool,
}

impl ConvergenceSums {
    pub fn first_square_total(&self) -> Rational {
        &self.first_square_partial + &self.first_square_tail
    }

    pub fn second_square_total(&self) -> Rational {
        &self.second_square_partial + &self.second_square_tail
    }

    pub fn area_total(&self) -> Rational {
        &self.area_partial + &self.area_tail
    }
}

fn convergence_sums(d: &Decomposition) -> ConvergenceSums {
    let q = d.q;
    let big_k = d.cylinders.len() as u32;
    let weighted = |square: usize| -> Rational {
        d.cylinders
            .iter()
            .map(|c| Rational::integer(c.crossings.get(&square).copied().unwrap_or(0) as i64) * &c.skew_width)
            .sum()
    };
    let suffixes_telescope = d.cylinders.iter().all(|c| {
        let partial: Rational = d.cylinders[c.k as usize - 1..].iter().map(|c| &c.skew_width).sum();
        let tail = closed_form::skew_suffix(q, big_k + 1);
        partial + tail == closed_form::skew_suffix(q, c.k)
    });
    ConvergenceSums {
        cylinders: big_k,
        first_square_partial: weighted(1),
        first_square_tail: closed_form::first_square_coverage_tail(q, big_k),
        second_square_partial: weighted(2),
        second_square_tail: closed_form::second_square_coverage_tail(q, big_k),
        area_partial: d.covered_area.clone(),
        area_tail: closed_form::area_tail(q, big_k),
        suffixes_telescope,
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ParabolicVerdict {
    /// No parabolic element preserves the decomposition.
    pub holds: bool,
    pub moduli: Vec<Rational>,
    pub reason: String,
}

/// Moduli strictly increase and each step grows by at least `growth`, so they
/// are unbounded and no affine twist can act on all cylinders at once.
pub fn no_parabolic(moduli: &[Rational], growth: &Rational) -> ParabolicVerdict {
    let verdict = |holds, reason: String| ParabolicVerdict { holds, moduli: moduli.to_vec(), reason };
    if moduli.len() < 3 {
        return verdict(false, format!("need at least 3 cylinders, got {}", moduli.len()));
    }
    for (i, w) in moduli.windows(2).enumerate() {
        if w[1] <= w[0] {
            return verdict(
                false,
                format!("modulus {} = {} does not exceed modulus {} = {}", i + 2, w[1], i + 1, w[0]),
            );
        }
        if w[1] < &w[0] * growth {
            return verdict(false, format!("modulus {} = {} grows by less than {growth}", i + 2, w[1]));
        }
    }
    verdict(true, format!("moduli strictly increase with ratio at least {growth}"))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Horizontal,
    Vertical,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AxisCylinder {
    pub k: usize,
    pub width: Rational,
    pub circumference: Rational,
    pub modulus: Rational,
    pub area: Rational,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AxisDecomposition {
    pub kind: AxisKind,
    pub tail: Tail,
    pub cylinders: Vec<AxisCylinder>,
}

impl AxisDecomposition {
    pub fn moduli(&self) -> Vec<Rational> {
        self.cylinders.iter().map(|c| c.modulus.clone()).collect()
    }

    pub fn no_parabolic(&self) -> ParabolicVerdict {
        no_parabolic(&self.moduli(), &self.tail.r().recip())
    }
}

fn axis_cylinder(k: usize, width: Rational, circumference: Rational) -> AxisCylinder {
    AxisCylinder { k, modulus: &circumference / &width, area: &circumference * &width, width, circumference }
}

/// Horizontal cylinder `k` is the band `l_{k+1} < y < l_k` through `□_1..□_k`;
/// vertical cylinder `k` is `□_k` itself.
pub fn axis_decompositions(tail: &Tail, count: usize) -> (AxisDecomposition, AxisDecomposition) {
    let horizontal = (1..=count).map(|k| axis_cylinder(k, tail.side(k) - tail.side(k + 1), tail.offset(k))).collect();
    let vertical = (1..=count).map(|k| axis_cylinder(k, tail.side(k), tail.side(k))).collect();
    (
        AxisDecomposition { kind: AxisKind::Horizontal, tail: tail.clone(), cylinders: horizontal },
        AxisDecomposition { kind: AxisKind::Vertical, tail: tail.clone(), cylinders: vertical },
    )
}

/// Width of vertical cylinder `k` is the growth in circumference from
/// horizontal cylinder `k-1` to `k`, and its circumference is the total width
/// of the horizontal cylinders from `k` on.
pub fn axis_relations_hold(horizontal: &AxisDecomposition, vertical: &AxisDecomposition) -> bool {
    let tail = &horizontal.tail;
    let n = horizontal.cylinders.len();
    let beyond = tail.side(n + 1);
    horizontal.cylinders.iter().zip(&vertical.cylinders).enumerate().all(|(i, (h, v))| {
        let prev = if i == 0 { Rational::zero() } else { horizontal.cylinders[i - 1].circumference.clone() };
        let widths: Rational = horizontal.cylinders[i..].iter().map(|c| &c.width).sum();
        v.width == &h.circumference - &prev && v.circumference == widths + &beyond
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthComparison {
    SpineLonger,
    SpineShorter,
    Equal,
}

impl fmt::Display for LengthComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthComparison::SpineLonger => "spine longer",
            LengthComparison::SpineShorter => "spine shorter",
            LengthComparison::Equal => "equal",
        })
    }
}

/// The spine against the first bottom connection, by squared length.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub q: u32,
    pub spine_length_squared: Rational,
    pub bottom_length_squared: Rational,
    pub comparison: LengthComparison,
}

pub fn orthogonal_obstruction(q: u32) -> Result<ObstructionReport, BuildError> {
    let tail = unit_tail(q)?;
    let s = spine(&tail, SPINE_SQUARES)?;
    let bottom = first_bottom(q)?;
    let spine_length_squared = s.length_squared();
    let bottom_length_squared = bottom.length_squared(&special_slope(&tail));
    let comparison = match spine_length_squared.cmp(&bottom_length_squared) {
        std::cmp::Ordering::Greater => LengthComparison::SpineLonger,
        std::cmp::Ordering::Less => LengthComparison::SpineShorter,
        std::cmp::Ordering::Equal => LengthComparison::Equal,
    };
    Ok(ObstructionReport { q, spine_length_squared, bottom_length_squared, comparison })
}

/// Wire form of a [`Decomposition`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub q: u32,
    pub direction: Slope,
    pub spine: SpineRecord,
    pub cylinders: Vec<CylinderRecord>,
    pub covered_area: Rational,
    pub no_parabolic: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SpineRecord {
    pub start: Point,
    pub limit: Point,
    pub horizontal_displacement: Rational,
    pub length_squared: Rational,
    pub roof_ratio: Rational,
    pub section_hits: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CylinderRecord {
    pub k: u32,
    pub skew_width: Rational,
    pub width_squared: Rational,
    pub modulus: Rational,
    pub area: Rational,
    pub displacement: Rational,
    pub circumference_squared: Rational,
    pub y_hits: Vec<Rational>,
    pub crossings: BTreeMap<usize, u64>,
}

impl From<&Cylinder> for CylinderRecord {
    fn from(c: &Cylinder) -> Self {
        CylinderRecord {
            k: c.k,
            skew_width: c.skew_width.clone(),
            width_squared: c.width_squared.clone(),
            modulus: c.modulus.clone(),
            area: c.area.clone(),
            displacement: c.horizontal_displacement.clone(),
            circumference_squared: c.circumference_squared.clone(),
            y_hits: c.bottom.y_hits.iter().cloned().collect(),
            crossings: c.crossings.clone(),
        }
    }
}

impl From<&Spine> for SpineRecord {
    fn from(s: &Spine) -> Self {
        SpineRecord {
            start: s.trajectory.start.clone(),
            limit: s.limit.clone(),
            horizontal_displacement: s.horizontal_displacement.clone(),
            length_squared: s.length_squared(),
            roof_ratio: s.roof_ratio.clone(),
            section_hits: s.section_hits(),
        }
    }
}

impl Decomposition {
    pub fn to_record(&self) -> DecompositionRecord {
        DecompositionRecord {
            q: self.q,
            direction: self.direction.clone(),
            spine: (&self.spine).into(),
            cylinders: self.cylinders.iter().map(CylinderRecord::from).collect(),
            covered_area: self.covered_area.clone(),
            no_parabolic: self.cylinders.len() >= 3 && self.no_parabolic().holds,
        }
    }
}
