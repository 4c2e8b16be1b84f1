//! Deterministic SVG scenes.
//!
//! Geometry stays exact up to [`render_scene`], which maps every point through
//! one affine transform into drawing units and prints nine decimals. Element
//! order is fixed: surface outline, cylinder bands by `k`, paths, markers.

use std::fmt::Write as _;

use crate::chains::Spine;
use crate::decomposition::{AxisKind, Decomposition};
use crate::exact::{Point, Rational};
use crate::flow::{Segment, Trajectory};
use crate::surface::{EventKind, Tail};

const UNIT: f64 = 360.0;
const MARGIN: f64 = 20.0;
const MARKER_RADIUS: f64 = 2.5;

/// Band colours, cycled by cylinder index.
const PALETTE: [&str; 10] =
    ["#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c", "#fabebe"];
const PORTAL_COLOUR: &str = "#1f4fd6";
const ROOF_COLOUR: &str = "#d62728";
const SINGULAR_COLOUR: &str = "#000000";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PathClass {
    Chain,
    Spine,
    Trajectory,
}

impl PathClass {
    fn css(self) -> (&'static str, &'static str) {
        match self {
            PathClass::Chain => ("chain", "#000000"),
            PathClass::Spine => ("spine", "#8b4513"),
            PathClass::Trajectory => ("trajectory", "#333333"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MarkerClass {
    Portal,
    Roof,
    Singular,
}

impl MarkerClass {
    fn css(self) -> (&'static str, &'static str) {
        match self {
            MarkerClass::Portal => ("portal", PORTAL_COLOUR),
            MarkerClass::Roof => ("roof", ROOF_COLOUR),
            MarkerClass::Singular => ("singular", SINGULAR_COLOUR),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Band {
    pub k: u32,
    pub polygons: Vec<Vec<Point>>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Path {
    pub class: PathClass,
    pub segments: Vec<Segment>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Marker {
    pub class: MarkerClass,
    pub at: Point,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scene {
    pub tail: Tail,
    pub squares: usize,
    pub bands: Vec<Band>,
    pub paths: Vec<Path>,
    pub markers: Vec<Marker>,
}

impl Scene {
    pub fn surface(tail: &Tail, squares: usize) -> Scene {
        Scene { tail: tail.clone(), squares, bands: Vec::new(), paths: Vec::new(), markers: Vec::new() }
    }

    /// Adds a path and a marker at every boundary crossing of `t`.
    pub fn add_trajectory(&mut self, t: &Trajectory, class: PathClass) {
        self.paths.push(Path { class, segments: t.segments.clone() });
        for e in &t.events {
            let class = match e.kind {
                EventKind::Portal(_) | EventKind::Seam(_) => MarkerClass::Portal,
                EventKind::Roof(_) => MarkerClass::Roof,
                EventKind::SingularVertex => MarkerClass::Singular,
                EventKind::InteriorPass(_) => continue,
            };
            self.markers.push(Marker { class, at: e.at.clone() });
        }
    }
}

/// Keeps the part of a convex polygon on one side of a horizontal line.
fn clip(poly: &[Point], level: &Rational, keep_below: bool) -> Vec<Point> {
    let inside = |p: &Point| if keep_below { p.y <= *level } else { p.y >= *level };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        if inside(a) {
            out.push(a.clone());
        }
        if inside(a) != inside(b) && a.y != *level && b.y != *level {
            let t = (level - &a.y) / (&b.y - &a.y);
            out.push(Point::new(&a.x + &(t * (&b.x - &a.x)), level.clone()));
        }
    }
    out
}

fn shift_y(poly: Vec<Point>, dy: &Rational) -> Vec<Point> {
    poly.into_iter().map(|p| Point::new(p.x, p.y + dy)).collect()
}

/// Thickens each waist segment vertically by `half` on both sides, folding
/// whatever sticks out through the roof or floor back into the square.
fn band_polygons(tail: &Tail, waist: &Trajectory, half: &Rational) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    for seg in &waist.segments {
        let Ok(k) = tail.square_index(&seg.from.x) else { continue };
        let side = tail.side(k);
        let quad = vec![
            Point::new(seg.from.x.clone(), &seg.from.y - half),
            Point::new(seg.to.x.clone(), &seg.to.y - half),
            Point::new(seg.to.x.clone(), &seg.to.y + half),
            Point::new(seg.from.x.clone(), &seg.from.y + half),
        ];
        let zero = Rational::zero();
        let middle = clip(&clip(&quad, &side, true), &zero, false);
        let over = shift_y(clip(&quad, &side, false), &-&side);
        let under = shift_y(clip(&quad, &zero, true), &side);
        for poly in [middle, over, under] {
            if poly.len() >= 3 {
                out.push(poly);
            }
        }
    }
    out
}

/// Bands, bottom chains, spine and crossing markers of a decomposition.
pub fn decomposition_scene(d: &Decomposition, squares: usize) -> Scene {
    let mut scene = Scene::surface(&d.spine.tail, squares);
    for c in &d.cylinders {
        let half = &c.skew_width / Rational::integer(2);
        scene.bands.push(Band { k: c.k, polygons: band_polygons(&d.spine.tail, &c.waist, &half) });
    }
    for c in &d.cylinders {
        for piece in &c.bottom.pieces {
            scene.add_trajectory(piece, PathClass::Chain);
        }
    }
    scene.add_trajectory(&d.spine.trajectory, PathClass::Spine);
    scene
}

pub fn spine_scene(spine: &Spine, squares: usize) -> Scene {
    let mut scene = Scene::surface(&spine.tail, squares);
    scene.add_trajectory(&spine.trajectory, PathClass::Spine);
    scene
}

/// Horizontal bands `l_{k+1} < y < l_k` or the squares themselves, one band per cylinder.
pub fn axis_scene(tail: &Tail, kind: AxisKind, squares: usize) -> Scene {
    let mut scene = Scene::surface(tail, squares);
    let rect = |x0: Rational, x1: Rational, y0: Rational, y1: Rational| {
        vec![
            Point::new(x0.clone(), y0.clone()),
            Point::new(x1.clone(), y0),
            Point::new(x1, y1.clone()),
            Point::new(x0, y1),
        ]
    };
    for k in 1..=squares {
        let polygons = match kind {
            AxisKind::Horizontal => {
                (1..=k).map(|i| rect(tail.offset(i - 1), tail.offset(i), tail.side(k + 1), tail.side(k))).collect()
            }
            AxisKind::Vertical => vec![rect(tail.offset(k - 1), tail.offset(k), Rational::zero(), tail.side(k))],
        };
        scene.bands.push(Band { k: k as u32, polygons });
    }
    scene
}

fn num(v: f64) -> String {
    format!("{v:.9}")
}

pub fn render_scene(scene: &Scene) -> String {
    let tail = &scene.tail;
    let extent = tail.offset(scene.squares).to_f64();
    let width = 2.0 * MARGIN + UNIT * extent;
    let height = 2.0 * MARGIN + UNIT;
    let px = |p: &Point| (MARGIN + UNIT * p.x.to_f64(), MARGIN + UNIT * (1.0 - p.y.to_f64()));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, num(width), num(height));

    let _ = writeln!(s, r##"<g id="surface" fill="none" stroke="#000000" stroke-width="1">"##);
    for k in 1..=scene.squares {
        let (x, y) = px(&Point::new(tail.offset(k - 1), tail.side(k)));
        let side = UNIT * tail.side(k).to_f64();
        let _ = writeln!(
            s,
            r#"<rect class="square" data-k="{k}" x="{}" y="{}" width="{}" height="{}"/>"#,
            num(x),
            num(y),
            num(side),
            num(side)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="cylinders" stroke="none" fill-opacity="0.6">"#);
    for band in &scene.bands {
        let colour = PALETTE[(band.k as usize - 1) % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="cylinder" data-k="{}" fill="{colour}">"#, band.k);
        for poly in &band.polygons {
            let pts: Vec<String> = poly
                .iter()
                .map(|p| {
                    let (x, y) = px(p);
                    format!("{},{}", num(x), num(y))
                })
                .collect();
            let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="paths" fill="none" stroke-width="1">"#);
    for path in &scene.paths {
        let (class, colour) = path.class.css();
        let mut d = String::new();
        for seg in &path.segments {
            let (x0, y0) = px(&seg.from);
            let (x1, y1) = px(&seg.to);
            let _ = write!(d, "M{} {} L{} {} ", num(x0), num(y0), num(x1), num(y1));
        }
        let _ = writeln!(s, r#"<path class="{class}" stroke="{colour}" d="{}"/>"#, d.trim_end());
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="markers" stroke="none">"#);
    for m in &scene.markers {
        let (class, colour) = m.class.css();
        let (x, y) = px(&m.at);
        let _ = writeln!(
            s,
            r#"<circle class="marker {class}" cx="{}" cy="{}" r="{}" fill="{colour}"/>"#,
            num(x),
            num(y),
            num(MARKER_RADIUS)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
