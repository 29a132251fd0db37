//! Forward projection of a [`Scene`] onto the canvas.
//!
//! Everything in a [`ProjectionReport`] is in normalized canvas coordinates
//! (canvas at distance 1, principal vanishing point at the origin). Use
//! [`ProjectionReport::to_canvas_cm`] for physical canvas positions.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::projective::{
    horizon, join, meet, project_point, vanishing_point, CanvasElement, CanvasLine, CanvasPoint, Direction, Pixel,
    Point3, ProjectiveError,
};
use crate::scene::{normalize, validate, Scene, TiledFloor, ViewerFrame, Violation};

/// Primitives are clipped to normalized depth `y >= CLIP_EPS` before projection.
pub const CLIP_EPS: f64 = 1e-9;
/// Agreement required between a family's vanishing point and the meet of its
/// member images, in normalized canvas units.
pub const VP_TOLERANCE: f64 = 1e-9;
/// Infinite lines are drawn at most this many canvas diagonals long.
pub const FAR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("segment lies behind the viewer")]
    BehindViewer,
    #[error("segment lies on a ray through the eye")]
    DegenerateRay,
    #[error("invalid scene: {}", list(.0))]
    InvalidScene(Vec<Violation>),
    #[error("distance point not applicable: the scene has no tiled floor")]
    NoFloor,
    #[error("distance point not applicable: diagonal not 45°, tiles are not square")]
    NotSquare,
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentStyle {
    Beam,
    TileEdge,
    Diagonal,
    Figure,
    Overlay,
}

impl SegmentStyle {
    pub fn name(self) -> &'static str {
        match self {
            SegmentStyle::Beam => "beam",
            SegmentStyle::TileEdge => "tile_edge",
            SegmentStyle::Diagonal => "diagonal",
            SegmentStyle::Figure => "figure",
            SegmentStyle::Overlay => "overlay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanvasSegment {
    pub start: CanvasPoint,
    pub end: CanvasPoint,
    pub source_id: String,
    pub style: SegmentStyle,
}

impl CanvasSegment {
    pub fn new(start: CanvasPoint, end: CanvasPoint, source_id: impl Into<String>, style: SegmentStyle) -> Self {
        Self {
            start,
            end,
            source_id: source_id.into(),
            style,
        }
    }

    pub fn line(&self) -> Result<CanvasLine, ProjectiveError> {
        join(self.start, self.end)
    }
}

/// Canvas image of a finite scene segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentImage {
    pub start: CanvasPoint,
    pub end: CanvasPoint,
    /// Part of the segment was behind the viewer and cut away.
    pub clipped: bool,
}

fn on_canvas(p: Point3) -> CanvasPoint {
    CanvasPoint::new(p.x / p.y, p.z / p.y)
}

fn same_ray(a: Point3, b: Point3) -> bool {
    match (project_point(a), project_point(b)) {
        (Ok(pa), Ok(pb)) => pa.equiv(&pb),
        _ => true,
    }
}

/// Projects a segment given in the normalized frame.
pub fn project_normalized_segment(a: Point3, b: Point3) -> Result<SegmentImage, ProjectionError> {
    if same_ray(a, b) {
        return Err(ProjectionError::DegenerateRay);
    }
    if a.y <= CLIP_EPS && b.y <= CLIP_EPS {
        return Err(ProjectionError::BehindViewer);
    }
    let cut = |behind: Point3, front: Point3| behind.lerp(front, (CLIP_EPS - behind.y) / (front.y - behind.y));
    let (a, b, clipped) = if a.y < CLIP_EPS {
        (cut(a, b), b, true)
    } else if b.y < CLIP_EPS {
        (a, cut(b, a), true)
    } else {
        (a, b, false)
    };
    Ok(SegmentImage {
        start: on_canvas(a),
        end: on_canvas(b),
        clipped,
    })
}

/// Projects a physical segment; see [`project_normalized_segment`].
pub fn project_segment(frame: &ViewerFrame, a: Point3, b: Point3) -> Result<SegmentImage, ProjectionError> {
    project_normalized_segment(normalize(frame, a), normalize(frame, b))
}

/// Finite drawing of an infinite normalized line: from where it crosses the
/// canvas plane toward its vanishing point, capped at `cap` canvas units.
fn project_normalized_line(
    anchor: Point3,
    d: Direction,
    cap: f64,
) -> Result<(CanvasPoint, CanvasPoint), ProjectionError> {
    let probe = anchor.offset(d, 1.0);
    if same_ray(anchor, probe) {
        return Err(ProjectionError::DegenerateRay);
    }
    if d.dy != 0.0 {
        let start = on_canvas(anchor.offset(d, (1.0 - anchor.y) / d.dy));
        let vp = CanvasPoint::new(d.dx / d.dy, d.dz / d.dy);
        let len = start.distance(vp);
        let end = if len > cap {
            let t = cap / len;
            CanvasPoint::new(start.u + t * (vp.u - start.u), start.w + t * (vp.w - start.w))
        } else {
            vp
        };
        Ok((start, end))
    } else {
        if anchor.y <= CLIP_EPS {
            return Err(ProjectionError::BehindViewer);
        }
        let c = on_canvas(anchor);
        let n = d.dx.hypot(d.dz);
        let (du, dw) = (cap * d.dx / n, cap * d.dz / n);
        Ok((
            CanvasPoint::new(c.u - du, c.w - dw),
            CanvasPoint::new(c.u + du, c.w + dw),
        ))
    }
}

/// Vanishing point of one family of parallel lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyVanishing {
    /// Declared family label, or the direction class key.
    pub key: String,
    pub label: Option<String>,
    pub direction: Direction,
    pub point: CanvasElement,
    pub members: usize,
    /// Meet of the first two distinct member images.
    pub member_meet: Option<CanvasElement>,
    /// Largest disagreement between `point` and a meet of member images.
    pub deviation: Option<f64>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejected {
    pub source_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub frame: ViewerFrame,
    pub segments: Vec<CanvasSegment>,
    pub vanishing_points: Vec<FamilyVanishing>,
    pub horizon: CanvasLine,
    pub distance_point: Option<CanvasPoint>,
    /// Whether the first tiled floor has square tiles, if there is a floor.
    pub floor_square: Option<bool>,
    /// Projected corners `[i][j]` of the first floor: row `i`, edge `j`.
    pub floor_corners: Vec<Vec<CanvasPoint>>,
    /// Primitives partly or wholly behind the viewer.
    pub clipped_count: usize,
    pub rejected: Vec<Rejected>,
}

impl ProjectionReport {
    pub fn to_canvas_cm(&self, p: CanvasPoint) -> CanvasPoint {
        let (u, w) = self.frame.to_canvas_cm(p.u, p.w);
        CanvasPoint::new(u, w)
    }

    pub fn segments_cm(&self) -> Vec<CanvasSegment> {
        self.segments
            .iter()
            .map(|s| CanvasSegment {
                start: self.to_canvas_cm(s.start),
                end: self.to_canvas_cm(s.end),
                ..s.clone()
            })
            .collect()
    }

    /// Canvas height of the horizon above the canvas base, in cm.
    pub fn horizon_height_cm(&self) -> f64 {
        self.frame.horizon_height()
    }

    pub fn family(&self, d: Direction) -> Option<&FamilyVanishing> {
        let key = d.class_key();
        self.vanishing_points.iter().find(|f| f.label.is_none() && f.key == key)
    }

    pub fn inconsistent_families(&self) -> impl Iterator<Item = &FamilyVanishing> {
        self.vanishing_points.iter().filter(|f| !f.consistent)
    }
}

enum Shape {
    Finite(Point3, Point3),
    Infinite(Point3, Direction),
}

struct Primitive {
    id: String,
    style: SegmentStyle,
    shape: Shape,
    /// Family grouping key and label; `None` for primitives outside any family.
    family: Option<(String, Option<String>, Direction)>,
}

enum Outcome {
    Drawn(CanvasSegment, bool),
    Rejected(String, ProjectionError),
}

fn floor_primitives(scene: &Scene, k: usize, floor: &TiledFloor, out: &mut Vec<Primitive>) {
    let f = &scene.frame;
    let class = |d: Direction| Some((d.class_key(), None, d));
    let orth = Direction {
        dx: 0.0,
        dy: 1.0,
        dz: 0.0,
    };
    let trans = Direction {
        dx: 1.0,
        dy: 0.0,
        dz: 0.0,
    };
    let diag = Direction {
        dx: floor.tile_width,
        dy: floor.tile_depth,
        dz: 0.0,
    };
    for j in 0..=floor.columns {
        out.push(Primitive {
            id: format!("floor[{k}].orth[{j}]"),
            style: SegmentStyle::TileEdge,
            shape: Shape::Finite(floor.corner(f, j, 0), floor.corner(f, j, floor.rows)),
            family: class(orth),
        });
    }
    for i in 0..=floor.rows {
        out.push(Primitive {
            id: format!("floor[{k}].trans[{i}]"),
            style: SegmentStyle::TileEdge,
            shape: Shape::Finite(floor.corner(f, 0, i), floor.corner(f, floor.columns, i)),
            family: class(trans),
        });
    }
    for i in 0..floor.rows {
        for j in 0..floor.columns {
            out.push(Primitive {
                id: format!("floor[{k}].diag[{j},{i}]"),
                style: SegmentStyle::Diagonal,
                shape: Shape::Finite(floor.corner(f, j, i), floor.corner(f, j + 1, i + 1)),
                family: class(diag),
            });
        }
    }
}

fn primitives(scene: &Scene) -> Vec<Primitive> {
    let mut out = Vec::new();
    for (k, line) in scene.lines.iter().enumerate() {
        let shape = match line.extent {
            Some((t0, t1)) => Shape::Finite(
                line.anchor.offset(line.direction, t0),
                line.anchor.offset(line.direction, t1),
            ),
            None => Shape::Infinite(line.anchor, line.direction),
        };
        let family = match &line.family {
            Some(label) => (format!("family:{label}"), Some(label.clone()), line.direction),
            None => (line.direction.class_key(), None, line.direction),
        };
        out.push(Primitive {
            id: format!("line[{k}]"),
            style: SegmentStyle::Beam,
            shape,
            family: Some(family),
        });
    }
    for (k, floor) in scene.floors.iter().enumerate() {
        floor_primitives(scene, k, floor, &mut out);
    }
    for (k, fig) in scene.figures.iter().enumerate() {
        out.push(Primitive {
            id: format!("figure[{k}]:{}", fig.label),
            style: SegmentStyle::Figure,
            shape: Shape::Finite(fig.base(), fig.top()),
            family: None,
        });
    }
    out
}

fn project_primitive(frame: &ViewerFrame, p: &Primitive) -> Outcome {
    let cap = FAR_FACTOR * frame.canvas_diagonal() / frame.canvas_distance;
    let result = match p.shape {
        Shape::Finite(a, b) => project_segment(frame, a, b).map(|img| (img.start, img.end, img.clipped)),
        Shape::Infinite(a, d) => project_normalized_line(normalize(frame, a), d, cap).map(|(s, e)| (s, e, false)),
    };
    match result {
        Ok((start, end, clipped)) => Outcome::Drawn(CanvasSegment::new(start, end, p.id.clone(), p.style), clipped),
        Err(e) => Outcome::Rejected(p.id.clone(), e),
    }
}

/// Image line of a primitive, from two of its own finite points.
fn member_image(frame: &ViewerFrame, shape: &Shape) -> Option<CanvasLine> {
    let (a, b) = match *shape {
        Shape::Finite(a, b) => (normalize(frame, a), normalize(frame, b)),
        Shape::Infinite(a, d) => {
            let a = normalize(frame, a);
            let len = (d.dx * d.dx + d.dy * d.dy + d.dz * d.dz).sqrt();
            let s = (a.x * a.x + a.y * a.y + a.z * a.z).sqrt().max(1.0) / len;
            (a, a.offset(d, s))
        }
    };
    join(project_point(a).ok()?, project_point(b).ok()?).ok()
}

/// Disagreement between two canvas elements: Euclidean distance, relative to
/// the reference's size beyond unit scale, for proper points; the sine of the
/// angle between the rays otherwise.
pub fn element_deviation(reference: CanvasElement, other: CanvasElement) -> f64 {
    match (reference, other) {
        (CanvasElement::Proper(p), CanvasElement::Proper(q)) => p.distance(q) / p.u.hypot(p.w).max(1.0),
        _ => reference.to_pixel().separation(&other.to_pixel()),
    }
}

fn family_vanishing(
    frame: &ViewerFrame,
    key: String,
    label: Option<String>,
    direction: Direction,
    members: &[&Primitive],
) -> FamilyVanishing {
    let point = vanishing_point(direction);
    let images: Vec<CanvasLine> = members.iter().filter_map(|m| member_image(frame, &m.shape)).collect();
    let mut member_meet = None;
    let mut deviation: Option<f64> = None;
    if let Some((first, rest)) = images.split_first() {
        for other in rest {
            if let Ok(m) = meet(first, other) {
                member_meet.get_or_insert(m);
                let dev = element_deviation(point, m);
                deviation = Some(deviation.map_or(dev, |d| d.max(dev)));
            }
        }
    }
    FamilyVanishing {
        key,
        label,
        direction,
        point,
        members: members.len(),
        member_meet,
        deviation,
        consistent: deviation.is_none_or(|d| d <= VP_TOLERANCE),
    }
}

/// Projects every primitive of the scene and gathers vanishing points, the
/// horizon, and (for a square-tiled floor) the distance point.
pub fn project_scene(scene: &Scene) -> Result<ProjectionReport, ProjectionError> {
    let violations = validate(scene);
    if !violations.is_empty() {
        return Err(ProjectionError::InvalidScene(violations));
    }
    let frame = scene.frame;
    let prims = primitives(scene);
    let outcomes: Vec<Outcome> = prims.par_iter().map(|p| project_primitive(&frame, p)).collect();

    let mut segments = Vec::with_capacity(outcomes.len());
    let mut rejected = Vec::new();
    let mut clipped_count = 0;
    for outcome in outcomes {
        match outcome {
            Outcome::Drawn(seg, clipped) => {
                clipped_count += usize::from(clipped);
                segments.push(seg);
            }
            Outcome::Rejected(source_id, e) => {
                if e == ProjectionError::BehindViewer {
                    clipped_count += 1;
                }
                rejected.push(Rejected {
                    source_id,
                    reason: e.to_string(),
                });
            }
        }
    }

    // Families in order of first appearance.
    let mut order: Vec<(String, Option<String>, Direction)> = Vec::new();
    for p in &prims {
        if let Some((key, label, dir)) = &p.family {
            if !order.iter().any(|(k, _, _)| k == key) {
                order.push((key.clone(), label.clone(), *dir));
            }
        }
    }
    let vanishing_points = order
        .into_iter()
        .map(|(key, label, dir)| {
            let members: Vec<&Primitive> = prims
                .iter()
                .filter(|p| p.family.as_ref().is_some_and(|(k, _, _)| *k == key))
                .collect();
            family_vanishing(&frame, key, label, dir, &members)
        })
        .collect();

    let first_floor = scene.floors.first();
    let distance_point = match scene.floors.iter().find(|f| f.is_square()) {
        Some(floor) => Some(diagonal_on_horizon(&frame, floor)?),
        None => None,
    };
    let floor_corners = first_floor.map_or_else(Vec::new, |floor| {
        (0..=floor.rows)
            .map(|i| {
                (0..=floor.columns)
                    .map(|j| on_canvas(normalize(&frame, floor.corner(&frame, j, i))))
                    .collect()
            })
            .collect()
    });

    Ok(ProjectionReport {
        frame,
        segments,
        vanishing_points,
        horizon: horizon(),
        distance_point,
        floor_square: first_floor.map(TiledFloor::is_square),
        floor_corners,
        clipped_count,
        rejected,
    })
}

/// Extends the image of the first tile's diagonal to the horizon.
fn diagonal_on_horizon(frame: &ViewerFrame, floor: &TiledFloor) -> Result<CanvasPoint, ProjectionError> {
    let a: Pixel = project_point(normalize(frame, floor.corner(frame, 0, 0)))?;
    let b: Pixel = project_point(normalize(frame, floor.corner(frame, 1, 1)))?;
    match meet(&join(a, b)?, &horizon())? {
        CanvasElement::Proper(p) => Ok(p),
        CanvasElement::Improper(_) => Err(ProjectionError::Projective(ProjectiveError::DegenerateMeet)),
    }
}

/// The distance point of the report's square-tiled floor.
pub fn distance_point(report: &ProjectionReport) -> Result<CanvasPoint, ProjectionError> {
    match (report.distance_point, report.floor_square) {
        (Some(p), _) => Ok(p),
        (None, None) => Err(ProjectionError::NoFloor),
        (None, Some(_)) => Err(ProjectionError::NotSquare),
    }
}

/// Canvas distance, in cm, between the distance point and the principal
/// vanishing point.
pub fn distance_point_offset_cm(report: &ProjectionReport) -> Result<f64, ProjectionError> {
    let a = report.to_canvas_cm(distance_point(report)?);
    let v = report.to_canvas_cm(CanvasPoint::new(0.0, 0.0));
    Ok(a.distance(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{SceneLine, StandingFigure};

    /// Frame whose normalized coordinates equal its physical ones shifted by
    /// one unit in z: ceiling z = 2 maps to +1, floor z = 0 to -1.
    fn unit_frame() -> ViewerFrame {
        ViewerFrame::new(1.0, 1.0, 4.0, 4.0)
    }

    fn d(x: f64, y: f64, z: f64) -> Direction {
        Direction::new(x, y, z).unwrap()
    }

    #[test]
    fn beam_sample_projects_to_its_image() {
        let img = project_normalized_segment(Point3::new(-1.0, 1.0, 1.0), Point3::new(-1.0, 10.0, 1.0)).unwrap();
        assert_eq!(img.start, CanvasPoint::new(-1.0, 1.0));
        assert!(img.end.distance(CanvasPoint::new(-0.1, 0.1)) < 1e-15);
        assert!(!img.clipped);
    }

    #[test]
    fn segment_in_canvas_plane_is_unchanged() {
        let frame = ViewerFrame::new(60.0, 145.0, 200.0, 140.0);
        let img = project_segment(&frame, Point3::new(-20.0, 145.0, 10.0), Point3::new(35.0, 145.0, 90.0)).unwrap();
        let s = frame.to_canvas_cm(img.start.u, img.start.w);
        let e = frame.to_canvas_cm(img.end.u, img.end.w);
        assert!((s.0 + 20.0).abs() < 1e-12 && (s.1 - 10.0).abs() < 1e-12);
        assert!((e.0 - 35.0).abs() < 1e-12 && (e.1 - 90.0).abs() < 1e-12);
    }

    #[test]
    fn segment_through_eye_plane_is_clipped() {
        let a = Point3::new(0.5, -5.0, 0.5);
        let b = Point3::new(0.5, 5.0, 0.5);
        let img = project_normalized_segment(a, b).unwrap();
        assert!(img.clipped);
        // Oracle: the cut point is (0.5, 1e-9, 0.5); its image is (0.5/1e-9, 0.5/1e-9).
        let limit = 0.5 / CLIP_EPS;
        assert!((img.start.u - limit).abs() <= 1e-6 * limit);
        assert!((img.start.w - limit).abs() <= 1e-6 * limit);
        assert!(img.start.is_finite());
        assert!(img.end.distance(CanvasPoint::new(0.1, 0.1)) < 1e-15);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            project_normalized_segment(Point3::new(0.0, -1.0, 0.0), Point3::new(1.0, -3.0, 2.0)),
            Err(ProjectionError::BehindViewer)
        );
        assert_eq!(
            project_normalized_segment(Point3::new(1.0, 2.0, 3.0), Point3::new(2.0, 4.0, 6.0)),
            Err(ProjectionError::DegenerateRay)
        );
    }

    fn beams(xs: &[f64], dir: Direction, anchor_y: f64) -> Scene {
        let mut scene = Scene::new(unit_frame());
        for &x in xs {
            scene
                .lines
                .push(SceneLine::infinite(Point3::new(x, anchor_y, 2.0), dir));
        }
        scene
    }

    #[test]
    fn three_axis_beams_meet_at_v() {
        let report = project_scene(&beams(&[-1.0, 0.0, 1.0], d(0.0, 1.0, 0.0), 1.0)).unwrap();
        assert_eq!(report.segments.len(), 3);
        assert_eq!(report.vanishing_points.len(), 1);
        let fam = &report.vanishing_points[0];
        assert_eq!(fam.point, CanvasPoint::new(0.0, 0.0).into());
        assert!(fam.consistent);
        assert!(fam.deviation.unwrap() <= 1e-12);
        for seg in &report.segments {
            assert_eq!(seg.end, CanvasPoint::new(0.0, 0.0));
        }
    }

    #[test]
    fn diagonal_beams_meet_at_w_one_unit_from_v() {
        // x = y, x = y - 1, x = y - 2 on the ceiling.
        let mut scene = Scene::new(unit_frame());
        for k in 0..3 {
            scene.lines.push(SceneLine::infinite(
                Point3::new(-f64::from(k), 0.0, 2.0),
                d(1.0, 1.0, 0.0),
            ));
        }
        let report = project_scene(&scene).unwrap();
        let w = report.vanishing_points[0].point.proper().unwrap();
        assert_eq!(w, CanvasPoint::new(1.0, 0.0));
        assert!(report.vanishing_points[0].deviation.unwrap() <= 1e-12);
        assert_eq!(w.distance(CanvasPoint::new(0.0, 0.0)), 1.0);
    }

    #[test]
    fn viewer_only_scene() {
        let report = project_scene(&Scene::new(unit_frame())).unwrap();
        assert!(report.segments.is_empty());
        assert!(report.vanishing_points.is_empty());
        assert!(report.horizon.equiv(&horizon()));
        assert_eq!(distance_point(&report), Err(ProjectionError::NoFloor));
    }

    #[test]
    fn invalid_scene_is_rejected() {
        let mut scene = Scene::new(unit_frame());
        scene.frame.canvas_distance = -1.0;
        assert!(matches!(project_scene(&scene), Err(ProjectionError::InvalidScene(v)) if v.len() == 1));
    }

    fn floor_scene(dist: f64, side: f64) -> Scene {
        let mut scene = Scene::new(ViewerFrame::new(60.0, dist, 300.0, 200.0));
        scene.floors.push(TiledFloor::square(side, 6, 8));
        scene
    }

    #[test]
    fn distance_point_measures_viewer_distance() {
        for dist in [100.0, 145.0] {
            for side in [10.0, 25.0, 40.0] {
                let report = project_scene(&floor_scene(dist, side)).unwrap();
                let offset = distance_point_offset_cm(&report).unwrap();
                assert!((offset - dist).abs() <= 1e-9 * dist, "D={dist} s={side}: {offset}");
                assert!(report.horizon.contains(distance_point(&report).unwrap()));
            }
        }
    }

    #[test]
    fn rectangular_tiles_have_no_distance_point() {
        let mut scene = floor_scene(100.0, 30.0);
        scene.floors[0].tile_depth = 45.0;
        let report = project_scene(&scene).unwrap();
        let err = distance_point(&report).unwrap_err();
        assert_eq!(err, ProjectionError::NotSquare);
        assert!(err.to_string().contains("diagonal not 45°"));
    }

    #[test]
    fn floor_families() {
        let report = project_scene(&floor_scene(100.0, 25.0)).unwrap();
        // orthogonals, transversals, diagonals
        assert_eq!(report.vanishing_points.len(), 3);
        let orth = report.family(d(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(orth.members, 7);
        assert!(orth.consistent);
        let trans = report.family(d(1.0, 0.0, 0.0)).unwrap();
        assert!(!trans.point.is_proper());
        assert!(trans.consistent);
        let diag = report.family(d(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(diag.members, 48);
        assert_eq!(report.floor_corners.len(), 9);
        assert_eq!(report.floor_corners[0].len(), 7);
        assert_eq!(report.segments.len(), 7 + 9 + 48);
    }

    #[test]
    fn figures_are_vertical_segments() {
        let mut scene = floor_scene(145.0, 40.0);
        scene.figures.push(StandingFigure {
            label: "a".into(),
            x: 30.0,
            depth: 290.0,
            height: 174.0,
        });
        let report = project_scene(&scene).unwrap();
        let fig = report
            .segments
            .iter()
            .find(|s| s.style == SegmentStyle::Figure)
            .unwrap();
        assert_eq!(fig.source_id, "figure[0]:a");
        assert_eq!(fig.start.u, fig.end.u);
        let base = report.to_canvas_cm(fig.start);
        let top = report.to_canvas_cm(fig.end);
        // Depth 290 is twice D: the figure is drawn at half size, base halfway to the horizon.
        assert!((base.w - 30.0).abs() < 1e-12);
        assert!((top.w - base.w - 87.0).abs() < 1e-12);
    }

    #[test]
    fn labeled_family_with_diverging_members_is_inconsistent() {
        let mut scene = Scene::new(unit_frame());
        for (x, dir) in [
            (-1.0, d(0.0, 1.0, 0.0)),
            (1.0, d(0.0, 1.0, 0.0)),
            (0.0, d(0.2, 1.0, 0.0)),
        ] {
            let mut line = SceneLine::infinite(Point3::new(x, 1.0, 2.0), dir);
            line.family = Some("beams".into());
            scene.lines.push(line);
        }
        let report = project_scene(&scene).unwrap();
        assert_eq!(report.vanishing_points.len(), 1);
        let fam = &report.vanishing_points[0];
        assert_eq!(fam.label.as_deref(), Some("beams"));
        assert!(!fam.consistent);
        assert!(fam.deviation.unwrap() > VP_TOLERANCE);
        assert_eq!(report.inconsistent_families().count(), 1);
    }

    #[test]
    fn line_parallel_to_canvas() {
        let mut scene = Scene::new(unit_frame());
        scene
            .lines
            .push(SceneLine::infinite(Point3::new(0.0, 2.0, 0.0), d(1.0, 0.0, 0.0)));
        scene
            .lines
            .push(SceneLine::infinite(Point3::new(0.0, -2.0, 0.0), d(1.0, 0.0, 0.0)));
        let report = project_scene(&scene).unwrap();
        assert_eq!(report.segments.len(), 1);
        assert_eq!(report.rejected.len(), 1);
        assert_eq!(report.clipped_count, 1);
        let seg = &report.segments[0];
        assert_eq!(seg.start.w, -0.5);
        assert_eq!(seg.end.w, -0.5);
    }

    #[test]
    fn line_through_eye_is_rejected() {
        let mut scene = Scene::new(unit_frame());
        scene
            .lines
            .push(SceneLine::infinite(Point3::new(0.0, 3.0, 1.0), d(0.0, 1.0, 0.0)));
        let report = project_scene(&scene).unwrap();
        assert!(report.segments.is_empty());
        assert_eq!(report.rejected[0].reason, "segment lies on a ray through the eye");
    }

    #[test]
    fn far_drawing_is_capped() {
        let mut scene = Scene::new(unit_frame());
        scene
            .lines
            .push(SceneLine::infinite(Point3::new(0.0, 1.0, 0.0), d(1.0, 1e-6, 0.0)));
        let report = project_scene(&scene).unwrap();
        let seg = &report.segments[0];
        let cap = FAR_FACTOR * unit_frame().canvas_diagonal();
        assert!((seg.start.distance(seg.end) - cap).abs() < 1e-9);
    }
}
