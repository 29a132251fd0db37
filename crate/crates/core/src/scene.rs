//! Scene description in physical units.
//!
//! Physical frame (centimeters): `x` lateral, measured from the canvas
//! midline, positive to the right; `y` depth, measured forward from the eye;
//! `z` height above the floor. The eye is at `(0, 0, H)` and the canvas is the
//! vertical plane `y = D`.
//!
//! [`normalize`] maps this frame onto the eye-at-origin, canvas-at-`y = 1`
//! frame used by [`crate::projective`].

use std::fmt;

use serde::Serialize;

use crate::projective::{Direction, Point3};

/// Centimeters per braccio fiorentino (six braccia taken as 348 cm).
pub const DEFAULT_BRACCIO_CM: f64 = 58.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CanvasBase {
    /// The canvas base rests on the floor.
    Floor,
    /// The canvas base is this many cm above the floor.
    Height(f64),
}

impl CanvasBase {
    pub fn height(self) -> f64 {
        match self {
            CanvasBase::Floor => 0.0,
            CanvasBase::Height(h) => h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViewerFrame {
    /// Eye height above the floor, H.
    pub eye_height: f64,
    /// Eye-to-canvas distance, D.
    pub canvas_distance: f64,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub canvas_base: CanvasBase,
}

impl ViewerFrame {
    pub fn new(eye_height: f64, canvas_distance: f64, canvas_width: f64, canvas_height: f64) -> Self {
        Self {
            eye_height,
            canvas_distance,
            canvas_width,
            canvas_height,
            canvas_base: CanvasBase::Floor,
        }
    }

    pub fn canvas_base_on_floor(&self) -> bool {
        self.canvas_base.height() == 0.0
    }

    /// Height of the horizon (and of the principal vanishing point) above the
    /// canvas base.
    pub fn horizon_height(&self) -> f64 {
        self.eye_height - self.canvas_base.height()
    }

    pub fn canvas_diagonal(&self) -> f64 {
        self.canvas_width.hypot(self.canvas_height)
    }

    /// Normalized canvas coordinates to canvas centimeters, with the origin at
    /// the midpoint of the canvas base.
    pub fn to_canvas_cm(&self, u: f64, w: f64) -> (f64, f64) {
        let d = self.canvas_distance;
        (u * d, w * d + self.horizon_height())
    }

    pub fn from_canvas_cm(&self, u_cm: f64, w_cm: f64) -> (f64, f64) {
        let d = self.canvas_distance;
        (u_cm / d, (w_cm - self.horizon_height()) / d)
    }
}

/// A straight line of the scene. Without an extent it is infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneLine {
    pub anchor: Point3,
    pub direction: Direction,
    /// Parameter interval `[t0, t1]` along `direction` from `anchor`.
    pub extent: Option<(f64, f64)>,
    /// Declared family. Lines sharing a label are asserted to be parallel to
    /// the first member.
    pub family: Option<String>,
}

impl SceneLine {
    pub fn infinite(anchor: Point3, direction: Direction) -> Self {
        Self {
            anchor,
            direction,
            extent: None,
            family: None,
        }
    }
}

/// A rectangular tiling of the floor, starting at the canvas plane and
/// receding away from the eye.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiledFloor {
    /// Tile side parallel to the canvas.
    pub tile_width: f64,
    /// Tile side orthogonal to the canvas.
    pub tile_depth: f64,
    pub columns: u32,
    pub rows: u32,
    /// Lateral shift of the tiling's center from the canvas midline.
    pub origin_offset: f64,
}

impl TiledFloor {
    pub fn square(side: f64, columns: u32, rows: u32) -> Self {
        Self {
            tile_width: side,
            tile_depth: side,
            columns,
            rows,
            origin_offset: 0.0,
        }
    }

    pub fn is_square(&self) -> bool {
        self.tile_width == self.tile_depth
    }

    /// Lateral position of the `j`-th orthogonal edge, `j = 0..=columns`.
    pub fn edge_x(&self, j: u32) -> f64 {
        self.origin_offset + (f64::from(j) - f64::from(self.columns) / 2.0) * self.tile_width
    }

    /// Physical floor corner `(j, i)`; row `i = 0` lies in the canvas plane.
    pub fn corner(&self, frame: &ViewerFrame, j: u32, i: u32) -> Point3 {
        Point3::new(
            self.edge_x(j),
            frame.canvas_distance + f64::from(i) * self.tile_depth,
            0.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandingFigure {
    pub label: String,
    /// Lateral position on the floor.
    pub x: f64,
    /// Depth from the eye.
    pub depth: f64,
    pub height: f64,
}

impl StandingFigure {
    pub fn base(&self) -> Point3 {
        Point3::new(self.x, self.depth, 0.0)
    }

    pub fn top(&self) -> Point3 {
        Point3::new(self.x, self.depth, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scene {
    pub frame: ViewerFrame,
    pub lines: Vec<SceneLine>,
    pub floors: Vec<TiledFloor>,
    pub figures: Vec<StandingFigure>,
    pub braccio_cm: f64,
}

impl Scene {
    pub fn new(frame: ViewerFrame) -> Self {
        Self {
            frame,
            lines: Vec::new(),
            floors: Vec::new(),
            figures: Vec::new(),
            braccio_cm: DEFAULT_BRACCIO_CM,
        }
    }

    pub fn cm_to_braccia(&self, cm: f64) -> f64 {
        cm / self.braccio_cm
    }

    pub fn braccia_to_cm(&self, braccia: f64) -> f64 {
        braccia * self.braccio_cm
    }
}

/// Maps a physical point into the normalized frame: eye at the origin,
/// canvas at `y = 1`. The eye itself maps to the origin.
pub fn normalize(frame: &ViewerFrame, p: Point3) -> Point3 {
    let d = frame.canvas_distance;
    Point3::new(p.x / d, p.y / d, (p.z - frame.eye_height) / d)
}

pub fn denormalize(frame: &ViewerFrame, p: Point3) -> Point3 {
    let d = frame.canvas_distance;
    Point3::new(p.x * d, p.y * d, p.z * d + frame.eye_height)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.rule)
    }
}

fn positive(out: &mut Vec<Violation>, field: impl Into<String>, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(Violation::new(field, "must be positive"));
    }
}

fn finite(out: &mut Vec<Violation>, field: impl Into<String>, vs: &[f64]) {
    if vs.iter().any(|v| !v.is_finite()) {
        out.push(Violation::new(field, "must be finite"));
    }
}

/// Lists every broken invariant. An empty list means the scene is valid.
pub fn validate(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let f = &scene.frame;
    positive(&mut out, "eye_height_H", f.eye_height);
    positive(&mut out, "canvas_distance_D", f.canvas_distance);
    positive(&mut out, "canvas_width", f.canvas_width);
    positive(&mut out, "canvas_height", f.canvas_height);
    if let CanvasBase::Height(h) = f.canvas_base {
        if !(h.is_finite() && h >= 0.0) {
            out.push(Violation::new("canvas_base", "must be a non-negative height"));
        }
    }
    positive(&mut out, "braccio_cm", scene.braccio_cm);

    for (k, line) in scene.lines.iter().enumerate() {
        let field = format!("lines[{k}]");
        finite(&mut out, format!("{field}.anchor"), &line.anchor.to_array());
        let d = line.direction.to_array();
        if d.iter().any(|c| !c.is_finite()) || d.iter().all(|c| *c == 0.0) {
            out.push(Violation::new(
                format!("{field}.direction"),
                "must be nonzero and finite",
            ));
        }
        if let Some((t0, t1)) = line.extent {
            if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
                out.push(Violation::new(format!("{field}.extent"), "must satisfy from < to"));
            }
        }
    }
    for (k, floor) in scene.floors.iter().enumerate() {
        let field = format!("floors[{k}]");
        positive(&mut out, format!("{field}.tile_width_s_x"), floor.tile_width);
        positive(&mut out, format!("{field}.tile_depth_s_y"), floor.tile_depth);
        if floor.columns == 0 {
            out.push(Violation::new(format!("{field}.columns"), "must be positive"));
        }
        if floor.rows == 0 {
            out.push(Violation::new(format!("{field}.rows"), "must be positive"));
        }
        finite(&mut out, format!("{field}.origin_offset"), &[floor.origin_offset]);
    }
    for (k, fig) in scene.figures.iter().enumerate() {
        let field = format!("figures[{k}]");
        positive(&mut out, format!("{field}.height"), fig.height);
        positive(&mut out, format!("{field}.depth"), fig.depth);
        finite(&mut out, format!("{field}.x"), &[fig.x]);
    }
    out
}
