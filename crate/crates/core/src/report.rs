//! Drawing summary shared by the projector and the Alberti construction, and
//! its JSON form.
//!
//! All coordinates are canvas centimeters with the origin at the midpoint of
//! the canvas base. Both producers emit the same document shape, so a
//! rendered scene and its hand construction can be compared field by field.

use serde::Serialize;
use serde_json::{json, Value};

use crate::alberti::{distance_from_diagonal, AlbertiGrid};
use crate::projective::{CanvasElement, CanvasPoint, Direction};
use crate::projector::{distance_point_offset_cm, CanvasSegment, ProjectionReport};

pub const REPORT_SCHEMA: u64 = 1;
/// Significant digits kept when numbers are written to JSON.
pub const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawingKind {
    Projection,
    Alberti,
}

impl DrawingKind {
    pub fn name(self) -> &'static str {
        match self {
            DrawingKind::Projection => "projection",
            DrawingKind::Alberti => "alberti",
        }
    }
}

/// Where a family's images converge, in canvas cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VanishingPlace {
    Proper(CanvasPoint),
    /// Images are parallel on the canvas, running along this direction.
    Improper(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingMark {
    /// Short glyph label: `V`, `W`, `U1`, ...
    pub label: String,
    pub family: String,
    pub direction: Option<Direction>,
    pub place: VanishingPlace,
    pub consistent: bool,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drawing {
    pub kind: DrawingKind,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub segments: Vec<CanvasSegment>,
    pub horizon_height: f64,
    pub vanishing: Vec<VanishingMark>,
    pub distance_point: Option<CanvasPoint>,
    /// Eye-to-canvas distance read back off the drawn diagonals.
    pub diagonal_distance: Option<f64>,
    pub corners: Vec<Vec<CanvasPoint>>,
    pub clipped_count: usize,
}

fn glyph_label(d: Direction, next_u: &mut usize) -> String {
    let straight = Direction::new(0.0, 1.0, 0.0).expect("nonzero");
    let diagonal = Direction::new(1.0, 1.0, 0.0).expect("nonzero");
    if d.equiv(&straight) {
        "V".into()
    } else if d.equiv(&diagonal) {
        "W".into()
    } else {
        *next_u += 1;
        format!("U{next_u}")
    }
}

impl Drawing {
    pub fn from_projection(report: &ProjectionReport) -> Self {
        let frame = &report.frame;
        let mut next_u = 0;
        let vanishing = report
            .vanishing_points
            .iter()
            .map(|f| {
                let place = match f.point {
                    CanvasElement::Proper(p) => VanishingPlace::Proper(report.to_canvas_cm(p)),
                    CanvasElement::Improper(i) => {
                        let (du, dw) = i.canvas_direction();
                        VanishingPlace::Improper(du, dw)
                    }
                };
                VanishingMark {
                    label: glyph_label(f.direction, &mut next_u),
                    family: f.key.clone(),
                    direction: Some(f.direction),
                    place,
                    consistent: f.consistent,
                    deviation: f.deviation,
                }
            })
            .collect();
        Drawing {
            kind: DrawingKind::Projection,
            canvas_width: frame.canvas_width,
            canvas_height: frame.canvas_height,
            segments: report.segments_cm(),
            horizon_height: frame.horizon_height(),
            vanishing,
            distance_point: report.distance_point.map(|p| report.to_canvas_cm(p)),
            diagonal_distance: distance_point_offset_cm(report).ok(),
            corners: report
                .floor_corners
                .iter()
                .map(|row| row.iter().map(|&p| report.to_canvas_cm(p)).collect())
                .collect(),
            clipped_count: report.clipped_count,
        }
    }

    pub fn from_alberti(grid: &AlbertiGrid) -> Self {
        let side = grid.input.canvas_side;
        let segments: Vec<CanvasSegment> = grid.segments().cloned().collect();
        let diagonal_distance = distance_from_diagonal(&segments, grid.input.vp_height).ok();
        Drawing {
            kind: DrawingKind::Alberti,
            canvas_width: side,
            canvas_height: side,
            segments,
            horizon_height: grid.input.vp_height,
            vanishing: vec![VanishingMark {
                label: "V".into(),
                family: "orthogonals".into(),
                direction: Direction::new(0.0, 1.0, 0.0).ok(),
                place: VanishingPlace::Proper(grid.vanishing_point),
                consistent: true,
                deviation: None,
            }],
            distance_point: Some(grid.distance_point_a),
            diagonal_distance,
            corners: grid.corners.clone(),
            clipped_count: 0,
        }
    }

    pub fn distance_point_label(&self) -> &'static str {
        match self.kind {
            DrawingKind::Projection => "PD",
            DrawingKind::Alberti => "A",
        }
    }

    pub fn to_json(&self) -> String {
        let pt = |p: CanvasPoint| json!([p.u, p.w]);
        let segments: Vec<Value> = self
            .segments
            .iter()
            .map(|s| json!({"id": s.source_id, "style": s.style.name(), "start": pt(s.start), "end": pt(s.end)}))
            .collect();
        let vanishing: Vec<Value> = self
            .vanishing
            .iter()
            .map(|v| {
                let (kind, point, along) = match v.place {
                    VanishingPlace::Proper(p) => ("proper", pt(p), Value::Null),
                    VanishingPlace::Improper(du, dw) => ("improper", Value::Null, json!([du, dw])),
                };
                json!({
                    "label": v.label,
                    "family": v.family,
                    "direction": v.direction.map(|d| d.to_array().to_vec()),
                    "kind": kind,
                    "point": point,
                    "canvas_direction": along,
                    "consistent": v.consistent,
                    "deviation": v.deviation,
                })
            })
            .collect();
        let corners: Vec<Value> = self
            .corners
            .iter()
            .map(|row| Value::Array(row.iter().map(|&p| pt(p)).collect()))
            .collect();
        let doc = json!({
            "schema": REPORT_SCHEMA,
            "kind": self.kind.name(),
            "units": "cm",
            "origin": "canvas-base-center",
            "canvas": {"width": self.canvas_width, "height": self.canvas_height},
            "horizon": {"height": self.horizon_height},
            "segments": segments,
            "vanishing_points": vanishing,
            "distance_point": self.distance_point.map(pt),
            "diagonal_distance": self.diagonal_distance,
            "corners": corners,
            "clipped_count": self.clipped_count,
        });
        stable_json(doc)
    }
}

/// Rounds a float to [`JSON_DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", JSON_DIGITS - 1, x)
        .parse()
        .expect("float formatting round-trips");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and floats rounded for byte-stable output.
pub fn stable_json(mut v: Value) -> String {
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// [`stable_json`] for any serializable value.
pub fn to_stable_json<T: Serialize>(value: &T) -> String {
    stable_json(serde_json::to_value(value).expect("value serializes to JSON"))
}
