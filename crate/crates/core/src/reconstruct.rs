//! Recovering the viewer and floor-standing figures from painting annotations.
//!
//! Annotation coordinates are centimeters measured on the painting from its
//! bottom-left corner: `[u, w]`, `u` to the right, `w` up.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projector::{ProjectionReport, SegmentStyle};

pub const ANNOTATION_SCHEMA: u64 = 1;
/// Knee height over figure height: a 174 cm figure has its knees at 60 cm.
pub const DEFAULT_KNEE_RATIO: f64 = 60.0 / 174.0;
/// Knee marks may disagree by this fraction of the canvas height.
pub const DEFAULT_KNEE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("malformed annotation JSON: {0}")]
    Json(String),
    #[error("unsupported annotation schema {0}, expected {ANNOTATION_SCHEMA}")]
    UnsupportedSchema(u64),
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("insufficient annotation: {0}")]
    InsufficientAnnotation(String),
    #[error("inconsistent annotation: knee marks of {} disagree", .0.join(", "))]
    InconsistentAnnotation(Vec<String>),
    #[error("distance not determinable: no diagonal is marked as a square-tile diagonal")]
    NotDeterminable,
    #[error("diagonal #{0} is parallel to the horizon")]
    DiagonalParallelToHorizon(usize),
    #[error("figure {0:?} has its base at or above the horizon")]
    BaseAtOrAboveHorizon(String),
}

/// A point marked on the painting, serialized as `[u, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Mark {
    pub u: f64,
    pub w: f64,
}

impl Mark {
    pub fn new(u: f64, w: f64) -> Self {
        Self { u, w }
    }
}

impl From<[f64; 2]> for Mark {
    fn from([u, w]: [f64; 2]) -> Self {
        Self { u, w }
    }
}

impl From<Mark> for [f64; 2] {
    fn from(m: Mark) -> Self {
        [m.u, m.w]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureMark {
    pub label: String,
    pub base: Mark,
    pub top: Mark,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knee: Option<Mark>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumed_real_height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalMark {
    pub p1: Mark,
    pub p2: Mark,
    pub assume_square_tile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub schema: u64,
    pub canvas_width: f64,
    pub canvas_height: f64,
    /// Height of the canvas base above the floor.
    #[serde(default)]
    pub canvas_base_height: f64,
    /// Horizon height above the canvas base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vp: Option<Mark>,
    #[serde(default)]
    pub figures: Vec<FigureMark>,
    #[serde(default)]
    pub diagonals: Vec<DiagonalMark>,
}

impl Annotation {
    pub fn new(canvas_width: f64, canvas_height: f64) -> Self {
        Self {
            schema: ANNOTATION_SCHEMA,
            canvas_width,
            canvas_height,
            canvas_base_height: 0.0,
            horizon_height: None,
            vp: None,
            figures: Vec::new(),
            diagonals: Vec::new(),
        }
    }

    /// Parses and validates an annotation document.
    pub fn from_json(text: &str) -> Result<Self, ReconstructError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ReconstructError::Json(e.to_string()))?;
        match value.get("schema").and_then(serde_json::Value::as_u64) {
            Some(ANNOTATION_SCHEMA) => {}
            Some(other) => return Err(ReconstructError::UnsupportedSchema(other)),
            None => return Err(ReconstructError::Json("missing integer field `schema`".into())),
        }
        let ann: Annotation = serde_json::from_value(value).map_err(|e| ReconstructError::Json(e.to_string()))?;
        ann.validate()?;
        Ok(ann)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotation serializes")
    }

    pub fn validate(&self) -> Result<(), ReconstructError> {
        let bad = |m: String| Err(ReconstructError::InvalidAnnotation(m));
        for (name, v) in [
            ("canvas_width", self.canvas_width),
            ("canvas_height", self.canvas_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.canvas_base_height.is_finite() && self.canvas_base_height >= 0.0) {
            return bad("canvas_base_height must be non-negative".into());
        }
        if let Some(h) = self.horizon_height {
            if !h.is_finite() {
                return bad("horizon_height must be finite".into());
            }
        }
        let slack_u = 1e-9 * self.canvas_width;
        let slack_w = 1e-9 * self.canvas_height;
        let inside = |what: String, m: Mark| {
            let ok = m.u.is_finite()
                && m.w.is_finite()
                && (-slack_u..=self.canvas_width + slack_u).contains(&m.u)
                && (-slack_w..=self.canvas_height + slack_w).contains(&m.w);
            if ok {
                Ok(())
            } else {
                bad(format!("{what} [{}, {}] lies outside the canvas", m.u, m.w))
            }
        };
        if let Some(vp) = self.vp {
            inside("vp".into(), vp)?;
        }
        for f in &self.figures {
            inside(format!("figure {:?} base", f.label), f.base)?;
            inside(format!("figure {:?} top", f.label), f.top)?;
            if let Some(k) = f.knee {
                inside(format!("figure {:?} knee", f.label), k)?;
            }
            if f.top.w <= f.base.w {
                return bad(format!("figure {:?} has its top not above its base", f.label));
            }
            if let Some(h) = f.assumed_real_height {
                if !(h.is_finite() && h > 0.0) {
                    return bad(format!("figure {:?} assumed_real_height must be positive", f.label));
                }
            }
        }
        for (k, d) in self.diagonals.iter().enumerate() {
            inside(format!("diagonal #{k} p1"), d.p1)?;
            inside(format!("diagonal #{k} p2"), d.p2)?;
        }
        Ok(())
    }

    /// Horizontal position of the principal vanishing point; the canvas
    /// midline when no vanishing point is marked.
    pub fn principal_u(&self) -> f64 {
        self.vp.map_or(self.canvas_width / 2.0, |v| v.u)
    }

    /// Exact annotation of a rendered scene: horizon, vanishing point, every
    /// figure's base and top, and up to three tile diagonals. Marks falling
    /// outside the canvas are left out.
    pub fn from_projection(report: &ProjectionReport) -> Self {
        let f = &report.frame;
        let mut ann = Annotation::new(f.canvas_width, f.canvas_height);
        ann.canvas_base_height = f.canvas_base.height();
        let hz = f.horizon_height();
        ann.horizon_height = Some(hz);
        let half = f.canvas_width / 2.0;
        let on_canvas = |m: Mark| (0.0..=f.canvas_width).contains(&m.u) && (0.0..=f.canvas_height).contains(&m.w);
        let vp = Mark::new(half, hz);
        if on_canvas(vp) {
            ann.vp = Some(vp);
        }
        let segs = report.segments_cm();
        for s in segs.iter().filter(|s| s.style == SegmentStyle::Figure) {
            let base = Mark::new(s.start.u + half, s.start.w);
            let top = Mark::new(s.end.u + half, s.end.w);
            if on_canvas(base) && on_canvas(top) {
                let label = s.source_id.split_once(':').map_or(s.source_id.as_str(), |(_, l)| l);
                ann.figures.push(FigureMark {
                    label: label.to_string(),
                    base,
                    top,
                    knee: None,
                    assumed_real_height: None,
                });
            }
        }
        let square = report.floor_square == Some(true);
        let diagonals: Vec<DiagonalMark> = segs
            .iter()
            .filter(|s| s.style == SegmentStyle::Diagonal)
            .map(|s| DiagonalMark {
                p1: Mark::new(s.start.u + half, s.start.w),
                p2: Mark::new(s.end.u + half, s.end.w),
                assume_square_tile: square,
            })
            .filter(|d| on_canvas(d.p1) && on_canvas(d.p2))
            .collect();
        if !diagonals.is_empty() {
            let picks = [0, diagonals.len() / 2, diagonals.len() - 1];
            for (k, &i) in picks.iter().enumerate() {
                if k == 0 || i != picks[k - 1] {
                    ann.diagonals.push(diagonals[i].clone());
                }
            }
        }
        ann
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructOptions {
    pub knee_ratio: f64,
    /// Allowed spread of knee marks, as a fraction of the canvas height.
    pub knee_tolerance: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            knee_ratio: DEFAULT_KNEE_RATIO,
            knee_tolerance: DEFAULT_KNEE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightMethod {
    HorizonMark,
    KneeRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    DistancePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub mark: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightEstimate {
    /// Eye height above the floor, H.
    pub eye_height: f64,
    /// Horizon height above the canvas base.
    pub horizon_height: f64,
    pub method: HeightMethod,
    pub residuals: Vec<Residual>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceEstimate {
    pub distance: f64,
    pub method: DistanceMethod,
    /// Per-diagonal deviation from the mean.
    pub residuals: Vec<Residual>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewerEstimate {
    #[serde(rename = "H")]
    pub eye_height: f64,
    #[serde(rename = "D")]
    pub distance: f64,
    pub horizon_height: f64,
    #[serde(rename = "method_H")]
    pub method_h: HeightMethod,
    #[serde(rename = "method_D")]
    pub method_d: DistanceMethod,
    pub residuals: Vec<Residual>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePlacement {
    pub label: String,
    /// Lateral offset from the line of sight.
    pub x: f64,
    /// Horizontal distance from the eye.
    pub depth: f64,
    pub real_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub viewer: ViewerEstimate,
    pub figures: Vec<FigurePlacement>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Eye height from a horizon mark, or from knees resting on the horizon.
pub fn estimate_h(ann: &Annotation, opts: &ReconstructOptions) -> Result<HeightEstimate, ReconstructError> {
    let base = ann.canvas_base_height;
    let knees: Vec<(&FigureMark, Mark)> = ann.figures.iter().filter_map(|f| f.knee.map(|k| (f, k))).collect();

    // An explicit horizon wins; a vanishing point only stands in when no knee is marked.
    let marked = ann
        .horizon_height
        .or(if knees.is_empty() { ann.vp.map(|v| v.w) } else { None });
    if let Some(h) = marked {
        let residuals = knees
            .iter()
            .map(|(f, k)| Residual {
                mark: format!("knee:{}", f.label),
                value: k.w - h,
            })
            .collect();
        return Ok(HeightEstimate {
            eye_height: h + base,
            horizon_height: h,
            method: HeightMethod::HorizonMark,
            residuals,
        });
    }

    if knees.is_empty() {
        return Err(ReconstructError::InsufficientAnnotation(
            "need a horizon height, a vanishing point, or knee marks".into(),
        ));
    }
    let reference = median(&mut knees.iter().map(|(_, k)| k.w).collect::<Vec<_>>());
    let tol = opts.knee_tolerance * ann.canvas_height;
    let offenders: Vec<String> = knees
        .iter()
        .filter(|(_, k)| (k.w - reference).abs() > tol)
        .map(|(f, _)| f.label.clone())
        .collect();
    if !offenders.is_empty() {
        return Err(ReconstructError::InconsistentAnnotation(offenders));
    }
    let sized: Vec<f64> = knees.iter().filter_map(|(f, _)| f.assumed_real_height).collect();
    if sized.is_empty() {
        return Err(ReconstructError::InsufficientAnnotation(
            "knee rule needs assumed_real_height on a knee-marked figure".into(),
        ));
    }
    let eye_height = opts.knee_ratio * sized.iter().sum::<f64>() / sized.len() as f64;
    let horizon_height = knees.iter().map(|(_, k)| k.w).sum::<f64>() / knees.len() as f64;
    let residuals = knees
        .iter()
        .map(|(f, k)| Residual {
            mark: format!("knee:{}", f.label),
            value: k.w - horizon_height,
        })
        .chain(std::iter::once(Residual {
            mark: "knee_rule_vs_horizon".into(),
            value: horizon_height + base - eye_height,
        }))
        .collect();
    Ok(HeightEstimate {
        eye_height,
        horizon_height,
        method: HeightMethod::KneeRule,
        residuals,
    })
}

/// Eye-to-canvas distance from square-tile diagonals extended to the horizon.
pub fn estimate_d(ann: &Annotation, horizon_height: f64) -> Result<DistanceEstimate, ReconstructError> {
    let vp = ann
        .vp
        .ok_or_else(|| ReconstructError::InsufficientAnnotation("distance needs a vanishing point mark".into()))?;
    let mut distances = Vec::new();
    for (k, d) in ann.diagonals.iter().enumerate().filter(|(_, d)| d.assume_square_tile) {
        let dw = d.p2.w - d.p1.w;
        let len = (d.p2.u - d.p1.u).hypot(dw);
        if dw.abs() <= 1e-12 * len || len == 0.0 {
            return Err(ReconstructError::DiagonalParallelToHorizon(k));
        }
        let pd_u = d.p1.u + (horizon_height - d.p1.w) * (d.p2.u - d.p1.u) / dw;
        distances.push((k, (pd_u - vp.u).abs()));
    }
    if distances.is_empty() {
        return Err(ReconstructError::NotDeterminable);
    }
    let distance = distances.iter().map(|(_, d)| d).sum::<f64>() / distances.len() as f64;
    let residuals = distances
        .iter()
        .map(|(k, d)| Residual {
            mark: format!("diagonal#{k}"),
            value: d - distance,
        })
        .collect();
    Ok(DistanceEstimate {
        distance,
        method: DistanceMethod::DistancePoint,
        residuals,
    })
}

/// Places a figure on the floor by following the sight line through its base mark.
pub fn locate_figure(
    ann: &Annotation,
    eye_height: f64,
    distance: f64,
    mark: &FigureMark,
) -> Result<FigurePlacement, ReconstructError> {
    place(ann, eye_height, eye_height - ann.canvas_base_height, distance, mark)
}

/// As [`locate_figure`], with the horizon read off the painting rather than
/// derived from `eye_height`. The two differ when the knee rule's height
/// disagrees with where the knees were painted.
fn place(
    ann: &Annotation,
    eye_height: f64,
    horizon: f64,
    distance: f64,
    mark: &FigureMark,
) -> Result<FigurePlacement, ReconstructError> {
    let t = mark.base.w;
    if t >= horizon {
        return Err(ReconstructError::BaseAtOrAboveHorizon(mark.label.clone()));
    }
    let depth = distance * eye_height / (horizon - t);
    let scale = depth / distance;
    Ok(FigurePlacement {
        label: mark.label.clone(),
        x: (mark.base.u - ann.principal_u()) * scale,
        depth,
        real_height: eye_height + (mark.top.w - horizon) * scale,
    })
}

/// Full inverse pipeline: H, then D, then every figure.
pub fn reconstruct(ann: &Annotation, opts: &ReconstructOptions) -> Result<Reconstruction, ReconstructError> {
    ann.validate()?;
    let h = estimate_h(ann, opts)?;
    let d = estimate_d(ann, h.horizon_height)?;
    let figures = ann
        .figures
        .iter()
        .map(|f| place(ann, h.eye_height, h.horizon_height, d.distance, f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut residuals = h.residuals;
    residuals.extend(d.residuals);
    Ok(Reconstruction {
        viewer: ViewerEstimate {
            eye_height: h.eye_height,
            distance: d.distance,
            horizon_height: h.horizon_height,
            method_h: h.method,
            method_d: d.method,
            residuals,
        },
        figures,
    })
}
