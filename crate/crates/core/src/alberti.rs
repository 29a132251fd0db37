//! Alberti's costruzione legittima, drawn directly on the canvas.
//!
//! Canvas coordinates here are centimeters with the origin at the midpoint
//! of the canvas base, `u` to the right and `w` up. Nothing in this module
//! projects 3D points; the grid comes from three 2D drawing steps.

use serde::Serialize;
use thiserror::Error;

use crate::projective::{join, meet, CanvasElement, CanvasPoint};
use crate::projector::{CanvasSegment, SegmentStyle};
use crate::scene::{Scene, TiledFloor, ViewerFrame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlbertiError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("drawing has no diagonal segment")]
    MissingDiagonal,
    #[error("drawing has no orthogonal from which to locate the vanishing point")]
    MissingVanishingPoint,
    #[error("diagonal {0} is parallel to the horizon and never meets it")]
    DiagonalParallelToHorizon(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlbertiInput {
    /// Side of the square canvas.
    pub canvas_side: f64,
    pub viewer_distance: f64,
    /// Height of the vanishing point above the base; the canvas center by default.
    pub vp_height: f64,
    pub tile_count: u32,
    pub tile_side: f64,
    /// Lateral shift of the base points from the canvas midline.
    pub base_offset: f64,
}

impl AlbertiInput {
    pub fn new(canvas_side: f64, viewer_distance: f64, tile_count: u32, tile_side: f64) -> Self {
        Self {
            canvas_side,
            viewer_distance,
            vp_height: canvas_side / 2.0,
            tile_count,
            tile_side,
            base_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), AlbertiError> {
        let fields = [
            ("canvas_side", self.canvas_side),
            ("viewer_distance", self.viewer_distance),
            ("vp_height", self.vp_height),
            ("tile_side", self.tile_side),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(AlbertiError::InvalidInput(format!("{name} must be positive")));
            }
        }
        if !self.base_offset.is_finite() {
            return Err(AlbertiError::InvalidInput("base_offset must be finite".into()));
        }
        let span = f64::from(self.tile_count) * self.tile_side;
        if span > self.canvas_side * (1.0 + 1e-12) {
            return Err(AlbertiError::InvalidInput(format!(
                "{} tiles of {} cm span {span} cm, wider than the {} cm base",
                self.tile_count, self.tile_side, self.canvas_side
            )));
        }
        Ok(())
    }

    pub fn vanishing_point(&self) -> CanvasPoint {
        CanvasPoint::new(0.0, self.vp_height)
    }

    /// Where the `j`-th floor line meets the canvas base.
    pub fn base_point(&self, j: u32) -> f64 {
        self.base_offset + (f64::from(j) - f64::from(self.tile_count) / 2.0) * self.tile_side
    }

    /// The 3D setup this drawing depicts: eye at `vp_height` above the floor,
    /// canvas base on the floor, floor tiled from the base away from the eye.
    pub fn equivalent_scene(&self) -> Scene {
        let frame = ViewerFrame::new(self.vp_height, self.viewer_distance, self.canvas_side, self.canvas_side);
        let mut scene = Scene::new(frame);
        scene.floors.push(TiledFloor {
            origin_offset: self.base_offset,
            ..TiledFloor::square(self.tile_side, self.tile_count, self.tile_count)
        });
        scene
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlbertiGrid {
    pub input: AlbertiInput,
    pub orthogonal_images: Vec<CanvasSegment>,
    /// Heights above the base of transversals `1..=tile_count`.
    pub transversal_heights: Vec<f64>,
    pub transversal_segments: Vec<CanvasSegment>,
    pub diagonal_segments: Vec<CanvasSegment>,
    /// Tile corners `[i][j]`, row `i = 0` on the base.
    pub corners: Vec<Vec<CanvasPoint>>,
    pub vanishing_point: CanvasPoint,
    pub distance_point_a: CanvasPoint,
}

impl AlbertiGrid {
    pub fn segments(&self) -> impl Iterator<Item = &CanvasSegment> {
        self.orthogonal_images
            .iter()
            .chain(&self.transversal_segments)
            .chain(&self.diagonal_segments)
    }
}

/// Step 1: join each base point of a floor line to the vanishing point.
pub fn step1_orthogonals(input: &AlbertiInput) -> Vec<CanvasSegment> {
    let vp = input.vanishing_point();
    (0..=input.tile_count)
        .map(|j| {
            CanvasSegment::new(
                CanvasPoint::new(input.base_point(j), 0.0),
                vp,
                format!("orth[{j}]"),
                SegmentStyle::TileEdge,
            )
        })
        .collect()
}

/// Step 2: heights of the transversals, from the side view.
///
/// Seen from the side, the eye sits `D` in front of the canvas at height
/// `vp_height`; the floor line `i*s` behind the canvas is seen through the
/// canvas at `vp_height * i*s / (D + i*s)`.
pub fn step2_heights(input: &AlbertiInput) -> Vec<f64> {
    let (d, s, h) = (input.viewer_distance, input.tile_side, input.vp_height);
    (1..=input.tile_count)
        .map(|i| {
            let depth = f64::from(i) * s;
            h * depth / (d + depth)
        })
        .collect()
}

/// Point of an orthogonal at a given height.
fn along(seg: &CanvasSegment, height: f64) -> CanvasPoint {
    let t = (height - seg.start.w) / (seg.end.w - seg.start.w);
    CanvasPoint::new(seg.start.u + t * (seg.end.u - seg.start.u), height)
}

/// Step 3: lay a horizontal at every height across the orthogonals.
pub fn step3_assemble(input: &AlbertiInput) -> Result<AlbertiGrid, AlbertiError> {
    input.validate()?;
    let orthogonals = step1_orthogonals(input);
    let heights = step2_heights(input);
    let (first, last) = (&orthogonals[0], &orthogonals[orthogonals.len() - 1]);

    let transversal_segments = heights
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            CanvasSegment::new(
                along(first, h),
                along(last, h),
                format!("trans[{}]", k + 1),
                SegmentStyle::TileEdge,
            )
        })
        .collect();

    let corners: Vec<Vec<CanvasPoint>> = std::iter::once(0.0)
        .chain(heights.iter().copied())
        .map(|h| orthogonals.iter().map(|o| along(o, h)).collect())
        .collect();

    let n = input.tile_count as usize;
    let mut diagonal_segments = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            diagonal_segments.push(CanvasSegment::new(
                corners[i][j],
                corners[i + 1][j + 1],
                format!("diag[{j},{i}]"),
                SegmentStyle::Diagonal,
            ));
        }
    }

    Ok(AlbertiGrid {
        input: *input,
        orthogonal_images: orthogonals,
        transversal_heights: heights,
        transversal_segments,
        diagonal_segments,
        corners,
        vanishing_point: input.vanishing_point(),
        distance_point_a: CanvasPoint::new(input.viewer_distance, input.vp_height),
    })
}

fn is_horizontal(seg: &CanvasSegment) -> bool {
    let len = seg.start.distance(seg.end);
    (seg.end.w - seg.start.w).abs() <= 1e-12 * len.max(f64::MIN_POSITIVE)
}

fn vanishing_point_of(drawing: &[CanvasSegment], horizon_height: f64) -> Result<CanvasPoint, AlbertiError> {
    let orthogonals: Vec<&CanvasSegment> = drawing
        .iter()
        .filter(|s| s.style == SegmentStyle::TileEdge && !is_horizontal(s))
        .collect();
    let first = orthogonals.first().ok_or(AlbertiError::MissingVanishingPoint)?;
    let first_line = first.line().map_err(|_| AlbertiError::MissingVanishingPoint)?;
    for other in &orthogonals[1..] {
        let Ok(line) = other.line() else { continue };
        if let Ok(CanvasElement::Proper(p)) = meet(&first_line, &line) {
            return Ok(p);
        }
    }
    Ok(along(first, horizon_height))
}

/// Recovers the eye-to-canvas distance from a drawn grid: each diagonal is
/// extended to the horizon at `A`, and `|A - VP|` is averaged.
pub fn distance_from_diagonal(drawing: &[CanvasSegment], horizon_height: f64) -> Result<f64, AlbertiError> {
    let vp = vanishing_point_of(drawing, horizon_height)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for seg in drawing.iter().filter(|s| s.style == SegmentStyle::Diagonal) {
        if is_horizontal(seg) {
            return Err(AlbertiError::DiagonalParallelToHorizon(seg.source_id.clone()));
        }
        let a = along(seg, horizon_height);
        total += a.distance(vp);
        count += 1;
    }
    if count == 0 {
        return Err(AlbertiError::MissingDiagonal);
    }
    Ok(total / count as f64)
}

/// Collinearity residual of three drawn points, scale-free.
pub fn corner_collinearity(p: CanvasPoint, q: CanvasPoint, r: CanvasPoint) -> f64 {
    let area = (q.u - p.u) * (r.w - p.w) - (q.w - p.w) * (r.u - p.u);
    let scale = p.distance(q).max(q.distance(r)).max(p.distance(r));
    area.abs() / (scale * scale).max(f64::MIN_POSITIVE)
}

/// Checks that the drawn orthogonals really are concurrent at the vanishing point.
pub fn orthogonals_concurrent(grid: &AlbertiGrid) -> bool {
    grid.orthogonal_images
        .iter()
        .all(|o| join(o.start, o.end).is_ok_and(|l| l.residual(grid.vanishing_point) <= 1e-12))
}
