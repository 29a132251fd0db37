//! Deterministic SVG output for a [`Drawing`].
//!
//! Canvas centimeters are mapped to the viewport by one uniform scale with
//! `w` flipped so that up is up. Every coordinate is written with three
//! decimals, so equal drawings give byte-equal files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::projective::CanvasPoint;
use crate::projector::SegmentStyle;
use crate::report::{Drawing, VanishingPlace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("viewport must be at least one pixel wide and high, got {0}x{1}")]
    ZeroViewport(u32, u32),
    #[error("margin {0} leaves no room inside the viewport")]
    BadMargin(f64),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub color: String,
    pub width: f64,
    pub dash: Option<String>,
}

impl Stroke {
    pub fn solid(color: &str, width: f64) -> Self {
        Self {
            color: color.into(),
            width,
            dash: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub viewport_w: u32,
    pub viewport_h: u32,
    pub margin: f64,
    pub show_horizon: bool,
    pub show_vps: bool,
    pub show_improper_labels: bool,
    pub style_map: BTreeMap<SegmentStyle, Stroke>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        let style_map = BTreeMap::from([
            (SegmentStyle::Beam, Stroke::solid("#5b3a1e", 1.5)),
            (SegmentStyle::TileEdge, Stroke::solid("#333333", 1.0)),
            (
                SegmentStyle::Diagonal,
                Stroke {
                    dash: Some("2 2".into()),
                    ..Stroke::solid("#1f5fa8", 0.75)
                },
            ),
            (SegmentStyle::Figure, Stroke::solid("#a8321f", 2.0)),
            (SegmentStyle::Overlay, Stroke::solid("#888888", 0.5)),
        ]);
        Self {
            viewport_w: 800,
            viewport_h: 600,
            margin: 20.0,
            show_horizon: true,
            show_vps: true,
            show_improper_labels: true,
            style_map,
        }
    }
}

/// Fixed three-decimal formatting; negative zero prints as zero.
fn num(x: f64, what: &str) -> Result<String, SvgError> {
    if !x.is_finite() {
        return Err(SvgError::NonFinite(what.to_string()));
    }
    let s = format!("{x:.3}");
    Ok(if s == "-0.000" { "0.000".into() } else { s })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Window in canvas cm: `[u0, u1] x [w0, w1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Window {
    u0: f64,
    u1: f64,
    w0: f64,
    w1: f64,
}

impl Window {
    fn include(&mut self, p: CanvasPoint) {
        self.u0 = self.u0.min(p.u);
        self.u1 = self.u1.max(p.u);
        self.w0 = self.w0.min(p.w);
        self.w1 = self.w1.max(p.w);
    }

    fn contains(&self, p: CanvasPoint) -> bool {
        (self.u0..=self.u1).contains(&p.u) && (self.w0..=self.w1).contains(&p.w)
    }

    /// Liang-Barsky clipping of the segment `a -> b` to the window.
    fn clip(&self, a: CanvasPoint, b: CanvasPoint) -> Option<(CanvasPoint, CanvasPoint)> {
        let (du, dw) = (b.u - a.u, b.w - a.w);
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-du, a.u - self.u0),
            (du, self.u1 - a.u),
            (-dw, a.w - self.w0),
            (dw, self.w1 - a.w),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 > t1 {
            return None;
        }
        let at = |t: f64| CanvasPoint::new(a.u + t * du, a.w + t * dw);
        Some((at(t0), at(t1)))
    }
}

struct Mapping {
    scale: f64,
    ox: f64,
    oy: f64,
    window: Window,
}

impl Mapping {
    fn px(&self, p: CanvasPoint) -> (f64, f64) {
        (
            self.ox + (p.u - self.window.u0) * self.scale,
            self.oy + (self.window.w1 - p.w) * self.scale,
        )
    }
}

fn fit(drawing: &Drawing, opts: &RenderOptions) -> Result<Mapping, SvgError> {
    let half = drawing.canvas_width / 2.0;
    let mut window = Window {
        u0: -half,
        u1: half,
        w0: 0.0,
        w1: drawing.canvas_height,
    };
    let center = CanvasPoint::new(0.0, drawing.canvas_height / 2.0);
    let reach = 2.0 * drawing.canvas_width.hypot(drawing.canvas_height);
    let marks = drawing
        .vanishing
        .iter()
        .filter_map(|v| match v.place {
            VanishingPlace::Proper(p) => Some(p),
            VanishingPlace::Improper(..) => None,
        })
        .chain(drawing.distance_point)
        .chain(std::iter::once(CanvasPoint::new(0.0, drawing.horizon_height)));
    for p in marks {
        if p.is_finite() && p.distance(center) <= reach {
            window.include(p);
        }
    }
    let (ww, wh) = (window.u1 - window.u0, window.w1 - window.w0);
    if !(ww.is_finite() && wh.is_finite() && ww > 0.0 && wh > 0.0) {
        return Err(SvgError::NonFinite("canvas size".into()));
    }
    let inner_w = f64::from(opts.viewport_w) - 2.0 * opts.margin;
    let inner_h = f64::from(opts.viewport_h) - 2.0 * opts.margin;
    let scale = (inner_w / ww).min(inner_h / wh);
    Ok(Mapping {
        scale,
        ox: opts.margin + (inner_w - ww * scale) / 2.0,
        oy: opts.margin + (inner_h - wh * scale) / 2.0,
        window,
    })
}

fn stroke_attrs(s: &Stroke) -> Result<String, SvgError> {
    let mut out = format!(
        r#"stroke="{}" stroke-width="{}""#,
        escape(&s.color),
        num(s.width, "stroke width")?
    );
    if let Some(d) = &s.dash {
        let _ = write!(out, r#" stroke-dasharray="{}""#, escape(d));
    }
    Ok(out)
}

/// Renders segments in drawing order, then the horizon, then vanishing and
/// distance point glyphs.
pub fn emit_svg(drawing: &Drawing, opts: &RenderOptions) -> Result<String, SvgError> {
    if opts.viewport_w == 0 || opts.viewport_h == 0 {
        return Err(SvgError::ZeroViewport(opts.viewport_w, opts.viewport_h));
    }
    let (vw, vh) = (f64::from(opts.viewport_w), f64::from(opts.viewport_h));
    if !(opts.margin.is_finite() && opts.margin >= 0.0 && 2.0 * opts.margin < vw.min(vh)) {
        return Err(SvgError::BadMargin(opts.margin));
    }
    let map = fit(drawing, opts)?;
    let fallback = Stroke::solid("#000000", 1.0);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.viewport_w,
        h = opts.viewport_h
    );
    let _ = writeln!(out, r#"<g fill="none" stroke-linecap="round">"#);
    for s in &drawing.segments {
        if !(s.start.is_finite() && s.end.is_finite()) {
            return Err(SvgError::NonFinite(s.source_id.clone()));
        }
        let Some((a, b)) = map.window.clip(s.start, s.end) else {
            continue;
        };
        let ((x0, y0), (x1, y1)) = (map.px(a), map.px(b));
        let stroke = opts.style_map.get(&s.style).unwrap_or(&fallback);
        let _ = writeln!(
            out,
            r#"<path class="{}" data-id="{}" d="M {} {} L {} {}" {}/>"#,
            s.style.name(),
            escape(&s.source_id),
            num(x0, &s.source_id)?,
            num(y0, &s.source_id)?,
            num(x1, &s.source_id)?,
            num(y1, &s.source_id)?,
            stroke_attrs(stroke)?
        );
    }
    out.push_str("</g>\n");

    if opts.show_horizon {
        let hz = drawing.horizon_height;
        if !hz.is_finite() {
            return Err(SvgError::NonFinite("horizon".into()));
        }
        let (x0, y) = map.px(CanvasPoint::new(map.window.u0, hz));
        let (x1, _) = map.px(CanvasPoint::new(map.window.u1, hz));
        let _ = writeln!(
            out,
            r##"<line class="horizon" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#444444" stroke-width="1.000" stroke-dasharray="6 4"/>"##,
            num(x0, "horizon")?,
            num(y, "horizon")?,
            num(x1, "horizon")?,
            num(y, "horizon")?
        );
    }

    if opts.show_vps {
        let mut glyph = |p: CanvasPoint, label: &str, class: &str| -> Result<(), SvgError> {
            if !map.window.contains(p) {
                return Ok(());
            }
            let (x, y) = map.px(p);
            let _ = writeln!(
                out,
                r##"<circle class="{class}" cx="{}" cy="{}" r="4" fill="none" stroke="#000000" stroke-width="1.000"/>"##,
                num(x, label)?,
                num(y, label)?
            );
            // Labels on the right half sit left of the glyph so they stay in view.
            let (dx, anchor) = if x > vw / 2.0 { (-6.0, "end") } else { (6.0, "start") };
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
                num(x + dx, label)?,
                num(y - 6.0, label)?,
                escape(label)
            );
            Ok(())
        };
        for v in &drawing.vanishing {
            if let VanishingPlace::Proper(p) = v.place {
                let class = if v.consistent { "vp" } else { "vp inconsistent" };
                glyph(p, &v.label, class)?;
            }
        }
        if let Some(p) = drawing.distance_point {
            let taken = drawing.vanishing.iter().any(|v| match v.place {
                VanishingPlace::Proper(q) => q.distance(p) <= 1e-9 * p.u.hypot(p.w).max(1.0),
                VanishingPlace::Improper(..) => false,
            });
            if !taken {
                glyph(p, drawing.distance_point_label(), "distance-point")?;
            }
        }
    }

    if opts.show_improper_labels {
        // Families imaged as parallel lines: label at the viewport edge they run toward.
        let (cx, cy) = (vw / 2.0, vh / 2.0);
        let (rx, ry) = (cx - opts.margin, cy - opts.margin);
        for v in &drawing.vanishing {
            let VanishingPlace::Improper(du, dw) = v.place else {
                continue;
            };
            let n = du.hypot(dw);
            if !(n.is_finite() && n > 0.0) {
                return Err(SvgError::NonFinite(v.label.clone()));
            }
            let (dx, dy) = (du / n, -dw / n);
            let t = [(dx, rx), (dy, ry)]
                .iter()
                .filter(|(d, _)| *d != 0.0)
                .map(|(d, r)| r / d.abs())
                .fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                out,
                r#"<text class="improper" x="{}" y="{}" text-anchor="{}" font-family="sans-serif" font-size="12">{} (at infinity)</text>"#,
                num(cx + t * dx, &v.label)?,
                num(cy + t * dy, &v.label)?,
                if dx > 1e-9 {
                    "end"
                } else if dx < -1e-9 {
                    "start"
                } else {
                    "middle"
                },
                escape(&v.label)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
