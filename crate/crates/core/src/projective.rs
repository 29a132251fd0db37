//! Homogeneous "pixel" arithmetic on the canvas plane.
//!
//! The eye sits at the origin, looking down the `+y` axis, with `x` to the
//! right and `z` up. The canvas is the plane `y = 1`. A visual ray through the
//! eye is stored as a homogeneous triple `[h0, h1, h2]`; any nonzero multiple
//! names the same ray. A ray with `h1 != 0` pierces the canvas at
//! `(h0/h1, h2/h1)`. Rays with `h1 == 0` run parallel to the canvas and are
//! kept as improper canvas points.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance shared by every incidence and proportionality test.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectiveError {
    #[error("invalid pixel: all homogeneous coordinates are zero")]
    InvalidPixel,
    #[error("the eye point (0, 0, 0) does not define a visual ray")]
    EyePoint,
    #[error("cannot join a point with itself")]
    DegenerateJoin,
    #[error("cannot meet a line with itself")]
    DegenerateMeet,
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("invalid line: all coefficients are zero")]
    InvalidLine,
    #[error("non-finite coordinate")]
    NonFinite,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn is_zero(a: [f64; 3]) -> bool {
    a.iter().all(|&c| c == 0.0)
}

fn all_finite(a: [f64; 3]) -> bool {
    a.iter().all(|c| c.is_finite())
}

/// True when `a` and `b` are proportional: `|a x b| <= EPS * |a| * |b|`.
fn proportional(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    norm(cross(a, b)) <= tol * norm(a) * norm(b)
}

/// A point in 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn offset(self, d: Direction, t: f64) -> Point3 {
        Point3::new(self.x + t * d.dx, self.y + t * d.dy, self.z + t * d.dz)
    }

    pub fn lerp(self, other: Point3, t: f64) -> Point3 {
        Point3::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.z + t * (other.z - self.z),
        )
    }
}

/// A visual ray through the eye, as a homogeneous triple.
///
/// Equality of rays is [`Pixel::equiv`], not `==`: `[1, 2, 3]` and
/// `[2, 4, 6]` are the same ray but distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    h: [f64; 3],
}

impl Pixel {
    pub fn new(h0: f64, h1: f64, h2: f64) -> Result<Self, ProjectiveError> {
        Self::from_array([h0, h1, h2])
    }

    pub fn from_array(h: [f64; 3]) -> Result<Self, ProjectiveError> {
        if !all_finite(h) {
            return Err(ProjectiveError::NonFinite);
        }
        if is_zero(h) {
            return Err(ProjectiveError::InvalidPixel);
        }
        Ok(Self { h })
    }

    pub fn coords(&self) -> [f64; 3] {
        self.h
    }

    /// Multiplies every coordinate by `t`; the ray is unchanged.
    pub fn scaled(&self, t: f64) -> Result<Self, ProjectiveError> {
        Self::from_array([self.h[0] * t, self.h[1] * t, self.h[2] * t])
    }

    pub fn equiv(&self, other: &Pixel) -> bool {
        proportional(self.h, other.h, EPS)
    }

    /// Sine of the angle between the two rays; zero for equivalent pixels.
    pub fn separation(&self, other: &Pixel) -> f64 {
        norm(cross(self.h, other.h)) / (norm(self.h) * norm(other.h))
    }

    /// Places the ray on the canvas `y = 1`, or on the improper line when
    /// it runs parallel to the canvas.
    pub fn canonicalize(&self) -> CanvasElement {
        let [h0, h1, h2] = self.h;
        if h1 != 0.0 {
            CanvasElement::Proper(CanvasPoint::new(h0 / h1, h2 / h1))
        } else if h2 != 0.0 {
            CanvasElement::Improper(ImproperCanvasPoint::Sloped { u: h0 / h2 })
        } else {
            CanvasElement::Improper(ImproperCanvasPoint::Horizontal)
        }
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.h[0], self.h[1], self.h[2])
    }
}

/// The canonical pixel `[u, 1, w]`: horizontal `u`, vertical `w` on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasPoint {
    pub u: f64,
    pub w: f64,
}

impl CanvasPoint {
    pub const fn new(u: f64, w: f64) -> Self {
        Self { u, w }
    }

    pub fn to_pixel(self) -> Pixel {
        Pixel {
            h: [self.u, 1.0, self.w],
        }
    }

    pub fn distance(self, other: CanvasPoint) -> f64 {
        (self.u - other.u).hypot(self.w - other.w)
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.w.is_finite()
    }
}

/// A point of the improper line added to the canvas.
///
/// `Sloped { u }` is the class `[u, 0, 1]`: the common end of every canvas
/// line with direction `(u, 1)` in `(u, w)` coordinates. `Horizontal` is the
/// one remaining class `[1, 0, 0]`, shared by all horizontal canvas lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ImproperCanvasPoint {
    Sloped { u: f64 },
    Horizontal,
}

impl ImproperCanvasPoint {
    pub fn to_pixel(self) -> Pixel {
        match self {
            ImproperCanvasPoint::Sloped { u } => Pixel { h: [u, 0.0, 1.0] },
            ImproperCanvasPoint::Horizontal => Pixel { h: [1.0, 0.0, 0.0] },
        }
    }

    /// Unit direction `(du, dw)` on the canvas, with `dw >= 0`.
    pub fn canvas_direction(self) -> (f64, f64) {
        match self {
            ImproperCanvasPoint::Sloped { u } => {
                let n = u.hypot(1.0);
                (u / n, 1.0 / n)
            }
            ImproperCanvasPoint::Horizontal => (1.0, 0.0),
        }
    }
}

/// A canvas point, proper or improper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CanvasElement {
    Proper(CanvasPoint),
    Improper(ImproperCanvasPoint),
}

impl CanvasElement {
    pub fn to_pixel(self) -> Pixel {
        match self {
            CanvasElement::Proper(p) => p.to_pixel(),
            CanvasElement::Improper(p) => p.to_pixel(),
        }
    }

    pub fn proper(self) -> Option<CanvasPoint> {
        match self {
            CanvasElement::Proper(p) => Some(p),
            CanvasElement::Improper(_) => None,
        }
    }

    pub fn is_proper(self) -> bool {
        matches!(self, CanvasElement::Proper(_))
    }
}

impl From<CanvasPoint> for CanvasElement {
    fn from(p: CanvasPoint) -> Self {
        CanvasElement::Proper(p)
    }
}

impl From<ImproperCanvasPoint> for CanvasElement {
    fn from(p: ImproperCanvasPoint) -> Self {
        CanvasElement::Improper(p)
    }
}

impl From<CanvasPoint> for Pixel {
    fn from(p: CanvasPoint) -> Self {
        p.to_pixel()
    }
}

impl From<ImproperCanvasPoint> for Pixel {
    fn from(p: ImproperCanvasPoint) -> Self {
        p.to_pixel()
    }
}

impl From<CanvasElement> for Pixel {
    fn from(p: CanvasElement) -> Self {
        p.to_pixel()
    }
}

/// A line of the (completed) canvas: the pixels with `a*h0 + b*h1 + c*h2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasLine {
    coeffs: [f64; 3],
}

impl CanvasLine {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, ProjectiveError> {
        let coeffs = [a, b, c];
        if !all_finite(coeffs) {
            return Err(ProjectiveError::NonFinite);
        }
        if is_zero(coeffs) {
            return Err(ProjectiveError::InvalidLine);
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.coeffs
    }

    /// Coefficients scaled to unit length, sign fixed by the first nonzero one.
    pub fn normalized(&self) -> [f64; 3] {
        let n = norm(self.coeffs);
        let sign = self.coeffs.iter().find(|c| **c != 0.0).map_or(1.0, |c| c.signum());
        self.coeffs.map(|c| sign * c / n)
    }

    /// `|l . p| / (|l| |p|)`, the scale-free incidence residual.
    pub fn residual(&self, p: impl Into<Pixel>) -> f64 {
        let p = p.into();
        dot(self.coeffs, p.h).abs() / (norm(self.coeffs) * norm(p.h))
    }

    pub fn contains(&self, p: impl Into<Pixel>) -> bool {
        self.residual(p) <= EPS
    }

    pub fn equiv(&self, other: &CanvasLine) -> bool {
        proportional(self.coeffs, other.coeffs, EPS)
    }

    /// The improper line of the canvas, `h1 = 0`.
    pub fn improper() -> CanvasLine {
        CanvasLine {
            coeffs: [0.0, 1.0, 0.0],
        }
    }

    /// Canvas height `w` where the line crosses vertical position `u`, if it does.
    pub fn w_at(&self, u: f64) -> Option<f64> {
        let [a, b, c] = self.coeffs;
        (c != 0.0).then(|| -(a * u + b) / c)
    }

    /// Canvas position `u` where the line crosses height `w`, if it does.
    pub fn u_at(&self, w: f64) -> Option<f64> {
        let [a, b, c] = self.coeffs;
        (a != 0.0).then(|| -(b + c * w) / a)
    }
}

/// A direction in 3-space, up to nonzero scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Direction {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self, ProjectiveError> {
        let v = [dx, dy, dz];
        if !all_finite(v) {
            return Err(ProjectiveError::NonFinite);
        }
        if is_zero(v) {
            return Err(ProjectiveError::ZeroDirection);
        }
        Ok(Self { dx, dy, dz })
    }

    /// Horizontal family `x = (y - k)/m`, i.e. direction `(1, m, 0)`.
    pub fn with_slope(m: f64) -> Result<Self, ProjectiveError> {
        Self::new(1.0, m, 0.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn equiv(&self, other: &Direction) -> bool {
        proportional(self.to_array(), other.to_array(), EPS)
    }

    pub fn is_horizontal(&self) -> bool {
        self.dz == 0.0
    }

    /// Key for grouping parallel families: divide by the first nonzero
    /// component, round to 12 decimals.
    pub fn class_key(&self) -> String {
        let v = self.to_array();
        let lead = v.iter().copied().find(|c| *c != 0.0).unwrap_or(1.0);
        let parts: Vec<String> = v
            .iter()
            .map(|c| {
                let r = (c / lead * 1e12).round() / 1e12;
                let r = if r == 0.0 { 0.0 } else { r };
                format!("{r:.12}")
            })
            .collect();
        parts.join(",")
    }
}

/// The visual ray through `p`.
pub fn project_point(p: Point3) -> Result<Pixel, ProjectiveError> {
    match Pixel::from_array(p.to_array()) {
        Err(ProjectiveError::InvalidPixel) => Err(ProjectiveError::EyePoint),
        other => other,
    }
}

pub fn canonicalize(p: &Pixel) -> CanvasElement {
    p.canonicalize()
}

pub fn pixel_equiv(p: &Pixel, q: &Pixel) -> bool {
    p.equiv(q)
}

/// The line through two distinct canvas points.
pub fn join(p: impl Into<Pixel>, q: impl Into<Pixel>) -> Result<CanvasLine, ProjectiveError> {
    let (p, q) = (p.into(), q.into());
    let c = cross(p.h, q.h);
    if norm(c) <= EPS * norm(p.h) * norm(q.h) {
        return Err(ProjectiveError::DegenerateJoin);
    }
    Ok(CanvasLine { coeffs: c })
}

/// The common point of two distinct lines; improper when they are parallel.
pub fn meet(l: &CanvasLine, m: &CanvasLine) -> Result<CanvasElement, ProjectiveError> {
    let c = cross(l.coeffs, m.coeffs);
    if norm(c) <= EPS * norm(l.coeffs) * norm(m.coeffs) {
        return Err(ProjectiveError::DegenerateMeet);
    }
    Ok(Pixel { h: c }.canonicalize())
}

/// Where every line of direction `d` appears to converge on the canvas.
pub fn vanishing_point(d: Direction) -> CanvasElement {
    Pixel { h: d.to_array() }.canonicalize()
}

/// The line `w = 0`, holding the vanishing points of all horizontal families.
pub fn horizon() -> CanvasLine {
    CanvasLine {
        coeffs: [0.0, 0.0, 1.0],
    }
}

/// Scale-free collinearity test value for three canvas points:
/// `det[p q r] / (|p| |q| |r|)`.
pub fn collinearity(p: CanvasPoint, q: CanvasPoint, r: CanvasPoint) -> f64 {
    let (p, q, r) = (p.to_pixel().h, q.to_pixel().h, r.to_pixel().h);
    dot(p, cross(q, r)).abs() / (norm(p) * norm(q) * norm(r))
}
