//! Perspective engine built on homogeneous canvas coordinates.
//!
//! * [`projective`]: pixels, canvas lines, joins, meets, vanishing points.
//! * [`scene`]: physical scene model and its normalization.
//! * [`dsl`]: the `.scene` text format.
//! * [`projector`]: forward projection of a scene onto the canvas.
//! * [`alberti`]: the costruzione legittima as a 2D construction.
//! * [`reconstruct`]: viewer and figure recovery from painting annotations.
//! * [`svg`]: deterministic SVG output.
//! * [`report`]: the JSON report shared by the projector and the construction.

pub mod alberti;
pub mod dsl;
pub mod projective;
pub mod projector;
pub mod reconstruct;
pub mod report;
pub mod scene;
pub mod svg;

pub use dsl::{parse_scene, parse_scene_with, print_scene, ParseError, SourceSpan};
pub use projective::{
    CanvasElement, CanvasLine, CanvasPoint, Direction, ImproperCanvasPoint, Pixel, Point3, ProjectiveError,
};
pub use scene::{Scene, ViewerFrame};
