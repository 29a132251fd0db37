//! Line-oriented text format for [`Scene`].
//!
//! ```text
//! # Flagellazione, synthetic
//! braccio 58
//! viewer height 60 distance 145
//! canvas width 200 height 140 base floor
//! line at (-100, 145, 0) dir (0, 1, 0)
//! floor tiles 5 x 10 size 40
//! figure "tunic" at (30, 250) height 3br
//! ```
//!
//! One statement per line, `#` starts a comment, keywords are case-sensitive.
//! Lengths are centimeters unless suffixed with `br` (braccia). Direction
//! components and extents are plain numbers.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::projective::{Direction, Point3};
use crate::scene::{CanvasBase, Scene, SceneLine, StandingFigure, TiledFloor, ViewerFrame, DEFAULT_BRACCIO_CM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, braccia: bool, integer: bool },
    Word(String),
    Str(String),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    span: SourceSpan,
}

fn quoted(s: &str) -> String {
    format!("\"{s}\"")
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let span = |col: usize| SourceSpan {
        line: line_no,
        column: col + 1,
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let start = i;
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(ParseError {
                                span: span(i),
                                expected: "closing '\"'".into(),
                                found: "end of line".into(),
                            })
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            let esc = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('r') => '\r',
                                Some('t') => '\t',
                                other => {
                                    return Err(ParseError {
                                        span: span(i + 1),
                                        expected: "escape sequence".into(),
                                        found: other.map_or("end of line".into(), |c| quoted(&c.to_string())),
                                    })
                                }
                            };
                            s.push(esc);
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() || c == '.' || c == '+' || c == '-' => lex_number(&chars, &mut i),
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Word(chars[start..i].iter().collect())
            }
            _ => {
                i += 1;
                Tok::Word(c.to_string())
            }
        };
        out.push(Token {
            tok,
            text: chars[start..i].iter().collect(),
            span: span(start),
        });
    }
    Ok(out)
}

/// Lexes `[+-]digits[.digits][e[+-]digits][br]`. Anything malformed becomes a
/// word token so the parser can report it as the found item.
fn lex_number(chars: &[char], i: &mut usize) -> Tok {
    let start = *i;
    let mut j = *i;
    let mut integer = true;
    if matches!(chars.get(j), Some('+' | '-')) {
        integer = false;
        j += 1;
    }
    let digits = |j: &mut usize| {
        let s = *j;
        while chars.get(*j).is_some_and(|c| c.is_ascii_digit()) {
            *j += 1;
        }
        *j - s
    };
    let mut mantissa = digits(&mut j);
    if chars.get(j) == Some(&'.') {
        integer = false;
        j += 1;
        mantissa += digits(&mut j);
    }
    let mut ok = mantissa > 0;
    if ok && matches!(chars.get(j), Some('e' | 'E')) {
        let mut k = j + 1;
        if matches!(chars.get(k), Some('+' | '-')) {
            k += 1;
        }
        if digits(&mut k) > 0 {
            integer = false;
            j = k;
        }
    }
    let number_end = j;
    let mut braccia = false;
    if ok && chars.get(j) == Some(&'b') && chars.get(j + 1) == Some(&'r') {
        braccia = true;
        j += 2;
    }
    // A number must not run straight into a word.
    if chars
        .get(j)
        .is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '.')
    {
        ok = false;
    }
    if !ok {
        j = start + 1;
        while chars
            .get(j)
            .is_some_and(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '#'))
        {
            j += 1;
        }
        *i = j;
        return Tok::Word(chars[start..j].iter().collect());
    }
    *i = j;
    let text: String = chars[start..number_end].iter().collect();
    match text.parse::<f64>() {
        Ok(value) => Tok::Num {
            value,
            braccia,
            integer: integer && !braccia,
        },
        Err(_) => Tok::Word(chars[start..j].iter().collect()),
    }
}

#[derive(Debug, Clone, Copy)]
struct Length {
    value: f64,
    braccia: bool,
}

impl Length {
    fn cm(self, braccio_cm: f64) -> f64 {
        if self.braccia {
            self.value * braccio_cm
        } else {
            self.value
        }
    }
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    /// Position just past the last token, for end-of-line errors.
    eol: SourceSpan,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                span: t.span,
                expected: expected.into(),
                found: quoted(&t.text),
            },
            None => ParseError {
                span: self.eol,
                expected: expected.into(),
                found: "end of line".into(),
            },
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), .. }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(quoted(kw))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w == kw)
    }

    fn punct(&mut self, p: Tok, shown: &str) -> Result<(), ParseError> {
        if self.peek().map(|t| &t.tok) == Some(&p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("'{shown}'")))
        }
    }

    fn finite(&self, value: f64) -> Result<f64, ParseError> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.error("finite NUM"))
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Num {
                    value, braccia: false, ..
                },
                ..
            }) => {
                let v = self.finite(*value)?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("NUM")),
        }
    }

    fn length(&mut self) -> Result<Length, ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Num { value, braccia, .. },
                ..
            }) => {
                let value = self.finite(*value)?;
                let braccia = *braccia;
                self.pos += 1;
                Ok(Length { value, braccia })
            }
            _ => Err(self.error("NUM")),
        }
    }

    fn integer(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Num { integer: true, .. },
                text,
                ..
            }) => {
                let v = text.parse::<u32>().map_err(|_| self.error("INT"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("INT")),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Str(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("STRING")),
        }
    }

    fn triple(&mut self, len: bool) -> Result<[Length; 3], ParseError> {
        self.punct(Tok::LParen, "(")?;
        let mut out = [Length {
            value: 0.0,
            braccia: false,
        }; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                self.punct(Tok::Comma, ",")?;
            }
            *slot = if len {
                self.length()?
            } else {
                Length {
                    value: self.number()?,
                    braccia: false,
                }
            };
        }
        self.punct(Tok::RParen, ")")?;
        Ok(out)
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            Err(self.error("end of line"))
        } else {
            Ok(())
        }
    }
}

enum RawBase {
    Floor,
    Height(Length),
}

struct RawLine {
    anchor: [Length; 3],
    dir: [f64; 3],
    extent: Option<(f64, f64)>,
    family: Option<String>,
    span: SourceSpan,
}

struct RawFloor {
    columns: u32,
    rows: u32,
    size: Length,
    by: Option<Length>,
    offset: Option<Length>,
}

struct RawFigure {
    label: String,
    at: [Length; 2],
    height: Length,
}

#[derive(Default)]
struct Raw {
    braccio: Option<f64>,
    viewer: Option<(Length, Length)>,
    canvas: Option<(Length, Length, Option<RawBase>)>,
    lines: Vec<RawLine>,
    floors: Vec<RawFloor>,
    figures: Vec<RawFigure>,
}

const STATEMENTS: &str = "one of \"viewer\", \"canvas\", \"braccio\", \"line\", \"floor\", \"figure\"";

fn statement(c: &mut Cursor<'_>, raw: &mut Raw) -> Result<(), ParseError> {
    let Some(Token {
        tok: Tok::Word(kw),
        span,
        ..
    }) = c.peek().cloned()
    else {
        return Err(c.error(STATEMENTS));
    };
    let duplicate = |c: &Cursor<'_>| c.error(format!("at most one {} statement", quoted(&kw)));
    match kw.as_str() {
        "viewer" => {
            if raw.viewer.is_some() {
                return Err(duplicate(c));
            }
            c.pos += 1;
            c.keyword("height")?;
            let h = c.length()?;
            c.keyword("distance")?;
            let d = c.length()?;
            raw.viewer = Some((h, d));
        }
        "canvas" => {
            if raw.canvas.is_some() {
                return Err(duplicate(c));
            }
            c.pos += 1;
            c.keyword("width")?;
            let w = c.length()?;
            c.keyword("height")?;
            let h = c.length()?;
            let base = if c.at_keyword("base") {
                c.pos += 1;
                if c.at_keyword("floor") {
                    c.pos += 1;
                    Some(RawBase::Floor)
                } else if matches!(
                    c.peek(),
                    Some(Token {
                        tok: Tok::Num { .. },
                        ..
                    })
                ) {
                    Some(RawBase::Height(c.length()?))
                } else {
                    return Err(c.error("\"floor\" or NUM"));
                }
            } else {
                None
            };
            raw.canvas = Some((w, h, base));
        }
        "braccio" => {
            if raw.braccio.is_some() {
                return Err(duplicate(c));
            }
            c.pos += 1;
            raw.braccio = Some(c.number()?);
        }
        "line" => {
            c.pos += 1;
            c.keyword("at")?;
            let anchor = c.triple(true)?;
            c.keyword("dir")?;
            let dir = c.triple(false)?.map(|l| l.value);
            let extent = if c.at_keyword("from") {
                c.pos += 1;
                let t0 = c.number()?;
                c.keyword("to")?;
                Some((t0, c.number()?))
            } else {
                None
            };
            let family = if c.at_keyword("family") {
                c.pos += 1;
                Some(c.string()?)
            } else {
                None
            };
            raw.lines.push(RawLine {
                anchor,
                dir,
                extent,
                family,
                span,
            });
        }
        "floor" => {
            c.pos += 1;
            c.keyword("tiles")?;
            let columns = c.integer()?;
            c.keyword("x")?;
            let rows = c.integer()?;
            c.keyword("size")?;
            let size = c.length()?;
            let by = if c.at_keyword("by") {
                c.pos += 1;
                Some(c.length()?)
            } else {
                None
            };
            let offset = if c.at_keyword("offset") {
                c.pos += 1;
                Some(c.length()?)
            } else {
                None
            };
            raw.floors.push(RawFloor {
                columns,
                rows,
                size,
                by,
                offset,
            });
        }
        "figure" => {
            c.pos += 1;
            let label = c.string()?;
            c.keyword("at")?;
            c.punct(Tok::LParen, "(")?;
            let x = c.length()?;
            c.punct(Tok::Comma, ",")?;
            let y = c.length()?;
            c.punct(Tok::RParen, ")")?;
            c.keyword("height")?;
            let height = c.length()?;
            raw.figures.push(RawFigure {
                label,
                at: [x, y],
                height,
            });
        }
        _ => return Err(c.error(STATEMENTS)),
    }
    c.end()
}

/// Parses a scene, converting braccia with [`DEFAULT_BRACCIO_CM`] unless the
/// text sets its own `braccio`.
pub fn parse_scene(text: &str) -> Result<Scene, ParseError> {
    parse_scene_with(text, DEFAULT_BRACCIO_CM)
}

/// Parses a scene with a caller-chosen default braccio length.
pub fn parse_scene_with(text: &str, default_braccio_cm: f64) -> Result<Scene, ParseError> {
    let mut raw = Raw::default();
    let mut last = SourceSpan { line: 1, column: 1 };
    for (idx, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let line_no = idx + 1;
        let eol = SourceSpan {
            line: line_no,
            column: line.chars().count() + 1,
        };
        last = eol;
        let tokens = lex_line(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cursor = Cursor {
            tokens: &tokens,
            pos: 0,
            eol,
        };
        statement(&mut cursor, &mut raw)?;
    }

    let Some((height, distance)) = raw.viewer else {
        return Err(ParseError {
            span: last,
            expected: quoted("viewer"),
            found: "end of input".into(),
        });
    };
    let br = raw.braccio.unwrap_or(default_braccio_cm);
    let (width, canvas_height, base) = match raw.canvas {
        Some((w, h, base)) => (w.cm(br), h.cm(br), base),
        None => (6.0 * br, 6.0 * br, None),
    };
    let frame = ViewerFrame {
        eye_height: height.cm(br),
        canvas_distance: distance.cm(br),
        canvas_width: width,
        canvas_height,
        canvas_base: match base {
            None | Some(RawBase::Floor) => CanvasBase::Floor,
            Some(RawBase::Height(h)) => CanvasBase::Height(h.cm(br)),
        },
    };
    let mut scene = Scene::new(frame);
    scene.braccio_cm = br;
    for l in raw.lines {
        let [x, y, z] = l.anchor.map(|v| v.cm(br));
        let direction = Direction::new(l.dir[0], l.dir[1], l.dir[2]).map_err(|_| ParseError {
            span: l.span,
            expected: "nonzero direction".into(),
            found: format!("({}, {}, {})", l.dir[0], l.dir[1], l.dir[2]),
        })?;
        scene.lines.push(SceneLine {
            anchor: Point3::new(x, y, z),
            direction,
            extent: l.extent,
            family: l.family,
        });
    }
    for f in raw.floors {
        let size = f.size.cm(br);
        scene.floors.push(TiledFloor {
            tile_width: size,
            tile_depth: f.by.map_or(size, |b| b.cm(br)),
            columns: f.columns,
            rows: f.rows,
            origin_offset: f.offset.map_or(0.0, |o| o.cm(br)),
        });
    }
    for f in raw.figures {
        scene.figures.push(StandingFigure {
            label: f.label,
            x: f.at[0].cm(br),
            depth: f.at[1].cm(br),
            height: f.height.cm(br),
        });
    }
    Ok(scene)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text for a scene. Lengths are written in centimeters using the
/// shortest decimal that reads back to the same `f64`.
pub fn print_scene(scene: &Scene) -> String {
    let mut s = String::new();
    let f = &scene.frame;
    let _ = writeln!(s, "braccio {}", scene.braccio_cm);
    let _ = writeln!(s, "viewer height {} distance {}", f.eye_height, f.canvas_distance);
    let _ = write!(s, "canvas width {} height {} base ", f.canvas_width, f.canvas_height);
    let _ = match f.canvas_base {
        CanvasBase::Floor => writeln!(s, "floor"),
        CanvasBase::Height(h) => writeln!(s, "{h}"),
    };
    for l in &scene.lines {
        let (a, d) = (l.anchor, l.direction);
        let _ = write!(
            s,
            "line at ({}, {}, {}) dir ({}, {}, {})",
            a.x, a.y, a.z, d.dx, d.dy, d.dz
        );
        if let Some((t0, t1)) = l.extent {
            let _ = write!(s, " from {t0} to {t1}");
        }
        if let Some(fam) = &l.family {
            let _ = write!(s, " family {}", escape(fam));
        }
        s.push('\n');
    }
    for fl in &scene.floors {
        let _ = write!(s, "floor tiles {} x {} size {}", fl.columns, fl.rows, fl.tile_width);
        if !fl.is_square() {
            let _ = write!(s, " by {}", fl.tile_depth);
        }
        if fl.origin_offset != 0.0 {
            let _ = write!(s, " offset {}", fl.origin_offset);
        }
        s.push('\n');
    }
    for fig in &scene.figures {
        let _ = writeln!(
            s,
            "figure {} at ({}, {}) height {}",
            escape(&fig.label),
            fig.x,
            fig.depth,
            fig.height
        );
    }
    s
}
