//! Property checks. Expected values come from plain pinhole arithmetic
//! (`u = x D / y`, `w = H + (z - H) D / y`), never from the projector itself.

use proptest::prelude::*;

use perspectiva::alberti::{corner_collinearity, step3_assemble, AlbertiInput};
use perspectiva::projective::{canonicalize, horizon, join, meet, project_point, vanishing_point};
use perspectiva::projector::project_scene;
use perspectiva::reconstruct::{
    estimate_d, locate_figure, reconstruct, Annotation, DiagonalMark, FigureMark, Mark, ReconstructOptions,
};
use perspectiva::report::Drawing;
use perspectiva::scene::{CanvasBase, SceneLine, StandingFigure, TiledFloor};
use perspectiva::svg::{emit_svg, RenderOptions};
use perspectiva::{parse_scene, print_scene, CanvasElement, Direction, Pixel, Point3, Scene, ViewerFrame};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn component() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 4 => -1e3..1e3f64]
}

fn pixel() -> impl Strategy<Value = Pixel> {
    (component(), component(), component())
        .prop_filter("nonzero", |(a, b, c)| a.abs().max(b.abs()).max(c.abs()) > 1e-3)
        .prop_map(|(a, b, c)| Pixel::new(a, b, c).unwrap())
}

fn scale() -> impl Strategy<Value = f64> {
    (1e-3..1e3f64, any::<bool>()).prop_map(|(t, neg)| if neg { -t } else { t })
}

fn same_element(a: CanvasElement, b: CanvasElement) -> bool {
    use perspectiva::ImproperCanvasPoint::*;
    match (a, b) {
        (CanvasElement::Proper(p), CanvasElement::Proper(q)) => close(p.u, q.u, 1e-12) && close(p.w, q.w, 1e-12),
        (CanvasElement::Improper(Sloped { u: a }), CanvasElement::Improper(Sloped { u: b })) => close(a, b, 1e-12),
        (CanvasElement::Improper(Horizontal), CanvasElement::Improper(Horizontal)) => true,
        _ => false,
    }
}

fn direction() -> impl Strategy<Value = Direction> {
    (-1.0..1.0f64, 0.05..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Direction::new(x, y, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_form_ignores_scale(p in pixel(), t in scale()) {
        prop_assert!(same_element(canonicalize(&p), canonicalize(&p.scaled(t).unwrap())));
    }

    #[test]
    fn join_and_meet_ignore_scale(p in pixel(), q in pixel(), s in scale(), t in scale()) {
        prop_assume!(!p.equiv(&q) && p.separation(&q) > 1e-6);
        let l = join(p, q).unwrap();
        let l2 = join(p.scaled(s).unwrap(), q.scaled(t).unwrap()).unwrap();
        prop_assert!(l.equiv(&l2));
        prop_assert!(l.contains(p) && l.contains(q));
        if let Ok(x) = meet(&l, &horizon()) {
            prop_assert!(horizon().contains(x.to_pixel()));
        }
    }

    /// Five parallel lines: every pair of images meets where the direction's
    /// own ray pierces the canvas, at `(dx / dy, dz / dy)`.
    #[test]
    fn parallel_images_converge(d in direction(), anchors in prop::collection::vec((-3.0..3.0f64, 0.5..5.0f64, -3.0..3.0f64), 5)) {
        let expected = (d.dx / d.dy, d.dz / d.dy);
        let images: Vec<_> = anchors
            .iter()
            .map(|&(x, y, z)| {
                let a = Point3::new(x, y, z);
                join(project_point(a).unwrap(), project_point(a.offset(d, 2.0)).unwrap())
            })
            .collect();
        let vp = vanishing_point(d).proper().unwrap();
        prop_assert!(close(vp.u, expected.0, 1e-12) && close(vp.w, expected.1, 1e-12));
        for (i, a) in images.iter().enumerate() {
            let Ok(a) = a else { continue };
            for b in images[i + 1..].iter().flatten() {
                if let Ok(CanvasElement::Proper(m)) = meet(a, b) {
                    // Nearly coincident images meet poorly; judge by residual instead.
                    prop_assert!(a.residual(vp) < 1e-9 && b.residual(vp) < 1e-9, "meet {:?} vs {:?}", m, vp);
                }
            }
        }
    }

    #[test]
    fn on_horizon_iff_level(dx in -1.0..1.0f64, dy in -1.0..1.0f64, dz in prop_oneof![Just(0.0), -1.0..-1e-3f64, 1e-3..1.0f64]) {
        prop_assume!(dx.abs().max(dy.abs()).max(dz.abs()) > 1e-3);
        let d = Direction::new(dx, dy, dz).unwrap();
        prop_assert_eq!(horizon().contains(vanishing_point(d).to_pixel()), dz == 0.0);
    }

    #[test]
    fn projected_lines_share_their_family_point(d in direction(), n in 2usize..6) {
        let mut scene = Scene::new(ViewerFrame::new(60.0, 145.0, 200.0, 140.0));
        for k in 0..n {
            let anchor = Point3::new(-80.0 + 37.0 * k as f64, 200.0 + 11.0 * k as f64, 20.0 * k as f64);
            scene.lines.push(SceneLine::infinite(anchor, d));
        }
        let report = project_scene(&scene).unwrap();
        let fam = report.family(d).unwrap();
        prop_assert_eq!(fam.members, n);
        prop_assert!(fam.consistent, "deviation {:?}", fam.deviation);
    }

    #[test]
    fn mirrored_scene_mirrors_image(x in -200.0..200.0f64, y in 150.0..900.0f64, z in 0.0..300.0f64, h in 10.0..300.0f64) {
        let mut scene = Scene::new(ViewerFrame::new(60.0, 145.0, 200.0, 140.0));
        scene.figures.push(StandingFigure { label: "a".into(), x, depth: y, height: h });
        scene.figures.push(StandingFigure { label: "b".into(), x: -x, depth: y, height: h });
        scene.lines.push(SceneLine { extent: Some((0.0, 1.0)), ..SceneLine::infinite(Point3::new(x, y, z), Direction::new(1.0, 0.5, 0.0).unwrap()) });
        scene.lines.push(SceneLine { extent: Some((0.0, 1.0)), ..SceneLine::infinite(Point3::new(-x, y, z), Direction::new(-1.0, 0.5, 0.0).unwrap()) });
        let segs = project_scene(&scene).unwrap().segments_cm();
        for pair in segs.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            prop_assert!(close(a.start.u, -b.start.u, 1e-12) && close(a.start.w, b.start.w, 1e-12));
            prop_assert!(close(a.end.u, -b.end.u, 1e-12) && close(a.end.w, b.end.w, 1e-12));
        }
    }

    #[test]
    fn grid_matches_pinhole(side in 100.0..600.0f64, d in 50.0..800.0f64, n in 1u32..12, fill in 0.3..1.0f64, vp in 0.2..0.9f64) {
        let tile = side / f64::from(n) * fill;
        let mut input = AlbertiInput::new(side, d, n, tile);
        input.vp_height = vp * side;
        let grid = step3_assemble(&input).unwrap();
        let h = input.vp_height;
        for i in 0..=n {
            for j in 0..=n {
                let x = (f64::from(j) - f64::from(n) / 2.0) * tile;
                let y = d + f64::from(i) * tile;
                let c = grid.corners[i as usize][j as usize];
                prop_assert!((c.u - x * d / y).abs() <= 1e-9);
                prop_assert!((c.w - (h - h * d / y)).abs() <= 1e-9);
            }
        }
        let k = n as usize;
        for i in 1..k {
            prop_assert!(corner_collinearity(grid.corners[0][0], grid.corners[i][i], grid.corners[k][k]) <= 1e-9);
        }
    }

    #[test]
    fn depth_grows_with_base_height(h in 40.0..200.0f64, d in 80.0..600.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!(a != b);
        let ann = Annotation::new(400.0, 400.0);
        let at = |t: f64| FigureMark { label: "f".into(), base: Mark::new(200.0, t), top: Mark::new(200.0, 399.0), knee: None, assumed_real_height: None };
        let (lo, hi) = (a.min(b) * h * 0.999, a.max(b) * h * 0.999);
        prop_assume!(hi - lo > 1e-9 * h);
        let y_lo = locate_figure(&ann, h, d, &at(lo)).unwrap().depth;
        let y_hi = locate_figure(&ann, h, d, &at(hi)).unwrap().depth;
        prop_assert!(y_lo < y_hi);
    }

    #[test]
    fn top_on_horizon_gives_eye_height(h in 40.0..200.0f64, d in 80.0..600.0f64, t in 0.0..0.999f64) {
        let ann = Annotation::new(400.0, 400.0);
        let mark = FigureMark { label: "f".into(), base: Mark::new(200.0, t * h), top: Mark::new(200.0, h), knee: None, assumed_real_height: None };
        prop_assert_eq!(locate_figure(&ann, h, d, &mark).unwrap().real_height, h);
    }

    #[test]
    fn distance_ignores_tile_size(h in 40.0..200.0f64, d in 80.0..600.0f64, s1 in 5.0..80.0f64, s2 in 5.0..80.0f64) {
        // Floor diagonal from (0, D) to (s, D + s), pinhole-projected; canvas wide enough for the marks.
        let mut ann = Annotation::new(2000.0, 400.0);
        ann.vp = Some(Mark::new(1000.0, h));
        let diag = |s: f64| {
            let y = d + s;
            DiagonalMark { p1: Mark::new(1000.0, 0.0), p2: Mark::new(1000.0 + s * d / y, h - h * d / y), assume_square_tile: true }
        };
        ann.diagonals = vec![diag(s1)];
        let d1 = estimate_d(&ann, h).unwrap().distance;
        ann.diagonals = vec![diag(s2)];
        let d2 = estimate_d(&ann, h).unwrap().distance;
        prop_assert!(close(d1, d, 1e-9) && close(d2, d, 1e-9));
    }
}

fn length() -> impl Strategy<Value = f64> {
    prop_oneof![1.0..1e4f64, (1u32..500).prop_map(f64::from), Just(0.1), Just(1.0 / 3.0)]
}

fn signed() -> impl Strategy<Value = f64> {
    prop_oneof![-1e4..1e4f64, Just(0.0), Just(-2.5)]
}

fn label() -> impl Strategy<Value = String> {
    "[ -~\\t\\n\u{e0}-\u{ff}]{0,12}"
}

fn scene_strategy() -> impl Strategy<Value = Scene> {
    let frame = (
        length(),
        length(),
        length(),
        length(),
        prop::option::of(length()),
        length(),
    )
        .prop_map(|(h, d, w, c, base, braccio)| {
            let mut f = ViewerFrame::new(h, d, w, c);
            f.canvas_base = base.map_or(CanvasBase::Floor, CanvasBase::Height);
            (f, braccio)
        });
    let line = (
        (signed(), signed(), signed()),
        direction_any(),
        prop::option::of((signed(), 0.0..100.0f64)),
        prop::option::of(label()),
    )
        .prop_map(|((x, y, z), dir, extent, family)| SceneLine {
            anchor: Point3::new(x, y, z),
            direction: dir,
            extent: extent.map(|(t0, len)| (t0, t0 + len + 1.0)),
            family,
        });
    let floor = (length(), prop::option::of(length()), 1u32..40, 1u32..40, signed()).prop_map(|(sx, sy, c, r, off)| {
        TiledFloor {
            tile_width: sx,
            tile_depth: sy.unwrap_or(sx),
            columns: c,
            rows: r,
            origin_offset: off,
        }
    });
    let figure = (label(), signed(), length(), length()).prop_map(|(label, x, depth, height)| StandingFigure {
        label,
        x,
        depth,
        height,
    });
    (
        frame,
        prop::collection::vec(line, 0..4),
        prop::collection::vec(floor, 0..3),
        prop::collection::vec(figure, 0..4),
    )
        .prop_map(|((frame, braccio), lines, floors, figures)| Scene {
            frame,
            lines,
            floors,
            figures,
            braccio_cm: braccio,
        })
}

fn direction_any() -> impl Strategy<Value = Direction> {
    (signed(), signed(), signed())
        .prop_filter("nonzero", |(x, y, z)| *x != 0.0 || *y != 0.0 || *z != 0.0)
        .prop_map(|(x, y, z)| Direction::new(x, y, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn printed_scene_parses_back(scene in scene_strategy()) {
        let text = print_scene(&scene);
        let back = parse_scene(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, scene);
    }

    #[test]
    fn noise_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_scene(&text) {
            let lines: Vec<&str> = text.split('\n').collect();
            prop_assert!(e.span.line >= 1 && e.span.line <= lines.len());
            prop_assert!(e.span.column >= 1 && e.span.column <= lines[e.span.line - 1].chars().count() + 1);
        }
    }

    #[test]
    fn keyword_soup_never_panics(words in prop::collection::vec(prop_oneof![
        Just("viewer"), Just("height"), Just("distance"), Just("canvas"), Just("width"), Just("base"),
        Just("floor"), Just("braccio"), Just("line"), Just("at"), Just("dir"), Just("tiles"), Just("x"),
        Just("size"), Just("by"), Just("offset"), Just("figure"), Just("from"), Just("to"), Just("family"),
        Just("("), Just(")"), Just(","), Just("\n"), Just("\"a\""), Just("3"), Just("-2.5"), Just("4br"), Just("1e999"),
    ], 0..40)) {
        let text = words.join(" ");
        if let Ok(scene) = parse_scene(&text) {
            prop_assert_eq!(parse_scene(&print_scene(&scene)).unwrap(), scene);
        }
    }

    #[test]
    fn annotation_noise_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let _ = Annotation::from_json(&String::from_utf8_lossy(&bytes));
    }
}

fn roundtrip_scene() -> impl Strategy<Value = (Scene, usize)> {
    (
        40.0..200.0f64,
        80.0..600.0f64,
        100.0..400.0f64,
        0.0..0.3f64,
        prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 100.0..250.0f64), 0..=5),
    )
        .prop_map(|(h, d, w, base_frac, figs)| {
            let base = base_frac * h;
            let mut frame = ViewerFrame::new(h, d, w, 1.0);
            frame.canvas_base = if base == 0.0 {
                CanvasBase::Floor
            } else {
                CanvasBase::Height(base)
            };
            let hz = h - base;
            let nearest = 1.05 * h * d / hz;
            let mut scene = Scene::new(frame);
            scene.floors.push(TiledFloor::square(w / 8.0, 4, 40));
            let mut top = hz + 10.0;
            for (k, (fx, fy, height)) in figs.iter().enumerate() {
                let depth = nearest + fy * 4.0 * d;
                let x = (fx - 0.5) * 0.9 * w * depth / d;
                top = top.max(hz + (height - h) * d / depth + 1.0);
                scene.figures.push(StandingFigure {
                    label: format!("f{k}"),
                    x,
                    depth,
                    height: *height,
                });
            }
            scene.frame.canvas_height = top;
            let n = scene.figures.len();
            (scene, n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn render_annotate_reconstruct((scene, n) in roundtrip_scene()) {
        let report = project_scene(&scene).unwrap();
        let ann = Annotation::from_projection(&report);
        prop_assert_eq!(ann.figures.len(), n);
        let r = reconstruct(&ann, &ReconstructOptions::default()).unwrap();
        let f = &scene.frame;
        prop_assert!(close(r.viewer.eye_height, f.eye_height, 1e-6));
        prop_assert!(close(r.viewer.distance, f.canvas_distance, 1e-6));
        for (got, want) in r.figures.iter().zip(&scene.figures) {
            prop_assert!(close(got.depth, want.depth, 1e-6));
            prop_assert!(close(got.real_height, want.height, 1e-6));
            prop_assert!((got.x - want.x).abs() <= 1e-6 * want.depth);
        }
    }
}

#[test]
fn svg_is_byte_stable_across_thread_counts() {
    let scene = parse_scene(
        "viewer height 60 distance 145\ncanvas width 200 height 140\nfloor tiles 6 x 12 size 30\n\
         line at (-50, 200, 120) dir (1, 2, 0)\nline at (0, 150, 0) dir (1, 0, 0)\nfigure \"a\" at (20, 300) height 174\n",
    )
    .unwrap();
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let drawing = Drawing::from_projection(&project_scene(&scene).unwrap());
            (
                emit_svg(&drawing, &RenderOptions::default()).unwrap(),
                drawing.to_json(),
            )
        })
    };
    let one = render(1);
    assert_eq!(one, render(1));
    assert_eq!(one, render(4));
    assert_eq!(one, render(8));
    assert!(one.0.matches("<path").count() > 90);
}
