//! Golden SVG files. Set `UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::fs;
use std::path::PathBuf;

use perspectiva::alberti::{step3_assemble, AlbertiInput};
use perspectiva::parse_scene;
use perspectiva::projector::project_scene;
use perspectiva::report::Drawing;
use perspectiva::svg::{emit_svg, RenderOptions};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scene_drawing(name: &str) -> Drawing {
    let path = root().join("../../fixtures").join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Drawing::from_projection(&project_scene(&parse_scene(&text).unwrap()).unwrap())
}

fn check_golden(name: &str, svg: &str) {
    let path = root().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, svg).unwrap();
        return;
    }
    let want =
        fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()));
    assert!(want == svg, "{name} differs from its golden file");
}

#[test]
fn three_beams() {
    let svg = emit_svg(&scene_drawing("three_beams.scene"), &RenderOptions::default()).unwrap();
    assert_eq!(svg.matches("<path").count(), 3);
    assert_eq!(svg.matches(r#"class="horizon""#).count(), 1);
    // V sits on the horizon line.
    let hz_y = svg
        .split(r#"class="horizon""#)
        .nth(1)
        .unwrap()
        .split("y1=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    let v_y = svg
        .split(r#"class="vp""#)
        .nth(1)
        .unwrap()
        .split("cy=\"")
        .nth(1)
        .unwrap()
        .split('"')
        .next()
        .unwrap();
    assert_eq!(hz_y, v_y);
    check_golden("three_beams.svg", &svg);
}

#[test]
fn flagellazione() {
    let svg = emit_svg(&scene_drawing("flagellazione.scene"), &RenderOptions::default()).unwrap();
    check_golden("flagellazione.svg", &svg);
}

#[test]
fn duccio() {
    let svg = emit_svg(&scene_drawing("duccio.scene"), &RenderOptions::default()).unwrap();
    assert!(svg.contains(r#"class="vp inconsistent""#));
    check_golden("duccio.svg", &svg);
}

#[test]
fn alberti_grid() {
    let grid = step3_assemble(&AlbertiInput::new(348.0, 174.0, 8, 43.5)).unwrap();
    let svg = emit_svg(&Drawing::from_alberti(&grid), &RenderOptions::default()).unwrap();
    check_golden("alberti_8x8.svg", &svg);
}

#[test]
fn empty_scene_is_horizon_only() {
    let drawing =
        Drawing::from_projection(&project_scene(&parse_scene("viewer height 60 distance 145").unwrap()).unwrap());
    let svg = emit_svg(&drawing, &RenderOptions::default()).unwrap();
    assert!(!svg.contains("<path") && !svg.contains("<circle"));
    assert_eq!(svg.matches("<line").count(), 1);
    check_golden("empty.svg", &svg);
}
