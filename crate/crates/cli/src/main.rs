use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use perspectiva::alberti::{corner_collinearity, step3_assemble, AlbertiInput};
use perspectiva::parse_scene_with;
use perspectiva::projector::project_scene;
use perspectiva::reconstruct::{
    reconstruct, Annotation, ReconstructOptions, DEFAULT_KNEE_RATIO, DEFAULT_KNEE_TOLERANCE,
};
use perspectiva::report::{stable_json, to_stable_json, Drawing, VanishingPlace};
use perspectiva::scene::{validate, Scene, DEFAULT_BRACCIO_CM};
use perspectiva::svg::{emit_svg, RenderOptions};

/// Perspective scenes, Alberti grids and viewer reconstruction.
///
/// Paths may be "-" for stdin or stdout.
#[derive(Parser, Debug)]
#[command(name = "perspectiva", version)]
struct Cli {
    /// Centimeters per braccio, used for "br" lengths unless the scene sets its own.
    #[arg(long, global = true, env = "PERSPECTIVA_BRACCIO_CM", default_value_t = DEFAULT_BRACCIO_CM, value_parser = positive)]
    braccio_cm: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project a .scene file; writes the SVG to stdout unless --svg or --json is given.
    Render {
        scene: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Draw a square-tiled floor by the three-step construction; writes JSON to stdout unless --svg or --json is given.
    Alberti(AlbertiArgs),
    /// Recover eye height, distance and figure placement from an annotation JSON file.
    Reconstruct {
        annotation: PathBuf,
        /// Knee height as a fraction of figure height.
        #[arg(long, default_value_t = DEFAULT_KNEE_RATIO, value_parser = positive)]
        knee_ratio: f64,
        /// Allowed spread of knee marks, as a fraction of canvas height.
        #[arg(long, default_value_t = DEFAULT_KNEE_TOLERANCE, value_parser = positive)]
        knee_tolerance: f64,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// List vanishing points per line family; exits 1 if a family is inconsistent.
    Vanishing {
        scene: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Parse and validate a .scene file.
    Check { scene: PathBuf },
}

#[derive(Args, Debug)]
struct AlbertiArgs {
    /// Side of the square canvas, cm.
    #[arg(long, required_unless_present = "verify_random", value_parser = positive)]
    side: Option<f64>,
    /// Eye-to-canvas distance, cm.
    #[arg(long, required_unless_present = "verify_random", value_parser = positive)]
    distance: Option<f64>,
    /// Tiles per row and per column.
    #[arg(long, required_unless_present = "verify_random")]
    tiles: Option<u32>,
    /// Tile side, cm.
    #[arg(long, required_unless_present = "verify_random", value_parser = positive)]
    tile: Option<f64>,
    /// Vanishing point height above the base; half the side by default.
    #[arg(long, value_parser = positive)]
    vp_height: Option<f64>,
    /// Lateral shift of the base points from the midline, cm.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    offset: f64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Check N random constructions against direct projection instead of drawing.
    #[arg(long, value_name = "N")]
    verify_random: Option<u32>,
    #[arg(long, default_value_t = 0, requires = "verify_random")]
    seed: u64,
    #[command(flatten)]
    view: ViewArgs,
}

#[derive(Args, Debug)]
struct ViewArgs {
    #[arg(long, default_value_t = 800)]
    viewport_width: u32,
    #[arg(long, default_value_t = 600)]
    viewport_height: u32,
    #[arg(long, default_value_t = 20.0)]
    margin: f64,
    #[arg(long)]
    no_horizon: bool,
    #[arg(long)]
    no_vps: bool,
    #[arg(long)]
    no_improper_labels: bool,
}

impl ViewArgs {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            viewport_w: self.viewport_width,
            viewport_h: self.viewport_height,
            margin: self.margin,
            show_horizon: !self.no_horizon,
            show_vps: !self.no_vps,
            show_improper_labels: !self.no_improper_labels,
            ..RenderOptions::default()
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(_) => Err(format!("{s} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

/// A domain error, reported as `Name: message` with exit code 1.
struct Failure {
    name: &'static str,
    message: String,
}

fn fail(name: &'static str, e: impl ToString) -> Failure {
    Failure {
        name,
        message: e.to_string(),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| fail("IoError", format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| fail("IoError", format!("{}: {e}", path.display())))
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| fail("IoError", format!("stdout: {e}")))
    } else {
        fs::write(path, text).map_err(|e| fail("IoError", format!("{}: {e}", path.display())))
    }
}

fn load_scene(path: &Path, braccio_cm: f64) -> Result<Scene, Failure> {
    let text = read_input(path)?;
    parse_scene_with(&text, braccio_cm).map_err(|e| fail("ParseError", e))
}

fn emit(
    drawing: &Drawing,
    svg: Option<&Path>,
    json: Option<&Path>,
    view: &ViewArgs,
    default_json: bool,
) -> Result<(), Failure> {
    let (svg, json) = match (svg, json) {
        (None, None) if default_json => (None, Some(Path::new("-"))),
        (None, None) => (Some(Path::new("-")), None),
        other => other,
    };
    if let Some(p) = json {
        write_output(p, &drawing.to_json())?;
    }
    if let Some(p) = svg {
        let text = emit_svg(drawing, &view.options()).map_err(|e| fail("SvgError", e))?;
        write_output(p, &text)?;
    }
    Ok(())
}

fn render(
    cli: &Cli,
    scene: &Path,
    svg: Option<&Path>,
    json: Option<&Path>,
    view: &ViewArgs,
) -> Result<ExitCode, Failure> {
    let scene = load_scene(scene, cli.braccio_cm)?;
    let report = project_scene(&scene).map_err(|e| fail("ProjectionError", e))?;
    emit(&Drawing::from_projection(&report), svg, json, view, false)?;
    Ok(ExitCode::SUCCESS)
}

fn alberti(args: &AlbertiArgs) -> Result<ExitCode, Failure> {
    if let Some(n) = args.verify_random {
        return verify_random(n, args.seed);
    }
    let (Some(side), Some(distance), Some(tiles), Some(tile)) = (args.side, args.distance, args.tiles, args.tile)
    else {
        unreachable!("clap enforces the grid flags");
    };
    let mut input = AlbertiInput::new(side, distance, tiles, tile);
    input.vp_height = args.vp_height.unwrap_or(input.vp_height);
    input.base_offset = args.offset;
    let grid = step3_assemble(&input).map_err(|e| fail("AlbertiError", e))?;
    emit(
        &Drawing::from_alberti(&grid),
        args.svg.as_deref(),
        args.json.as_deref(),
        &args.view,
        true,
    )?;
    Ok(ExitCode::SUCCESS)
}

/// Worst corner mismatch (cm) and worst diagonal collinearity of one random construction.
fn check_construction(input: &AlbertiInput) -> Result<(f64, f64), Failure> {
    let grid = step3_assemble(input).map_err(|e| fail("AlbertiError", e))?;
    let report = project_scene(&input.equivalent_scene()).map_err(|e| fail("ProjectionError", e))?;
    let direct = Drawing::from_projection(&report).corners;
    let mut corner_err: f64 = 0.0;
    for (row_a, row_b) in grid.corners.iter().zip(&direct) {
        for (a, b) in row_a.iter().zip(row_b) {
            corner_err = corner_err.max(a.distance(*b));
        }
    }
    let n = input.tile_count as usize;
    let diag: Vec<_> = (0..=n).map(|i| grid.corners[i][i]).collect();
    let collinearity = (1..n)
        .map(|i| corner_collinearity(diag[0], diag[i], diag[n]))
        .fold(0.0, f64::max);
    Ok((corner_err, collinearity))
}

fn verify_random(count: u32, seed: u64) -> Result<ExitCode, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_corner, mut worst_line) = (0.0_f64, 0.0_f64);
    for _ in 0..count {
        let side = rng.gen_range(100.0..600.0);
        let tiles = rng.gen_range(1..=12u32);
        let tile = side / f64::from(tiles) * rng.gen_range(0.3..1.0);
        let mut input = AlbertiInput::new(side, rng.gen_range(50.0..800.0), tiles, tile);
        input.vp_height = side * rng.gen_range(0.2..0.9);
        let slack = (side - f64::from(tiles) * tile) / 2.0;
        input.base_offset = if slack > 0.0 {
            rng.gen_range(-slack..=slack)
        } else {
            0.0
        };
        let (c, l) = check_construction(&input)?;
        worst_corner = worst_corner.max(c);
        worst_line = worst_line.max(l);
    }
    println!(
        "verified {count} random constructions (seed {seed}): max corner error {worst_corner:.3e} cm, max diagonal collinearity {worst_line:.3e}"
    );
    if worst_corner > 1e-9 || worst_line > 1e-9 {
        return Err(fail(
            "OracleMismatch",
            "construction disagrees with direct projection beyond 1e-9",
        ));
    }
    Ok(ExitCode::SUCCESS)
}

fn vanishing(cli: &Cli, scene: &Path, format: Format) -> Result<ExitCode, Failure> {
    let scene = load_scene(scene, cli.braccio_cm)?;
    let report = project_scene(&scene).map_err(|e| fail("ProjectionError", e))?;
    let drawing = Drawing::from_projection(&report);
    let rows: Vec<_> = report.vanishing_points.iter().zip(&drawing.vanishing).collect();
    let family_name = |f: &perspectiva::projector::FamilyVanishing| match &f.label {
        Some(l) => format!("\"{l}\""),
        None => {
            let [x, y, z] = f.direction.to_array();
            format!("({x}, {y}, {z})")
        }
    };

    let text = match format {
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(f, v)| {
                    let (kind, point, along) = match v.place {
                        VanishingPlace::Proper(p) => ("proper", json!([p.u, p.w]), serde_json::Value::Null),
                        VanishingPlace::Improper(du, dw) => ("improper", serde_json::Value::Null, json!([du, dw])),
                    };
                    json!({
                        "label": v.label,
                        "family": f.label,
                        "direction": f.direction.to_array().to_vec(),
                        "members": f.members,
                        "kind": kind,
                        "point": point,
                        "canvas_direction": along,
                        "consistent": f.consistent,
                        "deviation": f.deviation,
                    })
                })
                .collect();
            stable_json(json!({"horizon_height": drawing.horizon_height, "vanishing_points": items}))
        }
        Format::Text => {
            let mut out = format!("horizon at {} cm above the canvas base\n", drawing.horizon_height);
            out.push_str(&format!(
                "{:<6} {:<24} {:>7}  {:<32} {:<10} {}\n",
                "label", "family", "members", "vanishing point (cm)", "consistent", "deviation"
            ));
            for (f, v) in &rows {
                let place = match v.place {
                    VanishingPlace::Proper(p) => format!("({:.6}, {:.6})", p.u, p.w),
                    VanishingPlace::Improper(du, dw) => format!("at infinity along ({du:.6}, {dw:.6})"),
                };
                let dev = f.deviation.map_or_else(|| "-".to_string(), |d| format!("{d:.3e}"));
                out.push_str(&format!(
                    "{:<6} {:<24} {:>7}  {:<32} {:<10} {}\n",
                    v.label,
                    family_name(f),
                    f.members,
                    place,
                    if f.consistent { "yes" } else { "NO" },
                    dev
                ));
            }
            out
        }
    };
    write_output(Path::new("-"), &text)?;

    let bad: Vec<String> = report.inconsistent_families().map(family_name).collect();
    if bad.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(fail(
            "InconsistentFamily",
            format!(
                "member lines of {} do not meet at their shared vanishing point",
                bad.join(", ")
            ),
        ))
    }
}

fn check(cli: &Cli, scene: &Path) -> Result<ExitCode, Failure> {
    let scene = load_scene(scene, cli.braccio_cm)?;
    let violations = validate(&scene);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(fail("SceneError", list.join("; ")));
    }
    let f = &scene.frame;
    println!(
        "ok: eye height {} cm, distance {} cm, {} line(s), {} floor(s), {} figure(s)",
        f.eye_height,
        f.canvas_distance,
        scene.lines.len(),
        scene.floors.len(),
        scene.figures.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Render { scene, svg, json, view } => render(cli, scene, svg.as_deref(), json.as_deref(), view),
        Command::Alberti(args) => alberti(args),
        Command::Reconstruct {
            annotation,
            knee_ratio,
            knee_tolerance,
            out,
        } => {
            let ann = Annotation::from_json(&read_input(annotation)?).map_err(|e| fail("ReconstructError", e))?;
            let opts = ReconstructOptions {
                knee_ratio: *knee_ratio,
                knee_tolerance: *knee_tolerance,
            };
            let result = reconstruct(&ann, &opts).map_err(|e| fail("ReconstructError", e))?;
            write_output(out, &to_stable_json(&result))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Vanishing { scene, format } => vanishing(cli, scene, *format),
        Command::Check { scene } => check(cli, scene),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure { name, message }) => {
            eprintln!("{name}: {message}");
            ExitCode::from(1)
        }
    }
}
