#![no_main]

use libfuzzer_sys::fuzz_target;
use perspectiva::{parse_scene, print_scene};

// Anything the parser accepts must print and reparse to the same scene.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(scene) = parse_scene(text) else { return };
    let printed = print_scene(&scene);
    let again = parse_scene(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(again, scene);
    let _ = perspectiva::projector::project_scene(&scene);
});
