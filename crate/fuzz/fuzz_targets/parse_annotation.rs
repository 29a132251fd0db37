#![no_main]

use libfuzzer_sys::fuzz_target;
use perspectiva::reconstruct::{reconstruct, Annotation, ReconstructOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ann) = Annotation::from_json(text) {
        // Accepted annotations must survive the whole inverse pipeline without panicking.
        let _ = reconstruct(&ann, &ReconstructOptions::default());
        assert_eq!(Annotation::from_json(&ann.to_json()).as_ref(), Ok(&ann));
    }
});
