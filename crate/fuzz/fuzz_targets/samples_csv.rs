#![no_main]
use libfuzzer_sys::fuzz_target;
use obprm::io::parse_samples_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_samples_csv(text) {
        if let Some(first) = points.first() {
            assert!(points.iter().all(|p| p.dim() == first.dim()));
        }
    }
});
