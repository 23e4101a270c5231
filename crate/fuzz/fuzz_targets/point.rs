#![no_main]
use libfuzzer_sys::fuzz_target;
use obprm::io::parse_point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_point(text) {
        assert!(p.dim() >= 1);
        assert!(p.coords().iter().all(|x| x.is_finite()));
    }
});
