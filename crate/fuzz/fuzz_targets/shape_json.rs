#![no_main]
use libfuzzer_sys::fuzz_target;
use obprm::io::{parse_shape, shape_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = parse_shape(text) {
        let again = parse_shape(&shape_to_json(&set)).expect("serialized shape parses");
        assert_eq!(again.parts().len(), set.parts().len());
        let _ = set.volume();
        let _ = set.diameter();
    }
});
