use std::path::Path;

use obprm::io::{parse_point, parse_samples_csv, parse_shape, shape_to_json};
use obprm::montecarlo::ExperimentConfig;
use proptest::prelude::*;

fn exercise(text: &str) {
    if let Ok(set) = parse_shape(text) {
        let again = parse_shape(&shape_to_json(&set)).unwrap();
        assert_eq!(again.parts().len(), set.parts().len());
    }
    if let Ok(cfg) = ExperimentConfig::parse(text, Path::new(".")) {
        assert!(cfg.validate().is_ok());
    }
    if let Ok(points) = parse_samples_csv(text) {
        if let Some(first) = points.first() {
            assert!(points.iter().all(|p| p.dim() == first.dim()));
        }
    }
    if let Ok(p) = parse_point(text) {
        assert!(p.coords().iter().all(|x| x.is_finite()));
    }
}

#[test]
fn fuzz_corpus_replays() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut seen = 0;
    for dir in std::fs::read_dir(&root).unwrap() {
        for file in std::fs::read_dir(dir.unwrap().path()).unwrap() {
            exercise(&std::fs::read_to_string(file.unwrap().path()).unwrap());
            seen += 1;
        }
    }
    assert!(seen >= 4);
}

#[test]
fn corpus_seeds_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |p: &str| std::fs::read_to_string(root.join(p)).unwrap();
    assert!(parse_shape(&read("shape_json/plus.json")).is_ok());
    assert!(ExperimentConfig::parse(&read("experiment_config/experiment.json"), Path::new(".")).is_ok());
    assert_eq!(parse_samples_csv(&read("samples_csv/nodes.csv")).unwrap().len(), 1);
    assert_eq!(parse_point(&read("point/planar")).unwrap().coords(), &[-1.0, 0.5]);
}

const SHAPE: &str = r#"{"dimension":2,"parts":[{"halfspaces":[{"normal":[1,0],"offset":1},{"normal":[-1,0],"offset":1},{"normal":[0,1],"offset":1},{"normal":[0,-1],"offset":1}]}]}"#;

proptest! {
    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        exercise(&text);
    }

    #[test]
    fn structured_text_never_panics(text in "[-0-9.,eE \\n#xyinfa]{0,120}") {
        exercise(&text);
    }

    #[test]
    fn mutated_shape_never_panics(pos in 0usize..SHAPE.len(), byte in "[-0-9.,:{}\\[\\]a-z\"]") {
        let mut text = SHAPE.to_string();
        text.replace_range(pos..pos + 1, &byte);
        exercise(&text);
    }
}
