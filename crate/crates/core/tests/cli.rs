use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obprm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn exit_code_matrix() {
    let square = fixture("unit_square.json");
    let square = square.to_str().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{\"dimension\": 2").unwrap();
    let broken = broken.to_str().unwrap();

    let cases: &[(&[&str], i32)] = &[
        (
            &[
                "predict",
                "--dim",
                "2",
                "--boundary",
                "4",
                "--delta",
                "0.1",
                "--bounding-diameter",
                "2",
            ],
            0,
        ),
        (&["--help"], 0),
        (&["--version"], 0),
        (&[], 2),
        (&["frobnicate"], 2),
        (&["obprm", "--delta", "0.1"], 2),
        (&["obprm", "--shape", square, "--delta=-1"], 2),
        (&["obprm", "--shape", square, "--delta", "0.1", "--rays", "0"], 2),
        (
            &["obprm", "--shape", square, "--delta", "0.1", "--ray-length", "soon"],
            2,
        ),
        (&["obprm", "--shape", "/no/such/shape.json", "--delta", "0.1"], 2),
        (
            &[
                "predict",
                "--dim",
                "2",
                "--boundary",
                "4",
                "--delta",
                "3",
                "--bounding-diameter",
                "2",
            ],
            2,
        ),
        (
            &[
                "plan",
                "--env",
                square,
                "--samples",
                square,
                "--start",
                "1,x",
                "--goal",
                "2,2",
            ],
            2,
        ),
        (&["--threads", "0", "crofton", "--shape", square], 2),
        (&["crofton", "--shape", broken], 1),
        (
            &[
                "obprm",
                "--shape",
                square,
                "--delta",
                "0.1",
                "--out",
                "/no/such/dir/nodes.csv",
            ],
            1,
        ),
        (&["obprm", "--shape", square, "--delta", "0.1", "--origin", "5,5"], 1),
        (&["crofton", "--shape", square, "--lines", "1000"], 0),
    ];
    for (args, want) in cases {
        assert_eq!(code(args), *want, "{args:?}");
    }
}

#[test]
fn predict_prints_decimal() {
    let out = stdout(&[
        "predict",
        "--dim",
        "2",
        "--boundary",
        "4",
        "--delta",
        "0.1",
        "--bounding-diameter",
        "2",
        "--variant",
        "paper",
    ]);
    assert_eq!(out, "0.0785564184522\n");
    let corrected = stdout(&[
        "predict",
        "--dim",
        "2",
        "--boundary",
        "4",
        "--delta",
        "0.1",
        "--bounding-diameter",
        "2",
        "--variant",
        "corrected",
    ]);
    assert!(corrected.trim().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn obprm_writes_reproducible_csv_and_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let shape = fixture("plus.json");
    let mut files = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let csv = tmp.path().join(format!("nodes{i}.csv"));
        let svg = tmp.path().join(format!("nodes{i}.svg"));
        let out = stdout(&[
            "--threads",
            threads,
            "obprm",
            "--shape",
            shape.to_str().unwrap(),
            "--rays",
            "200",
            "--delta",
            "1",
            "--ray-length",
            "4.5",
            "--seed",
            "9",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ]);
        assert!(out.starts_with("success_rate="));
        files.push((std::fs::read(&csv).unwrap(), std::fs::read_to_string(&svg).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let (csv, svg) = &files[0];
    let text = String::from_utf8(csv.clone()).unwrap();
    assert_eq!(text.lines().count(), 201);
    let free = text.lines().filter(|l| l.contains(",free,")).count();
    assert_eq!(svg.matches("<circle").count(), free);
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn minkowski_of_unit_squares() {
    let sq = fixture("unit_square.json");
    let out = stdout(&[
        "minkowski",
        "--obstacle",
        sq.to_str().unwrap(),
        "--robot",
        sq.to_str().unwrap(),
    ]);
    assert!(out.ends_with("volume=4, surface=8\n"), "{out}");
    let json = out.rsplit_once("}\n").unwrap().0.to_string() + "}";
    let set = obprm::io::parse_shape(&json).unwrap();
    assert_eq!(set.volume().unwrap(), 4.0);

    let tmp = tempfile::tempdir().unwrap();
    let dest = tmp.path().join("c.json");
    let robot = fixture("robot_square.json");
    let out = stdout(&[
        "minkowski",
        "--obstacle",
        sq.to_str().unwrap(),
        "--robot",
        robot.to_str().unwrap(),
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(out, "volume=1.44, surface=4.8\n");
    assert!(obprm::io::load_shape(&dest).is_ok());
}

#[test]
fn drop_segments_and_crofton_report_estimates() {
    let sq = fixture("unit_square.json");
    let out = stdout(&[
        "drop-segments",
        "--shape",
        sq.to_str().unwrap(),
        "--delta",
        "0.1",
        "--trials",
        "10000",
        "--seed",
        "3",
    ]);
    assert!(out.starts_with("rate=") && out.contains("trials=10000"));
    assert_eq!(
        out,
        stdout(&[
            "drop-segments",
            "--shape",
            sq.to_str().unwrap(),
            "--delta",
            "0.1",
            "--trials",
            "10000",
            "--seed",
            "3"
        ])
    );
    let out = stdout(&[
        "crofton",
        "--shape",
        sq.to_str().unwrap(),
        "--lines",
        "200000",
        "--seed",
        "1",
    ]);
    let value: f64 = out
        .trim_start_matches("perimeter=")
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 4.0).abs() < 0.1, "{out}");
}

#[test]
fn plan_finds_path_or_reports_none() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("samples.csv");
    std::fs::write(&samples, "x,y\n-1,2\n2,2\n2,-1\n").unwrap();
    let env = fixture("unit_square.json");
    let args = |start: &str, goal: &str| {
        vec![
            "plan".to_string(),
            "--env".into(),
            env.to_str().unwrap().into(),
            "--samples".into(),
            samples.to_str().unwrap().into(),
            "--k".into(),
            "2".into(),
            "--start".into(),
            start.into(),
            "--goal".into(),
            goal.into(),
        ]
    };
    let a = args("-1,0.5", "2,0.5");
    let out = stdout(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.first(), Some(&"-1,0.5"));
    assert_eq!(lines.last(), Some(&"2,0.5"));
    assert!(lines.len() >= 3);

    std::fs::write(&samples, "x,y\n-1,-1\n").unwrap();
    let out = stdout(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out == "NO PATH\n" || out.lines().count() >= 3, "{out}");
}
