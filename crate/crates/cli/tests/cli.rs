use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn carpet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const HEADER: &str = r#""outer": [[0,1],[0,0],[1,0],[1,1]], "marks": [0, 0.25, 0.5, 0.75], "meta": {}"#;

fn write_input(dir: &Path, disks: &str) -> String {
    let p = dir.join("in.json");
    fs::write(&p, format!("{{{HEADER}, \"disks\": [{disks}]}}")).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn zero_level_is_a_usage_error() {
    assert_eq!(code(&carpet(&["gen", "--standard", "0"])), 2);
}

#[test]
fn unknown_flag_and_missing_input_are_usage_errors() {
    assert_eq!(code(&carpet(&["solve", "--standard", "1", "--bogus"])), 2);
    assert_eq!(code(&carpet(&["solve"])), 2);
    let both = carpet(&["solve", "--standard", "1", "--input", "x.json"]);
    assert_eq!(code(&both), 2);
}

#[test]
fn gen_round_trips_through_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    let f = file.to_str().unwrap();
    assert_eq!(code(&carpet(&["gen", "--standard", "2", "-o", f])), 0);
    let out = dir.path().join("out");
    let o = carpet(&["solve", "--input", f, "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let layout: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("layout.json")).unwrap()).unwrap();
    assert_eq!(layout["squares"].as_array().unwrap().len(), 73);
}

#[test]
fn disconnected_input_fails_in_passage() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(
        dir.path(),
        r#"{"id": 0, "polygon": [[0,0.4],[0.2,0.4],[0.2,0.6],[0,0.6]]},
           {"id": 1, "polygon": [[0.8,0.4],[1,0.4],[1,0.6],[0.8,0.6]]}"#,
    );
    let o = carpet(&["solve", "--input", &input, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("passage: graph-disconnected"), "{}", stderr(&o));
}

#[test]
fn overlapping_disks_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(
        dir.path(),
        r#"{"id": 0, "polygon": [[0.1,0.1],[0.6,0.1],[0.6,0.6],[0.1,0.6]]},
           {"id": 1, "polygon": [[0.4,0.4],[0.9,0.4],[0.9,0.9],[0.4,0.9]]}"#,
    );
    let o = carpet(&["solve", "--input", &input]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("input: validation failed"), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    for text in ["not json", "{}", r#"{"outer": 3}"#, "[1,2,3]"] {
        fs::write(&p, text).unwrap();
        let o = carpet(&["solve", "--input", p.to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{text}");
        assert!(stderr(&o).starts_with("error: input: "), "{}", stderr(&o));
    }
    let o = carpet(&["solve", "--input", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn failing_checks_exit_three_and_still_write_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // an unreachable conjugate tolerance trips a check
    let o = carpet(&["verify", "--standard", "2", "--tol-conj", "1e-300", "-o", out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"passed\": false"));
    assert_eq!(code(&carpet(&["report", out])), 3);
}

#[test]
fn verify_passes_and_report_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = carpet(&["verify", "--standard", "2", "-o", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["report.json", "solution.json", "layout.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(a.path().join("timings.json").exists());
    assert_eq!(code(&carpet(&["report", a.path().to_str().unwrap()])), 0);
}

#[test]
fn render_draws_squares_frame_and_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = carpet(&["render", "--standard", "1", "--levels", "0.5", "-o", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let layout = fs::read_to_string(dir.path().join("layout.svg")).unwrap();
    assert_eq!(layout.matches("<rect").count(), 9);
    assert_eq!(layout.matches("class=\"frame\"").count(), 1);
    let input = fs::read_to_string(dir.path().join("input.svg")).unwrap();
    assert_eq!(input.matches("<polyline").count(), 1);
    assert_eq!(input.matches("class=\"side\"").count(), 4);
    assert_eq!(input.matches("class=\"disk\"").count(), 9);

    let again = tempfile::tempdir().unwrap();
    carpet(&["render", "--standard", "1", "--levels", "0.5", "-o", again.path().to_str().unwrap()]);
    for f in ["input.svg", "layout.svg"] {
        assert_eq!(fs::read(dir.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap());
    }
}

#[test]
fn render_from_saved_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&carpet(&["solve", "--standard", "1", "-o", out])), 0);
    let layout = dir.path().join("layout.json");
    let o = carpet(&["render", "--standard", "1", "--layout", layout.to_str().unwrap(), "-o", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("layout.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 9);
}

#[test]
fn breakpoint_level_is_a_render_error() {
    let o = carpet(&["render", "--standard", "1", "--levels", "0", "-o", "/tmp"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("render: "), "{}", stderr(&o));
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (d, threads) in [(&a, "1"), (&b, "4")] {
        let o = Command::new(env!("CARGO_BIN_EXE_carpet"))
            .args(["solve", "--standard", "2", "-o", d.path().to_str().unwrap()])
            .env("CARPET_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        fs::read(a.path().join("solution.json")).unwrap(),
        fs::read(b.path().join("solution.json")).unwrap()
    );
    let o = Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(["gen", "--standard", "1"])
        .env("CARPET_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
