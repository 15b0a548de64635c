use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn orbital(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbital")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, text: &str) -> Output {
    let cfg = dir.join("experiment.ini");
    fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    orbital(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rotation_field_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        dir.path(),
        "[scenario]\nname = rotation\n[run.1]\nop = expectation_field\nfunction = cos1\ngrid = 100\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let path = dir.path().join("out/run_1_expectation_field.csv");
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["schema_version", "point_repr", "value_re", "value_im", "converged", "stages"]);
    assert_eq!(read_csv(&path).len(), 100);
}

#[test]
fn spiral_field_reports_the_jump_and_matches_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        dir.path(),
        "[scenario]\nname = spiral_two_circles\n[run.1]\nop = expectation_field\nfunction = z\ngrid = 90\nn_max = 2^22\njump_window = 0.05\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("Jump-detected"));
    let rows = read_csv(&dir.path().join("out/summary.csv"));
    assert_eq!(&rows[0][7], "4194304", "n_max override is recorded");
    assert_eq!(&rows[0][8], "pass");
}

#[test]
fn dyadic_classification_is_reflexive_by_the_metric_stable_rule() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "[scenario]\nname = dyadic_product\n[run.1]\nop = classify_module\nsamples = 32\n");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("Reflexive (metric-stable rule)"), "{}", stdout(&o));
}

#[test]
fn ground_truth_mismatch_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // Too small a budget to reach the recorded mean of the spiral tail.
    let o = run_config(
        dir.path(),
        "[scenario]\nname = spiral_two_circles\n[run.1]\nop = folner_average\nfunction = z\npoints = sigma;tau=-20\nn_max = 64\n",
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn config_errors_exit_with_two_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "[scenario]\nname = rotation\n[run.1]\nop = spectral_gap\n");
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("`op`"), "{err}");
    assert_eq!(orbital(&[]).status.code(), Some(2), "--config is required");
}

#[test]
fn io_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.ini");
    assert_eq!(orbital(&["--config", missing.to_str().unwrap()]).status.code(), Some(3));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = dir.path().join("c.ini");
    fs::write(&cfg, "[scenario]\nname = rotation\n[run.1]\nop = orbit_probe\npoints = t=0\n").unwrap();
    let out = blocker.join("sub");
    let o = orbital(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn operation_errors_are_recorded_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        dir.path(),
        "[scenario]\nname = spiral_two_circles\n[run.1]\nop = orbit_closure_average\nfunction = z\npoints = plus;t=0.1, sigma;tau=1\n[run.2]\nop = orbit_probe\npoints = plus;t=0.1\ncutoff = 64\n",
    );
    assert_eq!(o.status.code(), Some(1));
    let rows = read_csv(&dir.path().join("out/run_1_orbit_closure_average.csv"));
    assert_eq!(&rows[0][6], "ok");
    assert_eq!(&rows[1][6], "error");
    assert!(dir.path().join("out/run_2_orbit_probe.csv").exists(), "the run continues after an error");
}

#[test]
fn list_scenarios_names_every_fixture() {
    let o = orbital(&["--list-scenarios"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["rotation", "rational_rotation", "varying_angle_cylinder", "spiral_two_circles", "spiral_identified", "triple_cone", "dyadic_product"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[scenario]\nname = varying_angle_cylinder\nseed = 1\n[run.1]\nop = stability_probe\npoints = j=0;t=0.3\neps = 0.5\nradius = 0.1\nhorizon = 2^10\ntrials = 16\n";
    let cfg = dir.path().join("c.ini");
    fs::write(&cfg, text).unwrap();
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let o = orbital(&["--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out.join("run_1_stability_probe.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}
