use std::path::Path;
use std::process::{Command, Output};

use cli_harness::output::{CSV_FILE, CSV_HEADER, PLOT_FILE, SUMMARY_FILE};
use cli_harness::OUTPUT_ENV;

fn slab_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slab-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove(OUTPUT_ENV)
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

const SMALL: &str = r#"
t_final = 0.1
[grid]
cells = 40
layer_cells = 6
[time]
records = 20
"#;

fn write_config(dir: &Path, name: &str, head: &str) -> String {
    let file = format!("{name}.toml");
    std::fs::write(dir.join(&file), format!("{head}\n{SMALL}")).unwrap();
    file
}

#[test]
fn presets_list_shows_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = slab_lab(&["presets", "list"], dir.path());
    assert!(o.status.success());
    let (out, _) = text(&o);
    for p in cli_harness::PRESETS {
        assert!(out.contains(p.name));
    }
}

#[test]
fn constant_preset_has_vanishing_norms_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c", "preset = \"constant\"\nepsilons = [0.2, 0.1, 0.05]");
    let o = slab_lab(&["run", &cfg, "--out", "res"], dir.path());
    let (out, err) = text(&o);
    assert_eq!(o.status.code(), Some(0), "{out}\n{err}");
    let csv = std::fs::read_to_string(dir.path().join("res").join(CSV_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert!(CSV_HEADER.join(",").starts_with("epsilon,norm_sup_t_l2,norm_rbar,norm_fluct,norm_trace,"));
    let mut rows = 0;
    for line in lines {
        rows += 1;
        let v: Vec<&str> = line.split(',').collect();
        for x in &v[1..6] {
            assert!(x.parse::<f64>().unwrap().abs() <= 1e-10, "{line}");
        }
    }
    assert_eq!(rows, 3);
    for f in [SUMMARY_FILE, PLOT_FILE] {
        assert!(dir.path().join("res").join(f).exists());
    }
    let summary: toml::Table = std::fs::read_to_string(dir.path().join("res").join(SUMMARY_FILE)).unwrap().parse().unwrap();
    assert_eq!(summary["schema_version"].as_integer(), Some(1));
    assert_eq!(summary["passed"].as_bool(), Some(true));
}

#[test]
fn incompatible_preset_is_refused_in_plain_words() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "i", "preset = \"incompatible\"\nepsilons = [0.2, 0.1, 0.05]");
    for cmd in ["run", "validate"] {
        let o = slab_lab(&[cmd, &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2));
        let (_, err) = text(&o);
        assert!(err.contains("in-flow datum matches the initial datum"), "{err}");
        assert!(err.contains("left wall"), "{err}");
    }
    assert!(!dir.path().join("slab-lab-out").exists());
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v", "preset = \"specular-quiet\"\nepsilons = [0.2, 0.1, 0.05]");
    let o = slab_lab(&["validate", &cfg], dir.path());
    let (out, err) = text(&o);
    assert!(o.status.success(), "{err}");
    assert!(out.contains("certificate: ok"));
    assert!(out.contains("initial datum has zero slope at a specular wall"));
}

#[test]
fn strict_mode_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s", "preset = \"constant\"\nepsilons = [0.2, 0.1, 0.05]\nspeed = 3");
    let o = slab_lab(&["validate", &cfg], dir.path());
    assert!(o.status.success());
    assert!(text(&o).1.contains("ignoring unknown key `speed`"));
    let o = slab_lab(&["--strict", "validate", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).1.contains("unknown key `speed`"));
}

#[test]
fn epsilon_list_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e", "preset = \"constant\"\nepsilons = [0.1, 0.2]");
    let o = slab_lab(&["run", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let (_, err) = text(&o);
    assert!(err.contains("at least 3") && err.contains("strictly decreasing"), "{err}");
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "o", "preset = \"constant\"\nepsilons = [0.2, 0.1, 0.05]\noutput = \"from-config\"");
    let env_run = |extra: &[&str]| {
        let mut args = vec!["run", cfg.as_str()];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_slab-lab"))
            .args(&args)
            .current_dir(dir.path())
            .env(OUTPUT_ENV, "from-env")
            .output()
            .unwrap()
    };
    assert!(env_run(&["--out", "from-flag"]).status.success());
    assert!(dir.path().join("from-flag").join(CSV_FILE).exists());
    assert!(env_run(&[]).status.success());
    assert!(dir.path().join("from-config").join(CSV_FILE).exists());
    assert!(!dir.path().join("from-env").exists());

    let bare = write_config(dir.path(), "b", "preset = \"constant\"\nepsilons = [0.2, 0.1, 0.05]");
    let o = Command::new(env!("CARGO_BIN_EXE_slab-lab"))
        .args(["run", &bare])
        .current_dir(dir.path())
        .env(OUTPUT_ENV, "from-env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("from-env").join(CSV_FILE).exists());
}

#[test]
fn failed_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // first-order data cannot meet a window around one half
    let cfg = write_config(dir.path(), "f", "preset = \"inflow-sine\"\nepsilons = [0.2, 0.1, 0.05]\nchecks = [\"rate-window\"]");
    let o = slab_lab(&["run", &cfg, "--out", "res"], dir.path());
    let (out, _) = text(&o);
    assert_eq!(o.status.code(), Some(1), "{out}");
    assert!(out.contains("[FAIL] rate-window"));
    assert!(dir.path().join("res").join(CSV_FILE).exists());
}

#[test]
fn milne_command_reports_the_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = slab_lab(&["milne", "--data", "2.5"], dir.path());
    let (out, err) = text(&o);
    assert!(o.status.success(), "{err}");
    let line = out.lines().find(|l| l.starts_with("phi_inf = ")).unwrap();
    let v: f64 = line.trim_start_matches("phi_inf = ").parse().unwrap();
    assert!((v - 2.5).abs() <= 1e-12);
    let o = slab_lab(&["milne", "--data", "mu"], dir.path());
    let out = text(&o).0;
    let line = out.lines().find(|l| l.starts_with("phi_inf = ")).unwrap();
    let v: f64 = line.trim_start_matches("phi_inf = ").parse().unwrap();
    assert!((v - 0.709_609_318_3).abs() <= 1e-6, "{v}");
    assert_eq!(slab_lab(&["milne", "--data", "mu +"], dir.path()).status.code(), Some(2));
}
