use std::path::Path;
use std::process::Command;

use kgmix::cli::{run, ExperimentConfig, ExperimentName, RunManifest, EXIT_FAIL, EXIT_INVALID, EXIT_PASS, MANIFEST_FILE};

fn counterexample_in(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::defaults_for(ExperimentName::Counterexample)
    }
}

#[test]
fn counterexample_defaults_pass_with_one_trace() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&counterexample_in(dir.path())).unwrap();
    assert!(m.passed, "{:?}", m.checks);
    assert_eq!(m.exit_code(), EXIT_PASS);
    assert_eq!(m.artifacts.len(), 1);
    let text = std::fs::read_to_string(dir.path().join(&m.artifacts[0].file)).unwrap();
    assert_eq!(text.lines().count(), m.artifacts[0].rows + 1);
    // 17 significant digits round-trip exactly
    let cell = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let x: f64 = cell.parse().unwrap();
    assert_eq!(format!("{x:.16e}"), cell);
    let back = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(back, m);
}

#[test]
fn identical_config_gives_identical_digests() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run(&counterexample_in(a.path())).unwrap();
    let mb = run(&counterexample_in(b.path())).unwrap();
    assert_eq!(ma.artifacts, mb.artifacts);
    let other = ExperimentConfig {
        seed: 99,
        ..counterexample_in(b.path())
    };
    assert_ne!(run(&other).unwrap().artifacts, ma.artifacts);
}

#[test]
fn manifest_config_reproduces_the_payload() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = ExperimentConfig {
        output_dir: a.path().to_path_buf(),
        ..ExperimentConfig::defaults_for(ExperimentName::CovarianceConvergence)
    };
    let first = run(&cfg).unwrap();
    let echoed = ExperimentConfig::from_toml_str(&first.config.to_toml_string().unwrap()).unwrap();
    let second = run(&ExperimentConfig {
        output_dir: b.path().to_path_buf(),
        ..echoed
    })
    .unwrap();
    assert_eq!(first.artifacts, second.artifacts);
}

#[test]
fn window_violation_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        output_dir: dir.path().to_path_buf(),
        times: vec![50.0, 195.0],
        ..ExperimentConfig::defaults_for(ExperimentName::Clt)
    };
    let err = run(&cfg).unwrap_err().to_string();
    assert!(err.contains("L/2"), "{err}");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn missing_output_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = counterexample_in(&dir.path().join("absent"));
    assert!(run(&cfg).is_err());
}

fn binary(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_kgmix"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let good = write("good.toml", "experiment = \"counterexample\"\n");
    assert_eq!(binary(&[&good, "--output-dir", out, "--seed", "4", "--workers", "2"]), EXIT_PASS);
    assert!(dir.path().join(MANIFEST_FILE).exists());

    let odd = write("odd.toml", "experiment = \"counterexample\"\npoints = 255\n");
    assert_eq!(binary(&[&odd, "--output-dir", out]), EXIT_INVALID);
    let garbage = write("garbage.toml", "experiment = \"counterexample\"\nbogus = 1\n");
    assert_eq!(binary(&[&garbage, "--output-dir", out]), EXIT_INVALID);

    // a vanishing pair gives mu_t = 1 throughout, so the oscillation check fails
    let flat = write(
        "flat.toml",
        "experiment = \"counterexample\"\npsi_a0 = 0.0\npsi_a1 = 0.0\n",
    );
    assert_eq!(binary(&[&flat, "--output-dir", out]), EXIT_FAIL);
}
