use std::path::Path;
use std::process::{Command, Output};

use nagumo_cli::{RunSummary, HISTOGRAM_FILE, PLOT_FILE, SUMMARY_FILE};
use tempfile::TempDir;

fn nagumo(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nagumo"));
    cmd.args(args).env_remove("NAGUMO_SEED");
    if let Some(s) = env_seed {
        cmd.env("NAGUMO_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let out = dir.join(format!("{name}_out"));
    let text = format!(
        "{body}\n[output]\ndirectory = {:?}\n",
        out.to_str().unwrap()
    );
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path, name: &str) -> RunSummary {
    let text = std::fs::read_to_string(dir.join(format!("{name}_out")).join(SUMMARY_FILE)).unwrap();
    serde_json::from_str(&text).unwrap()
}

const LANGEVIN_SMALL: &str = r#"
[run]
regime = "langevin"
t_total = 200.0
burn_in = 10.0
seed = 5
"#;

#[test]
fn smoke_run_writes_csv_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "smoke", LANGEVIN_SMALL);
    let out = nagumo(&["run", &cfg], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let dir = tmp.path().join("smoke_out");
    let csv = std::fs::read_to_string(dir.join(HISTOGRAM_FILE)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "bin_left,bin_right,empirical_density,exact_density"
    );
    assert_eq!(lines.len(), 51);
    assert!(csv.ends_with('\n'));
    for row in &lines[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[0] < cols[1] && cols[2] >= 0.0 && cols[3] > 0.0);
    }
    assert!(dir.join(PLOT_FILE).exists());

    let s = summary(tmp.path(), "smoke");
    assert_eq!(s.config.run.seed, 5);
    assert_eq!(s.trajectories.len(), 1);
    assert_eq!(s.total_records, s.raw.averages.count());
    assert!(s.l1_to_exact.is_some());
    assert!(s.first_integral.skipped.is_some());
    assert!(s.lambda_gaussian.skipped.is_some());
}

#[test]
fn summary_numbers_recompute_from_raw_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "raw",
        "[run]\nregime = \"sdc\"\nt_total = 200.0\nburn_in = 10.0\n",
    );
    assert!(nagumo(&["run", &cfg], None).status.success());
    let s = summary(tmp.path(), "raw");
    let fd = nagumo_core::fd_residual(&s.raw.averages, s.config.noise.d).unwrap();
    assert_eq!(fd, s.fd_residual);
    assert_eq!(
        s.mass_below_alpha,
        s.raw.histogram.mass_below(s.config.model.alpha)
    );
    let lam = s.raw.averages.estimate(nagumo_core::Observable::LambdaHess);
    assert_eq!(Some(lam), s.lambda_hessian);

    // the config echo reproduces the run
    let echo = tmp.path().join("echo.toml");
    let mut cfg2 = s.config.clone();
    cfg2.output.directory = tmp.path().join("echo_out");
    std::fs::write(&echo, cfg2.to_toml_string()).unwrap();
    assert!(nagumo(&["run", echo.to_str().unwrap()], None)
        .status
        .success());
    let a = std::fs::read(tmp.path().join("raw_out").join(HISTOGRAM_FILE)).unwrap();
    let b = std::fs::read(tmp.path().join("echo_out").join(HISTOGRAM_FILE)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for regime in ["langevin", "sdc", "deterministic"] {
        let body = format!(
            "[run]\nregime = \"{regime}\"\nt_total = 100.0\nburn_in = 1.0\ntrajectories = 3\n"
        );
        let cfg = write_config(tmp.path(), regime, &body);
        let path = tmp
            .path()
            .join(format!("{regime}_out"))
            .join(HISTOGRAM_FILE);
        assert!(nagumo(&["run", &cfg], None).status.success());
        let first = std::fs::read(&path).unwrap();
        assert!(nagumo(&["run", &cfg], None).status.success());
        assert_eq!(first, std::fs::read(&path).unwrap(), "{regime}");
    }
}

#[test]
fn invalid_config_exits_with_code_2_and_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("neg_d", "[noise]\nD = -0.1\n", "noise.D"),
        (
            "burn",
            "[run]\nt_total = 5.0\nburn_in = 6.0\n",
            "run.t_total",
        ),
        ("traj", "[run]\ntrajectories = 0\n", "run.trajectories"),
        ("typo", "[model]\nalhpa = 0.3\n", "alhpa"),
        ("regime", "[run]\nregime = \"euler\"\n", "regime"),
    ];
    for (name, body, needle) in cases {
        let cfg = write_config(tmp.path(), name, body);
        let out = nagumo(&["run", &cfg], None);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let out = nagumo(
        &["run", tmp.path().join("missing.toml").to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_code_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "diverge",
        "[run]\nregime = \"langevin\"\ndt = 5.0\nt_total = 10000.0\nburn_in = 0.0\nrecord_stride = 1\n",
    );
    let out = nagumo(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("t = ") && err.contains("u["), "{err}");
}

#[test]
fn seed_precedence_flag_env_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "seed", LANGEVIN_SMALL);
    assert!(nagumo(&["run", &cfg], Some("77")).status.success());
    assert_eq!(summary(tmp.path(), "seed").config.run.seed, 77);
    assert!(nagumo(&["run", &cfg, "--seed", "9"], Some("77"))
        .status
        .success());
    assert_eq!(summary(tmp.path(), "seed").config.run.seed, 9);
    assert!(nagumo(&["run", &cfg], None).status.success());
    assert_eq!(summary(tmp.path(), "seed").config.run.seed, 5);
    assert_eq!(nagumo(&["run", &cfg], Some("nope")).status.code(), Some(2));
}

#[test]
fn many_short_trajectories_match_one_long_one() {
    let tmp = TempDir::new().unwrap();
    let one = write_config(
        tmp.path(),
        "one",
        "[run]\nregime = \"langevin\"\nt_total = 100000.0\nburn_in = 1000.0\ntrajectories = 1\nseed = 11\n",
    );
    let four = write_config(
        tmp.path(),
        "four",
        "[run]\nregime = \"langevin\"\nt_total = 25750.0\nburn_in = 1000.0\ntrajectories = 4\nseed = 12\n",
    );
    assert!(nagumo(&["run", &one], None).status.success());
    assert!(nagumo(&["run", &four], None).status.success());
    let a = summary(tmp.path(), "one");
    let b = summary(tmp.path(), "four");
    assert_eq!(a.total_records, b.total_records);
    assert_eq!(
        b.trajectories.iter().map(|t| t.stream).collect::<Vec<_>>(),
        vec![0, 1, 2, 3]
    );
    let l1 = nagumo_core::statistics::histogram_l1(&a.raw.histogram, &b.raw.histogram).unwrap();
    assert!(l1 < 0.03, "L1 = {l1}");
}

#[test]
fn validate_flags_a_corrupted_h() {
    let out = nagumo(&["validate", "--quick", "--json", "--flip-h"], None);
    assert_eq!(out.status.code(), Some(1));
    let verdict: nagumo_cli::Verdict = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!verdict.pass);
    let failed: Vec<&str> = verdict.failures().map(|c| c.name.as_str()).collect();
    assert!(!failed.is_empty());
    assert!(
        failed.iter().all(|n| n.starts_with("liouville_residual/")),
        "{failed:?}"
    );
    // nothing short-circuits: the statistical checks still ran
    assert!(verdict.checks.iter().any(|c| c.name == "fd_residual/sdc"));
}

#[test]
fn validate_quick_passes_and_gates_first_integral() {
    let out = nagumo(&["validate", "--quick", "--json"], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let verdict: nagumo_cli::Verdict = serde_json::from_slice(&out.stdout).unwrap();
    let skipped: Vec<&str> = verdict
        .checks
        .iter()
        .filter(|c| c.status == nagumo_cli::validate::Status::Skipped)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(skipped, ["first_integral/gamma=1"]);
    assert!(
        verdict
            .checks
            .iter()
            .filter(|c| c.name.starts_with("first_integral/"))
            .count()
            >= 5
    );
}
