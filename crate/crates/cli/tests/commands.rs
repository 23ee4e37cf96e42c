use std::path::Path;
use std::process::{Command, Output};

use seqdisc_cli::config::RunConfig;
use seqdisc_cli::{helstrom_report, noisy_sweep_csv, simulate_report};

const MIRRORED: &str = r#"
[ensemble]
priors = [0.5, 0.5]
bloch = [[0.3, 0.3, 0.3], [0.3, 0.3, -0.3]]
"#;

const TILTED_UNEQUAL: &str = r#"
[ensemble]
priors = [0.55, 0.45]
bloch = [[0.2, 0.3, -0.4], [-0.2, -0.3, 0.35]]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqdisc"))
}

fn run_with(config: &str, args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, config).unwrap();
    bin().args(args).arg("--config").arg(&path).output().unwrap()
}

fn value_of(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {report}"))
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn helstrom_examples() {
    let r = helstrom_report(&RunConfig::parse(MIRRORED).unwrap()).unwrap();
    assert!((value_of(&r, "helstrom_bound") - 0.65).abs() < 1e-12);

    let orth = "[ensemble]\npriors = [0.3, 0.7]\nbloch = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]\n";
    let r = helstrom_report(&RunConfig::parse(orth).unwrap()).unwrap();
    assert!((value_of(&r, "helstrom_bound") - 1.0).abs() < 1e-12);

    // ½(1 + ‖0.55 r₁ − 0.45 r₂‖) when that norm exceeds |q₁ − q₂|
    let v: [f64; 3] = [0.55 * 0.2 + 0.45 * 0.2, 0.55 * 0.3 + 0.45 * 0.3, -0.55 * 0.4 - 0.45 * 0.35];
    let expect = 0.5 * (1.0 + v.iter().map(|x| x * x).sum::<f64>().sqrt().max(0.1));
    let r = helstrom_report(&RunConfig::parse(TILTED_UNEQUAL).unwrap()).unwrap();
    assert!((value_of(&r, "helstrom_bound") - expect).abs() < 1e-12);
}

#[test]
fn helstrom_reports_every_receiver_count() {
    let out = run_with(&format!("receivers = 4\n{MIRRORED}"), &["helstrom"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for n in 1..=4 {
        assert!(text.contains(&format!("N = {n}: success = 0.65, deviation = 0")), "{text}");
    }
}

#[test]
fn simulate_examples() {
    let orth = "receivers = 3\n[ensemble]\npriors = [0.5, 0.5]\nbloch = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]\n";
    let r = simulate_report(&RunConfig::parse(orth).unwrap(), None).unwrap();
    assert!((value_of(&r, "success_direct") - 1.0).abs() < 1e-12);

    let r = simulate_report(&RunConfig::parse(&format!("receivers = 2\n{MIRRORED}")).unwrap(), None).unwrap();
    for key in ["success_direct", "success_chain", "success_product"] {
        assert!((value_of(&r, key) - 0.65).abs() < 1e-12);
    }

    let random = format!("receivers = 3\n{TILTED_UNEQUAL}\n[protocol]\ntype = \"random\"\n\n[simulate]\nposterior_explicit = true\n");
    let cfg = RunConfig::parse(&random).unwrap();
    let a = simulate_report(&cfg, Some(7)).unwrap();
    let b = simulate_report(&cfg, Some(7)).unwrap();
    let c = simulate_report(&cfg, Some(8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(value_of(&a, "max_deviation") < 1e-10);
    assert!((value_of(&a, "success_posterior_walk") - value_of(&a, "success_direct")).abs() < 1e-10);
}

#[test]
fn simulate_with_channels() {
    let cfg = format!(
        "{MIRRORED}\n[[channels]]\ntype = \"depolarizing\"\ngamma = 0.2\n\n[[channels]]\ntype = \"identity\"\n"
    );
    let r = simulate_report(&RunConfig::parse(&cfg).unwrap(), None).unwrap();
    // first stage shrinks the Bloch difference by 0.8, later stages keep the projector posteriors
    assert!((value_of(&r, "success_direct") - (0.5 + 0.5 * 0.8 * 0.3)).abs() < 1e-12);
    assert!(value_of(&r, "max_deviation") < 1e-12);
}

#[test]
fn zero_probability_posterior_is_a_numerical_error() {
    let cfg = r#"
receivers = 2

[ensemble]
priors = [0.5, 0.5]
bloch = [[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]

[protocol]
type = "luders"
projectors = [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]

[simulate]
posterior_explicit = true
"#;
    let out = run_with(cfg, &["simulate"]);
    assert_eq!(out.status.code(), Some(3));
    let relaxed = cfg.replace("posterior_explicit = true", "posterior_explicit = false");
    let out = run_with(&relaxed, &["simulate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((value_of(&String::from_utf8(out.stdout).unwrap(), "success_direct")).abs() < 1e-15);
}

#[test]
fn noisy_sweep_examples() {
    let rows = csv_rows(&noisy_sweep_csv(&RunConfig::parse(MIRRORED).unwrap(), Some(3), Some(64)).unwrap());
    assert_eq!(rows.len(), 3);
    for v in &rows[0][1..] {
        assert!((v - 0.65).abs() < 1e-9);
    }
    assert!((rows[2][2] - 0.5).abs() < 1e-12 && (rows[2][3] - 0.5).abs() < 1e-12 && (rows[2][4] - 0.5).abs() < 1e-12);

    let mirrored_unequal = MIRRORED.replace("[0.5, 0.5]", "[0.55, 0.45]");
    let rows = csv_rows(&noisy_sweep_csv(&RunConfig::parse(&mirrored_unequal).unwrap(), Some(11), Some(64)).unwrap());
    let last = rows.last().unwrap();
    assert!((last[2] - 0.55).abs() < 1e-12 && (last[3] - 0.55).abs() < 1e-12);

    let tilted = TILTED_UNEQUAL.replace("[0.55, 0.45]", "[0.5, 0.5]");
    let rows = csv_rows(&noisy_sweep_csv(&RunConfig::parse(&tilted).unwrap(), Some(2), Some(64)).unwrap());
    let expect = 0.5 + 0.5 * (0.2f64 * 0.2 + 0.3 * 0.3 + 0.375 * 0.375).sqrt();
    for v in &rows[0][2..] {
        assert!((v - expect).abs() < 1e-9);
    }
    assert!(format!("{:.6}", rows[0][2]).starts_with("0.760108"));
}

#[test]
fn noisy_sweep_is_deterministic_and_bounded() {
    let a = run_with(TILTED_UNEQUAL, &["noisy-sweep", "--steps", "21", "--grid", "128"]);
    let b = run_with(TILTED_UNEQUAL, &["noisy-sweep", "--steps", "21", "--grid", "128"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("gamma,helstrom,p_opt_N1,p_opt_N2_closed,p_opt_N2_numeric\n"));
    assert!(!text.contains('\r'));
    for row in csv_rows(&text) {
        assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn optimal_protocol_output_is_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("in.toml");
    let out = dir.path().join("opt.toml");
    std::fs::write(&cfg, format!("receivers = 2\n{TILTED_UNEQUAL}")).unwrap();
    let status = bin().args(["optimal-protocol", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let sim = bin().args(["simulate", "--config"]).arg(&out).output().unwrap();
    let report = String::from_utf8(sim.stdout).unwrap();
    let bound = value_of(&helstrom_report(&RunConfig::parse(TILTED_UNEQUAL).unwrap()).unwrap(), "helstrom_bound");
    assert!((value_of(&report, "success_direct") - bound).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let missing = bin().arg("helstrom").output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let unreadable = bin().args(["helstrom", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(unreadable.status.code(), Some(4));
    let bad_priors = run_with(&MIRRORED.replace("[0.5, 0.5]", "[0.5, 0.6]"), &["helstrom"]);
    assert_eq!(bad_priors.status.code(), Some(2));
    assert!(String::from_utf8(bad_priors.stderr).unwrap().contains("ensemble"));
    let unknown = run_with(&format!("{MIRRORED}colour = 1\n"), &["helstrom"]);
    assert_eq!(unknown.status.code(), Some(2));
    let three = "[ensemble]\npriors = [0.2, 0.3, 0.5]\nbloch = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]]\n";
    assert_eq!(run_with(three, &["helstrom"]).status.code(), Some(2));
    let bad_flag = bin().args(["helstrom", "--grid", "many"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let tiny_grid = run_with(MIRRORED, &["noisy-sweep", "--grid", "1"]);
    assert_eq!(tiny_grid.status.code(), Some(2));
}

#[test]
fn reproduce_figures_reports_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = bin()
        .args(["reproduce-figures", "--steps", "3", "--grid", "16", "--out"])
        .arg(Path::new(&blocker).join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
