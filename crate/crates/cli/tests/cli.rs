use scaling_lab_cli::config::ExperimentConfig;
use scaling_lab_cli::report::HEADER;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scaling-lab"));
    c.env_remove("SCALING_LAB_THREADS");
    c
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MINIMAL: &str = r#"output_path = "unused"
kernels = ["rwm", "sla", "p-rwm"]
n_grid = [20, 40]
rho_grid = ["critical", 2.0]
l_grid = [1.0]
iterations = 3000
replicates = 3
master_seed = 99

[target]
family = "product"
kappa = 0.5
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn sweep(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("sweep").arg(config).arg("--output-dir").arg(out).arg("--quiet").args(extra).output().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let out = sweep(&cfg, &tmp.path().join("out"), &[]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2), "{}", stderr(&out));
    let rows = read_csv(&tmp.path().join("out/sweep.csv"));
    assert_eq!(rows.len() - 1, 2 * 2 * 3);
}

#[test]
fn sweep_is_deterministic_except_wall_ms() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    sweep(&cfg, &tmp.path().join("a"), &["--threads", "1"]);
    sweep(&cfg, &tmp.path().join("b"), &["--threads", "3"]);
    let strip = |p: PathBuf| -> Vec<Vec<String>> {
        read_csv(&p)
            .into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect()
    };
    let a = strip(tmp.path().join("a/sweep.csv"));
    let b = strip(tmp.path().join("b/sweep.csv"));
    assert_eq!(a, b);
    assert_eq!(a[0].len(), HEADER.len() - 1);
}

#[test]
fn header_matches_schema_file() {
    let schema: toml::Table =
        toml::from_str(&std::fs::read_to_string(crate_dir().join("schema/sweep.csv.toml")).unwrap()).unwrap();
    let names: Vec<String> =
        schema["column"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    sweep(&cfg, tmp.path(), &[]);
    let header = &read_csv(&tmp.path().join("sweep.csv"))[0];
    assert_eq!(&names, header);
}

#[test]
fn reference_config_accepts_near_0234() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sweep(&crate_dir().join("configs/rwm-product.toml"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = read_csv(&tmp.path().join("sweep.csv"));
    let col = rows[0].iter().position(|h| h == "accept_mean").unwrap();
    let a: f64 = rows[1][col].parse().unwrap();
    assert!((a - 0.234).abs() <= 0.02, "accept_mean {a}");
}

#[test]
fn flagged_rows_exit_2() {
    // at n = 64 and rho = 1.5 the acceptance is near 0.9, below the 0.999 demanded here
    let text = r#"output_path = "unused"
kernels = ["rwm"]
n_grid = [64]
rho_grid = [1.5]
l_grid = [2.0]
iterations = 5000
replicates = 2
master_seed = 1
degenerate_high = 0.999

[target]
family = "product"
kappa = 0.0
"#;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), text);
    let out = sweep(&cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let rows = read_csv(&tmp.path().join("sweep.csv"));
    assert_eq!(rows[1][12], "degenerate-high");
}

#[test]
fn gnuplot_flag_writes_script() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    sweep(&cfg, tmp.path(), &["--gnuplot"]);
    let gp = std::fs::read_to_string(tmp.path().join("sweep.gp")).unwrap();
    assert!(gp.contains("\"sweep.csv\""));
    assert!(gp.contains("acceptance.png") && gp.contains("sjd.png"));
}

#[test]
fn output_path_from_config_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("nested/results");
    let text =
        MINIMAL.replace("output_path = \"unused\"", &format!("output_path = {:?}", target.display().to_string()));
    let cfg = write_config(tmp.path(), &text);
    bin().arg("sweep").arg(&cfg).arg("-q").output().unwrap();
    assert!(target.join("sweep.csv").exists());
}

#[test]
fn malformed_config_exits_1_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &MINIMAL.replace("iterations = 3000", "iterations = \"many\""));
    let out = sweep(&cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("config.toml:6:"), "{err}");
}

#[test]
fn invalid_grid_exits_1_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &MINIMAL.replace("l_grid = [1.0]", "l_grid = [-1.0]"));
    let out = sweep(&cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("config.toml:5:"), "{}", stderr(&out));
}

#[test]
fn missing_config_exits_1() {
    let out = bin().args(["sweep", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_threads_from_env_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let out = bin().arg("sweep").arg(&cfg).env("SCALING_LAB_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("threads"));
}

#[test]
fn shipped_configs_round_trip_and_validate() {
    let mut count = 0;
    for entry in std::fs::read_dir(crate_dir().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let config = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
            let again = ExperimentConfig::parse(&config.to_toml(), &path).unwrap();
            assert_eq!(config, again, "{}", path.display());
            count += 1;
        }
    }
    assert!(count >= 5);
}

#[test]
fn theory_product_table() {
    let out = bin().args(["theory", "--target", "product", "--kappa", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("K^RWM    1.000000"), "{text}");
    let a_star: Vec<f64> = text
        .lines()
        .filter_map(|l| l.split("a_star = ").nth(1))
        .map(|s| s.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(a_star.len(), 2);
    assert!((a_star[0] - 0.234).abs() < 5e-4 && (a_star[1] - 0.574).abs() < 5e-4, "{a_star:?}");
}

#[test]
fn theory_bridge_spectral_t2() {
    let out =
        bin().args(["theory", "--target", "bridge-spectral", "--beta", "2", "--T", "1", "--d", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("T_2      3.289868"), "{}", stdout(&out));
}

#[test]
fn theory_ns_prior_prints_spectrum_limit() {
    let out = bin().args(["theory", "--target", "ns-prior", "--alpha", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("T_2      6.579736"), "{}", stdout(&out));
}

#[test]
fn theory_unknown_family_exits_1() {
    let out = bin().args(["theory", "--target", "heat-flow"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn theory_missing_parameter_exits_1() {
    let out = bin().args(["theory", "--target", "bridge-fd", "--beta", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--T"));
}

#[test]
fn validate_passes_within_a_minute() {
    let start = Instant::now();
    let out = bin().arg("validate").output().unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    assert!(secs < 60.0, "validate took {secs:.1} s");
    let text = stdout(&out);
    for name in
        ["sla-oracle-equivalence", "theta-half-gaussian-exactness", "spiral-bijection", "expected-min-closed-form"]
    {
        assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{name} missing:\n{text}");
    }
}

#[test]
fn validate_names_corrupted_delta_sign() {
    let out = bin().args(["validate", "--inject-fault", "sla-delta-sign"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sla-oracle-equivalence"), "{}", stderr(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL") && l.contains("sla-oracle-equivalence")));
}

#[test]
fn unknown_subcommand_exits_1_and_help_exits_0() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}
