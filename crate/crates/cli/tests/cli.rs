use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EFFECTIVE: &str = "\
# working point of the quoted sensitivities
[model]
kind = effective

[params]
omega = 0.28 kHz
Omega = 320 kHz
g = 4.5 kHz
gamma = 0.08 kHz
z = 14 nm
F = 5 yN

[hilbert]
fock_dim = 16
";

const SWEEP: &str = "
[sweep]
variable = g
start = 1 kHz
stop = 5.5 kHz
points = 6
numeric = true
";

fn rabi_sense(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi-sense"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

/// The single file in `dir` with the given extension.
fn only(dir: &Path, ext: &str) -> PathBuf {
    let mut hits: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(ext))
        .collect();
    assert_eq!(hits.len(), 1, "expected one *{ext} in {}", dir.display());
    hits.pop().unwrap()
}

fn without_comments(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn sensitivity_prints_the_quoted_value() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.cfg", EFFECTIVE);
    let o = rabi_sense(tmp.path(), &["sensitivity", "--config", cfg.to_str().unwrap(), "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("dFx = 4.43 yN"), "{text}");
    assert!(text.contains("dFn = 7.80 yN"), "{text}");

    let csv = fs::read_to_string(only(&tmp.path().join("out"), ".csv")).unwrap();
    let name = only(&tmp.path().join("out"), ".csv");
    assert!(name.file_name().unwrap().to_string_lossy().starts_with("sensitivity_"));
    assert!(csv.starts_with("g_Hz,lambda,dFx_N,dFp_N,dFn_N,dFQ_N\n"), "{csv}");
}

#[test]
fn sweeps_are_deterministic_across_runs_and_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.cfg", &format!("{EFFECTIVE}{SWEEP}"));
    let cfg = cfg.to_str().unwrap();
    let mut bodies = Vec::new();
    for (out, jobs) in [("a", "1"), ("b", "3"), ("c", "3")] {
        let o = rabi_sense(tmp.path(), &["sweep", "--config", cfg, "--out", out, "--jobs", jobs]);
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push(fs::read(only(&tmp.path().join(out), ".csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[1], bodies[2]);

    // the last point is past the instability and has empty moment cells
    let text = String::from_utf8(bodies[0].clone()).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.ends_with(",,,,,,,,,,,,"), "{last}");
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn manifest_reruns_reproduce_the_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.cfg", &format!("{EFFECTIVE}{SWEEP}"));
    let o = rabi_sense(tmp.path(), &["sweep", "--config", cfg.to_str().unwrap(), "--out", "first"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = only(&tmp.path().join("first"), ".manifest");

    let o = rabi_sense(tmp.path(), &["sweep", "--config", manifest.to_str().unwrap(), "--out", "second"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |d: &str, ext: &str| fs::read_to_string(only(&tmp.path().join(d), ext)).unwrap();
    assert_eq!(read("first", ".csv"), read("second", ".csv"));
    let (m1, m2) = (read("first", ".manifest"), read("second", ".manifest"));
    assert_eq!(
        without_comments(&m1).replace("dir = first", ""),
        without_comments(&m2).replace("dir = second", "")
    );
    assert!(m1.contains("omega = 1759.29"), "{m1}");
    assert!(m1.contains(" rad/s") && m1.contains(" N\n") && m1.contains(" m\n"));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.cfg", EFFECTIVE);
    let cfg = cfg.to_str().unwrap();

    // beyond the critical coupling: physics-domain error
    let o = rabi_sense(tmp.path(), &["sensitivity", "--config", cfg, "--set", "params.g=6 kHz"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("lambda_c"), "{}", stderr(&o));

    // missing unit: configuration error naming line and field
    let bad = write_config(&tmp, "bad.cfg", &EFFECTIVE.replace("z = 14 nm", "z = 14"));
    let o = rabi_sense(tmp.path(), &["steady", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 10") && stderr(&o).contains("params.z"), "{}", stderr(&o));

    let o = rabi_sense(tmp.path(), &["steady"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rabi_sense(tmp.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rabi_sense(tmp.path(), &["steady", "--config", "does-not-exist.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rabi_sense(tmp.path(), &["sweep", "--config", cfg]);
    assert_eq!(o.status.code(), Some(1), "sweep without [sweep]");
}

#[test]
fn steady_reports_both_sources() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.cfg", &EFFECTIVE.replace("fock_dim = 16", "fock_dim = 40"));
    let o = rabi_sense(tmp.path(), &["steady", "--config", cfg.to_str().unwrap(), "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(only(&tmp.path().join("o"), ".csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for (a, n) in rows[0].iter().zip(&rows[1]) {
        assert!((a - n).abs() < 1e-3 * a.abs().max(1.0), "{a} vs {n}");
    }
}

#[test]
fn reproduce_fig4_writes_table_and_plot() {
    let tmp = TempDir::new().unwrap();
    let o = rabi_sense(tmp.path(), &["reproduce", "fig4", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("r");
    let csv = fs::read_to_string(only(&dir, ".csv")).unwrap();
    assert_eq!(csv.lines().count(), 47);
    assert!(csv.starts_with("g_Hz,lambda,dFx_N,dFp_N,dFn_N,dFQ_N\n"));
    let name = only(&dir, ".csv");
    assert!(name.file_name().unwrap().to_string_lossy().starts_with("reproduce-fig4_"));
    let plot = fs::read_to_string(only(&dir, ".plot.txt")).unwrap();
    assert!(plot.contains("x.column = g_Hz") && plot.contains("dFQ_N"), "{plot}");
    // sensitivity grows worse away from the critical coupling
    let fx: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(fx.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn reproduce_accepts_overrides() {
    let tmp = TempDir::new().unwrap();
    let o = rabi_sense(tmp.path(), &["reproduce", "tab-sensitivities", "--out", "r"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("dFx = 4.43 yN"));
    let o = rabi_sense(
        tmp.path(),
        &["reproduce", "tab-sensitivities", "--out", "s", "--set", "params.g=4 kHz"],
    );
    assert!(o.status.success());
    assert!(!stdout(&o).contains("dFx = 4.43 yN"), "{}", stdout(&o));
    let manifest = fs::read_to_string(only(&tmp.path().join("s"), ".manifest")).unwrap();
    assert!(manifest.contains("g = 25132.741228718"), "{manifest}");

    let o = rabi_sense(tmp.path(), &["reproduce", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn squeeze_single_point_matches_the_two_state_model() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "q.cfg",
        "[model]\nkind = squeezed\n\n[params]\nomega = 4.4 kHz\ng = 1.6 kHz\ngamma = 0 Hz\nz = 14 nm\nF = 46 xN\n\n\
         [protocol]\nxi = 1 kHz\nOmega0 = 200 kHz\nkappa = 9.5 Hz\nt_final = 284 ms\n\n[hilbert]\nfock_dim = 30\n",
    );
    let o = rabi_sense(tmp.path(), &["squeeze", "--config", cfg.to_str().unwrap(), "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(only(&tmp.path().join("o"), ".csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "xi_Hz,sigma_z_analytic,sigma_z_numeric,delta_sigma_z,Fmin_analytic_N,Fmin_numeric_N"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let analytic: f64 = row[1].parse().unwrap();
    let numeric: f64 = row[2].parse().unwrap();
    assert!((analytic - numeric).abs() < 0.02, "{analytic} vs {numeric}");
    assert!(row[5].is_empty());
}

#[test]
fn validate_passes_on_a_fresh_checkout() {
    let tmp = TempDir::new().unwrap();
    let o = rabi_sense(tmp.path(), &["validate"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 8, "{text}");
    assert!(!text.contains("FAIL"));
}
