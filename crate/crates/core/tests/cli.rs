use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use delay_nullctl::config::Config;
use delay_nullctl::spectral::branches_for_radius;
use delay_nullctl::summation::weight_for_eigenvalue;
use delay_nullctl::{find_roots, m_norm, DelayKernel, MState, SummationSchedule};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delay-nullctl"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.ini");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn col(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn spectrum_rows_and_residuals() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), &["spectrum", "--branches", "-10..10"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let spec = rows(&d.path().join("spectrum.csv"));
    assert_eq!(spec.len(), 21);
    let res = rows(&d.path().join("spectrum_residuals.csv"));
    assert_eq!(res.len(), 21);
    assert!(res.iter().all(|r| col(r, 1) < 1e-11));
}

#[test]
fn empty_branch_range_gives_header_only() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "[spectrum]\nbranches = 3..2\n");
    let out = run(d.path(), &["spectrum", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(d.path().join("spectrum.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn missing_kernel_file_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "[kernel]\nkind = sampled\nfile = no_such_phi.csv\n",
    );
    let out = run(d.path(), &["spectrum", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_phi.csv"));
}

#[test]
fn bad_keys_name_line_and_key() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "[horizon]\nT = soon\n");
    let out = run(d.path(), &["spectrum", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("horizon.T") && err.contains('2'), "{err}");
}

#[test]
fn outputs_are_deterministic() {
    let d = TempDir::new().unwrap();
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let out = run(d.path(), &["synthesize", "--n-list", "2", "--grid", "256"]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let files: Vec<Vec<u8>> = ["control_n2.csv", "synthesize.ini"]
            .iter()
            .map(|f| fs::read(d.path().join(f)).unwrap())
            .collect();
        fs::remove_file(d.path().join("control_n2.csv")).unwrap();
        snapshots.push(files);
    }
    assert!(snapshots[0] == snapshots[1]);
}

#[test]
fn sidecar_reparses_to_the_same_config() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "[horizon]\nT = 1.25\n[schedule]\nn_list = 2,3\n[grids]\nsteps_per_unit = 128\n[initial]\nkind = constant\nhead = 1,0.5\ntail = -1,0\n",
    );
    let out = run(d.path(), &["synthesize", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(d.path().join("synthesize.ini")).unwrap();
    assert!(text.contains("convention = conjugate"));
    let mut want = Config::load(Path::new(&cfg)).unwrap();
    want.out_dir = d.path().to_path_buf();
    let got = Config::parse(&text, d.path()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn reconstruct_collapse_and_zero() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "[schedule]\nn_list = 2,3\n[grids]\ntail_panels = 4096\n[initial]\nkind = eigen\nbranch = 1\n",
    );
    let out = run(d.path(), &["reconstruct", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = SummationSchedule::default_rule(8);
    let b = branches_for_radius(s.r_n(3));
    let spec = find_roots(&DelayKernel::Zero, -b..=b).unwrap();
    let mu = spec.branch(1).unwrap();
    let norm = m_norm(&MState::eigenvector(mu.lambda, 4096).unwrap());
    for r in rows(&d.path().join("reconstruct.csv")) {
        let n: u32 = r[0].parse().unwrap();
        let want = (weight_for_eigenvalue(n, mu, &s) - 1.0).norm() * norm;
        assert!(
            (col(&r, 1) - want).abs() < 1e-8,
            "n {n}: {} vs {want}",
            col(&r, 1)
        );
    }

    let cfg = write_config(
        d.path(),
        "[schedule]\nn_list = 2,4\n[initial]\nkind = zero\n",
    );
    let out = run(d.path(), &["reconstruct", "--config", &cfg]);
    assert!(out.status.success());
    assert!(rows(&d.path().join("reconstruct.csv"))
        .iter()
        .all(|r| col(r, 1) == 0.0));
}

#[test]
fn verify_eigen_and_zero_data() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "[schedule]\nn_list = 2\n[grids]\ntail_panels = 2048\n[initial]\nkind = eigen\nbranch = 1\n",
    );
    let out = run(d.path(), &["verify", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = rows(&d.path().join("verify.csv"));
    assert_eq!(r[0][0], "0");
    assert!(col(&r[0], 3) < 1e-4, "{}", col(&r[0], 3));
    assert!(d.path().join("trajectory.csv").exists());

    let cfg = write_config(d.path(), "[schedule]\nn_list = 2\n[initial]\nkind = zero\n");
    let out = run(d.path(), &["verify", "--config", &cfg, "--grid", "256"]);
    assert!(out.status.success());
    let r = rows(&d.path().join("verify.csv"));
    assert!(r.iter().all(|r| col(r, 3) == 0.0));
}

#[test]
fn compare_report_columns() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "[schedule]\nn_list = 2\n[grids]\noracle_points = 400\n",
    );
    let out = run(d.path(), &["compare", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(d.path().join("compare.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("n,norm_spectral,norm_oracle,gap_l2")
    );
    let r = rows(&d.path().join("compare.csv"));
    assert_eq!(r.len(), 1);
    assert!(col(&r[0], 3) < 0.1 * col(&r[0], 2));
    let oracle = fs::read_to_string(d.path().join("oracle_control.csv")).unwrap();
    assert_eq!(oracle.lines().next(), Some("t,re_u,im_u"));
}

#[test]
fn bad_n_list_and_horizon() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), &["reconstruct", "--n-list", "2,x"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(d.path(), "[horizon]\nT = 2.5\n");
    let out = run(d.path(), &["synthesize", "--config", &cfg, "--n-list", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 < T < 2"));
}
