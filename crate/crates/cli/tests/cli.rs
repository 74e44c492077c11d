//! End-to-end runs of the `mptensor` binary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use tempfile::TempDir;

const HEADER: &str = "omega,regime,ReM11,ImM11,ReM12,ImM12,ReM13,ImM13,ReM21,ImM21,ReM22,ImM22,ReM23,ImM23,\
                      ReM31,ImM31,ReM32,ImM32,ReM33,ImM33,ReB11,ImB11,ReB22,ImB22,ReB33,ImB33,\
                      normA,normRmsi,oracle_Rem,oracle_Imm,residual,iterations";

const FIG1: &str = "[material]\nmu_r = 100\nsigma = 1e6\n\n[object]\nshape = sphere\nalpha = 0.01\n";

fn fig1_sweep(regime: &str, csv: &str) -> String {
    format!(
        "{FIG1}[sweep]\nomega_min = 10\nomega_max = 1e9\npoints = 40\n\n\
         [solver]\nsolver = analytic\nregime = {regime}\n\n[output]\ncsv = {csv}\n"
    )
}

/// Eddy-current sphere in a uniform field, written with hyperbolic
/// functions of `κ² = −iωσμα²`.
fn eddy_sphere(mu_r: f64, sigma: f64, omega: f64, alpha: f64) -> Complex64 {
    let kappa = Complex64::new(0.0, -sigma * 4e-7 * PI * mu_r * omega * alpha * alpha).sqrt();
    // everything divided by cosh κ; Re κ > 0
    let e = (-2.0 * kappa).exp();
    let t = (1.0 - e) / (1.0 + e);
    let a = t - kappa;
    let b = (kappa * kappa + 1.0) * t - kappa;
    (a * (2.0 * mu_r) + b) / (a * mu_r - b) * (2.0 * PI * alpha.powi(3))
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn mptensor(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mptensor"))
            .args(args)
            .arg("--out")
            .arg(self.path("out"))
            .output()
            .unwrap()
    }

    fn with_config(&self, cmd: &str, config: &Path, extra: &[&str]) -> Output {
        let mut args = vec![cmd, "--config", config.to_str().unwrap()];
        args.extend_from_slice(extra);
        self.mptensor(&args)
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path("out").join(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Table {
    cols: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let cols = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Table { cols, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.cols.iter().position(|c| c == name).unwrap();
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    fn complex(&self, re: &str, im: &str) -> Vec<Complex64> {
        self.col(re).into_iter().zip(self.col(im)).map(|(a, b)| Complex64::new(a, b)).collect()
    }
}

#[test]
fn fig1_sweeps_overlay_within_one_percent() {
    let run = Run::new();
    for regime in ["eddy", "full"] {
        let cfg = run.config(&format!("{regime}.ini"), &fig1_sweep(regime, &format!("{regime}.csv")));
        let o = run.with_config("sweep", &cfg, &[]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let eddy_csv = run.read("eddy.csv");
    assert_eq!(eddy_csv.lines().next().unwrap(), HEADER);
    let eddy = Table::parse(&eddy_csv);
    let full = Table::parse(&run.read("full.csv"));
    assert_eq!(eddy.rows.len(), 40);
    let omega = eddy.col("omega");
    assert!(omega.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(omega, full.col("omega"));

    let static_limit = 4.0 * PI * 99.0 / 102.0 * 1e-6;
    for (i, j) in [(1, 1), (2, 2), (3, 3)] {
        let me = eddy.complex(&format!("ReM{i}{j}"), &format!("ImM{i}{j}"));
        let mf = full.complex(&format!("ReM{i}{j}"), &format!("ImM{i}{j}"));
        for ((w, a), b) in omega.iter().zip(&me).zip(&mf) {
            assert!((a - b).norm() / b.norm() <= 1e-2, "ω = {w}: {a} vs {b}");
        }
        assert!((me[0].re - static_limit).abs() < 1e-3 * static_limit);
        assert!((mf[0].re - static_limit).abs() < 1e-3 * static_limit);
    }
    for (w, m) in omega.iter().zip(eddy.complex("ReM11", "ImM11")) {
        let exact = eddy_sphere(100.0, 1e6, *w, 0.01);
        assert!((m - exact).norm() < 1e-8 * exact.norm(), "ω = {w}: {m} vs {exact}");
    }

    // overlay plot data
    let (e, f) = (run.path("out").join("eddy.csv"), run.path("out").join("full.csv"));
    let o = run.mptensor(&["plotdata", "--series", "ImM11", e.to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let grid = |name: &str| -> Vec<String> {
        run.read(name).lines().map(|l| l.split(' ').next().unwrap().to_string()).collect()
    };
    assert_eq!(grid("eddy_ImM11.dat").len(), 40);
    assert_eq!(grid("eddy_ImM11.dat"), grid("full_ImM11.dat"));
}

#[test]
fn single_frequency_gives_one_row() {
    let run = Run::new();
    let cfg = run.config("one.ini", &format!("{FIG1}[sweep]\nomega = 1e5\n"));
    let o = run.with_config("sweep", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::parse(&run.read("sweep.csv"));
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0][1], "eddy");
}

#[test]
fn sweep_is_byte_identical_across_runs_and_worker_counts() {
    let run = Run::new();
    let cfg = run.config("c.ini", &fig1_sweep("auto", "sweep.csv"));
    let mut outputs = Vec::new();
    for workers in ["1", "3", "3"] {
        let o = run.with_config("sweep", &cfg, &["--workers", workers]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push(run.read("sweep.csv"));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
    let t = Table::parse(&outputs[0]);
    // σ*/(ε*ω) stays large and α/λ small across the whole band
    assert!(t.rows.iter().all(|r| r[1] == "eddy"));
}

#[test]
fn tensors_at_fig1_midband_match_the_eddy_sphere() {
    let run = Run::new();
    let cfg = run.config("t.ini", &format!("{FIG1}[sweep]\nomega = 1e5\n[solver]\nregime = eddy\n"));
    let o = run.with_config("tensors", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bundle = mptensor::assembly::TensorBundle::from_text(&run.read("bundle.txt")).unwrap();
    let exact = eddy_sphere(100.0, 1e6, 1e5, 0.01);
    for m in bundle.m.diag() {
        assert!((m - exact).norm() < 5e-2 * exact.norm());
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("diag"));
}

#[test]
fn zero_contrast_gives_an_all_zero_bundle() {
    let run = Run::new();
    let cfg = run.config("z.ini", "[material]\nmu_r = 1\neps_r = 1\n[object]\nalpha = 0.01\n[sweep]\nomega = 1e3, 1e6\n");
    let o = run.with_config("tensors", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["bundle_000.txt", "bundle_001.txt"] {
        let b = mptensor::assembly::TensorBundle::from_text(&run.read(name)).unwrap();
        for t in [&b.a, &b.b, &b.c_check, &b.n, &b.m] {
            assert_eq!(t.max_abs(), 0.0);
        }
        assert_eq!(b.c.norm(), 0.0);
    }
}

#[test]
fn config_errors_exit_with_two() {
    let run = Run::new();
    let cases = [
        ("malformed", "[material\nmu_r = 1\n".to_string()),
        ("unknown key", format!("{FIG1}colour = red\n[sweep]\nomega = 1\n")),
        ("unknown section", format!("{FIG1}[sweep]\nomega = 1\n[extras]\nx = 1\n")),
        ("bad number", format!("{FIG1}[sweep]\nomega = fast\n")),
        ("no sweep", FIG1.to_string()),
        ("eddy without conduction", format!("{}[sweep]\nomega = 1\n[solver]\nregime = eddy\n", FIG1.replace("1e6", "0"))),
    ];
    for (what, text) in cases {
        let cfg = run.config("bad.ini", &text);
        let o = run.with_config("sweep", &cfg, &[]);
        assert_eq!(code(&o), 2, "{what}: {}", stderr(&o));
        assert!(stderr(&o).contains("config"), "{what}: {}", stderr(&o));
    }
    let o = run.mptensor(&["sweep"]);
    assert_eq!(code(&o), 2);
    let o = run.mptensor(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn failing_frequency_marks_its_row_and_exits_one() {
    let run = Run::new();
    // at 1e18 rad/s the interior wavenumber of this body is beyond the series
    let text = "[material]\nmu_r = 100\nsigma = 1e7\n[object]\nalpha = 100\n[sweep]\nomega = 1e18, 1e3\n";
    let cfg = run.config("f.ini", text);
    let o = run.with_config("sweep", &cfg, &[]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("1e18"));
    let t = Table::parse(&run.read("sweep.csv"));
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[0][1], "eddy");
    assert_eq!(t.rows[1][0], "1.0000000000000000e18");
    assert_eq!(t.rows[1][1], "failed");
    assert_eq!(t.rows[1].len(), 32);
    assert!(t.rows[1][2..].iter().all(String::is_empty));
}

#[test]
fn fem_sweep_on_a_coarse_sphere_tracks_the_oracle_column() {
    let run = Run::new();
    let text = "[material]\nmu_r = 2\nsigma = 1e6\n[object]\nalpha = 0.01\n[sweep]\nomega = 4e3, 8e3, 1.6e4\n\
                [solver]\nsolver = fem\nresolution = 0.35\ntruncation_radius = 5\n";
    let cfg = run.config("fem.ini", text);
    let o = run.with_config("sweep", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::parse(&run.read("sweep.csv"));
    assert_eq!(t.rows.len(), 3);
    let oracle = t.complex("oracle_Rem", "oracle_Imm");
    for (w, o) in t.col("omega").iter().zip(&oracle) {
        let exact = eddy_sphere(2.0, 1e6, *w, 0.01);
        assert!((o - exact).norm() < 1e-8 * exact.norm());
    }
    for d in 1..=3 {
        let m = t.complex(&format!("ReM{d}{d}"), &format!("ImM{d}{d}"));
        for (a, b) in m.iter().zip(&oracle) {
            assert!((a - b).norm() < 5e-2 * b.norm(), "M{d}{d} = {a} vs {b}");
        }
    }
    assert!(t.col("iterations").iter().all(|n| *n > 0.0));
}

fn compare_rows(run: &Run) -> Vec<Vec<String>> {
    Table::parse(&run.read("compare.csv")).rows
}

#[test]
fn compare_regimes_in_the_eddy_regime() {
    let run = Run::new();
    let text = format!(
        "{FIG1}[sweep]\nomega = 1e3, 1e5\n[compare]\npoints = 0 0 0.05; 0.03 0 0.04; 0.1 0.2 -0.1; 0 0 0.02\n"
    );
    let cfg = run.config("c.ini", &text);
    let o = run.with_config("compare-regimes", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = compare_rows(&run);
    assert_eq!(rows.len(), 2 * 4 * 6);
    for r in &rows {
        let inside = r[3].starts_with("2.0");
        match (inside, r[4].as_str()) {
            (true, _) => {
                assert_eq!(r[5], "skipped");
                assert!(r[14].contains("3α"), "{}", r[14]);
            }
            (false, "small-k-dielectric" | "small-alpha") => assert_eq!(r[5], "skipped", "{r:?}"),
            (false, _) => assert_eq!(r[5], "ok", "{r:?}"),
        }
    }
    let pairs = Table::parse(&run.read("compare_pairs.csv"));
    let mut seen = 0;
    for r in &pairs.rows {
        if r[4] == "main" && r[5] == "eddy" {
            seen += 1;
            assert!(r[6].parse::<f64>().unwrap() < 1e-2, "{r:?}");
        }
    }
    assert_eq!(seen, 2 * 3);
}

#[test]
fn compare_regimes_small_k_forms_agree_without_conduction() {
    let run = Run::new();
    let text = "[material]\nmu_r = 2\neps_r = 3\n[object]\nalpha = 0.01\n[sweep]\nomega = 1e4, 1e6\n\
                [compare]\npoints = 0 0 0.05; 0.04 -0.02 0.03\nbackground = plane\ndirection = 0 0 1\n\
                polarization = 1 0 0\n";
    let cfg = run.config("d.ini", text);
    let o = run.with_config("compare-regimes", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in compare_rows(&run) {
        if r[4] == "eddy" {
            assert_eq!(r[5], "skipped");
            assert!(r[14].contains("conducting"));
        } else {
            assert_eq!(r[5], "ok", "{r:?}");
        }
    }
    let pairs = Table::parse(&run.read("compare_pairs.csv"));
    let ratios: Vec<f64> = pairs
        .rows
        .iter()
        .filter(|r| r[4] == "small-k-dielectric" && r[5] == "small-alpha")
        .map(|r| r[6].parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 4);
    assert!(ratios.iter().all(|d| *d < 1e-2));
    let main_vs_smallk: Vec<f64> = pairs
        .rows
        .iter()
        .filter(|r| r[4] == "main" && r[5] == "small-k-dielectric")
        .map(|r| r[6].parse().unwrap())
        .collect();
    assert!(main_vs_smallk.iter().all(|d| *d < 1e-2), "{main_vs_smallk:?}");
}

#[test]
fn compare_regimes_needs_points() {
    let run = Run::new();
    let cfg = run.config("n.ini", &format!("{FIG1}[sweep]\nomega = 1e5\n"));
    let o = run.with_config("compare-regimes", &cfg, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn plotdata_errors() {
    let run = Run::new();
    let cfg = run.config("s.ini", &format!("{FIG1}[sweep]\nomega = 1e2, 1e4, 1e6\n"));
    assert_eq!(code(&run.with_config("sweep", &cfg, &[])), 0);
    let csv = run.path("out").join("sweep.csv");
    let csv = csv.to_str().unwrap();

    let o = run.mptensor(&["plotdata", "--series", "ReM44", csv]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ReM44"), "{}", stderr(&o));

    let empty = run.config("empty.csv", "");
    let o = run.mptensor(&["plotdata", "--series", "ReM11", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let header_only = run.config("header.csv", &format!("{HEADER}\n"));
    let o = run.mptensor(&["plotdata", "--series", "ReM11", header_only.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let other = run.config("other.ini", &format!("{FIG1}[sweep]\nomega = 1e2, 1e5\n[output]\ncsv = other.csv\n"));
    assert_eq!(code(&run.with_config("sweep", &other, &[])), 0);
    let other_csv = run.path("out").join("other.csv");
    let o = run.mptensor(&["plotdata", "--series", "ReM11", csv, other_csv.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grids"), "{}", stderr(&o));

    let o = run.mptensor(&["plotdata", "--series", "ReM11", "--series", "normA", csv]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<String> = run.read("sweep_ReM11.dat").lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("1.0000000000000000e2 "));
    assert!(run.path("out").join("sweep_normA.dat").exists());
}
