//! End-to-end tests of the levitosim binary and the scenario runner:
//! exit codes, CSV determinism across thread counts, and the headline
//! structure of each table.

use std::path::{Path, PathBuf};
use std::process::Command;

use levitosim::config::{scenario_config_from, RawConfig};
use levitosim::scenario::{run_scenario, Scenario};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_levitosim")
}

fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("levitosim_test_{}_{name}", std::process::id()));
    p
}

fn base_config() -> String {
    std::fs::read_to_string(workspace_config("fig3a.cfg")).unwrap()
}

#[test]
fn missing_config_exits_2() {
    let out = Command::new(bin())
        .args(["run", "fig2", "--config", "/nonexistent.cfg", "--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_scenario_exits_2() {
    let cfg = workspace_config("fig2.cfg");
    let out = Command::new(bin())
        .args(["run", "fig9", "--config"])
        .arg(&cfg)
        .args(["--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
}

#[test]
fn missing_kappa_exits_2_and_names_key() {
    let text = base_config()
        .lines()
        .filter(|l| !l.starts_with("cavity.kappa_hz"))
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = temp_path("nokappa.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = Command::new(bin())
        .args(["run", "fig3a", "--config"])
        .arg(&cfg)
        .args(["--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cavity.kappa_hz"));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn fit_waist_reports_the_solved_waist() {
    let cfg = workspace_config("fig3a.cfg");
    let out = Command::new(bin())
        .args(["fit-waist", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("waist_m = 1.567828"), "{stdout}");
    assert!(stdout.contains("coupling_hz = 5.3"), "{stdout}");
}

#[test]
fn check_suite_passes() {
    let out = Command::new(bin()).arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn csv_bytes_identical_across_thread_counts() {
    let cfg = workspace_config("figS2.cfg");
    let out1 = temp_path("s2_jobs1.csv");
    let out4 = temp_path("s2_jobs4.csv");
    for (path, jobs) in [(&out1, "1"), (&out4, "4")] {
        let status = Command::new(bin())
            .args(["run", "figS2", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(path)
            .args(["--jobs", jobs])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let b1 = std::fs::read(&out1).unwrap();
    let b4 = std::fs::read(&out4).unwrap();
    assert_eq!(b1, b4, "CSV bytes must not depend on --jobs");
    std::fs::remove_file(&out1).ok();
    std::fs::remove_file(&out4).ok();
}

#[test]
fn fig2_exponents_from_scenario_table() {
    let raw = RawConfig::load(&workspace_config("fig2.cfg")).unwrap();
    let cfg = scenario_config_from(&raw).unwrap();
    let table = run_scenario(Scenario::Fig2, &cfg, 2).unwrap();
    assert_eq!(
        table.columns(),
        &[
            "power_w",
            "omega_phi_hz",
            "g_sphi_hz",
            "ratio_phi",
            "omega_y_hz",
            "g_sy_hz",
            "ratio_y"
        ]
    );
    let col = |k: usize| -> Vec<f64> {
        table.rows().iter().map(|r| r[k].unwrap()).collect()
    };
    let p = col(0);
    for (idx, expect) in [(1, 0.5), (2, 0.25), (4, 0.5), (5, 0.25)] {
        let slope = levitodyn::numeric::log_log_slope(&p, &col(idx)).unwrap();
        assert!(
            (slope - expect).abs() < 1e-6,
            "column {idx}: slope {slope} vs {expect}"
        );
    }
}

#[test]
fn figs2_couplings_vanish_at_nodes_and_antinodes() {
    let raw = RawConfig::load(&workspace_config("figS2.cfg")).unwrap();
    let cfg = scenario_config_from(&raw).unwrap();
    let table = run_scenario(Scenario::FigS2, &cfg, 2).unwrap();
    // Grid covers phase 0, pi/2 and pi exactly (61 points over [0, pi]).
    for row in table.rows() {
        let phase = row[0].unwrap();
        let (g_phi, g_sphi, g_y, g_sy) = (
            row[1].unwrap(),
            row[2].unwrap(),
            row[3].unwrap(),
            row[4].unwrap(),
        );
        let scale = 1e-10 * g_sphi.abs().max(g_sy.abs()).max(1.0);
        if (phase - std::f64::consts::FRAC_PI_2).abs() < 1e-9 {
            // Node: torsional couplings vanish, CoM coherent scattering peaks.
            assert!(g_phi.abs() < scale && g_sphi.abs() < 1e-4 * g_sy.abs());
            assert!(g_y.abs() < scale);
        }
        if phase.abs() < 1e-9 || (phase - std::f64::consts::PI).abs() < 1e-9 {
            // Antinode: CoM couplings vanish.
            assert!(g_y.abs() < scale && g_sy.abs() < 1e-4 * g_sphi.abs());
        }
    }
}

#[test]
fn unstable_rows_are_flagged_with_empty_entanglement() {
    let text = format!("{}\ndynamics.blue_detuning = true\n", base_config())
        .replace("sweep.points = 25", "sweep.points = 3");
    let raw = RawConfig::parse(&text).unwrap();
    let cfg = scenario_config_from(&raw).unwrap();
    let table = run_scenario(Scenario::Fig3a, &cfg, 1).unwrap();
    assert_eq!(table.rows().len(), 3);
    for row in table.rows() {
        assert_eq!(row[1], Some(0.0), "blue-detuned ultrastrong model must be unstable");
        assert_eq!(row[2], None);
        assert_eq!(row[3], None);
        assert_eq!(row[4], None);
    }
    let csv = table.to_csv();
    assert!(csv.lines().nth(1).unwrap().ends_with(",,,"));
}

#[test]
fn fig4b_entanglement_rises_with_efficiency_and_crosses_zero() {
    let raw = RawConfig::load(&workspace_config("fig4b.cfg")).unwrap();
    let cfg = scenario_config_from(&raw).unwrap();
    let table = run_scenario(Scenario::Fig4b, &cfg, 2).unwrap();
    let en: Vec<f64> = table.rows().iter().map(|r| r[2].unwrap()).collect();
    for pair in en.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "En must not fall as eta grows");
    }
    assert_eq!(en[0], 0.0, "En should vanish at eta = 0.5");
    assert!(*en.last().unwrap() > 0.0, "En should be positive near eta = 1");
    // The zero crossing sits near eta = 0.8.
    let cross = table
        .rows()
        .iter()
        .find(|r| r[2].unwrap() > 0.0)
        .map(|r| r[0].unwrap())
        .unwrap();
    assert!(
        (cross - 0.80).abs() < 0.07,
        "first entangled grid point at eta = {cross}"
    );
}

#[test]
fn fig3b_swap_ordering_in_table() {
    let text = base_config()
        .replace("sweep.min = 2e3", "sweep.min = 1.5e4")
        .replace("sweep.max = 1.3e5", "sweep.max = 5e4")
        .replace("sweep.points = 25", "sweep.points = 4");
    let raw = RawConfig::parse(&text).unwrap();
    let cfg = scenario_config_from(&raw).unwrap();
    let table = run_scenario(Scenario::Fig3b, &cfg, 2).unwrap();
    for row in table.rows() {
        let (bs, tms) = (row[2].unwrap(), row[3].unwrap());
        assert!(bs > tms, "swap ordering violated: bs={bs} tms={tms}");
    }
}
