use std::fs;
use std::process::{Command, Output};

fn mixed_stab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixed-stab")).args(args).env_remove("MIXEDSTAB_THRESHOLD").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = mixed_stab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn row<'a>(csv: &'a str, prefix: &str) -> Vec<&'a str> {
    csv.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no row {prefix}")).split(',').collect()
}

#[test]
fn table_two_diagonal_n6() {
    let csv = stdout(&["tables", "--which", "T2", "--n", "4..16"]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# mixed-stab 0.1.0 "));
    assert_eq!(lines.next().unwrap(), "family,n,r,sigma,dimN,beta_div,beta_div_reduced,alpha,beta_h1,threshold");
    assert_eq!(row(&csv, "diagonal,6,1")[5], "0.716677");
    assert_eq!(csv.lines().count(), 2 + 28);
}

#[test]
fn union_jack_p2_spurious_modes() {
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["infsup", "--family", "unionjack", "--n", "10", "--r", "2", "--format", "json"]))
            .unwrap();
    assert_eq!(json["reports"][0]["dimN"], 40);
    assert_eq!(json["reports"][0]["sigma"], 40);
}

#[test]
fn imported_mesh_gives_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let p = path.to_str().unwrap();
    stdout(&["mesh", "--family", "crisscross", "--n", "4", "--out", p]);
    let imported = stdout(&["infsup", "--mesh", p, "--r", "1"]);
    let generated = stdout(&["infsup", "--family", "crisscross", "--n", "4", "--r", "1"]);
    let a = row(&imported, "imported");
    let b = row(&generated, "crisscross");
    // sigma, dimN, constants and threshold agree; only the label columns differ
    assert_eq!(a[2..], b[2..]);
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("t{i}.csv")).to_str().unwrap().to_string()).collect();
    stdout(&["--jobs", "1", "tables", "--which", "T4", "--n", "4..6", "--out", &paths[0]]);
    stdout(&["--jobs", "3", "tables", "--which", "T4", "--n", "4..6", "--out", &paths[1]]);
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn threshold_sweep_is_monotone() {
    let csv = stdout(&["infsup", "--family", "flipped", "--n", "8", "--threshold-sweep"]);
    let dims: Vec<usize> = csv.lines().skip(2).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(dims.len(), 4);
    assert!(dims.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn threshold_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mixed-stab"))
        .args(["infsup", "--n", "4"])
        .env("MIXEDSTAB_THRESHOLD", "1e-3")
        .output()
        .unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(row(&csv, "diagonal,4,1").last().unwrap().ends_with("1e-3"));
}

#[test]
fn exit_codes() {
    assert_eq!(mixed_stab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mixed_stab(&["infsup", "--n", "5"]).status.code(), Some(2));
    assert_eq!(mixed_stab(&["infsup", "--r", "9"]).status.code(), Some(2));
    assert_eq!(mixed_stab(&["infsup", "--mesh", "/nonexistent/mesh.txt"]).status.code(), Some(1));
}

#[test]
fn matrix_dump_and_other_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&["infsup", "--n", "4", "--dump-matrices", d, "--gamma", "--alpha", "--stokes"]);
    let files = fs::read_dir(d).unwrap().count();
    assert_eq!(files, 6);
    let mv = fs::read_to_string(dir.path().join("diagonal_n4_r1_mass_v.mtx")).unwrap();
    assert!(mv.starts_with("%%MatrixMarket matrix coordinate real general\n50 50 "));

    let alpha = stdout(&["coercivity", "--n", "4", "--r", "2"]);
    let a: f64 = row(&alpha, "diagonal,4,2")[3].parse().unwrap();
    assert!((a - 1.0).abs() < 1e-9);

    let eig = stdout(&["spectrum", "--n", "4", "--problem", "infsup"]);
    assert_eq!(eig.lines().count(), 2 + 32);

    let mu = stdout(&["laplace-eig", "--n", "8", "--r", "2"]);
    let mu_h: f64 = row(&mu, "diagonal,8,2")[3].parse().unwrap();
    assert!((mu_h - 2.0 * std::f64::consts::PI.powi(2)).abs() < 0.05);

    let stokes = stdout(&["stokes-infsup", "--n", "4", "--r", "2"]);
    let cols = row(&stokes, "diagonal,4,2");
    assert!(cols[4].parse::<f64>().unwrap() <= cols[7].parse::<f64>().unwrap());

    let gp = dir.path().join("plots");
    stdout(&["converge", "--r", "2", "--n", "4,8", "--gnuplot", gp.to_str().unwrap()]);
    let data = fs::read_to_string(gp.join("normalized_r2.dat")).unwrap();
    assert!(data.lines().nth(2).unwrap().contains("1.000000e0"));
}
