use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lyap_cli::{parse_config, run, Command as Sub};

fn lyap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyap")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn solve_is_deterministic_and_csvs_are_stamped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "lin.toml", "system = linear2d\noutput.grid = 21\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = lyap(&["solve", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let names = csv_files(&a);
    assert_eq!(names, ["eigenfunctions_1.csv", "eigenfunctions_2.csv", "eigenvalues.csv", "value.csv"]);
    let hash = parse_config("system = linear2d\noutput.grid = 21\n").unwrap().hash;
    for n in &names {
        let (x, y) = (fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap());
        assert_eq!(x, y, "{n} differs between runs");
        let text = String::from_utf8(x).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# config_hash={hash}"));
        assert!(lines.next().unwrap().starts_with(if n == "eigenvalues.csv" { "index,lambda" } else { "x1,x2," }));
    }
    assert!(fs::read_to_string(a.join("report.txt")).unwrap().contains("status = pass"));
}

#[test]
fn seed_changes_sampled_points_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "o.toml", "system = linear2d\noracle.random = 5\n");
    let mut files = Vec::new();
    for (seed, dir) in [("1", "s1"), ("1", "s1b"), ("2", "s2")] {
        let out_dir = tmp.path().join(dir);
        let out = lyap(&["oracle", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", seed]);
        assert_eq!(out.status.code(), Some(0));
        files.push(fs::read_to_string(out_dir.join("oracle.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
    assert_ne!(files[0].lines().next(), files[2].lines().next());
    assert_eq!(files[0].lines().count(), 2 + 5);
}

#[test]
fn check_linear2d_passes_with_expected_witnesses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config("system = linear2d\n").unwrap();
    let report = run(Sub::Check, &cfg, tmp.path()).unwrap();
    assert!(report.passed());
    let get = |name: &str, key: &str| {
        report
            .hypotheses
            .iter()
            .find(|h| h.name == name)
            .and_then(|h| h.get(key))
            .unwrap()
    };
    assert!((get("omega0", "omega0") + 2.0).abs() <= 1e-9);
    assert!((get("tangent_condition", "max_boundary_flux") + 1.0).abs() <= 1e-12);
    assert!((get("linearization", "spectral_abscissa") + 2.5).abs() <= 1e-12);
}

#[test]
fn compare_against_exact_quadratic() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "system = linear2d\n[compare]\nreference = quadratic\ngrid = 50\nrandom = 0\n\
                lower = [-0.9, -0.9]\nupper = [0.9, 0.9]\nexclude_radius = 0.1\ntolerance = 1e-8\n";
    let report = run(Sub::Compare, &parse_config(text).unwrap(), tmp.path()).unwrap();
    assert!(report.passed(), "{report}");
    let max = report.errors.iter().find(|(k, _)| k == "max_abs").unwrap().1;
    assert!(max <= 1e-8, "{max}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = out_dir.to_str().unwrap();

    let ok = write_config(tmp.path(), "ok.toml", "system = port_hamiltonian_demo\n");
    assert_eq!(lyap(&["check", "--config", &ok, "--out", out]).status.code(), Some(0));

    // Outward field: tangent condition, ω₀ and linearization all fail.
    let unstable = write_config(
        tmp.path(),
        "unstable.toml",
        "[system]\nname = \"custom\"\ndim = 1\nfield = [[{ coeff = 1.0, exponents = [1] }]]\n\
         [domain]\nlower = [-1.0]\nupper = [1.0]\n[check]\nhorizon = 1.0\n",
    );
    let res = lyap(&["check", "--config", &unstable, "--out", out]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stdout).contains("status = fail"));

    let bad = write_config(tmp.path(), "bad.toml", "system = linear2d\nbogus = 1\n");
    let res = lyap(&["solve", "--config", &bad, "--out", out]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bogus"));

    let missing = tmp.path().join("nope.toml");
    assert_eq!(lyap(&["solve", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn laguerre_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[system]\nname = \"custom\"\ndim = 1\nfield = [[{ coeff = -1.0, exponents = [1] }]]\n\
                [domain]\nlower = [-1.0]\nupper = [1.0]\n[laguerre]\npoint = [1.0]\nterms = 26\n";
    run(Sub::Laguerre, &parse_config(text).unwrap(), tmp.path()).unwrap();
    let csv = fs::read_to_string(tmp.path().join("laguerre.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 26);
    for (n, row) in rows.iter().enumerate() {
        let a: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((a - (2.0 / 3.0) * (1.0f64 / 3.0).powi(n as i32)).abs() <= 1e-7);
    }
}
