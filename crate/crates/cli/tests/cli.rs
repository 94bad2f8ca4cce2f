use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn dimdoe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimdoe"))
        .args(args)
        .output()
        .expect("spawn dimdoe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn derive_mars_counts() {
    let o = dimdoe(&["derive", p(&fixture("mars.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("predictor groups (1)"), "{s}");
    assert!(s.contains("response groups (1)"), "{s}");
    assert!(s.contains("Elimination tableau"));
}

#[test]
fn derive_pump_counts() {
    let o = dimdoe(&["derive", p(&fixture("pump.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("predictor groups (3)"), "{s}");
    assert!(s.contains("response groups (2)"), "{s}");
}

#[test]
fn derive_counterexample_excludes_second_response() {
    let o = dimdoe(&["derive", p(&fixture("counterexample.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("excluded responses: Y2"));
    assert!(stderr(&o).contains("Y2"));
}

#[test]
fn derive_without_usable_responses_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("none.json");
    std::fs::write(
        &f,
        r#"{"name": "none", "dimensions": ["L", "M"],
            "quantities": [
              {"name": "y", "role": "response", "dimension": {"M": "1"}},
              {"name": "x1", "role": "predictor", "dimension": {"L": "1"}, "range": [1, 2]},
              {"name": "x2", "role": "predictor", "dimension": {"L": "1"}, "range": [1, 2]}
            ]}"#,
    )
    .unwrap();
    let o = dimdoe(&["derive", p(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no usable responses"));
}

#[test]
fn schema_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, "{\n  \"name\": \"x\",\n  \"dimensions\": [\"L\"],\n  \"quantities\": [{\"name\": 1}]\n}\n").unwrap();
    let o = dimdoe(&["derive", p(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn derive_writes_groups_and_tableau() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimdoe(&["derive", p(&fixture("heat-exchanger.json")), "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let groups = std::fs::read_to_string(dir.path().join("groups.csv")).unwrap();
    assert_eq!(groups.lines().count(), 1 + 5 + 2);
    assert!(dir.path().join("tableau.csv").exists());
}

fn pump_design(dir: &Path, seed: &str) -> Output {
    dimdoe(&[
        "design",
        p(&fixture("pump.json")),
        "--n",
        "20",
        "--order",
        "4",
        "--seed",
        seed,
        "--samples",
        "20000",
        "--starts",
        "2",
        "--max-sweeps",
        "20",
        "--out-dir",
        p(dir),
    ])
}

#[test]
fn pump_optimal_design_is_runnable() {
    let dir = tempfile::tempdir().unwrap();
    let o = pump_design(dir.path(), "11");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("factors.csv"));
    assert_eq!(h, ["run", "Q", "D", "s"]);
    assert_eq!(rows.len(), 20);
    let ranges = [(4.0, 30.0), (28.0, 42.0), (710.0, 1170.0)];
    for r in &rows {
        for (j, (lo, hi)) in ranges.iter().enumerate() {
            assert!(r[j + 1] >= lo * (1.0 - 1e-12) && r[j + 1] <= hi * (1.0 + 1e-12), "{r:?}");
        }
    }
    // Re-mapping the emitted factor rows reproduces the emitted π columns.
    let (ph, pi) = read_csv(&dir.path().join("pi.csv"));
    assert_eq!(ph[1..3], ["C_Q", "Re"]);
    for (r, q) in rows.iter().zip(&pi) {
        let (qv, d, s) = (r[1], r[2], r[3]);
        let c_q = qv / (s * d.powi(3));
        let re = 998.0 * s * d * d / 0.001;
        assert!((c_q - q[1]).abs() <= 1e-9 * c_q, "{c_q} vs {}", q[1]);
        assert!((re - q[2]).abs() <= 1e-9 * re, "{re} vs {}", q[2]);
    }
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.starts_with("# dimdoe design report\nseed: 11\n"));
    assert!(dir.path().join("projections/pi_C_Q_Re.csv").exists());
    assert!(dir.path().join("projections/factor_Q_D.csv").exists());
}

#[test]
fn fixed_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(pump_design(a.path(), "5").status.success());
    assert!(pump_design(b.path(), "5").status.success());
    let mut names: Vec<PathBuf> = walk(a.path());
    names.sort();
    assert!(names.len() >= 6);
    for f in names {
        let rel = f.strip_prefix(a.path()).unwrap();
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(b.path().join(rel)).unwrap(), "{rel:?}");
    }
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn missing_seed_is_generated_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimdoe(&[
        "design",
        p(&fixture("mars.json")),
        "--n",
        "4",
        "--samples",
        "1000",
        "--starts",
        "1",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(second.starts_with("seed: ") && second.ends_with("(generated)"), "{second}");
}

#[test]
fn heat_exchanger_uniform_reports_acceptance_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimdoe(&[
        "design",
        p(&fixture("heat-exchanger.json")),
        "--mode",
        "uniform",
        "--n",
        "100",
        "--seed",
        "2",
        "--samples",
        "10000",
        "--candidates",
        "3000",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("acceptance rate: ")).unwrap().to_string();
    let rate: f64 = line["acceptance rate: ".len()..].split(' ').next().unwrap().parse().unwrap();
    assert!((0.06..=0.10).contains(&rate), "{line}");
    let (_, rows) = read_csv(&dir.path().join("factors.csv"));
    assert_eq!(rows.len(), 100);
}

#[test]
fn robust_sweep_writes_maximin_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimdoe(&[
        "design",
        p(&fixture("mars.json")),
        "--mode",
        "robust",
        "--sweep",
        "--n",
        "6",
        "--seed",
        "4",
        "--samples",
        "2000",
        "--starts",
        "2",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("robust_sweep.csv"));
    assert_eq!(h, ["w", "E_pi", "E_chi", "min_E"]);
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().flatten().all(|x| (0.0..=1.0 + 1e-9).contains(x)));
    assert!(stdout(&o).contains("maximin w = "));
}

#[test]
fn efficiency_of_reference_is_one() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pump_design(dir.path(), "8").status.success());
    let design = dir.path().join("design.csv");
    let o = dimdoe(&[
        "efficiency",
        p(&fixture("pump.json")),
        p(&design),
        "--order",
        "4",
        "--seed",
        "8",
        "--samples",
        "20000",
        "--reference",
        p(&design),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for l in stdout(&o).lines().filter(|l| l.contains("): trace ")) {
        let e: f64 = l.rsplit(' ').next().unwrap().parse().unwrap();
        assert!((e - 1.0).abs() < 1e-9, "{l}");
    }
}

#[test]
fn efficiency_of_a_random_design_is_a_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("random.csv");
    let mut body = String::from("Q,D,s\n");
    let mut x: u64 = 12345;
    for _ in 0..20 {
        let mut u = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        body.push_str(&format!("{},{},{}\n", 4.0 + 26.0 * u(), 28.0 + 14.0 * u(), 710.0 + 460.0 * u()));
    }
    std::fs::write(&f, body).unwrap();
    let o = dimdoe(&[
        "efficiency",
        p(&fixture("pump.json")),
        p(&f),
        "--order",
        "2",
        "--seed",
        "1",
        "--samples",
        "10000",
        "--starts",
        "2",
        "--max-sweeps",
        "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let effs: Vec<f64> = stdout(&o)
        .lines()
        .filter(|l| l.contains("): trace "))
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(effs.len(), 2);
    assert!(effs.iter().all(|e| *e > 0.0 && *e <= 1.0 + 1e-9), "{effs:?}");
}

#[test]
fn backsolve_round_trips_emitted_pi_values() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pump_design(dir.path(), "9").status.success());
    let out = dir.path().join("back.csv");
    let o = dimdoe(&[
        "backsolve",
        p(&fixture("pump.json")),
        p(&dir.path().join("pi.csv")),
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, back) = read_csv(&out);
    assert_eq!(h, ["Q", "D", "s", "residual", "inside"]);
    let (_, pi) = read_csv(&dir.path().join("pi.csv"));
    for (b, q) in back.iter().zip(&pi) {
        assert_eq!(b[4], 1.0);
        let c_q = b[0] / (b[2] * b[1].powi(3));
        let re = 998.0 * b[2] * b[1] * b[1] / 0.001;
        assert!((c_q - q[1]).abs() <= 1e-8 * c_q);
        assert!((re - q[2]).abs() <= 1e-8 * re);
    }
}

#[test]
fn backsolve_flags_points_outside_the_region() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pts.csv");
    // Largest C_Q needs small D and s, largest Re needs large ones.
    std::fs::write(&f, "scaled_C_Q,scaled_Re\n1,1\n0,0\n").unwrap();
    let o = dimdoe(&["backsolve", p(&fixture("pump.json")), p(&f)]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",0"), "{s}");
    assert!(rows[1].ends_with(",1"), "{s}");
}
