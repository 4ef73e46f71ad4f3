use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert_eq!(
        code(&out),
        0,
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV file as floats, header dropped; empty cells become NaN.
fn csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|c| c.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn points(contour_json: &Path) -> Vec<[f64; 2]> {
    serde_json::from_value(json(contour_json)["points"].clone()).unwrap()
}

fn assert_svg(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("<?xml"), "{}", path.display());
    assert!(
        text.contains("<svg") && text.trim_end().ends_with("</svg>"),
        "{}",
        path.display()
    );
}

/// Writes a circle with `n` samples and returns the contour file.
fn circle(dir: &TempDir, n: usize) -> PathBuf {
    let out = dir.path().join(format!("circle{n}"));
    ok(&[
        "generate",
        "circle",
        "--samples",
        &n.to_string(),
        "--output",
        s(&out),
    ]);
    out.join("contour.json")
}

#[test]
fn generate_circle_samples_the_unit_circle() {
    let dir = TempDir::new().unwrap();
    let c = circle(&dir, 128);
    let p = points(&c);
    assert_eq!(p.len(), 128);
    for q in &p {
        assert!((q[0].hypot(q[1]) - 1.0).abs() < 1e-12);
    }
    let out = c.parent().unwrap();
    assert_eq!(json(&out.join("run.json"))["command"], "generate");
    assert_svg(&out.join("contour.svg"));
}

#[test]
fn generate_star_and_bump() {
    let dir = TempDir::new().unwrap();
    let star = dir.path().join("star");
    ok(&["generate", "star", "--samples", "200", "--output", s(&star)]);
    let p = points(&star.join("contour.json"));
    let r: Vec<f64> = p.iter().map(|q| q[0].hypot(q[1])).collect();
    let (lo, hi) = r
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    // R(1 ± λ/n) with λ = 0.3, n = 5.
    assert!(lo >= 1.0 - 0.06 - 1e-12 && hi <= 1.0 + 0.06 + 1e-12);
    assert!(hi - lo > 0.1);

    let bump = dir.path().join("bump");
    ok(&["generate", "bump", "--samples", "200", "--output", s(&bump)]);
    let p = points(&bump.join("contour.json"));
    let area = 0.5
        * (0..p.len())
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>();
    assert!(area > PI);
}

#[test]
fn generate_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x");
    for args in [
        vec!["generate", "circle", "--samples", "2"],
        vec!["generate", "circle", "--radius", "-1"],
        vec!["generate", "star", "--amplitude", "9"],
        vec!["generate", "hexagon"],
    ] {
        let mut a = args.clone();
        a.extend(["--output", s(&out)]);
        assert_eq!(code(&run(&a)), 2, "{a:?}");
    }
}

#[test]
fn lift_of_constant_data_is_radial_with_polygon_constant() {
    let dir = TempDir::new().unwrap();
    let c = circle(&dir, 128);
    let out = dir.path().join("lift");
    ok(&[
        "lift",
        s(&c),
        "--field",
        "const:1",
        "--mesh-size",
        "0.1",
        "--output",
        s(&out),
    ]);
    // perimeter / area of the regular 128-gon.
    let expected = 2.0 / (PI / 128.0).cos();
    let report = json(&out.join("lift.json"));
    assert!((report["S"].as_f64().unwrap() - expected).abs() < 1e-9);
    for row in csv(&out.join("potential.csv")) {
        assert!((row[5] - expected).abs() < 1e-9);
    }
    for row in csv(&out.join("gradient.csv")) {
        let (cx, cy, gx, gy) = (row[1], row[2], row[3], row[4]);
        let (rc, rg) = (cx.hypot(cy), gx.hypot(gy));
        if rc > 0.3 {
            assert!((cx * gy - cy * gx).abs() < 0.1 * rc * rg, "{row:?}");
            assert!(cx * gx + cy * gy > 0.0);
        }
    }
    assert_eq!(json(&out.join("run.json"))["command"], "lift");
    assert_svg(&out.join("lift.svg"));
}

#[test]
fn lift_of_cos_theta_is_the_unit_translation() {
    let dir = TempDir::new().unwrap();
    let c = circle(&dir, 128);
    let out = dir.path().join("lift");
    ok(&[
        "lift",
        s(&c),
        "--field",
        "cos:1",
        "--mesh-size",
        "0.1",
        "--output",
        s(&out),
    ]);
    assert!(json(&out.join("lift.json"))["S"].as_f64().unwrap().abs() < 1e-9);
    let rows = csv(&out.join("gradient.csv"));
    let mean = |k: usize| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64;
    assert!((mean(3) - 1.0).abs() < 2e-2 && mean(4).abs() < 2e-2);
}

#[test]
fn lift_of_high_frequency_data_concentrates_at_the_boundary() {
    let dir = TempDir::new().unwrap();
    let c = circle(&dir, 128);
    let out = dir.path().join("lift");
    ok(&[
        "lift",
        s(&c),
        "--field",
        "cos:8",
        "--mesh-size",
        "0.05",
        "--output",
        s(&out),
    ]);
    assert!(
        json(&out.join("lift.json"))["magnitude"]["ratio"]
            .as_f64()
            .unwrap()
            < 0.2
    );
}

#[test]
fn decompose_separates_the_pure_components() {
    let dir = TempDir::new().unwrap();
    let c = circle(&dir, 128);
    let norms = |field: &str| {
        let out = dir.path().join(field.replace(':', "_"));
        ok(&[
            "decompose",
            s(&c),
            "--field",
            field,
            "--mesh-size",
            "0.1",
            "--output",
            s(&out),
        ]);
        let d = json(&out.join("decomposition.json"));
        assert!(d["reconstruction_error"].as_f64().unwrap() < 1e-10);
        let n = &d["norms"];
        let get = |k: &str| n[k].as_f64().unwrap();
        (
            get("translation"),
            get("scale"),
            get("deformation"),
            get("total"),
            d,
        )
    };
    // The discrete lifts differ from the exact components by mesh-size terms.
    let (t, _, def, total, _) = norms("const:1");
    assert!(t < 1e-8 * total && def < 1e-2 * total);
    let (_, sc, def, total, d) = norms("cos:1");
    assert!(sc < 1e-8 * total && def < 1e-2 * total);
    assert!((d["v_trans"][0].as_f64().unwrap() - 1.0).abs() < 2e-2);
    let (t, sc, def, total, _) = norms("cos:2");
    assert!(t < 1e-8 * total && sc < 1e-8 * total);
    assert!((def - total).abs() < 1e-6 * total);
}

/// Shoots a geodesic on a coarse 64-gon and returns the path directory.
fn shoot(dir: &TempDir, name: &str, field: &str, extra: &[&str]) -> (PathBuf, Output) {
    let c = circle(dir, 64);
    let out = dir.path().join(name);
    let mut args = vec![
        "geodesic",
        s(&c),
        "--field",
        field,
        "--mesh-size",
        "0.15",
        "--output",
        s(&out),
    ];
    args.extend(extra);
    let args: Vec<String> = args.into_iter().map(String::from).collect();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = run(&refs);
    (out, o)
}

#[test]
fn translation_geodesic_moves_the_circle_and_verifies() {
    let dir = TempDir::new().unwrap();
    let (path, o) = shoot(
        &dir,
        "trans",
        "cos:1",
        &["--steps", "8", "--particles", "16"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let last = json(&path.join("steps/step_0008.json"));
    assert!((last["t"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let p: Vec<[f64; 2]> = serde_json::from_value(last["points"].clone()).unwrap();
    let cx = p.iter().map(|q| q[0]).sum::<f64>() / p.len() as f64;
    let cy = p.iter().map(|q| q[1]).sum::<f64>() / p.len() as f64;
    assert!((cx - 1.0).abs() < 1e-2 && cy.abs() < 1e-2);
    let summary = json(&path.join("summary.json"));
    assert_eq!(summary["status"], "complete");
    assert!((summary["length"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    for f in ["diagnostics.csv", "trajectories.csv", "run.json"] {
        assert!(path.join(f).is_file(), "{f}");
    }
    for f in ["filmstrip.svg", "trajectories.svg"] {
        assert_svg(&path.join(f));
    }

    let check = dir.path().join("check");
    ok(&[
        "verify",
        s(&path),
        "--particles",
        "16",
        "--output",
        s(&check),
    ]);
    let v = json(&check.join("verify.json"));
    assert_eq!(v["pass"], true);
    assert_eq!(v["steps"], 8);
    assert_eq!(json(&check.join("run.json"))["command"], "verify");

    let drawn = dir.path().join("drawn");
    ok(&["render", s(&path), "--output", s(&drawn)]);
    assert_svg(&drawn.join("filmstrip.svg"));
    assert_svg(&drawn.join("trajectories.svg"));
}

#[test]
fn scale_geodesic_grows_the_circle() {
    let dir = TempDir::new().unwrap();
    let (path, o) = shoot(
        &dir,
        "scale",
        "const:1",
        &["--horizon", "0.25", "--steps", "8", "--particles", "0"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&path.join("diagnostics.csv"));
    assert!(rows.windows(2).all(|w| w[1][5] > w[0][5]), "area must grow");
    assert!(!path.join("trajectories.csv").exists());
}

#[test]
fn stationary_path_verifies_with_zero_residual() {
    let dir = TempDir::new().unwrap();
    let (path, o) = shoot(
        &dir,
        "still",
        "const:0",
        &["--horizon", "0.5", "--steps", "8", "--particles", "8"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let check = dir.path().join("check");
    ok(&[
        "verify",
        s(&path),
        "--particles",
        "8",
        "--output",
        s(&check),
    ]);
    let v = json(&check.join("verify.json"));
    assert!(v["max_continuity_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["max_log_det_std"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_rejects_malformed_paths() {
    let dir = TempDir::new().unwrap();
    let (path, o) = shoot(
        &dir,
        "still",
        "const:0",
        &["--horizon", "0.5", "--steps", "8", "--particles", "0"],
    );
    assert_eq!(code(&o), 0);
    let check = dir.path().join("check");

    let step = path.join("steps/step_0002.json");
    let original = fs::read_to_string(&step).unwrap();
    fs::write(&step, "{ not json").unwrap();
    assert_eq!(code(&run(&["verify", s(&path), "--output", s(&check)])), 2);
    fs::write(&step, &original).unwrap();

    fs::remove_file(path.join("run.json")).unwrap();
    assert_eq!(code(&run(&["verify", s(&path), "--output", s(&check)])), 2);
}

#[test]
fn violent_data_exits_with_breakdown_and_partial_output() {
    let dir = TempDir::new().unwrap();
    let (path, o) = shoot(
        &dir,
        "violent",
        "cos:8+cos:8+cos:8",
        &["--steps", "8", "--particles", "8"],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&path.join("summary.json"));
    assert_eq!(summary["status"], "breakdown");
    let completed = summary["steps_completed"].as_u64().unwrap() as usize;
    assert!(completed < 8);
    assert_eq!(
        summary["breakdown"]["step"].as_u64().unwrap() as usize,
        completed + 1
    );
    assert!(path
        .join(format!("steps/step_{completed:04}.json"))
        .is_file());
    assert!(!path.join("trajectories.csv").exists());
    assert_svg(&path.join("filmstrip.svg"));
}

#[test]
fn geodesic_rejects_bad_step_arguments() {
    let dir = TempDir::new().unwrap();
    for extra in [
        &["--dt", "0.3"][..],
        &["--steps", "1"],
        &["--steps", "8", "--dt", "0.25"],
        &["--horizon", "-1"],
    ] {
        let (_, o) = shoot(&dir, "bad", "cos:1", extra);
        assert_eq!(code(&o), 2, "{extra:?}");
    }
    let (_, o) = shoot(&dir, "bad", "wave:3", &[]);
    assert_eq!(code(&o), 2);
}
