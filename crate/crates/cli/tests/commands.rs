use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use hyptutte::{distance_x, io};
use tempfile::TempDir;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyptutte"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

/// A directory holding `mesh.map` and its uniform solution `solved.map`,
/// shared by the tests that only read them.
fn fixture() -> &'static (TempDir, PathBuf) {
    static CELL: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        assert!(run(&["mesh", "-o", "mesh.map"], dir.path()).status.success());
        assert!(run(&["solve", "mesh.map", "--uniform", "-o", "solved.map"], dir.path()).status.success());
        let path = dir.path().to_path_buf();
        (dir, path)
    })
}

fn copy_fixture(to: &Path) {
    let (_, src) = fixture();
    for name in ["mesh.map", "solved.map"] {
        fs::copy(src.join(name), to.join(name)).unwrap();
    }
}

#[test]
fn mesh_prints_counts_and_roundtrips() {
    let dir = TempDir::new().unwrap();
    let o = run(&["mesh", "--genus", "2", "--refine", "0", "-o", "a.map"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "euler"), -2.0);
    let faces = value(&text, "faces");
    let o = run(&["mesh", "--refine", "1", "-o", "b.map"], dir.path());
    assert_eq!(value(&stdout(&o), "faces"), 4.0 * faces);

    let written = fs::read_to_string(dir.path().join("a.map")).unwrap();
    let parsed = io::parse_mapping(&written).unwrap();
    assert_eq!(io::write_mapping(&parsed), written);
    assert!(parsed.complex().validate().is_valid());
}

#[test]
fn mesh_rejects_genus_one() {
    let dir = TempDir::new().unwrap();
    let o = run(&["mesh", "--genus", "1", "-o", "a.map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("genus"));
}

#[test]
fn solve_converges_and_is_a_fixed_point() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(&["solve", "solved.map", "--uniform", "-o", "again.map"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "mu") < 1e-10);
    assert_eq!(value(&stdout(&o), "sweeps"), 0.0);
    let a = fs::read(dir.path().join("solved.map")).unwrap();
    let b = fs::read(dir.path().join("again.map")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn solve_is_deterministic_given_a_seed() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    for out in ["x.map", "y.map"] {
        let o = run(
            &["solve", "mesh.map", "--uniform", "--noise", "0.3", "--seed", "7", "--eps", "1e-8", "-o", out],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(fs::read(dir.path().join("x.map")).unwrap(), fs::read(dir.path().join("y.map")).unwrap());
}

#[test]
fn zero_weight_is_rejected() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    assert!(run(&["mvc", "solved.map", "-o", "w.txt"], dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("w.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let k = lines.iter().position(|l| l.split_whitespace().count() == 3).unwrap();
    let mut parts: Vec<&str> = lines[k].split_whitespace().collect();
    parts[2] = "0";
    lines[k] = parts.join(" ");
    fs::write(dir.path().join("bad.txt"), lines.join("\n") + "\n").unwrap();

    let o = run(&["solve", "mesh.map", "-w", "bad.txt", "-o", "out.map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("weights must be positive"), "{}", stderr(&o));
}

#[test]
fn non_convergence_exits_3_with_trace() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(
        &["solve", "mesh.map", "--uniform", "--max-iters", "2", "--trace", "t.txt", "-o", "out.map"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("did not converge"));
    let trace = fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert_eq!(trace.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(!dir.path().join("out.map").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    fs::write(dir.path().join("loose.toml"), "eps = 1e-3\ntau = 0.5\n").unwrap();
    let loose = run(&["solve", "mesh.map", "--uniform", "--config", "loose.toml", "-o", "a.map"], dir.path());
    let tight = run(
        &["solve", "mesh.map", "--uniform", "--config", "loose.toml", "--eps", "1e-10", "-o", "b.map"],
        dir.path(),
    );
    assert!(value(&stdout(&loose), "sweeps") < value(&stdout(&tight), "sweeps"));
    assert!(value(&stdout(&tight), "mu") < 1e-10);

    fs::write(dir.path().join("bad.toml"), "tolerance = 1\n").unwrap();
    let o = run(&["solve", "mesh.map", "--uniform", "--config", "bad.toml", "-o", "c.map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["solve", "mesh.map", "--uniform", "--tau", "2", "-o", "c.map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(&["verify", "solved.map"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("verdict: pass\n"));
    assert!(stdout(&o).lines().all(|l| l.contains(": ")));

    let m = io::parse_mapping(&fs::read_to_string(dir.path().join("solved.map")).unwrap()).unwrap();
    let mut lifts = m.lifts().to_vec();
    lifts.swap(1, 2);
    fs::write(dir.path().join("bad.map"), io::write_mapping(&m.with_lifts(lifts))).unwrap();
    let o = run(&["verify", "bad.map"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("verdict: fail\n"));
    assert!(stdout(&o).contains("flipped: "));

    let o = run(&["verify", "missing.map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["mvc", "bad.map", "-o", "w.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn paranoid_verify_passes_on_solution() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(&["verify", "--paranoid", "solved.map"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("overlapping_pairs: 0"));
}

#[test]
fn morph_of_identical_endpoints() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(&["morph", "solved.map", "solved.map", "--frames", "3", "--out-dir", "frames"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = io::parse_mapping(&fs::read_to_string(dir.path().join("solved.map")).unwrap()).unwrap();
    for k in 0..3 {
        let frame = dir.path().join(format!("frames/frame_{k:03}.map"));
        let f = io::parse_mapping(&fs::read_to_string(frame).unwrap()).unwrap();
        assert!(distance_x(&f, &m).unwrap() < 1e-9);
        assert!(dir.path().join(format!("frames/frame_{k:03}.svg")).exists());
    }
    assert!(!dir.path().join("frames/frame_003.map").exists());
}

#[test]
fn morph_across_classes_exits_4() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let m = io::parse_mapping(&fs::read_to_string(dir.path().join("solved.map")).unwrap()).unwrap();
    let other = m.gauge(5, &m.group().generator(0));
    fs::write(dir.path().join("other.map"), io::write_mapping(&other)).unwrap();
    let o = run(&["morph", "solved.map", "other.map", "--frames", "3", "--out-dir", "f"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn render_counts_polygon_sides_and_edges() {
    let dir = TempDir::new().unwrap();
    copy_fixture(dir.path());
    let o = run(&["render", "solved.map", "--polygon", "-o", "a.svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    assert_eq!(svg.matches(r#"class="polygon-side""#).count(), 8);
    let m = io::parse_mapping(&fs::read_to_string(dir.path().join("solved.map")).unwrap()).unwrap();
    assert_eq!(svg.matches(r#"class="edge""#).count(), m.complex().edges().len());

    let o = run(&["render", "solved.map", "--translates", "3.5", "-o", "b.svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("b.svg")).unwrap();
    let edges = svg.matches(r#"class="edge""#).count();
    assert!(edges > m.complex().edges().len() && edges.is_multiple_of(m.complex().edges().len()));
    assert_eq!(svg.matches("polygon-side").count(), 0);

    let o = run(&["render", "solved.map", "--radius", "0", "-o", "c.svg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
