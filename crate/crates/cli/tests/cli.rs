use std::path::Path;
use std::process::{Command, Output};

fn dropmaze(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dropmaze"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const BUNDLE: [&str; 8] = [
    "report.json",
    "comparison.json",
    "potential.csv",
    "current.csv",
    "potential.pgm",
    "joule.pgm",
    "trajectory.csv",
    "path.csv",
];

#[test]
fn simulate_straight_channel_writes_the_bundle() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "strip.cfg",
        "generator = straight\nlength_mm = 20\n",
    );
    let o = dropmaze(&["simulate", "--config", &cfg, "--out", "run"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in BUNDLE {
        assert!(d.path().join("run").join(f).is_file(), "missing {f}");
    }
    let report = std::fs::read_to_string(d.path().join("run/report.json")).unwrap();
    assert!(report.contains("\"ReachedTarget\""));
}

#[test]
fn symmetric_bifurcation_exits_locked() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "sym.cfg",
        "generator = bifurcation\nlen_a_mm = 40\nlen_b_mm = 40\nartifacts = report\n",
    );
    let o = dropmaze(&["simulate", "--config", &cfg, "--out", "run"], d.path());
    assert_eq!(code(&o), 2);
    assert!(d.path().join("run/report.json").is_file());
    assert!(!d.path().join("run/potential.csv").exists());
}

#[test]
fn solve_and_oracle_from_a_maze_file() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "maze.txt", "#######\n#S...T#\n#######\n");
    let cfg = write(d.path(), "m.cfg", "maze_file = maze.txt\n");
    let o = dropmaze(&["solve", "--config", &cfg, "--out", "s"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("s/potential.csv").is_file());
    assert!(!d.path().join("s/trajectory.csv").exists());
    let o = dropmaze(&["oracle", "--config", &cfg, "--out", "o"], d.path());
    assert_eq!(code(&o), 0);
    let path = std::fs::read_to_string(d.path().join("o/path.csv")).unwrap();
    // step,cell_x,cell_y,...; the path ends on the target electrode
    let last: Vec<&str> = path.lines().last().unwrap().split(',').collect();
    assert_eq!(&last[1..3], ["5", "1"]);
}

#[test]
fn batch_runs_each_config_into_its_own_directory() {
    let d = tempfile::tempdir().unwrap();
    let a = write(
        d.path(),
        "a.cfg",
        "generator = straight\nartifacts = report\n",
    );
    let b = write(
        d.path(),
        "b.cfg",
        "generator = bifurcation\nlen_a_mm = 40\nlen_b_mm = 40\nartifacts = report\n",
    );
    let o = dropmaze(
        &[
            "simulate", "--config", &a, "--config", &b, "--out", "batch", "--jobs", "2",
        ],
        d.path(),
    );
    // the batch status is the worst scenario's
    assert_eq!(code(&o), 2);
    assert!(d.path().join("batch/a/report.json").is_file());
    assert!(d.path().join("batch/b/report.json").is_file());
}

#[test]
fn seed_flag_overrides_the_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "r.cfg", "generator = ring\nseed = 1\n");
    let o = dropmaze(&["generate", "--config", &cfg, "--out", "g1"], d.path());
    assert_eq!(code(&o), 0);
    let o = dropmaze(
        &["generate", "--config", &cfg, "--out", "g7", "--seed", "7"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let o = dropmaze(
        &["generate", "--config", &cfg, "--out", "g1b", "--seed", "1"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let read = |p: &str| std::fs::read_to_string(d.path().join(p).join("maze.txt")).unwrap();
    assert_eq!(read("g1"), read("g1b"));
    assert_ne!(read("g1"), read("g7"));
}

#[test]
fn render_and_compare() {
    let d = tempfile::tempdir().unwrap();
    let ins = write(d.path(), "ins.cfg", "generator = ring\nseed = 7\n");
    let coat = write(
        d.path(),
        "coat.cfg",
        "generator = ring\nseed = 7\ncoated_corners = true\n",
    );
    for (cfg, out) in [(&ins, "a"), (&coat, "b")] {
        let o = dropmaze(&["solve", "--config", cfg, "--out", out], d.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = dropmaze(&["compare", "a", "b", "--out", "cmp"], d.path());
    assert_eq!(code(&o), 0);
    let json = String::from_utf8(o.stdout).unwrap();
    assert!(json.contains("\"b_lower\": true"), "{json}");
    assert!(d.path().join("cmp/compare.json").is_file());

    let o = dropmaze(
        &[
            "render",
            "a/current.csv",
            "--out",
            "img",
            "--style",
            "strokes",
            "--scale",
            "2",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pgm = std::fs::read(d.path().join("img/current.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
}

#[test]
fn error_statuses() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&dropmaze(
            &["simulate", "--config", "missing.cfg"],
            d.path()
        )),
        1
    );
    assert_eq!(code(&dropmaze(&["simulate", "--bogus"], d.path())), 4);
    let bad = write(d.path(), "bad.cfg", "generator = ring\nmobility = fast\n");
    assert_eq!(
        code(&dropmaze(&["simulate", "--config", &bad], d.path())),
        4
    );
    write(d.path(), "sealed.txt", "S#T\n");
    let sealed = write(d.path(), "sealed.cfg", "maze_file = sealed.txt\n");
    assert_eq!(
        code(&dropmaze(
            &["solve", "--config", &sealed, "--out", "x"],
            d.path()
        )),
        5
    );
    let slow = write(
        d.path(),
        "slow.cfg",
        "generator = ring\nsolver_max_iter = 3\n",
    );
    assert_eq!(
        code(&dropmaze(
            &["solve", "--config", &slow, "--out", "y"],
            d.path()
        )),
        6
    );
    write(d.path(), "junk.csv", "x_mm,y_mm,phi_V\n0.25,0.25,oops\n");
    assert_eq!(
        code(&dropmaze(&["render", "junk.csv", "--out", "z"], d.path())),
        4
    );
}
