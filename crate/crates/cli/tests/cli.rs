use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cellsched(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellsched"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_then_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let g = cellsched(
        &[
            "gen", "--layout", "hex7", "--seed", "7", "--out", "inst.cs1",
        ],
        tmp.path(),
    );
    assert!(g.status.success(), "{g:?}");
    let inst = cellsched::model::NetworkInstance::load_file(tmp.path().join("inst.cs1")).unwrap();
    assert_eq!((inst.cell_count(), inst.user_count()), (7, 35));
    assert_eq!(inst.metadata().unwrap().seed, 7);

    let s = cellsched(
        &[
            "solve",
            "inst.cs1",
            "--algo",
            "ocs",
            "--T",
            "2",
            "--schedule",
        ],
        tmp.path(),
    );
    assert!(s.status.success(), "{s:?}");
    let out = stdout(&s);
    assert!(out.contains("algorithm    ocs"));
    assert!(out.contains("feasible     true"));
    assert!(out.contains("duration_s"));

    let b = cellsched(
        &[
            "solve", "inst.cs1", "--algo", "bound", "--M", "6", "--T", "3",
        ],
        tmp.path(),
    );
    assert!(b.status.success(), "{b:?}");
    assert!(
        stdout(&b).contains("gap          0.0000 %"),
        "{}",
        stdout(&b)
    );
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["gen", "--layout", "hex8", "--out", "x.json"],
        &["solve", "missing.json"],
        &["run", "--algos", "ocs,magic", "--instances", "1"],
        &[
            "run",
            "--layout",
            "hex19",
            "--algos",
            "ocs",
            "--instances",
            "1",
        ],
        &["bound", "--M", "0", "--instances", "1"],
        &["run", "--T", "0", "--instances", "1"],
    ];
    for args in cases {
        let o = cellsched(args, tmp.path());
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn run_writes_tables_in_fixed_order() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [
        "run",
        "--algos",
        "ocs,tdma,bound",
        "--T",
        "1,3",
        "--M",
        "2",
        "--instances",
        "3",
        "--seed",
        "5",
    ];
    let mut one = base.to_vec();
    one.extend(["--jobs", "1", "--out", "one", "--timing"]);
    let mut three = base.to_vec();
    three.extend(["--jobs", "3", "--out", "three"]);
    assert!(cellsched(&one, tmp.path()).status.success());
    assert!(cellsched(&three, tmp.path()).status.success());

    let results = fs::read_to_string(tmp.path().join("one/results.csv")).unwrap();
    assert_eq!(
        results.lines().next().unwrap(),
        "seed,instance,algorithm,T,M,energy,feasible,iterations,active_columns,termination"
    );
    // 3 instances x (ocs, le-off, le-on, near, tdma) x 2 deadlines
    assert_eq!(results.lines().count(), 1 + 3 * 5 * 2);
    let keys: Vec<(usize, String)> = results
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].to_string())
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0].0 <= w[1].0));
    assert_eq!(keys[0].1, "ocs");
    assert!(results.lines().nth(1).unwrap().starts_with("5,0,ocs,1.0,,"));

    for f in ["results.csv", "aggregate.csv", "gaps.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("one").join(f)).unwrap(),
            fs::read(tmp.path().join("three").join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(tmp.path().join("one/timing.csv").exists());
    assert!(!tmp.path().join("three/timing.csv").exists());
}

#[test]
fn config_file_supplies_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("exp.toml"),
        "[generator]\nusers_per_cell = 2\n\n[sweep]\nalgos = [\"tdma\"]\nT = [2.0]\ninstances = 2\nseed = 9\n",
    )
    .unwrap();
    let o = cellsched(&["run", "--config", "exp.toml", "--out", "r"], tmp.path());
    assert!(o.status.success(), "{o:?}");
    let results = fs::read_to_string(tmp.path().join("r/results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("9,0,tdma,2.0,,"));
    assert!(rows[1].starts_with("10,1,tdma,2.0,,"));
    // 7 cells x 2 users, one column each
    assert!(rows.iter().all(|r| r.contains(",0,14,")), "{rows:?}");

    fs::write(tmp.path().join("bad.toml"), "[generator]\nusers = 2\n").unwrap();
    assert_eq!(
        cellsched(&["run", "--config", "bad.toml"], tmp.path())
            .status
            .code(),
        Some(2)
    );
}
