use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rpdist(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpdist"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_edges(n: usize) -> String {
    (0..n - 1).map(|i| format!("{i} {}\n", i + 1)).collect()
}

fn data_lines(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn dist_identical_snapshots_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), path_edges(6)).unwrap();
    fs::write(dir.path().join("m.tsv"), "1\ta.txt\n2\ta.txt\n").unwrap();
    let o = rpdist(&["dist", "m.tsv", "--metric", "rp1"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("t_from,t_to,metric,value,elapsed_ms"));
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][..4], ["1", "2", "rp1", "0"]);
}

#[test]
fn dist_symmetric_chord_series() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), path_edges(10)).unwrap();
    fs::write(dir.path().join("c.txt"), path_edges(10) + "0 9\n").unwrap();
    fs::write(dir.path().join("m.tsv"), "1\tp.txt\n2\tc.txt\n3\tp.txt\n").unwrap();
    let o = rpdist(&["dist", "m.tsv"], dir.path());
    assert!(o.status.success());
    let rows = data_lines(&stdout(&o));
    let v: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(v.len(), 2);
    assert!(v[0] > 0.0 && (v[0] - v[1]).abs() <= 1e-12 * v[0]);
}

#[test]
fn dist_sketch_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), path_edges(60)).unwrap();
    fs::write(dir.path().join("c.txt"), path_edges(60) + "5 50\n").unwrap();
    fs::write(dir.path().join("m.tsv"), "1\tp.txt\n2\tc.txt\n3\tp.txt\n").unwrap();
    let args = ["dist", "m.tsv", "--metric", "rp2fast", "--epsilon", "0.9", "--always-sketch", "--seed", "11", "--threads", "1"];
    let strip = |o: Output| -> Vec<String> {
        assert!(o.status.success());
        stdout(&o).lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let a = strip(rpdist(&args, dir.path()));
    assert_eq!(a, strip(rpdist(&args, dir.path())));
    assert_eq!(a.len(), 3);
}

#[test]
fn disconnection_is_inf_or_renormalized() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), path_edges(4)).unwrap();
    fs::write(dir.path().join("s.txt"), "% n=4\n0 1\n2 3\n").unwrap();
    fs::write(dir.path().join("m.tsv"), "1\tp.txt\n2\ts.txt\n").unwrap();
    let o = rpdist(&["dist", "m.tsv", "--metric", "rp1,cad"], dir.path());
    assert!(o.status.success());
    let rows = data_lines(&stdout(&o));
    assert!(rows[0][3].parse::<f64>().unwrap().is_finite());
    assert_eq!(rows[1][3], "inf");
    let log = String::from_utf8(o.stderr).unwrap();
    assert!(log.contains("renormalized") && log.contains("1 -> 2"), "{log}");

    let o = rpdist(&["dist", "m.tsv", "--strict"], dir.path());
    assert_eq!(data_lines(&stdout(&o))[0][3], "inf");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("split.txt"), "0 1\n2 3\n").unwrap();
    fs::write(dir.path().join("loop.txt"), "0 0 1.0\n").unwrap();
    assert_eq!(rpdist(&["resist", "split.txt"], dir.path()).status.code(), Some(4));
    assert_eq!(rpdist(&["resist", "loop.txt"], dir.path()).status.code(), Some(2));
    assert_eq!(rpdist(&["resist", "missing.txt"], dir.path()).status.code(), Some(2));
    assert_eq!(rpdist(&["dist", "m.tsv", "--metric", "bogus"], dir.path()).status.code(), Some(2));
    let o = rpdist(&["resist", "split.txt", "--renormalized"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("0e0,5e-1,1e0,1e0"));
}

#[test]
fn resist_dumps_matrix() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p3.txt"), path_edges(3)).unwrap();
    let o = rpdist(&["resist", "p3.txt"], dir.path());
    let m: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let want = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((m[i][j] - want[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn harden_cycle_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let c8: String = (0..8).map(|i| format!("{i} {}\n", (i + 1) % 8)).collect();
    fs::write(dir.path().join("c8.txt"), c8).unwrap();
    let o = rpdist(&["harden", "c8.txt", "--mode", "exhaustive"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let edge = out.lines().find_map(|l| l.strip_prefix("edge\t")).unwrap();
    let ends: Vec<usize> = edge.split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(ends[1] - ends[0], 4);

    let k4 = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
    fs::write(dir.path().join("k4.txt"), k4).unwrap();
    let o = rpdist(&["harden", "k4.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("no candidate edges"));
}

#[test]
fn gen_writes_graph_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--model", "latent-circle", "--n", "50", "--seed", "5", "--out", "g.txt"];
    assert!(rpdist(&args, dir.path()).status.success());
    let first = fs::read_to_string(dir.path().join("g.txt")).unwrap();
    let meta = fs::read_to_string(dir.path().join("g.json")).unwrap();
    assert!(meta.contains("latent_circle") && meta.contains("angles"));
    assert!(rpdist(&args, dir.path()).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("g.txt")).unwrap(), first);
}

#[test]
fn bench_single_size_has_no_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = rpdist(&["bench", "--sizes", "200", "--scale", "5", "--epsilon", "0.9"], dir.path());
    assert!(o.status.success());
    let rows = data_lines(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].last().unwrap(), "");
}

#[test]
fn experiment_zero_width_sweep_reports_nan() {
    let dir = tempfile::tempdir().unwrap();
    let o = rpdist(
        &[
            "experiment", "--model", "sbm", "--n", "40", "--p-in", "0.5", "--p-out", "0.05", "--sweep-max", "0",
            "--steps", "3", "--realizations", "2", "--metric", "rp1", "--summary", "s.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(data_lines(&stdout(&o)).len(), 3);
    let summary = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(summary.lines().nth(1), Some("rp1,NaN"));
}

#[test]
fn aggregate_then_dist() {
    let dir = tempfile::tempdir().unwrap();
    let log = "alice bob 0\nbob carol 100\ncarol alice 200\nalice bob 700000\nbob carol 700100\n\
               alice dave 700200 x\nalice erin 700200 x\nalice bob 700200 x\n";
    fs::write(dir.path().join("events.txt"), log).unwrap();
    let o = rpdist(&["aggregate", "events.txt", "--out", "snaps", "--max-recipients", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(dir.path().join("snaps/manifest.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 2);
    let o = rpdist(&["dist", "snaps/manifest.tsv", "--metric", "edit"], dir.path());
    assert!(o.status.success());
    // Week two loses carol-alice; the three-recipient message is dropped.
    assert_eq!(data_lines(&stdout(&o))[0][3], "2");
}
