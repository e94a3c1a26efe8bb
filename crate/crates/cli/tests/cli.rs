use std::path::Path;
use std::process::{Command, Output};

use seqrcs_core::matcore::{io, singular_values};
use seqrcs_core::testmat::gen_fiedler;

fn seqrcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqrcs")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = seqrcs(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Drops the named columns from every CSV line.
fn without(csv: &str, drop: &[&str]) -> String {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !drop.contains(&header[i])).collect();
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| f[i]).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

const TIMING: [&str; 7] = ["sketch_ms", "srrqr_B_ms", "support_ms", "srrqr_A1_ms", "assemble_ms", "total_ms", "time_ms"];

#[test]
fn gen_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (f1, f2) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    for f in [&f1, &f2] {
        ok(&["gen", "--family", "fiedler", "--d", "8", "--n", "32", "--seed", "1", "--out", p(f)]);
    }
    assert_eq!(io::load(&f1).unwrap(), gen_fiedler(8, 32));
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());
}

#[test]
fn gen_lowrank_has_requested_rank() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("lr.csv");
    ok(&["gen", "--family", "lowrank", "--rank", "3", "--d", "6", "--n", "12", "--out", p(&f), "--csv"]);
    let s = singular_values(&io::load(&f).unwrap());
    assert!(s[3] <= 1e-12 * s[0]);
}

#[test]
fn css_schema_and_seeding() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.bin");
    ok(&["gen", "--family", "gaussian", "--d", "10", "--n", "300", "--out", p(&f)]);
    let qrcp = ok(&["css", "--in", p(&f), "--k", "4", "--method", "qrcp"]);
    let mut lines = qrcp.lines();
    assert!(lines.next().unwrap().starts_with("trial,method,matrix,d,n,k,kprime,l,s,p,residual"));
    assert!(lines.next().unwrap().starts_with("0,qrcp,g,10,300,4,,,,,"));

    let serial = ok(&["css", "--in", p(&f), "--k", "4", "--trials", "10", "--seed", "7"]);
    let rows: Vec<&str> = serial.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for (t, r) in rows.iter().enumerate() {
        assert!(r.starts_with(&format!("{t},seqrcs,")));
    }
    // trial 3 of seed 7 is trial 0 of seed 10
    let single = ok(&["css", "--in", p(&f), "--k", "4", "--seed", "10"]);
    let strip = |s: &str| s.split_once(',').unwrap().1.to_string();
    assert_eq!(
        strip(without(&serial, &TIMING).lines().nth(4).unwrap()),
        strip(without(&single, &TIMING).lines().nth(1).unwrap())
    );
    let parallel = ok(&["css", "--in", p(&f), "--k", "4", "--trials", "10", "--seed", "7", "--jobs", "4"]);
    assert_eq!(without(&serial, &TIMING), without(&parallel, &TIMING));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.bin");
    assert_eq!(seqrcs(&["gen", "--family", "nope", "--d", "2", "--n", "2", "--out", p(&f)]).status.code(), Some(2));
    assert_eq!(seqrcs(&["gen", "--family", "gaussian", "--d", "5", "--n", "2", "--out", p(&f)]).status.code(), Some(2));
    let missing = seqrcs(&["css", "--in", p(&dir.path().join("missing.bin")), "--k", "2"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.bin"));
    ok(&["gen", "--family", "gaussian", "--d", "4", "--n", "60", "--out", p(&f)]);
    let big = seqrcs(&["oracle", "--in", p(&f), "--k", "30"]);
    assert_eq!(big.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&big.stderr).contains("exceed"));
}

#[test]
fn oracle_reports_best_subset() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.bin");
    ok(&["gen", "--family", "gaussian", "--d", "4", "--n", "8", "--seed", "3", "--out", p(&f)]);
    let out = ok(&["oracle", "--in", p(&f), "--k", "2"]);
    let a = io::load(&f).unwrap();
    let best = seqrcs_core::metrics::brute_force_css(&a, 2).unwrap();
    let row = out.lines().nth(1).unwrap();
    let idx: Vec<String> = best.indices.iter().map(|i| i.to_string()).collect();
    assert!(row.ends_with(&idx.join(";")));
}

#[test]
fn luprrp_on_wilkinson_and_repeatability() {
    let run = || ok(&["luprrp", "--n", "48", "--b", "16", "--matrix", "wilkinson"]);
    let first = run();
    let growth: f64 = without(&first, &TIMING).lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!(growth <= 50.0);
    assert_eq!(without(&first, &TIMING), without(&run(), &TIMING));
    let seeded = || ok(&["luprrp", "--n", "64", "--b", "8", "--panel", "seqrcs", "--seed", "4"]);
    assert_eq!(without(&seeded(), &TIMING), without(&seeded(), &TIMING));
}

#[test]
fn bench_residuals_one_row_per_pair() {
    let out = ok(&["bench", "--suite", "residuals", "--trials", "2", "--d", "10", "--n", "200", "--jobs", "2"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    let mut pairs: Vec<(&str, &str)> = rows.iter().map(|r| {
        let mut f = r.split(',');
        (f.next().unwrap(), f.next().unwrap())
    }).collect();
    pairs.sort();
    pairs.dedup();
    assert_eq!(pairs.len(), 16);
}

#[test]
fn bench_ep_tracks_expectation() {
    let out = ok(&["bench", "--suite", "ep", "--trials", "50", "--jobs", "4"]);
    for row in out.lines().skip(1) {
        let rel: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel <= 0.05, "{row}");
    }
}
