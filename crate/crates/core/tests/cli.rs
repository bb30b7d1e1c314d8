use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rocover::diagnostics::parse_trace_csv;
use rocover::generators::Meta;
use rocover::harness::parse_csv;
use rocover::io::{load_instance, AnyInstance};

fn rocover(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rocover")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn gen_writes_instance_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        rocover(dir.path(), &["gen", "--family", "upper-triangular", "--n", "1024", "--seed", "7", "--out", "ut.txt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let AnyInstance::SetCover(sys) = load_instance(dir.path().join("ut.txt")).unwrap() else { panic!() };
    assert_eq!((sys.n(), sys.m()), (1024, 1024));
    let meta = Meta::parse(&fs::read_to_string(dir.path().join("ut.meta")).unwrap()).unwrap();
    assert_eq!(meta.get("seed"), Some("7"));
    assert_eq!(meta.opt_upper_bound(), Some(1.0));
    let full = meta.reference_cover().unwrap();
    assert_eq!(sys.set(full[0]).len(), 1024);
}

#[test]
fn missing_instance_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = rocover(dir.path(), &["run", "absent.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.txt"));
}

#[test]
fn unknown_subcommand_and_flag_print_usage() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["run", "x.txt", "--no-such-flag"][..]] {
        let out = rocover(dir.path(), args);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn run_is_reproducible_and_writes_raw_costs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rocover(d, &["gen", "--family", "planted", "--n", "80", "--k", "5", "--seed", "2", "--out", "p.txt"])
        .status
        .success());
    for (threads, out) in [("1", "a.csv"), ("3", "b.csv")] {
        let o = rocover(d, &["run", "p.txt", "--trials", "16", "--seed", "9", "--threads", threads, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    assert_eq!(fs::read(d.join("a.trials.csv")).unwrap(), fs::read(d.join("b.trials.csv")).unwrap());
    let rows = parse_csv(a.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].family.as_str(), rows[0].n, rows[0].k, rows[0].trials), ("planted", 80, Some(5), 16));
    let raw = fs::read_to_string(d.join("a.trials.csv")).unwrap();
    assert_eq!(raw.lines().count(), 17);
}

#[test]
fn sweep_csv_is_sorted_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("grid.txt"), "upper-triangular n=64\nupper-triangular n=16\nupper-triangular n=32\n").unwrap();
    let o = rocover(d, &["sweep", "grid.txt", "--algorithms", "loc,naive", "--trials", "8", "--out", "s.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(fs::read(d.join("s.csv")).unwrap().as_slice()).unwrap();
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, [16, 16, 32, 32, 64, 64]);
    assert!(rows.iter().all(|r| r.opt == Some(1.0)));
}

#[test]
fn trace_and_opt_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rocover(d, &["gen", "--family", "planted", "--n", "24", "--m", "12", "--k", "3", "--out", "p.txt"])
        .status
        .success());
    let o = rocover(d, &["trace", "p.txt", "--out", "t.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_trace_csv(fs::read(d.join("t.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r.phi.is_finite() || r.phi == f64::NEG_INFINITY));

    let o = rocover(d, &["opt", "p.txt"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("exact=true"), "{text}");
    let cost: f64 = text.lines().find_map(|l| l.strip_prefix("cost=")).unwrap().parse().unwrap();
    assert!(cost <= 3.0);

    let o = rocover(d, &["--beta", "guess-double", "trace", "p.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = rocover(dir.path(), &["check", "budget-invariant"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS budget-invariant"));
    assert_eq!(rocover(dir.path(), &["check", "no-such-check"]).status.code(), Some(2));
}
