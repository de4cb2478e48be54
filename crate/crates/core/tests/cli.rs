use std::path::{Path, PathBuf};
use std::process::Command;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_tlogic")).args(args).output().unwrap();
    Run {
        code: o.status.code().unwrap(),
        out: String::from_utf8(o.stdout).unwrap(),
        err: String::from_utf8(o.stderr).unwrap(),
    }
}

fn path_model(dir: &Path, n: usize, target: usize) -> PathBuf {
    let edges: Vec<String> = (1..n).map(|i| format!("({},{})", i - 1, i)).collect();
    let text = format!(
        "domain {n}\nrel P/1\nrel R/2\nP = {{{target}}}\nR = {{{}}}\n",
        edges.join(", ")
    );
    let p = dir.join("path.model");
    std::fs::write(&p, text).unwrap();
    p
}

const REACH: &str = "loop L . (P(x) | exists y . (R(x,y) & exists x . (y = x & L)))";

#[test]
fn eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = path_model(dir.path(), 4, 3);
    let m = m.to_str().unwrap();
    let r = run(&["eval", "--formula", REACH, "--model", m, "--assign", "x=0"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("outcome: EloiseWins"));
    let r = run(&["eval", "--formula", REACH, "--model", m, "--assign", "x=1"]);
    assert_eq!(r.code, 0);
    assert_eq!(run(&["eval", "--formula", "bot", "--model", m]).code, 1);
    assert_eq!(run(&["eval", "--formula", "loop L . L", "--model", m]).code, 1);
    assert_eq!(run(&["eval", "--formula", "exists x .", "--model", m]).code, 10);
    assert_eq!(
        run(&["eval", "--formula", "top", "--model", m, "--budget", "0"]).code,
        10
    );
    assert_eq!(
        run(&["eval", "--formula", "loop L . Ix v . L", "--model", m, "--budget", "50"]).code,
        2
    );
    assert_eq!(
        run(&["eval", "--formula", "top", "--model", "/nonexistent/model"]).code,
        11
    );
    assert_eq!(run(&["eval", "--formula", "P(x,y)", "--model", m]).code, 10);
    assert_eq!(
        run(&["eval", "--formula", "top", "--model", m, "--assign", "x=9"]).code,
        12
    );
    assert_eq!(run(&["--version"]).code, 0);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&[]).code, 10);
}

#[test]
fn formula_from_file_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let m = path_model(dir.path(), 3, 2);
    let f = dir.path().join("reach.t");
    std::fs::write(&f, format!("# reachability\n{REACH}\n")).unwrap();
    let at = format!("@{}", f.display());
    let dot = dir.path().join("g.dot");
    let r = run(&[
        "eval",
        "--formula",
        &at,
        "--model",
        m.to_str().unwrap(),
        "--assign",
        "x=0",
        "--trace",
        "dot",
        "--out",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let r = run(&[
        "eval",
        "--formula",
        &at,
        "--model",
        m.to_str().unwrap(),
        "--assign",
        "x=0",
        "--trace",
        "text",
    ]);
    assert!(r.out.contains("result Eloise"), "{}", r.out);
    let again = run(&[
        "eval",
        "--formula",
        &at,
        "--model",
        m.to_str().unwrap(),
        "--assign",
        "x=0",
        "--trace",
        "text",
    ]);
    assert_eq!(r.out, again.out);
}

#[test]
fn fragment_and_encode() {
    let r = run(&["fragment", "--formula", "loop L[2*n^1] . Ix v[1*exp(1,n)+0] . L"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("T[-Ix]           no"));
    assert!(r.out.contains("T[kExp]          yes (k = 0)"));
    assert!(r.out.contains("T[Ix|kExp]       yes (k = 1)"));
    let r = run(&["fragment", "--formula", "R(x,y)", "--vocab", "P/1,R/2,tape T/1"]);
    assert_eq!(r.code, 0);
    assert_eq!(run(&["fragment", "--formula", "R(x,y)", "--vocab", "P/1"]).code, 10);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.model");
    std::fs::write(&p, "domain 2\nrel P/1\nP = {1}\n").unwrap();
    let r = run(&["encode", "--model", p.to_str().unwrap()]);
    assert_eq!(r.out.trim(), "11001");
    let r = run(&["encode", "--model", p.to_str().unwrap(), "--order", "1,0"]);
    assert_eq!(r.out.trim(), "11010");
    assert_eq!(
        run(&["encode", "--model", p.to_str().unwrap(), "--order", "1,1"]).code,
        12
    );
}

#[test]
fn capture_reports() {
    let even = data("machines/even_ones.atm");
    let r = run(&["capture", "--machine", even.to_str().unwrap(), "--sizes", "1..2"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("agreement: 6/6"), "{}", r.out);

    let accept = data("machines/accept.atm");
    let r = run(&["capture", "--machine", accept.to_str().unwrap(), "--sizes", "0..2"]);
    assert_eq!(r.code, 0);
    for line in r.out.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols[1], cols[2], "{line}");
        assert_eq!(cols[1], cols[3], "{line}");
    }

    let r = run(&["capture", "--machine", even.to_str().unwrap(), "--sizes", "1..0"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("agreement: 0/0"));

    // a machine without a space line needs --k or --bound
    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.atm");
    std::fs::write(&bare, "state s accept\nstart s\n").unwrap();
    assert_eq!(run(&["capture", "--machine", bare.to_str().unwrap()]).code, 10);
    let r = run(&[
        "capture",
        "--machine",
        bare.to_str().unwrap(),
        "--bound",
        "3*n^1+2",
        "--sizes",
        "0..2",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    // n^2 cells are too few below size 3 and the table is missing
    assert_eq!(
        run(&["capture", "--machine", bare.to_str().unwrap(), "--k", "1"]).code,
        12
    );
    assert_eq!(run(&["capture", "--machine", "/nonexistent.atm"]).code, 11);
}

#[test]
fn capture_budget_exhaustion_is_unknown() {
    let even = data("machines/even_ones_exp.atm");
    let r = run(&[
        "capture",
        "--machine",
        even.to_str().unwrap(),
        "--sizes",
        "1..1",
        "--budget",
        "5",
    ]);
    assert_eq!(r.code, 2, "{}{}", r.out, r.err);
}

#[test]
fn outputs_go_only_to_the_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let even = data("machines/even_ones.atm");
    let args = [
        "capture",
        "--machine",
        even.to_str().unwrap(),
        "--sizes",
        "0..2",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ];
    let a = run(&args);
    assert_eq!(a.code, 0);
    let first = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(first.lines().count(), 1 + 7);
    assert!(first.starts_with("size,encoding,machine,game,positions,agree"));
    let b = run(&args);
    assert_eq!(a.out, b.out);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);

    let one = run(&[
        "capture",
        "--machine",
        even.to_str().unwrap(),
        "--sizes",
        "0..2",
        "--seed",
        "7",
        "--jobs",
        "1",
    ]);
    assert_eq!(one.out, a.out);
}
