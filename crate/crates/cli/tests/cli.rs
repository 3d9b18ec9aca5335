use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn gcdiv(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gcdiv"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let r = gcdiv(args);
    let v = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout));
    (r.code, v)
}

fn no_numbers(v: &Value) -> bool {
    match v {
        Value::Number(_) => false,
        Value::Array(a) => a.iter().all(no_numbers),
        Value::Object(m) => m.values().all(no_numbers),
        _ => true,
    }
}

fn dot_counts(dot: &str) -> (usize, usize) {
    let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    (nodes, edges)
}

#[test]
fn check_reports_condition() {
    let r = gcdiv(&["check", "1,2,3,6"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("condition C: satisfied; predicted: divides"));

    let r = gcdiv(&["check", "2,3"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not gcd-closed: missing 1"), "{}", r.stderr);

    let (code, v) = json(&["check", "1,2,3,12", "--json"]);
    assert_eq!(code, 3);
    assert_eq!(v["predicted"], Value::Bool(false));
    assert_eq!(v["verified"], Value::Null);
    let viol = &v["violations"][0];
    assert_eq!((viol["y"].as_str(), viol["z"].as_str()), (Some("2"), Some("3")));
    assert_eq!(viol["clause"], "lcm");
    assert_eq!(v["gtd"]["12"], serde_json::json!(["2", "3"]));
}

#[test]
fn verify_examples() {
    let (code, v) = json(&["verify", "1,2", "-e", "1", "--json", "--dump-matrices"]);
    assert_eq!(code, 0);
    assert_eq!(v["matrices"]["quotient"], serde_json::json!([["0", "1"], ["2", "0"]]));
    assert_eq!(v["verified"], Value::Bool(true));

    let r = gcdiv(&["verify", "1,2,3,12", "-e", "2"]);
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("verified: does not divide"));

    assert_eq!(gcdiv(&["verify", "1,2,3,6", "-e", "3"]).code, 0);
}

#[test]
fn witness_examples() {
    let (code, v) = json(&["witness", "1,2,3,12", "--json"]);
    assert_eq!(code, 3);
    let w = &v["witness"];
    assert_eq!((w["g_num"].as_str(), w["g_den"].as_str()), (Some("3"), Some("4")));
    assert_eq!((w["k"].as_str(), w["m"].as_str()), (Some("2"), Some("4")));
    assert_eq!(w["case"], "brute_scan");

    let (_, v) = json(&["witness", "1,2,3,5,7,420", "--json"]);
    let c = &v["constructive"];
    assert_eq!(c["case"], "case1");
    assert_eq!(c["x_k"], "7");
    assert_eq!((c["g_num"].as_str(), c["g_den"].as_str()), (Some("26"), Some("29")));
    assert_eq!(c["inUnitInterval"], Value::Bool(true));

    let r = gcdiv(&["witness", "1,2,3,6"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("set satisfies condition C; all g integral"));

    for seed in ["1", "2", "3"] {
        let (code, v) = json(&["witness", "gen:gtd:4", "--seed", seed, "--json"]);
        assert_eq!(code, 3);
        assert_eq!(v["constructive"]["case"], "case2");
        assert_eq!(v["constructive"]["inUnitInterval"], Value::Bool(true));
    }
}

#[test]
fn hasse_diagrams() {
    let r = gcdiv(&["hasse", "1,2,4"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("digraph hasse {"));
    assert_eq!(dot_counts(&r.stdout), (3, 2));
    assert!(r.stdout.contains("n1 -> n2;") && r.stdout.contains("n2 -> n4;"));

    let b3 = gcdiv(&["hasse", "1,2,3,5,6,10,15,30", "--dot"]).stdout;
    assert_eq!(dot_counts(&b3), (8, 12));
    assert!(b3.contains("n30 [label=\"30\", boolean=\"true\"];"));

    let d210 = "1,2,3,5,6,7,10,14,15,21,30,35,42,70,105,210";
    assert_eq!(dot_counts(&gcdiv(&["hasse", d210]).stdout), (16, 32));
    assert_eq!(gcdiv(&["hasse", d210]).stdout, gcdiv(&["hasse", d210]).stdout);

    for l in 2..=5usize {
        let dot = gcdiv(&["hasse", &format!("gen:boolean:{l}"), "--seed", "5"]).stdout;
        assert_eq!(dot_counts(&dot), (1 << l, l << (l - 1)));
    }

    // G(36) = {4,6,9} and gcd(4,9) = gcd(4,6,9).
    let not_boolean = gcdiv(&["hasse", "1,2,3,4,6,9,36"]).stdout;
    assert!(not_boolean.contains("n36 [label=\"36\", boolean=\"false\"];"), "{not_boolean}");
}

#[test]
fn census_examples() {
    let (code, v) = json(&["census", "--universe", "4", "--nmax", "3", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(v["totalSets"], "7");

    let (code, v) = json(&["census", "--universe", "12", "--nmax", "6", "--json", "--jobs", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["mismatches"], "0");
    assert_eq!(v["clean"], Value::Bool(true));

    let (code, v) = json(&["census", "--universe", "30", "--nmax", "8", "-e", "1,2", "--json"]);
    assert_eq!(code, 0);
    let full: Vec<&Value> = v["cells"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["n"] == "8" && c["maxDegree"] == "3")
        .collect();
    assert_eq!(full.len(), 2);
    assert!(full.iter().all(|c| c["divisible"] == c["total"] && c["total"] == "1"));

    let r = gcdiv(&["census", "--universe", "720720", "--nmax", "3"]);
    assert_eq!(r.code, 2);
}

#[test]
fn json_round_trips_byte_identically() {
    let cases: [&[&str]; 6] = [
        &["check", "1,2,3,12", "--json"],
        &["verify", "1,2,4,6,8,24", "-e", "2", "--json", "--dump-matrices"],
        &["witness", "1,2,3,5,7,420", "--json"],
        &["matrix", "1,2,3,4,6,12", "--json"],
        &["hasse", "1,2,3,6", "--json"],
        &["census", "--universe", "36", "--nmax", "5", "-e", "1,2", "--json"],
    ];
    for args in cases {
        let text = gcdiv(args).stdout;
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(no_numbers(&v), "{args:?} emitted a JSON number");
        assert_eq!(gcdiv_cli::canonical_json(&text).unwrap(), text, "{args:?}");
    }
}

#[test]
fn input_handling() {
    let r = gcdiv(&["check", "6,3,2,1,2"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("warning: input canonicalized to {1,2,3,6}"));

    let r = gcdiv(&["check", "30,42,70,105", "--close"]);
    assert!(r.stderr.contains("closure added: 1,2,3,5,6,7,10,14,15,21,35"), "{}", r.stderr);

    let dir = std::env::temp_dir().join(format!("gcdiv-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("set.txt");
    std::fs::write(&file, "1 2\n3\n12\n").unwrap();
    let (code, v) = json(&["check", file.to_str().unwrap(), "--json"]);
    assert_eq!(code, 3);
    assert_eq!(v["set"], serde_json::json!(["1", "2", "3", "12"]));
    std::fs::remove_dir_all(&dir).unwrap();

    assert_eq!(gcdiv(&["check", "1,2", "-e", "0"]).code, 2);
    assert_eq!(gcdiv(&["check", "0,1"]).code, 2);
    assert_eq!(gcdiv(&["check", "/no/such/file"]).code, 2);
    assert_eq!(gcdiv(&["check", "gen:nope:3"]).code, 2);
    assert_eq!(gcdiv(&["frobnicate"]).code, 2);
    assert_eq!(gcdiv(&["--help"]).code, 0);
}

#[test]
fn in_process_run_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = gcdiv_cli::run(["gcdiv", "check", "1,2,3,12", "--json"], &mut out, &mut err);
    assert_eq!(code, gcdiv_cli::EXIT_NOT_DIVISIBLE);
    assert_eq!(String::from_utf8(out).unwrap(), gcdiv(&["check", "1,2,3,12", "--json"]).stdout);
}
