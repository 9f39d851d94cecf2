use std::process::{Command, Output};

fn certroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certroute")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fixtures_pass() {
    for name in ["stretch7", "handshake5"] {
        let o = certroute(&["fixture", name]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).ends_with(&format!("{name} pass\n")));
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(certroute(&["fixture", "nope"]).status.code(), Some(2));
    assert_eq!(certroute(&["build", "xx"]).status.code(), Some(2));
    assert_eq!(certroute(&["gen", "--kind", "cube"]).status.code(), Some(2));
    assert_eq!(certroute(&["verify", "--bundle", "/nonexistent"]).status.code(), Some(2));
}

#[test]
fn gen_build_verify_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let bundle = dir.path().join("b.txt");
    let g = certroute(&["gen", "--n", "30", "--seed", "4"]);
    std::fs::write(&graph, &g.stdout).unwrap();
    let graph = graph.to_str().unwrap();
    for scheme in ["tz", "ni", "hk"] {
        let b = certroute(&["build", scheme, "--graph", graph, "--seed", "4"]);
        assert_eq!(b.status.code(), Some(0));
        std::fs::write(&bundle, &b.stdout).unwrap();
        let v = certroute(&["verify", "--bundle", bundle.to_str().unwrap(), "--graph", graph]);
        assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
        assert_eq!(stdout(&v), "accepted 30/30\n");

        let tampered = String::from_utf8(b.stdout).unwrap().replacen("cluster ", "cluster 9999", 1);
        std::fs::write(&bundle, tampered).unwrap();
        let v = certroute(&["verify", "--bundle", bundle.to_str().unwrap(), "--graph", graph]);
        assert_eq!(v.status.code(), Some(1), "{scheme}: {}", stdout(&v));
    }
}

#[test]
fn route_stretch_attack_and_report() {
    let r = certroute(&["route", "0", "7", "--scheme", "hk", "--n", "20", "--k", "3"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("outcome delivered"));
    assert_eq!(certroute(&["stretch", "tz", "--n", "32"]).status.code(), Some(0));
    let a = certroute(&["attack", "tz", "--n", "24", "--mutations", "20"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).starts_with("campaign "));
    let rec = certroute(&["report", "ni", "--n", "24", "--mutations", "8", "--trials", "4", "--format", "record"]);
    assert_eq!(rec.status.code(), Some(0));
    let parsed = certroute::ExperimentReport::from_record(&stdout(&rec)).unwrap();
    assert_eq!(parsed.scheme, "ni");
    assert!(parsed.dir_trials.is_some());
}
