use std::path::Path;
use std::process::{Command, Output};

fn hyperlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlab")).args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

#[test]
fn transfer_exit_codes() {
    let ok = hyperlab(&["--samples", "500", "transfer", &corpus("identities.txt")]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = hyperlab(&["--samples", "500", "transfer", &corpus("false_identity.txt")]);
    assert_eq!(bad.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nothing here\n").unwrap();
    let out = hyperlab(&["--format", "json", "transfer", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let last = String::from_utf8(out.stdout).unwrap().lines().last().unwrap().to_string();
    assert!(last.contains(r#""formulas":0"#), "{last}");

    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, "oops : x + = y\n").unwrap();
    let out = hyperlab(&["transfer", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn output_does_not_depend_on_workers() {
    let run = |w: &str| {
        let out = hyperlab(&["--format", "json", "--workers", w, "--samples", "300", "--seed", "5", "transfer",
            &corpus("identities.txt")]);
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
    let search = |w: &str| hyperlab(&["--workers", w, "--budget", "50000", "search", "mul-assoc"]).stdout;
    assert_eq!(search("1"), search("4"));
}

#[test]
fn out_flag_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.jsonl");
    let out = hyperlab(&["--format", "json", "--out", path.to_str().unwrap(), "net"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains(r#""size":32"#));

    let neg = hyperlab(&["ack", "decode", "-1"]);
    assert_eq!(neg.status.code(), Some(2));
    let bad = hyperlab(&["--smallness", "0", "net"]);
    assert_eq!(bad.status.code(), Some(2));
    let fp = hyperlab(&["--fp", "8,15,-14", "fp"]);
    assert_eq!(fp.status.code(), Some(2));
}

#[test]
fn tarski_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("x.txt");
    std::fs::write(&s, "{}\n{{}}\n").unwrap();
    let out = hyperlab(&["--format", "json", "tarski", "--structure", s.to_str().unwrap(), "--formula",
        "exists v. v in {{}}"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(r#""value":true"#) && text.contains("[7, 9, 1, 9, 12]"), "{text}");
    let out = hyperlab(&["--format", "json", "tarski", "--closure", "--universe", "16", "--maxlen", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().contains(r#""size":4"#), "{text}");
}
