use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_advicebench"));
    c.env_remove("ADVICEBENCH_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn runs_the_mirror_transducer() {
    let o = run(&["run", "mirror2wft", "(ab#baa#)^ω", "-n", "14"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ba#aab#ba#aab#\n");
}

#[test]
fn compares_pi_with_itself() {
    let o = run(&["compare", "pi", "pi", "-n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Equal"));
    let o = run(&["compare", "pi", "pi2", "-n", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "Diverges at 1: 0 vs 1\n");
}

#[test]
fn compiled_sst_reads_from_stdin() {
    let doc = run(&["convert", "sst2wftb", "mirror_sst"]);
    assert_eq!(doc.status.code(), Some(0));
    let o = run_with_stdin(&["run", "-", "(ab#)^ω", "-n", "9"], &doc.stdout);
    assert_eq!(stdout(&o), "ba#ba#ba#\n");
}

#[test]
fn converted_machines_reload_and_agree() {
    let cases: &[(&str, &str, &[&str], &str)] = &[
        ("sst2wftb", "mirror_sst", &[], "b#(ab#baa#)^ω"),
        ("sst2wftb", "interleaver_sst", &[], "(abba#)^ω"),
        ("normalize-pi", "bounce", &[], "pi"),
        ("normalize-pi", "stutter", &[], "pi"),
        ("oneway-pi", "copier", &[], "pi"),
        ("oneway-pi", "back_visit", &[], "pi"),
        (
            "remove-endmarker",
            "mirror2wft",
            &["--word", "(ab#baa#)^ω"],
            "(ab#baa#)^ω",
        ),
        (
            "remove-endmarker",
            "endmarker_touch",
            &["--word", "b(ab)^ω"],
            "b(ab)^ω",
        ),
    ];
    for (i, (construction, machine, extra, word)) in cases.iter().enumerate() {
        let mut args = vec!["convert", construction, machine];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{construction} {machine}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let path = temp_file(&format!("converted-{i}.json"), &stdout(&o));
        let converted = format!("{}@{word}", path.display());
        let original = format!("{machine}@{word}");
        let o = run(&["compare", &original, &converted, "-n", "300"]);
        assert_eq!(
            stdout(&o),
            "Equal on 300 letters\n",
            "{construction} {machine}"
        );

        // a second conversion of the reloaded document is byte-identical
        if *construction == "sst2wftb" {
            let again = run(&["run", path.to_str().unwrap(), word, "-n", "50"]);
            let first = run(&["run", machine, word, "-n", "50"]);
            assert_eq!(again.stdout, first.stdout);
        }
    }
}

#[test]
fn general_sst_is_simplified_for_a_lasso() {
    // output x·out in the recurrent state: out collects the blocks, x the pending letters
    let doc = temp_file(
        "general.json",
        r##"{"machines": {"g": {"type": "sst", "registers": ["x", "out"], "states": 2,
            "transitions": [
              {"from": 0, "in": "a", "to": 1, "update": {"x": "a x"}},
              {"from": 1, "in": "a", "to": 1, "update": {"x": "a x"}},
              {"from": 1, "in": "b", "to": 1, "update": {"out": "out b"}},
              {"from": 1, "in": "#", "to": 1, "update": {"x": "", "out": "out x #"}}],
            "output_function": [{"P": [1], "value": "out"}]}}}"##,
    );
    let d = doc.to_str().unwrap();
    let o = run(&["--doc", d, "convert", "simplify", "g", "--word", "a(ab#)^ω"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let simple = temp_file("simplified.json", &stdout(&o));
    let o = run(&[
        "--doc",
        d,
        "compare",
        "g@a(ab#)^ω",
        &format!("{}@a(ab#)^ω", simple.display()),
        "-n",
        "300",
    ]);
    assert_eq!(stdout(&o), "Equal on 300 letters\n");
    let o = run(&["--doc", d, "run", "g", "a(ab#)^ω", "-n", "6"]);
    assert_eq!(stdout(&o), "baa#ba\n");
}

#[test]
fn lookbehind_elimination_from_the_command_line() {
    let doc = run(&["convert", "sst2wftb", "mirror_sst"]);
    let compiled = temp_file("compiled-mirror.json", &stdout(&doc));
    let o = run(&[
        "convert",
        "unlookbehind",
        compiled.to_str().unwrap(),
        "--word",
        "(ab#baa#)^ω",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let plain = temp_file("plain-mirror.json", &stdout(&o));
    let o = run(&[
        "compare",
        &format!("{}@(ab#baa#)^ω", plain.display()),
        "mirror2wft@(ab#baa#)^ω",
        "-n",
        "300",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn identical_invocations_print_identical_output() {
    for args in [
        &["check", "extraction"][..],
        &["convert", "oneway-pi", "back_visit"],
        &["words", "list"],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn documents_provide_names() {
    let path = temp_file(
        "one-word.json",
        r#"{"words": {"w": {"kind": "lasso", "u": "a", "v": "bc"}}}"#,
    );
    let o = run(&["--doc", path.to_str().unwrap(), "words", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).lines().next().unwrap().starts_with("word     w"),
        "{}",
        stdout(&o)
    );
    let o = run(&[
        "--doc",
        path.to_str().unwrap(),
        "words",
        "show",
        "w",
        "-n",
        "5",
    ]);
    assert_eq!(stdout(&o), "abcbc\n");
}

#[test]
fn document_errors_exit_with_two() {
    let copying = temp_file(
        "copying.json",
        r#"{"machines": {"bad": {"type": "sst", "registers": ["x", "y"], "states": 1,
            "transitions": [{"from": 0, "in": "a", "to": 0, "update": {"x": "x", "y": "x"}}]}}}"#,
    );
    let o = run(&["--doc", copying.to_str().unwrap(), "words", "list"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("copyless"));

    let missing = temp_file("missing.json", r#"{"machines": {"m": "nowhere"}}"#);
    let o = run(&["--doc", missing.to_str().unwrap(), "words", "list"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unresolved reference \"nowhere\""));

    let broken = temp_file("broken.json", "{\n  \"words\": [\n");
    let o = run(&["--doc", broken.to_str().unwrap(), "words", "list"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["run", "mirror2wft"]).status.code(), Some(2));
    assert_eq!(run(&["run", "nothing", "pi"]).status.code(), Some(2));
    assert_eq!(run(&["check", "nothing"]).status.code(), Some(2));
    assert_eq!(
        run(&["convert", "sst2wftb", "mirror2wft"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["convert", "remove-endmarker", "mirror2wft"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budget_comes_from_the_environment() {
    let args = ["run", "mirror2wft", "(aaaaaaaaaaaaaaaa#)^ω", "-n", "3"];
    let o = bin()
        .args(args)
        .env("ADVICEBENCH_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
    let o = bin()
        .args(args)
        .env("ADVICEBENCH_BUDGET", "10")
        .args(["--budget", "1000"])
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "aaa\n");
}

#[test]
fn json_reports() {
    let o = run(&["--json", "compare", "pi", "pi2", "-n", "10"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "Diverges");
    assert_eq!(v["index"], 1);
    let o = run(&["--json", "check", "endmarker"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["name"], "endmarker");
    assert_eq!(v[0]["items"].as_array().unwrap().len(), 3);
    let o = run(&["--json", "analyze", "complexity", "(ab)^ω", "-k", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["counts"], serde_json::json!([2, 2, 2]));
    let o = run(&["--json", "run", "endmarker_bouncer", "(a)^ω", "-n", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["output"], "aaaa");
}

#[test]
fn padding_table() {
    let o = run(&["analyze", "padding", "F b", "a(ab)^ω", "--to", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    // from a·(ab)^ω: suffix 0 = aab..., suffix 1 = ab..., suffix 2 = bab...
    assert_eq!(rows, ["0 true 3", "1 true 2", "2 true 1"]);
}
