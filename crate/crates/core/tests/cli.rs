use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geotrace"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geotrace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run_file(path: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = path.with_extension("json");
    let output = bin()
        .arg("run")
        .arg(path)
        .args(extra)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    (output, out)
}

#[test]
fn example_runs_clean_and_checks_clean() {
    let src = scratch(
        "example.gt",
        "globals { y = 3 @ u }\nt:(new x; x := c?; release x) | u:(y := y + 1; acquire x; d!(x + y); dispose x)\n",
    );
    let (out, json) = run_file(&src, &["--in", "c=8", "--msg-offset", "c=83"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let check = bin().arg("check").arg(&json).output().unwrap();
    assert_eq!(check.status.code(), Some(0));
    let past = bin().args(["query", "--past", "--event", "15"]).arg(&json).output().unwrap();
    assert_eq!(past.status.code(), Some(0));
    assert!(String::from_utf8(past.stdout).unwrap().lines().any(|l| l == "6"));
}

#[test]
fn exit_codes_by_class() {
    let zero = scratch("zero.gt", "t:(x := 1/0)");
    let (out, json) = run_file(&zero, &[]);
    assert_eq!(out.status.code(), Some(10));
    let located = bin().args(["locate", "--violation", "0"]).arg(&json).output().unwrap();
    assert_eq!(String::from_utf8(located.stdout).unwrap().trim(), "1:4 3..11 x := 1 / 0");

    let bad = scratch("bad.gt", "t:(x := )");
    assert_eq!(run_file(&bad, &[]).0.status.code(), Some(30));

    let looping = scratch("long.gt", "t:(skip; skip; skip)");
    assert_eq!(run_file(&looping, &["--max-steps", "1"]).0.status.code(), Some(40));

    let usage = bin().args(["run"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let missing = bin().args(["check", "/nonexistent/file.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn imported_seq_back_arrow_exits_20() {
    // t1 ; t2 with an arrow from t2's event up to t1's
    let doc = r#"{"version":1,"source":"t1:(skip) ; t2:(skip)","config":{"seed":"0","max_steps":10000,"channel_inputs":{},"message_offset":{}},"lifelines":[{"id":0,"name":"t1","class":"thread","column":0,"alloc_row":null,"dispose_row":null,"scope":"global","object":null},{"id":1,"name":"t2","class":"thread","column":1,"alloc_row":null,"dispose_row":null,"scope":"global","object":null}],"events":[{"id":0,"lifeline":0,"transaction":0,"kind":"skip_mark","thread":0},{"id":1,"lifeline":1,"transaction":1,"kind":"skip_mark","thread":1}],"transactions":[{"id":0,"row":1,"label":"skip","issuer":0,"events":[0],"spans":[{"start":4,"end":8}],"message":null},{"id":1,"row":2,"label":"skip","issuer":1,"events":[1],"spans":[{"start":16,"end":20}],"message":null}],"arrows":[{"id":0,"tail":1,"head":0,"orientation":"horizontal","value":null}],"slices":[{"id":0,"op":"seq","thread":null,"span":{"start":0,"end":21},"parent":null,"children":[1,2],"split":"horizontal","rows":{"start":1,"end":3},"columns":{"start":0,"end":2}},{"id":1,"op":null,"thread":"t1","span":{"start":0,"end":9},"parent":0,"children":[],"split":"none","rows":{"start":1,"end":2},"columns":{"start":0,"end":2}},{"id":2,"op":null,"thread":"t2","span":{"start":12,"end":21},"parent":0,"children":[],"split":"none","rows":{"start":2,"end":3},"columns":{"start":0,"end":2}}],"violations":[],"blocked":[]}"#;
    let path = scratch("back.json", doc);
    let out = bin().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(20));
    assert!(String::from_utf8(out.stderr).unwrap().contains("SEQ_BACK_ARROW"));

    let dangling = scratch("dangling.json", &doc.replace(r#""tail":1,"head":0"#, r#""tail":1,"head":999"#));
    let out = bin().arg("check").arg(&dangling).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dangling"));
}
