use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_imm-orbits"))
}

fn run(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    if let Some(bytes) = stdin {
        input.write_all(bytes).unwrap();
    }
    drop(input);
    child.wait_with_output().unwrap()
}

fn scratch(name: &str, contents: &[u8]) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("imm-orbits-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn generated_loops_pipe_into_analysis() {
    let gen = run(&["gen", "--kind", "k_fold_circle", "--k", "3", "--m", "300"], None);
    assert!(gen.status.success());
    let iso = run(&["isotropy"], Some(&gen.stdout));
    assert!(iso.status.success());
    let v: serde_json::Value = serde_json::from_slice(&iso.stdout).unwrap();
    assert_eq!(v["order"], 3);

    let prim = run(&["primitive"], Some(&gen.stdout));
    let v: serde_json::Value = serde_json::from_slice(&prim.stdout).unwrap();
    assert_eq!(v["ambient_dim"], 2);
    assert_eq!(v["samples"].as_array().unwrap().len(), 100);
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let gen = run(&["gen", "--kind", "circle", "--m", "12"], None);
    let text = String::from_utf8(gen.stdout).unwrap();
    assert!(text.contains("8.6602540378443860e-1"), "{text}");
}

#[test]
fn equiv_exit_codes() {
    let circle = scratch("circle.json", &run(&["gen", "--kind", "circle", "--m", "200"], None).stdout);
    let shifted = scratch("shifted.json", &run(&["gen", "--kind", "circle", "--m", "200", "--phase", "0.4"], None).stdout);
    let ellipse = scratch("ellipse.json", &run(&["gen", "--kind", "ellipse", "--m", "200"], None).stdout);
    let (c, s, e) = (circle.to_str().unwrap(), shifted.to_str().unwrap(), ellipse.to_str().unwrap());

    let same = run(&["equiv", c, s], None);
    assert_eq!(same.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(v["status"], "equivalent");
    assert!(v["certificate"].is_null());

    let other = run(&["equiv", c, e], None);
    assert_eq!(other.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&other.stdout).unwrap();
    assert_eq!(v["status"], "distinct");
    assert_eq!(v["certificate"]["kind"], "ImageMismatch");
    assert!(v["reparam"].is_null());
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(run(&["gen", "--kind", "circle", "--frobnicate"], None).status.code(), Some(1));
    assert_eq!(run(&["isotropy"], Some(b"{\"ambient_dim\": 2}")).status.code(), Some(1));
    let bad = run(&["delta"], Some(br#"{"ambient_dim": 2, "samples": [[0, 0], [1, 0], [1, 1]]}"#));
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
    let small = run(&["validate"], Some(br#"{"ambient_dim": 2, "samples": [[0, 0], [1, 0], [1, 1]]}"#));
    assert_eq!(small.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&small.stdout).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
    // eps_image above eps_match violates the tolerance ordering
    let gen = run(&["gen", "--kind", "circle"], None);
    let out = run(&["delta", "--eps-image", "0.5", "--eps-match", "0.1"], Some(&gen.stdout));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_tables_have_headers() {
    let gen = run(&["gen", "--kind", "figure_eight", "--p", "3", "--q", "2"], None);
    let delta = String::from_utf8(run(&["delta", "--csv"], Some(&gen.stdout)).stdout).unwrap();
    assert!(delta.starts_with("cluster,delta,component,x0,x1,branches\n"));
    let partition = String::from_utf8(run(&["partition", "--csv"], Some(&gen.stdout)).stdout).unwrap();
    let rows: Vec<&str> = partition.lines().collect();
    assert_eq!(rows[0], "component,delta,interior,clusters,samples");
    let values: Vec<&str> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(values, ["5", "3", "2"]);
}

#[test]
fn chart_push_and_split_agree() {
    let base = scratch("base.json", &run(&["gen", "--kind", "fourier", "--seed", "2", "--m", "300"], None).stdout);
    let near = scratch(
        "near.json",
        &run(&["gen", "--kind", "fourier", "--seed", "2", "--m", "300", "--phase", "0.5"], None).stdout,
    );
    let (b, n) = (base.to_str().unwrap(), near.to_str().unwrap());
    let chart = run(&["chart", b, n], None);
    assert!(chart.status.success(), "{}", String::from_utf8_lossy(&chart.stderr));
    let section = scratch("section.json", &chart.stdout);
    let pushed = run(&["chart", "--base", b, "--push", section.to_str().unwrap()], None);
    assert!(!pushed.status.success(), "--base is not a flag");
    let pushed = run(&["chart", b, "--push", section.to_str().unwrap()], None);
    assert!(pushed.status.success(), "{}", String::from_utf8_lossy(&pushed.stderr));
    let split = run(&["split", b, n], None);
    let v: serde_json::Value = serde_json::from_slice(&split.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-3);
}
