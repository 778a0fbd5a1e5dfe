use paredlab::ribbontree::{PointedMetricTree, RibbonTree};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paredlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("paredlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&p);
    fs::create_dir_all(&p).unwrap();
    p
}

#[test]
fn atlas_writes_graphs_poset_and_manifest() {
    let d = tmp("atlas");
    let o = run(&d, &["atlas", "--n", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(d.join(format!("graph_{i}.json")).exists());
    }
    assert!(!d.join("graph_3.json").exists());
    let dot = fs::read_to_string(d.join("poset.dot")).unwrap();
    assert_eq!(dot.matches("->").count(), 2);
    let rep = run(&d, &["report", "--dir", d.to_str().unwrap()]);
    assert!(stdout(&rep).contains("chain: C4 < C4+chord < K4"), "{}", stdout(&rep));

    // verdicts from the written files
    let v = run(&d.join("v"), &["verdict", "--graph", d.join("graph_2.json").to_str().unwrap()]);
    assert_eq!(stdout(&v).trim(), "Bounded");
    let v = run(&d.join("v"), &["verdict", "--graph", d.join("graph_0.json").to_str().unwrap()]);
    assert!(stdout(&v).starts_with("Unbounded"));
    assert!(d.join("v/witness.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tmp("rerun-a");
    let b = tmp("rerun-b");
    for d in [&a, &b] {
        assert!(run(d, &["atlas", "--n", "4"]).status.success());
    }
    for name in ["graph_0.json", "graph_1.json", "graph_2.json", "poset.dot", "atlas.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let strip = |p: &Path| fs::read_to_string(p.join("manifest.json")).unwrap().replace(p.to_str().unwrap(), "OUT");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn lamination_emits_leaves_and_svg() {
    let d = tmp("lam");
    let svg = d.join("out.svg");
    let o = run(&d, &["lamination", "--d", "3", "--gens", "1/8:5/8", "--depth", "4", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("7/24 11/24 (depth 1)") && s.contains("19/24 23/24 (depth 1)"));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("r=\"256"));
    let m = fs::read_to_string(d.join("manifest.json")).unwrap();
    assert!(m.contains("out.svg") && m.contains("sha256"));
}

#[test]
fn mating_report_of_the_disconnected_fixture() {
    let d = tmp("mating");
    assert!(run(&d, &["mating-report", "--fixture", "nsb"]).status.success());
    let rep = run(&d, &["report", "--dir", d.to_str().unwrap()]);
    assert!(stdout(&rep).contains("no common arrow structure"));
}

#[test]
fn errors_carry_exit_codes_and_records() {
    let d = tmp("errors");
    let o = run(&d, &["report", "--dir", d.join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"error\":\"MissingArtifact\""));
    let o = run(&d, &["lamination", "--d", "3", "--gens", "1/8:5/8,0:1/2", "--depth", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotSimple"));
    let o = run(&d, &["atlas", "--n", "9"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn degeneration_round_trip_through_files() {
    let d = tmp("degen");
    let t = PointedMetricTree::new(RibbonTree::new(vec![vec![1, 2, 3], vec![0, 4, 5], vec![0], vec![0], vec![1], vec![1]], 2, None).unwrap(), 0).unwrap();
    let tree = d.join("tree_in.json");
    fs::write(&tree, serde_json::to_string(&t.to_json()).unwrap()).unwrap();
    let o = run(&d, &["degen", "realize", "--tree", tree.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verify passed: true"));
    let rep = stdout(&run(&d, &["report", "--dir", d.to_str().unwrap()]));
    assert!(rep.contains("M") && rep.contains("K'"));

    let fam = d.join("family.json");
    let e = d.join("extract");
    assert!(run(&e, &["degen", "extract", "--family", fam.to_str().unwrap()]).status.success());
    let back = PointedMetricTree::from_json(&serde_json::from_str(&fs::read_to_string(e.join("tree.json")).unwrap()).unwrap()).unwrap();
    assert!(back.isomorphic(&t));

    let v = run(&d.join("verify"), &["degen", "verify", "--tree", tree.to_str().unwrap(), "--family", fam.to_str().unwrap()]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
    let other = PointedMetricTree::new(RibbonTree::star(4), 0).unwrap();
    let bad = d.join("star.json");
    fs::write(&bad, serde_json::to_string(&other.to_json()).unwrap()).unwrap();
    let v = run(&d.join("verify2"), &["degen", "verify", "--tree", bad.to_str().unwrap(), "--family", fam.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(3));
}

#[test]
fn blaschke_analyze_and_rotation_trace() {
    let d = tmp("mono");
    let o = run(&d, &["blaschke", "analyze", "--zeros", "0,0.5", "--k", "3"]);
    assert!(o.status.success());
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(a["multipliers"].as_array().unwrap().len(), 3);
    assert_eq!(a["pared"], serde_json::json!(true));

    let o = run(&d, &["mono", "trace", "--rotation-loop", "2"]);
    assert!(o.status.success());
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("trace.json")).unwrap()).unwrap();
    assert_eq!(t["permutation"], serde_json::json!([2, 0, 1]));
    assert_eq!(t["braid"], serde_json::json!([2, 1]));
}
