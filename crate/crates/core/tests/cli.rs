use std::path::Path;
use std::process::{Command, Output};

use treelike::report::read_report;
use treelike::Mode;

fn treelike(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treelike")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = treelike(&["synth", "tree", "--n", "12", "--seed", "3", "--out", "tree.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = treelike(
        &["analyze", "--input", "tree.csv", "--distance-matrix", "--exact", "--out", "r.json"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_report(&p.join("r.json")).unwrap();
    let delta = r.delta.unwrap();
    assert_eq!(delta.mode, Mode::Exact);
    assert_eq!(delta.seed, None);
    assert!(delta.delta_max <= 1e-9);
    assert_eq!(r.ultra.unwrap().total_triples, 220);
    assert_eq!(r.nj.unwrap().n, 12);
}

#[test]
fn embeddings_with_pca_and_poincare() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = treelike(&["synth", "sphere", "--n", "30", "--dim", "6", "--out", "s.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = treelike(
        &[
            "analyze", "--input", "s.csv", "--metric", "poincare", "--pca", "0.99", "--analyses",
            "delta,nj", "--samples", "500", "--formula", "slack",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let r = treelike::report::GeometryReport::from_json(&text).unwrap();
    assert!(r.preprocessing.pca.enabled);
    assert!(r.preprocessing.rescale.enabled);
    assert!(r.ultra.is_none());
    assert!(!r.notes.is_empty());
    assert_eq!(r.delta.unwrap().samples_evaluated, 500);
}

#[test]
fn cluster_command() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut csv = String::new();
    for i in 0..20 {
        let off = if i < 10 { 0.0 } else { 50.0 };
        csv.push_str(&format!("{},{}\n", off + (i % 3) as f64 * 0.1, (i % 4) as f64 * 0.1));
    }
    std::fs::write(p.join("b.csv"), csv).unwrap();
    let o = treelike(&["cluster", "--input", "b.csv", "--k", "2", "--out", "c.json"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = read_report(&p.join("c.json")).unwrap().cluster.unwrap().kmeans;
    assert!(c.silhouette > 0.9);
    assert_ne!(c.assignments[0], c.assignments[19]);
}

#[test]
fn exit_codes_by_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("bad.csv"), "0,1\n1,x\n").unwrap();
    let o = treelike(&["analyze", "--input", "bad.csv"], p);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[parse]"));

    std::fs::write(p.join("asym.csv"), "0,1,2\n1.5,0,1\n2,1,0\n").unwrap();
    let o = treelike(&["analyze", "--input", "asym.csv", "--distance-matrix"], p);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = treelike(
        &["analyze", "--input", "asym.csv", "--distance-matrix", "--force", "--analyses", "nj"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));

    std::fs::write(p.join("far.csv"), "0,0\n2,0\n").unwrap();
    let o = treelike(&["analyze", "--input", "far.csv", "--metric", "poincare", "--ball-norm", "1.5"], p);
    assert_ne!(o.status.code(), Some(0));

    let o = treelike(&["analyze", "--input", "missing.csv"], p);
    assert_eq!(o.status.code(), Some(1));
}
