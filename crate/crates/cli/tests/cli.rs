use std::path::Path;
use std::process::{Command, Output};

use sagvic::Mat;
use sagvic_cli::encoder_file::decode_encoder;
use sagvic_cli::io::{encode_emb, load_embeddings, save_embeddings};
use serde_json::Value;

fn sagvic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagvic"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Exit code plus the single stderr line.
fn failure(o: &Output) -> (i32, String) {
    let e = stderr(o);
    assert_eq!(e.trim_end().lines().count(), 1, "stderr not one line: {e:?}");
    (o.status.code().unwrap(), e.trim_end().to_string())
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn blobs() -> Mat {
    Mat::from_fn(24, 3, |i, j| {
        ((i / 8) as f64) * 4.0 * f64::from(u8::from(j == i / 8)) + 0.1 * ((i * 7 + j * 3) % 5) as f64
    })
}

#[test]
fn eval_of_a_set_with_itself_gives_unit_lca_statistics() {
    let dir = tempfile::tempdir().unwrap();
    save_embeddings(&dir.path().join("a.emb"), &blobs()).unwrap();
    let o = sagvic(
        dir.path(),
        &["eval", "a.emb", "a.emb", "--out", "r.json", "--tree-a", "t.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("r.json"));
    for key in ["lca_pearson", "lca_spearman", "lca_kendall"] {
        assert_eq!(r[key].as_f64(), Some(1.0), "{key}");
    }
    let tree = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(tree.lines().next(), Some("left,right,height,size"));
    assert_eq!(tree.lines().count(), 24);
}

#[test]
fn eval_rejects_damaged_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = encode_emb(&blobs()).unwrap();
    std::fs::write(dir.path().join("short.emb"), &bytes[..bytes.len() - 8]).unwrap();
    save_embeddings(&dir.path().join("ok.emb"), &blobs()).unwrap();
    let (code, msg) = failure(&sagvic(dir.path(), &["eval", "short.emb", "ok.emb"]));
    assert_eq!(code, 2);
    assert!(
        msg.starts_with("error: format:") && msg.contains("payload length mismatch"),
        "{msg}"
    );

    write(dir.path(), "nan.csv", "1,2\nNaN,3\n");
    let (code, msg) = failure(&sagvic(dir.path(), &["eval", "nan.csv", "nan.csv"]));
    assert_eq!(code, 2);
    assert!(msg.starts_with("error: format:"), "{msg}");

    let (code, msg) = failure(&sagvic(dir.path(), &["eval", "missing.emb", "ok.emb"]));
    assert_eq!((code, msg.starts_with("error: io:")), (2, true), "{msg}");

    write(dir.path(), "zero.csv", "0,0\n1,2\n2,1\n");
    let (code, msg) = failure(&sagvic(
        dir.path(),
        &["eval", "zero.csv", "zero.csv", "--metric", "cosine"],
    ));
    assert_eq!(code, 3, "{msg}");
}

#[test]
fn spectral_separates_components() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.csv", "0,1,0,0\n1,0,0,0\n0,0,0,2\n0,0,2,0\n");
    let o = sagvic(dir.path(), &["spectral", "g.csv", "--dim", "1", "--out", "y.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let y = load_embeddings(&dir.path().join("y.csv")).unwrap();
    assert_eq!(y.shape(), (4, 1));
    assert!(y[(0, 0)] * y[(2, 0)] < 0.0);
    assert_eq!(y[(0, 0)], y[(1, 0)]);
    assert_eq!(y[(2, 0)], y[(3, 0)]);

    let again = sagvic(dir.path(), &["spectral", "g.csv", "--dim", "1", "--out", "y2.csv"]);
    assert!(again.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("y.csv")).unwrap(),
        std::fs::read(dir.path().join("y2.csv")).unwrap()
    );

    let (code, _) = failure(&sagvic(
        dir.path(),
        &["spectral", "g.csv", "--dim", "4", "--out", "y.csv"],
    ));
    assert_eq!(code, 1);
    write(dir.path(), "asym.csv", "0,1\n2,0\n");
    let (code, _) = failure(&sagvic(
        dir.path(),
        &["spectral", "asym.csv", "--dim", "1", "--out", "y.csv"],
    ));
    assert_eq!(code, 2);
}

#[test]
fn train_writes_network_and_history_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "train",
            "--variant",
            "sag",
            "--epochs",
            "15",
            "--seed",
            "3",
            "--out",
            out,
        ]
    };
    assert!(sagvic(dir.path(), &args("a.enc")).status.success());
    assert!(sagvic(dir.path(), &args("b.enc")).status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.enc"), read("b.enc"));
    assert_eq!(read("a.history.csv"), read("b.history.csv"));
    let hist = String::from_utf8(read("a.history.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("epoch,invariance,variance,covariance,total"));
    assert_eq!(hist.lines().count(), 16);
    let enc = decode_encoder(&read("a.enc")).unwrap();
    assert_eq!(enc.input_dim(), 16);

    let o = sagvic(
        dir.path(),
        &["train", "--variant", "vicreg", "--epochs", "0", "--out", "init.enc"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("init.history.csv"))
            .unwrap()
            .lines()
            .count(),
        1
    );

    let (code, msg) = failure(&sagvic(dir.path(), &["train", "--out", "x.enc"]));
    assert_eq!(code, 1);
    assert!(msg.contains("--variant"), "{msg}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "run.toml",
        "variant = \"vicreg\"\nseed = 3\nout = \"cfg.enc\"\n[train]\nepochs = 4\n",
    );
    let o = sagvic(dir.path(), &["train", "--config", "run.toml", "--epochs", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hist = std::fs::read_to_string(dir.path().join("cfg.history.csv")).unwrap();
    assert_eq!(hist.lines().count(), 7);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("variant=vicreg epochs=6"));

    write(dir.path(), "bad.toml", "[train]\nepoch = 4\n");
    let (code, msg) = failure(&sagvic(dir.path(), &["train", "--config", "bad.toml"]));
    assert_eq!(code, 2);
    assert!(msg.starts_with("error: format:"), "{msg}");
}

fn one_hot(dir: &Path) {
    // Two coarse classes of two fine classes each, five items per fine class.
    let x = Mat::from_fn(20, 6, |i, j| f64::from(u8::from(j == i / 10 || j == 2 + i / 5)));
    save_embeddings(&dir.join("x.emb"), &x).unwrap();
    let mut csv = String::from("item_id,coarse,fine\n");
    for i in 0..20 {
        csv += &format!("{i},c{},f{}\n", i / 10, i / 5);
    }
    write(dir, "h.csv", &csv);
}

#[test]
fn randindex_recovers_one_hot_hierarchy() {
    let dir = tempfile::tempdir().unwrap();
    one_hot(dir.path());
    let o = sagvic(
        dir.path(),
        &[
            "randindex",
            "x.emb",
            "h.csv",
            "--graph-neighbors",
            "19",
            "--out",
            "r.json",
            "--sweep-out",
            "s.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("r.json"));
    let levels = r["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    for l in levels {
        assert_eq!(l["rand_index"].as_f64(), Some(1.0));
    }
    let sweep = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("n_clusters,rand_index"));
    assert_eq!(sweep.lines().count(), 20);

    write(dir.path(), "bad.csv", "item_id,coarse,fine\n0,c0,f0\n1,c1,f0\n");
    let (code, _) = failure(&sagvic(dir.path(), &["randindex", "x.emb", "bad.csv"]));
    assert_eq!(code, 2);
}

#[test]
fn demo_unseen_writes_scatters_and_per_seed_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "demo-unseen",
            "--seeds",
            "3",
            "--epochs",
            "20",
            "--test-points",
            "6",
            "--seed",
            "5",
            "--out-dir",
            out,
        ]
    };
    let o = sagvic(dir.path(), &args("one"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(sagvic(dir.path(), &args("two")).status.success());
    for name in [
        "scatter_vicreg_train.csv",
        "scatter_vicreg_test.csv",
        "scatter_sag_train.csv",
        "scatter_sag_test.csv",
        "report.json",
    ] {
        let a = std::fs::read(dir.path().join("one").join(name)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("two").join(name)).unwrap(), "{name}");
    }
    let scatter = std::fs::read_to_string(dir.path().join("one/scatter_sag_test.csv")).unwrap();
    assert_eq!(scatter.lines().next(), Some("x,y,cluster,seen"));
    let r = json(&dir.path().join("one/report.json"));
    assert_eq!(r["seeds"], serde_json::json!([5, 6, 7]));
    assert_eq!(r["runs"].as_array().unwrap().len(), 3);
    assert_eq!(r["summary"].as_array().unwrap().len(), 2);

    let (code, _) = failure(&sagvic(dir.path(), &["demo-unseen", "--train-clusters", "9"]));
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_are_single_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["eval"],
        &["spectral", "g.csv", "--dim", "x"],
        &[],
    ] {
        let (code, msg) = failure(&sagvic(dir.path(), args));
        assert_eq!(code, 1, "{args:?}");
        assert!(msg.starts_with("error: usage:"), "{msg}");
    }
    assert!(sagvic(dir.path(), &["--help"]).status.success());
}
