use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use imverde::graph::karate_fixture;
use imverde::model::{format_embeddings, init_params, Hyper};
use imverde::rng::Streams;

const KARATE: &str = r#"
seed = 11

[dataset]
kind = "karate"

[split]
minority_class = 1
n_min = 2
n_maj = 12
n_test = 20
"#;

const CLIQUES: &str = r#"
seed = 4

[dataset]
kind = "synth"
n_per_class = [10, 50]
p_in = 1.0
p_out = 0.0

[split]
minority_class = 0
n_min = 3
n_maj = 15
n_test = 30

[model]
dim = 8
hidden = 8
iters_unsup = 20
iters_sup = 100
batch_size = 64
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn imverde(args: &[&str], config: &Path, out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_imverde"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &std::process::Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn walk_stats_writes_deterministic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.toml", KARATE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&imverde(&["walk-stats"], &cfg, &a)), 0);
    assert_eq!(
        code(&imverde(&["walk-stats", "--deterministic"], &cfg, &b)),
        0
    );
    let purity = fs::read_to_string(a.join("purity.csv")).unwrap();
    assert_eq!(purity.lines().count(), 1 + 3 * 2);
    for f in ["purity.csv", "trace.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 19);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("walk-stats_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["artifacts"]["purity.csv"].is_string());
}

#[test]
fn short_trace_rejected_before_walking() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{KARATE}\n[walk_stats]\ntrace_length = 150\ntrace_interval = 100\n");
    let cfg = write_config(dir.path(), "k.toml", &text);
    let out = dir.path().join("o");
    let o = imverde(&["walk-stats"], &cfg, &out);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace_length"));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let unknown = write_config(dir.path(), "u.toml", &format!("{KARATE}\nwalkers = 3\n"));
    assert_eq!(code(&imverde(&["train"], &unknown, &out)), 2);
    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&imverde(&["train"], &missing, &out)), 2);
    let no_split = write_config(dir.path(), "n.toml", "[dataset]\nkind = \"karate\"\n");
    assert_eq!(code(&imverde(&["train"], &no_split, &out)), 2);
}

#[test]
fn zero_iterations_export_initial_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{KARATE}\n[model]\niters_unsup = 0\niters_sup = 0\n");
    let cfg = write_config(dir.path(), "k.toml", &text);
    let out = dir.path().join("o");
    assert_eq!(code(&imverde(&["train", "--seed", "5"], &cfg, &out)), 0);
    let g = karate_fixture();
    let seed = Streams::new(5).child("train", 0).root();
    let init = init_params(g.n(), g.n(), 2, &Hyper::default(), seed).unwrap();
    assert_eq!(
        fs::read_to_string(out.join("embeddings.txt")).unwrap(),
        format_embeddings(&init)
    );
    assert_eq!(
        fs::read_to_string(out.join("train_report.jsonl")).unwrap(),
        ""
    );
}

#[test]
fn karate_train_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{KARATE}\n[model]\niters_unsup = 100\niters_sup = 50\n");
    let cfg = write_config(dir.path(), "k.toml", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&imverde(&["train"], &cfg, &a)), 0);
    assert_eq!(code(&imverde(&["train", "--deterministic"], &cfg, &b)), 0);
    let emb = fs::read_to_string(a.join("embeddings.txt")).unwrap();
    assert_eq!(emb.lines().count(), 34);
    assert!(emb.lines().all(|l| l.split(' ').count() == 51));
    for f in ["embeddings.txt", "model.json", "train_report.jsonl"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let report = fs::read_to_string(a.join("train_report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 150);
    let first: serde_json::Value = serde_json::from_str(report.lines().next().unwrap()).unwrap();
    assert_eq!(first["phase"], "unsupervised");
}

#[test]
fn divergence_exits_4_and_keeps_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{KARATE}\n[model]\nlr_unsup = 1e200\niters_unsup = 50\niters_sup = 0\n");
    let cfg = write_config(dir.path(), "k.toml", &text);
    let out = dir.path().join("o");
    let o = imverde(&["train"], &cfg, &out);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("train_report.jsonl").exists());
    assert!(!out.join("embeddings.txt").exists());
}

#[test]
fn eval_needs_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CLIQUES);
    let o = imverde(&["eval"], &cfg, &dir.path().join("empty"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.json"));
}

#[test]
fn separable_cliques_score_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CLIQUES);
    let out = dir.path().join("o");
    assert_eq!(code(&imverde(&["train"], &cfg, &out)), 0);
    let o = imverde(&["eval"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["variant"], "vdrw-imverde");
    assert_eq!(rows[1]["variant"], "constant-rw-baseline");
    for r in &rows {
        assert_eq!(r["dataset"], "synth");
        assert_eq!(r["seed"], 4);
        assert_eq!(r["auc"], 1.0);
        assert_eq!(r["ap"], 1.0);
    }
    let roc = fs::read_to_string(out.join("roc_vdrw-imverde.csv")).unwrap();
    assert!(roc.starts_with("fpr,tpr,threshold\n"));
}

#[test]
fn sweep_grid_rows_and_single_point_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CLIQUES}\n[sweep]\ngrid = [[0.7, 0.2]]\nseeds = 1\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("o");
    assert_eq!(code(&imverde(&["sweep"], &cfg, &out)), 0);
    assert_eq!(code(&imverde(&["train"], &cfg, &out)), 0);
    assert_eq!(code(&imverde(&["eval"], &cfg, &out)), 0);
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let row: Vec<&str> = sweep.lines().nth(1).unwrap().split(',').collect();
    let metrics: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(row[3], "vdrw-imverde");
    assert_eq!(
        row[5].parse::<f64>().unwrap(),
        metrics[0]["auc"].as_f64().unwrap()
    );
    assert_eq!(
        row[6].parse::<f64>().unwrap(),
        metrics[0]["ap"].as_f64().unwrap()
    );

    let text =
        format!("{CLIQUES}\n[sweep]\ngrid = [[0.3, 0.2], [0.5, 0.2], [0.9, 0.2]]\nseeds = 1\n");
    let cfg = write_config(dir.path(), "g.toml", &text);
    let out = dir.path().join("g");
    assert_eq!(code(&imverde(&["sweep"], &cfg, &out)), 0);
    assert_eq!(
        fs::read_to_string(out.join("sweep.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 3
    );
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{CLIQUES}\n[sweep]\nseeds = 1\n"),
    );
    assert_eq!(code(&imverde(&["sweep"], &cfg, &dir.path().join("o"))), 2);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            imverde::cli::ExperimentConfig::load(&p)
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
