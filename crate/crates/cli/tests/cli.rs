use std::fs;
use std::path::Path;
use std::process::Command;

use mcnn_cli::{cmd_eval, cmd_fd, cmd_train, CliError, EvalSource, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcnn"))
}

fn tiny(out: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    for kv in [
        "epochs=5",
        "hidden_layers=1",
        "hidden_width=4",
        "points_per_law=20",
        "log_every=1",
    ] {
        c.apply_override(kv).unwrap();
    }
    c.out_dir = out.to_path_buf();
    c
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "seed = 3\nwidth = 9\n").unwrap();
    let status = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_law_is_rejected() {
    let status = bin()
        .args(["train", "--mode", "pinn", "--law", "4"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let err = RunConfig::parse_str("law = 7").unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn train_writes_checkpoint_history_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args([
            "train", "--mode", "pinn", "--law", "3", "--seed", "9", "--out",
        ])
        .arg(&out)
        .args([
            "--set",
            "epochs=3",
            "--set",
            "hidden_layers=1",
            "--set",
            "hidden_width=3",
            "--set",
            "points_per_law=10",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let echo = RunConfig::from_file(&out.join("pinn-law3_config.txt")).unwrap();
    assert_eq!(echo.seed, 9);
    assert_eq!(echo.epochs, Some(3));
    let ck = mcnn::training::load_checkpoint(&out.join("pinn-law3.ckpt")).unwrap();
    assert_eq!(ck.mode.to_string(), "pinn-law3");
    let hist = fs::read_to_string(out.join("pinn-law3_history.csv")).unwrap();
    assert!(hist.starts_with("epoch,loss\n0,"));
    assert!(hist.trim_end().lines().last().unwrap().starts_with("3,"));
}

#[test]
fn training_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_train(&tiny(a.path())).unwrap();
    cmd_train(&tiny(b.path())).unwrap();
    for f in ["mcnn.ckpt", "mcnn_history.csv", "mcnn_config.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn reference_against_itself_scores_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().join("fd"),
        ..RunConfig::default()
    };
    let files = cmd_fd(&cfg).unwrap();
    assert_eq!(files.len(), 3);

    let mut again = cfg.clone();
    again.out_dir = dir.path().join("fd2");
    cmd_fd(&again).unwrap();
    for f in ["fd_law1.csv", "fd_law2.csv", "fd_law3.csv"] {
        assert_eq!(
            fs::read(cfg.out_dir.join(f)).unwrap(),
            fs::read(again.out_dir.join(f)).unwrap()
        );
    }

    let mut ev = cfg.clone();
    ev.out_dir = dir.path().join("eval");
    let rows = cmd_eval(&ev, &EvalSource::Grids(cfg.out_dir.clone()), &cfg.out_dir).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.relative_error_percent == 0.0));
    let metrics = fs::read_to_string(ev.out_dir.join("reference_metrics.csv")).unwrap();
    assert!(metrics.starts_with("law,method,relative_error_percent\n1,reference,0.0"));
    assert!(ev
        .out_dir
        .join("reference_settlement_law2_t0.25.csv")
        .is_file());

    // a trained (tiny) network evaluated through its checkpoint
    let t = cmd_train(&tiny(&dir.path().join("train"))).unwrap();
    let mut ev = cfg.clone();
    ev.out_dir = dir.path().join("eval_net");
    let rows = cmd_eval(&ev, &EvalSource::Checkpoint(t.checkpoint), &cfg.out_dir).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.method == "mcnn" && r.relative_error_percent.is_finite()));
    let field = fs::read_to_string(ev.out_dir.join("mcnn_field_law1.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 100 * 100);
}

#[test]
fn missing_reference_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().join("eval"),
        ..RunConfig::default()
    };
    let err = cmd_eval(&cfg, &EvalSource::Grids(dir.path().into()), dir.path()).unwrap_err();
    assert!(
        matches!(err, CliError::Input(ref m) if m.contains("fd_law1.csv")),
        "{err}"
    );
    assert_eq!(err.exit_code(), 1);

    let status = bin()
        .args(["eval", "--checkpoint", "nope.ckpt", "--reference"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn unstable_step_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["fd", "--set", "fd_dt=1e-3", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
