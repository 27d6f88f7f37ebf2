use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn histenc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histenc")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn repo_file(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).display().to_string()
}

#[test]
fn mask_info_reports_widths() {
    let map = repo_file("configs/humanoid-v4.segments.json");
    for (mask, dim) in [("", "348"), ("v", "247"), ("vm", "117"), ("mf", "123")] {
        let text = stdout(&histenc(&["mask-info", "--env", "Humanoid-v4", "--segment-map", &map, "--mask", mask]));
        assert!(text.contains("full dim: 348"), "{text}");
        assert!(text.contains(&format!("masked dim: {dim}")), "{text}");
    }
    let text = stdout(&histenc(&["mask-info", "--env", "pendulum", "--mask", "v"]));
    assert!(text.contains("masked dim: 5"), "{text}");
    assert!(!histenc(&["mask-info", "--env", "pendulum", "--mask", "p"]).status.success());
}

fn write_config(dir: &Path) -> PathBuf {
    let config = serde_json::json!({
        "env": {"id": "point-mass", "mask": ["velocity"]},
        "encoder": {"variant": "recurrent", "window_length": 3, "embed_width": 4,
                    "combiner_hidden_widths": [], "context_width": 4},
        "td3": {"batch_size": 8, "warmup_steps": 40, "actor_hidden": [8], "critic_hidden": [8]},
        "total_steps": 120,
        "eval_interval": 60,
        "eval_episodes": 2,
        "seeds": [0, 1],
        "output_dir": dir.join("run"),
    });
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    path
}

#[test]
fn train_eval_mass_eval_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let config = config.to_str().unwrap();
    let text = stdout(&histenc(&["train", "--config", config]));
    assert!(text.contains("max / last-25% mean"), "{text}");
    let run = tmp.path().join("run");
    assert!(run.join("summary.json").exists() && run.join("summary.csv").exists());

    let refused = histenc(&["train", "--config", config]);
    assert!(!refused.status.success());
    stdout(&histenc(&["train", "--config", config, "--seed", "1", "--force"]));

    assert!(!run.join("checkpoint-seed0.json").exists(), "force replaces the earlier run");
    let checkpoint = run.join("checkpoint-seed1.json");
    let checkpoint = checkpoint.to_str().unwrap();
    let text = stdout(&histenc(&["eval", "--checkpoint", checkpoint, "--episodes", "3"]));
    let returns = text.lines().find(|l| l.starts_with("episode returns:")).unwrap();
    assert_eq!(returns.split_whitespace().count(), 5, "{text}");
    assert!(!histenc(&["eval", "--checkpoint", checkpoint, "--mask", ""]).status.success(), "width mismatch");

    let csv = tmp.path().join("mass.csv");
    let text = stdout(&histenc(&[
        "mass-eval", "--checkpoint", checkpoint, "--scales", "0.5,1.5", "--csv", csv.to_str().unwrap(),
    ]));
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("body\t20\t"), "{text}");
    assert!(csv.exists());

    let plots = tmp.path().join("plots");
    let text = stdout(&histenc(&["plot", "--runs", run.to_str().unwrap(), "--out", plots.to_str().unwrap()]));
    assert!(text.lines().any(|l| l.ends_with("returns.svg")), "{text}");
    assert!(plots.join("returns.svg").exists());
}
