use std::path::Path;
use std::process::{Command, Output};

fn wavefarm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavefarm"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const LAYOUT: &str = r#"{"farm_size_m": 200.0, "positions": [[0,0],[100,0],[0,100],[100,100]]}"#;

#[test]
fn evaluate_plot_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("l.json"), LAYOUT).unwrap();

    let o = wavefarm(&["evaluate", "--layout", "l.json", "--climate", "sydney_like"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("power_w=") && stdout(&o).contains("q_factor="));

    let o = wavefarm(&["plot", "--layout", "l.json", "--out", "l.svg"], dir.path());
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join("l.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 4);

    let o = wavefarm(&["analyze", "removal", "--layout", "l.json", "--out", "r.csv"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let o = wavefarm(&["analyze", "landscape", "--layout", "l.json", "--step", "50"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("x,y,buoy_power,total_power\n"));
}

#[test]
fn benchmark_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        "algorithms = [\"bGA\", \"MS-bDE\"]\nn_buoys = 4\nclimate = \"perth_like\"\nbudget = 40\nseeds = [1, 2]\noutput_dir = \"out\"\n",
    )
    .unwrap();
    let o = wavefarm(&["benchmark", "--config", "exp.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("statistic,bGA,MS-bDE"));
    for f in ["stats.csv", "friedman.csv", "runs.csv", "manifest.json", "bga/seed-1.csv", "ms-bde/seed-2.layout.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn errors_are_one_line_and_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "algorithm = \"CMA-ES\"\nn_buoys = 4\nclimate = \"perth_like\"\nbudget = 40\nseeds = [1]\n",
    )
    .unwrap();
    for args in [
        vec!["optimize", "--config", "bad.toml"],
        vec!["optimize", "--config", "missing.toml"],
        vec!["evaluate", "--layout", "missing.json"],
        vec!["frobnicate"],
    ] {
        let o = wavefarm(&args, dir.path());
        assert!(!o.status.success(), "{args:?}");
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
    let o = wavefarm(&["optimize", "--config", "bad.toml"], dir.path());
    assert!(stderr(&o).contains("unknown algorithm id `CMA-ES`"));
    assert!(wavefarm(&["--help"], dir.path()).status.success());
}
