use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_regparam");

fn run(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn assert_deterministic(args: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(args, out);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb, "{args:?}");
}

#[test]
fn studies_are_deterministic() {
    let small = ["--d", "12", "--n-mc", "30", "--trials", "3", "--seed", "7"];
    let cases: &[&[&str]] = &[
        &["risk-curve", "--grid", "1e-3:1:15"],
        &["rate-study", "--tau", "1e-3:1e-1:3", "--grid", "1e-3:1:10", "--dense-points", "20"],
        &["noise-study", "--tau", "0.01,0.1", "--grid", "1e-3:1:10", "--dense-points", "20"],
        &["plateau-study", "--n", "2,4", "--grid", "1e-3:1:10"],
        &["compare-qo", "--tau", "0.01", "--n-train", "20", "--n-test", "5", "--grid", "1e-3:1:20"],
        &["bound-check", "--grid", "1e-3:1:10"],
    ];
    for case in cases {
        let args: Vec<&str> = case.iter().chain(small.iter()).copied().collect();
        assert_deterministic(&args);
    }
}

#[test]
fn variational_models_are_deterministic() {
    assert_deterministic(&["risk-curve", "--model", "denoise", "--d", "32", "--sparsity", "4", "--n-mc", "20", "--grid", "1e-3:1:10"]);
    assert_deterministic(&["risk-curve", "--model", "deblur", "--d", "16", "--sparsity", "2", "--n", "3", "--n-mc", "5", "--grid", "1e-2:1:4"]);
    assert_deterministic(&["risk-curve", "--model", "tv", "--d", "6", "--n", "3", "--n-mc", "5", "--grid", "1e-2:1:4"]);
}

#[test]
fn generate_writes_a_readable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--d", "5", "--n", "4", "--seed", "3"], dir.path());
    assert!(o.status.success());
    let ds = regparam::experiments::read_dataset(&dir.path().join("dataset.txt")).unwrap();
    assert_eq!(ds.data.len(), 4);
    assert_eq!(ds.data.signal_dim(), 5);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    fs::write(&cfg, "# small run\nd = 8\nn_mc = 10\ngrid = 1e-3:1:5\nfilter = tikhonov\nseed = 1\n").unwrap();
    let out = dir.path().join("o");
    let o = Command::new(BIN)
        .args(["risk-curve", "--config"])
        .arg(&cfg)
        .args(["--grid", "1e-2:1:3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("risk_curve_tikhonov.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!out.join("risk_curve_landweber.csv").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["risk-curve", "--grid", "1:0.1:5"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = run(&["risk-curve", "--model", "denoise", "--filter", "tikhonov"], dir.path());
    assert!(!o.status.success());
}
