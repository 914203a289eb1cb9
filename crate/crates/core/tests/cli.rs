use std::process::Command;

fn psumbw(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_psumbw")).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn min_bw_csv_for_builtin() {
    let (ok, out, _) = psumbw(&["min-bw", "--network", "resnet18"]);
    assert!(ok);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("network,macs,strategy,mode,total_activations,total_millions"));
    assert_eq!(lines.next(), Some("resnet18,,min-bw,none,4666368,4.67"));
}

#[test]
fn compare_reads_catalog_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l1.csv");
    std::fs::write(&path, "l1,8,8,3,1,1,8,8\n").unwrap();
    let (ok, out, _) = psumbw(&["compare", "--file", path.to_str().unwrap(), "--macs", "72"]);
    assert!(ok);
    let totals: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(totals, ["4608", "8192", "5632", "3584"]);
}

#[test]
fn sweep_savings_rows() {
    let (ok, out, _) = psumbw(&["sweep", "--network", "all", "--macs", "512..2048", "--savings"]);
    assert!(ok);
    // header plus 8 networks x 3 budgets
    assert_eq!(out.lines().count(), 1 + 8 * 3);
}

#[test]
fn check_reports_pass() {
    let (ok, out, _) = psumbw(&["check", "--layer", "l1,8,8,3,1,1,8,8", "--m", "3", "--n", "5", "--controller", "active"]);
    assert!(ok, "{out}");
    assert!(out.trim_end().ends_with("PASS"));
}

#[test]
fn errors_exit_nonzero() {
    let (ok, _, err) = psumbw(&["min-bw", "--network", "lenet"]);
    assert!(!ok);
    assert!(err.contains("unknown network `lenet`"));

    let (ok, _, err) = psumbw(&["compare", "--network", "vgg16", "--macs", "8"]);
    assert!(!ok);
    assert!(err.contains("vgg16/"), "{err}");
}
