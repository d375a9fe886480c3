use assert_cmd::Command;

fn fbm() -> Command {
    let mut cmd = Command::cargo_bin("fbm").unwrap();
    cmd.env_remove("FBM_PRECISION_BITS");
    cmd
}

fn stdout(cmd: &mut Command) -> String {
    let out = cmd.assert().success().get_output().stdout.clone();
    String::from_utf8(out).unwrap()
}

#[test]
fn kmatrix_brownian_epsilon() {
    let out = stdout(fbm().args(["kmatrix", "--hurst", "0.5", "--order", "4"]));
    assert!(out.contains("epsilon = 0.035714"), "{out}");
}

#[test]
fn kmatrix_rejects_bad_hurst() {
    fbm()
        .args(["kmatrix", "--hurst", "1.5", "--order", "4"])
        .assert()
        .code(2);
    fbm()
        .args(["kmatrix", "--hurst", "7e-1", "--order", "4"])
        .assert()
        .code(2);
    fbm()
        .args(["kmatrix", "--hurst", "0.7", "--order", "0"])
        .assert()
        .code(2);
}

#[test]
fn kmatrix_rejects_low_precision() {
    fbm()
        .args(["--precision", "32", "kmatrix", "--hurst", "0.7", "--order", "4"])
        .assert()
        .code(2);
    fbm()
        .env("FBM_PRECISION_BITS", "16")
        .args(["kmatrix", "--hurst", "0.7", "--order", "4"])
        .assert()
        .code(2);
}

#[test]
fn kmatrix_product_prints_star() {
    let out = stdout(fbm().args(["kmatrix", "--hurst", "0.7", "--order", "8", "--method", "product-b"]));
    assert!(out.contains("epsilon_star = 0.0049"), "{out}");
    assert!(out.contains("defect = "), "{out}");
    let out = stdout(fbm().args([
        "kmatrix",
        "--hurst",
        "0.7",
        "--order",
        "8",
        "--method",
        "product-crossed",
    ]));
    assert!(out.contains("epsilon_star = 0.004961"), "{out}");
}

#[test]
fn kmatrix_output_unwritable_is_io_error() {
    fbm()
        .args([
            "kmatrix",
            "--hurst",
            "0.7",
            "--order",
            "4",
            "--output",
            "/nonexistent/dir/k.txt",
        ])
        .assert()
        .code(1);
}

#[test]
fn table3_preset() {
    let out = stdout(fbm().args(["error-table", "--reproduce", "table3", "--max-order", "8"]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "H,L,value");
    assert_eq!(rows.len(), 1 + 9 * 2);
    assert!(rows.contains(&"0.7,8,0.004961"));
    assert!(rows.contains(&"0.1,4,0.387505"));
}

#[test]
fn table_json_and_full_precision() {
    let out = stdout(fbm().args(["error-table", "--hursts", "0.5", "--orders", "4", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.to_string().contains("0.5"));
    let csv = stdout(fbm().args(["error-table", "--hursts", "0.5", "--orders", "4"]));
    // 1/28 unrounded
    assert!(csv.lines().nth(1).unwrap().len() > 40, "{csv}");
}

#[test]
fn empty_table_lists() {
    fbm()
        .args(["error-table", "--hursts", "", "--orders", "4"])
        .assert()
        .code(2);
    fbm().args(["error-table", "--hursts", "0.5"]).assert().code(2);
}

#[test]
fn simulate_order_one_is_constant() {
    let out = stdout(fbm().args([
        "simulate", "--hurst", "0.5", "--order", "1", "--grid", "2", "--paths", "1", "--seed", "7",
    ]));
    let values: Vec<&str> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(values.len(), 2);
    assert_eq!(values[0], values[1]);
}

#[test]
fn simulate_rejects_zero_paths() {
    fbm()
        .args(["simulate", "--hurst", "0.5", "--order", "4", "--paths", "0"])
        .assert()
        .code(2);
}

#[test]
fn simulate_is_thread_independent() {
    let args = [
        "simulate", "--hurst", "0.3", "--order", "12", "--grid", "9", "--paths", "40", "--seed", "11",
    ];
    let one = stdout(fbm().args(["--threads", "1"]).args(args));
    let many = stdout(fbm().args(["--threads", "8"]).args(args));
    assert_eq!(one, many);
}

#[test]
fn simulate_from_saved_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    fbm()
        .args(["kmatrix", "--hurst", "0.7", "--order", "6", "--output"])
        .arg(&path)
        .assert()
        .success();
    let args = ["--grid", "5", "--paths", "3", "--seed", "2", "--format", "json"];
    let built = stdout(fbm().args(["simulate", "--hurst", "0.7", "--order", "6"]).args(args));
    let loaded = stdout(fbm().args(["simulate", "--matrix"]).arg(&path).args(args));
    assert_eq!(built, loaded);
    let v: serde_json::Value = serde_json::from_str(&built).unwrap();
    assert_eq!(v["meta"]["seed"], 2);
}

#[test]
fn validate_default_passes() {
    let out = stdout(fbm().args(["validate"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn validate_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    fbm()
        .args(["kmatrix", "--hurst", "0.7", "--order", "6", "--output"])
        .arg(&path)
        .assert()
        .success();
    let fast = ["validate", "--order", "6", "--paths", "2000", "--matrix"];
    fbm().args(fast).arg(&path).assert().success();

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = lines[2].replacen('1', "2", 1);
    std::fs::write(&path, lines.join("\n")).unwrap();
    fbm().args(fast).arg(&path).assert().code(3);

    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    fbm().args(fast).arg(&path).assert().code(3);
}
