use fbm_legendre::kernel::{k_matrix, load_matrix, save_matrix, HurstSpec, Method};
use fbm_legendre::numeric::PrecisionContext;
use fbm_legendre::Error;

fn build(method: &str) -> fbm_legendre::kernel::KernelMatrix {
    let ctx = PrecisionContext::default();
    let spec = HurstSpec::parse("0.35", "2.5", 8).unwrap();
    k_matrix(&ctx, &spec, method.parse::<Method>().unwrap()).unwrap()
}

#[test]
fn round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["direct", "product-crossed"] {
        let k = build(method);
        let path = dir.path().join(format!("{method}.txt"));
        save_matrix(&k, &path).unwrap();
        let back = load_matrix(&path, None).unwrap();
        assert_eq!(back.matrix, k.matrix);
        assert_eq!(back.spec, k.spec);
        assert_eq!(back.method, k.method);
        assert!(!back.diagnostics.reprecised);
        let same = load_matrix(&path, Some(&PrecisionContext::default())).unwrap();
        assert!(!same.diagnostics.reprecised);
    }
}

#[test]
fn header_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    save_matrix(&build("direct"), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["format_version"], 1);
    assert_eq!(header["H"], "0.35");
    assert_eq!(header["T"], "2.5");
    assert_eq!(header["L"], 8);
    assert_eq!(header["precision_bits"], 320);
    assert_eq!(header["method"], "direct");
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn wrong_row_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    save_matrix(&build("direct"), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let row = lines[1];
    while lines.len() < 64 {
        lines.push(row);
    }
    std::fs::write(&path, lines.join("\n")).unwrap();
    assert!(matches!(load_matrix(&path, None), Err(Error::Format { .. })));
}

#[test]
fn malformed_content_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    save_matrix(&build("direct"), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let cases = [
        text.replacen("\"format_version\":1", "\"format_version\":2", 1),
        text.replacen("kernel_matrix", "something_else", 1),
        text.replacen(',', ",nan,", 1),
        text.replacen(',', ",,", 1),
        text.replacen(',', ",abc", 1),
        String::new(),
    ];
    for (n, bad) in cases.iter().enumerate() {
        std::fs::write(&path, bad).unwrap();
        assert!(
            matches!(load_matrix(&path, None), Err(Error::Format { .. })),
            "case {n}"
        );
    }
    assert!(matches!(
        load_matrix(&dir.path().join("missing"), None),
        Err(Error::Io(_))
    ));
}

#[test]
fn reprecision_sets_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    let k = build("direct");
    save_matrix(&k, &path).unwrap();
    let wide = PrecisionContext::new(512).unwrap();
    let back = load_matrix(&path, Some(&wide)).unwrap();
    assert!(back.diagnostics.reprecised);
    assert_eq!(back.precision_bits(), 512);
    // widening is exact
    assert_eq!(back.matrix.with_precision(&PrecisionContext::default()), k.matrix);
    for (a, b) in back.matrix.entries().iter().zip(k.matrix.entries()) {
        assert_eq!(a, b);
    }
}
