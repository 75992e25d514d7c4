use std::process::{Command, Output};

fn sfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfa"))
        .args(args)
        .env_remove("SFA_MAX_TRANSIENT_BYTES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or("").to_string()
}

#[test]
fn golden_csv_headers() {
    let cases: [(&[&str], &str); 5] = [
        (
            &["check", "--n", "16", "--d", "8", "--k", "2", "--format", "csv"],
            "case,n,d,dv,k,mask,tile_rows,tile_cols,precision,workers,max_abs_err,tolerance,passed",
        ),
        (
            &["bench", "--n", "16", "--d", "8", "--k", "2", "--no-timing", "--format", "csv"],
            "n,d,dv,k,batch,heads,mask,tile_rows,tile_cols,precision,workers,repeat,warmup,\
             dense_median_ns,sfa_median_ns,measured_edges,predicted_edges,edge_ratio,measured_flops,\
             measured_inops,score_flops,softmax_flops,value_flops,dense_flops,dense_score_flops,\
             score_flop_ratio,model_flop_ratio,peak_transient_values,peak_transient_bytes,kv_cache_bytes",
        ),
        (
            &["grad-check", "--cases", "2", "--format", "csv"],
            "case,n,d,dv,k,mask,tile_rows,tile_cols,max_rel_err_dq,max_rel_err_dk,max_rel_err_dv,\
             max_rel_err_reg,off_support_nonzero,passed",
        ),
        (
            &["analyze", "--generator", "gaussian", "--n", "32", "--format", "csv"],
            "head,source,rows,cols,k,tau,entropy,effective_rank",
        ),
        (
            &["cost-model", "--format", "csv"],
            "n,d,dv,k,batch,heads,predicted_edges,flop_ratio,context_extension,dense_attention_flops,\
             dense_score_flops,sparse_score_flops,key_dense_bytes,key_csr_bytes,memory_ratio,\
             gain_condition,kv_cache_bytes,dense_kv_cache_bytes,kv_reduction",
        ),
    ];
    for (args, want) in cases {
        let o = sfa(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(header(&o), want, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(sfa(&["check", "--n", "24", "--d", "16", "--k", "4"]).status.code(), Some(0));
    assert_eq!(sfa(&["check", "--bogus"]).status.code(), Some(2));
    assert_eq!(sfa(&["check", "--mask", "diagonal"]).status.code(), Some(2));
    assert_eq!(sfa(&["analyze"]).status.code(), Some(2));
    assert_eq!(sfa(&["check", "--d", "4", "--k", "8"]).status.code(), Some(2));
    let limited = Command::new(env!("CARGO_BIN_EXE_sfa"))
        .args(["check", "--n", "64"])
        .env("SFA_MAX_TRANSIENT_BYTES", "1000")
        .output()
        .unwrap();
    assert_eq!(limited.status.code(), Some(3));
    let garbage = Command::new(env!("CARGO_BIN_EXE_sfa"))
        .args(["check"])
        .env("SFA_MAX_TRANSIENT_BYTES", "plenty")
        .output()
        .unwrap();
    assert_eq!(garbage.status.code(), Some(2));
}

#[test]
fn injected_fault_fails_and_names_the_case() {
    let o = sfa(&["check", "--n", "20", "--d", "8", "--k", "2", "--inject-fault", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("flash_vs_naive"));
    let failing: Vec<_> = stdout(&o).lines().filter(|l| l.ends_with(",false")).map(String::from).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|l| l.starts_with("flash_vs_naive,")));
}

#[test]
fn fp32_suite_passes() {
    let o = sfa(&["check", "--n", "40", "--d", "16", "--k", "4", "--precision", "fp32", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(",fp32,1,"));
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timestamp").expect("timestamp present");
        v
    };
    let runs: [&[&str]; 3] = [
        &["check", "--n", "30", "--d", "16", "--k", "4", "--workers", "3"],
        &["bench", "--n", "64,128", "--d", "16", "--k", "2,4", "--no-timing", "--heads", "2"],
        &["analyze", "--generator", "low-rank", "--n", "40", "--d", "16", "--heads", "2"],
    ];
    for args in runs {
        assert_eq!(strip(&sfa(args)), strip(&sfa(args)), "{args:?}");
    }
    let csv = ["cost-model", "--n", "1024,65536", "--d", "64,128", "--k", "4,16", "--format", "csv"];
    assert_eq!(sfa(&csv).stdout, sfa(&csv).stdout);
}

#[test]
fn workers_do_not_change_counters() {
    let base = ["bench", "--n", "96", "--d", "16", "--k", "4", "--tile-rows", "16", "--no-timing", "--format", "csv"];
    let one = stdout(&sfa(&base));
    let mut eight = base.to_vec();
    eight.extend(["--workers", "8"]);
    let eight = stdout(&sfa(&eight));
    // identical except for the workers column and the per-worker buffer peak
    let fields = |s: &str| s.lines().nth(1).unwrap().split(',').map(String::from).collect::<Vec<_>>();
    let (a, b) = (fields(&one), fields(&eight));
    let hdr: Vec<String> = one.lines().next().unwrap().split(',').map(String::from).collect();
    for (i, name) in hdr.iter().enumerate() {
        if !["workers", "peak_transient_values", "peak_transient_bytes"].contains(&name.as_str()) {
            assert_eq!(a[i], b[i], "{name}");
        }
    }
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# desk run\nn = 48\nd = 16\nk = 4\nformat = csv\n").unwrap();
    let out = dir.path().join("report.csv");
    let o = sfa(&[
        "cost-model",
        "--config",
        conf.to_str().unwrap(),
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("48,16,16,2,"));
}

#[test]
fn analyze_reads_matrix_files() {
    use sfa_core::gen::low_rank_matrix;
    use sfa_core::sparse::io::write_dense;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("head0.bin");
    let mut f = std::fs::File::create(&path).unwrap();
    write_dense(&mut f, &low_rank_matrix(60, 12, 3, 1), sfa_core::Precision::Fp64).unwrap();
    drop(f);
    let o = sfa(&["analyze", "--input", path.to_str().unwrap(), "--k", "4", "--tau", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(line.ends_with(",3"), "{line}");
    let missing = sfa(&["analyze", "--input", "/nonexistent/file.bin"]);
    assert_eq!(missing.status.code(), Some(2));
}
