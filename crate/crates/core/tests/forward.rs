mod common;

use common::{instance, Picker};
use sfa_core::attention::{attention_weights_debug, AttentionInstance};
use sfa_core::cost::intersection_edge_count;
use sfa_core::{
    dense_attention_reference, flash_sfa_forward, flash_sfa_forward_batched, naive_sfa_reference,
    AttentionConfig, Mask, Precision, SfaError,
};

#[test]
fn flash_matches_naive_on_random_configs() {
    let mut pick = Picker(0x5fa);
    for case in 0..60 {
        let n = pick.range(1, 96);
        let d = pick.pick(&[4, 16, 33]);
        let k = pick.range(1, d);
        let mask = pick.pick(&[Mask::None, Mask::Causal]);
        let precision = pick.pick(&[Precision::Fp32, Precision::Fp64]);
        let tr = pick.range(1, n);
        let tc = pick.range(1, n);
        let cfg = AttentionConfig::new(n, d, pick.range(1, 9), k)
            .with_mask(mask)
            .with_tiles(tr, tc)
            .with_precision(precision);
        let inst = instance(&cfg, case);
        let (out, _) = flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).unwrap();
        let want = naive_sfa_reference(&inst.qt, &inst.kt, &inst.v, mask, Precision::Fp64).unwrap();
        let err = out.max_abs_diff(&want);
        assert!(err <= precision.tolerance(), "case {case} {cfg:?}: {err}");
    }
}

#[test]
fn full_budget_is_dense_attention() {
    for mask in [Mask::None, Mask::Causal] {
        let cfg = AttentionConfig::new(37, 12, 5, 12).with_mask(mask).with_tiles(8, 5);
        let inst = instance(&cfg, 11);
        let (out, _) = flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).unwrap();
        let dense = dense_attention_reference(&inst.q, &inst.k, &inst.v, mask, Precision::Fp64).unwrap();
        assert!(out.max_abs_diff(&dense) <= 1e-10);
    }
}

#[test]
fn tile_shapes_and_workers_agree() {
    let base = AttentionConfig::new(70, 16, 6, 4).with_mask(Mask::Causal);
    let inst = instance(&base, 2);
    let run = |tr, tc, w| {
        let cfg = base.clone().with_tiles(tr, tc).with_workers(w);
        flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).unwrap()
    };
    let reference = run(16, 16, 1).0;
    for (tr, tc) in [(1, 1), (7, 9), (64, 3), (70, 70), (13, 64)] {
        assert!(run(tr, tc, 1).0.max_abs_diff(&reference) <= 1e-10);
    }
    for (tr, tc) in [(16, 16), (7, 9)] {
        let one = run(tr, tc, 1).0;
        let eight = run(tr, tc, 8).0;
        assert!(one.values().iter().zip(eight.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn causal_rows_ignore_future_tokens() {
    let cfg = AttentionConfig::new(30, 16, 4, 4).with_mask(Mask::Causal).with_tiles(8, 8);
    let a = instance(&cfg, 3);
    let b = instance(&cfg, 4);
    let cut = 17;
    // replace every key and value after `cut` by unrelated ones
    let mut k_rows = Vec::new();
    let mut v_rows = Vec::new();
    for j in 0..30 {
        let src = if j <= cut { &a } else { &b };
        k_rows.push(
            src.kt.row_indices(j).iter().copied().zip(src.kt.row_values(j).iter().copied()).collect::<Vec<_>>(),
        );
        v_rows.push(src.v.row(j).to_vec());
    }
    let kt = sfa_core::SparseRowMatrix::from_row_entries(16, &k_rows).unwrap();
    let v = sfa_core::DenseMatrix::from_rows(&v_rows).unwrap();
    let (orig, _) = flash_sfa_forward(&a.qt, &a.kt, &a.v, &cfg).unwrap();
    let (pert, _) = flash_sfa_forward(&a.qt, &kt, &v, &cfg).unwrap();
    for i in 0..=cut {
        assert_eq!(orig.row(i), pert.row(i));
    }
    assert!((cut + 1..30).any(|i| orig.row(i) != pert.row(i)));
}

#[test]
fn weights_form_distributions() {
    for mask in [Mask::None, Mask::Causal] {
        let cfg = AttentionConfig::new(50, 32, 1, 3).with_mask(mask).with_tiles(16, 16);
        let inst = instance(&cfg, 9);
        let p = attention_weights_debug(&inst.qt, &inst.kt, &cfg).unwrap();
        for i in 0..50 {
            let w = p.row_values(i);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            if mask == Mask::Causal {
                assert!(p.row_indices(i).iter().all(|&j| j as usize <= i));
            }
        }
    }
    let cfg = AttentionConfig::new(300, 8, 1, 2);
    let inst = instance(&cfg, 1);
    assert!(attention_weights_debug(&inst.qt, &inst.kt, &cfg).is_err());
}

#[test]
fn edge_count_matches_intersections() {
    let cfg = AttentionConfig::new(120, 32, 4, 5).with_tiles(17, 23);
    let inst = instance(&cfg, 6);
    let (_, report) = flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).unwrap();
    assert_eq!(report.measured_edges, intersection_edge_count(&inst.qt, &inst.kt));
    assert_eq!(report.score_flops, 2 * report.measured_edges);
}

#[test]
fn batched_instances_are_independent() {
    let cfg = AttentionConfig::new(20, 8, 3, 2).with_heads(2, 3).with_tiles(6, 6);
    let inputs: Vec<_> = (0..6).map(|s| instance(&cfg, 100 + s)).collect();
    let views: Vec<_> = inputs
        .iter()
        .map(|i| AttentionInstance { q: &i.qt, k: &i.kt, v: &i.v })
        .collect();
    let out = flash_sfa_forward_batched(&views, &cfg.clone().with_workers(3)).unwrap();
    assert_eq!(out.outputs.len(), 6);
    for (i, o) in inputs.iter().zip(&out.outputs) {
        let (single, _) = flash_sfa_forward(&i.qt, &i.kt, &i.v, &cfg).unwrap();
        assert_eq!(&single, o);
    }
    assert!(flash_sfa_forward_batched(&views[..5], &cfg).is_err());
}

#[test]
fn transient_budget_is_enforced() {
    let mut cfg = AttentionConfig::new(64, 8, 2, 2).with_tiles(32, 32);
    cfg.max_transient_bytes = Some(1024);
    let inst = instance(&cfg, 1);
    let err = flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).unwrap_err();
    assert!(matches!(err, SfaError::ResourceLimit(_)));
    cfg.max_transient_bytes = Some(32 * 32 * 8);
    assert!(flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &cfg).is_ok());
}

#[test]
fn invalid_configs_are_rejected() {
    let cfg = AttentionConfig::new(8, 4, 2, 2);
    let inst = instance(&cfg, 1);
    for bad in [
        AttentionConfig::new(8, 4, 2, 5),
        AttentionConfig::new(8, 4, 2, 2).with_tiles(0, 4),
        AttentionConfig::new(8, 4, 2, 2).with_tiles(4, 9),
        AttentionConfig::new(8, 4, 2, 2).with_workers(0),
        AttentionConfig::new(8, 5, 2, 2),
    ] {
        let err = flash_sfa_forward(&inst.qt, &inst.kt, &inst.v, &bad).unwrap_err();
        assert!(matches!(err, SfaError::InvalidArgument(_) | SfaError::InvalidInput(_)), "{bad:?}");
    }
}
