use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unimod::engine::{is_totally_unimodular, mutate_certificate, verify_certificate, NodeKind};
use unimod::oracles::{brute_force_graphic, brute_force_tu};
use unimod::signing::sign_matrix;
use unimod::{BinaryMatrix, TernaryMatrix};

fn r12() -> Vec<Vec<i64>> {
    vec![
        vec![1, 1, 1, 0, 0, 0],
        vec![1, 1, 0, 1, 0, 0],
        vec![1, 0, 0, 0, 1, 0],
        vec![0, 1, 0, 0, 0, 1],
        vec![0, 0, 1, 0, 1, 1],
        vec![0, 0, 0, 1, 1, 1],
    ]
}

fn signed(b: &BinaryMatrix) -> TernaryMatrix {
    let rows: Vec<Vec<i64>> =
        (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| b.get(i, j) as i64).collect()).collect();
    sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result
}

fn kinds(a: &TernaryMatrix) -> Vec<NodeKind> {
    let r = is_totally_unimodular(a, false).unwrap();
    let t = r.certificate.expect("regular");
    assert!(verify_certificate(a, &t));
    for k in 0..20 {
        if let Some(bad) = mutate_certificate(&t, k) {
            assert!(!verify_certificate(a, &bad), "mutation {k} accepted");
        }
    }
    t.nodes().iter().map(|n| n.kind).collect()
}

#[test]
fn r12_is_regular_but_neither_graphic_nor_cographic() {
    let b = BinaryMatrix::from_rows(&r12());
    assert!(brute_force_graphic(&b).unwrap().is_none());
    assert!(brute_force_graphic(&b.transpose()).unwrap().is_none());
    let a = signed(&b);
    assert!(brute_force_tu(&a).unwrap().is_tu());
    assert!(kinds(&a).contains(&NodeKind::ThreeSum));
}

#[test]
fn r12_pivots_need_a_three_sum() {
    let b = BinaryMatrix::from_rows(&r12());
    for i in 0..6 {
        for j in 0..6 {
            if !b.get(i, j) {
                continue;
            }
            let mut p = b.clone();
            p.pivot_at(i, j).unwrap();
            let a = signed(&p);
            assert!(brute_force_tu(&a).unwrap().is_tu());
            let ks = kinds(&a);
            assert!(ks.contains(&NodeKind::ThreeSum), "pivot ({i}, {j}): {ks:?}");
        }
    }
}

#[test]
fn r12_transpose_and_negation() {
    let a = signed(&BinaryMatrix::from_rows(&r12()));
    assert!(kinds(&a.transpose()).contains(&NodeKind::ThreeSum));
    let neg: Vec<Vec<i64>> = a.to_rows().iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    assert!(is_totally_unimodular(&TernaryMatrix::from_rows(&neg).unwrap(), false).unwrap().tu);
}

/// Seeded search for small regular matrices whose decomposition needs a
/// 3-sum or an R10 leaf; each is cross-checked against the oracles.
#[test]
fn seeded_search_for_hard_regular_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut three_sums = 0;
    let mut r10 = 0;
    for _ in 0..20_000 {
        let m = rng.gen_range(5..=7);
        let n = rng.gen_range(5..=7);
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_bool(0.5) as i64).collect()).collect();
        let a = sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result;
        let r = is_totally_unimodular(&a, false).unwrap();
        if !r.tu {
            continue;
        }
        let t = r.certificate.unwrap();
        let ks: Vec<NodeKind> = t.nodes().iter().map(|n| n.kind).collect();
        let hard = ks.contains(&NodeKind::ThreeSum) || ks.contains(&NodeKind::LeafR10);
        if !hard {
            continue;
        }
        three_sums += ks.contains(&NodeKind::ThreeSum) as usize;
        r10 += ks.contains(&NodeKind::LeafR10) as usize;
        assert!(verify_certificate(&a, &t));
        assert!(brute_force_tu(&a).unwrap().is_tu());
        let b = a.support();
        assert!(brute_force_graphic(&b).unwrap().is_none() || ks.contains(&NodeKind::OneSum) || ks.contains(&NodeKind::TwoSum));
    }
    assert!(three_sums + r10 > 0);
}

#[test]
fn random_seven_by_seven_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let p = rng.gen_range(0.2..0.7);
        let rows: Vec<Vec<i64>> = (0..7)
            .map(|_| (0..7).map(|_| if rng.gen_bool(p) { if rng.gen_bool(0.5) { 1 } else { -1 } } else { 0 }).collect())
            .collect();
        let a = TernaryMatrix::from_rows(&rows).unwrap();
        let r = is_totally_unimodular(&a, true).unwrap();
        assert_eq!(r.tu, brute_force_tu(&a).unwrap().is_tu(), "{rows:?}");
        if let Some(t) = &r.certificate {
            assert!(verify_certificate(&a, t));
        }
        if let Some(v) = &r.violator {
            unimod::engine::check_violator(&a, v).unwrap();
        }
    }
}
