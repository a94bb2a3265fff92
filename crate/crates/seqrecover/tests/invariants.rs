//! Cross-module invariants checked exhaustively at small sizes.

use seqrecover::lab;
use seqrecover::oracle::DistanceKind;
use seqrecover::recovery::{dtw, edit};
use seqrecover::{
    all_binary_up_to, edit_distance, frechet_distance, is_subsequence, ExactRational, Sequence,
    Symbol,
};

/// Edit distance is a metric: triangle inequality over all binary triples
/// of length up to 6, via a precomputed pairwise matrix.
#[test]
fn edit_distance_is_a_metric_up_to_len_6() {
    let seqs = all_binary_up_to(0, 6);
    let m = seqs.len();
    let mut dist = vec![vec![0usize; m]; m];
    for i in 0..m {
        for j in 0..m {
            dist[i][j] = edit_distance(&seqs[i], &seqs[j]).unwrap();
        }
    }
    for i in 0..m {
        assert_eq!(dist[i][i], 0);
        for j in 0..m {
            assert_eq!(dist[i][j], dist[j][i]);
            assert!(i == j || dist[i][j] > 0);
            for k in 0..m {
                assert!(dist[i][j] <= dist[i][k] + dist[k][j]);
            }
        }
    }
}

/// The membership identity behind the adaptive edit strategies: the edit
/// distance equals the length gap exactly when one sequence is a
/// subsequence of the other. Exhaustive over lengths up to 7.
#[test]
fn length_gap_identity_up_to_len_7() {
    let seqs = all_binary_up_to(0, 7);
    for x in &seqs {
        for y in &seqs {
            let d = edit_distance(x, y).unwrap();
            let gap = x.len().abs_diff(y.len());
            let subseq = is_subsequence(x, y) || is_subsequence(y, x);
            assert_eq!(d == gap, subseq, "x={x} y={y}");
        }
    }
}

/// The wildcard-query identity: d(s, 1^j W^(n-j)) = n - (#1s in s[1..j]),
/// exhaustive over non-empty s of length up to 7 with n = 7.
#[test]
fn wildcard_prefix_count_identity_up_to_len_7() {
    let n = 7;
    let plan = edit::wildcard_plan(n);
    for s in all_binary_up_to(1, n) {
        let bits = s.as_bits().unwrap();
        for j in 1..=s.len() {
            let ones: usize = bits[..j].iter().map(|&b| b as usize).sum();
            let d = edit_distance(&s, &plan.queries[j]).unwrap();
            assert_eq!(d, n - ones, "s={s} j={j}");
        }
    }
}

/// The embedding over the wildcard plan is injective: all 31 inputs of
/// length up to 4 produce distinct answer vectors.
#[test]
fn wildcard_embedding_is_injective_at_n_4() {
    let n = 4;
    let plan = edit::wildcard_plan(n);
    let mut seen = std::collections::HashSet::new();
    for s in all_binary_up_to(0, n) {
        let v = lab::embed(&s, DistanceKind::Edit, &plan.queries).unwrap();
        assert!(seen.insert(format!("{v:?}")), "duplicate embedding for {s}");
    }
    assert_eq!(seen.len(), 31);
}

/// The run-count plan's embedding is constant on each equivalence class.
#[test]
fn equivalence_plan_embedding_constant_on_classes() {
    let n = 5;
    let plan = dtw::equivalence_plan(n);
    for class in dtw::equivalence_partition(n) {
        let reference = lab::embed(&class[0], DistanceKind::Dtw { p: 1 }, &plan.queries).unwrap();
        for member in &class {
            let v = lab::embed(member, DistanceKind::Dtw { p: 1 }, &plan.queries).unwrap();
            assert_eq!(v, reference, "member {member}");
        }
    }
}

/// Frechet answers over binary pairs are 0/1 and zero exactly on equal
/// condensed expressions; the distance-zero witness pair for DTW is at
/// distance zero yet distinguishable.
#[test]
fn warping_zero_sets() {
    let a: Sequence = "101".parse().unwrap();
    let b: Sequence = "1011".parse().unwrap();
    assert!(
        seqrecover::dtw_distance(&a, &b, seqrecover::PNorm::Finite(1))
            .unwrap()
            .cost
            .is_zero()
    );
    let q = lab::brute_distinguish(
        &a,
        &b,
        DistanceKind::Dtw { p: 1 },
        8,
        &[Symbol::Zero, Symbol::One],
    )
    .unwrap();
    assert!(
        q.is_some(),
        "zero DTW distance does not imply indistinguishable"
    );

    for x in all_binary_up_to(1, 5) {
        for y in all_binary_up_to(1, 5) {
            let d = frechet_distance(&x, &y).unwrap();
            assert!(d.is_zero() || d == ExactRational::one());
        }
    }
}
