//! Brute-force oracles and witness verifiers: exhaustive query scans that
//! ground-truth the equivalence-class machinery, the run-count windows of
//! the hardness pairs, and the distance embedding map.

use std::collections::HashMap;

use serde::Serialize;

use crate::distances::{dtw_distance, edit_distance, frechet_distance, DistanceError, PNorm};
use crate::oracle::DistanceKind;
use crate::rational::ExactRational;
use crate::sequence::{Sequence, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("pair construction for c={c} needs length {needed} but the cap is {cap}")]
    CapExceeded { c: usize, needed: usize, cap: usize },
}

/// JSON verification record emitted by the verify suites.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub params: serde_json::Value,
    pub bound: String,
    pub result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// Distance under one oracle kind, as an exact rational.
pub fn oracle_distance(
    kind: DistanceKind,
    x: &Sequence,
    y: &Sequence,
) -> Result<ExactRational, DistanceError> {
    match kind {
        DistanceKind::Edit => Ok(ExactRational::from_integer(edit_distance(x, y)? as u64)),
        DistanceKind::Dtw { p } => Ok(dtw_distance(x, y, PNorm::Finite(p))?.cost),
        DistanceKind::Frechet => frechet_distance(x, y),
    }
}

/// All non-empty sequences over `alphabet` with length up to `max_len`, in
/// canonical order: shortest first, symbol-index-lexicographic within a
/// length.
fn enumerate_queries(alphabet: &[Symbol], max_len: usize) -> impl Iterator<Item = Sequence> + '_ {
    (1..=max_len).flat_map(move |len| {
        let mut odometer = vec![0usize; len];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let q: Sequence = odometer.iter().map(|&i| alphabet[i].clone()).collect();
            // advance
            let mut pos = len;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < alphabet.len() {
                    break;
                }
                odometer[pos] = 0;
            }
            Some(q)
        })
    })
}

/// First query (canonical order) over the given alphabet on which the two
/// inputs answer differently, or `None` if they agree everywhere up to
/// `max_query_len`.
pub fn brute_distinguish(
    s: &Sequence,
    s2: &Sequence,
    kind: DistanceKind,
    max_query_len: usize,
    alphabet: &[Symbol],
) -> Result<Option<Sequence>, DistanceError> {
    for q in enumerate_queries(alphabet, max_query_len) {
        if oracle_distance(kind, s, &q)? != oracle_distance(kind, s2, &q)? {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// The hardness pair whose members only differ on queries within a narrow
/// run-count window: `s = 0 1^3 0 1^3 (0^3 1^3)^c 0` and
/// `s' = 0 1^3 0^2 1^3 0^2 1^3 (0^3 1^3)^(c-1) 0`, both of length `6c + 9`
/// with `2c + 5` runs.
pub fn lowerbound_pair(c: usize, cap: usize) -> Result<(Sequence, Sequence), LabError> {
    assert!(c >= 1, "the pair family starts at c = 1");
    let needed = 6 * c + 9;
    if needed > cap {
        return Err(LabError::CapExceeded { c, needed, cap });
    }
    let mut a: Vec<u8> = vec![0, 1, 1, 1, 0, 1, 1, 1];
    for _ in 0..c {
        a.extend_from_slice(&[0, 0, 0, 1, 1, 1]);
    }
    a.push(0);
    let mut b: Vec<u8> = vec![0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1];
    for _ in 0..c - 1 {
        b.extend_from_slice(&[0, 0, 0, 1, 1, 1]);
    }
    b.push(0);
    debug_assert_eq!(a.len(), needed);
    debug_assert_eq!(b.len(), needed);
    Ok((Sequence::from_bits(&a), Sequence::from_bits(&b)))
}

/// The canonical distinguishing query `0 (10)^c 1 0` for the hardness pair;
/// it has `2c + 3` runs and separates the pair at DTW distances 1 and 2.
pub fn window_witness_query(c: usize) -> Sequence {
    let mut bits = vec![0u8];
    for _ in 0..c {
        bits.extend_from_slice(&[1, 0]);
    }
    bits.extend_from_slice(&[1, 0]);
    Sequence::from_bits(&bits)
}

/// True iff every binary query up to `max_query_len` that distinguishes the
/// pair for this `c` has run count in `[2c, 2c + 6]`.
pub fn verify_runs_window(c: usize, max_query_len: usize) -> Result<bool, LabError> {
    let (s, s2) = lowerbound_pair(c, usize::MAX)?;
    let alphabet = [Symbol::Zero, Symbol::One];
    for q in enumerate_queries(&alphabet, max_query_len) {
        let da = oracle_distance(DistanceKind::Dtw { p: 1 }, &s, &q)?;
        let db = oracle_distance(DistanceKind::Dtw { p: 1 }, &s2, &q)?;
        if da != db {
            let runs = q.run_count().expect("binary query");
            if !(2 * c..=2 * c + 6).contains(&runs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The embedding map: the vector of distances from `s` to each plan query.
pub fn embed(
    s: &Sequence,
    kind: DistanceKind,
    queries: &[Sequence],
) -> Result<Vec<ExactRational>, DistanceError> {
    queries
        .iter()
        .map(|q| oracle_distance(kind, s, q))
        .collect()
}

const UNREACHED: u32 = u32::MAX / 4;

fn extend_column(kind: DistanceKind, col: &[u32], s: &[u8], c: u8) -> Vec<u32> {
    let ls = s.len();
    let mut new = Vec::with_capacity(ls + 1);
    match kind {
        DistanceKind::Edit => {
            new.push(col[0] + 1);
            for j in 1..=ls {
                let cost = u32::from(s[j - 1] != c);
                let v = (col[j] + 1).min(new[j - 1] + 1).min(col[j - 1] + cost);
                new.push(v);
            }
        }
        DistanceKind::Dtw { .. } => {
            new.push(UNREACHED);
            for j in 1..=ls {
                let cost = u32::from(s[j - 1] != c);
                let best = col[j].min(col[j - 1]).min(new[j - 1]);
                new.push(cost + best);
            }
        }
        DistanceKind::Frechet => {
            new.push(UNREACHED);
            for j in 1..=ls {
                let cost = u32::from(s[j - 1] != c);
                let best = col[j].min(col[j - 1]).min(new[j - 1]);
                new.push(cost.max(best));
            }
        }
    }
    new
}

fn signature_dfs(
    kind: DistanceKind,
    s: &[u8],
    cols: &mut Vec<Vec<u32>>,
    depth: usize,
    max_depth: usize,
    sig: &mut Vec<u8>,
) {
    if depth == max_depth {
        return;
    }
    for c in [0u8, 1u8] {
        let col = extend_column(kind, cols.last().expect("root column"), s, c);
        let answer = col[s.len()];
        debug_assert!(answer < UNREACHED);
        sig.push(answer as u8);
        cols.push(col);
        signature_dfs(kind, s, cols, depth + 1, max_depth, sig);
        cols.pop();
    }
}

/// Answers of `s` to every non-empty binary query of length at most
/// `max_len`, in a fixed prefix-tree order shared by all inputs. Computed
/// incrementally, one DP column per tree node.
fn full_signature(s: &Sequence, kind: DistanceKind, max_len: usize) -> Vec<u8> {
    let bits = s.as_bits().expect("binary input");
    let ls = bits.len();
    let root: Vec<u32> = match kind {
        DistanceKind::Edit => (0..=ls as u32).collect(),
        _ => {
            let mut v = vec![UNREACHED; ls + 1];
            v[0] = 0;
            v
        }
    };
    let mut sig = Vec::with_capacity((1usize << (max_len + 1)) - 2);
    let mut cols = vec![root];
    signature_dfs(kind, &bits, &mut cols, 0, max_len, &mut sig);
    sig
}

/// Ground-truth partition: groups all inputs of length at most `n` (at
/// least 1 for the warping oracles, where the empty input has no defined
/// distances) by their answers to every binary query of length at most
/// `max_query_len`. Classes are sorted by smallest member.
pub fn class_partition(n: usize, kind: DistanceKind, max_query_len: usize) -> Vec<Vec<Sequence>> {
    let min_len = match kind {
        DistanceKind::Edit => 0,
        _ => 1,
    };
    let mut groups: HashMap<Vec<u8>, Vec<Sequence>> = HashMap::new();
    for s in crate::sequence::all_binary_up_to(min_len, n) {
        let sig = full_signature(&s, kind, max_query_len);
        groups.entry(sig).or_default().push(s);
    }
    let mut classes: Vec<Vec<Sequence>> = groups.into_values().collect();
    for class in classes.iter_mut() {
        class.sort();
    }
    classes.sort_by(|a, b| a[0].cmp(&b[0]));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::dtw::equivalence_partition;
    use crate::recovery::frechet;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    const BIN: [Symbol; 2] = [Symbol::Zero, Symbol::One];

    #[test]
    fn distinguishers() {
        // "0" and "1" already differ on the first query
        let q =
            brute_distinguish(&seq("0"), &seq("1"), DistanceKind::Dtw { p: 1 }, 1, &BIN).unwrap();
        assert_eq!(q, Some(seq("0")));
        // zero DTW distance does not mean indistinguishable
        let q = brute_distinguish(
            &seq("101"),
            &seq("1011"),
            DistanceKind::Dtw { p: 1 },
            8,
            &BIN,
        )
        .unwrap();
        assert!(q.is_some());
    }

    #[test]
    fn witness_pair_agrees_on_short_queries() {
        let q = brute_distinguish(
            &seq("010110"),
            &seq("011010"),
            DistanceKind::Dtw { p: 1 },
            8,
            &BIN,
        )
        .unwrap();
        assert_eq!(q, None);
    }

    #[test]
    fn lowerbound_pair_construction() {
        let (s, s2) = lowerbound_pair(2, 30).unwrap();
        assert_eq!(s.to_string(), "011101110001110001110");
        assert_eq!(s.len(), 21);
        assert_eq!(s2.len(), 21);
        assert_eq!(s.run_count().unwrap(), 9);
        assert_eq!(s2.run_count().unwrap(), 9);
        assert!(matches!(
            lowerbound_pair(4, 30),
            Err(LabError::CapExceeded { needed: 33, .. })
        ));
    }

    #[test]
    fn window_witness_separates_the_pair() {
        for c in [1usize, 2] {
            let (s, s2) = lowerbound_pair(c, 64).unwrap();
            let q = window_witness_query(c);
            assert_eq!(q.run_count().unwrap(), 2 * c + 3);
            let d1 = oracle_distance(DistanceKind::Dtw { p: 1 }, &s, &q).unwrap();
            let d2 = oracle_distance(DistanceKind::Dtw { p: 1 }, &s2, &q).unwrap();
            assert_eq!(d1, ExactRational::from_integer(1));
            assert_eq!(d2, ExactRational::from_integer(2));
        }
    }

    #[test]
    fn runs_window_holds_for_short_queries() {
        // the full-depth scan runs in the acceptance suite
        assert!(verify_runs_window(1, 9).unwrap());
    }

    #[test]
    fn incremental_signatures_match_direct_distances() {
        for kind in [
            DistanceKind::Edit,
            DistanceKind::Dtw { p: 1 },
            DistanceKind::Frechet,
        ] {
            for s in ["0", "0110", "10101"] {
                let s = seq(s);
                let max_len = 5;
                let sig = full_signature(&s, kind, max_len);
                let mut idx = 0;
                // re-walk the prefix tree in the same order
                fn walk(prefix: &mut Vec<u8>, max_len: usize, out: &mut Vec<Sequence>) {
                    if prefix.len() == max_len {
                        return;
                    }
                    for c in [0u8, 1u8] {
                        prefix.push(c);
                        out.push(Sequence::from_bits(prefix));
                        walk(prefix, max_len, out);
                        prefix.pop();
                    }
                }
                let mut queries = Vec::new();
                walk(&mut Vec::new(), max_len, &mut queries);
                for q in queries {
                    let want = oracle_distance(kind, &s, &q).unwrap();
                    assert_eq!(
                        ExactRational::from_integer(sig[idx] as u64),
                        want,
                        "kind {kind:?} s {s} q {q}"
                    );
                    idx += 1;
                }
                assert_eq!(idx, sig.len());
            }
        }
    }

    #[test]
    fn edit_partition_is_discrete() {
        let classes = class_partition(4, DistanceKind::Edit, 10);
        assert!(classes.iter().all(|c| c.len() == 1));
        assert_eq!(classes.len(), 31);
    }

    #[test]
    fn frechet_partition_matches_class_enumeration() {
        let n = 4;
        let classes = class_partition(n, DistanceKind::Frechet, 10);
        assert_eq!(classes.len(), 2 * n);
        for class in &classes {
            let expected = frechet::class_of(&class[0]).unwrap();
            for member in class {
                assert_eq!(frechet::class_of(member).unwrap(), expected);
            }
        }
    }

    #[test]
    fn dtw_partition_matches_signature_partition_small() {
        let n = 4;
        let brute = class_partition(n, DistanceKind::Dtw { p: 1 }, 12);
        let plan = equivalence_partition(n);
        assert_eq!(brute, plan);
    }

    #[test]
    fn embedding_vector() {
        let plan = crate::recovery::edit::wildcard_plan(4);
        let v = embed(&seq("0101"), DistanceKind::Edit, &plan.queries).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], ExactRational::from_integer(4));
        let empty = embed(&seq("0101"), DistanceKind::Edit, &[]).unwrap();
        assert!(empty.is_empty());
    }
}
