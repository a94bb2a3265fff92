//! Edit-distance recovery: two adaptive strategies and two non-adaptive
//! query plans with their decoders.
//!
//! Both adaptive strategies lean on the same membership test: for a query
//! no longer than the hidden input, the edit distance equals the length gap
//! exactly when the query is a subsequence of the input.

use crate::oracle::{DistanceKind, OracleSession, SessionMode};
use crate::rational::ExactRational;
use crate::recovery::{adversarial, answer_usize, expect_answers, RecoveryError};
use crate::sequence::{Sequence, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EditPlanVariant {
    WildcardNonAdaptive,
    BinaryNonAdaptive,
}

/// A non-adaptive edit query plan; a pure function of `n`.
#[derive(Clone, Debug)]
pub struct EditQueryPlan {
    pub variant: EditPlanVariant,
    pub queries: Vec<Sequence>,
}

fn require_edit_adaptive(
    session: &OracleSession,
    strategy: &'static str,
) -> Result<(), RecoveryError> {
    if session.kind() != DistanceKind::Edit || session.mode() != SessionMode::Adaptive {
        return Err(RecoveryError::SessionMismatch {
            strategy,
            expected: "adaptive edit",
        });
    }
    Ok(())
}

struct SubseqProbe<'a> {
    session: &'a mut OracleSession,
    hidden_len: usize,
}

impl SubseqProbe<'_> {
    /// True iff `q` is a subsequence of the hidden input, decided from one
    /// distance query via the length-gap identity. Requires `len(q) <=
    /// hidden_len`.
    fn is_subseq(&mut self, q: &Sequence) -> Result<bool, RecoveryError> {
        debug_assert!(q.len() <= self.hidden_len);
        let d = answer_usize(&self.session.query(q)?, "edit membership probe")?;
        let gap = self.hidden_len - q.len();
        if d < gap {
            return Err(adversarial(format!(
                "distance {d} below the length gap {gap} for query {q}"
            )));
        }
        Ok(d == gap)
    }
}

/// Run-by-run adaptive recovery: binary-search the condensed expression,
/// then expand each run by doubling plus binary search. The trailing run
/// length is forced by the total length and costs no queries.
///
/// For an input with `k` runs the query count is at most
/// `2k*ceil(log2(n/k)) + k + ceil(log2 n) + 3`, the additive 3 covering
/// the length query, the prepend test, and binary-search slack.
pub fn adaptive_runs_recover(session: &mut OracleSession) -> Result<Sequence, RecoveryError> {
    require_edit_adaptive(session, "edit.adaptive.runs")?;
    let n = session.n();
    let len = answer_usize(&session.query(&Sequence::empty())?, "length query")?;
    if len == 0 {
        return Ok(Sequence::empty());
    }
    if len > n {
        return Err(adversarial(format!("claimed length {len} exceeds n={n}")));
    }
    let mut probe = SubseqProbe {
        session,
        hidden_len: len,
    };

    // longest alternating 0-start subsequence, by binary search on its
    // length; length 0 (the empty sequence) is always a subsequence
    let mut lo = 0usize;
    let mut hi = len;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if probe.is_subseq(&Sequence::alternating(0, mid))? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let zero_start_len = lo;

    let (start, run_count) = if zero_start_len == len {
        // the hidden input is exactly the alternating sequence
        return Ok(Sequence::alternating(0, len));
    } else if probe.is_subseq(&Sequence::alternating(1, zero_start_len + 1))? {
        (1u8, zero_start_len + 1)
    } else {
        if zero_start_len == 0 {
            return Err(adversarial(
                "nonempty input admits no one-character subsequence",
            ));
        }
        (0u8, zero_start_len)
    };

    if run_count == len {
        return Ok(Sequence::alternating(start, len));
    }

    // expand runs left to right; candidate queries keep one character in
    // every yet-unexpanded run so the subsequence test stays valid
    let k = run_count;
    let mut lens = vec![1usize; k];
    let mut committed = 0usize;
    for i in 0..k {
        let tail_min = k - 1 - i;
        if i == k - 1 {
            let forced = len - committed;
            if forced == 0 {
                return Err(adversarial("run lengths exceed the reported input length"));
            }
            lens[i] = forced;
            break;
        }
        let max_possible = len - committed - tail_min;
        if max_possible == 1 {
            lens[i] = 1;
            committed += 1;
            continue;
        }
        let probe_run = |probe: &mut SubseqProbe, m: usize| -> Result<bool, RecoveryError> {
            let mut q = Sequence::empty();
            for (j, &l) in lens.iter().enumerate().take(i) {
                let bit = (start as usize + j) % 2;
                for _ in 0..l {
                    q.push(Symbol::bit(bit as u8));
                }
            }
            let bit = (start as usize + i) % 2;
            for _ in 0..m {
                q.push(Symbol::bit(bit as u8));
            }
            for j in i + 1..k {
                q.push(Symbol::bit(((start as usize + j) % 2) as u8));
            }
            probe.is_subseq(&q)
        };
        // doubling phase
        let mut good = 1usize;
        let mut bad = None;
        let mut m = 2usize;
        loop {
            let try_m = m.min(max_possible);
            if probe_run(&mut probe, try_m)? {
                good = try_m;
                if try_m == max_possible {
                    break;
                }
                m = try_m * 2;
            } else {
                bad = Some(try_m);
                break;
            }
        }
        // binary search inside (good, bad)
        if let Some(mut bad) = bad {
            while bad - good > 1 {
                let mid = (good + bad) / 2;
                if probe_run(&mut probe, mid)? {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
        }
        lens[i] = good;
        committed += good;
    }

    let mut out = Sequence::empty();
    for (j, &l) in lens.iter().enumerate() {
        let bit = (start as usize + j) % 2;
        for _ in 0..l {
            out.push(Symbol::bit(bit as u8));
        }
    }
    Ok(out)
}

/// Position-by-position adaptive recovery: after the length query, compare
/// the all-zero query against each unit-flip query; a drop of exactly one
/// marks a set bit.
pub fn adaptive_unit_recover(session: &mut OracleSession) -> Result<Sequence, RecoveryError> {
    require_edit_adaptive(session, "edit.adaptive.unit")?;
    let len = answer_usize(&session.query(&Sequence::empty())?, "length query")?;
    if len == 0 {
        return Ok(Sequence::empty());
    }
    let zeros = Sequence::run(Symbol::Zero, len);
    let base = answer_usize(&session.query(&zeros)?, "all-zero query")? as i64;
    let mut bits = Vec::with_capacity(len);
    for i in 0..len {
        let mut probe: Vec<Symbol> = vec![Symbol::Zero; len];
        probe[i] = Symbol::One;
        let d = answer_usize(&session.query(&Sequence::new(probe))?, "unit query")? as i64;
        let diff = base - d;
        match diff {
            1 => bits.push(1u8),
            d if d <= 0 => bits.push(0u8),
            _ => {
                return Err(adversarial(format!(
                    "distance drop {diff} at position {i} is outside {{<=0, 1}}"
                )))
            }
        }
    }
    Ok(Sequence::from_bits(&bits))
}

/// The wildcard plan: the empty query, then `1^j W^(n-j)` for `j = 1..=n`.
pub fn wildcard_plan(n: usize) -> EditQueryPlan {
    let mut queries = vec![Sequence::empty()];
    for j in 1..=n {
        let mut q = Vec::with_capacity(n);
        q.extend(std::iter::repeat_n(Symbol::One, j));
        q.extend(std::iter::repeat_n(Symbol::Wildcard, n - j));
        queries.push(Sequence::new(q));
    }
    EditQueryPlan {
        variant: EditPlanVariant::WildcardNonAdaptive,
        queries,
    }
}

/// Decodes the wildcard plan: the answer to `1^j W^(n-j)` is `n` minus the
/// number of ones among the first `j` input characters, so consecutive
/// prefix counts differ by the j-th bit.
pub fn wildcard_decode(n: usize, answers: &[ExactRational]) -> Result<Sequence, RecoveryError> {
    expect_answers(answers, n + 1)?;
    let len = answer_usize(&answers[0], "length answer")?;
    if len == 0 {
        return Ok(Sequence::empty());
    }
    if len > n {
        return Err(adversarial(format!("claimed length {len} exceeds n={n}")));
    }
    let mut bits = Vec::with_capacity(len);
    let mut prev_count = 0usize;
    for answer in &answers[1..=len] {
        let a = answer_usize(answer, "prefix answer")?;
        if a > n {
            return Err(adversarial(format!("answer {a} exceeds n={n}")));
        }
        let count = n - a;
        match count.checked_sub(prev_count) {
            Some(0) => bits.push(0u8),
            Some(1) => bits.push(1u8),
            _ => {
                return Err(adversarial(format!(
                    "prefix one-counts {prev_count} -> {count} are not a bit step"
                )))
            }
        }
        prev_count = count;
    }
    Ok(Sequence::from_bits(&bits))
}

/// The binary plan: for every length `l` in `1..=n`, the all-zero query of
/// length `l` followed by the `l` unit-flip queries. `(n^2 + 3n) / 2`
/// queries in total.
pub fn binary_nonadaptive_plan(n: usize) -> EditQueryPlan {
    let mut queries = Vec::with_capacity((n * n + 3 * n) / 2);
    for l in 1..=n {
        queries.push(Sequence::run(Symbol::Zero, l));
        for i in 0..l {
            let mut q = vec![Symbol::Zero; l];
            q[i] = Symbol::One;
            queries.push(Sequence::new(q));
        }
    }
    EditQueryPlan {
        variant: EditPlanVariant::BinaryNonAdaptive,
        queries,
    }
}

/// Decodes the binary plan. Each per-length family proposes a candidate via
/// the unit-drop rule; a candidate is accepted when its full offline answer
/// vector reproduces every observed answer. The plan contains no empty
/// query, so the empty input is recognized by the empty candidate matching
/// (its answers are the query lengths).
pub fn binary_nonadaptive_decode(
    n: usize,
    answers: &[ExactRational],
) -> Result<Sequence, RecoveryError> {
    let plan = binary_nonadaptive_plan(n);
    expect_answers(answers, plan.queries.len())?;

    let mut candidates = vec![Sequence::empty()];
    let mut offset = 0usize;
    for l in 1..=n {
        let base = answer_usize(&answers[offset], "all-zero answer")? as i64;
        let mut bits = Vec::with_capacity(l);
        for i in 0..l {
            let d = answer_usize(&answers[offset + 1 + i], "unit answer")? as i64;
            bits.push(u8::from(base - d == 1));
        }
        candidates.push(Sequence::from_bits(&bits));
        offset += l + 1;
    }

    let mut matches = std::collections::BTreeSet::new();
    for cand in candidates {
        let consistent = plan.queries.iter().zip(answers).all(|(q, a)| {
            crate::distances::edit_distance(&cand, q)
                .ok()
                .and_then(|d| a.to_usize().map(|v| v == d))
                .unwrap_or(false)
        });
        if consistent {
            matches.insert(cand);
        }
    }
    match matches.len() {
        1 => Ok(matches.into_iter().next().unwrap()),
        0 => Err(adversarial("no candidate reproduces the observed answers")),
        _ => Err(RecoveryError::AmbiguousCandidates {
            detail: format!(
                "{} distinct candidates match the answer vector",
                matches.len()
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::edit_distance;
    use crate::oracle::OracleSession;
    use crate::sequence::all_binary_up_to;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    fn adaptive_session(hidden: &str, n: usize) -> OracleSession {
        OracleSession::adaptive(seq(hidden), DistanceKind::Edit, n).unwrap()
    }

    #[test]
    fn runs_recovery_examples() {
        let mut s = adaptive_session("0010111", 8);
        assert_eq!(adaptive_runs_recover(&mut s).unwrap(), seq("0010111"));

        let mut s = adaptive_session("0", 8);
        assert_eq!(adaptive_runs_recover(&mut s).unwrap(), seq("0"));
        assert!(s.query_count() <= 8);

        let mut s = adaptive_session("", 8);
        assert_eq!(adaptive_runs_recover(&mut s).unwrap(), Sequence::empty());
        assert_eq!(s.query_count(), 1);
    }

    #[test]
    fn unit_recovery_examples() {
        // d(101, 000) = 2, d(101, 100) = 1: drop of one marks a set bit
        assert_eq!(edit_distance(&seq("101"), &seq("000")).unwrap(), 2);
        assert_eq!(edit_distance(&seq("101"), &seq("100")).unwrap(), 1);
        let mut s = adaptive_session("101", 5);
        assert_eq!(adaptive_unit_recover(&mut s).unwrap(), seq("101"));
        assert_eq!(s.query_count(), 5);

        let mut s = adaptive_session("000", 5);
        assert_eq!(adaptive_unit_recover(&mut s).unwrap(), seq("000"));

        let mut s = adaptive_session("", 5);
        assert_eq!(adaptive_unit_recover(&mut s).unwrap(), Sequence::empty());
        assert_eq!(s.query_count(), 1);
    }

    #[test]
    fn wildcard_plan_shape() {
        let plan = wildcard_plan(6);
        assert_eq!(plan.queries.len(), 7);
        assert_eq!(plan.queries[0], Sequence::empty());
        assert_eq!(plan.queries[2].to_string(), "1,1,W,W,W,W");
        assert_eq!(plan.queries[6].to_string(), "111111");
    }

    #[test]
    fn wildcard_decode_example() {
        // hidden 0101 with n = 6: answers 4, then 6,5,5,4 for j = 1..4
        let n = 6;
        let plan = wildcard_plan(n);
        let hidden = seq("0101");
        let answers: Vec<ExactRational> = plan
            .queries
            .iter()
            .map(|q| ExactRational::from_integer(edit_distance(&hidden, q).unwrap() as u64))
            .collect();
        assert_eq!(answers[1].to_string(), "6");
        assert_eq!(answers[2].to_string(), "5");
        assert_eq!(answers[3].to_string(), "5");
        assert_eq!(answers[4].to_string(), "4");
        assert_eq!(wildcard_decode(n, &answers).unwrap(), hidden);
    }

    #[test]
    fn wildcard_decode_empty_input() {
        let n = 4;
        let plan = wildcard_plan(n);
        let answers: Vec<ExactRational> = plan
            .queries
            .iter()
            .map(|q| ExactRational::from_integer(q.len() as u64))
            .collect();
        assert_eq!(wildcard_decode(n, &answers).unwrap(), Sequence::empty());
    }

    #[test]
    fn wildcard_decode_rejects_non_monotone_counts() {
        let n = 3;
        let mk = |v: &[u64]| -> Vec<ExactRational> {
            v.iter().map(|&x| ExactRational::from_integer(x)).collect()
        };
        // claimed length 2 but prefix counts jump by 2
        let bad = mk(&[2, 3, 1, 0]);
        assert!(matches!(
            wildcard_decode(n, &bad),
            Err(RecoveryError::AdversarialOracle { .. })
        ));
    }

    #[test]
    fn binary_plan_count() {
        let plan = binary_nonadaptive_plan(3);
        assert_eq!(plan.queries.len(), 9);
        let plan = binary_nonadaptive_plan(8);
        assert_eq!(plan.queries.len(), 44);
    }

    #[test]
    fn binary_decode_small_exhaustive() {
        let n = 4;
        let plan = binary_nonadaptive_plan(n);
        for hidden in all_binary_up_to(0, n) {
            let answers: Vec<ExactRational> = plan
                .queries
                .iter()
                .map(|q| ExactRational::from_integer(edit_distance(&hidden, q).unwrap() as u64))
                .collect();
            assert_eq!(binary_nonadaptive_decode(n, &answers).unwrap(), hidden);
        }
    }

    #[test]
    fn adaptive_strategies_small_exhaustive() {
        let n = 6;
        for hidden in all_binary_up_to(0, n) {
            let mut s = OracleSession::adaptive(hidden.clone(), DistanceKind::Edit, n).unwrap();
            assert_eq!(
                adaptive_runs_recover(&mut s).unwrap(),
                hidden,
                "runs on {hidden}"
            );
            let mut s = OracleSession::adaptive(hidden.clone(), DistanceKind::Edit, n).unwrap();
            assert_eq!(
                adaptive_unit_recover(&mut s).unwrap(),
                hidden,
                "unit on {hidden}"
            );
            assert!(s.query_count() <= n + 2);
        }
    }
}
