//! Recovery strategies and the strategy registry.
//!
//! Adaptive strategies drive an [`OracleSession`] directly; non-adaptive
//! strategies are split into a plan generator that is a pure function of
//! `n` and a decoder over the answer vector. `run_strategy` wires either
//! kind to a fresh session and produces a [`RecoveryReport`].

pub mod dtw;
pub mod edit;
pub mod frechet;

use crate::descent;
use crate::distances::DistanceError;
use crate::mss::MssError;
use crate::oracle::{DistanceKind, OracleError, OracleSession, RecoveryLevel, RecoveryReport};
use crate::rational::ExactRational;
use crate::sequence::Sequence;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Mss(#[from] MssError),
    #[error("oracle answers are inconsistent: {detail}")]
    AdversarialOracle { detail: String },
    #[error("decoding is ambiguous, which must never happen: {detail}")]
    AmbiguousCandidates { detail: String },
    #[error("strategy `{strategy}` requires a {expected} session")]
    SessionMismatch {
        strategy: &'static str,
        expected: &'static str,
    },
    #[error("strategy `{strategy}` does not support an empty hidden sequence")]
    EmptyHiddenUnsupported { strategy: &'static str },
    #[error("no improving neighbor at `{query}` while the distance is still positive")]
    DescentStuck { query: Sequence },
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },
    #[error("answer vector has {got} entries, expected {expected}")]
    AnswerCountMismatch { expected: usize, got: usize },
    #[error("precondition violated: {detail}")]
    Precondition { detail: String },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

pub(crate) fn adversarial(detail: impl Into<String>) -> RecoveryError {
    RecoveryError::AdversarialOracle {
        detail: detail.into(),
    }
}

/// Interprets an oracle answer as a small non-negative integer.
pub(crate) fn answer_usize(a: &ExactRational, context: &str) -> Result<usize, RecoveryError> {
    a.to_usize().ok_or_else(|| {
        adversarial(format!(
            "{context}: answer {a} is not a non-negative integer"
        ))
    })
}

pub(crate) fn expect_answers(
    answers: &[ExactRational],
    expected: usize,
) -> Result<(), RecoveryError> {
    if answers.len() != expected {
        return Err(RecoveryError::AnswerCountMismatch {
            expected,
            got: answers.len(),
        });
    }
    Ok(())
}

/// Registry entry for one strategy.
#[derive(Clone, Copy, Debug)]
pub struct StrategyInfo {
    pub id: &'static str,
    pub kind: DistanceKind,
    pub adaptive: bool,
    pub level: RecoveryLevel,
    /// Number of distinct extra (non-binary) characters the queries use,
    /// as printed by the summary table.
    pub extra_chars: &'static str,
    /// Human-readable query bound.
    pub bound: &'static str,
    /// Whether the strategy can recover the empty input.
    pub supports_empty: bool,
}

pub const STRATEGIES: &[StrategyInfo] = &[
    StrategyInfo {
        id: "edit.adaptive.runs",
        kind: DistanceKind::Edit,
        adaptive: true,
        level: RecoveryLevel::Exact,
        extra_chars: "0",
        bound: "2k*ceil(log2(n/k)) + k + ceil(log2 n) + 3",
        supports_empty: true,
    },
    StrategyInfo {
        id: "edit.adaptive.unit",
        kind: DistanceKind::Edit,
        adaptive: true,
        level: RecoveryLevel::Exact,
        extra_chars: "0",
        bound: "n + 2",
        supports_empty: true,
    },
    StrategyInfo {
        id: "edit.nonadaptive.wildcard",
        kind: DistanceKind::Edit,
        adaptive: false,
        level: RecoveryLevel::Exact,
        extra_chars: "1",
        bound: "n + 1",
        supports_empty: true,
    },
    StrategyInfo {
        id: "edit.nonadaptive.binary",
        kind: DistanceKind::Edit,
        adaptive: false,
        level: RecoveryLevel::Exact,
        extra_chars: "0",
        bound: "(n^2 + 3n) / 2",
        supports_empty: true,
    },
    StrategyInfo {
        id: "dtw.adaptive.half",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: true,
        level: RecoveryLevel::Exact,
        extra_chars: "1",
        bound: "n + 1",
        supports_empty: false,
    },
    StrategyInfo {
        id: "dtw.nonadaptive.equiv2n",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: false,
        level: RecoveryLevel::EquivalenceClass,
        extra_chars: "0",
        bound: "2n",
        supports_empty: false,
    },
    StrategyInfo {
        id: "dtw.nonadaptive.oneextra",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: false,
        level: RecoveryLevel::Exact,
        extra_chars: "1",
        bound: "n^2 + n",
        supports_empty: false,
    },
    StrategyInfo {
        id: "dtw.nonadaptive.twoextra",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: false,
        level: RecoveryLevel::Exact,
        extra_chars: "2",
        bound: "n + 2",
        supports_empty: false,
    },
    StrategyInfo {
        id: "dtw.nonadaptive.fourquery",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: false,
        level: RecoveryLevel::Exact,
        extra_chars: "O(n)",
        bound: "4",
        supports_empty: false,
    },
    StrategyInfo {
        id: "frechet.nonadaptive.classes",
        kind: DistanceKind::Frechet,
        adaptive: false,
        level: RecoveryLevel::EquivalenceClass,
        extra_chars: "0",
        bound: "2n - 1",
        supports_empty: false,
    },
    StrategyInfo {
        id: "cd.edit",
        kind: DistanceKind::Edit,
        adaptive: true,
        level: RecoveryLevel::Exact,
        extra_chars: "0",
        bound: "(3n + 2) * n",
        supports_empty: true,
    },
    StrategyInfo {
        id: "cd.dtw",
        kind: DistanceKind::Dtw { p: 1 },
        adaptive: true,
        level: RecoveryLevel::ZeroDistance,
        extra_chars: "0",
        bound: "(2n + 2) * n + 1",
        supports_empty: false,
    },
    StrategyInfo {
        id: "cd.frechet",
        kind: DistanceKind::Frechet,
        adaptive: true,
        level: RecoveryLevel::EquivalenceClass,
        extra_chars: "0",
        bound: "2n + 1",
        supports_empty: false,
    },
];

pub fn strategy_ids() -> Vec<&'static str> {
    STRATEGIES.iter().map(|s| s.id).collect()
}

pub fn strategy_info(id: &str) -> Option<&'static StrategyInfo> {
    STRATEGIES.iter().find(|s| s.id == id)
}

/// Smallest `t` with `k * 2^t >= n`; the exact integer form of
/// `ceil(log2(n / k))`.
pub(crate) fn ceil_log2_ratio(n: usize, k: usize) -> usize {
    assert!(k >= 1);
    let mut t = 0;
    let mut v = k;
    while v < n {
        v *= 2;
        t += 1;
    }
    t
}

/// Smallest `t` with `2^t >= n`.
pub(crate) fn ceil_log2(n: usize) -> usize {
    ceil_log2_ratio(n, 1)
}

/// The query bound the strategy declares for max length `n`; `runs` is the
/// run count of the hidden input where the bound depends on it.
pub fn declared_bound(id: &str, n: usize, runs: usize) -> Option<usize> {
    let b = match id {
        "edit.adaptive.runs" => {
            let k = runs;
            let per_run = if k == 0 {
                0
            } else {
                2 * k * ceil_log2_ratio(n, k) + k
            };
            per_run + ceil_log2(n) + 3
        }
        "edit.adaptive.unit" => n + 2,
        "edit.nonadaptive.wildcard" => n + 1,
        "edit.nonadaptive.binary" => (n * n + 3 * n) / 2,
        "dtw.adaptive.half" => n + 1,
        "dtw.nonadaptive.equiv2n" => 2 * n,
        "dtw.nonadaptive.oneextra" => n * n + n,
        "dtw.nonadaptive.twoextra" => n + 2,
        "dtw.nonadaptive.fourquery" => 4,
        "frechet.nonadaptive.classes" => 2 * n - 1,
        "cd.edit" => descent::default_budget(DistanceKind::Edit, n),
        "cd.dtw" => descent::default_budget(DistanceKind::Dtw { p: 1 }, n),
        "cd.frechet" => descent::default_budget(DistanceKind::Frechet, n),
        _ => return None,
    };
    Some(b)
}

/// The query-length cap a strategy needs. Everything fits in the session
/// default except the run-count equivalence family, whose longest query has
/// length `3n - 2`.
pub fn required_query_cap(id: &str, n: usize) -> usize {
    let default = 2 * n + 4;
    match id {
        "dtw.nonadaptive.equiv2n" => default.max(3 * n),
        _ => default,
    }
}

fn session_for(
    info: &StrategyInfo,
    hidden: &Sequence,
    n: usize,
    cap_override: Option<usize>,
) -> Result<OracleSession, RecoveryError> {
    let cap = cap_override.unwrap_or_else(|| required_query_cap(info.id, n));
    let session = if info.adaptive {
        OracleSession::adaptive(hidden.clone(), info.kind, n)?
    } else {
        OracleSession::non_adaptive(hidden.clone(), info.kind, n)?
    };
    Ok(session.with_query_cap(cap))
}

fn report(
    info: &StrategyInfo,
    recovered: Sequence,
    queries_used: usize,
    n: usize,
    runs: usize,
) -> RecoveryReport {
    let declared = declared_bound(info.id, n, runs).expect("registered strategy");
    RecoveryReport {
        strategy_id: info.id.to_string(),
        recovered,
        queries_used,
        level: info.level,
        declared_bound: declared,
        bound_ok: queries_used <= declared,
    }
}

/// Runs one registered strategy against a hidden input with max length `n`.
pub fn run_strategy(
    id: &str,
    hidden: &Sequence,
    n: usize,
) -> Result<RecoveryReport, RecoveryError> {
    run_strategy_with(id, hidden, n, None)
}

/// Like [`run_strategy`] with an explicit query-length cap for the session.
pub fn run_strategy_with(
    id: &str,
    hidden: &Sequence,
    n: usize,
    cap_override: Option<usize>,
) -> Result<RecoveryReport, RecoveryError> {
    let info = strategy_info(id).ok_or_else(|| RecoveryError::UnknownStrategy(id.to_string()))?;
    if hidden.is_empty() && !info.supports_empty {
        return Err(RecoveryError::EmptyHiddenUnsupported { strategy: info.id });
    }
    let runs = hidden
        .run_count()
        .map_err(|_| OracleError::HiddenNotBinary)?;
    let mut session = session_for(info, hidden, n, cap_override)?;

    let recovered = match id {
        "edit.adaptive.runs" => edit::adaptive_runs_recover(&mut session)?,
        "edit.adaptive.unit" => edit::adaptive_unit_recover(&mut session)?,
        "edit.nonadaptive.wildcard" => {
            let plan = edit::wildcard_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            edit::wildcard_decode(n, &answers)?
        }
        "edit.nonadaptive.binary" => {
            let plan = edit::binary_nonadaptive_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            edit::binary_nonadaptive_decode(n, &answers)?
        }
        "dtw.adaptive.half" => dtw::adaptive_recover(&mut session)?,
        "dtw.nonadaptive.equiv2n" => {
            let plan = dtw::equivalence_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            dtw::equivalence_recover(n, &answers)?.canonical
        }
        "dtw.nonadaptive.oneextra" => {
            let plan = dtw::one_extra_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            dtw::one_extra_decode(n, &answers)?
        }
        "dtw.nonadaptive.twoextra" => {
            let plan = dtw::two_extra_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            dtw::two_extra_decode(n, &answers)?
        }
        "dtw.nonadaptive.fourquery" => {
            let plan = dtw::four_query_plan(n);
            let answers = session.submit_plan(&plan.queries)?;
            dtw::four_query_decode(n, &answers)?
        }
        "frechet.nonadaptive.classes" => {
            let plan = frechet::plan(n);
            let answers = session.submit_plan(&plan)?;
            frechet::recover(n, &answers)?.representative
        }
        "cd.edit" | "cd.dtw" | "cd.frechet" => {
            let nb = descent::neighborhood_for(info.kind, n)?;
            let init = descent::default_init(info.kind);
            let budget = descent::default_budget(info.kind, n);
            descent::descend(&mut session, &nb, &init, budget)?
        }
        _ => return Err(RecoveryError::UnknownStrategy(id.to_string())),
    };

    Ok(report(info, recovered, session.query_count(), n, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn every_strategy_is_registered_consistently() {
        for info in STRATEGIES {
            assert!(declared_bound(info.id, 8, 3).is_some(), "{}", info.id);
            assert_eq!(strategy_info(info.id).unwrap().id, info.id);
        }
        assert!(strategy_info("edit.adaptive.zigzag").is_none());
        assert!(matches!(
            run_strategy("edit.adaptive.zigzag", &seq("0"), 4),
            Err(RecoveryError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn equivalence_queries_fit_the_raised_cap() {
        // the longest run-count query has length 3n - 2, above the default
        // session cap of 2n + 4 once n >= 7
        let n = 8;
        assert!(3 * n - 2 > 2 * n + 4);
        let r = run_strategy("dtw.nonadaptive.equiv2n", &seq("01011010"), n).unwrap();
        assert_eq!(r.queries_used, 2 * n);
        assert!(r.bound_ok);
    }

    #[test]
    fn empty_hidden_is_rejected_where_unsupported() {
        for id in [
            "dtw.adaptive.half",
            "dtw.nonadaptive.twoextra",
            "frechet.nonadaptive.classes",
            "cd.dtw",
        ] {
            assert!(matches!(
                run_strategy(id, &Sequence::empty(), 4),
                Err(RecoveryError::EmptyHiddenUnsupported { .. })
            ));
        }
        let r = run_strategy("edit.nonadaptive.wildcard", &Sequence::empty(), 4).unwrap();
        assert_eq!(r.recovered, Sequence::empty());
    }

    #[test]
    fn reports_serialize_with_level_and_bound() {
        let r = run_strategy("dtw.adaptive.half", &seq("01011"), 6).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["level"], "exact");
        assert_eq!(v["declared_bound"], 7);
        assert_eq!(v["queries_used"], 6);
        assert_eq!(v["bound_ok"], true);
    }
}
