//! Simulated distance oracle over a hidden binary sequence.
//!
//! A session enforces the query contract: alphabet validity per distance
//! kind, a configurable query-length cap, and the adaptive/non-adaptive
//! split. Non-adaptive sessions answer a full plan exactly once; adaptive
//! sessions answer one query at a time. Every answered query lands in the
//! transcript and `query_count` always equals the transcript length.

use serde::Serialize;
use serde_json::json;

use crate::distances::{dtw_distance, edit_distance, frechet_distance, DistanceError, PNorm};
use crate::rational::ExactRational;
use crate::sequence::{Sequence, Symbol};

/// Which oracle a session exposes. `Dtw { p }` uses the finite p-norm sum;
/// `Frechet` is the max-cost variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Edit,
    Dtw { p: u32 },
    Frechet,
}

impl DistanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistanceKind::Edit => "edit",
            DistanceKind::Dtw { .. } => "dtw",
            DistanceKind::Frechet => "frechet",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionMode {
    Adaptive,
    NonAdaptive,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("hidden sequence must be binary")]
    HiddenNotBinary,
    #[error("hidden sequence has length {len}, exceeding the session limit {n}")]
    HiddenTooLong { len: usize, n: usize },
    #[error(
        "query symbol `{symbol}` at position {position} is not allowed under the {kind} oracle"
    )]
    AlphabetViolation {
        kind: &'static str,
        symbol: String,
        position: usize,
    },
    #[error("query length {len} exceeds the session cap {cap}")]
    QueryTooLong { len: usize, cap: usize },
    #[error("incremental queries are not allowed on a non-adaptive session")]
    NonAdaptiveIncremental,
    #[error("plan already submitted")]
    PlanAlreadySubmitted,
    #[error("plan submission requires a non-adaptive session")]
    PlanOnAdaptiveSession,
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// A hidden input plus a distance kind, with query accounting.
pub struct OracleSession {
    hidden: Sequence,
    kind: DistanceKind,
    n: usize,
    cap: usize,
    mode: SessionMode,
    transcript: Vec<(Sequence, ExactRational)>,
    plan_submitted: bool,
}

impl OracleSession {
    pub fn adaptive(
        hidden: Sequence,
        kind: DistanceKind,
        n: usize,
    ) -> Result<OracleSession, OracleError> {
        Self::new(hidden, kind, n, SessionMode::Adaptive)
    }

    pub fn non_adaptive(
        hidden: Sequence,
        kind: DistanceKind,
        n: usize,
    ) -> Result<OracleSession, OracleError> {
        Self::new(hidden, kind, n, SessionMode::NonAdaptive)
    }

    fn new(
        hidden: Sequence,
        kind: DistanceKind,
        n: usize,
        mode: SessionMode,
    ) -> Result<OracleSession, OracleError> {
        if !hidden.is_binary() {
            return Err(OracleError::HiddenNotBinary);
        }
        if hidden.len() > n {
            return Err(OracleError::HiddenTooLong {
                len: hidden.len(),
                n,
            });
        }
        Ok(OracleSession {
            hidden,
            kind,
            n,
            cap: 2 * n + 4,
            mode,
            transcript: Vec::new(),
            plan_submitted: false,
        })
    }

    /// Overrides the default query-length cap of `2n + 4`.
    pub fn with_query_cap(mut self, cap: usize) -> OracleSession {
        self.cap = cap;
        self
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn mode(&self) -> SessionMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn query_cap(&self) -> usize {
        self.cap
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }

    pub fn transcript(&self) -> &[(Sequence, ExactRational)] {
        &self.transcript
    }

    fn validate_query(&self, q: &Sequence) -> Result<(), OracleError> {
        if q.len() > self.cap {
            return Err(OracleError::QueryTooLong {
                len: q.len(),
                cap: self.cap,
            });
        }
        for (position, sym) in q.symbols().iter().enumerate() {
            let ok = matches!(
                (self.kind, sym),
                (_, Symbol::Zero | Symbol::One)
                    | (DistanceKind::Edit, Symbol::Wildcard)
                    | (
                        DistanceKind::Dtw { .. } | DistanceKind::Frechet,
                        Symbol::Frac(_)
                    )
            );
            if !ok {
                return Err(OracleError::AlphabetViolation {
                    kind: self.kind.name(),
                    symbol: match sym {
                        Symbol::Wildcard => "W".to_string(),
                        Symbol::Frac(v) => v.to_string(),
                        _ => unreachable!(),
                    },
                    position,
                });
            }
        }
        Ok(())
    }

    fn answer(&self, q: &Sequence) -> Result<ExactRational, OracleError> {
        self.validate_query(q)?;
        let answer = match self.kind {
            DistanceKind::Edit => {
                ExactRational::from_integer(edit_distance(&self.hidden, q)? as u64)
            }
            DistanceKind::Dtw { p } => dtw_distance(&self.hidden, q, PNorm::Finite(p))?.cost,
            DistanceKind::Frechet => frechet_distance(&self.hidden, q)?,
        };
        Ok(answer)
    }

    /// Answers one query on an adaptive session.
    pub fn query(&mut self, q: &Sequence) -> Result<ExactRational, OracleError> {
        if self.mode != SessionMode::Adaptive {
            return Err(OracleError::NonAdaptiveIncremental);
        }
        let answer = self.answer(q)?;
        self.transcript.push((q.clone(), answer.clone()));
        Ok(answer)
    }

    /// Answers a full plan, in order, exactly once. The whole plan is
    /// validated before any answer is produced.
    pub fn submit_plan(&mut self, plan: &[Sequence]) -> Result<Vec<ExactRational>, OracleError> {
        if self.mode != SessionMode::NonAdaptive {
            return Err(OracleError::PlanOnAdaptiveSession);
        }
        if self.plan_submitted {
            return Err(OracleError::PlanAlreadySubmitted);
        }
        for q in plan {
            self.validate_query(q)?;
        }
        let mut answers = Vec::with_capacity(plan.len());
        for q in plan {
            let a = self.answer(q)?;
            self.transcript.push((q.clone(), a.clone()));
            answers.push(a);
        }
        self.plan_submitted = true;
        Ok(answers)
    }

    /// Transcript as JSON; `include_hidden` is turned off for adversarial
    /// replay.
    pub fn transcript_json(&self, strategy: &str, include_hidden: bool) -> serde_json::Value {
        let queries: Vec<serde_json::Value> = self
            .transcript
            .iter()
            .map(|(q, a)| json!({ "seq": q.to_string(), "answer": a.to_string() }))
            .collect();
        let mut v = json!({
            "strategy": strategy,
            "distance": self.kind.name(),
            "n": self.n,
            "queries": queries,
        });
        if include_hidden {
            v["hidden"] = json!(self.hidden.to_string());
        }
        v
    }
}

/// How much a strategy promises about its output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryLevel {
    Exact,
    EquivalenceClass,
    ZeroDistance,
}

/// Outcome of one strategy run against one hidden input.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub strategy_id: String,
    pub recovered: Sequence,
    pub queries_used: usize,
    pub level: RecoveryLevel,
    pub declared_bound: usize,
    pub bound_ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    fn rat(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn answers_reference_queries() {
        let mut s = OracleSession::adaptive(seq("0101"), DistanceKind::Edit, 8).unwrap();
        assert_eq!(s.query(&Sequence::empty()).unwrap(), rat("4"));

        let mut s = OracleSession::adaptive(seq("010110"), DistanceKind::Dtw { p: 1 }, 8).unwrap();
        assert_eq!(s.query(&seq("010")).unwrap(), rat("1"));

        let mut s = OracleSession::adaptive(seq("1"), DistanceKind::Frechet, 4).unwrap();
        assert_eq!(s.query(&seq("11")).unwrap(), rat("0"));
        assert_eq!(s.query_count(), 1);
        assert_eq!(s.transcript().len(), 1);
    }

    #[test]
    fn alphabet_contract_per_kind() {
        let mut s = OracleSession::adaptive(seq("01"), DistanceKind::Edit, 4).unwrap();
        assert!(matches!(
            s.query(&seq("1/2")),
            Err(OracleError::AlphabetViolation { kind: "edit", .. })
        ));
        assert!(s.query(&seq("1,W")).is_ok());

        let mut s = OracleSession::adaptive(seq("01"), DistanceKind::Dtw { p: 1 }, 4).unwrap();
        assert!(matches!(
            s.query(&seq("1,W")),
            Err(OracleError::AlphabetViolation { kind: "dtw", .. })
        ));
        assert!(s.query(&seq("1/2")).is_ok());
        // failed queries never count
        assert_eq!(s.query_count(), 1);
    }

    #[test]
    fn query_cap_is_enforced_and_configurable() {
        let mut s = OracleSession::adaptive(seq("0"), DistanceKind::Edit, 2).unwrap();
        assert!(matches!(
            s.query(&seq("010101010")),
            Err(OracleError::QueryTooLong { cap: 8, .. })
        ));
        let mut s = OracleSession::adaptive(seq("0"), DistanceKind::Edit, 2)
            .unwrap()
            .with_query_cap(9);
        assert!(s.query(&seq("010101010")).is_ok());
    }

    #[test]
    fn non_adaptive_contract() {
        let plan = vec![Sequence::empty(), seq("0"), seq("01")];
        let mut s = OracleSession::non_adaptive(seq("0101"), DistanceKind::Edit, 6).unwrap();
        assert!(matches!(
            s.query(&seq("0")),
            Err(OracleError::NonAdaptiveIncremental)
        ));
        let answers = s.submit_plan(&plan).unwrap();
        assert_eq!(answers, vec![rat("4"), rat("3"), rat("2")]);
        assert_eq!(s.query_count(), 3);
        assert!(matches!(
            s.submit_plan(&plan),
            Err(OracleError::PlanAlreadySubmitted)
        ));

        let mut s = OracleSession::adaptive(seq("0101"), DistanceKind::Edit, 6).unwrap();
        assert!(matches!(
            s.submit_plan(&plan),
            Err(OracleError::PlanOnAdaptiveSession)
        ));
    }

    #[test]
    fn hidden_validation() {
        assert!(matches!(
            OracleSession::adaptive(seq("1/2"), DistanceKind::Dtw { p: 1 }, 4),
            Err(OracleError::HiddenNotBinary)
        ));
        assert!(matches!(
            OracleSession::adaptive(seq("01010"), DistanceKind::Edit, 4),
            Err(OracleError::HiddenTooLong { len: 5, n: 4 })
        ));
    }

    #[test]
    fn empty_hidden_under_dtw_is_a_domain_error() {
        let mut s =
            OracleSession::adaptive(Sequence::empty(), DistanceKind::Dtw { p: 1 }, 4).unwrap();
        assert!(matches!(
            s.query(&seq("0")),
            Err(OracleError::Distance(DistanceError::EmptyOperand))
        ));
    }

    #[test]
    fn transcript_serialization() {
        let mut s = OracleSession::adaptive(seq("01011"), DistanceKind::Dtw { p: 1 }, 6).unwrap();
        s.query(&seq("1/2")).unwrap();
        let v = s.transcript_json("dtw.adaptive.half", true);
        assert_eq!(v["hidden"], "01011");
        assert_eq!(v["queries"][0]["answer"], "5/2");
        let v = s.transcript_json("dtw.adaptive.half", false);
        assert!(v.get("hidden").is_none());
    }
}
