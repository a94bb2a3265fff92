//! Zeroth-order local search over query space: repeatedly move to any
//! neighbor at strictly smaller distance until the oracle answers zero.
//!
//! Neighborhoods are deterministic, pure functions of the current query.
//! The move rule is first-improvement in the enumeration order below. The
//! guarantee is zero distance to the hidden input; for the edit oracle that
//! already means exact recovery, and for the Frechet oracle the same
//! equivalence class.

use crate::oracle::{DistanceKind, OracleSession, SessionMode};
use crate::rational::ExactRational;
use crate::recovery::RecoveryError;
use crate::sequence::Sequence;

/// Candidate generator for one distance kind; bounded by the query-length
/// cap `2n + 4`.
#[derive(Clone, Copy, Debug)]
pub struct Neighborhood {
    kind: DistanceKind,
    n: usize,
    cap: usize,
}

/// Neighborhoods for the three supported oracles. Edit: all single-edit
/// rewrites. DTW and Frechet: the `2n` alternating sequences of length up
/// to `n`.
///
/// Run-edit moves (attach or drop a run at either end) do not work for
/// DTW: the zero set of the loss is exactly the condensed-expression class
/// of the input, every query outside it costs at least 1, and from e.g.
/// query `0` against input `010` all run-moves stay at distance 1, so no
/// strictly improving step exists. Enumerating the alternating sequences
/// always offers the input's condensed expression itself at distance zero.
pub fn neighborhood_for(kind: DistanceKind, n: usize) -> Result<Neighborhood, RecoveryError> {
    Ok(Neighborhood {
        kind,
        n,
        cap: 2 * n + 4,
    })
}

impl Neighborhood {
    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    /// Upper bound on the number of candidates per step.
    pub fn size_bound(&self) -> usize {
        match self.kind {
            DistanceKind::Edit => 3 * self.n + 2,
            DistanceKind::Dtw { .. } | DistanceKind::Frechet => 2 * self.n,
        }
    }

    /// Deterministic candidate list for the current query.
    pub fn candidates(&self, q: &Sequence) -> Vec<Sequence> {
        match self.kind {
            DistanceKind::Edit => self.edit_candidates(q),
            DistanceKind::Dtw { .. } | DistanceKind::Frechet => (1..=self.n)
                .flat_map(|len| [Sequence::alternating(0, len), Sequence::alternating(1, len)])
                .filter(|c| c != q)
                .collect(),
        }
    }

    fn edit_candidates(&self, q: &Sequence) -> Vec<Sequence> {
        let bits = q.as_bits().expect("descent queries stay binary");
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut push = |candidate: Vec<u8>| {
            if candidate.len() <= self.cap {
                let s = Sequence::from_bits(&candidate);
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        };
        for i in 0..bits.len() {
            let mut c = bits.clone();
            c.remove(i);
            push(c);
        }
        for i in 0..bits.len() {
            let mut c = bits.clone();
            c[i] ^= 1;
            push(c);
        }
        for i in 0..=bits.len() {
            for b in [0u8, 1u8] {
                let mut c = bits.clone();
                c.insert(i, b);
                push(c);
            }
        }
        out
    }
}

/// Default starting query: the empty sequence for edit (distance equals the
/// hidden length), the single character `0` for the warping oracles, where
/// the empty query is undefined.
pub fn default_init(kind: DistanceKind) -> Sequence {
    match kind {
        DistanceKind::Edit => Sequence::empty(),
        _ => Sequence::from_bits(&[0]),
    }
}

/// Total oracle-call budgets: at most `n` improving moves of at least one
/// each (edit/DTW answers are integers bounded by `n`), times the
/// neighborhood size, plus the initial query. The Frechet loss is 0/1, so
/// one scan of the `2n` representatives suffices.
pub fn default_budget(kind: DistanceKind, n: usize) -> usize {
    match kind {
        DistanceKind::Edit => (3 * n + 2) * n,
        DistanceKind::Dtw { .. } => (2 * n + 2) * n + 1,
        DistanceKind::Frechet => 2 * n + 1,
    }
}

/// Runs the descent until the oracle answers zero, returning the final
/// query. Errors if some positive-distance query has no improving neighbor
/// or if the budget runs out.
pub fn descend(
    session: &mut OracleSession,
    neighborhood: &Neighborhood,
    init: &Sequence,
    budget: usize,
) -> Result<Sequence, RecoveryError> {
    if session.mode() != SessionMode::Adaptive {
        return Err(RecoveryError::SessionMismatch {
            strategy: "cd",
            expected: "adaptive",
        });
    }
    if session.kind() != neighborhood.kind() {
        return Err(RecoveryError::SessionMismatch {
            strategy: "cd",
            expected: "matching distance kind",
        });
    }
    let ask = |session: &mut OracleSession, q: &Sequence| -> Result<ExactRational, RecoveryError> {
        if session.query_count() >= budget {
            return Err(RecoveryError::BudgetExhausted { budget });
        }
        Ok(session.query(q)?)
    };
    let mut current = init.clone();
    let mut current_d = ask(session, &current)?;
    while !current_d.is_zero() {
        let mut moved = false;
        for cand in neighborhood.candidates(&current) {
            let d = ask(session, &cand)?;
            if d < current_d {
                current = cand;
                current_d = d;
                moved = true;
                break;
            }
        }
        if !moved {
            return Err(RecoveryError::DescentStuck { query: current });
        }
    }
    Ok(current)
}
