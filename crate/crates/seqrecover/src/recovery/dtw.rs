//! DTW recovery: the adaptive half-character strategy, the binary
//! equivalence-class plan, and three exact non-adaptive plans using one,
//! two, or O(n) extra characters.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::distances::{dtw_distance, Matching, PNorm};
use crate::oracle::{DistanceKind, OracleSession, SessionMode};
use crate::rational::ExactRational;
use crate::recovery::{adversarial, answer_usize, expect_answers, RecoveryError};
use crate::sequence::{all_binary_up_to, Sequence, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DtwPlanVariant {
    Equivalence2n,
    OneExtra,
    TwoExtra,
    FourQueryBigAlpha,
}

/// A non-adaptive DTW query plan; a pure function of `n` (plus explicit
/// parameters for the parameterized families).
#[derive(Clone, Debug)]
pub struct DtwQueryPlan {
    pub variant: DtwPlanVariant,
    pub queries: Vec<Sequence>,
    pub params: DtwPlanParams,
}

#[derive(Clone, Debug)]
pub enum DtwPlanParams {
    None,
    TwoExtra(TwoExtraParams),
    FourQuery(FourQueryParams),
}

fn dtw1(x: &Sequence, y: &Sequence) -> Result<ExactRational, RecoveryError> {
    Ok(dtw_distance(x, y, PNorm::Finite(1))?.cost)
}

fn half_symbol() -> Symbol {
    Symbol::frac_parts(1, 2).expect("1/2 is a valid fraction")
}

// ---------------------------------------------------------------------------
// Adaptive strategy with the single extra character 1/2
// ---------------------------------------------------------------------------

/// Exact adaptive recovery in at most `len + 1 <= n + 1` queries. The
/// single-character query `1/2` reveals the length; afterwards each query
/// extends the known prefix by a repeat of its last character and pads with
/// `1/2`, and the answer hitting its floor decides whether the next
/// character repeats. Requires a non-empty hidden input.
pub fn adaptive_recover(session: &mut OracleSession) -> Result<Sequence, RecoveryError> {
    if session.kind() != (DistanceKind::Dtw { p: 1 }) || session.mode() != SessionMode::Adaptive {
        return Err(RecoveryError::SessionMismatch {
            strategy: "dtw.adaptive.half",
            expected: "adaptive dtw (p = 1)",
        });
    }
    let n = session.n();
    let half = half_symbol();

    let a = session.query(&Sequence::new(vec![half.clone()]))?;
    let len = (&a + &a)
        .to_usize()
        .ok_or_else(|| adversarial(format!("length answer {a} is not half-integral")))?;
    if len == 0 || len > n {
        return Err(adversarial(format!(
            "claimed length {len} is outside 1..={n}"
        )));
    }

    let mut bits: Vec<u8> = Vec::with_capacity(len);
    // decide s[0] with 0 (1/2)^(len-1)
    let mut q: Vec<Symbol> = vec![Symbol::Zero];
    q.extend(std::iter::repeat_n(half.clone(), len - 1));
    let floor = ExactRational::half(len as u64 - 1);
    let ans = session.query(&Sequence::new(q))?;
    if ans < floor {
        return Err(adversarial(format!("answer {ans} below its floor {floor}")));
    }
    bits.push(u8::from(ans != floor));

    for k in 1..len {
        let mut q: Vec<Symbol> = bits.iter().map(|&b| Symbol::bit(b)).collect();
        q.push(Symbol::bit(bits[k - 1]));
        q.extend(std::iter::repeat_n(half.clone(), len - k - 1));
        let floor = ExactRational::half((len - k - 1) as u64);
        let ans = session.query(&Sequence::new(q))?;
        if ans < floor {
            return Err(adversarial(format!("answer {ans} below its floor {floor}")));
        }
        let repeat = ans == floor;
        bits.push(if repeat { bits[k - 1] } else { 1 - bits[k - 1] });
    }
    Ok(Sequence::from_bits(&bits))
}

// ---------------------------------------------------------------------------
// Equivalence-class recovery from binary queries
// ---------------------------------------------------------------------------

/// All input sequences indistinguishable from one another by binary DTW
/// queries; identified by the lexicographically smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClassId {
    pub canonical: Sequence,
}

fn run_count_query(start: u8, i: usize, n: usize) -> Sequence {
    // the i-run query of one family: for i = 1 the single character, else
    // heavy first and last blocks of length n around an alternating core
    debug_assert!((1..=n).contains(&i));
    let other = 1 - start;
    if i == 1 {
        return Sequence::from_bits(&[start]);
    }
    let mut bits = vec![start; n];
    if i.is_multiple_of(2) {
        let m = i / 2;
        for j in 0..2 * (m - 1) {
            bits.push(if j % 2 == 0 { other } else { start });
        }
        bits.extend(std::iter::repeat_n(other, n));
    } else {
        let m = (i - 1) / 2;
        bits.push(other);
        for j in 0..2 * (m - 1) {
            bits.push(if j % 2 == 0 { start } else { other });
        }
        bits.extend(std::iter::repeat_n(start, n));
    }
    Sequence::from_bits(&bits)
}

/// The 2n-query plan: for each run count `i` in `1..=n`, one query starting
/// with 0 and one starting with 1. The `i = 1` queries are the single
/// characters `0` and `1`; larger `i` pad the first and last runs to length
/// `n`. Plan order: the 0-start family for `i = 1..=n`, then the 1-start
/// family.
pub fn equivalence_plan(n: usize) -> DtwQueryPlan {
    let mut queries = Vec::with_capacity(2 * n);
    for start in [0u8, 1u8] {
        for i in 1..=n {
            queries.push(run_count_query(start, i, n));
        }
    }
    DtwQueryPlan {
        variant: DtwPlanVariant::Equivalence2n,
        queries,
        params: DtwPlanParams::None,
    }
}

struct SignatureTable {
    classes: Vec<Vec<Sequence>>,
    by_signature: HashMap<Vec<u64>, usize>,
    by_member: HashMap<Sequence, usize>,
}

fn signature_of(s: &Sequence, plan: &[Sequence]) -> Vec<u64> {
    plan.iter()
        .map(|q| {
            dtw_distance(s, q, PNorm::Finite(1))
                .expect("binary non-empty inputs")
                .cost
                .to_u64()
                .expect("binary DTW distances are integers")
        })
        .collect()
}

fn signature_table(n: usize) -> Arc<SignatureTable> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SignatureTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("signature cache poisoned");
    if let Some(t) = guard.get(&n) {
        return Arc::clone(t);
    }
    let plan = equivalence_plan(n);
    let mut groups: HashMap<Vec<u64>, Vec<Sequence>> = HashMap::new();
    for s in all_binary_up_to(1, n) {
        groups
            .entry(signature_of(&s, &plan.queries))
            .or_default()
            .push(s);
    }
    let mut entries: Vec<(Vec<u64>, Vec<Sequence>)> = groups.into_iter().collect();
    for (_, members) in entries.iter_mut() {
        members.sort();
    }
    entries.sort_by(|a, b| a.1[0].cmp(&b.1[0]));
    let mut table = SignatureTable {
        classes: Vec::with_capacity(entries.len()),
        by_signature: HashMap::new(),
        by_member: HashMap::new(),
    };
    for (idx, (sig, members)) in entries.into_iter().enumerate() {
        table.by_signature.insert(sig, idx);
        for m in &members {
            table.by_member.insert(m.clone(), idx);
        }
        table.classes.push(members);
    }
    let table = Arc::new(table);
    guard.insert(n, Arc::clone(&table));
    table
}

/// Looks the observed answer vector up in the signature table built from
/// all non-empty binary inputs of length at most `n`.
pub fn equivalence_recover(
    n: usize,
    answers: &[ExactRational],
) -> Result<EquivalenceClassId, RecoveryError> {
    expect_answers(answers, 2 * n)?;
    let sig: Vec<u64> = answers
        .iter()
        .map(|a| {
            a.to_u64()
                .ok_or_else(|| adversarial(format!("non-integer answer {a} to a binary query")))
        })
        .collect::<Result<_, _>>()?;
    let table = signature_table(n);
    let idx = *table
        .by_signature
        .get(&sig)
        .ok_or_else(|| adversarial("answer vector matches no input signature"))?;
    Ok(EquivalenceClassId {
        canonical: table.classes[idx][0].clone(),
    })
}

/// The class a concrete input belongs to.
pub fn equivalence_class_of(n: usize, s: &Sequence) -> Result<EquivalenceClassId, RecoveryError> {
    let table = signature_table(n);
    let idx = *table
        .by_member
        .get(s)
        .ok_or_else(|| RecoveryError::Precondition {
            detail: format!("`{s}` is not a non-empty binary sequence of length <= {n}"),
        })?;
    Ok(EquivalenceClassId {
        canonical: table.classes[idx][0].clone(),
    })
}

/// The full partition induced by the 2n-query signatures, sorted by
/// canonical member.
pub fn equivalence_partition(n: usize) -> Vec<Vec<Sequence>> {
    signature_table(n).classes.clone()
}

// ---------------------------------------------------------------------------
// Exact recovery with one extra character
// ---------------------------------------------------------------------------

fn one_extra_query(start: u8, i: usize, k: usize) -> Sequence {
    let mut q = Sequence::alternating(start, i);
    for _ in 0..k {
        q.push(half_symbol());
    }
    q
}

fn one_extra_index(n: usize, start: u8, i: usize, k: usize) -> usize {
    // plan order: 0-start family for i = 1..=n, k = 0..=n-i, then the
    // 1-start family
    let family = if start == 0 { 0 } else { n * (n + 1) / 2 };
    let before_i = (i - 1) * (n + 1) - (i - 1) * i / 2;
    family + before_i + k
}

/// The `n^2 + n` one-extra-character queries: every alternating prefix of
/// length `i` with a `(1/2)^k` tail, `1 <= i <= n`, `0 <= k <= n - i`, for
/// both starting characters.
pub fn one_extra_plan(n: usize) -> DtwQueryPlan {
    let mut queries = Vec::with_capacity(n * n + n);
    for start in [0u8, 1u8] {
        for i in 1..=n {
            for k in 0..=(n - i) {
                queries.push(one_extra_query(start, i, k));
            }
        }
    }
    debug_assert_eq!(queries.len(), n * n + n);
    DtwQueryPlan {
        variant: DtwPlanVariant::OneExtra,
        queries,
        params: DtwPlanParams::None,
    }
}

/// Decodes the one-extra plan. The zero answer among the tail-free queries
/// pins the start character and run count; the smallest `k` with answer
/// `k/2` at prefix length `i` equals the total length of the runs after the
/// i-th; the first run length is the unique value consistent with the whole
/// answer vector.
pub fn one_extra_decode(n: usize, answers: &[ExactRational]) -> Result<Sequence, RecoveryError> {
    expect_answers(answers, n * n + n)?;

    let mut condensed_hits = Vec::new();
    for start in [0u8, 1u8] {
        for i in 1..=n {
            if answers[one_extra_index(n, start, i, 0)].is_zero() {
                condensed_hits.push((start, i));
            }
        }
    }
    let (start, t) = match condensed_hits.as_slice() {
        [one] => *one,
        [] => {
            return Err(adversarial(
                "no zero answer identifies the condensed expression",
            ))
        }
        _ => return Err(adversarial("multiple zero answers among tail-free queries")),
    };

    // suffix run-length sums
    let mut suffix = Vec::with_capacity(t);
    for i in 1..=t {
        let mut found = None;
        for k in 0..=(n - i) {
            if answers[one_extra_index(n, start, i, k)] == ExactRational::half(k as u64) {
                found = Some(k);
                break;
            }
        }
        let s_i = found.ok_or_else(|| {
            adversarial(format!("no answer reaches its floor at prefix length {i}"))
        })?;
        suffix.push(s_i);
    }
    if suffix[t - 1] != 0 {
        return Err(adversarial("suffix sum at the full run count is not zero"));
    }
    let mut rest_runs = Vec::with_capacity(t.saturating_sub(1));
    for i in 1..t {
        let l = suffix[i - 1]
            .checked_sub(suffix[i])
            .filter(|&l| l >= 1)
            .ok_or_else(|| adversarial("suffix sums are not strictly decreasing"))?;
        rest_runs.push(l);
    }

    // first run length by consistency filtering against the full vector
    let plan = one_extra_plan(n);
    let tail_total = suffix[0];
    let mut matches = Vec::new();
    for first_len in 1..=(n - tail_total) {
        let mut bits = Vec::with_capacity(first_len + tail_total);
        bits.extend(std::iter::repeat_n(start, first_len));
        let mut bit = 1 - start;
        for &l in &rest_runs {
            bits.extend(std::iter::repeat_n(bit, l));
            bit = 1 - bit;
        }
        let cand = Sequence::from_bits(&bits);
        let consistent = plan
            .queries
            .iter()
            .zip(answers)
            .all(|(q, a)| dtw1(&cand, q).map(|d| d == *a).unwrap_or(false));
        if consistent {
            matches.push(cand);
        }
    }
    match matches.len() {
        1 => Ok(matches.pop().unwrap()),
        0 => Err(adversarial(
            "no first-run length reproduces the observed answers",
        )),
        k => Err(RecoveryError::AmbiguousCandidates {
            detail: format!("{k} first-run lengths match the answer vector"),
        }),
    }
}

// ---------------------------------------------------------------------------
// Exact recovery with two extra characters
// ---------------------------------------------------------------------------

/// The two fractional characters of the monotone query family. Defaults to
/// `a = 1/3`, `b = 2/5`; any pair with `0 < b - a < a < b < 1/2` and
/// coprime denominators works, and the decoder generalizes accordingly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoExtraParams {
    pub a: ExactRational,
    pub b: ExactRational,
}

impl TwoExtraParams {
    pub fn new(a: ExactRational, b: ExactRational) -> Result<TwoExtraParams, RecoveryError> {
        let half = ExactRational::new(1, 2);
        let diff = &b - &a;
        let ordered = !diff.is_zero()
            && !diff.is_negative()
            && diff < a
            && a < b
            && b < half
            && !a.is_negative()
            && !a.is_zero();
        if !ordered {
            return Err(RecoveryError::Precondition {
                detail: format!("characters must satisfy 0 < b-a < a < b < 1/2, got a={a}, b={b}"),
            });
        }
        if a.denom().gcd(b.denom()) != BigInt::from(1) {
            return Err(RecoveryError::Precondition {
                detail: format!("denominators of a={a} and b={b} must be coprime"),
            });
        }
        Ok(TwoExtraParams { a, b })
    }

    pub fn standard() -> TwoExtraParams {
        TwoExtraParams::new(ExactRational::new(1, 3), ExactRational::new(2, 5))
            .expect("standard characters are valid")
    }

    fn residues(&self) -> (BigInt, BigInt, BigInt) {
        // scaling by denom(a)*denom(b), the per-position answer difference
        // is determined modulo denom(b)
        let qa = self.a.denom().clone();
        let qb = self.b.denom().clone();
        let pb = self.b.numer().clone();
        let zero_residue = (&pb * &qa).mod_floor(&qb);
        let one_residue = ((&qb - &pb) * &qa).mod_floor(&qb);
        debug_assert_ne!(zero_residue, one_residue);
        (qb, zero_residue, one_residue)
    }
}

/// The `n + 2` two-extra queries: `a^(n-i) b^i` for `i = 1..=n`, then the
/// single characters `0` and `1`.
pub fn two_extra_plan(n: usize) -> DtwQueryPlan {
    two_extra_plan_with(n, TwoExtraParams::standard())
}

pub fn two_extra_plan_with(n: usize, params: TwoExtraParams) -> DtwQueryPlan {
    let a = Symbol::frac(params.a.clone()).expect("validated character");
    let b = Symbol::frac(params.b.clone()).expect("validated character");
    let mut queries = Vec::with_capacity(n + 2);
    for i in 1..=n {
        let mut q = vec![a.clone(); n - i];
        q.extend(std::iter::repeat_n(b.clone(), i));
        queries.push(Sequence::new(q));
    }
    queries.push(Sequence::from_bits(&[0]));
    queries.push(Sequence::from_bits(&[1]));
    DtwQueryPlan {
        variant: DtwPlanVariant::TwoExtra,
        queries,
        params: DtwPlanParams::TwoExtra(params),
    }
}

pub fn two_extra_decode(n: usize, answers: &[ExactRational]) -> Result<Sequence, RecoveryError> {
    two_extra_decode_with(n, &TwoExtraParams::standard(), answers)
}

/// Decodes the two-extra plan: recover the matched string (the input with
/// its leftmost 0 amplified to full query length) from scaled residues of
/// consecutive answer differences, then drop the surplus zeros.
pub fn two_extra_decode_with(
    n: usize,
    params: &TwoExtraParams,
    answers: &[ExactRational],
) -> Result<Sequence, RecoveryError> {
    expect_answers(answers, n + 2)?;
    let ones = answer_usize(&answers[n], "count of ones")?;
    let zeros = answer_usize(&answers[n + 1], "count of zeros")?;
    if answers[n].is_zero() {
        return Ok(Sequence::run(Symbol::Zero, zeros));
    }
    if answers[n + 1].is_zero() {
        return Ok(Sequence::run(Symbol::One, ones));
    }

    let len = ones + zeros;
    if len > n {
        return Err(adversarial(format!(
            "character counts total {len}, exceeding n={n}"
        )));
    }
    let (modulus, zero_residue, one_residue) = params.residues();
    let scale = ExactRational::from_bigint(params.a.denom() * params.b.denom());

    // matched string, decoded back to front
    let mut matched = vec![0u8; n];
    let mut prev = ExactRational::zero();
    for i in 1..=n {
        let delta = &answers[i - 1] - &prev;
        prev = answers[i - 1].clone();
        let scaled = (&delta * &scale).to_integer().ok_or_else(|| {
            adversarial(format!("scaled answer difference {delta} is not integral"))
        })?;
        let residue = scaled.mod_floor(&modulus);
        matched[n - i] = if residue == zero_residue {
            0
        } else if residue == one_residue {
            1
        } else {
            return Err(adversarial(format!(
                "residue {residue} at position {} matches neither character",
                n - i
            )));
        };
    }

    let matched_ones = matched.iter().filter(|&&b| b == 1).count();
    if matched_ones != ones {
        return Err(adversarial(format!(
            "matched string has {matched_ones} ones, counts say {ones}"
        )));
    }
    let first_zero = matched
        .iter()
        .position(|&b| b == 0)
        .expect("a zero exists because the input contains one");
    let surplus = n - len;
    if matched[first_zero..first_zero + surplus]
        .iter()
        .any(|&b| b != 0)
    {
        return Err(adversarial(
            "amplified zero block is shorter than the length surplus",
        ));
    }
    let mut bits = Vec::with_capacity(len);
    bits.extend_from_slice(&matched[..first_zero]);
    bits.extend_from_slice(&matched[first_zero + surplus..]);
    debug_assert_eq!(bits.len(), len);
    Ok(Sequence::from_bits(&bits))
}

// ---------------------------------------------------------------------------
// Four queries over an O(n)-character alphabet
// ---------------------------------------------------------------------------

/// Per-position prime and numerator of the big-alphabet plan, in the order
/// the fractions appear in the increasing query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourQueryParams {
    pub entries: Vec<(u64, u64)>,
}

fn first_odd_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut cand = 3u64;
    while primes.len() < n {
        if (2..=cand.isqrt()).all(|d| !cand.is_multiple_of(d)) {
            primes.push(cand);
        }
        cand += 2;
    }
    primes
}

/// The four queries: `0`, `1`, the increasing sequence of fractions
/// `x_i / p_i` over the first `n` odd primes with `1/4 < x_i/p_i < 1/2`,
/// and its reflection about 1. Every character has O(log n) bit
/// complexity.
pub fn four_query_plan(n: usize) -> DtwQueryPlan {
    let primes = first_odd_primes(n);
    let mut entries: Vec<(u64, u64)> = primes
        .into_iter()
        .map(|p| {
            let x = p / 4 + 1; // smallest numerator with 1/4 < x/p < 1/2
            (p, x)
        })
        .collect();
    entries.sort_by(|(p1, x1), (p2, x2)| (x1 * p2).cmp(&(x2 * p1)));
    let ascending: Vec<Symbol> = entries
        .iter()
        .map(|&(p, x)| Symbol::frac_parts(x as i64, p as i64).expect("0 < x/p < 1"))
        .collect();
    let reflected: Vec<Symbol> = entries
        .iter()
        .map(|&(p, x)| Symbol::frac_parts((p - x) as i64, p as i64).expect("0 < (p-x)/p < 1"))
        .collect();
    let queries = vec![
        Sequence::from_bits(&[0]),
        Sequence::from_bits(&[1]),
        Sequence::new(ascending),
        Sequence::new(reflected),
    ];
    DtwQueryPlan {
        variant: DtwPlanVariant::FourQueryBigAlpha,
        queries,
        params: DtwPlanParams::FourQuery(FourQueryParams { entries }),
    }
}

/// Reads the matched string of one monotone query out of the answer's
/// numerator residues; `flip` selects the reflected query's cost pattern.
fn matched_string_from_answer(
    answer: &ExactRational,
    entries: &[(u64, u64)],
    flip: bool,
) -> Result<Vec<u8>, RecoveryError> {
    let prime_product: BigInt = entries.iter().map(|&(p, _)| BigInt::from(p)).product();
    if answer.denom() != &prime_product {
        return Err(adversarial(format!(
            "answer {answer} does not have the full prime product as denominator"
        )));
    }
    let numer = answer.numer();
    let mut out = Vec::with_capacity(entries.len());
    for &(p, x) in entries {
        let others = entries
            .iter()
            .filter(|&&(q, _)| q != p)
            .fold(1u64, |acc, &(q, _)| {
                (acc as u128 * q as u128 % p as u128) as u64
            });
        let low = x % p;
        let high = (p - x) % p;
        let (res_zero, res_one) = if flip { (high, low) } else { (low, high) };
        let r0 = (res_zero as u128 * others as u128 % p as u128) as u64;
        let r1 = (res_one as u128 * others as u128 % p as u128) as u64;
        let um = numer
            .mod_floor(&BigInt::from(p))
            .to_u64()
            .expect("residue fits");
        out.push(if um == r0 {
            0
        } else if um == r1 {
            1
        } else {
            return Err(adversarial(format!(
                "numerator residue {um} mod {p} matches neither character value"
            )));
        });
    }
    Ok(out)
}

fn blocks(bits: &[u8]) -> Vec<(u8, usize)> {
    let mut out: Vec<(u8, usize)> = Vec::new();
    for &b in bits {
        match out.last_mut() {
            Some((c, l)) if *c == b => *l += 1,
            _ => out.push((b, 1)),
        }
    }
    out
}

/// Decodes the four-query plan: the matched strings of the two monotone
/// queries are expansions of the input in which ones (respectively zeros)
/// keep their exact multiplicities; interleaving their blocks rebuilds the
/// input.
pub fn four_query_decode(n: usize, answers: &[ExactRational]) -> Result<Sequence, RecoveryError> {
    expect_answers(answers, 4)?;
    let ones = answer_usize(&answers[0], "count of ones")?;
    let zeros = answer_usize(&answers[1], "count of zeros")?;
    if answers[0].is_zero() {
        return Ok(Sequence::run(Symbol::Zero, zeros));
    }
    if answers[1].is_zero() {
        return Ok(Sequence::run(Symbol::One, ones));
    }

    let plan = four_query_plan(n);
    let DtwPlanParams::FourQuery(params) = &plan.params else {
        unreachable!("four-query plan carries its parameters")
    };
    let m = matched_string_from_answer(&answers[2], &params.entries, false)?;
    let m_ref = matched_string_from_answer(&answers[3], &params.entries, true)?;

    let mb = blocks(&m);
    let rb = blocks(&m_ref);
    if mb.len() != rb.len() || mb.iter().zip(&rb).any(|((c1, _), (c2, _))| c1 != c2) {
        return Err(adversarial("matched strings disagree on block structure"));
    }
    let mut bits = Vec::new();
    for (i, &(c, len)) in mb.iter().enumerate() {
        let take = if c == 1 { len } else { rb[i].1 };
        bits.extend(std::iter::repeat_n(c, take));
    }
    if bits.len() > n {
        return Err(adversarial("reconstructed input exceeds the length limit"));
    }
    let got_ones = bits.iter().filter(|&&b| b == 1).count();
    if got_ones != ones || bits.len() - got_ones != zeros {
        return Err(adversarial(
            "reconstructed character counts disagree with the count queries",
        ));
    }
    Ok(Sequence::from_bits(&bits))
}

// ---------------------------------------------------------------------------
// Explicit near-optimal matchings and the shifting operation
// ---------------------------------------------------------------------------

/// The explicit optimal matching between the i-th monotone query (length
/// `n`) and an input containing both characters: positions before the first
/// zero match one-to-one, the first zero absorbs the whole length surplus,
/// and the remainder matches one-to-one. The edge set does not depend on
/// `i`, which is what makes the family's matchings isomorphic.
pub fn build_isomorphic_matching(
    s: &Sequence,
    i: usize,
    n: usize,
) -> Result<Matching, RecoveryError> {
    let bits = s.as_bits().ok_or_else(|| RecoveryError::Precondition {
        detail: "input must be binary".to_string(),
    })?;
    let len = bits.len();
    if !(1..=n).contains(&i) || len > n || len == 0 {
        return Err(RecoveryError::Precondition {
            detail: format!("need 1 <= i <= n and 1 <= len(s) <= n, got i={i}, len={len}, n={n}"),
        });
    }
    let first_zero = bits.iter().position(|&b| b == 0);
    let has_one = bits.contains(&1);
    let (Some(u), true) = (first_zero, has_one) else {
        return Err(RecoveryError::Precondition {
            detail: "input must contain both a 0 and a 1".to_string(),
        });
    };
    let surplus = n - len;
    let mut edges = Vec::with_capacity(n);
    for j in 0..u {
        edges.push((j, j));
    }
    for j in u..=u + surplus {
        edges.push((j, u));
    }
    for j in (u + surplus + 1)..n {
        edges.push((j, j - surplus));
    }
    Ok(Matching::new(edges))
}

/// Every matching obtainable from `m` by one shifting operation: move one
/// edge off a zero of degree greater than one onto a later zero, with all
/// input positions strictly between them having degree one.
pub fn enumerate_shifts(m: &Matching, s: &Sequence) -> Vec<Matching> {
    let Some(bits) = s.as_bits() else {
        return Vec::new();
    };
    let len = bits.len();
    let deg = m.input_degrees(len);
    let mut out = Vec::new();
    for x in 0..len {
        if bits[x] != 0 || deg[x] <= 1 {
            continue;
        }
        for (y, &bit_y) in bits.iter().enumerate().skip(x + 1) {
            if (x + 1..y).any(|j| deg[j] != 1) {
                continue;
            }
            if bit_y != 0 {
                continue;
            }
            // last query index matched to x; the corridor between x and y
            // is one-to-one, so shifting moves each corridor edge one
            // input position to the right
            let Some(z) = m
                .edges()
                .iter()
                .filter(|&&(_, j)| j == x)
                .map(|&(i, _)| i)
                .max()
            else {
                continue;
            };
            let mut edges: Vec<(usize, usize)> = m.edges().to_vec();
            let mut ok = true;
            for j in x..y {
                let old = (z + (j - x), j);
                let new = (z + (j - x), j + 1);
                match edges.iter().position(|&e| e == old) {
                    Some(pos) => edges[pos] = new,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.push(Matching::new(edges));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::matching_cost;
    use crate::oracle::OracleSession;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    fn rat(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    fn answers_for(plan: &DtwQueryPlan, hidden: &Sequence) -> Vec<ExactRational> {
        plan.queries
            .iter()
            .map(|q| dtw1(hidden, q).unwrap())
            .collect()
    }

    #[test]
    fn adaptive_length_probe() {
        let mut s = OracleSession::adaptive(seq("01011"), DistanceKind::Dtw { p: 1 }, 8).unwrap();
        assert_eq!(s.query(&seq("1/2")).unwrap(), rat("5/2"));
    }

    #[test]
    fn adaptive_small_exhaustive() {
        let n = 7;
        for hidden in all_binary_up_to(1, n) {
            let mut s =
                OracleSession::adaptive(hidden.clone(), DistanceKind::Dtw { p: 1 }, n).unwrap();
            assert_eq!(adaptive_recover(&mut s).unwrap(), hidden);
            assert!(s.query_count() <= n + 1);
            assert_eq!(s.query_count(), hidden.len() + 1);
        }
    }

    #[test]
    fn equivalence_plan_shape() {
        let plan = equivalence_plan(6);
        assert_eq!(plan.queries.len(), 12);
        assert_eq!(plan.queries[0], seq("0"));
        assert_eq!(plan.queries[6], seq("1"));
        // run counts are 1..=n in each family
        for (idx, q) in plan.queries.iter().enumerate() {
            let i = idx % 6 + 1;
            assert_eq!(q.run_count().unwrap(), i, "query {q}");
        }
        // the longest queries stay within the declared cap
        assert!(plan.queries.iter().all(|q| q.len() <= 3 * 6 - 2));
    }

    #[test]
    fn witness_pair_shares_a_class() {
        let n = 6;
        let a = equivalence_class_of(n, &seq("010110")).unwrap();
        let b = equivalence_class_of(n, &seq("011010")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_zero_is_its_own_class() {
        let n = 6;
        let table = equivalence_partition(n);
        let class: Vec<&Vec<Sequence>> = table.iter().filter(|c| c.contains(&seq("0"))).collect();
        assert_eq!(class.len(), 1);
        assert_eq!(class[0].as_slice(), &[seq("0")]);
    }

    #[test]
    fn equivalence_recover_round_trips() {
        let n = 5;
        let plan = equivalence_plan(n);
        for hidden in all_binary_up_to(1, n) {
            let answers = answers_for(&plan, &hidden);
            let id = equivalence_recover(n, &answers).unwrap();
            assert_eq!(id, equivalence_class_of(n, &hidden).unwrap());
        }
    }

    #[test]
    fn one_extra_plan_shape() {
        let n = 8;
        let plan = one_extra_plan(n);
        assert_eq!(plan.queries.len(), 72);
        assert_eq!(plan.queries[one_extra_index(n, 0, 3, 0)], seq("010"));
        assert_eq!(plan.queries[one_extra_index(n, 0, 1, 2)], seq("0,1/2,1/2"));
        assert_eq!(plan.queries[one_extra_index(n, 1, 2, 1)], seq("1,0,1/2"));
        assert!(plan.queries.iter().all(|q| q.len() <= n));
    }

    #[test]
    fn one_extra_zero_hit_example() {
        // hidden 0110 has three runs; its condensed expression answers 0
        assert_eq!(dtw1(&seq("0110"), &seq("010")).unwrap(), rat("0"));
    }

    #[test]
    fn one_extra_small_exhaustive() {
        let n = 5;
        let plan = one_extra_plan(n);
        for hidden in all_binary_up_to(1, n) {
            let answers = answers_for(&plan, &hidden);
            assert_eq!(
                one_extra_decode(n, &answers).unwrap(),
                hidden,
                "hidden {hidden}"
            );
        }
    }

    #[test]
    fn two_extra_residue_arithmetic() {
        // scaled per-character costs for a = 1/3, b = 2/5
        let fifteen = ExactRational::from_integer(15);
        let a = rat("1/3");
        let b = rat("2/5");
        let cost = |x: &ExactRational, c: &ExactRational| (x - c).abs() * fifteen.clone();
        let zero = ExactRational::zero();
        let one = ExactRational::one();
        assert_eq!(cost(&zero, &a), rat("5"));
        assert_eq!(cost(&zero, &b), rat("6"));
        assert_eq!(cost(&one, &a), rat("10"));
        assert_eq!(cost(&one, &b), rat("9"));
        let (modulus, zero_res, one_res) = TwoExtraParams::standard().residues();
        assert_eq!(modulus, BigInt::from(5));
        assert_eq!(zero_res, BigInt::from(1));
        assert_eq!(one_res, BigInt::from(4));
    }

    #[test]
    fn doubled_scale_decode_rule_is_equivalent() {
        // scaling answer differences by 15 decides a bit via residues
        // {1, 4} mod 5; scaling by 30 decides via {2, 3}. Same decisions.
        let single = |v: i64| match v.rem_euclid(5) {
            1 => Some(0u8),
            4 => Some(1u8),
            _ => None,
        };
        let double = |v: i64| match (2 * v).rem_euclid(5) {
            2 => Some(0u8),
            3 => Some(1u8),
            _ => None,
        };
        for v in -75..=75 {
            assert_eq!(single(v), double(v), "scaled difference {v}");
        }
    }

    #[test]
    fn four_query_fractions_sit_strictly_inside_the_quarter_half_band() {
        let plan = four_query_plan(32);
        let DtwPlanParams::FourQuery(params) = &plan.params else {
            unreachable!()
        };
        assert_eq!(params.entries.len(), 32);
        for &(p, x) in &params.entries {
            assert!(4 * x > p && 2 * x < p, "x/p = {x}/{p}");
            // smallest such numerator
            assert!(x == 1 || 4 * (x - 1) <= p || 2 * (x - 1) >= p);
            assert!(4 * (x - 1) <= p, "x/p = {x}/{p} is not minimal");
        }
    }

    #[test]
    fn two_extra_all_same_shortcut() {
        let n = 6;
        let plan = two_extra_plan(n);
        let hidden = seq("00000");
        assert_eq!(dtw1(&hidden, &seq("1")).unwrap(), rat("5"));
        let answers = answers_for(&plan, &hidden);
        assert_eq!(two_extra_decode(n, &answers).unwrap(), hidden);
    }

    #[test]
    fn two_extra_small_exhaustive() {
        let n = 6;
        let plan = two_extra_plan(n);
        for hidden in all_binary_up_to(1, n) {
            let answers = answers_for(&plan, &hidden);
            assert_eq!(
                two_extra_decode(n, &answers).unwrap(),
                hidden,
                "hidden {hidden}"
            );
        }
    }

    #[test]
    fn two_extra_alternative_characters() {
        let n = 5;
        let params = TwoExtraParams::new(rat("2/7"), rat("1/3")).unwrap();
        let plan = two_extra_plan_with(n, params.clone());
        for hidden in all_binary_up_to(1, n) {
            let answers = answers_for(&plan, &hidden);
            assert_eq!(
                two_extra_decode_with(n, &params, &answers).unwrap(),
                hidden,
                "hidden {hidden}"
            );
        }
        assert!(TwoExtraParams::new(rat("1/3"), rat("2/3")).is_err());
        assert!(TwoExtraParams::new(rat("2/5"), rat("1/3")).is_err());
        assert!(TwoExtraParams::new(rat("1/4"), rat("3/8")).is_err());
    }

    #[test]
    fn four_query_plan_shape() {
        let plan = four_query_plan(4);
        assert_eq!(plan.queries.len(), 4);
        // fractions over 3, 5, 7, 11 sorted ascending: 3/11 < 2/7 < 1/3 < 2/5
        assert_eq!(plan.queries[2].to_string(), "3/11,2/7,1/3,2/5");
        assert_eq!(plan.queries[3].to_string(), "8/11,5/7,2/3,3/5");
    }

    #[test]
    fn four_query_small_exhaustive() {
        let n = 6;
        let plan = four_query_plan(n);
        for hidden in all_binary_up_to(1, n) {
            let answers = answers_for(&plan, &hidden);
            assert_eq!(
                four_query_decode(n, &answers).unwrap(),
                hidden,
                "hidden {hidden}"
            );
        }
    }

    #[test]
    fn four_query_block_and_denominator_properties() {
        let n = 6;
        let plan = four_query_plan(n);
        let DtwPlanParams::FourQuery(params) = &plan.params else {
            unreachable!()
        };
        let prime_product: BigInt = params
            .entries
            .iter()
            .map(|&(p, _)| BigInt::from(p))
            .product();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let len = rng.gen_range(2..=n);
            let mut bits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            if bits.iter().all(|&b| b == bits[0]) {
                bits[0] = 1 - bits[0];
            }
            let hidden = Sequence::from_bits(&bits);
            let answer = dtw1(&hidden, &plan.queries[2]).unwrap();
            // in lowest terms the denominator is the full prime product
            assert_eq!(answer.denom(), &prime_product, "hidden {hidden}");
            let m = matched_string_from_answer(&answer, &params.entries, false).unwrap();
            assert_eq!(blocks(&m).len(), hidden.run_count().unwrap());
        }
    }

    #[test]
    fn isomorphic_matching_is_optimal_and_structured() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.gen_range(2..=8);
            let len = rng.gen_range(2..=n);
            let mut bits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            if bits.iter().all(|&b| b == bits[0]) {
                bits[0] = 1 - bits[0];
            }
            let s = Sequence::from_bits(&bits);
            let plan = two_extra_plan(n);
            let mut reference = None;
            for i in 1..=n {
                let m = build_isomorphic_matching(&s, i, n).unwrap();
                m.validate(n, len).unwrap();
                // identical edge sets across the family
                if let Some(r) = &reference {
                    assert_eq!(&m, r);
                } else {
                    reference = Some(m.clone());
                }
                // every 1 of the input has degree one
                let deg = m.input_degrees(len);
                for (j, &b) in bits.iter().enumerate() {
                    if b == 1 {
                        assert_eq!(deg[j], 1);
                    }
                }
                // the query side always has degree one
                assert!(m.query_degrees(n).iter().all(|&d| d == 1));
                let cost = matching_cost(&m, &plan.queries[i - 1], &s, PNorm::Finite(1)).unwrap();
                let best = dtw1(&s, &plan.queries[i - 1]).unwrap();
                assert_eq!(cost.cost, best, "s={s} i={i} n={n}");
            }
        }
    }

    #[test]
    fn shifts_never_reduce_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let n = rng.gen_range(3..=8);
            let len = rng.gen_range(2..=n);
            let mut bits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            if bits.iter().all(|&b| b == bits[0]) {
                bits[0] = 1 - bits[0];
            }
            let s = Sequence::from_bits(&bits);
            let plan = two_extra_plan(n);
            for i in 1..=n {
                let q = &plan.queries[i - 1];
                let m = build_isomorphic_matching(&s, i, n).unwrap();
                let base = matching_cost(&m, q, &s, PNorm::Finite(1)).unwrap().cost;
                for shifted in enumerate_shifts(&m, &s) {
                    shifted.validate(n, len).unwrap();
                    let c = matching_cost(&shifted, q, &s, PNorm::Finite(1))
                        .unwrap()
                        .cost;
                    assert!(c >= base, "shift reduced cost for s={s} i={i}");
                }
            }
        }
    }

    #[test]
    fn matching_construction_rejects_uniform_inputs() {
        assert!(build_isomorphic_matching(&seq("0000"), 1, 6).is_err());
        assert!(build_isomorphic_matching(&seq("111"), 2, 6).is_err());
    }

    #[test]
    fn tampered_answers_are_rejected() {
        let n = 5;
        let hidden = seq("01101");

        // two-extra: a residue outside the two legal values
        let plan = two_extra_plan(n);
        let mut answers = answers_for(&plan, &hidden);
        answers[2] = &answers[2] + &rat("1/15");
        assert!(matches!(
            two_extra_decode(n, &answers),
            Err(RecoveryError::AdversarialOracle { .. })
        ));

        // one-extra: no zero answer among the tail-free queries
        let plan = one_extra_plan(n);
        let mut answers = answers_for(&plan, &hidden);
        for start in [0u8, 1u8] {
            for i in 1..=n {
                let idx = one_extra_index(n, start, i, 0);
                if answers[idx].is_zero() {
                    answers[idx] = rat("1");
                }
            }
        }
        assert!(matches!(
            one_extra_decode(n, &answers),
            Err(RecoveryError::AdversarialOracle { .. })
        ));

        // four-query: a denominator short of the full prime product
        let plan = four_query_plan(n);
        let mut answers = answers_for(&plan, &hidden);
        answers[2] = rat("1/3");
        assert!(matches!(
            four_query_decode(n, &answers),
            Err(RecoveryError::AdversarialOracle { .. })
        ));

        // equivalence: a signature no input produces
        let plan = equivalence_plan(n);
        let mut answers = answers_for(&plan, &hidden);
        answers[0] = rat("999");
        assert!(matches!(
            equivalence_recover(n, &answers),
            Err(RecoveryError::AdversarialOracle { .. })
        ));

        // answer-vector length mismatches are structural errors
        assert!(matches!(
            two_extra_decode(n, &answers[..3]),
            Err(RecoveryError::AnswerCountMismatch { .. })
        ));
    }
}
