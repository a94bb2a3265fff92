//! Frechet-distance recovery. Binary inputs fall into exactly `2n`
//! equivalence classes, one per (length, starting bit) of the condensed
//! expression, and `2n - 1` membership queries identify the class.

use rand::Rng;

use crate::distances::frechet_distance;
use crate::rational::ExactRational;
use crate::recovery::{adversarial, expect_answers, RecoveryError};
use crate::sequence::{Sequence, Symbol};

/// One Frechet equivalence class: all sequences whose condensed expression
/// is the given alternating representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrechetClass {
    pub length: usize,
    pub start: Symbol,
    pub representative: Sequence,
}

fn class(length: usize, start: u8) -> FrechetClass {
    FrechetClass {
        length,
        start: Symbol::bit(start),
        representative: Sequence::alternating(start, length),
    }
}

/// The `2n` classes for inputs of length at most `n`, in canonical order:
/// length-major, 0-start before 1-start.
pub fn classes(n: usize) -> Vec<FrechetClass> {
    let mut out = Vec::with_capacity(2 * n);
    for length in 1..=n {
        out.push(class(length, 0));
        out.push(class(length, 1));
    }
    out
}

/// The class of a non-empty binary sequence, via its condensed expression.
pub fn class_of(s: &Sequence) -> Result<FrechetClass, RecoveryError> {
    if s.is_empty() {
        return Err(RecoveryError::Precondition {
            detail: "the empty sequence belongs to no class".to_string(),
        });
    }
    let c = s.condensed().map_err(|e| RecoveryError::Precondition {
        detail: e.to_string(),
    })?;
    let start = match c.symbols()[0] {
        Symbol::One => 1,
        _ => 0,
    };
    Ok(class(c.len(), start))
}

/// The non-adaptive plan: the first `2n - 1` class representatives; the
/// last one in canonical order is omitted and recognized by elimination.
pub fn plan(n: usize) -> Vec<Sequence> {
    let mut queries: Vec<Sequence> = classes(n).into_iter().map(|c| c.representative).collect();
    queries.pop();
    queries
}

/// Exactly one answer is zero when the input's class representative was
/// queried; all answers are one exactly when it was the omitted class.
pub fn recover(n: usize, answers: &[ExactRational]) -> Result<FrechetClass, RecoveryError> {
    expect_answers(answers, 2 * n - 1)?;
    let all = classes(n);
    let mut hit = None;
    for (idx, a) in answers.iter().enumerate() {
        if a.is_zero() {
            if hit.is_some() {
                return Err(adversarial("more than one zero answer"));
            }
            hit = Some(idx);
        } else if *a != ExactRational::one() {
            return Err(adversarial(format!("answer {a} is neither 0 nor 1")));
        }
    }
    Ok(all[hit.unwrap_or(2 * n - 1)].clone())
}

/// Samples random rational-alphabet queries and checks that two
/// zero-distance inputs answer identically on all of them. A `false`
/// return would falsify the claim that extra characters cannot help the
/// Frechet oracle.
pub fn extra_chars_useless_check(
    s: &Sequence,
    s2: &Sequence,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<bool, RecoveryError> {
    if frechet_distance(s, s2)? != ExactRational::zero() {
        return Err(RecoveryError::Precondition {
            detail: format!("`{s}` and `{s2}` are not at Frechet distance zero"),
        });
    }
    let max_len = s.len().max(s2.len()) + 4;
    for _ in 0..trials {
        let len = rng.gen_range(1..=max_len);
        let q: Sequence = (0..len)
            .map(|_| match rng.gen_range(0..4u8) {
                0 => Symbol::Zero,
                1 => Symbol::One,
                _ => {
                    let denom = rng.gen_range(2..=9i64);
                    let numer = rng.gen_range(1..denom);
                    Symbol::frac_parts(numer, denom).expect("0 < numer/denom < 1")
                }
            })
            .collect();
        if frechet_distance(s, &q)? != frechet_distance(s2, &q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::all_binary_up_to;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn class_enumeration() {
        let cs = classes(2);
        let reps: Vec<String> = cs.iter().map(|c| c.representative.to_string()).collect();
        assert_eq!(reps, ["0", "1", "01", "10"]);
        for n in 1..=8 {
            assert_eq!(classes(n).len(), 2 * n);
        }
        // "11" condenses to "1": class (length 1, start 1)
        let c = class_of(&seq("11")).unwrap();
        assert_eq!(c.representative, seq("1"));
        assert_eq!(c.length, 1);
    }

    #[test]
    fn plan_and_recover_small_exhaustive() {
        for n in 1..=6usize {
            let queries = plan(n);
            assert_eq!(queries.len(), 2 * n - 1);
            for hidden in all_binary_up_to(1, n) {
                let answers: Vec<ExactRational> = queries
                    .iter()
                    .map(|q| frechet_distance(&hidden, q).unwrap())
                    .collect();
                let got = recover(n, &answers).unwrap();
                assert_eq!(got, class_of(&hidden).unwrap(), "hidden {hidden}");
            }
        }
    }

    #[test]
    fn recover_examples() {
        let n = 4;
        let queries = plan(n);
        let zero_at = |hidden: &Sequence| {
            queries
                .iter()
                .position(|q| frechet_distance(hidden, q).unwrap().is_zero())
        };
        assert_eq!(queries[zero_at(&seq("0101")).unwrap()], seq("0101"));
        assert_eq!(queries[zero_at(&seq("1110")).unwrap()], seq("10"));
        // the omitted class is the 1-start representative of full length
        assert_eq!(zero_at(&seq("1010")), None);
        let answers: Vec<ExactRational> = queries
            .iter()
            .map(|q| frechet_distance(&seq("1010"), q).unwrap())
            .collect();
        assert_eq!(recover(n, &answers).unwrap().representative, seq("1010"));
    }

    #[test]
    fn recover_rejects_multiple_zeros() {
        let n = 2;
        let answers = vec![ExactRational::zero(); 3];
        assert!(matches!(
            recover(n, &answers),
            Err(RecoveryError::AdversarialOracle { .. })
        ));
    }

    #[test]
    fn extra_characters_do_not_distinguish_equivalent_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (a, b) in [("1", "11"), ("010", "0110"), ("01", "01")] {
            assert!(
                extra_chars_useless_check(&seq(a), &seq(b), 200, &mut rng).unwrap(),
                "pair ({a}, {b})"
            );
        }
        assert!(matches!(
            extra_chars_useless_check(&seq("0"), &seq("1"), 10, &mut rng),
            Err(RecoveryError::Precondition { .. })
        ));
    }
}
