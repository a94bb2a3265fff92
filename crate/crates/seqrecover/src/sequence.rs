//! Sequences over binary and extended query alphabets.
//!
//! Input sequences are always binary. Query sequences may additionally use
//! the wildcard character (edit distance) or rational characters strictly
//! between 0 and 1 (DTW / Frechet).

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::ExactRational;

/// One character of a sequence.
///
/// `Frac` values are kept in lowest terms and lie strictly between 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Zero,
    One,
    Wildcard,
    Frac(ExactRational),
}

/// Error for symbol construction outside the allowed value range.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("fractional character {value} must lie strictly between 0 and 1")]
pub struct InvalidFraction {
    pub value: ExactRational,
}

impl Symbol {
    /// Binary symbol from a 0/1 value.
    pub fn bit(b: u8) -> Symbol {
        match b {
            0 => Symbol::Zero,
            1 => Symbol::One,
            _ => panic!("bit must be 0 or 1"),
        }
    }

    pub fn frac(value: ExactRational) -> Result<Symbol, InvalidFraction> {
        if value.is_zero() || value.is_negative() || value >= ExactRational::one() {
            return Err(InvalidFraction { value });
        }
        Ok(Symbol::Frac(value))
    }

    /// Shorthand for a validated `numer/denom` fraction.
    pub fn frac_parts(numer: i64, denom: i64) -> Result<Symbol, InvalidFraction> {
        Symbol::frac(ExactRational::new(numer, denom))
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Symbol::Zero | Symbol::One)
    }

    /// Numeric value under the DTW/Frechet cost model; `None` for the
    /// wildcard, which has no numeric interpretation.
    pub fn value(&self) -> Option<ExactRational> {
        match self {
            Symbol::Zero => Some(ExactRational::zero()),
            Symbol::One => Some(ExactRational::one()),
            Symbol::Frac(v) => Some(v.clone()),
            Symbol::Wildcard => None,
        }
    }

    fn token(&self) -> String {
        match self {
            Symbol::Zero => "0".to_string(),
            Symbol::One => "1".to_string(),
            Symbol::Wildcard => "W".to_string(),
            Symbol::Frac(v) => v.to_string(),
        }
    }
}

/// An immutable character sequence. The empty sequence is valid.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence(Vec<Symbol>);

impl Sequence {
    pub fn empty() -> Sequence {
        Sequence(Vec::new())
    }

    pub fn new(symbols: Vec<Symbol>) -> Sequence {
        Sequence(symbols)
    }

    /// Binary sequence from 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Sequence {
        Sequence(bits.iter().map(|&b| Symbol::bit(b)).collect())
    }

    /// `count` copies of one symbol.
    pub fn run(symbol: Symbol, count: usize) -> Sequence {
        Sequence(vec![symbol; count])
    }

    /// Alternating binary sequence of the given length and starting bit.
    pub fn alternating(start: u8, len: usize) -> Sequence {
        Sequence(
            (0..len)
                .map(|i| Symbol::bit((start as usize + i) as u8 % 2))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<&Symbol> {
        self.0.get(i)
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(Symbol::is_binary)
    }

    /// 0/1 vector when the sequence is purely binary.
    pub fn as_bits(&self) -> Option<Vec<u8>> {
        self.0
            .iter()
            .map(|s| match s {
                Symbol::Zero => Some(0),
                Symbol::One => Some(1),
                _ => None,
            })
            .collect()
    }

    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Sequence(v)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    /// Maximal single-character blocks of a binary sequence, in order.
    pub fn decompose_runs(&self) -> Result<RunDecomposition, NotBinaryError> {
        let bits = self.require_binary()?;
        let mut lengths = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            let c = bits[i];
            let start = i;
            while i < bits.len() && bits[i] == c {
                i += 1;
            }
            lengths.push(i - start);
        }
        Ok(RunDecomposition {
            first: bits.first().map(|&b| Symbol::bit(b)),
            lengths,
        })
    }

    /// Number of runs of a binary sequence.
    pub fn run_count(&self) -> Result<usize, NotBinaryError> {
        Ok(self.decompose_runs()?.run_count())
    }

    /// The alternating sequence with one character per run: same run count,
    /// same first and last character.
    pub fn condensed(&self) -> Result<Sequence, NotBinaryError> {
        let bits = self.require_binary()?;
        let mut out = Vec::new();
        for &b in &bits {
            if out.last() != Some(&b) {
                out.push(b);
            }
        }
        Ok(Sequence::from_bits(&out))
    }

    fn require_binary(&self) -> Result<Vec<u8>, NotBinaryError> {
        self.as_bits().ok_or_else(|| {
            let position = self.0.iter().position(|s| !s.is_binary()).unwrap_or(0);
            NotBinaryError {
                symbol: self.0[position].token(),
                position,
            }
        })
    }
}

/// True iff `x` can be obtained from `y` by deleting zero or more
/// characters without reordering.
pub fn is_subsequence(x: &Sequence, y: &Sequence) -> bool {
    let mut xi = x.symbols().iter().peekable();
    for s in y.symbols() {
        if xi.peek() == Some(&s) {
            xi.next();
        }
    }
    xi.peek().is_none()
}

/// Error for operations that require a purely binary sequence.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("binary sequence required, found `{symbol}` at position {position}")]
pub struct NotBinaryError {
    pub symbol: String,
    pub position: usize,
}

/// First character plus run lengths of a binary sequence; `first` is `None`
/// only for the empty sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunDecomposition {
    pub first: Option<Symbol>,
    pub lengths: Vec<usize>,
}

impl RunDecomposition {
    pub fn run_count(&self) -> usize {
        self.lengths.len()
    }

    /// Rebuilds the original sequence exactly.
    pub fn reconstruct(&self) -> Sequence {
        let mut out = Vec::new();
        let mut bit = match self.first {
            Some(Symbol::One) => 1u8,
            _ => 0u8,
        };
        for &len in &self.lengths {
            for _ in 0..len {
                out.push(bit);
            }
            bit ^= 1;
        }
        Sequence::from_bits(&out)
    }

    /// (character, length) pairs in order.
    pub fn runs(&self) -> impl Iterator<Item = (u8, usize)> + '_ {
        let start = match self.first {
            Some(Symbol::One) => 1u8,
            _ => 0u8,
        };
        self.lengths
            .iter()
            .enumerate()
            .map(move |(i, &len)| (((start as usize + i) % 2) as u8, len))
    }
}

/// Error naming the offending token and its position in the input text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("invalid token `{token}` at position {position}")]
    InvalidToken { token: String, position: usize },
    #[error(
        "invalid fraction `{token}` at position {position}: must be a positive fraction below 1"
    )]
    FractionOutOfRange { token: String, position: usize },
}

/// Text format: binary sequences are contiguous `0`/`1` strings; extended
/// sequences are comma-separated tokens `0`, `1`, `W`, or `p/q`.
impl FromStr for Sequence {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        if text.is_empty() {
            return Ok(Sequence::empty());
        }
        if !text.contains(',') && text.bytes().all(|b| b == b'0' || b == b'1') {
            return Ok(Sequence(
                text.bytes().map(|b| Symbol::bit(b - b'0')).collect(),
            ));
        }
        let mut symbols = Vec::new();
        for (position, token) in text.split(',').enumerate() {
            let token = token.trim();
            let symbol = match token {
                "0" => Symbol::Zero,
                "1" => Symbol::One,
                "W" => Symbol::Wildcard,
                _ => {
                    let value: ExactRational =
                        token.parse().map_err(|_| ParseError::InvalidToken {
                            token: token.to_string(),
                            position,
                        })?;
                    Symbol::frac(value).map_err(|_| ParseError::FractionOutOfRange {
                        token: token.to_string(),
                        position,
                    })?
                }
            };
            symbols.push(symbol);
        }
        Ok(Sequence(symbols))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_binary() {
            for s in &self.0 {
                write!(f, "{}", if *s == Symbol::One { '1' } else { '0' })?;
            }
            Ok(())
        } else {
            let tokens: Vec<String> = self.0.iter().map(Symbol::token).collect();
            write!(f, "{}", tokens.join(","))
        }
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(D::Error::custom)
    }
}

impl FromIterator<Symbol> for Sequence {
    fn from_iter<T: IntoIterator<Item = Symbol>>(iter: T) -> Sequence {
        Sequence(iter.into_iter().collect())
    }
}

/// All binary sequences of length exactly `len`, in lexicographic order.
pub fn all_binary_of_len(len: usize) -> Vec<Sequence> {
    assert!(
        len < usize::BITS as usize - 1,
        "length too large to enumerate"
    );
    (0..1usize << len)
        .map(|mask| {
            Sequence::from_bits(
                &(0..len)
                    .map(|i| ((mask >> (len - 1 - i)) & 1) as u8)
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// All binary sequences with length in `min_len..=max_len`, shortest first,
/// lexicographic within each length.
pub fn all_binary_up_to(min_len: usize, max_len: usize) -> Vec<Sequence> {
    (min_len..=max_len).flat_map(all_binary_of_len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn runs_of_reference_sequence() {
        let d = seq("0010111").decompose_runs().unwrap();
        assert_eq!(d.first, Some(Symbol::Zero));
        assert_eq!(d.lengths, vec![2, 1, 1, 3]);
        assert_eq!(d.run_count(), 4);
    }

    #[test]
    fn runs_of_empty_and_single() {
        let d = Sequence::empty().decompose_runs().unwrap();
        assert_eq!(d.first, None);
        assert!(d.lengths.is_empty());
        let d = seq("1").decompose_runs().unwrap();
        assert_eq!(d.first, Some(Symbol::One));
        assert_eq!(d.lengths, vec![1]);
    }

    #[test]
    fn condensed_examples() {
        assert_eq!(seq("0010111").condensed().unwrap(), seq("0101"));
        assert_eq!(seq("0").condensed().unwrap(), seq("0"));
        assert_eq!(seq("111000").condensed().unwrap(), seq("10"));
        assert_eq!(Sequence::empty().condensed().unwrap(), Sequence::empty());
    }

    #[test]
    fn subsequence_examples() {
        assert!(is_subsequence(&seq("0111"), &seq("0010111")));
        assert!(is_subsequence(&seq("1111"), &seq("0010111")));
        assert!(is_subsequence(&Sequence::empty(), &seq("010")));
        // only three 0s available
        assert!(!is_subsequence(&seq("0000"), &seq("0010111")));
        assert!(!is_subsequence(&seq("11111"), &seq("0010111")));
    }

    #[test]
    fn parse_binary_and_extended() {
        assert_eq!(seq("010110").len(), 6);
        assert!(seq("010110").is_binary());
        let f = seq("1/3,1/3,2/5");
        assert_eq!(f.len(), 3);
        assert_eq!(f.get(2), Some(&Symbol::frac_parts(2, 5).unwrap()));
        let w = seq("1,W,0");
        assert_eq!(w.symbols(), &[Symbol::One, Symbol::Wildcard, Symbol::Zero]);
    }

    #[test]
    fn parse_errors_name_token_and_position() {
        match "1,X,0".parse::<Sequence>() {
            Err(ParseError::InvalidToken { token, position }) => {
                assert_eq!(token, "X");
                assert_eq!(position, 1);
            }
            other => panic!("expected invalid token, got {:?}", other),
        }
        assert!(matches!(
            "1,3/2".parse::<Sequence>(),
            Err(ParseError::FractionOutOfRange { position: 1, .. })
        ));
        assert!(matches!(
            "0,5/5".parse::<Sequence>(),
            Err(ParseError::FractionOutOfRange { .. })
        ));
    }

    #[test]
    fn format_round_trip() {
        for text in ["", "010110", "1/3,2/5,1", "1,W,0", "0"] {
            assert_eq!(seq(text).to_string(), text);
        }
    }

    #[test]
    fn non_binary_errors_carry_position() {
        let s = seq("1,W,0");
        let err = s.condensed().unwrap_err();
        assert_eq!(err.position, 1);
        assert_eq!(err.symbol, "W");
    }

    #[test]
    fn enumeration_orders() {
        let all = all_binary_up_to(0, 2);
        let texts: Vec<String> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(texts, ["", "0", "1", "00", "01", "10", "11"]);
    }

    fn arb_bits(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..2, 0..=max_len)
    }

    proptest! {
        #[test]
        fn run_decomposition_round_trips(bits in arb_bits(40)) {
            let s = Sequence::from_bits(&bits);
            let d = s.decompose_runs().unwrap();
            prop_assert_eq!(d.lengths.iter().sum::<usize>(), s.len());
            prop_assert_eq!(d.reconstruct(), s);
        }

        #[test]
        fn condensed_is_idempotent_and_preserves_shape(bits in arb_bits(40)) {
            let s = Sequence::from_bits(&bits);
            let c = s.condensed().unwrap();
            prop_assert_eq!(c.condensed().unwrap(), c.clone());
            prop_assert_eq!(c.run_count().unwrap(), s.run_count().unwrap());
            prop_assert_eq!(c.symbols().first(), s.symbols().first());
            prop_assert_eq!(c.symbols().last(), s.symbols().last());
        }

        #[test]
        fn subsequence_reflexive_and_transitive(
            bits in arb_bits(24),
            drop_a in prop::collection::vec(any::<bool>(), 0..=24),
            drop_b in prop::collection::vec(any::<bool>(), 0..=24),
        ) {
            // build z ⊇ y ⊇ x by deleting characters, then check transitivity
            let z = Sequence::from_bits(&bits);
            let y: Sequence = z
                .symbols()
                .iter()
                .enumerate()
                .filter(|(i, _)| drop_a.get(*i) != Some(&true))
                .map(|(_, s)| s.clone())
                .collect();
            let x: Sequence = y
                .symbols()
                .iter()
                .enumerate()
                .filter(|(i, _)| drop_b.get(*i) != Some(&true))
                .map(|(_, s)| s.clone())
                .collect();
            prop_assert!(is_subsequence(&z, &z));
            prop_assert!(is_subsequence(&y, &z));
            prop_assert!(is_subsequence(&x, &y));
            prop_assert!(is_subsequence(&x, &z));
        }
    }
}
