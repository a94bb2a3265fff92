//! Exact reference implementations of edit distance, p-DTW, and the
//! discrete Frechet distance, plus optimal-matching extraction.
//!
//! All warping costs are exact rationals. Binary-by-binary instances run on
//! machine integers; mixed instances with small denominators run on a
//! common scaled integer grid; everything else falls back to big-rational
//! arithmetic. All three routes compute the same recurrence.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::rational::ExactRational;
use crate::sequence::{Sequence, Symbol};

/// Aggregation norm for warping distances: `Finite(p)` sums p-th powers of
/// edge costs, `Infinite` takes the maximum edge cost (Frechet).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PNorm {
    Finite(u32),
    Infinite,
}

/// A p-DTW value. For finite `p` the cost is the minimal sum of p-th powers
/// of edge costs (not its p-th root, which is generally irrational and
/// order-equivalent for minimization); for `Infinite` it is the minimal
/// maximum edge cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDtwValue {
    pub p: PNorm,
    pub cost: ExactRational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistanceError {
    #[error("symbol `{symbol}` at position {position} is not valid for the {oracle} oracle")]
    UnsupportedAlphabet {
        oracle: &'static str,
        symbol: String,
        position: usize,
    },
    #[error("warping distance is undefined for an empty sequence")]
    EmptyOperand,
    #[error("p must be a positive integer")]
    InvalidExponent,
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
}

fn edit_codes(s: &Sequence) -> Result<Vec<u8>, DistanceError> {
    s.symbols()
        .iter()
        .enumerate()
        .map(|(position, sym)| match sym {
            Symbol::Zero => Ok(0),
            Symbol::One => Ok(1),
            Symbol::Wildcard => Ok(2),
            Symbol::Frac(v) => Err(DistanceError::UnsupportedAlphabet {
                oracle: "edit",
                symbol: v.to_string(),
                position,
            }),
        })
        .collect()
}

/// Levenshtein distance with unit insert/delete/substitute cost;
/// substitution is free exactly when the symbols are equal. The wildcard is
/// a single distinguished character equal only to itself.
pub fn edit_distance(x: &Sequence, y: &Sequence) -> Result<usize, DistanceError> {
    let xs = edit_codes(x)?;
    let ys = edit_codes(y)?;
    let mut prev: Vec<usize> = (0..=ys.len()).collect();
    for (i, &xc) in xs.iter().enumerate() {
        let mut cur = Vec::with_capacity(ys.len() + 1);
        cur.push(i + 1);
        for (j, &yc) in ys.iter().enumerate() {
            let sub = prev[j] + usize::from(xc != yc);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    Ok(prev[ys.len()])
}

fn warp_values(s: &Sequence) -> Result<Vec<ExactRational>, DistanceError> {
    s.symbols()
        .iter()
        .enumerate()
        .map(|(position, sym)| {
            sym.value().ok_or(DistanceError::UnsupportedAlphabet {
                oracle: "warping",
                symbol: "W".to_string(),
                position,
            })
        })
        .collect()
}

/// Shared warping recurrence. `cost(i, j)` is the cell cost for matching
/// x[i] to y[j]; `combine` folds the cell cost with the best predecessor.
fn warp_dp<T, C, M>(nx: usize, ny: usize, mut cost: C, mut combine: M) -> T
where
    T: Clone + PartialOrd,
    C: FnMut(usize, usize) -> T,
    M: FnMut(T, &T) -> T,
{
    let mut prev: Vec<T> = Vec::with_capacity(ny);
    for j in 0..ny {
        let c = cost(0, j);
        let v = if j == 0 {
            c
        } else {
            let p = prev[j - 1].clone();
            combine(c, &p)
        };
        prev.push(v);
    }
    for i in 1..nx {
        let mut cur: Vec<T> = Vec::with_capacity(ny);
        for j in 0..ny {
            let c = cost(i, j);
            let best = if j == 0 {
                prev[0].clone()
            } else {
                let mut b = &prev[j];
                if prev[j - 1] < *b {
                    b = &prev[j - 1];
                }
                if cur[j - 1] < *b {
                    b = &cur[j - 1];
                }
                b.clone()
            };
            cur.push(combine(c, &best));
        }
        prev = cur;
    }
    prev[ny - 1].clone()
}

fn dtw_binary(xb: &[u8], yb: &[u8], p: PNorm) -> u64 {
    // per-edge cost is 0 or 1, so the p-th power equals the cost itself
    match p {
        PNorm::Finite(_) => warp_dp(
            xb.len(),
            yb.len(),
            |i, j| u64::from(xb[i] != yb[j]),
            |c, best| c + *best,
        ),
        PNorm::Infinite => warp_dp(
            xb.len(),
            yb.len(),
            |i, j| u64::from(xb[i] != yb[j]),
            |c, best| c.max(*best),
        ),
    }
}

/// Common denominator and scaled integer values, when they fit comfortably
/// in fixed-width arithmetic.
fn scaled_values(seqs: [&[ExactRational]; 2]) -> Option<(u128, [Vec<u128>; 2])> {
    let mut lcm: u128 = 1;
    let limit = u128::MAX >> 16;
    for s in seqs {
        for v in s {
            let d = v.denom().to_u128()?;
            let g = gcd_u128(lcm, d);
            lcm = lcm.checked_mul(d / g)?;
            if lcm > limit {
                return None;
            }
        }
    }
    let total: u128 = (seqs[0].len() + seqs[1].len()) as u128;
    lcm.checked_mul(total + 2)?;
    let scale = |s: &[ExactRational]| -> Option<Vec<u128>> {
        s.iter()
            .map(|v| {
                let d = v.denom().to_u128()?;
                let n = v.numer().to_u128()?;
                Some(n * (lcm / d))
            })
            .collect()
    };
    Some((lcm, [scale(seqs[0])?, scale(seqs[1])?]))
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn u128_to_bigint(v: u128) -> BigInt {
    BigInt::from(v)
}

/// Exact optimal warping cost between non-empty sequences over the
/// DTW/Frechet alphabet.
pub fn dtw_distance(x: &Sequence, y: &Sequence, p: PNorm) -> Result<PDtwValue, DistanceError> {
    if x.is_empty() || y.is_empty() {
        return Err(DistanceError::EmptyOperand);
    }
    if let PNorm::Finite(0) = p {
        return Err(DistanceError::InvalidExponent);
    }
    let xv = warp_values(x)?;
    let yv = warp_values(y)?;

    if let (Some(xb), Some(yb)) = (x.as_bits(), y.as_bits()) {
        let cost = ExactRational::from_integer(dtw_binary(&xb, &yb, p));
        return Ok(PDtwValue { p, cost });
    }

    let use_scaled = matches!(p, PNorm::Finite(1) | PNorm::Infinite);
    if use_scaled {
        if let Some((lcm, [xs, ys])) = scaled_values([&xv, &yv]) {
            let cost = |i: usize, j: usize| xs[i].abs_diff(ys[j]);
            let total = match p {
                PNorm::Finite(_) => warp_dp(xs.len(), ys.len(), cost, |c, b| c + *b),
                PNorm::Infinite => warp_dp(xs.len(), ys.len(), cost, |c, b| c.max(*b)),
            };
            let cost = ExactRational::from_parts(u128_to_bigint(total), u128_to_bigint(lcm));
            return Ok(PDtwValue { p, cost });
        }
    }

    let cost = |i: usize, j: usize| -> ExactRational {
        let d = (&xv[i] - &yv[j]).abs();
        match p {
            PNorm::Finite(1) | PNorm::Infinite => d,
            PNorm::Finite(e) => d.pow(e),
        }
    };
    let total = match p {
        PNorm::Finite(_) => warp_dp(xv.len(), yv.len(), cost, |c, b| &c + b),
        PNorm::Infinite => warp_dp(
            xv.len(),
            yv.len(),
            cost,
            |c, b| if c > *b { c } else { b.clone() },
        ),
    };
    Ok(PDtwValue { p, cost: total })
}

/// Discrete Frechet distance: the warping recurrence under the maximum
/// edge cost.
pub fn frechet_distance(x: &Sequence, y: &Sequence) -> Result<ExactRational, DistanceError> {
    Ok(dtw_distance(x, y, PNorm::Infinite)?.cost)
}

/// A monotone covering edge set between a query `q` and an input `s`,
/// anchored at both endpoint pairs. Edges are 0-based `(query index,
/// input index)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(mut edges: Vec<(usize, usize)>) -> Matching {
        edges.sort_unstable();
        edges.dedup();
        Matching { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges incident to each query position.
    pub fn query_degrees(&self, query_len: usize) -> Vec<usize> {
        let mut deg = vec![0; query_len];
        for &(i, _) in &self.edges {
            deg[i] += 1;
        }
        deg
    }

    /// Number of edges incident to each input position.
    pub fn input_degrees(&self, input_len: usize) -> Vec<usize> {
        let mut deg = vec![0; input_len];
        for &(_, j) in &self.edges {
            deg[j] += 1;
        }
        deg
    }

    /// Checks the three defining properties against the given lengths:
    /// full coverage of both index sets, anchored endpoints, and joint
    /// monotonicity.
    pub fn validate(&self, query_len: usize, input_len: usize) -> Result<(), DistanceError> {
        let fail = |msg: String| Err(DistanceError::InvalidMatching(msg));
        if query_len == 0 || input_len == 0 {
            return fail("matching requires non-empty sequences".into());
        }
        if self.edges.is_empty() {
            return fail("no edges".into());
        }
        for &(i, j) in &self.edges {
            if i >= query_len || j >= input_len {
                return fail(format!("edge ({i},{j}) out of range"));
            }
        }
        if !self.edges.contains(&(0, 0)) {
            return fail("first characters are not matched".into());
        }
        if !self.edges.contains(&(query_len - 1, input_len - 1)) {
            return fail("last characters are not matched".into());
        }
        if self.query_degrees(query_len).contains(&0) {
            return fail("a query position is uncovered".into());
        }
        if self.input_degrees(input_len).contains(&0) {
            return fail("an input position is uncovered".into());
        }
        // edges are kept sorted by (i, j); a crossing shows up as a
        // decrease in j
        for w in self.edges.windows(2) {
            if w[1].1 < w[0].1 {
                return fail(format!("edges {:?} and {:?} cross", w[0], w[1]));
            }
        }
        Ok(())
    }
}

fn edge_cost(
    q: &[ExactRational],
    s: &[ExactRational],
    i: usize,
    j: usize,
    p: PNorm,
) -> ExactRational {
    let d = (&q[i] - &s[j]).abs();
    match p {
        PNorm::Finite(1) | PNorm::Infinite => d,
        PNorm::Finite(e) => d.pow(e),
    }
}

/// Exact aggregate cost of a matching under the given norm.
pub fn matching_cost(
    m: &Matching,
    query: &Sequence,
    input: &Sequence,
    p: PNorm,
) -> Result<PDtwValue, DistanceError> {
    if let PNorm::Finite(0) = p {
        return Err(DistanceError::InvalidExponent);
    }
    m.validate(query.len(), input.len())?;
    let qv = warp_values(query)?;
    let sv = warp_values(input)?;
    let mut total = ExactRational::zero();
    for &(i, j) in m.edges() {
        let c = edge_cost(&qv, &sv, i, j, p);
        match p {
            PNorm::Finite(_) => total += &c,
            PNorm::Infinite => {
                if c > total {
                    total = c;
                }
            }
        }
    }
    Ok(PDtwValue { p, cost: total })
}

/// One cost-minimal matching, extracted by DP backtrace, together with its
/// cost (which always equals `dtw_distance`). On ties the backtrace prefers
/// advancing the query index: predecessor (i-1, j) over (i-1, j-1) over
/// (i, j-1).
pub fn optimal_matching(
    query: &Sequence,
    input: &Sequence,
    p: PNorm,
) -> Result<(Matching, PDtwValue), DistanceError> {
    if query.is_empty() || input.is_empty() {
        return Err(DistanceError::EmptyOperand);
    }
    if let PNorm::Finite(0) = p {
        return Err(DistanceError::InvalidExponent);
    }
    let qv = warp_values(query)?;
    let sv = warp_values(input)?;
    let (nq, ns) = (qv.len(), sv.len());
    let combine = |c: ExactRational, best: &ExactRational| -> ExactRational {
        match p {
            PNorm::Finite(_) => &c + best,
            PNorm::Infinite => {
                if c > *best {
                    c
                } else {
                    best.clone()
                }
            }
        }
    };
    let mut grid: Vec<Vec<ExactRational>> = Vec::with_capacity(nq);
    for i in 0..nq {
        let mut row = Vec::with_capacity(ns);
        for j in 0..ns {
            let c = edge_cost(&qv, &sv, i, j, p);
            let v = match (i, j) {
                (0, 0) => c,
                (0, _) => combine(c, &row[j - 1]),
                (_, 0) => combine(c, &grid[i - 1][0]),
                _ => {
                    let mut best = &grid[i - 1][j];
                    if grid[i - 1][j - 1] < *best {
                        best = &grid[i - 1][j - 1];
                    }
                    if row[j - 1] < *best {
                        best = &row[j - 1];
                    }
                    combine(c, best)
                }
            };
            row.push(v);
        }
        grid.push(row);
    }
    let mut edges = Vec::new();
    let (mut i, mut j) = (nq - 1, ns - 1);
    loop {
        edges.push((i, j));
        if i == 0 && j == 0 {
            break;
        }
        let mut cands: Vec<(usize, usize)> = Vec::with_capacity(3);
        if i > 0 {
            cands.push((i - 1, j));
        }
        if i > 0 && j > 0 {
            cands.push((i - 1, j - 1));
        }
        if j > 0 {
            cands.push((i, j - 1));
        }
        let best = cands
            .into_iter()
            .min_by(|a, b| grid[a.0][a.1].cmp(&grid[b.0][b.1]))
            .expect("cell has a predecessor");
        i = best.0;
        j = best.1;
    }
    edges.reverse();
    let m = Matching::new(edges);
    let cost = PDtwValue {
        p,
        cost: grid[nq - 1][ns - 1].clone(),
    };
    Ok((m, cost))
}
