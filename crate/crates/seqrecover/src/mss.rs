//! Min 1-separated sum and the run-level route to binary DTW.
//!
//! `dtw_via_mss` computes the DTW distance of a binary pair entirely from
//! run lengths: when both endpoint characters agree the distance is the
//! minimum 1-separated sum over the longer side's inner runs; otherwise an
//! offset recursion strips a first or last run and recurses. It is the
//! independent counterpart to the grid DP in `distances` and the two are
//! checked against each other throughout the test suite.

use std::collections::HashMap;

use crate::distances::DistanceError;
use crate::sequence::Sequence;

/// Select `r` pairwise non-adjacent values from `values` minimizing their
/// sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MssInstance {
    values: Vec<u64>,
    r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MssError {
    #[error("value at position {position} must be a positive integer")]
    NonPositiveValue { position: usize },
    #[error("cannot select {r} pairwise non-adjacent values out of {len}")]
    Infeasible { len: usize, r: usize },
}

impl MssInstance {
    pub fn new(values: Vec<u64>, r: usize) -> Result<MssInstance, MssError> {
        if let Some(position) = values.iter().position(|&v| v == 0) {
            return Err(MssError::NonPositiveValue { position });
        }
        Ok(MssInstance { values, r })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `r` non-adjacent picks exist iff `r <= ceil(len/2)`.
    pub fn is_feasible(&self) -> bool {
        self.r <= self.values.len().div_ceil(2)
    }
}

/// Minimum sum of `r` pairwise non-adjacent selected values, by DP over
/// (prefix, picks).
pub fn mss_solve(inst: &MssInstance) -> Result<u64, MssError> {
    if !inst.is_feasible() {
        return Err(MssError::Infeasible {
            len: inst.values.len(),
            r: inst.r,
        });
    }
    let r = inst.r;
    if r == 0 {
        return Ok(0);
    }
    const UNREACHABLE: u64 = u64::MAX;
    // best[j] = min sum picking j values from the prefix, latest pick not at
    // the previous position
    let mut with_prev = vec![UNREACHABLE; r + 1]; // last position picked
    let mut without_prev = vec![UNREACHABLE; r + 1]; // last position free
    without_prev[0] = 0;
    for &v in &inst.values {
        let mut new_with = vec![UNREACHABLE; r + 1];
        let mut new_without = vec![UNREACHABLE; r + 1];
        for j in 0..=r {
            new_without[j] = with_prev[j].min(without_prev[j]);
            if j > 0 && without_prev[j - 1] != UNREACHABLE {
                new_with[j] = without_prev[j - 1] + v;
            }
        }
        with_prev = new_with;
        without_prev = new_without;
    }
    let best = with_prev[r].min(without_prev[r]);
    debug_assert_ne!(best, UNREACHABLE);
    Ok(best)
}

/// Run-level view of one sequence: (starting character, run lengths).
struct Runs {
    start: u8,
    lens: Vec<u64>,
}

impl Runs {
    fn of(s: &Sequence) -> Result<Runs, DistanceError> {
        let d = s
            .decompose_runs()
            .map_err(|e| DistanceError::UnsupportedAlphabet {
                oracle: "warping",
                symbol: e.symbol,
                position: e.position,
            })?;
        let start = match d.first {
            Some(crate::sequence::Symbol::One) => 1,
            _ => 0,
        };
        Ok(Runs {
            start,
            lens: d.lengths.iter().map(|&l| l as u64).collect(),
        })
    }
}

/// A contiguous window of runs, identified by half-open run indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Window {
    lo: u16,
    hi: u16,
}

impl Window {
    fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }
}

struct ReductionState<'a> {
    x: &'a Runs,
    y: &'a Runs,
    memo: HashMap<(Window, Window), u64>,
    offset_steps: usize,
}

impl ReductionState<'_> {
    fn first_char(runs: &Runs, w: Window) -> u8 {
        (runs.start as usize + w.lo as usize) as u8 % 2
    }

    fn last_char(runs: &Runs, w: Window) -> u8 {
        (runs.start as usize + w.hi as usize - 1) as u8 % 2
    }

    fn solve(&mut self, wx: Window, wy: Window) -> u64 {
        if let Some(&v) = self.memo.get(&(wx, wy)) {
            return v;
        }
        let v = self.compute(wx, wy);
        self.memo.insert((wx, wy), v);
        v
    }

    fn compute(&mut self, wx: Window, wy: Window) -> u64 {
        let (kx, ky) = (wx.len(), wy.len());
        let first_eq = Self::first_char(self.x, wx) == Self::first_char(self.y, wy);
        let last_eq = Self::last_char(self.x, wx) == Self::last_char(self.y, wy);

        if first_eq && last_eq {
            // endpoints agree: minimum 1-separated sum over the longer
            // side's inner runs
            let (runs, w, r) = if kx >= ky {
                (self.x, wx, (kx - ky) / 2)
            } else {
                (self.y, wy, (ky - kx) / 2)
            };
            if r == 0 {
                return 0;
            }
            let inner = runs.lens[w.lo as usize + 1..w.hi as usize - 1].to_vec();
            let inst = MssInstance::new(inner, r).expect("run lengths are positive");
            return mss_solve(&inst).expect("reduction instance is feasible");
        }

        // offset step: strip a first or last run from the side with more
        // runs (or from either side when both options are open)
        self.offset_steps += 1;
        let swapped = kx < ky;
        let (a_runs, wa, b_runs, wb) = if swapped {
            (self.y, wy, self.x, wx)
        } else {
            (self.x, wx, self.y, wy)
        };
        let (ka, kb) = (wa.len(), wb.len());
        let strip_front = |w: Window| Window {
            lo: w.lo + 1,
            hi: w.hi,
        };
        let strip_back = |w: Window| Window {
            lo: w.lo,
            hi: w.hi - 1,
        };
        let pack = |sw: bool, wa: Window, wb: Window| if sw { (wb, wa) } else { (wa, wb) };

        if !first_eq {
            let a = a_runs.lens[wa.lo as usize];
            let b = b_runs.lens[wb.lo as usize];
            if ka == 1 && kb == 1 {
                return a.max(b);
            }
            if kb == 1 {
                let (nx, ny) = pack(swapped, strip_front(wa), wb);
                return a + self.solve(nx, ny);
            }
            let (x1, y1) = pack(swapped, strip_front(wa), wb);
            let (x2, y2) = pack(swapped, wa, strip_front(wb));
            return (a + self.solve(x1, y1)).min(b + self.solve(x2, y2));
        }

        // first characters agree, last characters differ
        let a_last = a_runs.lens[wa.hi as usize - 1];
        let b_last = b_runs.lens[wb.hi as usize - 1];
        if kb == 1 {
            let (nx, ny) = pack(swapped, strip_back(wa), wb);
            return a_last + self.solve(nx, ny);
        }
        let (x1, y1) = pack(swapped, strip_back(wa), wb);
        let (x2, y2) = pack(swapped, wa, strip_back(wb));
        (a_last + self.solve(x1, y1)).min(b_last + self.solve(x2, y2))
    }
}

/// Binary DTW distance computed through the run reduction.
pub fn dtw_via_mss(x: &Sequence, y: &Sequence) -> Result<u64, DistanceError> {
    Ok(dtw_via_mss_traced(x, y)?.0)
}

/// Same as [`dtw_via_mss`] but also reports how many offset steps the
/// recursion took; zero whenever both endpoint characters already agree.
pub fn dtw_via_mss_traced(x: &Sequence, y: &Sequence) -> Result<(u64, usize), DistanceError> {
    if x.is_empty() || y.is_empty() {
        return Err(DistanceError::EmptyOperand);
    }
    let rx = Runs::of(x)?;
    let ry = Runs::of(y)?;
    let mut state = ReductionState {
        x: &rx,
        y: &ry,
        memo: HashMap::new(),
        offset_steps: 0,
    };
    let wx = Window {
        lo: 0,
        hi: rx.lens.len() as u16,
    };
    let wy = Window {
        lo: 0,
        hi: ry.lens.len() as u16,
    };
    let value = state.solve(wx, wy);
    Ok((value, state.offset_steps))
}
