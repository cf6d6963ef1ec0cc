//! Smith-Waterman local alignment and the edit-event dissimilarity built on it.
//!
//! The distance between two reads is the number of mismatched plus gapped
//! positions along the optimal local alignment. Ties are resolved
//! deterministically so that every caller, thread layout and platform sees the
//! same value:
//!
//! * the pair is aligned in canonical orientation, lexicographically smaller
//!   sequence first, which makes the result exactly symmetric,
//! * the traceback starts at the first maximal cell in row-major order,
//! * each step prefers the diagonal, then the vertical gap, then the horizontal
//!   gap, taking the first move that reproduces the cell value. It continues
//!   through zero-valued cells as long as some move reproduces them, and stops
//!   on a matrix border or on a cell produced by the zero floor alone.
//!
//! `N` never matches anything, including another `N`.

use alloc::vec;
use core::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignError {
    #[error("cannot align an empty sequence")]
    EmptySequence,
    #[error("invalid scoring scheme (match {match_score}, mismatch {mismatch}, gap {gap}): need match > 0, mismatch < 0, gap < 0")]
    BadScheme {
        match_score: i32,
        mismatch: i32,
        gap: i32,
    },
}

/// Linear-gap scoring: reward per match, penalty per mismatch and per gapped
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoringScheme {
    match_score: i32,
    mismatch: i32,
    gap: i32,
}

impl ScoringScheme {
    pub const DEFAULT: Self = Self {
        match_score: 1,
        mismatch: -1,
        gap: -2,
    };

    pub fn new(match_score: i32, mismatch: i32, gap: i32) -> Result<Self, AlignError> {
        if match_score <= 0 || mismatch >= 0 || gap >= 0 {
            return Err(AlignError::BadScheme {
                match_score,
                mismatch,
                gap,
            });
        }
        Ok(Self {
            match_score,
            mismatch,
            gap,
        })
    }

    pub fn match_score(&self) -> i32 {
        self.match_score
    }

    pub fn mismatch(&self) -> i32 {
        self.mismatch
    }

    pub fn gap(&self) -> i32 {
        self.gap
    }

    #[inline]
    fn pair(&self, a: u8, b: u8) -> i32 {
        if a == b && a != b'N' {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

impl Default for ScoringScheme {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentResult {
    /// Maximum cell of the dynamic-programming matrix.
    pub score: i32,
    /// Mismatched plus gapped positions along the traceback.
    pub distance: u32,
    /// Aligned region of the first sequence.
    pub span_a: Range<usize>,
    /// Aligned region of the second sequence.
    pub span_b: Range<usize>,
}

/// Aligns `a` against `b` with the local-alignment recurrence (cells floored
/// at zero) and traces back the optimal alignment.
pub fn sw_align(a: &[u8], b: &[u8], scheme: &ScoringScheme) -> Result<AlignmentResult, AlignError> {
    if a.is_empty() || b.is_empty() {
        return Err(AlignError::EmptySequence);
    }
    if a <= b {
        Ok(align_oriented(a, b, scheme))
    } else {
        let r = align_oriented(b, a, scheme);
        Ok(AlignmentResult {
            span_a: r.span_b,
            span_b: r.span_a,
            ..r
        })
    }
}

/// Edit events inside the optimal local alignment of `a` and `b`.
pub fn distance(a: &[u8], b: &[u8], scheme: &ScoringScheme) -> Result<u32, AlignError> {
    sw_align(a, b, scheme).map(|r| r.distance)
}

fn align_oriented(a: &[u8], b: &[u8], s: &ScoringScheme) -> AlignmentResult {
    let width = b.len() + 1;
    let mut h = vec![0i32; (a.len() + 1) * width];
    let (mut best, mut best_i, mut best_j) = (0i32, 0usize, 0usize);

    // Two passes per row: diagonal/vertical/zero candidates first (free of
    // loop-carried dependencies, so it vectorizes), then the horizontal gap
    // chain.
    for (i, &ca) in a.iter().enumerate() {
        let (prev, cur) = h[i * width..(i + 2) * width].split_at_mut(width);
        let equal = if ca == b'N' { s.mismatch } else { s.match_score };
        for (j, &cb) in b.iter().enumerate() {
            let sub = if cb == ca { equal } else { s.mismatch };
            cur[j + 1] = (prev[j] + sub).max(prev[j + 1] + s.gap).max(0);
        }
        let mut left = 0i32;
        for v in cur[1..].iter_mut() {
            *v = (*v).max(left + s.gap);
            left = *v;
        }
        let row_max = cur[1..].iter().copied().max().unwrap_or(0);
        if row_max > best {
            best = row_max;
            best_i = i + 1;
            best_j = 1 + cur[1..].iter().position(|&v| v == row_max).unwrap_or(0);
        }
    }

    let (mut i, mut j) = (best_i, best_j);
    let mut edits = 0u32;
    while i > 0 && j > 0 {
        let here = h[i * width + j];
        let sub = s.pair(a[i - 1], b[j - 1]);
        if here == h[(i - 1) * width + j - 1] + sub {
            if sub != s.match_score {
                edits += 1;
            }
            i -= 1;
            j -= 1;
        } else if here == h[(i - 1) * width + j] + s.gap {
            edits += 1;
            i -= 1;
        } else if here == h[i * width + j - 1] + s.gap {
            edits += 1;
            j -= 1;
        } else {
            break;
        }
    }

    AlignmentResult {
        score: best,
        distance: edits,
        span_a: i..best_i,
        span_b: j..best_j,
    }
}
