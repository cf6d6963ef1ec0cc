//! Reference Smith-Waterman implementations used only by tests.
//!
//! `naive_align` evaluates the recurrence top-down over a memo table and
//! applies the documented conventions (canonical orientation, first maximal
//! cell in row-major order, diagonal > up > left traceback that walks through
//! zero cells while a move reproduces them). `enumerate_local` lists every
//! local alignment of two short strings explicitly.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleResult {
    pub score: i64,
    pub distance: u64,
    pub span_a: (usize, usize),
    pub span_b: (usize, usize),
}

#[derive(Clone, Copy)]
pub struct Scheme {
    pub matched: i64,
    pub mismatch: i64,
    pub gap: i64,
}

pub const DEFAULT: Scheme = Scheme { matched: 1, mismatch: -1, gap: -2 };

fn sub(s: Scheme, x: u8, y: u8) -> i64 {
    if x == y && x != b'N' {
        s.matched
    } else {
        s.mismatch
    }
}

struct Table<'a> {
    a: &'a [u8],
    b: &'a [u8],
    s: Scheme,
    memo: Vec<Vec<Option<i64>>>,
}

impl Table<'_> {
    fn h(&mut self, i: usize, j: usize) -> i64 {
        if i == 0 || j == 0 {
            return 0;
        }
        if let Some(v) = self.memo[i][j] {
            return v;
        }
        let diag = self.h(i - 1, j - 1) + sub(self.s, self.a[i - 1], self.b[j - 1]);
        let up = self.h(i - 1, j) + self.s.gap;
        let left = self.h(i, j - 1) + self.s.gap;
        let v = [0, diag, up, left].into_iter().max().unwrap();
        self.memo[i][j] = Some(v);
        v
    }
}

pub fn naive_align(a: &[u8], b: &[u8], s: Scheme) -> OracleResult {
    if a > b {
        let r = naive_align(b, a, s);
        return OracleResult { span_a: r.span_b, span_b: r.span_a, ..r };
    }
    let mut t = Table { a, b, s, memo: vec![vec![None; b.len() + 1]; a.len() + 1] };
    // fill bottom-up first so the recursion stays shallow
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            t.h(i, j);
        }
    }
    let mut best = (0i64, 0usize, 0usize);
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            let v = t.h(i, j);
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let (score, end_i, end_j) = best;
    let (mut i, mut j, mut edits) = (end_i, end_j, 0u64);
    loop {
        if i == 0 || j == 0 {
            break;
        }
        let here = t.h(i, j);
        let m = sub(s, a[i - 1], b[j - 1]);
        if here == t.h(i - 1, j - 1) + m {
            edits += u64::from(m != s.matched);
            i -= 1;
            j -= 1;
        } else if here == t.h(i - 1, j) + s.gap {
            edits += 1;
            i -= 1;
        } else if here == t.h(i, j - 1) + s.gap {
            edits += 1;
            j -= 1;
        } else {
            break;
        }
    }
    OracleResult { score, distance: edits, span_a: (i, end_i), span_b: (j, end_j) }
}

/// Every non-empty local alignment as `(score, edits, span_a, span_b)`.
pub fn enumerate_local(a: &[u8], b: &[u8], s: Scheme) -> Vec<OracleResult> {
    fn walk(
        a: &[u8],
        b: &[u8],
        s: Scheme,
        start: (usize, usize),
        at: (usize, usize),
        score: i64,
        edits: u64,
        out: &mut Vec<OracleResult>,
    ) {
        if at != start {
            out.push(OracleResult { score, distance: edits, span_a: (start.0, at.0), span_b: (start.1, at.1) });
        }
        let (i, j) = at;
        if i < a.len() && j < b.len() {
            let m = sub(s, a[i], b[j]);
            walk(a, b, s, start, (i + 1, j + 1), score + m, edits + u64::from(m != s.matched), out);
        }
        if i < a.len() {
            walk(a, b, s, start, (i + 1, j), score + s.gap, edits + 1, out);
        }
        if j < b.len() {
            walk(a, b, s, start, (i, j + 1), score + s.gap, edits + 1, out);
        }
    }
    let mut out = Vec::new();
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            walk(a, b, s, (i, j), (i, j), 0, 0, &mut out);
        }
    }
    out
}
