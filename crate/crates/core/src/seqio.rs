//! FASTA ingestion, normalization and seeded subsampling of read sets.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::rng::SeededRng;

/// Line width used by [`write_fasta`].
pub const FASTA_LINE_WIDTH: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeqError {
    #[error("input contains no FASTA records")]
    EmptyInput,
    #[error("record {id}: invalid character at position {position}")]
    InvalidCharacter { id: String, position: usize },
    #[error("duplicate read id {0}")]
    DuplicateId(String),
    #[error("record {0} has an empty sequence")]
    EmptySequence(String),
    #[error("line {line}: header without an id")]
    EmptyId { line: usize },
    #[error("line {line}: sequence data before the first '>' header")]
    MissingHeader { line: usize },
    #[error("cannot draw {k} reads from a set of {available}")]
    SampleTooLarge { k: usize, available: usize },
}

/// A nucleotide read over `{A, C, G, T, N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    id: String,
    sequence: Vec<u8>,
}

impl Read {
    /// Builds a read, uppercasing the sequence and mapping `U` to `T`.
    pub fn new(id: impl Into<String>, sequence: &[u8]) -> Result<Self, SeqError> {
        let id = id.into();
        if id.is_empty() {
            return Err(SeqError::EmptyId { line: 0 });
        }
        let sequence = normalize_sequence(&id, sequence)?;
        if sequence.is_empty() {
            return Err(SeqError::EmptySequence(id));
        }
        Ok(Self { id, sequence })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sequence(&self) -> &[u8] {
        &self.sequence
    }

    /// Number of bases.
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Ordered, id-unique collection of reads. Index `i` of every matrix built
/// from a read set refers to `reads()[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReadSet {
    reads: Vec<Read>,
    source: String,
}

impl ReadSet {
    pub fn new(reads: Vec<Read>, source: impl Into<String>) -> Result<Self, SeqError> {
        let mut seen = BTreeSet::new();
        for read in &reads {
            if !seen.insert(read.id()) {
                return Err(SeqError::DuplicateId(read.id().to_string()));
            }
        }
        Ok(Self {
            reads,
            source: source.into(),
        })
    }

    pub fn reads(&self) -> &[Read] {
        &self.reads
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.reads.iter().map(|r| r.id.clone()).collect()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Read> {
        self.reads.iter()
    }
}

impl<'a> IntoIterator for &'a ReadSet {
    type Item = &'a Read;
    type IntoIter = core::slice::Iter<'a, Read>;

    fn into_iter(self) -> Self::IntoIter {
        self.reads.iter()
    }
}

/// Uppercases `raw`, maps `U` to `T` and rejects anything outside
/// `{A, C, G, T, N}`. Positions in errors are 1-based.
pub fn normalize_sequence(id: &str, raw: &[u8]) -> Result<Vec<u8>, SeqError> {
    raw.iter()
        .enumerate()
        .map(|(k, &b)| match b.to_ascii_uppercase() {
            c @ (b'A' | b'C' | b'G' | b'T' | b'N') => Ok(c),
            b'U' => Ok(b'T'),
            _ => Err(SeqError::InvalidCharacter {
                id: id.to_string(),
                position: k + 1,
            }),
        })
        .collect()
}

/// Parses FASTA text. LF and CRLF line endings are accepted, blank lines are
/// skipped and the id is the header text up to the first whitespace.
pub fn parse_fasta(input: &[u8]) -> Result<ReadSet, SeqError> {
    let mut reads = Vec::new();
    let mut current: Option<(String, Vec<u8>)> = None;

    for (lineno, line) in input.split(|&b| b == b'\n').enumerate() {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if let Some(header) = line.strip_prefix(b">") {
            if let Some((id, seq)) = current.take() {
                reads.push(finish_record(id, seq)?);
            }
            let id: Vec<u8> = header
                .iter()
                .copied()
                .skip_while(u8::is_ascii_whitespace)
                .take_while(|b| !b.is_ascii_whitespace())
                .collect();
            if id.is_empty() {
                return Err(SeqError::EmptyId { line: lineno + 1 });
            }
            current = Some((String::from_utf8_lossy(&id).into_owned(), Vec::new()));
            continue;
        }
        let data = line.trim_ascii();
        if data.is_empty() {
            continue;
        }
        match current.as_mut() {
            Some((id, seq)) => {
                let offset = seq.len();
                let normalized = normalize_sequence(id, data).map_err(|e| match e {
                    SeqError::InvalidCharacter { id, position } => SeqError::InvalidCharacter {
                        id,
                        position: position + offset,
                    },
                    other => other,
                })?;
                seq.extend_from_slice(&normalized);
            }
            None => return Err(SeqError::MissingHeader { line: lineno + 1 }),
        }
    }
    if let Some((id, seq)) = current.take() {
        reads.push(finish_record(id, seq)?);
    }
    if reads.is_empty() {
        return Err(SeqError::EmptyInput);
    }
    ReadSet::new(reads, "")
}

fn finish_record(id: String, sequence: Vec<u8>) -> Result<Read, SeqError> {
    if sequence.is_empty() {
        return Err(SeqError::EmptySequence(id));
    }
    Ok(Read { id, sequence })
}

/// Renders reads as FASTA with sequences wrapped at [`FASTA_LINE_WIDTH`].
pub fn write_fasta(rs: &ReadSet) -> String {
    let mut out = String::new();
    for read in rs {
        let _ = writeln!(out, ">{}", read.id);
        for line in read.sequence.chunks(FASTA_LINE_WIDTH) {
            // Sequences are validated ASCII.
            out.push_str(core::str::from_utf8(line).unwrap_or_default());
            out.push('\n');
        }
    }
    out
}

/// Draws `k` reads uniformly without replacement, keeping their original
/// relative order.
///
/// Uses selection sampling (Knuth's Algorithm S): read `i` of `N` is kept when
/// `(N - i) * U < k - kept` with `U` the next uniform draw of
/// [`SeededRng::new(seed)`](SeededRng). One draw is consumed per visited read.
pub fn subsample(rs: &ReadSet, k: usize, seed: u64) -> Result<ReadSet, SeqError> {
    let total = rs.len();
    if k > total {
        return Err(SeqError::SampleTooLarge {
            k,
            available: total,
        });
    }
    let mut rng = SeededRng::new(seed);
    let mut kept = Vec::with_capacity(k);
    for (i, read) in rs.reads.iter().enumerate() {
        let needed = k - kept.len();
        if needed == 0 {
            break;
        }
        let remaining = total - i;
        if (remaining as f64) * rng.uniform() < needed as f64 {
            kept.push(read.clone());
        }
    }
    Ok(ReadSet {
        reads: kept,
        source: rs.source.clone(),
    })
}
