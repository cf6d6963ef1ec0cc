//! Supervised taxonomic assignment with a homology gap.
//!
//! A reference read is *within the gap* of a query when their alignment
//! distance is at most `floor((1 - gap) * min(query_len, ref_len))`. A query
//! whose in-gap references all carry one species is assigned that species;
//! several species make it ambiguous, and no in-gap reference leaves it
//! unknown.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::distmat::DistanceMatrix;
use crate::mds::Embedding;
use crate::seqio::ReadSet;

/// Label carried by ambiguous reads in joined tables.
pub const AMBIGUOUS_LABEL: &str = "ambiguous";
/// Label carried by unknown reads in joined tables.
pub const UNKNOWN_LABEL: &str = "unknown";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssignError {
    #[error("homology gap {0} is outside (0, 1]")]
    BadGap(f64),
    #[error("distance matrix is {rows}x{cols}, expected {queries}x{refs}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        queries: usize,
        refs: usize,
    },
    #[error("reference read {0} has no species label")]
    MissingLabel(String),
    #[error("species label for {0} is empty")]
    EmptyLabel(String),
    #[error("row {index}: assignment is for {assignment} but embedding row is {embedding}")]
    JoinError {
        index: usize,
        assignment: String,
        embedding: String,
    },
}

/// Annotated reference reads.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDb {
    reads: ReadSet,
    species: BTreeMap<String, String>,
}

impl ReferenceDb {
    /// Pairs reference reads with `ref_id → species` labels. Labels are
    /// trimmed; labels for ids absent from `reads` are ignored.
    pub fn new(reads: ReadSet, labels: BTreeMap<String, String>) -> Result<Self, AssignError> {
        let mut species = BTreeMap::new();
        for read in &reads {
            let label = labels
                .get(read.id())
                .ok_or_else(|| AssignError::MissingLabel(read.id().to_string()))?
                .trim();
            if label.is_empty() {
                return Err(AssignError::EmptyLabel(read.id().to_string()));
            }
            species.insert(read.id().to_string(), label.to_string());
        }
        Ok(Self { reads, species })
    }

    pub fn reads(&self) -> &ReadSet {
        &self.reads
    }

    pub fn species_of(&self, id: &str) -> Option<&str> {
        self.species.get(id).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Assigned(String),
    Ambiguous,
    Unknown,
}

impl Status {
    /// `assigned`, `ambiguous` or `unknown`.
    pub fn kind(&self) -> &'static str {
        match self {
            Status::Assigned(_) => "assigned",
            Status::Ambiguous => AMBIGUOUS_LABEL,
            Status::Unknown => UNKNOWN_LABEL,
        }
    }

    /// Species name, or the reserved label for ambiguous/unknown reads.
    pub fn label(&self) -> &str {
        match self {
            Status::Assigned(s) => s,
            other => other.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentResult {
    pub read_id: String,
    pub status: Status,
    /// Number of reference reads within the gap.
    pub support: usize,
    pub matched_species: BTreeSet<String>,
}

/// Largest distance still inside the homology gap.
pub fn gap_threshold(gap: f64, query_len: usize, ref_len: usize) -> Result<u32, AssignError> {
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(AssignError::BadGap(gap));
    }
    let shortest = query_len.min(ref_len) as f64;
    // 1 - gap is inexact in binary; snap products within rounding noise of
    // an integer onto it before flooring.
    let raw = (1.0 - gap) * shortest;
    let nearest = libm::round(raw);
    let theta = if (raw - nearest).abs() <= 1e-9 * shortest.max(1.0) {
        nearest
    } else {
        libm::floor(raw)
    };
    Ok(theta as u32)
}

/// Assigns every query against the reference database using the
/// precomputed `queries × references` distance matrix.
pub fn classify(
    queries: &ReadSet,
    db: &ReferenceDb,
    cross: &DistanceMatrix,
    gap: f64,
) -> Result<Vec<AssignmentResult>, AssignError> {
    gap_threshold(gap, 1, 1)?;
    let refs = db.reads.reads();
    if cross.rows() != queries.len() || cross.cols() != refs.len() {
        return Err(AssignError::ShapeMismatch {
            rows: cross.rows(),
            cols: cross.cols(),
            queries: queries.len(),
            refs: refs.len(),
        });
    }
    let labels: Vec<&str> = refs
        .iter()
        .map(|r| {
            db.species_of(r.id())
                .ok_or_else(|| AssignError::MissingLabel(r.id().to_string()))
        })
        .collect::<Result<_, _>>()?;

    queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut support = 0;
            let mut matched = BTreeSet::new();
            for (j, r) in refs.iter().enumerate() {
                let theta = gap_threshold(gap, q.len(), r.len())?;
                if cross.get(i, j) <= f64::from(theta) {
                    support += 1;
                    matched.insert(labels[j].to_string());
                }
            }
            let status = match matched.len() {
                0 => Status::Unknown,
                1 => Status::Assigned(matched.iter().next().cloned().unwrap_or_default()),
                _ => Status::Ambiguous,
            };
            Ok(AssignmentResult {
                read_id: q.id().to_string(),
                status,
                support,
                matched_species: matched,
            })
        })
        .collect()
}

/// One embedded read with its assignment label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub id: String,
    pub coords: Vec<f64>,
    pub label: String,
}

/// Joins assignments with embedding rows (`ids[i]` names row `i`). Every
/// assignment must refer to the read of the same row.
pub fn color_table(
    assignments: &[AssignmentResult],
    ids: &[String],
    embedding: &Embedding,
) -> Result<Vec<LabeledPoint>, AssignError> {
    assignments
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let id = ids.get(i).filter(|_| i < embedding.n());
            match id {
                Some(id) if *id == a.read_id => Ok(LabeledPoint {
                    id: id.clone(),
                    coords: embedding.point(i).to_vec(),
                    label: a.status.label().to_string(),
                }),
                other => Err(AssignError::JoinError {
                    index: i,
                    assignment: a.read_id.clone(),
                    embedding: other.cloned().unwrap_or_default(),
                }),
            }
        })
        .collect()
}
