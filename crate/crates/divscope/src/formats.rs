//! On-disk formats: FASTA files, the DVS1 binary matrix, and the TSV
//! exports (embedding + metadata sidecar, labels, assignments, hexbins,
//! parallel coordinates).
//!
//! Every writer goes through [`write_atomic`]: content lands in
//! `<path>.partial` and is renamed into place only once fully written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use divscope_core::assign::{AssignmentResult, Status};
use divscope_core::density::{log_count, HexBinGrid, ParallelCoordsTable};
use divscope_core::distmat::DistanceMatrix;
use divscope_core::linalg::Matrix;
use divscope_core::mds::Embedding;
use divscope_core::rsvd::Spectrum;
use divscope_core::seqio::{parse_fasta, write_fasta, ReadSet, SeqError};

pub const DVS_MAGIC: &[u8; 4] = b"DVS1";
pub const DVS_VERSION: u32 = 1;
pub const DVS_HEADER_LEN: usize = 32;
const FLAG_SYMMETRIC: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Fasta {
        path: PathBuf,
        #[source]
        source: SeqError,
    },
    #[error("bad format: {0}")]
    BadFormat(String),
    #[error("truncated matrix payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// `<path>.partial`, where interrupted writes are left behind.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

/// Writes `bytes` to `<path>.partial`, then renames onto `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let tmp = partial_path(path);
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(io_err(path))
}

// ---------------------------------------------------------------- FASTA

/// Parses a FASTA file; the read set's source is the path.
pub fn read_fasta(path: &Path) -> Result<ReadSet, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    parse_fasta(&bytes)
        .map(|rs| rs.with_source(path.display().to_string()))
        .map_err(|source| FormatError::Fasta {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_fasta(path: &Path, rs: &ReadSet) -> Result<(), FormatError> {
    write_atomic(path, write_fasta(rs).as_bytes())
}

// ---------------------------------------------------------------- DVS1

fn encode_raw(rows: usize, cols: usize, values: &[f64], symmetric: bool) -> Vec<u8> {
    let mut out = Vec::with_capacity(DVS_HEADER_LEN + 8 * values.len());
    out.extend_from_slice(DVS_MAGIC);
    out.extend_from_slice(&DVS_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    let flags = if symmetric { FLAG_SYMMETRIC } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_raw(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>, bool), FormatError> {
    if bytes.len() >= 4 && &bytes[..4] != DVS_MAGIC {
        return Err(FormatError::BadFormat("magic mismatch".into()));
    }
    if bytes.len() < DVS_HEADER_LEN {
        return Err(FormatError::Truncated {
            expected: DVS_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let u64_at = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DVS_VERSION {
        return Err(FormatError::BadFormat(format!("unsupported version {version}")));
    }
    let (m, n, flags) = (u64_at(8), u64_at(16), u64_at(24));
    if flags & !FLAG_SYMMETRIC != 0 {
        return Err(FormatError::BadFormat(format!("unknown flags {flags:#x}")));
    }
    let expected = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| usize::try_from(c).ok())
        .and_then(|c| c.checked_add(DVS_HEADER_LEN))
        .ok_or_else(|| FormatError::BadFormat(format!("dimensions {m}x{n} overflow")))?;
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(FormatError::BadFormat(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let values = bytes[DVS_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((m as usize, n as usize, values, flags & FLAG_SYMMETRIC != 0))
}

/// Serializes a distance matrix as a DVS1 byte stream.
pub fn encode_matrix(d: &DistanceMatrix) -> Vec<u8> {
    encode_raw(d.rows(), d.cols(), d.values(), d.is_symmetric())
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DistanceMatrix, FormatError> {
    let (m, n, values, symmetric) = decode_raw(bytes)?;
    DistanceMatrix::new(m, n, values, symmetric).map_err(|e| FormatError::BadFormat(e.to_string()))
}

/// DVS1 container for an arbitrary dense matrix (Gram matrices,
/// eigenvector blocks); the symmetric flag is never set.
pub fn write_dense(path: &Path, m: &Matrix) -> Result<(), FormatError> {
    write_atomic(path, &encode_raw(m.rows(), m.cols(), m.as_slice(), false))
}

pub fn read_dense(path: &Path) -> Result<Matrix, FormatError> {
    let (m, n, values, _) = decode_raw(&fs::read(path).map_err(io_err(path))?)?;
    Ok(Matrix::from_row_major(m, n, values))
}

pub fn write_matrix(path: &Path, d: &DistanceMatrix) -> Result<(), FormatError> {
    write_atomic(path, &encode_matrix(d))
}

pub fn read_matrix(path: &Path) -> Result<DistanceMatrix, FormatError> {
    decode_matrix(&fs::read(path).map_err(io_err(path))?)
}

/// Tab-separated export with a header of column ids and the row id first.
pub fn matrix_tsv(d: &DistanceMatrix, row_ids: &[String], col_ids: &[String]) -> String {
    let mut out = String::from("id");
    for id in col_ids {
        write!(out, "\t{id}").unwrap();
    }
    out.push('\n');
    for (i, id) in row_ids.iter().enumerate() {
        out.push_str(id);
        for v in d.row(i) {
            write!(out, "\t{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- embedding

/// Path of the `key=value` sidecar next to an embedding TSV.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Embedding table (`id dim1 .. dimr`) and its metadata sidecar.
pub fn embedding_tsv(e: &Embedding, ids: &[String]) -> (String, String) {
    let mut tsv = String::from("id");
    for k in 1..=e.rank() {
        write!(tsv, "\tdim{k}").unwrap();
    }
    tsv.push('\n');
    for (i, id) in ids.iter().enumerate().take(e.n()) {
        tsv.push_str(id);
        for v in e.point(i) {
            write!(tsv, "\t{v}").unwrap();
        }
        tsv.push('\n');
    }
    let meta = format!(
        "n={}\nrank={}\nrequested_rank={}\ntruncated={}\ndropped_negative_mass={}\neigenvalues={}\n",
        e.n(),
        e.rank(),
        e.requested_rank,
        e.is_truncated(),
        e.dropped_negative_mass,
        join_f64(&e.eigenvalues)
    );
    (tsv, meta)
}

/// Writes `path` and `path.meta`; returns both paths.
pub fn write_embedding(path: &Path, e: &Embedding, ids: &[String]) -> Result<[PathBuf; 2], FormatError> {
    let (tsv, meta) = embedding_tsv(e, ids);
    write_atomic(path, tsv.as_bytes())?;
    let mp = meta_path(path);
    write_atomic(&mp, meta.as_bytes())?;
    Ok([path.to_path_buf(), mp])
}

/// Reads an embedding TSV. Eigenvalues and the dropped mass come from the
/// sidecar when present, otherwise from the column norms.
pub fn read_embedding(path: &Path) -> Result<(Vec<String>, Embedding), FormatError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let header = lines.next().ok_or_else(|| parse_err(path, 1, "empty embedding file"))?.1;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.first() != Some(&"id") {
        return Err(parse_err(path, 1, "header must start with `id`"));
    }
    let rank = cols.len() - 1;
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        ids.push(fields.next().unwrap_or_default().to_string());
        let row: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(path, k + 1, e.to_string())))
            .collect::<Result<_, _>>()?;
        if row.len() != rank {
            return Err(parse_err(path, k + 1, format!("{} values, expected {rank}", row.len())));
        }
        data.extend(row);
    }
    let coords = Matrix::from_row_major(ids.len(), rank, data);
    let mut e = Embedding::from_coords(coords);

    let mp = meta_path(path);
    if mp.exists() {
        let meta = read_meta(&mp)?;
        let num = |key: &str| -> Result<Option<f64>, FormatError> {
            meta.get(key)
                .map(|v| v.parse::<f64>().map_err(|err| parse_err(&mp, 0, format!("{key}: {err}"))))
                .transpose()
        };
        if let Some(v) = num("requested_rank")? {
            e.requested_rank = v as usize;
        }
        if let Some(v) = num("dropped_negative_mass")? {
            e.dropped_negative_mass = v;
        }
        if let Some(list) = meta.get("eigenvalues") {
            let vals: Vec<f64> = list
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|err| parse_err(&mp, 0, err.to_string())))
                .collect::<Result<_, _>>()?;
            if vals.len() != rank {
                return Err(parse_err(&mp, 0, "eigenvalue count does not match embedding rank"));
            }
            e.eigenvalues = vals;
        }
    }
    Ok((ids, e))
}

fn read_meta(path: &Path) -> Result<BTreeMap<String, String>, FormatError> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, k + 1, "expected key=value"))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Eigenvectors go to `path` as a dense DVS1 block; eigenvalues and the
/// residual proxy to `path.meta`.
pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<[PathBuf; 2], FormatError> {
    write_dense(path, &s.vectors)?;
    let meta = format!("rank={}\nresid={}\neigenvalues={}\n", s.len(), s.resid, join_f64(&s.eigenvalues));
    let mp = meta_path(path);
    write_atomic(&mp, meta.as_bytes())?;
    Ok([path.to_path_buf(), mp])
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum, FormatError> {
    let vectors = read_dense(path)?;
    let mp = meta_path(path);
    let meta = read_meta(&mp)?;
    let eigenvalues: Vec<f64> = meta
        .get("eigenvalues")
        .map(String::as_str)
        .unwrap_or("")
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| parse_err(&mp, 0, e.to_string())))
        .collect::<Result<_, _>>()?;
    if eigenvalues.len() != vectors.cols() {
        return Err(parse_err(&mp, 0, "eigenvalue count does not match eigenvector block"));
    }
    let resid = meta
        .get("resid")
        .ok_or_else(|| parse_err(&mp, 0, "missing resid"))?
        .parse::<f64>()
        .map_err(|e| parse_err(&mp, 0, e.to_string()))?;
    Ok(Spectrum {
        eigenvalues,
        vectors,
        resid,
    })
}

// ---------------------------------------------------------------- labels

/// `ref_id<TAB>species` pairs; a leading `ref_id` header line is skipped.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, String>, FormatError> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, species) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, k + 1, "expected ref_id<TAB>species"))?;
        if k == 0 && id == "ref_id" {
            continue;
        }
        if out.insert(id.to_string(), species.to_string()).is_some() {
            return Err(parse_err(path, k + 1, format!("duplicate id {id}")));
        }
    }
    Ok(out)
}

/// Species column of the assignment table.
pub fn species_field(a: &AssignmentResult) -> String {
    match &a.status {
        Status::Assigned(s) => s.clone(),
        Status::Ambiguous => a.matched_species.iter().cloned().collect::<Vec<_>>().join(";"),
        Status::Unknown => "-".to_string(),
    }
}

pub fn assignments_tsv(assignments: &[AssignmentResult]) -> String {
    let mut out = String::from("read_id\tstatus\tspecies\tsupport\n");
    for a in assignments {
        writeln!(out, "{}\t{}\t{}\t{}", a.read_id, a.status.kind(), species_field(a), a.support).unwrap();
    }
    out
}

/// Per-read plotting labels from either an assignment table (species for
/// assigned reads, the status otherwise) or plain `id<TAB>label` pairs.
pub fn read_point_labels(path: &Path) -> Result<BTreeMap<String, String>, FormatError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().peekable();
    let assignment_table = lines.peek().is_some_and(|(_, l)| l.starts_with("read_id\tstatus"));
    if assignment_table {
        lines.next();
    }
    let mut out = BTreeMap::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let label = if assignment_table {
            match fields.as_slice() {
                [_, "assigned", species, ..] => species.to_string(),
                [_, status, ..] => status.to_string(),
                _ => return Err(parse_err(path, k + 1, "short assignment row")),
            }
        } else {
            match fields.as_slice() {
                [_, label, ..] => label.to_string(),
                _ => return Err(parse_err(path, k + 1, "expected id<TAB>label")),
            }
        };
        out.insert(fields[0].to_string(), label);
    }
    Ok(out)
}

// ---------------------------------------------------------------- density

pub fn hexbin_tsv(g: &HexBinGrid) -> String {
    let mut out = String::from("q\tr\tcenter_x\tcenter_y\tcount\tlogcount\n");
    for b in &g.bins {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            b.q,
            b.r,
            b.center[0],
            b.center[1],
            b.count,
            log_count(b.count)
        )
        .unwrap();
    }
    out
}

pub fn pcoords_tsv(t: &ParallelCoordsTable) -> String {
    let mut out = String::from("id");
    for k in 1..=t.dims {
        write!(out, "\tdim{k}").unwrap();
    }
    out.push_str("\tlabel\n");
    for row in &t.rows {
        out.push_str(&row.id);
        for v in &row.values {
            write!(out, "\t{v}").unwrap();
        }
        writeln!(out, "\t{}", row.label).unwrap();
    }
    out
}
