//! Density summaries of an embedding: hexagonal bins over a pair of axes and
//! parallel-coordinates tables over the leading axes.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::mds::Embedding;
use crate::par::fill_chunks;

/// Hexagons across the widest axis range when no radius is given.
pub const DEFAULT_BINS_ACROSS: f64 = 50.0;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Axial offsets of the six neighbours of a hexagon.
pub const HEX_NEIGHBOURS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("axis pair ({0}, {1}) is invalid for an embedding of rank {2}")]
    BadAxis(usize, usize, usize),
    #[error("hexagon radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("{k} dimensions requested from an embedding of rank {rank}")]
    RankTooLarge { k: usize, rank: usize },
    #[error("{labels} labels for {points} points")]
    LabelCount { labels: usize, points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HexBin {
    pub q: i64,
    pub r: i64,
    pub center: [f64; 2],
    pub count: u64,
}

/// Pointy-top hexagonal lattice anchored at `origin`; only non-empty bins
/// are listed, sorted by `(q, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HexBinGrid {
    pub axes: (usize, usize),
    pub radius: f64,
    pub origin: [f64; 2],
    pub bins: Vec<HexBin>,
}

impl HexBinGrid {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Center of hexagon `(q, r)`.
    pub fn center(&self, q: i64, r: i64) -> [f64; 2] {
        hex_center(self.origin, self.radius, q, r)
    }

    /// Axial coordinates of the hexagon containing `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> (i64, i64) {
        locate(self.origin, self.radius, x, y)
    }

    pub fn count_at(&self, q: i64, r: i64) -> u64 {
        self.bins
            .binary_search_by(|b| (b.q, b.r).cmp(&(q, r)))
            .map(|k| self.bins[k].count)
            .unwrap_or(0)
    }
}

fn hex_center(origin: [f64; 2], radius: f64, q: i64, r: i64) -> [f64; 2] {
    let (q, r) = (q as f64, r as f64);
    [
        origin[0] + radius * SQRT_3 * (q + 0.5 * r),
        origin[1] + radius * 1.5 * r,
    ]
}

/// Nearest hexagon center to `(x, y)`; equidistant candidates resolve to the
/// smaller `(q, r)`.
fn locate(origin: [f64; 2], radius: f64, x: f64, y: f64) -> (i64, i64) {
    let (dx, dy) = (x - origin[0], y - origin[1]);
    let rf = dy / (1.5 * radius);
    let qf = dx / (SQRT_3 * radius) - 0.5 * rf;
    let (q0, r0) = cube_round(qf, rf);

    let mut best = (f64::INFINITY, (q0, r0));
    for (dq, dr) in core::iter::once((0, 0)).chain(HEX_NEIGHBOURS) {
        let cand = (q0 + dq, r0 + dr);
        let c = hex_center(origin, radius, cand.0, cand.1);
        let d2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
        if d2 < best.0 || (d2 == best.0 && cand < best.1) {
            best = (d2, cand);
        }
    }
    best.1
}

fn cube_round(qf: f64, rf: f64) -> (i64, i64) {
    let sf = -qf - rf;
    let (mut q, mut r, s) = (libm::round(qf), libm::round(rf), libm::round(sf));
    let (dq, dr, ds) = ((q - qf).abs(), (r - rf).abs(), (s - sf).abs());
    if dq > dr && dq > ds {
        q = -r - s;
    } else if dr > ds {
        r = -q - s;
    }
    (q as i64, r as i64)
}

/// `(max axis range) / 50` over the chosen axes, or 1 for a degenerate cloud.
pub fn default_radius(xs: &[f64], ys: &[f64]) -> f64 {
    let range = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    };
    let widest = range(xs).max(range(ys));
    if widest > 0.0 {
        widest / DEFAULT_BINS_ACROSS
    } else {
        1.0
    }
}

/// Bins the projection of `e` on axes `(i, j)` (0-based) into hexagons of
/// circumradius `radius`, anchored at the per-axis minimum.
pub fn hexbin(e: &Embedding, axes: (usize, usize), radius: f64, threads: usize) -> Result<HexBinGrid, DensityError> {
    let (i, j) = axes;
    if i == j || i >= e.rank() || j >= e.rank() {
        return Err(DensityError::BadAxis(i, j, e.rank()));
    }
    let xs = e.coords.column(i);
    let ys = e.coords.column(j);
    let mut grid = hexbin_xy(&xs, &ys, radius, threads)?;
    grid.axes = axes;
    Ok(grid)
}

/// Hexagonal binning of raw `(x, y)` points.
pub fn hexbin_xy(xs: &[f64], ys: &[f64], radius: f64, threads: usize) -> Result<HexBinGrid, DensityError> {
    assert_eq!(xs.len(), ys.len(), "coordinate slices differ in length");
    if !(radius.is_finite() && radius > 0.0) {
        return Err(DensityError::BadRadius(radius));
    }
    let origin = if xs.is_empty() {
        [0.0, 0.0]
    } else {
        [
            xs.iter().copied().fold(f64::INFINITY, f64::min),
            ys.iter().copied().fold(f64::INFINITY, f64::min),
        ]
    };

    let mut cells = vec![(0i64, 0i64); xs.len()];
    let _ = fill_chunks::<_, (), _>(&mut cells, threads, |offset, part| {
        for (k, cell) in part.iter_mut().enumerate() {
            *cell = locate(origin, radius, xs[offset + k], ys[offset + k]);
        }
        Ok(())
    });

    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for cell in cells {
        *counts.entry(cell).or_insert(0) += 1;
    }
    let bins = counts
        .into_iter()
        .map(|((q, r), count)| HexBin {
            q,
            r,
            center: hex_center(origin, radius, q, r),
            count,
        })
        .collect();
    Ok(HexBinGrid {
        axes: (0, 1),
        radius,
        origin,
        bins,
    })
}

/// `log10(1 + count)`.
pub fn log_count(count: u64) -> f64 {
    libm::log10(1.0 + count as f64)
}

/// Log-scaled counts, parallel to `g.bins`.
pub fn log_counts(g: &HexBinGrid) -> Vec<f64> {
    g.bins.iter().map(|b| log_count(b.count)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCoordsRow {
    pub id: String,
    pub values: Vec<f64>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCoordsTable {
    pub dims: usize,
    pub rows: Vec<ParallelCoordsRow>,
}

/// First `k` coordinates of every read with its label (empty when no labels
/// are given). With `only_label`, keeps just the rows carrying that label.
pub fn parallel_coords(
    e: &Embedding,
    ids: &[String],
    k: usize,
    labels: Option<&[String]>,
    only_label: Option<&str>,
) -> Result<ParallelCoordsTable, DensityError> {
    if k > e.rank() {
        return Err(DensityError::RankTooLarge { k, rank: e.rank() });
    }
    if ids.len() != e.n() {
        return Err(DensityError::LabelCount {
            labels: ids.len(),
            points: e.n(),
        });
    }
    if let Some(l) = labels {
        if l.len() != e.n() {
            return Err(DensityError::LabelCount {
                labels: l.len(),
                points: e.n(),
            });
        }
    }
    let rows = (0..e.n())
        .map(|i| ParallelCoordsRow {
            id: ids[i].clone(),
            values: e.point(i)[..k].to_vec(),
            label: labels.map(|l| l[i].clone()).unwrap_or_default(),
        })
        .filter(|row| only_label.is_none_or(|want| row.label == want))
        .collect();
    Ok(ParallelCoordsTable { dims: k, rows })
}
