//! Scalable co-clustering of rectangular relational data (sco-iVAT).
//!
//! Rows and columns of the input are treated as two sets of objects whose
//! feature vectors are the matrix rows and columns. Each side is sampled with
//! maximin random sampling, ordered by iVAT and cut into single-linkage
//! clusters; the sampled submatrix reordered by both permutations exposes
//! co-clusters as rectangular blocks whose values depart from the rest.

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io;
use crate::matrix::{
    pairwise_with_mode, DissimilarityMatrix, DistanceMode, FeatureMatrix, MatrixKind, ObjectSet,
    RectRelationalMatrix, SENTINEL,
};
use crate::mmrs::{mmrs_sample, MmrsSample};
use crate::vat::{cut_clusters, ivat, VatOrdering};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoIvatConfig {
    /// Row sample size; `m == M` disables row sampling.
    pub m: usize,
    /// Column sample size; `n == N` disables column sampling.
    pub n: usize,
    /// Distinguished objects per sampled side.
    pub k_prime: usize,
    pub k_rows: usize,
    pub k_cols: usize,
    pub seed: u64,
    pub mode: DistanceMode,
}

/// One side (rows or columns) after sampling and iVAT.
#[derive(Clone, Debug)]
pub struct SideResult {
    /// Sampled object indices, ascending.
    pub sample: Vec<usize>,
    /// `None` when the side was taken whole.
    pub mmrs: Option<MmrsSample>,
    /// Ordering over sample positions.
    pub ordering: VatOrdering,
    /// Original object indices in iVAT order (RP or CP).
    pub perm: Vec<usize>,
    /// iVAT-transformed dissimilarities in iVAT order.
    pub rdi: DissimilarityMatrix,
    /// Cluster label of `perm[i]`; contiguous runs.
    pub labels: Vec<usize>,
}

impl SideResult {
    /// Labels of the sampled objects, listed in `sample` order.
    pub fn sample_labels(&self) -> Vec<usize> {
        let mut by_sample = vec![0; self.sample.len()];
        for (p, &s) in self.ordering.permutation.iter().enumerate() {
            by_sample[s] = self.labels[p];
        }
        by_sample
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.last().map_or(0, |l| l + 1)
    }

    /// Half-open position ranges of each cluster within `perm`.
    pub fn cluster_ranges(&self) -> Vec<Range<usize>> {
        let mut ranges: Vec<Range<usize>> = Vec::new();
        for (p, &l) in self.labels.iter().enumerate() {
            if l == ranges.len() {
                ranges.push(p..p + 1);
            } else {
                ranges[l].end = p + 1;
            }
        }
        ranges
    }
}

#[derive(Clone, Debug)]
pub struct CoClusterResult {
    pub rows: SideResult,
    pub cols: SideResult,
    /// `reordered[i][j] = input[rows.perm[i]][cols.perm[j]]`.
    pub reordered: RectRelationalMatrix,
}

impl CoClusterResult {
    pub fn row_perm(&self) -> &[usize] {
        &self.rows.perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.cols.perm
    }
}

pub fn sco_ivat(d: &RectRelationalMatrix, cfg: &ScoIvatConfig) -> Result<CoClusterResult> {
    let (big_m, big_n) = (d.rows(), d.cols());
    if big_m == 0 || big_n == 0 {
        return Err(Error::EmptyInput("relational matrix"));
    }
    if cfg.m == 0 || cfg.m > big_m {
        return Err(Error::param("m", cfg.m, format!("1..={big_m}")));
    }
    if cfg.n == 0 || cfg.n > big_n {
        return Err(Error::param("n", cfg.n, format!("1..={big_n}")));
    }
    if cfg.k_rows == 0 || cfg.k_rows > cfg.m {
        return Err(Error::param("k_rows", cfg.k_rows, format!("1..={}", cfg.m)));
    }
    if cfg.k_cols == 0 || cfg.k_cols > cfg.n {
        return Err(Error::param("k_cols", cfg.k_cols, format!("1..={}", cfg.n)));
    }
    let rows = d.row_objects();
    let cols = d.column_objects();
    let (row_side, col_side) = rayon::join(
        || process_side(&rows, cfg.m, cfg.k_prime, cfg.k_rows, cfg.seed, cfg.mode),
        || process_side(&cols, cfg.n, cfg.k_prime, cfg.k_cols, cfg.seed, cfg.mode),
    );
    let (row_side, col_side) = (row_side?, col_side?);
    let reordered = d.submatrix(&row_side.perm, &col_side.perm);
    Ok(CoClusterResult {
        rows: row_side,
        cols: col_side,
        reordered,
    })
}

/// Samples one side (unless `size` covers it), builds its dissimilarities,
/// runs iVAT and cuts `k` clusters.
pub fn process_side<S: ObjectSet + ?Sized>(
    objects: &S,
    size: usize,
    k_prime: usize,
    k: usize,
    seed: u64,
    mode: DistanceMode,
) -> Result<SideResult> {
    let (sample, mmrs) = if size == objects.len() {
        ((0..size).collect(), None)
    } else {
        let s = mmrs_sample(objects, k_prime, size, seed, mode)?;
        (s.sample.clone(), Some(s))
    };
    let features = objects.gather(&sample);
    let dis = pairwise_with_mode(&features, mode);
    let (ordering, rdi) = ivat(&dis)?;
    let by_sample = cut_clusters(&ordering, k)?;
    let perm = ordering.permutation.iter().map(|&p| sample[p]).collect();
    let labels = ordering.permutation.iter().map(|&p| by_sample[p]).collect();
    Ok(SideResult {
        sample,
        mmrs,
        ordering,
        perm,
        rdi,
        labels,
    })
}

/// Gives every object the label of its nearest sampled object (lowest sampled
/// position on ties).
pub fn extend_labels<S: ObjectSet + ?Sized>(
    sampled: &FeatureMatrix,
    sampled_labels: &[usize],
    all: &S,
    mode: DistanceMode,
) -> Result<Vec<usize>> {
    if sampled.rows() == 0 {
        return Err(Error::EmptyInput("no sampled objects to extend labels from"));
    }
    if sampled_labels.len() != sampled.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} sampled objects",
            sampled_labels.len(),
            sampled.rows()
        )));
    }
    if sampled.cols() != all.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sampled objects have {} features, population has {}",
            sampled.cols(),
            all.dim()
        )));
    }
    let total = all.len();
    let mut best = vec![f64::INFINITY; total];
    let mut labels = vec![0usize; total];
    let mut scratch = vec![0.0; total];
    for (s, &label) in sampled_labels.iter().enumerate() {
        all.sq_distances_to(sampled.row(s), mode, &mut scratch);
        for ((b, l), &d) in best.iter_mut().zip(labels.iter_mut()).zip(&scratch) {
            if d < *b {
                *b = d;
                *l = label;
            }
        }
    }
    Ok(labels)
}

/// Extends one side's labels to the whole population; sampled objects keep
/// their own labels.
pub fn extend_side<S: ObjectSet + ?Sized>(
    side: &SideResult,
    all: &S,
    mode: DistanceMode,
) -> Result<Vec<usize>> {
    let features = all.gather(&side.sample);
    let sample_labels = side.sample_labels();
    let mut labels = extend_labels(&features, &sample_labels, all, mode)?;
    for (&s, &l) in side.sample.iter().zip(&sample_labels) {
        labels[s] = l;
    }
    Ok(labels)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoClusterBlock {
    pub row_cluster: usize,
    pub col_cluster: usize,
    /// Positions within the reordered matrix.
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    /// `None` when every cell of the block is a sentinel.
    pub block_mean: Option<f64>,
    pub global_mean: f64,
    pub flagged: bool,
}

/// A quarter of the observed value range of the reordered matrix.
pub fn default_tau(result: &CoClusterResult) -> f64 {
    result
        .reordered
        .observed_range()
        .map_or(0.0, |(lo, hi)| 0.25 * (hi - lo))
}

/// Reports every (row cluster, column cluster) block and flags those whose
/// mean departs from the global mean by at least `tau`. Sentinel cells are
/// left out of both means.
pub fn extract_coclusters(result: &CoClusterResult, tau: f64) -> Result<Vec<CoClusterBlock>> {
    let m = &result.reordered;
    let skip_sentinel = m.kind() == MatrixKind::Performance;
    let global_mean = m
        .observed_mean()
        .ok_or(Error::EmptyInput("every cell is a sentinel"))?;
    let row_ranges = result.rows.cluster_ranges();
    let col_ranges = result.cols.cluster_ranges();
    if row_ranges.is_empty() || col_ranges.is_empty() {
        return Err(Error::EmptyInput("no cluster labels"));
    }
    let mut blocks = Vec::with_capacity(row_ranges.len() * col_ranges.len());
    for (rc, rr) in row_ranges.iter().enumerate() {
        for (cc, cr) in col_ranges.iter().enumerate() {
            let mut sum = 0.0;
            let mut count = 0usize;
            for i in rr.clone() {
                for &v in &m.row(i)[cr.clone()] {
                    if skip_sentinel && v == SENTINEL {
                        continue;
                    }
                    sum += v;
                    count += 1;
                }
            }
            let block_mean = (count > 0).then(|| sum / count as f64);
            let flagged = block_mean.is_some_and(|mean| (mean - global_mean).abs() >= tau);
            blocks.push(CoClusterBlock {
                row_cluster: rc,
                col_cluster: cc,
                rows: rr.clone(),
                cols: cr.clone(),
                block_mean,
                global_mean,
                flagged,
            });
        }
    }
    Ok(blocks)
}

pub const BLOCKS_HEADER: &str = "row_cluster,col_cluster,rows,cols,block_mean,global_mean,flagged";

/// Blocks as CSV; `rows`/`cols` are half-open position ranges `start:end`
/// and an undefined mean is left empty.
pub fn blocks_csv(blocks: &[CoClusterBlock]) -> String {
    let mut s = String::from(BLOCKS_HEADER);
    s.push('\n');
    for b in blocks {
        let mut mean = String::new();
        if let Some(v) = b.block_mean {
            io::format_value(v, &mut mean);
        }
        let mut global = String::new();
        io::format_value(b.global_mean, &mut global);
        let _ = writeln!(
            s,
            "{},{},{}:{},{}:{},{},{},{}",
            b.row_cluster,
            b.col_cluster,
            b.rows.start,
            b.rows.end,
            b.cols.start,
            b.cols.end,
            mean,
            global,
            b.flagged
        );
    }
    s
}

/// Writes the result bundle into `dir` and returns the file names written.
pub fn write_bundle(dir: &Path, result: &CoClusterResult, blocks: &[CoClusterBlock]) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_rect(&dir.join("reordered.txt"), &result.reordered)?;
    io::write_indices(&dir.join("row_perm.txt"), &result.rows.perm)?;
    io::write_indices(&dir.join("col_perm.txt"), &result.cols.perm)?;
    io::write_indices(&dir.join("row_labels.txt"), &result.rows.labels)?;
    io::write_indices(&dir.join("col_labels.txt"), &result.cols.labels)?;
    io::write_dissimilarity(&dir.join("row_rdi.txt"), &result.rows.rdi)?;
    io::write_dissimilarity(&dir.join("col_rdi.txt"), &result.cols.rdi)?;
    let path = dir.join("blocks.csv");
    fs::write(&path, blocks_csv(blocks)).map_err(|e| Error::io(&path, e))?;
    Ok([
        "reordered.txt",
        "row_perm.txt",
        "col_perm.txt",
        "row_labels.txt",
        "col_labels.txt",
        "row_rdi.txt",
        "col_rdi.txt",
        "blocks.csv",
    ]
    .map(String::from)
    .to_vec())
}
