//! Dense matrix containers and Euclidean distance computation.
//!
//! Three shapes of data flow through the toolkit:
//!
//! * [`FeatureMatrix`]: objects as rows of real-valued feature vectors.
//! * [`DissimilarityMatrix`]: square, symmetric, zero-diagonal, nonnegative.
//! * [`RectRelationalMatrix`]: an `M x N` relation between row objects and
//!   column objects. The `Performance` kind restricts entries to
//!   `{-1} U [0, 1]`, where `-1` marks "no observation".
//!
//! Any of these can be viewed as a set of objects with feature vectors through
//! the [`ObjectSet`] trait, which is what the sampling and labelling code
//! operates on. Columns of a row-major matrix are exposed without transposing.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sentinel stored in performance matrices for "no bookings".
pub const SENTINEL: f64 = -1.0;

/// How distances treat sentinel cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistanceMode {
    /// Every coordinate participates, sentinels included as ordinary values.
    #[default]
    Verbatim,
    /// Only coordinates observed (not `-1`) in both objects participate; the
    /// partial sum of squares is rescaled by `dim / shared`. Objects with no
    /// shared observed coordinate are at distance `sqrt(dim)`.
    MaskSentinel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} feature matrix",
                values.len()
            )));
        }
        check_finite(&values, cols)?;
        Ok(FeatureMatrix {
            rows,
            cols,
            values,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} objects",
                labels.len(),
                self.rows
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn objects(&self) -> RowObjects<'_> {
        RowObjects {
            values: &self.values,
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Copies the rows named by `indices`, in that order. Labels follow.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }
}

/// Square symmetric dissimilarity matrix.
///
/// `minimax` records whether the entries are path-based minimax distances
/// (the output of the iVAT transform) rather than raw dissimilarities.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    minimax: bool,
}

impl DissimilarityMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n}x{n} dissimilarity matrix",
                values.len()
            )));
        }
        check_finite(&values, n)?;
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidDissimilarity(format!(
                    "nonzero diagonal entry at {i}"
                )));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if v < 0.0 {
                    return Err(Error::InvalidDissimilarity(format!(
                        "negative entry at ({i}, {j})"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidDissimilarity(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix {
            n,
            values,
            minimax: false,
        })
    }

    /// Builds a matrix from the strict upper triangle produced by `f(i, j)`, `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        DissimilarityMatrix::new(n, values)
    }

    pub(crate) fn from_trusted(n: usize, values: Vec<f64>, minimax: bool) -> Self {
        debug_assert_eq!(values.len(), n * n);
        DissimilarityMatrix { n, values, minimax }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_minimax(&self) -> bool {
        self.minimax
    }

    /// `out[a][b] = self[perm[a]][perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> DissimilarityMatrix {
        let n = perm.len();
        let mut values = Vec::with_capacity(n * n);
        for &pi in perm {
            let row = self.row(pi);
            values.extend(perm.iter().map(|&pj| row[pj]));
        }
        DissimilarityMatrix {
            n,
            values,
            minimax: self.minimax,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatrixKind {
    #[default]
    Generic,
    /// Late-pickup-rate matrix: entries in `{-1} U [0, 1]`.
    Performance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RectRelationalMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    kind: MatrixKind,
}

impl RectRelationalMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        check_finite(&values, cols)?;
        if kind == MatrixKind::Performance {
            check_performance(&values, cols)?;
        }
        Ok(RectRelationalMatrix {
            rows,
            cols,
            values,
            kind,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Re-validates the entries as a performance matrix.
    pub fn into_performance(self) -> Result<Self> {
        check_performance(&self.values, self.cols)?;
        Ok(RectRelationalMatrix {
            kind: MatrixKind::Performance,
            ..self
        })
    }

    /// `out[a][b] = self[rows[a]][cols[b]]`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> RectRelationalMatrix {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        RectRelationalMatrix {
            rows: rows.len(),
            cols: cols.len(),
            values,
            kind: self.kind,
        }
    }

    pub fn transpose(&self) -> RectRelationalMatrix {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        RectRelationalMatrix {
            rows: self.cols,
            cols: self.rows,
            values,
            kind: self.kind,
        }
    }

    pub fn row_objects(&self) -> RowObjects<'_> {
        RowObjects {
            values: &self.values,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn column_objects(&self) -> ColumnObjects<'_> {
        ColumnObjects {
            values: &self.values,
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Mean of all non-sentinel cells (all cells for the generic kind).
    pub fn observed_mean(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &v in &self.values {
            if self.kind == MatrixKind::Performance && v == SENTINEL {
                continue;
            }
            sum += v;
            count += 1;
        }
        (count > 0).then(|| sum / count as f64)
    }

    /// `(min, max)` over non-sentinel cells (all cells for the generic kind).
    pub fn observed_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for &v in &self.values {
            if self.kind == MatrixKind::Performance && v == SENTINEL {
                continue;
            }
            range = Some(match range {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
        range
    }
}

fn check_finite(values: &[f64], cols: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(p) => Err(Error::NonFinite {
            row: p / cols.max(1),
            col: p % cols.max(1),
        }),
    }
}

fn check_performance(values: &[f64], cols: usize) -> Result<()> {
    match values
        .iter()
        .position(|&v| v != SENTINEL && !(0.0..=1.0).contains(&v))
    {
        None => Ok(()),
        Some(p) => Err(Error::OutOfRange {
            row: p / cols.max(1),
            col: p % cols.max(1),
            value: values[p],
        }),
    }
}

/// A collection of objects, each described by a feature vector of length `dim`.
pub trait ObjectSet: Sync {
    fn len(&self) -> usize;

    fn dim(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copies the feature vector of object `i`.
    fn features(&self, i: usize) -> Vec<f64>;

    /// Writes the squared distance from `point` to every object into `out`.
    fn sq_distances_to(&self, point: &[f64], mode: DistanceMode, out: &mut [f64]);

    /// Coordinate-wise mean; under [`DistanceMode::MaskSentinel`] sentinel
    /// cells are skipped (an all-sentinel coordinate averages to the sentinel).
    fn centroid(&self, mode: DistanceMode) -> Vec<f64>;

    /// Copies the objects named by `indices` into a feature matrix.
    fn gather(&self, indices: &[usize]) -> FeatureMatrix {
        let dim = self.dim();
        let mut values = Vec::with_capacity(indices.len() * dim);
        for &i in indices {
            values.extend(self.features(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: dim,
            values,
            labels: None,
        }
    }
}

/// Rows of a row-major buffer as objects.
#[derive(Clone, Copy, Debug)]
pub struct RowObjects<'a> {
    values: &'a [f64],
    rows: usize,
    cols: usize,
}

impl RowObjects<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

impl ObjectSet for RowObjects<'_> {
    fn len(&self) -> usize {
        self.rows
    }

    fn dim(&self) -> usize {
        self.cols
    }

    fn features(&self, i: usize) -> Vec<f64> {
        self.row(i).to_vec()
    }

    fn sq_distances_to(&self, point: &[f64], mode: DistanceMode, out: &mut [f64]) {
        assert_eq!(point.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| *o = sq_distance(self.row(i), point, mode));
    }

    fn centroid(&self, mode: DistanceMode) -> Vec<f64> {
        let mut sum = vec![0.0; self.cols];
        let mut count = vec![0usize; self.cols];
        for i in 0..self.rows {
            for ((s, c), &v) in sum.iter_mut().zip(count.iter_mut()).zip(self.row(i)) {
                if mode == DistanceMode::MaskSentinel && v == SENTINEL {
                    continue;
                }
                *s += v;
                *c += 1;
            }
        }
        finish_centroid(sum, count)
    }
}

/// Columns of a row-major buffer as objects, without transposing.
#[derive(Clone, Copy, Debug)]
pub struct ColumnObjects<'a> {
    values: &'a [f64],
    rows: usize,
    cols: usize,
}

/// Column block width for the strided column kernels.
const COLUMN_CHUNK: usize = 256;

impl ObjectSet for ColumnObjects<'_> {
    fn len(&self) -> usize {
        self.cols
    }

    fn dim(&self) -> usize {
        self.rows
    }

    fn features(&self, j: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.values[i * self.cols + j])
            .collect()
    }

    fn sq_distances_to(&self, point: &[f64], mode: DistanceMode, out: &mut [f64]) {
        assert_eq!(point.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        let dim = self.rows as f64;
        out.par_chunks_mut(COLUMN_CHUNK)
            .enumerate()
            .for_each(|(chunk, out)| {
                let start = chunk * COLUMN_CHUNK;
                let width = out.len();
                out.iter_mut().for_each(|o| *o = 0.0);
                match mode {
                    DistanceMode::Verbatim => {
                        for (i, &p) in point.iter().enumerate() {
                            let row = &self.values[i * self.cols + start..][..width];
                            for (o, &v) in out.iter_mut().zip(row) {
                                let d = v - p;
                                *o += d * d;
                            }
                        }
                    }
                    DistanceMode::MaskSentinel => {
                        let mut shared = vec![0usize; width];
                        for (i, &p) in point.iter().enumerate() {
                            if p == SENTINEL {
                                continue;
                            }
                            let row = &self.values[i * self.cols + start..][..width];
                            for ((o, s), &v) in out.iter_mut().zip(shared.iter_mut()).zip(row) {
                                if v != SENTINEL {
                                    let d = v - p;
                                    *o += d * d;
                                    *s += 1;
                                }
                            }
                        }
                        for (o, &s) in out.iter_mut().zip(&shared) {
                            *o = rescale_masked(*o, s, dim);
                        }
                    }
                }
            });
    }

    fn centroid(&self, mode: DistanceMode) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.values[i * self.cols..(i + 1) * self.cols];
                let (sum, count) = row
                    .iter()
                    .filter(|&&v| mode == DistanceMode::Verbatim || v != SENTINEL)
                    .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
                if count == 0 {
                    SENTINEL
                } else {
                    sum / count as f64
                }
            })
            .collect()
    }
}

fn finish_centroid(sum: Vec<f64>, count: Vec<usize>) -> Vec<f64> {
    sum.into_iter()
        .zip(count)
        .map(|(s, c)| if c == 0 { SENTINEL } else { s / c as f64 })
        .collect()
}

#[inline]
fn rescale_masked(partial: f64, shared: usize, dim: f64) -> f64 {
    if shared == 0 {
        dim
    } else {
        partial * dim / shared as f64
    }
}

/// Squared Euclidean distance, summed in four interleaved lanes.
#[inline]
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn sq_distance(a: &[f64], b: &[f64], mode: DistanceMode) -> f64 {
    match mode {
        DistanceMode::Verbatim => sq_euclidean(a, b),
        DistanceMode::MaskSentinel => {
            let mut sum = 0.0;
            let mut shared = 0usize;
            for (&x, &y) in a.iter().zip(b) {
                if x != SENTINEL && y != SENTINEL {
                    let d = x - y;
                    sum += d * d;
                    shared += 1;
                }
            }
            rescale_masked(sum, shared, a.len() as f64)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Euclidean,
}

/// All-pairs distances between the rows of `features`.
pub fn pairwise_dissimilarity(features: &FeatureMatrix, metric: Metric) -> Result<DissimilarityMatrix> {
    let Metric::Euclidean = metric;
    Ok(pairwise_with_mode(features, DistanceMode::Verbatim))
}

/// All-pairs distances with an explicit sentinel treatment. Each unordered
/// pair is computed once and mirrored, so the result is exactly symmetric.
pub fn pairwise_with_mode(features: &FeatureMatrix, mode: DistanceMode) -> DissimilarityMatrix {
    let n = features.rows();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        let a = features.row(i);
        for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
            *slot = sq_distance(a, features.row(j), mode).sqrt();
        }
    });
    for i in 0..n {
        for j in (i + 1)..n {
            values[j * n + i] = values[i * n + j];
        }
    }
    DissimilarityMatrix::from_trusted(n, values, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rows: usize, cols: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..rows * cols).map(|_| rng.random_range(-5.0..5.0)).collect();
        FeatureMatrix::new(rows, cols, values).unwrap()
    }

    #[test]
    fn identical_vectors_are_at_distance_zero() {
        let f = FeatureMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        let d = pairwise_dissimilarity(&f, Metric::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn scalar_objects() {
        let f = FeatureMatrix::new(2, 1, vec![0.0, 3.0]).unwrap();
        let d = pairwise_dissimilarity(&f, Metric::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 3.0);
        assert_eq!(d.get(1, 0), 3.0);
    }

    #[test]
    fn matches_double_loop() {
        let f = random_features(50, 4, 11);
        let d = pairwise_dissimilarity(&f, Metric::Euclidean).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let mut s = 0.0;
                for k in 0..4 {
                    let t = f.row(i)[k] - f.row(j)[k];
                    s += t * t;
                }
                approx::assert_relative_eq!(d.get(i, j), s.sqrt(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_input_names_the_cell() {
        let err = FeatureMatrix::new(2, 2, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 0 }), "{err}");
        assert!(err.to_string().contains("row 1, column 0"));
    }

    #[test]
    fn performance_kind_rejects_out_of_range() {
        let err = RectRelationalMatrix::new(1, 3, vec![-1.0, 0.5, 1.5], MatrixKind::Performance)
            .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { row: 0, col: 2, .. }));
        let err = RectRelationalMatrix::new(1, 2, vec![-0.5, 0.5], MatrixKind::Performance)
            .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { col: 0, .. }));
        RectRelationalMatrix::new(1, 3, vec![-1.0, 0.0, 1.0], MatrixKind::Performance).unwrap();
    }

    #[test]
    fn dissimilarity_validation() {
        assert!(DissimilarityMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn column_objects_agree_with_transposed_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..37 * 300)
            .map(|_| {
                if rng.random_bool(0.3) {
                    SENTINEL
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let m = RectRelationalMatrix::new(37, 300, values, MatrixKind::Performance).unwrap();
        let t = m.transpose();
        for mode in [DistanceMode::Verbatim, DistanceMode::MaskSentinel] {
            let cols = m.column_objects();
            let rows = t.row_objects();
            assert_eq!(cols.centroid(mode), rows.centroid(mode));
            let point = cols.features(17);
            let mut a = vec![0.0; 300];
            let mut b = vec![0.0; 300];
            cols.sq_distances_to(&point, mode, &mut a);
            rows.sq_distances_to(&point, mode, &mut b);
            for (x, y) in a.iter().zip(&b) {
                approx::assert_relative_eq!(x, y, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn masked_distance_ignores_sentinels() {
        let a = [SENTINEL, 0.2, 0.4];
        let b = [0.9, 0.2, 0.0];
        // only two shared coordinates: 0.16 * 3 / 2
        approx::assert_relative_eq!(sq_distance(&a, &b, DistanceMode::MaskSentinel), 0.24);
        let c = [0.5, SENTINEL, SENTINEL];
        let d = [SENTINEL, 0.5, 0.5];
        assert_eq!(sq_distance(&c, &d, DistanceMode::MaskSentinel), 3.0);
    }

    proptest::proptest! {
        #[test]
        fn pairwise_is_symmetric_with_zero_diagonal(
            rows in 1usize..20, cols in 1usize..6, seed in 0u64..1000
        ) {
            let f = random_features(rows, cols, seed);
            let d = pairwise_dissimilarity(&f, Metric::Euclidean).unwrap();
            for i in 0..rows {
                proptest::prop_assert_eq!(d.get(i, i), 0.0);
                for j in 0..rows {
                    proptest::prop_assert_eq!(d.get(i, j), d.get(j, i));
                    proptest::prop_assert!(d.get(i, j) >= 0.0);
                }
            }
        }
    }
}
