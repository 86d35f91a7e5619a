//! VAT reordering, the iVAT minimax transform and single-linkage cuts.
//!
//! VAT orders objects by Prim's algorithm started from an endpoint of the
//! largest dissimilarity; the ordering places single-linkage clusters in
//! contiguous runs. iVAT replaces each dissimilarity by the smallest possible
//! largest hop over all paths between the two objects, which equals the
//! largest edge on their path through the minimum spanning tree.
//!
//! Ties are always broken towards the lowest index.

use crate::error::{Error, Result};
use crate::matrix::DissimilarityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MstEdge {
    pub parent: usize,
    pub child: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VatOrdering {
    /// Object indices in VAT order.
    pub permutation: Vec<usize>,
    /// Weight of the edge that attached each object, in VAT order. Entry 0 is 0.
    pub insertion_distances: Vec<f64>,
    /// Spanning-tree edges in insertion order, in original object indices.
    pub mst_edges: Vec<MstEdge>,
}

impl VatOrdering {
    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// `position[object]` = index of `object` within the VAT order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.permutation.len()];
        for (p, &o) in self.permutation.iter().enumerate() {
            pos[o] = p;
        }
        pos
    }

    pub fn total_weight(&self) -> f64 {
        self.mst_edges.iter().map(|e| e.weight).sum()
    }
}

/// Runs VAT and returns the ordering together with `d` permuted by it.
pub fn vat_reorder(d: &DissimilarityMatrix) -> Result<(VatOrdering, DissimilarityMatrix)> {
    let ordering = vat_ordering(d)?;
    let reordered = d.permuted(&ordering.permutation);
    Ok((ordering, reordered))
}

pub fn vat_ordering(d: &DissimilarityMatrix) -> Result<VatOrdering> {
    let n = d.n();
    if n == 0 {
        return Err(Error::EmptyInput("dissimilarity matrix has no objects"));
    }

    // Row of the first maximal entry in row-major order.
    let mut first = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for &v in d.row(i) {
            if v > best {
                best = v;
                first = i;
            }
        }
    }

    let mut selected = vec![false; n];
    let mut nearest: Vec<f64> = d.row(first).to_vec();
    let mut parent = vec![first; n];
    selected[first] = true;

    let mut permutation = Vec::with_capacity(n);
    let mut insertion_distances = Vec::with_capacity(n);
    let mut mst_edges = Vec::with_capacity(n.saturating_sub(1));
    permutation.push(first);
    insertion_distances.push(0.0);

    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for (j, &dist) in nearest.iter().enumerate() {
            if !selected[j] && (next == usize::MAX || dist < next_dist) {
                next = j;
                next_dist = dist;
            }
        }
        selected[next] = true;
        permutation.push(next);
        insertion_distances.push(next_dist);
        mst_edges.push(MstEdge {
            parent: parent[next],
            child: next,
            weight: next_dist,
        });
        for (l, &dist) in d.row(next).iter().enumerate() {
            if !selected[l] && dist < nearest[l] {
                nearest[l] = dist;
                parent[l] = next;
            }
        }
    }

    Ok(VatOrdering {
        permutation,
        insertion_distances,
        mst_edges,
    })
}

/// iVAT image matrix in VAT order, computed from an already VAT-ordered matrix.
///
/// `reordered` must be the output of [`vat_reorder`]. Each object's minimax
/// distances to earlier objects follow from those of its nearest earlier
/// object, so one pass over the lower triangle suffices.
pub fn ivat_from_reordered(reordered: &DissimilarityMatrix) -> DissimilarityMatrix {
    let n = reordered.n();
    let mut out = vec![0.0; n * n];
    for r in 1..n {
        let row = reordered.row(r);
        let mut j = 0;
        for c in 1..r {
            if row[c] < row[j] {
                j = c;
            }
        }
        let hop = row[j];
        out[r * n + j] = hop;
        for c in 0..r {
            if c != j {
                out[r * n + c] = hop.max(out[j * n + c]);
            }
        }
    }
    for r in 0..n {
        for c in (r + 1)..n {
            out[r * n + c] = out[c * n + r];
        }
    }
    DissimilarityMatrix::from_trusted(n, out, true)
}

/// VAT ordering plus the iVAT matrix, both in VAT order.
pub fn ivat(d: &DissimilarityMatrix) -> Result<(VatOrdering, DissimilarityMatrix)> {
    let (ordering, reordered) = vat_reorder(d)?;
    let transformed = ivat_from_reordered(&reordered);
    Ok((ordering, transformed))
}

/// Minimax path distances in the original object order.
pub fn ivat_transform(d: &DissimilarityMatrix) -> Result<DissimilarityMatrix> {
    if d.is_empty() {
        return Ok(DissimilarityMatrix::from_trusted(0, Vec::new(), true));
    }
    let (ordering, in_vat_order) = ivat(d)?;
    let n = d.n();
    let perm = &ordering.permutation;
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            out[perm[a] * n + perm[b]] = in_vat_order.get(a, b);
        }
    }
    Ok(DissimilarityMatrix::from_trusted(n, out, true))
}

pub const DEFAULT_ORACLE_BOUND: usize = 60;

/// Reference minimax distances by relaxing
/// `m(i, j) <- min(m(i, j), max(m(i, k), m(k, j)))` until nothing changes.
pub fn minimax_oracle(d: &DissimilarityMatrix, bound: usize) -> Result<DissimilarityMatrix> {
    let n = d.n();
    if n > bound {
        return Err(Error::OracleBound { n, bound });
    }
    let mut m = d.values().to_vec();
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let ik = m[i * n + k];
                for j in 0..n {
                    let via = ik.max(m[k * n + j]);
                    if via < m[i * n + j] {
                        m[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(DissimilarityMatrix::from_trusted(n, m, true))
}

/// Single-linkage clusters obtained by deleting the `k - 1` heaviest
/// spanning-tree edges (on equal weights the later-inserted edge goes first).
///
/// Returns one label per object in original index order. Labels are numbered
/// in VAT order, and every cluster is a contiguous run of the ordering.
pub fn cut_clusters(ordering: &VatOrdering, k: usize) -> Result<Vec<usize>> {
    let n = ordering.len();
    if k == 0 || k > n {
        return Err(Error::param("k", k, format!("1..={n}")));
    }
    let by_position = segment_labels(ordering, k);
    let mut labels = vec![0; n];
    for (p, &o) in ordering.permutation.iter().enumerate() {
        labels[o] = by_position[p];
    }
    Ok(labels)
}

/// Labels indexed by VAT position rather than object.
pub fn segment_labels(ordering: &VatOrdering, k: usize) -> Vec<usize> {
    let n = ordering.len();
    let w = &ordering.insertion_distances;
    let mut positions: Vec<usize> = (1..n).collect();
    positions.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(b.cmp(&a)));
    let mut cut = vec![false; n];
    for &p in positions.iter().take(k.saturating_sub(1)) {
        cut[p] = true;
    }
    let mut labels = Vec::with_capacity(n);
    let mut current = 0;
    for (p, &is_cut) in cut.iter().enumerate() {
        if is_cut && p > 0 {
            current += 1;
        }
        labels.push(current);
    }
    labels
}

/// `1 +` the number of spanning-tree edges heavier than mean + 3 standard
/// deviations of all edge weights, capped at `max_k`.
pub fn suggest_k(ordering: &VatOrdering, max_k: usize) -> usize {
    let weights = &ordering.insertion_distances[1.min(ordering.len())..];
    if weights.is_empty() {
        return 1;
    }
    let count = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / count;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / count;
    let threshold = mean + 3.0 * var.sqrt();
    let outliers = weights.iter().filter(|&&w| w > threshold).count();
    (1 + outliers).min(max_k.max(1))
}
