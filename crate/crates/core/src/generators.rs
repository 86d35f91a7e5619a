//! Seeded synthetic data sets with planted cluster structure.
//!
//! Every generator is a pure function of its configuration and seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{FeatureMatrix, MatrixKind, RectRelationalMatrix};

/// Mixed row/column objects drawn from 2-D Gaussian clusters; the matrix
/// holds Euclidean distances between every row object and every column object.
///
/// Row clusters `0` and `1` share their centers with column clusters `0` and
/// `1`, which produces two co-clusters of small distances. The remaining row
/// and column clusters sit apart from everything.
#[derive(Clone, Debug, PartialEq)]
pub struct Example1Config {
    pub rows: usize,
    pub cols: usize,
    pub row_clusters: usize,
    pub col_clusters: usize,
    /// Number of row/column cluster pairs sharing a center.
    pub shared: usize,
    /// Distance between neighbouring cluster centers.
    pub spacing: f64,
    /// Per-axis standard deviations are drawn uniformly from this range.
    pub sigma_range: (f64, f64),
    /// Correlation of each cluster's covariance is drawn from `[-max, max]`.
    pub max_correlation: f64,
}

impl Default for Example1Config {
    fn default() -> Self {
        Example1Config {
            rows: 4000,
            cols: 3000,
            row_clusters: 4,
            col_clusters: 3,
            shared: 2,
            spacing: 12.0,
            sigma_range: (0.6, 1.0),
            max_correlation: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Example1 {
    pub matrix: RectRelationalMatrix,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub row_points: FeatureMatrix,
    pub col_points: FeatureMatrix,
}

pub fn gen_example1(seed: u64) -> Example1 {
    gen_example1_with(&Example1Config::default(), seed).expect("default config is valid")
}

pub fn gen_example1_with(cfg: &Example1Config, seed: u64) -> Result<Example1> {
    if cfg.row_clusters == 0 || cfg.col_clusters == 0 {
        return Err(Error::Config("cluster counts must be positive".into()));
    }
    if cfg.rows < cfg.row_clusters || cfg.cols < cfg.col_clusters {
        return Err(Error::Config("every cluster needs at least one object".into()));
    }
    if cfg.shared > cfg.row_clusters.min(cfg.col_clusters) {
        return Err(Error::Config("more shared centers than clusters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Distinct centers on a square lattice; shared pairs reuse row centers.
    let distinct = cfg.row_clusters + cfg.col_clusters - cfg.shared;
    let side = (distinct as f64).sqrt().ceil() as usize;
    let lattice: Vec<[f64; 2]> = (0..distinct)
        .map(|c| {
            [
                (c % side) as f64 * cfg.spacing,
                (c / side) as f64 * cfg.spacing,
            ]
        })
        .collect();
    let row_centers = &lattice[..cfg.row_clusters];
    let col_centers: Vec<[f64; 2]> = (0..cfg.col_clusters)
        .map(|c| {
            if c < cfg.shared {
                lattice[c]
            } else {
                lattice[cfg.row_clusters + c - cfg.shared]
            }
        })
        .collect();

    let (row_points, row_labels) = sample_clusters(&mut rng, cfg, row_centers, cfg.rows);
    let (col_points, col_labels) = sample_clusters(&mut rng, cfg, &col_centers, cfg.cols);

    let mut values = Vec::with_capacity(cfg.rows * cfg.cols);
    for r in &row_points {
        for c in &col_points {
            values.push(((r[0] - c[0]).powi(2) + (r[1] - c[1]).powi(2)).sqrt());
        }
    }
    let matrix = RectRelationalMatrix::new(cfg.rows, cfg.cols, values, MatrixKind::Generic)?;
    let flat = |pts: &[[f64; 2]]| pts.iter().flat_map(|p| p.iter().copied()).collect::<Vec<_>>();
    Ok(Example1 {
        matrix,
        row_points: FeatureMatrix::new(cfg.rows, 2, flat(&row_points))?
            .with_labels(row_labels.clone())?,
        col_points: FeatureMatrix::new(cfg.cols, 2, flat(&col_points))?
            .with_labels(col_labels.clone())?,
        row_labels,
        col_labels,
    })
}

/// Equal-size clusters (remainder to the first ones), then a random shuffle.
fn sample_clusters(
    rng: &mut ChaCha8Rng,
    cfg: &Example1Config,
    centers: &[[f64; 2]],
    total: usize,
) -> (Vec<[f64; 2]>, Vec<usize>) {
    let k = centers.len();
    let mut points = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (c, center) in centers.iter().enumerate() {
        let size = total / k + usize::from(c < total % k);
        let sx = rng.random_range(cfg.sigma_range.0..=cfg.sigma_range.1);
        let sy = rng.random_range(cfg.sigma_range.0..=cfg.sigma_range.1);
        let rho = rng.random_range(-cfg.max_correlation..=cfg.max_correlation);
        for _ in 0..size {
            let z0: f64 = StandardNormal.sample(rng);
            let z1: f64 = StandardNormal.sample(rng);
            points.push([
                center[0] + sx * z0,
                center[1] + sy * (rho * z0 + (1.0 - rho * rho).sqrt() * z1),
            ]);
            labels.push(c);
        }
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    (
        order.iter().map(|&i| points[i]).collect(),
        order.iter().map(|&i| labels[i]).collect(),
    )
}

/// Uniform background with uniform blocks of a different range planted at
/// chosen row/column index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Example2Config {
    pub rows: usize,
    pub cols: usize,
    /// `(row count, column count)` of each planted block.
    pub blocks: Vec<(usize, usize)>,
    pub background: (f64, f64),
    pub planted: (f64, f64),
    /// Scattered random index sets (default) or consecutive index ranges.
    pub contiguous: bool,
}

impl Default for Example2Config {
    fn default() -> Self {
        Example2Config {
            rows: 10_000,
            cols: 8_000,
            blocks: vec![(1000, 2000), (2000, 1000)],
            background: (0.0, 3.0),
            planted: (0.0, 1.0),
            contiguous: false,
        }
    }
}

impl Example2Config {
    /// The 2000 x 1600 variant: every size divided by five.
    pub fn scaled() -> Self {
        Example2Config {
            rows: 2000,
            cols: 1600,
            blocks: vec![(200, 400), (400, 200)],
            ..Example2Config::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedBlock {
    /// Sorted row indices.
    pub rows: Vec<usize>,
    /// Sorted column indices.
    pub cols: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Example2 {
    pub matrix: RectRelationalMatrix,
    pub blocks: Vec<PlantedBlock>,
}

pub fn gen_example2(seed: u64) -> Example2 {
    gen_example2_with(&Example2Config::default(), seed).expect("default config is valid")
}

pub fn gen_example2_with(cfg: &Example2Config, seed: u64) -> Result<Example2> {
    let rows_needed: usize = cfg.blocks.iter().map(|b| b.0).sum();
    let cols_needed: usize = cfg.blocks.iter().map(|b| b.1).sum();
    if rows_needed > cfg.rows || cols_needed > cfg.cols {
        return Err(Error::Config(format!(
            "blocks need {rows_needed} rows and {cols_needed} columns, matrix is {}x{}",
            cfg.rows, cfg.cols
        )));
    }
    if !(cfg.background.0 < cfg.background.1 && cfg.planted.0 < cfg.planted.1) {
        return Err(Error::Config("empty value range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cfg.background;
    let mut values: Vec<f64> = (0..cfg.rows * cfg.cols)
        .map(|_| rng.random_range(lo..=hi))
        .collect();

    let mut row_pool: Vec<usize> = (0..cfg.rows).collect();
    let mut col_pool: Vec<usize> = (0..cfg.cols).collect();
    if !cfg.contiguous {
        row_pool.shuffle(&mut rng);
        col_pool.shuffle(&mut rng);
    }
    let (plo, phi) = cfg.planted;
    let mut blocks = Vec::with_capacity(cfg.blocks.len());
    let (mut r0, mut c0) = (0, 0);
    for &(br, bc) in &cfg.blocks {
        let mut rows = row_pool[r0..r0 + br].to_vec();
        let mut cols = col_pool[c0..c0 + bc].to_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        for &r in &rows {
            for &c in &cols {
                values[r * cfg.cols + c] = rng.random_range(plo..=phi);
            }
        }
        r0 += br;
        c0 += bc;
        blocks.push(PlantedBlock { rows, cols });
    }
    Ok(Example2 {
        matrix: RectRelationalMatrix::new(cfg.rows, cfg.cols, values, MatrixKind::Generic)?,
        blocks,
    })
}

/// Mixture of `k` isotropic unit-variance 2-D Gaussians whose centers sit on a
/// circle with neighbouring centers `spacing` apart.
pub fn gen_gaussian2d(n_total: usize, k_clusters: usize, seed: u64) -> Result<FeatureMatrix> {
    gen_gaussian2d_with(n_total, k_clusters, 30.0, seed)
}

pub fn gen_gaussian2d_with(
    n_total: usize,
    k_clusters: usize,
    spacing: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    if k_clusters == 0 {
        return Err(Error::param("k_clusters", 0, ">= 1"));
    }
    if n_total < k_clusters {
        return Err(Error::param("n_total", n_total, format!(">= k_clusters ({k_clusters})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = if k_clusters == 1 {
        0.0
    } else {
        spacing / (2.0 * (std::f64::consts::PI / k_clusters as f64).sin())
    };
    let mut points = Vec::with_capacity(n_total);
    for c in 0..k_clusters {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / k_clusters as f64;
        let (cx, cy) = (radius * angle.cos(), radius * angle.sin());
        let size = n_total / k_clusters + usize::from(c < n_total % k_clusters);
        for _ in 0..size {
            let zx: f64 = StandardNormal.sample(&mut rng);
            let zy: f64 = StandardNormal.sample(&mut rng);
            points.push((cx + zx, cy + zy, c));
        }
    }
    points.shuffle(&mut rng);
    let values = points.iter().flat_map(|p| [p.0, p.1]).collect();
    let labels = points.iter().map(|p| p.2).collect();
    FeatureMatrix::new(n_total, 2, values)?.with_labels(labels)
}
