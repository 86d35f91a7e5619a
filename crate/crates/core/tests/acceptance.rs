//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line and
//! then asserts, so `cargo test --test acceptance -- --nocapture` gives a
//! readable summary.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tendency_core::bookings::{
    gen_synthetic_bookings, geohash_decode, geohash_encode, preprocess, BookingsConfig, DowClass,
};
use tendency_core::coclust::{default_tau, extend_side, extract_coclusters, sco_ivat, ScoIvatConfig};
use tendency_core::features::{derive_all, FeatureTables};
use tendency_core::generators::{gen_example1, gen_example2_with, gen_gaussian2d, Example2Config};
use tendency_core::matrix::{pairwise_dissimilarity, DistanceMode, Metric};
use tendency_core::metrics::{adjusted_rand_index, spearman};
use tendency_core::prediction::{
    evaluate, mrmr_rank, prepare_experiment, standardization, train_logistic, AggregateSource,
    LogisticObjective, TrainConfig,
};
use tendency_core::scoring::{
    lpr_ratio_outcome, rank_candidates, ratio_score, Mechanism, RatioOutcome, ScoreConfig,
    ScoreRequest, ScoringContext, Smoothing,
};
use tendency_core::{
    cut_clusters, ivat, ivat_transform, minimax_oracle, mmrs_sample, suggest_k, vat_reorder,
    DissimilarityMatrix,
};

fn report(id: &str, ok: bool, detail: String) {
    println!("criterion {id}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn check(id: &str, checks: &[(&str, bool)], detail: String) {
    let ok = checks.iter().all(|c| c.1);
    report(id, ok, detail);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    assert!(ok, "criterion {id} failed: {failed:?}");
}

#[test]
fn c1_example1_recovery() {
    let start = Instant::now();
    let ex = gen_example1(0);
    let cfg = ScoIvatConfig {
        m: 105,
        n: 36,
        k_prime: 10,
        k_rows: 4,
        k_cols: 3,
        seed: 0,
        mode: DistanceMode::Verbatim,
    };
    let res = sco_ivat(&ex.matrix, &cfg).unwrap();
    let pick = |labels: &[usize], idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let ari_rows = adjusted_rand_index(
        &res.rows.sample_labels(),
        &pick(&ex.row_labels, &res.rows.sample),
    );
    let ari_cols = adjusted_rand_index(
        &res.cols.sample_labels(),
        &pick(&ex.col_labels, &res.cols.sample),
    );
    let all_rows = extend_side(&res.rows, &ex.matrix.row_objects(), cfg.mode).unwrap();
    let ari_ext = adjusted_rand_index(&all_rows, &ex.row_labels);
    let took = start.elapsed();
    check(
        "1",
        &[
            ("rows", ari_rows >= 0.95),
            ("cols", ari_cols >= 0.95),
            ("extended", ari_ext >= 0.95),
            ("time", took <= Duration::from_secs(60)),
        ],
        format!(
            "ARI rows {ari_rows:.4}, cols {ari_cols:.4}, extended rows {ari_ext:.4}, {:.1}s",
            took.as_secs_f64()
        ),
    );
}

/// Flagged blocks and, for each planted block, the best coverage of its rows
/// and columns by a single flagged block.
fn example2_run(cfg: &Example2Config, m: usize, n: usize) -> (usize, Vec<(f64, f64)>) {
    let ex = gen_example2_with(cfg, 0).unwrap();
    let sc = ScoIvatConfig {
        m,
        n,
        k_prime: 10,
        k_rows: 3,
        k_cols: 3,
        seed: 0,
        mode: DistanceMode::Verbatim,
    };
    let res = sco_ivat(&ex.matrix, &sc).unwrap();
    let blocks = extract_coclusters(&res, default_tau(&res)).unwrap();
    let flagged: Vec<_> = blocks.iter().filter(|b| b.flagged).collect();
    let all_rows = extend_side(&res.rows, &ex.matrix.row_objects(), sc.mode).unwrap();
    let all_cols = extend_side(&res.cols, &ex.matrix.column_objects(), sc.mode).unwrap();
    let coverage = ex
        .blocks
        .iter()
        .map(|p| {
            flagged
                .iter()
                .map(|b| {
                    let r = p.rows.iter().filter(|&&i| all_rows[i] == b.row_cluster).count();
                    let c = p.cols.iter().filter(|&&j| all_cols[j] == b.col_cluster).count();
                    (r as f64 / p.rows.len() as f64, c as f64 / p.cols.len() as f64)
                })
                .fold((0.0f64, 0.0f64), |best, cov| if cov.0.min(cov.1) > best.0.min(best.1) { cov } else { best })
        })
        .collect();
    (flagged.len(), coverage)
}

#[test]
fn c2_example2_scaled_and_full() {
    let start = Instant::now();
    let (flagged, coverage) = example2_run(&Example2Config::scaled(), 105, 84);
    let scaled_time = start.elapsed();
    let covered = coverage.iter().all(|c| c.0 >= 0.9 && c.1 >= 0.9);

    let start = Instant::now();
    let (flagged_full, _) = example2_run(&Example2Config::default(), 105, 84);
    let full_time = start.elapsed();
    check(
        "2",
        &[
            ("scaled: exactly 2 flagged", flagged == 2),
            ("scaled: coverage", covered),
            ("scaled: time", scaled_time <= Duration::from_secs(60)),
            ("full: exactly 2 flagged", flagged_full == 2),
            ("full: time", full_time <= Duration::from_secs(600)),
        ],
        format!(
            "scaled: {flagged} flagged, coverage {coverage:.3?}, {:.1}s; full: {flagged_full} flagged, {:.1}s",
            scaled_time.as_secs_f64(),
            full_time.as_secs_f64()
        ),
    );
}

#[test]
fn c3_gaussian_mixture_sampled() {
    let start = Instant::now();
    let x = gen_gaussian2d(5000, 5, 0).unwrap();
    let s = mmrs_sample(&x.objects(), 10, 500, 0, DistanceMode::Verbatim).unwrap();
    let sub = x.select_rows(&s.sample);
    let d = pairwise_dissimilarity(&sub, Metric::Euclidean).unwrap();
    let (ordering, _) = vat_reorder(&d).unwrap();
    let labels = cut_clusters(&ordering, 5).unwrap();
    let truth: Vec<usize> = s.sample.iter().map(|&i| x.labels().unwrap()[i]).collect();
    let ari = adjusted_rand_index(&labels, &truth);
    let k = suggest_k(&ordering, 20);
    let took = start.elapsed();
    check(
        "3",
        &[
            ("ARI", ari >= 0.99),
            ("suggest_k", k == 5),
            ("time", took <= Duration::from_secs(10)),
        ],
        format!("ARI {ari:.4}, suggest_k {k}, {:.2}s", took.as_secs_f64()),
    );
}

fn random_dissimilarity(n: usize, rng: &mut ChaCha8Rng) -> DissimilarityMatrix {
    DissimilarityMatrix::from_fn(n, |_, _| rng.random_range(0.0..100.0)).unwrap()
}

#[test]
fn c4_ivat_equals_minimax_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=60);
        let d = random_dissimilarity(n, &mut rng);
        let oracle = minimax_oracle(&d, 60).unwrap();
        let fast = ivat_transform(&d).unwrap();
        let (ordering, image) = ivat(&d).unwrap();
        let oracle_image = oracle.permuted(&ordering.permutation);
        for (a, b) in fast.values().iter().zip(oracle.values()) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in image.values().iter().zip(oracle_image.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    check("4", &[("max error", worst <= 1e-12)], format!("200 matrices, max |diff| {worst:e}"));
}

/// Merges the two closest clusters (minimum pairwise distance) until `k` remain.
fn agglomerative_single_linkage(d: &DissimilarityMatrix, k: usize) -> BTreeSet<BTreeSet<usize>> {
    let n = d.n();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        if d.get(i, j) < best.0 {
                            best = (d.get(i, j), a, b);
                        }
                    }
                }
            }
        }
        let merged = clusters.remove(best.2);
        clusters[best.1].extend(merged);
    }
    clusters.into_iter().map(|c| c.into_iter().collect()).collect()
}

fn as_partition(labels: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let mut groups = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().insert(i);
    }
    groups.into_values().collect()
}

#[test]
fn c5_cut_equals_single_linkage() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cases, mut mismatches, mut gaps) = (0, 0, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=40);
        // Distinct distances: a random permutation of 1..=pairs.
        let pairs = n * (n - 1) / 2;
        let mut ranks: Vec<f64> = (1..=pairs).map(|v| v as f64).collect();
        for i in (1..pairs).rev() {
            ranks.swap(i, rng.random_range(0..=i));
        }
        let mut next = ranks.into_iter();
        let d = DissimilarityMatrix::from_fn(n, |_, _| next.next().unwrap()).unwrap();
        let (ordering, _) = vat_reorder(&d).unwrap();
        for k in 1..=n {
            cases += 1;
            let labels = cut_clusters(&ordering, k).unwrap();
            if as_partition(&labels) != agglomerative_single_linkage(&d, k) {
                mismatches += 1;
            }
            let along: Vec<usize> = ordering.permutation.iter().map(|&o| labels[o]).collect();
            let runs = 1 + along.windows(2).filter(|w| w[0] != w[1]).count();
            if runs != k {
                gaps += 1;
            }
        }
    }
    check(
        "5",
        &[("partitions", mismatches == 0), ("contiguity", gaps == 0)],
        format!("{cases} (instance, k) cases, {mismatches} partition mismatches, {gaps} non-contiguous"),
    );
}

#[test]
fn c6_prediction_on_synthetic_bookings() {
    let corpus = gen_synthetic_bookings(&BookingsConfig::strong(), 0).unwrap();
    let (kept, _) = preprocess(corpus.records);
    let bookings = derive_all(kept, 480).unwrap();
    let cfg = TrainConfig::default();

    let all = prepare_experiment(&bookings, AggregateSource::All, 0).unwrap();
    let model = train_logistic(&all.train, &cfg).unwrap().model;
    let acc_all = evaluate(&model, &all.validation).unwrap().accuracy();

    let own = prepare_experiment(&bookings, AggregateSource::TrainOnly, 0).unwrap();
    let model = train_logistic(&own.train, &cfg).unwrap().model;
    let acc_own = evaluate(&model, &own.validation).unwrap().accuracy();

    let (means, stds) = standardization(&own.train);
    let obj = LogisticObjective::new(&own.train, &means, &stds, cfg.l2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let params: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-0.5..0.5)).collect();
    let grad = obj.gradient(&params);
    let mut worst = 0.0f64;
    for j in 0..obj.dim() {
        let h = 1e-5;
        let (mut up, mut down) = (params.clone(), params.clone());
        up[j] += h;
        down[j] -= h;
        let fd = (obj.loss(&up) - obj.loss(&down)) / (2.0 * h);
        worst = worst.max((grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-8));
    }

    let ranked = mrmr_rank(&own.train, 5, 10).unwrap();
    let names: Vec<&str> = ranked.iter().map(|r| r.name.as_str()).collect();
    let planted = ["driverGh.lpr_pct", "pickupGh.lpr_pct"];
    let hits = planted.iter().filter(|p| names.contains(p)).count();
    check(
        "6",
        &[
            ("accuracy all", acc_all >= 0.85),
            ("accuracy train_only", acc_own >= 0.70),
            ("gradient", worst < 1e-5),
            ("mrmr", hits >= 2),
        ],
        format!(
            "validation accuracy all {acc_all:.4}, train_only {acc_own:.4}; gradient rel. err {worst:.2e}; mRmR top 5 {names:?} ({hits}/2 planted)"
        ),
    );
}

#[test]
fn c7_scoring_properties() {
    let identity = ratio_score(12.0, 12.0, 30.0, 30.0, 0.5) == 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut scale_ok = true;
    let mut monotone_ok = true;
    // Rates stay above the epsilon floor, which only guards division by zero.
    for _ in 0..1000 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(1.0..100.0)).collect();
        let c = rng.random_range(0.6..20.0);
        let a = ratio_score(v[0], v[1], v[2], v[3], 0.5);
        let b = ratio_score(c * v[0], c * v[1], c * v[2], c * v[3], 0.5);
        scale_ok &= (a - b).abs() <= 1e-12 * a;
        let worse = ratio_score(v[0], v[1] + rng.random_range(0.01..10.0), v[2], v[3], 0.5);
        monotone_ok &= worse < a;
    }

    let corpus = gen_synthetic_bookings(&BookingsConfig::scoring(), 0).unwrap();
    let (kept, _) = preprocess(corpus.records);
    let bookings = derive_all(kept, 480).unwrap();
    let tables = FeatureTables::build(&bookings).unwrap();
    let ctx = ScoringContext {
        tables: &tables,
        config: ScoreConfig::default(),
        model: None,
    };
    let truth = &corpus.truth;
    let mut rhos = Vec::new();
    for g in &truth.grid_codes {
        let reqs: Vec<ScoreRequest> = truth
            .driver_ids
            .iter()
            .map(|d| ScoreRequest {
                driver_id: d.clone(),
                driver_gh: g.clone(),
                pickup_gh: g.clone(),
                dow: DowClass::Weekday,
                hourgroup: 0,
            })
            .collect();
        let ranked = rank_candidates(&reqs, Mechanism::Ratio, &ctx).unwrap();
        let scores: Vec<f64> = ranked.iter().map(|c| c.score).collect();
        let skill: Vec<f64> = ranked.iter().map(|c| truth.skill_of(&c.driver_id).unwrap()).collect();
        rhos.push(spearman(&scores, &skill));
    }
    let rho_mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let rho_min = rhos.iter().cloned().fold(f64::INFINITY, f64::min);

    // A driver with too few bookings takes the request maximum.
    let g = &truth.grid_codes[0];
    let mut reqs: Vec<ScoreRequest> = truth.driver_ids[..5]
        .iter()
        .map(|d| ScoreRequest {
            driver_id: d.clone(),
            driver_gh: g.clone(),
            pickup_gh: g.clone(),
            dow: DowClass::Weekday,
            hourgroup: 0,
        })
        .collect();
    reqs.push(ScoreRequest {
        driver_id: "newcomer".into(),
        ..reqs[0].clone()
    });
    let best = reqs[..5]
        .iter()
        .map(|r| match lpr_ratio_outcome(r, &tables, &ctx.config).unwrap() {
            RatioOutcome::Qualified(s) => s,
            RatioOutcome::BelowMinimum => f64::NEG_INFINITY,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let ranked = rank_candidates(&reqs, Mechanism::Ratio, &ctx).unwrap();
    let newcomer = ranked.iter().find(|c| c.driver_id == "newcomer").unwrap();
    let min_rule = !newcomer.qualified && newcomer.score == best && best.is_finite();

    let raw = ScoreConfig {
        smoothing: Smoothing::None,
        ..ScoreConfig::default()
    };
    let own_grid = lpr_ratio_outcome(&reqs[0], &tables, &raw).is_ok();

    check(
        "7",
        &[
            ("identity", identity),
            ("scale invariance", scale_ok),
            ("monotone", monotone_ok),
            ("minimum-bookings rule", min_rule),
            ("spearman every grid", rho_min >= 0.9),
            ("unsmoothed", own_grid),
        ],
        format!(
            "identity {identity}, scale {scale_ok}, monotone {monotone_ok}, minimum-bookings rule {min_rule}; Spearman over {} grid requests min {rho_min:.4}, mean {rho_mean:.4}",
            rhos.len()
        ),
    );
}

#[test]
fn c8_geohash_conformance() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut contained, mut prefix, mut agree) = (true, true, true);
    for _ in 0..1000 {
        let lat = rng.random_range(-90.0..90.0);
        let lon = rng.random_range(-180.0..180.0);
        let full = geohash_encode(lat, lon, 12).unwrap();
        for p in 1..=12 {
            let cell = geohash_encode(lat, lon, p).unwrap();
            contained &= cell.bounds().contains(lat, lon);
            prefix &= full.as_str().starts_with(cell.as_str());
            let reference = geohash::encode(geohash::Coord { x: lon, y: lat }, p).unwrap();
            agree &= reference == cell.as_str();
        }
    }
    let cell = geohash_encode(0.0005, 0.0005, 6).unwrap();
    let (width_km, height_km) = geohash_decode(cell.as_str()).unwrap().size_km();
    let size_ok = (width_km - 1.22).abs() < 0.01 && (height_km - 0.61).abs() < 0.01;
    check(
        "8",
        &[
            ("containment", contained),
            ("prefix", prefix),
            ("reference", agree),
            ("cell size", size_ok),
        ],
        format!(
            "1000 points x 12 precisions: containment {contained}, prefix {prefix}, reference {agree}; precision-6 cell {width_km:.3} x {height_km:.3} km"
        ),
    );
}
