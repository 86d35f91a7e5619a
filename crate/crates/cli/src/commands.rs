use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::info;
use tendency_core::bookings::{
    self, gen_synthetic_bookings, preprocess, read_bookings, write_bookings, write_report,
    BookingsConfig,
};
use tendency_core::coclust::{
    default_tau, extend_side, extract_coclusters, sco_ivat, write_bundle, ScoIvatConfig,
};
use tendency_core::features::{
    booking_histograms, build_performance_matrix, derive_all, high_speed_csv,
    high_speed_late_grids, DerivedBooking, FeatureTables, MatrixOptions,
};
use tendency_core::generators::{
    gen_example1_with, gen_example2_with, gen_gaussian2d, Example1Config, Example2Config,
};
use tendency_core::imaging::{render_auto, render_grayscale};
use tendency_core::io::{self, format_value, read_dense, read_rect_tagged};
use tendency_core::matrix::{pairwise_dissimilarity, DistanceMode, FeatureMatrix, MatrixKind, Metric};
use tendency_core::prediction::{
    evaluate, evaluation_csv, mrmr_csv, mrmr_rank, prepare_experiment, train_logistic,
    AggregateSource, LogisticModel, TrainConfig,
};
use tendency_core::scoring::{read_requests, score_batch, scores_csv, Mechanism, ScoreConfig, ScoringContext};
use tendency_core::vat::ivat_from_reordered;
use tendency_core::{cut_clusters, mmrs_sample, suggest_k, vat_reorder, Error};

use crate::manifest::Manifest;
use crate::{
    AggregateArgs, Command, GenArgs, GenKind, IvatArgs, MechanismArg, MrmrArgs, ScoIvatArgs,
    ScoreArgs, SourceArg, TrainArgs,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Ivat(a) => ivat(a),
        Command::Scoivat(a) => scoivat(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Train(a) => train(a),
        Command::Mrmr(a) => mrmr(a),
        Command::Score(a) => score(a),
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn kind_name(k: GenKind) -> &'static str {
    match k {
        GenKind::Example1 => "example1",
        GenKind::Example2 => "example2",
        GenKind::Gaussian2d => "gaussian2d",
        GenKind::Bookings => "bookings",
    }
}

fn source(s: SourceArg) -> AggregateSource {
    match s {
        SourceArg::TrainOnly => AggregateSource::TrainOnly,
        SourceArg::All => AggregateSource::All,
    }
}

fn gen(a: &GenArgs) -> Outcome {
    let out = &a.out;
    create_dir(out)?;
    let unused = |flags: &[(&str, bool)]| -> Outcome {
        match flags.iter().find(|f| f.1) {
            Some((name, _)) => Err(Failure::Usage(format!(
                "--{name} does not apply to --kind {}",
                kind_name(a.kind)
            ))),
            None => Ok(()),
        }
    };
    let mut manifest = Manifest::new("gen");
    manifest.flag("kind", kind_name(a.kind));
    manifest.flag("seed", a.seed);
    match a.kind {
        GenKind::Example1 => {
            let d = Example1Config::default();
            let cfg = Example1Config {
                rows: a.m.unwrap_or(d.rows),
                cols: a.n.unwrap_or(d.cols),
                row_clusters: a.krows.unwrap_or(d.row_clusters),
                col_clusters: a.kcols.unwrap_or(d.col_clusters),
                ..d
            };
            manifest.flag("m", cfg.rows);
            manifest.flag("n", cfg.cols);
            manifest.flag("krows", cfg.row_clusters);
            manifest.flag("kcols", cfg.col_clusters);
            let ex = gen_example1_with(&cfg, a.seed)?;
            io::write_rect(&out.join("matrix.txt"), &ex.matrix)?;
            io::write_indices(&out.join("row_labels.txt"), &ex.row_labels)?;
            io::write_indices(&out.join("col_labels.txt"), &ex.col_labels)?;
        }
        GenKind::Example2 => {
            unused(&[("krows", a.krows.is_some()), ("kcols", a.kcols.is_some())])?;
            let d = Example2Config::default();
            let (rows, cols) = (a.m.unwrap_or(d.rows), a.n.unwrap_or(d.cols));
            // Planted blocks keep their share of the default 10000 x 8000 layout.
            let blocks = d
                .blocks
                .iter()
                .map(|&(r, c)| (r * rows / d.rows, c * cols / d.cols))
                .collect();
            let cfg = Example2Config {
                rows,
                cols,
                blocks,
                ..d
            };
            manifest.flag("m", rows);
            manifest.flag("n", cols);
            let ex = gen_example2_with(&cfg, a.seed)?;
            io::write_rect(&out.join("matrix.txt"), &ex.matrix)?;
            for (b, block) in ex.blocks.iter().enumerate() {
                io::write_indices(&out.join(format!("planted{b}_rows.txt")), &block.rows)?;
                io::write_indices(&out.join(format!("planted{b}_cols.txt")), &block.cols)?;
            }
        }
        GenKind::Gaussian2d => {
            unused(&[("m", a.m.is_some()), ("kcols", a.kcols.is_some())])?;
            let n = a.n.unwrap_or(5000);
            let k = a.krows.unwrap_or(5);
            manifest.flag("n", n);
            manifest.flag("krows", k);
            let x = gen_gaussian2d(n, k, a.seed)?;
            io::write_dense(&out.join("points.txt"), x.rows(), x.cols(), x.values())?;
            io::write_indices(&out.join("labels.txt"), x.labels().unwrap_or(&[]))?;
        }
        GenKind::Bookings => {
            unused(&[("krows", a.krows.is_some()), ("kcols", a.kcols.is_some())])?;
            let d = BookingsConfig::default();
            let cfg = BookingsConfig {
                drivers: a.m.unwrap_or(d.drivers),
                bookings: a.n.unwrap_or(d.bookings),
                tz_offset_min: a.tz_offset_min,
                ..d
            };
            manifest.flag("m", cfg.drivers);
            manifest.flag("n", cfg.bookings);
            manifest.flag("tz-offset-min", cfg.tz_offset_min);
            let corpus = gen_synthetic_bookings(&cfg, a.seed)?;
            write_bookings(&out.join("bookings.csv"), &corpus.records)?;
            write_text(&out.join("truth_drivers.csv"), &corpus.truth.drivers_csv())?;
            write_text(&out.join("truth_grids.csv"), &corpus.truth.grids_csv())?;
        }
    }
    info!("gen {} written to {}", kind_name(a.kind), out.display());
    manifest.finish(out)?;
    Ok(())
}

fn ivat(a: &IvatArgs) -> Outcome {
    let dense = read_dense(&a.input)?;
    create_dir(&a.out)?;
    let mut manifest = Manifest::new("ivat");
    manifest.input(&a.input)?;
    manifest.flag("seed", a.seed);
    manifest.flag_opt("n", a.n);
    manifest.flag("kprime", a.kprime);
    manifest.flag_opt("krows", a.krows);
    let d = if dense.rows == dense.cols {
        if a.n.is_some() {
            return Err(Failure::Usage("--n samples feature rows; the input is a square dissimilarity matrix".into()));
        }
        dense.into_dissimilarity()?
    } else {
        let x = FeatureMatrix::new(dense.rows, dense.cols, dense.values)?;
        let x = match a.n {
            Some(n) => {
                let s = mmrs_sample(&x.objects(), a.kprime, n, a.seed, DistanceMode::Verbatim)?;
                io::write_indices(&a.out.join("sample.txt"), &s.sample)?;
                x.select_rows(&s.sample)
            }
            None => x,
        };
        pairwise_dissimilarity(&x, Metric::Euclidean)?
    };
    let n = d.n();
    let (ordering, vat) = vat_reorder(&d)?;
    let image = ivat_from_reordered(&vat);
    let suggested = suggest_k(&ordering, n.max(1));
    let k = a.krows.unwrap_or(suggested);
    let labels = cut_clusters(&ordering, k)?;
    info!("ivat: {n} objects, suggested k {suggested}, cut k {k}");

    io::write_indices(&a.out.join("order.txt"), &ordering.permutation)?;
    io::write_dissimilarity(&a.out.join("vat.txt"), &vat)?;
    io::write_dissimilarity(&a.out.join("ivat.txt"), &image)?;
    io::write_indices(&a.out.join("labels.txt"), &labels)?;
    render_grayscale(n, n, vat.values()).write_netpbm(&a.out.join("vat.pgm"))?;
    render_grayscale(n, n, image.values()).write_netpbm(&a.out.join("ivat.pgm"))?;
    let mut mst = String::from("position,parent,child,weight\n");
    for (p, e) in ordering.mst_edges.iter().enumerate() {
        let mut w = String::new();
        format_value(e.weight, &mut w);
        let _ = writeln!(mst, "{},{},{},{w}", p + 1, e.parent, e.child);
    }
    write_text(&a.out.join("mst.csv"), &mst)?;
    write_text(
        &a.out.join("summary.csv"),
        &format!("key,value\nobjects,{n}\nsuggested_k,{suggested}\nk,{k}\n"),
    )?;
    manifest.finish(&a.out)?;
    Ok(())
}

fn scoivat(a: &ScoIvatArgs) -> Outcome {
    let d = read_rect_tagged(&a.input)?;
    let mode = match d.kind() {
        MatrixKind::Performance => DistanceMode::MaskSentinel,
        MatrixKind::Generic => DistanceMode::Verbatim,
    };
    let cfg = ScoIvatConfig {
        m: a.m.unwrap_or(d.rows()),
        n: a.n.unwrap_or(d.cols()),
        k_prime: a.kprime,
        k_rows: a.krows,
        k_cols: a.kcols,
        seed: a.seed,
        mode,
    };
    let res = sco_ivat(&d, &cfg)?;
    let tau = a.tau.unwrap_or_else(|| default_tau(&res));
    let blocks = extract_coclusters(&res, tau)?;
    info!(
        "scoivat: {}x{} sampled, {} of {} blocks flagged at tau {tau}",
        res.rows.perm.len(),
        res.cols.perm.len(),
        blocks.iter().filter(|b| b.flagged).count(),
        blocks.len()
    );
    write_bundle(&a.out, &res, &blocks)?;
    let row_all = extend_side(&res.rows, &d.row_objects(), mode)?;
    let col_all = extend_side(&res.cols, &d.column_objects(), mode)?;
    io::write_indices(&a.out.join("row_labels_all.txt"), &row_all)?;
    io::write_indices(&a.out.join("col_labels_all.txt"), &col_all)?;
    let picture = render_auto(&res.reordered)?;
    let ext = match picture.channels {
        tendency_core::imaging::Channels::Rgb => "ppm",
        tendency_core::imaging::Channels::Gray => "pgm",
    };
    picture.write_netpbm(&a.out.join(format!("reordered.{ext}")))?;
    for (name, rdi) in [("row_rdi.pgm", &res.rows.rdi), ("col_rdi.pgm", &res.cols.rdi)] {
        render_grayscale(rdi.n(), rdi.n(), rdi.values()).write_netpbm(&a.out.join(name))?;
    }

    let mut manifest = Manifest::new("scoivat");
    manifest.input(&a.input)?;
    manifest.flag("seed", a.seed);
    manifest.flag("m", cfg.m);
    manifest.flag("n", cfg.n);
    manifest.flag("kprime", cfg.k_prime);
    manifest.flag("krows", cfg.k_rows);
    manifest.flag("kcols", cfg.k_cols);
    manifest.flag_opt("tau", a.tau);
    manifest.finish(&a.out)?;
    Ok(())
}

fn load_bookings(path: &Path, tz: i32) -> Result<(Vec<DerivedBooking>, bookings::RejectionReport), Error> {
    let (kept, report) = preprocess(read_bookings(path)?);
    info!("{}: kept {} of {} bookings", path.display(), report.kept, report.input);
    Ok((derive_all(kept, tz)?, report))
}

fn aggregate(a: &AggregateArgs) -> Outcome {
    let (derived, report) = load_bookings(&a.input, a.tz_offset_min)?;
    create_dir(&a.out)?;
    write_report(&a.out.join("rejections.csv"), &report)?;
    let tables = FeatureTables::build(&derived)?;
    tables.write_all(&a.out.join("tables"))?;
    let pm = build_performance_matrix(&derived, MatrixOptions::default())?;
    io::write_rect(&a.out.join("performance.txt"), &pm.matrix)?;
    io::write_lines(&a.out.join("performance_drivers.txt"), &pm.drivers)?;
    io::write_lines(&a.out.join("performance_grids.txt"), &pm.grids)?;
    render_auto(&pm.matrix)?.write_netpbm(&a.out.join("performance.ppm"))?;
    write_text(&a.out.join("histograms.csv"), &booking_histograms(&derived).to_csv())?;
    let fast = high_speed_late_grids(&derived, 35.0, 100, a.precision)?;
    write_text(&a.out.join("high_speed_grids.csv"), &high_speed_csv(&fast))?;

    let mut manifest = Manifest::new("aggregate");
    manifest.input(&a.input)?;
    manifest.flag("tz-offset-min", a.tz_offset_min);
    manifest.flag("precision", a.precision);
    manifest.finish(&a.out)?;
    Ok(())
}

fn train(a: &TrainArgs) -> Outcome {
    let (derived, _) = load_bookings(&a.input, a.tz_offset_min)?;
    let src = source(a.aggregate_source);
    let e = prepare_experiment(&derived, src, a.seed)?;
    let outcome = train_logistic(&e.train, &TrainConfig::default())?;
    info!(
        "train: {} iterations, converged {}",
        outcome.iterations, outcome.converged
    );
    create_dir(&a.out)?;
    outcome.model.write(&a.out.join("model.txt"))?;
    let rows = [
        ("train", evaluate(&outcome.model, &e.train)?),
        ("test", evaluate(&outcome.model, &e.test)?),
        ("validation", evaluate(&outcome.model, &e.validation)?),
    ];
    write_text(&a.out.join("evaluation.csv"), &evaluation_csv(&rows))?;
    let mut loss = String::from("iteration,loss\n");
    for (i, l) in outcome.loss_history.iter().enumerate() {
        let mut v = String::new();
        format_value(*l, &mut v);
        let _ = writeln!(loss, "{i},{v}");
    }
    write_text(&a.out.join("loss.csv"), &loss)?;
    write_text(
        &a.out.join("training.csv"),
        &format!(
            "key,value\nrows_train,{}\nrows_test,{}\nrows_validation,{}\niterations,{}\nconverged,{}\n",
            e.train.len(),
            e.test.len(),
            e.validation.len(),
            outcome.iterations,
            outcome.converged
        ),
    )?;

    let mut manifest = Manifest::new("train");
    manifest.input(&a.input)?;
    manifest.flag("seed", a.seed);
    manifest.flag("aggregate-source", src.as_str());
    manifest.flag("tz-offset-min", a.tz_offset_min);
    manifest.finish(&a.out)?;
    Ok(())
}

pub const MRMR_TOP_K: usize = 15;
pub const MRMR_BINS: usize = 10;

fn mrmr(a: &MrmrArgs) -> Outcome {
    let (derived, _) = load_bookings(&a.input, a.tz_offset_min)?;
    let src = source(a.aggregate_source);
    let e = prepare_experiment(&derived, src, a.seed)?;
    let ranked = mrmr_rank(&e.train, MRMR_TOP_K.min(e.train.width()), MRMR_BINS)?;
    create_dir(&a.out)?;
    write_text(&a.out.join("mrmr.csv"), &mrmr_csv(&ranked))?;

    let mut manifest = Manifest::new("mrmr");
    manifest.input(&a.input)?;
    manifest.flag("seed", a.seed);
    manifest.flag("aggregate-source", src.as_str());
    manifest.flag("tz-offset-min", a.tz_offset_min);
    manifest.finish(&a.out)?;
    Ok(())
}

fn score(a: &ScoreArgs) -> Outcome {
    let mechanism = match a.mechanism {
        MechanismArg::Ratio => Mechanism::Ratio,
        MechanismArg::Logistic => Mechanism::Logistic,
    };
    let expected = match mechanism {
        Mechanism::Ratio => 2,
        Mechanism::Logistic => 3,
    };
    if a.inputs.len() != expected {
        return Err(Failure::Usage(format!(
            "--mechanism {} takes {expected} --in files (requests, bookings{}), got {}",
            mechanism.as_str(),
            if expected == 3 { ", model" } else { "" },
            a.inputs.len()
        )));
    }
    let requests = read_requests(&a.inputs[0])?;
    let (derived, _) = load_bookings(&a.inputs[1], a.tz_offset_min)?;
    let tables = FeatureTables::build(&derived)?;
    let model = match a.inputs.get(2) {
        Some(p) => Some(LogisticModel::read(p)?),
        None => None,
    };
    let ctx = ScoringContext {
        tables: &tables,
        config: ScoreConfig::default(),
        model: model.as_ref(),
    };
    let scored = score_batch(&requests, mechanism, &ctx)?;
    create_dir(&a.out)?;
    write_text(&a.out.join("scores.csv"), &scores_csv(&scored, mechanism))?;

    let mut manifest = Manifest::new("score");
    for p in &a.inputs {
        manifest.input(p)?;
    }
    manifest.flag("mechanism", mechanism.as_str());
    manifest.flag("tz-offset-min", a.tz_offset_min);
    manifest.finish(&a.out)?;
    Ok(())
}
