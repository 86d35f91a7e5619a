//! Timely-pickup classification: predictor assembly from aggregate tables,
//! class balancing with a stratified 64:20:16 split, L2-regularised logistic
//! regression by gradient descent, and mRmR feature ranking.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{DerivedBooking, FeatureTables, Grouping, KeyFields, MEASURES};

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// 1 = late pickup, 0 = timely.
    pub labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != feature_names.len()) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} values, expected {}",
                r.len(),
                feature_names.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::param("label", labels[i], "0 or 1"));
        }
        Ok(LabeledDataset {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AggregateSource {
    #[default]
    TrainOnly,
    All,
}

impl AggregateSource {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train_only" => Some(AggregateSource::TrainOnly),
            "all" => Some(AggregateSource::All),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AggregateSource::TrainOnly => "train_only",
            AggregateSource::All => "all",
        }
    }
}

/// One-hot hourgroups, the weekend flag, then per grouping its five measures
/// and a missing-key indicator.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = (0..8).map(|h| format!("hourgroup_{h}")).collect();
    names.push("dow_weekend".to_owned());
    for g in Grouping::ALL {
        for m in MEASURES {
            names.push(format!("{}.{m}", g.name()));
        }
        names.push(format!("{}.missing", g.name()));
    }
    names
}

/// Predictor row with `NaN` where a key has no aggregate. With `exclude`,
/// that booking's own contribution is removed from every aggregate.
pub fn raw_features(
    f: KeyFields<'_>,
    tables: &FeatureTables,
    exclude: Option<&DerivedBooking>,
) -> Vec<f64> {
    let mut row = vec![0.0; 9];
    row[f.hourgroup as usize] = 1.0;
    row[8] = f64::from(u8::from(f.dow == crate::bookings::DowClass::Weekend));
    for g in Grouping::ALL {
        let found = tables.table(g).lookup(f);
        let agg = match exclude {
            Some(b) => found.and_then(|a| a.without(b)),
            None => found.copied(),
        };
        match agg {
            Some(a) => {
                row.extend(a.measures());
                row.push(0.0);
            }
            None => {
                row.extend([f64::NAN; 5]);
                row.push(1.0);
            }
        }
    }
    row
}

/// Per-column mean over the non-missing entries (0 when a column has none).
pub fn observed_means(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut sum = vec![0.0; width];
    let mut count = vec![0usize; width];
    for r in rows {
        for (j, &v) in r.iter().enumerate() {
            if !v.is_nan() {
                sum[j] += v;
                count[j] += 1;
            }
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

pub fn fill_missing(row: &mut [f64], fill: &[f64]) {
    for (v, &m) in row.iter_mut().zip(fill) {
        if v.is_nan() {
            *v = m;
        }
    }
}

fn labels_of(bookings: &[DerivedBooking]) -> Vec<u8> {
    bookings.iter().map(|b| u8::from(b.is_late)).collect()
}

/// One row per booking. With `TrainOnly` the tables are taken to contain
/// these bookings, so each row's aggregates leave that booking out.
/// Missing aggregates are filled with the column mean of these rows.
pub fn assemble_dataset(
    bookings: &[DerivedBooking],
    tables: &FeatureTables,
    source: AggregateSource,
) -> Result<LabeledDataset> {
    if bookings.is_empty() {
        return Err(Error::EmptyInput("bookings"));
    }
    let exclude = source == AggregateSource::TrainOnly;
    let names = feature_names();
    let mut rows: Vec<Vec<f64>> = bookings
        .iter()
        .map(|b| raw_features(b.into(), tables, exclude.then_some(b)))
        .collect();
    let fill = observed_means(&rows, names.len());
    for r in &mut rows {
        fill_missing(r, &fill);
    }
    LabeledDataset::new(names, rows, labels_of(bookings))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Undersamples the majority class to the minority size, then splits each
/// class 64:20:16. Index lists come back ascending.
pub fn balance_split_indices(labels: &[u8], seed: u64) -> Result<SplitIndices> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::EmptyInput("one of the two classes"));
    }
    let m = pos.len().min(neg.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = SplitIndices {
        train: Vec::new(),
        test: Vec::new(),
        validation: Vec::new(),
    };
    for class in [neg, pos] {
        let mut kept: Vec<usize> = if class.len() > m {
            let mut picks = index::sample(&mut rng, class.len(), m).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|p| class[p]).collect()
        } else {
            class
        };
        kept.shuffle(&mut rng);
        let n_test = (m as f64 * 0.20).round() as usize;
        let n_val = (m as f64 * 0.16).round() as usize;
        let n_train = m - n_test - n_val;
        split.train.extend_from_slice(&kept[..n_train]);
        split.test.extend_from_slice(&kept[n_train..n_train + n_test]);
        split.validation.extend_from_slice(&kept[n_train + n_test..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    split.validation.sort_unstable();
    Ok(split)
}

/// (train, test, validation)
pub fn balance_split(
    ds: &LabeledDataset,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let s = balance_split_indices(&ds.labels, seed)?;
    Ok((ds.subset(&s.train), ds.subset(&s.test), ds.subset(&s.validation)))
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub split: SplitIndices,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub validation: LabeledDataset,
    pub tables: FeatureTables,
}

/// Balance and split the bookings, then assemble each split.
///
/// `All` joins aggregates over every booking. `TrainOnly` builds the tables
/// from the training split alone and removes each training booking from its
/// own aggregates; test and validation rows then never see their own labels.
/// Missing values are filled with training-split means in every split.
pub fn prepare_experiment(
    bookings: &[DerivedBooking],
    source: AggregateSource,
    seed: u64,
) -> Result<Experiment> {
    if bookings.is_empty() {
        return Err(Error::EmptyInput("bookings"));
    }
    let labels = labels_of(bookings);
    let split = balance_split_indices(&labels, seed)?;
    let tables = match source {
        AggregateSource::All => FeatureTables::build(bookings)?,
        AggregateSource::TrainOnly => {
            let train: Vec<DerivedBooking> = split.train.iter().map(|&i| bookings[i].clone()).collect();
            FeatureTables::build(&train)?
        }
    };
    let exclude_train = source == AggregateSource::TrainOnly;
    let raw = |idx: &[usize], exclude: bool| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| {
                let b = &bookings[i];
                raw_features(b.into(), &tables, exclude.then_some(b))
            })
            .collect()
    };
    let names = feature_names();
    let mut train_rows = raw(&split.train, exclude_train);
    let mut test_rows = raw(&split.test, false);
    let mut val_rows = raw(&split.validation, false);
    let fill = observed_means(&train_rows, names.len());
    for r in train_rows.iter_mut().chain(&mut test_rows).chain(&mut val_rows) {
        fill_missing(r, &fill);
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<u8>>();
    Ok(Experiment {
        train: LabeledDataset::new(names.clone(), train_rows, pick(&split.train))?,
        test: LabeledDataset::new(names.clone(), test_rows, pick(&split.test))?,
        validation: LabeledDataset::new(names, val_rows, pick(&split.validation))?,
        split,
        tables,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    /// Standardisation means; also the value substituted for a missing input.
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub bias: f64,
    pub weights: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

const P_MIN: f64 = 1e-300;
const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

impl LogisticModel {
    pub fn log_odds(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        let mut z = self.bias;
        for (j, &x) in row.iter().enumerate() {
            let v = if x.is_nan() { self.means[j] } else { x };
            z += self.weights[j] * (v - self.means[j]) / self.stds[j];
        }
        Ok(z)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("logistic-model\n");
        let _ = writeln!(s, "features\t{}", self.weights.len());
        let _ = writeln!(s, "bias\t{:.16e}", self.bias);
        for j in 0..self.weights.len() {
            let _ = writeln!(
                s,
                "{}\t{:.16e}\t{:.16e}\t{:.16e}",
                self.feature_names[j], self.means[j], self.stds[j], self.weights[j]
            );
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_owned(),
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&"logistic-model") {
            return Err(err(1, "not a logistic model file"));
        }
        let field = |line: usize, key: &str| -> Result<&str> {
            lines
                .get(line - 1)
                .and_then(|l| l.strip_prefix(key))
                .and_then(|rest| rest.strip_prefix('\t'))
                .ok_or_else(|| err(line, &format!("expected `{key}`")))
        };
        let p: usize = field(2, "features")?
            .parse()
            .map_err(|_| err(2, "bad feature count"))?;
        let bias: f64 = field(3, "bias")?.parse().map_err(|_| err(3, "bad bias"))?;
        if lines.len() != 3 + p {
            return Err(err(lines.len(), &format!("expected {p} feature lines")));
        }
        let mut m = LogisticModel {
            feature_names: Vec::with_capacity(p),
            means: Vec::with_capacity(p),
            stds: Vec::with_capacity(p),
            bias,
            weights: Vec::with_capacity(p),
        };
        for (k, l) in lines[3..].iter().enumerate() {
            let line = k + 4;
            let parts: Vec<&str> = l.split('\t').collect();
            if parts.len() != 4 {
                return Err(err(line, "expected name, mean, std, weight"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(line, &format!("bad number {s:?}")));
            m.feature_names.push(parts[0].to_owned());
            m.means.push(num(parts[1])?);
            m.stds.push(num(parts[2])?);
            m.weights.push(num(parts[3])?);
        }
        Ok(m)
    }
}

/// Probability of a late pickup, strictly inside (0, 1).
pub fn predict_proba(model: &LogisticModel, row: &[f64]) -> Result<f64> {
    Ok(sigmoid(model.log_odds(row)?).clamp(P_MIN, P_MAX))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1e-4,
            max_iters: 5000,
            tol: 1e-8,
        }
    }
}

/// Mean negative log-likelihood plus `l2/2 * |w|^2` on standardised inputs.
/// Parameters are `[bias, w_1, .., w_p]`; the bias is not penalised.
#[derive(Clone, Debug)]
pub struct LogisticObjective {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    p: usize,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(ds: &LabeledDataset, means: &[f64], stds: &[f64], l2: f64) -> Self {
        let (n, p) = (ds.len(), ds.width());
        let mut x = Vec::with_capacity(n * p);
        for r in &ds.rows {
            x.extend((0..p).map(|j| (r[j] - means[j]) / stds[j]));
        }
        LogisticObjective {
            x,
            y: ds.labels.iter().map(|&l| f64::from(l)).collect(),
            n,
            p,
            l2,
        }
    }

    pub fn dim(&self) -> usize {
        self.p + 1
    }

    fn margins(&self, params: &[f64]) -> Vec<f64> {
        self.x
            .chunks_exact(self.p)
            .map(|r| params[0] + r.iter().zip(&params[1..]).map(|(a, w)| a * w).sum::<f64>())
            .collect()
    }

    fn penalty(&self, params: &[f64]) -> f64 {
        0.5 * self.l2 * params[1..].iter().map(|w| w * w).sum::<f64>()
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let z = self.margins(params);
        let nll: f64 = z.iter().zip(&self.y).map(|(&z, &y)| softplus(z) - y * z).sum();
        nll / self.n as f64 + self.penalty(params)
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        self.loss_and_gradient(params).1
    }

    pub fn loss_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let z = self.margins(params);
        let mut g = vec![0.0; self.dim()];
        let mut nll = 0.0;
        for (i, r) in self.x.chunks_exact(self.p).enumerate() {
            nll += softplus(z[i]) - self.y[i] * z[i];
            let e = sigmoid(z[i]) - self.y[i];
            g[0] += e;
            for (gj, a) in g[1..].iter_mut().zip(r) {
                *gj += e * a;
            }
        }
        let n = self.n as f64;
        for (j, gj) in g.iter_mut().enumerate() {
            *gj /= n;
            if j > 0 {
                *gj += self.l2 * params[j];
            }
        }
        (nll / n + self.penalty(params), g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: LogisticModel,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub loss_history: Vec<f64>,
}

/// Column means and standard deviations; zero spread is replaced by 1.
pub fn standardization(ds: &LabeledDataset) -> (Vec<f64>, Vec<f64>) {
    let n = ds.len() as f64;
    let p = ds.width();
    let mut means = vec![0.0; p];
    for r in &ds.rows {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for r in &ds.rows {
        for j in 0..p {
            var[j] += (r[j] - means[j]).powi(2);
        }
    }
    let stds = var
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > 1e-12 * (1.0 + s) && s.is_finite() {
                s
            } else {
                1.0
            }
        })
        .collect();
    (means, stds)
}

pub fn train_logistic(train: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if train.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("training rows must be finite (fill missing values first)".into()));
    }
    let (means, stds) = standardization(train);
    let obj = LogisticObjective::new(train, &means, &stds, cfg.l2);
    let mut params = vec![0.0; obj.dim()];
    let (mut loss, mut grad) = obj.loss_and_gradient(&params);
    let mut history = vec![loss];
    let mut step: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(iterations));
        }
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < cfg.tol {
            converged = true;
            break;
        }
        let gsq: f64 = grad.iter().map(|g| g * g).sum();
        step = (step * 2.0).min(1e4);
        let mut accepted = None;
        while step > 1e-16 {
            let cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (l, g) = obj.loss_and_gradient(&cand);
            if !l.is_finite() {
                step *= 0.5;
                continue;
            }
            if l <= loss - 1e-4 * step * gsq {
                accepted = Some((cand, l, g));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, l, g)) = accepted else {
            log::debug!("line search stalled after {iterations} iterations");
            break;
        };
        params = cand;
        loss = l;
        grad = g;
        history.push(loss);
        iterations += 1;
    }
    log::debug!("logistic regression: {iterations} iterations, loss {loss}, converged {converged}");
    Ok(TrainOutcome {
        model: LogisticModel {
            feature_names: train.feature_names.clone(),
            means,
            stds,
            bias: params[0],
            weights: params[1..].to_vec(),
        },
        iterations,
        converged,
        loss_history: history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tp: usize,
}

impl Evaluation {
    pub fn total(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

pub const EVALUATION_HEADER: &str = "split,tn,fp,fn,tp,accuracy";

pub fn evaluation_csv(rows: &[(&str, Evaluation)]) -> String {
    let mut s = format!("{EVALUATION_HEADER}\n");
    for (name, e) in rows {
        let _ = writeln!(s, "{name},{},{},{},{},{}", e.tn, e.fp, e.fn_, e.tp, e.accuracy());
    }
    s
}

/// Confusion counts with class 1 predicted when the probability exceeds 0.5.
pub fn evaluate(model: &LogisticModel, ds: &LabeledDataset) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("evaluation set"));
    }
    let mut e = Evaluation {
        tn: 0,
        fp: 0,
        fn_: 0,
        tp: 0,
    };
    for (r, &y) in ds.rows.iter().zip(&ds.labels) {
        let pred = predict_proba(model, r)? > 0.5;
        match (y == 1, pred) {
            (false, false) => e.tn += 1,
            (false, true) => e.fp += 1,
            (true, false) => e.fn_ += 1,
            (true, true) => e.tp += 1,
        }
    }
    Ok(e)
}

/// Equal-frequency bin index per value; tied values share a bin.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let bin = start * bins / n;
        for &i in &order[start..end] {
            out[i] = bin;
        }
        start = end;
    }
    out
}

/// Mutual information (nats) between two discrete codings.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0usize; ka * kb];
    let mut pa = vec![0usize; ka];
    let mut pb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1;
        pa[x] += 1;
        pb[y] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (pa[x] as f64 * pb[y] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedFeature {
    pub name: String,
    pub score: f64,
}

pub const MRMR_HEADER: &str = "rank,feature,score";

pub fn mrmr_csv(ranked: &[RankedFeature]) -> String {
    let mut s = format!("{MRMR_HEADER}\n");
    for (i, f) in ranked.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, f.name, f.score);
    }
    s
}

/// Greedy mRmR with the difference criterion: relevance `I(f; y)` minus the
/// mean of `I(f; s)` over already selected `s`. Ties go to the smaller name.
pub fn mrmr_rank(ds: &LabeledDataset, top_k: usize, bins: usize) -> Result<Vec<RankedFeature>> {
    let p = ds.width();
    if top_k == 0 || top_k > p {
        return Err(Error::param("top_k", top_k, format!("1..={p}")));
    }
    if bins < 2 {
        return Err(Error::param("bins", bins, ">= 2"));
    }
    if ds.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let coded: Vec<Vec<usize>> = (0..p)
        .map(|j| equal_frequency_bins(&ds.column(j), bins))
        .collect();
    let y: Vec<usize> = ds.labels.iter().map(|&l| l as usize).collect();
    let relevance: Vec<f64> = coded.iter().map(|c| mutual_information(c, &y)).collect();
    let mut redundancy = vec![0.0; p];
    let mut chosen = vec![false; p];
    let mut ranked = Vec::with_capacity(top_k);
    for round in 0..top_k {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|&j| !chosen[j]) {
            let score = if round == 0 {
                relevance[j]
            } else {
                relevance[j] - redundancy[j] / round as f64
            };
            let better = match best {
                None => true,
                Some((b, s)) => {
                    score > s || (score == s && ds.feature_names[j] < ds.feature_names[b])
                }
            };
            if better {
                best = Some((j, score));
            }
        }
        let (j, score) = best.expect("unselected features remain");
        chosen[j] = true;
        ranked.push(RankedFeature {
            name: ds.feature_names[j].clone(),
            score,
        });
        for k in (0..p).filter(|&k| !chosen[k]) {
            redundancy[k] += mutual_information(&coded[k], &coded[j]);
        }
    }
    Ok(ranked)
}
