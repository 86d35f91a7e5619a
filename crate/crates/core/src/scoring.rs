//! Driver pickup-performance scores for a booking request and candidate ranking.
//!
//! The ratio score compares grid-level late-pickup rates with the driver's
//! own rates at the same grids; above 1 means the driver beats the grid.
//! The logistic score is the model's probability of a timely pickup.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use crate::bookings::DowClass;
use crate::error::{Error, Result};
use crate::features::{Aggregate, FeatureTables, Grouping, KeyFields};
use crate::prediction::{feature_names, predict_proba, raw_features, LogisticModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreRequest {
    pub driver_id: String,
    pub driver_gh: String,
    pub pickup_gh: String,
    pub dow: DowClass,
    pub hourgroup: u8,
}

impl ScoreRequest {
    pub fn key_fields(&self) -> KeyFields<'_> {
        KeyFields {
            driver: &self.driver_id,
            driver_gh: &self.driver_gh,
            pickup_gh: &self.pickup_gh,
            dow: self.dow,
            hourgroup: self.hourgroup,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Smoothing {
    None,
    #[default]
    Laplace,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreConfig {
    pub min_bookings: usize,
    pub smoothing: Smoothing,
    /// Floor, in percentage points, for driver rates when smoothing is off.
    pub epsilon: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            min_bookings: 5,
            smoothing: Smoothing::Laplace,
            epsilon: 0.5,
        }
    }
}

impl ScoreConfig {
    fn validate(&self) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(Error::param("epsilon", self.epsilon, "> 0"))
        }
    }

    fn rate(&self, late: usize, total: usize) -> f64 {
        match self.smoothing {
            Smoothing::Laplace => (late as f64 + 1.0) / (total as f64 + 2.0) * 100.0,
            Smoothing::None if total == 0 => 0.0,
            Smoothing::None => 100.0 * late as f64 / total as f64,
        }
    }
}

/// Mean of the two grid-to-driver rate ratios, driver rates floored at `epsilon`.
pub fn ratio_score(
    grid_at_driver_gh: f64,
    driver_at_driver_gh: f64,
    grid_at_pickup_gh: f64,
    driver_at_pickup_gh: f64,
    epsilon: f64,
) -> f64 {
    0.5 * (grid_at_driver_gh / driver_at_driver_gh.max(epsilon)
        + grid_at_pickup_gh / driver_at_pickup_gh.max(epsilon))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioOutcome {
    Qualified(f64),
    /// Fewer than `min_bookings` at the driver or the pickup grid.
    BelowMinimum,
}

fn grid_aggregate<'a>(tables: &'a FeatureTables, g: Grouping, code: &str) -> Result<&'a Aggregate> {
    tables
        .table(g)
        .get(&[code.to_owned()])
        .ok_or_else(|| Error::MissingAggregate {
            grouping: g.name().to_owned(),
            key: code.to_owned(),
        })
}

/// Ratio score for one candidate, before the minimum-bookings rule is resolved.
pub fn lpr_ratio_outcome(
    req: &ScoreRequest,
    tables: &FeatureTables,
    cfg: &ScoreConfig,
) -> Result<RatioOutcome> {
    cfg.validate()?;
    let grid_d = grid_aggregate(tables, Grouping::DriverGh, &req.driver_gh)?;
    let grid_p = grid_aggregate(tables, Grouping::PickupGh, &req.pickup_gh)?;
    let f = req.key_fields();
    let counts = |g: Grouping| {
        tables
            .table(g)
            .lookup(f)
            .map_or((0, 0), |a| (a.late, a.total))
    };
    let (late_d, total_d) = counts(Grouping::DriverDriverGh);
    let (late_p, total_p) = counts(Grouping::DriverPickupGh);
    if total_d < cfg.min_bookings || total_p < cfg.min_bookings {
        return Ok(RatioOutcome::BelowMinimum);
    }
    Ok(RatioOutcome::Qualified(ratio_score(
        cfg.rate(grid_d.late, grid_d.total),
        cfg.rate(late_d, total_d),
        cfg.rate(grid_p.late, grid_p.total),
        cfg.rate(late_p, total_p),
        cfg.epsilon,
    )))
}

/// Score given to every candidate when no candidate of a request qualifies:
/// the value of a driver who performs exactly like the grid.
pub const NEUTRAL_RATIO_SCORE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCandidate {
    pub driver_id: String,
    pub score: f64,
    pub qualified: bool,
}

/// Ratio scores for the candidates of one request. Candidates below the
/// minimum booking count receive the best qualified score of the request.
pub fn lpr_ratio_scores(
    reqs: &[ScoreRequest],
    tables: &FeatureTables,
    cfg: &ScoreConfig,
) -> Result<Vec<ScoredCandidate>> {
    let outcomes = reqs
        .iter()
        .map(|r| lpr_ratio_outcome(r, tables, cfg))
        .collect::<Result<Vec<_>>>()?;
    let top = outcomes
        .iter()
        .filter_map(|o| match o {
            RatioOutcome::Qualified(s) => Some(*s),
            RatioOutcome::BelowMinimum => None,
        })
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))
        .unwrap_or(NEUTRAL_RATIO_SCORE);
    Ok(reqs
        .iter()
        .zip(outcomes)
        .map(|(r, o)| {
            let (score, qualified) = match o {
                RatioOutcome::Qualified(s) => (s, true),
                RatioOutcome::BelowMinimum => (top, false),
            };
            ScoredCandidate {
                driver_id: r.driver_id.clone(),
                score,
                qualified,
            }
        })
        .collect())
}

/// Probability of a timely pickup; predictors are assembled exactly as for training.
pub fn logistic_score(req: &ScoreRequest, model: &LogisticModel, tables: &FeatureTables) -> Result<f64> {
    if model.feature_names != feature_names() {
        return Err(Error::DimensionMismatch(
            "model features differ from the assembled predictor set".to_owned(),
        ));
    }
    let row = raw_features(req.key_fields(), tables, None);
    Ok(1.0 - predict_proba(model, &row)?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mechanism {
    #[default]
    Ratio,
    Logistic,
}

impl Mechanism {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ratio" => Some(Mechanism::Ratio),
            "logistic" => Some(Mechanism::Logistic),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Ratio => "ratio",
            Mechanism::Logistic => "logistic",
        }
    }
}

pub struct ScoringContext<'a> {
    pub tables: &'a FeatureTables,
    pub config: ScoreConfig,
    pub model: Option<&'a LogisticModel>,
}

/// Candidates of one booking request, best first; ties by ascending driver id.
pub fn rank_candidates(
    reqs: &[ScoreRequest],
    mechanism: Mechanism,
    ctx: &ScoringContext<'_>,
) -> Result<Vec<ScoredCandidate>> {
    let Some(first) = reqs.first() else {
        return Err(Error::EmptyInput("candidate requests"));
    };
    if let Some(other) = reqs.iter().find(|r| r.pickup_gh != first.pickup_gh) {
        return Err(Error::Config(format!(
            "candidates of one request must share the pickup grid ({} vs {})",
            first.pickup_gh, other.pickup_gh
        )));
    }
    let mut scored = match mechanism {
        Mechanism::Ratio => lpr_ratio_scores(reqs, ctx.tables, &ctx.config)?,
        Mechanism::Logistic => {
            let model = ctx
                .model
                .ok_or_else(|| Error::Config("logistic scoring needs a model".to_owned()))?;
            reqs.iter()
                .map(|r| {
                    Ok(ScoredCandidate {
                        driver_id: r.driver_id.clone(),
                        score: logistic_score(r, model, ctx.tables)?,
                        qualified: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.driver_id.cmp(&b.driver_id))
    });
    Ok(scored)
}

pub const REQUEST_HEADER: [&str; 5] = ["driver_id", "driverGh", "pickupGh", "dow", "hourgroup"];
pub const SCORE_HEADER: &str = "driver_id,score,mechanism,qualified";

pub fn read_requests(path: &Path) -> Result<Vec<ScoreRequest>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        message,
    };
    if header.iter().ne(REQUEST_HEADER) {
        return Err(err(1, format!("header must be `{}`", REQUEST_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let dow = DowClass::parse(&rec[3])
            .ok_or_else(|| err(line, format!("dow must be weekday or weekend, found {:?}", &rec[3])))?;
        let hourgroup = rec[4]
            .parse::<u8>()
            .ok()
            .filter(|h| *h < 8)
            .ok_or_else(|| err(line, format!("hourgroup must be 0..=7, found {:?}", &rec[4])))?;
        for (i, code) in [(1, &rec[1]), (2, &rec[2])] {
            crate::bookings::GeoCell::parse(code)
                .map_err(|e| err(line, format!("{}: {e}", REQUEST_HEADER[i])))?;
        }
        out.push(ScoreRequest {
            driver_id: rec[0].to_owned(),
            driver_gh: rec[1].to_owned(),
            pickup_gh: rec[2].to_owned(),
            dow,
            hourgroup,
        });
    }
    Ok(out)
}

/// Groups requests by (pickup grid, dow, hourgroup) in order of first
/// appearance, ranks each group and concatenates the results.
pub fn score_batch(
    reqs: &[ScoreRequest],
    mechanism: Mechanism,
    ctx: &ScoringContext<'_>,
) -> Result<Vec<ScoredCandidate>> {
    let mut order: Vec<(String, DowClass, u8)> = Vec::new();
    let mut groups: BTreeMap<(String, DowClass, u8), Vec<ScoreRequest>> = BTreeMap::new();
    for r in reqs {
        let key = (r.pickup_gh.clone(), r.dow, r.hourgroup);
        let g = groups.entry(key.clone()).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r.clone());
    }
    let mut out = Vec::with_capacity(reqs.len());
    for key in order {
        out.extend(rank_candidates(&groups[&key], mechanism, ctx)?);
    }
    Ok(out)
}

pub fn scores_csv(scored: &[ScoredCandidate], mechanism: Mechanism) -> String {
    let mut s = format!("{SCORE_HEADER}\n");
    for c in scored {
        let mut v = String::new();
        crate::io::format_value(c.score, &mut v);
        let _ = writeln!(s, "{},{v},{},{}", c.driver_id, mechanism.as_str(), c.qualified);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{derive, DerivedBooking};
    use crate::bookings::BookingRecord;
    use chrono::{Duration, TimeZone, Utc};

    const GH_A: (f64, f64) = (1.300, 103.800);
    const GH_B: (f64, f64) = (1.350, 103.850);

    fn booking(driver: &str, at: (f64, f64), to: (f64, f64), late: bool) -> DerivedBooking {
        let t = Utc.with_ymd_and_hms(2024, 3, 4, 2, 0, 0).unwrap();
        let ata = if late { 1000.0 } else { 600.0 };
        derive(
            BookingRecord {
                booking_id: "b".into(),
                driver_id: driver.into(),
                accept_ts: t,
                driver_lat: at.0,
                driver_lon: at.1,
                pickup_lat: to.0,
                pickup_lon: to.1,
                pickup_ts: t + Duration::seconds(ata as i64),
                eta_s: 600.0,
                ata_s: ata,
                start_ata_s: 10.0,
                end_ata_s: 10.0,
                dist_km: 3.0,
            },
            0,
        )
        .unwrap()
    }

    fn many(driver: &str, n: usize, late: usize) -> Vec<DerivedBooking> {
        (0..n).map(|i| booking(driver, GH_A, GH_B, i < late)).collect()
    }

    fn request(driver: &str, tables_from: &[DerivedBooking]) -> ScoreRequest {
        let b = &tables_from[0];
        ScoreRequest {
            driver_id: driver.into(),
            driver_gh: b.driver_gh.clone(),
            pickup_gh: b.pickup_gh.clone(),
            dow: b.dow,
            hourgroup: b.hourgroup,
        }
    }

    fn raw() -> ScoreConfig {
        ScoreConfig {
            smoothing: Smoothing::None,
            ..Default::default()
        }
    }

    #[test]
    fn formula_cases() {
        assert_eq!(ratio_score(20.0, 20.0, 30.0, 30.0, 0.5), 1.0);
        assert_eq!(ratio_score(20.0, 10.0, 30.0, 15.0, 0.5), 2.0);
        assert_eq!(ratio_score(20.0, 0.0, 20.0, 0.0, 0.5), 40.0);
    }

    #[test]
    fn driver_matching_the_grid_scores_one() {
        let mut bs = many("d1", 10, 2);
        bs.extend(many("d2", 10, 2));
        let tables = FeatureTables::build(&bs).unwrap();
        let s = lpr_ratio_outcome(&request("d1", &bs), &tables, &raw()).unwrap();
        assert_eq!(s, RatioOutcome::Qualified(1.0));
    }

    #[test]
    fn laplace_example() {
        let mut bs = many("d1", 10, 0);
        bs.extend(many("d2", 90, 20));
        let tables = FeatureTables::build(&bs).unwrap();
        match lpr_ratio_outcome(&request("d1", &bs), &tables, &ScoreConfig::default()).unwrap() {
            RatioOutcome::Qualified(s) => assert!((s - 2.4706).abs() < 1e-4, "{s}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scale_invariance_and_monotonicity() {
        let base = [20.0, 10.0, 30.0, 15.0];
        let s = ratio_score(base[0], base[1], base[2], base[3], 0.5);
        for c in [0.1, 0.5, 2.0, 3.7] {
            let t = ratio_score(c * base[0], c * base[1], c * base[2], c * base[3], 0.5);
            assert!((s - t).abs() < 1e-12 * s);
        }
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let own = k as f64;
            let v = ratio_score(40.0, own, 40.0, own, 0.5);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn below_minimum_gets_the_request_maximum() {
        let mut bs = many("good", 20, 1);
        bs.extend(many("avg", 20, 6));
        bs.extend(many("new", 3, 3));
        let tables = FeatureTables::build(&bs).unwrap();
        let reqs: Vec<ScoreRequest> = ["avg", "new", "good"].iter().map(|d| request(d, &bs)).collect();
        let ctx = ScoringContext {
            tables: &tables,
            config: ScoreConfig::default(),
            model: None,
        };
        let ranked = rank_candidates(&reqs, Mechanism::Ratio, &ctx).unwrap();
        let names: Vec<&str> = ranked.iter().map(|c| c.driver_id.as_str()).collect();
        assert_eq!(names, vec!["good", "new", "avg"]);
        assert_eq!(ranked[0].score, ranked[1].score);
        assert!(!ranked[1].qualified);

        let lone = rank_candidates(&reqs[1..2], Mechanism::Ratio, &ctx).unwrap();
        assert_eq!(lone[0].score, NEUTRAL_RATIO_SCORE);
    }

    #[test]
    fn missing_grid_is_named() {
        let bs = many("d1", 10, 2);
        let tables = FeatureTables::build(&bs).unwrap();
        let mut req = request("d1", &bs);
        req.pickup_gh = "w21zzz".into();
        match lpr_ratio_outcome(&req, &tables, &raw()) {
            Err(Error::MissingAggregate { key, .. }) => assert_eq!(key, "w21zzz"),
            other => panic!("{other:?}"),
        }
        let bad = ScoreConfig {
            epsilon: 0.0,
            ..raw()
        };
        assert!(lpr_ratio_outcome(&request("d1", &bs), &tables, &bad).is_err());
    }

    #[test]
    fn ranking_order_and_errors() {
        let mut bs = many("b", 10, 2);
        bs.extend(many("a", 10, 2));
        let tables = FeatureTables::build(&bs).unwrap();
        let ctx = ScoringContext {
            tables: &tables,
            config: raw(),
            model: None,
        };
        let reqs = vec![request("b", &bs), request("a", &bs)];
        let ranked = rank_candidates(&reqs, Mechanism::Ratio, &ctx).unwrap();
        assert_eq!(ranked[0].driver_id, "a");
        assert!(rank_candidates(&[], Mechanism::Ratio, &ctx).is_err());
        assert!(rank_candidates(&reqs, Mechanism::Logistic, &ctx).is_err());
        let mut split = reqs.clone();
        split[1].pickup_gh = "w21zzz".into();
        assert!(rank_candidates(&split, Mechanism::Ratio, &ctx).is_err());
    }

    #[test]
    fn zero_weight_model_scores_half() {
        let bs = many("d1", 10, 2);
        let tables = FeatureTables::build(&bs).unwrap();
        let names = feature_names();
        let p = names.len();
        let model = LogisticModel {
            feature_names: names,
            means: vec![0.0; p],
            stds: vec![1.0; p],
            bias: 0.0,
            weights: vec![0.0; p],
        };
        let req = request("d1", &bs);
        assert_eq!(logistic_score(&req, &model, &tables).unwrap(), 0.5);
        let mut short = model.clone();
        short.feature_names.pop();
        assert!(logistic_score(&req, &short, &tables).is_err());
    }

    #[test]
    fn batch_csv_layout() {
        let c = ScoredCandidate {
            driver_id: "d1".into(),
            score: 1.5,
            qualified: true,
        };
        assert_eq!(scores_csv(&[c], Mechanism::Ratio), "driver_id,score,mechanism,qualified\nd1,1.5,ratio,true\n");
    }
}
