//! Synthetic booking corpus with planted driver skill and grid congestion.
//!
//! Lateness probability is `logistic(b + w1*c(driverGh) + w2*c(pickupGh) +
//! w3*(1 - skill) + amp*h(hourgroup))`, where the intercept `b` is solved by
//! bisection so the expected late rate over the drawn bookings hits the target.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::geohash::{geohash_encode, haversine_km};
use super::{hourgroup, BookingRecord, DEFAULT_TZ_OFFSET_MIN};
use crate::error::{Error, Result};

/// Relative lateness by hourgroup: quiet nights, morning and evening peaks.
pub const HOURGROUP_SHAPE: [f64; 8] = [-1.0, -1.0, 1.0, 0.0, 0.0, 0.5, 1.0, -0.5];

const CELL_LAT_DEG: f64 = 180.0 / 32768.0;
const CELL_LON_DEG: f64 = 360.0 / 32768.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BookingsConfig {
    pub drivers: usize,
    pub grids: usize,
    pub bookings: usize,
    pub days: u32,
    pub start: DateTime<Utc>,
    pub tz_offset_min: i32,
    pub center_lat: f64,
    pub center_lon: f64,
    pub target_late_rate: f64,
    pub w_driver_gh: f64,
    pub w_pickup_gh: f64,
    pub w_skill: f64,
    pub hourgroup_amplitude: f64,
    /// Grids each driver usually works in.
    pub home_grids: usize,
    /// Probability that a booking's driver location is one of the home grids.
    pub locality: f64,
    /// Probability that the pickup lies in the driver's own grid.
    pub same_grid_prob: f64,
    /// Fraction of records given an implausibly short ETA.
    pub outlier_rate: f64,
}

impl Default for BookingsConfig {
    fn default() -> Self {
        BookingsConfig {
            drivers: 400,
            grids: 64,
            bookings: 20_000,
            days: 28,
            start: Utc.with_ymd_and_hms(2024, 3, 4, 0, 0, 0).unwrap(),
            tz_offset_min: DEFAULT_TZ_OFFSET_MIN,
            center_lat: 1.3521,
            center_lon: 103.8198,
            target_late_rate: 0.25,
            w_driver_gh: 1.0,
            w_pickup_gh: 1.0,
            w_skill: 2.0,
            hourgroup_amplitude: 0.5,
            home_grids: 3,
            locality: 0.8,
            same_grid_prob: 0.5,
            outlier_rate: 0.01,
        }
    }
}

impl BookingsConfig {
    /// Large planted effects: lateness is mostly explained by the latents.
    pub fn strong() -> Self {
        BookingsConfig {
            w_driver_gh: 3.0,
            w_pickup_gh: 3.0,
            w_skill: 6.0,
            hourgroup_amplitude: 0.0,
            target_late_rate: 0.3,
            same_grid_prob: 0.2,
            ..Default::default()
        }
    }

    /// Few drivers with many bookings each in a handful of grids.
    pub fn scoring() -> Self {
        BookingsConfig {
            drivers: 40,
            grids: 9,
            bookings: 200_000,
            w_driver_gh: 0.5,
            w_pickup_gh: 0.5,
            w_skill: 3.0,
            hourgroup_amplitude: 0.0,
            locality: 0.0,
            same_grid_prob: 1.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_owned()))
            }
        };
        check(self.drivers > 0, "drivers must be positive")?;
        check(self.grids > 0, "grids must be positive")?;
        check(self.bookings > 0, "bookings must be positive")?;
        check(self.days > 0, "days must be positive")?;
        check(
            self.target_late_rate > 0.0 && self.target_late_rate < 1.0,
            "target_late_rate must lie in (0, 1)",
        )?;
        check(
            (1..=self.grids).contains(&self.home_grids),
            "home_grids must lie in 1..=grids",
        )?;
        for (name, p) in [
            ("locality", self.locality),
            ("same_grid_prob", self.same_grid_prob),
            ("outlier_rate", self.outlier_rate),
        ] {
            check((0.0..=1.0).contains(&p), &format!("{name} must lie in [0, 1]"))?;
        }
        let weights = [
            self.w_driver_gh,
            self.w_pickup_gh,
            self.w_skill,
            self.hourgroup_amplitude,
            self.center_lat,
            self.center_lon,
        ];
        check(weights.iter().all(|w| w.is_finite()), "weights must be finite")?;
        let side = (self.grids as f64).sqrt().ceil();
        let lat_span = side * CELL_LAT_DEG;
        let lon_span = side * CELL_LON_DEG;
        check(
            self.center_lat.abs() + lat_span < 90.0 && self.center_lon.abs() + lon_span < 180.0,
            "grid lattice leaves the valid coordinate range",
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedTruth {
    pub driver_ids: Vec<String>,
    /// Per driver, in [0, 1]; higher means more punctual.
    pub skill: Vec<f64>,
    pub home_grids: Vec<Vec<usize>>,
    /// Precision-6 geohash per grid.
    pub grid_codes: Vec<String>,
    pub congestion: Vec<f64>,
    pub intercept: f64,
    /// Late probability used for each record.
    pub late_probability: Vec<f64>,
}

impl PlantedTruth {
    pub fn drivers_csv(&self) -> String {
        let mut s = String::from("driver_id,skill\n");
        for (id, k) in self.driver_ids.iter().zip(&self.skill) {
            let _ = writeln!(s, "{id},{k}");
        }
        s
    }

    pub fn grids_csv(&self) -> String {
        let mut s = String::from("geohash,congestion\n");
        for (g, c) in self.grid_codes.iter().zip(&self.congestion) {
            let _ = writeln!(s, "{g},{c}");
        }
        s
    }

    pub fn skill_of(&self, driver_id: &str) -> Option<f64> {
        self.driver_ids
            .iter()
            .position(|d| d == driver_id)
            .map(|i| self.skill[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub records: Vec<BookingRecord>,
    pub truth: PlantedTruth,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Intercept that makes the mean of `sigmoid(b + z)` equal `target`.
fn calibrate_intercept(z: &[f64], target: f64) -> f64 {
    let mean = |b: f64| z.iter().map(|&v| sigmoid(b + v)).sum::<f64>() / z.len() as f64;
    let (mut lo, mut hi) = (-50.0, 50.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

struct Draft {
    driver: usize,
    driver_gh: usize,
    pickup_gh: usize,
    driver_pt: (f64, f64),
    pickup_pt: (f64, f64),
    accept_ts: DateTime<Utc>,
    eta_s: f64,
    dist_km: f64,
    z: f64,
}

pub fn gen_synthetic_bookings(cfg: &BookingsConfig, seed: u64) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let side = (cfg.grids as f64).sqrt().ceil() as usize;
    let base = geohash_encode(cfg.center_lat, cfg.center_lon, 6)?.bounds();
    let mut grid_boxes = Vec::with_capacity(cfg.grids);
    let mut grid_codes = Vec::with_capacity(cfg.grids);
    for g in 0..cfg.grids {
        let (i, j) = ((g % side) as f64, (g / side) as f64);
        let (clat, clon) = base.center();
        let cell = geohash_encode(clat + j * CELL_LAT_DEG, clon + i * CELL_LON_DEG, 6)?;
        grid_boxes.push(cell.bounds());
        grid_codes.push(cell.into_string());
    }
    let congestion: Vec<f64> = (0..cfg.grids)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    // Street layout slows the first and last 50 m independently of congestion.
    let layout: Vec<f64> = (0..cfg.grids)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let width = cfg.drivers.to_string().len().max(4);
    let driver_ids: Vec<String> = (0..cfg.drivers).map(|d| format!("d{d:0width$}")).collect();
    let skill: Vec<f64> = (0..cfg.drivers).map(|_| rng.random::<f64>()).collect();
    let home_grids: Vec<Vec<usize>> = (0..cfg.drivers)
        .map(|_| {
            let mut h = rand::seq::index::sample(&mut rng, cfg.grids, cfg.home_grids).into_vec();
            h.sort_unstable();
            h
        })
        .collect();

    let point_in = |rng: &mut ChaCha8Rng, g: usize| {
        let b = &grid_boxes[g];
        let fl: f64 = rng.random_range(0.05..0.95);
        let fo: f64 = rng.random_range(0.05..0.95);
        (
            round_to(b.lat_min + fl * (b.lat_max - b.lat_min), 7),
            round_to(b.lon_min + fo * (b.lon_max - b.lon_min), 7),
        )
    };
    let span_s = i64::from(cfg.days) * 86_400;
    let mut drafts = Vec::with_capacity(cfg.bookings);
    for _ in 0..cfg.bookings {
        let driver = rng.random_range(0..cfg.drivers);
        let driver_gh = if rng.random_bool(cfg.locality) {
            home_grids[driver][rng.random_range(0..cfg.home_grids)]
        } else {
            rng.random_range(0..cfg.grids)
        };
        let pickup_gh = if rng.random_bool(cfg.same_grid_prob) {
            driver_gh
        } else {
            rng.random_range(0..cfg.grids)
        };
        let driver_pt = point_in(&mut rng, driver_gh);
        let pickup_pt = point_in(&mut rng, pickup_gh);
        let accept_ts = cfg.start + Duration::seconds(rng.random_range(0..span_s));
        let straight = haversine_km(driver_pt.0, driver_pt.1, pickup_pt.0, pickup_pt.1);
        let dist_km = round_to((straight * rng.random_range(1.2..1.5)).max(0.2), 3);
        let eta_s = if rng.random_bool(cfg.outlier_rate) {
            (dist_km / rng.random_range(150.0..250.0) * 3600.0).floor().max(1.0)
        } else {
            (dist_km / rng.random_range(18.0..45.0) * 3600.0).round().max(60.0)
        };
        let hg = hourgroup(&accept_ts, cfg.tz_offset_min) as usize;
        let z = cfg.w_driver_gh * congestion[driver_gh]
            + cfg.w_pickup_gh * congestion[pickup_gh]
            + cfg.w_skill * (1.0 - skill[driver])
            + cfg.hourgroup_amplitude * HOURGROUP_SHAPE[hg];
        drafts.push(Draft {
            driver,
            driver_gh,
            pickup_gh,
            driver_pt,
            pickup_pt,
            accept_ts,
            eta_s,
            dist_km,
            z,
        });
    }

    let zs: Vec<f64> = drafts.iter().map(|d| d.z).collect();
    let intercept = calibrate_intercept(&zs, cfg.target_late_rate);
    let overrun = Exp::new(1.0 / 240.0).expect("positive rate");
    let booking_width = cfg.bookings.to_string().len().max(6);
    let mut records = Vec::with_capacity(cfg.bookings);
    let mut late_probability = Vec::with_capacity(cfg.bookings);
    for (b, d) in drafts.into_iter().enumerate() {
        let p = sigmoid(intercept + d.z);
        late_probability.push(p);
        let diff = if rng.random_bool(p) {
            let extra: f64 = overrun.sample(&mut rng);
            301.0 + extra.floor()
        } else {
            let lo = -(180.0f64.min((d.eta_s / 2.0).floor())) as i64;
            rng.random_range(lo..=300) as f64
        };
        let ata_s = d.eta_s + diff;
        let noise_s: f64 = StandardNormal.sample(&mut rng);
        let noise_e: f64 = StandardNormal.sample(&mut rng);
        let slow = |g: usize, noise: f64| 0.2 * congestion[g] + 0.3 * layout[g] + 0.2 * noise;
        let start_ata_s = round_to(12.0 * slow(d.driver_gh, noise_s).exp(), 1);
        let end_ata_s = round_to(18.0 * slow(d.pickup_gh, noise_e).exp(), 1);
        records.push(BookingRecord {
            booking_id: format!("b{b:0booking_width$}"),
            driver_id: driver_ids[d.driver].clone(),
            accept_ts: d.accept_ts,
            driver_lat: d.driver_pt.0,
            driver_lon: d.driver_pt.1,
            pickup_lat: d.pickup_pt.0,
            pickup_lon: d.pickup_pt.1,
            pickup_ts: d.accept_ts + Duration::seconds(ata_s as i64),
            eta_s: d.eta_s,
            ata_s,
            start_ata_s,
            end_ata_s,
            dist_km: d.dist_km,
        });
    }
    Ok(SyntheticCorpus {
        records,
        truth: PlantedTruth {
            driver_ids,
            skill,
            home_grids,
            grid_codes,
            congestion,
            intercept,
            late_probability,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bookings::{check_record, geohash::GeoCell, RejectReason};

    fn small() -> BookingsConfig {
        BookingsConfig {
            drivers: 60,
            grids: 16,
            bookings: 6000,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_synthetic_bookings(&small(), 3).unwrap();
        let b = gen_synthetic_bookings(&small(), 3).unwrap();
        let c = gen_synthetic_bookings(&small(), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn late_rate_near_target() {
        let corpus = gen_synthetic_bookings(&small(), 1).unwrap();
        let late = corpus
            .records
            .iter()
            .filter(|r| r.ata_s - r.eta_s > 300.0)
            .count();
        let rate = late as f64 / corpus.records.len() as f64;
        assert!((rate - 0.25).abs() < 0.02, "late rate {rate}");
    }

    #[test]
    fn records_land_in_their_grids() {
        let cfg = small();
        let corpus = gen_synthetic_bookings(&cfg, 2).unwrap();
        let codes = &corpus.truth.grid_codes;
        let mut sorted = codes.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), cfg.grids);
        let mut outliers = 0;
        for r in &corpus.records {
            let g = crate::bookings::geohash_encode(r.driver_lat, r.driver_lon, 6).unwrap();
            assert!(codes.contains(&g.into_string()));
            assert!(r.ata_s >= 0.0 && r.pickup_ts >= r.accept_ts);
            match check_record(r) {
                None => {}
                Some(RejectReason::SpeedOutOfRange) => outliers += 1,
                Some(other) => panic!("unexpected rejection {other:?}"),
            }
        }
        assert!(outliers > 0 && outliers < cfg.bookings / 20);
        assert!(GeoCell::parse(&codes[0]).is_ok());
    }

    #[test]
    fn skilled_drivers_are_late_less_often() {
        let corpus = gen_synthetic_bookings(&small(), 5).unwrap();
        let t = &corpus.truth;
        let mut per_driver = vec![(0usize, 0usize); t.driver_ids.len()];
        for r in &corpus.records {
            let d = t.driver_ids.binary_search(&r.driver_id).unwrap();
            per_driver[d].0 += 1;
            per_driver[d].1 += usize::from(r.ata_s - r.eta_s > 300.0);
        }
        let mut order: Vec<usize> = (0..t.skill.len()).collect();
        order.sort_by(|&a, &b| t.skill[a].total_cmp(&t.skill[b]));
        let decile = order.len() / 10;
        let lpr = |ds: &[usize]| {
            let (n, l) = ds
                .iter()
                .fold((0, 0), |(n, l), &d| (n + per_driver[d].0, l + per_driver[d].1));
            l as f64 / n as f64
        };
        assert!(lpr(&order[order.len() - decile..]) < lpr(&order[..decile]));
    }

    #[test]
    fn inconsistent_config_is_rejected() {
        let bad = BookingsConfig {
            home_grids: 100,
            ..small()
        };
        assert!(matches!(gen_synthetic_bookings(&bad, 0), Err(Error::Config(_))));
        let bad = BookingsConfig {
            target_late_rate: 1.0,
            ..small()
        };
        assert!(gen_synthetic_bookings(&bad, 0).is_err());
    }
}
