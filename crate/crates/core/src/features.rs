//! Per-booking derived fields, keyed aggregate tables, the driver-by-grid
//! late-pickup-rate matrix, booking histograms and the high-speed grid query.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::Weekday;
use rayon::prelude::*;

use crate::bookings::{
    dow_class, geohash_encode, hourgroup, local_weekday, BookingRecord, DowClass,
};
use crate::error::{Error, Result};
use crate::io::format_value;
use crate::matrix::{MatrixKind, RectRelationalMatrix, SENTINEL};

pub const LATE_THRESHOLD_S: f64 = 300.0;
pub const GRID_PRECISION: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedBooking {
    pub record: BookingRecord,
    pub driver_gh: String,
    pub pickup_gh: String,
    pub weekday: Weekday,
    pub dow: DowClass,
    pub hourgroup: u8,
    pub diff_eta_ata_s: f64,
    pub is_late: bool,
    pub speed_kmh: f64,
}

pub fn is_late_pickup(diff_eta_ata_s: f64) -> bool {
    diff_eta_ata_s > LATE_THRESHOLD_S
}

pub fn derive(record: BookingRecord, tz_offset_min: i32) -> Result<DerivedBooking> {
    let driver_gh = geohash_encode(record.driver_lat, record.driver_lon, GRID_PRECISION)?;
    let pickup_gh = geohash_encode(record.pickup_lat, record.pickup_lon, GRID_PRECISION)?;
    let diff = record.ata_s - record.eta_s;
    Ok(DerivedBooking {
        driver_gh: driver_gh.into_string(),
        pickup_gh: pickup_gh.into_string(),
        weekday: local_weekday(&record.accept_ts, tz_offset_min),
        dow: dow_class(&record.accept_ts, tz_offset_min),
        hourgroup: hourgroup(&record.accept_ts, tz_offset_min),
        diff_eta_ata_s: diff,
        is_late: is_late_pickup(diff),
        speed_kmh: record.speed_kmh(),
        record,
    })
}

/// Derives every record, preserving input order.
pub fn derive_all(records: Vec<BookingRecord>, tz_offset_min: i32) -> Result<Vec<DerivedBooking>> {
    records
        .into_par_iter()
        .map(|r| derive(r, tz_offset_min))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyPart {
    Driver,
    DriverGh,
    PickupGh,
    Dow,
    Hourgroup,
}

impl KeyPart {
    pub fn column_name(self) -> &'static str {
        match self {
            KeyPart::Driver => "driver_id",
            KeyPart::DriverGh => "driverGh",
            KeyPart::PickupGh => "pickupGh",
            KeyPart::Dow => "dow",
            KeyPart::Hourgroup => "hourgroup",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grouping {
    Driver,
    DriverDow,
    DriverHourgroup,
    DriverGh,
    DriverGhDow,
    DriverGhHourgroup,
    PickupGh,
    PickupGhDow,
    PickupGhHourgroup,
    DriverDriverGh,
    DriverDriverGhDow,
    DriverDriverGhHourgroup,
    DriverPickupGh,
    DriverPickupGhDow,
    DriverPickupGhHourgroup,
}

impl Grouping {
    pub const ALL: [Grouping; 15] = [
        Grouping::Driver,
        Grouping::DriverDow,
        Grouping::DriverHourgroup,
        Grouping::DriverGh,
        Grouping::DriverGhDow,
        Grouping::DriverGhHourgroup,
        Grouping::PickupGh,
        Grouping::PickupGhDow,
        Grouping::PickupGhHourgroup,
        Grouping::DriverDriverGh,
        Grouping::DriverDriverGhDow,
        Grouping::DriverDriverGhHourgroup,
        Grouping::DriverPickupGh,
        Grouping::DriverPickupGhDow,
        Grouping::DriverPickupGhHourgroup,
    ];

    pub fn parts(self) -> &'static [KeyPart] {
        use KeyPart::*;
        match self {
            Grouping::Driver => &[Driver],
            Grouping::DriverDow => &[Driver, Dow],
            Grouping::DriverHourgroup => &[Driver, Hourgroup],
            Grouping::DriverGh => &[DriverGh],
            Grouping::DriverGhDow => &[DriverGh, Dow],
            Grouping::DriverGhHourgroup => &[DriverGh, Hourgroup],
            Grouping::PickupGh => &[PickupGh],
            Grouping::PickupGhDow => &[PickupGh, Dow],
            Grouping::PickupGhHourgroup => &[PickupGh, Hourgroup],
            Grouping::DriverDriverGh => &[Driver, DriverGh],
            Grouping::DriverDriverGhDow => &[Driver, DriverGh, Dow],
            Grouping::DriverDriverGhHourgroup => &[Driver, DriverGh, Hourgroup],
            Grouping::DriverPickupGh => &[Driver, PickupGh],
            Grouping::DriverPickupGhDow => &[Driver, PickupGh, Dow],
            Grouping::DriverPickupGhHourgroup => &[Driver, PickupGh, Hourgroup],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Grouping::Driver => "driver",
            Grouping::DriverDow => "driver_dow",
            Grouping::DriverHourgroup => "driver_hourgroup",
            Grouping::DriverGh => "driverGh",
            Grouping::DriverGhDow => "driverGh_dow",
            Grouping::DriverGhHourgroup => "driverGh_hourgroup",
            Grouping::PickupGh => "pickupGh",
            Grouping::PickupGhDow => "pickupGh_dow",
            Grouping::PickupGhHourgroup => "pickupGh_hourgroup",
            Grouping::DriverDriverGh => "driver_driverGh",
            Grouping::DriverDriverGhDow => "driver_driverGh_dow",
            Grouping::DriverDriverGhHourgroup => "driver_driverGh_hourgroup",
            Grouping::DriverPickupGh => "driver_pickupGh",
            Grouping::DriverPickupGhDow => "driver_pickupGh_dow",
            Grouping::DriverPickupGhHourgroup => "driver_pickupGh_hourgroup",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Grouping::ALL
            .into_iter()
            .find(|g| g.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown grouping scheme {name:?}")))
    }
}

/// The fields a grouping key can be built from.
#[derive(Clone, Copy, Debug)]
pub struct KeyFields<'a> {
    pub driver: &'a str,
    pub driver_gh: &'a str,
    pub pickup_gh: &'a str,
    pub dow: DowClass,
    pub hourgroup: u8,
}

impl<'a> From<&'a DerivedBooking> for KeyFields<'a> {
    fn from(b: &'a DerivedBooking) -> Self {
        KeyFields {
            driver: &b.record.driver_id,
            driver_gh: &b.driver_gh,
            pickup_gh: &b.pickup_gh,
            dow: b.dow,
            hourgroup: b.hourgroup,
        }
    }
}

pub type GroupKey = Vec<String>;

pub fn group_key(grouping: Grouping, f: KeyFields<'_>) -> GroupKey {
    grouping
        .parts()
        .iter()
        .map(|p| match p {
            KeyPart::Driver => f.driver.to_owned(),
            KeyPart::DriverGh => f.driver_gh.to_owned(),
            KeyPart::PickupGh => f.pickup_gh.to_owned(),
            KeyPart::Dow => f.dow.as_str().to_owned(),
            KeyPart::Hourgroup => f.hourgroup.to_string(),
        })
        .collect()
}

pub const MEASURES: [&str; 5] = [
    "total_bookings",
    "avg_diff_ata_eta",
    "lpr_pct",
    "avg_start_ata",
    "avg_end_ata",
];

/// Counts and sums for one key; means are derived on demand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub total: usize,
    pub late: usize,
    pub sum_diff: f64,
    pub sum_start: f64,
    pub sum_end: f64,
}

impl Aggregate {
    pub fn lpr_pct(&self) -> f64 {
        100.0 * self.late as f64 / self.total as f64
    }

    pub fn avg_diff(&self) -> f64 {
        self.sum_diff / self.total as f64
    }

    pub fn avg_start(&self) -> f64 {
        self.sum_start / self.total as f64
    }

    pub fn avg_end(&self) -> f64 {
        self.sum_end / self.total as f64
    }

    /// Values in [`MEASURES`] order.
    pub fn measures(&self) -> [f64; 5] {
        [
            self.total as f64,
            self.avg_diff(),
            self.lpr_pct(),
            self.avg_start(),
            self.avg_end(),
        ]
    }

    /// The aggregate with one contributing booking taken out, or `None` if it
    /// was the only one.
    pub fn without(&self, b: &DerivedBooking) -> Option<Aggregate> {
        (self.total > 1).then(|| Aggregate {
            total: self.total - 1,
            late: self.late - usize::from(b.is_late),
            sum_diff: self.sum_diff - b.diff_eta_ata_s,
            sum_start: self.sum_start - b.record.start_ata_s,
            sum_end: self.sum_end - b.record.end_ata_s,
        })
    }
}

/// Sum that does not depend on the order of `values`.
fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedTable {
    pub grouping: Grouping,
    pub rows: BTreeMap<GroupKey, Aggregate>,
}

impl AggregatedTable {
    pub fn get(&self, key: &[String]) -> Option<&Aggregate> {
        self.rows.get(key)
    }

    pub fn lookup(&self, f: KeyFields<'_>) -> Option<&Aggregate> {
        self.rows.get(&group_key(self.grouping, f))
    }

    pub fn header(&self) -> Vec<&'static str> {
        self.grouping
            .parts()
            .iter()
            .map(|p| p.column_name())
            .chain(MEASURES)
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(self.header()).map_err(|e| Error::csv(path, e))?;
        let mut fields = Vec::new();
        for (key, agg) in &self.rows {
            fields.clear();
            fields.extend(key.iter().cloned());
            for v in agg.measures() {
                let mut s = String::new();
                format_value(v, &mut s);
                fields.push(s);
            }
            w.write_record(&fields).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Per-key counts and means; keys without bookings are absent.
pub fn aggregate(bookings: &[DerivedBooking], grouping: Grouping) -> Result<AggregatedTable> {
    if bookings.is_empty() {
        return Err(Error::EmptyInput("bookings"));
    }
    let mut members: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, b) in bookings.iter().enumerate() {
        members
            .entry(group_key(grouping, b.into()))
            .or_default()
            .push(i);
    }
    let rows = members
        .into_iter()
        .map(|(key, idx)| {
            let col = |f: fn(&DerivedBooking) -> f64| -> f64 {
                let mut v: Vec<f64> = idx.iter().map(|&i| f(&bookings[i])).collect();
                ordered_sum(&mut v)
            };
            let agg = Aggregate {
                total: idx.len(),
                late: idx.iter().filter(|&&i| bookings[i].is_late).count(),
                sum_diff: col(|b| b.diff_eta_ata_s),
                sum_start: col(|b| b.record.start_ata_s),
                sum_end: col(|b| b.record.end_ata_s),
            };
            (key, agg)
        })
        .collect();
    Ok(AggregatedTable { grouping, rows })
}

/// All fifteen tables, indexed by `Grouping as usize`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTables {
    pub tables: Vec<AggregatedTable>,
}

impl FeatureTables {
    pub fn build(bookings: &[DerivedBooking]) -> Result<Self> {
        let tables = Grouping::ALL
            .par_iter()
            .map(|&g| aggregate(bookings, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureTables { tables })
    }

    pub fn table(&self, g: Grouping) -> &AggregatedTable {
        &self.tables[g as usize]
    }

    /// Writes `<grouping>.csv` for every table and returns the file names.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut names = Vec::new();
        for t in &self.tables {
            let name = format!("{}.csv", t.grouping.name());
            t.write_csv(&dir.join(&name))?;
            names.push(name);
        }
        Ok(names)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridSource {
    #[default]
    Driver,
    Pickup,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatrixOptions {
    pub grid: GridSource,
    pub dow: Option<DowClass>,
    pub hourgroup: Option<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerformanceMatrix {
    pub matrix: RectRelationalMatrix,
    pub drivers: Vec<String>,
    pub grids: Vec<String>,
}

/// Drivers by grids; entry is the pair's late-pickup rate in [0, 1], or the
/// sentinel -1 where the driver has no booking in the grid.
pub fn build_performance_matrix(
    bookings: &[DerivedBooking],
    opts: MatrixOptions,
) -> Result<PerformanceMatrix> {
    let selected: Vec<DerivedBooking> = bookings
        .iter()
        .filter(|b| opts.dow.is_none_or(|d| b.dow == d))
        .filter(|b| opts.hourgroup.is_none_or(|h| b.hourgroup == h))
        .cloned()
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyInput("bookings for the performance matrix"));
    }
    let grouping = match opts.grid {
        GridSource::Driver => Grouping::DriverDriverGh,
        GridSource::Pickup => Grouping::DriverPickupGh,
    };
    let table = aggregate(&selected, grouping)?;
    let mut drivers: Vec<String> = table.rows.keys().map(|k| k[0].clone()).collect();
    drivers.dedup();
    let mut grids: Vec<String> = table.rows.keys().map(|k| k[1].clone()).collect();
    grids.sort();
    grids.dedup();
    let col_of: BTreeMap<&str, usize> = grids
        .iter()
        .enumerate()
        .map(|(j, g)| (g.as_str(), j))
        .collect();
    let mut values = vec![SENTINEL; drivers.len() * grids.len()];
    let mut row = 0;
    let mut prev: Option<&str> = None;
    for (key, agg) in &table.rows {
        if prev.is_some_and(|p| p != key[0]) {
            row += 1;
        }
        prev = Some(&key[0]);
        values[row * grids.len() + col_of[key[1].as_str()]] = agg.lpr_pct() / 100.0;
    }
    let matrix = RectRelationalMatrix::new(drivers.len(), grids.len(), values, MatrixKind::Performance)?;
    Ok(PerformanceMatrix {
        matrix,
        drivers,
        grids,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BookingHistograms {
    /// Monday first.
    pub per_weekday: [usize; 7],
    pub per_hourgroup: [usize; 8],
}

impl BookingHistograms {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bucket,value,count\n");
        const DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
        for (d, c) in DAYS.iter().zip(self.per_weekday) {
            let _ = writeln!(s, "weekday,{d},{c}");
        }
        for (h, c) in self.per_hourgroup.iter().enumerate() {
            let _ = writeln!(s, "hourgroup,{h},{c}");
        }
        s
    }
}

pub fn booking_histograms(bookings: &[DerivedBooking]) -> BookingHistograms {
    let mut h = BookingHistograms::default();
    for b in bookings {
        h.per_weekday[b.weekday.num_days_from_monday() as usize] += 1;
        h.per_hourgroup[b.hourgroup as usize] += 1;
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct HighSpeedGrid {
    pub code: String,
    pub bookings: usize,
    pub late: usize,
    pub mean_speed_kmh: f64,
}

pub const HIGH_SPEED_HEADER: &str = "geohash,bookings,late,mean_speed_kmh";

pub fn high_speed_csv(grids: &[HighSpeedGrid]) -> String {
    let mut s = format!("{HIGH_SPEED_HEADER}\n");
    for g in grids {
        let mut v = String::new();
        format_value(g.mean_speed_kmh, &mut v);
        let _ = writeln!(s, "{},{},{},{v}", g.code, g.bookings, g.late);
    }
    s
}

/// Grids of the driver's location, at `precision`, whose mean speed exceeds
/// `speed_kmh_min` and that hold at least `min_late` late pickups. Sorted by code.
pub fn high_speed_late_grids(
    bookings: &[DerivedBooking],
    speed_kmh_min: f64,
    min_late: usize,
    precision: usize,
) -> Result<Vec<HighSpeedGrid>> {
    let mut cells: BTreeMap<String, (usize, usize, Vec<f64>)> = BTreeMap::new();
    for b in bookings {
        let code = geohash_encode(b.record.driver_lat, b.record.driver_lon, precision)?.into_string();
        let e = cells.entry(code).or_default();
        e.0 += 1;
        e.1 += usize::from(b.is_late);
        e.2.push(b.speed_kmh);
    }
    Ok(cells
        .into_iter()
        .filter_map(|(code, (n, late, mut speeds))| {
            let mean = ordered_sum(&mut speeds) / n as f64;
            (mean > speed_kmh_min && late >= min_late).then_some(HighSpeedGrid {
                code,
                bookings: n,
                late,
                mean_speed_kmh: mean,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bookings::{gen_synthetic_bookings, preprocess, BookingsConfig};
    use crate::bookings::local_time;
    use chrono::{Duration, TimeZone, Timelike, Utc};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn booking(driver: &str, lat: f64, lon: f64, diff: f64) -> DerivedBooking {
        let t = Utc.with_ymd_and_hms(2024, 3, 4, 2, 0, 0).unwrap();
        let record = BookingRecord {
            booking_id: "b".into(),
            driver_id: driver.into(),
            accept_ts: t,
            driver_lat: lat,
            driver_lon: lon,
            pickup_lat: lat,
            pickup_lon: lon,
            pickup_ts: t + Duration::seconds(600),
            eta_s: 600.0,
            ata_s: 600.0 + diff,
            start_ata_s: 10.0,
            end_ata_s: 20.0,
            dist_km: 5.0,
        };
        derive(record, 0).unwrap()
    }

    fn corpus(seed: u64) -> Vec<DerivedBooking> {
        let cfg = BookingsConfig {
            drivers: 50,
            grids: 16,
            bookings: 3000,
            ..Default::default()
        };
        let (kept, _) = preprocess(gen_synthetic_bookings(&cfg, seed).unwrap().records);
        derive_all(kept, 480).unwrap()
    }

    #[test]
    fn lateness_is_strict() {
        assert!(booking("d", 1.3, 103.8, 360.0).is_late);
        assert!(!booking("d", 1.3, 103.8, 300.0).is_late);
        assert!(!booking("d", 1.3, 103.8, -120.0).is_late);
        assert_eq!(booking("d", 1.3, 103.8, 0.0).driver_gh.len(), 6);
    }

    #[test]
    fn driver_lpr_arithmetic() {
        let bs = vec![
            booking("d1", 1.3, 103.8, 400.0),
            booking("d1", 1.3, 103.8, 0.0),
            booking("d1", 1.3, 103.8, 10.0),
            booking("d2", 1.3, 103.8, 0.0),
        ];
        let t = aggregate(&bs, Grouping::Driver).unwrap();
        let d1 = t.get(&["d1".to_owned()]).unwrap();
        assert_eq!(d1.total, 3);
        assert!((d1.lpr_pct() - 100.0 / 3.0).abs() < 1e-12);
        assert!(t.get(&["d3".to_owned()]).is_none());
        assert_eq!(t.get(&["d2".to_owned()]).unwrap().lpr_pct(), 0.0);
        assert!(aggregate(&[], Grouping::Driver).is_err());
        assert!(Grouping::parse("driver_grid").is_err());
    }

    #[test]
    fn tables_reconcile_with_the_whole_corpus() {
        let bs = corpus(1);
        let late = bs.iter().filter(|b| b.is_late).count();
        let tables = FeatureTables::build(&bs).unwrap();
        for t in &tables.tables {
            let total: usize = t.rows.values().map(|a| a.total).sum();
            let l: usize = t.rows.values().map(|a| a.late).sum();
            assert_eq!((total, l), (bs.len(), late), "{}", t.grouping.name());
            assert!(t.rows.values().all(|a| a.total >= 1));
        }
    }

    #[test]
    fn aggregation_ignores_input_order() {
        let bs = corpus(2);
        let mut shuffled = bs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(FeatureTables::build(&bs).unwrap(), FeatureTables::build(&shuffled).unwrap());
    }

    #[test]
    fn leave_one_out_matches_rebuilding() {
        let bs = corpus(3);
        let t = aggregate(&bs, Grouping::DriverGh).unwrap();
        let b = &bs[17];
        let key = group_key(Grouping::DriverGh, b.into());
        let mut rest = bs.clone();
        rest.remove(17);
        let direct = aggregate(&rest, Grouping::DriverGh).unwrap();
        let loo = t.get(&key).unwrap().without(b).unwrap();
        let reb = direct.get(&key).unwrap();
        assert_eq!((loo.total, loo.late), (reb.total, reb.late));
        assert!((loo.avg_diff() - reb.avg_diff()).abs() < 1e-9);
    }

    #[test]
    fn performance_matrix_entries() {
        let bs = vec![
            booking("d1", 1.30, 103.80, 0.0),
            booking("d1", 1.30, 103.80, 500.0),
            booking("d2", 1.40, 103.90, 0.0),
        ];
        let pm = build_performance_matrix(&bs, MatrixOptions::default()).unwrap();
        assert_eq!(pm.drivers, vec!["d1", "d2"]);
        assert_eq!(pm.grids.len(), 2);
        let g1 = pm.grids.iter().position(|g| *g == bs[0].driver_gh).unwrap();
        assert_eq!(pm.matrix.get(0, g1), 0.5);
        assert_eq!(pm.matrix.get(0, 1 - g1), -1.0);
        assert_eq!(pm.matrix.get(1, 1 - g1), 0.0);
        let weekend = MatrixOptions {
            dow: Some(DowClass::Weekend),
            ..Default::default()
        };
        assert!(build_performance_matrix(&bs, weekend).is_err());
    }

    #[test]
    fn performance_matrix_sentinels_match_absent_pairs() {
        let bs = corpus(4);
        let pm = build_performance_matrix(&bs, MatrixOptions::default()).unwrap();
        let t = aggregate(&bs, Grouping::DriverDriverGh).unwrap();
        for (i, d) in pm.drivers.iter().enumerate() {
            for (j, g) in pm.grids.iter().enumerate() {
                let v = pm.matrix.get(i, j);
                match t.get(&[d.clone(), g.clone()]) {
                    Some(a) => assert_eq!(v, a.lpr_pct() / 100.0),
                    None => assert_eq!(v, -1.0),
                }
            }
        }
    }

    #[test]
    fn histograms_partition() {
        let bs = corpus(5);
        let h = booking_histograms(&bs);
        assert_eq!(h.per_weekday.iter().sum::<usize>(), bs.len());
        assert_eq!(h.per_hourgroup.iter().sum::<usize>(), bs.len());
        let mut recount = [0usize; 8];
        for b in &bs {
            recount[local_time(&b.record.accept_ts, 480).hour() as usize / 3] += 1;
        }
        assert_eq!(recount, h.per_hourgroup);
        assert_eq!(booking_histograms(&[]), BookingHistograms::default());
    }

    #[test]
    fn high_speed_query() {
        let mut bs = Vec::new();
        for i in 0..150 {
            let mut fast = booking("d", 1.30, 103.80, if i < 120 { 400.0 } else { 0.0 });
            fast.speed_kmh = 40.0;
            bs.push(fast);
            let mut slow = booking("d", 1.40, 103.90, 400.0);
            slow.speed_kmh = 30.0;
            bs.push(slow);
        }
        let grids = high_speed_late_grids(&bs, 35.0, 100, 7).unwrap();
        assert_eq!(grids.len(), 1);
        assert_eq!((grids[0].bookings, grids[0].late), (150, 120));
        assert_eq!(grids[0].code.len(), 7);
        assert!(high_speed_late_grids(&[], 35.0, 100, 7).unwrap().is_empty());
    }
}
