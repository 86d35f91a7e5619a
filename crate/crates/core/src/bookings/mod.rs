//! Booking records: strict CSV ingestion, plausibility filtering, geohash
//! indexing, local-time bucketing and a synthetic corpus generator.

pub mod geohash;
pub mod synth;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDateTime, Timelike, Utc, Weekday};

use crate::error::{Error, Result};
use crate::io::format_value;

pub use geohash::{geohash_decode, geohash_encode, haversine_km, GeoBox, GeoCell};
pub use synth::{gen_synthetic_bookings, BookingsConfig, PlantedTruth, SyntheticCorpus};

pub const BOOKINGS_HEADER: [&str; 13] = [
    "booking_id",
    "driver_id",
    "accept_ts",
    "driver_lat",
    "driver_lon",
    "pickup_lat",
    "pickup_lon",
    "pickup_ts",
    "eta_s",
    "ata_s",
    "start_ata_s",
    "end_ata_s",
    "dist_km",
];

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";
pub const DEFAULT_TZ_OFFSET_MIN: i32 = 480;
pub const MAX_SPEED_KMH: f64 = 110.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BookingRecord {
    pub booking_id: String,
    pub driver_id: String,
    pub accept_ts: DateTime<Utc>,
    pub driver_lat: f64,
    pub driver_lon: f64,
    pub pickup_lat: f64,
    pub pickup_lon: f64,
    pub pickup_ts: DateTime<Utc>,
    pub eta_s: f64,
    pub ata_s: f64,
    /// Seconds to cover the first 50 m after accepting.
    pub start_ata_s: f64,
    /// Seconds to cover the last 50 m before the pickup point.
    pub end_ata_s: f64,
    pub dist_km: f64,
}

impl BookingRecord {
    /// Implied travel speed; infinite or NaN when the ETA is not positive.
    pub fn speed_kmh(&self) -> f64 {
        self.dist_km / (self.eta_s / 3600.0)
    }
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .ok()
        .map(|t| t.and_utc())
}

fn parse_error(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        message,
    }
}

pub fn read_bookings(path: &Path) -> Result<Vec<BookingRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_bookings(file, path)
}

/// Parses bookings CSV; the header must match [`BOOKINGS_HEADER`] exactly.
pub fn parse_bookings<R: Read>(reader: R, path: &Path) -> Result<Vec<BookingRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.iter().ne(BOOKINGS_HEADER.iter().copied()) {
        return Err(parse_error(
            path,
            1,
            format!(
                "header must be `{}`, found `{}`",
                BOOKINGS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != BOOKINGS_HEADER.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {}", BOOKINGS_HEADER.len(), rec.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|_| {
                parse_error(path, line, format!("{}: not a number: {:?}", BOOKINGS_HEADER[i], &rec[i]))
            })
        };
        let ts = |i: usize| -> Result<DateTime<Utc>> {
            parse_timestamp(rec[i].trim()).ok_or_else(|| {
                parse_error(
                    path,
                    line,
                    format!("{}: expected YYYY-MM-DDThh:mm:ssZ, found {:?}", BOOKINGS_HEADER[i], &rec[i]),
                )
            })
        };
        out.push(BookingRecord {
            booking_id: rec[0].to_owned(),
            driver_id: rec[1].to_owned(),
            accept_ts: ts(2)?,
            driver_lat: num(3)?,
            driver_lon: num(4)?,
            pickup_lat: num(5)?,
            pickup_lon: num(6)?,
            pickup_ts: ts(7)?,
            eta_s: num(8)?,
            ata_s: num(9)?,
            start_ata_s: num(10)?,
            end_ata_s: num(11)?,
            dist_km: num(12)?,
        });
    }
    Ok(out)
}

pub fn write_bookings(path: &Path, records: &[BookingRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(BOOKINGS_HEADER).map_err(|e| Error::csv(path, e))?;
    let mut fields: Vec<String> = vec![String::new(); BOOKINGS_HEADER.len()];
    for r in records {
        let nums = [
            (3, r.driver_lat),
            (4, r.driver_lon),
            (5, r.pickup_lat),
            (6, r.pickup_lon),
            (8, r.eta_s),
            (9, r.ata_s),
            (10, r.start_ata_s),
            (11, r.end_ata_s),
            (12, r.dist_km),
        ];
        fields[0].clone_from(&r.booking_id);
        fields[1].clone_from(&r.driver_id);
        fields[2] = format_timestamp(&r.accept_ts);
        fields[7] = format_timestamp(&r.pickup_ts);
        for (i, v) in nums {
            fields[i].clear();
            format_value(v, &mut fields[i]);
        }
        w.write_record(&fields).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    NonFinite,
    NonpositiveEta,
    NegativeAta,
    InvalidCoordinates,
    PickupBeforeAccept,
    SpeedOutOfRange,
}

impl RejectReason {
    pub const ALL: [RejectReason; 6] = [
        RejectReason::NonFinite,
        RejectReason::NonpositiveEta,
        RejectReason::NegativeAta,
        RejectReason::InvalidCoordinates,
        RejectReason::PickupBeforeAccept,
        RejectReason::SpeedOutOfRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NonFinite => "non-finite value",
            RejectReason::NonpositiveEta => "nonpositive ETA",
            RejectReason::NegativeAta => "negative ATA",
            RejectReason::InvalidCoordinates => "invalid coordinates",
            RejectReason::PickupBeforeAccept => "pickup before accept",
            RejectReason::SpeedOutOfRange => "speed out of range",
        }
    }
}

/// The first rule a record violates, if any.
pub fn check_record(r: &BookingRecord) -> Option<RejectReason> {
    let values = [
        r.driver_lat,
        r.driver_lon,
        r.pickup_lat,
        r.pickup_lon,
        r.eta_s,
        r.ata_s,
        r.start_ata_s,
        r.end_ata_s,
        r.dist_km,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Some(RejectReason::NonFinite);
    }
    if r.eta_s <= 0.0 {
        return Some(RejectReason::NonpositiveEta);
    }
    if r.ata_s < 0.0 {
        return Some(RejectReason::NegativeAta);
    }
    let valid = |lat: f64, lon: f64| geohash::validate_coordinates(lat, lon).is_ok();
    if !valid(r.driver_lat, r.driver_lon) || !valid(r.pickup_lat, r.pickup_lon) {
        return Some(RejectReason::InvalidCoordinates);
    }
    if r.pickup_ts < r.accept_ts {
        return Some(RejectReason::PickupBeforeAccept);
    }
    let speed = r.speed_kmh();
    if !(0.0..=MAX_SPEED_KMH).contains(&speed) {
        return Some(RejectReason::SpeedOutOfRange);
    }
    None
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RejectionReport {
    pub input: usize,
    pub kept: usize,
    /// Counts in [`RejectReason::ALL`] order.
    pub counts: [usize; 6],
}

impl RejectionReport {
    pub fn rejected(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, reason: RejectReason) -> usize {
        self.counts[reason as usize]
    }

    /// `reason,count` with every reason listed, zeros included.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("reason,count\n");
        for reason in RejectReason::ALL {
            let _ = writeln!(s, "{},{}", reason.as_str(), self.count(reason));
        }
        s
    }
}

/// Keeps records that pass [`check_record`], in input order.
pub fn preprocess(records: Vec<BookingRecord>) -> (Vec<BookingRecord>, RejectionReport) {
    let mut report = RejectionReport {
        input: records.len(),
        ..Default::default()
    };
    let kept: Vec<BookingRecord> = records
        .into_iter()
        .filter(|r| match check_record(r) {
            Some(reason) => {
                report.counts[reason as usize] += 1;
                false
            }
            None => true,
        })
        .collect();
    report.kept = kept.len();
    (kept, report)
}

pub fn write_report(path: &Path, report: &RejectionReport) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(report.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DowClass {
    Weekday,
    Weekend,
}

impl DowClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DowClass::Weekday => "weekday",
            DowClass::Weekend => "weekend",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "weekday" => Some(DowClass::Weekday),
            "weekend" => Some(DowClass::Weekend),
            _ => None,
        }
    }

    pub fn of(day: Weekday) -> Self {
        match day {
            Weekday::Sat | Weekday::Sun => DowClass::Weekend,
            _ => DowClass::Weekday,
        }
    }
}

pub fn local_time(ts: &DateTime<Utc>, tz_offset_min: i32) -> NaiveDateTime {
    ts.naive_utc() + Duration::minutes(i64::from(tz_offset_min))
}

/// Three-hour bucket of the local hour, 0..=7.
pub fn hourgroup(ts: &DateTime<Utc>, tz_offset_min: i32) -> u8 {
    (local_time(ts, tz_offset_min).hour() / 3) as u8
}

pub fn local_weekday(ts: &DateTime<Utc>, tz_offset_min: i32) -> Weekday {
    local_time(ts, tz_offset_min).weekday()
}

pub fn dow_class(ts: &DateTime<Utc>, tz_offset_min: i32) -> DowClass {
    DowClass::of(local_weekday(ts, tz_offset_min))
}
