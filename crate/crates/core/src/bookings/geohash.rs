//! Base-32 geohash cells: interleaved longitude/latitude bisection, longitude first.

use std::fmt;

use crate::error::{Error, Result};

pub const ALPHABET: &[u8; 32] = b"0123456789bcdefghjkmnpqrstuvwxyz";
pub const MAX_PRECISION: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeoCell {
    code: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl GeoBox {
    pub fn center(&self) -> (f64, f64) {
        (
            (self.lat_min + self.lat_max) / 2.0,
            (self.lon_min + self.lon_max) / 2.0,
        )
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }

    pub fn contains_box(&self, other: &GeoBox) -> bool {
        self.lat_min <= other.lat_min
            && other.lat_max <= self.lat_max
            && self.lon_min <= other.lon_min
            && other.lon_max <= self.lon_max
    }

    /// Width and height in kilometres on a sphere, measured at the box centre.
    pub fn size_km(&self) -> (f64, f64) {
        let (lat, _) = self.center();
        let km_per_deg = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
        let width = (self.lon_max - self.lon_min) * km_per_deg * lat.to_radians().cos();
        let height = (self.lat_max - self.lat_min) * km_per_deg;
        (width, height)
    }
}

pub const EARTH_RADIUS_KM: f64 = 6371.0088;

fn char_value(c: char) -> Option<u8> {
    let b = u8::try_from(c).ok()?;
    ALPHABET.iter().position(|&a| a == b).map(|p| p as u8)
}

impl GeoCell {
    /// Validates the characters of an existing code.
    pub fn parse(code: &str) -> Result<Self> {
        if code.is_empty() || code.len() > MAX_PRECISION {
            return Err(Error::param(
                "geohash length",
                code.len(),
                format!("1..={MAX_PRECISION}"),
            ));
        }
        if let Some(bad) = code.chars().find(|&c| char_value(c).is_none()) {
            return Err(Error::GeohashChar(bad));
        }
        Ok(GeoCell {
            code: code.to_owned(),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.code
    }

    pub fn precision(&self) -> usize {
        self.code.len()
    }

    pub fn bounds(&self) -> GeoBox {
        decode_valid(&self.code)
    }

    pub fn into_string(self) -> String {
        self.code
    }
}

impl fmt::Display for GeoCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

pub fn validate_coordinates(lat: f64, lon: f64) -> Result<()> {
    if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
        Ok(())
    } else {
        Err(Error::Coordinates { lat, lon })
    }
}

pub fn geohash_encode(lat: f64, lon: f64, precision: usize) -> Result<GeoCell> {
    if !(1..=MAX_PRECISION).contains(&precision) {
        return Err(Error::param(
            "precision",
            precision,
            format!("1..={MAX_PRECISION}"),
        ));
    }
    validate_coordinates(lat, lon)?;
    let (mut lat_lo, mut lat_hi) = (-90.0f64, 90.0f64);
    let (mut lon_lo, mut lon_hi) = (-180.0f64, 180.0f64);
    let mut code = String::with_capacity(precision);
    let mut even = true;
    for _ in 0..precision {
        let mut idx = 0u8;
        for _ in 0..5 {
            idx <<= 1;
            let (v, lo, hi) = if even {
                (lon, &mut lon_lo, &mut lon_hi)
            } else {
                (lat, &mut lat_lo, &mut lat_hi)
            };
            let mid = (*lo + *hi) / 2.0;
            if v >= mid {
                idx |= 1;
                *lo = mid;
            } else {
                *hi = mid;
            }
            even = !even;
        }
        code.push(ALPHABET[idx as usize] as char);
    }
    Ok(GeoCell { code })
}

/// Exact bounding box of a code.
pub fn geohash_decode(code: &str) -> Result<GeoBox> {
    Ok(GeoCell::parse(code)?.bounds())
}

fn decode_valid(code: &str) -> GeoBox {
    let (mut lat_lo, mut lat_hi) = (-90.0f64, 90.0f64);
    let (mut lon_lo, mut lon_hi) = (-180.0f64, 180.0f64);
    let mut even = true;
    for c in code.chars() {
        let v = char_value(c).expect("validated geohash");
        for shift in (0..5).rev() {
            let bit = (v >> shift) & 1 == 1;
            let (lo, hi) = if even {
                (&mut lon_lo, &mut lon_hi)
            } else {
                (&mut lat_lo, &mut lat_hi)
            };
            let mid = (*lo + *hi) / 2.0;
            if bit {
                *lo = mid;
            } else {
                *hi = mid;
            }
            even = !even;
        }
    }
    GeoBox {
        lat_min: lat_lo,
        lat_max: lat_hi,
        lon_min: lon_lo,
        lon_max: lon_hi,
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().asin()
}
