//! Raster renderings of matrices and binary netpbm (PGM/PPM) output.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{MatrixKind, RectRelationalMatrix, SENTINEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub channels: Channels,
    /// Row-major samples, `channels` per pixel.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let c = self.channels.count();
        let at = (y * self.width + x) * c;
        &self.pixels[at..at + c]
    }

    /// Repeats every pixel `factor` times in both directions.
    pub fn upscale(&self, factor: usize) -> RasterImage {
        if factor <= 1 {
            return self.clone();
        }
        let c = self.channels.count();
        let width = self.width * factor;
        let mut pixels = Vec::with_capacity(self.pixels.len() * factor * factor);
        for y in 0..self.height {
            let mut line = Vec::with_capacity(width * c);
            for x in 0..self.width {
                let px = self.pixel(x, y);
                for _ in 0..factor {
                    line.extend_from_slice(px);
                }
            }
            for _ in 0..factor {
                pixels.extend_from_slice(&line);
            }
        }
        RasterImage {
            width,
            height: self.height * factor,
            channels: self.channels,
            pixels,
        }
    }

    /// Binary netpbm encoding: `P5` for gray, `P6` for RGB, maxval 255.
    pub fn to_netpbm(&self) -> Vec<u8> {
        let magic = match self.channels {
            Channels::Gray => "P5",
            Channels::Rgb => "P6",
        };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_netpbm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_netpbm()).map_err(|e| Error::io(path, e))
    }
}

/// Linear gray scale: smallest entry black, largest white. A constant matrix
/// renders all black.
pub fn render_grayscale(rows: usize, cols: usize, values: &[f64]) -> RasterImage {
    assert_eq!(values.len(), rows * cols);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let pixels = values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    RasterImage {
        width: cols,
        height: rows,
        channels: Channels::Gray,
        pixels,
    }
}

pub fn render_matrix_grayscale(m: &RectRelationalMatrix) -> RasterImage {
    render_grayscale(m.rows(), m.cols(), m.values())
}

pub const NO_BOOKINGS_RGB: [u8; 3] = [0, 0, 255];

/// Green (0) through yellow (0.5) to red (1), linear on each half.
pub fn performance_color(v: f64) -> [u8; 3] {
    if v <= 0.5 {
        [(510.0 * v).round() as u8, 255, 0]
    } else {
        [255, (255.0 - 510.0 * (v - 0.5)).round() as u8, 0]
    }
}

/// Colour rendering of a late-pickup-rate matrix; sentinel cells are blue.
pub fn render_performance(m: &RectRelationalMatrix) -> Result<RasterImage> {
    let mut pixels = Vec::with_capacity(m.values().len() * 3);
    for (p, &v) in m.values().iter().enumerate() {
        let rgb = if v == SENTINEL {
            NO_BOOKINGS_RGB
        } else if (0.0..=1.0).contains(&v) {
            performance_color(v)
        } else {
            return Err(Error::OutOfRange {
                row: p / m.cols().max(1),
                col: p % m.cols().max(1),
                value: v,
            });
        };
        pixels.extend_from_slice(&rgb);
    }
    Ok(RasterImage {
        width: m.cols(),
        height: m.rows(),
        channels: Channels::Rgb,
        pixels,
    })
}

/// Colour for performance matrices, gray scale otherwise.
pub fn render_auto(m: &RectRelationalMatrix) -> Result<RasterImage> {
    match m.kind() {
        MatrixKind::Performance => render_performance(m),
        MatrixKind::Generic => Ok(render_matrix_grayscale(m)),
    }
}
