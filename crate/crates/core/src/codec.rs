//! Grid quantizer mapping glyph images to cue functions and back.
//!
//! The image is split into `grid_rows x grid_cols` cells; the last row and
//! column of cells absorb any remainder pixels. Cell `(r, c)` becomes column
//! `r * grid_cols + c` and its mean intensity is quantized to one of
//! `levels` rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::CueFunction;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlyphImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GlyphImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Plain (P2) portable graymap text.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses a P2 (plain) or P5 (binary) portable graymap, rescaling to 0-255.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::InvalidImage(format!("pgm: {m}"));
        let mut pos = 0;
        let mut token = || -> Option<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let magic = token().ok_or_else(|| bad("missing magic"))?;
        let mut num = |what: &str| -> Result<usize> {
            token()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(&format!("bad {what}")))
        };
        let width = num("width")?;
        let height = num("height")?;
        let maxval = num("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(bad("maxval must be in 1..=255"));
        }
        let scale = |v: usize| -> Result<u8> {
            if v > maxval {
                return Err(bad("sample exceeds maxval"));
            }
            Ok(((v * 255 + maxval / 2) / maxval) as u8)
        };
        let pixels = match magic.as_str() {
            "P2" => (0..width * height)
                .map(|_| num("sample").and_then(scale))
                .collect::<Result<Vec<u8>>>()?,
            "P5" => {
                // exactly one whitespace byte separates the header from the raster
                let start = pos + 1;
                let raster = bytes
                    .get(start..start + width * height)
                    .ok_or_else(|| bad("truncated raster"))?;
                raster
                    .iter()
                    .map(|&b| scale(b as usize))
                    .collect::<Result<Vec<u8>>>()?
            }
            other => return Err(bad(&format!("unsupported magic {other}"))),
        };
        Self::new(width, height, pixels)
    }
}

/// Above this the midpoint intensity of a level can fall into the next bin.
pub const MAX_LEVELS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub levels: usize,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            grid_rows: 8,
            grid_cols: 8,
            levels: 4,
        }
    }
}

impl QuantizerConfig {
    pub fn new(grid_rows: usize, grid_cols: usize, levels: usize) -> Result<Self> {
        let cfg = Self {
            grid_rows,
            grid_cols,
            levels,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid {}x{} is empty",
                self.grid_rows, self.grid_cols
            )));
        }
        if !(2..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::InvalidConfig(format!(
                "levels must be in 2..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        Ok(())
    }

    /// Number of feature columns.
    pub fn n_cols(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    /// Quantization level of a mean intensity `sum / count`.
    pub fn level_of(&self, sum: u64, count: u64) -> usize {
        let level = (sum * self.levels as u64) / (count * 256);
        (level as usize).min(self.levels - 1)
    }

    /// Representative intensity of a level: the bin midpoint, halves rounded down.
    pub fn intensity_of(&self, level: usize) -> u8 {
        let x = (level as f64 + 0.5) * 256.0 / self.levels as f64 - 0.5;
        (x - 0.5).ceil().clamp(0.0, 255.0) as u8
    }
}

/// `[start, end)` bounds of cell `k` out of `cells` along an axis of `len` pixels.
fn cell_span(k: usize, cells: usize, len: usize) -> (usize, usize) {
    let step = len / cells;
    let end = if k + 1 == cells { len } else { (k + 1) * step };
    (k * step, end)
}

fn check_fits(cfg: &QuantizerConfig, width: usize, height: usize) -> Result<()> {
    cfg.validate()?;
    if width < cfg.grid_cols || height < cfg.grid_rows {
        return Err(Error::InvalidImage(format!(
            "{width}x{height} image is smaller than the {}x{} grid",
            cfg.grid_rows, cfg.grid_cols
        )));
    }
    Ok(())
}

pub fn encode(img: &GlyphImage, cfg: &QuantizerConfig) -> Result<CueFunction> {
    check_fits(cfg, img.width, img.height)?;
    let mut rows = Vec::with_capacity(cfg.n_cols());
    for gr in 0..cfg.grid_rows {
        let (y0, y1) = cell_span(gr, cfg.grid_rows, img.height);
        for gc in 0..cfg.grid_cols {
            let (x0, x1) = cell_span(gc, cfg.grid_cols, img.width);
            let sum: u64 = (y0..y1)
                .flat_map(|y| img.pixels[y * img.width + x0..y * img.width + x1].iter())
                .map(|&p| u64::from(p))
                .sum();
            let count = ((y1 - y0) * (x1 - x0)) as u64;
            rows.push(cfg.level_of(sum, count));
        }
    }
    Ok(CueFunction::total(rows))
}

pub fn decode(
    f: &CueFunction,
    cfg: &QuantizerConfig,
    out_width: usize,
    out_height: usize,
) -> Result<GlyphImage> {
    check_fits(cfg, out_width, out_height)?;
    f.check_shape(cfg.n_cols(), cfg.levels)?;
    let undefined = f.undefined_columns();
    if !undefined.is_empty() {
        return Err(Error::PartialFunction(undefined));
    }
    let mut pixels = vec![0u8; out_width * out_height];
    for gr in 0..cfg.grid_rows {
        let (y0, y1) = cell_span(gr, cfg.grid_rows, out_height);
        for gc in 0..cfg.grid_cols {
            let (x0, x1) = cell_span(gc, cfg.grid_cols, out_width);
            let level = f.get(gr * cfg.grid_cols + gc).expect("total function");
            let v = cfg.intensity_of(level);
            for y in y0..y1 {
                pixels[y * out_width + x0..y * out_width + x1].fill(v);
            }
        }
    }
    GlyphImage::new(out_width, out_height, pixels)
}
