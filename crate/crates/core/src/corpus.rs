//! Labelled glyph corpora: the `GLY1` text format, directories of PGM files,
//! and a generator for synthetic handwritten-style digits.
//!
//! `GLY1` layout:
//!
//! ```text
//! GLY1 <width> <height> <count>
//! <label>
//! <height lines of width space-separated integers 0-255>
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codec::GlyphImage;
use crate::error::{Error, Result};

pub type Record = (String, GlyphImage);

pub fn parse_corpus(text: &str) -> Result<Vec<Record>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(header) = lines.next() else {
        return Ok(Vec::new());
    };
    let header_err = |reason: String| Error::Format(format!("corpus header: {reason}"));
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "GLY1" {
        return Err(header_err(format!("expected `GLY1 <width> <height> <count>`, got {header:?}")));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| header_err(format!("bad {what} {s:?}")))
    };
    let width = parse(fields[1], "width")?;
    let height = parse(fields[2], "height")?;
    let count = parse(fields[3], "count")?;

    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let bad = |reason: String| Error::MalformedRecord { index, reason };
        let label = lines
            .next()
            .ok_or_else(|| bad("missing label line".into()))?
            .trim();
        if label.split_whitespace().count() != 1 {
            return Err(bad(format!("label {label:?} must be a single token")));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing pixel row {y}")))?;
            let before = pixels.len();
            for tok in line.split_whitespace() {
                let v: u8 = tok
                    .parse()
                    .map_err(|_| bad(format!("row {y}: bad intensity {tok:?}")))?;
                pixels.push(v);
            }
            if pixels.len() - before != width {
                return Err(bad(format!(
                    "row {y} has {} values, expected {width}",
                    pixels.len() - before
                )));
            }
        }
        let img = GlyphImage::new(width, height, pixels).map_err(|e| bad(e.to_string()))?;
        out.push((label.to_owned(), img));
    }
    if let Some(extra) = lines.next() {
        return Err(Error::MalformedRecord {
            index: count,
            reason: format!("header declares {count} records but more follow: {extra:?}"),
        });
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// Serialises records that share one image size.
pub fn format_corpus(records: &[Record]) -> Result<String> {
    let (w, h) = records
        .first()
        .map(|(_, img)| (img.width(), img.height()))
        .unwrap_or((1, 1));
    let mut out = format!("GLY1 {w} {h} {}\n", records.len());
    for (index, (label, img)) in records.iter().enumerate() {
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::MalformedRecord {
                index,
                reason: format!("image is {}x{}, corpus is {w}x{h}", img.width(), img.height()),
            });
        }
        if label.is_empty() || label.split_whitespace().count() != 1 {
            return Err(Error::MalformedRecord {
                index,
                reason: format!("label {label:?} must be a single token"),
            });
        }
        out.push_str(label);
        out.push('\n');
        for row in img.pixels().chunks(w) {
            for (k, p) in row.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                write!(out, "{p}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[Record]) -> Result<()> {
    std::fs::write(path, format_corpus(records)?)?;
    Ok(())
}

/// Loads `<dir>/<label>/*.pgm`, labels from the enclosing directory name.
/// Directories and files are visited in byte order of their names.
pub fn load_pgm_dir(dir: impl AsRef<Path>) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let mut classes: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .collect();
    classes.sort_by_key(|e| e.file_name());
    for class in classes {
        let label = class.file_name().to_string_lossy().into_owned();
        let mut files: Vec<_> = std::fs::read_dir(class.path())?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| {
                p.extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("pgm"))
            })
            .collect();
        files.sort();
        for path in files {
            let img = GlyphImage::from_pgm(&std::fs::read(&path)?).map_err(|e| Error::MalformedRecord {
                index: out.len(),
                reason: format!("{}: {e}", path.display()),
            })?;
            out.push((label.clone(), img));
        }
    }
    Ok(out)
}

/// Reads a corpus from a `GLY1` file, a single PGM file, or a directory of
/// per-label PGM subdirectories.
pub fn load_any(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    let path = path.as_ref();
    if path.is_dir() {
        return load_pgm_dir(path);
    }
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        let label = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(vec![(label, GlyphImage::from_pgm(&bytes)?)]);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Format("corpus is not UTF-8".into()))?;
    parse_corpus(&text)
}

/// Parameters of the synthetic digit generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub per_class: usize,
    /// Overall distortion strength; 0 renders every instance identically.
    pub noise: f64,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            per_class: 200,
            noise: 0.8,
            seed: 7,
            width: 32,
            height: 32,
        }
    }
}

type Stroke = &'static [(f64, f64)];

fn strokes(digit: usize) -> &'static [Stroke] {
    const ZERO: &[Stroke] = &[&[
        (0.5, 0.1), (0.72, 0.2), (0.78, 0.5), (0.72, 0.8), (0.5, 0.9),
        (0.28, 0.8), (0.22, 0.5), (0.28, 0.2), (0.5, 0.1),
    ]];
    const ONE: &[Stroke] = &[&[(0.35, 0.25), (0.55, 0.1), (0.55, 0.9)]];
    const TWO: &[Stroke] = &[&[
        (0.25, 0.28), (0.38, 0.12), (0.62, 0.12), (0.75, 0.28), (0.7, 0.45),
        (0.25, 0.9), (0.78, 0.9),
    ]];
    const THREE: &[Stroke] = &[&[
        (0.25, 0.15), (0.72, 0.15), (0.48, 0.45), (0.72, 0.6), (0.72, 0.8),
        (0.55, 0.9), (0.25, 0.85),
    ]];
    const FOUR: &[Stroke] = &[&[(0.65, 0.9), (0.65, 0.1), (0.2, 0.65), (0.8, 0.65)]];
    const FIVE: &[Stroke] = &[&[
        (0.75, 0.1), (0.32, 0.1), (0.28, 0.45), (0.6, 0.42), (0.75, 0.6),
        (0.7, 0.82), (0.5, 0.9), (0.25, 0.85),
    ]];
    const SIX: &[Stroke] = &[&[
        (0.7, 0.12), (0.45, 0.18), (0.28, 0.45), (0.27, 0.75), (0.45, 0.9),
        (0.68, 0.82), (0.72, 0.62), (0.52, 0.5), (0.28, 0.6),
    ]];
    const SEVEN: &[Stroke] = &[&[(0.2, 0.1), (0.8, 0.1), (0.42, 0.9)]];
    const EIGHT: &[Stroke] = &[
        &[
            (0.5, 0.1), (0.68, 0.18), (0.68, 0.38), (0.5, 0.47), (0.32, 0.38),
            (0.32, 0.18), (0.5, 0.1),
        ],
        &[
            (0.5, 0.47), (0.72, 0.58), (0.72, 0.8), (0.5, 0.9), (0.28, 0.8),
            (0.28, 0.58), (0.5, 0.47),
        ],
    ];
    const NINE: &[Stroke] = &[&[
        (0.72, 0.38), (0.5, 0.5), (0.3, 0.4), (0.3, 0.2), (0.5, 0.1),
        (0.7, 0.2), (0.72, 0.38), (0.6, 0.9),
    ]];
    const ALL: [&[Stroke]; 10] = [ZERO, ONE, TWO, THREE, FOUR, FIVE, SIX, SEVEN, EIGHT, NINE];
    ALL[digit]
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Renders one distorted instance of `digit` (0-9).
pub fn render_digit(digit: usize, cfg: &SynthConfig, rng: &mut impl Rng) -> GlyphImage {
    let n = cfg.noise.max(0.0);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let size = w.min(h) * 0.8;
    let gauss = |rng: &mut dyn rand::RngCore, sd: f64| -> f64 {
        if sd == 0.0 {
            0.0
        } else {
            Normal::new(0.0, sd).expect("finite sd").sample(rng)
        }
    };
    let scale = 1.0 + gauss(rng, 0.08 * n);
    let aspect = 1.0 + gauss(rng, 0.08 * n);
    let shear = gauss(rng, 0.15 * n);
    let angle = gauss(rng, 0.12 * n);
    let shift = (gauss(rng, 1.2 * n), gauss(rng, 1.2 * n));
    let thickness = (1.6 + gauss(rng, 0.4 * n)).max(0.6);
    let (sin, cos) = angle.sin_cos();

    let place = |(x, y): (f64, f64)| -> (f64, f64) {
        let (x, y) = ((x - 0.5) * scale * aspect, (y - 0.5) * scale);
        let x = x + shear * y;
        let (x, y) = (cos * x - sin * y, sin * x + cos * y);
        (w / 2.0 + x * size + shift.0, h / 2.0 + y * size + shift.1)
    };
    let segments: Vec<((f64, f64), (f64, f64))> = strokes(digit)
        .iter()
        .flat_map(|s| s.windows(2).map(|p| (place(p[0]), place(p[1]))))
        .collect();

    let pixel_sd = 25.0 * n;
    let mut pixels = Vec::with_capacity(cfg.width * cfg.height);
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let d = segments
                .iter()
                .map(|&(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min);
            let ink = (thickness + 0.5 - d).clamp(0.0, 1.0) * 255.0;
            let v = ink + gauss(rng, pixel_sd);
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GlyphImage::new(cfg.width, cfg.height, pixels).expect("non-empty canvas")
}

/// Ten digit classes, `per_class` instances each, interleaved by class
/// (`0,1,...,9,0,1,...`). Record `k` draws from ChaCha8 stream `k` of the
/// seed, so the corpus does not depend on generation order.
pub fn synthetic_digits(cfg: &SynthConfig) -> Vec<Record> {
    let gen = |k: usize| -> Record {
        let digit = k % 10;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        (digit.to_string(), render_digit(digit, cfg, &mut rng))
    };
    let total = cfg.per_class * 10;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..total).into_par_iter().map(gen).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..total).map(gen).collect()
    }
}
