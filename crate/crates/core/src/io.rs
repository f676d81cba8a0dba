//! File formats: comma-separated multi-channel tables and binary PGM (P5).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{Image, MultiSignal};

/// A multi-signal read from CSV together with its column names.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub signal: MultiSignal,
}

/// Reads a header row followed by one row per sample; columns are channels.
pub fn read_csv<R: Read>(reader: R, context: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(context, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() {
        return Err(Error::parse(context, "line 1", "missing header row"));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(context, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    context,
                    format!("line {line}, column {}", col + 1),
                    format!("`{field}` is not a number"),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    context,
                    format!("line {line}, column {}", col + 1),
                    "non-finite value",
                ));
            }
            columns[col].push(v);
        }
    }
    let signal = MultiSignal::from_channels(&columns)?;
    Ok(Table { header, signal })
}

fn csv_error(context: &str, e: csv::Error) -> Error {
    let position = e
        .position()
        .map_or_else(|| "unknown position".to_owned(), |p| format!("line {}", p.line()));
    Error::parse(context, position, e.to_string())
}

pub fn read_csv_file(path: &Path) -> Result<Table> {
    let file = fs::File::open(path)?;
    read_csv(file, &path.display().to_string())
}

/// Writes `rows x header.len()` column-major data with a header row.
///
/// Values use Rust's shortest round-trip formatting, so reading the file back
/// gives the same `f64`s.
pub fn write_csv<W: Write>(writer: W, header: &[String], rows: usize, data: &[f64]) -> Result<()> {
    let cols = header.len();
    if data.len() != rows * cols {
        return Err(Error::Shape(format!(
            "{} values do not fill {rows}x{cols}",
            data.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header).map_err(|e| csv_error("csv output", e))?;
    let mut record = Vec::with_capacity(cols);
    for r in 0..rows {
        record.clear();
        record.extend((0..cols).map(|c| data[c * rows + r].to_string()));
        w.write_record(&record).map_err(|e| csv_error("csv output", e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[String], rows: usize, data: &[f64]) -> Result<()> {
    let file = fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), header, rows, data)
}

/// Generic `c0, c1, ...` column names.
pub fn default_header(cols: usize) -> Vec<String> {
    (0..cols).map(|c| format!("c{c}")).collect()
}

/// 8-bit grayscale image as stored in a P5 file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_image(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }

    /// Rounds and clamps to `0..=255`.
    pub fn from_image_clamped(img: &Image) -> Self {
        Self {
            width: img.width,
            height: img.height,
            pixels: img
                .data
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }

    /// Linearly maps `[min, max]` onto `0..=255`; a flat image maps to 0.
    pub fn from_image_rescaled(img: &Image) -> Self {
        let (lo, hi) = img
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        Self {
            width: img.width,
            height: img.height,
            pixels: img
                .data
                .iter()
                .map(|&v| {
                    if span > 0.0 {
                        ((v - lo) / span * 255.0).round() as u8
                    } else {
                        0
                    }
                })
                .collect(),
        }
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    context: &'a str,
}

impl HeaderCursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.context, format!("byte {}", self.pos), msg)
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("{what} out of range")))
    }
}

/// Parses a binary PGM (`P5`) with `maxval <= 255`.
pub fn decode_pgm(bytes: &[u8], context: &str) -> Result<GrayImage> {
    let mut cur = HeaderCursor {
        bytes,
        pos: 0,
        context,
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(cur.err("expected magic `P5`"));
    }
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("unsupported maxval {maxval}")));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(cur.err("expected single whitespace before raster")),
    }
    let need = width * height;
    let raster = &bytes[cur.pos..];
    if raster.len() < need {
        return Err(Error::parse(
            context,
            format!("byte {}", bytes.len()),
            format!("raster truncated: {} of {need} bytes", raster.len()),
        ));
    }
    Ok(GrayImage {
        width,
        height,
        pixels: raster[..need].to_vec(),
    })
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn read_pgm_file(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    decode_pgm(&bytes, &path.display().to_string())
}

pub fn write_pgm_file(path: &Path, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_with_comment() {
        let img = GrayImage {
            width: 3,
            height: 2,
            pixels: vec![0, 10, 20, 30, 40, 255],
        };
        assert_eq!(decode_pgm(&encode_pgm(&img), "mem").unwrap(), img);
        let mut with_comment = b"P5\n# made by hand\n3 2\n255\n".to_vec();
        with_comment.extend_from_slice(&img.pixels);
        assert_eq!(decode_pgm(&with_comment, "mem").unwrap(), img);
    }

    #[test]
    fn pgm_errors_carry_position() {
        let err = decode_pgm(b"P2\n1 1\n255\n0", "a.pgm").unwrap_err();
        assert!(err.to_string().contains("byte 0"), "{err}");
        let err = decode_pgm(b"P5\n4 4\n255\n\x01\x02", "a.pgm").unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        let err = decode_pgm(b"P5\nx 4\n255\n", "a.pgm").unwrap_err();
        assert!(err.to_string().contains("byte 3"), "{err}");
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let data = vec![0.1, -2.5e-7, 3.0, 1.0 / 3.0, 4.0, 5.0, 6.0, 7.0];
        let header = vec!["a".to_owned(), "b".to_owned()];
        let mut buf = Vec::new();
        write_csv(&mut buf, &header, 4, &data).unwrap();
        let table = read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(table.header, header);
        assert_eq!(table.signal.as_slice(), data.as_slice());
    }

    #[test]
    fn csv_parse_error_reports_line() {
        let text = "a,b\n1,2\n3,4\n5,x\n6,7\n";
        let err = read_csv(text.as_bytes(), "in.csv").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4") && msg.contains("column 2"), "{msg}");
        let ragged = "a,b\n1,2\n3\n4,5\n6,7\n";
        assert!(read_csv(ragged.as_bytes(), "in.csv").is_err());
    }

    #[test]
    fn rescale_maps_range() {
        let img = Image::new(3, 1, vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(GrayImage::from_image_rescaled(&img).pixels, vec![0, 128, 255]);
        let clamped = GrayImage::from_image_clamped(&Image::new(2, 1, vec![-4.0, 300.0]).unwrap());
        assert_eq!(clamped.pixels, vec![0, 255]);
    }
}
