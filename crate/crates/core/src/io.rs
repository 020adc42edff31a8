//! PGM (P2/P5) images and CSV tables.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::operator::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// ASCII raster.
    P2,
    /// Binary raster.
    P5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PgmHeader {
    pub format: PgmFormat,
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        let tok = self.token().ok_or_else(|| self.error(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or(Error::Parse { offset: start, message: format!("invalid {what} `{}`", String::from_utf8_lossy(tok)) })
    }
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<PgmHeader> {
    let format = match cur.bytes.get(..2) {
        Some(b"P2") => PgmFormat::P2,
        Some(b"P5") => PgmFormat::P5,
        _ => return Err(cur.error("expected magic number P2 or P5")),
    };
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = {
        cur.skip_separators();
        cur.pos
    };
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse { offset: maxval_at, message: format!("empty image {width}x{height}") });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse { offset: maxval_at, message: format!("maxval {maxval} outside [1, 65535]") });
    }
    Ok(PgmHeader { format, width: width as usize, height: height as usize, maxval: maxval as u32 })
}

/// Decodes a P2 or P5 file. Samples are divided by maxval.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let mut cur = Cursor { bytes, pos: 0 };
    let header = parse_header(&mut cur)?;
    let count = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| cur.error("image dimensions overflow"))?;
    let maxval = header.maxval as f64;
    let mut raw = Vec::with_capacity(count);
    match header.format {
        PgmFormat::P2 => {
            for i in 0..count {
                cur.skip_separators();
                if cur.pos >= bytes.len() {
                    return Err(cur.error(format!("raster truncated after {i} of {count} samples")));
                }
                let start = cur.pos;
                let v = cur.number("sample")?;
                if v > header.maxval as u64 {
                    return Err(Error::Parse { offset: start, message: format!("sample {v} exceeds maxval") });
                }
                raw.push(v as f64 / maxval);
            }
        }
        PgmFormat::P5 => {
            // exactly one whitespace byte separates maxval from the raster
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(cur.error("expected a single whitespace before the raster")),
            }
            let wide = header.maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            let raster = bytes.get(cur.pos..cur.pos + need).ok_or_else(|| {
                Error::Parse {
                    offset: bytes.len(),
                    message: format!("raster truncated: need {need} bytes, have {}", bytes.len() - cur.pos),
                }
            })?;
            for (i, chunk) in raster.chunks(if wide { 2 } else { 1 }).enumerate() {
                let v = if wide { u16::from_be_bytes([chunk[0], chunk[1]]) as u32 } else { chunk[0] as u32 };
                if v > header.maxval {
                    let offset = cur.pos + i * chunk.len();
                    return Err(Error::Parse { offset, message: format!("sample {v} exceeds maxval") });
                }
                raw.push(v as f64 / maxval);
            }
        }
    }
    Image::new(header.height, header.width, raw)
}

/// Pixel quantized to 8 bits: `round(p · 255)` clamped to `[0, 255]`.
pub fn quantize(p: f64) -> u8 {
    (p * 255.0).round().clamp(0.0, 255.0) as u8
}

/// The image as it reads back from an 8-bit file.
pub fn quantize_image(img: &Image) -> Result<Image> {
    Image::new(img.height(), img.width(), img.pixels().iter().map(|&p| quantize(p) as f64 / 255.0).collect())
}

/// Encodes an 8-bit (maxval 255) PGM.
pub fn encode_pgm(img: &Image, format: PgmFormat) -> Result<Vec<u8>> {
    if img.mask().is_some() {
        return Err(Error::arg("cannot save a masked image"));
    }
    let (w, h) = (img.width(), img.height());
    let bytes: Vec<u8> = img.pixels().iter().map(|&p| quantize(p)).collect();
    Ok(match format {
        PgmFormat::P5 => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&bytes);
            out
        }
        PgmFormat::P2 => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in bytes.chunks(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    })
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pgm(&fs::read(path)?)
}

pub fn save_pgm(img: &Image, path: impl AsRef<Path>, format: PgmFormat) -> Result<()> {
    fs::write(path, encode_pgm(img, format)?)?;
    Ok(())
}

/// `%g`-style formatting with 6 significant digits; `inf` for +∞.
pub fn format_number(v: f64) -> String {
    const SIG: i32 = 6;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Serializes a numeric table as CSV text with a header row.
pub fn table_to_bytes(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::arg(format!("row {i} has {} fields, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_table(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, table_to_bytes(header, rows)?)?;
    Ok(())
}

/// Writes grid samples as `x1,…,xr,value` rows.
pub fn save_grid_csv(g: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let names: Vec<String> = (1..=g.dim()).map(|a| format!("x{a}")).chain(["value".to_string()]).collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut point = vec![0.0; g.dim()];
    let rows: Vec<Vec<f64>> = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            g.point_of(i, &mut point);
            point.iter().copied().chain([v]).collect()
        })
        .collect();
    write_table(path, &header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::BoxDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimal_p2() {
        let img = decode_pgm(b"P2 1 1 255 128").unwrap();
        assert_eq!((img.height(), img.width()), (1, 1));
        assert!((img.pixels()[0] - 128.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn comments_and_layout() {
        let img = decode_pgm(b"P2\n# made by hand\n3 2 # w h\n10\n0 5 10\n10 5 0\n").unwrap();
        assert_eq!((img.height(), img.width()), (2, 3));
        assert_eq!(img.pixels(), &[0.0, 0.5, 1.0, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn p2_p5_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = Image::from_fn(5, 7, |_, _| rng.random_range(0..=255) as f64 / 255.0).unwrap();
        let a = decode_pgm(&encode_pgm(&img, PgmFormat::P2).unwrap()).unwrap();
        let b = decode_pgm(&encode_pgm(&img, PgmFormat::P5).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, img);
    }

    #[test]
    fn sixteen_bit_read() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0xFF, 0xFF, 0x80, 0x00]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.pixels()[0], 1.0);
        assert!((img.pixels()[1] - 32768.0 / 65535.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_name_offsets() {
        let cases: [(&[u8], usize); 6] = [
            (b"P3 1 1 255 0", 0),
            (b"P2 1 1 0 0", 7),
            (b"P2 2 2 255 1 2 3", 16),
            (b"P2 x 1 255 0", 3),
            (b"P2 1 1 255 300", 11),
            (b"P5 2 2 255\n\x01\x02", 13),
        ];
        for (bytes, offset) in cases {
            match decode_pgm(bytes) {
                Err(Error::Parse { offset: o, .. }) => assert_eq!(o, offset, "{}", String::from_utf8_lossy(bytes)),
                other => panic!("expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn quantization_and_roundtrip() {
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.0), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let img = Image::from_fn(4, 6, |_, _| rng.random::<f64>()).unwrap();
            let once = decode_pgm(&encode_pgm(&img, PgmFormat::P5).unwrap()).unwrap();
            for (a, b) in img.pixels().iter().zip(once.pixels()) {
                assert!((a - b).abs() <= 1.0 / 510.0 + 1e-15);
            }
            let twice = decode_pgm(&encode_pgm(&once, PgmFormat::P5).unwrap()).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn quantized_image_matches_saved_file() {
        let img = Image::from_fn(3, 4, |r, c| (r * 4 + c) as f64 / 11.3).unwrap();
        let q = quantize_image(&img).unwrap();
        assert_eq!(q, decode_pgm(&encode_pgm(&img, PgmFormat::P5).unwrap()).unwrap());
        assert_eq!(quantize_image(&q).unwrap(), q);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let img = Image::from_fn(3, 3, |r, c| ((r + c) * 30) as f64 / 255.0).unwrap();
        save_pgm(&img, &path, PgmFormat::P2).unwrap();
        assert_eq!(load_pgm(&path).unwrap(), img);
        assert!(matches!(load_pgm(dir.path().join("missing.pgm")), Err(Error::Io(_))));
        assert!(save_pgm(&img, dir.path().join("no/such/dir.pgm"), PgmFormat::P5).is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.66529), "0.66529");
        assert_eq!(format_number(10.0), "10");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1234567.0), "1.23457e+06");
        assert_eq!(format_number(0.0000123456), "1.23456e-05");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(0.999_999_7), "1");
        assert_eq!(format_number(123456.4), "123456");
    }

    #[test]
    fn tables() {
        assert_eq!(table_to_bytes(&["n", "sup"], &[]).unwrap(), b"n,sup\n");
        assert_eq!(table_to_bytes(&["n", "sup"], &[vec![10.0, 0.66529]]).unwrap(), b"n,sup\n10,0.66529\n");
        assert_eq!(
            table_to_bytes(&["mse", "psnr_db"], &[vec![0.0, f64::INFINITY]]).unwrap(),
            b"mse,psnr_db\n0,inf\n"
        );
        assert!(table_to_bytes(&["a"], &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn grid_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = GridFunction::from_fn(BoxDomain::unit(2), vec![2, 2], |p| p[0] + 2.0 * p[1]).unwrap();
        save_grid_csv(&g, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x1,x2,value\n0,0,0\n1,0,1\n0,1,2\n1,1,3\n");
    }
}
