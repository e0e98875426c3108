//! PGM (P2 ASCII and P5 binary) reading and P5 writing, maxval 255.

use thiserror::Error;

use crate::orientation::{GrayImage, OrientationError};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a PGM file (magic must be P2 or P5)")]
    BadMagic,
    #[error("malformed header")]
    BadHeader,
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated")]
    Truncated,
    #[error("invalid pixel value")]
    BadPixel,
    #[error(transparent)]
    Image(#[from] OrientationError),
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            let b = self.buf[self.pos];
            if b == b'#' {
                while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
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
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.buf.len() && !self.buf[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.buf[start..self.pos])
    }

    fn number(&mut self) -> Option<u32> {
        std::str::from_utf8(self.token()?).ok()?.parse().ok()
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let binary = match cur.token() {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(PgmError::BadMagic),
    };
    let width = cur.number().ok_or(PgmError::BadHeader)? as usize;
    let height = cur.number().ok_or(PgmError::BadHeader)? as usize;
    let maxval = cur.number().ok_or(PgmError::BadHeader)?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let n = width * height;
    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let end = start + n;
        if end > bytes.len() {
            return Err(PgmError::Truncated);
        }
        bytes[start..end].to_vec()
    } else {
        let mut px = Vec::with_capacity(n);
        for _ in 0..n {
            let v = cur.number().ok_or(PgmError::Truncated)?;
            px.push(u8::try_from(v).map_err(|_| PgmError::BadPixel)?);
        }
        px
    };
    Ok(GrayImage::new(width, height, pixels)?)
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}
