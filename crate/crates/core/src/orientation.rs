//! Block orientation field, certainty map, core detection and the 256-cell
//! feature vector used by the coarse classifier.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::CorePoint;
use crate::par::Execution;

/// Side of one orientation block, in pixels.
pub const BLOCK_SIZE: usize = 16;
/// Side of the feature window, in blocks.
pub const WINDOW: usize = 16;
/// Length of a feature vector.
pub const FEATURE_LEN: usize = WINDOW * WINDOW;
/// Default certainty threshold for segmentation.
pub const DEFAULT_TAU_SEG: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrientationError {
    #[error("image is {width}x{height}, need at least {BLOCK_SIZE}x{BLOCK_SIZE}")]
    ImageTooSmall { width: usize, height: usize },
    #[error("pixel buffer has {got} bytes, expected {expected}")]
    BadBuffer { got: usize, expected: usize },
    #[error("no 2x2 foreground block window to search for a core")]
    NoForeground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerprintClass {
    Arch,
    TentedArch,
    LeftLoop,
    RightLoop,
    Whorl,
}

impl FingerprintClass {
    pub const ALL: [FingerprintClass; 5] = [
        FingerprintClass::Arch,
        FingerprintClass::TentedArch,
        FingerprintClass::LeftLoop,
        FingerprintClass::RightLoop,
        FingerprintClass::Whorl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FingerprintClass::Arch => "Arch",
            FingerprintClass::TentedArch => "TentedArch",
            FingerprintClass::LeftLoop => "LeftLoop",
            FingerprintClass::RightLoop => "RightLoop",
            FingerprintClass::Whorl => "Whorl",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FingerprintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FingerprintClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "arch" | "a" => Ok(FingerprintClass::Arch),
            "tentedarch" | "t" => Ok(FingerprintClass::TentedArch),
            "leftloop" | "l" => Ok(FingerprintClass::LeftLoop),
            "rightloop" | "r" => Ok(FingerprintClass::RightLoop),
            "whorl" | "w" => Ok(FingerprintClass::Whorl),
            _ => Err(format!("unknown fingerprint class {s:?}")),
        }
    }
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, OrientationError> {
        if width < BLOCK_SIZE || height < BLOCK_SIZE {
            return Err(OrientationError::ImageTooSmall { width, height });
        }
        if pixels.len() != width * height {
            return Err(OrientationError::BadBuffer {
                got: pixels.len(),
                expected: width * height,
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> u8,
    ) -> Result<Self, OrientationError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
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

    fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[y * self.width + x] as f64
    }

    /// Sobel gradients at `(x, y)`, replicating the border.
    fn sobel(&self, x: usize, y: usize) -> (f64, f64) {
        let (x, y) = (x as isize, y as isize);
        let p = |dx: isize, dy: isize| self.at_clamped(x + dx, y + dy);
        let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        (gx, gy)
    }
}

/// Ridge direction and certainty per 16x16 block.
///
/// Directions are in `[0, π)`, measured from the +x axis towards +y in image
/// coordinates (y grows downwards). Certainty 0 marks background.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    rows: usize,
    cols: usize,
    directions: Vec<f64>,
    certainties: Vec<f64>,
}

pub(crate) fn wrap_direction(d: f64) -> f64 {
    let r = d.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

impl OrientationField {
    /// Builds a field, wrapping directions into `[0, π)` and clamping
    /// certainties into `[0, 1]`.
    pub fn new(rows: usize, cols: usize, directions: Vec<f64>, certainties: Vec<f64>) -> Self {
        assert_eq!(directions.len(), rows * cols, "direction grid size");
        assert_eq!(certainties.len(), rows * cols, "certainty grid size");
        let directions = directions.into_iter().map(wrap_direction).collect();
        let certainties = certainties
            .into_iter()
            .map(|c| if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) })
            .collect();
        Self {
            rows,
            cols,
            directions,
            certainties,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn block_size(&self) -> usize {
        BLOCK_SIZE
    }

    pub fn direction(&self, row: usize, col: usize) -> f64 {
        self.directions[row * self.cols + col]
    }

    pub fn certainty(&self, row: usize, col: usize) -> f64 {
        self.certainties[row * self.cols + col]
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }

    pub fn certainties(&self) -> &[f64] {
        &self.certainties
    }

    pub fn is_foreground(&self, row: usize, col: usize) -> bool {
        self.certainty(row, col) > 0.0
    }

    /// Center of block `(row, col)` in pixels.
    pub fn block_center(row: usize, col: usize) -> (f64, f64) {
        let half = BLOCK_SIZE as f64 / 2.0;
        (
            (col * BLOCK_SIZE) as f64 + half,
            (row * BLOCK_SIZE) as f64 + half,
        )
    }

    /// Mean center of all foreground blocks, if any.
    pub fn foreground_centroid(&self) -> Option<CorePoint> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.is_foreground(r, c) {
                    let (x, y) = Self::block_center(r, c);
                    sx += x;
                    sy += y;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| CorePoint::new(sx / n as f64, sy / n as f64))
    }
}

pub fn estimate_block_directions(img: &GrayImage) -> Result<OrientationField, OrientationError> {
    estimate_block_directions_with(img, Execution::default())
}

/// Gradient-based direction and coherence for every whole block of `img`.
pub fn estimate_block_directions_with(
    img: &GrayImage,
    exec: Execution,
) -> Result<OrientationField, OrientationError> {
    if img.width < BLOCK_SIZE || img.height < BLOCK_SIZE {
        return Err(OrientationError::ImageTooSmall {
            width: img.width,
            height: img.height,
        });
    }
    let rows = img.height / BLOCK_SIZE;
    let cols = img.width / BLOCK_SIZE;
    let blocks = exec.map_range(rows * cols, |b| {
        let (br, bc) = (b / cols, b % cols);
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for y in br * BLOCK_SIZE..(br + 1) * BLOCK_SIZE {
            for x in bc * BLOCK_SIZE..(bc + 1) * BLOCK_SIZE {
                let (gx, gy) = img.sobel(x, y);
                sxx += gx * gx;
                syy += gy * gy;
                sxy += gx * gy;
            }
        }
        block_direction(sxx, syy, sxy)
    });
    let (directions, certainties) = blocks.into_iter().unzip();
    Ok(OrientationField::new(rows, cols, directions, certainties))
}

/// Direction and coherence from the summed gradient moments of one block.
pub(crate) fn block_direction(sxx: f64, syy: f64, sxy: f64) -> (f64, f64) {
    let direction = wrap_direction(0.5 * (2.0 * sxy).atan2(sxx - syy) + FRAC_PI_2);
    let energy = sxx + syy;
    let certainty = if energy > 0.0 {
        let diff = sxx - syy;
        ((diff * diff + 4.0 * sxy * sxy).sqrt() / energy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (direction, certainty)
}

/// Zeroes the certainty of every block below `tau_seg`.
pub fn segment_by_certainty(field: &OrientationField, tau_seg: f64) -> OrientationField {
    let certainties = field
        .certainties
        .iter()
        .map(|&c| if c < tau_seg { 0.0 } else { c })
        .collect();
    OrientationField {
        certainties,
        ..field.clone()
    }
}

/// Result of the singular point search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreDetection {
    pub core: CorePoint,
    /// Top-left block of the 2x2 window that won.
    pub block: (usize, usize),
    pub poincare_index: f64,
    /// False when no window has index +1/2 (e.g. plain arches).
    pub confident: bool,
}

fn orientation_step(from: f64, to: f64) -> f64 {
    let mut d = to - from;
    while d > FRAC_PI_2 {
        d -= PI;
    }
    while d <= -FRAC_PI_2 {
        d += PI;
    }
    d
}

/// Poincaré index of the loop through the centers of blocks
/// `(r, c) -> (r, c+1) -> (r+1, c+1) -> (r+1, c)`.
///
/// The winding sum is a multiple of π up to rounding, so it is snapped to
/// the nearest half integer.
pub fn poincare_index(field: &OrientationField, r: usize, c: usize) -> f64 {
    let ring = [
        field.direction(r, c),
        field.direction(r, c + 1),
        field.direction(r + 1, c + 1),
        field.direction(r + 1, c),
    ];
    let total: f64 = (0..4)
        .map(|i| orientation_step(ring[i], ring[(i + 1) % 4]))
        .sum();
    (total / PI).round() / 2.0
}

/// Finds the 2x2 foreground window whose Poincaré index is closest to +1/2.
///
/// Ties go to the window with the highest mean certainty, then to the first
/// in row-major order. The returned core is the shared corner of the four
/// blocks.
pub fn detect_core(field: &OrientationField) -> Result<CoreDetection, OrientationError> {
    let mut best: Option<(f64, f64, usize, usize, f64)> = None;
    for r in 0..field.rows.saturating_sub(1) {
        for c in 0..field.cols.saturating_sub(1) {
            let cert = [
                field.certainty(r, c),
                field.certainty(r, c + 1),
                field.certainty(r + 1, c + 1),
                field.certainty(r + 1, c),
            ];
            if cert.iter().any(|&v| v <= 0.0) {
                continue;
            }
            let index = poincare_index(field, r, c);
            let miss = (index - 0.5).abs();
            let local = cert.iter().sum::<f64>() / 4.0;
            let better = match best {
                None => true,
                Some((bm, bl, ..)) => miss < bm || (miss == bm && local > bl),
            };
            if better {
                best = Some((miss, local, r, c, index));
            }
        }
    }
    let (miss, _, r, c, index) = best.ok_or(OrientationError::NoForeground)?;
    Ok(CoreDetection {
        core: CorePoint::new(((c + 1) * BLOCK_SIZE) as f64, ((r + 1) * BLOCK_SIZE) as f64),
        block: (r, c),
        poincare_index: index,
        confident: miss == 0.0,
    })
}

/// The 16x16-block window around the core, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub directions: Vec<f64>,
    pub certainties: Vec<f64>,
    pub class_label: Option<FingerprintClass>,
}

impl FeatureVector {
    pub fn new(
        directions: Vec<f64>,
        certainties: Vec<f64>,
        class_label: Option<FingerprintClass>,
    ) -> Self {
        assert_eq!(directions.len(), FEATURE_LEN);
        assert_eq!(certainties.len(), FEATURE_LEN);
        Self {
            directions,
            certainties,
            class_label,
        }
    }

    pub fn with_label(mut self, label: Option<FingerprintClass>) -> Self {
        self.class_label = label;
        self
    }
}

/// Block containing pixel `(x, y)`; may lie outside the field.
fn block_of(core: CorePoint) -> (i64, i64) {
    (
        (core.y / BLOCK_SIZE as f64).floor() as i64,
        (core.x / BLOCK_SIZE as f64).floor() as i64,
    )
}

/// Copies the window of blocks `row-8..row+8`, `col-8..col+8` around the
/// core's block.
///
/// Cells outside the field or in background get certainty 0 and the mean
/// direction of the window's foreground cells (of the whole field when the
/// window has none, 0 when the field has none).
pub fn extract_feature_vector(field: &OrientationField, core: CorePoint) -> FeatureVector {
    let (cr, cc) = block_of(core);
    let half = (WINDOW / 2) as i64;
    let inside = |r: i64, c: i64| {
        r >= 0 && c >= 0 && (r as usize) < field.rows && (c as usize) < field.cols
    };

    let mut cells = Vec::with_capacity(FEATURE_LEN);
    let (mut sum, mut count) = (0.0, 0usize);
    for r in cr - half..cr + half {
        for c in cc - half..cc + half {
            let cell = if inside(r, c) && field.is_foreground(r as usize, c as usize) {
                let (r, c) = (r as usize, c as usize);
                sum += field.direction(r, c);
                count += 1;
                Some((field.direction(r, c), field.certainty(r, c)))
            } else {
                None
            };
            cells.push(cell);
        }
    }

    let fill = if count > 0 {
        sum / count as f64
    } else {
        let fg: Vec<f64> = field
            .directions
            .iter()
            .zip(&field.certainties)
            .filter(|(_, &c)| c > 0.0)
            .map(|(&d, _)| d)
            .collect();
        if fg.is_empty() {
            0.0
        } else {
            fg.iter().sum::<f64>() / fg.len() as f64
        }
    };

    let (directions, certainties) = cells
        .into_iter()
        .map(|cell| cell.unwrap_or((fill, 0.0)))
        .unzip();
    FeatureVector::new(directions, certainties, None)
}

/// Core used for feature extraction: the detected core, or the foreground
/// centroid when detection found no +1/2 window.
pub fn reference_point(field: &OrientationField) -> Result<(CorePoint, Option<CoreDetection>), OrientationError> {
    match detect_core(field) {
        Ok(det) if det.confident => Ok((det.core, Some(det))),
        Ok(det) => Ok((
            field.foreground_centroid().unwrap_or(det.core),
            Some(det),
        )),
        Err(OrientationError::NoForeground) => field
            .foreground_centroid()
            .map(|c| (c, None))
            .ok_or(OrientationError::NoForeground),
        Err(e) => Err(e),
    }
}

/// Estimation, segmentation, core search and window extraction in one step.
pub fn features_from_image(
    img: &GrayImage,
    tau_seg: f64,
) -> Result<(FeatureVector, CorePoint), OrientationError> {
    let field = segment_by_certainty(&estimate_block_directions(img)?, tau_seg);
    let (core, _) = reference_point(&field)?;
    Ok((extract_feature_vector(&field, core), core))
}
