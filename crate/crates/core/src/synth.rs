//! Synthetic minutiae sets, impression perturbation and parametric
//! orientation fields for testing and evaluation.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{apply_transform, CorePoint, Minutia, MinutiaKind, MinutiaeSet, Point2, RigidTransform};
use crate::numfmt::round_sig;
use crate::orientation::{
    extract_feature_vector, reference_point, wrap_direction, FeatureVector, FingerprintClass,
    GrayImage, OrientationField, BLOCK_SIZE,
};

/// Minimum distance between generated minutiae, pixels.
pub const MIN_SEPARATION: f64 = 5.0;
pub const MAX_ATTEMPTS: usize = 100_000;
/// Orientation fields are generated on a square grid of this many blocks.
pub const FIELD_BLOCKS: usize = 32;
/// Ridge period used by [`render_field`], pixels.
pub const RIDGE_PERIOD: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("could not place {n} minutiae {MIN_SEPARATION} px apart in radius {radius} within {MAX_ATTEMPTS} attempts")]
    ConfigInfeasible { n: usize, radius: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_minutiae: usize,
    pub disk_radius: f64,
    pub jitter_sigma: f64,
    pub class: FingerprintClass,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_minutiae: 30,
            disk_radius: 120.0,
            jitter_sigma: 1.0,
            class: FingerprintClass::LeftLoop,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_minutiae < 1 {
            return Err(SynthError::InvalidConfig("n_minutiae must be >= 1"));
        }
        if !(self.disk_radius >= 0.0 && self.jitter_sigma >= 0.0) {
            return Err(SynthError::InvalidConfig("radius and jitter must be non-negative"));
        }
        Ok(())
    }

    /// Disk center; the disk sits in the positive quadrant with a margin.
    pub fn center(&self) -> Point2 {
        let c = self.disk_radius + 30.0;
        Point2::new(c, c)
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n_minutiae` points uniform in a disk around the core, at least
/// [`MIN_SEPARATION`] apart. Values are rounded to 9 significant digits so
/// the set survives a `MIN1` round trip unchanged.
pub fn gen_synthetic_minutiae(cfg: &SynthConfig) -> Result<MinutiaeSet, SynthError> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, 1);
    let center = cfg.center();
    let mut pts: Vec<Point2> = Vec::with_capacity(cfg.n_minutiae);
    let mut attempts = 0;
    while pts.len() < cfg.n_minutiae {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(SynthError::ConfigInfeasible {
                n: cfg.n_minutiae,
                radius: cfg.disk_radius,
            });
        }
        let r = cfg.disk_radius * rng.random::<f64>().sqrt();
        let a = rng.random_range(0.0..TAU);
        let p = Point2::new(round_sig(center.x + r * a.cos(), 9), round_sig(center.y + r * a.sin(), 9));
        if pts.iter().all(|q| q.dist(p) >= MIN_SEPARATION) {
            pts.push(p);
        }
    }
    let minutiae = pts
        .into_iter()
        .map(|p| {
            // the margin keeps the rounded angle below TAU
            let theta = round_sig(rng.random_range(0.0..TAU - 1e-8), 9);
            let kind = if rng.random_bool(0.5) { MinutiaKind::Ending } else { MinutiaKind::Bifurcation };
            Minutia::new(p.x, p.y, theta, kind)
        })
        .collect();
    let core = CorePoint::new(center.x, center.y);
    Ok(MinutiaeSet::new(minutiae, Some(core), format!("synth-{}", cfg.seed))
        .expect("separated finite points"))
}

/// Adds Gaussian jitter of `sigma` to every minutia coordinate, then applies
/// `transform`. The core is moved by the transform only.
pub fn perturb_with(set: &MinutiaeSet, sigma: f64, transform: &RigidTransform, rng: &mut impl Rng) -> MinutiaeSet {
    let jittered = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
        let ms: Vec<Minutia> = set
            .minutiae()
            .iter()
            .map(|m| Minutia {
                x: m.x + normal.sample(rng),
                y: m.y + normal.sample(rng),
                ..*m
            })
            .collect();
        MinutiaeSet::from_parts_unchecked(ms, set.core(), set.source_id().to_string())
    } else {
        set.clone()
    };
    apply_transform(&jittered, transform)
}

/// A second impression of the same finger: jitter of `cfg.jitter_sigma` and
/// a random rotation about the core plus a translation of up to half the
/// disk radius per axis.
pub fn perturb_impression(set: &MinutiaeSet, cfg: &SynthConfig) -> MinutiaeSet {
    let mut rng = rng_for(cfg.seed, 2);
    let pivot = set.core().map_or((0.0, 0.0), |c| (c.x, c.y));
    let reach = cfg.disk_radius / 2.0;
    let rotation = rng.random_range(0.0..TAU);
    let (dx, dy) = if reach > 0.0 {
        (rng.random_range(-reach..=reach), rng.random_range(-reach..=reach))
    } else {
        (0.0, 0.0)
    };
    let t = RigidTransform::new(rotation, (dx, dy), pivot);
    perturb_with(set, cfg.jitter_sigma, &t, &mut rng)
}

/// Singular points of a zero-pole orientation model, pixel coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Singularities {
    pub cores: Vec<Point2>,
    pub deltas: Vec<Point2>,
}

/// Orientation at `p`: half the sum of core angles minus delta angles, plus
/// `base`, wrapped into `[0, π)`.
pub fn zero_pole_direction(p: Point2, sing: &Singularities, base: f64) -> f64 {
    let arg = |s: &Point2| (p.y - s.y).atan2(p.x - s.x);
    let sum: f64 = sing.cores.iter().map(arg).sum::<f64>() - sing.deltas.iter().map(arg).sum::<f64>();
    wrap_direction(0.5 * sum + base)
}

/// Field on a `rows x cols` block grid from `direction(block_center)`;
/// certainty 1 inside the disk, 0 outside.
pub fn field_from_fn(
    rows: usize,
    cols: usize,
    center: Point2,
    radius: f64,
    direction: impl Fn(Point2) -> f64,
) -> OrientationField {
    let mut dirs = Vec::with_capacity(rows * cols);
    let mut certs = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = OrientationField::block_center(r, c);
            let p = Point2::new(x, y);
            dirs.push(direction(p));
            certs.push(if p.dist(center) <= radius { 1.0 } else { 0.0 });
        }
    }
    OrientationField::new(rows, cols, dirs, certs)
}

pub fn zero_pole_field(
    rows: usize,
    cols: usize,
    sing: &Singularities,
    base: f64,
    center: Point2,
    radius: f64,
) -> OrientationField {
    field_from_fn(rows, cols, center, radius, |p| zero_pole_direction(p, sing, base))
}

/// Singularity layout (offsets from the center, y down) per class.
fn class_layout(class: FingerprintClass) -> Singularities {
    let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point2::new(x, y)).collect();
    match class {
        FingerprintClass::Arch => Singularities::default(),
        FingerprintClass::TentedArch => Singularities {
            cores: p(&[(0.0, -10.0)]),
            deltas: p(&[(0.0, 70.0)]),
        },
        FingerprintClass::LeftLoop => Singularities {
            cores: p(&[(-15.0, -30.0)]),
            deltas: p(&[(75.0, 70.0)]),
        },
        FingerprintClass::RightLoop => Singularities {
            cores: p(&[(15.0, -30.0)]),
            deltas: p(&[(-75.0, 70.0)]),
        },
        FingerprintClass::Whorl => Singularities {
            cores: p(&[(-8.0, -35.0), (8.0, 25.0)]),
            deltas: p(&[(-90.0, 80.0), (90.0, 80.0)]),
        },
    }
}

/// A class-shaped orientation field on a [`FIELD_BLOCKS`]-square grid,
/// centred in the grid with `cfg.disk_radius` as the foreground radius.
///
/// Singularities move by up to 12 px and the base angle by up to 0.15 rad
/// per seed. Arches have no singularity; their ridges bend smoothly over
/// the center. The returned core is the uppermost planted core, or the
/// disk center for arches.
pub fn gen_synthetic_orientation(cfg: &SynthConfig) -> (OrientationField, CorePoint) {
    let mut rng = rng_for(cfg.seed, 3);
    let side = (FIELD_BLOCKS * BLOCK_SIZE) as f64;
    let center = Point2::new(side / 2.0, side / 2.0);
    let base = rng.random_range(-0.15..=0.15);
    let mut sing = class_layout(cfg.class);
    for s in sing.cores.iter_mut().chain(sing.deltas.iter_mut()) {
        s.x += center.x + rng.random_range(-12.0..=12.0);
        s.y += center.y + rng.random_range(-12.0..=12.0);
    }
    let field = if cfg.class == FingerprintClass::Arch {
        let width = 70.0 + rng.random_range(-10.0..=10.0);
        let bend = 1.4 + rng.random_range(-0.2..=0.2);
        field_from_fn(FIELD_BLOCKS, FIELD_BLOCKS, center, cfg.disk_radius, |p| {
            let u = (p.x - center.x) / width;
            // slope of a bump y = -exp(-u^2/2), steeper near the middle
            wrap_direction(base + (bend * u * (-0.5 * u * u).exp()).atan())
        })
    } else {
        zero_pole_field(FIELD_BLOCKS, FIELD_BLOCKS, &sing, base, center, cfg.disk_radius)
    };
    let core = sing
        .cores
        .iter()
        .min_by(|a, b| a.y.total_cmp(&b.y))
        .copied()
        .unwrap_or(center);
    (field, CorePoint::new(core.x, core.y))
}

/// Draws each foreground block as a sinusoidal ridge pattern running along
/// the block direction; background blocks are flat gray.
pub fn render_field(field: &OrientationField) -> GrayImage {
    let width = field.cols() * BLOCK_SIZE;
    let height = field.rows() * BLOCK_SIZE;
    GrayImage::from_fn(width, height, |x, y| {
        let (r, c) = (y / BLOCK_SIZE, x / BLOCK_SIZE);
        if !field.is_foreground(r, c) {
            return 128;
        }
        let (s, co) = field.direction(r, c).sin_cos();
        let u = -(x as f64) * s + (y as f64) * co;
        (128.0 + 100.0 * (2.0 * PI * u / RIDGE_PERIOD).sin()).round() as u8
    })
    .expect("field has at least one block")
}

/// Labeled feature vector of a synthetic impression of `class`.
pub fn synthetic_features(class: FingerprintClass, seed: u64, radius: f64) -> FeatureVector {
    let cfg = SynthConfig {
        class,
        seed,
        disk_radius: radius,
        ..Default::default()
    };
    let (field, truth) = gen_synthetic_orientation(&cfg);
    let core = reference_point(&field).map(|(c, _)| c).unwrap_or(truth);
    extract_feature_vector(&field, core).with_label(Some(class))
}

/// `per_class` labeled feature vectors of every class, classes interleaved.
/// Seeds are drawn from `seed`, so disjoint `seed`s give disjoint sets.
pub fn class_dataset(per_class: usize, seed: u64, radius: f64) -> Vec<FeatureVector> {
    let mut rng = rng_for(seed, 4);
    let mut out = Vec::with_capacity(per_class * FingerprintClass::ALL.len());
    for _ in 0..per_class {
        for class in FingerprintClass::ALL {
            out.push(synthetic_features(class, rng.random(), radius));
        }
    }
    out
}

/// Zeroes the certainty of a random `fraction` of cells and replaces their
/// direction with noise; other cells get Gaussian direction noise of
/// `sigma` radians.
pub fn degrade_features(fv: &FeatureVector, fraction: f64, sigma: f64, rng: &mut impl Rng) -> FeatureVector {
    let normal = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    let mut out = fv.clone();
    for i in 0..out.directions.len() {
        if rng.random_bool(fraction.clamp(0.0, 1.0)) {
            out.certainties[i] = 0.0;
            out.directions[i] = rng.random_range(0.0..PI);
        } else if sigma > 0.0 {
            out.directions[i] = wrap_direction(out.directions[i] + normal.sample(rng));
        }
    }
    out
}
