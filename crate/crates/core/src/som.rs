//! Self-organizing map classifier over orientation feature vectors, in the
//! conventional form and the certainty-weighted (MSOM) form.
//!
//! Training runs epoch by epoch over a seeded shuffle of the inputs. In epoch
//! `t` of `K` the learning rate is `L0 * (1 - t/K)` and the neighbourhood is
//! a square window of Chebyshev radius `round(m - (m-1) t/K)` around the
//! winner. MSOM blends each input towards the training mean by its
//! certainty, picks winners with a certainty-weighted norm and scales each
//! component's update by its certainty.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numfmt::sig;
use crate::orientation::{FeatureVector, FingerprintClass};

/// Stop when no weight moved more than this during an epoch.
pub const CONVERGENCE_EPS: f64 = 1e-6;
pub const MAGIC: &str = "SOM1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SomError {
    #[error("no training vectors")]
    EmptyTrainingSet,
    #[error("map has not been trained")]
    UntrainedMap,
    #[error("no node of the map carries a label")]
    NoLabeledNodes,
    #[error("vector has {got} components, map expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("malformed map file at line {0}")]
    Parse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Zero,
    /// Uniform in `[0, 0.01]` from the training seed.
    SmallRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub initial_rate: f64,
    pub seed: u64,
    pub init_mode: InitMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            initial_rate: 0.5,
            seed: 0,
            init_mode: InitMode::SmallRandom,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), SomError> {
        if self.epochs < 1 {
            return Err(SomError::InvalidConfig("epochs must be >= 1"));
        }
        if !(self.initial_rate > 0.0 && self.initial_rate <= 1.0) {
            return Err(SomError::InvalidConfig("initial rate must be in (0, 1]"));
        }
        Ok(())
    }

    pub fn rate(&self, t: usize) -> f64 {
        self.initial_rate * (1.0 - t as f64 / self.epochs as f64)
    }

    /// Neighbourhood radius for epoch `t` on a map of side `m`.
    pub fn radius(&self, m: usize, t: usize) -> usize {
        let m = m as f64;
        (m - (m - 1.0) * t as f64 / self.epochs as f64)
            .round()
            .max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SomMap {
    rows: usize,
    cols: usize,
    dim: usize,
    weights: Vec<f64>,
    labels: Vec<Option<FingerprintClass>>,
    x_avg: Vec<f64>,
    trained: bool,
}

/// Result of [`SomMap::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub class: FingerprintClass,
    /// Winning node; its label may be inherited from the nearest labeled node.
    pub node: usize,
}

pub fn msom_blend(x: &[f64], c: &[f64], x_avg: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(c)
        .zip(x_avg)
        .map(|((&xi, &ci), &ai)| ci * xi + (1.0 - ci) * ai)
        .collect()
}

fn mean_vector(inputs: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut avg = vec![0.0; dim];
    for x in inputs {
        for (a, &v) in avg.iter_mut().zip(x.iter()) {
            *a += v;
        }
    }
    let n = inputs.len() as f64;
    avg.iter_mut().for_each(|a| *a /= n);
    avg
}

impl SomMap {
    /// An untrained `m x m` map with zero weights.
    pub fn new(m: usize, dim: usize) -> Self {
        Self::with_grid(m, m, dim)
    }

    pub fn with_grid(rows: usize, cols: usize, dim: usize) -> Self {
        let nodes = rows * cols;
        Self {
            rows,
            cols,
            dim,
            weights: vec![0.0; nodes * dim],
            labels: vec![None; nodes],
            x_avg: vec![0.0; dim],
            trained: false,
        }
    }

    /// A map with given weights and labels, marked trained.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        dim: usize,
        weights: Vec<f64>,
        labels: Vec<Option<FingerprintClass>>,
        x_avg: Vec<f64>,
    ) -> Self {
        assert_eq!(weights.len(), rows * cols * dim);
        assert_eq!(labels.len(), rows * cols);
        assert_eq!(x_avg.len(), dim);
        Self {
            rows,
            cols,
            dim,
            weights,
            labels,
            x_avg,
            trained: true,
        }
    }

    pub fn side(&self) -> usize {
        self.rows.max(self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn weight(&self, node: usize) -> &[f64] {
        &self.weights[node * self.dim..(node + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[Option<FingerprintClass>] {
        &self.labels
    }

    pub fn x_avg(&self) -> &[f64] {
        &self.x_avg
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    fn grid_pos(&self, node: usize) -> (usize, usize) {
        (node / self.cols, node % self.cols)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), SomError> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(SomError::DimensionMismatch {
                got: x.len(),
                expected: self.dim,
            })
        }
    }

    /// Node with the smallest Euclidean distance to `x`; lowest index on ties.
    pub fn find_winner(&self, x: &[f64]) -> usize {
        self.argmin(|w| {
            w.iter()
                .zip(x)
                .map(|(&wi, &xi)| {
                    let d = xi - wi;
                    d * d
                })
                .sum()
        })
    }

    /// Node minimising `||c * (x - w)||` (component-wise product).
    pub fn msom_find_winner(&self, x: &[f64], c: &[f64]) -> usize {
        self.argmin(|w| {
            w.iter()
                .zip(x)
                .zip(c)
                .map(|((&wi, &xi), &ci)| {
                    let d = ci * (xi - wi);
                    d * d
                })
                .sum()
        })
    }

    fn argmin(&self, dist: impl Fn(&[f64]) -> f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for j in 0..self.nodes() {
            let d = dist(self.weight(j));
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        best
    }

    /// Moves every node within the epoch-`t` window of `winner` towards `x`.
    /// Returns the largest single weight change.
    pub fn update_weights(&mut self, x: &[f64], winner: usize, t: usize, cfg: &TrainConfig) -> f64 {
        let (rate, radius) = (cfg.rate(t), cfg.radius(self.side(), t));
        self.step(x, None, winner, rate, radius)
    }

    /// MSOM update: as [`update_weights`](Self::update_weights) with each
    /// component's step scaled by its certainty.
    pub fn update_weights_msom(
        &mut self,
        x: &[f64],
        c: &[f64],
        winner: usize,
        t: usize,
        cfg: &TrainConfig,
    ) -> f64 {
        let (rate, radius) = (cfg.rate(t), cfg.radius(self.side(), t));
        self.step(x, Some(c), winner, rate, radius)
    }

    fn step(&mut self, x: &[f64], c: Option<&[f64]>, winner: usize, rate: f64, radius: usize) -> f64 {
        let (wr, wc) = self.grid_pos(winner);
        let dim = self.dim;
        let mut max_change: f64 = 0.0;
        for node in 0..self.nodes() {
            let (r, col) = self.grid_pos(node);
            if r.abs_diff(wr).max(col.abs_diff(wc)) > radius {
                continue;
            }
            let w = &mut self.weights[node * dim..(node + 1) * dim];
            match c {
                None => {
                    for (wi, &xi) in w.iter_mut().zip(x) {
                        let delta = rate * (xi - *wi);
                        *wi += delta;
                        max_change = max_change.max(delta.abs());
                    }
                }
                Some(c) => {
                    for ((wi, &xi), &ci) in w.iter_mut().zip(x).zip(c) {
                        let delta = rate * (xi - *wi) * ci;
                        *wi += delta;
                        max_change = max_change.max(delta.abs());
                    }
                }
            }
        }
        max_change
    }

    fn winner_for(&self, x: &[f64], c: Option<&[f64]>) -> usize {
        match c {
            None => self.find_winner(x),
            Some(c) => self.msom_find_winner(&msom_blend(x, c, &self.x_avg), c),
        }
    }

    /// Class of the winning node for `x`. With certainties, `x` is blended
    /// with the training mean and the weighted norm picks the winner. An
    /// unlabeled winner takes the label of the nearest labeled node on the
    /// grid.
    pub fn classify(&self, x: &[f64], c: Option<&[f64]>) -> Result<Classification, SomError> {
        if !self.trained {
            return Err(SomError::UntrainedMap);
        }
        self.check_dim(x)?;
        if let Some(c) = c {
            self.check_dim(c)?;
        }
        let node = self.winner_for(x, c);
        let class = match self.labels[node] {
            Some(class) => class,
            None => {
                let (r0, c0) = self.grid_pos(node);
                (0..self.nodes())
                    .filter_map(|j| self.labels[j].map(|l| (j, l)))
                    .min_by_key(|&(j, _)| {
                        let (r, c) = self.grid_pos(j);
                        let (dr, dc) = (r.abs_diff(r0), c.abs_diff(c0));
                        (dr * dr + dc * dc, j)
                    })
                    .map(|(_, l)| l)
                    .ok_or(SomError::NoLabeledNodes)?
            }
        };
        Ok(Classification { class, node })
    }

    /// Mean distance from each input to its winning node.
    pub fn quantization_error(&self, inputs: &[&[f64]]) -> f64 {
        let total: f64 = inputs
            .iter()
            .map(|x| {
                let w = self.weight(self.find_winner(x));
                w.iter()
                    .zip(x.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        total / inputs.len() as f64
    }

    /// Majority label of the training vectors each node wins. Ties go to the
    /// class most frequent in the whole training set, then to enum order.
    fn assign_labels(&mut self, inputs: &[&[f64]], certs: Option<&[&[f64]]>, labels: &[Option<FingerprintClass>]) {
        let k = FingerprintClass::ALL.len();
        let mut overall = vec![0usize; k];
        let mut votes = vec![vec![0usize; k]; self.nodes()];
        for (i, x) in inputs.iter().enumerate() {
            let Some(label) = labels[i] else { continue };
            overall[label.index()] += 1;
            let node = self.winner_for(x, certs.map(|c| c[i]));
            votes[node][label.index()] += 1;
        }
        for (node, v) in votes.iter().enumerate() {
            let top = *v.iter().max().unwrap_or(&0);
            self.labels[node] = if top == 0 {
                None
            } else {
                FingerprintClass::ALL
                    .iter()
                    .copied()
                    .filter(|c| v[c.index()] == top)
                    .max_by(|a, b| {
                        overall[a.index()]
                            .cmp(&overall[b.index()])
                            .then(b.index().cmp(&a.index()))
                    })
            };
        }
    }

    /// Text form: `SOM1 m=<m> dim=<d>`, one label per node (`-` when
    /// unlabeled), one line of weights per node, then the training mean on
    /// an `XAVG` line. Values carry 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.rows == self.cols {
            let _ = writeln!(out, "{MAGIC} m={} dim={}", self.rows, self.dim);
        } else {
            let _ = writeln!(out, "{MAGIC} rows={} cols={} dim={}", self.rows, self.cols, self.dim);
        }
        for l in &self.labels {
            let _ = writeln!(out, "{}", l.map_or("-", FingerprintClass::name));
        }
        let join = |v: &[f64]| v.iter().map(|&w| sig(w, 9)).collect::<Vec<_>>().join(" ");
        for node in 0..self.nodes() {
            let _ = writeln!(out, "{}", join(self.weight(node)));
        }
        let _ = writeln!(out, "XAVG {}", join(&self.x_avg));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SomError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, header) = lines.next().ok_or(SomError::Parse(1))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(SomError::Parse(1));
        }
        let (mut rows, mut cols, mut dim) = (None, None, None);
        for p in parts {
            let (key, val) = p.split_once('=').ok_or(SomError::Parse(1))?;
            let val: usize = val.parse().map_err(|_| SomError::Parse(1))?;
            match key {
                "m" => {
                    rows = Some(val);
                    cols = Some(val);
                }
                "rows" => rows = Some(val),
                "cols" => cols = Some(val),
                "dim" => dim = Some(val),
                _ => return Err(SomError::Parse(1)),
            }
        }
        let (rows, cols, dim) = match (rows, cols, dim) {
            (Some(r), Some(c), Some(d)) if r > 0 && c > 0 && d > 0 => (r, c, d),
            _ => return Err(SomError::Parse(1)),
        };
        let nodes = rows * cols;
        let mut labels = Vec::with_capacity(nodes);
        for _ in 0..nodes {
            let (no, l) = lines.next().ok_or(SomError::Parse(0))?;
            labels.push(match l {
                "-" => None,
                s => Some(s.parse().map_err(|_| SomError::Parse(no))?),
            });
        }
        let parse_row = |no: usize, l: &str| -> Result<Vec<f64>, SomError> {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<_>>()
                .ok_or(SomError::Parse(no))?;
            if v.len() == dim {
                Ok(v)
            } else {
                Err(SomError::Parse(no))
            }
        };
        let mut weights = Vec::with_capacity(nodes * dim);
        for _ in 0..nodes {
            let (no, l) = lines.next().ok_or(SomError::Parse(0))?;
            weights.extend(parse_row(no, l)?);
        }
        let x_avg = match lines.next() {
            Some((no, l)) => parse_row(no, l.strip_prefix("XAVG").ok_or(SomError::Parse(no))?)?,
            None => vec![0.0; dim],
        };
        Ok(Self::from_parts(rows, cols, dim, weights, labels, x_avg))
    }
}

fn train_impl(
    vectors: &[FeatureVector],
    m: usize,
    cfg: &TrainConfig,
    msom: bool,
    observer: &mut dyn FnMut(usize, &SomMap),
) -> Result<SomMap, SomError> {
    cfg.validate()?;
    if m < 2 {
        return Err(SomError::InvalidConfig("map side must be >= 2"));
    }
    let first = vectors.first().ok_or(SomError::EmptyTrainingSet)?;
    let dim = first.directions.len();
    let raw: Vec<&[f64]> = vectors.iter().map(|v| v.directions.as_slice()).collect();
    let certs: Vec<&[f64]> = vectors.iter().map(|v| v.certainties.as_slice()).collect();
    let labels: Vec<Option<FingerprintClass>> = vectors.iter().map(|v| v.class_label).collect();

    let mut map = SomMap::new(m, dim);
    map.x_avg = mean_vector(&raw, dim);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = if msom { InitMode::Zero } else { cfg.init_mode };
    if init == InitMode::SmallRandom {
        for w in map.weights.iter_mut() {
            *w = rng.random_range(0.0..=0.01);
        }
    }

    let blended: Vec<Vec<f64>> = if msom {
        raw.iter()
            .zip(&certs)
            .map(|(x, c)| msom_blend(x, c, &map.x_avg))
            .collect()
    } else {
        Vec::new()
    };

    let mut order: Vec<usize> = (0..vectors.len()).collect();
    for t in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let rate = cfg.rate(t);
        let radius = cfg.radius(m, t);
        let mut epoch_change: f64 = 0.0;
        for &i in &order {
            let change = if msom {
                let x = &blended[i];
                let winner = map.msom_find_winner(x, certs[i]);
                map.step(x, Some(certs[i]), winner, rate, radius)
            } else {
                let winner = map.find_winner(raw[i]);
                map.step(raw[i], None, winner, rate, radius)
            };
            epoch_change = epoch_change.max(change);
        }
        observer(t, &map);
        if epoch_change < CONVERGENCE_EPS {
            break;
        }
    }

    if msom {
        map.assign_labels(&raw, Some(&certs), &labels);
    } else {
        map.assign_labels(&raw, None, &labels);
    }
    map.trained = true;
    Ok(map)
}

/// Trains a conventional `m x m` SOM on the vectors' directions.
pub fn train_som(vectors: &[FeatureVector], m: usize, cfg: &TrainConfig) -> Result<SomMap, SomError> {
    train_impl(vectors, m, cfg, false, &mut |_, _| {})
}

/// [`train_som`], calling `observer` with the map after every epoch.
pub fn train_som_observed(
    vectors: &[FeatureVector],
    m: usize,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(usize, &SomMap),
) -> Result<SomMap, SomError> {
    train_impl(vectors, m, cfg, false, observer)
}

/// Trains an MSOM. Weights always start at zero.
pub fn train_msom(vectors: &[FeatureVector], m: usize, cfg: &TrainConfig) -> Result<SomMap, SomError> {
    train_impl(vectors, m, cfg, true, &mut |_, _| {})
}

pub fn train_msom_observed(
    vectors: &[FeatureVector],
    m: usize,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(usize, &SomMap),
) -> Result<SomMap, SomError> {
    train_impl(vectors, m, cfg, true, observer)
}
