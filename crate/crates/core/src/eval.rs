//! FAR/FRR evaluation over genuine and imposter pairs, with threshold
//! sweeps.
//!
//! `F` counts imposter pairs accepted, `R` genuine pairs rejected and `S`
//! all pairs. `FAR = F / S * 100`, `FRR = R / S * 100` and accuracy is the
//! share of correct decisions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cluster::DEFAULT_K;
use crate::geometry::MinutiaeSet;
use crate::hausdorff::{score_points, Decision};
use crate::minfile::parse_minutiae;
use crate::par::Execution;
use crate::synth::{gen_synthetic_minutiae, perturb_impression, SynthConfig};
use crate::verify::{build_template, gather_evidence};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scenario has no pairs")]
    EmptyScenario,
    #[error("FAR needs at least one trial")]
    ZeroTrials,
    #[error("{f} wrong decisions out of {s} trials")]
    InvalidCounts { f: usize, s: usize },
    #[error("scenario line {0}: {1}")]
    Parse(usize, String),
    #[error("bad threshold range {0:?} (expected start:end:step)")]
    BadRange(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `F / S * 100`.
pub fn compute_far(f: usize, s: usize) -> Result<f64, EvalError> {
    if s == 0 {
        return Err(EvalError::ZeroTrials);
    }
    if f > s {
        return Err(EvalError::InvalidCounts { f, s });
    }
    Ok(f as f64 / s as f64 * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Genuine,
    Imposter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub kind: PairKind,
    pub probe: MinutiaeSet,
    pub template: MinutiaeSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub k: usize,
    pub pairs: Vec<Pair>,
}

/// Parameters of a generated scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticScenario {
    pub genuine: usize,
    pub imposter: usize,
    pub n_minutiae: usize,
    pub disk_radius: f64,
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticScenario {
    fn default() -> Self {
        Self {
            genuine: 200,
            imposter: 200,
            n_minutiae: 30,
            disk_radius: 120.0,
            jitter_sigma: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticScenario {
    /// Genuine pairs enroll a finger and probe with a perturbed impression of
    /// it; imposter pairs probe with a perturbed impression of a different
    /// finger.
    pub fn generate(&self) -> Result<Vec<Pair>, crate::synth::SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let cfg = |seed: u64| SynthConfig {
            n_minutiae: self.n_minutiae,
            disk_radius: self.disk_radius,
            jitter_sigma: self.jitter_sigma,
            seed,
            ..Default::default()
        };
        let mut pairs = Vec::with_capacity(self.genuine + self.imposter);
        for _ in 0..self.genuine {
            let template = gen_synthetic_minutiae(&cfg(rng.random()))?;
            let probe = perturb_impression(&template, &cfg(rng.random()));
            pairs.push(Pair { kind: PairKind::Genuine, probe, template });
        }
        for _ in 0..self.imposter {
            let (sa, sb): (u64, u64) = (rng.random(), rng.random());
            let template = gen_synthetic_minutiae(&cfg(sa))?;
            let other = gen_synthetic_minutiae(&cfg(if sb == sa { sb ^ 1 } else { sb }))?;
            let probe = perturb_impression(&other, &cfg(rng.random()));
            pairs.push(Pair { kind: PairKind::Imposter, probe, template });
        }
        Ok(pairs)
    }
}

impl Scenario {
    /// Reads a scenario file. Lines:
    ///
    /// ```text
    /// k <K>
    /// synthetic genuine=<n> imposter=<n> minutiae=<n> radius=<px> jitter=<px> seed=<s>
    /// genuine <probe.min> <template.min>
    /// imposter <probe.min> <template.min>
    /// ```
    ///
    /// Paths are relative to `base`. `#` starts a comment line.
    pub fn parse(text: &str, base: &Path) -> Result<Self, EvalError> {
        let mut k = DEFAULT_K;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| EvalError::Parse(no, m.to_string());
            match toks[0] {
                "k" => {
                    k = toks.get(1).and_then(|v| v.parse().ok()).filter(|&v| v >= 1).ok_or_else(|| err("k needs a positive integer"))?;
                }
                "synthetic" => {
                    let mut s = SyntheticScenario::default();
                    for kv in &toks[1..] {
                        let (key, val) = kv.split_once('=').ok_or_else(|| err("expected key=value"))?;
                        let bad = || err(&format!("bad value for {key}"));
                        match key {
                            "genuine" => s.genuine = val.parse().map_err(|_| bad())?,
                            "imposter" => s.imposter = val.parse().map_err(|_| bad())?,
                            "minutiae" => s.n_minutiae = val.parse().map_err(|_| bad())?,
                            "radius" => s.disk_radius = val.parse().map_err(|_| bad())?,
                            "jitter" => s.jitter_sigma = val.parse().map_err(|_| bad())?,
                            "seed" => s.seed = val.parse().map_err(|_| bad())?,
                            _ => return Err(err(&format!("unknown key {key}"))),
                        }
                    }
                    pairs.extend(s.generate().map_err(|e| err(&e.to_string()))?);
                }
                kind @ ("genuine" | "imposter") => {
                    let [_, p, t] = toks.as_slice() else {
                        return Err(err("expected <probe> <template>"));
                    };
                    let load = |f: &str| -> Result<MinutiaeSet, EvalError> {
                        let path = base.join(f);
                        let bytes = fs::read(&path)?;
                        parse_minutiae(&bytes, f).map_err(|e| err(&format!("{f}: {e}")))
                    };
                    pairs.push(Pair {
                        kind: if kind == "genuine" { PairKind::Genuine } else { PairKind::Imposter },
                        probe: load(p)?,
                        template: load(t)?,
                    });
                }
                other => return Err(err(&format!("unknown directive {other}"))),
            }
        }
        if pairs.is_empty() {
            return Err(EvalError::EmptyScenario);
        }
        Ok(Self { k, pairs })
    }
}

/// Threshold-independent result of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub kind: PairKind,
    /// Index and isomorphism gates both passed.
    pub structural_match: bool,
    /// Modified Hausdorff distance after alignment; infinite when the pair
    /// could not be scored (e.g. the probe has fewer than k minutiae).
    pub mhd: f64,
}

impl PairOutcome {
    pub fn accepted(&self, tau: f64) -> bool {
        self.structural_match && self.mhd <= tau
    }
}

pub fn score_pair(pair: &Pair, k: usize) -> PairOutcome {
    let scored = build_template(&pair.template, k, None).and_then(|t| {
        let ev = gather_evidence(&pair.probe, &t)?;
        let a = ev.aligned_probe.positions();
        let b = t.minutiae.positions();
        let s = score_points(&a, &b, 1.0).map_err(crate::verify::PipelineError::from)?;
        Ok((ev.index_match && ev.isomorphic, s.mhd))
    });
    match scored {
        Ok((structural_match, mhd)) => PairOutcome { kind: pair.kind, structural_match, mhd },
        Err(_) => PairOutcome { kind: pair.kind, structural_match: false, mhd: f64::INFINITY },
    }
}

pub fn score_pairs(scenario: &Scenario, exec: Execution) -> Vec<PairOutcome> {
    exec.map(&scenario.pairs, |p| score_pair(p, scenario.k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub tau: f64,
    pub far_percent: f64,
    pub frr_percent: f64,
    pub accuracy_percent: f64,
    /// Imposters accepted.
    pub false_accepts: usize,
    /// Genuines rejected.
    pub false_rejects: usize,
    pub trials: usize,
}

pub fn report_at(outcomes: &[PairOutcome], tau: f64) -> Result<EvalReport, EvalError> {
    let s = outcomes.len();
    let f = outcomes
        .iter()
        .filter(|o| o.kind == PairKind::Imposter && o.accepted(tau))
        .count();
    let r = outcomes
        .iter()
        .filter(|o| o.kind == PairKind::Genuine && !o.accepted(tau))
        .count();
    Ok(EvalReport {
        tau,
        far_percent: compute_far(f, s)?,
        frr_percent: compute_far(r, s)?,
        accuracy_percent: compute_far(s - f - r, s)?,
        false_accepts: f,
        false_rejects: r,
        trials: s,
    })
}

/// Scores the scenario once and reports every threshold in `taus`.
pub fn run_eval(scenario: &Scenario, taus: &[f64], exec: Execution) -> Result<Vec<EvalReport>, EvalError> {
    if scenario.pairs.is_empty() {
        return Err(EvalError::EmptyScenario);
    }
    let outcomes = score_pairs(scenario, exec);
    taus.iter().map(|&t| report_at(&outcomes, t)).collect()
}

/// `start:end:step`, inclusive of `end` when it lies on the grid.
pub fn parse_tau_range(range: &str) -> Result<Vec<f64>, EvalError> {
    let bad = || EvalError::BadRange(range.to_string());
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match parts.as_slice() {
        [v] if v.is_finite() => Ok(vec![*v]),
        [start, end, step] if step.is_finite() && *step > 0.0 && start.is_finite() && end >= start => {
            let n = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

/// Plain-text table with one row per threshold.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut out = String::from("# tau\tFAR%\tFRR%\taccuracy%\tF\tR\tS\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
            r.tau, r.far_percent, r.frr_percent, r.accuracy_percent, r.false_accepts, r.false_rejects, r.trials
        );
    }
    out
}

/// Decision for a single outcome at `tau`.
pub fn decision(outcome: &PairOutcome, tau: f64) -> Decision {
    if outcome.accepted(tau) {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_arithmetic() {
        assert_eq!(compute_far(0, 100).unwrap(), 0.0);
        assert_eq!(compute_far(5, 100).unwrap(), 5.0);
        assert_eq!(compute_far(7, 7).unwrap(), 100.0);
        assert!(matches!(compute_far(1, 0), Err(EvalError::ZeroTrials)));
        assert!(matches!(compute_far(3, 2), Err(EvalError::InvalidCounts { .. })));
    }

    #[test]
    fn tau_ranges() {
        assert_eq!(parse_tau_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_tau_range("0:30:0.5").unwrap().len(), 61);
        assert_eq!(parse_tau_range("12").unwrap(), vec![12.0]);
        assert!(parse_tau_range("3:1:1").is_err());
        assert!(parse_tau_range("0:1:0").is_err());
        assert!(parse_tau_range("a:b:c").is_err());
    }

    #[test]
    fn self_pairs_are_perfect() {
        let pairs: Vec<Pair> = (0..5)
            .map(|s| {
                let set = gen_synthetic_minutiae(&SynthConfig { seed: s, ..Default::default() }).unwrap();
                Pair { kind: PairKind::Genuine, probe: set.clone(), template: set }
            })
            .collect();
        let reports = run_eval(&Scenario { k: 5, pairs }, &[0.5], Execution::default()).unwrap();
        let r = reports[0];
        assert_eq!((r.false_accepts, r.false_rejects, r.accuracy_percent), (0, 0, 100.0));
    }

    #[test]
    fn distant_imposters_small_tau() {
        let sc = SyntheticScenario { genuine: 0, imposter: 20, seed: 2, ..Default::default() };
        let scenario = Scenario { k: 5, pairs: sc.generate().unwrap() };
        let r = run_eval(&scenario, &[1.0], Execution::default()).unwrap()[0];
        assert_eq!(r.far_percent, 0.0);
    }

    #[test]
    fn scenario_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let set = gen_synthetic_minutiae(&SynthConfig::default()).unwrap();
        fs::write(dir.path().join("a.min"), crate::minfile::serialize_minutiae(&set)).unwrap();
        let text = "# demo\nk 4\nsynthetic genuine=2 imposter=3 seed=9\ngenuine a.min a.min\n";
        let sc = Scenario::parse(text, dir.path()).unwrap();
        assert_eq!(sc.k, 4);
        assert_eq!(sc.pairs.len(), 6);
        assert_eq!(sc.pairs.iter().filter(|p| p.kind == PairKind::Imposter).count(), 3);
        assert!(matches!(Scenario::parse("# nothing\n", dir.path()), Err(EvalError::EmptyScenario)));
        assert!(matches!(Scenario::parse("bogus 1\n", dir.path()), Err(EvalError::Parse(1, _))));
        assert!(matches!(Scenario::parse("genuine missing.min a.min\n", dir.path()), Err(EvalError::Io(_))));
    }

    #[test]
    fn sweep_is_monotone_and_mode_independent() {
        let sc = SyntheticScenario { genuine: 20, imposter: 20, seed: 4, ..Default::default() };
        let scenario = Scenario { k: 5, pairs: sc.generate().unwrap() };
        let taus = parse_tau_range("0:40:2").unwrap();
        let par = run_eval(&scenario, &taus, Execution::Parallel).unwrap();
        let seq = run_eval(&scenario, &taus, Execution::Sequential).unwrap();
        assert_eq!(par, seq);
        for w in par.windows(2) {
            assert!(w[1].far_percent >= w[0].far_percent);
            assert!(w[1].false_rejects <= w[0].false_rejects);
        }
        let table = format_table(&par);
        assert_eq!(table.lines().count(), taus.len() + 1);
    }
}
