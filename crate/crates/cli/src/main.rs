//! `fpverify` command line tool.
//!
//! Exit status: 0 success or Accept, 1 Reject, 2 usage error, 3 data error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fpverify::eval::{format_table, parse_tau_range, run_eval, Scenario};
use fpverify::graph::nn_tie_gap;
use fpverify::hausdorff::DEFAULT_TAU;
use fpverify::minfile::{parse_minutiae, serialize_minutiae};
use fpverify::orientation::{features_from_image, DEFAULT_TAU_SEG};
use fpverify::pgm::{read_pgm, write_pgm};
use fpverify::som::{train_msom, train_som, SomMap, TrainConfig};
use fpverify::store::Store;
use fpverify::synth::{gen_synthetic_minutiae, gen_synthetic_orientation, render_field, SynthConfig};
use fpverify::verify::Verification;
use fpverify::{dist_matrix, kmeans_fing, Decision, Execution, FingerprintClass, MinutiaeSet};

#[derive(Parser)]
#[command(name = "fpverify", version, about = "Fingerprint enrollment, verification and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enroll a MIN1 minutiae file under an id.
    Enroll {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        class: Option<FingerprintClass>,
        file: PathBuf,
    },
    /// Verify a probe against one enrolled id.
    Verify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        file: PathBuf,
    },
    /// Score a probe against every record in its index bucket.
    Identify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        file: PathBuf,
    },
    /// Classify a PGM image with a trained map.
    Classify {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        msom: bool,
        image: PathBuf,
    },
    /// Train a map from a list of `image.pgm Class` lines.
    Train {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        msom: bool,
        list: PathBuf,
    },
    /// Run a scenario file and write a threshold table.
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "0:30:0.5")]
        taus: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write synthetic data.
    Synth {
        kind: SynthKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "left-loop")]
        class: FingerprintClass,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Minutiae,
    Field,
}

/// Errors in the input data, as opposed to bad command lines.
const DATA_ERROR: u8 = 3;

fn read_min(path: &Path) -> Result<MinutiaeSet> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_minutiae(&bytes, &id).with_context(|| format!("parsing {}", path.display()))
}

fn radius_gap(set: &MinutiaeSet) -> f64 {
    let Some(points) = set.core_relative_positions(None) else { return f64::INFINITY };
    let mut r: Vec<f64> = points.iter().map(|p| p.norm()).collect();
    r.sort_by(f64::total_cmp);
    r.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Near-equal radii or centroid distances make the index depend on rounding.
fn warn_ties(set: &MinutiaeSet, k: usize) {
    let radial = radius_gap(set);
    let nn = kmeans_fing(set, k, None).map_or(f64::INFINITY, |c| nn_tie_gap(&dist_matrix(&c.centroids)));
    if radial <= 1e-6 || nn <= 1e-6 {
        eprintln!("warning: near tie (radius gap {radial:.2e}, neighbour gap {nn:.2e}); the index may change under rotation");
    }
}

fn print_verification(v: &Verification) {
    for g in &v.trace {
        println!("  {:<12} {}  {}", g.gate.to_string(), if g.passed { "pass" } else { "fail" }, g.detail);
    }
    println!(
        "  hausdorff {:.4}  mhd {:.4}  rotation {:.4} rad",
        v.score.hausdorff, v.score.mhd, v.alignment
    );
}

fn decision_code(d: Decision) -> ExitCode {
    match d {
        Decision::Accept => ExitCode::SUCCESS,
        Decision::Reject => ExitCode::from(1),
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Enroll { store, id, k, class, file } => {
            let set = read_min(&file)?;
            warn_ties(&set, k);
            let mut store = Store::open(&store)?;
            let rec = store.enroll(&id, &set, k, class)?;
            println!("enrolled {} {}", rec.id, rec.index_key());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { store, id, tau, file } => {
            let probe = read_min(&file)?;
            let v = Store::open(&store)?.verify(&probe, &id, tau)?;
            println!("{}", if v.decision == Decision::Accept { "ACCEPT" } else { "REJECT" });
            print_verification(&v);
            Ok(decision_code(v.decision))
        }
        Command::Identify { store, tau, file } => {
            let probe = read_min(&file)?;
            let hits = Store::open(&store)?.identify(&probe, tau)?;
            if hits.is_empty() {
                println!("no candidates in the probe's index bucket");
            }
            for (id, v) in &hits {
                println!("{id}\t{:.4}\t{}", v.score.mhd, if v.decision == Decision::Accept { "accept" } else { "reject" });
            }
            Ok(decision_code(hits.first().map_or(Decision::Reject, |h| h.1.decision)))
        }
        Command::Classify { map, msom, image } => {
            let text = fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let map = SomMap::from_text(&text)?;
            let img = read_pgm(&fs::read(&image).with_context(|| format!("reading {}", image.display()))?)?;
            let (fv, core) = features_from_image(&img, DEFAULT_TAU_SEG)?;
            let c = map.classify(&fv.directions, msom.then_some(fv.certainties.as_slice()))?;
            println!("{}\tnode {}\tcore ({:.0}, {:.0})", c.class, c.node, core.x, core.y);
            Ok(ExitCode::SUCCESS)
        }
        Command::Train { out, m, epochs, seed, msom, list } => {
            let listing = fs::read_to_string(&list).with_context(|| format!("reading {}", list.display()))?;
            let base = list.parent().unwrap_or(Path::new("."));
            let mut vectors = Vec::new();
            for (no, line) in listing.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((path, class)) = line.rsplit_once(char::is_whitespace) else {
                    bail!("{}:{}: expected `image.pgm Class`", list.display(), no + 1);
                };
                let class: FingerprintClass = class
                    .parse()
                    .map_err(|e| anyhow::anyhow!("{}:{}: {e}", list.display(), no + 1))?;
                let path = base.join(path.trim());
                let img = read_pgm(&fs::read(&path).with_context(|| format!("reading {}", path.display()))?)?;
                vectors.push(features_from_image(&img, DEFAULT_TAU_SEG)?.0.with_label(Some(class)));
            }
            let cfg = TrainConfig { epochs, seed, ..Default::default() };
            let map = if msom { train_msom(&vectors, m, &cfg)? } else { train_som(&vectors, m, &cfg)? };
            fs::write(&out, map.to_text()).with_context(|| format!("writing {}", out.display()))?;
            println!("trained {m}x{m} map on {} images", vectors.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { scenario, taus, out } => {
            let taus = parse_tau_range(&taus)?;
            let text = fs::read_to_string(&scenario).with_context(|| format!("reading {}", scenario.display()))?;
            let sc = Scenario::parse(&text, scenario.parent().unwrap_or(Path::new(".")))?;
            let reports = run_eval(&sc, &taus, Execution::default())?;
            let table = format_table(&reports);
            match out {
                Some(path) => fs::write(&path, &table).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { kind, seed, class, radius, n, out } => {
            let defaults = SynthConfig::default();
            let cfg = SynthConfig {
                seed,
                class,
                n_minutiae: n,
                disk_radius: radius.unwrap_or(match kind {
                    SynthKind::Minutiae => defaults.disk_radius,
                    SynthKind::Field => 200.0,
                }),
                ..defaults
            };
            let bytes = match kind {
                SynthKind::Minutiae => serialize_minutiae(&gen_synthetic_minutiae(&cfg)?),
                SynthKind::Field => write_pgm(&render_field(&gen_synthetic_orientation(&cfg).0)),
            };
            fs::write(&out, bytes).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(DATA_ERROR)
        }
    }
}
