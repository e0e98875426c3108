//! Enrollment store: template records kept in memory and, optionally, in a
//! directory with a `manifest.txt` and one record file per template.
//!
//! Manifest lines are `id<TAB>index_key<TAB>file`, so bucket scans do not
//! need to open record files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::geometry::{MinutiaeSet, Point2};
use crate::graph::{compute_index, index_string, MinutiaeGraph};
use crate::minfile::{parse_minutiae, serialize_minutiae};
use crate::orientation::FingerprintClass;
use crate::par::Execution;
use crate::verify::{build_template, verify_against, PipelineError, Template, Verification};

pub const MANIFEST: &str = "manifest.txt";
const RECORD_MAGIC: &str = "REC1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("id {0:?} is already enrolled")]
    DuplicateId(String),
    #[error("id {0:?} is not enrolled")]
    UnknownId(String),
    #[error("id {0:?} is empty or contains whitespace")]
    InvalidId(String),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateRecord {
    pub id: String,
    pub class_label: Option<FingerprintClass>,
    pub template: Template,
    /// Seconds since the Unix epoch.
    pub enrolled_at: u64,
}

impl TemplateRecord {
    pub fn index_key(&self) -> &str {
        &self.template.index_key
    }

    pub fn to_text(&self) -> String {
        let t = &self.template;
        let mut out = format!(
            "{RECORD_MAGIC}\nid {}\nclass {}\nenrolled_at {}\nindex {}\ncentroids {}\n",
            self.id,
            self.class_label.map_or("-", FingerprintClass::name),
            self.enrolled_at,
            t.index_key,
            t.centroids.len()
        );
        for c in &t.centroids {
            // shortest round-trip form keeps centroids exact
            out.push_str(&format!("{} {}\n", c.x, c.y));
        }
        out.push_str(&format!("edges {}\n", t.graph.edge_count()));
        for (a, b) in t.graph.edges() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out.push_str("minutiae\n");
        out.push_str(std::str::from_utf8(&serialize_minutiae(&t.minutiae)).expect("MIN1 is UTF-8"));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StoreError> {
        let corrupt = |what: &str| StoreError::Corrupt(what.to_string());
        let mut lines = text.lines();
        // `field("")` returns the next raw line
        let mut field = |key: &str| -> Result<String, StoreError> {
            let line = lines.next().ok_or_else(|| corrupt(key))?;
            if key.is_empty() {
                return Ok(line.to_string());
            }
            if line == key {
                return Ok(String::new());
            }
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| corrupt(key))
        };
        if !field(RECORD_MAGIC)?.is_empty() {
            return Err(corrupt("header"));
        }
        let id = field("id")?;
        let class_label = match field("class")?.as_str() {
            "-" => None,
            s => Some(s.parse().map_err(|_| corrupt("class"))?),
        };
        let enrolled_at = field("enrolled_at")?.parse().map_err(|_| corrupt("enrolled_at"))?;
        let index_key = field("index")?;
        let k: usize = field("centroids")?.parse().map_err(|_| corrupt("centroids"))?;
        let mut centroids = Vec::with_capacity(k);
        for _ in 0..k {
            let line = field("")?;
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => centroids.push(Point2::new(x, y)),
                _ => return Err(corrupt("centroid")),
            }
        }
        let m: usize = field("edges")?.parse().map_err(|_| corrupt("edges"))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = field("")?;
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => return Err(corrupt("edge")),
            }
        }
        field("minutiae")?;
        let rest: Vec<&str> = lines.collect();
        let minutiae = parse_minutiae(rest.join("\n").as_bytes(), &id)
            .map_err(|e| StoreError::Corrupt(format!("minutiae: {e}")))?;
        let graph = MinutiaeGraph::from_edges(k, edges).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let index = compute_index(&graph);
        if index_string(&index) != index_key {
            return Err(corrupt("index key does not match graph"));
        }
        Ok(TemplateRecord {
            id,
            class_label,
            template: Template {
                centroids,
                graph,
                index,
                index_key,
                minutiae,
            },
            enrolled_at,
        })
    }
}

/// Maps ids onto file names that are safe on any filesystem.
fn record_file_name(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let hash = id.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
    format!("{safe}-{:08x}.rec", hash as u32)
}

#[derive(Debug, Default)]
pub struct Store {
    dir: Option<PathBuf>,
    records: BTreeMap<String, TemplateRecord>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens the store in `dir`, creating the directory if needed.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut records = BTreeMap::new();
        let manifest = dir.join(MANIFEST);
        if manifest.exists() {
            for (no, line) in fs::read_to_string(&manifest)?.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let parts: Vec<&str> = line.split('\t').collect();
                let [id, key, file] = parts.as_slice() else {
                    return Err(StoreError::Corrupt(format!("manifest line {}", no + 1)));
                };
                let rec = TemplateRecord::from_text(&fs::read_to_string(dir.join(file))?)?;
                if rec.id != *id || rec.index_key() != *key {
                    return Err(StoreError::Corrupt(format!("manifest line {} disagrees with {file}", no + 1)));
                }
                records.insert(rec.id.clone(), rec);
            }
        }
        Ok(Self { dir: Some(dir), records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TemplateRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &TemplateRecord> {
        self.records.values()
    }

    /// Builds and stores the template of `set` under `id`.
    pub fn enroll(
        &mut self,
        id: &str,
        set: &MinutiaeSet,
        k: usize,
        class_label: Option<FingerprintClass>,
    ) -> Result<&TemplateRecord, StoreError> {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        if self.records.contains_key(id) {
            return Err(StoreError::DuplicateId(id.to_string()));
        }
        let mut template = build_template(set, k, None)?;
        // keep the in-memory record equal to what a reload produces
        template.minutiae = parse_minutiae(&serialize_minutiae(&template.minutiae), id)
            .map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let enrolled_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let record = TemplateRecord {
            id: id.to_string(),
            class_label,
            template,
            enrolled_at,
        };
        if let Some(dir) = &self.dir {
            fs::write(dir.join(record_file_name(id)), record.to_text())?;
        }
        self.records.insert(id.to_string(), record);
        self.write_manifest()?;
        Ok(&self.records[id])
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut text = String::new();
        for r in self.records.values() {
            text.push_str(&format!("{}\t{}\t{}\n", r.id, r.index_key(), record_file_name(&r.id)));
        }
        let tmp = dir.join(format!("{MANIFEST}.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(tmp, dir.join(MANIFEST))?;
        Ok(())
    }

    pub fn verify(&self, probe: &MinutiaeSet, claimed_id: &str, tau: f64) -> Result<Verification, StoreError> {
        let rec = self
            .records
            .get(claimed_id)
            .ok_or_else(|| StoreError::UnknownId(claimed_id.to_string()))?;
        Ok(verify_against(probe, &rec.template, tau)?)
    }

    pub fn identify(&self, probe: &MinutiaeSet, tau: f64) -> Result<Vec<(String, Verification)>, StoreError> {
        self.identify_with(probe, tau, Execution::default())
    }

    /// Scores every record whose index key equals the probe's (computed
    /// with that record's cluster count), best modified Hausdorff distance
    /// first.
    pub fn identify_with(
        &self,
        probe: &MinutiaeSet,
        tau: f64,
        exec: Execution,
    ) -> Result<Vec<(String, Verification)>, StoreError> {
        let mut probe_keys: BTreeMap<usize, Option<String>> = BTreeMap::new();
        for r in self.records.values() {
            let k = r.template.centroids.len();
            if let std::collections::btree_map::Entry::Vacant(e) = probe_keys.entry(k) {
                let key = match build_template(probe, k, None) {
                    Ok(t) => Some(t.index_key),
                    Err(PipelineError::Cluster(crate::cluster::ClusterError::TooFewPoints { .. })) => None,
                    Err(err) => return Err(err.into()),
                };
                e.insert(key);
            }
        }
        let candidates: Vec<&TemplateRecord> = self
            .records
            .values()
            .filter(|r| probe_keys[&r.template.centroids.len()].as_deref() == Some(r.index_key()))
            .collect();
        let scored = exec.map(&candidates, |r| {
            verify_against(probe, &r.template, tau).map(|v| (r.id.clone(), v))
        });
        let mut out = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
        out.sort_by(|a, b| a.1.score.mhd.total_cmp(&b.1.score.mhd).then(a.0.cmp(&b.0)));
        Ok(out)
    }
}
