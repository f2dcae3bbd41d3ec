use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    draw_scenario, reverse_measurements, simulate_path, Direction, PathError, PathLabel, PathOptions, PathRecord,
    ScenarioKind, TerminalReason,
};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusConfig {
    pub branches: usize,
    pub curves: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub max_failure_rate: f64,
    pub path: PathOptions,
}

impl CorpusConfig {
    /// 100 + 100 paths with an 80/20 split.
    pub fn desk(seed: u64) -> Self {
        Self::per_class(100, seed)
    }

    /// 1000 + 1000 paths with an 800/200 split.
    pub fn paper(seed: u64) -> Self {
        Self::per_class(1000, seed)
    }

    pub fn per_class(n: usize, seed: u64) -> Self {
        Self {
            branches: n,
            curves: n,
            train_fraction: 0.8,
            seed,
            max_failure_rate: 0.05,
            path: PathOptions::default(),
        }
    }

    fn validate(&self) -> Result<(), PathError> {
        if self.branches < 10 || self.curves < 10 {
            return Err(PathError::InvalidScenario(
                "a corpus needs at least 10 paths per class".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(PathError::InvalidScenario(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub file: String,
    pub label: PathLabel,
    pub direction: Direction,
    pub split: Split,
    pub seed: u64,
    pub terminal_reason: TerminalReason,
    pub samples: usize,
    pub transit_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub branches: usize,
    pub curves: usize,
    pub train_fraction: f64,
    pub dt_ms: f64,
    pub sample_ms: f64,
    pub h_fine_um: f64,
    pub entries: Vec<CorpusEntry>,
    /// Seeds whose paths ended in solver failures and were redrawn.
    pub failed_seeds: Vec<u64>,
}

impl Manifest {
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }

    pub fn read(text: &str) -> Result<Self, PathError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| PathError::Format(e.to_string()))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(PathError::Format(format!(
                "unsupported manifest format version {}",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn failure_rate(&self) -> f64 {
        let done = self.branches + self.curves;
        self.failed_seeds.len() as f64 / (done + self.failed_seeds.len()) as f64
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: Manifest,
    /// One record per manifest entry, in the same order. Test branch paths
    /// appear a second time reversed.
    pub records: Vec<PathRecord>,
}

impl Corpus {
    fn select(&self, split: Split) -> Vec<&PathRecord> {
        self.manifest
            .entries
            .iter()
            .zip(&self.records)
            .filter(|(e, _)| e.split == split)
            .map(|(_, r)| r)
            .collect()
    }

    /// Forward paths only.
    pub fn train(&self) -> Vec<&PathRecord> {
        self.select(Split::Train)
    }

    /// Forward paths of both classes plus reversed branch paths.
    pub fn test(&self) -> Vec<&PathRecord> {
        self.select(Split::Test)
    }

    /// Writes one file per forward path plus the manifest.
    pub fn save(&self, dir: &Path) -> Result<(), PathError> {
        fs::create_dir_all(dir)?;
        for (entry, rec) in self.manifest.entries.iter().zip(&self.records) {
            if entry.direction == Direction::Forward {
                rec.save(&dir.join(&entry.file))?;
            }
        }
        let mut f = std::io::BufWriter::new(fs::File::create(dir.join(MANIFEST_FILE))?);
        self.manifest.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, PathError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let manifest = Manifest::read(&text)?;
        let mut records = Vec::with_capacity(manifest.entries.len());
        for e in &manifest.entries {
            let rec = PathRecord::load(&dir.join(&e.file))?;
            records.push(match e.direction {
                Direction::Forward => rec,
                Direction::Reverse => reverse_measurements(&rec),
            });
        }
        Ok(Self { manifest, records })
    }
}

/// Simulates a seeded corpus. Paths that end in a solver failure are
/// redrawn with the next seed of their class stream; the call fails when
/// the failure rate exceeds `max_failure_rate`. `progress` sees every
/// accepted forward path.
pub fn generate_corpus(
    config: &CorpusConfig,
    mut progress: impl FnMut(&CorpusEntry, &PathRecord),
) -> Result<Corpus, PathError> {
    config.validate()?;
    let mut entries = Vec::new();
    let mut failed = Vec::new();
    let mut records = Vec::new();
    let mut reversed = Vec::new();
    let total = config.branches + config.curves;
    for (stream, kind, count, name) in [
        (0u64, ScenarioKind::Branch, config.branches, "branch"),
        (1u64, ScenarioKind::Curve, config.curves, "curve"),
    ] {
        let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
        seeds.set_stream(stream);
        let n_train = ((count as f64) * config.train_fraction).round() as usize;
        for i in 0..count {
            let record = loop {
                let seed = seeds.next_u64();
                let rec = simulate_path(&draw_scenario(kind, seed), &config.path)?;
                if rec.terminal_reason != TerminalReason::SolverFailure {
                    break rec;
                }
                failed.push(seed);
                let attempts = total + failed.len();
                if failed.len() as f64 > config.max_failure_rate * total as f64 {
                    return Err(PathError::Corpus {
                        failures: failed.len(),
                        attempts,
                    });
                }
            };
            let split = if i < n_train { Split::Train } else { Split::Test };
            let id = format!("{name}_{i:04}");
            let entry = CorpusEntry {
                file: format!("{id}.path"),
                id,
                label: record.label,
                direction: Direction::Forward,
                split,
                seed: record.scenario.seed,
                terminal_reason: record.terminal_reason,
                samples: record.samples.len(),
                transit_ms: record.duration_ms(),
            };
            progress(&entry, &record);
            if split == Split::Test && kind == ScenarioKind::Branch {
                let rev = reverse_measurements(&record);
                reversed.push((
                    CorpusEntry {
                        id: format!("{}_rev", entry.id),
                        direction: Direction::Reverse,
                        ..entry.clone()
                    },
                    rev,
                ));
            }
            entries.push(entry);
            records.push(record);
        }
    }
    for (entry, rec) in reversed {
        entries.push(entry);
        records.push(rec);
    }
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        seed: config.seed,
        branches: config.branches,
        curves: config.curves,
        train_fraction: config.train_fraction,
        dt_ms: config.path.dt_ms,
        sample_ms: config.path.sample_ms,
        h_fine_um: config.path.mesh.h_fine,
        entries,
        failed_seeds: failed,
    };
    Ok(Corpus { manifest, records })
}
