//! Experiment directory layout, atomic writes and the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vcmc::evaluation::{Algorithm, SuiteTag};
use vcmc::samplers::io::SampleFormat;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.json";
pub const REFERENCE_DIR: &str = "reference";

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

pub fn k_dir(k: usize) -> String {
    format!("K{k:03}")
}

pub fn part_file(dir: &str, index: usize, format: SampleFormat) -> String {
    format!("{dir}/part_{index:04}.{}", format.extension())
}

pub fn samples_dir(k: usize) -> String {
    format!("{}/samples", k_dir(k))
}

pub fn weights_file(k: usize, alg: Algorithm) -> String {
    format!("{}/weights/{}.json", k_dir(k), alg.as_str())
}

pub fn trace_file(k: usize) -> String {
    format!("{}/trace_vcmc.csv", k_dir(k))
}

pub fn aggregated_file(k: usize, alg: Algorithm, format: SampleFormat) -> String {
    format!("{}/aggregated/{}.{}", k_dir(k), alg.as_str(), format.extension())
}

pub fn report_file(k: usize, alg: Algorithm, suite: SuiteTag, ext: &str) -> String {
    format!("{}/reports/{}__{}.{ext}", k_dir(k), alg.as_str(), suite.as_str())
}

pub fn comparison_file(suite: SuiteTag) -> String {
    format!("comparison_{}.csv", suite.as_str())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seeds: Vec<u64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    /// Keyed by sample directory.
    pub samples: BTreeMap<String, SampleRecord>,
    /// Seconds per stage, keyed `K010/optimization` and similar.
    pub stages: BTreeMap<String, f64>,
    /// Every file written, keyed by path relative to the experiment root.
    pub files: BTreeMap<String, FileRecord>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Manifest {
            schema_version: crate::config::SCHEMA_VERSION,
            config_hash: cfg.hash(),
            seed: cfg.seed,
            samples: BTreeMap::new(),
            stages: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}

/// Writes files under an experiment root and records them in the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
    pub manifest: Manifest,
}

impl OutputDir {
    /// Opens `root`, continuing an existing manifest from the same config.
    pub fn open(root: &Path, cfg: &ExperimentConfig, force: bool) -> Result<Self> {
        let manifest = match Manifest::load(root) {
            Ok(m) if m.config_hash == cfg.hash() => m,
            Ok(_) if !force => {
                return Err(CliError::Invalid(format!(
                    "{} holds results of a different configuration; pass --force to overwrite",
                    root.display()
                )))
            }
            _ => Manifest::new(cfg),
        };
        let out = OutputDir {
            root: root.to_path_buf(),
            force,
            manifest,
        };
        out.write_unrecorded(CONFIG_COPY, cfg.canonical_json().as_bytes())?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn check_target(&self, rel: &str) -> Result<PathBuf> {
        let path = self.path(rel);
        if path.exists() && !self.force {
            return Err(CliError::Exists(path));
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        Ok(path)
    }

    /// Runs `write` against a temporary sibling, then renames it into place.
    pub fn write_with<F>(&mut self, rel: &str, write: F) -> Result<()>
    where
        F: FnOnce(&Path) -> Result<()>,
    {
        let path = self.check_target(rel)?;
        let tmp = tmp_path(&path);
        if let Err(e) = write(&tmp) {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        let bytes = fs::metadata(&path).map_err(|e| CliError::io(&path, e))?.len();
        self.manifest.files.insert(
            rel.to_string(),
            FileRecord {
                sha256: sha256_file(&path)?,
                bytes,
            },
        );
        Ok(())
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        self.write_with(rel, |tmp| fs::write(tmp, bytes).map_err(|e| CliError::io(tmp, e)))
    }

    fn write_unrecorded(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        atomic_write(&self.path(rel), bytes)
    }

    /// Persists the manifest. Call once every file is written.
    pub fn finish(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        self.write_unrecorded(MANIFEST, text.as_bytes())
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let tmp = tmp_path(path);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Whether `root` holds anything at all.
pub fn is_nonempty(root: &Path) -> bool {
    fs::read_dir(root).map(|mut it| it.next().is_some()).unwrap_or(false)
}

/// Removes the entries a previous run may have produced: the manifest,
/// the config copy, the reference and `K…` directories, and comparison
/// tables. Anything else is left alone.
pub fn clear_generated(root: &Path) -> Result<()> {
    let Ok(entries) = fs::read_dir(root) else {
        return Ok(());
    };
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(root, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = entry.path();
        let generated_dir = name == REFERENCE_DIR
            || (name.len() > 1 && name.starts_with('K') && name[1..].bytes().all(|b| b.is_ascii_digit()));
        let generated_file = name == MANIFEST || name == CONFIG_COPY || (name.starts_with("comparison_") && name.ends_with(".csv"));
        if generated_dir && path.is_dir() {
            fs::remove_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        } else if generated_file && path.is_file() {
            fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_names() {
        assert_eq!(k_dir(5), "K005");
        assert_eq!(part_file("K005/samples", 3, SampleFormat::Csv), "K005/samples/part_0003.csv");
        assert_eq!(report_file(10, Algorithm::Vcmc, SuiteTag::FirstMoments, "json"), "K010/reports/vcmc__first_moments.json");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        atomic_write(&p, b"hello").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"hello");
        let names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn clear_keeps_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        for d in ["K010/samples", "reference", "notes"] {
            fs::create_dir_all(dir.path().join(d)).unwrap();
        }
        fs::write(dir.path().join("manifest.json"), "{}").unwrap();
        fs::write(dir.path().join("comparison_first_moments.csv"), "").unwrap();
        fs::write(dir.path().join("mine.txt"), "").unwrap();
        clear_generated(dir.path()).unwrap();
        let mut left: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        left.sort();
        assert_eq!(left, vec!["mine.txt", "notes"]);
    }
}
