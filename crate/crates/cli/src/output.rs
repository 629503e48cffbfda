use crate::error::CliError;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Collects the files of one run and writes the manifest at the end.
/// Data files carry the seed and config hash on every row; the manifest
/// carries their checksums so reruns can be compared byte for byte.
pub struct RunDir {
    pub dir: PathBuf,
    seed: u64,
    config_hash: String,
    files: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(dir: &Path, seed: u64, config_hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            seed,
            config_hash: config_hash.to_string(),
            files: Vec::new(),
        })
    }

    /// Write a CSV with the given column names; every row is extended with
    /// the run's seed and config hash.
    pub fn write_csv(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        let mut header: Vec<&str> = columns.to_vec();
        header.extend(["seed", "config_hash"]);
        w.write_record(&header).map_err(|e| CliError(e.to_string()))?;
        for row in rows {
            assert_eq!(row.len(), columns.len(), "row width mismatch in {name}");
            let mut full = row.clone();
            full.push(self.seed.to_string());
            full.push(self.config_hash.clone());
            w.write_record(&full).map_err(|e| CliError(e.to_string()))?;
        }
        w.flush()?;
        self.register(name)?;
        Ok(())
    }

    /// Write the summary JSON. Keys are sorted by the serializer, so the
    /// bytes are reproducible.
    pub fn write_summary(&mut self, summary: &Value) -> Result<(), CliError> {
        let path = self.dir.join("summary.json");
        fs::write(&path, format!("{}\n", serde_json::to_string_pretty(summary).unwrap()))?;
        self.register("summary.json")?;
        Ok(())
    }

    fn register(&mut self, name: &str) -> Result<(), CliError> {
        let digest = sha256_file(&self.dir.join(name))?;
        self.files.push((name.to_string(), digest));
        Ok(())
    }

    /// Write manifest.json. Wall clock and worker count describe the run;
    /// they are not part of any checksum.
    pub fn write_manifest(&self, wall_seconds: f64, workers: usize) -> Result<(), CliError> {
        let mut files = Map::new();
        for (name, digest) in &self.files {
            files.insert(name.clone(), Value::String(digest.clone()));
        }
        let manifest = serde_json::json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "workers": workers,
            "wall_clock_seconds": wall_seconds,
            "files": Value::Object(files),
        });
        fs::write(
            self.dir.join("manifest.json"),
            format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
        )?;
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Decimal cell for a float. `{}` on f64 prints the shortest string that
/// parses back to the same bits, so CSV bytes are a pure function of the
/// computed values.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
