//! CSV files plus `.meta.json` sidecars.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::rates::RateFunction;

/// Everything needed to re-run the experiment that produced a file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub experiment: &'static str,
    pub file: String,
    pub seed: u64,
    pub version: &'static str,
    pub rate_head: &'a [f64],
    pub columns: Vec<String>,
    pub config: &'a ExperimentConfig,
    /// Experiment-specific values (e.g. `gamma` for plot markers).
    pub extra: Value,
}

pub(crate) struct Writer<'a> {
    pub dir: PathBuf,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub rate: &'a RateFunction,
    pub config: &'a ExperimentConfig,
    pub written: Vec<PathBuf>,
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

impl<'a> Writer<'a> {
    pub fn new(
        dir: &Path,
        kind: ExperimentKind,
        seed: u64,
        rate: &'a RateFunction,
        config: &'a ExperimentConfig,
    ) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            kind,
            seed,
            rate,
            config,
            written: Vec::new(),
        })
    }

    fn sidecar(&mut self, path: &Path, columns: Vec<String>, extra: Value) -> Result<()> {
        let meta = Metadata {
            experiment: self.kind.name(),
            file: path.file_name().unwrap().to_string_lossy().into_owned(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            rate_head: self.rate.head(),
            columns,
            config: self.config,
            extra,
        };
        let mp = meta_path(path);
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        fs::write(&mp, text)?;
        self.written.push(mp);
        Ok(())
    }

    /// Writes `name` with `header` and one record per row, plus its sidecar.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        header: &[String],
        rows: impl IntoIterator<Item = R>,
        extra: Value,
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(BufWriter::new(File::create(&path)?));
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        self.sidecar(&path, header.to_vec(), extra)?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&json!({
            "experiment": self.kind.name(),
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "rate_head": self.rate.head(),
            "config": self.config,
            "result": value,
        }))?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a CSV through a caller-supplied writer (for formats that
    /// already know their columns).
    pub fn raw_csv(
        &mut self,
        name: &str,
        columns: Vec<String>,
        extra: Value,
        body: impl FnOnce(BufWriter<File>) -> Result<()>,
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        body(BufWriter::new(File::create(&path)?))?;
        self.written.push(path.clone());
        self.sidecar(&path, columns, extra)?;
        Ok(path)
    }
}

pub(crate) fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
