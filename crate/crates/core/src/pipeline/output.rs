use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Output directory that remembers the files written into it, in order.
pub(crate) struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }

    fn open(&mut self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.written.push(path.clone());
        Ok((path, BufWriter::new(file)))
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let (path, out) = self.open(name)?;
        let err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&path, io),
            other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, records: impl IntoIterator<Item = T>) -> Result<()> {
        let (path, mut out) = self.open(name)?;
        for r in records {
            serde_json::to_writer(&mut out, &r).map_err(|e| Error::InvalidInput(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let (path, mut out) = self.open(name)?;
        serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        out.flush().map_err(|e| Error::io(&path, e))
    }
}
