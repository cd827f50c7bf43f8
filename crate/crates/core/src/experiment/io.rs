//! Files written and read by the experiments: waveform fixtures, CSV tables,
//! JSON records and the run manifest.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::buffer::{ComplexBuffer, RealBuffer};
use crate::error::{Error, Result};

const WAVEFORM_MAGIC: &str = "cvqkd-waveform";

/// Header line of a waveform fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformHeader {
    pub rate: f64,
    pub len: usize,
    /// 2 for interleaved I/Q, 1 for a real trace.
    pub channels: usize,
    pub seed_id: String,
}

fn write_fixture(path: &Path, header: &WaveformHeader, values: impl Iterator<Item = f32>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "{WAVEFORM_MAGIC} rate={} len={} channels={} seed={}",
        header.rate, header.len, header.channels, header.seed_id
    )?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_complex_waveform(path: &Path, buf: &ComplexBuffer, seed_id: &str) -> Result<()> {
    let h = WaveformHeader { rate: buf.rate, len: buf.len(), channels: 2, seed_id: seed_id.to_string() };
    write_fixture(path, &h, buf.samples.iter().flat_map(|z| [z.re as f32, z.im as f32]))
}

pub fn write_real_waveform(path: &Path, buf: &RealBuffer, seed_id: &str) -> Result<()> {
    let h = WaveformHeader { rate: buf.rate, len: buf.len(), channels: 1, seed_id: seed_id.to_string() };
    write_fixture(path, &h, buf.samples.iter().map(|&v| v as f32))
}

fn parse_header(line: &str) -> Result<WaveformHeader> {
    let bad = |why: &str| Error::Format(format!("waveform header `{}`: {why}", line.trim_end()));
    let mut parts = line.split_whitespace();
    if parts.next() != Some(WAVEFORM_MAGIC) {
        return Err(bad("missing magic"));
    }
    let (mut rate, mut len, mut channels, mut seed_id) = (None, None, None, String::new());
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        match k {
            "rate" => rate = v.parse::<f64>().ok(),
            "len" => len = v.parse::<usize>().ok(),
            "channels" => channels = v.parse::<usize>().ok(),
            "seed" => seed_id = v.to_string(),
            _ => return Err(bad("unknown key")),
        }
    }
    let rate = rate.filter(|r| *r > 0.0).ok_or_else(|| bad("rate"))?;
    let channels = channels.filter(|c| *c == 1 || *c == 2).ok_or_else(|| bad("channels"))?;
    Ok(WaveformHeader { rate, len: len.ok_or_else(|| bad("len"))?, channels, seed_id })
}

pub fn read_waveform(path: &Path) -> Result<(WaveformHeader, Vec<f32>)> {
    let mut r = BufReader::new(fs::File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let h = parse_header(&line)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let want = h.len * h.channels * 4;
    if bytes.len() != want {
        return Err(Error::Format(format!("{}: {} payload bytes, header implies {want}", path.display(), bytes.len())));
    }
    let vals = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok((h, vals))
}

pub fn read_complex_waveform(path: &Path) -> Result<ComplexBuffer> {
    let (h, v) = read_waveform(path)?;
    if h.channels != 2 {
        return Err(Error::Format(format!("{}: expected I/Q, found {} channel", path.display(), h.channels)));
    }
    ComplexBuffer::new(v.chunks_exact(2).map(|c| Complex64::new(c[0] as f64, c[1] as f64)).collect(), h.rate)
}

pub fn read_real_waveform(path: &Path) -> Result<RealBuffer> {
    let (h, v) = read_waveform(path)?;
    if h.channels != 1 {
        return Err(Error::Format(format!("{}: expected a real trace, found {} channels", path.display(), h.channels)));
    }
    RealBuffer::new(v.into_iter().map(f64::from).collect(), h.rate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

/// Manifest written next to the artifacts of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub kind: Option<String>,
    pub seed: String,
    pub scale: f64,
    pub config_sha256: String,
    pub artifacts: Vec<ArtifactEntry>,
    pub notes: Vec<String>,
}

/// Collects the files of one run in an output directory.
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
    notes: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), entries: Vec::new(), notes: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str, bytes: &[u8], rows: usize) -> Result<()> {
        fs::write(self.path(name), bytes)?;
        self.register(name, rows)
    }

    /// Adds a file already written into the directory.
    pub fn register(&mut self, name: &str, rows: usize) -> Result<()> {
        let bytes = fs::read(self.path(name))?;
        self.entries.retain(|e| e.file != name);
        self.entries.push(ArtifactEntry { file: name.to_string(), sha256: sha256_hex(&bytes), rows });
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        self.record(name, &bytes, rows.len())
    }

    /// One JSON document per line.
    pub fn jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<()> {
        let mut out = Vec::new();
        for r in records {
            serde_json::to_writer(&mut out, r).map_err(|e| Error::Format(e.to_string()))?;
            out.push(b'\n');
        }
        self.record(name, &out, records.len())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        out.push(b'\n');
        self.record(name, &out, 1)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.entries
    }

    /// Writes `manifest.json`; everything in it is a function of config,
    /// seed and scale.
    pub fn finish(self, command: &str, kind: Option<&str>, seed: &str, scale: f64, config_text: &str) -> Result<Manifest> {
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            kind: kind.map(str::to_string),
            seed: seed.to_string(),
            scale,
            config_sha256: sha256_hex(config_text.as_bytes()),
            artifacts: self.entries,
            notes: self.notes,
        };
        let mut out = serde_json::to_vec_pretty(&m).map_err(|e| Error::Format(e.to_string()))?;
        out.push(b'\n');
        fs::write(self.dir.join("manifest.json"), out)?;
        Ok(m)
    }
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    r.deserialize().map(|row| row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = parse_header("cvqkd-waveform rate=1000000000 len=3 channels=2 seed=ab12\n").unwrap();
        assert_eq!(h, WaveformHeader { rate: 1e9, len: 3, channels: 2, seed_id: "ab12".into() });
        assert!(parse_header("wave rate=1 len=1 channels=2").is_err());
        assert!(parse_header("cvqkd-waveform rate=1 len=1 channels=3").is_err());
        assert!(parse_header("cvqkd-waveform rate=1 len=1 channels=1 colour=red").is_err());
    }
}
