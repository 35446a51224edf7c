//! Per-partition sample files.
//!
//! CSV layout: a header line `model,d,K,k,T,seed,dim`, one line of header
//! values, then `T` lines of `dim` comma-separated values (shortest
//! round-trip decimal form).
//!
//! Binary layout (little endian): magic `VCMCSMP1`, `u8` model tag
//! (0 probit, 1 niw, 2 mixture), `u32 d`, `u32 K`, `u32 k`, `u64 T`,
//! `u64 seed`, `u32 dim`, then `T·dim` `f64` values row-major.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::models::ModelTag;

const MAGIC: &[u8; 8] = b"VCMCSMP1";
const CSV_HEADER: &str = "model,d,K,k,T,seed,dim";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Csv,
    Binary,
}

impl SampleFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            SampleFormat::Csv => "csv",
            SampleFormat::Binary => "bin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFileHeader {
    pub model: ModelTag,
    pub d: usize,
    pub partitions: usize,
    pub index: usize,
    pub draws: usize,
    pub seed: u64,
    pub dim: usize,
}

fn tag_byte(tag: ModelTag) -> u8 {
    match tag {
        ModelTag::Probit => 0,
        ModelTag::NormalInverseWishart => 1,
        ModelTag::GaussianMixture => 2,
    }
}

fn byte_tag(b: u8) -> Result<ModelTag> {
    match b {
        0 => Ok(ModelTag::Probit),
        1 => Ok(ModelTag::NormalInverseWishart),
        2 => Ok(ModelTag::GaussianMixture),
        other => Err(Error::Format(format!("unknown model tag byte {other}"))),
    }
}

pub fn write_samples(path: &Path, header: &SampleFileHeader, draws: &Draws, format: SampleFormat) -> Result<()> {
    if header.draws != draws.len() || header.dim != draws.dim() {
        return Err(Error::Format("sample header does not describe the draws".into()));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    match format {
        SampleFormat::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                header.model.as_str(),
                header.d,
                header.partitions,
                header.index,
                header.draws,
                header.seed,
                header.dim
            )?;
            let mut line = String::new();
            for row in draws.rows() {
                line.clear();
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push_str(&format!("{v:?}"));
                }
                writeln!(w, "{line}")?;
            }
        }
        SampleFormat::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&[tag_byte(header.model)])?;
            w.write_all(&(header.d as u32).to_le_bytes())?;
            w.write_all(&(header.partitions as u32).to_le_bytes())?;
            w.write_all(&(header.index as u32).to_le_bytes())?;
            w.write_all(&(header.draws as u64).to_le_bytes())?;
            w.write_all(&header.seed.to_le_bytes())?;
            w.write_all(&(header.dim as u32).to_le_bytes())?;
            for v in draws.as_flat() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, name: &str) -> Result<T> {
    s.and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("bad or missing `{name}` in sample header")))
}

/// Reads a sample file, detecting the format from its first bytes.
pub fn read_samples(path: &Path) -> Result<(SampleFileHeader, Draws)> {
    let bytes = fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    if bytes.starts_with(MAGIC) {
        read_binary(&bytes[MAGIC.len()..])
    } else {
        read_csv(&bytes)
    }
}

fn read_binary(mut buf: &[u8]) -> Result<(SampleFileHeader, Draws)> {
    fn take<const N: usize>(buf: &mut &[u8]) -> Result<[u8; N]> {
        if buf.len() < N {
            return Err(Error::Format("truncated binary sample file".into()));
        }
        let mut out = [0u8; N];
        buf.read_exact(&mut out)?;
        Ok(out)
    }
    let model = byte_tag(take::<1>(&mut buf)?[0])?;
    let d = u32::from_le_bytes(take(&mut buf)?) as usize;
    let partitions = u32::from_le_bytes(take(&mut buf)?) as usize;
    let index = u32::from_le_bytes(take(&mut buf)?) as usize;
    let draws = u64::from_le_bytes(take(&mut buf)?) as usize;
    let seed = u64::from_le_bytes(take(&mut buf)?);
    let dim = u32::from_le_bytes(take(&mut buf)?) as usize;
    if buf.len() != draws * dim * 8 {
        return Err(Error::Format(format!(
            "binary sample file holds {} bytes of values, expected {}",
            buf.len(),
            draws * dim * 8
        )));
    }
    let values = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let header = SampleFileHeader { model, d, partitions, index, draws, seed, dim };
    Ok((header, Draws::from_flat(dim, values)?))
}

fn read_csv(bytes: &[u8]) -> Result<(SampleFileHeader, Draws)> {
    let mut lines = BufReader::new(bytes).lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != CSV_HEADER {
        return Err(Error::Format(format!("expected sample header `{CSV_HEADER}`, found `{first}`")));
    }
    let values = lines.next().transpose()?.unwrap_or_default();
    let mut f = values.split(',');
    let model = ModelTag::parse(f.next().unwrap_or("").trim())?;
    let header = SampleFileHeader {
        model,
        d: parse_field(f.next(), "d")?,
        partitions: parse_field(f.next(), "K")?,
        index: parse_field(f.next(), "k")?,
        draws: parse_field(f.next(), "T")?,
        seed: parse_field(f.next(), "seed")?,
        dim: parse_field(f.next(), "dim")?,
    };
    let mut draws = Draws::with_capacity(header.dim, header.draws);
    let mut row = Vec::with_capacity(header.dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        row.clear();
        for v in line.split(',') {
            row.push(v.trim().parse::<f64>().map_err(|_| Error::Format(format!("row {}: bad value `{v}`", i + 3)))?);
        }
        draws.push(&row)?;
    }
    if draws.len() != header.draws {
        return Err(Error::Format(format!("header says T={} but file has {} rows", header.draws, draws.len())));
    }
    Ok((header, draws))
}
