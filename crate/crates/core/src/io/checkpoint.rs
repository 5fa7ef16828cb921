use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MAGIC: &[u8; 8] = b"FOFENER\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk model container: a JSON metadata block (config, vocabularies,
/// label sets, corpus hashes) followed by named little-endian f64 tensors.
/// The tensor payload is format-agnostic so the container does not need to
/// change when the network layout does.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta_json: String,
    pub tensors: Vec<(String, Matrix)>,
}

pub fn save_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
    write_bytes(&mut out, ckpt.meta_json.as_bytes())?;
    out.write_u64::<LittleEndian>(ckpt.tensors.len() as u64)?;
    for (name, m) in &ckpt.tensors {
        write_bytes(&mut out, name.as_bytes())?;
        out.write_u64::<LittleEndian>(m.rows as u64)?;
        out.write_u64::<LittleEndian>(m.cols as u64)?;
        for v in &m.data {
            out.write_f64::<LittleEndian>(*v)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact(&mut input, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Input("not a checkpoint file (bad magic)".into()));
    }
    let version = input
        .read_u32::<LittleEndian>()
        .map_err(truncated)?;
    if version > CHECKPOINT_VERSION {
        return Err(Error::Incompatible(format!(
            "checkpoint version {version} is newer than supported version {CHECKPOINT_VERSION}"
        )));
    }
    let meta_json = String::from_utf8(read_bytes(&mut input)?)
        .map_err(|_| Error::Input("checkpoint metadata is not UTF-8".into()))?;
    let count = input.read_u64::<LittleEndian>().map_err(truncated)? as usize;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name = String::from_utf8(read_bytes(&mut input)?)
            .map_err(|_| Error::Input("checkpoint tensor name is not UTF-8".into()))?;
        let rows = input.read_u64::<LittleEndian>().map_err(truncated)? as usize;
        let cols = input.read_u64::<LittleEndian>().map_err(truncated)? as usize;
        let mut m = Matrix::zeros(rows, cols);
        for v in &mut m.data {
            *v = input.read_f64::<LittleEndian>().map_err(truncated)?;
        }
        tensors.push((name, m));
    }
    Ok(Checkpoint { meta_json, tensors })
}

fn truncated(_: std::io::Error) -> Error {
    Error::Input("truncated checkpoint file".into())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(truncated)
}

fn write_bytes(w: &mut impl Write, bytes: &[u8]) -> Result<()> {
    w.write_u64::<LittleEndian>(bytes.len() as u64)?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_bytes(r: &mut impl Read) -> Result<Vec<u8>> {
    let len = r.read_u64::<LittleEndian>().map_err(truncated)? as usize;
    if len > 1 << 32 {
        return Err(Error::Input("implausible block length in checkpoint".into()));
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    Ok(buf)
}
