//! Binary embedding spaces.
//!
//! Layout, all little-endian: the 8-byte magic `SDEMBED1`, then `u64` vocabulary size,
//! `u64` dimension, `u64` span index, `u64` trained token count, then `W_in` and `W_out`
//! as row-major `f32`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use semdrift_core::sgns::EmbeddingSpace;
use semdrift_core::shift::SpanVectors;
use semdrift_core::vocab::Vocabulary;

use crate::error::{Error, IoContext, Result};

const MAGIC: &[u8; 8] = b"SDEMBED1";
const HEADER_LEN: u64 = 8 + 4 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceHeader {
    pub vocab_size: usize,
    pub dim: usize,
    pub span_index: usize,
    pub trained_token_count: u64,
}

fn write_matrix(out: &mut impl Write, m: &[f32]) -> std::io::Result<()> {
    for x in m {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Writes through a temporary file so a crash never leaves a truncated space behind.
pub fn write_space(path: &Path, space: &EmbeddingSpace) -> Result<()> {
    let tmp = crate::temp_path(path);
    {
        let file = File::create(&tmp).at(&tmp)?;
        let mut out = BufWriter::new(file);
        let head = [
            space.vocab_size() as u64,
            space.dim() as u64,
            space.span_index as u64,
            space.trained_token_count,
        ];
        out.write_all(MAGIC).at(&tmp)?;
        for v in head {
            out.write_all(&v.to_le_bytes()).at(&tmp)?;
        }
        write_matrix(&mut out, space.input()).at(&tmp)?;
        write_matrix(&mut out, space.output()).at(&tmp)?;
        out.into_inner()
            .map_err(|e| Error::io(&tmp, e.into_error()))?
            .sync_all()
            .at(&tmp)?;
    }
    std::fs::rename(&tmp, path).at(path)
}

fn read_header(path: &Path, r: &mut impl Read) -> Result<SpaceHeader> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).at(path)?;
    if &magic != MAGIC {
        return Err(Error::format(path, "not an embedding space file"));
    }
    let mut next = || -> Result<u64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).at(path)?;
        Ok(u64::from_le_bytes(b))
    };
    let h = SpaceHeader {
        vocab_size: next()? as usize,
        dim: next()? as usize,
        span_index: next()? as usize,
        trained_token_count: next()?,
    };
    if h.vocab_size == 0 || h.dim == 0 {
        return Err(Error::format(path, "empty matrix dimensions"));
    }
    Ok(h)
}

fn read_f32s(path: &Path, r: &mut impl Read, n: usize) -> Result<Vec<f32>> {
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes).at(path)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn check_length(path: &Path, file: &File, h: &SpaceHeader) -> Result<()> {
    let want = HEADER_LEN + 2 * (h.vocab_size * h.dim) as u64 * 4;
    let got = file.metadata().at(path)?.len();
    if got != want {
        return Err(Error::format(path, format!("{got} bytes, expected {want}")));
    }
    Ok(())
}

pub fn read_header_only(path: &Path) -> Result<SpaceHeader> {
    let mut file = File::open(path).at(path)?;
    let h = read_header(path, &mut file)?;
    check_length(path, &file, &h)?;
    Ok(h)
}

pub fn read_space(path: &Path) -> Result<EmbeddingSpace> {
    let file = File::open(path).at(path)?;
    let mut r = BufReader::new(&file);
    let h = read_header(path, &mut r)?;
    check_length(path, &file, &h)?;
    let n = h.vocab_size * h.dim;
    let input = read_f32s(path, &mut r, n)?;
    let output = read_f32s(path, &mut r, n)?;
    let mut space = EmbeddingSpace::from_parts(h.vocab_size, h.dim, input, output)
        .map_err(|e| Error::format(path, e.to_string()))?;
    space.span_index = h.span_index;
    space.trained_token_count = h.trained_token_count;
    Ok(space)
}

/// Reads the `W_in` rows of `ids` only.
pub fn read_input_rows(path: &Path, ids: &[u32]) -> Result<(SpaceHeader, BTreeMap<u32, Vec<f32>>)> {
    let mut file = File::open(path).at(path)?;
    let h = read_header(path, &mut file)?;
    check_length(path, &file, &h)?;
    let mut rows = BTreeMap::new();
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for id in sorted {
        if id as usize >= h.vocab_size {
            return Err(Error::format(path, format!("row {id} beyond {} rows", h.vocab_size)));
        }
        let offset = HEADER_LEN + (id as u64) * (h.dim as u64) * 4;
        file.seek(SeekFrom::Start(offset)).at(path)?;
        rows.insert(id, read_f32s(path, &mut file, h.dim)?);
    }
    Ok((h, rows))
}

/// `W_in` as word2vec text: a `count dim` line, then `word v1 v2 ...` per word.
pub fn export_text(out: &mut impl Write, space: &EmbeddingSpace, vocab: &Vocabulary) -> std::io::Result<()> {
    writeln!(out, "{} {}", space.vocab_size(), space.dim())?;
    for (id, w) in vocab.words().iter().enumerate() {
        write!(out, "{w}")?;
        for x in space.input_row(id as u32) {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Input rows of a few words in every span, loaded without reading whole matrices.
#[derive(Debug, Clone)]
pub struct RowSubset {
    vocab_size: usize,
    dim: usize,
    spans: Vec<BTreeMap<u32, Vec<f32>>>,
}

impl RowSubset {
    pub fn load(paths: &[PathBuf], ids: &[u32]) -> Result<Self> {
        let mut spans = Vec::with_capacity(paths.len());
        let mut shape = None;
        for (i, p) in paths.iter().enumerate() {
            let (h, rows) = read_input_rows(p, ids)?;
            if h.span_index != i {
                return Err(Error::format(p, format!("holds span {}, expected {i}", h.span_index)));
            }
            match shape {
                None => shape = Some((h.vocab_size, h.dim)),
                Some(s) if s != (h.vocab_size, h.dim) => {
                    return Err(Error::format(p, "matrix shape differs from span 0"))
                }
                Some(_) => {}
            }
            spans.push(rows);
        }
        let (vocab_size, dim) = shape.ok_or_else(|| Error::Data("no spans to load".into()))?;
        Ok(RowSubset {
            vocab_size,
            dim,
            spans,
        })
    }
}

impl SpanVectors for RowSubset {
    fn span_count(&self) -> usize {
        self.spans.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Panics for an id that was not loaded.
    fn input_row(&self, span: usize, id: u32) -> &[f32] {
        self.spans[span]
            .get(&id)
            .unwrap_or_else(|| panic!("row {id} was not loaded"))
    }
}
