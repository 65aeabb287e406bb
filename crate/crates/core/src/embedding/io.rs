//! Binary model format and word2vec-style text export.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! magic     8 bytes  "WELDEMB\0"
//! version   u32      1
//! width     u8       bytes per scalar (4 = f32, 8 = f64)
//! |V|       u64
//! dim       u64
//! config    u32 length + UTF-8 JSON of the training configuration
//! vocab     |V| × (u32 byte length, UTF-8 word, u64 count)
//! input     |V| × dim scalars
//! context   |V| × dim scalars
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::model::EmbeddingModel;

pub const MAGIC: &[u8; 8] = b"WELDEMB\0";
pub const FORMAT_VERSION: u32 = 1;

impl<T: Real> EmbeddingModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 2 * self.input.len() * T::WIDTH as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(T::WIDTH);
        out.extend_from_slice(&(self.vocab.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        let config = serde_json::to_vec(&self.config).expect("config serializes");
        out.extend_from_slice(&(config.len() as u32).to_le_bytes());
        out.extend_from_slice(&config);
        for (word, &count) in self.vocab.words().iter().zip(self.vocab.counts()) {
            out.extend_from_slice(&(word.len() as u32).to_le_bytes());
            out.extend_from_slice(word.as_bytes());
            out.extend_from_slice(&count.to_le_bytes());
        }
        for &x in self.input.iter().chain(&self.context) {
            x.write_le(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let width = r.take(1)?[0];
        if width != T::WIDTH {
            return Err(Error::Format(format!(
                "scalar width {width} does not match requested type width {}",
                T::WIDTH
            )));
        }
        let n = r.u64()? as usize;
        let dim = r.u64()? as usize;
        let config_len = r.u32()? as usize;
        let config = serde_json::from_slice(r.take(config_len)?)
            .map_err(|e| Error::Format(format!("config block: {e}")))?;
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let len = r.u32()? as usize;
            let word = std::str::from_utf8(r.take(len)?)
                .map_err(|e| Error::Format(format!("vocabulary word: {e}")))?
                .to_string();
            pairs.push((word, r.u64()?));
        }
        let vocab = Vocabulary::from_tsv(
            &pairs
                .iter()
                .map(|(w, c)| format!("{w}\t{c}\n"))
                .collect::<String>(),
        )?;
        let cells = n
            .checked_mul(dim)
            .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
        let read_matrix = |r: &mut ByteReader| -> Result<Vec<T>> {
            let raw = r.take(cells * T::WIDTH as usize)?;
            Ok(raw.chunks_exact(T::WIDTH as usize).map(T::read_le).collect())
        };
        let input = read_matrix(&mut r)?;
        let context = read_matrix(&mut r)?;
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after context matrix".into()));
        }
        EmbeddingModel::from_parts(vocab, dim, input, context, config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// word2vec text format: a `|V| dim` header, then `word v1 … vd` per
    /// line using the averaged word vectors.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.vocab.len(), self.dim).unwrap();
        for id in 0..self.vocab.len() as u32 {
            out.push_str(self.vocab.word(id));
            for x in self.vector_by_id(id) {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn export_text(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated model at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingConfig;

    fn sample() -> EmbeddingModel<f32> {
        let vocab = Vocabulary::from_counts([("alpha", 5u64), ("βeta", 3), ("c", 1)], 1).unwrap();
        let input: Vec<f32> = (0..6).map(|i| i as f32 * 0.1 - 0.2).collect();
        let context: Vec<f32> = (0..6).map(|i| 1.0 / (i as f32 + 3.0)).collect();
        EmbeddingModel::from_parts(vocab, 2, input, context, EmbeddingConfig::genome()).unwrap()
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let m = sample();
        let back = EmbeddingModel::<f32>::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            back.input_matrix().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            m.input_matrix().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_corruption() {
        let m = sample();
        let mut bytes = m.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(EmbeddingModel::<f32>::from_bytes(&bytes), Err(Error::Format(_))));

        let mut bytes = m.to_bytes();
        bytes[8] = 9;
        let err = EmbeddingModel::<f32>::from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");

        let bytes = m.to_bytes();
        assert!(EmbeddingModel::<f32>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(EmbeddingModel::<f64>::from_bytes(&bytes).is_err());
    }

    #[test]
    fn text_export_has_header_plus_rows() {
        let m = sample();
        let text = m.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), m.vocab().len() + 1);
        assert_eq!(lines[0], "3 2");
        assert!(lines[1].starts_with("alpha "));
        assert_eq!(lines[1].split(' ').count(), 3);
    }
}
