//! Binary index files.
//!
//! Layout, all little-endian: magic `UGFP`, u16 version, u32 rate,
//! u16 window, u16 hop, u32 clip count, then per clip {u16 id length, id
//! bytes, f64 duration, u32 landmark count}, then u64 posting count and per
//! posting {u32 key, u32 clip ordinal, u32 t1}. Postings are written in
//! sorted order, so saving a loaded index reproduces the file exactly.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::fingerprint::{FingerprintError, FingerprintIndex, FpConfig, IndexedClip};

pub const INDEX_MAGIC: [u8; 4] = *b"UGFP";
pub const INDEX_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("not an index file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported version {0} of the index file")]
    UnsupportedVersion(u16),
    #[error("index file truncated at byte {offset} while reading {what}")]
    Truncated { offset: usize, what: &'static str },
    #[error("clip id at byte {offset} is not valid UTF-8")]
    InvalidId { offset: usize },
    #[error("{0} bytes of trailing data after the postings")]
    TrailingBytes(usize),
    #[error("index parameters do not fit the file format: {0}")]
    Unrepresentable(String),
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn narrow<T: TryFrom<usize>>(v: usize, what: &str) -> Result<T, PersistError> {
    T::try_from(v).map_err(|_| PersistError::Unrepresentable(format!("{what} = {v}")))
}

pub fn encode_index(index: &FingerprintIndex) -> Result<Vec<u8>, PersistError> {
    let cfg = index.config();
    let postings = index.sorted_postings();
    let mut out = Vec::with_capacity(32 + index.len() * 32 + postings.len() * 12);
    out.extend_from_slice(&INDEX_MAGIC);
    out.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    out.extend_from_slice(&cfg.rate.to_le_bytes());
    out.extend_from_slice(&narrow::<u16>(cfg.window, "window")?.to_le_bytes());
    out.extend_from_slice(&narrow::<u16>(cfg.hop, "hop")?.to_le_bytes());
    out.extend_from_slice(&narrow::<u32>(index.len(), "clip count")?.to_le_bytes());
    for c in index.clips() {
        out.extend_from_slice(&narrow::<u16>(c.id.len(), "clip id length")?.to_le_bytes());
        out.extend_from_slice(c.id.as_bytes());
        out.extend_from_slice(&c.duration.to_le_bytes());
        out.extend_from_slice(&c.landmark_count.to_le_bytes());
    }
    out.extend_from_slice(&(postings.len() as u64).to_le_bytes());
    for (key, clip, t1) in postings {
        out.extend_from_slice(&key.to_le_bytes());
        out.extend_from_slice(&clip.to_le_bytes());
        out.extend_from_slice(&t1.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], PersistError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(PersistError::Truncated { offset: self.pos, what })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], PersistError> {
        Ok(self.take(N, what)?.try_into().expect("exact length"))
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.array(what)?))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }
}

/// Decode an index. Parameters not stored in the file (density, fan-out,
/// thresholds) are taken from `base`.
pub fn decode_index(bytes: &[u8], base: &FpConfig) -> Result<FingerprintIndex, PersistError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic").map_err(|_| PersistError::BadMagic)? != INDEX_MAGIC {
        return Err(PersistError::BadMagic);
    }
    let version = r.u16("version")?;
    if version != INDEX_VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let config = FpConfig {
        rate: r.u32("rate")?,
        window: r.u16("window")? as usize,
        hop: r.u16("hop")? as usize,
        ..base.clone()
    };
    config.validate()?;
    let n_clips = r.u32("clip count")? as usize;
    let mut clips = Vec::with_capacity(n_clips.min(1 << 16));
    for _ in 0..n_clips {
        let len = r.u16("clip id length")? as usize;
        let at = r.pos;
        let id = std::str::from_utf8(r.take(len, "clip id")?).map_err(|_| PersistError::InvalidId { offset: at })?;
        clips.push(IndexedClip {
            id: id.to_string(),
            duration: f64::from_le_bytes(r.array("clip duration")?),
            landmark_count: r.u32("landmark count")?,
        });
    }
    let n_postings = u64::from_le_bytes(r.array("posting count")?);
    let remaining = (bytes.len() - r.pos) as u64;
    if n_postings.saturating_mul(12) > remaining {
        return Err(PersistError::Truncated {
            offset: bytes.len(),
            what: "postings",
        });
    }
    let mut postings = Vec::with_capacity(n_postings as usize);
    for _ in 0..n_postings {
        postings.push((r.u32("posting key")?, r.u32("posting clip")?, r.u32("posting t1")?));
    }
    if r.pos != bytes.len() {
        return Err(PersistError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(FingerprintIndex::from_parts(config, clips, postings)?)
}

pub fn save_index(index: &FingerprintIndex, path: &Path) -> Result<(), PersistError> {
    let bytes = encode_index(index)?;
    std::fs::write(path, bytes).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_index(path: &Path, base: &FpConfig) -> Result<FingerprintIndex, PersistError> {
    let bytes = std::fs::read(path).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_index(&bytes, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::Landmark;

    fn index() -> FingerprintIndex {
        let mut idx = FingerprintIndex::new(FpConfig::default());
        let a: Vec<Landmark> = (0..100).map(|i| Landmark { t1: i, f1: i % 200, f2: i % 200 + 3, dt: i % 60 + 1 }).collect();
        let b: Vec<Landmark> = (0..40).map(|i| Landmark { t1: 2 * i, f1: 50, f2: 40, dt: 7 }).collect();
        idx.add_clip("a", 12.5, &a).unwrap();
        idx.add_clip("b\u{e9}", 3.0, &b).unwrap();
        idx
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let bytes = encode_index(&index()).unwrap();
        let back = decode_index(&bytes, &FpConfig::default()).unwrap();
        assert_eq!(back.landmark_count("a"), Some(100));
        assert_eq!(back.landmark_count("b\u{e9}"), Some(40));
        assert_eq!(back.posting_count(), 140);
        assert_eq!(back.sorted_postings(), index().sorted_postings());
        assert_eq!(encode_index(&back).unwrap(), bytes);
    }

    #[test]
    fn empty_index_is_valid() {
        let idx = FingerprintIndex::new(FpConfig::default());
        let bytes = encode_index(&idx).unwrap();
        assert_eq!(bytes.len(), 4 + 2 + 4 + 2 + 2 + 4 + 8);
        assert!(decode_index(&bytes, &FpConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn corrupt_files_are_refused() {
        let bytes = encode_index(&index()).unwrap();
        let cfg = FpConfig::default();

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_index(&magic, &cfg), Err(PersistError::BadMagic)));

        let mut version = bytes.clone();
        version[4] = 2;
        let err = decode_index(&version, &cfg).unwrap_err();
        assert!(matches!(err, PersistError::UnsupportedVersion(2)));
        assert!(err.to_string().contains("unsupported version"));

        assert!(matches!(decode_index(&bytes[..bytes.len() - 5], &cfg), Err(PersistError::Truncated { .. })));
        assert!(matches!(decode_index(&bytes[..20], &cfg), Err(PersistError::Truncated { .. })));

        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_index(&extra, &cfg), Err(PersistError::TrailingBytes(1))));

        // landmark count no longer matches the postings
        let mut counts = bytes;
        let at = 4 + 2 + 4 + 2 + 2 + 4 + 2 + 1 + 8;
        counts[at] = 99;
        assert!(matches!(decode_index(&counts, &cfg), Err(PersistError::Fingerprint(_))));
    }
}
