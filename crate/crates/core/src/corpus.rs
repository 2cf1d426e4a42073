//! String corpora: one contiguous byte buffer plus string boundaries.
//!
//! Also serves as the uncompressed baseline for random access.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

const MIB: f64 = (1 << 20) as f64;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    name: String,
    data: Vec<u8>,
    boundaries: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub size_mib: f64,
    pub rows: usize,
    pub avg_len_bytes: f64,
}

impl Corpus {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), data: Vec::new(), boundaries: vec![0] }
    }

    pub fn from_strings<I, S>(name: impl Into<String>, strings: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut corpus = Self::new(name);
        for s in strings {
            corpus.push(s.as_ref());
        }
        corpus
    }

    /// Splits `bytes` into LF-delimited records. A trailing LF does not start
    /// a new record, and one CR before each LF is dropped.
    pub fn from_lines(name: impl Into<String>, bytes: &[u8]) -> Self {
        let mut corpus = Self::new(name);
        let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
        if bytes.is_empty() {
            return corpus;
        }
        for line in body.split(|&b| b == b'\n') {
            corpus.push(line.strip_suffix(b"\r").unwrap_or(line));
        }
        corpus
    }

    /// Loads an LF-delimited file. With `limit_bytes`, only whole lines that
    /// fit in the first `limit_bytes` bytes are kept.
    pub fn load_lines(path: impl AsRef<Path>, limit_bytes: Option<u64>) -> Result<Self> {
        let path = path.as_ref();
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut file = File::open(path)?;
        let mut bytes = Vec::new();
        match limit_bytes {
            None => {
                file.read_to_end(&mut bytes)?;
            }
            Some(limit) => {
                file.take(limit.saturating_add(1)).read_to_end(&mut bytes)?;
                if bytes.len() as u64 > limit {
                    bytes.truncate(limit as usize);
                    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
                    bytes.truncate(keep);
                }
            }
        }
        Ok(Self::from_lines(name, &bytes))
    }

    /// Writes every string followed by LF.
    pub fn write_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for s in self.iter() {
            if s.contains(&b'\n') {
                return Err(Error::Config("string contains the LF record delimiter".into()));
            }
            out.write_all(s)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn push(&mut self, s: &[u8]) {
        self.data.extend_from_slice(s);
        self.boundaries.push(self.data.len());
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total bytes over all strings.
    pub fn total_bytes(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn max_len(&self) -> usize {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// String `i`, or a lookup error.
    pub fn get(&self, i: usize) -> Result<&[u8]> {
        if i >= self.len() {
            return Err(Error::Lookup { index: i, len: self.len() });
        }
        Ok(&self[i])
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &[u8]> + ExactSizeIterator + '_ {
        self.boundaries.windows(2).map(|w| &self.data[w[0]..w[1]])
    }

    pub fn stats(&self) -> CorpusStats {
        let rows = self.len();
        CorpusStats {
            size_mib: self.total_bytes() as f64 / MIB,
            rows,
            avg_len_bytes: if rows == 0 { 0.0 } else { self.total_bytes() as f64 / rows as f64 },
        }
    }
}

impl std::ops::Index<usize> for Corpus {
    type Output = [u8];

    #[inline]
    fn index(&self, i: usize) -> &[u8] {
        &self.data[self.boundaries[i]..self.boundaries[i + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lines(c: &Corpus) -> Vec<&[u8]> {
        c.iter().collect()
    }

    #[test]
    fn splits_lines() {
        assert_eq!(lines(&Corpus::from_lines("t", b"ab\ncd\n")), vec![b"ab", b"cd"]);
        assert_eq!(lines(&Corpus::from_lines("t", b"ab")), vec![b"ab"]);
        assert_eq!(lines(&Corpus::from_lines("t", b"ab\r\ncd\r\n")), vec![b"ab", b"cd"]);
        assert_eq!(lines(&Corpus::from_lines("t", b"ab\n\ncd")), vec![&b"ab"[..], b"", b"cd"]);
        assert_eq!(Corpus::from_lines("t", b"\n").len(), 1);
        assert!(Corpus::from_lines("t", b"").is_empty());
    }

    #[test]
    fn stats_examples() {
        let empty = Corpus::new("e");
        let s = empty.stats();
        assert_eq!((s.size_mib, s.rows, s.avg_len_bytes), (0.0, 0, 0.0));

        let c = Corpus::from_strings("ten", (0..100).map(|_| b"0123456789"));
        let s = c.stats();
        assert_eq!(s.rows, 100);
        assert_eq!(s.avg_len_bytes, 10.0);
        assert!((s.size_mib - 1000.0 / 1048576.0).abs() < 1e-12);
        assert_eq!(c.total_bytes(), *c.boundaries().last().unwrap());
    }

    #[test]
    fn raw_access() {
        let c = Corpus::from_strings("t", ["x", "", "yz"]);
        assert_eq!(c.get(2).unwrap(), b"yz");
        assert_eq!(c.get(1).unwrap(), b"");
        assert!(matches!(c.get(3), Err(Error::Lookup { index: 3, len: 3 })));
    }

    #[test]
    fn file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut file = Vec::new();
        while file.len() < 1 << 20 {
            let len = rng.random_range(0..80);
            file.extend((0..len).map(|_| rng.random_range(b' '..=b'~')));
            file.push(b'\n');
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("random.txt");
        std::fs::write(&path, &file).unwrap();

        let corpus = Corpus::load_lines(&path, None).unwrap();
        let mut out = Vec::new();
        corpus.write_lines(&mut out).unwrap();
        assert_eq!(out, file);
        assert_eq!(corpus.name(), "random");

        // Random indices agree with a direct line split of the file.
        let direct: Vec<&[u8]> = file[..file.len() - 1].split(|&b| b == b'\n').collect();
        for _ in 0..1000 {
            let i = rng.random_range(0..corpus.len());
            assert_eq!(corpus.get(i).unwrap(), direct[i]);
        }
    }

    #[test]
    fn limit_keeps_whole_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.txt");
        std::fs::write(&path, b"aaa\nbbb\nccc\n").unwrap();
        let c = Corpus::load_lines(&path, Some(6)).unwrap();
        assert_eq!(lines(&c), vec![b"aaa"]);
        let c = Corpus::load_lines(&path, Some(8)).unwrap();
        assert_eq!(lines(&c), vec![b"aaa", b"bbb"]);
        let c = Corpus::load_lines(&path, Some(12)).unwrap();
        assert_eq!(c.len(), 3);
        let c = Corpus::load_lines(&path, Some(2)).unwrap();
        assert!(c.is_empty());
    }
}
