//! FSNS-lite: a length-prefixed, checksummed record container.
//!
//! ```text
//! file    = "FSNL" u16:version records*
//! record  = u32:len u32:crc32(payload) payload
//! payload = u16:n_fields (u16:key_len key u8:type u32:value_len value)*
//! ```
//! All integers little-endian. Type tags: 0 bytes, 1 i64 list, 2 UTF-8.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FSNL";
pub const VERSION: u16 = 1;

// Refuse absurd lengths before allocating.
const MAX_RECORD_LEN: u32 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bytes(Vec<u8>),
    Ints(Vec<i64>),
    Text(String),
}

impl Value {
    fn tag(&self) -> u8 {
        match self {
            Value::Bytes(_) => 0,
            Value::Ints(_) => 1,
            Value::Text(_) => 2,
        }
    }

    fn byte_len(&self) -> usize {
        match self {
            Value::Bytes(b) => b.len(),
            Value::Ints(v) => v.len() * 8,
            Value::Text(s) => s.len(),
        }
    }
}

/// Ordered key/value fields. Order is preserved through a round trip.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: Value) -> &mut Self {
        self.fields.push((key.into(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn bytes(&self, key: &str) -> Option<&[u8]> {
        match self.get(key)? {
            Value::Bytes(b) => Some(b),
            _ => None,
        }
    }

    pub fn ints(&self, key: &str) -> Option<&[i64]> {
        match self.get(key)? {
            Value::Ints(v) => Some(v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key)? {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let too_long = |what: &str| Error::invalid("record", format!("{what} too long"));
        let mut out = Vec::new();
        let n = u16::try_from(self.fields.len()).map_err(|_| too_long("field list"))?;
        out.extend_from_slice(&n.to_le_bytes());
        for (key, value) in &self.fields {
            let klen = u16::try_from(key.len()).map_err(|_| too_long("key"))?;
            out.extend_from_slice(&klen.to_le_bytes());
            out.extend_from_slice(key.as_bytes());
            out.push(value.tag());
            let vlen = u32::try_from(value.byte_len()).map_err(|_| too_long("value"))?;
            out.extend_from_slice(&vlen.to_le_bytes());
            match value {
                Value::Bytes(b) => out.extend_from_slice(b),
                Value::Ints(v) => v
                    .iter()
                    .for_each(|i| out.extend_from_slice(&i.to_le_bytes())),
                Value::Text(s) => out.extend_from_slice(s.as_bytes()),
            }
        }
        if out.len() as u64 > u64::from(MAX_RECORD_LEN) {
            return Err(too_long("record"));
        }
        Ok(out)
    }

    /// Parses a payload; `index` is only used for error reports.
    pub fn decode(payload: &[u8], index: usize) -> Result<Self> {
        let corrupt = |detail: &str| Error::CorruptRecord {
            index,
            detail: detail.to_string(),
        };
        let mut cur = payload;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(corrupt("payload truncated"));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        let n = u16::from_le_bytes(take(2)?.try_into().unwrap());
        let mut fields = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let klen = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
            let key = std::str::from_utf8(take(klen)?)
                .map_err(|_| corrupt("key is not UTF-8"))?
                .to_string();
            let tag = take(1)?[0];
            let vlen = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let raw = take(vlen)?;
            let value = match tag {
                0 => Value::Bytes(raw.to_vec()),
                1 => {
                    if vlen % 8 != 0 {
                        return Err(corrupt("i64 list length not a multiple of 8"));
                    }
                    Value::Ints(
                        raw.chunks_exact(8)
                            .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
                            .collect(),
                    )
                }
                2 => Value::Text(
                    String::from_utf8(raw.to_vec()).map_err(|_| corrupt("text is not UTF-8"))?,
                ),
                t => return Err(corrupt(&format!("unknown type tag {t}"))),
            };
            fields.push((key, value));
        }
        if !cur.is_empty() {
            return Err(corrupt("trailing bytes after last field"));
        }
        Ok(Record { fields })
    }
}

pub struct RecordWriter<W: Write> {
    inner: W,
    count: usize,
}

impl RecordWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut inner: W) -> Result<Self> {
        inner.write_all(MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        Ok(RecordWriter { inner, count: 0 })
    }

    pub fn write(&mut self, record: &Record) -> Result<()> {
        let payload = record.encode()?;
        self.inner
            .write_all(&(payload.len() as u32).to_le_bytes())?;
        self.inner
            .write_all(&crc32fast::hash(&payload).to_le_bytes())?;
        self.inner.write_all(&payload)?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Flushes and returns the number of records written.
    pub fn finish(mut self) -> Result<usize> {
        self.inner.flush()?;
        Ok(self.count)
    }
}

/// Streaming reader; yields one record at a time.
pub struct RecordReader<R: Read> {
    inner: R,
    index: usize,
    failed: bool,
}

impl RecordReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> RecordReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut header = [0u8; 6];
        inner.read_exact(&mut header).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::BadHeader("file shorter than header".into()),
            _ => Error::Io(e),
        })?;
        if &header[..4] != MAGIC {
            return Err(Error::BadHeader(format!("bad magic {:?}", &header[..4])));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(Error::BadHeader(format!("unsupported version {version}")));
        }
        Ok(RecordReader {
            inner,
            index: 0,
            failed: false,
        })
    }

    fn read_next(&mut self) -> Result<Option<Record>> {
        let corrupt = |index, detail: &str| Error::CorruptRecord {
            index,
            detail: detail.to_string(),
        };
        let mut head = [0u8; 8];
        // distinguish a clean end of file from a truncated header
        let mut got = 0;
        while got < head.len() {
            match self.inner.read(&mut head[got..]) {
                Ok(0) => break,
                Ok(n) => got += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        if got == 0 {
            return Ok(None);
        }
        if got < head.len() {
            return Err(corrupt(self.index, "truncated record header"));
        }
        let len = u32::from_le_bytes(head[..4].try_into().unwrap());
        let crc = u32::from_le_bytes(head[4..].try_into().unwrap());
        if len > MAX_RECORD_LEN {
            return Err(corrupt(self.index, "implausible record length"));
        }
        let mut payload = vec![0u8; len as usize];
        self.inner
            .read_exact(&mut payload)
            .map_err(|e| match e.kind() {
                io::ErrorKind::UnexpectedEof => corrupt(self.index, "truncated payload"),
                _ => Error::Io(e),
            })?;
        if crc32fast::hash(&payload) != crc {
            return Err(corrupt(self.index, "CRC mismatch"));
        }
        let record = Record::decode(&payload, self.index)?;
        self.index += 1;
        Ok(Some(record))
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<Record>;

    /// Stops after the first error.
    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = self.read_next().transpose();
        if matches!(item, Some(Err(_))) {
            self.failed = true;
        }
        item
    }
}

/// Writes all records to `path`, returning the count.
pub fn write_records<'a>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a Record>,
) -> Result<usize> {
    let mut w = RecordWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    RecordReader::open(path)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Record {
        let mut r = Record::new();
        r.push("image/text", Value::Text("Rue de la Gare".into()))
            .push("image/class", Value::Ints(vec![1, -2, i64::MAX]))
            .push("image/encoded", Value::Bytes(vec![0, 255, 7]));
        r
    }

    fn to_bytes(records: &[Record]) -> Vec<u8> {
        let mut w = RecordWriter::new(Vec::new()).unwrap();
        for r in records {
            w.write(r).unwrap();
        }
        w.inner
    }

    #[test]
    fn header_layout() {
        let bytes = to_bytes(&[]);
        assert_eq!(bytes, b"FSNL\x01\x00");
        let empty: Vec<_> = RecordReader::new(&bytes[..]).unwrap().collect();
        assert!(empty.is_empty());
    }

    #[test]
    fn payload_layout_is_exact() {
        let mut r = Record::new();
        r.push("k", Value::Ints(vec![1]));
        assert_eq!(
            r.encode().unwrap(),
            [1, 0, 1, 0, b'k', 1, 8, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0]
        );
    }

    #[test]
    fn round_trip() {
        let recs = vec![sample(), Record::new(), sample()];
        let bytes = to_bytes(&recs);
        let back: Vec<Record> = RecordReader::new(&bytes[..])
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(back, recs);
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn flipped_payload_byte_is_detected() {
        let mut bytes = to_bytes(&[sample(), sample()]);
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        let items: Vec<_> = RecordReader::new(&bytes[..]).unwrap().collect();
        assert_eq!(items.len(), 2);
        assert!(items[0].is_ok());
        assert!(matches!(
            items[1],
            Err(Error::CorruptRecord { index: 1, .. })
        ));
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = to_bytes(&[sample()]);
        for cut in [7, 10, bytes.len() - 1] {
            let items: Vec<_> = RecordReader::new(&bytes[..cut]).unwrap().collect();
            assert!(
                matches!(items.last(), Some(Err(Error::CorruptRecord { .. }))),
                "cut {cut}"
            );
        }
    }

    #[test]
    fn bad_headers() {
        assert!(matches!(
            RecordReader::new(&b"FSN"[..]),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            RecordReader::new(&b"XXXX\x01\x00"[..]),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            RecordReader::new(&b"FSNL\x02\x00"[..]),
            Err(Error::BadHeader(_))
        ));
    }

    #[test]
    fn unknown_tag_is_corrupt() {
        let payload = [1, 0, 1, 0, b'k', 9, 0, 0, 0, 0];
        assert!(Record::decode(&payload, 0).is_err());
    }
}
