//! Packed on-disk format for binary codes.
//!
//! A file is a sequence of records. Each record is a 16-byte header
//!
//! ```text
//! offset  size  field
//!      0     4  magic "NSQB"
//!      4     4  m       (u32, little-endian)
//!      8     2  lambda  (u16, little-endian)
//!     10     4  p       (u32, little-endian)
//!     14     1  scheme tag: 0 = msq, 1 = sigma-delta, 2 = beta
//!     15     1  scheme parameter: r for sigma-delta, 0 otherwise
//! ```
//!
//! followed by `ceil(m / 8)` bytes of sign bits, least significant bit
//! first, a set bit meaning a positive entry.

use std::io::{Read, Write};

use crate::error::{check_len, invalid, Error, Result};
use crate::quantize::SchemeSpec;

pub const MAGIC: [u8; 4] = *b"NSQB";
pub const HEADER_LEN: usize = 16;

/// Scheme family as stored in a record header. The beta value itself is not
/// stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeTag {
    Msq,
    SigmaDelta(u8),
    Beta,
}

impl SchemeTag {
    fn bytes(self) -> [u8; 2] {
        match self {
            SchemeTag::Msq => [0, 0],
            SchemeTag::SigmaDelta(r) => [1, r],
            SchemeTag::Beta => [2, 0],
        }
    }

    fn from_bytes(tag: u8, param: u8) -> Result<Self> {
        match tag {
            0 => Ok(SchemeTag::Msq),
            1 => Ok(SchemeTag::SigmaDelta(param)),
            2 => Ok(SchemeTag::Beta),
            t => Err(Error::Format(format!("unknown scheme tag {t}"))),
        }
    }
}

impl From<SchemeSpec> for SchemeTag {
    fn from(spec: SchemeSpec) -> Self {
        match spec {
            SchemeSpec::Msq => SchemeTag::Msq,
            SchemeSpec::SigmaDelta { order } => SchemeTag::SigmaDelta(order.min(255) as u8),
            SchemeSpec::Beta { .. } => SchemeTag::Beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeHeader {
    pub m: u32,
    pub lambda: u16,
    pub p: u32,
    pub scheme: SchemeTag,
}

impl CodeHeader {
    pub fn new(m: usize, lambda: usize, p: usize, scheme: SchemeTag) -> Result<Self> {
        Ok(Self {
            m: u32::try_from(m).map_err(|_| invalid("m does not fit in 32 bits"))?,
            lambda: u16::try_from(lambda).map_err(|_| invalid("lambda does not fit in 16 bits"))?,
            p: u32::try_from(p).map_err(|_| invalid("p does not fit in 32 bits"))?,
            scheme,
        })
    }

    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&MAGIC);
        h[4..8].copy_from_slice(&self.m.to_le_bytes());
        h[8..10].copy_from_slice(&self.lambda.to_le_bytes());
        h[10..14].copy_from_slice(&self.p.to_le_bytes());
        h[14..16].copy_from_slice(&self.scheme.bytes());
        h
    }

    fn from_bytes(h: &[u8; HEADER_LEN]) -> Result<Self> {
        if h[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        Ok(Self {
            m: u32::from_le_bytes(h[4..8].try_into().unwrap()),
            lambda: u16::from_le_bytes(h[8..10].try_into().unwrap()),
            p: u32::from_le_bytes(h[10..14].try_into().unwrap()),
            scheme: SchemeTag::from_bytes(h[14], h[15])?,
        })
    }
}

/// One decoded record; `signs` holds `+1.0` / `-1.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeRecord {
    pub header: CodeHeader,
    pub signs: Vec<f64>,
}

/// Packs a two-level code (entries `±delta`) into its record bytes.
pub fn encode_code(header: CodeHeader, q: &[f64]) -> Result<Vec<u8>> {
    check_len("encode code", header.m as usize, q.len())?;
    if let Some(&first) = q.first() {
        let level = first.abs();
        if level == 0.0 || q.iter().any(|v| v.abs() != level) {
            return Err(invalid("only two-level codes can be packed"));
        }
    }
    let mut out = header.to_bytes().to_vec();
    out.extend(q.chunks(8).map(|chunk| {
        chunk
            .iter()
            .enumerate()
            .fold(0u8, |byte, (i, v)| if *v > 0.0 { byte | (1 << i) } else { byte })
    }));
    Ok(out)
}

/// Writes the records for `codes` back to back.
pub fn write_codes<W: Write>(mut w: W, header: CodeHeader, codes: &[Vec<f64>]) -> Result<()> {
    for q in codes {
        w.write_all(&encode_code(header, q)?)?;
    }
    Ok(())
}

/// Reads every record until end of input.
pub fn read_codes<R: Read>(mut r: R) -> Result<Vec<CodeRecord>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_codes(&bytes)
}

pub fn decode_codes(mut bytes: &[u8]) -> Result<Vec<CodeRecord>> {
    let mut records = Vec::new();
    while !bytes.is_empty() {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("truncated header".into()));
        }
        let (head, rest) = bytes.split_at(HEADER_LEN);
        let header = CodeHeader::from_bytes(head.try_into().unwrap())?;
        let m = header.m as usize;
        let body_len = m.div_ceil(8);
        if rest.len() < body_len {
            return Err(Error::Format("truncated code body".into()));
        }
        let (body, rest) = rest.split_at(body_len);
        let signs = (0..m)
            .map(|i| if body[i / 8] >> (i % 8) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        records.push(CodeRecord { header, signs });
        bytes = rest;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let h = CodeHeader::new(10, 5, 2, SchemeTag::SigmaDelta(1)).unwrap();
        let q = [1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, -1.0];
        let bytes = encode_code(h, &q).unwrap();
        assert_eq!(bytes.len(), 18);
        assert_eq!(&bytes[0..4], b"NSQB");
        assert_eq!(&bytes[4..8], &[10, 0, 0, 0]);
        assert_eq!(&bytes[8..10], &[5, 0]);
        assert_eq!(&bytes[10..14], &[2, 0, 0, 0]);
        assert_eq!(&bytes[14..16], &[1, 1]);
        assert_eq!(bytes[16], 0b0000_1101);
        assert_eq!(bytes[17], 0b0000_0001);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_codes(b"NSQ").is_err());
        assert!(decode_codes(&[0u8; 16]).is_err());
        let h = CodeHeader::new(3, 3, 1, SchemeTag::Beta).unwrap();
        assert!(encode_code(h, &[1.0, 3.0, -1.0]).is_err());
        assert!(encode_code(h, &[1.0, -1.0]).is_err());
        let mut bytes = encode_code(h, &[1.0, 1.0, -1.0]).unwrap();
        bytes.pop();
        assert!(decode_codes(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(codes in prop::collection::vec(prop::collection::vec(any::<bool>(), 13), 0..5)) {
            let h = CodeHeader::new(13, 13, 1, SchemeTag::Msq).unwrap();
            let codes: Vec<Vec<f64>> = codes
                .into_iter()
                .map(|c| c.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect())
                .collect();
            let mut buf = Vec::new();
            write_codes(&mut buf, h, &codes).unwrap();
            let back = read_codes(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), codes.len());
            for (rec, q) in back.iter().zip(&codes) {
                prop_assert_eq!(rec.header, h);
                prop_assert_eq!(&rec.signs, q);
            }
        }
    }
}
