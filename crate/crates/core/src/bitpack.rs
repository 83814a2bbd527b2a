//! Fixed-width bit-packed unsigned integers.
//!
//! Value `i` occupies bits `[i·w, (i+1)·w)` of a little-endian bit string:
//! the low bits of each value go into the lower-addressed octets.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedInts {
    width: u8,
    len: usize,
    bytes: Vec<u8>,
}

fn byte_len(width: u8, len: usize) -> usize {
    (width as usize * len).div_ceil(8)
}

impl PackedInts {
    /// Packs `values`, each of which must fit in `width` bits (1..=56).
    pub fn from_values(values: impl ExactSizeIterator<Item = u64>, width: u8) -> Result<Self> {
        if !(1..=56).contains(&width) {
            return Err(Error::InvalidParameter(format!(
                "packed width must be 1..=56 bits, got {width}"
            )));
        }
        let len = values.len();
        let limit = (1u64 << width) - 1;
        // One spare word so every write can be a full 8-octet store.
        let mut bytes = vec![0u8; byte_len(width, len) + 8];
        for (i, v) in values.enumerate() {
            if v > limit {
                return Err(Error::WidthOverflow {
                    value: v,
                    width: width.div_ceil(8),
                });
            }
            let bit = i * width as usize;
            let at = bit / 8;
            let mut word = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            word |= v << (bit % 8);
            bytes[at..at + 8].copy_from_slice(&word.to_le_bytes());
        }
        bytes.truncate(byte_len(width, len));
        Ok(PackedInts { width, len, bytes })
    }

    pub fn from_bytes(width: u8, len: usize, bytes: Vec<u8>) -> Result<Self> {
        if !(1..=56).contains(&width) {
            return Err(Error::Format(format!("packed width {width} out of range")));
        }
        if bytes.len() != byte_len(width, len) {
            return Err(Error::Format(format!(
                "packed array of {len}×{width} bits needs {} octets, got {}",
                byte_len(width, len),
                bytes.len()
            )));
        }
        Ok(PackedInts { width, len, bytes })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "index {i} out of bounds ({})", self.len);
        let w = self.width as usize;
        let bit = i * w;
        let at = bit / 8;
        match w {
            8 => self.bytes[at] as u64,
            16 => u16::from_le_bytes([self.bytes[at], self.bytes[at + 1]]) as u64,
            _ => {
                let mut raw = [0u8; 8];
                let end = (at + 8).min(self.bytes.len());
                raw[..end - at].copy_from_slice(&self.bytes[at..end]);
                (u64::from_le_bytes(raw) >> (bit % 8)) & ((1u64 << w) - 1)
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}
