use std::collections::BTreeMap;

use super::{build_difference_sequence, check_s_bits, check_stride, sampled_window};
use crate::codecs::validate_positions;
use crate::error::{Error, Result};
use crate::huffman::{BitPos, BitStream, BitWriter, CodeBook};
use crate::wire::{self, Reader};

/// Jumps plus the canonical Huffman code of `D_1 … D_{N−1}`.
///
/// `D_0` is always zero and is carried by `J_0`, so it is not encoded.
/// Anchor `m` marks the bit just past the code of `D_{A_{m·n}}` (bit 0 for
/// `A_0 = 0`), so decoding from it yields `D_{A_{m·n}+1}` first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhcHeader {
    jumps: Vec<u64>,
    book: CodeBook,
    stream: BitStream,
    len: u64,
    s_bits: u8,
    stride: usize,
    word_width: u8,
    accel: Vec<u64>,
    anchors: Vec<BitPos>,
}

impl DhcHeader {
    pub fn build(positions: &[u64], s_bits: u8, word_width: u8, stride: usize) -> Result<Self> {
        check_stride(stride)?;
        validate_positions(positions, word_width)?;
        let seq = build_difference_sequence(positions, s_bits)?;
        let stored = &seq.diffs[1..];
        let mut freqs = BTreeMap::new();
        for &d in stored {
            *freqs.entry(d as u32).or_insert(0u64) += 1;
        }
        let book = if freqs.is_empty() {
            CodeBook::from_lengths(Vec::new())?
        } else {
            CodeBook::from_frequencies(&freqs)?
        };

        let mut w = BitWriter::new();
        let mut accel = vec![0u64];
        let mut anchors = vec![BitPos::default()];
        let mut k = 1usize;
        for (i, &d) in stored.iter().enumerate() {
            book.encode_into(d as u32, &mut w)?;
            if d == 0 {
                if k.is_multiple_of(stride) {
                    accel.push(i as u64 + 1);
                    anchors.push(w.position());
                }
                k += 1;
            }
        }
        Ok(DhcHeader {
            jumps: seq.jumps,
            book,
            stream: w.finish(),
            len: positions.len() as u64,
            s_bits,
            stride,
            word_width,
            accel,
            anchors,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn s_bits(&self) -> u8 {
        self.s_bits
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn jumps(&self) -> &[u64] {
        &self.jumps
    }

    pub fn codebook(&self) -> &CodeBook {
        &self.book
    }

    pub fn stream(&self) -> &BitStream {
        &self.stream
    }

    /// Sampled `A_{m·n}`.
    pub fn accel(&self) -> &[u64] {
        &self.accel
    }

    /// Sampled `(Byte, Bit)` anchors, parallel to [`accel`](Self::accel).
    pub fn anchors(&self) -> &[BitPos] {
        &self.anchors
    }

    /// Decodes the whole stream once to recover the sampled arrays.
    pub fn rebuild_accelerators(&mut self) -> Result<()> {
        let mut accel = vec![0u64];
        let mut anchors = vec![BitPos::default()];
        let mut k = 1usize;
        let mut i = 0u64;
        let mut dec = self.book.decoder(&self.stream, BitPos::default())?;
        while let Some(d) = dec.decode_next()? {
            i += 1;
            if d == 0 {
                if k.is_multiple_of(self.stride) {
                    accel.push(i);
                    anchors.push(dec.position());
                }
                k += 1;
            }
        }
        if i + 1 != self.len || k != self.jumps.len() {
            return Err(Error::Format(format!(
                "stream holds {i} differences with {} zeros; expected {} and {}",
                k - 1,
                self.len.saturating_sub(1),
                self.jumps.len().saturating_sub(1)
            )));
        }
        self.accel = accel;
        self.anchors = anchors;
        Ok(())
    }

    pub fn lookup(&self, pos: u64) -> Result<Option<u64>> {
        let Some(m) = sampled_window(&self.jumps, self.stride, self.accel.len(), pos) else {
            return Ok(None);
        };
        let mut k = m * self.stride;
        let mut j = self.accel[m];
        let mut sum = self.jumps[k];
        if sum == pos {
            return Ok(Some(j));
        }
        let mut dec = self.book.decoder(&self.stream, self.anchors[m])?;
        while let Some(d) = dec.decode_next()? {
            j += 1;
            if d == 0 {
                k += 1;
                sum = *self
                    .jumps
                    .get(k)
                    .ok_or(Error::Corrupt(dec.position().offset()))?;
            } else {
                sum += d as u64;
            }
            if sum == pos {
                return Ok(Some(j));
            }
            if sum > pos {
                return Ok(None);
            }
        }
        Ok(None)
    }

    pub fn positions(&self) -> Result<Vec<u64>> {
        let mut diffs = vec![0u64];
        for d in self.book.decoder(&self.stream, BitPos::default())? {
            diffs.push(d? as u64);
        }
        super::reconstruct_positions(&diffs, &self.jumps)
    }

    /// `ι·|J|` + codebook + stream.
    pub fn payload_size(&self) -> u64 {
        self.word_width as u64 * self.jumps.len() as u64
            + self.book.serialized_size()
            + self.stream.serialized_size()
    }

    /// Sampled A (8 octets), Byte (8) and Bit (1) entries held only in memory.
    pub fn auxiliary_size(&self) -> u64 {
        17 * self.accel.len() as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.word_width as u64);
        wire::put_u64(out, self.s_bits as u64);
        wire::put_u64(out, self.stride as u64);
        wire::put_u64(out, self.len);
        wire::put_u64(out, self.jumps.len() as u64);
        for &j in &self.jumps {
            wire::put_uint(out, j, self.word_width);
        }
        self.book.write_to(out);
        self.stream.write_to(out);
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let word_width = r.u64()? as u8;
        wire::check_width(word_width)?;
        let s_bits = r.u64()? as u8;
        check_s_bits(s_bits).map_err(|e| Error::Format(e.to_string()))?;
        let stride = r.len()?;
        check_stride(stride).map_err(|e| Error::Format(e.to_string()))?;
        let len = r.u64()?;
        let jump_count = r.len()?;
        if len == 0 || jump_count == 0 || jump_count as u64 > len {
            return Err(Error::Format(format!(
                "bad DHC counts N={len} |J|={jump_count}"
            )));
        }
        let jumps = (0..jump_count)
            .map(|_| r.uint(word_width))
            .collect::<Result<Vec<_>>>()?;
        let book = CodeBook::read_from(r)?;
        let stream = BitStream::read_from(r)?;
        let mut h = DhcHeader {
            jumps,
            book,
            stream,
            len,
            s_bits,
            stride,
            word_width,
            accel: Vec::new(),
            anchors: Vec::new(),
        };
        h.rebuild_accelerators()?;
        Ok(h)
    }
}
