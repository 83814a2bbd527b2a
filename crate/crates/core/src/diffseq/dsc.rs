use super::{build_difference_sequence, check_s_bits, check_stride, sampled_window};
use crate::bitpack::PackedInts;
use crate::codecs::validate_positions;
use crate::error::{Error, Result};
use crate::wire::{self, Reader};

/// Packed `s`-bit differences plus `ι`-octet jumps.
///
/// Only `A_0, A_n, A_2n, …` of the accelerator are kept, and they are
/// rebuilt from the differences on load rather than stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DscHeader {
    diffs: PackedInts,
    jumps: Vec<u64>,
    accel: Vec<u64>,
    stride: usize,
    word_width: u8,
}

impl DscHeader {
    pub fn build(positions: &[u64], s_bits: u8, word_width: u8, stride: usize) -> Result<Self> {
        check_stride(stride)?;
        validate_positions(positions, word_width)?;
        let seq = build_difference_sequence(positions, s_bits)?;
        let accel = seq.accel.iter().step_by(stride).copied().collect();
        Ok(DscHeader {
            diffs: PackedInts::from_values(seq.diffs.into_iter(), s_bits)?,
            jumps: seq.jumps,
            accel,
            stride,
            word_width,
        })
    }

    pub fn s_bits(&self) -> u8 {
        self.diffs.width()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn jumps(&self) -> &[u64] {
        &self.jumps
    }

    pub fn diffs(&self) -> &PackedInts {
        &self.diffs
    }

    /// Sampled accelerator entries `A_{m·n}`.
    pub fn accel(&self) -> &[u64] {
        &self.accel
    }

    /// One pass over the differences: the k-th zero is jump k.
    pub fn rebuild_accelerators(&mut self) -> Result<()> {
        let mut accel = Vec::with_capacity(self.jumps.len().div_ceil(self.stride));
        let mut k = 0usize;
        for (i, d) in self.diffs.iter().enumerate() {
            if d == 0 {
                if k.is_multiple_of(self.stride) {
                    accel.push(i as u64);
                }
                k += 1;
            }
        }
        if k != self.jumps.len() || self.diffs.get(0) != 0 {
            return Err(Error::Format(format!(
                "{k} zero differences for {} jumps",
                self.jumps.len()
            )));
        }
        self.accel = accel;
        Ok(())
    }

    pub fn lookup(&self, pos: u64) -> Option<u64> {
        let m = sampled_window(&self.jumps, self.stride, self.accel.len(), pos)?;
        let mut k = m * self.stride;
        let mut j = self.accel[m] as usize;
        let mut sum = self.jumps[k];
        loop {
            if sum == pos {
                return Some(j as u64);
            }
            j += 1;
            if j >= self.diffs.len() {
                return None;
            }
            let d = self.diffs.get(j);
            if d == 0 {
                k += 1;
                sum = self.jumps[k];
            } else {
                sum += d;
            }
            if sum > pos {
                return None;
            }
        }
    }

    pub fn positions(&self) -> Vec<u64> {
        super::reconstruct_positions(&self.diffs.iter().collect::<Vec<_>>(), &self.jumps)
            .expect("header built from a valid sequence")
    }

    /// `⌈s·N/8⌉ + ι·|J|`
    pub fn payload_size(&self) -> u64 {
        self.diffs.as_bytes().len() as u64 + self.word_width as u64 * self.jumps.len() as u64
    }

    /// Octets of the sampled accelerator held only in memory.
    pub fn auxiliary_size(&self) -> u64 {
        8 * self.accel.len() as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.word_width as u64);
        wire::put_u64(out, self.s_bits() as u64);
        wire::put_u64(out, self.stride as u64);
        wire::put_u64(out, self.diffs.len() as u64);
        wire::put_u64(out, self.jumps.len() as u64);
        for &j in &self.jumps {
            wire::put_uint(out, j, self.word_width);
        }
        out.extend_from_slice(self.diffs.as_bytes());
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let word_width = r.u64()? as u8;
        wire::check_width(word_width)?;
        let s_bits = r.u64()? as u8;
        check_s_bits(s_bits).map_err(|e| Error::Format(e.to_string()))?;
        let stride = r.len()?;
        check_stride(stride).map_err(|e| Error::Format(e.to_string()))?;
        let n = r.len()?;
        let jump_count = r.len()?;
        if n == 0 || jump_count == 0 || jump_count > n {
            return Err(Error::Format(format!(
                "bad DSC counts N={n} |J|={jump_count}"
            )));
        }
        let jumps = (0..jump_count)
            .map(|_| r.uint(word_width))
            .collect::<Result<Vec<_>>>()?;
        let raw = r.bytes((s_bits as usize * n).div_ceil(8))?.to_vec();
        let mut h = DscHeader {
            diffs: PackedInts::from_bytes(s_bits, n, raw)?,
            jumps,
            accel: Vec::new(),
            stride,
            word_width,
        };
        h.rebuild_accelerators()?;
        Ok(h)
    }
}
