//! Difference-sequence headers: packed differences (DSC) and
//! Huffman-coded differences (DHC), both backed by a jump sequence.
//!
//! `D_i = L_i − L_{i−1}` when that gap fits in `s` bits and `i > 0`,
//! otherwise 0; every zero corresponds to one jump `J_k = L_i`, and the
//! accelerator `A_k = i` records where each jump sits in the sequence.

mod dhc;
mod dsc;

pub use dhc::DhcHeader;
pub use dsc::DscHeader;

use crate::codecs::validate_positions;
use crate::error::{Error, Result};

pub const DEFAULT_S_BITS: u8 = 16;
pub const DEFAULT_STRIDE: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceSequence {
    pub diffs: Vec<u64>,
    pub jumps: Vec<u64>,
    /// Full accelerator: `jumps[k] == L[accel[k]]`.
    pub accel: Vec<u64>,
}

pub(crate) fn check_s_bits(s_bits: u8) -> Result<()> {
    if (1..=32).contains(&s_bits) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "difference width must be 1..=32 bits, got {s_bits}"
        )))
    }
}

pub(crate) fn check_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        Err(Error::InvalidParameter(
            "accelerator stride must be ≥ 1".into(),
        ))
    } else {
        Ok(())
    }
}

pub fn build_difference_sequence(positions: &[u64], s_bits: u8) -> Result<DifferenceSequence> {
    check_s_bits(s_bits)?;
    validate_positions(positions, 8)?;
    let max_diff = (1u64 << s_bits) - 1;
    let mut diffs = Vec::with_capacity(positions.len());
    let mut jumps = Vec::new();
    let mut accel = Vec::new();
    for (i, &p) in positions.iter().enumerate() {
        let d = if i == 0 { 0 } else { p - positions[i - 1] };
        if i > 0 && d <= max_diff {
            diffs.push(d);
        } else {
            diffs.push(0);
            jumps.push(p);
            accel.push(i as u64);
        }
    }
    Ok(DifferenceSequence {
        diffs,
        jumps,
        accel,
    })
}

/// `L_i = L_{i−1} + D_i` when `D_i > 0`, otherwise the next jump.
pub fn reconstruct_positions(diffs: &[u64], jumps: &[u64]) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(diffs.len());
    let mut next_jump = jumps.iter();
    for (i, &d) in diffs.iter().enumerate() {
        let p = if d == 0 {
            *next_jump
                .next()
                .ok_or_else(|| Error::Format(format!("difference {i} has no matching jump")))?
        } else {
            let prev = *out
                .last()
                .ok_or_else(|| Error::Format("first difference must be zero".into()))?;
            prev + d
        };
        out.push(p);
    }
    if next_jump.next().is_some() {
        return Err(Error::Format("more jumps than zero differences".into()));
    }
    Ok(out)
}

/// Index `m` of the last sampled jump `jumps[m·stride] ≤ pos`.
pub(crate) fn sampled_window(
    jumps: &[u64],
    stride: usize,
    samples: usize,
    pos: u64,
) -> Option<usize> {
    let (mut lo, mut hi) = (0usize, samples);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if jumps[mid * stride] <= pos {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo.checked_sub(1)
}
