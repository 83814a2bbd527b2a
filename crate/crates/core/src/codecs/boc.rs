use crate::bitpack::PackedInts;
use crate::error::{Error, Result};
use crate::wire::{self, Reader};

/// Base + offset header: `B_k = L_{k·l}` and `O_j = L_j − B_{⌊j/l⌋}`.
///
/// Bases are `ι`-octet words, offsets `θ`-octet words (`θ < ι`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BocHeader {
    base: Vec<u64>,
    offsets: PackedInts,
    block_len: usize,
    word_width: u8,
    offset_width: u8,
}

impl BocHeader {
    pub fn build(
        positions: &[u64],
        block_len: usize,
        word_width: u8,
        offset_width: u8,
    ) -> Result<Self> {
        super::validate_positions(positions, word_width)?;
        if block_len == 0 {
            return Err(Error::InvalidParameter(
                "BOC block length must be ≥ 1".into(),
            ));
        }
        if offset_width == 0 || offset_width >= word_width || offset_width > 7 {
            return Err(Error::InvalidParameter(format!(
                "BOC offset width {offset_width} must satisfy 1 ≤ θ < ι = {word_width} and θ ≤ 7"
            )));
        }
        let limit = wire::max_for_width(offset_width);
        let mut base = Vec::with_capacity(positions.len().div_ceil(block_len));
        for (k, block) in positions.chunks(block_len).enumerate() {
            let span = block[block.len() - 1] - block[0];
            if span > limit {
                return Err(Error::OffsetOverflow {
                    block: k,
                    span,
                    width: offset_width,
                });
            }
            base.push(block[0]);
        }
        let offsets = PackedInts::from_values(
            positions
                .iter()
                .enumerate()
                .map(|(j, &p)| p - base[j / block_len]),
            offset_width * 8,
        )?;
        Ok(BocHeader {
            base,
            offsets,
            block_len,
            word_width,
            offset_width,
        })
    }

    pub fn base(&self) -> &[u64] {
        &self.base
    }

    pub fn offsets(&self) -> &PackedInts {
        &self.offsets
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn lookup(&self, pos: u64) -> Option<u64> {
        let k = self.base.partition_point(|&b| b <= pos).checked_sub(1)?;
        let want = pos - self.base[k];
        let start = k * self.block_len;
        let end = (start + self.block_len).min(self.offsets.len());
        let (mut lo, mut hi) = (start, end);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let o = self.offsets.get(mid);
            if o == want {
                return Some(mid as u64);
            } else if o < want {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        None
    }

    pub fn positions(&self) -> Vec<u64> {
        (0..self.offsets.len())
            .map(|j| self.base[j / self.block_len] + self.offsets.get(j))
            .collect()
    }

    /// `ι·|base| + θ·N`
    pub fn payload_size(&self) -> u64 {
        self.word_width as u64 * self.base.len() as u64
            + self.offset_width as u64 * self.offsets.len() as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.word_width as u64);
        wire::put_u64(out, self.offset_width as u64);
        wire::put_u64(out, self.block_len as u64);
        wire::put_u64(out, self.offsets.len() as u64);
        for &b in &self.base {
            wire::put_uint(out, b, self.word_width);
        }
        out.extend_from_slice(self.offsets.as_bytes());
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let word_width = r.u64()? as u8;
        let offset_width = r.u64()? as u8;
        wire::check_width(word_width)?;
        if offset_width == 0 || offset_width >= word_width || offset_width > 7 {
            return Err(Error::Format(format!(
                "bad BOC offset width {offset_width}"
            )));
        }
        let block_len = r.len()?;
        let n = r.len()?;
        if block_len == 0 || n == 0 {
            return Err(Error::Format("empty BOC header".into()));
        }
        let base = (0..(n - 1) / block_len + 1)
            .map(|_| r.uint(word_width))
            .collect::<Result<Vec<_>>>()?;
        let raw = r.bytes(n * offset_width as usize)?.to_vec();
        let offsets = PackedInts::from_bytes(offset_width * 8, n, raw)?;
        Ok(BocHeader {
            base,
            offsets,
            block_len,
            word_width,
            offset_width,
        })
    }
}
