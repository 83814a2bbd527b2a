use crate::error::{Error, Result};
use crate::wire::{self, Reader};

/// The full logical position sequence; physical position = index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpcHeader {
    positions: Vec<u64>,
    word_width: u8,
}

impl LpcHeader {
    pub fn build(positions: &[u64], word_width: u8) -> Result<Self> {
        super::validate_positions(positions, word_width)?;
        Ok(LpcHeader {
            positions: positions.to_vec(),
            word_width,
        })
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn word_width(&self) -> u8 {
        self.word_width
    }

    pub fn lookup(&self, pos: u64) -> Option<u64> {
        self.positions.binary_search(&pos).ok().map(|j| j as u64)
    }

    /// `N·ι`
    pub fn payload_size(&self) -> u64 {
        self.positions.len() as u64 * self.word_width as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.word_width as u64);
        wire::put_u64(out, self.positions.len() as u64);
        for &p in &self.positions {
            wire::put_uint(out, p, self.word_width);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let word_width = r.u64()? as u8;
        wire::check_width(word_width)?;
        let n = r.len()?;
        let positions = (0..n)
            .map(|_| r.uint(word_width))
            .collect::<Result<Vec<_>>>()?;
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("LPC positions not increasing".into()));
        }
        Ok(LpcHeader {
            positions,
            word_width,
        })
    }
}
