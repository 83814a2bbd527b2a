//! Scheme selection and a single enum over the five header kinds.

use std::fmt;
use std::str::FromStr;

use crate::codecs::{BocHeader, LpcHeader, SchcHeader};
use crate::diffseq::{DhcHeader, DscHeader, DEFAULT_STRIDE, DEFAULT_S_BITS};
use crate::error::{Error, Result};
use crate::wire::{self, Reader};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Schc,
    Lpc,
    Boc,
    Dsc,
    Dhc,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Schc,
        Scheme::Lpc,
        Scheme::Boc,
        Scheme::Dsc,
        Scheme::Dhc,
    ];

    fn magic(self) -> &'static [u8; 4] {
        match self {
            Scheme::Schc => b"SCHC",
            Scheme::Lpc => b"LPCH",
            Scheme::Boc => b"BOCH",
            Scheme::Dsc => b"DSCH",
            Scheme::Dhc => b"DHCH",
        }
    }

    fn from_magic(m: &[u8]) -> Option<Self> {
        Scheme::ALL.into_iter().find(|s| s.magic() == m)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Schc => "SCHC",
            Scheme::Lpc => "LPC",
            Scheme::Boc => "BOC",
            Scheme::Dsc => "DSC",
            Scheme::Dhc => "DHC",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme {s:?}")))
    }
}

/// Build parameters; each scheme reads the fields it needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeaderParams {
    /// ι: octets per logical position.
    pub word_width: u8,
    /// θ: octets per BOC offset.
    pub offset_width: u8,
    /// l: BOC block length.
    pub block_len: usize,
    /// s: bits per difference.
    pub s_bits: u8,
    /// n: accelerator sampling stride.
    pub stride: usize,
}

impl Default for HeaderParams {
    fn default() -> Self {
        HeaderParams {
            word_width: 8,
            offset_width: 2,
            block_len: 16,
            s_bits: DEFAULT_S_BITS,
            stride: DEFAULT_STRIDE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Header {
    Schc(SchcHeader),
    Lpc(LpcHeader),
    Boc(BocHeader),
    Dsc(DscHeader),
    Dhc(DhcHeader),
}

impl Header {
    pub fn build(
        scheme: Scheme,
        positions: &[u64],
        total_cells: u64,
        p: &HeaderParams,
    ) -> Result<Self> {
        if let Some(&last) = positions.last() {
            if last >= total_cells {
                return Err(Error::Inconsistent {
                    position: last,
                    total_cells,
                });
            }
        }
        Ok(match scheme {
            Scheme::Schc => Header::Schc(SchcHeader::build(positions, total_cells, p.word_width)?),
            Scheme::Lpc => Header::Lpc(LpcHeader::build(positions, p.word_width)?),
            Scheme::Boc => Header::Boc(BocHeader::build(
                positions,
                p.block_len,
                p.word_width,
                p.offset_width,
            )?),
            Scheme::Dsc => Header::Dsc(DscHeader::build(
                positions,
                p.s_bits,
                p.word_width,
                p.stride,
            )?),
            Scheme::Dhc => Header::Dhc(DhcHeader::build(
                positions,
                p.s_bits,
                p.word_width,
                p.stride,
            )?),
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Header::Schc(_) => Scheme::Schc,
            Header::Lpc(_) => Scheme::Lpc,
            Header::Boc(_) => Scheme::Boc,
            Header::Dsc(_) => Scheme::Dsc,
            Header::Dhc(_) => Scheme::Dhc,
        }
    }

    /// Number of nonempty cells described.
    pub fn len(&self) -> u64 {
        match self {
            Header::Schc(h) => h.len(),
            Header::Lpc(h) => h.positions().len() as u64,
            Header::Boc(h) => h.len() as u64,
            Header::Dsc(h) => h.len() as u64,
            Header::Dhc(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical position of logical position `pos`, or `None` for an empty cell.
    #[inline]
    pub fn lookup(&self, pos: u64) -> Result<Option<u64>> {
        Ok(match self {
            Header::Schc(h) => h.lookup(pos),
            Header::Lpc(h) => h.lookup(pos),
            Header::Boc(h) => h.lookup(pos),
            Header::Dsc(h) => h.lookup(pos),
            Header::Dhc(h) => return h.lookup(pos),
        })
    }

    pub fn positions(&self) -> Result<Vec<u64>> {
        Ok(match self {
            Header::Schc(h) => h.positions(),
            Header::Lpc(h) => h.positions().to_vec(),
            Header::Boc(h) => h.positions(),
            Header::Dsc(h) => h.positions(),
            Header::Dhc(h) => return h.positions(),
        })
    }

    /// Header octets on disk, per the scheme's size formula.
    pub fn disk_size(&self) -> u64 {
        match self {
            Header::Schc(h) => h.payload_size(),
            Header::Lpc(h) => h.payload_size(),
            Header::Boc(h) => h.payload_size(),
            Header::Dsc(h) => h.payload_size(),
            Header::Dhc(h) => h.payload_size(),
        }
    }

    /// Sampled arrays rebuilt on load and never written.
    pub fn auxiliary_size(&self) -> u64 {
        match self {
            Header::Dsc(h) => h.auxiliary_size(),
            Header::Dhc(h) => h.auxiliary_size(),
            _ => 0,
        }
    }

    pub fn memory_size(&self) -> u64 {
        self.disk_size() + self.auxiliary_size()
    }

    /// Magic, version, parameter words, then the scheme's sequences.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.disk_size() as usize + 64);
        wire::put_magic(&mut out, self.scheme().magic());
        match self {
            Header::Schc(h) => h.write_to(&mut out),
            Header::Lpc(h) => h.write_to(&mut out),
            Header::Boc(h) => h.write_to(&mut out),
            Header::Dsc(h) => h.write_to(&mut out),
            Header::Dhc(h) => h.write_to(&mut out),
        }
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        let scheme = buf
            .get(..4)
            .and_then(Scheme::from_magic)
            .ok_or_else(|| Error::Format("unrecognized header magic".into()))?;
        let mut r = Reader::new(buf);
        r.expect_magic(scheme.magic())?;
        let h = match scheme {
            Scheme::Schc => Header::Schc(SchcHeader::read_from(&mut r)?),
            Scheme::Lpc => Header::Lpc(LpcHeader::read_from(&mut r)?),
            Scheme::Boc => Header::Boc(BocHeader::read_from(&mut r)?),
            Scheme::Dsc => Header::Dsc(DscHeader::read_from(&mut r)?),
            Scheme::Dhc => Header::Dhc(DhcHeader::read_from(&mut r)?),
        };
        r.finish()?;
        Ok(h)
    }
}
