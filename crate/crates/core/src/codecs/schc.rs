use crate::error::{Error, Result};
use crate::wire::{self, Reader};

/// One `(L_j, V_j)` pair per maximal run of consecutive nonempty cells.
///
/// `L_j` is the last position of the run and `V_j` the number of empty
/// cells before it, so the run's cells map to physical `L − V_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchcHeader {
    runs: Vec<(u64, u64)>,
    word_width: u8,
    len: u64,
}

impl SchcHeader {
    pub fn build(positions: &[u64], total_cells: u64, word_width: u8) -> Result<Self> {
        super::validate_positions(positions, word_width)?;
        let last = *positions.last().unwrap();
        if last >= total_cells {
            return Err(Error::Inconsistent {
                position: last,
                total_cells,
            });
        }
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for (j, &p) in positions.iter().enumerate() {
            let empties = p - j as u64;
            match runs.last_mut() {
                Some(run) if run.0 + 1 == p => run.0 = p,
                _ => runs.push((p, empties)),
            }
        }
        Ok(SchcHeader {
            runs,
            word_width,
            len: positions.len() as u64,
        })
    }

    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    /// Number of E*F* runs.
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn word_width(&self) -> u8 {
        self.word_width
    }

    pub fn lookup(&self, pos: u64) -> Option<u64> {
        let j = self.runs.partition_point(|&(l, _)| l < pos);
        let &(_, empties) = self.runs.get(j)?;
        let (prev_l, prev_v) = if j == 0 {
            (-1i128, 0u64)
        } else {
            let (l, v) = self.runs[j - 1];
            (l as i128, v)
        };
        // Cells after the previous run's end and up to L_{j-1} + (V_j − V_{j-1}) are empty.
        if (pos as i128) > prev_l + (empties - prev_v) as i128 {
            Some(pos - empties)
        } else {
            None
        }
    }

    /// Reconstructs the full logical position sequence.
    pub fn positions(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        let mut prev_v = 0u64;
        let mut prev_l: i128 = -1;
        for &(l, v) in &self.runs {
            let start = (prev_l + 1) as u64 + (v - prev_v);
            out.extend(start..=l);
            prev_l = l as i128;
            prev_v = v;
        }
        out
    }

    /// `2·ν·ι`
    pub fn payload_size(&self) -> u64 {
        2 * self.runs.len() as u64 * self.word_width as u64
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u64(out, self.word_width as u64);
        wire::put_u64(out, self.len);
        wire::put_u64(out, self.runs.len() as u64);
        for &(l, v) in &self.runs {
            wire::put_uint(out, l, self.word_width);
            wire::put_uint(out, v, self.word_width);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let word_width = r.u64()? as u8;
        wire::check_width(word_width)?;
        let len = r.u64()?;
        let count = r.len()?;
        let mut runs = Vec::with_capacity(count);
        for _ in 0..count {
            runs.push((r.uint(word_width)?, r.uint(word_width)?));
        }
        let h = SchcHeader {
            runs,
            word_width,
            len,
        };
        if h.positions().len() as u64 != len {
            return Err(Error::Format(
                "SCHC run pairs disagree with cell count".into(),
            ));
        }
        Ok(h)
    }
}
