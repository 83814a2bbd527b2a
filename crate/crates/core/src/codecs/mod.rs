//! The three simpler logical-to-physical headers: run pairs (SCHC), the
//! plain position list (LPC), and base + offset (BOC).

mod boc;
mod lpc;
mod schc;

pub use boc::BocHeader;
pub use lpc::LpcHeader;
pub use schc::SchcHeader;

use crate::error::{Error, Result};
use crate::wire;

/// Checks that `positions` is nonempty, strictly increasing, and fits in
/// `width` octets.
pub(crate) fn validate_positions(positions: &[u64], width: u8) -> Result<()> {
    wire::check_width(width)?;
    let Some(&last) = positions.last() else {
        return Err(Error::EmptyRelation);
    };
    if let Some(i) = positions.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if last > wire::max_for_width(width) {
        return Err(Error::WidthOverflow { value: last, width });
    }
    Ok(())
}
