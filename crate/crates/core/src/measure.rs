use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::NumCast;

/// Fixed-width cell payload.
///
/// Every value of a given measure type occupies exactly [`Measure::WIDTH`]
/// octets in a cell array or table row, stored little-endian.
pub trait Measure:
    Copy + PartialEq + Debug + Display + FromStr + NumCast + Send + Sync + 'static
{
    const WIDTH: usize;
    /// Type tag written into schema files so a store cannot be opened with
    /// the wrong payload type.
    const TAG: u8;

    fn write_le(self, out: &mut [u8]);
    fn read_le(bytes: &[u8]) -> Self;
}

macro_rules! impl_measure {
    ($($t:ty => $tag:expr),* $(,)?) => {
        $(
            impl Measure for $t {
                const WIDTH: usize = std::mem::size_of::<$t>();
                const TAG: u8 = $tag;

                #[inline]
                fn write_le(self, out: &mut [u8]) {
                    out[..Self::WIDTH].copy_from_slice(&self.to_le_bytes());
                }

                #[inline]
                fn read_le(bytes: &[u8]) -> Self {
                    let mut raw = [0u8; std::mem::size_of::<$t>()];
                    raw.copy_from_slice(&bytes[..Self::WIDTH]);
                    <$t>::from_le_bytes(raw)
                }
            }
        )*
    };
}

impl_measure!(f64 => 1, f32 => 2, i64 => 3, i32 => 4, u64 => 5, u32 => 6);
