use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("coordinate {index} out of range for dimension {dim} (cardinality {cardinality})")]
    InvalidCoordinate {
        dim: usize,
        index: u64,
        cardinality: u64,
    },

    #[error("logical position {position} out of range (total cells {total})")]
    InvalidPosition { position: u64, total: u64 },

    #[error("relation has no nonempty cells")]
    EmptyRelation,

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("cell count of the schema overflows a 64-bit logical position")]
    CellCountOverflow,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("logical positions not strictly increasing at index {index}")]
    Unsorted { index: usize },

    #[error("logical position {position} lies outside the {total_cells}-cell array")]
    Inconsistent { position: u64, total_cells: u64 },

    #[error("block {block}: offset span {span} does not fit in {width} octets")]
    OffsetOverflow { block: usize, span: u64, width: u8 },

    #[error("value {value} does not fit in {width} octets")]
    WidthOverflow { value: u64, width: u8 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency table is empty")]
    EmptyAlphabet,

    #[error("symbol {0} has no code")]
    UnknownSymbol(u32),

    #[error("code length {0} exceeds the decoder limit")]
    CodeTooLong(usize),

    #[error("corrupt code stream at bit {0}")]
    Corrupt(u64),

    #[error("bit position {position} beyond stream end ({len} bits)")]
    OutOfStream { position: u64, len: u64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("model domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
