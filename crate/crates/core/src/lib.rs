//! Compressed storage for sparse multidimensional arrays.
//!
//! Only nonempty cells are stored, in logical-position order; a header maps
//! a cell's logical position to its physical slot. Five header schemes are
//! provided ([`Scheme`]), alongside a row-table baseline with a paged B-tree
//! ([`TableStore`]) and an analytic model of retrieval time under partial
//! caching ([`cachemodel`]).

pub mod bitpack;
pub mod blockio;
pub mod cachemodel;
pub mod codecs;
pub mod diffseq;
pub mod error;
pub mod header;
pub mod huffman;
pub mod ingest;
pub mod mdstore;
pub mod measure;
pub mod relation;
pub mod tablestore;
mod wire;

pub use blockio::{BlockFile, BlockKey, BlockObserver, DEFAULT_BLOCK_SIZE};
pub use error::{Error, Result};
pub use header::{Header, HeaderParams, Scheme};
pub use mdstore::{LoadOptions, MdSizeReport, MultidimStore};
pub use measure::Measure;
pub use relation::{Dimension, DimensionSchema, LogicalPosition, Relation};
pub use tablestore::{TableSizeReport, TableStore};

/// Relation with `f64` measures.
pub type RelationF64 = Relation<f64>;
/// Multidimensional store with `f64` measures.
pub type MdStoreF64 = MultidimStore<f64>;
/// Table store with `f64` measures.
pub type TableStoreF64 = TableStore<f64>;
