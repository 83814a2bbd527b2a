//! The multidimensional representation: a compressed cell array holding
//! only nonempty cells in logical-position order, a header translating
//! logical to physical positions, and the dimension value arrays.
//!
//! On disk a store is three files: `<base>.schema`, `<base>.hdr` and
//! `<base>.cells`. Schema and header are loaded into memory; cells are read
//! through a [`BlockFile`] so cell accesses can be observed.

use std::fs;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::blockio::{BlockFile, BlockObserver, DEFAULT_BLOCK_SIZE};
use crate::error::{Error, Result};
use crate::header::{Header, HeaderParams, Scheme};
use crate::measure::Measure;
use crate::relation::{DimensionSchema, Relation};
use crate::wire::{self, Reader};

const SCHEMA_MAGIC: &[u8; 4] = b"MDSM";

pub(crate) fn encode_schema<V: Measure>(schema: &DimensionSchema) -> Vec<u8> {
    let mut out = Vec::new();
    wire::put_magic(&mut out, SCHEMA_MAGIC);
    wire::put_u8(&mut out, V::TAG);
    wire::put_u8(&mut out, V::WIDTH as u8);
    schema.write_to(&mut out);
    out
}

pub(crate) fn decode_schema<V: Measure>(r: &mut Reader<'_>) -> Result<DimensionSchema> {
    r.expect_magic(SCHEMA_MAGIC)?;
    let (tag, width) = (r.u8()?, r.u8()?);
    if tag != V::TAG || width as usize != V::WIDTH {
        return Err(Error::Format(format!(
            "stored measure type tag {tag} (width {width}) does not match the requested type"
        )));
    }
    DimensionSchema::read_from(r)
}

pub(crate) fn with_ext(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Octet counts of a multidimensional store.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdSizeReport {
    pub scheme: Scheme,
    /// Header size by the scheme's formula.
    pub header_disk: u64,
    /// Accelerator arrays that exist only in memory.
    pub header_auxiliary: u64,
    /// Compressed cell array, `N · width`.
    pub cells: u64,
    /// Dimension value arrays as serialized.
    pub schema: u64,
}

impl MdSizeReport {
    pub fn disk(&self) -> u64 {
        self.header_disk + self.cells + self.schema
    }

    pub fn memory(&self) -> u64 {
        self.disk() + self.header_auxiliary
    }

    /// `H`: everything loaded in advance (header, its accelerators, schema).
    pub fn preload(&self) -> u64 {
        self.header_disk + self.header_auxiliary + self.schema
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub block_size: usize,
    /// Read the cell file into memory instead of issuing positional reads.
    /// Block accesses are reported either way.
    pub preload_cells: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            block_size: DEFAULT_BLOCK_SIZE,
            preload_cells: false,
        }
    }
}

#[derive(Debug)]
pub struct MultidimStore<V> {
    schema: DimensionSchema,
    header: Header,
    cells: BlockFile,
    schema_size: u64,
    _measure: PhantomData<V>,
}

impl<V: Measure> MultidimStore<V> {
    pub fn build(rel: &Relation<V>, scheme: Scheme, params: &HeaderParams) -> Result<Self> {
        Self::build_with_block_size(rel, scheme, params, DEFAULT_BLOCK_SIZE)
    }

    pub fn build_with_block_size(
        rel: &Relation<V>,
        scheme: Scheme,
        params: &HeaderParams,
        block_size: usize,
    ) -> Result<Self> {
        let entries = rel.entries_by_position()?;
        let positions: Vec<u64> = entries.iter().map(|&(p, _)| p).collect();
        let header = Header::build(scheme, &positions, rel.schema().total_cells(), params)?;
        let mut bytes = vec![0u8; entries.len() * V::WIDTH];
        for (chunk, &(_, v)) in bytes.chunks_exact_mut(V::WIDTH).zip(&entries) {
            v.write_le(chunk);
        }
        let schema = rel.schema().clone();
        let schema_size = encode_schema::<V>(&schema).len() as u64;
        Ok(MultidimStore {
            schema,
            header,
            cells: BlockFile::in_memory(bytes, block_size)?,
            schema_size,
            _measure: PhantomData,
        })
    }

    pub fn schema(&self) -> &DimensionSchema {
        &self.schema
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn scheme(&self) -> Scheme {
        self.header.scheme()
    }

    /// Number of nonempty cells.
    pub fn len(&self) -> u64 {
        self.header.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_size(&self) -> usize {
        self.cells.block_size()
    }

    pub fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>) {
        self.cells.set_observer(observer);
    }

    pub fn point_query(&self, coords: &[u32]) -> Result<Option<V>> {
        let pos = self.schema.encode(coords)?;
        self.query_position(pos.get())
    }

    pub fn query_position(&self, pos: u64) -> Result<Option<V>> {
        let total = self.schema.total_cells();
        if pos >= total {
            return Err(Error::InvalidPosition {
                position: pos,
                total,
            });
        }
        let Some(j) = self.header.lookup(pos)? else {
            return Ok(None);
        };
        let mut buf = [0u8; 16];
        let buf = &mut buf[..V::WIDTH];
        self.cells.read(j * V::WIDTH as u64, buf)?;
        Ok(Some(V::read_le(buf)))
    }

    pub fn size_report(&self) -> MdSizeReport {
        MdSizeReport {
            scheme: self.scheme(),
            header_disk: self.header.disk_size(),
            header_auxiliary: self.header.auxiliary_size(),
            cells: self.cells.len(),
            schema: self.schema_size,
        }
    }

    pub fn save(&self, base: &Path) -> Result<()> {
        fs::write(with_ext(base, "schema"), encode_schema::<V>(&self.schema))?;
        fs::write(with_ext(base, "hdr"), self.header.encode())?;
        fs::write(with_ext(base, "cells"), self.cells.read_all_unobserved()?)?;
        Ok(())
    }

    pub fn load(base: &Path, opts: &LoadOptions) -> Result<Self> {
        let raw = fs::read(with_ext(base, "schema"))?;
        let mut r = Reader::new(&raw);
        let schema = decode_schema::<V>(&mut r)?;
        r.finish()?;
        let header = Header::decode(&fs::read(with_ext(base, "hdr"))?)?;
        let cells_path = with_ext(base, "cells");
        let cells = if opts.preload_cells {
            BlockFile::in_memory(fs::read(&cells_path)?, opts.block_size)?
        } else {
            BlockFile::open(&cells_path, opts.block_size)?
        };
        if cells.len() != header.len() * V::WIDTH as u64 {
            return Err(Error::Format(format!(
                "cell file has {} octets for {} cells of width {}",
                cells.len(),
                header.len(),
                V::WIDTH
            )));
        }
        if let Some(&last) = header.positions()?.last() {
            if last >= schema.total_cells() {
                return Err(Error::Inconsistent {
                    position: last,
                    total_cells: schema.total_cells(),
                });
            }
        }
        Ok(MultidimStore {
            schema,
            header,
            cells,
            schema_size: raw.len() as u64,
            _measure: PhantomData,
        })
    }
}
