//! The table representation: one fixed-width row per nonempty cell plus a
//! bulk-loaded paged B-tree keyed by logical position.
//!
//! `<base>.rows` holds rows of `arity` little-endian `u32` coordinate
//! indices followed by the measure, sorted by logical position.
//!
//! `<base>.idx` is a sequence of pages. The leading meta pages carry the
//! parameters and the schema; leaf pages follow, then each interior level,
//! with the root last. Every tree page starts with an 8-octet header
//! (`kind: u8`, pad, `count: u16`, pad `u32`) followed by 16-octet
//! `(key: u64, value: u64)` entries. Leaf values are row numbers; interior
//! values are child page numbers keyed by the child's first key.
//!
//! Interior pages are read into memory at load time, like the
//! multidimensional header. Leaf and row reads go through [`BlockFile`].

use std::fs;
use std::marker::PhantomData;
use std::path::Path;
use std::sync::Arc;

use crate::blockio::{BlockFile, BlockObserver, DEFAULT_BLOCK_SIZE};
use crate::error::{Error, Result};
use crate::mdstore::{decode_schema, encode_schema, with_ext};
use crate::measure::Measure;
use crate::relation::{DimensionSchema, Relation};
use crate::wire::{self, Reader};

const INDEX_MAGIC: &[u8; 4] = b"MDIX";
const PAGE_HEADER: usize = 8;
const ENTRY: usize = 16;
const LEAF: u8 = 0;
const INTERIOR: u8 = 1;

/// Entries per page for a given page size.
pub fn fanout(page_size: usize) -> usize {
    (page_size.saturating_sub(PAGE_HEADER) / ENTRY).min(u16::MAX as usize)
}

fn encode_page(kind: u8, entries: &[(u64, u64)], page_size: usize, out: &mut Vec<u8>) {
    let start = out.len();
    wire::put_u8(out, kind);
    wire::put_u8(out, 0);
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    wire::put_u32(out, 0);
    for &(k, v) in entries {
        wire::put_u64(out, k);
        wire::put_u64(out, v);
    }
    out.resize(start + page_size, 0);
}

fn decode_page(buf: &[u8], want_kind: u8) -> Result<Vec<(u64, u64)>> {
    let mut r = Reader::new(buf);
    let kind = r.u8()?;
    r.u8()?;
    let count = u16::from_le_bytes(r.bytes(2)?.try_into().unwrap()) as usize;
    r.u32()?;
    if kind != want_kind {
        return Err(Error::Format(format!(
            "expected page kind {want_kind}, found {kind}"
        )));
    }
    (0..count).map(|_| Ok((r.u64()?, r.u64()?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableSizeReport {
    pub rows: u64,
    pub index: u64,
    /// Meta and interior index pages held in memory.
    pub preload: u64,
}

impl TableSizeReport {
    /// `S`: total size of the representation.
    pub fn total(&self) -> u64 {
        self.rows + self.index
    }
}

#[derive(Debug)]
pub struct TableStore<V> {
    schema: DimensionSchema,
    rows: BlockFile,
    index: BlockFile,
    page_size: usize,
    len: u64,
    meta_pages: u64,
    leaf_count: u64,
    height: u32,
    root: u64,
    /// Interior pages in page order, starting right after the leaves.
    interior: Vec<Vec<(u64, u64)>>,
    _measure: PhantomData<V>,
}

impl<V: Measure> TableStore<V> {
    pub fn build(rel: &Relation<V>) -> Result<Self> {
        Self::build_with_page_size(rel, DEFAULT_BLOCK_SIZE)
    }

    pub fn build_with_page_size(rel: &Relation<V>, page_size: usize) -> Result<Self> {
        let fan = fanout(page_size);
        if fan < 2 {
            return Err(Error::InvalidParameter(format!(
                "page size {page_size} holds fewer than two index entries"
            )));
        }
        let schema = rel.schema().clone();
        let entries = rel.entries_by_position()?;
        let arity = schema.arity();
        let row_width = 4 * arity + V::WIDTH;

        let mut rows = Vec::with_capacity(entries.len() * row_width);
        for &(p, v) in &entries {
            for c in schema.decode(crate::relation::LogicalPosition(p))? {
                wire::put_u32(&mut rows, c);
            }
            let at = rows.len();
            rows.resize(at + V::WIDTH, 0);
            v.write_le(&mut rows[at..]);
        }

        let schema_bytes = encode_schema::<V>(&schema);
        let meta_len = 5 + 6 * 8 + 8 + schema_bytes.len();
        let meta_pages = meta_len.div_ceil(page_size) as u64;

        // Levels of (first key, page number) for the level above.
        let mut pages: Vec<u8> = Vec::new();
        let mut next_page = meta_pages;
        let mut level: Vec<(u64, u64)> = Vec::new();
        for (row, chunk) in entries.chunks(fan).enumerate() {
            let leaf: Vec<(u64, u64)> = chunk
                .iter()
                .enumerate()
                .map(|(i, &(p, _))| (p, (row * fan + i) as u64))
                .collect();
            encode_page(LEAF, &leaf, page_size, &mut pages);
            level.push((leaf[0].0, next_page));
            next_page += 1;
        }
        let leaf_count = level.len() as u64;
        let mut height = 1u32;
        let mut interior = Vec::new();
        while level.len() > 1 {
            let mut up = Vec::new();
            for chunk in level.chunks(fan) {
                encode_page(INTERIOR, chunk, page_size, &mut pages);
                interior.push(chunk.to_vec());
                up.push((chunk[0].0, next_page));
                next_page += 1;
            }
            level = up;
            height += 1;
        }
        let root = level[0].1;

        let mut idx = Vec::with_capacity(meta_pages as usize * page_size + pages.len());
        wire::put_magic(&mut idx, INDEX_MAGIC);
        for v in [
            page_size as u64,
            entries.len() as u64,
            meta_pages,
            leaf_count,
            height as u64,
            root,
        ] {
            wire::put_u64(&mut idx, v);
        }
        wire::put_u64(&mut idx, schema_bytes.len() as u64);
        idx.extend_from_slice(&schema_bytes);
        idx.resize(meta_pages as usize * page_size, 0);
        idx.extend_from_slice(&pages);

        Ok(TableStore {
            schema,
            rows: BlockFile::in_memory(rows, page_size)?,
            index: BlockFile::in_memory(idx, page_size)?,
            page_size,
            len: entries.len() as u64,
            meta_pages,
            leaf_count,
            height,
            root,
            interior,
            _measure: PhantomData,
        })
    }

    pub fn schema(&self) -> &DimensionSchema {
        &self.schema
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row_width(&self) -> usize {
        4 * self.schema.arity() + V::WIDTH
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    /// Tree levels including the leaves.
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaf_count
    }

    pub fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>) {
        self.rows.set_observer(observer.clone());
        self.index.set_observer(observer);
    }

    pub fn size_report(&self) -> TableSizeReport {
        TableSizeReport {
            rows: self.rows.len(),
            index: self.index.len(),
            preload: (self.meta_pages + self.interior.len() as u64) * self.page_size as u64,
        }
    }

    pub fn point_query(&self, coords: &[u32]) -> Result<Option<V>> {
        let key = self.schema.encode(coords)?.get();
        let Some(row) = self.find_row(key)? else {
            return Ok(None);
        };
        let w = self.row_width();
        let mut buf = vec![0u8; w];
        self.rows.read(row * w as u64, &mut buf)?;
        Ok(Some(V::read_le(&buf[4 * self.schema.arity()..])))
    }

    fn find_row(&self, key: u64) -> Result<Option<u64>> {
        let first_interior = self.meta_pages + self.leaf_count;
        let mut page = self.root;
        while page >= first_interior {
            let entries = &self.interior[(page - first_interior) as usize];
            let i = entries.partition_point(|&(k, _)| k <= key);
            if i == 0 {
                return Ok(None);
            }
            page = entries[i - 1].1;
        }
        let mut buf = vec![0u8; self.page_size];
        self.index.read(page * self.page_size as u64, &mut buf)?;
        let leaf = decode_page(&buf, LEAF)?;
        Ok(leaf
            .binary_search_by_key(&key, |&(k, _)| k)
            .ok()
            .map(|i| leaf[i].1))
    }

    pub fn save(&self, base: &Path) -> Result<()> {
        fs::write(with_ext(base, "rows"), self.rows.read_all_unobserved()?)?;
        fs::write(with_ext(base, "idx"), self.index.read_all_unobserved()?)?;
        Ok(())
    }

    pub fn load(base: &Path, block_size_override: Option<usize>) -> Result<Self> {
        let idx_path = with_ext(base, "idx");
        let probe = BlockFile::open(&idx_path, DEFAULT_BLOCK_SIZE)?;
        let mut head = vec![0u8; (5 + 7 * 8).min(probe.len() as usize)];
        probe.read(0, &mut head)?;
        let mut r = Reader::new(&head);
        r.expect_magic(INDEX_MAGIC)?;
        let page_size = r.len()?;
        let len = r.u64()?;
        let meta_pages = r.u64()?;
        let leaf_count = r.u64()?;
        let height = r.u64()? as u32;
        let root = r.u64()?;
        let schema_len = r.len()?;
        if fanout(page_size) < 2 || probe.len() % page_size as u64 != 0 {
            return Err(Error::Format(format!("bad index page size {page_size}")));
        }
        if let Some(bs) = block_size_override {
            if bs != page_size {
                return Err(Error::InvalidParameter(format!(
                    "index was built with {page_size}-octet pages, not {bs}"
                )));
            }
        }

        let mut schema_raw = vec![0u8; schema_len];
        probe.read(head.len() as u64, &mut schema_raw)?;
        let mut sr = Reader::new(&schema_raw);
        let schema = decode_schema::<V>(&mut sr)?;
        sr.finish()?;

        let first_interior = meta_pages + leaf_count;
        let total_pages = probe.len() / page_size as u64;
        if root + 1 != total_pages || first_interior > total_pages {
            return Err(Error::Format("index page counts are inconsistent".into()));
        }
        let mut interior = Vec::new();
        let mut buf = vec![0u8; page_size];
        for page in first_interior..total_pages {
            probe.read(page * page_size as u64, &mut buf)?;
            interior.push(decode_page(&buf, INTERIOR)?);
        }

        let rows = BlockFile::open(&with_ext(base, "rows"), page_size)?;
        let store = TableStore {
            schema,
            rows,
            index: BlockFile::open(&idx_path, page_size)?,
            page_size,
            len,
            meta_pages,
            leaf_count,
            height,
            root,
            interior,
            _measure: PhantomData,
        };
        if store.rows.len() != len * store.row_width() as u64 {
            return Err(Error::Format(format!(
                "row file has {} octets for {len} rows of width {}",
                store.rows.len(),
                store.row_width()
            )));
        }
        Ok(store)
    }
}
