//! Block-granular reads with an optional access observer.
//!
//! Every read that goes through a [`BlockFile`] reports each block it
//! touches to the observer before the bytes are fetched, which lets a
//! caller simulate a cache without controlling the OS page cache.

use std::fmt;
use std::fs::File;
use std::io;
use std::os::unix::fs::FileExt;
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_BLOCK_SIZE: usize = 4096;

static NEXT_FILE_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockKey {
    pub file: u32,
    pub block: u64,
}

pub trait BlockObserver: Send + Sync {
    /// Called once per block touched; `len` is the block's size in octets
    /// (shorter than the block size for a file's final block).
    fn access(&self, key: BlockKey, len: usize);
}

pub trait ByteSource: Send + Sync {
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()>;
}

impl ByteSource for Vec<u8> {
    fn len(&self) -> u64 {
        self.as_slice().len() as u64
    }

    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()> {
        let start = usize::try_from(offset).map_err(|_| io::ErrorKind::UnexpectedEof)?;
        let src = self
            .get(start..start + buf.len())
            .ok_or(io::ErrorKind::UnexpectedEof)?;
        buf.copy_from_slice(src);
        Ok(())
    }
}

/// Positional reads from an open file.
#[derive(Debug)]
pub struct FileSource {
    file: File,
    len: u64,
}

impl FileSource {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        Ok(FileSource { file, len })
    }
}

impl ByteSource for FileSource {
    fn len(&self) -> u64 {
        self.len
    }

    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()> {
        self.file.read_exact_at(buf, offset)
    }
}

pub struct BlockFile {
    source: Box<dyn ByteSource>,
    block_size: usize,
    file_id: u32,
    observer: Option<Arc<dyn BlockObserver>>,
}

impl fmt::Debug for BlockFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockFile")
            .field("len", &self.source.len())
            .field("block_size", &self.block_size)
            .field("file_id", &self.file_id)
            .field("observed", &self.observer.is_some())
            .finish()
    }
}

impl BlockFile {
    /// Wraps `source`, assigning a process-unique file id.
    pub fn new(source: Box<dyn ByteSource>, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidParameter(
                "block size must be positive".into(),
            ));
        }
        Ok(BlockFile {
            source,
            block_size,
            file_id: NEXT_FILE_ID.fetch_add(1, Ordering::Relaxed),
            observer: None,
        })
    }

    pub fn in_memory(bytes: Vec<u8>, block_size: usize) -> Result<Self> {
        Self::new(Box::new(bytes), block_size)
    }

    pub fn open(path: &Path, block_size: usize) -> Result<Self> {
        Self::new(Box::new(FileSource::open(path)?), block_size)
    }

    pub fn len(&self) -> u64 {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> u64 {
        self.len().div_ceil(self.block_size as u64)
    }

    pub fn file_id(&self) -> u32 {
        self.file_id
    }

    pub fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>) {
        self.observer = observer;
    }

    /// Reads `buf.len()` octets at `offset`, reporting each touched block.
    pub fn read(&self, offset: u64, buf: &mut [u8]) -> Result<()> {
        let end = offset
            .checked_add(buf.len() as u64)
            .filter(|&e| e <= self.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "read of {} octets at {offset} past end of {}-octet file",
                    buf.len(),
                    self.len()
                ))
            })?;
        if let Some(obs) = &self.observer {
            if !buf.is_empty() {
                let bs = self.block_size as u64;
                for block in offset / bs..=(end - 1) / bs {
                    let len = (self.len() - block * bs).min(bs) as usize;
                    obs.access(
                        BlockKey {
                            file: self.file_id,
                            block,
                        },
                        len,
                    );
                }
            }
        }
        self.source.read_at(offset, buf)?;
        Ok(())
    }

    /// Whole contents, bypassing the observer.
    pub fn read_all_unobserved(&self) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; self.len() as usize];
        self.source.read_at(0, &mut buf)?;
        Ok(buf)
    }
}
