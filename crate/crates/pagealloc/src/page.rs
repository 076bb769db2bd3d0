//! Single-page memory state: an allocation bitmap plus a block table.
//!
//! The page is a fixed run of `page_size` cells. Each cell is either free or
//! owned by exactly one allocated block; the block table remembers where every
//! allocation landed so a later free can release the whole block at once.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Opaque identifier for an allocated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u64);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Issues monotonically increasing block ids.
#[derive(Debug, Clone, Default)]
pub struct IdSource {
    next: u64,
}

impl IdSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> BlockId {
        let id = BlockId(self.next);
        self.next += 1;
        id
    }
}

/// A maximal run of free cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeBlock {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PageError {
    #[error("page_size must be at least 1")]
    ZeroPageSize,
    #[error("placement start={start} size={size} does not fit in page of {page_size} cells")]
    InvalidPlacement {
        start: usize,
        size: usize,
        page_size: usize,
    },
    #[error("placement start={start} size={size} overlaps an allocated cell")]
    Overlap { start: usize, size: usize },
    #[error("allocation id {0} is already present")]
    DuplicateId(BlockId),
    #[error("unknown allocation id {0}")]
    UnknownId(BlockId),
}

/// The state of one memory page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageState {
    page_size: usize,
    bitmap: Vec<bool>,
    blocks: BTreeMap<BlockId, (usize, usize)>,
}

impl PageState {
    /// A fresh page with every cell free.
    pub fn new(page_size: usize) -> Result<Self, PageError> {
        if page_size == 0 {
            return Err(PageError::ZeroPageSize);
        }
        Ok(Self {
            page_size,
            bitmap: vec![false; page_size],
            blocks: BTreeMap::new(),
        })
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    /// Cell occupancy, `true` = allocated.
    pub fn bitmap(&self) -> &[bool] {
        &self.bitmap
    }

    /// Allocated blocks as `(id, start, len)`, ordered by id.
    pub fn blocks(&self) -> impl Iterator<Item = (BlockId, usize, usize)> + '_ {
        self.blocks.iter().map(|(&id, &(s, l))| (id, s, l))
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn live_ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks.keys().copied()
    }

    /// Maximal free runs in ascending start order. Empty iff the page is full.
    pub fn free_blocks(&self) -> Vec<FreeBlock> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < self.page_size {
            if self.bitmap[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < self.page_size && !self.bitmap[i] {
                i += 1;
            }
            runs.push(FreeBlock {
                start,
                len: i - start,
            });
        }
        runs
    }

    /// Length of the largest free run, 0 if the page is full.
    pub fn largest_free(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for &cell in &self.bitmap {
            if cell {
                run = 0;
            } else {
                run += 1;
                best = best.max(run);
            }
        }
        best
    }

    /// Whether a contiguous run of `size` free cells exists.
    pub fn can_satisfy(&self, size: usize) -> bool {
        size >= 1 && self.largest_free() >= size
    }

    /// Place a block of `size` cells at `start`. On any error the page is
    /// left unchanged.
    pub fn allocate_at(&mut self, start: usize, size: usize, id: BlockId) -> Result<(), PageError> {
        if self.blocks.contains_key(&id) {
            return Err(PageError::DuplicateId(id));
        }
        if size == 0 || start >= self.page_size || size > self.page_size - start {
            return Err(PageError::InvalidPlacement {
                start,
                size,
                page_size: self.page_size,
            });
        }
        if self.bitmap[start..start + size].iter().any(|&c| c) {
            return Err(PageError::Overlap { start, size });
        }
        for cell in &mut self.bitmap[start..start + size] {
            *cell = true;
        }
        self.blocks.insert(id, (start, size));
        Ok(())
    }

    /// Release the block `id`, clearing all of its cells.
    pub fn free_block(&mut self, id: BlockId) -> Result<(), PageError> {
        let (start, len) = self.blocks.remove(&id).ok_or(PageError::UnknownId(id))?;
        for cell in &mut self.bitmap[start..start + len] {
            *cell = false;
        }
        Ok(())
    }

    /// Check the bitmap/block-table consistency invariants.
    pub fn validate(&self) -> Result<(), String> {
        let mut covered = vec![false; self.page_size];
        for (&id, &(start, len)) in &self.blocks {
            if len == 0 {
                return Err(format!("block {id} has zero length"));
            }
            if start >= self.page_size || len > self.page_size - start {
                return Err(format!("block {id} ({start}+{len}) out of bounds"));
            }
            for cell in covered.iter_mut().take(start + len).skip(start) {
                if *cell {
                    return Err(format!("block {id} overlaps another block"));
                }
                *cell = true;
            }
        }
        if covered != self.bitmap {
            return Err("bitmap disagrees with block table".to_string());
        }
        Ok(())
    }

    /// Debug dump: one line of '0'/'1' cells, then the block table as
    /// `id:start+len` entries.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.page_size + 16 * self.blocks.len() + 2);
        for &cell in &self.bitmap {
            out.push(if cell { '1' } else { '0' });
        }
        out.push('\n');
        let entries: Vec<String> = self
            .blocks
            .iter()
            .map(|(id, (start, len))| format!("{id}:{start}+{len}"))
            .collect();
        out.push_str(&entries.join(" "));
        out.push('\n');
        out
    }
}
