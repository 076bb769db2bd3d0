//! Hand-crafted page features for the linear action-value agent.
//!
//! Nine summary statistics over the free runs and the allocated block table,
//! each normalized by the page size so every component stays in [0, 1].
//! An empty category (no free runs, or no allocated blocks) contributes
//! zeros.

use crate::page::PageState;

/// The nine page features, already divided by `page_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub avg_free_start: f64,
    pub avg_free_len: f64,
    pub largest_free_len: f64,
    pub smallest_free_len: f64,
    pub avg_alloc_start: f64,
    pub avg_alloc_len: f64,
    pub total_alloc_len: f64,
    pub largest_alloc_len: f64,
    pub smallest_alloc_len: f64,
}

impl FeatureVector {
    pub const LEN: usize = 9;

    pub fn to_array(self) -> [f64; Self::LEN] {
        [
            self.avg_free_start,
            self.avg_free_len,
            self.largest_free_len,
            self.smallest_free_len,
            self.avg_alloc_start,
            self.avg_alloc_len,
            self.total_alloc_len,
            self.largest_alloc_len,
            self.smallest_alloc_len,
        ]
    }
}

/// Compute the feature vector for a page. Free statistics run over maximal
/// free runs; allocated statistics run over the block table (a block's
/// "index" is its start cell).
pub fn extract_features(page: &PageState) -> FeatureVector {
    let scale = page.page_size() as f64;

    let free = page.free_blocks();
    let (avg_free_start, avg_free_len, largest_free_len, smallest_free_len) = if free.is_empty() {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let n = free.len() as f64;
        (
            free.iter().map(|b| b.start as f64).sum::<f64>() / n,
            free.iter().map(|b| b.len as f64).sum::<f64>() / n,
            free.iter().map(|b| b.len).max().unwrap() as f64,
            free.iter().map(|b| b.len).min().unwrap() as f64,
        )
    };

    let blocks: Vec<(usize, usize)> = page.blocks().map(|(_, s, l)| (s, l)).collect();
    let (avg_alloc_start, avg_alloc_len, total_alloc_len, largest_alloc_len, smallest_alloc_len) =
        if blocks.is_empty() {
            (0.0, 0.0, 0.0, 0.0, 0.0)
        } else {
            let n = blocks.len() as f64;
            (
                blocks.iter().map(|&(s, _)| s as f64).sum::<f64>() / n,
                blocks.iter().map(|&(_, l)| l as f64).sum::<f64>() / n,
                blocks.iter().map(|&(_, l)| l as f64).sum::<f64>(),
                blocks.iter().map(|&(_, l)| l).max().unwrap() as f64,
                blocks.iter().map(|&(_, l)| l).min().unwrap() as f64,
            )
        };

    FeatureVector {
        avg_free_start: avg_free_start / scale,
        avg_free_len: avg_free_len / scale,
        largest_free_len: largest_free_len / scale,
        smallest_free_len: smallest_free_len / scale,
        avg_alloc_start: avg_alloc_start / scale,
        avg_alloc_len: avg_alloc_len / scale,
        total_alloc_len: total_alloc_len / scale,
        largest_alloc_len: largest_alloc_len / scale,
        smallest_alloc_len: smallest_alloc_len / scale,
    }
}
