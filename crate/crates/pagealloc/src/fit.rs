//! The x-fit placement heuristics: first, best, worst and next fit.
//!
//! First/best/worst fit are pure functions over the page and place at the
//! start of the chosen free block. Next fit keeps a rover between calls and
//! resumes scanning from it, wrapping around once.

use crate::page::PageState;

/// Which placement heuristic to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitKind {
    First,
    Best,
    Worst,
    Next,
}

impl FitKind {
    pub fn name(self) -> &'static str {
        match self {
            FitKind::First => "first_fit",
            FitKind::Best => "best_fit",
            FitKind::Worst => "worst_fit",
            FitKind::Next => "next_fit",
        }
    }

    /// The three stateless policies compared throughout the benchmarks.
    pub const BASELINES: [FitKind; 3] = [FitKind::First, FitKind::Best, FitKind::Worst];
}

/// Start of the lowest-start free block with room for `size`.
pub fn first_fit(page: &PageState, size: usize) -> Option<usize> {
    page.free_blocks()
        .iter()
        .find(|b| b.len >= size)
        .map(|b| b.start)
}

/// Start of the smallest free block with room for `size`; ties break toward
/// the lowest start.
pub fn best_fit(page: &PageState, size: usize) -> Option<usize> {
    page.free_blocks()
        .iter()
        .filter(|b| b.len >= size)
        .min_by_key(|b| (b.len, b.start))
        .map(|b| b.start)
}

/// Start of the largest free block, provided it has room for `size`; ties
/// break toward the lowest start.
pub fn worst_fit(page: &PageState, size: usize) -> Option<usize> {
    page.free_blocks()
        .iter()
        .min_by_key(|b| (std::cmp::Reverse(b.len), b.start))
        .filter(|b| b.len >= size)
        .map(|b| b.start)
}

/// Run `kind` against the page. `Next` is stateful and not available here;
/// use [`FitPolicy`] for it.
pub fn place(kind: FitKind, page: &PageState, size: usize) -> Option<usize> {
    match kind {
        FitKind::First => first_fit(page, size),
        FitKind::Best => best_fit(page, size),
        FitKind::Worst => worst_fit(page, size),
        FitKind::Next => panic!("next_fit needs a FitPolicy with a rover"),
    }
}

/// A fit policy instance; only next-fit actually uses the rover.
#[derive(Debug, Clone)]
pub struct FitPolicy {
    pub kind: FitKind,
    rover: usize,
}

impl FitPolicy {
    pub fn new(kind: FitKind) -> Self {
        Self { kind, rover: 0 }
    }

    pub fn rover(&self) -> usize {
        self.rover
    }

    /// Position the rover; only meaningful for next-fit.
    pub fn set_rover(&mut self, rover: usize) {
        self.rover = rover;
    }

    /// Choose a placement. For next-fit this is a first-fit scan starting at
    /// the rover, wrapping around once; the rover advances past the chosen
    /// block.
    pub fn place(&mut self, page: &PageState, size: usize) -> Option<usize> {
        match self.kind {
            FitKind::Next => {
                let start = next_fit_scan(page, size, self.rover)?;
                self.rover = (start + size) % page.page_size();
                Some(start)
            }
            kind => place(kind, page, size),
        }
    }
}

fn next_fit_scan(page: &PageState, size: usize, rover: usize) -> Option<usize> {
    let page_size = page.page_size();
    if size == 0 || size > page_size {
        return None;
    }
    let bitmap = page.bitmap();
    let fits =
        |start: usize| start + size <= page_size && bitmap[start..start + size].iter().all(|&c| !c);
    (rover..=page_size.saturating_sub(size))
        .chain(0..rover.min(page_size.saturating_sub(size) + 1))
        .find(|&s| fits(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::page::{BlockId, IdSource, PageState};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Page with the given free blocks; everything else allocated.
    fn page_with_free(page_size: usize, free: &[(usize, usize)]) -> PageState {
        let mut page = PageState::new(page_size).unwrap();
        let mut ids = IdSource::new();
        let mut is_free = vec![false; page_size];
        for &(start, len) in free {
            for cell in is_free.iter_mut().take(start + len).skip(start) {
                *cell = true;
            }
        }
        let mut i = 0;
        while i < page_size {
            if is_free[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < page_size && !is_free[i] {
                i += 1;
            }
            page.allocate_at(start, i - start, ids.next_id()).unwrap();
        }
        page
    }

    #[test]
    fn first_fit_examples() {
        let page = page_with_free(10, &[(0, 3), (4, 2)]);
        assert_eq!(first_fit(&page, 2), Some(0));

        let page = page_with_free(10, &[(2, 1), (5, 2)]);
        assert_eq!(first_fit(&page, 2), Some(5));
        assert_eq!(first_fit(&page, 3), None);
    }

    #[test]
    fn best_fit_examples() {
        let page = page_with_free(10, &[(0, 3), (4, 2)]);
        assert_eq!(best_fit(&page, 2), Some(4));
        assert_eq!(best_fit(&page, 3), Some(0));

        let page = page_with_free(10, &[(0, 2), (5, 2)]);
        assert_eq!(best_fit(&page, 2), Some(0));
    }

    #[test]
    fn worst_fit_examples() {
        let page = page_with_free(10, &[(0, 3), (4, 2)]);
        assert_eq!(worst_fit(&page, 2), Some(0));

        let page = page_with_free(10, &[(0, 2), (4, 5)]);
        assert_eq!(worst_fit(&page, 1), Some(4));

        let page = page_with_free(10, &[(0, 2), (4, 2)]);
        assert_eq!(worst_fit(&page, 3), None);
    }

    #[test]
    fn next_fit_examples() {
        let page = page_with_free(10, &[(0, 3), (4, 2)]);
        let mut policy = FitPolicy::new(FitKind::Next);
        assert_eq!(policy.place(&page, 2), Some(0));
        assert_eq!(policy.rover(), 2);

        let mut policy = FitPolicy::new(FitKind::Next);
        policy.rover = 3;
        assert_eq!(policy.place(&page, 2), Some(4));
        assert_eq!(policy.rover(), 6);

        let page = page_with_free(10, &[(0, 3)]);
        let mut policy = FitPolicy::new(FitKind::Next);
        policy.rover = 6;
        assert_eq!(policy.place(&page, 2), Some(0));
        assert_eq!(policy.rover(), 2);
    }

    /// Independent oracle: enumerate every legal start position by direct
    /// bitmap scan and apply each policy's selection rule.
    pub(crate) fn oracle(
        page: &PageState,
        size: usize,
        kind: FitKind,
        rover: usize,
    ) -> Option<usize> {
        let page_size = page.page_size();
        if size == 0 || size > page_size {
            return None;
        }
        let bitmap = page.bitmap();
        let legal: Vec<usize> = (0..=page_size - size)
            .filter(|&s| bitmap[s..s + size].iter().all(|&c| !c))
            .collect();
        // Reconstruct runs from scratch.
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < page_size {
            if bitmap[i] {
                i += 1;
            } else {
                let start = i;
                while i < page_size && !bitmap[i] {
                    i += 1;
                }
                runs.push((start, i - start));
            }
        }
        let fitting: Vec<(usize, usize)> =
            runs.iter().copied().filter(|&(_, l)| l >= size).collect();
        match kind {
            FitKind::First => legal.first().copied(),
            FitKind::Best => fitting
                .iter()
                .copied()
                .min_by_key(|&(s, l)| (l, s))
                .map(|(s, _)| s),
            FitKind::Worst => {
                let max_len = runs.iter().map(|&(_, l)| l).max().unwrap_or(0);
                if max_len >= size {
                    runs.iter()
                        .copied()
                        .find(|&(_, l)| l == max_len)
                        .map(|(s, _)| s)
                } else {
                    None
                }
            }
            FitKind::Next => legal
                .iter()
                .copied()
                .find(|&s| s >= rover)
                .or_else(|| legal.first().copied()),
        }
    }

    /// Seeded random page used by the oracle comparisons.
    pub(crate) fn random_page(rng: &mut ChaCha8Rng, max_size: usize) -> PageState {
        let page_size = rng.random_range(1..=max_size);
        let mut page = PageState::new(page_size).unwrap();
        let mut next = 0u64;
        for _ in 0..page_size {
            let start = rng.random_range(0..page_size);
            let len = rng.random_range(1..=page_size.min(4));
            if page.allocate_at(start, len, BlockId(next)).is_ok() {
                next += 1;
            }
        }
        page
    }

    #[test]
    fn fits_match_oracle_on_seeded_pages() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0f17);
        for _ in 0..300 {
            let page = random_page(&mut rng, 16);
            for size in 1..=page.page_size() {
                assert_eq!(
                    first_fit(&page, size),
                    oracle(&page, size, FitKind::First, 0)
                );
                assert_eq!(best_fit(&page, size), oracle(&page, size, FitKind::Best, 0));
                assert_eq!(
                    worst_fit(&page, size),
                    oracle(&page, size, FitKind::Worst, 0)
                );
                for rover in 0..page.page_size() {
                    let mut policy = FitPolicy::new(FitKind::Next);
                    policy.rover = rover;
                    assert_eq!(
                        policy.place(&page, size),
                        oracle(&page, size, FitKind::Next, rover),
                        "next_fit rover {rover} size {size} on\n{}",
                        page.dump()
                    );
                }
            }
        }
    }

    proptest! {
        // All four fits agree with can_satisfy on feasibility, and the
        // returned placement is always legal.
        #[test]
        fn fit_feasibility_and_legality(
            page_size in 1usize..16,
            blocks in proptest::collection::vec((0usize..16, 1usize..4), 0..10),
            size in 1usize..16,
            rover in 0usize..16,
        ) {
            let mut page = PageState::new(page_size).unwrap();
            let mut ids = IdSource::new();
            for (start, len) in blocks {
                let _ = page.allocate_at(start % page_size, len, ids.next_id());
            }
            let feasible = page.can_satisfy(size);
            let mut next = FitPolicy::new(FitKind::Next);
            next.rover = rover % page_size;
            let candidates = [
                first_fit(&page, size),
                best_fit(&page, size),
                worst_fit(&page, size),
                next.place(&page, size),
            ];
            for placement in candidates {
                prop_assert_eq!(placement.is_some(), feasible);
                if let Some(start) = placement {
                    let mut scratch = page.clone();
                    prop_assert!(scratch.allocate_at(start, size, ids.next_id()).is_ok());
                }
            }
        }
    }
}
