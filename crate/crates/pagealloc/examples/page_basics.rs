//! The page model from the ground up: allocate, free, scan free runs, and
//! read the debug dump.
//!
//! ```bash
//! cargo run -p pagealloc --example page_basics
//! ```

use pagealloc::features::extract_features;
use pagealloc::page::{BlockId, PageState};

fn main() {
    let mut page = PageState::new(10).expect("positive page size");
    println!("fresh page of {} cells:\n{}", page.page_size(), page.dump());

    page.allocate_at(0, 2, BlockId(1)).unwrap();
    page.allocate_at(3, 2, BlockId(2)).unwrap();
    page.allocate_at(7, 3, BlockId(3)).unwrap();
    println!("after three allocations:\n{}", page.dump());

    println!("free runs:");
    for run in page.free_blocks() {
        println!("  {} cells starting at {}", run.len, run.start);
    }
    println!(
        "largest_free = {}, can_satisfy(3) = {}",
        page.largest_free(),
        page.can_satisfy(3)
    );

    // Overlapping placements are rejected and leave the page untouched.
    let err = page.allocate_at(1, 2, BlockId(4)).unwrap_err();
    println!("overlapping placement: {err}");

    page.free_block(BlockId(2)).unwrap();
    println!("after freeing block 2:\n{}", page.dump());
    page.validate().expect("invariants hold");

    let features = extract_features(&page);
    println!(
        "feature vector for the linear agent: {:?}",
        features.to_array()
    );
}
