//! How the four placement heuristics choose differently on the same
//! fragmented page.
//!
//! ```bash
//! cargo run -p pagealloc --example fit_comparison
//! ```

use pagealloc::fit::{best_fit, first_fit, worst_fit, FitKind, FitPolicy};
use pagealloc::page::{BlockId, PageState};

fn main() {
    // Carve a page into free runs of 3, 2 and 4 cells.
    let mut page = PageState::new(16).unwrap();
    page.allocate_at(3, 2, BlockId(1)).unwrap();
    page.allocate_at(7, 5, BlockId(2)).unwrap();
    println!("page:\n{}", page.dump());
    println!("free runs: {:?}\n", page.free_blocks());

    for size in [1usize, 2, 3, 4, 5] {
        println!(
            "request {size}: first={:?} best={:?} worst={:?}",
            first_fit(&page, size),
            best_fit(&page, size),
            worst_fit(&page, size),
        );
    }

    // Next fit remembers where it stopped.
    let mut next = FitPolicy::new(FitKind::Next);
    println!("\nnext-fit walk with requests of 2:");
    for _ in 0..3 {
        let placement = next.place(&page, 2);
        println!("  placed at {:?}, rover now {}", placement, next.rover());
    }
}
