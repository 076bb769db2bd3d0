//! Adversarial script construction and verification.
//!
//! A bf-good script can be fully replayed under best-fit while first-fit and
//! worst-fit both run out of contiguous space at some scripted allocation;
//! wf-good swaps the roles in favour of worst-fit. Construction follows a
//! carve-and-challenge template: setup allocations tile the whole page (the
//! page holds a single free run throughout, so every x-fit policy places
//! them identically), selected blocks are freed to leave holes of distinct
//! sizes, and challenge allocations then fit the holes exactly in an order
//! only the target policy resolves correctly. Every candidate is checked
//! with [`verify_adversarial`] and resampled on failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fit::{FitKind, FitPolicy};
use crate::page::{IdSource, PageState};

use super::script::{Event, RequestScript, ScriptLabel};

/// Attempt cap for the sample-and-verify loop.
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("adversarial scripts need page_size >= 8, got {0}")]
    PageTooSmall(usize),
    #[error(
        "failed to construct a {label} script for page_size {page_size} within {attempts} attempts"
    )]
    ConstructionFailed {
        label: &'static str,
        page_size: usize,
        attempts: usize,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScriptError {
    #[error("event {index}: free of unknown or already-freed tag {tag}")]
    FreeUnknownTag { index: usize, tag: u64 },
    #[error("event {index}: duplicate allocation tag {tag}")]
    DuplicateTag { index: usize, tag: u64 },
}

/// Result of replaying a script under one fit policy.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    /// Allocations satisfied before the replay stopped.
    pub satisfied: usize,
    /// 1-based ordinal (among Alloc events) of the first failure, if any.
    pub first_failure: Option<usize>,
    /// Page state at the failure point, or after the full script.
    pub page: PageState,
}

impl ReplayOutcome {
    pub fn all_ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Per-baseline outcomes of replaying a script on a fresh page.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub first: ReplayOutcome,
    pub best: ReplayOutcome,
    pub worst: ReplayOutcome,
}

impl VerifyReport {
    pub fn outcome(&self, kind: FitKind) -> &ReplayOutcome {
        match kind {
            FitKind::First => &self.first,
            FitKind::Best => &self.best,
            FitKind::Worst => &self.worst,
            FitKind::Next => panic!("next_fit is not part of the verification set"),
        }
    }

    /// Whether the outcomes match the script's label: the favoured policy
    /// satisfies every allocation and both others fail at least once.
    pub fn matches_label(&self, label: ScriptLabel) -> bool {
        match label {
            ScriptLabel::BfGood => {
                self.best.all_ok() && !self.first.all_ok() && !self.worst.all_ok()
            }
            ScriptLabel::WfGood => {
                self.worst.all_ok() && !self.first.all_ok() && !self.best.all_ok()
            }
            ScriptLabel::RandomSegment => true,
        }
    }
}

/// Replay `script` on a fresh page, placing every allocation with `kind`.
/// Stops at the first allocation the policy cannot place, mirroring episode
/// termination.
pub fn replay_script(script: &RequestScript, kind: FitKind) -> Result<ReplayOutcome, ScriptError> {
    let mut page = PageState::new(script.page_size).expect("script page_size is positive");
    let mut policy = FitPolicy::new(kind);
    let mut ids = IdSource::new();
    let mut tag_ids = std::collections::HashMap::new();
    let mut satisfied = 0;
    for (index, event) in script.events.iter().enumerate() {
        match *event {
            Event::Alloc { size, tag } => {
                if tag_ids.contains_key(&tag) {
                    return Err(ScriptError::DuplicateTag { index, tag });
                }
                match policy.place(&page, size) {
                    Some(start) => {
                        let id = ids.next_id();
                        page.allocate_at(start, size, id)
                            .expect("fit placement is legal");
                        tag_ids.insert(tag, id);
                        satisfied += 1;
                    }
                    None => {
                        return Ok(ReplayOutcome {
                            satisfied,
                            first_failure: Some(satisfied + 1),
                            page,
                        })
                    }
                }
            }
            Event::Free { tag } => {
                let id = tag_ids
                    .remove(&tag)
                    .ok_or(ScriptError::FreeUnknownTag { index, tag })?;
                page.free_block(id).expect("tag-bound block is live");
            }
        }
    }
    Ok(ReplayOutcome {
        satisfied,
        first_failure: None,
        page,
    })
}

/// Replay a script under each of first/best/worst fit on a fresh page.
pub fn verify_adversarial(script: &RequestScript) -> Result<VerifyReport, ScriptError> {
    Ok(VerifyReport {
        first: replay_script(script, FitKind::First)?,
        best: replay_script(script, FitKind::Best)?,
        worst: replay_script(script, FitKind::Worst)?,
    })
}

/// Generate a verified bf-good script: best-fit satisfies every allocation,
/// first-fit and worst-fit both fail at a scripted allocation.
pub fn make_bf_good(page_size: usize, seed: u64) -> Result<RequestScript, GenError> {
    if page_size < 8 {
        return Err(GenError::PageTooSmall(page_size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let Some(script) = try_bf_good(page_size, seed, &mut rng) else {
            continue;
        };
        if let Ok(report) = verify_adversarial(&script) {
            if report.matches_label(ScriptLabel::BfGood) {
                return Ok(script);
            }
        }
    }
    Err(GenError::ConstructionFailed {
        label: "bf_good",
        page_size,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// Generate a verified wf-good script: worst-fit satisfies every allocation,
/// first-fit and best-fit both fail at a scripted allocation.
pub fn make_wf_good(page_size: usize, seed: u64) -> Result<RequestScript, GenError> {
    if page_size < 8 {
        return Err(GenError::PageTooSmall(page_size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let Some(script) = try_wf_good(page_size, seed, &mut rng) else {
            continue;
        };
        if let Ok(report) = verify_adversarial(&script) {
            if report.matches_label(ScriptLabel::WfGood) {
                return Ok(script);
            }
        }
    }
    Err(GenError::ConstructionFailed {
        label: "wf_good",
        page_size,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// One bf-good candidate. Holes are laid out in descending size order by
/// start, so the first (largest) hole is also the lowest: first-fit and
/// worst-fit both drop the smallest challenge into it and strand a sliver,
/// while best-fit matches every challenge to its exact hole.
fn try_bf_good(page_size: usize, seed: u64, rng: &mut ChaCha8Rng) -> Option<RequestScript> {
    let hole_count = 2;
    let holes = sample_distinct_hole_sizes(rng, hole_count, page_size)?;
    let mut holes = holes;
    holes.sort_unstable_by(|a, b| b.cmp(a)); // descending by start position

    let layout = carve_layout(rng, page_size, &holes)?;
    let challenges: Vec<usize> = {
        let mut c = holes.clone();
        c.sort_unstable(); // exact fits, smallest first
        c
    };
    Some(build_script(
        page_size,
        ScriptLabel::BfGood,
        seed,
        &layout,
        &challenges,
    ))
}

/// One wf-good candidate: two holes, smaller first, with challenges
/// `[c, h1, h2 - c]` for `h2 - h1 < c < h1`. Worst-fit opens the large hole
/// first and everything lands exactly; first/best-fit start in the small
/// hole and strand slivers.
fn try_wf_good(page_size: usize, seed: u64, rng: &mut ChaCha8Rng) -> Option<RequestScript> {
    // h2 >= h1 + 1 and h1 + 1 + h2 <= page_size bound h1 by the page; the
    // hole cap keeps challenge sizes in the workload's request regime.
    let h1_max = ((page_size - 1) / 2).min(hole_size_cap(page_size));
    if h1_max < 3 {
        return None;
    }
    let h1 = rng.random_range(3..=h1_max);
    let h2_hi = (2 * h1 - 2).min(page_size - h1 - 1);
    if h2_hi < h1 + 1 {
        return None;
    }
    let h2 = rng.random_range(h1 + 1..=h2_hi);
    let c = rng.random_range(h2 - h1 + 1..=h1 - 1);

    let layout = carve_layout(rng, page_size, &[h1, h2])?;
    let challenges = vec![c, h1, h2 - c];
    Some(build_script(
        page_size,
        ScriptLabel::WfGood,
        seed,
        &layout,
        &challenges,
    ))
}

/// Hole (and therefore challenge-request) sizes stay in the same regime as
/// the random workload's request sizes.
fn hole_size_cap(page_size: usize) -> usize {
    (page_size / 8).clamp(3, page_size / 2)
}

fn sample_distinct_hole_sizes(
    rng: &mut ChaCha8Rng,
    count: usize,
    page_size: usize,
) -> Option<Vec<usize>> {
    // Leave room for one separator cell between consecutive holes.
    let budget = page_size - (count - 1);
    let cap = hole_size_cap(page_size);
    let mut holes: Vec<usize> = Vec::with_capacity(count);
    for _ in 0..8 * count {
        let candidate = rng.random_range(1..=cap);
        if !holes.contains(&candidate) {
            holes.push(candidate);
            if holes.len() == count {
                break;
            }
        }
    }
    if holes.len() == count && holes.iter().sum::<usize>() <= budget {
        Some(holes)
    } else {
        None
    }
}

/// A block in the setup tiling of the page.
#[derive(Debug, Clone, Copy)]
struct SetupBlock {
    size: usize,
    is_hole: bool,
}

/// Tile the page left to right as hole/keep/hole/keep/...: consecutive holes
/// are separated by at least one kept cell so they stay maximal runs.
fn carve_layout(
    rng: &mut ChaCha8Rng,
    page_size: usize,
    holes: &[usize],
) -> Option<Vec<SetupBlock>> {
    let hole_total: usize = holes.iter().sum();
    let separators = holes.len() - 1;
    if hole_total + separators > page_size {
        return None;
    }
    let mut spare = page_size - hole_total - separators;
    let mut layout = Vec::with_capacity(2 * holes.len());
    for (i, &hole) in holes.iter().enumerate() {
        layout.push(SetupBlock {
            size: hole,
            is_hole: true,
        });
        if i + 1 < holes.len() {
            let extra = if spare > 0 {
                rng.random_range(0..=spare.min(page_size / 4))
            } else {
                0
            };
            spare -= extra;
            layout.push(SetupBlock {
                size: 1 + extra,
                is_hole: false,
            });
        }
    }
    if spare > 0 {
        layout.push(SetupBlock {
            size: spare,
            is_hole: false,
        });
    }
    Some(layout)
}

fn build_script(
    page_size: usize,
    label: ScriptLabel,
    seed: u64,
    layout: &[SetupBlock],
    challenges: &[usize],
) -> RequestScript {
    let mut events = Vec::with_capacity(layout.len() + 2 * challenges.len());
    let mut tag = 0u64;
    let mut hole_tags = Vec::new();
    for block in layout {
        tag += 1;
        events.push(Event::Alloc {
            size: block.size,
            tag,
        });
        if block.is_hole {
            hole_tags.push(tag);
        }
    }
    for hole_tag in hole_tags {
        events.push(Event::Free { tag: hole_tag });
    }
    for &size in challenges {
        tag += 1;
        events.push(Event::Alloc { size, tag });
    }
    RequestScript {
        page_size,
        label,
        seed,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked bf-good script: setup tiles the page, frees carve holes
    /// {3 at 0, 2 at 4}, challenges are 2 then 3.
    fn bf_good_example() -> RequestScript {
        RequestScript {
            page_size: 10,
            label: ScriptLabel::BfGood,
            seed: 0,
            events: vec![
                Event::Alloc { size: 3, tag: 1 },
                Event::Alloc { size: 1, tag: 2 },
                Event::Alloc { size: 2, tag: 3 },
                Event::Alloc { size: 1, tag: 4 },
                Event::Alloc { size: 3, tag: 5 },
                Event::Free { tag: 1 },
                Event::Free { tag: 3 },
                Event::Alloc { size: 2, tag: 6 },
                Event::Alloc { size: 3, tag: 7 },
            ],
        }
    }

    /// The worked wf-good script: holes {4 at 0, 5 at 5}, challenges 3, 4, 2.
    fn wf_good_example() -> RequestScript {
        RequestScript {
            page_size: 10,
            label: ScriptLabel::WfGood,
            seed: 0,
            events: vec![
                Event::Alloc { size: 4, tag: 1 },
                Event::Alloc { size: 1, tag: 2 },
                Event::Alloc { size: 5, tag: 3 },
                Event::Free { tag: 1 },
                Event::Free { tag: 3 },
                Event::Alloc { size: 3, tag: 4 },
                Event::Alloc { size: 4, tag: 5 },
                Event::Alloc { size: 2, tag: 6 },
            ],
        }
    }

    #[test]
    fn bf_good_example_verifies() {
        let report = verify_adversarial(&bf_good_example()).unwrap();
        assert!(report.best.all_ok());
        // Both adversaries break at the 7th allocation: the second challenge.
        assert_eq!(report.first.first_failure, Some(7));
        assert_eq!(report.worst.first_failure, Some(7));
        assert!(report.matches_label(ScriptLabel::BfGood));
    }

    #[test]
    fn wf_good_example_verifies() {
        let report = verify_adversarial(&wf_good_example()).unwrap();
        assert!(report.worst.all_ok());
        assert!(!report.first.all_ok());
        assert!(!report.best.all_ok());
        assert!(report.matches_label(ScriptLabel::WfGood));
    }

    #[test]
    fn empty_script_is_all_ok() {
        let script = RequestScript {
            page_size: 10,
            label: ScriptLabel::RandomSegment,
            seed: 0,
            events: vec![],
        };
        let report = verify_adversarial(&script).unwrap();
        assert!(report.first.all_ok() && report.best.all_ok() && report.worst.all_ok());
    }

    #[test]
    fn whole_page_alloc_is_satisfiable() {
        let script = RequestScript {
            page_size: 16,
            label: ScriptLabel::RandomSegment,
            seed: 0,
            events: vec![Event::Alloc { size: 16, tag: 1 }],
        };
        let report = verify_adversarial(&script).unwrap();
        assert!(report.first.all_ok() && report.best.all_ok() && report.worst.all_ok());
    }

    #[test]
    fn malformed_scripts_are_rejected() {
        let free_unknown = RequestScript {
            page_size: 10,
            label: ScriptLabel::RandomSegment,
            seed: 0,
            events: vec![Event::Free { tag: 9 }],
        };
        assert!(matches!(
            verify_adversarial(&free_unknown),
            Err(ScriptError::FreeUnknownTag { index: 0, tag: 9 })
        ));

        let double_free = RequestScript {
            page_size: 10,
            label: ScriptLabel::RandomSegment,
            seed: 0,
            events: vec![
                Event::Alloc { size: 1, tag: 1 },
                Event::Free { tag: 1 },
                Event::Free { tag: 1 },
            ],
        };
        assert!(matches!(
            verify_adversarial(&double_free),
            Err(ScriptError::FreeUnknownTag { index: 2, tag: 1 })
        ));
    }

    #[test]
    fn generated_bf_good_scripts_verify_at_both_scales() {
        for page_size in [10usize, 256] {
            for seed in 0..25u64 {
                let script = make_bf_good(page_size, seed).unwrap();
                assert_eq!(script.page_size, page_size);
                assert_eq!(script.seed, seed);
                let report = verify_adversarial(&script).unwrap();
                assert!(
                    report.matches_label(ScriptLabel::BfGood),
                    "seed {seed} page {page_size}"
                );
            }
        }
    }

    #[test]
    fn generated_wf_good_scripts_verify_at_both_scales() {
        for page_size in [10usize, 256] {
            for seed in 0..25u64 {
                let script = make_wf_good(page_size, seed).unwrap();
                let report = verify_adversarial(&script).unwrap();
                assert!(
                    report.matches_label(ScriptLabel::WfGood),
                    "seed {seed} page {page_size}"
                );
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(make_bf_good(256, 7).unwrap(), make_bf_good(256, 7).unwrap());
        assert_eq!(make_wf_good(256, 7).unwrap(), make_wf_good(256, 7).unwrap());
    }

    #[test]
    fn tiny_pages_are_rejected() {
        assert_eq!(make_bf_good(7, 0), Err(GenError::PageTooSmall(7)));
        assert_eq!(make_wf_good(4, 0), Err(GenError::PageTooSmall(4)));
    }
}
