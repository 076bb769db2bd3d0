//! Request streams that drive episodes: random traffic, adversarial scripts
//! and the mixed regime that interleaves both.
//!
//! The generator produces one allocation request at a time. Between requests
//! it may apply free events to the page — scripted frees in scripted modes,
//! or random frees of uniformly chosen live blocks in random mode — so the
//! page the agent sees can change arbitrarily between two requests.

mod adversarial;
mod script;

pub use adversarial::{
    make_bf_good, make_wf_good, replay_script, verify_adversarial, GenError, ReplayOutcome,
    ScriptError, VerifyReport, MAX_GENERATION_ATTEMPTS,
};
pub use script::{Event, RequestScript, ScriptLabel, ScriptParseError};

use std::collections::{HashMap, VecDeque};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::page::{BlockId, PageState};

/// How requests are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadMode {
    Random,
    BfGood,
    WfGood,
    Mixed,
}

impl WorkloadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadMode::Random => "random",
            WorkloadMode::BfGood => "bf_good",
            WorkloadMode::WfGood => "wf_good",
            WorkloadMode::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" => Some(WorkloadMode::Random),
            "bf_good" => Some(WorkloadMode::BfGood),
            "wf_good" => Some(WorkloadMode::WfGood),
            "mixed" => Some(WorkloadMode::Mixed),
            _ => None,
        }
    }
}

/// Workload parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadConfig {
    pub page_size: usize,
    /// Probability that a tick frees a live block instead of producing the
    /// next request. A free tick with no live blocks is a consumed no-op.
    pub p_free: f64,
    pub p_alloc: f64,
    /// Inclusive range of random request sizes.
    pub size_range: (usize, usize),
    pub mode: WorkloadMode,
    /// Requests per random segment in mixed mode.
    pub segment_random_len: usize,
    pub rng_seed: u64,
}

impl WorkloadConfig {
    pub fn new(page_size: usize) -> Self {
        Self {
            page_size,
            p_free: 0.4,
            p_alloc: 0.6,
            size_range: (1, (page_size / 8).max(1)),
            mode: WorkloadMode::Random,
            segment_random_len: 50,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.page_size == 0 {
            return Err("workload.page_size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p_free) || !(0.0..=1.0).contains(&self.p_alloc) {
            return Err("workload.p_free and workload.p_alloc must lie in [0, 1]".into());
        }
        if (self.p_free + self.p_alloc - 1.0).abs() > 1e-9 {
            return Err(format!(
                "workload.p_free ({}) and workload.p_alloc ({}) must sum to 1",
                self.p_free, self.p_alloc
            ));
        }
        let (lo, hi) = self.size_range;
        if lo < 1 || hi < lo || hi > self.page_size {
            return Err(format!(
                "workload.size_min/size_max ({lo}, {hi}) must satisfy 1 <= min <= max <= page_size"
            ));
        }
        if matches!(
            self.mode,
            WorkloadMode::BfGood | WorkloadMode::WfGood | WorkloadMode::Mixed
        ) && self.page_size < 8
        {
            return Err("workload.mode with adversarial scripts needs page_size >= 8".into());
        }
        if self.mode == WorkloadMode::Mixed && self.segment_random_len == 0 {
            return Err("workload.segment_random_len must be at least 1".into());
        }
        Ok(())
    }
}

/// The next allocation request plus how many frees were applied to the page
/// while producing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NextRequest {
    pub size: usize,
    pub frees_applied: usize,
}

/// Segment kinds drawn in mixed mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SegmentKind {
    BfGood,
    WfGood,
    Random,
}

#[derive(Debug, Clone)]
enum Phase {
    /// Consuming a script; falls through per mode when it runs out.
    Script,
    /// Random ticks forever (random mode, or an exhausted bf/wf script).
    RandomForever,
    /// Random ticks for a bounded number of requests (mixed mode).
    RandomSegment { remaining: usize },
    /// Mixed mode between segments.
    NextSegment,
}

/// Stateful request generator. Deterministic for a given (config, seed).
#[derive(Debug, Clone)]
pub struct RequestGen {
    cfg: WorkloadConfig,
    rng: ChaCha8Rng,
    phase: Phase,
    pending: VecDeque<Event>,
    tag_ids: HashMap<u64, BlockId>,
    pending_tag: Option<u64>,
}

impl RequestGen {
    /// Build a generator. `seed` overrides `cfg.rng_seed` and fully
    /// determines the stream.
    pub fn new(cfg: WorkloadConfig, seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = match cfg.mode {
            WorkloadMode::Random => Phase::RandomForever,
            WorkloadMode::BfGood | WorkloadMode::WfGood => Phase::Script,
            WorkloadMode::Mixed => Phase::NextSegment,
        };
        let mut gen = Self {
            cfg,
            rng,
            phase,
            pending: VecDeque::new(),
            tag_ids: HashMap::new(),
            pending_tag: None,
        };
        if matches!(gen.cfg.mode, WorkloadMode::BfGood | WorkloadMode::WfGood) {
            gen.load_script(gen.cfg.mode);
        }
        gen
    }

    fn load_script(&mut self, mode: WorkloadMode) {
        let seed = self.rng.next_u64();
        let script = match mode {
            WorkloadMode::BfGood => make_bf_good(self.cfg.page_size, seed),
            WorkloadMode::WfGood => make_wf_good(self.cfg.page_size, seed),
            _ => unreachable!("only adversarial modes load scripts"),
        }
        .expect("page_size was validated for adversarial generation");
        self.tag_ids.clear();
        self.pending = script.events.into();
        self.phase = Phase::Script;
    }

    fn draw_segment_kind(rng: &mut ChaCha8Rng) -> SegmentKind {
        match rng.random_range(0..3u32) {
            0 => SegmentKind::BfGood,
            1 => SegmentKind::WfGood,
            _ => SegmentKind::Random,
        }
    }

    /// Advance the workload until it produces the next allocation request,
    /// applying any intervening free events directly to `page`.
    pub fn next_request(&mut self, page: &mut PageState) -> NextRequest {
        let mut frees = 0usize;
        loop {
            // Drain the active script first.
            if let Some(event) = self.pending.pop_front() {
                match event {
                    Event::Free { tag } => {
                        let id = self
                            .tag_ids
                            .remove(&tag)
                            .expect("generated scripts only free bound tags");
                        if page.free_block(id).is_ok() {
                            frees += 1;
                        }
                    }
                    Event::Alloc { size, tag } => {
                        self.pending_tag = Some(tag);
                        return NextRequest {
                            size,
                            frees_applied: frees,
                        };
                    }
                }
                continue;
            }

            match self.phase {
                Phase::Script => {
                    // Script exhausted: keep the episode going.
                    self.phase = match self.cfg.mode {
                        WorkloadMode::Mixed => Phase::NextSegment,
                        _ => Phase::RandomForever,
                    };
                }
                Phase::NextSegment => match Self::draw_segment_kind(&mut self.rng) {
                    SegmentKind::Random => {
                        self.phase = Phase::RandomSegment {
                            remaining: self.cfg.segment_random_len,
                        };
                    }
                    kind => {
                        // Adversarial scripts are built against an empty
                        // page; clear whatever is live before starting one.
                        let live: Vec<BlockId> = page.live_ids().collect();
                        for id in live {
                            page.free_block(id).expect("live id");
                            frees += 1;
                        }
                        self.tag_ids.clear();
                        let mode = match kind {
                            SegmentKind::BfGood => WorkloadMode::BfGood,
                            SegmentKind::WfGood => WorkloadMode::WfGood,
                            SegmentKind::Random => unreachable!(),
                        };
                        self.load_script(mode);
                    }
                },
                Phase::RandomSegment { remaining } => {
                    if remaining == 0 {
                        self.phase = Phase::NextSegment;
                        continue;
                    }
                    if let Some(size) = self.random_tick(page, &mut frees) {
                        self.phase = Phase::RandomSegment {
                            remaining: remaining - 1,
                        };
                        self.pending_tag = None;
                        return NextRequest {
                            size,
                            frees_applied: frees,
                        };
                    }
                }
                Phase::RandomForever => {
                    if let Some(size) = self.random_tick(page, &mut frees) {
                        self.pending_tag = None;
                        return NextRequest {
                            size,
                            frees_applied: frees,
                        };
                    }
                }
            }
        }
    }

    /// One random tick: either a free (possibly a no-op) or a request size.
    fn random_tick(&mut self, page: &mut PageState, frees: &mut usize) -> Option<usize> {
        if self.rng.random::<f64>() < self.cfg.p_free {
            if page.block_count() > 0 {
                let pick = self.rng.random_range(0..page.block_count());
                let id = page.live_ids().nth(pick).expect("index in range");
                page.free_block(id).expect("live id");
                self.tag_ids.retain(|_, bound| *bound != id);
                *frees += 1;
            }
            None
        } else {
            let (lo, hi) = self.cfg.size_range;
            Some(self.rng.random_range(lo..=hi))
        }
    }

    /// Record the block id the environment assigned to the request most
    /// recently returned by [`Self::next_request`], so scripted frees can find it.
    pub fn note_serviced(&mut self, id: BlockId) {
        if let Some(tag) = self.pending_tag.take() {
            self.tag_ids.insert(tag, id);
        }
    }
}
