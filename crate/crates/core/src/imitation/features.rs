//! Sparse feature maps for the linear programmer and interpreter.
//!
//! Both maps read only a [`StepView`], i.e. the revealed source prefix, the
//! emitted target prefix and the action history, so training and decoding
//! share one code path and no feature can see past the current step.

use serde::{Deserialize, Serialize};

use crate::corpus::TokenId;
use crate::program::Action;
use crate::simulate::StepView;

pub const FEATURE_VERSION: &str = "rw-linear-v2";

/// Sparse feature vector: (index, value) pairs.
pub type Features = Vec<(u32, f64)>;

const COUNT_BUCKETS: usize = 16;
const PROGRESS_RANGE: i64 = 8;
const PROGRESS_BUCKETS: usize = (2 * PROGRESS_RANGE + 1) as usize;
const HISTORY_CODES: usize = 27;
/// Token slots are conjoined with the target position clipped to 0..=3 and the
/// source-exhausted flag.
const POSITION_COPIES: usize = 8;

fn bucket(n: usize) -> usize {
    n.min(COUNT_BUCKETS - 1)
}

fn progress_bucket(x: f64) -> usize {
    let r = x.round() as i64;
    (r.clamp(-PROGRESS_RANGE, PROGRESS_RANGE) + PROGRESS_RANGE) as usize
}

/// Index layout of both feature maps for given vocabulary sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    /// Mean target/source length ratio of the training corpus.
    pub length_ratio: f64,
}

struct Layout {
    next: usize,
}

impl Layout {
    fn take(&mut self, n: usize) -> usize {
        let at = self.next;
        self.next += n;
        at
    }
}

/// Offsets of the programmer feature blocks.
struct ProgBlocks {
    bias: usize,
    reads: usize,
    writes: usize,
    history: usize,
    last_read: usize,
    last_written: usize,
    progress: usize,
    exhausted: usize,
    total: usize,
}

struct IntpBlocks {
    bias: usize,
    writes: usize,
    last_read: usize,
    src_at_j: usize,
    src_before_j: usize,
    prev_written: usize,
    bag: usize,
    progress: usize,
    total: usize,
}

impl FeatureSpace {
    pub fn new(src_vocab: usize, tgt_vocab: usize, length_ratio: f64) -> Self {
        FeatureSpace {
            src_vocab,
            tgt_vocab,
            length_ratio,
        }
    }

    fn prog_blocks(&self) -> ProgBlocks {
        let mut l = Layout { next: 0 };
        ProgBlocks {
            bias: l.take(1),
            reads: l.take(COUNT_BUCKETS),
            writes: l.take(COUNT_BUCKETS),
            history: l.take(HISTORY_CODES),
            last_read: l.take(self.src_vocab + 1),
            last_written: l.take(self.tgt_vocab + 1),
            progress: l.take(PROGRESS_BUCKETS),
            exhausted: l.take(1),
            total: l.next,
        }
    }

    fn intp_blocks(&self) -> IntpBlocks {
        let mut l = Layout { next: 0 };
        let src_slot = (self.src_vocab + 1) * POSITION_COPIES;
        IntpBlocks {
            bias: l.take(1),
            writes: l.take(COUNT_BUCKETS),
            last_read: l.take(src_slot),
            src_at_j: l.take(src_slot),
            src_before_j: l.take(src_slot),
            prev_written: l.take((self.tgt_vocab + 1) * POSITION_COPIES),
            bag: l.take(self.src_vocab),
            progress: l.take(2 * PROGRESS_BUCKETS),
            total: l.next,
        }
    }

    pub fn programmer_dim(&self) -> usize {
        self.prog_blocks().total
    }

    pub fn interpreter_dim(&self) -> usize {
        self.intp_blocks().total
    }

    fn src_slot(&self, tok: Option<TokenId>) -> usize {
        match tok {
            Some(t) if (t as usize) < self.src_vocab => t as usize,
            Some(_) => 0,
            None => self.src_vocab,
        }
    }

    fn tgt_slot(&self, tok: Option<TokenId>) -> usize {
        match tok {
            Some(t) if (t as usize) < self.tgt_vocab => t as usize,
            Some(_) => 0,
            None => self.tgt_vocab,
        }
    }

    /// Programmer view: counts, last three actions, last read and written
    /// tokens, progress against the corpus length ratio, source-exhausted flag.
    pub fn programmer(&self, view: &StepView<'_>, out: &mut Features) {
        let b = self.prog_blocks();
        let (i, j) = (view.reads(), view.writes());
        out.clear();
        out.push((b.bias as u32, 1.0));
        out.push(((b.reads + bucket(i)) as u32, 1.0));
        out.push(((b.writes + bucket(j)) as u32, 1.0));
        let code = view
            .actions
            .iter()
            .rev()
            .take(3)
            .fold((0usize, 1usize), |(code, mul), a| {
                let digit = match a {
                    Action::Read => 1,
                    Action::Write => 2,
                };
                (code + digit * mul, mul * 3)
            })
            .0;
        out.push(((b.history + code) as u32, 1.0));
        out.push(((b.last_read + self.src_slot(view.source.last().copied())) as u32, 1.0));
        out.push(((b.last_written + self.tgt_slot(view.target.last().copied())) as u32, 1.0));
        let progress = i as f64 - j as f64 * self.length_ratio.recip();
        out.push(((b.progress + progress_bucket(progress)) as u32, 1.0));
        if view.source_exhausted {
            out.push((b.exhausted as u32, 1.0));
        }
    }

    /// Interpreter view for the token about to be written at position `j`.
    pub fn interpreter(&self, view: &StepView<'_>, out: &mut Features) {
        let b = self.intp_blocks();
        let (i, j) = (view.reads(), view.writes());
        out.clear();
        out.push((b.bias as u32, 1.0));
        out.push(((b.writes + bucket(j)) as u32, 1.0));
        let position = j.min(3) + if view.source_exhausted { 4 } else { 0 };
        let mut slot = |base: usize, width: usize, value: usize| {
            out.push(((base + position * width + value) as u32, 1.0));
        };
        let sw = self.src_vocab + 1;
        slot(b.last_read, sw, self.src_slot(view.source.last().copied()));
        slot(b.src_at_j, sw, self.src_slot(view.source.get(j).copied()));
        let before = j.checked_sub(1).and_then(|k| view.source.get(k)).copied();
        slot(b.src_before_j, sw, self.src_slot(before));
        slot(
            b.prev_written,
            self.tgt_vocab + 1,
            self.tgt_slot(view.target.last().copied()),
        );
        if i > 0 {
            let w = 1.0 / i as f64;
            let start = out.len();
            for &tok in view.source {
                let idx = (b.bag + self.src_slot(Some(tok)).min(self.src_vocab - 1)) as u32;
                match out[start..].iter_mut().find(|(k, _)| *k == idx) {
                    Some(entry) => entry.1 += w,
                    None => out.push((idx, w)),
                }
            }
        }
        let progress = j as f64 - i as f64 * self.length_ratio;
        let half = if view.source_exhausted { PROGRESS_BUCKETS } else { 0 };
        out.push(((b.progress + half + progress_bucket(progress)) as u32, 1.0));
    }
}
