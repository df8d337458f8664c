//! Alignment-driven oracle programs.
//!
//! Before writing target token `j`, the oracle reads up to the furthest
//! source token aligned to it. Unaligned target tokens are written without
//! reading. Anchoring the first and last tokens of both sides guarantees the
//! program starts with READ and ends with WRITE.

use serde::{Deserialize, Serialize};

use crate::corpus::{AlignmentSet, SentencePair};
use crate::error::{Error, Result};
use crate::metrics::delay_report;
use crate::program::{Action, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub anchor_endpoints: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            anchor_endpoints: true,
        }
    }
}

/// Adds the links `(0, 0)` and `(src_len - 1, tgt_len - 1)`.
pub fn anchor_alignment(a: &AlignmentSet, src_len: usize, tgt_len: usize) -> AlignmentSet {
    let mut out = a.clone();
    if src_len > 0 && tgt_len > 0 {
        out.insert(0, 0);
        out.insert(src_len - 1, tgt_len - 1);
    }
    out
}

pub fn generate_oracle(
    a: &AlignmentSet,
    src_len: usize,
    tgt_len: usize,
    cfg: OracleConfig,
) -> Result<Program> {
    if src_len == 0 || tgt_len == 0 {
        return Err(Error::InvalidConfig("oracle needs non-empty lengths".into()));
    }
    a.check_range(src_len, tgt_len)?;
    let anchored;
    let a = if cfg.anchor_endpoints {
        anchored = anchor_alignment(a, src_len, tgt_len);
        &anchored
    } else {
        a
    };

    let mut actions = Vec::with_capacity(src_len + tgt_len);
    // index of the furthest source token read so far
    let mut read_upto: isize = -1;
    for j in 0..tgt_len {
        if let Some(furthest) = a.sources_of(j).max() {
            let furthest = furthest as isize;
            if furthest > read_upto {
                let n = (furthest - read_upto) as usize;
                actions.extend(std::iter::repeat_n(Action::Read, n));
                read_upto = furthest;
            }
        }
        actions.push(Action::Write);
    }
    debug_assert!(read_upto < src_len as isize);
    Ok(Program::new(actions))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    pub sentences: usize,
    pub mean_program_len: f64,
    pub mean_ap: f64,
    pub mean_al: f64,
    pub mean_dal: f64,
    /// Links that anchoring had to add.
    pub anchored_links_added: usize,
    pub unaligned_target_words: usize,
}

/// Per-sentence oracle tallies; merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleTally {
    n: usize,
    len: usize,
    ap: f64,
    al: f64,
    dal: f64,
    anchored: usize,
    unaligned: usize,
}

impl OracleTally {
    pub fn merge(self, o: OracleTally) -> OracleTally {
        OracleTally {
            n: self.n + o.n,
            len: self.len + o.len,
            ap: self.ap + o.ap,
            al: self.al + o.al,
            dal: self.dal + o.dal,
            anchored: self.anchored + o.anchored,
            unaligned: self.unaligned + o.unaligned,
        }
    }

    pub fn finish(self) -> OracleStats {
        if self.n == 0 {
            return OracleStats::default();
        }
        let n = self.n as f64;
        OracleStats {
            sentences: self.n,
            mean_program_len: self.len as f64 / n,
            mean_ap: self.ap / n,
            mean_al: self.al / n,
            mean_dal: self.dal / n,
            anchored_links_added: self.anchored,
            unaligned_target_words: self.unaligned,
        }
    }
}

/// Oracle program and tally for pair number `index`.
pub fn oracle_sentence(index: usize, pair: &SentencePair, cfg: OracleConfig) -> Result<(Program, OracleTally)> {
    let a = pair
        .alignment
        .as_ref()
        .ok_or(Error::MissingAlignment(index))?;
    let (s, t) = (pair.source.len(), pair.target.len());
    let program = generate_oracle(a, s, t, cfg)?;
    let anchored = if cfg.anchor_endpoints {
        anchor_alignment(a, s, t).len() - a.len()
    } else {
        0
    };
    let unaligned = (0..t).filter(|&j| a.sources_of(j).next().is_none()).count();
    let mut acc = OracleTally {
        n: 1,
        len: program.len(),
        anchored,
        unaligned,
        ..Default::default()
    };
    if program.is_valid(s, t).boundary_valid {
        let r = delay_report(&program, s, t)?;
        acc.ap = r.ap;
        acc.al = r.al;
        acc.dal = r.dal;
    }
    Ok((program, acc))
}

pub fn oracle_corpus(pairs: &[SentencePair], cfg: OracleConfig) -> Result<(Vec<Program>, OracleStats)> {
    let mut programs = Vec::with_capacity(pairs.len());
    let mut acc = OracleTally::default();
    for (k, pair) in pairs.iter().enumerate() {
        let (p, a) = oracle_sentence(k, pair, cfg)?;
        programs.push(p);
        acc = acc.merge(a);
    }
    Ok((programs, acc.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ReorderRule, SyntheticTask, SyntheticTaskConfig};
    use proptest::prelude::*;

    fn set(pairs: &[(usize, usize)]) -> AlignmentSet {
        AlignmentSet::from_pairs(pairs.iter().copied())
    }

    fn oracle(pairs: &[(usize, usize)], s: usize, t: usize) -> String {
        generate_oracle(&set(pairs), s, t, OracleConfig::default())
            .unwrap()
            .to_string()
    }

    #[test]
    fn anchor_examples() {
        assert_eq!(anchor_alignment(&set(&[(1, 1)]), 3, 3), set(&[(0, 0), (1, 1), (2, 2)]));
        let full = set(&[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(anchor_alignment(&full, 3, 3), full);
        assert_eq!(anchor_alignment(&AlignmentSet::new(), 2, 2), set(&[(0, 0), (1, 1)]));
    }

    #[test]
    fn hand_traced_goldens() {
        assert_eq!(oracle(&[(0, 0), (1, 1), (2, 2)], 3, 3), "RWRWRW");
        assert_eq!(oracle(&[(2, 0), (1, 1), (0, 2)], 3, 3), "RRRWWW");
        assert_eq!(oracle(&[(0, 0), (1, 0), (2, 2)], 3, 3), "RRWWRW");
    }

    #[test]
    fn unanchored_output_can_be_invalid() {
        let cfg = OracleConfig {
            anchor_endpoints: false,
        };
        let p = generate_oracle(&set(&[(1, 1)]), 3, 3, cfg).unwrap();
        assert_eq!(p.to_string(), "WRRWW");
        assert!(!p.is_valid(3, 3).boundary_valid);
    }

    #[test]
    fn out_of_range_link_is_an_error() {
        assert!(matches!(
            generate_oracle(&set(&[(3, 0)]), 3, 3, OracleConfig::default()),
            Err(Error::LinkOutOfRange { .. })
        ));
    }

    #[test]
    fn synthetic_final_to_second_oracle() {
        let task = SyntheticTask::new(SyntheticTaskConfig {
            vocab_size: 16,
            min_len: 3,
            max_len: 3,
            reorder: ReorderRule::FinalToSecond,
            seed: 0,
        })
        .unwrap();
        let pair = task.pair_from_symbols(&[5, 9, 3]);
        let (progs, _) = oracle_corpus(&[pair], OracleConfig::default()).unwrap();
        assert_eq!(progs[0].to_string(), "RWRRWW");
    }

    #[test]
    fn corpus_examples() {
        let diag = SentencePair::new(vec![2, 3, 4], vec![2, 3, 4])
            .with_alignment(set(&[(0, 0), (1, 1), (2, 2)]))
            .unwrap();
        let (progs, stats) = oracle_corpus(&[diag.clone(), diag.clone()], OracleConfig::default()).unwrap();
        assert_eq!(progs.len(), 2);
        assert!(progs.iter().all(|p| p.to_string() == "RWRWRW"));
        assert!((stats.mean_ap - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.anchored_links_added, 0);

        let (progs, stats) = oracle_corpus(&[], OracleConfig::default()).unwrap();
        assert!(progs.is_empty());
        assert_eq!(stats, OracleStats::default());

        let bare = SentencePair::new(vec![2], vec![2]);
        assert_eq!(
            oracle_corpus(&[diag, bare], OracleConfig::default()).unwrap_err(),
            Error::MissingAlignment(1)
        );
    }

    #[test]
    fn stats_count_anchors_and_unaligned() {
        let p = SentencePair::new(vec![2, 3, 4], vec![2, 3, 4])
            .with_alignment(set(&[(1, 1)]))
            .unwrap();
        let (_, stats) = oracle_corpus(&[p], OracleConfig::default()).unwrap();
        assert_eq!(stats.anchored_links_added, 2);
        assert_eq!(stats.unaligned_target_words, 2);
    }

    #[test]
    fn tallies_merge_in_any_order() {
        let task = SyntheticTask::new(SyntheticTaskConfig {
            vocab_size: 10,
            min_len: 1,
            max_len: 9,
            reorder: ReorderRule::FinalToSecond,
            seed: 3,
        })
        .unwrap();
        let pairs = task.generate(40).unwrap();
        let (progs, stats) = oracle_corpus(&pairs, OracleConfig::default()).unwrap();
        let mut reversed = OracleTally::default();
        for (k, p) in pairs.iter().enumerate().rev() {
            let (prog, tally) = oracle_sentence(k, p, OracleConfig::default()).unwrap();
            assert_eq!(prog, progs[k]);
            reversed = tally.merge(reversed);
        }
        let r = reversed.finish();
        assert_eq!(r.sentences, stats.sentences);
        assert!((r.mean_al - stats.mean_al).abs() < 1e-12);
    }

    fn random_alignment() -> impl Strategy<Value = (AlignmentSet, usize, usize)> {
        (1usize..25, 1usize..25).prop_flat_map(|(s, t)| {
            proptest::collection::vec((0..s, 0..t), 0..2 * s.max(t))
                .prop_map(move |links| (AlignmentSet::from_pairs(links), s, t))
        })
    }

    proptest! {
        #[test]
        fn anchored_oracle_is_boundary_valid((a, s, t) in random_alignment()) {
            let p = generate_oracle(&a, s, t, OracleConfig::default()).unwrap();
            let r = p.is_valid(s, t);
            prop_assert!(r.boundary_valid, "{} for {}", p, a);
        }

        #[test]
        fn anchoring_is_idempotent((a, s, t) in random_alignment()) {
            let once = anchor_alignment(&a, s, t);
            prop_assert_eq!(anchor_alignment(&once, s, t), once);
        }

        #[test]
        fn monotone_alignments_alternate(n in 1usize..40) {
            let a = AlignmentSet::from_pairs((0..n).map(|k| (k, k)));
            let p = generate_oracle(&a, n, n, OracleConfig::default()).unwrap();
            prop_assert_eq!(p.to_string(), "RW".repeat(n));
        }

        #[test]
        fn links_behind_the_furthest_are_absorbed((a, s, t) in random_alignment(), pick in any::<prop::sample::Index>()) {
            let anchored = anchor_alignment(&a, s, t);
            let j = pick.index(t);
            let Some(furthest) = anchored.sources_of(j).max() else { return Ok(()); };
            let mut more = anchored.clone();
            more.insert(furthest / 2, j);
            let cfg = OracleConfig::default();
            prop_assert_eq!(generate_oracle(&more, s, t, cfg).unwrap(), generate_oracle(&anchored, s, t, cfg).unwrap());
        }
    }
}
