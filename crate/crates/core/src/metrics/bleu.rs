//! Corpus BLEU with exponential smoothing, over pre-tokenized sequences.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// 0..=100
    pub score: f64,
    /// Per-order precisions actually used (smoothed where the match count was zero).
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
}

/// Sufficient statistics for corpus BLEU; sentence stats are merged by addition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

impl BleuStats {
    pub fn sentence<T: Eq + Hash>(hyp: &[T], reference: &[T], max_order: usize) -> Self {
        let mut matches = vec![0; max_order];
        let mut totals = vec![0; max_order];
        for n in 1..=max_order {
            totals[n - 1] = hyp.len().saturating_sub(n - 1);
            if totals[n - 1] == 0 {
                continue;
            }
            let refs = ngram_counts(reference, n);
            matches[n - 1] = ngram_counts(hyp, n)
                .into_iter()
                .map(|(g, c)| c.min(refs.get(g).copied().unwrap_or(0)))
                .sum();
        }
        BleuStats {
            matches,
            totals,
            hyp_len: hyp.len(),
            ref_len: reference.len(),
        }
    }

    pub fn merge(mut self, other: &BleuStats) -> BleuStats {
        if self.matches.is_empty() {
            return other.clone();
        }
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self
    }

    pub fn score(&self) -> BleuScore {
        let brevity_penalty = if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        // orders the hypotheses are too short to contain are left out
        let order = self.totals.iter().take_while(|&&t| t > 0).count();
        let mut precisions = Vec::with_capacity(order);
        let mut smooth = 1.0;
        for n in 0..order {
            let (m, t) = (self.matches[n] as f64, self.totals[n] as f64);
            let p = if m > 0.0 {
                m / t
            } else if n == 0 {
                0.0
            } else {
                smooth *= 2.0;
                1.0 / (smooth * t)
            };
            precisions.push(p);
        }
        let score = if order == 0 || precisions[0] == 0.0 {
            0.0
        } else {
            let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / order as f64;
            100.0 * brevity_penalty * log_mean.exp()
        };
        BleuScore {
            score,
            precisions,
            brevity_penalty,
        }
    }
}

pub fn corpus_bleu<T: Eq + Hash>(hypotheses: &[Vec<T>], references: &[Vec<T>], max_order: usize) -> Result<BleuScore> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch {
            expected: references.len(),
            actual: hypotheses.len(),
        });
    }
    let stats = hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| BleuStats::sentence(h, r, max_order))
        .fold(BleuStats::default(), |acc, s| acc.merge(&s));
    Ok(stats.score())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identity_is_100() {
        let refs = vec![toks("a b c d e"), toks("x y"), toks("p")];
        let s = corpus_bleu(&refs, &refs, MAX_ORDER).unwrap();
        assert!((s.score - 100.0).abs() < 1e-9);
        assert_eq!(s.brevity_penalty, 1.0);
    }

    #[test]
    fn zero_unigram_overlap_is_zero() {
        let s = corpus_bleu(&[toks("a b c")], &[toks("d e f")], MAX_ORDER).unwrap();
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn smoothed_fourgram_example() {
        let s = corpus_bleu(&[toks("a b c d")], &[toks("a b c e")], MAX_ORDER).unwrap();
        // clipped counts 3/4, 2/3, 1/2, 0/1 -> 1/(2*1)
        let expected = 100.0 * (0.75f64 * (2.0 / 3.0) * 0.5 * 0.5).powf(0.25);
        assert_eq!(s.precisions.len(), 4);
        assert!((s.precisions[3] - 0.5).abs() < 1e-12);
        assert!((s.score - expected).abs() < 1e-9, "{} vs {expected}", s.score);
    }

    #[test]
    fn clipping_and_brevity() {
        // "the the the" vs "the cat": unigram matches clipped to 1
        let s = corpus_bleu(&[toks("the the the")], &[toks("the cat")], 1).unwrap();
        assert!((s.precisions[0] - 1.0 / 3.0).abs() < 1e-12);
        let short = corpus_bleu(&[toks("a b")], &[toks("a b c d")], 2).unwrap();
        assert!((short.brevity_penalty - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<String>> = vec![];
        assert_eq!(corpus_bleu(&empty, &empty, 4), Err(Error::EmptyHypotheses));
        assert!(corpus_bleu(&[toks("a")], &[toks("a"), toks("b")], 4).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariant(pairs in proptest::collection::vec(
            (proptest::collection::vec(0u8..6, 1..12), proptest::collection::vec(0u8..6, 1..12)), 1..10),
            rot in 0usize..10) {
            let (h, r): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
            let mut h2 = h.clone();
            let mut r2 = r.clone();
            let k = rot % h.len();
            h2.rotate_left(k);
            r2.rotate_left(k);
            let a = corpus_bleu(&h, &r, 4).unwrap().score;
            let b = corpus_bleu(&h2, &r2, 4).unwrap().score;
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn hundred_iff_identical(pairs in proptest::collection::vec(
            (proptest::collection::vec(0u8..4, 1..8), proptest::collection::vec(0u8..4, 1..8)), 1..6)) {
            let (h, r): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let s = corpus_bleu(&h, &r, 4).unwrap().score;
            prop_assert!((0.0..=100.0 + 1e-9).contains(&s));
            prop_assert_eq!((s - 100.0).abs() < 1e-9, h == r);
            prop_assert!((corpus_bleu(&r, &r, 4).unwrap().score - 100.0).abs() < 1e-9);
        }
    }
}
