//! Parallel text, Pharaoh alignments and synthetic translation tasks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub type TokenId = u32;

pub const UNK: TokenId = 0;
pub const EOS: TokenId = 1;
const RESERVED: [&str; 2] = ["<unk>", "</s>"];

/// Interned token table. Ids 0 and 1 are reserved for `<unk>` and `</s>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::from(RESERVED.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(id, tok)| (tok.clone(), id as TokenId))
            .collect();
        Vocab { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn intern(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len() as TokenId;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    /// Looks up a token without growing the table; unknown tokens map to [`UNK`].
    pub fn lookup(&self, token: &str) -> TokenId {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: TokenId) -> &str {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .unwrap_or(RESERVED[0])
    }

    pub fn render(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&id| self.token(id))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One alignment link: source token `src` is aligned to target token `tgt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Link {
    pub src: usize,
    pub tgt: usize,
}

/// Set of alignment links, iterated in (target, source) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignmentSet {
    // stored as (tgt, src) so BTreeSet order is the iteration order
    links: BTreeSet<(usize, usize)>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        AlignmentSet {
            links: pairs.into_iter().map(|(i, j)| (j, i)).collect(),
        }
    }

    pub fn insert(&mut self, src: usize, tgt: usize) -> bool {
        self.links.insert((tgt, src))
    }

    pub fn contains(&self, src: usize, tgt: usize) -> bool {
        self.links.contains(&(tgt, src))
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().map(|&(tgt, src)| Link { src, tgt })
    }

    /// Source indices aligned to target position `tgt`, ascending.
    pub fn sources_of(&self, tgt: usize) -> impl Iterator<Item = usize> + '_ {
        self.links
            .range((tgt, 0)..=(tgt, usize::MAX))
            .map(|&(_, src)| src)
    }

    pub fn check_range(&self, src_len: usize, tgt_len: usize) -> Result<()> {
        match self.links().find(|l| l.src >= src_len || l.tgt >= tgt_len) {
            Some(l) => Err(Error::LinkOutOfRange {
                src: l.src,
                tgt: l.tgt,
                src_len,
                tgt_len,
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for AlignmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, l) in self.links().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}-{}", l.src, l.tgt)?;
        }
        Ok(())
    }
}

/// Parses one Pharaoh alignment line (`"0-0 1-2 ..."`, 0-indexed source-target pairs).
pub fn parse_alignment(line: &str) -> Result<AlignmentSet> {
    let mut set = AlignmentSet::new();
    for tok in line.split_whitespace() {
        let bad = || Error::MalformedLink(tok.to_string());
        let (i, j) = tok.split_once('-').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        let j: usize = j.parse().map_err(|_| bad())?;
        set.insert(i, j);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: Vec<TokenId>,
    pub target: Vec<TokenId>,
    pub alignment: Option<AlignmentSet>,
}

impl SentencePair {
    pub fn new(source: Vec<TokenId>, target: Vec<TokenId>) -> Self {
        SentencePair {
            source,
            target,
            alignment: None,
        }
    }

    pub fn with_alignment(mut self, alignment: AlignmentSet) -> Result<Self> {
        alignment.check_range(self.source.len(), self.target.len())?;
        self.alignment = Some(alignment);
        Ok(self)
    }
}

fn tokenize(text: &str, side: &'static str, vocab: &mut Vocab) -> Result<Vec<Vec<TokenId>>> {
    text.lines()
        .enumerate()
        .map(|(n, line)| {
            let ids: Vec<TokenId> = line.split_whitespace().map(|t| vocab.intern(t)).collect();
            if ids.is_empty() {
                Err(Error::EmptyLine { side, line: n + 1 })
            } else {
                Ok(ids)
            }
        })
        .collect()
}

/// Pairs line `k` of the source text with line `k` of the target text.
pub fn parse_parallel(
    source_text: &str,
    target_text: &str,
    src_vocab: &mut Vocab,
    tgt_vocab: &mut Vocab,
) -> Result<Vec<SentencePair>> {
    let source_lines = source_text.lines().count();
    let target_lines = target_text.lines().count();
    if source_lines != target_lines {
        return Err(Error::LineCountMismatch {
            source_lines,
            target_lines,
        });
    }
    let src = tokenize(source_text, "source", src_vocab)?;
    let tgt = tokenize(target_text, "target", tgt_vocab)?;
    Ok(src
        .into_iter()
        .zip(tgt)
        .map(|(s, t)| SentencePair::new(s, t))
        .collect())
}

/// Attaches one alignment line per pair, checking every link is in range.
pub fn attach_alignments(pairs: &mut [SentencePair], alignment_text: &str) -> Result<()> {
    let lines: Vec<&str> = alignment_text.lines().collect();
    if lines.len() != pairs.len() {
        return Err(Error::LineCountMismatch {
            source_lines: pairs.len(),
            target_lines: lines.len(),
        });
    }
    for (pair, line) in pairs.iter_mut().zip(lines) {
        let a = parse_alignment(line)?;
        a.check_range(pair.source.len(), pair.target.len())?;
        pair.alignment = Some(a);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReorderRule {
    Monotone,
    /// The last source token is translated second; the rest keep their order.
    FinalToSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTaskConfig {
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub reorder: ReorderRule,
    pub seed: u64,
}

impl SyntheticTaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::InvalidConfig("vocab size must be at least 2".into()));
        }
        if self.min_len < 1 || self.min_len > self.max_len {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= min_len <= max_len, got {}..{}",
                self.min_len, self.max_len
            )));
        }
        Ok(())
    }
}

/// A toy translation task: a fixed random token bijection plus a reordering rule.
///
/// Source symbol `k` has id `k + 2` in the source vocabulary (`x{k}`), and its
/// translation `m(k)` has id `m(k) + 2` in the target vocabulary (`y{m(k)}`).
#[derive(Debug, Clone)]
pub struct SyntheticTask {
    config: SyntheticTaskConfig,
    mapping: Vec<usize>,
    src_vocab: Vocab,
    tgt_vocab: Vocab,
}

impl SyntheticTask {
    pub fn new(config: SyntheticTaskConfig) -> Result<Self> {
        config.validate()?;
        let mut mapping: Vec<usize> = (0..config.vocab_size).collect();
        mapping.shuffle(&mut stream_rng(config.seed, Stream::Synth, u64::MAX));
        let mut src_vocab = Vocab::new();
        let mut tgt_vocab = Vocab::new();
        for k in 0..config.vocab_size {
            src_vocab.intern(&format!("x{k}"));
        }
        for k in 0..config.vocab_size {
            tgt_vocab.intern(&format!("y{k}"));
        }
        Ok(SyntheticTask {
            config,
            mapping,
            src_vocab,
            tgt_vocab,
        })
    }

    pub fn config(&self) -> &SyntheticTaskConfig {
        &self.config
    }

    pub fn src_vocab(&self) -> &Vocab {
        &self.src_vocab
    }

    pub fn tgt_vocab(&self) -> &Vocab {
        &self.tgt_vocab
    }

    /// Translation of source symbol `k`.
    pub fn map_symbol(&self, k: usize) -> usize {
        self.mapping[k]
    }

    pub fn source_id(k: usize) -> TokenId {
        (k + RESERVED.len()) as TokenId
    }

    pub fn target_id(k: usize) -> TokenId {
        (k + RESERVED.len()) as TokenId
    }

    /// Builds the gold pair for a source written as raw symbols.
    pub fn pair_from_symbols(&self, symbols: &[usize]) -> SentencePair {
        let n = symbols.len();
        // order[j] = source position translated at target position j
        let order: Vec<usize> = match self.config.reorder {
            ReorderRule::FinalToSecond if n > 2 => std::iter::once(0)
                .chain(std::iter::once(n - 1))
                .chain(1..n - 1)
                .collect(),
            _ => (0..n).collect(),
        };
        let source = symbols.iter().map(|&k| Self::source_id(k)).collect();
        let target = order
            .iter()
            .map(|&i| Self::target_id(self.mapping[symbols[i]]))
            .collect();
        let alignment = AlignmentSet::from_pairs(order.iter().enumerate().map(|(j, &i)| (i, j)));
        SentencePair {
            source,
            target,
            alignment: Some(alignment),
        }
    }

    /// Pair number `index` of the corpus; independent of every other index.
    pub fn sample(&self, index: u64) -> SentencePair {
        let mut rng = stream_rng(self.config.seed, Stream::Synth, index);
        let len = rng.random_range(self.config.min_len..=self.config.max_len);
        let symbols: Vec<usize> = (0..len)
            .map(|_| rng.random_range(0..self.config.vocab_size))
            .collect();
        self.pair_from_symbols(&symbols)
    }

    /// Pairs `offset..offset + n`. Disjoint offsets give disjoint splits.
    pub fn generate_range(&self, offset: u64, n: usize) -> Vec<SentencePair> {
        (0..n as u64).map(|k| self.sample(offset + k)).collect()
    }

    pub fn generate(&self, n: usize) -> Result<Vec<SentencePair>> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        Ok(self.generate_range(0, n))
    }
}

/// Summary written next to a corpus on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub pairs: usize,
    pub source_tokens: usize,
    pub target_tokens: usize,
    pub source_vocab_size: usize,
    pub target_vocab_size: usize,
    pub vocab_path: String,
}

impl CorpusManifest {
    pub fn describe(pairs: &[SentencePair], src: &Vocab, tgt: &Vocab, vocab_path: &str) -> Self {
        CorpusManifest {
            pairs: pairs.len(),
            source_tokens: pairs.iter().map(|p| p.source.len()).sum(),
            target_tokens: pairs.iter().map(|p| p.target.len()).sum(),
            source_vocab_size: src.len(),
            target_vocab_size: tgt.len(),
            vocab_path: vocab_path.to_string(),
        }
    }
}
