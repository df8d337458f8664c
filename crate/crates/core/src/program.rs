//! READ/WRITE action programs.
//!
//! A program drives a simultaneous translator: each READ reveals the next
//! source token and each WRITE emits the next target token. Programs are
//! serialized one per line as `R`/`W` strings, e.g. `RWRRWW`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Read,
    Write,
}

impl Action {
    pub fn symbol(self) -> char {
        match self {
            Action::Read => 'R',
            Action::Write => 'W',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::Read
        } else {
            Action::Write
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Program(Vec<Action>);

impl Program {
    pub fn new(actions: Vec<Action>) -> Self {
        Program(actions)
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn into_actions(self) -> Vec<Action> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, a: Action) {
        self.0.push(a);
    }

    pub fn read_count(&self) -> usize {
        self.0.iter().filter(|&&a| a == Action::Read).count()
    }

    pub fn write_count(&self) -> usize {
        self.0.len() - self.read_count()
    }

    pub fn is_valid(&self, src_len: usize, tgt_len: usize) -> ValidityReport {
        is_valid(self, src_len, tgt_len)
    }

    /// Lag vector: `g[j]` is the number of READs before the (j+1)-th WRITE.
    pub fn g_vector(&self) -> Vec<usize> {
        let mut reads = 0;
        let mut g = Vec::with_capacity(self.write_count());
        for &a in &self.0 {
            match a {
                Action::Read => reads += 1,
                Action::Write => g.push(reads),
            }
        }
        g
    }

    fn ensure_boundary_valid(&self) -> Result<()> {
        let report = self.is_valid(self.read_count(), self.write_count());
        if report.boundary_valid {
            Ok(())
        } else {
            Err(Error::InvalidProgram {
                src_len: report.read_count,
                tgt_len: report.write_count,
            })
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|a| write!(f, "{}", a.symbol()))
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                'R' => Ok(Action::Read),
                'W' => Ok(Action::Write),
                other => Err(Error::BadActionSymbol(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Program)
    }
}

impl From<Program> for String {
    fn from(p: Program) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Program {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Vec<Action>> for Program {
    fn from(v: Vec<Action>) -> Self {
        Program(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// READ count matches the source length and WRITE count the target length.
    pub count_valid: bool,
    /// Count-valid, starts with READ and ends with WRITE.
    pub boundary_valid: bool,
    pub read_count: usize,
    pub write_count: usize,
    pub first_action: Option<Action>,
    pub last_action: Option<Action>,
}

pub fn is_valid(p: &Program, src_len: usize, tgt_len: usize) -> ValidityReport {
    let read_count = p.read_count();
    let write_count = p.write_count();
    let first_action = p.0.first().copied();
    let last_action = p.0.last().copied();
    let count_valid = !p.is_empty() && read_count == src_len && write_count == tgt_len;
    ValidityReport {
        count_valid,
        boundary_valid: count_valid
            && first_action == Some(Action::Read)
            && last_action == Some(Action::Write),
        read_count,
        write_count,
        first_action,
        last_action,
    }
}

/// The wait-k schedule: `k` READs, then WRITE/READ alternation, then the remaining WRITEs.
///
/// Any `k >= src_len` gives the read-everything-first schedule.
pub fn wait_k(k: usize, src_len: usize, tgt_len: usize) -> Result<Program> {
    if k == 0 {
        return Err(Error::ZeroWaitK);
    }
    if src_len == 0 || tgt_len == 0 {
        return Err(Error::InvalidConfig("wait-k needs non-empty lengths".into()));
    }
    let mut actions = Vec::with_capacity(src_len + tgt_len);
    let (mut reads, mut writes) = (k.min(src_len), 0);
    actions.extend(std::iter::repeat_n(Action::Read, reads));
    while writes < tgt_len {
        actions.push(Action::Write);
        writes += 1;
        if reads < src_len && writes < tgt_len {
            actions.push(Action::Read);
            reads += 1;
        }
    }
    // target shorter than the schedule: the source still has to be consumed,
    // and the last action has to stay a WRITE
    if reads < src_len {
        let last = actions.pop();
        actions.extend(std::iter::repeat_n(Action::Read, src_len - reads));
        actions.extend(last);
    }
    Ok(Program(actions))
}

/// Moves the last READ to the front, `d` times.
///
/// Saturates silently at `R^m W^n`.
pub fn add_delay(p: &Program, d: usize) -> Result<Program> {
    p.ensure_boundary_valid()?;
    let mut actions = p.0.clone();
    for _ in 0..d {
        let Some(last_read) = actions.iter().rposition(|&a| a == Action::Read) else {
            break;
        };
        if actions[..last_read].iter().all(|&a| a == Action::Read) {
            break;
        }
        actions.remove(last_read);
        actions.insert(0, Action::Read);
    }
    Ok(Program(actions))
}

/// Bernoulli mask over the interior positions `1..len-1`.
pub fn interior_mask<R: Rng + ?Sized>(len: usize, beta: f64, rng: &mut R) -> Vec<usize> {
    (1..len.saturating_sub(1))
        .filter(|_| rng.random_bool(beta))
        .collect()
}

/// Uniformly permutes the actions found at `positions` among themselves.
pub fn permute_positions<R: Rng + ?Sized>(p: &Program, positions: &[usize], rng: &mut R) -> Program {
    let mut picked: Vec<Action> = positions.iter().map(|&k| p.0[k]).collect();
    picked.shuffle(rng);
    let mut actions = p.0.clone();
    for (&k, a) in positions.iter().zip(picked) {
        actions[k] = a;
    }
    Program(actions)
}

/// Valid perturbation of a program: Bernoulli selection of interior positions
/// followed by a random permutation of the selected actions.
///
/// The action multiset and both boundary actions are preserved, so a
/// boundary-valid input stays boundary-valid.
pub fn perturb_prog_valid<R: Rng + ?Sized>(p: &Program, beta3: f64, rng: &mut R) -> Program {
    let positions = interior_mask(p.len(), beta3, rng);
    permute_positions(p, &positions, rng)
}

/// Scheduled-sampling perturbation of a ground-truth sequence.
///
/// Each position is replaced with probability `beta` by `draw(t, rng)`. The
/// caller's `draw` must condition only on the unperturbed ground truth.
pub fn perturb_seq<T, R, F>(truth: &[T], beta: f64, mut draw: F, rng: &mut R) -> Vec<T>
where
    T: Clone,
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> T,
{
    truth
        .iter()
        .enumerate()
        .map(|(t, x)| {
            if rng.random_bool(beta) {
                draw(t, rng)
            } else {
                x.clone()
            }
        })
        .collect()
}

/// Draws an index from a discrete distribution given as non-negative weights.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
