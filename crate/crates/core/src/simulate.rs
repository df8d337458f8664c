//! Step-wise simultaneous decoding with pluggable programmer/interpreter policies.
//!
//! At every step the programmer proposes READ or WRITE; a READ reveals the
//! next source token, a WRITE asks the interpreter for the next target token.
//! Masking keeps the executed program boundary-valid: the first action is
//! forced to READ, the source must be fully read before the final WRITE, and
//! the interpreter may only end the sentence once the whole source is read
//! and at least one token was written after the final READ.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{TokenId, EOS};
use crate::error::{Error, Result};
use crate::program::{sample_index, Action, Program};

pub mod scripted;
mod trace;

pub use trace::{chunks, render_trace};

/// What a policy may look at: the revealed source prefix, the emitted target
/// prefix and the actions taken so far.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub source: &'a [TokenId],
    pub target: &'a [TokenId],
    pub actions: &'a [Action],
    /// The revealed prefix is the whole source.
    pub source_exhausted: bool,
}

impl StepView<'_> {
    pub fn reads(&self) -> usize {
        self.source.len()
    }

    pub fn writes(&self) -> usize {
        self.target.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDist {
    pub read: f64,
    pub write: f64,
}

impl ActionDist {
    pub fn certain(a: Action) -> Self {
        match a {
            Action::Read => ActionDist { read: 1.0, write: 0.0 },
            Action::Write => ActionDist { read: 0.0, write: 1.0 },
        }
    }

    pub fn prob(&self, a: Action) -> f64 {
        match a {
            Action::Read => self.read,
            Action::Write => self.write,
        }
    }

    fn validate(&self) -> Result<()> {
        check_probs(&[self.read, self.write])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenDist {
    Point(TokenId),
    /// Probabilities indexed by target token id.
    Probs(Vec<f64>),
}

fn check_probs(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidDistribution(format!("sums to {sum}")));
    }
    Ok(())
}

pub trait Programmer {
    /// Called once before each episode.
    fn reset(&mut self) {}
    fn action_dist(&mut self, view: &StepView<'_>) -> ActionDist;
}

pub trait Interpreter {
    fn reset(&mut self) {}
    fn token_dist(&mut self, view: &StepView<'_>) -> TokenDist;
}

impl<P: Programmer + ?Sized> Programmer for &mut P {
    fn reset(&mut self) {
        (**self).reset()
    }
    fn action_dist(&mut self, view: &StepView<'_>) -> ActionDist {
        (**self).action_dist(view)
    }
}

impl<I: Interpreter + ?Sized> Interpreter for &mut I {
    fn reset(&mut self) {
        (**self).reset()
    }
    fn token_dist(&mut self, view: &StepView<'_>) -> TokenDist {
        (**self).token_dist(view)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoding {
    Greedy,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub max_target_factor: f64,
    pub max_target_slack: usize,
    pub decoding: Decoding,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_target_factor: 2.0,
            max_target_slack: 10,
            decoding: Decoding::Greedy,
        }
    }
}

impl SimConfig {
    /// Maximum number of target tokens for a source of length `src_len`.
    pub fn write_cap(&self, src_len: usize) -> usize {
        ((self.max_target_factor * src_len as f64).floor() as usize + self.max_target_slack).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Eos,
    StepCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub action: Action,
    /// Revealed source token for READ, emitted target token for WRITE.
    pub token: TokenId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub program: Program,
    pub hypothesis: Vec<TokenId>,
    pub steps: Vec<Step>,
    pub terminated: Termination,
}

fn choose_action<R: Rng + ?Sized>(dist: ActionDist, decoding: Decoding, rng: &mut R) -> Action {
    match decoding {
        Decoding::Greedy => {
            if dist.write > dist.read {
                Action::Write
            } else {
                Action::Read
            }
        }
        Decoding::Sample => Action::from_index(sample_index(&[dist.read, dist.write], rng)),
    }
}

fn choose_token<R: Rng + ?Sized>(
    dist: TokenDist,
    eos_allowed: bool,
    decoding: Decoding,
    rng: &mut R,
) -> Result<TokenId> {
    match dist {
        TokenDist::Point(tok) => {
            if tok == EOS && !eos_allowed {
                Err(Error::InvalidDistribution(
                    "all mass on end-of-sentence while it is masked".into(),
                ))
            } else {
                Ok(tok)
            }
        }
        TokenDist::Probs(mut p) => {
            check_probs(&p)?;
            if !eos_allowed {
                if let Some(e) = p.get_mut(EOS as usize) {
                    *e = 0.0;
                }
            }
            if p.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidDistribution(
                    "no mass left after masking".into(),
                ));
            }
            let k = match decoding {
                Decoding::Greedy => p
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &x)| {
                        if x > best.1 {
                            (k, x)
                        } else {
                            best
                        }
                    })
                    .0,
                Decoding::Sample => sample_index(&p, rng),
            };
            Ok(k as TokenId)
        }
    }
}

struct Episode<'a> {
    source: &'a [TokenId],
    revealed: usize,
    hypothesis: Vec<TokenId>,
    actions: Vec<Action>,
    steps: Vec<Step>,
}

impl<'a> Episode<'a> {
    fn new(source: &'a [TokenId]) -> Self {
        Episode {
            source,
            revealed: 0,
            hypothesis: Vec::new(),
            actions: Vec::new(),
            steps: Vec::new(),
        }
    }

    fn view(&self) -> StepView<'_> {
        StepView {
            source: &self.source[..self.revealed],
            target: &self.hypothesis,
            actions: &self.actions,
            source_exhausted: self.revealed == self.source.len(),
        }
    }

    fn read(&mut self) {
        let token = self.source[self.revealed];
        self.steps.push(Step {
            t: self.actions.len(),
            action: Action::Read,
            token,
        });
        self.actions.push(Action::Read);
        self.revealed += 1;
    }

    fn write(&mut self, token: TokenId) {
        self.steps.push(Step {
            t: self.actions.len(),
            action: Action::Write,
            token,
        });
        self.actions.push(Action::Write);
        self.hypothesis.push(token);
    }

    /// Interpreter output for the next WRITE; the view includes that WRITE.
    fn next_token<I, R>(&mut self, interpreter: &mut I, eos_allowed: bool, decoding: Decoding, rng: &mut R) -> Result<TokenId>
    where
        I: Interpreter + ?Sized,
        R: Rng + ?Sized,
    {
        self.actions.push(Action::Write);
        let dist = interpreter.token_dist(&self.view());
        self.actions.pop();
        choose_token(dist, eos_allowed, decoding, rng)
    }

    fn finish(self, terminated: Termination) -> Transcript {
        Transcript {
            program: Program::new(self.actions),
            hypothesis: self.hypothesis,
            steps: self.steps,
            terminated,
        }
    }
}

/// Runs one simultaneous decoding episode over `source`.
pub fn run_episode<P, I, R>(
    programmer: &mut P,
    interpreter: &mut I,
    source: &[TokenId],
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Transcript>
where
    P: Programmer + ?Sized,
    I: Interpreter + ?Sized,
    R: Rng + ?Sized,
{
    if source.is_empty() {
        return Err(Error::InvalidConfig("empty source".into()));
    }
    let cap = cfg.write_cap(source.len());
    programmer.reset();
    interpreter.reset();
    let mut ep = Episode::new(source);
    loop {
        let dist = programmer.action_dist(&ep.view());
        dist.validate()?;
        let (i, j, n) = (ep.revealed, ep.hypothesis.len(), source.len());
        let action = if i == 0 {
            Action::Read
        } else if i == n {
            Action::Write
        } else if j + 1 >= cap {
            // the last allowed WRITE has to come after the whole source
            Action::Read
        } else {
            choose_action(dist, cfg.decoding, rng)
        };
        match action {
            Action::Read => ep.read(),
            Action::Write => {
                // at least one WRITE has to follow the final READ
                let eos_allowed = i == n && ep.actions.last() == Some(&Action::Write);
                let token = ep.next_token(interpreter, eos_allowed, cfg.decoding, rng)?;
                if token == EOS {
                    return Ok(ep.finish(Termination::Eos));
                }
                ep.write(token);
                if ep.hypothesis.len() >= cap {
                    return Ok(ep.finish(Termination::StepCap));
                }
            }
        }
    }
}

/// Executes a fixed program; only the interpreter is consulted (greedy, no end-of-sentence).
pub fn playback<I: Interpreter + ?Sized>(program: &Program, interpreter: &mut I, source: &[TokenId]) -> Result<Transcript> {
    let report = program.is_valid(source.len(), program.write_count());
    if !report.boundary_valid {
        return Err(Error::InvalidProgram {
            src_len: source.len(),
            tgt_len: program.write_count(),
        });
    }
    interpreter.reset();
    let mut ep = Episode::new(source);
    // greedy decoding never draws from it
    let mut unused = crate::rng::stream_rng(0, crate::rng::Stream::Sample, 0);
    for &a in program.actions() {
        match a {
            Action::Read => ep.read(),
            Action::Write => {
                let token = ep.next_token(interpreter, false, Decoding::Greedy, &mut unused)?;
                ep.write(token);
            }
        }
    }
    Ok(ep.finish(Termination::Eos))
}
