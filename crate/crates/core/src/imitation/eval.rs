use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linear::{Example, LinearSoftmax};
use super::train::{coupled_examples, Perturbed};
use super::{Demo, PolicyPair};
use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::metrics::{corpus_bleu, delay_report, DelayReport};
use crate::metrics::MAX_ORDER;
use crate::rng::{stream_rng, Stream};
use crate::simulate::{playback, run_episode, SimConfig, Termination, Transcript};

/// Teacher-forced log-likelihood and accuracy of both policies on demos.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TeacherForced {
    pub interpreter_nll: f64,
    pub interpreter_positions: usize,
    pub interpreter_correct: usize,
    pub programmer_nll: f64,
    pub programmer_positions: usize,
    pub programmer_correct: usize,
}

fn ratio(a: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        a / n as f64
    }
}

impl TeacherForced {
    pub fn interpreter_perplexity(&self) -> f64 {
        ratio(self.interpreter_nll, self.interpreter_positions).exp()
    }

    pub fn programmer_perplexity(&self) -> f64 {
        ratio(self.programmer_nll, self.programmer_positions).exp()
    }

    pub fn interpreter_accuracy(&self) -> f64 {
        ratio(self.interpreter_correct as f64, self.interpreter_positions)
    }

    pub fn programmer_accuracy(&self) -> f64 {
        ratio(self.programmer_correct as f64, self.programmer_positions)
    }
}

fn score(model: &LinearSoftmax, batch: &[Example], probs: &mut Vec<f64>) -> (f64, usize) {
    let mut nll = 0.0;
    let mut correct = 0;
    for e in batch {
        model.probs(&e.features, probs);
        nll -= probs[e.label].max(f64::MIN_POSITIVE).ln();
        let best = probs
            .iter()
            .enumerate()
            .fold(0, |b, (k, &p)| if p > probs[b] { k } else { b });
        correct += usize::from(best == e.label);
    }
    (nll, correct)
}

pub fn teacher_forced(pair: &PolicyPair, demos: &[Demo], train_eos: bool) -> TeacherForced {
    let mut out = TeacherForced::default();
    let mut probs = Vec::new();
    for d in demos {
        let batch = coupled_examples(&pair.space, d, &Perturbed::identity(d), train_eos);
        let (nll, correct) = score(&pair.interpreter, &batch.interpreter, &mut probs);
        out.interpreter_nll += nll;
        out.interpreter_correct += correct;
        out.interpreter_positions += batch.interpreter.len();
        let (nll, correct) = score(&pair.programmer, &batch.programmer, &mut probs);
        out.programmer_nll += nll;
        out.programmer_correct += correct;
        out.programmer_positions += batch.programmer.len();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub sim: SimConfig,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    pub seed: u64,
    pub train_eos: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            sim: SimConfig::default(),
            jobs: 1,
            seed: 0,
            train_eos: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub ap: f64,
    pub al: f64,
    pub dal: f64,
    pub programmer_accuracy: f64,
    pub interpreter_accuracy: f64,
    pub programmer_perplexity: f64,
    pub interpreter_perplexity: f64,
    pub sentences: usize,
    /// Episodes stopped by the length cap instead of end-of-sentence.
    pub capped: usize,
    #[serde(skip)]
    pub transcripts: Vec<Transcript>,
}

fn run_parallel<F>(jobs: usize, n: usize, f: F) -> Result<Vec<Transcript>>
where
    F: Fn(usize) -> Result<Transcript> + Sync + Send,
{
    if jobs <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

fn report(pair: &PolicyPair, demos: &[Demo], transcripts: Vec<Transcript>, train_eos: bool) -> Result<EvalReport> {
    let hyps: Vec<Vec<TokenId>> = transcripts.iter().map(|t| t.hypothesis.clone()).collect();
    let refs: Vec<Vec<TokenId>> = demos.iter().map(|d| d.target.clone()).collect();
    let bleu = corpus_bleu(&hyps, &refs, MAX_ORDER)?;
    let delays: Vec<DelayReport> = transcripts
        .iter()
        .zip(demos)
        .map(|(t, d)| delay_report(&t.program, d.source.len(), t.hypothesis.len()))
        .collect::<Result<_>>()?;
    let n = demos.len() as f64;
    let mean = |f: fn(&DelayReport) -> f64| delays.iter().map(f).sum::<f64>() / n;
    let tf = teacher_forced(pair, demos, train_eos);
    Ok(EvalReport {
        bleu: bleu.score,
        ap: mean(|d| d.ap),
        al: mean(|d| d.al),
        dal: mean(|d| d.dal),
        programmer_accuracy: tf.programmer_accuracy(),
        interpreter_accuracy: tf.interpreter_accuracy(),
        programmer_perplexity: tf.programmer_perplexity(),
        interpreter_perplexity: tf.interpreter_perplexity(),
        sentences: demos.len(),
        capped: transcripts.iter().filter(|t| t.terminated == Termination::StepCap).count(),
        transcripts,
    })
}

/// Decodes every demo source with both learned policies in the simulator.
///
/// Delay is measured against the hypothesis length; the teacher-forced
/// columns use the demos' programs and references.
pub fn evaluate(pair: &PolicyPair, demos: &[Demo], opts: &EvalOptions) -> Result<EvalReport> {
    if demos.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    let transcripts = run_parallel(opts.jobs, demos.len(), |k| {
        let mut prog = pair.programmer_policy();
        let mut intp = pair.interpreter_policy();
        let mut rng = stream_rng(opts.seed, Stream::Sample, k as u64);
        run_episode(&mut prog, &mut intp, &demos[k].source, &opts.sim, &mut rng)
    })?;
    report(pair, demos, transcripts, opts.train_eos)
}

/// Runs the learned interpreter under each demo's own program.
pub fn evaluate_playback(pair: &PolicyPair, demos: &[Demo], opts: &EvalOptions) -> Result<EvalReport> {
    if demos.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    let transcripts = run_parallel(opts.jobs, demos.len(), |k| {
        let mut intp = pair.interpreter_policy();
        playback(&demos[k].program, &mut intp, &demos[k].source)
    })?;
    report(pair, demos, transcripts, opts.train_eos)
}
