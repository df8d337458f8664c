//! Coupled imitation learning of a programmer and an interpreter.
//!
//! Both policies are linear softmax models over sparse [`features`]. Training
//! clones oracle trajectories with coupled scheduled sampling: the target
//! prefix the interpreter conditions on, the action history the programmer
//! conditions on, and the program the interpreter executes are each perturbed,
//! while the loss targets stay the unperturbed oracle actions and reference
//! tokens.

pub mod features;
pub mod linear;
mod eval;
mod train;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, evaluate_playback, teacher_forced, EvalOptions, EvalReport, TeacherForced};
pub use train::{
    coupled_examples, perturb_example, train, warm_start_wait_k, CoupledBatch, EpochReport, Perturbed, StepLosses,
    TrainConfig, TrainOutcome, Trainer, WarmStart,
};

use crate::corpus::{SentencePair, TokenId, Vocab};
use crate::error::{Error, Result};
use crate::program::{Action, Program};
use crate::simulate::{ActionDist, Interpreter, Programmer, StepView, TokenDist};
use features::{FeatureSpace, Features, FEATURE_VERSION};
use linear::LinearSoftmax;

/// A training or evaluation triple: source, reference, and the program to imitate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demo {
    pub source: Vec<TokenId>,
    pub target: Vec<TokenId>,
    pub program: Program,
}

impl Demo {
    pub fn new(pair: &SentencePair, program: Program) -> Self {
        Demo {
            source: pair.source.clone(),
            target: pair.target.clone(),
            program,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.program.is_valid(self.source.len(), self.target.len()).boundary_valid {
            Ok(())
        } else {
            Err(Error::InvalidProgram {
                src_len: self.source.len(),
                tgt_len: self.target.len(),
            })
        }
    }
}

/// Total target tokens over total source tokens.
pub fn length_ratio(demos: &[Demo]) -> f64 {
    let src: usize = demos.iter().map(|d| d.source.len()).sum();
    let tgt: usize = demos.iter().map(|d| d.target.len()).sum();
    if src == 0 {
        1.0
    } else {
        tgt as f64 / src as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyPair {
    pub space: FeatureSpace,
    pub programmer: LinearSoftmax,
    pub interpreter: LinearSoftmax,
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
}

impl PolicyPair {
    /// Zero-initialized policies (uniform predictions).
    pub fn new(src_vocab: Vocab, tgt_vocab: Vocab, length_ratio: f64) -> Self {
        let space = FeatureSpace::new(src_vocab.len(), tgt_vocab.len(), length_ratio);
        PolicyPair {
            programmer: LinearSoftmax::zeros(2, space.programmer_dim()),
            interpreter: LinearSoftmax::zeros(tgt_vocab.len(), space.interpreter_dim()),
            space,
            src_vocab,
            tgt_vocab,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.programmer.is_finite() && self.interpreter.is_finite()
    }

    pub fn programmer_policy(&self) -> LinearProgrammer<'_> {
        LinearProgrammer {
            pair: self,
            features: Features::new(),
            scratch: Vec::new(),
        }
    }

    pub fn interpreter_policy(&self) -> LinearInterpreter<'_> {
        LinearInterpreter {
            pair: self,
            features: Features::new(),
        }
    }

    pub fn to_bundle(&self) -> Result<String> {
        serde_json::to_string(&BundleRef {
            format: BUNDLE_FORMAT,
            feature_version: FEATURE_VERSION,
            policies: self,
        })
        .map_err(|e| Error::Bundle(e.to_string()))
    }

    pub fn from_bundle(text: &str) -> Result<Self> {
        let b: Bundle = serde_json::from_str(text).map_err(|e| Error::Bundle(e.to_string()))?;
        if b.format != BUNDLE_FORMAT {
            return Err(Error::Bundle(format!("unsupported bundle format {}", b.format)));
        }
        if b.feature_version != FEATURE_VERSION {
            return Err(Error::Bundle(format!(
                "feature map {} does not match {FEATURE_VERSION}",
                b.feature_version
            )));
        }
        let p = b.policies;
        if p.programmer.features() != p.space.programmer_dim()
            || p.interpreter.features() != p.space.interpreter_dim()
            || p.interpreter.classes() != p.tgt_vocab.len()
        {
            return Err(Error::Bundle("parameter shapes do not match the feature space".into()));
        }
        Ok(p)
    }
}

const BUNDLE_FORMAT: u32 = 1;

#[derive(Serialize)]
struct BundleRef<'a> {
    format: u32,
    feature_version: &'a str,
    policies: &'a PolicyPair,
}

#[derive(Deserialize)]
struct Bundle {
    format: u32,
    feature_version: String,
    policies: PolicyPair,
}

pub struct LinearProgrammer<'a> {
    pair: &'a PolicyPair,
    features: Features,
    scratch: Vec<f64>,
}

impl Programmer for LinearProgrammer<'_> {
    fn action_dist(&mut self, view: &StepView<'_>) -> ActionDist {
        self.pair.space.programmer(view, &mut self.features);
        self.pair.programmer.probs(&self.features, &mut self.scratch);
        ActionDist {
            read: self.scratch[Action::Read.index()],
            write: self.scratch[Action::Write.index()],
        }
    }
}

pub struct LinearInterpreter<'a> {
    pair: &'a PolicyPair,
    features: Features,
}

impl Interpreter for LinearInterpreter<'_> {
    fn token_dist(&mut self, view: &StepView<'_>) -> TokenDist {
        let mut p = Vec::with_capacity(self.pair.interpreter.classes());
        self.pair.space.interpreter(view, &mut self.features);
        self.pair.interpreter.probs(&self.features, &mut p);
        TokenDist::Probs(p)
    }
}
