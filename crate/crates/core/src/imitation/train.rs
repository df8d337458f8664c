use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eval::teacher_forced;
use super::features::{FeatureSpace, Features};
use super::linear::{Example, Gradient, LinearSoftmax, Optimizer, OptimizerKind};
use super::{Demo, PolicyPair};
use crate::corpus::{TokenId, EOS};
use crate::error::{Error, Result};
use crate::program::{perturb_prog_valid, perturb_seq, sample_index, wait_k, Action, Program};
use crate::rng::{stream_rng, Stream};
use crate::simulate::StepView;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Replacement probability for the interpreter's conditioning prefix y'.
    pub beta1: f64,
    /// Replacement probability for the programmer's action history a'.
    pub beta2: f64,
    /// Selection probability for the valid permutation a''.
    pub beta3: f64,
    /// Interpreter learning rate.
    pub alpha1: f64,
    /// Programmer learning rate.
    pub alpha2: f64,
    pub optimizer: OptimizerKind,
    /// Stop once either model's rate has been halved this many times.
    pub max_decays: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Also train the interpreter to end the sentence after the last reference token.
    pub train_eos: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta1: 0.05,
            beta2: 0.15,
            beta3: 0.15,
            alpha1: 0.001,
            alpha2: 0.001,
            optimizer: OptimizerKind::Adam,
            max_decays: 4,
            epochs: 20,
            batch_size: 1,
            train_eos: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn without_sampling(&self) -> Self {
        TrainConfig {
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2), ("beta3", self.beta3)] {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {b}")));
            }
        }
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {a}")));
            }
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("batch size and epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// The three perturbed inputs of one coupled scheduled-sampling step.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    /// Conditioning target prefix for the interpreter.
    pub y_prime: Vec<TokenId>,
    /// Action history for the programmer (may be an invalid program).
    pub a_prime: Vec<Action>,
    /// Valid program the interpreter executes.
    pub a_second: Program,
}

impl Perturbed {
    pub fn identity(demo: &Demo) -> Self {
        Perturbed {
            y_prime: demo.target.clone(),
            a_prime: demo.program.actions().to_vec(),
            a_second: demo.program.clone(),
        }
    }
}

/// Index of the `j`-th WRITE in `actions`, and the READ count before it.
fn write_positions(actions: &[Action]) -> Vec<(usize, usize)> {
    let mut reads = 0;
    let mut out = Vec::new();
    for (t, a) in actions.iter().enumerate() {
        match a {
            Action::Read => reads += 1,
            Action::Write => out.push((t, reads)),
        }
    }
    out
}

/// Draws y', a' and a'' for a demo.
///
/// The samplers for y' and a' are the current policies evaluated
/// teacher-forced on the unperturbed demo.
pub fn perturb_example<R: Rng + ?Sized>(pair: &PolicyPair, demo: &Demo, cfg: &TrainConfig, rng: &mut R) -> Perturbed {
    let (x, y, a) = (&demo.source, &demo.target, demo.program.actions());
    let mut feats = Features::new();
    let mut probs = Vec::new();

    let writes = write_positions(a);
    let y_prime = perturb_seq(
        y,
        cfg.beta1,
        |j, rng: &mut R| {
            let (t, i) = writes[j];
            let view = StepView {
                source: &x[..i],
                target: &y[..j],
                actions: &a[..=t],
                source_exhausted: i == x.len(),
            };
            pair.space.interpreter(&view, &mut feats);
            pair.interpreter.probs(&feats, &mut probs);
            probs[EOS as usize] = 0.0;
            sample_index(&probs, rng) as TokenId
        },
        rng,
    );

    let mut reads_before = Vec::with_capacity(a.len());
    let mut reads = 0;
    for act in a {
        reads_before.push(reads);
        if *act == Action::Read {
            reads += 1;
        }
    }
    let a_prime = perturb_seq(
        a,
        cfg.beta2,
        |t, rng: &mut R| {
            let i = reads_before[t];
            let view = StepView {
                source: &x[..i],
                target: &y[..t - i],
                actions: &a[..t],
                source_exhausted: i == x.len(),
            };
            pair.space.programmer(&view, &mut feats);
            pair.programmer.probs(&feats, &mut probs);
            Action::from_index(sample_index(&probs, rng))
        },
        rng,
    );

    let a_second = perturb_prog_valid(&demo.program, cfg.beta3, rng);
    Perturbed {
        y_prime,
        a_prime,
        a_second,
    }
}

/// Supervised examples of one coupled step.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBatch {
    /// One example per WRITE of a'' (labels: reference tokens), then the end-of-sentence example if enabled.
    pub interpreter: Vec<Example>,
    /// Number of interpreter examples that come from WRITE steps.
    pub write_positions: usize,
    /// One example per step of a' (labels: oracle actions).
    pub programmer: Vec<Example>,
}

/// Builds the teacher-forced examples for both policies.
///
/// The interpreter runs the valid program a'' conditioned on y'; the
/// programmer replays the history a' against the interpreter-side cache
/// (source tokens and the y' prefix). Labels always come from the demo.
pub fn coupled_examples(space: &FeatureSpace, demo: &Demo, p: &Perturbed, train_eos: bool) -> CoupledBatch {
    let (x, y) = (&demo.source, &demo.target);
    let a2 = p.a_second.actions();
    let mut with_final: Vec<Action> = a2.to_vec();
    with_final.push(Action::Write);

    let mut interpreter = Vec::with_capacity(y.len() + 1);
    let (mut i, mut j) = (0, 0);
    for (t, act) in a2.iter().enumerate() {
        match act {
            Action::Read => i += 1,
            Action::Write => {
                let view = StepView {
                    source: &x[..i],
                    target: &p.y_prime[..j],
                    actions: &with_final[..=t],
                    source_exhausted: i == x.len(),
                };
                let mut f = Features::new();
                space.interpreter(&view, &mut f);
                interpreter.push(Example {
                    features: f,
                    label: y[j] as usize,
                });
                j += 1;
            }
        }
    }
    let write_positions = interpreter.len();
    if train_eos {
        let view = StepView {
            source: x,
            target: &p.y_prime,
            actions: &with_final,
            source_exhausted: true,
        };
        let mut f = Features::new();
        space.interpreter(&view, &mut f);
        interpreter.push(Example {
            features: f,
            label: EOS as usize,
        });
    }

    let a1 = &p.a_prime;
    let labels = demo.program.actions();
    let mut programmer = Vec::with_capacity(labels.len());
    let (mut reads, mut writes) = (0usize, 0usize);
    for (t, label) in labels.iter().enumerate() {
        let (i, j) = (reads.min(x.len()), writes.min(y.len()));
        let view = StepView {
            source: &x[..i],
            target: &p.y_prime[..j],
            actions: &a1[..t],
            source_exhausted: i == x.len(),
        };
        let mut f = Features::new();
        space.programmer(&view, &mut f);
        programmer.push(Example {
            features: f,
            label: label.index(),
        });
        match a1[t] {
            Action::Read => reads += 1,
            Action::Write => writes += 1,
        }
    }
    CoupledBatch {
        interpreter,
        write_positions,
        programmer,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepLosses {
    /// Summed negative log-likelihood over the interpreter examples.
    pub interpreter: f64,
    pub programmer: f64,
    pub interpreter_positions: usize,
    pub programmer_positions: usize,
}

impl StepLosses {
    fn add(&mut self, o: StepLosses) {
        self.interpreter += o.interpreter;
        self.programmer += o.programmer;
        self.interpreter_positions += o.interpreter_positions;
        self.programmer_positions += o.programmer_positions;
    }
}

/// Parameters plus optimizer state for both policies.
pub struct Trainer {
    pub policies: PolicyPair,
    cfg: TrainConfig,
    intp_opt: Optimizer,
    prog_opt: Optimizer,
    intp_grad: Gradient,
    prog_grad: Gradient,
    pending: usize,
    scratch: Vec<f64>,
}

impl Trainer {
    pub fn new(policies: PolicyPair, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Trainer {
            intp_opt: Optimizer::new(cfg.optimizer, cfg.alpha1, &policies.interpreter),
            prog_opt: Optimizer::new(cfg.optimizer, cfg.alpha2, &policies.programmer),
            intp_grad: Gradient::for_model(&policies.interpreter),
            prog_grad: Gradient::for_model(&policies.programmer),
            policies,
            cfg,
            pending: 0,
            scratch: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn learning_rates(&self) -> (f64, f64) {
        (self.intp_opt.lr, self.prog_opt.lr)
    }

    fn accumulate(model: &LinearSoftmax, batch: &[Example], grad: &mut Gradient, scratch: &mut Vec<f64>) -> f64 {
        batch
            .iter()
            .map(|e| model.accumulate(&e.features, e.label, grad, scratch))
            .sum()
    }

    /// Adds one demo's gradients to the pending batch without updating.
    pub fn accumulate_demo<R: Rng + ?Sized>(&mut self, demo: &Demo, rng: &mut R) -> Result<StepLosses> {
        demo.check()?;
        let perturbed = perturb_example(&self.policies, demo, &self.cfg, rng);
        let batch = coupled_examples(&self.policies.space, demo, &perturbed, self.cfg.train_eos);
        let interpreter = Self::accumulate(
            &self.policies.interpreter,
            &batch.interpreter,
            &mut self.intp_grad,
            &mut self.scratch,
        );
        let programmer = Self::accumulate(
            &self.policies.programmer,
            &batch.programmer,
            &mut self.prog_grad,
            &mut self.scratch,
        );
        self.pending += 1;
        Ok(StepLosses {
            interpreter,
            programmer,
            interpreter_positions: batch.interpreter.len(),
            programmer_positions: batch.programmer.len(),
        })
    }

    /// Applies the averaged pending gradients, one step per model.
    pub fn apply(&mut self) {
        if self.pending == 0 {
            return;
        }
        if self.pending > 1 {
            let s = 1.0 / self.pending as f64;
            self.intp_grad.scale(s);
            self.prog_grad.scale(s);
        }
        self.intp_opt.apply(&mut self.policies.interpreter, &self.intp_grad);
        self.prog_opt.apply(&mut self.policies.programmer, &self.prog_grad);
        self.intp_grad.clear();
        self.prog_grad.clear();
        self.pending = 0;
    }

    /// One coupled scheduled-sampling update on a single demo.
    pub fn clone_step<R: Rng + ?Sized>(&mut self, demo: &Demo, rng: &mut R) -> Result<StepLosses> {
        let losses = self.accumulate_demo(demo, rng)?;
        self.apply();
        Ok(losses)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean training NLL per position.
    pub train_interpreter_loss: f64,
    pub train_programmer_loss: f64,
    pub dev_interpreter_perplexity: f64,
    pub dev_programmer_perplexity: f64,
    pub dev_programmer_accuracy: f64,
    pub dev_interpreter_accuracy: f64,
    /// Learning rates used during this epoch.
    pub alpha1: f64,
    pub alpha2: f64,
    pub interpreter_decays: usize,
    pub programmer_decays: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Each model at its best dev perplexity.
    pub policies: PolicyPair,
    pub history: Vec<EpochReport>,
    pub best_interpreter_epoch: usize,
    pub best_programmer_epoch: usize,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }

    /// Epoch (1-based) at which the later of the two best checkpoints was taken.
    pub fn epochs_to_best(&self) -> usize {
        self.best_interpreter_epoch.max(self.best_programmer_epoch)
    }
}

/// Epoch loop: shuffled per-demo updates, dev perplexity after every epoch,
/// per-model rate halving when dev perplexity goes up, early stop at the
/// `max_decays`-th halving of either model.
pub fn train(init: PolicyPair, train_set: &[Demo], dev_set: &[Demo], cfg: &TrainConfig) -> Result<TrainOutcome> {
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::InvalidConfig("training and dev sets must be non-empty".into()));
    }
    for d in train_set.iter().chain(dev_set) {
        d.check()?;
    }
    let mut trainer = Trainer::new(init, cfg.clone())?;
    let n = train_set.len();
    let mut best_intp = (f64::INFINITY, trainer.policies.interpreter.clone(), 0);
    let mut best_prog = (f64::INFINITY, trainer.policies.programmer.clone(), 0);
    let mut prev: Option<(f64, f64)> = None;
    let (mut intp_decays, mut prog_decays) = (0, 0);
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut stream_rng(cfg.seed, Stream::Train, epoch as u64));
        let (alpha1, alpha2) = trainer.learning_rates();
        let mut total = StepLosses::default();
        for chunk in order.chunks(cfg.batch_size) {
            for &k in chunk {
                let mut rng = stream_rng(cfg.seed, Stream::Perturb, ((epoch as u64) << 32) | k as u64);
                total.add(trainer.accumulate_demo(&train_set[k], &mut rng)?);
            }
            trainer.apply();
        }
        let train_interpreter_loss = total.interpreter / total.interpreter_positions.max(1) as f64;
        let train_programmer_loss = total.programmer / total.programmer_positions.max(1) as f64;
        if !(train_interpreter_loss.is_finite() && train_programmer_loss.is_finite()) || !trainer.policies.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!(
                    "interpreter loss {train_interpreter_loss}, programmer loss {train_programmer_loss}"
                ),
            });
        }

        let dev = teacher_forced(&trainer.policies, dev_set, cfg.train_eos);
        let (intp_ppl, prog_ppl) = (dev.interpreter_perplexity(), dev.programmer_perplexity());
        if intp_ppl < best_intp.0 {
            best_intp = (intp_ppl, trainer.policies.interpreter.clone(), epoch);
        }
        if prog_ppl < best_prog.0 {
            best_prog = (prog_ppl, trainer.policies.programmer.clone(), epoch);
        }
        if let Some((prev_intp, prev_prog)) = prev {
            if intp_ppl > prev_intp {
                trainer.intp_opt.lr /= 2.0;
                intp_decays += 1;
            }
            if prog_ppl > prev_prog {
                trainer.prog_opt.lr /= 2.0;
                prog_decays += 1;
            }
        }
        prev = Some((intp_ppl, prog_ppl));
        history.push(EpochReport {
            epoch,
            train_interpreter_loss,
            train_programmer_loss,
            dev_interpreter_perplexity: intp_ppl,
            dev_programmer_perplexity: prog_ppl,
            dev_programmer_accuracy: dev.programmer_accuracy(),
            dev_interpreter_accuracy: dev.interpreter_accuracy(),
            alpha1,
            alpha2,
            interpreter_decays: intp_decays,
            programmer_decays: prog_decays,
        });
        if intp_decays >= cfg.max_decays || prog_decays >= cfg.max_decays {
            break;
        }
    }

    let mut policies = trainer.policies;
    policies.interpreter = best_intp.1;
    policies.programmer = best_prog.1;
    Ok(TrainOutcome {
        policies,
        history,
        best_interpreter_epoch: best_intp.2,
        best_programmer_epoch: best_prog.2,
    })
}

#[derive(Debug, Clone)]
pub struct WarmStart {
    /// Both policies cloned on wait-k programs.
    pub phase1: TrainOutcome,
    /// Phase 1 finetuned on the given programs with scheduled sampling.
    pub phase2: TrainOutcome,
}

fn with_wait_k(demos: &[Demo], k: usize) -> Result<Vec<Demo>> {
    demos
        .iter()
        .map(|d| {
            Ok(Demo {
                program: wait_k(k, d.source.len(), d.target.len())?,
                ..d.clone()
            })
        })
        .collect()
}

/// Clones wait-`k` trajectories without scheduled sampling, then finetunes
/// both policies (interpreter included) on the demos' own programs with `cfg`.
pub fn warm_start_wait_k(
    init: PolicyPair,
    train_set: &[Demo],
    dev_set: &[Demo],
    k: usize,
    cfg: &TrainConfig,
) -> Result<WarmStart> {
    if k == 0 {
        return Err(Error::ZeroWaitK);
    }
    let phase1 = train(
        init,
        &with_wait_k(train_set, k)?,
        &with_wait_k(dev_set, k)?,
        &cfg.without_sampling(),
    )?;
    let phase2 = train(phase1.policies.clone(), train_set, dev_set, cfg)?;
    Ok(WarmStart { phase1, phase2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ReorderRule, SyntheticTask, SyntheticTaskConfig};
    use crate::imitation::length_ratio;
    use crate::oracle::{generate_oracle, OracleConfig};

    fn demos(reorder: ReorderRule, n: usize, offset: u64) -> (SyntheticTask, Vec<Demo>) {
        let task = SyntheticTask::new(SyntheticTaskConfig {
            vocab_size: 12,
            min_len: 3,
            max_len: 7,
            reorder,
            seed: 5,
        })
        .unwrap();
        let demos = task
            .generate_range(offset, n)
            .iter()
            .map(|p| {
                let a = p.alignment.as_ref().unwrap();
                let prog = generate_oracle(a, p.source.len(), p.target.len(), OracleConfig::default()).unwrap();
                Demo::new(p, prog)
            })
            .collect();
        (task, demos)
    }

    fn fresh(task: &SyntheticTask, d: &[Demo]) -> PolicyPair {
        PolicyPair::new(task.src_vocab().clone(), task.tgt_vocab().clone(), length_ratio(d))
    }

    #[test]
    fn zero_betas_leave_inputs_unperturbed() {
        let (task, d) = demos(ReorderRule::FinalToSecond, 20, 0);
        let pair = fresh(&task, &d);
        let cfg = TrainConfig::default().without_sampling();
        let mut rng = stream_rng(1, Stream::Perturb, 0);
        for demo in &d {
            assert_eq!(perturb_example(&pair, demo, &cfg, &mut rng), Perturbed::identity(demo));
        }
    }

    #[test]
    fn labels_are_never_perturbed() {
        let (task, d) = demos(ReorderRule::FinalToSecond, 30, 0);
        let pair = fresh(&task, &d);
        let cfg = TrainConfig {
            beta1: 0.7,
            beta2: 0.7,
            beta3: 0.7,
            ..Default::default()
        };
        let mut rng = stream_rng(2, Stream::Perturb, 0);
        for demo in &d {
            let p = perturb_example(&pair, demo, &cfg, &mut rng);
            assert!(p.a_second.is_valid(demo.source.len(), demo.target.len()).boundary_valid);
            let batch = coupled_examples(&pair.space, demo, &p, true);
            let intp_labels: Vec<usize> = batch.interpreter.iter().map(|e| e.label).collect();
            let mut expected: Vec<usize> = demo.target.iter().map(|&t| t as usize).collect();
            expected.push(EOS as usize);
            assert_eq!(intp_labels, expected);
            assert_eq!(batch.write_positions, demo.target.len());
            let prog_labels: Vec<usize> = batch.programmer.iter().map(|e| e.label).collect();
            let oracle: Vec<usize> = demo.program.actions().iter().map(|a| a.index()).collect();
            assert_eq!(prog_labels, oracle);
        }
    }

    #[test]
    fn invalid_program_is_rejected_before_update() {
        let (task, d) = demos(ReorderRule::Monotone, 1, 0);
        let mut bad = d[0].clone();
        bad.program = "WR".repeat(bad.source.len()).parse().unwrap();
        let mut trainer = Trainer::new(fresh(&task, &d), TrainConfig::default()).unwrap();
        let before = trainer.policies.clone();
        assert!(trainer.clone_step(&bad, &mut stream_rng(0, Stream::Perturb, 0)).is_err());
        assert_eq!(trainer.policies, before);
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            beta2: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            alpha1: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn loss_decreases_on_monotone_corpus() {
        let (task, d) = demos(ReorderRule::Monotone, 100, 0);
        let cfg = TrainConfig {
            alpha1: 0.05,
            alpha2: 0.05,
            ..Default::default()
        };
        let mut trainer = Trainer::new(fresh(&task, &d), cfg.clone()).unwrap();
        let probe = |t: &Trainer| {
            let tf = teacher_forced(&t.policies, &d, true);
            tf.interpreter_nll + tf.programmer_nll
        };
        let start = probe(&trainer);
        let mut rng = stream_rng(3, Stream::Perturb, 0);
        for step in 0..100 {
            let l = trainer.clone_step(&d[step % d.len()], &mut rng).unwrap();
            assert!(l.interpreter.is_finite() && l.programmer.is_finite());
            assert!(l.interpreter >= 0.0 && l.programmer >= 0.0);
        }
        assert!(probe(&trainer) < start);
    }

    #[test]
    fn batching_averages_gradients() {
        let (task, d) = demos(ReorderRule::Monotone, 2, 0);
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Sgd,
            ..TrainConfig::default().without_sampling()
        };
        let mut rng = stream_rng(0, Stream::Perturb, 0);
        let mut a = Trainer::new(fresh(&task, &d), cfg.clone()).unwrap();
        a.accumulate_demo(&d[0], &mut rng).unwrap();
        a.accumulate_demo(&d[0], &mut rng).unwrap();
        a.apply();
        let mut b = Trainer::new(fresh(&task, &d), cfg).unwrap();
        b.clone_step(&d[0], &mut rng).unwrap();
        for (x, y) in a.policies.interpreter.weights().iter().zip(b.policies.interpreter.weights()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (task, d) = demos(ReorderRule::FinalToSecond, 60, 0);
        let (_, dev) = demos(ReorderRule::FinalToSecond, 20, 10_000);
        let cfg = TrainConfig {
            epochs: 3,
            alpha1: 0.02,
            alpha2: 0.02,
            seed: 9,
            ..Default::default()
        };
        let a = train(fresh(&task, &d), &d, &dev, &cfg).unwrap();
        let b = train(fresh(&task, &d), &d, &dev, &cfg).unwrap();
        assert_eq!(a.policies, b.policies);
        assert_eq!(a.history, b.history);
        let c = train(fresh(&task, &d), &d, &dev, &TrainConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.policies, c.policies);
    }

    #[test]
    fn empty_corpora_and_zero_k_are_errors() {
        let (task, d) = demos(ReorderRule::Monotone, 3, 0);
        let cfg = TrainConfig::default();
        assert!(train(fresh(&task, &d), &[], &d, &cfg).is_err());
        assert!(train(fresh(&task, &d), &d, &[], &cfg).is_err());
        assert_eq!(
            warm_start_wait_k(fresh(&task, &d), &d, &d, 0, &cfg).unwrap_err(),
            Error::ZeroWaitK
        );
    }
}
