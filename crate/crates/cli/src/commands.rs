use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use simt_core::corpus::{attach_alignments, parse_parallel, CorpusManifest, SentencePair, Vocab, UNK};
use simt_core::imitation::{
    evaluate, evaluate_playback, length_ratio, train, warm_start_wait_k, Demo, EpochReport, EvalOptions, PolicyPair,
    TrainConfig,
};
use simt_core::metrics::{corpus_bleu, delay_report, BleuStats, MAX_ORDER};
use simt_core::oracle::{oracle_sentence, OracleConfig, OracleTally};
use simt_core::program::{add_delay, perturb_prog_valid};
use simt_core::rng::{stream_rng, Stream};
use simt_core::simulate::{playback, render_trace, run_episode, SimConfig, Termination};
use simt_core::{wait_k, Program, SyntheticTask, SyntheticTaskConfig, TokenId};

use crate::io::{emit, emit_side, expect_lines, lines, manifest_path, tokens, Inputs, RunManifest};
use crate::{
    Cli, Command, DelayArgs, EvaluateArgs, MetricsArgs, OracleArgs, PerturbArgs, SimulateArgs, Status, SynthArgs,
    TraceArgs, TrainArgs, ValidateArgs, WaitkArgs,
};

pub fn run(cli: Cli) -> Result<Status> {
    let mut inputs = Inputs::default();
    let status = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Oracle(a) => oracle(a, &mut inputs),
        Command::Validate(a) => validate(a, &mut inputs),
        Command::Perturb(a) => perturb(a, &mut inputs),
        Command::Delay(a) => delay(a, &mut inputs),
        Command::Waitk(a) => waitk(a, &mut inputs),
        Command::Metrics(a) => metrics(a, &mut inputs),
        Command::Simulate(a) => simulate(a, &mut inputs),
        Command::Trace(a) => trace(a, &mut inputs),
        Command::Train(a) => train_cmd(a, &mut inputs),
        Command::Evaluate(a) => evaluate_cmd(a, &mut inputs),
    }?;

    let (primary, seed) = primary_and_seed(&cli.command);
    let tagged = serde_json::to_value(&cli.command)?;
    let (subcommand, config) = tagged
        .as_object()
        .and_then(|o| o.iter().next())
        .map(|(k, v)| (k.clone(), v.clone()))
        .ok_or_else(|| anyhow!("unexpected config shape"))?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        config,
        inputs: inputs.digests(),
        seed,
        status: match status {
            Status::Ok => "ok",
            Status::Invalid => "invalid",
        },
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    emit_side(manifest_path(cli.manifest.as_deref(), primary.as_deref()).as_deref(), &text)?;
    Ok(status)
}

fn primary_and_seed(cmd: &Command) -> (Option<PathBuf>, Option<u64>) {
    match cmd {
        Command::Synth(a) => (Some(a.out_dir.join("corpus.json")), Some(a.seed)),
        Command::Oracle(a) => (a.out.clone(), None),
        Command::Validate(a) => (a.out.clone(), None),
        Command::Perturb(a) => (a.out.clone(), Some(a.seed)),
        Command::Delay(a) => (a.out.clone(), None),
        Command::Waitk(a) => (a.out.clone(), None),
        Command::Metrics(a) => (a.out.clone(), None),
        Command::Simulate(a) => (a.out.clone(), Some(a.seed)),
        Command::Trace(a) => (a.out.clone(), None),
        Command::Train(a) => (Some(a.out.clone()), Some(a.seed)),
        Command::Evaluate(a) => (a.out.clone(), Some(a.seed)),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?)
}

fn program_lines(programs: &[Program]) -> String {
    lines(programs.iter().map(Program::to_string))
}

fn synth(a: &SynthArgs) -> Result<Status> {
    if a.n == 0 {
        bail!("-n must be at least 1");
    }
    let task = SyntheticTask::new(SyntheticTaskConfig {
        vocab_size: a.vocab_size,
        min_len: a.min_len,
        max_len: a.max_len,
        reorder: a.reorder.into(),
        seed: a.seed,
    })?;
    let pairs = task.generate_range(a.offset, a.n);
    let (sv, tv) = (task.src_vocab(), task.tgt_vocab());
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let write = |name: &str, text: String| {
        let p = a.out_dir.join(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    write("src.txt", lines(pairs.iter().map(|p| sv.render(&p.source))))?;
    write("tgt.txt", lines(pairs.iter().map(|p| tv.render(&p.target))))?;
    write(
        "align.txt",
        lines(pairs.iter().map(|p| p.alignment.as_ref().map(ToString::to_string).unwrap_or_default())),
    )?;
    let vocab = serde_json::json!({ "source": sv, "target": tv });
    write("vocab.json", serde_json::to_string_pretty(&vocab)? + "\n")?;
    let summary = CorpusManifest::describe(&pairs, sv, tv, "vocab.json");
    write("corpus.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(Status::Ok)
}

fn oracle(a: &OracleArgs, inputs: &mut Inputs) -> Result<Status> {
    let (pairs, _, _) = inputs.aligned_corpus(&a.corpus.src, &a.corpus.tgt, &a.align)?;
    let cfg = OracleConfig {
        anchor_endpoints: !a.no_anchor,
    };
    let results: Vec<(Program, OracleTally)> = pool(a.jobs)?.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(k, p)| oracle_sentence(k, p, cfg))
            .collect::<simt_core::Result<_>>()
    })?;
    let invalid = results
        .iter()
        .zip(&pairs)
        .filter(|((p, _), s)| !p.is_valid(s.source.len(), s.target.len()).boundary_valid)
        .count();
    let stats = results
        .iter()
        .fold(OracleTally::default(), |acc, (_, t)| acc.merge(*t))
        .finish();
    let programs: Vec<Program> = results.into_iter().map(|(p, _)| p).collect();
    emit(a.out.as_deref(), &program_lines(&programs))?;
    let report = lines([
        format!("sentences\t{}", stats.sentences),
        format!("mean_program_len\t{:.4}", stats.mean_program_len),
        format!("mean_ap\t{:.4}", stats.mean_ap),
        format!("mean_al\t{:.4}", stats.mean_al),
        format!("mean_dal\t{:.4}", stats.mean_dal),
        format!("anchored_links_added\t{}", stats.anchored_links_added),
        format!("unaligned_target_words\t{}", stats.unaligned_target_words),
        format!("invalid_programs\t{invalid}"),
    ]);
    emit_side(a.stats.as_deref(), &report)?;
    if invalid > 0 && cfg.anchor_endpoints {
        eprintln!("error: {invalid} anchored oracle programs are invalid");
        return Ok(Status::Invalid);
    }
    Ok(Status::Ok)
}

fn validate(a: &ValidateArgs, inputs: &mut Inputs) -> Result<Status> {
    let programs = inputs.programs(&a.programs)?;
    let lengths: Vec<(usize, usize)> = match (&a.src, &a.tgt) {
        (Some(s), Some(t)) => {
            let (pairs, _, _) = inputs.corpus(s, t)?;
            expect_lines("program file", programs.len(), pairs.len())?;
            pairs.iter().map(|p| (p.source.len(), p.target.len())).collect()
        }
        // without a corpus only the boundary conditions can be checked
        _ => programs
            .iter()
            .map(|p| (p.read_count().max(1), p.write_count().max(1)))
            .collect(),
    };
    let mut rows = vec!["line\tvalid\tcount_valid\tboundary_valid\treads\twrites".to_string()];
    let mut valid = 0;
    for (k, (p, &(s, t))) in programs.iter().zip(&lengths).enumerate() {
        let r = p.is_valid(s, t);
        valid += usize::from(r.boundary_valid);
        rows.push(format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            k + 1,
            u8::from(r.boundary_valid),
            u8::from(r.count_valid),
            u8::from(r.boundary_valid),
            r.read_count,
            r.write_count
        ));
    }
    emit(a.out.as_deref(), &lines(rows))?;
    let n = programs.len();
    let pct = if n == 0 { 100.0 } else { 100.0 * valid as f64 / n as f64 };
    eprintln!("valid {valid}/{n} ({pct:.2}%)");
    Ok(if valid == n { Status::Ok } else { Status::Invalid })
}

fn perturb(a: &PerturbArgs, inputs: &mut Inputs) -> Result<Status> {
    let programs = inputs.programs(&a.programs)?;
    let out: Vec<Program> = programs
        .iter()
        .enumerate()
        .map(|(k, p)| perturb_prog_valid(p, a.beta3, &mut stream_rng(a.seed, Stream::Perturb, k as u64)))
        .collect();
    emit(a.out.as_deref(), &program_lines(&out))?;
    Ok(Status::Ok)
}

fn delay(a: &DelayArgs, inputs: &mut Inputs) -> Result<Status> {
    let programs = inputs.programs(&a.programs)?;
    let out = programs
        .iter()
        .enumerate()
        .map(|(k, p)| add_delay(p, a.d).with_context(|| format!("line {}", k + 1)))
        .collect::<Result<Vec<_>>>()?;
    emit(a.out.as_deref(), &program_lines(&out))?;
    Ok(Status::Ok)
}

fn waitk(a: &WaitkArgs, inputs: &mut Inputs) -> Result<Status> {
    let (pairs, _, _) = inputs.corpus(&a.corpus.src, &a.corpus.tgt)?;
    let out = pairs
        .iter()
        .map(|p| wait_k(a.k as usize, p.source.len(), p.target.len()))
        .collect::<simt_core::Result<Vec<_>>>()?;
    emit(a.out.as_deref(), &program_lines(&out))?;
    Ok(Status::Ok)
}

/// Sentence BLEU (when hypotheses are given), DAL, AL, AP.
type MetricRow = (Option<f64>, f64, f64, f64);

fn metrics(a: &MetricsArgs, inputs: &mut Inputs) -> Result<Status> {
    let programs = inputs.programs(&a.programs)?;
    let (pairs, _, mut tv) = inputs.corpus(&a.corpus.src, &a.corpus.tgt)?;
    expect_lines("program file", programs.len(), pairs.len())?;
    let hyps: Option<Vec<Vec<TokenId>>> = match &a.hyp {
        Some(path) => {
            let text = inputs.read(path)?;
            let hyps: Vec<Vec<TokenId>> = text
                .lines()
                .map(|l| tokens(l).into_iter().map(|t| tv.intern(t)).collect())
                .collect();
            expect_lines("hypothesis file", hyps.len(), pairs.len())?;
            Some(hyps)
        }
        None => None,
    };

    let rows: Vec<MetricRow> = pool(a.jobs)?.install(|| {
        (0..pairs.len())
            .into_par_iter()
            .map(|k| {
                let pair = &pairs[k];
                let tgt_len = hyps.as_ref().map_or(pair.target.len(), |h| h[k].len());
                let d = delay_report(&programs[k], pair.source.len(), tgt_len)
                    .with_context(|| format!("line {}", k + 1))?;
                let bleu = hyps
                    .as_ref()
                    .map(|h| BleuStats::sentence(&h[k], &pair.target, MAX_ORDER).score().score);
                Ok((bleu, d.dal, d.al, d.ap))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let cell = |bleu: Option<f64>, dal: f64, al: f64, ap: f64| match bleu {
        Some(b) => format!("{b:.2}\t{dal:.4}\t{al:.4}\t{ap:.4}"),
        None => format!("{dal:.4}\t{al:.4}\t{ap:.4}"),
    };
    let header = if hyps.is_some() { "sentence\tBLEU\tDAL\tAL\tAP" } else { "sentence\tDAL\tAL\tAP" };
    let mut out = vec![header.to_string()];
    for (k, &(b, dal, al, ap)) in rows.iter().enumerate() {
        out.push(format!("{}\t{}", k + 1, cell(b, dal, al, ap)));
    }
    let n = rows.len().max(1) as f64;
    let mean = |f: fn(&MetricRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let corpus = match &hyps {
        Some(h) => {
            let refs: Vec<Vec<TokenId>> = pairs.iter().map(|p| p.target.clone()).collect();
            Some(corpus_bleu(h, &refs, MAX_ORDER)?.score)
        }
        None => None,
    };
    out.push(format!("mean\t{}", cell(corpus, mean(|r| r.1), mean(|r| r.2), mean(|r| r.3))));
    emit(a.out.as_deref(), &lines(out))?;
    Ok(Status::Ok)
}

fn load_bundle(inputs: &mut Inputs, path: &Path) -> Result<PolicyPair> {
    let text = inputs.read(path)?;
    PolicyPair::from_bundle(&text).with_context(|| format!("loading {}", path.display()))
}

fn encode_sources(text: &str, vocab: &Vocab) -> Result<Vec<Vec<TokenId>>> {
    text.lines()
        .enumerate()
        .map(|(k, l)| {
            let ids: Vec<TokenId> = tokens(l).into_iter().map(|t| vocab.lookup(t)).collect();
            if ids.is_empty() {
                bail!("empty source line {}", k + 1);
            }
            Ok(ids)
        })
        .collect()
}

fn simulate(a: &SimulateArgs, inputs: &mut Inputs) -> Result<Status> {
    let pair = load_bundle(inputs, &a.bundle)?;
    let sources = encode_sources(&inputs.read(&a.src)?, &pair.src_vocab)?;
    let programs = match &a.programs {
        Some(p) => {
            let progs = inputs.programs(p)?;
            expect_lines("program file", progs.len(), sources.len())?;
            Some(progs)
        }
        None => None,
    };
    let cfg = SimConfig {
        decoding: a.decoding.into(),
        ..SimConfig::default()
    };
    let mut rows = vec!["program\thypothesis\tAP\tAL\tDAL\tend".to_string()];
    for (k, src) in sources.iter().enumerate() {
        let (t, end) = match &programs {
            Some(progs) => {
                let t = playback(&progs[k], &mut pair.interpreter_policy(), src)
                    .with_context(|| format!("line {}", k + 1))?;
                (t, "playback")
            }
            None => {
                let mut rng = stream_rng(a.seed, Stream::Sample, k as u64);
                let t = run_episode(&mut pair.programmer_policy(), &mut pair.interpreter_policy(), src, &cfg, &mut rng)?;
                let end = match t.terminated {
                    Termination::Eos => "eos",
                    Termination::StepCap => "cap",
                };
                (t, end)
            }
        };
        let d = delay_report(&t.program, src.len(), t.hypothesis.len())?;
        rows.push(format!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{end}",
            t.program,
            pair.tgt_vocab.render(&t.hypothesis),
            d.ap,
            d.al,
            d.dal
        ));
    }
    emit(a.out.as_deref(), &lines(rows))?;
    Ok(Status::Ok)
}

fn trace(a: &TraceArgs, inputs: &mut Inputs) -> Result<Status> {
    let programs = inputs.programs(&a.programs)?;
    let src = inputs.read(&a.corpus.src)?;
    let tgt = inputs.read(&a.corpus.tgt)?;
    let (src, tgt): (Vec<&str>, Vec<&str>) = (src.lines().collect(), tgt.lines().collect());
    expect_lines("target file", tgt.len(), src.len())?;
    expect_lines("program file", programs.len(), src.len())?;
    let mut out = String::new();
    for (k, p) in programs.iter().enumerate() {
        let (s, t) = (tokens(src[k]), tokens(tgt[k]));
        if !p.is_valid(s.len(), t.len()).boundary_valid {
            bail!("line {}: program {p} is not valid for lengths ({}, {})", k + 1, s.len(), t.len());
        }
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {} {p}\n", k + 1));
        out.push_str(&render_trace(p, &s, &t));
    }
    emit(a.out.as_deref(), &out)?;
    Ok(Status::Ok)
}

struct DemoFiles<'a> {
    src: &'a Path,
    tgt: &'a Path,
    align: Option<&'a Path>,
    programs: Option<&'a Path>,
}

/// Reads a demonstration set. With `vocabs`, tokens outside them map to `<unk>`;
/// otherwise fresh vocabularies are built from the files.
fn load_demos(inputs: &mut Inputs, f: DemoFiles<'_>, vocabs: Option<(&Vocab, &Vocab)>) -> Result<(Vec<Demo>, Vocab, Vocab)> {
    let (s, t) = (inputs.read(f.src)?, inputs.read(f.tgt)?);
    let (mut sv, mut tv) = vocabs.map_or_else(|| (Vocab::new(), Vocab::new()), |(s, t)| (s.clone(), t.clone()));
    let mut pairs = parse_parallel(&s, &t, &mut sv, &mut tv)?;
    if let Some((s0, t0)) = vocabs {
        let clip = |ids: &mut Vec<TokenId>, n: usize| ids.iter_mut().filter(|x| **x as usize >= n).for_each(|x| *x = UNK);
        for p in &mut pairs {
            clip(&mut p.source, s0.len());
            clip(&mut p.target, t0.len());
        }
        sv = s0.clone();
        tv = t0.clone();
    }
    let programs = match (f.align, f.programs) {
        (Some(a), _) => {
            attach_alignments(&mut pairs, &inputs.read(a)?).context("attaching alignments")?;
            pairs
                .iter()
                .enumerate()
                .map(|(k, p)| oracle_sentence(k, p, OracleConfig::default()).map(|(prog, _)| prog))
                .collect::<simt_core::Result<Vec<_>>>()?
        }
        (None, Some(p)) => {
            let progs = inputs.programs(p)?;
            expect_lines("program file", progs.len(), pairs.len())?;
            progs
        }
        (None, None) => bail!("{} needs alignments or programs", f.src.display()),
    };
    let demos = pairs
        .iter()
        .zip(programs)
        .enumerate()
        .map(|(k, (pair, prog)): (usize, (&SentencePair, Program))| {
            let d = Demo::new(pair, prog);
            d.check().with_context(|| format!("demonstration {}", k + 1))?;
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((demos, sv, tv))
}

fn history_rows(phase: &str, history: &[EpochReport], rows: &mut Vec<String>) {
    for h in history {
        rows.push(format!(
            "{phase}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.4}\t{:.4}\t{}\t{}",
            h.epoch,
            h.train_interpreter_loss,
            h.train_programmer_loss,
            h.dev_interpreter_perplexity,
            h.dev_programmer_perplexity,
            h.dev_interpreter_accuracy,
            h.dev_programmer_accuracy,
            h.alpha1,
            h.alpha2
        ));
    }
}

fn train_cmd(a: &TrainArgs, inputs: &mut Inputs) -> Result<Status> {
    let files = DemoFiles {
        src: &a.demos.corpus.src,
        tgt: &a.demos.corpus.tgt,
        align: a.demos.align.as_deref(),
        programs: a.demos.programs.as_deref(),
    };
    let (train_set, sv, tv) = load_demos(inputs, files, None)?;
    let dev_set = match (&a.dev_src, &a.dev_tgt) {
        (Some(s), Some(t)) => {
            if a.dev_align.is_none() && a.dev_programs.is_none() {
                bail!("--dev-src needs --dev-align or --dev-programs");
            }
            let files = DemoFiles {
                src: s,
                tgt: t,
                align: a.dev_align.as_deref(),
                programs: a.dev_programs.as_deref(),
            };
            load_demos(inputs, files, Some((&sv, &tv)))?.0
        }
        _ => train_set.clone(),
    };
    let cfg = TrainConfig {
        beta1: a.beta1,
        beta2: a.beta2,
        beta3: a.beta3,
        alpha1: a.alpha,
        alpha2: a.alpha,
        epochs: a.epochs,
        batch_size: a.batch_size,
        max_decays: a.max_decays,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let init = PolicyPair::new(sv, tv, length_ratio(&train_set));
    let mut rows = vec![
        "phase\tepoch\ttrain_interpreter_loss\ttrain_programmer_loss\tdev_interpreter_ppl\tdev_programmer_ppl\tdev_interpreter_acc\tdev_programmer_acc\talpha1\talpha2"
            .to_string(),
    ];
    let policies = match a.warm_start_k {
        Some(k) => {
            let ws = warm_start_wait_k(init, &train_set, &dev_set, k as usize, &cfg)?;
            history_rows("wait-k", &ws.phase1.history, &mut rows);
            history_rows("finetune", &ws.phase2.history, &mut rows);
            ws.phase2.policies
        }
        None => {
            let out = train(init, &train_set, &dev_set, &cfg)?;
            history_rows("train", &out.history, &mut rows);
            out.policies
        }
    };
    fs::write(&a.out, policies.to_bundle()? + "\n").with_context(|| format!("writing {}", a.out.display()))?;
    emit_side(a.history.as_deref(), &lines(rows))?;
    Ok(Status::Ok)
}

fn evaluate_cmd(a: &EvaluateArgs, inputs: &mut Inputs) -> Result<Status> {
    let pair = load_bundle(inputs, &a.bundle)?;
    let files = DemoFiles {
        src: &a.demos.corpus.src,
        tgt: &a.demos.corpus.tgt,
        align: a.demos.align.as_deref(),
        programs: a.demos.programs.as_deref(),
    };
    let (demos, _, _) = load_demos(inputs, files, Some((&pair.src_vocab, &pair.tgt_vocab)))?;
    let opts = EvalOptions {
        sim: SimConfig {
            decoding: a.decoding.into(),
            ..SimConfig::default()
        },
        jobs: a.jobs,
        seed: a.seed,
        ..EvalOptions::default()
    };
    let r = if a.playback {
        evaluate_playback(&pair, &demos, &opts)?
    } else {
        evaluate(&pair, &demos, &opts)?
    };
    let table = lines([
        "BLEU\tDAL\tAL\tAP\tprogrammer_acc\tinterpreter_acc\tprogrammer_ppl\tinterpreter_ppl\tsentences\tcapped".to_string(),
        format!(
            "{:.2}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}",
            r.bleu,
            r.dal,
            r.al,
            r.ap,
            r.programmer_accuracy,
            r.interpreter_accuracy,
            r.programmer_perplexity,
            r.interpreter_perplexity,
            r.sentences,
            r.capped
        ),
    ]);
    emit(a.out.as_deref(), &table)?;
    if let Some(path) = &a.hyp_out {
        let hyps = lines(r.transcripts.iter().map(|t| pair.tgt_vocab.render(&t.hypothesis)));
        fs::write(path, hyps).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Status::Ok)
}
