use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde_json::{json, Value};
use wordbreak::data::{
    auto_segment_camel, compute_stats, filter_by_vocab, load_dataset, load_entity_names, make_mixed_dataset, save_dataset,
    synthesize_pretrain_example, write_atomic, Casing, CharVocab, Origin, SegExample,
};
use wordbreak::train::{
    evaluate, load_checkpoint, save_checkpoint, train_phase_with, CaseRule, Checkpoint, Count, EvalReport,
    LengthBuckets, NeuralSegmenter, Phase, Segmenter, TrainingMetadata,
};
use wordbreak::{Model, Segmentation, TaggerConfig};

use crate::settings::{self, FileConfig};
use crate::{CasingArg, Cli, Command, EvalArgs, TrainArgs};

pub fn run(cli: Cli) -> Result<()> {
    let file = settings::load(cli.config.as_deref())?;
    let seed = settings::seed(cli.seed, &file);
    match cli.command {
        Command::Prepare {
            input,
            output,
            corrections,
        } => prepare(&input, &output, corrections.as_deref()),
        Command::Synth {
            entities,
            output,
            mixed_case,
            vocab_from,
            min_char_frequency,
            max_unk_ratio,
        } => {
            let filter = vocab_from.map(|p| (p, min_char_frequency, max_unk_ratio));
            synth(&entities, &output, mixed_case, filter)
        }
        Command::Train { args, init } => train(Phase::Baseline, &args, init.as_deref(), seed, &file),
        Command::Pretrain { args, init } => train(Phase::Pretrain, &args, init.as_deref(), seed, &file),
        Command::Finetune { args, init } => train(Phase::Finetune, &args, Some(&init), seed, &file),
        Command::Eval(args) => eval(&args),
        Command::Segment { model, beam } => segment(&model, beam),
        Command::Stats { data } => stats(&data),
    }
}

fn prepare(input: &Path, output: &Path, corrections: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let mut examples = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(auto_segment_camel)
        .collect::<Result<Vec<_>, _>>()?;

    if let Some(path) = corrections {
        let fixes = load_corrections(path)?;
        let mut used = vec![false; fixes.len()];
        let index: HashMap<&str, usize> = fixes.iter().enumerate().map(|(i, (raw, _))| (raw.as_str(), i)).collect();
        for ex in &mut examples {
            if let Some(&i) = index.get(ex.raw().as_str()) {
                ex.segments = fixes[i].1.clone();
                used[i] = true;
            }
        }
        let absent = used.iter().filter(|u| !**u).count();
        if absent > 0 {
            eprintln!("warning: {absent} correction(s) name a domain that is not in the input");
        }
    }
    save_dataset(&examples, output)?;
    eprintln!("wrote {} examples to {}", examples.len(), output.display());
    Ok(())
}

fn load_corrections(path: &Path) -> Result<Vec<(String, Segmentation)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{}:{}", path.display(), n + 1);
        let (raw, segmented) = line
            .split_once('\t')
            .with_context(|| format!("{}: expected raw<TAB>segmented", at()))?;
        let seg = Segmentation::parse(segmented).with_context(at)?;
        ensure!(seg.raw() == raw, "{}: {segmented:?} does not spell {raw:?}", at());
        out.push((raw.to_string(), seg));
    }
    Ok(out)
}

fn synth(entities: &Path, output: &Path, mixed_case: bool, filter: Option<(PathBuf, usize, f64)>) -> Result<()> {
    let names = load_entity_names(entities)?;
    let mut examples: Vec<SegExample> = names.iter().filter_map(|n| synthesize_pretrain_example(n)).collect();
    let skipped = names.len() - examples.len();
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} malformed name(s)");
    }
    if let Some((path, min_freq, max_unk)) = filter {
        ensure!((0.0..=1.0).contains(&max_unk), "--max-unk-ratio must lie in [0, 1]");
        let reference = load_dataset(&path, Casing::Camel, Origin::Crawl)?;
        let vocab = CharVocab::build(reference.iter().map(SegExample::raw), min_freq)?;
        let before = examples.len();
        examples = filter_by_vocab(examples, &vocab, max_unk);
        eprintln!("dropped {} name(s) with too many unknown characters", before - examples.len());
    }
    let examples = if mixed_case {
        make_mixed_dataset(&examples)
    } else {
        examples
    };
    save_dataset(&examples, output)?;
    eprintln!("wrote {} examples to {}", examples.len(), output.display());
    Ok(())
}

fn training_casing(arg: Option<CasingArg>, mixed_case: bool) -> Result<Casing> {
    match (arg, mixed_case) {
        (Some(CasingArg::Unlabeled), _) => bail!("--casing unlabeled is only accepted by eval"),
        (Some(CasingArg::Lowercase), true) => bail!("--mixed-case needs camel-case data"),
        (Some(CasingArg::Camel), _) | (None, true) => Ok(Casing::Camel),
        (Some(CasingArg::Lowercase), false) | (None, false) => Ok(Casing::Lowercase),
    }
}

fn default_metrics_path(out: &Path) -> PathBuf {
    let mut s = OsString::from(out.as_os_str());
    s.push(".metrics.log");
    PathBuf::from(s)
}

enum Start<'a> {
    Checkpoint(&'a Path),
    Fresh(TaggerConfig, usize),
}

fn train(phase: Phase, args: &TrainArgs, init: Option<&Path>, seed: u64, file: &FileConfig) -> Result<()> {
    let config = settings::train_config(phase, &args.hyper, file, seed)?;
    let casing = training_casing(args.casing, config.mixed_case)?;
    let start = match init {
        Some(path) => {
            settings::reject_model_settings(&args.model, file)?;
            ensure!(args.vocab_from.is_empty(), "--vocab-from cannot be combined with --init");
            Start::Checkpoint(path)
        }
        None => {
            let (cfg, min_freq) = settings::model_config(&args.model, file)?;
            Start::Fresh(cfg, min_freq)
        }
    };
    let origin = if phase == Phase::Pretrain { Origin::Synthetic } else { Origin::Crawl };
    let data = load_dataset(&args.data, casing, origin)?;
    let dev = load_dataset(&args.dev, casing, Origin::Crawl)?;
    ensure!(!data.is_empty(), "{} has no examples", args.data.display());
    ensure!(!dev.is_empty(), "{} has no examples", args.dev.display());

    let (model, vocab) = match start {
        Start::Checkpoint(path) => {
            let ckpt = load_checkpoint(path).with_context(|| format!("loading {}", path.display()))?;
            let unseen = data
                .iter()
                .chain(&dev)
                .flat_map(|e| e.raw().chars().collect::<Vec<_>>())
                .filter(|c| !ckpt.vocab.contains(*c))
                .count();
            if unseen > 0 {
                eprintln!("warning: {unseen} character occurrence(s) are outside the checkpoint vocabulary");
            }
            (ckpt.model, ckpt.vocab)
        }
        Start::Fresh(cfg, min_freq) => {
            let mut corpus: Vec<String> = data.iter().chain(&dev).map(SegExample::raw).collect();
            for extra in &args.vocab_from {
                let text = std::fs::read_to_string(extra).with_context(|| format!("reading {}", extra.display()))?;
                corpus.extend(text.lines().map(|l| l.replace(' ', "")));
            }
            let vocab = CharVocab::build(&corpus, min_freq)?;
            let cfg = TaggerConfig {
                char_vocab_size: vocab.len(),
                ..cfg
            };
            (Model::new(cfg, seed)?, vocab)
        }
    };

    let mut log = String::new();
    let outcome = train_phase_with(model, &vocab, &data, &dev, &config, &mut |m| {
        let line = m.log_line();
        eprintln!("{line}");
        log.push_str(&line);
        log.push('\n');
    })?;

    let ckpt = Checkpoint {
        vocab,
        model: outcome.model,
        optimizer: Some(outcome.optimizer),
        metadata: TrainingMetadata {
            phase: Some(phase),
            epoch: outcome.best_epoch,
            dev_accuracy: Some(outcome.best_dev_accuracy),
        },
    };
    save_checkpoint(&ckpt, &args.out)?;
    let metrics = args.metrics.clone().unwrap_or_else(|| default_metrics_path(&args.out));
    write_atomic(&metrics, log.as_bytes())?;
    println!(
        "phase={phase} best_epoch={} dev_acc={:.6} checkpoint={}",
        outcome.best_epoch,
        outcome.best_dev_accuracy,
        args.out.display()
    );
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let (label, labeled) = match args.casing {
        CasingArg::Camel => (Casing::Camel, true),
        CasingArg::Lowercase => (Casing::Lowercase, true),
        CasingArg::Unlabeled => (Casing::Lowercase, false),
    };
    let data = load_dataset(&args.data, label, Origin::Crawl)?;
    ensure!(!data.is_empty(), "{} has no examples", args.data.display());
    let data = if label == Casing::Camel {
        make_mixed_dataset(&data)
    } else {
        data
    };
    if !labeled {
        eprintln!("warning: no casing label given; reporting a single combined accuracy");
    }

    let ckpt = args
        .model
        .as_deref()
        .map(|p| load_checkpoint(p).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    let mut reports: Vec<(&str, EvalReport)> = Vec::new();
    if let Some(ckpt) = &ckpt {
        let beam = args.beam.unwrap_or(ckpt.config().beam_size);
        ensure!(beam > 0, "--beam must be positive");
        let seg = NeuralSegmenter {
            model: &ckpt.model,
            vocab: &ckpt.vocab,
            beam_size: beam,
        };
        reports.push(("model", evaluate(&seg as &dyn Segmenter, &data, LengthBuckets::default())?));
    }
    if args.rule_baseline {
        reports.push(("rule_baseline", evaluate(&CaseRule, &data, LengthBuckets::default())?));
    }

    let mut out = io::stdout().lock();
    if args.json {
        let doc: serde_json::Map<String, Value> = reports
            .iter()
            .map(|(name, r)| (name.to_string(), report_json(r, labeled)))
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        for (name, r) in &reports {
            write_report(&mut out, name, r, labeled, args.by_length)?;
        }
    }
    Ok(())
}

fn percent(c: &Count) -> String {
    format!("{:.2}%", 100.0 * c.ratio())
}

fn casing_name(c: Casing) -> &'static str {
    match c {
        Casing::Camel => "camel",
        Casing::Lowercase => "lowercase",
    }
}

fn write_report(out: &mut impl Write, name: &str, r: &EvalReport, labeled: bool, by_length: bool) -> io::Result<()> {
    writeln!(out, "[{name}]")?;
    writeln!(out, "examples={}", r.overall.total)?;
    writeln!(out, "correct={}", r.overall.correct)?;
    writeln!(out, "accuracy={}", percent(&r.overall))?;
    if labeled {
        for (casing, count) in &r.by_casing {
            writeln!(out, "{}_accuracy={}", casing_name(*casing), percent(count))?;
        }
    }
    if by_length {
        write_table(out, "input_length", &r.by_input_length)?;
        write_table(out, "segments", &r.by_segment_count)?;
    }
    Ok(())
}

fn write_table(out: &mut impl Write, key: &str, rows: &BTreeMap<usize, Count>) -> io::Result<()> {
    writeln!(out, "{key}\texamples\tcorrect\taccuracy")?;
    for (bucket, c) in rows {
        writeln!(out, "{bucket}\t{}\t{}\t{:.4}", c.total, c.correct, c.ratio())?;
    }
    Ok(())
}

fn table_json(rows: &BTreeMap<usize, Count>) -> Value {
    rows.iter()
        .map(|(b, c)| json!({"bucket": b, "examples": c.total, "correct": c.correct, "accuracy": c.ratio()}))
        .collect()
}

fn report_json(r: &EvalReport, labeled: bool) -> Value {
    let mut v = json!({
        "examples": r.overall.total,
        "correct": r.overall.correct,
        "accuracy": r.sequence_accuracy,
        "by_input_length": table_json(&r.by_input_length),
        "by_segment_count": table_json(&r.by_segment_count),
    });
    if labeled {
        let casings: serde_json::Map<String, Value> = r
            .by_casing
            .iter()
            .map(|(c, n)| (casing_name(*c).to_string(), json!(n.ratio())))
            .collect();
        v["by_casing"] = Value::Object(casings);
    }
    v
}

fn segment(model: &Path, beam: Option<usize>) -> Result<()> {
    let ckpt = load_checkpoint(model).with_context(|| format!("loading {}", model.display()))?;
    let beam = beam.unwrap_or(ckpt.config().beam_size);
    ensure!(beam > 0, "--beam must be positive");
    let seg = NeuralSegmenter {
        model: &ckpt.model,
        vocab: &ckpt.vocab,
        beam_size: beam,
    };
    let mut out = BufWriter::new(io::stdout().lock());
    for line in io::stdin().lock().lines() {
        let line = line?;
        let raw = line.trim_end_matches('\r');
        if raw.is_empty() {
            writeln!(out)?;
        } else {
            writeln!(out, "{}", seg.segment(raw)?)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn stats(data: &Path) -> Result<()> {
    let examples = load_dataset(data, Casing::Lowercase, Origin::Crawl)?;
    let s = compute_stats(&examples)?;
    println!("total_examples={}", s.total_examples);
    println!("average_input_length={:.2}", s.average_input_length);
    println!("average_segment_count={:.2}", s.average_segment_count);
    Ok(())
}
