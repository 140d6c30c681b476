//! Acceptance run: one PASS/FAIL/SKIP line per criterion, nonzero exit when
//! any criterion fails.
//!
//! The Common Crawl checks read `train.txt`, `dev.txt` and `test.txt` from the
//! directory named by `WORDBREAK_CC_DIR`. Without it they are skipped and the
//! pre-training comparison runs on the bundled phrase list instead.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use wordbreak::data::{
    compute_stats, load_common_crawl, lowercase_variant, make_mixed_dataset, synthesize_pretrain_example, Casing,
    CharVocab, Origin, SegExample,
};
use wordbreak::nn::{adam_step, AdamState};
use wordbreak::segmentation::{segments_to_tags, tags_to_segments};
use wordbreak::tagger::{beam_search, greedy_decode, nll_and_gradients};
use wordbreak::train::{
    evaluate, load_checkpoint, pretrain_then_finetune, save_checkpoint, train_phase, CaseRule, Checkpoint,
    LengthBuckets, Phase, TrainConfig, TrainingMetadata,
};
use wordbreak::Model;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::{Fail, Pass, Skip};

type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn cc_dir() -> Option<PathBuf> {
    std::env::var_os("WORDBREAK_CC_DIR").map(PathBuf::from)
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn gradient_check_criterion() -> Verdict {
    let start = Instant::now();
    let mut worst = (0.0, String::new());
    let mut scalars = 0;
    let configs = 24;
    for seed in 0..configs {
        let mut r = rng(10_000 + seed);
        let cfg = random_tiny_config(&mut r, 8, 6);
        let m = random_model(cfg, seed, 0.5);
        let len = r.gen_range(1..=6);
        let ids = random_ids(&mut r, len, 6);
        let tags = random_tags(&mut r, len);
        let gc = gradient_check(&m, &ids, &tags, 1e-3);
        scalars += gc.checked;
        if gc.max_rel_error > worst.0 {
            worst = (gc.max_rel_error, format!("config {seed}, {}", gc.worst));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{configs} configs, {scalars} parameters, max relative error {:.2e} ({}), {}",
        worst.0,
        worst.1,
        secs(elapsed)
    );
    check(worst.0 < 1e-6 && elapsed < Duration::from_secs(60), detail)
}

fn bijection_criterion() -> Verdict {
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJ0123456789.-_éüß日本".chars().collect();
    let mut r = rng(20_000);
    let trials = 10_000;
    let mut failures = 0;
    for _ in 0..trials {
        let len = r.gen_range(1..=24);
        let raw: String = (0..len).map(|_| alphabet[r.gen_range(0..alphabet.len())]).collect();
        let tags = random_tags(&mut r, len);
        let seg = tags_to_segments(&raw, &tags).unwrap();
        let tags_back = segments_to_tags(&seg).unwrap();
        let seg_back = tags_to_segments(&raw, &tags_back).unwrap();
        if tags_back != tags || seg_back != seg || seg.raw() != raw || seg.char_len() != len {
            failures += 1;
        }
    }
    check(failures == 0, format!("{trials} random pairs, {failures} failures"))
}

fn decoding_criterion() -> Verdict {
    let models = 256;
    let (mut exact_fail, mut greedy_fail, mut beam2_fail) = (0, 0, 0);
    for seed in 0..models {
        let mut r = rng(seed);
        let cfg = random_tiny_config(&mut r, 8, 7);
        let m = random_model(cfg, seed, 1.5);
        let len = r.gen_range(1..=12);
        let ids = random_ids(&mut r, len, 7);
        let (bf_tags, bf_score) = brute_force_decode(&m, &ids);
        let exact = beam_search(&m, &ids, 1 << len).unwrap();
        if exact.tags != bf_tags || (exact.log_prob - bf_score).abs() > 1e-9 {
            exact_fail += 1;
        }
        let greedy = greedy_decode(&m, &ids).unwrap();
        let beam1 = beam_search(&m, &ids, 1).unwrap();
        if beam1.tags != greedy.tags || beam1.log_prob != greedy.log_prob {
            greedy_fail += 1;
        }
        if beam_search(&m, &ids, 2).unwrap().log_prob < greedy.log_prob - 1e-12 {
            beam2_fail += 1;
        }
    }
    check(
        exact_fail + greedy_fail + beam2_fail == 0,
        format!(
            "{models} models, length <= 12: exhaustive beam != brute force {exact_fail}, \
             beam-1 != greedy {greedy_fail}, beam-2 < greedy {beam2_fail} \
             (beam-2 >= greedy is not guaranteed in general; seed 317 of this generator is a counterexample)"
        ),
    )
}

fn overfit_criterion() -> Verdict {
    let start = Instant::now();
    let data: Vec<SegExample> = phrases().into_iter().step_by(37).take(50).collect();
    let vocab = CharVocab::build(data.iter().map(|e| e.raw()), 1).unwrap();
    let model = Model::new(reduced_config(vocab.len()), 1).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        batch_size: 10,
        max_epochs: 200,
        patience: 10,
        ..TrainConfig::new(Phase::Baseline)
    };
    let out = train_phase(model, &vocab, &data, &data, &cfg).unwrap();
    let elapsed = start.elapsed();
    let reached = out.history.iter().find(|m| m.dev_accuracy == 1.0).map(|m| m.epoch);
    let detail = match reached {
        Some(e) => format!("50 examples, 100% training accuracy at epoch {e}, {}", secs(elapsed)),
        None => format!(
            "50 examples, best training accuracy {:.4} after 200 epochs, {}",
            out.best_dev_accuracy,
            secs(elapsed)
        ),
    };
    check(reached.is_some() && elapsed < Duration::from_secs(120), detail)
}

fn pretraining_criterion() -> Verdict {
    let start = Instant::now();
    let (train, dev, source) = match cc_dir() {
        Some(dir) => {
            let mut train = load_common_crawl(dir.join("train.txt")).unwrap();
            train.shuffle(&mut rng(99));
            train.truncate(2000);
            let dev = load_common_crawl(dir.join("dev.txt")).unwrap();
            (train, dev, "Common Crawl")
        }
        None => {
            let mut labeled = phrases();
            labeled.shuffle(&mut rng(99));
            (labeled[..2000].to_vec(), labeled[2000..2500].to_vec(), "substitute phrase list")
        }
    };
    let lowercase = dev.iter().all(|e| e.casing == Casing::Lowercase);
    let held: HashSet<String> = dev.iter().map(|e| e.raw().to_lowercase()).collect();
    let synthetic: Vec<SegExample> = synthetic_entity_names(&words(), 100_000, 7)
        .iter()
        .filter_map(|n| synthesize_pretrain_example(n))
        .map(|e| if lowercase { lowercase_variant(&e) } else { e })
        .filter(|e| !held.contains(&e.raw().to_lowercase()))
        .collect();
    let vocab = CharVocab::build(synthetic.iter().chain(&train).chain(&dev).map(|e| e.raw()), 1).unwrap();
    let cfg = reduced_config(vocab.len());

    let mut lines = Vec::new();
    let mut wins = 0;
    let seeds = 3u64;
    for seed in 0..seeds {
        let finetune = TrainConfig {
            learning_rate: 1e-3,
            batch_size: 16,
            max_epochs: 5,
            patience: 5,
            seed,
            ..TrainConfig::new(Phase::Finetune)
        };
        let pretrain = TrainConfig {
            learning_rate: 2e-3,
            batch_size: 16,
            max_epochs: 1,
            patience: 1,
            seed,
            epoch_size: Some(30_000),
            ..TrainConfig::new(Phase::Pretrain)
        };
        let baseline = train_phase(Model::new(cfg.clone(), seed).unwrap(), &vocab, &train, &dev, &finetune).unwrap();
        let transfer = pretrain_then_finetune(
            Model::new(cfg.clone(), seed).unwrap(),
            &vocab,
            &synthetic,
            &train,
            &dev,
            &pretrain,
            &finetune,
            &mut |_| {},
        )
        .unwrap();
        let (b, f) = (baseline.best_dev_accuracy, transfer.finetune.best_dev_accuracy);
        if f > b {
            wins += 1;
        }
        lines.push(format!("seed {seed}: {b:.3} -> {f:.3}"));
    }
    check(
        wins == seeds,
        format!(
            "{source}, {} synthetic examples, 2000 labeled: baseline -> fine-tuned dev accuracy {}; {wins}/{seeds} seeds improve, {}",
            synthetic.len(),
            lines.join(", "),
            secs(start.elapsed())
        ),
    )
}

fn table_stats_criterion() -> Verdict {
    let Some(dir) = cc_dir() else {
        return Skip("WORDBREAK_CC_DIR not set, Common Crawl splits unavailable".into());
    };
    let expected = [("train", 17575, 12.63, 2.65), ("dev", 1953, 12.77, 2.66), ("test", 2170, 12.64, 2.67)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (split, total, len, segs) in expected {
        let data = load_common_crawl(dir.join(format!("{split}.txt"))).unwrap();
        let s = compute_stats(&data).unwrap();
        ok &= s.total_examples == total
            && (s.average_input_length - len).abs() <= 0.05
            && (s.average_segment_count - segs).abs() <= 0.05;
        parts.push(format!(
            "{split} {} / {:.2} / {:.2}",
            s.total_examples, s.average_input_length, s.average_segment_count
        ));
    }
    check(ok, parts.join(", "))
}

fn mixed_case_criterion() -> Verdict {
    let names = synthetic_entity_names(&words(), 10_000, 70);
    let camel: Vec<SegExample> = names
        .iter()
        .map(|n| {
            let mut ex = synthesize_pretrain_example(n).unwrap();
            ex.origin = Origin::Crawl;
            ex
        })
        .collect();
    let mixed = make_mixed_dataset(&camel);
    let mut failures = 0;
    for (i, ex) in camel.iter().enumerate() {
        let (a, b) = (&mixed[2 * i], &mixed[2 * i + 1]);
        let ok = a == ex
            && b.casing == Casing::Lowercase
            && b.origin == ex.origin
            && b.raw() == ex.raw().to_lowercase()
            && segments_to_tags(&b.segments).unwrap() == segments_to_tags(&ex.segments).unwrap();
        if !ok {
            failures += 1;
        }
    }
    check(
        mixed.len() == 2 * camel.len() && failures == 0,
        format!("{} examples -> {}, {failures} invariant failures", camel.len(), mixed.len()),
    )
}

fn f32_bits(m: &Model) -> Vec<u32> {
    m.params().iter().flat_map(|(_, _, t)| t.data().iter().map(|v| v.to_bits())).collect()
}

fn checkpoint_criterion() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let vocab = CharVocab::build(["abcdefg"], 1).unwrap();
    let models = 12;
    let mut mismatches = 0;
    let mut accepted_corruptions = 0;
    let mut corruptions = 0;
    for seed in 0..models {
        let mut r = rng(30_000 + seed);
        let cfg = random_tiny_config(&mut r, 8, vocab.len());
        let model: Model = random_model(cfg, seed, 1.0).cast();
        let mut ckpt = Checkpoint::new(model, vocab.clone());
        if seed % 2 == 1 {
            let mut model = ckpt.model.clone();
            let mut adam = AdamState::new(model.params(), 1e-3);
            let ids = random_ids(&mut r, 5, vocab.len());
            let tags = random_tags(&mut r, 5);
            let (_, g) = nll_and_gradients(&model, &ids, &tags).unwrap();
            adam_step(model.params_mut(), &g, &mut adam).unwrap();
            ckpt.model = model;
            ckpt.optimizer = Some(adam);
            ckpt.metadata = TrainingMetadata {
                phase: Some(Phase::Pretrain),
                epoch: seed as usize,
                dev_accuracy: Some(0.5),
            };
        }
        let path = dir.path().join(format!("m{seed}.ckpt"));
        save_checkpoint(&ckpt, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        let same = f32_bits(&back.model) == f32_bits(&ckpt.model)
            && back.vocab == ckpt.vocab
            && back.metadata == ckpt.metadata
            && back.config() == ckpt.config()
            && back.optimizer.as_ref().map(|a| (a.step, a.m.clone(), a.v.clone()))
                == ckpt.optimizer.as_ref().map(|a| (a.step, a.m.clone(), a.v.clone()));
        if !same {
            mismatches += 1;
        }

        let bytes = std::fs::read(&path).unwrap();
        let mut variants: Vec<Vec<u8>> = vec![Vec::new(), bytes[..bytes.len() / 2].to_vec(), bytes[..bytes.len() - 1].to_vec()];
        for _ in 0..4 {
            let mut v = bytes.clone();
            let i = r.gen_range(0..v.len());
            v[i] ^= 1 << r.gen_range(0..8);
            variants.push(v);
        }
        let mut extended = bytes.clone();
        extended.push(0);
        variants.push(extended);
        for v in variants {
            corruptions += 1;
            let bad = dir.path().join("bad.ckpt");
            std::fs::write(&bad, &v).unwrap();
            if catch_unwind(|| load_checkpoint(&bad)).map_or(true, |r| r.is_ok()) {
                accepted_corruptions += 1;
            }
        }
    }
    check(
        mismatches == 0 && accepted_corruptions == 0,
        format!(
            "{models} models round-tripped, {mismatches} mismatches; {corruptions} corrupted files, {accepted_corruptions} not rejected"
        ),
    )
}

fn case_rule_criterion() -> Verdict {
    let Some(dir) = cc_dir() else {
        return Skip("WORDBREAK_CC_DIR not set, Common Crawl dev split unavailable".into());
    };
    let dev: Vec<SegExample> = load_common_crawl(dir.join("dev.txt"))
        .unwrap()
        .into_iter()
        .filter(|e| e.casing == Casing::Camel)
        .collect();
    let report = evaluate(&CaseRule, &dev, LengthBuckets::default()).unwrap();
    check(
        report.sequence_accuracy >= 0.8,
        format!("{} camel-case dev examples, sequence accuracy {:.4}", dev.len(), report.sequence_accuracy),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("gradient correctness", gradient_check_criterion),
        ("tag/segment bijection", bijection_criterion),
        ("exact-decoding oracle", decoding_criterion),
        ("overfit smoke test", overfit_criterion),
        ("pre-training gain", pretraining_criterion),
        ("corpus statistics", table_stats_criterion),
        ("mixed-case construction", mixed_case_criterion),
        ("checkpoint round trip", checkpoint_criterion),
        ("case-rule sanity", case_rule_criterion),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match verdict {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] {}. {name}: {detail}", i + 1);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

