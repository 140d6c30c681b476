//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordbreak::nn::Initializer;
use wordbreak::tagger::sequence_log_likelihood;
use wordbreak::{Model64, Tag, TagSequence, TaggerConfig, TaggerModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random small architecture: every width in 1..=max_width, 1-2 layers per stack.
pub fn random_tiny_config(r: &mut ChaCha8Rng, max_width: usize, vocab: usize) -> TaggerConfig {
    TaggerConfig {
        input_embedding_size: r.gen_range(1..=max_width),
        output_embedding_size: r.gen_range(1..=max_width),
        encoder_layers_forward: r.gen_range(1..=2),
        encoder_layers_backward: r.gen_range(1..=2),
        decoder_layers: r.gen_range(1..=2),
        decoder_units: r.gen_range(1..=max_width),
        encoder_units_per_layer: r.gen_range(1..=max_width),
        beam_size: 2,
        char_vocab_size: vocab,
        tag_count: 3,
    }
}

/// Model with every parameter (biases included) drawn from U(-scale, scale).
pub fn random_model(config: TaggerConfig, seed: u64, scale: f64) -> Model64 {
    let mut m = TaggerModel::<f64>::new(config, seed).expect("valid config");
    let ids: Vec<_> = m.params().ids().collect();
    let mut init = Initializer::new(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for id in ids {
        init.uniform(m.params_mut().get_mut(id), scale);
    }
    m
}

pub fn random_ids(r: &mut ChaCha8Rng, len: usize, vocab: usize) -> Vec<usize> {
    (0..len).map(|_| r.gen_range(0..vocab)).collect()
}

pub fn random_tags(r: &mut ChaCha8Rng, len: usize) -> TagSequence {
    let tags = (0..len)
        .map(|i| if i == 0 || r.gen_bool(0.4) { Tag::B } else { Tag::I })
        .collect();
    TagSequence::new(tags).unwrap()
}

/// Every valid tag sequence of length `n` (first tag B), in binary order.
pub fn all_tag_sequences(n: usize) -> Vec<TagSequence> {
    (0u64..1 << (n - 1))
        .map(|bits| {
            let tags = (0..n)
                .map(|i| if i == 0 || bits >> (i - 1) & 1 == 0 { Tag::B } else { Tag::I })
                .collect();
            TagSequence::new(tags).unwrap()
        })
        .collect()
}

/// Exhaustive argmax of the sequence log-likelihood.
pub fn brute_force_decode(model: &Model64, ids: &[usize]) -> (TagSequence, f64) {
    all_tag_sequences(ids.len())
        .into_iter()
        .map(|t| {
            let s = sequence_log_likelihood(model, ids, &t).unwrap();
            (t, s)
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
}

/// Fourth-order central difference of `f` around `x0` with step `h`.
pub fn central_difference(f: &mut dyn FnMut(f64) -> f64, x0: f64, h: f64) -> f64 {
    let f1 = f(x0 + h) - f(x0 - h);
    let f2 = f(x0 + 2.0 * h) - f(x0 - 2.0 * h);
    (8.0 * f1 - f2) / (12.0 * h)
}

/// |a − n| / max(|a|, |n|), with gradients below `floor` in both routes
/// compared on the absolute scale of `floor`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst: String,
    pub checked: usize,
}

/// Compares the taped gradient of the negative log-likelihood with central
/// differences for every scalar parameter.
pub fn gradient_check(model: &Model64, ids: &[usize], gold: &TagSequence, step: f64) -> GradCheck {
    let (_, grads) = wordbreak::tagger::nll_and_gradients(model, ids, gold).unwrap();
    let mut probe = model.clone();
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst: String::new(),
        checked: 0,
    };
    let pids: Vec<_> = model.params().ids().collect();
    for pid in pids {
        let name = model.params().name(pid).to_string();
        for k in 0..model.params().get(pid).len() {
            let x0 = model.params().get(pid).data()[k];
            let mut f = |x: f64| {
                probe.params_mut().get_mut(pid).data_mut()[k] = x;
                -sequence_log_likelihood(&probe, ids, gold).unwrap()
            };
            let numeric = central_difference(&mut f, x0, step);
            probe.params_mut().get_mut(pid).data_mut()[k] = x0;
            let analytic = grads.get(pid).data()[k];
            let err = relative_error(analytic, numeric, 1e-6);
            out.checked += 1;
            if err > out.max_rel_error {
                out.max_rel_error = err;
                out.worst = format!("{name}[{k}]: analytic {analytic:e}, numeric {numeric:e}");
            }
        }
    }
    out
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Scalar-loop GRU step written directly from the gate equations.
#[allow(clippy::too_many_arguments)]
pub fn gru_scalar_oracle(
    x: &[f64],
    h: &[f64],
    w: [&[f64]; 3],
    u: [&[f64]; 3],
    b: [&[f64]; 3],
) -> Vec<f64> {
    let n = h.len();
    let m = x.len();
    let mut z = vec![0.0; n];
    let mut r = vec![0.0; n];
    for i in 0..n {
        let mut sz = b[0][i];
        let mut sr = b[1][i];
        for j in 0..m {
            sz += w[0][i * m + j] * x[j];
            sr += w[1][i * m + j] * x[j];
        }
        for j in 0..n {
            sz += u[0][i * n + j] * h[j];
            sr += u[1][i * n + j] * h[j];
        }
        z[i] = sigmoid(sz);
        r[i] = sigmoid(sr);
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut sc = b[2][i];
        for j in 0..m {
            sc += w[2][i * m + j] * x[j];
        }
        for j in 0..n {
            sc += u[2][i * n + j] * r[j] * h[j];
        }
        out[i] = (1.0 - z[i]) * h[i] + z[i] * sc.tanh();
    }
    out
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn phrases() -> Vec<wordbreak::data::SegExample> {
    wordbreak::data::load_dataset(
        fixture("phrases.txt"),
        wordbreak::data::Casing::Lowercase,
        wordbreak::data::Origin::Crawl,
    )
    .unwrap()
}

pub fn words() -> Vec<String> {
    wordbreak::data::load_entity_names(fixture("words.txt")).unwrap()
}

/// Reduced architecture: 32-wide embeddings and encoders, one layer per direction.
pub fn reduced_config(vocab: usize) -> TaggerConfig {
    TaggerConfig {
        input_embedding_size: 32,
        output_embedding_size: 16,
        encoder_layers_forward: 1,
        encoder_layers_backward: 1,
        decoder_layers: 1,
        decoder_units: 32,
        encoder_units_per_layer: 32,
        beam_size: 2,
        char_vocab_size: vocab,
        tag_count: 3,
    }
}

/// Entity-like names: one to four title-cased words drawn with a rank-skewed
/// distribution from `words`, with the odd consonant acronym mixed in.
pub fn synthetic_entity_names(words: &[String], n: usize, seed: u64) -> Vec<String> {
    let mut r = rng(seed);
    let weights: Vec<f64> = (1..=words.len()).map(|k| 1.0 / (k as f64).powf(0.6)).collect();
    let pick = rand_distr::WeightedIndex::new(&weights).unwrap();
    let consonants: Vec<char> = ('A'..='Z').filter(|c| !"AEIOU".contains(*c)).collect();
    (0..n)
        .map(|_| {
            let k = r.gen_range(1..=4);
            (0..k)
                .map(|_| {
                    if r.gen_bool(0.04) {
                        (0..r.gen_range(2..=3))
                            .map(|_| consonants[r.gen_range(0..consonants.len())])
                            .collect()
                    } else {
                        let w = &words[r.sample(&pick)];
                        let mut cs = w.chars();
                        let first = cs.next().unwrap().to_uppercase();
                        first.chain(cs).collect::<String>()
                    }
                })
                .collect::<Vec<String>>()
                .join(" ")
        })
        .collect()
}
