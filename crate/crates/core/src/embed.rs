//! Skip-gram training with negative sampling over the walk corpus.
//!
//! The objective for a (center, context) pair with negatives k is
//! `L = -log σ(u_o·v_c) - Σ_k log σ(-u_k·v_c)` where `v` rows come from the
//! input matrix (the published embeddings) and `u` rows from the output
//! matrix. Training is plain SGD with a per-position shrinking window and a
//! linearly decaying learning rate.
//!
//! With `workers = 1` training is bitwise deterministic for a fixed seed.
//! With more workers the matrices are updated lock-free and races are
//! accepted, as is usual for this model family; only shape and finiteness
//! are guaranteed then.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::walk::WalkCorpus;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary is empty after applying min_count")]
    EmptyVocab,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("train config: {0}")]
    BadConfig(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub dimension: usize,
    pub window: usize,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dimension: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            // Zero so that rare tokens (every patient appears in only its
            // own walks) still receive embeddings.
            min_count: 0,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), EmbedError> {
        if self.dimension < 2 {
            return Err(EmbedError::BadConfig("dimension must be at least 2"));
        }
        if self.window == 0 {
            return Err(EmbedError::BadConfig("window must be positive"));
        }
        if self.learning_rate <= 0.0 {
            return Err(EmbedError::BadConfig("learning rate must be positive"));
        }
        if self.workers == 0 {
            return Err(EmbedError::BadConfig("workers must be positive"));
        }
        Ok(())
    }
}

/// Token table sorted by descending frequency (ties break lexicographic),
/// with the `freq^0.75` negative-sampling distribution.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    cumulative: Vec<f64>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    /// Probability of drawing `index` as a negative sample.
    pub fn negative_probability(&self, index: usize) -> f64 {
        let total = *self.cumulative.last().expect("non-empty vocab");
        let lower = if index == 0 { 0.0 } else { self.cumulative[index - 1] };
        (self.cumulative[index] - lower) / total
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocab");
        let r = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.len() - 1)
    }

    /// Draw a negative, re-drawing anything equal to the true context.
    fn sample_negative(&self, rng: &mut ChaCha8Rng, context: usize) -> usize {
        loop {
            let i = self.sample(rng);
            if i != context {
                return i;
            }
        }
    }
}

/// Count tokens and build the vocabulary, keeping frequencies `>= min_count`.
pub fn build_vocab(corpus: &WalkCorpus, min_count: u64) -> Result<Vocab, EmbedError> {
    if corpus.sentences.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for sentence in &corpus.sentences {
        for token in sentence {
            *freq.entry(token.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> =
        freq.into_iter().filter(|&(_, n)| n >= min_count).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if entries.is_empty() {
        return Err(EmbedError::EmptyVocab);
    }

    let mut vocab = Vocab::default();
    let mut running = 0.0;
    for (i, (token, count)) in entries.into_iter().enumerate() {
        vocab.tokens.push(token.to_string());
        vocab.index.insert(token.to_string(), i);
        vocab.counts.push(count);
        running += (count as f64).powf(0.75);
        vocab.cumulative.push(running);
    }
    Ok(vocab)
}

/// Numerically stable `1 / (1 + e^-x)`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln σ(x)`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss and exact analytic gradients of one skip-gram pair.
#[derive(Debug, Clone)]
pub struct SgnsGrads {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Evaluate `L = -log σ(u_o·v_c) - Σ_k log σ(-u_k·v_c)` and its gradients
/// with respect to every participating vector.
pub fn sgns_loss_and_grads(
    center: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> Result<SgnsGrads, EmbedError> {
    let d = center.len();
    for vec in std::iter::once(context).chain(negatives.iter().copied()) {
        if vec.len() != d {
            return Err(EmbedError::DimensionMismatch { expected: d, found: vec.len() });
        }
    }

    let s_pos = dot(center, context);
    let mut loss = -log_sigmoid(s_pos);
    let g_pos = sigmoid(s_pos) - 1.0; // dL/ds for the positive pair

    let mut grad_center: Vec<f64> = context.iter().map(|&u| g_pos * u).collect();
    let grad_context: Vec<f64> = center.iter().map(|&v| g_pos * v).collect();

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let s = dot(center, neg);
        loss -= log_sigmoid(-s);
        let g = sigmoid(s); // dL/ds for a negative pair
        for (gc, &u) in grad_center.iter_mut().zip(neg.iter()) {
            *gc += g * u;
        }
        grad_negatives.push(center.iter().map(|&v| g * v).collect());
    }

    Ok(SgnsGrads { loss, center: grad_center, context: grad_context, negatives: grad_negatives })
}

/// Matrix of `f64` values shared across workers through relaxed atomics.
/// Concurrent updates may interleave arbitrarily; that is the contract of
/// multi-worker training.
struct SharedMatrix {
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    fn from_vec(values: Vec<f64>) -> Self {
        Self { data: values.into_iter().map(|v| AtomicU64::new(v.to_bits())).collect() }
    }

    fn into_vec(self) -> Vec<f64> {
        self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.data[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, i: usize, delta: f64) {
        let v = self.get(i) + delta;
        self.data[i].store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Learned representations: every vocabulary token owns one row of the
/// input matrix. A model read back from the text format keeps only the
/// input matrix, which is all downstream stages use.
pub struct EmbeddingModel {
    vocab: Vocab,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingModel {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.index_of(token).is_some()
    }

    /// The token's input-matrix row.
    pub fn embedding(&self, token: &str) -> Result<&[f64], EmbedError> {
        let i = self
            .vocab
            .index_of(token)
            .ok_or_else(|| EmbedError::UnknownToken(token.to_string()))?;
        Ok(&self.input[i * self.dim..(i + 1) * self.dim])
    }

    pub fn output_row(&self, index: usize) -> &[f64] {
        &self.output[index * self.dim..(index + 1) * self.dim]
    }

    /// Word2vec text format: `|V| d` header, then one token per line
    /// followed by its `d` coordinates.
    pub fn write_text(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "{} {}", self.vocab.len(), self.dim)?;
        for i in 0..self.vocab.len() {
            write!(out, "{}", self.vocab.token(i))?;
            for v in &self.input[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_text(reader: impl BufRead) -> Result<Self, EmbedError> {
        let parse_err = |line: usize, message: String| EmbedError::Parse { line, message };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing |V| d header".into()))?
            .map_err(|e| parse_err(1, e.to_string()))?;
        let mut parts = header.split_whitespace();
        let (v, d) = match (parts.next(), parts.next(), parts.next()) {
            (Some(v), Some(d), None) => (
                v.parse::<usize>().map_err(|_| parse_err(1, "bad vocab size".into()))?,
                d.parse::<usize>().map_err(|_| parse_err(1, "bad dimension".into()))?,
            ),
            _ => return Err(parse_err(1, "header must be exactly |V| d".into())),
        };

        let mut vocab = Vocab::default();
        let mut input = Vec::with_capacity(v * d);
        let mut running = 0.0;
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let token = fields.next().unwrap_or_default();
            if token.is_empty() {
                return Err(parse_err(lineno, "empty token".into()));
            }
            if vocab.index.contains_key(token) {
                return Err(parse_err(lineno, format!("duplicate token {token:?}")));
            }
            let values: Vec<f64> = fields
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            if values.len() != d {
                return Err(parse_err(
                    lineno,
                    format!("expected {d} coordinates, found {}", values.len()),
                ));
            }
            let i = vocab.tokens.len();
            vocab.index.insert(token.to_string(), i);
            vocab.tokens.push(token.to_string());
            vocab.counts.push(0);
            running += 1.0;
            vocab.cumulative.push(running);
            input.extend(values);
        }
        if vocab.len() != v {
            return Err(parse_err(
                0,
                format!("header declares {v} tokens, file has {}", vocab.len()),
            ));
        }
        Ok(Self { vocab, dim: d, input, output: Vec::new() })
    }
}

/// Per-epoch mean loss over all (center, context) pairs.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub epoch_mean_loss: Vec<f64>,
}

/// Train a model over the corpus. See the module docs for the exact update
/// rule and the determinism contract.
pub fn train(corpus: &WalkCorpus, config: &TrainConfig) -> Result<(EmbeddingModel, TrainReport), EmbedError> {
    config.validate()?;
    let vocab = build_vocab(corpus, config.min_count)?;
    let d = config.dimension;

    // Sentences as dense indices, out-of-vocabulary tokens dropped.
    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index_of(t)).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut init = |n: usize| -> Vec<f64> {
        (0..n).map(|_| (init_rng.gen::<f64>() - 0.5) / d as f64).collect()
    };
    let input = SharedMatrix::from_vec(init(vocab.len() * d));
    let output = SharedMatrix::from_vec(init(vocab.len() * d));

    let positions: usize = sentences.iter().map(Vec::len).sum();
    let total_steps = (positions * config.epochs).max(1);
    let global_step = AtomicUsize::new(0);
    // A single token leaves nothing to contrast against.
    let negatives = if vocab.len() > 1 { config.negatives } else { 0 };

    let mut report = TrainReport::default();
    for epoch in 0..config.epochs {
        let workers = config.workers.min(sentences.len()).max(1);
        let chunk = sentences.len().div_ceil(workers);
        let (loss_sum, pairs) = std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .enumerate()
                .map(|(worker, part)| {
                    let vocab = &vocab;
                    let input = &input;
                    let output = &output;
                    let global_step = &global_step;
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                        rng.set_stream(1 + (epoch * workers + worker) as u64);
                        train_chunk(
                            part,
                            vocab,
                            input,
                            output,
                            config,
                            negatives,
                            global_step,
                            total_steps,
                            &mut rng,
                        )
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .fold((0.0, 0u64), |(ls, ps), (l, p)| (ls + l, ps + p))
        });
        report.epoch_mean_loss.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }

    let model = EmbeddingModel { vocab, dim: d, input: input.into_vec(), output: output.into_vec() };
    for v in model.input.iter().chain(model.output.iter()) {
        debug_assert!(v.is_finite());
    }
    Ok((model, report))
}

// Index arithmetic into the shared flat matrices reads clearest here.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn train_chunk(
    sentences: &[Vec<usize>],
    vocab: &Vocab,
    input: &SharedMatrix,
    output: &SharedMatrix,
    config: &TrainConfig,
    negatives: usize,
    global_step: &AtomicUsize,
    total_steps: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, u64) {
    let d = config.dimension;
    let mut grad_center = vec![0.0; d];
    let mut loss_sum = 0.0;
    let mut pairs = 0u64;

    for sentence in sentences {
        for pos in 0..sentence.len() {
            let step = global_step.fetch_add(1, Ordering::Relaxed);
            let lr = config.learning_rate * (1.0 - step as f64 / total_steps as f64).max(1e-4);
            let center = sentence[pos];
            let reach = rng.gen_range(1..=config.window);
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach).min(sentence.len() - 1);
            for ctx_pos in lo..=hi {
                if ctx_pos == pos {
                    continue;
                }
                let context = sentence[ctx_pos];
                grad_center.fill(0.0);

                let s = (0..d).map(|j| input.get(center * d + j) * output.get(context * d + j)).sum::<f64>();
                loss_sum -= log_sigmoid(s);
                let g = sigmoid(s) - 1.0;
                for j in 0..d {
                    grad_center[j] += g * output.get(context * d + j);
                }
                for j in 0..d {
                    output.add(context * d + j, -lr * g * input.get(center * d + j));
                }

                for _ in 0..negatives {
                    let neg = vocab.sample_negative(rng, context);
                    let s = (0..d).map(|j| input.get(center * d + j) * output.get(neg * d + j)).sum::<f64>();
                    loss_sum -= log_sigmoid(-s);
                    let g = sigmoid(s);
                    for j in 0..d {
                        grad_center[j] += g * output.get(neg * d + j);
                    }
                    for j in 0..d {
                        output.add(neg * d + j, -lr * g * input.get(center * d + j));
                    }
                }

                for j in 0..d {
                    input.add(center * d + j, -lr * grad_center[j]);
                }
                pairs += 1;
            }
        }
    }
    (loss_sum, pairs)
}

/// Cosine similarity; zero vectors yield 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    ab / (aa.sqrt() * bb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(sentences: &[&[&str]]) -> WalkCorpus {
        WalkCorpus {
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn vocab_counts_and_order() {
        let vocab = build_vocab(&corpus(&[&["a", "b", "a"]]), 1).unwrap();
        assert_eq!(vocab.len(), 2);
        assert_eq!(vocab.index_of("a"), Some(0));
        assert_eq!(vocab.index_of("b"), Some(1));
        assert_eq!(vocab.count(0), 2);
        assert_eq!(vocab.count(1), 1);
    }

    #[test]
    fn min_count_filters() {
        let vocab = build_vocab(&corpus(&[&["a", "b", "a"]]), 2).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.index_of("a"), Some(0));
        assert!(build_vocab(&corpus(&[&["a", "b", "a"]]), 3).is_err());
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        let vocab = build_vocab(&corpus(&[&["z", "m", "a"]]), 0).unwrap();
        assert_eq!(vocab.token(0), "a");
        assert_eq!(vocab.token(1), "m");
        assert_eq!(vocab.token(2), "z");
    }

    #[test]
    fn negative_distribution_uses_three_quarter_power() {
        // freqs (8, 1): P(a) = 8^0.75 / (8^0.75 + 1).
        let sentences: Vec<&str> = std::iter::repeat_n("a", 8).chain(["b"]).collect();
        let vocab = build_vocab(&corpus(&[&sentences]), 0).unwrap();
        let expected = 8f64.powf(0.75) / (8f64.powf(0.75) + 1.0);
        assert!((expected - 0.826_293).abs() < 1e-6);
        assert!((vocab.negative_probability(0) - expected).abs() < 1e-12);
        assert!((vocab.negative_probability(1) - (1.0 - expected)).abs() < 1e-12);
    }

    #[test]
    fn loss_at_zero_vectors_is_two_log_two() {
        let zero = vec![0.0; 4];
        let grads = sgns_loss_and_grads(&zero, &zero, &[&zero]).unwrap();
        assert!((grads.loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn saturated_positive_pair_has_negligible_loss() {
        // v_c·u_o = 20 with no negatives.
        let center = vec![2.0, 4.0];
        let context = vec![4.0, 3.0];
        let grads = sgns_loss_and_grads(&center, &context, &[]).unwrap();
        assert!(grads.loss > 0.0 && grads.loss < 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = sgns_loss_and_grads(&[0.0, 0.0], &[0.0], &[]);
        assert!(matches!(err, Err(EmbedError::DimensionMismatch { .. })));
        let neg = [0.0f64; 3];
        let err = sgns_loss_and_grads(&[0.0, 0.0], &[0.0, 0.0], &[&neg]);
        assert!(matches!(err, Err(EmbedError::DimensionMismatch { .. })));
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..100 {
            let d = *[2usize, 3, 5].choose(&mut rng).unwrap();
            let n_neg = rng.gen_range(0..=5);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let center = draw(&mut rng);
            let context = draw(&mut rng);
            let negatives: Vec<Vec<f64>> = (0..n_neg).map(|_| draw(&mut rng)).collect();
            let neg_refs: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
            let grads = sgns_loss_and_grads(&center, &context, &neg_refs).unwrap();

            let h = 1e-5;
            let loss_at = |c: &[f64], o: &[f64], negs: &[Vec<f64>]| -> f64 {
                let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
                sgns_loss_and_grads(c, o, &refs).unwrap().loss
            };
            let check = |analytic: f64, numeric: f64| {
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom < 1e-4,
                    "case {case}: analytic {analytic} vs numeric {numeric}"
                );
            };
            for j in 0..d {
                let mut plus = center.clone();
                let mut minus = center.clone();
                plus[j] += h;
                minus[j] -= h;
                let numeric =
                    (loss_at(&plus, &context, &negatives) - loss_at(&minus, &context, &negatives)) / (2.0 * h);
                check(grads.center[j], numeric);

                let mut plus = context.clone();
                let mut minus = context.clone();
                plus[j] += h;
                minus[j] -= h;
                let numeric =
                    (loss_at(&center, &plus, &negatives) - loss_at(&center, &minus, &negatives)) / (2.0 * h);
                check(grads.context[j], numeric);

                for k in 0..n_neg {
                    let mut plus = negatives.clone();
                    let mut minus = negatives.clone();
                    plus[k][j] += h;
                    minus[k][j] -= h;
                    let numeric =
                        (loss_at(&center, &context, &plus) - loss_at(&center, &context, &minus)) / (2.0 * h);
                    check(grads.negatives[k][j], numeric);
                }
            }
        }
    }

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            dimension: 8,
            window: 2,
            negatives: 2,
            epochs: 5,
            learning_rate: 0.05,
            min_count: 0,
            seed: 13,
            workers: 1,
        }
    }

    fn tiny_corpus() -> WalkCorpus {
        corpus(&[
            &["a", "p", "b", "q", "c"],
            &["a", "p", "b", "r", "d"],
            &["c", "q", "b", "p", "a"],
        ])
    }

    #[test]
    fn loss_decreases_over_epochs() {
        let (_, report) = train(&tiny_corpus(), &tiny_config()).unwrap();
        assert_eq!(report.epoch_mean_loss.len(), 5);
        assert!(
            report.epoch_mean_loss[4] < report.epoch_mean_loss[0],
            "losses: {:?}",
            report.epoch_mean_loss
        );
    }

    #[test]
    fn zero_epochs_returns_seeded_initialization() {
        let config = TrainConfig { epochs: 0, ..tiny_config() };
        let (model, report) = train(&tiny_corpus(), &config).unwrap();
        assert!(report.epoch_mean_loss.is_empty());
        // Replicate the documented init: one uniform stream fills the input
        // matrix row-major, then the output matrix.
        let d = config.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let expected: Vec<f64> = (0..model.vocab.len() * d)
            .map(|_| (rng.gen::<f64>() - 0.5) / d as f64)
            .collect();
        let a = model.embedding(model.vocab.token(0)).unwrap();
        assert_eq!(a, &expected[0..d]);
        for v in &expected {
            assert!(*v >= -0.5 / d as f64 && *v < 0.5 / d as f64);
        }
    }

    #[test]
    fn single_worker_training_is_bitwise_deterministic() {
        let (a, _) = train(&tiny_corpus(), &tiny_config()).unwrap();
        let (b, _) = train(&tiny_corpus(), &tiny_config()).unwrap();
        assert_eq!(a.input, b.input);
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn multi_worker_training_stays_finite() {
        let config = TrainConfig { workers: 3, ..tiny_config() };
        let (model, _) = train(&tiny_corpus(), &config).unwrap();
        assert!(model.input.iter().all(|v| v.is_finite()));
        assert!(model.output.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn one_training_pair_applies_the_analytic_gradients() {
        // One sentence of two tokens and no negatives produces exactly two
        // SGD steps; replay them with sgns_loss_and_grads.
        let config = TrainConfig {
            dimension: 4,
            window: 1,
            negatives: 0,
            epochs: 1,
            learning_rate: 0.5,
            min_count: 0,
            seed: 3,
            workers: 1,
        };
        let data = corpus(&[&["x", "y"]]);
        let (model, _) = train(&data, &config).unwrap();

        let d = config.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut input: Vec<f64> = (0..2 * d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect();
        let mut output: Vec<f64> = (0..2 * d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect();

        let x = build_vocab(&data, 0).unwrap().index_of("x").unwrap();
        let y = 1 - x;
        let total = 2.0;
        for (step, (center, context)) in [(x, y), (y, x)].into_iter().enumerate() {
            let lr = config.learning_rate * (1.0 - step as f64 / total).max(1e-4);
            let grads = sgns_loss_and_grads(
                &input[center * d..(center + 1) * d],
                &output[context * d..(context + 1) * d],
                &[],
            )
            .unwrap();
            for j in 0..d {
                output[context * d + j] -= lr * grads.context[j];
            }
            for j in 0..d {
                input[center * d + j] -= lr * grads.center[j];
            }
        }
        for j in 0..2 * d {
            assert!((model.input[j] - input[j]).abs() < 1e-15, "input row diverges at {j}");
            assert!((model.output[j] - output[j]).abs() < 1e-15, "output row diverges at {j}");
        }
    }

    #[test]
    fn embedding_lookup_and_oov() {
        let (model, _) = train(&tiny_corpus(), &tiny_config()).unwrap();
        let v = model.embedding("a").unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|x| x.is_finite()));
        match model.embedding("nope") {
            Err(EmbedError::UnknownToken(t)) => assert_eq!(t, "nope"),
            other => panic!("expected unknown-token error, got {other:?}"),
        }
    }

    #[test]
    fn all_rows_finite_after_training() {
        let (model, _) = train(&tiny_corpus(), &tiny_config()).unwrap();
        for i in 0..model.vocab.len() {
            let row = model.embedding(model.vocab.token(i)).unwrap();
            assert!(row.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn text_format_roundtrip_is_exact() {
        let (model, _) = train(&tiny_corpus(), &tiny_config()).unwrap();
        let mut buf = Vec::new();
        model.write_text(&mut buf).unwrap();
        let back = EmbeddingModel::read_text(&buf[..]).unwrap();
        assert_eq!(back.dimension(), model.dimension());
        for i in 0..model.vocab.len() {
            let token = model.vocab.token(i);
            assert_eq!(back.embedding(token).unwrap(), model.embedding(token).unwrap());
        }
    }

    #[test]
    fn read_text_rejects_malformed_files() {
        assert!(EmbeddingModel::read_text(&b"not a header\n"[..]).is_err());
        assert!(EmbeddingModel::read_text(&b"2 3\na 1 2 3\n"[..]).is_err());
        assert!(EmbeddingModel::read_text(&b"1 3\na 1 2\n"[..]).is_err());
    }
}
