//! Competitor trainers: truncated SVD over the shifted positive PMI matrix
//! (also the default optimizer initialization) and plain stochastic
//! gradient descent over streamed word-context pairs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CooccurrenceStats, Vocabulary};
use crate::error::{Error, Result};
use crate::manifold::{retract_svd, LowRankFactors};
use crate::sgns::{sigmoid, SgnsConfig};

/// Sparse shifted positive PMI matrix:
/// `max(log(#(w,c)·|D| / (#(w)·#(c))) − log k, 0)` over observed pairs.
/// The positive clamp keeps unobserved pairs at implicit zero, which is
/// what makes an SVD of the matrix tractable.
#[derive(Debug, Clone)]
pub struct SppmiMatrix {
    n: usize,
    m: usize,
    rows: Vec<Vec<(u32, f64)>>,
    shift: u32,
}

impl SppmiMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The shift k used at construction time.
    pub fn shift(&self) -> u32 {
        self.shift
    }

    /// Number of stored (strictly positive) entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, w: u32, c: u32) -> f64 {
        let row = &self.rows[w as usize];
        match row.binary_search_by_key(&c, |&(c, _)| c) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.n, self.m);
        for (w, row) in self.rows.iter().enumerate() {
            for &(c, value) in row {
                dense[(w, c as usize)] = value;
            }
        }
        dense
    }

    /// Dumps the matrix in the same triple layout as the co-occurrence
    /// file, with real-valued entries.
    pub fn save_triples(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut emit = |s: String| out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
        emit(format!("rosgns-sppmi 1\n{} {} {}\n", self.n, self.m, self.shift))?;
        for (w, row) in self.rows.iter().enumerate() {
            for &(c, value) in row {
                emit(format!("{w} {c} {value}\n"))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Builds the SPPMI matrix from co-occurrence statistics.
pub fn sppmi(stats: &CooccurrenceStats, k: u32) -> Result<SppmiMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameter("shift k must be >= 1".into()));
    }
    if stats.total_pairs() == 0 {
        return Err(Error::DegenerateCorpus);
    }
    let total = stats.total_pairs() as f64;
    let log_k = (k as f64).ln();
    let mut rows = Vec::with_capacity(stats.n());
    for w in 0..stats.n() {
        let mut row = Vec::new();
        let word = stats.word_marginal(w as u32) as f64;
        for &(c, count) in stats.row(w) {
            let ctx = stats.context_marginal(c) as f64;
            let pmi = (count as f64 * total / (word * ctx)).ln();
            let value = pmi - log_k;
            if value > 0.0 {
                row.push((c, value));
            }
        }
        rows.push(row);
    }
    Ok(SppmiMatrix {
        n: stats.n(),
        m: stats.m(),
        rows,
        shift: k,
    })
}

/// Rank-d truncated SVD of the SPPMI matrix, returned as a manifold point.
/// Used both as a standalone trainer and as the optimizer initialization.
pub fn svd_sppmi_factors(stats: &CooccurrenceStats, d: usize, k: u32) -> Result<LowRankFactors> {
    let matrix = sppmi(stats, k)?;
    retract_svd(&matrix.to_dense(), d)
}

/// Word and context embedding matrices produced by the SGD trainer.
#[derive(Debug, Clone)]
pub struct EmbeddingPair {
    pub word: DMatrix<f64>,
    pub context: DMatrix<f64>,
}

/// Trains SGNS by stochastic gradient descent over the corpus: one update
/// per observed word-context pair, plus `k` negatives per pair drawn from
/// `P_D(c) = #(c)/|D|`. `config.step_size` is the (constant) learning rate
/// and `config.iterations` is ignored in favor of `epochs`.
///
/// Deterministic for a fixed seed: initialization, pair order and negative
/// draws all come from one seeded generator.
pub fn sgd_sgns_train(
    tokens: &[String],
    vocab: &Vocabulary,
    window: u32,
    config: &SgnsConfig,
    epochs: u32,
    seed: u64,
) -> Result<EmbeddingPair> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let d = config.dimension;
    if d > vocab.len() {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} exceeds vocabulary size {}",
            vocab.len()
        )));
    }
    let n = vocab.len();
    let lr = config.step_size;
    let k = config.negative_samples;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init_matrix = |rows: usize| {
        let mut mat = DMatrix::zeros(rows, d);
        let bound = 0.5 / d as f64;
        for i in 0..rows {
            for j in 0..d {
                mat[(i, j)] = rand::Rng::gen_range(&mut rng, -bound..bound);
            }
        }
        mat
    };
    let mut word = init_matrix(n);
    let mut context = init_matrix(n);

    let ids: Vec<u32> = tokens.iter().filter_map(|t| vocab.index_of(t)).collect();
    let stats = CooccurrenceStats::count(tokens, vocab, window);
    if stats.total_pairs() == 0 || epochs == 0 {
        return Ok(EmbeddingPair { word, context });
    }
    let negative_sampler = WeightedIndex::new(stats.context_marginals().iter().copied())
        .map_err(|e| Error::InvalidParameter(format!("negative-sampling distribution: {e}")))?;

    let len = ids.len();
    let mut accum = vec![0.0f64; d];
    for _ in 0..epochs {
        for i in 0..len {
            let w = ids[i] as usize;
            let lo = i.saturating_sub(window as usize);
            let hi = (i + window as usize).min(len - 1);
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                let c = ids[j] as usize;
                // Positive update, then k negatives; the word row is
                // adjusted once per pair with the accumulated gradient,
                // all context updates use the pre-update word row.
                accum.iter_mut().for_each(|v| *v = 0.0);
                let x: f64 = (0..d).map(|t| word[(w, t)] * context[(c, t)]).sum();
                let g = lr * sigmoid(-x);
                for t in 0..d {
                    accum[t] += g * context[(c, t)];
                }
                for t in 0..d {
                    context[(c, t)] += g * word[(w, t)];
                }
                for _ in 0..k {
                    let neg = negative_sampler.sample(&mut rng);
                    let x: f64 = (0..d).map(|t| word[(w, t)] * context[(neg, t)]).sum();
                    let g = -lr * sigmoid(x);
                    for t in 0..d {
                        accum[t] += g * context[(neg, t)];
                    }
                    for t in 0..d {
                        context[(neg, t)] += g * word[(w, t)];
                    }
                }
                for t in 0..d {
                    word[(w, t)] += accum[t];
                }
            }
        }
    }
    Ok(EmbeddingPair { word, context })
}
