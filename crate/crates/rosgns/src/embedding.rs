//! Embedding extraction from a manifold point, similarity queries, and
//! the text persistence format.
//!
//! A low-rank solution only fixes the product `X = WCᵀ`; splitting it into
//! word and context matrices is a separate choice. The split here
//! diagonalizes the point (SVD through the small d×d core) and scales the
//! singular directions: `√Σ` on both sides by default, with the full-`Σ`
//! and unscaled variants available. Whatever the scaling, the two sides
//! stay complementary so that `WCᵀ` always reconstructs `X`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::manifold::{svd_sorted, LowRankFactors};

/// How the singular values are distributed onto the word side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaScaling {
    /// `W = U√Σ`, `C = V√Σ` — the empirically preferred split.
    #[default]
    Sqrt,
    /// `W = UΣ`, `C = V`; makes `WWᵀ` equal `XXᵀ`, so inner-product
    /// rankings match the shared-context similarity of the score matrix.
    Full,
    /// `W = U`, `C = VΣ`.
    None,
}

impl SigmaScaling {
    pub fn as_str(&self) -> &'static str {
        match self {
            SigmaScaling::Sqrt => "sqrt",
            SigmaScaling::Full => "full",
            SigmaScaling::None => "none",
        }
    }
}

impl std::str::FromStr for SigmaScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(SigmaScaling::Sqrt),
            "full" => Ok(SigmaScaling::Full),
            "none" => Ok(SigmaScaling::None),
            other => Err(Error::InvalidParameter(format!(
                "unknown scaling {other:?} (expected sqrt, full or none)"
            ))),
        }
    }
}

/// Word vectors bound to a token ↔ index bijection.
///
/// Only the bijection is kept, not occurrence counts: the persisted text
/// format (and every downstream consumer) needs tokens and vectors alone.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    vectors: DMatrix<f64>,
    provenance: String,
}

impl EmbeddingSet {
    pub fn new(tokens: Vec<String>, vectors: DMatrix<f64>, provenance: String) -> Result<EmbeddingSet> {
        if tokens.len() != vectors.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} tokens but {} vector rows",
                tokens.len(),
                vectors.nrows()
            )));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "embedding vectors contain non-finite entries".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate token {t:?}")));
            }
        }
        Ok(EmbeddingSet {
            tokens,
            index,
            vectors,
            provenance,
        })
    }

    pub fn from_vocabulary(
        vocab: &Vocabulary,
        vectors: DMatrix<f64>,
        provenance: String,
    ) -> Result<EmbeddingSet> {
        EmbeddingSet::new(vocab.tokens().to_vec(), vectors, provenance)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: u32) -> &str {
        &self.tokens[index as usize]
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Owned copy of one word vector.
    pub fn vector(&self, index: u32) -> DVector<f64> {
        self.vectors.row(index as usize).transpose()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// All other words ranked by descending cosine to the query, ties
    /// broken by vocabulary index; returns the `[offset, offset+count)`
    /// slice of that ranking.
    pub fn nearest_neighbors(
        &self,
        query: &str,
        count: usize,
        offset: usize,
    ) -> Result<Vec<(String, f64)>> {
        let q = self.index_of(query).ok_or_else(|| Error::WordNotFound {
            query: query.to_owned(),
            suggestions: self.suggest(query, 5),
        })?;
        let qv = self.vector(q);
        let mut ranked: Vec<(u32, f64)> = (0..self.len() as u32)
            .filter(|&i| i != q)
            .map(|i| (i, cosine_similarity(&self.vector(i), &qv)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked
            .into_iter()
            .skip(offset)
            .take(count)
            .map(|(i, cos)| (self.tokens[i as usize].clone(), cos))
            .collect())
    }

    fn suggest(&self, query: &str, count: usize) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .tokens
            .iter()
            .map(|t| (strsim::levenshtein(query, t), t))
            .collect();
        scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(count).map(|(_, t)| t.clone()).collect()
    }

    const EMBED_MAGIC: &'static str = "# rosgns-embeddings 1";

    /// Saves the set in the conventional word-vector text format: a header
    /// line `n d`, then one `token v1 .. vd` line per word in index order.
    /// A leading `#` comment carries the format version and provenance.
    /// Floats are printed with ten significant digits.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut emit = |s: String| out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
        let provenance = self.provenance.replace(['\n', '\r'], " ");
        emit(format!("{} provenance={provenance}\n", Self::EMBED_MAGIC))?;
        emit(format!("{} {}\n", self.len(), self.dim()))?;
        for i in 0..self.len() {
            let mut line = self.tokens[i].clone();
            for j in 0..self.dim() {
                line.push(' ');
                line.push_str(&format!("{:.9e}", self.vectors[(i, j)]));
            }
            line.push('\n');
            emit(line)?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Loads a set saved by [`save`](Self::save). Leading `#` comments are
    /// skipped (provenance is recovered when present); malformed rows are
    /// reported with their line number.
    pub fn load(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate().peekable();

        let mut provenance = String::new();
        while let Some((_, Ok(line))) = lines.peek() {
            if !line.starts_with('#') {
                break;
            }
            if let Some(rest) = line.find("provenance=") {
                provenance = line[rest + "provenance=".len()..].to_owned();
            }
            lines.next();
        }
        let (header_no, header) = match lines.next() {
            Some((i, Ok(l))) => (i + 1, l),
            Some((i, Err(e))) => return Err(Error::parse(path, i + 1, e.to_string())),
            None => return Err(Error::parse(path, 0, "missing `n d` header")),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(path, header_no, "header must be `n d`"));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, header_no, format!("bad n {:?}", fields[0])))?;
        let d: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, header_no, format!("bad d {:?}", fields[1])))?;

        let mut tokens = Vec::with_capacity(n);
        let mut vectors = DMatrix::zeros(n, d);
        for row in 0..n {
            let (line_no, line) = match lines.next() {
                Some((i, Ok(l))) => (i + 1, l),
                Some((i, Err(e))) => return Err(Error::parse(path, i + 1, e.to_string())),
                None => {
                    return Err(Error::parse(
                        path,
                        0,
                        format!("header claims {n} rows but file has {row}"),
                    ))
                }
            };
            let mut it = line.split_whitespace();
            let token = it
                .next()
                .ok_or_else(|| Error::parse(path, line_no, "empty row"))?;
            tokens.push(token.to_owned());
            let values: Vec<f64> = it
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(path, line_no, format!("bad float {s:?}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != d {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("row for {token:?} has {} values, expected {d}", values.len()),
                ));
            }
            for (j, v) in values.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::parse(path, line_no, format!("non-finite value {v}")));
                }
                vectors[(row, j)] = v;
            }
        }
        EmbeddingSet::new(tokens, vectors, provenance)
    }
}

/// Cosine similarity; either vector having zero norm yields 0 by
/// convention.
pub fn cosine_similarity(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

/// Diagonalizes a manifold point and splits it into word embeddings and a
/// context matrix.
///
/// The SVD runs on the small d×d core: `S = Ũ Σ Ṽᵀ` gives `X = (UŨ) Σ (VṼ)ᵀ`.
/// Column signs are fixed by forcing the largest-magnitude entry of each
/// left singular vector non-negative, so saved artifacts are reproducible.
pub fn extract_embeddings(
    factors: &LowRankFactors,
    vocab: &Vocabulary,
    scaling: SigmaScaling,
    provenance: String,
) -> Result<(EmbeddingSet, DMatrix<f64>)> {
    let (n, _m, d) = factors.dims();
    if vocab.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "factors have {n} word rows but vocabulary has {}",
            vocab.len()
        )));
    }
    let (core_u, sigma, core_v) = svd_sorted(factors.s());
    let mut left = factors.u() * core_u;
    let mut right = factors.v() * core_v;
    for j in 0..d {
        let col = left.column(j);
        let mut pivot = 0usize;
        for i in 1..col.len() {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            left.column_mut(j).neg_mut();
            right.column_mut(j).neg_mut();
        }
    }
    // Complementary scaling keeps W·Cᵀ equal to the represented product.
    let (word_scale, ctx_scale): (Vec<f64>, Vec<f64>) = match scaling {
        SigmaScaling::Sqrt => {
            let r: Vec<f64> = sigma.iter().map(|s| s.sqrt()).collect();
            (r.clone(), r)
        }
        SigmaScaling::Full => (sigma.clone(), vec![1.0; d]),
        SigmaScaling::None => (vec![1.0; d], sigma.clone()),
    };
    for j in 0..d {
        let mut col = left.column_mut(j);
        col *= word_scale[j];
        let mut col = right.column_mut(j);
        col *= ctx_scale[j];
    }
    let set = EmbeddingSet::from_vocabulary(vocab, left, provenance)?;
    Ok((set, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vocab_of(names: &[&str]) -> Vocabulary {
        Vocabulary::from_parts(
            names.iter().map(|s| s.to_string()).collect(),
            vec![10; names.len()],
            1,
        )
        .unwrap()
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_matrix(n: usize, m: usize, state: &mut u64) -> DMatrix<f64> {
        DMatrix::from_fn(n, m, |_, _| lcg(state))
    }

    #[test]
    fn extract_diagonal_point() {
        // X = diag(4, 1): Σ = diag(4, 1), W = diag(2, 1) up to sign.
        let w0 = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let c0 = DMatrix::identity(2, 2);
        let factors = LowRankFactors::from_product(&w0, &c0).unwrap();
        let vocab = vocab_of(&["a", "b"]);
        let (set, ctx) = extract_embeddings(&factors, &vocab, SigmaScaling::Sqrt, String::new()).unwrap();
        let w = set.vectors();
        assert_relative_eq!(w[(0, 0)].abs(), 2.0, epsilon = 1e-10);
        assert_relative_eq!(w[(1, 1)].abs(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(w[(0, 1)], 0.0, epsilon = 1e-10);
        assert!((w * ctx.transpose() - factors.to_dense()).norm() < 1e-10);
    }

    #[test]
    fn extract_reconstructs_product_for_all_scalings() {
        let mut state = 3u64;
        let factors = LowRankFactors::from_product(
            &random_matrix(8, 5, &mut state),
            &random_matrix(7, 5, &mut state),
        )
        .unwrap();
        let vocab = vocab_of(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let x = factors.to_dense();
        for scaling in [SigmaScaling::Sqrt, SigmaScaling::Full, SigmaScaling::None] {
            let (set, ctx) = extract_embeddings(&factors, &vocab, scaling, String::new()).unwrap();
            let reconstruction = set.vectors() * ctx.transpose();
            assert!(
                (reconstruction - &x).norm() <= 1e-8 * x.norm(),
                "scaling {scaling:?} broke the product"
            );
        }
    }

    #[test]
    fn full_scaling_gram_matrix_matches_score_gram() {
        let mut state = 29u64;
        let factors = LowRankFactors::from_product(
            &random_matrix(9, 5, &mut state),
            &random_matrix(6, 5, &mut state),
        )
        .unwrap();
        let vocab = vocab_of(&["a", "b", "c", "d", "e", "f", "g", "h", "i"]);
        let (set, _) = extract_embeddings(&factors, &vocab, SigmaScaling::Full, String::new()).unwrap();
        let x = factors.to_dense();
        let ww = set.vectors() * set.vectors().transpose();
        let xx = &x * x.transpose();
        assert!((ww - &xx).norm() <= 1e-8 * xx.norm());
    }

    #[test]
    fn extract_recovers_known_svd() {
        // Build factors whose SVD is known: W0 orthonormal columns, C0 =
        // V0·diag(σ). Then W = U0·√Σ0 up to sign.
        let mut state = 37u64;
        let (u0, _) = (random_matrix(6, 2, &mut state).qr()).unpack();
        let (v0, _) = (random_matrix(5, 2, &mut state).qr()).unpack();
        let sigma = [3.0, 0.5];
        let mut c0 = v0.clone();
        for j in 0..2 {
            let mut col = c0.column_mut(j);
            col *= sigma[j];
        }
        let factors = LowRankFactors::from_product(&u0, &c0).unwrap();
        let vocab = vocab_of(&["a", "b", "c", "d", "e", "f"]);
        let (set, _) = extract_embeddings(&factors, &vocab, SigmaScaling::Sqrt, String::new()).unwrap();
        for j in 0..2 {
            let expected = u0.column(j) * sigma[j].sqrt();
            let actual = set.vectors().column(j);
            let diff_pos = (&actual - &expected).norm();
            let diff_neg = (&actual + &expected).norm();
            assert!(diff_pos.min(diff_neg) < 1e-9, "column {j} mismatch");
        }
    }

    #[test]
    fn cosine_basics() {
        let a = DVector::from_vec(vec![1.0, 2.0]);
        assert_relative_eq!(cosine_similarity(&a, &a), 1.0, epsilon = 1e-15);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(cosine_similarity(&e1, &e2), 0.0);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        assert_relative_eq!(
            cosine_similarity(&a, &b),
            11.0 / (5.0f64.sqrt() * 5.0),
            epsilon = 1e-12
        );
        let zero = DVector::from_vec(vec![0.0, 0.0]);
        assert_eq!(cosine_similarity(&zero, &a), 0.0);
    }

    #[test]
    fn neighbors_rank_duplicates_first() {
        let vectors = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let set = EmbeddingSet::new(
            vec!["word0".into(), "word1".into(), "word2".into()],
            vectors,
            String::new(),
        )
        .unwrap();
        let out = set.nearest_neighbors("word0", 2, 0).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, "word1");
        assert_relative_eq!(out[0].1, 1.0, epsilon = 1e-12);
        assert_eq!(out[1].0, "word2");
        assert_relative_eq!(out[1].1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn neighbors_offset_past_end_is_empty() {
        let vectors = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 0.5, 0.0, 1.0]);
        let set = EmbeddingSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vectors,
            String::new(),
        )
        .unwrap();
        assert!(set.nearest_neighbors("a", 5, 2).unwrap().is_empty());
        assert!(set.nearest_neighbors("a", 5, 100).unwrap().is_empty());
    }

    #[test]
    fn neighbors_match_brute_force_sort() {
        let mut state = 77u64;
        let vectors = random_matrix(50, 8, &mut state);
        let tokens: Vec<String> = (0..50).map(|i| format!("w{i}")).collect();
        let set = EmbeddingSet::new(tokens, vectors, String::new()).unwrap();
        let q = set.index_of("w13").unwrap();
        let qv = set.vector(q);
        let mut brute: Vec<(u32, f64)> = (0..50u32)
            .filter(|&i| i != q)
            .map(|i| (i, cosine_similarity(&set.vector(i), &qv)))
            .collect();
        brute.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let got = set.nearest_neighbors("w13", 10, 5).unwrap();
        for (rank, (token, cos)) in got.iter().enumerate() {
            let (bi, bc) = brute[rank + 5];
            assert_eq!(token, set.token(bi));
            assert_eq!(*cos, bc);
        }
    }

    #[test]
    fn oov_query_suggests_close_tokens() {
        let vectors = DMatrix::zeros(2, 2);
        let set = EmbeddingSet::new(vec!["table".into(), "stool".into()], vectors, String::new()).unwrap();
        match set.nearest_neighbors("tabel", 3, 0) {
            Err(Error::WordNotFound { query, suggestions }) => {
                assert_eq!(query, "tabel");
                assert_eq!(suggestions[0], "table");
            }
            other => panic!("expected WordNotFound, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        let set = EmbeddingSet::new(vec![], DMatrix::zeros(0, 5), "empty".into()).unwrap();
        set.save(&path).unwrap();
        let loaded = EmbeddingSet::load(&path).unwrap();
        assert_eq!(loaded.len(), 0);
        assert_eq!(loaded.provenance(), "empty");
    }

    #[test]
    fn malformed_row_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "2 5\nalpha 1 2 3 4 5\nbeta 1 2 3 4\n").unwrap();
        match EmbeddingSet::load(&path) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("beta"), "message was {message:?}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn save_load_preserves_cosines(
            raw in proptest::collection::vec(-1000.0f64..1000.0, 12),
        ) {
            let vectors = DMatrix::from_vec(4, 3, raw);
            let tokens: Vec<String> = (0..4).map(|i| format!("t{i}")).collect();
            let set = EmbeddingSet::new(tokens, vectors, "prop".into()).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("roundtrip.txt");
            set.save(&path).unwrap();
            let loaded = EmbeddingSet::load(&path).unwrap();
            prop_assert_eq!(loaded.len(), set.len());
            for i in 0..4u32 {
                for j in 0..4u32 {
                    let before = cosine_similarity(&set.vector(i), &set.vector(j));
                    let after = cosine_similarity(&loaded.vector(i), &loaded.vector(j));
                    prop_assert!((before - after).abs() < 1e-8);
                }
            }
        }
    }
}
