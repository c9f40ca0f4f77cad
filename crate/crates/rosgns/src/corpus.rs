//! Corpus ingestion: tokenization, vocabulary construction and co-occurrence
//! counting.
//!
//! The co-occurrence statistics collected here are the constants of the
//! skip-gram negative-sampling objective: pair counts `#(w,c)`, marginals
//! `#(w)` and `#(c)`, and the total number of observed pairs `|D|`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Splits text into normalized tokens: lowercase, treat every
/// non-alphanumeric character as a separator, drop empty fragments.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Tokenizes a byte stream line by line. Invalid UTF-8 sequences are
/// replaced, not fatal.
pub fn tokenize_reader<R: Read>(reader: R) -> std::io::Result<Vec<String>> {
    let mut buf = BufReader::new(reader);
    let mut tokens = Vec::new();
    let mut line = Vec::new();
    loop {
        line.clear();
        let read = buf.read_until(b'\n', &mut line)?;
        if read == 0 {
            break;
        }
        tokens.extend(tokenize(&String::from_utf8_lossy(&line)));
    }
    Ok(tokens)
}

/// Tokenizes the contents of a file.
pub fn tokenize_file(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    tokenize_reader(file).map_err(|e| Error::io(path, e))
}

/// A token ↔ index bijection with occurrence counts, built by filtering a
/// corpus at a minimum-count threshold.
///
/// Indices are dense, `0..len()`, assigned in descending frequency order
/// with lexicographic tie-break so that they are reproducible across runs.
/// Every stored count strictly exceeds the `min_count` used at build time.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
    min_count: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from a token sequence, keeping tokens whose raw
    /// frequency is strictly greater than `min_count`.
    pub fn build(tokens: &[String], min_count: u64) -> Vocabulary {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for t in tokens {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut kept: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|&(_, c)| c > min_count)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut vocab = Vocabulary {
            tokens: Vec::with_capacity(kept.len()),
            index: HashMap::with_capacity(kept.len()),
            counts: Vec::with_capacity(kept.len()),
            min_count,
        };
        for (i, (token, count)) in kept.into_iter().enumerate() {
            vocab.tokens.push(token.to_owned());
            vocab.index.insert(token.to_owned(), i as u32);
            vocab.counts.push(count);
        }
        vocab
    }

    /// Reassembles a vocabulary from stored parts, revalidating the
    /// invariants (counts above threshold, no duplicates).
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Vocabulary> {
        if tokens.len() != counts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} tokens but {} counts",
                tokens.len(),
                counts.len()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if counts[i] <= min_count {
                return Err(Error::InvalidParameter(format!(
                    "token {t:?} has count {} <= min_count {min_count}",
                    counts[i]
                )));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate token {t:?}")));
            }
        }
        Ok(Vocabulary {
            tokens,
            index,
            counts,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: u32) -> &str {
        &self.tokens[index as usize]
    }

    pub fn count(&self, index: u32) -> u64 {
        self.counts[index as usize]
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Closest in-vocabulary tokens by edit distance, for "did you mean"
    /// hints on failed lookups.
    pub fn suggest(&self, query: &str, count: usize) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .tokens
            .iter()
            .map(|t| (strsim::levenshtein(query, t), t))
            .collect();
        scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(count).map(|(_, t)| t.clone()).collect()
    }
}

/// Sparse co-occurrence statistics of a corpus under a symmetric context
/// window of size `window` (L words on each side).
///
/// `pair_counts` is held in both row-major and column-major sorted order so
/// that row scans (objective) and column scans (gradient) are both cheap.
/// Marginals and the total are derived from the pair counts by exact
/// integer summation.
#[derive(Debug, Clone)]
pub struct CooccurrenceStats {
    n: usize,
    m: usize,
    rows: Vec<Vec<(u32, u64)>>,
    cols: Vec<Vec<(u32, u64)>>,
    word_marginals: Vec<u64>,
    context_marginals: Vec<u64>,
    total_pairs: u64,
    window: u32,
}

impl CooccurrenceStats {
    /// Counts co-occurrences over a token sequence. Out-of-vocabulary
    /// tokens are removed before windowing, so windows close over the gaps
    /// they leave.
    pub fn count(tokens: &[String], vocab: &Vocabulary, window: u32) -> CooccurrenceStats {
        let ids: Vec<u32> = tokens
            .iter()
            .filter_map(|t| vocab.index_of(t))
            .collect();
        let mut pairs: HashMap<(u32, u32), u64> = HashMap::new();
        let len = ids.len();
        for i in 0..len {
            let hi = (i + window as usize).min(len.saturating_sub(1));
            for j in (i + 1)..=hi {
                *pairs.entry((ids[i], ids[j])).or_insert(0) += 1;
                *pairs.entry((ids[j], ids[i])).or_insert(0) += 1;
            }
        }
        let triples: Vec<(u32, u32, u64)> =
            pairs.into_iter().map(|((w, c), k)| (w, c, k)).collect();
        Self::from_pair_counts(vocab.len(), vocab.len(), window, &triples)
            .expect("counting produces valid triples")
    }

    /// Builds statistics directly from `(word, context, count)` triples.
    /// Marginals and the total are derived by summation.
    pub fn from_pair_counts(
        n: usize,
        m: usize,
        window: u32,
        triples: &[(u32, u32, u64)],
    ) -> Result<CooccurrenceStats> {
        let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
        let mut cols: Vec<Vec<(u32, u64)>> = vec![Vec::new(); m];
        let mut word_marginals = vec![0u64; n];
        let mut context_marginals = vec![0u64; m];
        let mut total_pairs = 0u64;
        for &(w, c, k) in triples {
            if (w as usize) >= n || (c as usize) >= m {
                return Err(Error::DimensionMismatch(format!(
                    "pair ({w}, {c}) outside {n}x{m} vocabulary"
                )));
            }
            if k == 0 {
                continue; // no explicit zeros
            }
            rows[w as usize].push((c, k));
            cols[c as usize].push((w, k));
            word_marginals[w as usize] += k;
            context_marginals[c as usize] += k;
            total_pairs += k;
        }
        for (w, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate pair count for word index {w}"
                )));
            }
        }
        for col in cols.iter_mut() {
            col.sort_by_key(|&(w, _)| w);
        }
        Ok(CooccurrenceStats {
            n,
            m,
            rows,
            cols,
            word_marginals,
            context_marginals,
            total_pairs,
            window,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    /// |D|, the total number of observed word-context pairs.
    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Number of distinct pairs with a nonzero count.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// #(w)
    pub fn word_marginal(&self, w: u32) -> u64 {
        self.word_marginals[w as usize]
    }

    /// #(c)
    pub fn context_marginal(&self, c: u32) -> u64 {
        self.context_marginals[c as usize]
    }

    pub fn context_marginals(&self) -> &[u64] {
        &self.context_marginals
    }

    /// #(w,c); zero when the pair was never observed.
    pub fn pair_count(&self, w: u32, c: u32) -> u64 {
        let row = &self.rows[w as usize];
        match row.binary_search_by_key(&c, |&(c, _)| c) {
            Ok(i) => row[i].1,
            Err(_) => 0,
        }
    }

    /// Nonzero entries of row `w`, sorted by context index.
    pub fn row(&self, w: usize) -> &[(u32, u64)] {
        &self.rows[w]
    }

    /// Nonzero entries of column `c`, sorted by word index.
    pub fn col(&self, c: usize) -> &[(u32, u64)] {
        &self.cols[c]
    }
}

const STATS_MAGIC: &str = "rosgns-cooc 1";

/// Writes vocabulary and co-occurrence statistics to a line-based file.
///
/// Layout: a magic line, a header `n m window min_count total_pairs`, then
/// `n` vocabulary records `token count` in index order, then one `w c count`
/// triple per nonzero pair in row-major order. All values are integers, so
/// a round-trip reproduces the in-memory statistics exactly.
pub fn save_stats(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    stats: &CooccurrenceStats,
) -> Result<()> {
    let path = path.as_ref();
    if vocab.len() != stats.n() || vocab.len() != stats.m() {
        return Err(Error::DimensionMismatch(format!(
            "vocabulary has {} tokens, stats are {}x{}",
            vocab.len(),
            stats.n(),
            stats.m()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, s: String| -> Result<()> {
        out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
    };
    write(&mut out, format!("{STATS_MAGIC}\n"))?;
    write(
        &mut out,
        format!(
            "{} {} {} {} {}\n",
            stats.n(),
            stats.m(),
            stats.window(),
            vocab.min_count(),
            stats.total_pairs()
        ),
    )?;
    for i in 0..vocab.len() {
        write(
            &mut out,
            format!("{} {}\n", vocab.token(i as u32), vocab.count(i as u32)),
        )?;
    }
    for w in 0..stats.n() {
        for &(c, k) in stats.row(w) {
            write(&mut out, format!("{w} {c} {k}\n"))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Loads a statistics file written by [`save_stats`], revalidating headers
/// and totals.
pub fn load_stats(path: impl AsRef<Path>) -> Result<(Vocabulary, CooccurrenceStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut next_line = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(Error::parse(path, i + 1, e.to_string())),
            None => Err(Error::parse(path, 0, format!("unexpected end of file, expected {expect}"))),
        }
    };

    let (line_no, magic) = next_line("magic line")?;
    if magic.trim() != STATS_MAGIC {
        return Err(Error::parse(path, line_no, format!("bad magic {magic:?}")));
    }
    let (line_no, header) = next_line("header")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::parse(path, line_no, "header needs 5 fields"));
    }
    let parse_int = |s: &str, what: &str, line: usize| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::parse(path, line, format!("bad {what}: {s:?}")))
    };
    let n = parse_int(fields[0], "n", line_no)? as usize;
    let m = parse_int(fields[1], "m", line_no)? as usize;
    let window = parse_int(fields[2], "window", line_no)? as u32;
    let min_count = parse_int(fields[3], "min_count", line_no)?;
    let total = parse_int(fields[4], "total_pairs", line_no)?;

    let mut tokens = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        let (line_no, record) = next_line("vocabulary record")?;
        let mut it = record.split_whitespace();
        let token = it
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "empty vocabulary record"))?;
        let count = it
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "vocabulary record missing count"))?;
        tokens.push(token.to_owned());
        counts.push(parse_int(count, "count", line_no)?);
    }
    let vocab = Vocabulary::from_parts(tokens, counts, min_count)?;

    let mut triples = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, i + 1, "triple needs 3 fields"));
        }
        let w = parse_int(fields[0], "word index", i + 1)? as u32;
        let c = parse_int(fields[1], "context index", i + 1)? as u32;
        let k = parse_int(fields[2], "pair count", i + 1)?;
        triples.push((w, c, k));
    }
    let stats = CooccurrenceStats::from_pair_counts(n, m, window, &triples)?;
    if stats.total_pairs() != total {
        return Err(Error::parse(
            path,
            2,
            format!(
                "header claims |D| = {total} but triples sum to {}",
                stats.total_pairs()
            ),
        ));
    }
    Ok((vocab, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn tokenize_strips_punctuation_and_case() {
        assert_eq!(tokenize("The cat, the cat."), ["the", "cat", "the", "cat"]);
    }

    #[test]
    fn tokenize_empty() {
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn tokenize_splits_on_every_nonalphanumeric() {
        assert_eq!(tokenize("a1 b-2"), ["a1", "b", "2"]);
    }

    #[test]
    fn tokenize_reader_replaces_invalid_utf8() {
        let bytes: &[u8] = b"ab\xff cd\n";
        let tokens = tokenize_reader(bytes).unwrap();
        assert_eq!(tokens, ["ab", "cd"]);
    }

    #[test]
    fn vocabulary_strict_threshold() {
        let v = Vocabulary::build(&toks("a a a b"), 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v.token(0), "a");
        assert_eq!(v.count(0), 3);
        assert_eq!(v.index_of("b"), None);
    }

    #[test]
    fn vocabulary_matches_brute_force_counter() {
        // 1000-token corpus over a small alphabet with known skew.
        let mut tokens = Vec::new();
        let words = ["alpha", "beta", "gamma", "delta", "epsilon"];
        for i in 0..1000usize {
            tokens.push(words[i % (1 + i / 250)].to_owned());
        }
        let mut brute: HashMap<&str, u64> = HashMap::new();
        for t in &tokens {
            *brute.entry(t.as_str()).or_insert(0) += 1;
        }
        let min_count = 10;
        let v = Vocabulary::build(&tokens, min_count);
        let expected: Vec<&&str> = {
            let mut kept: Vec<&&str> = words
                .iter()
                .filter(|w| brute.get(**w).copied().unwrap_or(0) > min_count)
                .collect();
            kept.sort_by(|a, b| {
                brute[**b].cmp(&brute[**a]).then_with(|| a.cmp(b))
            });
            kept
        };
        assert_eq!(v.len(), expected.len());
        for (i, w) in expected.iter().enumerate() {
            assert_eq!(v.token(i as u32), **w);
            assert_eq!(v.count(i as u32), brute[**w]);
        }
    }

    #[test]
    fn vocabulary_ordering_breaks_ties_lexicographically() {
        let v = Vocabulary::build(&toks("b b a a c c c"), 1);
        assert_eq!(v.tokens(), ["c", "a", "b"]);
    }

    #[test]
    fn adjacent_pair_counted_both_directions() {
        let tokens = toks("a b");
        let v = Vocabulary::build(&tokens, 0);
        let s = CooccurrenceStats::count(&tokens, &v, 1);
        let a = v.index_of("a").unwrap();
        let b = v.index_of("b").unwrap();
        assert_eq!(s.pair_count(a, b), 1);
        assert_eq!(s.pair_count(b, a), 1);
        assert_eq!(s.total_pairs(), 2);
    }

    #[test]
    fn single_token_has_no_context() {
        let tokens = toks("a");
        let v = Vocabulary::build(&tokens, 0);
        let s = CooccurrenceStats::count(&tokens, &v, 5);
        assert_eq!(s.total_pairs(), 0);
        assert_eq!(s.nnz(), 0);
    }

    #[test]
    fn windows_close_over_removed_oov_tokens() {
        // "x" is out of vocabulary, so the sequence contracts to
        // [a,b,a,b,a,b]: five adjacencies, each counted in both directions.
        let tokens = toks("a x b a x b a x b");
        let v = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![3, 3], 2).unwrap();
        let s = CooccurrenceStats::count(&tokens, &v, 1);
        assert_eq!(s.pair_count(0, 1), 5);
        assert_eq!(s.pair_count(1, 0), 5);
        assert_eq!(s.total_pairs(), 10);
    }

    #[test]
    fn counts_match_brute_force_window_loop() {
        // 200-token pseudo-random sequence over 5 symbols, L = 5.
        let symbols = ["s0", "s1", "s2", "s3", "s4"];
        let mut state = 12345u64;
        let mut tokens = Vec::new();
        for _ in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            tokens.push(symbols[(state >> 33) as usize % 5].to_owned());
        }
        let v = Vocabulary::build(&tokens, 0);
        let window = 5i64;
        let s = CooccurrenceStats::count(&tokens, &v, window as u32);

        let ids: Vec<u32> = tokens.iter().map(|t| v.index_of(t).unwrap()).collect();
        let mut brute: HashMap<(u32, u32), u64> = HashMap::new();
        for i in 0..ids.len() as i64 {
            for o in -window..=window {
                if o == 0 {
                    continue;
                }
                let j = i + o;
                if j < 0 || j >= ids.len() as i64 {
                    continue;
                }
                *brute.entry((ids[i as usize], ids[j as usize])).or_insert(0) += 1;
            }
        }
        let total: u64 = brute.values().sum();
        assert_eq!(s.total_pairs(), total);
        for w in 0..v.len() as u32 {
            for c in 0..v.len() as u32 {
                assert_eq!(s.pair_count(w, c), brute.get(&(w, c)).copied().unwrap_or(0));
            }
        }
    }

    #[test]
    fn marginals_are_exact_sums() {
        let tokens = toks("a b c a b a c b a");
        let v = Vocabulary::build(&tokens, 0);
        let s = CooccurrenceStats::count(&tokens, &v, 2);
        let mut word_sum = vec![0u64; s.n()];
        let mut ctx_sum = vec![0u64; s.m()];
        let mut total = 0u64;
        for w in 0..s.n() {
            for &(c, k) in s.row(w) {
                word_sum[w] += k;
                ctx_sum[c as usize] += k;
                total += k;
            }
        }
        for w in 0..s.n() as u32 {
            assert_eq!(s.word_marginal(w), word_sum[w as usize]);
        }
        for c in 0..s.m() as u32 {
            assert_eq!(s.context_marginal(c), ctx_sum[c as usize]);
        }
        assert_eq!(s.total_pairs(), total);
        assert_eq!(
            s.total_pairs(),
            (0..s.n() as u32).map(|w| s.word_marginal(w)).sum::<u64>()
        );
    }

    #[test]
    fn palindrome_pair_counts_are_symmetric() {
        let tokens = toks("a b c b a");
        let v = Vocabulary::build(&tokens, 0);
        let s = CooccurrenceStats::count(&tokens, &v, 2);
        for w in 0..s.n() as u32 {
            for c in 0..s.m() as u32 {
                assert_eq!(s.pair_count(w, c), s.pair_count(c, w));
            }
        }
    }

    #[test]
    fn stats_file_round_trips_exactly() {
        let tokens = toks("a b c a b a c b a d d d");
        let v = Vocabulary::build(&tokens, 1);
        let s = CooccurrenceStats::count(&tokens, &v, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.txt");
        save_stats(&path, &v, &s).unwrap();
        let (v2, s2) = load_stats(&path).unwrap();
        assert_eq!(v.tokens(), v2.tokens());
        assert_eq!(v.min_count(), v2.min_count());
        assert_eq!(s.total_pairs(), s2.total_pairs());
        assert_eq!(s.window(), s2.window());
        for w in 0..s.n() as u32 {
            assert_eq!(v.count(w), v2.count(w));
            for c in 0..s.m() as u32 {
                assert_eq!(s.pair_count(w, c), s2.pair_count(w, c));
            }
        }
    }

    #[test]
    fn load_rejects_corrupt_total() {
        let tokens = toks("a b a b a b");
        let v = Vocabulary::build(&tokens, 1);
        let s = CooccurrenceStats::count(&tokens, &v, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.txt");
        save_stats(&path, &v, &s).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let corrupted = text.replacen(&format!(" {}", s.total_pairs()), " 999", 1);
        std::fs::write(&path, corrupted).unwrap();
        let err = load_stats(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
    }

    proptest! {
        #[test]
        fn counting_is_deterministic_and_consistent(
            raw in proptest::collection::vec(0u8..6, 0..120),
            window in 1u32..6,
        ) {
            let tokens: Vec<String> = raw.iter().map(|i| format!("w{i}")).collect();
            let v = Vocabulary::build(&tokens, 0);
            let s1 = CooccurrenceStats::count(&tokens, &v, window);
            let s2 = CooccurrenceStats::count(&tokens, &v, window);
            prop_assert_eq!(s1.total_pairs(), s2.total_pairs());
            let mut recomputed = vec![0u64; s1.m()];
            let mut total = 0u64;
            for w in 0..s1.n() {
                prop_assert_eq!(s1.row(w), s2.row(w));
                for &(c, k) in s1.row(w) {
                    recomputed[c as usize] += k;
                    total += k;
                }
            }
            prop_assert_eq!(total, s1.total_pairs());
            for c in 0..s1.m() as u32 {
                prop_assert_eq!(recomputed[c as usize], s1.context_marginal(c));
            }
            // V_W = V_C, so the two marginal totals agree.
            let w_total: u64 = (0..s1.n() as u32).map(|w| s1.word_marginal(w)).sum();
            let c_total: u64 = (0..s1.m() as u32).map(|c| s1.context_marginal(c)).sum();
            prop_assert_eq!(w_total, c_total);
        }
    }
}
