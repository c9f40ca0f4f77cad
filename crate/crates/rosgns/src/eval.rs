//! Word-similarity evaluation: rank correlation between human similarity
//! judgements and embedding cosines.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embedding::{cosine_similarity, EmbeddingSet};
use crate::error::{Error, Result};

/// A list of `(word, word, human score)` judgements.
#[derive(Debug, Clone)]
pub struct SimilarityDataset {
    pub name: String,
    pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    /// Parses `word1 word2 score` lines separated by whitespace, tabs or
    /// commas. One header line is tolerated; tokens are lowercased to
    /// match corpus tokenization; duplicate unordered pairs are rejected.
    pub fn load(path: impl AsRef<Path>, name: impl Into<String>) -> Result<SimilarityDataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed
                .split(|c: char| c == ',' || c == '\t' || c == ' ')
                .filter(|f| !f.is_empty())
                .collect();
            let parsed = (fields.len() == 3)
                .then(|| fields[2].parse::<f64>().ok())
                .flatten();
            match parsed {
                Some(score) if score.is_finite() => {
                    let a = fields[0].to_lowercase();
                    let b = fields[1].to_lowercase();
                    let key = if a <= b {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    };
                    if !seen.insert(key) {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("duplicate pair ({a}, {b})"),
                        ));
                    }
                    pairs.push((a, b, score));
                }
                _ if line_no == 1 => continue, // tolerated header
                _ => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("expected `word1 word2 score`, found {trimmed:?}"),
                    ))
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::parse(path, 0, "dataset contains no pairs"));
        }
        Ok(SimilarityDataset {
            name: name.into(),
            pairs,
        })
    }

    pub fn from_pairs(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> SimilarityDataset {
        SimilarityDataset {
            name: name.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String, f64)] {
        &self.pairs
    }
}

/// One evaluation row: the correlation plus out-of-vocabulary accounting.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub dataset: String,
    pub spearman: f64,
    pub pairs_used: usize,
    pub pairs_total: usize,
}

/// Average ranks (1-based), with ties sharing the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start..=end are tied; mean of (start+1)..=(end+1)
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = rank;
        }
        start = end + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation: average ranks for ties, then Pearson over
/// the rank vectors.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "rank lists have lengths {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation {
            reason: "need at least 2 observations".into(),
            pairs_used: xs.len(),
            pairs_total: xs.len(),
        });
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry).ok_or(Error::UndefinedCorrelation {
        reason: "zero rank variance".into(),
        pairs_used: xs.len(),
        pairs_total: xs.len(),
    })
}

/// Scores an embedding set against a dataset: cosine per in-vocabulary
/// pair, Spearman against the human scores. Pairs with any
/// out-of-vocabulary word are skipped and accounted for in the report.
pub fn evaluate(set: &EmbeddingSet, dataset: &SimilarityDataset) -> Result<EvalReport> {
    let mut cosines = Vec::new();
    let mut human = Vec::new();
    for (a, b, score) in dataset.pairs() {
        let (Some(ia), Some(ib)) = (set.index_of(a), set.index_of(b)) else {
            continue;
        };
        cosines.push(cosine_similarity(&set.vector(ia), &set.vector(ib)));
        human.push(*score);
    }
    let pairs_used = cosines.len();
    let pairs_total = dataset.len();
    if pairs_used < 2 {
        return Err(Error::UndefinedCorrelation {
            reason: "fewer than 2 in-vocabulary pairs".into(),
            pairs_used,
            pairs_total,
        });
    }
    let rho = spearman(&cosines, &human).map_err(|e| match e {
        Error::UndefinedCorrelation { reason, .. } => Error::UndefinedCorrelation {
            reason,
            pairs_used,
            pairs_total,
        },
        other => other,
    })?;
    Ok(EvalReport {
        dataset: dataset.name.clone(),
        spearman: rho,
        pairs_used,
        pairs_total,
    })
}
