//! The skip-gram negative-sampling objective as a function of the score
//! matrix `X`, together with its Euclidean gradient.
//!
//! Every word-context cell contributes
//! `f(x) = a·log σ(x) + b·log σ(−x)` with `a = #(w,c)` and
//! `b = k·#(w)·#(c)/|D|`; the objective sums this over all of `V_W × V_C`,
//! so unobserved pairs still contribute through the `b` term. The `b`
//! weights are rank-1 in the marginals and are produced on the fly instead
//! of being materialized.

use nalgebra::DMatrix;

use crate::corpus::CooccurrenceStats;
use crate::error::{Error, Result};

/// Hyperparameters of the low-rank SGNS problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    /// Embedding dimension d (the rank constraint).
    pub dimension: usize,
    /// Negative samples per positive pair, k.
    pub negative_samples: u32,
    /// Retraction step size λ (learning rate for the SGD baseline).
    pub step_size: f64,
    /// Number of optimization iterations K (epochs for the SGD baseline).
    pub iterations: usize,
    /// How the optimizer is initialized.
    pub init_mode: InitMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Truncated SVD of the SPPMI matrix (the default).
    SvdSppmi,
    /// Random orthonormal factors.
    RandomFactors,
    /// Factors supplied by the caller (e.g. a checkpoint).
    ProvidedFactors,
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if self.negative_samples == 0 {
            return Err(Error::InvalidParameter(
                "negative sample count must be >= 1".into(),
            ));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be a positive finite number, got {}",
                self.step_size
            )));
        }
        Ok(())
    }

    /// Shipped step-size/iteration defaults per dimension.
    pub fn defaults_for_dimension(dimension: usize) -> (f64, usize) {
        match dimension {
            200 => (5e-5, 8),
            500 => (1e-4, 2),
            _ => (5e-5, 7),
        }
    }
}

/// Numerically stable logistic function. Never overflows and stays strictly
/// inside (0, 1) for |x| up to well past 30.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log σ(x), computed without overflow or underflow across the whole double
/// range (asymptotically equals x as x → −∞).
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Per-cell loss `a·log σ(x) + b·log σ(−x)`.
pub fn pair_loss(a: f64, b: f64, x: f64) -> f64 {
    a * log_sigmoid(x) + b * log_sigmoid(-x)
}

/// Compensated (Kahan) accumulator, so that objective values near 1e9 keep
/// enough trailing precision for cross-method comparisons.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum
    }
}

fn check_dims(x: &DMatrix<f64>, stats: &CooccurrenceStats) -> Result<()> {
    if x.nrows() != stats.n() || x.ncols() != stats.m() {
        return Err(Error::DimensionMismatch(format!(
            "score matrix is {}x{} but statistics are {}x{}",
            x.nrows(),
            x.ncols(),
            stats.n(),
            stats.m()
        )));
    }
    Ok(())
}

/// Kahan sum of one objective row; rows are the canonical summation unit so
/// the sequential and parallel paths produce identical bits.
fn objective_row(x: &DMatrix<f64>, stats: &CooccurrenceStats, k: u32, w: usize) -> f64 {
    let b_row = k as f64 * stats.word_marginal(w as u32) as f64 / stats.total_pairs() as f64;
    let row = stats.row(w);
    let mut next = 0usize;
    let mut acc = KahanSum::default();
    for c in 0..stats.m() {
        let a = if next < row.len() && row[next].0 as usize == c {
            let count = row[next].1;
            next += 1;
            count as f64
        } else {
            0.0
        };
        let b = b_row * stats.context_marginal(c as u32) as f64;
        if a == 0.0 && b == 0.0 {
            continue;
        }
        acc.add(pair_loss(a, b, x[(w, c)]));
    }
    acc.value()
}

/// The SGNS objective F(X) summed over all of `V_W × V_C`.
///
/// Summation is row-major with compensated accumulation, and row sums are
/// combined in index order, so the result does not depend on thread count.
pub fn objective(x: &DMatrix<f64>, stats: &CooccurrenceStats, k: u32) -> Result<f64> {
    check_dims(x, stats)?;
    if stats.total_pairs() == 0 {
        return Err(Error::DegenerateCorpus);
    }
    let row_sums = compute_rows(stats.n(), |w| objective_row(x, stats, k, w));
    let mut acc = KahanSum::default();
    for s in row_sums {
        acc.add(s);
    }
    Ok(acc.value())
}

fn gradient_col(
    x_col: &[f64],
    out_col: &mut [f64],
    stats: &CooccurrenceStats,
    k: u32,
    c: usize,
) {
    let b_col = k as f64 * stats.context_marginal(c as u32) as f64 / stats.total_pairs() as f64;
    let col = stats.col(c);
    let mut next = 0usize;
    for w in 0..stats.n() {
        let a = if next < col.len() && col[next].0 as usize == w {
            let count = col[next].1;
            next += 1;
            count as f64
        } else {
            0.0
        };
        let b = b_col * stats.word_marginal(w as u32) as f64;
        let xv = x_col[w];
        out_col[w] = a * sigmoid(-xv) - b * sigmoid(xv);
    }
}

/// Euclidean gradient of the objective:
/// `(∇F)_{w,c} = #(w,c)·σ(−x_{w,c}) − (k·#(w)·#(c)/|D|)·σ(x_{w,c})`.
pub fn gradient(x: &DMatrix<f64>, stats: &CooccurrenceStats, k: u32) -> Result<DMatrix<f64>> {
    check_dims(x, stats)?;
    if stats.total_pairs() == 0 {
        return Err(Error::DegenerateCorpus);
    }
    let n = stats.n();
    let m = stats.m();
    if n.checked_mul(m).map_or(true, |cells| cells > 128_000_000) {
        log::warn!(
            "dense {n}x{m} gradient allocates {:.1} GiB; this toolkit targets desk-scale vocabularies",
            (n as f64 * m as f64 * 8.0) / (1u64 << 30) as f64
        );
    }
    let mut grad = DMatrix::zeros(n, m);
    compute_cols(x.as_slice(), grad.as_mut_slice(), n, |c, x_col, out_col| {
        gradient_col(x_col, out_col, stats, k, c)
    });
    Ok(grad)
}

#[cfg(feature = "parallel")]
fn compute_rows<F: Fn(usize) -> f64 + Send + Sync>(n: usize, row: F) -> Vec<f64> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(row).collect()
}

#[cfg(not(feature = "parallel"))]
fn compute_rows<F: Fn(usize) -> f64>(n: usize, row: F) -> Vec<f64> {
    (0..n).map(row).collect()
}

#[cfg(feature = "parallel")]
fn compute_cols<F: Fn(usize, &[f64], &mut [f64]) + Send + Sync>(
    x: &[f64],
    out: &mut [f64],
    n: usize,
    col: F,
) {
    use rayon::prelude::*;
    out.par_chunks_mut(n)
        .zip(x.par_chunks(n))
        .enumerate()
        .for_each(|(c, (out_col, x_col))| col(c, x_col, out_col));
}

#[cfg(not(feature = "parallel"))]
fn compute_cols<F: Fn(usize, &[f64], &mut [f64])>(x: &[f64], out: &mut [f64], n: usize, col: F) {
    for (c, (out_col, x_col)) in out.chunks_mut(n).zip(x.chunks(n)).enumerate() {
        col(c, x_col, out_col);
    }
}
