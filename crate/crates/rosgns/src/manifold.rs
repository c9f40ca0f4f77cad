//! Rank-d manifold points in factored form `X = U S Vᵀ` and the
//! projector-splitting retraction that drives training.
//!
//! A retraction step never materializes the shifted matrix
//! `A = X + λ·∇F` on its own: the two QR factorizations work on
//! `A·V = U·S + λ(∇F·V)` and `Aᵀ·U₁`, which is one step of a block power
//! iteration toward the truncated SVD of `A`. The factorization is unique
//! only up to orthogonal transforms, so tests and callers should compare
//! represented products, not factors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::sgns::{self, SgnsConfig};

/// A point on the rank-d manifold, stored as `U S Vᵀ` with orthonormal
/// `U` (n×d) and `V` (m×d). `S` (d×d) is general, not necessarily
/// diagonal: the two-QR retraction produces triangular cores, and `S` is
/// only diagonalized when embeddings are extracted.
#[derive(Debug, Clone)]
pub struct LowRankFactors {
    u: DMatrix<f64>,
    s: DMatrix<f64>,
    v: DMatrix<f64>,
}

/// QR with the R diagonal forced non-negative, so factor signs are
/// reproducible across runs.
fn qr_nonneg(a: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (mut q, mut r) = a.qr().unpack();
    for j in 0..r.nrows().min(r.ncols()) {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    (q, r)
}

/// Thin SVD with singular values explicitly sorted in descending order
/// (ties keep their original relative position).
pub(crate) fn svd_sorted(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("SVD requested U");
    let vt = svd.v_t.expect("SVD requested Vᵀ");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));

    let r = order.len();
    let mut u_sorted = DMatrix::zeros(u.nrows(), r);
    let mut v_sorted = DMatrix::zeros(vt.ncols(), r);
    let mut s_sorted = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.column_mut(dst).copy_from(&u.column(src));
        v_sorted.column_mut(dst).copy_from(&vt.row(src).transpose());
        s_sorted.push(sigma[src]);
    }
    (u_sorted, s_sorted, v_sorted)
}

fn check_finite(name: &str, a: &DMatrix<f64>) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} contains non-finite entries"
        )));
    }
    Ok(())
}

impl LowRankFactors {
    /// Factors the product `W0·C0ᵀ` without forming it densely: QR-factor
    /// both inputs and take the SVD of the small d×d core. `S` comes out
    /// diagonal, non-negative, descending.
    pub fn from_product(w0: &DMatrix<f64>, c0: &DMatrix<f64>) -> Result<LowRankFactors> {
        let (n, d) = w0.shape();
        let (m, d2) = c0.shape();
        if d != d2 {
            return Err(Error::DimensionMismatch(format!(
                "factor widths differ: {d} vs {d2}"
            )));
        }
        if d == 0 || d > n.min(m) {
            return Err(Error::InvalidParameter(format!(
                "rank d = {d} must satisfy 1 <= d <= min({n}, {m})"
            )));
        }
        check_finite("W0", w0)?;
        check_finite("C0", c0)?;
        let (qw, rw) = qr_nonneg(w0.clone());
        let (qc, rc) = qr_nonneg(c0.clone());
        let core = &rw * rc.transpose();
        let (cu, sigma, cv) = svd_sorted(&core);
        if sigma[0] == 0.0 || sigma[d - 1] < 1e-12 * sigma[0] {
            log::warn!(
                "initial point is rank-deficient (singular values {:.3e}..{:.3e}); \
                 the block power step degrades near singular S",
                sigma[d - 1],
                sigma[0]
            );
        }
        Ok(LowRankFactors {
            u: &qw * cu,
            s: DMatrix::from_diagonal(&DVector::from_vec(sigma)),
            v: &qc * cv,
        })
    }

    /// Random orthonormal factors with `S = I`, seeded for reproducibility.
    pub fn random(n: usize, m: usize, d: usize, seed: u64) -> Result<LowRankFactors> {
        if d == 0 || d > n.min(m) {
            return Err(Error::InvalidParameter(format!(
                "rank d = {d} must satisfy 1 <= d <= min({n}, {m})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = |rows: usize| {
            let mut a = DMatrix::zeros(rows, d);
            for i in 0..rows {
                for j in 0..d {
                    a[(i, j)] = rng.gen_range(-1.0..1.0);
                }
            }
            qr_nonneg(a).0
        };
        let u = sample(n);
        let v = sample(m);
        Ok(LowRankFactors {
            u,
            s: DMatrix::identity(d, d),
            v,
        })
    }

    /// (n, m, d)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.u.nrows(), self.v.nrows(), self.u.ncols())
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// The represented matrix `U S Vᵀ`, materialized densely.
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * &self.s * self.v.transpose()
    }

    /// Frobenius norm of the represented product; equals ‖S‖_F because the
    /// outer factors are orthonormal.
    pub fn product_norm(&self) -> f64 {
        self.s.norm()
    }

    /// Rescales `S` so the represented product has the given Frobenius
    /// norm. No-op on a zero point.
    pub fn rescale_product_norm(&mut self, target: f64) {
        let current = self.product_norm();
        if current > 0.0 {
            self.s *= target / current;
        }
    }

    /// `(‖UᵀU − I‖_F, ‖VᵀV − I‖_F)` — both stay at round-off level because
    /// every retraction re-orthonormalizes through QR.
    pub fn orthonormality_error(&self) -> (f64, f64) {
        let d = self.u.ncols();
        let eye = DMatrix::<f64>::identity(d, d);
        (
            (self.u.transpose() * &self.u - &eye).norm(),
            (self.v.transpose() * &self.v - &eye).norm(),
        )
    }

    /// One projector-splitting retraction of `X + step·grad` back onto the
    /// manifold:
    ///
    /// 1. `U₁, _ ← QR(A·V)` with `A·V = U S + step·(grad·V)`
    /// 2. `V₁, S₁ᵀ ← QR(Aᵀ·U₁)` with `Aᵀ·U₁ = V Sᵀ(Uᵀ U₁) + step·(gradᵀ U₁)`
    pub fn retract_step(&self, grad: &DMatrix<f64>, step: f64) -> Result<LowRankFactors> {
        let (n, m, _d) = self.dims();
        if grad.nrows() != n || grad.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "gradient is {}x{} but point is {n}x{m}",
                grad.nrows(),
                grad.ncols()
            )));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive and finite, got {step}"
            )));
        }
        let av = &self.u * &self.s + step * (grad * &self.v);
        let (u1, _) = qr_nonneg(av);
        let atu =
            &self.v * (self.s.transpose() * (self.u.transpose() * &u1)) + step * (grad.transpose() * &u1);
        let (v1, r) = qr_nonneg(atu);
        let diag: Vec<f64> = (0..r.nrows()).map(|j| r[(j, j)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0f64, f64::max);
        if dmax == 0.0 || diag.iter().any(|&v| v < 1e-12 * dmax) {
            log::warn!("retraction produced a (near-)singular core S; the point may have collapsed below rank d");
        }
        Ok(LowRankFactors {
            u: u1,
            s: r.transpose(),
            v: v1,
        })
    }

    const FACTORS_MAGIC: &'static str = "rosgns-factors 1";

    /// Writes the factors to a checkpoint file. Floats are printed in
    /// shortest round-trip form, so a reload is bit-exact.
    pub fn save(&self, path: impl AsRef<Path>, iteration: u64) -> Result<()> {
        let path = path.as_ref();
        let (n, m, d) = self.dims();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut emit = |s: String| out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
        emit(format!("{}\n", Self::FACTORS_MAGIC))?;
        emit(format!("{n} {m} {d} {iteration}\n"))?;
        for (rows, mat) in [(n, &self.u), (d, &self.s), (m, &self.v)] {
            for i in 0..rows {
                let line: Vec<String> = (0..d).map(|j| format!("{}", mat[(i, j)])).collect();
                emit(format!("{}\n", line.join(" ")))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Loads a checkpoint written by [`save`](Self::save); returns the
    /// factors and the stored iteration number.
    pub fn load(path: impl AsRef<Path>) -> Result<(LowRankFactors, u64)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::parse(path, i + 1, e.to_string())),
                None => Err(Error::parse(path, 0, format!("unexpected end of file, expected {what}"))),
            }
        };
        let (line_no, magic) = next("magic line")?;
        if magic.trim() != Self::FACTORS_MAGIC {
            return Err(Error::parse(path, line_no, format!("bad magic {magic:?}")));
        }
        let (line_no, header) = next("header")?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::parse(path, line_no, format!("bad header field {s:?}"))))
            .collect::<Result<_>>()?;
        if fields.len() != 4 {
            return Err(Error::parse(path, line_no, "header needs n m d iteration"));
        }
        let (n, m, d, iteration) = (fields[0], fields[1], fields[2], fields[3] as u64);
        let mut read_matrix = |rows: usize| -> Result<DMatrix<f64>> {
            let mut mat = DMatrix::zeros(rows, d);
            for i in 0..rows {
                let (line_no, line) = next("matrix row")?;
                let values: Vec<f64> = line
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| Error::parse(path, line_no, format!("bad float {s:?}"))))
                    .collect::<Result<_>>()?;
                if values.len() != d {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("expected {d} values, found {}", values.len()),
                    ));
                }
                for (j, v) in values.into_iter().enumerate() {
                    mat[(i, j)] = v;
                }
            }
            Ok(mat)
        };
        let u = read_matrix(n)?;
        let s = read_matrix(d)?;
        let v = read_matrix(m)?;
        Ok((LowRankFactors { u, s, v }, iteration))
    }
}

/// Truncated SVD of `a`: the best rank-d approximation in Frobenius norm,
/// with diagonal descending `S`.
pub fn retract_svd(a: &DMatrix<f64>, d: usize) -> Result<LowRankFactors> {
    if d == 0 || d > a.nrows().min(a.ncols()) {
        return Err(Error::InvalidParameter(format!(
            "rank d = {d} must satisfy 1 <= d <= min({}, {})",
            a.nrows(),
            a.ncols()
        )));
    }
    let (u, sigma, v) = svd_sorted(a);
    Ok(LowRankFactors {
        u: u.columns(0, d).into_owned(),
        s: DMatrix::from_diagonal(&DVector::from_vec(sigma[..d].to_vec())),
        v: v.columns(0, d).into_owned(),
    })
}

/// Outcome of a training run: the final manifold point plus the objective
/// value at the initial point and after every iteration.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub factors: LowRankFactors,
    pub trace: Vec<f64>,
}

impl TrainResult {
    /// Emits the objective trace as `iteration,objective` CSV.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,objective")?;
        for (i, f) in self.trace.iter().enumerate() {
            writeln!(out, "{i},{f}")?;
        }
        Ok(())
    }
}

/// Runs `config.iterations` projector-splitting steps from `init`,
/// recording the objective at the initial point and after each iteration.
pub fn train(
    stats: &CooccurrenceStats,
    config: &SgnsConfig,
    init: LowRankFactors,
) -> Result<TrainResult> {
    config.validate()?;
    if stats.total_pairs() == 0 {
        return Err(Error::DegenerateCorpus);
    }
    let (n, m, d) = init.dims();
    if n != stats.n() || m != stats.m() {
        return Err(Error::DimensionMismatch(format!(
            "initial point is {n}x{m} but statistics are {}x{}",
            stats.n(),
            stats.m()
        )));
    }
    if d != config.dimension {
        return Err(Error::DimensionMismatch(format!(
            "initial point has rank {d} but the configuration asks for {}",
            config.dimension
        )));
    }
    if config.dimension > n.min(m) {
        return Err(Error::InvalidParameter(format!(
            "dimension {} exceeds min(n, m) = {}",
            config.dimension,
            n.min(m)
        )));
    }

    let k = config.negative_samples;
    let mut factors = init;
    let mut score = factors.to_dense();
    let mut trace = Vec::with_capacity(config.iterations + 1);
    let f0 = sgns::objective(&score, stats, k)?;
    if !f0.is_finite() {
        return Err(Error::NumericalAbort { iteration: 0 });
    }
    trace.push(f0);

    for iteration in 1..=config.iterations {
        let grad = sgns::gradient(&score, stats, k)?;
        factors = factors.retract_step(&grad, config.step_size)?;
        score = factors.to_dense();
        let f = sgns::objective(&score, stats, k)?;
        if !f.is_finite() {
            return Err(Error::NumericalAbort { iteration });
        }
        trace.push(f);
    }
    Ok(TrainResult { factors, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sgns::InitMode;
    use approx::assert_relative_eq;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_matrix(n: usize, m: usize, state: &mut u64) -> DMatrix<f64> {
        DMatrix::from_fn(n, m, |_, _| lcg(state))
    }

    #[test]
    fn from_product_unit_outer_product() {
        let e1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let f = LowRankFactors::from_product(&e1, &e1).unwrap();
        assert_relative_eq!(f.s()[(0, 0)], 1.0, epsilon = 1e-12);
        let dense = f.to_dense();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(0, 0)] = 1.0;
        assert_relative_eq!(dense, expected, epsilon = 1e-12);
    }

    #[test]
    fn from_product_matches_dense_product() {
        let mut state = 11u64;
        let w0 = random_matrix(6, 3, &mut state);
        let c0 = random_matrix(5, 3, &mut state);
        let f = LowRankFactors::from_product(&w0, &c0).unwrap();
        let dense = &w0 * c0.transpose();
        assert!((f.to_dense() - &dense).norm() <= 1e-10 * dense.norm());
        let (eu, ev) = f.orthonormality_error();
        assert!(eu < 1e-12 && ev < 1e-12);
        // S diagonal, non-negative, descending.
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(f.s()[(i, j)].abs() < 1e-12);
                }
            }
        }
        assert!(f.s()[(0, 0)] >= f.s()[(1, 1)] && f.s()[(1, 1)] >= f.s()[(2, 2)]);
        assert!(f.s()[(2, 2)] >= 0.0);
    }

    #[test]
    fn from_product_accepts_zero_factors() {
        let w0 = DMatrix::zeros(4, 2);
        let c0 = DMatrix::zeros(5, 2);
        let f = LowRankFactors::from_product(&w0, &c0).unwrap();
        assert_eq!(f.to_dense(), DMatrix::zeros(4, 5));
        let (eu, ev) = f.orthonormality_error();
        assert!(eu < 1e-12 && ev < 1e-12, "orthonormality errors {eu} {ev}");
    }

    #[test]
    fn retract_step_tiny_step_keeps_point() {
        let mut state = 5u64;
        let f = LowRankFactors::from_product(
            &random_matrix(7, 3, &mut state),
            &random_matrix(6, 3, &mut state),
        )
        .unwrap();
        let grad = random_matrix(7, 6, &mut state);
        let before = f.to_dense();
        let after = f.retract_step(&grad, 1e-30).unwrap().to_dense();
        assert!((after - &before).norm() <= 1e-10 * before.norm().max(1.0));
    }

    #[test]
    fn retract_step_zero_gradient_reproduces_product() {
        let mut state = 17u64;
        let f = LowRankFactors::from_product(
            &random_matrix(8, 4, &mut state),
            &random_matrix(7, 4, &mut state),
        )
        .unwrap();
        let grad = DMatrix::zeros(8, 7);
        let after = f.retract_step(&grad, 0.5).unwrap();
        assert!((after.to_dense() - f.to_dense()).norm() <= 1e-12 * f.product_norm());
        let (eu, ev) = after.orthonormality_error();
        assert!(eu < 1e-12 && ev < 1e-12);
    }

    #[test]
    fn retract_step_recovers_exact_rank_d_target() {
        let mut state = 23u64;
        let x = LowRankFactors::from_product(
            &random_matrix(8, 3, &mut state),
            &random_matrix(7, 3, &mut state),
        )
        .unwrap();
        let target = &random_matrix(8, 3, &mut state) * random_matrix(7, 3, &mut state).transpose();
        let step = 0.37;
        let grad = (&target - x.to_dense()) / step;
        let after = x.retract_step(&grad, step).unwrap();
        assert!((after.to_dense() - &target).norm() <= 1e-9 * target.norm());
    }

    #[test]
    fn retract_step_matches_dense_two_qr_oracle() {
        let mut state = 31u64;
        let x = LowRankFactors::from_product(
            &random_matrix(9, 4, &mut state),
            &random_matrix(8, 4, &mut state),
        )
        .unwrap();
        let grad = random_matrix(9, 8, &mut state);
        let step = 0.05;
        let fast = x.retract_step(&grad, step).unwrap().to_dense();

        // Oracle: materialize A and run the two full QR factorizations.
        let a = x.to_dense() + step * &grad;
        let (u1, _) = qr_nonneg(&a * x.v());
        let (v1, r) = qr_nonneg(a.transpose() * &u1);
        let oracle = &u1 * r.transpose() * v1.transpose();
        assert!((fast - oracle).norm() <= 1e-10);
    }

    #[test]
    fn retract_step_rejects_bad_step_and_shape() {
        let f = LowRankFactors::random(4, 4, 2, 1).unwrap();
        let grad = DMatrix::zeros(4, 4);
        assert!(matches!(
            f.retract_step(&grad, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            f.retract_step(&grad, -1.0),
            Err(Error::InvalidParameter(_))
        ));
        let wrong = DMatrix::zeros(3, 4);
        assert!(matches!(
            f.retract_step(&wrong, 0.1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn retract_svd_truncates_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let f = retract_svd(&a, 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert_relative_eq!(f.to_dense(), expected, epsilon = 1e-12);
        assert!(f.s()[(0, 0)] >= f.s()[(1, 1)]);
    }

    #[test]
    fn retract_svd_of_exact_rank_matrix_is_identity() {
        let mut state = 41u64;
        let a = &random_matrix(10, 3, &mut state) * random_matrix(8, 3, &mut state).transpose();
        let f = retract_svd(&a, 3).unwrap();
        assert!((f.to_dense() - &a).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn retract_svd_beats_random_candidates() {
        let mut state = 43u64;
        let a = random_matrix(10, 8, &mut state);
        let d = 4;
        let best = retract_svd(&a, d).unwrap();
        let best_err = (&a - best.to_dense()).norm();
        for _ in 0..100 {
            let b = &random_matrix(10, d, &mut state) * random_matrix(8, d, &mut state).transpose();
            let b = &b * (a.norm() / b.norm());
            assert!((&a - b).norm() > best_err);
        }
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let f = LowRankFactors::random(6, 5, 3, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("factors.txt");
        f.save(&path, 12).unwrap();
        let (g, iteration) = LowRankFactors::load(&path).unwrap();
        assert_eq!(iteration, 12);
        assert_eq!(f.u(), g.u());
        assert_eq!(f.s(), g.s());
        assert_eq!(f.v(), g.v());
    }

    fn tiny_stats() -> CooccurrenceStats {
        CooccurrenceStats::from_pair_counts(
            4,
            4,
            1,
            &[
                (0, 1, 6),
                (1, 0, 6),
                (1, 2, 3),
                (2, 1, 3),
                (2, 3, 2),
                (3, 2, 2),
                (0, 3, 1),
                (3, 0, 1),
            ],
        )
        .unwrap()
    }

    fn config(d: usize, iters: usize) -> SgnsConfig {
        SgnsConfig {
            dimension: d,
            negative_samples: 2,
            step_size: 1e-2,
            iterations: iters,
            init_mode: InitMode::ProvidedFactors,
        }
    }

    #[test]
    fn train_zero_iterations_returns_init() {
        let stats = tiny_stats();
        let init = LowRankFactors::random(4, 4, 2, 7).unwrap();
        let before = init.to_dense();
        let result = train(&stats, &config(2, 0), init).unwrap();
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.factors.to_dense(), before);
    }

    #[test]
    fn train_one_iteration_matches_manual_composition() {
        let stats = tiny_stats();
        let cfg = config(2, 1);
        let init = LowRankFactors::random(4, 4, 2, 8).unwrap();

        let x0 = init.to_dense();
        let g = sgns::gradient(&x0, &stats, cfg.negative_samples).unwrap();
        let manual = init.retract_step(&g, cfg.step_size).unwrap();

        let result = train(&stats, &cfg, init).unwrap();
        assert_eq!(result.trace.len(), 2);
        assert_eq!(result.factors.to_dense(), manual.to_dense());
        assert_eq!(
            result.trace[1],
            sgns::objective(&manual.to_dense(), &stats, cfg.negative_samples).unwrap()
        );
    }

    #[test]
    fn train_rejects_empty_stats() {
        let stats = CooccurrenceStats::from_pair_counts(4, 4, 1, &[]).unwrap();
        let init = LowRankFactors::random(4, 4, 2, 7).unwrap();
        assert!(matches!(
            train(&stats, &config(2, 1), init),
            Err(Error::DegenerateCorpus)
        ));
    }

    #[test]
    fn train_aborts_on_numerical_blowup() {
        let stats = tiny_stats();
        let mut cfg = config(2, 3);
        cfg.step_size = 1e300;
        let init = LowRankFactors::random(4, 4, 2, 7).unwrap();
        match train(&stats, &cfg, init) {
            Err(Error::NumericalAbort { iteration }) => assert!(iteration >= 1),
            other => panic!("expected numerical abort, got {other:?}"),
        }
    }

    #[test]
    fn orthonormality_survives_repeated_retractions() {
        let mut state = 53u64;
        let mut point = LowRankFactors::random(12, 10, 3, 3).unwrap();
        for _ in 0..100 {
            let grad = random_matrix(12, 10, &mut state);
            point = point.retract_step(&grad, 0.1).unwrap();
        }
        let (eu, ev) = point.orthonormality_error();
        assert!(eu <= 1e-8 && ev <= 1e-8, "orthonormality drifted: {eu} {ev}");
    }

    #[test]
    fn trace_csv_format() {
        let result = TrainResult {
            factors: LowRankFactors::random(3, 3, 1, 0).unwrap(),
            trace: vec![-1.5, -1.0],
        };
        let mut buf = Vec::new();
        result.write_trace_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iteration,objective\n0,-1.5\n1,-1\n"
        );
    }
}
