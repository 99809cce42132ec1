//! Arnoldi iteration at machine or arbitrary precision: full
//! re-orthogonalization, break-off on invariant-subspace exploration,
//! QR diagonalization of the projected Hessenberg matrix, reliability
//! filtering by cross-run agreement, and decay-width sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rug::Float;

use crate::error::{Error, Result};
use crate::gmatrix::{ExecMode, LinearOp, StochasticMatrix};
use crate::linalg::{
    francis_qr, hessenberg_eigenvector, match_spectra, DMat, DenseMatrix, CT,
};
use crate::precision::Real;

/// Cross-run agreement threshold for flagging an eigenvalue reliable.
pub const RELIABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartVector {
    Uniform,
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArnoldiConfig {
    /// Maximum Krylov dimension (clamped to the operator dimension).
    pub n_a: usize,
    /// 52 selects the native f64 path; anything above runs on MPFR floats.
    pub precision_bits: u32,
    /// Break-off threshold for the subdiagonal coupling; `None` uses the
    /// default `2^(-p/2)`.
    pub breakoff_epsilon: Option<f64>,
    pub start: StartVector,
    pub exec: ExecMode,
}

impl Default for ArnoldiConfig {
    fn default() -> Self {
        ArnoldiConfig {
            n_a: 100,
            precision_bits: 52,
            breakoff_epsilon: None,
            start: StartVector::Uniform,
            exec: ExecMode::Deterministic,
        }
    }
}

impl ArnoldiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 {
            return Err(Error::InvalidConfig("Arnoldi dimension must be >= 1".into()));
        }
        if self.precision_bits < 52 {
            return Err(Error::InvalidConfig(
                "precision below 52 bits is not supported".into(),
            ));
        }
        if let Some(e) = self.breakoff_epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "break-off epsilon {e} outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition<T> {
    /// Square m x m upper Hessenberg projection.
    pub h: DMat<T>,
    /// Orthonormal Krylov basis, m vectors of the operator dimension.
    pub basis: Vec<Vec<T>>,
    /// Step at which the coupling fell below the break-off threshold.
    pub breakoff: Option<usize>,
    /// Coupling `h_{m+1,m}` at the final step.
    pub final_coupling: f64,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = a[0].of(0.0);
    for (x, y) in a.iter().zip(b) {
        acc += &(x.clone() * y);
    }
    acc
}

fn norm2<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

fn start_vector<T: Real>(n: usize, precision_bits: u32, start: StartVector) -> Vec<T> {
    match start {
        StartVector::Uniform => vec![T::seed(precision_bits, 1.0); n],
        StartVector::Random(seed) => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| T::seed(precision_bits, rng.gen_range(-1.0..1.0)))
                .collect()
        }
    }
}

/// Arnoldi factorization `A V_m = V_m H_m + h_{m+1,m} v_{m+1} e_m^T` with
/// modified Gram-Schmidt plus a full second orthogonalization pass at every
/// step. Stops at `n_A` or when the coupling drops below the break-off
/// threshold (an explored invariant subspace).
pub fn arnoldi_decompose<T: Real, L: LinearOp<T> + ?Sized>(
    op: &L,
    config: &ArnoldiConfig,
) -> Result<ArnoldiDecomposition<T>> {
    config.validate()?;
    let n = op.dim();
    let p = config.precision_bits;
    let m_max = config.n_a.min(n);
    let eps_break: T = match config.breakoff_epsilon {
        Some(e) => T::seed(p, e),
        None => T::seed(p, 1.0).exp2_of(-(p as i64) / 2),
    };

    let mut v0: Vec<T> = start_vector(n, p, config.start);
    let nrm = norm2(&v0);
    if nrm.is_zero() {
        return Err(Error::ZeroVector);
    }
    for x in v0.iter_mut() {
        *x /= &nrm;
    }

    let mut basis: Vec<Vec<T>> = vec![v0];
    // Column-major Hessenberg entries; column j holds h[0..=j+1][j].
    let mut h_cols: Vec<Vec<T>> = Vec::new();
    let mut breakoff = None;
    let mut final_coupling = T::seed(p, 0.0);

    for j in 0..m_max {
        let mut w = op.apply(&basis[j], config.exec)?;
        let mut col: Vec<T> = Vec::with_capacity(j + 2);
        for vi in basis.iter() {
            let hij = dot(vi, &w);
            for (wk, vk) in w.iter_mut().zip(vi) {
                let delta = hij.clone() * vk;
                *wk -= &delta;
            }
            col.push(hij);
        }
        // Full re-orthogonalization pass.
        for (i, vi) in basis.iter().enumerate() {
            let corr = dot(vi, &w);
            for (wk, vk) in w.iter_mut().zip(vi) {
                let delta = corr.clone() * vk;
                *wk -= &delta;
            }
            col[i] += &corr;
        }
        let beta = norm2(&w);
        final_coupling = beta.clone();
        let stop_break = beta < eps_break;
        col.push(beta.clone());
        h_cols.push(col);
        if stop_break {
            breakoff = Some(j + 1);
            break;
        }
        if j + 1 == m_max {
            break;
        }
        for x in w.iter_mut() {
            *x /= &beta;
        }
        basis.push(w);
    }

    let m = h_cols.len();
    let mut h = DMat::<T>::zeros(m, p);
    for (j, col) in h_cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            if i < m {
                h.set(i, j, v.clone());
            }
        }
    }
    Ok(ArnoldiDecomposition {
        h,
        basis,
        breakoff,
        final_coupling: final_coupling.to_f64(),
    })
}

/// Eigenvalues of an upper Hessenberg matrix via the shifted QR iteration
/// at the requested precision.
pub fn hessenberg_eigenvalues(h: &DenseMatrix, precision_bits: u32) -> Result<Vec<(f64, f64)>> {
    if !h.is_upper_hessenberg() {
        return Err(Error::InvalidConfig(
            "matrix is not upper Hessenberg".into(),
        ));
    }
    if precision_bits <= 52 {
        francis_qr(h.clone()).map(|v| v.into_iter().collect())
    } else {
        let hp: DMat<Float> = h.convert(precision_bits);
        Ok(francis_qr(hp)?
            .into_iter()
            .map(|(re, im)| (re.to_f64(), im.to_f64()))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Subspace,
    Core,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Origin::Subspace => write!(f, "subspace"),
            Origin::Core => write!(f, "core"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub re: f64,
    pub im: f64,
    pub origin: Origin,
    pub reliable: bool,
}

impl SpectrumEntry {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Sorted by descending modulus, ties by descending phase.
    pub eigenvalues: Vec<SpectrumEntry>,
    pub n_a: usize,
    pub precision_bits: u32,
    pub breakoff_index: Option<usize>,
    /// Krylov dimension actually reached.
    pub reduced_dimension: usize,
}

impl SpectrumResult {
    pub fn reliable_count(&self) -> usize {
        self.eigenvalues.iter().filter(|e| e.reliable).count()
    }

    pub fn reliable(&self) -> Vec<(f64, f64)> {
        self.eigenvalues
            .iter()
            .filter(|e| e.reliable)
            .map(|e| (e.re, e.im))
            .collect()
    }
}

fn eigs_of_run<T: Real, L: LinearOp<T> + ?Sized>(
    op: &L,
    config: &ArnoldiConfig,
) -> Result<(Vec<(f64, f64)>, Option<usize>, usize)> {
    let dec = arnoldi_decompose(op, config)?;
    let eigs: Vec<(f64, f64)> = francis_qr(dec.h)?
        .into_iter()
        .map(|(re, im)| (re.to_f64(), im.to_f64()))
        .collect();
    Ok((eigs, dec.breakoff, dec.basis.len()))
}

/// The comparison run must differ from the primary in its rounding
/// realization: a different start vector in deterministic mode, a different
/// shard count in parallel mode.
fn comparison_config(config: &ArnoldiConfig, comparison_seed: u64) -> ArnoldiConfig {
    let mut other = config.clone();
    match config.exec {
        ExecMode::Deterministic => {
            other.start = match config.start {
                StartVector::Uniform => StartVector::Random(comparison_seed),
                StartVector::Random(s) if s == comparison_seed => {
                    StartVector::Random(comparison_seed.wrapping_add(1))
                }
                StartVector::Random(_) => StartVector::Random(comparison_seed),
            };
        }
        ExecMode::Parallel { shards } => {
            other.exec = ExecMode::Parallel { shards: shards + 1 };
        }
    }
    other
}

/// Core-space spectrum with reliability flags: two Arnoldi runs with
/// different rounding realizations, eigenvalues matched one-to-one within
/// `1e-6`; unmatched values are retained but flagged unreliable.
pub fn reliable_spectrum<T: Real, L: LinearOp<T> + ?Sized>(
    op: &L,
    config: &ArnoldiConfig,
    comparison_seed: u64,
) -> Result<SpectrumResult> {
    let (eigs_a, breakoff, reduced) = eigs_of_run(op, config)?;
    let other = comparison_config(config, comparison_seed);
    let (eigs_b, _, _) = eigs_of_run(op, &other)?;
    let matched = match_spectra(&eigs_a, &eigs_b, RELIABILITY_TOL);
    let mut entries: Vec<SpectrumEntry> = eigs_a
        .iter()
        .zip(&matched)
        .map(|(&(re, im), m)| SpectrumEntry {
            re,
            im,
            origin: Origin::Core,
            reliable: m.is_some(),
        })
        .collect();
    sort_entries(&mut entries);
    Ok(SpectrumResult {
        eigenvalues: entries,
        n_a: config.n_a,
        precision_bits: config.precision_bits,
        breakoff_index: breakoff,
        reduced_dimension: reduced,
    })
}

/// Precision-dispatching wrapper for a column-stochastic matrix.
pub fn reliable_spectrum_s(
    matrix: &StochasticMatrix,
    config: &ArnoldiConfig,
    comparison_seed: u64,
) -> Result<SpectrumResult> {
    if config.precision_bits <= 52 {
        let op = matrix.realize::<f64>(52);
        reliable_spectrum(&op, config, comparison_seed)
    } else {
        let op = matrix.realize::<Float>(config.precision_bits);
        reliable_spectrum(&op, config, comparison_seed)
    }
}

fn sort_entries(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        b.modulus()
            .partial_cmp(&a.modulus())
            .unwrap()
            .then_with(|| {
                b.im.atan2(b.re)
                    .partial_cmp(&a.im.atan2(a.re))
                    .unwrap()
            })
    });
}

/// Merges exactly diagonalized subspace eigenvalues with a core-space
/// Arnoldi result into one tagged, sorted spectrum.
pub fn assemble_spectrum(
    subspace: &crate::subspaces::SubspaceSpectrum,
    core: &SpectrumResult,
) -> SpectrumResult {
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for (_, re, im) in subspace.flat() {
        entries.push(SpectrumEntry {
            re,
            im,
            origin: Origin::Subspace,
            reliable: true,
        });
    }
    entries.extend(core.eigenvalues.iter().cloned());
    sort_entries(&mut entries);
    SpectrumResult {
        eigenvalues: entries,
        n_a: core.n_a,
        precision_bits: core.precision_bits,
        breakoff_index: core.breakoff_index,
        reduced_dimension: core.reduced_dimension,
    }
}

/// Unit-normalized eigenvector for a computed eigenvalue.
#[derive(Debug, Clone)]
pub struct CoreEigenvector {
    pub lambda: (f64, f64),
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `|| S psi - lambda psi ||_2` measured on the returned vector.
    pub residual: f64,
}

impl CoreEigenvector {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| f64::hypot(*r, *i))
            .collect()
    }
}

/// Residual bound: `1e-8` at machine precision, scaling down with the
/// break-off epsilon at higher precisions.
pub fn eigenvector_residual_bound(precision_bits: u32) -> f64 {
    1e-8 * (-(precision_bits as f64 - 52.0) / 2.0).exp2()
}

/// Computes the eigenvector of `op` for the computed eigenvalue nearest
/// `lambda_target`: Ritz vector from the Arnoldi basis refined by complex
/// inverse iteration on the projected Hessenberg matrix.
pub fn core_eigenvector<T: Real, L: LinearOp<T> + ?Sized>(
    op: &L,
    lambda_target: (f64, f64),
    config: &ArnoldiConfig,
) -> Result<CoreEigenvector> {
    let dec = arnoldi_decompose(op, config)?;
    let m = dec.h.n();
    let p = config.precision_bits;
    let eigs = francis_qr(dec.h.clone())?;
    // The f64 target locates the eigenvalue; when a computed eigenvalue
    // matches it, that full-precision value becomes the shift. A target
    // matching nothing keeps its own value and the residual check fails.
    let mut best: Option<(f64, CT<T>)> = None;
    for (re, im) in &eigs {
        let d = (re.to_f64() - lambda_target.0).hypot(im.to_f64() - lambda_target.1);
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, CT::new(re.clone(), im.clone())));
        }
    }
    let lambda = match best {
        Some((d, refined)) if d <= RELIABILITY_TOL => refined,
        _ => CT::new(
            T::seed(p, lambda_target.0),
            T::seed(p, lambda_target.1),
        ),
    };
    let bound = eigenvector_residual_bound(p);

    let mut last_residual = f64::INFINITY;
    for sweeps in [3usize, 6, 12] {
        let y = hessenberg_eigenvector(&dec.h, &lambda, sweeps);
        // Lift through the basis: psi = V y.
        let n = op.dim();
        let zero = T::seed(p, 0.0);
        let mut psi_re = vec![zero.clone(); n];
        let mut psi_im = vec![zero.clone(); n];
        for (j, vj) in dec.basis.iter().enumerate().take(m) {
            for k in 0..n {
                let dr = y[j].re.clone() * &vj[k];
                let di = y[j].im.clone() * &vj[k];
                psi_re[k] += &dr;
                psi_im[k] += &di;
            }
        }
        // Normalize to unit sum of squared moduli.
        let mut nrm = dot(&psi_re, &psi_re);
        nrm += &dot(&psi_im, &psi_im);
        let nrm = nrm.sqrt();
        if nrm.is_zero() {
            continue;
        }
        for x in psi_re.iter_mut() {
            *x /= &nrm;
        }
        for x in psi_im.iter_mut() {
            *x /= &nrm;
        }
        // Residual || S psi - lambda psi || over both components.
        let s_re = op.apply(&psi_re, config.exec)?;
        let s_im = op.apply(&psi_im, config.exec)?;
        let mut acc = T::seed(p, 0.0);
        for k in 0..n {
            let rr = s_re[k].clone() - &(lambda.re.clone() * &psi_re[k]) + &(lambda.im.clone() * &psi_im[k]);
            let ri = s_im[k].clone() - &(lambda.re.clone() * &psi_im[k]) - &(lambda.im.clone() * &psi_re[k]);
            acc += &(rr.clone() * &rr);
            acc += &(ri.clone() * &ri);
        }
        let residual = acc.sqrt().to_f64();
        last_residual = residual;
        if residual <= bound {
            return Ok(CoreEigenvector {
                lambda: (lambda.re.to_f64(), lambda.im.to_f64()),
                re: psi_re.iter().map(Real::to_f64).collect(),
                im: psi_im.iter().map(Real::to_f64).collect(),
                residual,
            });
        }
    }
    Err(Error::NonConverged {
        iterations: 12,
        residual: last_residual,
    })
}

/// Precision-dispatching wrapper for a column-stochastic matrix.
pub fn core_eigenvector_s(
    matrix: &StochasticMatrix,
    lambda_target: (f64, f64),
    config: &ArnoldiConfig,
) -> Result<CoreEigenvector> {
    if config.precision_bits <= 52 {
        let op = matrix.realize::<f64>(52);
        core_eigenvector(&op, lambda_target, config)
    } else {
        let op = matrix.realize::<Float>(config.precision_bits);
        core_eigenvector(&op, lambda_target, config)
    }
}

/// `(level number j, gamma_j = -2 ln |lambda_j|)` over the reliable core
/// eigenvalues in descending-modulus order; exact zeros are skipped.
pub fn decay_widths(spectrum: &SpectrumResult) -> Vec<(usize, f64)> {
    spectrum
        .eigenvalues
        .iter()
        .filter(|e| e.reliable && e.origin == Origin::Core && e.modulus() > 0.0)
        .enumerate()
        .map(|(i, e)| (i + 1, -2.0 * e.modulus().ln()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmatrix::{Direction, RealizedMatrix};
    use crate::ingest::{aggregate, TransactionRecord};
    use crate::linalg::sort_spectrum;
    use crate::period::PeriodLabel;
    use crate::precision::epsilon;
    use rug::Rational;

    fn snapshot(edges: &[(u64, u64, i64)]) -> crate::ingest::NetworkSnapshot {
        let records: Vec<TransactionRecord> = edges
            .iter()
            .enumerate()
            .map(|(i, &(s, d, amt))| TransactionRecord {
                src: s,
                dst: d,
                time: i as i64,
                amount: Rational::from(amt),
            })
            .collect();
        aggregate(&records, PeriodLabel::FULL).unwrap()
    }

    fn two_cycle() -> RealizedMatrix<f64> {
        StochasticMatrix::build_s0(&snapshot(&[(0, 1, 1), (1, 0, 1)]), Direction::Forward)
            .realize(52)
    }

    /// Sparse chain operator with a defective (Jordan) structure.
    struct ChainOp {
        d: usize,
    }

    impl LinearOp<f64> for ChainOp {
        fn dim(&self) -> usize {
            self.d
        }
        fn apply(&self, v: &[f64], _mode: ExecMode) -> Result<Vec<f64>> {
            let mut out = vec![0.0; self.d];
            for i in 1..self.d {
                out[i] = v[i - 1];
            }
            Ok(out)
        }
    }

    #[test]
    fn single_node_decomposes_to_one() {
        let m = StochasticMatrix::build_s0(&snapshot(&[(7, 7, 3)]), Direction::Forward);
        let r: RealizedMatrix<f64> = m.realize(52);
        let dec = arnoldi_decompose(&r, &ArnoldiConfig::default()).unwrap();
        assert_eq!(dec.h.n(), 1);
        assert_eq!(*dec.h.at(0, 0), 1.0);
    }

    #[test]
    fn uniform_start_on_swap_breaks_off_immediately() {
        let r = two_cycle();
        let dec = arnoldi_decompose(&r, &ArnoldiConfig::default()).unwrap();
        // Uniform is the lambda=1 eigenvector: one step, H = [1].
        assert_eq!(dec.h.n(), 1);
        assert_eq!(dec.breakoff, Some(1));
        assert!((*dec.h.at(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skewed_start_spans_the_full_krylov_space() {
        // Start (1,0) on the swap matrix: m=2, H = [[0,1],[1,0]].
        struct Seeded;
        impl LinearOp<f64> for Seeded {
            fn dim(&self) -> usize {
                2
            }
            fn apply(&self, v: &[f64], _m: ExecMode) -> Result<Vec<f64>> {
                Ok(vec![v[1], v[0]])
            }
        }
        let cfg = ArnoldiConfig {
            start: StartVector::Random(99),
            n_a: 2,
            ..Default::default()
        };
        let dec = arnoldi_decompose(&Seeded, &cfg).unwrap();
        assert_eq!(dec.h.n(), 2);
        let mut eigs = francis_qr(dec.h).unwrap();
        sort_spectrum(&mut eigs);
        assert!((eigs[0].0 + 1.0).abs() < 1e-12 || (eigs[0].0 - 1.0).abs() < 1e-12);
        let moduli: Vec<f64> = eigs.iter().map(|e| e.0.hypot(e.1)).collect();
        assert!((moduli[0] - 1.0).abs() < 1e-12 && (moduli[1] - 1.0).abs() < 1e-12);
        let sum: f64 = eigs.iter().map(|e| e.0).sum();
        assert!(sum.abs() < 1e-12, "eigenvalues must be +1 and -1");
    }

    #[test]
    fn hessenberg_eigenvalues_guard_and_values() {
        let h = DenseMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.0, -0.25]], 52);
        let eigs = hessenberg_eigenvalues(&h, 52).unwrap();
        let mut res: Vec<f64> = eigs.iter().map(|e| e.0).collect();
        res.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((res[0] - 0.5).abs() < 1e-15 && (res[1] + 0.25).abs() < 1e-15);

        let not_hess = DenseMatrix::from_rows(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
            ],
            52,
        );
        assert!(hessenberg_eigenvalues(&not_hess, 52).is_err());
    }

    #[test]
    fn arnoldi_relation_and_orthonormality() {
        let snap = crate::netgen::generate(&crate::netgen::GeneratorConfig {
            seed: 11,
            target_nodes: 120,
            ..Default::default()
        })
        .unwrap();
        let snap = aggregate(&snap, PeriodLabel::FULL).unwrap();
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let r: RealizedMatrix<f64> = s.realize(52);
        let cfg = ArnoldiConfig {
            n_a: 40,
            start: StartVector::Random(5),
            ..Default::default()
        };
        let dec = arnoldi_decompose(&r, &cfg).unwrap();
        let m = dec.h.n();
        let p = 52u32;
        let tol = 10.0 * epsilon::<f64>(p) * m as f64;

        // Orthonormality: max |V^T V - I|.
        let mut max_dev = 0.0f64;
        for i in 0..dec.basis.len() {
            for j in 0..dec.basis.len() {
                let d = dot(&dec.basis[i], &dec.basis[j]) - if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max(d.abs());
            }
        }
        assert!(max_dev <= tol, "orthonormality defect {max_dev} > {tol}");

        // Arnoldi relation on the first m-1 columns.
        let mut max_res = 0.0f64;
        for j in 0..m - 1 {
            let av = r.apply_s(&dec.basis[j], ExecMode::Deterministic).unwrap();
            for k in 0..r.n() {
                let mut acc = 0.0;
                for i in 0..m.min(j + 2) {
                    acc += *dec.h.at(i, j) * dec.basis[i][k];
                }
                max_res = max_res.max((av[k] - acc).abs());
            }
        }
        assert!(max_res <= tol, "Arnoldi relation defect {max_res} > {tol}");
    }

    #[test]
    fn high_precision_orthonormality() {
        let s = StochasticMatrix::build_s0(
            &snapshot(&[(0, 1, 2), (1, 2, 1), (2, 0, 3), (0, 2, 1), (2, 1, 2)]),
            Direction::Forward,
        );
        let r: RealizedMatrix<Float> = s.realize(128);
        let cfg = ArnoldiConfig {
            n_a: 3,
            precision_bits: 128,
            start: StartVector::Random(7),
            ..Default::default()
        };
        let dec = arnoldi_decompose(&r, &cfg).unwrap();
        let tol = 10.0 * (-(128f64)).exp2() * dec.h.n() as f64;
        for i in 0..dec.basis.len() {
            for j in 0..dec.basis.len() {
                let d = dot(&dec.basis[i], &dec.basis[j]).to_f64()
                    - if i == j { 1.0 } else { 0.0 };
                assert!(d.abs() <= tol, "dev {d} at ({i},{j})");
            }
        }
    }

    #[test]
    fn permutation_spectrum_fully_reliable() {
        // 4-cycle: eigenvalues 1, i, -1, -i; exactly representable.
        let s = StochasticMatrix::build_s0(
            &snapshot(&[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]),
            Direction::Forward,
        );
        let cfg = ArnoldiConfig {
            n_a: 4,
            start: StartVector::Random(3),
            ..Default::default()
        };
        let spec = reliable_spectrum_s(&s, &cfg, 1234).unwrap();
        assert_eq!(spec.eigenvalues.len(), 4);
        assert!(spec.eigenvalues.iter().all(|e| e.reliable));
        for e in &spec.eigenvalues {
            assert!((e.modulus() - 1.0).abs() < 1e-12);
        }
        let top = &spec.eigenvalues[0];
        assert!((top.modulus() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_chain_rings_are_flagged_unreliable() {
        let op = ChainOp { d: 20 };
        let cfg = ArnoldiConfig {
            n_a: 20,
            start: StartVector::Random(17),
            ..Default::default()
        };
        let spec = reliable_spectrum(&op, &cfg, 999).unwrap();
        // The spurious ring of the defective chain moves between rounding
        // realizations, so at least part of it must be flagged unreliable.
        let unreliable = spec.eigenvalues.len() - spec.reliable_count();
        assert!(
            unreliable > 0,
            "expected unreliable ring values, got all {} reliable",
            spec.eigenvalues.len()
        );
        // Any reliable values must sit inside the Jordan radius bound.
        let bound = 4.0 * f64::exp2(-52.0 / 20.0);
        for e in &spec.eigenvalues {
            assert!(e.modulus() <= bound.max(1e-6) + 1e-12);
        }
    }

    #[test]
    fn uniform_start_converges_to_unit_eigenvalue_first() {
        let records = crate::netgen::generate(&crate::netgen::GeneratorConfig {
            seed: 23,
            target_nodes: 150,
            ..Default::default()
        })
        .unwrap();
        let snap = aggregate(&records, PeriodLabel::FULL).unwrap();
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let cfg = ArnoldiConfig {
            n_a: 30,
            start: StartVector::Uniform,
            ..Default::default()
        };
        let spec = reliable_spectrum_s(&s, &cfg, 5).unwrap();
        let top = &spec.eigenvalues[0];
        assert!(
            (top.modulus() - 1.0).abs() < 1e-8,
            "top Ritz value {} not at the unit eigenvalue",
            top.modulus()
        );
        // Stochastic spectrum stays inside the (slightly padded) unit disk.
        let pad = 1.0 + 10.0 * epsilon::<f64>(52);
        assert!(spec.eigenvalues.iter().all(|e| e.modulus() <= pad));
    }

    #[test]
    fn two_cycle_eigenvector_is_antisymmetric() {
        let r = two_cycle();
        let cfg = ArnoldiConfig {
            n_a: 2,
            start: StartVector::Random(2),
            ..Default::default()
        };
        let ev = core_eigenvector(&r, (-1.0, 0.0), &cfg).unwrap();
        assert!(ev.residual <= 1e-8);
        // psi proportional to (1,-1)/sqrt(2) up to a global phase.
        let amp = ev.amplitudes();
        assert!((amp[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((amp[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        // Components must be opposite: psi_0 + psi_1 = 0.
        assert!((ev.re[0] + ev.re[1]).abs() < 1e-10);
        assert!((ev.im[0] + ev.im[1]).abs() < 1e-10);
    }

    #[test]
    fn three_cycle_eigenvector_matches_circulant() {
        let s = StochasticMatrix::build_s0(
            &snapshot(&[(0, 1, 1), (1, 2, 1), (2, 0, 1)]),
            Direction::Forward,
        );
        let r: RealizedMatrix<f64> = s.realize(52);
        let cfg = ArnoldiConfig {
            n_a: 3,
            start: StartVector::Random(4),
            ..Default::default()
        };
        let target = (-0.5, 3f64.sqrt() / 2.0);
        let ev = core_eigenvector(&r, target, &cfg).unwrap();
        assert!(ev.residual <= 1e-8);
        for a in ev.amplitudes() {
            assert!((a - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        }
        // Ratio psi_{k+1}/psi_k must equal a cube root of unity phase.
        let num = CT::new(ev.re[1], ev.im[1]);
        let den = CT::new(ev.re[0], ev.im[0]);
        let ratio = num.div(&den);
        assert!((ratio.modulus() - 1.0).abs() < 1e-10);
        let expected_phase = 2.0 * std::f64::consts::PI / 3.0;
        let phase = ratio.im.atan2(ratio.re).abs();
        assert!((phase - expected_phase).abs() < 1e-8);
    }

    #[test]
    fn nonconverged_eigenvector_reports_residual() {
        // Asking for an eigenvalue nowhere near the spectrum cannot meet
        // the residual bound.
        let r = two_cycle();
        let cfg = ArnoldiConfig {
            n_a: 2,
            start: StartVector::Random(8),
            ..Default::default()
        };
        match core_eigenvector(&r, (0.3, 0.4), &cfg) {
            Err(Error::NonConverged { residual, .. }) => assert!(residual > 1e-8),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn decay_width_definition() {
        let spec = SpectrumResult {
            eigenvalues: vec![
                SpectrumEntry {
                    re: 1.0,
                    im: 0.0,
                    origin: Origin::Core,
                    reliable: true,
                },
                SpectrumEntry {
                    re: 0.5,
                    im: 0.0,
                    origin: Origin::Core,
                    reliable: true,
                },
                SpectrumEntry {
                    re: 0.4,
                    im: 0.0,
                    origin: Origin::Core,
                    reliable: false,
                },
            ],
            n_a: 3,
            precision_bits: 52,
            breakoff_index: None,
            reduced_dimension: 3,
        };
        let g = decay_widths(&spec);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0], (1, 0.0));
        assert!((g[1].1 - 2.0 * 2f64.ln()).abs() < 1e-15);
        // Non-decreasing.
        assert!(g.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn reliable_count_grows_with_dimension() {
        let records = crate::netgen::generate(&crate::netgen::GeneratorConfig {
            seed: 31,
            target_nodes: 500,
            ..Default::default()
        })
        .unwrap();
        let snap = aggregate(&records, PeriodLabel::FULL).unwrap();
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let mut counts = Vec::new();
        for n_a in [50usize, 100, 200] {
            let cfg = ArnoldiConfig {
                n_a,
                start: StartVector::Random(1),
                ..Default::default()
            };
            let spec = reliable_spectrum_s(&s, &cfg, 77).unwrap();
            counts.push(spec.reliable_count());
        }
        assert!(
            counts.windows(2).all(|w| w[0] <= w[1]),
            "reliable counts not monotone: {counts:?}"
        );
    }
}
