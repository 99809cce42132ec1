//! Column-stochastic matrix S0/S and the damped Google operator G(alpha),
//! built from a network snapshot. The dangling completion and the damping
//! rank-one term are always applied implicitly, so products stay O(links).

use rayon::prelude::*;
use rug::Rational;

use crate::error::{Error, Result};
use crate::ingest::NetworkSnapshot;
use crate::linalg::DenseMatrix;
use crate::precision::Real;

pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverted,
}

/// Summation realization for matrix-vector products. `Deterministic` is a
/// fixed sequential order; `Parallel` shards columns and reduces shard
/// results in shard order, so it is reproducible for a fixed shard count
/// while different shard counts give different rounding realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Deterministic,
    Parallel { shards: usize },
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Deterministic
    }
}

/// Exact-rational sparse S0 with its dangling-column set.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    /// Per-column (row, weight) entries, rows ascending; non-dangling
    /// columns sum to exactly 1.
    cols: Vec<Vec<(u32, Rational)>>,
    dangling: Vec<bool>,
    direction: Direction,
}

impl StochasticMatrix {
    /// Normalizes the snapshot's weighted adjacency column-by-column.
    /// Forward: column k distributes node k's outgoing volume. Inverted:
    /// the adjacency is transposed first (CheiRank construction).
    pub fn build_s0(snapshot: &NetworkSnapshot, direction: Direction) -> StochasticMatrix {
        let n = snapshot.node_count();
        let mut cols: Vec<Vec<(u32, Rational)>> = vec![Vec::new(); n];
        for (src, dst, w) in &snapshot.edges {
            let (col, row) = match direction {
                Direction::Forward => (*src as usize, *dst),
                Direction::Inverted => (*dst as usize, *src),
            };
            cols[col].push((row, w.clone()));
        }
        let mut dangling = vec![false; n];
        for (k, col) in cols.iter_mut().enumerate() {
            if col.is_empty() {
                dangling[k] = true;
                continue;
            }
            col.sort_by_key(|&(row, _)| row);
            let mut sum = Rational::new();
            for (_, w) in col.iter() {
                sum += w;
            }
            for (_, w) in col.iter_mut() {
                *w /= &sum;
            }
        }
        StochasticMatrix {
            n,
            cols,
            dangling,
            direction,
        }
    }

    /// Builds S0 from explicit columns. Empty columns become dangling;
    /// non-empty columns must sum to exactly 1.
    pub fn from_columns(n: usize, cols: Vec<Vec<(u32, Rational)>>) -> Result<StochasticMatrix> {
        if cols.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: cols.len(),
            });
        }
        let mut dangling = vec![false; n];
        for (k, col) in cols.iter().enumerate() {
            if col.is_empty() {
                dangling[k] = true;
                continue;
            }
            let mut sum = Rational::new();
            for (row, w) in col {
                if *row as usize >= n || *w < 0 || *w > 1 {
                    return Err(Error::InvalidConfig(format!(
                        "column {k} holds an out-of-range entry"
                    )));
                }
                sum += w;
            }
            if sum != 1 {
                return Err(Error::InvalidConfig(format!(
                    "column {k} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(StochasticMatrix {
            n,
            cols,
            dangling,
            direction: Direction::Forward,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn columns(&self) -> &[Vec<(u32, Rational)>] {
        &self.cols
    }

    pub fn is_dangling(&self, k: usize) -> bool {
        self.dangling[k]
    }

    pub fn dangling_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&k| self.dangling[k]).collect()
    }

    pub fn dangling_count(&self) -> usize {
        self.dangling.iter().filter(|&&d| d).count()
    }

    /// Exact `S v` (dangling completion included) in rational arithmetic.
    pub fn apply_s_rational(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = vec![Rational::new(); self.n];
        let mut dangling_mass = Rational::new();
        for k in 0..self.n {
            if self.dangling[k] {
                dangling_mass += &v[k];
                continue;
            }
            for (row, w) in &self.cols[k] {
                out[*row as usize] += Rational::from(w * &v[k]);
            }
        }
        if dangling_mass != 0 {
            let share = dangling_mass / Rational::from(self.n as u64);
            for y in out.iter_mut() {
                *y += &share;
            }
        }
        Ok(out)
    }

    /// Floating realization at the requested precision; entries are rounded
    /// to nearest only here.
    pub fn realize<T: Real>(&self, precision_bits: u32) -> RealizedMatrix<T> {
        let cols = self
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(row, w)| (*row, T::from_rational(w, precision_bits)))
                    .collect()
            })
            .collect();
        RealizedMatrix {
            n: self.n,
            cols,
            dangling: self
                .dangling
                .iter()
                .enumerate()
                .filter_map(|(k, &d)| d.then_some(k as u32))
                .collect(),
            precision_bits,
        }
    }

    /// Dense S (dangling columns completed to uniform 1/N).
    pub fn to_dense_s(&self, cap: usize) -> Result<DenseMatrix> {
        if self.n > cap {
            return Err(Error::DenseCap { n: self.n, cap });
        }
        let mut m = DenseMatrix::zeros(self.n, 52);
        let unif = 1.0 / self.n as f64;
        for k in 0..self.n {
            if self.dangling[k] {
                for r in 0..self.n {
                    m.set(r, k, unif);
                }
            } else {
                for (row, w) in &self.cols[k] {
                    m.set(*row as usize, k, w.to_f64());
                }
            }
        }
        Ok(m)
    }

    /// Dense G(alpha) = alpha S + (1 - alpha) / N.
    pub fn to_dense_g(&self, alpha: f64, cap: usize) -> Result<DenseMatrix> {
        let mut m = self.to_dense_s(cap)?;
        let unif = (1.0 - alpha) / self.n as f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = alpha * *m.at(i, j) + unif;
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

/// Sparse S0 realized at a fixed floating precision.
#[derive(Debug, Clone)]
pub struct RealizedMatrix<T> {
    n: usize,
    cols: Vec<Vec<(u32, T)>>,
    dangling: Vec<u32>,
    precision_bits: u32,
}

impl<T: Real> RealizedMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn dangling(&self) -> &[u32] {
        &self.dangling
    }

    fn scatter_columns(&self, v: &[T], range: std::ops::Range<usize>) -> Vec<T> {
        let zero = T::seed(self.precision_bits, 0.0);
        let mut out = vec![zero; self.n];
        for k in range {
            for (row, w) in &self.cols[k] {
                let add = w.clone() * &v[k];
                out[*row as usize] += &add;
            }
        }
        out
    }

    /// `S v = S0 v + (1/N) (sum of dangling v_k) e`, never materializing
    /// the rank-one completion.
    pub fn apply_s(&self, v: &[T], mode: ExecMode) -> Result<Vec<T>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = match mode {
            ExecMode::Deterministic => self.scatter_columns(v, 0..self.n),
            ExecMode::Parallel { shards } => {
                let shards = shards.max(1).min(self.n.max(1));
                let chunk = self.n.div_ceil(shards);
                let partials: Vec<Vec<T>> = (0..shards)
                    .into_par_iter()
                    .map(|s| {
                        let lo = s * chunk;
                        let hi = ((s + 1) * chunk).min(self.n);
                        self.scatter_columns(v, lo..hi)
                    })
                    .collect();
                // Fixed-order shard reduction keeps the result reproducible.
                let mut acc = partials[0].clone();
                for part in &partials[1..] {
                    for (a, b) in acc.iter_mut().zip(part) {
                        *a += b;
                    }
                }
                acc
            }
        };
        let mut dangling_mass = T::seed(self.precision_bits, 0.0);
        for &k in &self.dangling {
            dangling_mass += &v[k as usize];
        }
        if !dangling_mass.is_zero() {
            let share = dangling_mass / &T::seed(self.precision_bits, self.n as f64);
            for y in out.iter_mut() {
                *y += &share;
            }
        }
        Ok(out)
    }
}

/// Damped operator `G = alpha S + (1 - alpha) (1/N) e e^T`.
#[derive(Debug, Clone)]
pub struct GoogleOperator<T> {
    base: RealizedMatrix<T>,
    alpha: T,
}

impl<T: Real> GoogleOperator<T> {
    pub fn new(base: RealizedMatrix<T>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "damping factor must lie in (0, 1], got {alpha}"
            )));
        }
        let alpha = T::seed(base.precision_bits(), alpha);
        Ok(GoogleOperator { base, alpha })
    }

    pub fn base(&self) -> &RealizedMatrix<T> {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.to_f64()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn apply_g(&self, v: &[T], mode: ExecMode) -> Result<Vec<T>> {
        let n = self.base.n();
        let mut out = self.base.apply_s(v, mode)?;
        let one = self.alpha.of(1.0);
        let mut total = self.alpha.of(0.0);
        for x in v {
            total += x;
        }
        let teleport = (one - &self.alpha) * &total / &self.alpha.of(n as f64);
        for y in out.iter_mut() {
            let damped = y.clone() * &self.alpha + &teleport;
            *y = damped;
        }
        Ok(out)
    }
}

/// Abstract real linear operator driving the Krylov iterations.
pub trait LinearOp<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[T], mode: ExecMode) -> Result<Vec<T>>;
}

impl<T: Real> LinearOp<T> for RealizedMatrix<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, v: &[T], mode: ExecMode) -> Result<Vec<T>> {
        self.apply_s(v, mode)
    }
}

impl<T: Real> LinearOp<T> for GoogleOperator<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, v: &[T], mode: ExecMode) -> Result<Vec<T>> {
        self.apply_g(v, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{aggregate, TransactionRecord};
    use crate::period::PeriodLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn snapshot(edges: &[(u64, u64, i64)]) -> NetworkSnapshot {
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

    fn random_snapshot(rng: &mut ChaCha12Rng, n: u64, edges: usize) -> NetworkSnapshot {
        let mut list = Vec::new();
        for _ in 0..edges {
            list.push((
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(1..100i64),
            ));
        }
        snapshot(&list)
    }

    #[test]
    fn forward_columns_normalize_exactly() {
        let snap = snapshot(&[(1, 2, 2), (1, 3, 1)]);
        let m = StochasticMatrix::build_s0(&snap, Direction::Forward);
        // Node ids reindex to 1->0, 2->1, 3->2.
        assert_eq!(
            m.columns()[0],
            vec![(1u32, Rational::from((2, 3))), (2u32, Rational::from((1, 3)))]
        );
        assert!(m.is_dangling(1) && m.is_dangling(2));
        assert_eq!(m.dangling_count(), 2);
    }

    #[test]
    fn two_cycle_is_swap_without_dangling() {
        let snap = snapshot(&[(1, 2, 5), (2, 1, 5)]);
        let m = StochasticMatrix::build_s0(&snap, Direction::Forward);
        assert_eq!(m.columns()[0], vec![(1u32, Rational::from(1))]);
        assert_eq!(m.columns()[1], vec![(0u32, Rational::from(1))]);
        assert_eq!(m.dangling_count(), 0);
    }

    #[test]
    fn random_columns_sum_to_one_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let snap = random_snapshot(&mut rng, 8, 20);
        let m = StochasticMatrix::build_s0(&snap, Direction::Forward);
        for k in 0..m.n() {
            if m.is_dangling(k) {
                continue;
            }
            let mut sum = Rational::new();
            for (_, w) in &m.columns()[k] {
                sum += w;
            }
            assert_eq!(sum, Rational::from(1));
        }
    }

    #[test]
    fn inverted_adjacency_is_transpose() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let snap = random_snapshot(&mut rng, 10, 25);
        let fwd = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let inv = StochasticMatrix::build_s0(&snap, Direction::Inverted);
        // Nonzero pattern of the inverted S0 is the transpose of forward's.
        let mut fwd_pattern: Vec<(u32, u32)> = Vec::new();
        for (k, col) in fwd.columns().iter().enumerate() {
            if !fwd.is_dangling(k) {
                for (row, _) in col {
                    fwd_pattern.push((*row, k as u32));
                }
            }
        }
        let mut inv_pattern: Vec<(u32, u32)> = Vec::new();
        for (k, col) in inv.columns().iter().enumerate() {
            if !inv.is_dangling(k) {
                for (row, _) in col {
                    inv_pattern.push((k as u32, *row));
                }
            }
        }
        fwd_pattern.sort_unstable();
        inv_pattern.sort_unstable();
        assert_eq!(fwd_pattern, inv_pattern);
    }

    #[test]
    fn all_dangling_uniform_is_fixed_point() {
        let s = StochasticMatrix::from_columns(3, vec![Vec::new(), Vec::new(), Vec::new()])
            .unwrap();
        assert_eq!(s.dangling_count(), 3);
        let r: RealizedMatrix<f64> = s.realize(52);
        let v = vec![1.0 / 3.0; 3];
        let out = r.apply_s(&v, ExecMode::Deterministic).unwrap();
        for y in &out {
            assert!((y - 1.0 / 3.0).abs() < 1e-16);
        }
    }

    #[test]
    fn swap_moves_mass() {
        let snap = snapshot(&[(1, 2, 5), (2, 1, 5)]);
        let r: RealizedMatrix<f64> = StochasticMatrix::build_s0(&snap, Direction::Forward).realize(52);
        let out = r.apply_s(&[1.0, 0.0], ExecMode::Deterministic).unwrap();
        assert_eq!(out, vec![0.0, 1.0]);
    }

    #[test]
    fn apply_matches_dense_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let snap = random_snapshot(&mut rng, 10, 22);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let r: RealizedMatrix<f64> = s.realize(52);
        let n = r.n();
        // Dense oracle assembled straight from the rational column data.
        let mut dense = vec![vec![0.0; n]; n];
        for k in 0..n {
            if s.is_dangling(k) {
                for (row, d) in dense.iter_mut().enumerate() {
                    let _ = row;
                    d[k] = 1.0 / n as f64;
                }
            } else {
                for (row, w) in &s.columns()[k] {
                    dense[*row as usize][k] = w.to_f64();
                }
            }
        }
        for _ in 0..20 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = r.apply_s(&v, ExecMode::Deterministic).unwrap();
            for i in 0..n {
                let want: f64 = (0..n).map(|j| dense[i][j] * v[j]).sum();
                assert!((got[i] - want).abs() < 1e-14);
            }
            // Damped operator against the dense formula.
            let g = GoogleOperator::new(r.clone(), 0.85).unwrap();
            let got = g.apply_g(&v, ExecMode::Deterministic).unwrap();
            let vsum: f64 = v.iter().sum();
            for i in 0..n {
                let sv: f64 = (0..n).map(|j| dense[i][j] * v[j]).sum();
                let want = 0.85 * sv + 0.15 * vsum / n as f64;
                assert!((got[i] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn alpha_limits() {
        let snap = snapshot(&[(1, 2, 5), (2, 1, 5)]);
        let r: RealizedMatrix<f64> = StochasticMatrix::build_s0(&snap, Direction::Forward).realize(52);
        let v = vec![0.25, 0.75];
        let g1 = GoogleOperator::new(r.clone(), 1.0).unwrap();
        assert_eq!(
            g1.apply_g(&v, ExecMode::Deterministic).unwrap(),
            r.apply_s(&v, ExecMode::Deterministic).unwrap()
        );
        // alpha -> 0 is outside (0,1]; use a tiny alpha to approach uniform.
        let g0 = GoogleOperator::new(r.clone(), 1e-12).unwrap();
        let out = g0.apply_g(&v, ExecMode::Deterministic).unwrap();
        for y in out {
            assert!((y - 0.5).abs() < 1e-11);
        }
        assert!(GoogleOperator::new(r.clone(), 0.0).is_err());
        assert!(GoogleOperator::new(r, 1.5).is_err());
    }

    #[test]
    fn dense_realizations() {
        let snap = snapshot(&[(1, 2, 5), (2, 1, 5)]);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let d = s.to_dense_s(10).unwrap();
        assert_eq!(*d.at(0, 1), 1.0);
        assert_eq!(*d.at(1, 0), 1.0);
        assert_eq!(*d.at(0, 0), 0.0);
        assert!(matches!(
            s.to_dense_s(1),
            Err(Error::DenseCap { n: 2, cap: 1 })
        ));

        // Single node with a self-loop removed would be dangling: column
        // completes to 1/N = 1.
        let snap = snapshot(&[(7, 7, 3)]);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let d = s.to_dense_s(10).unwrap();
        assert_eq!(*d.at(0, 0), 1.0);
    }

    #[test]
    fn dense_and_sparse_agree_on_random_probes() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let snap = random_snapshot(&mut rng, 8, 18);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let dense = s.to_dense_s(100).unwrap();
        let r: RealizedMatrix<f64> = s.realize(52);
        for _ in 0..100 {
            let v: Vec<f64> = (0..r.n()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let got = r.apply_s(&v, ExecMode::Deterministic).unwrap();
            let want = dense.matvec(&v);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rational_apply_conserves_mass_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let snap = random_snapshot(&mut rng, 9, 20);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let v: Vec<Rational> = (0..s.n())
            .map(|i| Rational::from(((i as i64 % 7) + 1, 7)))
            .collect();
        let out = s.apply_s_rational(&v).unwrap();
        let mut in_sum = Rational::new();
        for x in &v {
            in_sum += x;
        }
        let mut out_sum = Rational::new();
        for y in &out {
            out_sum += y;
        }
        assert_eq!(in_sum, out_sum);
    }

    #[test]
    fn float_apply_conserves_mass() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        for _ in 0..5 {
            let snap = random_snapshot(&mut rng, 30, 70);
            let r: RealizedMatrix<f64> =
                StochasticMatrix::build_s0(&snap, Direction::Forward).realize(52);
            let n = r.n();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let vsum: f64 = v.iter().sum();
            let out = r.apply_s(&v, ExecMode::Deterministic).unwrap();
            let osum: f64 = out.iter().sum();
            assert!((osum - vsum).abs() < 1e-13 * n as f64);
            let g = GoogleOperator::new(r, 0.85).unwrap();
            let out = g.apply_g(&v, ExecMode::Deterministic).unwrap();
            let osum: f64 = out.iter().sum();
            assert!((osum - vsum).abs() < 1e-13 * n as f64);
        }
    }

    #[test]
    fn execution_modes_are_reproducible() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let snap = random_snapshot(&mut rng, 50, 200);
        let r: RealizedMatrix<f64> =
            StochasticMatrix::build_s0(&snap, Direction::Forward).realize(52);
        let v: Vec<f64> = (0..r.n()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let a1 = r.apply_s(&v, ExecMode::Deterministic).unwrap();
        let a2 = r.apply_s(&v, ExecMode::Deterministic).unwrap();
        assert_eq!(a1, a2);
        let p1 = r.apply_s(&v, ExecMode::Parallel { shards: 4 }).unwrap();
        let p2 = r.apply_s(&v, ExecMode::Parallel { shards: 4 }).unwrap();
        assert_eq!(p1, p2);
        // One shard reproduces the sequential order bit-for-bit.
        let p_one = r.apply_s(&v, ExecMode::Parallel { shards: 1 }).unwrap();
        assert_eq!(p_one, a1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let snap = snapshot(&[(1, 2, 1)]);
        let r: RealizedMatrix<f64> =
            StochasticMatrix::build_s0(&snap, Direction::Forward).realize(52);
        assert!(matches!(
            r.apply_s(&[1.0], ExecMode::Deterministic),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn high_precision_realization_round_trips() {
        use rug::Float;
        let snap = snapshot(&[(1, 2, 2), (1, 3, 1), (2, 1, 1)]);
        let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
        let r: RealizedMatrix<Float> = s.realize(256);
        let v: Vec<Float> = (0..r.n()).map(|i| Float::with_val(257, i as f64 + 0.5)).collect();
        let out = r.apply_s(&v, ExecMode::Deterministic).unwrap();
        let rf: RealizedMatrix<f64> = s.realize(52);
        let vf: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
        let outf = rf.apply_s(&vf, ExecMode::Deterministic).unwrap();
        for (hp, lo) in out.iter().zip(&outf) {
            assert!((hp.to_f64() - lo).abs() < 1e-12);
        }
    }
}
