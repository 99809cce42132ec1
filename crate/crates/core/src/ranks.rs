//! PageRank/CheiRank by power iteration, rank orderings, rank-decay fits,
//! eigenvector amplitude profiles, the (K, K*) density grid, and the
//! PageRank-CheiRank correlator.

use crate::error::{Error, Result};
use crate::gmatrix::{ExecMode, GoogleOperator};
use crate::ingest::least_squares_slope;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKind {
    PageRank,
    CheiRank,
}

impl std::fmt::Display for RankKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankKind::PageRank => write!(f, "pagerank"),
            RankKind::CheiRank => write!(f, "cheirank"),
        }
    }
}

/// Converged stationary probabilities plus the descending-probability
/// ordering (K = 1 at maximal P, ties broken by ascending node id).
#[derive(Debug, Clone)]
pub struct RankVector {
    pub probabilities: Vec<f64>,
    /// `order[k]` is the node at rank K = k+1.
    pub order: Vec<usize>,
    pub kind: RankKind,
    pub alpha: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

impl RankVector {
    pub fn n(&self) -> usize {
        self.probabilities.len()
    }

    /// P(K): probability at rank K (1-based).
    pub fn p_of_rank(&self, k: usize) -> f64 {
        self.probabilities[self.order[k - 1]]
    }

    /// K(i): rank of node i (1-based).
    pub fn rank_of_node(&self) -> Vec<usize> {
        let mut rank = vec![0usize; self.order.len()];
        for (pos, &node) in self.order.iter().enumerate() {
            rank[node] = pos + 1;
        }
        rank
    }
}

fn descending_order(p: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Power iteration from the uniform vector until the l1 step difference
/// drops below `tol`. The iterate is renormalized each step so the sum
/// stays at 1 to machine accuracy.
pub fn pagerank(
    op: &GoogleOperator<f64>,
    kind: RankKind,
    tol: f64,
    max_iter: usize,
    mode: ExecMode,
) -> Result<RankVector> {
    if op.alpha() >= 1.0 {
        return Err(Error::InvalidConfig(
            "power iteration needs alpha < 1 for a unique fixed point".into(),
        ));
    }
    let n = op.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=max_iter {
        let mut next = op.apply_g(&v, mode)?;
        let sum: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= sum;
        }
        residual = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        v = next;
        iterations = it;
        if residual < tol {
            let order = descending_order(&v);
            return Ok(RankVector {
                probabilities: v,
                order,
                kind,
                alpha: op.alpha(),
                iterations,
                final_residual: residual,
            });
        }
    }
    Err(Error::NonConverged {
        iterations,
        residual,
    })
}

/// Least-squares fit of `ln P(K)` vs `ln K` over ranks in `[k_lo, k_hi]`;
/// returns `(nu, std_error)` with `nu` positive for decaying P.
pub fn rank_exponent_fit(rank: &RankVector, k_lo: usize, k_hi: usize) -> Result<(f64, f64)> {
    let hi = k_hi.min(rank.n());
    let pts: Vec<(f64, f64)> = (k_lo.max(1)..=hi)
        .filter(|&k| rank.p_of_rank(k) > 0.0)
        .map(|k| ((k as f64).ln(), rank.p_of_rank(k).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let (slope, err) = least_squares_slope(&pts);
    Ok((-slope, err))
}

/// Eigenvector amplitudes with their own descending local ordering.
#[derive(Debug, Clone)]
pub struct EigenvectorProfile {
    pub lambda: (f64, f64),
    pub amplitudes: Vec<f64>,
    /// `local_order[k]` is the node at local rank K_j = k+1.
    pub local_order: Vec<usize>,
}

impl EigenvectorProfile {
    pub fn amplitude_of_local_rank(&self, k: usize) -> f64 {
        self.amplitudes[self.local_order[k - 1]]
    }

    /// Nodes holding the `count` largest amplitudes.
    pub fn top_nodes(&self, count: usize) -> &[usize] {
        &self.local_order[..count.min(self.local_order.len())]
    }
}

/// Profiles a normalized eigenvector: amplitudes `|psi_j|` ordered
/// monotonically descending under the local index K_j.
pub fn eigenvector_profile(lambda: (f64, f64), amplitudes: Vec<f64>) -> EigenvectorProfile {
    let local_order = descending_order(&amplitudes);
    EigenvectorProfile {
        lambda,
        amplitudes,
        local_order,
    }
}

/// Node density over the (ln K, ln K*) plane on a G x G grid.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub g: usize,
    /// Raw node counts, row-major with row = K cell, column = K* cell.
    pub counts: Vec<u64>,
    /// Normalized weights, sum 1.
    pub weights: Vec<f64>,
    /// Display copy clipped at `saturation * max(weights)`.
    pub display: Vec<f64>,
    pub saturation: f64,
}

pub const DEFAULT_SATURATION: f64 = 1.0 / 16.0;

impl DensityGrid {
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.g + col]
    }
}

/// Cell index of a 1-based rank on `[0, ln N]` split into `g` log-equidistant
/// cells; the upper boundary closes into the last cell.
fn log_cell(rank: usize, n: usize, g: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let x = (rank as f64).ln() / (n as f64).ln();
    ((x * g as f64) as usize).min(g - 1)
}

/// Bins nodes by their (K, K*) ranks. Both rank vectors must order the same
/// node set.
pub fn density_grid(
    k: &RankVector,
    k_star: &RankVector,
    g: usize,
    saturation: f64,
) -> Result<DensityGrid> {
    if g < 1 {
        return Err(Error::InvalidConfig("grid needs at least one cell".into()));
    }
    let n = k.n();
    if k_star.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k_star.n(),
        });
    }
    let rank_k = k.rank_of_node();
    let rank_ks = k_star.rank_of_node();
    let mut counts = vec![0u64; g * g];
    for node in 0..n {
        let row = log_cell(rank_k[node], n, g);
        let col = log_cell(rank_ks[node], n, g);
        counts[row * g + col] += 1;
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let max_w = weights.iter().cloned().fold(0.0f64, f64::max);
    let clip = saturation * max_w;
    let display = weights.iter().map(|&w| w.min(clip)).collect();
    Ok(DensityGrid {
        g,
        counts,
        weights,
        display,
        saturation,
    })
}

/// PageRank-CheiRank correlator kappa and its per-node components.
#[derive(Debug, Clone)]
pub struct CorrelatorReport {
    pub kappa: f64,
    /// `kappa_i = N P(i) P*(i)` per node.
    pub components: Vec<f64>,
    /// Log-binned histogram of the components over [1e-9, 1e4].
    pub histogram: Vec<(f64, u64)>,
}

pub const KAPPA_HIST_CELLS: usize = 260;
pub const KAPPA_HIST_LO: f64 = 1e-9;
pub const KAPPA_HIST_HI: f64 = 1e4;

/// `kappa = N sum_i P(i) P*(i) - 1`, components `kappa_i = N P(i) P*(i)`.
pub fn correlator(p: &RankVector, p_star: &RankVector) -> Result<CorrelatorReport> {
    let n = p.n();
    if p_star.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p_star.n(),
        });
    }
    let components: Vec<f64> = p
        .probabilities
        .iter()
        .zip(&p_star.probabilities)
        .map(|(a, b)| n as f64 * a * b)
        .collect();
    let kappa = components.iter().sum::<f64>() - 1.0;

    let cells = KAPPA_HIST_CELLS;
    let lo = KAPPA_HIST_LO.log10();
    let hi = KAPPA_HIST_HI.log10();
    let width = (hi - lo) / cells as f64;
    let mut hist = vec![0u64; cells];
    for &c in &components {
        if c >= KAPPA_HIST_LO && c <= KAPPA_HIST_HI {
            let idx = (((c.log10() - lo) / width) as usize).min(cells - 1);
            hist[idx] += 1;
        }
    }
    let histogram = hist
        .into_iter()
        .enumerate()
        .map(|(i, c)| (10f64.powf(lo + width * i as f64), c))
        .collect();
    Ok(CorrelatorReport {
        kappa,
        components,
        histogram,
    })
}
