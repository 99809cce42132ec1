//! Lorenz curves and Gini coefficients over rank probabilities and raw
//! per-node transfer volumes. Volume incomes run in exact rational
//! arithmetic; rank incomes in f64.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use rug::Rational;

use crate::error::{Error, Result};
use crate::gmatrix::{Direction, ExecMode, GoogleOperator, StochasticMatrix};
use crate::ingest::{aggregate, slice_period, NetworkSnapshot, TransactionRecord};
use crate::period::PeriodLabel;
use crate::ranks::{pagerank, RankKind};

/// Income scalar: exact rationals or floats.
pub trait Amount:
    Clone
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    fn zero() -> Self;
    fn from_usize(n: usize) -> Self;
    fn to_f64(&self) -> f64;
}

impl Amount for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Amount for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn from_usize(n: usize) -> Self {
        Rational::from(n as u64)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WealthVariant {
    PageRank,
    CheiRank,
    VolumeIn,
    VolumeOut,
}

impl std::fmt::Display for WealthVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WealthVariant::PageRank => write!(f, "pagerank"),
            WealthVariant::CheiRank => write!(f, "cheirank"),
            WealthVariant::VolumeIn => write!(f, "volume_in"),
            WealthVariant::VolumeOut => write!(f, "volume_out"),
        }
    }
}

/// Cumulative ascending-income shares sigma(K') for K' = 1..N_effective.
#[derive(Debug, Clone)]
pub struct LorenzCurve<T> {
    pub variant: WealthVariant,
    pub sigma: Vec<T>,
    pub threshold: Option<T>,
    pub n_effective: usize,
}

/// Builds the Lorenz curve: nodes failing the strict `income > threshold`
/// filter are removed, the survivors are normalized to total share 1,
/// sorted ascending, and cumulated.
pub fn lorenz<T: Amount>(
    variant: WealthVariant,
    incomes: &[T],
    threshold: Option<&T>,
) -> Result<LorenzCurve<T>> {
    let zero = T::zero();
    for x in incomes {
        if *x < zero {
            return Err(Error::InvalidConfig("negative income".into()));
        }
    }
    let mut kept: Vec<T> = match threshold {
        Some(t) => incomes.iter().filter(|x| **x > *t).cloned().collect(),
        None => incomes.to_vec(),
    };
    if kept.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = T::zero();
    for x in &kept {
        total = total + x;
    }
    if total <= zero {
        return Err(Error::EmptyPopulation);
    }
    let mut sigma = Vec::with_capacity(kept.len());
    let mut acc = T::zero();
    for x in &kept {
        acc = acc + &(x.clone() / &total);
        sigma.push(acc.clone());
    }
    Ok(LorenzCurve {
        variant,
        sigma,
        threshold: threshold.cloned(),
        n_effective: kept.len(),
    })
}

#[derive(Debug, Clone)]
pub struct GiniReport<T> {
    pub g: T,
    pub variant: WealthVariant,
    pub threshold: Option<T>,
    pub n_effective: usize,
}

/// Area form: `g = 1 - (2/N) sum_K' sigma(K')`.
pub fn gini<T: Amount>(curve: &LorenzCurve<T>) -> GiniReport<T> {
    let n = T::from_usize(curve.n_effective);
    let mut s = T::zero();
    for x in &curve.sigma {
        s = s + x;
    }
    let two = T::from_usize(2);
    let one = T::from_usize(1);
    let g = one - &(two * &s / &n);
    GiniReport {
        g,
        variant: curve.variant,
        threshold: curve.threshold.clone(),
        n_effective: curve.n_effective,
    }
}

/// Rank form computed independently of the curve:
/// `g = 1 - 2 sum_K K P(K) / N` with P sorted descending and normalized.
pub fn gini_rank_form<T: Amount>(incomes: &[T], threshold: Option<&T>) -> Result<T> {
    let mut kept: Vec<T> = match threshold {
        Some(t) => incomes.iter().filter(|x| **x > *t).cloned().collect(),
        None => incomes.to_vec(),
    };
    if kept.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    kept.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut total = T::zero();
    for x in &kept {
        total = total + x;
    }
    let n = T::from_usize(kept.len());
    let mut weighted = T::zero();
    for (i, x) in kept.iter().enumerate() {
        weighted = weighted + &(T::from_usize(i + 1) * x);
    }
    let one = T::from_usize(1);
    let two = T::from_usize(2);
    Ok(one - &(two * &weighted / &(n * &total)))
}

/// Per-node in-flow or out-flow over the snapshot's nodes, exact.
pub fn volume_incomes(snapshot: &NetworkSnapshot, direction: Direction) -> Vec<Rational> {
    let mut incomes = vec![Rational::new(); snapshot.node_count()];
    for (src, dst, w) in &snapshot.edges {
        let node = match direction {
            Direction::Forward => *dst as usize,  // in-flow
            Direction::Inverted => *src as usize, // out-flow
        };
        incomes[node] += w;
    }
    incomes
}

#[derive(Debug, Clone)]
pub struct TimelineEntry {
    pub period: PeriodLabel,
    pub report: Option<GiniReport<f64>>,
    pub warning: Option<String>,
}

/// Per-period Gini: builds each period's snapshot, derives the income
/// (volumes or rank probabilities at `alpha`), and reports g. Empty periods
/// produce a warning entry.
pub fn gini_timeline(
    records: &[TransactionRecord],
    periods: &[PeriodLabel],
    variant: WealthVariant,
    alpha: f64,
    threshold: Option<f64>,
) -> Result<Vec<TimelineEntry>> {
    let mut out = Vec::with_capacity(periods.len());
    for &period in periods {
        let slice = slice_period(records, period);
        if slice.is_empty() {
            out.push(TimelineEntry {
                period,
                report: None,
                warning: Some(format!("period {period} holds no records")),
            });
            continue;
        }
        let snapshot = aggregate(&slice, period)?;
        let report = match variant {
            WealthVariant::VolumeIn | WealthVariant::VolumeOut => {
                let dir = if variant == WealthVariant::VolumeIn {
                    Direction::Forward
                } else {
                    Direction::Inverted
                };
                let incomes = volume_incomes(&snapshot, dir);
                let thr = threshold.map(|t| {
                    Rational::from((
                        (t * 1e8).round() as i64,
                        100_000_000i64,
                    ))
                });
                let curve = lorenz(variant, &incomes, thr.as_ref())?;
                let report = gini(&curve);
                GiniReport {
                    g: report.g.to_f64(),
                    variant,
                    threshold,
                    n_effective: report.n_effective,
                }
            }
            WealthVariant::PageRank | WealthVariant::CheiRank => {
                let dir = if variant == WealthVariant::PageRank {
                    Direction::Forward
                } else {
                    Direction::Inverted
                };
                let s = StochasticMatrix::build_s0(&snapshot, dir);
                let op = GoogleOperator::new(s.realize(52), alpha)?;
                let kind = if variant == WealthVariant::PageRank {
                    RankKind::PageRank
                } else {
                    RankKind::CheiRank
                };
                let rank = pagerank(
                    &op,
                    kind,
                    crate::ranks::DEFAULT_TOL,
                    crate::ranks::DEFAULT_MAX_ITER,
                    ExecMode::Deterministic,
                )?;
                let curve = lorenz(variant, &rank.probabilities, None)?;
                gini(&curve)
            }
        };
        out.push(TimelineEntry {
            period,
            report: Some(report),
            warning: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_incomes_trace_the_equality_line() {
        let curve = lorenz(WealthVariant::VolumeIn, &[1.0f64, 1.0, 1.0, 1.0], None).unwrap();
        let expect = [0.25, 0.5, 0.75, 1.0];
        for (s, e) in curve.sigma.iter().zip(expect) {
            assert!((s - e).abs() < 1e-15);
        }
    }

    #[test]
    fn full_concentration() {
        let curve = lorenz(WealthVariant::VolumeIn, &[0.0f64, 0.0, 0.0, 1.0], None).unwrap();
        assert_eq!(curve.sigma, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(curve.n_effective, 4);
    }

    #[test]
    fn curve_matches_brute_force_and_stays_below_equality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let incomes: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..10.0)).collect();
        let curve = lorenz(WealthVariant::VolumeOut, &incomes, None).unwrap();
        // Brute-force sort-and-cumulate oracle.
        let mut sorted = incomes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total: f64 = sorted.iter().sum();
        let mut acc = 0.0;
        for (k, x) in sorted.iter().enumerate() {
            acc += x / total;
            assert!((curve.sigma[k] - acc).abs() < 1e-14);
            // On or below the equality line.
            assert!(curve.sigma[k] <= (k + 1) as f64 / 50.0 + 1e-12);
        }
        assert!((curve.sigma.last().unwrap() - 1.0).abs() < 1e-12);
        // Sigma non-decreasing.
        assert!(curve.sigma.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }

    #[test]
    fn uniform_gini_is_exactly_minus_one_over_n() {
        for n in [3usize, 10, 64] {
            let incomes = vec![Rational::from(5); n];
            let curve = lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap();
            let report = gini(&curve);
            assert_eq!(report.g, Rational::from((-1i64, n as i64)));
        }
    }

    #[test]
    fn single_holder_gini_is_exactly_one_minus_two_over_n() {
        for n in [2usize, 5, 33] {
            let mut incomes = vec![Rational::new(); n];
            incomes[n / 2] = Rational::from(7);
            let curve = lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap();
            let report = gini(&curve);
            let expect = Rational::from(1) - Rational::from((2i64, n as i64));
            assert_eq!(report.g, expect);
        }
    }

    #[test]
    fn area_and_rank_forms_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..200);
            let incomes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
            let curve = lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap();
            let area = gini(&curve).g;
            let rank = gini_rank_form(&incomes, None).unwrap();
            assert!((area - rank).abs() < 1e-12, "area={area} rank={rank}");
        }
    }

    #[test]
    fn strict_threshold_semantics() {
        let incomes = vec![Rational::from(0), Rational::from(1), Rational::from(2)];
        let zero = Rational::new();
        let curve = lorenz(WealthVariant::VolumeIn, &incomes, Some(&zero)).unwrap();
        // income > 0 keeps exactly {1, 2}.
        assert_eq!(curve.n_effective, 2);
        let one = Rational::from(1);
        let curve = lorenz(WealthVariant::VolumeIn, &incomes, Some(&one)).unwrap();
        assert_eq!(curve.n_effective, 1);
        let high = Rational::from(10);
        assert!(matches!(
            lorenz(WealthVariant::VolumeIn, &incomes, Some(&high)),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn gini_invariances() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let incomes: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..10.0)).collect();
        let base = gini(&lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap()).g;
        // Positive rescaling.
        let scaled: Vec<f64> = incomes.iter().map(|x| x * 17.5).collect();
        let g2 = gini(&lorenz(WealthVariant::VolumeIn, &scaled, None).unwrap()).g;
        assert!((base - g2).abs() < 1e-12);
        // Permutation.
        let mut shuffled = incomes.clone();
        shuffled.shuffle(&mut rng);
        let g3 = gini(&lorenz(WealthVariant::VolumeIn, &shuffled, None).unwrap()).g;
        assert!((base - g3).abs() < 1e-12);
        // Adding a zero-income node never decreases g.
        let mut padded = incomes.clone();
        padded.push(0.0);
        let g4 = gini(&lorenz(WealthVariant::VolumeIn, &padded, None).unwrap()).g;
        assert!(g4 >= base - 1e-12);
    }

    #[test]
    fn volume_incomes_split_directions() {
        use crate::ingest::TransactionRecord;
        let records = vec![
            TransactionRecord {
                src: 1,
                dst: 2,
                time: 0,
                amount: Rational::from(3),
            },
            TransactionRecord {
                src: 2,
                dst: 1,
                time: 1,
                amount: Rational::from(1),
            },
        ];
        let snap = aggregate(&records, PeriodLabel::FULL).unwrap();
        let inflow = volume_incomes(&snap, Direction::Forward);
        let outflow = volume_incomes(&snap, Direction::Inverted);
        assert_eq!(inflow, vec![Rational::from(1), Rational::from(3)]);
        assert_eq!(outflow, vec![Rational::from(3), Rational::from(1)]);
    }

    #[test]
    fn timeline_handles_equal_volume_and_empty_periods() {
        use crate::period::Slice;
        // Equal in-volume across 4 nodes inside 2011Q4.
        let records: Vec<TransactionRecord> = (0..4u64)
            .map(|i| TransactionRecord {
                src: i,
                dst: (i + 1) % 4,
                time: 1317427200 + i as i64,
                amount: Rational::from(2),
            })
            .collect();
        let q4 = PeriodLabel::new(2011, Slice::Q4).unwrap();
        let q1 = PeriodLabel::new(2012, Slice::Q1).unwrap();
        let entries = gini_timeline(
            &records,
            &[q4, q1],
            WealthVariant::VolumeIn,
            0.85,
            None,
        )
        .unwrap();
        assert_eq!(entries.len(), 2);
        let report = entries[0].report.as_ref().unwrap();
        assert!((report.g - (-0.25)).abs() < 1e-12, "g={}", report.g);
        assert!(entries[1].report.is_none());
        assert!(entries[1].warning.is_some());
    }

    #[test]
    fn rank_variant_timeline_runs() {
        let records: Vec<TransactionRecord> = vec![
            (0u64, 1u64, 5i64),
            (1, 2, 3),
            (2, 0, 4),
            (0, 2, 1),
            (3, 0, 2),
        ]
        .into_iter()
        .enumerate()
        .map(|(i, (s, d, a))| TransactionRecord {
            src: s,
            dst: d,
            time: 1317427200 + i as i64,
            amount: Rational::from(a),
        })
        .collect();
        let q4 = PeriodLabel::new(2011, crate::period::Slice::Q4).unwrap();
        for variant in [WealthVariant::PageRank, WealthVariant::CheiRank] {
            let entries = gini_timeline(&records, &[q4], variant, 0.85, None).unwrap();
            let report = entries[0].report.as_ref().unwrap();
            assert!(report.g > -1.0 && report.g < 1.0);
            assert_eq!(report.n_effective, 4);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gini_scale_invariant(
                incomes in prop::collection::vec(0.0f64..1000.0, 2..60),
                scale in 0.001f64..1000.0,
            ) {
                prop_assume!(incomes.iter().sum::<f64>() > 0.0);
                let g1 = gini(&lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap()).g;
                let scaled: Vec<f64> = incomes.iter().map(|x| x * scale).collect();
                let g2 = gini(&lorenz(WealthVariant::VolumeIn, &scaled, None).unwrap()).g;
                prop_assert!((g1 - g2).abs() < 1e-9);
            }

            #[test]
            fn gini_stays_in_discrete_bounds(
                incomes in prop::collection::vec(0.0f64..1000.0, 2..60),
            ) {
                prop_assume!(incomes.iter().sum::<f64>() > 0.0);
                let n = incomes.len() as f64;
                let g = gini(&lorenz(WealthVariant::VolumeIn, &incomes, None).unwrap()).g;
                prop_assert!(g >= -1.0 / n - 1e-12);
                prop_assert!(g <= 1.0 - 2.0 / n + 1e-12);
            }
        }
    }
}
