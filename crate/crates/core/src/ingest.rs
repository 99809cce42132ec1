//! Transaction-log ingestion: parsing, period slicing, aggregation into
//! weighted directed networks, and the global statistics derived from them.
//!
//! Amounts are kept as exact rationals (units of bitcoin) from the moment
//! they are parsed; downstream matrix construction inherits that exactness.

use std::collections::BTreeMap;
use std::io::BufRead;

use rug::Rational;

use crate::error::{Error, Result};
use crate::period::PeriodLabel;

/// One timestamped value transfer between two node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub src: u64,
    pub dst: u64,
    /// Unix seconds, UTC.
    pub time: i64,
    /// Exact amount in bitcoin; always positive.
    pub amount: Rational,
}

/// How raw integer base units convert to bitcoin.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseUnitPolicy {
    /// Every record uses the same base unit.
    Fixed(Rational),
    /// Records before `switch_time` use 10^-3 BTC units, later ones 10^-8.
    Era { switch_time: i64 },
}

/// Default era switch: 2010-03-01T00:00:00Z.
pub const DEFAULT_ERA_SWITCH: i64 = 1267401600;

pub fn unit_milli() -> Rational {
    Rational::from((1, 1000))
}

pub fn unit_satoshi() -> Rational {
    Rational::from((1, 100_000_000))
}

impl Default for BaseUnitPolicy {
    fn default() -> Self {
        BaseUnitPolicy::Era {
            switch_time: DEFAULT_ERA_SWITCH,
        }
    }
}

impl BaseUnitPolicy {
    /// Parses `fixed:1e-8`, `fixed:1e-3` or `era:<unix-seconds|YYYY-MM-DD>`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidConfig(format!("base-unit policy `{s}`: {msg}"));
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| bad("expected `fixed:<unit>` or `era:<switch>`"))?;
        match kind {
            "fixed" => {
                let unit = parse_power_of_ten(arg)
                    .ok_or_else(|| bad("unit must be a power of ten like 1e-8"))?;
                Ok(BaseUnitPolicy::Fixed(unit))
            }
            "era" => {
                if let Ok(t) = arg.parse::<i64>() {
                    return Ok(BaseUnitPolicy::Era { switch_time: t });
                }
                let date = chrono::NaiveDate::parse_from_str(arg, "%Y-%m-%d")
                    .map_err(|_| bad("switch must be unix seconds or YYYY-MM-DD"))?;
                let t = date
                    .and_hms_opt(0, 0, 0)
                    .expect("midnight exists")
                    .and_utc()
                    .timestamp();
                Ok(BaseUnitPolicy::Era { switch_time: t })
            }
            _ => Err(bad("unknown policy kind")),
        }
    }

    pub fn unit_at(&self, time: i64) -> Rational {
        match self {
            BaseUnitPolicy::Fixed(u) => u.clone(),
            BaseUnitPolicy::Era { switch_time } => {
                if time < *switch_time {
                    unit_milli()
                } else {
                    unit_satoshi()
                }
            }
        }
    }
}

fn parse_power_of_ten(s: &str) -> Option<Rational> {
    let s = s.trim();
    let exp: i32 = if let Some(rest) = s.strip_prefix("1e") {
        rest.parse().ok()?
    } else if let Some(rest) = s.strip_prefix("1E") {
        rest.parse().ok()?
    } else {
        return None;
    };
    let mut pow = Rational::from(1);
    let ten = Rational::from(10);
    for _ in 0..exp.abs() {
        pow *= &ten;
    }
    if exp < 0 {
        Some(Rational::from(1) / pow)
    } else {
        Some(pow)
    }
}

/// Parses an edge-list stream: one `src dst unix_time amount_in_base_units`
/// per line, space- or comma-separated. Lines starting with `#` and blank
/// lines are skipped. Input order is preserved.
pub fn parse_transactions<R: BufRead>(
    reader: R,
    policy: &BaseUnitPolicy,
) -> Result<Vec<TransactionRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        records.push(parse_line(trimmed, lineno, policy)?);
    }
    Ok(records)
}

fn parse_line(line: &str, lineno: usize, policy: &BaseUnitPolicy) -> Result<TransactionRecord> {
    let mut fields: Vec<&str> = if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    };
    fields.retain(|f| !f.is_empty());
    if fields.len() != 4 {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected 4 fields, got {}", fields.len()),
        });
    }
    let field = |i: usize, name: &str| -> Result<i128> {
        fields[i].parse::<i128>().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad {name} `{}`", fields[i]),
        })
    };
    let src = field(0, "src id")?;
    let dst = field(1, "dst id")?;
    if src < 0 || dst < 0 {
        return Err(Error::Parse {
            line: lineno,
            msg: "node ids must be non-negative".into(),
        });
    }
    let time = field(2, "timestamp")? as i64;
    let units = field(3, "amount")?;
    if units <= 0 {
        return Err(Error::RejectedRecord {
            line: lineno,
            reason: format!("non-positive amount {units}"),
        });
    }
    let amount = Rational::from(units) * policy.unit_at(time);
    Ok(TransactionRecord {
        src: src as u64,
        dst: dst as u64,
        time,
        amount,
    })
}

/// Keeps exactly the records whose timestamp falls inside the period
/// (`[start, end)` in UTC; FULL keeps everything).
pub fn slice_period(records: &[TransactionRecord], period: PeriodLabel) -> Vec<TransactionRecord> {
    records
        .iter()
        .filter(|r| period.contains(r.time))
        .cloned()
        .collect()
}

pub fn drop_self_loops(records: &[TransactionRecord]) -> Vec<TransactionRecord> {
    records.iter().filter(|r| r.src != r.dst).cloned().collect()
}

/// Aggregated weighted directed network for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub period: PeriodLabel,
    /// Dense index -> original node id; sorted ascending.
    pub original_ids: Vec<u64>,
    /// `(src_index, dst_index, summed weight)` sorted by (src, dst).
    pub edges: Vec<(u32, u32, Rational)>,
    pub total_volume: Rational,
    /// Actual `[min, max]` record timestamps.
    pub time_span: (i64, i64),
}

impl NetworkSnapshot {
    pub fn node_count(&self) -> usize {
        self.original_ids.len()
    }

    pub fn link_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, original_id: u64) -> Option<usize> {
        self.original_ids.binary_search(&original_id).ok()
    }
}

/// Sums per-ordered-pair transfers into a snapshot. Node ids are re-indexed
/// densely in ascending original-id order, so the result is independent of
/// record order.
pub fn aggregate(records: &[TransactionRecord], period: PeriodLabel) -> Result<NetworkSnapshot> {
    if records.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut ids: Vec<u64> = Vec::with_capacity(records.len() * 2);
    for r in records {
        ids.push(r.src);
        ids.push(r.dst);
    }
    ids.sort_unstable();
    ids.dedup();

    let index_of = |id: u64| ids.binary_search(&id).expect("id collected above") as u32;

    let mut edges: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    let mut total = Rational::new();
    let mut t_min = i64::MAX;
    let mut t_max = i64::MIN;
    for r in records {
        let key = (index_of(r.src), index_of(r.dst));
        *edges.entry(key).or_insert_with(Rational::new) += &r.amount;
        total += &r.amount;
        t_min = t_min.min(r.time);
        t_max = t_max.max(r.time);
    }

    Ok(NetworkSnapshot {
        period,
        original_ids: ids,
        edges: edges.into_iter().map(|((s, d), w)| (s, d, w)).collect(),
        total_volume: total,
        time_span: (t_min, t_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    Integer,
    /// Equidistant in log10 with the given width; bin `i` covers
    /// `[10^(w*i), 10^(w*(i+1)))`.
    Log10 { width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub binning: Binning,
    /// `(bin label, count)` sorted by label.
    pub bins: Vec<(i64, u64)>,
}

impl Histogram {
    pub fn from_integer_values<I: IntoIterator<Item = u64>>(values: I) -> Histogram {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for v in values {
            *counts.entry(v as i64).or_insert(0) += 1;
        }
        Histogram {
            binning: Binning::Integer,
            bins: counts.into_iter().collect(),
        }
    }

    /// Log10-equidistant binning of positive values.
    pub fn from_log10_values<I: IntoIterator<Item = f64>>(values: I, width: f64) -> Histogram {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for v in values {
            *counts.entry(log10_bin(v, width)).or_insert(0) += 1;
        }
        Histogram {
            binning: Binning::Log10 { width },
            bins: counts.into_iter().collect(),
        }
    }

    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|&(_, c)| c).sum()
    }

    /// Representative value of a bin (the integer itself, or the lower edge
    /// of a log bin).
    pub fn bin_value(&self, label: i64) -> f64 {
        match self.binning {
            Binning::Integer => label as f64,
            Binning::Log10 { width } => 10f64.powf(width * label as f64),
        }
    }
}

/// Bin index with a small upward nudge so values sitting exactly on an edge
/// (e.g. 10^-8 under width 0.2) land in the bin whose lower edge they are.
pub fn log10_bin(value: f64, width: f64) -> i64 {
    debug_assert!(value > 0.0 && width > 0.0);
    (value.log10() / width + 1e-9).floor() as i64
}

/// Per-node transaction-count and per-pair repeat-count histograms.
pub struct DegreeHistograms {
    /// Outgoing transactions per active source node.
    pub out_transactions: Histogram,
    /// Ingoing transactions per active destination node.
    pub in_transactions: Histogram,
    /// Repeated transactions per ordered (src, dst) pair.
    pub pair_transactions: Histogram,
    /// Distinct destination partners per source (auxiliary view).
    pub out_partners: Histogram,
    /// Distinct source partners per destination (auxiliary view).
    pub in_partners: Histogram,
}

pub fn degree_histograms(
    snapshot: &NetworkSnapshot,
    records: &[TransactionRecord],
) -> DegreeHistograms {
    let mut out_tx: BTreeMap<u64, u64> = BTreeMap::new();
    let mut in_tx: BTreeMap<u64, u64> = BTreeMap::new();
    let mut pair_tx: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for r in records {
        *out_tx.entry(r.src).or_insert(0) += 1;
        *in_tx.entry(r.dst).or_insert(0) += 1;
        *pair_tx.entry((r.src, r.dst)).or_insert(0) += 1;
    }
    let mut out_partners: BTreeMap<u32, u64> = BTreeMap::new();
    let mut in_partners: BTreeMap<u32, u64> = BTreeMap::new();
    for &(s, d, _) in &snapshot.edges {
        *out_partners.entry(s).or_insert(0) += 1;
        *in_partners.entry(d).or_insert(0) += 1;
    }
    DegreeHistograms {
        out_transactions: Histogram::from_integer_values(out_tx.into_values()),
        in_transactions: Histogram::from_integer_values(in_tx.into_values()),
        pair_transactions: Histogram::from_integer_values(pair_tx.into_values()),
        out_partners: Histogram::from_integer_values(out_partners.into_values()),
        in_partners: Histogram::from_integer_values(in_partners.into_values()),
    }
}

/// Histogram of per-transaction volume, log10 bins of width 0.2.
pub fn volume_histogram(records: &[TransactionRecord]) -> Histogram {
    Histogram::from_log10_values(records.iter().map(|r| r.amount.to_f64()), 0.2)
}

/// Per-node in-flow minus out-flow, exact.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceLedger {
    /// `(original id, balance)` sorted by id.
    pub entries: Vec<(u64, Rational)>,
}

impl BalanceLedger {
    pub fn sum(&self) -> Rational {
        let mut s = Rational::new();
        for (_, b) in &self.entries {
            s += b;
        }
        s
    }
}

pub fn balance_ledger(records: &[TransactionRecord]) -> BalanceLedger {
    let mut balances: BTreeMap<u64, Rational> = BTreeMap::new();
    for r in records {
        *balances.entry(r.src).or_insert_with(Rational::new) -= &r.amount;
        *balances.entry(r.dst).or_insert_with(Rational::new) += &r.amount;
    }
    BalanceLedger {
        entries: balances.into_iter().collect(),
    }
}

/// Unweighted least-squares fit of `log count` vs `log value` over populated
/// bins with value in `[lo, hi]`. Returns `(exponent, std_error)` with the
/// exponent reported positive for decaying data.
pub fn powerlaw_fit(histogram: &Histogram, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = histogram
        .bins
        .iter()
        .filter(|&&(label, count)| count > 0 && {
            let v = histogram.bin_value(label);
            v >= lo && v <= hi && v > 0.0
        })
        .map(|&(label, count)| (histogram.bin_value(label).ln(), (count as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let (slope, stderr) = least_squares_slope(&pts);
    Ok((-slope, stderr))
}

/// OLS slope and its standard error for `(x, y)` points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    if pts.len() == 2 {
        return (slope, 0.0);
    }
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    (slope, stderr)
}
