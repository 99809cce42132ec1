//! Synthetic transaction-record generator: preferential attachment on both
//! in- and out-stubs with a uniform-attachment mixing knob, heavy-tailed
//! amounts, uniform timestamps. Deterministic for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rug::Rational;

use crate::error::{Error, Result};
use crate::ingest::{unit_satoshi, TransactionRecord};

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub target_nodes: usize,
    /// Desired ratio of distinct weighted links to nodes.
    pub target_link_ratio: f64,
    pub degree_exponent: f64,
    /// Log-uniform amount range in bitcoin.
    pub amount_range: (f64, f64),
    /// Timestamps drawn uniformly from `[start, end)`.
    pub time_span: (i64, i64),
    /// Probability of attaching uniformly instead of preferentially.
    /// `None` derives it from `degree_exponent`.
    pub uniform_mixing: Option<f64>,
    /// Probability that an iteration re-emits an existing pair instead of
    /// sampling a new one (feeds the repeated-transaction tail).
    pub repeat_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            target_nodes: 1000,
            target_link_ratio: 2.5,
            degree_exponent: 2.0,
            amount_range: (1e-4, 1e3),
            // Calendar year 2011.
            time_span: (1293840000, 1325376000),
            uniform_mixing: None,
            repeat_fraction: 0.2,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_nodes < 2 {
            return Err(Error::InvalidConfig("target_nodes must be >= 2".into()));
        }
        if self.target_link_ratio < 1.0 {
            return Err(Error::InvalidConfig(
                "target_link_ratio below 1 cannot keep every node connected".into(),
            ));
        }
        if self.degree_exponent <= 1.0 {
            return Err(Error::InvalidConfig("degree_exponent must exceed 1".into()));
        }
        if self.amount_range.0 <= 0.0 || self.amount_range.1 < self.amount_range.0 {
            return Err(Error::InvalidConfig("bad amount range".into()));
        }
        if self.time_span.1 <= self.time_span.0 {
            return Err(Error::InvalidConfig("empty time span".into()));
        }
        let max_pairs = (self.target_nodes as f64).powi(2);
        if self.target_link_ratio * self.target_nodes as f64 > max_pairs {
            return Err(Error::InvalidConfig("link ratio exceeds N^2 pairs".into()));
        }
        Ok(())
    }

    /// Uniform-attachment probability: a pure stub bag yields a tail
    /// exponent near 2, and mixing in uniform attachment softens it upward,
    /// roughly beta = 1 + 1/(1 - u).
    fn mixing(&self) -> f64 {
        match self.uniform_mixing {
            Some(u) => u,
            None => (1.0 - 1.0 / (self.degree_exponent - 1.0)).clamp(0.05, 0.9),
        }
    }
}

/// Deterministically generates a record list whose aggregated network has
/// `target_nodes` nodes and `round(ratio * N)` distinct weighted links.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<TransactionRecord>> {
    config.validate()?;
    let n = config.target_nodes;
    let target_links = (config.target_link_ratio * n as f64).round() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    // Endpoint bags: picking a uniform element of a bag realizes
    // linear preferential attachment. The attachment strength relative to
    // the uniform floor tunes the tail exponent.
    let mut out_bag: Vec<u32> = Vec::new();
    let mut in_bag: Vec<u32> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut seen = std::collections::HashSet::<(u32, u32)>::new();

    let push_pair = |s: u32,
                         d: u32,
                         pairs: &mut Vec<(u32, u32)>,
                         seen: &mut std::collections::HashSet<(u32, u32)>,
                         out_bag: &mut Vec<u32>,
                         in_bag: &mut Vec<u32>| {
        out_bag.push(s);
        in_bag.push(d);
        if seen.insert((s, d)) {
            pairs.push((s, d));
        }
    };

    let mixing = config.mixing();

    // Connectivity pass: node i joins by one edge to the prefix, so every
    // node of [0, n) appears in the final network.
    for i in 1..n as u32 {
        if rng.gen_bool(0.5) {
            let partner = sample_stub(&mut rng, i, &in_bag, mixing);
            push_pair(i, partner, &mut pairs, &mut seen, &mut out_bag, &mut in_bag);
        } else {
            let partner = sample_stub(&mut rng, i, &out_bag, mixing);
            push_pair(partner, i, &mut pairs, &mut seen, &mut out_bag, &mut in_bag);
        }
    }

    // Fill to the distinct-link target; occasional repeats thicken the
    // per-pair transaction counts without advancing the distinct count.
    let mut repeats: Vec<(u32, u32)> = Vec::new();
    let cap = 200 * target_links + 1000;
    let mut attempts = 0usize;
    while pairs.len() < target_links {
        attempts += 1;
        if attempts > cap {
            return Err(Error::InvalidConfig(format!(
                "generator stalled before reaching {target_links} links"
            )));
        }
        if !pairs.is_empty() && rng.gen_bool(config.repeat_fraction) {
            let idx = rng.gen_range(0..pairs.len());
            repeats.push(pairs[idx]);
            continue;
        }
        let s = sample_stub(&mut rng, n as u32, &out_bag, mixing);
        let d = sample_stub(&mut rng, n as u32, &in_bag, mixing);
        push_pair(s, d, &mut pairs, &mut seen, &mut out_bag, &mut in_bag);
    }

    // Materialize records: one per emitted pair occurrence.
    let satoshi = unit_satoshi();
    let (lo, hi) = config.amount_range;
    let (t0, t1) = config.time_span;
    let mut all: Vec<(u32, u32)> = pairs.clone();
    all.extend_from_slice(&repeats);
    let mut records: Vec<TransactionRecord> = all
        .into_iter()
        .map(|(s, d)| {
            let exp = rng.gen_range(lo.log10()..=hi.log10());
            let units = (10f64.powf(exp) * 1e8).round().max(1.0) as i64;
            TransactionRecord {
                src: s as u64,
                dst: d as u64,
                time: rng.gen_range(t0..t1),
                amount: Rational::from(units) * satoshi.clone(),
            }
        })
        .collect();
    records.sort_by_key(|r| (r.time, r.src, r.dst));
    Ok(records)
}

/// Draws an endpoint among nodes `[0, limit)`: uniformly with probability
/// `mixing`, otherwise a uniform element of the stub bag (which realizes
/// linear preferential attachment).
fn sample_stub(rng: &mut ChaCha12Rng, limit: u32, bag: &[u32], mixing: f64) -> u32 {
    debug_assert!(limit >= 1);
    if limit == 1 {
        return 0;
    }
    if !bag.is_empty() && !rng.gen_bool(mixing) {
        let v = bag[rng.gen_range(0..bag.len())];
        if v < limit {
            return v;
        }
    }
    rng.gen_range(0..limit)
}

/// Serializes records in the ingest edge-list format using 10^-8 base units.
pub fn to_edge_list(records: &[TransactionRecord]) -> String {
    let satoshi = unit_satoshi();
    let mut out = String::with_capacity(records.len() * 32);
    for r in records {
        let units = Rational::from(&r.amount / &satoshi);
        debug_assert!(units.is_integer());
        out.push_str(&format!(
            "{} {} {} {}\n",
            r.src,
            r.dst,
            r.time,
            units.numer()
        ));
    }
    out
}
