//! Batch commands wiring ingestion, generation, matrices, spectra, ranks
//! and wealth analytics into reproducible CSV outputs. Every command writes
//! a manifest echoing the fully resolved configuration and input digests,
//! and is a pure function of (inputs, config) in deterministic mode.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::arnoldi::{
    assemble_spectrum, core_eigenvector_s, decay_widths, reliable_spectrum_s, ArnoldiConfig,
    StartVector,
};
use crate::error::{Error, Result};
use crate::gmatrix::{Direction, ExecMode, GoogleOperator, StochasticMatrix, DEFAULT_DENSE_CAP};
use crate::ingest::{
    aggregate, balance_ledger, degree_histograms, drop_self_loops, parse_transactions,
    powerlaw_fit, slice_period, volume_histogram, BaseUnitPolicy, Histogram, NetworkSnapshot,
    TransactionRecord,
};
use crate::netgen::{self, GeneratorConfig};
use crate::period::PeriodLabel;
use crate::ranks::{
    correlator, density_grid, eigenvector_profile, pagerank, rank_exponent_fit, RankKind,
    RankVector, DEFAULT_SATURATION,
};
use crate::subspaces::{find_invariant_subspaces, subspace_block_spectrum};
use crate::wealth::{gini, gini_timeline, lorenz, volume_incomes, WealthVariant};

/// Fully resolved run configuration; echoed into every output manifest.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Input edge-list path; `None` generates records instead.
    pub input: Option<PathBuf>,
    /// Generator size used when no input file is given.
    pub gen_nodes: usize,
    pub gen_link_ratio: f64,
    pub gen_degree_exponent: f64,
    pub base_unit: BaseUnitPolicy,
    pub period: Option<PeriodLabel>,
    /// Analyze every period covering the input instead of one label.
    pub all_periods: bool,
    pub drop_self_loops: bool,
    pub alpha: f64,
    pub precision_bits: u32,
    pub arnoldi_dim: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub exec: ExecMode,
    pub seed: u64,
    pub max_fraction: f64,
    pub dense_cap: usize,
    pub grid_cells: usize,
    /// Strict volume thresholds (BTC) for the Gini variants.
    pub gini_thresholds: Vec<f64>,
    /// Eigenvalues whose eigenvector profiles the spectrum command emits.
    pub eigenvectors: Vec<(f64, f64)>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            gen_nodes: 1000,
            gen_link_ratio: 2.5,
            gen_degree_exponent: 2.0,
            base_unit: BaseUnitPolicy::default(),
            period: None,
            all_periods: false,
            drop_self_loops: false,
            alpha: 0.85,
            precision_bits: 52,
            arnoldi_dim: 200,
            tol: 1e-12,
            max_iter: 10_000,
            exec: ExecMode::Deterministic,
            seed: 1,
            max_fraction: 0.1,
            dense_cap: DEFAULT_DENSE_CAP,
            grid_cells: 100,
            gini_thresholds: vec![0.0, 1.0],
            eigenvectors: Vec::new(),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputProvenance {
    pub source: String,
    pub sha256: String,
    pub records: usize,
}

#[derive(Serialize)]
struct ManifestConfig {
    base_unit: String,
    period: String,
    all_periods: bool,
    drop_self_loops: bool,
    alpha: f64,
    precision_bits: u32,
    arnoldi_dim: usize,
    tol: f64,
    max_iter: usize,
    exec: String,
    seed: u64,
    max_fraction: f64,
    dense_cap: usize,
    grid_cells: usize,
    gini_thresholds: Vec<f64>,
    eigenvectors: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    input: InputProvenance,
    config: ManifestConfig,
    outputs: Vec<String>,
    notes: Vec<String>,
}

impl RunConfig {
    fn manifest_config(&self) -> ManifestConfig {
        ManifestConfig {
            base_unit: match &self.base_unit {
                BaseUnitPolicy::Fixed(u) => format!("fixed:{u}"),
                BaseUnitPolicy::Era { switch_time } => format!("era:{switch_time}"),
            },
            period: self
                .period
                .map(|p| p.to_string())
                .unwrap_or_else(|| "FULL".into()),
            all_periods: self.all_periods,
            drop_self_loops: self.drop_self_loops,
            alpha: self.alpha,
            precision_bits: self.precision_bits,
            arnoldi_dim: self.arnoldi_dim,
            tol: self.tol,
            max_iter: self.max_iter,
            exec: match self.exec {
                ExecMode::Deterministic => "deterministic".into(),
                ExecMode::Parallel { shards } => format!("parallel:{shards}"),
            },
            seed: self.seed,
            max_fraction: self.max_fraction,
            dense_cap: self.dense_cap,
            grid_cells: self.grid_cells,
            gini_thresholds: self.gini_thresholds.clone(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    pub fn arnoldi_config(&self) -> ArnoldiConfig {
        ArnoldiConfig {
            n_a: self.arnoldi_dim,
            precision_bits: self.precision_bits,
            breakoff_epsilon: None,
            start: StartVector::Uniform,
            exec: self.exec,
        }
    }
}

/// Loads records from the input file or generates them deterministically.
pub fn load_records(config: &RunConfig) -> Result<(Vec<TransactionRecord>, InputProvenance)> {
    let (mut records, provenance) = match &config.input {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read input {}: {e}", path.display()))
            })?;
            let records = parse_transactions(bytes.as_slice(), &config.base_unit)?;
            if records.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "input file {} holds no records",
                    path.display()
                )));
            }
            let sha = hex_digest(&bytes);
            (
                records,
                InputProvenance {
                    source: path.display().to_string(),
                    sha256: sha,
                    records: 0,
                },
            )
        }
        None => {
            let gen = GeneratorConfig {
                seed: config.seed,
                target_nodes: config.gen_nodes,
                target_link_ratio: config.gen_link_ratio,
                degree_exponent: config.gen_degree_exponent,
                ..Default::default()
            };
            let records = netgen::generate(&gen)?;
            let text = netgen::to_edge_list(&records);
            (
                records,
                InputProvenance {
                    source: format!("generated:seed={}:nodes={}", config.seed, config.gen_nodes),
                    sha256: hex_digest(text.as_bytes()),
                    records: 0,
                },
            )
        }
    };
    if config.drop_self_loops {
        records = drop_self_loops(&records);
    }
    let provenance = InputProvenance {
        records: records.len(),
        ..provenance
    };
    Ok((records, provenance))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn selected_periods(config: &RunConfig, records: &[TransactionRecord]) -> Vec<PeriodLabel> {
    if config.all_periods {
        let t_min = records.iter().map(|r| r.time).min().unwrap_or(0);
        let t_max = records.iter().map(|r| r.time).max().unwrap_or(0);
        PeriodLabel::covering(t_min, t_max)
    } else {
        vec![config.period.unwrap_or(PeriodLabel::FULL)]
    }
}

fn snapshot_for(
    config: &RunConfig,
    records: &[TransactionRecord],
) -> Result<(NetworkSnapshot, PeriodLabel)> {
    let period = config.period.unwrap_or(PeriodLabel::FULL);
    let slice = slice_period(records, period);
    if slice.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    Ok((aggregate(&slice, period)?, period))
}

/// Exact decimal rendering of a rational whose denominator divides a power
/// of ten (always true for base-unit amounts); falls back to `num/den`.
pub fn rational_decimal(r: &rug::Rational) -> String {
    use rug::ops::Pow;
    use rug::Integer;
    let mut den = r.denom().clone();
    if den == 1 {
        return r.numer().to_string();
    }
    let mut twos = 0u32;
    while den.is_divisible_u(2) {
        den /= 2;
        twos += 1;
    }
    let mut fives = 0u32;
    while den.is_divisible_u(5) {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return r.to_string(); // exact fraction form
    }
    let digits = twos.max(fives);
    let scale = Integer::from(10).pow(digits);
    let scaled = Integer::from(r.numer() * &scale) / r.denom();
    let neg = scaled < 0;
    let mut body = scaled.abs().to_string();
    while body.len() <= digits as usize {
        body.insert(0, '0');
    }
    body.insert(body.len() - digits as usize, '.');
    let trimmed = body.trim_end_matches('0').trim_end_matches('.');
    format!("{}{}", if neg { "-" } else { "" }, trimmed)
}

struct OutputSet<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> OutputSet<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        self.write_with_comments(name, &[], header, rows)
    }

    fn write_with_comments(
        &mut self,
        name: &str,
        comments: &[String],
        header: &str,
        rows: &[String],
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{row}")?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    fn finish(
        mut self,
        command: &str,
        config: &RunConfig,
        input: &InputProvenance,
        notes: Vec<String>,
    ) -> Result<Vec<String>> {
        let manifest = Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input: input.clone(),
            config: config.manifest_config(),
            outputs: {
                let mut o = self.written.clone();
                o.push("manifest.json".into());
                o
            },
            notes,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
        fs::write(self.dir.join("manifest.json"), json + "\n")?;
        self.written.push("manifest.json".into());
        Ok(self.written)
    }
}

fn histogram_rows(h: &Histogram) -> Vec<String> {
    h.bins
        .iter()
        .map(|&(label, count)| format!("{},{}", h.bin_value(label), count))
        .collect()
}

/// Snapshot summaries, degree/volume/balance histograms, power-law fits.
pub fn cmd_stats(config: &RunConfig) -> Result<Vec<String>> {
    let (records, input) = load_records(config)?;
    let mut out = OutputSet::new(&config.out_dir)?;
    let periods = selected_periods(config, &records);

    let mut summary_rows = Vec::new();
    for &period in &periods {
        let slice = slice_period(&records, period);
        if slice.is_empty() {
            continue;
        }
        let snap = aggregate(&slice, period)?;
        summary_rows.push(format!(
            "{},{},{},{},{},{}",
            period,
            snap.node_count(),
            snap.link_count(),
            rational_decimal(&snap.total_volume),
            snap.time_span.0,
            snap.time_span.1
        ));
    }
    if summary_rows.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    out.write(
        "summary.csv",
        "period,N,N_links,total_volume,t_min,t_max",
        &summary_rows,
    )?;

    // Detailed statistics for the selected (or FULL) period.
    let (snap, _) = snapshot_for(config, &records)?;
    let slice = slice_period(&records, config.period.unwrap_or(PeriodLabel::FULL));
    let degrees = degree_histograms(&snap, &slice);
    out.write("degree_out.csv", "bin,count", &histogram_rows(&degrees.out_transactions))?;
    out.write("degree_in.csv", "bin,count", &histogram_rows(&degrees.in_transactions))?;
    out.write("degree_pair.csv", "bin,count", &histogram_rows(&degrees.pair_transactions))?;
    out.write("partners_out.csv", "bin,count", &histogram_rows(&degrees.out_partners))?;
    out.write("partners_in.csv", "bin,count", &histogram_rows(&degrees.in_partners))?;
    let vol = volume_histogram(&slice);
    out.write("volume_hist.csv", "bin,count", &histogram_rows(&vol))?;

    let ledger = balance_ledger(&slice);
    let rows: Vec<String> = ledger
        .entries
        .iter()
        .map(|(id, b)| format!("{},{}", id, rational_decimal(b)))
        .collect();
    out.write("balance.csv", "node,balance", &rows)?;

    let mut fit_rows = Vec::new();
    for (name, h) in [
        ("degree_out", &degrees.out_transactions),
        ("degree_in", &degrees.in_transactions),
        ("degree_pair", &degrees.pair_transactions),
    ] {
        match powerlaw_fit(h, 1.0, 1e6) {
            Ok((beta, err)) => fit_rows.push(format!("{name},{beta},{err}")),
            Err(_) => fit_rows.push(format!("{name},,")),
        }
    }
    out.write("powerlaw_fits.csv", "histogram,exponent,stderr", &fit_rows)?;

    out.finish("stats", config, &input, Vec::new())
}

fn compute_rank(
    snapshot: &NetworkSnapshot,
    direction: Direction,
    config: &RunConfig,
) -> Result<RankVector> {
    let s = StochasticMatrix::build_s0(snapshot, direction);
    let op = GoogleOperator::new(s.realize::<f64>(52), config.alpha)?;
    let kind = match direction {
        Direction::Forward => RankKind::PageRank,
        Direction::Inverted => RankKind::CheiRank,
    };
    pagerank(&op, kind, config.tol, config.max_iter, config.exec)
}

fn rank_rows(rank: &RankVector, snapshot: &NetworkSnapshot) -> Vec<String> {
    rank.order
        .iter()
        .enumerate()
        .map(|(pos, &node)| {
            format!(
                "{},{},{}",
                snapshot.original_ids[node],
                pos + 1,
                rank.probabilities[node]
            )
        })
        .collect()
}

/// PageRank/CheiRank CSVs, rank-decay fits, density grid, correlator.
pub fn cmd_rank(config: &RunConfig) -> Result<Vec<String>> {
    let (records, input) = load_records(config)?;
    let (snap, _) = snapshot_for(config, &records)?;
    let mut out = OutputSet::new(&config.out_dir)?;

    let p = compute_rank(&snap, Direction::Forward, config)?;
    let p_star = compute_rank(&snap, Direction::Inverted, config)?;
    out.write("pagerank.csv", "node_id,K,P", &rank_rows(&p, &snap))?;
    out.write("cheirank.csv", "node_id,K,P", &rank_rows(&p_star, &snap))?;

    // Fit over the paper's default window clipped to the network size.
    let k_lo = 10usize.min(snap.node_count().saturating_sub(2)).max(1);
    let k_hi = 100_000usize.min(snap.node_count());
    let mut fit_rows = Vec::new();
    for (rank, name) in [(&p, "pagerank"), (&p_star, "cheirank")] {
        match rank_exponent_fit(rank, k_lo, k_hi) {
            Ok((nu, err)) => fit_rows.push(format!("{name},{nu},{err},{k_lo},{k_hi}")),
            Err(_) => fit_rows.push(format!("{name},,,{k_lo},{k_hi}")),
        }
    }
    out.write("rank_exponents.csv", "kind,nu,stderr,k_lo,k_hi", &fit_rows)?;

    let grid = density_grid(&p, &p_star, config.grid_cells, DEFAULT_SATURATION)?;
    let g = grid.g;
    let rows: Vec<String> = (0..g * g)
        .filter(|i| grid.counts[*i] > 0)
        .map(|i| format!("{},{},{}", i / g, i % g, grid.weights[i]))
        .collect();
    out.write("grid.csv", "row,col,weight", &rows)?;
    let rows: Vec<String> = (0..g * g)
        .filter(|i| grid.counts[*i] > 0)
        .map(|i| format!("{},{},{}", i / g, i % g, grid.display[i]))
        .collect();
    out.write("grid_display.csv", "row,col,weight", &rows)?;

    let rep = correlator(&p, &p_star)?;
    let rows: Vec<String> = rep
        .components
        .iter()
        .enumerate()
        .map(|(node, k)| format!("{},{}", snap.original_ids[node], k))
        .collect();
    out.write_with_comments(
        "correlator.csv",
        &[format!("kappa = {}", rep.kappa)],
        "node_id,kappa_i",
        &rows,
    )?;
    let rows: Vec<String> = rep
        .histogram
        .iter()
        .map(|(lo, c)| format!("{lo},{c}"))
        .collect();
    out.write("kappa_hist.csv", "bin_lo,count", &rows)?;

    out.finish("rank", config, &input, Vec::new())
}

/// Subspace report, subspace/core spectra, decay widths, optional
/// eigenvector profiles.
pub fn cmd_spectrum(config: &RunConfig) -> Result<Vec<String>> {
    let (records, input) = load_records(config)?;
    let (snap, _) = snapshot_for(config, &records)?;
    let mut out = OutputSet::new(&config.out_dir)?;
    let mut notes = Vec::new();

    let s = StochasticMatrix::build_s0(&snap, Direction::Forward);
    let dec = find_invariant_subspaces(&s, config.max_fraction);
    if dec.discarded_merged > 0 {
        notes.push(format!(
            "{} merged subspace(s) exceeded the size bound and were returned to the core",
            dec.discarded_merged
        ));
    }
    let rows: Vec<String> = dec
        .subsets
        .iter()
        .enumerate()
        .flat_map(|(si, nodes)| {
            let ids = &snap.original_ids;
            nodes
                .iter()
                .map(move |&v| format!("{},{}", si, ids[v]))
                .collect::<Vec<_>>()
        })
        .collect();
    out.write("subspaces.csv", "subset_index,node_id", &rows)?;

    let sub_spec = subspace_block_spectrum(&s, &dec, config.dense_cap, config.precision_bits)?;
    let rows: Vec<String> = sub_spec
        .per_subset
        .iter()
        .enumerate()
        .flat_map(|(si, evs)| {
            evs.iter()
                .map(move |&(re, im, m)| format!("{si},{re},{im},{m}"))
                .collect::<Vec<_>>()
        })
        .collect();
    out.write(
        "subspace_spectrum.csv",
        "subset_index,re,im,multiplicity",
        &rows,
    )?;

    let arnoldi_cfg = config.arnoldi_config();
    let core_spec = reliable_spectrum_s(&s, &arnoldi_cfg, config.seed ^ 0x5eed)?;
    let assembled = assemble_spectrum(&sub_spec, &core_spec);
    let comments = vec![
        format!(
            "n_A={} precision_bits={} breakoff_index={:?} reduced_dimension={}",
            core_spec.n_a,
            core_spec.precision_bits,
            core_spec.breakoff_index,
            core_spec.reduced_dimension
        ),
        format!("alpha=1 (spectrum of S), exec={:?}", config.exec),
    ];
    let rows: Vec<String> = assembled
        .eigenvalues
        .iter()
        .map(|e| format!("{},{},{},{}", e.re, e.im, e.origin, e.reliable))
        .collect();
    out.write_with_comments("spectrum.csv", &comments, "re,im,origin,reliable", &rows)?;

    let widths = decay_widths(&assembled);
    let rows: Vec<String> = widths
        .iter()
        .map(|(j, g)| format!("{j},{g}"))
        .collect();
    out.write("decay_widths.csv", "j,gamma", &rows)?;

    if !config.eigenvectors.is_empty() {
        let p = compute_rank(&snap, Direction::Forward, config)?;
        let p_star = compute_rank(&snap, Direction::Inverted, config)?;
        let k = p.rank_of_node();
        let k_star = p_star.rank_of_node();
        for (idx, &target) in config.eigenvectors.iter().enumerate() {
            let ev = core_eigenvector_s(&s, target, &arnoldi_cfg)?;
            let profile = eigenvector_profile(ev.lambda, ev.amplitudes());
            let local_rank = {
                let mut r = vec![0usize; snap.node_count()];
                for (pos, &node) in profile.local_order.iter().enumerate() {
                    r[node] = pos + 1;
                }
                r
            };
            let rows: Vec<String> = (0..snap.node_count())
                .map(|node| {
                    format!(
                        "{},{},{},{},{}",
                        snap.original_ids[node],
                        local_rank[node],
                        profile.amplitudes[node],
                        k[node],
                        k_star[node]
                    )
                })
                .collect();
            out.write_with_comments(
                &format!("eigenvector_{idx}.csv"),
                &[format!(
                    "lambda = {} + {}i, residual = {}",
                    ev.lambda.0, ev.lambda.1, ev.residual
                )],
                "node_id,K_j,amplitude,K,K_star",
                &rows,
            )?;
        }
    }

    out.finish("spectrum", config, &input, notes)
}

/// Lorenz curves and Gini coefficients for all four income variants plus a
/// per-period timeline.
pub fn cmd_gini(config: &RunConfig) -> Result<Vec<String>> {
    let (records, input) = load_records(config)?;
    let (snap, period) = snapshot_for(config, &records)?;
    let mut out = OutputSet::new(&config.out_dir)?;

    let mut gini_rows = Vec::new();

    // Volume variants at each configured strict threshold.
    for (variant, dir) in [
        (WealthVariant::VolumeIn, Direction::Forward),
        (WealthVariant::VolumeOut, Direction::Inverted),
    ] {
        let incomes = volume_incomes(&snap, dir);
        for &thr in &config.gini_thresholds {
            let thr_rational = rug::Rational::from(((thr * 1e8).round() as i64, 100_000_000i64));
            let curve = match lorenz(variant, &incomes, Some(&thr_rational)) {
                Ok(c) => c,
                Err(Error::EmptyPopulation) => continue,
                Err(e) => return Err(e),
            };
            let report = gini(&curve);
            gini_rows.push(format!(
                "{},{},{},{},{}",
                period,
                variant,
                thr,
                report.n_effective,
                report.g.to_f64()
            ));
            let rows: Vec<String> = curve
                .sigma
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    format!(
                        "{},{}",
                        (i + 1) as f64 / curve.n_effective as f64,
                        s.to_f64()
                    )
                })
                .collect();
            let name = format!("lorenz_{}_thr{}.csv", variant, thr);
            out.write(&name, "x,sigma", &rows)?;
        }
    }

    // Rank variants, unfiltered.
    for (variant, dir) in [
        (WealthVariant::PageRank, Direction::Forward),
        (WealthVariant::CheiRank, Direction::Inverted),
    ] {
        let rank = compute_rank(&snap, dir, config)?;
        let curve = lorenz(variant, &rank.probabilities, None)?;
        let report = gini(&curve);
        gini_rows.push(format!(
            "{},{},,{},{}",
            period, variant, report.n_effective, report.g
        ));
        let rows: Vec<String> = curve
            .sigma
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{},{}", (i + 1) as f64 / curve.n_effective as f64, s))
            .collect();
        out.write(&format!("lorenz_{variant}.csv"), "x,sigma", &rows)?;
    }
    out.write(
        "gini.csv",
        "period,variant,threshold,N_effective,g",
        &gini_rows,
    )?;

    // Timeline across all covering periods.
    let periods = {
        let t_min = records.iter().map(|r| r.time).min().unwrap_or(0);
        let t_max = records.iter().map(|r| r.time).max().unwrap_or(0);
        PeriodLabel::covering(t_min, t_max)
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for variant in [
        WealthVariant::VolumeIn,
        WealthVariant::VolumeOut,
        WealthVariant::PageRank,
        WealthVariant::CheiRank,
    ] {
        let entries = gini_timeline(&records, &periods, variant, config.alpha, None)?;
        for e in entries {
            match e.report {
                Some(r) => rows.push(format!(
                    "{},{},,{},{}",
                    e.period, variant, r.n_effective, r.g
                )),
                None => {
                    if let Some(w) = e.warning {
                        warnings.push(w);
                    }
                }
            }
        }
    }
    warnings.sort();
    warnings.dedup();
    out.write(
        "gini_timeline.csv",
        "period,variant,threshold,N_effective,g",
        &rows,
    )?;

    out.finish("gini", config, &input, warnings)
}

/// Emits a synthetic edge list in the ingest format.
pub fn cmd_generate(config: &RunConfig) -> Result<Vec<String>> {
    let gen = GeneratorConfig {
        seed: config.seed,
        target_nodes: config.gen_nodes,
        target_link_ratio: config.gen_link_ratio,
        degree_exponent: config.gen_degree_exponent,
        ..Default::default()
    };
    let records = netgen::generate(&gen)?;
    let text = netgen::to_edge_list(&records);
    fs::create_dir_all(&config.out_dir)?;
    let path = config.out_dir.join("edges.txt");
    fs::write(&path, &text)?;
    let input = InputProvenance {
        source: format!("generated:seed={}:nodes={}", config.seed, config.gen_nodes),
        sha256: hex_digest(text.as_bytes()),
        records: records.len(),
    };
    let mut out = OutputSet::new(&config.out_dir)?;
    out.written.push("edges.txt".into());
    out.finish("generate", config, &input, Vec::new())
}
