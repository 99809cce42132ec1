//! Invariant-subspace detection and the block-triangular split it induces.
//!
//! A node set is invariant when following links never leaves it; reaching a
//! dangling node disqualifies a closure because the dangling completion
//! couples that column to every node. Detection runs on the strongly
//! connected component condensation so closures are computed once per
//! component, with early abort at the size bound.

use rug::Rational;

use crate::error::{Error, Result};
use crate::gmatrix::StochasticMatrix;
use crate::linalg::{eig_dense, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDecomposition {
    /// Disjoint invariant node sets, each sorted, ordered by smallest node.
    pub subsets: Vec<Vec<usize>>,
    /// Complement of the union of subsets, sorted.
    pub core: Vec<usize>,
    pub max_fraction: f64,
    /// Merged candidate unions discarded for exceeding the size bound.
    pub discarded_merged: usize,
}

impl SubspaceDecomposition {
    pub fn subspace_node_count(&self) -> usize {
        self.subsets.iter().map(Vec::len).sum()
    }
}

/// Iterative Tarjan SCC; returns per-node component id, components indexed
/// in discovery order.
fn tarjan_scc(adj: &[Vec<u32>]) -> (Vec<u32>, usize) {
    let n = adj.len();
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut n_comp = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNSET {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            let vu = v as usize;
            if *ei < adj[vu].len() {
                let w = adj[vu][*ei];
                *ei += 1;
                let wu = w as usize;
                if index[wu] == UNSET {
                    index[wu] = next_index;
                    low[wu] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wu] = true;
                    call.push((w, 0));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
            } else {
                if low[vu] == index[vu] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w as usize] = false;
                        comp[w as usize] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let pu = parent as usize;
                    low[pu] = low[pu].min(low[vu]);
                }
            }
        }
    }
    (comp, n_comp as usize)
}

struct DetectionInput {
    /// Successor lists (S0 links).
    adj: Vec<Vec<u32>>,
    /// Nodes whose presence in a closure disqualifies it (dangling, and in
    /// restricted reruns also leaky columns).
    disqualifying: Vec<bool>,
}

fn detect(input: &DetectionInput, max_fraction: f64) -> SubspaceDecomposition {
    let n = input.adj.len();
    let cap = (max_fraction * n as f64).floor() as usize;
    let (comp, n_comp) = tarjan_scc(&input.adj);

    // Component sizes, members, bad flags and condensation successors.
    let mut comp_size = vec![0usize; n_comp];
    let mut comp_bad = vec![false; n_comp];
    for v in 0..n {
        let c = comp[v] as usize;
        comp_size[c] += 1;
        if input.disqualifying[v] {
            comp_bad[c] = true;
        }
    }
    let mut comp_succ: Vec<Vec<u32>> = vec![Vec::new(); n_comp];
    for v in 0..n {
        let cv = comp[v];
        for &w in &input.adj[v] {
            let cw = comp[w as usize];
            if cw != cv {
                comp_succ[cv as usize].push(cw);
            }
        }
    }
    for succ in comp_succ.iter_mut() {
        succ.sort_unstable();
        succ.dedup();
    }

    // Per-component closure with memoized disqualification and union-find
    // merging of overlapping accepted closures.
    const UNKNOWN: u8 = 0;
    const BAD: u8 = 1;
    const ACCEPTED: u8 = 2;
    let mut status = vec![UNKNOWN; n_comp];
    let mut parent: Vec<u32> = (0..n_comp as u32).collect();

    fn find(parent: &mut [u32], x: u32) -> u32 {
        let mut r = x;
        while parent[r as usize] != r {
            r = parent[r as usize];
        }
        let mut c = x;
        while parent[c as usize] != r {
            let next = parent[c as usize];
            parent[c as usize] = r;
            c = next;
        }
        r
    }

    let mut visited_mark = vec![u32::MAX; n_comp];
    for start in 0..n_comp as u32 {
        if status[start as usize] != UNKNOWN {
            continue;
        }
        // BFS over the condensation, accumulating node mass.
        let mut queue = vec![start];
        visited_mark[start as usize] = start;
        let mut reached: Vec<u32> = vec![start];
        let mut mass = comp_size[start as usize];
        let mut bad = comp_bad[start as usize] || mass > cap;
        let mut qi = 0;
        while qi < queue.len() && !bad {
            let c = queue[qi];
            qi += 1;
            for &s in &comp_succ[c as usize] {
                if visited_mark[s as usize] == start {
                    continue;
                }
                visited_mark[s as usize] = start;
                if status[s as usize] == BAD || comp_bad[s as usize] {
                    bad = true;
                    break;
                }
                mass += comp_size[s as usize];
                if mass > cap {
                    bad = true;
                    break;
                }
                queue.push(s);
                reached.push(s);
            }
        }
        if bad {
            status[start as usize] = BAD;
        } else {
            // The closure and every component inside it are invariant;
            // overlapping closures merge through the shared components.
            for &c in &reached {
                status[c as usize] = ACCEPTED;
                let ra = find(&mut parent, start);
                let rb = find(&mut parent, c);
                if ra != rb {
                    parent[rb as usize] = ra;
                }
            }
        }
    }

    // Gather merged groups, discard unions that exceed the bound.
    let mut group_nodes: std::collections::BTreeMap<u32, Vec<usize>> =
        std::collections::BTreeMap::new();
    for v in 0..n {
        let c = comp[v];
        if status[c as usize] == ACCEPTED {
            let root = find(&mut parent, c);
            group_nodes.entry(root).or_default().push(v);
        }
    }
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut discarded = 0usize;
    let mut in_subset = vec![false; n];
    for (_, mut nodes) in group_nodes {
        if nodes.len() > cap {
            discarded += 1;
            continue;
        }
        nodes.sort_unstable();
        for &v in &nodes {
            in_subset[v] = true;
        }
        subsets.push(nodes);
    }
    subsets.sort_by_key(|s| s[0]);
    let core: Vec<usize> = (0..n).filter(|&v| !in_subset[v]).collect();

    SubspaceDecomposition {
        subsets,
        core,
        max_fraction,
        discarded_merged: discarded,
    }
}

fn adjacency_of(matrix: &StochasticMatrix) -> Vec<Vec<u32>> {
    matrix
        .columns()
        .iter()
        .map(|col| col.iter().map(|&(row, _)| row).collect())
        .collect()
}

/// Finds all invariant node subsets not larger than `max_fraction * N`,
/// merges overlapping ones, and returns them with the complementary core.
pub fn find_invariant_subspaces(
    matrix: &StochasticMatrix,
    max_fraction: f64,
) -> SubspaceDecomposition {
    let n = matrix.n();
    let input = DetectionInput {
        adj: adjacency_of(matrix),
        disqualifying: (0..n).map(|k| matrix.is_dangling(k)).collect(),
    };
    detect(&input, max_fraction)
}

/// Re-runs detection on the sub-operator induced by `nodes` (in their given
/// order). Columns that lose mass to the outside are disqualifying, like
/// dangling columns, because they couple the closure to removed nodes.
pub fn find_invariant_subspaces_restricted(
    matrix: &StochasticMatrix,
    nodes: &[usize],
    max_fraction: f64,
) -> SubspaceDecomposition {
    let mut dense_index = vec![usize::MAX; matrix.n()];
    for (i, &v) in nodes.iter().enumerate() {
        dense_index[v] = i;
    }
    let mut adj: Vec<Vec<u32>> = Vec::with_capacity(nodes.len());
    let mut disqualifying = Vec::with_capacity(nodes.len());
    for &v in nodes {
        let mut leaky = matrix.is_dangling(v);
        let mut succ = Vec::new();
        for &(row, _) in &matrix.columns()[v] {
            let r = dense_index[row as usize];
            if r == usize::MAX {
                leaky = true;
            } else {
                succ.push(r as u32);
            }
        }
        adj.push(succ);
        disqualifying.push(leaky);
    }
    detect(&DetectionInput { adj, disqualifying }, max_fraction)
}

/// Block-triangular split: subspace nodes first (per subset), core last.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    /// New index -> original node.
    pub permutation: Vec<usize>,
    /// Per-subset `[start, end)` ranges in the permuted order.
    pub block_ranges: Vec<(usize, usize)>,
    /// First permuted index of the core block.
    pub core_start: usize,
    /// Dense exact copies of each diagonal subspace block of S.
    pub blocks: Vec<Vec<Vec<Rational>>>,
}

/// Extracts the permutation realizing Eq.-style block triangular structure
/// and the exact diagonal blocks. Fails if the decomposition does not match
/// the matrix (non-invariant subset, dangling node inside a subset).
pub fn block_split(
    matrix: &StochasticMatrix,
    decomposition: &SubspaceDecomposition,
) -> Result<BlockSplit> {
    let n = matrix.n();
    let mut seen = vec![false; n];
    let mut permutation = Vec::with_capacity(n);
    let mut block_ranges = Vec::with_capacity(decomposition.subsets.len());
    let mut blocks = Vec::with_capacity(decomposition.subsets.len());

    for (si, subset) in decomposition.subsets.iter().enumerate() {
        let start = permutation.len();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in subset.iter().enumerate() {
            if v >= n || seen[v] {
                return Err(Error::InconsistentDecomposition(format!(
                    "subset {si} reuses or exceeds node range at {v}"
                )));
            }
            seen[v] = true;
            permutation.push(v);
            local[v] = i;
        }
        let m = subset.len();
        let mut block = vec![vec![Rational::new(); m]; m];
        for (j, &v) in subset.iter().enumerate() {
            if matrix.is_dangling(v) {
                return Err(Error::InconsistentDecomposition(format!(
                    "subset {si} contains dangling node {v}"
                )));
            }
            for (row, w) in &matrix.columns()[v] {
                let r = local[*row as usize];
                if r == usize::MAX {
                    return Err(Error::InconsistentDecomposition(format!(
                        "subset {si} is not invariant: {v} links to {row}"
                    )));
                }
                block[r][j] = w.clone();
            }
        }
        blocks.push(block);
        block_ranges.push((start, permutation.len()));
    }
    let core_start = permutation.len();
    for &v in &decomposition.core {
        if v >= n || seen[v] {
            return Err(Error::InconsistentDecomposition(format!(
                "core reuses or exceeds node range at {v}"
            )));
        }
        seen[v] = true;
        permutation.push(v);
    }
    if permutation.len() != n {
        return Err(Error::InconsistentDecomposition(
            "decomposition does not cover all nodes".into(),
        ));
    }
    Ok(BlockSplit {
        permutation,
        block_ranges,
        core_start,
        blocks,
    })
}

#[derive(Debug, Clone)]
pub struct SubspaceSpectrum {
    /// Per subset: `(re, im, multiplicity)` with multiplicities grouped at
    /// the reporting tolerance.
    pub per_subset: Vec<Vec<(f64, f64, usize)>>,
    /// Aggregate multiplicity table for eigenvalues on the unit circle.
    pub unit_circle: Vec<(f64, f64, usize)>,
}

const GROUP_TOL: f64 = 1e-9;

impl SubspaceSpectrum {
    pub fn total_count(&self) -> usize {
        self.per_subset
            .iter()
            .flat_map(|s| s.iter().map(|&(_, _, m)| m))
            .sum()
    }

    pub fn nonvanishing_count(&self, tol: f64) -> usize {
        self.per_subset
            .iter()
            .flat_map(|s| s.iter())
            .filter(|&&(re, im, _)| re.hypot(im) > tol)
            .map(|&(_, _, m)| m)
            .sum()
    }

    pub fn unit_multiplicity(&self) -> usize {
        self.unit_circle
            .iter()
            .find(|&&(re, im, _)| (re - 1.0).abs() < GROUP_TOL && im.abs() < GROUP_TOL)
            .map(|&(_, _, m)| m)
            .unwrap_or(0)
    }

    /// Flattened eigenvalue list with subset index, one entry per
    /// multiplicity.
    pub fn flat(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (si, evs) in self.per_subset.iter().enumerate() {
            for &(re, im, m) in evs {
                for _ in 0..m {
                    out.push((si, re, im));
                }
            }
        }
        out
    }
}

/// Spectra of all diagonal subspace blocks by direct diagonalization.
/// Permutation-like blocks (every column a single unit entry) are resolved
/// exactly into roots of unity per cycle.
pub fn subspace_block_spectrum(
    matrix: &StochasticMatrix,
    decomposition: &SubspaceDecomposition,
    dense_cap: usize,
    precision_bits: u32,
) -> Result<SubspaceSpectrum> {
    let split = block_split(matrix, decomposition)?;
    let mut per_subset = Vec::with_capacity(split.blocks.len());
    for (si, block) in split.blocks.iter().enumerate() {
        let m = block.len();
        if m > dense_cap {
            return Err(Error::BlockTooLarge {
                index: si,
                size: m,
                cap: dense_cap,
            });
        }
        let eigs = if let Some(cycles) = permutation_cycles(block) {
            let mut eigs = Vec::new();
            for len in cycles {
                for k in 0..len {
                    eigs.push(root_of_unity(k, len));
                }
            }
            eigs
        } else {
            let mut dense = DenseMatrix::zeros(m, 52);
            for (i, row) in block.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    dense.set(i, j, w.to_f64());
                }
            }
            eig_dense(&dense, precision_bits)?
        };
        per_subset.push(group_multiplicities(eigs));
    }

    // Aggregate |lambda| = 1 eigenvalues across subsets.
    let mut on_circle: Vec<(f64, f64)> = Vec::new();
    for evs in &per_subset {
        for &(re, im, m) in evs {
            if (re.hypot(im) - 1.0).abs() < GROUP_TOL {
                for _ in 0..m {
                    on_circle.push((re, im));
                }
            }
        }
    }
    let unit_circle = group_multiplicities(on_circle);
    Ok(SubspaceSpectrum {
        per_subset,
        unit_circle,
    })
}

/// `exp(2 pi i k / l)` with the common angles resolved to their exact
/// component values rather than `cos`/`sin` round-off.
pub fn root_of_unity(k: usize, l: usize) -> (f64, f64) {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(k, l).max(1);
    let (k, l) = (k / g, l / g);
    let s3 = 3f64.sqrt() / 2.0;
    match (k, l) {
        (0, 1) => (1.0, 0.0),
        (1, 2) => (-1.0, 0.0),
        (1, 4) => (0.0, 1.0),
        (3, 4) => (0.0, -1.0),
        (1, 3) => (-0.5, s3),
        (2, 3) => (-0.5, -s3),
        (1, 6) => (0.5, s3),
        (5, 6) => (0.5, -s3),
        _ => {
            let t = 2.0 * std::f64::consts::PI * k as f64 / l as f64;
            (t.cos(), t.sin())
        }
    }
}

/// Cycle lengths if the block is a permutation matrix (each column holds a
/// single entry equal to 1), else `None`.
fn permutation_cycles(block: &[Vec<Rational>]) -> Option<Vec<usize>> {
    let m = block.len();
    let mut target = vec![usize::MAX; m];
    for j in 0..m {
        let mut row_of_one = usize::MAX;
        for i in 0..m {
            let w = &block[i][j];
            if *w != 0 {
                if *w != 1 || row_of_one != usize::MAX {
                    return None;
                }
                row_of_one = i;
            }
        }
        if row_of_one == usize::MAX {
            return None;
        }
        target[j] = row_of_one;
    }
    // Column-stochastic permutation: rows must also be hit exactly once.
    let mut hit = vec![false; m];
    for &t in &target {
        if hit[t] {
            return None;
        }
        hit[t] = true;
    }
    let mut seen = vec![false; m];
    let mut cycles = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            len += 1;
            cur = target[cur];
        }
        cycles.push(len);
    }
    Some(cycles)
}

fn group_multiplicities(mut eigs: Vec<(f64, f64)>) -> Vec<(f64, f64, usize)> {
    eigs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| a.1.partial_cmp(&b.1).unwrap())
    });
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for (re, im) in eigs {
        if let Some(last) = out.last_mut() {
            if (last.0 - re).abs() < GROUP_TOL && (last.1 - im).abs() < GROUP_TOL {
                last.2 += 1;
                continue;
            }
        }
        out.push((re, im, 1));
    }
    out.sort_by(|a, b| {
        let ma = a.0.hypot(a.1);
        let mb = b.0.hypot(b.1);
        mb.partial_cmp(&ma).unwrap().then_with(|| {
            b.1.atan2(b.0).partial_cmp(&a.1.atan2(a.0)).unwrap()
        })
    });
    out
}
