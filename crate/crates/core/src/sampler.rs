//! Exact uniform generation of boundary codes and Monte Carlo distance laws.
//!
//! Two backends:
//! - `ExactDp`: inverse sampling against big-integer count tables for trees
//!   with labels >= 1 and for Dyck paths carrying such trees. Works for any
//!   base condition but costs O(n^3) to build.
//! - `Conjugation`: codes whose labels are unconstrained (base >= n) are a
//!   product of a Dyck path, a uniform forest and i.i.d. label increments, so
//!   they can be drawn in linear time with the cycle lemma. Exact as well, but
//!   only for the min-label-one and pointed conditions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_core::RngCore;

use crate::coding::{BoundaryCode, WellLabeledTree};
use crate::combin::binomial;
use crate::genfun::{Ensemble, Statistic};
use crate::series::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplerError {
    #[error("empty class: {0}")]
    EmptyClass(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------- randomness

/// Uniform integer in [0, n), n > 0, by multiply-and-reject (exact).
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    assert!(n > 0);
    let mut m = rng.next_u64() as u128 * n as u128;
    if (m as u64) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * n as u128;
        }
    }
    (m >> 64) as u64
}

/// Uniform float in [0, 1) with 53 random bits.
pub fn uniform_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform big integer in [0, bound), bound > 0, by rejection on bytes.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero());
    if let Some(b) = bound.to_u64() {
        return BigUint::from(uniform_below(rng, b));
    }
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let spare = (nbytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[nbytes - 1] &= 0xffu8 >> spare;
        let x = BigUint::from_bytes_le(&buf);
        if &x < bound {
            return x;
        }
    }
}

/// Index i with probability weights[i] / sum, from prefix sums `cum`.
fn pick_cumulative<R: RngCore + ?Sized>(rng: &mut R, cum: &[BigUint]) -> usize {
    let u = random_below(rng, cum.last().unwrap());
    cum.partition_point(|c| c <= &u)
}

fn prefix_sums(w: &[BigUint]) -> Vec<BigUint> {
    let mut acc = BigUint::zero();
    w.iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect()
}

// -------------------------------------------------------------- count tables

/// r[l][m]: well-labeled trees with m edges, root label l, all labels >= 1.
#[derive(Debug, Clone)]
pub struct TreeCountTable {
    n_max: usize,
    rows: usize,
    free: Vec<BigUint>,
    table: Vec<Vec<BigUint>>,
}

impl TreeCountTable {
    /// Builds the table for root labels 1..=max(l_max, n_max)+1 and sizes up to n_max.
    pub fn build(l_max: usize, n_max: usize) -> Self {
        let free: Vec<BigUint> = (0..=n_max)
            .map(|m| {
                let c = binomial(2 * m as i64, m as i64) / BigInt::from(m + 1) * BigInt::from(3).pow(m as u32);
                c.to_biguint().unwrap()
            })
            .collect();
        let rows = l_max.max(n_max) + 1;
        let mut t = TreeCountTable { n_max, rows, free, table: vec![Vec::with_capacity(n_max + 1); rows + 1] };
        for m in 0..=n_max {
            for l in 1..=rows {
                let v = if m == 0 {
                    BigUint::one()
                } else {
                    let mut acc = BigUint::zero();
                    for c in [l - 1, l, l + 1] {
                        if c == 0 {
                            continue;
                        }
                        for a in 0..m {
                            let x = t.count(c as i64, a);
                            if x.is_zero() {
                                continue;
                            }
                            acc += x * t.count(l as i64, m - 1 - a);
                        }
                    }
                    acc
                };
                t.table[l].push(v);
            }
        }
        t
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Count for root label l (zero if l < 1) and m <= n_max edges.
    pub fn count(&self, l: i64, m: usize) -> &BigUint {
        static ZERO: BigUint = BigUint::ZERO;
        if l < 1 {
            return &ZERO;
        }
        let l = l as usize;
        if l <= self.rows && m < self.table[l].len() {
            &self.table[l][m]
        } else {
            assert!(l > m, "table too small for root label {} and {} edges", l, m);
            &self.free[m]
        }
    }
}

/// Uniform well-labeled tree with m edges and root label l (labels >= 1).
pub fn sample_tree<R: RngCore + ?Sized>(
    table: &TreeCountTable,
    m: usize,
    l: i64,
    rng: &mut R,
) -> Result<WellLabeledTree, SamplerError> {
    if m > table.n_max {
        return Err(SamplerError::Invalid(format!("tree size {} above table bound {}", m, table.n_max)));
    }
    if table.count(l, m).is_zero() {
        return Err(SamplerError::EmptyClass(format!("no tree with {} edges and root label {}", m, l)));
    }
    let mut labels = vec![l];
    let mut degrees = vec![0u32];
    // pending forests: (vertex index, its label, edges left for its remaining children)
    let mut stack = vec![(0usize, l, m)];
    while let Some((v, lv, left)) = stack.pop() {
        if left == 0 {
            continue;
        }
        let total = table.count(lv, left);
        let mut u = random_below(rng, total);
        let mut choice = None;
        'outer: for c in [lv - 1, lv, lv + 1] {
            for a in 0..left {
                let w = table.count(c, a) * table.count(lv, left - 1 - a);
                if u < w {
                    choice = Some((c, a));
                    break 'outer;
                }
                u -= w;
            }
        }
        let (c, a) = choice.expect("weights sum to the total");
        let child = labels.len();
        labels.push(c);
        degrees.push(0);
        degrees[v] += 1;
        stack.push((v, lv, left - 1 - a));
        stack.push((child, c, a));
    }
    Ok(WellLabeledTree::from_preorder(labels, degrees).expect("preorder built by construction"))
}

/// N[i][h][m]: completions of a Dyck path from step i at height h with m
/// tree edges still to place, a descent from height h carrying a tree with
/// root label h + base.
#[derive(Debug, Clone)]
pub struct PathCountTable {
    n: usize,
    p: usize,
    base: usize,
    cells: Vec<BigUint>,
}

impl PathCountTable {
    pub fn build(trees: &TreeCountTable, n: usize, p: usize, base: usize) -> Self {
        assert!(n <= trees.n_max, "tree table too small");
        let mut t = PathCountTable { n, p, base, cells: vec![BigUint::zero(); (2 * p + 1) * (p + 1) * (n + 1)] };
        let last = t.idx(2 * p, 0, 0);
        t.cells[last] = BigUint::one();
        for i in (0..2 * p).rev() {
            for h in 0..=p.min(i).min(2 * p - i) {
                for m in 0..=n {
                    let mut acc = BigUint::zero();
                    if h < p {
                        acc += &t.cells[t.idx(i + 1, h + 1, m)];
                    }
                    if h > 0 {
                        for a in 0..=m {
                            let rest = &t.cells[t.idx(i + 1, h - 1, m - a)];
                            if !rest.is_zero() {
                                acc += trees.count((h + base) as i64, a) * rest;
                            }
                        }
                    }
                    let k = t.idx(i, h, m);
                    t.cells[k] = acc;
                }
            }
        }
        t
    }

    fn idx(&self, i: usize, h: usize, m: usize) -> usize {
        (i * (self.p + 1) + h) * (self.n + 1) + m
    }

    pub fn get(&self, i: usize, h: usize, m: usize) -> &BigUint {
        &self.cells[self.idx(i, h, m)]
    }

    /// Number of codes at (n, p) with this base and labels >= 1.
    pub fn total(&self) -> &BigUint {
        self.get(0, 0, self.n)
    }

    /// Uniform code with this base and all labels >= 1.
    pub fn sample<R: RngCore + ?Sized>(&self, trees: &TreeCountTable, rng: &mut R) -> Result<BoundaryCode, SamplerError> {
        if self.total().is_zero() {
            return Err(SamplerError::EmptyClass(format!("no code at n={}, p={}, base={}", self.n, self.p, self.base)));
        }
        let (mut h, mut m) = (0usize, self.n);
        let mut steps = Vec::with_capacity(2 * self.p);
        let mut sizes = Vec::with_capacity(self.p);
        for i in 0..2 * self.p {
            let mut u = random_below(rng, self.get(i, h, m));
            if h < self.p {
                let up = self.get(i + 1, h + 1, m);
                if &u < up {
                    steps.push(1i8);
                    h += 1;
                    continue;
                }
                u -= up;
            }
            let mut chosen = None;
            for a in 0..=m {
                let w = trees.count((h + self.base) as i64, a) * self.get(i + 1, h - 1, m - a);
                if u < w {
                    chosen = Some(a);
                    break;
                }
                u -= w;
            }
            let a = chosen.expect("weights sum to the total");
            steps.push(-1);
            sizes.push(((h + self.base) as i64, a));
            h -= 1;
            m -= a;
        }
        let trees_out = sizes
            .into_iter()
            .map(|(l, a)| sample_tree(trees, a, l, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundaryCode { base: self.base, steps, trees: trees_out })
    }
}

// ------------------------------------------------------- cycle-lemma forests

/// Uniform forest of k plane trees with m edges in total, as the list of
/// contour words (true = step to a new child, false = step back).
pub fn sample_forest<R: RngCore + ?Sized>(k: usize, m: usize, rng: &mut R) -> Vec<Vec<bool>> {
    assert!(k >= 1);
    let len = 2 * m + k;
    let mut word: Vec<bool> = (0..len).map(|i| i < m).collect();
    for i in (1..len).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        word.swap(i, j);
    }
    // good rotations start at the first hitting times of levels min..min+k-1
    let mut s = 0i64;
    let mut low = 0i64;
    let mut first_hit = vec![0usize];
    for (t, &up) in word.iter().enumerate().take(len - 1) {
        s += if up { 1 } else { -1 };
        if s < low {
            low = s;
            first_hit.push(t + 1);
        }
    }
    let nh = first_hit.len();
    let start = first_hit[nh - k + uniform_below(rng, k as u64) as usize];
    let mut out = Vec::with_capacity(k);
    let mut cur = Vec::new();
    let mut depth = 0i64;
    for t in 0..len {
        let up = word[(start + t) % len];
        if up {
            depth += 1;
            cur.push(true);
        } else if depth == 0 {
            out.push(core::mem::take(&mut cur));
        } else {
            depth -= 1;
            cur.push(false);
        }
    }
    debug_assert_eq!(out.len(), k);
    out
}

/// Uniform Dyck path of length 2p (steps +-1).
pub fn sample_dyck<R: RngCore + ?Sized>(p: usize, rng: &mut R) -> Vec<i8> {
    let f = sample_forest(1, p, rng);
    f[0].iter().map(|&u| if u { 1 } else { -1 }).collect()
}

/// Uniform Dyck path of length 2p with exactly k returns to 0.
pub fn sample_dyck_with_returns<R: RngCore + ?Sized>(p: usize, k: usize, rng: &mut R) -> Vec<i8> {
    let mut steps = Vec::with_capacity(2 * p);
    for w in sample_forest(k, p - k, rng) {
        steps.push(1);
        steps.extend(w.iter().map(|&u| if u { 1i8 } else { -1 }));
        steps.push(-1);
    }
    steps
}

fn label_step<R: RngCore + ?Sized>(rng: &mut R) -> i64 {
    uniform_below(rng, 3) as i64 - 1
}

/// Smallest relative label of a forest with i.i.d. increments, with given root labels.
fn forest_min_label<R: RngCore + ?Sized>(forest: &[Vec<bool>], roots: &[i64], rng: &mut R) -> i64 {
    let mut best = i64::MAX;
    let mut stack: Vec<i64> = Vec::new();
    for (w, &r) in forest.iter().zip(roots) {
        best = best.min(r);
        stack.clear();
        stack.push(r);
        for &up in w {
            if up {
                let l = stack[stack.len() - 1] + label_step(rng);
                best = best.min(l);
                stack.push(l);
            } else {
                stack.pop();
            }
        }
    }
    best
}

fn forest_trees<R: RngCore + ?Sized>(forest: &[Vec<bool>], roots: &[i64], rng: &mut R) -> Vec<WellLabeledTree> {
    forest
        .iter()
        .zip(roots)
        .map(|(w, &r)| {
            let mut labels = vec![r];
            let mut degrees = vec![0u32];
            let mut stack = vec![0usize];
            for &up in w {
                if up {
                    let parent = stack[stack.len() - 1];
                    degrees[parent] += 1;
                    labels.push(labels[parent] + label_step(rng));
                    degrees.push(0);
                    stack.push(labels.len() - 1);
                } else {
                    stack.pop();
                }
            }
            WellLabeledTree::from_preorder(labels, degrees).expect("contour word is a tree")
        })
        .collect()
}

fn descent_heights(steps: &[i8]) -> Vec<i64> {
    let mut h = 0i64;
    let mut out = Vec::new();
    for &s in steps {
        if s < 0 {
            out.push(h);
        }
        h += s as i64;
    }
    out
}

fn returns(steps: &[i8]) -> usize {
    let mut h = 0i64;
    let mut k = 0;
    for &s in steps {
        if h == 0 {
            k += 1;
        }
        h += s as i64;
    }
    k
}

// ------------------------------------------------------------------ configs

/// Which codes are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCondition {
    /// Fixed base, labels >= 1, no minimum condition (the W_d objects).
    AtBase(usize),
    /// Valid codes, i.e. pointed maps with a marked closest boundary edge (W).
    MinLabelOne,
    /// Pointed maps without the marked edge (weight 1/k on codes, log W).
    Pointed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    ExactDp,
    Conjugation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleConfig {
    pub ensemble: Ensemble,
    pub condition: BaseCondition,
    pub backend: Backend,
}

/// Largest area for which the exact DP tables are built.
pub const DP_AREA_LIMIT: usize = 400;
/// Largest area for which fixed-z perimeter weights are exact rationals;
/// above it they come from log-gamma with relative error about 1e-12.
pub const EXACT_WEIGHT_LIMIT: usize = 2000;
/// Perimeters whose weight falls below this fraction of the running total
/// (once weights decrease) are dropped in the fixed-z ensemble.
pub const PERIMETER_TAIL: f64 = 1e-30;

#[derive(Debug, Clone)]
enum PDist {
    Fixed(usize),
    Exact { ps: Vec<usize>, cum: Vec<BigUint> },
    Float { ps: Vec<usize>, cum: Vec<f64> },
}

impl PDist {
    fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            PDist::Fixed(p) => *p,
            PDist::Exact { ps, cum } => ps[pick_cumulative(rng, cum)],
            PDist::Float { ps, cum } => {
                let u = uniform_f64(rng) * cum[cum.len() - 1];
                ps[cum.partition_point(|&c| c <= u).min(ps.len() - 1)]
            }
        }
    }

    /// (p, probability) pairs.
    pub fn table(&self) -> Vec<(usize, f64)> {
        match self {
            PDist::Fixed(p) => vec![(*p, 1.0)],
            PDist::Exact { ps, cum } => {
                let tot = cum[cum.len() - 1].to_f64().unwrap();
                let mut prev = 0.0;
                ps.iter()
                    .zip(cum)
                    .map(|(&p, c)| {
                        let v = c.to_f64().unwrap() / tot;
                        let out = (p, v - prev);
                        prev = v;
                        out
                    })
                    .collect()
            }
            PDist::Float { ps, cum } => {
                let tot = cum[cum.len() - 1];
                let mut prev = 0.0;
                ps.iter()
                    .zip(cum)
                    .map(|(&p, &c)| {
                        let out = (p, (c - prev) / tot);
                        prev = c;
                        out
                    })
                    .collect()
            }
        }
    }
}

/// Perimeter weight family (up to factors independent of p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weight {
    /// W(n, p)
    Rooted,
    /// log W(n, p)
    Log,
    /// 2p W_0(n, p)
    BoundaryPairs,
}

fn log_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// Exact weight without the 3^n factor.
fn exact_weight(kind: Weight, n: usize, p: usize) -> Rational {
    use crate::combin::fact_ratio;
    let (n, p) = (n as i64, p as i64);
    match kind {
        Weight::Rooted => fact_ratio(&[2 * p], &[p - 1, p + 1]) * fact_ratio(&[2 * n + p - 1], &[n, n + p]),
        Weight::Log => fact_ratio(&[2 * p - 1], &[p, p]) * fact_ratio(&[2 * n + p - 1], &[n, n + p]) * BigInt::from(p),
        Weight::BoundaryPairs => {
            fact_ratio(&[2 * p], &[p, p - 1]) * fact_ratio(&[2 * n + p - 1], &[n, n + p + 1]) * BigInt::from(2 * p)
        }
    }
}

fn log_weight(kind: Weight, n: usize, p: usize) -> f64 {
    let lf = log_factorial;
    let common = lf(2 * n + p - 1) - lf(n);
    match kind {
        Weight::Rooted => lf(2 * p) - lf(p - 1) - lf(p + 1) + common - lf(n + p),
        Weight::Log => lf(2 * p - 1) - 2.0 * lf(p) + common - lf(n + p) + libm::log(p as f64),
        Weight::BoundaryPairs => {
            lf(2 * p) - lf(p) - lf(p - 1) + common - lf(n + p + 1) + libm::log(2.0 * p as f64)
        }
    }
}

fn perimeter_law(kind: Weight, n: usize, z: &Rational, exact_counts: Option<&dyn Fn(usize) -> BigUint>) -> Result<PDist, SamplerError> {
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    if z <= &Rational::zero() || z >= &quarter {
        return Err(SamplerError::Invalid(format!("z must lie in (0, 1/4), got {}", z)));
    }
    if n <= EXACT_WEIGHT_LIMIT {
        let tail = Rational::new(BigInt::one(), BigInt::from(10).pow(30));
        let mut ws: Vec<Rational> = Vec::new();
        let mut total = Rational::zero();
        let mut zp = Rational::one();
        for p in 1.. {
            zp = &zp * z;
            let base = match exact_counts {
                Some(f) => Rational::from_integer(BigInt::from(f(p))),
                None => exact_weight(kind, n, p),
            };
            let w = base * &zp;
            total += &w;
            let decreasing = ws.last().map_or(false, |l| &w <= l);
            let small = &w < &(&total * &tail);
            ws.push(w);
            if p > 2 && decreasing && small {
                break;
            }
        }
        let lcm = ws.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let ints: Vec<BigUint> = ws.iter().map(|w| (w * &lcm).to_integer().to_biguint().unwrap()).collect();
        Ok(PDist::Exact { ps: (1..=ints.len()).collect(), cum: prefix_sums(&ints) })
    } else {
        let lz = libm::log(z.to_f64().unwrap());
        let logs: Vec<f64> = {
            let mut v = Vec::new();
            let mut best = f64::NEG_INFINITY;
            for p in 1.. {
                let lw = p as f64 * lz + log_weight(kind, n, p);
                best = best.max(lw);
                let decreasing = v.last().map_or(false, |&l| lw <= l);
                v.push(lw);
                if p > 2 && decreasing && lw < best + libm::log(PERIMETER_TAIL) - 10.0 {
                    break;
                }
            }
            v
        };
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        let cum = logs
            .iter()
            .map(|&l| {
                acc += libm::exp(l - top);
                acc
            })
            .collect();
        Ok(PDist::Float { ps: (1..=logs.len()).collect(), cum })
    }
}

#[derive(Debug, Clone)]
struct DpTables {
    trees: TreeCountTable,
    paths: Vec<Option<PathCountTable>>,
}

/// Draws codes (and distances) under a fixed configuration.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SampleConfig,
    n: usize,
    pdist: PDist,
    dp: Option<DpTables>,
    /// cumulative weights C(2p-k-1, p-1), k = 1..=p, per perimeter
    returns: Vec<Option<Vec<BigUint>>>,
}

impl Sampler {
    pub fn new(config: SampleConfig) -> Result<Self, SamplerError> {
        Self::with_weight(config, None)
    }

    fn with_weight(config: SampleConfig, pairs: Option<()>) -> Result<Self, SamplerError> {
        let n = match &config.ensemble {
            Ensemble::FixedNp { n, p } => {
                if *p == 0 {
                    return Err(SamplerError::Invalid(String::from("half-perimeter must be >= 1")));
                }
                *n
            }
            Ensemble::FixedZ { n, .. } => *n,
        };
        let kind = match (pairs, config.condition) {
            (Some(()), _) => Weight::BoundaryPairs,
            (None, BaseCondition::Pointed) => Weight::Log,
            (None, _) => Weight::Rooted,
        };
        if config.backend == Backend::Conjugation {
            if let BaseCondition::AtBase(b) = config.condition {
                if b < n {
                    return Err(SamplerError::Unsupported(format!(
                        "the conjugation backend needs unconstrained labels (base >= n); base {} < n {}",
                        b, n
                    )));
                }
            }
        }
        if config.backend == Backend::ExactDp && n > DP_AREA_LIMIT {
            return Err(SamplerError::Unsupported(format!("exact DP tables are limited to n <= {}", DP_AREA_LIMIT)));
        }

        let table_base = match config.condition {
            BaseCondition::AtBase(b) => b,
            _ => n,
        };
        let mut dp = None;
        let pdist = match &config.ensemble {
            Ensemble::FixedNp { p, .. } => PDist::Fixed(*p),
            Ensemble::FixedZ { z, .. } => match config.condition {
                BaseCondition::AtBase(b) if b < n => {
                    let trees = TreeCountTable::build(b + 1, n);
                    let counter = |p: usize| {
                        let c = PathCountTable::build(&trees, n, p, b).total().clone();
                        if kind == Weight::BoundaryPairs {
                            c * BigUint::from(2 * p)
                        } else {
                            c
                        }
                    };
                    let law = perimeter_law(kind, n, z, Some(&counter))?;
                    dp = Some(DpTables { trees, paths: Vec::new() });
                    law
                }
                _ => perimeter_law(kind, n, z, None)?,
            },
        };
        let p_max = match &pdist {
            PDist::Fixed(p) => *p,
            PDist::Exact { ps, .. } | PDist::Float { ps, .. } => *ps.last().unwrap(),
        };
        if config.backend == Backend::ExactDp {
            let trees = match dp.take() {
                Some(t) => t.trees,
                None => TreeCountTable::build(table_base + 1, n),
            };
            let mut paths = vec![None; p_max + 1];
            for (p, slot) in paths.iter_mut().enumerate().skip(1) {
                let possible = match &pdist {
                    PDist::Fixed(q) => *q == p,
                    _ => true,
                };
                if possible {
                    *slot = Some(PathCountTable::build(&trees, n, p, table_base));
                }
            }
            dp = Some(DpTables { trees, paths });
        }
        let mut returns = vec![None; p_max + 1];
        if config.backend == Backend::Conjugation && config.condition == BaseCondition::Pointed {
            for (p, slot) in returns.iter_mut().enumerate().skip(1) {
                if let PDist::Fixed(q) = pdist {
                    if q != p {
                        continue;
                    }
                }
                let w: Vec<BigUint> = (1..=p)
                    .map(|k| binomial((2 * p - k - 1) as i64, p as i64 - 1).to_biguint().unwrap())
                    .collect();
                *slot = Some(prefix_sums(&w));
            }
        }
        Ok(Sampler { config, n, pdist, dp, returns })
    }

    pub fn config(&self) -> &SampleConfig {
        &self.config
    }

    /// Law of the half-perimeter as (p, probability) pairs.
    pub fn perimeter_table(&self) -> Vec<(usize, f64)> {
        self.pdist.table()
    }

    /// True when every random decision is exact (no floating perimeter weights).
    pub fn is_exact(&self) -> bool {
        !matches!(self.pdist, PDist::Float { .. })
    }

    pub fn sample_code<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<BoundaryCode, SamplerError> {
        let p = self.pdist.draw(rng);
        match self.config.backend {
            Backend::ExactDp => self.dp_code(p, rng),
            Backend::Conjugation => Ok(self.conj_code(p, rng)),
        }
    }

    fn dp_code<R: RngCore + ?Sized>(&self, p: usize, rng: &mut R) -> Result<BoundaryCode, SamplerError> {
        let dp = self.dp.as_ref().unwrap();
        let table = dp.paths[p].as_ref().unwrap();
        loop {
            let mut c = table.sample(&dp.trees, rng)?;
            match self.config.condition {
                BaseCondition::AtBase(_) => return Ok(c),
                BaseCondition::MinLabelOne => {
                    normalize(&mut c);
                    return Ok(c);
                }
                BaseCondition::Pointed => {
                    let k = returns(&c.steps) as u64;
                    if uniform_below(rng, k) == 0 {
                        normalize(&mut c);
                        return Ok(c);
                    }
                }
            }
        }
    }

    fn conj_path<R: RngCore + ?Sized>(&self, p: usize, rng: &mut R) -> Vec<i8> {
        match self.config.condition {
            BaseCondition::Pointed => {
                let cum = self.returns[p].as_ref().unwrap();
                let k = pick_cumulative(rng, cum) + 1;
                sample_dyck_with_returns(p, k, rng)
            }
            _ => sample_dyck(p, rng),
        }
    }

    fn conj_code<R: RngCore + ?Sized>(&self, p: usize, rng: &mut R) -> BoundaryCode {
        let steps = self.conj_path(p, rng);
        let roots = descent_heights(&steps);
        let forest = sample_forest(p, self.n, rng);
        let trees = forest_trees(&forest, &roots, rng);
        let mut c = BoundaryCode { base: 0, steps, trees };
        match self.config.condition {
            BaseCondition::AtBase(b) => {
                for t in c.trees.iter_mut() {
                    *t = t.shifted(b as i64);
                }
                c.base = b;
            }
            _ => {
                let lo = c.trees.iter().map(|t| t.min_label()).min().unwrap();
                let d = 1 - lo;
                for t in c.trees.iter_mut() {
                    *t = t.shifted(d);
                }
                c.base = d as usize;
            }
        }
        c
    }

    /// Origin-boundary distance of one pointed map; linear time without
    /// building the trees under the conjugation backend.
    pub fn sample_bulk_distance<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<usize, SamplerError> {
        if self.config.condition != BaseCondition::Pointed {
            return Err(SamplerError::Invalid(String::from("bulk-boundary laws need the pointed condition")));
        }
        let p = self.pdist.draw(rng);
        match self.config.backend {
            Backend::ExactDp => Ok(self.dp_code(p, rng)?.base),
            Backend::Conjugation => {
                let steps = self.conj_path(p, rng);
                let roots = descent_heights(&steps);
                let forest = sample_forest(p, self.n, rng);
                Ok((1 - forest_min_label(&forest, &roots, rng)) as usize)
            }
        }
    }
}

fn normalize(c: &mut BoundaryCode) {
    let lo = c.trees.iter().map(|t| t.min_label()).min().unwrap();
    let shift = lo - 1;
    if shift != 0 {
        for t in c.trees.iter_mut() {
            *t = t.shifted(-shift);
        }
        c.base -= shift as usize;
    }
}

/// Distance sampler for one statistic. Bulk-boundary uses pointed maps;
/// boundary-boundary uses base-0 codes (origin on the boundary) and the
/// height of a uniform step, with perimeters weighted by 2p W_0.
#[derive(Debug, Clone)]
pub struct DistanceSampler {
    statistic: Statistic,
    inner: Sampler,
}

impl DistanceSampler {
    pub fn new(ensemble: Ensemble, statistic: Statistic, backend: Backend) -> Result<Self, SamplerError> {
        let inner = match statistic {
            Statistic::BulkBoundary => {
                Sampler::new(SampleConfig { ensemble, condition: BaseCondition::Pointed, backend })?
            }
            Statistic::BoundaryBoundary => {
                if backend != Backend::ExactDp {
                    return Err(SamplerError::Unsupported(String::from(
                        "boundary-boundary laws need the origin on the boundary, which only the DP backend samples",
                    )));
                }
                Sampler::with_weight(SampleConfig { ensemble, condition: BaseCondition::AtBase(0), backend }, Some(()))?
            }
        };
        Ok(DistanceSampler { statistic, inner })
    }

    pub fn sampler(&self) -> &Sampler {
        &self.inner
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<usize, SamplerError> {
        match self.statistic {
            Statistic::BulkBoundary => self.inner.sample_bulk_distance(rng),
            Statistic::BoundaryBoundary => {
                let c = self.inner.sample_code(rng)?;
                let i = uniform_below(rng, c.steps.len() as u64) as usize;
                Ok(c.heights()[i] as usize)
            }
        }
    }
}

// -------------------------------------------------------------- statistics

/// Counts indexed by distance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Histogram { counts, total }
    }

    pub fn add(&mut self, d: usize) {
        if d >= self.counts.len() {
            self.counts.resize(d + 1, 0);
        }
        self.counts[d] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    /// Empirical P(d <= k).
    pub fn cdf_at(&self, k: usize) -> f64 {
        let s: u64 = self.counts.iter().take(k + 1).sum();
        s as f64 / self.total as f64
    }
}

/// Goodness-of-fit summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    /// Kolmogorov-Smirnov sup-distance between the two CDFs.
    pub ks: f64,
    /// Pearson statistic over cells with expected count >= 5 (pooled tail).
    pub chi2: f64,
    pub dof: usize,
}

/// Compares a histogram with a reference pmf over the integers.
pub fn ks_compare(hist: &Histogram, reference: &[f64]) -> FitReport {
    let len = hist.counts.len().max(reference.len());
    let emp = hist.pmf();
    let (mut fe, mut fr, mut ks) = (0.0, 0.0, 0.0f64);
    for d in 0..len {
        fe += emp.get(d).copied().unwrap_or(0.0);
        fr += reference.get(d).copied().unwrap_or(0.0);
        ks = ks.max((fe - fr).abs());
    }
    let n = hist.total as f64;
    let (mut chi2, mut cells) = (0.0, 0usize);
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for d in 0..len {
        let o = hist.counts.get(d).copied().unwrap_or(0) as f64;
        let e = n * reference.get(d).copied().unwrap_or(0.0);
        pool_o += o;
        pool_e += e;
        if pool_e >= 5.0 {
            chi2 += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
            cells += 1;
            pool_o = 0.0;
            pool_e = 0.0;
        }
    }
    if pool_e > 0.0 && cells > 0 {
        // leftover tail joins the last counted cell's neighbourhood as its own cell
        chi2 += (pool_o - pool_e) * (pool_o - pool_e) / pool_e.max(5.0);
        cells += 1;
    }
    FitReport { ks, chi2, dof: cells.saturating_sub(1) }
}

/// sup_k |P(d <= k) - F(k * scale)| for a continuum CDF F, over the
/// lattice points up to the largest observed distance.
pub fn ks_scaled(hist: &Histogram, scale: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0u64;
    let mut ks = 0.0f64;
    for (k, &c) in hist.counts.iter().enumerate() {
        acc += c;
        let fe = acc as f64 / hist.total as f64;
        ks = ks.max((fe - cdf(k as f64 * scale)).abs());
    }
    ks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{enumerate_trees, validate_code, validate_tree};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tree_table_small() {
        let t = TreeCountTable::build(5, 4);
        for l in 1..6 {
            assert_eq!(*t.count(l, 0), BigUint::one());
        }
        assert_eq!(*t.count(1, 1), BigUint::from(2u32));
        assert_eq!(*t.count(0, 1), BigUint::zero());
        for l in 1..=5i64 {
            for m in 0..=4usize {
                assert_eq!(t.count(l, m).to_usize().unwrap(), enumerate_trees(m, l, 1).len());
            }
        }
    }

    #[test]
    fn forest_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = sample_forest(3, 5, &mut rng);
            assert_eq!(f.len(), 3);
            assert_eq!(f.iter().map(|w| w.len()).sum::<usize>(), 10);
            let k = 1 + uniform_below(&mut rng, 4) as usize;
            let s = sample_dyck_with_returns(4, k, &mut rng);
            assert_eq!(returns(&s), k);
        }
    }

    #[test]
    fn single_tree_and_codes_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = TreeCountTable::build(4, 6);
        assert_eq!(sample_tree(&t, 0, 3, &mut rng).unwrap(), WellLabeledTree::single(3));
        for _ in 0..50 {
            assert!(validate_tree(&sample_tree(&t, 6, 1, &mut rng).unwrap()).is_empty());
        }
        for backend in [Backend::ExactDp, Backend::Conjugation] {
            for condition in [BaseCondition::MinLabelOne, BaseCondition::Pointed] {
                let cfg = SampleConfig { ensemble: Ensemble::FixedNp { n: 5, p: 3 }, condition, backend };
                let s = Sampler::new(cfg).unwrap();
                for _ in 0..50 {
                    let c = s.sample_code(&mut rng).unwrap();
                    assert!(validate_code(&c).is_empty());
                    assert_eq!((c.area(), c.half_perimeter()), (5, 3));
                }
            }
        }
    }

    #[test]
    fn histogram_and_ks() {
        let h = Histogram::from_counts(vec![5, 5]);
        assert_eq!(ks_compare(&h, &[0.5, 0.5]).ks, 0.0);
        let a = Histogram::from_counts(vec![10]);
        assert_eq!(ks_compare(&a, &[0.0, 1.0]).ks, 1.0);
        let mut m = Histogram::new();
        m.add(3);
        m.merge(&h);
        assert_eq!((m.total(), m.counts()[3]), (11, 1));
    }

    #[test]
    fn random_below_is_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = BigUint::from(10u32).pow(30) + 7u32;
        for _ in 0..100 {
            assert!(random_below(&mut rng, &b) < b);
        }
    }
}
