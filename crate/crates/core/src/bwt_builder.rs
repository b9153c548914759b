//! BWT construction driven by a synchronizing set.
//!
//! A suffix with a synchronizing position `s` less than `τ` after its start
//! is placed by its distinguishing prefix `T[j..s+2τ)`. All suffixes sharing
//! such a prefix form one contiguous BWT block, which is a node sequence of
//! the wavelet tree over the reversed windows `W[i] = rev(T[s−τ..s+2τ))`.
//! A preorder walk over labels of length below `3τ` stitches the blocks
//! together.
//!
//! The remaining suffixes start inside periodic runs. Every occurrence of a
//! run prefix `X` of length `3τ−1` except the first position of each run is
//! preceded by `X[per(X)−1]`, so those blocks are filled with that symbol and
//! one slot per run is patched afterwards.

use std::collections::{BTreeMap, HashMap};

use rustc_hash::{FxHashMap, FxHashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::lce_index::default_tau;
use crate::packed_text::{period_of, reverse_digits, PackedText};
use crate::succinct::{
    build_wavelet_binary, build_wavelet_degree, BinaryWaveletTree, DegreeSigmaWaveletTree,
};
use crate::suffix_core::suffix_array;
use crate::sync_set::{construct_packed_fast, SyncSet};
use crate::sync_sort::{sort_sync_suffixes, SortedSyncOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Sync,
    NaiveFallback,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Sync => "sync",
            Pipeline::NaiveFallback => "naive-fallback",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BwtMeta {
    pub n: usize,
    pub sigma: u32,
    pub tau: usize,
    pub sync_size: usize,
    pub pipeline: Pipeline,
}

/// `bwt[i] = T[SA[i]−1]`, except `bwt[primary_index] = T[n−1]` where
/// `SA[primary_index] = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BwtResult {
    pub bwt: Vec<u32>,
    pub primary_index: usize,
    pub meta: BwtMeta,
}

impl BwtResult {
    /// Metadata sidecar: `key=value` lines, `primary_index` 1-based.
    pub fn sidecar_string(&self) -> String {
        let m = &self.meta;
        let mut out = format!(
            "n={}\nsigma={}\ntau={}\nprimary_index={}\nsync_size={}\npipeline={}\n",
            m.n,
            m.sigma,
            m.tau,
            self.primary_index + 1,
            m.sync_size,
            m.pipeline
        );
        if m.pipeline == Pipeline::Sync {
            out.push_str("range_count=fenwick\n");
        }
        out
    }

    /// Rebuilds a result from BWT symbols and a sidecar. Unknown keys are
    /// ignored.
    pub fn from_sidecar(bwt: Vec<u32>, sidecar: &str) -> Result<BwtResult> {
        let mut kv = HashMap::new();
        for (no, line) in sidecar.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key=value", no + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |key: &str| -> Result<usize> {
            let v = kv
                .get(key)
                .ok_or_else(|| Error::Format(format!("missing {key}")))?;
            v.parse()
                .map_err(|_| Error::Format(format!("{key}={v} is not a number")))
        };
        let n = num("n")?;
        let primary = num("primary_index")?;
        if n != bwt.len() {
            return Err(Error::Format(format!(
                "meta says n={n}, BWT has {} symbols",
                bwt.len()
            )));
        }
        if n > 0 && (primary == 0 || primary > n) {
            return Err(Error::Format(format!(
                "primary_index={primary} outside [1..{n}]"
            )));
        }
        let pipeline = match kv.get("pipeline").map(String::as_str) {
            Some("sync") | None => Pipeline::Sync,
            Some("naive-fallback") => Pipeline::NaiveFallback,
            Some(other) => return Err(Error::Format(format!("unknown pipeline {other}"))),
        };
        let sigma = num("sigma")? as u32;
        let meta = BwtMeta {
            n,
            sigma,
            tau: num("tau").unwrap_or(0),
            sync_size: num("sync_size").unwrap_or(0),
            pipeline,
        };
        Ok(BwtResult {
            bwt,
            primary_index: primary.saturating_sub(1),
            meta,
        })
    }
}

/// Smallest symbol `c` with `per(c·T[0..2τ−1)) > τ/3`.
pub fn choose_sentinel(pt: &PackedText, tau: usize) -> Result<u32> {
    if tau == 0 || pt.len() + 1 < 2 * tau {
        return Err(Error::Domain(format!(
            "tau={tau} needs n ≥ 2τ−1, n={}",
            pt.len()
        )));
    }
    let mut x = vec![0u32; 2 * tau];
    for (i, slot) in x[1..].iter_mut().enumerate() {
        *slot = pt.char_at(i);
    }
    for c in 0..pt.sigma().max(2) {
        x[0] = c;
        if 3 * period_of(&x) > tau {
            return Ok(c);
        }
    }
    Err(Error::Internal(
        "no sentinel symbol breaks the period of the text head".into(),
    ))
}

fn occurrences(pt: &PackedText, pat: &[u32]) -> Vec<usize> {
    let (n, m) = (pt.len(), pat.len());
    if m == 0 || m > n {
        return Vec::new();
    }
    if m <= pt.key_cap() {
        let bits = pt.bits_per_symbol();
        let target = pat.iter().fold(0u128, |acc, &c| (acc << bits) | c as u128);
        (0..=n - m).filter(|&i| pt.key(i, m) == target).collect()
    } else {
        (0..=n - m)
            .filter(|&i| (0..m).all(|q| pt.char_at(i + q) == pat[q]))
            .collect()
    }
}

/// Adds every occurrence of `b·T[0..2τ−1)` to `s`.
pub fn augment_sync_set(pt: &PackedText, tau: usize, s: &SyncSet, b: u32) -> Result<SyncSet> {
    let n = pt.len();
    if 2 * tau > n {
        return Ok(s.clone());
    }
    let mut x = vec![b];
    x.extend((0..2 * tau - 1).map(|i| pt.char_at(i)));
    let occ = occurrences(pt, &x);
    if occ.is_empty() {
        return Ok(s.clone());
    }
    let mut merged: Vec<usize> = s.positions().iter().copied().chain(occ).collect();
    merged.sort_unstable();
    merged.dedup();
    SyncSet::from_positions(merged, tau, n)
}

/// `W[i]`: the reversed window `T[s−τ..s+2τ)` of the `i`-th smallest
/// synchronized suffix as a `3τ`-digit number. Position `−1` reads as `b`,
/// positions further left as 0.
pub fn build_w(pt: &PackedText, tau: usize, sorted: &SortedSyncOrder, b: u32) -> Result<Vec<u128>> {
    let bits = pt.bits_per_symbol();
    if 3 * tau * bits as usize > 128 {
        return Err(Error::Domain(format!(
            "3τ={} symbols of {bits} bits exceed 128",
            3 * tau
        )));
    }
    let w = sorted
        .order
        .iter()
        .map(|&s| {
            if s >= tau {
                reverse_digits(pt.key(s - tau, 3 * tau), 3 * tau, bits)
            } else {
                let mut v = 0u128;
                for q in (s as isize - tau as isize..(s + 2 * tau) as isize).rev() {
                    let c = match q {
                        q if q >= 0 => pt.char_at(q as usize),
                        -1 => b,
                        _ => 0,
                    };
                    v = (v << bits) | c as u128;
                }
                v
            }
        })
        .collect();
    Ok(w)
}

/// Occurrence counts of length-`ℓ` substrings, sorted by packed value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreqTable {
    entries: Vec<(u128, usize)>,
}

impl FreqTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: u128) -> Option<usize> {
        self.entries
            .binary_search_by_key(&key, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Whether some key lies in `[lo..=hi]`.
    pub fn any_in(&self, lo: u128, hi: u128) -> bool {
        let i = self.entries.partition_point(|e| e.0 < lo);
        i < self.entries.len() && self.entries[i].0 <= hi
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, usize)> + '_ {
        self.entries.iter().copied()
    }
}

/// Counts length-`ℓ` substrings. Blocks of length `2ℓ−1` starting at
/// multiples of `ℓ` are deduplicated first; each distinct block is expanded
/// once into its `ℓ` windows.
pub fn count_freq(pt: &PackedText, ell: usize) -> Result<FreqTable> {
    if ell == 0 || ell > pt.key_cap() {
        return Err(Error::Domain(format!(
            "length {ell} outside [1..{}]",
            pt.key_cap()
        )));
    }
    let n = pt.len();
    if ell > n {
        return Ok(FreqTable::default());
    }
    let mut blocks: FxHashMap<(u128, u128, usize), (usize, usize)> = FxHashMap::default();
    let mut k = 0;
    while k + ell <= n {
        let len = (2 * ell - 1).min(n - k);
        let tail = if len > ell {
            pt.key(k + ell, len - ell)
        } else {
            0
        };
        blocks
            .entry((pt.key(k, ell), tail, len))
            .or_insert((k, 0))
            .1 += 1;
        k += ell;
    }
    let mut table: FxHashMap<u128, usize> = FxHashMap::default();
    for (&(_, _, len), &(rep, mult)) in &blocks {
        for o in 0..=len - ell {
            *table.entry(pt.key(rep + o, ell)).or_insert(0) += mult;
        }
    }
    let mut entries: Vec<(u128, usize)> = table.into_iter().collect();
    entries.sort_unstable();
    Ok(FreqTable { entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RunType {
    /// `T[e] ≺ T[e−p]`, or the run reaches the end of the text.
    Minus,
    Plus,
}

/// `T[j..e) = U′U^kU″` with `|U′| = head`, `k = exp`, `|U″| = tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LSignature {
    pub head: usize,
    pub exp: usize,
    pub tail: usize,
}

/// A maximal run of positions whose length-`3τ−1` fragment has period at
/// most `τ/3`, identified by its first position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicRun {
    pub j: usize,
    /// End of the periodic extension of `T[j..j+3τ−1)`, exclusive.
    pub e: usize,
    pub run_type: RunType,
    pub period: usize,
    /// Equal for runs sharing an L-root.
    pub lroot_id: usize,
    pub lsig: LSignature,
    /// Packed `T[j..j+3τ−1)`.
    pub prefix: u128,
    /// Rank of the suffix at `e−2τ+1` among synchronized suffixes; `−1` when
    /// the run reaches the end of the text.
    pub end_rank: i64,
}

impl PeriodicRun {
    fn x(&self) -> i64 {
        (self.lsig.head + self.lsig.exp * self.period) as i64
    }

    fn order_key(&self) -> i64 {
        match self.run_type {
            RunType::Minus => self.end_rank,
            RunType::Plus => -self.end_rank,
        }
    }
}

/// Runs starting at `s_i+1` for every gap `s_{i+1}−s_i > τ`, with `s_{−1} = −1`
/// and the sentinel closing the list.
pub fn periodic_runs(
    pt: &PackedText,
    s: &SyncSet,
    sorted: &SortedSyncOrder,
) -> Result<Vec<PeriodicRun>> {
    let (n, tau) = (pt.len(), s.tau());
    let ell = 3 * tau - 1;
    if n < ell || ell > pt.key_cap() {
        return Err(Error::Domain(format!(
            "runs need 3τ−1 ≤ n and a packed prefix, τ={tau} n={n}"
        )));
    }
    let pos = s.positions();
    let m = pos.len();
    let mut roots: FxHashMap<(usize, u128), usize> = FxHashMap::default();
    let mut runs = Vec::new();
    for k in 0..=m {
        let j = if k == 0 { 0 } else { pos[k - 1] + 1 };
        let next = pos.get(k).copied().unwrap_or_else(|| s.sentinel());
        if next + 1 - j <= tau {
            continue;
        }
        let e = next + 2 * tau - 1;
        let x: Vec<u32> = (j..j + ell).map(|q| pt.char_at(q)).collect();
        let p = period_of(&x);
        if 3 * p > tau {
            return Err(Error::Internal(format!(
                "gap after {j} without a short period"
            )));
        }
        let head = (0..p).min_by_key(|&r| &x[r..r + p]).unwrap_or(0);
        let next_id = roots.len();
        let lroot_id = *roots.entry((p, pt.key(j + head, p))).or_insert(next_id);
        let len = e - j;
        let plus = e < n && pt.char_at(e) > pt.char_at(e - p);
        runs.push(PeriodicRun {
            j,
            e,
            run_type: if plus { RunType::Plus } else { RunType::Minus },
            period: p,
            lroot_id,
            lsig: LSignature {
                head,
                exp: (len - head) / p,
                tail: (len - head) % p,
            },
            prefix: pt.key(j, ell),
            end_rank: if k < m { sorted.rank[k] as i64 } else { -1 },
        });
    }
    Ok(runs)
}

#[derive(Clone, Debug)]
struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn new(n: usize) -> Fenwick {
        Fenwick {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, i: usize, v: i64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over `[0..i)`.
    fn prefix(&self, i: usize) -> i64 {
        let mut i = i.min(self.tree.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    fn range_add(&mut self, lo: usize, hi: usize, v: i64) {
        if lo < hi {
            self.add(lo, v);
            self.add(hi, -v);
        }
    }

    fn point(&self, i: usize) -> i64 {
        self.prefix(i + 1)
    }
}

/// For each query `(x_min, y_max)`, the number of points with `x ≥ x_min`
/// and `y ≤ y_max`. Offline sweep over `x` with a Fenwick tree over `y`.
pub fn offline_range_count(points: &[(i64, i64)], queries: &[(i64, i64)]) -> Vec<usize> {
    let mut ys: Vec<i64> = points.iter().map(|p| p.1).collect();
    ys.sort_unstable();
    ys.dedup();
    let mut pts = points.to_vec();
    pts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    let mut order: Vec<usize> = (0..queries.len()).collect();
    order.sort_unstable_by(|&a, &b| queries[b].0.cmp(&queries[a].0));
    let mut fw = Fenwick::new(ys.len());
    let mut out = vec![0; queries.len()];
    let mut next = 0;
    for q in order {
        let (x_min, y_max) = queries[q];
        while next < pts.len() && pts[next].0 >= x_min {
            fw.add(ys.partition_point(|&y| y < pts[next].1), 1);
            next += 1;
        }
        out[q] = fw.prefix(ys.partition_point(|&y| y <= y_max)) as usize;
    }
    out
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Adds to `count[q]` the number of positions of runs in `members` (one
/// L-root, one type) whose phase equals that of `q` and whose L-exponent is
/// smaller.
fn count_shorter(runs: &[PeriodicRun], members: &[usize], tau: usize, count: &mut [i64]) {
    let p = runs[members[0]].period;
    let pi = p as i64;
    let ell = 3 * tau as i64 - 1;
    let mut by_exp = members.to_vec();
    by_exp.sort_by_key(|&i| runs[i].lsig.exp);
    // finished[t]: positions of phase t in runs whose exponent is below the
    // current one. alive: runs not yet finished, bucketed by |U″|.
    let mut finished = Fenwick::new(p);
    let mut alive = Fenwick::new(p);
    for &i in members {
        alive.add(runs[i].lsig.tail, 1);
    }
    let mut next = 0;
    for &q in &by_exp {
        let kq = runs[q].lsig.exp as i64;
        while next < by_exp.len() && (runs[by_exp[next]].lsig.exp as i64) < kq {
            let r = &runs[by_exp[next]];
            alive.add(r.lsig.tail, -1);
            let (kr, tr) = (r.lsig.exp as i64, r.lsig.head);
            let a = ell - r.lsig.tail as i64;
            let c0 = ceil_div(a, pi);
            let thr = (a - (c0 - 1) * pi) as usize;
            let mut cuts = vec![0, (tr + 1).min(p), thr.min(p), p];
            cuts.sort_unstable();
            cuts.dedup();
            for w in cuts.windows(2) {
                let top = if w[0] <= tr { kr } else { kr - 1 };
                let low = if w[0] < thr { c0 } else { c0 - 1 };
                finished.range_add(w[0], w[1], (top - low + 1).max(0));
            }
            next += 1;
        }
        let tq = runs[q].lsig.head;
        let a = ell - tq as i64;
        let c0 = ceil_div(a, pi);
        let thr = (a - (c0 - 1) * pi) as usize;
        let below = alive.prefix(thr);
        let above = alive.prefix(p) - below;
        count[q] += finished.point(tq) + below * (kq - c0).max(0) + above * (kq - c0 + 1).max(0);
    }
}

/// Local rank of every run start among the occurrences of its length-`3τ−1`
/// prefix (1-based), from the run data alone plus the prefix frequencies.
pub fn local_ranks(runs: &[PeriodicRun], tau: usize, freq: &FreqTable) -> Result<Vec<usize>> {
    let ell = 3 * tau as i64 - 1;
    let mut groups: BTreeMap<(RunType, usize), Vec<usize>> = BTreeMap::new();
    for (i, r) in runs.iter().enumerate() {
        groups.entry((r.run_type, r.lroot_id)).or_default().push(i);
    }
    let mut count = vec![0i64; runs.len()];
    let mut points = Vec::with_capacity(runs.len());
    let mut queries = Vec::with_capacity(2 * runs.len());
    let mut owners = Vec::with_capacity(runs.len());
    for members in groups.values_mut() {
        // Same phase and exponent: compare by (|U″|, continuation).
        members.sort_by_key(|&i| (runs[i].lsig.tail, runs[i].order_key()));
        let start = points.len() as i64;
        for (off, &i) in members.iter().enumerate() {
            points.push((runs[i].x(), start + off as i64));
        }
        for (off, &i) in members.iter().enumerate() {
            let x = runs[i].x();
            let need = (ell - x).max(0) as usize;
            let lo = start + members.partition_point(|&q| runs[q].lsig.tail < need) as i64;
            queries.push((x, start + off as i64));
            queries.push((x, lo - 1));
            owners.push(i);
        }
        count_shorter(runs, members, tau, &mut count);
    }
    let c = offline_range_count(&points, &queries);
    for (q, &i) in owners.iter().enumerate() {
        count[i] += c[2 * q] as i64 - c[2 * q + 1] as i64;
    }
    runs.iter()
        .zip(&count)
        .map(|(r, &c)| {
            let f = freq.get(r.prefix).unwrap_or(0) as i64;
            let rank = match r.run_type {
                RunType::Minus => c,
                RunType::Plus => f - c + 1,
            };
            if c < 1 || rank < 1 || rank > f {
                return Err(Error::Internal(format!(
                    "run at {} got local rank {rank} of {f}",
                    r.j
                )));
            }
            Ok(rank as usize)
        })
        .collect()
}

/// Writes `T[j−1]` (`b` for `j = 0`) into the slot of every run start.
/// Returns the slot of position 0 when it starts a run.
pub fn correct_periodic(
    pt: &PackedText,
    tau: usize,
    runs: &[PeriodicRun],
    bases: &FxHashMap<u128, usize>,
    freq: &FreqTable,
    b: u32,
    bwt: &mut [u32],
) -> Result<Option<usize>> {
    let ranks = local_ranks(runs, tau, freq)?;
    let mut first = None;
    for (r, &rank) in runs.iter().zip(&ranks) {
        let base = *bases
            .get(&r.prefix)
            .ok_or_else(|| Error::Internal(format!("run at {} has no block", r.j)))?;
        let slot = base + rank - 1;
        if slot >= bwt.len() {
            return Err(Error::Internal(format!("slot {slot} past the end")));
        }
        bwt[slot] = if r.j == 0 {
            first = Some(slot);
            b
        } else {
            pt.char_at(r.j - 1)
        };
    }
    Ok(first)
}

enum Tree {
    Binary(BinaryWaveletTree),
    Degree(DegreeSigmaWaveletTree),
}

impl Tree {
    fn emit(&self, label: u128, depth: usize, out: &mut Vec<u32>) {
        let d = depth as u32;
        match self {
            Tree::Binary(t) => {
                let (lo, hi) = t.node_range(label as u64, d);
                let level = t.level(d);
                out.extend((lo..hi).map(|i| level.get(i) as u32));
            }
            Tree::Degree(t) => {
                let (lo, hi) = t.node_range(label, d);
                out.extend(t.level(d)[lo..hi].iter().map(|&c| c as u32));
            }
        }
    }
}

struct Walk<'a> {
    pt: &'a PackedText,
    tau: usize,
    bits: u32,
    ell: usize,
    tree: &'a Tree,
    yes: &'a FxHashSet<u128>,
    freq: &'a FreqTable,
    /// `tails[d]` = packed `T[n−d..n)` for `d < ℓ`.
    tails: Vec<u128>,
}

struct WalkOutput {
    bwt: Vec<u32>,
    bases: FxHashMap<u128, usize>,
    target_base: Option<usize>,
}

impl Walk<'_> {
    /// Labels of the children of node `x` at depth `d` that prefix some
    /// suffix, in increasing order, each with its slice of the frequency
    /// table. `[a..b)` is the slice for `x`.
    fn children(
        &self,
        x: u128,
        d: usize,
        a: usize,
        b: usize,
        kids: &mut Vec<(u128, usize, usize)>,
    ) {
        kids.clear();
        let e = &self.freq.entries;
        let shift = (self.ell - d - 1) as u32 * self.bits;
        let mut i = a;
        while i < b {
            let y = e[i].0 >> shift;
            let j = i + e[i..b].partition_point(|k| k.0 >> shift == y);
            kids.push((y, i, j));
            i = j;
        }
        for len in d + 1..self.tails.len() {
            let t = self.tails[len];
            if t >> ((len - d) as u32 * self.bits) == x {
                let y = t >> ((len - d - 1) as u32 * self.bits);
                if let Err(pos) = kids.binary_search_by_key(&y, |k| k.0) {
                    kids.insert(pos, (y, a, a));
                }
            }
        }
    }

    fn run(&self, target: Option<(u128, usize)>) -> WalkOutput {
        let n = self.pt.len();
        let tau = self.tau;
        let mask = (1u128 << ((2 * tau) as u32 * self.bits)) - 1;
        let mut out = WalkOutput {
            bwt: Vec::with_capacity(n),
            bases: FxHashMap::default(),
            target_base: None,
        };
        let mut stack = vec![(0u128, 0usize, 0usize, self.freq.len())];
        let mut kids = Vec::new();
        while let Some((x, d, a, b)) = stack.pop() {
            if d >= 2 * tau && self.yes.contains(&(x & mask)) {
                if target == Some((x, d)) {
                    out.target_base = Some(out.bwt.len());
                }
                self.tree
                    .emit(reverse_digits(x, d, self.bits), d, &mut out.bwt);
                continue;
            }
            if d == self.ell {
                let digits: Vec<u32> = (0..d)
                    .map(|q| {
                        ((x >> ((d - 1 - q) as u32 * self.bits)) & ((1 << self.bits) - 1)) as u32
                    })
                    .collect();
                let p = period_of(&digits);
                if 3 * p <= tau {
                    if let Some(f) = self.freq.get(x) {
                        out.bases.insert(x, out.bwt.len());
                        out.bwt.extend(std::iter::repeat_n(digits[p - 1], f));
                    }
                }
                continue;
            }
            if d >= 1 && self.tails[d] == x {
                out.bwt.push(self.pt.char_at(n - d - 1));
            }
            self.children(x, d, a, b, &mut kids);
            stack.extend(kids.iter().rev().map(|&(y, lo, hi)| (y, d + 1, lo, hi)));
        }
        out
    }
}

/// BWT with the default `τ`.
pub fn build_bwt(pt: &PackedText) -> Result<BwtResult> {
    build_bwt_with_tau(pt, None)
}

/// BWT through the synchronizing-set pipeline, or through a suffix array
/// when `3τ−1 > n`, `σ > 256` or `3τ` symbols exceed 128 bits.
pub fn build_bwt_with_tau(pt: &PackedText, tau: Option<usize>) -> Result<BwtResult> {
    let (n, sigma, bits) = (pt.len(), pt.sigma(), pt.bits_per_symbol() as usize);
    let tau = match tau {
        Some(0) => return Err(Error::Domain("tau must be positive".into())),
        Some(t) => t,
        None => default_tau(n, sigma),
    };
    if n == 0 || 3 * tau - 1 > n || sigma > 256 || 3 * tau * bits > 128 {
        return Ok(build_bwt_naive(pt, tau));
    }
    let s = construct_packed_fast(pt, tau)?;
    let b = choose_sentinel(pt, tau)?;
    let s = augment_sync_set(pt, tau, &s, b)?;
    let sorted = sort_sync_suffixes(pt, &s)?;
    let w = build_w(pt, tau, &sorted, b)?;
    let ell = 3 * tau - 1;
    let freq = count_freq(pt, ell)?;
    let runs = periodic_runs(pt, &s, &sorted)?;
    if runs.len() > s.len() + 1 {
        return Err(Error::Internal(format!(
            "{} runs for {} sync positions",
            runs.len(),
            s.len()
        )));
    }

    let width = 3 * tau as u32;
    let tree = if bits == 1 && width <= 64 {
        let w64: Vec<u64> = w.iter().map(|&v| v as u64).collect();
        Tree::Binary(build_wavelet_binary(&w64, width)?)
    } else {
        Tree::Degree(build_wavelet_degree(&w, 1 << bits, width)?)
    };
    let yes: FxHashSet<u128> = s.positions().iter().map(|&p| pt.key(p, 2 * tau)).collect();
    let tails = (0..ell)
        .map(|d| if d == 0 { 0 } else { pt.key(n - d, d) })
        .collect();
    let walk = Walk {
        pt,
        tau,
        bits: bits as u32,
        ell,
        tree: &tree,
        yes: &yes,
        freq: &freq,
        tails,
    };
    // The full text is placed by its distinguishing prefix when S has a
    // position below τ, and as a run start otherwise.
    let target = s.positions().first().filter(|&&s1| s1 < tau).map(|&s1| {
        let d = s1 + 2 * tau;
        (pt.key(0, d), d)
    });
    let out = walk.run(target);
    let mut bwt = out.bwt;
    if bwt.len() != n {
        return Err(Error::Internal(format!(
            "walk emitted {} of {n} symbols",
            bwt.len()
        )));
    }
    let mut primary = None;
    if let Some((key, d)) = target {
        let base = out
            .target_base
            .ok_or_else(|| Error::Internal("text head block missing".into()))?;
        let label = reverse_digits(key, d, bits as u32);
        let shift = (3 * tau - d) * bits;
        let i1 = sorted.rank[0] as usize;
        let before = w[..=i1].iter().filter(|&&v| v >> shift == label).count();
        primary = Some(base + before - 1);
    }
    let run_slot = correct_periodic(pt, tau, &runs, &out.bases, &freq, b, &mut bwt)?;
    let primary = primary
        .or(run_slot)
        .ok_or_else(|| Error::Internal("full text was never placed".into()))?;
    bwt[primary] = pt.char_at(n - 1);
    Ok(BwtResult {
        bwt,
        primary_index: primary,
        meta: BwtMeta {
            n,
            sigma,
            tau,
            sync_size: s.len(),
            pipeline: Pipeline::Sync,
        },
    })
}

/// BWT read off an SA-IS suffix array.
pub fn build_bwt_naive(pt: &PackedText, tau: usize) -> BwtResult {
    let t = pt.to_vec();
    let n = t.len();
    let sa = suffix_array(&t);
    let mut primary = 0;
    let bwt = sa
        .iter()
        .enumerate()
        .map(|(r, &i)| {
            if i == 0 {
                primary = r;
                t[n - 1]
            } else {
                t[i as usize - 1]
            }
        })
        .collect();
    BwtResult {
        bwt,
        primary_index: primary,
        meta: BwtMeta {
            n,
            sigma: pt.sigma(),
            tau,
            sync_size: 0,
            pipeline: Pipeline::NaiveFallback,
        },
    }
}

/// Inverts the transform by LF mapping.
pub fn invert_bwt(res: &BwtResult) -> Result<Vec<u32>> {
    let n = res.bwt.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let p = res.primary_index;
    if p >= n {
        return Err(Error::Format(format!(
            "primary index {} outside [0..{n})",
            p
        )));
    }
    // Column L of the sorted rotations of T$: row 0 is the suffix `$`,
    // preceded by T[n−1]; the full text is preceded by `$` (symbol 0).
    let mut last = Vec::with_capacity(n + 1);
    last.push(res.bwt[p] as usize + 1);
    last.extend(
        res.bwt
            .iter()
            .enumerate()
            .map(|(i, &c)| if i == p { 0 } else { c as usize + 1 }),
    );
    let upper = last.iter().copied().max().unwrap_or(0) + 1;
    let mut c = vec![0usize; upper + 1];
    for &x in &last {
        c[x + 1] += 1;
    }
    for i in 1..=upper {
        c[i] += c[i - 1];
    }
    let mut seen = vec![0usize; upper];
    let lf: Vec<usize> = last
        .iter()
        .map(|&x| {
            seen[x] += 1;
            c[x] + seen[x] - 1
        })
        .collect();
    let mut out = vec![0u32; n];
    let mut row = 0;
    for k in (0..n).rev() {
        if last[row] == 0 {
            return Err(Error::Format("BWT cycles before covering the text".into()));
        }
        out[k] = (last[row] - 1) as u32;
        row = lf[row];
    }
    if last[row] != 0 {
        return Err(Error::Format(
            "primary index inconsistent with the BWT".into(),
        ));
    }
    Ok(out)
}
