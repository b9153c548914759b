//! Brute-force ground truth. Everything here works on plain slices and
//! uses nothing from the rest of the crate except `BitVec` as a container
//! and the error type.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::succinct::BitVec;

/// Outcome of comparing a fast result against an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub matched: bool,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub location: usize,
    pub expected: String,
    pub actual: String,
}

impl OracleReport {
    pub fn ok() -> OracleReport {
        OracleReport {
            matched: true,
            first_mismatch: None,
        }
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.first_mismatch {
            None => write!(f, "match"),
            Some(m) => write!(
                f,
                "mismatch at {}: expected {}, got {}",
                m.location, m.expected, m.actual
            ),
        }
    }
}

/// Compares two sequences element by element; a length difference is
/// reported at the first index past the shorter one.
pub fn compare<T: PartialEq + Debug>(expected: &[T], actual: &[T]) -> OracleReport {
    let show = |x: Option<&T>| x.map_or_else(|| "<end>".to_string(), |v| format!("{v:?}"));
    for i in 0..expected.len().max(actual.len()) {
        let (e, a) = (expected.get(i), actual.get(i));
        if e != a {
            return OracleReport {
                matched: false,
                first_mismatch: Some(Mismatch {
                    location: i,
                    expected: show(e),
                    actual: show(a),
                }),
            };
        }
    }
    OracleReport::ok()
}

/// Suffix array by sorting suffixes with direct comparison. Quadratic;
/// meant for short texts.
pub fn naive_suffix_array(t: &[u32]) -> Vec<usize> {
    let mut sa: Vec<usize> = (0..t.len()).collect();
    sa.sort_by(|&a, &b| t[a..].cmp(&t[b..]));
    sa
}

/// Suffix array by prefix doubling over rank pairs. `O(n log² n)`, so it
/// stays usable on long repetitive texts where direct comparison is not.
pub fn naive_suffix_array_doubling(t: &[u32]) -> Vec<usize> {
    let n = t.len();
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<u64> = t.iter().map(|&c| c as u64 + 1).collect();
    let mut tmp = vec![0u64; n];
    let mut k = 1;
    loop {
        let key = |i: usize| (rank[i], if i + k < n { rank[i + k] } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        let mut r = 1;
        for w in 0..n {
            if w > 0 && key(sa[w - 1]) != key(sa[w]) {
                r += 1;
            }
            tmp[sa[w]] = r;
        }
        std::mem::swap(&mut rank, &mut tmp);
        if r as usize == n || k >= n {
            return sa;
        }
        k *= 2;
    }
}

/// BWT and 0-based primary index, `BWT[i] = T[SA[i]−1]` read cyclically.
pub fn naive_bwt(t: &[u32]) -> (Vec<u32>, usize) {
    let n = t.len();
    let sa = naive_suffix_array_doubling(t);
    let bwt = sa.iter().map(|&s| t[(s + n - 1) % n]).collect();
    let primary = sa.iter().position(|&s| s == 0).unwrap_or(0);
    (bwt, primary)
}

pub fn naive_lce(t: &[u32], i: usize, j: usize) -> Result<usize> {
    if i >= t.len() || j >= t.len() {
        return Err(Error::Bounds(format!(
            "position out of range for length {}",
            t.len()
        )));
    }
    Ok(t[i..]
        .iter()
        .zip(&t[j..])
        .take_while(|(a, b)| a == b)
        .count())
}

/// Smallest `p ≥ 1` with `x[i] = x[i+p]` wherever both exist; `1` for empty input.
pub fn naive_period(x: &[u32]) -> usize {
    (1..=x.len().max(1))
        .find(|&p| (0..x.len().saturating_sub(p)).all(|i| x[i] == x[i + p]))
        .unwrap()
}

pub fn naive_inversions(a: &[u64]) -> u64 {
    let mut c = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if a[i] > a[j] {
                c += 1;
            }
        }
    }
    c
}

/// Inversions by a Fenwick tree over value ranks, for arrays too long for
/// the quadratic count.
pub fn fenwick_inversions(a: &[u64]) -> u64 {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut tree = vec![0u64; sorted.len() + 1];
    let mut c = 0;
    for (seen, &x) in a.iter().enumerate() {
        let r = sorted.binary_search(&x).unwrap() + 1;
        let mut i = r;
        let mut not_greater = 0;
        while i > 0 {
            not_greater += tree[i];
            i -= i & i.wrapping_neg();
        }
        c += seen as u64 - not_greater;
        let mut i = r;
        while i < tree.len() {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    c
}

/// `B_X` for every label `X` (as `(|X|, value)`) that is a proper prefix
/// of some input value; every other label has an empty bitvector.
pub fn naive_wavelet_bitvectors(values: &[u64], b: u32) -> BTreeMap<(u32, u64), BitVec> {
    let mut out = BTreeMap::new();
    for depth in 0..b {
        let mut labels: Vec<u64> = values.iter().map(|&v| prefix_bits(v, b, depth)).collect();
        labels.sort_unstable();
        labels.dedup();
        for x in labels {
            let bits = values
                .iter()
                .filter(|&&v| prefix_bits(v, b, depth) == x)
                .map(|&v| (v >> (b - depth - 1)) & 1 == 1)
                .collect();
            out.insert((depth, x), bits);
        }
    }
    out
}

fn prefix_bits(v: u64, b: u32, depth: u32) -> u64 {
    if depth == 0 {
        0
    } else {
        v >> (b - depth)
    }
}

/// Positions `i` (0-based) whose length-`len` fragment exists and has
/// period at most `τ/3`. With `len = 3τ−1` this is `R`; with `len = τ` it is `Q`.
pub fn naive_periodic_positions(t: &[u32], len: usize, tau: usize) -> Vec<usize> {
    if len == 0 || len > t.len() {
        return Vec::new();
    }
    (0..=t.len() - len)
        .filter(|&i| 3 * naive_period(&t[i..i + len]) <= tau)
        .collect()
}

/// Direct check of both synchronizing-set conditions, returning a
/// description of the first violation found.
pub fn naive_sync_violation(t: &[u32], tau: usize, set: &[usize]) -> Option<String> {
    let n = t.len();
    if tau == 0 || 2 * tau > n {
        return Some(format!("tau={tau} not in [1..n/2] for n={n}"));
    }
    let top = n - 2 * tau;
    let mut member = vec![false; top + 1];
    for &s in set {
        if s > top {
            return Some(format!("position {s} outside [0..{top}]"));
        }
        member[s] = true;
    }
    let mut seen: HashMap<&[u32], (usize, bool)> = HashMap::new();
    for i in 0..=top {
        let ctx = &t[i..i + 2 * tau];
        let (j, m) = *seen.entry(ctx).or_insert((i, member[i]));
        if m != member[i] {
            return Some(format!("consistency violated by {j} and {i}"));
        }
    }
    let r = naive_periodic_positions(t, 3 * tau - 1, tau);
    let windows = (n + 2).saturating_sub(3 * tau);
    for i in 0..windows {
        let empty = !member[i..i + tau].iter().any(|&b| b);
        if empty != r.binary_search(&i).is_ok() {
            return Some(format!("density violated at {i}"));
        }
    }
    None
}
