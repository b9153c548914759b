//! Suffix array by induced sorting, Kasai LCP and sparse-table RMQ.

use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

const EMPTY: u32 = u32::MAX;

/// Maps values to their ranks among the distinct values present. Returns
/// the reduced sequence and the number of distinct values.
pub fn rank_reduce<T: Ord + Copy + Hash>(seq: &[T]) -> (Vec<u32>, u32) {
    let mut ids: FxHashMap<T, u32> = FxHashMap::default();
    for &x in seq {
        ids.entry(x).or_insert(0);
    }
    let mut alphabet: Vec<T> = ids.keys().copied().collect();
    alphabet.sort_unstable();
    for (r, x) in alphabet.iter().enumerate() {
        ids.insert(*x, r as u32);
    }
    (seq.iter().map(|x| ids[x]).collect(), alphabet.len() as u32)
}

/// Suffix array of a sequence over an arbitrary ordered alphabet.
pub fn suffix_array<T: Ord + Copy + Hash>(seq: &[T]) -> Vec<u32> {
    let (s, k) = rank_reduce(seq);
    sais(&s, k.saturating_sub(1))
}

/// SA-IS over symbols in `[0..=upper]`. Suffixes compare without a
/// terminator, so a proper prefix sorts first.
pub fn sais(s: &[u32], upper: u32) -> Vec<u32> {
    let n = s.len();
    assert!(
        n < EMPTY as usize,
        "sequence too long for 32-bit suffix array"
    );
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        2 => return if s[0] < s[1] { vec![0, 1] } else { vec![1, 0] },
        _ => {}
    }
    let upper = upper as usize;
    let mut sa = vec![EMPTY; n];
    let mut ls = vec![false; n];
    for i in (0..n - 1).rev() {
        ls[i] = if s[i] == s[i + 1] {
            ls[i + 1]
        } else {
            s[i] < s[i + 1]
        };
    }
    // sum_l[c]: start of bucket c; sum_s[c]: start of its S-type part.
    let mut sum_l = vec![0u32; upper + 1];
    let mut sum_s = vec![0u32; upper + 1];
    for i in 0..n {
        if !ls[i] {
            sum_s[s[i] as usize] += 1;
        } else {
            sum_l[s[i] as usize + 1] += 1;
        }
    }
    for c in 0..=upper {
        sum_s[c] += sum_l[c];
        if c < upper {
            sum_l[c + 1] += sum_s[c];
        }
    }

    let induce = |sa: &mut [u32], lms: &[u32]| {
        sa.fill(EMPTY);
        let mut buf = sum_s.clone();
        for &d in lms {
            let c = s[d as usize] as usize;
            sa[buf[c] as usize] = d;
            buf[c] += 1;
        }
        buf.copy_from_slice(&sum_l);
        let c = s[n - 1] as usize;
        sa[buf[c] as usize] = (n - 1) as u32;
        buf[c] += 1;
        for i in 0..n {
            let v = sa[i];
            if v != EMPTY && v >= 1 && !ls[v as usize - 1] {
                let c = s[v as usize - 1] as usize;
                sa[buf[c] as usize] = v - 1;
                buf[c] += 1;
            }
        }
        buf.copy_from_slice(&sum_l);
        for i in (0..n).rev() {
            let v = sa[i];
            if v != EMPTY && v >= 1 && ls[v as usize - 1] {
                let c = s[v as usize - 1] as usize + 1;
                buf[c] -= 1;
                sa[buf[c] as usize] = v - 1;
            }
        }
    };

    let mut lms_map = vec![EMPTY; n + 1];
    let mut lms = Vec::new();
    for i in 1..n {
        if !ls[i - 1] && ls[i] {
            lms_map[i] = lms.len() as u32;
            lms.push(i as u32);
        }
    }
    let m = lms.len();
    induce(&mut sa, &lms);

    if m > 0 {
        let mut sorted_lms: Vec<u32> = sa
            .iter()
            .copied()
            .filter(|&v| lms_map[v as usize] != EMPTY)
            .collect();
        let mut rec_s = vec![0u32; m];
        let mut rec_upper = 0u32;
        rec_s[lms_map[sorted_lms[0] as usize] as usize] = 0;
        for w in 1..m {
            let (mut l, mut r) = (sorted_lms[w - 1] as usize, sorted_lms[w] as usize);
            let end = |p: usize| {
                let k = lms_map[p] as usize + 1;
                if k < m {
                    lms[k] as usize
                } else {
                    n
                }
            };
            let (end_l, end_r) = (end(l), end(r));
            let mut same = end_l - l == end_r - r;
            if same {
                while l < end_l && s[l] == s[r] {
                    l += 1;
                    r += 1;
                }
                if l == n || s[l] != s[r] {
                    same = false;
                }
            }
            if !same {
                rec_upper += 1;
            }
            rec_s[lms_map[sorted_lms[w] as usize] as usize] = rec_upper;
        }
        let rec_sa = sais(&rec_s, rec_upper);
        for (slot, &r) in sorted_lms.iter_mut().zip(&rec_sa) {
            *slot = lms[r as usize];
        }
        induce(&mut sa, &sorted_lms);
    }
    sa
}

/// `lcp[r] = lcp(seq[sa[r−1]..], seq[sa[r]..])` for `r ≥ 1`, `lcp[0] = 0`.
pub fn lcp_kasai<T: Eq>(seq: &[T], sa: &[u32], isa: &[u32]) -> Vec<u32> {
    let n = seq.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = isa[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && seq[i + h] == seq[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Range minimum by sparse table.
#[derive(Clone, Debug)]
pub struct SparseTable {
    table: Vec<Vec<u32>>,
}

impl SparseTable {
    pub fn new(values: &[u32]) -> SparseTable {
        let mut table = vec![values.to_vec()];
        let mut k = 1;
        while 2 * k <= values.len() {
            let prev = table.last().unwrap();
            let row = (0..values.len() + 1 - 2 * k)
                .map(|i| prev[i].min(prev[i + k]))
                .collect();
            table.push(row);
            k *= 2;
        }
        SparseTable { table }
    }

    /// Minimum over `[lo..hi)`; the range must be non-empty.
    pub fn min(&self, lo: usize, hi: usize) -> u32 {
        debug_assert!(lo < hi);
        let k = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        self.table[k][lo].min(self.table[k][hi - (1 << k)])
    }
}

/// SA, inverse SA, LCP and RMQ over one sequence.
#[derive(Clone, Debug)]
pub struct SuffixArrayIndex {
    pub sa: Vec<u32>,
    pub isa: Vec<u32>,
    pub lcp: Vec<u32>,
    rmq: SparseTable,
}

pub fn build_suffix_array<T: Ord + Copy + Hash>(seq: &[T]) -> SuffixArrayIndex {
    let sa = suffix_array(seq);
    let mut isa = vec![0u32; sa.len()];
    for (r, &p) in sa.iter().enumerate() {
        isa[p as usize] = r as u32;
    }
    let lcp = lcp_kasai(seq, &sa, &isa);
    let rmq = SparseTable::new(&lcp);
    SuffixArrayIndex { sa, isa, lcp, rmq }
}

impl SuffixArrayIndex {
    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    /// Longest common prefix of the suffixes starting at `i` and `j`.
    pub fn lce_in_seq(&self, i: usize, j: usize) -> Result<usize> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::Bounds(format!(
                "lce({i}, {j}) on a sequence of length {n}"
            )));
        }
        Ok(self.lce_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn lce_unchecked(&self, i: usize, j: usize) -> usize {
        if i == j {
            return self.len() - i;
        }
        let (a, b) = (self.isa[i] as usize, self.isa[j] as usize);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.rmq.min(lo + 1, hi + 1) as usize
    }
}
