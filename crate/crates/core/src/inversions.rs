//! Inversion counting through the BWT of a binary reduction text.
//!
//! The inversions of `A` equal the total inversions of the bitvectors of its
//! wavelet tree. Each such bitvector `B_X` is a contiguous BWT range of a
//! binary text `T_A` built from `A`, so the count follows from one BWT.

use std::collections::BTreeMap;

use crate::bwt_builder::{build_bwt, build_bwt_naive, count_freq};
use crate::error::{Error, Result};
use crate::packed_text::PackedText;
use crate::succinct::{count_inversions_bits, BitVec};
use crate::suffix_core::rank_reduce;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Values below `2^k`.
    Small { k: usize },
    /// Values below the padded length `m`.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BwtBackend {
    #[default]
    Sync,
    Naive,
}

#[derive(Clone, Debug)]
pub struct ReductionText {
    pub bits: PackedText,
    /// Padded length, a power of two.
    pub m: usize,
    /// Value width in bits.
    pub k: usize,
    pub variant: Variant,
    /// The padded array the text encodes.
    pub values: Vec<u64>,
}

/// `max(1, ⌊log₂ m / 8⌋)`.
pub fn default_small_k(m: usize) -> usize {
    ((usize::BITS - 1 - m.max(1).leading_zeros()) as usize / 8).max(1)
}

fn pad(a: &[u64], fill: u64) -> (Vec<u64>, usize) {
    let m = a.len().max(2).next_power_of_two();
    let mut v = a.to_vec();
    v.resize(m, fill);
    (v, m.trailing_zeros() as usize)
}

fn push_bin(out: &mut Vec<u32>, x: u64, width: usize) {
    out.extend((0..width).rev().map(|b| ((x >> b) & 1) as u32));
}

fn push_rev_bin(out: &mut Vec<u32>, x: u64, width: usize) {
    out.extend((0..width).map(|b| ((x >> b) & 1) as u32));
}

/// Blocks `rev(bin_k(A[i])) · 01 · 1^k · pad(bin_{log m}(i)) · 0`, where
/// `pad` puts a 0 before every bit.
pub fn build_reduction_small(a: &[u64], k: usize) -> Result<ReductionText> {
    if k == 0 || k >= 64 {
        return Err(Error::Domain(format!("value width {k} outside [1..63]")));
    }
    if let Some(&v) = a.iter().find(|&&v| v >> k != 0) {
        return Err(Error::Domain(format!("value {v} does not fit in {k} bits")));
    }
    let (values, lg) = pad(a, (1u64 << k) - 1);
    if k > lg {
        return Err(Error::Domain(format!(
            "value width {k} exceeds log m = {lg}"
        )));
    }
    let mut t = Vec::with_capacity(values.len() * (3 + 2 * lg + 2 * k));
    for (i, &v) in values.iter().enumerate() {
        push_rev_bin(&mut t, v, k);
        t.extend([0, 1]);
        t.extend(std::iter::repeat_n(1, k));
        for b in (0..lg).rev() {
            t.push(0);
            t.push(((i >> b) & 1) as u32);
        }
        t.push(0);
    }
    let m = values.len();
    Ok(ReductionText {
        bits: PackedText::pack(&t, 2)?,
        m,
        k,
        variant: Variant::Small { k },
        values,
    })
}

/// Blocks `rev(bin_b(A[i])) · 01 · 1^b · 0 · bin_b(i) · 0 · 1^b · 0` with
/// `b = log m`.
pub fn build_reduction_general(a: &[u64]) -> Result<ReductionText> {
    let m = a.len().max(2).next_power_of_two();
    if let Some(&v) = a.iter().find(|&&v| v >= m as u64) {
        return Err(Error::Domain(format!("value {v} not below m = {m}")));
    }
    let (values, b) = pad(a, m as u64 - 1);
    let mut t = Vec::with_capacity(m * (5 + 4 * b));
    for (i, &v) in values.iter().enumerate() {
        push_rev_bin(&mut t, v, b);
        t.extend([0, 1]);
        t.extend(std::iter::repeat_n(1, b));
        t.push(0);
        push_bin(&mut t, i as u64, b);
        t.push(0);
        t.extend(std::iter::repeat_n(1, b));
        t.push(0);
    }
    Ok(ReductionText {
        bits: PackedText::pack(&t, 2)?,
        m,
        k: b,
        variant: Variant::General,
        values,
    })
}

/// Occurrence counts of every prefix (`pref`) and suffix (`suf`) of the
/// strings `rev(bin_b(A[i]))`. `pref[ℓ][x]` counts the length-`ℓ` string
/// with value `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueFrequencies {
    pub pref: Vec<Vec<usize>>,
    pub suf: Vec<Vec<usize>>,
}

pub fn value_frequencies(values: &[u64], b: usize) -> ValueFrequencies {
    let reversed = |v: u64| (0..b).fold(0u64, |acc, q| (acc << 1) | ((v >> q) & 1));
    let mut top = vec![0usize; 1 << b];
    for &v in values {
        top[reversed(v) as usize] += 1;
    }
    let mut pref = vec![top.clone()];
    let mut suf = vec![top];
    for len in (0..b).rev() {
        let (p, s) = (pref.last().unwrap(), suf.last().unwrap());
        let np = (0..1usize << len)
            .map(|x| p[2 * x] + p[2 * x + 1])
            .collect();
        let ns = (0..1usize << len)
            .map(|x| s[x] + s[x | (1 << len)])
            .collect();
        pref.push(np);
        suf.push(ns);
    }
    pref.reverse();
    suf.reverse();
    ValueFrequencies { pref, suf }
}

/// Wavelet label `X` of length `d` as a key `(d, X)`, matching
/// [`crate::reference_oracles::naive_wavelet_bitvectors`].
pub type WaveletBitvectors = BTreeMap<(u32, u64), BitVec>;

fn reverse_bits(x: u64, len: usize) -> u64 {
    (0..len).fold(0u64, |acc, q| (acc << 1) | ((x >> q) & 1))
}

/// Reads every non-empty `B_X` off the BWT of the reduction text.
pub fn extract_bitvectors(rt: &ReductionText, backend: BwtBackend) -> Result<WaveletBitvectors> {
    let bwt = match backend {
        BwtBackend::Sync => build_bwt(&rt.bits)?,
        BwtBackend::Naive => build_bwt_naive(&rt.bits, 0),
    };
    let ranges = match rt.variant {
        Variant::Small { k } => small_ranges(rt, k)?,
        Variant::General => general_ranges(rt)?,
    };
    let mut out = WaveletBitvectors::new();
    for ((d, label), (lo, hi)) in ranges {
        if lo < hi {
            out.insert(
                (d, label),
                bwt.bwt[lo..hi].iter().map(|&c| c == 1).collect(),
            );
        }
    }
    Ok(out)
}

/// Windows of one length with prefix sums, plus the suffixes shorter than it.
struct Counts {
    keys: Vec<u128>,
    cum: Vec<usize>,
    len: usize,
    tails: Vec<(u128, usize)>,
}

impl Counts {
    fn new(pt: &PackedText, len: usize) -> Result<Counts> {
        let table = count_freq(pt, len)?;
        let mut keys = Vec::with_capacity(table.len());
        let mut cum = vec![0];
        for (key, f) in table.iter() {
            keys.push(key);
            cum.push(cum.last().unwrap() + f);
        }
        let n = pt.len();
        let tails = (1..len.min(n + 1))
            .map(|d| {
                (
                    (n - d..n).fold(0u128, |a, q| (a << 1) | pt.char_at(q) as u128),
                    d,
                )
            })
            .collect();
        Ok(Counts {
            keys,
            cum,
            len,
            tails,
        })
    }

    /// Suffixes starting with the `d`-bit string `y`.
    fn with_prefix(&self, y: u128, d: usize) -> usize {
        let shift = (self.len - d) as u32;
        let lo = y << shift;
        let hi = lo | ((1u128 << shift) - 1);
        let a = self.keys.partition_point(|&k| k < lo);
        let b = self.keys.partition_point(|&k| k <= hi);
        let short = self
            .tails
            .iter()
            .filter(|&&(t, l)| l >= d && t >> (l - d) == y)
            .count();
        self.cum[b] - self.cum[a] + short
    }

    /// Suffixes that sort before every suffix starting with the full-length
    /// string `x`.
    fn before(&self, x: u128) -> usize {
        let a = self.keys.partition_point(|&k| k < x);
        let short = self
            .tails
            .iter()
            .filter(|&&(t, l)| t <= x >> (self.len - l))
            .count();
        self.cum[a] + short
    }

    fn is_suffix(&self, y: u128, d: usize) -> bool {
        self.tails.iter().any(|&(t, l)| l == d && t == y)
    }
}

type Ranges = Vec<((u32, u64), (usize, usize))>;

/// Preorder walk over strings of length at most `2k+1`; the node
/// `rev(X)·01·1^k` covers the range of `B_X`.
fn small_ranges(rt: &ReductionText, k: usize) -> Result<Ranges> {
    let len = 2 * k + 1;
    let counts = Counts::new(&rt.bits, len)?;
    let ones = (1u128 << (k + 1)) - 1;
    let mut ranges = Vec::new();
    let mut pos = 0usize;
    let mut stack = vec![(0u128, 0usize)];
    while let Some((y, d)) = stack.pop() {
        let f = if d == 0 {
            rt.bits.len()
        } else {
            counts.with_prefix(y, d)
        };
        if f == 0 {
            continue;
        }
        if d >= k + 2 && d - k - 2 < k && y & ((ones << 1) | 1) == ones {
            let xd = d - k - 2;
            let label = reverse_bits((y >> (k + 2)) as u64, xd);
            ranges.push(((xd as u32, label), (pos, pos + f)));
            pos += f;
            continue;
        }
        if d == len {
            pos += f;
            continue;
        }
        if d > 0 && counts.is_suffix(y, d) {
            pos += 1;
        }
        stack.push(((y << 1) | 1, d + 1));
        stack.push((y << 1, d + 1));
    }
    Ok(ranges)
}

/// Each label `X` of length below `b` maps to the `b`-bit string
/// `x = rev(X)·0·1^j`, and the range of `rev(X)·01·1^b` ends where the
/// range of `x` ends. Its size is the number of values whose reversed
/// encoding ends with `rev(X)`.
fn general_ranges(rt: &ReductionText) -> Result<Ranges> {
    let b = rt.k;
    let counts = Counts::new(&rt.bits, b)?;
    let freqs = value_frequencies(&rt.values, b);
    let mut ranges = Vec::with_capacity(rt.m);
    for d in 0..b {
        let j = b - d - 1;
        for label in 0..1u64 << d {
            let z = reverse_bits(label, d) as u128;
            let x = (z << (j + 1)) | ((1u128 << j) - 1);
            let end = counts.before(x) + counts.with_prefix(x, b);
            let size = freqs.suf[d][z as usize];
            let lo = end
                .checked_sub(size)
                .ok_or_else(|| Error::Internal(format!("range of label {label} underflows")))?;
            ranges.push(((d as u32, label), (lo, end)));
        }
    }
    Ok(ranges)
}

/// Inversions of `a`. The general variant first replaces values by their
/// ranks, which keeps every comparison.
pub fn count_inversions_via_bwt(a: &[u64], variant: Variant, backend: BwtBackend) -> Result<u64> {
    let rt = match variant {
        Variant::Small { k } => build_reduction_small(a, k)?,
        Variant::General => {
            let ranks: Vec<u64> = rank_reduce(a).0.into_iter().map(u64::from).collect();
            build_reduction_general(&ranks)?
        }
    };
    let bvs = extract_bitvectors(&rt, backend)?;
    Ok(bvs.values().map(count_inversions_bits).sum())
}
