//! Bitvectors with rank support, binary wavelet trees and degree-σ
//! wavelet trees.
//!
//! Both wavelet trees are stored level by level. Level `d` holds the
//! concatenation of every node bitvector (or digit string) at depth `d`,
//! ordered by node label, so the node with label `X` occupies one
//! contiguous range. That range is the same at every level below `X`, and
//! it is located by binary search over the sorted input values.

use crate::error::{Error, Result};

/// Growable bit sequence.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn new() -> BitVec {
        BitVec::default()
    }

    pub fn with_capacity(bits: usize) -> BitVec {
        BitVec {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// Parses a string of `0` and `1` characters.
    pub fn from_01(s: &str) -> BitVec {
        s.bytes().map(|c| c == b'1').collect()
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit {i} out of bounds for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Copy of bits `[lo..hi)`.
    pub fn slice(&self, lo: usize, hi: usize) -> BitVec {
        assert!(lo <= hi && hi <= self.len);
        (lo..hi).map(|i| self.get(i)).collect()
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> BitVec {
        let mut bv = BitVec::new();
        for b in iter {
            bv.push(b);
        }
        bv
    }
}

impl std::fmt::Display for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Bitvector with constant-time rank.
///
/// Each 512-bit block stores its absolute rank in one word and the
/// in-block ranks of its words 1..7 as 9-bit fields of a second word.
#[derive(Clone, Debug)]
pub struct RankBitvector {
    bits: BitVec,
    block_rank: Vec<u64>,
    word_rank: Vec<u64>,
}

impl RankBitvector {
    pub fn new(bits: BitVec) -> RankBitvector {
        let blocks = bits.len() / 512 + 1;
        let mut block_rank = Vec::with_capacity(blocks);
        let mut word_rank = Vec::with_capacity(blocks);
        let mut total = 0u64;
        for blk in 0..blocks {
            block_rank.push(total);
            let mut inner = 0u64;
            let mut packed = 0u64;
            for w in 0..8 {
                if w > 0 {
                    packed |= inner << (9 * (w - 1));
                }
                if let Some(word) = bits.words.get(blk * 8 + w) {
                    inner += word.count_ones() as u64;
                }
            }
            word_rank.push(packed);
            total += inner;
        }
        RankBitvector {
            bits,
            block_rank,
            word_rank,
        }
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    /// Number of ones among the first `i` bits, for `i ∈ [0..len]`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        assert!(
            i <= self.bits.len(),
            "rank position {i} exceeds length {}",
            self.bits.len()
        );
        let w = i / 64;
        let blk = w / 8;
        let wi = w % 8;
        let mut r = self.block_rank[blk];
        if wi > 0 {
            r += (self.word_rank[blk] >> (9 * (wi - 1))) & 0x1ff;
        }
        let off = i % 64;
        if off > 0 {
            r += (self.bits.words[w] & ((1u64 << off) - 1)).count_ones() as u64;
        }
        r as usize
    }

    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }
}

/// Builds a rank-supported bitvector.
pub fn build_rank(bits: BitVec) -> RankBitvector {
    RankBitvector::new(bits)
}

/// `|{(i, j) : i < j, bits[i] = 1, bits[j] = 0}|`.
pub fn count_inversions_bits(bits: &BitVec) -> u64 {
    let mut ones = 0u64;
    let mut inv = 0u64;
    for b in bits.iter() {
        if b {
            ones += 1;
        } else {
            inv += ones;
        }
    }
    inv
}

/// Binary wavelet tree over `b`-bit values.
#[derive(Clone, Debug)]
pub struct BinaryWaveletTree {
    b: u32,
    levels: Vec<BitVec>,
    sorted: Vec<u64>,
}

impl BinaryWaveletTree {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn bits_per_value(&self) -> u32 {
        self.b
    }

    #[inline]
    fn prefix(&self, v: u64, depth: u32) -> u64 {
        if depth == 0 {
            0
        } else {
            v >> (self.b - depth)
        }
    }

    /// Range `[lo..hi)` of node `label` (of length `depth`) within its level.
    pub fn node_range(&self, label: u64, depth: u32) -> (usize, usize) {
        if depth == 0 {
            return (0, self.sorted.len());
        }
        let lo = self
            .sorted
            .partition_point(|&v| self.prefix(v, depth) < label);
        let hi = self
            .sorted
            .partition_point(|&v| self.prefix(v, depth) <= label);
        (lo, hi)
    }

    /// Level `d` as one bitvector.
    pub fn level(&self, d: u32) -> &BitVec {
        &self.levels[d as usize]
    }

    /// `B_X` for the label whose `depth` bits are `label`, most significant
    /// bit first.
    pub fn node_bitvector(&self, label: u64, depth: u32) -> Result<BitVec> {
        if depth >= self.b {
            return Err(Error::Domain(format!(
                "label length {depth} must be below the value width {}",
                self.b
            )));
        }
        if depth < 64 && label >> depth != 0 {
            return Err(Error::Domain(format!(
                "label {label} has more than {depth} bits"
            )));
        }
        let (lo, hi) = self.node_range(label, depth);
        Ok(self.levels[depth as usize].slice(lo, hi))
    }
}

/// Builds the wavelet tree by a stable partition per level.
pub fn build_wavelet_binary(values: &[u64], b: u32) -> Result<BinaryWaveletTree> {
    if b > 64 {
        return Err(Error::Domain(format!("value width {b} exceeds 64 bits")));
    }
    if let Some(&v) = values.iter().find(|&&v| b < 64 && v >> b != 0) {
        return Err(Error::Domain(format!("value {v} does not fit in {b} bits")));
    }
    let mut cur = values.to_vec();
    let mut next = vec![0u64; cur.len()];
    let mut levels = Vec::with_capacity(b as usize);
    for d in 0..b {
        let shift = b - 1 - d;
        let mut level = BitVec::with_capacity(cur.len());
        for &v in &cur {
            level.push((v >> shift) & 1 == 1);
        }
        levels.push(level);
        // Values are grouped by their top `d` bits; split each group by the next bit.
        let group = |v: u64| if d == 0 { 0 } else { v >> (shift + 1) };
        let mut start = 0;
        while start < cur.len() {
            let g = group(cur[start]);
            let mut end = start;
            while end < cur.len() && group(cur[end]) == g {
                end += 1;
            }
            let mut out = start;
            for bit in [0, 1] {
                for &v in &cur[start..end] {
                    if (v >> shift) & 1 == bit {
                        next[out] = v;
                        out += 1;
                    }
                }
            }
            start = end;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    if b == 0 {
        cur.sort_unstable();
    }
    Ok(BinaryWaveletTree {
        b,
        levels,
        sorted: cur,
    })
}

/// Wavelet tree of degree `σ` (a power of two) over `b`-digit values.
#[derive(Clone, Debug)]
pub struct DegreeSigmaWaveletTree {
    sigma: u32,
    log_sigma: u32,
    b: u32,
    levels: Vec<Vec<u8>>,
    sorted: Vec<u128>,
}

impl DegreeSigmaWaveletTree {
    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn digits_per_value(&self) -> u32 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    #[inline]
    fn prefix(&self, v: u128, depth: u32) -> u128 {
        if depth == 0 {
            0
        } else {
            v >> (self.log_sigma * (self.b - depth))
        }
    }

    pub fn node_range(&self, label: u128, depth: u32) -> (usize, usize) {
        if depth == 0 {
            return (0, self.sorted.len());
        }
        let lo = self
            .sorted
            .partition_point(|&v| self.prefix(v, depth) < label);
        let hi = self
            .sorted
            .partition_point(|&v| self.prefix(v, depth) <= label);
        (lo, hi)
    }

    /// `D_Y` for the label whose `depth` base-σ digits are `label`.
    pub fn node_digits(&self, label: u128, depth: u32) -> Result<&[u8]> {
        if depth >= self.b {
            return Err(Error::Domain(format!(
                "label length {depth} must be below the digit count {}",
                self.b
            )));
        }
        let (lo, hi) = self.node_range(label, depth);
        Ok(&self.levels[depth as usize][lo..hi])
    }

    pub fn level(&self, d: u32) -> &[u8] {
        &self.levels[d as usize]
    }
}

/// Builds the degree-σ wavelet tree; `sigma` must be a power of two no
/// larger than 256.
pub fn build_wavelet_degree(values: &[u128], sigma: u32, b: u32) -> Result<DegreeSigmaWaveletTree> {
    if !sigma.is_power_of_two() || !(2..=256).contains(&sigma) {
        return Err(Error::Domain(format!(
            "degree {sigma} must be a power of two in [2..256]"
        )));
    }
    let log_sigma = sigma.trailing_zeros();
    let total = log_sigma * b;
    if total > 128 {
        return Err(Error::Domain(format!(
            "{b} digits of base {sigma} exceed 128 bits"
        )));
    }
    if let Some(&v) = values.iter().find(|&&v| total < 128 && v >> total != 0) {
        return Err(Error::Domain(format!(
            "value {v} has more than {b} base-{sigma} digits"
        )));
    }
    let mask = (sigma - 1) as u128;
    let mut cur = values.to_vec();
    let mut levels = Vec::with_capacity(b as usize);
    for d in 0..b {
        let shift = log_sigma * (b - 1 - d);
        levels.push(cur.iter().map(|&v| ((v >> shift) & mask) as u8).collect());
        // Stable, and nearly linear since `cur` is already sorted by the top `d` digits.
        cur.sort_by_key(|&v| v >> shift);
    }
    if b == 0 {
        cur.sort_unstable();
    }
    Ok(DegreeSigmaWaveletTree {
        sigma,
        log_sigma,
        b,
        levels,
        sorted: cur,
    })
}
