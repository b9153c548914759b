//! Packed storage of texts over `[0..σ)`.
//!
//! Every symbol takes `⌈log₂ σ⌉` bits. Symbols are laid out back to back in
//! 64-bit words, least significant bits first, so symbol 0 sits in the low
//! bits of word 0 and a symbol may straddle two words.
//!
//! Substrings of up to [`PackedText::key_cap`] symbols are returned as
//! [`SubstringKey`]s: integers whose base-`2^bits` digits are the symbols,
//! first symbol most significant. Equal-length keys compare like the
//! substrings they encode.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Bits used per symbol for an alphabet of size `sigma`.
pub fn bits_for_sigma(sigma: u32) -> u32 {
    if sigma <= 2 {
        1
    } else {
        32 - (sigma - 1).leading_zeros()
    }
}

/// A substring packed into one integer, first symbol in the most
/// significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubstringKey {
    pub value: u128,
    pub len: usize,
    pub bits: u32,
}

impl SubstringKey {
    /// Symbol at offset `t` (0-based, from the left).
    pub fn digit(&self, t: usize) -> u32 {
        debug_assert!(t < self.len);
        let shift = (self.len - 1 - t) as u32 * self.bits;
        ((self.value >> shift) & digit_mask(self.bits)) as u32
    }

    /// Symbols of the key, left to right.
    pub fn digits(&self) -> Vec<u32> {
        (0..self.len).map(|t| self.digit(t)).collect()
    }

    /// Builds a key from explicit symbols.
    pub fn from_digits(digits: &[u32], bits: u32) -> SubstringKey {
        assert!(digits.len() as u32 * bits <= 128, "key exceeds 128 bits");
        let mut value = 0u128;
        for &d in digits {
            value = (value << bits) | d as u128;
        }
        SubstringKey {
            value,
            len: digits.len(),
            bits,
        }
    }
}

fn digit_mask(bits: u32) -> u128 {
    (1u128 << bits) - 1
}

/// Key of the reversed symbol sequence.
pub fn reverse_key(k: SubstringKey) -> SubstringKey {
    SubstringKey {
        value: reverse_digits(k.value, k.len, k.bits),
        ..k
    }
}

static REV_TABLES: [OnceLock<Vec<u16>>; 5] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

/// Table reversing the order of `bits`-wide digits inside a 16-bit chunk.
fn rev_table(bits: u32) -> &'static [u16] {
    let slot = bits.trailing_zeros() as usize;
    REV_TABLES[slot].get_or_init(|| {
        let per = 16 / bits;
        let mask = (1u32 << bits) - 1;
        (0..=u16::MAX as u32)
            .map(|v| {
                let mut out = 0u32;
                for d in 0..per {
                    let digit = (v >> (d * bits)) & mask;
                    out |= digit << ((per - 1 - d) * bits);
                }
                out as u16
            })
            .collect()
    })
}

/// Reverses the order of the low `len` digits of `x`.
pub(crate) fn reverse_digits(x: u128, len: usize, bits: u32) -> u128 {
    let total = len as u32 * bits;
    if total == 0 {
        return 0;
    }
    debug_assert!(total <= 128);
    if 16 % bits == 0 {
        let table = rev_table(bits);
        let mut out = 0u128;
        for c in 0..8 {
            let chunk = (x >> (16 * c)) as u16;
            out |= (table[chunk as usize] as u128) << (16 * (7 - c));
        }
        out >> (128 - total)
    } else {
        let mask = digit_mask(bits);
        let mut out = 0u128;
        for t in 0..len as u32 {
            out = (out << bits) | ((x >> (t * bits)) & mask);
        }
        out
    }
}

/// Shortest period of a symbol sequence via the failure function.
pub(crate) fn period_of(symbols: &[u32]) -> usize {
    let n = symbols.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n + 1];
    let mut k = 0usize;
    for i in 1..n {
        while k > 0 && symbols[i] != symbols[k] {
            k = fail[k];
        }
        if symbols[i] == symbols[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    n - fail[n]
}

/// Immutable text over `[0..σ)` in packed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedText {
    words: Vec<u64>,
    n: usize,
    sigma: u32,
    bits: u32,
}

impl PackedText {
    /// Packs `symbols`, each of which must be below `sigma`.
    pub fn pack(symbols: &[u32], sigma: u32) -> Result<PackedText> {
        if sigma < 2 {
            return Err(Error::Domain(format!("alphabet size {sigma} is below 2")));
        }
        let bits = bits_for_sigma(sigma);
        let n = symbols.len();
        // One spare word lets reads run past the last symbol without a branch.
        let mut words = vec![0u64; (n * bits as usize).div_ceil(64) + 1];
        for (i, &c) in symbols.iter().enumerate() {
            if c >= sigma {
                return Err(Error::Domain(format!(
                    "symbol {c} at position {i} is not below sigma = {sigma}"
                )));
            }
            let pos = i * bits as usize;
            let (w, off) = (pos >> 6, (pos & 63) as u32);
            words[w] |= (c as u64) << off;
            if off + bits > 64 {
                words[w + 1] |= (c as u64) >> (64 - off);
            }
        }
        Ok(PackedText {
            words,
            n,
            sigma,
            bits,
        })
    }

    /// Packs raw bytes, mapping byte `b` to symbol `b`.
    pub fn from_bytes(bytes: &[u8], sigma: u32) -> Result<PackedText> {
        let symbols: Vec<u32> = bytes.iter().map(|&b| b as u32).collect();
        PackedText::pack(&symbols, sigma)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    /// Backing words, including one trailing spare word.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Longest substring length that fits in a [`SubstringKey`].
    pub fn key_cap(&self) -> usize {
        (128 / self.bits) as usize
    }

    #[inline]
    fn get_bits(&self, pos: usize, cnt: u32) -> u64 {
        debug_assert!(cnt <= 64);
        let (w, off) = (pos >> 6, (pos & 63) as u32);
        let mut x = self.words[w] >> off;
        if off != 0 && off + cnt > 64 {
            x |= self.words[w + 1] << (64 - off);
        }
        if cnt < 64 {
            x & ((1u64 << cnt) - 1)
        } else {
            x
        }
    }

    /// Symbol at position `i` (0-based).
    #[inline]
    pub fn char_at(&self, i: usize) -> u32 {
        assert!(
            i < self.n,
            "position {i} out of bounds for length {}",
            self.n
        );
        self.get_bits(i * self.bits as usize, self.bits) as u32
    }

    pub fn get(&self, i: usize) -> Option<u32> {
        (i < self.n).then(|| self.char_at(i))
    }

    /// Unpacks the whole text.
    pub fn to_vec(&self) -> Vec<u32> {
        (0..self.n).map(|i| self.char_at(i)).collect()
    }

    /// `T[i..i+len)` with the first symbol in the low digit.
    #[inline]
    fn raw(&self, i: usize, len: usize) -> u128 {
        let total = len as u32 * self.bits;
        let pos = i * self.bits as usize;
        if total <= 64 {
            self.get_bits(pos, total) as u128
        } else {
            let lo = self.get_bits(pos, 64) as u128;
            let hi = self.get_bits(pos + 64, total - 64) as u128;
            lo | (hi << 64)
        }
    }

    /// Key of `T[i..i+len)` without range checks beyond debug assertions.
    #[inline]
    pub(crate) fn key(&self, i: usize, len: usize) -> u128 {
        debug_assert!(i + len <= self.n && len <= self.key_cap());
        reverse_digits(self.raw(i, len), len, self.bits)
    }

    /// Key of `T[i..i+len)`.
    pub fn extract(&self, i: usize, len: usize) -> Result<SubstringKey> {
        if i.checked_add(len).is_none_or(|e| e > self.n) {
            return Err(Error::Bounds(format!(
                "fragment [{i}..{i}+{len}) exceeds text length {}",
                self.n
            )));
        }
        if len > self.key_cap() {
            return Err(Error::Domain(format!(
                "length {len} exceeds key capacity {}",
                self.key_cap()
            )));
        }
        Ok(SubstringKey {
            value: self.key(i, len),
            len,
            bits: self.bits,
        })
    }

    /// `min(cap, lcp(T[i..], T[j..]))`, compared a word at a time.
    pub fn lcp_fragments(&self, i: usize, j: usize, cap: usize) -> Result<usize> {
        if i > self.n || j > self.n {
            return Err(Error::Bounds(format!(
                "start {} exceeds text length {}",
                i.max(j),
                self.n
            )));
        }
        Ok(self.lcp_unchecked(i, j, cap))
    }

    #[inline]
    pub(crate) fn lcp_unchecked(&self, i: usize, j: usize, cap: usize) -> usize {
        let limit = cap.min(self.n - i).min(self.n - j);
        if i == j {
            return limit;
        }
        let bits = self.bits as usize;
        let step = 64 / bits;
        let mut k = 0;
        while k < limit {
            let c = step.min(limit - k);
            let a = self.get_bits((i + k) * bits, (c * bits) as u32);
            let b = self.get_bits((j + k) * bits, (c * bits) as u32);
            let x = a ^ b;
            if x != 0 {
                return k + x.trailing_zeros() as usize / bits;
            }
            k += c;
        }
        limit
    }

    /// Shortest period of `T[i..i+len)`.
    pub fn substring_period(&self, i: usize, len: usize) -> Result<usize> {
        if len == 0 {
            return Err(Error::Domain("period of an empty fragment".into()));
        }
        if i.checked_add(len).is_none_or(|e| e > self.n) {
            return Err(Error::Bounds(format!(
                "fragment [{i}..{i}+{len}) exceeds text length {}",
                self.n
            )));
        }
        let symbols: Vec<u32> = (i..i + len).map(|t| self.char_at(t)).collect();
        Ok(period_of(&symbols))
    }
}

/// Periods of every string of a fixed length, indexed by key value.
///
/// Only built when `len · bits ≤ 22`, so the table has at most 2²² entries.
#[derive(Clone, Debug)]
pub struct PeriodTable {
    len: usize,
    bits: u32,
    periods: Vec<u8>,
}

impl PeriodTable {
    pub const MAX_BITS: u32 = 22;

    pub fn new(len: usize, bits: u32) -> Option<PeriodTable> {
        let total = len as u32 * bits;
        if len == 0 || total > Self::MAX_BITS {
            return None;
        }
        let periods = (0..1u32 << total)
            .map(|v| {
                let key = SubstringKey {
                    value: v as u128,
                    len,
                    bits,
                };
                period_of(&key.digits()) as u8
            })
            .collect();
        Some(PeriodTable { len, bits, periods })
    }

    pub fn period(&self, key: &SubstringKey) -> usize {
        debug_assert!(key.len == self.len && key.bits == self.bits);
        self.periods[key.value as usize] as usize
    }
}

/// Period of a key, through `table` when it covers the key's length.
pub fn key_period(key: &SubstringKey, table: Option<&PeriodTable>) -> usize {
    match table {
        Some(t) if t.len == key.len && t.bits == key.bits => t.period(key),
        _ => period_of(&key.digits()),
    }
}
