//! Constant-time LCE queries over a packed text.
//!
//! Short common prefixes are found by comparing up to `3τ` packed
//! symbols. Longer ones are reduced to the successors of `i` and `j` in a
//! synchronizing set, and from there to an LCE query on `T'`.

use crate::error::{Error, Result};
use crate::packed_text::PackedText;
use crate::suffix_core::{build_suffix_array, SuffixArrayIndex};
use crate::sync_set::{construct_packed_fast, SyncSet};
use crate::sync_sort::{build_tprime, TPrimeString};

/// `max(1, ⌊log₂ n / (8·⌈log₂ σ⌉)⌋)`.
pub fn default_tau(n: usize, sigma: u32) -> usize {
    let lg_sigma = (sigma.max(2) as f64).log2().ceil();
    let lg_n = (n.max(1) as f64).log2();
    ((lg_n / (8.0 * lg_sigma)).floor() as usize).max(1)
}

#[derive(Clone, Debug)]
pub struct LceIndex {
    pt: PackedText,
    tau: usize,
    parts: Option<Parts>,
}

#[derive(Clone, Debug)]
struct Parts {
    sync: SyncSet,
    tprime: TPrimeString,
    tsa: SuffixArrayIndex,
}

/// Builds the index. With `tau = None` the default is used, and a text too
/// short for it is answered by plain packed comparison.
pub fn build_lce(pt: &PackedText, tau: Option<usize>) -> Result<LceIndex> {
    let n = pt.len();
    let tau = match tau {
        Some(t) if t == 0 || 2 * t > n => {
            return Err(Error::Domain(format!("tau={t} outside [1..n/2] for n={n}")))
        }
        Some(t) => t,
        None => default_tau(n, pt.sigma()),
    };
    let parts = if 2 * tau > n {
        None
    } else {
        let sync = construct_packed_fast(pt, tau)?;
        let tprime = build_tprime(pt, &sync)?;
        let tsa = build_suffix_array(&tprime.symbols);
        Some(Parts { sync, tprime, tsa })
    };
    Ok(LceIndex {
        pt: pt.clone(),
        tau,
        parts,
    })
}

impl LceIndex {
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn text(&self) -> &PackedText {
        &self.pt
    }

    pub fn sync_set(&self) -> Option<&SyncSet> {
        self.parts.as_ref().map(|p| &p.sync)
    }

    /// Length of the longest common prefix of `T[i..]` and `T[j..]`.
    pub fn query(&self, i: usize, j: usize) -> Result<usize> {
        let n = self.pt.len();
        if i >= n || j >= n {
            return Err(Error::Bounds(format!(
                "lce({i}, {j}) on a text of length {n}"
            )));
        }
        if i == j {
            return Ok(n - i);
        }
        let Some(parts) = &self.parts else {
            return Ok(self.pt.lcp_unchecked(i, j, n));
        };
        let tau = self.tau;
        let short = self.pt.lcp_unchecked(i, j, 3 * tau);
        if short < 3 * tau {
            return Ok(short);
        }
        let sync = &parts.sync;
        let tp = &parts.tprime;
        let (ii, jj) = (sync.rank(i), sync.rank(j));
        let (oi, oj) = (tp.position(ii) - i, tp.position(jj) - j);
        if oi != oj {
            let v = oi.min(oj) + 2 * tau - 1;
            debug_assert!(v + 1 >= 3 * tau);
            return Ok(v);
        }
        let m = tp.len();
        let l = if ii == m || jj == m {
            0
        } else {
            parts.tsa.lce_unchecked(ii, jj)
        };
        let (a, b) = (tp.position(ii + l), tp.position(jj + l));
        let tail = self.pt.lcp_unchecked(a, b, 3 * tau);
        let tail = if tail < 3 * tau {
            tail
        } else {
            let ga = tp.position(ii + l + 1) - a;
            let gb = tp.position(jj + l + 1) - b;
            ga.min(gb) + 2 * tau - 1
        };
        let v = a - i + tail;
        debug_assert!(v + 1 >= 3 * tau);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_oracles::naive_lce;
    use proptest::prelude::*;

    fn text(x: &str) -> PackedText {
        PackedText::from_bytes(x.as_bytes(), 256).unwrap()
    }

    #[test]
    fn examples() {
        let idx = build_lce(&text("banana"), None).unwrap();
        assert_eq!(idx.query(1, 3).unwrap(), 3);
        assert_eq!(idx.query(2, 2).unwrap(), 4);
        assert!(idx.query(0, 6).is_err());
        let idx = build_lce(&text("banana"), Some(1)).unwrap();
        assert_eq!(idx.query(1, 3).unwrap(), 3);
        assert!(build_lce(&text("banana"), Some(4)).is_err());
        assert!(build_lce(&text("banana"), Some(0)).is_err());

        let unary = PackedText::pack(&[0; 5000], 2).unwrap();
        for tau in [None, Some(3), Some(7)] {
            let idx = build_lce(&unary, tau).unwrap();
            assert_eq!(idx.sync_set().unwrap().is_empty(), idx.tau() >= 3);
            assert_eq!(idx.query(0, 1).unwrap(), 4999);
            assert_eq!(idx.query(4000, 17).unwrap(), 1000);
        }
    }

    #[test]
    fn default_tau_values() {
        assert_eq!(default_tau(1 << 20, 2), 2);
        assert_eq!(default_tau(1 << 24, 2), 3);
        assert_eq!(default_tau(1 << 24, 4), 1);
        assert_eq!(default_tau(1, 2), 1);
    }

    fn periodic(unit: &[u32], n: usize) -> Vec<u32> {
        unit.iter().cycle().take(n).copied().collect()
    }

    proptest! {
        #[test]
        fn all_pairs_match_naive(
            unit in proptest::collection::vec(0u32..2, 1..4),
            noise in proptest::collection::vec((0usize..200, 0u32..2), 0..4),
            n in 2usize..200,
            tau in 1usize..8,
        ) {
            let mut t = periodic(&unit, n);
            for (k, c) in noise {
                t[k % n] = c;
            }
            let pt = PackedText::pack(&t, 2).unwrap();
            let idx = build_lce(&pt, Some(tau.min(n / 2).max(1))).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(idx.query(i, j).unwrap(), naive_lce(&t, i, j).unwrap());
                }
            }
        }
    }
}
