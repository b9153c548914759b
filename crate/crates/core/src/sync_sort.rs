//! Order of the suffixes starting at synchronizing positions, via the
//! derived string `T'` with one symbol per member of `S`.

use crate::error::{Error, Result};
use crate::packed_text::{period_of, PackedText};
use crate::suffix_core::{rank_reduce, suffix_array};
use crate::sync_set::SyncSet;

/// `T'` together with the parameters that define its symbols.
///
/// Symbol `i` stands for the pair (`T[s_i..s_i+3τ)` clipped to the text,
/// `d_i`), compared lexicographically. The stored symbols are the ranks
/// of those pairs.
#[derive(Clone, Debug)]
pub struct TPrimeString {
    pub symbols: Vec<u32>,
    pub d: Vec<i64>,
    /// `per(T[s_i+1..s_i+3τ))` where `d_i ≠ 0`, else 0.
    pub p: Vec<u32>,
    pub tau: usize,
    pub positions: Vec<usize>,
    pub sentinel: usize,
}

impl TPrimeString {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `s_i`, or the sentinel `n−2τ+1` for `i = n'`.
    pub fn position(&self, i: usize) -> usize {
        self.positions.get(i).copied().unwrap_or(self.sentinel)
    }
}

/// Positions of `S` in suffix order, and the rank of each member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedSyncOrder {
    pub order: Vec<usize>,
    pub rank: Vec<u32>,
}

pub fn build_tprime(pt: &PackedText, s: &SyncSet) -> Result<TPrimeString> {
    let n = pt.len();
    let tau = s.tau();
    if s.text_len() != n {
        return Err(Error::Domain(format!(
            "set built for length {}, text has {n}",
            s.text_len()
        )));
    }
    let pos = s.positions();
    let m = pos.len();
    let sentinel = s.sentinel();
    let mut d = vec![0i64; m];
    let mut p = vec![0u32; m];
    for i in 0..m {
        let next = pos.get(i + 1).copied().unwrap_or(sentinel);
        let gap = next - pos[i];
        if gap <= tau {
            continue;
        }
        let start = pos[i] + 1;
        let len = (3 * tau - 1).min(n - start);
        let frag: Vec<u32> = (start..start + len).map(|t| pt.char_at(t)).collect();
        let per = period_of(&frag);
        p[i] = per as u32;
        let e = next + 2 * tau - 1;
        let up = e < n && e >= per && pt.char_at(e) > pt.char_at(e - per);
        d[i] = if up {
            n as i64 - gap as i64
        } else {
            gap as i64 - n as i64
        };
    }

    let width = 3 * tau;
    let fits = width as u32 * pt.bits_per_symbol() <= 128;
    let symbols = if fits {
        let keys: Vec<(u128, usize, i64)> = (0..m)
            .map(|i| {
                let len = width.min(n - pos[i]);
                let pad = (width - len) as u32 * pt.bits_per_symbol();
                (pt.key(pos[i], len) << pad, len, d[i])
            })
            .collect();
        rank_reduce(&keys).0
    } else {
        let t = pt.to_vec();
        let keys: Vec<(&[u32], i64)> = (0..m)
            .map(|i| (&t[pos[i]..(pos[i] + width).min(n)], d[i]))
            .collect();
        rank_reduce(&keys).0
    };
    Ok(TPrimeString {
        symbols,
        d,
        p,
        tau,
        positions: pos.to_vec(),
        sentinel,
    })
}

pub fn sort_sync_suffixes(pt: &PackedText, s: &SyncSet) -> Result<SortedSyncOrder> {
    let tp = build_tprime(pt, s)?;
    Ok(order_from_tprime(&tp, &suffix_array(&tp.symbols)))
}

pub(crate) fn order_from_tprime(tp: &TPrimeString, sa: &[u32]) -> SortedSyncOrder {
    let mut rank = vec![0u32; sa.len()];
    for (r, &i) in sa.iter().enumerate() {
        rank[i as usize] = r as u32;
    }
    SortedSyncOrder {
        order: sa.iter().map(|&i| tp.positions[i as usize]).collect(),
        rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_oracles::{naive_period, naive_suffix_array};
    use crate::sync_set::{construct_deterministic, construct_randomized};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn filtered(t: &[u32], s: &SyncSet) -> Vec<usize> {
        naive_suffix_array(t)
            .into_iter()
            .filter(|&p| s.contains(p))
            .collect()
    }

    #[test]
    fn examples() {
        let t: Vec<u32> = b"abaababa".iter().map(|&c| (c - b'a') as u32).collect();
        let pt = PackedText::pack(&t, 2).unwrap();
        let s = construct_deterministic(&pt, 1).unwrap();
        assert_eq!(s.positions(), &[0, 1, 2, 3, 4, 5, 6]);
        let tp = build_tprime(&pt, &s).unwrap();
        assert!(tp.d.iter().all(|&d| d == 0));
        assert_eq!(
            sort_sync_suffixes(&pt, &s).unwrap().order,
            vec![2, 5, 0, 3, 6, 1, 4]
        );

        let unary = PackedText::pack(&[0; 30], 2).unwrap();
        let s = construct_deterministic(&unary, 4).unwrap();
        assert!(build_tprime(&unary, &s).unwrap().is_empty());
        assert!(sort_sync_suffixes(&unary, &s).unwrap().order.is_empty());

        let mut t = vec![0u32; 9];
        t.push(1);
        t.extend([0; 9]);
        let pt = PackedText::pack(&t, 2).unwrap();
        let s = construct_deterministic(&pt, 3).unwrap();
        assert_eq!(sort_sync_suffixes(&pt, &s).unwrap().order, filtered(&t, &s));
    }

    #[test]
    fn random_texts_match_filtered_suffix_array() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for case in 0..300 {
            let sigma = [2u32, 4][case % 2];
            let n = rng.gen_range(2..400);
            let tau = rng.gen_range(1..=5).min(n / 2);
            let t: Vec<u32> = if case % 3 == 0 {
                let unit: Vec<u32> = (0..rng.gen_range(1..3))
                    .map(|_| rng.gen_range(0..sigma))
                    .collect();
                let mut t: Vec<u32> = unit.iter().cycle().take(n).copied().collect();
                let k = rng.gen_range(0..n);
                t[k] = rng.gen_range(0..sigma);
                t
            } else {
                (0..n).map(|_| rng.gen_range(0..sigma)).collect()
            };
            let pt = PackedText::pack(&t, sigma).unwrap();
            let s = construct_randomized(&pt, tau, case as u64).unwrap();
            assert_eq!(
                sort_sync_suffixes(&pt, &s).unwrap().order,
                filtered(&t, &s),
                "case {case}"
            );
        }
    }

    proptest! {
        #[test]
        fn tprime_preserves_suffix_order(bits in proptest::collection::vec(0u32..2, 2..70), tau in 1usize..6) {
            let n = bits.len();
            let tau = tau.min(n / 2);
            let pt = PackedText::pack(&bits, 2).unwrap();
            let s = construct_deterministic(&pt, tau).unwrap();
            let tp = build_tprime(&pt, &s).unwrap();
            let pos = s.positions();
            for i in 0..pos.len() {
                let gap = tp.position(i + 1) - pos[i];
                prop_assert_eq!(tp.d[i] == 0, gap <= tau);
                if tp.d[i] != 0 {
                    let p = naive_period(&bits[pos[i] + 1..pos[i] + 3 * tau]);
                    prop_assert_eq!(tp.p[i] as usize, p);
                    prop_assert!(3 * p <= tau);
                }
                for j in 0..pos.len() {
                    let a = tp.symbols[i..].cmp(&tp.symbols[j..]);
                    let b = bits[pos[i]..].cmp(&bits[pos[j]..]);
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}
