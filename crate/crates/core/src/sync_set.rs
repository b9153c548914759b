//! τ-synchronizing sets: the periodic sets `Q` and `B`, the partition of
//! positions by length-τ substring, the window construction from an
//! identifier function, and the randomized, deterministic and packed
//! constructions built on it.
//!
//! Positions are 0-based. For a text of length `n`, identifiers live on
//! `[0..n−τ]`, set members on `[0..n−2τ]`, and `succ` answers `n−2τ+1`
//! past the last member.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rustc_hash::FxHashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::packed_text::{period_of, PackedText};
use crate::succinct::{BitVec, RankBitvector};
use crate::suffix_core::{lcp_kasai, sais};

const UNDEF: u32 = u32::MAX;

/// A synchronizing set with successor support.
#[derive(Clone, Debug)]
pub struct SyncSet {
    positions: Vec<usize>,
    tau: usize,
    n: usize,
    succ_rank: RankBitvector,
}

impl SyncSet {
    /// Wraps strictly increasing positions below `n`. Membership in
    /// `[0..n−2τ]` is not checked here; [`validate_sync_set`] reports it.
    pub fn from_positions(positions: Vec<usize>, tau: usize, n: usize) -> Result<SyncSet> {
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Format(format!(
                "positions {} and {} are not increasing",
                w[0], w[1]
            )));
        }
        if let Some(&p) = positions.last().filter(|&&p| p >= n) {
            return Err(Error::Bounds(format!(
                "position {p} outside a text of length {n}"
            )));
        }
        let mut bits = BitVec::with_capacity(n);
        let mut next = positions.iter().peekable();
        for i in 0..n {
            let hit = next.peek() == Some(&&i);
            if hit {
                next.next();
            }
            bits.push(hit);
        }
        Ok(SyncSet {
            positions,
            tau,
            n,
            succ_rank: RankBitvector::new(bits),
        })
    }

    fn empty(tau: usize, n: usize) -> SyncSet {
        SyncSet::from_positions(Vec::new(), tau, n).unwrap()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn text_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.succ_rank.get(i)
    }

    /// Position returned by `succ` past the last member: `n−2τ+1`.
    pub fn sentinel(&self) -> usize {
        (self.n + 1).saturating_sub(2 * self.tau)
    }

    /// Number of members smaller than `i`.
    #[inline]
    pub fn rank(&self, i: usize) -> usize {
        self.succ_rank.rank1(i.min(self.n))
    }

    /// Smallest member `≥ i`, or the sentinel.
    pub fn succ(&self, i: usize) -> Result<usize> {
        if 2 * self.tau > self.n || i > self.n - 2 * self.tau {
            return Err(Error::Bounds(format!(
                "succ({i}) outside [0..{}]",
                self.n as isize - 2 * self.tau as isize
            )));
        }
        Ok(self.succ_unchecked(i))
    }

    #[inline]
    pub(crate) fn succ_unchecked(&self, i: usize) -> usize {
        let r = self.rank(i);
        self.positions
            .get(r)
            .copied()
            .unwrap_or_else(|| self.sentinel())
    }

    /// Sync-set file: header `# tau=<τ> n=<n>`, then one 1-based position per line.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("# tau={} n={}\n", self.tau, self.n);
        for &p in &self.positions {
            out.push_str(&(p + 1).to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_file(text: &str) -> Result<SyncSet> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Format("empty sync-set file".into()))?;
        let mut tau = None;
        let mut n = None;
        let fields = header
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Format(format!("bad header line {header:?}")))?;
        for field in fields.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field {field:?}")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::Format(format!("bad number in {field:?}")))?;
            match k {
                "tau" => tau = Some(v),
                "n" => n = Some(v),
                _ => return Err(Error::Format(format!("unknown header field {k:?}"))),
            }
        }
        let (tau, n) = match (tau, n) {
            (Some(t), Some(n)) => (t, n),
            _ => return Err(Error::Format("header needs tau and n".into())),
        };
        let mut positions = Vec::new();
        for (ln, line) in lines {
            let p: usize = line
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: not a position: {line:?}", ln + 1)))?;
            if p == 0 {
                return Err(Error::Format(format!(
                    "line {}: positions are 1-based",
                    ln + 1
                )));
            }
            positions.push(p - 1);
        }
        SyncSet::from_positions(positions, tau, n)
    }
}

/// Membership masks of `Q` and `B` over `[0..n−τ]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSets {
    pub q: BitVec,
    pub b: BitVec,
}

impl PeriodicSets {
    pub fn domain_len(&self) -> usize {
        self.q.len()
    }

    pub fn q_count(&self) -> usize {
        self.q.count_ones()
    }

    pub fn b_count(&self) -> usize {
        self.b.count_ones()
    }

    /// `R = {i ≤ n−3τ+1 : [i..i+2τ) ⊆ Q}` as a mask over `[0..n−3τ+1]`.
    pub fn r_mask(&self, tau: usize) -> Vec<bool> {
        let dom = self.q.len();
        let mut run = vec![0usize; dom + 1];
        for i in (0..dom).rev() {
            run[i] = if self.q.get(i) { run[i + 1] + 1 } else { 0 };
        }
        let len = (dom + 1).saturating_sub(2 * tau);
        (0..len).map(|i| run[i] >= 2 * tau).collect()
    }
}

fn check_tau(tau: usize) -> Result<()> {
    if tau == 0 {
        Err(Error::Domain("tau must be positive".into()))
    } else {
        Ok(())
    }
}

pub fn compute_q_and_b(pt: &PackedText, tau: usize) -> Result<PeriodicSets> {
    check_tau(tau)?;
    Ok(q_and_b(&pt.to_vec(), tau))
}

/// Block method: positions are cut into blocks of `⌈τ/3⌉`; each block is
/// settled by the period of the fragment every window in it covers.
pub(crate) fn q_and_b(t: &[u32], tau: usize) -> PeriodicSets {
    let dom = (t.len() + 1).saturating_sub(tau);
    let mut q = vec![false; dom];
    let mut b = vec![false; dom];
    if tau >= 3 {
        let step = tau.div_ceil(3);
        let mut i = 0;
        while i < dom {
            let bl = step.min(dom - i);
            let (xs, xe) = (i + bl, i + tau - 1);
            let p = period_of(&t[xs..xe]);
            if 3 * p <= tau {
                let (mut l, mut r) = (xs, xe - 1);
                while l > i && t[l - 1] == t[l - 1 + p] {
                    l -= 1;
                }
                let lim = i + bl + tau - 1;
                while r + 1 < lim && t[r + 1] == t[r + 1 - p] {
                    r += 1;
                }
                if r + 1 - l >= tau - 1 {
                    for j in i..i + bl {
                        q[j] = j >= l && j + tau <= r + 1;
                    }
                    for j in [l.wrapping_sub(1), r + 2 - tau] {
                        if j >= i && j < i + bl {
                            b[j] = true;
                        }
                    }
                }
            }
            i += bl;
        }
    }
    PeriodicSets {
        q: q.into_iter().collect(),
        b: b.into_iter().collect(),
    }
}

/// Partition of `[0..n−τ]` into classes of equal length-τ substrings.
/// Classes are numbered in lexicographic order of their substrings.
#[derive(Clone, Debug)]
pub struct IdAssignment {
    class_of: Vec<u32>,
    class_start: Vec<u32>,
    members: Vec<u32>,
    id_of_class: Vec<u32>,
}

impl IdAssignment {
    pub fn num_classes(&self) -> usize {
        self.id_of_class.len()
    }

    pub fn domain_len(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i] as usize
    }

    /// Positions of class `c`, ordered by their suffixes.
    pub fn members(&self, c: usize) -> &[u32] {
        &self.members[self.class_start[c] as usize..self.class_start[c + 1] as usize]
    }

    pub fn id_of_class(&self, c: usize) -> Option<u32> {
        Some(self.id_of_class[c]).filter(|&x| x != UNDEF)
    }

    pub fn id(&self, i: usize) -> Option<u32> {
        self.id_of_class(self.class_of(i))
    }

    pub fn set_id(&mut self, c: usize, id: u32) {
        self.id_of_class[c] = id;
    }

    /// Assigns consecutive identifiers to classes in the given order.
    pub fn assign_in_order(&mut self, order: &[usize]) {
        for (k, &c) in order.iter().enumerate() {
            self.id_of_class[c] = k as u32;
        }
    }
}

pub fn build_partition(pt: &PackedText, tau: usize) -> Result<IdAssignment> {
    check_tau(tau)?;
    if tau > pt.len() {
        return Err(Error::Domain(format!(
            "tau={tau} exceeds text length {}",
            pt.len()
        )));
    }
    Ok(partition(&pt.to_vec(), pt.sigma(), tau))
}

/// Cuts the suffix array wherever the LCP drops below τ.
pub(crate) fn partition(t: &[u32], sigma: u32, tau: usize) -> IdAssignment {
    let n = t.len();
    let dom = n + 1 - tau;
    let sa = sais(t, sigma - 1);
    let mut isa = vec![0u32; n];
    for (r, &p) in sa.iter().enumerate() {
        isa[p as usize] = r as u32;
    }
    let lcp = lcp_kasai(t, &sa, &isa);
    let mut class_of = vec![0u32; dom];
    let mut class_start = Vec::new();
    let mut members = Vec::with_capacity(dom);
    let mut open = false;
    for r in 0..n {
        if lcp[r] < tau as u32 {
            open = false;
        }
        let p = sa[r] as usize;
        if p >= dom {
            continue;
        }
        if !open {
            class_start.push(members.len() as u32);
            open = true;
        }
        class_of[p] = class_start.len() as u32 - 1;
        members.push(p as u32);
    }
    let classes = class_start.len();
    class_start.push(members.len() as u32);
    IdAssignment {
        class_of,
        class_start,
        members,
        id_of_class: vec![UNDEF; classes],
    }
}

/// Window construction: `i ∈ S` iff the smallest identifier over
/// `[i..i+τ] \ Q` belongs to `i` or `i+τ`.
pub fn construct_from_ids(
    pt: &PackedText,
    tau: usize,
    ids: &IdAssignment,
    psets: &PeriodicSets,
) -> Result<SyncSet> {
    check_tau(tau)?;
    let n = pt.len();
    if 2 * tau > n {
        return Ok(SyncSet::empty(tau, n));
    }
    let dom = n - tau + 1;
    if ids.domain_len() != dom || psets.domain_len() != dom {
        return Err(Error::Domain(
            "identifier or periodic-set domain does not match the text".into(),
        ));
    }
    let mut id = Vec::with_capacity(dom);
    for i in 0..dom {
        id.push(
            ids.id(i)
                .ok_or_else(|| Error::State(format!("no identifier for position {i}")))?,
        );
    }
    let q: Vec<bool> = psets.q.iter().collect();
    let positions = window_minima(&id, &q, tau);
    SyncSet::from_positions(positions, tau, n)
}

fn window_minima(id: &[u32], q: &[bool], tau: usize) -> Vec<usize> {
    let dom = id.len();
    let mut out = Vec::new();
    let mut dq: VecDeque<usize> = VecDeque::new();
    let push = |dq: &mut VecDeque<usize>, j: usize| {
        if !q[j] {
            while dq.back().is_some_and(|&b| id[b] >= id[j]) {
                dq.pop_back();
            }
            dq.push_back(j);
        }
    };
    for j in 0..tau {
        push(&mut dq, j);
    }
    for i in 0..dom - tau {
        push(&mut dq, i + tau);
        while dq.front().is_some_and(|&f| f < i) {
            dq.pop_front();
        }
        if let Some(&f) = dq.front() {
            if id[f] == id[i] || id[f] == id[i + tau] {
                out.push(i);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    B,
    Q,
    Free,
}

fn class_kinds(ids: &IdAssignment, psets: &PeriodicSets) -> Vec<Kind> {
    (0..ids.num_classes())
        .map(|c| {
            let p = ids.members(c)[0] as usize;
            if psets.b.get(p) {
                Kind::B
            } else if psets.q.get(p) {
                Kind::Q
            } else {
                Kind::Free
            }
        })
        .collect()
}

/// Identifiers from a seeded random bijection in which every class inside
/// `B` precedes every other class.
pub fn construct_randomized(pt: &PackedText, tau: usize, seed: u64) -> Result<SyncSet> {
    check_tau(tau)?;
    let n = pt.len();
    if 2 * tau > n {
        return Ok(SyncSet::empty(tau, n));
    }
    let t = pt.to_vec();
    let psets = q_and_b(&t, tau);
    let mut ids = partition(&t, pt.sigma(), tau);
    let kinds = class_kinds(&ids, &psets);
    let (mut first, mut rest): (Vec<usize>, Vec<usize>) =
        (0..ids.num_classes()).partition(|&c| kinds[c] == Kind::B);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    first.shuffle(&mut rng);
    rest.shuffle(&mut rng);
    first.extend(rest);
    ids.assign_in_order(&first);
    construct_from_ids(pt, tau, &ids, &psets)
}

/// Scoring construction. Classes in `B`, then classes in `Q`, each in
/// ascending substring order; then repeatedly the smallest unprocessed
/// class whose active positions have non-negative total score.
pub fn construct_deterministic(pt: &PackedText, tau: usize) -> Result<SyncSet> {
    check_tau(tau)?;
    let n = pt.len();
    if 2 * tau > n {
        return Ok(SyncSet::empty(tau, n));
    }
    let t = pt.to_vec();
    let psets = q_and_b(&t, tau);
    let mut ids = partition(&t, pt.sigma(), tau);
    let order = scored_order(&ids, &psets, tau)?;
    ids.assign_in_order(&order);
    construct_from_ids(pt, tau, &ids, &psets)
}

struct Scoring<'a> {
    ids: &'a IdAssignment,
    kinds: &'a [Kind],
    defined: Vec<bool>,
    score: Vec<i8>,
    agg: Vec<i64>,
    done: Vec<bool>,
    plus: BTreeSet<u32>,
}

impl Scoring<'_> {
    fn set_score(&mut self, pos: usize, s: i8) {
        let delta = s - self.score[pos];
        if delta == 0 {
            return;
        }
        self.score[pos] = s;
        let c = self.ids.class_of(pos);
        self.agg[c] += delta as i64;
        if self.kinds[c] == Kind::Free && !self.done[c] {
            if self.agg[c] >= 0 {
                self.plus.insert(c as u32);
            } else {
                self.plus.remove(&(c as u32));
            }
        }
    }

    /// Undefined positions directly left (`dir = -1`) or right of `j`,
    /// counting at most `cap`.
    fn run(&self, j: usize, dir: isize, cap: usize) -> usize {
        let mut k = 0;
        let mut p = j as isize + dir;
        while k < cap && p >= 0 && (p as usize) < self.defined.len() && !self.defined[p as usize] {
            k += 1;
            p += dir;
        }
        k
    }
}

/// Processing order of all classes for the deterministic construction.
fn scored_order(ids: &IdAssignment, psets: &PeriodicSets, tau: usize) -> Result<Vec<usize>> {
    let dom = ids.domain_len();
    let classes = ids.num_classes();
    let kinds = class_kinds(ids, psets);
    let mut order: Vec<usize> = (0..classes).filter(|&c| kinds[c] == Kind::B).collect();
    order.extend((0..classes).filter(|&c| kinds[c] == Kind::Q));
    let edge = tau / 3;

    let mut st = Scoring {
        ids,
        kinds: &kinds,
        defined: vec![false; dom],
        score: vec![0; dom],
        agg: vec![0; classes],
        done: vec![false; classes],
        plus: BTreeSet::new(),
    };
    for &c in &order {
        st.done[c] = true;
        for &p in ids.members(c) {
            st.defined[p as usize] = true;
        }
    }
    let mut l = 0;
    while l < dom {
        if st.defined[l] {
            l += 1;
            continue;
        }
        let mut r = l;
        while r + 1 < dom && !st.defined[r + 1] {
            r += 1;
        }
        if r - l >= tau {
            for p in l..=r {
                let s = if p - l < edge || r - p < edge { -1 } else { 2 };
                st.set_score(p, s);
            }
        }
        l = r + 1;
    }
    for c in 0..classes {
        if kinds[c] == Kind::Free && st.agg[c] >= 0 {
            st.plus.insert(c as u32);
        }
    }

    while let Some(c) = st.plus.pop_first() {
        let c = c as usize;
        st.done[c] = true;
        order.push(c);
        for &j in ids.members(c) {
            let j = j as usize;
            let active = st.score[j] != 0;
            st.defined[j] = true;
            if !active {
                continue;
            }
            st.set_score(j, 0);
            for dir in [-1isize, 1] {
                let len = st.run(j, dir, tau + 1);
                let at = |d: usize| (j as isize + dir * d as isize) as usize;
                if len > tau {
                    for d in 1..=edge {
                        st.set_score(at(d), -1);
                    }
                } else {
                    for d in 1..=len {
                        st.set_score(at(d), 0);
                    }
                }
            }
        }
    }
    if order.len() != classes {
        return Err(Error::Internal("scoring left classes unprocessed".into()));
    }
    Ok(order)
}

/// `5τ·log₂σ < log₂n` and `4τ·⌈log₂(σ+1)⌉ ≤ 128`.
pub fn fast_precondition(n: usize, sigma: u32, tau: usize) -> bool {
    if tau == 0 || 2 * tau > n {
        return false;
    }
    let ext_bits = 32 - sigma.leading_zeros();
    5.0 * tau as f64 * (sigma as f64).log2() < (n as f64).log2()
        && 4 * tau * ext_bits as usize <= 128
}

/// Runs the scoring construction on one representative per class of
/// equivalent blocks, then copies the result to every block. Falls back to
/// [`construct_deterministic`] when [`fast_precondition`] fails.
pub fn construct_packed_fast(pt: &PackedText, tau: usize) -> Result<SyncSet> {
    check_tau(tau)?;
    let n = pt.len();
    if 2 * tau > n {
        return Ok(SyncSet::empty(tau, n));
    }
    if !fast_precondition(n, pt.sigma(), tau) {
        return construct_deterministic(pt, tau);
    }
    let dom = n - tau + 1;
    let blocks = dom.div_ceil(tau);

    // Blocks whose context T[(b−1)τ..(b+3)τ) lies inside the text are keyed by it;
    // the others meet the text boundary and stand for themselves.
    let mut block_rep = Vec::with_capacity(blocks);
    let mut rep_start: Vec<usize> = Vec::new();
    let mut mult: Vec<i64> = Vec::new();
    let mut seen: FxHashMap<u128, usize> = FxHashMap::default();
    for b in 0..blocks {
        let interior = b >= 1 && (b + 3) * tau <= n;
        let r = if interior {
            *seen
                .entry(pt.key((b - 1) * tau, 4 * tau))
                .or_insert_with(|| {
                    rep_start.push(b * tau);
                    mult.push(0);
                    rep_start.len() - 1
                })
        } else {
            rep_start.push(b * tau);
            mult.push(0);
            rep_start.len() - 1
        };
        mult[r] += 1;
        block_rep.push(r);
    }

    // Classes seen from each representative: positions [s−τ..s+2τ).
    let width = 3 * tau;
    let mut keys: Vec<u128> = Vec::new();
    for &s in &rep_start {
        for j in (s + tau).saturating_sub(2 * tau)..(s + 2 * tau).min(dom) {
            keys.push(pt.key(j, tau));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let mut vis = vec![UNDEF; rep_start.len() * width];
    for (r, &s) in rep_start.iter().enumerate() {
        for o in 0..width {
            let j = (s + o) as isize - tau as isize;
            if j >= 0 && (j as usize) < dom {
                let k = pt.key(j as usize, tau);
                vis[r * width + o] = keys.binary_search(&k).unwrap() as u32;
            }
        }
    }
    let kinds: Vec<Kind> = keys
        .iter()
        .map(|&k| {
            let d: Vec<u32> = crate::packed_text::SubstringKey {
                value: k,
                len: tau,
                bits: pt.bits_per_symbol(),
            }
            .digits();
            if tau < 3 {
                Kind::Free
            } else if 3 * period_of(&d) <= tau {
                Kind::Q
            } else if 3 * period_of(&d[..tau - 1]) <= tau || 3 * period_of(&d[1..]) <= tau {
                Kind::B
            } else {
                Kind::Free
            }
        })
        .collect();

    let classes = keys.len();
    let mut id = vec![UNDEF; classes];
    let mut next = 0u32;
    for kind in [Kind::B, Kind::Q] {
        for c in 0..classes {
            if kinds[c] == kind {
                id[c] = next;
                next += 1;
            }
        }
    }

    let edge = tau / 3;
    let mut agg = vec![0i64; classes];
    loop {
        agg.iter_mut().for_each(|a| *a = 0);
        for r in 0..rep_start.len() {
            let row = &vis[r * width..(r + 1) * width];
            let undefined = |o: usize| row[o] != UNDEF && id[row[o] as usize] == UNDEF;
            for o in tau..2 * tau {
                if !undefined(o) {
                    continue;
                }
                let left = (1..=tau).take_while(|&d| undefined(o - d)).count();
                let right = (1..=tau).take_while(|&d| undefined(o + d)).count();
                if left + right < tau {
                    continue;
                }
                let s = if left < edge || right < edge { -1 } else { 2 };
                agg[row[o] as usize] += s * mult[r];
            }
        }
        match (0..classes).find(|&c| id[c] == UNDEF && agg[c] >= 0) {
            Some(c) => {
                id[c] = next;
                next += 1;
            }
            None => break,
        }
    }
    if (next as usize) != classes {
        return Err(Error::Internal(
            "representative scoring left classes unprocessed".into(),
        ));
    }

    let in_q = |c: u32| kinds[c as usize] == Kind::Q;
    let mut rep_hits: Vec<Vec<usize>> = vec![Vec::new(); rep_start.len()];
    for (r, hits) in rep_hits.iter_mut().enumerate() {
        let row = &vis[r * width..(r + 1) * width];
        for o in tau..2 * tau {
            let i = rep_start[r] + o - tau;
            if i + 2 * tau > n {
                break;
            }
            let best = (o..=o + tau)
                .filter(|&x| !in_q(row[x]))
                .map(|x| id[row[x] as usize])
                .min();
            if let Some(m) = best {
                if m == id[row[o] as usize] || m == id[row[o + tau] as usize] {
                    hits.push(o - tau);
                }
            }
        }
    }
    let mut positions = Vec::new();
    for (b, &r) in block_rep.iter().enumerate() {
        positions.extend(rep_hits[r].iter().map(|&o| b * tau + o));
    }
    SyncSet::from_positions(positions, tau, n)
}

/// First violated condition of a claimed synchronizing set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TauOutOfRange { tau: usize, n: usize },
    OutOfRange { pos: usize },
    Consistency { i: usize, j: usize },
    Density { i: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TauOutOfRange { tau, n } => {
                write!(f, "tau={tau} outside [1..n/2] for n={n}")
            }
            Violation::OutOfRange { pos } => write!(f, "position {} out of range", pos + 1),
            Violation::Consistency { i, j } => {
                write!(f, "consistency violation at i={} j={}", i + 1, j + 1)
            }
            Violation::Density { i } => write!(f, "density violation at i={}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.violation {
            None => write!(f, "valid"),
            Some(v) => write!(f, "{v}"),
        }
    }
}

/// Exact check of both conditions. Consistency groups positions by their
/// length-2τ context in a hash map; density compares hits per window
/// against `R` derived from `Q`.
pub fn validate_sync_set(pt: &PackedText, tau: usize, s: &SyncSet) -> ValidationReport {
    let n = pt.len();
    let fail = |v| ValidationReport { violation: Some(v) };
    if tau == 0 || 2 * tau > n {
        return if s.is_empty() && tau > 0 {
            ValidationReport { violation: None }
        } else {
            fail(Violation::TauOutOfRange { tau, n })
        };
    }
    let top = n - 2 * tau;
    if let Some(&p) = s.positions().iter().find(|&&p| p > top) {
        return fail(Violation::OutOfRange { pos: p });
    }
    let t = pt.to_vec();
    let mut member = vec![false; top + 1];
    for &p in s.positions() {
        member[p] = true;
    }
    let mut first: HashMap<&[u32], usize> = HashMap::with_capacity(top + 1);
    for i in 0..=top {
        let j = *first.entry(&t[i..i + 2 * tau]).or_insert(i);
        if member[i] != member[j] {
            return fail(Violation::Consistency { i: j, j: i });
        }
    }
    let r = q_and_b(&t, tau).r_mask(tau);
    let mut prefix = vec![0usize; top + 2];
    for i in 0..=top {
        prefix[i + 1] = prefix[i] + member[i] as usize;
    }
    for (i, &in_r) in r.iter().enumerate() {
        let empty = prefix[i + tau] == prefix[i];
        if empty != in_r {
            return fail(Violation::Density { i });
        }
    }
    ValidationReport { violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_oracles::{naive_period, naive_periodic_positions, naive_sync_violation};
    use proptest::prelude::*;
    use rand::Rng;

    fn text(x: &str) -> PackedText {
        let sigma = x.bytes().max().map_or(2, |m| m as u32 + 1);
        PackedText::from_bytes(x.as_bytes(), sigma).unwrap()
    }

    fn naive_b(t: &[u32], tau: usize) -> Vec<usize> {
        if tau < 3 || t.len() < tau {
            return Vec::new();
        }
        let q = naive_periodic_positions(t, tau, tau);
        (0..=t.len() - tau)
            .filter(|&i| q.binary_search(&i).is_err())
            .filter(|&i| {
                3 * naive_period(&t[i..i + tau - 1]) <= tau
                    || 3 * naive_period(&t[i + 1..i + tau]) <= tau
            })
            .collect()
    }

    fn ones(b: &BitVec) -> Vec<usize> {
        (0..b.len()).filter(|&i| b.get(i)).collect()
    }

    #[test]
    fn q_and_b_examples() {
        let ps = compute_q_and_b(&text("aaaaaaa"), 3).unwrap();
        assert_eq!(ones(&ps.q), vec![0, 1, 2, 3, 4]);
        assert_eq!(ps.b_count(), 0);
        let ps = compute_q_and_b(&text("abababab"), 2).unwrap();
        assert_eq!((ps.q_count(), ps.b_count()), (0, 0));
        assert!(compute_q_and_b(&text("ab"), 0).is_err());
    }

    #[test]
    fn partition_examples() {
        let ids = build_partition(&text("abab"), 2).unwrap();
        assert_eq!(ids.num_classes(), 2);
        assert_eq!(ids.members(0), &[2, 0]);
        assert_eq!(ids.members(1), &[1]);
        assert_eq!(build_partition(&text("aaaaa"), 3).unwrap().num_classes(), 1);
        assert_eq!(
            build_partition(&text("abcdef"), 2).unwrap().num_classes(),
            5
        );
    }

    #[test]
    fn window_construction_examples() {
        let pt = text("abcabc");
        let psets = compute_q_and_b(&pt, 2).unwrap();
        let mut ids = build_partition(&pt, 2).unwrap();
        assert!(construct_from_ids(&pt, 2, &ids, &psets).is_err());
        // Classes are ab, bc, ca in key order.
        ids.assign_in_order(&[0, 1, 2]);
        let s = construct_from_ids(&pt, 2, &ids, &psets).unwrap();
        assert_eq!(s.positions(), &[0, 1]);

        let pt = text("abaababa");
        let psets = compute_q_and_b(&pt, 1).unwrap();
        let mut ids = build_partition(&pt, 1).unwrap();
        ids.assign_in_order(&[1, 0]);
        let s = construct_from_ids(&pt, 1, &ids, &psets).unwrap();
        assert_eq!(s.positions(), &(0..7).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn deterministic_examples() {
        let pt = text("abaababaab");
        let s = construct_deterministic(&pt, 1).unwrap();
        assert_eq!(s.positions(), &(0..9).collect::<Vec<_>>()[..]);
        let unary = text(&"a".repeat(40));
        // At τ = 2 the period 1 exceeds τ/3, so only τ ≥ 3 leaves S empty.
        assert_eq!(construct_deterministic(&unary, 2).unwrap().len(), 37);
        for tau in 3..=13 {
            assert!(construct_deterministic(&unary, tau).unwrap().is_empty());
        }
        assert!(construct_deterministic(&pt, 0).is_err());
        assert!(construct_deterministic(&pt, 6).unwrap().is_empty());
    }

    #[test]
    fn validator_examples() {
        let pt = text("abaababaab");
        let all = SyncSet::from_positions((0..9).collect(), 1, 10).unwrap();
        assert!(validate_sync_set(&pt, 1, &all).is_valid());
        let pt = text("abbabaabbaab");
        let none = SyncSet::from_positions(Vec::new(), 3, 12).unwrap();
        assert_eq!(
            validate_sync_set(&pt, 3, &none).violation,
            Some(Violation::Density { i: 0 })
        );
        let t = pt.to_vec();
        let full = construct_deterministic(&pt, 3)
            .unwrap()
            .positions()
            .to_vec();
        let mut density = 0;
        for k in 0..full.len() {
            let mut s = full.clone();
            s.remove(k);
            let report =
                validate_sync_set(&pt, 3, &SyncSet::from_positions(s.clone(), 3, 12).unwrap());
            assert_eq!(report.is_valid(), naive_sync_violation(&t, 3, &s).is_none());
            density += matches!(report.violation, Some(Violation::Density { .. })) as usize;
        }
        assert!(density > 0);
    }

    #[test]
    fn succ_examples() {
        let s = SyncSet::from_positions(vec![1, 4], 2, 10).unwrap();
        assert_eq!(s.succ(0).unwrap(), 1);
        assert_eq!(s.succ(1).unwrap(), 1);
        assert_eq!(s.succ(2).unwrap(), 4);
        assert_eq!(s.succ(5).unwrap(), 7);
        assert!(s.succ(7).is_err());
    }

    #[test]
    fn file_round_trip() {
        let s = SyncSet::from_positions(vec![0, 3, 5], 2, 9).unwrap();
        let f = s.to_file_string();
        assert!(f.starts_with("# tau=2 n=9\n1\n4\n6\n"));
        assert_eq!(SyncSet::parse_file(&f).unwrap().positions(), s.positions());
        assert!(SyncSet::parse_file("# tau=2 n=9\n4\n1\n").is_err());
        assert!(SyncSet::parse_file("1\n").is_err());
    }

    #[test]
    fn fast_matches_deterministic_on_random_texts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..60 {
            let sigma = [2u32, 3, 4][rng.gen_range(0..3)];
            let n = rng.gen_range(64..6000);
            let tau = rng.gen_range(1..=3);
            let t: Vec<u32> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let pt = PackedText::pack(&t, sigma).unwrap();
            let fast = construct_packed_fast(&pt, tau).unwrap();
            assert_eq!(
                fast.positions(),
                construct_deterministic(&pt, tau).unwrap().positions()
            );
            checked += fast_precondition(n, sigma, tau) as usize;
        }
        assert!(checked > 10);
    }

    fn periodic_mosaic(rng: &mut ChaCha8Rng, n: usize, sigma: u32) -> Vec<u32> {
        let mut t = Vec::with_capacity(n);
        while t.len() < n {
            let p = rng.gen_range(1..4);
            let unit: Vec<u32> = (0..p).map(|_| rng.gen_range(0..sigma)).collect();
            let len = rng.gen_range(1..40);
            t.extend(unit.iter().cycle().take(len));
        }
        t.truncate(n);
        t
    }

    proptest! {
        #[test]
        fn q_and_b_match_definition(seed in any::<u64>(), n in 3usize..200, tau in 3usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = periodic_mosaic(&mut rng, n, 2);
            let ps = q_and_b(&t, tau);
            prop_assert_eq!(ones(&ps.q), naive_periodic_positions(&t, tau, tau));
            prop_assert_eq!(ones(&ps.b), naive_b(&t, tau));
            prop_assert!(ps.b_count() * tau <= 6 * n);
        }

        #[test]
        fn constructions_are_valid(seed in any::<u64>(), n in 2usize..300, tau in 1usize..10, mosaic in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = if mosaic { periodic_mosaic(&mut rng, n, 3) } else { (0..n).map(|_| rng.gen_range(0..2)).collect() };
            let pt = PackedText::pack(&t, 3).unwrap();
            let tau = tau.min(n / 2).max(1);
            let det = construct_deterministic(&pt, tau).unwrap();
            let rnd = construct_randomized(&pt, tau, seed).unwrap();
            for s in [&det, &rnd] {
                prop_assert_eq!(naive_sync_violation(&t, tau, s.positions()), None);
                prop_assert!(validate_sync_set(&pt, tau, s).is_valid());
            }
            prop_assert!(det.len() * tau <= 30 * n);
            for i in 0..=n - 2 * tau {
                let naive = det.positions().iter().copied().find(|&p| p >= i).unwrap_or(n - 2 * tau + 1);
                prop_assert_eq!(det.succ(i).unwrap(), naive);
            }
        }

        #[test]
        fn validator_agrees_with_oracle(seed in any::<u64>(), n in 2usize..80, tau in 1usize..5, drop in any::<prop::sample::Index>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = periodic_mosaic(&mut rng, n, 2);
            let pt = PackedText::pack(&t, 2).unwrap();
            let tau = tau.min(n / 2).max(1);
            let mut pos = construct_deterministic(&pt, tau).unwrap().positions().to_vec();
            if !pos.is_empty() {
                pos.remove(drop.index(pos.len()));
            }
            let s = SyncSet::from_positions(pos.clone(), tau, n).unwrap();
            prop_assert_eq!(validate_sync_set(&pt, tau, &s).is_valid(), naive_sync_violation(&t, tau, &pos).is_none());
        }
    }
}
