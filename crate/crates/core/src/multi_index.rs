//! Sparse exponent vectors of kappa monomials and the enumerations the
//! recursions sum over.
//!
//! A [`MultiIndex`] `b` stands for the monomial `kappa_1^{b(1)} kappa_2^{b(2)} ...`.
//! Its weight `|b| = sum i b(i)` is the cohomological degree and its length
//! `||b|| = sum b(i)` the number of kappa factors.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::arith::{binomial, factorial, Integer};
use crate::error::{Error, Result};

/// Element of the semigroup of finitely supported sequences of naturals.
///
/// Entries are `(index, multiplicity)` pairs with `index >= 1` and
/// `multiplicity >= 1`, ascending by index, so equal values have identical
/// storage and hash alike.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit multi-index `delta_a` (the single class `kappa_a`).
    pub fn delta(a: u32) -> Result<Self> {
        if a == 0 {
            return Err(Error::Domain("kappa index must be at least 1".into()));
        }
        Ok(Self {
            entries: vec![(a, 1)],
        })
    }

    /// Builds from `(index, multiplicity)` pairs in any order. Zero
    /// multiplicities are dropped; repeated indices accumulate.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut entries: Vec<(u32, u32)> = Vec::new();
        for (i, m) in pairs {
            if i == 0 {
                return Err(Error::Domain("kappa index must be at least 1".into()));
            }
            if m == 0 {
                continue;
            }
            match entries.binary_search_by_key(&i, |e| e.0) {
                Ok(pos) => entries[pos].1 += m,
                Err(pos) => entries.insert(pos, (i, m)),
            }
        }
        Ok(Self { entries })
    }

    /// `dense[i]` is the multiplicity of `kappa_{i+1}`.
    pub fn from_dense(dense: &[u32]) -> Self {
        Self {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0)
                .map(|(i, &m)| (i as u32 + 1, m))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn get(&self, index: u32) -> u32 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|b| = sum i b(i)`.
    pub fn weight(&self) -> u32 {
        self.entries.iter().map(|&(i, m)| i * m).sum()
    }

    /// `||b|| = sum b(i)`.
    pub fn length(&self) -> u32 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    pub fn max_index(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.0)
    }

    /// `b! = prod b(i)!`.
    pub fn factorial(&self) -> Integer {
        self.entries
            .iter()
            .fold(Integer::one(), |acc, &(_, m)| acc * factorial(m as u64))
    }

    /// `self + delta_index`; `index` must be at least 1.
    pub fn with_kappa(&self, index: u32) -> Self {
        debug_assert!(index >= 1);
        let mut out = self.clone();
        match out.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => out.entries[pos].1 += 1,
            Err(pos) => out.entries.insert(pos, (index, 1)),
        }
        out
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for &(i, m) in &self.entries {
            let o = other.get(i);
            if o > m {
                return None;
            }
            if m > o {
                entries.push((i, m - o));
            }
        }
        if other.entries.iter().any(|&(i, _)| self.get(i) == 0) {
            return None;
        }
        Some(Self { entries })
    }

    /// `other <= self` componentwise.
    pub fn contains(&self, other: &MultiIndex) -> bool {
        other.entries.iter().all(|&(i, m)| self.get(i) >= m)
    }

    /// All ordered pairs `(L, L')` with `L + L' = self`.
    pub fn splits2(&self) -> Splits2<'_> {
        Splits2 {
            base: self,
            counters: vec![0; self.entries.len()],
            done: false,
        }
    }

    /// All ordered triples `(L, e, f)` with `L + e + f = self`.
    pub fn splits3(&self) -> Splits3<'_> {
        let choices = self
            .entries
            .iter()
            .map(|&(_, m)| {
                (0..=m)
                    .flat_map(|x| (0..=m - x).map(move |y| (x, y)))
                    .collect::<Vec<_>>()
            })
            .collect();
        Splits3 {
            base: self,
            choices,
            counters: vec![0; self.entries.len()],
            done: false,
        }
    }

    /// Every nonzero `L <= self`, in odometer order.
    pub fn nonzero_parts(&self) -> Vec<MultiIndex> {
        self.splits2()
            .map(|(l, _)| l)
            .filter(|l| !l.is_zero())
            .collect()
    }

    /// All multi-indices of weight `w` using only indices `<= max_index`.
    pub fn of_weight(w: u32, max_index: u32) -> Vec<MultiIndex> {
        fn rec(rem: u32, largest: u32, acc: &mut Vec<(u32, u32)>, out: &mut Vec<MultiIndex>) {
            if rem == 0 {
                out.push(MultiIndex::from_pairs(acc.iter().copied()).expect("indices >= 1"));
                return;
            }
            for i in (1..=largest.min(rem)).rev() {
                for m in 1..=rem / i {
                    acc.push((i, m));
                    rec(rem - i * m, i - 1, acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(w, max_index, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    fn with_counts(&self, counts: impl Iterator<Item = u32>) -> MultiIndex {
        MultiIndex {
            entries: self
                .entries
                .iter()
                .zip(counts)
                .filter(|(_, c)| *c > 0)
                .map(|(&(i, _), c)| (i, c))
                .collect(),
        }
    }
}

impl std::ops::Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex::from_pairs(self.entries.iter().chain(&rhs.entries).copied())
            .expect("operands are canonical")
    }
}

/// Text form: comma-separated `i:m` pairs ascending in `i`; empty for zero.
impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (i, m)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{m}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(Self::zero());
        }
        let mut pairs = Vec::new();
        for item in s.split(',') {
            let (i, m) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected i:m, found {item:?}")))?;
            let i: u32 = i
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad kappa index in {item:?}")))?;
            let m: u32 = m
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity in {item:?}")))?;
            if i == 0 {
                return Err(Error::Parse("kappa index must be at least 1".into()));
            }
            if pairs.iter().any(|&(j, _)| j == i) {
                return Err(Error::Parse(format!("kappa index {i} repeated")));
            }
            pairs.push((i, m));
        }
        MultiIndex::from_pairs(pairs)
    }
}

pub struct Splits2<'a> {
    base: &'a MultiIndex,
    counters: Vec<u32>,
    done: bool,
}

impl Iterator for Splits2<'_> {
    type Item = (MultiIndex, MultiIndex);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let left = self.base.with_counts(self.counters.iter().copied());
        let right = self.base.with_counts(
            self.counters
                .iter()
                .zip(&self.base.entries)
                .map(|(&c, &(_, m))| m - c),
        );
        self.done = true;
        for (c, &(_, m)) in self.counters.iter_mut().zip(&self.base.entries) {
            if *c < m {
                *c += 1;
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some((left, right))
    }
}

pub struct Splits3<'a> {
    base: &'a MultiIndex,
    choices: Vec<Vec<(u32, u32)>>,
    counters: Vec<usize>,
    done: bool,
}

impl Iterator for Splits3<'_> {
    type Item = (MultiIndex, MultiIndex, MultiIndex);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let picks: Vec<(u32, u32)> = self
            .counters
            .iter()
            .zip(&self.choices)
            .map(|(&c, ch)| ch[c])
            .collect();
        let first = self.base.with_counts(picks.iter().map(|p| p.0));
        let second = self.base.with_counts(picks.iter().map(|p| p.1));
        let third = self.base.with_counts(
            picks
                .iter()
                .zip(&self.base.entries)
                .map(|(p, &(_, m))| m - p.0 - p.1),
        );
        self.done = true;
        for (c, ch) in self.counters.iter_mut().zip(&self.choices) {
            if *c + 1 < ch.len() {
                *c += 1;
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some((first, second, third))
    }
}

/// `prod_i C(b(i), l(i))`.
pub fn multi_binomial(b: &MultiIndex, l: &MultiIndex) -> Result<Integer> {
    if !b.contains(l) {
        return Err(Error::Domain(format!("{l} is not contained in {b}")));
    }
    Ok(b.entries.iter().fold(Integer::one(), |acc, &(i, m)| {
        acc * binomial(m as u64, l.get(i) as u64)
    }))
}

/// `prod_i b(i)! / (a_1(i)! ... a_k(i)!)`; the parts must sum to `b`.
pub fn multi_multinomial(b: &MultiIndex, parts: &[&MultiIndex]) -> Result<Integer> {
    let mut total = MultiIndex::zero();
    for p in parts {
        total = &total + p;
    }
    if &total != b {
        return Err(Error::Domain(format!("parts do not sum to {b}")));
    }
    Ok(parts
        .iter()
        .fold(b.factorial(), |acc, p| acc / p.factorial()))
}

/// Every ordered `k`-tuple of nonzero multi-indices summing to `m`.
///
/// The count grows exponentially in `||m||`; meant for desk-scale use.
pub fn ordered_nonempty_partitions(m: &MultiIndex, k: usize) -> Vec<Vec<MultiIndex>> {
    fn rec(rem: &MultiIndex, k: usize, acc: &mut Vec<MultiIndex>, out: &mut Vec<Vec<MultiIndex>>) {
        if k == 0 {
            if rem.is_zero() {
                out.push(acc.clone());
            }
            return;
        }
        if (rem.length() as usize) < k {
            return;
        }
        for part in rem.nonzero_parts() {
            let next = rem.checked_sub(&part).expect("part is contained");
            acc.push(part);
            rec(&next, k - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::new(), &mut out);
    out
}

/// All `2^n` ordered decompositions `(I, J)` of `items` by position.
pub fn subsets<T: Clone>(items: &[T]) -> Vec<(Vec<T>, Vec<T>)> {
    assert!(items.len() < usize::BITS as usize, "too many items to enumerate subsets");
    (0..1usize << items.len())
        .map(|mask| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (pos, item) in items.iter().enumerate() {
                if mask & (1 << pos) != 0 {
                    left.push(item.clone());
                } else {
                    right.push(item.clone());
                }
            }
            (left, right)
        })
        .collect()
}

/// [`subsets`] with identical values merged: each distinct `(I, J)` of
/// multisets appears once, weighted by the number of positional subsets that
/// produce it.
pub fn submultisets(items: &[u32]) -> Vec<(Vec<u32>, Vec<u32>, Integer)> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut groups: Vec<(u32, u32)> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => groups.push((v, 1)),
        }
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; groups.len()];
    loop {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut weight = Integer::one();
        for (&(v, c), &k) in groups.iter().zip(&counts) {
            left.extend(std::iter::repeat_n(v, k as usize));
            right.extend(std::iter::repeat_n(v, (c - k) as usize));
            weight *= binomial(c as u64, k as u64);
        }
        out.push((left, right, weight));
        let mut advanced = false;
        for (k, &(_, c)) in counts.iter_mut().zip(&groups) {
            if *k < c {
                *k += 1;
                advanced = true;
                break;
            }
            *k = 0;
        }
        if !advanced {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashSet};

    use super::*;
    use crate::arith::{sign, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn delta_weight_length() {
        let d1 = MultiIndex::delta(1).unwrap();
        assert_eq!((d1.weight(), d1.length()), (1, 1));
        let d3 = MultiIndex::delta(3).unwrap();
        assert_eq!(d3.to_string(), "3:1");
        assert_eq!((d3.weight(), d3.length()), (3, 1));
        let d2 = MultiIndex::delta(2).unwrap();
        let sum = &d2 + &d2;
        assert_eq!(sum, mi("2:2"));
        assert_eq!((sum.weight(), sum.length()), (4, 2));
        assert!(MultiIndex::delta(0).is_err());
        assert_eq!((MultiIndex::zero().weight(), MultiIndex::zero().length()), (0, 0));
    }

    #[test]
    fn text_grammar() {
        assert_eq!(mi("1:2,3:1").to_string(), "1:2,3:1");
        assert_eq!(mi("3:1,1:2").to_string(), "1:2,3:1");
        assert_eq!(mi(""), MultiIndex::zero());
        assert_eq!(mi("2:0"), MultiIndex::zero());
        assert_eq!("0".parse::<MultiIndex>().unwrap(), MultiIndex::zero());
        assert!("0:1".parse::<MultiIndex>().is_err());
        assert!("1:1,1:2".parse::<MultiIndex>().is_err());
        assert!("1".parse::<MultiIndex>().is_err());
        assert!("a:1".parse::<MultiIndex>().is_err());
    }

    #[test]
    fn splits2_examples() {
        assert_eq!(
            MultiIndex::zero().splits2().collect::<Vec<_>>(),
            vec![(MultiIndex::zero(), MultiIndex::zero())]
        );
        let d1 = mi("1:1");
        let pairs: HashSet<_> = d1.splits2().collect();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.contains(&(MultiIndex::zero(), d1.clone())));
        assert!(pairs.contains(&(d1.clone(), MultiIndex::zero())));
        assert_eq!(mi("1:2,2:1").splits2().count(), 6);
    }

    #[test]
    fn splits3_examples() {
        assert_eq!(MultiIndex::zero().splits3().count(), 1);
        assert_eq!(mi("1:1").splits3().count(), 3);
        assert_eq!(mi("1:2").splits3().count(), 6);
    }

    #[test]
    fn multi_binomial_examples() {
        let b = mi("1:2,2:2");
        assert_eq!(multi_binomial(&b, &MultiIndex::zero()).unwrap(), Integer::one());
        assert_eq!(multi_binomial(&mi("1:2"), &mi("1:1")).unwrap(), Integer::from(2));
        assert_eq!(multi_binomial(&b, &mi("1:1,2:1")).unwrap(), Integer::from(4));
        assert!(multi_binomial(&mi("1:1"), &mi("2:1")).is_err());
        assert_eq!(
            multi_multinomial(&mi("1:3"), &[&mi("1:1"), &mi("1:1"), &mi("1:1")]).unwrap(),
            Integer::from(6)
        );
    }

    #[test]
    fn ordered_partition_examples() {
        let z = MultiIndex::zero();
        assert_eq!(ordered_nonempty_partitions(&z, 0), vec![Vec::<MultiIndex>::new()]);
        assert!(ordered_nonempty_partitions(&mi("1:1"), 0).is_empty());
        assert_eq!(ordered_nonempty_partitions(&mi("1:1"), 1), vec![vec![mi("1:1")]]);
        assert_eq!(
            ordered_nonempty_partitions(&mi("1:2"), 2),
            vec![vec![mi("1:1"), mi("1:1")]]
        );
        // {kappa_1, kappa_2} into two ordered parts: (1,2) and (2,1)
        assert_eq!(ordered_nonempty_partitions(&mi("1:1,2:1"), 2).len(), 2);
    }

    #[test]
    fn subset_examples() {
        assert_eq!(subsets::<u32>(&[]), vec![(vec![], vec![])]);
        let two = subsets(&[2u32]);
        assert_eq!(two.len(), 2);
        assert!(two.contains(&(vec![], vec![2])) && two.contains(&(vec![2], vec![])));
        assert_eq!(subsets(&[2u32, 3]).len(), 4);
    }

    #[test]
    fn of_weight_is_exhaustive() {
        // partitions of 6: 11
        let all = MultiIndex::of_weight(6, 6);
        assert_eq!(all.len(), 11);
        assert!(all.iter().all(|b| b.weight() == 6));
        assert_eq!(MultiIndex::of_weight(6, 2).len(), 4);
        assert_eq!(MultiIndex::of_weight(0, 3), vec![MultiIndex::zero()]);
    }

    /// Brute-force enumeration of set partitions of a labelled list into
    /// ordered blocks, for the kappa -> psi coefficient structure.
    fn brute_ordered_blocks(labels: &[u32], k: usize) -> Vec<Vec<MultiIndex>> {
        let n = labels.len();
        let mut out = Vec::new();
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut blocks = vec![Vec::new(); k];
            let mut c = code;
            for &l in labels {
                blocks[c % k].push((l, 1));
                c /= k;
            }
            if blocks.iter().all(|b| !b.is_empty()) {
                out.push(
                    blocks
                        .into_iter()
                        .map(|b| MultiIndex::from_pairs(b).unwrap())
                        .collect(),
                );
            }
        }
        out
    }

    #[test]
    fn partitions_with_multinomials_match_labelled_enumeration() {
        // The number of labelled ordered set partitions of the kappa factors
        // equals sum over multi-index tuples of the multinomial coefficient.
        for w in 0..=3 {
            for m in MultiIndex::of_weight(w, 3) {
                let labels: Vec<u32> = m
                    .entries()
                    .iter()
                    .flat_map(|&(i, c)| std::iter::repeat_n(i, c as usize))
                    .collect();
                for k in 0..=m.length() as usize {
                    let tuples = ordered_nonempty_partitions(&m, k);
                    let unique: BTreeSet<_> = tuples.iter().cloned().collect();
                    assert_eq!(unique.len(), tuples.len());
                    let weighted = tuples.iter().fold(Integer::zero(), |acc, t| {
                        let refs: Vec<&MultiIndex> = t.iter().collect();
                        acc + multi_multinomial(&m, &refs).unwrap()
                    });
                    let brute = if k == 0 {
                        usize::from(m.is_zero())
                    } else {
                        brute_ordered_blocks(&labels, k).len()
                    };
                    assert_eq!(weighted, Integer::from(brute), "m = {m}, k = {k}");
                }
                // With k! S(n,k) labelled ordered partitions, the signed sum
                // sum_k (-1)^{n-k}/k! * count is sum_k (-1)^{n-k} S(n,k).
                let n = m.length();
                let signed = (0..=n as usize).fold(Rational::zero(), |acc, k| {
                    let count = ordered_nonempty_partitions(&m, k).iter().fold(
                        Integer::zero(),
                        |a, t| {
                            let refs: Vec<&MultiIndex> = t.iter().collect();
                            a + multi_multinomial(&m, &refs).unwrap()
                        },
                    );
                    acc + sign(n - k as u32) * Rational::new(count, factorial(k as u64))
                });
                let expected = match n {
                    0 | 1 => 1,
                    2 => 0,
                    3 => -1,
                    _ => unreachable!(),
                };
                assert_eq!(signed, Rational::from_integer(expected.into()), "m = {m}");
            }
        }
    }

    #[test]
    fn submultisets_weights_match_positional_subsets() {
        let items = [2u32, 0, 0, 1, 0];
        let grouped = submultisets(&items);
        let total: Integer = grouped.iter().map(|(_, _, w)| w.clone()).sum();
        assert_eq!(total, Integer::from(32));
        for (left, right, w) in &grouped {
            let count = subsets(&items)
                .into_iter()
                .filter(|(l, r)| {
                    let mut l = l.clone();
                    let mut r = r.clone();
                    l.sort_unstable_by(|a, b| b.cmp(a));
                    r.sort_unstable_by(|a, b| b.cmp(a));
                    &l == left && &r == right
                })
                .count();
            assert_eq!(Integer::from(count), *w);
        }
    }

    fn arb_multi_index() -> impl Strategy<Value = MultiIndex> {
        proptest::collection::vec(0u32..4, 0..5).prop_map(|d| MultiIndex::from_dense(&d))
    }

    proptest! {
        #[test]
        fn splits2_count_and_binomial_sum(b in arb_multi_index()) {
            let expected: u32 = b.entries().iter().map(|&(_, m)| m + 1).product();
            let pairs: Vec<_> = b.splits2().collect();
            prop_assert_eq!(pairs.len() as u32, expected);
            let unique: HashSet<_> = pairs.iter().cloned().collect();
            prop_assert_eq!(unique.len(), pairs.len());
            let mut total = Integer::zero();
            for (l, r) in &pairs {
                prop_assert_eq!(&(l + r), &b);
                total += multi_binomial(&b, l).unwrap();
            }
            prop_assert_eq!(total, num_traits::pow(Integer::from(2), b.length() as usize));
        }

        #[test]
        fn splits3_count(b in arb_multi_index()) {
            let expected: u32 = b.entries().iter().map(|&(_, m)| (m + 2) * (m + 1) / 2).product();
            let triples: Vec<_> = b.splits3().collect();
            let unique: HashSet<_> = triples.iter().cloned().collect();
            prop_assert_eq!(triples.len() as u32, expected);
            prop_assert_eq!(unique.len(), triples.len());
            for (l, e, f) in &triples {
                prop_assert_eq!(&(&(l + e) + f), &b);
            }
        }

        #[test]
        fn text_round_trip(b in arb_multi_index()) {
            prop_assert_eq!(b.to_string().parse::<MultiIndex>().unwrap(), b);
        }

        #[test]
        fn add_sub_inverse(a in arb_multi_index(), b in arb_multi_index()) {
            let s = &a + &b;
            prop_assert_eq!(s.weight(), a.weight() + b.weight());
            prop_assert_eq!(s.checked_sub(&b), Some(a));
        }
    }
}
