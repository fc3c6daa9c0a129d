//! Independent evaluation of mixed numbers: every kappa monomial is
//! expanded into pure psi numbers,
//!
//! ```text
//! <prod tau_{d_j} kappa(m)>_g
//!   = sum_k (-1)^{||m||-k}/k! sum_{m_1+...+m_k=m, m_i!=0} C(m; m_1..m_k)
//!       <prod tau_{d_j} prod tau_{|m_i|+1}>_g,
//! ```
//!
//! and the pure psi numbers are evaluated by the DVV recursion. Nothing here
//! touches the alpha constants.

use num_traits::{One, Zero};

use crate::arith::{dfact, fact, int, ratio, sign, Rational};
use crate::correlator::CorrelatorKey;
use crate::memo::Memo;
use crate::multi_index::{multi_multinomial, ordered_nonempty_partitions, submultisets, MultiIndex};

#[derive(Debug, Default)]
pub struct KmzOracle {
    memo: Memo<(u32, Vec<u32>), Rational>,
}

impl KmzOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// `<tau_{d_1} ... tau_{d_n}>_g` by the DVV recursion.
    pub fn pure_psi(&self, genus: u32, psi: &[u32]) -> Rational {
        let mut sorted = psi.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let key = CorrelatorKey::new(genus, MultiIndex::zero(), sorted);
        if !key.is_stable() || !key.in_dimension() {
            return Rational::zero();
        }
        let memo_key = (genus, key.psi);
        if let Some(v) = self.memo.get(&memo_key) {
            return v;
        }
        let psi = &memo_key.1;
        let value = match (genus, psi.as_slice()) {
            (0, [0, 0, 0]) => Rational::one(),
            (1, [1]) => ratio(1, 24),
            _ => self.dvv(genus, psi[0], &psi[1..]),
        };
        self.memo.insert(memo_key, value)
    }

    fn dvv(&self, genus: u32, d1: u32, rest: &[u32]) -> Rational {
        let mut total = Rational::zero();
        for j in 0..rest.len() {
            let dj = rest[j];
            if d1 + dj == 0 {
                continue;
            }
            let mut psi = rest.to_vec();
            psi[j] = d1 + dj - 1;
            total += dfact(2 * (d1 + dj) as i64 - 1) / dfact(2 * dj as i64 - 1)
                * self.pure_psi(genus, &psi);
        }
        if d1 >= 2 {
            for r in 0..=d1 - 2 {
                let s = d1 - 2 - r;
                let factor = dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1) * ratio(1, 2);
                let mut inner = Rational::zero();
                if genus >= 1 {
                    let mut psi = rest.to_vec();
                    psi.extend([r, s]);
                    inner += self.pure_psi(genus - 1, &psi);
                }
                for (left, right, weight) in submultisets(rest) {
                    let mut lpsi = left;
                    lpsi.push(r);
                    let mut rpsi = right;
                    rpsi.push(s);
                    for g1 in 0..=genus {
                        let a = self.pure_psi(g1, &lpsi);
                        if !a.is_zero() {
                            inner += int(weight.clone()) * a * self.pure_psi(genus - g1, &rpsi);
                        }
                    }
                }
                total += factor * inner;
            }
        }
        total / dfact(2 * d1 as i64 + 1)
    }

    /// Sum over ordered tuples of nonzero parts, weighted by `1/k!`.
    pub fn kmz_expand(&self, genus: u32, kappa: &MultiIndex, psi: &[u32]) -> Rational {
        let length = kappa.length();
        let mut total = Rational::zero();
        for k in 0..=length as usize {
            let mut inner = Rational::zero();
            for parts in ordered_nonempty_partitions(kappa, k) {
                let refs: Vec<&MultiIndex> = parts.iter().collect();
                let coeff = multi_multinomial(kappa, &refs).expect("parts sum to kappa");
                let mut p = psi.to_vec();
                p.extend(parts.iter().map(|m| m.weight() + 1));
                inner += int(coeff) * self.pure_psi(genus, &p);
            }
            total += sign(length - k as u32) * inner / fact(k as u64);
        }
        total
    }

    /// The same sum with tuples grouped into multisets of parts; a multiset
    /// in which part `p_i` occurs `a_i` times carries `1/prod a_i!`.
    pub fn kmz_expand_grouped(&self, genus: u32, kappa: &MultiIndex, psi: &[u32]) -> Rational {
        let length = kappa.length();
        let mut total = Rational::zero();
        for parts in unordered_partitions(kappa) {
            let refs: Vec<&MultiIndex> = parts.iter().collect();
            let coeff = multi_multinomial(kappa, &refs).expect("parts sum to kappa");
            let mut repeat = Rational::one();
            let mut run = 1u64;
            for w in parts.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                    repeat *= int(run);
                } else {
                    run = 1;
                }
            }
            let mut p = psi.to_vec();
            p.extend(parts.iter().map(|m| m.weight() + 1));
            total += sign(length - parts.len() as u32) * int(coeff) / repeat * self.pure_psi(genus, &p);
        }
        total
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}

/// Multisets of nonzero parts summing to `m`, each listed in ascending order.
pub(crate) fn unordered_partitions(m: &MultiIndex) -> Vec<Vec<MultiIndex>> {
    fn rec(rem: &MultiIndex, min: Option<&MultiIndex>, acc: &mut Vec<MultiIndex>, out: &mut Vec<Vec<MultiIndex>>) {
        if rem.is_zero() {
            out.push(acc.clone());
            return;
        }
        for part in rem.nonzero_parts() {
            if min.is_some_and(|lo| &part < lo) {
                continue;
            }
            let next = rem.checked_sub(&part).expect("part is contained");
            acc.push(part.clone());
            rec(&next, Some(&part), acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, None, &mut Vec::new(), &mut out);
    out
}
