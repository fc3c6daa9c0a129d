//! The memoized recursion for `<kappa(b) tau_{d_1} ... tau_{d_n}>_g`.
//!
//! For `n >= 1` one psi insertion (the pivot, `d_1`) is removed by
//!
//! ```text
//! (2d_1+1)!! <kappa(b) tau_{d_1} ... tau_{d_n}>_g
//!   = sum_{j>=2} sum_{L+L'=b} alpha_L C(b,L) (2(|L|+d_1+d_j)-1)!!/(2d_j-1)!!
//!         <kappa(L') tau_{|L|+d_1+d_j-1} prod_{i!=1,j} tau_{d_i}>_g
//!   + 1/2 sum_{L+L'=b} sum_{r+s=|L|+d_1-2} alpha_L C(b,L) (2r+1)!!(2s+1)!!
//!         <kappa(L') tau_r tau_s prod_{i>=2} tau_{d_i}>_{g-1}
//!   + 1/2 sum_{L+e+f=b} sum_{I,J} sum_{r+s=|L|+d_1-2} alpha_L C(b;L,e,f) (2r+1)!!(2s+1)!!
//!         <kappa(e) tau_r prod_I tau_{d_i}>_{g'} <kappa(f) tau_s prod_J tau_{d_i}>_{g-g'}
//! ```
//!
//! with the `alpha` constants of [`crate::constants`]. With no insertions
//! (`n = 0`, `g >= 2`) one `tau` is first introduced by
//!
//! ```text
//! <kappa(b)>_g = 1/(2g-2) sum_{L+L'=b} (-1)^{||L||} C(b,L) <tau_{|L|+1} kappa(L')>_g.
//! ```
//!
//! The recursion terminates at `<tau_0^3>_0 = 1`, `<tau_1>_1 = 1/24` and
//! `<tau_0 kappa_1>_1 = 1/24`; the formula above does not hold at these
//! three signatures.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::arith::{dfact, int, ratio, sign, Rational};
use crate::constants::{shared, ConstantKind, ConstantTable};
use crate::error::{Error, Result};
use crate::memo::Memo;
use crate::multi_index::{multi_binomial, multi_multinomial, submultisets, subsets, MultiIndex};
use crate::{is_stable, moduli_dimension, IdentityCheck};

/// Canonical memo key: psi exponents sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    pub genus: u32,
    pub kappa: MultiIndex,
    pub psi: Vec<u32>,
}

impl CorrelatorKey {
    pub fn new(genus: u32, kappa: MultiIndex, mut psi: Vec<u32>) -> Self {
        psi.sort_unstable_by(|a, b| b.cmp(a));
        Self { genus, kappa, psi }
    }

    pub fn points(&self) -> usize {
        self.psi.len()
    }

    pub fn is_stable(&self) -> bool {
        is_stable(self.genus, self.points())
    }

    /// Total degree of the integrand equals `3g - 3 + n`.
    pub fn in_dimension(&self) -> bool {
        let degree = self.kappa.weight() as i64 + self.psi.iter().map(|&d| d as i64).sum::<i64>();
        degree == moduli_dimension(self.genus, self.points())
    }
}

/// `genus/kappa/psi`, e.g. `1/1:1/0` for `<tau_0 kappa_1>_1`.
impl fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.genus, self.kappa, format_psi(&self.psi))
    }
}

impl FromStr for CorrelatorKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, '/');
        let (Some(g), Some(k), Some(p)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("malformed correlator key {s:?}")));
        };
        let genus = g
            .parse()
            .map_err(|_| Error::Parse(format!("bad genus in key {s:?}")))?;
        Ok(Self::new(genus, k.parse()?, parse_psi(p)?))
    }
}

pub fn format_psi(psi: &[u32]) -> String {
    psi.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Comma-separated nonnegative exponents; empty text is no insertions.
pub fn parse_psi(text: &str) -> Result<Vec<u32>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad psi exponent {t:?}")))
        })
        .collect()
}

/// Which of the three initial values a signature is, if any.
pub(crate) fn initial_value(key: &CorrelatorKey) -> Option<Rational> {
    let k = &key.kappa;
    match (key.genus, key.psi.as_slice()) {
        (0, [0, 0, 0]) if k.is_zero() => Some(Rational::one()),
        (1, [1]) if k.is_zero() => Some(ratio(1, 24)),
        (1, [0]) if *k == MultiIndex::delta(1).expect("valid") => Some(ratio(1, 24)),
        _ => None,
    }
}

/// Intersection numbers of psi and kappa classes by the alpha-weighted
/// recursion.
#[derive(Debug, Default)]
pub struct CorrelatorEngine {
    alpha_override: Option<ConstantTable>,
    memo: Memo<CorrelatorKey, Rational>,
}

impl CorrelatorEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Engine drawing its `alpha` constants from `table` instead of the
    /// shared one.
    pub fn with_alpha_table(table: ConstantTable) -> Self {
        assert_eq!(table.kind(), ConstantKind::Alpha, "engine needs an alpha table");
        Self {
            alpha_override: Some(table),
            memo: Memo::default(),
        }
    }

    fn alpha(&self, l: &MultiIndex) -> Rational {
        self.alpha_override
            .as_ref()
            .unwrap_or_else(|| shared(ConstantKind::Alpha))
            .get(l)
    }

    /// `<kappa(b) tau_{d_1} ... tau_{d_n}>_g`; zero off dimension or on
    /// unstable `(g, n)`.
    pub fn correlator(&self, genus: u32, kappa: &MultiIndex, psi: &[u32]) -> Rational {
        self.evaluate(&CorrelatorKey::new(genus, kappa.clone(), psi.to_vec()))
    }

    pub fn evaluate(&self, key: &CorrelatorKey) -> Rational {
        if !key.is_stable() || !key.in_dimension() {
            return Rational::zero();
        }
        if let Some(v) = self.memo.get(key) {
            return v;
        }
        let value = if let Some(v) = initial_value(key) {
            v
        } else if key.psi.is_empty() {
            self.insert_dilaton(key.genus, &key.kappa)
        } else {
            self.remove_insertion(key.genus, &key.kappa, key.psi[0], &key.psi[1..])
        };
        self.memo.insert(key.clone(), value)
    }

    /// Applies one step of the recursion with the insertion at
    /// `psi[pivot]` removed, regardless of the engine's own pivot choice.
    /// Sub-correlators are evaluated normally.
    pub fn evaluate_with_pivot(
        &self,
        genus: u32,
        kappa: &MultiIndex,
        psi: &[u32],
        pivot: usize,
    ) -> Result<Rational> {
        if pivot >= psi.len() {
            return Err(Error::Domain(format!(
                "pivot {pivot} out of range for {} insertions",
                psi.len()
            )));
        }
        let key = CorrelatorKey::new(genus, kappa.clone(), psi.to_vec());
        if !key.is_stable() || !key.in_dimension() {
            return Ok(Rational::zero());
        }
        if initial_value(&key).is_some() {
            return Err(Error::Domain(format!(
                "{key} is an initial value; the recursion does not apply"
            )));
        }
        let mut rest = psi.to_vec();
        let d1 = rest.remove(pivot);
        Ok(self.remove_insertion(genus, kappa, d1, &rest))
    }

    fn corr(&self, genus: u32, kappa: &MultiIndex, psi: Vec<u32>) -> Rational {
        self.evaluate(&CorrelatorKey::new(genus, kappa.clone(), psi))
    }

    fn insert_dilaton(&self, genus: u32, b: &MultiIndex) -> Rational {
        debug_assert!(genus >= 2);
        let mut sum = Rational::zero();
        for (l, lp) in b.splits2() {
            let coeff = sign(l.length()) * int(multi_binomial(b, &l).expect("split"));
            sum += coeff * self.corr(genus, &lp, vec![l.weight() + 1]);
        }
        sum / int(2 * genus as i64 - 2)
    }

    fn remove_insertion(&self, genus: u32, b: &MultiIndex, d1: u32, rest: &[u32]) -> Rational {
        let mut total = Rational::zero();

        // Distinct values among the remaining insertions, with multiplicity.
        let mut distinct: Vec<(u32, usize)> = Vec::new();
        for &d in rest {
            match distinct.iter_mut().find(|(v, _)| *v == d) {
                Some((_, c)) => *c += 1,
                None => distinct.push((d, 1)),
            }
        }

        for (l, lp) in b.splits2() {
            let alpha = self.alpha(&l);
            if alpha.is_zero() {
                continue;
            }
            let lw = l.weight();
            let coeff = &alpha * int(multi_binomial(b, &l).expect("split"));

            for &(dj, count) in &distinct {
                let merged = lw as i64 + d1 as i64 + dj as i64 - 1;
                if merged < 0 {
                    continue;
                }
                let mut psi: Vec<u32> = rest.to_vec();
                let pos = psi.iter().position(|&d| d == dj).expect("present");
                psi.remove(pos);
                psi.push(merged as u32);
                let factor = dfact(2 * (merged + 1) - 1) / dfact(2 * dj as i64 - 1);
                total += &coeff * factor * int(count as i64) * self.corr(genus, &lp, psi);
            }

            let split_total = lw as i64 + d1 as i64 - 2;
            if split_total >= 0 && genus >= 1 {
                for r in 0..=split_total as u32 {
                    let s = split_total as u32 - r;
                    let mut psi = rest.to_vec();
                    psi.extend([r, s]);
                    let factor = dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1);
                    total += &coeff * factor * ratio(1, 2) * self.corr(genus - 1, &lp, psi);
                }
            }
        }

        let groups = submultisets(rest);
        for (l, e, f) in b.splits3() {
            let split_total = l.weight() as i64 + d1 as i64 - 2;
            if split_total < 0 {
                continue;
            }
            let alpha = self.alpha(&l);
            if alpha.is_zero() {
                continue;
            }
            let coeff = alpha * int(multi_multinomial(b, &[&l, &e, &f]).expect("split"));
            for r in 0..=split_total as u32 {
                let s = split_total as u32 - r;
                let factor = &coeff * dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1);
                for (left, right, weight) in &groups {
                    // genus of the left factor is forced by its dimension
                    let degree = e.weight() as i64 + r as i64 + left.iter().map(|&d| d as i64).sum::<i64>();
                    let three_g = degree - left.len() as i64 + 2;
                    if three_g < 0 || three_g % 3 != 0 || three_g / 3 > genus as i64 {
                        continue;
                    }
                    let g1 = (three_g / 3) as u32;
                    let mut lpsi = left.clone();
                    lpsi.push(r);
                    let a = self.corr(g1, &e, lpsi);
                    if a.is_zero() {
                        continue;
                    }
                    let mut rpsi = right.clone();
                    rpsi.push(s);
                    let c = self.corr(genus - g1, &f, rpsi);
                    total += &factor * int(weight.clone()) * ratio(1, 2) * a * c;
                }
            }
        }

        total / dfact(2 * d1 as i64 + 1)
    }

    /// Evaluates both sides of the kappa-subtracted form of the recursion
    /// with pivot `psi[0]`:
    ///
    /// ```text
    /// sum_{L+L'=b} (-1)^{||L||} C(b,L) (2d_1+2|L|+1)!!/(2|L|+1)!! <kappa(L') tau_{d_1+|L|} ...>_g
    ///   = sum_j (2(d_1+d_j)-1)!!/(2d_j-1)!! <kappa(b) tau_{d_1+d_j-1} ...>_g
    ///   + 1/2 sum_{r+s=d_1-2} (2r+1)!!(2s+1)!! <kappa(b) tau_r tau_s ...>_{g-1}
    ///   + 1/2 sum_{e+f=b} sum_{I,J} sum_{r+s=d_1-2} C(b,e) (2r+1)!!(2s+1)!! <..>_{g'} <..>_{g-g'}
    /// ```
    pub fn verify_kappa_subtracted(
        &self,
        genus: u32,
        b: &MultiIndex,
        psi: &[u32],
    ) -> Result<IdentityCheck> {
        let Some((&d1, rest)) = psi.split_first() else {
            return Err(Error::Domain("identity needs at least one insertion".into()));
        };
        let with = |first: Vec<u32>, tail: &[u32]| -> Vec<u32> {
            let mut v = first;
            v.extend_from_slice(tail);
            v
        };

        let mut lhs = Rational::zero();
        for (l, lp) in b.splits2() {
            let lw = l.weight() as i64;
            let coeff = sign(l.length())
                * int(multi_binomial(b, &l)?)
                * dfact(2 * d1 as i64 + 2 * lw + 1)
                / dfact(2 * lw + 1);
            lhs += coeff * self.corr(genus, &lp, with(vec![d1 + lw as u32], rest));
        }

        let mut rhs = Rational::zero();
        for j in 0..rest.len() {
            let dj = rest[j];
            if d1 + dj == 0 {
                continue;
            }
            let mut others = rest.to_vec();
            others.remove(j);
            let factor = dfact(2 * (d1 + dj) as i64 - 1) / dfact(2 * dj as i64 - 1);
            rhs += factor * self.corr(genus, b, with(vec![d1 + dj - 1], &others));
        }
        if d1 >= 2 && genus >= 1 {
            for r in 0..=d1 - 2 {
                let s = d1 - 2 - r;
                let factor = dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1) * ratio(1, 2);
                rhs += factor * self.corr(genus - 1, b, with(vec![r, s], rest));
            }
        }
        if d1 >= 2 {
            for (e, f) in b.splits2() {
                let be = int(multi_binomial(b, &e)?);
                for (left, right) in subsets(rest) {
                    for r in 0..=d1 - 2 {
                        let s = d1 - 2 - r;
                        let factor =
                            &be * dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1) * ratio(1, 2);
                        for g1 in 0..=genus {
                            let a = self.corr(g1, &e, with(vec![r], &left));
                            if a.is_zero() {
                                continue;
                            }
                            let c = self.corr(genus - g1, &f, with(vec![s], &right));
                            rhs += &factor * a * c;
                        }
                    }
                }
            }
        }
        Ok(IdentityCheck { lhs, rhs })
    }

    /// String equation with kappa classes:
    /// `sum_{L+L'=b} (-1)^{||L||} C(b,L) <tau_{|L|} prod tau_{d_j} kappa(L')>_g
    ///  = sum_j <tau_{d_j - 1} prod_{i!=j} tau_{d_i} kappa(b)>_g`.
    pub fn verify_string(&self, genus: u32, b: &MultiIndex, psi: &[u32]) -> IdentityCheck {
        let mut lhs = Rational::zero();
        for (l, lp) in b.splits2() {
            let mut p = psi.to_vec();
            p.push(l.weight());
            lhs += sign(l.length()) * int(multi_binomial(b, &l).expect("split")) * self.corr(genus, &lp, p);
        }
        let mut rhs = Rational::zero();
        for j in 0..psi.len() {
            if psi[j] == 0 {
                continue;
            }
            let mut p = psi.to_vec();
            p[j] -= 1;
            rhs += self.corr(genus, b, p);
        }
        IdentityCheck { lhs, rhs }
    }

    /// Dilaton equation with kappa classes:
    /// `sum_{L+L'=b} (-1)^{||L||} C(b,L) <tau_{|L|+1} prod tau_{d_j} kappa(L')>_g
    ///  = (2g - 2 + n) <prod tau_{d_j} kappa(b)>_g`.
    pub fn verify_dilaton(&self, genus: u32, b: &MultiIndex, psi: &[u32]) -> IdentityCheck {
        let mut lhs = Rational::zero();
        for (l, lp) in b.splits2() {
            let mut p = psi.to_vec();
            p.push(l.weight() + 1);
            lhs += sign(l.length()) * int(multi_binomial(b, &l).expect("split")) * self.corr(genus, &lp, p);
        }
        let euler = 2 * genus as i64 - 2 + psi.len() as i64;
        let rhs = int(euler) * self.corr(genus, b, psi.to_vec());
        IdentityCheck { lhs, rhs }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear_memo(&self) {
        self.memo.clear();
    }

    pub fn memo_snapshot(&self) -> Vec<(CorrelatorKey, Rational)> {
        self.memo.snapshot()
    }

    /// Seeds the memo with a previously computed value.
    pub fn seed(&self, key: CorrelatorKey, value: Rational) {
        self.memo.insert(key, value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn initial_values() {
        let e = CorrelatorEngine::new();
        assert_eq!(e.correlator(0, &MultiIndex::zero(), &[0, 0, 0]), Rational::one());
        assert_eq!(e.correlator(1, &mi("1:1"), &[0]), ratio(1, 24));
        assert_eq!(e.correlator(1, &MultiIndex::zero(), &[1]), ratio(1, 24));
    }

    #[test]
    fn small_values() {
        let e = CorrelatorEngine::new();
        // string equation from <tau_1>_1
        assert_eq!(e.correlator(1, &MultiIndex::zero(), &[0, 2]), ratio(1, 24));
        assert_eq!(e.correlator(1, &MultiIndex::zero(), &[2, 0]), ratio(1, 24));
        // genus zero: <tau_0^n tau_{n-3}>_0 = 1
        assert_eq!(e.correlator(0, &MultiIndex::zero(), &[0, 0, 0, 1]), Rational::one());
        assert_eq!(e.correlator(0, &MultiIndex::zero(), &[3, 0, 0, 0, 0, 0]), Rational::one());
        // <tau_4>_2 = 1/1152
        assert_eq!(e.correlator(2, &MultiIndex::zero(), &[4]), ratio(1, 1152));
        // <kappa_1>_0 on M_{0,4} is 1
        assert_eq!(e.correlator(0, &mi("1:1"), &[0, 0, 0, 0]), Rational::one());
        // classical Weil-Petersson volume of M_2: <kappa_1^3>_2 = 43/2880
        assert_eq!(e.correlator(2, &mi("1:3"), &[]), ratio(43, 2880));
    }

    #[test]
    fn off_dimension_and_unstable_are_zero() {
        let e = CorrelatorEngine::new();
        assert!(e.correlator(1, &mi("1:1"), &[1]).is_zero());
        assert!(e.correlator(0, &MultiIndex::zero(), &[0, 0]).is_zero());
        assert!(e.correlator(1, &MultiIndex::zero(), &[]).is_zero());
        assert!(e.correlator(0, &MultiIndex::zero(), &[]).is_zero());
        assert!(e.correlator(3, &mi("2:1"), &[1, 1]).is_zero());
    }

    #[test]
    fn permutation_invariance() {
        let e = CorrelatorEngine::new();
        let a = e.correlator(1, &mi("1:1"), &[2, 0, 0]);
        let b = e.correlator(1, &mi("1:1"), &[0, 2, 0]);
        assert_eq!(a, b);
        assert!(a > Rational::zero());
    }

    #[test]
    fn pivot_choice_does_not_matter() {
        let e = CorrelatorEngine::new();
        let psi = [2, 1, 0, 0];
        let b = mi("1:1");
        let reference = e.correlator(1, &b, &psi);
        for pivot in 0..psi.len() {
            assert_eq!(e.evaluate_with_pivot(1, &b, &psi, pivot).unwrap(), reference);
        }
        assert!(e.evaluate_with_pivot(1, &b, &psi, 4).is_err());
        assert!(e.evaluate_with_pivot(1, &mi("1:1"), &[0], 0).is_err());
    }

    #[test]
    fn identities_at_examples() {
        let e = CorrelatorEngine::new();
        assert!(e.verify_kappa_subtracted(1, &mi("1:1"), &[1]).unwrap().holds());
        assert!(e.verify_kappa_subtracted(0, &MultiIndex::zero(), &[1, 0, 0, 0]).unwrap().holds());
        assert!(e.verify_kappa_subtracted(2, &mi("1:2"), &[1, 1]).unwrap().holds());
        assert!(e.verify_kappa_subtracted(1, &MultiIndex::zero(), &[]).is_err());

        let s = e.verify_string(1, &MultiIndex::zero(), &[2]);
        assert_eq!((s.lhs.clone(), s.rhs.clone()), (ratio(1, 24), ratio(1, 24)));
        assert!(e.verify_string(0, &mi("1:1"), &[0, 0, 0]).holds());
        let d = e.verify_dilaton(1, &MultiIndex::zero(), &[1]);
        assert_eq!(d.rhs, ratio(1, 24));
        assert!(d.holds());
    }

    #[test]
    fn key_text_round_trip() {
        let key = CorrelatorKey::new(2, mi("1:2,3:1"), vec![0, 4, 1]);
        assert_eq!(key.to_string(), "2/1:2,3:1/4,1,0");
        assert_eq!(key.to_string().parse::<CorrelatorKey>().unwrap(), key);
        let bare = CorrelatorKey::new(2, MultiIndex::zero(), vec![]);
        assert_eq!(bare.to_string(), "2//");
        assert_eq!("2//".parse::<CorrelatorKey>().unwrap(), bare);
        assert!("2/1:1".parse::<CorrelatorKey>().is_err());
    }

    #[test]
    fn memo_clear_reproduces_values() {
        let e = CorrelatorEngine::new();
        let first = e.correlator(2, &mi("1:1,2:1"), &[2, 0]);
        assert!(e.memo_len() > 0);
        e.clear_memo();
        assert_eq!(e.memo_len(), 0);
        assert_eq!(e.correlator(2, &mi("1:1,2:1"), &[2, 0]), first);
    }
}
