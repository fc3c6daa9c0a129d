//! Higher Weil-Petersson volumes `V_{g,n}(kappa(b)) = <tau_0^n kappa(b)>_g`
//! computed without psi classes.
//!
//! For `n >= 1`:
//!
//! ```text
//! (2g-1+||b||) V_{g,n}(b) = 1/12 V_{g-1,n+3}(b)
//!     - sum_{L+L'=b, ||L'||>=2} C(b,L) V_{g,n}(kappa(L) kappa_{|L'|})
//!     + 1/2 sum_{L+L'=b, L,L'!=0} sum_{r+s=n-1} C(b,L) C(n-1,r) V_{g',r+2}(L) V_{g-g',s+2}(L')
//! ```
//!
//! starting from `V_{0,3}(1) = 1` and `V_{0,n}(kappa_{n-3}) = 1`. For `n = 0`
//! and `g >= 2` a second recursion in `||b||` reduces everything to `n >= 1`;
//! there `kappa_0` is the scalar `2g-2+n` of the space it lives on.

use std::sync::atomic::{AtomicU32, Ordering};

use num_traits::{One, Zero};

use crate::arith::{binomial, dfact, fact, int, ratio, Rational};
use crate::correlator::CorrelatorEngine;
use crate::error::{Error, Result};
use crate::memo::Memo;
use crate::multi_index::{multi_binomial, multi_multinomial, subsets, MultiIndex};
use crate::{is_stable, moduli_dimension, IdentityCheck};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VolumeKey {
    pub genus: u32,
    pub points: u32,
    pub kappa: MultiIndex,
}

impl VolumeKey {
    pub fn in_dimension(&self) -> bool {
        is_stable(self.genus, self.points as usize)
            && self.kappa.weight() as i64 == moduli_dimension(self.genus, self.points as usize)
    }
}

impl std::fmt::Display for VolumeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.genus, self.points, self.kappa)
    }
}

/// A kappa monomial where `kappa_0` may occur; `kappa_0` acts as the
/// scalar `kappa0`.
fn kappa_times(base: &MultiIndex, index: u32, kappa0: i64) -> (Rational, MultiIndex) {
    if index == 0 {
        (int(kappa0), base.clone())
    } else {
        (Rational::one(), base.with_kappa(index))
    }
}

/// Genus of the factor `V_{h,n}(kappa(b))` forced by its dimension.
fn genus_from_dimension(weight: u32, points: u32) -> Option<u32> {
    let three_g = weight as i64 + 3 - points as i64;
    (three_g >= 0 && three_g % 3 == 0).then_some((three_g / 3) as u32)
}

#[derive(Debug, Default)]
pub struct VolumeEngine {
    memo: Memo<VolumeKey, Rational>,
    max_depth: AtomicU32,
}

impl VolumeEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// `V_{g,n}(kappa(b))`; `n = 0` goes to [`Self::volume_closed`] when
    /// `g >= 2`. Off dimension or unstable gives 0.
    pub fn volume(&self, genus: u32, points: u32, kappa: &MultiIndex) -> Result<Rational> {
        if points == 0 {
            if genus < 2 {
                return Ok(Rational::zero());
            }
            return self.volume_closed(genus, kappa);
        }
        Ok(self.open(genus, points, kappa, 1))
    }

    /// `V_g(kappa(b))` for `g >= 2`.
    pub fn volume_closed(&self, genus: u32, kappa: &MultiIndex) -> Result<Rational> {
        if genus < 2 {
            return Err(Error::Domain(format!(
                "closed volume recursion needs genus >= 2, got {genus}"
            )));
        }
        Ok(self.closed(genus, kappa, 1))
    }

    fn note_depth(&self, depth: u32) {
        self.max_depth.fetch_max(depth, Ordering::Relaxed);
    }

    /// Deepest recursion seen since construction or the last reset.
    pub fn max_depth(&self) -> u32 {
        self.max_depth.load(Ordering::Relaxed)
    }

    pub fn reset_depth(&self) {
        self.max_depth.store(0, Ordering::Relaxed);
    }

    /// Upper bound on the recursion depth of a query. Every step of the
    /// open recursion lowers `(g, ||b||)` lexicographically without raising
    /// `||b||`; the closed recursion lowers `||b||` and may hand over a
    /// monomial one longer to the open recursion.
    pub fn depth_bound(genus: u32, points: u32, kappa: &MultiIndex) -> u32 {
        let len = kappa.length();
        let open = |extra: u32| (genus + 1) * (len + extra + 1);
        if points == 0 {
            len + 1 + open(1)
        } else {
            open(0)
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear_memo(&self) {
        self.memo.clear();
    }

    fn open(&self, genus: u32, points: u32, b: &MultiIndex, depth: u32) -> Rational {
        let key = VolumeKey {
            genus,
            points,
            kappa: b.clone(),
        };
        if !key.in_dimension() {
            return Rational::zero();
        }
        self.note_depth(depth);
        if let Some(v) = self.memo.get(&key) {
            return v;
        }
        let length = b.length();
        let value = if genus == 0 && length <= 1 {
            // V_{0,3}(1) and V_{0,n}(kappa_{n-3})
            Rational::one()
        } else {
            let next = depth + 1;
            let mut rhs = Rational::zero();
            if genus >= 1 {
                rhs += ratio(1, 12) * self.open(genus - 1, points + 3, b, next);
            }
            for (l, lp) in b.splits2() {
                if lp.length() >= 2 {
                    let c = int(multi_binomial(b, &l).expect("split"));
                    rhs -= c * self.open(genus, points, &l.with_kappa(lp.weight()), next);
                }
            }
            for (l, lp) in b.splits2() {
                if l.is_zero() || lp.is_zero() {
                    continue;
                }
                let c = int(multi_binomial(b, &l).expect("split"));
                for r in 0..points {
                    let s = points - 1 - r;
                    let Some(g1) = genus_from_dimension(l.weight(), r + 2) else {
                        continue;
                    };
                    if g1 > genus {
                        continue;
                    }
                    let a = self.open(g1, r + 2, &l, next);
                    if a.is_zero() {
                        continue;
                    }
                    let w = int(binomial(points as u64 - 1, r as u64));
                    rhs += &c * w * ratio(1, 2) * a * self.open(genus - g1, s + 2, &lp, next);
                }
            }
            rhs / int(2 * genus as i64 - 1 + length as i64)
        };
        self.memo.insert(key, value)
    }

    fn closed(&self, genus: u32, b: &MultiIndex, depth: u32) -> Rational {
        let key = VolumeKey {
            genus,
            points: 0,
            kappa: b.clone(),
        };
        if !key.in_dimension() {
            return Rational::zero();
        }
        self.note_depth(depth);
        if let Some(v) = self.memo.get(&key) {
            return v;
        }
        let next = depth + 1;
        let g = genus as i64;
        let len = b.length() as i64;
        let mut rhs = Rational::zero();

        for (l, lp) in b.splits2() {
            let c = int(multi_binomial(b, &l).expect("split"));
            rhs += int(5) * &c * self.open(genus, 1, &l.with_kappa(lp.weight() + 1), next);
            let (scalar, m) = kappa_times(&l, lp.weight(), 2 * g - 1);
            rhs -= ratio(1, 6) * &c * scalar * self.open(genus - 1, 3, &m, next);
        }

        for (l, e, f) in b.splits3() {
            let c = int(multi_multinomial(b, &[&l, &e, &f]).expect("split"));
            for g1 in 0..=genus {
                let (scalar, m) = kappa_times(&e, l.weight(), 2 * g1 as i64 - 1);
                let a = self.open(g1, 1, &m, next);
                if a.is_zero() {
                    continue;
                }
                rhs -= &c * scalar * a * self.open(genus - g1, 2, &f, next);
            }
        }

        for (l, lp) in b.splits2() {
            if lp.length() < 2 {
                continue;
            }
            let c = int(multi_binomial(b, &l).expect("split"));
            let merged = l.with_kappa(lp.weight());
            rhs -= int(2 * g - 1 + len) * &c * self.closed(genus, &merged, next);
            for (e, f) in merged.splits2() {
                let ce = int(multi_binomial(&merged, &e).expect("split"));
                let (scalar, m) = kappa_times(&e, f.weight(), 2 * g - 2);
                rhs -= &c * ce * scalar * self.closed(genus, &m, next);
            }
        }

        let denominator = (2 * g - 1) * (2 * g - 2) + (4 * g - 3) * len + len * len;
        self.memo.insert(key, rhs / int(denominator))
    }

    /// Evaluates the fully expanded closed formula for `V_{g,n}(b)` (the
    /// genus recursion unrolled down to genus 0) and compares it with
    /// [`Self::volume`].
    pub fn volume_expanded_check(&self, genus: u32, points: u32, b: &MultiIndex) -> Result<IdentityCheck> {
        if points == 0 {
            return Err(Error::Domain("expanded formula needs at least one point".into()));
        }
        let key = VolumeKey {
            genus,
            points,
            kappa: b.clone(),
        };
        if !key.in_dimension() {
            return Err(Error::Domain(format!("{key} is not in dimension")));
        }
        let len = b.length();
        let mut lhs = Rational::zero();
        if len == 0 {
            lhs += Rational::one();
        }
        if len == 1 {
            lhs += Rational::one()
                / (int(num_traits::pow(crate::Integer::from(24), genus as usize)) * fact(genus as u64));
        }
        for h in 0..=genus {
            let shift = 3 * (genus - h);
            let n_h = points + shift;
            let mut bracket = Rational::zero();
            for (l, lp) in b.splits2() {
                if l.is_zero() || lp.is_zero() {
                    continue;
                }
                let c = int(multi_binomial(b, &l)?);
                for r in 0..n_h {
                    let s = n_h - 1 - r;
                    let Some(h1) = genus_from_dimension(l.weight(), r + 2) else {
                        continue;
                    };
                    if h1 > h {
                        continue;
                    }
                    let a = self.volume(h1, r + 2, &l)?;
                    if a.is_zero() {
                        continue;
                    }
                    let w = int(binomial(n_h as u64 - 1, r as u64));
                    bracket += &c * w * ratio(1, 2) * a * self.volume(h - h1, s + 2, &lp)?;
                }
            }
            for (l, lp) in b.splits2() {
                if lp.length() >= 2 {
                    let c = int(multi_binomial(b, &l)?);
                    bracket -= c * self.volume(h, n_h, &l.with_kappa(lp.weight()))?;
                }
            }
            if bracket.is_zero() {
                continue;
            }
            let num = dfact(2 * h as i64 - 3 + len as i64);
            let den = int(num_traits::pow(crate::Integer::from(12), (genus - h) as usize))
                * dfact(2 * genus as i64 - 1 + len as i64);
            lhs += num / den * bracket;
        }
        Ok(IdentityCheck {
            lhs,
            rhs: self.volume(genus, points, b)?,
        })
    }
}

/// `<tau_0 tau_1 prod tau_{d_j} kappa(b)>_g
///  = 1/12 <tau_0^4 prod tau_{d_j} kappa(b)>_{g-1}
///  + 1/2 sum_{L+L'=b} sum_{I,J} C(b,L) <tau_0^2 prod_I tau_{d_i} kappa(L)>_{g'} <tau_0^2 prod_J tau_{d_i} kappa(L')>_{g-g'}`.
pub fn verify_first_kdv(engine: &CorrelatorEngine, genus: u32, b: &MultiIndex, psi: &[u32]) -> IdentityCheck {
    let with = |head: &[u32], tail: &[u32]| -> Vec<u32> { head.iter().chain(tail).copied().collect() };
    let lhs = engine.correlator(genus, b, &with(&[0, 1], psi));
    let mut rhs = Rational::zero();
    if genus >= 1 {
        rhs += ratio(1, 12) * engine.correlator(genus - 1, b, &with(&[0, 0, 0, 0], psi));
    }
    for (l, lp) in b.splits2() {
        let c = int(multi_binomial(b, &l).expect("split"));
        for (left, right) in subsets(psi) {
            for g1 in 0..=genus {
                let a = engine.correlator(g1, &l, &with(&[0, 0], &left));
                if a.is_zero() {
                    continue;
                }
                rhs += &c * ratio(1, 2) * a * engine.correlator(genus - g1, &lp, &with(&[0, 0], &right));
            }
        }
    }
    IdentityCheck { lhs, rhs }
}

/// `<tau_1 tau_r prod tau_{d_j} kappa(b)>_g
///  = (2r+3) <tau_0 tau_{r+1} ...>_g - 1/6 <tau_0^3 tau_r ...>_{g-1}
///  - sum_{L+L'=b} sum_{I,J} C(b,L) <tau_0 tau_r prod_I tau_{d_i} kappa(L)>_{g'} <tau_0^2 prod_J tau_{d_i} kappa(L')>_{g-g'}`.
pub fn verify_tau1_insertion(
    engine: &CorrelatorEngine,
    genus: u32,
    b: &MultiIndex,
    psi: &[u32],
    r: u32,
) -> IdentityCheck {
    let with = |head: &[u32], tail: &[u32]| -> Vec<u32> { head.iter().chain(tail).copied().collect() };
    let lhs = engine.correlator(genus, b, &with(&[1, r], psi));
    let mut rhs = int(2 * r as i64 + 3) * engine.correlator(genus, b, &with(&[0, r + 1], psi));
    if genus >= 1 {
        rhs -= ratio(1, 6) * engine.correlator(genus - 1, b, &with(&[0, 0, 0, r], psi));
    }
    for (l, lp) in b.splits2() {
        let c = int(multi_binomial(b, &l).expect("split"));
        for (left, right) in subsets(psi) {
            for g1 in 0..=genus {
                let a = engine.correlator(g1, &l, &with(&[0, r], &left));
                if a.is_zero() {
                    continue;
                }
                rhs -= &c * a * engine.correlator(genus - g1, &lp, &with(&[0, 0], &right));
            }
        }
    }
    IdentityCheck { lhs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn initial_values() {
        let v = VolumeEngine::new();
        assert_eq!(v.volume(0, 3, &MultiIndex::zero()).unwrap(), Rational::one());
        assert_eq!(v.volume(0, 4, &mi("1:1")).unwrap(), Rational::one());
        assert_eq!(v.volume(0, 7, &mi("4:1")).unwrap(), Rational::one());
        assert_eq!(v.volume(1, 1, &mi("1:1")).unwrap(), ratio(1, 24));
    }

    #[test]
    fn classical_values() {
        let v = VolumeEngine::new();
        // kappa_1^2 on M_{0,5} and kappa_1^2 on M_{1,2}
        assert_eq!(v.volume(0, 5, &mi("1:2")).unwrap(), ratio(5, 1));
        assert_eq!(v.volume(1, 2, &mi("1:2")).unwrap(), ratio(1, 8));
        assert_eq!(v.volume_closed(2, &mi("1:3")).unwrap(), ratio(43, 2880));
        assert_eq!(v.volume(2, 0, &mi("1:3")).unwrap(), ratio(43, 2880));
    }

    #[test]
    fn gates_and_errors() {
        let v = VolumeEngine::new();
        assert!(v.volume(1, 1, &mi("1:2")).unwrap().is_zero());
        assert!(v.volume(1, 0, &mi("1:1")).unwrap().is_zero());
        assert!(v.volume_closed(1, &MultiIndex::zero()).is_err());
        assert!(v.volume_expanded_check(1, 0, &mi("1:1")).is_err());
    }

    #[test]
    fn expanded_formula_examples() {
        let v = VolumeEngine::new();
        for (g, n, b) in [(1, 1, "1:1"), (0, 4, "1:1"), (2, 1, "1:4"), (1, 3, "1:1,2:1")] {
            let check = v.volume_expanded_check(g, n, &mi(b)).unwrap();
            assert!(check.holds(), "{g} {n} {b}: {check}");
        }
    }

    #[test]
    fn depth_stays_within_bound() {
        let v = VolumeEngine::new();
        let b = mi("1:2,2:1");
        v.volume_closed(2, &b).unwrap();
        assert!(v.max_depth() <= VolumeEngine::depth_bound(2, 0, &b));
        v.clear_memo();
        v.reset_depth();
        let b = mi("1:4");
        v.volume(1, 1, &b).unwrap();
        assert!(v.max_depth() <= VolumeEngine::depth_bound(1, 1, &b));
    }

    #[test]
    fn kdv_identities_at_examples() {
        let e = CorrelatorEngine::new();
        assert!(verify_first_kdv(&e, 1, &MultiIndex::zero(), &[]).holds());
        assert!(verify_first_kdv(&e, 1, &mi("1:1"), &[1]).holds());
        assert!(verify_tau1_insertion(&e, 2, &MultiIndex::zero(), &[], 1).holds());
        assert!(verify_tau1_insertion(&e, 1, &mi("1:1"), &[0], 2).holds());
    }
}
