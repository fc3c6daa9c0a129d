//! Truncated formal series in `s_1..s_S, t_0..t_T` and the coefficientwise
//! check of
//!
//! ```text
//! G(s, t_0, t_1, ...) = F(t_0, t_1, t_2 + p_2, t_3 + p_3, ...),
//! p_k = sum_{|L|=k-1} (-1)^{||L||-1} / L! s^L,
//! ```
//!
//! where `G` collects all mixed numbers `<kappa(m) prod tau_i^{n_i}>_g
//! s^m/m! prod t_i^{n_i}/n_i!` and `F` is its restriction to psi classes.
//!
//! A monomial `s^m prod t_i^{n_i}` has weight `|m| + sum i n_i`; for a
//! nonzero coefficient this is the dimension `3g-3+n` of the moduli space.
//! Weights are additive and nonnegative, so truncating at a weight cutoff is
//! compatible with products.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{binomial, int, Integer, Rational};
use crate::constants::p_shift;
use crate::correlator::CorrelatorEngine;
use crate::error::Result;
use crate::kmz::KmzOracle;
use crate::multi_index::MultiIndex;

/// Exponents of `s_1..s_S` and `t_0..t_T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub s: Vec<u32>,
    pub t: Vec<u32>,
}

impl Monomial {
    pub fn one(s_vars: usize, t_vars: usize) -> Self {
        Self {
            s: vec![0; s_vars],
            t: vec![0; t_vars],
        }
    }

    pub fn weight(&self) -> u32 {
        let ws: u32 = self.s.iter().enumerate().map(|(i, &e)| (i as u32 + 1) * e).sum();
        let wt: u32 = self.t.iter().enumerate().map(|(i, &e)| i as u32 * e).sum();
        ws + wt
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial {
            s: self.s.iter().zip(&other.s).map(|(a, b)| a + b).collect(),
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }

    /// The `s` part as a multi-index.
    pub fn kappa(&self) -> MultiIndex {
        MultiIndex::from_dense(&self.s)
    }

    /// Psi exponents, one entry per `t_i` factor.
    pub fn psi(&self) -> Vec<u32> {
        self.t
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i as u32, e as usize))
            .collect()
    }

    /// `m! prod n_i!`.
    fn factorial_weight(&self) -> Integer {
        self.s
            .iter()
            .chain(&self.t)
            .fold(Integer::one(), |acc, &e| acc * crate::arith::factorial(e as u64))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        let mut push = |name: String, e: u32| match e {
            0 => {}
            1 => factors.push(name),
            _ => factors.push(format!("{name}^{e}")),
        };
        for (i, &e) in self.s.iter().enumerate() {
            push(format!("s{}", i + 1), e);
        }
        for (i, &e) in self.t.iter().enumerate() {
            push(format!("t{i}"), e);
        }
        if factors.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&factors.join("*"))
        }
    }
}

/// Polynomial in `s_1..s_S, t_0..t_T` keeping only monomials of weight at
/// most `cutoff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    s_vars: usize,
    t_vars: usize,
    cutoff: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl TruncatedSeries {
    /// `t_vars` counts `t_0..t_T`, so it is `T + 1`.
    pub fn zero(s_vars: usize, t_vars: usize, cutoff: u32) -> Self {
        Self {
            s_vars,
            t_vars,
            cutoff,
            terms: BTreeMap::new(),
        }
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn s_vars(&self) -> usize {
        self.s_vars
    }

    pub fn t_vars(&self) -> usize {
        self.t_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c * m`; ignored above the cutoff.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!((m.s.len(), m.t.len()), (self.s_vars, self.t_vars), "monomial shape");
        if c.is_zero() || m.weight() > self.cutoff {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn constant(s_vars: usize, t_vars: usize, cutoff: u32, c: Rational) -> Self {
        let mut out = Self::zero(s_vars, t_vars, cutoff);
        out.add_term(Monomial::one(s_vars, t_vars), c);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.with_cutoff(self.cutoff.min(other.cutoff));
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.s_vars, self.t_vars, self.cutoff);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.s_vars, self.t_vars, self.cutoff.min(other.cutoff));
        for (a, x) in &self.terms {
            let wa = a.weight();
            for (b, y) in &other.terms {
                if wa + b.weight() <= out.cutoff {
                    out.add_term(a.times(b), x * y);
                }
            }
        }
        out
    }

    /// Same terms, dropping those above the new cutoff.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut out = Self::zero(self.s_vars, self.t_vars, cutoff);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Drops monomials involving `t_i` with `i >= t_vars`, and the variables
    /// themselves.
    pub fn restrict_t(&self, t_vars: usize) -> Self {
        let mut out = Self::zero(self.s_vars, t_vars, self.cutoff);
        for (m, c) in &self.terms {
            if m.t[t_vars.min(m.t.len())..].iter().all(|&e| e == 0) {
                let mut t = m.t.clone();
                t.resize(t_vars, 0);
                out.add_term(Monomial { s: m.s.clone(), t }, c.clone());
            }
        }
        out
    }

    /// Monomials free of `s`.
    pub fn at_s_zero(&self) -> Self {
        let mut out = Self::zero(self.s_vars, self.t_vars, self.cutoff);
        for (m, c) in &self.terms {
            if m.s.iter().all(|&e| e == 0) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Substitutes `t_k -> t_k + shifts[k]` for every `k` in `shifts` and
    /// truncates the result at `cutoff`. Each shift must have this series'
    /// shape.
    pub fn substitute_t(&self, shifts: &BTreeMap<usize, TruncatedSeries>, cutoff: u32) -> Self {
        let shape = (self.s_vars, self.t_vars);
        let one = Self::constant(shape.0, shape.1, cutoff, Rational::one());
        // (t_k + p_k)^n expanded once per (k, n)
        let mut binomial_powers: BTreeMap<(usize, u32), Self> = BTreeMap::new();
        let mut out = Self::zero(shape.0, shape.1, cutoff);
        for (m, c) in &self.terms {
            let mut fixed = m.clone();
            let mut product = one.clone();
            for (&k, shift) in shifts {
                let n = m.t[k];
                if n == 0 {
                    continue;
                }
                fixed.t[k] = 0;
                let power = binomial_powers
                    .entry((k, n))
                    .or_insert_with(|| binomial_power(k, n, shift, shape, cutoff));
                product = product.mul(power);
                if product.is_empty() {
                    break;
                }
            }
            let mut single = Self::zero(shape.0, shape.1, cutoff);
            single.add_term(fixed, c.clone());
            for (pm, pc) in &single.mul(&product).terms {
                out.add_term(pm.clone(), pc.clone());
            }
        }
        out
    }
}

/// `(t_k + p)^n` truncated at `cutoff`.
fn binomial_power(k: usize, n: u32, p: &TruncatedSeries, shape: (usize, usize), cutoff: u32) -> TruncatedSeries {
    let mut out = TruncatedSeries::zero(shape.0, shape.1, cutoff);
    let mut p_power = TruncatedSeries::constant(shape.0, shape.1, cutoff, Rational::one());
    for j in 0..=n {
        let mut t = Monomial::one(shape.0, shape.1);
        t.t[k] = n - j;
        let mut term = TruncatedSeries::zero(shape.0, shape.1, cutoff);
        term.add_term(t, int(binomial(n as u64, j as u64)));
        for (m, c) in &term.mul(&p_power).terms {
            out.add_term(m.clone(), c.clone());
        }
        p_power = p_power.mul(p);
    }
    out
}

/// Monomials of weight at most `cutoff` whose coefficient may be nonzero:
/// `3g = weight + 3 - n` must have a solution with `g >= 0` and `2g-2+n > 0`.
fn admissible_monomials(cutoff: u32, s_vars: usize, t_vars: usize) -> Vec<(u32, Monomial)> {
    let mut out = Vec::new();
    for w in 0..=cutoff {
        for ws in 0..=w {
            let s_parts = if s_vars == 0 {
                if ws == 0 { vec![MultiIndex::zero()] } else { vec![] }
            } else {
                MultiIndex::of_weight(ws, s_vars as u32)
            };
            let max_t = t_vars.saturating_sub(1) as u32;
            let t_parts = if max_t == 0 {
                if w == ws { vec![MultiIndex::zero()] } else { vec![] }
            } else {
                MultiIndex::of_weight(w - ws, max_t)
            };
            for sp in &s_parts {
                for tp in &t_parts {
                    let positive: u32 = tp.length();
                    for n0 in 0..=w + 3 {
                        let n = positive + n0;
                        let three_g = w as i64 + 3 - n as i64;
                        if three_g < 0 || three_g % 3 != 0 {
                            continue;
                        }
                        let g = (three_g / 3) as u32;
                        if !crate::is_stable(g, n as usize) {
                            continue;
                        }
                        let mut m = Monomial::one(s_vars, t_vars);
                        for &(i, e) in sp.entries() {
                            m.s[i as usize - 1] = e;
                        }
                        m.t[0] = n0;
                        for &(i, e) in tp.entries() {
                            m.t[i as usize] = e;
                        }
                        out.push((g, m));
                    }
                }
            }
        }
    }
    out
}

/// The mixed potential `G` in `s_1..s_S, t_0..t_T` up to weight `cutoff`.
pub fn build_g(engine: &CorrelatorEngine, cutoff: u32, s_vars: usize, t_max: usize) -> TruncatedSeries {
    let t_vars = t_max + 1;
    let mut out = TruncatedSeries::zero(s_vars, t_vars, cutoff);
    for (g, m) in admissible_monomials(cutoff, s_vars, t_vars) {
        let v = engine.correlator(g, &m.kappa(), &m.psi());
        let w = int(m.factorial_weight());
        out.add_term(m, v / w);
    }
    out
}

/// The psi potential `F` in `t_0..t_T` up to weight `cutoff`, with `s_vars`
/// unused `s` variables so it can be compared with `G`.
pub fn build_f(oracle: &KmzOracle, cutoff: u32, s_vars: usize, t_max: usize) -> TruncatedSeries {
    let t_vars = t_max + 1;
    let mut out = TruncatedSeries::zero(s_vars, t_vars, cutoff);
    for (g, m) in admissible_monomials(cutoff, 0, t_vars) {
        let v = oracle.pure_psi(g, &m.psi());
        let w = int(m.factorial_weight());
        let lifted = Monomial {
            s: vec![0; s_vars],
            t: m.t,
        };
        out.add_term(lifted, v / w);
    }
    out
}

/// Outcome of comparing `G` with the shifted `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftReport {
    pub holds: bool,
    /// Monomials present on either side.
    pub compared: usize,
    /// First differing monomial in monomial order, with the coefficient in
    /// `G` and in the shifted `F`.
    pub first_mismatch: Option<(Monomial, Rational, Rational)>,
}

impl fmt::Display for ShiftReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_mismatch {
            None => write!(f, "equal on {} monomials", self.compared),
            Some((m, g, fv)) => write!(f, "mismatch at {m}: G has {g}, shifted F has {fv}"),
        }
    }
}

/// Checks the shift identity with the true `p_k`.
pub fn shift_check(
    engine: &CorrelatorEngine,
    oracle: &KmzOracle,
    cutoff: u32,
    s_vars: usize,
    t_max: usize,
) -> Result<ShiftReport> {
    shift_check_with(engine, oracle, cutoff, s_vars, t_max, &|k, s| p_shift(k, s))
}

/// Checks the shift identity with `p_k` supplied by `shift(k, S)` as
/// `(s exponent, coefficient)` pairs.
pub fn shift_check_with(
    engine: &CorrelatorEngine,
    oracle: &KmzOracle,
    cutoff: u32,
    s_vars: usize,
    t_max: usize,
    shift: &dyn Fn(u32, u32) -> Result<Vec<(MultiIndex, Rational)>>,
) -> Result<ShiftReport> {
    let g = build_g(engine, cutoff, s_vars, t_max);
    // Each substitution lowers the weight by one and applies to t_k with
    // k >= 2, so F is needed up to twice the cutoff and up to t_{cutoff+1}.
    let f_t_max = t_max.max(cutoff as usize + 1);
    let f_cutoff = 2 * cutoff;
    let f = build_f(oracle, f_cutoff, s_vars, f_t_max);
    let mut shifts = BTreeMap::new();
    for k in 2..=f_t_max {
        let mut p = TruncatedSeries::zero(s_vars, f_t_max + 1, f_cutoff);
        for (l, c) in shift(k as u32, s_vars as u32)? {
            let mut m = Monomial::one(s_vars, f_t_max + 1);
            for &(i, e) in l.entries() {
                m.s[i as usize - 1] = e;
            }
            p.add_term(m, c);
        }
        shifts.insert(k, p);
    }
    let shifted = f.substitute_t(&shifts, cutoff).restrict_t(t_max + 1);

    let mut keys: Vec<&Monomial> = g.terms.keys().chain(shifted.terms.keys()).collect();
    keys.sort();
    keys.dedup();
    let first_mismatch = keys.iter().find_map(|m| {
        let (a, b) = (g.coefficient(m), shifted.coefficient(m));
        (a != b).then(|| ((*m).clone(), a, b))
    });
    Ok(ShiftReport {
        holds: first_mismatch.is_none(),
        compared: keys.len(),
        first_mismatch,
    })
}
