//! Pairings of psi and kappa classes against `lambda_g lambda_{g-1}` and
//! against `lambda_g`.
//!
//! Two routes are implemented:
//!
//! * expand kappa classes into psi classes (the lambda class is pulled back
//!   along forgetful maps, so the expansion is unchanged), remove `tau_0`
//!   by the string equation, and merge the two largest insertions with
//!
//!   ```text
//!   <tau_d tau_{d_0} prod tau_{d_j} | lambda_g lambda_{g-1}>_g
//!     = (2d+2d_0-1)!!/((2d-1)!!(2d_0-1)!!) <tau_{d_0+d-1} prod tau_{d_j}>_g
//!     + sum_j (2d+2d_j-3)!!/((2d-1)!!(2d_j-3)!!) <tau_{d_0} tau_{d_j+d-1} prod_{i!=j} tau_{d_i}>_g
//!
//!   <tau_d tau_{d_0} prod tau_{d_j} | lambda_g>_g
//!     = C(d+d_0, d_0) <tau_{d_0+d-1} ...>_g + sum_j C(d_j+d-1, d_j-1) <tau_{d_0} tau_{d_j+d-1} ...>_g
//!   ```
//!
//!   until one insertion is left;
//! * carry kappa classes through the same merge, weighted by the
//!   `gamma_odd` (for `lambda_g lambda_{g-1}`) or `gamma_fact` (for
//!   `lambda_g`) constants.
//!
//! Both routes end at one-point values `<tau_{g-1} | lambda_g lambda_{g-1}>_g`
//! and `<tau_{2g-2} | lambda_g>_g`, which come from a [`BaseValueProvider`].
//! The default [`ClosedFormProvider`] uses the known evaluations
//!
//! ```text
//! <tau_{g-1} | lambda_g lambda_{g-1}>_g = |B_{2g}| / (2^{2g-1} (2g-1)!! 2g)
//! <tau_{2g-2} | lambda_g>_g = (2^{2g-1} - 1) |B_{2g}| / (2^{2g-1} (2g)!)
//! ```
//!
//! (Getzler and Pandharipande, "Virasoro constraints and the Chern classes
//! of the Hodge bundle", 1998; Faber and Pandharipande, "Hodge integrals and
//! Gromov-Witten theory", 2000).

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::arith::{bernoulli, dfact, fact, format_rational, int, parse_rational, sign, Integer, Rational};
use crate::constants::{shared, ConstantKind};
use crate::correlator::CorrelatorKey;
use crate::error::{Error, Result};
use crate::memo::Memo;
use crate::multi_index::{multi_binomial, MultiIndex};
use crate::{is_stable, IdentityCheck};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HodgePairing {
    /// `lambda_g`
    LambdaG,
    /// `lambda_g lambda_{g-1}`
    LambdaGLambdaGm1,
}

impl HodgePairing {
    pub const ALL: [HodgePairing; 2] = [HodgePairing::LambdaG, HodgePairing::LambdaGLambdaGm1];

    pub fn name(self) -> &'static str {
        match self {
            HodgePairing::LambdaG => "lambda_g",
            HodgePairing::LambdaGLambdaGm1 => "lambda_g_lambda_gm1",
        }
    }

    /// Degree the psi and kappa classes must have on `M_{g,n}`.
    pub fn target_degree(self, genus: u32, points: usize) -> i64 {
        let (g, n) = (genus as i64, points as i64);
        match self {
            HodgePairing::LambdaG => 2 * g - 3 + n,
            HodgePairing::LambdaGLambdaGm1 => g - 2 + n,
        }
    }

    /// Psi exponent of the one-point base value.
    pub fn base_exponent(self, genus: u32) -> u32 {
        match self {
            HodgePairing::LambdaG => 2 * genus - 2,
            HodgePairing::LambdaGLambdaGm1 => genus - 1,
        }
    }

    fn gamma_kind(self) -> ConstantKind {
        match self {
            HodgePairing::LambdaG => ConstantKind::GammaFact,
            HodgePairing::LambdaGLambdaGm1 => ConstantKind::GammaOdd,
        }
    }

    /// Coefficient of the merged term `<tau_{d_0+d+l-1} ...>`.
    fn merge_coefficient(self, d: u32, d0: u32, l: u32) -> Rational {
        let (d, d0, l) = (d as i64, d0 as i64, l as i64);
        match self {
            HodgePairing::LambdaG => fact((d + d0 + l) as u64) / (fact(d0 as u64) * fact(d as u64)),
            HodgePairing::LambdaGLambdaGm1 => {
                dfact(2 * d + 2 * d0 + 2 * l - 1) / (dfact(2 * d - 1) * dfact(2 * d0 - 1))
            }
        }
    }

    /// Coefficient of the transfer term `<tau_{d_0} tau_{d_j+d+l-1} ...>`;
    /// requires `d_j >= 1`.
    fn transfer_coefficient(self, d: u32, dj: u32, l: u32) -> Rational {
        let (d, dj, l) = (d as i64, dj as i64, l as i64);
        match self {
            HodgePairing::LambdaG => fact((dj + d + l - 1) as u64) / (fact((dj - 1) as u64) * fact(d as u64)),
            HodgePairing::LambdaGLambdaGm1 => {
                dfact(2 * d + 2 * dj + 2 * l - 3) / (dfact(2 * d - 1) * dfact(2 * dj - 3))
            }
        }
    }
}

impl fmt::Display for HodgePairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HodgePairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HodgePairing::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown pairing {s:?} (expected lambda_g or lambda_g_lambda_gm1)")))
    }
}

/// Source of the one-point values `<tau_{g-1} | lambda_g lambda_{g-1}>_g`
/// and `<tau_{2g-2} | lambda_g>_g`.
pub trait BaseValueProvider: Send + Sync {
    fn base_value(&self, genus: u32, pairing: HodgePairing) -> Option<Rational>;

    /// Distinguishes providers with different values in memo keys.
    fn fingerprint(&self) -> String;
}

impl<P: BaseValueProvider + ?Sized> BaseValueProvider for &P {
    fn base_value(&self, genus: u32, pairing: HodgePairing) -> Option<Rational> {
        (**self).base_value(genus, pairing)
    }

    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
}

impl<P: BaseValueProvider + ?Sized> BaseValueProvider for Box<P> {
    fn base_value(&self, genus: u32, pairing: HodgePairing) -> Option<Rational> {
        (**self).base_value(genus, pairing)
    }

    fn fingerprint(&self) -> String {
        (**self).fingerprint()
    }
}

/// Closed-form one-point values in terms of Bernoulli numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClosedFormProvider;

impl BaseValueProvider for ClosedFormProvider {
    fn base_value(&self, genus: u32, pairing: HodgePairing) -> Option<Rational> {
        if genus == 0 {
            return None;
        }
        let b = bernoulli(2 * genus).ok()?.abs();
        let pow = int(num_traits::pow(Integer::from(2), 2 * genus as usize - 1));
        Some(match pairing {
            HodgePairing::LambdaGLambdaGm1 => {
                b / (pow * dfact(2 * genus as i64 - 1) * int(2 * genus as i64))
            }
            HodgePairing::LambdaG => (&pow - Rational::one()) * b / (pow * fact(2 * genus as u64)),
        })
    }

    fn fingerprint(&self) -> String {
        "closed-form".into()
    }
}

/// Explicit table of one-point values, e.g. loaded from a file of
/// `g,tag,num/den` lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableProvider {
    values: BTreeMap<(u32, HodgePairing), Rational>,
}

impl TableProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, genus: u32, pairing: HodgePairing, value: Rational) {
        self.values.insert((genus, pairing), value);
    }

    /// Copies `source` for genera `1..=max_genus`, multiplying each value
    /// by `scale`.
    pub fn scaled_copy(source: &dyn BaseValueProvider, max_genus: u32, scale: &Rational) -> Self {
        let mut table = Self::new();
        for g in 1..=max_genus {
            for p in HodgePairing::ALL {
                if let Some(v) = source.base_value(g, p) {
                    table.insert(g, p, v * scale);
                }
            }
        }
        table
    }

    /// Parses `g,tag,num/den` lines; blank lines and lines starting with
    /// `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [g, tag, value] = fields.as_slice() else {
                return Err(Error::Parse(format!("line {}: expected g,tag,num/den", no + 1)));
            };
            let genus = g
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad genus {g:?}", no + 1)))?;
            let pairing = tag.parse()?;
            let value = parse_rational(value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            table.insert(genus, pairing, value);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|((g, p), v)| format!("{g},{p},{}\n", format_rational(v)))
            .collect()
    }
}

impl BaseValueProvider for TableProvider {
    fn base_value(&self, genus: u32, pairing: HodgePairing) -> Option<Rational> {
        self.values.get(&(genus, pairing)).cloned()
    }

    fn fingerprint(&self) -> String {
        format!("table:{}", self.to_text())
    }
}

type HodgeKey = (u64, HodgePairing, CorrelatorKey);

/// Evaluates `<kappa(b) prod tau_{d_j} | lambda>_g` for both pairings.
#[derive(Debug)]
pub struct HodgeEngine<P = ClosedFormProvider> {
    provider: P,
    fingerprint: u64,
    reduced: Memo<HodgeKey, Rational>,
    direct: Memo<HodgeKey, Rational>,
}

impl Default for HodgeEngine<ClosedFormProvider> {
    fn default() -> Self {
        Self::new(ClosedFormProvider)
    }
}

impl<P: BaseValueProvider> HodgeEngine<P> {
    pub fn new(provider: P) -> Self {
        let mut h = DefaultHasher::new();
        provider.fingerprint().hash(&mut h);
        Self {
            provider,
            fingerprint: h.finish(),
            reduced: Memo::default(),
            direct: Memo::default(),
        }
    }

    pub fn provider(&self) -> &P {
        &self.provider
    }

    fn key(&self, genus: u32, pairing: HodgePairing, kappa: &MultiIndex, psi: &[u32]) -> HodgeKey {
        (self.fingerprint, pairing, CorrelatorKey::new(genus, kappa.clone(), psi.to_vec()))
    }

    fn gate(genus: u32, pairing: HodgePairing, kappa: &MultiIndex, psi: &[u32]) -> Result<bool> {
        if genus == 0 {
            return Err(Error::Domain("lambda pairings need genus >= 1".into()));
        }
        let degree = kappa.weight() as i64 + psi.iter().map(|&d| d as i64).sum::<i64>();
        Ok(is_stable(genus, psi.len()) && degree == pairing.target_degree(genus, psi.len()))
    }

    fn base(&self, genus: u32, pairing: HodgePairing) -> Result<Rational> {
        self.provider
            .base_value(genus, pairing)
            .ok_or(Error::BaseValueUnavailable { genus, pairing })
    }

    /// Kappa classes expanded into psi classes, then the psi-only merge.
    pub fn hodge_correlator(
        &self,
        genus: u32,
        pairing: HodgePairing,
        kappa: &MultiIndex,
        psi: &[u32],
    ) -> Result<Rational> {
        if !Self::gate(genus, pairing, kappa, psi)? {
            return Ok(Rational::zero());
        }
        let length = kappa.length();
        let mut total = Rational::zero();
        for parts in crate::kmz::unordered_partitions(kappa) {
            let refs: Vec<&MultiIndex> = parts.iter().collect();
            let coeff = crate::multi_index::multi_multinomial(kappa, &refs)?;
            let mut repeat = Integer::one();
            let mut run = 1u32;
            for w in parts.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                    repeat *= run;
                } else {
                    run = 1;
                }
            }
            let mut p = psi.to_vec();
            p.extend(parts.iter().map(|m| m.weight() + 1));
            let value = self.psi_only(genus, pairing, &p)?;
            total += sign(length - parts.len() as u32) * Rational::new(coeff, repeat) * value;
        }
        Ok(total)
    }

    /// `<prod tau_{d_j} | lambda>_g` by string removal and the two-point merge.
    pub fn psi_only(&self, genus: u32, pairing: HodgePairing, psi: &[u32]) -> Result<Rational> {
        let zero = MultiIndex::zero();
        if !Self::gate(genus, pairing, &zero, psi)? {
            return Ok(Rational::zero());
        }
        let key = self.key(genus, pairing, &zero, psi);
        if let Some(v) = self.reduced.get(&key) {
            return Ok(v);
        }
        let psi = key.2.psi.clone();
        let value = match psi.len() {
            // only <lambda_2 lambda_1>_2 survives: dilaton from <tau_1 | ..>_2
            0 => self.psi_only(genus, pairing, &[1])? / int(2 * genus as i64 - 2),
            1 => self.base(genus, pairing)?,
            _ if psi.contains(&0) => {
                let mut rest = psi.clone();
                rest.pop();
                let mut sum = Rational::zero();
                for j in 0..rest.len() {
                    if rest[j] > 0 {
                        let mut p = rest.clone();
                        p[j] -= 1;
                        sum += self.psi_only(genus, pairing, &p)?;
                    }
                }
                sum
            }
            _ => self.merge_psi_only(genus, pairing, psi[0], psi[1], &psi[2..])?,
        };
        Ok(self.reduced.insert(key, value))
    }

    fn merge_psi_only(
        &self,
        genus: u32,
        pairing: HodgePairing,
        d: u32,
        d0: u32,
        rest: &[u32],
    ) -> Result<Rational> {
        let mut total = Rational::zero();
        if d + d0 >= 1 {
            let mut p = rest.to_vec();
            p.push(d0 + d - 1);
            total += pairing.merge_coefficient(d, d0, 0) * self.psi_only(genus, pairing, &p)?;
        }
        for j in 0..rest.len() {
            let mut p = rest.to_vec();
            p[j] = rest[j] + d - 1;
            p.push(d0);
            total += pairing.transfer_coefficient(d, rest[j], 0) * self.psi_only(genus, pairing, &p)?;
        }
        Ok(total)
    }

    /// Both sides of the two-point merge identity for psi classes only,
    /// with `tau_d` and `tau_{d_0}` merged. The remaining exponents must be
    /// at least 1.
    pub fn verify_psi_merge(
        &self,
        genus: u32,
        pairing: HodgePairing,
        d: u32,
        d0: u32,
        rest: &[u32],
    ) -> Result<IdentityCheck> {
        if rest.contains(&0) {
            return Err(Error::Domain("remaining exponents must be at least 1".into()));
        }
        let mut all = vec![d, d0];
        all.extend_from_slice(rest);
        let lhs = self.psi_only(genus, pairing, &all)?;
        let mut rhs = Rational::zero();
        if d + d0 >= 1 {
            let mut p = vec![d0 + d - 1];
            p.extend_from_slice(rest);
            rhs += pairing.merge_coefficient(d, d0, 0) * self.psi_only(genus, pairing, &p)?;
        }
        for j in 0..rest.len() {
            let mut p = rest.to_vec();
            p[j] = rest[j] + d - 1;
            p.push(d0);
            rhs += pairing.transfer_coefficient(d, rest[j], 0) * self.psi_only(genus, pairing, &p)?;
        }
        Ok(IdentityCheck { lhs, rhs })
    }

    /// The kappa-carrying recursion:
    ///
    /// ```text
    /// <tau_d tau_{d_0} prod tau_{d_j} kappa(b) | lambda>_g
    ///   = sum_{L+L'=b} gamma_L C(b,L) c(d,d_0,|L|) <tau_{d_0+d+|L|-1} prod tau_{d_j} kappa(L')>_g
    ///   + sum_{L+L'=b} sum_j gamma_L C(b,L) c'(d,d_j,|L|) <tau_{d_0} tau_{d_j+d+|L|-1} ... kappa(L')>_g
    /// ```
    ///
    /// with string and dilaton equations closing the cases the merge does
    /// not cover.
    pub fn hodge_direct(
        &self,
        genus: u32,
        pairing: HodgePairing,
        kappa: &MultiIndex,
        psi: &[u32],
    ) -> Result<Rational> {
        if !Self::gate(genus, pairing, kappa, psi)? {
            return Ok(Rational::zero());
        }
        let key = self.key(genus, pairing, kappa, psi);
        if let Some(v) = self.direct.get(&key) {
            return Ok(v);
        }
        let psi = key.2.psi.clone();
        let b = kappa;
        let value = if psi.len() == 1 && b.is_zero() {
            self.base(genus, pairing)?
        } else if psi.is_empty() {
            // dilaton: sum (-1)^{||L||} C(b,L) <tau_{|L|+1} kappa(L')>_g = (2g-2) <kappa(b)>_g
            let mut sum = Rational::zero();
            for (l, lp) in b.splits2() {
                let c = sign(l.length()) * int(multi_binomial(b, &l)?);
                sum += c * self.hodge_direct(genus, pairing, &lp, &[l.weight() + 1])?;
            }
            sum / int(2 * genus as i64 - 2)
        } else if *psi.last().expect("nonempty") == 0 {
            // string: <tau_0 ... kappa(b)> = sum_j <tau_{d_j-1} ... kappa(b)>
            //   - sum_{L!=0} (-1)^{||L||} C(b,L) <tau_{|L|} ... kappa(L')>
            let rest = &psi[..psi.len() - 1];
            let mut sum = Rational::zero();
            for j in 0..rest.len() {
                if rest[j] > 0 {
                    let mut p = rest.to_vec();
                    p[j] -= 1;
                    sum += self.hodge_direct(genus, pairing, b, &p)?;
                }
            }
            for (l, lp) in b.splits2() {
                if l.is_zero() {
                    continue;
                }
                let mut p = rest.to_vec();
                p.push(l.weight());
                let c = sign(l.length()) * int(multi_binomial(b, &l)?);
                sum -= c * self.hodge_direct(genus, pairing, &lp, &p)?;
            }
            sum
        } else if psi.len() == 1 {
            // X = <tau_x kappa(b)>: the dilaton equation on M_{g,1}, with
            // <tau_1 tau_x kappa(b)> expanded by the merge, is linear in X.
            let x = psi[0];
            let mut rhs = self.merge_terms(genus, pairing, b, 1, x, &[], true)?;
            for (l, lp) in b.splits2() {
                if l.is_zero() {
                    continue;
                }
                let c = sign(l.length()) * int(multi_binomial(b, &l)?);
                rhs += c * self.hodge_direct(genus, pairing, &lp, &[l.weight() + 1, x])?;
            }
            let own = pairing.merge_coefficient(1, x, 0);
            rhs / (int(2 * genus as i64 - 1) - own)
        } else {
            self.merge_terms(genus, pairing, b, psi[0], psi[1], &psi[2..], false)?
        };
        Ok(self.direct.insert(key, value))
    }

    #[allow(clippy::too_many_arguments)]
    fn merge_terms(
        &self,
        genus: u32,
        pairing: HodgePairing,
        b: &MultiIndex,
        d: u32,
        d0: u32,
        rest: &[u32],
        skip_trivial_split: bool,
    ) -> Result<Rational> {
        let gamma = shared(pairing.gamma_kind());
        let mut total = Rational::zero();
        for (l, lp) in b.splits2() {
            if skip_trivial_split && l.is_zero() {
                continue;
            }
            let lw = l.weight();
            let c = gamma.get(&l) * int(multi_binomial(b, &l)?);
            if d + d0 + lw >= 1 {
                let mut p = rest.to_vec();
                p.push(d0 + d + lw - 1);
                total += &c * pairing.merge_coefficient(d, d0, lw) * self.hodge_direct(genus, pairing, &lp, &p)?;
            }
            for j in 0..rest.len() {
                let mut p = rest.to_vec();
                p[j] = rest[j] + d + lw - 1;
                p.push(d0);
                total += &c
                    * pairing.transfer_coefficient(d, rest[j], lw)
                    * self.hodge_direct(genus, pairing, &lp, &p)?;
            }
        }
        Ok(total)
    }

    pub fn clear_memo(&self) {
        self.reduced.clear();
        self.direct.clear();
    }
}
