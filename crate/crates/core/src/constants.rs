//! Recursively defined constant families indexed by multi-indices.
//!
//! Each family `x` is the unique solution with `x_0 = 1` of the triangular
//! convolution
//!
//! ```text
//! sum_{L + L' = b} (-1)^{||L||} x_L / (L! L'! w(|L'|)) = 0,    b != 0
//! ```
//!
//! for a weight function `w`:
//!
//! | family       | `w(k)`      | used by                              |
//! |--------------|-------------|--------------------------------------|
//! | `alpha`      | `(2k+1)!!`  | the mixed psi/kappa correlator recursion |
//! | `gamma_odd`  | `(2k-1)!!`  | the `lambda_g lambda_{g-1}` pairing  |
//! | `gamma_fact` | `k!`        | the `lambda_g` pairing               |

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use num_traits::{One, Zero};

use crate::arith::{bernoulli, dfact, fact, int, sign, Integer, Rational};
use crate::error::{Error, Result};
use crate::memo::Memo;
use crate::multi_index::MultiIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantKind {
    Alpha,
    GammaOdd,
    GammaFact,
}

impl ConstantKind {
    pub const ALL: [ConstantKind; 3] = [Self::Alpha, Self::GammaOdd, Self::GammaFact];

    fn denominator(self, w: u32) -> Rational {
        match self {
            Self::Alpha => dfact(2 * w as i64 + 1),
            Self::GammaOdd => dfact(2 * w as i64 - 1),
            Self::GammaFact => fact(w as u64),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::GammaOdd => "gamma_odd",
            Self::GammaFact => "gamma_fact",
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown constant family {s:?}")))
    }
}

/// Memoized solution of one constant family.
#[derive(Debug)]
pub struct ConstantTable {
    kind: ConstantKind,
    values: Memo<MultiIndex, Rational>,
}

impl ConstantTable {
    pub fn new(kind: ConstantKind) -> Self {
        Self {
            kind,
            values: Memo::default(),
        }
    }

    /// A table with one entry pinned to `value` instead of its solved value.
    /// Entries above it are solved from the pinned value. Used for fault
    /// injection in the negative-control tests.
    pub fn with_override(kind: ConstantKind, index: MultiIndex, value: Rational) -> Self {
        let table = Self::new(kind);
        table.values.insert(index, value);
        table
    }

    pub fn kind(&self) -> ConstantKind {
        self.kind
    }

    pub fn get(&self, b: &MultiIndex) -> Rational {
        if let Some(v) = self.values.get(b) {
            return v;
        }
        if b.is_zero() {
            return self.values.insert(MultiIndex::zero(), Rational::one());
        }
        let mut sum = Rational::zero();
        for (l, lp) in b.splits2() {
            if lp.is_zero() {
                continue;
            }
            let denom = int(l.factorial() * lp.factorial()) * self.kind.denominator(lp.weight());
            sum += sign(lp.length() - 1) * self.get(&l) / denom;
        }
        self.values.insert(b.clone(), sum * int(b.factorial()))
    }

    /// Every entry with `|b| <= max_weight`, in weight then index order.
    pub fn up_to_weight(&self, max_weight: u32) -> Vec<(MultiIndex, Rational)> {
        (0..=max_weight)
            .flat_map(|w| MultiIndex::of_weight(w, w))
            .map(|b| {
                let v = self.get(&b);
                (b, v)
            })
            .collect()
    }
}

static ALPHA: LazyLock<ConstantTable> = LazyLock::new(|| ConstantTable::new(ConstantKind::Alpha));
static GAMMA_ODD: LazyLock<ConstantTable> =
    LazyLock::new(|| ConstantTable::new(ConstantKind::GammaOdd));
static GAMMA_FACT: LazyLock<ConstantTable> =
    LazyLock::new(|| ConstantTable::new(ConstantKind::GammaFact));

/// The process-wide table of a family.
pub fn shared(kind: ConstantKind) -> &'static ConstantTable {
    match kind {
        ConstantKind::Alpha => &ALPHA,
        ConstantKind::GammaOdd => &GAMMA_ODD,
        ConstantKind::GammaFact => &GAMMA_FACT,
    }
}

pub fn alpha(b: &MultiIndex) -> Rational {
    ALPHA.get(b)
}

pub fn gamma_odd(b: &MultiIndex) -> Rational {
    GAMMA_ODD.get(b)
}

pub fn gamma_fact(b: &MultiIndex) -> Rational {
    GAMMA_FACT.get(b)
}

/// `beta_l = (-1)^{l-1} 2^l (2^{2l} - 2) B_{2l} / (2l)!`, so `alpha_l = l! beta_l`.
pub fn beta(l: u32) -> Rational {
    let pow2 = |e: u32| int(num_traits::pow(Integer::from(2), e as usize));
    let b = bernoulli(2 * l).expect("even index");
    sign(l + 1) * pow2(l) * (pow2(2 * l) - int(2)) * b / fact(2 * l as u64)
}

/// `(-1)^{||L||} / (L! (2|L|+1)!!)`, the convolution inverse of `alpha_L / L!`.
pub fn gamma_kdv(b: &MultiIndex) -> Rational {
    sign(b.length()) / (int(b.factorial()) * dfact(2 * b.weight() as i64 + 1))
}

/// The shift polynomial `p_k = sum_{|L| = k-1} (-1)^{||L||-1} / L! s^L`,
/// restricted to `s_1 .. s_{s_bound}`. Returned as `(exponent, coefficient)`
/// monomials.
pub fn p_shift(k: u32, s_bound: u32) -> Result<Vec<(MultiIndex, Rational)>> {
    if k < 2 {
        return Err(Error::Domain(format!("shift polynomial p_{k} needs k >= 2")));
    }
    Ok(MultiIndex::of_weight(k - 1, s_bound)
        .into_iter()
        .map(|l| {
            let c = sign(l.length() - 1) / int(l.factorial());
            (l, c)
        })
        .collect())
}
