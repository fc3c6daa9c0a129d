//! Exact integer and rational arithmetic plus the special sequences the
//! recursions consume: factorials, double factorials, binomials, Bernoulli
//! and Euler (secant) numbers.
//!
//! Sequences are held in process-wide tables that only ever grow. Readers
//! share a read lock; extension takes the write lock and fills every missing
//! slot up to the requested index.

use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always normalized to lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Arbitrary-precision integer.
pub type Integer = BigInt;

/// A sequence table that grows on demand.
struct GrowingTable<T> {
    values: RwLock<Vec<T>>,
}

impl<T: Clone> GrowingTable<T> {
    fn new(seed: Vec<T>) -> Self {
        Self {
            values: RwLock::new(seed),
        }
    }

    /// Returns entry `idx`, extending the table with `next(prefix)` until it
    /// is long enough.
    fn get_or_extend(&self, idx: usize, next: impl Fn(&[T]) -> T) -> T {
        {
            let values = self.values.read().expect("sequence table poisoned");
            if let Some(v) = values.get(idx) {
                return v.clone();
            }
        }
        let mut values = self.values.write().expect("sequence table poisoned");
        while values.len() <= idx {
            let v = next(&values);
            values.push(v);
        }
        values[idx].clone()
    }
}

static FACTORIALS: LazyLock<GrowingTable<Integer>> =
    LazyLock::new(|| GrowingTable::new(vec![Integer::one()]));

// Index k holds k!! for k >= 0.
static DOUBLE_FACTORIALS: LazyLock<GrowingTable<Integer>> =
    LazyLock::new(|| GrowingTable::new(vec![Integer::one(), Integer::one()]));

static BERNOULLI: LazyLock<GrowingTable<Rational>> =
    LazyLock::new(|| GrowingTable::new(vec![Rational::one()]));

static EULER: LazyLock<GrowingTable<Integer>> =
    LazyLock::new(|| GrowingTable::new(vec![Integer::one()]));

/// `k!`.
pub fn factorial(k: u64) -> Integer {
    FACTORIALS.get_or_extend(k as usize, |prev| {
        prev.last().expect("seeded") * Integer::from(prev.len())
    })
}

/// `k!! = k (k-2) (k-4) ...`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> Result<Integer> {
    match k {
        k if k < -1 => Err(Error::Domain(format!("double factorial of {k} is undefined"))),
        -1 => Ok(Integer::one()),
        k => Ok(DOUBLE_FACTORIALS.get_or_extend(k as usize, |prev| {
            &prev[prev.len() - 2] * Integer::from(prev.len())
        })),
    }
}

/// Double factorial as a rational; shorthand for the recursions, where the
/// argument is known to be at least `-1`.
pub(crate) fn dfact(k: i64) -> Rational {
    Rational::from_integer(double_factorial(k).expect("double factorial argument below -1"))
}

pub(crate) fn fact(k: u64) -> Rational {
    Rational::from_integer(factorial(k))
}

/// `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `n! / (k_1! ... k_r!)`. The parts must sum to `n`.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<Integer> {
    let total: u64 = parts.iter().sum();
    if total != n {
        return Err(Error::Domain(format!(
            "multinomial parts sum to {total}, expected {n}"
        )));
    }
    Ok(parts
        .iter()
        .fold(factorial(n), |acc, &k| acc / factorial(k)))
}

/// The Bernoulli number `B_m`, with `B_1 = -1/2` and `B_2 = 1/6`.
///
/// Odd indices above one vanish and are rejected since nothing downstream
/// asks for them.
pub fn bernoulli(m: u32) -> Result<Rational> {
    if m > 1 && m % 2 == 1 {
        return Err(Error::Domain(format!("odd Bernoulli index {m} requested")));
    }
    Ok(bernoulli_any(m))
}

fn bernoulli_any(m: u32) -> Rational {
    // sum_{j=0}^{m} C(m+1, j) B_j = 0 for m >= 1
    BERNOULLI.get_or_extend(m as usize, |prev| {
        let m = prev.len() as u64;
        let sum = prev
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (j, b)| {
                acc + Rational::from_integer(binomial(m + 1, j as u64)) * b
            });
        -sum / Rational::from_integer(Integer::from(m + 1))
    })
}

/// The secant number `E_k`: `sec x = sum_k E_k x^{2k} / (2k)!`.
pub fn euler_number(k: u32) -> Integer {
    // sec x * cos x = 1 gives sum_{j=0}^{n} (-1)^j C(2n, 2j) E_{n-j} = 0
    EULER.get_or_extend(k as usize, |prev| {
        let n = prev.len() as u64;
        (1..=n).fold(Integer::zero(), |acc, j| {
            let term = binomial(2 * n, 2 * j) * &prev[(n - j) as usize];
            if j % 2 == 1 {
                acc + term
            } else {
                acc - term
            }
        })
    })
}

/// `(-1)^k` as a rational.
pub(crate) fn sign(k: u32) -> Rational {
    if k.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

pub(crate) fn int(v: impl Into<Integer>) -> Rational {
    Rational::from_integer(v.into())
}

pub(crate) fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(Integer::from(num), Integer::from(den))
}

/// Parses `"p/q"` or `"p"` into a normalized rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: Integer = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {text:?}")))?;
    let den: Integer = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {text:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `num/den` text; integers print without a denominator.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Non-authoritative decimal rendering truncated toward zero after `digits`
/// fractional digits.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(Integer::from(10), digits);
    let scaled = (value.numer().abs() * &scale).div_floor(value.denom());
    let (int_part, frac_part) = scaled.div_mod_floor(&scale);
    let sign = if value.is_negative() && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part:0>digits$}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1).unwrap(), Integer::one());
        assert_eq!(double_factorial(0).unwrap(), Integer::one());
        assert_eq!(double_factorial(7).unwrap(), Integer::from(105));
        assert_eq!(double_factorial(8).unwrap(), Integer::from(384));
        assert!(matches!(double_factorial(-2), Err(Error::Domain(_))));
    }

    #[test]
    fn factorial_binomial_multinomial() {
        assert_eq!(factorial(0), Integer::one());
        assert_eq!(factorial(10), Integer::from(3_628_800));
        assert_eq!(binomial(5, 2), Integer::from(10));
        assert_eq!(binomial(2, 5), Integer::zero());
        assert_eq!(multinomial(4, &[2, 1, 1]).unwrap(), Integer::from(12));
        assert!(multinomial(4, &[2, 1]).is_err());
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0).unwrap(), Rational::one());
        assert_eq!(bernoulli(1).unwrap(), ratio(-1, 2));
        assert_eq!(bernoulli(2).unwrap(), ratio(1, 6));
        assert_eq!(bernoulli(4).unwrap(), ratio(-1, 30));
        assert_eq!(bernoulli(12).unwrap(), ratio(-691, 2730));
        assert!(bernoulli(3).is_err());
    }

    #[test]
    fn bernoulli_defining_recurrence() {
        for m in 1..30u64 {
            let s = (0..=m).fold(Rational::zero(), |acc, j| {
                acc + int(binomial(m + 1, j)) * bernoulli_any(j as u32)
            });
            assert!(s.is_zero(), "recurrence fails at m = {m}");
        }
    }

    #[test]
    fn euler_values() {
        let expected = [1, 1, 5, 61, 1385, 50521, 2702765];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(euler_number(k as u32), Integer::from(*e));
        }
    }

    #[test]
    fn euler_reproduces_secant_series() {
        // (sum_k E_k x^{2k}/(2k)!) * cos x == 1 + O(x^{2K+2})
        const K: u64 = 12;
        for n in 0..=K {
            let coeff = (0..=n).fold(Rational::zero(), |acc, j| {
                let e = Rational::new(euler_number(j as u32), factorial(2 * j));
                let c = sign((n - j) as u32) / fact(2 * (n - j));
                acc + e * c
            });
            let expected = if n == 0 { Rational::one() } else { Rational::zero() };
            assert_eq!(coeff, expected, "x^{} coefficient", 2 * n);
        }
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), ratio(-7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(1, 24)), "1/24");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 24), 5), "0.04166");
        assert_eq!(to_decimal(&ratio(-7, 2), 2), "-3.50");
        assert_eq!(to_decimal(&ratio(5, 1), 0), "5");
    }

    proptest! {
        #[test]
        fn double_factorial_product_is_factorial(k in 0i64..60) {
            let lhs = double_factorial(2 * k + 1).unwrap() * double_factorial(2 * k).unwrap();
            prop_assert_eq!(lhs, factorial(2 * k as u64 + 1));
        }

        #[test]
        fn rational_display_parses_back(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
