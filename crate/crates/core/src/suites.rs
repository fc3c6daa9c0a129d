//! Named identity sweeps shared by the command line and the test suites.

use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{bernoulli, dfact, euler_number, int, ratio, sign, Integer, Rational};
use crate::cache::{CacheEntry, CacheFile};
use crate::constants::{gamma_kdv, shared, ConstantKind};
use crate::correlator::{initial_value, CorrelatorEngine, CorrelatorKey};
use crate::error::{Error, Result};
use crate::hodge::{ClosedFormProvider, HodgeEngine, HodgePairing, TableProvider};
use crate::kmz::KmzOracle;
use crate::multi_index::MultiIndex;
use crate::series::shift_check;
use crate::volumes::{verify_first_kdv, verify_tau1_insertion, VolumeEngine};
use crate::{is_stable, moduli_dimension};

/// A correlator signature `(g, b, d)` with `d` sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub genus: u32,
    pub kappa: MultiIndex,
    pub psi: Vec<u32>,
}

impl Signature {
    pub fn points(&self) -> usize {
        self.psi.len()
    }

    pub fn key(&self) -> CorrelatorKey {
        CorrelatorKey::new(self.genus, self.kappa.clone(), self.psi.clone())
    }

    /// One of the three initial values of the mixed recursion.
    pub fn is_initial(&self) -> bool {
        initial_value(&self.key()).is_some()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g={} kappa=[{}] psi=[{}]", self.genus, self.kappa, crate::correlator::format_psi(&self.psi))
    }
}

/// Multisets of `n` exponents summing to `total`, each sorted descending.
pub fn psi_multisets(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, total: u32, cap: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if total == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for d in (0..=cap.min(total)).rev() {
            if (d as u64) * (n as u64) < total as u64 {
                break;
            }
            acc.push(d);
            rec(n - 1, total - d, d, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, total, &mut Vec::new(), &mut out);
    out
}

/// All `(b, d)` with `n` insertions and `|b| + sum d = degree`.
pub fn signatures_with_degree(genus: u32, points: usize, degree: u32) -> Vec<Signature> {
    let mut out = Vec::new();
    for w in 0..=degree {
        for kappa in MultiIndex::of_weight(w, w) {
            for psi in psi_multisets(points, degree - w) {
                out.push(Signature {
                    genus,
                    kappa: kappa.clone(),
                    psi,
                });
            }
        }
    }
    out
}

/// Stable in-dimension signatures with `3g-3+n <= max_dim` and at least
/// `min_points` insertions, ordered by dimension.
pub fn sweep(max_dim: u32, min_points: usize) -> Vec<Signature> {
    shifted_sweep(max_dim, min_points, 0)
}

/// Signatures on `M_{g,n}` of degree `3g-3+n+excess` with `3g-3+n+excess <= max_dim`.
fn shifted_sweep(max_dim: u32, min_points: usize, excess: i64) -> Vec<Signature> {
    let mut out = Vec::new();
    for dim in 0..=max_dim as i64 {
        let degree = dim;
        let mut g = 0u32;
        while 3 * g as i64 - 3 <= dim - excess {
            let n = dim - excess - (3 * g as i64 - 3);
            if n >= min_points as i64 && is_stable(g, n as usize) {
                out.extend(signatures_with_degree(g, n as usize, degree as u32));
            }
            g += 1;
        }
    }
    out
}

/// Result of running a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_counterexample: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn from_outcomes(name: &str, outcomes: Vec<Option<String>>) -> Self {
        let failures: Vec<String> = outcomes.iter().flatten().cloned().collect();
        Self {
            name: name.to_string(),
            cases: outcomes.len(),
            failures: failures.len(),
            first_counterexample: failures.into_iter().next(),
        }
    }

    /// Combines several reports into one under `name`.
    pub fn merge(name: &str, parts: Vec<SuiteReport>) -> Self {
        Self {
            name: name.to_string(),
            cases: parts.iter().map(|p| p.cases).sum(),
            failures: parts.iter().map(|p| p.failures).sum(),
            first_counterexample: parts.into_iter().find_map(|p| p.first_counterexample),
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "{}: PASS ({} cases)", self.name, self.cases)
        } else {
            write!(f, "{}: FAIL ({} of {} cases)", self.name, self.failures, self.cases)?;
            if let Some(c) = &self.first_counterexample {
                write!(f, "; first counterexample: {c}")?;
            }
            Ok(())
        }
    }
}

fn check(ok: bool, describe: impl FnOnce() -> String) -> Option<String> {
    (!ok).then(describe)
}

/// Mixed recursion against the kappa-to-psi expansion, plus positivity, on
/// every signature with at least one insertion.
pub fn oracle(engine: &CorrelatorEngine, kmz: &KmzOracle, max_dim: u32) -> SuiteReport {
    let cases = sweep(max_dim, 1);
    let outcomes = cases
        .par_iter()
        .map(|s| {
            let a = engine.correlator(s.genus, &s.kappa, &s.psi);
            let b = kmz.kmz_expand(s.genus, &s.kappa, &s.psi);
            check(a == b && a > Rational::zero(), || format!("{s}: recursion {a}, expansion {b}"))
        })
        .collect();
    SuiteReport::from_outcomes("oracle", outcomes)
}

/// Stops at the first signature where the engine and the expansion differ;
/// returns it if any.
pub fn first_oracle_mismatch(engine: &CorrelatorEngine, kmz: &KmzOracle, max_dim: u32) -> Option<Signature> {
    sweep(max_dim, 1)
        .into_iter()
        .find(|s| engine.correlator(s.genus, &s.kappa, &s.psi) != kmz.kmz_expand(s.genus, &s.kappa, &s.psi))
}

/// The kappa-subtracted recursion, on non-initial signatures.
pub fn kappa_subtracted(engine: &CorrelatorEngine, max_dim: u32) -> SuiteReport {
    let cases: Vec<Signature> = sweep(max_dim, 1).into_iter().filter(|s| !s.is_initial()).collect();
    let outcomes = cases
        .par_iter()
        .map(|s| match engine.verify_kappa_subtracted(s.genus, &s.kappa, &s.psi) {
            Ok(c) => check(c.holds(), || format!("{s}: {c}")),
            Err(e) => Some(format!("{s}: {e}")),
        })
        .collect();
    SuiteReport::from_outcomes("kappa-subtracted", outcomes)
}

/// Every choice of removed insertion gives the same value.
pub fn pivot(engine: &CorrelatorEngine, max_dim: u32) -> SuiteReport {
    let cases: Vec<Signature> = sweep(max_dim, 1).into_iter().filter(|s| !s.is_initial()).collect();
    let outcomes = cases
        .par_iter()
        .map(|s| {
            let reference = engine.correlator(s.genus, &s.kappa, &s.psi);
            for pos in 0..s.points() {
                if pos > 0 && s.psi[pos] == s.psi[pos - 1] {
                    continue;
                }
                match engine.evaluate_with_pivot(s.genus, &s.kappa, &s.psi, pos) {
                    Ok(v) if v == reference => {}
                    Ok(v) => return Some(format!("{s}: pivot {pos} gives {v}, expected {reference}")),
                    Err(e) => return Some(format!("{s}: {e}")),
                }
            }
            None
        })
        .collect();
    SuiteReport::from_outcomes("pivot", outcomes)
}

/// String equation with kappa classes: the added point lives on
/// `M_{g,n+1}`, which has dimension at most `max_dim`.
pub fn string(engine: &CorrelatorEngine, max_dim: u32) -> SuiteReport {
    let cases = shifted_sweep(max_dim, 0, 1);
    let outcomes = cases
        .par_iter()
        .map(|s| {
            let c = engine.verify_string(s.genus, &s.kappa, &s.psi);
            check(c.holds(), || format!("{s}: {c}"))
        })
        .collect();
    SuiteReport::from_outcomes("string", outcomes)
}

/// Dilaton equation with kappa classes, same range as [`string`].
pub fn dilaton(engine: &CorrelatorEngine, max_dim: u32) -> SuiteReport {
    let cases: Vec<Signature> = sweep(max_dim.saturating_sub(1), 0);
    let outcomes = cases
        .par_iter()
        .map(|s| {
            let c = engine.verify_dilaton(s.genus, &s.kappa, &s.psi);
            check(c.holds(), || format!("{s}: {c}"))
        })
        .collect();
    SuiteReport::from_outcomes("dilaton", outcomes)
}

/// The two KdV-type identities with `tau_0 tau_1` and `tau_1 tau_r`
/// insertions, for left-hand sides on `M_{g,n+2}` of dimension at most
/// `max_dim`.
pub fn kdv(engine: &CorrelatorEngine, max_dim: u32) -> SuiteReport {
    // (g, n) such that M_{g,n+2} is stable with dimension in 1..=max_dim
    let mut spaces = Vec::new();
    let mut g = 0u32;
    while 3 * g as i64 - 1 <= max_dim as i64 {
        let mut n = 0usize;
        while moduli_dimension(g, n + 2) <= max_dim as i64 {
            let dim = moduli_dimension(g, n + 2);
            if is_stable(g, n + 2) && dim >= 1 {
                spaces.push((g, n, dim as u32));
            }
            n += 1;
        }
        g += 1;
    }

    let mut first = Vec::new();
    let mut second = Vec::new();
    for &(g, n, dim) in &spaces {
        first.extend(signatures_with_degree(g, n, dim - 1));
        for r in 0..dim {
            for s in signatures_with_degree(g, n, dim - 1 - r) {
                second.push((s, r));
            }
        }
    }
    let first_outcomes = first
        .par_iter()
        .map(|s| {
            let c = verify_first_kdv(engine, s.genus, &s.kappa, &s.psi);
            check(c.holds(), || format!("tau_0 tau_1 at {s}: {c}"))
        })
        .collect();
    let second_outcomes = second
        .par_iter()
        .map(|(s, r)| {
            let c = verify_tau1_insertion(engine, s.genus, &s.kappa, &s.psi, *r);
            check(c.holds(), || format!("tau_1 tau_{r} at {s}: {c}"))
        })
        .collect();
    SuiteReport::merge(
        "kdv",
        vec![
            SuiteReport::from_outcomes("kdv", first_outcomes),
            SuiteReport::from_outcomes("kdv", second_outcomes),
        ],
    )
}

/// Volume recursions against the mixed recursion: every open volume with
/// `3g-3+n <= max_dim`, the unrolled formula on the same range, closed
/// volumes of genus 2 and 3, and the recursion depth bound on all of them.
pub fn volumes(engine: &CorrelatorEngine, volumes: &VolumeEngine, max_dim: u32) -> SuiteReport {
    let mut open = Vec::new();
    for s in sweep(max_dim, 1) {
        if s.psi.iter().all(|&d| d == 0) {
            open.push(s);
        }
    }
    let open_outcomes: Vec<Option<String>> = open
        .par_iter()
        .map(|s| {
            let n = s.points() as u32;
            let a = match volumes.volume(s.genus, n, &s.kappa) {
                Ok(v) => v,
                Err(e) => return Some(format!("{s}: {e}")),
            };
            let b = engine.correlator(s.genus, &s.kappa, &s.psi);
            if a != b {
                return Some(format!("V at {s}: volume {a}, mixed {b}"));
            }
            match volumes.volume_expanded_check(s.genus, n, &s.kappa) {
                Ok(c) => check(c.holds(), || format!("unrolled V at {s}: {c}")),
                Err(e) => Some(format!("{s}: {e}")),
            }
        })
        .collect();

    let mut closed = Vec::new();
    for g in [2u32, 3] {
        for b in MultiIndex::of_weight(3 * g - 3, 3 * g - 3) {
            closed.push(Signature {
                genus: g,
                kappa: b,
                psi: vec![],
            });
        }
    }
    let closed_outcomes: Vec<Option<String>> = closed
        .par_iter()
        .map(|s| {
            let a = match volumes.volume_closed(s.genus, &s.kappa) {
                Ok(v) => v,
                Err(e) => return Some(format!("{s}: {e}")),
            };
            let b = engine.correlator(s.genus, &s.kappa, &[]);
            check(a == b, || format!("closed V at {s}: volume {a}, mixed {b}"))
        })
        .collect();

    // fresh engines, so every level of the recursion is actually visited
    let depth_outcomes = open
        .par_iter()
        .chain(closed.par_iter())
        .map(|s| {
            let n = s.points() as u32;
            let fresh = VolumeEngine::new();
            let _ = fresh.volume(s.genus, n, &s.kappa);
            let bound = VolumeEngine::depth_bound(s.genus, n, &s.kappa);
            check(fresh.max_depth() <= bound, || {
                format!("depth at {s}: {} exceeds bound {bound}", fresh.max_depth())
            })
        })
        .collect();

    let spots = [
        (0, 3, MultiIndex::zero(), Rational::one()),
        (0, 4, MultiIndex::delta(1).expect("valid"), Rational::one()),
        (0, 5, MultiIndex::delta(2).expect("valid"), Rational::one()),
        (0, 8, MultiIndex::delta(5).expect("valid"), Rational::one()),
        (1, 1, MultiIndex::delta(1).expect("valid"), ratio(1, 24)),
    ];
    let spot_outcomes = spots
        .iter()
        .map(|(g, n, b, expected)| {
            let got = volumes.volume(*g, *n, b).unwrap_or_else(|_| Rational::zero());
            check(&got == expected, || format!("V_{{{g},{n}}}({b}) = {got}, expected {expected}"))
        })
        .collect();

    SuiteReport::merge(
        "volumes",
        vec![
            SuiteReport::from_outcomes("volumes", open_outcomes),
            SuiteReport::from_outcomes("volumes", closed_outcomes),
            SuiteReport::from_outcomes("volumes", depth_outcomes),
            SuiteReport::from_outcomes("volumes", spot_outcomes),
        ],
    )
}

/// Generating-function shift identity at the given truncation.
pub fn shift(engine: &CorrelatorEngine, kmz: &KmzOracle, cutoff: u32, s_vars: usize, t_max: usize) -> SuiteReport {
    let (cases, outcome) = match shift_check(engine, kmz, cutoff, s_vars, t_max) {
        Ok(r) => (r.compared, check(r.holds, || r.to_string())),
        Err(e) => (1, Some(e.to_string())),
    };
    SuiteReport {
        name: "shift".into(),
        cases,
        failures: usize::from(outcome.is_some()),
        first_counterexample: outcome,
    }
}

/// Signatures for lambda pairings with `1 <= g <= max_genus`, `n <= max_points`
/// and `||b|| <= max_length`, in dimension for `pairing`.
pub fn hodge_signatures(pairing: HodgePairing, max_genus: u32, max_points: usize, max_length: u32) -> Vec<Signature> {
    let mut out = Vec::new();
    for g in 1..=max_genus {
        for n in 0..=max_points {
            if !is_stable(g, n) {
                continue;
            }
            let degree = pairing.target_degree(g, n);
            if degree < 0 {
                continue;
            }
            out.extend(
                signatures_with_degree(g, n, degree as u32)
                    .into_iter()
                    .filter(|s| s.kappa.length() <= max_length),
            );
        }
    }
    out
}

/// Kappa-carrying lambda recursion against expand-then-merge, and
/// linearity in the one-point values under the rescaling `scale`.
pub fn hodge(max_genus: u32, max_points: usize, max_length: u32, scale: &Rational) -> SuiteReport {
    let engine = HodgeEngine::default();
    let scaled = HodgeEngine::new(TableProvider::scaled_copy(&ClosedFormProvider, max_genus.max(1), scale));
    let mut cases = Vec::new();
    for pairing in HodgePairing::ALL {
        for s in hodge_signatures(pairing, max_genus, max_points, max_length) {
            cases.push((pairing, s));
        }
    }
    let outcomes = cases
        .par_iter()
        .map(|(pairing, s)| {
            let run = || -> Result<Option<String>> {
                let a = engine.hodge_correlator(s.genus, *pairing, &s.kappa, &s.psi)?;
                let b = engine.hodge_direct(s.genus, *pairing, &s.kappa, &s.psi)?;
                if a != b {
                    return Ok(Some(format!("{pairing} at {s}: expanded {a}, direct {b}")));
                }
                let c = scaled.hodge_direct(s.genus, *pairing, &s.kappa, &s.psi)?;
                let d = scaled.hodge_correlator(s.genus, *pairing, &s.kappa, &s.psi)?;
                let expected = &a * scale;
                Ok(check(c == expected && d == expected, || {
                    format!("{pairing} at {s}: rescaled values {c}, {d}, expected {expected}")
                }))
            };
            run().unwrap_or_else(|e| Some(format!("{pairing} at {s}: {e}")))
        })
        .collect();
    SuiteReport::from_outcomes("hodge", outcomes)
}

/// Constant tables: closed forms for `alpha`, Euler and Bessel values for
/// the two `gamma` families, and the convolution inverse of `alpha`.
pub fn constants(max_alpha: u32, max_duality_weight: u32) -> SuiteReport {
    let alpha = shared(ConstantKind::Alpha);
    let mut outcomes = Vec::new();
    for l in 1..=max_alpha {
        let delta = MultiIndex::delta(l).expect("l >= 1");
        let got = alpha.get(&delta);
        let expected = Rational::one() / dfact(2 * l as i64 + 1);
        outcomes.push(check(got == expected, || format!("alpha(delta_{l}) = {got}, expected {expected}")));
        let pure = MultiIndex::from_pairs([(1, l)]).expect("valid");
        let got = alpha.get(&pure);
        let expected = sign(l + 1)
            * (int(num_traits::pow(Integer::from(2), 2 * l as usize)) - int(2))
            * bernoulli(2 * l).expect("even")
            / dfact(2 * l as i64 - 1);
        outcomes.push(check(got == expected, || format!("alpha(1:{l}) = {got}, expected {expected}")));
    }
    let odd = shared(ConstantKind::GammaOdd);
    for (l, euler) in [1i64, 1, 5, 61, 1385, 50521].into_iter().enumerate() {
        let got = odd.get(&MultiIndex::from_pairs([(1, l as u32)]).expect("valid")) * dfact(2 * l as i64 - 1);
        outcomes.push(check(got == int(euler) && int(euler_number(l as u32)) == got, || {
            format!("gamma_odd(1:{l}) (2l-1)!! = {got}, expected {euler}")
        }));
    }
    let fact_table = shared(ConstantKind::GammaFact);
    for (k, (num, den)) in [(1, 1), (1, 1), (3, 2), (19, 6), (211, 24), (1217, 40)].into_iter().enumerate() {
        let got = fact_table.get(&MultiIndex::from_pairs([(1, k as u32)]).expect("valid"));
        outcomes.push(check(got == ratio(num, den), || format!("gamma_fact(1:{k}) = {got}, expected {num}/{den}")));
    }
    for w in 0..=max_duality_weight {
        for b in MultiIndex::of_weight(w, w) {
            let mut sum = Rational::zero();
            for (l, lp) in b.splits2() {
                sum += alpha.get(&l) / int(l.factorial()) * gamma_kdv(&lp);
            }
            let expected = if b.is_zero() { Rational::one() } else { Rational::zero() };
            outcomes.push(check(sum == expected, || format!("alpha duality at {b}: {sum}")));
        }
    }
    SuiteReport::from_outcomes("constants", outcomes)
}

/// Recomputes every cache record with fresh engines. Lambda records are
/// checked against the default one-point values.
pub fn cache_self_check(cache: &CacheFile) -> SuiteReport {
    let engine = CorrelatorEngine::new();
    let volumes = VolumeEngine::new();
    let hodge = HodgeEngine::default();
    let records: Vec<(&String, &Rational)> = cache.records().collect();
    let outcomes = records
        .par_iter()
        .map(|(key, stored)| {
            let recomputed: Result<Rational> = key.parse::<CacheEntry>().and_then(|entry| match entry {
                CacheEntry::Correlator(k) => Ok(engine.evaluate(&k)),
                CacheEntry::Volume { genus, points, kappa } => volumes.volume(genus, points, &kappa),
                CacheEntry::Hodge { pairing, key } => {
                    hodge.hodge_direct(key.genus, pairing, &key.kappa, &key.psi)
                }
            });
            match recomputed {
                Ok(v) => check(&v == *stored, || format!("{key}: stored {stored}, recomputed {v}")),
                Err(e) => Some(format!("{key}: {e}")),
            }
        })
        .collect();
    SuiteReport::from_outcomes("cache", outcomes)
}

/// Suite names understood by [`run_named`].
pub const SUITE_NAMES: [&str; 10] = [
    "oracle",
    "kappa-subtracted",
    "pivot",
    "string",
    "dilaton",
    "kdv",
    "volumes",
    "shift",
    "hodge",
    "constants",
];

/// Bounds for [`run_named`].
#[derive(Clone, Debug)]
pub struct SuiteBounds {
    pub max_dim: u32,
    pub cutoff: u32,
    pub s_vars: usize,
    pub t_max: usize,
    pub max_genus: u32,
    pub scale: Rational,
}

impl Default for SuiteBounds {
    fn default() -> Self {
        Self {
            max_dim: 6,
            cutoff: 4,
            s_vars: 3,
            t_max: 5,
            max_genus: 3,
            scale: ratio(7, 3),
        }
    }
}

/// Runs a suite by name with fresh engines. `cache` is only for the
/// `cache` suite.
pub fn run_named(name: &str, bounds: &SuiteBounds, cache: Option<&CacheFile>) -> Result<SuiteReport> {
    let engine = CorrelatorEngine::new();
    let kmz = KmzOracle::new();
    Ok(match name {
        "oracle" => oracle(&engine, &kmz, bounds.max_dim),
        "kappa-subtracted" => kappa_subtracted(&engine, bounds.max_dim),
        "pivot" => pivot(&engine, bounds.max_dim),
        "string" => string(&engine, bounds.max_dim),
        "dilaton" => dilaton(&engine, bounds.max_dim),
        "kdv" => kdv(&engine, bounds.max_dim),
        "volumes" => volumes(&engine, &VolumeEngine::new(), bounds.max_dim),
        "shift" => shift(&engine, &kmz, bounds.cutoff, bounds.s_vars, bounds.t_max),
        "hodge" => hodge(bounds.max_genus, 3, 2, &bounds.scale),
        "constants" => constants(15, 10),
        "cache" => match cache {
            Some(c) => cache_self_check(c),
            None => return Err(Error::Domain("the cache suite needs a cache file".into())),
        },
        other => {
            return Err(Error::Domain(format!(
                "unknown suite {other:?}; expected one of {}, cache",
                SUITE_NAMES.join(", ")
            )))
        }
    })
}
