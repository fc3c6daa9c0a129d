//! Exact intersection numbers of mixed psi and kappa classes on the moduli
//! spaces of stable curves `M_{g,n}`.
//!
//! The crate evaluates
//!
//! ```text
//! <kappa(b) tau_{d_1} ... tau_{d_n}>_g = integral over M_{g,n} of kappa(b) psi_1^{d_1} ... psi_n^{d_n}
//! ```
//!
//! exactly, through several independent routes that are checked against
//! each other:
//!
//! * [`correlator::CorrelatorEngine`]: the alpha-weighted recursion that
//!   removes one psi insertion at a time, with kappa classes carried along.
//! * [`kmz::KmzOracle`]: kappa monomials expanded into pure psi numbers,
//!   which are then evaluated by the DVV recursion.
//! * [`volumes::VolumeEngine`]: psi-free recursions for higher
//!   Weil-Petersson volumes `V_{g,n}(kappa(b))`.
//! * [`hodge::HodgeEngine`]: pairings against `lambda_g` and
//!   `lambda_g lambda_{g-1}`.
//! * [`series`]: the generating function identity relating the kappa/psi
//!   potential to the pure psi potential with shifted times.
//!
//! All arithmetic is exact ([`Rational`]); there is no floating point in the
//! library.

pub mod arith;
pub mod cache;
pub mod constants;
pub mod correlator;
pub mod error;
pub mod hodge;
pub mod kmz;
pub mod memo;
pub mod multi_index;
pub mod series;
pub mod suites;
pub mod volumes;

pub use arith::{Integer, Rational};
pub use correlator::{CorrelatorEngine, CorrelatorKey};
pub use error::{Error, Result};
pub use hodge::{BaseValueProvider, ClosedFormProvider, HodgeEngine, HodgePairing, TableProvider};
pub use kmz::KmzOracle;
pub use multi_index::MultiIndex;
pub use volumes::VolumeEngine;

/// Both sides of an identity, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

impl std::fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rel = if self.holds() { "==" } else { "!=" };
        write!(f, "{} {rel} {}", self.lhs, self.rhs)
    }
}

/// `2g - 2 + n > 0`.
pub fn is_stable(genus: u32, points: usize) -> bool {
    2 * genus as i64 - 2 + points as i64 > 0
}

/// `3g - 3 + n`, the complex dimension of `M_{g,n}`.
pub fn moduli_dimension(genus: u32, points: usize) -> i64 {
    3 * genus as i64 - 3 + points as i64
}
