//! Exact normal forms for Nakajima vertex-operator expressions on Hilbert
//! schemes of points of a surface, and the universal partition-indexed
//! coefficients read off from them.
//!
//! The pipeline is
//! [`recursions`] (states in the Fock space) → [`series`] (log, unit division,
//! linear extraction) → [`series::CoefficientTable`], with [`closed_forms`]
//! providing the one-variable power series the tables are checked against.

pub mod closed_forms;
pub mod combinatorics;
pub mod fock;
pub mod recursions;
pub mod series;
pub mod surface;

use num::{BigInt, BigRational, Signed, Zero};

/// `p/q` with `q > 0`, or just `p` when `q = 1`.
pub fn fmt_rational(x: &BigRational) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Inverse of [`fmt_rational`]; also accepts a leading `+` and surrounding spaces.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim().trim_start_matches('+');
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if d.is_zero() {
        return None;
    }
    let r = BigRational::new(n, d);
    debug_assert!(!r.denom().is_negative());
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for s in ["0", "1", "-1/2", "2693/120", "-907/15"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(fmt_rational(&r), s);
        }
        assert_eq!(fmt_rational(&parse_rational("4/-6").unwrap()), "-2/3");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
