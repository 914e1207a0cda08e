//! One-variable truncated power series over `Q`, the ψ-series of a
//! multiplicative class, and closed-form coefficient formulas used as
//! independent oracles.
//!
//! A multiplicative class is given by its characteristic series
//! `φ(x) ∈ 1 + xQ[[x]]`. Two ψ-series are attached to it:
//!
//! ```text
//! tangent:      ψ'(x / (φ(x)φ(−x))) = φ(x)φ(−x)
//! tautological: ψ'(x / φ(−x))       = φ(−x)
//! ```
//!
//! Both are solved by reverting the argument and integrating termwise. The
//! coefficients returned are those of ψ itself, with no extra `1/k`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::combinatorics::{binomial, factorial, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesOpError {
    #[error("series is not invertible: {0}")]
    NotInvertible(&'static str),
    #[error("unknown multiplicative class `{0}`")]
    UnknownClass(String),
    #[error("bad oracle arguments: {0}")]
    BadArgs(String),
}

/// `Σ_{k < order} c_k x^k + O(x^order)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries1 {
    coeffs: Vec<BigRational>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl PowerSeries1 {
    /// Pads or truncates `coeffs` to `order` terms.
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order, BigRational::zero());
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64], order: usize) -> Self {
        Self::new(coeffs.iter().map(|&c| q(c)).collect(), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The variable `x`.
    pub fn var(order: usize) -> Self {
        Self::from_ints(&[0, 1], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn truncated(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().take(order).cloned().collect(), order)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// `f(−x)`.
    pub fn negate_arg(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let d = (1..n).map(|k| &self.coeffs[k] * q(k as i64)).collect();
        Self::new(d, n.saturating_sub(1))
    }

    /// Antiderivative with zero constant term; gains one order.
    pub fn integrate(&self) -> Self {
        let mut c = vec![BigRational::zero()];
        c.extend(self.coeffs.iter().enumerate().map(|(k, a)| a / q(k as i64 + 1)));
        let n = c.len();
        Self::new(c, n)
    }

    /// `x^s · f`, keeping the order.
    pub fn shift(&self, s: usize) -> Self {
        let mut c = vec![BigRational::zero(); s];
        c.extend(self.coeffs.iter().cloned());
        Self::new(c, self.order())
    }

    /// `f / x^s`; the first `s` coefficients must vanish.
    pub fn unshift(&self, s: usize) -> Result<Self, SeriesOpError> {
        if self.coeffs.iter().take(s).any(|c| !c.is_zero()) {
            return Err(SeriesOpError::NotInvertible("division by x with nonzero constant term"));
        }
        let n = self.order().saturating_sub(s);
        Ok(Self::new(self.coeffs.iter().skip(s).cloned().collect(), n))
    }

    /// Multiplicative inverse; needs `f(0) ≠ 0`.
    pub fn inv(&self) -> Result<Self, SeriesOpError> {
        let n = self.order();
        let a0 = self.coeff(0);
        if a0.is_zero() {
            return Err(SeriesOpError::NotInvertible("zero constant term"));
        }
        let mut b: Vec<BigRational> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                b.push(a0.recip());
                continue;
            }
            let mut s = BigRational::zero();
            for j in 1..=k {
                s += &self.coeffs[j] * &b[k - j];
            }
            b.push(-s / &a0);
        }
        Ok(Self { coeffs: b })
    }

    /// `f(g(x))`; needs `g(0) = 0`.
    pub fn compose(&self, g: &PowerSeries1) -> Result<Self, SeriesOpError> {
        if !g.coeff(0).is_zero() {
            return Err(SeriesOpError::NotInvertible("inner series has a constant term"));
        }
        let n = self.order().min(g.order());
        let g = g.truncated(n);
        let mut out = Self::zero(n);
        for c in self.coeffs.iter().take(n).rev() {
            out = &(&out * &g) + &Self::constant(c.clone(), n);
        }
        Ok(out)
    }

    /// Compositional inverse: `g` with `f(g(t)) = t`. Needs `f(0) = 0`, `f'(0) ≠ 0`.
    pub fn reverse(&self) -> Result<Self, SeriesOpError> {
        let n = self.order();
        if !self.coeff(0).is_zero() {
            return Err(SeriesOpError::NotInvertible("constant term must vanish"));
        }
        let f1 = self.coeff(1);
        if f1.is_zero() {
            return Err(SeriesOpError::NotInvertible("linear term must not vanish"));
        }
        let mut g = Self::new(vec![BigRational::zero(), f1.recip()], n);
        for k in 2..n {
            let r = self.compose(&g)?;
            let adj = r.coeff(k) / &f1;
            g.coeffs[k] -= adj;
        }
        Ok(g)
    }

    /// `exp f`; needs `f(0) = 0`.
    pub fn exp(&self) -> Result<Self, SeriesOpError> {
        if !self.coeff(0).is_zero() {
            return Err(SeriesOpError::NotInvertible("exp of a series with constant term"));
        }
        let n = self.order();
        let df = self.derivative();
        let mut e = vec![BigRational::one()];
        for k in 1..n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                s += df.coeff(j - 1) * &e[k - j];
            }
            e.push(s / q(k as i64));
        }
        Ok(Self::new(e, n))
    }

    /// `log f`; needs `f(0) = 1`.
    pub fn log(&self) -> Result<Self, SeriesOpError> {
        if !self.coeff(0).is_one() {
            return Err(SeriesOpError::NotInvertible("log of a series with constant term ≠ 1"));
        }
        let n = self.order();
        let quotient = &self.derivative() * &self.inv()?.truncated(n.saturating_sub(1));
        Ok(quotient.integrate().truncated(n))
    }

    /// `f^p` for rational `p`; needs `f(0) = 1`.
    pub fn pow(&self, p: &BigRational) -> Result<Self, SeriesOpError> {
        self.log()?.scale(p).exp()
    }

    pub fn sqrt(&self) -> Result<Self, SeriesOpError> {
        self.pow(&frac(1, 2))
    }
}

impl Add for &PowerSeries1 {
    type Output = PowerSeries1;
    fn add(self, rhs: &PowerSeries1) -> PowerSeries1 {
        let n = self.order().min(rhs.order());
        PowerSeries1::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect(), n)
    }
}

impl Sub for &PowerSeries1 {
    type Output = PowerSeries1;
    fn sub(self, rhs: &PowerSeries1) -> PowerSeries1 {
        self + &(-rhs)
    }
}

impl Neg for &PowerSeries1 {
    type Output = PowerSeries1;
    fn neg(self) -> PowerSeries1 {
        PowerSeries1 { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &PowerSeries1 {
    type Output = PowerSeries1;
    fn mul(self, rhs: &PowerSeries1) -> PowerSeries1 {
        let n = self.order().min(rhs.order());
        let mut c = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        PowerSeries1 { coeffs: c }
    }
}

impl fmt::Display for PowerSeries1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let a = crate::fmt_rational(&c.abs());
            match k {
                0 => write!(f, "{a}")?,
                1 if c.abs().is_one() => f.write_str("x")?,
                1 => write!(f, "{a} x")?,
                _ if c.abs().is_one() => write!(f, "x^{k}")?,
                _ => write!(f, "{a} x^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(x^{})", self.order())
    }
}

/// Solves `ψ'(x / (φ(x)φ(−x))) = φ(x)φ(−x)` and returns `[ψ_1, ..., ψ_kmax]`.
pub fn psi_tangent(phi: &PowerSeries1, kmax: usize) -> Result<Vec<BigRational>, SeriesOpError> {
    let n = kmax + 1;
    check_unit(phi)?;
    let phi = phi.truncated(n);
    let h = &phi * &phi.negate_arg();
    solve_psi(&h, kmax)
}

/// Solves `ψ'(x / φ(−x)) = φ(−x)` and returns `[ψ_1, ..., ψ_kmax]`.
pub fn psi_taut(phi: &PowerSeries1, kmax: usize) -> Result<Vec<BigRational>, SeriesOpError> {
    let n = kmax + 1;
    check_unit(phi)?;
    let h = phi.truncated(n).negate_arg();
    solve_psi(&h, kmax)
}

fn check_unit(phi: &PowerSeries1) -> Result<(), SeriesOpError> {
    if phi.coeff(0).is_one() {
        Ok(())
    } else {
        Err(SeriesOpError::NotInvertible("φ(0) must be 1"))
    }
}

/// `ψ'(x / h(x)) = h(x)`.
fn solve_psi(h: &PowerSeries1, kmax: usize) -> Result<Vec<BigRational>, SeriesOpError> {
    let n = kmax + 1;
    let u = PowerSeries1::var(n).truncated(n);
    let u = &u * &h.truncated(n).inv()?;
    let x_of_u = u.reverse()?;
    let dpsi = h.truncated(kmax).compose(&x_of_u.truncated(kmax))?;
    let psi = dpsi.integrate();
    Ok((1..=kmax).map(|k| psi.coeff(k)).collect())
}

/// A multiplicative characteristic class, given by its series `φ`.
pub trait MultiplicativeClass: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// `φ(x)` to `order` terms.
    fn series(&self, order: usize) -> Result<PowerSeries1, SeriesOpError>;
}

/// Total Chern class, `1 + x`.
#[derive(Debug, Clone, Copy)]
pub struct Chern;

/// Total Segre class, `1 / (1 + x)`.
#[derive(Debug, Clone, Copy)]
pub struct Segre;

/// Square root of the Todd class, `sqrt(x / (1 − e^{−x}))`.
#[derive(Debug, Clone, Copy)]
pub struct SqrtTodd;

/// Total Chern class of `r` copies of a line bundle, `(1 + x)^r`.
#[derive(Debug, Clone)]
pub struct ChernPower {
    rank: u32,
    name: String,
}

impl ChernPower {
    pub fn new(rank: u32) -> Self {
        Self { rank, name: format!("chern-rank-{rank}") }
    }
}

impl MultiplicativeClass for Chern {
    fn name(&self) -> &str {
        "chern"
    }

    fn series(&self, order: usize) -> Result<PowerSeries1, SeriesOpError> {
        Ok(PowerSeries1::from_ints(&[1, 1], order))
    }
}

impl MultiplicativeClass for Segre {
    fn name(&self) -> &str {
        "segre"
    }

    fn series(&self, order: usize) -> Result<PowerSeries1, SeriesOpError> {
        PowerSeries1::from_ints(&[1, 1], order).inv()
    }
}

impl MultiplicativeClass for SqrtTodd {
    fn name(&self) -> &str {
        "sqrt-todd"
    }

    fn series(&self, order: usize) -> Result<PowerSeries1, SeriesOpError> {
        // (1 − e^{−x}) / x = Σ (−1)^k x^k / (k+1)!
        let c = (0..order)
            .map(|k| {
                let s = if k % 2 == 0 { 1 } else { -1 };
                BigRational::new(BigInt::from(s), factorial(k as u64 + 1))
            })
            .collect();
        PowerSeries1::new(c, order).inv()?.sqrt()
    }
}

impl MultiplicativeClass for ChernPower {
    fn name(&self) -> &str {
        &self.name
    }

    fn series(&self, order: usize) -> Result<PowerSeries1, SeriesOpError> {
        let c = (0..order)
            .map(|k| BigRational::from_integer(binomial(self.rank as u64, k as u64)))
            .collect();
        Ok(PowerSeries1::new(c, order))
    }
}

/// Name-keyed table of multiplicative classes.
#[derive(Debug, Clone, Default)]
pub struct ClassRegistry {
    entries: BTreeMap<String, Arc<dyn MultiplicativeClass>>,
}

impl ClassRegistry {
    /// `chern`, `segre`, `sqrt-todd` and `chern-rank-r` for `r` in 2..=5.
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(Chern));
        r.register(Arc::new(Segre));
        r.register(Arc::new(SqrtTodd));
        for rank in 2..=5 {
            r.register(Arc::new(ChernPower::new(rank)));
        }
        r
    }

    pub fn register(&mut self, class: Arc<dyn MultiplicativeClass>) -> Option<Arc<dyn MultiplicativeClass>> {
        self.entries.insert(class.name().to_string(), class)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn MultiplicativeClass>, SeriesOpError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| SeriesOpError::UnknownClass(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

/// Closed-form coefficient formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    /// `(−1)^{|λ|−1} / (λ! |λ|!)`.
    LqwAlpha(Partition),
    /// `(−1)^{|λ|} / (λ! |λ|!) · (|λ| + ‖λ‖ − 2) / 24`.
    LqwBeta(Partition),
    /// `(−1)^{k−1} / k² · binom(rk, k−1)`, the `((k), 1)` Chern coefficient of a trivial rank-`r` bundle.
    TrivialChern { rank: u32, k: u32 },
    /// `(−1)^k (r−1) / (k+1) · binom(rk, k)`, the observed `((k,1), 1)` pattern. Unproved.
    ConjectureK1 { rank: u32, k: u32 },
}

impl Oracle {
    pub fn name(&self) -> &'static str {
        match self {
            Oracle::LqwAlpha(_) => "lqw_alpha",
            Oracle::LqwBeta(_) => "lqw_beta",
            Oracle::TrivialChern { .. } => "trivial_chern",
            Oracle::ConjectureK1 { .. } => "conjecture_k1",
        }
    }

    pub fn is_conjecture(&self) -> bool {
        matches!(self, Oracle::ConjectureK1 { .. })
    }

    pub fn value(&self) -> Result<BigRational, SeriesOpError> {
        match self {
            Oracle::LqwAlpha(l) | Oracle::LqwBeta(l) => {
                if l.is_empty() {
                    return Err(SeriesOpError::BadArgs("empty partition".into()));
                }
                let w = l.weight();
                let base = BigRational::new(sign(w + 1), l.multfact() * factorial(w));
                if let Oracle::LqwBeta(_) = self {
                    let t = frac((w + l.norm2()) as i64 - 2, 24);
                    Ok(-base * t)
                } else {
                    Ok(base)
                }
            }
            Oracle::TrivialChern { rank, k } => {
                if *k == 0 {
                    return Err(SeriesOpError::BadArgs("k must be positive".into()));
                }
                let k = *k as u64;
                let b = binomial(*rank as u64 * k, k - 1);
                Ok(BigRational::new(sign(k + 1) * b, BigInt::from(k * k)))
            }
            Oracle::ConjectureK1 { rank, k } => {
                if *k < 2 || *rank == 0 {
                    return Err(SeriesOpError::BadArgs("needs k ≥ 2 and r ≥ 1".into()));
                }
                let k = *k as u64;
                let b = binomial(*rank as u64 * k, k) * BigInt::from(*rank - 1);
                Ok(BigRational::new(sign(k) * b, BigInt::from(k + 1)))
            }
        }
    }
}

fn sign(e: u64) -> BigInt {
    if e.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        crate::parse_rational(s).unwrap()
    }

    fn rs(v: &[&str]) -> Vec<BigRational> {
        v.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn reverse_examples() {
        let t = PowerSeries1::var(8);
        assert_eq!(t.reverse().unwrap(), t);

        let f = PowerSeries1::from_ints(&[0, 1, 0, -1], 8);
        let g = f.reverse().unwrap();
        assert_eq!(g.coeffs()[..6], rs(&["0", "1", "0", "1", "0", "3"])[..]);
        assert_eq!(f.compose(&g).unwrap(), t);

        // x/(1−x) reverts to u/(1+u)
        let f = &t * &PowerSeries1::from_ints(&[1, -1], 8).inv().unwrap();
        let g = f.reverse().unwrap();
        let expect = &t * &PowerSeries1::from_ints(&[1, 1], 8).inv().unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn reverse_rejects_degenerate_input() {
        assert!(PowerSeries1::from_ints(&[1, 1], 4).reverse().is_err());
        assert!(PowerSeries1::from_ints(&[0, 0, 1], 4).reverse().is_err());
        assert!(PowerSeries1::zero(4).inv().is_err());
    }

    #[test]
    fn exp_log_sqrt() {
        let x = PowerSeries1::var(10);
        let e = x.exp().unwrap();
        for k in 0..10 {
            assert_eq!(e.coeff(k), BigRational::new(BigInt::one(), factorial(k as u64)));
        }
        assert_eq!(e.log().unwrap(), x);
        let s = PowerSeries1::from_ints(&[1, 2, 1], 10).sqrt().unwrap();
        assert_eq!(s, PowerSeries1::from_ints(&[1, 1], 10));
    }

    #[test]
    fn psi_examples() {
        let chern = Chern.series(8).unwrap();
        assert_eq!(psi_tangent(&chern, 7).unwrap(), rs(&["1", "0", "-1/3", "0", "2/5", "0", "-5/7"]));
        assert_eq!(psi_taut(&chern, 4).unwrap(), rs(&["1", "-1/2", "1/3", "-1/4"]));
        let segre = Segre.series(8).unwrap();
        assert_eq!(psi_tangent(&segre, 5).unwrap(), rs(&["1", "0", "1/3", "0", "3/5"]));
        let rank2 = ChernPower::new(2).series(8).unwrap();
        assert_eq!(psi_taut(&rank2, 6).unwrap(), rs(&["1", "-1", "5/3", "-7/2", "42/5", "-22"]));
        let rank3 = ChernPower::new(3).series(8).unwrap();
        assert_eq!(psi_taut(&rank3, 3).unwrap()[2], r("4"));
        let bad = PowerSeries1::from_ints(&[2, 1], 4);
        assert!(psi_tangent(&bad, 3).is_err());
    }

    #[test]
    fn oracle_examples() {
        let p = |v: &[u32]| Partition::new(v.iter().copied());
        assert_eq!(Oracle::LqwAlpha(p(&[2, 1])).value().unwrap(), r("1/6"));
        assert_eq!(Oracle::LqwBeta(p(&[1])).value().unwrap(), r("0"));
        assert_eq!(Oracle::TrivialChern { rank: 2, k: 3 }.value().unwrap(), r("5/3"));
        assert!(Oracle::ConjectureK1 { rank: 2, k: 2 }.is_conjecture());
        assert!(Oracle::LqwAlpha(Partition::empty()).value().is_err());
    }

    #[test]
    fn registry_names() {
        let reg = ClassRegistry::with_defaults();
        assert_eq!(
            reg.names(),
            vec!["chern", "chern-rank-2", "chern-rank-3", "chern-rank-4", "chern-rank-5", "segre", "sqrt-todd"]
        );
        assert!(reg.get("todd").is_err());
    }

    #[test]
    fn display() {
        assert_eq!(PowerSeries1::from_ints(&[1, -1, 0, 2], 4).to_string(), "1 - x + 2 x^3 + O(x^4)");
    }
}
