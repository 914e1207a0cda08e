//! Integer partitions and the statistics used to index universal coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One};
use smallvec::SmallVec;
use thiserror::Error;

/// An integer partition, parts stored in descending order.
///
/// The derived ordering compares the descending part lists lexicographically,
/// so within a fixed weight `(1,1) < (2)` and `(2,1,1) < (2,2) < (3,1) < (4)`.
/// Use [`Partition::table_cmp`] to order across weights.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition {
    parts: SmallVec<[u32; 6]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionStats {
    pub length: usize,
    pub weight: u64,
    pub norm2: u64,
    pub multfact: BigInt,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionParseError {
    #[error("partition must be written as a bracket list like [3,1,1], got {0:?}")]
    Syntax(String),
    #[error("partition parts must be positive integers, got {0:?}")]
    BadPart(String),
}

impl Partition {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the canonical form of an arbitrary multiset of positive parts.
    ///
    /// Panics if a part is zero.
    pub fn new<I: IntoIterator<Item = u32>>(parts: I) -> Self {
        let mut parts: SmallVec<[u32; 6]> = parts.into_iter().collect();
        assert!(parts.iter().all(|&p| p >= 1), "partition parts must be positive");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn single(part: u32) -> Self {
        Self::new([part])
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn norm2(&self) -> u64 {
        self.parts.iter().map(|&p| (p as u64) * (p as u64)).sum()
    }

    /// Product of the factorials of the part multiplicities.
    pub fn multfact(&self) -> BigInt {
        let mut out = BigInt::one();
        for (_, m) in self.multiplicities() {
            out *= factorial(m as u64);
        }
        out
    }

    pub fn stats(&self) -> PartitionStats {
        PartitionStats {
            length: self.length(),
            weight: self.weight(),
            norm2: self.norm2(),
            multfact: self.multfact(),
        }
    }

    /// Distinct parts with their multiplicities, largest part first.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Multiset union.
    pub fn concat(&self, other: &Partition) -> Partition {
        let mut parts = SmallVec::with_capacity(self.parts.len() + other.parts.len());
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            if self.parts[i] >= other.parts[j] {
                parts.push(self.parts[i]);
                i += 1;
            } else {
                parts.push(other.parts[j]);
                j += 1;
            }
        }
        parts.extend_from_slice(&self.parts[i..]);
        parts.extend_from_slice(&other.parts[j..]);
        Partition { parts }
    }

    /// Removes one occurrence of the part at `index`.
    pub fn without_index(&self, index: usize) -> Partition {
        let mut parts = self.parts.clone();
        parts.remove(index);
        Partition { parts }
    }

    /// Removes one occurrence of `part`, if present.
    pub fn without_part(&self, part: u32) -> Option<Partition> {
        let idx = self.parts.iter().position(|&p| p == part)?;
        Some(self.without_index(idx))
    }

    /// Inserts one part, keeping canonical order.
    pub fn with_part(&self, part: u32) -> Partition {
        assert!(part >= 1);
        let mut parts = self.parts.clone();
        let pos = parts.iter().position(|&p| p < part).unwrap_or(parts.len());
        parts.insert(pos, part);
        Partition { parts }
    }

    /// Order used for table output: by weight, then lexicographically on the
    /// descending part list, e.g. (1),(1,1),(2),(1,1,1),(2,1),(3).
    pub fn table_cmp(&self, other: &Partition) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Partition {
    type Err = PartitionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| PartitionParseError::Syntax(s.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for tok in inner.split(',') {
            let p: u32 = tok
                .trim()
                .parse()
                .map_err(|_| PartitionParseError::BadPart(tok.to_string()))?;
            if p == 0 {
                return Err(PartitionParseError::BadPart(tok.to_string()));
            }
            parts.push(p);
        }
        Ok(Partition::new(parts))
    }
}

impl serde::Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.parts.iter())
    }
}

impl<'de> serde::Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        if parts.contains(&0) {
            return Err(serde::de::Error::custom("partition parts must be positive"));
        }
        Ok(Partition::new(parts))
    }
}

/// All partitions of `n`, in reverse-lexicographic order: (4),(3,1),(2,2),(2,1,1),(1,1,1,1).
pub fn partitions_of(n: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(n, n, &mut current, &mut out);
    out
}

fn fill(rest: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition::new(current.iter().copied()));
        return;
    }
    for p in (1..=max_part.min(rest)).rev() {
        current.push(p);
        fill(rest - p, p, current, out);
        current.pop();
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient with the usual extension `binom(n, k) = 0` for `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.iter().copied())
    }

    #[test]
    fn stats_examples() {
        let s = p(&[2, 1]).stats();
        assert_eq!((s.length, s.weight, s.norm2), (2, 3, 5));
        assert_eq!(s.multfact, BigInt::from(1));

        let s = p(&[1, 1, 2]).stats();
        assert_eq!((s.length, s.weight, s.norm2), (3, 4, 6));
        assert_eq!(s.multfact, BigInt::from(2));

        let s = Partition::empty().stats();
        assert_eq!((s.length, s.weight, s.norm2), (0, 0, 0));
        assert_eq!(s.multfact, BigInt::from(1));
    }

    #[test]
    fn concat_examples() {
        assert_eq!(p(&[2]).concat(&p(&[1])), p(&[2, 1]));
        assert_eq!(p(&[1, 1]).concat(&p(&[1])), p(&[1, 1, 1]));
        assert_eq!(p(&[3, 1]).concat(&p(&[2, 1])), p(&[3, 2, 1, 1]));
    }

    #[test]
    fn canonical_form_is_order_independent() {
        assert_eq!(p(&[1, 3, 2, 1]), p(&[3, 2, 1, 1]));
        assert_eq!(p(&[1, 3, 2, 1]).parts(), &[3, 2, 1, 1]);
    }

    #[test]
    fn partitions_of_small() {
        assert_eq!(partitions_of(0), vec![Partition::empty()]);
        assert_eq!(
            partitions_of(4),
            vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])]
        );
        assert_eq!(partitions_of(6).len(), 11);
    }

    #[test]
    fn table_order_matches_layout() {
        let mut all: Vec<Partition> = (1..=3).flat_map(partitions_of).collect();
        all.sort_by(|a, b| a.table_cmp(b));
        let shown: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["[1]", "[1,1]", "[2]", "[1,1,1]", "[2,1]", "[3]"]);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("[3,1,1]".parse::<Partition>().unwrap(), p(&[3, 1, 1]));
        assert_eq!(" [1, 3] ".parse::<Partition>().unwrap().to_string(), "[3,1]");
        assert_eq!("[]".parse::<Partition>().unwrap(), Partition::empty());
        assert!("3,1".parse::<Partition>().is_err());
        assert!("[3,0]".parse::<Partition>().is_err());
    }

    #[test]
    fn part_editing() {
        let l = p(&[3, 2, 1]);
        assert_eq!(l.without_part(2), Some(p(&[3, 1])));
        assert_eq!(l.without_part(4), None);
        assert_eq!(l.with_part(2), p(&[3, 2, 2, 1]));
        assert_eq!(l.multiplicities(), vec![(3, 1), (2, 1), (1, 1)]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(2, 3), BigInt::from(0));
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
