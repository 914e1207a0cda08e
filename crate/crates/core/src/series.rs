//! Series graded by conformal weight, their formal exp/log, division by the
//! unit series `|1⟩ = exp(q_1(1))|0⟩`, and coefficient extraction.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{factorial, Partition};
use crate::fock::{FockState, Gen, Monomial};
use crate::surface::{Mono, SurfaceProfile};
use crate::{fmt_rational, parse_rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series is not group-like: weight-0 part is not the vacuum with coefficient 1")]
    NotGroupLike,
    #[error("series has a weight-0 part, exponential is undefined")]
    NotNilpotent,
    #[error("nonlinear residual at weight {weight}: {monomial} has coefficient {coefficient}")]
    NonlinearResidual {
        weight: u64,
        monomial: String,
        coefficient: String,
    },
    #[error("bad table data: {0}")]
    Format(String),
}

/// `Σ_{n ≤ max_weight} s_n` with `s_n` of pure weight `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightSeries {
    terms: BTreeMap<u64, FockState>,
    max_weight: u64,
}

impl WeightSeries {
    pub fn zero(max_weight: u64) -> Self {
        Self {
            terms: BTreeMap::new(),
            max_weight,
        }
    }

    pub fn vacuum(max_weight: u64) -> Self {
        let mut s = Self::zero(max_weight);
        s.set(0, FockState::vacuum());
        s
    }

    /// Collects states by weight; components above `max_weight` are dropped.
    pub fn from_state(state: &FockState, max_weight: u64) -> Self {
        let mut s = Self::zero(max_weight);
        for w in state.weights() {
            if w <= max_weight {
                s.set(w, state.weight_part(w));
            }
        }
        s
    }

    pub fn max_weight(&self) -> u64 {
        self.max_weight
    }

    /// Installs the weight-`n` component.
    ///
    /// # Panics
    /// If `state` has a monomial of another weight or `n > max_weight`.
    pub fn set(&mut self, n: u64, state: FockState) {
        assert!(n <= self.max_weight, "weight {n} above truncation {}", self.max_weight);
        assert!(
            state.weights().iter().all(|&w| w == n),
            "state is not of pure weight {n}"
        );
        if state.is_zero() {
            self.terms.remove(&n);
        } else {
            self.terms.insert(n, state);
        }
    }

    pub fn get(&self, n: u64) -> FockState {
        self.terms.get(&n).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &FockState)> {
        self.terms.iter().map(|(n, s)| (*n, s))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_group_like(&self) -> bool {
        self.get(0) == FockState::vacuum()
    }

    pub fn add(&self, other: &WeightSeries) -> WeightSeries {
        let w = self.max_weight.min(other.max_weight);
        let mut out = self.truncated(w);
        for (n, s) in other.iter().filter(|(n, _)| *n <= w) {
            let sum = out.get(n).add(s);
            out.set(n, sum);
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> WeightSeries {
        let mut out = WeightSeries::zero(self.max_weight);
        for (n, s) in self.iter() {
            out.set(n, s.scale(k));
        }
        out
    }

    pub fn truncated(&self, max_weight: u64) -> WeightSeries {
        WeightSeries {
            terms: self
                .terms
                .range(..=max_weight)
                .map(|(n, s)| (*n, s.clone()))
                .collect(),
            max_weight,
        }
    }

    /// Product, truncated at the smaller of the two orders.
    pub fn mul(&self, other: &WeightSeries) -> WeightSeries {
        let w = self.max_weight.min(other.max_weight);
        let mut out = WeightSeries::zero(w);
        for (a, sa) in self.iter() {
            for (b, sb) in other.iter() {
                if a + b <= w {
                    let p = out.get(a + b).add(&sa.product(sb));
                    out.set(a + b, p);
                }
            }
        }
        out
    }

    /// Number of monomial terms over all weights.
    pub fn len(&self) -> usize {
        self.terms.values().map(FockState::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `|1⟩ = exp(q_1(1))|0⟩ = Σ q_1(1)^n/n! |0⟩`.
pub fn unit_series(max_weight: u64) -> WeightSeries {
    unit_power(max_weight, &BigRational::one())
}

/// `exp(t · q_1(1))|0⟩`.
fn unit_power(max_weight: u64, t: &BigRational) -> WeightSeries {
    let mut out = WeightSeries::zero(max_weight);
    let mut power = BigRational::one();
    for n in 0..=max_weight {
        let m = Monomial::from_gens((0..n).map(|_| Gen::nakajima(Mono::I, 1)));
        let c = &power / BigRational::from_integer(factorial(n));
        out.set(n, FockState::monomial(m, c));
        power *= t;
    }
    out
}

pub fn series_log(s: &WeightSeries) -> Result<WeightSeries, SeriesError> {
    if !s.is_group_like() {
        return Err(SeriesError::NotGroupLike);
    }
    let w = s.max_weight;
    let mut x = s.clone();
    x.set(0, FockState::zero());
    let mut out = WeightSeries::zero(w);
    let mut power = x.clone();
    for k in 1..=w {
        if power.is_zero() {
            break;
        }
        let mut c = BigRational::new(BigInt::one(), BigInt::from(k));
        if k % 2 == 0 {
            c = -c;
        }
        out = out.add(&power.scale(&c));
        power = power.mul(&x);
    }
    Ok(out)
}

pub fn series_exp(x: &WeightSeries) -> Result<WeightSeries, SeriesError> {
    if !x.get(0).is_zero() {
        return Err(SeriesError::NotNilpotent);
    }
    let w = x.max_weight;
    let mut out = WeightSeries::vacuum(w);
    let mut power = WeightSeries::vacuum(w);
    for k in 1..=w {
        power = power.mul(x);
        if power.is_zero() {
            break;
        }
        let c = BigRational::new(BigInt::one(), factorial(k));
        out = out.add(&power.scale(&c));
    }
    Ok(out)
}

/// `s · exp(−q_1(1))`, the left inverse of [`multiply_by_unit`].
pub fn divide_by_unit(s: &WeightSeries) -> WeightSeries {
    s.mul(&unit_power(s.max_weight, &-BigRational::one()))
}

pub fn multiply_by_unit(s: &WeightSeries) -> WeightSeries {
    s.mul(&unit_series(s.max_weight))
}

/// Whether the coefficients came from the series itself or from its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Linear,
    Exponential,
}

/// A table key, ordered by weight, then partition (lexicographically on the
/// descending parts), then basis monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableKey {
    pub partition: Partition,
    pub class: Mono,
}

impl Ord for TableKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.partition
            .table_cmp(&other.partition)
            .then(self.class.cmp(&other.class))
    }
}

impl PartialOrd for TableKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The universal coefficients `(λ, class) → rational` of a series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    pub series: String,
    pub kind: SeriesKind,
    pub surface: SurfaceProfile,
    pub rank: Option<u32>,
    pub max_weight: u64,
    entries: BTreeMap<TableKey, BigRational>,
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    partition: Partition,
    class: String,
    coefficient: String,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    series: String,
    surface: String,
    rank: Option<u32>,
    entries: Vec<JsonEntry>,
}

/// One disagreement between two tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryDiff {
    pub partition: Partition,
    pub class: Mono,
    pub expected: BigRational,
    pub actual: BigRational,
}

impl std::fmt::Display for EntryDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: expected {}, got {}",
            self.partition,
            self.class,
            fmt_rational(&self.expected),
            fmt_rational(&self.actual)
        )
    }
}

impl CoefficientTable {
    pub fn new(series: &str, kind: SeriesKind, surface: SurfaceProfile, rank: Option<u32>, max_weight: u64) -> Self {
        Self {
            series: series.to_string(),
            kind,
            surface,
            rank,
            max_weight,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, partition: Partition, class: Mono, value: BigRational) {
        let key = TableKey { partition, class };
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    /// The entry, zero when absent.
    pub fn get(&self, partition: &Partition, class: Mono) -> BigRational {
        self.entries
            .get(&TableKey {
                partition: partition.clone(),
                class,
            })
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Nonzero entries in table order.
    pub fn entries(&self) -> impl Iterator<Item = (&Partition, Mono, &BigRational)> {
        self.entries.iter().map(|(k, v)| (&k.partition, k.class, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only entries whose partition has weight at most `w`.
    pub fn truncated(&self, w: u64) -> CoefficientTable {
        let mut t = self.clone();
        t.max_weight = w.min(self.max_weight);
        t.entries.retain(|k, _| k.partition.weight() <= w);
        t
    }

    /// Keeps only the given class columns.
    pub fn restricted(&self, classes: &[Mono]) -> CoefficientTable {
        let mut t = self.clone();
        t.entries.retain(|k, _| classes.contains(&k.class));
        t
    }

    /// Classes that occur in at least one entry, in basis order.
    pub fn classes(&self) -> Vec<Mono> {
        Mono::ALL
            .iter()
            .copied()
            .filter(|m| self.entries.keys().any(|k| k.class == *m))
            .collect()
    }

    /// Every `(λ, class)` where the two tables differ, reading `self` as the expectation.
    pub fn diff(&self, actual: &CoefficientTable) -> Vec<EntryDiff> {
        let mut keys: Vec<&TableKey> = self.entries.keys().chain(actual.entries.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter_map(|k| {
                let e = self.get(&k.partition, k.class);
                let a = actual.get(&k.partition, k.class);
                (e != a).then(|| EntryDiff {
                    partition: k.partition.clone(),
                    class: k.class,
                    expected: e,
                    actual: a,
                })
            })
            .collect()
    }

    fn json_table(&self) -> JsonTable {
        JsonTable {
            series: self.series.clone(),
            surface: self.surface.name().to_string(),
            rank: self.rank,
            entries: self
                .entries()
                .map(|(p, c, v)| JsonEntry {
                    partition: p.clone(),
                    class: c.name().to_string(),
                    coefficient: fmt_rational(v),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json_table()).expect("table serializes");
        s.push('\n');
        s
    }

    /// Reads the JSON rendering back. `kind` and `max_weight` are not part of
    /// the format; the latter is taken from the heaviest entry.
    pub fn from_json(text: &str, kind: SeriesKind) -> Result<CoefficientTable, SeriesError> {
        let t: JsonTable = serde_json::from_str(text).map_err(|e| SeriesError::Format(e.to_string()))?;
        let surface = t
            .surface
            .parse::<SurfaceProfile>()
            .map_err(|e| SeriesError::Format(e.to_string()))?;
        let max_weight = t.entries.iter().map(|e| e.partition.weight()).max().unwrap_or(0);
        let mut out = CoefficientTable::new(&t.series, kind, surface, t.rank, max_weight);
        for e in t.entries {
            let class = e
                .class
                .parse::<Mono>()
                .map_err(|err| SeriesError::Format(err.to_string()))?;
            let value = parse_rational(&e.coefficient)
                .ok_or_else(|| SeriesError::Format(format!("bad rational {:?}", e.coefficient)))?;
            out.insert(e.partition, class, value);
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(Vec::new());
        w.write_record(["partition", "class", "coefficient"]).expect("in-memory write");
        for (p, c, v) in self.entries() {
            w.write_record([p.to_string(), c.name().to_string(), fmt_rational(v)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    /// One row per partition, one column per basis monomial that occurs.
    pub fn to_markdown(&self) -> String {
        let classes = self.classes();
        let mut rows: Vec<&Partition> = self.entries.keys().map(|k| &k.partition).collect();
        rows.dedup();

        let mut s = String::new();
        let rank = self.rank.map(|r| format!(", rank {r}")).unwrap_or_default();
        let _ = writeln!(s, "**{}** ({}{})\n", self.series, self.surface, rank);
        let _ = write!(s, "| λ |");
        for c in &classes {
            let _ = write!(s, " {} |", c.name());
        }
        s.push('\n');
        s.push_str("|---|");
        for _ in &classes {
            s.push_str("---|");
        }
        s.push('\n');
        for p in rows {
            let _ = write!(s, "| {p} |");
            for c in &classes {
                let _ = write!(s, " {} |", fmt_rational(&self.get(p, *c)));
            }
            s.push('\n');
        }
        s
    }
}

/// Reads off `s = Σ coefficient · q_λ(class)|0⟩`; every other monomial must vanish.
pub fn extract_linear(
    s: &WeightSeries,
    series: &str,
    surface: SurfaceProfile,
    rank: Option<u32>,
) -> Result<CoefficientTable, SeriesError> {
    let mut table = CoefficientTable::new(series, SeriesKind::Linear, surface, rank, s.max_weight);
    for (w, state) in s.iter() {
        for (m, c) in state.sorted_terms() {
            match m.gens() {
                [g] if g.class.is_plain() => table.insert(g.part.clone(), g.class.mono, c.clone()),
                _ => {
                    return Err(SeriesError::NonlinearResidual {
                        weight: w,
                        monomial: m.render_compact(),
                        coefficient: fmt_rational(c),
                    })
                }
            }
        }
    }
    Ok(table)
}

/// [`extract_linear`] of the logarithm.
pub fn extract_exponential(
    s: &WeightSeries,
    series: &str,
    surface: SurfaceProfile,
    rank: Option<u32>,
) -> Result<CoefficientTable, SeriesError> {
    let mut t = extract_linear(&series_log(s)?, series, surface, rank)?;
    t.kind = SeriesKind::Exponential;
    Ok(t)
}
