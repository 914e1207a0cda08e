//! Operator algebra on the Fock space `ℍ_S` and its creation normal forms.
//!
//! States are rational combinations of monomials in the commuting creation
//! generators `q_λ(x)` applied to the vacuum. Operator expressions are words
//! over the boundary operator `D`, Virasoro operators `L(u,n)`, derived
//! Nakajima operators `Q(i,u,n) = ad(D)^i q_n(u)` and creation generators,
//! each terminated by the vacuum. A [`Normalizer`] turns an expression into a
//! normal form; several interchangeable strategies live in [`registry`].

mod derivation;
pub mod registry;
mod rewrite;

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Zero};
use smallvec::SmallVec;
use thiserror::Error;

use crate::combinatorics::{binomial, Partition};
use crate::surface::{ClassMono, IdSource, MarkerId, Mono, SurfaceClass, SurfaceProfile};

pub use derivation::Derivation;
pub use registry::{NormalizeCtx, Normalizer, NormalizerRegistry};
pub use rewrite::{RedexSelector, Rewrite};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error("Künneth marker {0} is not paired off in the normal form")]
    UnpairedMarker(MarkerId),
    #[error("word {0} does not end with the vacuum")]
    NonVacuumWord(usize),
    #[error("word {0} has the vacuum before its last atom")]
    MisplacedVacuum(usize),
    #[error("unknown normalizer {0:?}")]
    UnknownNormalizer(String),
}

/// A creation generator `q_λ(x)`; for `λ = (n)` this is the plain Nakajima operator `q_n(x)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gen {
    pub class: ClassMono,
    pub part: Partition,
}

impl Gen {
    pub fn new(class: ClassMono, part: Partition) -> Self {
        assert!(!part.is_empty(), "creation generator needs a nonempty partition");
        Self { class, part }
    }

    pub fn plain(mono: Mono, part: Partition) -> Self {
        Self::new(ClassMono::plain(mono), part)
    }

    /// `q_n(mono)`.
    pub fn nakajima(mono: Mono, n: u32) -> Self {
        Self::plain(mono, Partition::single(n))
    }

    pub fn weight(&self) -> u64 {
        self.part.weight()
    }

    /// Cohomological degree `2(|λ| + ℓ(λ)) + deg(x) − 4`, marker halves counting 2.
    pub fn degree(&self) -> i64 {
        2 * (self.part.weight() as i64 + self.part.length() as i64) + self.class.degree() as i64 - 4
    }
}

impl Ord for Gen {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight()
            .cmp(&self.weight())
            .then_with(|| other.part.cmp(&self.part))
            .then_with(|| self.class.cmp(&other.class))
    }
}

impl PartialOrd for Gen {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}({})", self.part, self.class)
    }
}

impl fmt::Debug for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A commutative monomial in creation generators, stored sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    gens: SmallVec<[Gen; 4]>,
}

impl Monomial {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn from_gens<I: IntoIterator<Item = Gen>>(gens: I) -> Self {
        let mut gens: SmallVec<[Gen; 4]> = gens.into_iter().collect();
        gens.sort();
        Self { gens }
    }

    pub fn gens(&self) -> &[Gen] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn weight(&self) -> u64 {
        self.gens.iter().map(Gen::weight).sum()
    }

    pub fn degree(&self) -> i64 {
        self.gens.iter().map(Gen::degree).sum()
    }

    pub fn has_markers(&self) -> bool {
        self.gens.iter().any(|g| !g.class.is_plain())
    }

    pub fn times(&self, g: Gen) -> Monomial {
        let mut gens = self.gens.clone();
        let pos = gens.partition_point(|h| h <= &g);
        gens.insert(pos, g);
        Monomial { gens }
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        gens.sort();
        Monomial { gens }
    }

    /// Replaces the generator at `index`.
    pub fn replaced(&self, index: usize, g: Gen) -> Monomial {
        let mut gens = self.gens.clone();
        gens.remove(index);
        let pos = gens.partition_point(|h| h <= &g);
        gens.insert(pos, g);
        Monomial { gens }
    }

    /// Removes generators `i < j` and inserts `g`.
    pub fn merged(&self, i: usize, j: usize, g: Gen) -> Monomial {
        debug_assert!(i < j);
        let mut gens = self.gens.clone();
        gens.remove(j);
        gens.remove(i);
        let pos = gens.partition_point(|h| h <= &g);
        gens.insert(pos, g);
        Monomial { gens }
    }

    pub fn rename_markers(&self, map: &BTreeMap<MarkerId, MarkerId>) -> Monomial {
        Monomial::from_gens(self.gens.iter().map(|g| Gen {
            class: g.class.rename_markers(map),
            part: g.part.clone(),
        }))
    }

    pub fn render_script(&self) -> String {
        let mut s = String::new();
        for g in &self.gens {
            if g.part.length() == 1 && g.class.is_plain() {
                let _ = write!(s, "< {} {} > . ", g.class.mono.script_name(), g.part.parts()[0]);
            } else {
                let parts: Vec<String> = g.part.parts().iter().map(|p| p.to_string()).collect();
                let mut cls = g.class.mono.script_name().to_string();
                for m in &g.class.markers {
                    let _ = write!(cls, " . [{m}']");
                }
                let _ = write!(s, "<< {} ({}) >> . ", cls, parts.join(" ; "));
            }
        }
        s.push_str("|>");
        s
    }

    pub fn render_compact(&self) -> String {
        if self.gens.is_empty() {
            return "|0>".to_string();
        }
        let v: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        v.join(" ")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_compact())
    }
}

/// A rational combination of creation monomials applied to the vacuum.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct FockState {
    terms: HashMap<Monomial, BigRational>,
}

impl FockState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::monomial(Monomial::unit(), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(m, c);
        s
    }

    /// `q_λ(x)|0⟩` for each class term of `x`.
    pub fn generator(class: &SurfaceClass, part: &Partition) -> Self {
        let mut s = Self::zero();
        for (c, coeff) in class.iter() {
            s.add_term(Monomial::from_gens([Gen::new(c.clone(), part.clone())]), coeff.clone());
        }
        s
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &FockState) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &FockState, k: &BigRational) {
        if k.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * k);
        }
    }

    pub fn add(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        out.add_scaled(other, &-BigRational::one());
        out
    }

    pub fn scale(&self, k: &BigRational) -> FockState {
        if k.is_zero() {
            return FockState::zero();
        }
        FockState {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in canonical order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn has_markers(&self) -> bool {
        self.terms.keys().any(Monomial::has_markers)
    }

    /// Product in the commutative algebra of creation generators.
    pub fn product(&self, other: &FockState) -> FockState {
        let mut out = FockState::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.product(b), ca * cb);
            }
        }
        out
    }

    /// Multiplies by one generator.
    pub fn times_gen(&self, g: &Gen) -> FockState {
        FockState {
            terms: self.terms.iter().map(|(m, c)| (m.times(g.clone()), c.clone())).collect(),
        }
    }

    /// Part of the state in conformal weight `w`.
    pub fn weight_part(&self, w: u64) -> FockState {
        self.filter(|m| m.weight() == w)
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> FockState {
        FockState {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The set of conformal weights carried by the monomials.
    pub fn weights(&self) -> Vec<u64> {
        let mut w: Vec<u64> = self.terms.keys().map(Monomial::weight).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.terms.keys().map(Monomial::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn rename_markers(&self, map: &BTreeMap<MarkerId, MarkerId>) -> FockState {
        let mut out = FockState::zero();
        for (m, c) in &self.terms {
            out.add_term(m.rename_markers(map), c.clone());
        }
        out
    }

    /// Marker ids occurring anywhere, sorted.
    pub fn marker_ids(&self) -> Vec<MarkerId> {
        let mut ids: Vec<MarkerId> = self
            .terms
            .keys()
            .flat_map(|m| m.gens.iter().flat_map(|g| g.class.markers.iter().copied()))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Drops generators whose class is killed by `profile`.
    pub fn restrict(&self, profile: SurfaceProfile) -> FockState {
        self.filter(|m| m.gens.iter().all(|g| profile.keeps(g.class.mono)))
    }

    /// Joins every marker shared by two generators of a monomial. Markers left
    /// with a single occurrence are accepted only if `external` says so.
    pub fn close(
        &self,
        profile: SurfaceProfile,
        external: impl Fn(MarkerId) -> bool,
    ) -> Result<FockState, FockError> {
        let mut out = FockState::zero();
        for (m, c) in &self.terms {
            if let Some(j) = join_monomial(m.gens.to_vec(), profile, &external)? {
                out.add_term(j, c.clone());
            }
        }
        Ok(out)
    }

    pub fn render_script(&self) -> String {
        render_with(self, Monomial::render_script, " + ")
    }

    pub fn render_compact(&self) -> String {
        render_with(self, Monomial::render_compact, " + ")
    }
}

fn render_with(s: &FockState, f: fn(&Monomial) -> String, sep: &str) -> String {
    if s.is_zero() {
        return "O".to_string();
    }
    s.sorted_terms()
        .into_iter()
        .map(|(m, c)| {
            if c.is_one() {
                f(m)
            } else {
                format!("({}) {}", crate::fmt_rational(c), f(m))
            }
        })
        .collect::<Vec<_>>()
        .join(sep)
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_compact())
    }
}

/// Repeatedly merges the two generators sharing a marker into one generator
/// on the union partition. `None` if a class vanishes.
pub(crate) fn join_monomial(
    mut gens: Vec<Gen>,
    profile: SurfaceProfile,
    external: &impl Fn(MarkerId) -> bool,
) -> Result<Option<Monomial>, FockError> {
    'outer: loop {
        for i in 0..gens.len() {
            for &id in gens[i].class.markers.iter() {
                if let Some(j) = (i + 1..gens.len()).find(|&j| gens[j].class.has_marker(id)) {
                    let class = match gens[i].class.join(&gens[j].class, id) {
                        Some(c) if profile.keeps(c.mono) => c,
                        _ => return Ok(None),
                    };
                    let part = gens[i].part.concat(&gens[j].part);
                    gens.remove(j);
                    gens[i] = Gen { class, part };
                    continue 'outer;
                }
            }
        }
        break;
    }
    for g in &gens {
        if let Some(&id) = g.class.markers.iter().find(|&&id| !external(id)) {
            return Err(FockError::UnpairedMarker(id));
        }
    }
    Ok(Some(Monomial::from_gens(gens)))
}

/// One letter of an operator word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Atom {
    /// The boundary operator `D`, cup product with `c_1(O^{[n]})`.
    Boundary,
    /// `L(u, n)`, `n ≥ 1`.
    Virasoro(ClassMono, u32),
    /// `Q(i, u, n) = ad(D)^i q_n(u)`.
    Derived(u32, ClassMono, u32),
    Create(Gen),
    Vacuum,
}

impl Atom {
    pub fn weight(&self) -> u64 {
        match self {
            Atom::Boundary | Atom::Vacuum => 0,
            Atom::Virasoro(_, n) | Atom::Derived(_, _, n) => *n as u64,
            Atom::Create(g) => g.weight(),
        }
    }
}

/// A word, read left to right as operator composition.
pub type Word = Vec<Atom>;

/// A rational combination of operator words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorExpr {
    pub terms: Vec<(BigRational, Word)>,
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(word: Word) -> Self {
        Self {
            terms: vec![(BigRational::one(), word)],
        }
    }

    pub fn identity() -> Self {
        Self::word(Vec::new())
    }

    pub fn boundary() -> Self {
        Self::word(vec![Atom::Boundary])
    }

    pub fn vacuum() -> Self {
        Self::word(vec![Atom::Vacuum])
    }

    /// `q_n(u)` distributed over the terms of `u`.
    pub fn nakajima(u: &SurfaceClass, n: u32) -> Self {
        Self::linear(u, |c| Atom::Create(Gen::new(c, Partition::single(n))))
    }

    /// `q_λ(u)`.
    pub fn creation(u: &SurfaceClass, part: &Partition) -> Self {
        Self::linear(u, |c| Atom::Create(Gen::new(c, part.clone())))
    }

    pub fn virasoro(u: &SurfaceClass, n: u32) -> Self {
        assert!(n >= 1);
        Self::linear(u, |c| Atom::Virasoro(c, n))
    }

    /// The unexpanded atom `Q(i, u, n)`.
    pub fn derived(i: u32, u: &SurfaceClass, n: u32) -> Self {
        Self::linear(u, |c| Atom::Derived(i, c, n))
    }

    fn linear(u: &SurfaceClass, atom: impl Fn(ClassMono) -> Atom) -> Self {
        Self {
            terms: u.iter().map(|(c, k)| (k.clone(), vec![atom(c.clone())])).collect(),
        }
    }

    /// Composition `self ∘ other`.
    pub fn then(&self, other: &OperatorExpr) -> OperatorExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, wa) in &self.terms {
            for (b, wb) in &other.terms {
                let mut w = wa.clone();
                w.extend(wb.iter().cloned());
                terms.push((a * b, w));
            }
        }
        OperatorExpr { terms }
    }

    pub fn plus(&self, other: &OperatorExpr) -> OperatorExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        OperatorExpr { terms }
    }

    pub fn scale(&self, k: &BigRational) -> OperatorExpr {
        OperatorExpr {
            terms: self.terms.iter().map(|(c, w)| (c * k, w.clone())).collect(),
        }
    }

    /// `[f, g] = f∘g − g∘f`; all admitted classes are even.
    pub fn commutator(&self, other: &OperatorExpr) -> OperatorExpr {
        self.then(other).plus(&other.then(self).scale(&-BigRational::one()))
    }

    /// `f^k`.
    pub fn power(&self, k: u32) -> OperatorExpr {
        (0..k).fold(OperatorExpr::identity(), |acc, _| acc.then(self))
    }

    /// Replaces every `Q` atom by its word expansion.
    pub fn expand_derived(&self) -> OperatorExpr {
        let mut out = OperatorExpr::zero();
        for (c, w) in &self.terms {
            let mut acc = OperatorExpr::word(Vec::new()).scale(c);
            for atom in w {
                let piece = match atom {
                    Atom::Derived(i, u, n) => {
                        derived_nakajima(*i, &SurfaceClass::from_class(u.clone()), *n)
                    }
                    other => OperatorExpr::word(vec![other.clone()]),
                };
                acc = acc.then(&piece);
            }
            out = out.plus(&acc);
        }
        out
    }
}

/// `Q(i, u, n)` expanded into words: `Σ_k binom(i,k) (−1)^{i−k} D^k q_n(u) D^{i−k}`.
pub fn derived_nakajima(i: u32, u: &SurfaceClass, n: u32) -> OperatorExpr {
    let mut out = OperatorExpr::zero();
    let q = OperatorExpr::nakajima(u, n);
    let d = OperatorExpr::boundary();
    for k in 0..=i {
        let sign = if (i - k).is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
        let coeff = BigRational::from_integer(binomial(i as u64, k as u64) * sign);
        let word = d.power(k).then(&q).then(&d.power(i - k)).scale(&coeff);
        out = out.plus(&word);
    }
    out
}

/// Product of two states in the commutative algebra of creation generators.
pub fn state_product(s: &FockState, t: &FockState) -> FockState {
    s.product(t)
}

/// Normalizes with the default normalizer and a private id source.
pub fn normalize(expr: &OperatorExpr, profile: SurfaceProfile) -> Result<FockState, FockError> {
    let ids = IdSource::new();
    let ctx = NormalizeCtx { profile, ids: &ids };
    Derivation.normalize(expr, &ctx)
}

/// `binom(n, 2)` as a rational.
pub(crate) fn binom2(n: u32) -> BigRational {
    let n = n as i64;
    BigRational::from_integer(BigInt::from(n * (n - 1) / 2))
}

pub(crate) fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}
