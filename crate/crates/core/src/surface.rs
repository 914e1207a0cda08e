//! Even rational cohomology of a generic surface, truncated above degree 4.
//!
//! Symbols: `K` (canonical class), `e` (Euler class), `c1`/`c2` of a test
//! bundle, and their surviving products. A class slot may also carry
//! Künneth markers: a marker id occurring in two slots stands for the
//! diagonal class `Δ_!(1) = Σ a_i ⊗ a_i'`, one half per slot. Splitting a
//! general class `u` uses the projection formula `Δ_!(u) = (u ⊗ 1)·Δ_!(1)`,
//! so `u` rides on the first half and the second half is bare. Two halves in
//! the same slot multiply to `Δ^*Δ_!(1) = e`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num::{BigRational, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// The eight basis monomials of the truncated ring, in output order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Mono {
    /// 1
    I,
    /// c1
    C,
    /// K
    K,
    /// c2
    D,
    /// c1^2
    C2,
    /// c1 K
    CK,
    /// K^2
    K2,
    /// e
    E,
}

impl Mono {
    pub const ALL: [Mono; 8] = [
        Mono::I,
        Mono::C,
        Mono::K,
        Mono::D,
        Mono::C2,
        Mono::CK,
        Mono::K2,
        Mono::E,
    ];

    /// Real cohomological degree.
    pub fn degree(self) -> u32 {
        match self {
            Mono::I => 0,
            Mono::C | Mono::K => 2,
            _ => 4,
        }
    }

    /// Cup product of basis monomials; `None` when the product vanishes.
    pub fn cup(self, other: Mono) -> Option<Mono> {
        use Mono::*;
        match (self, other) {
            (I, x) | (x, I) => Some(x),
            (C, C) => Some(C2),
            (C, K) | (K, C) => Some(CK),
            (K, K) => Some(K2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mono::I => "1",
            Mono::C => "c1",
            Mono::K => "K",
            Mono::D => "c2",
            Mono::C2 => "c1^2",
            Mono::CK => "c1K",
            Mono::K2 => "K^2",
            Mono::E => "e",
        }
    }

    /// Short symbol used in script-style rendering.
    pub fn script_name(self) -> &'static str {
        match self {
            Mono::I => "I",
            Mono::C => "C",
            Mono::K => "K",
            Mono::D => "D",
            Mono::C2 => "(C . C)",
            Mono::CK => "(C . K)",
            Mono::K2 => "(K . K)",
            Mono::E => "e",
        }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown class monomial {0:?}")]
pub struct UnknownMono(pub String);

impl FromStr for Mono {
    type Err = UnknownMono;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mono::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMono(s.to_string()))
    }
}

/// Which symbols survive specialization to a particular kind of surface.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub enum SurfaceProfile {
    #[default]
    Generic,
    /// `K = 0`.
    K3Abelian,
    /// `K = c1 = c2 = e = 0`; only the unit survives.
    Plane,
}

impl SurfaceProfile {
    pub fn keeps(self, m: Mono) -> bool {
        match self {
            SurfaceProfile::Generic => true,
            SurfaceProfile::K3Abelian => !matches!(m, Mono::K | Mono::CK | Mono::K2),
            SurfaceProfile::Plane => m == Mono::I,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceProfile::Generic => "generic",
            SurfaceProfile::K3Abelian => "k3_abelian",
            SurfaceProfile::Plane => "plane",
        }
    }
}

impl fmt::Display for SurfaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurfaceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(SurfaceProfile::Generic),
            "k3_abelian" | "k3-abelian" => Ok(SurfaceProfile::K3Abelian),
            "plane" => Ok(SurfaceProfile::Plane),
            other => Err(format!("unknown surface profile {other:?}")),
        }
    }
}

/// Opaque identifier pairing two Künneth halves.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MarkerId(pub u64);

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Allocates fresh marker ids. Each computation owns its own source; sources
/// built with different namespaces never hand out the same id.
#[derive(Debug)]
pub struct IdSource {
    next: AtomicU64,
}

impl IdSource {
    const NAMESPACE_BITS: u32 = 40;

    pub fn new() -> Self {
        Self::with_namespace(0)
    }

    pub fn with_namespace(namespace: u32) -> Self {
        Self {
            next: AtomicU64::new((namespace as u64) << Self::NAMESPACE_BITS),
        }
    }

    pub fn fresh(&self) -> MarkerId {
        MarkerId(self.next.fetch_add(1, AtomicOrdering::Relaxed))
    }
}

impl Default for IdSource {
    fn default() -> Self {
        Self::new()
    }
}

pub type Markers = SmallVec<[MarkerId; 2]>;

/// A coefficient-free class: one basis monomial times a set of marker halves.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassMono {
    pub mono: Mono,
    /// Sorted, no duplicates.
    pub markers: Markers,
}

impl ClassMono {
    pub fn plain(mono: Mono) -> Self {
        Self {
            mono,
            markers: Markers::new(),
        }
    }

    pub fn marked(mono: Mono, id: MarkerId) -> Self {
        let mut markers = Markers::new();
        markers.push(id);
        Self { mono, markers }
    }

    pub fn is_plain(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn has_marker(&self, id: MarkerId) -> bool {
        self.markers.binary_search(&id).is_ok()
    }

    /// Degree counting each marker half as 2 (a pair carries `Δ_!(1)`, degree 4).
    pub fn degree(&self) -> u32 {
        self.mono.degree() + 2 * self.markers.len() as u32
    }

    pub fn times_mono(&self, m: Mono) -> Option<ClassMono> {
        Some(ClassMono {
            mono: self.mono.cup(m)?,
            markers: self.markers.clone(),
        })
    }

    /// Cup product in one slot. Halves with equal ids pair off into `e`.
    pub fn cup(&self, other: &ClassMono) -> Option<ClassMono> {
        let mut mono = self.mono.cup(other.mono)?;
        let mut markers = Markers::with_capacity(self.markers.len() + other.markers.len());
        let (a, b) = (&self.markers, &other.markers);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                markers.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                markers.push(b[j]);
                j += 1;
            } else {
                mono = mono.cup(Mono::E)?;
                i += 1;
                j += 1;
            }
        }
        Some(ClassMono { mono, markers })
    }

    /// Joins two slots across the marker `id` they share: the pair is
    /// replaced by the product of the remaining content, with no `e` factor.
    pub fn join(&self, other: &ClassMono, id: MarkerId) -> Option<ClassMono> {
        let a = self.without_marker(id);
        let b = other.without_marker(id);
        a.cup(&b)
    }

    pub fn without_marker(&self, id: MarkerId) -> ClassMono {
        ClassMono {
            mono: self.mono,
            markers: self.markers.iter().copied().filter(|&m| m != id).collect(),
        }
    }

    pub fn rename_markers(&self, map: &BTreeMap<MarkerId, MarkerId>) -> ClassMono {
        let mut markers: Markers = self
            .markers
            .iter()
            .map(|m| *map.get(m).unwrap_or(m))
            .collect();
        markers.sort_unstable();
        ClassMono {
            mono: self.mono,
            markers,
        }
    }
}

impl fmt::Display for ClassMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mono.name())?;
        for m in &self.markers {
            write!(f, "[{m}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ClassMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One coefficient times one class monomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassTerm {
    pub coeff: BigRational,
    pub class: ClassMono,
}

/// A rational linear combination of class monomials.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct SurfaceClass {
    terms: BTreeMap<ClassMono, BigRational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("class carries Künneth markers; specialize only marker-free classes")]
    MarkedClass,
    #[error("Künneth split expects a single marker-free basis monomial with coefficient 1, got {0}")]
    CompositeSplit(String),
}

impl SurfaceClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn mono(m: Mono) -> Self {
        Self::from_class(ClassMono::plain(m))
    }

    pub fn from_class(c: ClassMono) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(c, BigRational::from_integer(1.into()));
        Self { terms }
    }

    pub fn one() -> Self {
        Self::mono(Mono::I)
    }

    pub fn from_terms<I: IntoIterator<Item = (BigRational, ClassMono)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (c, m) in it {
            out.add_term(c, m);
        }
        out
    }

    pub fn add_term(&mut self, coeff: BigRational, class: ClassMono) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(class) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ClassTerm> + '_ {
        self.terms.iter().map(|(k, v)| ClassTerm {
            coeff: v.clone(),
            class: k.clone(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClassMono, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, class: &ClassMono) -> BigRational {
        self.terms.get(class).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_marker_free(&self) -> bool {
        self.terms.keys().all(ClassMono::is_plain)
    }

    pub fn add(&self, other: &SurfaceClass) -> SurfaceClass {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(v.clone(), k.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> SurfaceClass {
        if c.is_zero() {
            return SurfaceClass::zero();
        }
        SurfaceClass {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Bilinear cup product; degree > 4 vanishes, equal markers in one slot pair to `e`.
    pub fn cup(&self, other: &SurfaceClass) -> SurfaceClass {
        let mut out = SurfaceClass::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(p) = a.cup(b) {
                    out.add_term(ca * cb, p);
                }
            }
        }
        out
    }

    pub fn specialize(&self, profile: SurfaceProfile) -> Result<SurfaceClass, SurfaceError> {
        if !self.is_marker_free() {
            return Err(SurfaceError::MarkedClass);
        }
        Ok(self.restrict(profile))
    }

    /// Drops monomials killed by `profile`; markers pass through unchanged.
    pub(crate) fn restrict(&self, profile: SurfaceProfile) -> SurfaceClass {
        SurfaceClass {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| profile.keeps(k.mono))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({v}) {k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The two halves of `Δ_!(u)` for a basis monomial `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KunnethPair {
    pub id: MarkerId,
    pub split: Mono,
    /// `u` times the half marker.
    pub first: ClassMono,
    /// The bare half marker.
    pub second: ClassMono,
}

/// Splits a single basis monomial into two Künneth halves with a fresh id.
pub fn kunneth_split(u: &SurfaceClass, ids: &IdSource) -> Result<KunnethPair, SurfaceError> {
    let one = BigRational::from_integer(1.into());
    let mut it = u.iter();
    match (it.next(), it.next()) {
        (Some((class, c)), None) if class.is_plain() && *c == one => {
            let id = ids.fresh();
            Ok(KunnethPair {
                id,
                split: class.mono,
                first: ClassMono::marked(class.mono, id),
                second: ClassMono::marked(Mono::I, id),
            })
        }
        _ => Err(SurfaceError::CompositeSplit(u.to_string())),
    }
}
