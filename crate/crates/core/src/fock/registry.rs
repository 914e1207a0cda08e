//! Interchangeable normalization strategies, registered by name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigRational, Zero};

use super::{Atom, FockError, FockState, OperatorExpr, RedexSelector, Rewrite};
use crate::surface::{ClassMono, IdSource, SurfaceProfile};

/// Everything a normalizer needs besides the expression: the surface
/// specialization and a private source of fresh marker ids.
#[derive(Clone, Copy)]
pub struct NormalizeCtx<'a> {
    pub profile: SurfaceProfile,
    pub ids: &'a IdSource,
}

impl fmt::Debug for NormalizeCtx<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalizeCtx").field("profile", &self.profile).finish()
    }
}

/// A strategy for evaluating operator words on states.
///
/// Implementations must agree on every input up to the representation of
/// Künneth markers; [`FockState::close`] makes results comparable.
pub trait Normalizer: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Applies `word` (composition, rightmost atom first) to `state`. The word
    /// must not contain the vacuum. Markers already present in `state` or in
    /// the word that stay unpaired are carried through.
    fn apply(
        &self,
        word: &[Atom],
        state: &FockState,
        ctx: &NormalizeCtx<'_>,
    ) -> Result<FockState, FockError>;

    /// `Σ_ν weights[ν] · Q(ν, class, n)` applied to `state`.
    fn apply_derived_series(
        &self,
        weights: &[BigRational],
        class: &ClassMono,
        n: u32,
        state: &FockState,
        ctx: &NormalizeCtx<'_>,
    ) -> Result<FockState, FockError> {
        let mut out = FockState::zero();
        for (nu, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let s = self.apply(&[Atom::Derived(nu as u32, class.clone(), n)], state, ctx)?;
            out.add_scaled(&s, w);
        }
        Ok(out)
    }

    /// Normal form of `expr |0⟩`; every marker must pair off.
    fn normalize(&self, expr: &OperatorExpr, ctx: &NormalizeCtx<'_>) -> Result<FockState, FockError> {
        let vacuum = FockState::vacuum();
        let mut out = FockState::zero();
        for (idx, (c, word)) in expr.terms.iter().enumerate() {
            let body = match word.split_last() {
                Some((Atom::Vacuum, body)) => body,
                _ => return Err(FockError::NonVacuumWord(idx)),
            };
            if body.contains(&Atom::Vacuum) {
                return Err(FockError::MisplacedVacuum(idx));
            }
            let s = self.apply(body, &vacuum, ctx)?;
            out.add_scaled(&s, c);
        }
        out.close(ctx.profile, |_| false)
    }
}

/// Name-keyed table of normalizers.
#[derive(Debug, Clone, Default)]
pub struct NormalizerRegistry {
    entries: BTreeMap<String, Arc<dyn Normalizer>>,
}

pub const DEFAULT_NORMALIZER: &str = "derivation";

impl NormalizerRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The closed-form derivation engine plus the rewriting engine under
    /// three redex selection strategies.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(super::Derivation));
        r.register(Arc::new(Rewrite::new(RedexSelector::Leftmost)));
        r.register(Arc::new(Rewrite::new(RedexSelector::Rightmost)));
        r.register(Arc::new(Rewrite::new(RedexSelector::Random(0x5eed))));
        r
    }

    /// Registers under `normalizer.name()`, returning any entry it replaces.
    pub fn register(&mut self, normalizer: Arc<dyn Normalizer>) -> Option<Arc<dyn Normalizer>> {
        self.entries.insert(normalizer.name().to_string(), normalizer)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Normalizer>, FockError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| FockError::UnknownNormalizer(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Normalizer>> {
        self.entries.values()
    }
}
