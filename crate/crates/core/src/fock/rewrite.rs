//! Word rewriting with the oriented commutation rules, one redex at a time.
//!
//! Rules, for plain creation atoms `<x n>`:
//!
//! ```text
//! D . |0>            => 0
//! D . <x n>          => <x n> . D + n L(x n) + binom(n,2) <(K.x) n>
//! L(u n) . <x m>     => <x m> . L(u n) − m <(u.x) (n+m)>
//! L(u n) . |0>       => 1/2 Σ_{0<m<n} <(u.[t]) m> . <[t] (n−m)> . |0>     (t fresh)
//! ```
//!
//! Joined input generators `q_λ(x)` are first opened into chains of plain
//! atoms glued by fresh markers; at the end every marker shared by two atoms
//! is joined back (see [`FockState::close`]).
//!
//! Termination: a `D` step strictly decreases the number of creation atoms to
//! the right of that `D` (the new `L` sits where `D` was and has the same
//! atoms to its right, the `K` term drops the `D`); an `L` step likewise
//! decreases the atoms to the right of that `L`, and `L . |0>` removes the `L`.
//! Ordering words by the multiset of these counts gives a well-founded
//! measure, so every selection strategy reaches a normal form.

use std::collections::BTreeSet;

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::registry::{NormalizeCtx, Normalizer};
use super::{binom2, half, join_monomial, rational, Atom, FockError, FockState, Gen, OperatorExpr};
use crate::combinatorics::Partition;
use crate::surface::{ClassMono, MarkerId, Mono, SurfaceProfile};

/// Which redex to rewrite next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedexSelector {
    Leftmost,
    Rightmost,
    /// Uniformly random term and redex, from a fixed seed.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct Rewrite {
    selector: RedexSelector,
    name: String,
}

impl Rewrite {
    pub fn new(selector: RedexSelector) -> Self {
        let name = match selector {
            RedexSelector::Leftmost => "rewrite-leftmost".to_string(),
            RedexSelector::Rightmost => "rewrite-rightmost".to_string(),
            RedexSelector::Random(0x5eed) => "rewrite-random".to_string(),
            RedexSelector::Random(seed) => format!("rewrite-random-{seed}"),
        };
        Self { selector, name }
    }

    pub fn selector(&self) -> RedexSelector {
        self.selector
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Letter {
    D,
    L(ClassMono, u32),
    C(ClassMono, u32),
    Vac,
}

type Term = (BigRational, Vec<Letter>);

impl Normalizer for Rewrite {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(
        &self,
        word: &[Atom],
        state: &FockState,
        ctx: &NormalizeCtx<'_>,
    ) -> Result<FockState, FockError> {
        let profile = ctx.profile;
        let mut external: BTreeSet<MarkerId> = state.marker_ids().into_iter().collect();
        for atom in word {
            match atom {
                Atom::Virasoro(u, _) | Atom::Derived(_, u, _) => external.extend(u.markers.iter()),
                Atom::Create(g) => external.extend(g.class.markers.iter()),
                Atom::Boundary => {}
                Atom::Vacuum => return Err(FockError::MisplacedVacuum(0)),
            }
        }

        let expanded = OperatorExpr::word(word.to_vec()).expand_derived();
        let mut pending: Vec<Term> = Vec::new();
        for (cw, w) in &expanded.terms {
            let mut prefix = Vec::with_capacity(w.len());
            let mut dead = false;
            for atom in w {
                match atom {
                    Atom::Boundary => prefix.push(Letter::D),
                    Atom::Virasoro(u, n) => prefix.push(Letter::L(u.clone(), *n)),
                    Atom::Create(g) => {
                        if !profile.keeps(g.class.mono) {
                            dead = true;
                            break;
                        }
                        prefix.extend(open(g, ctx));
                    }
                    Atom::Derived(..) | Atom::Vacuum => unreachable!("expanded word"),
                }
            }
            if dead {
                continue;
            }
            for (m, cm) in state.iter() {
                if !m.gens().iter().all(|g| profile.keeps(g.class.mono)) {
                    continue;
                }
                let mut letters = prefix.clone();
                for g in m.gens() {
                    letters.extend(open(g, ctx));
                }
                letters.push(Letter::Vac);
                pending.push((cw * cm, letters));
            }
        }

        let mut rng = match self.selector {
            RedexSelector::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };

        let mut out = FockState::zero();
        while !pending.is_empty() {
            let idx = match rng.as_mut() {
                Some(r) => r.gen_range(0..pending.len()),
                None => pending.len() - 1,
            };
            let (c, w) = pending.swap_remove(idx);
            let redexes: Vec<usize> = (0..w.len().saturating_sub(1))
                .filter(|&p| is_redex(&w[p], &w[p + 1]))
                .collect();
            if redexes.is_empty() {
                let gens: Vec<Gen> = w
                    .iter()
                    .filter_map(|l| match l {
                        Letter::C(x, n) => Some(Gen::new(x.clone(), Partition::single(*n))),
                        Letter::Vac => None,
                        other => unreachable!("stuck letter {other:?} in normal form"),
                    })
                    .collect();
                if let Some(m) = join_monomial(gens, profile, &|id| external.contains(&id))? {
                    out.add_term(m, c);
                }
                continue;
            }
            let pos = match (self.selector, rng.as_mut()) {
                (RedexSelector::Leftmost, _) => redexes[0],
                (RedexSelector::Rightmost, _) => *redexes.last().expect("nonempty"),
                (RedexSelector::Random(_), Some(r)) => redexes[r.gen_range(0..redexes.len())],
                (RedexSelector::Random(_), None) => unreachable!(),
            };
            step(&c, &w, pos, profile, ctx, &mut pending);
        }
        Ok(out)
    }
}

fn is_redex(a: &Letter, b: &Letter) -> bool {
    matches!(
        (a, b),
        (Letter::D, Letter::C(..))
            | (Letter::D, Letter::Vac)
            | (Letter::L(..), Letter::C(..))
            | (Letter::L(..), Letter::Vac)
    )
}

/// Opens `q_λ(x)` into `<x[t1] λ1> <[t1][t2] λ2> ... <[t_{k−1}] λk>`.
fn open(g: &Gen, ctx: &NormalizeCtx<'_>) -> Vec<Letter> {
    let parts = g.part.parts();
    if parts.len() == 1 {
        return vec![Letter::C(g.class.clone(), parts[0])];
    }
    let ids: Vec<MarkerId> = (1..parts.len()).map(|_| ctx.ids.fresh()).collect();
    let mut out = Vec::with_capacity(parts.len());
    for (k, &p) in parts.iter().enumerate() {
        let mut class = if k == 0 {
            g.class.clone()
        } else {
            ClassMono::marked(Mono::I, ids[k - 1])
        };
        if k + 1 < parts.len() {
            class = class
                .cup(&ClassMono::marked(Mono::I, ids[k]))
                .expect("fresh marker cannot pair");
        }
        out.push(Letter::C(class, p));
    }
    out
}

fn step(
    c: &BigRational,
    w: &[Letter],
    pos: usize,
    profile: SurfaceProfile,
    ctx: &NormalizeCtx<'_>,
    pending: &mut Vec<Term>,
) {
    let splice = |middle: Vec<Letter>| -> Vec<Letter> {
        let mut v = Vec::with_capacity(w.len() + middle.len());
        v.extend_from_slice(&w[..pos]);
        v.extend(middle);
        v.extend_from_slice(&w[pos + 2..]);
        v
    };
    match (&w[pos], &w[pos + 1]) {
        (Letter::D, Letter::Vac) => {}
        (Letter::D, Letter::C(x, n)) => {
            pending.push((c.clone(), splice(vec![Letter::C(x.clone(), *n), Letter::D])));
            pending.push((c * rational(*n as i64), splice(vec![Letter::L(x.clone(), *n)])));
            if *n >= 2 {
                if let Some(kx) = x.times_mono(Mono::K).filter(|k| profile.keeps(k.mono)) {
                    pending.push((c * binom2(*n), splice(vec![Letter::C(kx, *n)])));
                }
            }
        }
        (Letter::L(u, n), Letter::C(x, m)) => {
            pending.push((
                c.clone(),
                splice(vec![Letter::C(x.clone(), *m), Letter::L(u.clone(), *n)]),
            ));
            if let Some(ux) = u.cup(x).filter(|k| profile.keeps(k.mono)) {
                pending.push((-(c * rational(*m as i64)), splice(vec![Letter::C(ux, n + m)])));
            }
        }
        (Letter::L(u, n), Letter::Vac) => {
            if !profile.keeps(u.mono) {
                return;
            }
            for a in 1..*n {
                let id = ctx.ids.fresh();
                let first = u
                    .cup(&ClassMono::marked(Mono::I, id))
                    .expect("fresh marker cannot pair");
                let second = ClassMono::marked(Mono::I, id);
                pending.push((
                    c * half(),
                    splice(vec![Letter::C(first, a), Letter::C(second, n - a), Letter::Vac]),
                ));
            }
        }
        _ => unreachable!("not a redex"),
    }
}
