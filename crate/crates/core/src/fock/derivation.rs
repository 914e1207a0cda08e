//! Closed-form action of `D` and `L(u,n)` on joined generators `q_λ(x)`.
//!
//! Opening `q_λ(x)` into plain operators glued by Künneth markers, pushing
//! `D` through with `[D, q_m(y)] = m L(y,m) + binom(m,2) q_m(Ky)` and
//! `[L(y,m), q_k(z)] = −k q_{m+k}(yz)`, and joining again gives, for a
//! monomial `∏ q_{λ^a}(x_a)|0⟩`, a sum over the parts ("slots") `p` of
//! every generator:
//!
//! * `binom(p,2)`: the generator's class picks up `K`;
//! * `p/2 · Σ_{0<a<p}`: the part `p` splits into `(a, p−a)`, from `L(x,p)|0⟩`;
//! * `−p·p'` for every unordered pair of slots: the two parts fuse into
//!   `p+p'`. Slots of different generators merge them into one generator on
//!   the union partition with class `x_a x_b`; slots of one generator close a
//!   cycle, which contributes `e`.
//!
//! No new markers are created. Markers already on classes are multiplied
//! along, which is how the tangent recursion's Künneth halves ride through.

use num::{BigInt, BigRational, Zero};

use super::registry::{NormalizeCtx, Normalizer};
use super::{half, rational, Atom, FockError, FockState, Gen, Monomial};
use crate::combinatorics::{binomial, Partition};
use crate::surface::{ClassMono, Mono, SurfaceProfile};

#[derive(Debug, Clone, Copy, Default)]
pub struct Derivation;

impl Normalizer for Derivation {
    fn name(&self) -> &str {
        "derivation"
    }

    fn apply(
        &self,
        word: &[Atom],
        state: &FockState,
        ctx: &NormalizeCtx<'_>,
    ) -> Result<FockState, FockError> {
        let profile = ctx.profile;
        let mut s = state.restrict(profile);
        for atom in word.iter().rev() {
            s = match atom {
                Atom::Boundary => boundary(&s, profile),
                Atom::Virasoro(u, n) => virasoro(u, *n, &s, profile),
                Atom::Derived(i, u, n) => {
                    let mut weights = vec![BigRational::zero(); *i as usize + 1];
                    weights[*i as usize] = rational(1);
                    derived_series(&weights, u, *n, &s, profile)
                }
                Atom::Create(g) => {
                    if profile.keeps(g.class.mono) {
                        s.times_gen(g)
                    } else {
                        FockState::zero()
                    }
                }
                Atom::Vacuum => return Err(FockError::MisplacedVacuum(0)),
            };
        }
        Ok(s)
    }

    fn apply_derived_series(
        &self,
        weights: &[BigRational],
        class: &ClassMono,
        n: u32,
        state: &FockState,
        ctx: &NormalizeCtx<'_>,
    ) -> Result<FockState, FockError> {
        Ok(derived_series(weights, class, n, &state.restrict(ctx.profile), ctx.profile))
    }
}

/// `D` applied to a state.
pub(crate) fn boundary(state: &FockState, profile: SurfaceProfile) -> FockState {
    let mut out = FockState::zero();
    for (m, c) in state.iter() {
        boundary_monomial(m, c, profile, &mut out);
    }
    out
}

fn boundary_monomial(m: &Monomial, c: &BigRational, profile: SurfaceProfile, out: &mut FockState) {
    let gens = m.gens();
    for (i, g) in gens.iter().enumerate() {
        let parts = g.part.parts();

        let k_coeff: u64 = parts.iter().map(|&p| p as u64 * (p as u64 - 1) / 2).sum();
        if k_coeff > 0 {
            if let Some(class) = g.class.times_mono(Mono::K).filter(|x| profile.keeps(x.mono)) {
                let ng = Gen { class, part: g.part.clone() };
                out.add_term(m.replaced(i, ng), c * BigInt::from(k_coeff));
            }
        }

        for (v, mult) in g.part.multiplicities() {
            if v < 2 {
                continue;
            }
            let base = g.part.without_part(v).expect("part present");
            let f = c * rational(mult as i64 * v as i64) * half();
            for a in 1..v {
                let part = base.with_part(a).with_part(v - a);
                let ng = Gen { class: g.class.clone(), part };
                out.add_term(m.replaced(i, ng), f.clone());
            }
        }

        if parts.len() >= 2 {
            if let Some(class) = g.class.times_mono(Mono::E).filter(|x| profile.keeps(x.mono)) {
                for s in 0..parts.len() {
                    for t in s + 1..parts.len() {
                        let (a, b) = (parts[s], parts[t]);
                        let part = g.part.without_index(t).without_index(s).with_part(a + b);
                        let ng = Gen { class: class.clone(), part };
                        out.add_term(m.replaced(i, ng), -(c * BigInt::from(a as u64 * b as u64)));
                    }
                }
            }
        }

        for (j, h) in gens.iter().enumerate().skip(i + 1) {
            let Some(class) = g.class.cup(&h.class).filter(|x| profile.keeps(x.mono)) else {
                continue;
            };
            for (s, &a) in parts.iter().enumerate() {
                let rest_g = g.part.without_index(s);
                for (t, &b) in h.part.parts().iter().enumerate() {
                    let part = rest_g.concat(&h.part.without_index(t)).with_part(a + b);
                    let ng = Gen { class: class.clone(), part };
                    out.add_term(m.merged(i, j, ng), -(c * BigInt::from(a as u64 * b as u64)));
                }
            }
        }
    }
}

/// `L(u, n)` applied to a state.
pub(crate) fn virasoro(u: &ClassMono, n: u32, state: &FockState, profile: SurfaceProfile) -> FockState {
    let mut out = FockState::zero();
    if !profile.keeps(u.mono) {
        return out;
    }
    for (m, c) in state.iter() {
        for (i, g) in m.gens().iter().enumerate() {
            let Some(class) = u.cup(&g.class).filter(|x| profile.keeps(x.mono)) else {
                continue;
            };
            for (v, mult) in g.part.multiplicities() {
                let part = g.part.without_part(v).expect("part present").with_part(v + n);
                let ng = Gen { class: class.clone(), part };
                out.add_term(m.replaced(i, ng), -(c * BigInt::from(v as u64 * mult as u64)));
            }
        }
        for a in 1..n {
            let ng = Gen {
                class: u.clone(),
                part: Partition::new([a, n - a]),
            };
            out.add_term(m.times(ng), c * half());
        }
    }
    out
}

/// `Σ_ν weights[ν] · Q(ν, u, n)` applied to `state`, using
/// `Q(ν) = Σ_k binom(ν,k) (−1)^{ν−k} D^k q_n(u) D^{ν−k}` and a Horner
/// scheme in `D` so the cost is linear in the top order.
pub(crate) fn derived_series(
    weights: &[BigRational],
    u: &ClassMono,
    n: u32,
    state: &FockState,
    profile: SurfaceProfile,
) -> FockState {
    let top = match weights.iter().rposition(|w| !w.is_zero()) {
        Some(t) => t,
        None => return FockState::zero(),
    };
    if !profile.keeps(u.mono) {
        return FockState::zero();
    }
    let g = Gen {
        class: u.clone(),
        part: Partition::single(n),
    };

    let mut powers = vec![state.clone()];
    for j in 1..=top {
        let next = boundary(&powers[j - 1], profile);
        if next.is_zero() {
            break;
        }
        powers.push(next);
    }

    // V_k = Σ_{ν ≥ k} w_ν binom(ν,k) (−1)^{ν−k} D^{ν−k} S
    let inner = |k: usize| -> FockState {
        let mut v = FockState::zero();
        for (nu, w) in weights.iter().enumerate().skip(k) {
            if w.is_zero() || nu - k >= powers.len() {
                continue;
            }
            let mut coeff = w * BigRational::from_integer(binomial(nu as u64, k as u64));
            if (nu - k) % 2 == 1 {
                coeff = -coeff;
            }
            v.add_scaled(&powers[nu - k], &coeff);
        }
        v
    };

    let mut acc = inner(top).times_gen(&g);
    for k in (0..top).rev() {
        acc = boundary(&acc, profile);
        acc.add_assign(&inner(k).times_gen(&g));
    }
    acc
}
