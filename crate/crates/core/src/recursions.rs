//! Recursions producing Chern characters and Chern classes of tautological
//! bundles and the Chern character of the tangent bundle, one conformal
//! weight at a time.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

use crate::combinatorics::{binomial, factorial};
use crate::fock::{
    Derivation, FockError, FockState, Gen, Monomial, NormalizeCtx, Normalizer,
};
use crate::series::{SeriesError, WeightSeries};
use crate::surface::{
    kunneth_split, ClassMono, IdSource, MarkerId, Mono, SurfaceClass, SurfaceError, SurfaceProfile,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecursionError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("rank must be at least 1")]
    ZeroRank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionConfig {
    pub surface_profile: SurfaceProfile,
    pub max_weight: u64,
}

impl Default for RecursionConfig {
    fn default() -> Self {
        Self {
            surface_profile: SurfaceProfile::Generic,
            max_weight: 4,
        }
    }
}

/// Marker ids handed out to memo keys; no [`IdSource`] namespace reaches them.
const CANONICAL_BASE: u64 = u64::MAX - (1 << 20);

type ClassKey = Vec<(ClassMono, BigRational)>;

/// Renames the markers of `c` to canonical ids; returns the renamed class and
/// the map back.
fn canonicalize(c: &SurfaceClass) -> (SurfaceClass, BTreeMap<MarkerId, MarkerId>) {
    let mut ids: Vec<MarkerId> = c.iter().flat_map(|(m, _)| m.markers.iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    let fwd: BTreeMap<MarkerId, MarkerId> = ids
        .iter()
        .enumerate()
        .map(|(k, id)| (*id, MarkerId(CANONICAL_BASE + k as u64)))
        .collect();
    let back = fwd.iter().map(|(a, b)| (*b, *a)).collect();
    let renamed = SurfaceClass::from_terms(c.iter().map(|(m, k)| (k.clone(), m.rename_markers(&fwd))));
    (renamed, back)
}

fn key(c: &SurfaceClass) -> ClassKey {
    c.iter().map(|(m, k)| (m.clone(), k.clone())).collect()
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inv_factorial(n: u64) -> BigRational {
    BigRational::new(BigInt::one(), factorial(n))
}

fn sign(nu: usize) -> BigRational {
    if nu.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// `q_1(1)^k |0⟩`.
fn q1_power(k: u32) -> FockState {
    FockState::monomial(
        Monomial::from_gens((0..k).map(|_| Gen::nakajima(Mono::I, 1))),
        BigRational::one(),
    )
}

/// `ch(F) = r + c1 + (c1² − 2c2)/2` for a bundle with symbolic Chern classes.
pub fn chern_character(rank: u32) -> SurfaceClass {
    SurfaceClass::from_terms([
        (BigRational::from_integer(rank.into()), ClassMono::plain(Mono::I)),
        (BigRational::one(), ClassMono::plain(Mono::C)),
        (frac(1, 2), ClassMono::plain(Mono::C2)),
        (-BigRational::one(), ClassMono::plain(Mono::D)),
    ])
}

/// Owns a normalizer, a private id namespace and the memo tables. Calls on
/// one engine are sequential; run independent engines for concurrency.
#[derive(Debug)]
pub struct Engine {
    config: RecursionConfig,
    normalizer: Arc<dyn Normalizer>,
    ids: IdSource,
    ch_memo: HashMap<(ClassKey, u32, bool), FockState>,
    chern_memo: HashMap<(u32, ClassKey, ClassKey), Vec<FockState>>,
    tangent_memo: Vec<FockState>,
}

impl Engine {
    pub fn new(config: RecursionConfig) -> Self {
        Self::with_normalizer(config, Arc::new(Derivation), 1)
    }

    pub fn with_normalizer(config: RecursionConfig, normalizer: Arc<dyn Normalizer>, namespace: u32) -> Self {
        Self {
            config,
            normalizer,
            ids: IdSource::with_namespace(namespace),
            ch_memo: HashMap::new(),
            chern_memo: HashMap::new(),
            tangent_memo: vec![FockState::zero()],
        }
    }

    pub fn config(&self) -> RecursionConfig {
        self.config
    }

    pub fn normalizer_name(&self) -> &str {
        self.normalizer.name()
    }

    fn derived(
        &self,
        weights: &[BigRational],
        class: &ClassMono,
        state: &FockState,
    ) -> Result<FockState, FockError> {
        let ctx = NormalizeCtx {
            profile: self.config.surface_profile,
            ids: &self.ids,
        };
        self.normalizer.apply_derived_series(weights, class, 1, state, &ctx)
    }

    /// `ch(F^[n])` for `ch(F) = c`. `c` may carry Künneth halves, which stay unpaired.
    pub fn ch_taut(&mut self, c: &SurfaceClass, n: u32) -> Result<FockState, RecursionError> {
        self.ch_generic(c, n, false)
    }

    /// `ch((F^[n])^∨)`-type recursion: the ν-th derived term carries `(−1)^ν`.
    pub fn ch_taut_dual(&mut self, c: &SurfaceClass, n: u32) -> Result<FockState, RecursionError> {
        self.ch_generic(c, n, true)
    }

    fn ch_generic(&mut self, c: &SurfaceClass, n: u32, dual: bool) -> Result<FockState, RecursionError> {
        let (canon, back) = canonicalize(c);
        let s = self.ch_canonical(&canon, n, dual)?;
        Ok(if back.is_empty() { s } else { s.rename_markers(&back) })
    }

    fn ch_canonical(&mut self, c: &SurfaceClass, n: u32, dual: bool) -> Result<FockState, RecursionError> {
        if n == 0 {
            return Ok(FockState::zero());
        }
        let k = (key(c), n, dual);
        if let Some(s) = self.ch_memo.get(&k) {
            return Ok(s.clone());
        }
        let prev = self.ch_canonical(c, n - 1, dual)?;
        let mut out = prev
            .times_gen(&Gen::nakajima(Mono::I, 1))
            .scale(&frac(1, n as i64));

        let weights: Vec<BigRational> = (0..=2 * n as usize)
            .map(|nu| {
                let w = inv_factorial(nu as u64);
                if dual {
                    w * sign(nu)
                } else {
                    w
                }
            })
            .collect();
        let p = q1_power(n - 1);
        let scale = inv_factorial(n as u64);
        for (cls, coeff) in c.iter() {
            let s = self.derived(&weights, cls, &p)?;
            out.add_scaled(&s, &(coeff * &scale));
        }
        self.ch_memo.insert(k, out.clone());
        Ok(out)
    }

    /// Total Chern class `c(F^[n])` of a rank-`r` bundle with `c_1 = c1`, `c_2 = c2`.
    pub fn chern_taut(
        &mut self,
        r: u32,
        c1: &SurfaceClass,
        c2: &SurfaceClass,
        n: u32,
    ) -> Result<FockState, RecursionError> {
        if r == 0 {
            return Err(RecursionError::ZeroRank);
        }
        let k = (r, key(c1), key(c2));
        let mut chain = self
            .chern_memo
            .remove(&k)
            .unwrap_or_else(|| vec![FockState::vacuum()]);
        let result = self.extend_chern(&mut chain, r, c1, c2, n);
        self.chern_memo.insert(k, chain);
        result
    }

    fn extend_chern(
        &self,
        chain: &mut Vec<FockState>,
        r: u32,
        c1: &SurfaceClass,
        c2: &SurfaceClass,
        n: u32,
    ) -> Result<FockState, RecursionError> {
        let one = SurfaceClass::one();
        let mut blocks: Vec<(&SurfaceClass, Vec<BigRational>)> = vec![(&one, binomial_row(r))];
        if r >= 1 {
            blocks.push((c1, binomial_row(r - 1)));
        }
        if r >= 2 {
            blocks.push((c2, binomial_row(r - 2)));
        }
        while chain.len() <= n as usize {
            let m = chain.len() as i64;
            let prev = chain.last().expect("vacuum seed");
            let mut next = FockState::zero();
            for (cls, weights) in &blocks {
                for (cm, coeff) in cls.iter() {
                    let s = self.derived(weights, cm, prev)?;
                    next.add_scaled(&s, coeff);
                }
            }
            chain.push(next.scale(&frac(1, m)));
        }
        Ok(chain[n as usize].clone())
    }

    /// `ch(T S^[n])`.
    pub fn ch_tangent(&mut self, n: u32) -> Result<FockState, RecursionError> {
        while self.tangent_memo.len() <= n as usize {
            let m = self.tangent_memo.len() as u32;
            let s = self.tangent_step(m)?;
            self.tangent_memo.push(s);
        }
        Ok(self.tangent_memo[n as usize].clone())
    }

    fn tangent_step(&mut self, n: u32) -> Result<FockState, RecursionError> {
        let profile = self.config.surface_profile;
        let top = 2 * n as usize;
        let nf = inv_factorial(n as u64);
        let p = q1_power(n - 1);

        let mut out = self.tangent_memo[n as usize - 1]
            .times_gen(&Gen::nakajima(Mono::I, 1))
            .scale(&frac(1, n as i64));
        if profile.keeps(Mono::E) {
            out.add_scaled(&p.times_gen(&Gen::nakajima(Mono::E, 1)), &-nf.clone());
        }

        // Q(ν, 1 + (−1)^ν (1 − K + K²/2), 1) q_1(1)^{n−1}|0⟩
        let direct: [(Mono, BigRational, BigRational); 3] = [
            (Mono::I, BigRational::one(), BigRational::one()),
            (Mono::K, BigRational::zero(), -BigRational::one()),
            (Mono::K2, BigRational::zero(), frac(1, 2)),
        ];
        for (mono, even, alt) in direct {
            let weights: Vec<BigRational> = (0..=top)
                .map(|nu| (&even + &alt * sign(nu)) * inv_factorial(nu as u64) * &nf)
                .collect();
            let s = self.derived(&weights, &ClassMono::plain(mono), &p)?;
            out.add_assign(&s);
        }

        // Künneth terms: each split class u gets one fresh pair; the first half
        // rides on the derived operator, the second enters CH or CH∨.
        let prefactor = BigRational::from_integer(factorial(n as u64 - 1)) * &nf;
        let halves: [(Mono, BigRational, BigRational); 4] = [
            (Mono::I, -BigRational::one(), -BigRational::one()),
            (Mono::K, frac(-1, 2), frac(1, 2)),
            (Mono::K2, frac(-1, 6), frac(-1, 6)),
            (Mono::E, frac(1, 12), frac(1, 12)),
        ];
        for (mono, dual_w, direct_w) in halves {
            if !profile.keeps(mono) {
                continue;
            }
            for dual in [true, false] {
                let pair = kunneth_split(&SurfaceClass::mono(mono), &self.ids)?;
                let inner = self.ch_generic(&SurfaceClass::from_class(pair.second.clone()), n - 1, dual)?;
                if inner.is_zero() {
                    continue;
                }
                let weights: Vec<BigRational> = (0..=top)
                    .map(|nu| {
                        let w = if dual { dual_w.clone() } else { &direct_w * sign(nu) };
                        w * inv_factorial(nu as u64) * &prefactor
                    })
                    .collect();
                let s = self.derived(&weights, &pair.first, &inner)?;
                out.add_assign(&s);
            }
        }
        Ok(out.close(profile, |_| false)?)
    }

    /// `Σ_{n ≤ max_weight} ch(F^[n])`, zero in weight 0.
    pub fn ch_taut_series(&mut self, c: &SurfaceClass, dual: bool) -> Result<WeightSeries, RecursionError> {
        let w = self.config.max_weight;
        let mut s = WeightSeries::zero(w);
        for n in 1..=w as u32 {
            let st = self.ch_generic(c, n, dual)?;
            s.set(n as u64, st);
        }
        Ok(s)
    }

    /// `Σ_{n ≤ max_weight} c(F^[n])`, the vacuum in weight 0.
    pub fn chern_taut_series(
        &mut self,
        r: u32,
        c1: &SurfaceClass,
        c2: &SurfaceClass,
    ) -> Result<WeightSeries, RecursionError> {
        let w = self.config.max_weight;
        let mut s = WeightSeries::vacuum(w);
        for n in 1..=w as u32 {
            let st = self.chern_taut(r, c1, c2, n)?;
            s.set(n as u64, st);
        }
        Ok(s)
    }

    /// `Σ_{n ≤ max_weight} ch(T S^[n])`, zero in weight 0.
    pub fn ch_tangent_series(&mut self) -> Result<WeightSeries, RecursionError> {
        let w = self.config.max_weight;
        let mut s = WeightSeries::zero(w);
        for n in 1..=w as u32 {
            let st = self.ch_tangent(n)?;
            s.set(n as u64, st);
        }
        Ok(s)
    }
}

fn binomial_row(r: u32) -> Vec<BigRational> {
    (0..=r as u64)
        .map(|nu| BigRational::from_integer(binomial(r as u64, nu)))
        .collect()
}
