//! Degree-0 Chern coefficients from the symmetric-group model of the
//! cohomology of Hilbert schemes of a surface with trivial canonical class.
//!
//! The surface ring is `A = Q[x]/(x²)` with `x` the point class and form
//! `T(x) = −1`. An element of `A{S_n}` is stored as a map from permutations to
//! tensors; a tensor maps the set of points lying on `x`-labelled cycles to a
//! coefficient. Only conjugation-invariant elements occur, so products are
//! computed at one representative per cycle type and transported.

use std::collections::{BTreeMap, HashMap};

use num::{BigInt, BigRational, One, Zero};

use nakajima::combinatorics::{binomial, factorial, partitions_of, Partition};

type Perm = Vec<u8>;
type Tensor = HashMap<u8, BigRational>;
type Element = HashMap<Perm, Tensor>;

/// A commuting Fock monomial: sorted `(part, carries x)` pairs.
pub type FockMono = Vec<(u32, bool)>;
pub type Poly = BTreeMap<FockMono, BigRational>;

fn t_form() -> BigRational {
    -BigRational::one()
}

fn compose(p: &Perm, q: &Perm) -> Perm {
    q.iter().map(|&i| p[i as usize]).collect()
}

fn inverse(p: &Perm) -> Perm {
    let mut r = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        r[j as usize] = i as u8;
    }
    r
}

/// Orbits of the group generated by `gens`, as point masks.
fn orbits(gens: &[&Perm], n: usize) -> Vec<u8> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for g in gens {
        for i in 0..n {
            let (a, b) = (find(&mut parent, i), find(&mut parent, g[i] as usize));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut masks: BTreeMap<usize, u8> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        *masks.entry(r).or_default() |= 1 << i;
    }
    masks.into_values().collect()
}

fn cycles(p: &Perm) -> Vec<Vec<u8>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut c = vec![s as u8];
        seen[s] = true;
        let mut i = p[s] as usize;
        while i != s {
            seen[i] = true;
            c.push(i as u8);
            i = p[i] as usize;
        }
        out.push(c);
    }
    out.sort_by_key(|c| std::cmp::Reverse(c.len()));
    out
}

fn cycle_type(p: &Perm) -> Partition {
    Partition::new(cycles(p).iter().map(|c| c.len() as u32))
}

/// Consecutive blocks, longest first.
fn representative(lambda: &Partition) -> Perm {
    let mut p = Vec::new();
    let mut start = 0u8;
    for &k in lambda.parts() {
        let k = k as u8;
        for i in 0..k {
            p.push(start + (i + 1) % k);
        }
        start += k;
    }
    p
}

/// `τ` with `τ σ0 τ⁻¹ = p`, `σ0` the representative of the type of `p`.
fn conjugator(p: &Perm) -> Perm {
    let mut tau = Vec::with_capacity(p.len());
    for c in cycles(p) {
        tau.extend(c);
    }
    tau
}

fn transport(mask: u8, tau: &Perm) -> u8 {
    (0..tau.len()).filter(|&i| mask & (1 << i) != 0).fold(0, |m, i| m | 1 << tau[i])
}

fn all_perms(n: usize) -> Vec<Perm> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for pos in 0..n {
            let mut q: Perm = p.clone();
            q.insert(pos, (n - 1) as u8);
            out.push(q);
        }
    }
    out
}

/// Multiplies the factors of each fine orbit into the coarse block holding it.
fn mult_to(t: &Tensor, fine: &[u8], coarse: &[u8]) -> Tensor {
    let mut out = Tensor::new();
    'terms: for (&mask, c) in t {
        let mut new = 0u8;
        for &b in coarse {
            let hits = fine.iter().filter(|&&o| o & b != 0 && o & mask != 0).count();
            match hits {
                0 => {}
                1 => new |= b,
                _ => continue 'terms,
            }
        }
        *out.entry(new).or_insert_with(BigRational::zero) += c;
    }
    out
}

/// Comultiplication from each coarse block onto the fine orbits inside it.
fn comult_to(t: &Tensor, coarse: &[u8], fine: &[u8]) -> Tensor {
    let mut out = Tensor::new();
    for (&mask, c) in t {
        let mut partial: Vec<(u8, BigRational)> = vec![(0, c.clone())];
        for &b in coarse {
            let sub: Vec<u8> = fine.iter().copied().filter(|&o| o & b != 0).collect();
            let m = sub.len() as i32;
            let fac = (1..m).fold(BigRational::one(), |f, _| f / t_form());
            let choices: Vec<u8> = if mask & b != 0 { vec![b] } else { sub.iter().map(|&j| b & !j).collect() };
            let mut next = Vec::with_capacity(partial.len() * choices.len());
            for (acc, v) in &partial {
                for &ch in &choices {
                    next.push((acc | ch, v * &fac));
                }
            }
            partial = next;
        }
        for (k, v) in partial {
            *out.entry(k).or_insert_with(BigRational::zero) += v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `(a π)(b ρ)`, landing on `πρ`.
fn pair_product(p: &Perm, a: &Tensor, q: &Perm, b: &Tensor, n: usize) -> Tensor {
    let op = orbits(&[p], n);
    let oq = orbits(&[q], n);
    let big = orbits(&[p, q], n);
    let pq = compose(p, q);
    let opq = orbits(&[&pq], n);
    let a1 = mult_to(a, &op, &big);
    let b1 = mult_to(b, &oq, &big);
    let mut prod = Tensor::new();
    for (ma, ca) in &a1 {
        for (mb, cb) in &b1 {
            if ma & mb == 0 {
                *prod.entry(ma | mb).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
    }
    let euler = BigRational::from_integer(2.into()) / t_form();
    for &b in &big {
        let count = |os: &[u8]| os.iter().filter(|&&o| o & b != 0).count() as i32;
        let g2 = b.count_ones() as i32 + 2 - count(&op) - count(&oq) - count(&opq);
        assert!(g2 % 2 == 0 && g2 >= 0);
        match g2 / 2 {
            0 => {}
            1 => {
                prod = prod
                    .into_iter()
                    .filter(|(m, _)| m & b == 0)
                    .map(|(m, c)| (m | b, c * &euler))
                    .collect();
            }
            _ => return Tensor::new(),
        }
    }
    comult_to(&prod, &big, &opq)
}

struct Group {
    n: usize,
    perms: Vec<Perm>,
}

impl Group {
    fn new(n: usize) -> Self {
        Self { n, perms: all_perms(n) }
    }

    fn product(&self, x: &Element, y: &Element) -> Element {
        let mut out = Element::new();
        for lambda in partitions_of(self.n as u32) {
            let s0 = representative(&lambda);
            let mut t = Tensor::new();
            for (pi, a) in x {
                let rho = compose(&inverse(pi), &s0);
                if let Some(b) = y.get(&rho) {
                    for (k, v) in pair_product(pi, a, &rho, b, self.n) {
                        *t.entry(k).or_insert_with(BigRational::zero) += v;
                    }
                }
            }
            t.retain(|_, v| !v.is_zero());
            if t.is_empty() {
                continue;
            }
            for p in self.perms.iter().filter(|p| cycle_type(p) == lambda) {
                let tau = conjugator(p);
                out.insert(p.clone(), t.iter().map(|(m, c)| (transport(*m, &tau), c.clone())).collect());
            }
        }
        out
    }

    /// Image of a weight-`n` combination of Fock monomials.
    fn image(&self, poly: &Poly) -> Element {
        let mut out = Element::new();
        for p in &self.perms {
            let lambda = cycle_type(p);
            let cs = cycles(p);
            let mut t = Tensor::new();
            for (m, c) in poly {
                let parts = Partition::new(m.iter().map(|(k, _)| *k));
                if parts != lambda {
                    continue;
                }
                let scale = z(&lambda) / profile_count(m);
                // every assignment of the labels of `m` to the cycles of `p`
                for mask in label_masks(&cs, m) {
                    *t.entry(mask).or_insert_with(BigRational::zero) += c * &scale;
                }
            }
            t.retain(|_, v| !v.is_zero());
            if !t.is_empty() {
                out.insert(p.clone(), t);
            }
        }
        out
    }

    fn preimage(&self, x: &Element) -> Poly {
        let mut out = Poly::new();
        for lambda in partitions_of(self.n as u32) {
            let s0 = representative(&lambda);
            let Some(t) = x.get(&s0) else { continue };
            let cs = cycles(&s0);
            for (&mask, c) in t {
                let mut m: FockMono = cs
                    .iter()
                    .map(|cyc| (cyc.len() as u32, mask & (1 << cyc[0]) != 0))
                    .collect();
                m.sort();
                let v = c * profile_count(&m) / z(&lambda);
                match out.get(&m) {
                    Some(old) => assert_eq!(old, &v, "non-invariant element"),
                    None => {
                        out.insert(m, v);
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

fn z(lambda: &Partition) -> BigRational {
    let mut v = BigInt::one();
    for (k, m) in lambda.multiplicities() {
        v *= BigInt::from(k).pow(m as u32) * factorial(m as u64);
    }
    BigRational::from_integer(v)
}

/// `Π_j binom(m_j, k_j)`, `k_j` the number of `x`-labels on parts `j`.
fn profile_count(m: &FockMono) -> BigRational {
    let mut by_part: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for &(k, x) in m {
        let e = by_part.entry(k).or_default();
        e.0 += 1;
        if x {
            e.1 += 1;
        }
    }
    BigRational::from_integer(by_part.values().map(|&(mj, kj)| binomial(mj, kj)).product())
}

/// Masks obtained by distributing the `x`-labels of `m` over cycles of matching length.
fn label_masks(cs: &[Vec<u8>], m: &FockMono) -> Vec<u8> {
    let mut masks = vec![0u8];
    let mut lengths: Vec<u32> = m.iter().map(|(k, _)| *k).collect();
    lengths.dedup();
    for len in lengths {
        let kj = m.iter().filter(|&&(k, x)| k == len && x).count();
        let pool: Vec<u8> = cs
            .iter()
            .filter(|c| c.len() as u32 == len)
            .map(|c| c.iter().fold(0, |a, &i| a | 1 << i))
            .collect();
        let subsets = subsets_of_size(&pool, kj);
        masks = masks.iter().flat_map(|&a| subsets.iter().map(move |&s| a | s)).collect();
    }
    masks
}

fn subsets_of_size(pool: &[u8], k: usize) -> Vec<u8> {
    if k == 0 {
        return vec![0];
    }
    if pool.len() < k {
        return Vec::new();
    }
    let mut out: Vec<u8> = subsets_of_size(&pool[1..], k - 1).into_iter().map(|s| s | pool[0]).collect();
    out.extend(subsets_of_size(&pool[1..], k));
    out
}

fn poly_mul(a: &Poly, b: &Poly, max_weight: u32) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = ma.clone();
            m.extend(mb.iter().copied());
            if m.iter().map(|(k, _)| k).sum::<u32>() > max_weight {
                continue;
            }
            m.sort();
            *out.entry(m).or_insert_with(BigRational::zero) += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `log(1 + s)` for `s` without constant term, truncated at `max_weight`.
fn poly_log1p(s: &Poly, max_weight: u32) -> Poly {
    let mut out = Poly::new();
    let mut power: Poly = [(Vec::new(), BigRational::one())].into();
    for j in 1..=max_weight as i64 {
        power = poly_mul(&power, s, max_weight);
        let c = BigRational::new(if j % 2 == 1 { 1.into() } else { (-1).into() }, j.into());
        for (m, v) in &power {
            *out.entry(m.clone()).or_insert_with(BigRational::zero) += v * &c;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Weight-`n` part of `exp(Σ_k (−1)^{k−1}/k q_k(1))`, the total Chern class
/// of `O^[n]`.
fn rank_one_chern(n: u32) -> Poly {
    partitions_of(n)
        .into_iter()
        .map(|lambda| {
            let sign: i64 = if (lambda.weight() - lambda.length() as u64).is_multiple_of(2) { 1 } else { -1 };
            let m: FockMono = lambda.parts().iter().rev().map(|&k| (k, false)).collect();
            (m, BigRational::from_integer(sign.into()) / z(&lambda))
        })
        .collect()
}

/// Result of one extraction.
pub struct Extraction {
    /// Coefficient of `q_λ(1)` in the exponent.
    pub unit_column: BTreeMap<Partition, BigRational>,
    /// Exponent monomials with two or more `1`-labels, or single-label
    /// monomials inconsistent with a Künneth split.
    pub nonlinear: Vec<FockMono>,
}

/// Exponent coefficients of `Σ_n c(O^{⊕r}^[n])` through `max_weight`.
pub fn trivial_chern(rank: u32, max_weight: u32) -> Extraction {
    let mut series = Poly::new();
    for n in 1..=max_weight {
        let g = Group::new(n as usize);
        let c = g.image(&rank_one_chern(n));
        let mut p = c.clone();
        for _ in 1..rank {
            p = g.product(&p, &c);
        }
        series.extend(g.preimage(&p));
    }
    let log = poly_log1p(&series, max_weight);
    let mut unit_column = BTreeMap::new();
    let mut nonlinear = Vec::new();
    for (m, c) in &log {
        let ones: Vec<u32> = m.iter().filter(|(_, x)| !x).map(|(k, _)| *k).collect();
        match ones.len() {
            0 => {}
            1 => {
                let lambda = Partition::new(m.iter().map(|(k, _)| *k));
                let mult = m.iter().filter(|(k, _)| *k == ones[0]).count() as i64;
                let v = c / BigRational::from_integer(mult.into());
                match unit_column.get(&lambda) {
                    Some(old) if old != &v => nonlinear.push(m.clone()),
                    _ => {
                        unit_column.insert(lambda, v);
                    }
                }
            }
            _ => nonlinear.push(m.clone()),
        }
    }
    Extraction { unit_column, nonlinear }
}

/// `Φ(c(O^[n]))` is the signed sum of all permutations with trivial labels.
pub fn rank_one_is_sign_sum(n: usize) -> bool {
    let g = Group::new(n);
    let c = g.image(&rank_one_chern(n as u32));
    g.perms.iter().all(|p| {
        let odd = cycles(p).iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 1;
        let want = BigRational::from_integer(if odd { (-1).into() } else { 1.into() });
        c.get(p).map(|t| t.len() == 1 && t.get(&0) == Some(&want)).unwrap_or(false)
    })
}
