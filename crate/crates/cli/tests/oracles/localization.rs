//! Torus localization on the Hilbert scheme of two points of a toric surface.

use num::{BigRational, One, Zero};

/// A smooth projective toric surface, given by the tangent weights at its
/// torus-fixed points, together with `χ_top` and `K²`.
pub struct ToricSurface {
    pub fixed: Vec<(i64, i64)>,
    pub euler: i64,
    pub k_squared: i64,
}

impl ToricSurface {
    /// Weights `w` on the three coordinates; generic so no weight vanishes.
    pub fn plane(w: [i64; 3]) -> Self {
        let fixed = (0..3)
            .map(|i| {
                let others: Vec<i64> = (0..3).filter(|&j| j != i).map(|j| w[j] - w[i]).collect();
                (others[0], others[1])
            })
            .collect();
        Self { fixed, euler: 3, k_squared: 9 }
    }

    pub fn quadric(a: i64, b: i64) -> Self {
        let fixed = [(a, b), (a, -b), (-a, b), (-a, -b)].to_vec();
        Self { fixed, euler: 4, k_squared: 8 }
    }

    /// Tangent weights of `S^[2]` at each of its fixed points.
    fn hilb2_fixed(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for (i, &(a, b)) in self.fixed.iter().enumerate() {
            for &(c, d) in &self.fixed[i + 1..] {
                out.push(vec![a, b, c, d]);
            }
            // the two monomial ideals of length two at this point
            out.push(vec![a, b, 2 * b, a - b]);
            out.push(vec![b, a, 2 * a, b - a]);
        }
        out
    }

    /// `∫_{S^[2]} ch_k(T)`, summing `ch_k / e` over fixed points.
    pub fn hilb2_ch(&self, k: u32) -> BigRational {
        let mut total = BigRational::zero();
        let kfact: i64 = (1..=k as i64).product();
        for ws in self.hilb2_fixed() {
            assert!(ws.iter().all(|&w| w != 0), "non-generic weights");
            let ch: BigRational = ws
                .iter()
                .map(|&w| BigRational::from_integer(w.pow(k).into()))
                .fold(BigRational::zero(), |a, b| a + b)
                / BigRational::from_integer(kfact.into());
            let e = ws
                .iter()
                .fold(BigRational::one(), |a, &w| a * BigRational::from_integer(w.into()));
            total += ch / e;
        }
        total
    }
}

/// `(β, δ)` with `∫_{S^[2]} ch_4(T) = β χ(S) + δ K²`, from two surfaces.
pub fn tangent_top_pair() -> (BigRational, BigRational) {
    let p = ToricSurface::plane([0, 2, 7]);
    let q = ToricSurface::quadric(2, 7);
    let (ip, iq) = (p.hilb2_ch(4), q.hilb2_ch(4));
    let r = |n: i64| BigRational::from_integer(n.into());
    let det = r(p.euler * q.k_squared - p.k_squared * q.euler);
    let beta = (&ip * r(q.k_squared) - &iq * r(p.k_squared)) / &det;
    let delta = (&iq * r(p.euler) - &ip * r(q.euler)) / &det;
    (beta, delta)
}
