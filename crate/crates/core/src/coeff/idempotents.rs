//! Primitive idempotents of `F_Δ` and the partial-Frobenius action on them.
//!
//! The decomposition is built one tensor factor at a time. If the partial
//! product `A = ⊗_{β<j} F_β` splits as `⊕ b_i A` with each `b_i A` a field `K`,
//! then `A ⊗ F_p[X]/(g) = ⊕_i K[X]/(g)`, and factoring `g` over each `K`
//! (equal-degree factorization) plus Chinese remaindering refines the
//! idempotents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fdelta::TensorAlgebra;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdempotentDecomposition {
    /// `b_1, ..., b_ℓ` as coordinate vectors in the tensor basis.
    pub idempotents: Vec<Vec<u32>>,
    /// `dim_{F_p} b_j F_Δ` for each `j`.
    pub component_degrees: Vec<usize>,
    /// `frobenius_permutations[α][j] = k` iff `φ_α(b_j) = b_k`.
    pub frobenius_permutations: Vec<Vec<usize>>,
}

impl IdempotentDecomposition {
    pub fn len(&self) -> usize {
        self.idempotents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idempotents.is_empty()
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.idempotents.iter().position(|b| b.as_slice() == e)
    }
}

/// Result of [`phi_orbit_transitivity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub orbits: Vec<Vec<usize>>,
    pub transitive: bool,
}

/// The field `K = b·A` inside a partial tensor product, `|K| = p^f`.
struct ComponentField<'a> {
    alg: &'a TensorAlgebra,
    unit: Vec<u32>,
    f: usize,
}

type KPoly = Vec<Vec<u32>>;

impl ComponentField<'_> {
    fn is_zero(&self, x: &[u32]) -> bool {
        self.alg.is_zero(x)
    }

    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        self.alg.mul(a, b)
    }

    fn inv(&self, x: &[u32]) -> Vec<u32> {
        // x^{q-1} = b for x in K^x, so x^{-1} = b * x^{q-2}.
        let q = (self.alg.p() as u64).pow(self.f as u32);
        self.alg.mul(&self.unit, &self.alg.pow(x, q - 2))
    }

    fn trim(&self, mut a: KPoly) -> KPoly {
        while a.last().is_some_and(|c| self.is_zero(c)) {
            a.pop();
        }
        a
    }

    fn add(&self, a: &KPoly, b: &KPoly) -> KPoly {
        let z = self.alg.zero();
        let n = a.len().max(b.len());
        let r = (0..n)
            .map(|i| self.alg.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.trim(r)
    }

    fn sub(&self, a: &KPoly, b: &KPoly) -> KPoly {
        let z = self.alg.zero();
        let n = a.len().max(b.len());
        let r = (0..n)
            .map(|i| self.alg.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.trim(r)
    }

    fn mul_poly(&self, a: &KPoly, b: &KPoly) -> KPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![self.alg.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                r[i + j] = self.alg.add(&r[i + j], &self.mul(x, y));
            }
        }
        self.trim(r)
    }

    fn divrem(&self, a: &KPoly, b: &KPoly) -> (KPoly, KPoly) {
        let db = b.len() - 1;
        let lead_inv = self.inv(&b[db]);
        let mut r = self.trim(a.clone());
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![self.alg.zero(); r.len() - db];
        while r.len() > db {
            let dr = r.len() - 1;
            let c = self.mul(&r[dr], &lead_inv);
            for (i, bc) in b.iter().enumerate() {
                r[dr - db + i] = self.alg.sub(&r[dr - db + i], &self.mul(&c, bc));
            }
            q[dr - db] = c;
            r = self.trim(r);
        }
        (self.trim(q), r)
    }

    fn rem(&self, a: &KPoly, b: &KPoly) -> KPoly {
        self.divrem(a, b).1
    }

    fn monic(&self, a: &KPoly) -> KPoly {
        let Some(lead) = a.last() else {
            return Vec::new();
        };
        let li = self.inv(lead);
        a.iter().map(|c| self.mul(c, &li)).collect()
    }

    fn gcd(&self, a: &KPoly, b: &KPoly) -> KPoly {
        let mut a = self.trim(a.clone());
        let mut b = self.trim(b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    fn mulmod(&self, a: &KPoly, b: &KPoly, m: &KPoly) -> KPoly {
        self.rem(&self.mul_poly(a, b), m)
    }

    fn powmod(&self, a: &KPoly, mut e: u64, m: &KPoly) -> KPoly {
        let mut r = vec![self.unit.clone()];
        let mut b = self.rem(a, m);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mulmod(&r, &b, m);
            }
            b = self.mulmod(&b, &b, m);
            e >>= 1;
        }
        self.rem(&r, m)
    }

    /// Inverse of `a` modulo `m` (assumed coprime) by extended Euclid.
    fn invmod(&self, a: &KPoly, m: &KPoly) -> KPoly {
        let (mut r0, mut r1) = (m.clone(), self.rem(a, m));
        let (mut s0, mut s1): (KPoly, KPoly) = (Vec::new(), vec![self.unit.clone()]);
        while !r1.is_empty() {
            let (q, r) = self.divrem(&r0, &r1);
            let s = self.sub(&s0, &self.mul_poly(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 is a nonzero constant.
        let c = self.inv(&r0[0]);
        self.rem(&s0.iter().map(|x| self.mul(x, &c)).collect(), m)
    }

    fn random_element(&self, rng: &mut ChaCha8Rng, support: &[usize]) -> Vec<u32> {
        let mut v = self.alg.zero();
        for &i in support {
            v[i] = rng.gen_range(0..self.alg.p());
        }
        self.mul(&self.unit, &v)
    }

    /// Equal-degree factorization of a monic squarefree `g` whose irreducible
    /// factors all have degree `d`.
    fn edf(&self, g: &KPoly, d: usize, rng: &mut ChaCha8Rng, support: &[usize]) -> Vec<KPoly> {
        let deg = g.len() - 1;
        if deg <= d {
            return vec![g.clone()];
        }
        let p = self.alg.p() as u64;
        // Splitting exponent lives in F_{p^{f d}}.
        let e_total = self.f * d;
        loop {
            let h: KPoly = self.trim(
                (0..deg)
                    .map(|_| self.random_element(rng, support))
                    .collect(),
            );
            if h.len() < 2 {
                continue;
            }
            let w = if p == 2 {
                // Absolute trace to F_2: Σ_{i < fd} h^{2^i}.
                let mut acc: KPoly = Vec::new();
                let mut cur = self.rem(&h, g);
                for _ in 0..e_total {
                    acc = self.add(&acc, &cur);
                    cur = self.mulmod(&cur, &cur, g);
                }
                acc
            } else {
                // h^{(p^{fd}-1)/2} = (Π_{i<fd} h^{p^i})^{(p-1)/2}.
                let mut prod = vec![self.unit.clone()];
                let mut cur = self.rem(&h, g);
                for _ in 0..e_total {
                    prod = self.mulmod(&prod, &cur, g);
                    cur = self.powmod(&cur, p, g);
                }
                let s = self.powmod(&prod, (p - 1) / 2, g);
                self.sub(&s, &vec![self.unit.clone()])
            };
            let c = self.gcd(g, &w);
            let dc = c.len().saturating_sub(1);
            if dc > 0 && dc < deg {
                let (q, _) = self.divrem(g, &c);
                let q = self.monic(&q);
                let mut out = self.edf(&c, d, rng, support);
                out.extend(self.edf(&q, d, rng, support));
                return out;
            }
        }
    }
}

fn gcd_usize(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd_usize(b, a % b)
    }
}

/// Degree cap applied to each `n_α` during idempotent computation.
pub const DEFAULT_DEGREE_CAP: usize = 8;

/// Computes the primitive idempotents of `F_Δ` together with their
/// component degrees and the permutation induced by each `φ_α`.
pub fn tensor_idempotents(alg: &TensorAlgebra) -> Result<IdempotentDecomposition> {
    tensor_idempotents_capped(alg, DEFAULT_DEGREE_CAP)
}

pub fn tensor_idempotents_capped(
    alg: &TensorAlgebra,
    degree_cap: usize,
) -> Result<IdempotentDecomposition> {
    let specs = alg.specs();
    if let Some(s) = specs.iter().find(|s| s.n > degree_cap) {
        return Err(Error::DegreeCap(format!(
            "n = {} exceeds cap {degree_cap}",
            s.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1de4);
    let mut comps: Vec<(Vec<u32>, usize)> = vec![(alg.one(), specs[0].n)];
    for j in 1..specs.len() {
        // Coordinates of the partial product ⊗_{β<j}: later axes at index 0.
        let support: Vec<usize> = (0..alg.dim())
            .filter(|&i| alg.multi_index(i)[j..].iter().all(|&x| x == 0))
            .collect();
        let g = &specs[j].modulus;
        let m = specs[j].n;
        let omega = alg.generator(j);
        let omega_pows: Vec<Vec<u32>> = (0..m).map(|k| alg.pow(&omega, k as u64)).collect();
        let mut next = Vec::new();
        for (b, f) in &comps {
            let field = ComponentField {
                alg,
                unit: b.clone(),
                f: *f,
            };
            let s = gcd_usize(*f, m);
            let d = m / s;
            let gk: KPoly = g.iter().map(|&c| alg.scale(b, c)).collect();
            let factors = field.edf(&gk, d, &mut rng, &support);
            debug_assert_eq!(factors.len(), s);
            for gi in &factors {
                let (hi, _) = field.divrem(&gk, gi);
                let ei = field.mulmod(&hi, &field.invmod(&hi, gi), &gk);
                let mut idem = alg.zero();
                for (k, c) in ei.iter().enumerate() {
                    idem = alg.add(&idem, &alg.mul(c, &omega_pows[k]));
                }
                next.push((idem, f * d));
            }
        }
        comps = next;
    }
    comps.sort();
    let idempotents: Vec<Vec<u32>> = comps.iter().map(|(b, _)| b.clone()).collect();
    let component_degrees = comps.iter().map(|(_, f)| *f).collect();
    let mut perms = Vec::with_capacity(specs.len());
    for alpha in 0..specs.len() {
        let perm: Vec<usize> = idempotents
            .iter()
            .map(|b| {
                let img = alg.frobenius(b, alpha, 1);
                idempotents
                    .iter()
                    .position(|c| *c == img)
                    .expect("φ_α permutes the primitive idempotents")
            })
            .collect();
        perms.push(perm);
    }
    Ok(IdempotentDecomposition {
        idempotents,
        component_degrees,
        frobenius_permutations: perms,
    })
}

/// Orbits of the group generated by the partial-Frobenius permutations.
///
/// `φ_s` fixes every idempotent, so these are exactly the orbits of
/// `Φ = (Π_α φ_α^N) / φ_s^N`.
pub fn phi_orbit_transitivity(dec: &IdempotentDecomposition) -> OrbitReport {
    let l = dec.len();
    let mut seen = vec![false; l];
    let mut orbits = Vec::new();
    for start in 0..l {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(j) = stack.pop() {
            for perm in &dec.frobenius_permutations {
                let k = perm[j];
                if !seen[k] {
                    seen[k] = true;
                    orbit.push(k);
                    stack.push(k);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    let transitive = orbits.len() == 1;
    OrbitReport { orbits, transitive }
}

/// Checks orthogonality, completeness, idempotence and `φ_s`-fixedness.
pub fn check_idempotent_axioms(alg: &TensorAlgebra, dec: &IdempotentDecomposition) -> bool {
    let sum = dec
        .idempotents
        .iter()
        .fold(alg.zero(), |acc, b| alg.add(&acc, b));
    if sum != alg.one() {
        return false;
    }
    for (j, bj) in dec.idempotents.iter().enumerate() {
        if alg.mul(bj, bj) != *bj || alg.absolute_frobenius(bj) != *bj {
            return false;
        }
        for bk in &dec.idempotents[j + 1..] {
            if !alg.is_zero(&alg.mul(bj, bk)) {
                return false;
            }
        }
    }
    dec.frobenius_permutations.iter().all(|perm| {
        let mut s = perm.clone();
        s.sort_unstable();
        s.iter().enumerate().all(|(i, &k)| i == k)
    })
}

/// `F_p`-dimension of the ideal `b·F_Δ`.
pub fn component_dimension(alg: &TensorAlgebra, b: &[u32]) -> usize {
    let cols = (0..alg.dim()).map(|j| alg.mul(b, &alg.basis(j))).collect();
    super::fdelta::rank_dense(alg.p(), cols)
}

#[cfg(test)]
mod tests {
    use super::super::fdelta::FiniteFieldSpec;
    use super::*;

    fn alg(p: u64, ns: &[usize]) -> TensorAlgebra {
        TensorAlgebra::new(
            ns.iter()
                .map(|&n| FiniteFieldSpec::standard(p, n).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn f4_tensor_f4_splits_in_two_swapped_by_frobenius() {
        let a = alg(2, &[2, 2]);
        let dec = tensor_idempotents(&a).unwrap();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec.component_degrees, vec![2, 2]);
        assert!(check_idempotent_axioms(&a, &dec));
        assert_eq!(dec.frobenius_permutations[0], vec![1, 0]);
        assert_eq!(dec.frobenius_permutations[1], vec![1, 0]);
        let orbit = phi_orbit_transitivity(&dec);
        assert!(orbit.transitive);
        assert_eq!(orbit.orbits, vec![vec![0, 1]]);
    }

    #[test]
    fn prime_field_factor_gives_single_idempotent() {
        for (p, n) in [(2u64, 3usize), (3, 2), (5, 4)] {
            let a = alg(p, &[1, n]);
            let dec = tensor_idempotents(&a).unwrap();
            assert_eq!(dec.idempotents, vec![a.one()]);
            assert_eq!(dec.component_degrees, vec![n]);
        }
    }

    #[test]
    fn coprime_degrees_do_not_split() {
        let a = alg(2, &[2, 3]);
        let dec = tensor_idempotents(&a).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.component_degrees, vec![6]);
        let b = alg(3, &[2, 3]);
        assert_eq!(tensor_idempotents(&b).unwrap().len(), 1);
    }

    #[test]
    fn components_have_lcm_degree_and_gcd_count() {
        let a = alg(3, &[2, 4]);
        let dec = tensor_idempotents(&a).unwrap();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec.component_degrees, vec![4, 4]);
        for b in &dec.idempotents {
            assert_eq!(component_dimension(&a, b), 4);
        }
        let t = alg(2, &[2, 2, 2]);
        let dec = tensor_idempotents(&t).unwrap();
        assert_eq!(dec.len(), 4);
        assert!(check_idempotent_axioms(&t, &dec));
        assert!(phi_orbit_transitivity(&dec).transitive);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let a = alg(2, &[2, 3]);
        assert!(matches!(
            tensor_idempotents_capped(&a, 2),
            Err(Error::DegreeCap(_))
        ));
    }
}
