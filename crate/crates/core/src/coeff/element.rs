use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CoefficientAlgebra;
use crate::error::{Error, Result};
use crate::fp::{self, poly};

/// Polynomial in the transcendentals of a single factor, `F_p` coefficients.
/// Keys are exponent vectors local to that factor's group.
pub type MPoly = BTreeMap<Vec<u32>, u32>;

/// An element of `k_Δ` as `numerator / Π_α den_α`.
///
/// The numerator is an `F_Δ`-combination of Laurent monomials in all the
/// transcendentals. Each `den_α` is a polynomial in the `t_{α,*}` only and is
/// kept monic with nonzero constant term. Missing `den_α` means 1. For
/// factors with one transcendental the fraction is fully reduced, so the
/// representation is canonical there; use [`CoefficientAlgebra::equal`] for
/// comparisons in general.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CoefficientElement {
    pub(crate) num: BTreeMap<Vec<i32>, Vec<u32>>,
    pub(crate) den: BTreeMap<usize, MPoly>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitStatus {
    Unit,
    ZeroDivisorOrZero,
    Undecided,
}

impl CoefficientElement {
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &Vec<u32>)> {
        self.num.iter()
    }

    pub fn has_denominator(&self) -> bool {
        !self.den.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.num.len()
    }
}

fn mpoly_mul(p: u32, a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = MPoly::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let v = out.entry(e).or_insert(0);
            *v = fp::add(p, *v, fp::mul(p, ca, cb));
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn mpoly_to_dense(a: &MPoly) -> Vec<u32> {
    let deg = a.keys().map(|k| k[0] as usize).max().unwrap_or(0);
    let mut v = vec![0u32; deg + 1];
    for (k, &c) in a {
        v[k[0] as usize] = c;
    }
    poly::trim(v)
}

fn dense_to_mpoly(a: &[u32]) -> MPoly {
    a.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (vec![i as u32], c))
        .collect()
}

impl CoefficientAlgebra {
    pub fn zero(&self) -> CoefficientElement {
        CoefficientElement::default()
    }

    pub fn one(&self) -> CoefficientElement {
        self.from_fdelta(self.fdelta.one())
    }

    pub fn scalar(&self, c: u32) -> CoefficientElement {
        self.from_fdelta(self.fdelta.scalar(c % self.p()))
    }

    pub fn from_fdelta(&self, f: Vec<u32>) -> CoefficientElement {
        self.monomial(vec![0; self.num_t()], f)
    }

    pub fn monomial(&self, exps: Vec<i32>, coeff: Vec<u32>) -> CoefficientElement {
        assert_eq!(exps.len(), self.num_t());
        let mut e = CoefficientElement::default();
        if !self.fdelta.is_zero(&coeff) {
            e.num.insert(exps, coeff);
        }
        e
    }

    /// The transcendental `t_i` (global index).
    pub fn t(&self, i: usize) -> CoefficientElement {
        let mut exps = vec![0; self.num_t()];
        exps[i] = 1;
        self.monomial(exps, self.fdelta.one())
    }

    /// Generator of the `alpha` finite-field factor, embedded in `k_Δ`.
    pub fn field_generator(&self, alpha: usize) -> CoefficientElement {
        self.from_fdelta(self.fdelta.generator(alpha))
    }

    pub fn is_zero(&self, a: &CoefficientElement) -> bool {
        a.num.is_empty()
    }

    pub fn is_one(&self, a: &CoefficientElement) -> bool {
        self.as_fdelta(a).is_some_and(|f| f == self.fdelta.one())
    }

    /// The `F_Δ` value of a constant without denominator.
    pub fn as_fdelta(&self, a: &CoefficientElement) -> Option<Vec<u32>> {
        if !a.den.is_empty() {
            return None;
        }
        match a.num.len() {
            0 => Some(self.fdelta.zero()),
            1 => {
                let (k, v) = a.num.iter().next().unwrap();
                k.iter().all(|&x| x == 0).then(|| v.clone())
            }
            _ => None,
        }
    }

    /// The value as an element of `F_p` if it is one.
    pub fn as_prime_scalar(&self, a: &CoefficientElement) -> Option<u32> {
        let f = self.as_fdelta(a)?;
        self.fdelta.is_scalar(&f).then(|| f[0])
    }

    pub fn equal(&self, a: &CoefficientElement, b: &CoefficientElement) -> bool {
        if a.den.is_empty() && b.den.is_empty() {
            return a.num == b.num;
        }
        self.is_zero(&self.sub(a, b))
    }

    fn num_add_into(&self, acc: &mut BTreeMap<Vec<i32>, Vec<u32>>, k: &[i32], v: &[u32]) {
        match acc.get_mut(k) {
            Some(cur) => {
                *cur = self.fdelta.add(cur, v);
                if self.fdelta.is_zero(cur) {
                    acc.remove(k);
                }
            }
            None => {
                if !self.fdelta.is_zero(v) {
                    acc.insert(k.to_vec(), v.to_vec());
                }
            }
        }
    }

    fn num_mul(
        &self,
        a: &BTreeMap<Vec<i32>, Vec<u32>>,
        b: &BTreeMap<Vec<i32>, Vec<u32>>,
    ) -> BTreeMap<Vec<i32>, Vec<u32>> {
        let mut out = BTreeMap::new();
        for (ka, va) in a {
            for (kb, vb) in b {
                let k: Vec<i32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                let v = self.fdelta.mul(va, vb);
                self.num_add_into(&mut out, &k, &v);
            }
        }
        out
    }

    /// `den_α` as a numerator-shaped map.
    fn den_as_num(&self, alpha: usize, d: &MPoly) -> BTreeMap<Vec<i32>, Vec<u32>> {
        let g = self.group(alpha);
        d.iter()
            .map(|(k, &c)| {
                let mut e = vec![0i32; self.num_t()];
                for (i, &x) in g.clone().zip(k) {
                    e[i] = x as i32;
                }
                (e, self.fdelta.scalar(c))
            })
            .collect()
    }

    pub fn add(&self, a: &CoefficientElement, b: &CoefficientElement) -> CoefficientElement {
        if a.den == b.den {
            let mut num = a.num.clone();
            for (k, v) in &b.num {
                self.num_add_into(&mut num, k, v);
            }
            return self.normalize(CoefficientElement {
                num,
                den: a.den.clone(),
            });
        }
        // Cross multiply, sharing the common per-factor denominators.
        let mut num_a = a.num.clone();
        let mut num_b = b.num.clone();
        let mut den = BTreeMap::new();
        let keys: BTreeSet<usize> = a.den.keys().chain(b.den.keys()).copied().collect();
        for alpha in keys {
            match (a.den.get(&alpha), b.den.get(&alpha)) {
                (Some(x), Some(y)) if x == y => {
                    den.insert(alpha, x.clone());
                }
                (x, y) => {
                    if let Some(y) = y {
                        num_a = self.num_mul(&num_a, &self.den_as_num(alpha, y));
                    }
                    if let Some(x) = x {
                        num_b = self.num_mul(&num_b, &self.den_as_num(alpha, x));
                    }
                    let prod = match (x, y) {
                        (Some(x), Some(y)) => mpoly_mul(self.p(), x, y),
                        (Some(x), None) => x.clone(),
                        (None, Some(y)) => y.clone(),
                        (None, None) => unreachable!(),
                    };
                    den.insert(alpha, prod);
                }
            }
        }
        for (k, v) in &num_b {
            self.num_add_into(&mut num_a, k, v);
        }
        self.normalize(CoefficientElement { num: num_a, den })
    }

    pub fn neg(&self, a: &CoefficientElement) -> CoefficientElement {
        CoefficientElement {
            num: a
                .num
                .iter()
                .map(|(k, v)| (k.clone(), self.fdelta.neg(v)))
                .collect(),
            den: a.den.clone(),
        }
    }

    pub fn sub(&self, a: &CoefficientElement, b: &CoefficientElement) -> CoefficientElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &CoefficientElement, c: u32) -> CoefficientElement {
        let c = c % self.p();
        if c == 0 {
            return self.zero();
        }
        CoefficientElement {
            num: a
                .num
                .iter()
                .map(|(k, v)| (k.clone(), self.fdelta.scale(v, c)))
                .collect(),
            den: a.den.clone(),
        }
    }

    pub fn mul_fdelta(&self, a: &CoefficientElement, f: &[u32]) -> CoefficientElement {
        let mut num = BTreeMap::new();
        for (k, v) in &a.num {
            let w = self.fdelta.mul(v, f);
            if !self.fdelta.is_zero(&w) {
                num.insert(k.clone(), w);
            }
        }
        if num.is_empty() {
            return self.zero();
        }
        CoefficientElement {
            num,
            den: a.den.clone(),
        }
    }

    pub fn mul(&self, a: &CoefficientElement, b: &CoefficientElement) -> CoefficientElement {
        if a.num.is_empty() || b.num.is_empty() {
            return self.zero();
        }
        let num = self.num_mul(&a.num, &b.num);
        if a.den.is_empty() && b.den.is_empty() {
            return CoefficientElement {
                num,
                den: BTreeMap::new(),
            };
        }
        let mut den = a.den.clone();
        for (alpha, d) in &b.den {
            let prod = match den.get(alpha) {
                Some(x) => mpoly_mul(self.p(), x, d),
                None => d.clone(),
            };
            den.insert(*alpha, prod);
        }
        self.normalize(CoefficientElement { num, den })
    }

    pub fn pow(&self, a: &CoefficientElement, mut e: u64) -> CoefficientElement {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    /// Multiplies by the Laurent monomial `t^m`.
    pub fn shift(&self, a: &CoefficientElement, m: &[i32]) -> CoefficientElement {
        CoefficientElement {
            num: a
                .num
                .iter()
                .map(|(k, v)| (k.iter().zip(m).map(|(x, y)| x + y).collect(), v.clone()))
                .collect(),
            den: a.den.clone(),
        }
    }

    fn normalize(&self, mut a: CoefficientElement) -> CoefficientElement {
        if a.num.is_empty() {
            return self.zero();
        }
        let p = self.p();
        let dens: Vec<(usize, MPoly)> = std::mem::take(&mut a.den).into_iter().collect();
        for (alpha, d) in dens {
            let g = self.group(alpha);
            let mut d = d;
            d.retain(|_, c| *c != 0);
            assert!(!d.is_empty(), "zero denominator");
            // Move the monomial content of d into the numerator.
            let local = g.len();
            let content: Vec<u32> = (0..local)
                .map(|i| d.keys().map(|k| k[i]).min().unwrap())
                .collect();
            if content.iter().any(|&c| c > 0) {
                d = d
                    .into_iter()
                    .map(|(k, c)| (k.iter().zip(&content).map(|(x, y)| x - y).collect(), c))
                    .collect();
                let mut m = vec![0i32; self.num_t()];
                for (i, &c) in g.clone().zip(&content) {
                    m[i] = -(c as i32);
                }
                a = self.shift(&a, &m);
            }
            // Make d monic (largest key has coefficient 1).
            let lead = *d.values().next_back().unwrap();
            if lead != 1 {
                let li = fp::inv(p, lead);
                d.values_mut().for_each(|c| *c = fp::mul(p, *c, li));
                a = self.scale(&a, li);
            }
            if d.len() == 1 {
                // d is now 1.
                continue;
            }
            if local == 1 {
                let (num, rest) = self.reduce_univariate(&a.num, g.start, &mpoly_to_dense(&d));
                a.num = num;
                if rest.len() > 1 {
                    a.den.insert(alpha, dense_to_mpoly(&rest));
                }
            } else {
                a.den.insert(alpha, d);
            }
        }
        a
    }

    /// Cancels `gcd(d, numerator)` in the single variable at position `var`.
    fn reduce_univariate(
        &self,
        num: &BTreeMap<Vec<i32>, Vec<u32>>,
        var: usize,
        d: &[u32],
    ) -> (BTreeMap<Vec<i32>, Vec<u32>>, Vec<u32>) {
        let p = self.p();
        let shift = num.keys().map(|k| k[var]).min().unwrap_or(0);
        // Coordinate polynomials indexed by (rest monomial, F_Δ coordinate).
        let mut coords: BTreeMap<(Vec<i32>, usize), Vec<u32>> = BTreeMap::new();
        for (k, v) in num {
            let mut rest = k.clone();
            rest[var] = 0;
            let pos = (k[var] - shift) as usize;
            for (c, &x) in v.iter().enumerate() {
                if x != 0 {
                    let entry = coords.entry((rest.clone(), c)).or_default();
                    if entry.len() <= pos {
                        entry.resize(pos + 1, 0);
                    }
                    entry[pos] = x;
                }
            }
        }
        let mut g = d.to_vec();
        for c in coords.values() {
            if g.len() <= 1 {
                break;
            }
            g = poly::gcd(p, &g, c);
        }
        if g.len() <= 1 {
            return (num.clone(), d.to_vec());
        }
        let new_d = poly::divrem(p, d, &g).0;
        let mut out: BTreeMap<Vec<i32>, Vec<u32>> = BTreeMap::new();
        let dim = self.fdelta.dim();
        for ((rest, c), f) in coords {
            let q = poly::divrem(p, &f, &g).0;
            for (i, &x) in q.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let mut k = rest.clone();
                k[var] = i as i32 + shift;
                out.entry(k).or_insert_with(|| vec![0; dim])[c] = x;
            }
        }
        (out, new_d)
    }

    /// The relative Frobenius `φ_α^e` on coefficients: `x ↦ x^{p^e}` on
    /// `F_{p^{n_α}}` and `t_{α,i} ↦ t_{α,i}^{p^e}`, identity on other factors.
    pub fn frobenius_alpha(
        &self,
        a: &CoefficientElement,
        alpha: usize,
        e: u32,
    ) -> CoefficientElement {
        if e == 0 {
            return a.clone();
        }
        let q = (self.p() as i32).pow(e);
        let g = self.group(alpha);
        let num = a
            .num
            .iter()
            .map(|(k, v)| {
                let mut k = k.clone();
                for i in g.clone() {
                    k[i] *= q;
                }
                (k, self.fdelta.frobenius(v, alpha, e))
            })
            .collect();
        let den = a
            .den
            .iter()
            .map(|(&b, d)| {
                if b != alpha {
                    return (b, d.clone());
                }
                let d2 = d
                    .iter()
                    .map(|(k, &c)| (k.iter().map(|x| x * q as u32).collect(), c))
                    .collect();
                (b, d2)
            })
            .collect();
        CoefficientElement { num, den }
    }

    /// The absolute Frobenius `x ↦ x^p`.
    pub fn absolute_frobenius(&self, a: &CoefficientElement) -> CoefficientElement {
        (0..self.num_factors()).fold(a.clone(), |acc, alpha| self.frobenius_alpha(&acc, alpha, 1))
    }

    /// Applies the absolute Frobenius of `F_Δ` to the coefficients only,
    /// leaving the transcendentals fixed.
    fn conjugate_coefficients(
        &self,
        num: &BTreeMap<Vec<i32>, Vec<u32>>,
    ) -> BTreeMap<Vec<i32>, Vec<u32>> {
        num.iter()
            .map(|(k, v)| (k.clone(), self.fdelta.absolute_frobenius(v)))
            .collect()
    }

    /// The numerator restricted to the `j`-th idempotent component.
    fn component_num(&self, a: &CoefficientElement, j: usize) -> BTreeMap<Vec<i32>, Vec<u32>> {
        let b = &self.decomposition.idempotents[j];
        let mut out = BTreeMap::new();
        for (k, v) in &a.num {
            let w = self.fdelta.mul(v, b);
            if !self.fdelta.is_zero(&w) {
                out.insert(k.clone(), w);
            }
        }
        out
    }

    /// Projection `b_j · a`.
    pub fn component(&self, a: &CoefficientElement, j: usize) -> CoefficientElement {
        let num = self.component_num(a, j);
        if num.is_empty() {
            return self.zero();
        }
        CoefficientElement {
            num,
            den: a.den.clone(),
        }
    }

    /// Splits a nonzero component numerator as `t^{m0} · Q` and returns the
    /// set of factors whose transcendentals occur in `Q`.
    fn content_split(
        &self,
        num: &BTreeMap<Vec<i32>, Vec<u32>>,
    ) -> (Vec<i32>, BTreeMap<Vec<i32>, Vec<u32>>, BTreeSet<usize>) {
        let n = self.num_t();
        let m0: Vec<i32> = (0..n)
            .map(|i| num.keys().map(|k| k[i]).min().unwrap())
            .collect();
        let mut groups = BTreeSet::new();
        let q = num
            .iter()
            .map(|(k, v)| {
                let k2: Vec<i32> = k.iter().zip(&m0).map(|(x, y)| x - y).collect();
                for (i, &x) in k2.iter().enumerate() {
                    if x != 0 {
                        groups.insert(self.owner(i));
                    }
                }
                (k2, v.clone())
            })
            .collect();
        (m0, q, groups)
    }

    /// Unit test inside the component `b_j k_Δ`.
    pub fn is_unit_in_component(&self, a: &CoefficientElement, j: usize) -> UnitStatus {
        let num = self.component_num(a, j);
        if num.is_empty() {
            return UnitStatus::ZeroDivisorOrZero;
        }
        let (_, q, groups) = self.content_split(&num);
        if q.len() == 1 || groups.len() <= 1 {
            UnitStatus::Unit
        } else {
            UnitStatus::Undecided
        }
    }

    /// Syntactic unit test: each idempotent component of the numerator must
    /// be a monomial times a polynomial in a single factor's transcendentals.
    pub fn is_unit(&self, a: &CoefficientElement) -> UnitStatus {
        if a.num.is_empty() {
            return UnitStatus::ZeroDivisorOrZero;
        }
        let mut status = UnitStatus::Unit;
        for j in 0..self.decomposition.len() {
            match self.is_unit_in_component(a, j) {
                UnitStatus::ZeroDivisorOrZero => return UnitStatus::ZeroDivisorOrZero,
                UnitStatus::Undecided => status = UnitStatus::Undecided,
                UnitStatus::Unit => {}
            }
        }
        status
    }

    /// Inverse of the `j`-th component: returns a numerator and an optional
    /// denominator `(α, R)` with `R ∈ F_p[t_{α,*}]`.
    fn component_inverse(
        &self,
        a: &CoefficientElement,
        j: usize,
    ) -> Result<(BTreeMap<Vec<i32>, Vec<u32>>, Option<(usize, MPoly)>)> {
        let num = self.component_num(a, j);
        if num.is_empty() {
            return Err(Error::NotUnit("coefficient vanishes in a component".into()));
        }
        let (m0, q, groups) = self.content_split(&num);
        let neg_m0: Vec<i32> = m0.iter().map(|x| -x).collect();
        let b = &self.decomposition.idempotents[j];
        if q.len() == 1 {
            let c = q.values().next().unwrap();
            let x = self
                .fdelta
                .solve_mul(c, b)
                .ok_or_else(|| Error::NotUnit("F_Δ coefficient is not invertible".into()))?;
            let x = self.fdelta.mul(&x, b);
            let mut out = BTreeMap::new();
            out.insert(neg_m0, x);
            return Ok((out, None));
        }
        if groups.len() > 1 {
            return Err(Error::Undecided(
                "numerator mixes transcendental groups".into(),
            ));
        }
        let alpha = *groups.iter().next().unwrap();
        // N = Π_{k=1}^{L-1} σ^k(Q) with σ the Frobenius of F_Δ; then Q·N is
        // σ-invariant, so its coefficients lie in F_p·b_j.
        let order = self.frobenius_order();
        let mut conj = q.clone();
        let mut norm_rest: BTreeMap<Vec<i32>, Vec<u32>> = BTreeMap::new();
        norm_rest.insert(vec![0; self.num_t()], b.clone());
        for _ in 1..order {
            conj = self.conjugate_coefficients(&conj);
            norm_rest = self.num_mul(&norm_rest, &conj);
        }
        let full = self.num_mul(&q, &norm_rest);
        let idx = b.iter().position(|&x| x != 0).unwrap();
        let binv = fp::inv(self.p(), b[idx]);
        let g = self.group(alpha);
        let mut r = MPoly::new();
        for (k, v) in &full {
            let lam = fp::mul(self.p(), v[idx], binv);
            debug_assert_eq!(self.fdelta.scale(b, lam), *v);
            if lam != 0 {
                r.insert(k[g.clone()].iter().map(|&x| x as u32).collect(), lam);
            }
        }
        let numer = self.shift(
            &CoefficientElement {
                num: norm_rest,
                den: BTreeMap::new(),
            },
            &neg_m0,
        );
        Ok((numer.num, Some((alpha, r))))
    }

    pub fn inverse(&self, a: &CoefficientElement) -> Result<CoefficientElement> {
        match self.is_unit(a) {
            UnitStatus::Unit => {}
            UnitStatus::ZeroDivisorOrZero => {
                return Err(Error::NotUnit("zero or zero divisor in k_Δ".into()))
            }
            UnitStatus::Undecided => return Err(Error::Undecided("coefficient unit test".into())),
        }
        let parts: Vec<_> = (0..self.decomposition.len())
            .map(|j| self.component_inverse(a, j))
            .collect::<Result<_>>()?;
        let mut total = self.zero();
        for (j, (num, _)) in parts.iter().enumerate() {
            let mut piece = CoefficientElement {
                num: num.clone(),
                den: BTreeMap::new(),
            };
            for (i, (_, d)) in parts.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some((alpha, r)) = d {
                    piece.num = self.num_mul(&piece.num, &self.den_as_num(*alpha, r));
                }
            }
            total = self.add(&total, &piece);
        }
        let mut den: BTreeMap<usize, MPoly> = BTreeMap::new();
        for (_, d) in &parts {
            if let Some((alpha, r)) = d {
                let prod = match den.get(alpha) {
                    Some(x) => mpoly_mul(self.p(), x, r),
                    None => r.clone(),
                };
                den.insert(*alpha, prod);
            }
        }
        // a = num/den_a, so a^{-1} = den_a · num^{-1}.
        let mut out = CoefficientElement {
            num: total.num,
            den,
        };
        for (alpha, d) in &a.den {
            out.num = self.num_mul(&out.num, &self.den_as_num(*alpha, d));
        }
        Ok(self.normalize(out))
    }

    /// The `x` with `x = b_j x` and `x·a = b_j`.
    pub fn inverse_in_component(
        &self,
        a: &CoefficientElement,
        j: usize,
    ) -> Result<CoefficientElement> {
        let (num, den) = self.component_inverse(a, j)?;
        let mut out = CoefficientElement {
            num,
            den: den.into_iter().collect(),
        };
        for (alpha, d) in &a.den {
            out.num = self.num_mul(&out.num, &self.den_as_num(*alpha, d));
        }
        Ok(self.normalize(out))
    }

    /// `a^e` for signed `e`, inverting when `e < 0`.
    pub fn pow_signed(&self, a: &CoefficientElement, e: i64) -> Result<CoefficientElement> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(&self.inverse(a)?, e.unsigned_abs()))
        }
    }

    /// Squares-to-zero test used for the reducedness property.
    pub fn is_nilpotent_square(&self, a: &CoefficientElement) -> bool {
        self.is_zero(&self.mul(a, a))
    }

    pub fn to_json(&self, a: &CoefficientElement) -> CoefficientJson {
        let numerator = a
            .num
            .iter()
            .map(|(k, v)| CoeffTermJson {
                fdelta_coeff: v.clone(),
                monomial: k
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(i, &x)| (self.symbol(i).to_string(), x))
                    .collect(),
            })
            .collect();
        let denominator = a
            .den
            .iter()
            .map(|(&alpha, d)| {
                let g = self.group(alpha);
                DenFactorJson {
                    alpha: self.labels()[alpha].clone(),
                    terms: d
                        .iter()
                        .map(|(k, &c)| DenTermJson {
                            coeff: c,
                            monomial: g
                                .clone()
                                .zip(k)
                                .filter(|(_, &x)| x != 0)
                                .map(|(i, &x)| (self.symbol(i).to_string(), x))
                                .collect(),
                        })
                        .collect(),
                }
            })
            .collect();
        CoefficientJson {
            numerator,
            denominator,
        }
    }

    pub fn from_json(&self, j: &CoefficientJson) -> Result<CoefficientElement> {
        let dim = self.fdelta.dim();
        let p = self.p();
        let mut acc = self.zero();
        for term in &j.numerator {
            if term.fdelta_coeff.len() != dim {
                return Err(Error::Parse(format!(
                    "fdelta_coeff has length {}, expected {dim}",
                    term.fdelta_coeff.len()
                )));
            }
            let mut exps = vec![0i32; self.num_t()];
            for (s, &e) in &term.monomial {
                let i = self
                    .symbol_index(s)
                    .ok_or_else(|| Error::Parse(format!("unknown symbol {s}")))?;
                exps[i] += e;
            }
            let coeff: Vec<u32> = term.fdelta_coeff.iter().map(|&c| c % p).collect();
            acc = self.add(&acc, &self.monomial(exps, coeff));
        }
        for f in &j.denominator {
            let alpha = self
                .label_index(&f.alpha)
                .ok_or_else(|| Error::Parse(format!("unknown factor {}", f.alpha)))?;
            let g = self.group(alpha);
            let mut d = MPoly::new();
            for t in &f.terms {
                let mut k = vec![0u32; g.len()];
                for (s, &e) in &t.monomial {
                    let i = self
                        .symbol_index(s)
                        .filter(|i| g.contains(i))
                        .ok_or_else(|| {
                            Error::Parse(format!("{s} is not a t-symbol of {}", f.alpha))
                        })?;
                    k[i - g.start] += e;
                }
                let v = d.entry(k).or_insert(0);
                *v = fp::add(p, *v, t.coeff % p);
            }
            d.retain(|_, c| *c != 0);
            if d.is_empty() {
                return Err(Error::Parse("zero denominator".into()));
            }
            let frac = CoefficientElement {
                num: self.one().num,
                den: [(alpha, d)].into(),
            };
            acc = self.mul(&acc, &self.normalize(frac));
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffTermJson {
    pub fdelta_coeff: Vec<u32>,
    #[serde(default)]
    pub monomial: BTreeMap<String, i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenTermJson {
    pub coeff: u32,
    #[serde(default)]
    pub monomial: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenFactorJson {
    pub alpha: String,
    pub terms: Vec<DenTermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientJson {
    pub numerator: Vec<CoeffTermJson>,
    #[serde(default)]
    pub denominator: Vec<DenFactorJson>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg_t(p: u64, spec: &[(usize, usize)]) -> CoefficientAlgebra {
        CoefficientAlgebra::standard(p, spec).unwrap()
    }

    #[test]
    fn basic_arithmetic() {
        let k = alg_t(2, &[(1, 1), (1, 1)]);
        let one = k.one();
        assert!(k.equal(&k.add(&one, &k.zero()), &one));
        let ta = k.t(0);
        let tb = k.t(1);
        let prod = k.mul(&ta, &tb);
        assert_eq!(prod.num.len(), 1);
        assert_eq!(prod.num.keys().next().unwrap(), &vec![1, 1]);
        assert!(k.is_zero(&k.add(&one, &one)));
    }

    #[test]
    fn monomial_inverse_has_t_denominator() {
        let k = alg_t(3, &[(1, 1)]);
        let t = k.t(0);
        assert_eq!(k.is_unit(&t), UnitStatus::Unit);
        let ti = k.inverse(&t).unwrap();
        assert_eq!(ti.num.keys().next().unwrap(), &vec![-1]);
        assert!(k.is_one(&k.mul(&t, &ti)));
    }

    #[test]
    fn polynomial_inverse_uses_denominator() {
        let k = alg_t(3, &[(2, 1)]);
        let w = k.field_generator(0);
        // w + t is a unit of F_9(t).
        let a = k.add(&w, &k.t(0));
        let inv = k.inverse(&a).unwrap();
        assert!(inv.has_denominator());
        assert!(k.is_one(&k.mul(&a, &inv)));
        let back = k.inverse(&inv).unwrap();
        assert!(k.equal(&back, &a));
    }

    #[test]
    fn fractions_reduce_canonically() {
        let k = alg_t(2, &[(1, 1)]);
        let t = k.t(0);
        let a = k.add(&k.one(), &t);
        let inv = k.inverse(&a).unwrap();
        // (1+t)^2 / (1+t) = 1 + t exactly.
        let sq = k.mul(&a, &a);
        let q = k.mul(&sq, &inv);
        assert!(!q.has_denominator());
        assert!(k.equal(&q, &a));
        let s = k.add(&inv, &inv);
        assert!(k.is_zero(&s));
    }

    #[test]
    fn idempotent_is_zero_divisor() {
        let k = alg_t(2, &[(2, 0), (2, 0)]);
        let b0 = k.from_fdelta(k.decomposition().idempotents[0].clone());
        assert_eq!(k.is_unit(&b0), UnitStatus::ZeroDivisorOrZero);
        assert_eq!(k.is_unit(&k.zero()), UnitStatus::ZeroDivisorOrZero);
        assert_eq!(k.is_unit(&k.one()), UnitStatus::Unit);
    }

    #[test]
    fn mixed_groups_are_undecided() {
        let k = alg_t(2, &[(1, 1), (1, 1)]);
        let a = k.add(&k.t(0), &k.t(1));
        assert_eq!(k.is_unit(&a), UnitStatus::Undecided);
        assert!(matches!(k.inverse(&a), Err(Error::Undecided(_))));
    }

    #[test]
    fn frobenius_alpha_on_generators() {
        let k = alg_t(3, &[(2, 1), (1, 1)]);
        let ta = k.t(0);
        let tb = k.t(1);
        let fa = k.frobenius_alpha(&ta, 0, 1);
        assert!(k.equal(&fa, &k.pow(&ta, 3)));
        assert!(k.equal(&k.frobenius_alpha(&tb, 0, 1), &tb));
        let c = k.scalar(2);
        assert!(k.equal(&k.frobenius_alpha(&c, 0, 1), &c));
        let w = k.field_generator(0);
        assert!(k.equal(&k.frobenius_alpha(&w, 0, 1), &k.pow(&w, 3)));
        let x = k.add(&k.mul(&w, &ta), &tb);
        assert!(k.equal(&k.absolute_frobenius(&x), &k.pow(&x, 3)));
    }

    #[test]
    fn json_round_trip() {
        let k = alg_t(2, &[(2, 1)]);
        let a = k.inverse(&k.add(&k.one(), &k.t(0))).unwrap();
        let a = k.add(&a, &k.field_generator(0));
        let j = k.to_json(&a);
        let s = serde_json::to_string(&j).unwrap();
        let back = k.from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert!(k.equal(&a, &back));
    }
}
