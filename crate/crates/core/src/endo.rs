//! Semilinear ring endomorphisms of `E_Δ`: `φ_α`, `γ_α(c)`, `δ_{α,b}` and
//! their composites.
//!
//! Every endomorphism built here sends `X_β` to a series in `X_β` alone with
//! `F_p` coefficients, of the form `X_β^{s_β} · (unit)`, and sends
//! `t_{α,i}` to `u_{α,i} · t_{α,i}^{p^{e_α}}` with `u_{α,i}` a unit series in
//! `X_α` alone. Composites keep this shape, which is what [`RingEndo::apply`]
//! relies on.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientElement;
use crate::error::{Error, Result};
use crate::fp;
use crate::padic::PAdicUnitApprox;
use crate::series::{is_exact, LaurentElement, Ring, EXACT};

/// A univariate series `Σ c_i X^{lo+i}` over `F_p`, known up to degree `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Uni {
    lo: i64,
    c: Vec<u32>,
    w: i64,
}

fn wmin(a: i64, b: i64) -> i64 {
    a.min(b)
}

impl Uni {
    fn monomial(k: i64) -> Self {
        Uni {
            lo: k,
            c: vec![1],
            w: EXACT,
        }
    }

    fn one() -> Self {
        Self::monomial(0)
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn normalize(mut self) -> Self {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
        let lead = self.c.iter().position(|&x| x != 0).unwrap_or(self.c.len());
        self.c.drain(..lead);
        self.lo += lead as i64;
        self
    }

    fn mul(&self, other: &Self, p: u32, cap: i64) -> Self {
        let lo = self.lo + other.lo;
        let w = wmin(
            if is_exact(self.w) {
                EXACT
            } else {
                self.w + other.lo
            },
            if is_exact(other.w) {
                EXACT
            } else {
                other.w + self.lo
            },
        );
        let top = w.min(cap);
        let mut overflow = false;
        let len = if top < lo { 0 } else { (top - lo + 1) as usize };
        let mut c = vec![0u32; len.min(self.c.len() + other.c.len())];
        for (i, &x) in self.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in other.c.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                if i + j >= len {
                    overflow = true;
                    break;
                }
                c[i + j] = fp::add(p, c[i + j], fp::mul(p, x, y));
            }
        }
        let w = if overflow { w.min(cap) } else { w };
        Uni { lo, c, w }.normalize()
    }

    fn inverse(&self, p: u32, cap: i64) -> Result<Self> {
        if self.c.is_empty() || self.c[0] == 0 {
            return Err(Error::NotUnit(
                "univariate series without leading unit".into(),
            ));
        }
        let d = if is_exact(self.w) {
            cap + self.lo
        } else {
            (self.w - self.lo).min(cap + self.lo)
        };
        if d < 0 {
            return Err(Error::WindowUnderflow(
                "inverse has no known coefficients".into(),
            ));
        }
        let d = d as usize;
        let h0 = fp::inv(p, self.c[0]);
        let mut r = vec![0u32; d + 1];
        r[0] = h0;
        for n in 1..=d {
            let mut s = 0u32;
            for k in 1..=n.min(self.c.len() - 1) {
                s = fp::add(p, s, fp::mul(p, self.c[k], r[n - k]));
            }
            r[n] = fp::mul(p, fp::neg(p, s), h0);
        }
        let exact_poly = is_exact(self.w) && self.c.len() == 1;
        let w = if exact_poly {
            EXACT
        } else {
            -self.lo + d as i64
        };
        if exact_poly {
            r.truncate(1);
        }
        Ok(Uni {
            lo: -self.lo,
            c: r,
            w,
        }
        .normalize())
    }

    fn pow(&self, k: i64, p: u32, cap: i64) -> Result<Self> {
        let base = if k < 0 {
            self.inverse(p, cap)?
        } else {
            self.clone()
        };
        let mut e = k.unsigned_abs();
        let mut r = Uni::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b, p, cap);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b, p, cap);
            }
        }
        Ok(r)
    }

    fn to_laurent(&self, ring: &Ring, beta: usize) -> LaurentElement {
        let n = ring.nvars();
        let k = ring.coeffs();
        let mut terms = std::collections::BTreeMap::new();
        for (i, &x) in self.c.iter().enumerate() {
            if x != 0 {
                let mut e = vec![0; n];
                e[beta] = self.lo + i as i64;
                terms.insert(e, k.scalar(x));
            }
        }
        let mut lower = vec![0; n];
        lower[beta] = self.lo;
        let mut window = vec![EXACT; n];
        window[beta] = self.w;
        LaurentElement::from_parts(ring, terms, lower, window).expect("valid univariate")
    }

    fn from_laurent(a: &LaurentElement, beta: usize) -> Result<Self> {
        let ring = a.ring();
        let k = ring.coeffs();
        let n = ring.nvars();
        if (0..n).any(|g| g != beta && !is_exact(a.window()[g])) {
            return Err(Error::Unrepresentable(
                "image truncated in a foreign variable".into(),
            ));
        }
        let mut pairs = Vec::new();
        for (e, c) in a.terms() {
            if (0..n).any(|g| g != beta && e[g] != 0) {
                return Err(Error::Unrepresentable(
                    "image involves a foreign variable".into(),
                ));
            }
            let s = k
                .as_prime_scalar(c)
                .ok_or_else(|| Error::Unrepresentable("image coefficient outside F_p".into()))?;
            pairs.push((e[beta], s));
        }
        let lo = a.lower()[beta];
        let hi = pairs.iter().map(|x| x.0).max().unwrap_or(lo);
        let mut c = vec![0u32; (hi - lo + 1).max(0) as usize];
        for (d, s) in pairs {
            c[(d - lo) as usize] = s;
        }
        Ok(Uni {
            lo,
            c,
            w: a.window()[beta],
        }
        .normalize())
    }
}

/// Generator-level description of a semilinear endomorphism of `E_Δ`.
#[derive(Debug, Clone)]
pub struct RingEndo {
    ring: Ring,
    images: Vec<Uni>,
    frob: Vec<u32>,
    /// Per global transcendental index; `None` means multiplier 1.
    twists: Vec<Option<Uni>>,
}

impl RingEndo {
    pub fn identity(ring: &Ring) -> Self {
        RingEndo {
            ring: ring.clone(),
            images: vec![Uni::monomial(1); ring.nvars()],
            frob: vec![0; ring.nvars()],
            twists: vec![None; ring.coeffs().num_t()],
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// `φ_α^k`: `X_α ↦ X_α^{p^k}`, `p^k`-power on `k_α`.
    pub fn make_phi_power(ring: &Ring, alpha: usize, k: u32) -> Self {
        let mut e = Self::identity(ring);
        e.images[alpha] = Uni::monomial((ring.p() as i64).pow(k));
        e.frob[alpha] = k;
        e
    }

    pub fn make_phi(ring: &Ring, alpha: usize) -> Self {
        Self::make_phi_power(ring, alpha, 1)
    }

    /// `φ_s = Π_α φ_α`.
    pub fn make_phi_s(ring: &Ring) -> Self {
        let mut e = Self::identity(ring);
        for a in 0..ring.nvars() {
            e.images[a] = Uni::monomial(ring.p() as i64);
            e.frob[a] = 1;
        }
        e
    }

    /// `γ_α(c)`: `X_α ↦ (1 + X_α)^c - 1`, identity on coefficients.
    pub fn make_gamma(ring: &Ring, alpha: usize, c: &PAdicUnitApprox) -> Result<Self> {
        if !c.is_unit() {
            return Err(Error::NotUnit(format!(
                "χ-value {} is not a p-adic unit",
                c.residue
            )));
        }
        let img = ring.binomial_power(alpha, c)?;
        let mut e = Self::identity(ring);
        e.images[alpha] = Uni::from_laurent(&img, alpha)?;
        Ok(e)
    }

    pub fn gamma_inverse(ring: &Ring, alpha: usize, c: &PAdicUnitApprox) -> Result<Self> {
        Self::make_gamma(ring, alpha, &c.inverse()?)
    }

    /// `δ_{α,b}`: `t_{α,i} ↦ (1 + X_α)^{b_i} t_{α,i}`, all `X_β` fixed.
    pub fn make_delta(ring: &Ring, alpha: usize, b: &[PAdicUnitApprox]) -> Result<Self> {
        let k = ring.coeffs();
        let g = k.group(alpha);
        if g.is_empty() {
            return Err(Error::Config(format!(
                "factor {} has no transcendentals to twist",
                k.labels()[alpha]
            )));
        }
        if b.len() != g.len() {
            return Err(Error::Config(format!(
                "expected {} exponents, got {}",
                g.len(),
                b.len()
            )));
        }
        let base = ring.add(&ring.one(), &ring.var(alpha))?;
        let mut e = Self::identity(ring);
        for (i, bi) in g.zip(b) {
            let u = ring.binomial_series(&base, alpha, bi)?;
            let u = Uni::from_laurent(&u, alpha)?;
            e.twists[i] = (!u.is_one()).then_some(u);
        }
        Ok(e)
    }

    /// Image of `X_β`.
    pub fn image_of_var(&self, beta: usize) -> LaurentElement {
        self.images[beta].to_laurent(&self.ring, beta)
    }

    /// `s_β` with `X_β ↦ X_β^{s_β}·unit`.
    pub fn var_scale(&self, beta: usize) -> i64 {
        self.images[beta].lo
    }

    pub fn frobenius_exponents(&self) -> &[u32] {
        &self.frob
    }

    /// Multiplier `u` with `t_i ↦ u·t_i^{p^e}`.
    pub fn twist(&self, i: usize) -> LaurentElement {
        match &self.twists[i] {
            Some(u) => u.to_laurent(&self.ring, self.ring.coeffs().owner(i)),
            None => self.ring.one(),
        }
    }

    fn cap(&self, beta: usize) -> i64 {
        self.ring.precision()[beta]
    }

    /// Substitutes `X_β ↦ g(X_β)` termwise.
    fn substitute(&self, a: &LaurentElement, beta: usize) -> Result<LaurentElement> {
        let g = &self.images[beta];
        if g.lo == 1 && g.c == [1] && is_exact(g.w) {
            return Ok(a.clone());
        }
        let p = self.ring.p();
        let cap = self.cap(beta);
        let k = self.ring.coeffs();
        let s = g.lo;
        let mut cache: HashMap<i64, Uni> = HashMap::new();
        let mut window = a.window().to_vec();
        if !is_exact(window[beta]) {
            window[beta] = s * (window[beta] + 1) - 1;
        }
        let mut overflow = false;
        let mut terms: std::collections::BTreeMap<Vec<i64>, CoefficientElement> =
            Default::default();
        for (e, c) in a.terms() {
            let gp = match cache.get(&e[beta]) {
                Some(x) => x,
                None => {
                    let v = g.pow(e[beta], p, cap)?;
                    cache.entry(e[beta]).or_insert(v)
                }
            };
            window[beta] = window[beta].min(gp.w);
            for (i, &coef) in gp.c.iter().enumerate() {
                if coef == 0 {
                    continue;
                }
                let d = gp.lo + i as i64;
                if d > cap {
                    overflow = true;
                    continue;
                }
                let mut e2 = e.clone();
                e2[beta] = d;
                let v = k.scale(c, coef);
                match terms.get_mut(&e2) {
                    Some(cur) => *cur = k.add(cur, &v),
                    None => {
                        terms.insert(e2, v);
                    }
                }
            }
        }
        if overflow {
            window[beta] = window[beta].min(cap);
        }
        let mut lower = a.lower().to_vec();
        lower[beta] *= s;
        let w = window.clone();
        terms.retain(|e, _| e.iter().zip(&w).all(|(x, y)| x <= y));
        LaurentElement::from_parts(&self.ring, terms, lower, window)
    }

    fn has_twist_on(&self, c: &CoefficientElement) -> bool {
        let k = self.ring.coeffs();
        let twisted = |i: usize| self.twists[i].is_some();
        c.terms()
            .any(|(m, _)| m.iter().enumerate().any(|(i, &x)| x != 0 && twisted(i)))
            || c.den.keys().any(|&alpha| k.group(alpha).any(twisted))
    }

    fn frob_coeff(&self, c: &CoefficientElement) -> CoefficientElement {
        let k = self.ring.coeffs();
        (0..self.ring.nvars()).fold(c.clone(), |acc, a| k.frobenius_alpha(&acc, a, self.frob[a]))
    }

    /// `Π_i u_i^{m_i}` over twisted transcendentals.
    fn twist_factor(
        &self,
        m: &[i32],
        cache: &mut HashMap<Vec<i32>, LaurentElement>,
    ) -> Result<LaurentElement> {
        if let Some(x) = cache.get(m) {
            return Ok(x.clone());
        }
        let p = self.ring.p();
        let mut acc = self.ring.one();
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            if let Some(u) = &self.twists[i] {
                let beta = self.ring.coeffs().owner(i);
                let up = u.pow(mi as i64, p, self.cap(beta))?;
                acc = self.ring.mul(&acc, &up.to_laurent(&self.ring, beta))?;
            }
        }
        cache.insert(m.to_vec(), acc.clone());
        Ok(acc)
    }

    fn coeff_image(
        &self,
        c: &CoefficientElement,
        cache: &mut HashMap<Vec<i32>, LaurentElement>,
    ) -> Result<LaurentElement> {
        let ring = &self.ring;
        let k = ring.coeffs();
        let mut acc = ring.zero();
        for (m, f) in c.terms() {
            let mono = self.frob_coeff(&k.monomial(m.clone(), f.clone()));
            let piece = ring.mul(&ring.constant(mono), &self.twist_factor(m, cache)?)?;
            acc = ring.add(&acc, &piece)?;
        }
        for (&alpha, d) in &c.den {
            let g = k.group(alpha);
            let mut den_series = ring.zero();
            for (key, &coef) in d {
                let mut m = vec![0i32; k.num_t()];
                for (i, &x) in g.clone().zip(key) {
                    m[i] = x as i32;
                }
                let mono = self.frob_coeff(&k.monomial(m.clone(), k.fdelta().scalar(coef)));
                let piece = ring.mul(&ring.constant(mono), &self.twist_factor(&m, cache)?)?;
                den_series = ring.add(&den_series, &piece)?;
            }
            acc = ring.mul(&acc, &ring.invert(&den_series)?)?;
        }
        Ok(acc)
    }

    fn map_coefficients(&self, a: &LaurentElement) -> Result<LaurentElement> {
        let trivial = self.frob.iter().all(|&e| e == 0) && self.twists.iter().all(Option::is_none);
        if trivial {
            return Ok(a.clone());
        }
        let ring = &self.ring;
        let mut plain: std::collections::BTreeMap<Vec<i64>, CoefficientElement> =
            Default::default();
        let mut twisted = ring.zero();
        let mut cache = HashMap::new();
        for (e, c) in a.terms() {
            if self.has_twist_on(c) {
                let img = self.coeff_image(c, &mut cache)?;
                twisted = ring.add(&twisted, &ring.shift(&img, e))?;
            } else {
                plain.insert(e.clone(), self.frob_coeff(c));
            }
        }
        let base =
            LaurentElement::from_parts(ring, plain, a.lower().to_vec(), a.window().to_vec())?;
        Ok(ring.add(&base, &twisted)?.with_lower(a.lower().to_vec()))
    }

    /// The substitution homomorphism determined by the generator images.
    pub fn apply(&self, a: &LaurentElement) -> Result<LaurentElement> {
        if **a.ring() != *self.ring {
            return Err(Error::RingMismatch(
                "endomorphism of a different ring".into(),
            ));
        }
        let mut cur = a.clone();
        for beta in 0..self.ring.nvars() {
            cur = self.substitute(&cur, beta)?;
        }
        let out = self.map_coefficients(&cur)?;
        for b in 0..self.ring.nvars() {
            if !is_exact(out.window()[b]) && out.window()[b] < out.lower()[b] {
                return Err(Error::WindowUnderflow(format!(
                    "no known coefficients left in {}",
                    self.ring.var_name(b)
                )));
            }
        }
        Ok(out)
    }

    /// Image of a coefficient, as a series.
    pub fn apply_coeff(&self, c: &CoefficientElement) -> Result<LaurentElement> {
        self.apply(&self.ring.constant(c.clone()))
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &RingEndo) -> Result<RingEndo> {
        let ring = &self.ring;
        let p = ring.p();
        let mut images = Vec::new();
        for b in 0..ring.nvars() {
            let img = self.apply(&other.image_of_var(b))?;
            images.push(Uni::from_laurent(&img, b)?);
        }
        let frob: Vec<u32> = self
            .frob
            .iter()
            .zip(&other.frob)
            .map(|(a, b)| a + b)
            .collect();
        let mut twists = Vec::new();
        for i in 0..ring.coeffs().num_t() {
            let alpha = ring.coeffs().owner(i);
            if self.twists[i].is_none() && other.twists[i].is_none() {
                twists.push(None);
                continue;
            }
            let inner = self.apply(&other.twist(i))?;
            let q = (p as i64).pow(other.frob[alpha]);
            let outer = match &self.twists[i] {
                Some(u) => u.pow(q, p, self.cap(alpha))?.to_laurent(ring, alpha),
                None => ring.one(),
            };
            let u = Uni::from_laurent(&ring.mul(&inner, &outer)?, alpha)?;
            twists.push((!u.is_one()).then_some(u));
        }
        Ok(RingEndo {
            ring: ring.clone(),
            images,
            frob,
            twists,
        })
    }
}

/// One generator of an [`OperatorWord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Generator {
    Phi { alpha: String },
    Gamma { alpha: String, chi: i128 },
    Delta { alpha: String, b: Vec<i128> },
}

/// A formal product `g_1^{k_1} * g_2^{k_2} * …`, applied right to left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorWord {
    pub factors: Vec<(Generator, i64)>,
}

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord {
            factors: Vec::new(),
        }
    }

    pub fn then(mut self, g: Generator, k: i64) -> Self {
        self.factors.push((g, k));
        self
    }

    /// The inverse word, when every factor is a group element.
    pub fn inverse(&self) -> Result<Self> {
        let mut factors = Vec::new();
        for (g, k) in self.factors.iter().rev() {
            if matches!(g, Generator::Phi { .. }) {
                return Err(Error::Config("φ is not invertible in the monoid".into()));
            }
            factors.push((g.clone(), -k));
        }
        Ok(OperatorWord { factors })
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        OperatorWord { factors }
    }

    /// Realizes one factor `g^k` as a [`RingEndo`] at digit precision `m`.
    pub fn factor_endo(ring: &Ring, g: &Generator, k: i64, m: u32) -> Result<RingEndo> {
        let k_alg = ring.coeffs();
        let idx = |label: &str| {
            k_alg
                .label_index(label)
                .ok_or_else(|| Error::Parse(format!("unknown factor {label}")))
        };
        let p = ring.p();
        match g {
            Generator::Phi { alpha } => {
                if k < 0 {
                    return Err(Error::Config("φ exponents must be >= 0".into()));
                }
                Ok(RingEndo::make_phi_power(ring, idx(alpha)?, k as u32))
            }
            Generator::Gamma { alpha, chi } => {
                let c = PAdicUnitApprox::new(p, *chi, m)?;
                let c = if k < 0 { c.inverse()? } else { c };
                let mut acc = PAdicUnitApprox::new(p, 1, m)?;
                for _ in 0..k.unsigned_abs() {
                    acc = acc.mul(&c)?;
                }
                RingEndo::make_gamma(ring, idx(alpha)?, &acc)
            }
            Generator::Delta { alpha, b } => {
                let bs: Vec<PAdicUnitApprox> = b
                    .iter()
                    .map(|&x| PAdicUnitApprox::new(p, x * k as i128, m))
                    .collect::<Result<_>>()?;
                RingEndo::make_delta(ring, idx(alpha)?, &bs)
            }
        }
    }

    /// Applies the word factor by factor (rightmost first).
    pub fn apply(&self, ring: &Ring, a: &LaurentElement, m: u32) -> Result<LaurentElement> {
        let mut cur = a.clone();
        for (g, k) in self.factors.iter().rev() {
            cur = Self::factor_endo(ring, g, *k, m)?.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Composes the word eagerly into a single endomorphism.
    pub fn to_endo(&self, ring: &Ring, m: u32) -> Result<RingEndo> {
        let mut acc = RingEndo::identity(ring);
        for (g, k) in &self.factors {
            acc = acc.compose(&Self::factor_endo(ring, g, *k, m)?)?;
        }
        Ok(acc)
    }

    /// Parses `phi(a)^2 * gamma(a; 1+p) * delta(b; 0,1)`; `p` is bound to
    /// the given prime inside arguments.
    pub fn parse(s: &str, p: u32) -> Result<Self> {
        let mut parser = Parser {
            s: s.as_bytes(),
            pos: 0,
            p: p as i128,
        };
        let w = parser.word()?;
        parser.skip_ws();
        if parser.pos != parser.s.len() {
            return Err(parser.err("trailing input"));
        }
        Ok(w)
    }
}

impl std::fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "id");
        }
        for (i, (g, k)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            match g {
                Generator::Phi { alpha } => write!(f, "phi({alpha})")?,
                Generator::Gamma { alpha, chi } => write!(f, "gamma({alpha}; {chi})")?,
                Generator::Delta { alpha, b } => {
                    let bs: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                    write!(f, "delta({alpha}; {})", bs.join(","))?
                }
            }
            if *k != 1 {
                write!(f, "^{k}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    p: i128,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn word(&mut self) -> Result<OperatorWord> {
        let mut w = OperatorWord::identity();
        loop {
            let name = self.ident()?;
            let g = match name.as_str() {
                "id" => None,
                "phi" => {
                    self.expect(b'(')?;
                    let alpha = self.ident()?;
                    self.expect(b')')?;
                    Some(Generator::Phi { alpha })
                }
                "gamma" => {
                    self.expect(b'(')?;
                    let alpha = self.ident()?;
                    self.expect(b';')?;
                    let chi = self.expr()?;
                    self.expect(b')')?;
                    Some(Generator::Gamma { alpha, chi })
                }
                "delta" => {
                    self.expect(b'(')?;
                    let alpha = self.ident()?;
                    self.expect(b';')?;
                    let mut b = vec![self.expr()?];
                    while self.peek() == Some(b',') {
                        self.pos += 1;
                        b.push(self.expr()?);
                    }
                    self.expect(b')')?;
                    Some(Generator::Delta { alpha, b })
                }
                other => return Err(self.err(&format!("unknown generator {other}"))),
            };
            let mut k = 1i64;
            if self.peek() == Some(b'^') {
                self.pos += 1;
                k = self.signed_int()? as i64;
            }
            if let Some(g) = g {
                w.factors.push((g, k));
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(w);
            }
        }
    }

    fn signed_int(&mut self) -> Result<i128> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    fn number(&mut self) -> Result<i128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<i128> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    v += self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    // term := power ('*' power)*; a '*' followed by a generator name ends the
    // argument, but arguments are always closed by ')' or ',' first.
    fn term(&mut self) -> Result<i128> {
        let mut v = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            v *= self.power()?;
        }
        Ok(v)
    }

    fn power(&mut self) -> Result<i128> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.atom()?;
            if !(0..=64).contains(&e) {
                return Err(self.err("exponent out of range"));
            }
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<i128> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            Some(b'p') => {
                self.pos += 1;
                Ok(self.p)
            }
            _ => self.number(),
        }
    }
}

/// Result of [`verify_commutation`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub left: String,
    pub right: String,
    pub generators_equal: bool,
    pub trials: usize,
    pub failures: Vec<String>,
}

impl CommutationReport {
    pub fn passed(&self) -> bool {
        self.generators_equal && self.failures.is_empty()
    }
}

/// Applies both words to the generators of `E_Δ` (each `X_β`, each
/// `t_{α,i}`, each `F_{p^{n_α}}` generator) and to `trials` random series,
/// comparing on the common certified window.
pub fn verify_commutation<R: rand::Rng>(
    left: &OperatorWord,
    right: &OperatorWord,
    ring: &Ring,
    m: u32,
    trials: usize,
    rng: &mut R,
) -> Result<CommutationReport> {
    let k = ring.coeffs();
    let mut gens: Vec<(String, LaurentElement)> = (0..ring.nvars())
        .map(|b| (ring.var_name(b), ring.var(b)))
        .collect();
    for i in 0..k.num_t() {
        gens.push((k.symbol(i).to_string(), ring.constant(k.t(i))));
    }
    for a in 0..k.num_factors() {
        gens.push((
            format!("omega_{}", k.labels()[a]),
            ring.constant(k.field_generator(a)),
        ));
    }
    let mut failures = Vec::new();
    let mut generators_equal = true;
    for (name, g) in &gens {
        let l = left.apply(ring, g, m)?;
        let r = right.apply(ring, g, m)?;
        if !ring.equal_on_window(&l, &r) {
            generators_equal = false;
            failures.push(format!("generator {name}"));
        }
    }
    // Keep φ-images of the random elements inside the precision cap.
    let hi = (ring.precision().iter().copied().min().unwrap_or(1) / (2 * ring.p() as i64)).max(1);
    for trial in 0..trials {
        let x = crate::random::random_series(ring, rng, 4, -1, hi, 2);
        let l = left.apply(ring, &x, m)?;
        let r = right.apply(ring, &x, m)?;
        if !ring.equal_on_window(&l, &r) {
            failures.push(format!("random element #{trial}"));
        }
    }
    Ok(CommutationReport {
        left: left.to_string(),
        right: right.to_string(),
        generators_equal,
        trials,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientAlgebra;
    use crate::series::{SeriesRing, SeriesUnitStatus};

    fn ring(p: u64, spec: &[(usize, usize)], n: i64) -> Ring {
        SeriesRing::uniform(CoefficientAlgebra::standard(p, spec).unwrap(), n).unwrap()
    }

    #[test]
    fn phi_on_generators() {
        let r = ring(3, &[(1, 1), (2, 1)], 9);
        let phi = RingEndo::make_phi(&r, 0);
        let x = phi.apply(&r.var(0)).unwrap();
        assert!(r.equal_on_window(&x, &r.pow(&r.var(0), 3).unwrap()));
        assert!(r.equal_on_window(&phi.apply(&r.var(1)).unwrap(), &r.var(1)));
        let tb = r.constant(r.coeffs().t(1));
        assert!(r.equal_on_window(&phi.apply(&tb).unwrap(), &tb));
        let xd = phi.apply(&r.x_delta_pow(1)).unwrap();
        let expect = r
            .mul(&r.x_delta_pow(1), &r.pow(&r.var(0), 2).unwrap())
            .unwrap();
        assert!(r.equal_on_window(&xd, &expect));
    }

    #[test]
    fn gamma_examples() {
        let r = ring(2, &[(1, 0)], 4);
        let c = PAdicUnitApprox::new(2, 3, 3).unwrap();
        let g = RingEndo::make_gamma(&r, 0, &c).unwrap();
        let x = r.var(0);
        let expect = r
            .add(
                &r.add(&x, &r.pow(&x, 2).unwrap()).unwrap(),
                &r.pow(&x, 3).unwrap(),
            )
            .unwrap();
        assert!(r.equal_on_window(&g.apply(&x).unwrap(), &expect));
        let gi = RingEndo::gamma_inverse(&r, 0, &c).unwrap();
        assert!(r.equal_on_window(&gi.apply(&g.apply(&x).unwrap()).unwrap(), &x));
        let u = r
            .mul(&g.apply(&r.x_delta_pow(1)).unwrap(), &r.x_delta_pow(-1))
            .unwrap();
        assert_eq!(r.is_unit(&u), SeriesUnitStatus::Unit);
    }

    #[test]
    fn delta_twists_transcendental() {
        let r = ring(3, &[(1, 1)], 6);
        let b = [PAdicUnitApprox::new(3, 1, 2).unwrap()];
        let d = RingEndo::make_delta(&r, 0, &b).unwrap();
        let t = r.constant(r.coeffs().t(0));
        let expect = r.mul(&r.add(&r.one(), &r.var(0)).unwrap(), &t).unwrap();
        assert!(r.equal_on_window(&d.apply(&t).unwrap(), &expect));
        let tinv = r.constant(r.coeffs().inverse(&r.coeffs().t(0)).unwrap());
        let prod = r
            .mul(&d.apply(&t).unwrap(), &d.apply(&tinv).unwrap())
            .unwrap();
        assert!(r.equal_on_window(&prod, &r.one()));
    }

    #[test]
    fn parse_words() {
        let w = OperatorWord::parse("phi(a)^2 * gamma(a; 1+p) * delta(b; 0,1)", 3).unwrap();
        assert_eq!(w.factors.len(), 3);
        assert_eq!(w.factors[0], (Generator::Phi { alpha: "a".into() }, 2));
        assert_eq!(
            w.factors[1],
            (
                Generator::Gamma {
                    alpha: "a".into(),
                    chi: 4
                },
                1
            )
        );
        assert_eq!(
            w.factors[2],
            (
                Generator::Delta {
                    alpha: "b".into(),
                    b: vec![0, 1]
                },
                1
            )
        );
        let w2 = OperatorWord::parse(&w.to_string(), 3).unwrap();
        assert_eq!(w, w2);
        assert!(OperatorWord::parse("phi(a", 3).is_err());
        assert!(OperatorWord::parse("psi(a)", 3).is_err());
        let g = OperatorWord::parse("gamma(a; -(p^2+1))^-1", 5).unwrap();
        assert_eq!(
            g.factors[0],
            (
                Generator::Gamma {
                    alpha: "a".into(),
                    chi: -26
                },
                -1
            )
        );
    }

    #[test]
    fn composition_matches_sequential_application() {
        let r = ring(3, &[(1, 1), (1, 0)], 8);
        let w = OperatorWord::parse("gamma(a; 2) * delta(a; 1) * phi(a)", 3).unwrap();
        let e = w.to_endo(&r, 3).unwrap();
        let t = r.constant(r.coeffs().t(0));
        let x = r.add(&r.mul(&t, &r.var(0)).unwrap(), &r.var(1)).unwrap();
        let a = e.apply(&x).unwrap();
        let b = w.apply(&r, &x, 3).unwrap();
        assert!(r.equal_on_window(&a, &b));
    }
}
