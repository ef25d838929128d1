//! Truncated sparse series in `E_Δ⁺ = k_Δ⟦X_α⟧` and `E_Δ = E_Δ⁺[X_Δ⁻¹]`.
//!
//! Precision model. An element carries a lower bound vector `L` and a
//! window vector `W`. The stored terms are exact for every exponent `e` with
//! `e_α <= W_α` for all `α`; the unknown remainder lies in
//! `Σ_α X_α^{W_α+1} Π_{β≠α} X_β^{L_β} E⁺`, so every term, known or not,
//! satisfies `e >= L`. `W_α = EXACT` means no truncation in `X_α`.
//!
//! Precision propagation (pessimistic):
//! * sum: `L = min(L_a, L_b)`, `W = min(W_a, W_b)`;
//! * product: `L = L_a + L_b`, `W_β = min(W_a,β + L_b,β, W_b,β + L_a,β)`.
//!
//! With a uniform pole bound `L = -m` the product rule reads
//! `W = min(W_a - m_b, W_b - m_a)`. Terms past the ring precision `N_α` are
//! dropped, capping the window at `N_α`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoefficientAlgebra, CoefficientElement, UnitStatus};
use crate::error::{Error, Result};
use crate::padic::{binomial_mod_p, PAdicUnitApprox};

/// Window sentinel for exact (untruncated) variables.
pub const EXACT: i64 = i64::MAX / 4;

pub fn is_exact(w: i64) -> bool {
    w >= EXACT / 2
}

fn wadd(a: i64, b: i64) -> i64 {
    if is_exact(a) || is_exact(b) {
        EXACT
    } else {
        a + b
    }
}

/// `E_Δ` with its coefficient ring and per-variable precision caps.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRing {
    coeffs: CoefficientAlgebra,
    precision: Vec<i64>,
}

pub type Ring = Arc<SeriesRing>;

impl SeriesRing {
    pub fn new(coeffs: CoefficientAlgebra, precision: Vec<i64>) -> Result<Ring> {
        if precision.len() != coeffs.num_factors() {
            return Err(Error::Config("one precision per variable required".into()));
        }
        if precision.iter().any(|&n| n < 1) {
            return Err(Error::Config("precision must be >= 1".into()));
        }
        Ok(Arc::new(Self { coeffs, precision }))
    }

    /// Same precision `n` in every variable.
    pub fn uniform(coeffs: CoefficientAlgebra, n: i64) -> Result<Ring> {
        let k = coeffs.num_factors();
        Self::new(coeffs, vec![n; k])
    }

    pub fn coeffs(&self) -> &CoefficientAlgebra {
        &self.coeffs
    }

    pub fn p(&self) -> u32 {
        self.coeffs.p()
    }

    pub fn nvars(&self) -> usize {
        self.precision.len()
    }

    pub fn precision(&self) -> &[i64] {
        &self.precision
    }

    pub fn var_name(&self, alpha: usize) -> String {
        format!("X_{}", self.coeffs.labels()[alpha])
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        let label = name.strip_prefix("X_").unwrap_or(name);
        self.coeffs.label_index(label)
    }

    /// Same ring with a different precision cap.
    pub fn with_precision(&self, precision: Vec<i64>) -> Result<Ring> {
        Self::new(self.coeffs.clone(), precision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesUnitStatus {
    Unit,
    Nonunit,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct LaurentElement {
    ring: Ring,
    terms: BTreeMap<Vec<i64>, CoefficientElement>,
    lower: Vec<i64>,
    window: Vec<i64>,
}

impl LaurentElement {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, CoefficientElement> {
        &self.terms
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn is_exact(&self) -> bool {
        self.window.iter().all(|&w| is_exact(w))
    }

    /// Known part is zero (the element may still be nonzero past the window).
    pub fn is_zero_on_window(&self) -> bool {
        self.terms.is_empty()
    }

    /// `m` such that the element lies in `X_Δ^{-m} E⁺`.
    pub fn pole_bound(&self) -> i64 {
        self.lower
            .iter()
            .map(|&l| (-l).max(0))
            .filter(|&m| !is_exact(m))
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, e: &[i64]) -> Option<&CoefficientElement> {
        self.terms.get(e)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Builds an element from raw parts; terms outside the window are dropped.
    pub fn from_parts(
        ring: &Ring,
        terms: BTreeMap<Vec<i64>, CoefficientElement>,
        lower: Vec<i64>,
        window: Vec<i64>,
    ) -> Result<Self> {
        let n = ring.nvars();
        if lower.len() != n || window.len() != n || terms.keys().any(|k| k.len() != n) {
            return Err(Error::RingMismatch("exponent vector length".into()));
        }
        if terms
            .keys()
            .any(|k| k.iter().zip(&lower).any(|(e, l)| e < l))
        {
            return Err(Error::Config("term below the declared lower bound".into()));
        }
        Ok(LaurentElement {
            ring: ring.clone(),
            terms,
            lower,
            window,
        }
        .normalized())
    }

    fn normalized(mut self) -> Self {
        let k = &self.ring.coeffs;
        self.terms.retain(|_, c| !k.is_zero(c));
        let n = self.ring.nvars();
        for a in 0..n {
            let cap = self.ring.precision[a];
            if self.window[a] > cap && self.terms.keys().any(|e| e[a] > cap) {
                self.window[a] = cap;
            }
        }
        let w = self.window.clone();
        self.terms
            .retain(|e, _| e.iter().zip(&w).all(|(x, y)| x <= y));
        if self.is_exact() {
            self.lower = if self.terms.is_empty() {
                vec![0; n]
            } else {
                (0..n)
                    .map(|a| self.terms.keys().map(|e| e[a]).min().unwrap())
                    .collect()
            };
        }
        self
    }

    /// Drops everything past `window` (componentwise min with the current one).
    pub fn truncate(&self, window: &[i64]) -> Self {
        let w: Vec<i64> = self
            .window
            .iter()
            .zip(window)
            .map(|(a, b)| *a.min(b))
            .collect();
        LaurentElement {
            ring: self.ring.clone(),
            terms: self.terms.clone(),
            lower: self.lower.clone(),
            window: w,
        }
        .normalized()
    }

    /// Replaces the lower bound by a larger valid one.
    pub(crate) fn with_lower(mut self, lower: Vec<i64>) -> Self {
        if !self.is_exact() {
            self.lower = self
                .lower
                .iter()
                .zip(&lower)
                .map(|(a, b)| *a.max(b))
                .collect();
        }
        self
    }
}

impl SeriesRing {
    pub fn zero(self: &Arc<Self>) -> LaurentElement {
        LaurentElement {
            ring: self.clone(),
            terms: BTreeMap::new(),
            lower: vec![0; self.nvars()],
            window: vec![EXACT; self.nvars()],
        }
    }

    pub fn constant(self: &Arc<Self>, c: CoefficientElement) -> LaurentElement {
        self.monomial(vec![0; self.nvars()], c)
    }

    pub fn one(self: &Arc<Self>) -> LaurentElement {
        self.constant(self.coeffs.one())
    }

    pub fn scalar(self: &Arc<Self>, c: u32) -> LaurentElement {
        self.constant(self.coeffs.scalar(c))
    }

    /// `c · X^e`, exact.
    pub fn monomial(self: &Arc<Self>, e: Vec<i64>, c: CoefficientElement) -> LaurentElement {
        let mut terms = BTreeMap::new();
        let lower = e.clone();
        terms.insert(e, c);
        LaurentElement {
            ring: self.clone(),
            terms,
            lower,
            window: vec![EXACT; self.nvars()],
        }
        .normalized()
    }

    pub fn var(self: &Arc<Self>, alpha: usize) -> LaurentElement {
        let mut e = vec![0; self.nvars()];
        e[alpha] = 1;
        self.monomial(e, self.coeffs.one())
    }

    /// `X_Δ^k`.
    pub fn x_delta_pow(self: &Arc<Self>, k: i64) -> LaurentElement {
        self.monomial(vec![k; self.nvars()], self.coeffs.one())
    }

    fn check(&self, a: &LaurentElement) -> Result<()> {
        if *a.ring.as_ref() != *self {
            return Err(Error::RingMismatch("series from a different ring".into()));
        }
        Ok(())
    }

    pub fn add(self: &Arc<Self>, a: &LaurentElement, b: &LaurentElement) -> Result<LaurentElement> {
        self.check(a)?;
        self.check(b)?;
        let k = &self.coeffs;
        let window: Vec<i64> = a
            .window
            .iter()
            .zip(&b.window)
            .map(|(x, y)| *x.min(y))
            .collect();
        let lower: Vec<i64> = if a.terms.is_empty() && a.is_exact() {
            b.lower.clone()
        } else if b.terms.is_empty() && b.is_exact() {
            a.lower.clone()
        } else {
            a.lower
                .iter()
                .zip(&b.lower)
                .map(|(x, y)| *x.min(y))
                .collect()
        };
        let inside = |e: &Vec<i64>| e.iter().zip(&window).all(|(x, y)| x <= y);
        let mut terms: BTreeMap<Vec<i64>, CoefficientElement> = a
            .terms
            .iter()
            .filter(|(e, _)| inside(e))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        for (e, c) in b.terms.iter().filter(|(e, _)| inside(e)) {
            match terms.get_mut(e) {
                Some(cur) => *cur = k.add(cur, c),
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        Ok(LaurentElement {
            ring: self.clone(),
            terms,
            lower,
            window,
        }
        .normalized())
    }

    pub fn neg(self: &Arc<Self>, a: &LaurentElement) -> LaurentElement {
        let k = &self.coeffs;
        LaurentElement {
            ring: self.clone(),
            terms: a.terms.iter().map(|(e, c)| (e.clone(), k.neg(c))).collect(),
            lower: a.lower.clone(),
            window: a.window.clone(),
        }
    }

    pub fn sub(self: &Arc<Self>, a: &LaurentElement, b: &LaurentElement) -> Result<LaurentElement> {
        self.add(a, &self.neg(b))
    }

    pub fn scale(self: &Arc<Self>, a: &LaurentElement, c: u32) -> LaurentElement {
        let k = &self.coeffs;
        LaurentElement {
            ring: self.clone(),
            terms: a
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), k.scale(x, c)))
                .collect(),
            lower: a.lower.clone(),
            window: a.window.clone(),
        }
        .normalized()
    }

    pub fn mul_coeff(
        self: &Arc<Self>,
        a: &LaurentElement,
        c: &CoefficientElement,
    ) -> LaurentElement {
        let k = &self.coeffs;
        LaurentElement {
            ring: self.clone(),
            terms: a
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), k.mul(x, c)))
                .collect(),
            lower: a.lower.clone(),
            window: a.window.clone(),
        }
        .normalized()
    }

    /// Multiplication by the exact monomial `X^e`.
    pub fn shift(self: &Arc<Self>, a: &LaurentElement, e: &[i64]) -> LaurentElement {
        let add = |v: &[i64]| -> Vec<i64> { v.iter().zip(e).map(|(x, y)| wadd(*x, *y)).collect() };
        LaurentElement {
            ring: self.clone(),
            terms: a.terms.iter().map(|(k, c)| (add(k), c.clone())).collect(),
            lower: add(&a.lower),
            window: add(&a.window),
        }
        .normalized()
    }

    pub fn mul(self: &Arc<Self>, a: &LaurentElement, b: &LaurentElement) -> Result<LaurentElement> {
        self.check(a)?;
        self.check(b)?;
        let n = self.nvars();
        if (a.terms.is_empty() && a.is_exact()) || (b.terms.is_empty() && b.is_exact()) {
            return Ok(self.zero());
        }
        let lower: Vec<i64> = (0..n).map(|i| a.lower[i] + b.lower[i]).collect();
        let window: Vec<i64> = (0..n)
            .map(|i| wadd(a.window[i], b.lower[i]).min(wadd(b.window[i], a.lower[i])))
            .map(|w| if is_exact(w) { EXACT } else { w })
            .collect();
        // Everything past the ring cap is dropped anyway; skip those products.
        let cap: Vec<i64> = (0..n).map(|i| window[i].min(self.precision[i])).collect();
        let k = &self.coeffs;
        let mut terms: BTreeMap<Vec<i64>, CoefficientElement> = BTreeMap::new();
        let mut overflow = vec![false; n];
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let mut skip = false;
                for i in 0..n {
                    if e[i] > cap[i] {
                        if e[i] <= window[i] {
                            overflow[i] = true;
                        }
                        skip = true;
                    }
                }
                if skip {
                    continue;
                }
                let c = k.mul(ca, cb);
                match terms.get_mut(&e) {
                    Some(cur) => *cur = k.add(cur, &c),
                    None => {
                        terms.insert(e, c);
                    }
                }
            }
        }
        let mut window = window;
        for i in 0..n {
            if overflow[i] {
                window[i] = window[i].min(self.precision[i]);
            }
        }
        Ok(LaurentElement {
            ring: self.clone(),
            terms,
            lower,
            window,
        }
        .normalized())
    }

    pub fn pow(self: &Arc<Self>, a: &LaurentElement, mut e: u64) -> Result<LaurentElement> {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b)?;
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b)?;
            }
        }
        Ok(r)
    }

    pub fn pow_signed(self: &Arc<Self>, a: &LaurentElement, e: i64) -> Result<LaurentElement> {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(&self.invert(a)?, e.unsigned_abs())
        }
    }

    /// Equality of the known parts on the common window.
    pub fn equal_on_window(&self, a: &LaurentElement, b: &LaurentElement) -> bool {
        let ring = a.ring.clone();
        match ring.sub(a, b) {
            Ok(d) => d.terms.is_empty(),
            Err(_) => false,
        }
    }

    /// `val_{X_α}`; `None` is `+∞` (exact zero).
    pub fn val_alpha(&self, a: &LaurentElement, alpha: usize) -> Result<Option<i64>> {
        let Some(v) = a.terms.keys().map(|e| e[alpha]).min() else {
            if a.is_exact() {
                return Ok(None);
            }
            return Err(Error::ValuationUndecided);
        };
        if v == a.lower[alpha] {
            return Ok(Some(v));
        }
        // Unknown terms have e_β > W_β for some β; if only X_α is truncated
        // they all have e_α > W_α >= v.
        let others_exact = (0..self.nvars())
            .filter(|&b| b != alpha)
            .all(|b| is_exact(a.window[b]));
        if others_exact {
            return Ok(Some(v));
        }
        Err(Error::ValuationUndecided)
    }

    /// Whether every unknown term of `a` is `>= v` componentwise.
    fn corner_certified(&self, a: &LaurentElement, v: &[i64]) -> bool {
        let finite: Vec<usize> = (0..self.nvars())
            .filter(|&b| !is_exact(a.window[b]))
            .collect();
        match finite.len() {
            0 => true,
            1 => (0..self.nvars())
                .filter(|&g| g != finite[0])
                .all(|g| a.lower[g] >= v[g]),
            _ => (0..self.nvars()).all(|g| a.lower[g] >= v[g]),
        }
    }

    /// Minimal exponent of the `j`-th idempotent component, if it is a
    /// minimum; `Err(true)` if the component has several minimal corners,
    /// `Err(false)` if the known component is empty.
    fn component_corner(
        &self,
        a: &LaurentElement,
        j: usize,
    ) -> std::result::Result<(Vec<i64>, CoefficientElement), bool> {
        let k = &self.coeffs;
        let comp: Vec<(&Vec<i64>, CoefficientElement)> = a
            .terms
            .iter()
            .map(|(e, c)| (e, k.component(c, j)))
            .filter(|(_, c)| !k.is_zero(c))
            .collect();
        if comp.is_empty() {
            return Err(false);
        }
        let minimal: Vec<usize> = (0..comp.len())
            .filter(|&i| {
                !comp
                    .iter()
                    .enumerate()
                    .any(|(l, (e, _))| l != i && e.iter().zip(comp[i].0).all(|(x, y)| x <= y))
            })
            .collect();
        if minimal.len() != 1 {
            return Err(true);
        }
        let (e, c) = &comp[minimal[0]];
        Ok(((*e).clone(), c.clone()))
    }

    pub fn is_unit(&self, a: &LaurentElement) -> SeriesUnitStatus {
        let k = &self.coeffs;
        let mut status = SeriesUnitStatus::Unit;
        for j in 0..k.decomposition().len() {
            match self.component_corner(a, j) {
                Err(true) => return SeriesUnitStatus::Nonunit,
                Err(false) => {
                    if a.is_exact() {
                        return SeriesUnitStatus::Nonunit;
                    }
                    status = SeriesUnitStatus::Undecided;
                }
                Ok((v, c)) => {
                    if !self.corner_certified(a, &v) {
                        status = SeriesUnitStatus::Undecided;
                        continue;
                    }
                    match k.is_unit_in_component(&c, j) {
                        UnitStatus::Unit => {}
                        UnitStatus::ZeroDivisorOrZero => return SeriesUnitStatus::Nonunit,
                        UnitStatus::Undecided => status = SeriesUnitStatus::Undecided,
                    }
                }
            }
        }
        status
    }

    /// Inverse of a certified unit: per idempotent component, divide by the
    /// corner term and sum the geometric series of the residual.
    pub fn invert(self: &Arc<Self>, a: &LaurentElement) -> Result<LaurentElement> {
        self.check(a)?;
        match self.is_unit(a) {
            SeriesUnitStatus::Unit => {}
            SeriesUnitStatus::Nonunit => return Err(Error::NotUnit("series is not a unit".into())),
            SeriesUnitStatus::Undecided => return Err(Error::Undecided("series unit test".into())),
        }
        let k = &self.coeffs;
        let n = self.nvars();
        let mut total = self.zero();
        for j in 0..k.decomposition().len() {
            let (v, c) = self.component_corner(a, j).expect("unit has corners");
            let cinv = k.inverse_in_component(&c, j)?;
            let neg_v: Vec<i64> = v.iter().map(|x| -x).collect();
            let u = self.monomial(neg_v, cinv);
            let bj = self.constant(k.from_fdelta(k.decomposition().idempotents[j].clone()));
            let comp = self.mul(&bj, a)?;
            // r = u·comp - b_j has all terms >= 0 (corner certified).
            let r = self.sub(&self.mul(&u, &comp)?, &bj)?.with_lower(vec![0; n]);
            let neg_r = self.neg(&r);
            let mut term = bj.clone();
            let mut sum = bj;
            loop {
                term = self.mul(&term, &neg_r)?.with_lower(vec![0; n]);
                if term.terms.is_empty() {
                    // Window of the sum is bounded by that of the residual powers.
                    let w: Vec<i64> = sum
                        .window
                        .iter()
                        .zip(&term.window)
                        .map(|(x, y)| *x.min(y))
                        .collect();
                    sum = sum.truncate(&w);
                    break;
                }
                sum = self.add(&sum, &term)?;
            }
            total = self.add(&total, &self.mul(&u, &sum)?)?;
        }
        Ok(total)
    }

    /// `(1 + X_α)^c - 1` truncated at `N_α`.
    pub fn binomial_power(
        self: &Arc<Self>,
        alpha: usize,
        c: &PAdicUnitApprox,
    ) -> Result<LaurentElement> {
        let one_plus = self.add(&self.one(), &self.var(alpha))?;
        let pw = self.binomial_series(&one_plus, alpha, c)?;
        self.sub(&pw, &self.one())
    }

    /// `(1 + z)^c` for `1 + z = base` with `z` supported in positive
    /// `X_α`-degree, through `Σ_k C(c, k) z^k` with Lucas binomials.
    pub fn binomial_series(
        self: &Arc<Self>,
        base: &LaurentElement,
        alpha: usize,
        c: &PAdicUnitApprox,
    ) -> Result<LaurentElement> {
        let cap = self.precision[alpha];
        let need = PAdicUnitApprox::digits_needed(self.p(), cap as u64);
        if c.m < need {
            return Err(Error::DigitPrecision { need, have: c.m });
        }
        if c.p != self.p() {
            return Err(Error::RingMismatch(
                "p-adic exponent for a different p".into(),
            ));
        }
        let z = self.sub(base, &self.one())?;
        if z.terms
            .keys()
            .any(|e| e[alpha] < 1 || e.iter().enumerate().any(|(b, &x)| b != alpha && x < 0))
        {
            return Err(Error::Config("binomial series needs z in X_α·E⁺".into()));
        }
        let z = z.with_lower({
            let mut l = vec![0; self.nvars()];
            l[alpha] = 1;
            l
        });
        let p = self.p();
        let mut acc = self.one();
        let mut zk = self.one();
        for kk in 1..=cap as u64 {
            zk = self.mul(&zk, &z)?;
            if zk.terms.is_empty() {
                break;
            }
            let b = binomial_mod_p(p, c.residue, kk);
            if b != 0 {
                acc = self.add(&acc, &self.scale(&zk, b))?;
            }
        }
        // Terms of degree > N_α in X_α are not computed.
        let mut w = acc.window.clone();
        w[alpha] = w[alpha].min(cap);
        Ok(acc.truncate(&w))
    }
}

/// JSON schema `laurent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentJson {
    #[serde(default)]
    pub pole_bound: i64,
    /// Per-variable lower bound; defaults to `-pole_bound`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<BTreeMap<String, i64>>,
    /// Per-variable window; `null` or missing means exact.
    #[serde(default)]
    pub window: Option<BTreeMap<String, i64>>,
    pub terms: Vec<LaurentTermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentTermJson {
    #[serde(default)]
    pub exps: BTreeMap<String, i64>,
    pub coeff: crate::coeff::element::CoefficientJson,
}

impl SeriesRing {
    pub fn to_json(&self, a: &LaurentElement) -> LaurentJson {
        let names: Vec<String> = (0..self.nvars()).map(|i| self.var_name(i)).collect();
        let window = if a.is_exact() {
            None
        } else {
            Some(
                names
                    .iter()
                    .zip(&a.window)
                    .filter(|(_, w)| !is_exact(**w))
                    .map(|(n, w)| (n.clone(), *w))
                    .collect(),
            )
        };
        LaurentJson {
            pole_bound: a.pole_bound(),
            lower: Some(names.iter().cloned().zip(a.lower.iter().copied()).collect()),
            window,
            terms: a
                .terms
                .iter()
                .map(|(e, c)| LaurentTermJson {
                    exps: names
                        .iter()
                        .zip(e)
                        .filter(|(_, x)| **x != 0)
                        .map(|(n, x)| (n.clone(), *x))
                        .collect(),
                    coeff: self.coeffs.to_json(c),
                })
                .collect(),
        }
    }

    pub fn from_json(self: &Arc<Self>, j: &LaurentJson) -> Result<LaurentElement> {
        let n = self.nvars();
        let lookup = |name: &str| {
            self.var_index(name)
                .ok_or_else(|| Error::Parse(format!("unknown variable {name}")))
        };
        let mut lower = vec![-j.pole_bound; n];
        if let Some(l) = &j.lower {
            for (name, &v) in l {
                lower[lookup(name)?] = v;
            }
        }
        let mut window = vec![EXACT; n];
        if let Some(w) = &j.window {
            for (name, &v) in w {
                window[lookup(name)?] = v;
            }
        }
        let mut terms: BTreeMap<Vec<i64>, CoefficientElement> = BTreeMap::new();
        let k = &self.coeffs;
        for t in &j.terms {
            let mut e = vec![0; n];
            for (name, &x) in &t.exps {
                e[lookup(name)?] = x;
            }
            let c = k.from_json(&t.coeff)?;
            let entry = terms.entry(e).or_insert_with(|| k.zero());
            *entry = k.add(entry, &c);
        }
        let explicit_lower = j.lower.is_some() || j.pole_bound != 0;
        if !explicit_lower {
            // Default: the pole bound is zero unless terms say otherwise.
            for e in terms.keys() {
                for i in 0..n {
                    lower[i] = lower[i].min(e[i]);
                }
            }
        }
        LaurentElement::from_parts(self, terms, lower, window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, nvars: usize, n: i64) -> Ring {
        let k = CoefficientAlgebra::standard(p, &vec![(1, 0); nvars]).unwrap();
        SeriesRing::uniform(k, n).unwrap()
    }

    #[test]
    fn square_of_one_plus_x_in_char_two() {
        let r = ring(2, 1, 8);
        let a = r.add(&r.one(), &r.var(0)).unwrap();
        let sq = r.mul(&a, &a).unwrap();
        let expect = r.add(&r.one(), &r.pow(&r.var(0), 2).unwrap()).unwrap();
        assert!(r.equal_on_window(&sq, &expect));
        assert!(sq.is_exact());
    }

    #[test]
    fn x_delta_inverse_cancels() {
        let r = ring(3, 2, 6);
        let prod = r.mul(&r.x_delta_pow(-1), &r.x_delta_pow(1)).unwrap();
        assert!(r.equal_on_window(&prod, &r.one()));
        assert_eq!(prod.pole_bound(), 0);
    }

    #[test]
    fn valuations() {
        let r = ring(2, 2, 8);
        let a = r
            .add(
                &r.pow(&r.var(0), 2).unwrap(),
                &r.mul(&r.var(0), &r.var(1)).unwrap(),
            )
            .unwrap();
        assert_eq!(r.val_alpha(&a, 0).unwrap(), Some(1));
        assert_eq!(r.val_alpha(&r.zero(), 0).unwrap(), None);
    }

    #[test]
    fn geometric_inverse() {
        let r = ring(2, 1, 4);
        let a = r.add(&r.one(), &r.var(0)).unwrap();
        let inv = r.invert(&a).unwrap();
        assert_eq!(inv.num_terms(), 5);
        assert_eq!(inv.window(), &[4]);
        let prod = r.mul(&a, &inv).unwrap();
        assert!(r.equal_on_window(&prod, &r.one()));
    }

    #[test]
    fn unit_status() {
        let r = ring(3, 2, 6);
        let x = r.var(0);
        let y = r.var(1);
        assert_eq!(
            r.is_unit(&r.add(&r.one(), &x).unwrap()),
            SeriesUnitStatus::Unit
        );
        assert_eq!(
            r.is_unit(&r.add(&x, &y).unwrap()),
            SeriesUnitStatus::Nonunit
        );
        let z = r
            .mul(&r.x_delta_pow(-1), &r.add(&r.one(), &x).unwrap())
            .unwrap();
        assert_eq!(r.is_unit(&z), SeriesUnitStatus::Unit);
        let zi = r.invert(&z).unwrap();
        assert!(r.equal_on_window(&r.mul(&z, &zi).unwrap(), &r.one()));
    }

    #[test]
    fn binomial_examples() {
        let r = ring(2, 1, 4);
        let c = PAdicUnitApprox::new(2, 3, 3).unwrap();
        let b = r.binomial_power(0, &c).unwrap();
        let x = r.var(0);
        let expect = r
            .add(
                &r.add(&x, &r.pow(&x, 2).unwrap()).unwrap(),
                &r.pow(&x, 3).unwrap(),
            )
            .unwrap();
        assert!(r.equal_on_window(&b, &expect));
        let c = PAdicUnitApprox::new(2, 2, 3).unwrap();
        let b = r.binomial_power(0, &c).unwrap();
        assert!(r.equal_on_window(&b, &r.pow(&x, 2).unwrap()));
        let low = PAdicUnitApprox::new(2, 3, 2).unwrap();
        assert!(matches!(
            r.binomial_power(0, &low),
            Err(Error::DigitPrecision { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let r = ring(3, 2, 6);
        let a = r.invert(&r.add(&r.one(), &r.var(1)).unwrap()).unwrap();
        let a = r.mul(&a, &r.x_delta_pow(-1)).unwrap();
        let j = r.to_json(&a);
        let back = r
            .from_json(&serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap())
            .unwrap();
        assert!(r.equal_on_window(&a, &back));
        assert_eq!(back.window(), a.window());
        assert_eq!(back.lower(), a.lower());
    }
}
