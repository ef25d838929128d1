//! Brute-force reference implementations for the test suites.
//!
//! Nothing here calls into the optimized arithmetic: elements are read out
//! of their sparse representation once and all further work is schoolbook
//! dense arithmetic with its own `F_Δ` multiplication, Gaussian elimination
//! and enumeration. Every entry point has a hard size cap.

use std::collections::BTreeMap;

use crate::coeff::FiniteFieldSpec;
use crate::error::{Error, Result};
use crate::series::{is_exact, LaurentElement};

/// Largest enumerated space for [`exhaustive_fixed_points`].
pub const ENUMERATION_CAP: usize = 16;
/// Largest unknown count for [`exhaustive_inverse_search`].
pub const INVERSE_CAP: usize = 20;

fn md(p: u32, x: u64) -> u32 {
    (x % p as u64) as u32
}

fn pinv(p: u32, a: u32) -> u32 {
    (1..p)
        .find(|&x| (a as u64 * x as u64) % p as u64 == 1)
        .expect("nonzero residue")
}

/// `F_Δ` with naive arithmetic: an element is a dense vector over the
/// tensor monomials `∏ ω_α^{i_α}`, last factor fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseField {
    pub p: u32,
    /// Monic moduli, low degree first.
    pub moduli: Vec<Vec<u32>>,
}

impl DenseField {
    pub fn new(specs: &[FiniteFieldSpec]) -> Self {
        DenseField {
            p: specs[0].p,
            moduli: specs.iter().map(|s| s.modulus.clone()).collect(),
        }
    }

    fn degrees(&self) -> Vec<usize> {
        self.moduli.iter().map(|m| m.len() - 1).collect()
    }

    pub fn dim(&self) -> usize {
        self.degrees().iter().product()
    }

    fn unflatten(&self, mut i: usize) -> Vec<usize> {
        let d = self.degrees();
        let mut out = vec![0; d.len()];
        for a in (0..d.len()).rev() {
            out[a] = i % d[a];
            i /= d[a];
        }
        out
    }

    fn flatten(&self, e: &[usize]) -> usize {
        let d = self.degrees();
        e.iter().zip(&d).fold(0, |acc, (&x, &n)| acc * n + x)
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.dim()]
    }

    pub fn one(&self) -> Vec<u32> {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    /// Reduces a polynomial in the `ω_α` (arbitrary exponents) factor by
    /// factor with `ω^n = −Σ m_i ω^i`.
    fn reduce(&self, mut poly: BTreeMap<Vec<usize>, u32>) -> Vec<u32> {
        let p = self.p;
        let d = self.degrees();
        for a in 0..d.len() {
            let top = poly.keys().map(|e| e[a]).max().unwrap_or(0);
            // Highest degree first: each step only creates lower degrees.
            for deg in (d[a]..=top).rev() {
                let high: Vec<(Vec<usize>, u32)> = poly
                    .iter()
                    .filter(|(e, &c)| c != 0 && e[a] == deg)
                    .map(|(e, &c)| (e.clone(), c))
                    .collect();
                for (e, c) in high {
                    poly.remove(&e);
                    for (i, &m) in self.moduli[a][..d[a]].iter().enumerate() {
                        if m == 0 {
                            continue;
                        }
                        let mut f = e.clone();
                        f[a] = e[a] - d[a] + i;
                        let slot = poly.entry(f).or_insert(0);
                        *slot = md(p, *slot as u64 + (p - m) as u64 * c as u64);
                    }
                }
            }
        }
        let mut out = self.zero();
        for (e, c) in poly {
            if c == 0 {
                continue;
            }
            let i = self.flatten(&e);
            out[i] = md(p, out[i] as u64 + c as u64);
        }
        out
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| md(self.p, x as u64 + y as u64))
            .collect()
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| md(self.p, x as u64 + (self.p - y) as u64))
            .collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut poly: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let ei = self.unflatten(i);
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let e: Vec<usize> = ei
                    .iter()
                    .zip(self.unflatten(j))
                    .map(|(u, v)| u + v)
                    .collect();
                let slot = poly.entry(e).or_insert(0);
                *slot = md(self.p, *slot as u64 + x as u64 * y as u64);
            }
        }
        self.reduce(poly)
    }

    pub fn pow(&self, a: &[u32], e: u64) -> Vec<u32> {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// `ω_α ↦ ω_α^p`, other factors fixed.
    pub fn frobenius_on(&self, a: &[u32], alpha: usize) -> Vec<u32> {
        let mut poly: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let mut e = self.unflatten(i);
            e[alpha] *= self.p as usize;
            let slot = poly.entry(e).or_insert(0);
            *slot = md(self.p, *slot as u64 + x as u64);
        }
        self.reduce(poly)
    }

    /// Inverse by enumeration of all elements.
    pub fn inverse(&self, a: &[u32]) -> Option<Vec<u32>> {
        let n = self.dim();
        let one = self.one();
        (0..(self.p as u64).pow(n as u32))
            .map(|k| digits_of(self.p, k, n))
            .find(|x| self.mul(a, x) == one)
    }
}

fn digits_of(p: u32, mut k: u64, n: usize) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = (k % p as u64) as u32;
            k /= p as u64;
            d
        })
        .collect()
}

/// A truncated Laurent polynomial with `F_Δ` coefficients on the full box
/// `lower <= e <= upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensePolynomial {
    pub field: DenseField,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    coeffs: Vec<Vec<u32>>,
}

impl DensePolynomial {
    pub fn zero(field: &DenseField, lower: Vec<i64>, upper: Vec<i64>) -> Self {
        let size: usize = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (u - l + 1).max(0) as usize)
            .product();
        DensePolynomial {
            field: field.clone(),
            lower,
            upper,
            coeffs: vec![field.zero(); size],
        }
    }

    pub fn nvars(&self) -> usize {
        self.lower.len()
    }

    fn in_box(&self, e: &[i64]) -> bool {
        e.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((x, l), u)| l <= x && x <= u)
    }

    fn offset(&self, e: &[i64]) -> usize {
        let mut off = 0usize;
        for (a, &x) in e.iter().enumerate() {
            let ext = (self.upper[a] - self.lower[a] + 1) as usize;
            off = off * ext + (x - self.lower[a]) as usize;
        }
        off
    }

    pub fn exponents(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for a in 0..self.nvars() {
            let mut next = Vec::new();
            for e in &out {
                for x in self.lower[a]..=self.upper[a] {
                    let mut f = e.clone();
                    f.push(x);
                    next.push(f);
                }
            }
            out = next;
        }
        out
    }

    pub fn get(&self, e: &[i64]) -> Vec<u32> {
        if self.in_box(e) {
            self.coeffs[self.offset(e)].clone()
        } else {
            self.field.zero()
        }
    }

    /// Adds `c` at `e`; silently ignores exponents outside the box.
    pub fn add_at(&mut self, e: &[i64], c: &[u32]) {
        if self.in_box(e) {
            let o = self.offset(e);
            self.coeffs[o] = self.field.add(&self.coeffs[o], c);
        }
    }

    /// Reads a series with `F_Δ` coefficients on the box `[lower, upper]`;
    /// `upper` must lie within the known window.
    pub fn from_series(
        field: &DenseField,
        x: &LaurentElement,
        lower: Vec<i64>,
        upper: Vec<i64>,
    ) -> Result<Self> {
        for (a, (&u, &w)) in upper.iter().zip(x.window()).enumerate() {
            if !is_exact(w) && u > w {
                return Err(Error::Config(format!(
                    "box exceeds the known window in variable {a}"
                )));
            }
        }
        let k = x.ring().coeffs();
        let mut out = Self::zero(field, lower, upper);
        for (e, c) in x.terms() {
            let f = k
                .as_fdelta(c)
                .ok_or_else(|| Error::Unrepresentable("oracle needs F_Δ coefficients".into()))?;
            if !out.in_box(e) {
                if e.iter().zip(&out.lower).any(|(x, l)| x < l) {
                    return Err(Error::Config("series has terms below the box".into()));
                }
                continue;
            }
            out.add_at(e, &f);
        }
        Ok(out)
    }

    /// Whether `x` agrees with `self` on the intersection of the box and
    /// the known window of `x`.
    pub fn agrees_with(&self, x: &LaurentElement) -> bool {
        let k = x.ring().coeffs();
        let known = |e: &[i64]| {
            e.iter()
                .zip(x.window())
                .all(|(v, &w)| is_exact(w) || *v <= w)
        };
        for (e, c) in x.terms() {
            if self.in_box(e) {
                match k.as_fdelta(c) {
                    Some(f) if f == self.get(e) => {}
                    _ => return false,
                }
            } else if e.iter().zip(&self.lower).any(|(v, l)| v < l) {
                return false;
            }
        }
        for e in self.exponents() {
            let c = self.get(&e);
            if c.iter().any(|&v| v != 0) && known(&e) && x.coeff(&e).is_none() {
                return false;
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|&v| v == 0))
    }
}

/// Schoolbook product. The result box starts at `la + lb` and ends at
/// `min(ua + lb, ub + la)`, the last degree both factors determine.
pub fn dense_mul(a: &DensePolynomial, b: &DensePolynomial) -> Result<DensePolynomial> {
    if a.field != b.field || a.nvars() != b.nvars() {
        return Err(Error::Config("incompatible dense operands".into()));
    }
    let n = a.nvars();
    let lower: Vec<i64> = (0..n).map(|i| a.lower[i] + b.lower[i]).collect();
    let upper: Vec<i64> = (0..n)
        .map(|i| (a.upper[i] + b.lower[i]).min(b.upper[i] + a.lower[i]))
        .collect();
    let mut out = DensePolynomial::zero(&a.field, lower, upper);
    let ea = a.exponents();
    let eb = b.exponents();
    for x in &ea {
        let cx = a.get(x);
        if cx.iter().all(|&v| v == 0) {
            continue;
        }
        for y in &eb {
            let cy = b.get(y);
            if cy.iter().all(|&v| v == 0) {
                continue;
            }
            let e: Vec<i64> = x.iter().zip(y).map(|(u, v)| u + v).collect();
            out.add_at(&e, &a.field.mul(&cx, &cy));
        }
    }
    Ok(out)
}

fn dense_one(field: &DenseField, upper: Vec<i64>) -> DensePolynomial {
    let n = upper.len();
    let mut one = DensePolynomial::zero(field, vec![0; n], upper);
    one.add_at(&vec![0; n], &field.one());
    one
}

/// `(1 + X_α)^c` on `[0, upper]` by repeated squaring.
pub fn dense_binomial(
    field: &DenseField,
    alpha: usize,
    c: u64,
    upper: Vec<i64>,
) -> DensePolynomial {
    let n = upper.len();
    let mut base = dense_one(field, upper.clone());
    let mut e1 = vec![0; n];
    e1[alpha] = 1;
    base.add_at(&e1, &field.one());
    let mut acc = dense_one(field, upper.clone());
    let mut k = c;
    while k > 0 {
        if k & 1 == 1 {
            acc = restrict(&dense_mul(&acc, &base).expect("same field"), &upper);
        }
        k >>= 1;
        if k > 0 {
            base = restrict(&dense_mul(&base, &base).expect("same field"), &upper);
        }
    }
    acc
}

fn restrict(a: &DensePolynomial, upper: &[i64]) -> DensePolynomial {
    let up: Vec<i64> = a.upper.iter().zip(upper).map(|(x, y)| *x.min(y)).collect();
    let mut out = DensePolynomial::zero(&a.field, a.lower.clone(), up);
    for e in out.exponents() {
        let c = a.get(&e);
        out.add_at(&e, &c);
    }
    out
}

/// `Σ_e σ(a_e) ∏ img_β^{e_β}` for `a` with non-negative exponents, where
/// `img_β` involves only `X_β` and has `X_β`-order `v_β >= 1`. The result
/// is returned on `[0, upper]`; `upper_β` may not exceed
/// `(a.upper_β + 1)·v_β − 1`.
pub fn dense_substitute(
    a: &DensePolynomial,
    images: &[DensePolynomial],
    coeff_map: &dyn Fn(&[u32]) -> Vec<u32>,
    upper: Vec<i64>,
) -> Result<DensePolynomial> {
    let n = a.nvars();
    if a.lower.iter().any(|&l| l < 0) {
        return Err(Error::Config(
            "dense substitution needs non-negative exponents".into(),
        ));
    }
    for (b, img) in images.iter().enumerate() {
        let v = img
            .exponents()
            .into_iter()
            .filter(|e| img.get(e).iter().any(|&x| x != 0))
            .map(|e| {
                if e.iter().enumerate().any(|(g, &x)| g != b && x != 0) {
                    i64::MIN
                } else {
                    e[b]
                }
            })
            .min()
            .unwrap_or(i64::MAX);
        if v == i64::MIN || v < 1 {
            return Err(Error::Config(format!(
                "image of variable {b} is not X_{b}·(unit)"
            )));
        }
        if upper[b] > (a.upper[b] + 1) * v - 1 || upper[b] > img.upper[b] {
            return Err(Error::Config(format!(
                "requested box exceeds what is determined in variable {b}"
            )));
        }
    }
    // Powers img_β^k for k up to a.upper_β.
    let mut powers: Vec<Vec<DensePolynomial>> = Vec::with_capacity(n);
    for (b, img) in images.iter().enumerate() {
        let mut list = vec![dense_one(&a.field, upper.clone())];
        for k in 1..=a.upper[b].max(0) {
            let prev = &list[k as usize - 1];
            list.push(restrict(&dense_mul(prev, &restrict(img, &upper))?, &upper));
        }
        powers.push(list);
    }
    let mut out = DensePolynomial::zero(&a.field, vec![0; n], upper.clone());
    for e in a.exponents() {
        let c = a.get(&e);
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let mut term = dense_one(&a.field, upper.clone());
        for b in 0..n {
            term = restrict(&dense_mul(&term, &powers[b][e[b] as usize])?, &upper);
        }
        let sc = coeff_map(&c);
        for f in term.exponents() {
            let t = term.get(&f);
            if t.iter().any(|&x| x != 0) {
                out.add_at(&f, &a.field.mul(&t, &sc));
            }
        }
    }
    Ok(out)
}

/// Gaussian elimination over `F_p`; returns a kernel basis of the
/// `rows × ncols` system.
pub fn naive_kernel(p: u32, rows: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, k);
        let inv = pinv(p, m[r][c]);
        for x in m[r].iter_mut() {
            *x = md(p, *x as u64 * inv as u64);
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..ncols {
                    m[i][j] = md(p, m[i][j] as u64 + (p - f) as u64 * m[r][j] as u64);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = md(p, (p - m[i][free]) as u64);
        }
        basis.push(v);
    }
    basis
}

/// All solutions of `rows · x = 0` by enumeration of `F_p^ncols`.
pub fn exhaustive_kernel(p: u32, rows: &[Vec<u32>], ncols: usize) -> Result<Vec<Vec<u32>>> {
    if ncols > ENUMERATION_CAP {
        return Err(Error::DimensionTooLarge(format!(
            "{ncols} > {ENUMERATION_CAP}"
        )));
    }
    let total = (p as u64)
        .checked_pow(ncols as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::DimensionTooLarge(format!("{p}^{ncols} vectors")))?;
    Ok((0..total)
        .map(|k| digits_of(p, k, ncols))
        .filter(|x| {
            rows.iter().all(|r| {
                r.iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p as u64)
                    == 0
            })
        })
        .collect())
}

/// Primitive idempotents of `F_Δ` computed independently: the
/// Frobenius-fixed subalgebra `{a : a^p = a}` is spanned by idempotents;
/// each of its basis vectors takes a constant value `λ ∈ F_p` on every
/// component, so multiplying by the indicators `1 − (b − λ)^{p−1}` refines
/// the current idempotents until they are primitive.
pub fn crt_split(specs: &[FiniteFieldSpec]) -> Result<Vec<Vec<u32>>> {
    let field = DenseField::new(specs);
    let p = field.p;
    let n = field.dim();
    if n > 256 {
        return Err(Error::DegreeCap(format!(
            "F_Δ of dimension {n} exceeds the oracle cap"
        )));
    }
    // Columns of (Frob − I).
    let mut mat = vec![vec![0u32; n]; n];
    for j in 0..n {
        let mut e = field.zero();
        e[j] = 1;
        let d = field.sub(&field.pow(&e, p as u64), &e);
        for i in 0..n {
            mat[i][j] = d[i];
        }
    }
    let fixed = naive_kernel(p, &mat, n);
    let mut idems = vec![field.one()];
    for b in &fixed {
        let indicators: Vec<Vec<u32>> = (0..p)
            .map(|lambda| {
                let mut shifted = b.clone();
                shifted[0] = md(p, shifted[0] as u64 + (p - lambda) as u64);
                field.sub(&field.one(), &field.pow(&shifted, p as u64 - 1))
            })
            .collect();
        let mut next = Vec::new();
        for e in &idems {
            for ind in &indicators {
                let piece = field.mul(e, ind);
                if piece.iter().any(|&x| x != 0) {
                    next.push(piece);
                }
            }
        }
        idems = next;
    }
    idems.sort();
    Ok(idems)
}

/// Simultaneous fixed points of the partial Frobenii `φ_α` (`α` in `ops`)
/// on `F_Δ`-polynomials supported in `[0, sub]`, by enumeration. With
/// `quotient = Some((α, r))` the comparison ignores `X_α`-degrees `>= r`.
/// Returns all fixed vectors as coordinates on the box in the order of
/// [`DensePolynomial::exponents`], `F_Δ` coordinates fastest.
pub fn exhaustive_fixed_points(
    field: &DenseField,
    sub: &[i64],
    ops: &[usize],
    quotient: Option<(usize, i64)>,
) -> Result<Vec<Vec<u32>>> {
    let p = field.p;
    let n = sub.len();
    let proto = DensePolynomial::zero(field, vec![0; n], sub.to_vec());
    let exps = proto.exponents();
    let fd = field.dim();
    let dim = exps.len() * fd;
    if dim > ENUMERATION_CAP {
        return Err(Error::DimensionTooLarge(format!(
            "{dim} > {ENUMERATION_CAP}"
        )));
    }
    let image_upper: Vec<i64> = sub.iter().map(|&s| s * p as i64).collect();
    let mut out = Vec::new();
    for k in 0..(p as u64).pow(dim as u32) {
        let coords = digits_of(p, k, dim);
        let mut v = DensePolynomial::zero(field, vec![0; n], sub.to_vec());
        for (i, e) in exps.iter().enumerate() {
            v.add_at(e, &coords[i * fd..(i + 1) * fd]);
        }
        let mut fixed = true;
        for &alpha in ops {
            // φ_α(Σ c_e X^e) = Σ φ_α(c_e) X^{e with e_α scaled by p}.
            let mut img = DensePolynomial::zero(field, vec![0; n], image_upper.clone());
            for e in &exps {
                let c = v.get(e);
                if c.iter().all(|&x| x == 0) {
                    continue;
                }
                let mut f = e.clone();
                f[alpha] *= p as i64;
                img.add_at(&f, &field.frobenius_on(&c, alpha));
            }
            for e in img.exponents() {
                if let Some((q, r)) = quotient {
                    if e[q] >= r {
                        continue;
                    }
                }
                if img.get(&e) != v.get(&e) {
                    fixed = false;
                    break;
                }
            }
            if !fixed {
                break;
            }
        }
        if fixed {
            out.push(coords);
        }
    }
    Ok(out)
}

/// Solves `a·x = 1` for `x` supported on `[0, window]` with the equations
/// imposed on `[0, window]`. `None` certifies that `a` has no inverse in
/// `E_Δ⁺` at this window.
pub fn exhaustive_inverse_search(
    a: &DensePolynomial,
    window: &[i64],
) -> Result<Option<DensePolynomial>> {
    let field = &a.field;
    let p = field.p;
    let n = a.nvars();
    if a.lower.iter().any(|&l| l < 0) {
        return Err(Error::Config("inverse search is over E_Δ⁺".into()));
    }
    let proto = DensePolynomial::zero(field, vec![0; n], window.to_vec());
    let exps = proto.exponents();
    let fd = field.dim();
    let unknowns = exps.len() * fd;
    if unknowns > INVERSE_CAP {
        return Err(Error::DimensionTooLarge(format!(
            "{unknowns} > {INVERSE_CAP}"
        )));
    }
    // Column for unknown (e, f): coordinates of a · ω_f X^e on the box.
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(unknowns);
    for e in &exps {
        for f in 0..fd {
            let mut basis = DensePolynomial::zero(field, vec![0; n], window.to_vec());
            let mut w = field.zero();
            w[f] = 1;
            basis.add_at(e, &w);
            let mut prod = DensePolynomial::zero(field, vec![0; n], window.to_vec());
            for x in a.exponents() {
                let cx = a.get(&x);
                if cx.iter().all(|&v| v == 0) {
                    continue;
                }
                let s: Vec<i64> = x.iter().zip(e).map(|(u, v)| u + v).collect();
                prod.add_at(&s, &field.mul(&cx, &w));
            }
            let mut col = Vec::with_capacity(unknowns);
            for y in &exps {
                col.extend(prod.get(y));
            }
            cols.push(col);
        }
    }
    // Augmented system [M | rhs] with rhs = coordinates of 1.
    let mut rows: Vec<Vec<u32>> = (0..unknowns)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect();
    for (i, r) in rows.iter_mut().enumerate() {
        r.push(if i == 0 { 1 } else { 0 });
    }
    let ker = naive_kernel(p, &rows, unknowns + 1);
    let Some(sol) = ker.iter().find(|v| v[unknowns] != 0) else {
        return Ok(None);
    };
    let scale = pinv(p, p - sol[unknowns]);
    let mut x = DensePolynomial::zero(field, vec![0; n], window.to_vec());
    for (i, e) in exps.iter().enumerate() {
        let c: Vec<u32> = sol[i * fd..(i + 1) * fd]
            .iter()
            .map(|&v| md(p, v as u64 * scale as u64))
            .collect();
        x.add_at(e, &c);
    }
    Ok(Some(x))
}
