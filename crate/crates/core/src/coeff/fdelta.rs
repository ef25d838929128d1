//! The finite étale algebra `F_Δ = ⊗_{F_p} F_{p^{n_α}}`.
//!
//! Elements are dense coordinate vectors in the tensor power basis
//! `ω^i = ⊗_α ω_α^{i_α}` with `0 <= i_α < n_α`, where `ω_α` is the class of
//! `X` in `F_p[X]/(g_α)`. Factor 0 is the slowest-varying index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{self, poly};

/// A finite field `F_p[X]/(modulus)` of degree `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteFieldSpec {
    pub p: u32,
    pub n: usize,
    /// Monic, coefficients low to high, length `n + 1`.
    pub modulus: Vec<u32>,
}

impl FiniteFieldSpec {
    pub fn new(p: u64, modulus: Vec<u32>) -> Result<Self> {
        let p = fp::check_prime(p)?;
        let modulus = poly::trim(modulus.into_iter().map(|c| c % p).collect());
        let n = poly::degree(&modulus)
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Config("modulus must have degree >= 1".into()))?;
        if modulus[n] != 1 {
            return Err(Error::Config(format!("modulus {modulus:?} is not monic")));
        }
        if !poly::is_irreducible(p, &modulus) {
            return Err(Error::Reducible(modulus, p));
        }
        Ok(Self { p, n, modulus })
    }

    /// `F_{p^n}` with the default irreducible modulus.
    pub fn standard(p: u64, n: usize) -> Result<Self> {
        let p32 = fp::check_prime(p)?;
        if n == 0 {
            return Err(Error::Config("extension degree must be >= 1".into()));
        }
        Ok(Self {
            p: p32,
            n,
            modulus: poly::default_irreducible(p32, n),
        })
    }
}

#[derive(Debug, Clone)]
struct Axis {
    n: usize,
    /// `reduced[k]` = coordinates of `ω^k` for `0 <= k <= 2n - 2`.
    reduced: Vec<Vec<u32>>,
    /// Column `i` holds the coordinates of `(ω^i)^p`.
    frob: Vec<Vec<u32>>,
}

/// Dense arithmetic in `F_Δ`.
#[derive(Debug, Clone)]
pub struct TensorAlgebra {
    p: u32,
    specs: Vec<FiniteFieldSpec>,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    dim: usize,
}

impl PartialEq for TensorAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.specs == other.specs
    }
}

fn reduce_power(p: u32, modulus: &[u32], k: usize) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut mono = vec![0u32; k + 1];
    mono[k] = 1;
    let mut r = poly::rem(p, &mono, modulus);
    r.resize(n, 0);
    r
}

impl TensorAlgebra {
    pub fn new(specs: Vec<FiniteFieldSpec>) -> Result<Self> {
        let p = specs
            .first()
            .map(|s| s.p)
            .ok_or_else(|| Error::Config("at least one factor required".into()))?;
        if specs.iter().any(|s| s.p != p) {
            return Err(Error::Config("all factors must share the same p".into()));
        }
        let mut axes = Vec::with_capacity(specs.len());
        for s in &specs {
            let reduced: Vec<Vec<u32>> = (0..=2 * s.n - 2)
                .map(|k| reduce_power(p, &s.modulus, k))
                .collect();
            let frob = (0..s.n)
                .map(|i| reduce_power(p, &s.modulus, i * p as usize))
                .collect();
            axes.push(Axis {
                n: s.n,
                reduced,
                frob,
            });
        }
        let mut strides = vec![1usize; specs.len()];
        for a in (0..specs.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * specs[a + 1].n;
        }
        let dim = specs.iter().map(|s| s.n).product();
        Ok(Self {
            p,
            specs,
            axes,
            strides,
            dim,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn specs(&self) -> &[FiniteFieldSpec] {
        &self.specs
    }

    pub fn num_factors(&self) -> usize {
        self.specs.len()
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.dim]
    }

    pub fn one(&self) -> Vec<u32> {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u32) -> Vec<u32> {
        let mut v = self.zero();
        v[0] = c % self.p;
        v
    }

    pub fn basis(&self, index: usize) -> Vec<u32> {
        let mut v = self.zero();
        v[index] = 1;
        v
    }

    /// The generator `ω_α` (class of `X` in the `α`-th factor).
    pub fn generator(&self, alpha: usize) -> Vec<u32> {
        if self.specs[alpha].n == 1 {
            // F_p = F_p[X]/(X - c): ω is the root c.
            let c = fp::neg(self.p, self.specs[alpha].modulus[0]);
            return self.scalar(c);
        }
        self.basis(self.strides[alpha])
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.specs.len()];
        for a in 0..self.specs.len() {
            idx[a] = flat / self.strides[a];
            flat %= self.strides[a];
        }
        idx
    }

    pub fn is_zero(&self, a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn is_scalar(&self, a: &[u32]) -> bool {
        a[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| fp::add(self.p, x, y))
            .collect()
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| fp::sub(self.p, x, y))
            .collect()
    }

    pub fn neg(&self, a: &[u32]) -> Vec<u32> {
        a.iter().map(|&x| fp::neg(self.p, x)).collect()
    }

    pub fn scale(&self, a: &[u32], c: u32) -> Vec<u32> {
        a.iter().map(|&x| fp::mul(self.p, x, c)).collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p;
        if self.dim == 1 {
            return vec![fp::mul(p, a[0], b[0])];
        }
        if self.is_scalar(a) {
            return self.scale(b, a[0]);
        }
        if self.is_scalar(b) {
            return self.scale(a, b[0]);
        }
        // Full convolution over the box of extents 2n-1, then reduce axis by axis.
        let ext: Vec<usize> = self.axes.iter().map(|ax| 2 * ax.n - 1).collect();
        let mut ext_strides = vec![1usize; ext.len()];
        for a_ in (0..ext.len().saturating_sub(1)).rev() {
            ext_strides[a_] = ext_strides[a_ + 1] * ext[a_ + 1];
        }
        let total: usize = ext.iter().product();
        let mut buf = vec![0u64; total];
        let a_nz: Vec<(usize, u64)> = a
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (self.ext_offset(i, &ext_strides), c as u64))
            .collect();
        for (j, &bc) in b.iter().enumerate() {
            if bc == 0 {
                continue;
            }
            let off_b = self.ext_offset(j, &ext_strides);
            for &(off_a, ac) in &a_nz {
                let slot = &mut buf[off_a + off_b];
                *slot = (*slot + ac * bc as u64) % p as u64;
            }
        }
        // Reduce each axis from extent 2n-1 down to n.
        let mut cur: Vec<u32> = buf.into_iter().map(|c| c as u32).collect();
        let mut cur_ext = ext;
        for axis in 0..self.axes.len() {
            let n = self.axes[axis].n;
            let old_ext = cur_ext.clone();
            let mut new_ext = cur_ext.clone();
            new_ext[axis] = n;
            let new_total: usize = new_ext.iter().product();
            let mut next = vec![0u32; new_total];
            let old_strides = strides_of(&old_ext);
            let new_strides = strides_of(&new_ext);
            for (flat, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut rest = flat;
                let mut idx = vec![0usize; old_ext.len()];
                for a_ in 0..old_ext.len() {
                    idx[a_] = rest / old_strides[a_];
                    rest %= old_strides[a_];
                }
                let k = idx[axis];
                let red = &self.axes[axis].reduced[k];
                for (r, &rc) in red.iter().enumerate() {
                    if rc == 0 {
                        continue;
                    }
                    idx[axis] = r;
                    let target: usize = idx.iter().zip(&new_strides).map(|(i, s)| i * s).sum();
                    next[target] = fp::add(p, next[target], fp::mul(p, c, rc));
                }
            }
            cur = next;
            cur_ext = new_ext;
        }
        cur
    }

    fn ext_offset(&self, flat: usize, ext_strides: &[usize]) -> usize {
        self.multi_index(flat)
            .iter()
            .zip(ext_strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn pow(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut r = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// The relative Frobenius `x ↦ x^{p^e}` on the `alpha` tensor factor.
    pub fn frobenius(&self, a: &[u32], alpha: usize, e: u32) -> Vec<u32> {
        if e == 0 || self.specs[alpha].n == 1 {
            return a.to_vec();
        }
        let mut cur = a.to_vec();
        // The Frobenius of F_{p^n} has order n.
        let reps = e as usize % self.specs[alpha].n;
        for _ in 0..reps {
            cur = self.apply_axis_map(&cur, alpha, &self.axes[alpha].frob);
        }
        cur
    }

    /// The absolute Frobenius `x ↦ x^p` (all factors at once).
    pub fn absolute_frobenius(&self, a: &[u32]) -> Vec<u32> {
        (0..self.specs.len()).fold(a.to_vec(), |acc, alpha| self.frobenius(&acc, alpha, 1))
    }

    fn apply_axis_map(&self, a: &[u32], axis: usize, columns: &[Vec<u32>]) -> Vec<u32> {
        let p = self.p;
        let stride = self.strides[axis];
        let mut out = self.zero();
        for (flat, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let i = (flat / stride) % self.axes[axis].n;
            let base = flat - i * stride;
            for (r, &rc) in columns[i].iter().enumerate() {
                if rc != 0 {
                    let t = base + r * stride;
                    out[t] = fp::add(p, out[t], fp::mul(p, c, rc));
                }
            }
        }
        out
    }

    /// Matrix (column-major list of columns) of multiplication by `a`.
    fn mul_matrix(&self, a: &[u32]) -> Vec<Vec<u32>> {
        (0..self.dim).map(|j| self.mul(a, &self.basis(j))).collect()
    }

    /// Solves `a * x = b` in `F_Δ` when a solution exists.
    pub fn solve_mul(&self, a: &[u32], b: &[u32]) -> Option<Vec<u32>> {
        let cols = self.mul_matrix(a);
        solve_dense(self.p, &cols, b)
    }

    pub fn is_unit(&self, a: &[u32]) -> bool {
        rank_dense(self.p, self.mul_matrix(a)) == self.dim
    }

    pub fn inverse(&self, a: &[u32]) -> Option<Vec<u32>> {
        if self.dim == 1 {
            return (a[0] != 0).then(|| vec![fp::inv(self.p, a[0])]);
        }
        if !self.is_unit(a) {
            return None;
        }
        self.solve_mul(a, &self.one())
    }
}

fn strides_of(ext: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; ext.len()];
    for a in (0..ext.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * ext[a + 1];
    }
    s
}

/// Rank of a list of column vectors over `F_p`.
pub(crate) fn rank_dense(p: u32, mut cols: Vec<Vec<u32>>) -> usize {
    let rows = cols.first().map_or(0, |c| c.len());
    let mut rank = 0;
    for r in 0..rows {
        let Some(piv) = (rank..cols.len()).find(|&c| cols[c][r] != 0) else {
            continue;
        };
        cols.swap(rank, piv);
        let inv = fp::inv(p, cols[rank][r]);
        let pivot = cols[rank].clone();
        for c in 0..cols.len() {
            if c != rank && cols[c][r] != 0 {
                let f = fp::mul(p, cols[c][r], inv);
                for (x, &y) in cols[c].iter_mut().zip(&pivot) {
                    *x = fp::sub(p, *x, fp::mul(p, f, y));
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `Σ x_j cols[j] = b` over `F_p`.
pub(crate) fn solve_dense(p: u32, cols: &[Vec<u32>], b: &[u32]) -> Option<Vec<u32>> {
    let n = cols.len();
    let m = b.len();
    // Augmented row-major matrix.
    let mut rows: Vec<Vec<u32>> = (0..m)
        .map(|r| {
            let mut row: Vec<u32> = cols.iter().map(|c| c[r]).collect();
            row.push(b[r]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        let Some(piv) = (rank..m).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = fp::inv(p, rows[rank][c]);
        for x in rows[rank].iter_mut() {
            *x = fp::mul(p, *x, inv);
        }
        let pivot = rows[rank].clone();
        for r in 0..m {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c];
                for (x, &y) in rows[r].iter_mut().zip(&pivot) {
                    *x = fp::sub(p, *x, fp::mul(p, f, y));
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[n] != 0) {
        return None;
    }
    let mut x = vec![0u32; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rows[r][n];
    }
    Some(x)
}
