//! `F_p`-linear fixed-point systems `{T(v) = v}` over a box of exponents.
//!
//! Unknowns are the `F_p`-coordinates of `v` in the basis
//! `X^e · ω_f · t^m · y^J · e_i` with `e` in the box, `ω_f` the standard
//! basis of `F_Δ`, `t^m` a monomial of total degree at most the cap, `y^J`
//! the power basis of the extension and `e_i` the module basis. Each
//! operator is additive and fixes `F_p`, so the conditions are linear.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::extension::{ExtElement, ExtMap, FiniteExtension};
use crate::endo::RingEndo;
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon, SparseVec};
use crate::module::PhiGammaModule;
use crate::series::{is_exact, Ring};

/// Default bound on the total degree of transcendental monomials.
pub const DEFAULT_T_DEGREE_CAP: u32 = 4;
/// Default bound on the number of unknowns.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", content = "index", rename_all = "snake_case")]
pub enum FixedOperator {
    /// `φ_α` (times the module matrix when a module is present).
    Phi(usize),
    /// The `i`-th Galois generator of the extension.
    Galois(usize),
}

/// Coordinates of one unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnknownKey {
    pub exponent: Vec<i64>,
    pub fdelta: usize,
    pub t_monomial: Vec<i32>,
    pub ext_index: usize,
    pub module_index: usize,
}

#[derive(Debug, Clone)]
pub struct FrobFixedSystem {
    ring: Ring,
    module: Option<PhiGammaModule>,
    extension: FiniteExtension,
    operators: Vec<FixedOperator>,
    lower: Vec<i64>,
    subwindow: Vec<i64>,
    quotient: Vec<bool>,
    t_degree_cap: u32,
    dimension_cap: usize,
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub columns: Vec<UnknownKey>,
    pub equations: usize,
    /// Nullspace of the assembled system.
    pub raw_basis: Vec<SparseVec>,
    /// Solutions vanishing on the boundary of the subwindow.
    pub basis: Vec<SparseVec>,
    /// Window on which the equations were imposed.
    pub equation_window: Vec<i64>,
}

impl FixedPointSolution {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn raw_dimension(&self) -> usize {
        self.raw_basis.len()
    }

    pub fn unconfirmed(&self) -> usize {
        self.raw_basis.len() - self.basis.len()
    }
}

/// Report schema for fixed-point runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub dimension: usize,
    pub unconfirmed: usize,
    pub unknowns: usize,
    pub equations: usize,
    /// Each basis vector as its nonzero coordinates.
    pub basis: Vec<Vec<(UnknownKey, u32)>>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl FrobFixedSystem {
    /// System over `E_Δ⁺` truncated to `[0, W′_α]` in each variable. The
    /// window `W` is the ring precision; `p·W′_α <= W_α` is required for
    /// every `φ_α` among the operators.
    pub fn new(ring: &Ring, operators: Vec<FixedOperator>, subwindow: Vec<i64>) -> Result<Self> {
        if subwindow.len() != ring.nvars() {
            return Err(Error::Config(
                "one subwindow bound per variable required".into(),
            ));
        }
        let sys = FrobFixedSystem {
            ring: ring.clone(),
            module: None,
            extension: FiniteExtension::trivial(ring),
            operators,
            lower: vec![0; ring.nvars()],
            subwindow,
            quotient: vec![false; ring.nvars()],
            t_degree_cap: DEFAULT_T_DEGREE_CAP,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// All `φ_α` on the largest subwindow `W′ = min(cap, ⌊W/p⌋)`.
    pub fn all_frobenii(ring: &Ring, subwindow_cap: i64) -> Result<Self> {
        let p = ring.p() as i64;
        let sub = ring
            .precision()
            .iter()
            .map(|&w| (w / p).min(subwindow_cap))
            .collect();
        Self::new(
            ring,
            (0..ring.nvars()).map(FixedOperator::Phi).collect(),
            sub,
        )
    }

    /// Fixed points of `φ_β` (`β ≠ α`) on `E⁺/(X_α^r)`, other variables
    /// truncated at `W′ = min(cap, ⌊W/p⌋)`.
    pub fn quotient(ring: &Ring, alpha: usize, r: i64, subwindow_cap: i64) -> Result<Self> {
        if r < 1 {
            return Err(Error::Config("quotient exponent r must be >= 1".into()));
        }
        let p = ring.p() as i64;
        let mut sub: Vec<i64> = ring
            .precision()
            .iter()
            .map(|&w| (w / p).min(subwindow_cap))
            .collect();
        sub[alpha] = r - 1;
        let ops = (0..ring.nvars())
            .filter(|&b| b != alpha)
            .map(FixedOperator::Phi)
            .collect();
        let mut sys = Self::new(ring, ops, sub)?;
        sys.quotient[alpha] = true;
        Ok(sys)
    }

    pub fn with_module(mut self, m: &PhiGammaModule) -> Result<Self> {
        if **m.ring() != *self.ring {
            return Err(Error::RingMismatch("module over another ring".into()));
        }
        self.module = Some(m.clone());
        Ok(self)
    }

    pub fn with_extension(mut self, e: &FiniteExtension) -> Result<Self> {
        if **e.ring() != *self.ring {
            return Err(Error::RingMismatch("extension over another ring".into()));
        }
        self.extension = e.clone();
        self.validate()?;
        Ok(self)
    }

    /// Allows poles: exponents start at `lower_α` (`<= 0`).
    pub fn with_lower(mut self, lower: Vec<i64>) -> Result<Self> {
        if lower.len() != self.ring.nvars() || lower.iter().any(|&l| l > 0) {
            return Err(Error::Config(
                "lower bounds must be <= 0, one per variable".into(),
            ));
        }
        self.lower = lower;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_degree_cap(mut self, cap: u32) -> Self {
        self.t_degree_cap = cap;
        self
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Self {
        self.dimension_cap = cap;
        self
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn operators(&self) -> &[FixedOperator] {
        &self.operators
    }

    pub fn subwindow(&self) -> &[i64] {
        &self.subwindow
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn extension(&self) -> &FiniteExtension {
        &self.extension
    }

    fn validate(&self) -> Result<()> {
        let p = self.ring.p() as i64;
        let w = self.ring.precision();
        for op in &self.operators {
            match *op {
                FixedOperator::Phi(a) => {
                    if a >= self.ring.nvars() {
                        return Err(Error::Config(format!("no variable {a}")));
                    }
                    if !self.quotient[a] && p * self.subwindow[a] > w[a] {
                        return Err(Error::Subwindow(format!(
                            "p·W′ = {} exceeds W = {} in {}",
                            p * self.subwindow[a],
                            w[a],
                            self.ring.var_name(a)
                        )));
                    }
                }
                FixedOperator::Galois(i) => {
                    if i >= self.extension.generators().len().max(1)
                        && !self.extension.generators().is_empty()
                    {
                        return Err(Error::Config(format!("no Galois generator {i}")));
                    }
                }
            }
        }
        for a in 0..self.ring.nvars() {
            if self.subwindow[a] < self.lower[a] {
                return Err(Error::Subwindow(format!(
                    "empty box in {}",
                    self.ring.var_name(a)
                )));
            }
            if self.subwindow[a] > w[a] {
                return Err(Error::Subwindow(format!(
                    "W′ exceeds W in {}",
                    self.ring.var_name(a)
                )));
            }
        }
        Ok(())
    }

    fn t_monomials(&self) -> Vec<Vec<i32>> {
        let n = self.ring.coeffs().num_t();
        let mut out = vec![vec![0i32; n]];
        for i in 0..n {
            let mut next = Vec::new();
            for m in &out {
                let used: i32 = m.iter().sum();
                for d in 0..=(self.t_degree_cap as i32 - used) {
                    let mut mm = m.clone();
                    mm[i] = d;
                    next.push(mm);
                }
            }
            out = next;
        }
        out
    }

    fn exponents(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for a in 0..self.ring.nvars() {
            let mut next = Vec::new();
            for e in &out {
                for x in self.lower[a]..=self.subwindow[a] {
                    let mut ee = e.clone();
                    ee.push(x);
                    next.push(ee);
                }
            }
            out = next;
        }
        out
    }

    /// Unknowns in column order.
    pub fn columns(&self) -> Result<Vec<UnknownKey>> {
        let rank = self.module.as_ref().map_or(1, |m| m.rank());
        let exps = self.exponents();
        let tms = self.t_monomials();
        let fdim = self.ring.coeffs().fdelta().dim();
        let total = rank * self.extension.degree() * exps.len() * tms.len() * fdim;
        if total > self.dimension_cap {
            return Err(Error::DimensionTooLarge(format!(
                "{total} unknowns exceed the cap {}",
                self.dimension_cap
            )));
        }
        let mut out = Vec::with_capacity(total);
        for module_index in 0..rank {
            for ext_index in 0..self.extension.degree() {
                for e in &exps {
                    for m in &tms {
                        for f in 0..fdim {
                            out.push(UnknownKey {
                                exponent: e.clone(),
                                fdelta: f,
                                t_monomial: m.clone(),
                                ext_index,
                                module_index,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Unknown as an element of `E′^rank`, scaled by `c`.
    fn basis_vector(&self, key: &UnknownKey, c: u32) -> Vec<ExtElement> {
        let ring = &self.ring;
        let k = ring.coeffs();
        let rank = self.module.as_ref().map_or(1, |m| m.rank());
        let mut f = k.fdelta().basis(key.fdelta);
        f = k.fdelta().scale(&f, c);
        let coeff = k.monomial(key.t_monomial.clone(), f);
        let mut v = vec![self.extension.zero(); rank];
        v[key.module_index][key.ext_index] = ring.monomial(key.exponent.clone(), coeff);
        v
    }

    /// Builds the vector with the given coordinates.
    pub fn vector(&self, columns: &[UnknownKey], coords: &SparseVec) -> Result<Vec<ExtElement>> {
        let rank = self.module.as_ref().map_or(1, |m| m.rank());
        let mut v = vec![self.extension.zero(); rank];
        for &(c, x) in coords {
            let b = self.basis_vector(&columns[c], x);
            for i in 0..rank {
                v[i] = self.extension.add(&v[i], &b[i])?;
            }
        }
        Ok(v)
    }

    fn ext_maps(&self) -> Result<Vec<ExtMap>> {
        self.operators
            .iter()
            .map(|op| match *op {
                FixedOperator::Phi(a) => self
                    .extension
                    .extend_endo(&RingEndo::make_phi(&self.ring, a)),
                FixedOperator::Galois(i) => Ok(self.extension.galois_generator(i)),
            })
            .collect()
    }

    /// `T(v)` for one operator.
    pub fn apply_operator(&self, op: FixedOperator, v: &[ExtElement]) -> Result<Vec<ExtElement>> {
        let map = match op {
            FixedOperator::Phi(a) => self
                .extension
                .extend_endo(&RingEndo::make_phi(&self.ring, a))?,
            FixedOperator::Galois(i) => self.extension.galois_generator(i),
        };
        self.apply_with(op, &map, v, &mut HashMap::new())
    }

    fn apply_with(
        &self,
        op: FixedOperator,
        map: &ExtMap,
        v: &[ExtElement],
        cache: &mut HashMap<Vec<usize>, ExtElement>,
    ) -> Result<Vec<ExtElement>> {
        let ext = &self.extension;
        let sv: Vec<ExtElement> = v
            .iter()
            .map(|x| ext.apply_map_cached(map, x, cache))
            .collect::<Result<_>>()?;
        match (op, &self.module) {
            (FixedOperator::Phi(a), Some(m)) => {
                let mat = m.phi_matrix(a);
                let mut out = Vec::with_capacity(sv.len());
                for row in mat {
                    let mut acc = ext.zero();
                    for (c, x) in row.iter().zip(&sv) {
                        acc = ext.add(&acc, &ext.scale_base(x, c)?)?;
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            _ => Ok(sv),
        }
    }

    fn is_boundary(&self, key: &UnknownKey) -> bool {
        // Without operators no equation is truncated, so nothing is an artifact.
        !self.operators.is_empty()
            && (0..self.ring.nvars()).any(|a| {
                !self.quotient[a]
                    && (key.exponent[a] == self.subwindow[a]
                        || (self.lower[a] < 0 && key.exponent[a] == self.lower[a]))
            })
    }

    /// Assembles `T(b) − b` for every unknown `b` and operator `T`, and
    /// returns the nullspace together with its boundary-free part.
    pub fn solve(&self) -> Result<FixedPointSolution> {
        let ring = &self.ring;
        let p = ring.p();
        let n = ring.nvars();
        let columns = self.columns()?;
        let maps = self.ext_maps()?;
        let mut row_index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut rows: Vec<Vec<(usize, u32)>> = Vec::new();
        let mut eq_window: Vec<i64> = ring.precision().to_vec();
        let mut images: Vec<Vec<(usize, Vec<ExtElement>)>> = Vec::new();
        for (&op, map) in self.operators.iter().zip(&maps) {
            let mut cache = HashMap::new();
            let mut per_op = Vec::with_capacity(columns.len());
            for (ci, key) in columns.iter().enumerate() {
                let b = self.basis_vector(key, 1);
                let tb = self.apply_with(op, map, &b, &mut cache)?;
                let mut diff = Vec::with_capacity(tb.len());
                for (x, y) in tb.iter().zip(&b) {
                    diff.push(self.extension.sub(x, y)?);
                }
                for el in diff.iter().flatten() {
                    for a in 0..n {
                        if !is_exact(el.window()[a]) {
                            eq_window[a] = eq_window[a].min(el.window()[a]);
                        }
                    }
                }
                per_op.push((ci, diff));
            }
            images.push(per_op);
        }
        for a in 0..n {
            if eq_window[a] < self.subwindow[a] {
                return Err(Error::Subwindow(format!(
                    "equations known only up to {} in {}",
                    eq_window[a],
                    ring.var_name(a)
                )));
            }
        }
        for (oi, per_op) in images.into_iter().enumerate() {
            for (ci, diff) in per_op {
                for (mi, ext_el) in diff.iter().enumerate() {
                    for (ji, el) in ext_el.iter().enumerate() {
                        for (e, c) in el.terms() {
                            if e.iter().zip(&eq_window).any(|(x, w)| x > w) {
                                continue;
                            }
                            if (0..n).any(|a| self.quotient[a] && e[a] > self.subwindow[a]) {
                                continue;
                            }
                            if c.has_denominator() {
                                return Err(Error::Unrepresentable(
                                    "operator image has a coefficient denominator".into(),
                                ));
                            }
                            for (m, f) in c.terms() {
                                for (fi, &x) in f.iter().enumerate() {
                                    if x == 0 {
                                        continue;
                                    }
                                    let mut key = Vec::with_capacity(4 + n + m.len());
                                    key.push(oi as i64);
                                    key.push(mi as i64);
                                    key.push(ji as i64);
                                    key.push(fi as i64);
                                    key.extend_from_slice(e);
                                    key.extend(m.iter().map(|&y| y as i64));
                                    let r = *row_index.entry(key).or_insert_with(|| {
                                        rows.push(Vec::new());
                                        rows.len() - 1
                                    });
                                    rows[r].push((ci, x));
                                }
                            }
                        }
                    }
                }
            }
        }
        let equations = rows.len();
        let mut ech = Echelon::new(p);
        for r in rows {
            ech.insert(linalg::sparse_from_pairs(p, r));
        }
        let raw_basis = ech.kernel(columns.len());
        let boundary: Vec<bool> = columns.iter().map(|c| self.is_boundary(c)).collect();
        let basis = linalg::restrict_vanishing(p, &raw_basis, &|c| boundary[c]);
        Ok(FixedPointSolution {
            columns,
            equations,
            raw_basis,
            basis,
            equation_window: eq_window,
        })
    }

    /// Re-checks `T(v) = v` for a coordinate vector by direct application.
    pub fn verify(&self, sol: &FixedPointSolution, coords: &SparseVec) -> Result<bool> {
        let v = self.vector(&sol.columns, coords)?;
        for &op in &self.operators {
            let tv = self.apply_operator(op, &v)?;
            for (x, y) in tv.iter().zip(&v) {
                let d = self.extension.sub(x, y)?;
                for el in &d {
                    let known = el.truncate(&sol.equation_window);
                    let quotient_free = known.terms().keys().any(|e| {
                        (0..self.ring.nvars())
                            .all(|a| !self.quotient[a] || e[a] <= self.subwindow[a])
                    });
                    if quotient_free {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Whether `coords` is a nonzero `F_p`-multiple of `1`.
    pub fn is_constant_one(&self, sol: &FixedPointSolution, coords: &SparseVec) -> bool {
        coords.len() == 1 && {
            let key = &sol.columns[coords[0].0];
            key.exponent.iter().all(|&x| x == 0)
                && key.fdelta == 0
                && key.t_monomial.iter().all(|&x| x == 0)
                && key.ext_index == 0
                && key.module_index == 0
        }
    }

    pub fn report(&self, sol: &FixedPointSolution) -> Result<FixedPointReport> {
        let mut checks = Vec::new();
        let mut sound = true;
        for v in &sol.basis {
            if !self.verify(sol, v)? {
                sound = false;
            }
        }
        checks.push(CheckEntry {
            name: "basis vectors are fixed by direct application".into(),
            passed: sound,
            detail: None,
        });
        Ok(FixedPointReport {
            dimension: sol.dimension(),
            unconfirmed: sol.unconfirmed(),
            unknowns: sol.columns.len(),
            equations: sol.equations,
            basis: sol
                .basis
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|&(c, x)| (sol.columns[c].clone(), x))
                        .collect()
                })
                .collect(),
            checks,
        })
    }
}

/// Number of base unknowns (`ext_index = 0`, `module_index = 0`).
pub fn base_unknowns(sol: &FixedPointSolution) -> usize {
    sol.columns
        .iter()
        .filter(|c| c.ext_index == 0 && c.module_index == 0)
        .count()
}

/// Galois invariants of an extension over the box `[0, W′]`: returns
/// `(invariant dimension, base dimension, all invariants in the base)`.
pub fn galois_invariants(
    ext: &FiniteExtension,
    subwindow: Vec<i64>,
    t_cap: u32,
) -> Result<(usize, usize, bool)> {
    let ring = ext.ring();
    let ops = (0..ext.generators().len())
        .map(FixedOperator::Galois)
        .collect();
    let sys = FrobFixedSystem::new(ring, ops, subwindow)?
        .with_extension(ext)?
        .with_t_degree_cap(t_cap);
    let sol = sys.solve()?;
    let in_base = sol
        .raw_basis
        .iter()
        .all(|v| v.iter().all(|&(c, _)| sol.columns[c].ext_index == 0));
    Ok((sol.raw_dimension(), base_unknowns(&sol), in_base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientAlgebra;
    use crate::series::SeriesRing;

    fn ring(p: u64, spec: &[(usize, usize)], n: i64) -> Ring {
        SeriesRing::uniform(CoefficientAlgebra::standard(p, spec).unwrap(), n).unwrap()
    }

    #[test]
    fn all_frobenii_give_constants() {
        let r = ring(2, &[(2, 0), (2, 0)], 8);
        let sys = FrobFixedSystem::all_frobenii(&r, 4).unwrap();
        let sol = sys.solve().unwrap();
        assert_eq!(sol.dimension(), 1);
        assert!(sys.is_constant_one(&sol, &sol.basis[0]));
        assert!(sys.verify(&sol, &sol.basis[0]).unwrap());
    }

    #[test]
    fn single_frobenius_is_larger() {
        let r = ring(2, &[(1, 0), (2, 0)], 8);
        let sys = FrobFixedSystem::new(&r, vec![FixedOperator::Phi(0)], vec![4, 4]).unwrap();
        let sol = sys.solve().unwrap();
        assert!(sol.dimension() > 1);
    }

    #[test]
    fn empty_operator_set_is_everything() {
        let r = ring(3, &[(1, 0)], 4);
        let sys = FrobFixedSystem::new(&r, vec![], vec![3]).unwrap();
        let sol = sys.solve().unwrap();
        assert_eq!(sol.raw_dimension(), 4);
        assert_eq!(sol.dimension(), 4);
    }

    #[test]
    fn subwindow_violation() {
        let r = ring(3, &[(1, 0)], 8);
        let err = FrobFixedSystem::new(&r, vec![FixedOperator::Phi(0)], vec![3]).unwrap_err();
        assert!(matches!(err, Error::Subwindow(_)));
    }

    #[test]
    fn transcendental_factor() {
        let r = ring(2, &[(1, 1), (1, 0)], 8);
        let sol = FrobFixedSystem::all_frobenii(&r, 4)
            .unwrap()
            .solve()
            .unwrap();
        assert_eq!(sol.dimension(), 1);
    }

    #[test]
    fn quotient_dimension() {
        let r = ring(2, &[(2, 0), (2, 0)], 8);
        let sol = FrobFixedSystem::quotient(&r, 0, 2, 4)
            .unwrap()
            .solve()
            .unwrap();
        assert_eq!(sol.dimension(), 4);
    }

    #[test]
    fn galois_invariants_are_base() {
        let r = ring(3, &[(1, 0), (1, 0)], 6);
        let a = r.add(&r.one(), &r.var(0)).unwrap();
        let ext = FiniteExtension::kummer(&r, a, 2).unwrap();
        let (dim, base, in_base) = galois_invariants(&ext, vec![2, 2], 0).unwrap();
        assert_eq!(dim, base);
        assert!(in_base);
        let asx = FiniteExtension::artin_schreier(&r, r.x_delta_pow(-1)).unwrap();
        let (dim, base, in_base) = galois_invariants(&asx, vec![2, 2], 0).unwrap();
        assert_eq!(dim, base);
        assert!(in_base);
    }
}
