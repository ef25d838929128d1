//! Free étale `(φ_Δ, G_Δ)`-modules over `E_Δ` given by operator matrices,
//! and the `D⁺⁺ / D⁺` lattice procedures.
//!
//! Convention: `T_g(e_j) = Σ_i (A_g)_{ij} e_i` and
//! `T_g(Σ c_j e_j) = Σ σ_g(c_j) T_g(e_j)`, so a vector of coordinates `v`
//! maps to `A_g · σ_g(v)` and `Mat(T_g ∘ T_h) = A_g · σ_g(A_h)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{FactorSpec, RingSpec, SCHEMA_VERSION};
use crate::endo::RingEndo;
use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};
use crate::padic::PAdicUnitApprox;
use crate::series::{LaurentElement, LaurentJson, Ring, SeriesUnitStatus};

#[derive(Debug, Clone)]
pub struct GammaGenerator {
    pub alpha: usize,
    pub chi: PAdicUnitApprox,
    pub matrix: Matrix,
}

/// Generator `δ_{α, e_index}` twisting `t_{α,index}` (1-based).
#[derive(Debug, Clone)]
pub struct DeltaGenerator {
    pub alpha: usize,
    pub index: usize,
    pub matrix: Matrix,
}

/// Names one operator of a module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorRef {
    Phi(usize),
    Gamma(usize),
    Delta(usize),
}

#[derive(Debug, Clone)]
pub struct PhiGammaModule {
    ring: Ring,
    rank: usize,
    digits: u32,
    phi: Vec<Matrix>,
    gamma: Vec<GammaGenerator>,
    delta: Vec<DeltaGenerator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaleCheck {
    pub alpha: String,
    /// `etale`, `not_etale` or `undecided`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaleReport {
    pub checks: Vec<EtaleCheck>,
}

impl EtaleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == "etale")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub name: String,
    pub passed: bool,
    /// `exact`, `checked at digit precision M` or an error description.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Three-valued membership answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    #[serde(rename = "yes")]
    YesCertified,
    #[serde(rename = "no")]
    NoCertified,
    Unknown,
}

impl PhiGammaModule {
    /// Builds and validates a module: every `φ_α`-matrix must be invertible
    /// and every relation must hold on the certified window.
    pub fn new(
        ring: &Ring,
        digits: u32,
        phi: Vec<Matrix>,
        gamma: Vec<GammaGenerator>,
        delta: Vec<DeltaGenerator>,
    ) -> Result<Self> {
        let m = Self::new_unchecked(ring, digits, phi, gamma, delta)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds a module without running the étale and relation checks (shape
    /// checks still apply). Intended for diagnostics on untrusted input.
    pub fn new_unchecked(
        ring: &Ring,
        digits: u32,
        phi: Vec<Matrix>,
        gamma: Vec<GammaGenerator>,
        delta: Vec<DeltaGenerator>,
    ) -> Result<Self> {
        if phi.len() != ring.nvars() {
            return Err(Error::Config("one φ-matrix per factor required".into()));
        }
        let rank = phi[0].len();
        if rank == 0 {
            return Err(Error::Config("rank must be >= 1".into()));
        }
        let square = |m: &Matrix| m.len() == rank && m.iter().all(|r| r.len() == rank);
        let same_ring = |m: &Matrix| m.iter().flatten().all(|x| **x.ring() == **ring);
        let all = phi
            .iter()
            .chain(gamma.iter().map(|g| &g.matrix))
            .chain(delta.iter().map(|d| &d.matrix));
        for m in all {
            if !square(m) {
                return Err(Error::Config(format!("matrices must be {rank}x{rank}")));
            }
            if !same_ring(m) {
                return Err(Error::RingMismatch("matrix entry over another ring".into()));
            }
        }
        let k = ring.coeffs();
        for g in &gamma {
            if g.alpha >= ring.nvars() || g.chi.p != ring.p() || !g.chi.is_unit() {
                return Err(Error::Config("invalid γ generator".into()));
            }
        }
        for d in &delta {
            if d.alpha >= ring.nvars() || d.index == 0 || d.index > k.group(d.alpha).len() {
                return Err(Error::Config(format!(
                    "invalid δ generator index {}",
                    d.index
                )));
            }
        }
        if digits < RingSpec::min_digits(ring) {
            return Err(Error::DigitPrecision {
                need: RingSpec::min_digits(ring),
                have: digits,
            });
        }
        Ok(PhiGammaModule {
            ring: ring.clone(),
            rank,
            digits,
            phi,
            gamma,
            delta,
        })
    }

    fn validate(&self) -> Result<()> {
        let e = self.check_etale();
        if let Some(c) = e.checks.iter().find(|c| c.status != "etale") {
            return Err(Error::Compatibility(format!(
                "φ_{} is {}",
                c.alpha, c.status
            )));
        }
        let r = self.check_relations();
        if let Some(c) = r.first_failure() {
            return Err(Error::Compatibility(format!(
                "{}: {}",
                c.name,
                c.discrepancy.clone().unwrap_or_else(|| c.status.clone())
            )));
        }
        Ok(())
    }

    /// Trivial module `E_Δ^r` with identity matrices for `φ_α`, one γ per
    /// factor with χ-value `chi`, and one δ per transcendental.
    pub fn trivial(ring: &Ring, rank: usize, chi: Option<i128>) -> Result<Self> {
        let digits = RingSpec::min_digits(ring);
        let id = matrix::identity(ring, rank);
        let phi = vec![id.clone(); ring.nvars()];
        let mut gamma = Vec::new();
        if let Some(c) = chi {
            for alpha in 0..ring.nvars() {
                gamma.push(GammaGenerator {
                    alpha,
                    chi: PAdicUnitApprox::new(ring.p(), c, digits)?,
                    matrix: id.clone(),
                });
            }
        }
        let mut delta = Vec::new();
        for alpha in 0..ring.nvars() {
            for index in 1..=ring.coeffs().group(alpha).len() {
                delta.push(DeltaGenerator {
                    alpha,
                    index,
                    matrix: id.clone(),
                });
            }
        }
        Self::new(ring, digits, phi, gamma, delta)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn phi_matrix(&self, alpha: usize) -> &Matrix {
        &self.phi[alpha]
    }

    pub fn gamma_generators(&self) -> &[GammaGenerator] {
        &self.gamma
    }

    pub fn delta_generators(&self) -> &[DeltaGenerator] {
        &self.delta
    }

    pub fn generators(&self) -> Vec<GeneratorRef> {
        let mut out: Vec<GeneratorRef> = (0..self.ring.nvars()).map(GeneratorRef::Phi).collect();
        out.extend((0..self.gamma.len()).map(GeneratorRef::Gamma));
        out.extend((0..self.delta.len()).map(GeneratorRef::Delta));
        out
    }

    /// Factor the generator lives on.
    pub fn generator_alpha(&self, g: GeneratorRef) -> usize {
        match g {
            GeneratorRef::Phi(a) => a,
            GeneratorRef::Gamma(i) => self.gamma[i].alpha,
            GeneratorRef::Delta(i) => self.delta[i].alpha,
        }
    }

    pub fn generator_name(&self, g: GeneratorRef) -> String {
        let labels = self.ring.coeffs().labels();
        match g {
            GeneratorRef::Phi(a) => format!("phi({})", labels[a]),
            GeneratorRef::Gamma(i) => {
                format!(
                    "gamma({}; {})",
                    labels[self.gamma[i].alpha], self.gamma[i].chi.residue
                )
            }
            GeneratorRef::Delta(i) => {
                let d = &self.delta[i];
                let b: Vec<String> = (1..=self.ring.coeffs().group(d.alpha).len())
                    .map(|j| if j == d.index { "1".into() } else { "0".into() })
                    .collect();
                format!("delta({}; {})", labels[d.alpha], b.join(","))
            }
        }
    }

    pub fn matrix_of(&self, g: GeneratorRef) -> &Matrix {
        match g {
            GeneratorRef::Phi(a) => &self.phi[a],
            GeneratorRef::Gamma(i) => &self.gamma[i].matrix,
            GeneratorRef::Delta(i) => &self.delta[i].matrix,
        }
    }

    fn delta_exponents(&self, i: usize, times: u64) -> Result<Vec<PAdicUnitApprox>> {
        let d = &self.delta[i];
        let p = self.ring.p();
        (1..=self.ring.coeffs().group(d.alpha).len())
            .map(|j| {
                PAdicUnitApprox::new(p, if j == d.index { times as i128 } else { 0 }, self.digits)
            })
            .collect()
    }

    /// The ring endomorphism `σ_g` underlying a generator.
    pub fn endo(&self, g: GeneratorRef) -> Result<RingEndo> {
        match g {
            GeneratorRef::Phi(a) => Ok(RingEndo::make_phi(&self.ring, a)),
            GeneratorRef::Gamma(i) => {
                RingEndo::make_gamma(&self.ring, self.gamma[i].alpha, &self.gamma[i].chi)
            }
            GeneratorRef::Delta(i) => RingEndo::make_delta(
                &self.ring,
                self.delta[i].alpha,
                &self.delta_exponents(i, 1)?,
            ),
        }
    }

    /// `T_g(v) = A_g · σ_g(v)`.
    pub fn act(&self, g: GeneratorRef, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
        let sv = matrix::apply_vec(&self.endo(g)?, v)?;
        matrix::mul_vec(&self.ring, self.matrix_of(g), &sv)
    }

    /// Whether every `φ_α`-matrix is exactly the identity.
    pub fn is_trivial(&self) -> bool {
        let id = matrix::identity(&self.ring, self.rank);
        self.phi
            .iter()
            .all(|m| m.iter().flatten().all(|x| x.is_exact()) && matrix::equal(&self.ring, m, &id))
    }

    pub fn check_etale(&self) -> EtaleReport {
        let labels = self.ring.coeffs().labels();
        let checks = self
            .phi
            .iter()
            .enumerate()
            .map(|(a, m)| {
                let (status, detail) = match self.phi_inverse(a) {
                    Ok(_) => ("etale", None),
                    Err(e @ Error::NotUnit(_)) => ("not_etale", Some(e.to_string())),
                    Err(e) => ("undecided", Some(e.to_string())),
                };
                let _ = m;
                EtaleCheck {
                    alpha: labels[a].clone(),
                    status: status.into(),
                    detail,
                }
            })
            .collect();
        EtaleReport { checks }
    }

    /// Inverse of `A_{φ_α}`, re-verified by multiplication.
    pub fn phi_inverse(&self, alpha: usize) -> Result<Matrix> {
        let a = &self.phi[alpha];
        let inv = matrix::inverse(&self.ring, a)?;
        let prod = matrix::mul(&self.ring, a, &inv)?;
        if !matrix::equal(&self.ring, &prod, &matrix::identity(&self.ring, self.rank)) {
            return Err(Error::Undecided(
                "inverse check failed at this precision".into(),
            ));
        }
        Ok(inv)
    }

    fn commute_check(&self, g: GeneratorRef, h: GeneratorRef) -> RelationCheck {
        let name = format!(
            "{} * {} = {} * {}",
            self.generator_name(g),
            self.generator_name(h),
            self.generator_name(h),
            self.generator_name(g)
        );
        let run = || -> Result<Option<String>> {
            let lhs = matrix::mul(
                &self.ring,
                self.matrix_of(g),
                &matrix::apply(&self.endo(g)?, self.matrix_of(h))?,
            )?;
            let rhs = matrix::mul(
                &self.ring,
                self.matrix_of(h),
                &matrix::apply(&self.endo(h)?, self.matrix_of(g))?,
            )?;
            Ok(matrix::discrepancy(&self.ring, &lhs, &rhs))
        };
        match run() {
            Ok(None) => RelationCheck {
                name,
                passed: true,
                status: "exact".into(),
                discrepancy: None,
            },
            Ok(Some(d)) => RelationCheck {
                name,
                passed: false,
                status: "exact".into(),
                discrepancy: Some(d),
            },
            Err(e) => RelationCheck {
                name,
                passed: false,
                status: e.to_string(),
                discrepancy: None,
            },
        }
    }

    /// `Mat(T_δ^n)` as an explicit semilinear product.
    pub fn delta_power_matrix(&self, i: usize, n: u64) -> Result<Matrix> {
        let ring = &self.ring;
        let a = &self.delta[i].matrix;
        let mut cur = matrix::identity(ring, self.rank);
        let mut have: u64 = 0;
        for bit in (0..64 - n.leading_zeros()).rev() {
            // cur = Mat(T^have) -> Mat(T^{2·have})
            if have > 0 {
                let shift = RingEndo::make_delta(
                    ring,
                    self.delta[i].alpha,
                    &self.delta_exponents(i, have)?,
                )?;
                cur = matrix::mul(ring, &cur, &matrix::apply(&shift, &cur)?)?;
                have *= 2;
            }
            if (n >> bit) & 1 == 1 {
                let shift = RingEndo::make_delta(
                    ring,
                    self.delta[i].alpha,
                    &self.delta_exponents(i, have)?,
                )?;
                cur = matrix::mul(ring, &cur, &matrix::apply(&shift, a)?)?;
                have += 1;
            }
        }
        Ok(cur)
    }

    /// `γ δ γ⁻¹ = δ^{χ(γ)}`, i.e. `A_γ·γ(A_δ) = A_{δ^c}·δ^c(A_γ)` with `c` the
    /// integer representative of `χ(γ)` mod `p^M`.
    fn semidirect_check(&self, gi: usize, di: usize) -> RelationCheck {
        let g = GeneratorRef::Gamma(gi);
        let d = GeneratorRef::Delta(di);
        let name = format!(
            "{} * {} * {}^-1 = {}^{}",
            self.generator_name(g),
            self.generator_name(d),
            self.generator_name(g),
            self.generator_name(d),
            self.gamma[gi].chi.residue
        );
        let ring = &self.ring;
        let c = self.gamma[gi].chi.residue;
        let run = || -> Result<Option<String>> {
            let lhs = matrix::mul(
                ring,
                self.matrix_of(g),
                &matrix::apply(&self.endo(g)?, self.matrix_of(d))?,
            )?;
            let dc =
                RingEndo::make_delta(ring, self.delta[di].alpha, &self.delta_exponents(di, c)?)?;
            let rhs = matrix::mul(
                ring,
                &self.delta_power_matrix(di, c)?,
                &matrix::apply(&dc, self.matrix_of(g))?,
            )?;
            Ok(matrix::discrepancy(ring, &lhs, &rhs))
        };
        let exact = self.delta_congruent_identity(di);
        let status = if exact {
            "exact".to_string()
        } else {
            format!("checked at digit precision M={}", self.digits)
        };
        match run() {
            Ok(None) => RelationCheck {
                name,
                passed: true,
                status,
                discrepancy: None,
            },
            Ok(Some(dsc)) => RelationCheck {
                name,
                passed: false,
                status,
                discrepancy: Some(dsc),
            },
            Err(e) => RelationCheck {
                name,
                passed: false,
                status: e.to_string(),
                discrepancy: None,
            },
        }
    }

    /// `A_δ ≡ I` modulo `X_Δ`.
    fn delta_congruent_identity(&self, di: usize) -> bool {
        let ring = &self.ring;
        let diff = matrix::discrepancy(
            ring,
            &self.delta[di].matrix,
            &matrix::identity(ring, self.rank),
        );
        if diff.is_none() {
            return true;
        }
        let id = matrix::identity(ring, self.rank);
        self.delta[di].matrix.iter().zip(&id).all(|(r, ri)| {
            r.iter().zip(ri).all(|(x, y)| match ring.sub(x, y) {
                Ok(d) => d.lower().iter().all(|&l| l >= 1),
                Err(_) => false,
            })
        })
    }

    /// All cocycle identities, in a stable order.
    pub fn check_relations(&self) -> RelationReport {
        let mut checks = Vec::new();
        let n = self.ring.nvars();
        for a in 0..n {
            for b in a + 1..n {
                checks.push(self.commute_check(GeneratorRef::Phi(a), GeneratorRef::Phi(b)));
            }
        }
        let group: Vec<GeneratorRef> = self
            .generators()
            .into_iter()
            .filter(|g| !matches!(g, GeneratorRef::Phi(_)))
            .collect();
        for a in 0..n {
            for &g in &group {
                checks.push(self.commute_check(GeneratorRef::Phi(a), g));
            }
        }
        for (i, &g) in group.iter().enumerate() {
            for &h in &group[i + 1..] {
                let same = self.generator_alpha(g) == self.generator_alpha(h);
                match (g, h) {
                    (GeneratorRef::Gamma(gi), GeneratorRef::Delta(di)) if same => {
                        checks.push(self.semidirect_check(gi, di))
                    }
                    _ => checks.push(self.commute_check(g, h)),
                }
            }
        }
        RelationReport { checks }
    }

    /// Matrix of `T_s = Π_α T_{φ_α}`.
    pub fn phi_s_matrix(&self) -> Result<Matrix> {
        let ring = &self.ring;
        let mut cur = matrix::identity(ring, self.rank);
        let mut endo = RingEndo::identity(ring);
        for a in 0..ring.nvars() {
            cur = matrix::mul(ring, &cur, &matrix::apply(&endo, &self.phi[a])?)?;
            endo = endo.compose(&RingEndo::make_phi(ring, a))?;
        }
        Ok(cur)
    }

    pub fn apply_phi_s(&self, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
        let sv = matrix::apply_vec(&RingEndo::make_phi_s(&self.ring), v)?;
        matrix::mul_vec(&self.ring, &self.phi_s_matrix()?, &sv)
    }

    /// Applies `g` to the module: `A'_g = P⁻¹·A_g·σ_g(P)`.
    pub fn base_change(&self, p: &Matrix) -> Result<PhiGammaModule> {
        let ring = &self.ring;
        let pinv = matrix::inverse(ring, p)?;
        let conj = |g: GeneratorRef| -> Result<Matrix> {
            let sp = matrix::apply(&self.endo(g)?, p)?;
            matrix::mul(ring, &matrix::mul(ring, &pinv, self.matrix_of(g))?, &sp)
        };
        let phi = (0..ring.nvars())
            .map(|a| conj(GeneratorRef::Phi(a)))
            .collect::<Result<_>>()?;
        let gamma = (0..self.gamma.len())
            .map(|i| {
                Ok(GammaGenerator {
                    alpha: self.gamma[i].alpha,
                    chi: self.gamma[i].chi,
                    matrix: conj(GeneratorRef::Gamma(i))?,
                })
            })
            .collect::<Result<_>>()?;
        let delta = (0..self.delta.len())
            .map(|i| {
                Ok(DeltaGenerator {
                    alpha: self.delta[i].alpha,
                    index: self.delta[i].index,
                    matrix: conj(GeneratorRef::Delta(i))?,
                })
            })
            .collect::<Result<_>>()?;
        PhiGammaModule::new(ring, self.digits, phi, gamma, delta)
    }
}

/// Rank-one module from unit scalars; every input must be a certified unit
/// and all compatibilities must hold.
pub fn rank_one_from_units(
    ring: &Ring,
    digits: u32,
    a_phi: Vec<LaurentElement>,
    gammas: Vec<(usize, PAdicUnitApprox, LaurentElement)>,
    deltas: Vec<(usize, usize, LaurentElement)>,
) -> Result<PhiGammaModule> {
    let all = a_phi
        .iter()
        .chain(gammas.iter().map(|g| &g.2))
        .chain(deltas.iter().map(|d| &d.2));
    for (i, u) in all.enumerate() {
        match ring.is_unit(u) {
            SeriesUnitStatus::Unit => {}
            s => return Err(Error::NotUnit(format!("scalar #{i} is {s:?}"))),
        }
    }
    let phi = a_phi.into_iter().map(matrix::scalar_matrix).collect();
    let gamma = gammas
        .into_iter()
        .map(|(alpha, chi, u)| GammaGenerator {
            alpha,
            chi,
            matrix: matrix::scalar_matrix(u),
        })
        .collect();
    let delta = deltas
        .into_iter()
        .map(|(alpha, index, u)| DeltaGenerator {
            alpha,
            index,
            matrix: matrix::scalar_matrix(u),
        })
        .collect();
    let m = PhiGammaModule::new_unchecked(ring, digits, phi, gamma, delta)?;
    let rel = m.check_relations();
    if let Some(c) = rel.first_failure() {
        return Err(Error::Compatibility(format!(
            "{}: {}",
            c.name,
            c.discrepancy.clone().unwrap_or_else(|| c.status.clone())
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValZeroReport {
    pub valuation: i64,
    /// `val_{X_α}(a_α · φ_α(a_g))`.
    pub lhs_valuation: i64,
    /// `val_{X_α}(a_g · g(a_α))`.
    pub rhs_valuation: i64,
    /// Whether `val(a_α) + p·v = v + val(g(a_α))` matches the computed sides.
    pub bookkeeping: bool,
}

/// For a rank-one module and a generator `g` not involving `α`, computes
/// `v = val_{X_α}(a_g)` and re-derives it from the compatibility with `φ_α`.
pub fn verify_val_zero(d: &PhiGammaModule, alpha: usize, g: GeneratorRef) -> Result<ValZeroReport> {
    if d.rank() != 1 {
        return Err(Error::Config(
            "verify_val_zero needs a rank-one module".into(),
        ));
    }
    if d.generator_alpha(g) == alpha {
        return Err(Error::Config(
            "generator must not involve the chosen factor".into(),
        ));
    }
    let ring = d.ring();
    let p = ring.p() as i64;
    let a_alpha = &d.phi_matrix(alpha)[0][0];
    let a_g = &d.matrix_of(g)[0][0];
    let val = |x: &LaurentElement| -> Result<i64> {
        ring.val_alpha(x, alpha)?
            .ok_or_else(|| Error::NotUnit("zero scalar".into()))
    };
    let v = val(a_g)?;
    let va = val(a_alpha)?;
    let phi_alpha = RingEndo::make_phi(ring, alpha);
    let g_a = d.endo(g)?.apply(a_alpha)?;
    let lhs = ring.mul(a_alpha, &phi_alpha.apply(a_g)?)?;
    let rhs = ring.mul(a_g, &g_a)?;
    let lv = val(&lhs)?;
    let rv = val(&rhs)?;
    let bookkeeping = lv == va + p * v && rv == v + val(&g_a)? && lv == rv;
    Ok(ValZeroReport {
        valuation: v,
        lhs_valuation: lv,
        rhs_valuation: rv,
        bookkeeping,
    })
}

/// Finitely generated `E_Δ⁺`-submodule spanned by the columns of a square
/// matrix invertible over `E_Δ`.
#[derive(Debug, Clone)]
pub struct Lattice {
    generators: Matrix,
}

impl Lattice {
    /// Columns of `g` are the generators.
    pub fn new(d: &PhiGammaModule, g: Matrix) -> Result<Self> {
        let r = d.rank();
        if g.len() != r || g.iter().any(|row| row.len() != r) {
            return Err(Error::Config(format!(
                "lattice needs {r} generators of length {r}"
            )));
        }
        matrix::inverse(d.ring(), &g)?;
        Ok(Lattice { generators: g })
    }

    pub fn standard(d: &PhiGammaModule) -> Self {
        Lattice {
            generators: matrix::identity(d.ring(), d.rank()),
        }
    }

    pub fn generator_matrix(&self) -> &Matrix {
        &self.generators
    }

    /// `X_Δ^k · M`.
    pub fn scaled(&self, ring: &Ring, k: i64) -> Result<Lattice> {
        Ok(Lattice {
            generators: matrix::scale(ring, &self.generators, &ring.x_delta_pow(k))?,
        })
    }

    pub fn contains(&self, ring: &Ring, v: &[LaurentElement]) -> Result<Membership> {
        let ginv = matrix::inverse(ring, &self.generators)?;
        let coords = matrix::mul_vec(ring, &ginv, v)?;
        Ok(all_integral(ring, &coords))
    }
}

fn min_valuation(ring: &Ring, x: &LaurentElement) -> std::result::Result<Option<i64>, ()> {
    let mut m: Option<i64> = None;
    for a in 0..ring.nvars() {
        match ring.val_alpha(x, a) {
            Ok(Some(v)) => m = Some(m.map_or(v, |c| c.min(v))),
            Ok(None) => return Ok(None),
            Err(_) => return Err(()),
        }
    }
    Ok(m)
}

/// Whether every entry lies in `E_Δ⁺`.
fn all_integral(ring: &Ring, xs: &[LaurentElement]) -> Membership {
    let mut out = Membership::YesCertified;
    for x in xs {
        match min_valuation(ring, x) {
            Ok(None) => {}
            Ok(Some(v)) if v >= 0 => {}
            Ok(Some(_)) => return Membership::NoCertified,
            Err(()) => out = Membership::Unknown,
        }
    }
    out
}

/// Least `r >= 0` with `φ_s(M) ⊆ X_Δ^{-r} M`.
pub fn phi_s_denominator(d: &PhiGammaModule, m: &Lattice) -> Result<i64> {
    let ring = d.ring();
    let g = m.generator_matrix();
    let ginv = matrix::inverse(ring, g)?;
    let phis = RingEndo::make_phi_s(ring);
    let b = matrix::mul(
        ring,
        &matrix::mul(ring, &ginv, &d.phi_s_matrix()?)?,
        &matrix::apply(&phis, g)?,
    )?;
    let mut r = 0i64;
    for x in b.iter().flatten() {
        match min_valuation(ring, x) {
            Ok(None) => {}
            Ok(Some(v)) => r = r.max(-v),
            Err(()) => {
                return Err(Error::Undecided(
                    "lattice membership at this precision".into(),
                ))
            }
        }
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct DPlusPlusCertificate {
    pub r: i64,
    pub k: i64,
    pub lattice: Lattice,
    /// Direct check `φ_s(X_Δ^k M) ⊆ X_Δ^{k+1} M`.
    pub containment: bool,
}

pub fn dplusplus_certified_lattice(
    d: &PhiGammaModule,
    m: &Lattice,
) -> Result<DPlusPlusCertificate> {
    let ring = d.ring();
    let p = ring.p() as i64;
    let r = phi_s_denominator(d, m)?;
    let k = (r + 1) / (p - 1) + 1;
    let lk = m.scaled(ring, k)?;
    let lk1 = m.scaled(ring, k + 1)?;
    let phis = RingEndo::make_phi_s(ring);
    let inv = matrix::inverse(ring, lk1.generator_matrix())?;
    let img = matrix::mul(
        ring,
        &d.phi_s_matrix()?,
        &matrix::apply(&phis, lk.generator_matrix())?,
    )?;
    let c = matrix::mul(ring, &inv, &img)?;
    let containment = match all_integral(ring, &c.into_iter().flatten().collect::<Vec<_>>()) {
        Membership::YesCertified => true,
        Membership::NoCertified => false,
        Membership::Unknown => {
            return Err(Error::Undecided("containment at this precision".into()))
        }
    };
    Ok(DPlusPlusCertificate {
        r,
        k,
        lattice: lk,
        containment,
    })
}

fn trivial_membership(ring: &Ring, x: &[LaurentElement], bound: i64) -> Membership {
    let mut out = Membership::YesCertified;
    for c in x {
        match min_valuation(ring, c) {
            Ok(None) => {}
            Ok(Some(v)) if v >= bound => {}
            Ok(Some(_)) => return Membership::NoCertified,
            Err(()) => out = Membership::Unknown,
        }
    }
    out
}

/// `x ∈ D⁺⁺`: exact for the trivial module, otherwise certified by an
/// iterate entering the certified lattice.
pub fn in_dplusplus(
    d: &PhiGammaModule,
    m: &Lattice,
    x: &[LaurentElement],
    k_max: usize,
) -> Result<Membership> {
    if x.len() != d.rank() {
        return Err(Error::Config("vector length differs from the rank".into()));
    }
    let ring = d.ring();
    if d.is_trivial() {
        return Ok(trivial_membership(ring, x, 1));
    }
    let cert = dplusplus_certified_lattice(d, m)?;
    iterate_into(d, &[&cert.lattice], x, k_max)
}

/// `x ∈ D⁺`: exact for the trivial module; otherwise certified by an
/// iterate entering a `φ_s`-stable lattice.
pub fn in_dplus(
    d: &PhiGammaModule,
    m: &Lattice,
    x: &[LaurentElement],
    k_max: usize,
) -> Result<Membership> {
    if x.len() != d.rank() {
        return Err(Error::Config("vector length differs from the rank".into()));
    }
    let ring = d.ring();
    if d.is_trivial() {
        return Ok(trivial_membership(ring, x, 0));
    }
    let cert = dplusplus_certified_lattice(d, m)?;
    if cert.r == 0 {
        iterate_into(d, &[&cert.lattice, m], x, k_max)
    } else {
        iterate_into(d, &[&cert.lattice], x, k_max)
    }
}

fn iterate_into(
    d: &PhiGammaModule,
    lattices: &[&Lattice],
    x: &[LaurentElement],
    k_max: usize,
) -> Result<Membership> {
    let ring = d.ring();
    let mut y = x.to_vec();
    for j in 0..=k_max {
        for l in lattices {
            if l.contains(ring, &y)? == Membership::YesCertified {
                return Ok(Membership::YesCertified);
            }
        }
        if j < k_max {
            y = match d.apply_phi_s(&y) {
                Ok(v) => v,
                Err(Error::WindowUnderflow(_)) => break,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(Membership::Unknown)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeVariant {
    Plus,
    PlusPlus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub premise_alpha: bool,
    pub premise_rest: bool,
    pub conclusion: bool,
    pub holds: bool,
}

/// `(X_α^{n1} x ∈ D^• ∧ X_{Δ∖α}^{n2} x ∈ D^•) ⇒ x ∈ D^•`.
pub fn torsion_free_check(
    d: &PhiGammaModule,
    m: &Lattice,
    x: &[LaurentElement],
    n1: i64,
    n2: i64,
    alpha: usize,
    variant: LatticeVariant,
    k_max: usize,
) -> Result<TorsionReport> {
    let ring = d.ring();
    let decide = |v: &[LaurentElement]| -> Result<bool> {
        let r = match variant {
            LatticeVariant::Plus => in_dplus(d, m, v, k_max)?,
            LatticeVariant::PlusPlus => in_dplusplus(d, m, v, k_max)?,
        };
        match r {
            Membership::YesCertified => Ok(true),
            Membership::NoCertified => Ok(false),
            Membership::Unknown => Err(Error::Undecided("membership unknown".into())),
        }
    };
    let mut ea = vec![0; ring.nvars()];
    ea[alpha] = n1;
    let mut er = vec![n2; ring.nvars()];
    er[alpha] = 0;
    let xa: Vec<LaurentElement> = x.iter().map(|c| ring.shift(c, &ea)).collect();
    let xr: Vec<LaurentElement> = x.iter().map(|c| ring.shift(c, &er)).collect();
    let premise_alpha = decide(&xa)?;
    let premise_rest = decide(&xr)?;
    let conclusion = decide(x)?;
    Ok(TorsionReport {
        premise_alpha,
        premise_rest,
        conclusion,
        holds: !(premise_alpha && premise_rest) || conclusion,
    })
}

// JSON schema "pg_module".

pub type MatrixJson = Vec<Vec<LaurentJson>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaJson {
    pub alpha: String,
    pub chi: i128,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaJson {
    pub alpha: String,
    /// 1-based index of the twisted transcendental.
    pub index: usize,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub ring: RingSpec,
    pub rank: usize,
    /// Missing labels default to the identity matrix.
    #[serde(default)]
    pub phi: BTreeMap<String, MatrixJson>,
    #[serde(default)]
    pub gamma: Vec<GammaJson>,
    #[serde(default)]
    pub delta: Vec<DeltaJson>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

pub fn matrix_from_json(ring: &Ring, m: &MatrixJson) -> Result<Matrix> {
    m.iter()
        .map(|row| row.iter().map(|x| ring.from_json(x)).collect())
        .collect()
}

pub fn matrix_to_json(ring: &Ring, m: &Matrix) -> MatrixJson {
    m.iter()
        .map(|row| row.iter().map(|x| ring.to_json(x)).collect())
        .collect()
}

impl RingSpec {
    /// Spec describing an existing ring.
    pub fn from_ring(ring: &Ring, digits: u32) -> RingSpec {
        let k = ring.coeffs();
        RingSpec {
            p: ring.p() as u64,
            factors: k
                .labels()
                .iter()
                .zip(k.factors())
                .map(|(l, f)| FactorSpec {
                    label: l.clone(),
                    n: f.base.n,
                    modulus: Some(f.base.modulus.clone()),
                    d: f.d(),
                })
                .collect(),
            precision: ring.precision().to_vec(),
            digits: Some(digits),
        }
    }
}

impl ModuleJson {
    /// Parses without validating relations; returns the ring as well.
    pub fn to_module_unchecked(&self) -> Result<PhiGammaModule> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let ring = self.ring.build()?;
        let digits = self.ring.digits_for(&ring);
        let k = ring.coeffs();
        let idx = |l: &str| {
            k.label_index(l)
                .ok_or_else(|| Error::Parse(format!("unknown factor {l}")))
        };
        let mut phi = vec![matrix::identity(&ring, self.rank); ring.nvars()];
        for (l, m) in &self.phi {
            phi[idx(l)?] = matrix_from_json(&ring, m)?;
        }
        let gamma = self
            .gamma
            .iter()
            .map(|g| {
                Ok(GammaGenerator {
                    alpha: idx(&g.alpha)?,
                    chi: PAdicUnitApprox::new(ring.p(), g.chi, digits)?,
                    matrix: matrix_from_json(&ring, &g.matrix)?,
                })
            })
            .collect::<Result<_>>()?;
        let delta = self
            .delta
            .iter()
            .map(|d| {
                Ok(DeltaGenerator {
                    alpha: idx(&d.alpha)?,
                    index: d.index,
                    matrix: matrix_from_json(&ring, &d.matrix)?,
                })
            })
            .collect::<Result<_>>()?;
        let m = PhiGammaModule::new_unchecked(&ring, digits, phi, gamma, delta)?;
        if m.rank() != self.rank {
            return Err(Error::Parse(format!(
                "declared rank {} but matrices are {}x{}",
                self.rank,
                m.rank(),
                m.rank()
            )));
        }
        Ok(m)
    }

    pub fn to_module(&self) -> Result<PhiGammaModule> {
        let m = self.to_module_unchecked()?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_module(d: &PhiGammaModule) -> Self {
        let ring = d.ring();
        let labels = ring.coeffs().labels();
        ModuleJson {
            schema_version: SCHEMA_VERSION,
            ring: RingSpec::from_ring(ring, d.digits()),
            rank: d.rank(),
            phi: (0..ring.nvars())
                .map(|a| (labels[a].clone(), matrix_to_json(ring, d.phi_matrix(a))))
                .collect(),
            gamma: d
                .gamma_generators()
                .iter()
                .map(|g| GammaJson {
                    alpha: labels[g.alpha].clone(),
                    chi: g.chi.residue as i128,
                    matrix: matrix_to_json(ring, &g.matrix),
                })
                .collect(),
            delta: d
                .delta_generators()
                .iter()
                .map(|x| DeltaJson {
                    alpha: labels[x.alpha].clone(),
                    index: x.index,
                    matrix: matrix_to_json(ring, &x.matrix),
                })
                .collect(),
        }
    }
}

/// Rank-one example `e ↦ X_Δ^s e` base change of the trivial module: the
/// scalars are `a_α = X_α^{s(p−1)}` and `a_γ = X_α^{-s} γ(X_α^s)`, one γ per
/// factor with χ-value `chi`.
pub fn monomial_twist_example(ring: &Ring, s: i64, chi: i128) -> Result<PhiGammaModule> {
    let triv = PhiGammaModule::trivial(ring, 1, Some(chi))?;
    triv.base_change(&vec![vec![ring.x_delta_pow(s)]])
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
    fn trivial_module_passes() {
        let r = ring(3, &[(1, 1), (1, 0)], 6);
        let d = PhiGammaModule::trivial(&r, 2, Some(2)).unwrap();
        assert!(d.check_etale().passed());
        let rel = d.check_relations();
        assert!(rel.passed(), "{rel:?}");
        assert!(rel.checks.iter().any(|c| c.name.contains("^-1")));
    }

    #[test]
    fn non_etale_detected() {
        let r = ring(2, &[(1, 0), (1, 0)], 6);
        let s = r.add(&r.var(0), &r.var(1)).unwrap();
        let m = vec![vec![r.one(), r.zero()], vec![r.zero(), s]];
        let id = matrix::identity(&r, 2);
        let d = PhiGammaModule::new_unchecked(&r, 3, vec![m, id], vec![], vec![]).unwrap();
        let e = d.check_etale();
        assert_eq!(e.checks[0].status, "not_etale");
        assert_eq!(e.checks[1].status, "etale");
    }

    #[test]
    fn cyclotomic_rank_one() {
        let r = ring(3, &[(1, 0)], 8);
        let c = PAdicUnitApprox::new(3, 2, 2).unwrap();
        let x = r.var(0);
        let a_phi = r.pow(&x, 2).unwrap();
        let g = RingEndo::make_gamma(&r, 0, &c).unwrap().apply(&x).unwrap();
        let a_g = r.mul(&g, &r.x_delta_pow(-1)).unwrap();
        let d = rank_one_from_units(
            &r,
            2,
            vec![a_phi.clone()],
            vec![(0, c, a_g.clone())],
            vec![],
        )
        .unwrap();
        assert_eq!(d.rank(), 1);
        // Corrupt one coefficient of a_γ.
        let bad = r.add(&a_g, &r.pow(&x, 3).unwrap()).unwrap();
        let err = rank_one_from_units(&r, 2, vec![a_phi], vec![(0, c, bad)], vec![]).unwrap_err();
        assert!(matches!(err, Error::Compatibility(_)));
    }

    #[test]
    fn lattice_numbers() {
        let r = ring(2, &[(1, 0), (1, 0)], 10);
        let d = PhiGammaModule::trivial(&r, 1, None).unwrap();
        let m = Lattice::standard(&d);
        assert_eq!(phi_s_denominator(&d, &m).unwrap(), 0);
        let c = dplusplus_certified_lattice(&d, &m).unwrap();
        assert_eq!((c.r, c.k, c.containment), (0, 2, true));
        let tw = monomial_twist_example(&r, -2, 3).unwrap();
        let mt = Lattice::standard(&tw);
        assert_eq!(phi_s_denominator(&tw, &mt).unwrap(), 2);
        let c = dplusplus_certified_lattice(&tw, &mt).unwrap();
        assert_eq!((c.r, c.k, c.containment), (2, 4, true));
        // φ_s(X_Δ M) = X_Δ^p φ_s(M), so the denominator drops by p - 1.
        let shifted = mt.scaled(&r, 1).unwrap();
        assert_eq!(phi_s_denominator(&tw, &shifted).unwrap(), 1);
    }

    #[test]
    fn trivial_battery() {
        let r = ring(3, &[(1, 0), (1, 0)], 10);
        let d = PhiGammaModule::trivial(&r, 1, None).unwrap();
        let m = Lattice::standard(&d);
        let battery = [r.x_delta_pow(1), r.one(), r.var(0), r.x_delta_pow(-1)];
        let pp: Vec<Membership> = battery
            .iter()
            .map(|x| in_dplusplus(&d, &m, std::slice::from_ref(x), 4).unwrap())
            .collect();
        let p: Vec<Membership> = battery
            .iter()
            .map(|x| in_dplus(&d, &m, std::slice::from_ref(x), 4).unwrap())
            .collect();
        use Membership::*;
        assert_eq!(
            pp,
            vec![YesCertified, NoCertified, NoCertified, NoCertified]
        );
        assert_eq!(
            p,
            vec![YesCertified, YesCertified, YesCertified, NoCertified]
        );
        let xinv = r.x_delta_pow(0);
        let t = torsion_free_check(
            &d,
            &m,
            &[r.shift(&xinv, &[-1, 0])],
            1,
            1,
            0,
            LatticeVariant::Plus,
            4,
        )
        .unwrap();
        assert!(t.premise_alpha && !t.premise_rest && t.holds);
    }

    #[test]
    fn nontrivial_membership_by_iteration() {
        let r = ring(2, &[(1, 0), (1, 0)], 12);
        let tw = monomial_twist_example(&r, -1, 3).unwrap();
        let m = Lattice::standard(&tw);
        let x = vec![r.x_delta_pow(3)];
        assert_eq!(
            in_dplusplus(&tw, &m, &x, 3).unwrap(),
            Membership::YesCertified
        );
    }

    #[test]
    fn json_roundtrip() {
        let r = ring(3, &[(1, 1)], 5);
        let d = monomial_twist_example(&r, 1, 2).unwrap();
        let j = ModuleJson::from_module(&d);
        let s = serde_json::to_string(&j).unwrap();
        let back: ModuleJson = serde_json::from_str(&s).unwrap();
        let d2 = back.to_module().unwrap();
        assert!(matrix::equal(&r, d.phi_matrix(0), d2.phi_matrix(0)));
    }

    #[test]
    fn base_change_diag() {
        let r = ring(2, &[(1, 0), (1, 0)], 8);
        let d = PhiGammaModule::trivial(&r, 2, Some(3)).unwrap();
        let p = matrix::diagonal(vec![r.x_delta_pow(1), r.one()]);
        let d2 = d.base_change(&p).unwrap();
        let expect = matrix::diagonal(vec![r.var(0), r.one()]);
        assert!(matrix::equal(&r, d2.phi_matrix(0), &expect));
    }
}
