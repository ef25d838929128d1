//! Rank-one characters, the module `𝔻(η)` computed through an explicit
//! Kummer extension, and the round trip `𝕍(𝔻(η))`.

use serde::{Deserialize, Serialize};

use super::extension::{FiniteExtension, SimpleExtension};
use super::fixed::{base_unknowns, FixedOperator, FrobFixedSystem};
use crate::config::{RingSpec, SCHEMA_VERSION};
use crate::endo::RingEndo;
use crate::error::{Error, Result};
use crate::fp;
use crate::module::{rank_one_from_units, GeneratorRef, PhiGammaModule};
use crate::padic::PAdicUnitApprox;
use crate::series::{LaurentElement, Ring};

/// Value of `η` on `γ_α(g)`, `g` the least primitive root mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaValue {
    pub alpha: usize,
    /// Multiplicative order of `value`; must divide `p − 1`.
    pub chi_order: u32,
    pub value: u32,
}

/// Value of `η` on `δ_{α, index}` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaValue {
    pub alpha: usize,
    pub index: usize,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterJson {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub ring: RingSpec,
    #[serde(default)]
    pub gamma_values: Vec<GammaValue>,
    #[serde(default)]
    pub delta_values: Vec<DeltaValue>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A character `G_Δ → F_p^×` given by its values on the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    pub p: u32,
    /// Value on `γ_α(g)` per factor.
    pub gamma: Vec<u32>,
    /// Values on `δ_{α, i}` per factor.
    pub delta: Vec<Vec<u32>>,
}

impl Character {
    pub fn trivial(ring: &Ring) -> Self {
        let k = ring.coeffs();
        Character {
            p: ring.p(),
            gamma: vec![1; ring.nvars()],
            delta: (0..ring.nvars())
                .map(|a| vec![1; k.group(a).len()])
                .collect(),
        }
    }

    /// `γ_α(c) ↦ (c mod p)^{k_α}`.
    pub fn from_exponents(ring: &Ring, exponents: &[u64]) -> Self {
        let p = ring.p();
        let g = fp::primitive_root(p);
        let mut c = Self::trivial(ring);
        for (a, &k) in exponents.iter().enumerate() {
            c.gamma[a] = fp::pow(p, g, k);
        }
        c
    }

    pub fn from_json(ring: &Ring, j: &CharacterJson) -> Result<Self> {
        let p = ring.p();
        let mut c = Self::trivial(ring);
        for v in &j.gamma_values {
            if v.alpha >= ring.nvars() {
                return Err(Error::Config(format!("no factor {}", v.alpha)));
            }
            let value = v.value % p;
            if value == 0 {
                return Err(Error::Config("character values must be nonzero".into()));
            }
            if multiplicative_order(p, value) != v.chi_order {
                return Err(Error::Config(format!(
                    "{value} has order {} mod {p}, not {}",
                    multiplicative_order(p, value),
                    v.chi_order
                )));
            }
            c.gamma[v.alpha] = value;
        }
        for v in &j.delta_values {
            let slot = c
                .delta
                .get_mut(v.alpha)
                .and_then(|d| d.get_mut(v.index.wrapping_sub(1)))
                .ok_or_else(|| {
                    Error::Config(format!("no generator delta({}, {})", v.alpha, v.index))
                })?;
            if v.value % p == 0 {
                return Err(Error::Config("character values must be nonzero".into()));
            }
            *slot = v.value % p;
        }
        Ok(c)
    }

    pub fn to_json(&self, ring: &Ring, digits: u32) -> CharacterJson {
        CharacterJson {
            schema_version: SCHEMA_VERSION,
            ring: RingSpec::from_ring(ring, digits),
            gamma_values: self
                .gamma
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 1)
                .map(|(alpha, &value)| GammaValue {
                    alpha,
                    chi_order: multiplicative_order(self.p, value),
                    value,
                })
                .collect(),
            delta_values: self
                .delta
                .iter()
                .enumerate()
                .flat_map(|(alpha, d)| {
                    d.iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 1)
                        .map(move |(i, &value)| DeltaValue {
                            alpha,
                            index: i + 1,
                            value,
                        })
                })
                .collect(),
        }
    }

    pub fn is_h_twisted(&self) -> bool {
        self.delta.iter().flatten().any(|&v| v != 1)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Character) -> Character {
        let p = self.p;
        Character {
            p,
            gamma: self
                .gamma
                .iter()
                .zip(&other.gamma)
                .map(|(&a, &b)| fp::mul(p, a, b))
                .collect(),
            delta: self
                .delta
                .iter()
                .zip(&other.delta)
                .map(|(x, y)| x.iter().zip(y).map(|(&a, &b)| fp::mul(p, a, b)).collect())
                .collect(),
        }
    }

    /// All characters through `χ mod p` on each factor, trivial on `δ`.
    pub fn family(ring: &Ring) -> Vec<Character> {
        let p = ring.p() as u64;
        let mut out = vec![Vec::new()];
        for _ in 0..ring.nvars() {
            out = out
                .into_iter()
                .flat_map(|e: Vec<u64>| {
                    (0..p - 1).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        out.iter().map(|e| Self::from_exponents(ring, e)).collect()
    }
}

pub fn multiplicative_order(p: u32, x: u32) -> u32 {
    (1..p).find(|&k| fp::pow(p, x, k as u64) == 1).unwrap_or(0)
}

/// Kummer tower `y_α^{e_α} = X_α` with `e_α` the order of `η` on `Γ_α`;
/// factors where `η` is trivial contribute nothing.
pub fn splitting_extension(ring: &Ring, eta: &Character) -> Result<FiniteExtension> {
    if eta.is_h_twisted() {
        return Err(Error::Budget(
            "characters nontrivial on delta generators are not supported".into(),
        ));
    }
    let gens: Vec<SimpleExtension> = eta
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 1)
        .map(|(a, &v)| {
            FiniteExtension::kummer_generator(ring, ring.var(a), multiplicative_order(eta.p, v))
        })
        .collect::<Result<_>>()?;
    FiniteExtension::new(ring, gens)
}

fn invariant_subwindow(ring: &Ring) -> Vec<i64> {
    ring.precision().iter().map(|&w| w.min(2)).collect()
}

fn gamma_chi(ring: &Ring, digits: u32) -> Result<PAdicUnitApprox> {
    PAdicUnitApprox::new(ring.p(), fp::primitive_root(ring.p()) as i128, digits)
}

/// `𝔻(η)` at desk scale: solves `(E′ ⊗ η)^{Gal(E′/E_Δ)}` over the
/// splitting extension, takes the generator `1 ⊗ v` and reads the unit
/// scalars of `φ_α`, `γ_α(g)` and `δ_{α,i}` on it.
pub fn functor_d_rank1(ring: &Ring, eta: &Character) -> Result<PhiGammaModule> {
    let ext = splitting_extension(ring, eta)?;
    let digits = RingSpec::min_digits(ring);
    if !ext.generators().is_empty() {
        let ops = (0..ext.generators().len())
            .map(FixedOperator::Galois)
            .collect();
        let sys = FrobFixedSystem::new(ring, ops, invariant_subwindow(ring))?
            .with_extension(&ext)?
            .with_t_degree_cap(1);
        let sol = sys.solve()?;
        let in_base = sol
            .raw_basis
            .iter()
            .all(|v| v.iter().all(|&(c, _)| sol.columns[c].ext_index == 0));
        if sol.raw_dimension() != base_unknowns(&sol) || !in_base {
            return Err(Error::Compatibility(format!(
                "invariants have dimension {} on a box of {} base unknowns",
                sol.raw_dimension(),
                base_unknowns(&sol)
            )));
        }
        if !sol.raw_basis.iter().any(|v| sys.is_constant_one(&sol, v)) {
            // 1 may be invariant only up to a change of basis of the
            // nullspace; check membership directly.
            let mut ech = crate::linalg::Echelon::new(ring.p());
            for v in &sol.raw_basis {
                ech.insert(v.clone());
            }
            let idx = sol.columns.iter().position(|c| {
                c.exponent.iter().all(|&x| x == 0)
                    && c.fdelta == 0
                    && c.t_monomial.iter().all(|&x| x == 0)
                    && c.ext_index == 0
                    && c.module_index == 0
            });
            match idx {
                Some(i) if ech.contains(vec![(i, 1)]) => {}
                _ => return Err(Error::Compatibility("1 is not Galois invariant".into())),
            }
        }
    }
    // Generator b = 1 ⊗ v; the scalar of an operator T with T(v) = η(T) v is
    // σ(b) b⁻¹ η(T).
    let b = ring.one();
    let binv = ring.invert(&b)?;
    let read = |endo: &RingEndo, value: u32| -> Result<LaurentElement> {
        let sb = endo.apply(&b)?;
        Ok(ring.scale(&ring.mul(&sb, &binv)?, value))
    };
    let a_phi = (0..ring.nvars())
        .map(|a| read(&RingEndo::make_phi(ring, a), 1))
        .collect::<Result<Vec<_>>>()?;
    let chi = gamma_chi(ring, digits)?;
    let mut gammas = Vec::new();
    for a in 0..ring.nvars() {
        let endo = RingEndo::make_gamma(ring, a, &chi)?;
        gammas.push((a, chi, read(&endo, eta.gamma[a])?));
    }
    let mut deltas = Vec::new();
    for a in 0..ring.nvars() {
        let d = ring.coeffs().group(a).len();
        for index in 1..=d {
            let b: Vec<PAdicUnitApprox> = (1..=d)
                .map(|j| PAdicUnitApprox::new(ring.p(), (j == index) as i128, digits))
                .collect::<Result<_>>()?;
            let endo = RingEndo::make_delta(ring, a, &b)?;
            deltas.push((a, index, read(&endo, eta.delta[a][index - 1])?));
        }
    }
    rank_one_from_units(ring, digits, a_phi, gammas, deltas)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorComparison {
    pub generator: String,
    pub expected: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered: Option<u32>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub schema_version: u32,
    /// Confirmed dimension of `(E′ ⊗ D)^{φ_α = 1 ∀α}`.
    pub dimension: usize,
    pub unconfirmed: usize,
    pub subwindow: Vec<i64>,
    pub checks: Vec<GeneratorComparison>,
    pub matched: bool,
}

/// Largest `W′ <= cap` with `p·W′ + p − 1 <= W` in every variable.
fn roundtrip_subwindow(ring: &Ring, cap: i64) -> Result<Vec<i64>> {
    let p = ring.p() as i64;
    let sub: Vec<i64> = ring
        .precision()
        .iter()
        .map(|&w| ((w - (p - 1)) / p).min(cap))
        .collect();
    if sub.iter().any(|&x| x < 1) {
        return Err(Error::Subwindow(format!(
            "precision too small for the round trip at p = {p}"
        )));
    }
    Ok(sub)
}

fn f_p_ratio(ring: &Ring, num: &LaurentElement, den: &LaurentElement) -> Option<u32> {
    let (e, c) = den.terms().iter().next()?;
    let d = ring.coeffs().as_prime_scalar(c)?;
    let n = num
        .coeff(e)
        .and_then(|c| ring.coeffs().as_prime_scalar(c))
        .unwrap_or(0);
    let lambda = fp::mul(ring.p(), n, fp::inv(ring.p(), d));
    ring.equal_on_window(num, &ring.scale(den, lambda))
        .then_some(lambda)
}

/// `𝕍(D)` for a rank-one module over the splitting extension of `η`, and
/// the comparison of the induced action with `η` generator by generator.
pub fn roundtrip_v_of_d(d: &PhiGammaModule, eta: &Character) -> Result<RoundTripReport> {
    let ring = d.ring().clone();
    if d.rank() != 1 {
        return Err(Error::Config("round trip needs a rank-one module".into()));
    }
    let et = d.check_etale();
    if !et.passed() {
        return Err(Error::Compatibility(format!(
            "module is not étale: {:?}",
            et.checks
        )));
    }
    let rel = d.check_relations();
    if let Some(c) = rel.first_failure() {
        return Err(Error::Compatibility(format!(
            "{} fails: {}",
            c.name,
            c.discrepancy.clone().unwrap_or_default()
        )));
    }
    let ext = splitting_extension(&ring, eta)?;
    let sub = roundtrip_subwindow(&ring, 2)?;
    let ops = (0..ring.nvars()).map(FixedOperator::Phi).collect();
    let sys = FrobFixedSystem::new(&ring, ops, sub.clone())?
        .with_extension(&ext)?
        .with_module(d)?
        .with_t_degree_cap(1);
    let sol = sys.solve()?;
    let mut report = RoundTripReport {
        schema_version: SCHEMA_VERSION,
        dimension: sol.dimension(),
        unconfirmed: sol.unconfirmed(),
        subwindow: sub,
        checks: Vec::new(),
        matched: false,
    };
    if sol.dimension() != 1 {
        return Ok(report);
    }
    let s = sys.vector(&sol.columns, &sol.basis[0])?;
    let in_base = s[0].iter().skip(1).all(|c| c.terms().is_empty());
    let base_s = &s[0][0];
    for g in d.generators() {
        let expected = match g {
            GeneratorRef::Phi(_) => 1,
            GeneratorRef::Gamma(i) => {
                let gg = &d.gamma_generators()[i];
                let c = gg.chi.residue % ring.p() as u64;
                let g0 = fp::primitive_root(ring.p());
                // η(γ(c)) for c = g^j is η(γ(g))^j.
                let j = (0..ring.p() - 1).find(|&j| fp::pow(ring.p(), g0, j as u64) as u64 == c);
                match j {
                    Some(j) => fp::pow(ring.p(), eta.gamma[gg.alpha], j as u64),
                    None => return Err(Error::Config("γ generator with χ divisible by p".into())),
                }
            }
            GeneratorRef::Delta(i) => {
                let dg = &d.delta_generators()[i];
                eta.delta[dg.alpha][dg.index - 1]
            }
        };
        let recovered = if in_base {
            let img = d.act(g, std::slice::from_ref(base_s))?;
            f_p_ratio(&ring, &img[0], base_s)
        } else {
            let map = ext.extend_endo(&d.endo(g)?)?;
            let img = ext.apply_map(&map, &s[0])?;
            let img = ext.scale_base(&img, &d.matrix_of(g)[0][0])?;
            let lead = s[0].iter().position(|c| !c.terms().is_empty()).unwrap_or(0);
            f_p_ratio(&ring, &img[lead], &s[0][lead]).filter(|&l| {
                let scaled: Vec<LaurentElement> = s[0].iter().map(|c| ring.scale(c, l)).collect();
                ext.equal_on_window(&img, &scaled)
            })
        };
        report.checks.push(GeneratorComparison {
            generator: d.generator_name(g),
            expected,
            recovered,
            passed: recovered == Some(expected),
        });
    }
    report.matched = report.checks.iter().all(|c| c.passed);
    Ok(report)
}

/// `𝔻(η_1 ⊗ η_2)` against `𝔻(η_1) ⊗ 𝔻(η_2)`: the rank-one scalars of the
/// tensor product are the products of the scalars.
pub fn tensor_compatible(ring: &Ring, eta1: &Character, eta2: &Character) -> Result<bool> {
    let d1 = functor_d_rank1(ring, eta1)?;
    let d2 = functor_d_rank1(ring, eta2)?;
    let d12 = functor_d_rank1(ring, &eta1.mul(eta2))?;
    for g in d12.generators() {
        let prod = ring.mul(&d1.matrix_of(g)[0][0], &d2.matrix_of(g)[0][0])?;
        if !ring.equal_on_window(&prod, &d12.matrix_of(g)[0][0]) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientAlgebra;
    use crate::module::verify_val_zero;
    use crate::series::SeriesRing;

    fn ring(p: u64, spec: &[(usize, usize)], n: i64) -> Ring {
        SeriesRing::uniform(CoefficientAlgebra::standard(p, spec).unwrap(), n).unwrap()
    }

    #[test]
    fn trivial_character_gives_trivial_module() {
        let r = ring(3, &[(1, 0)], 8);
        let d = functor_d_rank1(&r, &Character::trivial(&r)).unwrap();
        assert!(d.is_trivial());
        let rt = roundtrip_v_of_d(&d, &Character::trivial(&r)).unwrap();
        assert!(rt.matched, "{rt:?}");
    }

    #[test]
    fn order_two_character_p3() {
        let r = ring(3, &[(1, 0)], 8);
        let eta = Character::from_exponents(&r, &[1]);
        assert_eq!(eta.gamma, vec![2]);
        let d = functor_d_rank1(&r, &eta).unwrap();
        let a_g = &d.matrix_of(GeneratorRef::Gamma(0))[0][0];
        assert_eq!(r.val_alpha(a_g, 0).unwrap(), Some(0));
        let rt = roundtrip_v_of_d(&d, &eta).unwrap();
        assert_eq!(rt.dimension, 1);
        assert!(rt.matched, "{rt:?}");
        // The wrong character is detected.
        let rt = roundtrip_v_of_d(&d, &Character::trivial(&r)).unwrap();
        assert!(!rt.matched);
    }

    #[test]
    fn corrupted_module_refuses() {
        let r = ring(3, &[(1, 0)], 8);
        let eta = Character::from_exponents(&r, &[1]);
        let d = functor_d_rank1(&r, &eta).unwrap();
        let mut j = crate::module::ModuleJson::from_module(&d);
        let x = r.var(0);
        let m = crate::module::matrix_from_json(&r, &j.phi["a"]).unwrap();
        let bad = vec![vec![r.mul(&m[0][0], &x).unwrap()]];
        j.phi
            .insert("a".into(), crate::module::matrix_to_json(&r, &bad));
        let bad = j.to_module_unchecked().unwrap();
        assert!(roundtrip_v_of_d(&bad, &eta).is_err());
    }

    #[test]
    fn h_twisted_is_budget() {
        let r = ring(3, &[(1, 1)], 8);
        let mut eta = Character::trivial(&r);
        eta.delta[0][0] = 2;
        assert!(matches!(functor_d_rank1(&r, &eta), Err(Error::Budget(_))));
    }

    #[test]
    fn tensor_pair() {
        let r = ring(3, &[(1, 0), (1, 0)], 7);
        let e1 = Character::from_exponents(&r, &[1, 0]);
        let e2 = Character::from_exponents(&r, &[0, 1]);
        assert!(tensor_compatible(&r, &e1, &e2).unwrap());
        let d = functor_d_rank1(&r, &e1.mul(&e2)).unwrap();
        assert_eq!(
            verify_val_zero(&d, 0, GeneratorRef::Gamma(1))
                .unwrap()
                .valuation,
            0
        );
    }

    #[test]
    fn json_round_trip() {
        let r = ring(5, &[(1, 0), (1, 0)], 8);
        let eta = Character::from_exponents(&r, &[1, 2]);
        let j = eta.to_json(&r, 2);
        let back = Character::from_json(&r, &j).unwrap();
        assert_eq!(back, eta);
        let mut bad = j.clone();
        bad.gamma_values[0].chi_order = 3;
        assert!(Character::from_json(&r, &bad).is_err());
    }
}
