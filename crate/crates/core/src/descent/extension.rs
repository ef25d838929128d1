//! Explicit finite extensions `E′ = E_Δ[y_1, …, y_s]` built from
//! Artin–Schreier (`y^p − y = a`) and Kummer (`y^e = a`, `e | p − 1`)
//! generators, with their Galois actions and extended ring maps.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::config::{RingSpec, SCHEMA_VERSION};
use crate::endo::RingEndo;
use crate::error::{Error, Result};
use crate::fp;
use crate::padic::PAdicUnitApprox;
use crate::series::{LaurentElement, LaurentJson, Ring, SeriesUnitStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionKind {
    ArtinSchreier,
    /// `zeta` is the chosen primitive `e`-th root of unity in `F_p`; `0`
    /// selects `g^{(p−1)/e}` for the least primitive root `g`.
    Kummer {
        e: u32,
        #[serde(default)]
        zeta: u32,
    },
}

#[derive(Debug, Clone)]
pub struct SimpleExtension {
    pub kind: ExtensionKind,
    pub a: LaurentElement,
}

impl SimpleExtension {
    pub fn degree(&self, p: u32) -> usize {
        match self.kind {
            ExtensionKind::ArtinSchreier => p as usize,
            ExtensionKind::Kummer { e, .. } => e as usize,
        }
    }
}

/// Power-basis coordinates, indexed by the flattened multi-index.
pub type ExtElement = Vec<LaurentElement>;

/// A ring map of `E′` given by a base endomorphism (identity if `None`) and
/// the images of the generators `y_i`.
#[derive(Debug, Clone)]
pub struct ExtMap {
    pub base: Option<RingEndo>,
    pub images: Vec<ExtElement>,
}

#[derive(Debug, Clone)]
pub struct FiniteExtension {
    ring: Ring,
    gens: Vec<SimpleExtension>,
    degrees: Vec<usize>,
}

impl FiniteExtension {
    /// The trivial extension `E′ = E_Δ`.
    pub fn trivial(ring: &Ring) -> Self {
        FiniteExtension {
            ring: ring.clone(),
            gens: Vec::new(),
            degrees: Vec::new(),
        }
    }

    pub fn new(ring: &Ring, mut gens: Vec<SimpleExtension>) -> Result<Self> {
        let p = ring.p();
        for g in &mut gens {
            if let ExtensionKind::Kummer { e, zeta: 0 } = g.kind {
                if e > 0 && (p - 1).is_multiple_of(e) {
                    let zeta = fp::pow(p, fp::primitive_root(p), ((p - 1) / e) as u64);
                    g.kind = ExtensionKind::Kummer { e, zeta };
                }
            }
        }
        for g in &gens {
            if **g.a.ring() != **ring {
                return Err(Error::RingMismatch(
                    "extension datum over another ring".into(),
                ));
            }
            if let ExtensionKind::Kummer { e, zeta } = g.kind {
                if e == 0 || !(p - 1).is_multiple_of(e) {
                    return Err(Error::Config(format!(
                        "e = {e} does not divide p - 1 = {}",
                        p - 1
                    )));
                }
                if fp::pow(p, zeta, e as u64) != 1
                    || (1..e).any(|k| fp::pow(p, zeta, k as u64) == 1)
                {
                    return Err(Error::Config(format!(
                        "{zeta} is not a primitive {e}-th root of unity"
                    )));
                }
                match ring.is_unit(&g.a) {
                    SeriesUnitStatus::Unit => {}
                    s => return Err(Error::NotUnit(format!("Kummer datum is {s:?}"))),
                }
            }
        }
        let degrees = gens.iter().map(|g| g.degree(p)).collect();
        Ok(FiniteExtension {
            ring: ring.clone(),
            gens,
            degrees,
        })
    }

    pub fn artin_schreier(ring: &Ring, a: LaurentElement) -> Result<Self> {
        Self::new(
            ring,
            vec![SimpleExtension {
                kind: ExtensionKind::ArtinSchreier,
                a,
            }],
        )
    }

    /// `y^e = a` with `ζ = g^{(p−1)/e}` for the least primitive root `g`.
    pub fn kummer(ring: &Ring, a: LaurentElement, e: u32) -> Result<Self> {
        Self::new(ring, vec![Self::kummer_generator(ring, a, e)?])
    }

    pub fn kummer_generator(ring: &Ring, a: LaurentElement, e: u32) -> Result<SimpleExtension> {
        let p = ring.p();
        if e == 0 || !(p - 1).is_multiple_of(e) {
            return Err(Error::Config(format!(
                "e = {e} does not divide p - 1 = {}",
                p - 1
            )));
        }
        let zeta = fp::pow(p, fp::primitive_root(p), ((p - 1) / e) as u64);
        Ok(SimpleExtension {
            kind: ExtensionKind::Kummer { e, zeta },
            a,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn generators(&self) -> &[SimpleExtension] {
        &self.gens
    }

    pub fn degree(&self) -> usize {
        self.degrees.iter().product()
    }

    /// Flat index of a multi-index (last generator fastest).
    pub fn index(&self, j: &[usize]) -> usize {
        j.iter()
            .zip(&self.degrees)
            .fold(0, |acc, (x, d)| acc * d + x)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.degrees.len()];
        for i in (0..self.degrees.len()).rev() {
            out[i] = idx % self.degrees[i];
            idx /= self.degrees[i];
        }
        out
    }

    pub fn zero(&self) -> ExtElement {
        vec![self.ring.zero(); self.degree()]
    }

    pub fn from_base(&self, x: LaurentElement) -> ExtElement {
        let mut v = self.zero();
        v[0] = x;
        v
    }

    pub fn one(&self) -> ExtElement {
        self.from_base(self.ring.one())
    }

    /// `y_i`.
    pub fn y(&self, i: usize) -> ExtElement {
        let mut j = vec![0; self.degrees.len()];
        j[i] = 1;
        // Degree-one generators reduce straight into the base.
        self.reduce(BTreeMap::from([(j, self.ring.one())]))
            .expect("same ring")
    }

    pub fn is_base(&self, x: &ExtElement) -> bool {
        x[1..].iter().all(|c| c.is_zero_on_window())
    }

    pub fn add(&self, x: &ExtElement, y: &ExtElement) -> Result<ExtElement> {
        x.iter().zip(y).map(|(a, b)| self.ring.add(a, b)).collect()
    }

    pub fn sub(&self, x: &ExtElement, y: &ExtElement) -> Result<ExtElement> {
        x.iter().zip(y).map(|(a, b)| self.ring.sub(a, b)).collect()
    }

    pub fn scale_base(&self, x: &ExtElement, c: &LaurentElement) -> Result<ExtElement> {
        x.iter().map(|a| self.ring.mul(a, c)).collect()
    }

    pub fn equal_on_window(&self, x: &ExtElement, y: &ExtElement) -> bool {
        x.iter()
            .zip(y)
            .all(|(a, b)| self.ring.equal_on_window(a, b))
    }

    /// Reduces a polynomial in the `y_i` (exponents possibly `>= d_i`).
    fn reduce(&self, mut terms: BTreeMap<Vec<usize>, LaurentElement>) -> Result<ExtElement> {
        let ring = &self.ring;
        for (i, g) in self.gens.iter().enumerate() {
            let d = self.degrees[i];
            loop {
                let high: Vec<Vec<usize>> = terms.keys().filter(|j| j[i] >= d).cloned().collect();
                if high.is_empty() {
                    break;
                }
                for j in high {
                    let c = terms.remove(&j).unwrap();
                    let mut push = |k: Vec<usize>, v: LaurentElement| -> Result<()> {
                        match terms.get_mut(&k) {
                            Some(cur) => *cur = ring.add(cur, &v)?,
                            None => {
                                terms.insert(k, v);
                            }
                        }
                        Ok(())
                    };
                    match g.kind {
                        ExtensionKind::Kummer { e, .. } => {
                            let mut k = j.clone();
                            k[i] -= e as usize;
                            push(k, ring.mul(&c, &g.a)?)?;
                        }
                        ExtensionKind::ArtinSchreier => {
                            // y^k = y^{k-p}(y + a)
                            let mut k1 = j.clone();
                            k1[i] = j[i] - d + 1;
                            push(k1, c.clone())?;
                            let mut k0 = j.clone();
                            k0[i] = j[i] - d;
                            push(k0, ring.mul(&c, &g.a)?)?;
                        }
                    }
                }
            }
        }
        let mut out = self.zero();
        for (j, c) in terms {
            out[self.index(&j)] = c;
        }
        Ok(out)
    }

    pub fn mul(&self, x: &ExtElement, y: &ExtElement) -> Result<ExtElement> {
        let ring = &self.ring;
        let mut terms: BTreeMap<Vec<usize>, LaurentElement> = BTreeMap::new();
        for (i, a) in x.iter().enumerate() {
            if a.is_exact() && a.terms().is_empty() {
                continue;
            }
            let ji = self.multi_index(i);
            for (k, b) in y.iter().enumerate() {
                if b.is_exact() && b.terms().is_empty() {
                    continue;
                }
                let jk = self.multi_index(k);
                let j: Vec<usize> = ji.iter().zip(&jk).map(|(u, v)| u + v).collect();
                let prod = ring.mul(a, b)?;
                match terms.get_mut(&j) {
                    Some(cur) => *cur = ring.add(cur, &prod)?,
                    None => {
                        terms.insert(j, prod);
                    }
                }
            }
        }
        self.reduce(terms)
    }

    pub fn pow(&self, x: &ExtElement, mut e: u64) -> Result<ExtElement> {
        let mut r = self.one();
        let mut b = x.clone();
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

    /// The automorphism `y_i ↦ ζ y_i` (Kummer) or `y_i ↦ y_i + 1`
    /// (Artin–Schreier), fixing `E_Δ` and the other generators.
    pub fn galois_generator(&self, i: usize) -> ExtMap {
        let mut images: Vec<ExtElement> = (0..self.gens.len()).map(|k| self.y(k)).collect();
        images[i] = match self.gens[i].kind {
            ExtensionKind::Kummer { zeta, .. } => {
                images[i].iter().map(|c| self.ring.scale(c, zeta)).collect()
            }
            ExtensionKind::ArtinSchreier => self.add(&self.y(i), &self.one()).expect("same ring"),
        };
        ExtMap { base: None, images }
    }

    pub fn galois_generators(&self) -> Vec<ExtMap> {
        (0..self.gens.len())
            .map(|i| self.galois_generator(i))
            .collect()
    }

    pub fn apply_map(&self, map: &ExtMap, x: &ExtElement) -> Result<ExtElement> {
        let mut cache: HashMap<Vec<usize>, ExtElement> = HashMap::new();
        self.apply_map_cached(map, x, &mut cache)
    }

    fn image_monomial(
        &self,
        map: &ExtMap,
        j: &[usize],
        cache: &mut HashMap<Vec<usize>, ExtElement>,
    ) -> Result<ExtElement> {
        if let Some(v) = cache.get(j) {
            return Ok(v.clone());
        }
        let mut acc = self.one();
        for (i, &ji) in j.iter().enumerate() {
            if ji > 0 {
                acc = self.mul(&acc, &self.pow(&map.images[i], ji as u64)?)?;
            }
        }
        cache.insert(j.to_vec(), acc.clone());
        Ok(acc)
    }

    pub fn apply_map_cached(
        &self,
        map: &ExtMap,
        x: &ExtElement,
        cache: &mut HashMap<Vec<usize>, ExtElement>,
    ) -> Result<ExtElement> {
        let mut out = self.zero();
        for (idx, c) in x.iter().enumerate() {
            if c.is_exact() && c.terms().is_empty() {
                continue;
            }
            let c = match &map.base {
                Some(e) => e.apply(c)?,
                None => c.clone(),
            };
            let j = self.multi_index(idx);
            let img = self.image_monomial(map, &j, cache)?;
            out = self.add(&out, &self.scale_base(&img, &c)?)?;
        }
        Ok(out)
    }

    /// Whether every generator image satisfies the image of its defining
    /// relation.
    pub fn check_relation(&self, map: &ExtMap) -> Result<bool> {
        let p = self.ring.p();
        for (i, g) in self.gens.iter().enumerate() {
            let sa = match &map.base {
                Some(e) => e.apply(&g.a)?,
                None => g.a.clone(),
            };
            let img = &map.images[i];
            let lhs = match g.kind {
                ExtensionKind::Kummer { e, .. } => self.pow(img, e as u64)?,
                ExtensionKind::ArtinSchreier => self.sub(&self.pow(img, p as u64)?, img)?,
            };
            if !self.equal_on_window(&lhs, &self.from_base(sa)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Extends a ring endomorphism of `E_Δ` to `E′`, choosing images of the
    /// generators compatible with the defining relations:
    /// * `σ(a) = a`: `y ↦ y`;
    /// * Kummer, `σ(a) = a^q` with `q ≡ 1 mod e`: `y ↦ y·a^{(q−1)/e}`;
    /// * Kummer, `σ(a)/a` a unit whose constant term is an `e`-th power
    ///   `c^e` in `F_p`: `y ↦ y·c·(σ(a)/(a c^e))^{1/e}`;
    /// * Artin–Schreier: `y ↦ y + w` with `w^p − w = σ(a) − a`, `w` among
    ///   `0`, `a` and the part of `a` supported on one variable.
    pub fn extend_endo(&self, endo: &RingEndo) -> Result<ExtMap> {
        let ring = &self.ring;
        let p = ring.p();
        let mut images = Vec::new();
        for (i, g) in self.gens.iter().enumerate() {
            let sa = endo.apply(&g.a)?;
            let yi = self.y(i);
            if ring.equal_on_window(&sa, &g.a) {
                images.push(yi);
                continue;
            }
            let img = match g.kind {
                ExtensionKind::Kummer { e, .. } => self.kummer_image(i, e, &g.a, &sa)?,
                ExtensionKind::ArtinSchreier => {
                    let diff = ring.sub(&sa, &g.a)?;
                    let mut cands = vec![ring.zero(), g.a.clone()];
                    for b in 0..ring.nvars() {
                        cands.push(single_variable_part(&g.a, b));
                    }
                    let w = cands.into_iter().find(|w| {
                        ring.pow(w, p as u64)
                            .and_then(|wp| ring.sub(&wp, w))
                            .map(|lhs| ring.equal_on_window(&lhs, &diff))
                            .unwrap_or(false)
                    });
                    match w {
                        Some(w) => self.add(&yi, &self.from_base(w))?,
                        None => {
                            return Err(Error::Compatibility(format!(
                                "no Artin–Schreier image found for generator {i}"
                            )))
                        }
                    }
                }
            };
            images.push(img);
        }
        let map = ExtMap {
            base: Some(endo.clone()),
            images,
        };
        if !self.check_relation(&map)? {
            return Err(Error::Compatibility(
                "extended map violates a defining relation".into(),
            ));
        }
        Ok(map)
    }

    fn kummer_image(
        &self,
        i: usize,
        e: u32,
        a: &LaurentElement,
        sa: &LaurentElement,
    ) -> Result<ExtElement> {
        let ring = &self.ring;
        let p = ring.p();
        // σ(a) = a^q with q ≡ 1 mod e, q small.
        for q in (1 + e as u64..=(p as u64).pow(2)).step_by(e as usize) {
            if ring.equal_on_window(&ring.pow(a, q)?, sa) {
                let f = ring.pow(a, (q - 1) / e as u64)?;
                return self.scale_base(&self.y(i), &f);
            }
        }
        let u = ring.mul(sa, &ring.invert(a)?)?;
        let zero = vec![0; ring.nvars()];
        let c0 = u
            .coeff(&zero)
            .and_then(|c| ring.coeffs().as_prime_scalar(c))
            .filter(|&c| c != 0)
            .ok_or_else(|| {
                Error::Budget("Kummer image needs a unit with F_p constant term".into())
            })?;
        let root = (1..p)
            .find(|&r| fp::pow(p, r, e as u64) == c0)
            .ok_or_else(|| {
                Error::Budget(format!(
                    "{c0} is not an {e}-th power in F_{p}; the map does not extend"
                ))
            })?;
        let normalized = ring.scale(&u, fp::inv(p, c0));
        // (1 + z)^{1/e} needs z supported in positive degree of one variable.
        let z = ring.sub(&normalized, &ring.one())?;
        let alpha = (0..ring.nvars())
            .find(|&b| {
                z.terms()
                    .keys()
                    .all(|k| k[b] >= 1 && k.iter().enumerate().all(|(g, &x)| g == b || x >= 0))
            })
            .ok_or_else(|| Error::Budget("unit is not of the form 1 + X_α·(…)".into()))?;
        let m = RingSpec::min_digits(ring).max(2);
        let einv = PAdicUnitApprox::new(p, e as i128, m)?.inverse()?;
        let r = ring.binomial_series(&normalized, alpha, &einv)?;
        let f = ring.scale(&r, root);
        self.scale_base(&self.y(i), &f)
    }

    /// Matrix of a Galois generator on the power basis, entries in `F_p`
    /// (`column j` = coordinates of the image of basis vector `j`).
    pub fn galois_matrix(&self, i: usize) -> Result<Vec<Vec<u32>>> {
        let map = self.galois_generator(i);
        let n = self.degree();
        let zero = vec![0; self.ring.nvars()];
        let mut m = vec![vec![0u32; n]; n];
        for j in 0..n {
            let mut b = self.zero();
            b[j] = self.ring.one();
            let img = self.apply_map(&map, &b)?;
            for (r, c) in img.iter().enumerate() {
                m[r][j] = c
                    .coeff(&zero)
                    .and_then(|x| self.ring.coeffs().as_prime_scalar(x))
                    .unwrap_or(0);
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<ExtensionJson> {
        Ok(ExtensionJson {
            schema_version: SCHEMA_VERSION,
            ring: RingSpec::from_ring(&self.ring, RingSpec::min_digits(&self.ring)),
            generators: self
                .gens
                .iter()
                .map(|g| GeneratorJson {
                    kind: g.kind,
                    a: self.ring.to_json(&g.a),
                })
                .collect(),
            degree: Some(self.degree()),
            galois_action: Some(
                (0..self.gens.len())
                    .map(|i| self.galois_matrix(i))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

/// Terms of `a` involving only `X_b` (and constants excluded).
fn single_variable_part(a: &LaurentElement, b: usize) -> LaurentElement {
    let ring = a.ring();
    let terms = a
        .terms()
        .iter()
        .filter(|(e, _)| e[b] != 0 && e.iter().enumerate().all(|(g, &x)| g == b || x == 0))
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();
    LaurentElement::from_parts(ring, terms, a.lower().to_vec(), a.window().to_vec())
        .expect("subset of terms")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    #[serde(flatten)]
    pub kind: ExtensionKind,
    pub a: LaurentJson,
}

/// JSON schema `extension`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionJson {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub ring: RingSpec,
    pub generators: Vec<GeneratorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub galois_action: Option<Vec<Vec<Vec<u32>>>>,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}

impl ExtensionJson {
    pub fn build(&self) -> Result<FiniteExtension> {
        let ring = self.ring.build()?;
        let gens = self
            .generators
            .iter()
            .map(|g| {
                Ok(SimpleExtension {
                    kind: g.kind,
                    a: ring.from_json(&g.a)?,
                })
            })
            .collect::<Result<_>>()?;
        FiniteExtension::new(&ring, gens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientAlgebra;
    use crate::series::SeriesRing;

    fn ring(p: u64, n: usize, prec: i64) -> Ring {
        SeriesRing::uniform(
            CoefficientAlgebra::standard(p, &vec![(1, 0); n]).unwrap(),
            prec,
        )
        .unwrap()
    }

    #[test]
    fn artin_schreier_relation_and_galois() {
        let r = ring(2, 1, 8);
        let a = r.x_delta_pow(-1);
        let ext = FiniteExtension::artin_schreier(&r, a.clone()).unwrap();
        let y = ext.y(0);
        let y2 = ext.mul(&y, &y).unwrap();
        // y^2 = y + a
        let expect = ext.add(&y, &ext.from_base(a)).unwrap();
        assert!(ext.equal_on_window(&y2, &expect));
        let g = ext.galois_generator(0);
        assert!(ext.check_relation(&g).unwrap());
        assert_eq!(ext.galois_matrix(0).unwrap(), vec![vec![1, 1], vec![0, 1]]);
        let phi = ext.extend_endo(&RingEndo::make_phi(&r, 0)).unwrap();
        assert!(ext.check_relation(&phi).unwrap());
    }

    #[test]
    fn kummer_relation_and_extensions() {
        let r = ring(5, 2, 10);
        let ext = FiniteExtension::kummer(&r, r.var(0), 4).unwrap();
        let y = ext.y(0);
        let y4 = ext.pow(&y, 4).unwrap();
        assert!(ext.equal_on_window(&y4, &ext.from_base(r.var(0))));
        let g = ext.galois_generator(0);
        assert!(ext.check_relation(&g).unwrap());
        let phi = ext.extend_endo(&RingEndo::make_phi(&r, 0)).unwrap();
        // φ(y) = y·X^{(p-1)/e} = y·X
        let expect = ext.scale_base(&y, &r.var(0)).unwrap();
        assert!(ext.equal_on_window(&phi.images[0], &expect));
        let phib = ext.extend_endo(&RingEndo::make_phi(&r, 1)).unwrap();
        assert!(ext.equal_on_window(&phib.images[0], &y));
        assert!(FiniteExtension::kummer(&r, r.var(0), 3).is_err());
    }

    #[test]
    fn kummer_gamma_extension_when_root_exists() {
        let r = ring(3, 1, 6);
        let a = r.add(&r.one(), &r.var(0)).unwrap();
        let ext = FiniteExtension::kummer(&r, a, 2).unwrap();
        // c = 4 ≡ 1 mod 3: γ(1 + X) = (1 + X)^4 = a^4.
        let c = PAdicUnitApprox::new(3, 4, 2).unwrap();
        let gamma = RingEndo::make_gamma(&r, 0, &c).unwrap();
        let m = ext.extend_endo(&gamma).unwrap();
        assert!(ext.check_relation(&m).unwrap());
        let y = ext.y(0);
        let ny: ExtElement = y.iter().map(|c| r.neg(c)).collect();
        let sq = ext.mul(&ny, &ny).unwrap();
        assert!(ext.equal_on_window(&sq, &ext.mul(&y, &y).unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let r = ring(3, 2, 6);
        let ext = FiniteExtension::kummer(&r, r.var(1), 2).unwrap();
        let j = ext.to_json().unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back: ExtensionJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.build().unwrap().degree(), 2);
        assert_eq!(j.galois_action.unwrap()[0], vec![vec![1, 0], vec![0, 2]]);
    }
}
