//! The shipped examples: rank-one modules, extensions and characters used
//! by the CLI example files and the acceptance suite.

use crate::config::RingSpec;
use crate::descent::{Character, FiniteExtension};
use crate::error::Result;
use crate::module::{monomial_twist_example, ModuleJson, PhiGammaModule};
use crate::series::Ring;

/// Two factors `F_p ⊗ F_p` at precision `n`.
pub fn plain_ring(p: u64, n: i64) -> Result<Ring> {
    RingSpec::standard(p, &[(1, 0), (1, 0)], n).build()
}

/// The trivial rank-one module over `F_3 ⊗ F_3` at precision 8.
pub fn trivial_example() -> Result<PhiGammaModule> {
    PhiGammaModule::trivial(&plain_ring(3, 8)?, 1, Some(2))
}

/// Rank-one modules `e ↦ X_Δ^s e` twisted from the trivial one:
/// `(name, module)`.
pub fn rank_one_examples() -> Result<Vec<(String, PhiGammaModule)>> {
    Ok(vec![
        (
            "cyclotomic_p3".into(),
            monomial_twist_example(&plain_ring(3, 8)?, 1, 2)?,
        ),
        (
            "twist_p2_s-2".into(),
            monomial_twist_example(&plain_ring(2, 8)?, -2, 3)?,
        ),
        (
            "twist_p3_s-1".into(),
            monomial_twist_example(&plain_ring(3, 8)?, -1, 2)?,
        ),
    ])
}

/// The `p = 3` cyclotomic example with one coefficient of `a_γ` changed;
/// fails the relation check.
pub fn corrupted_example() -> Result<ModuleJson> {
    let d = monomial_twist_example(&plain_ring(3, 8)?, 1, 2)?;
    let ring = d.ring().clone();
    let mut j = ModuleJson::from_module(&d);
    let mut m = crate::module::matrix_from_json(&ring, &j.gamma[0].matrix)?;
    m[0][0] = ring.add(&m[0][0], &ring.pow(&ring.var(0), 3)?)?;
    j.gamma[0].matrix = crate::module::matrix_to_json(&ring, &m);
    Ok(j)
}

/// Artin–Schreier extensions at `p ∈ {2, 3}`.
pub fn artin_schreier_examples() -> Result<Vec<(String, FiniteExtension)>> {
    let mut out = Vec::new();
    for p in [2u64, 3] {
        let r = plain_ring(p, 6)?;
        let xa_inv = r.pow_signed(&r.var(0), -1)?;
        let xb_inv = r.pow_signed(&r.var(1), -1)?;
        out.push((
            format!("as_p{p}_split"),
            FiniteExtension::artin_schreier(&r, r.zero())?,
        ));
        out.push((
            format!("as_p{p}_inv_xa"),
            FiniteExtension::artin_schreier(&r, xa_inv.clone())?,
        ));
        out.push((
            format!("as_p{p}_inv_sum"),
            FiniteExtension::artin_schreier(&r, r.add(&xa_inv, &xb_inv)?)?,
        ));
        out.push((
            format!("as_p{p}_inv_xdelta"),
            FiniteExtension::artin_schreier(&r, r.x_delta_pow(-1))?,
        ));
    }
    Ok(out)
}

/// Kummer extensions and towers at `p ∈ {3, 5}`.
pub fn kummer_examples() -> Result<Vec<(String, FiniteExtension)>> {
    let mut out = Vec::new();
    let r3 = plain_ring(3, 6)?;
    let one_plus = r3.add(&r3.one(), &r3.var(0))?;
    out.push((
        "kummer_p3_e2_one_plus_xa".into(),
        FiniteExtension::kummer(&r3, one_plus, 2)?,
    ));
    out.push((
        "kummer_p3_e2_xa".into(),
        FiniteExtension::kummer(&r3, r3.var(0), 2)?,
    ));
    let r5 = plain_ring(5, 6)?;
    out.push((
        "kummer_p5_e4_xa".into(),
        FiniteExtension::kummer(&r5, r5.var(0), 4)?,
    ));
    out.push((
        "kummer_p5_e2_xdelta".into(),
        FiniteExtension::kummer(&r5, r5.x_delta_pow(1), 2)?,
    ));
    let gens = vec![
        FiniteExtension::kummer_generator(&r5, r5.var(0), 2)?,
        FiniteExtension::kummer_generator(&r5, r5.var(1), 2)?,
    ];
    out.push((
        "kummer_p5_tower_xa_xb".into(),
        FiniteExtension::new(&r5, gens)?,
    ));
    Ok(out)
}

/// Characters of the round-trip family: all characters through `χ mod p`
/// on each factor, `p ∈ {3, 5}`, one and two factors.
pub fn character_family() -> Result<Vec<(Ring, Vec<Character>)>> {
    let mut out = Vec::new();
    for p in [3u64, 5] {
        for nf in [1usize, 2] {
            let ring = RingSpec::standard(p, &vec![(1, 0); nf], 2 * p as i64 + 2).build()?;
            let family = Character::family(&ring);
            out.push((ring, family));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_build() {
        assert!(trivial_example().unwrap().is_trivial());
        for (name, d) in rank_one_examples().unwrap() {
            assert!(d.check_relations().passed(), "{name}");
            assert!(d.check_etale().passed(), "{name}");
        }
        let bad = corrupted_example().unwrap().to_module_unchecked().unwrap();
        assert!(!bad.check_relations().passed());
        assert_eq!(artin_schreier_examples().unwrap().len(), 8);
        assert_eq!(kummer_examples().unwrap().len(), 5);
        let fam = character_family().unwrap();
        assert_eq!(
            fam.iter().map(|(_, f)| f.len()).sum::<usize>(),
            2 + 4 + 4 + 16
        );
    }
}
