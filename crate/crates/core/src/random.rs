//! Random elements for property tests, benches and the CLI suites.

use rand::Rng;

use crate::coeff::{CoefficientAlgebra, CoefficientElement};
use crate::series::{LaurentElement, Ring};

/// A sum of `terms` random `F_Δ`-multiples of monomials of degree
/// `<= t_degree` in each transcendental.
pub fn random_coeff<R: Rng>(
    k: &CoefficientAlgebra,
    rng: &mut R,
    terms: usize,
    t_degree: i32,
) -> CoefficientElement {
    let mut acc = k.zero();
    for _ in 0..terms {
        let f: Vec<u32> = (0..k.fdelta().dim())
            .map(|_| rng.gen_range(0..k.p()))
            .collect();
        let m: Vec<i32> = (0..k.num_t())
            .map(|_| rng.gen_range(0..=t_degree))
            .collect();
        acc = k.add(&acc, &k.monomial(m, f));
    }
    acc
}

/// An exact polynomial with about `terms` terms, exponents in `[lo, hi]`.
pub fn random_series<R: Rng>(
    ring: &Ring,
    rng: &mut R,
    terms: usize,
    lo: i64,
    hi: i64,
    t_degree: i32,
) -> LaurentElement {
    let mut acc = ring.zero();
    for _ in 0..terms {
        let e: Vec<i64> = (0..ring.nvars()).map(|_| rng.gen_range(lo..=hi)).collect();
        let c = random_coeff(ring.coeffs(), rng, 1, t_degree);
        acc = ring.add(&acc, &ring.monomial(e, c)).expect("same ring");
    }
    acc
}

/// `X^v · (c + h)` with `c` a nonzero `F_p` scalar and `h` in the maximal
/// ideal; always a unit of `E_Δ`.
pub fn random_unit_series<R: Rng>(
    ring: &Ring,
    rng: &mut R,
    terms: usize,
    hi: i64,
    pole: i64,
) -> LaurentElement {
    let p = ring.p();
    let mut h = ring.scalar(rng.gen_range(1..p));
    for _ in 0..terms {
        let mut e: Vec<i64> = (0..ring.nvars()).map(|_| rng.gen_range(0..=hi)).collect();
        if e.iter().all(|&x| x == 0) {
            e[0] = 1;
        }
        let c = random_coeff(ring.coeffs(), rng, 1, 0);
        h = ring.add(&h, &ring.monomial(e, c)).expect("same ring");
    }
    let v: Vec<i64> = (0..ring.nvars())
        .map(|_| -rng.gen_range(0..=pole))
        .collect();
    ring.shift(&h, &v)
}
