#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phigamma::config::RingSpec;
use phigamma::endo::RingEndo;
use phigamma::random::{random_series, random_unit_series};
use phigamma::series::{Ring, SeriesUnitStatus};
use phigamma::{CoefficientAlgebra, PAdicUnitApprox, SeriesRing, TensorAlgebra};

fn ring(p: u64, spec: &[(usize, usize)], n: i64) -> Ring {
    SeriesRing::uniform(CoefficientAlgebra::standard(p, spec).unwrap(), n).unwrap()
}

fn rings() -> impl Strategy<Value = Ring> {
    prop_oneof![
        Just(ring(2, &[(1, 0), (1, 0)], 8)),
        Just(ring(3, &[(1, 0), (2, 0)], 8)),
        Just(ring(2, &[(2, 1), (1, 0)], 8)),
        Just(ring(5, &[(1, 0)], 10)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(r in rings(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_series(&r, &mut rng, 4, -1, 4, 1);
        let b = random_series(&r, &mut rng, 4, -1, 4, 1);
        let c = random_series(&r, &mut rng, 4, -1, 4, 1);
        let ab = r.mul(&a, &b).unwrap();
        prop_assert!(r.equal_on_window(&ab, &r.mul(&b, &a).unwrap()));
        let left = r.mul(&ab, &c).unwrap();
        let right = r.mul(&a, &r.mul(&b, &c).unwrap()).unwrap();
        prop_assert!(r.equal_on_window(&left, &right));
        let dist = r.mul(&a, &r.add(&b, &c).unwrap()).unwrap();
        let expand = r.add(&ab, &r.mul(&a, &c).unwrap()).unwrap();
        prop_assert!(r.equal_on_window(&dist, &expand));
        prop_assert!(r.sub(&a, &a).unwrap().is_zero_on_window());
    }

    #[test]
    fn units_invert(r in rings(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unit_series(&r, &mut rng, 3, 3, 1);
        prop_assert_eq!(r.is_unit(&u), SeriesUnitStatus::Unit);
        let inv = r.invert(&u).unwrap();
        let prod = r.mul(&u, &inv).unwrap();
        prop_assert!(r.equal_on_window(&prod, &r.one()));
    }

    #[test]
    fn ring_maps_are_multiplicative(r in rings(), seed in any::<u64>(), which in 0..3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = r.p();
        let m = RingSpec::min_digits(&r);
        let alpha = (seed as usize) % r.nvars();
        let chi = PAdicUnitApprox::new(p, 1 + p as i128, m).unwrap();
        prop_assume!(which < 2 || !r.coeffs().group(alpha).is_empty());
        let endo = match which {
            0 => RingEndo::make_phi(&r, alpha),
            1 => RingEndo::make_gamma(&r, alpha, &chi).unwrap(),
            _ => {
                let nt = r.coeffs().group(alpha).len();
                RingEndo::make_delta(&r, alpha, &vec![chi; nt]).unwrap()
            }
        };
        let hi = (r.precision()[0] / (2 * p as i64)).max(1);
        let a = random_series(&r, &mut rng, 3, 0, hi, 1);
        let b = random_series(&r, &mut rng, 3, 0, hi, 1);
        let lhs = endo.apply(&r.mul(&a, &b).unwrap()).unwrap();
        let rhs = r.mul(&endo.apply(&a).unwrap(), &endo.apply(&b).unwrap()).unwrap();
        prop_assert!(r.equal_on_window(&lhs, &rhs));
        let sum = endo.apply(&r.add(&a, &b).unwrap()).unwrap();
        let sum2 = r.add(&endo.apply(&a).unwrap(), &endo.apply(&b).unwrap()).unwrap();
        prop_assert!(r.equal_on_window(&sum, &sum2));
    }

    #[test]
    fn padic_inverse(p in prop_oneof![Just(2u32), Just(3), Just(5), Just(7)], c in 1i128..10_000, m in 1u32..8) {
        prop_assume!(c % p as i128 != 0);
        let x = PAdicUnitApprox::new(p, c, m).unwrap();
        let y = x.inverse().unwrap();
        prop_assert_eq!(x.mul(&y).unwrap().residue, 1);
    }

    #[test]
    fn fdelta_frobenius_is_multiplicative(
        p in prop_oneof![Just(2u64), Just(3)],
        ns in proptest::collection::vec(1usize..=3, 2..=3),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let specs: Vec<_> = ns.iter().map(|&n| phigamma::FiniteFieldSpec::standard(p, n).unwrap()).collect();
        let alg = TensorAlgebra::new(specs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<u32> = (0..alg.dim()).map(|_| rng.gen_range(0..p as u32)).collect();
        let y: Vec<u32> = (0..alg.dim()).map(|_| rng.gen_range(0..p as u32)).collect();
        for a in 0..ns.len() {
            let lhs = alg.frobenius(&alg.mul(&x, &y), a, 1);
            let rhs = alg.mul(&alg.frobenius(&x, a, 1), &alg.frobenius(&y, a, 1));
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(alg.frobenius(&x, a, ns[a] as u32), x.clone());
        }
    }
}
