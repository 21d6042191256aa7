use proptest::prelude::*;
use rand::Rng;

use conelab::conetensor::max_tensor;
use conelab::random::{random_int_vec, random_proper_cone, rng};
use conelab::ratlin::{int, to_rat_vec, Rational};
use conelab::tpfactory::{tp_member_cone, unit_family, ConstructedProduct, Stem};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unit_family_matches_max(seed in any::<u64>(), clamp in any::<bool>()) {
        let mut r = rng(seed);
        let (kg, kh) = (r.random_range(2..=4), r.random_range(2..=4));
        let g = random_proper_cone(&mut r, 2, kg, 3);
        let h = random_proper_cone(&mut r, 2, kh, 3);
        let p = ConstructedProduct::new(unit_family(Stem::Simplex)).with_clamp(clamp);
        prop_assert!(p.cone(&g, &h).unwrap().same_cone(&max_tensor(&g, &h).unwrap()).unwrap());
    }

    #[test]
    fn members_are_closed_under_conic_combination(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_proper_cone(&mut r, 2, 3, 3);
        let h = random_proper_cone(&mut r, 2, 3, 3);
        let p = ConstructedProduct::new(unit_family(Stem::Simplex));
        let members: Vec<Vec<Rational>> = (0..40)
            .map(|_| to_rat_vec(&random_int_vec(&mut r, 4, 3)))
            .filter(|a| tp_member_cone(&p, &g, &h, a).unwrap())
            .collect();
        for w in members.windows(2) {
            let (s, t) = (int(r.random_range(0..=3)), int(r.random_range(0..=3)));
            let c: Vec<Rational> = w[0].iter().zip(&w[1]).map(|(a, b)| &s * a + &t * b).collect();
            prop_assert!(tp_member_cone(&p, &g, &h, &c).unwrap());
        }
    }
}
