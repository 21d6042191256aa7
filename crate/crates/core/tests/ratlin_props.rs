use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use conelab::ratlin::{kernel_basis, rat, solve_linear, Rational, RationalMatrix};

fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        proptest::collection::vec((-4i64..=4, 1i64..=3), r * c).prop_map(move |xs| {
            let entries = xs.into_iter().map(|(n, d)| rat(n, d)).collect();
            RationalMatrix::from_entries(r, c, entries).unwrap()
        })
    })
}

fn is_canonical(x: &Rational) -> bool {
    x.denom().is_positive() && x.numer().gcd(x.denom()).is_one()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn planted_solution_is_recovered(
        a in small_matrix(),
        seed in proptest::collection::vec(-5i64..=5, 5),
    ) {
        let x0: Vec<Rational> = (0..a.cols()).map(|i| rat(seed[i], 1 + (i as i64 % 2))).collect();
        let b = a.mul_vec(&x0).unwrap();
        let x = solve_linear(&a, &b).unwrap().expect("consistent system");
        prop_assert_eq!(a.mul_vec(&x).unwrap(), b);
    }

    #[test]
    fn rank_nullity(a in small_matrix()) {
        let k = kernel_basis(&a);
        prop_assert_eq!(a.rank() + k.len(), a.cols());
        for v in &k {
            prop_assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn arithmetic_stays_canonical(ops in proptest::collection::vec((0u8..4, -9i64..=9, 1i64..=9), 1..20)) {
        let mut acc = Rational::from_integer(BigInt::one());
        for (op, n, d) in ops {
            let y = rat(n, d);
            acc = match op {
                0 => &acc + &y,
                1 => &acc - &y,
                2 => &acc * &y,
                _ if !y.is_zero() => &acc / &y,
                _ => acc,
            };
            prop_assert!(is_canonical(&acc));
        }
    }
}
