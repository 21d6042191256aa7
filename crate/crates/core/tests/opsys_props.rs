use proptest::prelude::*;
use rand::Rng;

use conelab::opsys::{
    in_p, interior_point, middle_product_member, random_cmatrix, HermElement, OperatorSystem, SystemElement, Tag,
};
use conelab::random::rng;

/// Realized system `{I, A_1, .., A_{d-1}}` on `C^k`.
fn realized(seed: u64) -> Vec<HermElement> {
    let mut r = rng(seed);
    let k = r.random_range(2..=3);
    let d = r.random_range(2..=3);
    let mut mats = vec![HermElement::identity(k)];
    mats.extend((1..d).map(|_| HermElement::random(&mut r, k)));
    mats
}

/// Random level-`m` element pushed into the level cone along `ξ ⊗ I`.
fn member(mats: &[HermElement], m: usize, seed: u64) -> SystemElement {
    let mut r = rng(seed);
    let sys = OperatorSystem::realized(mats.to_vec()).unwrap();
    let (xi, _) = interior_point(mats).unwrap();
    let x = SystemElement::new(m, (0..mats.len()).map(|_| HermElement::random(&mut r, m)).collect()).unwrap();
    let shift = SystemElement::new(m, xi.iter().map(|&c| HermElement::identity(m).scale(c)).collect()).unwrap();
    let mut t = 0.25;
    loop {
        let y = x.add(&shift.scale(t)).unwrap();
        if sys.level_member(&y, 1e-9).unwrap().tag == Tag::In {
            return y;
        }
        t *= 2.0;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compressions_preserve_level_membership(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
        let mats = realized(seed);
        let sys = OperatorSystem::realized(mats.clone()).unwrap();
        let x = member(&mats, m, seed ^ 1);
        let v = random_cmatrix(&mut rng(seed ^ 2), m, n);
        let y = x.compress(&v).unwrap();
        prop_assert_eq!(sys.level_member(&y, 1e-8).unwrap().tag, Tag::In);
    }

    #[test]
    fn middle_product_pairs_nonnegatively(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (ra, rb) = (r.random_range(1..=4), r.random_range(1..=4));
        let a = HermElement::random_psd(&mut r, 4, ra);
        let b = HermElement::random_psd(&mut r, 4, rb);
        prop_assert!(a.trace_pair(&b) >= -1e-10);
        prop_assert_eq!(middle_product_member(&a, 2, 2, 1e-9).unwrap().tag, Tag::In);
    }

    #[test]
    fn negative_eigenvector_rejects_non_psd(seed in any::<u64>()) {
        let x = HermElement::random(&mut rng(seed), 4);
        let (lo, v) = x.min_eig();
        prop_assume!(lo < -1e-6);
        prop_assert!(x.trace_pair(&HermElement::projector(&v)) < 0.0);
    }

    #[test]
    fn subdual_generators_are_in_p(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.random_range(1..=3);
        let rank = r.random_range(1..=k);
        let p = HermElement::random_psd(&mut r, k, rank);
        let q = HermElement::random_psd(&mut r, k, 1);
        let x = SystemElement::new(k, vec![p, q]).unwrap();
        prop_assert_eq!(in_p(&x, 1e-9).tag, Tag::In);
    }

    #[test]
    fn biduality_preserves_verdicts(seed in any::<u64>(), m in 1usize..=2) {
        let mats = realized(seed);
        let sys = OperatorSystem::realized(mats.clone()).unwrap();
        let mut r = rng(seed ^ 3);
        let x = SystemElement::new(m, (0..mats.len()).map(|_| HermElement::random(&mut r, m)).collect()).unwrap();
        let back = sys.dual_system().dual_system();
        let a = sys.level_member(&x, 1e-8).unwrap().tag;
        let b = back.level_member(&x, 1e-8).unwrap().tag;
        prop_assume!(a != Tag::Unknown && b != Tag::Unknown);
        prop_assert_eq!(a, b);
    }
}
