//! Minimal, maximal and dual tensor products of proper polyhedral cones.
//!
//! The Kronecker index of `g ⊗ h` is `i·dim(D) + j`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::polycone::PolyCone;
use crate::ratlin::{kron_int, IntVec, Rational, RationalMatrix};
use crate::tpfactory::ConstructedProduct;

#[derive(Clone, Debug)]
pub enum TensorKind {
    Min,
    Max,
    Constructed(Arc<ConstructedProduct>),
    /// `Psd_m ⊗ Psd_n := Psd_mn`; only meaningful for psd cones, see
    /// [`crate::opsys::middle_product_member`].
    MiddlePsd,
}

impl fmt::Display for TensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorKind::Min => write!(f, "min"),
            TensorKind::Max => write!(f, "max"),
            TensorKind::Constructed(p) => write!(f, "constructed:{}", p.id()),
            TensorKind::MiddlePsd => write!(f, "middle-psd"),
        }
    }
}

fn kron_all(a: &[IntVec], b: &[IntVec]) -> Vec<IntVec> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(kron_int(x, y));
        }
    }
    out
}

/// Cone generated by `g ⊗ h` over extreme rays `g` of `C` and `h` of `D`.
pub fn min_tensor(c: &PolyCone, d: &PolyCone) -> Result<PolyCone> {
    c.require_proper("min_tensor: left factor")?;
    d.require_proper("min_tensor: right factor")?;
    PolyCone::from_generators(c.dim() * d.dim(), kron_all(c.extreme_rays(), d.extreme_rays()))
}

/// `dual(min_tensor(dual C, dual D))`: the cone with facets `f ⊗ e`.
pub fn max_tensor(c: &PolyCone, d: &PolyCone) -> Result<PolyCone> {
    Ok(min_tensor(&c.dual(), &d.dual())?.dual())
}

pub fn tensor(kind: &TensorKind, c: &PolyCone, d: &PolyCone) -> Result<PolyCone> {
    match kind {
        TensorKind::Min => min_tensor(c, d),
        TensorKind::Max => max_tensor(c, d),
        TensorKind::Constructed(p) => p.cone(c, d),
        TensorKind::MiddlePsd => Err(Error::Unsupported(
            "the middle psd product is defined on psd cones, not polyhedral ones".into(),
        )),
    }
}

/// `dual(tensor(kind, dual C, dual D))`.
pub fn dual_tensor(kind: &TensorKind, c: &PolyCone, d: &PolyCone) -> Result<PolyCone> {
    c.require_proper("dual_tensor: left factor")?;
    d.require_proper("dual_tensor: right factor")?;
    Ok(tensor(kind, &c.dual(), &d.dual())?.dual())
}

/// Membership of `a` in `tensor(kind, C, D)`.
pub fn tensor_member(kind: &TensorKind, c: &PolyCone, d: &PolyCone, a: &[Rational]) -> Result<bool> {
    tensor(kind, c, d)?.member(a)
}

/// Checks that `m` maps every generator of `from` into `to`.
pub fn check_positive_map(m: &RationalMatrix, from: &PolyCone, to: &PolyCone) -> Result<()> {
    check_dim(from.dim(), m.cols())?;
    check_dim(to.dim(), m.rows())?;
    for (i, g) in from.generators().iter().enumerate() {
        let img = m.mul_int_vec(g)?;
        if !to.member(&img)? {
            return Err(Error::Precondition(format!(
                "map does not send generator {i} into the target cone"
            )));
        }
    }
    Ok(())
}

/// Random element of `cone`: a nonnegative integer combination of one to
/// three extreme rays.
fn sample_member<R: Rng>(rng: &mut R, rays: &[IntVec], dim: usize) -> IntVec {
    let mut v = vec![BigInt::zero(); dim];
    if rays.is_empty() {
        return v;
    }
    let terms = rng.random_range(1..=3usize.min(rays.len()));
    for _ in 0..terms {
        let r = &rays[rng.random_range(0..rays.len())];
        let w = BigInt::from(rng.random_range(1..=5));
        for (x, y) in v.iter_mut().zip(r) {
            *x += &w * y;
        }
    }
    v
}

/// Samples elements of `C ⊗ D` and checks that `f ⊗ g` sends them into
/// `C′ ⊗ D′`. For `MIN` samples are combinations of elementary tensors of
/// generators; otherwise combinations of extreme rays of the product cone,
/// each confirmed by exact membership.
#[allow(clippy::too_many_arguments)]
pub fn functoriality_check(
    kind: &TensorKind,
    f: &RationalMatrix,
    g: &RationalMatrix,
    c: &PolyCone,
    c2: &PolyCone,
    d: &PolyCone,
    d2: &PolyCone,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    check_positive_map(f, c, c2)?;
    check_positive_map(g, d, d2)?;
    let fg = f.kron(g);
    let source = tensor(kind, c, d)?;
    let target = tensor(kind, c2, d2)?;
    let rays: Vec<IntVec> = match kind {
        TensorKind::Min => source.generators(),
        _ => {
            let mut r = source.extreme_rays().to_vec();
            for l in source.lineality_basis() {
                r.push(l.clone());
                r.push(l.iter().map(|x| -x).collect());
            }
            r
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = sample_member(&mut rng, &rays, source.dim());
        if !source.member_int(&a)? {
            return Err(Error::Precondition("sampled element is not a member".into()));
        }
        let a: Vec<Rational> = a.into_iter().map(Rational::from_integer).collect();
        let img = fg.mul_vec(&a)?;
        if !target.member(&img)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reorders `(v, w, x, y)` coordinates of `V⊗W⊗X⊗Y` to `(v, x, w, y)`.
pub fn reshuffle(t: &[Rational], dv: usize, dw: usize, dx: usize, dy: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); t.len()];
    for v in 0..dv {
        for w in 0..dw {
            for x in 0..dx {
                for y in 0..dy {
                    out[((v * dx + x) * dw + w) * dy + y] = t[((v * dw + w) * dx + x) * dy + y].clone();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_positive_map, random_proper_cone, rng};
    use crate::ratlin::{int_vec, rat_vec};

    fn square() -> PolyCone {
        PolyCone::from_i64_generators(3, &[&[1, 1, 1], &[1, -1, 1], &[-1, 1, 1], &[-1, -1, 1]])
    }

    fn to_matrix(rows: &[IntVec], cols: usize) -> RationalMatrix {
        RationalMatrix::from_int_rows(rows, cols)
    }

    #[test]
    fn orthant_products_collapse() {
        let o2 = PolyCone::orthant(2);
        let o3 = PolyCone::orthant(3);
        let o6 = PolyCone::orthant(6);
        assert!(min_tensor(&o2, &o3).unwrap().same_cone(&o6).unwrap());
        assert!(max_tensor(&o2, &o3).unwrap().same_cone(&o6).unwrap());
    }

    #[test]
    fn min_of_wedge_and_orthant() {
        let c = PolyCone::from_i64_generators(2, &[&[1, 0], &[1, 1]]);
        let m = min_tensor(&c, &PolyCone::orthant(2)).unwrap();
        let mut g = m.stored_generators().unwrap().to_vec();
        g.sort();
        let mut want = vec![
            int_vec(&[1, 0, 0, 0]),
            int_vec(&[0, 1, 0, 0]),
            int_vec(&[1, 0, 1, 0]),
            int_vec(&[0, 1, 0, 1]),
        ];
        want.sort();
        assert_eq!(g, want);
    }

    #[test]
    fn square_pair_has_a_gap() {
        let s = square();
        let min = min_tensor(&s, &s).unwrap();
        let max = max_tensor(&s, &s).unwrap();
        assert!(min.subset_of(&max).unwrap());
        // an extreme ray of max outside min
        let gap = max
            .extreme_rays()
            .iter()
            .find(|r| !min.member_int(r).unwrap())
            .cloned()
            .expect("gap witness");
        assert!(max.member_int(&gap).unwrap());
        assert!(!max.subset_of(&min).unwrap());
    }

    #[test]
    fn dual_tensor_swaps_min_and_max() {
        let mut r = rng(21);
        for _ in 0..5 {
            let c = random_proper_cone(&mut r, 3, 4, 3);
            let d = random_proper_cone(&mut r, 2, 3, 3);
            let dm = dual_tensor(&TensorKind::Min, &c, &d).unwrap();
            assert!(dm.same_cone(&max_tensor(&c, &d).unwrap()).unwrap());
            let dx = dual_tensor(&TensorKind::Max, &c, &d).unwrap();
            assert!(dx.same_cone(&min_tensor(&c, &d).unwrap()).unwrap());
        }
        let o = PolyCone::orthant(2);
        assert!(dual_tensor(&TensorKind::Min, &o, &o).unwrap().same_cone(&PolyCone::orthant(4)).unwrap());
    }

    #[test]
    fn middle_psd_is_not_polyhedral() {
        let o = PolyCone::orthant(2);
        assert!(matches!(tensor(&TensorKind::MiddlePsd, &o, &o), Err(Error::Unsupported(_))));
    }

    #[test]
    fn non_proper_rejected() {
        let ray = PolyCone::from_i64_generators(2, &[&[1, 0]]);
        assert!(matches!(min_tensor(&ray, &PolyCone::orthant(2)), Err(Error::NotProper(_))));
    }

    #[test]
    fn identity_maps_are_functorial() {
        let s = square();
        let id = RationalMatrix::identity(3);
        for kind in [TensorKind::Min, TensorKind::Max] {
            assert!(functoriality_check(&kind, &id, &id, &s, &s, &s, &s, 20, 1).unwrap());
        }
    }

    #[test]
    fn random_positive_maps_are_functorial() {
        let mut r = rng(7);
        for seed in 0..5 {
            let c = random_proper_cone(&mut r, 2, 3, 3);
            let c2 = random_proper_cone(&mut r, 3, 4, 3);
            let d = random_proper_cone(&mut r, 2, 3, 3);
            let d2 = random_proper_cone(&mut r, 2, 3, 3);
            let f = to_matrix(&random_positive_map(&mut r, &c, &c2, 2), 2);
            let g = to_matrix(&random_positive_map(&mut r, &d, &d2, 2), 2);
            for kind in [TensorKind::Min, TensorKind::Max] {
                assert!(functoriality_check(&kind, &f, &g, &c, &c2, &d, &d2, 20, seed).unwrap());
            }
        }
    }

    #[test]
    fn non_positive_map_rejected() {
        let o = PolyCone::orthant(2);
        let neg = RationalMatrix::from_i64_rows(&[&[-1, 0], &[0, 1]]);
        let id = RationalMatrix::identity(2);
        let r = functoriality_check(&TensorKind::Min, &neg, &id, &o, &o, &o, &o, 5, 0);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn reshuffle_moves_indices() {
        // v, w, x, y each of size 2; entry (0,1,1,0) moves to (0,1,1,0) in (v,x,w,y) order
        let mut t = rat_vec(&[0; 16]);
        t[0b0110] = Rational::from_integer(1.into());
        let r = reshuffle(&t, 2, 2, 2, 2);
        assert_eq!(r[0b0110], Rational::from_integer(1.into()));
        let mut t = rat_vec(&[0; 16]);
        t[0b0100] = Rational::from_integer(1.into()); // w = 1
        let r = reshuffle(&t, 2, 2, 2, 2);
        assert_eq!(r[0b0010], Rational::from_integer(1.into()));
    }
}
