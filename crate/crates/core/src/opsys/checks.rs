//! Membership oracles for the psd, separable and block-positive cones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fista::{self, PsdMap};
use super::herm::{random_cvector, CMatrix, CVector, HermElement};
use super::verdict::{to_list, Tag, Verdict, Witness};
use crate::error::{Error, Result};

/// `IN` iff the smallest eigenvalue is at least `-tol`.
pub fn psd_member(m: &HermElement, tol: f64) -> Verdict {
    let (vals, vecs) = m.eigh();
    if vals.is_empty() || vals[0] >= -tol {
        Verdict::certified(Tag::In, Witness::Spectrum { eigenvalues: vals })
    } else {
        Verdict::certified(
            Tag::Out,
            Witness::Eigenvector {
                value: vals[0],
                vector: to_list(&vecs.column(0).into_owned()),
            },
        )
    }
}

fn check_size(m: &HermElement, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: prod,
        });
    }
    Ok(())
}

fn small_pair(m: usize, n: usize) -> bool {
    matches!((m, n), (2, 2) | (2, 3) | (3, 2))
}

/// Positive partial transpose test on `C^m ⊗ C^n` (transpose on the second
/// factor). `IN` is a separability certificate only for 2⊗2 and 2⊗3;
/// elsewhere a psd partial transpose yields `UNKNOWN`.
pub fn ppt_check(m: &HermElement, dm: usize, dn: usize, tol: f64) -> Result<Verdict> {
    check_size(m, &[dm, dn])?;
    let pt = m.partial_transpose(dm, dn)?;
    let v = psd_member(&pt, tol);
    if v.is_in() && !small_pair(dm, dn) {
        return Ok(Verdict::unknown(v.witness));
    }
    Ok(v)
}

/// Transpose of the tensor factors listed in `subset` for `C^{d_0} ⊗ … ⊗ C^{d_{k-1}}`.
pub fn partial_transpose_subset(m: &CMatrix, dims: &[usize], subset: &[usize]) -> CMatrix {
    let n = m.nrows();
    let digits = |mut x: usize| {
        let mut out = vec![0; dims.len()];
        for j in (0..dims.len()).rev() {
            out[j] = x % dims[j];
            x /= dims[j];
        }
        out
    };
    let index = |d: &[usize]| d.iter().zip(dims).fold(0, |acc, (x, s)| acc * s + x);
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let rd = digits(r);
        for col in 0..n {
            let mut a = rd.clone();
            let mut b = digits(col);
            for &j in subset {
                std::mem::swap(&mut a[j], &mut b[j]);
            }
            out[(r, col)] = m[(index(&a), index(&b))];
        }
    }
    out
}

fn kron_all(vs: &[CVector]) -> CVector {
    let mut out = vs[0].clone();
    for v in &vs[1..] {
        out = out.kronecker(v);
    }
    out
}

/// Alternating minimization of `(⊗v_j)* M (⊗v_j)` over unit product vectors.
/// Returns the smallest value found and its factors.
pub fn product_search(m: &HermElement, dims: &[usize], restarts: usize, seed: u64) -> Result<(f64, Vec<CVector>)> {
    check_size(m, dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut best_vs: Vec<CVector> = dims.iter().map(|&d| CVector::zeros(d)).collect();
    for _ in 0..restarts.max(1) {
        let mut vs: Vec<CVector> = dims.iter().map(|&d| random_cvector(&mut rng, d)).collect();
        let mut value = m.quad(&kron_all(&vs));
        for _ in 0..200 {
            for j in 0..dims.len() {
                let cols: Vec<CVector> = (0..dims[j])
                    .map(|b| {
                        let mut parts = vs.clone();
                        parts[j] = CVector::zeros(dims[j]);
                        parts[j][b] = num_complex::Complex64::new(1.0, 0.0);
                        kron_all(&parts)
                    })
                    .collect();
                let w = CMatrix::from_columns(&cols);
                let (_, v) = m.compress(&w).min_eig();
                vs[j] = v;
            }
            let next = m.quad(&kron_all(&vs));
            let done = value - next < 1e-14 * (1.0 + value.abs());
            value = next;
            if done {
                break;
            }
        }
        if value < best {
            best = value;
            best_vs = vs;
        }
    }
    Ok((best, best_vs))
}

struct Decomp<'a> {
    n: usize,
    dims: &'a [usize],
    subsets: &'a [Vec<usize>],
}

impl PsdMap for Decomp<'_> {
    fn block_sizes(&self) -> Vec<usize> {
        vec![self.n; self.subsets.len() + 1]
    }
    fn apply(&self, q: &[CMatrix]) -> Vec<f64> {
        let mut sum = q[0].clone();
        for (s, qs) in self.subsets.iter().zip(&q[1..]) {
            sum += partial_transpose_subset(qs, self.dims, s);
        }
        HermElement::symmetrized(sum).coords()
    }
    fn adjoint(&self, r: &[f64]) -> Vec<CMatrix> {
        let m = HermElement::from_coords(self.n, r).expect("length").into_matrix();
        let mut out = vec![m.clone()];
        for s in self.subsets {
            out.push(partial_transpose_subset(&m, self.dims, s));
        }
        out
    }
}

/// Searches for `M = P + Σ_S Q_S^{Γ_S}` with all parts psd, over every
/// nonempty subset `S` of factors not containing the last one. Such a
/// decomposition certifies block-positivity.
pub fn decomposition_certificate(m: &HermElement, dims: &[usize], tol: f64) -> Result<Option<Witness>> {
    check_size(m, dims)?;
    let k = dims.len();
    let subsets: Vec<Vec<usize>> = (1u32..(1 << (k - 1)))
        .map(|mask| (0..k - 1).filter(|&j| mask & (1 << j) != 0).collect())
        .collect();
    let map = Decomp {
        n: m.n(),
        dims,
        subsets: &subsets,
    };
    let target = m.coords();
    let r = fista::project(&map, &target, tol * 1e-3, 5000);
    let mut p = m.matrix().clone();
    for (s, qs) in subsets.iter().zip(&r.q[1..]) {
        p -= partial_transpose_subset(qs, dims, s);
    }
    let (min_eig, _) = HermElement::symmetrized(p).min_eig();
    if min_eig >= -tol {
        Ok(Some(Witness::Decomposition {
            residual: r.residual,
            min_eig,
            transposed: subsets,
        }))
    } else {
        Ok(None)
    }
}

/// Block-positivity on `C^m ⊗ C^n`: `(v⊗w)* M (v⊗w) >= 0` for all `v, w`.
///
/// `OUT` carries a violating product vector. `IN` is certified when a
/// decomposition `P + Q^Γ` is found (always possible for 2⊗2 and 2⊗3);
/// otherwise `IN` rests on the search and `certified` is false.
pub fn block_positive_check(m: &HermElement, dm: usize, dn: usize, restarts: usize, tol: f64, seed: u64) -> Result<Verdict> {
    multipartite_positive_check(m, &[dm, dn], restarts, tol, seed)
}

/// Positivity on product vectors for any number of factors.
pub fn multipartite_positive_check(m: &HermElement, dims: &[usize], restarts: usize, tol: f64, seed: u64) -> Result<Verdict> {
    let (best, vs) = product_search(m, dims, restarts, seed)?;
    if best < -tol {
        return Ok(Verdict::certified(
            Tag::Out,
            Witness::ProductVectors {
                value: best,
                factors: vs.iter().map(to_list).collect(),
            },
        ));
    }
    if psd_member(m, tol).is_in() {
        return Ok(Verdict::certified(Tag::In, Witness::Spectrum { eigenvalues: m.eigh().0 }));
    }
    if let Some(w) = decomposition_certificate(m, dims, tol)? {
        return Ok(Verdict::certified(Tag::In, w));
    }
    Ok(Verdict::heuristic(
        Tag::In,
        Witness::SearchExhausted {
            restarts: restarts.max(1),
            best,
        },
    ))
}

/// Membership in the self-dual middle product `Psd_m ⊗ Psd_n := Psd_mn`.
pub fn middle_product_member(m: &HermElement, dm: usize, dn: usize, tol: f64) -> Result<Verdict> {
    check_size(m, &[dm, dn])?;
    Ok(psd_member(m, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn bell() -> HermElement {
        HermElement::max_entangled(2)
    }

    #[test]
    fn psd_examples() {
        assert!(psd_member(&HermElement::identity(4), 1e-9).is_in());
        let v = psd_member(&HermElement::diag(&[1.0, -1.0, -1.0, 1.0]), 1e-9);
        assert!(v.is_out());
        match v.witness {
            Some(Witness::Eigenvector { value, vector }) => {
                assert!((value + 1.0).abs() < 1e-12);
                let weight: f64 = vector[1][0].powi(2) + vector[1][1].powi(2) + vector[2][0].powi(2) + vector[2][1].powi(2);
                assert!((weight - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        match psd_member(&bell(), 1e-9).witness {
            Some(Witness::Spectrum { eigenvalues }) => {
                let want = [0.0, 0.0, 0.0, 2.0];
                for (a, b) in eigenvalues.iter().zip(want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ppt_examples() {
        let v = ppt_check(&bell(), 2, 2, 1e-9).unwrap();
        assert!(v.is_out());
        if let Some(Witness::Eigenvector { value, .. }) = v.witness {
            assert!((value + 1.0).abs() < 1e-9);
        }
        let mut r = rng(2);
        let pq = HermElement::random_psd(&mut r, 2, 2).kron(&HermElement::random_psd(&mut r, 2, 1));
        assert!(ppt_check(&pq, 2, 2, 1e-9).unwrap().is_in());
        assert!(ppt_check(&HermElement::identity(4), 2, 2, 1e-9).unwrap().is_in());
        assert!(matches!(ppt_check(&HermElement::identity(5), 2, 2, 1e-9), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ppt_inconclusive_in_larger_dims() {
        let v = ppt_check(&HermElement::identity(9), 3, 3, 1e-9).unwrap();
        assert_eq!(v.tag, Tag::Unknown);
    }

    #[test]
    fn swap_is_block_positive_not_psd() {
        let s = HermElement::swap(2);
        assert!(psd_member(&s, 1e-9).is_out());
        let v = block_positive_check(&s, 2, 2, 20, 1e-6, 0).unwrap();
        assert!(v.is_in() && v.certified, "{v:?}");
    }

    #[test]
    fn negative_identity_is_not_block_positive() {
        let v = block_positive_check(&HermElement::identity(4).scale(-1.0), 2, 2, 3, 1e-9, 0).unwrap();
        assert!(v.is_out());
        if let Some(Witness::ProductVectors { value, .. }) = v.witness {
            assert!((value + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn psd_is_block_positive() {
        let mut r = rng(4);
        let p = HermElement::random_psd(&mut r, 6, 3);
        let v = block_positive_check(&p, 2, 3, 5, 1e-9, 1).unwrap();
        assert!(v.is_in() && v.certified);
    }

    #[test]
    fn partial_transpose_subset_matches_bipartite() {
        let mut r = rng(5);
        let m = HermElement::random(&mut r, 6);
        let a = partial_transpose_subset(m.matrix(), &[2, 3], &[1]);
        let b = m.partial_transpose(2, 3).unwrap();
        assert!((a - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn middle_product_sits_between() {
        let b = bell();
        assert!(middle_product_member(&b, 2, 2, 1e-9).unwrap().is_in());
        assert!(ppt_check(&b, 2, 2, 1e-9).unwrap().is_out());
        let s = HermElement::swap(2);
        assert!(middle_product_member(&s, 2, 2, 1e-9).unwrap().is_out());
    }
}
