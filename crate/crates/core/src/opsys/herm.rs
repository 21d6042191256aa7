//! Complex Hermitian matrices and their real coordinates.
//!
//! Coordinates of `M ∈ Her_n` (length `n²`): the diagonal `M_ii`, then for
//! each `i < j` in row-major order the pair `√2·Re M_ij, √2·Im M_ij`. They
//! are coefficients against the orthonormal basis returned by
//! [`hermitian_basis`], so `tr(AB)` is the Euclidean product of coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermElement {
    m: CMatrix,
}

impl HermElement {
    /// Validates Hermitian symmetry within `1e-12`, then symmetrizes exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        HermElement {
            m: (m + adj).scale(0.5),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = c(x, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        HermElement {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermElement {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn diag(d: &[f64]) -> Self {
        let v = CVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0)));
        HermElement {
            m: CMatrix::from_diagonal(&v),
        }
    }

    /// The rank-one matrix `v v*`.
    pub fn projector(v: &CVector) -> Self {
        HermElement::symmetrized(v * v.adjoint())
    }

    /// `Σ_{a,b} |aa⟩⟨bb|` on `C^k ⊗ C^k`, the unnormalized maximally entangled projector.
    pub fn max_entangled(k: usize) -> Self {
        let mut v = CVector::zeros(k * k);
        for a in 0..k {
            v[a * k + a] = c(1.0, 0.0);
        }
        Self::projector(&v)
    }

    /// The swap operator `|ab⟩ ↦ |ba⟩` on `C^k ⊗ C^k`.
    pub fn swap(k: usize) -> Self {
        let mut m = CMatrix::zeros(k * k, k * k);
        for a in 0..k {
            for b in 0..k {
                m[(b * k + a, a * k + b)] = c(1.0, 0.0);
            }
        }
        HermElement { m }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn kron(&self, other: &HermElement) -> HermElement {
        HermElement {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn scale(&self, s: f64) -> HermElement {
        HermElement {
            m: self.m.scale(s),
        }
    }

    pub fn add(&self, other: &HermElement) -> HermElement {
        HermElement {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &HermElement) -> HermElement {
        HermElement {
            m: &self.m - &other.m,
        }
    }

    pub fn conj(&self) -> HermElement {
        HermElement {
            m: self.m.map(|z| z.conj()),
        }
    }

    pub fn transpose(&self) -> HermElement {
        HermElement {
            m: self.m.transpose(),
        }
    }

    /// `V* M V` for an `n × p` matrix `V`.
    pub fn compress(&self, v: &CMatrix) -> HermElement {
        HermElement::symmetrized(v.adjoint() * &self.m * v)
    }

    /// Transpose on the second tensor factor of `C^m ⊗ C^n`.
    pub fn partial_transpose(&self, m: usize, n: usize) -> Result<HermElement> {
        let size = self.n();
        if m * n != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: m * n,
            });
        }
        let mut out = CMatrix::zeros(size, size);
        for a in 0..m {
            for b in 0..n {
                for a2 in 0..m {
                    for b2 in 0..n {
                        out[(a * n + b, a2 * n + b2)] = self.m[(a * n + b2, a2 * n + b)];
                    }
                }
            }
        }
        Ok(HermElement { m: out })
    }

    /// `Re tr(A B)`, the real inner product on `Her_n`.
    pub fn trace_pair(&self, other: &HermElement) -> f64 {
        self.m
            .iter()
            .zip(other.m.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let eig = self.m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = CMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        (vals, vecs)
    }

    pub fn min_eig(&self) -> (f64, CVector) {
        let (vals, vecs) = self.eigh();
        (vals[0], vecs.column(0).into_owned())
    }

    /// Nearest psd matrix in Frobenius norm (negative eigenvalues clipped).
    pub fn psd_part(&self) -> HermElement {
        let (vals, vecs) = self.eigh();
        let d = CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(x.max(0.0), 0.0)));
        HermElement::symmetrized(&vecs * CMatrix::from_diagonal(&d) * vecs.adjoint())
    }

    /// `v* M v` (real for Hermitian `M`).
    pub fn quad(&self, v: &CVector) -> f64 {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }

    pub fn coords(&self) -> Vec<f64> {
        let n = self.n();
        let s = std::f64::consts::SQRT_2;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.push(self.m[(i, i)].re);
        }
        for i in 0..n {
            for j in i + 1..n {
                out.push(s * self.m[(i, j)].re);
                out.push(s * self.m[(i, j)].im);
            }
        }
        out
    }

    pub fn from_coords(n: usize, x: &[f64]) -> Result<HermElement> {
        if x.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: x.len(),
            });
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(x[i], 0.0);
        }
        let mut k = n;
        for i in 0..n {
            for j in i + 1..n {
                let z = c(h * x[k], h * x[k + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                k += 2;
            }
        }
        Ok(HermElement { m })
    }

    /// Random Hermitian matrix with standard normal coordinates.
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> HermElement {
        let x: Vec<f64> = (0..n * n).map(|_| gaussian(rng)).collect();
        HermElement::from_coords(n, &x).expect("length n²")
    }

    /// Random psd matrix `G G*` with complex Gaussian `G` of rank `rank`.
    pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> HermElement {
        let g = random_cmatrix(rng, n, rank);
        HermElement::symmetrized(&g * g.adjoint())
    }
}

pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_cvector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_iterator(n, (0..n).map(|_| c(gaussian(rng), gaussian(rng))));
    let norm = v.norm();
    v.unscale(norm)
}

pub fn random_cmatrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Orthonormal basis of `Her_n` matching [`HermElement::coords`].
pub fn hermitian_basis(n: usize) -> Vec<HermElement> {
    (0..n * n)
        .map(|k| {
            let mut x = vec![0.0; n * n];
            x[k] = 1.0;
            HermElement::from_coords(n, &x).expect("length n²")
        })
        .collect()
}

impl Serialize for HermElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.n())
            .map(|i| (0..self.n()).map(|j| [self.m[(i, j)].re, self.m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(serde::de::Error::custom(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            for (j, z) in r.iter().enumerate() {
                m[(i, j)] = c(z[0], z[1]);
            }
        }
        HermElement::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermElement::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn coords_round_trip_and_isometry() {
        let mut r = rng(1);
        let a = HermElement::random(&mut r, 3);
        let b = HermElement::random(&mut r, 3);
        let back = HermElement::from_coords(3, &a.coords()).unwrap();
        assert!((&back.m - &a.m).norm() < 1e-14);
        let dot: f64 = a.coords().iter().zip(b.coords()).map(|(x, y)| x * y).sum();
        assert!((dot - a.trace_pair(&b)).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = hermitian_basis(3);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.trace_pair(y) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn swap_and_bell_relation() {
        // The partial transpose of the swap is the maximally entangled projector.
        let s = HermElement::swap(2).partial_transpose(2, 2).unwrap();
        assert!((s.matrix() - HermElement::max_entangled(2).matrix()).norm() < 1e-15);
        let (vals, _) = HermElement::swap(2).eigh();
        assert!((vals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_part_clips() {
        let p = HermElement::diag(&[1.0, -2.0]).psd_part();
        assert!((p.matrix() - HermElement::diag(&[1.0, 0.0]).matrix()).norm() < 1e-14);
    }

    #[test]
    fn json_uses_pairs() {
        let m = HermElement::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[2.0,0.0]]]");
        let back: HermElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
