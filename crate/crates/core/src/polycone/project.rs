//! Floating-point projection onto polyhedral cones (Lawson–Hanson NNLS) and
//! the self-duality residual built on it.

use nalgebra::{DMatrix, DVector};

use super::PolyCone;
use crate::error::{check_dim, Error, Result};
use crate::ratlin::{to_f64_vec, IntVec};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    /// Nonnegative coefficients.
    pub x: DVector<f64>,
    /// `A x`, the projection of `b` onto the cone of the columns.
    pub fit: DVector<f64>,
    pub iterations: usize,
}

/// Active-set nonnegative least squares: `argmin_{x >= 0} |A x - b|`.
///
/// Terminates when the dual vector `w = A^T (b - A x)` is at most
/// `1e-10 * max(1, |b|)` off the active set.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> Result<NnlsSolution> {
    let (m, n) = a.shape();
    check_dim(m, b.len())?;
    let tol = 1e-10 * b.norm().max(1.0);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose addition failed to produce a positive coefficient.
    let mut blocked = vec![false; n];
    let mut iterations = 0;

    loop {
        let w = a.tr_mul(&(b - a * &x));
        let next = (0..n)
            .filter(|&j| !passive[j] && !blocked[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let j = match next {
            Some(j) if w[j] > tol => j,
            _ => break,
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::NonConvergence {
                iterations,
                detail: format!("nnls: max dual entry {:e} above {:e}", w[j], tol),
            });
        }
        passive[j] = true;
        let mut added = Some(j);

        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = least_squares(a, b, &idx);
            if let Some(j) = added.take() {
                let pos = idx.iter().position(|&i| i == j).unwrap();
                if z[pos] <= 0.0 {
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            }
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                blocked.iter_mut().for_each(|f| *f = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - z[k]));
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    let fit = a * &x;
    Ok(NnlsSolution {
        x,
        fit,
        iterations,
    })
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(idx);
    sub.svd(true, true)
        .solve(b, 1e-13)
        .expect("svd with u and v computed")
}

/// Unit-normalized generator columns for a cone, reused across projections.
#[derive(Clone, Debug)]
pub struct ConeProjector {
    columns: DMatrix<f64>,
    dim: usize,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

impl ConeProjector {
    pub fn new(cone: &PolyCone) -> Self {
        let gens: Vec<IntVec> = cone
            .extreme_rays()
            .iter()
            .cloned()
            .chain(cone.lineality_basis().iter().flat_map(|l| {
                let neg: IntVec = l.iter().map(|x| -x).collect();
                [l.clone(), neg]
            }))
            .collect();
        let dim = cone.dim();
        let mut columns = DMatrix::<f64>::zeros(dim, gens.len());
        for (j, g) in gens.iter().enumerate() {
            for (i, x) in unit(&to_f64_vec(g)).into_iter().enumerate() {
                columns[(i, j)] = x;
            }
        }
        ConeProjector { columns, dim }
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        if self.columns.ncols() == 0 {
            return Ok(vec![0.0; self.dim]);
        }
        let b = DVector::from_column_slice(v);
        let sol = nnls(&self.columns, &b, 50 * (self.columns.ncols() + self.dim))?;
        Ok(sol.fit.iter().copied().collect())
    }

    pub fn distance(&self, v: &[f64]) -> Result<f64> {
        let p = self.project(v)?;
        Ok(v.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

/// Euclidean projection of `v` onto `cone`.
pub fn project_onto_cone(cone: &PolyCone, v: &[f64]) -> Result<Vec<f64>> {
    cone.require_proper("project_onto_cone")?;
    ConeProjector::new(cone).project(v)
}

/// Largest distance from a unit extreme ray of `C` to `C^∨` or from a unit
/// extreme ray of `C^∨` to `C`.
pub fn selfdual_residual(cone: &PolyCone) -> Result<f64> {
    cone.require_proper("selfdual_residual")?;
    let dual = cone.dual();
    let to_cone = ConeProjector::new(cone);
    let to_dual = ConeProjector::new(&dual);
    let mut worst: f64 = 0.0;
    // Exact members contribute exactly zero.
    for r in cone.extreme_rays() {
        if !dual.member_int(r)? {
            worst = worst.max(to_dual.distance(&unit(&to_f64_vec(r)))?);
        }
    }
    for r in dual.extreme_rays() {
        if !cone.member_int(r)? {
            worst = worst.max(to_cone.distance(&unit(&to_f64_vec(r)))?);
        }
    }
    Ok(worst)
}
