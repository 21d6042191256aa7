//! Accelerated projected gradient for `min_{Q_j ⪰ 0} ½‖A(Q) − b‖²`.
//!
//! `A` maps a tuple of Hermitian blocks to a real vector; the block space
//! carries the inner product `Σ_j Re tr(Q_j K_j)`.

use super::herm::{CMatrix, HermElement};

pub(crate) trait PsdMap {
    fn block_sizes(&self) -> Vec<usize>;
    fn apply(&self, q: &[CMatrix]) -> Vec<f64>;
    fn adjoint(&self, r: &[f64]) -> Vec<CMatrix>;
}

#[derive(Clone, Debug)]
pub(crate) struct FistaResult {
    pub q: Vec<CMatrix>,
    pub fit: Vec<f64>,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn block_norm(q: &[CMatrix]) -> f64 {
    q.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn lipschitz<M: PsdMap>(map: &M) -> f64 {
    let mut q: Vec<CMatrix> = map
        .block_sizes()
        .iter()
        .map(|&s| {
            CMatrix::from_fn(s, s, |i, j| {
                let x = 1.0 + ((i * 7 + j * 13) % 5) as f64 * 0.1;
                num_complex::Complex64::new(x, if i < j { 0.3 } else if i > j { -0.3 } else { 0.0 })
            })
        })
        .collect();
    let mut est = 0.0;
    for _ in 0..30 {
        let n = block_norm(&q);
        if n == 0.0 {
            return 1.0;
        }
        q.iter_mut().for_each(|m| *m /= num_complex::Complex64::new(n, 0.0));
        q = map.adjoint(&map.apply(&q));
        est = block_norm(&q);
    }
    est.max(1e-12) * 1.05
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Projects `target` onto `A(Psd × … × Psd)`; stops once the residual is at
/// most `tol` or after `max_iter` steps.
pub(crate) fn project<M: PsdMap>(map: &M, target: &[f64], tol: f64, max_iter: usize) -> FistaResult {
    let step = 1.0 / lipschitz(map);
    let mut x: Vec<CMatrix> = map.block_sizes().iter().map(|&s| CMatrix::zeros(s, s)).collect();
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fit = map.apply(&x);
    let mut res = norm(&sub(&fit, target));
    let mut iterations = 0;
    while iterations < max_iter && res > tol {
        iterations += 1;
        let grad = map.adjoint(&sub(&map.apply(&y), target));
        let x_new: Vec<CMatrix> = y
            .iter()
            .zip(&grad)
            .map(|(yb, gb)| {
                HermElement::symmetrized(yb - gb * num_complex::Complex64::new(step, 0.0))
                    .psd_part()
                    .into_matrix()
            })
            .collect();
        let fit_new = map.apply(&x_new);
        let res_new = norm(&sub(&fit_new, target));
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        if res_new > res {
            // adaptive restart
            t = 1.0;
            y = x_new.clone();
        } else {
            let beta = num_complex::Complex64::new((t - 1.0) / t_new, 0.0);
            y = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| a + (a - b) * beta)
                .collect();
            t = t_new;
        }
        x = x_new;
        fit = fit_new;
        res = res_new;
    }
    FistaResult {
        q: x,
        fit,
        residual: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Identity on a single 2×2 block, in coordinates.
    struct Ident;
    impl PsdMap for Ident {
        fn block_sizes(&self) -> Vec<usize> {
            vec![2]
        }
        fn apply(&self, q: &[CMatrix]) -> Vec<f64> {
            HermElement::symmetrized(q[0].clone()).coords()
        }
        fn adjoint(&self, r: &[f64]) -> Vec<CMatrix> {
            vec![HermElement::from_coords(2, r).unwrap().into_matrix()]
        }
    }

    #[test]
    fn projection_onto_psd_clips() {
        let target = HermElement::diag(&[1.0, -1.0]).coords();
        let r = project(&Ident, &target, 1e-12, 500);
        assert!((r.residual - 1.0).abs() < 1e-9);
        let want = HermElement::diag(&[1.0, 0.0]).coords();
        assert!(norm(&sub(&r.fit, &want)) < 1e-9);
    }

    #[test]
    fn members_reach_zero_residual() {
        let target = HermElement::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap().coords();
        let r = project(&Ident, &target, 1e-12, 500);
        assert!(r.residual <= 1e-12);
    }
}
