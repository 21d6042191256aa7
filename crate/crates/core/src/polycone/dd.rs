//! Double description with incremental constraint insertion.
//!
//! `enumerate` returns generators of `{y : <a, y> >= 0 for all a}` as a
//! pointed part (extreme rays, orthogonal to the lineality space) plus a
//! canonical lineality basis. Applied to a generator list it yields facets
//! and implicit equations of the generated cone, since that cone's dual is
//! cut out by the generators.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ratlin::{
    dot_int, kernel_basis, primitive, primitive_int, row_space_rref, IntVec, Rational,
    RationalMatrix,
};

#[derive(Clone, Debug, Default)]
pub(crate) struct Enumerated {
    pub rays: Vec<IntVec>,
    pub lineality: Vec<IntVec>,
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.0.len() {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn subset_of(&self, other: &Bits) -> bool {
        self.0
            .iter()
            .zip(other.0.iter().chain(std::iter::repeat(&0)))
            .all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: IntVec,
    zeros: Bits,
}

pub(crate) fn enumerate(constraints: &[IntVec], dim: usize) -> Enumerated {
    // lexicographic insertion order keeps intermediate ray counts down
    let mut constraints: Vec<IntVec> = constraints.to_vec();
    constraints.sort();
    let constraints = &constraints[..];
    let m = constraints.len();
    let mut lin = identity_rows(dim);
    let mut rays: Vec<Ray> = Vec::new();

    for (ci, a) in constraints.iter().enumerate() {
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        // Lineality phase: split off a lineality direction not orthogonal to `a`.
        let pick = lin
            .iter()
            .enumerate()
            .map(|(i, l)| (i, dot_int(a, l)))
            .filter(|(_, s)| !s.is_zero())
            .min_by_key(|(_, s)| s.abs());
        if let Some((k, s)) = pick {
            let mut l = lin.remove(k);
            let mut s = s;
            if s.is_negative() {
                l.iter_mut().for_each(|x| *x = -&*x);
                s = -s;
            }
            for other in lin.iter_mut() {
                let t = dot_int(a, other);
                if !t.is_zero() {
                    let combined: IntVec = other
                        .iter()
                        .zip(&l)
                        .map(|(o, li)| &s * o - &t * li)
                        .collect();
                    *other = primitive_int(combined);
                }
            }
            for r in rays.iter_mut() {
                let t = dot_int(a, &r.v);
                if !t.is_zero() {
                    let combined: IntVec =
                        r.v.iter().zip(&l).map(|(o, li)| &s * o - &t * li).collect();
                    r.v = primitive_int(combined);
                }
                r.zeros.set(ci);
            }
            // `l` is orthogonal to every earlier constraint.
            let mut zeros = Bits::new(m);
            for (cj, c) in constraints[..ci].iter().enumerate() {
                if dot_int(c, &l).is_zero() {
                    zeros.set(cj);
                }
            }
            rays.push(Ray {
                v: primitive_int(l),
                zeros,
            });
            continue;
        }

        // Ray phase.
        let vals: Vec<BigInt> = rays.iter().map(|r| dot_int(a, &r.v)).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.zeros.set(ci);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let eff_dim = dim - lin.len();
        let need = eff_dim.saturating_sub(2) as u32;

        let mut created: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() < need {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || !common.subset_of(&r.zeros));
                if !adjacent {
                    continue;
                }
                let vp = &vals[p];
                let vn = -&vals[n];
                let combined: IntVec = rays[p]
                    .v
                    .iter()
                    .zip(&rays[n].v)
                    .map(|(x, y)| vp * y + &vn * x)
                    .collect();
                let mut zeros = common;
                zeros.set(ci);
                created.push(Ray {
                    v: primitive_int(combined),
                    zeros,
                });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (r, v) in rays.into_iter().zip(&vals) {
            if v.is_negative() {
                continue;
            }
            let mut r = r;
            if v.is_zero() {
                r.zeros.set(ci);
            }
            kept.push(r);
        }
        kept.extend(created);
        rays = kept;
    }

    let lineality = canonical_basis(&lin, dim);
    let mut out: Vec<IntVec> = rays
        .into_iter()
        .map(|r| project_out(&r.v, &lineality, dim))
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    out.sort();
    out.dedup();
    Enumerated {
        rays: out,
        lineality,
    }
}

/// Extreme rays and lineality of `cone(gens)` given its dual description
/// `dual` (facets in `rays`, equations in `lineality`). A generator is
/// extreme when no other generator is tight on a superset of its facets.
pub(crate) fn irredundant(gens: &[IntVec], dual: &Enumerated, dim: usize) -> Enumerated {
    let normals: Vec<IntVec> = dual.rays.iter().chain(&dual.lineality).cloned().collect();
    let lineality = if normals.is_empty() {
        canonical_basis(&identity_rows(dim), dim)
    } else {
        let kernel: Vec<IntVec> = kernel_basis(&RationalMatrix::from_int_rows(&normals, dim))
            .iter()
            .map(|v| primitive(v))
            .collect();
        canonical_basis(&kernel, dim)
    };
    let mut cands: Vec<IntVec> = gens
        .iter()
        .map(|g| project_out(g, &lineality, dim))
        .filter(|p| p.iter().any(|x| !x.is_zero()))
        .collect();
    cands.sort();
    cands.dedup();
    let zeros: Vec<Bits> = cands
        .iter()
        .map(|p| {
            let mut z = Bits::new(dual.rays.len());
            for (i, f) in dual.rays.iter().enumerate() {
                if dot_int(f, p).is_zero() {
                    z.set(i);
                }
            }
            z
        })
        .collect();
    let rays = cands
        .iter()
        .enumerate()
        .filter(|&(i, _)| (0..cands.len()).all(|j| j == i || !zeros[i].subset_of(&zeros[j])))
        .map(|(_, p)| p.clone())
        .collect();
    Enumerated { rays, lineality }
}

fn identity_rows(dim: usize) -> Vec<IntVec> {
    (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::one();
            e
        })
        .collect()
}

/// Primitive integer basis of the row space in reduced echelon form, so the
/// same subspace always yields the same basis.
pub(crate) fn canonical_basis(vectors: &[IntVec], dim: usize) -> Vec<IntVec> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = RationalMatrix::from_int_rows(vectors, dim);
    row_space_rref(&m).iter().map(|v| primitive(v)).collect()
}

/// Orthogonal projection of `v` onto the complement of span(`basis`), made primitive.
pub(crate) fn project_out(v: &[BigInt], basis: &[IntVec], dim: usize) -> IntVec {
    if basis.is_empty() {
        return v.to_vec();
    }
    // Solve (B B^T) c = B v, then v - B^T c.
    let b = RationalMatrix::from_int_rows(basis, dim);
    let gram = b.mul(&b.transpose()).expect("gram");
    let rhs: Vec<Rational> = basis.iter().map(|row| Rational::from_integer(dot_int(row, v))).collect();
    let c = crate::ratlin::solve_linear(&gram, &rhs)
        .expect("gram dims")
        .expect("gram of a basis is invertible");
    let mut out: Vec<Rational> = v.iter().map(|x| Rational::from_integer(x.clone())).collect();
    for (ci, row) in c.iter().zip(basis) {
        for (o, r) in out.iter_mut().zip(row) {
            *o -= ci * Rational::from_integer(r.clone());
        }
    }
    primitive(&out)
}
