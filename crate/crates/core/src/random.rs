//! Seeded generators of random test instances.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::opsys::{HermElement, OperatorSystem, SystemElement};
use crate::polycone::PolyCone;
use crate::ratlin::{primitive, rank_int, IntVec, Rational, RationalMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_int_vec<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> IntVec {
    (0..dim)
        .map(|_| BigInt::from(rng.random_range(-bound..=bound)))
        .collect()
}

/// Random proper cone with `dim <= ngens` generators, all in the open
/// halfspace `sum(y) > 0`.
pub fn random_proper_cone<R: Rng>(rng: &mut R, dim: usize, ngens: usize, bound: i64) -> PolyCone {
    let ngens = ngens.max(dim);
    loop {
        let mut gens = Vec::with_capacity(ngens);
        while gens.len() < ngens {
            let mut v = random_int_vec(rng, dim, bound);
            let s: BigInt = v.iter().sum();
            if s.is_zero() {
                continue;
            }
            if s < BigInt::zero() {
                v.iter_mut().for_each(|x| *x = -&*x);
            }
            gens.push(v);
        }
        if rank_int(&gens, dim) == dim {
            return PolyCone::from_generators(dim, gens).expect("dims agree");
        }
    }
}

/// Random rational orthogonal matrix via the Cayley transform of a skew matrix.
pub fn random_rational_orthogonal<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> RationalMatrix {
    let mut s = RationalMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let x = Rational::from_integer(BigInt::from(rng.random_range(-bound..=bound)));
            s.set(i, j, x.clone());
            s.set(j, i, -x);
        }
    }
    let mut minus = RationalMatrix::identity(dim);
    let mut plus = RationalMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = s.get(i, j).clone();
            minus.set(i, j, minus.get(i, j) - &v);
            plus.set(i, j, plus.get(i, j) + &v);
        }
    }
    // Q = (I - S)(I + S)^{-1}; I + S is invertible for skew S.
    let mut inv = RationalMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut e = vec![Rational::zero(); dim];
        e[c] = Rational::one();
        let col = crate::ratlin::solve_linear(&plus, &e)
            .expect("square")
            .expect("I + S invertible");
        for (r, v) in col.into_iter().enumerate() {
            inv.set(r, c, v);
        }
    }
    minus.mul(&inv).expect("square")
}

/// Random proper cone with pairwise nonnegative generator inner products,
/// so `C ⊆ C^∨`. Generators lie near the diagonal direction (a thin cone)
/// and are then rotated by a random rational orthogonal matrix.
pub fn random_subdual_cone<R: Rng>(rng: &mut R, dim: usize, ngens: usize, spread: i64) -> PolyCone {
    let ngens = ngens.max(dim);
    let q = random_rational_orthogonal(rng, dim, 2);
    loop {
        let gens: Vec<IntVec> = (0..ngens)
            .map(|_| {
                (0..dim)
                    .map(|_| BigInt::from(spread + rng.random_range(1..=spread)))
                    .collect()
            })
            .collect();
        if rank_int(&gens, dim) < dim {
            continue;
        }
        let rotated: Vec<IntVec> = gens
            .iter()
            .map(|g| primitive(&q.mul_int_vec(g).expect("square")))
            .collect();
        return PolyCone::from_generators(dim, rotated).expect("dims agree");
    }
}

/// Random positive map `from -> to` as integer rows: `sum N_ab t_a f_b^T`
/// with `N >= 0`, `t_a` generators of `to` and `f_b` facets of `from`.
pub fn random_positive_map<R: Rng>(rng: &mut R, from: &PolyCone, to: &PolyCone, bound: i64) -> Vec<IntVec> {
    let tg = to.generators();
    let ff = from.facets();
    let mut m = vec![vec![BigInt::zero(); from.dim()]; to.dim()];
    for t in &tg {
        for f in &ff {
            let n = BigInt::from(rng.random_range(0..=bound));
            if n.is_zero() {
                continue;
            }
            for (i, ti) in t.iter().enumerate() {
                for (j, fj) in f.iter().enumerate() {
                    m[i][j] += &n * ti * fj;
                }
            }
        }
    }
    m
}

/// Generated subsystem of the `k × k` matrix system with `count` random
/// psd generators at level `n`; lies inside its own dual.
pub fn random_subdual_system<R: Rng>(rng: &mut R, n: usize, k: usize, count: usize) -> OperatorSystem {
    let gens: Vec<SystemElement> = (0..count.max(1))
        .map(|_| {
            let rank = rng.random_range(1..=n * k);
            SystemElement::from_matrix(&HermElement::random_psd(rng, n * k, rank), n, k).expect("sizes agree")
        })
        .collect();
    OperatorSystem::generated(k * k, gens).expect("psd generators give a proper system")
}
