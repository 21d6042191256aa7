//! Exact rational arithmetic and the small amount of linear algebra the
//! polyhedral engine needs.
//!
//! Scalars are `num_rational::BigRational`, which keeps every value in
//! canonical form (positive denominator, reduced). Elimination uses full
//! pivoting and never consults a tolerance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{check_dim, Error, Result};

pub type Rational = num_rational::BigRational;

/// Integer vector used for rays and facet normals.
pub type IntVec = Vec<BigInt>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn int_vec(v: &[i64]) -> IntVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let r: Rational = t
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational literal {t:?}")))?;
    Ok(r)
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // very large numerator/denominator pairs: scale down by bits
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 900).max(0) as u64;
        let nn = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let dd = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        nn / dd
    })
}

pub fn int_to_f64(x: &BigInt) -> f64 {
    to_f64(&Rational::from_integer(x.clone()))
}

/// Best rational approximation with denominator at most `max_den`.
pub fn from_f64_approx(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut a = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let max_den = BigInt::from(max_den);
    for _ in 0..64 {
        let fl = a.floor();
        let ai = BigInt::from(fl as i128);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = a - fl;
        if frac < 1e-18 {
            break;
        }
        a = 1.0 / frac;
    }
    if q1.is_zero() {
        return Rational::zero();
    }
    let r = Rational::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Inner product of an integer vector with a rational vector.
pub fn dot_mixed(a: &[BigInt], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + y * x)
}

/// Clears denominators and divides out the content. The zero vector maps to itself.
pub fn primitive(v: &[Rational]) -> IntVec {
    let l = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: IntVec = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    primitive_int(ints)
}

pub fn primitive_int(mut v: IntVec) -> IntVec {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn to_rat_vec(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

pub fn to_f64_vec(v: &[BigInt]) -> Vec<f64> {
    v.iter().map(int_to_f64).collect()
}

/// Kronecker product of vectors; index of `a[i] * b[j]` is `i * b.len() + j`.
pub fn kron_int(a: &[BigInt], b: &[BigInt]) -> IntVec {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        check_dim(rows * cols, entries.len())?;
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            entries.extend(r.iter().cloned());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<Rational>> = rows.iter().map(|r| rat_vec(r)).collect();
        Self::from_rows(&v).expect("ragged rows")
    }

    /// Matrix whose rows are the given integer vectors, with `cols` columns.
    pub fn from_int_rows(rows: &[IntVec], cols: usize) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged integer rows");
            entries.extend(r.iter().map(|x| Rational::from_integer(x.clone())));
        }
        Self {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    pub fn mul_int_vec(&self, v: &[BigInt]) -> Result<Vec<Rational>> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|r| dot_mixed(v, self.row(r))).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.entries[idx] = &out.entries[idx] + a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product, row-major block layout.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(to_f64).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate(None).len()
    }

    /// Gauss-Jordan elimination with full pivoting. Returns `(row, col)` pivot
    /// positions; `rhs` receives the same row operations.
    fn eliminate(&mut self, mut rhs: Option<&mut Vec<Rational>>) -> Vec<(usize, usize)> {
        let mut pivots = Vec::new();
        let mut col_used = vec![false; self.cols];
        let mut r = 0;
        while r < self.rows {
            // Pick the nonzero entry of smallest bit height among the
            // unreduced block to limit coefficient growth.
            let mut best: Option<(usize, usize, u64)> = None;
            for i in r..self.rows {
                for (j, used) in col_used.iter().enumerate() {
                    if *used {
                        continue;
                    }
                    let v = self.get(i, j);
                    if v.is_zero() {
                        continue;
                    }
                    let h = v.numer().bits() + v.denom().bits();
                    if best.is_none_or(|(_, _, bh)| h < bh) {
                        best = Some((i, j, h));
                    }
                }
            }
            let Some((pi, pj, _)) = best else { break };
            if pi != r {
                for c in 0..self.cols {
                    self.entries.swap(r * self.cols + c, pi * self.cols + c);
                }
                if let Some(b) = rhs.as_deref_mut() {
                    b.swap(r, pi);
                }
            }
            let inv = self.get(r, pj).recip();
            for c in 0..self.cols {
                let idx = r * self.cols + c;
                self.entries[idx] = &self.entries[idx] * &inv;
            }
            if let Some(b) = rhs.as_deref_mut() {
                b[r] = &b[r] * &inv;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, pj).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..self.cols {
                    let sub = &f * self.get(r, c);
                    let idx = i * self.cols + c;
                    self.entries[idx] = &self.entries[idx] - sub;
                }
                if let Some(b) = rhs.as_deref_mut() {
                    let sub = &f * &b[r];
                    b[i] = &b[i] - sub;
                }
            }
            col_used[pj] = true;
            pivots.push((r, pj));
            r += 1;
        }
        pivots
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Solves `a x = b` exactly. Returns `None` when the system is inconsistent;
/// free variables are set to zero.
pub fn solve_linear(a: &RationalMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    check_dim(a.rows, b.len())?;
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let pivots = work.eliminate(Some(&mut rhs));
    if rhs[pivots.len()..].iter().any(|v| !v.is_zero()) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); a.cols];
    for &(r, c) in &pivots {
        x[c] = rhs[r].clone();
    }
    Ok(Some(x))
}

/// Basis of the null space of `a`.
pub fn kernel_basis(a: &RationalMatrix) -> Vec<Vec<Rational>> {
    let mut work = a.clone();
    let pivots = work.eliminate(None);
    let mut pivot_of_col = vec![None; a.cols];
    for &(r, c) in &pivots {
        pivot_of_col[c] = Some(r);
    }
    let mut basis = Vec::new();
    for free in 0..a.cols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Rational::zero(); a.cols];
        v[free] = Rational::one();
        for &(r, c) in &pivots {
            v[c] = -work.get(r, free).clone();
        }
        basis.push(v);
    }
    basis
}

/// Nonzero rows of the reduced row echelon form, pivoting on the leftmost
/// available column. Unique for a given row space.
pub fn row_space_rref(a: &RationalMatrix) -> Vec<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = (0..a.rows).map(|r| a.row(r).to_vec()).collect();
    let mut out_rows = 0;
    for c in 0..a.cols {
        let Some(p) = (out_rows..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(out_rows, p);
        let inv = rows[out_rows][c].recip();
        for x in rows[out_rows].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = rows[out_rows].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == out_rows || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, pv) in row.iter_mut().zip(&pivot) {
                *x = &*x - &f * pv;
            }
        }
        out_rows += 1;
        if out_rows == rows.len() {
            break;
        }
    }
    rows.truncate(out_rows);
    rows
}

/// Rank of a set of integer vectors of length `dim`.
pub fn rank_int(vectors: &[IntVec], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    RationalMatrix::from_int_rows(vectors, dim).rank()
}

pub fn max_abs_entry(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_default()
}

/// Serde adapter: rational vectors as lists of `"p/q"` strings.
pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let strs: Vec<RationalLiteral> = Vec::deserialize(d)?;
        Ok(strs.into_iter().map(|r| r.0).collect())
    }
}

/// A rational that serializes as a string and also accepts bare JSON integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalLiteral(pub Rational);

impl Serialize for RationalLiteral {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse_rational(&s)
                .map(RationalLiteral)
                .map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(RationalLiteral(int(i))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity() {
        let a = RationalMatrix::identity(2);
        let x = solve_linear(&a, &rat_vec(&[1, 2])).unwrap().unwrap();
        assert_eq!(x, rat_vec(&[1, 2]));
    }

    #[test]
    fn solve_inconsistent() {
        let a = RationalMatrix::from_i64_rows(&[&[1, 1], &[1, 1]]);
        assert_eq!(solve_linear(&a, &rat_vec(&[1, 0])).unwrap(), None);
    }

    #[test]
    fn solve_diagonal() {
        let a = RationalMatrix::from_i64_rows(&[&[2, 0], &[0, 3]]);
        let x = solve_linear(&a, &rat_vec(&[1, 1])).unwrap().unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 3)]);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = RationalMatrix::identity(2);
        assert!(matches!(
            solve_linear(&a, &rat_vec(&[1, 2, 3])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&RationalMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&RationalMatrix::zeros(1, 2)).len(), 2);
        let k = kernel_basis(&RationalMatrix::from_i64_rows(&[&[1, -1]]));
        assert_eq!(k.len(), 1);
        assert_eq!(primitive(&k[0]), int_vec(&[1, 1]));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
        assert_eq!(format_rational(&int(5)), "5");
        assert_eq!(parse_rational("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert!(parse_rational("1/0x").is_err());
    }

    #[test]
    fn primitive_normalization() {
        assert_eq!(primitive(&[rat(1, 2), rat(3, 4)]), int_vec(&[2, 3]));
        assert_eq!(primitive(&[int(-4), int(6)]), int_vec(&[-2, 3]));
        assert_eq!(primitive(&[int(0), int(0)]), int_vec(&[0, 0]));
    }

    #[test]
    fn approx_rational() {
        assert_eq!(from_f64_approx(0.75, 100), rat(3, 4));
        assert_eq!(from_f64_approx(-0.5, 100), rat(-1, 2));
        let r = from_f64_approx(std::f64::consts::PI, 1000);
        assert!((to_f64(&r) - std::f64::consts::PI).abs() < 1e-6);
    }
}
