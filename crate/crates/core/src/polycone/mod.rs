//! Polyhedral cones with exact generator (V) and facet (H) representations.
//!
//! Duality is taken with respect to the standard inner product on `R^n`:
//! `C^∨ = {y : <y, c> >= 0 for all c in C}`. Facets are stored as inner
//! normals, so swapping the two representations dualizes a cone.

mod dd;
mod project;

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ratlin::{
    dot_int, dot_mixed, primitive, primitive_int, rank_int, IntVec, Rational,
    RationalLiteral,
};

pub use project::{nnls, project_onto_cone, selfdual_residual, ConeProjector, NnlsSolution};

/// Both representations after double description, each irredundant.
#[derive(Clone, Debug)]
struct Converted {
    /// Extreme rays of the pointed part (orthogonal to `lineality`).
    rays: Vec<IntVec>,
    lineality: Vec<IntVec>,
    /// Irredundant facet normals (orthogonal to `equations`).
    facets: Vec<IntVec>,
    /// Basis of the orthogonal complement of the span.
    equations: Vec<IntVec>,
}

impl Converted {
    fn swapped(&self) -> Converted {
        Converted {
            rays: self.facets.clone(),
            lineality: self.equations.clone(),
            facets: self.rays.clone(),
            equations: self.lineality.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropernessReport {
    pub is_closed: bool,
    pub is_sharp: bool,
    pub is_full_dimensional: bool,
    pub is_proper: bool,
}

#[derive(Clone, Debug)]
pub struct PolyCone {
    dim: usize,
    generators: Option<Vec<IntVec>>,
    facets: Option<Vec<IntVec>>,
    converted: OnceLock<Arc<Converted>>,
}

fn clean(dim: usize, vs: Vec<IntVec>) -> Result<Vec<IntVec>> {
    let mut out = Vec::with_capacity(vs.len());
    for v in vs {
        check_dim(dim, v.len())?;
        if v.iter().all(Zero::is_zero) {
            continue;
        }
        out.push(primitive_int(v));
    }
    Ok(out)
}

fn with_negations(base: &[IntVec], lin: &[IntVec]) -> Vec<IntVec> {
    let mut out = base.to_vec();
    for l in lin {
        out.push(l.clone());
        out.push(l.iter().map(|x| -x).collect());
    }
    out
}

impl PolyCone {
    pub fn from_generators(dim: usize, generators: Vec<IntVec>) -> Result<Self> {
        Ok(Self {
            dim,
            generators: Some(clean(dim, generators)?),
            facets: None,
            converted: OnceLock::new(),
        })
    }

    pub fn from_facets(dim: usize, facets: Vec<IntVec>) -> Result<Self> {
        Ok(Self {
            dim,
            generators: None,
            facets: Some(clean(dim, facets)?),
            converted: OnceLock::new(),
        })
    }

    /// Both representations supplied; every generator must satisfy every facet.
    pub fn from_both(dim: usize, generators: Vec<IntVec>, facets: Vec<IntVec>) -> Result<Self> {
        let generators = clean(dim, generators)?;
        let facets = clean(dim, facets)?;
        for (i, f) in facets.iter().enumerate() {
            for (j, g) in generators.iter().enumerate() {
                if dot_int(f, g).is_negative() {
                    return Err(Error::Precondition(format!(
                        "generator {j} violates facet {i}"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            generators: Some(generators),
            facets: Some(facets),
            converted: OnceLock::new(),
        })
    }

    pub fn from_rational_generators(dim: usize, generators: &[Vec<Rational>]) -> Result<Self> {
        Self::from_generators(dim, generators.iter().map(|g| primitive(g)).collect())
    }

    pub fn from_i64_generators(dim: usize, generators: &[&[i64]]) -> Self {
        let gens = generators
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_generators(dim, gens).expect("generator length")
    }

    pub fn from_i64_facets(dim: usize, facets: &[&[i64]]) -> Self {
        let fs = facets
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_facets(dim, fs).expect("facet length")
    }

    /// The nonnegative orthant `R^n_{>=0}`.
    pub fn orthant(n: usize) -> Self {
        let basis: Vec<IntVec> = (0..n)
            .map(|i| {
                let mut e = vec![BigInt::zero(); n];
                e[i] = BigInt::from(1);
                e
            })
            .collect();
        Self::from_both(n, basis.clone(), basis).expect("orthant")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Generators as stored (possibly redundant), if present.
    pub fn stored_generators(&self) -> Option<&[IntVec]> {
        self.generators.as_deref()
    }

    pub fn stored_facets(&self) -> Option<&[IntVec]> {
        self.facets.as_deref()
    }

    fn converted(&self) -> &Converted {
        self.converted.get_or_init(|| {
            let c = if let Some(g) = &self.generators {
                let h = dd::enumerate(g, self.dim);
                let v = dd::irredundant(g, &h, self.dim);
                Converted {
                    rays: v.rays,
                    lineality: v.lineality,
                    facets: h.rays,
                    equations: h.lineality,
                }
            } else {
                let f = self.facets.as_deref().unwrap_or(&[]);
                let v = dd::enumerate(f, self.dim);
                let h = dd::irredundant(f, &v, self.dim);
                Converted {
                    rays: v.rays,
                    lineality: v.lineality,
                    facets: h.rays,
                    equations: h.lineality,
                }
            };
            Arc::new(c)
        })
    }

    /// Returns the cone with both representations populated and irredundant.
    pub fn dd_convert(&self) -> PolyCone {
        let c = self.converted().clone();
        let generators = with_negations(&c.rays, &c.lineality);
        let facets = with_negations(&c.facets, &c.equations);
        let out = PolyCone {
            dim: self.dim,
            generators: Some(generators),
            facets: Some(facets),
            converted: OnceLock::new(),
        };
        let _ = out.converted.set(Arc::new(c));
        out
    }

    /// Extreme rays of the pointed part.
    pub fn extreme_rays(&self) -> &[IntVec] {
        &self.converted().rays
    }

    pub fn lineality_basis(&self) -> &[IntVec] {
        &self.converted().lineality
    }

    /// Irredundant facet normals.
    pub fn irredundant_facets(&self) -> &[IntVec] {
        &self.converted().facets
    }

    pub fn equations(&self) -> &[IntVec] {
        &self.converted().equations
    }

    /// A generating set: stored generators when present, else computed ones.
    pub fn generators(&self) -> Vec<IntVec> {
        match &self.generators {
            Some(g) => g.clone(),
            None => {
                let c = self.converted();
                with_negations(&c.rays, &c.lineality)
            }
        }
    }

    /// A defining facet set: stored facets when present, else computed ones.
    pub fn facets(&self) -> Vec<IntVec> {
        match &self.facets {
            Some(f) => f.clone(),
            None => {
                let c = self.converted();
                with_negations(&c.facets, &c.equations)
            }
        }
    }

    /// `C^∨`, by exchanging the two representations.
    pub fn dual(&self) -> PolyCone {
        let out = PolyCone {
            dim: self.dim,
            generators: self.facets.clone(),
            facets: self.generators.clone(),
            converted: OnceLock::new(),
        };
        if let Some(c) = self.converted.get() {
            let _ = out.converted.set(Arc::new(c.swapped()));
        }
        out
    }

    pub fn member(&self, v: &[Rational]) -> Result<bool> {
        check_dim(self.dim, v.len())?;
        let hit = |fs: &[IntVec]| fs.iter().all(|f| !dot_mixed(f, v).is_negative());
        if let Some(f) = &self.facets {
            return Ok(hit(f));
        }
        let c = self.converted();
        Ok(hit(&c.facets) && c.equations.iter().all(|e| dot_mixed(e, v).is_zero()))
    }

    pub fn member_int(&self, v: &[BigInt]) -> Result<bool> {
        check_dim(self.dim, v.len())?;
        let hit = |fs: &[IntVec]| fs.iter().all(|f| !dot_int(f, v).is_negative());
        if let Some(f) = &self.facets {
            return Ok(hit(f));
        }
        let c = self.converted();
        Ok(hit(&c.facets) && c.equations.iter().all(|e| dot_int(e, v).is_zero()))
    }

    pub fn properness(&self) -> PropernessReport {
        let c = self.converted();
        let is_sharp = c.lineality.is_empty();
        let is_full_dimensional = c.equations.is_empty();
        debug_assert_eq!(
            is_full_dimensional,
            rank_int(&with_negations(&c.rays, &c.lineality), self.dim) == self.dim
        );
        PropernessReport {
            is_closed: true,
            is_sharp,
            is_full_dimensional,
            is_proper: is_sharp && is_full_dimensional,
        }
    }

    pub fn is_proper(&self) -> bool {
        self.properness().is_proper
    }

    pub fn require_proper(&self, what: &str) -> Result<()> {
        let p = self.properness();
        if p.is_proper {
            Ok(())
        } else {
            Err(Error::NotProper(format!(
                "{what}: sharp={}, full-dimensional={}",
                p.is_sharp, p.is_full_dimensional
            )))
        }
    }

    /// Cone generated by the union of generators.
    pub fn sum(&self, other: &PolyCone) -> Result<PolyCone> {
        check_dim(self.dim, other.dim)?;
        let mut g = self.generators();
        g.extend(other.generators());
        PolyCone::from_generators(self.dim, g)
    }

    /// Cone cut out by the union of facets.
    pub fn intersect(&self, other: &PolyCone) -> Result<PolyCone> {
        check_dim(self.dim, other.dim)?;
        let mut f = self.facets();
        f.extend(other.facets());
        PolyCone::from_facets(self.dim, f)
    }

    /// `self ⊆ other`, decided on generators of `self`.
    pub fn subset_of(&self, other: &PolyCone) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        for g in self.generators() {
            if !other.member_int(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact set equality by mutual containment.
    pub fn same_cone(&self, other: &PolyCone) -> Result<bool> {
        Ok(self.subset_of(other)? && other.subset_of(self)?)
    }

    /// Linear image `{M c : c in C}` for an integer matrix given by rows.
    pub fn image(&self, rows: &[IntVec]) -> Result<PolyCone> {
        for r in rows {
            check_dim(self.dim, r.len())?;
        }
        let gens = self
            .generators()
            .iter()
            .map(|g| rows.iter().map(|r| dot_int(r, g)).collect())
            .collect();
        PolyCone::from_generators(rows.len(), gens)
    }
}

/// JSON form: `{"dim": n, "generators": [["p/q", ...], ...], "facets": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyConeJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<RationalLiteral>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<RationalLiteral>>>,
}

fn to_literals(vs: &[IntVec]) -> Vec<Vec<RationalLiteral>> {
    vs.iter()
        .map(|v| {
            v.iter()
                .map(|x| RationalLiteral(Rational::from_integer(x.clone())))
                .collect()
        })
        .collect()
}

fn from_literals(vs: &[Vec<RationalLiteral>]) -> Vec<IntVec> {
    vs.iter()
        .map(|v| {
            let r: Vec<Rational> = v.iter().map(|x| x.0.clone()).collect();
            primitive(&r)
        })
        .collect()
}

impl PolyConeJson {
    pub fn into_cone(self) -> Result<PolyCone> {
        match (self.generators, self.facets) {
            (Some(g), Some(f)) => PolyCone::from_both(self.dim, from_literals(&g), from_literals(&f)),
            (Some(g), None) => PolyCone::from_generators(self.dim, from_literals(&g)),
            (None, Some(f)) => PolyCone::from_facets(self.dim, from_literals(&f)),
            (None, None) => Err(Error::Parse(
                "cone needs \"generators\" or \"facets\"".into(),
            )),
        }
    }
}

impl From<&PolyCone> for PolyConeJson {
    fn from(c: &PolyCone) -> Self {
        PolyConeJson {
            dim: c.dim,
            generators: c.generators.as_deref().map(to_literals),
            facets: c.facets.as_deref().map(to_literals),
        }
    }
}

impl Serialize for PolyCone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyConeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyCone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PolyConeJson::deserialize(d)?
            .into_cone()
            .map_err(serde::de::Error::custom)
    }
}
