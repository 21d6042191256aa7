//! Tensor products built from finite realization families.
//!
//! A family `{(D_i, E_i, n_i, x_i)}` defines `G ⊗ H` as the set of `a` with
//! `x_i ⊗ a ∈ (D_i ⊗min G) ⊗max (E_i ⊗min H) ⊗max Psd_{n_i n}` for all `i`.
//! For polyhedral cones (`n_i = 1`) this is decided exactly by pulling the
//! facets of the outer maximal product back along `x_i`. For operator
//! systems it reduces to positivity of one matrix on product vectors.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conetensor::{self, max_tensor, min_tensor, TensorKind};
use crate::error::{check_dim, Error, Result};
use crate::opsys::{
    block_diag, max_tensor_sys, min_tensor_sys, multipartite_positive_check, random_cmatrix, HermElement,
    OperatorSystem, SystemElement, SystemForm, Tag, Verdict,
};
use crate::polycone::PolyCone;
use crate::ratlin::{dot_mixed, primitive, serde_rational_vec, IntVec, Rational, RationalMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stem {
    Simplex,
    Operator,
}

#[derive(Clone, Debug)]
pub enum FamilyEntry {
    /// `x ∈ V ⊗ W` at level 1.
    Simplex { d: PolyCone, e: PolyCone, x: Vec<Rational> },
    /// `x ∈ V ⊗ W ⊗ Her_n`, `n = x.level()`.
    Operator {
        d: OperatorSystem,
        e: OperatorSystem,
        x: SystemElement,
    },
}

impl FamilyEntry {
    pub fn stem(&self) -> Stem {
        match self {
            FamilyEntry::Simplex { .. } => Stem::Simplex,
            FamilyEntry::Operator { .. } => Stem::Operator,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            FamilyEntry::Simplex { .. } => 1,
            FamilyEntry::Operator { x, .. } => x.level(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorFamily {
    stem: Stem,
    entries: Vec<FamilyEntry>,
}

impl TensorFamily {
    pub fn stem(&self) -> Stem {
        self.stem
    }

    pub fn entries(&self) -> &[FamilyEntry] {
        &self.entries
    }
}

/// Search parameters for operator-stem verdicts.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 20,
            tol: 1e-9,
            seed: 0,
        }
    }
}

/// Matrices `B_c` with `S(1)^∨ = {(tr ρB_c)_c : ρ ⪰ 0}`.
fn level_one_dual(s: &OperatorSystem) -> Vec<HermElement> {
    match s.form() {
        SystemForm::Realized(m) => m.clone(),
        SystemForm::Generated(gens) => (0..s.space_dim())
            .map(|c| {
                let blocks: Vec<HermElement> = gens.iter().map(|g| g.coeffs()[c].clone()).collect();
                block_diag(&blocks)
            })
            .collect(),
    }
}

fn spans_all(m: &[HermElement]) -> bool {
    m.len() == m[0].n() * m[0].n()
}

/// Level-1 dual description of `D ⊗min G`. Two realized factors are used
/// directly when the minimal and maximal products agree (a one-dimensional
/// factor, or both spanning a full matrix space).
fn min_level_one_dual(d: &OperatorSystem, g: &OperatorSystem) -> Result<Vec<HermElement>> {
    if let (SystemForm::Realized(a), SystemForm::Realized(r)) = (d.form(), g.form()) {
        if a.len() == 1 || r.len() == 1 || (spans_all(a) && spans_all(r)) {
            let mut out = Vec::with_capacity(a.len() * r.len());
            for av in a {
                for rx in r {
                    out.push(av.kron(rx));
                }
            }
            return Ok(out);
        }
    }
    Ok(level_one_dual(&min_tensor_sys(d, g, 1)?))
}

/// `Σ B_{(v,x)} ⊗ C_{(w,y)} ⊗ X_{(v,w)} ⊗ A_{(x,y)}`.
fn triple_matrix(
    bs: &[HermElement],
    cs: &[HermElement],
    x: &SystemElement,
    a: &SystemElement,
    dims: [usize; 4],
) -> HermElement {
    let [dv, dw, dx, dy] = dims;
    let size = bs[0].n() * cs[0].n() * x.level() * a.level();
    let mut t = HermElement::zeros(size);
    for v in 0..dv {
        for w in 0..dw {
            let xv = &x.coeffs()[v * dw + w];
            if xv.norm() == 0.0 {
                continue;
            }
            for xi in 0..dx {
                for y in 0..dy {
                    let ay = &a.coeffs()[xi * dy + y];
                    if ay.norm() == 0.0 {
                        continue;
                    }
                    let term = bs[v * dx + xi].kron(&cs[w * dy + y]).kron(&xv.kron(ay));
                    t = t.add(&term);
                }
            }
        }
    }
    t
}

fn product_verdict(t: &HermElement, dims: &[usize], opts: &SearchOptions) -> Result<Verdict> {
    let tol = opts.tol * t.norm().max(1.0);
    multipartite_positive_check(t, dims, opts.restarts, tol, opts.seed)
}

fn simplex_sign_ok(d: &PolyCone, e: &PolyCone, x: &[Rational]) -> Result<bool> {
    let max = max_tensor(d, e)?;
    if max.member(x)? {
        return Ok(true);
    }
    let neg: Vec<Rational> = x.iter().map(|v| -v).collect();
    max.member(&neg)
}

fn operator_sign_ok(d: &OperatorSystem, e: &OperatorSystem, x: &SystemElement) -> Result<bool> {
    let bs = level_one_dual(d);
    let cs = level_one_dual(e);
    let one = SystemElement::scalars(&[1.0]);
    let dims = [d.space_dim(), e.space_dim(), 1, 1];
    let t = triple_matrix(&bs, &cs, x, &one, dims);
    let fdims = [bs[0].n(), cs[0].n(), x.level()];
    let opts = SearchOptions::default();
    if !product_verdict(&t, &fdims, &opts)?.is_out() {
        return Ok(true);
    }
    Ok(!product_verdict(&t.scale(-1.0), &fdims, &opts)?.is_out())
}

/// Validates a family: nonempty, one stem, proper factors, and every `x_i`
/// in `±(D_i(1) ⊗max E_i(1) ⊗max Psd_{n_i})`.
pub fn build_family(entries: Vec<FamilyEntry>, stem: Stem) -> Result<TensorFamily> {
    if entries.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for (i, entry) in entries.iter().enumerate() {
        if entry.stem() != stem {
            return Err(Error::Precondition(format!("entry {i} does not belong to the {stem:?} stem")));
        }
        let ok = match entry {
            FamilyEntry::Simplex { d, e, x } => {
                d.require_proper(&format!("family entry {i}: D"))?;
                e.require_proper(&format!("family entry {i}: E"))?;
                check_dim(d.dim() * e.dim(), x.len())?;
                simplex_sign_ok(d, e, x)?
            }
            FamilyEntry::Operator { d, e, x } => {
                d.require_proper(&format!("family entry {i}: D"))?;
                e.require_proper(&format!("family entry {i}: E"))?;
                check_dim(d.space_dim() * e.space_dim(), x.space_dim())?;
                operator_sign_ok(d, e, x)?
            }
        };
        if !ok {
            return Err(Error::SignConditionViolated { index: i });
        }
    }
    Ok(TensorFamily { stem, entries })
}

/// `{(R≥0, R≥0, 1, 1)}`, which reproduces the maximal product.
pub fn unit_family(stem: Stem) -> TensorFamily {
    let entry = match stem {
        Stem::Simplex => FamilyEntry::Simplex {
            d: PolyCone::orthant(1),
            e: PolyCone::orthant(1),
            x: vec![Rational::from_integer(1.into())],
        },
        Stem::Operator => FamilyEntry::Operator {
            d: OperatorSystem::trivial(),
            e: OperatorSystem::trivial(),
            x: SystemElement::scalars(&[1.0]),
        },
    };
    build_family(vec![entry], stem).expect("unit entry is valid")
}

#[derive(Clone, Debug)]
pub struct ConstructedProduct {
    id: String,
    family: TensorFamily,
    clamp_max: bool,
}

/// Result of [`contains_min_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinCheck {
    pub holds: bool,
    pub failing_entry: Option<usize>,
}

impl ConstructedProduct {
    /// `clamp_max` defaults to the outcome of [`contains_min_check`].
    pub fn new(family: TensorFamily) -> Self {
        let clamp_max = contains_min_check(&family).holds;
        ConstructedProduct {
            id: "family".into(),
            family,
            clamp_max,
        }
    }

    pub fn with_clamp(mut self, clamp_max: bool) -> Self {
        self.clamp_max = clamp_max;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn family(&self) -> &TensorFamily {
        &self.family
    }

    pub fn clamp_max(&self) -> bool {
        self.clamp_max
    }

    fn require_stem(&self, stem: Stem) -> Result<()> {
        if self.family.stem == stem {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "family has the {:?} stem, expected {stem:?}",
                self.family.stem
            )))
        }
    }

    /// Facet normals of `G ⊗ H`: every facet pair `(φ, ψ)` of
    /// `(D ⊗min G, E ⊗min H)` pulled back along `x`, plus the facets of
    /// `G ⊗max H` when clamped.
    pub fn facets(&self, g: &PolyCone, h: &PolyCone) -> Result<Vec<IntVec>> {
        self.require_stem(Stem::Simplex)?;
        let (dx, dy) = (g.dim(), h.dim());
        let mut out = Vec::new();
        for entry in &self.family.entries {
            let FamilyEntry::Simplex { d, e, x } = entry else {
                unreachable!()
            };
            let (dv, dw) = (d.dim(), e.dim());
            let phis = min_tensor(d, g)?.facets();
            let psis = min_tensor(e, h)?.facets();
            for phi in &phis {
                // u[w][xi] = Σ_v x[v,w] φ[v,xi]
                let mut u = vec![vec![Rational::zero(); dx]; dw];
                for v in 0..dv {
                    for w in 0..dw {
                        let xv = &x[v * dw + w];
                        if xv.is_zero() {
                            continue;
                        }
                        for xi in 0..dx {
                            let p = &phi[v * dx + xi];
                            if !p.is_zero() {
                                u[w][xi] += xv * Rational::from_integer(p.clone());
                            }
                        }
                    }
                }
                for psi in &psis {
                    let mut f = vec![Rational::zero(); dx * dy];
                    for (w, uw) in u.iter().enumerate() {
                        for (xi, uwx) in uw.iter().enumerate() {
                            if uwx.is_zero() {
                                continue;
                            }
                            for y in 0..dy {
                                let q = &psi[w * dy + y];
                                if !q.is_zero() {
                                    f[xi * dy + y] += uwx * Rational::from_integer(q.clone());
                                }
                            }
                        }
                    }
                    if f.iter().any(|v| !v.is_zero()) {
                        out.push(primitive(&f));
                    }
                }
            }
        }
        if self.clamp_max {
            out.extend(max_tensor(g, h)?.facets());
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn cone(&self, g: &PolyCone, h: &PolyCone) -> Result<PolyCone> {
        g.require_proper("constructed product: left factor")?;
        h.require_proper("constructed product: right factor")?;
        PolyCone::from_facets(g.dim() * h.dim(), self.facets(g, h)?)
    }
}

/// Exact membership of `a` in `G ⊗ H`.
pub fn tp_member_cone(p: &ConstructedProduct, g: &PolyCone, h: &PolyCone, a: &[Rational]) -> Result<bool> {
    check_dim(g.dim() * h.dim(), a.len())?;
    let fs = p.facets(g, h)?;
    Ok(fs.iter().all(|f| !dot_mixed(f, a).is_negative()))
}

/// Three-valued membership of a level-`n` element `a` of `X ⊗ Y`.
///
/// `OUT` carries a product vector on which the entry's test matrix is
/// negative. `IN` needs every entry certified; a search that merely found
/// no violation, or a factor without a usable dual description, gives
/// `UNKNOWN`.
pub fn tp_member_opsys(
    p: &ConstructedProduct,
    g: &OperatorSystem,
    h: &OperatorSystem,
    a: &SystemElement,
    opts: &SearchOptions,
) -> Result<Verdict> {
    p.require_stem(Stem::Operator)?;
    let truncation = g.truncation().min(h.truncation());
    if a.level() > truncation {
        return Err(Error::LevelExceedsTruncation {
            level: a.level(),
            truncation,
        });
    }
    check_dim(g.space_dim() * h.space_dim(), a.space_dim())?;
    let mut unknown = false;
    let mut last = None;
    for entry in &p.family.entries {
        let FamilyEntry::Operator { d, e, x } = entry else {
            unreachable!()
        };
        let (bs, cs) = match (min_level_one_dual(d, g), min_level_one_dual(e, h)) {
            (Ok(b), Ok(c)) => (b, c),
            (Err(Error::Unsupported(_)), _) | (_, Err(Error::Unsupported(_))) => {
                unknown = true;
                continue;
            }
            (Err(err), _) | (_, Err(err)) => return Err(err),
        };
        let dims = [d.space_dim(), e.space_dim(), g.space_dim(), h.space_dim()];
        let t = triple_matrix(&bs, &cs, x, a, dims);
        let v = product_verdict(&t, &[bs[0].n(), cs[0].n(), x.level() * a.level()], opts)?;
        if v.is_out() {
            return Ok(v);
        }
        if !v.certified {
            unknown = true;
        }
        last = v.witness;
    }
    if p.clamp_max {
        match max_tensor_sys(g, h, truncation) {
            Ok(max) => {
                let v = max.level_member(a, opts.tol)?;
                match v.tag {
                    Tag::Out => return Ok(v),
                    Tag::Unknown => unknown = true,
                    Tag::In => {}
                }
            }
            Err(Error::Unsupported(_)) => unknown = true,
            Err(err) => return Err(err),
        }
    }
    Ok(match (unknown, last) {
        (false, Some(w)) => Verdict::certified(Tag::In, w),
        (_, w) => Verdict::unknown(w),
    })
}

/// Whether every `x_i` lies in `D_i ⊗max E_i`, which makes the product
/// contain the minimal one.
pub fn contains_min_check(family: &TensorFamily) -> MinCheck {
    for (i, entry) in family.entries.iter().enumerate() {
        let ok = match entry {
            FamilyEntry::Simplex { d, e, x } => {
                max_tensor(d, e).and_then(|m| m.member(x)).unwrap_or(false)
            }
            FamilyEntry::Operator { d, e, x } => max_tensor_sys(d, e, x.level().max(1))
                .and_then(|m| m.level_member(x, SearchOptions::default().tol))
                .map(|v| v.is_in())
                .unwrap_or(false),
        };
        if !ok {
            return MinCheck {
                holds: false,
                failing_entry: Some(i),
            };
        }
    }
    MinCheck {
        holds: true,
        failing_entry: None,
    }
}

/// A generator of `G ⊗min H` that is not in the constructed product.
#[derive(Clone, Debug)]
pub enum MinViolation {
    Cone {
        entry: usize,
        g: PolyCone,
        h: PolyCone,
        a: Vec<Rational>,
    },
    System {
        entry: usize,
        g: OperatorSystem,
        h: OperatorSystem,
        a: SystemElement,
    },
}

/// Looks for an element of a minimal product outside the constructed one.
/// For cones, `x_i ∉ D_i ⊗max E_i` is exactly `1 ∉ R≥0 ⊗ R≥0`. For systems
/// the search runs over compressed products of the canonical generators of
/// the trivial and 2×2 matrix systems.
pub fn find_min_violation(p: &ConstructedProduct, opts: &SearchOptions) -> Result<Option<MinViolation>> {
    let check = contains_min_check(&p.family);
    let Some(entry) = check.failing_entry else {
        return Ok(None);
    };
    match p.family.stem {
        Stem::Simplex => {
            let r = PolyCone::orthant(1);
            let a = vec![Rational::from_integer(1.into())];
            if tp_member_cone(p, &r, &r, &a)? {
                return Ok(None);
            }
            Ok(Some(MinViolation::Cone {
                entry,
                g: r.clone(),
                h: r,
                a,
            }))
        }
        Stem::Operator => {
            let systems = [OperatorSystem::trivial(), OperatorSystem::intrinsic(2)];
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for g in &systems {
                for h in &systems {
                    let truncation = g.truncation().min(h.truncation());
                    for x in g.generators()? {
                        for y in h.generators()? {
                            let prod = x.kron(&y);
                            let mut candidates = Vec::new();
                            if prod.level() <= truncation {
                                candidates.push(prod.clone());
                            }
                            for n in 1..=truncation.min(prod.level()) {
                                for _ in 0..4 {
                                    let v = random_cmatrix(&mut rng, prod.level(), n);
                                    candidates.push(prod.compress(&v)?);
                                }
                            }
                            for a in candidates {
                                if tp_member_opsys(p, g, h, &a, opts)?.is_out() {
                                    return Ok(Some(MinViolation::System {
                                        entry,
                                        g: g.clone(),
                                        h: h.clone(),
                                        a,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Functoriality of a constructed product under positive maps of cones.
#[allow(clippy::too_many_arguments)]
pub fn functoriality_check_constructed(
    p: &ConstructedProduct,
    f: &RationalMatrix,
    g: &RationalMatrix,
    c: &PolyCone,
    c2: &PolyCone,
    d: &PolyCone,
    d2: &PolyCone,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    p.require_stem(Stem::Simplex)?;
    let kind = TensorKind::Constructed(Arc::new(p.clone()));
    conetensor::functoriality_check(&kind, f, g, c, c2, d, d2, samples, seed)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunctorialityReport {
    /// False only if some image was certified outside the target product.
    pub holds: bool,
    /// Samples whose source and image verdicts were both certified.
    pub checked: usize,
    /// Samples skipped or left open because a verdict was not certified.
    pub unknown: usize,
}

fn check_cp(f: &DMatrix<f64>, from: &OperatorSystem, to: &OperatorSystem, tol: f64, what: &str) -> Result<()> {
    check_dim(from.space_dim(), f.ncols())?;
    check_dim(to.space_dim(), f.nrows())?;
    for (j, x) in from.generators()?.iter().enumerate() {
        if x.level() > to.truncation() {
            continue;
        }
        if !to.level_member(&x.map_space(f)?, tol)?.is_in() {
            return Err(Error::NotPositive(format!("{what} does not send generator {j} into the target system")));
        }
    }
    Ok(())
}

/// Samples `a = Σ (x compressed to level 1) ⊗ (y compressed to level n)`
/// over generators `x` of `G` and `y` of `H`, keeps those certified in
/// `G ⊗ H`, and checks `(f ⊗ g)(a)` in `G′ ⊗ H′`. The maps act on the
/// space index and must be completely positive on generators.
#[allow(clippy::too_many_arguments)]
pub fn functoriality_check_constructed_sys(
    p: &ConstructedProduct,
    f: &DMatrix<f64>,
    g: &DMatrix<f64>,
    sg: &OperatorSystem,
    sg2: &OperatorSystem,
    sh: &OperatorSystem,
    sh2: &OperatorSystem,
    level: usize,
    samples: usize,
    opts: &SearchOptions,
) -> Result<FunctorialityReport> {
    p.require_stem(Stem::Operator)?;
    check_cp(f, sg, sg2, opts.tol, "left map")?;
    check_cp(g, sh, sh2, opts.tol, "right map")?;
    let fg = f.kronecker(g);
    let gx = sg.generators()?;
    let hy = sh.generators()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = FunctorialityReport {
        holds: true,
        checked: 0,
        unknown: 0,
    };
    for _ in 0..samples {
        let mut a = SystemElement::zero(sg.space_dim() * sh.space_dim(), level);
        for _ in 0..rng.random_range(1..=2) {
            let x = &gx[rng.random_range(0..gx.len())];
            let y = &hy[rng.random_range(0..hy.len())];
            let xc = x.compress(&random_cmatrix(&mut rng, x.level(), 1))?;
            let yc = y.compress(&random_cmatrix(&mut rng, y.level(), level))?;
            a = a.add(&xc.kron(&yc))?;
        }
        let source = tp_member_opsys(p, sg, sh, &a, opts)?;
        if !(source.is_in() && source.certified) {
            report.unknown += 1;
            continue;
        }
        let image = tp_member_opsys(p, sg2, sh2, &a.map_space(&fg)?, opts)?;
        match image.tag {
            Tag::Out => {
                report.holds = false;
                report.checked += 1;
            }
            Tag::In if image.certified => report.checked += 1,
            _ => report.unknown += 1,
        }
    }
    Ok(report)
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    #[serde(rename = "D")]
    d: Value,
    #[serde(rename = "E")]
    e: Value,
    level: usize,
    x: Value,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    stem: Stem,
    entries: Vec<EntryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clamp_max: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct RationalVec(#[serde(with = "serde_rational_vec")] Vec<Rational>);

fn field<T: serde::de::DeserializeOwned>(v: Value, at: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{at}: {e}")))
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

impl ConstructedProduct {
    /// Parses `{"stem", "entries": [{"D", "E", "level", "x"}], "clamp_max"}`.
    pub fn from_json(v: Value) -> Result<Self> {
        let raw: FamilyJson = field(v, "family")?;
        let mut entries = Vec::with_capacity(raw.entries.len());
        for (i, e) in raw.entries.into_iter().enumerate() {
            let at = |k: &str| format!("entries[{i}].{k}");
            let entry = match raw.stem {
                Stem::Simplex => {
                    if e.level != 1 {
                        return Err(Error::Parse(format!("{}: simplex entries have level 1", at("level"))));
                    }
                    FamilyEntry::Simplex {
                        d: field(e.d, &at("D"))?,
                        e: field(e.e, &at("E"))?,
                        x: field::<RationalVec>(e.x, &at("x"))?.0,
                    }
                }
                Stem::Operator => {
                    let x: SystemElement = field(e.x, &at("x"))?;
                    if x.level() != e.level {
                        return Err(Error::Parse(format!("{}: does not match x", at("level"))));
                    }
                    FamilyEntry::Operator {
                        d: field(e.d, &at("D"))?,
                        e: field(e.e, &at("E"))?,
                        x,
                    }
                }
            };
            entries.push(entry);
        }
        let mut p = ConstructedProduct::new(build_family(entries, raw.stem)?);
        if let Some(c) = raw.clamp_max {
            p.clamp_max = c;
        }
        if let Some(id) = raw.id {
            p.id = id;
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        let entries = self
            .family
            .entries
            .iter()
            .map(|e| match e {
                FamilyEntry::Simplex { d, e, x } => EntryJson {
                    d: to_value(d),
                    e: to_value(e),
                    level: 1,
                    x: to_value(&RationalVec(x.clone())),
                },
                FamilyEntry::Operator { d, e, x } => EntryJson {
                    d: to_value(d),
                    e: to_value(e),
                    level: x.level(),
                    x: to_value(x),
                },
            })
            .collect();
        to_value(&FamilyJson {
            id: Some(self.id.clone()),
            stem: self.family.stem,
            entries,
            clamp_max: Some(self.clamp_max),
        })
    }
}
