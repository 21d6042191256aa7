//! Enlarging a cone or operator system contained in its dual towards a
//! self-dual one.
//!
//! Every step adds one element `x` of the current dual `E^∨` that also lies
//! in `P`, the set of elements positive on themselves. Then `E + W_x` is
//! still contained in its dual. For cones `P` is everything, since
//! `<x, x> >= 0`; for operator systems the gate is [`in_p`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opsys::{
    dual_realizers, in_p, interior_point, project_generated, psd_member, HermElement, OperatorSystem,
    SystemElement, Tag,
};
use crate::polycone::{nnls, selfdual_residual, ConeProjector, PolyCone};
use crate::ratlin::{dot_int, from_f64_approx, primitive, primitive_int, to_f64_vec, IntVec, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Add the extreme ray of `E^∨` farthest from `E`.
    GreedyDualRay,
    /// Closed form in the plane: the 90° cone on the bisector of `C`.
    Bisector2d,
    /// Add `u + proj_E(u)` for the farthest dual ray `u`.
    DampedMidpoint,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" | "greedy-dual-ray" => Ok(Strategy::GreedyDualRay),
            "bisector" | "bisector-2d" => Ok(Strategy::Bisector2d),
            "damped" | "damped-midpoint" => Ok(Strategy::DampedMidpoint),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::GreedyDualRay => "greedy",
            Strategy::Bisector2d => "bisector-2d",
            Strategy::DampedMidpoint => "damped-midpoint",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtensionStatus {
    /// Residual at most `eps`.
    Converged,
    /// Stopped by the iteration cap or for lack of an acceptable candidate.
    IterationCap,
    /// `E = E^∨` exactly.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NotInP,
    NotInDual,
    ResidualIncrease,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub iteration: usize,
    pub level: usize,
    pub reason: RejectReason,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionTrace<T> {
    pub iterations: usize,
    pub added_rays: Vec<T>,
    /// Residual before the first step and after every accepted one.
    pub residual_history: Vec<f64>,
    pub status: ExtensionStatus,
    /// Whether `E ⊆ E^∨` was verified after each accepted step.
    pub invariant_history: Vec<bool>,
    pub rejections: Vec<Rejection>,
}

impl<T> ExtensionTrace<T> {
    fn new() -> Self {
        ExtensionTrace {
            iterations: 0,
            added_rays: Vec::new(),
            residual_history: Vec::new(),
            status: ExtensionStatus::IterationCap,
            invariant_history: Vec::new(),
            rejections: Vec::new(),
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn map<U>(self, f: impl FnMut(T) -> U) -> ExtensionTrace<U> {
        ExtensionTrace {
            iterations: self.iterations,
            added_rays: self.added_rays.into_iter().map(f).collect(),
            residual_history: self.residual_history,
            status: self.status,
            invariant_history: self.invariant_history,
            rejections: self.rejections,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConeExtensionOptions {
    pub eps: f64,
    pub strategy: Strategy,
    pub max_iter: usize,
    pub seed: u64,
    /// Above this many extreme rays, added rays that barely matter are dropped.
    pub ray_cap: usize,
}

impl Default for ConeExtensionOptions {
    fn default() -> Self {
        ConeExtensionOptions {
            eps: 1e-6,
            strategy: Strategy::GreedyDualRay,
            max_iter: 200,
            seed: 0,
            ray_cap: 64,
        }
    }
}

/// Exact check that all pairwise inner products of `gens` are nonnegative;
/// returns the first violating pair.
pub fn pairwise_violation(gens: &[IntVec]) -> Option<(usize, usize)> {
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if dot_int(&gens[i], &gens[j]).is_negative() {
                return Some((i, j));
            }
        }
    }
    None
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Angle between the two extreme rays of a proper cone in the plane.
pub fn aperture_2d(c: &PolyCone) -> Result<f64> {
    let rays = c.extreme_rays();
    if c.dim() != 2 || rays.len() != 2 {
        return Err(Error::Precondition("aperture needs a proper cone in the plane".into()));
    }
    let a = unit(&to_f64_vec(&rays[0]));
    let b = unit(&to_f64_vec(&rays[1]));
    Ok((a[0] * b[0] + a[1] * b[1]).clamp(-1.0, 1.0).acos())
}

/// Dual rays not in `e`, farthest first.
fn ranked_dual_rays(e: &PolyCone) -> Result<Vec<(f64, IntVec)>> {
    let proj = ConeProjector::new(e);
    let mut out = Vec::new();
    for u in e.dual().extreme_rays() {
        if e.member_int(u)? {
            continue;
        }
        out.push((proj.distance(&unit(&to_f64_vec(u)))?, u.clone()));
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(out)
}

/// `u + p` with `p` a rational nonnegative combination of the extreme rays
/// of `e` close to the projection of `u`; stays in `E^∨` exactly.
fn damped(e: &PolyCone, u: &IntVec) -> Result<IntVec> {
    let rays = e.extreme_rays();
    let dim = e.dim();
    let a = DMatrix::from_fn(dim, rays.len(), |i, j| to_f64_vec(&rays[j])[i]);
    let b = DVector::from_vec(to_f64_vec(u));
    let sol = nnls(&a, &b, 50 * (rays.len() + dim))?;
    let mut w: Vec<Rational> = u.iter().map(|x| Rational::from_integer(x.clone())).collect();
    for (j, r) in rays.iter().enumerate() {
        let c = from_f64_approx(sol.x[j].max(0.0), 1 << 20);
        if c.is_zero() || c.is_negative() {
            continue;
        }
        for (wi, ri) in w.iter_mut().zip(r) {
            *wi += &c * Rational::from_integer(ri.clone());
        }
    }
    Ok(primitive(&w))
}

/// The 90° cone whose bisector is close to that of `c`, shrinking the
/// angular error until it contains `c` and lies in `c^∨`.
fn bisector_cone(c: &PolyCone) -> Result<PolyCone> {
    let rays = c.extreme_rays();
    let a = unit(&to_f64_vec(&rays[0]));
    let b = unit(&to_f64_vec(&rays[1]));
    let mid = (a[1] + b[1]).atan2(a[0] + b[0]);
    let dual = c.dual();
    for bits in [8u32, 16, 24, 32, 40, 48] {
        let scale = f64::from(2u32).powi(bits as i32);
        let t = mid - std::f64::consts::FRAC_PI_4;
        let r1 = vec![BigInt::from((t.cos() * scale).round() as i64), BigInt::from((t.sin() * scale).round() as i64)];
        let r2 = vec![-r1[1].clone(), r1[0].clone()];
        let e = PolyCone::from_generators(2, vec![r1, r2])?;
        if c.subset_of(&e)? && e.subset_of(&dual)? {
            return Ok(e);
        }
    }
    Err(Error::NonConvergence {
        iterations: 6,
        detail: "no rational 90° cone fits between the cone and its dual".into(),
    })
}

fn rebuild(dim: usize, gens: Vec<IntVec>) -> Result<PolyCone> {
    let e = PolyCone::from_generators(dim, gens)?;
    PolyCone::from_generators(dim, e.extreme_rays().to_vec())
}

/// Drops added rays whose removal keeps `C ⊆ E` and moves the residual by
/// less than `eps / 10`, until at most `cap` rays remain.
fn coarsen(c: &PolyCone, e: PolyCone, r: f64, eps: f64, cap: usize) -> Result<(PolyCone, f64)> {
    let mut e = e;
    let mut r = r;
    let mut i = 0;
    while e.extreme_rays().len() > cap && i < e.extreme_rays().len() {
        let mut gens = e.extreme_rays().to_vec();
        let dropped = gens.remove(i);
        if c.extreme_rays().contains(&dropped) {
            i += 1;
            continue;
        }
        let smaller = rebuild(e.dim(), gens)?;
        if smaller.is_proper() && c.subset_of(&smaller)? {
            let rs = selfdual_residual(&smaller)?;
            if (rs - r).abs() < eps / 10.0 {
                e = smaller;
                r = rs;
                continue;
            }
        }
        i += 1;
    }
    Ok((e, r))
}

/// Enlarges a proper cone `C ⊆ C^∨` to `E` with `C ⊆ E ⊆ E^∨ ⊆ C^∨` and,
/// unless the cap is hit, `selfdual_residual(E) <= eps`.
pub fn selfdual_extend_cone(c: &PolyCone, opts: &ConeExtensionOptions) -> Result<(PolyCone, ExtensionTrace<IntVec>)> {
    c.require_proper("selfdual_extend_cone")?;
    if opts.eps.is_nan() || opts.eps <= 0.0 {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let gens = c.generators();
    if let Some((i, j)) = pairwise_violation(&gens) {
        return Err(Error::Precondition(format!(
            "cone is not contained in its dual: <g{i}, g{j}> < 0"
        )));
    }
    let mut trace = ExtensionTrace::new();
    let mut e = rebuild(c.dim(), c.extreme_rays().to_vec())?;
    let mut r = selfdual_residual(&e)?;
    trace.residual_history.push(r);

    if opts.strategy == Strategy::Bisector2d {
        if c.dim() != 2 {
            return Err(Error::Precondition("the bisector strategy needs dimension 2".into()));
        }
        if e.dual().same_cone(&e)? {
            trace.status = ExtensionStatus::Exact;
            return Ok((e, trace));
        }
        let out = bisector_cone(c)?;
        trace.iterations = 1;
        trace.added_rays = out.extreme_rays().to_vec();
        trace.invariant_history.push(pairwise_violation(out.extreme_rays()).is_none());
        trace.residual_history.push(selfdual_residual(&out)?);
        trace.status = ExtensionStatus::Exact;
        return Ok((out, trace));
    }

    loop {
        if e.dual().same_cone(&e)? {
            trace.status = ExtensionStatus::Exact;
            break;
        }
        if r <= opts.eps {
            trace.status = ExtensionStatus::Converged;
            break;
        }
        if trace.iterations >= opts.max_iter {
            trace.status = ExtensionStatus::IterationCap;
            break;
        }
        let iteration = trace.iterations;
        let mut accepted = None;
        for (_, u) in ranked_dual_rays(&e)? {
            // a plane cone always has two rays, so damping buys nothing there
            let x = match opts.strategy {
                Strategy::DampedMidpoint if e.dim() > 2 => damped(&e, &u)?,
                _ => u,
            };
            let mut gens = e.extreme_rays().to_vec();
            gens.push(x.clone());
            let next = rebuild(e.dim(), gens)?;
            let rn = selfdual_residual(&next)?;
            if rn <= r {
                accepted = Some((x, next, rn));
                break;
            }
            trace.rejections.push(Rejection {
                iteration,
                level: 1,
                reason: RejectReason::ResidualIncrease,
            });
        }
        let Some((x, next, rn)) = accepted else {
            trace.status = ExtensionStatus::IterationCap;
            break;
        };
        trace.iterations += 1;
        let (next, rn) = if next.extreme_rays().len() > opts.ray_cap {
            coarsen(c, next, rn, opts.eps, opts.ray_cap)?
        } else {
            (next, rn)
        };
        trace.invariant_history.push(pairwise_violation(next.extreme_rays()).is_none());
        trace.added_rays.push(x);
        trace.residual_history.push(rn);
        e = next;
        r = rn;
    }
    Ok((e, trace))
}

#[derive(Clone, Debug)]
pub struct SystemExtensionOptions {
    pub eps: f64,
    /// Levels `1..=levels` are sampled.
    pub levels: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Boundary points of the dual sampled per level and iteration.
    pub samples: usize,
    /// Candidates offered before the sampled ones, each at most once.
    pub candidates: Vec<SystemElement>,
    pub tol: f64,
}

impl Default for SystemExtensionOptions {
    fn default() -> Self {
        SystemExtensionOptions {
            eps: 1e-3,
            levels: 2,
            max_iter: 20,
            seed: 0,
            samples: 24,
            candidates: Vec::new(),
            tol: 1e-9,
        }
    }
}

/// Outcome of offering one candidate to a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Admission {
    Accepted,
    Rejected(RejectReason),
}

/// The gate for adding `x` to a generated system `E ⊆ E^∨`: `x ∈ P` and
/// `x ∈ E^∨`, both by psd checks.
pub fn admit_candidate(gens: &[SystemElement], x: &SystemElement, tol: f64) -> Result<Admission> {
    if in_p(x, tol).tag != Tag::In {
        return Ok(Admission::Rejected(RejectReason::NotInP));
    }
    let m = x.realize(&dual_realizers(gens))?;
    if psd_member(&m, tol * m.norm().max(1.0)).tag != Tag::In {
        return Ok(Admission::Rejected(RejectReason::NotInDual));
    }
    Ok(Admission::Accepted)
}

/// Boundary point of `{B : Σ B_i ⊗ R_i ⪰ 0}` along `center + t·dir`, or
/// `dir` itself when the whole ray stays inside.
fn boundary_point(center: &SystemElement, dir: &SystemElement, realizers: &[HermElement]) -> Result<SystemElement> {
    let m0 = center.realize(realizers)?;
    let md = dir.realize(realizers)?;
    let chol = m0
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("interior point is not strictly inside".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("singular interior point".into()))?;
    let w = HermElement::symmetrized(&linv * md.matrix() * linv.adjoint());
    let (lmin, _) = w.min_eig();
    if lmin >= 0.0 {
        return Ok(dir.clone());
    }
    // keep strictly on the feasible side
    let t = -1.0 / lmin * (1.0 - 1e-12);
    center.add(&dir.scale(t))
}

struct Estimate {
    residual: f64,
    /// Sampled boundary points, farthest from `E` first.
    points: Vec<(f64, SystemElement)>,
}

fn estimate(gens: &[SystemElement], opts: &SystemExtensionOptions, seed: u64) -> Result<Estimate> {
    let realizers = dual_realizers(gens);
    let (xi, _) = interior_point(&realizers).ok_or_else(|| Error::NotProper("dual has no interior".into()))?;
    let d = gens[0].space_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut residual: f64 = 0.0;
    for n in 1..=opts.levels {
        let center = SystemElement::elementary(&xi, &HermElement::identity(n));
        for _ in 0..opts.samples {
            let dir = SystemElement::new(n, (0..d).map(|_| HermElement::random(&mut rng, n)).collect())?;
            let y = boundary_point(&center, &dir, &realizers)?;
            let norm = y.norm();
            if norm == 0.0 {
                continue;
            }
            let y = y.scale(1.0 / norm);
            let (_, dist) = project_generated(gens, &y, opts.eps / 10.0, 3000)?;
            residual = residual.max(dist);
            points.push((dist, y));
        }
    }
    points.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(Estimate { residual, points })
}

/// Enlarges a system `G ⊆ G^∨` by generators that pass the `P` gate and lie
/// in the current dual. The residual is the largest distance from sampled
/// unit boundary points of `E^∨(n)` to `E(n)`, `n <= levels`.
pub fn selfdual_extend_system(
    g: &OperatorSystem,
    opts: &SystemExtensionOptions,
) -> Result<(OperatorSystem, ExtensionTrace<SystemElement>)> {
    if opts.eps.is_nan() || opts.eps <= 0.0 {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    g.require_proper("selfdual_extend_system")?;
    let mut gens = g.generators()?;
    let realizers = dual_realizers(&gens);
    for (j, x) in gens.iter().enumerate() {
        let m = x.realize(&realizers)?;
        if !psd_member(&m, opts.tol * m.norm().max(1.0)).is_in() {
            return Err(Error::Precondition(format!(
                "system is not contained in its dual: generator {j}"
            )));
        }
    }
    let mut trace = ExtensionTrace::new();
    let mut est = estimate(&gens, opts, opts.seed)?;
    trace.residual_history.push(est.residual);
    let mut offered = opts.candidates.iter();
    loop {
        if est.residual <= opts.eps {
            trace.status = ExtensionStatus::Converged;
            break;
        }
        if trace.iterations >= opts.max_iter {
            trace.status = ExtensionStatus::IterationCap;
            break;
        }
        let iteration = trace.iterations;
        let mut pool: Vec<SystemElement> = offered.by_ref().cloned().collect();
        pool.extend(est.points.iter().take(4).map(|(_, y)| y.clone()));
        let mut accepted = None;
        for y in pool {
            let level = y.level();
            match admit_candidate(&gens, &y, opts.tol)? {
                Admission::Rejected(reason) => {
                    trace.rejections.push(Rejection { iteration, level, reason });
                    continue;
                }
                Admission::Accepted => {}
            }
            let mut next = gens.clone();
            next.push(y.clone());
            let e2 = estimate(&next, opts, opts.seed.wrapping_add(iteration as u64 + 1))?;
            if e2.residual <= est.residual {
                accepted = Some((y, next, e2));
                break;
            }
            trace.rejections.push(Rejection {
                iteration,
                level,
                reason: RejectReason::ResidualIncrease,
            });
        }
        let Some((y, next, e2)) = accepted else {
            trace.status = ExtensionStatus::IterationCap;
            break;
        };
        trace.iterations += 1;
        let realizers = dual_realizers(&next);
        let ok = next.iter().all(|x| {
            x.realize(&realizers)
                .map(|m| psd_member(&m, opts.tol * m.norm().max(1.0)).is_in())
                .unwrap_or(false)
        });
        trace.invariant_history.push(ok);
        trace.added_rays.push(y);
        trace.residual_history.push(e2.residual);
        gens = next;
        est = e2;
    }
    let out = OperatorSystem::generated(g.space_dim(), gens)?.with_truncation(g.truncation());
    Ok((out, trace))
}

/// `true` iff adding `x` to the generators keeps the pairwise products
/// nonnegative; holds whenever `x ∈ E^∨`.
pub fn add_preserves_subduality(gens: &[IntVec], x: &IntVec) -> bool {
    let mut all = gens.to_vec();
    all.push(primitive_int(x.clone()));
    pairwise_violation(&all).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_subdual_cone, rng};
    use crate::ratlin::int_vec;

    fn opts(strategy: Strategy, eps: f64) -> ConeExtensionOptions {
        ConeExtensionOptions {
            eps,
            strategy,
            ..Default::default()
        }
    }

    #[test]
    fn orthant_is_already_exact() {
        for n in 1..5 {
            let o = PolyCone::orthant(n);
            let (e, t) = selfdual_extend_cone(&o, &opts(Strategy::GreedyDualRay, 1e-9)).unwrap();
            assert_eq!(t.iterations, 0);
            assert_eq!(t.status, ExtensionStatus::Exact);
            assert!(e.same_cone(&o).unwrap());
        }
    }

    #[test]
    fn bisector_gives_right_angle() {
        let c = PolyCone::from_i64_generators(2, &[&[1, 0], &[3, 4]]);
        let (e, t) = selfdual_extend_cone(&c, &opts(Strategy::Bisector2d, 1e-9)).unwrap();
        assert!((aperture_2d(&e).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(c.subset_of(&e).unwrap());
        assert!(e.subset_of(&c.dual()).unwrap());
        assert!(t.final_residual() <= 1e-9);
        assert!(e.dual().same_cone(&e).unwrap());
    }

    #[test]
    fn greedy_in_the_plane_is_one_step() {
        let c = PolyCone::from_i64_generators(2, &[&[1, 0], &[3, 4]]);
        let (e, t) = selfdual_extend_cone(&c, &opts(Strategy::GreedyDualRay, 1e-9)).unwrap();
        assert_eq!(t.status, ExtensionStatus::Exact);
        assert_eq!(t.iterations, 1);
        assert!((aperture_2d(&e).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn precondition_names_the_pair() {
        let c = PolyCone::from_i64_generators(2, &[&[1, 0], &[-1, 1]]);
        match selfdual_extend_cone(&c, &ConeExtensionOptions::default()) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("g0, g1"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let ray = PolyCone::from_i64_generators(2, &[&[1, 0]]);
        assert!(matches!(selfdual_extend_cone(&ray, &ConeExtensionOptions::default()), Err(Error::NotProper(_))));
    }

    fn check_sandwich(c: &PolyCone, e: &PolyCone, t: &ExtensionTrace<IntVec>) {
        assert!(c.subset_of(e).unwrap());
        let cd = c.dual();
        for g in e.extreme_rays() {
            assert!(cd.member_int(g).unwrap());
        }
        assert!(t.invariant_history.iter().all(|&b| b));
        for w in t.residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn greedy_thin_cones() {
        let mut r = rng(4);
        for dim in [3, 4] {
            for _ in 0..3 {
                let c = random_subdual_cone(&mut r, dim, dim + 1, 3);
                let (e, t) = selfdual_extend_cone(&c, &opts(Strategy::GreedyDualRay, 1e-6)).unwrap();
                check_sandwich(&c, &e, &t);
                assert!(t.final_residual() <= 1e-6, "{:?}", t.residual_history);
            }
        }
    }

    #[test]
    fn damped_midpoint_keeps_the_sandwich() {
        let mut r = rng(8);
        let c = random_subdual_cone(&mut r, 3, 4, 3);
        let o = ConeExtensionOptions {
            eps: 1e-3,
            strategy: Strategy::DampedMidpoint,
            max_iter: 30,
            ..Default::default()
        };
        let (e, t) = selfdual_extend_cone(&c, &o).unwrap();
        check_sandwich(&c, &e, &t);
    }

    #[test]
    fn adding_a_dual_element_keeps_subduality() {
        let c = PolyCone::from_i64_generators(3, &[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]]);
        let gens = c.extreme_rays().to_vec();
        for u in c.dual().extreme_rays() {
            assert!(add_preserves_subduality(&gens, u));
        }
        assert!(!add_preserves_subduality(&gens, &int_vec(&[-1, 0, 0])));
    }

    #[test]
    fn strategy_names_parse() {
        for s in [Strategy::GreedyDualRay, Strategy::Bisector2d, Strategy::DampedMidpoint] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("zorn".parse::<Strategy>().is_err());
    }

    fn quick() -> SystemExtensionOptions {
        SystemExtensionOptions {
            eps: 1e-3,
            levels: 2,
            samples: 8,
            max_iter: 5,
            ..Default::default()
        }
    }

    #[test]
    fn intrinsic_system_needs_no_steps() {
        let (_, t) = selfdual_extend_system(&OperatorSystem::intrinsic(2), &quick()).unwrap();
        assert_eq!(t.iterations, 0);
        assert_eq!(t.status, ExtensionStatus::Converged);
    }

    #[test]
    fn diagonal_system_is_self_dual() {
        let (_, t) = selfdual_extend_system(&OperatorSystem::diagonal(2), &quick()).unwrap();
        assert_eq!(t.status, ExtensionStatus::Converged, "{:?}", t.residual_history);
    }

    #[test]
    fn thin_level_one_system_is_completed() {
        let g = OperatorSystem::generated(2, vec![SystemElement::scalars(&[2.0, 1.0]), SystemElement::scalars(&[1.0, 2.0])])
            .unwrap();
        let mut o = quick();
        o.max_iter = 10;
        let (e, t) = selfdual_extend_system(&g, &o).unwrap();
        assert_eq!(t.status, ExtensionStatus::Converged, "{:?}", t.residual_history);
        assert!(t.invariant_history.iter().all(|&b| b));
        for w in t.residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        // the original generators are still in E
        for x in g.generators().unwrap() {
            assert!(e.level_member(&x, 1e-8).unwrap().is_in());
        }
    }

    #[test]
    fn p_gate_rejects_indefinite_candidate() {
        let g = OperatorSystem::generated(2, vec![SystemElement::scalars(&[2.0, 1.0]), SystemElement::scalars(&[1.0, 2.0])])
            .unwrap();
        let x = SystemElement::new(2, vec![HermElement::diag(&[1.0, -1.0]), HermElement::zeros(2)]).unwrap();
        let gens = g.generators().unwrap();
        assert_eq!(admit_candidate(&gens, &x, 1e-9).unwrap(), Admission::Rejected(RejectReason::NotInP));
        let mut o = quick();
        o.candidates = vec![x];
        o.max_iter = 1;
        let (_, t) = selfdual_extend_system(&g, &o).unwrap();
        assert!(t.rejections.iter().any(|r| r.reason == RejectReason::NotInP && r.level == 2));
    }
}
