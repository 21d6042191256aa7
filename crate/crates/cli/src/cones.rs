//! Polyhedral commands: dual, tensor, selfdualize, verify-duality.

use std::sync::Arc;

use num_traits::Signed;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use conelab::conetensor::{max_tensor, min_tensor, tensor};
use conelab::polycone::selfdual_residual;
use conelab::random::{random_proper_cone, rng};
use conelab::ratlin::{dot_int, kron_int, IntVec};
use conelab::selfdual::{aperture_2d, pairwise_violation, selfdual_extend_cone, ConeExtensionOptions, ExtensionStatus, Strategy};
use conelab::tpfactory::{contains_min_check, ConstructedProduct};
use conelab::{PolyCone, TensorKind};

use crate::input::{CliError, CliResult, Inputs};
use crate::report::{Check, Status};

pub type Outcome = (Vec<Check>, Option<Value>);

pub fn int_json(v: &IntVec) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn cone_json(c: &PolyCone) -> Value {
    serde_json::to_value(c.dd_convert()).expect("cone serializes")
}

/// First pair `(g, f)` with `<f, g> < 0`.
fn negative_pair<'a>(gens: &'a [IntVec], normals: &'a [IntVec]) -> Option<(&'a IntVec, &'a IntVec)> {
    gens.iter()
        .flat_map(|g| normals.iter().map(move |f| (g, f)))
        .find(|(g, f)| dot_int(f, g).is_negative())
}

fn load_cone(inputs: &mut Inputs, path: &str) -> CliResult<PolyCone> {
    let c: PolyCone = inputs.load(path)?;
    inputs.guard(c.dim(), path)?;
    Ok(c)
}

pub fn dual(inputs: &mut Inputs, path: &str) -> CliResult<Outcome> {
    let c = load_cone(inputs, path)?;
    let d = c.dual();
    let back = d.dual();
    let bidual = back.same_cone(&c)?;
    let self_dual = d.same_cone(&c)?;
    let mut checks = vec![Check::new("dual.biduality", Status::from_bool(bidual))
        .detail("dim", c.dim())
        .detail("self_dual", u8::from(self_dual))
        .witness(json!({ "cone": cone_json(&c), "bidual": cone_json(&back) }))];
    let pair = negative_pair(c.extreme_rays(), d.extreme_rays());
    checks.push(
        Check::new("dual.pairing", Status::from_bool(pair.is_none()))
            .detail("rays", c.extreme_rays().len())
            .detail("dual_rays", d.extreme_rays().len())
            .witness(pair.map_or(Value::Null, |(g, f)| json!({ "generator": int_json(g), "functional": int_json(f) }))),
    );
    Ok((checks, Some(json!({ "cone": cone_json(&d) }))))
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ConeKind {
    Min,
    Max,
    Constructed,
}

pub fn tensor_cmd(inputs: &mut Inputs, a: &str, b: &str, kind: ConeKind, family: Option<&str>) -> CliResult<Outcome> {
    let c = load_cone(inputs, a)?;
    let d = load_cone(inputs, b)?;
    inputs.guard(c.dim() * d.dim(), "tensor product")?;
    let product = match kind {
        ConeKind::Min => TensorKind::Min,
        ConeKind::Max => TensorKind::Max,
        ConeKind::Constructed => {
            let path = family.ok_or_else(|| CliError("--kind constructed needs --family".into()))?;
            let v: Value = inputs.load(path)?;
            let p = ConstructedProduct::from_json(v).map_err(|e| CliError(format!("{path}: {e}")))?;
            TensorKind::Constructed(Arc::new(p))
        }
    };
    let out = tensor(&product, &c, &d)?;
    let min = min_tensor(&c, &d)?;
    let max = max_tensor(&c, &d)?;
    let mut checks = Vec::new();

    let outside = min.generators().into_iter().find(|g| !max.member_int(g).unwrap_or(false));
    checks.push(
        Check::new("tensor.min_in_max", Status::from_bool(outside.is_none()))
            .detail("min_rays", min.extreme_rays().len())
            .detail("max_rays", max.extreme_rays().len())
            .witness(outside.as_ref().map_or(Value::Null, int_json)),
    );
    let identity = min.dual().same_cone(&max_tensor(&c.dual(), &d.dual())?)?;
    checks.push(Check::new("tensor.duality", Status::from_bool(identity)).detail("dim", c.dim() * d.dim()));

    if let TensorKind::Constructed(p) = &product {
        let in_max = out.subset_of(&max)?;
        // without the clamp the product may exceed max; that is not an error
        let status = if in_max || !p.clamp_max() {
            Status::Pass
        } else {
            Status::Fail
        };
        checks.push(
            Check::new("tensor.constructed_in_max", status)
                .detail("clamp_max", u8::from(p.clamp_max()))
                .detail("inside", u8::from(in_max)),
        );
        let gate = contains_min_check(p.family());
        let has_min = min.subset_of(&out)?;
        checks.push(
            Check::new("tensor.min_gate", Status::from_bool(!gate.holds || has_min))
                .detail("gate", u8::from(gate.holds))
                .detail("contains_min", u8::from(has_min)),
        );
    }
    Ok((
        checks,
        Some(json!({ "kind": product.to_string(), "cone": cone_json(&out) })),
    ))
}

pub struct SelfdualArgs {
    pub strategy: Strategy,
    pub eps: f64,
    pub max_iter: usize,
    pub ray_cap: usize,
    pub seed: u64,
}

pub fn selfdualize(inputs: &mut Inputs, path: &str, args: &SelfdualArgs) -> CliResult<Outcome> {
    let c = load_cone(inputs, path)?;
    let opts = ConeExtensionOptions {
        eps: args.eps,
        strategy: args.strategy,
        max_iter: args.max_iter,
        seed: args.seed,
        ray_cap: args.ray_cap,
    };
    let (e, trace) = selfdual_extend_cone(&c, &opts)?;
    let mut checks = Vec::new();
    let missing = c.extreme_rays().iter().find(|g| !e.member_int(g).unwrap_or(false));
    checks.push(
        Check::new("selfdual.contains_input", Status::from_bool(missing.is_none()))
            .witness(missing.map_or(Value::Null, int_json)),
    );
    let above = negative_pair(e.extreme_rays(), c.extreme_rays());
    checks.push(
        Check::new("selfdual.inside_input_dual", Status::from_bool(above.is_none()))
            .witness(above.map_or(Value::Null, |(g, f)| json!({ "generator": int_json(g), "input_ray": int_json(f) }))),
    );
    let broken = pairwise_violation(e.extreme_rays());
    let steps_ok = trace.invariant_history.iter().all(|&b| b);
    checks.push(
        Check::new("selfdual.invariant", Status::from_bool(broken.is_none() && steps_ok))
            .detail("steps", trace.invariant_history.len())
            .witness(broken.map_or(Value::Null, |(i, j)| {
                json!({ "left": int_json(&e.extreme_rays()[i]), "right": int_json(&e.extreme_rays()[j]) })
            })),
    );
    let res = selfdual_residual(&e)?;
    let status = if res <= args.eps {
        Status::Pass
    } else if trace.status == ExtensionStatus::IterationCap {
        Status::Unknown
    } else {
        Status::Fail
    };
    checks.push(
        Check::new("selfdual.residual", status)
            .detail("residual", res)
            .detail("eps", args.eps)
            .detail("iterations", trace.iterations),
    );
    if c.dim() == 2 {
        let ap = aperture_2d(&e)?;
        let ok = (ap - std::f64::consts::FRAC_PI_2).abs() <= 1e-9;
        checks.push(Check::new("selfdual.aperture", Status::from_bool(ok)).detail("radians", ap));
    }
    let trace = trace.map(|v| int_json(&v));
    Ok((
        checks,
        Some(json!({
            "cone": cone_json(&e),
            "trace": serde_json::to_value(&trace).expect("trace serializes"),
        })),
    ))
}

/// Facets of `C ⊗min D` against the extreme rays of `C^∨ ⊗max D^∨`, both
/// irredundant and primitive, so the two lists must coincide.
fn duality_instance(c: &PolyCone, d: &PolyCone) -> CliResult<(bool, Value, Value)> {
    let n = c.dim() * d.dim();
    let kron: Vec<IntVec> = c
        .extreme_rays()
        .iter()
        .flat_map(|x| d.extreme_rays().iter().map(move |y| kron_int(x, y)))
        .collect();
    let min = PolyCone::from_generators(n, kron.clone())?;
    let mut lhs = min.irredundant_facets().to_vec();
    lhs.sort();
    let max = PolyCone::from_facets(n, kron.clone())?;
    let mut rhs = max.extreme_rays().to_vec();
    rhs.sort();
    let outside = negative_pair(&lhs, &kron).map(|(g, _)| g.clone());
    let missing = rhs.iter().find(|v| lhs.binary_search(v).is_err()).cloned();
    let ok = outside.is_none() && missing.is_none() && lhs == rhs;
    let details = json!({ "dim_c": c.dim(), "dim_d": d.dim(), "facets": lhs.len(), "rays": rhs.len() });
    let witness = json!({
        "c": cone_json(c),
        "d": cone_json(d),
        "facet_outside_max": outside.as_ref().map(int_json),
        "ray_missing_from_dual": missing.as_ref().map(int_json),
    });
    Ok((ok, details, witness))
}

fn instance_check(name: String, c: &PolyCone, d: &PolyCone) -> CliResult<Check> {
    let (ok, details, witness) = duality_instance(c, d)?;
    let mut check = Check::new(name, Status::from_bool(ok)).witness(witness);
    if let Value::Object(m) = details {
        check.details = m;
    }
    Ok(check)
}

pub struct DualityArgs {
    pub random: usize,
    pub dim: usize,
    pub max_gens: usize,
    pub seed: u64,
}

pub fn verify_duality(inputs: &mut Inputs, pair: Option<(&str, &str)>, args: &DualityArgs) -> CliResult<Outcome> {
    if let Some((a, b)) = pair {
        let c = load_cone(inputs, a)?;
        let d = load_cone(inputs, b)?;
        inputs.guard(c.dim() * d.dim(), "tensor product")?;
        c.require_proper(a)?;
        d.require_proper(b)?;
        return Ok((vec![instance_check("duality".into(), &c, &d)?], None));
    }
    if args.dim == 0 {
        return Err(CliError("--dim must be at least 1".into()));
    }
    inputs.guard(args.dim * args.dim, "tensor product")?;
    let lo = args.dim.min(2);
    let width = args.random.saturating_sub(1).to_string().len().max(3);
    let checks: CliResult<Vec<Check>> = (0..args.random)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(args.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
            let dc = r.random_range(lo..=args.dim);
            let dd = r.random_range(lo..=args.dim);
            let kc = r.random_range(dc..=args.max_gens.max(dc));
            let kd = r.random_range(dd..=args.max_gens.max(dd));
            let c = random_proper_cone(&mut r, dc, kc, 3);
            let d = random_proper_cone(&mut r, dd, kd, 3);
            instance_check(format!("duality[{i:0width$}]"), &c, &d)
        })
        .collect();
    let mut checks = checks?;
    for c in &mut checks {
        c.details.insert("identity".into(), Value::from("(C ⊗min D)^∨ = C^∨ ⊗max D^∨"));
    }
    Ok((checks, None))
}
