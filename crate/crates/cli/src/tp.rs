//! construct-tp: build a tensor product from a family and check it.

use rand::Rng;
use serde_json::{json, Value};

use conelab::conetensor::{max_tensor, min_tensor};
use conelab::random::{random_proper_cone, rng};
use conelab::ratlin::{serde_rational_vec, to_rat_vec, Rational};
use conelab::tpfactory::{
    contains_min_check, find_min_violation, tp_member_cone, tp_member_opsys, ConstructedProduct, MinViolation,
    SearchOptions, Stem,
};
use conelab::{OperatorSystem, PolyCone, SystemElement, Tag};

use crate::cones::{int_json, Outcome};
use crate::input::{CliError, CliResult, Inputs};
use crate::report::{Check, Status};

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

#[derive(serde::Deserialize)]
struct RationalList(#[serde(with = "serde_rational_vec")] Vec<Rational>);

fn rational_json(a: &[Rational]) -> Value {
    Value::Array(a.iter().map(|x| Value::String(x.to_string())).collect())
}

pub struct TpArgs<'a> {
    pub family: &'a str,
    pub g: Option<&'a str>,
    pub h: Option<&'a str>,
    pub x: Option<&'a str>,
    pub clamp: Option<bool>,
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
}

enum Factors {
    Cones(PolyCone, PolyCone),
    Systems(OperatorSystem, OperatorSystem),
}

pub fn construct_tp(inputs: &mut Inputs, args: &TpArgs) -> CliResult<Outcome> {
    let raw: Value = inputs.load(args.family)?;
    let mut p = ConstructedProduct::from_json(raw).map_err(|e| CliError(format!("{}: {e}", args.family)))?;
    if let Some(c) = args.clamp {
        p = p.with_clamp(c);
    }
    let stem = p.family().stem();
    let opts = SearchOptions {
        restarts: args.restarts,
        seed: args.seed,
        ..Default::default()
    };
    let factors = match (args.g, args.h) {
        (Some(g), Some(h)) => Some(match stem {
            Stem::Simplex => {
                let (g, h): (PolyCone, PolyCone) = (inputs.load(g)?, inputs.load(h)?);
                inputs.guard(g.dim() * h.dim(), "tensor product")?;
                Factors::Cones(g, h)
            }
            Stem::Operator => {
                let (g, h): (OperatorSystem, OperatorSystem) = (inputs.load(g)?, inputs.load(h)?);
                inputs.guard(g.space_dim() * h.space_dim(), "tensor product")?;
                Factors::Systems(g, h)
            }
        }),
        (None, None) => None,
        _ => return Err(CliError("--g and --h go together".into())),
    };

    let gate = contains_min_check(p.family());
    let mut checks = vec![Check::new("tp.family", Status::Pass)
        .detail("entries", p.family().entries().len())
        .detail("stem", to_value(&stem))
        .detail("clamp_max", u8::from(p.clamp_max()))
        .detail("contains_min", u8::from(gate.holds))];
    checks.push(min_gate(&p, gate.holds, factors.as_ref(), args, &opts)?);

    let mut output = json!({ "family": p.to_json() });
    if let Some(Factors::Cones(g, h)) = &factors {
        let cone = p.cone(g, h)?;
        if p.clamp_max() {
            let inside = cone.subset_of(&max_tensor(g, h)?)?;
            checks.push(Check::new("tp.inside_max", Status::from_bool(inside)));
        }
        output["cone"] = to_value(&cone.dd_convert());
    }
    if let Some(path) = args.x {
        let check = match &factors {
            None => return Err(CliError("--x needs --g and --h".into())),
            Some(Factors::Cones(g, h)) => {
                let a: RationalList = inputs.load(path)?;
                let member = tp_member_cone(&p, g, h, &a.0)?;
                Check::new("tp.member", Status::from_bool(member)).witness(rational_json(&a.0))
            }
            Some(Factors::Systems(g, h)) => {
                let a: SystemElement = inputs.load(path)?;
                let v = tp_member_opsys(&p, g, h, &a, &opts)?;
                let status = match v.tag {
                    Tag::In => Status::Pass,
                    Tag::Out => Status::Fail,
                    Tag::Unknown => Status::Unknown,
                };
                Check::new("tp.member", status)
                    .detail("certified", u8::from(v.certified))
                    .evidence(to_value(&v.witness))
            }
        };
        checks.push(check);
    }
    Ok((checks, Some(output)))
}

/// When the gate holds, sampled minimal-product generators must be members;
/// when it fails, a violating generator should turn up.
fn min_gate(
    p: &ConstructedProduct,
    holds: bool,
    factors: Option<&Factors>,
    args: &TpArgs,
    opts: &SearchOptions,
) -> CliResult<Check> {
    let name = "tp.min_gate";
    if !holds {
        let check = match find_min_violation(p, opts)? {
            Some(MinViolation::Cone { entry, g, h, a }) => Check::new(name, Status::Pass).evidence(json!({
                "entry": entry, "g": to_value(&g), "h": to_value(&h), "a": rational_json(&a),
            })),
            Some(MinViolation::System { entry, g, h, a }) => Check::new(name, Status::Pass).evidence(json!({
                "entry": entry, "g": to_value(&g), "h": to_value(&h), "a": to_value(&a),
            })),
            None => Check::new(name, Status::Unknown).detail("searched", 1),
        };
        return Ok(check.detail("gate", 0));
    }
    let mut r = rng(args.seed);
    match (p.family().stem(), factors) {
        (Stem::Simplex, f) => {
            let (g, h) = match f {
                Some(Factors::Cones(g, h)) => (g.clone(), h.clone()),
                _ => (random_proper_cone(&mut r, 2, 3, 3), random_proper_cone(&mut r, 2, 3, 3)),
            };
            let gens = min_tensor(&g, &h)?.generators();
            for _ in 0..args.samples {
                let a = &gens[r.random_range(0..gens.len())];
                if !tp_member_cone(p, &g, &h, &to_rat_vec(a))? {
                    return Ok(Check::new(name, Status::Fail).detail("gate", 1).witness(json!({
                        "g": to_value(&g), "h": to_value(&h), "a": int_json(a),
                    })));
                }
            }
            Ok(Check::new(name, Status::Pass).detail("gate", 1).detail("samples", args.samples))
        }
        (Stem::Operator, f) => {
            let pairs: Vec<(OperatorSystem, OperatorSystem)> = match f {
                Some(Factors::Systems(g, h)) => vec![(g.clone(), h.clone())],
                _ => {
                    let s = [OperatorSystem::trivial(), OperatorSystem::intrinsic(2)];
                    s.iter().flat_map(|g| s.iter().map(move |h| (g.clone(), h.clone()))).collect()
                }
            };
            let mut tested = 0;
            let mut undecided = 0;
            for (g, h) in &pairs {
                let truncation = g.truncation().min(h.truncation());
                for x in g.generators()? {
                    for y in h.generators()? {
                        let a = x.kron(&y);
                        if a.level() > truncation {
                            continue;
                        }
                        tested += 1;
                        let v = tp_member_opsys(p, g, h, &a, opts)?;
                        match v.tag {
                            Tag::Out => {
                                return Ok(Check::new(name, Status::Fail).detail("gate", 1).witness(json!({
                                    "g": to_value(g), "h": to_value(h), "a": to_value(&a),
                                    "verdict": to_value(&v),
                                })))
                            }
                            Tag::Unknown => undecided += 1,
                            Tag::In => {}
                        }
                    }
                }
            }
            Ok(Check::new(name, Status::Pass)
                .detail("gate", 1)
                .detail("tested", tested)
                .detail("undecided", undecided))
        }
    }
}
