//! Operator-system commands: verify-sandwich, verify-p, osys.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use conelab::opsys::{
    block_positive_check, in_p, max_tensor_sys, min_tensor_sys, ppt_check, product_search, psd_member,
    random_cmatrix, to_list, Witness,
};
use conelab::random::{random_subdual_system, rng};
use conelab::selfdual::{selfdual_extend_system, ExtensionStatus, SystemExtensionOptions};
use conelab::{HermElement, OperatorSystem, SystemElement, Tag, Verdict};

use crate::cones::Outcome;
use crate::input::{CliError, CliResult, Inputs};
use crate::report::{Check, Status};

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

/// `Σ_{i<min(m,n)} e_i ⊗ e_i`, unnormalized, as a projector on `C^m ⊗ C^n`.
fn bell(m: usize, n: usize) -> HermElement {
    let mn = m * n;
    let mut rows = vec![vec![0.0; mn]; mn];
    for i in 0..m.min(n) {
        for j in 0..m.min(n) {
            rows[i * n + i][j * n + j] = 1.0;
        }
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    HermElement::from_real_rows(&refs).expect("symmetric")
}

/// PASS on `want`, FAIL on the opposite tag, UNKNOWN otherwise.
fn verdict_status(v: &Verdict, want: Tag) -> Status {
    if v.tag == want {
        Status::Pass
    } else if v.tag == Tag::Unknown {
        Status::Unknown
    } else {
        Status::Fail
    }
}

pub struct SandwichArgs {
    pub m: usize,
    pub n: usize,
    pub restarts: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn verify_sandwich(inputs: &Inputs, args: &SandwichArgs) -> CliResult<Outcome> {
    let (m, n) = (args.m, args.n);
    if m < 2 || n < 2 {
        return Err(CliError("--m and --n must be at least 2".into()));
    }
    inputs.guard(m * n, "psd product")?;
    let tol = 1e-12;
    let b = bell(m, n);
    // the partial transpose of Bell; SWAP when m = n
    let w = b.partial_transpose(m, n)?;
    let mut checks = Vec::new();

    let v = psd_member(&b, tol);
    checks.push(Check::new("sandwich.bell_psd", verdict_status(&v, Tag::In)).detail("min_eig", b.min_eig().0));

    let v = ppt_check(&b, m, n, tol)?;
    let mut c = Check::new("sandwich.bell_not_separable", verdict_status(&v, Tag::Out));
    if let Some(Witness::Eigenvector { value, .. }) = &v.witness {
        c = c.detail("ppt_witness_eigenvalue", *value);
    }
    checks.push(c.evidence(to_value(&v.witness)));

    let v = psd_member(&w, tol);
    checks.push(
        Check::new("sandwich.swap_not_psd", verdict_status(&v, Tag::Out))
            .detail("min_eig", w.min_eig().0)
            .evidence(to_value(&v.witness)),
    );

    let (best, factors) = product_search(&w, &[m, n], args.restarts, args.seed)?;
    let v = block_positive_check(&w, m, n, args.restarts, 1e-9, args.seed)?;
    let mut c = Check::new("sandwich.swap_block_positive", verdict_status(&v, Tag::In))
        .detail("product_minimum", best)
        .detail("restarts", args.restarts)
        .detail("certified", u8::from(v.certified));
    c = if c.status == Status::Pass {
        c.evidence(to_value(&v.witness))
    } else {
        c.witness(json!({ "factors": factors.iter().map(to_list).collect::<Vec<_>>() }))
    };
    checks.push(c);

    let mut r = rng(args.seed);
    let size = m * n;
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    for i in 0..args.samples {
        let p = HermElement::random_psd(&mut r, size, 1 + i % size);
        let q = HermElement::random_psd(&mut r, size, 1 + (i / size) % size);
        let t = p.trace_pair(&q);
        if t < worst {
            worst = t;
            worst_pair = Some((p, q));
        }
    }
    let c = Check::new("sandwich.middle_pairing", Status::from_bool(worst >= -1e-10))
        .detail("samples", args.samples)
        .detail("minimum", if worst.is_finite() { worst } else { 0.0 });
    checks.push(c.witness(worst_pair.map_or(Value::Null, |(p, q)| json!({ "a": to_value(&p), "b": to_value(&q) }))));

    let wanted = (args.samples / 5).max(1);
    let (mut rejected, mut failure) = (0, None);
    while rejected < wanted && failure.is_none() {
        let x = HermElement::random(&mut r, size);
        if x.min_eig().0 >= 0.0 {
            continue;
        }
        let (lo, vec) = x.min_eig();
        let val = x.trace_pair(&HermElement::projector(&vec));
        if val < 0.0 {
            rejected += 1;
        } else {
            failure = Some(json!({ "element": to_value(&x), "min_eig": lo, "pairing": val }));
        }
    }
    checks.push(
        Check::new("sandwich.middle_rejection", Status::from_bool(failure.is_none()))
            .detail("rejected", rejected)
            .witness(failure.unwrap_or(Value::Null)),
    );
    Ok((checks, None))
}

pub struct PArgs {
    pub random: usize,
    pub k: usize,
    pub level: usize,
    pub generators: usize,
    pub compressions: usize,
    pub seed: u64,
}

fn scaled_in_p(x: &SystemElement, tol: f64) -> Verdict {
    in_p(x, tol * x.norm().powi(2).max(1.0))
}

/// Part (i) when `G ⊆ G^∨`: generators lie in `P`; part (ii): compressions
/// of members of `P` stay in `P`.
fn p_checks(name: &str, sys: &OperatorSystem, compressions: usize, seed: u64) -> CliResult<Vec<Check>> {
    let tol = 1e-9;
    let gens = sys.generators()?;
    let dual = sys.dual_system();
    let mut outside_dual = None;
    for (i, g) in gens.iter().enumerate() {
        if dual.level_member(g, tol)?.tag != Tag::In {
            outside_dual = Some(i);
            break;
        }
    }
    let subdual = outside_dual.is_none();
    let mut checks = vec![Check::new(format!("{name}.subdual"), Status::from_bool(subdual))
        .detail("generators", gens.len())
        .witness(json!({ "generator": outside_dual }))];

    let verdicts: Vec<Verdict> = gens.iter().map(|g| scaled_in_p(g, tol)).collect();
    let not_in: Vec<usize> = (0..gens.len()).filter(|&i| !verdicts[i].is_in()).collect();
    let status = match (not_in.is_empty(), subdual) {
        (true, _) => Status::Pass,
        (false, true) => Status::Fail,
        (false, false) => Status::Unknown,
    };
    let mut c = Check::new(format!("{name}.generators_in_p"), status).detail("outside", not_in.len());
    if let Some(&i) = not_in.first() {
        c = c.witness(json!({ "index": i, "element": to_value(&gens[i]), "verdict": to_value(&verdicts[i]) }));
    }
    checks.push(c);

    let mut r = rng(seed);
    let (mut tried, mut failure) = (0, None);
    'outer: for (i, g) in gens.iter().enumerate() {
        if !verdicts[i].is_in() {
            continue;
        }
        for _ in 0..compressions {
            let p = r.random_range(1..=3);
            let y = g.compress(&random_cmatrix(&mut r, g.level(), p))?;
            tried += 1;
            if !scaled_in_p(&y, tol).is_in() {
                failure = Some(json!({ "generator": i, "element": to_value(&y) }));
                break 'outer;
            }
        }
    }
    checks.push(
        Check::new(format!("{name}.compressions_in_p"), Status::from_bool(failure.is_none()))
            .detail("compressions", tried)
            .witness(failure.unwrap_or(Value::Null)),
    );
    Ok(checks)
}

pub fn verify_p(inputs: &mut Inputs, path: Option<&str>, args: &PArgs) -> CliResult<Outcome> {
    if let Some(path) = path {
        let sys: OperatorSystem = inputs.load(path)?;
        inputs.guard(sys.space_dim(), path)?;
        return Ok((p_checks("p", &sys, args.compressions, args.seed)?, None));
    }
    if args.k == 0 || args.level == 0 {
        return Err(CliError("--k and --level must be positive".into()));
    }
    inputs.guard(args.k * args.k, "matrix system")?;
    inputs.guard(args.k * args.level, "realization")?;
    let width = args.random.saturating_sub(1).to_string().len().max(3);
    let nested: CliResult<Vec<Vec<Check>>> = (0..args.random)
        .into_par_iter()
        .map(|s| {
            let seed = args.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(s as u64);
            let mut r = rng(seed);
            let n = r.random_range(1..=args.level);
            let count = r.random_range(1..=args.generators.max(1));
            let sys = random_subdual_system(&mut r, n, args.k, count);
            p_checks(&format!("p[{s:0width$}]"), &sys, args.compressions, seed ^ 1)
        })
        .collect();
    Ok((nested?.into_iter().flatten().collect(), None))
}

fn load_system(inputs: &mut Inputs, path: &str) -> CliResult<OperatorSystem> {
    let s: OperatorSystem = inputs.load(path)?;
    inputs.guard(s.space_dim(), path)?;
    Ok(s)
}

fn member_check(name: &str, sys: &OperatorSystem, x: &SystemElement, tol: f64) -> CliResult<Check> {
    let v = sys.level_member(x, tol)?;
    let c = Check::new(name, verdict_status(&v, Tag::In))
        .detail("level", x.level())
        .detail("certified", u8::from(v.certified));
    Ok(if c.status == Status::Fail {
        c.witness(to_value(&v.witness))
    } else {
        c.evidence(to_value(&v.witness))
    })
}

/// Random elements at levels `1..=levels`: half with random coefficients,
/// half sums of compressed generators when a generated form exists.
fn sample_elements(sys: &OperatorSystem, levels: usize, samples: usize, seed: u64) -> CliResult<Vec<SystemElement>> {
    let mut r = rng(seed);
    let gens = sys.generators().ok();
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let level = 1 + i % levels.min(sys.truncation()).max(1);
        let x = match (&gens, i % 2) {
            (Some(g), 1) => {
                let mut acc = SystemElement::zero(sys.space_dim(), level);
                for _ in 0..2 {
                    let pick = &g[r.random_range(0..g.len())];
                    acc = acc.add(&pick.compress(&random_cmatrix(&mut r, pick.level(), level))?)?;
                }
                acc
            }
            _ => SystemElement::new(
                level,
                (0..sys.space_dim()).map(|_| HermElement::random(&mut r, level)).collect(),
            )?,
        };
        out.push(x);
    }
    Ok(out)
}

pub fn osys_dual(inputs: &mut Inputs, path: &str, samples: usize, levels: usize, seed: u64) -> CliResult<Outcome> {
    let sys = load_system(inputs, path)?;
    let dual = sys.dual_system();
    let back = dual.dual_system();
    let tol = 1e-8;
    let (mut agreed, mut undecided, mut mismatch) = (0, 0, None);
    for x in sample_elements(&sys, levels, samples, seed)? {
        let a = sys.level_member(&x, tol)?.tag;
        let b = back.level_member(&x, tol)?.tag;
        if a == Tag::Unknown || b == Tag::Unknown {
            undecided += 1;
        } else if a == b {
            agreed += 1;
        } else {
            mismatch = Some(json!({ "element": to_value(&x), "system": to_value(&a), "bidual": to_value(&b) }));
            break;
        }
    }
    let status = match (&mismatch, agreed) {
        (Some(_), _) => Status::Fail,
        (None, 0) if samples > 0 => Status::Unknown,
        (None, _) => Status::Pass,
    };
    let checks = vec![Check::new("osys.biduality", status)
        .detail("agreed", agreed)
        .detail("undecided", undecided)
        .witness(mismatch.unwrap_or(Value::Null))];
    Ok((checks, Some(json!({ "system": to_value(&dual) }))))
}

pub fn osys_member(inputs: &mut Inputs, path: &str, element: &str, tol: f64) -> CliResult<Outcome> {
    let sys = load_system(inputs, path)?;
    let x: SystemElement = inputs.load(element)?;
    let check = member_check("osys.member", &sys, &x, tol)?;
    Ok((vec![check], None))
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum SystemKind {
    Min,
    Max,
}

pub fn osys_tensor(
    inputs: &mut Inputs,
    a: &str,
    b: &str,
    kind: SystemKind,
    truncation: Option<usize>,
    element: Option<&str>,
) -> CliResult<Outcome> {
    let g = load_system(inputs, a)?;
    let h = load_system(inputs, b)?;
    inputs.guard(g.space_dim() * h.space_dim(), "tensor product")?;
    let t = truncation.unwrap_or(g.truncation().min(h.truncation()));
    let product = match kind {
        SystemKind::Min => min_tensor_sys(&g, &h, t)?,
        SystemKind::Max => max_tensor_sys(&g, &h, t)?,
    };
    let mut checks = vec![Check::new("osys.product_proper", Status::from_bool(product.is_proper()))
        .detail("space_dim", product.space_dim())
        .detail("truncation", t)];
    if let Some(path) = element {
        let x: SystemElement = inputs.load(path)?;
        checks.push(member_check("osys.member", &product, &x, 1e-8)?);
    }
    Ok((checks, Some(json!({ "system": to_value(&product) }))))
}

pub struct SystemSelfdualArgs {
    pub eps: f64,
    pub levels: usize,
    pub max_iter: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn osys_selfdualize(inputs: &mut Inputs, path: &str, args: &SystemSelfdualArgs) -> CliResult<Outcome> {
    let sys = load_system(inputs, path)?;
    let opts = SystemExtensionOptions {
        eps: args.eps,
        levels: args.levels,
        max_iter: args.max_iter,
        seed: args.seed,
        samples: args.samples,
        ..Default::default()
    };
    let (e, trace) = selfdual_extend_system(&sys, &opts)?;
    let tol = 1e-8;
    let before = sys.generators()?;
    let after = e.generators()?;
    let kept = before.iter().all(|g| after.contains(g));
    let mut checks = vec![Check::new("osys.selfdual.contains_input", Status::from_bool(kept))];

    let dual = e.dual_system();
    let mut outside = None;
    for (i, g) in after.iter().enumerate() {
        if dual.level_member(g, tol)?.tag != Tag::In {
            outside = Some(i);
            break;
        }
    }
    checks.push(
        Check::new("osys.selfdual.invariant", Status::from_bool(outside.is_none()))
            .detail("generators", after.len())
            .witness(outside.map_or(Value::Null, |i| json!({ "generator": to_value(&after[i]) }))),
    );
    let not_p = trace.added_rays.iter().position(|x| !scaled_in_p(x, 1e-9).is_in());
    checks.push(
        Check::new("osys.selfdual.added_in_p", Status::from_bool(not_p.is_none()))
            .detail("added", trace.added_rays.len())
            .witness(not_p.map_or(Value::Null, |i| to_value(&trace.added_rays[i]))),
    );
    let res = trace.final_residual();
    let status = if res <= args.eps {
        Status::Pass
    } else if trace.status == ExtensionStatus::IterationCap {
        Status::Unknown
    } else {
        Status::Fail
    };
    checks.push(
        Check::new("osys.selfdual.residual", status)
            .detail("residual", res)
            .detail("eps", args.eps)
            .detail("iterations", trace.iterations),
    );
    Ok((
        checks,
        Some(json!({ "system": to_value(&e), "trace": to_value(&trace) })),
    ))
}
