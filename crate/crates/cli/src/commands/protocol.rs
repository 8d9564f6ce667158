use qmacc_core::amplify::{audit_amplification, pad_witness, plan_amplification, AmplificationPlan, PlanRequest};
use qmacc_core::demerlin::{
    audit_demerlinized, demerlinize, monte_carlo, resource_report, threshold_post_pass, DemerlinReport, DemerlinizedProtocol,
};
use qmacc_core::protocol::{toys, CommunicationFunction, OneWayQmaProtocol};
use qmacc_core::seeding::child_seed;
use serde_json::{json, Value};

use crate::args::{AmplifyToy, DemerlinArgs, DemerlinToy, PlanArgs};
use crate::report::{CliError, CliResult, Report};
use crate::Ctx;

pub fn plan(ctx: &Ctx, args: &PlanArgs) -> CliResult<Report> {
    if args.toy == AmplifyToy::Coin && args.a != 1 {
        return Err(CliError::Invalid("the coin toy has one advice qubit; use --a 1".into()));
    }
    let mut records = Vec::new();
    let mut pass = true;
    for &w in &args.w {
        let req = PlanRequest { a: args.a, w, base_error: args.base_error, c_ell: args.c_ell, c_u: args.c_u };
        let plan = plan_amplification(req)?;
        pass &= plan.is_valid();
        let audit = match args.toy {
            AmplifyToy::None => Value::Null,
            AmplifyToy::Coin => {
                let p = pad_witness(&toys::coin_toy(), w - 1)?;
                let a = audit_amplification(&p, &toys::coin_function(), &plan)?;
                pass &= a.soundness_pass && a.completeness_pass;
                json!({
                    "ln_max_no": a.ln_max_no,
                    "ln_soundness_target": plan.ln_soundness_target,
                    "max_completeness_error": a.max_completeness_error,
                    "all_exact": a.records.iter().all(|r| r.exact),
                    "soundness_pass": a.soundness_pass,
                    "completeness_pass": a.completeness_pass,
                })
            }
        };
        records.push(json!({ "plan": plan, "valid": plan.is_valid(), "audit": audit }));
    }
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({
            "a": args.a, "w": args.w, "base_error": args.base_error, "c_ell": args.c_ell, "c_u": args.c_u,
            "toy": format!("{:?}", args.toy).to_lowercase(),
        }),
        pass,
        result: json!({ "plans": records.len() }),
        records,
    })
}

fn toy(t: DemerlinToy) -> (OneWayQmaProtocol, CommunicationFunction) {
    match t {
        DemerlinToy::Rac2 => (toys::rac2(), toys::rac2_function()),
        DemerlinToy::Coin => (toys::coin_toy(), toys::coin_function()),
    }
}

fn build_loop(args: &DemerlinArgs) -> CliResult<(DemerlinizedProtocol, CommunicationFunction)> {
    let (p, f) = toy(args.toy);
    let s = p.sizes();
    let plan = AmplificationPlan::manual(s.advice, s.witness, 1.0 / 3.0, args.ell, args.u)?;
    Ok((demerlinize(&p, &plan)?, f))
}

fn params(ctx: &Ctx, args: &DemerlinArgs) -> Value {
    json!({ "toy": format!("{:?}", args.toy).to_lowercase(), "ell": args.ell, "u": args.u, "shots": ctx.shots })
}

pub fn build(ctx: &Ctx, args: &DemerlinArgs) -> CliResult<Report> {
    let (d, _) = build_loop(args)?;
    let res = resource_report(&d);
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: params(ctx, args),
        pass: true,
        result: json!({
            "W": d.big_w(),
            "T": d.t_rounds(),
            "counter_qubits": d.counter_qubits().len(),
            "plan": d.plan(),
            "resources": res,
        }),
        records: vec![],
    })
}

pub fn run(ctx: &Ctx, args: &DemerlinArgs) -> CliResult<Report> {
    let (d, f) = build_loop(args)?;
    let audit = audit_demerlinized(&d, &f)?;
    let report = DemerlinReport::new(&audit, &resource_report(&d));

    // sample the instances that decide the gap
    let mut checks = Vec::new();
    if ctx.shots > 0 {
        let yes = audit.records.iter().filter(|r| r.f).min_by(|a, b| a.p_accept.total_cmp(&b.p_accept));
        let no = audit.records.iter().filter(|r| !r.f).max_by(|a, b| a.p_accept.total_cmp(&b.p_accept));
        for r in yes.into_iter().chain(no) {
            let seed = child_seed(ctx.seed, &format!("demerlin/{}/{}", r.x, r.y));
            let (est, se) = monte_carlo(&d, r.x, r.y, ctx.shots, seed)?;
            let floor = (r.p_accept * (1.0 - r.p_accept) / ctx.shots as f64).sqrt();
            checks.push(json!({
                "x": r.x, "y": r.y, "f": r.f, "exact": r.p_accept, "estimate": est, "std_error": se,
                "within_3se": (est - r.p_accept).abs() <= 3.0 * se.max(floor),
            }));
        }
    }
    let post = threshold_post_pass(audit.p_accept_yes_min, audit.p_accept_no_max, 1001);
    let records = audit.records.iter().map(|r| json!({ "x": r.x, "y": r.y, "f": r.f, "p_accept": r.p_accept })).collect();
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: params(ctx, args),
        pass: audit.pass(),
        result: json!({
            "report": report,
            "gap": audit.gap,
            "gap_pass": audit.gap_pass,
            "completeness_pass": audit.completeness_pass,
            "soundness_pass": audit.soundness_pass,
            "precondition": audit.precondition,
            "monte_carlo": checks,
            "post_pass": post,
        }),
        records,
    })
}
