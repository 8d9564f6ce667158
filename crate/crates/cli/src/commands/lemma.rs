use qmacc_core::qcore::linalg::{outer, re};
use qmacc_core::qcore::random::{random_density, random_effect_in};
use qmacc_core::qcore::{DensityMatrix, Layout, StateVector, TwoOutcomeMeasurement, Vector};
use qmacc_core::qlemmas::{
    good_as_new_check, or_bound_monte_carlo, or_bound_tight_instance, or_bound_run, random_or_instance,
    random_union_instance, union_bound_run, InducedFamily, BOUND_SLACK,
};
use qmacc_core::seeding::{self, child_seed};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::args::{GoodAsNewArgs, GoodAsNewInstance, OrBoundArgs, UnionArgs};
use crate::report::{CliResult, Report};
use crate::Ctx;

const TIGHT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `|0⟩` measured by the projector onto `|+⟩`.
pub fn equality_instance() -> CliResult<(DensityMatrix, TwoOutcomeMeasurement)> {
    let zero = StateVector::basis(Layout::single("a", 1), 0)?;
    let plus = Vector::from_vec(vec![re(TIGHT), re(TIGHT)]);
    Ok((zero.to_density(), TwoOutcomeMeasurement::new(outer(&plus))?))
}

pub fn good_as_new(ctx: &Ctx, args: &GoodAsNewArgs) -> CliResult<Report> {
    let (rho, m, tight) = match args.instance {
        GoodAsNewInstance::Equality => {
            let (rho, m) = equality_instance()?;
            (rho, m, true)
        }
        GoodAsNewInstance::Random => {
            let mut rng = seeding::rng(child_seed(ctx.seed, "good-as-new"));
            let q = args.qubits as usize;
            let d = 1usize << q;
            let rank = rng.gen_range(1..=d);
            let rho = DensityMatrix::new(random_density(&mut rng, d, rank), Layout::single("a", q))?;
            let m = TwoOutcomeMeasurement::new(random_effect_in(&mut rng, d, 0.0, 0.95))?;
            (rho, m, false)
        }
    };
    let r = good_as_new_check(&rho, &m)?;
    let equality = tight.then(|| (r.damage - TIGHT).abs() <= 1e-9 && (r.bound - TIGHT).abs() <= 1e-9);
    let pass = r.pass && equality.unwrap_or(true);
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "instance": format!("{:?}", args.instance).to_lowercase(), "qubits": rho.layout().total_qubits() }),
        pass,
        result: json!({ "lemma": r.to_lemma_report(), "equality_attained": equality }),
        records: vec![json!({
            "epsilon": r.epsilon, "damage": r.damage, "bound": r.bound, "pass": r.pass, "equality_attained": equality,
        })],
    })
}

pub fn union(ctx: &Ctx, args: &UnionArgs) -> CliResult<Report> {
    let records: Vec<serde_json::Value> = (0..args.trials)
        .into_par_iter()
        .map(|t| -> CliResult<serde_json::Value> {
            let mut rng = seeding::trial_rng(ctx.seed, t);
            let inst = random_union_instance(&mut rng, args.max_qubits as usize, args.max_t as usize)?;
            let r = union_bound_run(&inst.rho, &inst.seq, inst.epsilon)?;
            Ok(json!({
                "trial": t,
                "dim": inst.rho.dim(),
                "t_steps": r.t_steps,
                "epsilon": r.parameter,
                "p_any_one": r.p_any_one,
                "bound": r.bound,
                "drift": r.averaged_state_drift,
                "pass": r.pass,
            }))
        })
        .collect::<CliResult<_>>()?;
    let passes = records.iter().filter(|r| r["pass"] == true).count();
    let worst = records
        .iter()
        .map(|r| {
            let (p, b) = (r["p_any_one"].as_f64().unwrap_or(0.0), r["bound"].as_f64().unwrap_or(0.0));
            if b > 0.0 { p / b } else { 0.0 }
        })
        .fold(0.0, f64::max);
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "trials": args.trials, "max_qubits": args.max_qubits, "max_t": args.max_t }),
        pass: passes == records.len(),
        result: json!({ "trials": records.len(), "passes": passes, "max_ratio_to_bound": worst, "slack": BOUND_SLACK }),
        records,
    })
}

pub fn or_bound(ctx: &Ctx, args: &OrBoundArgs) -> CliResult<Report> {
    let mut records = Vec::new();
    let mut pass = true;
    for &w in &args.witness_qubits {
        let inst = or_bound_tight_instance(w)?;
        let r = or_bound_run(&inst.rho, &inst.sigma, &inst.joint, inst.t_steps, None)?;
        let one_ninth = r.p_any_one >= 1.0 / 9.0 - BOUND_SLACK;
        pass &= r.pass && one_ninth;
        let mc = if ctx.shots > 0 {
            let family = InducedFamily::new(&inst.joint, inst.rho.dim(), None)?;
            let (est, se) = or_bound_monte_carlo(inst.rho.matrix(), &family, inst.t_steps, ctx.shots as usize, child_seed(ctx.seed, &format!("or-bound/{w}")));
            let floor = (r.p_any_one * (1.0 - r.p_any_one) / ctx.shots as f64).sqrt();
            json!({ "estimate": est, "std_error": se, "within_3se": (est - r.p_any_one).abs() <= 3.0 * se.max(floor) })
        } else {
            serde_json::Value::Null
        };
        records.push(json!({
            "kind": "tight",
            "witness_qubits": w,
            "n": inst.sigma.dim(),
            "t_steps": r.t_steps,
            "eta": r.parameter,
            "p_any_one": r.p_any_one,
            "bound": r.bound,
            "at_least_one_ninth": one_ninth,
            "pass": r.pass,
            "monte_carlo": mc,
        }));
    }
    for t in 0..args.random {
        let mut rng = seeding::trial_rng(child_seed(ctx.seed, "or-bound/random"), t);
        let (na, nb) = (rng.gen_range(1..=2usize), rng.gen_range(1..=2usize));
        let inst = random_or_instance(&mut rng, 1 << na, 1 << nb)?;
        let r = or_bound_run(&inst.rho, &inst.sigma, &inst.joint, inst.t_steps, None)?;
        pass &= r.pass;
        records.push(json!({
            "kind": "random",
            "trial": t,
            "n": inst.sigma.dim(),
            "t_steps": r.t_steps,
            "eta": r.parameter,
            "p_any_one": r.p_any_one,
            "bound": r.bound,
            "pass": r.pass,
        }));
    }
    let min_margin = records
        .iter()
        .map(|r| r["p_any_one"].as_f64().unwrap_or(0.0) - r["bound"].as_f64().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "witness_qubits": args.witness_qubits, "random": args.random, "shots": ctx.shots }),
        pass,
        result: json!({ "instances": records.len(), "min_margin_over_bound": min_margin }),
        records,
    })
}
