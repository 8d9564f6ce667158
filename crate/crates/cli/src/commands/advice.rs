use qmacc_core::advice::toys::{advice_blind_qcma, advice_free_ma, bell_qcma, parity_ma, rotated_qma, witness_independent_qma};
use qmacc_core::advice::train::{j_for, sample_s};
use qmacc_core::advice::{j_fold_decision, ma_fix_advice, qcma_train as train, qma_fix_advice, s_decision, AdvisedVerifier, QcmaVerifier};
use qmacc_core::seeding::child_seed;
use serde_json::json;

use crate::args::{MaFixArgs, MaToy, QcmaToy, QcmaTrainArgs, QmaFixArgs, QmaToy};
use crate::report::{CliError, CliResult, Report};
use crate::Ctx;

/// Rejects a size flag that the fixed toy cannot honour.
fn fixed(name: &str, flag: &str, given: Option<usize>, actual: usize) -> CliResult<()> {
    match given {
        Some(g) if g != actual => Err(CliError::Invalid(format!("the {name} toy has {flag} {actual}, got {g}"))),
        _ => Ok(()),
    }
}

fn ma_verifier(args: &MaFixArgs) -> CliResult<AdvisedVerifier> {
    Ok(match args.toy {
        MaToy::Parity => parity_ma(args.n.unwrap_or(2), args.witness_bits.unwrap_or(1))?,
        MaToy::AdviceFree => {
            fixed("advice-free", "--n", args.n, 2)?;
            fixed("advice-free", "--witness-bits", args.witness_bits, 1)?;
            advice_free_ma()
        }
    })
}

pub fn ma_fix(ctx: &Ctx, args: &MaFixArgs) -> CliResult<Report> {
    let v = ma_verifier(args)?;
    let fix = ma_fix_advice(&v, child_seed(ctx.seed, "ma-fix"))?;
    let pass = fix.certificate.errors == 0;
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "toy": format!("{:?}", args.toy).to_lowercase(), "n": v.n(), "witness_bits": v.w() }),
        pass,
        result: serde_json::to_value(&fix)?,
        records: vec![],
    })
}

pub fn qma_fix(ctx: &Ctx, args: &QmaFixArgs) -> CliResult<Report> {
    let v = match args.toy {
        QmaToy::Rotated => {
            fixed("rotated", "--witness-bits", args.witness_bits, 1)?;
            rotated_qma(args.n.unwrap_or(2))?
        }
        QmaToy::WitnessIndependent => {
            fixed("witness-independent", "--n", args.n, 2)?;
            fixed("witness-independent", "--witness-bits", args.witness_bits, 1)?;
            witness_independent_qma()
        }
    };
    let fix = qma_fix_advice(&v)?;
    let pass = fix.errors == 0 && fix.records.iter().all(|r| r.correct && r.mixed_bound_holds);
    let records = fix.records.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
    let mut result = serde_json::to_value(&fix)?;
    if let Some(m) = result.as_object_mut() {
        m.remove("records");
    }
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "toy": format!("{:?}", args.toy).to_lowercase(), "n": v.n(), "witness_bits": v.w() }),
        pass,
        result,
        records,
    })
}

fn qcma_verifier(args: &QcmaTrainArgs) -> CliResult<QcmaVerifier> {
    let (name, v, n, a) = match args.toy {
        QcmaToy::Bell => ("bell", bell_qcma(), 2, 2),
        QcmaToy::Blind => ("blind", advice_blind_qcma(), 1, 1),
    };
    fixed(name, "--n", args.n, n)?;
    fixed(name, "--adv-qubits", args.adv_qubits, a)?;
    fixed(name, "--witness-bits", args.witness_bits, 1)?;
    Ok(v)
}

pub fn qcma_train(ctx: &Ctx, args: &QcmaTrainArgs) -> CliResult<Report> {
    let v = qcma_verifier(args)?;
    let w = v.w();
    let set = train(&v)?;
    let mut pass = set.audit.pass();
    let mut records = Vec::new();
    for d in &set.audit.decisions {
        let s = j_fold_decision(&d.lambdas, w)?;
        let decided = s_decision(s, w).ok();
        let agrees = decided == Some(d.in_language);
        pass &= agrees;
        let sampled = if ctx.shots > 0 {
            let seed = child_seed(ctx.seed, &format!("qcma-train/{}", d.x));
            json!(sample_s(&d.lambdas, w, ctx.shots as usize, seed)?)
        } else {
            serde_json::Value::Null
        };
        records.push(json!({
            "x": d.x,
            "in_language": d.in_language,
            "lambdas": d.lambdas,
            "s": s,
            "s_sampled": sampled,
            "decision": decided,
            "correct": agrees,
        }));
    }
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "toy": format!("{:?}", args.toy).to_lowercase(), "witness_bits": w, "shots": ctx.shots }),
        pass,
        result: json!({
            "plan": set.plan,
            "steps": set.steps,
            "p_t": set.p_t,
            "survival": set.survival,
            "skipped_degenerate": set.skipped_degenerate,
            "j": j_for(w),
            "audit": {
                "floor": set.audit.floor,
                "floor_pass": set.audit.floor_pass,
                "geometric_bound": set.audit.geometric_bound,
                "geometric_pass": set.audit.geometric_pass,
                "union_bound": set.audit.union_bound,
                "union_pass": set.audit.union_pass,
                "length_bound": set.audit.length_bound,
                "length_pass": set.audit.length_pass,
                "maximal": set.audit.maximal,
                "all_correct": set.audit.all_correct,
            },
        }),
        records,
    })
}
