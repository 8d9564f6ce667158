use qmacc_core::rac::fingerprint::{bits_of, FingerprintFamily};
use qmacc_core::rac::reduce::{audit_ordinary, audit_randomized, tight_reduction, RandomizedRac};
use qmacc_core::rac::{audit_rac, build_code, default_code, RacParams};
use qmacc_core::seeding::{self, child_seed};
use rand::Rng;
use serde_json::json;

use crate::args::{FingerprintArgs, RacAuditArgs, RacReduceArgs};
use crate::report::{CliResult, Report};
use crate::Ctx;

pub fn audit(ctx: &Ctx, args: &RacAuditArgs) -> CliResult<Report> {
    let mut records = Vec::new();
    let mut pass = true;
    for &n in &args.n {
        for &w in &args.w {
            let code = match args.code_seed {
                Some(s) => build_code(w, 4, s)?,
                None => default_code(w)?,
            };
            let params = match args.a {
                Some(a) => RacParams::new(n, a, w)?,
                None => RacParams::covering(n, w)?,
            };
            let a = audit_rac(&code, &params)?;
            pass &= a.pass();
            records.push(json!({
                "n": n,
                "a": params.a,
                "w": w,
                "big_w": a.big_w,
                "min_distance": a.verified_min_distance,
                "delta": a.delta,
                "completeness": a.completeness,
                "honest_outputs_correct": a.honest_outputs_correct,
                "min_detection": a.min_detection,
                "repetitions": a.repetitions,
                "soundness_after_r": a.soundness_after_r,
                "pass": a.pass(),
            }));
        }
    }
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "n": args.n, "w": args.w, "a": args.a, "code_seed": args.code_seed }),
        pass,
        result: json!({ "audits": records.len() }),
        records,
    })
}

pub fn reduce(ctx: &Ctx, args: &RacReduceArgs) -> CliResult<Report> {
    let code = default_code(args.w)?;
    let params = RacParams::covering(args.n, args.w)?;
    let base_audit = audit_rac(&code, &params)?;
    let base = RandomizedRac::from_code(&code, &params, base_audit.repetitions)?;
    let randomized = audit_randomized(&base)?;
    let reduced = tight_reduction(&base, child_seed(ctx.seed, "reduce"))?;
    let ordinary = audit_ordinary(&reduced)?;
    let pass = randomized.pass && ordinary.pass;
    let record = json!({
        "n": args.n,
        "w": args.w,
        "a": params.a,
        "rounds": base_audit.repetitions,
        "base_max_error": randomized.max_error,
        "copies": ordinary.copies,
        "message_bits": ordinary.message_bits,
        "per_message_error": ordinary.per_message_error,
        "max_error": ordinary.max_error,
        "all_exact": ordinary.all_exact,
        "pass": pass,
    });
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "n": args.n, "w": args.w }),
        pass,
        result: record.clone(),
        records: vec![record],
    })
}

pub fn fingerprint(ctx: &Ctx, args: &FingerprintArgs) -> CliResult<Report> {
    let family = FingerprintFamily::for_capacity(args.len, args.m)?;
    let bound = 2f64.powi(-(args.m as i32 - 1));
    let all_ones = (1u64 << args.len) - 1;
    let mut rng = seeding::rng(child_seed(ctx.seed, "fingerprint/pair"));
    let a = rng.gen_range(0..=all_ones);
    let b = (a + rng.gen_range(1..=all_ones)) & all_ones;
    let mut pass = true;
    let mut records = Vec::new();
    for (label, x, y) in [("neighbours", 0, 1), ("complements", 0, all_ones), ("seeded", a, b)] {
        let (hits, keys) = family.exact_collisions(&bits_of(x, args.len), &bits_of(y, args.len))?;
        let rate = hits as f64 / keys as f64;
        pass &= rate <= bound;
        records.push(json!({ "pair": label, "a": x, "b": y, "hits": hits, "keys": keys, "rate": rate, "bound": bound, "pass": rate <= bound }));
    }
    let mc = if ctx.shots > 0 && args.len <= 16 {
        let (rate, trials) = family.sampled_all_pairs_rate(args.len, ctx.shots as usize, child_seed(ctx.seed, "fingerprint/all"))?;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        let ok = rate <= bound + 3.0 * sigma;
        pass &= ok;
        json!({ "rate": rate, "trials": trials, "three_sigma_ceiling": bound + 3.0 * sigma, "pass": ok })
    } else {
        serde_json::Value::Null
    };
    Ok(Report {
        command: ctx.command.clone(),
        seed: ctx.seed,
        params: json!({ "len": args.len, "m": args.m, "shots": ctx.shots }),
        pass,
        result: json!({ "p": family.p, "m": family.m, "capacity": family.capacity(), "bound": bound, "all_pairs": mc }),
        records,
    })
}
