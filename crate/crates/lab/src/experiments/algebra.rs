use diffprod_core::convolution::product_set_fast;
use diffprod_core::spectral::{
    check_pda_equals_vv, his_pair_exists, his_threshold_met, kloosterman_table, pda_threshold, vv_exact_count,
    VvInstance, CHAR_TOLERANCE,
};
use diffprod_core::structured::{draw_from, SetSpec};
use diffprod_core::{diffset, Rational};
use serde_json::json;

use super::{all, cell};
use crate::error::RunError;
use crate::registry::{Context, Experiment, Outcome, Pool, Table};

pub struct VvCount;

impl Experiment for VvCount {
    fn name(&self) -> &'static str {
        "vv-count"
    }

    fn about(&self) -> &'static str {
        "exact |VV| for the plane V = F + F xi with |F|^3 = q against the closed form"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let inst = VvInstance::new(&ctx.field)?;
        let c = vv_exact_count(&inst)?;
        let mut detail = Table::new(&["q", "subfield_size", "xi", "count", "criterion_count", "formula", "matches", "exceeds_half"]);
        detail.push(vec![
            cell(c.q),
            cell(c.subfield_size),
            cell(c.xi),
            cell(c.count),
            cell(c.criterion_count),
            cell(c.formula),
            cell(c.matches),
            cell(c.exceeds_half),
        ]);
        Ok(Outcome { passed: Some(c.matches && c.criterion_count == c.count), summary: json!(c), detail })
    }
}

pub struct HisCheck;

impl Experiment for HisCheck {
    fn name(&self) -> &'static str {
        "his-check"
    }

    fn about(&self) -> &'static str {
        "x u and v/x in A - A for A inside the plane V, by direct count and by characters"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let inst = VvInstance::new(&ctx.field)?;
        let nv = inst.v.len();
        let default_size = (1..=nv).find(|&n| his_threshold_met(&inst, n)).unwrap_or(nv);
        let spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n: ctx.size(default_size) });
        let units: Vec<u32> = inst.v.iter().filter(|&x| x != 0).collect();
        let mut detail = Table::new(&[
            "trial", "size", "u", "v", "witness", "direct_count", "character_value", "agrees", "guaranteed", "passed",
        ]);
        let mut results = Vec::new();
        for t in 0..ctx.trials(20) {
            let mut rng = ctx.rng(t);
            let a = ctx.build(&spec, Pool::Within(&inst.v), &mut rng)?;
            let u = draw_from(&units, 1, &mut rng)?[0];
            let v = draw_from(&units, 1, &mut rng)?[0];
            let rep = his_pair_exists(&inst, &a, u, v)?;
            detail.push(vec![
                cell(t),
                cell(a.len()),
                cell(u),
                cell(v),
                rep.witness.map(cell).unwrap_or_default(),
                cell(rep.direct_count),
                format!("{:.9}", rep.character_value),
                cell(rep.agrees),
                cell(rep.in_guaranteed_regime),
                cell(rep.passed()),
            ]);
            results.push(rep);
        }
        let passed = all(results.iter().map(|r| r.passed()));
        let found = results.iter().filter(|r| r.witness.is_some()).count();
        let summary = json!({
            "subfield_size": inst.sub.size(),
            "v_size": nv,
            "trials": results.len(),
            "pairs_found": found,
            "all_agree": all(results.iter().map(|r| r.agrees)),
        });
        Ok(Outcome { passed: Some(passed), summary, detail })
    }
}

pub struct PdaVv;

impl Experiment for PdaVv {
    fn name(&self) -> &'static str {
        "pda-vv"
    }

    fn about(&self) -> &'static str {
        "(A - A)(A - A) = VV for large A inside the plane V"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let inst = VvInstance::new(&ctx.field)?;
        let threshold = pda_threshold(inst.v.len());
        let spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n: ctx.size(threshold.min(inst.v.len())) });
        let mut detail = Table::new(&["trial", "size", "pda_size", "vv_size", "equal", "guaranteed"]);
        let mut ok = true;
        let mut equal = 0;
        let trials = ctx.trials(20);
        for t in 0..trials {
            let a = ctx.build(&spec, Pool::Within(&inst.v), &mut ctx.rng(t))?;
            let rep = check_pda_equals_vv(&inst, &a)?;
            ok &= rep.passed();
            equal += rep.equal as u64;
            detail.push(vec![
                cell(t),
                cell(rep.set_size),
                cell(rep.pda_size),
                cell(rep.vv_size),
                cell(rep.equal),
                cell(rep.in_guaranteed_regime),
            ]);
        }
        let summary = json!({ "v_size": inst.v.len(), "threshold": threshold, "trials": trials, "equal": equal });
        Ok(Outcome { passed: Some(ok), summary, detail })
    }
}

pub struct Kloosterman;

impl Experiment for Kloosterman {
    fn name(&self) -> &'static str {
        "kloosterman"
    }

    fn about(&self) -> &'static str {
        "Kloosterman sums over a subfield against the Weil bound"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let k = ctx.config.subfield.unwrap_or(ctx.field.r());
        let sub = ctx.field.subfield(k)?;
        let table = kloosterman_table(&sub)?;
        let tol = CHAR_TOLERANCE * (sub.size() - 1) as f64;
        let mut detail = Table::new(&["a", "b", "re", "im", "abs", "weil_bound", "within_weil"]);
        let mut ramanujan_ok = true;
        let mut max_abs: f64 = 0.0;
        for v in &table {
            if v.a != 0 && v.b == 0 {
                ramanujan_ok &= (v.re + 1.0).abs() <= tol && v.im.abs() <= tol;
            }
            if v.a != 0 || v.b != 0 {
                max_abs = max_abs.max(v.value().norm());
            }
            detail.push(vec![
                cell(v.a),
                cell(v.b),
                format!("{:.9}", v.re),
                format!("{:.9}", v.im),
                format!("{:.9}", v.value().norm()),
                format!("{:.9}", v.weil_bound),
                cell(v.within_weil),
            ]);
        }
        let weil_ok = all(table.iter().map(|v| v.within_weil));
        let summary = json!({
            "subfield_size": sub.size(),
            "max_abs": format!("{max_abs:.9}"),
            "weil_bound": format!("{:.9}", 2.0 * (sub.size() as f64).sqrt()),
            "tolerance": tol,
            "weil_ok": weil_ok,
            "ramanujan_ok": ramanujan_ok,
        });
        Ok(Outcome { passed: Some(weil_ok && ramanujan_ok), summary, detail })
    }
}

pub struct PdaThresholdScan;

impl Experiment for PdaThresholdScan {
    fn name(&self) -> &'static str {
        "pda-threshold-scan"
    }

    fn about(&self) -> &'static str {
        "fraction of random A with |(A - A)(A - A)| > q/2 (descriptive)"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n: ctx.size(50) });
        let q = ctx.field.q() as u64;
        let trials = ctx.trials(100);
        let mut detail = Table::new(&["trial", "size", "pda_size", "ratio_to_q", "exceeds_half"]);
        let mut hits = 0u64;
        for t in 0..trials {
            let a = ctx.build(&spec, Pool::Field, &mut ctx.rng(t))?;
            let d = diffset(&a, &a)?;
            let n = product_set_fast(&ctx.field, &d, &d)?.len() as u64;
            let over = 2 * n > q;
            hits += over as u64;
            detail.push(vec![cell(t), cell(a.len()), cell(n), cell(Rational::new(n as u128, q as u128)), cell(over)]);
        }
        let summary = json!({
            "q": q,
            "trials": trials,
            "exceeding_half": hits,
            "fraction": Rational::new(hits as u128, trials.max(1) as u128),
        });
        Ok(Outcome { passed: None, summary, detail })
    }
}
