use diffprod_core::convolution::{mul_convolution_with, product_of_differences_rep};
use diffprod_core::moments::{
    d_times, d_times_with_collinear, dilate_spectrum, extract_popular_dilates, four_set_bound,
    popular_dilate_window, verify_bkt, COLLINEAR_CAP,
};
use diffprod_core::structured::SetSpec;
use diffprod_core::{rep_function, FqSet, Rational, SetOp};
use serde_json::json;

use super::cell;
use crate::error::RunError;
use crate::registry::{Context, Experiment, Outcome, Pool, Table};

fn set_a(ctx: &Context, default: SetSpec, pool: Pool<'_>) -> Result<FqSet, RunError> {
    let spec = ctx.config.a.clone().unwrap_or(default);
    ctx.build(&spec, pool, &mut ctx.rng(0))
}

pub struct EnergySpectrum;

impl Experiment for EnergySpectrum {
    fn name(&self) -> &'static str {
        "energy-spectrum"
    }

    fn about(&self) -> &'static str {
        "E(A, xi A) for every nonzero xi, with the excess level set at --lambda"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let a = set_a(ctx, SetSpec::Random { n: ctx.size(16) }, Pool::Field)?;
        let s = dilate_spectrum(&a)?;
        let n = a.len() as u128;
        let q = ctx.field.q() as u128;
        let max_q = s.rows.iter().map(|r| r.q_xi).max().unwrap_or(0);
        let level = ctx.lambda() * Rational::integer(max_q);
        let mut detail = Table::new(&["xi", "energy", "excess", "normalized", "cauchy_schwarz", "popular"]);
        let mut cs_ok = true;
        let mut popular = 0usize;
        for r in &s.rows {
            // |A|^4 <= q E(A, xi A)
            let cs = n.pow(4) <= q * r.energy;
            cs_ok &= cs;
            let hot = max_q > 0 && Rational::integer(r.q_xi) >= level;
            popular += hot as usize;
            detail.push(vec![cell(r.xi), cell(r.energy), cell(r.q_xi), cell(r.e_xi), cell(cs), cell(hot)]);
        }
        let sum_ok = s.sum_e() <= Rational::integer(q * n * n);
        let summary = json!({
            "set_size": a.len(),
            "sum_excess": s.sum_q(),
            "sum_normalized": s.sum_e(),
            "sum_bound": q * n * n,
            "lambda": ctx.lambda(),
            "level": level,
            "popular": popular,
            "cauchy_schwarz_ok": cs_ok,
            "sum_ok": sum_ok,
        });
        Ok(Outcome { passed: Some(cs_ok && sum_ok), summary, detail })
    }
}

pub struct DxTimes;

impl Experiment for DxTimes {
    fn name(&self) -> &'static str {
        "dxtimes"
    }

    fn about(&self) -> &'static str {
        "multiplicative energy of A - A through the selected convolution kernel"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let a = set_a(ctx, SetSpec::Random { n: ctx.size(12) }, Pool::Field)?;
        let r = rep_function(&a, &a, SetOp::Diff)?;
        let conv = mul_convolution_with(ctx.kernel.as_ref(), &r, &r)?;
        let via_kernel = conv.second_moment();
        let reference = product_of_differences_rep(&a, &a, &a, &a)?.second_moment();
        let rep = if a.len() <= COLLINEAR_CAP { d_times_with_collinear(&a, COLLINEAR_CAP)? } else { d_times(&a)? };
        let n = a.len() as u128;
        let collinear_ok = rep.collinear.map(|t| rep.d_times <= n * n * t);
        let four = four_set_bound(&a, &a, &a, &a)?;
        let kernel_ok = via_kernel == rep.d_times && reference == rep.d_times;
        let cs_ok = rep.cs_lower_bound.is_none_or(|lb| lb <= Rational::integer(rep.distinct as u128));

        let mut detail = Table::new(&["quantity", "value"]);
        for (k, v) in [
            ("kernel", ctx.kernel.name().to_string()),
            ("d_times_kernel", cell(via_kernel)),
            ("d_times", cell(rep.d_times)),
            ("d_zero", cell(rep.d_zero)),
            ("d_star", cell(rep.d_star)),
            ("distinct", cell(rep.distinct)),
            ("collinear", rep.collinear.map(cell).unwrap_or_default()),
            ("four_set_holds", cell(four.holds)),
        ] {
            detail.push(vec![k.to_string(), v]);
        }
        let summary = json!({
            "set_size": a.len(),
            "kernel": ctx.kernel.name(),
            "moments": rep,
            "kernel_agrees": kernel_ok,
            "cauchy_schwarz_ok": cs_ok,
            "collinear_bound_ok": collinear_ok,
            "four_set": four,
        });
        let passed = kernel_ok && cs_ok && collinear_ok != Some(false) && four.holds;
        Ok(Outcome { passed: Some(passed), summary, detail })
    }
}

pub struct DilateWindow;

impl Experiment for DilateWindow {
    fn name(&self) -> &'static str {
        "theoremB"
    }

    fn about(&self) -> &'static str {
        "popular dilates of A and the size window for the chosen K"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let a = set_a(ctx, SetSpec::Subfield { k: 1 }, Pool::Field)?;
        let window = popular_dilate_window(&a)?;
        let k = ctx.config.k.or(window.map(|w| w.0)).unwrap_or(Rational::integer(1));
        let out = extract_popular_dilates(&a, k)?;
        let mut detail = Table::new(&["xi"]);
        if let Some(x) = &out.x {
            for xi in x.iter() {
                detail.push(vec![cell(xi)]);
            }
        }
        let summary = json!({
            "set_size": a.len(),
            "window": window.map(|(lo, hi)| json!({ "lo": lo, "hi": hi })),
            "k": out.k,
            "d_times": out.d_times,
            "d_required": out.d_required,
            "size_ok": out.size_ok,
            "moment_ok": out.moment_ok,
            "x_size": out.x.as_ref().map(FqSet::len),
            "lower": out.lower,
            "upper": out.upper,
            "bounds_hold": out.bounds_hold,
        });
        Ok(Outcome { passed: out.bounds_hold, summary, detail })
    }
}

pub struct Bkt;

impl Experiment for Bkt {
    fn name(&self) -> &'static str {
        "bkt"
    }

    fn about(&self) -> &'static str {
        "sum over S of E(A, xi B) against |A|^2|B|^2 + |S||A||B|, with a large |A + xi B|"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let n = ctx.size(8);
        let a_spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n });
        let b_spec = ctx.config.b.first().cloned().unwrap_or(SetSpec::Random { n });
        let units = ctx.field.q() as usize - 1;
        let s_spec = ctx.config.x.clone().unwrap_or(SetSpec::Random { n: (n * n).min(units) });
        let mut detail = Table::new(&["trial", "a", "b", "s", "energy_sum", "bound", "holds", "witness", "witness_sumset", "witness_ok"]);
        let mut ok = true;
        let trials = ctx.trials(100);
        for t in 0..trials {
            let mut rng = ctx.rng(t);
            let a = ctx.build(&a_spec, Pool::Field, &mut rng)?;
            let b = ctx.build(&b_spec, Pool::Field, &mut rng)?;
            let s = ctx.build(&s_spec, Pool::Units, &mut rng)?;
            let r = verify_bkt(&a, &b, &s)?;
            ok &= r.holds && r.witness_ok;
            detail.push(vec![
                cell(t),
                cell(a.len()),
                cell(b.len()),
                cell(s.len()),
                cell(r.energy_sum),
                cell(r.bound),
                cell(r.holds),
                cell(r.witness),
                cell(r.witness_sumset),
                cell(r.witness_ok),
            ]);
        }
        let holds = detail.rows.iter().filter(|r| r[6] == "true").count();
        let summary = json!({ "trials": trials, "bound_holds": holds, "all_ok": ok });
        Ok(Outcome { passed: Some(ok), summary, detail })
    }
}

pub struct FourSetScan;

impl Experiment for FourSetScan {
    fn name(&self) -> &'static str {
        "theoremE-scan"
    }

    fn about(&self) -> &'static str {
        "|(A - B)(C - D)| for random equal-size quadruples, with the four-set moment bound"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let q = ctx.field.q() as u128;
        let n = ctx.size(((q as f64).sqrt().ceil() as usize).max(2));
        let spec = SetSpec::Random { n };
        let trials = ctx.trials(20);
        let mut detail = Table::new(&["trial", "size", "distinct", "ratio_to_q", "d_times", "ordered", "holds"]);
        let mut ok = true;
        let mut covered = 0u64;
        for t in 0..trials {
            let mut rng = ctx.rng(t);
            let sets: Vec<FqSet> = (0..4).map(|_| ctx.build(&spec, Pool::Field, &mut rng)).collect::<Result<_, _>>()?;
            let r = product_of_differences_rep(&sets[0], &sets[1], &sets[2], &sets[3])?;
            let distinct = r.support().len() as u128;
            covered += (distinct == q) as u64;
            let b = four_set_bound(&sets[0], &sets[1], &sets[2], &sets[3])?;
            ok &= !b.ordered || b.holds;
            detail.push(vec![
                cell(t),
                cell(n),
                cell(distinct),
                cell(Rational::new(distinct, q)),
                cell(b.d_times),
                cell(b.ordered),
                cell(b.holds),
            ]);
        }
        let summary = json!({ "q": q, "size": n, "trials": trials, "whole_field": covered, "all_hold": ok });
        Ok(Outcome { passed: Some(ok), summary, detail })
    }
}
