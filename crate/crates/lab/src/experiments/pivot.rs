use diffprod_core::pivot::{
    detect_cube_structure, image_size, involved_brute_force, involved_set, verify_closure, PivotInstance,
};
use diffprod_core::structured::SetSpec;
use diffprod_core::{FqSet, Rational};
use serde_json::json;

use super::cell;
use crate::error::RunError;
use crate::registry::{Context, Experiment, Outcome, Pool, Table};

/// `(W, X)` from `--W` and `--X`, defaulting to a plane over the prime field and its units.
fn pair(ctx: &Context) -> Result<(FqSet, FqSet), RunError> {
    let mut rng = ctx.rng(0);
    let w_spec = ctx.config.w.clone().unwrap_or(SetSpec::Vspace { d: 2, k: 1 });
    let x_spec = ctx.config.x.clone().unwrap_or(SetSpec::Units { k: 1 });
    let w = ctx.build(&w_spec, Pool::Field, &mut rng)?;
    let x = ctx.build(&x_spec, Pool::Units, &mut rng)?;
    Ok((w, x))
}

fn constants(inst: &PivotInstance) -> serde_json::Value {
    json!({
        "w_size": inst.w.len(),
        "x_size": inst.x.len(),
        "k1": inst.k1,
        "k2": inst.k2,
        "k3": inst.k3,
        "span_hypothesis": inst.span_hypothesis(),
        "multiplication_hypothesis": inst.multiplication_hypothesis(),
    })
}

pub struct Pivot;

impl Experiment for Pivot {
    fn name(&self) -> &'static str {
        "pivot"
    }

    fn about(&self) -> &'static str {
        "involved elements by the collision formula against an injectivity scan"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let (w, x) = pair(ctx)?;
        let inst = PivotInstance::measure(&w, &x)?;
        let rep = involved_set(&w, &x)?;
        let brute = involved_brute_force(&w, &x)?;
        let agrees = rep.involved == brute;
        let bound = inst.involved_bound();
        let mut detail = Table::new(&["xi", "alpha1", "alpha2", "v1", "v2", "image", "bound_holds"]);
        let mut bound_ok = true;
        for wit in &rep.witnesses {
            let image = image_size(&w, &x, wit.xi);
            let holds = Rational::integer(image as u128) <= bound;
            bound_ok &= holds;
            detail.push(vec![
                cell(wit.xi),
                cell(wit.alpha1),
                cell(wit.alpha2),
                cell(wit.v1),
                cell(wit.v2),
                cell(image),
                cell(holds),
            ]);
        }
        let summary = json!({
            "instance": constants(&inst),
            "involved": rep.involved.len(),
            "brute_force": brute.len(),
            "span": rep.span.len(),
            "subfield_size": rep.subfield_size,
            "agrees": agrees,
            "image_bound": bound,
            "image_bound_holds": bound_ok,
        });
        Ok(Outcome { passed: Some(agrees && bound_ok), summary, detail })
    }
}

pub struct Closure;

impl Experiment for Closure {
    fn name(&self) -> &'static str {
        "closure"
    }

    fn about(&self) -> &'static str {
        "additive and multiplicative closure of the involved set under small doubling"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let (w, x) = pair(ctx)?;
        let inst = PivotInstance::measure(&w, &x)?;
        let rep = verify_closure(&w, &x)?;
        let mut detail = Table::new(&["violation"]);
        for v in &rep.violations {
            detail.push(vec![cell(v)]);
        }
        let summary = json!({ "instance": constants(&inst), "closure": rep });
        Ok(Outcome { passed: Some(rep.passed()), summary, detail })
    }
}

pub struct Span;

impl Experiment for Span {
    fn name(&self) -> &'static str {
        "span"
    }

    fn about(&self) -> &'static str {
        "involved set equals the subfield span of W, with the cube-root plane detector"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let (w, x) = pair(ctx)?;
        let cube = detect_cube_structure(&w, &x)?;
        let s = &cube.span;
        let mut detail = Table::new(&["quantity", "value"]);
        for (k, v) in [
            ("hypotheses_hold", cell(s.hypotheses_hold)),
            ("involved_size", cell(s.involved_size)),
            ("span_size", cell(s.span_size)),
            ("subfield_size", cell(s.subfield_size)),
            ("dimension", s.dimension.map(cell).unwrap_or_default()),
            ("involved_equals_span", cell(s.involved_equals_span)),
            ("size_bound_holds", cell(s.size_bound_holds)),
            ("size_window", cell(cube.size_window)),
            ("is_cube_root_plane", cell(cube.is_cube_root_plane)),
        ] {
            detail.push(vec![k.to_string(), v]);
        }
        Ok(Outcome { passed: Some(s.passed()), summary: json!(cube), detail })
    }
}
