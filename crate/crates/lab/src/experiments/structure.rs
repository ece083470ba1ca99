use diffprod_core::bsg::{bsg_extract, energy_to_structure};
use diffprod_core::moments::energy;
use diffprod_core::plunnecke::{verify_plunnecke_ruzsa, PlunneckeForm};
use diffprod_core::structured::SetSpec;
use diffprod_core::{FqSet, LabError, Rational};
use serde_json::json;

use super::{all, cell};
use crate::error::RunError;
use crate::registry::{Context, Experiment, Outcome, Pool, Table};

pub struct Plunnecke;

impl Experiment for Plunnecke {
    fn name(&self) -> &'static str {
        "plunnecke"
    }

    fn about(&self) -> &'static str {
        "sumset inequalities for A and the summands given by --B"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let mut rng = ctx.rng(0);
        let a_spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n: ctx.size(8) });
        let b_specs = if ctx.config.b.is_empty() {
            vec![SetSpec::Random { n: 5 }, SetSpec::Random { n: 5 }]
        } else {
            ctx.config.b.clone()
        };
        let a = ctx.build(&a_spec, Pool::Field, &mut rng)?;
        let bs: Vec<FqSet> = b_specs.iter().map(|s| ctx.build(s, Pool::Field, &mut rng)).collect::<Result<_, _>>()?;
        let h = bs.len();
        let mut forms = vec![
            PlunneckeForm::DifferentSummands,
            PlunneckeForm::LargeSubset,
            PlunneckeForm::MixedSigns { minus: (0..h.saturating_sub(1)).map(|i| i % 2 == 0).collect() },
        ];
        if h == 2 {
            forms.push(PlunneckeForm::Triangle);
        }
        let mut detail = Table::new(&["form", "lhs", "rhs", "holds", "witness_size"]);
        let mut reports = Vec::new();
        for form in forms {
            let r = verify_plunnecke_ruzsa(&a, &bs, form)?;
            detail.push(vec![
                r.form.name().to_string(),
                cell(r.lhs),
                cell(r.rhs),
                cell(r.holds),
                r.witness.as_ref().map(|w| cell(w.len())).unwrap_or_default(),
            ]);
            reports.push(r);
        }
        let passed = all(reports.iter().map(|r| r.holds));
        let summary = json!({
            "a_size": a.len(),
            "b_sizes": bs.iter().map(FqSet::len).collect::<Vec<_>>(),
            "ratios": reports.first().map(|r| r.ratios.clone()),
            "forms": reports.iter().map(|r| json!({ "form": r.form.name(), "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds })).collect::<Vec<_>>(),
        });
        Ok(Outcome { passed: Some(passed), summary, detail })
    }
}

pub struct Bsg;

impl Experiment for Bsg {
    fn name(&self) -> &'static str {
        "bsg"
    }

    fn about(&self) -> &'static str {
        "large subsets with small sumset extracted from pairs with large additive energy"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let n = ctx.size(16);
        let a_spec = ctx.config.a.clone().unwrap_or(SetSpec::Random { n });
        let b_spec = ctx.config.b.first().cloned().unwrap_or(SetSpec::Random { n });
        let trials = ctx.trials(10);
        let mut detail = Table::new(&[
            "trial", "a", "b", "energy", "k", "a_prime", "a_prime_bound", "b_prime", "b_prime_bound", "sumset",
            "sumset_bound", "status",
        ]);
        let (mut held, mut degenerate) = (0u64, 0u64);
        for t in 0..trials {
            let mut rng = ctx.rng(t);
            let a = ctx.build(&a_spec, Pool::Field, &mut rng)?;
            let b = ctx.build(&b_spec, Pool::Field, &mut rng)?;
            match bsg_extract(&a, &b) {
                Ok(c) => {
                    held += c.holds() as u64;
                    detail.push(vec![
                        cell(t),
                        cell(a.len()),
                        cell(b.len()),
                        cell(c.energy),
                        format!("{:.6}", c.k),
                        cell(c.a_prime_size),
                        format!("{:.6}", c.a_prime_bound),
                        cell(c.b_prime_size),
                        format!("{:.6}", c.b_prime_bound),
                        cell(c.sumset_size),
                        format!("{:.6}", c.sumset_bound),
                        if c.holds() { "holds" } else { "violated" }.to_string(),
                    ]);
                }
                Err(LabError::Precondition(_)) => {
                    degenerate += 1;
                    let mut row = vec![cell(t), cell(a.len()), cell(b.len())];
                    row.extend(std::iter::repeat_n(String::new(), 8));
                    row.push("degenerate".to_string());
                    detail.push(row);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let summary = json!({ "trials": trials, "holds": held, "degenerate": degenerate });
        Ok(Outcome { passed: Some(held + degenerate == trials), summary, detail })
    }
}

pub struct Structure;

impl Experiment for Structure {
    fn name(&self) -> &'static str {
        "structure"
    }

    fn about(&self) -> &'static str {
        "from many energetic dilates to a subset of A nearly closed under a set of dilates"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, RunError> {
        let mut rng = ctx.rng(0);
        let a_spec = ctx.config.a.clone().unwrap_or(SetSpec::Vspace { d: 2, k: 1 });
        let x_spec = ctx.config.x.clone().unwrap_or(SetSpec::Units { k: 1 });
        let a = ctx.build(&a_spec, Pool::Field, &mut rng)?;
        let x = ctx.build(&x_spec, Pool::Units, &mut rng)?;
        let k = match ctx.config.k {
            Some(k) => k,
            None => {
                let mut total = 0u128;
                for xi in x.iter() {
                    total += energy(&a, xi, &a)?;
                }
                if total == 0 {
                    return Err(RunError::Config("X must be nonempty".into()));
                }
                Rational::new((a.len() as u128).pow(3) * x.len() as u128, total)
            }
        };
        let c = energy_to_structure(&a, &x, k)?;
        let mut detail = Table::new(&["b", "left", "right", "sumset", "holds"]);
        for e in &c.extractions {
            detail.push(vec![
                cell(e.b),
                cell(e.left.len()),
                cell(e.right.len()),
                cell(e.certificate.sumset_size),
                cell(e.certificate.holds()),
            ]);
        }
        let passed = all(c.extractions.iter().map(|e| e.certificate.holds()));
        let summary = json!({
            "a_size": a.len(),
            "x_size": x.len(),
            "k": c.k,
            "energy_sum": c.energy_sum,
            "popular_dilates": c.popular_dilates.selected.len(),
            "skipped": c.skipped,
            "x0": c.x0,
            "a_prime": c.a_prime.len(),
            "x_prime": c.x_prime.len(),
            "a1": c.a1.len(),
            "sum_ratio": c.sum_ratio,
            "diff_ratio": c.diff_ratio,
            "ambient_ratio": c.ambient_ratio,
            "self_ratio": c.self_ratio,
            "dilate_ratio": c.dilate_ratio,
            "a1_fraction": c.a1_fraction,
            "x_fraction": c.x_fraction,
            "x_prime_field": c.x_prime_field,
            "exponents": c.exponents,
        });
        Ok(Outcome { passed: Some(passed), summary, detail })
    }
}
