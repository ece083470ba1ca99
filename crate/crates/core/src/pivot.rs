//! Pivots and involved elements for a pair `(W, X)` with `W ⊆ F_q` and
//! `X ⊆ F_q^*`, together with checks of their closure and span structure.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::field::{Elem, SubfieldHandle};
use crate::rational::Rational;
use crate::sets::{dimension_over, generated_subfield, span_over_subfield, sumset, FqSet};

fn big(n: usize) -> BigUint {
    BigUint::from(n)
}

/// `(W, X)` together with the measured doubling constants.
#[derive(Clone, Debug, Serialize)]
pub struct PivotInstance {
    pub w: FqSet,
    pub x: FqSet,
    /// `|W + XW|`.
    pub n1: usize,
    /// `|W + W|`.
    pub n2: usize,
    /// `max_{x in X} |W + xW|`.
    pub n3: usize,
    pub k1: Rational,
    pub k2: Rational,
    pub k3: Rational,
}

impl PivotInstance {
    pub fn measure(w: &FqSet, x: &FqSet) -> Result<Self> {
        w.same_field(x)?;
        if w.is_empty() || x.is_empty() {
            return Err(LabError::Precondition("W and X must be nonempty".into()));
        }
        if x.contains(0) {
            return Err(LabError::InvalidArgument("X must not contain 0".into()));
        }
        let field = w.field();
        let mut xw = FqSet::empty(field);
        let mut n3 = 0;
        for s in x.iter() {
            let d = w.dilate(s);
            n3 = n3.max(sumset(w, &d)?.len());
            xw = xw.union(&d);
        }
        let n1 = sumset(w, &xw)?.len();
        let n2 = sumset(w, w)?.len();
        let nw = w.len() as u128;
        Ok(PivotInstance {
            w: w.clone(),
            x: x.clone(),
            n1,
            n2,
            n3,
            k1: Rational::new(n1 as u128, nw),
            k2: Rational::new(n2 as u128, nw),
            k3: Rational::new(n3 as u128, nw),
        })
    }

    /// `K1^4 K2 K3^4 < |X|`.
    pub fn span_hypothesis(&self) -> bool {
        let nw = self.w.len();
        big(self.n1).pow(4) * big(self.n2) * big(self.n3).pow(4) < big(self.x.len()) * big(nw).pow(9)
    }

    /// `K1^2 K3^3 < |X|`.
    pub fn multiplication_hypothesis(&self) -> bool {
        let nw = self.w.len();
        big(self.n1).pow(2) * big(self.n3).pow(3) < big(self.x.len()) * big(nw).pow(5)
    }

    /// `K1^2 K3^2 |W|`.
    pub fn involved_bound(&self) -> Rational {
        let nw = self.w.len() as u128;
        Rational::new((self.n1 as u128).pow(2) * (self.n3 as u128).pow(2), nw.pow(3))
    }
}

/// `|W + X xi|`.
pub fn image_size(w: &FqSet, x: &FqSet, xi: Elem) -> usize {
    let field = w.field();
    let mut img = FqSet::empty(field);
    for a in x.iter() {
        let shift = field.mul(a, xi);
        for v in w.iter() {
            img.insert(field.add(v, shift));
        }
    }
    img.len()
}

/// Whether `(v, alpha) -> v + alpha xi` is injective on `W x X`.
pub fn is_pivot(w: &FqSet, x: &FqSet, xi: Elem) -> bool {
    image_size(w, x, xi) == w.len() * x.len()
}

/// A collision `v1 + alpha1 xi = v2 + alpha2 xi`, i.e. `xi = (alpha1 - alpha2)^{-1}(v2 - v1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub xi: Elem,
    pub alpha1: Elem,
    pub alpha2: Elem,
    pub v1: Elem,
    pub v2: Elem,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvolvedReport {
    pub involved: FqSet,
    /// `vspan_F(W)` with `F` the subfield generated by `X`.
    pub span: FqSet,
    pub subfield_size: u32,
    pub k1: Rational,
    pub k2: Rational,
    pub k3: Rational,
    pub hypotheses_hold: bool,
    /// First witness per involved element, in encoding order.
    pub witnesses: Vec<Witness>,
}

/// Involved elements via the collision formula, with one witness each.
pub fn involved_set(w: &FqSet, x: &FqSet) -> Result<InvolvedReport> {
    let inst = PivotInstance::measure(w, x)?;
    let field = w.field();
    let xs = x.to_vec();
    let ws = w.to_vec();
    let per_alpha: Vec<BTreeMap<Elem, Witness>> = xs
        .par_iter()
        .map(|&a1| {
            let mut found = BTreeMap::new();
            for &a2 in &xs {
                if a1 == a2 {
                    continue;
                }
                let inv = field.inv(field.sub(a1, a2)).expect("distinct scalars");
                for &v1 in &ws {
                    for &v2 in &ws {
                        let xi = field.mul(inv, field.sub(v2, v1));
                        found.entry(xi).or_insert(Witness { xi, alpha1: a1, alpha2: a2, v1, v2 });
                    }
                }
            }
            found
        })
        .collect();
    let mut merged: BTreeMap<Elem, Witness> = BTreeMap::new();
    for m in per_alpha {
        for (k, v) in m {
            merged.entry(k).or_insert(v);
        }
    }
    // Every collision is a genuine failure of injectivity; re-check it.
    for wit in merged.values() {
        debug_assert!(!is_pivot(w, x, wit.xi));
    }
    let involved = FqSet::from_elems(field, merged.keys().copied())?;
    let sub = generated_subfield(x)?;
    let span = span_over_subfield(w, &sub)?;
    Ok(InvolvedReport {
        involved,
        span,
        subfield_size: sub.size(),
        k1: inst.k1,
        k2: inst.k2,
        k3: inst.k3,
        hypotheses_hold: inst.span_hypothesis(),
        witnesses: merged.into_values().collect(),
    })
}

/// `F_q` minus the pivots, by testing every element.
pub fn involved_brute_force(w: &FqSet, x: &FqSet) -> Result<FqSet> {
    w.same_field(x)?;
    let field = w.field();
    let flags: Vec<bool> = field.elements().into_par_iter().map(|xi| !is_pivot(w, x, xi)).collect();
    FqSet::from_elems(field, flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Elem))
}

#[derive(Clone, Debug, Serialize)]
pub struct InvolvedBound {
    pub xi: Elem,
    pub image: usize,
    /// `K1^2 K3^2 |W|`.
    pub bound: Rational,
    pub holds: bool,
}

/// `|W + X xi| <= K1^2 K3^2 |W|` for an involved `xi`.
pub fn verify_involved_bound(w: &FqSet, x: &FqSet, xi: Elem) -> Result<InvolvedBound> {
    let inst = PivotInstance::measure(w, x)?;
    w.field().check(xi as u64)?;
    if is_pivot(w, x, xi) {
        return Err(LabError::Precondition(format!("{xi} is a pivot, not an involved element")));
    }
    let image = image_size(w, x, xi);
    let nw = w.len();
    let holds = big(image) * big(nw).pow(3) <= big(inst.n1).pow(2) * big(inst.n3).pow(2);
    Ok(InvolvedBound { xi, image, bound: inst.involved_bound(), holds })
}

/// `<X>_x`: the multiplicative subgroup generated by `X`, without 0.
pub fn multiplicative_closure(x: &FqSet) -> Result<FqSet> {
    let field = x.field();
    let n = field.unit_order();
    let g = x
        .iter()
        .filter_map(|e| field.log(e))
        .fold(n, |acc, l| acc.gcd(&l));
    FqSet::from_elems(field, (0..n / g).map(|i| field.exp(i as u64 * g as u64)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub additive_hypothesis: bool,
    pub multiplicative_hypothesis: bool,
    /// `I ± I ⊆ I`, when the additive hypothesis holds.
    pub additive_closed: Option<bool>,
    /// `<X>_x I ⊆ I`, when the multiplicative hypothesis holds.
    pub multiplicative_closed: Option<bool>,
    /// First offending element for each failed check.
    pub violations: Vec<Elem>,
    pub involved_size: usize,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.additive_closed != Some(false) && self.multiplicative_closed != Some(false)
    }
}

pub fn verify_closure(w: &FqSet, x: &FqSet) -> Result<ClosureReport> {
    let inst = PivotInstance::measure(w, x)?;
    let field = w.field();
    let involved = involved_set(w, x)?.involved;
    let elems = involved.to_vec();
    let mut violations = Vec::new();

    let additive_hypothesis = inst.span_hypothesis();
    let additive_closed = additive_hypothesis.then(|| {
        let bad = elems.par_iter().find_map_first(|&a| {
            elems.iter().find_map(|&b| {
                let (s, d) = (field.add(a, b), field.sub(a, b));
                (!involved.contains(s)).then_some(s).or((!involved.contains(d)).then_some(d))
            })
        });
        if let Some(v) = bad {
            violations.push(v);
        }
        bad.is_none()
    });

    let multiplicative_hypothesis = inst.multiplication_hypothesis();
    let multiplicative_closed = if multiplicative_hypothesis {
        let group = multiplicative_closure(x)?;
        let bad = group
            .iter()
            .find_map(|g| elems.iter().map(|&a| field.mul(g, a)).find(|&y| !involved.contains(y)));
        if let Some(v) = bad {
            violations.push(v);
        }
        Some(bad.is_none())
    } else {
        None
    };

    Ok(ClosureReport {
        additive_hypothesis,
        multiplicative_hypothesis,
        additive_closed,
        multiplicative_closed,
        violations,
        involved_size: elems.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanReport {
    pub hypotheses_hold: bool,
    pub involved_size: usize,
    pub span_size: usize,
    pub subfield_size: u32,
    /// `|span| = |F|^d`.
    pub dimension: Option<u32>,
    pub involved_equals_span: bool,
    /// `|W| >= |span| / (2 K1^2 K3^2)`.
    pub size_bound_holds: bool,
    pub k1: Rational,
    pub k2: Rational,
    pub k3: Rational,
}

impl SpanReport {
    /// Both conclusions, required only under the hypotheses.
    pub fn passed(&self) -> bool {
        !self.hypotheses_hold || (self.involved_equals_span && self.size_bound_holds)
    }
}

pub fn verify_span_theorem(w: &FqSet, x: &FqSet) -> Result<SpanReport> {
    let inst = PivotInstance::measure(w, x)?;
    let rep = involved_set(w, x)?;
    let sub: SubfieldHandle = generated_subfield(x)?;
    let nw = w.len();
    let size_bound_holds = big(2) * big(inst.n1).pow(2) * big(inst.n3).pow(2) >= big(rep.span.len()) * big(nw).pow(3);
    Ok(SpanReport {
        hypotheses_hold: inst.span_hypothesis(),
        involved_size: rep.involved.len(),
        span_size: rep.span.len(),
        subfield_size: sub.size(),
        dimension: dimension_over(&rep.span, &sub),
        involved_equals_span: rep.involved == rep.span,
        size_bound_holds,
        k1: inst.k1,
        k2: inst.k2,
        k3: inst.k3,
    })
}

/// Subfield and dimension detected for `(W, X)`, with the size window of the
/// specialization to `|F| = q^{1/3}`, `d = 2`.
#[derive(Clone, Debug, Serialize)]
pub struct CubeStructure {
    pub span: SpanReport,
    /// `q^{1/4} < |X| < q^{1/2}` and `q^{1/2} < |W| <= q^{2/3}`.
    pub size_window: bool,
    pub is_cube_root_plane: bool,
}

pub fn detect_cube_structure(w: &FqSet, x: &FqSet) -> Result<CubeStructure> {
    let span = verify_span_theorem(w, x)?;
    let q = big(w.field().q() as usize);
    let (nx, nw) = (big(x.len()), big(w.len()));
    let size_window = nx.pow(4) > q && nx.pow(2) < q && nw.pow(2) > q && nw.pow(3) <= q.pow(2);
    let f = big(span.subfield_size as usize);
    let is_cube_root_plane = f.pow(3) == q && span.dimension == Some(2);
    Ok(CubeStructure { span, size_window, is_cube_root_plane })
}
