//! Product sets of planes over the cube-root subfield, the quadratic root
//! criterion, Kloosterman sums and the difference-pairing criterion.

use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::convolution::product_set_fast;
use crate::error::{LabError, Result};
use crate::field::{Elem, FieldTower, SubfieldHandle};
use crate::rational::Rational;
use crate::sets::{diffset, rep_function, FqSet, SetOp};

/// Absolute tolerance per summand for character sums.
pub const CHAR_TOLERANCE: f64 = 1e-6;

/// `V = F + F xi` with `|F|^3 = q`.
#[derive(Clone, Debug)]
pub struct VvInstance {
    pub sub: SubfieldHandle,
    pub xi: Elem,
    pub v: FqSet,
    /// `coords[x] = Some((c0, c1))` with `x = c0 + c1 xi` for `x` in `V`.
    coords: Vec<Option<(Elem, Elem)>>,
}

impl VvInstance {
    /// `xi` is the least element outside `F` with `xi^2` outside `F + F xi`.
    pub fn new(field: &Arc<FieldTower>) -> Result<Self> {
        if !field.r().is_multiple_of(3) {
            return Err(LabError::NotADivisor { k: 3, r: field.r() });
        }
        let sub = field.subfield(field.r() / 3)?;
        let plane = |xi: Elem| {
            let mut coords = vec![None; field.q() as usize];
            for c0 in sub.elements().iter() {
                for c1 in sub.elements().iter() {
                    coords[field.add(c0, field.mul(c1, xi)) as usize] = Some((c0, c1));
                }
            }
            coords
        };
        for xi in field.elements() {
            if sub.contains(xi) {
                continue;
            }
            let coords = plane(xi);
            if coords[field.mul(xi, xi) as usize].is_some() {
                continue;
            }
            let v = FqSet::from_elems(
                field,
                coords.iter().enumerate().filter(|(_, c)| c.is_some()).map(|(i, _)| i as Elem),
            )?;
            return Ok(VvInstance { sub, xi, v, coords });
        }
        Err(LabError::InvariantViolation("no element of degree 3 over the cube-root subfield".into()))
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        self.v.field()
    }

    /// Coordinates of `x` in the basis `{1, xi}`.
    pub fn coords(&self, x: Elem) -> Option<(Elem, Elem)> {
        self.coords.get(x as usize).copied().flatten()
    }

    /// Coordinatewise bilinear form on `V`.
    pub fn dot(&self, x: Elem, y: Elem) -> Option<Elem> {
        let f = self.field();
        let (a0, a1) = self.coords(x)?;
        let (b0, b1) = self.coords(y)?;
        Some(f.add(f.mul(a0, b0), f.mul(a1, b1)))
    }
}

/// Closed form for `|VV|` given `|F| = s`: `(s^3 + 2s^2 - s)/2`
/// in odd characteristic and `(s^3 + s^2)/2` in characteristic 2.
///
/// The characteristic-2 branch undercounts. Summing the trace criterion over all triples
/// gives `s^2 + (s-1)(2s-1) + (s-1)^2(s/2 - 1) = (s^3 + 2s^2 - s)/2` there too,
/// and direct enumeration agrees (7 at `q = 8`, 46 at `q = 64`).
pub fn vv_formula(s: u64, p: u32) -> u64 {
    if p == 2 {
        (s * s * s + s * s) / 2
    } else {
        (s * s * s + 2 * s * s - s) / 2
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VvCount {
    pub q: u32,
    pub subfield_size: u32,
    pub xi: Elem,
    pub count: u64,
    /// Triples `(a, b, c)` in `F^3` passing [`quadratic_root_criterion`].
    pub criterion_count: u64,
    pub formula: u64,
    pub matches: bool,
    /// `2|VV| > q`.
    pub exceeds_half: bool,
}

pub fn vv_exact_count(inst: &VvInstance) -> Result<VvCount> {
    let field = inst.field();
    let count = product_set_fast(field, &inst.v, &inst.v)?.len() as u64;
    let formula = vv_formula(inst.sub.size() as u64, field.p());
    Ok(VvCount {
        q: field.q(),
        subfield_size: inst.sub.size(),
        xi: inst.xi,
        count,
        criterion_count: criterion_count(&inst.sub)?,
        formula,
        matches: count == formula,
        exceeds_half: 2 * count > field.q() as u64,
    })
}

/// Whether `z^2 - bz + ac` has a root in `F`, decided by the discriminant in odd
/// characteristic and by the trace of `ac/b^2` in characteristic 2.
pub fn quadratic_root_criterion(sub: &SubfieldHandle, a: Elem, b: Elem, c: Elem) -> Result<bool> {
    for e in [a, b, c] {
        if !sub.contains(e) {
            return Err(LabError::InvalidArgument(format!("{e} is not in the subfield")));
        }
    }
    let f = sub.field();
    let ac = f.mul(a, c);
    if f.p() == 2 {
        if b == 0 {
            return Ok(true);
        }
        let w = f.div(ac, f.mul(b, b)).expect("b nonzero");
        return Ok(sub.trace_to_prime(w)? == 0);
    }
    let four = f.add(f.add(1, 1), f.add(1, 1));
    let disc = f.sub(f.mul(b, b), f.mul(four, ac));
    sub.is_square(disc)
}

fn criterion_count(sub: &SubfieldHandle) -> Result<u64> {
    let e = sub.elements().to_vec();
    let mut n = 0;
    for &a in &e {
        for &b in &e {
            for &c in &e {
                n += quadratic_root_criterion(sub, a, b, c)? as u64;
            }
        }
    }
    Ok(n)
}

/// Root search for `z^2 - bz + ac` over `F`.
pub fn quadratic_has_root(sub: &SubfieldHandle, a: Elem, b: Elem, c: Elem) -> bool {
    let f = sub.field();
    let ac = f.mul(a, c);
    sub.elements().iter().any(|z| f.add(f.sub(f.mul(z, z), f.mul(b, z)), ac) == 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct KloostermanValue {
    pub a: Elem,
    pub b: Elem,
    pub re: f64,
    pub im: f64,
    /// `2 |F|^{1/2}`.
    pub weil_bound: f64,
    pub within_weil: bool,
}

impl KloostermanValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `sum_{x in F^*} psi_F(ax + b/x)`.
pub fn kloosterman(sub: &SubfieldHandle, a: Elem, b: Elem) -> Result<KloostermanValue> {
    let f = sub.field();
    for e in [a, b] {
        if !sub.contains(e) {
            return Err(LabError::InvalidArgument(format!("{e} is not in the subfield")));
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for x in sub.units() {
        let arg = f.add(f.mul(a, x), f.mul(b, f.inv(x).expect("unit")));
        sum += sub.character(arg)?;
    }
    let weil_bound = 2.0 * (sub.size() as f64).sqrt();
    let tol = CHAR_TOLERANCE * (sub.size() - 1) as f64;
    let within_weil = (a == 0 && b == 0) || sum.norm() <= weil_bound + tol;
    Ok(KloostermanValue { a, b, re: sum.re, im: sum.im, weil_bound, within_weil })
}

/// All Kloosterman sums over `F`, indexed by `(a, b)` encodings.
pub fn kloosterman_table(sub: &SubfieldHandle) -> Result<Vec<KloostermanValue>> {
    let elems = sub.elements().to_vec();
    elems
        .par_iter()
        .flat_map_iter(|&a| elems.iter().map(move |&b| (a, b)))
        .map(|(a, b)| kloosterman(sub, a, b))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct HisReport {
    pub u: Elem,
    pub v: Elem,
    /// Least `x in F^*` with `xu` and `v/x` in `A - A`.
    pub witness: Option<Elem>,
    /// `sum_{x in F^*} r_{A-A}(xu) r_{A-A}(v/x)`.
    pub direct_count: u128,
    /// The same quantity evaluated through Fourier coefficients on `V`.
    pub character_value: f64,
    pub character_imag: f64,
    pub tolerance: f64,
    /// Exact count positive iff character value exceeds the tolerance.
    pub agrees: bool,
    /// `|A| >= sqrt(2) |V| / |F|^{1/4}`.
    pub in_guaranteed_regime: bool,
}

impl HisReport {
    pub fn passed(&self) -> bool {
        let exact_ok = !self.in_guaranteed_regime || self.witness.is_some();
        let count_ok = (self.direct_count > 0) == self.witness.is_some();
        self.agrees && exact_ok && count_ok
    }
}

fn require_subset(a: &FqSet, inst: &VvInstance) -> Result<()> {
    a.same_field(&inst.v)?;
    if !a.is_subset(&inst.v) {
        return Err(LabError::Precondition("A must lie in V".into()));
    }
    Ok(())
}

/// `|A|^4 |F| >= 4 |V|^4`.
pub fn his_threshold_met(inst: &VvInstance, size: usize) -> bool {
    let n = BigUint::from(size);
    n.pow(4) * BigUint::from(inst.sub.size()) >= BigUint::from(4u32) * BigUint::from(inst.v.len()).pow(4)
}

pub fn his_pair_exists(inst: &VvInstance, a: &FqSet, u: Elem, v: Elem) -> Result<HisReport> {
    require_subset(a, inst)?;
    if u == 0 || v == 0 {
        return Err(LabError::InvalidArgument("u and v must be nonzero".into()));
    }
    if !inst.v.contains(u) || !inst.v.contains(v) {
        return Err(LabError::InvalidArgument("u and v must lie in V".into()));
    }
    let f = inst.field();
    let sub = &inst.sub;
    let r = rep_function(a, a, SetOp::Diff)?;
    let mut witness = None;
    let mut direct_count = 0u128;
    for x in sub.units() {
        let c = r.get(f.mul(x, u)) as u128 * r.get(f.div(v, x).expect("unit")) as u128;
        if c > 0 && witness.is_none() {
            witness = Some(x);
        }
        direct_count += c;
    }

    // Group |A^(m)|^2 by the value of u.m and v.m, then pair the groups with
    // the Kloosterman table.
    let s = sub.size() as usize;
    let index: std::collections::HashMap<Elem, usize> = sub.elements().iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut wu = vec![0.0f64; s];
    let mut wv = vec![0.0f64; s];
    let a_elems = a.to_vec();
    let vs = inst.v.to_vec();
    let weights: Vec<f64> = vs
        .par_iter()
        .map(|&m| {
            let mut hat = Complex64::new(0.0, 0.0);
            for &x in &a_elems {
                let d = inst.dot(x, m).expect("in V");
                hat += sub.character(f.neg(d)).expect("in F");
            }
            hat.norm_sqr()
        })
        .collect();
    for (&m, &wgt) in vs.iter().zip(&weights) {
        wu[index[&inst.dot(u, m).expect("in V")]] += wgt;
        wv[index[&inst.dot(v, m).expect("in V")]] += wgt;
    }
    let elems = sub.elements().to_vec();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &s1) in elems.iter().enumerate() {
        if wu[i] == 0.0 {
            continue;
        }
        for (j, &t1) in elems.iter().enumerate() {
            if wv[j] == 0.0 {
                continue;
            }
            total += kloosterman(sub, s1, t1)?.value() * (wu[i] * wv[j]);
        }
    }
    let nv = inst.v.len() as f64;
    total /= nv * nv;
    let tolerance = CHAR_TOLERANCE * (s as f64).powi(3);
    let agrees = (direct_count > 0) == (total.re > tolerance)
        && (total.re - direct_count as f64).abs() <= tolerance.max(1e-9 * direct_count as f64);
    Ok(HisReport {
        u,
        v,
        witness,
        direct_count,
        character_value: total.re,
        character_imag: total.im,
        tolerance,
        agrees,
        in_guaranteed_regime: his_threshold_met(inst, a.len()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PdaReport {
    pub set_size: usize,
    pub pda_size: usize,
    pub vv_size: usize,
    pub equal: bool,
    /// `|(A-A)(A-A)| / |VV|`.
    pub containment: Rational,
    /// `|A| >= sqrt(2) |V|^{7/8}`.
    pub in_guaranteed_regime: bool,
}

impl PdaReport {
    pub fn passed(&self) -> bool {
        !self.in_guaranteed_regime || self.equal
    }
}

/// `|A|^8 >= 16 |V|^7`.
pub fn pda_threshold_met(v_size: usize, size: usize) -> bool {
    BigUint::from(size).pow(8) >= BigUint::from(16u32) * BigUint::from(v_size).pow(7)
}

/// Least `|A|` meeting [`pda_threshold_met`].
pub fn pda_threshold(v_size: usize) -> usize {
    (1..=v_size).find(|&n| pda_threshold_met(v_size, n)).unwrap_or(v_size + 1)
}

pub fn check_pda_equals_vv(inst: &VvInstance, a: &FqSet) -> Result<PdaReport> {
    require_subset(a, inst)?;
    let f = inst.field();
    let vv = product_set_fast(f, &inst.v, &inst.v)?;
    let d = diffset(a, a)?;
    let pda = product_set_fast(f, &d, &d)?;
    if !pda.is_subset(&vv) {
        return Err(LabError::InvariantViolation("(A-A)(A-A) escapes VV".into()));
    }
    Ok(PdaReport {
        set_size: a.len(),
        pda_size: pda.len(),
        vv_size: vv.len(),
        equal: pda == vv,
        containment: Rational::new(pda.len() as u128, vv.len() as u128),
        in_guaranteed_regime: pda_threshold_met(inst.v.len(), a.len()),
    })
}
