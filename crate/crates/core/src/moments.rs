//! Exact moment counters: additive energy of dilates, the dilate spectrum,
//! `D_x`, its four-set variant, collinear energy `T(A)`, and popular dilates.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::convolution::mul_convolution;
use crate::error::{LabError, Result};
use crate::field::Elem;
use crate::rational::Rational;
use crate::sets::{rep_function, FqSet, RepFn, SetOp};

fn big(n: impl Into<BigUint>) -> BigUint {
    n.into()
}

/// `E(A, xi B) = #{a1 - a2 = xi (b1 - b2)}`.
pub fn energy(a: &FqSet, xi: Elem, b: &FqSet) -> Result<u128> {
    a.same_field(b)?;
    if xi == 0 {
        return Err(LabError::InvalidArgument("energy needs a nonzero dilate".into()));
    }
    a.field().check(xi as u64)?;
    let raa = rep_function(a, a, SetOp::Diff)?;
    let rbb = rep_function(b, b, SetOp::Diff)?;
    let e = energy_from_reps(&raa, &rbb, xi);
    if cfg!(debug_assertions) {
        let r = rep_function(a, &b.dilate(xi), SetOp::Diff)?;
        debug_assert_eq!(e, r.second_moment());
    }
    Ok(e)
}

/// `sum_d r_{A-A}(xi d) r_{B-B}(d)`.
pub fn energy_from_reps(raa: &RepFn, rbb: &RepFn, xi: Elem) -> u128 {
    let field = raa.field();
    rbb.nonzero()
        .map(|(d, c)| raa.get(field.mul(xi, d)) as u128 * c as u128)
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub xi: Elem,
    pub energy: u128,
    /// `E(A, xi A) - |A|^2`.
    pub q_xi: u128,
    /// `E(A, xi A) - |A|^4 / q`.
    pub e_xi: Rational,
}

/// Per-dilate energies of `A` over all of `F_q^*`, in encoding order.
#[derive(Clone, Debug, Serialize)]
pub struct DilateSpectrum {
    pub q: u32,
    pub set_size: usize,
    pub rows: Vec<SpectrumRow>,
}

impl DilateSpectrum {
    pub fn sum_q(&self) -> u128 {
        self.rows.iter().map(|r| r.q_xi).sum()
    }

    /// `sum_xi E_xi` as an exact rational.
    pub fn sum_e(&self) -> Rational {
        let a4 = (self.set_size as u128).pow(4);
        let total: u128 = self.rows.iter().map(|r| r.energy).sum();
        let q = self.q as u128;
        Rational::new(q * total - (q - 1) * a4, q)
    }

    pub fn row(&self, xi: Elem) -> Option<&SpectrumRow> {
        self.rows.get(xi.checked_sub(1)? as usize)
    }
}

pub fn dilate_spectrum(a: &FqSet) -> Result<DilateSpectrum> {
    if a.len() < 2 {
        return Err(LabError::Precondition("dilate spectrum needs |A| >= 2".into()));
    }
    let field = a.field();
    let raa = rep_function(a, a, SetOp::Diff)?;
    let n = a.len() as u128;
    let q = field.q() as u128;
    let a4 = n.pow(4);
    let rows = (1..field.q())
        .into_par_iter()
        .map(|xi| {
            let e = energy_from_reps(&raa, &raa, xi);
            SpectrumRow { xi, energy: e, q_xi: e - n * n, e_xi: Rational::new(q * e - a4, q) }
        })
        .collect();
    Ok(DilateSpectrum { q: field.q(), set_size: a.len(), rows })
}

/// Eighth-moment counts and the zero/nonzero split.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    /// `D_x`: number of solutions of `(a1-b1)(c1-d1) = (a2-b2)(c2-d2)`.
    pub d_times: u128,
    /// Solutions with both sides zero.
    pub d_zero: u128,
    /// Solutions with both sides nonzero.
    pub d_star: u128,
    /// `|(A-B)(C-D)|`.
    pub distinct: usize,
    /// `|A|^2|B|^2|C|^2|D|^2 / D_x`, a lower bound for `distinct`.
    pub cs_lower_bound: Option<Rational>,
    pub collinear: Option<u128>,
}

fn report_from(r: &RepFn, mass: u128) -> MomentReport {
    let d_times = r.second_moment();
    let z = r.get(0) as u128;
    MomentReport {
        d_times,
        d_zero: z * z,
        d_star: d_times - z * z,
        distinct: r.support().len(),
        cs_lower_bound: mass.checked_mul(mass).map(|m| Rational::new(m, d_times)),
        collinear: None,
    }
}

/// `D_x(A)`.
pub fn d_times(a: &FqSet) -> Result<MomentReport> {
    if a.is_empty() {
        return Err(LabError::Precondition("D_x needs a nonempty set".into()));
    }
    let raa = rep_function(a, a, SetOp::Diff)?;
    let r = mul_convolution(&raa, &raa)?;
    let n = a.len() as u128;
    Ok(report_from(&r, n.pow(4)))
}

/// `D_x(A, B, C, D)`.
pub fn d_times4(a: &FqSet, b: &FqSet, c: &FqSet, d: &FqSet) -> Result<MomentReport> {
    if [a, b, c, d].iter().any(|s| s.is_empty()) {
        return Err(LabError::Precondition("D_x needs nonempty sets".into()));
    }
    let rab = rep_function(a, b, SetOp::Diff)?;
    let rcd = rep_function(c, d, SetOp::Diff)?;
    let r = mul_convolution(&rab, &rcd)?;
    let mass = [a, b, c, d].iter().map(|s| s.len() as u128).product();
    Ok(report_from(&r, mass))
}

/// The four-set decomposition bound
/// `D_x(A,B,C,D) <= (D*_A D*_B D*_C D*_D)^{1/4} + 4|A|^2|C|^2|D|^2`.
#[derive(Clone, Debug, Serialize)]
pub struct FourSetBound {
    pub d_times: u128,
    /// `D_x(S)^*` for `S = A, B, C, D`.
    pub d_star: [u128; 4],
    pub zero_term: u128,
    /// `|A| <= |B|`, `|C| <= |D|`, `|B| <= |D|`.
    pub ordered: bool,
    pub holds: bool,
}

pub fn four_set_bound(a: &FqSet, b: &FqSet, c: &FqSet, d: &FqSet) -> Result<FourSetBound> {
    let total = d_times4(a, b, c, d)?.d_times;
    let mut d_star = [0u128; 4];
    for (slot, s) in d_star.iter_mut().zip([a, b, c, d]) {
        *slot = d_times(s)?.d_star;
    }
    let (na, nb, nc, nd) = (a.len() as u128, b.len() as u128, c.len() as u128, d.len() as u128);
    let zero_term = 4 * (na * nc * nd).pow(2);
    // (D - Z)^4 <= prod D*, checked in big integers.
    let holds = total <= zero_term || {
        let lhs = big(total - zero_term).pow(4);
        let rhs = d_star.iter().fold(big(1u32), |acc, &x| acc * x);
        lhs <= rhs
    };
    Ok(FourSetBound { d_times: total, d_star, zero_term, ordered: na <= nb && nc <= nd && nb <= nd, holds })
}

/// Default cap on `|A|` for `T(A)`.
pub const COLLINEAR_CAP: usize = 160;

/// `T(A) = #{(a1-a2)(a3-a4) = (a1-a5)(a3-a6)}`, by per-pair second moments.
pub fn collinear_energy(a: &FqSet, cap: usize) -> Result<u128> {
    if a.is_empty() {
        return Err(LabError::Precondition("T(A) needs a nonempty set".into()));
    }
    if a.len() > cap {
        return Err(LabError::CostGuard(format!("T(A) with |A| = {} exceeds cap {cap}", a.len())));
    }
    let field = a.field();
    let elems = a.to_vec();
    let q = field.q() as usize;
    let t = elems
        .par_iter()
        .map(|&a1| {
            let mut counts = vec![0u32; q];
            let left: Vec<Elem> = elems.iter().map(|&a2| field.sub(a1, a2)).collect();
            let mut sum = 0u128;
            for &a3 in &elems {
                let right: Vec<Elem> = elems.iter().map(|&a4| field.sub(a3, a4)).collect();
                let mut touched = Vec::with_capacity(elems.len() * elems.len());
                for &u in &left {
                    for &v in &right {
                        let x = field.mul(u, v) as usize;
                        if counts[x] == 0 {
                            touched.push(x);
                        }
                        counts[x] += 1;
                    }
                }
                for x in touched {
                    sum += (counts[x] as u128).pow(2);
                    counts[x] = 0;
                }
            }
            sum
        })
        .sum();
    Ok(t)
}

/// `D_x(A)` together with `T(A)` and the check `D_x(A) <= |A|^2 T(A)`.
pub fn d_times_with_collinear(a: &FqSet, cap: usize) -> Result<MomentReport> {
    let mut rep = d_times(a)?;
    let t = collinear_energy(a, cap)?;
    let n = a.len() as u128;
    if rep.d_times > n * n * t {
        return Err(LabError::InvariantViolation(format!(
            "D_x = {} exceeds |A|^2 T = {}",
            rep.d_times,
            n * n * t
        )));
    }
    rep.collinear = Some(t);
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct BktReport {
    pub energy_sum: u128,
    /// `|A|^2|B|^2 + |S||A||B|`.
    pub bound: u128,
    pub holds: bool,
    /// Element of `S` maximizing `|A + xi B|`, least encoding on ties.
    pub witness: Elem,
    pub witness_sumset: usize,
    pub witness_ok: bool,
}

pub fn verify_bkt(a: &FqSet, b: &FqSet, s: &FqSet) -> Result<BktReport> {
    a.same_field(b)?;
    a.same_field(s)?;
    if s.contains(0) {
        return Err(LabError::InvalidArgument("S must not contain 0".into()));
    }
    if s.is_empty() || a.is_empty() || b.is_empty() {
        return Err(LabError::Precondition("A, B and S must be nonempty".into()));
    }
    let field = a.field();
    let raa = rep_function(a, a, SetOp::Diff)?;
    let rbb = rep_function(b, b, SetOp::Diff)?;
    let xs = s.to_vec();
    let per: Vec<(u128, usize)> = xs
        .par_iter()
        .map(|&xi| {
            let e = energy_from_reps(&raa, &rbb, xi);
            let mut img = FqSet::empty(field);
            for x in a.iter() {
                for y in b.iter() {
                    img.insert(field.add(x, field.mul(xi, y)));
                }
            }
            (e, img.len())
        })
        .collect();
    let energy_sum: u128 = per.iter().map(|p| p.0).sum();
    let (na, nb, ns) = (a.len() as u128, b.len() as u128, s.len() as u128);
    let bound = na * na * nb * nb + ns * na * nb;
    let (best, &(_, size)) = per.iter().enumerate().max_by_key(|(i, p)| (p.1, std::cmp::Reverse(*i))).expect("S nonempty");
    Ok(BktReport {
        energy_sum,
        bound,
        holds: energy_sum <= bound,
        witness: xs[best],
        witness_sumset: size,
        witness_ok: 2 * size as u128 >= ns.min(na * nb),
    })
}

/// Outcome of the popular-dilate extraction.
#[derive(Clone, Debug, Serialize)]
pub struct PopularDilates {
    pub k: Rational,
    pub d_times: u128,
    /// `|A|^8/q + 3q|A|^5/K`.
    pub d_required: Rational,
    pub size_ok: bool,
    pub moment_ok: bool,
    /// `{xi : E(A, xi A) - |A|^2 >= |A|^3/K}`, present when both hypotheses hold.
    pub x: Option<FqSet>,
    /// `q/(K|A|)`.
    pub lower: Rational,
    /// `4Kq/(3|A|)`.
    pub upper: Rational,
    pub bounds_hold: Option<bool>,
}

/// Range of `K` for which both hypotheses hold, if nonempty:
/// `3q^2|A|^5/(qD - |A|^8) <= K <= q/(4|A|)`.
pub fn popular_dilate_window(a: &FqSet) -> Result<Option<(Rational, Rational)>> {
    let d = d_times(a)?.d_times;
    let n = a.len() as u128;
    let q = a.field().q() as u128;
    let qd = big(q) * d;
    let a8 = big(n).pow(8);
    if qd <= a8 {
        return Ok(None);
    }
    let lo = Rational::from_big(&(big(3u32) * big(q * q) * big(n).pow(5)), &(qd - a8))
        .ok_or_else(|| LabError::CostGuard("window bound exceeds 128 bits".into()))?;
    let hi = Rational::new(q, 4 * n);
    Ok(if lo <= hi { Some((lo, hi)) } else { None })
}

pub fn extract_popular_dilates(a: &FqSet, k: Rational) -> Result<PopularDilates> {
    if k.is_zero() {
        return Err(LabError::InvalidArgument("K must be positive".into()));
    }
    let d = d_times(a)?.d_times;
    let n = a.len() as u128;
    let q = a.field().q() as u128;
    let (kn, kd) = (big(k.num), big(k.den));

    let size_ok = big(4 * n) * &kn <= big(q) * &kd;
    // D q Kn >= |A|^8 Kn + 3 q^2 |A|^5 Kd
    let req_num = big(n).pow(8) * &kn + big(3u32) * big(q * q) * big(n).pow(5) * &kd;
    let req_den = big(q) * &kn;
    let moment_ok = big(d) * &req_den >= req_num;
    let d_required = Rational::from_big(&req_num, &req_den)
        .ok_or_else(|| LabError::CostGuard("moment threshold exceeds 128 bits".into()))?;
    let lower = Rational::from_big(&(big(q) * &kd), &(&kn * big(n)))
        .ok_or_else(|| LabError::CostGuard("bound exceeds 128 bits".into()))?;
    let upper = Rational::from_big(&(big(4 * q) * &kn), &(big(3 * n) * &kd))
        .ok_or_else(|| LabError::CostGuard("bound exceeds 128 bits".into()))?;

    let mut out = PopularDilates { k, d_times: d, d_required, size_ok, moment_ok, x: None, lower, upper, bounds_hold: None };
    if !(size_ok && moment_ok) {
        return Ok(out);
    }
    let spec = dilate_spectrum(a)?;
    let threshold = big(n).pow(3) * &kd;
    let x = FqSet::from_elems(
        a.field(),
        spec.rows.iter().filter(|r| big(r.q_xi) * &kn >= threshold).map(|r| r.xi),
    )?;
    let size = x.len() as u128;
    out.bounds_hold = Some(Rational::integer(size) >= lower && Rational::integer(size) <= upper);
    out.x = Some(x);
    Ok(out)
}

#[cfg(test)]
mod tests;
