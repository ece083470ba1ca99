//! Checkers for the Plünnecke–Ruzsa family of sumset inequalities.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::field::Elem;
use crate::rational::Rational;
use crate::sets::{combine, sumset, FqSet, SetOp};

/// Which inequality to evaluate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlunneckeForm {
    /// `|B_1 + ... + B_h| <= prod(|A+B_i|/|A|) |A|`.
    DifferentSummands,
    /// Some `Y ⊆ A` with `|Y| >= |A|/2` has `|Y + B_1 + ... + B_h| <= 2^h prod(|A+B_i|/|A|) |A|`.
    LargeSubset,
    /// `|B_1 - B_2| <= (|A+B_1|/|A|)(|A+B_2|/|A|) |A|`.
    Triangle,
    /// `|B_1 ± B_2 ± ... ± B_h|` with `signs[i]` the sign in front of `B_{i+2}`; `true` is minus.
    MixedSigns { minus: Vec<bool> },
}

impl PlunneckeForm {
    pub fn name(&self) -> &'static str {
        match self {
            PlunneckeForm::DifferentSummands => "different-summands",
            PlunneckeForm::LargeSubset => "large-subset",
            PlunneckeForm::Triangle => "triangle",
            PlunneckeForm::MixedSigns { .. } => "mixed-signs",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlunneckeReport {
    pub form: PlunneckeForm,
    pub lhs: u64,
    pub rhs: Rational,
    /// `|A+B_i|/|A|` for each `i`.
    pub ratios: Vec<Rational>,
    pub holds: bool,
    /// The subset `Y` for the large-subset form.
    pub witness: Option<FqSet>,
}

/// Largest `C(n, k)` scanned exhaustively when the greedy witness search fails.
pub const EXHAUSTIVE_WITNESS_CAP: u128 = 200_000;

pub fn verify_plunnecke_ruzsa(a: &FqSet, bs: &[FqSet], form: PlunneckeForm) -> Result<PlunneckeReport> {
    if a.is_empty() {
        return Err(LabError::Precondition("A must be nonempty".into()));
    }
    if bs.is_empty() || bs.iter().any(FqSet::is_empty) {
        return Err(LabError::Precondition("need at least one nonempty B_i".into()));
    }
    for b in bs {
        a.same_field(b)?;
    }
    let h = bs.len();
    match &form {
        PlunneckeForm::Triangle if h != 2 => {
            return Err(LabError::InvalidArgument("triangle form takes exactly two sets".into()))
        }
        PlunneckeForm::MixedSigns { minus } if minus.len() + 1 != h => {
            return Err(LabError::InvalidArgument(format!("mixed-signs needs {} signs, got {}", h - 1, minus.len())))
        }
        _ => {}
    }

    let na = a.len() as u128;
    let plus_sizes: Vec<u128> = bs.iter().map(|b| Ok(sumset(a, b)?.len() as u128)).collect::<Result<_>>()?;
    let ratios = plus_sizes.iter().map(|&s| Rational::new(s, na)).collect();

    // rhs = prod(|A+B_i|) / |A|^(h-1), times 2^h for the large-subset form.
    let mut num = BigUint::from(1u32);
    for &s in &plus_sizes {
        num *= s;
    }
    if form == PlunneckeForm::LargeSubset {
        num <<= h;
    }
    let den = BigUint::from(na).pow(h as u32 - 1);
    let rhs = big_rational(&num, &den)?;
    let within = |lhs: usize| BigUint::from(lhs) * &den <= num;

    let (lhs, witness) = match &form {
        PlunneckeForm::DifferentSummands => (iterated(bs, &vec![false; h - 1])?.len(), None),
        PlunneckeForm::Triangle => (combine(&bs[0], &bs[1], SetOp::Diff)?.len(), None),
        PlunneckeForm::MixedSigns { minus } => (iterated(bs, minus)?.len(), None),
        PlunneckeForm::LargeSubset => {
            let s = iterated(bs, &vec![false; h - 1])?;
            let y = large_subset_witness(a, &s, &within);
            let lhs = sumset(&y, &s)?.len();
            (lhs, Some(y))
        }
    };
    Ok(PlunneckeReport { holds: within(lhs), form, lhs: lhs as u64, rhs, ratios, witness })
}

fn big_rational(num: &BigUint, den: &BigUint) -> Result<Rational> {
    Rational::from_big(num, den).ok_or_else(|| LabError::CostGuard("plunnecke bound exceeds 128 bits".into()))
}

/// `B_1 ± B_2 ± ... ± B_h`.
fn iterated(bs: &[FqSet], minus: &[bool]) -> Result<FqSet> {
    let mut acc = bs[0].clone();
    for (b, &m) in bs[1..].iter().zip(minus) {
        acc = combine(&acc, b, if m { SetOp::Diff } else { SetOp::Sum })?;
    }
    Ok(acc)
}

/// Greedy removal first, then an exhaustive scan over half-size subsets.
///
/// Returns the best subset found; the caller decides whether it satisfies the bound.
fn large_subset_witness(a: &FqSet, s: &FqSet, within: &dyn Fn(usize) -> bool) -> FqSet {
    let field = a.field();
    let min_size = a.len().div_ceil(2);
    let sv = s.to_vec();
    let cover = |y: &FqSet| sumset(y, s).expect("same field").len();

    let mut y = a.clone();
    let mut best = cover(&y);
    while !within(best) && y.len() > min_size {
        // Drop the element whose translate contributes the most unique points.
        let mut counts = vec![0u32; field.q() as usize];
        for x in y.iter() {
            for &t in &sv {
                counts[field.add(x, t) as usize] += 1;
            }
        }
        let drop = y
            .iter()
            .max_by_key(|&x| (sv.iter().filter(|&&t| counts[field.add(x, t) as usize] == 1).count(), std::cmp::Reverse(x)))
            .expect("nonempty");
        y.remove(drop);
        best = cover(&y);
    }
    if within(best) {
        return y;
    }

    let elems = a.to_vec();
    if binomial(elems.len() as u128, min_size as u128) > EXHAUSTIVE_WITNESS_CAP {
        return y;
    }
    let mut idx: Vec<usize> = (0..min_size).collect();
    loop {
        let cand = FqSet::from_elems(field, idx.iter().map(|&i| elems[i] as Elem)).expect("in field");
        let c = cover(&cand);
        if c < best {
            best = c;
            y = cand;
            if within(best) {
                return y;
            }
        }
        if !next_combination(&mut idx, elems.len()) {
            return y;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
