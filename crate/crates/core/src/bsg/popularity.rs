use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rational::Rational;

/// A popular subset of an index set `0..n`, together with the quantities that
/// certify it.
#[derive(Clone, Debug, Serialize)]
pub struct PopularitySelection {
    /// Selected indices, increasing.
    pub selected: Vec<usize>,
    pub lambda: Rational,
    pub mu: Rational,
    /// Dyadic level `N` with `N <= f < 2N` on the selection.
    pub level: Option<Rational>,
    /// Cap `M` on `f`.
    pub cap: Option<u64>,
    /// `W = sum w`.
    pub weight_total: Option<u128>,
    /// `sum f` or `sum f w` over the selection.
    pub mass: u128,
    /// Number of dyadic classes between `lambda mu / W` and `M`.
    pub class_count: Option<u32>,
    /// `mass >= (1 - lambda) mu / J` with `J` the class count.
    pub class_bound_holds: Option<bool>,
    /// `mass >= (1 - lambda) mu / log2 M`, which can fail by one class.
    pub log_bound_holds: Option<bool>,
}

fn big(n: u128) -> BigUint {
    BigUint::from(n)
}

fn check_params(lambda: Rational, mu: Rational) -> Result<()> {
    if lambda.is_zero() || lambda >= Rational::integer(1) {
        return Err(LabError::InvalidArgument(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if mu.is_zero() {
        return Err(LabError::InvalidArgument("mu must be positive".into()));
    }
    Ok(())
}

/// Level-set selection: `P = {x : f(x) >= lambda mu / |S|}` given `sum f >= mu`.
///
/// Verifies `sum_P f >= (1 - lambda) mu`.
pub fn popularity_level_set(f: &[u64], lambda: Rational, mu: Rational) -> Result<PopularitySelection> {
    check_params(lambda, mu)?;
    let total: u128 = f.iter().map(|&v| v as u128).sum();
    if big(total) * big(mu.den) < big(mu.num) {
        return Err(LabError::Precondition(format!("sum f = {total} is below mu = {mu}")));
    }
    let n = f.len() as u128;
    // f |S| lambda.den mu.den >= lambda.num mu.num
    let rhs = big(lambda.num) * big(mu.num);
    let scale = big(n) * big(lambda.den) * big(mu.den);
    let selected: Vec<usize> = (0..f.len()).filter(|&i| big(f[i] as u128) * &scale >= rhs).collect();
    let mass: u128 = selected.iter().map(|&i| f[i] as u128).sum();
    // mass >= (1 - lambda) mu
    let ok = big(mass) * big(lambda.den) * big(mu.den) >= big(lambda.den - lambda.num) * big(mu.num);
    if !ok {
        return Err(LabError::InvariantViolation("level-set selection lost more than lambda mu".into()));
    }
    Ok(PopularitySelection {
        selected,
        lambda,
        mu,
        level: None,
        cap: None,
        weight_total: None,
        mass,
        class_count: None,
        class_bound_holds: None,
        log_bound_holds: None,
    })
}

/// Dyadic selection: given `sum f w >= mu` and `f <= M`, picks the class
/// `N <= f < 2N`, `N = (lambda mu / W) 2^j`, carrying the most `f w`.
///
/// Ties go to the lowest class.
pub fn popularity_select(f: &[u64], w: &[u64], lambda: Rational, mu: Rational, cap: u64) -> Result<PopularitySelection> {
    check_params(lambda, mu)?;
    if f.len() != w.len() {
        return Err(LabError::InvalidArgument("f and w must have equal length".into()));
    }
    if let Some(&bad) = f.iter().find(|&&v| v > cap) {
        return Err(LabError::Precondition(format!("f = {bad} exceeds cap {cap}")));
    }
    let weight_total: u128 = w.iter().map(|&v| v as u128).sum();
    let fw: u128 = f.iter().zip(w).map(|(&a, &b)| a as u128 * b as u128).sum();
    if weight_total == 0 || big(fw) * big(mu.den) < big(mu.num) {
        return Err(LabError::Precondition(format!("sum f w = {fw} is below mu = {mu}")));
    }
    // N0 = lambda mu / W = n0_num / n0_den
    let n0_num = big(lambda.num) * big(mu.num);
    let n0_den = big(lambda.den) * big(mu.den) * big(weight_total);
    // Classes j = 0, 1, ... with N0 2^j <= M.
    let mut classes = 0u32;
    while (&n0_num << classes) <= big(cap as u128) * &n0_den {
        classes += 1;
    }
    if classes == 0 {
        return Err(LabError::InvariantViolation("lambda mu / W exceeds the cap".into()));
    }
    let class_of = |v: u64| -> Option<u32> {
        let v = big(v as u128) * &n0_den;
        if v < n0_num {
            return None;
        }
        let mut j = 0;
        while v >= (&n0_num << (j + 1)) {
            j += 1;
        }
        Some(j)
    };
    let mut mass = vec![0u128; classes as usize];
    let labels: Vec<Option<u32>> = f.iter().map(|&v| class_of(v)).collect();
    for (i, lab) in labels.iter().enumerate() {
        if let Some(j) = lab {
            mass[*j as usize] += f[i] as u128 * w[i] as u128;
        }
    }
    let best = (0..classes as usize).max_by_key(|&j| (mass[j], std::cmp::Reverse(j))).expect("nonempty");
    let selected: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == Some(best as u32))
        .map(|(i, _)| i)
        .collect();
    let level = Rational::from_big(&(&n0_num << best), &n0_den)
        .ok_or_else(|| LabError::CostGuard("dyadic level exceeds 128 bits".into()))?;
    let m = mass[best];
    // m J lambda.den mu.den >= (lambda.den - lambda.num) mu.num
    let target = big(lambda.den - lambda.num) * big(mu.num);
    let denom = big(lambda.den) * big(mu.den);
    let class_bound_holds = big(m) * big(classes as u128) * &denom >= target;
    if !class_bound_holds {
        return Err(LabError::InvariantViolation("argmax dyadic class below the average".into()));
    }
    let log2m = (cap as f64).log2();
    let log_bound_holds = m as f64 * log2m >= (1.0 - lambda.to_f64()) * mu.to_f64();
    Ok(PopularitySelection {
        selected,
        lambda,
        mu,
        level: Some(level),
        cap: Some(cap),
        weight_total: Some(weight_total),
        mass: m,
        class_count: Some(classes),
        class_bound_holds: Some(class_bound_holds),
        log_bound_holds: Some(log_bound_holds),
    })
}
