use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rational::Rational;
use crate::sets::FqSet;

/// An indexed family of subsets `T_s` of a common finite universe `T`.
pub trait IntersectionFamily: Sync {
    fn len(&self) -> usize;
    fn universe_size(&self) -> u128;
    fn size(&self, s: usize) -> u128;
    fn intersection_size(&self, s: usize, t: usize) -> u128;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Plain subsets of `0..universe`.
pub struct SetFamily {
    universe: usize,
    members: Vec<FixedBitSet>,
}

impl SetFamily {
    pub fn new(universe: usize, members: Vec<FixedBitSet>) -> Result<Self> {
        if members.iter().any(|m| m.len() > universe && m.ones().any(|i| i >= universe)) {
            return Err(LabError::InvalidArgument("member outside the universe".into()));
        }
        let members = members
            .into_iter()
            .map(|mut m| {
                m.grow(universe);
                m
            })
            .collect();
        Ok(SetFamily { universe, members })
    }

    pub fn from_fq_sets(universe: &FqSet, members: &[FqSet]) -> Result<Self> {
        let index: Vec<u32> = universe.iter().collect();
        let bits = members
            .iter()
            .map(|m| {
                if !m.is_subset(universe) {
                    return Err(LabError::InvalidArgument("member outside the universe".into()));
                }
                let mut b = FixedBitSet::with_capacity(index.len());
                for x in m.iter() {
                    b.insert(index.binary_search(&x).expect("subset"));
                }
                Ok(b)
            })
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(index.len(), bits)
    }
}

impl IntersectionFamily for SetFamily {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn universe_size(&self) -> u128 {
        self.universe as u128
    }

    fn size(&self, s: usize) -> u128 {
        self.members[s].count_ones(..) as u128
    }

    fn intersection_size(&self, s: usize, t: usize) -> u128 {
        self.members[s].intersection_count(&self.members[t]) as u128
    }
}

/// Rectangles `T_s = U_s x V_s` inside `T = U x V`.
pub struct ProductFamily {
    left: FqSet,
    right: FqSet,
    members: Vec<(FqSet, FqSet)>,
}

impl ProductFamily {
    pub fn new(left: FqSet, right: FqSet, members: Vec<(FqSet, FqSet)>) -> Result<Self> {
        if members.iter().any(|(u, v)| !u.is_subset(&left) || !v.is_subset(&right)) {
            return Err(LabError::InvalidArgument("rectangle outside the product".into()));
        }
        Ok(ProductFamily { left, right, members })
    }
}

impl IntersectionFamily for ProductFamily {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn universe_size(&self) -> u128 {
        self.left.len() as u128 * self.right.len() as u128
    }

    fn size(&self, s: usize) -> u128 {
        let (u, v) = &self.members[s];
        u.len() as u128 * v.len() as u128
    }

    fn intersection_size(&self, s: usize, t: usize) -> u128 {
        let (u, v) = &self.members[s];
        let (u2, v2) = &self.members[t];
        u.intersection_len(u2) as u128 * v.intersection_len(v2) as u128
    }
}

/// Pairs `(s, s')` whose members overlap in at least `delta^2 |T| / 2` points.
#[derive(Clone, Debug, Serialize)]
pub struct CsIntersection {
    pub pairs: Vec<(usize, usize)>,
    pub delta: Rational,
    /// `sum |T_s| / (|S| |T|)`.
    pub density: Rational,
    /// `delta^2 |T| / 2`.
    pub overlap_threshold: Rational,
    /// `delta^2 |S|^2 / 2`.
    pub pair_threshold: Rational,
}

impl CsIntersection {
    /// Partners `s'` of `s`.
    pub fn partners(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().filter(move |p| p.0 == s).map(|p| p.1)
    }
}

fn big(n: u128) -> BigUint {
    BigUint::from(n)
}

/// Returns every pair of heavily overlapping members, given `sum |T_s| >= delta |S| |T|`.
pub fn cs_intersection(family: &dyn IntersectionFamily, delta: Rational) -> Result<CsIntersection> {
    let n = family.len() as u128;
    let t = family.universe_size();
    if n == 0 || t == 0 {
        return Err(LabError::EmptySelection { stage: "cs_intersection input" });
    }
    if delta.is_zero() || delta > Rational::integer(1) {
        return Err(LabError::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let total: u128 = (0..family.len()).map(|s| family.size(s)).sum();
    let density = Rational::new(total, n * t);
    if density < delta {
        return Err(LabError::Precondition(format!(
            "density {density} (~{:.4}) is below delta = {delta}",
            density.to_f64()
        )));
    }
    // 2 |T_s cap T_s'| delta.den^2 >= delta.num^2 |T|
    let need = big(delta.num) * big(delta.num) * big(t);
    let scale = big(2) * big(delta.den) * big(delta.den);
    let rows: Vec<Vec<(usize, usize)>> = (0..family.len())
        .into_par_iter()
        .map(|s| {
            (0..family.len())
                .filter(|&u| big(family.intersection_size(s, u)) * &scale >= need)
                .map(|u| (s, u))
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = rows.into_iter().flatten().collect();
    let overlap_threshold = Rational::from_big(&need, &scale)
        .ok_or_else(|| LabError::CostGuard("overlap threshold exceeds 128 bits".into()))?;
    let pair_need = big(delta.num) * big(delta.num) * big(n) * big(n);
    let pair_threshold = Rational::from_big(&pair_need, &scale)
        .ok_or_else(|| LabError::CostGuard("pair threshold exceeds 128 bits".into()))?;
    if big(pairs.len() as u128) * &scale < pair_need {
        return Err(LabError::InvariantViolation(format!(
            "{} heavy pairs, fewer than delta^2 |S|^2 / 2 = {pair_threshold}",
            pairs.len()
        )));
    }
    Ok(CsIntersection { pairs, delta, density, overlap_threshold, pair_threshold })
}
