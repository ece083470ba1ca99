use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use super::intersection::{cs_intersection, CsIntersection, ProductFamily};
use super::paths::{bsg_extract, BsgCertificate, BSG_SIZE_CAP};
use super::popularity::{popularity_level_set, popularity_select, PopularitySelection};
use crate::error::{LabError, Result};
use crate::field::Elem;
use crate::moments::energy_from_reps;
use crate::rational::Rational;
use crate::sets::{combine, generated_subfield, productset, rep_function, FqSet, SetOp};

/// Asymptotic exponents of the structure theorem, reported next to the
/// measurements and never asserted.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticExponents {
    /// `|A1| >~ K^-85 |A|`.
    pub a1_size: u32,
    /// `|A1 + X'A1| <~ K^226 |A1|`.
    pub dilate_sumset: u32,
    /// `|A1 +- A1| <~ K^92 |A1|`.
    pub self_sumset: u32,
    /// `|A1 +- x'A1| <~ K^126 |A1|`.
    pub single_dilate: u32,
    /// `|X'| >~ K^-5 |X|`.
    pub x_size: u32,
    /// `|X'| >~ K^-4 |X|` when every dilate is energetic.
    pub x_size_uniform: u32,
}

const EXPONENTS: AsymptoticExponents = AsymptoticExponents {
    a1_size: 85,
    dilate_sumset: 226,
    self_sumset: 92,
    single_dilate: 126,
    x_size: 5,
    x_size_uniform: 4,
};

/// Per-dilate extraction inside the first stage.
#[derive(Clone, Debug, Serialize)]
pub struct DilateExtraction {
    pub b: Elem,
    pub left: FqSet,
    /// `b^-1 B'`, a subset of `A`.
    pub right: FqSet,
    pub certificate: BsgCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureCertificate {
    pub k: Rational,
    pub energy_sum: u128,
    /// Energetic dilates `b` with `E(A, bA) >= |A|^3 / (2K)`.
    pub popular_dilates: PopularitySelection,
    /// Popular dilates whose energy is degenerate and were skipped.
    pub skipped: Vec<Elem>,
    pub extractions: Vec<DilateExtraction>,
    pub intersection: CsIntersection,
    /// `x0 = b*`.
    pub x0: Elem,
    /// `A'`, a subset of `A`.
    pub a_prime: FqSet,
    /// `X'`, a subset of `x0^-1 X`.
    pub x_prime: FqSet,
    /// `max |A' +- A'| / |A'|`.
    pub a_prime_doubling: Rational,
    /// `max_{x in X'} |A' +- x A'| / |A'|`.
    pub a_prime_dilate_doubling: Rational,
    /// `|X'| < 32 K0 K^3` with the two measured constants above.
    pub small_dilate_branch: bool,
    pub a_bar: Elem,
    pub a_bar_bar: Elem,
    /// `#{(a1, a2, b) : a2 - abarbar = b (a1 - abar)}` at the chosen pair.
    pub pigeonhole_count: u64,
    pub pair_selection: PopularitySelection,
    pub popular_pairs: usize,
    pub row_selection: PopularitySelection,
    /// `A_*`, a subset of `A'`.
    pub a_star: FqSet,
    /// `A1 = A_* - abar`.
    pub a1: FqSet,
    /// `|A1 + X'A1| / |A1|`.
    pub sum_ratio: Rational,
    /// `|A1 - X'A1| / |A1|`.
    pub diff_ratio: Rational,
    /// `max |A' +- X'A1| / |A1|`.
    pub ambient_ratio: Rational,
    /// `max |A1 +- A1| / |A1|`.
    pub self_ratio: Rational,
    /// `max_{x in X'} |A1 +- x A1| / |A1|`.
    pub dilate_ratio: Rational,
    /// `|A1| / |A|`.
    pub a1_fraction: Rational,
    /// `|X'| / |X|`.
    pub x_fraction: Rational,
    /// Size of the subfield generated by `X'`.
    pub x_prime_field: u32,
    pub exponents: AsymptoticExponents,
}

fn big(n: u128) -> BigUint {
    BigUint::from(n)
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as u128, den as u128)
}

fn doubling(a: &FqSet, b: &FqSet) -> Result<Rational> {
    let plus = combine(a, b, SetOp::Sum)?.len();
    let minus = combine(a, b, SetOp::Diff)?.len();
    Ok(ratio(plus.max(minus), a.len()))
}

fn dilate_doubling(a: &FqSet, base: &FqSet, xs: &FqSet) -> Result<Rational> {
    let ratios: Vec<Rational> = xs
        .to_vec()
        .par_iter()
        .map(|&x| doubling(a, &base.dilate(x)).map(|r| r * ratio(a.len(), base.len())))
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().max().unwrap_or(Rational::integer(0)))
}

/// Runs the dilate-energy to structure chain on `A` and `X`, given
/// `sum_{xi in X} E(A, xi A) >= |A|^3 |X| / K`.
pub fn energy_to_structure(a: &FqSet, x: &FqSet, k: Rational) -> Result<StructureCertificate> {
    a.same_field(x)?;
    if a.is_empty() || x.is_empty() {
        return Err(LabError::InvalidArgument("A and X must be nonempty".into()));
    }
    if x.contains(0) {
        return Err(LabError::InvalidArgument("X must avoid zero".into()));
    }
    if k.is_zero() {
        return Err(LabError::InvalidArgument("K must be positive".into()));
    }
    if a.len() > BSG_SIZE_CAP {
        return Err(LabError::CostGuard(format!("|A| = {} exceeds the cap {BSG_SIZE_CAP}", a.len())));
    }
    let field = a.field().clone();
    let na = a.len() as u128;
    let xs = x.to_vec();

    let raa = rep_function(a, a, SetOp::Diff)?;
    let energies: Vec<u64> = xs.iter().map(|&b| energy_from_reps(&raa, &raa, b) as u64).collect();
    let energy_sum: u128 = energies.iter().map(|&e| e as u128).sum();
    // energy_sum K.num >= |A|^3 |X| K.den
    let cube_x = big(na).pow(3) * big(xs.len() as u128);
    if big(energy_sum) * k.num_big() < &cube_x * k.den_big() {
        return Err(LabError::Precondition(format!(
            "sum E(A, xi A) = {energy_sum} is below |A|^3 |X| / K with K = {k}"
        )));
    }
    let mu = Rational::from_big(&(&cube_x * k.den_big()), &k.num_big())
        .ok_or_else(|| LabError::CostGuard("|A|^3 |X| / K exceeds 128 bits".into()))?;
    let popular_dilates = popularity_level_set(&energies, Rational::new(1, 2), mu)?;

    // Per-dilate extraction on (A, bA), merged in encoding order of b.
    let runs: Vec<(Elem, Result<BsgCertificate>)> = popular_dilates
        .selected
        .par_iter()
        .map(|&i| (xs[i], bsg_extract(a, &a.dilate(xs[i]))))
        .collect();
    let mut skipped = Vec::new();
    let mut extractions = Vec::new();
    for (b, run) in runs {
        match run {
            Ok(cert) => {
                let inv = field.inv(b).expect("X avoids zero");
                extractions.push(DilateExtraction {
                    b,
                    left: cert.a_prime.clone(),
                    right: cert.b_prime.dilate(inv),
                    certificate: cert,
                });
            }
            Err(LabError::Precondition(_)) => skipped.push(b),
            Err(e) => return Err(e),
        }
    }
    if extractions.is_empty() {
        return Err(LabError::EmptySelection { stage: "per-dilate extraction" });
    }

    let family = ProductFamily::new(
        a.clone(),
        a.clone(),
        extractions.iter().map(|e| (e.left.clone(), e.right.clone())).collect(),
    )?;
    let area: u128 = extractions.iter().map(|e| e.left.len() as u128 * e.right.len() as u128).sum();
    let delta = Rational::new(area, extractions.len() as u128 * na * na);
    let intersection = cs_intersection(&family, delta)?;
    let mut column = vec![0usize; extractions.len()];
    for &(_, t) in &intersection.pairs {
        column[t] += 1;
    }
    let star = (0..column.len()).max_by_key(|&t| (column[t], std::cmp::Reverse(t))).expect("nonempty");
    let x0 = extractions[star].b;
    let x0_inv = field.inv(x0).expect("X avoids zero");
    let a_prime = extractions[star].right.clone();
    let x_prime = FqSet::from_elems(
        &field,
        intersection.pairs.iter().filter(|p| p.1 == star).map(|p| field.mul(x0_inv, extractions[p.0].b)),
    )?;
    if a_prime.is_empty() || x_prime.is_empty() {
        return Err(LabError::EmptySelection { stage: "intersection pigeonhole" });
    }
    let a_prime_doubling = doubling(&a_prime, &a_prime)?;
    let a_prime_dilate_doubling = dilate_doubling(&a_prime, &a_prime, &x_prime)?;
    let small_dilate_branch = (x_prime.len() as f64)
        < 32.0 * a_prime_doubling.to_f64() * a_prime_dilate_doubling.to_f64().powi(3);

    // Second stage on (A', X').
    let al = a_prime.to_vec();
    let xl = x_prime.to_vec();
    let (n, m) = (al.len(), xl.len());
    let counts: Vec<Vec<u64>> = al
        .par_iter()
        .map(|&abar| {
            let mut row = vec![0u64; n];
            for &a1 in &al {
                let d = field.sub(a1, abar);
                for &b in &xl {
                    let y = field.mul(b, d);
                    for &a2 in &al {
                        if let Ok(j) = al.binary_search(&field.sub(a2, y)) {
                            row[j] += 1;
                        }
                    }
                }
            }
            row
        })
        .collect();
    let (mut bi, mut bj, mut best) = (0, 0, 0);
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > best {
                (bi, bj, best) = (i, j, c);
            }
        }
    }
    let (a_bar, a_bar_bar) = (al[bi], al[bj]);
    // B_a = {b in X' : b (a - abar) in A' - abarbar}.
    let shifted = a_prime.translate(field.neg(a_bar_bar));
    let b_sets: Vec<FixedBitSet> = al
        .iter()
        .map(|&v| {
            let d = field.sub(v, a_bar);
            let mut bits = FixedBitSet::with_capacity(m);
            for (t, &b) in xl.iter().enumerate() {
                if shifted.contains(field.mul(b, d)) {
                    bits.insert(t);
                }
            }
            bits
        })
        .collect();
    let pair_f: Vec<u64> = (0..n * n)
        .map(|idx| b_sets[idx / n].intersection_count(&b_sets[idx % n]) as u64)
        .collect();
    let pair_mass: u128 = pair_f.iter().map(|&v| v as u128).sum();
    if pair_mass == 0 {
        return Err(LabError::EmptySelection { stage: "dilate incidences" });
    }
    let half = Rational::new(1, 2);
    let pair_selection = popularity_select(&pair_f, &vec![1; n * n], half, Rational::integer(pair_mass), m as u64)?;
    let mut row_sizes = vec![0u64; n];
    for &idx in &pair_selection.selected {
        row_sizes[idx / n] += 1;
    }
    let popular_pairs = pair_selection.selected.len();
    let row_selection = popularity_select(&row_sizes, &vec![1; n], half, Rational::integer(popular_pairs as u128), n as u64)?;
    let a_star = FqSet::from_elems(&field, row_selection.selected.iter().map(|&i| al[i]))?;
    if a_star.is_empty() {
        return Err(LabError::EmptySelection { stage: "popular rows" });
    }
    let a1 = a_star.translate(field.neg(a_bar));

    let xa1 = productset(&x_prime, &a1)?;
    let n1 = a1.len();
    let sum_ratio = ratio(combine(&a1, &xa1, SetOp::Sum)?.len(), n1);
    let diff_ratio = ratio(combine(&a1, &xa1, SetOp::Diff)?.len(), n1);
    let ambient_ratio = doubling(&a_prime, &xa1)? * ratio(a_prime.len(), n1);
    let self_ratio = doubling(&a1, &a1)?;
    let dilate_ratio = dilate_doubling(&a1, &a1, &x_prime)?;
    let x_prime_field = generated_subfield(&x_prime)?.size();
    Ok(StructureCertificate {
        k,
        energy_sum,
        popular_dilates,
        skipped,
        extractions,
        intersection,
        x0,
        a_prime,
        x_prime: x_prime.clone(),
        a_prime_doubling,
        a_prime_dilate_doubling,
        small_dilate_branch,
        a_bar,
        a_bar_bar,
        pigeonhole_count: best,
        pair_selection,
        popular_pairs,
        row_selection,
        a_star,
        a1: a1.clone(),
        sum_ratio,
        diff_ratio,
        ambient_ratio,
        self_ratio,
        dilate_ratio,
        a1_fraction: ratio(n1, a.len()),
        x_fraction: ratio(x_prime.len(), x.len()),
        x_prime_field,
        exponents: EXPONENTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;
    use crate::sets::sumset;
    use crate::structured::{random_subset, trial_rng, vspace};

    #[test]
    fn plane_in_f27_closes_exactly() {
        let f = build_field(3, 3).unwrap();
        let a = vspace(&f, 2, 1).unwrap();
        let x = FqSet::from_elems(&f, [1, 2]).unwrap();
        let cert = energy_to_structure(&a, &x, Rational::integer(1)).unwrap();
        assert_eq!(cert.energy_sum, 2 * 729);
        assert_eq!(cert.sum_ratio, Rational::integer(1));
        assert_eq!(cert.self_ratio, Rational::integer(1));
        let xa1 = productset(&cert.x_prime, &cert.a1).unwrap();
        assert_eq!(sumset(&cert.a1, &xa1).unwrap().len(), cert.a1.len());
        assert!(cert.a1.is_subset(&a.translate(f.neg(cert.a_bar))));
        let x_scaled = x.dilate(f.inv(cert.x0).unwrap());
        assert!(cert.x_prime.is_subset(&x_scaled));
        assert!(cert.a_prime.is_subset(&a));
    }

    #[test]
    fn subfield_coset_ratios_near_one() {
        let f = build_field(2, 6).unwrap();
        let sub = f.subfield(3).unwrap();
        let a = sub.elements().translate(9);
        let x = FqSet::from_elems(&f, sub.units()).unwrap();
        let cert = energy_to_structure(&a, &x, Rational::integer(1)).unwrap();
        assert_eq!(cert.sum_ratio, Rational::integer(1));
        assert_eq!(cert.dilate_ratio, Rational::integer(1));
        assert_eq!(cert.a1_fraction, Rational::integer(1));
        assert_eq!(cert.x_prime_field, 8);
    }

    #[test]
    fn hypothesis_failure_is_reported() {
        let f = build_field(2, 7).unwrap();
        let mut rng = trial_rng(4, 0);
        let full = FqSet::full(&f);
        let a = random_subset(&full.without_zero(), 20, &mut rng).unwrap();
        let x = random_subset(&full.without_zero(), 10, &mut rng).unwrap();
        let err = energy_to_structure(&a, &x, Rational::integer(1)).unwrap_err();
        assert!(matches!(err, LabError::Precondition(_)));
        assert!(energy_to_structure(&a, &full, Rational::integer(1)).is_err());
    }

    #[test]
    fn random_instance_runs_at_its_measured_k() {
        let f = build_field(2, 6).unwrap();
        let mut rng = trial_rng(11, 0);
        let units = FqSet::full(&f).without_zero();
        let a = random_subset(&units, 16, &mut rng).unwrap();
        let x = random_subset(&units, 6, &mut rng).unwrap();
        let raa = rep_function(&a, &a, SetOp::Diff).unwrap();
        let total: u128 = x.iter().map(|b| energy_from_reps(&raa, &raa, b)).sum();
        let k = Rational::new(16u128.pow(3) * 6, total);
        match energy_to_structure(&a, &x, k) {
            Ok(cert) => {
                assert!(cert.a1.len() <= a.len());
                assert!(cert.sum_ratio >= Rational::integer(1));
            }
            Err(e) => assert!(matches!(e, LabError::EmptySelection { .. }), "{e}"),
        }
    }
}
