use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use super::popularity::{popularity_select, PopularitySelection};
use crate::error::{LabError, Result};
use crate::field::Elem;
use crate::rational::Rational;
use crate::sets::{rep_function, sumset, FqSet, SetOp};

/// Largest `|A|` or `|B|` accepted by [`bsg_extract`].
pub const BSG_SIZE_CAP: usize = 256;

/// Output of the extraction with every quantity its bounds depend on.
///
/// `a_prime` and `b_prime` keep the caller's roles; the bounds are stated for
/// the larger set in the `A` role, so `swapped` records whether the roles were
/// exchanged internally.
#[derive(Clone, Debug, Serialize)]
pub struct BsgCertificate {
    pub a_prime: FqSet,
    pub b_prime: FqSet,
    pub swapped: bool,
    pub a_size: usize,
    pub b_size: usize,
    pub energy: u128,
    /// `(|A||B|)^{3/2} / E`.
    pub k: f64,
    /// `K^2 = (|A||B|)^3 / E^2`, exact.
    pub k_squared: Rational,
    /// `log2 |B|`.
    pub l: f64,
    pub popularity: PopularitySelection,
    /// Number of popular sums.
    pub popular_sums: usize,
    /// Edges of the popular-sum graph.
    pub graph_edges: usize,
    /// `|A||B| / |G|`.
    pub k0: Rational,
    pub anchor: Elem,
    pub anchors_tried: usize,
    /// Fewest paths of length three between `A'` and `B'`.
    pub min_paths: u64,
    /// `|A||B| / (2^12 K0^5)`.
    pub required_paths: f64,
    pub a_prime_size: usize,
    pub b_prime_size: usize,
    pub sumset_size: usize,
    /// `|A| / (16 sqrt2 L K)`.
    pub a_prime_bound: f64,
    /// `|B| / (16 L K)`.
    pub b_prime_bound: f64,
    /// `2^17 K^3 L^2 (|A||B|)^{1/2}`.
    pub sumset_bound: f64,
    pub a_prime_ok: bool,
    pub b_prime_ok: bool,
    pub sumset_ok: bool,
}

impl BsgCertificate {
    pub fn holds(&self) -> bool {
        self.a_prime_ok && self.b_prime_ok && self.sumset_ok
    }
}

fn big(n: u128) -> BigUint {
    BigUint::from(n)
}

pub fn bsg_extract(a: &FqSet, b: &FqSet) -> Result<BsgCertificate> {
    bsg_extract_with_cap(a, b, BSG_SIZE_CAP)
}

pub fn bsg_extract_with_cap(a: &FqSet, b: &FqSet, cap: usize) -> Result<BsgCertificate> {
    a.same_field(b)?;
    if a.len() > cap || b.len() > cap {
        return Err(LabError::CostGuard(format!(
            "bsg_extract on |A| = {}, |B| = {} exceeds the cap {cap}",
            a.len(),
            b.len()
        )));
    }
    if b.len() > a.len() {
        let mut cert = extract(b, a)?;
        std::mem::swap(&mut cert.a_prime, &mut cert.b_prime);
        std::mem::swap(&mut cert.a_prime_size, &mut cert.b_prime_size);
        cert.swapped = true;
        return Ok(cert);
    }
    extract(a, b)
}

/// Path-of-length-three extraction on a bipartite graph given by `adj[i]`,
/// the neighbourhood of the `i`-th left vertex among `nb` right vertices.
///
/// Returns `(left, right, anchor index, anchors tried, min paths)`.
type PathCandidate = (Vec<usize>, Vec<usize>, usize, usize, u64);

fn paths_of_three(adj: &[FixedBitSet], nb: usize, edges: usize) -> Option<PathCandidate> {
    let na = adj.len();
    let (na_b, nb_b, e_b) = (big(na as u128), big(nb as u128), big(edges as u128));
    // Left vertices of degree at least |G| / (2|A|).
    let a1: Vec<usize> = (0..na).filter(|&i| big(2 * adj[i].count_ones(..) as u128) * &na_b >= e_b).collect();
    let e1: u128 = a1.iter().map(|&i| adj[i].count_ones(..) as u128).sum();
    // Codegrees over A1 x A.
    let codeg: Vec<Vec<u64>> = a1
        .par_iter()
        .map(|&i| (0..na).map(|j| adj[i].intersection_count(&adj[j]) as u64).collect())
        .collect();
    // Bad: 2 codeg K1^2 < eps |B| with K1 = |A1||B|/e1, eps = 1/(16 K0), K0 = |A||B|/|G|,
    // i.e. 32 codeg |A1|^2 |B|^2 |A||B| < |B| e1^2 |G|.
    let a1_b = big(a1.len() as u128);
    let bad_lhs = big(32) * &a1_b * &a1_b * &nb_b * &nb_b * &na_b * &nb_b;
    let bad_rhs = &nb_b * big(e1) * big(e1) * &e_b;
    let bad = |x: usize, y: usize| big(codeg[x][a1[y]] as u128) * &bad_lhs < bad_rhs;
    // Right-vertex neighbourhoods.
    let mut right: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(na); nb];
    for (i, row) in adj.iter().enumerate() {
        for j in row.ones() {
            right[j].insert(i);
        }
    }
    let mut in_a1 = FixedBitSet::with_capacity(na);
    for &i in &a1 {
        in_a1.insert(i);
    }
    let g2 = &e_b * &e_b;
    for (tried, b0) in (0..nb).enumerate() {
        // Positions in a1 of N(b0) cap A1.
        let a2: Vec<usize> = (0..a1.len()).filter(|&x| right[b0].contains(a1[x])).collect();
        if a2.is_empty() {
            continue;
        }
        let a2_len = a2.len() as u128;
        // At most 2 eps |A2| = |A2||B| / (8 |A||B| / |G|) bad partners.
        let a_prime: Vec<usize> = a2
            .iter()
            .copied()
            .filter(|&x| {
                let nbad = a2.iter().filter(|&&y| bad(x, y)).count() as u128;
                big(8 * nbad) * &na_b * &nb_b <= big(a2_len) * &e_b
            })
            .collect();
        // 32 |B|^2 |A'|^2 >= |G|^2
        let ap = big(a_prime.len() as u128);
        if big(32) * &nb_b * &nb_b * &ap * &ap < g2 {
            continue;
        }
        let mut a2_bits = FixedBitSet::with_capacity(na);
        for &x in &a2 {
            a2_bits.insert(a1[x]);
        }
        // deg_{A2}(b) >= |A2| / (4 K0), i.e. 4 deg |A||B| >= |A2| |G|.
        let b_prime: Vec<usize> = (0..nb)
            .filter(|&j| big(4 * right[j].intersection_count(&a2_bits) as u128) * &na_b * &nb_b >= big(a2_len) * &e_b)
            .collect();
        if big(4 * b_prime.len() as u128) * &na_b < e_b {
            continue;
        }
        // Paths a - b' - a'' - b: P3(a, b) = sum_{a'' in N(b)} codeg(a, a'').
        let need = {
            // 2^12 |A|^4 |B|^4 P3 >= |G|^5
            let g5 = &g2 * &g2 * &e_b;
            let scale = big(1 << 12) * (&na_b * &nb_b).pow(4);
            (g5, scale)
        };
        let mut min_paths = u64::MAX;
        let mut ok = true;
        for &x in &a_prime {
            for &j in &b_prime {
                let p3: u64 = right[j].ones().map(|k| codeg[x][k]).sum();
                min_paths = min_paths.min(p3);
                if big(p3 as u128) * &need.1 < need.0 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            let left = a_prime.iter().map(|&x| a1[x]).collect();
            return Some((left, b_prime, b0, tried + 1, min_paths));
        }
    }
    None
}

fn extract(a: &FqSet, b: &FqSet) -> Result<BsgCertificate> {
    let (na, nb) = (a.len(), b.len());
    let w_total = na as u128 * nb as u128;
    let r = rep_function(a, b, SetOp::Sum)?;
    let energy = r.second_moment();
    if energy <= w_total {
        return Err(LabError::Precondition(format!(
            "degenerate energy E = {energy} <= |A||B| = {w_total}"
        )));
    }
    let support: Vec<(Elem, u64)> = r.nonzero().collect();
    let f: Vec<u64> = support.iter().map(|&(_, c)| c).collect();
    let popularity = popularity_select(&f, &f, Rational::new(1, 2), Rational::integer(energy), nb as u64)?;
    let field = a.field();
    let popular = FqSet::from_elems(field, popularity.selected.iter().map(|&i| support[i].0))?;
    let a_list = a.to_vec();
    let b_list = b.to_vec();
    let adj: Vec<FixedBitSet> = a_list
        .iter()
        .map(|&x| {
            let mut row = FixedBitSet::with_capacity(nb);
            for (j, &y) in b_list.iter().enumerate() {
                if popular.contains(field.add(x, y)) {
                    row.insert(j);
                }
            }
            row
        })
        .collect();
    let edges: usize = adj.iter().map(|row| row.count_ones(..)).sum();
    if edges == 0 {
        return Err(LabError::EmptySelection { stage: "popular-sum graph" });
    }
    let k0 = Rational::new(w_total, edges as u128);
    let (left, right, anchor, anchors_tried, min_paths) = paths_of_three(&adj, nb, edges).ok_or_else(|| {
        LabError::InvariantViolation("no anchor produced a verified path-of-three candidate".into())
    })?;
    let a_prime = FqSet::from_elems(field, left.iter().map(|&i| a_list[i]))?;
    let b_prime = FqSet::from_elems(field, right.iter().map(|&j| b_list[j]))?;
    let sumset_size = sumset(&a_prime, &b_prime)?.len();

    let ab = w_total as f64;
    let k = ab.powf(1.5) / energy as f64;
    let k_squared = Rational::from_big(&big(w_total).pow(3), &(big(energy) * big(energy)))
        .ok_or_else(|| LabError::CostGuard("K^2 exceeds 128 bits".into()))?;
    let l = (nb as f64).log2();
    let a_prime_bound = na as f64 / (16.0 * std::f64::consts::SQRT_2 * l * k);
    let b_prime_bound = nb as f64 / (16.0 * l * k);
    let sumset_bound = (1u64 << 17) as f64 * k.powi(3) * l * l * ab.sqrt();
    let required_paths = ab / (4096.0 * k0.to_f64().powi(5));
    Ok(BsgCertificate {
        a_prime_size: a_prime.len(),
        b_prime_size: b_prime.len(),
        a_prime_ok: a_prime.len() as f64 >= a_prime_bound,
        b_prime_ok: b_prime.len() as f64 >= b_prime_bound,
        sumset_ok: sumset_size as f64 <= sumset_bound,
        a_prime,
        b_prime,
        swapped: false,
        a_size: na,
        b_size: nb,
        energy,
        k,
        k_squared,
        l,
        popular_sums: popular.len(),
        popularity,
        graph_edges: edges,
        k0,
        anchor: b_list[anchor],
        anchors_tried,
        min_paths,
        required_paths,
        sumset_size,
        a_prime_bound,
        b_prime_bound,
        sumset_bound,
    })
}
