use std::sync::Arc;

use super::*;
use crate::field::{build_field, FieldTower};
use crate::structured::{random_subset, trial_rng, vspace};

fn energy_oracle(a: &FqSet, xi: Elem, b: &FqSet) -> u128 {
    let f = a.field();
    let mut n = 0;
    for a1 in a.iter() {
        for a2 in a.iter() {
            for b1 in b.iter() {
                for b2 in b.iter() {
                    if f.sub(a1, a2) == f.mul(xi, f.sub(b1, b2)) {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

/// Six free variables, the last pair resolved through `r_{A-A}`.
fn d_times_oracle(a: &FqSet) -> u128 {
    let f = a.field();
    let r = rep_function(a, a, SetOp::Diff).unwrap();
    let e = a.to_vec();
    let n = e.len() as u128;
    let mut total = 0u128;
    for &a1 in &e {
        for &a2 in &e {
            let u = f.sub(a1, a2);
            for &a3 in &e {
                for &a4 in &e {
                    let x = f.mul(u, f.sub(a3, a4));
                    for &a5 in &e {
                        for &a6 in &e {
                            let y = f.sub(a5, a6);
                            total += match f.div(x, y) {
                                Some(z) => r.get(z) as u128,
                                None if x == 0 => n * n,
                                None => 0,
                            };
                        }
                    }
                }
            }
        }
    }
    total
}

fn collinear_oracle(a: &FqSet) -> u128 {
    let f = a.field();
    let e = a.to_vec();
    let mut t = 0;
    for &a1 in &e {
        for &a2 in &e {
            for &a3 in &e {
                for &a4 in &e {
                    let lhs = f.mul(f.sub(a1, a2), f.sub(a3, a4));
                    for &a5 in &e {
                        for &a6 in &e {
                            if lhs == f.mul(f.sub(a1, a5), f.sub(a3, a6)) {
                                t += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    t
}

fn rand_set(f: &Arc<FieldTower>, n: usize, seed: u64, stream: u64) -> FqSet {
    random_subset(&FqSet::full(f), n, &mut trial_rng(seed, stream)).unwrap()
}

#[test]
fn energy_examples() {
    let f = build_field(5, 2).unwrap();
    let one = FqSet::from_elems(&f, [7]).unwrap();
    for xi in 1..25 {
        assert_eq!(energy(&one, xi, &one).unwrap(), 1);
    }
    let all = FqSet::full(&f);
    assert_eq!(energy(&all, 3, &all).unwrap(), 25u128.pow(3));
    assert!(energy(&all, 0, &all).is_err());

    // A two-dimensional space over F_5 inside F_125.
    let g = build_field(5, 3).unwrap();
    let v = vspace(&g, 2, 1).unwrap();
    for xi in 1..5 {
        assert_eq!(energy(&v, xi, &v).unwrap(), 25u128.pow(3));
    }
}

#[test]
fn energy_matches_oracle_and_sign_convention() {
    let f = build_field(2, 6).unwrap();
    for t in 0..20 {
        let a = rand_set(&f, 3 + t as usize % 9, 11, t);
        let b = rand_set(&f, 2 + t as usize % 7, 12, t);
        let xi = 1 + (t as u32 * 7) % 63;
        let e = energy(&a, xi, &b).unwrap();
        assert_eq!(e, energy_oracle(&a, xi, &b));
        let plus = rep_function(&a, &b.dilate(xi), SetOp::Sum).unwrap().second_moment();
        let minus = rep_function(&a, &b.dilate(xi), SetOp::Diff).unwrap().second_moment();
        assert_eq!((plus, minus), (e, e));
        // E(A, xi B) >= |A|^2|B|^2 / q
        assert!(e * 64 >= (a.len() * a.len() * b.len() * b.len()) as u128);
    }
}

#[test]
fn spectrum_of_whole_field() {
    let f = build_field(7, 1).unwrap();
    let s = dilate_spectrum(&FqSet::full(&f)).unwrap();
    assert_eq!(s.rows.len(), 6);
    assert!(s.rows.iter().all(|r| r.q_xi == 343 - 49));
}

#[test]
fn spectrum_of_prime_subfield_peaks_on_its_units() {
    let f = build_field(3, 3).unwrap();
    let a = f.subfield(1).unwrap().elements().clone();
    let s = dilate_spectrum(&a).unwrap();
    let max = s.rows.iter().map(|r| r.q_xi).max().unwrap();
    let argmax: Vec<Elem> = s.rows.iter().filter(|r| r.q_xi == max).map(|r| r.xi).collect();
    assert_eq!(argmax, vec![1, 2]);
}

#[test]
fn spectrum_sums_are_bounded() {
    let f = build_field(2, 7).unwrap();
    for t in 0..10 {
        let a = rand_set(&f, 5 + 3 * t as usize, 21, t);
        let s = dilate_spectrum(&a).unwrap();
        let n = a.len() as u128;
        assert!(s.sum_q() <= n.pow(4));
        assert!(s.sum_e() <= Rational::integer(128 * n * n));
        for r in &s.rows {
            assert_eq!(r.energy, energy_oracle(&a, r.xi, &a));
        }
    }
}

#[test]
fn e_xi_can_vanish() {
    // A = F_3 in F_9: every xi outside F_3 only sees the diagonal, so E = |A|^4/q.
    let f = build_field(3, 2).unwrap();
    let a = f.subfield(1).unwrap().elements().clone();
    let s = dilate_spectrum(&a).unwrap();
    for r in &s.rows {
        if a.contains(r.xi) {
            assert!(!r.e_xi.is_zero());
        } else {
            assert!(r.e_xi.is_zero());
        }
    }
}

#[test]
fn d_times_examples() {
    let f = build_field(2, 1).unwrap();
    assert_eq!(d_times(&FqSet::full(&f)).unwrap().d_times, 160);
    let g = build_field(11, 1).unwrap();
    assert_eq!(d_times(&FqSet::from_elems(&g, [4]).unwrap()).unwrap().d_times, 1);
}

#[test]
fn d_times_matches_oracle() {
    let f = build_field(3, 3).unwrap();
    for t in 0..6 {
        let a = rand_set(&f, 2 + t as usize, 5, t);
        let rep = d_times(&a).unwrap();
        assert_eq!(rep.d_times, d_times_oracle(&a));
        assert_eq!(rep.d_times, rep.d_zero + rep.d_star);
    }
}

#[test]
fn d_times_affine_invariance() {
    let f = build_field(2, 6).unwrap();
    let a = rand_set(&f, 9, 3, 0);
    let base = d_times(&a).unwrap().d_times;
    for c in [1, 17, 40] {
        assert_eq!(d_times(&a.translate(c)).unwrap().d_times, base);
    }
    for l in [2, 33, 63] {
        assert_eq!(d_times(&a.dilate(l)).unwrap().d_times, base);
    }
}

#[test]
fn cauchy_schwarz_lower_bound() {
    let f = build_field(5, 2).unwrap();
    for t in 0..50 {
        let a = rand_set(&f, 2 + t as usize % 10, 8, t);
        let rep = d_times(&a).unwrap();
        let n = a.len() as u128;
        assert!(rep.distinct as u128 * rep.d_times >= n.pow(8));
    }
}

#[test]
fn four_set_specializes() {
    let f = build_field(2, 5).unwrap();
    let a = rand_set(&f, 6, 1, 0);
    assert_eq!(d_times4(&a, &a, &a, &a).unwrap().d_times, d_times(&a).unwrap().d_times);
    let s = FqSet::from_elems(&f, [3]).unwrap();
    assert_eq!(d_times4(&s, &s, &s, &s).unwrap().d_times, 1);
}

#[test]
fn four_set_bound_on_random_quadruples() {
    let f = build_field(3, 3).unwrap();
    for t in 0..30 {
        let mut sizes = [2 + t as usize % 4, 3 + t as usize % 5, 2 + t as usize % 3, 0];
        sizes[1] = sizes[1].max(sizes[0]);
        sizes[3] = sizes[1].max(sizes[2]) + t as usize % 3;
        let sets: Vec<FqSet> = sizes.iter().enumerate().map(|(i, &n)| rand_set(&f, n, 40 + i as u64, t)).collect();
        let r = four_set_bound(&sets[0], &sets[1], &sets[2], &sets[3]).unwrap();
        assert!(r.ordered);
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn collinear_examples() {
    let f = build_field(3, 1).unwrap();
    let all = FqSet::full(&f);
    assert_eq!(collinear_energy(&all, COLLINEAR_CAP).unwrap(), collinear_oracle(&all));
    let one = FqSet::from_elems(&f, [2]).unwrap();
    assert_eq!(collinear_energy(&one, COLLINEAR_CAP).unwrap(), 1);
    assert!(matches!(collinear_energy(&all, 2), Err(LabError::CostGuard(_))));

    let g = build_field(2, 6).unwrap();
    for t in 0..5 {
        let a = rand_set(&g, 8, 9, t);
        let rep = d_times_with_collinear(&a, COLLINEAR_CAP).unwrap();
        assert_eq!(rep.collinear, Some(collinear_oracle(&a)));
    }
}

#[test]
fn bkt_examples() {
    let f = build_field(2, 6).unwrap();
    let one = FqSet::from_elems(&f, [1]).unwrap();
    let r = verify_bkt(&one, &one, &one).unwrap();
    assert_eq!((r.energy_sum, r.bound, r.witness_sumset), (1, 2, 1));
    assert!(r.holds && r.witness_ok);
    assert!(verify_bkt(&one, &one, &FqSet::from_elems(&f, [0, 1]).unwrap()).is_err());

    let g = build_field(3, 3).unwrap();
    let v = vspace(&g, 2, 1).unwrap();
    let s = g.subfield(1).unwrap().elements().without_zero();
    let r = verify_bkt(&v, &v, &s).unwrap();
    assert_eq!(r.energy_sum, 2 * 729);
    assert!(r.holds && r.witness_ok);
}

#[test]
fn popular_dilates_size_guard() {
    let f = build_field(3, 3).unwrap();
    // |A| <= q/(4K) is an equality at K = 1/4 and fails for any larger K.
    let edge = extract_popular_dilates(&FqSet::full(&f), Rational::new(1, 4)).unwrap();
    assert!(edge.size_ok);
    let out = extract_popular_dilates(&FqSet::full(&f), Rational::new(1, 2)).unwrap();
    assert!(!out.size_ok);
    assert!(out.x.is_none());
    assert!(extract_popular_dilates(&FqSet::full(&f), Rational::integer(0)).is_err());
}

#[test]
fn popular_dilates_on_f125_plane_has_no_admissible_k() {
    let f = build_field(5, 3).unwrap();
    let v = vspace(&f, 2, 1).unwrap();
    assert_eq!(d_times(&v).unwrap().d_times, 2_587_890_625);
    assert!(popular_dilate_window(&v).unwrap().is_none());
    let out = extract_popular_dilates(&v, Rational::new(5, 4)).unwrap();
    assert!(out.size_ok && !out.moment_ok);
    assert!(out.x.is_none());
}

#[test]
fn popular_dilates_window_endpoints_satisfy_hypotheses() {
    // F_13 inside F_{13^3}.
    let f = build_field(13, 3).unwrap();
    let a = f.subfield(1).unwrap().elements().clone();
    let (lo, hi) = popular_dilate_window(&a).unwrap().expect("nonempty window");
    for k in [lo, hi] {
        let out = extract_popular_dilates(&a, k).unwrap();
        assert!(out.size_ok && out.moment_ok);
        assert_eq!(out.bounds_hold, Some(true));
    }
}

#[test]
fn random_sparse_sets_fail_hypotheses() {
    let f = build_field(2, 8).unwrap();
    for t in 0..5 {
        let a = rand_set(&f, 12, 77, t);
        let out = extract_popular_dilates(&a, Rational::integer(2)).unwrap();
        assert!(out.x.is_none());
    }
}
