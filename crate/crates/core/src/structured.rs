//! Deterministic set generators and the seeded draw protocol.
//!
//! Random draws use ChaCha8 seeded with `seed_from_u64(seed)` and the stream
//! number set to the trial index. A draw of `n` elements from a pool sorted by
//! encoding runs a partial Fisher–Yates shuffle, step `i` swapping position `i`
//! with `i + next_u64() % (len - i)`, and returns the first `n` entries sorted.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::field::{Elem, FieldTower};
use crate::sets::{dimension_over, span_over_subfield, FqSet};

/// The RNG for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` distinct elements from `pool` (which should be sorted).
pub fn draw_from(pool: &[Elem], n: usize, rng: &mut impl RngCore) -> Result<Vec<Elem>> {
    if n > pool.len() {
        return Err(LabError::InvalidArgument(format!("cannot draw {n} elements from a pool of {}", pool.len())));
    }
    let mut v = pool.to_vec();
    let len = v.len() as u64;
    for i in 0..n {
        let j = i as u64 + rng.next_u64() % (len - i as u64);
        v.swap(i, j as usize);
    }
    v.truncate(n);
    v.sort_unstable();
    Ok(v)
}

/// A random `n`-subset of `pool`.
pub fn random_subset(pool: &FqSet, n: usize, rng: &mut impl RngCore) -> Result<FqSet> {
    let elems = draw_from(&pool.to_vec(), n, rng)?;
    FqSet::from_elems(pool.field(), elems)
}

/// Set recipes accepted by the lab and the generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    List { elems: Vec<u64> },
    Random { n: usize },
    Subfield { k: u32 },
    /// Nonzero elements of a subfield.
    Units { k: u32 },
    /// `subfield(k) + c`.
    Coset { k: u32, c: u64 },
    /// `F`-span of `1, xi, ..., xi^{d-1}` with `F = subfield(k)`.
    Vspace { d: u32, k: u32 },
    /// `start + i * step` for `i < len`.
    Progression { start: u64, step: u64, len: u64 },
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::List { elems } => {
                let parts: Vec<String> = elems.iter().map(u64::to_string).collect();
                write!(f, "list:{}", parts.join(","))
            }
            SetSpec::Random { n } => write!(f, "random:{n}"),
            SetSpec::Subfield { k } => write!(f, "subfield:{k}"),
            SetSpec::Units { k } => write!(f, "units:{k}"),
            SetSpec::Coset { k, c } => write!(f, "coset:{k}:{c}"),
            SetSpec::Vspace { d, k } => write!(f, "vspace:{d}:{k}"),
            SetSpec::Progression { start, step, len } => write!(f, "progression:{start}:{step}:{len}"),
        }
    }
}

impl FromStr for SetSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || LabError::InvalidArgument(format!("malformed set spec '{s}'"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let args: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<u64> { args.get(i).ok_or_else(bad)?.trim().parse().map_err(|_| bad()) };
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(bad()) };
        let spec = match kind {
            "list" => {
                arity(1)?;
                let elems = if args[0].trim().is_empty() {
                    Vec::new()
                } else {
                    args[0].split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
                };
                SetSpec::List { elems }
            }
            "random" => {
                arity(1)?;
                SetSpec::Random { n: num(0)? as usize }
            }
            "subfield" => {
                arity(1)?;
                SetSpec::Subfield { k: num(0)? as u32 }
            }
            "units" => {
                arity(1)?;
                SetSpec::Units { k: num(0)? as u32 }
            }
            "coset" => {
                arity(2)?;
                SetSpec::Coset { k: num(0)? as u32, c: num(1)? }
            }
            "vspace" => {
                arity(2)?;
                SetSpec::Vspace { d: num(0)? as u32, k: num(1)? as u32 }
            }
            "progression" => {
                arity(3)?;
                SetSpec::Progression { start: num(0)?, step: num(1)?, len: num(2)? }
            }
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// Builds the set described by `spec`. Only `random` consumes the RNG.
pub fn generate_structured_set(field: &Arc<FieldTower>, spec: &SetSpec, rng: &mut impl RngCore) -> Result<FqSet> {
    match *spec {
        SetSpec::List { ref elems } => FqSet::from_encodings(field, elems),
        SetSpec::Random { n } => random_subset(&FqSet::full(field), n, rng),
        SetSpec::Subfield { k } => Ok(field.subfield(k)?.elements().clone()),
        SetSpec::Units { k } => Ok(field.subfield(k)?.elements().without_zero()),
        SetSpec::Coset { k, c } => {
            let c = field.check(c)?;
            Ok(field.subfield(k)?.elements().translate(c))
        }
        SetSpec::Vspace { d, k } => vspace(field, d, k),
        SetSpec::Progression { start, step, len } => {
            let (start, step) = (field.check(start)?, field.check(step)?);
            if len == 0 || len > field.p() as u64 {
                return Err(LabError::InvalidArgument(format!(
                    "progression length must be in 1..={}, got {len}",
                    field.p()
                )));
            }
            let mut out = FqSet::empty(field);
            let mut x = start;
            for _ in 0..len {
                out.insert(x);
                x = field.add(x, step);
            }
            Ok(out)
        }
    }
}

/// The `d`-dimensional space over `subfield(k)` spanned by `1, xi, ..., xi^{d-1}`,
/// where `xi` is the least encoding for which these are independent.
pub fn vspace(field: &Arc<FieldTower>, d: u32, k: u32) -> Result<FqSet> {
    field.require_divisor(k)?;
    if d == 0 || d * k > field.r() {
        return Err(LabError::InvalidArgument(format!(
            "vspace needs 1 <= d and d*k <= r (d={d}, k={k}, r={})",
            field.r()
        )));
    }
    let sub = field.subfield(k)?;
    if d == 1 {
        return Ok(sub.elements().clone());
    }
    for xi in field.elements() {
        if sub.contains(xi) {
            continue;
        }
        let basis = FqSet::from_elems(field, (0..d).map(|i| field.pow(xi, i as u64)))?;
        let span = span_over_subfield(&basis, &sub)?;
        if dimension_over(&span, &sub) == Some(d) {
            return Ok(span);
        }
    }
    unreachable!("a generator of F_q always yields an independent basis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    #[test]
    fn parse_round_trip() {
        for s in ["list:1,2,3", "random:20", "subfield:2", "units:1", "coset:1:5", "vspace:2:1", "progression:0:1:5"] {
            let spec: SetSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        for s in ["", "random", "random:x", "coset:1", "shape:1", "list:1,a"] {
            assert!(s.parse::<SetSpec>().is_err(), "{s}");
        }
        assert_eq!("list:".parse::<SetSpec>().unwrap(), SetSpec::List { elems: vec![] });
    }

    #[test]
    fn progression_in_f31() {
        let f = build_field(31, 1).unwrap();
        let s = generate_structured_set(&f, &"progression:0:1:5".parse().unwrap(), &mut trial_rng(0, 0)).unwrap();
        assert_eq!(s.to_vec(), vec![0, 1, 2, 3, 4]);
        assert!(generate_structured_set(&f, &"progression:0:1:32".parse().unwrap(), &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let f = build_field(2, 8).unwrap();
        let spec = SetSpec::Random { n: 20 };
        let a = generate_structured_set(&f, &spec, &mut trial_rng(7, 0)).unwrap();
        let b = generate_structured_set(&f, &spec, &mut trial_rng(7, 0)).unwrap();
        let c = generate_structured_set(&f, &spec, &mut trial_rng(7, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert_ne!(a, c);
        assert!(generate_structured_set(&f, &SetSpec::Random { n: 257 }, &mut trial_rng(7, 0)).is_err());
    }

    #[test]
    fn vspace_shapes() {
        let f = build_field(3, 3).unwrap();
        let v = vspace(&f, 2, 1).unwrap();
        assert_eq!(v.len(), 9);
        assert!(v.contains(1));
        assert!(vspace(&f, 4, 1).is_err());
        assert!(vspace(&f, 2, 2).is_err());
        let g = build_field(3, 6).unwrap();
        assert_eq!(vspace(&g, 2, 2).unwrap().len(), 81);
        assert_eq!(vspace(&g, 3, 2).unwrap().len(), 729);
    }
}
