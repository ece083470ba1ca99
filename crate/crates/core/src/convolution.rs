//! Multiplicative convolution of functions on `F_q`.
//!
//! Zero is handled exactly; the nonzero part is a cyclic convolution over
//! `Z/(q-1)` obtained through the discrete logarithm. The cyclic step is
//! pluggable through [`CyclicKernel`].

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::field::{Elem, FieldTower};
use crate::sets::{rep_function, FqSet, RepFn, SetOp};

/// Cyclic convolution `out[k] = sum_{i + j = k mod n} f[i] g[j]` on integer vectors.
pub trait CyclicKernel: Send + Sync {
    fn name(&self) -> &'static str;
    fn convolve(&self, f: &[u64], g: &[u64]) -> Result<Vec<u64>>;
}

/// Sparse direct loop over the supports of both inputs.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectKernel;

impl CyclicKernel for DirectKernel {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn convolve(&self, f: &[u64], g: &[u64]) -> Result<Vec<u64>> {
        let n = f.len();
        let gs: Vec<(usize, u64)> = g.iter().copied().enumerate().filter(|&(_, v)| v > 0).collect();
        let mut acc = vec![0u128; n];
        for (i, &fv) in f.iter().enumerate() {
            if fv == 0 {
                continue;
            }
            for &(j, gv) in &gs {
                let k = if i + j >= n { i + j - n } else { i + j };
                acc[k] += fv as u128 * gv as u128;
            }
        }
        narrow(acc)
    }
}

/// Floating FFT over `Z/n`, rounded back to integers.
///
/// Rejects the result when any output sits 0.25 or further from an integer.
#[derive(Debug, Default, Clone, Copy)]
pub struct FftKernel;

pub const FFT_ROUNDING_LIMIT: f64 = 0.25;

impl CyclicKernel for FftKernel {
    fn name(&self) -> &'static str {
        "fft"
    }

    fn convolve(&self, f: &[u64], g: &[u64]) -> Result<Vec<u64>> {
        let n = f.len();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut fa: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        let mut ga: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        fwd.process(&mut fa);
        fwd.process(&mut ga);
        for (x, y) in fa.iter_mut().zip(&ga) {
            *x *= y;
        }
        inv.process(&mut fa);
        let scale = 1.0 / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut worst = 0.0f64;
        for z in &fa {
            let v = z.re * scale;
            let rounded = v.round();
            worst = worst.max((v - rounded).abs());
            if rounded < 0.0 || rounded >= u64::MAX as f64 {
                return Err(LabError::InvariantViolation(format!("fft output {v} out of range")));
            }
            out.push(rounded as u64);
        }
        if worst >= FFT_ROUNDING_LIMIT {
            return Err(LabError::InvariantViolation(format!(
                "fft rounding error {worst} exceeds {FFT_ROUNDING_LIMIT}"
            )));
        }
        Ok(out)
    }
}

fn narrow(acc: Vec<u128>) -> Result<Vec<u64>> {
    acc.into_iter()
        .map(|v| u64::try_from(v).map_err(|_| LabError::InvariantViolation("count overflows u64".into())))
        .collect()
}

/// Names of the registered kernels.
pub const KERNELS: &[&str] = &["direct", "fft"];

/// Looks up a kernel by name.
pub fn kernel_by_name(name: &str) -> Result<Box<dyn CyclicKernel>> {
    match name {
        "direct" => Ok(Box::new(DirectKernel)),
        "fft" => Ok(Box::new(FftKernel)),
        other => Err(LabError::InvalidArgument(format!(
            "unknown convolution kernel '{other}' (known: {})",
            KERNELS.join(", ")
        ))),
    }
}

/// `out[x] = sum_{uv = x} f(u) g(v)` using the direct kernel.
pub fn mul_convolution(f: &RepFn, g: &RepFn) -> Result<RepFn> {
    mul_convolution_with(&DirectKernel, f, g)
}

pub fn mul_convolution_with(kernel: &dyn CyclicKernel, f: &RepFn, g: &RepFn) -> Result<RepFn> {
    let field = f.field();
    if !field.same_field(g.field()) {
        return Err(LabError::FieldMismatch);
    }
    let n = field.unit_order() as usize;
    let to_logs = |h: &RepFn| {
        let mut v = vec![0u64; n];
        for (x, c) in h.nonzero() {
            if x != 0 {
                v[field.log(x).expect("nonzero") as usize] = c;
            }
        }
        v
    };
    let cyc = kernel.convolve(&to_logs(f), &to_logs(g))?;
    let mut out = RepFn::zero(field);
    let counts = out.counts_mut();
    for (e, &c) in cyc.iter().enumerate() {
        counts[field.exp(e as u64) as usize] = c;
    }
    let (f0, g0) = (f.get(0) as u128, g.get(0) as u128);
    let zero = f0 * g.total() + g0 * f.total() - f0 * g0;
    counts[0] = u64::try_from(zero).map_err(|_| LabError::InvariantViolation("count overflows u64".into()))?;
    Ok(out)
}

/// `r_{(A-B)(C-D)}` computed as the convolution of `r_{A-B}` and `r_{C-D}`.
pub fn product_of_differences_rep(a: &FqSet, b: &FqSet, c: &FqSet, d: &FqSet) -> Result<RepFn> {
    let rab = rep_function(a, b, SetOp::Diff)?;
    let rcd = rep_function(c, d, SetOp::Diff)?;
    mul_convolution(&rab, &rcd)
}

/// The set `(A-B)(C-D)`.
pub fn products_of_differences(a: &FqSet, b: &FqSet, c: &FqSet, d: &FqSet) -> Result<FqSet> {
    for s in [a, b, c, d] {
        if s.is_empty() {
            return Err(LabError::Precondition("products_of_differences needs nonempty sets".into()));
        }
    }
    Ok(product_of_differences_rep(a, b, c, d)?.support())
}

/// Product set of two sets via their logarithms, for wide inputs.
pub fn product_set_fast(field: &Arc<FieldTower>, a: &FqSet, b: &FqSet) -> Result<FqSet> {
    a.same_field(b)?;
    let mut out = FqSet::empty(field);
    if a.is_empty() || b.is_empty() {
        return Ok(out);
    }
    if a.contains(0) || b.contains(0) {
        out.insert(0);
    }
    let la: Vec<u32> = a.iter().filter_map(|x| field.log(x)).collect();
    let lb: Vec<u32> = b.iter().filter_map(|x| field.log(x)).collect();
    for &i in &la {
        for &j in &lb {
            out.insert(field.exp(i as u64 + j as u64) as Elem);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    fn quadruple_oracle(a: &[Elem], field: &FieldTower) -> Vec<u64> {
        let mut out = vec![0u64; field.q() as usize];
        for &a1 in a {
            for &a2 in a {
                for &a3 in a {
                    for &a4 in a {
                        out[field.mul(field.sub(a1, a2), field.sub(a3, a4)) as usize] += 1;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn unit_and_zero() {
        let f = build_field(7, 1).unwrap();
        let one = RepFn::indicator(&FqSet::from_elems(&f, [1]).unwrap());
        assert_eq!(mul_convolution(&one, &one).unwrap(), one);
        let zero = RepFn::indicator(&FqSet::from_elems(&f, [0]).unwrap());
        let g = RepFn::from_counts(&f, vec![3, 1, 0, 4, 0, 0, 2]).unwrap();
        let out = mul_convolution(&zero, &g).unwrap();
        assert_eq!(out.sparse(), [(0, 10)].into_iter().collect());
    }

    #[test]
    fn f5_pair_matches_quadruple_loop() {
        let f = build_field(5, 1).unwrap();
        let a = FqSet::from_elems(&f, [0, 1]).unwrap();
        let r = rep_function(&a, &a, SetOp::Diff).unwrap();
        let out = mul_convolution(&r, &r).unwrap();
        assert_eq!(out.counts(), quadruple_oracle(&[0, 1], &f).as_slice());
    }

    #[test]
    fn kernels_agree() {
        let f = build_field(2, 7).unwrap();
        let a = FqSet::from_elems(&f, [0, 3, 5, 17, 40, 99, 100, 127]).unwrap();
        let r = rep_function(&a, &a, SetOp::Diff).unwrap();
        let direct = mul_convolution(&r, &r).unwrap();
        let fft = mul_convolution_with(kernel_by_name("fft").unwrap().as_ref(), &r, &r).unwrap();
        assert_eq!(direct, fft);
        assert_eq!(direct.counts(), quadruple_oracle(&a.to_vec(), &f).as_slice());
        assert_eq!(direct.total(), r.total() * r.total());
        assert!(kernel_by_name("nope").is_err());
    }

    #[test]
    fn products_of_differences_examples() {
        let f2 = build_field(2, 1).unwrap();
        let a = FqSet::full(&f2);
        assert_eq!(products_of_differences(&a, &a, &a, &a).unwrap().to_vec(), vec![0, 1]);

        let f27 = build_field(3, 3).unwrap();
        let f3 = f27.subfield(1).unwrap();
        let s = f3.elements();
        assert_eq!(products_of_differences(s, s, s, s).unwrap(), *s);

        let b = FqSet::from_elems(&f27, [4, 9]).unwrap();
        let c = FqSet::from_elems(&f27, [1, 4]).unwrap();
        assert!(products_of_differences(&b, &c, &b, &c).unwrap().contains(0));
    }

    #[test]
    fn product_set_fast_matches_combine() {
        let f = build_field(3, 4).unwrap();
        let a = FqSet::from_elems(&f, [0, 2, 7, 30, 66]).unwrap();
        let b = FqSet::from_elems(&f, [1, 5, 80]).unwrap();
        assert_eq!(product_set_fast(&f, &a, &b).unwrap(), crate::sets::productset(&a, &b).unwrap());
    }
}
