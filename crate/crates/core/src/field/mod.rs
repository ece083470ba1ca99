//! Finite fields `F_{p^r}` with their subfield lattice, Frobenius, traces and
//! additive characters.
//!
//! Elements are encoded as integers in `[0, q)` by base-`p` packing of the
//! coefficient vector over the fixed modulus: `c_0 + c_1 t + ... ` encodes as
//! `c_0 + c_1 p + c_2 p^2 + ...`. The prime subfield is therefore `0..p`.

mod poly;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sets::FqSet;

/// Canonical integer encoding of a field element.
pub type Elem = u32;

/// Default upper bound on `q`.
pub const DEFAULT_SIZE_CAP: u64 = 1 << 24;

/// Split-table addition is used while the low-half table stays below this many entries.
const SPLIT_TABLE_LIMIT: u64 = 1 << 24;

#[derive(Clone)]
enum Adder {
    Prime,
    Binary,
    /// Digit-wise addition has no carries, so the low and high halves of the
    /// encoding can be added independently with one table.
    Split { base: u32, table: Vec<u32>, neg: Vec<u32> },
    Digits,
}

/// JSON-friendly description of a constructed tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDescriptor {
    pub p: u32,
    pub r: u32,
    pub modulus: Vec<u32>,
    pub generator: Elem,
}

/// The field `F_{p^r}` with log/antilog tables over a fixed primitive element.
///
/// Immutable after construction.
pub struct FieldTower {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Elem,
    log: Vec<u32>,
    exp: Vec<u32>,
    pow_p: Vec<u64>,
    subfield_degrees: Vec<u32>,
    adder: Adder,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn divisors(r: u32) -> Vec<u32> {
    (1..=r).filter(|k| r.is_multiple_of(*k)).collect()
}

/// Builds `F_{p^r}` under the default size cap.
pub fn build_field(p: u32, r: u32) -> Result<Arc<FieldTower>> {
    FieldTower::with_cap(p, r, DEFAULT_SIZE_CAP).map(Arc::new)
}

impl FieldTower {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        Self::with_cap(p, r, DEFAULT_SIZE_CAP)
    }

    /// Constructs the field with the lexicographically least monic irreducible
    /// modulus and the least primitive element as generator.
    pub fn with_cap(p: u32, r: u32, cap: u64) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(LabError::NotPrime(p as u64));
        }
        if r == 0 {
            return Err(LabError::ZeroDegree);
        }
        let too_large = || LabError::FieldTooLarge { p: p as u64, r, cap };
        let mut q: u64 = 1;
        for _ in 0..r {
            q = q.checked_mul(p as u64).ok_or_else(too_large)?;
            if q > cap || q > u32::MAX as u64 {
                return Err(too_large());
            }
        }
        let p64 = p as u64;
        let pow_p: Vec<u64> = (0..=r).map(|i| p64.pow(i)).collect();
        let digits = |mut x: u64| -> Vec<u64> {
            (0..r)
                .map(|_| {
                    let d = x % p64;
                    x /= p64;
                    d
                })
                .collect()
        };

        let modulus: Vec<u64> = (0..q)
            .map(|low| {
                let mut f = digits(low);
                f.push(1);
                f
            })
            .find(|f| poly::is_irreducible(f, p64))
            .expect("an irreducible polynomial of every degree exists");

        let pack = |c: &[u64]| -> u32 {
            c.iter().zip(&pow_p).map(|(&d, &w)| d * w).sum::<u64>() as u32
        };
        let slow_mul = |a: u64, b: u64| -> u32 {
            pack(&poly::mul_mod(&digits(a), &digits(b), &modulus, p64))
        };
        let slow_pow = |a: u64, e: u64| -> u32 {
            let prod = poly::pow_mod(&digits(a), e as u128, &modulus, p64);
            pack(&prod)
        };

        let order = q - 1;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| factors.iter().all(|&l| slow_pow(g, order / l) != 1))
            .expect("the multiplicative group is cyclic") as u32;

        let n = order as usize;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur: u32 = 1;
        for i in 0..n {
            if log[cur as usize] != u32::MAX {
                return Err(LabError::InvariantViolation(format!(
                    "element {generator} is not primitive"
                )));
            }
            exp[i] = cur;
            exp[i + n] = cur;
            log[cur as usize] = i as u32;
            cur = slow_mul(cur as u64, generator as u64);
        }
        if cur != 1 {
            return Err(LabError::InvariantViolation("generator cycle did not close".into()));
        }

        let adder = if r == 1 {
            Adder::Prime
        } else if p == 2 {
            Adder::Binary
        } else {
            let half = r.div_ceil(2);
            let base = pow_p[half as usize];
            if base * base <= SPLIT_TABLE_LIMIT {
                let b = base as u32;
                let mut table = vec![0u32; (base * base) as usize];
                let mut neg = vec![0u32; base as usize];
                for x in 0..b {
                    let dx = (0..half).map(|i| (x as u64 / pow_p[i as usize]) % p64);
                    neg[x as usize] = dx
                        .clone()
                        .zip(&pow_p)
                        .map(|(d, w)| ((p64 - d) % p64) * w)
                        .sum::<u64>() as u32;
                    for y in 0..b {
                        let s: u64 = (0..half as usize)
                            .map(|i| {
                                let d = (x as u64 / pow_p[i]) % p64 + (y as u64 / pow_p[i]) % p64;
                                (d % p64) * pow_p[i]
                            })
                            .sum();
                        table[(x * b + y) as usize] = s as u32;
                    }
                }
                Adder::Split { base: b, table, neg }
            } else {
                Adder::Digits
            }
        };

        Ok(FieldTower {
            p,
            r,
            q: q as u32,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
            generator,
            log,
            exp,
            pow_p,
            subfield_degrees: divisors(r),
            adder,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Coefficients `c_0, ..., c_r` of the monic modulus.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn subfield_degrees(&self) -> &[u32] {
        &self.subfield_degrees
    }

    pub fn descriptor(&self) -> TowerDescriptor {
        TowerDescriptor {
            p: self.p,
            r: self.r,
            modulus: self.modulus.clone(),
            generator: self.generator,
        }
    }

    /// Two towers are interchangeable when they have the same `(p, r)`:
    /// construction is deterministic.
    pub fn same_field(&self, other: &FieldTower) -> bool {
        self.p == other.p && self.r == other.r
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.q
    }

    pub fn check(&self, x: u64) -> Result<Elem> {
        if x < self.q as u64 {
            Ok(x as Elem)
        } else {
            Err(LabError::OutOfField(x))
        }
    }

    pub fn coefficients(&self, x: Elem) -> Vec<u32> {
        let mut x = x;
        (0..self.r)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.adder {
            Adder::Prime => {
                let s = a as u64 + b as u64;
                (s % self.p as u64) as u32
            }
            Adder::Binary => a ^ b,
            Adder::Split { base, table, .. } => {
                let (al, ah) = (a % base, a / base);
                let (bl, bh) = (b % base, b / base);
                table[(al * base + bl) as usize] + base * table[(ah * base + bh) as usize]
            }
            Adder::Digits => {
                let p = self.p as u64;
                let (mut a, mut b) = (a as u64, b as u64);
                let mut out = 0u64;
                for w in &self.pow_p[..self.r as usize] {
                    out += ((a % p + b % p) % p) * w;
                    a /= p;
                    b /= p;
                }
                out as u32
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        match &self.adder {
            Adder::Prime => (self.p - a) % self.p,
            Adder::Binary => a,
            Adder::Split { base, neg, .. } => neg[(a % base) as usize] + base * neg[(a / base) as usize],
            Adder::Digits => {
                let p = self.p as u64;
                let mut a = a as u64;
                let mut out = 0u64;
                for w in &self.pow_p[..self.r as usize] {
                    out += ((p - a % p) % p) * w;
                    a /= p;
                }
                out as u32
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        Some(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a as usize] as u64;
        self.exp[((l as u128 * e as u128) % n as u128) as usize]
    }

    /// Discrete logarithm to base [`FieldTower::generator`]; `None` for zero.
    #[inline]
    pub fn log(&self, a: Elem) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// `g^e` for `e` reduced modulo `q - 1`.
    #[inline]
    pub fn exp(&self, e: u64) -> Elem {
        self.exp[(e % (self.q as u64 - 1)) as usize]
    }

    /// Multiplicative order of `g^e`'s group, i.e. `q - 1`.
    pub fn unit_order(&self) -> u32 {
        self.q - 1
    }

    /// `x^{p^k}`.
    pub fn frobenius(&self, x: Elem, k: u32) -> Elem {
        if x == 0 || self.q == 2 {
            return x;
        }
        let n = (self.q - 1) as u64;
        let mut e = 1u64;
        for _ in 0..k % self.r {
            e = e * self.p as u64 % n;
        }
        self.pow(x, e)
    }

    pub fn in_subfield(&self, x: Elem, k: u32) -> bool {
        self.frobenius(x, k) == x
    }

    pub fn require_divisor(&self, k: u32) -> Result<()> {
        if k == 0 || !self.r.is_multiple_of(k) {
            return Err(LabError::NotADivisor { k, r: self.r });
        }
        Ok(())
    }

    /// Relative trace from the degree-`upper` subfield down to the degree-`lower`
    /// subfield: `sum_{i < upper/lower} x^{p^{lower i}}`.
    pub fn relative_trace(&self, x: Elem, upper: u32, lower: u32) -> Result<Elem> {
        self.require_divisor(upper)?;
        self.require_divisor(lower)?;
        if !upper.is_multiple_of(lower) {
            return Err(LabError::NotADivisor { k: lower, r: upper });
        }
        if !self.in_subfield(x, upper) {
            return Err(LabError::InvalidArgument(format!(
                "{x} is not in the degree-{upper} subfield"
            )));
        }
        let mut acc = 0;
        for i in 0..upper / lower {
            acc = self.add(acc, self.frobenius(x, lower * i));
        }
        Ok(acc)
    }

    /// Trace of `x` down to the subfield of degree `down_to_k`.
    pub fn trace(&self, x: Elem, down_to_k: u32) -> Result<Elem> {
        self.relative_trace(x, self.r, down_to_k)
    }

    /// Absolute trace, as an integer in `0..p`.
    pub fn abs_trace(&self, x: Elem) -> u32 {
        self.relative_trace(x, self.r, 1).expect("1 divides r")
    }

    /// `exp(2 pi i Tr(x) / p)`.
    pub fn additive_character(&self, x: Elem) -> Complex64 {
        let t = self.abs_trace(x) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * t / self.p as f64)
    }

    pub fn subfield(self: &Arc<Self>, k: u32) -> Result<SubfieldHandle> {
        self.require_divisor(k)?;
        let size = self.pow_p[k as usize] as u32;
        let step = ((self.q - 1) / (size - 1)) as u64;
        let elems = std::iter::once(0).chain((0..(size - 1) as u64).map(|j| self.exp(j * step)));
        let elements = FqSet::from_elems(self, elems)?;
        Ok(SubfieldHandle { degree: k, elements })
    }

    /// `x` is a square in `F_q` (odd characteristic only).
    pub fn is_square(&self, x: Elem) -> Result<bool> {
        if self.p == 2 {
            return Err(LabError::WrongCharacteristic { expected: "odd", actual: 2 });
        }
        Ok(x == 0 || self.log[x as usize].is_multiple_of(2))
    }

    /// Solves `z^2 + z = w` over `F_{2^r}`; `None` exactly when `Tr(w) = 1`.
    /// The returned root has all free coordinates set to zero; the other root is `z + 1`.
    pub fn solve_artin_schreier(&self, w: Elem) -> Result<Option<Elem>> {
        if self.p != 2 {
            return Err(LabError::WrongCharacteristic { expected: "2", actual: self.p });
        }
        let r = self.r as usize;
        // Columns of the F_2-linear map z -> z^2 + z.
        let cols: Vec<u32> = (0..r).map(|i| {
            let e = 1u32 << i;
            self.mul(e, e) ^ e
        }).collect();
        // Row-reduce the augmented system [M | w] with rows indexed by output bit.
        let mut rows: Vec<(u32, u32)> = (0..r)
            .map(|bit| {
                let row = (0..r).fold(0u32, |acc, j| acc | (((cols[j] >> bit) & 1) << j));
                (row, (w >> bit) & 1)
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..r {
            let Some(sel) = (rank..r).find(|&i| (rows[i].0 >> col) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, sel);
            let pivot = rows[rank];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && (row.0 >> col) & 1 == 1 {
                    row.0 ^= pivot.0;
                    row.1 ^= pivot.1;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|&(_, rhs)| rhs == 1) {
            return Ok(None);
        }
        let z = pivots
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &col)| acc | (rows[i].1 << col));
        debug_assert_eq!(self.mul(z, z) ^ z, w);
        Ok(Some(z))
    }
}

/// The unique subfield of size `p^k`, held as an explicit element set.
#[derive(Clone, Debug, PartialEq)]
pub struct SubfieldHandle {
    degree: u32,
    elements: FqSet,
}

impl SubfieldHandle {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.elements.len() as u32
    }

    pub fn elements(&self) -> &FqSet {
        &self.elements
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        self.elements.field()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.elements.contains(x)
    }

    pub fn units(&self) -> impl Iterator<Item = Elem> + '_ {
        self.elements.iter().filter(|&x| x != 0)
    }

    /// Trace from this subfield to the prime field, as an integer in `0..p`.
    pub fn trace_to_prime(&self, x: Elem) -> Result<u32> {
        self.field().relative_trace(x, self.degree, 1)
    }

    /// The canonical additive character of this subfield.
    pub fn character(&self, x: Elem) -> Result<Complex64> {
        let p = self.field().p() as f64;
        let t = self.trace_to_prime(x)? as f64;
        Ok(Complex64::from_polar(1.0, 2.0 * PI * t / p))
    }

    /// `x` is a square inside this subfield (odd characteristic).
    pub fn is_square(&self, x: Elem) -> Result<bool> {
        let field = self.field();
        if field.p() == 2 {
            return Err(LabError::WrongCharacteristic { expected: "odd", actual: 2 });
        }
        if !self.contains(x) {
            return Err(LabError::InvalidArgument(format!("{x} is not in the subfield")));
        }
        Ok(x == 0 || field.pow(x, ((self.size() - 1) / 2) as u64) == 1)
    }
}
