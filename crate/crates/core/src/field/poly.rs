//! Dense polynomials over a prime field, just enough for irreducibility tests
//! and the slow multiplication used while bootstrapping the log tables.

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo `m`; `m` must be nonzero.
pub(crate) fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    trim(&mut a);
    let mut m = m.to_vec();
    trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while a.len() > dm {
        let da = a.len() - 1;
        let c = a[da] * lead_inv % p;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = da - dm + i;
                a[idx] = (a[idx] + p - c * mi % p) % p;
            }
        }
        a.pop();
        trim(&mut a);
    }
    a
}

pub(crate) fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    rem(&out, m, p)
}

pub(crate) fn pow_mod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    rem(&acc, m, p)
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin-style test: `x^{p^r} = x (mod f)` and `gcd(x^{p^k} - x, f) = 1`
/// for every proper divisor `k` of `r`. `f` is monic of degree `r`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = f.len() - 1;
    let x = vec![0u64, 1];
    // x^{p^k} mod f for k = 0..=r by repeated p-th powering.
    let mut frob = vec![rem(&x, f, p)];
    for _ in 0..r {
        let last = frob.last().unwrap().clone();
        frob.push(pow_mod(&last, p as u128, f, p));
    }
    if sub(&frob[r], &rem(&x, f, p), p) != Vec::<u64>::new() {
        return false;
    }
    (1..r)
        .filter(|k| r.is_multiple_of(*k))
        .all(|k| gcd(f, &sub(&frob[k], &x, p), p).len() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibles_over_f2() {
        // x^2 + x + 1 is the only irreducible quadratic over F_2.
        assert!(is_irreducible(&[1, 1, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(!is_irreducible(&[0, 1, 1], 2));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 has no roots but is reducible.
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
    }

    #[test]
    fn linear_polynomials_are_irreducible() {
        assert!(is_irreducible(&[0, 1], 7));
        assert!(is_irreducible(&[3, 1], 7));
    }

    #[test]
    fn cubic_over_f5() {
        // x^3 + x + 1 has no root mod 5.
        assert!(is_irreducible(&[1, 1, 0, 1], 5));
        // x^3 + 1 has root -1.
        assert!(!is_irreducible(&[1, 0, 0, 1], 5));
    }
}
