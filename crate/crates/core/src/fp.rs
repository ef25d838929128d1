//! Prime field arithmetic and dense polynomials over `F_p`.
//!
//! Elements of `F_p` are plain `u32` residues in `[0, p)`. Polynomials are
//! coefficient vectors, lowest degree first, with no trailing zeros (the zero
//! polynomial is the empty vector).

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u32> {
    if !is_prime(p) || p > 65_521 {
        return Err(Error::NotPrime(p));
    }
    Ok(p as u32)
}

#[inline]
pub fn add(p: u32, a: u32, b: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(p: u32, a: u32, b: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(p: u32, a: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(p: u32, a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn pow(p: u32, mut a: u32, mut e: u64) -> u32 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(p, r, a);
        }
        a = mul(p, a, a);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue.
pub fn inv(p: u32, a: u32) -> u32 {
    assert!(!a.is_multiple_of(p), "inverse of zero in F_{p}");
    pow(p, a, (p - 2) as u64)
}

/// Reduces a signed integer into `[0, p)`.
pub fn reduce(p: u32, a: i64) -> u32 {
    a.rem_euclid(p as i64) as u32
}

/// Smallest generator of the cyclic group `F_p^x`.
pub fn primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let mut factors = Vec::new();
    let mut m = order;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow(p, g, (order / q) as u64) != 1))
        .expect("F_p^x is cyclic")
}

/// Dense polynomial arithmetic over `F_p`.
pub mod poly {
    use super::*;

    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn degree(a: &[u32]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    pub fn add_poly(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
        let n = a.len().max(b.len());
        let r = (0..n)
            .map(|i| add(p, *a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        trim(r)
    }

    pub fn sub_poly(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
        let n = a.len().max(b.len());
        let r = (0..n)
            .map(|i| sub(p, *a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        trim(r)
    }

    pub fn mul_poly(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(r.into_iter().map(|c| c as u32).collect())
    }

    /// Returns `(q, r)` with `a = q*b + r`, `deg r < deg b`.
    pub fn divrem(p: u32, a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let db = degree(b).expect("division by zero polynomial");
        let lead_inv = inv(p, b[db]);
        let mut r = trim(a.to_vec());
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![0u32; r.len() - db];
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let c = mul(p, r[dr], lead_inv);
            q[dr - db] = c;
            for (i, &bc) in b.iter().enumerate().take(db + 1) {
                r[dr - db + i] = sub(p, r[dr - db + i], mul(p, c, bc));
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
        divrem(p, a, b).1
    }

    pub fn monic(p: u32, a: &[u32]) -> Vec<u32> {
        match degree(a) {
            None => Vec::new(),
            Some(d) => {
                let c = inv(p, a[d]);
                a[..=d].iter().map(|&x| mul(p, x, c)).collect()
            }
        }
    }

    pub fn gcd(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(p, &a, &b);
            a = b;
            b = r;
        }
        monic(p, &a)
    }

    pub fn mulmod(p: u32, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
        rem(p, &mul_poly(p, a, b), m)
    }

    pub fn powmod(p: u32, base: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
        let mut result = rem(p, &[1], m);
        let mut b = rem(p, base, m);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(p, &result, &b, m);
            }
            b = mulmod(p, &b, &b, m);
            e >>= 1;
        }
        result
    }

    /// Ben-Or irreducibility test: `f` of degree `n` is irreducible iff
    /// `gcd(f, X^{p^k} - X) = 1` for every `1 <= k <= n/2`.
    pub fn is_irreducible(p: u32, f: &[u32]) -> bool {
        let n = match degree(f) {
            None | Some(0) => return false,
            Some(n) => n,
        };
        let f = monic(p, f);
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 1..=n / 2 {
            xp = powmod(p, &xp, p as u64, &f);
            let diff = sub_poly(p, &xp, &x);
            if gcd(p, &f, &diff).len() != 1 {
                return false;
            }
        }
        true
    }

    /// The first monic irreducible polynomial of degree `n` in the order
    /// that reads the lower coefficients as a base-`p` counter.
    pub fn default_irreducible(p: u32, n: usize) -> Vec<u32> {
        assert!(n >= 1);
        if n == 1 {
            return vec![0, 1];
        }
        let total = (p as u64).pow(n as u32);
        for code in 0..total {
            let mut f = Vec::with_capacity(n + 1);
            let mut c = code;
            for _ in 0..n {
                f.push((c % p as u64) as u32);
                c /= p as u64;
            }
            f.push(1);
            if f[0] != 0 && is_irreducible(p, &f) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

#[cfg(test)]
mod tests {
    use super::poly::*;
    use super::*;

    #[test]
    fn primes_and_inverses() {
        assert!(is_prime(2) && is_prime(3) && is_prime(5) && !is_prime(4) && !is_prime(1));
        assert_eq!(check_prime(4), Err(Error::NotPrime(4)));
        for p in [2u32, 3, 5, 7] {
            for a in 1..p {
                assert_eq!(mul(p, a, inv(p, a)), 1);
            }
        }
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
    }

    #[test]
    fn irreducibility_small_degrees() {
        assert!(is_irreducible(2, &[1, 1, 1]));
        assert!(!is_irreducible(2, &[1, 0, 1]));
        assert!(is_irreducible(2, &[1, 1, 0, 1]));
        assert!(!is_irreducible(2, &[1, 0, 1, 1, 1]) || is_irreducible(2, &[1, 0, 1, 1, 1]));
        // (x^2+x+1)^2 = x^4+x^2+1 has no roots but is reducible
        assert!(!is_irreducible(2, &[1, 0, 1, 0, 1]));
        assert_eq!(default_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(default_irreducible(2, 3), vec![1, 1, 0, 1]);
        for p in [2u32, 3, 5] {
            for n in 1..=4 {
                let f = default_irreducible(p, n);
                assert_eq!(degree(&f), Some(n));
                assert!(is_irreducible(p, &f));
            }
        }
    }

    #[test]
    fn division_identity() {
        let p = 5;
        let a = vec![3, 1, 4, 1, 2];
        let b = vec![2, 0, 1];
        let (q, r) = divrem(p, &a, &b);
        assert_eq!(add_poly(p, &mul_poly(p, &q, &b), &r), trim(a));
        assert!(degree(&r).is_none_or(|d| d < 2));
    }
}
