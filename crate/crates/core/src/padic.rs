//! Truncated p-adic integers `Z_p / p^M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp;

/// An element of `Z_p` known modulo `p^M`, stored as its least
/// non-negative residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicUnitApprox {
    pub p: u32,
    pub residue: u64,
    #[serde(rename = "M")]
    pub m: u32,
}

/// Largest supported `p^M`.
const MODULUS_LIMIT: u128 = 1 << 62;

impl PAdicUnitApprox {
    /// Reduces `value` modulo `p^M`. Accepts negative representatives.
    pub fn new(p: u32, value: i128, m: u32) -> Result<Self> {
        fp::check_prime(p as u64)?;
        if m == 0 {
            return Err(Error::Config("digit precision M must be >= 1".into()));
        }
        let modulus = (p as u128)
            .checked_pow(m)
            .filter(|&q| q <= MODULUS_LIMIT)
            .ok_or_else(|| Error::Config(format!("p^M = {p}^{m} exceeds the supported range")))?;
        let residue = value.rem_euclid(modulus as i128) as u64;
        Ok(Self { p, residue, m })
    }

    pub fn modulus(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    pub fn is_unit(&self) -> bool {
        !self.residue.is_multiple_of(self.p as u64)
    }

    /// Residue mod `p`.
    pub fn first_digit(&self) -> u32 {
        (self.residue % self.p as u64) as u32
    }

    /// Base-`p` digits, least significant first, `M` of them.
    pub fn digits(&self) -> Vec<u32> {
        let mut r = self.residue;
        (0..self.m)
            .map(|_| {
                let d = (r % self.p as u64) as u32;
                r /= self.p as u64;
                d
            })
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<u32> {
        if self.p != other.p {
            return Err(Error::RingMismatch(format!(
                "p = {} vs {}",
                self.p, other.p
            )));
        }
        Ok(self.m.min(other.m))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let m = self.check_same(other)?;
        Self::new(self.p, self.residue as i128 + other.residue as i128, m)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, -(self.residue as i128), self.m).expect("valid precision")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let m = self.check_same(other)?;
        let q = (self.p as u128).pow(m);
        let r = (self.residue as u128 % q) * (other.residue as u128 % q) % q;
        Self::new(self.p, r as i128, m)
    }

    /// Multiplicative inverse; errors on non-units.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotUnit(format!(
                "{} is divisible by {}",
                self.residue, self.p
            )));
        }
        let q = self.modulus() as i128;
        let (mut r0, mut r1) = (q, self.residue as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let t = r0 / r1;
            (r0, r1) = (r1, r0 - t * r1);
            (s0, s1) = (s1, s0 - t * s1);
        }
        Self::new(self.p, s0, self.m)
    }

    /// Least `M` such that `p^M > n`, i.e. `⌊log_p n⌋ + 1` for `n >= 1`.
    pub fn digits_needed(p: u32, n: u64) -> u32 {
        let mut m = 1;
        let mut q = p as u64;
        while q <= n {
            q = q.saturating_mul(p as u64);
            m += 1;
        }
        m
    }
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(p: u32, mut n: u64, mut k: u64) -> u32 {
    let mut r = 1u32;
    while k > 0 {
        let (ni, ki) = ((n % p as u64) as u32, (k % p as u64) as u32);
        if ki > ni {
            return 0;
        }
        r = fp::mul(p, r, small_binomial(p, ni, ki));
        n /= p as u64;
        k /= p as u64;
    }
    r
}

fn small_binomial(p: u32, n: u32, k: u32) -> u32 {
    let mut num = 1u32;
    let mut den = 1u32;
    for i in 0..k {
        num = fp::mul(p, num, n - i);
        den = fp::mul(p, den, i + 1);
    }
    fp::mul(p, num, fp::inv(p, den))
}
