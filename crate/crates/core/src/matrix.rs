//! Small dense matrices over `E_Δ`.

use crate::endo::RingEndo;
use crate::error::{Error, Result};
use crate::series::{LaurentElement, Ring, SeriesUnitStatus};

/// Row-major square or rectangular matrix.
pub type Matrix = Vec<Vec<LaurentElement>>;

pub fn identity(ring: &Ring, r: usize) -> Matrix {
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect()
}

pub fn diagonal(entries: Vec<LaurentElement>) -> Matrix {
    let ring = entries[0].ring().clone();
    let r = entries.len();
    let mut m = identity(&ring, r);
    for (i, e) in entries.into_iter().enumerate() {
        m[i][i] = e;
    }
    m
}

pub fn scalar_matrix(a: LaurentElement) -> Matrix {
    vec![vec![a]]
}

pub fn mul(ring: &Ring, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let k = b.len();
    if n == 0 || a[0].len() != k {
        return Err(Error::Config("matrix shapes do not match".into()));
    }
    let m = b[0].len();
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut r = Vec::with_capacity(m);
        for j in 0..m {
            let mut acc = ring.zero();
            for (l, x) in row.iter().enumerate() {
                if x.is_exact() && x.terms().is_empty() {
                    continue;
                }
                acc = ring.add(&acc, &ring.mul(x, &b[l][j])?)?;
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

pub fn mul_vec(ring: &Ring, a: &Matrix, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
    let col: Matrix = v.iter().map(|x| vec![x.clone()]).collect();
    Ok(mul(ring, a, &col)?
        .into_iter()
        .map(|mut r| r.remove(0))
        .collect())
}

/// Entrywise `σ(A)`.
pub fn apply(endo: &RingEndo, a: &Matrix) -> Result<Matrix> {
    a.iter()
        .map(|row| row.iter().map(|x| endo.apply(x)).collect())
        .collect()
}

pub fn apply_vec(endo: &RingEndo, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
    v.iter().map(|x| endo.apply(x)).collect()
}

pub fn scale(ring: &Ring, a: &Matrix, s: &LaurentElement) -> Result<Matrix> {
    a.iter()
        .map(|row| row.iter().map(|x| ring.mul(x, s)).collect())
        .collect()
}

/// First entry where `a` and `b` differ on the common window, with the
/// lowest differing exponent.
pub fn discrepancy(ring: &Ring, a: &Matrix, b: &Matrix) -> Option<String> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            let d = match ring.sub(x, y) {
                Ok(d) => d,
                Err(e) => return Some(format!("entry ({i},{j}): {e}")),
            };
            if let Some((e, _)) = d.terms().iter().next() {
                let names: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(b, &x)| format!("{}^{x}", ring.var_name(b)))
                    .collect();
                let mono = if names.is_empty() {
                    "1".to_string()
                } else {
                    names.join("*")
                };
                return Some(format!(
                    "entry ({i},{j}) differs at {mono} ({} differing terms)",
                    d.num_terms()
                ));
            }
        }
    }
    None
}

pub fn equal(ring: &Ring, a: &Matrix, b: &Matrix) -> bool {
    a.len() == b.len() && discrepancy(ring, a, b).is_none()
}

fn minor(a: &Matrix, row: usize, col: usize) -> Matrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion (ranks here are tiny).
pub fn det(ring: &Ring, a: &Matrix) -> Result<LaurentElement> {
    match a.len() {
        0 => Ok(ring.one()),
        1 => Ok(a[0][0].clone()),
        2 => ring.sub(
            &ring.mul(&a[0][0], &a[1][1])?,
            &ring.mul(&a[0][1], &a[1][0])?,
        ),
        n => {
            let mut acc = ring.zero();
            for j in 0..n {
                if a[0][j].is_exact() && a[0][j].terms().is_empty() {
                    continue;
                }
                let t = ring.mul(&a[0][j], &det(ring, &minor(a, 0, j))?)?;
                acc = if j % 2 == 0 {
                    ring.add(&acc, &t)?
                } else {
                    ring.sub(&acc, &t)?
                };
            }
            Ok(acc)
        }
    }
}

/// Inverse via adjugate and an inverse of the determinant.
pub fn inverse(ring: &Ring, a: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let d = det(ring, a)?;
    match ring.is_unit(&d) {
        SeriesUnitStatus::Unit => {}
        SeriesUnitStatus::Nonunit => {
            return Err(Error::NotUnit("determinant is not a unit".into()))
        }
        SeriesUnitStatus::Undecided => {
            return Err(Error::Undecided("determinant unit test".into()))
        }
    }
    let dinv = ring.invert(&d)?;
    if n == 1 {
        return Ok(vec![vec![dinv]]);
    }
    let mut out = identity(ring, n);
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let c = det(ring, &minor(a, j, i))?;
            let c = if (i + j) % 2 == 0 { c } else { ring.neg(&c) };
            *x = ring.mul(&c, &dinv)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientAlgebra;
    use crate::series::SeriesRing;

    #[test]
    fn inverse_of_triangular() {
        let k = CoefficientAlgebra::standard(3, &[(1, 0), (1, 0)]).unwrap();
        let r = SeriesRing::uniform(k, 6).unwrap();
        let x = r.var(0);
        let a = vec![
            vec![r.add(&r.one(), &x).unwrap(), r.var(1)],
            vec![r.zero(), r.x_delta_pow(1)],
        ];
        let inv = inverse(&r, &a).unwrap();
        let prod = mul(&r, &a, &inv).unwrap();
        assert!(equal(&r, &prod, &identity(&r, 2)));
        let sing = vec![vec![r.one(), r.one()], vec![r.one(), r.one()]];
        assert!(inverse(&r, &sing).is_err());
    }
}
