//! Sparse linear algebra over `F_p`: incremental row echelon form and
//! nullspace bases.

use std::collections::HashMap;

use crate::fp;

/// Sparse vector: `(column, value)` pairs sorted by column, values nonzero.
pub type SparseVec = Vec<(usize, u32)>;

/// `a + c·b`.
pub fn axpy(p: u32, a: &SparseVec, c: u32, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = fp::mul(p, c, b[j].1);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = fp::add(p, a[i].1, fp::mul(p, c, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Collects `(column, value)` pairs into a [`SparseVec`], summing repeats.
pub fn sparse_from_pairs(p: u32, mut pairs: Vec<(usize, u32)>) -> SparseVec {
    pairs.sort_unstable_by_key(|x| x.0);
    let mut out: SparseVec = Vec::with_capacity(pairs.len());
    for (c, v) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 = fp::add(p, last.1, v),
            _ => out.push((c, v % p)),
        }
    }
    out.retain(|x| x.1 != 0);
    out
}

/// Rows in echelon form, each with leading coefficient 1 at a distinct
/// pivot column.
#[derive(Debug, Clone)]
pub struct Echelon {
    p: u32,
    rows: Vec<SparseVec>,
    pivot: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new(p: u32) -> Self {
        Echelon {
            p,
            rows: Vec::new(),
            pivot: HashMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = &usize> {
        self.pivot.keys()
    }

    /// Reduces `v` against the current rows until its leading column is not
    /// a pivot.
    pub fn reduce_leading(&self, mut v: SparseVec) -> SparseVec {
        while let Some(&(c, x)) = v.first() {
            match self.pivot.get(&c) {
                Some(&r) => v = axpy(self.p, &v, fp::neg(self.p, x), &self.rows[r]),
                None => break,
            }
        }
        v
    }

    /// Full reduction: no entry of the result sits in a pivot column.
    pub fn reduce_full(&self, v: SparseVec) -> SparseVec {
        let mut v = v;
        let mut idx = 0;
        while idx < v.len() {
            let (c, x) = v[idx];
            if let Some(&r) = self.pivot.get(&c) {
                v = axpy(self.p, &v, fp::neg(self.p, x), &self.rows[r]);
                // Entries before idx are untouched (row support starts at c).
            } else {
                idx += 1;
            }
        }
        v
    }

    /// Adds a row; returns whether it was independent of the previous ones.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let v = self.reduce_leading(v);
        let Some(&(c, x)) = v.first() else {
            return false;
        };
        let inv = fp::inv(self.p, x);
        let v: SparseVec = v
            .into_iter()
            .map(|(k, y)| (k, fp::mul(self.p, y, inv)))
            .collect();
        self.pivot.insert(c, self.rows.len());
        self.rows.push(v);
        true
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce_leading(v).is_empty()
    }

    /// Basis of `{x : row·x = 0 for every row}` in `F_p^ncols`, one vector per
    /// free column (set to 1, other free columns 0).
    pub fn kernel(&self, ncols: usize) -> Vec<SparseVec> {
        let p = self.p;
        let mut pivots: Vec<(usize, usize)> = self.pivot.iter().map(|(&c, &r)| (c, r)).collect();
        pivots.sort_unstable_by_key(|&(c, _)| std::cmp::Reverse(c));
        let mut out = Vec::new();
        let mut x = vec![0u32; ncols];
        let mut touched: Vec<usize> = Vec::new();
        for f in 0..ncols {
            if self.pivot.contains_key(&f) {
                continue;
            }
            x[f] = 1;
            touched.push(f);
            for &(c, r) in &pivots {
                if c > f {
                    continue;
                }
                let mut s = 0u32;
                for &(k, y) in &self.rows[r][1..] {
                    if x[k] != 0 {
                        s = fp::add(p, s, fp::mul(p, y, x[k]));
                    }
                }
                if s != 0 {
                    x[c] = fp::neg(p, s);
                    touched.push(c);
                }
            }
            touched.sort_unstable();
            touched.dedup();
            out.push(
                touched
                    .iter()
                    .map(|&k| (k, x[k]))
                    .filter(|e| e.1 != 0)
                    .collect(),
            );
            for &k in &touched {
                x[k] = 0;
            }
            touched.clear();
        }
        out
    }
}

/// Nullspace basis of the system with the given sparse rows.
pub fn nullspace(
    p: u32,
    rows: impl IntoIterator<Item = SparseVec>,
    ncols: usize,
) -> Vec<SparseVec> {
    let mut ech = Echelon::new(p);
    for r in rows {
        ech.insert(r);
    }
    ech.kernel(ncols)
}

/// Combinations `c` of `basis` with `Σ c_i basis_i` vanishing on every
/// column in `cols`; returns the combined vectors.
pub fn restrict_vanishing(
    p: u32,
    basis: &[SparseVec],
    cols: &dyn Fn(usize) -> bool,
) -> Vec<SparseVec> {
    // Rows indexed by constrained column, unknowns are the combination
    // coefficients.
    let mut by_col: HashMap<usize, Vec<(usize, u32)>> = HashMap::new();
    for (i, v) in basis.iter().enumerate() {
        for &(c, x) in v {
            if cols(c) {
                by_col.entry(c).or_default().push((i, x));
            }
        }
    }
    let mut keys: Vec<usize> = by_col.keys().copied().collect();
    keys.sort_unstable();
    let rows = keys
        .into_iter()
        .map(|k| sparse_from_pairs(p, by_col.remove(&k).unwrap()));
    let combos = nullspace(p, rows, basis.len());
    combos
        .into_iter()
        .map(|c| {
            let mut acc = SparseVec::new();
            for (i, x) in c {
                acc = axpy(p, &acc, x, &basis[i]);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(v: &SparseVec, n: usize) -> Vec<u32> {
        let mut d = vec![0; n];
        for &(c, x) in v {
            d[c] = x;
        }
        d
    }

    #[test]
    fn kernel_of_small_system() {
        // x0 + x1 = 0, x1 + x2 = 0 over F_3
        let rows = vec![vec![(0, 1), (1, 1)], vec![(1, 1), (2, 1)]];
        let k = nullspace(3, rows.clone(), 3);
        assert_eq!(k.len(), 1);
        let v = dense(&k[0], 3);
        for r in &rows {
            let s: u32 = r.iter().map(|&(c, x)| x * v[c]).sum::<u32>() % 3;
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn dependent_rows() {
        let mut e = Echelon::new(2);
        assert!(e.insert(vec![(0, 1), (2, 1)]));
        assert!(e.insert(vec![(1, 1), (2, 1)]));
        assert!(!e.insert(vec![(0, 1), (1, 1)]));
        assert_eq!(e.rank(), 2);
        assert!(e.contains(vec![(0, 1), (1, 1)]));
        assert_eq!(e.reduce_full(vec![(0, 1)]), vec![(2, 1)]);
    }

    #[test]
    fn restriction() {
        let basis = vec![vec![(0, 1), (3, 1)], vec![(1, 1), (3, 1)], vec![(2, 1)]];
        let r = restrict_vanishing(2, &basis, &|c| c == 3);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|v| v.iter().all(|&(c, _)| c != 3)));
    }
}
