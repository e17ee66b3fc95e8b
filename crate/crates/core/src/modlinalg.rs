//! Exact linear algebra over the prime field F_d.
//!
//! Vectors of `Z_d^{2n}` use the layout `x = (a, b)` with `a` the first `n`
//! coordinates (clock exponents) and `b` the last `n` (shift exponents).
//! Every module relies on this convention.

use crate::error::{Error, Result};

pub fn is_prime(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

pub fn pow_mod(mut base: u64, mut exp: u64, d: u64) -> u64 {
    let mut acc = 1 % d;
    base %= d;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % d;
        }
        base = base * base % d;
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue via Fermat's little theorem.
pub fn inv_mod(a: u64, d: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(d));
    pow_mod(a, d - 2, d)
}

/// Dense matrix over F_d, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    d: u64,
    entries: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, d: u64) -> Result<Self> {
        if !is_prime(d) {
            return Err(Error::InvalidParameter(format!("modulus {d} is not prime")));
        }
        Ok(Self {
            rows,
            cols,
            d,
            entries: vec![0; rows * cols],
        })
    }

    pub fn identity(k: usize, d: u64) -> Result<Self> {
        let mut m = Self::zeros(k, k, d)?;
        for i in 0..k {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    /// Builds a matrix from rows; entries are reduced mod `d`.
    pub fn from_rows(rows: &[Vec<u64>], cols: usize, d: u64) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols, d)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v % d);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.cols + j] = v % self.d;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// `M v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&m, &x)| (acc + m * (x % self.d)) % self.d)
            })
            .collect()
    }

    /// Reduced row echelon form and rank. Zero rows are kept at the bottom so
    /// the shape is unchanged.
    pub fn rref(&self) -> (FpMatrix, usize) {
        let d = self.d;
        let mut m = self.clone();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(p) = (pivot_row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(p, pivot_row);
            let inv = inv_mod(m.get(pivot_row, col), d);
            for j in col..m.cols {
                let v = m.get(pivot_row, j) * inv % d;
                m.set(pivot_row, j, v);
            }
            for r in 0..m.rows {
                if r == pivot_row {
                    continue;
                }
                let f = m.get(r, col);
                if f == 0 {
                    continue;
                }
                for j in col..m.cols {
                    let v = (m.get(r, j) + d - f * m.get(pivot_row, j) % d) % d;
                    m.set(r, j, v);
                }
            }
            pivot_row += 1;
        }
        (m, pivot_row)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of the right null space `{v : M v = 0}`, returned as the rows of
    /// a matrix in reduced row echelon form.
    pub fn kernel_basis(&self) -> FpMatrix {
        let d = self.d;
        let (r, rank) = self.rref();
        let mut pivots = Vec::with_capacity(rank);
        for i in 0..rank {
            let c = (0..r.cols)
                .find(|&j| r.get(i, j) != 0)
                .expect("nonzero pivot row");
            pivots.push(c);
        }
        let free: Vec<usize> = (0..r.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0; r.cols];
            v[f] = 1;
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = (d - r.get(i, f)) % d;
            }
            basis.push(v);
        }
        let k = FpMatrix::from_rows(&basis, r.cols, d).expect("prime modulus");
        k.rref().0
    }

    /// Nonzero rows of the reduced row echelon form.
    pub fn row_space_basis(&self) -> Vec<Vec<u64>> {
        let (r, rank) = self.rref();
        (0..rank).map(|i| r.row(i).to_vec()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// `[x, y] = a.b' - a'.b mod d` for `x = (a, b)`, `y = (a', b')`.
pub fn symplectic_form(x: &[u64], y: &[u64], d: u64) -> Result<u64> {
    let lifted = symplectic_form_int(x, y)?;
    Ok(lifted.rem_euclid(d as i64) as u64)
}

/// The symplectic form evaluated over the integers, without reduction.
///
/// Weyl composition phases are powers of a root of unity of order `2d` when
/// `d` is even, so they need the unreduced value.
pub fn symplectic_form_int(x: &[u64], y: &[u64]) -> Result<i64> {
    if x.len() != y.len() || !x.len().is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "symplectic form needs equal even lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() / 2;
    let (a, b) = x.split_at(n);
    let (a2, b2) = y.split_at(n);
    let ab2: i64 = a.iter().zip(b2).map(|(&p, &q)| (p * q) as i64).sum();
    let a2b: i64 = a2.iter().zip(b).map(|(&p, &q)| (p * q) as i64).sum();
    Ok(ab2 - a2b)
}

/// Row vector `J x = (-b, a)` such that `[x, y] = (J x) . y mod d`.
pub fn symplectic_dual(x: &[u64], d: u64) -> Vec<u64> {
    let n = x.len() / 2;
    let (a, b) = x.split_at(n);
    b.iter()
        .map(|&v| (d - v % d) % d)
        .chain(a.iter().map(|&v| v % d))
        .collect()
}
