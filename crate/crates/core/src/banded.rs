//! Complex banded linear systems solved by Gaussian elimination with partial
//! pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An n×n matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        // Pivoting fills in up to kl extra super-diagonals.
        let width = 2 * kl + ku + 1;
        Banded { n, kl, ku, width, data: vec![Complex64::new(0.0, 0.0); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry (i, j), which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.slot(i, j)]
    }

    /// Solves A x = b in place, consuming the matrix.
    pub fn solve(mut self, b: &mut [Complex64]) -> Result<()> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let (mut p, mut best) = (k, 0.0);
            for r in k..=last {
                let v = self.get(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 1e-14 * scale) {
                return Err(Error::Solver(format!("matrix is singular at row {k}")));
            }
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, c) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last {
                let l = self.get(r, k) / pivot;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..=right {
                    let v = self.get(k, j);
                    let s = self.slot(r, j);
                    self.data[s] -= l * v;
                }
                let bk = b[k];
                b[r] -= l * bk;
            }
        }
        for i in (0..n).rev() {
            let right = (i + reach).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=right {
                acc -= self.get(i, j) * b[j];
            }
            b[i] = acc / self.get(i, i);
        }
        Ok(())
    }
}
