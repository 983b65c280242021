//! Cholesky factorization of symmetric positive definite banded matrices.

/// Lower band of a symmetric matrix: entry `(i, j)` with `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    /// Adds `v` to `(i, j)` and, implicitly, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let a = self.data[self.at(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place factorization `A = L L^T`.
    pub fn factor(mut self) -> Result<CholeskyFactor, NotPositiveDefinite> {
        let w = self.bw + 1;
        let bw = self.bw;
        for i in 0..self.n {
            let i0 = i.saturating_sub(bw);
            let (done, rest) = self.data.split_at_mut(i * w);
            let row_i = &mut rest[..w];
            // row_i[c] holds column i - bw + c.
            for j in i0..i {
                let j0 = j.saturating_sub(bw).max(i0);
                let row_j = &done[j * w..(j + 1) * w];
                let len = j - j0;
                let a = &row_i[j0 + bw - i..j0 + bw - i + len];
                let b = &row_j[j0 + bw - j..j0 + bw - j + len];
                let dot = dot(a, b);
                let c = j + bw - i;
                row_i[c] = (row_i[c] - dot) / row_j[bw];
            }
            let off = &row_i[i0 + bw - i..bw];
            let pivot = row_i[bw] - dot(off, off);
            if !(pivot > 0.0) {
                return Err(NotPositiveDefinite { row: i, pivot });
            }
            row_i[bw] = pivot.sqrt();
        }
        Ok(CholeskyFactor(self))
    }
}

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone)]
pub struct CholeskyFactor(BandedMatrix);

impl CholeskyFactor {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.0;
        let w = m.bw + 1;
        for i in 0..m.n {
            let ri = i * w + m.bw - i;
            let mut sum = b[i];
            for k in i.saturating_sub(m.bw)..i {
                sum -= m.data[ri + k] * b[k];
            }
            b[i] = sum / m.data[ri + i];
        }
        for i in (0..m.n).rev() {
            let ri = i * w + m.bw - i;
            b[i] /= m.data[ri + i];
            let bi = b[i];
            for k in i.saturating_sub(m.bw)..i {
                b[k] -= m.data[ri + k] * bi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, bw: usize, rng: &mut ChaCha8Rng) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                let v = -rng.random::<f64>();
                a.add(i, j, v);
                a.add(i, i, -v);
                a.add(j, j, -v);
            }
            a.add(i, i, 0.1 + rng.random::<f64>());
        }
        a
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, bw) in [(1, 0), (5, 1), (30, 4), (49, 7)] {
            let a = random_spd(n, bw, &mut rng);
            let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let expected = dense
                .clone()
                .cholesky()
                .unwrap()
                .solve(&DVector::from_column_slice(&b));
            let mut x = b.clone();
            a.factor().unwrap().solve_in_place(&mut x);
            for i in 0..n {
                assert!((x[i] - expected[i]).abs() < 1e-10 * expected.amax().max(1.0));
            }
        }
    }

    #[test]
    fn residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_spd(200, 10, &mut rng);
        let b: Vec<f64> = (0..200).map(|k| (k as f64).sin()).collect();
        let mut x = b.clone();
        a.clone().factor().unwrap().solve_in_place(&mut x);
        let r = a.mul_vec(&x);
        for i in 0..200 {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = BandedMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert_eq!(a.factor().unwrap_err().row, 1);
    }
}
