//! Dense-band and iterative kernels behind [`solve_shifted`](super::solve_shifted)
//! and the Newton solver.

use super::DiscreteError;

/// Solves a tridiagonal system without pivoting (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i-1` (`lower[0]` unused), `upper[i]`
/// couples row `i` to `i+1`. Suitable for diagonally dominant matrices.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, DiscreteError> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(DiscreteError::Breakdown { row: 0 });
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(DiscreteError::Breakdown { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Band matrix with `kl` sub- and `ku` super-diagonals, with room for the
/// fill produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the band"
        );
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting, in place.
    pub fn factor(mut self) -> Result<BandLu, DiscreteError> {
        let n = self.n;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(DiscreteError::Breakdown { row: k });
            }
            pivots[k] = piv;
            let last_col = (k + self.kl + self.ku).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(piv, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu {
            matrix: self,
            pivots,
        })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    matrix: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = &self.matrix;
        let n = m.n;
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + m.kl).min(n - 1) {
                x[i] -= m.data[m.idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last = (k + m.kl + m.ku).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=last {
                acc -= m.data[m.idx(k, j)] * x[j];
            }
            x[k] = acc / m.data[m.idx(k, k)];
        }
        x
    }
}

/// Result of [`pcg`].
#[derive(Debug, Clone)]
pub struct PcgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator. Iteration order is fixed, so results are bitwise
/// reproducible.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    guess: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> PcgResult {
    let n = rhs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rhs_norm = dot(rhs, rhs).sqrt();
    let mut x = guess.map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if rhs_norm == 0.0 {
        return PcgResult {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / rhs_norm;
    let mut it = 0;
    while res > rel_tol && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = dot(&r, &r).sqrt() / rhs_norm;
    }
    PcgResult {
        x,
        iterations: it,
        relative_residual: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thomas_matches_dense_product() {
        let n = 9;
        let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -1.0 }).collect();
        let upper: Vec<f64> = (0..n).map(|i| if i + 1 == n { 0.0 } else { -1.5 }).collect();
        let diag = vec![4.0; n];
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                r += upper[i] * x[i + 1];
            }
            assert!((r - rhs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn band_lu_with_pivoting() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, kl, ku) = (40, 3, 2);
        let mut m = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // Small diagonal forces row interchanges.
                let v: f64 = rng.gen_range(-1.0..1.0);
                m.add(i, j, if i == j { 0.01 * v } else { v });
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = m.matvec(&x_true);
        let lu = m.clone().factor().unwrap();
        let x = lu.solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-9, "{a} vs {e}");
        }
    }

    #[test]
    fn band_lu_singular_reports_breakdown() {
        let m = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(m.factor(), Err(DiscreteError::Breakdown { row: 0 })));
    }

    #[test]
    fn pcg_solves_spd() {
        let n = 50;
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let mut v = 3.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                out[i] = v;
            }
        };
        let rhs = vec![1.0; n];
        let res = pcg(apply, &vec![3.0; n], &rhs, None, 1e-14, 500);
        assert!(res.relative_residual <= 1e-14);
        assert!(res.iterations > 0);
    }
}
