//! Small dense and tridiagonal complex solvers.

use num_complex::Complex64;

/// LU factors of a small square matrix with row pivoting.
pub(crate) struct Lu<const N: usize> {
    lu: [[Complex64; N]; N],
    perm: [usize; N],
}

impl<const N: usize> Lu<N> {
    /// Returns `None` when a pivot is exactly zero.
    pub fn factor(mut a: [[Complex64; N]; N]) -> Option<Self> {
        let mut perm = [0usize; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .expect("nonempty range");
            if a[pivot][col].norm() == 0.0 {
                return None;
            }
            a.swap(col, pivot);
            perm.swap(col, pivot);
            for row in col + 1..N {
                let f = a[row][col] / a[col][col];
                a[row][col] = f;
                for j in col + 1..N {
                    let t = a[col][j];
                    a[row][j] -= f * t;
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn solve(&self, b: [Complex64; N]) -> [Complex64; N] {
        let mut x = [Complex64::new(0.0, 0.0); N];
        for i in 0..N {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..N).rev() {
            let mut s = x[i];
            for j in i + 1..N {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        x
    }

    /// One-norm of the inverse, from its columns.
    pub fn inverse_norm1(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..N {
            let mut e = [Complex64::new(0.0, 0.0); N];
            e[c] = Complex64::new(1.0, 0.0);
            let col = self.solve(e);
            worst = worst.max(col.iter().map(|z| z.norm()).sum());
        }
        worst
    }
}

pub(crate) fn norm1<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    (0..N)
        .map(|c| (0..N).map(|r| a[r][c].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves a tridiagonal system with partial pivoting.
///
/// `lower[i]` couples row `i+1` to column `i`; `upper[i]` couples row `i` to
/// column `i+1`. Returns `None` on an exactly zero pivot.
pub(crate) fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Option<Vec<Complex64>> {
    let n = diag.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    du.push(zero);
    let mut dl = lower.to_vec();
    let mut du2 = vec![zero; n];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i].norm() == 0.0 {
                return None;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
            b[i + 1] = b[i + 1] - f * b[i];
        } else {
            // swap rows i and i+1
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            du[i] = t;
            du2[i] = du[i + 1];
            du[i + 1] = -f * du2[i];
            dl[i] = f;
            b.swap(i, i + 1);
            let bi = b[i];
            b[i + 1] -= f * bi;
        }
    }
    if d[n - 1].norm() == 0.0 {
        return None;
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Some(x)
}
