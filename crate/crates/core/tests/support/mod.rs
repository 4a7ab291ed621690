//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 24)
}

/// `I_ψ(ν) = (1/π) ∫₀^π exp(ν cos z) cos(ψz) dz` by quadrature.
pub fn bessel_by_quadrature(order: u32, nu: f64) -> f64 {
    let f = |z: f64| (nu * z.cos()).exp() * (order as f64 * z).cos();
    adaptive_simpson(&f, 0.0, PI, 1e-14 * nu.exp()) / PI
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * cofactor_det(&minor)
        })
        .sum()
}

/// Basis `[1, sin(πkx/12), cos(πkx/12), …]` evaluated directly.
pub fn basis(x: f64, k: usize) -> Vec<f64> {
    let mut f = vec![1.0];
    for h in 1..=k {
        let a = PI * h as f64 * x / 12.0;
        f.push(a.sin());
        f.push(a.cos());
    }
    f
}

/// `Σ wᵢ f(xᵢ) f(xᵢ)ᵀ` as nested vectors.
pub fn weighted_outer_sum(times: &[f64], w: &[f64], k: usize) -> Vec<Vec<f64>> {
    let p = 2 * k + 1;
    let mut m = vec![vec![0.0; p]; p];
    for (t, wi) in times.iter().zip(w) {
        let f = basis(*t, k);
        for a in 0..p {
            for b in 0..p {
                m[a][b] += wi * f[a] * f[b];
            }
        }
    }
    m
}

/// Von Mises kernel with the normaliser from the quadrature Bessel oracle.
pub fn vm_kernel_oracle(z: f64, kappa: f64) -> f64 {
    (kappa * z.cos()).exp() / (2.0 * PI * bessel_by_quadrature(0, kappa))
}

/// Tiny deterministic generator for test inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
