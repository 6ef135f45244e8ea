//! Test-only oracles. Everything here works on dense 3×3 complex matrices
//! and shares no code path with the library's upper-triangle routines.
#![allow(dead_code)]

use num_complex::Complex64;
use polsmooth::HermitianMatrix3;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Dense = [[Complex64; 3]; 3];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dense_identity() -> Dense {
    let mut a = [[Complex64::default(); 3]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    a
}

pub fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let mut out = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dense_adjoint(a: &Dense) -> Dense {
    let mut out = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Determinant by cofactor expansion along the first row.
pub fn dense_det(a: &Dense) -> Complex64 {
    let minor =
        |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    a[0][0] * minor(1, 2, 1, 2) - a[0][1] * minor(1, 2, 0, 2) + a[0][2] * minor(1, 2, 0, 1)
}

pub fn dense_trace(a: &Dense) -> Complex64 {
    a[0][0] + a[1][1] + a[2][2]
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

pub fn max_entry_diff(a: &HermitianMatrix3, b: &HermitianMatrix3) -> f64 {
    max_abs_diff(&a.to_full(), &b.to_full())
}

/// `U A U*` computed densely.
pub fn congruence(u: &Dense, a: &HermitianMatrix3) -> HermitianMatrix3 {
    HermitianMatrix3::from_full(&dense_mul(&dense_mul(u, &a.to_full()), &dense_adjoint(u)))
}

pub fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random Hermitian matrix with entries of order `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, scale: f64) -> HermitianMatrix3 {
    let diag = [0; 3].map(|_| scale * rng.sample::<f64, _>(StandardNormal));
    let off = [0; 3].map(|_| gaussian(rng) * scale);
    HermitianMatrix3::new(diag, off)
}

/// `G G* + floor·I` with `G` complex Gaussian: HPD with smallest
/// eigenvalue at least `floor`.
pub fn random_hpd<R: Rng>(rng: &mut R, floor: f64) -> HermitianMatrix3 {
    let mut g = [[Complex64::default(); 3]; 3];
    for row in g.iter_mut() {
        for x in row.iter_mut() {
            *x = gaussian(rng);
        }
    }
    let mut a = dense_mul(&g, &dense_adjoint(&g));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += floor;
    }
    HermitianMatrix3::from_full(&a)
}

/// Haar-ish random unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R) -> Dense {
    let mut cols: Vec<[Complex64; 3]> = Vec::new();
    while cols.len() < 3 {
        let mut v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        for q in &cols {
            let proj: Complex64 = (0..3).map(|k| q[k].conj() * v[k]).sum();
            for k in 0..3 {
                v[k] -= proj * q[k];
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.map(|z| z / norm));
        }
    }
    let mut u = [[Complex64::default(); 3]; 3];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..3 {
            u[i][j] = col[i];
        }
    }
    u
}

/// Eigenvalues of a Hermitian matrix from the roots of its characteristic
/// polynomial (trigonometric solution of the depressed cubic), ascending.
pub fn eigenvalues(a: &HermitianMatrix3) -> [f64; 3] {
    let full = a.to_full();
    let tr = dense_trace(&full).re;
    let minors = (full[0][0] * full[1][1] - full[0][1] * full[1][0]).re
        + (full[0][0] * full[2][2] - full[0][2] * full[2][0]).re
        + (full[1][1] * full[2][2] - full[1][2] * full[2][1]).re;
    let det = dense_det(&full).re;
    // λ³ - tr λ² + minors λ - det = 0; substitute λ = t + tr/3.
    let shift = tr / 3.0;
    let p = minors - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * minors / 3.0 - det;
    if p.abs() < 1e-300 {
        let t = (-q).cbrt();
        return [t + shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots =
        [0, 1, 2].map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift);
    roots.sort_by(f64::total_cmp);
    roots
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
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
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Γ(k/2) for positive integer k, from Γ(1) = 1, Γ(1/2) = √π and
/// Γ(x + 1) = x Γ(x).
pub fn gamma_half_integer(k: usize) -> f64 {
    let (mut x, mut g) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, std::f64::consts::PI.sqrt())
    };
    while x < k as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// χ² density with `dof` degrees of freedom.
pub fn chi2_density(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = dof as f64 / 2.0;
    x.powf(k - 1.0) * (-x / 2.0).exp() / (2f64.powf(k) * gamma_half_integer(dof))
}

/// CDF of χ² by quadrature.
pub fn chi2_cdf_quadrature(s: f64, dof: usize) -> f64 {
    integrate(&|x| chi2_density(x, dof), 0.0, s, 1e-13)
}

/// Upper tail of χ² by quadrature; avoids the integrable singularity of
/// the one-degree density at zero.
pub fn chi2_survival_quadrature(s: f64, dof: usize) -> f64 {
    let upper = s + 200.0 + 20.0 * dof as f64;
    integrate(&|x| chi2_density(x, dof), s, upper, 1e-14)
}

/// Entrywise mean over dense copies.
pub fn mean_by_loop(ms: &[HermitianMatrix3]) -> HermitianMatrix3 {
    let mut acc = [Complex64::default(); 9];
    for m in ms {
        let full = m.to_full();
        for i in 0..3 {
            for j in 0..3 {
                acc[3 * i + j] += full[i][j];
            }
        }
    }
    let n = ms.len() as f64;
    let mut full = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            full[i][j] = acc[3 * i + j] / n;
        }
    }
    HermitianMatrix3::from_full(&full)
}
