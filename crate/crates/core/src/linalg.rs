//! Fixed-size 3×3 Hermitian matrix algebra.
//!
//! A [`HermitianMatrix3`] stores only its upper triangle: three real diagonal
//! entries and the complex entries (1,2), (1,3) and (2,3). The lower triangle
//! is the conjugate of the upper one, so the Hermitian property cannot be
//! violated by construction.
//!
//! Every reduction in this module runs in a fixed order (diagonal first, then
//! off-diagonal, rows before columns) so results are reproducible bit for bit.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One element of a scattering vector or an off-diagonal covariance entry.
pub type ComplexScalar = Complex64;

/// Cholesky pivots (diagonal entries of the factor) must exceed this value.
pub const HPD_TOLERANCE: f64 = 1e-12;

/// `inverse` refuses matrices whose `|det|` is at or below this value.
pub const SINGULAR_TOLERANCE: f64 = 1e-300;

/// A 3×3 complex Hermitian matrix in upper-triangle storage.
///
/// Index convention is zero-based: `off[0]` is entry (0,1), `off[1]` is
/// (0,2) and `off[2]` is (1,2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "HermitianRepr", into = "HermitianRepr")]
pub struct HermitianMatrix3 {
    diag: [f64; 3],
    off: [Complex64; 3],
}

/// JSON form: `{"diag": [a, b, c], "offdiag": [[re, im], [re, im], [re, im]]}`.
#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    diag: [f64; 3],
    #[serde(default)]
    offdiag: [[f64; 2]; 3],
}

impl From<HermitianRepr> for HermitianMatrix3 {
    fn from(r: HermitianRepr) -> Self {
        let off = r.offdiag.map(|[re, im]| Complex64::new(re, im));
        HermitianMatrix3::new(r.diag, off)
    }
}

impl From<HermitianMatrix3> for HermitianRepr {
    fn from(m: HermitianMatrix3) -> Self {
        HermitianRepr {
            diag: m.diag,
            offdiag: m.off.map(|z| [z.re, z.im]),
        }
    }
}

impl Default for HermitianMatrix3 {
    fn default() -> Self {
        Self::zero()
    }
}

impl HermitianMatrix3 {
    pub const fn new(diag: [f64; 3], off: [Complex64; 3]) -> Self {
        Self { diag, off }
    }

    pub const fn zero() -> Self {
        Self::from_diag([0.0; 3])
    }

    pub const fn identity() -> Self {
        Self::from_diag([1.0; 3])
    }

    pub const fn from_diag(diag: [f64; 3]) -> Self {
        let z = Complex64 { re: 0.0, im: 0.0 };
        Self { diag, off: [z; 3] }
    }

    /// Builds a matrix from the nine reals `[a00, a11, a22, Re a01, Im a01,
    /// Re a02, Im a02, Re a12, Im a12]`. This is also the on-disk pixel order.
    pub const fn from_reals(v: [f64; 9]) -> Self {
        Self {
            diag: [v[0], v[1], v[2]],
            off: [
                Complex64 { re: v[3], im: v[4] },
                Complex64 { re: v[5], im: v[6] },
                Complex64 { re: v[7], im: v[8] },
            ],
        }
    }

    /// Inverse of [`from_reals`](Self::from_reals).
    pub const fn to_reals(&self) -> [f64; 9] {
        [
            self.diag[0],
            self.diag[1],
            self.diag[2],
            self.off[0].re,
            self.off[0].im,
            self.off[1].re,
            self.off[1].im,
            self.off[2].re,
            self.off[2].im,
        ]
    }

    /// Takes the upper triangle of a dense matrix; the imaginary parts of
    /// the diagonal are dropped.
    pub fn from_full(a: &[[Complex64; 3]; 3]) -> Self {
        Self {
            diag: [a[0][0].re, a[1][1].re, a[2][2].re],
            off: [a[0][1], a[0][2], a[1][2]],
        }
    }

    /// Dense form, for interop and test oracles.
    pub fn to_full(&self) -> [[Complex64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j)))
    }

    pub fn diag(&self) -> [f64; 3] {
        self.diag
    }

    /// Upper off-diagonal entries (0,1), (0,2), (1,2).
    pub fn offdiag(&self) -> [Complex64; 3] {
        self.off
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < 3 && j < 3, "index ({i}, {j}) out of range");
        match (i, j) {
            (i, j) if i == j => Complex64::new(self.diag[i], 0.0),
            (0, 1) => self.off[0],
            (0, 2) => self.off[1],
            (1, 2) => self.off[2],
            (i, j) => self.get(j, i).conj(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_reals().iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.diag[0] + self.diag[1] + self.diag[2]
    }

    /// Determinant. For a Hermitian matrix it is real; the analytic
    /// imaginary part is identically zero and is not computed.
    pub fn det(&self) -> f64 {
        let [a0, a1, a2] = self.diag;
        let [b, c, e] = self.off;
        // a0 a1 a2 + 2 Re(b e c̄) - a0 |e|² - a1 |c|² - a2 |b|²
        let cross = (b * e * c.conj()).re;
        a0 * a1 * a2 + 2.0 * cross - a0 * e.norm_sqr() - a1 * c.norm_sqr() - a2 * b.norm_sqr()
    }

    /// Inverse via the adjugate. The result is Hermitian by construction.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if !(det.abs() > SINGULAR_TOLERANCE) {
            return Err(Error::SingularMatrix { det });
        }
        let [a0, a1, a2] = self.diag;
        let [b, c, e] = self.off;
        let inv = 1.0 / det;
        let diag = [
            (a1 * a2 - e.norm_sqr()) * inv,
            (a0 * a2 - c.norm_sqr()) * inv,
            (a0 * a1 - b.norm_sqr()) * inv,
        ];
        let off = [
            (c * e.conj() - b * a2) * inv,
            (b * e - c * a1) * inv,
            (c * b.conj() - e * a0) * inv,
        ];
        Ok(Self { diag, off })
    }

    /// `tr(self · other)`.
    ///
    /// The accumulation is written so that `a.trace_product(&b)` and
    /// `b.trace_product(&a)` perform the same floating-point operations.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for k in 0..3 {
            acc += self.diag[k] * other.diag[k];
        }
        for k in 0..3 {
            let (x, y) = (self.off[k], other.off[k]);
            // 2 Re(x ȳ)
            acc += 2.0 * (x.re * y.re + x.im * y.im);
        }
        acc
    }

    /// Lower-triangular `C` with `C C* = self`.
    pub fn cholesky(&self) -> Result<LowerTriangular3> {
        let [a0, a1, a2] = self.diag;
        let [b, c, e] = self.off;

        let l00 = pivot(0, a0)?;
        let l10 = b.conj() / l00;
        let l20 = c.conj() / l00;
        let l11 = pivot(1, a1 - l10.norm_sqr())?;
        let l21 = (e.conj() - l20 * l10.conj()) / l11;
        let l22 = pivot(2, a2 - l20.norm_sqr() - l21.norm_sqr())?;

        Ok(LowerTriangular3 {
            diag: [l00, l11, l22],
            sub: [l10, l20, l21],
        })
    }

    /// `log det` computed from the Cholesky pivots.
    pub fn log_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.log_det())
    }

    pub fn is_hpd(&self) -> bool {
        self.cholesky().is_ok()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            diag: self.diag.map(|d| d * factor),
            off: self.off.map(|z| z * factor),
        }
    }

    /// Squared Frobenius norm of the full matrix.
    pub fn frobenius_sqr(&self) -> f64 {
        let mut acc = 0.0;
        for d in self.diag {
            acc += d * d;
        }
        for z in self.off {
            acc += 2.0 * z.norm_sqr();
        }
        acc
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (*self - *other).frobenius_sqr().sqrt()
    }
}

fn pivot(index: usize, value: f64) -> Result<f64> {
    // NaN fails the comparison as well.
    if value > 0.0 {
        let root = value.sqrt();
        if root > HPD_TOLERANCE {
            return Ok(root);
        }
    }
    Err(Error::NotPositiveDefinite {
        pivot: index,
        value,
    })
}

impl Add for HermitianMatrix3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for k in 0..3 {
            out.diag[k] += rhs.diag[k];
            out.off[k] += rhs.off[k];
        }
        out
    }
}

impl Sub for HermitianMatrix3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for k in 0..3 {
            out.diag[k] -= rhs.diag[k];
            out.off[k] -= rhs.off[k];
        }
        out
    }
}

impl Mul<f64> for HermitianMatrix3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// Lower-triangular Cholesky factor with a real positive diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerTriangular3 {
    diag: [f64; 3],
    /// Entries (1,0), (2,0), (2,1).
    sub: [Complex64; 3],
}

impl LowerTriangular3 {
    pub fn new(diag: [f64; 3], sub: [Complex64; 3]) -> Self {
        Self { diag, sub }
    }

    pub fn diag(&self) -> [f64; 3] {
        self.diag
    }

    pub fn sub(&self) -> [Complex64; 3] {
        self.sub
    }

    /// Entry `(i, j)`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (i, j) if i == j => Complex64::new(self.diag[i], 0.0),
            (1, 0) => self.sub[0],
            (2, 0) => self.sub[1],
            (2, 1) => self.sub[2],
            _ => Complex64::default(),
        }
    }

    /// `log det (C C*) = 2 Σ log C_kk`.
    pub fn log_det(&self) -> f64 {
        2.0 * (self.diag[0].ln() + self.diag[1].ln() + self.diag[2].ln())
    }

    pub fn mul_vec(&self, v: &[Complex64; 3]) -> [Complex64; 3] {
        let [l10, l20, l21] = self.sub;
        [
            v[0] * self.diag[0],
            l10 * v[0] + v[1] * self.diag[1],
            l20 * v[0] + l21 * v[1] + v[2] * self.diag[2],
        ]
    }

    /// `C C*`.
    pub fn gram(&self) -> HermitianMatrix3 {
        let mut full = [[Complex64::default(); 3]; 3];
        for (i, row) in full.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..3 {
                    *cell += self.get(i, k) * self.get(j, k).conj();
                }
            }
        }
        HermitianMatrix3::from_full(&full)
    }
}

/// `y y*` for a single scattering vector.
pub fn outer_product(y: &[Complex64; 3]) -> HermitianMatrix3 {
    HermitianMatrix3 {
        diag: [y[0].norm_sqr(), y[1].norm_sqr(), y[2].norm_sqr()],
        off: [y[0] * y[1].conj(), y[0] * y[2].conj(), y[1] * y[2].conj()],
    }
}

/// `weight · Σ matrices`, summed in list order.
pub fn scale_add(matrices: &[HermitianMatrix3], weight: f64) -> Result<HermitianMatrix3> {
    let (first, rest) = matrices.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = first.to_reals();
    for m in rest {
        for (a, v) in acc.iter_mut().zip(m.to_reals()) {
            *a += v;
        }
    }
    Ok(HermitianMatrix3::from_reals(acc.map(|a| a * weight)))
}

/// Arithmetic mean of a non-empty sequence.
///
/// Accumulates deviations from the first element, so a sequence of identical
/// matrices averages to that matrix exactly.
pub fn mean<'a, I>(matrices: I) -> Result<HermitianMatrix3>
where
    I: IntoIterator<Item = &'a HermitianMatrix3>,
{
    let mut iter = matrices.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput)?.to_reals();
    let mut dev = [0.0; 9];
    let mut count = 1usize;
    for m in iter {
        for ((d, v), f) in dev.iter_mut().zip(m.to_reals()).zip(first) {
            *d += v - f;
        }
        count += 1;
    }
    let n = count as f64;
    let mut out = [0.0; 9];
    for k in 0..9 {
        out[k] = first[k] + dev[k] / n;
    }
    Ok(HermitianMatrix3::from_reals(out))
}
