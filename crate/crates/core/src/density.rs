//! 2×2 complex matrices, qubit density matrices and Uhlmann–Jozsa fidelity.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::StateError;
use crate::numeric::NumericPolicy;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Relative size below which an eigenvalue is indistinguishable from zero.
const RANK_EPS: f64 = 1e-14;

/// Dense 2×2 complex matrix in the `|H⟩, |V⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    /// Hermitian matrix from real diagonal and upper off-diagonal entries.
    pub fn hermitian(d0: f64, off: Complex64, d1: f64) -> Self {
        Mat2([
            [Complex64::new(d0, 0.0), off],
            [off.conj(), Complex64::new(d1, 0.0)],
        ])
    }

    /// `v v†`.
    pub fn outer(v0: Complex64, v1: Complex64) -> Self {
        Mat2([
            [v0 * v0.conj(), v0 * v1.conj()],
            [v1 * v0.conj(), v1 * v1.conj()],
        ])
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Mat2::hermitian(d0, ZERO, d1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn dagger(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Closed-form eigendecomposition of the Hermitian part. Eigenvalues are
    /// ascending; eigenvectors are unit columns.
    pub fn hermitian_eigen(&self) -> ([f64; 2], [[Complex64; 2]; 2]) {
        let p = self.0[0][0].re;
        let q = self.0[1][1].re;
        let c = (self.0[0][1] + self.0[1][0].conj()) * 0.5;
        let mean = 0.5 * (p + q);
        let half = 0.5 * (p - q);
        let r = half.hypot(c.norm());
        let vals = [mean - r, mean + r];
        let scale = p.abs().max(q.abs()).max(c.norm());
        if r <= 1e-300 || c.norm() <= 1e-15 * scale {
            // already diagonal (or degenerate): sort the basis vectors
            return if p <= q {
                ([p, q], [[ONE, ZERO], [ZERO, ONE]])
            } else {
                ([q, p], [[ZERO, ONE], [ONE, ZERO]])
            };
        }
        let mut vecs = [[ZERO; 2]; 2];
        for (k, &lam) in vals.iter().enumerate() {
            // two candidate null vectors of (A − λ); keep the better conditioned
            let v1 = [c, Complex64::new(lam - p, 0.0)];
            let v2 = [Complex64::new(lam - q, 0.0), c.conj()];
            let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
            let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
            let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
            let n = n.sqrt();
            vecs[k] = [v[0] / n, v[1] / n];
        }
        (vals, vecs)
    }

    /// Rebuilds `Σ f(λₖ) vₖ vₖ†` from the Hermitian eigendecomposition.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        let (vals, vecs) = self.hermitian_eigen();
        let mut out = Mat2::ZERO;
        for k in 0..2 {
            let w = f(vals[k]);
            out = out + Mat2::outer(vecs[k][0], vecs[k][1]).scale(w);
        }
        out
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    /// Eigenvalues below the numerical rank threshold are clipped to zero.
    pub fn psd_sqrt(&self) -> Mat2 {
        let (vals, _) = self.hermitian_eigen();
        let cut = RANK_EPS * vals[1].abs();
        self.hermitian_map(|l| if l <= cut { 0.0 } else { l.sqrt() })
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut m = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(m)
    }
}

/// Hermitian, positive semidefinite, unit-trace 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Mat2);

impl DensityMatrix2 {
    pub fn maximally_mixed() -> Self {
        DensityMatrix2(Mat2::diag(0.5, 0.5))
    }

    /// Validates the invariants of a density matrix.
    // The negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(m: Mat2) -> Result<Self, StateError> {
        let policy = NumericPolicy::DEFAULT;
        let scale = 1.0f64.max(m.max_abs_diff(&Mat2::ZERO));
        let herm = m.hermiticity_defect();
        if !(herm <= 1e-12 * scale) {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = m.trace().re;
        if !((tr - 1.0).abs() <= policy.trace) {
            return Err(StateError::BadTrace(tr));
        }
        let (vals, _) = m.hermitian_eigen();
        if vals[0] < -policy.psd {
            return Err(StateError::NotPositive(vals[0]));
        }
        Ok(DensityMatrix2(symmetrize(m)))
    }

    /// Normalizes a Hermitian PSD matrix by its trace. Returns `None` when
    /// the trace vanishes (an indefinite post-selection).
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn from_unnormalized(m: Mat2) -> Option<Self> {
        let tr = m.trace().re;
        let scale = m.max_abs_diff(&Mat2::ZERO);
        if !(tr > NumericPolicy::DEFAULT.vanishing_trace) || !(tr > 1e-15 * scale) {
            return None;
        }
        Some(DensityMatrix2(symmetrize(m.scale(1.0 / tr))))
    }

    pub(crate) fn from_pure(a: Complex64, b: Complex64) -> Self {
        let n = a.norm_sqr() + b.norm_sqr();
        DensityMatrix2(Mat2::hermitian(
            a.norm_sqr() / n,
            a * b.conj() / n,
            b.norm_sqr() / n,
        ))
    }

    /// `(I + x σx + y σy + z σz) / 2`, without validation of `|r| ≤ 1`.
    pub(crate) fn from_bloch_unchecked(r: [f64; 3]) -> Self {
        DensityMatrix2(Mat2::hermitian(
            0.5 * (1.0 + r[2]),
            Complex64::new(0.5 * r[0], -0.5 * r[1]),
            0.5 * (1.0 - r[2]),
        ))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.hermitian_eigen().0
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` with `σz = |H⟩⟨H| − |V⟩⟨V|`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let m = &self.0 .0;
        [2.0 * m[0][1].re, -2.0 * m[0][1].im, (m[0][0] - m[1][1]).re]
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized copy of `(a, b)`.
    pub fn expectation_pure(&self, a: Complex64, b: Complex64) -> f64 {
        let m = &self.0 .0;
        let n = a.norm_sqr() + b.norm_sqr();
        let v = a.conj() * (m[0][0] * a + m[0][1] * b) + b.conj() * (m[1][0] * a + m[1][1] * b);
        v.re / n
    }

    /// Applies the polarization swap `σx ρ σx`.
    pub fn swapped(&self) -> DensityMatrix2 {
        let m = &self.0 .0;
        DensityMatrix2(Mat2([[m[1][1], m[1][0]], [m[0][1], m[0][0]]]))
    }
}

fn symmetrize(m: Mat2) -> Mat2 {
    let off = (m.0[0][1] + m.0[1][0].conj()) * 0.5;
    Mat2::hermitian(m.0[0][0].re, off, m.0[1][1].re)
}

/// Uhlmann–Jozsa fidelity `(Tr √(√ρ σ √ρ))²`, computed with closed-form
/// 2×2 eigendecompositions.
pub fn fidelity(rho: &DensityMatrix2, sigma: &DensityMatrix2) -> f64 {
    let s = rho.0.psd_sqrt();
    let inner = s * sigma.0 * s;
    let (vals, _) = inner.hermitian_eigen();
    let cut = RANK_EPS * vals[1].abs();
    let t: f64 = vals
        .iter()
        .map(|&l| if l <= cut { 0.0 } else { l.sqrt() })
        .sum();
    (t * t).clamp(0.0, 1.0)
}

/// Fidelity on raw matrices, rejecting inputs that are not density matrices.
pub fn fidelity_checked(rho: Mat2, sigma: Mat2) -> Result<f64, StateError> {
    Ok(fidelity(
        &DensityMatrix2::new(rho)?,
        &DensityMatrix2::new(sigma)?,
    ))
}
