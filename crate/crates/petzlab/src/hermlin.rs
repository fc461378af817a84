//! Hermitian/complex dense matrix core.
//!
//! Spectral decompositions, matrix functions restricted to the support,
//! trace/operator norms, and the Fréchet derivative of the matrix
//! exponential. Everything here is desk scale: dense `Complex<f64>`
//! matrices of dimension up to a few dozen.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix (column major).
pub type CMat = DMatrix<C64>;

/// Asymmetry below this is symmetrized away at construction; above it is an error.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues of a PSD matrix may undershoot zero by this fraction of the largest one.
pub const TOL_PSD: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TOL_TRACE: f64 = 1e-8;
/// An eigenvalue counts as zero iff it is `<= SUPPORT_REL_TOL * lambda_max`.
pub const SUPPORT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("hermiticity violated: asymmetry {0:.3e} exceeds tolerance")]
    NotHermitian(f64),
    #[error("negative eigenvalue {0:.3e} beyond PSD tolerance")]
    NotPsd(f64),
    #[error("trace {0} is not 1 within tolerance")]
    NotUnitTrace(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("function undefined at retained eigenvalue {0}")]
    Domain(f64),
    #[error("matrix is singular but a strictly positive one is required")]
    Singular,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, MatrixError>;

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(MatrixError::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub fn ensure_same_dim(a: &CMat, b: &CMat) -> Result<usize> {
    let da = ensure_square(a)?;
    let db = ensure_square(b)?;
    if da != db {
        return Err(MatrixError::DimMismatch(da, db));
    }
    Ok(da)
}

fn asymmetry(m: &CMat) -> f64 {
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian matrix; small asymmetry is removed by `(A + A*)/2` at construction.
#[derive(Debug, Clone)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        ensure_square(&m)?;
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let asym = asymmetry(&m);
        if asym > TOL_HERM * scale {
            return Err(MatrixError::NotHermitian(asym));
        }
        Ok(Self((&m + m.adjoint()).scale(0.5)))
    }

    /// Wrap a matrix that is Hermitian by construction.
    pub(crate) fn new_unchecked(m: CMat) -> Self {
        Self((&m + m.adjoint()).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMat::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMat::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self(m)
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Positive semi-definite matrix.
#[derive(Debug, Clone)]
pub struct PsdMatrix(HermitianMatrix);

impl PsdMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        let spec = eigh(&h);
        let lo = spec.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if lo < -(TOL_PSD * hi.max(0.0) + 1e-14) {
            return Err(MatrixError::NotPsd(lo));
        }
        Ok(Self(h))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag).into_mat())
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianMatrix::new_unchecked(CMat::identity(dim, dim)))
    }

    pub fn mat(&self) -> &CMat {
        self.0.mat()
    }

    pub fn herm(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Spectral decomposition with negative round-off eigenvalues clamped to zero.
    pub fn spectral(&self) -> SpectralDecomposition {
        let mut spec = eigh(&self.0);
        for v in spec.eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        spec
    }

    pub fn is_faithful(&self) -> bool {
        let spec = self.spectral();
        let hi = spec.lambda_max();
        spec.eigenvalues.iter().all(|&l| l > SUPPORT_REL_TOL * hi) && hi > 0.0
    }
}

/// Positive semi-definite with unit trace; doubles as a normal state functional.
#[derive(Debug, Clone)]
pub struct DensityMatrix(PsdMatrix);

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let p = PsdMatrix::new(m)?;
        let tr = p.mat().trace().re;
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(MatrixError::NotUnitTrace(tr));
        }
        Ok(Self(p))
    }

    /// Normalize a nonzero PSD matrix to unit trace.
    pub fn from_psd_normalized(p: &PsdMatrix) -> Result<Self> {
        let tr = p.mat().trace().re;
        if tr <= 0.0 {
            return Err(MatrixError::Invalid("cannot normalize zero matrix".into()));
        }
        Self::new(p.mat().unscale(tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(CMat::identity(dim, dim).unscale(dim as f64)).unwrap()
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(probs).into_mat())
    }

    pub fn mat(&self) -> &CMat {
        self.0.mat()
    }

    pub fn psd(&self) -> &PsdMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        self.0.spectral()
    }

    pub fn is_faithful(&self) -> bool {
        self.0.is_faithful()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending,
/// eigenvector columns unitary with a deterministic phase convention.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Threshold below which an eigenvalue of a PSD matrix counts as zero.
    pub fn support_threshold(&self) -> f64 {
        SUPPORT_REL_TOL * self.lambda_max().abs().max(f64::MIN_POSITIVE)
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply_fn(|x| x)
    }

    /// `U f(lambda) U*` over the full spectrum.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMat {
        self.apply_cfn(|x| C64::new(f(x), 0.0))
    }

    /// `U f(lambda) U*` with a complex-valued function of the eigenvalues.
    pub fn apply_cfn(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let fj = f(self.eigenvalues[j]);
            for x in col.iter_mut() {
                *x *= fj;
            }
        }
        let mut out = CMat::zeros(d, d);
        scaled.mul_to(&self.eigenvectors.adjoint(), &mut out);
        out
    }

    /// Like `apply_cfn`, but eigenvalues at or below the support threshold map to 0.
    pub fn apply_cfn_support(&self, f: impl Fn(f64) -> C64) -> CMat {
        let thresh = self.support_threshold();
        self.apply_cfn(|x| if x <= thresh { C64::new(0.0, 0.0) } else { f(x) })
    }

    /// Complex pseudo-power of a PSD matrix: `lambda^z` on the support, 0 off it.
    pub fn power(&self, z: C64) -> CMat {
        if z == C64::new(0.0, 0.0) {
            return self.support_projection();
        }
        self.apply_cfn_support(|x| (z * x.ln()).exp())
    }

    pub fn real_power(&self, a: f64) -> CMat {
        self.power(C64::new(a, 0.0))
    }

    /// Orthogonal projection onto the support (strictly positive eigenvalues).
    pub fn support_projection(&self) -> CMat {
        let thresh = self.support_threshold();
        self.apply_cfn(|x| {
            if x > thresh {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn rank(&self) -> usize {
        let thresh = self.support_threshold();
        self.eigenvalues.iter().filter(|&&l| l > thresh).count()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come out ascending; each eigenvector is rotated so that its
/// largest-magnitude component is real positive, which keeps reports
/// reproducible across runs.
pub fn eigh(h: &HermitianMatrix) -> SpectralDecomposition {
    let d = h.dim();
    if d == 0 {
        return SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMat::zeros(0, 0),
        };
    }
    let se = nalgebra::linalg::SymmetricEigen::new(h.0.clone());
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(d, d);
    for (col, &i) in idx.iter().enumerate() {
        let v = se.eigenvectors.column(i);
        // pick the deterministic phase
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (row, x) in v.iter().enumerate() {
            let mag = x.norm();
            if mag > best_mag + 1e-15 {
                best_mag = mag;
                best = row;
            }
        }
        let phase = if best_mag > 0.0 {
            v[best].conj() / C64::new(best_mag, 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for row in 0..d {
            eigenvectors[(row, col)] = v[row] * phase;
        }
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Apply a real function to a Hermitian matrix through its spectrum.
///
/// With `on_support` set, eigenvalues at or below the support threshold are
/// mapped to 0 and `f` is never evaluated there.
pub fn matrix_function(
    h: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    on_support: bool,
) -> Result<HermitianMatrix> {
    let spec = eigh(h);
    let thresh = spec.support_threshold();
    let mut vals = Vec::with_capacity(spec.dim());
    for &l in &spec.eigenvalues {
        if on_support && l <= thresh {
            vals.push(0.0);
        } else {
            let y = f(l);
            if !y.is_finite() {
                return Err(MatrixError::Domain(l));
            }
            vals.push(y);
        }
    }
    let d = spec.dim();
    let mut out = CMat::zeros(d, d);
    let mut scaled = spec.eigenvectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let fj = C64::new(vals[j], 0.0);
        for x in col.iter_mut() {
            *x *= fj;
        }
    }
    scaled.mul_to(&spec.eigenvectors.adjoint(), &mut out);
    Ok(HermitianMatrix::new_unchecked(out))
}

/// `exp(H)` for Hermitian `H`.
pub fn expm_herm(h: &HermitianMatrix) -> PsdMatrix {
    let m = eigh(h).apply_fn(f64::exp);
    PsdMatrix::new(m).expect("exp of Hermitian is positive")
}

/// `log(P)` for strictly positive `P`.
pub fn logm_pd(p: &PsdMatrix) -> Result<HermitianMatrix> {
    if !p.is_faithful() {
        return Err(MatrixError::Singular);
    }
    Ok(HermitianMatrix::new_unchecked(
        p.spectral().apply_fn(f64::ln),
    ))
}

/// PSD square root (pseudo: zero eigenvalues stay zero).
pub fn sqrtm_psd(p: &PsdMatrix) -> PsdMatrix {
    let m = p.spectral().apply_fn(|x| x.max(0.0).sqrt());
    PsdMatrix::new(m).expect("square root of PSD is PSD")
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// First divided difference of exp, stable near coincident arguments.
fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() < 1e-5 {
        (0.5 * (a + b)).exp() * sinhc(0.5 * d)
    } else {
        (a.exp() - b.exp()) / d
    }
}

/// Directional derivative `D exp(H)[X]` via first divided differences in the
/// eigenbasis of `H` (Daleckii–Krein).
pub fn frechet_exp(h: &HermitianMatrix, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = ensure_same_dim(h.mat(), x.mat())?;
    let spec = eigh(h);
    let u = &spec.eigenvectors;
    let b = u.adjoint() * x.mat() * u;
    let mut scaled = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let phi = exp_divided_difference(spec.eigenvalues[i], spec.eigenvalues[j]);
            scaled[(i, j)] = b[(i, j)] * C64::new(phi, 0.0);
        }
    }
    Ok(HermitianMatrix::new_unchecked(u * scaled * u.adjoint()))
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    singular_values(a).iter().sum()
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    singular_values(a).iter().copied().fold(0.0, f64::max)
}

fn singular_values(a: &CMat) -> Vec<f64> {
    let gram = HermitianMatrix::new_unchecked(a.adjoint() * a);
    eigh(&gram)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect()
}

/// Hilbert–Schmidt inner product `Tr(A* B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<C64> {
    ensure_same_dim(a, b)?;
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    Ok(acc)
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
