//! Multimode Gaussian states in the covariance-matrix picture.
//!
//! Quadratures are interleaved per mode, `(X1, P1, X2, P2, ...)`, and scaled
//! so the vacuum has `Var X = Var P = 1`. A covariance matrix is physical when
//! `cov + iJ` is positive semidefinite, with `J` built from 2x2 blocks
//! `[[0, 1], [-1, 0]]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest eigenvalue of `cov + iJ` still accepted as physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Singular values below this fraction of the largest are dropped when
/// inverting a conditioning covariance.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// A single quadrature `cos(angle) X + sin(angle) P` of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub mode: usize,
    pub angle: f64,
}

impl Quadrature {
    pub fn new(mode: usize, angle: f64) -> Self {
        Self { mode, angle }
    }

    pub fn x(mode: usize) -> Self {
        Self { mode, angle: 0.0 }
    }

    pub fn p(mode: usize) -> Self {
        Self {
            mode,
            angle: std::f64::consts::FRAC_PI_2,
        }
    }
}

/// Covariance summary of an ordered mode pair `(I, J)`.
///
/// `n = Var X_I`, `m = Var X_J`, `c_x = Cov(X_I, X_J)`, `c_p = Cov(P_I, P_J)`.
/// For two-mode-squeezed-type pairs `c_p = -c_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeReduced {
    pub n: f64,
    pub m: f64,
    pub c_x: f64,
    pub c_p: f64,
}

impl TwoModeReduced {
    pub fn swapped(self) -> Self {
        Self {
            n: self.m,
            m: self.n,
            ..self
        }
    }
}

/// Result of the uncertainty-principle check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from raw moments. The covariance is symmetrized; no
    /// physicality check is made (see [`GaussianState::physicality`]).
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::EmptyRegister);
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "mean has odd length {dim}"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state moments"));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::EmptyRegister);
        }
        Ok(Self {
            mean: DVector::zeros(2 * num_modes),
            cov: DMatrix::identity(2 * num_modes, 2 * num_modes),
        })
    }

    /// Product of thermal states, `Var X = Var P = 2 n + 1` per mode.
    pub fn thermal(occupations: &[f64]) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let mut cov = DMatrix::zeros(2 * occupations.len(), 2 * occupations.len());
        for (k, &n) in occupations.iter().enumerate() {
            check_occupation(n)?;
            cov[(2 * k, 2 * k)] = 2.0 * n + 1.0;
            cov[(2 * k + 1, 2 * k + 1)] = 2.0 * n + 1.0;
        }
        Ok(Self {
            mean: DVector::zeros(2 * occupations.len()),
            cov,
        })
    }

    /// Two-mode squeezed vacuum: `Var X = cosh 2r`, `<X1 X2> = sinh 2r`,
    /// `<P1 P2> = -sinh 2r`.
    pub fn two_mode_squeezed(r: f64) -> Result<Self> {
        Self::thermal_seeded_tms(r, 0.0, 0.0)
    }

    /// Two-mode squeezing applied to thermal inputs with occupations
    /// `n_b` (mode 0) and `n_f` (mode 1).
    pub fn thermal_seeded_tms(r: f64, n_b: f64, n_f: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite("squeeze parameter"));
        }
        Self::thermal(&[n_b, n_f])?.apply_two_mode_squeezer(0, 1, r)
    }

    pub fn num_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes() {
            return Err(Error::ModeOutOfRange {
                mode,
                num_modes: self.num_modes(),
            });
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::DuplicateMode(i));
        }
        Ok(())
    }

    /// Appends the modes of `other` after those of `self`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (d1, d2) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(d1 + d2);
        mean.rows_mut(0, d1).copy_from(&self.mean);
        mean.rows_mut(d1, d2).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
        cov.view_mut((0, 0), (d1, d1)).copy_from(&self.cov);
        cov.view_mut((d1, d1), (d2, d2)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Applies a symplectic matrix acting on the quadratures of `modes`
    /// (in that order) and as the identity elsewhere.
    fn transform(&self, modes: &[usize], local: &DMatrix<f64>) -> GaussianState {
        let dim = self.mean.len();
        let mut s = DMatrix::identity(dim, dim);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        s[(2 * ma + qa, 2 * mb + qb)] = local[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        let mean = &s * &self.mean;
        let cov = &s * &self.cov * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianState { mean, cov }
    }

    /// Beam splitter with amplitude transmission `sqrt(eta)`:
    /// `a_i -> sqrt(eta) a_i - sqrt(1 - eta) a_j`,
    /// `a_j -> sqrt(1 - eta) a_i + sqrt(eta) a_j`.
    pub fn apply_beamsplitter(&self, i: usize, j: usize, eta: f64) -> Result<GaussianState> {
        self.check_pair(i, j)?;
        check_transmission(eta)?;
        let (t, s) = (eta.sqrt(), (1.0 - eta).sqrt());
        #[rustfmt::skip]
        let local = DMatrix::from_row_slice(4, 4, &[
            t, 0.0, -s, 0.0,
            0.0, t, 0.0, -s,
            s, 0.0, t, 0.0,
            0.0, s, 0.0, t,
        ]);
        Ok(self.transform(&[i, j], &local))
    }

    /// Two-mode squeezer; on vacuum inputs it produces `two_mode_squeezed(r)`.
    pub fn apply_two_mode_squeezer(&self, i: usize, j: usize, r: f64) -> Result<GaussianState> {
        self.check_pair(i, j)?;
        if !r.is_finite() {
            return Err(Error::NonFinite("squeeze parameter"));
        }
        let (c, s) = (r.cosh(), r.sinh());
        #[rustfmt::skip]
        let local = DMatrix::from_row_slice(4, 4, &[
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        ]);
        Ok(self.transform(&[i, j], &local))
    }

    /// Phase rotation `X -> cos X + sin P`, `P -> -sin X + cos P`.
    pub fn apply_phase_rotation(&self, mode: usize, theta: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        if !theta.is_finite() {
            return Err(Error::NonFinite("phase angle"));
        }
        let (c, s) = (theta.cos(), theta.sin());
        let local = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        Ok(self.transform(&[mode], &local))
    }

    /// Pure loss: mixes `mode` with a fresh vacuum on a beam splitter of
    /// transmission `eta` and discards the ancilla.
    pub fn apply_loss(&self, mode: usize, eta: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        check_transmission(eta)?;
        let n = self.num_modes();
        let extended = self.tensor(&GaussianState::vacuum(1)?);
        let mixed = extended.apply_beamsplitter(mode, n, eta)?;
        let keep: Vec<usize> = (0..n).collect();
        mixed.partial_trace(&keep)
    }

    /// Restricts the state to `keep`, in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<GaussianState> {
        if keep.is_empty() {
            return Err(Error::EmptyModeList);
        }
        for (k, &m) in keep.iter().enumerate() {
            self.check_mode(m)?;
            if keep[..k].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&a| self.mean[a]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.cov[(idx[a], idx[b])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn reduced_two_mode(&self, i: usize, j: usize) -> Result<TwoModeReduced> {
        self.check_pair(i, j)?;
        Ok(TwoModeReduced {
            n: self.cov[(2 * i, 2 * i)],
            m: self.cov[(2 * j, 2 * j)],
            c_x: self.cov[(2 * i, 2 * j)],
            c_p: self.cov[(2 * i + 1, 2 * j + 1)],
        })
    }

    /// Coefficient vector of a quadrature over all phase-space coordinates.
    pub fn quadrature_vector(&self, q: Quadrature) -> Result<DVector<f64>> {
        self.check_mode(q.mode)?;
        if !q.angle.is_finite() {
            return Err(Error::NonFinite("quadrature angle"));
        }
        let mut v = DVector::zeros(self.mean.len());
        v[2 * q.mode] = q.angle.cos();
        v[2 * q.mode + 1] = q.angle.sin();
        Ok(v)
    }

    /// Variance of an arbitrary linear combination of quadratures.
    pub fn combination_variance(&self, coeffs: &DVector<f64>) -> Result<f64> {
        if coeffs.len() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} quadratures",
                coeffs.len(),
                self.mean.len()
            )));
        }
        Ok((coeffs.transpose() * &self.cov * coeffs)[(0, 0)])
    }

    pub fn variance(&self, q: Quadrature) -> Result<f64> {
        let v = self.quadrature_vector(q)?;
        self.combination_variance(&v)
    }

    /// Schur-complement conditional variance of `target` given the
    /// `conditioners`, at most one quadrature per conditioning mode.
    pub fn conditional_variance(&self, target: Quadrature, conditioners: &[Quadrature]) -> Result<f64> {
        let t = self.quadrature_vector(target)?;
        for (k, q) in conditioners.iter().enumerate() {
            if q.mode == target.mode {
                return Err(Error::TargetInConditioners(q.mode));
            }
            if conditioners[..k].iter().any(|o| o.mode == q.mode) {
                return Err(Error::ConditionerModeRepeated(q.mode));
            }
        }
        let vs = conditioners
            .iter()
            .map(|&q| self.quadrature_vector(q))
            .collect::<Result<Vec<_>>>()?;
        let var_t = (t.transpose() * &self.cov * &t)[(0, 0)];
        if vs.is_empty() {
            return Ok(var_t);
        }
        let k = vs.len();
        let sigma_vv = DMatrix::from_fn(k, k, |a, b| (vs[a].transpose() * &self.cov * &vs[b])[(0, 0)]);
        let sigma_vt = DVector::from_fn(k, |a, _| (vs[a].transpose() * &self.cov * &t)[(0, 0)]);
        Ok(var_t - pinv_quadratic_form(&sigma_vv, &sigma_vt))
    }

    /// Minimum eigenvalue of `cov + iJ` and the verdict at [`PHYSICALITY_TOL`].
    pub fn physicality(&self) -> Physicality {
        let dim = self.mean.len();
        // Real embedding of the Hermitian matrix A + iB: [[A, -B], [B, A]].
        let mut h = DMatrix::zeros(2 * dim, 2 * dim);
        h.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        h.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        for k in 0..dim / 2 {
            let (x, p) = (2 * k, 2 * k + 1);
            // B = J
            h[(dim + x, p)] = 1.0;
            h[(dim + p, x)] = -1.0;
            h[(x, dim + p)] = -1.0;
            h[(p, dim + x)] = 1.0;
        }
        let min_eigenvalue = SymmetricEigen::new(h).eigenvalues.min();
        Physicality {
            physical: min_eigenvalue >= -PHYSICALITY_TOL,
            min_eigenvalue,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.physicality().physical
    }
}

/// `b^T pinv(a) b` for symmetric positive semidefinite `a`, with the
/// relative singular-value cutoff. Each retained term is non-negative.
pub(crate) fn pinv_quadratic_form(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let eig = SymmetricEigen::new(a.clone());
    let largest = eig.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if largest == 0.0 {
        return 0.0;
    }
    let cutoff = PINV_RELATIVE_CUTOFF * largest;
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| lambda > cutoff)
        .map(|(k, &lambda)| {
            let proj = eig.eigenvectors.column(k).dot(b);
            proj * proj / lambda
        })
        .sum()
}

fn check_transmission(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidTransmission(eta));
    }
    Ok(())
}

fn check_occupation(n: f64) -> Result<()> {
    if !n.is_finite() {
        return Err(Error::NonFinite("thermal occupation"));
    }
    if n < 0.0 {
        return Err(Error::NegativeOccupation(n));
    }
    Ok(())
}
