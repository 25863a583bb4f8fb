//! Covariance-matrix description of Gaussian optical states.
//!
//! Quadratures are ordered `X₁, Y₁, X₂, Y₂, …` with `X = a + a†` and
//! `Y = -i(a - a†)`, so the vacuum (shot-noise) variance of every quadrature
//! is exactly 1 and a coherent amplitude `α` has quadrature mean
//! `(2·Re α, 2·Im α)`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetry tolerance on covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a covariance matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Tolerance used when checking `S·Ω·Sᵀ = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Principal axes of a single-mode (or Stokes-plane) noise ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEllipse {
    /// Angle of the minor axis in `[-π/2, π/2)`.
    pub theta_sq: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Set when the ellipse is a circle and `theta_sq` is the conventional 0.
    pub degenerate: bool,
}

impl NoiseEllipse {
    /// Diagonalizes the 2×2 symmetric matrix `[[a, b], [b, d]]`, whose
    /// quadratic form `uᵀMu` with `u = (cos θ, sin θ)` is the variance at θ.
    pub fn from_block(block: &Matrix2<f64>) -> Self {
        let a = block[(0, 0)];
        let d = block[(1, 1)];
        let b = 0.5 * (block[(0, 1)] + block[(1, 0)]);
        let half_diff = 0.5 * (a - d);
        let centre = 0.5 * (a + d);
        let radius = half_diff.hypot(b);
        let scale = a.abs().max(d.abs()).max(f64::MIN_POSITIVE);
        let v_max = centre + radius;
        let det = a * d - b * b;
        // det / v_max avoids cancellation in centre - radius for thin ellipses
        let v_min = if v_max > 0.0 {
            det / v_max
        } else {
            centre - radius
        };

        if radius <= 1e-12 * scale {
            return NoiseEllipse {
                theta_sq: 0.0,
                v_min: centre,
                v_max: centre,
                degenerate: true,
            };
        }
        // V(θ) = centre + radius·cos(2θ − ψ), minimal at 2θ = ψ + π
        let psi = b.atan2(half_diff);
        NoiseEllipse {
            theta_sq: wrap_half_turn(0.5 * (psi + std::f64::consts::PI)),
            v_min,
            v_max,
            degenerate: false,
        }
    }

    /// Variance along angle `theta` implied by the principal axes.
    pub fn variance_at(&self, theta: f64) -> f64 {
        let delta = theta - self.theta_sq;
        self.v_min * delta.cos().powi(2) + self.v_max * delta.sin().powi(2)
    }
}

/// Maps an angle onto `[-π/2, π/2)`.
pub fn wrap_half_turn(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let wrapped = (theta + 0.5 * PI).rem_euclid(PI) - 0.5 * PI;
    if wrapped >= 0.5 * PI {
        wrapped - PI
    } else {
        wrapped
    }
}

impl GaussianState {
    /// `n_modes`-mode vacuum.
    pub fn vacuum(n_modes: usize) -> Self {
        GaussianState {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Coherent state with the given quadrature means; covariance is the identity.
    pub fn coherent(n_modes: usize, means: &[f64]) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Dimension("a state needs at least one mode".into()));
        }
        if means.len() != 2 * n_modes {
            return Err(Error::Dimension(format!(
                "{} quadrature means given for {} modes (expected {})",
                means.len(),
                n_modes,
                2 * n_modes
            )));
        }
        Ok(GaussianState {
            n_modes,
            mean: DVector::from_column_slice(means),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Builds a state from explicit moments, validating symmetry and positivity.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "mean vector length {dim} is not 2·n_modes"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::Dimension(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::Parameter(format!(
                "covariance asymmetric by {asym:e}"
            )));
        }
        let state = GaussianState {
            n_modes: dim / 2,
            mean,
            cov: symmetrize(cov),
        };
        state.check_psd()?;
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::Dimension(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes
            )));
        }
        Ok(())
    }

    fn check_psd(&self) -> Result<()> {
        let min_eig = SymmetricEigen::new(self.cov.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::Parameter(format!(
                "covariance not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(())
    }

    /// Quadrature means `(⟨X⟩, ⟨Y⟩)` of one mode.
    pub fn mode_mean(&self, mode: usize) -> Result<[f64; 2]> {
        self.check_mode(mode)?;
        Ok([self.mean[2 * mode], self.mean[2 * mode + 1]])
    }

    /// Complex mean amplitude `⟨a⟩ = (⟨X⟩ + i⟨Y⟩)/2` as `(re, im)`.
    pub fn mode_amplitude(&self, mode: usize) -> Result<(f64, f64)> {
        let [x, y] = self.mode_mean(mode)?;
        Ok((0.5 * x, 0.5 * y))
    }

    /// 2×2 covariance block of one mode.
    pub fn mode_cov(&self, mode: usize) -> Result<Matrix2<f64>> {
        self.block(mode, mode)
    }

    /// Cross-covariance block `Cov(q_a, q_b)`.
    pub fn cross_cov(&self, mode_a: usize, mode_b: usize) -> Result<Matrix2<f64>> {
        self.block(mode_a, mode_b)
    }

    fn block(&self, a: usize, b: usize) -> Result<Matrix2<f64>> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        Ok(self.cov.fixed_view::<2, 2>(2 * a, 2 * b).into_owned())
    }

    /// Replaces the cross-covariance between two distinct modes. The result
    /// must remain a valid covariance matrix.
    pub fn with_cross_covariance(
        mut self,
        mode_a: usize,
        mode_b: usize,
        block: Matrix2<f64>,
    ) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::Dimension(
                "cross-covariance needs two distinct modes".into(),
            ));
        }
        self.cov
            .fixed_view_mut::<2, 2>(2 * mode_a, 2 * mode_b)
            .copy_from(&block);
        self.cov
            .fixed_view_mut::<2, 2>(2 * mode_b, 2 * mode_a)
            .copy_from(&block.transpose());
        self.check_psd()?;
        Ok(self)
    }

    /// Shifts the quadrature means of one mode; covariance is untouched.
    pub fn displace(mut self, mode: usize, shift: [f64; 2]) -> Result<Self> {
        self.check_mode(mode)?;
        self.mean[2 * mode] += shift[0];
        self.mean[2 * mode + 1] += shift[1];
        Ok(self)
    }

    /// Adds classical (positive semidefinite) noise to one mode's covariance block.
    pub fn add_noise(mut self, mode: usize, noise: Matrix2<f64>) -> Result<Self> {
        self.check_mode(mode)?;
        if !noise.iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter("non-finite noise matrix".into()));
        }
        let e = NoiseEllipse::from_block(&noise);
        if e.v_min < PSD_TOL || (noise[(0, 1)] - noise[(1, 0)]).abs() > SYMMETRY_TOL {
            return Err(Error::Parameter("added noise must be symmetric PSD".into()));
        }
        let mut view = self.cov.fixed_view_mut::<2, 2>(2 * mode, 2 * mode);
        view += noise;
        Ok(self)
    }

    /// Applies a transform: `mean' = S·mean`, `cov' = S·cov·Sᵀ` with `S`
    /// embedded as the identity on untouched modes.
    pub fn apply(&self, t: &SymplecticTransform) -> Result<Self> {
        for &m in &t.target_modes {
            self.check_mode(m)?;
        }
        let full = t.embed(self.n_modes);
        let mean = &full * &self.mean;
        let cov = symmetrize(&full * &self.cov * full.transpose());
        Ok(GaussianState {
            n_modes: self.n_modes,
            mean,
            cov,
        })
    }

    /// Pure-loss channel with transmissivity `eta` on one mode: vacuum is
    /// mixed in on a beam splitter, so the mode's block becomes
    /// `η·C + (1−η)·I`, its means scale by `√η`, and its correlations with
    /// other modes scale by `√η`.
    pub fn loss_channel(&self, eta: f64, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Parameter(format!(
                "transmissivity {eta} outside [0, 1]"
            )));
        }
        let amp = eta.sqrt();
        let mut out = self.clone();
        let dim = 2 * self.n_modes;
        for q in [2 * mode, 2 * mode + 1] {
            out.mean[q] *= amp;
            for k in 0..dim {
                out.cov[(q, k)] *= amp;
                out.cov[(k, q)] *= amp;
            }
            out.cov[(q, q)] += 1.0 - eta;
        }
        out.cov = symmetrize(out.cov);
        Ok(out)
    }

    /// Variance of `X_θ = cos θ·X + sin θ·Y` on one mode, in shot-noise units.
    pub fn quadrature_variance(&self, mode: usize, theta: f64) -> Result<f64> {
        let c = self.mode_cov(mode)?;
        let (s, co) = theta.sin_cos();
        Ok(co * co * c[(0, 0)] + 2.0 * s * co * c[(0, 1)] + s * s * c[(1, 1)])
    }

    /// Minor axis of the mode's noise ellipse.
    pub fn min_variance_direction(&self, mode: usize) -> Result<NoiseEllipse> {
        Ok(NoiseEllipse::from_block(&self.mode_cov(mode)?))
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Linear map on the quadratures of a subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    target_modes: Vec<usize>,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>, target_modes: Vec<usize>) -> Result<Self> {
        let k = target_modes.len();
        if k == 0 {
            return Err(Error::Dimension(
                "transform must act on at least one mode".into(),
            ));
        }
        if matrix.nrows() != 2 * k || matrix.ncols() != 2 * k {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {k} target modes",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, m) in target_modes.iter().enumerate() {
            if target_modes[..i].contains(m) {
                return Err(Error::Dimension(format!("mode {m} targeted twice")));
            }
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter("non-finite transform matrix".into()));
        }
        Ok(SymplecticTransform {
            matrix,
            target_modes,
        })
    }

    /// Linearized self-phase modulation about a real mean field:
    /// `δX' = δX`, `δY' = δY + 2γ·δX`.
    pub fn kerr_shear(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Parameter(format!(
                "Kerr parameter {gamma} must be finite and ≥ 0"
            )));
        }
        Self::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0 * gamma, 1.0]),
            vec![0],
        )
    }

    /// Phase-space rotation by `phi`.
    pub fn phase_rotation(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::Parameter(format!("rotation angle {phi} not finite")));
        }
        let (s, c) = phi.sin_cos();
        Self::new(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]), vec![0])
    }

    /// Lossless beam splitter with power transmissivity `t` between two modes.
    pub fn beam_splitter(t: f64, mode_a: usize, mode_b: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!(
                "transmissivity {t} outside [0, 1]"
            )));
        }
        let c = t.sqrt();
        let s = (1.0 - t).sqrt();
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
             c, 0.0,   s, 0.0,
           0.0,   c, 0.0,   s,
            -s, 0.0,   c, 0.0,
           0.0,  -s, 0.0,   c,
        ]);
        Self::new(m, vec![mode_a, mode_b])
    }

    /// Retargets a transform onto other modes (same count).
    pub fn on_modes(mut self, modes: Vec<usize>) -> Result<Self> {
        if modes.len() != self.target_modes.len() {
            return Err(Error::Dimension(format!(
                "{} modes given for a {}-mode transform",
                modes.len(),
                self.target_modes.len()
            )));
        }
        self.target_modes = modes;
        Self::new(self.matrix, self.target_modes)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target_modes(&self) -> &[usize] {
        &self.target_modes
    }

    /// `max |S·Ω·Sᵀ − Ω|` over all entries.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.target_modes.len());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_defect() < SYMPLECTIC_TOL
    }

    fn embed(&self, n_modes: usize) -> DMatrix<f64> {
        let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let idx: Vec<usize> = self
            .target_modes
            .iter()
            .flat_map(|&m| [2 * m, 2 * m + 1])
            .collect();
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                full[(r, c)] = self.matrix[(i, j)];
            }
        }
        full
    }
}

/// Block-diagonal `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn kerr_vacuum(gamma: f64) -> GaussianState {
        GaussianState::vacuum(1)
            .apply(&SymplecticTransform::kerr_shear(gamma).unwrap())
            .unwrap()
    }

    #[test]
    fn coherent_has_identity_covariance() {
        let s = GaussianState::coherent(1, &[2.0, 0.0]).unwrap();
        assert_eq!(s.cov(), &DMatrix::<f64>::identity(2, 2));
        assert_eq!(s.mean().as_slice(), &[2.0, 0.0]);

        let v = GaussianState::coherent(2, &[0.0; 4]).unwrap();
        for q in 0..4 {
            assert_eq!(v.cov()[(q, q)], 1.0);
        }
    }

    #[test]
    fn coherent_rejects_length_mismatch() {
        assert!(matches!(
            GaussianState::coherent(2, &[1.0, 0.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn kerr_shear_matrices() {
        let id = SymplecticTransform::kerr_shear(0.0).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<f64>::identity(2, 2));

        let s = kerr_vacuum(1.0);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        assert!((s.cov() - expected).amax() < 1e-15);

        let e = s.min_variance_direction(0).unwrap();
        assert!((e.v_min - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((e.v_max - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn kerr_shear_rejects_bad_gamma() {
        assert!(SymplecticTransform::kerr_shear(f64::NAN).is_err());
        assert!(SymplecticTransform::kerr_shear(f64::INFINITY).is_err());
        assert!(SymplecticTransform::kerr_shear(-0.5).is_err());
        assert!(SymplecticTransform::phase_rotation(f64::NAN).is_err());
    }

    #[test]
    fn phase_rotation_examples() {
        let r0 = SymplecticTransform::phase_rotation(0.0).unwrap();
        assert_eq!(r0.matrix(), &DMatrix::<f64>::identity(2, 2));

        let alpha = 3.0;
        let s = GaussianState::coherent(1, &[alpha, 0.0])
            .unwrap()
            .apply(&SymplecticTransform::phase_rotation(FRAC_PI_2).unwrap())
            .unwrap();
        assert!(s.mean()[0].abs() < 1e-15);
        assert!((s.mean()[1] - alpha).abs() < 1e-15);

        let k = kerr_vacuum(1.0);
        let rotated = k
            .apply(&SymplecticTransform::phase_rotation(PI).unwrap())
            .unwrap();
        assert!((rotated.cov() - k.cov()).amax() < 1e-14);
    }

    #[test]
    fn transforms_are_symplectic() {
        for t in [
            SymplecticTransform::kerr_shear(3.7).unwrap(),
            SymplecticTransform::phase_rotation(0.3).unwrap(),
            SymplecticTransform::beam_splitter(0.3, 0, 1).unwrap(),
        ] {
            assert!(t.is_symplectic(), "defect {}", t.symplectic_defect());
        }
        let not =
            SymplecticTransform::new(DMatrix::from_diagonal_element(2, 2, 2.0), vec![0]).unwrap();
        assert!(!not.is_symplectic());
    }

    #[test]
    fn apply_is_local() {
        let base = GaussianState::coherent(2, &[1.0, 0.0, 2.0, 0.5]).unwrap();
        let t = SymplecticTransform::kerr_shear(1.3)
            .unwrap()
            .on_modes(vec![0])
            .unwrap();
        let out = base.apply(&t).unwrap();
        assert_eq!(out.mode_cov(1).unwrap(), base.mode_cov(1).unwrap());
        assert_eq!(out.mode_mean(1).unwrap(), base.mode_mean(1).unwrap());
        assert_eq!(out.cross_cov(0, 1).unwrap(), Matrix2::zeros());

        let same = base
            .apply(&SymplecticTransform::phase_rotation(0.0).unwrap())
            .unwrap();
        assert_eq!(same, base);
    }

    #[test]
    fn apply_rejects_bad_mode() {
        let t = SymplecticTransform::kerr_shear(1.0)
            .unwrap()
            .on_modes(vec![3])
            .unwrap();
        assert!(matches!(
            GaussianState::vacuum(2).apply(&t),
            Err(Error::Dimension(_))
        ));
        assert!(SymplecticTransform::beam_splitter(0.5, 1, 1).is_err());
    }

    #[test]
    fn amplitude_quadrature_stays_at_shot_noise() {
        let s = kerr_vacuum(1.0);
        assert!((s.quadrature_variance(0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_channel_examples() {
        let k = kerr_vacuum(1.0).displace(0, [4.0, 0.0]).unwrap();
        assert_eq!(k.loss_channel(1.0, 0).unwrap(), k);

        let gone = k.loss_channel(0.0, 0).unwrap();
        assert!((gone.cov() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        assert_eq!(gone.mean().as_slice(), &[0.0, 0.0]);

        let sq = GaussianState::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[0.309, 0.0, 0.0, 1.0 / 0.309]),
        )
        .unwrap();
        let lossy = sq.loss_channel(0.795, 0).unwrap();
        assert!((lossy.cov()[(0, 0)] - 0.4507).abs() < 5e-5);
        assert!((lossy.cov()[(0, 0)] - (0.795 * 0.309 + 0.205)).abs() < 1e-15);

        assert!(matches!(k.loss_channel(1.2, 0), Err(Error::Parameter(_))));
        assert!(matches!(k.loss_channel(-0.1, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn loss_scales_cross_covariance() {
        let corr = Matrix2::new(0.3, 0.0, 0.0, -0.3);
        let s = GaussianState::vacuum(2)
            .with_cross_covariance(0, 1, corr)
            .unwrap();
        let l = s.loss_channel(0.25, 0).unwrap();
        assert!((l.cross_cov(0, 1).unwrap() - corr * 0.5).amax() < 1e-15);
        assert!((l.cross_cov(1, 0).unwrap() - corr.transpose() * 0.5).amax() < 1e-15);
    }

    #[test]
    fn cross_covariance_must_stay_psd() {
        let too_big = Matrix2::new(2.0, 0.0, 0.0, 2.0);
        assert!(GaussianState::vacuum(2)
            .with_cross_covariance(0, 1, too_big)
            .is_err());
    }

    #[test]
    fn quadrature_variance_formula() {
        for &gamma in &[0.0, 0.4, 1.0, 3.0] {
            let s = kerr_vacuum(gamma);
            for k in 0..24 {
                let th = -FRAC_PI_2 + k as f64 * PI / 24.0;
                let expected = 1.0
                    + 4.0 * gamma * gamma * th.sin().powi(2)
                    + 4.0 * gamma * th.sin() * th.cos();
                assert!((s.quadrature_variance(0, th).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn min_variance_direction_examples() {
        let v = GaussianState::vacuum(1).min_variance_direction(0).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.theta_sq, 0.0);
        assert_eq!(v.v_min, 1.0);

        let e = kerr_vacuum(1.0).min_variance_direction(0).unwrap();
        assert!(!e.degenerate);
        assert!((e.theta_sq + FRAC_PI_8).abs() < 1e-12);
        assert!((e.v_min - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);

        let big = kerr_vacuum(10.0).min_variance_direction(0).unwrap();
        assert!((big.theta_sq.abs() - 0.5 * 0.1f64.atan()).abs() < 1e-12);
        assert!(big.theta_sq.abs() < e.theta_sq.abs());
    }

    #[test]
    fn ellipse_reproduces_quadrature_variance() {
        let s = kerr_vacuum(0.7)
            .apply(&SymplecticTransform::phase_rotation(0.4).unwrap())
            .unwrap();
        let e = s.min_variance_direction(0).unwrap();
        for k in 0..10 {
            let th = k as f64 * 0.31;
            assert!((e.variance_at(th) - s.quadrature_variance(0, th).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_stays_in_range() {
        for k in -20..20 {
            let w = wrap_half_turn(k as f64 * 0.37);
            assert!((-FRAC_PI_2..FRAC_PI_2).contains(&w));
        }
        assert_eq!(wrap_half_turn(FRAC_PI_2), -FRAC_PI_2);
    }

    #[test]
    fn new_rejects_asymmetric_or_negative() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(GaussianState::new(DVector::zeros(2), asym).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.1]);
        assert!(GaussianState::new(DVector::zeros(2), neg).is_err());
        assert!(GaussianState::new(DVector::zeros(3), DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn add_noise_only_touches_target_block() {
        let s = kerr_vacuum(1.0)
            .add_noise(0, Matrix2::new(0.0, 0.0, 0.0, 3.0))
            .unwrap();
        assert_eq!(s.cov()[(1, 1)], 8.0);
        assert_eq!(s.cov()[(0, 0)], 1.0);
        assert!(kerr_vacuum(1.0)
            .add_noise(0, Matrix2::new(0.0, 0.0, 0.0, -1.0))
            .is_err());
    }
}
