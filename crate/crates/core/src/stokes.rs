//! Quantum Stokes parameters of a two-mode (x/y polarization) Gaussian state.
//!
//! Means use the classical expressions; fluctuations are propagated to first
//! order in the quadrature noise, `δŜ_k = Re(ā†σ_k(δX + iδY))`, which for a
//! circular mean field reduces to `δŜ_θ = α(δX_{x,θ} − δX_{y,θ})/√2` with
//! each quadrature taken relative to its own mode's mean phase.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Vector4};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, NoiseEllipse, SymplecticTransform};

/// Relative tolerance for the Heisenberg product check.
pub const HEISENBERG_REL_TOL: f64 = 1e-9;

/// Two-mode Gaussian state; mode 0 is x polarization, mode 1 is y.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationState {
    gauss: GaussianState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesMean {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesMean {
    /// `s0² ≥ s1² + s2² + s3²` up to relative rounding.
    pub fn is_consistent(&self) -> bool {
        let s0sq = self.s0 * self.s0;
        s0sq >= self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3 - 1e-9 * s0sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergCheck {
    /// `Var(S₁)·Var(S₂)`
    pub product: f64,
    /// `⟨S₃⟩²`
    pub bound: f64,
    pub satisfied: bool,
}

impl PolarizationState {
    pub fn new(gauss: GaussianState) -> Result<Self> {
        if gauss.n_modes() != 2 {
            return Err(Error::Dimension(format!(
                "polarization state needs 2 modes, got {}",
                gauss.n_modes()
            )));
        }
        Ok(PolarizationState { gauss })
    }

    /// Coherent state with real amplitudes `alpha_x`, `alpha_y` and the y
    /// mode phase-shifted by `rel_phase`.
    pub fn coherent(alpha_x: f64, alpha_y: f64, rel_phase: f64) -> Result<Self> {
        if !(alpha_x >= 0.0 && alpha_y >= 0.0) || !rel_phase.is_finite() {
            return Err(Error::Parameter(
                "amplitudes must be ≥ 0 and the phase finite".into(),
            ));
        }
        let (s, c) = rel_phase.sin_cos();
        let g = GaussianState::coherent(
            2,
            &[2.0 * alpha_x, 0.0, 2.0 * alpha_y * c, 2.0 * alpha_y * s],
        )?;
        Self::new(g)
    }

    /// Circularly polarized coherent light with `⟨S₃⟩ = ⟨S₀⟩ = alpha_sq`.
    pub fn circular(alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq >= 0.0) {
            return Err(Error::Parameter(format!(
                "photon number {alpha_sq} must be ≥ 0"
            )));
        }
        let a = (0.5 * alpha_sq).sqrt();
        Self::coherent(a, a, FRAC_PI_2)
    }

    /// Circular state whose x and y modes have each been Kerr-sheared by
    /// `gamma` about their own mean field, with classical excess noise
    /// `excess_phase_var` added to each mode's phase quadrature. The x/y
    /// fluctuations are uncorrelated.
    pub fn sheared_circular(alpha_sq: f64, gamma: f64, excess_phase_var: f64) -> Result<Self> {
        if !(alpha_sq >= 0.0) || !(excess_phase_var >= 0.0) {
            return Err(Error::Parameter(format!(
                "need α² ≥ 0 and excess noise ≥ 0 (got {alpha_sq}, {excess_phase_var})"
            )));
        }
        let shear = SymplecticTransform::kerr_shear(gamma)?;
        let excess = Matrix2::new(0.0, 0.0, 0.0, excess_phase_var);
        let amp = 2.0 * (0.5 * alpha_sq).sqrt();
        let lock = SymplecticTransform::phase_rotation(FRAC_PI_2)?.on_modes(vec![1])?;
        let g = GaussianState::vacuum(2)
            .apply(&shear.clone().on_modes(vec![0])?)?
            .apply(&shear.on_modes(vec![1])?)?
            .add_noise(0, excess)?
            .add_noise(1, excess)?
            .displace(0, [amp, 0.0])?
            .displace(1, [amp, 0.0])?
            // y is prepared in its own frame, then locked π/2 ahead of x
            .apply(&lock)?;
        Self::new(g)
    }

    pub fn gauss(&self) -> &GaussianState {
        &self.gauss
    }

    pub fn into_gauss(self) -> GaussianState {
        self.gauss
    }

    fn amplitudes(&self) -> [(f64, f64); 2] {
        // mode indices are fixed at construction
        [
            self.gauss.mode_amplitude(0).expect("mode 0"),
            self.gauss.mode_amplitude(1).expect("mode 1"),
        ]
    }

    pub fn alpha_x(&self) -> f64 {
        let (re, im) = self.amplitudes()[0];
        re.hypot(im)
    }

    pub fn alpha_y(&self) -> f64 {
        let (re, im) = self.amplitudes()[1];
        re.hypot(im)
    }

    /// Phase of the y amplitude relative to x.
    pub fn rel_phase(&self) -> f64 {
        let [(xr, xi), (yr, yi)] = self.amplitudes();
        yi.atan2(yr) - xi.atan2(xr)
    }

    /// Classical Stokes means of the mean field.
    pub fn stokes_means(&self) -> StokesMean {
        let [(xr, xi), (yr, yi)] = self.amplitudes();
        let nx = xr * xr + xi * xi;
        let ny = yr * yr + yi * yi;
        // x̄·y
        let cross_re = xr * yr + xi * yi;
        let cross_im = xr * yi - xi * yr;
        StokesMean {
            s0: nx + ny,
            s1: nx - ny,
            s2: 2.0 * cross_re,
            s3: 2.0 * cross_im,
        }
    }

    /// Linear response of `S_k` (k = 0..3) to the quadratures `(X_x, Y_x, X_y, Y_y)`.
    fn gradient(&self, k: usize) -> Vector4<f64> {
        let [(xr, xi), (yr, yi)] = self.amplitudes();
        // row vector u = ā†σ_k as (re, im) pairs for the x and y components
        let (ux, uy) = match k {
            0 => ((xr, -xi), (yr, -yi)),
            1 => ((xr, -xi), (-yr, yi)),
            2 => ((yr, -yi), (xr, -xi)),
            3 => ((yi, yr), (-xi, -xr)),
            _ => unreachable!("Stokes index {k}"),
        };
        Vector4::new(ux.0, -ux.1, uy.0, -uy.1)
    }

    fn cov4(&self) -> nalgebra::Matrix4<f64> {
        self.gauss.cov().fixed_view::<4, 4>(0, 0).into_owned()
    }

    fn check_linearizable(&self) -> Result<()> {
        let s0 = self.stokes_means().s0;
        if !(s0 > 0.0) {
            return Err(Error::Linearization(
                "zero mean amplitude; fluctuations cannot be linearized".into(),
            ));
        }
        Ok(())
    }

    /// Linearized variance of Stokes parameter `S_k`, k ∈ 0..=3.
    pub fn stokes_variance(&self, k: usize) -> Result<f64> {
        if k > 3 {
            return Err(Error::Parameter(format!("no Stokes parameter S{k}")));
        }
        self.check_linearizable()?;
        let g = self.gradient(k);
        Ok((g.transpose() * self.cov4() * g)[(0, 0)])
    }

    /// Covariance matrix of `(δS₁, δS₂)`; its quadratic form in
    /// `(cos θ, sin θ)` is `Var(S_θ)`.
    pub fn s1s2_covariance(&self) -> Result<Matrix2<f64>> {
        self.check_linearizable()?;
        let c = self.cov4();
        let g1 = self.gradient(1);
        let g2 = self.gradient(2);
        let v11 = (g1.transpose() * c * g1)[(0, 0)];
        let v12 = (g1.transpose() * c * g2)[(0, 0)];
        let v22 = (g2.transpose() * c * g2)[(0, 0)];
        Ok(Matrix2::new(v11, v12, v12, v22))
    }

    /// `Var(S_θ)` with `S_θ = cos θ·S₁ + sin θ·S₂`, in photon-number units.
    pub fn stokes_theta_variance(&self, theta: f64) -> Result<f64> {
        let m = self.s1s2_covariance()?;
        let (s, c) = theta.sin_cos();
        Ok(c * c * m[(0, 0)] + 2.0 * s * c * m[(0, 1)] + s * s * m[(1, 1)])
    }

    /// Principal axes of the Stokes noise in the S₁–S₂ plane.
    pub fn stokes_plane_ellipse(&self) -> Result<NoiseEllipse> {
        Ok(NoiseEllipse::from_block(&self.s1s2_covariance()?))
    }

    /// `Var(S₁)·Var(S₂) ≥ ⟨S₃⟩²`.
    pub fn heisenberg_check(&self) -> Result<HeisenbergCheck> {
        let m = self.s1s2_covariance()?;
        let product = m[(0, 0)] * m[(1, 1)];
        let bound = self.stokes_means().s3.powi(2);
        Ok(HeisenbergCheck {
            product,
            bound,
            satisfied: product >= bound * (1.0 - HEISENBERG_REL_TOL),
        })
    }

    /// `Var(S_θ)/|⟨S₃⟩|`, the Stokes noise in shot-noise units.
    pub fn normalized_variance(&self, theta: f64) -> Result<f64> {
        let s3 = self.stokes_means().s3.abs();
        if s3 == 0.0 {
            return Err(Error::UndefinedBound("⟨S₃⟩ = 0".into()));
        }
        Ok(self.stokes_theta_variance(theta)? / s3)
    }

    /// `10·log₁₀(Var(S_θ)/|⟨S₃⟩|)`; negative means polarization squeezing.
    pub fn polarization_squeezing_db(&self, theta: f64) -> Result<f64> {
        Ok(10.0 * self.normalized_variance(theta)?.log10())
    }
}
