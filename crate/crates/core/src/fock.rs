//! Exact two-mode Fock-space reference for the Stokes operators and Kerr
//! evolution, used to check the linearized Gaussian model at small photon
//! numbers.
//!
//! Basis states `|n_x, n_y⟩` with `n_x, n_y ≤ n_max` are stored densely,
//! index `n_x·(n_max+1) + n_y`. Operators are applied matrix-free.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stokes::PolarizationState;

/// Largest supported truncation.
pub const MAX_N_MAX: usize = 40;
/// Allowed population in the two highest Fock levels of either mode.
pub const TAIL_TOL: f64 = 1e-6;
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

/// Which Stokes operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stokes {
    S0,
    S1,
    S2,
    S3,
}

impl Stokes {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Stokes::S0),
            1 => Ok(Stokes::S1),
            2 => Ok(Stokes::S2),
            3 => Ok(Stokes::S3),
            _ => Err(Error::Parameter(format!("no Stokes parameter S{i}"))),
        }
    }
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 || n_max > MAX_N_MAX {
        return Err(Error::Truncation(format!(
            "n_max = {n_max} outside supported range 1..={MAX_N_MAX}"
        )));
    }
    Ok(())
}

fn coherent_coefficients(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0));
    for n in 1..=n_max {
        let prev = c[n - 1];
        c.push(prev * alpha / (n as f64).sqrt());
    }
    c
}

impl FockState {
    /// Product coherent state `|α_x⟩⊗|α_y⟩`, renormalized after truncation.
    /// Requires `|α|² ≤ n_max/4` in each mode.
    pub fn coherent(alpha_x: Complex64, alpha_y: Complex64, n_max: usize) -> Result<Self> {
        check_n_max(n_max)?;
        let limit = n_max as f64 / 4.0;
        for (name, a) in [("x", alpha_x), ("y", alpha_y)] {
            if !(a.norm_sqr() <= limit) {
                return Err(Error::Truncation(format!(
                    "|α_{name}|² = {} exceeds n_max/4 = {limit}",
                    a.norm_sqr()
                )));
            }
        }
        let cx = coherent_coefficients(alpha_x, n_max);
        let cy = coherent_coefficients(alpha_y, n_max);
        let amplitudes = cx
            .iter()
            .flat_map(|&a| cy.iter().map(move |&b| a * b))
            .collect();
        let mut state = FockState { n_max, amplitudes };
        state.normalize();
        let tail = state.truncation_tail();
        if tail >= TAIL_TOL {
            return Err(Error::Truncation(format!(
                "population {tail:e} above n_max − 2 exceeds {TAIL_TOL:e}"
            )));
        }
        Ok(state)
    }

    /// `|n_x, n_y⟩`.
    pub fn number_state(n_x: usize, n_y: usize, n_max: usize) -> Result<Self> {
        check_n_max(n_max)?;
        if n_x > n_max || n_y > n_max {
            return Err(Error::Truncation(format!(
                "|{n_x},{n_y}⟩ outside n_max = {n_max}"
            )));
        }
        let dim = (n_max + 1) * (n_max + 1);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[n_x * (n_max + 1) + n_y] = Complex64::new(1.0, 0.0);
        Ok(FockState { n_max, amplitudes })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_x: usize, n_y: usize) -> Complex64 {
        self.amplitudes[n_x * (self.n_max + 1) + n_y]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn normalize(&mut self) {
        let n = self.norm();
        for a in &mut self.amplitudes {
            *a /= n;
        }
    }

    fn levels(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let side = self.n_max + 1;
        (0..side * side).map(move |i| (i, i / side, i % side))
    }

    /// Largest single-mode population in levels `n > n_max − 2`.
    pub fn truncation_tail(&self) -> f64 {
        let edge = self.n_max.saturating_sub(2);
        let (mut tx, mut ty) = (0.0, 0.0);
        for (i, nx, ny) in self.levels() {
            let p = self.amplitudes[i].norm_sqr();
            if nx > edge {
                tx += p;
            }
            if ny > edge {
                ty += p;
            }
        }
        f64::max(tx, ty)
    }

    /// `⟨n̂⟩` of one mode.
    pub fn mean_photon_number(&self, mode: Mode) -> f64 {
        self.levels()
            .map(|(i, nx, ny)| {
                let n = if mode == Mode::X { nx } else { ny };
                n as f64 * self.amplitudes[i].norm_sqr()
            })
            .sum()
    }

    /// Number-diagonal Kerr evolution `exp(i·φ·n̂²)` on one mode.
    pub fn kerr_evolve(&self, phi_nl: f64, mode: Mode) -> FockState {
        let mut out = self.clone();
        for (i, nx, ny) in self.levels() {
            let n = if mode == Mode::X { nx } else { ny } as f64;
            out.amplitudes[i] *= Complex64::from_polar(1.0, phi_nl * n * n);
        }
        out
    }

    /// `Ŝ·ψ` in the truncated basis; ladder moves leaving the basis are dropped.
    pub fn apply_stokes(&self, which: Stokes) -> Vec<Complex64> {
        apply_stokes(self.n_max, &self.amplitudes, which)
    }

    /// `⟨ψ|Ŝ|ψ⟩`.
    pub fn stokes_expectation(&self, which: Stokes) -> f64 {
        inner(&self.amplitudes, &self.apply_stokes(which)).re
    }

    /// Exact `⟨Ŝ_θ²⟩ − ⟨Ŝ_θ⟩²` with `Ŝ_θ = cos θ·Ŝ₁ + sin θ·Ŝ₂`.
    pub fn stokes_variance_exact(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let s1 = self.apply_stokes(Stokes::S1);
        let s2 = self.apply_stokes(Stokes::S2);
        let st: Vec<Complex64> = s1.iter().zip(&s2).map(|(a, b)| a * c + b * s).collect();
        let second = st.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let first = inner(&self.amplitudes, &st).re;
        second - first * first
    }

    /// Variance of an arbitrary Stokes operator.
    pub fn stokes_variance(&self, which: Stokes) -> f64 {
        let v = self.apply_stokes(which);
        let second = v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let first = inner(&self.amplitudes, &v).re;
        second - first * first
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn apply_stokes(n_max: usize, psi: &[Complex64], which: Stokes) -> Vec<Complex64> {
    let side = n_max + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; psi.len()];
    for (i, &amp) in psi.iter().enumerate() {
        if amp == zero {
            continue;
        }
        let (nx, ny) = (i / side, i % side);
        match which {
            Stokes::S0 => out[i] += amp * (nx + ny) as f64,
            Stokes::S1 => out[i] += amp * (nx as f64 - ny as f64),
            Stokes::S2 | Stokes::S3 => {
                // a_x† a_y |nx, ny⟩ = √((nx+1)·ny) |nx+1, ny−1⟩
                let up = if ny > 0 && nx < n_max {
                    Some((
                        (nx + 1) * side + ny - 1,
                        ((nx + 1) as f64 * ny as f64).sqrt(),
                    ))
                } else {
                    None
                };
                // a_y† a_x |nx, ny⟩ = √(nx·(ny+1)) |nx−1, ny+1⟩
                let down = if nx > 0 && ny < n_max {
                    Some((
                        (nx - 1) * side + ny + 1,
                        (nx as f64 * (ny + 1) as f64).sqrt(),
                    ))
                } else {
                    None
                };
                // S₂ = a_x†a_y + a_y†a_x,  S₃ = i(a_y†a_x − a_x†a_y)
                let (w_up, w_down) = match which {
                    Stokes::S2 => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
                    _ => (Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)),
                };
                if let Some((j, f)) = up {
                    out[j] += amp * w_up * f;
                }
                if let Some((j, f)) = down {
                    out[j] += amp * w_down * f;
                }
            }
        }
    }
    out
}

/// Result of the Stokes commutator check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    /// Max entry of `[Ŝ_i, Ŝ_j] − 2iε_{ijk}Ŝ_k` on states with total photon
    /// number ≤ n_max − 2.
    pub safe_deviation: f64,
    /// Same, over the whole truncated space.
    pub full_deviation: f64,
    /// Max entry of `[Ŝ₀, Ŝ_i]`, i = 1..3, over the whole truncated space.
    pub s0_deviation: f64,
}

/// Checks `[Ŝ_i, Ŝ_j] = 2iε_{ijk}Ŝ_k` and `[Ŝ₀, Ŝ_i] = 0` column by column.
pub fn commutator_check(n_max: usize) -> Result<CommutatorReport> {
    if n_max < 3 {
        return Err(Error::Parameter(format!(
            "commutator check needs n_max ≥ 3, got {n_max}"
        )));
    }
    check_n_max(n_max)?;
    let side = n_max + 1;
    let dim = side * side;
    let two_i = Complex64::new(0.0, 2.0);
    let cyclic = [
        (Stokes::S1, Stokes::S2, Stokes::S3),
        (Stokes::S2, Stokes::S3, Stokes::S1),
        (Stokes::S3, Stokes::S1, Stokes::S2),
    ];
    let mut report = CommutatorReport {
        safe_deviation: 0.0,
        full_deviation: 0.0,
        s0_deviation: 0.0,
    };
    let mut basis = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        basis.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        basis[j] = Complex64::new(1.0, 0.0);
        let safe = j / side + j % side + 2 <= n_max;
        for &(a, b, c) in &cyclic {
            let ab = apply_stokes(n_max, &apply_stokes(n_max, &basis, b), a);
            let ba = apply_stokes(n_max, &apply_stokes(n_max, &basis, a), b);
            let sc = apply_stokes(n_max, &basis, c);
            let dev = ab
                .iter()
                .zip(&ba)
                .zip(&sc)
                .map(|((x, y), z)| (x - y - two_i * z).norm())
                .fold(0.0, f64::max);
            report.full_deviation = report.full_deviation.max(dev);
            if safe {
                report.safe_deviation = report.safe_deviation.max(dev);
            }
        }
        for s in [Stokes::S1, Stokes::S2, Stokes::S3] {
            let ab = apply_stokes(n_max, &apply_stokes(n_max, &basis, s), Stokes::S0);
            let ba = apply_stokes(n_max, &apply_stokes(n_max, &basis, Stokes::S0), s);
            let dev = ab
                .iter()
                .zip(&ba)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            report.s0_deviation = report.s0_deviation.max(dev);
        }
    }
    Ok(report)
}

/// One θ sample of the exact-vs-linearized comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub theta: f64,
    pub exact: f64,
    pub linearized: f64,
}

impl OraclePoint {
    pub fn rel_deviation(&self) -> f64 {
        (self.exact - self.linearized).abs() / self.linearized
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub alpha_sq: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub points: Vec<OraclePoint>,
}

impl OracleComparison {
    pub fn max_rel_deviation(&self) -> f64 {
        self.points
            .iter()
            .map(OraclePoint::rel_deviation)
            .fold(0.0, f64::max)
    }
}

/// Circular coherent state with `⟨S₃⟩ = alpha_sq` (y leads x by π/2),
/// both modes Kerr-evolved with `φ = gamma/alpha_sq` so that the
/// linearized shear parameter is `gamma`.
pub fn kerr_circular_fock(alpha_sq: f64, gamma: f64, n_max: usize) -> Result<FockState> {
    if !(alpha_sq > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!(
            "need α² > 0 and finite γ (got α² = {alpha_sq}, γ = {gamma})"
        )));
    }
    let a = (0.5 * alpha_sq).sqrt();
    let phi = gamma / alpha_sq;
    Ok(
        FockState::coherent(Complex64::new(a, 0.0), Complex64::new(0.0, a), n_max)?
            .kerr_evolve(phi, Mode::X)
            .kerr_evolve(phi, Mode::Y),
    )
}

/// Linearized counterpart of [`kerr_circular_fock`].
pub fn kerr_circular_gaussian(alpha_sq: f64, gamma: f64) -> Result<PolarizationState> {
    PolarizationState::sheared_circular(alpha_sq, gamma, 0.0)
}

/// Compares exact and linearized `Var(S_θ)` on `θ_k = kπ/n_theta`.
pub fn compare_with_linearized(
    alpha_sq: f64,
    gamma: f64,
    n_max: usize,
    n_theta: usize,
) -> Result<OracleComparison> {
    let exact_state = kerr_circular_fock(alpha_sq, gamma, n_max)?;
    let linear_state = kerr_circular_gaussian(alpha_sq, gamma)?;
    let points = (0..n_theta)
        .map(|k| {
            let theta = k as f64 * std::f64::consts::PI / n_theta as f64;
            Ok(OraclePoint {
                theta,
                exact: exact_state.stokes_variance_exact(theta),
                linearized: linear_state.stokes_theta_variance(theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleComparison {
        alpha_sq,
        gamma,
        n_max,
        points,
    })
}
