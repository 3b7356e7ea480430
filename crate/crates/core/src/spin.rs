//! Spin-1/2 state, physical constants and the phase-damping channel.
//!
//! The basis is ordered (|up>, |down>). |up> is the lower-energy state at
//! positive field and the state every burst starts from, so the quantity
//! reported everywhere is the spin-down population `rho[1][1]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used for density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J s.
    pub h: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
}

/// CODATA 2018 values.
pub const CODATA: PhysicalConstants = PhysicalConstants {
    h: 6.626_070_15e-34,
    hbar: 6.626_070_15e-34 / (2.0 * PI),
    mu_b: 9.274_010_078_3e-24,
};

/// Electron Zeeman splitting per tesla, `|g| mu_B / h`, in Hz/T.
pub fn larmor_per_tesla(g: f64) -> f64 {
    g.abs() * CODATA.mu_b / CODATA.h
}

/// Electron Larmor frequency (Hz, linear) at field `b` (T).
///
/// Only the magnitude of `g` enters: the sign of the g-factor in GaAs is
/// negative but every resonance condition is stated in terms of |g|.
pub fn field_to_larmor(b: f64, g: f64) -> f64 {
    larmor_per_tesla(g) * b
}

/// Inverse of [`field_to_larmor`].
pub fn larmor_to_field(f: f64, g: f64) -> f64 {
    f / larmor_per_tesla(g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectronParams {
    pub g_factor: f64,
    /// Phase coherence time in seconds; `f64::INFINITY` disables dephasing.
    pub t2: f64,
}

impl ElectronParams {
    pub fn new(g_factor: f64, t2: f64) -> Result<Self> {
        if !g_factor.is_finite() || g_factor == 0.0 {
            return Err(Error::param("g_factor", "must be finite and non-zero"));
        }
        if t2.is_nan() || t2 <= 0.0 {
            return Err(Error::param("t2", "must be positive"));
        }
        Ok(Self { g_factor, t2 })
    }
}

impl Default for ElectronParams {
    fn default() -> Self {
        Self {
            g_factor: -0.339,
            t2: 100e-6,
        }
    }
}

/// 2x2 density matrix in the (|up>, |down>) basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    /// Builds a density matrix and checks Hermiticity, unit trace and
    /// positivity.
    pub fn new(elements: [[Complex64; 2]; 2]) -> Result<Self> {
        let rho = Self { elements };
        rho.validate()?;
        Ok(rho)
    }

    pub fn spin_up() -> Self {
        Self::from_populations(1.0, Complex64::new(0.0, 0.0))
    }

    pub fn spin_down() -> Self {
        Self::from_populations(0.0, Complex64::new(0.0, 0.0))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_populations(0.5, Complex64::new(0.0, 0.0))
    }

    /// State with Bloch vector `(x, y, z)`; fails if the vector lies outside
    /// the unit ball.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let rho = Self::from_bloch_unchecked([x, y, z]);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_bloch_unchecked(r: [f64; 3]) -> Self {
        Self::from_populations(0.5 * (1.0 + r[2]), Complex64::new(0.5 * r[0], -0.5 * r[1]))
    }

    /// Assembles a Hermitian unit-trace matrix from the up population and the
    /// coherence `rho[0][1]`.
    pub(crate) fn from_populations(p_up: f64, coherence: Complex64) -> Self {
        let p = Complex64::new(p_up, 0.0);
        let q = Complex64::new(1.0 - p_up, 0.0);
        Self {
            elements: [[p, coherence], [coherence.conj(), q]],
        }
    }

    pub fn elements(&self) -> &[[Complex64; 2]; 2] {
        &self.elements
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.elements[row][col]
    }

    pub fn p_up(&self) -> f64 {
        self.elements[0][0].re
    }

    pub fn p_down(&self) -> f64 {
        self.elements[1][1].re
    }

    pub fn coherence(&self) -> Complex64 {
        self.elements[0][1]
    }

    pub fn trace(&self) -> Complex64 {
        self.elements[0][0] + self.elements[1][1]
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> f64 {
        let e = &self.elements;
        (e[0][0] * e[0][0] + e[1][1] * e[1][1] + 2.0 * e[0][1] * e[1][0]).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = &self.elements;
        let mean = 0.5 * (e[0][0].re + e[1][1].re);
        let half_gap = (0.25 * (e[0][0].re - e[1][1].re).powi(2) + e[0][1].norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.elements;
        if e.iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite element".into()));
        }
        if (e[1][0] - e[0][1].conj()).norm() > STATE_TOL
            || e[0][0].im.abs() > STATE_TOL
            || e[1][1].im.abs() > STATE_TOL
        {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        if self.eigenvalues()[0] < -STATE_TOL {
            return Err(Error::InvalidState("negative eigenvalue".into()));
        }
        Ok(())
    }
}

/// Bloch vector `(x, y, z)` with `x = 2 Re rho01`, `y = 2 Im rho10`,
/// `z = rho00 - rho11`.
pub fn bloch_vector(rho: &DensityMatrix) -> [f64; 3] {
    let e = rho.elements();
    [2.0 * e[0][1].re, 2.0 * e[1][0].im, e[0][0].re - e[1][1].re]
}

/// Exact phase-damping channel over an interval `dt`: off-diagonal elements
/// decay by `exp(-dt / t2)`, populations are untouched.
pub fn apply_phase_damping(rho: &DensityMatrix, dt: f64, t2: f64) -> Result<DensityMatrix> {
    if t2.is_nan() || t2 <= 0.0 {
        return Err(Error::param("t2", "must be positive"));
    }
    if dt.is_nan() || dt < 0.0 {
        return Err(Error::param("dt", "must be non-negative"));
    }
    let decay = (-dt / t2).exp();
    Ok(DensityMatrix::from_populations(
        rho.p_up(),
        rho.coherence() * decay,
    ))
}
