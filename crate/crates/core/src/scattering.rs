//! Two-level response: steady-state excited population, scattered power,
//! and the scattering ratio R_sc = P_sc/P_in as a function of the focusing
//! strength u, with its golden-section maximizer.

use crate::constants::{REDUCED_PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::focal::{focal_bracket, focal_field_finite};
use crate::lens::FocusGeometry;

/// Atomic transition parameters. The dipole moment is tied to the decay
/// rate by Γ = ω₁₂³ |d₁₂|² / (3π ε₀ ℏ c³).
#[derive(Debug, Clone, Copy)]
pub struct AtomParams {
    /// Excited-state decay rate Γ, rad/s.
    pub gamma: f64,
    /// Transition angular frequency ω₁₂, rad/s.
    pub omega_12: f64,
    /// Dipole matrix element |d₁₂|, C·m.
    pub dipole: f64,
}

impl AtomParams {
    /// Build from Γ and ω₁₂, deriving the dipole moment.
    pub fn from_decay_rate(gamma: f64, omega_12: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(omega_12 > 0.0) {
            return Err(Error::Domain(
                "decay rate and transition frequency must be positive".into(),
            ));
        }
        let dipole = (3.0
            * std::f64::consts::PI
            * VACUUM_PERMITTIVITY
            * REDUCED_PLANCK
            * SPEED_OF_LIGHT.powi(3)
            * gamma
            / omega_12.powi(3))
        .sqrt();
        Ok(AtomParams {
            gamma,
            omega_12,
            dipole,
        })
    }

    /// Residual of the Γ–dipole consistency relation, relative.
    pub fn consistency_residual(&self) -> f64 {
        let gamma_from_dipole = self.omega_12.powi(3) * self.dipole * self.dipole
            / (3.0
                * std::f64::consts::PI
                * VACUUM_PERMITTIVITY
                * REDUCED_PLANCK
                * SPEED_OF_LIGHT.powi(3));
        (gamma_from_dipole - self.gamma).abs() / self.gamma
    }
}

/// Drive parameters: Rabi frequency Ω = E_A |d₁₂| / ℏ and detuning
/// δ = ω - ω₁₂.
#[derive(Debug, Clone, Copy)]
pub struct DriveParams {
    pub rabi: f64,
    pub detuning: f64,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning: f64) -> Result<Self> {
        if rabi < 0.0 {
            return Err(Error::Domain("Rabi frequency must be non-negative".into()));
        }
        Ok(DriveParams { rabi, detuning })
    }

    pub fn from_field(e_a: f64, atom: &AtomParams, detuning: f64) -> Result<Self> {
        Self::new(e_a.abs() * atom.dipole / REDUCED_PLANCK, detuning)
    }
}

/// Scattering-ratio bundle.
#[derive(Debug, Clone, Copy)]
pub struct ScatterResult {
    /// R_sc = P_sc / P_in.
    pub r_sc: f64,
    /// Same quantity, kept under the name the energy budget uses.
    pub p_sc_over_p_in: f64,
    /// (E_A/E_L)², the focal intensity enhancement.
    pub focal_ratio: f64,
}

/// Steady-state excited population ρ₂₂ = (Ω²/4)/(δ² + Ω²/2 + Γ²/4).
pub fn excited_population(atom: &AtomParams, drive: &DriveParams) -> f64 {
    let o2 = drive.rabi * drive.rabi;
    0.25 * o2 / (drive.detuning * drive.detuning + 0.5 * o2 + 0.25 * atom.gamma * atom.gamma)
}

/// Scattered power P_sc = ρ₂₂ Γ ℏ ω₁₂, W.
pub fn scattered_power(atom: &AtomParams, drive: &DriveParams) -> f64 {
    excited_population(atom, drive) * atom.gamma * REDUCED_PLANCK * atom.omega_12
}

/// Weak resonant limit of the scattered power, P_sc = 3 ε₀ c λ² E_A² / 4π.
pub fn scattered_power_weak_resonant(e_a: f64, lambda: f64) -> f64 {
    3.0 * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * lambda * lambda * e_a * e_a
        / (4.0 * std::f64::consts::PI)
}

/// Scattering ratio of the unapertured lens,
/// R_sc = (3/4u³) e^{2/u²} [Γ(-1/4, 1/u²) + u Γ(1/4, 1/u²)]²,
/// evaluated in scaled-gamma form. Exact for a weak resonant probe.
pub fn scattering_ratio(geom: &FocusGeometry) -> Result<ScatterResult> {
    let u = geom.u();
    // focal_bracket already carries sqrt(1/u) factored out of the bracket:
    // bracket = sqrt(1/u) [Gamma(-1/4,..) + u Gamma(1/4,..)] e^{1/u^2}
    let b = focal_bracket(u)?;
    let r_sc = 0.75 / (u * u) * b * b;
    let focal_ratio = focal_intensity_ratio(geom, r_sc);
    Ok(ScatterResult {
        r_sc,
        p_sc_over_p_in: r_sc,
        focal_ratio,
    })
}

/// Scattering ratio with a hard lens aperture,
/// R_sc^{ρ₀} = (3λ²/π²w_L²) |E_A^{ρ₀}/E_L|².
pub fn scattering_ratio_finite(geom: &FocusGeometry) -> Result<ScatterResult> {
    let amp = focal_field_finite(geom)?.magnitude();
    let lam = geom.wavelength();
    let w = geom.waist();
    let r_sc = 3.0 * lam * lam / (std::f64::consts::PI.powi(2) * w * w) * amp * amp;
    Ok(ScatterResult {
        r_sc,
        p_sc_over_p_in: r_sc,
        focal_ratio: amp * amp,
    })
}

fn focal_intensity_ratio(geom: &FocusGeometry, r_sc: f64) -> f64 {
    let w = geom.waist();
    let lam = geom.wavelength();
    r_sc * std::f64::consts::PI.powi(2) * w * w / (3.0 * lam * lam)
}

/// Locate the maximizer of R_sc(u) on (u_lo, u_hi) by golden-section search
/// to |Δu| ≤ 1e-4. A maximum on the interval boundary is reported as an
/// error instead of being returned as an interior optimum.
pub fn find_optimal_focusing(u_lo: f64, u_hi: f64) -> Result<(f64, f64)> {
    if !(0.0 < u_lo && u_lo < u_hi) {
        return Err(Error::Domain(format!(
            "invalid search interval ({u_lo}, {u_hi})"
        )));
    }
    let r_of = |u: f64| -> Result<f64> {
        let g = FocusGeometry::new(u * 1e-2, 1e-2, 780e-9)?;
        Ok(scattering_ratio(&g)?.r_sc)
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (u_lo, u_hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = r_of(c)?;
    let mut fd = r_of(d)?;
    while (b - a).abs() > 1e-4 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = r_of(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = r_of(d)?;
        }
    }
    let u_star = 0.5 * (a + b);
    if u_star - u_lo < 5e-4 || u_hi - u_star < 5e-4 {
        return Err(Error::BoundaryMaximum { u: u_star });
    }
    Ok((u_star, r_of(u_star)?))
}
