//! Transmission observables: the dipole scattered far field, the energy
//! flux budget through the transverse planes at z = ±f, extinction and
//! reflectivity for full-plane, finite-aperture and fiber-mode collection,
//! and the thermal-motion reduction of the scattering ratio.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constants::{BOLTZMANN, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::lens::{collection_plane_field, CylPoint, FocusGeometry, PolarizedField};
use crate::numerics::{integrate_radial, QuadratureSpec};

/// Which transverse plane a flux budget refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    BeforeFocus,
    AfterFocus,
}

/// Energy-flux decomposition through a plane at z = ±f: the excitation
/// power, the one-sided scattered power, and the interference cross term.
#[derive(Debug, Clone, Copy)]
pub struct FluxBreakdown {
    pub plane: Plane,
    /// Contribution of |E_F|²; equals P_in.
    pub input_term: f64,
    /// Contribution of |E_sc|², signed as it enters the flux budget
    /// (negative before the focus where the scattered light runs backward).
    pub scattered_term: f64,
    /// Interference cross term; 0 before the focus, -P_sc after it.
    pub interference_term: f64,
}

impl FluxBreakdown {
    pub fn total(&self) -> f64 {
        self.input_term + self.scattered_term + self.interference_term
    }
}

/// How the transmitted light is collected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Collection {
    FullPlane,
    FiniteAperture { v: f64 },
    FiberMode,
}

/// Extinction and reflectivity for a collection geometry.
#[derive(Debug, Clone, Copy)]
pub struct ExtinctionResult {
    pub epsilon: f64,
    pub reflectivity: f64,
    pub collection: Collection,
}

/// Far field of the driven rotating dipole at distance r ≫ λ:
/// E_sc = (3 E_A e^{i(kr + π/2)} / 2kr) [ε̂₊ - (ε̂₊·r̂) r̂],
/// expressed in the circular basis at the cylindrical point.
pub fn dipole_far_field(
    geom: &FocusGeometry,
    e_a: f64,
    point: &CylPoint,
) -> Result<PolarizedField> {
    let r = point.rho.hypot(point.z);
    if r < 100.0 * geom.wavelength() {
        return Err(Error::Domain(format!(
            "dipole_far_field wants r >= 100 lambda; got r = {r:.3e} m"
        )));
    }
    Ok(dipole_far_field_unchecked(geom.wavenumber(), e_a, point))
}

fn dipole_far_field_unchecked(k: f64, e_a: f64, point: &CylPoint) -> PolarizedField {
    let r = point.rho.hypot(point.z);
    let sin_t = point.rho / r;
    let cos_t = point.z / r;
    let scale = Complex64::from_polar(1.5 * e_a / (k * r), k * r + std::f64::consts::FRAC_PI_2);
    let e_iphi = Complex64::from_polar(1.0, point.phi);
    // epsilon_plus . r_hat = sin(theta) e^{i phi} / sqrt(2)
    PolarizedField::new(
        scale * (1.0 - 0.5 * sin_t * sin_t),
        scale * e_iphi * (-sin_t * cos_t * std::f64::consts::FRAC_1_SQRT_2),
        scale * e_iphi * e_iphi * (-0.5 * sin_t * sin_t),
    )
}

#[cfg(test)]
use crate::scattering::scattered_power_weak_resonant as p_sc_weak;

/// Evaluate the three flux contributions through the plane z = ±f for an
/// unapertured confocal pair, by quadrature of the field products. `e_a`
/// and `e_l` are the focal and incident amplitudes in V/m.
pub fn flux_breakdown(
    geom: &FocusGeometry,
    e_a: f64,
    e_l: f64,
    plane: Plane,
) -> Result<FluxBreakdown> {
    let f = geom.focal_length();
    let k = geom.wavenumber();
    let after = plane == Plane::AfterFocus;
    let z_plane = if after { f } else { -f };
    let prefactor = std::f64::consts::PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT;

    // (i) excitation term, Gaussian envelope: truncate at the envelope tail
    let spec_env = QuadratureSpec::for_waist(geom.waist());
    let input_term = prefactor
        * integrate_radial(
            |rho| {
                let fld =
                    collection_plane_field(geom, &CylPoint::new(rho, 0.0, z_plane), e_l, after);
                let cos_t = f / rho.hypot(f);
                Complex64::new(rho * fld.intensity() * cos_t, 0.0)
            },
            &spec_env,
        )?
        .re;

    // (ii) scattered term: slow 1/r² falloff, integrate over the polar
    // angle out to the plane's rim instead of a radial cutoff
    let spec_angle = QuadratureSpec {
        relative_tolerance: 1e-9,
        absolute_tolerance: 1e-300,
        max_subdivisions: 20_000,
        truncation_radius: std::f64::consts::FRAC_PI_2,
        phase_per_panel: std::f64::consts::FRAC_PI_2,
    };
    let scattered_flux = prefactor
        * crate::numerics::quadrature::adaptive(
            &|theta: f64| {
                // rho = f tan(theta); rho drho = f^2 sin/cos^3 dtheta
                let rho = f * theta.tan();
                let jac = f * f * theta.sin() / theta.cos().powi(3);
                let p = CylPoint::new(rho, 0.0, z_plane);
                let fld = dipole_far_field_unchecked(k, e_a, &p);
                let cos_t = theta.cos();
                Complex64::new(jac * fld.intensity() * cos_t, 0.0)
            },
            0.0,
            std::f64::consts::FRAC_PI_2 - 1e-9,
            None,
            &spec_angle,
        )?
        .re;
    let scattered_term = if after {
        scattered_flux
    } else {
        -scattered_flux
    };

    // (iii) interference term. After the focus the two spherical phases
    // cancel pointwise (co-propagating); before it they add, so the cross
    // term oscillates as e^{2ikr} and the quadrature must resolve it. The
    // absolute gate is set by the after-focus result scale ~ P_sc/(π ε₀ c).
    let cross_scale = 3.0 * geom.wavelength().powi(2) * e_a.abs() * e_l.abs()
        / (4.0 * std::f64::consts::PI.powi(2));
    let spec_cross = QuadratureSpec {
        absolute_tolerance: 1e-9 * cross_scale.max(1e-300),
        ..spec_env
    };
    let cross_integrand = |rho: f64| {
        let p = CylPoint::new(rho, 0.0, z_plane);
        let e_f = collection_plane_field(geom, &p, e_l, after);
        let e_sc = dipole_far_field_unchecked(k, e_a, &p);
        let cos_t = f / rho.hypot(f);
        let x = e_sc.dot_conj(&e_f);
        let pm = if after { x + x.conj() } else { x - x.conj() };
        pm * (rho * cos_t)
    };
    let cross = if after {
        integrate_radial(cross_integrand, &spec_cross)?
    } else {
        let rate = move |rho: f64| 2.0 * k * rho / rho.hypot(f);
        crate::numerics::integrate_radial_oscillatory(cross_integrand, &rate, &spec_cross)?
    };
    let interference_term = prefactor * cross.re;

    Ok(FluxBreakdown {
        plane,
        input_term,
        scattered_term,
        interference_term,
    })
}

/// Total power radiated by the dipole, from a far-sphere flux integral.
/// Cross-checks the weak-resonant closed form.
pub fn dipole_radiated_power(geom: &FocusGeometry, e_a: f64) -> Result<f64> {
    let k = geom.wavenumber();
    let r = 1e4 * geom.wavelength();
    let spec = QuadratureSpec {
        relative_tolerance: 1e-10,
        absolute_tolerance: 1e-300,
        max_subdivisions: 10_000,
        truncation_radius: std::f64::consts::PI,
        phase_per_panel: std::f64::consts::FRAC_PI_2,
    };
    let integral = crate::numerics::quadrature::adaptive(
        &|theta: f64| {
            let p = CylPoint::new(r * theta.sin(), 0.0, r * theta.cos());
            let fld = dipole_far_field_unchecked(k, e_a, &p);
            Complex64::new(fld.intensity() * theta.sin(), 0.0)
        },
        0.0,
        std::f64::consts::PI,
        None,
        &spec,
    )?
    .re;
    Ok(std::f64::consts::PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * r * r * integral)
}

/// Extinction for an infinitely large collection lens: ε = R_sc / 2.
pub fn extinction_full_plane(r_sc: f64) -> ExtinctionResult {
    ExtinctionResult {
        epsilon: 0.5 * r_sc,
        reflectivity: 0.0,
        collection: Collection::FullPlane,
    }
}

/// Pickup factor α = (1 + 3v²/4)/(1 + v²)^{3/2} of a collection aperture
/// with half f-number v.
pub fn pickup_factor_v(v: f64) -> f64 {
    (1.0 + 0.75 * v * v) / (1.0 + v * v).powf(1.5)
}

/// The same pickup factor in terms of the numerical aperture,
/// α = (1 - NA²/4)√(1 - NA²).
pub fn pickup_factor_na(na: f64) -> f64 {
    let na2 = na * na;
    (1.0 - 0.25 * na2) * (1.0 - na2).sqrt()
}

/// Extinction and reflectivity seen with identical focusing and collection
/// lenses of finite radius ρ₀ = v·f:
/// ε = (1+α)/2 · R_sc^{ρ₀} / (1 - e^{-2ρ₀²/w²}),  R = (1-α)/2 · R_sc^{ρ₀}.
pub fn extinction_finite_aperture(geom: &FocusGeometry) -> Result<ExtinctionResult> {
    let v = geom.aperture_v().ok_or_else(|| {
        Error::InvalidGeometry("extinction_finite_aperture needs an aperture".into())
    })?;
    let r_sc = crate::scattering::scattering_ratio_finite(geom)?.r_sc;
    let alpha = pickup_factor_v(v);
    let rho0 = geom.aperture_radius().expect("aperture present");
    let w = geom.waist();
    let empty_trap = 1.0 - (-2.0 * rho0 * rho0 / (w * w)).exp();
    Ok(ExtinctionResult {
        epsilon: 0.5 * (1.0 + alpha) * r_sc / empty_trap,
        reflectivity: 0.5 * (1.0 - alpha) * r_sc,
        collection: Collection::FiniteAperture { v },
    })
}

/// Extinction and reflectivity for collection into the single-mode fiber
/// matched to the excitation mode: 1 - ε = |1 - R_sc/2|², R = R_sc²/4.
pub fn extinction_fiber(r_sc: f64) -> ExtinctionResult {
    let t_amp = 1.0 - 0.5 * r_sc;
    ExtinctionResult {
        epsilon: 1.0 - t_amp * t_amp,
        reflectivity: 0.25 * r_sc * r_sc,
        collection: Collection::FiberMode,
    }
}

/// Thermal position spread of the trapped atom.
#[derive(Debug, Clone, Copy)]
pub struct TrapThermalState {
    pub temperature: f64,
    pub nu_rho: f64,
    pub nu_z: f64,
    pub mass: f64,
}

impl TrapThermalState {
    pub fn new(temperature: f64, nu_rho: f64, nu_z: f64, mass: f64) -> Result<Self> {
        if temperature < 0.0 || !(nu_rho > 0.0) || !(nu_z > 0.0) || !(mass > 0.0) {
            return Err(Error::Domain("invalid trap parameters".into()));
        }
        Ok(TrapThermalState {
            temperature,
            nu_rho,
            nu_z,
            mass,
        })
    }

    fn sigma(&self, nu: f64) -> f64 {
        (BOLTZMANN * self.temperature / self.mass).sqrt() / (2.0 * std::f64::consts::PI * nu)
    }

    /// RMS radial position spread σ_ρ = √(k_B T / m (2πν_ρ)²), m.
    pub fn sigma_rho(&self) -> f64 {
        self.sigma(self.nu_rho)
    }

    /// RMS longitudinal position spread, m.
    pub fn sigma_z(&self) -> f64 {
        self.sigma(self.nu_z)
    }
}

/// Paraxial reduction of the scattering ratio by thermal motion:
/// R_sc' = R_sc (1 - 2σ_ρ²/w_f²)(1 - σ_z²λ²/π²w_f⁴), with w_f the paraxial
/// focal waist. Valid for σ_ρ < w_f/√2.
pub fn motional_correction(
    r_sc: f64,
    geom: &FocusGeometry,
    trap: &TrapThermalState,
) -> Result<f64> {
    let w_f = geom.paraxial_focal_waist();
    let s_r = trap.sigma_rho();
    if s_r >= w_f / std::f64::consts::SQRT_2 {
        return Err(Error::Domain(format!(
            "sigma_rho = {s_r:.3e} m outside the paraxial expansion (w_f/sqrt(2) = {:.3e} m)",
            w_f / std::f64::consts::SQRT_2
        )));
    }
    Ok(r_sc * motional_factor(geom, trap))
}

fn motional_factor(geom: &FocusGeometry, trap: &TrapThermalState) -> f64 {
    let w_f = geom.paraxial_focal_waist();
    let lam = geom.wavelength();
    let s_r2 = trap.sigma_rho().powi(2);
    let s_z2 = trap.sigma_z().powi(2);
    let transverse = 1.0 - 2.0 * s_r2 / (w_f * w_f);
    let longitudinal = 1.0 - s_z2 * lam * lam / (std::f64::consts::PI.powi(2) * w_f.powi(4));
    transverse * longitudinal
}

/// Monte Carlo validation of the closed-form motional factor: sample atom
/// positions from the anisotropic thermal Gaussian (radial RMS σ_ρ, axial
/// RMS σ_z) and average the quadratic paraxial intensity-reduction model
/// (1 - 2ρ²/w_f²)(1 - z²λ²/π²w_f⁴), whose expectation is the closed form.
pub fn motional_correction_monte_carlo(
    r_sc: f64,
    geom: &FocusGeometry,
    trap: &TrapThermalState,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_f = geom.paraxial_focal_waist();
    let lam = geom.wavelength();
    let s_axis = trap.sigma_rho() / std::f64::consts::SQRT_2;
    let s_z = trap.sigma_z();
    let zr2_inv = lam * lam / (std::f64::consts::PI.powi(2) * w_f.powi(4));
    let mut acc = 0.0;
    let gauss = move |rng: &mut ChaCha8Rng| -> f64 {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    };
    for _ in 0..samples {
        let x = s_axis * gauss(&mut rng);
        let y = s_axis * gauss(&mut rng);
        let z = s_z * gauss(&mut rng);
        let transverse = 1.0 - 2.0 * (x * x + y * y) / (w_f * w_f);
        let longitudinal = 1.0 - z * z * zr2_inv;
        acc += transverse * longitudinal;
    }
    r_sc * acc / samples as f64
}
