//! Incident Gaussian beam and the ideal-lens transformation.
//!
//! The lens is a thin phase plate that converts the collimated beam into a
//! converging spherical wavefront, tilting the local polarization so the
//! field stays transverse to the ray toward the focus and scaling the
//! amplitude by 1/√cosθ to conserve energy. All fields are expressed in the
//! circular basis (ε̂₊, ẑ, ε̂₋) with ε̂_± = (x̂ ± iŷ)/√2.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Focusing geometry: input waist, focal length, wavelength, and optionally
/// a hard aperture given as the half f-number v = ρ₀/f.
#[derive(Debug, Clone, Copy)]
pub struct FocusGeometry {
    w_l: f64,
    f: f64,
    lambda: f64,
    /// Aperture half f-number ρ₀/f; `None` means an unapertured lens.
    v: Option<f64>,
}

impl FocusGeometry {
    pub fn new(w_l: f64, f: f64, lambda: f64) -> Result<Self> {
        if !(w_l > 0.0) || !(f > 0.0) || !(lambda > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "lengths must be positive: w_l={w_l}, f={f}, lambda={lambda}"
            )));
        }
        Ok(FocusGeometry {
            w_l,
            f,
            lambda,
            v: None,
        })
    }

    pub fn with_aperture(mut self, v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "aperture half f-number must be positive, got {v}"
            )));
        }
        self.v = Some(v);
        Ok(self)
    }

    pub fn with_aperture_radius(self, rho0: f64) -> Result<Self> {
        let f = self.f;
        self.with_aperture(rho0 / f)
    }

    /// Input beam waist, m.
    pub fn waist(&self) -> f64 {
        self.w_l
    }

    /// Focal length, m.
    pub fn focal_length(&self) -> f64 {
        self.f
    }

    /// Wavelength, m.
    pub fn wavelength(&self) -> f64 {
        self.lambda
    }

    /// Focusing strength u = w_L / f.
    pub fn u(&self) -> f64 {
        self.w_l / self.f
    }

    /// Wavenumber k = 2π/λ, 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda
    }

    /// Aperture half f-number, if finite.
    pub fn aperture_v(&self) -> Option<f64> {
        self.v
    }

    /// Aperture radius ρ₀ = v·f, if finite.
    pub fn aperture_radius(&self) -> Option<f64> {
        self.v.map(|v| v * self.f)
    }

    /// Numerical aperture NA with NA² = v²/(1+v²); 1 for an open lens.
    pub fn numerical_aperture(&self) -> f64 {
        match self.v {
            Some(v) => (v * v / (1.0 + v * v)).sqrt(),
            None => 1.0,
        }
    }

    /// Paraxial focal waist w_f = λ/(π u).
    pub fn paraxial_focal_waist(&self) -> f64 {
        self.lambda / (std::f64::consts::PI * self.u())
    }

    /// Radius beyond which the Gaussian envelope is below 1e-12, clipped to
    /// the hard aperture when one is present.
    pub fn envelope_radius(&self) -> f64 {
        let env = 5.3 * self.w_l;
        match self.aperture_radius() {
            Some(r0) => env.min(r0),
            None => env,
        }
    }
}

/// Cylindrical coordinates with the origin at the focus.
#[derive(Debug, Clone, Copy)]
pub struct CylPoint {
    /// Radial distance from the axis, m; must be ≥ 0.
    pub rho: f64,
    /// Azimuth, rad.
    pub phi: f64,
    /// Axial position, m; the lens plane is z = -f.
    pub z: f64,
}

impl CylPoint {
    pub fn new(rho: f64, phi: f64, z: f64) -> Self {
        debug_assert!(rho >= 0.0, "rho must be non-negative");
        CylPoint { rho, phi, z }
    }
}

/// Field sample in the circular basis: amplitudes along ε̂₊, ẑ, ε̂₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedField {
    pub plus: Complex64,
    pub z: Complex64,
    pub minus: Complex64,
}

impl PolarizedField {
    pub const ZERO: PolarizedField = PolarizedField {
        plus: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
        minus: Complex64::new(0.0, 0.0),
    };

    pub fn new(plus: Complex64, z: Complex64, minus: Complex64) -> Self {
        PolarizedField { plus, z, minus }
    }

    /// |E₊|² + |E_z|² + |E₋|².
    pub fn intensity(&self) -> f64 {
        self.plus.norm_sqr() + self.z.norm_sqr() + self.minus.norm_sqr()
    }

    pub fn magnitude(&self) -> f64 {
        self.intensity().sqrt()
    }

    /// Cartesian components (E_x, E_y, E_z). The circular basis vectors are
    /// fixed linear combinations of x̂ and ŷ, so no position enters.
    pub fn to_cartesian(&self) -> [Complex64; 3] {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let ex = (self.plus + self.minus) * inv_sqrt2;
        let ey = Complex64::i() * (self.plus - self.minus) * inv_sqrt2;
        [ex, ey, self.z]
    }

    /// Hermitian inner product Σ aᵢ conj(bᵢ); the circular basis is
    /// orthonormal under it.
    pub fn dot_conj(&self, other: &PolarizedField) -> Complex64 {
        self.plus * other.plus.conj() + self.z * other.z.conj() + self.minus * other.minus.conj()
    }

    pub fn scale(&self, s: Complex64) -> PolarizedField {
        PolarizedField {
            plus: self.plus * s,
            z: self.z * s,
            minus: self.minus * s,
        }
    }

    pub fn sub(&self, other: &PolarizedField) -> PolarizedField {
        PolarizedField {
            plus: self.plus - other.plus,
            z: self.z - other.z,
            minus: self.minus - other.minus,
        }
    }
}

/// Phase model of the lens plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensModel {
    /// Spherical wavefront e^{-ik√(ρ²+f²)} with the polarization tilt and
    /// the 1/√cosθ amplitude factor. The physical model.
    Spherical,
    /// Parabolic phase e^{-ikρ²/2f} applied to the incident field as-is; the
    /// paraxial reference model, kept to reproduce its spherical aberration.
    Parabolic,
}

/// The collimated incident beam at the lens plane: purely ε̂₊ polarized with
/// a Gaussian envelope and flat phase.
pub fn input_beam(geom: &FocusGeometry, point: &CylPoint) -> PolarizedField {
    let env = (-point.rho * point.rho / (geom.w_l * geom.w_l)).exp();
    PolarizedField::new(Complex64::new(env, 0.0), Complex64::ZERO, Complex64::ZERO)
}

/// The focusing field directly behind the lens (plane z = -f), dimensionless
/// (units of the incident amplitude). Zero outside a finite aperture.
pub fn lens_transform(geom: &FocusGeometry, point: &CylPoint) -> PolarizedField {
    lens_field(geom, LensModel::Spherical, point)
}

/// Lens-plane field for a chosen lens model.
pub fn lens_field(geom: &FocusGeometry, model: LensModel, point: &CylPoint) -> PolarizedField {
    let rho = point.rho;
    if let Some(r0) = geom.aperture_radius() {
        if rho > r0 {
            return PolarizedField::ZERO;
        }
    }
    let k = geom.wavenumber();
    let env = (-rho * rho / (geom.w_l * geom.w_l)).exp();
    match model {
        LensModel::Spherical => {
            let r = rho.hypot(geom.f);
            let cos_t = geom.f / r;
            let sin_t = rho / r;
            let amp = env / cos_t.sqrt();
            let phase = Complex64::from_polar(amp, -k * r);
            let e_iphi = Complex64::from_polar(1.0, point.phi);
            PolarizedField::new(
                phase * (0.5 * (1.0 + cos_t)),
                phase * e_iphi * (sin_t * std::f64::consts::FRAC_1_SQRT_2),
                phase * e_iphi * e_iphi * (0.5 * (cos_t - 1.0)),
            )
        }
        LensModel::Parabolic => {
            let phase = Complex64::from_polar(env, -0.5 * k * rho * rho / geom.f);
            PolarizedField::new(phase, Complex64::ZERO, Complex64::ZERO)
        }
    }
}

/// The confocal-pair field close to the lenses at z = ±f, scaled by the
/// incident amplitude `e_l` (V/m). The overall phase is chosen so the field
/// at the focus is real: relative to the lens-plane field of
/// [`lens_transform`] the z = -f expression carries an extra factor e^{iπ/2}.
///
/// On the collection side (z = +f) the beam has passed through the focus:
/// the polar angle from the -z axis exceeds π/2 there, which flips the sign
/// of the ẑ weight while the beam stays ε̂₊ on axis.
pub fn collection_plane_field(
    geom: &FocusGeometry,
    point: &CylPoint,
    e_l: f64,
    after_focus: bool,
) -> PolarizedField {
    let rho = point.rho;
    if let Some(r0) = geom.aperture_radius() {
        if rho > r0 {
            return PolarizedField::ZERO;
        }
    }
    let k = geom.wavenumber();
    let r = rho.hypot(geom.f);
    let cos_t = geom.f / r;
    let sin_t = rho / r;
    let amp = e_l * (-rho * rho / (geom.w_l * geom.w_l)).exp() / cos_t.sqrt();
    let phase_arg = k * r - std::f64::consts::FRAC_PI_2;
    let (z_sign, phase) = if after_focus {
        (-1.0, Complex64::from_polar(amp, phase_arg))
    } else {
        (1.0, Complex64::from_polar(amp, -phase_arg))
    };
    let e_iphi = Complex64::from_polar(1.0, point.phi);
    PolarizedField::new(
        phase * (0.5 * (1.0 + cos_t)),
        phase * e_iphi * (z_sign * sin_t * std::f64::consts::FRAC_1_SQRT_2),
        phase * e_iphi * e_iphi * (0.5 * (cos_t - 1.0)),
    )
}

/// Lens-plane field for an ε̂₋-polarized input, obtained from the ε̂₊ case by
/// the mirror symmetry y → -y: helicities swap and the azimuthal winding
/// reverses (m = 1 → m = -1).
pub fn lens_transform_mirrored(geom: &FocusGeometry, point: &CylPoint) -> PolarizedField {
    let mirrored = CylPoint::new(point.rho, -point.phi, point.z);
    let f = lens_transform(geom, &mirrored);
    PolarizedField::new(f.minus, f.z, f.plus)
}
