//! Decomposition of the focusing field into source-free cylindrical Maxwell
//! modes and its reconstruction anywhere behind the lens.
//!
//! The modes are indexed by (k_t, m, s) with the angular momentum fixed to
//! m = 1 by the circularly polarized input; only forward-propagating,
//! non-evanescent modes (0 < k_t < k, k_z > 0) appear. Expansion
//! coefficients come from a radial projection of the lens-plane field
//! against J₀/J₁/J₂ kernels; the projection integral has no closed form and
//! is evaluated by adaptive quadrature per node.
//!
//! Nodes are Gauss–Legendre in the angle α = arcsin(k_t/k), which keeps the
//! coefficient function smooth up to the band edge. The coefficients carry
//! an e^{+i k_z f} anchor so that κ(α) is non-oscillatory (the lens-plane
//! stationary phase cancels identically), which is what makes a few hundred
//! nodes sufficient; reconstruction at points with large phase budgets
//! (e.g. back at the lens plane) integrates over k_t on an
//! oscillation-resolved panel grid with barycentric interpolation of κ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lens::{CylPoint, FocusGeometry, LensModel, PolarizedField};
use crate::numerics::quadrature::adaptive;
use crate::numerics::{bessel, gauss_legendre, QuadratureSpec};

/// Phase distance per seed panel used for the mode-projection and
/// reconstruction quadratures: just under half an oscillation period.
const MODE_PHASE_PER_PANEL: f64 = 0.9 * std::f64::consts::PI;

/// One transverse-wavenumber node of the discretized mode continuum.
#[derive(Debug, Clone, Copy)]
pub struct ModeNode {
    /// arcsin(k_t/k); Gauss–Legendre abscissa on (0, π/2).
    pub alpha: f64,
    /// Transverse wavenumber, 1/m; strictly inside (0, k).
    pub k_t: f64,
    /// Quadrature weight for ∫ dk_t (Jacobian included).
    pub weight: f64,
}

/// Discretized mode coefficients of a focused beam at fixed m = 1.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    geom: FocusGeometry,
    model: LensModel,
    k: f64,
    nodes: Vec<ModeNode>,
    kappa_plus: Vec<Complex64>,
    kappa_minus: Vec<Complex64>,
    /// Barycentric interpolation weights on the Gauss–Legendre α grid.
    bary: Vec<f64>,
    /// GL abscissae on (-1, 1) backing `nodes` (interpolation variable).
    x_gl: Vec<f64>,
}

/// Decompose the spherical-model lens field into modes.
pub fn decompose(geom: &FocusGeometry, grid_size: usize) -> Result<ModeSpectrum> {
    decompose_with(geom, LensModel::Spherical, grid_size)
}

/// Decompose the lens field of the chosen lens model into modes.
pub fn decompose_with(
    geom: &FocusGeometry,
    model: LensModel,
    grid_size: usize,
) -> Result<ModeSpectrum> {
    decompose_with_tolerance(geom, model, grid_size, 1e-9)
}

/// [`decompose_with`] with an explicit quadrature tolerance for the
/// projection integrals.
pub fn decompose_with_tolerance(
    geom: &FocusGeometry,
    model: LensModel,
    grid_size: usize,
    relative_tolerance: f64,
) -> Result<ModeSpectrum> {
    if grid_size < 64 {
        return Err(Error::Domain(format!(
            "grid_size must be at least 64, got {grid_size}"
        )));
    }
    let k = geom.wavenumber();
    let f = geom.focal_length();
    let w = geom.waist();
    let r_max = geom.envelope_radius();

    let (x_gl, w_gl) = gauss_legendre(grid_size);
    let quarter_pi = std::f64::consts::FRAC_PI_2 / 2.0;
    let nodes: Vec<ModeNode> = x_gl
        .iter()
        .zip(&w_gl)
        .map(|(&x, &wg)| {
            let alpha = quarter_pi * (x + 1.0);
            ModeNode {
                alpha,
                k_t: k * alpha.sin(),
                weight: quarter_pi * wg * k * alpha.cos(),
            }
        })
        .collect();

    let spec = QuadratureSpec::for_waist(w)
        .with_truncation(r_max)
        .with_phase_per_panel(MODE_PHASE_PER_PANEL);
    // coefficients of dark nodes are ~0; gate them on an absolute scale set
    // by the envelope integral instead of thrashing on relative tolerance
    let spec = QuadratureSpec {
        relative_tolerance,
        absolute_tolerance: 1e-12 * w * w,
        ..spec
    };
    spec.validate()?;

    let kappas: Vec<Result<(Complex64, Complex64)>> = nodes
        .par_iter()
        .map(|node| {
            projection_integrals(geom, model, node.k_t, &spec)
                .map(|ints| kappa_pair(k, f, node.k_t, ints))
                .map_err(|e| Error::ModeNode {
                    k_t: node.k_t,
                    source: Box::new(e),
                })
        })
        .collect();

    let mut kappa_plus = Vec::with_capacity(grid_size);
    let mut kappa_minus = Vec::with_capacity(grid_size);
    for r in kappas {
        let (p, m) = r?;
        kappa_plus.push(p);
        kappa_minus.push(m);
    }

    // barycentric weights for GL nodes: (-1)^j sqrt((1 - x_j^2) w_j)
    let bary: Vec<f64> = x_gl
        .iter()
        .zip(&w_gl)
        .enumerate()
        .map(|(j, (&x, &wg))| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((1.0 - x * x) * wg).sqrt()
        })
        .collect();

    Ok(ModeSpectrum {
        geom: *geom,
        model,
        k,
        nodes,
        kappa_plus,
        kappa_minus,
        bary,
        x_gl,
    })
}

/// The three s-independent radial projection integrals (J₀, J₁, J₂ kernels
/// against the lens-plane field) evaluated in one adaptive pass.
fn projection_integrals(
    geom: &FocusGeometry,
    model: LensModel,
    k_t: f64,
    spec: &QuadratureSpec,
) -> Result<[Complex64; 3]> {
    let k = geom.wavenumber();
    let f = geom.focal_length();
    let w2 = geom.waist() * geom.waist();

    match model {
        LensModel::Spherical => {
            let integrand = move |rho: f64| -> [Complex64; 3] {
                let r = rho.hypot(f);
                let cos_t = f / r;
                let sin_t = rho / r;
                let amp = rho * (-rho * rho / w2).exp() / cos_t.sqrt();
                let envelope = Complex64::from_polar(amp, -k * r);
                let (b0, b1, b2) = bessel_j012(k_t * rho);
                [
                    envelope * (0.5 * (1.0 + cos_t) * b0),
                    envelope * (sin_t * b1),
                    envelope * (0.5 * (cos_t - 1.0) * b2),
                ]
            };
            let rate = move |rho: f64| k_t + k * rho / rho.hypot(f);
            adaptive(&integrand, 0.0, spec.truncation_radius, Some(&rate), spec)
        }
        LensModel::Parabolic => {
            let integrand = move |rho: f64| -> [Complex64; 3] {
                let amp = rho * (-rho * rho / w2).exp();
                let envelope = Complex64::from_polar(amp, -0.5 * k * rho * rho / f);
                [
                    envelope * bessel::j0(k_t * rho),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ]
            };
            let rate = move |rho: f64| k_t + k * rho / f;
            adaptive(&integrand, 0.0, spec.truncation_radius, Some(&rate), spec)
        }
    }
}

/// Assemble κ(k_t, s) for s = ±1 from the projection integrals:
/// κ = π k_t e^{i k_z f} [ (sk + k_z)/k · I₀ + i k_t/k · I₁ + (sk - k_z)/k · I₂ ].
fn kappa_pair(k: f64, f: f64, k_t: f64, ints: [Complex64; 3]) -> (Complex64, Complex64) {
    let k_z = (k * k - k_t * k_t).max(0.0).sqrt();
    let anchor = Complex64::from_polar(std::f64::consts::PI * k_t, k_z * f);
    let i_term = Complex64::i() * (k_t / k) * ints[1];
    let plus = anchor * (((k + k_z) / k) * ints[0] + i_term + ((k - k_z) / k) * ints[2]);
    let minus = anchor * (((-k + k_z) / k) * ints[0] + i_term + ((-k - k_z) / k) * ints[2]);
    (plus, minus)
}

#[inline]
fn bessel_j012(x: f64) -> (f64, f64, f64) {
    let b0 = bessel::j0(x);
    let b1 = bessel::j1(x);
    let b2 = if x < 2.0 {
        bessel::j2(x)
    } else {
        2.0 * b1 / x - b0
    };
    (b0, b1, b2)
}

/// Quadrature grid in α for the reconstruction integral, with κ
/// pre-interpolated at every point. Shared across field points of a batch.
struct AlphaGrid {
    alpha_sin: Vec<f64>,
    alpha_cos: Vec<f64>,
    /// weight for ∫ dk_t, Jacobian included
    w_kt: Vec<f64>,
    kappa_plus: Vec<Complex64>,
    kappa_minus: Vec<Complex64>,
}

impl ModeSpectrum {
    pub fn geometry(&self) -> &FocusGeometry {
        &self.geom
    }

    pub fn lens_model(&self) -> LensModel {
        self.model
    }

    pub fn nodes(&self) -> &[ModeNode] {
        &self.nodes
    }

    pub fn kappa_plus(&self) -> &[Complex64] {
        &self.kappa_plus
    }

    pub fn kappa_minus(&self) -> &[Complex64] {
        &self.kappa_minus
    }

    /// Mode-space power: Σ_s ∫ dk_t |κ|² / (2π k_t), from the orthogonality
    /// normalization of the mode family.
    pub fn mode_power(&self) -> f64 {
        let mut p = 0.0;
        for (j, node) in self.nodes.iter().enumerate() {
            let s = self.kappa_plus[j].norm_sqr() + self.kappa_minus[j].norm_sqr();
            p += node.weight * s / (2.0 * std::f64::consts::PI * node.k_t);
        }
        p
    }

    /// Barycentric evaluation of both κ branches at an arbitrary α.
    fn kappa_at(&self, alpha: f64) -> (Complex64, Complex64) {
        let x = alpha / (std::f64::consts::FRAC_PI_2 / 2.0) - 1.0;
        let mut num_p = Complex64::new(0.0, 0.0);
        let mut num_m = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..self.x_gl.len() {
            let d = x - self.x_gl[j];
            if d.abs() < 1e-14 {
                return (self.kappa_plus[j], self.kappa_minus[j]);
            }
            let c = self.bary[j] / d;
            num_p += self.kappa_plus[j] * c;
            num_m += self.kappa_minus[j] * c;
            den += c;
        }
        (num_p / den, num_m / den)
    }

    /// The stored Gauss–Legendre grid itself, used when the phase budget of
    /// a point is small enough for the spectral sum.
    fn native_grid(&self) -> AlphaGrid {
        AlphaGrid {
            alpha_sin: self.nodes.iter().map(|n| n.alpha.sin()).collect(),
            alpha_cos: self.nodes.iter().map(|n| n.alpha.cos()).collect(),
            w_kt: self.nodes.iter().map(|n| n.weight).collect(),
            kappa_plus: self.kappa_plus.clone(),
            kappa_minus: self.kappa_minus.clone(),
        }
    }

    /// Oscillation-resolved panel grid for points with a large phase budget,
    /// sized for the worst point of a batch.
    fn oscillatory_grid(&self, rho_max: f64, z_abs: f64) -> AlphaGrid {
        let k = self.k;
        let n = self.nodes.len() as f64;
        // |d/dα (k_z z ± k_t ρ)| plus a floor that resolves the degree-n
        // interpolant itself
        let rate = move |a: f64| k * (z_abs * a.sin() + rho_max * a.cos()) + 2.0 * n;
        let edges = crate::numerics::quadrature::panel_edges(
            0.0,
            std::f64::consts::FRAC_PI_2,
            Some(&rate),
            MODE_PHASE_PER_PANEL,
        );
        let (xg, wg) = gauss_legendre(15);
        let mut alpha_q = Vec::with_capacity((edges.len() - 1) * 15);
        let mut w_q = Vec::with_capacity(alpha_q.capacity());
        for pair in edges.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let half = 0.5 * (pair[1] - pair[0]);
            for (&x, &w) in xg.iter().zip(&wg) {
                alpha_q.push(mid + half * x);
                w_q.push(half * w);
            }
        }
        let mut grid = AlphaGrid {
            alpha_sin: Vec::with_capacity(alpha_q.len()),
            alpha_cos: Vec::with_capacity(alpha_q.len()),
            w_kt: Vec::with_capacity(alpha_q.len()),
            kappa_plus: Vec::with_capacity(alpha_q.len()),
            kappa_minus: Vec::with_capacity(alpha_q.len()),
        };
        for (&a, &w) in alpha_q.iter().zip(&w_q) {
            let (sin_a, cos_a) = (a.sin(), a.cos());
            let (kp, km) = self.kappa_at(a);
            grid.alpha_sin.push(sin_a);
            grid.alpha_cos.push(cos_a);
            grid.w_kt.push(w * k * cos_a); // dk_t = k cos α dα
            grid.kappa_plus.push(kp);
            grid.kappa_minus.push(km);
        }
        grid
    }

    fn field_from_grid(&self, grid: &AlphaGrid, point: &CylPoint) -> PolarizedField {
        let k = self.k;
        let inv_4pi = 1.0 / (4.0 * std::f64::consts::PI);
        let mut f_plus = Complex64::new(0.0, 0.0);
        let mut f_z = Complex64::new(0.0, 0.0);
        let mut f_minus = Complex64::new(0.0, 0.0);
        for q in 0..grid.w_kt.len() {
            let k_t = k * grid.alpha_sin[q];
            let k_z = k * grid.alpha_cos[q];
            let (b0, b1, b2) = bessel_j012(k_t * point.rho);
            let propag = Complex64::from_polar(grid.w_kt[q], k_z * point.z);
            let kp = grid.kappa_plus[q];
            let km = grid.kappa_minus[q];
            f_plus += propag * (b0 * inv_4pi) * (((k + k_z) / k) * kp + ((k_z - k) / k) * km);
            f_z += propag * (b1 * (k_t / k)) * (kp + km);
            f_minus += propag * (b2 * inv_4pi) * (((k - k_z) / k) * kp + ((-k - k_z) / k) * km);
        }
        let e_iphi = Complex64::from_polar(1.0, point.phi);
        f_z *= Complex64::new(0.0, -1.0) * std::f64::consts::SQRT_2 * inv_4pi * e_iphi;
        f_minus *= e_iphi * e_iphi;
        PolarizedField::new(f_plus, f_z, f_minus)
    }

    /// True when the stored spectral grid resolves the oscillation of
    /// e^{i k_z z} J_m(k_t ρ) at this point.
    fn native_grid_suffices(&self, point: &CylPoint) -> bool {
        self.k * (point.rho + point.z.abs()) <= 0.45 * self.nodes.len() as f64
    }

    /// Field at a single point with z ≥ -f, in units of the incident
    /// amplitude.
    pub fn reconstruct(&self, point: &CylPoint) -> PolarizedField {
        if self.native_grid_suffices(point) {
            self.field_from_grid(&self.native_grid(), point)
        } else {
            let grid = self.oscillatory_grid(point.rho, point.z.abs());
            self.field_from_grid(&grid, point)
        }
    }

    /// Fields at a batch of points, sharing one quadrature grid sized for
    /// the worst point. Points evaluate in parallel.
    pub fn reconstruct_batch(&self, points: &[CylPoint]) -> Vec<PolarizedField> {
        let rho_max = points.iter().map(|p| p.rho).fold(0.0, f64::max);
        let z_max = points.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
        let worst = CylPoint::new(rho_max, 0.0, z_max);
        let grid = if self.native_grid_suffices(&worst) {
            self.native_grid()
        } else {
            self.oscillatory_grid(rho_max, z_max)
        };
        points
            .par_iter()
            .map(|p| self.field_from_grid(&grid, p))
            .collect()
    }

    /// |F₊|² along the optical axis over `z_range`, with the full width at
    /// half maximum extracted by linear interpolation when the peak lies
    /// strictly inside the range.
    pub fn axial_intensity_profile(
        &self,
        z_range: (f64, f64),
        samples: usize,
    ) -> Result<AxialProfile> {
        if samples < 3 {
            return Err(Error::Domain("need at least 3 axial samples".into()));
        }
        let (z0, z1) = z_range;
        if !(z1 > z0) {
            return Err(Error::Domain("empty z range".into()));
        }
        let pts: Vec<CylPoint> = (0..samples)
            .map(|i| CylPoint::new(0.0, 0.0, z0 + (z1 - z0) * i as f64 / (samples - 1) as f64))
            .collect();
        let fields = self.reconstruct_batch(&pts);
        let points: Vec<(f64, f64)> = pts
            .iter()
            .zip(&fields)
            .map(|(p, f)| (p.z, f.plus.norm_sqr()))
            .collect();
        let (peak_idx, &(peak_z, peak)) = points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("samples >= 3");
        let fwhm = if peak_idx == 0 || peak_idx == points.len() - 1 {
            None
        } else {
            half_width_crossings(&points, peak_idx, peak)
        };
        Ok(AxialProfile {
            points,
            peak_z,
            peak_intensity: peak,
            fwhm,
        })
    }

    /// Per-component field magnitudes across the focal plane (z = 0, φ = 0).
    pub fn focal_plane_profile(
        &self,
        rho_range: (f64, f64),
        samples: usize,
    ) -> Result<Vec<FocalPlaneSample>> {
        if samples < 3 {
            return Err(Error::Domain("need at least 3 radial samples".into()));
        }
        let (r0, r1) = rho_range;
        if !(r1 > r0) || r0 < 0.0 {
            return Err(Error::Domain("invalid rho range".into()));
        }
        let pts: Vec<CylPoint> = (0..samples)
            .map(|i| CylPoint::new(r0 + (r1 - r0) * i as f64 / (samples - 1) as f64, 0.0, 0.0))
            .collect();
        let fields = self.reconstruct_batch(&pts);
        Ok(pts
            .iter()
            .zip(&fields)
            .map(|(p, f)| FocalPlaneSample {
                rho: p.rho,
                f_plus: f.plus.norm(),
                f_z: f.z.norm(),
                f_minus: f.minus.norm(),
            })
            .collect())
    }
}

/// On-axis intensity scan with its extracted depth of field.
#[derive(Debug, Clone)]
pub struct AxialProfile {
    /// (z, |F₊|²) samples.
    pub points: Vec<(f64, f64)>,
    pub peak_z: f64,
    pub peak_intensity: f64,
    /// Full width at half maximum, m; `None` when the peak is not interior
    /// to the scanned range or the half level is not bracketed.
    pub fwhm: Option<f64>,
}

/// One radial sample of the focal-plane field-magnitude profile.
#[derive(Debug, Clone, Copy)]
pub struct FocalPlaneSample {
    pub rho: f64,
    pub f_plus: f64,
    pub f_z: f64,
    pub f_minus: f64,
}

fn half_width_crossings(points: &[(f64, f64)], peak_idx: usize, peak: f64) -> Option<f64> {
    let half = 0.5 * peak;
    let mut left = None;
    for i in (0..peak_idx).rev() {
        if points[i].1 < half {
            let (z0, i0) = points[i];
            let (z1, i1) = points[i + 1];
            left = Some(z0 + (z1 - z0) * (half - i0) / (i1 - i0));
            break;
        }
    }
    let mut right = None;
    for i in peak_idx + 1..points.len() {
        if points[i].1 < half {
            let (z0, i0) = points[i - 1];
            let (z1, i1) = points[i];
            right = Some(z0 + (z1 - z0) * (half - i0) / (i1 - i0));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    }
}
