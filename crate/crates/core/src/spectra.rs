//! Lorentzian transmission-spectrum model and fitting.
//!
//! The transmission dip is T(δ) = 1 - (1 - T_min) (W/2)² / ((δ-δ₀)² + (W/2)²)
//! with the baseline fixed at 1 (transmission is normalized to the no-atom
//! count rate). Fitting is damped Gauss-Newton with the analytic Jacobian,
//! weighted by 1/σ² when per-point uncertainties are present.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// One spectrum sample: detuning in MHz, transmission, optional 1σ
/// uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub detuning_mhz: f64,
    pub transmission: f64,
    pub sigma: Option<f64>,
}

/// A measured or synthetic transmission spectrum.
#[derive(Debug, Clone, Default)]
pub struct SpectrumRecord {
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumRecord {
    pub fn new(points: Vec<SpectrumPoint>) -> Result<Self> {
        let rec = SpectrumRecord { points };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 5 {
            return Err(Error::InvalidInput(format!(
                "need at least 5 spectrum points, got {}",
                self.points.len()
            )));
        }
        for pair in self.points.windows(2) {
            if pair[1].detuning_mhz <= pair[0].detuning_mhz {
                return Err(Error::InvalidInput(
                    "detunings must be strictly increasing".into(),
                ));
            }
        }
        for p in &self.points {
            if !(0.0..=1.2).contains(&p.transmission) {
                return Err(Error::InvalidInput(format!(
                    "transmission {} at {} MHz outside [0, 1.2]",
                    p.transmission, p.detuning_mhz
                )));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0) {
                    return Err(Error::InvalidInput("sigma must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Read the CSV format `detuning_mhz,transmission[,sigma]`; `#` lines
    /// are comments, a header row is recognized and skipped.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(format!("read error: {e}")))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.starts_with("detuning") {
                continue; // header
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 2 or 3 comma-separated fields",
                    lineno + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("line {}: bad number {s:?}", lineno + 1))
                })
            };
            points.push(SpectrumPoint {
                detuning_mhz: parse(fields[0])?,
                transmission: parse(fields[1])?,
                sigma: if fields.len() == 3 {
                    Some(parse(fields[2])?)
                } else {
                    None
                },
            });
        }
        SpectrumRecord::new(points)
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let has_sigma = self.points.iter().any(|p| p.sigma.is_some());
        if has_sigma {
            writeln!(w, "detuning_mhz,transmission,sigma")?;
        } else {
            writeln!(w, "detuning_mhz,transmission")?;
        }
        for p in &self.points {
            match p.sigma {
                Some(s) => writeln!(w, "{:.9e},{:.9e},{:.9e}", p.detuning_mhz, p.transmission, s)?,
                None => writeln!(w, "{:.9e},{:.9e}", p.detuning_mhz, p.transmission)?,
            }
        }
        Ok(())
    }
}

/// Lorentzian dip parameters recovered from a spectrum.
#[derive(Debug, Clone)]
pub struct LorentzianFit {
    pub center_mhz: f64,
    pub fwhm_mhz: f64,
    pub t_min: f64,
    pub residual_rms: f64,
    /// Covariance of (center, fwhm, t_min).
    pub covariance: [[f64; 3]; 3],
    /// Set when the data shows no usable dip; the width is then pinned to
    /// the scanned span.
    pub degenerate: bool,
}

/// JSON-facing view of a fit, with the extinction ε_max = 1 - T_min.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub center_mhz: f64,
    pub fwhm_mhz: f64,
    pub t_min: f64,
    pub epsilon_max: f64,
    pub residual_rms: f64,
}

impl LorentzianFit {
    pub fn epsilon_max(&self) -> f64 {
        1.0 - self.t_min
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            center_mhz: self.center_mhz,
            fwhm_mhz: self.fwhm_mhz,
            t_min: self.t_min,
            epsilon_max: self.epsilon_max(),
            residual_rms: self.residual_rms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("fit report serializes")
    }
}

/// The Lorentzian transmission model.
pub fn model_transmission(center: f64, fwhm: f64, t_min: f64, detuning: f64) -> f64 {
    let g = 0.25 * fwhm * fwhm;
    let d = detuning - center;
    1.0 - (1.0 - t_min) * g / (d * d + g)
}

fn initial_guess(points: &[SpectrumPoint]) -> (f64, f64, f64) {
    let (min_idx, min_p) = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.transmission.total_cmp(&b.1.transmission))
        .expect("validated non-empty");
    let t_min = min_p.transmission;
    let center = min_p.detuning_mhz;
    let half_level = 0.5 * (1.0 + t_min);
    let mut left = None;
    for i in (0..min_idx).rev() {
        if points[i].transmission > half_level {
            left = Some(points[i].detuning_mhz);
            break;
        }
    }
    let mut right = None;
    for p in points.iter().skip(min_idx + 1) {
        if p.transmission > half_level {
            right = Some(p.detuning_mhz);
            break;
        }
    }
    let span = points.last().unwrap().detuning_mhz - points[0].detuning_mhz;
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => (r - l).max(span / points.len() as f64),
        _ => 0.25 * span,
    };
    (center, fwhm, t_min)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let inv = invert3(a)?;
    let mut x = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            x[i] += inv[i][j] * b[j];
        }
    }
    Some(x)
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    Some(inv)
}

/// Weighted least-squares Lorentzian fit by damped Gauss–Newton.
pub fn fit_lorentzian(record: &SpectrumRecord) -> Result<LorentzianFit> {
    record.validate()?;
    let pts = &record.points;
    let n = pts.len();

    // A dip shallower than the noise floor cannot constrain the width.
    let depth = 1.0
        - pts
            .iter()
            .map(|p| p.transmission)
            .fold(f64::INFINITY, f64::min);
    let noise_floor = {
        let mut sigmas: Vec<f64> = pts.iter().filter_map(|p| p.sigma).collect();
        if sigmas.is_empty() {
            1e-3
        } else {
            sigmas.sort_by(f64::total_cmp);
            3.0 * sigmas[sigmas.len() / 2]
        }
    };
    if depth <= noise_floor.max(1e-6) {
        let span = pts[n - 1].detuning_mhz - pts[0].detuning_mhz;
        return Ok(LorentzianFit {
            center_mhz: 0.5 * (pts[0].detuning_mhz + pts[n - 1].detuning_mhz),
            fwhm_mhz: span,
            t_min: 1.0 - depth,
            residual_rms: 0.0,
            covariance: [[0.0; 3]; 3],
            degenerate: true,
        });
    }

    // normalize the weights: the solution is scale-invariant, and equal
    // sigmas must take exactly the unweighted code path
    let raw_weights: Vec<f64> = pts
        .iter()
        .map(|p| p.sigma.map_or(1.0, |s| 1.0 / (s * s)))
        .collect();
    let all_equal = raw_weights.windows(2).all(|w| w[0] == w[1]);
    let mean_weight = if all_equal {
        raw_weights[0]
    } else {
        raw_weights.iter().sum::<f64>() / n as f64
    };
    let weights: Vec<f64> = raw_weights.iter().map(|w| w / mean_weight).collect();

    let (mut center, mut fwhm, mut t_min) = initial_guess(pts);
    let mut lambda = 1e-3;
    let chi2 = |c: f64, w: f64, t: f64| -> f64 {
        pts.iter()
            .zip(&weights)
            .map(|(p, &wt)| {
                let r = model_transmission(c, w, t, p.detuning_mhz) - p.transmission;
                wt * r * r
            })
            .sum()
    };
    let mut best_chi2 = chi2(center, fwhm, t_min);
    let mut converged = false;

    for _ in 0..200 {
        // normal equations with analytic Jacobian
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (p, &wt) in pts.iter().zip(&weights) {
            let d = p.detuning_mhz - center;
            let g = 0.25 * fwhm * fwhm;
            let denom = d * d + g;
            let depth = 1.0 - t_min;
            // dT/dcenter, dT/dfwhm, dT/dt_min
            let j = [
                -2.0 * depth * g * d / (denom * denom),
                -depth * d * d / (denom * denom) * (0.5 * fwhm),
                g / denom,
            ];
            let r = model_transmission(center, fwhm, t_min, p.detuning_mhz) - p.transmission;
            for a in 0..3 {
                jtr[a] += wt * j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += wt * j[a] * j[b];
                }
            }
        }
        let mut damped = jtj;
        for (a, row) in damped.iter_mut().enumerate() {
            row[a] *= 1.0 + lambda;
        }
        let Some(step) = solve3(damped, jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = (center - step[0], (fwhm - step[1]).abs(), t_min - step[2]);
        let trial_chi2 = chi2(trial.0, trial.1, trial.2);
        if trial_chi2 <= best_chi2 {
            let rel_step = (step[0].abs() / center.abs().max(1.0))
                .max(step[1].abs() / fwhm.abs().max(1e-12))
                .max(step[2].abs() / t_min.abs().max(1e-12));
            center = trial.0;
            fwhm = trial.1;
            t_min = trial.2;
            best_chi2 = trial_chi2;
            lambda = (lambda / 3.0).max(1e-15);
            if rel_step < 1e-8 {
                converged = true;
            }
            // once declared converged, polish to the numerical floor so the
            // result does not depend on which iterate crossed the threshold
            if converged && rel_step < 1e-13 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence(200));
    }

    // covariance from the converged normal matrix
    let mut jtj = [[0.0; 3]; 3];
    for (p, &wt) in pts.iter().zip(&weights) {
        let d = p.detuning_mhz - center;
        let g = 0.25 * fwhm * fwhm;
        let denom = d * d + g;
        let depth = 1.0 - t_min;
        let j = [
            -2.0 * depth * g * d / (denom * denom),
            -depth * d * d / (denom * denom) * (0.5 * fwhm),
            g / denom,
        ];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += wt * j[a] * j[b];
            }
        }
    }
    let has_sigmas = pts.iter().all(|p| p.sigma.is_some());
    let dof = (n as f64 - 3.0).max(1.0);
    // undo the weight normalization for the sigma-based covariance
    let scale = if has_sigmas {
        1.0 / mean_weight
    } else {
        best_chi2 / dof
    };
    let covariance = invert3(jtj)
        .map(|inv| {
            let mut c = inv;
            for row in &mut c {
                for v in row.iter_mut() {
                    *v *= scale;
                }
            }
            c
        })
        .unwrap_or([[0.0; 3]; 3]);

    let residual_rms = (pts
        .iter()
        .map(|p| {
            let r = model_transmission(center, fwhm, t_min, p.detuning_mhz) - p.transmission;
            r * r
        })
        .sum::<f64>()
        / n as f64)
        .sqrt();

    Ok(LorentzianFit {
        center_mhz: center,
        fwhm_mhz: fwhm,
        t_min,
        residual_rms,
        covariance,
        degenerate: false,
    })
}

/// Verdict of the linewidth sanity check against the natural linewidth.
#[derive(Debug, Clone, Serialize)]
pub struct LinewidthReport {
    pub fwhm_mhz: f64,
    pub gamma_natural_mhz: f64,
    pub ratio: f64,
    pub threshold: f64,
    /// True when the broadening stays below the threshold, i.e. the
    /// scatterer behaved as a clean two-level system.
    pub consistent: bool,
}

/// Compare a fitted width to the natural linewidth. The default threshold
/// of 1.3 marks spectra broadened by at most 30% as consistent.
pub fn natural_linewidth_check(
    fit: &LorentzianFit,
    gamma_natural_mhz: f64,
    threshold: Option<f64>,
) -> LinewidthReport {
    let threshold = threshold.unwrap_or(1.3);
    let ratio = fit.fwhm_mhz / gamma_natural_mhz;
    LinewidthReport {
        fwhm_mhz: fit.fwhm_mhz,
        gamma_natural_mhz,
        ratio,
        threshold,
        consistent: ratio <= threshold,
    }
}

/// Build a noiseless synthetic spectrum from model parameters.
pub fn synthetic_spectrum(
    center: f64,
    fwhm: f64,
    t_min: f64,
    detunings: &[f64],
    sigma: Option<f64>,
) -> SpectrumRecord {
    SpectrumRecord {
        points: detunings
            .iter()
            .map(|&d| SpectrumPoint {
                detuning_mhz: d,
                transmission: model_transmission(center, fwhm, t_min, d),
                sigma,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, span: f64) -> Vec<f64> {
        (0..n)
            .map(|i| -span + 2.0 * span * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn model_shape() {
        let (c, w, t) = (1.5, 7.5, 0.902);
        assert!((model_transmission(c, w, t, c) - t).abs() < 1e-15);
        let half = 0.5 * (1.0 + t);
        assert!((model_transmission(c, w, t, c + 0.5 * w) - half).abs() < 1e-15);
        assert!((model_transmission(c, w, t, c - 0.5 * w) - half).abs() < 1e-15);
        assert!((model_transmission(c, w, t, 1e9) - 1.0).abs() < 1e-12);
        assert!((model_transmission(c, w, t, -1e9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_round_trip() {
        let rec = synthetic_spectrum(0.0, 7.5, 0.902, &grid(41, 25.0), None);
        let fit = fit_lorentzian(&rec).unwrap();
        assert!(!fit.degenerate);
        assert!(fit.center_mhz.abs() < 1e-6);
        assert!((fit.fwhm_mhz - 7.5).abs() < 1e-6);
        assert!((fit.t_min - 0.902).abs() < 1e-6);
        assert!(fit.residual_rms < 1e-10);
    }

    #[test]
    fn round_trip_over_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let c = rng.gen_range(-5.0..5.0);
            let w = rng.gen_range(3.0..12.0);
            let t = rng.gen_range(0.75..0.99);
            let rec = synthetic_spectrum(c, w, t, &grid(61, 30.0), None);
            let fit = fit_lorentzian(&rec).unwrap();
            assert!(
                (fit.center_mhz - c).abs() < 1e-6
                    && (fit.fwhm_mhz - w).abs() < 1e-6
                    && (fit.t_min - t).abs() < 1e-6,
                "round trip failed for ({c}, {w}, {t}): ({}, {}, {})",
                fit.center_mhz,
                fit.fwhm_mhz,
                fit.t_min
            );
            assert!((fit.epsilon_max() - (1.0 - t)).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&fit.epsilon_max()));
        }
    }

    #[test]
    fn noisy_recovery_within_quoted_uncertainties() {
        // strongest-focusing reference row: eps_max 10.4%, W 7.7 MHz, with
        // seeded sigma = 0.002 Gaussian noise, written to a CSV file and
        // recovered through the parsing path
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let sigma = 0.002;
        let detunings = grid(81, 25.0);
        let mut rec = synthetic_spectrum(0.0, 7.7, 1.0 - 0.104, &detunings, Some(sigma));
        for p in &mut rec.points {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            p.transmission += sigma * (-2.0 * u1.ln()).sqrt() * u2.cos();
            p.transmission = p.transmission.clamp(0.0, 1.2);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synthetic.csv");
        let mut file = std::fs::File::create(&path).unwrap();
        writeln!(file, "# synthetic transmission spectrum").unwrap();
        rec.to_csv(&mut file).unwrap();
        drop(file);

        let parsed =
            SpectrumRecord::from_csv(std::io::BufReader::new(std::fs::File::open(&path).unwrap()))
                .unwrap();
        let fit = fit_lorentzian(&parsed).unwrap();
        assert!(
            (fit.epsilon_max() - 0.104).abs() < 0.001,
            "eps_max = {:.4}",
            fit.epsilon_max()
        );
        assert!(
            (fit.fwhm_mhz - 7.7).abs() < 0.2,
            "fwhm = {:.3}",
            fit.fwhm_mhz
        );
    }

    #[test]
    fn weighted_fit_reduces_to_unweighted_for_equal_sigmas() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let detunings = grid(41, 20.0);
        let mut rec = synthetic_spectrum(0.4, 6.5, 0.9, &detunings, None);
        for p in &mut rec.points {
            p.transmission += 0.004 * (rng.gen_range(0.0..1.0) - 0.5);
        }
        let unweighted = fit_lorentzian(&rec).unwrap();
        for p in &mut rec.points {
            p.sigma = Some(0.003);
        }
        let weighted = fit_lorentzian(&rec).unwrap();
        assert!((unweighted.center_mhz - weighted.center_mhz).abs() < 1e-10);
        assert!((unweighted.fwhm_mhz - weighted.fwhm_mhz).abs() < 1e-10);
        assert!((unweighted.t_min - weighted.t_min).abs() < 1e-10);
    }

    #[test]
    fn flat_spectrum_is_degenerate() {
        let points: Vec<SpectrumPoint> = (0..21)
            .map(|i| SpectrumPoint {
                detuning_mhz: i as f64 - 10.0,
                transmission: 1.0,
                sigma: None,
            })
            .collect();
        let fit = fit_lorentzian(&SpectrumRecord::new(points).unwrap()).unwrap();
        assert!(fit.degenerate);
        assert!((fit.fwhm_mhz - 20.0).abs() < 1e-12, "width pinned to span");
    }

    #[test]
    fn linewidth_check_thresholds() {
        let fit = LorentzianFit {
            center_mhz: 0.0,
            fwhm_mhz: 7.7,
            t_min: 0.9,
            residual_rms: 0.0,
            covariance: [[0.0; 3]; 3],
            degenerate: false,
        };
        let rep = natural_linewidth_check(&fit, 6.0, None);
        assert!((rep.ratio - 1.2833333333).abs() < 1e-9);
        assert!(rep.consistent);

        let mut wide = fit.clone();
        wide.fwhm_mhz = 12.0;
        assert!(!natural_linewidth_check(&wide, 6.0, None).consistent);

        let mut exact = fit;
        exact.fwhm_mhz = 6.0;
        let rep = natural_linewidth_check(&exact, 6.0, None);
        assert!((rep.ratio - 1.0).abs() < 1e-12 && rep.consistent);
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let rec = synthetic_spectrum(0.0, 7.5, 0.9, &grid(11, 20.0), Some(0.002));
        let mut buf = Vec::new();
        rec.to_csv(&mut buf).unwrap();
        let back = SpectrumRecord::from_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(rec.points.len(), back.points.len());
        // the CSV format carries 10 significant digits
        for (a, b) in rec.points.iter().zip(&back.points) {
            assert!((a.detuning_mhz - b.detuning_mhz).abs() < 1e-8);
            assert!((a.transmission - b.transmission).abs() < 1e-9);
        }

        let with_comments = "# spectrum\ndetuning_mhz,transmission\n-1.0,0.95\n-0.5,0.9\n0.0,0.85\n0.5,0.9\n1.0,0.95\n";
        assert!(SpectrumRecord::from_csv(std::io::Cursor::new(with_comments)).is_ok());

        let unsorted = "0.0,0.9\n-1.0,0.95\n1.0,0.95\n2.0,0.96\n3.0,0.97\n";
        assert!(SpectrumRecord::from_csv(std::io::Cursor::new(unsorted)).is_err());

        let out_of_range = "-1.0,1.5\n0.0,0.9\n1.0,0.95\n2.0,0.96\n3.0,0.97\n";
        assert!(SpectrumRecord::from_csv(std::io::Cursor::new(out_of_range)).is_err());
    }

    #[test]
    fn fit_report_json_keys() {
        let rec = synthetic_spectrum(0.0, 7.5, 0.902, &grid(41, 25.0), None);
        let fit = fit_lorentzian(&rec).unwrap();
        let json = fit.to_json();
        for key in [
            "center_mhz",
            "fwhm_mhz",
            "t_min",
            "epsilon_max",
            "residual_rms",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }
}
