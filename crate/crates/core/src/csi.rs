//! Imperfect CSI: temporal correlation from the Jakes model, AR(1) channel
//! aging, least-squares estimation noise and the resulting error covariance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMatrix, CVector, C64};
use crate::scenario::UserModel;

/// Bessel function of the first kind, order zero.
///
/// Power series for `|x| < 8`, Miller's backward recurrence (normalised with
/// `J0 + 2 sum J_2k = 1`) for `8 <= |x| <= 60`, and the Hankel asymptotic
/// expansion beyond. Absolute error stays below 1e-14 on `[0, 60]`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else if x <= 60.0 {
        miller_j0(x)
    } else {
        hankel_j0(x)
    }
}

fn miller_j0(x: f64) -> f64 {
    let mut start = (x + 40.0).ceil() as usize;
    start += start % 2;
    let (mut above, mut current) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        // current = J_k, above = J_{k+1}
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * current;
        }
        if k - 1 == 0 {
            j0 = current;
        }
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / (j0 + norm)
}

fn hankel_j0(x: f64) -> f64 {
    // a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..40 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= -odd * odd / (k as f64 * 8.0);
        }
        let term = a / x.powi(k);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// How channels move from one coherence block to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgingModel {
    /// `h[n+1] = alpha h[n] + z` with `z ~ CN(0, (1 - alpha^2) R_z)`.
    #[default]
    Ar1,
    /// Fresh draw of phases and diffuse part every block (alpha ignored).
    BlockIndependent,
}

/// `[aging]` section of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgingSection {
    /// Sampling frequency `f_s`, Hz.
    pub sampling_freq: f64,
    /// CSI delay `tau_s`, samples.
    pub csi_delay: f64,
    pub user_speed_kmh: f64,
    pub model: AgingModel,
}

impl Default for AgingSection {
    fn default() -> Self {
        Self {
            sampling_freq: 1e6,
            csi_delay: 1e4,
            user_speed_kmh: 30.0,
            model: AgingModel::Ar1,
        }
    }
}

impl AgingSection {
    pub fn to_config(&self, wavelength: f64) -> Result<AgingConfig> {
        AgingConfig::new(
            self.user_speed_kmh / 3.6,
            wavelength,
            self.sampling_freq,
            self.csi_delay,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingConfig {
    /// User speed, m/s.
    pub speed: f64,
    pub wavelength: f64,
    pub sampling_freq: f64,
    /// CSI delay in samples.
    pub delay: f64,
}

impl AgingConfig {
    pub fn new(speed: f64, wavelength: f64, sampling_freq: f64, delay: f64) -> Result<Self> {
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::Config(format!("user speed {speed} must be non-negative")));
        }
        if !(wavelength > 0.0 && sampling_freq > 0.0 && delay >= 0.0) {
            return Err(Error::Config(
                "wavelength and sampling frequency must be positive, CSI delay non-negative".into(),
            ));
        }
        Ok(Self {
            speed,
            wavelength,
            sampling_freq,
            delay,
        })
    }

    pub fn doppler(&self) -> f64 {
        self.speed / self.wavelength
    }
}

/// `alpha = J0(2 pi f_d T_s tau_s)`.
pub fn temporal_correlation(cfg: &AgingConfig) -> f64 {
    bessel_j0(2.0 * std::f64::consts::PI * cfg.doppler() * cfg.delay / cfg.sampling_freq)
}

/// `R_z = sum_s hbar_s hbar_s^H + R_k`.
pub fn innovation_covariance(user: &UserModel) -> CMatrix {
    let mut rz = user.correlation.matrix.clone();
    for h in &user.responses {
        rz += h * h.adjoint();
    }
    rz
}

/// A sampling factor of `R_z`: the specular responses followed by the columns
/// of the diffuse factor, so that `F F^H = R_z` without another decomposition.
pub fn innovation_factor(user: &UserModel) -> CMatrix {
    let m = user.correlation.dim();
    let s = user.responses.len();
    let l = &user.correlation.factor;
    let mut f = CMatrix::zeros(m, s + l.ncols());
    for (i, h) in user.responses.iter().enumerate() {
        f.set_column(i, h);
    }
    if l.ncols() > 0 {
        f.columns_mut(s, l.ncols()).copy_from(l);
    }
    f
}

/// `h[n+1] = alpha h[n] + sqrt(1 - alpha^2) F u` with `u ~ CN(0, I)`.
pub fn evolve_channel<R: Rng + ?Sized>(h: &CVector, alpha: f64, factor: &CMatrix, rng: &mut R) -> CVector {
    let u = complex_gaussian(rng, factor.ncols());
    evolve_channel_with(h, alpha, factor, &u)
}

pub fn evolve_channel_with(h: &CVector, alpha: f64, factor: &CMatrix, white: &CVector) -> CVector {
    let scale = (1.0 - alpha * alpha).max(0.0).sqrt();
    h.scale(alpha) + (factor * white).scale(scale)
}

/// Least-squares estimate with orthogonal pilots: `h + w`, `w ~ CN(0, I / snr)`.
pub fn estimate_channel<R: Rng + ?Sized>(h: &CVector, snr: f64, rng: &mut R) -> Result<CVector> {
    if !(snr > 0.0) {
        return Err(Error::Domain(format!("training SNR {snr} must be positive")));
    }
    let w = complex_gaussian(rng, h.len());
    Ok(estimate_channel_with(h, snr, &w))
}

pub fn estimate_channel_with(h: &CVector, snr: f64, white: &CVector) -> CVector {
    if snr.is_infinite() {
        return h.clone();
    }
    h + white.scale((1.0 / snr).sqrt())
}

/// `R_e = alpha^2 / snr I + (1 - alpha^2) R_z`.
pub fn error_covariance(alpha: f64, snr: f64, rz: &CMatrix) -> CMatrix {
    let m = rz.nrows();
    let noise = if snr.is_infinite() { 0.0 } else { alpha * alpha / snr };
    CMatrix::identity(m, m) * C64::new(noise, 0.0) + rz * C64::new(1.0 - alpha * alpha, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: J0(x) = (1/pi) int_0^pi cos(x sin t) dt, trapezoid
    // rule (spectrally accurate for this periodic integrand).
    fn j0_integral(x: f64) -> f64 {
        let n = 4000;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.5 * (1.0 + 1.0);
        for i in 1..n {
            s += (x * (i as f64 * h).sin()).cos();
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn j0_against_integral_oracle() {
        let mut x = 0.0;
        while x <= 50.0 {
            let want = j0_integral(x);
            assert!((bessel_j0(x) - want).abs() < 1e-10, "x={x}: {} vs {want}", bessel_j0(x));
            x += 0.37;
        }
        for x in [7.999, 8.0, 8.001, 59.9, 60.1, 75.0] {
            assert!((bessel_j0(x) - j0_integral(x)).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn j0_basic_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.4048).abs() < 1e-4);
        assert_eq!(bessel_j0(-3.3), bessel_j0(3.3));
    }

    #[test]
    fn alpha_examples() {
        let default_aging = AgingConfig::new(30.0 / 3.6, 0.15, 1e6, 1e4).unwrap();
        // scipy.special.j0(3.4906585039886595)
        assert!((temporal_correlation(&default_aging) - (-0.378_826_131_108_485_95)).abs() < 1e-10);
        let short = AgingConfig::new(30.0 / 3.6, 0.15, 1e6, 2000.0).unwrap();
        assert!((temporal_correlation(&short) - 0.881_814_833_155_137_2).abs() < 1e-10);
        let still = AgingConfig::new(0.0, 0.15, 1e6, 1e4).unwrap();
        assert_eq!(temporal_correlation(&still), 1.0);
    }

    #[test]
    fn alpha_depends_only_on_delay_time() {
        let a = AgingConfig::new(10.0, 0.15, 1e6, 1e4).unwrap();
        let b = AgingConfig::new(10.0, 0.15, 2e6, 2e4).unwrap();
        assert_eq!(temporal_correlation(&a), temporal_correlation(&b));
    }

    #[test]
    fn error_covariance_limits() {
        let rz = CMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let re1 = error_covariance(1.0, 4.0, &rz);
        assert!((re1 - CMatrix::identity(3, 3) * C64::new(0.25, 0.0)).norm() < 1e-15);
        let re0 = error_covariance(0.0, 4.0, &rz);
        assert!((re0 - &rz).norm() < 1e-15);
        let alpha: f64 = -0.38;
        let re = error_covariance(alpha, 10.0, &rz);
        let want = alpha * alpha * 3.0 / 10.0 + (1.0 - alpha * alpha) * rz.trace().re;
        assert!((re.trace().re - want).abs() < 1e-12);
    }

    #[test]
    fn unit_alpha_freezes_channel() {
        let h = CVector::from_fn(4, |i, _| C64::new(i as f64, 1.0));
        let f = CMatrix::identity(4, 4);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        assert_eq!(evolve_channel(&h, 1.0, &f, &mut rng), h);
        assert_eq!(estimate_channel(&h, f64::INFINITY, &mut rng).unwrap(), h);
        assert!(estimate_channel(&h, 0.0, &mut rng).is_err());
    }
}
