//! Spherical-wavefront channel synthesis and the expected / equivalent gains
//! used as scheduling priorities.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CVector, C64};
use crate::scenario::{ArrayGeometry, Scenario, SpecularPath, UserModel};

/// Distance from a source at `(radius, angle)` to element `m` of a ULA with
/// spacing `spacing`.
pub fn element_radius(radius: f64, angle: f64, m: i64, spacing: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("path radius {radius} must be positive")));
    }
    let dr = spacing / radius;
    let m = m as f64;
    Ok(radius * (1.0 - 2.0 * m * dr * angle.sin() + dr * dr * m * m).sqrt())
}

/// Array response `rho [exp(-j 2 pi r_m / lambda)]_m` of one specular path.
pub fn specular_response(path: &SpecularPath, geom: &ArrayGeometry) -> Result<CVector> {
    let k = geom.wavenumber();
    let mut out = CVector::zeros(geom.num_antennas);
    for (i, m) in geom.element_indices().enumerate() {
        let r = element_radius(path.radius, path.angle, m, geom.spacing)?;
        // reduce the phase modulo one wavelength before scaling to keep digits
        let cycles = (r / geom.wavelength).fract();
        out[i] = C64::from_polar(path.amplitude, -std::f64::consts::TAU * cycles);
    }
    debug_assert!(k > 0.0);
    Ok(out)
}

/// `h = sum_s exp(j phi_s) hbar_s + L u` with explicit phases and whitened
/// diffuse draw `u` (one entry per column of the correlation factor).
pub fn draw_channel_with(user: &UserModel, phases: &[f64], white: &CVector) -> CVector {
    assert_eq!(phases.len(), user.responses.len(), "one phase per specular path");
    let m = user.correlation.dim();
    let mut h = if user.correlation.is_zero() {
        CVector::zeros(m)
    } else {
        &user.correlation.factor * white
    };
    for (resp, &phi) in user.responses.iter().zip(phases) {
        h.axpy(C64::from_polar(1.0, phi), resp, C64::new(1.0, 0.0));
    }
    h
}

/// Draws one channel realization of `user`: i.i.d. `U[0, 2 pi)` path phases
/// and a `CN(0, R)` diffuse part.
pub fn draw_channel<R: Rng + ?Sized>(user: &UserModel, rng: &mut R) -> CVector {
    let phases: Vec<f64> = (0..user.responses.len())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let white = complex_gaussian(rng, user.correlation.factor.ncols());
    draw_channel_with(user, &phases, &white)
}

/// `E ||h_k||^2 = sum_s ||hbar_s||^2 + trace(R_k)`.
pub fn expected_gain_exact(scenario: &Scenario, k: usize) -> f64 {
    let u = scenario.user(k);
    u.responses.iter().map(|r| r.norm_squared()).sum::<f64>() + u.correlation.trace()
}

/// Equivalent gain `g_k = M (1 + 1/kappa) sum_s rho_s^2`.
pub fn equivalent_gain(scenario: &Scenario, k: usize) -> f64 {
    equivalent_gain_from(
        scenario.num_antennas(),
        scenario.config.power_ratio,
        scenario.user(k).specular_power(),
    )
}

pub fn equivalent_gain_from(num_antennas: usize, power_ratio: f64, specular_power: f64) -> f64 {
    num_antennas as f64 * (1.0 + 1.0 / power_ratio) * specular_power
}

/// Equivalent gains of every user.
pub fn equivalent_gains(scenario: &Scenario) -> Vec<f64> {
    (0..scenario.num_users())
        .map(|k| equivalent_gain(scenario, k))
        .collect()
}
