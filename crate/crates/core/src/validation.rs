//! Numerical self-checks run by the `validate-*` subcommands: the
//! correlation closed form against quadrature and the far-field limit, and the
//! channel gain identities against Monte Carlo.

use std::f64::consts::FRAC_PI_4;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{draw_channel, equivalent_gain, expected_gain_exact};
use crate::correlation::{
    correlation_entry_closed_form, correlation_entry_farfield, correlation_entry_quadrature, Kernel, LocalScattering,
    QuadratureSettings,
};
use crate::error::Result;
use crate::linalg::C64;
use crate::rng::derive_seed;
use crate::scenario::{ArrayGeometry, Scenario, ScenarioConfig};

/// Tolerance on `|closed form - quadrature| / beta`.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Tolerance on `|closed form - far field| / beta`.
pub const FARFIELD_TOLERANCE: f64 = 1e-4;
/// Relative tolerance of the calibrated gain identity.
pub const GAIN_IDENTITY_TOLERANCE: f64 = 1e-10;

/// Grid of the closed-form check.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid {
    pub array: ArrayGeometry,
    pub half_width: f64,
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    /// Keep every `pair_stride`-th element index on each axis.
    pub pair_stride: usize,
    pub kernel: Kernel,
    pub farfield_radius: f64,
    /// Relative perturbation added to every closed-form entry (negative control).
    pub fault: f64,
}

impl CorrelationGrid {
    /// `r in {40, 230} m`, `theta in {-pi/4, 0, pi/4}`, the array and spread of
    /// `config`.
    pub fn standard(config: &ScenarioConfig, kernel: Kernel) -> Result<Self> {
        Ok(Self {
            array: config.array()?,
            half_width: config.half_width(),
            radii: vec![40.0, 230.0],
            angles: vec![-FRAC_PI_4, 0.0, FRAC_PI_4],
            pair_stride: 1,
            kernel,
            farfield_radius: 1e6,
            fault: 0.0,
        })
    }

    fn pairs(&self) -> Vec<(i64, i64)> {
        let idx: Vec<i64> = self.array.element_indices().step_by(self.pair_stride.max(1)).collect();
        let mut out = Vec::new();
        for (i, &m) in idx.iter().enumerate() {
            for &n in &idx[i..] {
                out.push((m, n));
            }
        }
        out
    }

    fn closed_form(&self, m: i64, n: i64, params: &LocalScattering) -> Result<C64> {
        Ok(correlation_entry_closed_form(m, n, &self.array, params)? * (1.0 + self.fault))
    }
}

/// Largest deviation found and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstEntry {
    pub error: f64,
    pub m: i64,
    pub n: i64,
    pub radius: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub kernel: Kernel,
    pub entries: usize,
    pub quadrature: WorstEntry,
    pub farfield: WorstEntry,
}

impl CorrelationReport {
    pub fn quadrature_ok(&self) -> bool {
        self.quadrature.error <= QUADRATURE_TOLERANCE
    }

    pub fn farfield_ok(&self) -> bool {
        self.farfield.error <= FARFIELD_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.quadrature_ok() && self.farfield_ok()
    }
}

fn worst(entries: impl Iterator<Item = WorstEntry>) -> WorstEntry {
    entries
        .max_by(|a, b| a.error.total_cmp(&b.error))
        .unwrap_or(WorstEntry {
            error: 0.0,
            m: 0,
            n: 0,
            radius: 0.0,
            angle: 0.0,
        })
}

/// Runs the closed form against quadrature on the grid and against the
/// far-field formula at `farfield_radius`. Errors are relative to `beta = 1`.
pub fn validate_correlation(grid: &CorrelationGrid) -> Result<CorrelationReport> {
    let pairs = grid.pairs();
    let settings = QuadratureSettings::default();
    let mut cases = Vec::new();
    for &radius in &grid.radii {
        for &angle in &grid.angles {
            cases.push((radius, angle));
        }
    }
    let params = |radius: f64, angle: f64| LocalScattering {
        nominal_angle: angle,
        half_width: grid.half_width,
        radius,
        beta: 1.0,
    };
    let quad = cases
        .par_iter()
        .flat_map_iter(|&(radius, angle)| pairs.iter().map(move |&(m, n)| (radius, angle, m, n)))
        .map(|(radius, angle, m, n)| {
            let p = params(radius, angle);
            let closed = grid.closed_form(m, n, &p)?;
            let exact = correlation_entry_quadrature(m, n, &grid.array, &p, grid.kernel, settings)?;
            Ok(WorstEntry {
                error: (closed - exact).norm(),
                m,
                n,
                radius,
                angle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let far = grid
        .angles
        .par_iter()
        .flat_map_iter(|&angle| pairs.iter().map(move |&(m, n)| (angle, m, n)))
        .map(|(angle, m, n)| {
            let p = params(grid.farfield_radius, angle);
            let closed = grid.closed_form(m, n, &p)?;
            let limit = correlation_entry_farfield(m, n, &grid.array, &p)?;
            Ok(WorstEntry {
                error: (closed - limit).norm(),
                m,
                n,
                radius: grid.farfield_radius,
                angle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationReport {
        kernel: grid.kernel,
        entries: quad.len(),
        quadrature: worst(quad.into_iter()),
        farfield: worst(far.into_iter()),
    })
}

/// Monte Carlo statistics of `||h_k||^2` for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainCheck {
    pub user: usize,
    pub draws: usize,
    pub sample_mean: f64,
    pub standard_error: f64,
    /// `sum_s ||hbar_s||^2 + trace(R_k)`.
    pub expected: f64,
    /// `M (1 + 1/kappa) sum_s rho_s^2`.
    pub equivalent: f64,
}

impl GainCheck {
    /// `|sample mean - expected|` in standard errors.
    pub fn z_score(&self) -> f64 {
        let diff = (self.sample_mean - self.expected).abs();
        if self.standard_error > 0.0 {
            diff / self.standard_error
        } else if diff <= 1e-12 * self.expected.abs() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn identity_error(&self) -> f64 {
        (self.equivalent - self.expected).abs() / self.expected.abs()
    }

    pub fn monte_carlo_ok(&self) -> bool {
        self.z_score() <= 3.0
    }

    pub fn identity_ok(&self) -> bool {
        self.identity_error() <= GAIN_IDENTITY_TOLERANCE
    }
}

/// Scales every diffuse covariance by `factor`, breaking the trace
/// calibration (negative control).
pub fn miscalibrate(scenario: &mut Scenario, factor: f64) {
    for user in &mut scenario.users {
        user.correlation.matrix *= C64::new(factor, 0.0);
        user.correlation.factor *= C64::new(factor.sqrt(), 0.0);
    }
}

/// Draws `draws` channels of each listed user and compares the sample mean of
/// `||h||^2` with the exact and equivalent gains.
pub fn validate_gains(scenario: &Scenario, users: &[usize], draws: usize, seed: u64) -> Vec<GainCheck> {
    users
        .par_iter()
        .map(|&k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x4741_494e, k as u64]));
            let user = scenario.user(k);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for i in 0..draws {
                let x = draw_channel(user, &mut rng).norm_squared();
                let delta = x - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (x - mean);
            }
            let variance = if draws > 1 { m2 / (draws - 1) as f64 } else { 0.0 };
            GainCheck {
                user: k,
                draws,
                sample_mean: mean,
                standard_error: (variance / draws as f64).sqrt(),
                expected: expected_gain_exact(scenario, k),
                equivalent: equivalent_gain(scenario, k),
            }
        })
        .collect()
}
