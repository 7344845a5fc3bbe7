//! Static world of one realization: array geometry, user positions, specular
//! paths and the diffuse correlation matrix of every user.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{build_correlation_matrix, CorrelationMatrix, LocalScattering};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::rng::{substream, Stream};

/// Uniform linear array centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrayGeometry {
    pub num_antennas: usize,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Inter-element spacing, meters.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(num_antennas: usize, wavelength: f64, spacing: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::Config("array needs at least one antenna".into()));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Config(format!("wavelength {wavelength} must be positive")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Config(format!("antenna spacing {spacing} must be positive")));
        }
        Ok(Self {
            num_antennas,
            wavelength,
            spacing,
        })
    }

    pub fn half_wavelength(num_antennas: usize, wavelength: f64) -> Result<Self> {
        Self::new(num_antennas, wavelength, wavelength / 2.0)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Signed index of element `i`: `i - floor(M/2)`, so even arrays use
    /// `{-M/2, ..., M/2 - 1}` and odd arrays are symmetric.
    pub fn element_index(&self, i: usize) -> i64 {
        i as i64 - (self.num_antennas / 2) as i64
    }

    pub fn element_indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.num_antennas).map(|i| self.element_index(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserGeometry {
    /// Distance to the array centre, meters.
    pub radius: f64,
    /// Angle from broadside, radians.
    pub angle: f64,
}

/// One dominant propagation path. For the LoS path `(radius, angle)` is the
/// user position; otherwise it is the last reflection point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecularPath {
    pub radius: f64,
    pub angle: f64,
    /// Attenuation in `(0, 1]`.
    pub amplitude: f64,
    pub is_los: bool,
}

/// How specular amplitudes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmplitudeModel {
    /// `rho = min(1, r_ref / r)`, times a uniform reflection loss for NLoS paths.
    Distance { reflection_loss: [f64; 2] },
    /// Every path has the same amplitude.
    Constant { value: f64 },
}

impl Default for AmplitudeModel {
    fn default() -> Self {
        AmplitudeModel::Distance {
            reflection_loss: [0.3, 0.9],
        }
    }
}

/// Mapping from the configured angular standard deviation to the half-width of
/// the uniform density used by the correlation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadMapping {
    /// `half_width = sqrt(3) * std` (equal variance).
    #[default]
    StdMatched,
    /// `half_width = std`.
    HalfWidth,
}

/// Which component keeps its power when the power ratio changes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "anchor", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PowerAnchor {
    /// Amplitudes as drawn; `trace(R_k) = M sum_s rho_s^2 / kappa`.
    #[default]
    Specular,
    /// Diffuse power fixed at the level `reference_ratio` would give; specular
    /// amplitudes scaled by `sqrt(kappa / reference_ratio)`. Needs
    /// `kappa <= reference_ratio` so amplitudes stay in `(0, 1]`.
    Diffuse { reference_ratio: f64 },
}

/// `[scenario]` section of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_antennas: usize,
    pub wavelength: f64,
    /// Defaults to half a wavelength.
    pub antenna_spacing: Option<f64>,
    pub num_users: usize,
    pub specular_components: usize,
    /// Specular-to-diffuse power ratio; `inf` removes the diffuse component.
    pub power_ratio: f64,
    pub power_anchor: PowerAnchor,
    pub angular_range_deg: [f64; 2],
    pub distance_range: [f64; 2],
    pub angular_std_deg: f64,
    pub spread_mapping: SpreadMapping,
    pub amplitude: AmplitudeModel,
    pub transmit_power: f64,
    pub snr_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_antennas: 200,
            wavelength: 0.15,
            antenna_spacing: None,
            num_users: 200,
            specular_components: 4,
            power_ratio: 2.0,
            power_anchor: PowerAnchor::Specular,
            angular_range_deg: [-45.0, 45.0],
            distance_range: [40.0, 230.0],
            angular_std_deg: 10.0,
            spread_mapping: SpreadMapping::StdMatched,
            amplitude: AmplitudeModel::default(),
            transmit_power: 1.0,
            snr_db: 20.0,
        }
    }
}

fn check_range(name: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(Error::Config(format!(
            "{name} [{}, {}] is empty or inverted",
            r[0], r[1]
        )));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::Config("num_users must be at least 1".into()));
        }
        if self.specular_components == 0 {
            return Err(Error::Config("specular_components must be at least 1".into()));
        }
        if !(self.power_ratio > 0.0) {
            return Err(Error::Config(format!(
                "power_ratio {} must be positive",
                self.power_ratio
            )));
        }
        if let PowerAnchor::Diffuse { reference_ratio } = self.power_anchor {
            if !(reference_ratio.is_finite() && reference_ratio > 0.0) {
                return Err(Error::Config(format!(
                    "reference_ratio {reference_ratio} must be finite and positive"
                )));
            }
            if !(self.power_ratio <= reference_ratio) {
                return Err(Error::Config(format!(
                    "power_ratio {} exceeds reference_ratio {reference_ratio} of the diffuse anchor",
                    self.power_ratio
                )));
            }
        }
        check_range("angular_range_deg", self.angular_range_deg)?;
        check_range("distance_range", self.distance_range)?;
        if self.angular_range_deg[0] <= -90.0 || self.angular_range_deg[1] >= 90.0 {
            return Err(Error::Config("angular_range_deg must lie inside (-90, 90)".into()));
        }
        if self.distance_range[0] <= 0.0 {
            return Err(Error::Config("distance_range must be positive".into()));
        }
        if !(self.angular_std_deg > 0.0 && self.angular_std_deg < 15.0) {
            return Err(Error::Config(format!(
                "angular_std_deg {} must lie in (0, 15)",
                self.angular_std_deg
            )));
        }
        match self.amplitude {
            AmplitudeModel::Distance { reflection_loss } => {
                check_range("amplitude.reflection_loss", reflection_loss)?;
                if reflection_loss[0] <= 0.0 || reflection_loss[1] > 1.0 {
                    return Err(Error::Config("reflection_loss must lie in (0, 1]".into()));
                }
            }
            AmplitudeModel::Constant { value } => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::Config(format!("constant amplitude {value} outside (0, 1]")));
                }
            }
        }
        if !(self.transmit_power > 0.0) {
            return Err(Error::Config("transmit_power must be positive".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        self.array().map(|_| ())
    }

    pub fn array(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(
            self.num_antennas,
            self.wavelength,
            self.antenna_spacing.unwrap_or(self.wavelength / 2.0),
        )
    }

    pub fn angular_range(&self) -> [f64; 2] {
        self.angular_range_deg.map(f64::to_radians)
    }

    /// Uniform half-width (radians) of the local scattering cluster.
    pub fn half_width(&self) -> f64 {
        let std = self.angular_std_deg.to_radians();
        match self.spread_mapping {
            SpreadMapping::StdMatched => 3f64.sqrt() * std,
            SpreadMapping::HalfWidth => std,
        }
    }

    /// `sigma_n^2` at `snr_db`, with `SNR = P_TX / sigma_n^2`.
    pub fn noise_power_at(&self, snr_db: f64) -> f64 {
        self.transmit_power / 10f64.powf(snr_db / 10.0)
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power_at(self.snr_db)
    }

    pub fn has_diffuse(&self) -> bool {
        self.power_ratio.is_finite()
    }

    /// Factor applied to every drawn specular amplitude.
    pub fn amplitude_scale(&self) -> f64 {
        match self.power_anchor {
            PowerAnchor::Specular => 1.0,
            PowerAnchor::Diffuse { reference_ratio } => (self.power_ratio / reference_ratio).sqrt(),
        }
    }
}

/// Draws the `S_k` specular paths of a user.
pub fn sample_specular_paths<R: Rng + ?Sized>(
    rng: &mut R,
    user: UserGeometry,
    count: usize,
    config: &ScenarioConfig,
) -> Vec<SpecularPath> {
    let r_ref = config.distance_range[0];
    let [a_lo, a_hi] = config.angular_range();
    let [d_lo, d_hi] = config.distance_range;
    let scale = config.amplitude_scale();
    let distance_amplitude = |r: f64| (r_ref / r).min(1.0);
    let mut paths = Vec::with_capacity(count);
    paths.push(SpecularPath {
        radius: user.radius,
        angle: user.angle,
        amplitude: match config.amplitude {
            AmplitudeModel::Distance { .. } => distance_amplitude(user.radius),
            AmplitudeModel::Constant { value } => value,
        } * scale,
        is_los: true,
    });
    for _ in 1..count {
        let radius = rng.random_range(d_lo..d_hi);
        let angle = rng.random_range(a_lo..a_hi);
        let amplitude = match config.amplitude {
            AmplitudeModel::Distance {
                reflection_loss: [lo, hi],
            } => distance_amplitude(radius) * rng.random_range(lo..hi),
            AmplitudeModel::Constant { value } => value,
        } * scale;
        paths.push(SpecularPath {
            radius,
            angle,
            amplitude,
            is_los: false,
        });
    }
    paths
}

/// Long-term channel description of one user.
#[derive(Debug, Clone)]
pub struct UserModel {
    pub geometry: UserGeometry,
    pub paths: Vec<SpecularPath>,
    /// Array responses of the specular paths.
    pub responses: Vec<CVector>,
    pub correlation: CorrelationMatrix,
}

impl UserModel {
    /// `sum_s rho_s^2`.
    pub fn specular_power(&self) -> f64 {
        self.paths.iter().map(|p| p.amplitude * p.amplitude).sum()
    }
}

/// Immutable world of one realization.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub array: ArrayGeometry,
    pub seed: u64,
    pub users: Vec<UserModel>,
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.array.num_antennas
    }

    pub fn user(&self, k: usize) -> &UserModel {
        &self.users[k]
    }

    /// Assembles a scenario from explicit geometry, building the responses and
    /// the trace-calibrated correlation matrices.
    pub fn from_parts(
        config: ScenarioConfig,
        seed: u64,
        users: Vec<(UserGeometry, Vec<SpecularPath>)>,
    ) -> Result<Self> {
        let array = config.array()?;
        if users.is_empty() {
            return Err(Error::Config("scenario needs at least one user".into()));
        }
        let half_width = config.half_width();
        let kappa = config.power_ratio;
        let users = users
            .into_par_iter()
            .map(|(geometry, paths)| {
                if paths.is_empty() {
                    return Err(Error::Config("every user needs at least one path".into()));
                }
                let responses = paths
                    .iter()
                    .map(|p| crate::channel::specular_response(p, &array))
                    .collect::<Result<Vec<_>>>()?;
                let specular: f64 = paths.iter().map(|p| p.amplitude * p.amplitude).sum();
                let correlation = if kappa.is_finite() {
                    build_correlation_matrix(
                        &array,
                        &LocalScattering {
                            nominal_angle: geometry.angle,
                            half_width,
                            radius: geometry.radius,
                            beta: specular / kappa,
                        },
                    )?
                } else {
                    CorrelationMatrix::zero(array.num_antennas)
                };
                Ok(UserModel {
                    geometry,
                    paths,
                    responses,
                    correlation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            array,
            seed,
            users,
        })
    }
}

/// Builds the scenario of realization seed `seed`.
///
/// User positions are uniform over the configured angle and distance ranges;
/// each user's diffuse correlation matrix is scaled so that
/// `trace(R_k) = M sum_s rho_s^2 / kappa`.
pub fn build_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let mut rng = substream(seed, Stream::Geometry, 0);
    let [a_lo, a_hi] = config.angular_range();
    let [d_lo, d_hi] = config.distance_range;
    let users = (0..config.num_users)
        .map(|_| {
            let geometry = UserGeometry {
                radius: rng.random_range(d_lo..d_hi),
                angle: rng.random_range(a_lo..a_hi),
            };
            let paths = sample_specular_paths(&mut rng, geometry, config.specular_components, config);
            (geometry, paths)
        })
        .collect();
    Scenario::from_parts(config.clone(), seed, users)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            num_antennas: 16,
            num_users: 6,
            ..Default::default()
        }
    }

    #[test]
    fn los_amplitude_clamps_at_reference_distance() {
        let cfg = small();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let at_ref = sample_specular_paths(
            &mut rng,
            UserGeometry {
                radius: 40.0,
                angle: 0.1,
            },
            1,
            &cfg,
        );
        assert_eq!(at_ref[0].amplitude, 1.0);
        let far = sample_specular_paths(
            &mut rng,
            UserGeometry {
                radius: 80.0,
                angle: 0.1,
            },
            1,
            &cfg,
        );
        assert_eq!(far[0].amplitude, 0.5);
    }

    #[test]
    fn four_paths_one_los() {
        let cfg = small();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let user = UserGeometry {
            radius: 120.0,
            angle: -0.3,
        };
        let paths = sample_specular_paths(&mut rng, user, 4, &cfg);
        assert_eq!(paths.len(), 4);
        assert!(paths[0].is_los && paths[1..].iter().all(|p| !p.is_los));
        assert_eq!((paths[0].radius, paths[0].angle), (user.radius, user.angle));
        assert!(paths.iter().all(|p| p.amplitude > 0.0 && p.amplitude <= 1.0));
    }

    #[test]
    fn single_user_single_path() {
        let cfg = ScenarioConfig {
            num_users: 1,
            specular_components: 1,
            ..small()
        };
        let s = build_scenario(&cfg, 5).unwrap();
        assert_eq!(s.num_users(), 1);
        let u = s.user(0);
        assert_eq!(u.paths.len(), 1);
        assert!(u.paths[0].is_los);
        assert_eq!(u.paths[0].radius, u.geometry.radius);
        assert_eq!(u.paths[0].angle, u.geometry.angle);
    }

    #[test]
    fn inverted_ranges_are_rejected() {
        let cfg = ScenarioConfig {
            distance_range: [230.0, 40.0],
            ..small()
        };
        assert!(matches!(build_scenario(&cfg, 1), Err(Error::Config(_))));
        let cfg = ScenarioConfig {
            angular_range_deg: [10.0, 10.0],
            ..small()
        };
        assert!(matches!(build_scenario(&cfg, 1), Err(Error::Config(_))));
    }

    #[test]
    fn trace_calibration() {
        let s = build_scenario(&small(), 11).unwrap();
        let m = s.num_antennas() as f64;
        for u in &s.users {
            let lhs = u.correlation.trace() * s.config.power_ratio;
            let rhs = m * u.specular_power();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }

    #[test]
    fn infinite_power_ratio_has_no_diffuse_part() {
        let cfg = ScenarioConfig {
            power_ratio: f64::INFINITY,
            ..small()
        };
        let s = build_scenario(&cfg, 3).unwrap();
        assert!(s.users.iter().all(|u| u.correlation.is_zero()));
    }

    #[test]
    fn diffuse_anchor_keeps_diffuse_power() {
        let anchored = |kappa: f64| ScenarioConfig {
            power_ratio: kappa,
            power_anchor: PowerAnchor::Diffuse { reference_ratio: 4.0 },
            ..small()
        };
        let a = build_scenario(&anchored(4.0), 21).unwrap();
        let b = build_scenario(&anchored(2.0), 21).unwrap();
        let plain = build_scenario(
            &ScenarioConfig {
                power_ratio: 4.0,
                ..small()
            },
            21,
        )
        .unwrap();
        for k in 0..a.num_users() {
            let (ua, ub) = (a.user(k), b.user(k));
            assert!((ua.correlation.trace() - ub.correlation.trace()).abs() < 1e-9 * ua.correlation.trace());
            assert!((ub.specular_power() - 0.5 * ua.specular_power()).abs() < 1e-12);
            assert_eq!(ua.specular_power(), plain.user(k).specular_power());
        }
    }

    #[test]
    fn diffuse_anchor_rejects_ratio_above_reference() {
        let cfg = ScenarioConfig {
            power_ratio: 8.0,
            power_anchor: PowerAnchor::Diffuse { reference_ratio: 4.0 },
            ..small()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
