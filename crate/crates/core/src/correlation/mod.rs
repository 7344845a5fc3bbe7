//! Spatial correlation of the diffuse channel component under a local
//! scattering model with spherical wavefronts.
//!
//! Around a nominal angle `vartheta` the scatterers spread uniformly over
//! `delta in [-phi, phi]`. With the Fresnel expansion of the element distance
//!
//! ```text
//! r_m ~ r - m d sin(vartheta + delta) + m^2 d^2 cos^2(vartheta + delta) / (2 r)
//! ```
//!
//! the entry `[R]_{m,n} = beta E[exp(-j k r_m) exp(j k r_n)]` has the phase
//! `k [(m-n) d sin(vartheta+delta) + (n^2-m^2) d^2 cos^2(vartheta+delta) / (2r)]`.
//! Linearising `sin delta ~ delta`, `cos delta ~ 1` turns that phase into the
//! quadratic `a + b delta + c delta^2`, whose average over the uniform density
//! is a difference of two complex error functions. That is the closed form
//! used to assemble matrices here.
//!
//! Two independent checks are provided:
//! * [`correlation_entry_quadrature`] integrates either the quadratic phase
//!   ([`Kernel::SmallAngle`], same model, different route) or the full
//!   trigonometric Fresnel phase ([`Kernel::Fresnel`]) adaptively;
//! * [`correlation_entry_farfield`] is the `d/r -> 0` limit.

pub mod erf;
pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{psd_factor, CMatrix, C64};
use crate::scenario::ArrayGeometry;

pub use erf::{complex_erf, complex_erf_flagged, faddeeva_w};
pub use quadrature::{integrate, QuadratureOutcome, QuadratureSettings};

/// Coefficients below this magnitude are treated as zero in the closed form.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

/// Largest admissible uniform half-width: the std-matched image of a
/// `pi/12` angular standard deviation.
pub const MAX_HALF_WIDTH: f64 = PI / 12.0 * 1.732_050_807_568_877_2;

/// Parameters of one local-scattering cluster.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LocalScattering {
    /// Nominal angle of arrival, radians.
    pub nominal_angle: f64,
    /// Half-width of the uniform angular spread, radians.
    pub half_width: f64,
    /// Distance of the cluster from the array centre, meters.
    pub radius: f64,
    /// Average gain per antenna (the diagonal of `R`).
    pub beta: f64,
}

impl LocalScattering {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width <= MAX_HALF_WIDTH + 1e-15) {
            return Err(Error::Domain(format!(
                "angular half-width {} rad outside (0, {MAX_HALF_WIDTH}]",
                self.half_width
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain(format!("radius {} must be positive", self.radius)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!("gain {} must be non-negative", self.beta)));
        }
        Ok(())
    }
}

/// Quadratic phase `a + b delta + c delta^2` of entry `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn phase_coefficients(m: i64, n: i64, geom: &ArrayGeometry, nominal_angle: f64, radius: f64) -> PhaseCoefficients {
    let k = geom.wavenumber();
    let d = geom.spacing;
    let diff = (m - n) as f64 * d;
    let quad = ((n * n - m * m) as f64) * d * d;
    let (s, c) = nominal_angle.sin_cos();
    PhaseCoefficients {
        a: k * (diff * s + quad / (2.0 * radius) * c * c),
        b: k * c * (diff - quad / radius * s),
        c: k * quad / (2.0 * radius) * s * s,
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(1 / 2 phi) int_{-phi}^{phi} exp(j (a + b t + c t^2)) dt` in closed form.
///
/// For `c > 0` the integral equals
/// `exp(j(a - b^2/4c)) sqrt(pi) (1+j) / (4 phi sqrt(2c)) [erf(w x1) - erf(w x2)]`
/// with `w = (1-j)/sqrt 2` and `x1,2 = +-sqrt(c) phi + b / (2 sqrt c)`.
/// Away from the origin each error function is rewritten as
/// `erf(w x) = sign(x) (1 - exp(j x^2) W(j w |x|))` with the Faddeeva function
/// `W`, and the large phases `x^2 - b^2/4c = c phi^2 +- b phi` are combined
/// analytically so nothing cancels catastrophically as `c -> 0`.
/// Negative `c` is handled through complex conjugation.
pub fn quadratic_phase_average(coef: PhaseCoefficients, half_width: f64) -> C64 {
    let PhaseCoefficients { a, b, c } = coef;
    let phi = half_width;
    if c.abs() < DEGENERATE_TOLERANCE {
        if b.abs() < DEGENERATE_TOLERANCE {
            return C64::from_polar(1.0, a);
        }
        return C64::from_polar(sinc(b * phi), a);
    }
    if c < 0.0 {
        return quadratic_phase_average(PhaseCoefficients { a: -a, b: -b, c: -c }, phi).conj();
    }
    let sc = c.sqrt();
    let shift = b / (2.0 * sc);
    let x1 = sc * phi + shift;
    let x2 = -sc * phi + shift;
    let omega = C64::new(1.0, -1.0) * std::f64::consts::FRAC_1_SQRT_2;
    let prefactor = C64::new(1.0, 1.0) * (PI.sqrt() / (4.0 * phi * (2.0 * c).sqrt()));

    if x1.abs() <= 1.0 && x2.abs() <= 1.0 {
        let diff = complex_erf(omega * x1) - complex_erf(omega * x2);
        return C64::from_polar(1.0, a - shift * shift) * prefactor * diff;
    }
    // exp(j(a - b^2/4c)) * exp(j x_i^2) = exp(j phase_i)
    let phase1 = a + c * phi * phi + b * phi;
    let phase2 = a + c * phi * phi - b * phi;
    let tail = |x: f64| faddeeva_w(C64::new(1.0, 1.0) * (std::f64::consts::FRAC_1_SQRT_2 * x.abs())).value;
    let t1 = C64::from_polar(1.0, phase1) * tail(x1);
    let t2 = C64::from_polar(1.0, phase2) * tail(x2);
    let bracket = if x2 >= 0.0 {
        t2 - t1
    } else if x1 <= 0.0 {
        t1 - t2
    } else {
        C64::from_polar(2.0, a - shift * shift) - t1 - t2
    };
    prefactor * bracket
}

/// Entry `(m, n)` of `R` from the error-function closed form.
pub fn correlation_entry_closed_form(m: i64, n: i64, geom: &ArrayGeometry, params: &LocalScattering) -> Result<C64> {
    params.validate()?;
    let coef = phase_coefficients(m, n, geom, params.nominal_angle, params.radius);
    Ok(quadratic_phase_average(coef, params.half_width) * params.beta)
}

/// Integrand used by the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Fresnel phase with exact `sin(vartheta+delta)`, `cos^2(vartheta+delta)`.
    Fresnel,
    /// The quadratic phase `a + b delta + c delta^2` the closed form integrates.
    SmallAngle,
}

/// Phase of entry `(m, n)` at angular offset `delta` under `kernel`.
pub fn entry_phase(kernel: Kernel, m: i64, n: i64, geom: &ArrayGeometry, params: &LocalScattering, delta: f64) -> f64 {
    match kernel {
        Kernel::Fresnel => {
            let k = geom.wavenumber();
            let d = geom.spacing;
            let theta = params.nominal_angle + delta;
            let cos = theta.cos();
            k * ((m - n) as f64 * d * theta.sin()
                + ((n * n - m * m) as f64) * d * d / (2.0 * params.radius) * cos * cos)
        }
        Kernel::SmallAngle => {
            let p = phase_coefficients(m, n, geom, params.nominal_angle, params.radius);
            p.a + delta * (p.b + p.c * delta)
        }
    }
}

/// Entry `(m, n)` by adaptive quadrature over the uniform angular density.
pub fn correlation_entry_quadrature(
    m: i64,
    n: i64,
    geom: &ArrayGeometry,
    params: &LocalScattering,
    kernel: Kernel,
    settings: QuadratureSettings,
) -> Result<C64> {
    params.validate()?;
    let phi = params.half_width;
    let density = 1.0 / (2.0 * phi);
    let out = integrate(
        |delta| C64::from_polar(params.beta * density, entry_phase(kernel, m, n, geom, params, delta)),
        -phi,
        phi,
        settings,
    )?;
    Ok(out.value)
}

/// Far-field (`d/r -> 0`) entry: planar phase times a sinc from the angular spread.
pub fn correlation_entry_farfield(m: i64, n: i64, geom: &ArrayGeometry, params: &LocalScattering) -> Result<C64> {
    params.validate()?;
    let k = geom.wavenumber();
    let diff = (m - n) as f64 * geom.spacing;
    let (s, c) = params.nominal_angle.sin_cos();
    Ok(C64::from_polar(
        params.beta * sinc(k * c * diff * params.half_width),
        k * diff * s,
    ))
}

/// Hermitian PSD correlation matrix with its sampling factor.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    /// `R`, exactly Hermitian, diagonal equal to `beta`.
    pub matrix: CMatrix,
    /// `L` with `L L^H` the eigen-clipped, trace-preserving version of `R`.
    pub factor: CMatrix,
    pub params: Option<LocalScattering>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl CorrelationMatrix {
    /// The all-zero matrix (no diffuse component).
    pub fn zero(num_antennas: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(num_antennas, num_antennas),
            factor: CMatrix::zeros(num_antennas, 0),
            params: None,
            min_eigenvalue: 0.0,
            max_eigenvalue: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        crate::linalg::real_trace(&self.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.factor.ncols() == 0
    }

    /// Writes the matrix as CSV: a parameter header then one
    /// `row,col,re,im` line per entry in row-major order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let p = self.params.unwrap_or(LocalScattering {
            nominal_angle: 0.0,
            half_width: 0.0,
            radius: 0.0,
            beta: 0.0,
        });
        let mut text = String::new();
        text.push_str("M,beta,nominal_angle,half_width,radius\n");
        text.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e}\nrow,col,re,im\n",
            self.dim(),
            p.beta,
            p.nominal_angle,
            p.half_width,
            p.radius
        ));
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                text.push_str(&format!("{i},{j},{:.17e},{:.17e}\n", z.re, z.im));
            }
        }
        out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Assembles `R` from the closed form, then factors it for sampling.
///
/// The lower triangle is the conjugate mirror of the upper one, so `R` is
/// exactly Hermitian. Eigenvalues in `[-1e-8 lambda_max, 0)` are clipped in
/// the factor; anything more negative fails with [`Error::NotPsd`].
pub fn build_correlation_matrix(geom: &ArrayGeometry, params: &LocalScattering) -> Result<CorrelationMatrix> {
    params.validate()?;
    let m = geom.num_antennas;
    if params.beta == 0.0 {
        let mut zero = CorrelationMatrix::zero(m);
        zero.params = Some(*params);
        return Ok(zero);
    }
    let mut matrix = CMatrix::zeros(m, m);
    for i in 0..m {
        matrix[(i, i)] = Complex64::new(params.beta, 0.0);
        for j in (i + 1)..m {
            let z = correlation_entry_closed_form(geom.element_index(i), geom.element_index(j), geom, params)?;
            matrix[(i, j)] = z;
            matrix[(j, i)] = z.conj();
        }
    }
    let f = psd_factor(&matrix)?;
    Ok(CorrelationMatrix {
        matrix,
        factor: f.factor,
        params: Some(*params),
        min_eigenvalue: f.min_eigenvalue,
        max_eigenvalue: f.max_eigenvalue,
    })
}
