//! Spatial correlation of a near-field scattering cluster: closed form against
//! direct quadrature and the far-field formula, plus the eigenvalue spread.
//!
//! `cargo run --example correlation_matrix`

use xlmimo::correlation::{
    build_correlation_matrix, correlation_entry_closed_form, correlation_entry_farfield, correlation_entry_quadrature,
    Kernel, LocalScattering, QuadratureSettings,
};
use xlmimo::linalg::hermitian_eigenvalues;
use xlmimo::scenario::ArrayGeometry;

pub fn run() -> xlmimo::Result<()> {
    let array = ArrayGeometry::half_wavelength(64, 0.15)?;
    let near = LocalScattering {
        nominal_angle: 0.3,
        half_width: 3f64.sqrt() * 10f64.to_radians(),
        radius: 40.0,
        beta: 1.0,
    };
    println!("{:>4} {:>4} {:>26} {:>26}", "m", "n", "closed form", "quadrature");
    for (m, n) in [(0, 0), (0, 1), (-10, 12), (-32, 31)] {
        let closed = correlation_entry_closed_form(m, n, &array, &near)?;
        let quad =
            correlation_entry_quadrature(m, n, &array, &near, Kernel::SmallAngle, QuadratureSettings::default())?;
        println!(
            "{m:>4} {n:>4} {:>12.8} {:>+12.8}i {:>12.8} {:>+12.8}i",
            closed.re, closed.im, quad.re, quad.im
        );
    }

    let far = LocalScattering { radius: 1e6, ..near };
    let worst = (-32..32)
        .flat_map(|m| (-32..32).map(move |n| (m, n)))
        .map(|(m, n)| {
            let c = correlation_entry_closed_form(m, n, &array, &far).unwrap();
            let f = correlation_entry_farfield(m, n, &array, &far).unwrap();
            (c - f).norm()
        })
        .fold(0.0, f64::max);
    println!("far field at 1e6 m: max entry deviation {worst:.2e}");

    for radius in [40.0, 230.0, 1e6] {
        let r = build_correlation_matrix(&array, &LocalScattering { radius, ..near })?;
        let mut eig = hermitian_eigenvalues(&r.matrix);
        eig.sort_by(|a, b| b.total_cmp(a));
        let dominant = eig.iter().take_while(|&&e| e > 1e-2 * eig[0]).count();
        println!(
            "r = {radius:>9} m: trace {:.3}, largest eigenvalues {:.3} {:.3} {:.3}, {dominant} above 1% of the largest",
            r.trace(),
            eig[0],
            eig[1],
            eig[2]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
