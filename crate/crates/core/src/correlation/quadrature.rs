//! Globally adaptive Gauss-Kronrod (7/15) integration of complex-valued
//! integrands on a finite interval.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_evaluations: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOutcome {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> (Complex64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[lo, hi]`, bisecting the worst panel until the summed
/// error estimate drops below `settings.abs_tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    settings: QuadratureSettings,
) -> Result<QuadratureOutcome> {
    let mut evaluations = 0;
    let mut heap = BinaryHeap::new();
    // Start from a few panels so that oscillatory integrands are resolved
    // before the first error estimate is trusted.
    let initial = 8;
    let width = (hi - lo) / initial as f64;
    for i in 0..initial {
        let a = lo + width * i as f64;
        let b = if i + 1 == initial { hi } else { a + width };
        let (value, error) = kronrod(&f, a, b);
        evaluations += 15;
        heap.push(Panel {
            lo: a,
            hi: b,
            value,
            error,
        });
    }
    loop {
        let total_error: f64 = heap.iter().map(|p| p.error).sum();
        if total_error <= settings.abs_tol {
            let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
            return Ok(QuadratureOutcome {
                value,
                error_estimate: total_error,
                evaluations,
            });
        }
        if evaluations >= settings.max_evaluations {
            return Err(Error::Quadrature {
                lo,
                hi,
                error_estimate: total_error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = kronrod(&f, a, b);
            evaluations += 15;
            heap.push(Panel {
                lo: a,
                hi: b,
                value,
                error,
            });
        }
    }
}
