//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use alloc::vec;
use num_complex::Complex64;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Integral of a complex function over [a, b] to absolute accuracy `tol`.
/// Returns None when the interval budget runs out before convergence.
pub fn integrate_complex<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Option<ComplexEstimate> {
    let (v, e) = gk15(&mut f, a, b);
    let mut stack = vec![(a, b, v, e)];
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut budget = 20_000usize;
    let width = b - a;
    while let Some((lo, hi, v, e)) = stack.pop() {
        let share = tol * (hi - lo) / width;
        if e <= share.max(1e-15 * v.norm()) || hi - lo < 1e-12 * width {
            total += v;
            err += e;
            continue;
        }
        if budget == 0 {
            return None;
        }
        budget -= 1;
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        stack.push((lo, mid, v1, e1));
        stack.push((mid, hi, v2, e2));
    }
    Some(ComplexEstimate { value: total, error: err })
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Option<Estimate> {
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, tol).map(|e| Estimate { value: e.value.re, error: e.error })
}

/// Integral over [a, oo) through x = a + t / (1 - t).
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Option<Estimate> {
    integrate(
        |t| {
            let u = 1.0 - t;
            let y = f(a + t / u);
            if y == 0.0 {
                0.0
            } else {
                y / (u * u)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn integrate_complex_to_infinity<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, tol: f64) -> Option<ComplexEstimate> {
    integrate_complex(
        |t| {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        },
        0.0,
        1.0,
        tol,
    )
}
