//! Thin wrappers over `libm` so the rest of the crate reads like `std` code.

pub use core::f64::consts::{FRAC_PI_3, PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> crate::Complex {
    crate::Complex::new(cos(theta), sin(theta))
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (the 7-point rule).
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> crate::Complex>(f: &F, a: f64, b: f64) -> (crate::Complex, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k = fc * GK_WEIGHTS_K[7];
    let mut g = fc * GK_WEIGHTS_G[3];
    for i in 0..7 {
        let x = half * GK_NODES[i];
        let s = f(mid - x) + f(mid + x);
        k += s * GK_WEIGHTS_K[i];
        if i % 2 == 1 {
            g += s * GK_WEIGHTS_G[i / 2];
        }
    }
    (k * half, ((k - g) * half).norm())
}

/// Quadrature did not reach the requested tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureFailure {
    pub estimate: f64,
}

/// Adaptive Gauss–Kronrod integral of a complex-valued `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> crate::Complex>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<crate::Complex, QuadratureFailure> {
    let mut total = crate::Complex::new(0.0, 0.0);
    let mut err_total = 0.0;
    let mut stack = alloc::vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        // local budget proportional to the interval length
        if err <= tol * (hi - lo) / (b - a) || depth >= 40 {
            if depth >= 40 && err > tol {
                return Err(QuadratureFailure { estimate: err });
            }
            total += v;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    if err_total.is_finite() {
        Ok(total)
    } else {
        Err(QuadratureFailure { estimate: err_total })
    }
}

/// All complex roots of the polynomial `Σ coeffs[k] z^k` (Durand–Kerner).
/// Returns `None` if the iteration does not settle.
pub fn poly_roots(coeffs: &[crate::Complex]) -> Option<alloc::vec::Vec<crate::Complex>> {
    use crate::Complex;
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().checked_sub(1)?;
    if n == 0 {
        return Some(alloc::vec::Vec::new());
    }
    let lead = c[n];
    let monic: alloc::vec::Vec<Complex> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex| monic.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex::new(0.4, 0.9);
    let mut roots: alloc::vec::Vec<Complex> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            return Some(roots);
        }
    }
    let residual = roots.iter().map(|&z| eval(z).norm()).fold(0.0, f64::max);
    (residual < 1e-12).then_some(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex;

    #[test]
    fn integrates_polynomials_and_oscillations() {
        let v = integrate(|x| Complex::new(x * x, 0.0), 0.0, 3.0, 1e-14).unwrap();
        assert!((v.re - 9.0).abs() < 1e-13 && v.im == 0.0);
        let v = integrate(|x| cis(10.0 * x), 0.0, PI, 1e-13).unwrap();
        assert!((v - Complex::new(0.0, 0.0)).norm() < 1e-12);
        let e = integrate(|x| Complex::new(1.0 / sqrt(x.max(1e-300)), 0.0), 0.0, 1.0, 1e-14);
        assert!(e.is_err(), "an endpoint singularity should exhaust the refinement budget");
    }

    #[test]
    fn roots_of_unity() {
        let mut c = alloc::vec![Complex::new(0.0, 0.0); 7];
        c[0] = Complex::new(-1.0, 0.0);
        c[6] = Complex::new(1.0, 0.0);
        let r = poly_roots(&c).unwrap();
        assert_eq!(r.len(), 6);
        for k in 0..6 {
            let target = cis(k as f64 * FRAC_PI_3);
            assert!(r.iter().any(|z| (z - target).norm() < 1e-13));
        }
    }
}
