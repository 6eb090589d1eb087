//! Gauss-Kronrod and Gauss-Legendre rules over real and complex segments.

use crate::C64;
use std::sync::OnceLock;

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
    0.209_482_141_084_728_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The fifteen Kronrod abscissae on [-1, 1] in increasing order.
pub fn gk15_nodes() -> [f64; 15] {
    let mut x = [0.0; 15];
    for j in 0..7 {
        x[j] = -XGK[j];
        x[14 - j] = XGK[j];
    }
    x
}

/// Kronrod and embedded Gauss weights aligned with [`gk15_nodes`].
/// Gauss weights are zero at the Kronrod-only abscissae.
pub fn gk15_weights() -> ([f64; 15], [f64; 15]) {
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for j in 0..7 {
        wk[j] = WGK[j];
        wk[14 - j] = WGK[j];
    }
    wk[7] = WGK[7];
    for j in 0..3 {
        wg[2 * j + 1] = WG[j];
        wg[13 - 2 * j] = WG[j];
    }
    wg[7] = WG[3];
    (wk, wg)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached 20-point rule used for short panel-interior integrals.
pub fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Adaptive GK15 on a real interval.
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64) {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    let (wk, wg) = gk15_weights();
    let xs = gk15_nodes();
    let whole = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, depth)) = stack.pop() {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut k = 0.0;
        let mut g = 0.0;
        for j in 0..15 {
            let v = f(c + h * xs[j]);
            k += wk[j] * v;
            g += wg[j] * v;
        }
        k *= h;
        g *= h;
        let err = (k - g).abs();
        let share = (hi - lo).abs() / whole;
        if err <= (abs_tol * share).max(rel_tol * k.abs()) || depth > 48 {
            total += k;
            err_total += err;
        } else {
            stack.push((c, hi, depth + 1));
            stack.push((lo, c, depth + 1));
        }
    }
    (total, err_total)
}

/// Adaptive GK15 of a complex function along the straight segment a→b.
pub fn integrate_segment<F: FnMut(C64) -> C64>(
    mut f: F,
    a: C64,
    b: C64,
    abs_tol: f64,
    rel_tol: f64,
) -> (C64, f64) {
    let mut stack = vec![(0.0f64, 1.0f64, 0u32)];
    let mut total = C64::new(0.0, 0.0);
    let mut err_total = 0.0;
    let (wk, wg) = gk15_weights();
    let xs = gk15_nodes();
    let d = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut k = C64::new(0.0, 0.0);
        let mut g = C64::new(0.0, 0.0);
        for j in 0..15 {
            let v = f(a + d * (c + h * xs[j]));
            k += v * wk[j];
            g += v * wg[j];
        }
        k *= d * h;
        g *= d * h;
        let err = (k - g).norm();
        if err <= (abs_tol * (hi - lo)).max(rel_tol * k.norm()) || depth > 48 {
            total += k;
            err_total += err;
        } else {
            stack.push((c, hi, depth + 1));
            stack.push((lo, c, depth + 1));
        }
    }
    (total, err_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_relative_eq!(s, 2.0 / 13.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let (wk, wg) = gk15_weights();
        assert_relative_eq!(wk.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(wg.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_real_handles_endpoint_singularity() {
        let (v, _) = integrate_real(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12);
        assert_relative_eq!(v, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn complex_segment_exp() {
        let a = C64::new(0.0, 0.0);
        let b = C64::new(1.0, 2.0);
        let (v, _) = integrate_segment(|z| z.exp(), a, b, 1e-14, 1e-14);
        let exact = b.exp() - a.exp();
        assert!((v - exact).norm() < 1e-12);
    }
}
