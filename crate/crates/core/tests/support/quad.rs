//! Adaptive 7/15-point Gauss–Kronrod quadrature.

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
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Global adaptive bisection: always split the subinterval with the largest
/// error estimate. Endpoint log singularities cost a few dozen splits instead
/// of an exponential recursion.
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        // Below ~1e-13 relative the estimate is rounding noise.
        if err <= tol.max(1e-13 * total.abs()) || parts.len() >= MAX_INTERVALS {
            return total;
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return total;
        }
        for (x, y) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(f, x, y);
            parts.push((x, y, v, e));
        }
    }
}

/// ∫ₐᵇ f with absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol)
}

/// ∫₀^∞ g(x) dx through x = eᵘ over `u ∈ [lo, hi]`.
pub fn integrate_positive(g: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    integrate(|u| g(u.exp()) * u.exp(), lo, hi, tol)
}
