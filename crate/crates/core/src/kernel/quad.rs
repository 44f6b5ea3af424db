//! Adaptive Gauss–Kronrod quadrature and the closed-form large-time tail.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use statrs::function::erf::erfc;

/// A computed value together with an estimate of its absolute error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub est_error: f64,
}

impl Estimate {
    pub fn add(self, other: Estimate) -> Estimate {
        Estimate { value: self.value + other.value, est_error: self.est_error + other.est_error }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// The 15 Kronrod nodes and weights mapped to `[a, b]`.
pub(crate) fn kronrod_rule(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..15).map(move |i| {
        let k = if i < 8 { i } else { 14 - i };
        let sign = if i < 8 { -1.0 } else { 1.0 };
        (c + sign * h * XGK[k], h * WGK[k])
    })
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, bisecting the panel with
/// the largest error until `err <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Estimate {
    const MAX_PANELS: usize = 20_000;
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if err <= abs_tol.max(rel_tol * value.abs()) || heap.len() >= MAX_PANELS {
            return Estimate { value, est_error: err };
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let value: f64 = heap.iter().map(|p| p.value).sum();
            return Estimate { value, est_error: err };
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&f, a, b);
            heap.push(Panel { a, b, value, err });
        }
    }
}

/// Breakpoints `0, 1/16, 1/8, ..., upper` (doubling) for integrands with structure on all scales.
pub fn log_breaks(upper: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut s = 1.0 / 16.0;
    while s < upper {
        out.push(s);
        s *= 2.0;
    }
    out.push(upper);
    out
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn exp_int_e1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..200 {
            term *= -x / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER - x.ln() - sum
    } else {
        (-x).exp() * gamma_cf(0.0, x)
    }
}

/// Continued fraction for `e^x x^{-a} Gamma(a, x)` (modified Lentz), valid for `x > 0`.
fn gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Upper incomplete gamma `Gamma(b, x)` for `x > 0` and `b` a half-integer or integer `<= 1/2`.
pub fn upper_gamma(b: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0 && b <= 0.5 && (2.0 * b).fract() == 0.0);
    if x > 1.0 {
        return (-x + b * x.ln()).exp() * gamma_cf(b, x);
    }
    // Downward recurrence Gamma(b, x) = (Gamma(b + 1, x) - x^b e^{-x}) / b from the base case.
    let (mut cur, mut beta) = if b.fract() == 0.0 {
        (exp_int_e1(x), 0.0)
    } else {
        (std::f64::consts::PI.sqrt() * erfc(x.sqrt()), 0.5)
    };
    while beta > b + 0.5 {
        beta -= 1.0;
        cur = (cur - x.powf(beta) * (-x).exp()) / beta;
    }
    cur
}

/// `int_T^inf s^{-a} e^{-lambda s} ds`; `None` if it diverges.
pub fn power_exp_tail(a: f64, lambda: f64, t: f64) -> Option<f64> {
    if lambda == 0.0 {
        return (a > 1.0).then(|| t.powf(1.0 - a) / (a - 1.0));
    }
    let x = lambda * t;
    if x > 700.0 {
        return Some(0.0);
    }
    Some(lambda.powf(a - 1.0) * upper_gamma(1.0 - a, x))
}

/// Coefficients `c_k` with `e^{-2s} I_nu(2s) ~ (4 pi s)^{-1/2} sum_k c_k s^{-k}`.
pub fn bessel_asymptotic_coeffs(nu: u64, terms: usize) -> Vec<f64> {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let mut out = Vec::with_capacity(terms);
    let mut c = 1.0;
    out.push(c);
    for k in 1..terms {
        let odd = (2 * k - 1) as f64;
        // a_k = a_{k-1} (mu - (2k-1)^2) / (8k); x = 2s and alternating sign.
        c *= -(mu - odd * odd) / (8.0 * k as f64) / 2.0;
        out.push(c);
    }
    out
}
