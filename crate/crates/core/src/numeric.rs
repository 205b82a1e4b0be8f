//! Small numerical kernels shared by the operators: compensated summation,
//! log-scale combinatorics, a positive-argument confluent hypergeometric
//! series and adaptive Gauss-Kronrod quadrature.

use statrs::function::gamma::ln_gamma;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficient as a float, exact for small arguments.
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut c = 1.0f64;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c.round()
    } else {
        ln_choose(n, k).exp()
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln(exp(x) + exp(y))` without overflow.
pub fn ln_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln 1F1(a; b; z)` for `a, b > 0` and `z >= 0`, summed as a series of
/// positive terms with running rescaling.
pub fn ln_hyp1f1_positive(a: f64, b: f64, z: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    const RESCALE: f64 = 1e200;
    let mut offset = 0.0f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut j = 0.0f64;
    loop {
        let ratio = (a + j) / (b + j) * z / (j + 1.0);
        term *= ratio;
        sum += term;
        j += 1.0;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            offset += RESCALE.ln();
        }
        if ratio < 1.0 && term <= sum * 1e-17 {
            break;
        }
        if j > 1e7 {
            break;
        }
    }
    offset + sum.ln()
}

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of a smooth integrand on
/// `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: (f64, f64),
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (value, err) = whole;
        // the estimate cannot fall below the roundoff of the rule itself
        if err <= tol || err <= 64.0 * f64::EPSILON * value.abs() || depth == 0 || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) {
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = gk15(f, a, mid);
        let right = gk15(f, mid, b);
        recurse(f, a, mid, left, 0.5 * tol, depth - 1)
            + recurse(f, mid, b, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gk15(&f, a, b);
    recurse(&f, a, b, whole, abs_tol, 40)
}

/// `ln ∫_0^∞ u^m (1+u)^c e^{-r u} du` for integer `m >= 0`, real `c` and
/// `r > 0`, integrated in log-scale around the peak of the integrand.
pub fn ln_laplace_poly(m: u64, c: f64, r: f64) -> f64 {
    let mf = m as f64;
    let phi = |u: f64| -> f64 {
        let lead = if m == 0 { 0.0 } else { mf * u.ln() };
        lead + c * u.ln_1p() - r * u
    };
    // stationary point of phi on [0, inf)
    let peak = if m == 0 {
        ((c - r) / r).max(0.0)
    } else {
        let lin = r - mf - c;
        (-lin + (lin * lin + 4.0 * r * mf).sqrt()) / (2.0 * r)
    };
    let peak_val = phi(peak);
    let curvature = if m == 0 && peak == 0.0 {
        0.0
    } else {
        mf / (peak * peak).max(f64::MIN_POSITIVE) + c / ((1.0 + peak) * (1.0 + peak))
    };
    let width = if curvature > 0.0 {
        (1.0 / curvature.sqrt()).max(1e-300)
    } else {
        1.0 / r
    };
    // walk outward until the integrand has dropped by e^-60
    let drop = 60.0;
    let mut lo = peak;
    let mut step = width;
    while lo > 0.0 && phi(lo) - peak_val > -drop {
        lo = (lo - step).max(0.0);
        step *= 2.0;
    }
    let mut hi = peak + width;
    step = width;
    while phi(hi) - peak_val > -drop {
        hi += step;
        step *= 2.0;
    }
    let g = |u: f64| -> f64 {
        if u <= 0.0 && m > 0 {
            0.0
        } else {
            (phi(u) - peak_val).exp()
        }
    };
    // split at the peak so each half is monotone-ish
    let mut total = 0.0;
    let knots = [lo, (peak - 4.0 * width).max(lo), peak.max(lo), (peak + 4.0 * width).min(hi), hi];
    for w in knots.windows(2) {
        if w[1] > w[0] {
            total += integrate(g, w[0], w[1], 1e-16 * (hi - lo).max(width));
        }
    }
    peak_val + total.ln()
}
