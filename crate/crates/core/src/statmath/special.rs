//! Gamma-family special functions, the chi-square distribution and the
//! standard normal CDF.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Chi-square distribution function with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain(
            "chi-square degrees of freedom must be positive".into(),
        ));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    Ok(gamma_p(0.5 * df as f64, 0.5 * x))
}

fn chi2_upper(x: f64, df: u32) -> f64 {
    gamma_q(0.5 * df as f64, 0.5 * x)
}

fn chi2_ln_pdf(x: f64, df: u32) -> f64 {
    let k = 0.5 * df as f64;
    (k - 1.0) * x.ln() - 0.5 * x - k * std::f64::consts::LN_2 - ln_gamma(k)
}

/// Inverse of [`chi2_cdf`]: the `x` with `chi2_cdf(x, df) = q`.
pub fn chi2_quantile(q: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain(
            "chi-square degrees of freedom must be positive".into(),
        ));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    // Work on whichever tail is smaller so the residual keeps relative precision.
    let upper = q > 0.5;
    let target = if upper { 1.0 - q } else { q };
    let resid = |x: f64| {
        if upper {
            target - chi2_upper(x, df)
        } else {
            chi2_cdf(x, df).unwrap() - target
        }
    };

    let (mut lo, mut hi) = (0.0_f64, (df as f64).max(1.0));
    while resid(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Wilson-Hilferty starting point, clamped into the bracket.
    let k = df as f64;
    let z = normal_quantile_approx(q);
    let wh = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
    let mut x = if wh > lo && wh < hi {
        wh
    } else {
        0.5 * (lo + hi)
    };

    for _ in 0..200 {
        let r = resid(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // Newton step on the cdf; fall back to bisection if it leaves the bracket.
        let pdf = chi2_ln_pdf(x, df).exp();
        let mut next = x - r / pdf;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    // Φ(z) = ½ erfc(-z/√2), erfc(t) = Q(½, t²) for t ≥ 0.
    let t = z / std::f64::consts::SQRT_2;
    if t <= 0.0 {
        0.5 * gamma_q(0.5, t * t)
    } else {
        1.0 - 0.5 * gamma_q(0.5, t * t)
    }
}

// Acklam-style rational approximation; only used to seed root finding.
fn normal_quantile_approx(p: f64) -> f64 {
    let t = if p < 0.5 { p } else { 1.0 - p };
    let s = (-2.0 * t.ln()).sqrt();
    let z = s
        - (2.515_517 + 0.802_853 * s + 0.010_328 * s * s)
            / (1.0 + 1.432_788 * s + 0.189_269 * s * s + 0.001_308 * s * s * s);
    if p < 0.5 {
        -z
    } else {
        z
    }
}
