//! Scalar special functions shared by the oracles and the pipeline.

use std::f64::consts::{FRAC_PI_2, PI};

/// `ln(n!)` for every `n <= max`, built by cumulative summation.
pub fn ln_factorial_table(max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        table.push(acc);
    }
    table
}

/// `ln(n!)`, exact summation for small `n` and Stirling's series beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        let mut acc = 0.0;
        for i in 2..=n {
            acc += (i as f64).ln();
        }
        return acc;
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ln Gamma(x), x >= 257: the series is accurate to machine precision here.
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Natural log of a sum of exponentials without overflow.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Sine integral `Si(x) = ∫_0^x sin(t)/t dt`.
///
/// Power series below |x| = 2, continued fraction for `E1(ix)` above
/// (modified Lentz), both converged to double precision.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax < 1e-300 {
        0.0
    } else if ax <= 2.0 {
        let mut sum = 0.0;
        let mut term = ax;
        let x2 = ax * ax;
        let mut n = 0usize;
        loop {
            let contribution = term / (2 * n + 1) as f64;
            sum += contribution;
            if contribution.abs() < 1e-17 * sum.abs() {
                break;
            }
            n += 1;
            term *= -x2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            if n > 60 {
                break;
            }
        }
        sum
    } else {
        // E1(i x) = -Ci(x) + i (Si(x) - pi/2) via the continued fraction
        // 1/(1 + ix - 1/(3 + ix - 4/(5 + ix - ...))) times e^{-ix}.
        let tiny = 1e-300;
        let mut b = (1.0, ax);
        let mut c = (1.0 / tiny, 0.0);
        let mut d = cinv(b);
        let mut h = d;
        let mut i = 1usize;
        loop {
            let a = -((i * i) as f64);
            b = (b.0 + 2.0, b.1);
            d = cinv(cadd(cscale(d, a), b));
            c = cadd(b, cscale(cinv(c), a));
            let del = cmul(c, d);
            h = cmul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < 1e-16 {
                break;
            }
            i += 1;
            if i > 100_000 {
                break;
            }
        }
        let phase = (ax.cos(), -ax.sin());
        let e1 = cmul(phase, h);
        // Si = pi/2 + Im E1(ix)
        FRAC_PI_2 + e1.1
    };
    value.copysign(x)
}

fn cadd(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}

fn cscale(a: (f64, f64), s: f64) -> (f64, f64) {
    (a.0 * s, a.1 * s)
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cinv(a: (f64, f64)) -> (f64, f64) {
    let n = a.0 * a.0 + a.1 * a.1;
    (a.0 / n, -a.1 / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_si(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let f = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn sine_integral_matches_direct_quadrature() {
        for &x in &[0.1, 0.7, 1.9, 2.0, 2.1, 3.5, 7.0, 15.0, 40.0] {
            let got = sine_integral(x);
            let want = simpson_si(x);
            assert!((got - want).abs() < 1e-12, "x = {x}: {got} vs {want}");
            assert_eq!(sine_integral(-x), -got);
        }
    }

    #[test]
    fn sine_integral_tends_to_half_pi() {
        let x = 1e6;
        // Si(x) = pi/2 - cos(x)/x + O(x^-2)
        assert!((sine_integral(x) - (FRAC_PI_2 - x.cos() / x)).abs() < 1e-11);
    }

    #[test]
    fn ln_factorial_branches_agree() {
        let table = ln_factorial_table(400);
        for n in [0usize, 1, 5, 100, 255, 256, 300, 400] {
            assert!((ln_factorial(n as u64) - table[n]).abs() < 1e-10 * table[n].max(1.0));
        }
    }

    #[test]
    fn log_sum_exp_handles_large_arguments() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
