//! Poisson variates that stay exact at photon counts of 1e10 and beyond.
//!
//! Small means use sequential inversion; large means use Hörmann's PTRS
//! transformed rejection. The acceptance test evaluates `log P(k; λ)` through
//! Loader's saddle-point form (`bd0` + Stirling remainder), so no term of
//! size `λ log λ` is ever cancelled in floating point.

use std::f64::consts::PI;

use rand::Rng;

const INVERSION_LIMIT: f64 = 10.0;

/// Remainder `ln k! − (k + ½) ln k + k − ½ ln 2π` of Stirling's series.
fn stirling_remainder(k: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if k <= 15.0 {
        return libm::lgamma(k + 1.0) - (k + 0.5) * k.ln() + k - 0.5 * (2.0 * PI).ln();
    }
    let k2 = k * k;
    if k > 500.0 {
        (S0 - S1 / k2) / k
    } else if k > 80.0 {
        (S0 - (S1 - S2 / k2) / k2) / k
    } else if k > 35.0 {
        (S0 - (S1 - (S2 - S3 / k2) / k2) / k2) / k
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / k2) / k2) / k2) / k2) / k
    }
}

/// `k ln(k/λ) + λ − k`, accurate when `k ≈ λ`.
fn bd0(k: f64, lambda: f64) -> f64 {
    let diff = k - lambda;
    if diff.abs() < 0.1 * (k + lambda) {
        let v = diff / (k + lambda);
        let mut s = diff * v;
        let mut ej = 2.0 * k * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return s;
            }
            s = next;
        }
        s
    } else {
        k * (k / lambda).ln() + lambda - k
    }
}

/// `ln P(K = k)` for `K ~ Poisson(λ)`, `λ > 0`.
pub fn log_pmf(k: u64, lambda: f64) -> f64 {
    if k == 0 {
        return -lambda;
    }
    let k = k as f64;
    -stirling_remainder(k) - bd0(k, lambda) - 0.5 * (2.0 * PI * k).ln()
}

/// Draws one Poisson variate with mean `lambda` (`lambda <= 0` or NaN gives 0).
pub fn sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 0;
    }
    if lambda < INVERSION_LIMIT {
        return inversion(lambda, rng);
    }
    ptrs(lambda, rng)
}

fn inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let mut u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    loop {
        if u <= p {
            return k;
        }
        u -= p;
        k += 1;
        p *= lambda / k as f64;
        if p == 0.0 {
            // Rounding leftovers in the far tail.
            return k;
        }
    }
}

fn ptrs<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let slam = lambda.sqrt();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= log_pmf(k as u64, lambda) {
            return k as u64;
        }
    }
}
