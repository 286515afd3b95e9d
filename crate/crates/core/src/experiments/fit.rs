use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Least-squares fit of `A |cos(ω t)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineFit {
    pub frequency: f64,
    pub amplitude: f64,
    /// RMS of the fit residuals.
    pub residual: f64,
    /// One-sigma frequency uncertainty from the residual and the curvature.
    pub uncertainty: f64,
    /// Set for a flat series, where the frequency is reported as zero.
    pub constant: bool,
}

/// (amplitude, sum of squared residuals) at fixed ω.
fn solve(t: &[f64], v: &[f64], w: f64) -> (f64, f64) {
    let (mut cv, mut cc) = (0.0, 0.0);
    for (ti, vi) in t.iter().zip(v) {
        let c = (w * ti).cos().abs();
        cv += c * vi;
        cc += c * c;
    }
    let a = if cc > 0.0 { cv / cc } else { 0.0 };
    let ssr = t.iter().zip(v).map(|(ti, vi)| (vi - a * (w * ti).cos().abs()).powi(2)).sum();
    (a, ssr)
}

/// Global frequency scan followed by golden-section refinement. The series
/// must cover at least two periods of cos(ω t) with 16 samples per period.
pub fn fit_cosine(t: &[f64], v: &[f64]) -> Result<CosineFit> {
    let n = t.len();
    if n != v.len() {
        return domain(format!("{n} times but {} values", v.len()));
    }
    if n < 32 {
        return Err(Error::Undersampled(format!("{n} samples cannot hold two periods at 16 per period")));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
        return domain("times must increase strictly and values must be finite");
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = v.iter().sum::<f64>() / n as f64;
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
        let residual = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        return Ok(CosineFit { frequency: 0.0, amplitude: mean, residual, uncertainty: 0.0, constant: true });
    }
    let span = t[n - 1] - t[0];
    let h = span / (n - 1) as f64;
    let step = std::f64::consts::PI / (8.0 * span);
    let top = std::f64::consts::PI / (2.0 * h);
    let cells = (top / step).ceil() as usize;
    let (mut best, mut best_ssr) = (step, f64::INFINITY);
    for i in 1..=cells {
        let w = i as f64 * step;
        let ssr = solve(t, v, w).1;
        if ssr < best_ssr {
            best = w;
            best_ssr = ssr;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best - step).max(0.5 * step), best + step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (solve(t, v, c).1, solve(t, v, d).1);
    while b - a > 1e-13 * best {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = solve(t, v, c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = solve(t, v, d).1;
        }
    }
    let w = 0.5 * (a + b);
    let (amp, ssr) = solve(t, v, w);
    let periods = w * span / (2.0 * std::f64::consts::PI);
    let per_period = 2.0 * std::f64::consts::PI / (w * h);
    if periods < 2.0 || per_period < 16.0 {
        return Err(Error::Undersampled(format!(
            "fitted ω = {w:e} gives {periods:.2} periods at {per_period:.1} samples per period (need ≥ 2 and ≥ 16)"
        )));
    }
    // sensitivity of the model to ω
    let jj: f64 = t
        .iter()
        .map(|&ti| {
            let (s, c) = (w * ti).sin_cos();
            (amp * ti * s * c.signum()).powi(2)
        })
        .sum();
    let sigma2 = ssr / (n - 2) as f64;
    Ok(CosineFit {
        frequency: w,
        amplitude: amp,
        residual: (ssr / n as f64).sqrt(),
        uncertainty: (sigma2 / jj).sqrt(),
        constant: false,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn samples(w: f64, periods: f64, per_period: usize) -> Vec<f64> {
        let n = (periods * per_period as f64) as usize + 1;
        let dt = 2.0 * std::f64::consts::PI / (w * per_period as f64);
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn recovers_clean_frequency() {
        let t = samples(3.0, 3.0, 32);
        let v: Vec<f64> = t.iter().map(|x| (3.0 * x).cos().abs()).collect();
        let f = fit_cosine(&t, &v).unwrap();
        assert!((f.frequency - 3.0).abs() < 1e-4, "{f:?}");
        assert!((f.amplitude - 1.0).abs() < 1e-6);
        assert!(f.residual < 1e-8);
        assert!(!f.constant);
    }

    #[test]
    fn tolerates_one_percent_noise() {
        // ten noise realizations; the worst defines the stated tolerance
        let t = samples(3.0, 3.0, 32);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = t
                .iter()
                .map(|x| {
                    let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
                    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                    (3.0 * x).cos().abs() + 0.01 * z
                })
                .collect();
            let f = fit_cosine(&t, &v).unwrap();
            assert!((f.frequency - 3.0).abs() < 1e-2, "seed {seed}: {f:?}");
            assert!((f.frequency - 3.0).abs() < 5.0 * f.uncertainty + 1e-3);
        }
    }

    #[test]
    fn constant_series_is_flagged() {
        let t = samples(1.0, 3.0, 20);
        let f = fit_cosine(&t, &vec![0.7; t.len()]).unwrap();
        assert!(f.constant);
        assert_eq!(f.frequency, 0.0);
        assert!((f.amplitude - 0.7).abs() < 1e-14, "{}", f.amplitude);
    }

    #[test]
    fn undersampled_series_rejected() {
        let t = samples(2.0, 1.5, 32);
        let v: Vec<f64> = t.iter().map(|x| (2.0 * x).cos().abs()).collect();
        assert!(matches!(fit_cosine(&t, &v), Err(Error::Undersampled(_))));
        let t = samples(2.0, 6.0, 8);
        let v: Vec<f64> = t.iter().map(|x| (2.0 * x).cos().abs()).collect();
        assert!(matches!(fit_cosine(&t, &v), Err(Error::Undersampled(_))));
        assert!(fit_cosine(&[0.0, 1.0], &[1.0]).is_err());
    }
}
