//! Small statistics helpers: jackknife error of a mean, one-sample
//! Kolmogorov–Smirnov test, Gaussian CDF.

use serde::Serialize;

/// `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Jackknife standard error of the sample mean; `None` with fewer than two
/// observations.
pub fn jackknife_std_error(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let total: f64 = xs.iter().sum();
    let nf = n as f64;
    let loo: Vec<f64> = xs.iter().map(|x| (total - x) / (nf - 1.0)).collect();
    let mean_loo = loo.iter().sum::<f64>() / nf;
    let var = (nf - 1.0) / nf * loo.iter().map(|v| (v - mean_loo).powi(2)).sum::<f64>();
    Some(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

/// One-sample Kolmogorov–Smirnov test of `samples` against `cdf`, with the
/// asymptotic Kolmogorov p-value (Stephens' small-sample correction).
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsOutcome {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    let en = nf.sqrt();
    KsOutcome { statistic: d, p_value: kolmogorov_tail((en + 0.12 + 0.11 / en) * d), samples: n }
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
