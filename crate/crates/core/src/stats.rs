//! Small statistical toolbox: Wilson intervals, standard-error intervals,
//! log-log slope fits, chi-square and Kolmogorov-Smirnov goodness of fit.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
/// Returns `(estimate, lo, hi)` with the plain frequency as the estimate.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64, f64) {
    if trials == 0 {
        return (f64::NAN, 0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z_95 / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (p, (center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean with a 95% standard-error interval.
pub fn mean_interval(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, mean, mean);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half = Z_95 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// Least-squares slope of `log y` against `log x`, restricted to strictly
/// positive pairs. `None` when fewer than two usable points remain.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|&(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Pearson chi-square statistic and p-value for observed counts against
/// expected counts. Bins are merged greedily from the right until every
/// expected count is at least `min_expected`; degrees of freedom are
/// `bins - 1 - df_penalty` (use `df_penalty = 0` when no parameter was
/// estimated from the data).
pub fn chi_square_gof(
    observed: &[u64],
    expected: &[f64],
    min_expected: f64,
    df_penalty: usize,
) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len());
    let mut merged_obs: Vec<f64> = Vec::new();
    let mut merged_exp: Vec<f64> = Vec::new();
    for (&o, &e) in observed.iter().zip(expected) {
        merged_obs.push(o as f64);
        merged_exp.push(e);
        // keep merging the two right-most bins while the tail is thin
        while merged_exp.len() > 1 && *merged_exp.last().unwrap() < min_expected {
            let o_last = merged_obs.pop().unwrap();
            let e_last = merged_exp.pop().unwrap();
            *merged_obs.last_mut().unwrap() += o_last;
            *merged_exp.last_mut().unwrap() += e_last;
        }
    }
    // the left-most bin can still be thin after the sweep
    while merged_exp.len() > 1 && merged_exp[0] < min_expected {
        let o = merged_obs.remove(0);
        let e = merged_exp.remove(0);
        merged_obs[0] += o;
        merged_exp[0] += e;
    }
    let statistic: f64 = merged_obs
        .iter()
        .zip(&merged_exp)
        .map(|(&o, &e)| if e > 0.0 { (o - e) * (o - e) / e } else { 0.0 })
        .sum();
    let bins = merged_obs.len();
    let df = bins.saturating_sub(1 + df_penalty).max(1);
    let p_value = if bins < 2 {
        1.0
    } else {
        let dist = ChiSquared::new(df as f64).expect("positive dof");
        1.0 - dist.cdf(statistic)
    };
    ChiSquareResult {
        statistic,
        df,
        bins,
        p_value,
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub bins: usize,
    pub p_value: f64,
}

/// CDF of the Kolmogorov distribution, `P(sqrt(n) D_n <= x)` asymptotically.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.05 {
        return 0.0;
    }
    // alternating series 1 - 2 Σ (-1)^{k-1} exp(-2 k^2 x^2)
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic of `samples` against a CDF, plus the asymptotic
/// p-value. Returns `None` for an empty sample.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max((f - i as f64 / n).abs());
        stat = stat.max(((i + 1) as f64 / n - f).abs());
    }
    let p = 1.0 - kolmogorov_cdf(n.sqrt() * stat);
    Some((stat, p))
}

/// Empirical quantile by linear interpolation on the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}
