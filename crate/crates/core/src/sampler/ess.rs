//! Effective sample size from the integrated autocorrelation time, using the
//! multi-chain autocorrelation estimate and Geyer's initial positive
//! (monotone) sequence truncation.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::reduce::tree_sum;

/// Biased autocovariance of one chain at all lags, computed by FFT.
pub fn autocovariance(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = x
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf[..n].iter().map(|v| v.re / (size as f64 * n as f64)).collect()
}

/// Mean and unbiased variance of a slice.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Effective sample size of the pooled draws of several equal-length chains.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m == 0 || n < 4 {
        return 0.0;
    }
    let total = (m * n) as f64;
    let stats: Vec<(f64, f64)> = chains.iter().map(|c| mean_var(&c[..n])).collect();
    let w = tree_sum(&stats.iter().map(|s| s.1).collect::<Vec<_>>()) / m as f64;
    if !(w > 0.0) {
        // Constant chains carry no autocorrelation information.
        return total;
    }
    let b_over_n = if m > 1 {
        let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
        mean_var(&means).1
    } else {
        0.0
    };
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b_over_n;

    let acov: Vec<Vec<f64>> = chains.iter().map(|c| autocovariance(&c[..n])).collect();
    let rho = |t: usize| -> f64 {
        let mean_acov = acov.iter().map(|a| a[t]).sum::<f64>() / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };

    let mut sum = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho(2 * k) + rho(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum += pair;
        prev_pair = pair;
        k += 1;
    }
    let tau = (-1.0 + 2.0 * sum).max(1.0 / total.log10().max(1.0));
    total / tau
}
