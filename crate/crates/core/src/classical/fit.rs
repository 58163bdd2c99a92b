//! Least-squares `sech^2` fit of the total intensity profile.

use super::Field2;
use crate::{Error, Result};

/// Grid position of the intensity maximum.
pub(crate) fn peak_position(field: &Field2) -> f64 {
    let int = field.intensity();
    let k = int
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    field.z(k)
}

fn count_peaks(int: &[f64], floor: f64) -> usize {
    let m = int.len();
    (0..m)
        .filter(|&k| {
            let prev = int[(k + m - 1) % m];
            let next = int[(k + 1) % m];
            int[k] > floor && int[k] > prev && int[k] >= next
        })
        .count()
}

fn model(z: f64, p: &[f64; 3]) -> f64 {
    let s = 1.0 / ((z - p[1]) / p[2]).cosh();
    p[0] * s * s
}

/// Returns the width `W` of the best fit `I0 sech^2((z - z0) / W)` to
/// `|u|^2 + |v|^2`.
pub fn fit_soliton_width(field: &Field2) -> Result<f64> {
    let int = field.intensity();
    let peak = int.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Fit("field is zero".into()));
    }
    if count_peaks(&int, 0.05 * peak) != 1 {
        return Err(Error::Fit("intensity profile is not single-peaked".into()));
    }
    let z0 = peak_position(field);
    // FWHM of sech^2 is 2 acosh(sqrt 2) W.
    let above = int.iter().filter(|&&i| i >= 0.5 * peak).count() as f64 * field.dz();
    let w0 = (above / (2.0 * 2f64.sqrt().acosh())).max(field.dz());
    let zs: Vec<f64> = (0..int.len()).map(|k| field.z(k)).collect();

    let mut p = [peak, z0, w0];
    let cost = |p: &[f64; 3]| -> f64 { zs.iter().zip(&int).map(|(z, i)| (model(*z, p) - i).powi(2)).sum() };
    let mut current = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        // Gauss-Newton normal equations with Levenberg damping.
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (z, i) in zs.iter().zip(&int) {
            let x = (z - p[1]) / p[2];
            let s = 1.0 / x.cosh();
            let s2 = s * s;
            let th = x.tanh();
            let f = p[0] * s2;
            let grad = [s2, 2.0 * f * th / p[2], 2.0 * f * th * x / p[2]];
            let r = f - i;
            for a in 0..3 {
                jtr[a] += grad[a] * r;
                for b in 0..3 {
                    jtj[a][b] += grad[a] * grad[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj;
            for d in 0..3 {
                a[d][d] *= 1.0 + lambda;
            }
            let Some(step) = solve3(a, jtr) else { break };
            let trial = [p[0] - step[0], p[1] - step[1], p[2] - step[2]];
            if trial[2] > 0.0 {
                let c = cost(&trial);
                if c < current {
                    let rel = (current - c) / current.max(f64::MIN_POSITIVE);
                    p = trial;
                    current = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let total: f64 = int.iter().map(|i| i * i).sum();
    if current > 0.05 * total {
        return Err(Error::Fit(format!(
            "poor sech^2 fit: residual fraction {:.3}",
            current / total
        )));
    }
    Ok(p[2])
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for col in 0..3 {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        x[col] = det(&m) / d;
    }
    Some(x)
}
