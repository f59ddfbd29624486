use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean survival over repetitions at one sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RBPoint {
    pub length: usize,
    pub survival: f64,
    pub stderr: f64,
}

impl RBPoint {
    /// Mean and standard error of per-repetition survivals.
    pub fn from_samples(length: usize, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            length,
            survival: mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// `survival(m) = A·alpha^m + B` with `r = (d−1)(1−alpha)/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub r: f64,
    pub r_stderr: f64,
    /// RMS of the fit residuals.
    pub residual: f64,
    pub dimension: usize,
}

fn model(p: &Vector3<f64>, m: f64) -> f64 {
    p[0] * p[2].powf(m) + p[1]
}

fn jacobian_row(p: &Vector3<f64>, m: f64) -> Vector3<f64> {
    let da = p[2].powf(m);
    let dalpha = if m == 0.0 {
        0.0
    } else {
        p[0] * m * p[2].powf(m - 1.0)
    };
    Vector3::new(da, 1.0, dalpha)
}

fn sse(p: &Vector3<f64>, pts: &[RBPoint]) -> f64 {
    pts.iter()
        .map(|q| (model(p, q.length as f64) - q.survival).powi(2))
        .sum()
}

/// Unweighted Levenberg–Marquardt fit of `A·alpha^m + B`.
///
/// Starts from `A = s(m_min) − s(m_max)`, `B = s(m_max)` and `alpha` from a
/// log-linear regression of `s − B`; `alpha` is kept in `[0, 1]`.
pub fn fit_decay(points: &[RBPoint], d: usize) -> Result<DecayFit> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.length);
    let distinct = pts
        .windows(2)
        .filter(|w| w[0].length != w[1].length)
        .count()
        + usize::from(!pts.is_empty());
    if distinct < 3 {
        return Err(Error::Fit {
            message: format!("need at least 3 distinct lengths, got {distinct}"),
            residual: f64::NAN,
        });
    }
    if d < 2 {
        return Err(Error::Domain(format!("system dimension {d} must be >= 2")));
    }
    let df = d as f64;
    let (first, last) = (pts[0], pts[pts.len() - 1]);

    let spread = pts
        .iter()
        .map(|p| p.survival)
        .fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.survival).fold(f64::INFINITY, f64::min);
    if spread < 1e-12 {
        return Ok(DecayFit {
            a: 0.0,
            b: last.survival,
            alpha: 1.0,
            alpha_stderr: 0.0,
            r: 0.0,
            r_stderr: 0.0,
            residual: 0.0,
            dimension: d,
        });
    }

    let a0 = first.survival - last.survival;
    let b0 = last.survival;
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| (p.survival - b0) * a0.signum() > 1e-12)
        .map(|p| (p.length as f64, ((p.survival - b0) / a0).abs().ln()))
        .collect();
    let alpha0 = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
        let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
        if sxx > 0.0 {
            (sxy / sxx).exp()
        } else {
            0.99
        }
    } else {
        0.99
    };
    let init = Vector3::new(a0, b0, alpha0.clamp(1e-6, 1.0));
    let mut p = init;
    let mut cost = sse(&p, &pts);
    let mut mu = 1e-3;
    for _ in 0..500 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for q in &pts {
            let m = q.length as f64;
            let j = jacobian_row(&p, m);
            jtj += j * j.transpose();
            jtr += j * (q.survival - model(&p, m));
        }
        let mut improved = false;
        while mu < 1e12 {
            let damped = jtj + Matrix3::from_diagonal(&jtj.diagonal().map(|v| v.max(1e-12))) * mu;
            let Some(step) = damped.lu().solve(&jtr) else {
                mu *= 10.0;
                continue;
            };
            let mut cand = p + step;
            cand[2] = cand[2].clamp(0.0, 1.0);
            let c = sse(&cand, &pts);
            if c.is_finite() && c <= cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = cand;
                cost = c;
                mu = (mu / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let residual = (cost / pts.len() as f64).sqrt();
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit {
            message: format!(
                "diverged from A={:.4}, B={:.4}, alpha={:.6}",
                init[0], init[1], init[2]
            ),
            residual,
        });
    }

    let dof = pts.len().saturating_sub(3);
    let alpha_stderr = if dof > 0 {
        let mut jtj = Matrix3::zeros();
        for q in &pts {
            let j = jacobian_row(&p, q.length as f64);
            jtj += j * j.transpose();
        }
        let s2 = cost / dof as f64;
        jtj.try_inverse()
            .map_or(f64::NAN, |inv| (s2 * inv[(2, 2)]).max(0.0).sqrt())
    } else {
        f64::NAN
    };
    let alpha = p[2];
    Ok(DecayFit {
        a: p[0],
        b: p[1],
        alpha,
        alpha_stderr,
        r: (df - 1.0) * (1.0 - alpha) / df,
        r_stderr: (df - 1.0) * alpha_stderr / df,
        residual,
        dimension: d,
    })
}
