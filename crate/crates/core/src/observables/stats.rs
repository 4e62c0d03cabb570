use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Named time series with free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries<T> {
    pub name: String,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub meta: BTreeMap<String, String>,
}

impl<T: Real> ObservableSeries<T> {
    pub fn new(name: &str, times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(format!("times of series {name:?} are not strictly ascending")));
        }
        Ok(ObservableSeries { name: name.to_string(), times, values, meta: BTreeMap::new() })
    }
}

/// Mean and sample standard deviation over samples with `t ∈ [start, end]`.
pub fn steady_value<T: Real>(series: &ObservableSeries<T>, window: (T, T)) -> Result<(T, T)> {
    let (a, b) = window;
    let slack = T::of(1e-9);
    let vals: Vec<T> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= a - slack && **t <= b + slack)
        .map(|(_, v)| *v)
        .collect();
    if vals.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples of {:?} inside [{}, {}], need 2",
            vals.len(),
            series.name,
            a,
            b
        )));
    }
    let n = T::of_usize(vals.len());
    let mean = vals.iter().fold(T::zero(), |s, v| s + *v) / n;
    let var = vals.iter().fold(T::zero(), |s, v| s + (*v - mean) * (*v - mean)) / (n - T::one());
    Ok((mean, var.sqrt()))
}

/// Result of fitting `a·exp(−(x−μ)²/2σ²) + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFit<T> {
    pub mu: T,
    pub sigma: T,
    pub amplitude: T,
    pub offset: T,
    /// Root-mean-square residual.
    pub residual: T,
    pub converged: bool,
    /// Set when the data carry no peak to fit.
    pub degenerate: bool,
    pub iterations: usize,
}

fn gaussian<T: Real>(p: &Vector4<T>, x: T) -> (T, Vector4<T>) {
    let (a, mu, sigma, b) = (p[0], p[1], p[2], p[3]);
    let d = x - mu;
    let e = (-(d * d) / (T::of(2.0) * sigma * sigma)).exp();
    let grad = Vector4::new(e, a * e * d / (sigma * sigma), a * e * d * d / (sigma * sigma * sigma), T::one());
    (a * e + b, grad)
}

/// Levenberg–Marquardt fit of a Gaussian peak on a constant background.
///
/// Start: `μ₀` at the largest sample, `b₀` the smallest sample, `a₀` their
/// difference, `σ₀` from the half-maximum width around `μ₀`. `σ` is kept in
/// `[Δx/10, 10·range]` and `μ` within one range of the data.
pub fn fit_gaussian_peak<T: Real>(xs: &[T], ys: &[T]) -> Result<GaussianFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!("Gaussian fit needs 5 points, got {}", xs.len())));
    }
    let n = xs.len();
    let (imax, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    let ymin = ys.iter().fold(ymax, |m, &y| m.min(y));
    let xmin = xs.iter().fold(xs[0], |m, &x| m.min(x));
    let xmax = xs.iter().fold(xs[0], |m, &x| m.max(x));
    let range = (xmax - xmin).max(T::eps());
    let mut spacing = range;
    for w in xs.windows(2) {
        let d = (w[1] - w[0]).abs();
        if d > T::zero() {
            spacing = spacing.min(d);
        }
    }
    let a0 = ymax - ymin;
    if a0 <= T::of(1e-12) * ymax.abs().max(T::one()) {
        return Ok(GaussianFit {
            mu: xs[imax],
            sigma: range,
            amplitude: T::zero(),
            offset: ymin,
            residual: T::zero(),
            converged: false,
            degenerate: true,
            iterations: 0,
        });
    }
    let half = ymin + a0 * T::of(0.5);
    let (mut lo, mut hi) = (xs[imax], xs[imax]);
    for (&x, &y) in xs.iter().zip(ys) {
        if y >= half {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let sig_lo = spacing * T::of(0.1);
    let sig_hi = range * T::of(10.0);
    let sigma0 = ((hi - lo) / T::of(2.355)).max(spacing * T::of(0.5)).min(sig_hi);
    let mut p = Vector4::new(a0, xs[imax], sigma0, ymin);
    let clamp = |p: &mut Vector4<T>| {
        p[1] = p[1].max(xmin - range).min(xmax + range);
        p[2] = p[2].abs().max(sig_lo).min(sig_hi);
    };
    let ssr = |p: &Vector4<T>| xs.iter().zip(ys).fold(T::zero(), |s, (&x, &y)| {
        let r = gaussian(p, x).0 - y;
        s + r * r
    });
    let mut cost = ssr(&p);
    let mut lambda = T::of(1e-3);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let mut jtj = Matrix4::<T>::zeros();
        let mut jtr = Vector4::<T>::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let (f, g) = gaussian(&p, x);
            jtj += g * g.transpose();
            jtr += g * (f - y);
        }
        let mut improved = false;
        while lambda < T::of(1e12) {
            let mut m = jtj;
            for k in 0..4 {
                m[(k, k)] += lambda * jtj[(k, k)].max(T::of(1e-12));
            }
            let Some(step) = m.lu().solve(&(-jtr)) else {
                lambda *= T::of(10.0);
                continue;
            };
            let mut trial = p + step;
            clamp(&mut trial);
            let c = ssr(&trial);
            if c <= cost {
                let rel = (cost - c) / cost.max(T::of(1e-300));
                let small_step = (trial - p).norm() <= T::of(1e-13) * (p.norm() + T::of(1e-13));
                p = trial;
                cost = c;
                lambda = (lambda * T::of(0.3)).max(T::of(1e-15));
                improved = true;
                if rel < T::of(1e-15) || small_step || cost < T::of(1e-30) {
                    converged = true;
                }
                break;
            }
            lambda *= T::of(10.0);
        }
        if converged || !improved {
            converged = converged || !improved;
            break;
        }
    }
    Ok(GaussianFit {
        mu: p[1],
        sigma: p[2],
        amplitude: p[0],
        offset: p[3],
        residual: (cost / T::of_usize(n)).sqrt(),
        converged,
        degenerate: false,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_constant_and_two_point() {
        let s = ObservableSeries::new("x", vec![0.0, 0.5, 1.0], vec![2.0, 2.0, 2.0]).unwrap();
        assert_eq!(steady_value(&s, (0.0, 1.0)).unwrap(), (2.0, 0.0));
        let s = ObservableSeries::new("x", vec![0.2, 1.0], vec![0.0, 1.0]).unwrap();
        let (m, sd) = steady_value(&s, (0.2, 1.0)).unwrap();
        assert_eq!(m, 0.5);
        assert!((sd - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(steady_value(&s, (0.5, 1.0)).is_err());
    }

    #[test]
    fn rejects_unsorted_times() {
        assert!(ObservableSeries::new("x", vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn exact_gaussian_recovered() {
        let xs: Vec<f64> = (0..25).map(|k| -3.0 + 0.25 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.7 * (-(x + 0.35f64).powi(2) / (2.0 * 0.8 * 0.8)).exp() + 0.1).collect();
        let f = fit_gaussian_peak(&xs, &ys).unwrap();
        assert!(f.converged && !f.degenerate);
        assert!((f.mu + 0.35).abs() < 1e-6, "{f:?}");
        assert!((f.sigma - 0.8).abs() < 1e-6);
        assert!((f.amplitude - 0.7).abs() < 1e-6);
        assert!((f.offset - 0.1).abs() < 1e-6);
    }

    #[test]
    fn flat_data_degenerate() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let f = fit_gaussian_peak(&xs, &[0.4; 5]).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.amplitude, 0.0);
        assert!(fit_gaussian_peak(&xs[..3], &[0.4; 3]).is_err());
    }
}
