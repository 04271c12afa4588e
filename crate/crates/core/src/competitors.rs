//! Reference lifetime models for comparison: the Zografos-Balakrishnan gamma
//! generator over an exponential base, and the Weibull distribution.

use crate::fit::FittableModel;
use crate::specfun::{digamma_unchecked, gamma_tails, ln_gamma_unchecked};

/// λ reported for the gamma-generated exponential model. β and λ enter the
/// likelihood only through ρ = βλ, so λ is pinned and β = ρ/λ.
pub const ZB_DISPLAY_LAMBDA: f64 = 1.96;

/// F(x) = P(α, βλx) for x > 0.
pub fn zb_gamma_exp_cdf(x: f64, alpha: f64, beta: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_tails(alpha, beta * lambda * x).p()
}

/// ln of (βλ)^α x^{α-1} e^{-βλx} / Γ(α).
pub fn zb_gamma_exp_log_pdf(x: f64, alpha: f64, beta: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let rho = beta * lambda;
    alpha * rho.ln() + (alpha - 1.0) * x.ln() - rho * x - ln_gamma_unchecked(alpha)
}

/// The Zografos-Balakrishnan gamma model with exponential base, fitted over
/// (α, ρ = βλ) and reported as (α, β, λ). Three parameters are charged to
/// the information criteria.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZbGammaExpModel;

pub fn zb_gamma_exp_model() -> ZbGammaExpModel {
    ZbGammaExpModel
}

impl FittableModel for ZbGammaExpModel {
    fn name(&self) -> &'static str {
        "ZB Gamma-Exponential"
    }

    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "rho"]
    }

    fn param_positive(&self) -> Vec<bool> {
        vec![true, true]
    }

    fn k(&self) -> usize {
        3
    }

    fn log_pdf(&self, x: f64, theta: &[f64]) -> f64 {
        zb_gamma_exp_log_pdf(x, theta[0], theta[1], 1.0)
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        zb_gamma_exp_cdf(x, theta[0], theta[1], 1.0)
    }

    fn initial_guess(&self, data: &[f64]) -> Vec<f64> {
        let (mean, var) = mean_var(data);
        if var > 0.0 {
            vec![mean * mean / var, mean / var]
        } else {
            vec![1.0, 1.0 / mean]
        }
    }

    fn score(&self, data: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        let (a, rho) = (theta[0], theta[1]);
        let n = data.len() as f64;
        let sum_ln: f64 = data.iter().map(|x| x.ln()).sum();
        let sum: f64 = data.iter().sum();
        Some(vec![n * rho.ln() - n * digamma_unchecked(a) + sum_ln, n * a / rho - sum])
    }

    fn report(&self, theta: &[f64], se: &[f64]) -> Vec<(&'static str, f64, f64)> {
        vec![
            ("alpha", theta[0], se[0]),
            ("beta", theta[1] / ZB_DISPLAY_LAMBDA, se[1] / ZB_DISPLAY_LAMBDA),
            ("lambda", ZB_DISPLAY_LAMBDA, 0.0),
        ]
    }
}

/// Weibull with shape k and rate λ: F(x) = 1 - exp(-(λx)^k).
#[derive(Debug, Clone, Copy, Default)]
pub struct WeibullModel;

pub fn weibull_model() -> WeibullModel {
    WeibullModel
}

pub fn weibull_cdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    -(-(rate * x).powf(shape)).exp_m1()
}

pub fn weibull_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = rate * x;
    shape.ln() + rate.ln() + (shape - 1.0) * z.ln() - z.powf(shape)
}

impl FittableModel for WeibullModel {
    fn name(&self) -> &'static str {
        "Weibull"
    }

    fn param_names(&self) -> Vec<&'static str> {
        vec!["shape", "rate"]
    }

    fn param_positive(&self) -> Vec<bool> {
        vec![true, true]
    }

    fn log_pdf(&self, x: f64, theta: &[f64]) -> f64 {
        weibull_log_pdf(x, theta[0], theta[1])
    }

    fn cdf(&self, x: f64, theta: &[f64]) -> f64 {
        weibull_cdf(x, theta[0], theta[1])
    }

    /// Least squares of ln(-ln(1 - F̂)) on ln x with F̂_i = (i - 0.5)/n.
    fn initial_guess(&self, data: &[f64]) -> Vec<f64> {
        let mut xs: Vec<f64> = data.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x.ln(), (-(-(i as f64 + 0.5) / n).ln_1p()).ln()))
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let shape = if sxx > 0.0 && sxy > 0.0 { sxy / sxx } else { 1.0 };
        // intercept = shape·ln(rate)
        let rate = ((my - shape * mx) / shape).exp();
        if rate.is_finite() && rate > 0.0 {
            vec![shape, rate]
        } else {
            vec![1.0, 1.0 / xs.iter().sum::<f64>().max(f64::MIN_POSITIVE) * n]
        }
    }

    fn score(&self, data: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        let (k, l) = (theta[0], theta[1]);
        let n = data.len() as f64;
        let mut s_ln = 0.0;
        let mut s_pow = 0.0;
        let mut s_pow_ln = 0.0;
        for &x in data {
            let lz = (l * x).ln();
            let p = (k * lz).exp();
            s_ln += lz;
            s_pow += p;
            s_pow_ln += p * lz;
        }
        Some(vec![n / k + s_ln - s_pow_ln, n * k / l - k / l * s_pow])
    }
}

fn mean_var(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = if data.len() > 1 { data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zb_unit_shape_is_exponential() {
        for &x in &[0.1, 1.0, 4.0] {
            let c = zb_gamma_exp_cdf(x, 1.0, 0.5, 2.0);
            assert!((c - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        assert_eq!(zb_gamma_exp_cdf(0.0, 2.0, 1.0, 1.0), 0.0);
        assert!((zb_gamma_exp_cdf(1e4, 2.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weibull_unit_shape_is_exponential() {
        for &x in &[0.1, 1.0, 4.0] {
            assert!((weibull_cdf(x, 1.0, 0.7) - (1.0 - (-0.7 * x).exp())).abs() < 1e-15);
            assert!((weibull_log_pdf(x, 1.0, 0.7) - (0.7f64.ln() - 0.7 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_scores_match_finite_differences() {
        let data = [0.3, 1.2, 5.0, 2.2, 0.8];
        let models: [(&dyn FittableModel, [f64; 2]); 2] = [(&ZbGammaExpModel, [0.8, 0.4]), (&WeibullModel, [1.3, 0.6])];
        for (m, t) in models {
            let g = m.score(&data, &t).unwrap();
            for i in 0..2 {
                let h = 1e-6;
                let mut up = t;
                let mut dn = t;
                up[i] += h;
                dn[i] -= h;
                let fd = (m.log_likelihood(&data, &up) - m.log_likelihood(&data, &dn)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0), "{} {i}: {fd} vs {}", m.name(), g[i]);
            }
        }
    }

    #[test]
    fn zb_report_pins_lambda() {
        let r = ZbGammaExpModel.report(&[0.8, 0.0686871], &[0.1, 0.01]);
        assert_eq!(r[2].1, ZB_DISPLAY_LAMBDA);
        assert!((r[1].1 * ZB_DISPLAY_LAMBDA - 0.0686871).abs() < 1e-15);
        assert_eq!(ZbGammaExpModel.k(), 3);
    }

    #[test]
    fn weibull_start_recovers_exact_quantiles() {
        // data at the plotting positions of Weibull(2, 0.5)
        let n = 50;
        let data: Vec<f64> =
            (0..n).map(|i| (-(-(i as f64 + 0.5) / n as f64).ln_1p()).powf(0.5) / 0.5).collect();
        let g = WeibullModel.initial_guess(&data);
        assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] - 0.5).abs() < 1e-9, "{g:?}");
    }
}
