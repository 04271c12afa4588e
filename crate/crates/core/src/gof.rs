//! Information criteria and EDF goodness-of-fit statistics.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fit::FittableModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoCriteria {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// AIC, AICc, BIC and HQIC for log-likelihood `loglik` with `k` parameters
/// on `n` observations.
pub fn info_criteria(loglik: f64, k: usize, n: usize) -> Result<InfoCriteria> {
    if n <= k + 1 {
        return Err(Error::CriterionUndefined { criterion: "AICc", n, k });
    }
    if n < 3 {
        return Err(Error::CriterionUndefined { criterion: "HQIC", n, k });
    }
    let (kf, nf) = (k as f64, n as f64);
    let aic = 2.0 * kf - 2.0 * loglik;
    Ok(InfoCriteria {
        aic,
        aicc: aic + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0),
        bic: kf * nf.ln() - 2.0 * loglik,
        hqic: 2.0 * kf * nf.ln().ln() - 2.0 * loglik,
    })
}

fn check_pit(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::EmptyData);
    }
    for (i, &v) in u.iter().enumerate() {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(format!("PIT value at index {i} is {v}, outside (0, 1)")));
        }
        if i > 0 && v < u[i - 1] {
            return Err(Error::domain(format!("PIT values must be sorted; index {i} decreases")));
        }
    }
    Ok(())
}

/// A² = -n - (1/n) Σ (2i-1)[ln u_i + ln(1 - u_{n+1-i})] on sorted u.
pub fn anderson_darling(u: &[f64]) -> Result<f64> {
    check_pit(u)?;
    let n = u.len();
    let s: f64 = (0..n).map(|i| (2 * i + 1) as f64 * (u[i].ln() + (-u[n - 1 - i]).ln_1p())).sum();
    Ok(-(n as f64) - s / n as f64)
}

/// W² = Σ (u_i - (2i-1)/(2n))² + 1/(12n) on sorted u.
pub fn cramer_von_mises(u: &[f64]) -> Result<f64> {
    check_pit(u)?;
    let n = u.len() as f64;
    let s: f64 = u.iter().enumerate().map(|(i, &v)| (v - (2 * i + 1) as f64 / (2.0 * n)).powi(2)).sum();
    Ok(s + 1.0 / (12.0 * n))
}

/// Which form of the EDF statistics to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EdfVariant {
    /// PIT values normalized through Φ((Φ⁻¹(u) - ȳ)/s) and the small-sample
    /// multipliers (1 + 0.75/n + 2.25/n²) and (1 + 0.5/n) applied.
    #[default]
    ChenBalakrishnan,
    /// A² and W² on the raw PIT values.
    Unmodified,
}

impl std::str::FromStr for EdfVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cb" | "chen-balakrishnan" | "modified" => Ok(Self::ChenBalakrishnan),
            "raw" | "unmodified" => Ok(Self::Unmodified),
            other => Err(Error::Usage(format!("unknown EDF variant '{other}' (expected 'cb' or 'unmodified')"))),
        }
    }
}

/// (A², W²) for sorted PIT values under the chosen variant.
pub fn edf_statistics(u: &[f64], variant: EdfVariant) -> Result<(f64, f64)> {
    check_pit(u)?;
    match variant {
        EdfVariant::Unmodified => Ok((anderson_darling(u)?, cramer_von_mises(u)?)),
        EdfVariant::ChenBalakrishnan => {
            let n = u.len();
            if n < 2 {
                return Err(Error::domain("the normalized EDF statistics need at least two observations"));
            }
            let std = Normal::standard();
            let y: Vec<f64> = u.iter().map(|&v| std.inverse_cdf(v)).collect();
            let nf = n as f64;
            let mean = y.iter().sum::<f64>() / nf;
            let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
            if !(sd > 0.0) {
                return Err(Error::Degenerate("PIT values are all equal".into()));
            }
            let mut z: Vec<f64> = y.iter().map(|v| std.cdf((v - mean) / sd).clamp(1e-300, 1.0 - 1e-16)).collect();
            z.sort_by(f64::total_cmp);
            let a2 = anderson_darling(&z)? * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
            let w2 = cramer_von_mises(&z)? * (1.0 + 0.5 / nf);
            Ok((a2, w2))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    pub hqic: f64,
    pub a_squared: f64,
    pub w_squared: f64,
    pub n: usize,
    pub k: usize,
    pub variant: EdfVariant,
    pub warnings: Vec<String>,
}

/// Sorted PIT values u_(i) = F(x_(i); θ), clamped into (0, 1).
pub fn pit_values(model: &dyn FittableModel, data: &[f64], theta: &[f64]) -> Result<(Vec<f64>, Vec<String>)> {
    let mut u = Vec::with_capacity(data.len());
    let mut clamped = 0;
    for (index, &x) in data.iter().enumerate() {
        let v = model.cdf(x, theta);
        if v.is_nan() {
            return Err(Error::DataDomain { index, value: x });
        }
        let c = v.clamp(1e-300, 1.0 - f64::EPSILON / 2.0);
        if c != v {
            clamped += 1;
        }
        u.push(c);
    }
    u.sort_by(f64::total_cmp);
    let warnings = if clamped > 0 {
        vec![format!("{clamped} PIT value(s) clamped away from 0 or 1 before taking logarithms")]
    } else {
        Vec::new()
    };
    Ok((u, warnings))
}

/// Criteria and EDF statistics for a fitted model.
pub fn gof_report(
    model: &dyn FittableModel,
    data: &[f64],
    theta: &[f64],
    loglik: f64,
    variant: EdfVariant,
) -> Result<GofReport> {
    let k = model.k();
    let n = data.len();
    let ic = info_criteria(loglik, k, n)?;
    let (u, warnings) = pit_values(model, data, theta)?;
    let (a_squared, w_squared) = edf_statistics(&u, variant)?;
    Ok(GofReport {
        aic: ic.aic,
        aicc: ic.aicc,
        bic: ic.bic,
        hqic: ic.hqic,
        a_squared,
        w_squared,
        n,
        k,
        variant,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_hand_values() {
        let c = info_criteria(0.0, 1, 100).unwrap();
        assert_eq!(c.aic, 2.0);
        assert!((c.aicc - (2.0 + 4.0 / 98.0)).abs() < 1e-12);
        assert!((c.bic - 100f64.ln()).abs() < 1e-12);
        assert!((c.hqic - 2.0 * 100f64.ln().ln()).abs() < 1e-12);
    }

    #[test]
    fn criteria_undefined() {
        assert!(matches!(info_criteria(0.0, 3, 4), Err(Error::CriterionUndefined { criterion: "AICc", .. })));
        assert!(matches!(info_criteria(0.0, 0, 2), Err(Error::CriterionUndefined { criterion: "HQIC", .. })));
    }

    #[test]
    fn single_point_statistics() {
        assert!((anderson_darling(&[0.5]).unwrap() - (2.0 * std::f64::consts::LN_2 - 1.0)).abs() < 1e-15);
        assert!((cramer_von_mises(&[0.5]).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn pit_domain_errors() {
        assert!(anderson_darling(&[0.2, 1.0]).is_err());
        assert!(cramer_von_mises(&[0.0]).is_err());
        assert!(anderson_darling(&[0.6, 0.2]).is_err());
        assert!(anderson_darling(&[]).is_err());
        let msg = anderson_darling(&[0.1, 0.2, 1.5]).unwrap_err().to_string();
        assert!(msg.contains("index 2"), "{msg}");
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("cb".parse::<EdfVariant>().unwrap(), EdfVariant::ChenBalakrishnan);
        assert_eq!("Unmodified".parse::<EdfVariant>().unwrap(), EdfVariant::Unmodified);
        assert!("x".parse::<EdfVariant>().is_err());
    }

    #[test]
    fn normalized_variant_needs_spread() {
        assert!(edf_statistics(&[0.3, 0.3], EdfVariant::ChenBalakrishnan).is_err());
        assert!(edf_statistics(&[0.3], EdfVariant::ChenBalakrishnan).is_err());
        assert!(edf_statistics(&[0.3, 0.6], EdfVariant::ChenBalakrishnan).is_ok());
    }
}
