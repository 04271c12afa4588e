//! Inner ("base") distributions G₁ fed to the gamma-odds generator.

use crate::error::{Error, Result};

/// The capabilities the family generator needs from its base distribution.
///
/// Implementations are exact: no clamping of `cdf` away from 0 or 1 happens
/// here.
pub trait BaseDistribution: std::fmt::Debug + Send + Sync {
    fn cdf(&self, x: f64) -> f64;

    /// Survival function 1 - G₁(x). Override when the complement can be
    /// computed without cancellation.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// ln(1 - G₁(x)).
    fn ln_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }

    fn pdf(&self, x: f64) -> f64;

    fn log_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// Inverse of `cdf` on (0, 1).
    fn quantile(&self, u: f64) -> f64;

    /// The x with `sf(x) = q`; lets callers reach deep upper tails.
    fn quantile_upper(&self, q: f64) -> f64 {
        self.quantile(1.0 - q)
    }

    /// `quantile_upper` from ln q, for tails beyond the smallest double.
    fn quantile_upper_ln(&self, ln_q: f64) -> f64 {
        self.quantile_upper(ln_q.exp())
    }

    /// (lower, upper) support bounds, possibly infinite.
    fn support(&self) -> (f64, f64);

    fn params(&self) -> Vec<f64>;

    /// One flag per parameter; `true` means the parameter must be positive.
    fn param_positive(&self) -> Vec<bool>;

    fn param_names(&self) -> Vec<&'static str>;

    /// Same family at a different parameter vector.
    fn with_params(&self, params: &[f64]) -> Result<Self>
    where
        Self: Sized;

    fn d_cdf_dparams(&self, x: f64) -> Vec<f64>;

    fn d_logpdf_dparams(&self, x: f64) -> Vec<f64>;
}

/// Exponential distribution with rate λ: G₁(x) = 1 - e^{-λx}, x > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

pub fn make_exponential(lambda: f64) -> Result<Exponential> {
    Exponential::new(lambda)
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::domain(format!("exponential rate must be positive and finite, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl BaseDistribution for Exponential {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }

    fn ln_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -self.rate * x
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.rate.ln() - self.rate * x
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.rate
    }

    fn quantile_upper(&self, q: f64) -> f64 {
        -q.ln() / self.rate
    }

    fn quantile_upper_ln(&self, ln_q: f64) -> f64 {
        -ln_q / self.rate
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn params(&self) -> Vec<f64> {
        vec![self.rate]
    }

    fn param_positive(&self) -> Vec<bool> {
        vec![true]
    }

    fn param_names(&self) -> Vec<&'static str> {
        vec!["lambda"]
    }

    fn with_params(&self, params: &[f64]) -> Result<Self> {
        match params {
            [rate] => Exponential::new(*rate),
            _ => Err(Error::domain(format!("exponential takes one parameter, got {}", params.len()))),
        }
    }

    fn d_cdf_dparams(&self, x: f64) -> Vec<f64> {
        if x <= 0.0 {
            vec![0.0]
        } else {
            vec![x * (-self.rate * x).exp()]
        }
    }

    fn d_logpdf_dparams(&self, x: f64) -> Vec<f64> {
        vec![1.0 / self.rate - x]
    }
}
