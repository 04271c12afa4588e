//! Truncated double-series evaluation with convergence bookkeeping.
//!
//! The expansions of the family's moments, generating functions and entropy
//! are formal: term-by-term integration is only justified in part of the
//! parameter space. Evaluators here never present a divergent partial sum as
//! a value; `converged` is set only when every shell closed within tolerance.

use std::ops::AddAssign;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub k_max: usize,
    pub j_max: usize,
    pub tail_tol: f64,
    pub divergence_ratio: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { k_max: 60, j_max: 200, tail_tol: 1e-10, divergence_ratio: 10.0 }
    }
}

impl SeriesControl {
    pub fn new(k_max: usize, j_max: usize, tail_tol: f64, divergence_ratio: f64) -> Result<Self> {
        if k_max < 1 || j_max < 1 || !(tail_tol > 0.0) || !(divergence_ratio > 1.0) {
            return Err(Error::domain(format!(
                "series control needs k_max, j_max >= 1, tail_tol > 0, divergence_ratio > 1 \
                 (got {k_max}, {j_max}, {tail_tol}, {divergence_ratio})"
            )));
        }
        Ok(Self { k_max, j_max, tail_tol, divergence_ratio })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult<T = f64> {
    pub value: T,
    /// Number of k-shells summed and the largest j index reached.
    pub terms_used: (usize, usize),
    pub converged: bool,
    pub diagnostic: String,
}

impl<T> SeriesResult<T> {
    pub(crate) fn map<U>(self, f: impl FnOnce(T) -> U) -> SeriesResult<U> {
        SeriesResult {
            value: f(self.value),
            terms_used: self.terms_used,
            converged: self.converged,
            diagnostic: self.diagnostic,
        }
    }

    pub(crate) fn failed(value: T, diagnostic: impl Into<String>) -> Self {
        SeriesResult { value, terms_used: (0, 0), converged: false, diagnostic: diagnostic.into() }
    }
}

pub trait Summand: Copy + Default + AddAssign + std::fmt::Debug {
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl Summand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Summand for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Estimated magnitude of the remainder after `cur`, the term at index
/// `idx`, given the previous term `prev`. `None` when the local decay is too
/// slow for the remainder to be finite (ratio ≥ 1 or power-law exponent ≤ 1).
fn remainder_estimate(prev: f64, cur: f64, idx: usize) -> Option<f64> {
    if cur == 0.0 && idx > 0 {
        return Some(0.0);
    }
    if idx < 2 || prev == 0.0 {
        return None;
    }
    let r = cur / prev;
    if r >= 1.0 {
        return None;
    }
    let geometric = r / (1.0 - r);
    let p = -r.ln() / (idx as f64 / (idx as f64 - 1.0)).ln();
    if p <= 1.0 {
        return None;
    }
    Some(cur * geometric.max(idx as f64 / (p - 1.0)))
}

/// Sums Σ_{k=0}^{k_max} Σ_{j=0}^{j_max} term(k, j).
///
/// An inner j-sum closes once its estimated remainder is below
/// tail_tol·max(|shell|, |total|); the outer sum closes on the same rule
/// applied to whole shells. Growth of the running total by more than
/// `divergence_ratio` between shells is reported as divergence.
pub fn double_sum<T, F>(ctrl: &SeriesControl, mut term: F) -> SeriesResult<T>
where
    T: Summand,
    F: FnMut(usize, usize) -> Result<T>,
{
    let mut total = T::default();
    let mut max_j = 0;
    let mut prev_shell_mag = 0.0;
    for k in 0..=ctrl.k_max {
        let mut shell = T::default();
        let mut inner_closed = false;
        let mut first_mag: Option<f64> = None;
        let mut last_mag = 0.0;
        let mut prev_mag = 0.0;
        for j in 0..=ctrl.j_max {
            max_j = max_j.max(j);
            let t = match term(k, j) {
                Ok(t) => t,
                Err(e) => {
                    total += shell;
                    return SeriesResult {
                        value: total,
                        terms_used: (k + 1, max_j),
                        converged: false,
                        diagnostic: format!("term (k={k}, j={j}) is undefined: {e}"),
                    };
                }
            };
            if !t.is_finite_value() {
                total += shell;
                return SeriesResult {
                    value: total,
                    terms_used: (k + 1, max_j),
                    converged: false,
                    diagnostic: format!("term (k={k}, j={j}) is not finite"),
                };
            }
            shell += t;
            prev_mag = std::mem::replace(&mut last_mag, t.magnitude());
            if first_mag.is_none() && last_mag > 0.0 {
                first_mag = Some(last_mag);
            }
            let scale = shell.magnitude().max(total.magnitude());
            if j > 0 {
                if let Some(rest) = remainder_estimate(prev_mag, last_mag, j) {
                    if rest <= ctrl.tail_tol * scale {
                        inner_closed = true;
                        break;
                    }
                }
            }
        }
        if !inner_closed {
            total += shell;
            let growing = first_mag.is_some_and(|f| last_mag >= f) || last_mag > prev_mag;
            let why = if growing {
                "terms do not decay (divergent inner sum)"
            } else {
                "terms decay too slowly for the truncation"
            };
            return SeriesResult {
                value: total,
                terms_used: (k + 1, max_j),
                converged: false,
                diagnostic: format!(
                    "inner sum over j for k={k} not closed within j_max={}: {why}; last |term| = {last_mag:.3e}, |shell| = {:.3e}",
                    ctrl.j_max,
                    shell.magnitude()
                ),
            };
        }
        let previous = total.magnitude();
        total += shell;
        if k > 0 && previous > 0.0 && total.magnitude() > ctrl.divergence_ratio * previous {
            return SeriesResult {
                value: total,
                terms_used: (k + 1, max_j),
                converged: false,
                diagnostic: format!(
                    "partial sums diverge: |S_{k}| = {:.3e} exceeds {} x |S_{}| = {:.3e}",
                    total.magnitude(),
                    ctrl.divergence_ratio,
                    k - 1,
                    previous
                ),
            };
        }
        let shell_mag = shell.magnitude();
        {
            if let Some(rest) = remainder_estimate(prev_shell_mag, shell_mag, k) {
                if rest <= ctrl.tail_tol * total.magnitude() {
                    return SeriesResult {
                        value: total,
                        terms_used: (k + 1, max_j),
                        converged: true,
                        diagnostic: String::new(),
                    };
                }
            }
        }
        prev_shell_mag = shell_mag;
    }
    SeriesResult {
        value: total,
        terms_used: (ctrl.k_max + 1, max_j),
        converged: false,
        diagnostic: format!("outer sum over k not closed within k_max={}", ctrl.k_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_double_series_converges() {
        // Σ_k Σ_j 2^{-k} 3^{-j} = 2 · 1.5 = 3
        let ctrl = SeriesControl::default();
        let r = double_sum(&ctrl, |k, j| Ok(0.5f64.powi(k as i32) * (1.0 / 3.0f64).powi(j as i32)));
        assert!(r.converged, "{}", r.diagnostic);
        assert!((r.value - 3.0).abs() < 1e-8);
    }

    #[test]
    fn harmonic_inner_sum_is_flagged() {
        let ctrl = SeriesControl::default();
        let r = double_sum(&ctrl, |_, j| Ok(1.0 / (j as f64 + 1.0)));
        assert!(!r.converged);
        assert!(r.diagnostic.contains("inner sum"), "{}", r.diagnostic);
    }

    #[test]
    fn growing_shells_are_flagged() {
        let ctrl = SeriesControl::default();
        let r = double_sum(&ctrl, |k, j| Ok(if j == 0 { 100f64.powi(k as i32) } else { 0.0 }));
        assert!(!r.converged);
        assert!(r.diagnostic.contains("diverge"), "{}", r.diagnostic);
    }

    #[test]
    fn term_errors_stop_the_sum() {
        let ctrl = SeriesControl::default();
        let r: SeriesResult<f64> = double_sum(&ctrl, |k, j| {
            if k == 2 {
                Err(Error::Divergence("test".into()))
            } else {
                Ok(0.5f64.powi(j as i32))
            }
        });
        assert!(!r.converged);
        assert!(r.diagnostic.contains("k=2"));
    }

    #[test]
    fn slowly_decaying_terms_never_close() {
        // Σ j^{-1/2} diverges although every term is tiny next to the first shell.
        let ctrl = SeriesControl::new(5, 5000, 1e-10, 10.0).unwrap();
        let r = double_sum(&ctrl, |k, j| Ok(if k == 0 && j == 0 { 1.0 } else { 1e-12 / (j as f64 + 1.0).sqrt() }));
        assert!(!r.converged);
    }

    #[test]
    fn remainder_estimates() {
        assert_eq!(remainder_estimate(1.0, 0.0, 3), Some(0.0));
        assert!(remainder_estimate(1.0, 1.0, 3).is_none());
        assert!(remainder_estimate(0.0, 1.0, 3).is_none());
        // 1/j^2 near j = 100: remainder ≈ 1/100
        let t = |j: f64| 1.0 / (j * j);
        let est = remainder_estimate(t(99.0), t(100.0), 99).unwrap();
        assert!((est / 0.01 - 1.0).abs() < 0.1, "{est}");
    }

    #[test]
    fn control_validation() {
        assert!(SeriesControl::new(0, 10, 1e-10, 10.0).is_err());
        assert!(SeriesControl::new(10, 10, 1e-10, 1.0).is_err());
        assert!(SeriesControl::new(10, 10, 1e-10, 2.0).is_ok());
    }
}
