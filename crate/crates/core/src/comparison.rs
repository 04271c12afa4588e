//! Fitting several models to one dataset and ranking them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::competitors::{WeibullModel, ZbGammaExpModel};
use crate::error::{Error, Result};
use crate::fit::{mle_fit, FitOptions, FitResult, FittableModel};
use crate::gof::{gof_report, EdfVariant, GofReport};
use crate::oe_gamma::OeGammaModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModelId {
    /// Zografos-Balakrishnan gamma over an exponential base.
    M1,
    /// The (1-Exp)/Exp gamma distribution.
    M2,
    /// Weibull.
    M6,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::M1, ModelId::M2, ModelId::M6];

    pub fn id(self) -> &'static str {
        match self {
            ModelId::M1 => "m1",
            ModelId::M2 => "m2",
            ModelId::M6 => "m6",
        }
    }

    pub fn alias(self) -> &'static str {
        match self {
            ModelId::M1 => "zb-gamma-exp",
            ModelId::M2 => "oe-gamma",
            ModelId::M6 => "weibull",
        }
    }

    pub fn model(self) -> Box<dyn FittableModel> {
        match self {
            ModelId::M1 => Box::new(ZbGammaExpModel),
            ModelId::M2 => Box::new(OeGammaModel),
            ModelId::M6 => Box::new(WeibullModel),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        ModelId::ALL
            .into_iter()
            .find(|m| m.id() == t || m.alias() == t)
            .ok_or_else(|| Error::Usage(format!("unknown model '{}' (expected m1, m2, m6 or an alias)", s.trim())))
    }
}

/// Parses a comma-separated model list such as "m2,m6,weibull"; repeats are
/// dropped, first occurrence wins.
pub fn parse_models(text: &str) -> Result<Vec<ModelId>> {
    if text.trim().is_empty() {
        return Err(Error::Usage("model list is empty".into()));
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let id: ModelId = part.parse()?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportedParam {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: ModelId,
    pub name: String,
    pub params: Vec<ReportedParam>,
    pub fit: Option<FitResult>,
    pub gof: Option<GofReport>,
    pub error: Option<String>,
}

impl ComparisonRow {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.fit.as_ref().is_none_or(|f| !f.converged) || self.gof.is_none()
    }
}

/// The reported parameter triples of a fit.
pub fn reported_params(model: &dyn FittableModel, fit: &FitResult) -> Vec<ReportedParam> {
    model
        .report(&fit.theta_hat, &fit.std_errors)
        .into_iter()
        .map(|(n, v, s)| ReportedParam { name: n.to_string(), value: v, std_error: s })
        .collect()
}

fn fit_row(id: ModelId, data: &[f64], opts: &FitOptions, variant: EdfVariant) -> ComparisonRow {
    let model = id.model();
    let mut row =
        ComparisonRow { model: id, name: model.name().to_string(), params: Vec::new(), fit: None, gof: None, error: None };
    match mle_fit(model.as_ref(), data, opts) {
        Err(e) => row.error = Some(e.to_string()),
        Ok(fit) => {
            row.params = reported_params(model.as_ref(), &fit);
            match gof_report(model.as_ref(), data, &fit.theta_hat, fit.loglik, variant) {
                Ok(g) => row.gof = Some(g),
                Err(e) => row.error = Some(e.to_string()),
            }
            if !fit.converged && row.error.is_none() {
                row.error = Some("optimizer did not converge".to_string());
            }
            row.fit = Some(fit);
        }
    }
    row
}

/// Fits each model (concurrently) and returns rows ranked by AIC, failed
/// rows last in their declared order.
pub fn compare(ids: &[ModelId], data: &[f64], opts: &FitOptions, variant: EdfVariant) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = std::thread::scope(|s| {
        let handles: Vec<_> = ids.iter().map(|&id| s.spawn(move || fit_row(id, data, opts, variant))).collect();
        handles.into_iter().map(|h| h.join().expect("model fit thread panicked")).collect()
    });
    rows.sort_by(|a, b| {
        let key = |r: &ComparisonRow| if r.failed() { f64::INFINITY } else { r.gof.as_ref().map_or(f64::INFINITY, |g| g.aic) };
        key(a).total_cmp(&key(b))
    });
    rows
}
