//! Maximum-likelihood estimation over any [`FittableModel`].
//!
//! Newton-Raphson runs on log-transformed positive parameters with step
//! halving; a Nelder-Mead pass rescues stalled starts and ends with a Newton
//! polish. Standard errors come from the observed information on the
//! original scale.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// A parametric lifetime model that can be fitted by maximum likelihood.
pub trait FittableModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn param_names(&self) -> Vec<&'static str>;

    /// One flag per optimized parameter; `true` means strictly positive.
    fn param_positive(&self) -> Vec<bool>;

    fn log_pdf(&self, x: f64, theta: &[f64]) -> f64;

    fn cdf(&self, x: f64, theta: &[f64]) -> f64;

    fn initial_guess(&self, data: &[f64]) -> Vec<f64>;

    /// Parameter count charged by the information criteria.
    fn k(&self) -> usize {
        self.param_positive().len()
    }

    fn log_likelihood(&self, data: &[f64], theta: &[f64]) -> f64 {
        data.iter().map(|&x| self.log_pdf(x, theta)).sum()
    }

    /// Analytic gradient of the log-likelihood, if available.
    fn score(&self, _data: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Checks that every observation lies in the model's domain.
    fn validate_data(&self, data: &[f64]) -> Result<()> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        for (index, &value) in data.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::DataDomain { index, value });
            }
        }
        Ok(())
    }

    /// Maps optimized parameters and their standard errors to the reported
    /// (name, value, std error) triples.
    fn report(&self, theta: &[f64], se: &[f64]) -> Vec<(&'static str, f64, f64)> {
        self.param_names().into_iter().zip(theta.iter().zip(se)).map(|(n, (&t, &s))| (n, t, s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    pub max_halvings: usize,
    pub n_starts: usize,
    pub simplex_evals: usize,
    /// Relative tolerance on the change in ℓ.
    pub loglik_tol: f64,
    /// Gradient sup-norm tolerance, relative to max(1, |ℓ|).
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 500, max_halvings: 40, n_starts: 5, simplex_evals: 2000, loglik_tol: 1e-10, grad_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model_name: String,
    pub param_names: Vec<String>,
    /// Parameters at the optimum, in optimizer coordinates.
    pub theta_hat: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_sup_norm: f64,
    pub warnings: Vec<String>,
    /// Parameter count used by the information criteria.
    pub k: usize,
    pub n: usize,
}

/// -Σ log_pdf(x_i; θ); +∞ when any term is not finite.
pub fn negative_log_lik(model: &dyn FittableModel, data: &[f64], theta: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let ll = model.log_likelihood(data, theta);
    Ok(if ll.is_finite() { -ll } else { f64::INFINITY })
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    model: &'a dyn FittableModel,
    data: &'a [f64],
    positive: &'a [bool],
}

impl Objective<'_> {
    fn to_theta(&self, phi: &[f64]) -> Vec<f64> {
        phi.iter().zip(self.positive).map(|(&p, &pos)| if pos { p.exp() } else { p }).collect()
    }

    fn to_phi(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(self.positive).map(|(&t, &pos)| if pos { t.ln() } else { t }).collect()
    }

    fn loglik_theta(&self, theta: &[f64]) -> f64 {
        if theta.iter().zip(self.positive).any(|(&t, &pos)| !t.is_finite() || (pos && !(t > 0.0))) {
            return f64::NEG_INFINITY;
        }
        let ll = self.model.log_likelihood(self.data, theta);
        if ll.is_finite() {
            ll
        } else {
            f64::NEG_INFINITY
        }
    }

    fn loglik(&self, phi: &[f64]) -> f64 {
        self.loglik_theta(&self.to_theta(phi))
    }

    /// Gradient of ℓ on the original scale.
    fn grad_theta(&self, theta: &[f64]) -> Vec<f64> {
        if let Some(g) = self.model.score(self.data, theta) {
            if g.iter().all(|v| v.is_finite()) {
                return g;
            }
        }
        fd_gradient(|t| self.loglik_theta(t), theta)
    }

    /// Gradient of ℓ with respect to the optimizer coordinates.
    fn grad(&self, phi: &[f64]) -> Vec<f64> {
        let theta = self.to_theta(phi);
        let g = self.grad_theta(&theta);
        g.iter().zip(&theta).zip(self.positive).map(|((&gi, &ti), &pos)| if pos { gi * ti } else { gi }).collect()
    }

    fn hessian(&self, phi: &[f64]) -> DMatrix<f64> {
        let k = phi.len();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            let step = 1e-5 * phi[i].abs().max(1.0);
            let mut up = phi.to_vec();
            let mut dn = phi.to_vec();
            up[i] += step;
            dn[i] -= step;
            let gu = self.grad(&up);
            let gd = self.grad(&dn);
            for j in 0..k {
                h[(j, i)] = (gu[j] - gd[j]) / (2.0 * step);
            }
        }
        (&h + h.transpose()) * 0.5
    }
}

fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; theta.len()];
    let mut t = theta.to_vec();
    for i in 0..theta.len() {
        let h = 1e-6 * theta[i].abs().max(1e-3);
        t[i] = theta[i] + h;
        let up = f(&t);
        t[i] = theta[i] - h;
        let dn = f(&t);
        t[i] = theta[i];
        g[i] = (up - dn) / (2.0 * h);
    }
    g
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

/// Solves (-H) d = g, shifting -H toward positive definiteness when needed.
fn newton_direction(h: &DMatrix<f64>, g: &[f64]) -> Option<DVector<f64>> {
    let neg = -h;
    let gv = DVector::from_column_slice(g);
    let scale = neg.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let mut shift = 0.0;
    for _ in 0..30 {
        let mut m = neg.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&gv);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-8 * scale } else { shift * 10.0 };
    }
    None
}

struct Run {
    phi: Vec<f64>,
    loglik: f64,
    iterations: usize,
    converged: bool,
}

fn converged_at(obj: &Objective, phi: &[f64], ll: f64, delta: f64, opts: &FitOptions) -> bool {
    let scale = ll.abs().max(1.0);
    delta.abs() <= opts.loglik_tol * scale && sup_norm(&obj.grad_theta(&obj.to_theta(phi))) <= opts.grad_tol * scale
}

fn newton(obj: &Objective, start: &[f64], opts: &FitOptions, max_iter: usize) -> Run {
    let mut phi = start.to_vec();
    let mut ll = obj.loglik(&phi);
    let mut iterations = 0;
    if !ll.is_finite() {
        return Run { phi, loglik: ll, iterations, converged: false };
    }
    while iterations < max_iter {
        iterations += 1;
        let g = obj.grad(&phi);
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        let h = obj.hessian(&phi);
        let dir = match newton_direction(&h, &g) {
            Some(d) => d,
            None => DVector::from_column_slice(&g),
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = phi.iter().zip(dir.iter()).map(|(p, d)| p + step * d).collect();
            let lt = obj.loglik(&trial);
            if lt.is_finite() && lt >= ll {
                accepted = Some((trial, lt));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, lt)) = accepted else {
            return Run { converged: converged_at(obj, &phi, ll, 0.0, opts), phi, loglik: ll, iterations };
        };
        let delta = lt - ll;
        phi = trial;
        ll = lt;
        if converged_at(obj, &phi, ll, delta, opts) {
            return Run { phi, loglik: ll, iterations, converged: true };
        }
    }
    Run { converged: converged_at(obj, &phi, ll, 0.0, opts), phi, loglik: ll, iterations }
}

/// Nelder-Mead maximization of ℓ in optimizer coordinates.
fn simplex(obj: &Objective, start: &[f64], max_evals: usize) -> (Vec<f64>, f64) {
    let k = start.len();
    let f = |p: &[f64]| -obj.loglik(p);
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    pts.push((start.to_vec(), f(start)));
    for i in 0..k {
        let mut p = start.to_vec();
        p[i] += if p[i].abs() > 1e-3 { 0.1 * p[i].abs() } else { 0.1 };
        let v = f(&p);
        pts.push((p, v));
    }
    let mut evals = k + 1;
    while evals < max_evals {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = pts[0].1;
        let worst = pts[k].1;
        if (worst - best).abs() <= 1e-12 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..k).map(|d| pts[..k].iter().map(|p| p.0[d]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[k].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < pts[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            pts[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[k - 1].1 {
            pts[k] = (xr, fr);
        } else {
            let (xc, fc) = if fr < pts[k].1 {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < pts[k].1.min(fr) {
                pts[k] = (xc, fc);
            } else {
                let best = pts[0].0.clone();
                for p in pts.iter_mut().skip(1) {
                    p.0 = best.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    p.1 = f(&p.0);
                }
                evals += k;
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = pts.swap_remove(0);
    (p, -v)
}

fn starts(theta0: &[f64], positive: &[bool], n: usize) -> Vec<Vec<f64>> {
    const FACTORS: [f64; 4] = [0.25, 0.5, 2.0, 4.0];
    let k = theta0.len();
    (0..n)
        .map(|i| {
            let mut t = theta0.to_vec();
            if i > 0 {
                let coord = (i - 1) % k;
                let f = FACTORS[(i - 1) % FACTORS.len()];
                t[coord] = if positive[coord] { t[coord] * f } else { t[coord] + (f - 1.0) };
            }
            t
        })
        .collect()
}

/// Maximizes the log-likelihood of `model` on `data`.
pub fn mle_fit(model: &dyn FittableModel, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
    model.validate_data(data)?;
    let positive = model.param_positive();
    let obj = Objective { model, data, positive: &positive };
    let theta0 = model.initial_guess(data);
    let mut trace = Vec::new();
    let mut best: Option<Run> = None;
    let mut total_iter = 0;
    for (i, start) in starts(&theta0, &positive, opts.n_starts.max(1)).into_iter().enumerate() {
        let phi0 = obj.to_phi(&start);
        let mut run = newton(&obj, &phi0, opts, opts.max_iter);
        if !run.converged {
            let from = if run.loglik.is_finite() { run.phi.clone() } else { phi0.clone() };
            let (p, _) = simplex(&obj, &from, opts.simplex_evals);
            let polish = newton(&obj, &p, opts, 100);
            if polish.loglik.is_finite() && (polish.loglik >= run.loglik || !run.loglik.is_finite()) {
                run = Run { iterations: run.iterations + polish.iterations, ..polish };
            }
        }
        total_iter += run.iterations;
        trace.push(format!("start {i}: theta0 = {start:?}, loglik = {}, converged = {}", run.loglik, run.converged));
        if !run.loglik.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => run.loglik > b.loglik,
        };
        if better {
            best = Some(run);
        }
    }
    let Some(best) = best else {
        return Err(Error::FitFailure { model: model.name().to_string(), trace: trace.join("; ") });
    };
    let theta_hat = obj.to_theta(&best.phi);
    let grad_sup_norm = sup_norm(&obj.grad_theta(&theta_hat));
    let mut warnings = Vec::new();
    if !best.converged {
        warnings.push(format!("optimizer did not meet the convergence tolerances (gradient sup-norm {grad_sup_norm:.3e})"));
    }
    let (std_errors, se_warnings) = standard_errors(model, data, &theta_hat)?;
    warnings.extend(se_warnings);
    Ok(FitResult {
        model_name: model.name().to_string(),
        param_names: model.param_names().into_iter().map(String::from).collect(),
        theta_hat,
        std_errors,
        loglik: best.loglik,
        converged: best.converged,
        iterations: total_iter,
        grad_sup_norm,
        warnings,
        k: model.k(),
        n: data.len(),
    })
}

/// Square roots of the diagonal of the inverse observed information, from a
/// central-difference Hessian of -ℓ on the original parameter scale.
pub fn standard_errors(model: &dyn FittableModel, data: &[f64], theta: &[f64]) -> Result<(Vec<f64>, Vec<String>)> {
    let f = |t: &[f64]| negative_log_lik(model, data, t);
    let k = theta.len();
    let steps: Vec<f64> = theta.iter().map(|t| (1e-4 * t.abs()).max(1e-5)).collect();
    let f0 = f(theta)?;
    let mut h = DMatrix::zeros(k, k);
    let eval = |di: &[(usize, f64)]| -> Result<f64> {
        let mut t = theta.to_vec();
        for &(i, d) in di {
            t[i] += d;
        }
        f(&t)
    };
    for i in 0..k {
        let hi = steps[i];
        h[(i, i)] = (eval(&[(i, hi)])? - 2.0 * f0 + eval(&[(i, -hi)])?) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let v = (eval(&[(i, hi), (j, hj)])? - eval(&[(i, hi), (j, -hj)])? - eval(&[(i, -hi), (j, hj)])?
                + eval(&[(i, -hi), (j, -hj)])?)
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let mut warnings = Vec::new();
    if h.iter().any(|v| !v.is_finite()) {
        warnings.push("observed information is not finite; standard errors unavailable".to_string());
        return Ok((vec![f64::NAN; k], warnings));
    }
    let cov = match h.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => {
            warnings.push("observed information is not positive definite; using a pseudo-inverse".to_string());
            match h.pseudo_inverse(1e-12) {
                Ok(p) => p,
                Err(e) => {
                    warnings.push(format!("pseudo-inverse failed: {e}"));
                    return Ok((vec![f64::NAN; k], warnings));
                }
            }
        }
    };
    let se = (0..k)
        .map(|i| {
            let v = cov[(i, i)];
            if v > 0.0 {
                v.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect::<Vec<_>>();
    if se.iter().any(|v| v.is_nan()) {
        warnings.push("some variances are not positive; their standard errors are reported as NaN".to_string());
    }
    Ok((se, warnings))
}
