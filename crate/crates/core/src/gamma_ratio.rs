//! The gamma-odds family: H(x) = Q(α, β·(1 - G₁(x))/G₁(x)) for a base G₁.
//!
//! Expectations (moments, generating functions, entropy) are computed by
//! quadrature over the latent gamma variable, which is the authoritative
//! route. The double and triple series expansions are exposed as formal
//! evaluators that report whether they actually converged.

use num_complex::Complex64;
use rand::Rng;

use crate::base_dist::BaseDistribution;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadTolerance};
use crate::sampling::ln_standard_gamma;
use crate::series::{double_sum, SeriesControl, SeriesResult};
use crate::specfun::{
    digamma_unchecked, gamma_tails, gen_binomial, inv_reg_lower_gamma, inv_reg_upper_gamma, ln_gamma_unchecked,
    AccuracyPolicy,
};

/// Lower clamp on G₁ inside the family formulas.
pub const CDF_EPS: f64 = f64::EPSILON;

const TAIL_DECADES: std::ops::RangeInclusive<i32> = 2..=12;

/// ln y with P(α, y) = p. Below the normal range y^α is taken from the
/// leading term y^α/Γ(α+1) of the lower series, whose relative error is O(y).
pub(crate) fn ln_latent_lower(alpha: f64, p: f64) -> Result<f64> {
    let y = inv_reg_lower_gamma(alpha, p, AccuracyPolicy::default())?;
    if y > 1e-250 {
        Ok(y.ln())
    } else {
        Ok((p.ln() + ln_gamma_unchecked(alpha + 1.0)) / alpha)
    }
}

/// ln y with Q(α, y) = p; see [`ln_latent_lower`].
pub(crate) fn ln_latent_upper(alpha: f64, p: f64) -> Result<f64> {
    let y = inv_reg_upper_gamma(alpha, p, AccuracyPolicy::default())?;
    if y > 1e-250 {
        Ok(y.ln())
    } else {
        Ok(((-p).ln_1p() + ln_gamma_unchecked(alpha + 1.0)) / alpha)
    }
}

#[derive(Debug, Clone)]
struct LatentGrid {
    /// ln y_d with P(α, y_d) = 10^{-d}, d = 2..=12, in increasing d order.
    /// Kept in logs because y_d underflows for small α.
    tail: Vec<f64>,
    median: f64,
    /// Upper-tail cutoff, Q(α, y_hi) = 1e-16.
    high: f64,
}

impl LatentGrid {
    fn new(alpha: f64) -> Result<Self> {
        let pol = AccuracyPolicy::default();
        let tail = TAIL_DECADES.map(|d| ln_latent_lower(alpha, 10f64.powi(-d))).collect::<Result<Vec<_>>>()?;
        let median = inv_reg_upper_gamma(alpha, 0.5, pol)?;
        let high = inv_reg_upper_gamma(alpha, 1e-16, pol)?;
        Ok(Self { tail, median, high })
    }
}

/// A member of the gamma-odds family with gamma shape `alpha`, gamma rate
/// `beta` and base distribution `base`.
#[derive(Debug, Clone)]
pub struct GammaRatioDist<B> {
    alpha: f64,
    beta: f64,
    base: B,
    ln_norm: f64,
    grid: LatentGrid,
}

/// Raw pieces of a latent-variable quadrature.
struct Pieces {
    /// ∫ over y ∈ [0, y_12]: the far upper tail in x.
    innermost: f64,
    innermost_converged: bool,
    /// Pieces between consecutive y_d, ordered d = 11→12 first ... 2→3 last.
    increments: Vec<f64>,
    /// Everything for y ≥ y_2.
    body: f64,
}

impl Pieces {
    fn total(&self) -> f64 {
        self.innermost + self.increments.iter().sum::<f64>() + self.body
    }

    /// Checks that the partial integrals over [x_lower, x_d], x_d the
    /// 1 - 10^{-d} quantile, behave like a Cauchy sequence.
    fn cauchy_check(&self) -> std::result::Result<f64, String> {
        let total = self.total();
        if !total.is_finite() || !self.innermost.is_finite() || self.increments.iter().any(|v| !v.is_finite()) {
            return Err("non-finite partial integral".into());
        }
        // increments[0] is the piece nearest the tail (between d=11 and d=12).
        let d = &self.increments;
        let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        let negligible = 1e-14 * (1.0 + total.abs());
        let last = mags[0];
        if last > negligible {
            let r1 = mags[0] / mags[1].max(f64::MIN_POSITIVE);
            let r2 = mags[1] / mags[2].max(f64::MIN_POSITIVE);
            if r1 >= 0.95 && r2 >= 0.95 {
                return Err(format!(
                    "partial integrals over [.., quantile(1 - 10^-d)] keep growing (increment ratios {r2:.3}, {r1:.3})"
                ));
            }
            if !self.innermost_converged && self.innermost.abs() > 10.0 * last {
                return Err(format!(
                    "tail beyond quantile(1 - 1e-12) does not settle (|tail| = {:.3e}, last increment {last:.3e})",
                    self.innermost.abs()
                ));
            }
        }
        Ok(total)
    }
}

impl<B: BaseDistribution> GammaRatioDist<B> {
    pub fn new(alpha: f64, beta: f64, base: B) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
        }
        let ln_norm = alpha * beta.ln() - ln_gamma_unchecked(alpha);
        let grid = LatentGrid::new(alpha)?;
        Ok(Self { alpha, beta, base, ln_norm, grid })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn support(&self) -> (f64, f64) {
        self.base.support()
    }

    /// Parameter vector (α, β, θ₁, …).
    pub fn params(&self) -> Vec<f64> {
        let mut p = vec![self.alpha, self.beta];
        p.extend(self.base.params());
        p
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        if params.len() < 2 {
            return Err(Error::domain("need at least alpha and beta"));
        }
        GammaRatioDist::new(params[0], params[1], self.base.with_params(&params[2..])?)
    }

    /// ln w(x) with w = (1 - G₁)/G₁; `None` outside the open support.
    fn ln_odds(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.base.support();
        if x.is_nan() || x <= lo || x >= hi {
            return None;
        }
        let g = self.base.cdf(x);
        if g <= 0.0 {
            return None;
        }
        Some(self.base.ln_sf(x) - g.max(CDF_EPS).ln())
    }

    /// The odds transform w(x) = (1 - G₁(x))/G₁(x); +∞ where G₁(x) = 0.
    pub fn odds(&self, x: f64) -> f64 {
        if x >= self.base.support().1 {
            return 0.0;
        }
        match self.ln_odds(x) {
            Some(l) => l.exp(),
            None => f64::INFINITY,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.base.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let w = self.odds(x);
        gamma_tails(self.alpha, self.beta * w).q()
    }

    /// 1 - H(x), evaluated as the lower incomplete gamma tail.
    pub fn sf(&self, x: f64) -> f64 {
        self.ln_sf(x).exp()
    }

    fn ln_sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.base.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return f64::NEG_INFINITY;
        }
        gamma_tails(self.alpha, self.beta * self.odds(x)).ln_p
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let Some(ln_w) = self.ln_odds(x) else { return f64::NEG_INFINITY };
        if ln_w == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let g = self.base.cdf(x).max(CDF_EPS);
        let w = ln_w.exp();
        self.base.log_pdf(x) - 2.0 * g.ln() + self.ln_norm + (self.alpha - 1.0) * ln_w - self.beta * w
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Hazard (risk) function h(x)/(1 - H(x)).
    pub fn hazard(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.base.support();
        if !(x > lo && x < hi) {
            return Err(Error::domain(format!("hazard requires x inside the support ({lo}, {hi}), got {x}")));
        }
        let ln_s = self.ln_sf(x);
        if ln_s < 1e-300f64.ln() {
            return Err(Error::Overflow(format!(
                "1 - H({x}) = exp({ln_s:.1}) is below 1e-300; hazard not representable"
            )));
        }
        Ok((self.log_pdf(x) - ln_s).exp())
    }

    /// Maps a latent Gamma(α, 1) value y to x = G₁⁻¹(1/(1 + y/β)).
    fn x_from_latent(&self, y: f64) -> f64 {
        self.x_from_ln_latent(y.ln())
    }

    /// The x whose odds equal y/β, from ln y.
    fn x_from_ln_latent(&self, ln_y: f64) -> f64 {
        let (lo, hi) = self.base.support();
        if ln_y == f64::NEG_INFINITY {
            return hi;
        }
        if ln_y == f64::INFINITY {
            return lo;
        }
        let ln_w = ln_y - self.beta.ln();
        if ln_w <= 0.0 {
            // sf = w/(1 + w)
            self.base.quantile_upper_ln(ln_w - ln_w.exp().ln_1p())
        } else {
            self.base.quantile(1.0 / (1.0 + ln_w.exp()))
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        Ok(self.x_from_ln_latent(ln_latent_upper(self.alpha, p)?))
    }

    /// n independent draws; X = G₁⁻¹(1/(1 + T)) with T ~ Gamma(α, rate β).
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.x_from_ln_latent(ln_standard_gamma(self.alpha, rng))
    }

    /// Analytic gradient of ln h(x) with respect to (α, β, θ₁, …).
    pub fn log_pdf_gradient(&self, x: f64) -> Vec<f64> {
        let n = 2 + self.base.params().len();
        let Some(ln_w) = self.ln_odds(x) else { return vec![f64::NAN; n] };
        let w = ln_w.exp();
        let g = self.base.cdf(x).max(CDF_EPS);
        let s = self.base.sf(x);
        let mut grad = vec![self.beta.ln() - digamma_unchecked(self.alpha) + ln_w, self.alpha / self.beta - w];
        let dg = self.base.d_cdf_dparams(x);
        let dlog = self.base.d_logpdf_dparams(x);
        for (gt, lt) in dg.iter().zip(dlog.iter()) {
            // w = 1/G - 1, ln w = ln(1 - G) - ln G
            let d_ln_w = -gt / (g * s);
            let d_w = -gt / (g * g);
            grad.push(lt - 2.0 * gt / g + (self.alpha - 1.0) * d_ln_w - self.beta * d_w);
        }
        grad
    }

    // ---------------------------------------------------------------------
    // Latent-variable quadrature

    /// Integrates f(x, ln ω) over the latent gamma measure, where ln ω is the
    /// log of the measure density with respect to the integration variable.
    /// `f` must return φ(x)·exp(ln ω).
    fn latent_pieces<F: Fn(f64, f64) -> f64>(&self, f: F) -> Pieces {
        let a = self.alpha;
        let tol = QuadTolerance::abs(1e-12);
        let lg1 = ln_gamma_unchecked(a + 1.0);
        let lg = ln_gamma_unchecked(a);
        let direct = |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            f(self.x_from_latent(y), (a - 1.0) * y.ln() - y - lg)
        };
        // For α < 1 the factor y^{α-1} is singular at 0, so pieces below the
        // median are integrated in v = y^α: y^{α-1} e^{-y} dy / Γ(α) = e^{-y} dv / Γ(α+1).
        // Elsewhere y itself is used, since y^α stretches the upper body over
        // so many decades that the first Kronrod pass can miss the mass.
        let substituted = |ln_y0: f64, ln_y1: f64| {
            integrate(
                |v: f64| {
                    if v <= 0.0 {
                        return 0.0;
                    }
                    let ln_y = v.ln() / a;
                    f(self.x_from_ln_latent(ln_y), -ln_y.exp() - lg1)
                },
                (a * ln_y0).exp(),
                (a * ln_y1).exp(),
                tol,
            )
        };
        // bounds are ln y
        let piece = |ln_y0: f64, ln_y1: f64| {
            if a < 1.0 {
                substituted(ln_y0, ln_y1)
            } else {
                integrate(direct, ln_y0.exp(), ln_y1.exp(), tol)
            }
        };
        let tail = &self.grid.tail;
        let inner = piece(f64::NEG_INFINITY, tail[tail.len() - 1]);
        let mut increments = Vec::with_capacity(tail.len() - 1);
        for i in (1..tail.len()).rev() {
            increments.push(piece(tail[i], tail[i - 1]).value);
        }
        let mut body = 0.0;
        let mut edge = tail[0].exp();
        if self.grid.median > edge {
            body += piece(tail[0], self.grid.median.ln()).value;
            edge = self.grid.median;
        }
        if a < 1.0 && edge < 1.0 && self.grid.high > 1.0 {
            body += substituted(edge.ln(), 0.0).value;
            edge = 1.0;
        }
        if self.grid.high > edge {
            body += integrate(direct, edge, self.grid.high, tol).value;
            edge = self.grid.high;
        }
        body += integrate_to_infinity(direct, edge, tol).value;
        Pieces { innermost: inner.value, innermost_converged: inner.converged, increments, body }
    }

    /// E[φ(X)] with the existence pre-check.
    pub fn expectation<F: Fn(f64) -> f64>(&self, phi: F) -> Result<f64> {
        self.latent_pieces(|x, ln_w| {
            let v = phi(x);
            if v == 0.0 {
                0.0
            } else {
                v * ln_w.exp()
            }
        })
        .cauchy_check()
        .map_err(Error::Divergence)
    }

    /// E[φ(X)] without the existence check, for callers that know the
    /// integral converges.
    pub(crate) fn expectation_trusted<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.latent_pieces(|x, ln_w| {
            let v = phi(x);
            if v == 0.0 {
                0.0
            } else {
                v * ln_w.exp()
            }
        })
        .total()
    }

    /// μ_m = E[X^m] by quadrature.
    pub fn moment_quadrature(&self, m: u32) -> Result<f64> {
        self.expectation(|x| x.powi(m as i32))
            .map_err(|e| Error::MomentUndefined { order: m, reason: e.to_string() })
    }

    /// Central moment E[(X - μ)^m] from quadrature raw moments.
    pub fn central_moment_quadrature(&self, m: u32) -> Result<f64> {
        match m {
            0 => return Ok(1.0),
            1 => return Ok(0.0),
            _ => {}
        }
        let mut raw = vec![1.0];
        for r in 1..=m {
            raw.push(self.moment_quadrature(r)?);
        }
        Ok(central_from_raw(&raw, m))
    }

    /// C_g(m) = μ'_m / (μ'_2)^{m/2}.
    pub fn general_coefficient(&self, m: u32) -> Result<f64> {
        let var = self.central_moment_quadrature(2)?;
        if !(var > 0.0) {
            return Err(Error::Degenerate(format!("variance is {var}")));
        }
        if m == 2 {
            return Ok(1.0);
        }
        Ok(self.central_moment_quadrature(m)? / var.powf(m as f64 / 2.0))
    }

    pub fn skewness(&self) -> Result<f64> {
        self.general_coefficient(3)
    }

    pub fn kurtosis(&self) -> Result<f64> {
        self.general_coefficient(4)
    }

    /// Estimated exponential decay rate of the upper tail of H, from two
    /// deep quantiles. For the exponential base this is αλ.
    pub fn tail_decay_rate(&self) -> f64 {
        let t = &self.grid.tail;
        // t[8] ↔ 1 - 1e-10, t[10] ↔ 1 - 1e-12
        let x1 = self.x_from_ln_latent(t[8]);
        let x2 = self.x_from_ln_latent(t[10]);
        if x2.is_finite() && x2 > x1 {
            2.0 * std::f64::consts::LN_10 / (x2 - x1)
        } else {
            f64::INFINITY
        }
    }

    /// E[e^{tX}] by quadrature.
    pub fn mgf_quadrature(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        self.expectation(|x| (t * x).exp())
            .map_err(|_| Error::MgfUndefined { t, threshold: self.tail_decay_rate() })
    }

    /// Characteristic function (E cos tX, E sin tX).
    pub fn cf(&self, t: f64) -> Result<(f64, f64)> {
        if t == 0.0 {
            return Ok((1.0, 0.0));
        }
        let re = self.expectation(|x| (t * x).cos())?;
        let im = self.expectation(|x| (t * x).sin())?;
        Ok((re, im))
    }

    /// Rényi entropy (1/(1-η)) ln ∫ h^η dx by quadrature.
    pub fn renyi_entropy(&self, eta: f64) -> Result<f64> {
        check_eta(eta)?;
        let integral = self
            .latent_pieces(|x, ln_w| {
                let lp = self.log_pdf(x);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    ((eta - 1.0) * lp + ln_w).exp()
                }
            })
            .cauchy_check()
            .map_err(Error::EntropyUndefined)?;
        if !(integral > 0.0) {
            return Err(Error::EntropyUndefined(format!("∫ h^η dx = {integral}")));
        }
        Ok(integral.ln() / (1.0 - eta))
    }

    // ---------------------------------------------------------------------
    // τ functional and series

    /// τ_{m,η,r} = ∫ x^m g₁(x)^η G₁(x)^r dG₁(x).
    pub fn tau(&self, m: u32, eta: f64, r: f64) -> Result<f64> {
        let diverges = || Error::Divergence(format!("tau(m={m}, eta={eta}, r={r}) is not integrable"));
        let mut total = 0.0;
        for upper in [false, true] {
            // On each half, s → 0 approaches an endpoint of G₁ ∈ (0, 1).
            let ln_f = |s: f64| -> (f64, f64) {
                let (x, gcdf) = if upper {
                    (self.base.quantile_upper(s), 1.0 - s)
                } else {
                    (self.base.quantile(s), s)
                };
                let sign = if x < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
                let xm = if m == 0 { 0.0 } else { m as f64 * x.abs().ln() };
                let ge = if eta == 0.0 { 0.0 } else { eta * self.base.log_pdf(x) };
                let gr = if r == 0.0 { 0.0 } else { r * gcdf.ln() };
                (sign, xm + ge + gr)
            };
            let (s1, s2) = (1e-9, 1e-11);
            let (_, l1) = ln_f(s1);
            let (_, l2) = ln_f(s2);
            if l1.is_nan() || l2.is_nan() || l1 == f64::INFINITY || l2 == f64::INFINITY {
                return Err(diverges());
            }
            let exponent = if l2 == f64::NEG_INFINITY { f64::INFINITY } else { (l1 - l2) / (s1.ln() - s2.ln()) };
            if exponent <= -1.0 + 1e-6 {
                return Err(diverges());
            }
            // u = σ^q flattens an integrable power singularity at the endpoint.
            let q = if exponent < 0.0 { 1.0 / (1.0 + exponent) } else { 1.0 };
            let ln_q = q.ln();
            let res = integrate(
                |sig: f64| {
                    if sig <= 0.0 {
                        return 0.0;
                    }
                    let ln_sig = sig.ln();
                    let s = (q * ln_sig).exp();
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let (sign, l) = ln_f(s);
                    sign * (l + ln_q + (q - 1.0) * ln_sig).exp()
                },
                0.0,
                0.5f64.powf(1.0 / q),
                QuadTolerance::abs(5e-11),
            );
            if !res.value.is_finite() {
                return Err(diverges());
            }
            total += res.value;
        }
        Ok(total)
    }

    fn series_coef(&self, k: usize) -> f64 {
        // β^{α+k} / (k! Γ(α))
        (self.ln_norm + k as f64 * self.beta.ln() - ln_gamma_unchecked(k as f64 + 1.0)).exp()
    }

    /// The expansion μ_m = ΣΣ (-1)^{k+j} β^{α+k}/(k!Γ(α)) C(k+α-1, j) τ_{m,0,j-α-k-1}.
    pub fn moment_series(&self, m: u32, ctrl: &SeriesControl) -> SeriesResult {
        let a = self.alpha;
        double_sum(ctrl, |k, j| {
            let c = self.series_coef(k) * gen_binomial(k as f64 + a - 1.0, j as u32);
            if c == 0.0 {
                return Ok(0.0);
            }
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * c * self.tau(m, 0.0, j as f64 - a - k as f64 - 1.0)?)
        })
    }

    /// Central moment from the series raw moments μ_1..μ_m.
    pub fn central_moment_series(&self, m: u32, ctrl: &SeriesControl) -> SeriesResult {
        central_series(m, |r| self.moment_series(r, ctrl))
    }

    /// Triple expansion of E e^{tX} in powers of t.
    pub fn mgf_series(&self, t: f64, ctrl: &SeriesControl) -> SeriesResult {
        self.power_series_in_t(ctrl, |mm| Complex64::new(t.powi(mm as i32), 0.0)).map(|z| z.re)
    }

    /// Triple expansion of E e^{itX}.
    pub fn cf_series(&self, t: f64, ctrl: &SeriesControl) -> SeriesResult<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        self.power_series_in_t(ctrl, |mm| (i * t).powi(mm as i32))
    }

    fn power_series_in_t<P: Fn(usize) -> Complex64>(&self, ctrl: &SeriesControl, pow: P) -> SeriesResult<Complex64> {
        let a = self.alpha;
        double_sum(ctrl, |k, j| {
            let c = self.series_coef(k) * gen_binomial(k as f64 + a - 1.0, j as u32);
            if c == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            let r = j as f64 - a - k as f64 - 1.0;
            let mut inner = Complex64::new(0.0, 0.0);
            let mut ln_fact = 0.0;
            for mm in 0..=ctrl.j_max {
                if mm > 0 {
                    ln_fact += (mm as f64).ln();
                }
                let term = pow(mm) * (self.tau(mm as u32, 0.0, r)? / ln_fact.exp());
                inner += term;
                if term.norm() <= ctrl.tail_tol * inner.norm() && mm > 0 {
                    return Ok(inner * (sign * c));
                }
            }
            Err(Error::Divergence(format!("power series in t not closed within {} terms", ctrl.j_max)))
        })
    }

    /// Expansion of the Rényi entropy through τ_{0,η-1,-η(α+1)-k+j}.
    pub fn renyi_series(&self, eta: f64, ctrl: &SeriesControl) -> SeriesResult {
        if let Err(e) = check_eta(eta) {
            return SeriesResult::failed(f64::NAN, e.to_string());
        }
        let a = self.alpha;
        let b = self.beta;
        let lg = ln_gamma_unchecked(a);
        let inner = double_sum(ctrl, |k, j| {
            let kf = k as f64;
            let ln_c = kf * eta.ln() + (eta * a + kf) * b.ln() - ln_gamma_unchecked(kf + 1.0) - eta * lg;
            let c = ln_c.exp() * gen_binomial(eta * (a - 1.0) + kf, j as u32);
            if c == 0.0 {
                return Ok(0.0);
            }
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * c * self.tau(0, eta - 1.0, -eta * (a + 1.0) - kf + j as f64)?)
        });
        log_entropy(inner, eta)
    }

    /// The H-expansion ΣΣ (-1)^{k+j} β^{α+k}/(k!(j-α-k)Γ(α)) C(k+α-1, j) G₁^{j-α-k}.
    /// Only defined for non-integer α (the j = α + k pole).
    ///
    /// The termwise antiderivative of the density expansion vanishes at the
    /// upper end of the support, so the double sum converges to H - 1; the
    /// returned value adds the constant back.
    pub fn cdf_expansion(&self, x: f64, ctrl: &SeriesControl) -> Result<SeriesResult> {
        let a = self.alpha;
        if a.fract() == 0.0 {
            return Err(Error::domain(format!("cdf expansion has a pole at j = alpha + k for integer alpha = {a}")));
        }
        let g = self.base.cdf(x);
        if !(g > 0.0) {
            return Err(Error::domain(format!("cdf expansion needs G1(x) > 0, got {g}")));
        }
        let ln_g = g.ln();
        let sum = double_sum(ctrl, |k, j| {
            let kf = k as f64;
            let c = self.series_coef(k) * gen_binomial(kf + a - 1.0, j as u32);
            if c == 0.0 {
                return Ok(0.0);
            }
            let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
            let e = j as f64 - a - kf;
            Ok(sign * c / e * (e * ln_g).exp())
        });
        Ok(sum.map(|v| 1.0 + v))
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::domain(format!("Renyi order must be positive, got {eta}")));
    }
    if eta == 1.0 {
        return Err(Error::domain("Renyi order 1 (Shannon limit) is not supported"));
    }
    Ok(())
}

pub(crate) fn log_entropy(inner: SeriesResult, eta: f64) -> SeriesResult {
    if inner.value > 0.0 {
        inner.map(|v| v.ln() / (1.0 - eta))
    } else {
        let mut r = inner.map(|_| f64::NAN);
        r.converged = false;
        if r.diagnostic.is_empty() {
            r.diagnostic = "series inside the logarithm is not positive".into();
        } else {
            r.diagnostic.push_str("; series inside the logarithm is not positive");
        }
        r
    }
}

/// μ'_m = Σ_r C(m,r) (-1)^r μ^r μ_{m-r} from raw moments raw[0..=m].
pub fn central_from_raw(raw: &[f64], m: u32) -> f64 {
    let mu = raw[1];
    let mut acc = 0.0;
    for r in 0..=m {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        acc += gen_binomial(m as f64, r) * sign * mu.powi(r as i32) * raw[(m - r) as usize];
    }
    acc
}

pub(crate) fn central_series<F: FnMut(u32) -> SeriesResult>(m: u32, mut raw_series: F) -> SeriesResult {
    if m == 0 {
        return SeriesResult { value: 1.0, terms_used: (0, 0), converged: true, diagnostic: String::new() };
    }
    let mut raw = vec![1.0];
    let mut converged = true;
    let mut diagnostic = String::new();
    let mut terms = (0, 0);
    for r in 1..=m {
        let s = raw_series(r);
        terms.0 = terms.0.max(s.terms_used.0);
        terms.1 = terms.1.max(s.terms_used.1);
        if !s.converged {
            converged = false;
            if diagnostic.is_empty() {
                diagnostic = format!("raw moment {r}: {}", s.diagnostic);
            }
        }
        raw.push(s.value);
    }
    let value = if m == 1 { 0.0 } else { central_from_raw(&raw, m) };
    SeriesResult { value, terms_used: terms, converged, diagnostic }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_dist::make_exponential;
    use crate::base_dist::Exponential;

    fn dist(a: f64, b: f64, l: f64) -> GammaRatioDist<Exponential> {
        GammaRatioDist::new(a, b, make_exponential(l).unwrap()).unwrap()
    }

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn rejects_bad_parameters() {
        let e = make_exponential(1.0).unwrap();
        assert!(GammaRatioDist::new(0.0, 1.0, e).is_err());
        assert!(GammaRatioDist::new(1.0, -1.0, e).is_err());
    }

    #[test]
    fn odds_examples() {
        let d = dist(1.0, 1.0, 1.0);
        assert!((d.odds(LN2) - 1.0).abs() < 1e-15);
        assert!(d.odds(50.0) < 1e-20);
        assert_eq!(d.odds(0.0), f64::INFINITY);
        assert_eq!(d.odds(-1.0), f64::INFINITY);
    }

    #[test]
    fn unit_shape_closed_forms() {
        let d = dist(1.0, 1.0, 1.0);
        let e1 = (-1f64).exp();
        assert!((d.cdf(LN2) - e1).abs() < 1e-15);
        assert!((d.pdf(LN2) - 2.0 * e1).abs() < 1e-15);
        assert!((d.hazard(LN2).unwrap() - 2.0 * e1 / (1.0 - e1)).abs() < 1e-14);
        assert!((d.quantile(e1).unwrap() - LN2).abs() < 1e-12);
    }

    #[test]
    fn outside_support() {
        let d = dist(0.131, 0.179, 0.539);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(-3.0), 0.0);
        assert_eq!(d.pdf(-3.0), 0.0);
        assert_eq!(d.pdf(0.0), 0.0);
        assert!(d.hazard(0.0).is_err());
        assert_eq!(d.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn quantile_limits_and_errors() {
        let d = dist(0.131, 0.179, 0.539);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(1e-12).unwrap() < d.quantile(1e-3).unwrap());
        assert!(d.quantile(1.0 - 1e-12).unwrap() > 300.0);
    }

    #[test]
    fn hazard_overflow_is_an_error() {
        let d = dist(3.0, 1.0, 1.0);
        match d.hazard(700.0) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn empty_sample() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(dist(1.0, 1.0, 1.0).sample(0, &mut rng).is_empty());
    }

    #[test]
    fn unit_shape_sampler_reduction() {
        use rand::SeedableRng;
        // α = β = λ = 1: X = ln(1 + 1/T), T ~ Exp(1)
        let d = dist(1.0, 1.0, 1.0);
        let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = d.sample_one(&mut r1);
            let t = ln_standard_gamma(1.0, &mut r2).exp();
            assert!((x - (1.0 + 1.0 / t).ln()).abs() < 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn tau_examples() {
        let d = dist(0.5, 1.0, 1.0);
        assert!((d.tau(0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        for &r in &[-0.9, -0.5, 0.5, 3.0] {
            let v = d.tau(0, 0.0, r).unwrap();
            assert!((v - 1.0 / (r + 1.0)).abs() < 1e-9, "r={r}: {v}");
        }
        assert!((d.tau(1, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        // E[X^2] of Exp(1)
        assert!((d.tau(2, 0.0, 0.0).unwrap() - 2.0).abs() < 1e-9);
        // ∫ g^1 dG = λ/2 for Exp(λ)
        let d3 = dist(0.5, 1.0, 3.0);
        assert!((d3.tau(0, 1.0, 0.0).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn tau_detects_non_integrability() {
        let d = dist(0.5, 1.0, 1.0);
        match d.tau(0, 0.0, -1.5) {
            Err(Error::Divergence(msg)) => assert!(msg.contains("m=0") && msg.contains("r=-1.5")),
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(d.tau(0, 0.0, -1.0).is_err());
        // x^1 G^{-1.5}: x ~ G near zero, so the exponent is -0.5: integrable
        assert!(d.tau(1, 0.0, -1.5).is_ok());
    }

    #[test]
    fn moment_zero_is_one() {
        for &(a, b, l) in &[(0.131, 0.179, 0.539), (2.0, 1.0, 1.0), (5.0, 0.3, 2.0)] {
            let d = dist(a, b, l);
            assert!((d.moment_quadrature(0).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn central_moment_edges() {
        let d = dist(2.0, 1.0, 1.0);
        assert_eq!(d.central_moment_quadrature(0).unwrap(), 1.0);
        assert_eq!(d.central_moment_quadrature(1).unwrap(), 0.0);
        assert_eq!(d.general_coefficient(2).unwrap(), 1.0);
    }

    #[test]
    fn mgf_and_cf_at_zero() {
        let d = dist(0.131, 0.179, 0.539);
        assert_eq!(d.mgf_quadrature(0.0).unwrap(), 1.0);
        assert_eq!(d.cf(0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn mgf_beyond_tail_rate_is_undefined() {
        let d = dist(2.0, 1.0, 1.0);
        assert!((d.tail_decay_rate() - 2.0).abs() < 0.05);
        match d.mgf_quadrature(2.5) {
            Err(Error::MgfUndefined { threshold, .. }) => assert!((threshold - 2.0).abs() < 0.05),
            other => panic!("expected MgfUndefined, got {other:?}"),
        }
        assert!(d.mgf_quadrature(1.0).is_ok());
    }

    #[test]
    fn renyi_order_checks() {
        let d = dist(1.0, 1.0, 1.0);
        assert!(d.renyi_entropy(1.0).is_err());
        assert!(d.renyi_entropy(0.0).is_err());
        assert!(d.renyi_entropy(2.0).is_ok());
    }

    #[test]
    fn cdf_expansion_refuses_integer_alpha() {
        let d = dist(2.0, 1.0, 1.0);
        assert!(d.cdf_expansion(1.0, &SeriesControl::default()).is_err());
        let d = dist(0.5, 1.0, 1.0);
        assert!(d.cdf_expansion(1.0, &SeriesControl::default()).is_ok());
    }

    #[test]
    fn central_from_raw_matches_definition() {
        // raw moments of Exp(1): m!
        let raw = [1.0, 1.0, 2.0, 6.0, 24.0];
        assert!((central_from_raw(&raw, 2) - 1.0).abs() < 1e-15);
        assert!((central_from_raw(&raw, 3) - 2.0).abs() < 1e-14);
        assert!((central_from_raw(&raw, 4) - 9.0).abs() < 1e-13);
    }
}
