//! Gamma variate generation.

use rand::Rng;
use rand_distr::StandardNormal;

/// Draws from Gamma(shape, 1).
///
/// Shapes ≥ 1 use the Marsaglia–Tsang squeeze/rejection method. Smaller
/// shapes are boosted: X = Y · U^{1/shape} with Y ~ Gamma(shape + 1).
/// The result is returned as a logarithm so that tiny shapes, whose draws
/// routinely sit far below the subnormal range, keep full precision.
pub fn ln_standard_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let ln_y = marsaglia_tsang(shape + 1.0, rng).ln();
        let u: f64 = open01(rng);
        return ln_y + u.ln() / shape;
    }
    marsaglia_tsang(shape, rng).ln()
}

pub fn standard_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    ln_standard_gamma(shape, rng).exp()
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn marsaglia_tsang<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = open01(rng);
        let z2 = z * z;
        // squeeze
        if u < 1.0 - 0.0331 * z2 * z2 {
            return d * v;
        }
        if u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
