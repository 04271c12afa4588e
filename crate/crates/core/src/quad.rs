//! Globally adaptive Gauss–Kronrod (7/15) quadrature with interval bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (index 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum bisection depth of any interval.
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-12, max_depth: 60, max_intervals: 5000 }
    }
}

impl QuadTolerance {
    pub fn abs(abs: f64) -> Self {
        Self { abs, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// True when the error estimate met the tolerance.
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTolerance) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    }
    if b < a {
        let r = integrate(f, b, a, tol);
        return QuadResult { value: -r.value, ..r };
    }
    let (v, e) = kronrod(&f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e, depth: 0 });
    let mut total = v;
    let mut total_err = e;
    // Segments that can no longer be split; their error stays in the total.
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;

    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target || heap.len() >= tol.max_intervals {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        if seg.depth >= tol.max_depth || !seg.error.is_finite() {
            frozen_err += seg.error;
            frozen_value += seg.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (lv, le) = kronrod(&f, seg.a, mid);
        let (rv, re) = kronrod(&f, mid, seg.b);
        evaluations += 30;
        total += lv + rv - seg.value;
        total_err += le + re - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: lv, error: le, depth: seg.depth + 1 });
        heap.push(Segment { a: mid, b: seg.b, value: rv, error: re, depth: seg.depth + 1 });
        if heap.is_empty() {
            break;
        }
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum::<f64>() + frozen_value;
    let error: f64 = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    let target = tol.abs.max(tol.rel * value.abs());
    QuadResult { value, error, evaluations, converged: error <= target && value.is_finite() }
}

/// Integrates `f` over `[a, ∞)` through the map t = a + s/(1-s).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: QuadTolerance) -> QuadResult {
    integrate(
        |s| {
            let one_minus = 1.0 - s;
            let t = a + s / one_minus;
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        tol,
    )
}
