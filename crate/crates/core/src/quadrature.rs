//! Adaptive Gauss–Kronrod (10/21) quadrature for complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208649806610,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One GK21 panel on [a, b]: (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = Complex64::new(0.0, 0.0);
    for i in 0..10 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            initial_panels: 8,
            max_panels: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive integration: bisect the worst panel until the summed
/// error estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for i in 0..n0 {
        let pa = a + width * i as f64;
        let pb = if i + 1 == n0 { b } else { pa + width };
        let (v, e) = gk21(&f, pa, pb);
        total += v;
        err += e;
        heap.push(Panel { a: pa, b: pb, value: v, error: e });
    }
    let min_width = (b - a) * 1e-13;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NumericFailure(format!(
                "quadrature budget of {} panels exhausted, error estimate {err:.3e} > {target:.3e}",
                opts.max_panels
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.b - worst.a < min_width {
            return Err(Error::NumericFailure(format!(
                "panel [{}, {}] cannot be refined further, error estimate {err:.3e}",
                worst.a, worst.b
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum in interval order so the result does not depend on the
    // refinement history.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, panels: panels.len() })
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)> {
    let r = integrate(|t| Complex64::new(f(t), 0.0), a, b, opts)?;
    Ok((r.value.re, r.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // K21 integrates degree 31 exactly on one panel.
        let (v, _) = gk21(&|t: f64| Complex64::new(t.powi(30), 0.0), -1.0, 1.0);
        assert!((v.re - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integral() {
        // ∫_0^{10} e^{i 50 t} dt = (e^{500 i} − 1)/(50 i)
        let r = integrate(|t| Complex64::new(0.0, 50.0 * t).exp(), 0.0, 10.0, &QuadOptions::default()).unwrap();
        let exact = (Complex64::new(0.0, 500.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, initial_panels: 1, max_panels: 3 };
        let r = integrate(|t| Complex64::new(0.0, 1e4 * t).exp(), 0.0, 1.0, &opts);
        match r {
            Err(Error::NumericFailure(msg)) => assert!(msg.contains("error estimate")),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn singular_endpoint_converges() {
        let (v, _) = integrate_real(|t| t.sqrt(), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }
}
