//! Closed-form Volterra kernels and their quadrature oracles.
//!
//! The kernel of the integral equation for the amplitudes is
//!
//! ```text
//! K(φ, s) = ∫₀^Λ cos(zφ) W(z) (1 − e^{i(1−z)s}) / (z − 1) dz
//! ```
//!
//! with `W` the model weight (see [`CouplingModel::weight`]). Partial
//! fractions split it as `K1 − K2 − 2K3` (const) or `K1 − K2 + 2K3` (lin),
//! where `K1`, `K2`, `K3` carry the denominators `4(z−1)`, `4(z+1)` and
//! `4(z+1)²`. Each piece reduces to boundary values of
//! `E(x) = ∫₀ˣ (e^{it} − 1)/t dt` ([`regularized_csi`]), in which the
//! logarithms of `Csi` at the two ends of each `z` interval cancel exactly.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::CouplingModel;
use crate::quad;
use crate::specfun::{exp_over_u, exp_over_u2, regularized_csi};

fn r(a: f64, cutoff: f64) -> Complex64 {
    regularized_csi(a * (cutoff - 1.0)) - regularized_csi(-a)
}

fn p1(a: f64, cutoff: f64) -> Complex64 {
    exp_over_u(a, 1.0, cutoff + 1.0)
}

fn p2(a: f64, cutoff: f64) -> Complex64 {
    exp_over_u2(a, 1.0, cutoff + 1.0)
}

/// `¼ ∫₀^Λ cos(zφ) (1 − e^{i(1−z)s}) / (z − 1) dz`.
pub fn kernel_k1(phase: f64, lag: f64, cutoff: f64) -> Complex64 {
    let (ep, em) = (Complex64::cis(phase), Complex64::cis(-phase));
    let a = ep * (r(phase, cutoff) - r(phase - lag, cutoff));
    let b = em * (r(-phase, cutoff) - r(-phase - lag, cutoff));
    (a + b) * 0.125
}

fn k2_like(phase: f64, lag: f64, cutoff: f64, p: fn(f64, f64) -> Complex64) -> Complex64 {
    let (ep, em) = (Complex64::cis(phase), Complex64::cis(-phase));
    let now = em * p(phase, cutoff) + ep * p(-phase, cutoff);
    let lagged = em * p(phase - lag, cutoff) + ep * p(-phase - lag, cutoff);
    (now - Complex64::cis(2.0 * lag) * lagged) * 0.125
}

/// `¼ ∫₀^Λ cos(zφ) (1 − e^{i(1−z)s}) / (z + 1) dz`.
pub fn kernel_k2(phase: f64, lag: f64, cutoff: f64) -> Complex64 {
    k2_like(phase, lag, cutoff, p1)
}

/// `¼ ∫₀^Λ cos(zφ) (1 − e^{i(1−z)s}) / (z + 1)² dz`.
pub fn kernel_k3(phase: f64, lag: f64, cutoff: f64) -> Complex64 {
    k2_like(phase, lag, cutoff, p2)
}

/// The combined kernel `K1 − K2 ∓ 2K3` (upper sign const, lower sign lin).
pub fn kernel_k(model: CouplingModel, phase: f64, lag: f64, cutoff: f64) -> Complex64 {
    let base = kernel_k1(phase, lag, cutoff) - kernel_k2(phase, lag, cutoff);
    let k3 = kernel_k3(phase, lag, cutoff) * 2.0;
    match model {
        CouplingModel::ConstWQED => base - k3,
        CouplingModel::LinWQED => base + k3,
    }
}

/// Memory kernel `G(φ, s) = ∫₀^Λ cos(zφ) W(z) e^{i(1−z)s} dz = −i ∂K/∂s`.
pub fn memory_kernel(model: CouplingModel, phase: f64, lag: f64, cutoff: f64) -> Complex64 {
    let (ep, em) = (Complex64::cis(phase), Complex64::cis(-phase));
    let (a, b) = (phase - lag, -phase - lag);
    let inner = match model {
        CouplingModel::ConstWQED => em * p2(a, cutoff) + ep * p2(b, cutoff),
        CouplingModel::LinWQED => em * (p1(a, cutoff) - p2(a, cutoff)) + ep * (p1(b, cutoff) - p2(b, cutoff)),
    };
    Complex64::cis(2.0 * lag) * inner * 0.5
}

/// `(e^{iw} − 1)/w`, continuous through `w = 0`.
fn expm1_over(w: f64) -> Complex64 {
    let h = 0.5 * w;
    let sinc = if h.abs() < 1e-4 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    Complex64::new(0.0, 1.0) * Complex64::cis(h) * sinc
}

/// `K(φ, s)` by adaptive Gauss–Kronrod quadrature of the `z` integral.
///
/// The removable point `z = 1` is handled by writing
/// `(1 − e^{i(1−z)s})/(z − 1) = s (e^{iw} − 1)/w` with `w = (1 − z)s`.
pub fn oracle_kernel(model: CouplingModel, phase: f64, lag: f64, cutoff: f64) -> Result<Complex64> {
    let f = |z: f64| expm1_over((1.0 - z) * lag) * (lag * (z * phase).cos() * model.weight(z));
    let freq = phase + lag + 1.0;
    let panel = 4.0 * std::f64::consts::PI / freq;
    let near = quad::integrate_split(f, 0.0, 2.0f64.min(cutoff), panel.min(0.25), 1e-13)?;
    let far = if cutoff > 2.0 { quad::integrate_split(f, 2.0, cutoff, panel, 1e-11)? } else { Complex64::new(0.0, 0.0) };
    Ok(near + far)
}

/// `G(φ, s)` by quadrature, used to validate [`memory_kernel`].
pub fn oracle_memory_kernel(model: CouplingModel, phase: f64, lag: f64, cutoff: f64) -> Result<Complex64> {
    let f = |z: f64| Complex64::cis((1.0 - z) * lag) * ((z * phase).cos() * model.weight(z));
    let panel = 4.0 * std::f64::consts::PI / (phase + lag + 1.0);
    quad::integrate_split(f, 0.0, cutoff, panel, 1e-11)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MODELS: [CouplingModel; 2] = [CouplingModel::ConstWQED, CouplingModel::LinWQED];

    #[test]
    fn zero_lag_vanishes() {
        for m in MODELS {
            for phase in [0.0, 0.3, 2.0] {
                assert_eq!(kernel_k(m, phase, 0.0, 1e4).norm(), 0.0);
                assert_eq!(oracle_kernel(m, phase, 0.0, 1e4).unwrap().norm(), 0.0);
            }
            let tiny = kernel_k(m, 0.0, 1e-12, 1e4);
            assert!(tiny.re.is_finite() && tiny.im.is_finite());
            let o = oracle_kernel(m, 0.0, 1e-12, 1e4).unwrap();
            assert!((tiny - o).norm() < 1e-13);
        }
    }

    #[test]
    fn const_minus_lin_is_k3() {
        for &(p, s) in &[(0.0, 1.0), (0.3, 7.0), (5.0, 2.5)] {
            let d = kernel_k(CouplingModel::ConstWQED, p, s, 1e3) - kernel_k(CouplingModel::LinWQED, p, s, 1e3);
            assert!((d + kernel_k3(p, s, 1e3) * 4.0).norm() < 1e-13);
        }
    }

    #[test]
    fn pieces_match_quadrature() {
        let cutoff = 50.0;
        for &(p, s) in &[(0.0, 0.7), (1.0, 2.0), (0.1 * PI, 13.0), (4.0, 1.5)] {
            let g = |den: fn(f64) -> f64| {
                let f = move |z: f64| expm1_over((1.0 - z) * s) * (s * (z * p).cos() * 0.25 * (z - 1.0) / den(z));
                quad::integrate_split(f, 0.0, cutoff, 0.05, 1e-13).unwrap()
            };
            let q1 = g(|z| z - 1.0);
            let q2 = g(|z| z + 1.0);
            let q3 = g(|z| (z + 1.0) * (z + 1.0));
            assert!((kernel_k1(p, s, cutoff) - q1).norm() < 1e-11, "K1 at {p},{s}");
            assert!((kernel_k2(p, s, cutoff) - q2).norm() < 1e-11, "K2 at {p},{s}");
            assert!((kernel_k3(p, s, cutoff) - q3).norm() < 1e-11, "K3 at {p},{s}");
        }
    }

    #[test]
    fn negative_argument_branch() {
        // phase − lag = −1 exercises Csi at negative arguments
        for m in MODELS {
            let c = kernel_k(m, 1.0, 2.0, 100.0);
            let o = oracle_kernel(m, 1.0, 2.0, 100.0).unwrap();
            assert!((c - o).norm() < 1e-8);
        }
        let k1 = kernel_k1(1.0, 2.0, 100.0);
        let f = |z: f64| expm1_over((1.0 - z) * 2.0) * (2.0 * z.cos() * 0.25);
        let q: Complex64 = quad::integrate_split(f, 0.0, 100.0, 0.1, 1e-13).unwrap();
        assert!((k1 - q).norm() < 1e-8);
    }

    #[test]
    fn combined_matches_oracle_on_grid() {
        for m in MODELS {
            for &cutoff in &[1e2, 1e4] {
                for &p in &[0.0, 0.1 * PI, 1.0, 3.0 * PI] {
                    for &s in &[0.01, 0.5, p, 3.3, 20.0] {
                        let c = kernel_k(m, p, s, cutoff);
                        let o = oracle_kernel(m, p, s, cutoff).unwrap();
                        assert!((c - o).norm() < 1e-9, "{m:?} Λ={cutoff} φ={p} s={s}: {c} vs {o}");
                    }
                }
            }
        }
    }

    #[test]
    fn frozen_oracle_value() {
        let o = oracle_kernel(CouplingModel::ConstWQED, 0.1 * PI, 2.0, 1e3).unwrap();
        let frozen = Complex64::new(-3.116_857_293_354_429e-1, 9.850_703_270_351_965e-1);
        assert!((o - frozen).norm() < 1e-10);
        assert!((kernel_k(CouplingModel::ConstWQED, 0.1 * PI, 2.0, 1e3) - frozen).norm() < 1e-9);
    }

    #[test]
    fn memory_kernel_is_lag_derivative() {
        for m in MODELS {
            for &(p, s) in &[(0.0, 1.0), (0.3, 4.0), (2.0, 0.5), (1.0, 1.7)] {
                let g = memory_kernel(m, p, s, 1e3);
                let o = oracle_memory_kernel(m, p, s, 1e3).unwrap();
                assert!((g - o).norm() < 1e-9, "{m:?} {p} {s}: {g} vs {o}");
                let h = 1e-5;
                let fd = (kernel_k(m, p, s + h, 1e3) - kernel_k(m, p, s - h, 1e3)) / (2.0 * h);
                assert!((g - Complex64::new(0.0, -1.0) * fd).norm() < 1e-6 * g.norm().max(1.0));
            }
        }
    }
}
