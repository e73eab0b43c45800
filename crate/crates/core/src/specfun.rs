//! Sine and cosine integrals and the combined function `Csi = Ci + i Si`.
//!
//! Two regimes are used. For `|x| <= 4` the Maclaurin series of `Si` and of
//! the entire function `Cin(x) = ∫₀ˣ (1 − cos t)/t dt` converge without
//! significant cancellation. Above that, the auxiliary functions are obtained
//! from the continued fraction of `E₁(ix)` (modified Lentz iteration), which
//! converges to machine precision in a handful of iterations for large `x`.
//!
//! # Negative arguments
//!
//! `Si` continues as an odd function. The cosine integral continues as the
//! even function `Ci(|x|)`, i.e. the branch offset [`CI_NEGATIVE_BRANCH_OFFSET`]
//! is zero. This is the antiderivative of `cos x / x` on `x < 0` obtained by
//! taking the principal value through the origin, and it is the branch for
//! which boundary evaluations of the closed-form memory kernels reproduce the
//! direct `z`-quadrature (see the kernel tests in `volterra`).

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Constant added to `Ci(|x|)` when `csi` is evaluated at `x < 0`.
pub const CI_NEGATIVE_BRANCH_OFFSET: f64 = 0.0;

const SERIES_LIMIT: f64 = 4.0;
const CF_MAX_ITER: usize = 500;

/// `Ci(x) + i Si(x)`, split into its real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiValue {
    /// Cosine-integral part.
    pub re: f64,
    /// Sine-integral part.
    pub im: f64,
}

impl CsiValue {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<CsiValue> for Complex64 {
    fn from(v: CsiValue) -> Self {
        v.to_complex()
    }
}

/// `Si(x) = ∫₀ˣ sin z / z dz`.
pub fn sine_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("sine_integral: non-finite argument {x}"));
    }
    Ok(si_unchecked(x))
}

/// `Ci(x) = −∫ₓ^∞ cos z / z dz`, defined for `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("cosine_integral: argument must be positive and finite, got {x}"));
    }
    Ok(ci_positive(x))
}

/// `Csi(x) = Ci(x) + i Si(x)` for any finite non-zero `x`.
pub fn csi(x: f64) -> Result<CsiValue> {
    if !x.is_finite() || x == 0.0 {
        return domain(format!("csi: argument must be finite and non-zero, got {x}"));
    }
    let re = if x > 0.0 {
        ci_positive(x)
    } else {
        ci_positive(-x) + CI_NEGATIVE_BRANCH_OFFSET
    };
    Ok(CsiValue { re, im: si_unchecked(x) })
}

/// The tail integral `∫ₓ^∞ e^{iz}/z dz = −Ci(x) + i(π/2 − Si(x))` for `x > 0`.
///
/// Unlike `csi` this decays like `1/x`.
pub fn csi_tail(x: f64) -> Result<Complex64> {
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("csi_tail: argument must be positive and finite, got {x}"));
    }
    let (ci, si) = ci_si_positive(x);
    Ok(Complex64::new(-ci, std::f64::consts::FRAC_PI_2 - si))
}

/// The entire function `Cin(x) = ∫₀ˣ (1 − cos t)/t dt = γ + ln|x| − Ci(|x|)`.
pub fn cin(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax).1
    } else {
        EULER_GAMMA + ax.ln() - ci_positive(ax)
    }
}

/// `E(x) = ∫₀ˣ (e^{it} − 1)/t dt = −Cin(x) + i Si(x)`.
///
/// This is `csi(x) − γ − ln|x|` with the logarithmic singularity removed, so
/// it is finite and smooth on the whole real line (`E(0) = 0`). Differences
/// of `csi` whose logarithms cancel are evaluated through it.
pub fn regularized_csi(x: f64) -> Complex64 {
    let ax = x.abs();
    let (si, cin) = if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        let (ci, si) = ci_si_positive(ax);
        (si, EULER_GAMMA + ax.ln() - ci)
    };
    Complex64::new(-cin, si.copysign(x))
}

/// `∫_{u1}^{u2} (e^{iau} − 1)/u du` for any real bounds (may straddle zero).
pub fn exp_minus_one_over_u(a: f64, u1: f64, u2: f64) -> Complex64 {
    regularized_csi(a * u2) - regularized_csi(a * u1)
}

/// `∫_{u1}^{u2} e^{iau}/u du` for `0 < u1, u2`.
pub fn exp_over_u(a: f64, u1: f64, u2: f64) -> Complex64 {
    exp_minus_one_over_u(a, u1, u2) + (u2 / u1).ln()
}

/// `∫_{u1}^{u2} e^{iau}/u² du` for `0 < u1, u2`, by parts.
pub fn exp_over_u2(a: f64, u1: f64, u2: f64) -> Complex64 {
    let boundary = Complex64::cis(a * u1) / u1 - Complex64::cis(a * u2) / u2;
    boundary + Complex64::new(0.0, a) * exp_over_u(a, u1, u2)
}

fn si_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    let si = if ax <= SERIES_LIMIT { series(ax).0 } else { ci_si_positive(ax).1 };
    if x < 0.0 {
        -si
    } else {
        si
    }
}

fn ci_positive(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        EULER_GAMMA + x.ln() - series(x).1
    } else {
        ci_si_positive(x).0
    }
}

/// `(Ci(x), Si(x))` for `x > 0`.
fn ci_si_positive(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (si, cin) = series(x);
        (EULER_GAMMA + x.ln() - cin, si)
    } else {
        let e1 = e1_imaginary(x);
        (-e1.re, std::f64::consts::FRAC_PI_2 + e1.im)
    }
}

/// Maclaurin series `(Si(x), Cin(x))` for `0 <= x <= 4`.
fn series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    // term_k = (−1)^k x^k / k!, accumulated two orders at a time
    let mut si = 0.0;
    let mut cin = 0.0;
    let mut odd = x; // (−1)^j x^{2j+1}/(2j+1)!
    let mut even = -x2 / 2.0; // (−1)^j x^{2j}/(2j)!, j = 1
    let mut j = 0usize;
    loop {
        let k_odd = (2 * j + 1) as f64;
        let k_even = (2 * j + 2) as f64;
        let ds = odd / k_odd;
        let dc = -even / k_even;
        si += ds;
        cin += dc;
        if ds.abs() <= 1e-17 * si.abs() && dc.abs() <= 1e-17 * cin.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        odd *= -x2 / ((k_odd + 1.0) * (k_odd + 2.0));
        even *= -x2 / ((k_even + 1.0) * (k_even + 2.0));
        j += 1;
        if j > 60 {
            break;
        }
    }
    (si, cin)
}

/// `E₁(ix)` for `x > 4` from its continued fraction.
fn e1_imaginary(x: f64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..CF_MAX_ITER {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h * Complex64::new(x.cos(), -x.sin())
}
