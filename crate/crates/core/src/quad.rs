//! Adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! Used by the independent oracles that validate the closed-form kernels and
//! Zeno times; the production paths never go through here.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod panel: `(value, error estimate)`.
pub fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk21_with_floor(f, a, b);
    (v, e)
}

/// Kronrod panel also returning the round-off floor `50 ε ∫|f|`.
fn gk21_with_floor<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut samples = [T::zero(); 21];
    samples[20] = f(center);
    let mut kronrod = samples[20] * WGK[10];
    let mut gauss = T::zero();
    let mut abs_sum = samples[20].magnitude() * WGK[10];
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * i] = f1;
        samples[2 * i + 1] = f2;
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[i];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = (samples[20] - mean).magnitude() * WGK[10];
    for i in 0..10 {
        asc += ((samples[2 * i] - mean).magnitude() + (samples[2 * i + 1] - mean).magnitude()) * WGK[i];
    }
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    (kronrod * half, err.max(floor), floor)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    floor: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-12, max_segments: 2000 }
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// Returns the value and the final error estimate. Fails if the tolerance is
/// not reached within `max_segments` bisections, unless every remaining
/// segment is already limited by round-off.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64, tol: Tolerance) -> Result<(T, f64)> {
    if a == b {
        return Ok((T::zero(), 0.0));
    }
    let (v, e, fl) = gk21_with_floor(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e, floor: fl });
    let mut total = v;
    let mut total_err = e;
    let mut total_floor = fl;
    let mut segments = 1;
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target || total_err <= 2.0 * total_floor {
            return Ok((total, total_err));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if segments >= tol.max_segments || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            // accept if what is left is round-off dominated
            if total_err <= 10.0 * target {
                return Ok((total, total_err));
            }
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge: error {total_err:e} after {segments} segments"
            )));
        }
        let (v1, e1, f1) = gk21_with_floor(f, worst.a, mid);
        let (v2, e2, f2) = gk21_with_floor(f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.err + e1 + e2;
        total_floor = total_floor - worst.floor + f1 + f2;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1, floor: f1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2, floor: f2 });
        segments += 1;
        if segments % 64 == 0 {
            // refresh running sums
            total = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.err).sum();
            total_floor = heap.iter().map(|s| s.floor).sum();
        }
    }
}

/// Integrate over `[a, b]` split into consecutive panels of length at most
/// `panel`, each handled adaptively. Suited to oscillatory integrands where
/// `panel` is a fraction of the shortest period.
///
/// `tol` is an absolute tolerance on the total, shared out by panel length,
/// with the same value as a relative floor per panel.
pub fn integrate_split<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, panel: f64, tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let n = ((hi - lo) / panel).ceil().max(1.0) as usize;
    let width = (hi - lo) / n as f64;
    let per_panel = Tolerance { abs: tol / n as f64, rel: tol, max_segments: 200 };
    let mut total = T::zero();
    let mut chunk = T::zero();
    for i in 0..n {
        let p0 = lo + i as f64 * width;
        let p1 = if i + 1 == n { hi } else { lo + (i + 1) as f64 * width };
        let (v, _) = integrate(&f, p0, p1, per_panel)?;
        chunk = chunk + v;
        if i % 256 == 255 {
            total = total + chunk;
            chunk = T::zero();
        }
    }
    total = total + chunk;
    Ok(total * sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(&|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let (v, _) = integrate(&|x: f64| x.sqrt().recip(), 0.0, 1.0, Tolerance { abs: 1e-10, rel: 1e-10, max_segments: 5000 }).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_complex() {
        let f = |x: f64| Complex64::new(0.0, 40.0 * x).exp();
        let v: Complex64 = integrate_split(f, 0.0, 10.0, 0.05, 1e-13).unwrap();
        let exact = (Complex64::new(0.0, 400.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn reversed_bounds() {
        let v: f64 = integrate_split(|x: f64| x, 1.0, 0.0, 0.3, 1e-14).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }
}
