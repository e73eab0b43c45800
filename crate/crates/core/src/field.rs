//! Space-time intensity `I(x, t)` of the field emitted by the array.
//!
//! Two pictures are supported. In the retardation-only picture each
//! coupling point radiates the delayed amplitude of its emitter along both
//! light-cone branches:
//!
//! ```text
//! I ∝ |Σ_{n,m} c_n(t − |x − x^n_m|) e^{iω0|x − x^n_m|} Θ(t − |x − x^n_m|)|²
//! ```
//!
//! For the const-coupling waveguide the field is a time convolution of the
//! amplitudes with
//!
//! ```text
//! S(r, s) = ∫₀^Λ cos(zr) e^{−i(z−1)s} / (1 + z) dz,   r = k0(x − x^n_m),  s = ω0(t − τ)
//! ```
//!
//! which reduces to `½ e^{2is} Σ_± e^{∓ir} ∫₁^{Λ+1} e^{iu(±r−s)}/u du`.
//! Maps are max-normalized.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geometry::CouplingLayout;
use crate::model::{CouplingModel, WaveguideSetup};
use crate::specfun::exp_over_u;
use crate::trajectory::{AmplitudeTrajectory, Framework};

/// Normalized intensity on a rectangular grid, stored row-major as
/// `values[it * nx + ix]`.
#[derive(Debug, Clone)]
pub struct FieldIntensityMap {
    /// Positions in units of `1/k0`.
    pub x_grid: Vec<f64>,
    /// Times in units of `1/ω0`.
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub framework: Framework,
    /// Coupling-point positions of the layout that produced the map.
    pub positions: Vec<Vec<f64>>,
    /// Spacing `d` used to express `x` as `x/d` on output.
    pub spacing: f64,
    pub state_label: String,
}

impl FieldIntensityMap {
    pub fn nx(&self) -> usize {
        self.x_grid.len()
    }

    pub fn nt(&self) -> usize {
        self.t_grid.len()
    }

    pub fn get(&self, it: usize, ix: usize) -> f64 {
        self.values[it * self.nx() + ix]
    }

    pub fn row(&self, it: usize) -> &[f64] {
        &self.values[it * self.nx()..(it + 1) * self.nx()]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales so the maximum is 1; an all-zero map is left unchanged.
    pub fn normalize(&mut self) {
        let m = self.max_value();
        if m > 0.0 {
            for v in &mut self.values {
                *v /= m;
            }
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.state_label = label.into();
        self
    }

    /// Long-form CSV `x_over_d, t_omega0, intensity`.
    pub fn write_csv<W: Write>(&self, mut w: W, omega0: f64) -> io::Result<()> {
        writeln!(w, "x_over_d,t_omega0,intensity")?;
        for (it, t) in self.t_grid.iter().enumerate() {
            for (ix, x) in self.x_grid.iter().enumerate() {
                writeln!(w, "{:.8e},{:.8e},{:.12e}", x / self.spacing, t * omega0, self.get(it, ix))?;
            }
        }
        Ok(())
    }

    /// Gnuplot `matrix nonuniform` layout: the first row is `nx` followed by
    /// the `x/d` values, every further row is `t ω0` followed by the
    /// intensities at that time.
    pub fn write_matrix<W: Write>(&self, mut w: W, omega0: f64) -> io::Result<()> {
        write!(w, "{}", self.nx())?;
        for x in &self.x_grid {
            write!(w, " {:.8e}", x / self.spacing)?;
        }
        writeln!(w)?;
        for (it, t) in self.t_grid.iter().enumerate() {
            write!(w, "{:.8e}", t * omega0)?;
            for v in self.row(it) {
                write!(w, " {v:.12e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `points_per_d` points per spacing `d`, covering the array plus `margin`
/// spacings on each side.
pub fn default_x_grid(layout: &CouplingLayout, points_per_d: usize, margin: f64) -> Vec<f64> {
    let d = layout.min_spacing();
    let (lo, hi) = layout.extent();
    let (a, b) = (lo - margin * d, hi + margin * d);
    let h = d / points_per_d.max(1) as f64;
    let n = ((b - a) / h + 1e-9).floor() as usize;
    (0..=n).map(|i| a + i as f64 * h).collect()
}

/// Every `stride`-th time of the trajectory grid.
pub fn default_t_grid(trajectory: &AmplitudeTrajectory, stride: usize) -> Vec<f64> {
    (0..trajectory.len()).step_by(stride.max(1)).map(|j| trajectory.time(j)).collect()
}

fn check_grids(trajectory: &AmplitudeTrajectory, layout: &CouplingLayout, x_grid: &[f64], t_grid: &[f64]) -> Result<()> {
    if trajectory.n_atoms() != layout.n_atoms() {
        return Err(Error::Config(format!("trajectory has {} atoms, layout has {}", trajectory.n_atoms(), layout.n_atoms())));
    }
    if x_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::Config("field map needs non-empty x and t grids".into()));
    }
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_max > trajectory.t_end() * (1.0 + 1e-12) + 1e-12 || t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Config(format!(
            "t grid reaches {t_max} but the trajectory covers only [0, {}]",
            trajectory.t_end()
        )));
    }
    Ok(())
}

fn assemble(
    values: Vec<f64>,
    trajectory: &AmplitudeTrajectory,
    layout: &CouplingLayout,
    x_grid: &[f64],
    t_grid: &[f64],
) -> FieldIntensityMap {
    let mut map = FieldIntensityMap {
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
        framework: trajectory.framework,
        positions: layout.positions().to_vec(),
        spacing: layout.min_spacing(),
        state_label: String::new(),
    };
    map.normalize();
    map
}

/// Four-point cubic interpolation of amplitude `n` at time `t`.
fn interpolate(trajectory: &AmplitudeTrajectory, n: usize, t: f64) -> Complex64 {
    let len = trajectory.len();
    let c = &trajectory.amplitudes;
    if len < 4 {
        let x = (t / trajectory.dt).clamp(0.0, (len - 1) as f64);
        let i = (x.floor() as usize).min(len.saturating_sub(2));
        let s = x - i as f64;
        return if len == 1 { c[0][n] } else { c[i][n] * (1.0 - s) + c[i + 1][n] * s };
    }
    let x = (t / trajectory.dt).clamp(0.0, (len - 1) as f64);
    let i = x.floor() as usize;
    let base = i.saturating_sub(1).min(len - 4);
    let s = x - base as f64;
    let mut out = Complex64::new(0.0, 0.0);
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (s - b as f64) / (a as f64 - b as f64);
            }
        }
        out += c[base + a][n] * w;
    }
    out
}

/// Retardation-only intensity map.
pub fn intensity_retard(
    trajectory: &AmplitudeTrajectory,
    layout: &CouplingLayout,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<FieldIntensityMap> {
    if trajectory.framework != Framework::Retard {
        return Err(Error::Config(format!("retard field map needs a retard trajectory, got {}", trajectory.framework.as_str())));
    }
    check_grids(trajectory, layout, x_grid, t_grid)?;
    let w0 = trajectory.omega0;
    // fronts landing on a grid point are treated as not yet arrived
    let front = 1e-9 * trajectory.dt;
    let nx = x_grid.len();
    let mut values = vec![0.0; nx * t_grid.len()];
    values.par_chunks_mut(nx).zip(t_grid.par_iter()).for_each(|(row, &t)| {
        for (out, &x) in row.iter_mut().zip(x_grid) {
            let mut amp = Complex64::new(0.0, 0.0);
            for (n, legs) in layout.positions().iter().enumerate() {
                for &xm in legs {
                    let u = (x - xm).abs();
                    if u < t - front {
                        amp += interpolate(trajectory, n, t - u) * Complex64::cis(w0 * u);
                    }
                }
            }
            *out = amp.norm_sqr();
        }
    });
    Ok(assemble(values, trajectory, layout, x_grid, t_grid))
}

/// `S(r, s)` of the const-coupling field kernel.
pub fn field_kernel(r: f64, s: f64, cutoff: f64) -> Complex64 {
    let u2 = cutoff + 1.0;
    let plus = Complex64::cis(-r) * exp_over_u(r - s, 1.0, u2);
    let minus = Complex64::cis(r) * exp_over_u(-r - s, 1.0, u2);
    Complex64::cis(2.0 * s) * (plus + minus) * 0.5
}

/// Const-coupling intensity map. Every time in `t_grid` must lie on the
/// trajectory grid; the memory integral is trapezoidal on that grid.
pub fn intensity_const(
    trajectory: &AmplitudeTrajectory,
    layout: &CouplingLayout,
    setup: &WaveguideSetup,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<FieldIntensityMap> {
    if trajectory.framework != Framework::Const || setup.coupling_model != CouplingModel::ConstWQED {
        return Err(Error::Config("const field map needs a const trajectory and a const setup".into()));
    }
    check_grids(trajectory, layout, x_grid, t_grid)?;
    let dt = trajectory.dt;
    let mut idx = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let x = t / dt;
        let k = x.round();
        if (x - k).abs() > 1e-9 * x.max(1.0) {
            return Err(Error::Config(format!("t = {t} is not on the trajectory grid (dt = {dt})")));
        }
        idx.push(k as usize);
    }
    let max_lag = idx.iter().copied().max().unwrap_or(0);
    let (k0, w0, cutoff) = (setup.k0(), setup.omega0, setup.cutoff_ratio);
    let n_atoms = layout.n_atoms();
    let c = &trajectory.amplitudes;

    // one column per x: kernel samples per (atom, leg, lag), then the convolutions
    let columns: Vec<Vec<f64>> = x_grid
        .par_iter()
        .map(|&x| {
            let kernels: Vec<Vec<Complex64>> = (0..n_atoms)
                .map(|n| {
                    let mut sum = vec![Complex64::new(0.0, 0.0); max_lag + 1];
                    for &xm in &layout.positions()[n] {
                        let r = k0 * (x - xm);
                        for (k, v) in sum.iter_mut().enumerate() {
                            *v += field_kernel(r, w0 * k as f64 * dt, cutoff);
                        }
                    }
                    sum
                })
                .collect();
            idx.iter()
                .map(|&i| {
                    if i == 0 {
                        return 0.0;
                    }
                    let mut amp = Complex64::new(0.0, 0.0);
                    for (n, ker) in kernels.iter().enumerate() {
                        let mut s = (c[0][n] * ker[i] + c[i][n] * ker[0]) * 0.5;
                        for j in 1..i {
                            s += c[j][n] * ker[i - j];
                        }
                        amp += s;
                    }
                    (amp * dt).norm_sqr()
                })
                .collect()
        })
        .collect();
    let nx = x_grid.len();
    let mut values = vec![0.0; nx * t_grid.len()];
    for (ix, col) in columns.iter().enumerate() {
        for (it, v) in col.iter().enumerate() {
            values[it * nx + ix] = *v;
        }
    }
    Ok(assemble(values, trajectory, layout, x_grid, t_grid))
}

/// Fraction of the last-row intensity found right of the rightmost coupling
/// point, relative to everything outside the array.
pub fn chirality(map: &FieldIntensityMap) -> Result<f64> {
    let lo = map.positions.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = map.positions.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = map.row(map.nt() - 1);
    let (mut right, mut outside) = (0.0, 0.0);
    for (&x, &v) in map.x_grid.iter().zip(last) {
        if x > hi {
            right += v;
            outside += v;
        } else if x < lo {
            outside += v;
        }
    }
    if outside <= 0.0 {
        return domain("no intensity outside the array on the last time slice");
    }
    Ok(right / outside)
}

/// `Σ_x I(x, t)` over `x_lo <= x <= x_hi`, per time row.
pub fn integrated_intensity(map: &FieldIntensityMap, x_lo: f64, x_hi: f64) -> Vec<f64> {
    (0..map.nt())
        .map(|it| map.x_grid.iter().zip(map.row(it)).filter(|(x, _)| **x >= x_lo && **x <= x_hi).map(|(_, v)| v).sum())
        .collect()
}
