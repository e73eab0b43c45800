//! Exact non-Markovian dynamics from the Volterra integral equation
//!
//! ```text
//! c_n(t) = c_n(0) + (2Γ0 i/π) Σ_{n'mm'} ∫₀ᵗ dτ c_{n'}(τ) K(φ^{nn'}_{mm'}, ω0(t − τ))
//! ```
//!
//! solved by product-trapezoidal stepping on a uniform grid, together with
//! the waveguide excitation number `N_B(t)`.

mod kernel;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CouplingLayout, PhaseMatrix};
use crate::model::{CouplingModel, WaveguideSetup};
use crate::states::AmplitudeVector;
use crate::trajectory::{AmplitudeTrajectory, Framework};

pub use kernel::{kernel_k, kernel_k1, kernel_k2, kernel_k3, memory_kernel, oracle_kernel, oracle_memory_kernel};

/// Combined kernel samples `K(φ_p, ω0 k dt)` for every distinct phase `φ_p`
/// and lag index `k`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub model: CouplingModel,
    pub cutoff: f64,
    /// Lag step in units of `1/ω0`.
    pub lag_step: f64,
    phases: Vec<f64>,
    n_lags: usize,
    values: Vec<Complex64>,
}

impl KernelTable {
    pub fn build(model: CouplingModel, phases: &[f64], lag_step: f64, n_lags: usize, cutoff: f64) -> Self {
        let values: Vec<Complex64> = (0..phases.len() * n_lags)
            .into_par_iter()
            .map(|idx| {
                let (p, k) = (idx / n_lags, idx % n_lags);
                kernel_k(model, phases[p], k as f64 * lag_step, cutoff)
            })
            .collect();
        Self { model, cutoff, lag_step, phases: phases.to_vec(), n_lags, values }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn n_lags(&self) -> usize {
        self.n_lags
    }

    pub fn get(&self, phase_index: usize, lag: usize) -> Complex64 {
        self.values[phase_index * self.n_lags + lag]
    }

    /// `A_k[n][n'] = Σ_{mm'} K(φ^{nn'}_{mm'}, s_k)`, flattened as `[k][n][n']`.
    fn pair_sums(&self, phases: &PhaseMatrix) -> Vec<Complex64> {
        let n = phases.n_atoms();
        let counts: Vec<Vec<(usize, usize)>> =
            (0..n * n).map(|idx| phases.pair_class_counts(idx / n, idx % n)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_lags * n * n];
        for k in 0..self.n_lags {
            for (idx, cls) in counts.iter().enumerate() {
                out[k * n * n + idx] = cls.iter().map(|&(c, m)| self.get(c, k) * m as f64).sum();
            }
        }
        out
    }
}

fn validate(setup: &WaveguideSetup, layout: &CouplingLayout, c0: &AmplitudeVector, t_end: f64, dt: f64) -> Result<usize> {
    let w = setup.omega0;
    if !(dt.is_finite() && dt > 0.0) || dt * w > 0.02 * (1.0 + 1e-12) {
        return Err(Error::Config(format!("time step must satisfy 0 < dt <= 0.02/omega0, got dt*omega0 = {}", dt * w)));
    }
    if !(t_end.is_finite() && t_end > 0.0) || t_end * w > 1e3 * (1.0 + 1e-12) {
        return Err(Error::Config(format!("end time must satisfy 0 < t_end <= 1000/omega0, got {}", t_end * w)));
    }
    if c0.len() != layout.n_atoms() {
        return Err(Error::Config(format!("initial state has {} amplitudes for {} atoms", c0.len(), layout.n_atoms())));
    }
    Ok((t_end / dt - 1e-9).ceil() as usize)
}

fn framework_of(model: CouplingModel) -> Framework {
    match model {
        CouplingModel::ConstWQED => Framework::Const,
        CouplingModel::LinWQED => Framework::Lin,
    }
}

/// Accumulates `acc += w · A c` for one `N × N` block.
#[inline]
fn mat_vec_acc(acc: &mut [Complex64], a: &[Complex64], c: &[Complex64], w: f64) {
    let n = c.len();
    for (row, out) in acc.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (col, cv) in c.iter().enumerate() {
            s += a[row * n + col] * cv;
        }
        *out += s * w;
    }
}

/// Integrates the Volterra equation from `c0` to `t_end` with step `dt`.
///
/// The kernel vanishes at zero lag, so the trapezoidal end-point term drops
/// out and every step is explicit. The returned trajectory carries `N_B(t)`
/// computed from the same kernel table (see [`waveguide_excitation`]).
pub fn solve(
    setup: &WaveguideSetup,
    layout: &CouplingLayout,
    c0: &AmplitudeVector,
    t_end: f64,
    dt: f64,
) -> Result<AmplitudeTrajectory> {
    let steps = validate(setup, layout, c0, t_end, dt)?;
    let n = layout.n_atoms();
    let nn = n * n;
    let phases = PhaseMatrix::new(layout, setup.k0())?;
    let table = KernelTable::build(setup.coupling_model, phases.distinct_values(), setup.omega0 * dt, steps + 2, setup.cutoff_ratio);
    let a = table.pair_sums(&phases);
    let lambda = Complex64::new(0.0, 2.0 * setup.gamma0 / std::f64::consts::PI);
    let init: Vec<Complex64> = c0.amplitudes().to_vec();

    let mut c = Vec::with_capacity((steps + 1) * n);
    c.extend_from_slice(&init);
    // history sums V_i = Σ_{j=1}^{i-1} A_{i-j} c_j
    let mut hist = vec![Complex64::new(0.0, 0.0); (steps + 2) * n];
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..=steps + 1 {
        acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for j in 1..i {
            let k = i - j;
            mat_vec_acc(&mut acc, &a[k * nn..(k + 1) * nn], &c[j * n..(j + 1) * n], 1.0);
        }
        hist[i * n..(i + 1) * n].copy_from_slice(&acc);
        if i > steps {
            break;
        }
        mat_vec_acc(&mut acc, &a[i * nn..(i + 1) * nn], &init, 0.5);
        for row in 0..n {
            let v = init[row] + lambda * dt * acc[row];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numerical(format!("non-finite amplitude at step {i} (t = {})", i as f64 * dt)));
            }
            c.push(v);
        }
    }

    // h_i = (2Γ0/π)(−i) ½[(A_i − A_{i−1}) c_0 + V_{i+1} − V_{i−1}]
    let pref = Complex64::new(0.0, -setup.gamma0 / std::f64::consts::PI);
    let mut n_b = vec![0.0; steps + 1];
    let mut f_prev = 0.0;
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    let mut diff = vec![Complex64::new(0.0, 0.0); nn];
    for i in 1..=steps {
        for (d, (x, y)) in diff.iter_mut().zip(a[i * nn..(i + 1) * nn].iter().zip(&a[(i - 1) * nn..i * nn])) {
            *d = x - y;
        }
        h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        mat_vec_acc(&mut h, &diff, &init, 1.0);
        let f: f64 = (0..n)
            .map(|row| {
                let hv = (h[row] + hist[(i + 1) * n + row] - hist[(i - 1) * n + row]) * pref;
                2.0 * (c[i * n + row].conj() * hv).re
            })
            .sum();
        n_b[i] = n_b[i - 1] + 0.5 * dt * (f_prev + f);
        f_prev = f;
    }

    let amplitudes = c.chunks(n).map(<[Complex64]>::to_vec).collect();
    let mut traj = AmplitudeTrajectory::new(dt, setup.omega0, setup.gamma0, amplitudes, framework_of(setup.coupling_model));
    traj.n_b = n_b;
    Ok(traj)
}

/// `N_B(t_j)` of a trajectory, by direct evaluation of the double time integral.
///
/// `dN_B/dt = 2 Re Σ_n c_n*(t) h_n(t)` with
/// `h_n(t) = (2Γ0ω0/π) Σ_{n'} ∫₀ᵗ G_{nn'}(ω0(t − τ)) c_{n'}(τ) dτ`,
/// where `G = −i ∂K/∂s` is the memory kernel. Over each grid cell the
/// amplitude is replaced by its mean and the kernel is integrated exactly
/// as a difference of `K`; the outer integral is trapezoidal.
pub fn waveguide_excitation(setup: &WaveguideSetup, layout: &CouplingLayout, trajectory: &AmplitudeTrajectory) -> Result<Vec<f64>> {
    let n = layout.n_atoms();
    if trajectory.n_atoms() != n {
        return Err(Error::Config(format!("trajectory has {} atoms, layout has {n}", trajectory.n_atoms())));
    }
    let steps = trajectory.len().saturating_sub(1);
    let dt = trajectory.dt;
    let nn = n * n;
    let phases = PhaseMatrix::new(layout, setup.k0())?;
    let table = KernelTable::build(setup.coupling_model, phases.distinct_values(), setup.omega0 * dt, steps + 1, setup.cutoff_ratio);
    let a = table.pair_sums(&phases);
    let mut d = vec![Complex64::new(0.0, 0.0); a.len()];
    for k in 1..=steps {
        for idx in 0..nn {
            d[k * nn + idx] = a[k * nn + idx] - a[(k - 1) * nn + idx];
        }
    }
    let pref = Complex64::new(0.0, -2.0 * setup.gamma0 / std::f64::consts::PI);
    let c = &trajectory.amplitudes;
    let mut n_b = vec![0.0; steps + 1];
    let mut f_prev = 0.0;
    let mut mid = vec![Complex64::new(0.0, 0.0); n];
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..=steps {
        h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for j in 0..i {
            for row in 0..n {
                mid[row] = (c[j][row] + c[j + 1][row]) * 0.5;
            }
            let k = i - j;
            mat_vec_acc(&mut h, &d[k * nn..(k + 1) * nn], &mid, 1.0);
        }
        let f: f64 = (0..n).map(|row| 2.0 * (c[i][row].conj() * h[row] * pref).re).sum();
        n_b[i] = n_b[i - 1] + 0.5 * dt * (f_prev + f);
        f_prev = f;
    }
    Ok(n_b)
}

/// Rescales amplitudes and `N_B` by `1/√(Σ_n|c_n|² + N_B)` at every time.
pub fn normalize(trajectory: &AmplitudeTrajectory) -> Result<AmplitudeTrajectory> {
    let mut out = trajectory.clone();
    for (j, (amps, nb)) in out.amplitudes.iter_mut().zip(out.n_b.iter_mut()).enumerate() {
        let total: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>() + *nb;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!("non-positive total norm {total} at step {j}")));
        }
        let s = total.sqrt();
        for c in amps.iter_mut() {
            *c /= s;
        }
        *nb /= total;
    }
    out.normalized = true;
    Ok(out)
}

/// One closed-form versus quadrature comparison.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    pub model: CouplingModel,
    pub phase: f64,
    pub lag: f64,
    pub cutoff: f64,
    pub closed: Complex64,
    pub oracle: Complex64,
}

impl KernelSample {
    pub fn error(&self) -> f64 {
        (self.closed - self.oracle).norm()
    }
}

#[derive(Debug, Clone)]
pub struct KernelValidation {
    pub seed: u64,
    pub samples: Vec<KernelSample>,
}

impl KernelValidation {
    pub fn worst(&self) -> &KernelSample {
        self.samples.iter().max_by(|a, b| a.error().total_cmp(&b.error())).expect("validation has samples")
    }

    pub fn max_error(&self) -> f64 {
        self.worst().error()
    }

    pub fn write_report<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# seed = {}, comparisons = {}", self.seed, self.samples.len())?;
        writeln!(w, "model,phase,lag,cutoff,re_closed,im_closed,re_oracle,im_oracle,abs_error")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{:.17e},{:.17e},{:e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6e}",
                s.model.as_str(),
                s.phase,
                s.lag,
                s.cutoff,
                s.closed.re,
                s.closed.im,
                s.oracle.re,
                s.oracle.im,
                s.error()
            )?;
        }
        let worst = self.worst();
        writeln!(
            w,
            "# max_error = {:.6e} at model = {}, phase = {:.17e}, lag = {:.17e}, cutoff = {:e}",
            worst.error(),
            worst.model.as_str(),
            worst.phase,
            worst.lag,
            worst.cutoff
        )
    }
}

/// Compares [`kernel_k`] with [`oracle_kernel`] on `samples` seeded random
/// tuples (phase in `[0, 3π]`, lag in `[0, 50]`, cutoff in `{1e2, 1e4}`),
/// each evaluated for both coupling models.
pub fn validate_kernels(samples: usize, seed: u64) -> Result<KernelValidation> {
    use rand::{Rng, SeedableRng};
    if samples == 0 {
        return Err(Error::Config("kernel validation needs at least one sample".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<(f64, f64, f64)> = (0..samples)
        .map(|_| {
            let phase = rng.random_range(0.0..=3.0 * std::f64::consts::PI);
            let lag = rng.random_range(0.0..=50.0);
            let cutoff = if rng.random_bool(0.5) { 1e2 } else { 1e4 };
            (phase, lag, cutoff)
        })
        .collect();
    let jobs: Vec<(CouplingModel, f64, f64, f64)> = tuples
        .iter()
        .flat_map(|&(p, s, c)| [CouplingModel::ConstWQED, CouplingModel::LinWQED].map(|m| (m, p, s, c)))
        .collect();
    let samples = jobs
        .into_par_iter()
        .map(|(model, phase, lag, cutoff)| {
            let oracle = oracle_kernel(model, phase, lag, cutoff)?;
            Ok(KernelSample { model, phase, lag, cutoff, closed: kernel_k(model, phase, lag, cutoff), oracle })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelValidation { seed, samples })
}
