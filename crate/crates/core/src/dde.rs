//! Retardation-only dynamics: the multi-delay differential equation
//!
//! ```text
//! ċ_n = −(M/2)Γ0 c_n − (Γ0/2) Σ_{(n',m,m') ≠ self} c_{n'}(t − τ) e^{iω0τ} Θ(t − τ)
//! ```
//!
//! with `τ = |x^n_m − x^{n'}_{m'}|/v_g`, integrated by classical RK4 with a
//! cubic Hermite interpolant of the stored history.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::CouplingLayout;
use crate::states::AmplitudeVector;
use crate::trajectory::{AmplitudeTrajectory, Framework};

const DELAY_MERGE_TOL: f64 = 1e-12;

/// One delayed feedback channel into a target atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayTerm {
    pub source: usize,
    pub delay: f64,
    /// `Σ e^{iω0τ}` over the leg pairs sharing this source and delay.
    pub weight: Complex64,
    /// Number of leg pairs merged into this term.
    pub multiplicity: usize,
}

/// Delays `τ^{nn'}_{mm'}` grouped by target atom. Self pairs `n = n', m = m'`
/// are excluded.
#[derive(Debug, Clone)]
pub struct DelaySet {
    pub omega0: f64,
    terms: Vec<Vec<DelayTerm>>,
}

impl DelaySet {
    pub fn new(layout: &CouplingLayout, omega0: f64) -> Self {
        let (n_atoms, n_legs) = (layout.n_atoms(), layout.n_legs());
        let mut terms = vec![Vec::new(); n_atoms];
        for (n, target) in terms.iter_mut().enumerate() {
            for n2 in 0..n_atoms {
                for m in 0..n_legs {
                    for m2 in 0..n_legs {
                        if n == n2 && m == m2 {
                            continue;
                        }
                        let delay = (layout.position(n, m) - layout.position(n2, m2)).abs();
                        let w = Complex64::cis(omega0 * delay);
                        let tol = DELAY_MERGE_TOL * delay.max(1.0);
                        match target.iter_mut().find(|t: &&mut DelayTerm| t.source == n2 && (t.delay - delay).abs() <= tol) {
                            Some(t) => {
                                t.weight += w;
                                t.multiplicity += 1;
                            }
                            None => target.push(DelayTerm { source: n2, delay, weight: w, multiplicity: 1 }),
                        }
                    }
                }
            }
            target.sort_by(|a, b| a.delay.total_cmp(&b.delay).then(a.source.cmp(&b.source)));
        }
        Self { omega0, terms }
    }

    pub fn n_atoms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self, n: usize) -> &[DelayTerm] {
        &self.terms[n]
    }

    /// Sorted distinct delays across all targets.
    pub fn distinct_delays(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.terms.iter().flatten().map(|t| t.delay).collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() <= DELAY_MERGE_TOL * b.max(1.0));
        all
    }

    pub fn min_nonzero_delay(&self) -> Option<f64> {
        self.distinct_delays().into_iter().find(|&d| d > DELAY_MERGE_TOL)
    }
}

/// Checks that `dt` divides the shortest nonzero delay to `1e−9` relative.
pub fn check_alignment(set: &DelaySet, dt: f64) -> Result<()> {
    if let Some(tau) = set.min_nonzero_delay() {
        let ratio = tau / dt;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(Error::Config(format!(
                "time step dt = {dt} does not divide the delay tau = {tau} (tau/dt = {ratio})"
            )));
        }
    }
    Ok(())
}

struct History {
    dt: f64,
    c: Vec<Vec<Complex64>>,
    /// Right-sided derivative at each grid point.
    d_right: Vec<Vec<Complex64>>,
    /// Left-sided derivative at each grid point (unused at index 0).
    d_left: Vec<Vec<Complex64>>,
}

impl History {
    fn at(&self, q: f64, atom: usize) -> Complex64 {
        let last = self.c.len() - 1;
        let q = q.max(0.0);
        let x = q / self.dt;
        if x >= last as f64 {
            return self.c[last][atom];
        }
        let i = (x.floor() as usize).min(last - 1);
        let s = x - i as f64;
        let (y0, y1) = (self.c[i][atom], self.c[i + 1][atom]);
        let (m0, m1) = (self.d_right[i][atom] * self.dt, self.d_left[i + 1][atom] * self.dt);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + m0 * (s3 - 2.0 * s2 + s) + y1 * (-2.0 * s3 + 3.0 * s2) + m1 * (s3 - s2)
    }
}

/// Right-hand side at stage time `t` given current stage amplitudes `c`.
/// A delayed term is active when `τ <= t_start` (arrived by the start of the
/// step) or `τ < t` (arrived strictly inside it).
#[allow(clippy::too_many_arguments)]
fn rhs(
    set: &DelaySet,
    hist: &History,
    markov: f64,
    half_g: f64,
    t_start: f64,
    t: f64,
    c: &[Complex64],
    out: &mut [Complex64],
) {
    let tol = 1e-9 * hist.dt;
    for (n, o) in out.iter_mut().enumerate() {
        let mut v = -markov * c[n];
        for term in set.terms(n) {
            let active = term.delay <= t_start + tol || term.delay < t - tol;
            if !active {
                continue;
            }
            let delayed = if term.delay <= tol { c[term.source] } else { hist.at(t - term.delay, term.source) };
            v -= half_g * term.weight * delayed;
        }
        *o = v;
    }
}

/// Integrates the retardation-only equation of motion from `c0` to `t_end`.
///
/// `dt` must divide the shortest nonzero delay (to `1e−9` relative), which
/// places every delay arrival of regular layouts on the grid. The returned
/// trajectory stores the closure `1 − Σ|c_n|²` in `n_b`.
pub fn solve_retard(
    layout: &CouplingLayout,
    gamma0: f64,
    omega0: f64,
    c0: &AmplitudeVector,
    t_end: f64,
    dt: f64,
) -> Result<AmplitudeTrajectory> {
    if !(gamma0.is_finite() && gamma0 >= 0.0) || !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::Config(format!("need gamma0 >= 0 and omega0 > 0, got {gamma0}, {omega0}")));
    }
    if !(dt.is_finite() && dt > 0.0) || !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Config(format!("need dt > 0 and t_end > 0, got {dt}, {t_end}")));
    }
    let n = layout.n_atoms();
    if c0.len() != n {
        return Err(Error::Config(format!("initial state has {} amplitudes for {n} atoms", c0.len())));
    }
    let set = DelaySet::new(layout, omega0);
    check_alignment(&set, dt)?;
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let markov = 0.5 * layout.n_legs() as f64 * gamma0;
    let half_g = 0.5 * gamma0;
    let zero = Complex64::new(0.0, 0.0);

    let init = c0.amplitudes().to_vec();
    let mut hist = History {
        dt,
        c: Vec::with_capacity(steps + 1),
        d_right: Vec::with_capacity(steps + 1),
        d_left: Vec::with_capacity(steps + 1),
    };
    hist.c.push(init);
    hist.d_left.push(vec![zero; n]);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    for j in 0..steps {
        let t = j as f64 * dt;
        let c = hist.c[j].clone();
        rhs(&set, &hist, markov, half_g, t, t, &c, &mut k1);
        hist.d_right.push(k1.clone());
        for i in 0..n {
            stage[i] = c[i] + k1[i] * (0.5 * dt);
        }
        rhs(&set, &hist, markov, half_g, t, t + 0.5 * dt, &stage, &mut k2);
        for i in 0..n {
            stage[i] = c[i] + k2[i] * (0.5 * dt);
        }
        rhs(&set, &hist, markov, half_g, t, t + 0.5 * dt, &stage, &mut k3);
        for i in 0..n {
            stage[i] = c[i] + k3[i] * dt;
        }
        rhs(&set, &hist, markov, half_g, t, t + dt, &stage, &mut k4);
        let next: Vec<Complex64> = (0..n).map(|i| c[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0)).collect();
        if next.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite amplitude at step {} (t = {})", j + 1, t + dt)));
        }
        // left derivative at the new point: terms arriving exactly there stay off
        hist.c.push(next.clone());
        let mut left = vec![zero; n];
        rhs(&set, &hist, markov, half_g, t, t + dt, &next, &mut left);
        hist.d_left.push(left);
    }

    let n_b = hist.c.iter().map(|c| 1.0 - c.iter().map(Complex64::norm_sqr).sum::<f64>()).collect();
    let mut traj = AmplitudeTrajectory::new(dt, omega0, gamma0, hist.c, Framework::Retard);
    traj.n_b = n_b;
    Ok(traj)
}
