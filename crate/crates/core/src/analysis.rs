//! Observables derived from trajectories: instantaneous decay rates,
//! population changes and comparisons between frameworks.

use std::io::{self, Write};

use crate::error::{domain, Result};
use crate::trajectory::{AmplitudeTrajectory, Framework};

/// Populations below this value are masked out of rate series.
pub const POPULATION_FLOOR: f64 = 1e-12;

/// Which population a rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Total,
    Atom(usize),
}

/// `Γ_ins(t)/Γ0` on the trajectory grid; masked points carry `NaN`.
#[derive(Debug, Clone)]
pub struct RateSeries {
    /// Times `t ω0`.
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
    pub masked: Vec<bool>,
    pub scope: Scope,
    pub framework: Framework,
}

impl RateSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Unmasked `(t ω0, rate)` pairs.
    pub fn valid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().zip(&self.rates).zip(&self.masked).filter(|(_, &m)| !m).map(|((&t, &r), _)| (t, r))
    }

    /// CSV with columns `t*omega0, rate_over_gamma0, masked`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t*omega0,rate_over_gamma0,masked")?;
        for ((t, r), m) in self.times.iter().zip(&self.rates).zip(&self.masked) {
            writeln!(w, "{t:.10e},{r:.12e},{}", u8::from(*m))?;
        }
        Ok(())
    }
}

fn populations(trajectory: &AmplitudeTrajectory, scope: Scope) -> Result<Vec<f64>> {
    match scope {
        Scope::Total => Ok(trajectory.total_population()),
        Scope::Atom(n) => trajectory.population(n),
    }
}

fn finish(trajectory: &AmplitudeTrajectory, scope: Scope, deriv: Vec<Option<f64>>) -> RateSeries {
    let g = trajectory.gamma0;
    let scale = if g > 0.0 { g } else { 1.0 };
    let times = (0..trajectory.len()).map(|j| trajectory.time(j) * trajectory.omega0).collect();
    let masked = deriv.iter().map(Option::is_none).collect();
    let rates = deriv.into_iter().map(|d| d.map_or(f64::NAN, |v| -v / scale)).collect();
    RateSeries { times, rates, masked, scope, framework: trajectory.framework }
}

/// `Γ_ins = −d ln P_e/dt` in units of `Γ0`, by central differences in the
/// interior and second-order one-sided differences at the ends.
pub fn instantaneous_rate(trajectory: &AmplitudeTrajectory, scope: Scope) -> Result<RateSeries> {
    let p = populations(trajectory, scope)?;
    let len = p.len();
    if len < 3 {
        return domain(format!("rate needs at least 3 samples, got {len}"));
    }
    let dt = trajectory.dt;
    let lp: Vec<Option<f64>> = p.iter().map(|&v| (v >= POPULATION_FLOOR).then(|| v.ln())).collect();
    let deriv = (0..len)
        .map(|j| {
            let (a, b, c, w) = if j == 0 {
                (0, 1, 2, [-3.0, 4.0, -1.0])
            } else if j == len - 1 {
                (len - 3, len - 2, len - 1, [1.0, -4.0, 3.0])
            } else {
                (j - 1, j, j + 1, [-1.0, 0.0, 1.0])
            };
            Some((w[0] * lp[a]? + w[1] * lp[b]? + w[2] * lp[c]?) / (2.0 * dt))
        })
        .collect();
    Ok(finish(trajectory, scope, deriv))
}

/// Rate from local least-squares fits of `ln P_e` over `2 half_window + 1`
/// points (Savitzky–Golay derivative); windows are truncated at the ends.
pub fn instantaneous_rate_smoothed(trajectory: &AmplitudeTrajectory, scope: Scope, half_window: usize) -> Result<RateSeries> {
    if half_window == 0 {
        return instantaneous_rate(trajectory, scope);
    }
    let p = populations(trajectory, scope)?;
    let len = p.len();
    if len < 3 {
        return domain(format!("rate needs at least 3 samples, got {len}"));
    }
    let dt = trajectory.dt;
    let deriv = (0..len)
        .map(|j| {
            let lo = j.saturating_sub(half_window);
            let hi = (j + half_window).min(len - 1);
            let xs: Vec<f64> = (lo..=hi).map(|i| (i as f64 - j as f64) * dt).collect();
            let mut ys = Vec::with_capacity(xs.len());
            for &v in &p[lo..=hi] {
                if v < POPULATION_FLOOR {
                    return None;
                }
                ys.push(v.ln());
            }
            let nx = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / nx;
            let my = ys.iter().sum::<f64>() / nx;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            Some(sxy / sxx)
        })
        .collect();
    Ok(finish(trajectory, scope, deriv))
}

/// `ΔP_e(t) ω0/Γ0 = (|c_n(t)|² − |c_n(0)|²) ω0/Γ0`.
pub fn population_change(trajectory: &AmplitudeTrajectory, n: usize) -> Result<Vec<f64>> {
    let p = trajectory.population(n)?;
    let scale = if trajectory.gamma0 > 0.0 { trajectory.omega0 / trajectory.gamma0 } else { 1.0 };
    let p0 = p[0];
    Ok(p.iter().map(|v| (v - p0) * scale).collect())
}

/// `max_{t ≥ t*} |Γ_a − Γ_b|` over points unmasked in both series.
pub fn framework_agreement(a: &RateSeries, b: &RateSeries, t_star: f64) -> Result<f64> {
    let len = a.len().min(b.len());
    let mut worst: Option<f64> = None;
    for j in 0..len {
        let t = a.times[j];
        let scale = a.times.get(1).map_or(1.0, |t1| t1.abs()).max(f64::MIN_POSITIVE);
        if (t - b.times[j]).abs() > 1e-9 * scale {
            return domain(format!("series are on different grids (t = {t} vs {})", b.times[j]));
        }
        if t < t_star || a.masked[j] || b.masked[j] {
            continue;
        }
        let d = (a.rates[j] - b.rates[j]).abs();
        worst = Some(worst.map_or(d, |w: f64| w.max(d)));
    }
    worst.ok_or_else(|| crate::Error::Domain(format!("no common unmasked points at t >= {t_star}")))
}

/// Mean rate over the last `fraction` of the series.
pub fn plateau(series: &RateSeries, fraction: f64) -> Result<f64> {
    let t_end = *series.times.last().unwrap_or(&0.0);
    let t_from = t_end * (1.0 - fraction);
    let vals: Vec<f64> = series.valid().filter(|&(t, _)| t >= t_from).map(|(_, r)| r).collect();
    if vals.is_empty() {
        return domain("no unmasked points in the plateau window");
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Largest unmasked rate and its time `(t ω0, rate)`.
pub fn peak(series: &RateSeries) -> Result<(f64, f64)> {
    series
        .valid()
        .fold(None, |best: Option<(f64, f64)>, (t, r)| match best {
            Some((_, br)) if br >= r => best,
            _ => Some((t, r)),
        })
        .ok_or_else(|| crate::Error::Domain("rate series has no unmasked points".into()))
}

/// Number of sign changes of the unmasked rates in `[t_from, t_to]`,
/// ignoring values with `|rate| <= dead_band`.
pub fn sign_changes(series: &RateSeries, t_from: f64, t_to: f64, dead_band: f64) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for (t, r) in series.valid() {
        if t < t_from || t > t_to || r.abs() <= dead_band {
            continue;
        }
        let pos = r > 0.0;
        if let Some(prev) = last {
            if prev != pos {
                count += 1;
            }
        }
        last = Some(pos);
    }
    count
}
