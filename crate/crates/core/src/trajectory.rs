//! Time series of emitter amplitudes produced by the solvers.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{domain, Result};

/// The dynamical framework that produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Framework {
    Const,
    Lin,
    Retard,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::Const => "const",
            Framework::Lin => "lin",
            Framework::Retard => "retard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "const" => Some(Framework::Const),
            "lin" => Some(Framework::Lin),
            "retard" => Some(Framework::Retard),
            _ => None,
        }
    }
}

/// Amplitudes `c_n(t_j)` on the uniform grid `t_j = j dt`.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub dt: f64,
    pub omega0: f64,
    pub gamma0: f64,
    /// `amplitudes[j][n]`.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// Waveguide excitation number; for the retard framework this is the
    /// closure `1 − Σ|c|²`.
    pub n_b: Vec<f64>,
    pub framework: Framework,
    pub normalized: bool,
}

impl AmplitudeTrajectory {
    pub fn new(dt: f64, omega0: f64, gamma0: f64, amplitudes: Vec<Vec<Complex64>>, framework: Framework) -> Self {
        let n_b = vec![0.0; amplitudes.len()];
        Self { dt, omega0, gamma0, amplitudes, n_b, framework, normalized: false }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.amplitudes.first().map_or(0, Vec::len)
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// `|c_n(t_j)|²` for every `j`.
    pub fn population(&self, n: usize) -> Result<Vec<f64>> {
        if n >= self.n_atoms() {
            return domain(format!("atom index {n} out of range for {} atoms", self.n_atoms()));
        }
        Ok(self.amplitudes.iter().map(|c| c[n].norm_sqr()).collect())
    }

    /// `Σ_n |c_n(t_j)|²` for every `j`.
    pub fn total_population(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    /// `Σ_n |c_n|² + N_B` for every `j`.
    pub fn total_excitation(&self) -> Vec<f64> {
        self.total_population().iter().zip(&self.n_b).map(|(p, b)| p + b).collect()
    }

    /// CSV with columns `t*omega0, re_c1, im_c1, ..., N_B, P_total`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t*omega0")?;
        for n in 1..=self.n_atoms() {
            write!(w, ",re_c{n},im_c{n}")?;
        }
        writeln!(w, ",N_B,P_total")?;
        for (j, c) in self.amplitudes.iter().enumerate() {
            write!(w, "{:.10e}", self.time(j) * self.omega0)?;
            let mut p = 0.0;
            for z in c {
                write!(w, ",{:.15e},{:.15e}", z.re, z.im)?;
                p += z.norm_sqr();
            }
            writeln!(w, ",{:.15e},{:.15e}", self.n_b[j], p)?;
        }
        Ok(())
    }
}
