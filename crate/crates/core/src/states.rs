//! Initial states: timed-Dicke states, single excitations and the
//! subradiant eigenstate of the Markovian effective Hamiltonian.

use num_complex::Complex64;

use crate::eigen::{self, DenseMatrix};
use crate::error::{domain, Error, Result};
use crate::geometry::CouplingLayout;
use crate::model::WaveguideSetup;

/// Propagation direction of the imprinting photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    TimedDicke(Direction),
    Subradiant,
    ExcitedSingle(usize),
    Custom,
}

impl StateLabel {
    pub fn as_str(&self) -> String {
        match self {
            StateLabel::TimedDicke(Direction::Plus) => "timed_dicke_plus".into(),
            StateLabel::TimedDicke(Direction::Minus) => "timed_dicke_minus".into(),
            StateLabel::Subradiant => "subradiant".into(),
            StateLabel::ExcitedSingle(n) => format!("excited_single_{n}"),
            StateLabel::Custom => "custom".into(),
        }
    }
}

/// Unit-norm single-excitation amplitudes `c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    amplitudes: Vec<Complex64>,
    label: StateLabel,
}

impl AmplitudeVector {
    /// Accepts amplitudes already normalized to 1 within 1e−12.
    pub fn new(amplitudes: Vec<Complex64>, label: StateLabel) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if amplitudes.is_empty() || !((norm - 1.0).abs() <= 1e-12) {
            return domain(format!("amplitudes must have unit norm, got Σ|c|² = {norm}"));
        }
        Ok(Self { amplitudes, label })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>, label: StateLabel) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return domain(format!("cannot normalize amplitudes with norm {norm}"));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|c| c / norm).collect(), label })
    }

    /// The state with emitter `n` excited.
    pub fn excited(n_atoms: usize, n: usize) -> Result<Self> {
        if n >= n_atoms {
            return domain(format!("atom index {n} out of range for {n_atoms} atoms"));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); n_atoms];
        a[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: a, label: StateLabel::ExcitedSingle(n) })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Timed-Dicke state `c_n ∝ Σ_m e^{±ik0 x_m^n}`.
pub fn timed_dicke(layout: &CouplingLayout, setup: &WaveguideSetup, direction: Direction) -> Result<AmplitudeVector> {
    let wave = direction.sign() * setup.k0();
    let amps: Vec<Complex64> = layout
        .positions()
        .iter()
        .map(|legs| legs.iter().map(|&x| Complex64::cis(wave * x)).sum())
        .collect();
    let norm2: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let scale = (layout.n_atoms() * layout.n_legs() * layout.n_legs()) as f64;
    if norm2 <= 1e-20 * scale {
        return domain(format!(
            "timed-Dicke normalization undefined: the leg sums vanish (Σ|c|² = {norm2:e}); the spacing is dark"
        ));
    }
    AmplitudeVector::normalized(amps, StateLabel::TimedDicke(direction))
}

/// Markovian effective Hamiltonian `ω0 δ − iΓ0 Σ_{mm'} e^{ik0|x − x'|}`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    matrix: DenseMatrix,
    omega0: f64,
    gamma0: f64,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, n: usize, n2: usize) -> Complex64 {
        self.matrix[(n, n2)]
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn eigenpairs(&self) -> Result<Vec<eigen::EigenPair>> {
        let n = self.dim();
        let scale = if self.gamma0 > 0.0 { self.gamma0 } else { 1.0 };
        let mut scaled = self.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                let mut v = scaled[(i, j)];
                if i == j {
                    v -= self.omega0;
                }
                scaled[(i, j)] = v / scale;
            }
        }
        let mut pairs = eigen::eigen(&scaled)?;
        for p in pairs.iter_mut() {
            p.value = p.value * scale + self.omega0;
        }
        Ok(pairs)
    }
}

pub fn effective_hamiltonian(layout: &CouplingLayout, setup: &WaveguideSetup) -> EffectiveHamiltonian {
    let n = layout.n_atoms();
    let k0 = setup.k0();
    let pos = layout.positions();
    let mut m = DenseMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let s: Complex64 =
                pos[a].iter().flat_map(|&x| pos[b].iter().map(move |&y| Complex64::cis(k0 * (x - y).abs()))).sum();
            let mut v = Complex64::new(0.0, -setup.gamma0) * s;
            if a == b {
                v += setup.omega0;
            }
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    EffectiveHamiltonian { matrix: m, omega0: setup.omega0, gamma0: setup.gamma0 }
}

/// Eigenvector of `H` with the smallest decay rate `−Im λ`; ties within
/// 1e−10 Γ0 go to the smallest `Re λ`.
pub fn subradiant_state(h: &EffectiveHamiltonian) -> Result<(AmplitudeVector, Complex64)> {
    let n = h.dim();
    if n == 0 || n > 64 {
        return domain(format!("subradiant search supports 1..=64 emitters, got {n}"));
    }
    let pairs = h.eigenpairs()?;
    let tie = 1e-10 * if h.gamma0 > 0.0 { h.gamma0 } else { 1.0 };
    let mut best = 0;
    for (i, p) in pairs.iter().enumerate().skip(1) {
        let cur = &pairs[best];
        let (d, dc) = (-p.value.im, -cur.value.im);
        if d < dc - tie || ((d - dc).abs() <= tie && p.value.re < cur.value.re) {
            best = i;
        }
    }
    let pair = &pairs[best];
    let res = eigen::residual(h.matrix(), pair);
    let bound = 1e-10 * h.matrix().frobenius_norm();
    if res > bound {
        return Err(Error::Numerical(format!("subradiant eigenpair residual {res:e} exceeds {bound:e}")));
    }
    let v = AmplitudeVector::normalized(pair.vector.clone(), StateLabel::Subradiant)?;
    Ok((v, pair.value))
}
