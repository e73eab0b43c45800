//! Waveguide parameters, the Jaynes–Cummings coupling profile, the Markovian
//! collective rate and Zeno times.
//!
//! All `k` integrals are written in the dimensionless variable `z = k/k0`.
//! With `v_g = 1` the squared JC coupling is `2 Γ0 W(z)` where
//! `W(z) = 1/(1+z)²` (const) or `z/(1+z)²` (lin).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::geometry::CouplingLayout;
use crate::specfun::{exp_over_u, exp_over_u2};

/// Frequency dependence of the bare coupling `g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingModel {
    /// `g_k = √(Γ0 v_g / 2)`.
    ConstWQED,
    /// `g_k = √(Γ0 v_g |k| / 2k0)`.
    LinWQED,
}

impl CouplingModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingModel::ConstWQED => "const",
            CouplingModel::LinWQED => "lin",
        }
    }

    /// Dimensionless weight `W(z)` of the squared JC coupling.
    pub fn weight(self, z: f64) -> f64 {
        let w = 1.0 / ((1.0 + z) * (1.0 + z));
        match self {
            CouplingModel::ConstWQED => w,
            CouplingModel::LinWQED => z * w,
        }
    }
}

/// Physical parameters of the waveguide and the emitters.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSetup {
    pub coupling_model: CouplingModel,
    pub gamma0: f64,
    pub omega0: f64,
    /// `Λ/k0`.
    pub cutoff_ratio: f64,
    pub group_velocity: f64,
    warnings: Vec<String>,
}

impl WaveguideSetup {
    /// Validates the parameters. Leaving the weak-coupling regime only
    /// attaches a warning.
    pub fn new(coupling_model: CouplingModel, gamma0: f64, omega0: f64, cutoff_ratio: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return domain(format!("gamma0 must be finite and non-negative, got {gamma0}"));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return domain(format!("omega0 must be positive, got {omega0}"));
        }
        if !(cutoff_ratio.is_finite() && cutoff_ratio > 1.0) {
            return domain(format!("cutoff ratio must exceed 1, got {cutoff_ratio}"));
        }
        let mut warnings = Vec::new();
        if gamma0 > 0.0 {
            let ratio = omega0 / gamma0;
            let (needed, what) = match coupling_model {
                CouplingModel::ConstWQED => (100.0, "100".to_string()),
                CouplingModel::LinWQED => {
                    let l = cutoff_ratio.ln();
                    (100.0 * l, format!("100 ln(Λ/k0) = {:.3}", 100.0 * l))
                }
            };
            if ratio < needed {
                warnings.push(format!(
                    "weak-coupling condition violated for {} model: omega0/gamma0 = {ratio:.3} < {what}",
                    coupling_model.as_str()
                ));
            }
        }
        Ok(Self { coupling_model, gamma0, omega0, cutoff_ratio, group_velocity: 1.0, warnings })
    }

    /// Convenience constructor with `ω0 = 1`.
    pub fn natural(coupling_model: CouplingModel, gamma0_over_omega0: f64, cutoff_ratio: f64) -> Result<Self> {
        Self::new(coupling_model, gamma0_over_omega0, 1.0, cutoff_ratio)
    }

    pub fn k0(&self) -> f64 {
        self.omega0 / self.group_velocity
    }

    /// The absolute cutoff wavenumber `Λ`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff_ratio * self.k0()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Bare coupling `g_k`.
    pub fn bare_coupling(&self, k: f64) -> f64 {
        let base = self.gamma0 * self.group_velocity / 2.0;
        match self.coupling_model {
            CouplingModel::ConstWQED => base.sqrt(),
            CouplingModel::LinWQED => (base * k.abs() / self.k0()).sqrt(),
        }
    }

    pub fn with_gamma0(&self, gamma0: f64) -> Result<Self> {
        Self::new(self.coupling_model, gamma0, self.omega0, self.cutoff_ratio)
    }

    pub fn with_model(&self, model: CouplingModel) -> Result<Self> {
        Self::new(model, self.gamma0, self.omega0, self.cutoff_ratio)
    }
}

/// `g_k^JC = 2 ω0 g_k / (ω0 + ω_k)` with `ω_k = |k| v_g`.
pub fn jc_coupling(setup: &WaveguideSetup, k: f64) -> Result<f64> {
    if !(k.abs() <= setup.cutoff()) {
        return domain(format!("wavenumber {k} outside the band |k| <= {}", setup.cutoff()));
    }
    let omega_k = k.abs() * setup.group_velocity;
    Ok(2.0 * setup.omega0 * setup.bare_coupling(k) / (setup.omega0 + omega_k))
}

/// `|Σ_{m<M} e^{imθ}|² = sin²(Mθ/2)/sin²(θ/2)`, evaluated as a phasor sum so
/// that the removable singularities at `θ = 2πj` need no special casing.
pub fn dirichlet_factor(m: usize, theta: f64) -> f64 {
    let s: Complex64 = (0..m).map(|j| Complex64::cis(j as f64 * theta)).sum();
    s.norm_sqr()
}

/// Markovian collective rate of an `M`-legged atom with uniform leg phase
/// `φ`: `Γ0 sin²(Mφ/2)/sin²(φ/2)`, equal to `M² Γ0` at `φ = 2πj`.
pub fn markovian_rate(gamma0: f64, n_legs: usize, phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    gamma0 * dirichlet_factor(n_legs, r)
}

/// `F_q = sin²(Mqd/2)/sin²(qd/2)` for a uniform leg spacing `d`; bounded by `M²`.
pub fn f_q(n_legs: usize, q_times_spacing: f64) -> f64 {
    dirichlet_factor(n_legs, q_times_spacing.rem_euclid(2.0 * PI))
}

/// `∫₀^Λ cos(zφ) W(z) dz` in closed form, `Λ = cutoff_ratio`.
pub fn leg_pair_integral(model: CouplingModel, phi: f64, cutoff_ratio: f64) -> f64 {
    let u = cutoff_ratio + 1.0;
    let rot = Complex64::cis(-phi);
    let p2 = exp_over_u2(phi, 1.0, u);
    let v = match model {
        CouplingModel::ConstWQED => rot * p2,
        CouplingModel::LinWQED => rot * (exp_over_u(phi, 1.0, u) - p2),
    };
    v.re
}

fn single_atom_sum(model: CouplingModel, n_legs: usize, phi: f64, cutoff_ratio: f64) -> f64 {
    let m = n_legs as f64;
    let mut sum = m * leg_pair_integral(model, 0.0, cutoff_ratio);
    for n in 1..n_legs {
        sum += 2.0 * (m - n as f64) * leg_pair_integral(model, n as f64 * phi, cutoff_ratio);
    }
    sum
}

/// Exact `τ_Z⁻²` of an `M`-legged atom with uniform leg spacing, for either
/// coupling model.
pub fn zeno_rate_exact(setup: &WaveguideSetup, n_legs: usize, within_atom_spacing: f64) -> Result<f64> {
    if n_legs == 0 {
        return domain("zeno time needs at least one leg");
    }
    if n_legs > 1 && !(within_atom_spacing > 0.0) {
        return domain(format!("leg spacing must be positive, got {within_atom_spacing}"));
    }
    let phi = setup.k0() * within_atom_spacing;
    let pref = 2.0 * setup.gamma0 * setup.omega0 / PI;
    Ok(pref * single_atom_sum(setup.coupling_model, n_legs, phi, setup.cutoff_ratio))
}

/// Zeno time `τ_Z` of a single excited `M`-legged atom.
///
/// The const model is evaluated exactly. The lin model uses the large-cutoff
/// form `τ_Z⁻² ≈ (2Γ0ω0/π) M ln(Λ/k0 + 1)`; see [`zeno_rate_exact`] for the
/// untruncated value.
pub fn zeno_time_single(setup: &WaveguideSetup, n_legs: usize, within_atom_spacing: f64) -> Result<f64> {
    let rate = match setup.coupling_model {
        CouplingModel::ConstWQED => zeno_rate_exact(setup, n_legs, within_atom_spacing)?,
        CouplingModel::LinWQED => {
            if n_legs == 0 {
                return domain("zeno time needs at least one leg");
            }
            2.0 * setup.gamma0 * setup.omega0 / PI * n_legs as f64 * (setup.cutoff_ratio + 1.0).ln()
        }
    };
    Ok(rate.sqrt().recip())
}

/// Zeno time `τ_{Z,N}` of the timed-Dicke state `𝒩 Σ e^{iqx} σ†|G⟩`.
///
/// Evaluates `(p − p²)ω0² + 𝒩² Σ e^{−iq(x'−x)} ∫ dk/2π (g^JC)² e^{ik(x'−x)}`
/// over all ordered pairs of coupling points, with
/// `𝒩⁻² = Σ_n |Σ_m e^{ik0 x}|²` and `p = 𝒩² Σ_n |Σ_m e^{iqx}|²`.
pub fn zeno_time_array(setup: &WaveguideSetup, layout: &CouplingLayout, q: f64) -> Result<f64> {
    let rate = zeno_rate_array(setup, layout, q)?;
    if !(rate > 0.0) {
        return Err(crate::Error::Numerical(format!("non-positive Zeno rate {rate:e} for the timed-Dicke state")));
    }
    Ok(rate.sqrt().recip())
}

/// `τ_{Z,N}⁻²` as used by [`zeno_time_array`]. For `|q| ≠ k0` the state is not
/// normalized and the value may be negative.
pub fn zeno_rate_array(setup: &WaveguideSetup, layout: &CouplingLayout, q: f64) -> Result<f64> {
    let k0 = setup.k0();
    let leg_sum = |n: usize, wave: f64| -> Complex64 {
        layout.positions()[n].iter().map(|&x| Complex64::cis(wave * x)).sum()
    };
    let norm_inv: f64 = (0..layout.n_atoms()).map(|n| leg_sum(n, k0).norm_sqr()).sum();
    if norm_inv <= 1e-300 {
        return domain("timed-Dicke normalization vanishes for this layout (dark spacing)");
    }
    let norm2 = 1.0 / norm_inv;
    let p = norm2 * (0..layout.n_atoms()).map(|n| leg_sum(n, q).norm_sqr()).sum::<f64>();
    let points: Vec<f64> = layout.positions().iter().flatten().copied().collect();
    let pref = 2.0 * setup.gamma0 * setup.omega0 / PI;
    let model = setup.coupling_model;
    let mut cross = 0.0;
    for (i, &x) in points.iter().enumerate() {
        cross += leg_pair_integral(model, 0.0, setup.cutoff_ratio);
        for &x2 in &points[i + 1..] {
            let delta = x2 - x;
            cross += 2.0 * (q * delta).cos() * leg_pair_integral(model, k0 * delta.abs(), setup.cutoff_ratio);
        }
    }
    Ok((p - p * p) * setup.omega0 * setup.omega0 + norm2 * pref * cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::specfun::{cosine_integral, sine_integral};

    fn setup(model: CouplingModel, g: f64, cutoff: f64) -> WaveguideSetup {
        WaveguideSetup::natural(model, g, cutoff).unwrap()
    }

    /// `∫₀^Λ cos(zφ) W(z) dz` by Gauss–Kronrod.
    fn leg_pair_oracle(model: CouplingModel, phi: f64, cutoff: f64) -> f64 {
        let f = |z: f64| (z * phi).cos() * model.weight(z);
        let panel = if phi > 0.0 { (PI / phi).min(1.0) } else { 1.0 };
        quad::integrate_split(f, 0.0, cutoff, panel, 1e-13).unwrap()
    }

    #[test]
    fn setup_validation() {
        assert!(WaveguideSetup::natural(CouplingModel::ConstWQED, 1e-4, 1.0).is_err());
        assert!(WaveguideSetup::new(CouplingModel::ConstWQED, 1e-4, 0.0, 10.0).is_err());
        assert!(WaveguideSetup::natural(CouplingModel::ConstWQED, -1.0, 10.0).is_err());
        assert!(setup(CouplingModel::ConstWQED, 1e-4, 1e4).warnings().is_empty());
        assert!(setup(CouplingModel::LinWQED, 1e-4, 1e4).warnings().is_empty());
        assert_eq!(setup(CouplingModel::LinWQED, 1e-2, 1e4).warnings().len(), 1);
        assert_eq!(setup(CouplingModel::ConstWQED, 0.05, 1e4).warnings().len(), 1);
    }

    #[test]
    fn jc_coupling_examples() {
        let s = setup(CouplingModel::ConstWQED, 2.0, 10.0);
        assert!((jc_coupling(&s, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((jc_coupling(&s, 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((jc_coupling(&s, -3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(jc_coupling(&s, 10.5).is_err());
        let l = setup(CouplingModel::LinWQED, 2.0, 10.0);
        assert_eq!(jc_coupling(&l, 0.0).unwrap(), 0.0);
        assert!((jc_coupling(&l, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn markovian_rate_examples() {
        assert!((markovian_rate(1.0, 1, 0.37) - 1.0).abs() < 1e-15);
        assert!((markovian_rate(1.0, 2, 0.1 * PI) - 3.902_113_032_590_307).abs() < 1e-12);
        assert!((markovian_rate(1.0, 2, 0.1 * PI) - 4.0 * (0.05 * PI).cos().powi(2)).abs() < 1e-13);
        assert!(markovian_rate(1.0, 2, PI).abs() < 1e-15);
        let a = markovian_rate(1.0, 3, 0.1 * PI);
        let b = 1.0 * (0.15 * PI).sin().powi(2) / (0.05 * PI).sin().powi(2);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn markovian_rate_removable_points() {
        for m in 1..6 {
            let m2 = (m * m) as f64;
            assert!((markovian_rate(1.0, m, 0.0) - m2).abs() < 1e-12);
            for j in [1.0, 2.0, -1.0] {
                let at = 2.0 * PI * j;
                assert!((markovian_rate(1.0, m, at) - m2).abs() < 1e-9);
                assert!((markovian_rate(1.0, m, at + 1e-8) - m2).abs() < 1e-9);
                assert!((markovian_rate(1.0, m, at - 1e-8) - m2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn leg_pair_integral_matches_quadrature() {
        for model in [CouplingModel::ConstWQED, CouplingModel::LinWQED] {
            for &cutoff in &[10.0, 1e3] {
                for &phi in &[0.0, 0.1 * PI, 0.3, 2.0, 3.0 * PI] {
                    let exact = leg_pair_integral(model, phi, cutoff);
                    let oracle = leg_pair_oracle(model, phi, cutoff);
                    assert!((exact - oracle).abs() < 1e-10 * oracle.abs().max(1.0), "{model:?} φ={phi} Λ={cutoff}: {exact} vs {oracle}");
                }
            }
        }
        // analytic values at φ = 0
        let c = 99.0;
        assert!((leg_pair_integral(CouplingModel::ConstWQED, 0.0, c) - c / (c + 1.0)).abs() < 1e-14);
        let lin = (c + 1.0).ln() - c / (c + 1.0);
        assert!((leg_pair_integral(CouplingModel::LinWQED, 0.0, c) - lin).abs() < 1e-13);
    }

    #[test]
    fn zeno_lin_example() {
        let s = setup(CouplingModel::LinWQED, 1e-4, 1e4);
        let tau = zeno_time_single(&s, 2, 0.1 * PI).unwrap();
        let oracle = (2.0 * 1e-4 * 2.0 * (1e4f64 + 1.0).ln() / PI).powf(-0.5);
        assert!((tau - oracle).abs() < 1e-12);
        assert!((tau - 29.2015).abs() < 1e-4);
    }

    #[test]
    fn zeno_const_single_leg() {
        let s = setup(CouplingModel::ConstWQED, 1e-4, 1e4);
        let tau = zeno_time_single(&s, 1, 0.0).unwrap();
        let c = 1e4;
        let expected = 2.0 * 1e-4 / PI * c / (c + 1.0);
        assert!((tau.powi(-2) - expected).abs() < 1e-14 * expected.max(1.0) + 1e-18);
        // the large-cutoff bracket {1 + 0} of the single-leg formula
        assert!((tau.powi(-2) / (2.0 * 1e-4 / PI) - 1.0).abs() < 2e-4);
    }

    #[test]
    fn zeno_const_matches_truncated_formula() {
        // The large-cutoff formula for uniform legs drops O(1/Λ) terms.
        let s = setup(CouplingModel::ConstWQED, 1e-4, 1e4);
        let phi = 0.1 * PI;
        let m = 3usize;
        let mut bracket = (m * m) as f64;
        for n in 1..m {
            let a = n as f64 * phi;
            let g = |z: f64| a.sin() * cosine_integral(a * z).unwrap() - a.cos() * sine_integral(a * z).unwrap();
            bracket += 2.0 * a * (m - n) as f64 * (g(1.0 + 1e4) - g(1.0));
        }
        let truncated = 2.0 * 1e-4 / PI * bracket;
        let exact = zeno_rate_exact(&s, m, phi).unwrap();
        assert!((exact - truncated).abs() < 1e-3 * truncated, "{exact} vs {truncated}");
    }

    #[test]
    fn zeno_lin_exact_against_quadrature() {
        for model in [CouplingModel::ConstWQED, CouplingModel::LinWQED] {
            let s = setup(model, 1e-4, 200.0);
            for m in 1..4 {
                let exact = zeno_rate_exact(&s, m, 0.4).unwrap();
                let mut oracle = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        let phi = 0.4 * (a as f64 - b as f64).abs();
                        oracle += leg_pair_oracle(model, phi, 200.0);
                    }
                }
                oracle *= 2.0 * 1e-4 / PI;
                assert!((exact - oracle).abs() < 1e-8 * oracle);
            }
        }
    }

    #[test]
    fn zeno_cutoff_dependence() {
        let rate = |model, c| zeno_rate_exact(&setup(model, 1e-4, c), 2, 0.1 * PI).unwrap();
        let lin: Vec<f64> = [1e2, 1e3, 1e4, 1e5].iter().map(|&c| rate(CouplingModel::LinWQED, c)).collect();
        let cst: Vec<f64> = [1e2, 1e3, 1e4, 1e5].iter().map(|&c| rate(CouplingModel::ConstWQED, c)).collect();
        for w in lin.windows(2) {
            assert!(w[1] - w[0] > 0.5 * 2.0 * 1e-4 / PI);
        }
        assert!((cst[3] - cst[2]).abs() < 1e-3 * cst[3]);
        assert!((cst[3] - cst[2]).abs() < (cst[1] - cst[0]).abs());
    }

    #[test]
    fn zeno_const_decreases_with_legs() {
        let s = setup(CouplingModel::ConstWQED, 1e-4, 1e4);
        let taus: Vec<f64> = (1..7).map(|m| zeno_time_single(&s, m, 0.05 * PI).unwrap()).collect();
        for w in taus.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn f_q_bounds() {
        for m in 1..6 {
            for i in 0..200 {
                let x = -7.0 + 0.0713 * i as f64;
                let f = f_q(m, x);
                assert!(f >= 0.0 && f <= (m * m) as f64 + 1e-12);
            }
        }
        assert!((f_q(2, 0.1 * PI) - markovian_rate(1.0, 2, 0.1 * PI)).abs() < 1e-14);
    }

    /// Brute-force `τ_{Z,N}⁻²`: every pair integral `∫_{−Λ}^{Λ} dk/2π (g^JC)² e^{i(k−q)Δ}`
    /// by quadrature, in absolute units.
    fn zeno_array_oracle(s: &WaveguideSetup, layout: &CouplingLayout, q: f64) -> f64 {
        let k0 = s.k0();
        let lam = s.cutoff();
        let pts: Vec<f64> = layout.positions().iter().flatten().copied().collect();
        let norm_inv: f64 = layout
            .positions()
            .iter()
            .map(|legs| legs.iter().map(|&x| Complex64::cis(k0 * x)).sum::<Complex64>().norm_sqr())
            .sum();
        let p: f64 = layout
            .positions()
            .iter()
            .map(|legs| legs.iter().map(|&x| Complex64::cis(q * x)).sum::<Complex64>().norm_sqr())
            .sum::<f64>()
            / norm_inv;
        let mut total = Complex64::new(0.0, 0.0);
        for &x in &pts {
            for &x2 in &pts {
                let delta = x2 - x;
                let f = |k: f64| {
                    let g = jc_coupling(s, k).unwrap();
                    Complex64::cis((k - q) * delta) * (g * g / (2.0 * PI))
                };
                let panel = if delta != 0.0 { (PI / delta.abs()).min(k0) } else { k0 };
                total += quad::integrate_split(f, -lam, lam, panel, 1e-14).unwrap();
            }
        }
        assert!(total.im.abs() < 1e-10 * total.re.abs());
        (p - p * p) * s.omega0 * s.omega0 + total.re / norm_inv
    }

    #[test]
    fn zeno_array_matches_quadrature() {
        let s = WaveguideSetup::new(CouplingModel::ConstWQED, 1e-4, 1.0, 300.0).unwrap();
        let d = 0.1 * PI;
        let layout = CouplingLayout::build_separate(2, 2, d, false).unwrap();
        for q in [1.0, -1.0, 0.8] {
            let rate = zeno_rate_array(&s, &layout, q).unwrap();
            let oracle = zeno_array_oracle(&s, &layout, q);
            assert!((rate - oracle).abs() < 1e-6 * oracle.abs(), "q={q}: {rate} vs {oracle}");
        }
        assert!(zeno_time_array(&s, &layout, 1.0).is_ok());
        let l = s.with_model(CouplingModel::LinWQED).unwrap();
        let tau = zeno_time_array(&l, &layout, 1.0).unwrap();
        let oracle = zeno_array_oracle(&l, &layout, 1.0);
        assert!((tau.powi(-2) - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn zeno_array_single_atom_reduces() {
        let s = setup(CouplingModel::ConstWQED, 1e-4, 1e4);
        let layout = CouplingLayout::build_separate(1, 1, 1.0, false).unwrap();
        let single = zeno_time_single(&s, 1, 0.0).unwrap();
        assert!((zeno_time_array(&s, &layout, 1.0).unwrap() - single).abs() < 1e-12 * single);
        // an M-legged atom excited with the k0 phases: the leg sum reweights the pair terms
        let layout = CouplingLayout::build_separate(1, 2, 0.1 * PI, false).unwrap();
        let arr = zeno_time_array(&s, &layout, 1.0).unwrap().powi(-2);
        let f = f_q(2, 0.1 * PI);
        let pref = 2.0 * 1e-4 / PI;
        let expected = pref / f
            * (2.0 * leg_pair_integral(CouplingModel::ConstWQED, 0.0, 1e4)
                + 2.0 * (0.1 * PI).cos() * leg_pair_integral(CouplingModel::ConstWQED, 0.1 * PI, 1e4));
        assert!((arr - expected).abs() < 1e-12 * expected);
    }
}
