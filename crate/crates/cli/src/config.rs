//! Scenario configuration files.
//!
//! A configuration is a TOML document with the sections `[setup]`,
//! `[layout]`, `[state]`, `[run]` and `[outputs]`. All quantities are
//! dimensionless: times in `1/ω0`, rates in `Γ0`, lengths in `π/k0` where
//! the key says so.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wqed::states::{effective_hamiltonian, subradiant_state, timed_dicke, Direction};
use wqed::{AmplitudeVector, CouplingLayout, CouplingModel, Framework, StateLabel, WaveguideSetup, C64};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub setup: SetupSection,
    pub layout: LayoutSection,
    pub state: StateSection,
    pub run: RunSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSection {
    #[serde(default = "default_model")]
    pub model: String,
    pub gamma0_over_omega0: f64,
    pub cutoff_ratio: f64,
}

fn default_model() -> String {
    "const".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub topology: String,
    #[serde(default)]
    pub n_atoms: Option<usize>,
    #[serde(default)]
    pub n_legs: Option<usize>,
    #[serde(default)]
    pub d_in_units_of_pi_over_k0: Option<f64>,
    #[serde(default = "default_true")]
    pub centered: bool,
    /// Custom positions in units of `π/k0`, one list per emitter.
    #[serde(default)]
    pub positions: Option<Vec<Vec<f64>>>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub kind: String,
    /// One-based emitter index for `excited_single`.
    #[serde(default)]
    pub atom: Option<usize>,
    #[serde(default)]
    pub amplitudes_re: Option<Vec<f64>>,
    #[serde(default)]
    pub amplitudes_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end_omega0: f64,
    #[serde(default)]
    pub dt_omega0: Option<f64>,
    /// Alternative to `dt_omega0`: the step is the shortest delay divided by this.
    #[serde(default)]
    pub steps_per_min_delay: Option<usize>,
    pub frameworks: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_which")]
    pub which: Vec<String>,
    #[serde(default = "default_points_per_d")]
    pub field_points_per_d: usize,
    #[serde(default = "default_time_stride")]
    pub field_time_stride: usize,
    #[serde(default = "default_margin")]
    pub field_margin_d: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            which: default_which(),
            field_points_per_d: default_points_per_d(),
            field_time_stride: default_time_stride(),
            field_margin_d: default_margin(),
        }
    }
}

fn default_directory() -> String {
    "out".into()
}

fn default_which() -> Vec<String> {
    vec!["trajectories".into(), "rates".into()]
}

fn default_points_per_d() -> usize {
    4
}

fn default_time_stride() -> usize {
    10
}

fn default_margin() -> f64 {
    10.0
}

pub const OUTPUT_KINDS: [&str; 4] = ["trajectories", "rates", "field", "zeno"];

/// A validated configuration turned into engine objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub setup: WaveguideSetup,
    pub layout: CouplingLayout,
    pub state: AmplitudeVector,
    pub frameworks: Vec<Framework>,
    pub dt: f64,
    pub t_end: f64,
}

/// One-based line of `key` inside `[section]`, if present in `src`.
pub fn line_of(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Diag<'a> {
    src: &'a str,
}

impl Diag<'_> {
    fn err(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
        match line_of(self.src, section, key) {
            Some(line) => CliError::config(format!("line {line}: [{section}] {key}: {msg}")),
            None => CliError::config(format!("[{section}] {key}: {msg}")),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::parse(&src)?, src))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// Validates against the source text (for line numbers) and builds the
    /// engine objects.
    pub fn build(&self, src: &str) -> Result<Scenario, CliError> {
        let diag = Diag { src };
        let model = match self.setup.model.as_str() {
            "const" => CouplingModel::ConstWQED,
            "lin" => CouplingModel::LinWQED,
            other => return Err(diag.err("setup", "model", format!("expected const or lin, got {other:?}"))),
        };
        let setup = WaveguideSetup::natural(model, self.setup.gamma0_over_omega0, self.setup.cutoff_ratio)
            .map_err(|e| diag.err("setup", "gamma0_over_omega0", e))?;

        let layout = self.build_layout(&diag)?;
        let state = self.build_state(&diag, &layout, &setup)?;

        if self.run.frameworks.is_empty() {
            return Err(diag.err("run", "frameworks", "at least one framework is required"));
        }
        let mut frameworks = Vec::new();
        for f in &self.run.frameworks {
            let fw = Framework::parse(f).ok_or_else(|| diag.err("run", "frameworks", format!("unknown framework {f:?}")))?;
            if frameworks.contains(&fw) {
                return Err(diag.err("run", "frameworks", format!("framework {f:?} listed twice")));
            }
            frameworks.push(fw);
        }
        let t_end = self.run.t_end_omega0;
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(diag.err("run", "t_end_omega0", "must be positive"));
        }
        let dt = match (self.run.dt_omega0, self.run.steps_per_min_delay) {
            (Some(dt), None) => dt,
            (None, Some(k)) if k > 0 => {
                let set = wqed::dde::DelaySet::new(&layout, setup.omega0);
                let tau = set.min_nonzero_delay().unwrap_or(layout.min_spacing());
                tau / k as f64
            }
            (None, Some(_)) => return Err(diag.err("run", "steps_per_min_delay", "must be positive")),
            (Some(_), Some(_)) => return Err(diag.err("run", "dt_omega0", "give either dt_omega0 or steps_per_min_delay, not both")),
            (None, None) => return Err(CliError::config("[run] needs dt_omega0 or steps_per_min_delay")),
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(diag.err("run", "dt_omega0", "must be positive"));
        }
        let dt_key = if self.run.dt_omega0.is_some() { "dt_omega0" } else { "steps_per_min_delay" };
        if frameworks.iter().any(|f| *f != Framework::Retard) {
            if dt > 0.02 * (1.0 + 1e-12) {
                return Err(diag.err("run", dt_key, format!("time step {dt} exceeds 0.02/omega0 required by the Volterra solver")));
            }
            if t_end > 1e3 * (1.0 + 1e-12) {
                return Err(diag.err("run", "t_end_omega0", "exceeds 1000/omega0 allowed by the Volterra solver"));
            }
        }
        if frameworks.contains(&Framework::Retard) {
            let set = wqed::dde::DelaySet::new(&layout, setup.omega0);
            wqed::dde::check_alignment(&set, dt).map_err(|e| diag.err("run", dt_key, e))?;
        }

        for w in &self.outputs.which {
            if !OUTPUT_KINDS.contains(&w.as_str()) {
                return Err(diag.err("outputs", "which", format!("unknown output {w:?}; expected one of {OUTPUT_KINDS:?}")));
            }
        }
        if self.outputs.field_points_per_d == 0 {
            return Err(diag.err("outputs", "field_points_per_d", "must be positive"));
        }
        if self.outputs.field_time_stride == 0 {
            return Err(diag.err("outputs", "field_time_stride", "must be positive"));
        }
        if !(self.outputs.field_margin_d.is_finite() && self.outputs.field_margin_d >= 0.0) {
            return Err(diag.err("outputs", "field_margin_d", "must be non-negative"));
        }
        Ok(Scenario { config: self.clone(), setup, layout, state, frameworks, dt, t_end })
    }

    fn build_layout(&self, diag: &Diag) -> Result<CouplingLayout, CliError> {
        let l = &self.layout;
        let spacing = || -> Result<f64, CliError> {
            let d = l.d_in_units_of_pi_over_k0.ok_or_else(|| diag.err("layout", "d_in_units_of_pi_over_k0", "missing"))?;
            if !(d.is_finite() && d > 0.0) {
                return Err(diag.err("layout", "d_in_units_of_pi_over_k0", "must be positive"));
            }
            Ok(d * PI)
        };
        let n_atoms = || l.n_atoms.ok_or_else(|| diag.err("layout", "n_atoms", "missing"));
        match l.topology.as_str() {
            "separate" => {
                let m = l.n_legs.ok_or_else(|| diag.err("layout", "n_legs", "missing"))?;
                CouplingLayout::build_separate(n_atoms()?, m, spacing()?, l.centered).map_err(|e| diag.err("layout", "n_atoms", e))
            }
            "braided" => {
                if l.n_legs.is_some_and(|m| m != 2) {
                    return Err(diag.err("layout", "n_legs", "braided layouts have two legs per emitter"));
                }
                CouplingLayout::build_braided(n_atoms()?, spacing()?, l.centered).map_err(|e| diag.err("layout", "n_atoms", e))
            }
            "custom" => {
                let pos = l.positions.clone().ok_or_else(|| diag.err("layout", "positions", "missing"))?;
                let scaled = pos.into_iter().map(|legs| legs.into_iter().map(|x| x * PI).collect()).collect();
                CouplingLayout::from_positions(scaled).map_err(|e| diag.err("layout", "positions", e))
            }
            other => Err(diag.err("layout", "topology", format!("expected separate, braided or custom, got {other:?}"))),
        }
    }

    fn build_state(&self, diag: &Diag, layout: &CouplingLayout, setup: &WaveguideSetup) -> Result<AmplitudeVector, CliError> {
        let n = layout.n_atoms();
        match self.state.kind.as_str() {
            "timed_dicke_plus" => timed_dicke(layout, setup, Direction::Plus).map_err(|e| diag.err("state", "kind", e)),
            "timed_dicke_minus" => timed_dicke(layout, setup, Direction::Minus).map_err(|e| diag.err("state", "kind", e)),
            "subradiant" => subradiant_state(&effective_hamiltonian(layout, setup))
                .map(|(v, _)| v)
                .map_err(|e| diag.err("state", "kind", e)),
            "excited_single" => {
                let a = self.state.atom.unwrap_or(1);
                if a == 0 || a > n {
                    return Err(diag.err("state", "atom", format!("must lie in 1..={n}")));
                }
                AmplitudeVector::excited(n, a - 1).map_err(|e| diag.err("state", "atom", e))
            }
            "custom" => {
                let re = self.state.amplitudes_re.clone().ok_or_else(|| diag.err("state", "amplitudes_re", "missing"))?;
                let im = self.state.amplitudes_im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if re.len() != n || im.len() != n {
                    return Err(diag.err("state", "amplitudes_re", format!("need {n} real and imaginary parts")));
                }
                let amps = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
                AmplitudeVector::normalized(amps, StateLabel::Custom).map_err(|e| diag.err("state", "amplitudes_re", e))
            }
            other => Err(diag.err(
                "state",
                "kind",
                format!("expected timed_dicke_plus, timed_dicke_minus, subradiant, excited_single or custom, got {other:?}"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[setup]
model = "const"
gamma0_over_omega0 = 1e-4
cutoff_ratio = 1e4

[layout]
topology = "separate"
n_atoms = 1
n_legs = 2
d_in_units_of_pi_over_k0 = 0.1

[state]
kind = "excited_single"

[run]
t_end_omega0 = 10.0
dt_omega0 = 0.01
frameworks = ["const"]
"#;

    #[test]
    fn parses_and_builds() {
        let c = ScenarioConfig::parse(BASE).unwrap();
        let s = c.build(BASE).unwrap();
        assert_eq!(s.layout.n_legs(), 2);
        assert_eq!(s.frameworks, vec![Framework::Const]);
        assert_eq!(c.outputs.which, vec!["trajectories", "rates"]);
        assert_eq!(c.hash(), ScenarioConfig::parse(&c.to_toml()).unwrap().hash());
        assert_eq!(c.hash().len(), 12);
    }

    #[test]
    fn diagnostics_carry_lines() {
        let src = BASE.replace("frameworks = [\"const\"]", "frameworks = []");
        let e = ScenarioConfig::parse(&src).unwrap().build(&src).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.starts_with("line 19:"), "{}", e.message);

        let src = BASE.replace("frameworks = [\"const\"]", "frameworks = [\"retard\"]");
        let e = ScenarioConfig::parse(&src).unwrap().build(&src).unwrap_err();
        assert!(e.message.contains("line 18") && e.message.contains("tau = 0.314159"), "{}", e.message);

        let src = BASE.replace("kind = \"excited_single\"", "kind = \"excited_single\"\ncolour = 3");
        let e = ScenarioConfig::parse(&src).unwrap_err();
        assert!(e.message.contains("line 15"), "{}", e.message);
    }

    #[test]
    fn step_from_delay() {
        let src = BASE.replace("dt_omega0 = 0.01", "steps_per_min_delay = 32").replace("[\"const\"]", "[\"const\", \"retard\"]");
        let s = ScenarioConfig::parse(&src).unwrap().build(&src).unwrap();
        assert!((s.dt - 0.1 * PI / 32.0).abs() < 1e-15);
    }

    #[test]
    fn line_lookup() {
        assert_eq!(line_of(BASE, "run", "dt_omega0"), Some(18));
        assert_eq!(line_of(BASE, "setup", "dt_omega0"), None);
    }
}
